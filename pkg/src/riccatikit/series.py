"""Formal series in the spectral parameter with differential-polynomial coefficients.

Three constructions live here: the log-derivative series f (and its mirror g)
solving f_x + f^2 = generalized potential, the modified-Schwarzian series
h = 1 + h_1/lambda + ..., and the recurrent zeta chain that produces potential
coefficients for truncated wavefunction series.
"""

from __future__ import annotations

from fractions import Fraction

from . import expr as ex
from .diffpoly import DiffPolynomial

__all__ = ["FormalSeries", "riccati_series", "modschwarz_series", "zeta_chain"]


class FormalSeries:
    """Sum_d c_d * lambda^d with DiffPolynomial coefficients.

    ``floor`` is the truncation floor: coefficients for degrees >= floor are
    exact, anything below is unknown and dropped.  ``floor=None`` marks an
    exact (polynomial) series.
    """

    __slots__ = ("terms", "floor")

    def __init__(self, terms=None, floor=None):
        self.terms = {}
        if terms:
            for d, p in terms.items():
                if not isinstance(p, DiffPolynomial):
                    p = DiffPolynomial.constant(p)
                if not p.is_zero():
                    self.terms[d] = p
        self.floor = floor
        if floor is not None:
            self.terms = {d: p for d, p in self.terms.items() if d >= floor}

    @property
    def lead(self):
        return max(self.terms) if self.terms else (self.floor if self.floor is not None else 0)

    def coeff(self, d):
        if self.floor is not None and d < self.floor:
            raise ValueError(f"degree {d} is below the truncation floor {self.floor}")
        return self.terms.get(d, DiffPolynomial.zero())

    def __add__(self, other):
        other = _coerce(other)
        floor = _max_floor(self.floor, other.floor)
        out = dict(self.terms)
        for d, p in other.terms.items():
            out[d] = out.get(d, DiffPolynomial.zero()) + p
        return FormalSeries(out, floor)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries({d: -p for d, p in self.terms.items()}, self.floor)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __mul__(self, other):
        other = _coerce(other)
        floor = None
        if self.floor is not None or other.floor is not None:
            fa = self.floor if self.floor is not None else min(self.terms, default=0)
            fb = other.floor if other.floor is not None else min(other.terms, default=0)
            candidates = []
            if self.floor is not None:
                candidates.append(self.floor + other.lead)
            if other.floor is not None:
                candidates.append(other.floor + self.lead)
            floor = max(candidates)
        out = {}
        for d1, p1 in self.terms.items():
            for d2, p2 in other.terms.items():
                d = d1 + d2
                if floor is not None and d < floor:
                    continue
                out[d] = out.get(d, DiffPolynomial.zero()) + p1 * p2
        return FormalSeries(out, floor)

    __rmul__ = __mul__

    def d_x(self):
        return FormalSeries({d: p.d_x() for d, p in self.terms.items()}, self.floor)

    def shift(self, m):
        """Multiply by lambda^m."""
        floor = None if self.floor is None else self.floor + m
        return FormalSeries({d + m: p for d, p in self.terms.items()}, floor)

    def __repr__(self):
        body = ", ".join(f"{d}: {p}" for d, p in sorted(self.terms.items(), reverse=True))
        return f"FormalSeries({{{body}}}, floor={self.floor})"


def _coerce(v):
    if isinstance(v, FormalSeries):
        return v
    if isinstance(v, DiffPolynomial):
        return FormalSeries({0: v})
    return FormalSeries({0: DiffPolynomial.constant(v)})


def _max_floor(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _potential_pair(m):
    if m == 1:
        return DiffPolynomial.zero(), DiffPolynomial.symbol(1)
    if m == 2:
        return DiffPolynomial.symbol(1), DiffPolynomial.symbol(2)
    raise ValueError("generalized potential degree m must be 1 or 2")


def riccati_series(m, depth):
    """Asymptotic log-derivative series pair (f, g) for the degree-m potential.

    f = p + f_0 + f_1/p + ... and g = -p + g_0 + g_1/p + ... solve
    w_x + w^2 = potential, with the parameter p equal to lambda for m = 2 and
    to k (lambda = k^2) for m = 1.  Coefficients are differential polynomials
    determined by the triangular systems

        2 f_0 = u_1,   2 f_1 + f_0' + f_0^2 = u_2,
        2 f_{j+1} + f_j' + sum_{i+l=j} f_i f_l = 0;

    the g system carries -2 on the left-hand sides.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    u1, u2 = _potential_pair(m)
    two = Fraction(2)

    f = [u1 / two]
    g = [-u1 / two]
    if depth >= 1:
        f.append((u2 - f[0].d_x() - f[0] * f[0]) / two)
        g.append((g[0].d_x() + g[0] * g[0] - u2) / two)
    for j in range(1, depth):
        conv_f = sum((f[i] * f[j - i] for i in range(j + 1)), DiffPolynomial.zero())
        conv_g = sum((g[i] * g[j - i] for i in range(j + 1)), DiffPolynomial.zero())
        f.append(-(f[j].d_x() + conv_f) / two)
        g.append((g[j].d_x() + conv_g) / two)

    fs = FormalSeries({1: DiffPolynomial.constant(1)}, floor=-depth)
    gs = FormalSeries({1: DiffPolynomial.constant(-1)}, floor=-depth)
    for j in range(depth + 1):
        fs = fs + FormalSeries({-j: f[j]})
        gs = gs + FormalSeries({-j: g[j]})
    return fs, gs


def modschwarz_series(m, depth):
    """Series h = 1 + sum_k h_k lambda^{-k} solving the modified-Schwarzian equation.

    h is matched order by order against

        (3/4) h_x^2 - (1/2) h h_xx + lambda^m h^4 = U(x, lambda) h^2,

    the equation multiplied through by h^2, where
    U = lambda^m + u_1 lambda^{m-1} + ... + u_m.  Every unknown h_k enters its
    order linearly with coefficient 2, so the system is triangular.
    """
    if m < 1:
        raise ValueError("potential degree m must be at least 1")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    u_terms = {m: DiffPolynomial.constant(1)}
    for i in range(1, m + 1):
        u_terms[m - i] = DiffPolynomial.symbol(i)
    potential = FormalSeries(u_terms)

    h = FormalSeries({0: DiffPolynomial.constant(1)}, floor=0)
    for k in range(1, depth + 1):
        h = FormalSeries(h.terms, floor=-k)
        residual = _modschwarz_residual(h, potential, m)
        hk = -(residual.coeff(m - k)) / Fraction(2)
        h = h + FormalSeries({-k: hk})
    return h


def _modschwarz_residual(h, potential, m):
    hx = h.d_x()
    hxx = hx.d_x()
    h2 = h * h
    return hx * hx * Fraction(3, 4) - h * hxx * Fraction(1, 2) + (h2 * h2).shift(m) - potential * h2


def zeta_chain(u, count, var="x", constants=None, allow_quadrature=True):
    """Coefficients zeta_1..zeta_count of the truncated wavefunction series.

    Each step integrates zeta_{j+1}' = (u zeta_j - zeta_j'')/2 in closed form
    when the integrand matches a known pattern; otherwise a quadrature-backed
    antiderivative is used (or an error raised when ``allow_quadrature`` is
    false).  ``constants`` supplies one integration constant per step,
    defaulting to zero, which for decaying potentials reproduces the
    symmetric-tail normalisation of the solitonic chain.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    constants = list(constants) if constants is not None else [0] * count
    if len(constants) != count:
        raise ValueError("need one integration constant per chain element")

    u = ex.as_expression(u)
    out = []
    zeta = ex.ONE
    for j in range(count):
        integrand = ex.mul(ex.Rational(Fraction(1, 2)), ex.sub(ex.mul(u, zeta), ex.diff(zeta, var, 2)))
        anti = ex.antiderivative(integrand, var)
        if ex.contains_quadrature(anti) and not allow_quadrature:
            raise ValueError(f"no closed-form antiderivative for zeta_{j + 1}")
        zeta = ex.add(anti, ex.as_expression(constants[j]))
        out.append(zeta)
    return out
