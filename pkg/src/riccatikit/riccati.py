"""The Riccati equation phi_x = a phi^2 + b phi + c as a first-class object.

Covers the fraction-linear transformation group acting on Riccati equations,
construction of the general solution from one particular solution, the
cross-ratio formula for a fourth solution from three, the equivalence with
second-order linear ODEs (in the convention psi_xx = b psi_x + c psi), the
Hermite ladder and polynomials, movable-pole series, first-order operator
factorization, constant-coefficient kernels, and the first-integral check for
the coupled Riccati system studied by Kovalevskii.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import expr as ex
from . import numeric

__all__ = [
    "RiccatiEq",
    "Lode2",
    "MobiusMap",
    "SolutionFamily",
    "sample_points",
    "riccati_residual",
    "mobius_transform",
    "general_from_particular",
    "cross_ratio_solution",
    "convert_re_lode",
    "canonical_form",
    "second_solution",
    "hermite_polynomial",
    "hermite_ladder",
    "inverse_hermite_ladder",
    "pole_series",
    "lodo_const_kernel",
    "KernelBasis",
    "lode_factor",
    "FactorizationResult",
    "kovalevskii_check",
    "KovalevskiiReport",
]

DEFAULT_INTERVAL = (-5.0, 5.0)
SAMPLE_COUNT = 32
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class RiccatiEq:
    """Coefficients of phi_x = a(x) phi^2 + b(x) phi + c(x)."""

    a: ex.Expression
    b: ex.Expression
    c: ex.Expression

    def __post_init__(self):
        object.__setattr__(self, "a", ex.as_expression(self.a))
        object.__setattr__(self, "b", ex.as_expression(self.b))
        object.__setattr__(self, "c", ex.as_expression(self.c))

    @property
    def is_linear(self):
        return ex.is_zero(self.a)

    def residual(self, phi, var="x", points=None):
        return riccati_residual(self, phi, var=var, points=points)


@dataclass(frozen=True)
class Lode2:
    """Coefficients of psi_xx = b(x) psi_x + c(x) psi."""

    b: ex.Expression
    c: ex.Expression

    def __post_init__(self):
        object.__setattr__(self, "b", ex.as_expression(self.b))
        object.__setattr__(self, "c", ex.as_expression(self.c))

    def residual(self, psi, var="x", points=None):
        d1 = ex.diff(psi, var)
        d2 = ex.diff(d1, var)
        res = ex.sub(d2, ex.add(ex.mul(self.b, d1), ex.mul(self.c, psi)))
        pts = points if points is not None else sample_points([psi, res], var=var)
        vals = np.array([abs(res.evaluate({var: p})) for p in pts])
        scale = max(1.0, max(abs(d2.evaluate({var: p})) for p in pts))
        return float(np.max(vals) / scale)


@dataclass(frozen=True)
class MobiusMap:
    """Fraction-linear map phi -> (alpha phi + beta) / (gamma phi + delta)."""

    alpha: ex.Expression
    beta: ex.Expression
    gamma: ex.Expression
    delta: ex.Expression

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, ex.as_expression(getattr(self, name)))

    def determinant(self):
        return ex.sub(ex.mul(self.alpha, self.delta), ex.mul(self.beta, self.gamma))

    def apply(self, phi):
        num = ex.add(ex.mul(self.alpha, phi), self.beta)
        den = ex.add(ex.mul(self.gamma, phi), self.delta)
        return ex.mul(num, ex.recip(den))

    def compose(self, other):
        """Map equal to self applied after ``other`` (matrix product)."""
        a, b, g, d = self.alpha, self.beta, self.gamma, self.delta
        a2, b2, g2, d2 = other.alpha, other.beta, other.gamma, other.delta
        return MobiusMap(
            ex.add(ex.mul(a, a2), ex.mul(b, g2)),
            ex.add(ex.mul(a, b2), ex.mul(b, d2)),
            ex.add(ex.mul(g, a2), ex.mul(d, g2)),
            ex.add(ex.mul(g, b2), ex.mul(d, d2)),
        )


def sample_points(exprs, interval=DEFAULT_INTERVAL, n=SAMPLE_COUNT, var="x", limit=1e8):
    """Evaluation points in the working interval where all exprs stay finite.

    Singular points (evaluation errors or huge magnitudes) are skipped; at
    least half of the requested points must survive.
    """
    lo, hi = interval
    candidates = np.linspace(lo, hi, 4 * n + 1)[1:-1]
    good = []
    for p in candidates:
        ok = True
        for e in exprs:
            try:
                v = ex.as_expression(e).evaluate({var: float(p)})
            except (ex.EvalDomainError, OverflowError, ZeroDivisionError):
                ok = False
                break
            if not np.isfinite(v) or abs(v) > limit:
                ok = False
                break
        if ok:
            good.append(float(p))
    if len(good) < n // 2:
        raise ValueError("could not find enough regular sample points in the interval")
    stride = max(1, len(good) // n)
    return good[::stride][:n]


def riccati_residual(eq, phi, var="x", points=None):
    """Relative residual of phi against the equation, maximised over samples."""
    phi = ex.as_expression(phi)
    dphi = ex.diff(phi, var)
    rhs = ex.add(ex.mul(eq.a, ex.intpow(phi, 2)), ex.mul(eq.b, phi), eq.c)
    res = ex.sub(dphi, rhs)
    pts = points if points is not None else sample_points([phi, res], var=var)
    worst = 0.0
    for p in pts:
        scale = max(1.0, abs(rhs.evaluate({var: p})), abs(dphi.evaluate({var: p})))
        worst = max(worst, abs(res.evaluate({var: p})) / scale)
    return worst


# ---------------------------------------------------------------------------
# transformation group


def _invert(eq):
    return RiccatiEq(ex.neg(eq.c), ex.neg(eq.b), ex.neg(eq.a))


def _scale(eq, alpha, var):
    dlog = ex.mul(ex.diff(alpha, var), ex.recip(alpha))
    return RiccatiEq(
        ex.mul(eq.a, ex.recip(alpha)),
        ex.add(eq.b, dlog),
        ex.mul(alpha, eq.c),
    )


def _shift(eq, beta, var):
    new_c = ex.add(
        ex.mul(eq.a, ex.intpow(beta, 2)),
        ex.neg(ex.mul(eq.b, beta)),
        eq.c,
        ex.diff(beta, var),
    )
    return RiccatiEq(eq.a, ex.sub(eq.b, ex.mul(2, eq.a, beta)), new_c)


def mobius_transform(eq, m, var="x"):
    """Riccati equation satisfied by (alpha phi + beta)/(gamma phi + delta).

    The map is decomposed into the three generators (scale, shift, invert);
    for gamma != 0 the chain is scale by gamma, shift by delta, invert,
    scale by -det/gamma, shift by alpha/gamma.
    """
    det = m.determinant()
    pts = sample_points([det], var=var)
    vals = [abs(det.evaluate({var: p})) for p in pts]
    if max(vals) < 1e-12:
        raise ValueError("degenerate map: determinant vanishes identically")

    if ex.is_zero(m.gamma):
        out = _scale(eq, ex.mul(m.alpha, ex.recip(m.delta)), var)
        return _shift(out, ex.mul(m.beta, ex.recip(m.delta)), var)
    out = eq
    if not _is_const_one(m.gamma):
        out = _scale(out, m.gamma, var)
    if not ex.is_zero(m.delta):
        out = _shift(out, m.delta, var)
    out = _invert(out)
    scale2 = ex.neg(ex.mul(det, ex.recip(m.gamma)))
    out = _scale(out, scale2, var)
    shift2 = ex.mul(m.alpha, ex.recip(m.gamma))
    if not ex.is_zero(shift2):
        out = _shift(out, shift2, var)
    return out


def _is_const_one(e):
    return isinstance(e, ex.Rational) and e.value == 1


# ---------------------------------------------------------------------------
# solution construction


class SolutionFamily:
    """One-parameter family C -> Expression of solutions of one equation."""

    def __init__(self, eq, build, particular=None):
        self.eq = eq
        self._build = build
        self.particular = particular

    def __call__(self, constant):
        return self._build(ex.as_expression(constant))


def general_from_particular(eq, phi1=None, var="x", check=True):
    """General solution family from one particular solution.

    In the linear case (a == 0) no particular solution is needed: the family
    is z * (int(c/z) + C) with z = exp(int b).  Otherwise phi1 must solve the
    equation; the substitution phi = phi1 + 1/w turns it into a first-order
    linear equation for w which is solved by variation of constants.
    """
    if eq.is_linear:
        z = ex.exp(ex.antiderivative(eq.b, var))
        f = ex.antiderivative(ex.mul(eq.c, ex.recip(z)), var)
        return SolutionFamily(eq, lambda c: ex.mul(z, ex.add(f, c)))

    if phi1 is None:
        raise ValueError("a particular solution is required when a != 0")
    phi1 = ex.as_expression(phi1)
    if check:
        r = riccati_residual(eq, phi1, var=var)
        if r > RESIDUAL_TOL:
            raise ValueError(f"phi1 is not a solution: relative residual {r:.3g}")

    b_tilde = ex.add(eq.b, ex.mul(2, eq.a, phi1))
    z = ex.exp(ex.antiderivative(ex.neg(b_tilde), var))
    # phi = phi1 + 1/w with w' = -b_tilde w - a, solved by variation of constants
    f = ex.antiderivative(ex.neg(ex.mul(eq.a, ex.recip(z))), var)

    def build(c):
        w = ex.mul(z, ex.add(f, c))
        return ex.add(phi1, ex.recip(w))

    return SolutionFamily(eq, build, particular=phi1)


def cross_ratio_solution(phi1, phi2, phi3, a_const, var="x"):
    """Fourth solution from three known ones via the cross-ratio formula.

    With R = A (phi3 - phi1)/(phi3 - phi2), the new solution is
    (phi1 - R phi2)/(1 - R); A = 0 gives phi1 and A = 1 gives phi3.
    """
    phi1, phi2, phi3 = map(ex.as_expression, (phi1, phi2, phi3))
    diffs = [ex.sub(phi3, phi1), ex.sub(phi3, phi2), ex.sub(phi1, phi2)]
    pts = sample_points(diffs, var=var)
    for d in diffs:
        if max(abs(d.evaluate({var: p})) for p in pts) < 1e-12:
            raise ValueError("the three solutions must be pairwise distinct")
    r = ex.mul(ex.as_expression(a_const), diffs[0], ex.recip(diffs[1]))
    one_minus = ex.sub(ex.ONE, r)
    if max(abs(one_minus.evaluate({var: p})) for p in pts) < 1e-12:
        raise ValueError("degenerate constant: R is identically 1")
    return ex.mul(ex.sub(phi1, ex.mul(r, phi2)), ex.recip(one_minus))


# ---------------------------------------------------------------------------
# second-order linear equations


def convert_re_lode(direction, eq, var="x"):
    """Convert between Riccati form and second-order linear form.

    direction="lode_to_re": psi_xx = b psi_x + c psi with phi = -psi_x/psi
    becomes phi_x = phi^2 + b phi - c, i.e. coefficients (1, b, -c).

    direction="re_to_lode": phi_x = a phi^2 + b phi + c with a != 0 and
    phi = -psi_x/(a psi) becomes psi_xx = (a_x/a + b) psi_x - c a psi.

    The two maps are mutually inverse for a = 1.  Returns (converted,
    description of the change of variables).
    """
    if direction == "lode_to_re":
        out = RiccatiEq(ex.ONE, eq.b, ex.neg(eq.c))
        return out, "phi = -psi_x/psi"
    if direction == "re_to_lode":
        if eq.is_linear:
            raise ValueError("a == 0: the equation is already linear first-order")
        b_new = ex.add(ex.mul(ex.diff(eq.a, var), ex.recip(eq.a)), eq.b)
        c_new = ex.neg(ex.mul(eq.c, eq.a))
        return Lode2(b_new, c_new), "phi = -psi_x/(a*psi)"
    raise ValueError("direction must be 'lode_to_re' or 're_to_lode'")


def canonical_form(l, var="x"):
    """Gauge away the first-derivative term of a second-order equation.

    For psi_xx = b psi_x + c psi the substitution psi = gauge * psi_hat with
    gauge = exp((1/2) int b dx) yields psi_hat_xx + c_hat psi_hat = 0 with
    c_hat = -c - b^2/4 + b_x/2.  Returns (c_hat, gauge).
    """
    c_hat = ex.add(
        ex.neg(l.c),
        ex.neg(ex.mul(ex.Rational(Fraction(1, 4)), ex.intpow(l.b, 2))),
        ex.mul(ex.Rational(Fraction(1, 2)), ex.diff(l.b, var)),
    )
    gauge = ex.exp(ex.mul(ex.Rational(Fraction(1, 2)), ex.antiderivative(l.b, var)))
    return c_hat, gauge


def second_solution(l, psi1, var="x", interval=DEFAULT_INTERVAL):
    """Independent second solution psi1 * int dx/psi1^2 of a canonical equation.

    Requires the first-derivative coefficient to vanish and psi1 to be free
    of zeros on the working interval (a zero would require splitting the
    quadrature and is reported instead).  The pair has Wronskian one.
    """
    if not ex.is_zero(l.b):
        raise ValueError("second_solution expects a canonical equation (b == 0)")
    psi1 = ex.as_expression(psi1)
    pts = np.linspace(interval[0], interval[1], 257)
    vals = []
    for p in pts:
        try:
            vals.append(psi1.evaluate({var: float(p)}))
        except (ex.EvalDomainError, OverflowError):
            vals.append(np.nan)
    vals = np.array(vals, dtype=float)
    finite = vals[np.isfinite(vals)]
    if finite.size and (np.nanmin(finite) < 0 < np.nanmax(finite) or np.any(finite == 0)):
        raise ValueError("psi1 changes sign or vanishes in the interval; split the quadrature")
    integral = ex.antiderivative(ex.recip(ex.intpow(psi1, 2)), var)
    return ex.mul(psi1, integral)


# ---------------------------------------------------------------------------
# the Hermite family


def hermite_coefficients(n):
    """Ascending exact coefficients of the n-th Hermite polynomial.

    Built from the three-term recurrence H_{n+1} = 2x H_n - 2n H_{n-1}.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    prev = [Fraction(1)]
    if n == 0:
        return prev
    cur = [Fraction(0), Fraction(2)]
    for m in range(1, n):
        nxt = [Fraction(0)] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= 2 * m * c
        prev, cur = cur, nxt
    return cur


def rodrigues_coefficients(n):
    """Same polynomials from the derivative route (-1)^n e^{x^2} d^n/dx^n e^{-x^2}.

    The n-th derivative of e^{-x^2} is P_n(x) e^{-x^2} with
    P_{n+1} = P_n' - 2x P_n, done exactly on coefficient lists.
    """
    p = [Fraction(1)]
    for _ in range(n):
        dp = [i * c for i, c in enumerate(p)][1:] or [Fraction(0)]
        minus2x = [Fraction(0)] + [-2 * c for c in p]
        m = max(len(dp), len(minus2x))
        p = [(dp[i] if i < len(dp) else 0) + (minus2x[i] if i < len(minus2x) else 0) for i in range(m)]
    sign = Fraction(-1) ** n
    return [sign * c for c in p]


def hermite_polynomial(n):
    """Hermite polynomial omega and the Riccati witness y = -x + omega_x/omega.

    y satisfies y' + y^2 = x^2 - 2n - 1.
    """
    coeffs = hermite_coefficients(n)
    x = ex.Var("x")
    omega = ex.add(*[ex.mul(ex.Rational(c), ex.intpow(x, i)) for i, c in enumerate(coeffs)])
    y = ex.add(ex.neg(x), ex.mul(ex.diff(omega, "x"), ex.recip(omega)))
    return omega, y


def hermite_ladder(y, alpha, var="x"):
    """One rung up the ladder for y' + y^2 = x^2 + alpha.

    Returns (y_hat, alpha + 2) with y_hat = x + (alpha + 1)/(y + x); the
    denominator must not vanish identically.
    """
    y = ex.as_expression(y)
    x = ex.Var(var)
    den = ex.add(y, x)
    pts = sample_points([den], var=var)
    if max(abs(den.evaluate({var: p})) for p in pts) < 1e-12:
        raise ValueError("y + x vanishes identically: ladder undefined")
    y_hat = ex.add(x, ex.mul(ex.as_expression(alpha + 1), ex.recip(den)))
    return y_hat, alpha + 2


def inverse_hermite_ladder(y_hat, alpha_hat, var="x"):
    """One rung down: y = -x + (alpha_hat - 1)/(y_hat - x), parameter alpha_hat - 2."""
    y_hat = ex.as_expression(y_hat)
    x = ex.Var(var)
    den = ex.sub(y_hat, x)
    pts = sample_points([den], var=var)
    if max(abs(den.evaluate({var: p})) for p in pts) < 1e-12:
        raise ValueError("y_hat - x vanishes identically: inverse ladder undefined")
    y = ex.add(ex.neg(x), ex.mul(ex.as_expression(alpha_hat - 1), ex.recip(den)))
    return y, alpha_hat - 2


def pole_series(alpha, eps, depth):
    """Coefficients a_0..a_depth of the movable-pole expansion.

    The solution y = 1/(x + eps) + a_0 + a_1 (x + eps) + ... of
    y' + y^2 = x^2 + alpha satisfies a_0 = 0 and

        (j + 2) a_j + sum_{i+l=j-1} a_i a_l = [x^2 + alpha]_{j-1},

    where the right-hand side collects the coefficient of (x + eps)^{j-1} in
    (s - eps)^2 + alpha.  Exact rationals when alpha and eps are rational.
    """
    exact = not (isinstance(alpha, float) or isinstance(eps, float))
    if exact:
        alpha = Fraction(alpha)
        eps = Fraction(eps)
        zero = Fraction(0)
    else:
        alpha = float(alpha)
        eps = float(eps)
        zero = 0.0
    rhs = {0: eps * eps + alpha, 1: -2 * eps, 2: zero + 1}
    a = [zero]
    for j in range(1, depth + 1):
        conv = sum((a[i] * a[j - 1 - i] for i in range(j)), zero)
        num = rhs.get(j - 1, zero) - conv
        a.append(num / (j + 2) if exact else num / (j + 2))
    return a


# ---------------------------------------------------------------------------
# operators


@dataclass
class KernelBasis:
    functions: list
    roots: list
    backward_error: float


def lodo_const_kernel(coeffs):
    """Kernel basis of d^n/dx^n + a_1 d^{n-1}/dx^{n-1} + ... + a_n.

    Every characteristic root lambda of multiplicity m contributes
    x^s e^{lambda x} for s < m; complex pairs are returned as
    x^s e^{px} cos(qx), x^s e^{px} sin(qx).
    """
    coeffs = [float(v) for v in coeffs]
    n = len(coeffs)
    if n < 1:
        raise ValueError("need at least one coefficient")
    char = numeric.DensePoly(list(reversed(coeffs)) + [1.0])
    if all(v == 0 for v in coeffs):
        roots = numeric.RootResult([(0j, n)], 0.0)
    else:
        roots = numeric.polyroots(char)
    if roots.backward_error > 1e-6:
        raise numeric.NumericError(
            f"characteristic roots are ill-conditioned: backward error {roots.backward_error:.3g}"
        )

    x = ex.Var("x")
    basis = []
    used = set()
    for idx, (lam, mult) in enumerate(roots.roots):
        if idx in used:
            continue
        if abs(lam.imag) <= 1e-10:
            carrier = [ex.exp(ex.mul(ex.Real(lam.real), x))] if lam.real != 0 else [ex.ONE]
            for s in range(mult):
                basis.append(ex.mul(ex.intpow(x, s), *carrier))
        else:
            partner = None
            for jdx, (mu, mult2) in enumerate(roots.roots):
                if jdx != idx and jdx not in used and abs(mu - lam.conjugate()) < 1e-7 * max(1.0, abs(lam)):
                    partner = jdx
                    break
            if partner is None:
                raise numeric.NumericError("complex root without conjugate partner")
            used.add(partner)
            p, q = lam.real, abs(lam.imag)
            damp = [ex.exp(ex.mul(ex.Real(p), x))] if p != 0 else []
            for s in range(mult):
                basis.append(ex.mul(ex.intpow(x, s), *damp, ex.cos(ex.mul(ex.Real(q), x))))
                basis.append(ex.mul(ex.intpow(x, s), *damp, ex.sin(ex.mul(ex.Real(q), x))))
        used.add(idx)
    return KernelBasis(basis, roots.roots, roots.backward_error)


@dataclass
class FactorizationResult:
    a: ex.Expression
    remainder: ex.Expression
    magnitude: float


def lode_factor(l, psi1, var="x"):
    """Right-divide the operator of ``l`` by (d/dx - psi1'/psi1).

    For psi_xx = b psi_x + c psi the operator is D^2 - b D - c; with
    a = psi1'/psi1 the division remainder is the function
    a' + a^2 - b a - c, which vanishes exactly when psi1 is in the kernel.
    Non-membership shows up as a large remainder, not an error.
    """
    psi1 = ex.as_expression(psi1)
    a = ex.mul(ex.diff(psi1, var), ex.recip(psi1))
    remainder = ex.add(
        ex.diff(a, var),
        ex.intpow(a, 2),
        ex.neg(ex.mul(l.b, a)),
        ex.neg(l.c),
    )
    pts = sample_points([a, remainder], var=var)
    magnitude = max(abs(remainder.evaluate({var: p})) for p in pts)
    return FactorizationResult(a, remainder, magnitude)


# ---------------------------------------------------------------------------
# Kovalevskii first integrals


@dataclass
class KovalevskiiReport:
    drifts: dict
    max_drift: float
    span: tuple


def kovalevskii_check(n, y0, span, tol=1e-10, samples=201):
    """Integrate y_j' = s y_j - 2 y_j^2 (s = sum of all y) and track integrals.

    For n = 3 the quadratic integrals F1 = (y1 - y2) y3 and F2 = (y2 - y3) y1
    are monitored; for n >= 4 every 4-index cross-ratio
    (y_l - y_i)(y_k - y_j) / ((y_l - y_j)(y_k - y_i)), whose log-derivative
    telescopes to zero along the flow.  Reports the maximal relative drift
    over the span.  Blow-up during integration raises IntegrationBlowUp with
    the location.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    y0 = np.asarray(y0, dtype=float)
    if y0.size != n:
        raise ValueError("initial state size must equal n")
    if len(set(y0.tolist())) != n and n >= 4:
        raise ValueError("initial components must be pairwise distinct")

    def rhs(x, y):
        s = float(np.sum(y))
        return s * y - 2 * y * y

    traj = numeric.integrate_ivp(rhs, span[0], y0, span[1], tol=tol)
    xs = np.linspace(span[0], span[1], samples)
    ys = traj(xs)

    integrals = {}
    if n == 3:
        integrals["F1"] = (ys[:, 0] - ys[:, 1]) * ys[:, 2]
        integrals["F2"] = (ys[:, 1] - ys[:, 2]) * ys[:, 0]
    else:
        for (i, j, k, l) in itertools.combinations(range(n), 4):
            num = (ys[:, l] - ys[:, i]) * (ys[:, k] - ys[:, j])
            den = (ys[:, l] - ys[:, j]) * (ys[:, k] - ys[:, i])
            integrals[f"CR{i + 1}{j + 1}{k + 1}{l + 1}"] = num / den

    drifts = {}
    for name, vals in integrals.items():
        ref = vals[0]
        drifts[name] = float(np.max(np.abs(vals - ref)) / max(1.0, abs(ref)))
    return KovalevskiiReport(drifts, max(drifts.values()), span)
