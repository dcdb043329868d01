"""Differential polynomials over formal potential symbols.

A DiffPolynomial is a polynomial with exact rational coefficients in the
symbols u_i and their x-derivatives u_i', u_i'', ...  A monomial is stored as
a sorted tuple of ((symbol index, derivative order), exponent) pairs; zero
coefficients are never kept.  The total derivative D_x obeys the Leibniz rule
and sends u_i^(d) to u_i^(d+1).
"""

from __future__ import annotations

from fractions import Fraction

from . import expr as ex

__all__ = ["DiffPolynomial", "format_diffpoly"]


def _merge_factor(factors, sym, order, exponent):
    factors[(sym, order)] = factors.get((sym, order), 0) + exponent


def _canon(factors):
    return tuple(sorted((k, e) for k, e in factors.items() if e != 0))


class DiffPolynomial:
    """Polynomial in formal potentials and their x-derivatives, rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {}
        if coeffs:
            for mono, c in coeffs.items():
                c = Fraction(c)
                if c != 0:
                    self.coeffs[mono] = self.coeffs.get(mono, Fraction(0)) + c
            self.coeffs = {m: c for m, c in self.coeffs.items() if c != 0}

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, q):
        q = Fraction(q)
        return cls({(): q}) if q != 0 else cls()

    @classmethod
    def symbol(cls, index=1, order=0):
        return cls({(((index, order), 1),): Fraction(1)})

    # -- ring operations -----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, Fraction(0)) + c
        return DiffPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPolynomial({m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                factors = dict(m1)
                for k, e in m2:
                    factors[k] = factors.get(k, 0) + e
                mono = _canon(factors)
                out[mono] = out.get(mono, Fraction(0)) + c1 * c2
        return DiffPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        q = Fraction(scalar)
        return DiffPolynomial({m: c / q for m, c in self.coeffs.items()})

    @staticmethod
    def _coerce(v):
        if isinstance(v, DiffPolynomial):
            return v
        return DiffPolynomial.constant(v)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPolynomial.constant(other)
        return isinstance(other, DiffPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def is_zero(self):
        return not self.coeffs

    # -- calculus -----------------------------------------------------------
    def d_x(self):
        """Total derivative: Leibniz expansion, u_i^(d) -> u_i^(d+1)."""
        out = DiffPolynomial()
        for mono, c in self.coeffs.items():
            for (sym, order), e in mono:
                factors = dict(mono)
                factors[(sym, order)] = e - 1
                _merge_factor(factors, sym, order + 1, 1)
                out = out + DiffPolynomial({_canon(factors): c * e})
        return out

    # -- conversion ----------------------------------------------------------
    def to_expression(self, potentials, var="x"):
        """Substitute concrete expressions for the potential symbols.

        ``potentials`` maps symbol index -> Expression in ``var``; derivative
        orders are realised by exact symbolic differentiation.
        """
        total = ex.ZERO
        for mono, c in self.coeffs.items():
            factors = [ex.Rational(c)]
            for (sym, order), e in mono:
                base = ex.diff(potentials[sym], var, order)
                factors.append(ex.intpow(base, e))
            total = ex.add(total, ex.mul(*factors))
        return total

    def __repr__(self):
        return f"DiffPolynomial({format_diffpoly(self)})"

    def __str__(self):
        return format_diffpoly(self)


def _format_factor(sym, order, exponent, single):
    name = "u" if single else f"u_{sym}"
    name += "'" * order
    if exponent != 1:
        name += f"^{exponent}"
    return name


def _mono_sort_key(mono):
    degree = sum(e for _, e in mono)
    return (degree, tuple(((-sym, order), e) for (sym, order), e in mono))


def format_diffpoly(p, single=None):
    """Render like ``1/2*u_2 - 1/4*u_1' - 1/8*u_1^2``.

    With ``single`` true (default: auto-detect) the only potential prints as
    plain ``u``.
    """
    if p.is_zero():
        return "0"
    if single is None:
        syms = {sym for mono in p.coeffs for (sym, _), _ in mono}
        single = syms <= {1}
    parts = []
    for mono in sorted(p.coeffs, key=_mono_sort_key):
        c = p.coeffs[mono]
        body = "*".join(_format_factor(s, o, e, single) for (s, o), e in mono)
        mag = abs(c)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if not parts:
            parts.append(("-" if c < 0 else "") + text)
        else:
            parts.append((" - " if c < 0 else " + ") + text)
    return "".join(parts)
