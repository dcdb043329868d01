"""Exact symbolic expression kernel.

A small closed family of expression nodes (rational/real constants, variables,
sums, products, integer powers, negation, reciprocal, exp/log, hyperbolic and
circular functions) with exact symbolic differentiation and numeric
evaluation.  Rational constant arithmetic is exact; simplification is limited
to constant folding, flattening of sums and products, and merging/cancelling
of identical terms.  There is deliberately no general canonical form: zero
testing of residuals is done numerically by the callers.

Antiderivatives are produced in closed form for a useful set of patterns
(polynomials, polynomial-times-exponential, tanh/sech^2/sec^2 and friends);
everything else becomes a quadrature-backed node whose value is computed by
adaptive quadrature from a fixed anchor point.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import numeric

__all__ = [
    "Expression",
    "EvalDomainError",
    "Rational",
    "Real",
    "Var",
    "add",
    "sub",
    "mul",
    "neg",
    "recip",
    "intpow",
    "div",
    "exp",
    "log",
    "sinh",
    "cosh",
    "tanh",
    "sin",
    "cos",
    "tan",
    "diff",
    "evaluate",
    "as_expression",
    "parse_expression",
    "antiderivative",
    "contains_quadrature",
    "variables",
    "is_zero",
    "ZERO",
    "ONE",
]


class EvalDomainError(ArithmeticError):
    """Log of a non-positive argument or division by zero during evaluation."""


def _is_scalar(v):
    return isinstance(v, (int, Fraction, float)) and not isinstance(v, bool)


def as_expression(v):
    """Wrap a python number as a constant node; pass expressions through."""
    if isinstance(v, Expression):
        return v
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return Rational(v)
    if isinstance(v, float):
        return Real(v)
    raise TypeError(f"cannot interpret {v!r} as an expression")


class Expression:
    __slots__ = ("_key", "_hash")

    def __init__(self):
        self._key = None
        self._hash = None

    # -- identity ---------------------------------------------------------
    def key(self):
        if self._key is None:
            self._key = self._build_key()
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expression):
            return NotImplemented
        return self.key() == other.key()

    # -- arithmetic sugar --------------------------------------------------
    def __add__(self, other):
        return add(self, as_expression(other))

    def __radd__(self, other):
        return add(as_expression(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expression(other)))

    def __rsub__(self, other):
        return add(as_expression(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expression(other))

    def __rmul__(self, other):
        return mul(as_expression(other), self)

    def __truediv__(self, other):
        return mul(self, recip(as_expression(other)))

    def __rtruediv__(self, other):
        return mul(as_expression(other), recip(self))

    def __pow__(self, n):
        return intpow(self, n)

    def __neg__(self):
        return neg(self)

    # -- core operations ----------------------------------------------------
    def diff(self, var: str):
        raise NotImplementedError

    def evaluate(self, bindings=None, **named):
        """Evaluate at a point.  Variables bound by dict or keyword arguments.

        Accepts floats or numpy arrays as bound values.
        """
        env = dict(bindings) if bindings else {}
        env.update(named)
        return self._eval(env)

    def _eval(self, env):
        raise NotImplementedError

    def variables(self):
        out = set()
        self._collect_vars(out)
        return out

    def _collect_vars(self, out):
        pass

    def __repr__(self):
        return f"<expr {self}>"

    def __str__(self):
        return self._str(0)

    def _str(self, prec):
        raise NotImplementedError


# precedence levels for printing: sum 1, product 2, unary 3, power 4, atom 5


class Rational(Expression):
    __slots__ = ("value",)

    def __init__(self, value, denominator=None):
        super().__init__()
        self.value = Fraction(value) if denominator is None else Fraction(value, denominator)

    def _build_key(self):
        return (0, self.value.numerator, self.value.denominator)

    def diff(self, var):
        return ZERO

    def _eval(self, env):
        return float(self.value)

    def _str(self, prec):
        s = str(self.value)
        if (self.value < 0 or "/" in s) and prec >= 2:
            return f"({s})"
        return s


class Real(Expression):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = float(value)

    def _build_key(self):
        return (1, self.value)

    def diff(self, var):
        return ZERO

    def _eval(self, env):
        return self.value

    def _str(self, prec):
        s = repr(self.value)
        if self.value < 0 and prec >= 2:
            return f"({s})"
        return s


class Var(Expression):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def _build_key(self):
        return (2, self.name)

    def diff(self, var):
        return ONE if self.name == var else ZERO

    def _eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise EvalDomainError(f"unbound variable {self.name!r}") from None

    def _collect_vars(self, out):
        out.add(self.name)

    def _str(self, prec):
        return self.name


class Sum(Expression):
    __slots__ = ("terms",)

    def __init__(self, terms):
        super().__init__()
        self.terms = tuple(terms)

    def _build_key(self):
        return (3,) + tuple(t.key() for t in self.terms)

    def diff(self, var):
        return add(*[t.diff(var) for t in self.terms])

    def _eval(self, env):
        total = self.terms[0]._eval(env)
        for t in self.terms[1:]:
            total = total + t._eval(env)
        return total

    def _collect_vars(self, out):
        for t in self.terms:
            t._collect_vars(out)

    def _str(self, prec):
        parts = [self.terms[0]._str(1)]
        for t in self.terms[1:]:
            if isinstance(t, Neg):
                parts.append(" - " + t.arg._str(2))
            elif isinstance(t, (Rational, Real)) and _const_value(t) < 0:
                parts.append(" - " + str(-_const_value(t)))
            elif isinstance(t, Product) and _leading_const(t) is not None and _leading_const(t) < 0:
                parts.append(" - " + _negate_leading(t)._str(2))
            else:
                parts.append(" + " + t._str(1))
        s = "".join(parts)
        return f"({s})" if prec >= 2 else s


class Product(Expression):
    __slots__ = ("factors",)

    def __init__(self, factors):
        super().__init__()
        self.factors = tuple(factors)

    def _build_key(self):
        return (4,) + tuple(f.key() for f in self.factors)

    def diff(self, var):
        terms = []
        for i, f in enumerate(self.factors):
            d = f.diff(var)
            if is_zero(d):
                continue
            terms.append(mul(*self.factors[:i], d, *self.factors[i + 1 :]))
        return add(*terms) if terms else ZERO

    def _eval(self, env):
        total = self.factors[0]._eval(env)
        for f in self.factors[1:]:
            total = total * f._eval(env)
        return total

    def _collect_vars(self, out):
        for f in self.factors:
            f._collect_vars(out)

    def _str(self, prec):
        parts = []
        for f in self.factors:
            if isinstance(f, Recip) and parts:
                parts.append("/" + f.arg._str(5))
            else:
                parts.append(("*" if parts else "") + f._str(2))
        s = "".join(parts)
        return f"({s})" if prec > 2 else s


class IntPower(Expression):
    """base**n with integer n >= 2 (constructors normalise everything else)."""

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent: int):
        super().__init__()
        self.base = base
        self.exponent = int(exponent)

    def _build_key(self):
        return (5, self.base.key(), self.exponent)

    def diff(self, var):
        db = self.base.diff(var)
        if is_zero(db):
            return ZERO
        return mul(Rational(self.exponent), intpow(self.base, self.exponent - 1), db)

    def _eval(self, env):
        return self.base._eval(env) ** self.exponent

    def _collect_vars(self, out):
        self.base._collect_vars(out)

    def _str(self, prec):
        s = f"{self.base._str(5)}^{self.exponent}"
        return f"({s})" if prec > 4 else s


class Neg(Expression):
    __slots__ = ("arg",)

    def __init__(self, arg):
        super().__init__()
        self.arg = arg

    def _build_key(self):
        return (6, self.arg.key())

    def diff(self, var):
        return neg(self.arg.diff(var))

    def _eval(self, env):
        return -self.arg._eval(env)

    def _collect_vars(self, out):
        self.arg._collect_vars(out)

    def _str(self, prec):
        s = "-" + self.arg._str(3)
        return f"({s})" if prec >= 2 else s


class Recip(Expression):
    __slots__ = ("arg",)

    def __init__(self, arg):
        super().__init__()
        self.arg = arg

    def _build_key(self):
        return (7, self.arg.key())

    def diff(self, var):
        da = self.arg.diff(var)
        if is_zero(da):
            return ZERO
        return neg(mul(da, recip(intpow(self.arg, 2))))

    def _eval(self, env):
        v = self.arg._eval(env)
        if np.any(v == 0):
            raise EvalDomainError("division by zero")
        return 1.0 / v

    def _collect_vars(self, out):
        self.arg._collect_vars(out)

    def _str(self, prec):
        s = f"1/{self.arg._str(5)}"
        return f"({s})" if prec > 2 else s


def _fn_exp(u):
    return exp(u)


def _fn_log(u):
    return recip(u)


def _fn_sinh(u):
    return cosh(u)


def _fn_cosh(u):
    return sinh(u)


def _fn_tanh(u):
    return recip(intpow(cosh(u), 2))


def _fn_sin(u):
    return cos(u)


def _fn_cos(u):
    return neg(sin(u))


def _fn_tan(u):
    return recip(intpow(cos(u), 2))


def _eval_log(v):
    if np.any(v <= 0):
        raise EvalDomainError("log of non-positive argument")
    return np.log(v)


_FUNCTIONS = {
    # name: (numeric evaluation, derivative of outer function)
    "exp": (np.exp, _fn_exp),
    "log": (_eval_log, _fn_log),
    "sinh": (np.sinh, _fn_sinh),
    "cosh": (np.cosh, _fn_cosh),
    "tanh": (np.tanh, _fn_tanh),
    "sin": (np.sin, _fn_sin),
    "cos": (np.cos, _fn_cos),
    "tan": (np.tan, _fn_tan),
}


class Func(Expression):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        super().__init__()
        self.name = name
        self.arg = arg

    def _build_key(self):
        return (8, self.name, self.arg.key())

    def diff(self, var):
        da = self.arg.diff(var)
        if is_zero(da):
            return ZERO
        outer = _FUNCTIONS[self.name][1](self.arg)
        return mul(outer, da)

    def _eval(self, env):
        return _FUNCTIONS[self.name][0](self.arg._eval(env))

    def _collect_vars(self, out):
        self.arg._collect_vars(out)

    def _str(self, prec):
        return f"{self.name}({self.arg._str(0)})"


class Quadrature(Expression):
    """Antiderivative of ``integrand`` from ``anchor``, evaluated numerically.

    Differentiating with respect to ``var`` returns the integrand, so the
    family stays closed under differentiation.
    """

    __slots__ = ("integrand", "var", "anchor", "tol")

    def __init__(self, integrand, var: str, anchor=0.0, tol=1e-12):
        super().__init__()
        if integrand.variables() - {var}:
            raise ValueError("quadrature integrand must depend only on its variable")
        self.integrand = integrand
        self.var = var
        self.anchor = float(anchor)
        self.tol = tol

    def _build_key(self):
        return (9, self.integrand.key(), self.var, self.anchor)

    def diff(self, var):
        if var == self.var:
            return self.integrand
        return ZERO

    def _eval(self, env):
        x = env.get(self.var)
        if x is None:
            raise EvalDomainError(f"unbound variable {self.var!r}")
        f = lambda t: self.integrand._eval({self.var: t})
        if np.ndim(x) == 0:
            return numeric.quadrature(f, self.anchor, float(x), tol=self.tol)
        return np.array([numeric.quadrature(f, self.anchor, float(v), tol=self.tol) for v in np.asarray(x).ravel()]).reshape(np.shape(x))

    def _collect_vars(self, out):
        out.add(self.var)

    def _str(self, prec):
        return f"quad({self.integrand._str(0)}, d{self.var}, from={self.anchor:g})"


ZERO = Rational(0)
ONE = Rational(1)


def _const_value(e):
    if isinstance(e, Rational):
        return e.value
    if isinstance(e, Real):
        return e.value
    return None


def is_zero(e):
    return isinstance(e, Rational) and e.value == 0


def _is_one(e):
    return isinstance(e, Rational) and e.value == 1


def _leading_const(p):
    if isinstance(p, Product):
        return _const_value(p.factors[0])
    return None


def _negate_leading(p):
    c = -_const_value(p.factors[0])
    return mul(Rational(c) if isinstance(c, Fraction) else Real(c), *p.factors[1:])


def _make_const(v):
    if isinstance(v, Fraction):
        return Rational(v)
    return Real(v)


# ---------------------------------------------------------------------------
# smart constructors


def add(*terms):
    """Flatten, fold constants and merge identical terms of a sum."""
    const = Fraction(0)
    merged = {}  # key -> [coeff, core]

    def absorb(t):
        nonlocal const
        if isinstance(t, Sum):
            for s in t.terms:
                absorb(s)
            return
        cv = _const_value(t)
        if cv is not None:
            const = const + cv if not isinstance(const, float) else const + float(cv)
            if isinstance(cv, float) and not isinstance(const, float):
                const = float(const)
            return
        coeff, core = _split_coeff(t)
        k = core.key()
        if k in merged:
            old = merged[k][0]
            new = old + coeff
            if isinstance(old, float) or isinstance(coeff, float):
                new = float(old) + float(coeff)
            merged[k][0] = new
        else:
            merged[k] = [coeff, core]

    for t in terms:
        absorb(as_expression(t))

    out = []
    for coeff, core in merged.values():
        if coeff == 0:
            continue
        if coeff == 1:
            out.append(core)
        elif coeff == -1:
            out.append(Neg(core))
        else:
            out.append(mul(_make_const(coeff), core))
    if const != 0:
        out.append(_make_const(const if isinstance(const, (Fraction, float)) else Fraction(const)))
    if not out:
        return ZERO
    out.sort(key=lambda e: e.key())
    if len(out) == 1:
        return out[0]
    return Sum(out)


def sub(a, b):
    return add(a, neg(as_expression(b)))


def _split_coeff(t):
    """Decompose a non-constant term as (rational-or-float coefficient, core)."""
    if isinstance(t, Neg):
        c, core = _split_coeff(t.arg)
        return -c, core
    if isinstance(t, Product):
        cv = _const_value(t.factors[0])
        if cv is not None:
            rest = t.factors[1:]
            core = rest[0] if len(rest) == 1 else Product(rest)
            return cv, core
    return Fraction(1), t


def _split_power(f):
    """Decompose a factor as (base, integer exponent)."""
    if isinstance(f, IntPower):
        return f.base, f.exponent
    if isinstance(f, Recip):
        b, n = _split_power(f.arg)
        return b, -n
    return f, 1


def mul(*factors):
    """Flatten, fold constants, merge identical bases and exponential factors."""
    const = Fraction(1)
    bases = {}  # key -> [base, exponent]
    exp_args = []
    sign = 1

    def absorb(f):
        nonlocal const, sign
        if isinstance(f, Product):
            for g in f.factors:
                absorb(g)
            return
        if isinstance(f, Neg):
            sign_flip()
            absorb(f.arg)
            return
        cv = _const_value(f)
        if cv is not None:
            if isinstance(cv, float) or isinstance(const, float):
                const = float(const) * float(cv)
            else:
                const = const * cv
            return
        if isinstance(f, Func) and f.name == "exp":
            exp_args.append(f.arg)
            return
        base, n = _split_power(f)
        k = base.key()
        if k in bases:
            bases[k][1] += n
        else:
            bases[k] = [base, n]

    def sign_flip():
        nonlocal sign
        sign = -sign

    for f in factors:
        absorb(as_expression(f))

    if exp_args:
        combined = exp(add(*exp_args)) if len(exp_args) > 1 else exp(exp_args[0])
        cv = _const_value(combined)
        if cv is not None:
            const = const * cv if not isinstance(const, float) else const * float(cv)
        else:
            bases[combined.key()] = [combined, 1]

    if const == 0:
        return ZERO
    const = const * sign

    out = []
    for base, n in bases.values():
        if n == 0:
            continue
        if n == 1:
            out.append(base)
        elif n > 1:
            out.append(IntPower(base, n))
        elif n == -1:
            out.append(Recip(base))
        else:
            out.append(Recip(IntPower(base, -n)))
    out.sort(key=lambda e: e.key())
    if not out:
        return _make_const(const)
    if const == 1:
        pass
    elif const == -1:
        if len(out) == 1:
            return Neg(out[0])
        return Neg(Product(out))
    else:
        out.insert(0, _make_const(const))
    if len(out) == 1:
        return out[0]
    return Product(out)


def neg(e):
    e = as_expression(e)
    cv = _const_value(e)
    if cv is not None:
        return _make_const(-cv)
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Sum):
        return add(*[neg(t) for t in e.terms])
    if isinstance(e, Product) and _leading_const(e) is not None:
        return _negate_leading(e)
    return Neg(e)


def recip(e):
    e = as_expression(e)
    cv = _const_value(e)
    if cv is not None:
        if cv == 0:
            raise ZeroDivisionError("reciprocal of zero")
        if isinstance(cv, Fraction):
            return Rational(1 / cv)
        return Real(1.0 / cv)
    if isinstance(e, Neg):
        return neg(recip(e.arg))
    if isinstance(e, Recip):
        return e.arg
    if isinstance(e, Product):
        return mul(*[recip(f) for f in e.factors])
    if isinstance(e, Func) and e.name == "exp":
        return exp(neg(e.arg))
    return Recip(e)


def intpow(e, n):
    e = as_expression(e)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return e
    cv = _const_value(e)
    if cv is not None:
        if isinstance(cv, Fraction):
            return Rational(cv**n) if n > 0 else Rational(Fraction(1) / cv ** (-n))
        return Real(float(cv) ** n)
    if n < 0:
        return recip(intpow(e, -n))
    if isinstance(e, Neg):
        p = intpow(e.arg, n)
        return p if n % 2 == 0 else neg(p)
    if isinstance(e, IntPower):
        return intpow(e.base, e.exponent * n)
    if isinstance(e, Recip):
        return recip(intpow(e.arg, n))
    if isinstance(e, Product):
        return mul(*[intpow(f, n) for f in e.factors])
    if isinstance(e, Func) and e.name == "exp":
        return exp(mul(Rational(n), e.arg))
    return IntPower(e, n)


def div(a, b):
    return mul(as_expression(a), recip(as_expression(b)))


def _make_func(name):
    special = {
        "exp": {Fraction(0): ONE},
        "log": {Fraction(1): ZERO},
        "sinh": {Fraction(0): ZERO},
        "cosh": {Fraction(0): ONE},
        "tanh": {Fraction(0): ZERO},
        "sin": {Fraction(0): ZERO},
        "cos": {Fraction(0): ONE},
        "tan": {Fraction(0): ZERO},
    }[name]

    def build(e):
        e = as_expression(e)
        if isinstance(e, Rational) and e.value in special:
            return special[e.value]
        if name == "log" and isinstance(e, Func) and e.name == "exp":
            return e.arg
        return Func(name, e)

    build.__name__ = name
    return build


exp = _make_func("exp")
log = _make_func("log")
sinh = _make_func("sinh")
cosh = _make_func("cosh")
tanh = _make_func("tanh")
sin = _make_func("sin")
cos = _make_func("cos")
tan = _make_func("tan")


def diff(e, var: str, order: int = 1):
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    out = as_expression(e)
    for _ in range(order):
        out = out.diff(var)
    return out


def evaluate(e, bindings=None, **named):
    return as_expression(e).evaluate(bindings, **named)


def variables(e):
    return as_expression(e).variables()


def contains_quadrature(e):
    if isinstance(e, Quadrature):
        return True
    if isinstance(e, Sum):
        return any(contains_quadrature(t) for t in e.terms)
    if isinstance(e, Product):
        return any(contains_quadrature(f) for f in e.factors)
    if isinstance(e, (Neg, Recip)):
        return contains_quadrature(e.arg)
    if isinstance(e, IntPower):
        return contains_quadrature(e.base)
    if isinstance(e, Func):
        return contains_quadrature(e.arg)
    return False


# ---------------------------------------------------------------------------
# closed-form antiderivatives with quadrature fallback


def _linear_parts(e, var):
    """Return (a, b) with e == a*var + b for structurally linear e, else None."""
    if isinstance(e, Var):
        return (Fraction(1), Fraction(0)) if e.name == var else None
    cv = _const_value(e)
    if cv is not None:
        return (Fraction(0), cv)
    if isinstance(e, Neg):
        p = _linear_parts(e.arg, var)
        return (-p[0], -p[1]) if p else None
    if isinstance(e, Product):
        coeff, core = _split_coeff(e)
        if isinstance(core, Var) and core.name == var:
            return (coeff, Fraction(0))
        return None
    if isinstance(e, Sum):
        a = Fraction(0)
        b = Fraction(0)
        for t in e.terms:
            p = _linear_parts(t, var)
            if p is None:
                return None
            a, b = a + p[0], b + p[1]
        return (a, b)
    return None


def poly_coeffs(e, var):
    """Ascending coefficients of ``e`` as a polynomial in ``var``, or None."""
    cv = _const_value(e)
    if cv is not None:
        return [cv]
    if isinstance(e, Var):
        return [Fraction(0), Fraction(1)] if e.name == var else None
    if isinstance(e, Neg):
        c = poly_coeffs(e.arg, var)
        return [-x for x in c] if c is not None else None
    if isinstance(e, Sum):
        out = []
        for t in e.terms:
            c = poly_coeffs(t, var)
            if c is None:
                return None
            if len(c) > len(out):
                out.extend([Fraction(0)] * (len(c) - len(out)))
            for i, x in enumerate(c):
                out[i] = out[i] + x
        return out
    if isinstance(e, Product):
        out = [Fraction(1)]
        for f in e.factors:
            c = poly_coeffs(f, var)
            if c is None:
                return None
            new = [Fraction(0)] * (len(out) + len(c) - 1)
            for i, x in enumerate(out):
                for j, y in enumerate(c):
                    new[i + j] = new[i + j] + x * y
            out = new
        return out
    if isinstance(e, IntPower):
        c = poly_coeffs(e.base, var)
        if c is None:
            return None
        out = [Fraction(1)]
        for _ in range(e.exponent):
            new = [Fraction(0)] * (len(out) + len(c) - 1)
            for i, x in enumerate(out):
                for j, y in enumerate(c):
                    new[i + j] = new[i + j] + x * y
            out = new
        return out
    return None


def _poly_expr(coeffs, var):
    x = Var(var)
    return add(*[mul(_make_const(c if isinstance(c, (Fraction, float)) else Fraction(c)), intpow(x, i)) for i, c in enumerate(coeffs)])


def _int_poly_times_exp(coeffs, w_a, w_b, var):
    # integral of (sum c_i x^i) * exp(a x + b): repeated integration by parts
    x = Var(var)
    ew = exp(add(mul(_make_const(w_a), x), _make_const(w_b)))
    n = len(coeffs) - 1
    # solve d/dx (e^{ax+b} * sum q_i x^i) = e^{ax+b} * sum c_i x^i
    # => a q_i + (i+1) q_{i+1} = c_i
    q = [Fraction(0)] * (n + 1)
    a = Fraction(w_a) if not isinstance(w_a, float) else w_a
    q[n] = coeffs[n] / a
    for i in range(n - 1, -1, -1):
        q[i] = (coeffs[i] - (i + 1) * q[i + 1]) / a
    return mul(ew, _poly_expr(q, var))


def antiderivative(e, var: str, anchor: float = 0.0):
    """Closed-form antiderivative when a known pattern applies.

    Falls back to a quadrature-backed node anchored at ``anchor``.  No
    integration constant is added: the pattern forms are used as-is.
    """
    e = as_expression(e)
    x = Var(var)

    c = poly_coeffs(e, var)
    if c is not None:
        return _poly_expr([Fraction(0)] + [ci / (i + 1) for i, ci in enumerate(c)], var)

    if isinstance(e, Sum):
        done = []
        failed = []
        for t in e.terms:
            r = _antiderivative_term(t, var)
            if r is None:
                failed.append(t)
            else:
                done.append(r)
        if failed:
            done.append(Quadrature(add(*failed), var, anchor))
        return add(*done)

    r = _antiderivative_term(e, var)
    if r is not None:
        return r
    return Quadrature(e, var, anchor)


def _antiderivative_term(e, var):
    c = poly_coeffs(e, var)
    if c is not None:
        return _poly_expr([Fraction(0)] + [ci / (i + 1) for i, ci in enumerate(c)], var)

    coeff, core = _split_coeff(e)
    factors = core.factors if isinstance(core, Product) else (core,)

    poly_factors = []
    special = []
    for f in factors:
        if poly_coeffs(f, var) is not None:
            poly_factors.append(f)
        else:
            special.append(f)
    if len(special) != 1:
        return None
    sp = special[0]
    pc = poly_coeffs(mul(*poly_factors), var) if poly_factors else [Fraction(1)]
    pc = [coeff * q for q in pc]
    x = Var(var)

    base, n = _split_power(sp)
    if isinstance(base, Func):
        lin = _linear_parts(base.arg, var)
        if lin is None or lin[0] == 0:
            return None
        a = lin[0]
        name = base.name
        if name == "exp" and n == 1:
            return _int_poly_times_exp(pc, a, lin[1], var)
        if len(pc) > 1 or pc[0] == 0:
            return None  # only bare special factors beyond the exp case
        k = pc[0]
        w = base.arg
        if name == "tanh" and n == 1:
            return mul(_make_const(k / a), log(cosh(w)))
        if name == "sinh" and n == 1:
            return mul(_make_const(k / a), cosh(w))
        if name == "cosh" and n == 1:
            return mul(_make_const(k / a), sinh(w))
        if name == "cosh" and n == -2:
            return mul(_make_const(k / a), tanh(w))
        if name == "sin" and n == 1:
            return mul(_make_const(-k / a), cos(w))
        if name == "cos" and n == 1:
            return mul(_make_const(k / a), sin(w))
        if name == "cos" and n == -2:
            return mul(_make_const(k / a), tan(w))
        return None

    # (a x + b)^n for negative n (positive handled by the polynomial path)
    lin = _linear_parts(base, var)
    if lin is not None and lin[0] != 0 and n < 0:
        if len(pc) > 1 or pc[0] == 0:
            return None
        k = pc[0]
        a = lin[0]
        if n == -1:
            return mul(_make_const(k / a), log(base))
        return mul(_make_const(k / (a * (n + 1))), intpow(base, n + 1))
    return None


# ---------------------------------------------------------------------------
# parser


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None
        ch = self.text[self.pos]
        if ch.isdigit() or ch == ".":
            j = self.pos
            while j < len(self.text) and (self.text[j].isdigit() or self.text[j] == "."):
                j += 1
            return ("num", self.text[self.pos : j])
        if ch.isalpha() or ch == "_":
            j = self.pos
            while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                j += 1
            return ("name", self.text[self.pos : j])
        return ("op", ch)

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of expression")
        self.pos += len(tok[1])
        return tok

    def accept(self, op):
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == op:
            self.next()
            return True
        return False

    def expect(self, op):
        if not self.accept(op):
            raise ValueError(f"expected {op!r} at position {self.pos} in {self.text!r}")


def parse_expression(text: str):
    """Parse "2*x^2 - 1/cosh(x)^2" style strings into an Expression.

    Decimal literals become exact rationals; ``^`` takes integer exponents.
    """
    toks = _Tokens(text)
    e = _parse_sum(toks)
    if toks.peek() is not None:
        raise ValueError(f"trailing input at position {toks.pos} in {text!r}")
    return e


def _parse_sum(toks):
    terms = [_parse_term(toks)]
    while True:
        if toks.accept("+"):
            terms.append(_parse_term(toks))
        elif toks.accept("-"):
            terms.append(neg(_parse_term(toks)))
        else:
            return add(*terms)


def _parse_term(toks):
    factors = [_parse_unary(toks)]
    while True:
        if toks.accept("*"):
            factors.append(_parse_unary(toks))
        elif toks.accept("/"):
            factors.append(recip(_parse_unary(toks)))
        else:
            return mul(*factors)


def _parse_unary(toks):
    if toks.accept("-"):
        return neg(_parse_unary(toks))
    if toks.accept("+"):
        return _parse_unary(toks)
    return _parse_power(toks)


def _parse_power(toks):
    base = _parse_atom(toks)
    if toks.accept("^"):
        sign = 1
        if toks.accept("-"):
            sign = -1
        tok = toks.peek()
        if tok is not None and tok[0] == "num" and "." not in tok[1]:
            toks.next()
            return intpow(base, sign * int(tok[1]))
        if tok is not None and tok[0] == "op" and tok[1] == "(":
            toks.next()
            inner = _parse_sum(toks)
            toks.expect(")")
            cv = _const_value(inner)
            if cv is not None and isinstance(cv, Fraction) and cv.denominator == 1:
                return intpow(base, sign * int(cv))
        raise ValueError("exponent must be an integer")
    return base


def _parse_atom(toks):
    tok = toks.peek()
    if tok is None:
        raise ValueError("unexpected end of expression")
    kind, text = tok
    if kind == "num":
        toks.next()
        return Rational(Fraction(text))
    if kind == "name":
        toks.next()
        if text in _FUNCTIONS:
            toks.expect("(")
            arg = _parse_sum(toks)
            toks.expect(")")
            return _FUNCTIONS_BUILDERS[text](arg)
        return Var(text)
    if kind == "op" and text == "(":
        toks.next()
        inner = _parse_sum(toks)
        toks.expect(")")
        return inner
    raise ValueError(f"unexpected token {text!r}")


_FUNCTIONS_BUILDERS = {
    "exp": exp,
    "log": log,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "sin": sin,
    "cos": cos,
    "tan": tan,
}
