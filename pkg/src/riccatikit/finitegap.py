"""1-phase finite-gap potentials and the Dubrovin root-variable system.

For branch points lambda1 > lambda2 > lambda3 the root variable gamma(x)
oscillates in the band [lambda3, lambda2] according to
gamma_x^2 = C(gamma), C(g) = 4 (g - lambda1)(g - lambda2)(g - lambda3), and
u = 2 gamma - lambda1 - lambda2 - lambda3 is a smooth periodic potential.
Turning points are crossed by integrating the differentiated second-order
form gamma_xx = C'(gamma)/2, which removes square-root branch bookkeeping.
For N root variables the coupled system
gamma_{j,x}^2 = C(gamma_j) / prod_{k != j} (gamma_j - gamma_k)^2 is exposed
both as a magnitude right-hand side (caller-managed signs) and as a smooth
second-order integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numeric

__all__ = [
    "GapSpec",
    "CPoly",
    "RootTrajectory",
    "c_poly",
    "integrate_gamma",
    "period",
    "trace_potential",
    "floquet_discriminant",
    "dubrovin_rhs",
    "integrate_dubrovin",
    "dubrovin_checks",
    "DubrovinReport",
]


@dataclass(frozen=True)
class GapSpec:
    """Branch points lambda1 > lambda2 > lambda3 and start gamma0 in (lambda3, lambda2)."""

    lam1: float
    lam2: float
    lam3: float
    gamma0: float
    sign: int = 1

    def __post_init__(self):
        for name in ("lam1", "lam2", "lam3", "gamma0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.lam1 > self.lam2 > self.lam3):
            raise ValueError("branch points must satisfy lambda1 > lambda2 > lambda3")
        if not (self.lam3 < self.gamma0 < self.lam2):
            raise ValueError(
                "gamma0 must lie strictly inside (lambda3, lambda2); the band edges "
                "are turning points and seed only the degenerate constant branch"
            )
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def lams(self):
        return (self.lam1, self.lam2, self.lam3)

    @property
    def trace(self):
        return self.lam1 + self.lam2 + self.lam3


def c_poly(spec_or_lams):
    """C(lambda) = 4 (lambda - lambda1)(lambda - lambda2)(lambda - lambda3)."""
    lams = spec_or_lams.lams if isinstance(spec_or_lams, GapSpec) else tuple(spec_or_lams)
    return numeric.DensePoly.from_roots(lams, leading=4.0)


@dataclass(frozen=True)
class CPoly:
    """Integration-constant polynomial C(lambda) of degree 2N + m, leading 4."""

    poly: numeric.DensePoly
    n_phases: int
    m: int

    def __post_init__(self):
        if self.poly.degree != 2 * self.n_phases + self.m:
            raise ValueError("degree must equal 2N + m")
        if abs(self.poly.coeffs[-1] - 4.0) > 1e-12:
            raise ValueError("leading coefficient must be 4")

    def __call__(self, x):
        return self.poly(x)


class RootTrajectory:
    """Sampled root variables gamma_j(x) with their first two derivatives."""

    def __init__(self, xs, gammas, dgammas, ddgammas, dense=None):
        self.xs = np.asarray(xs, dtype=float)
        self.gammas = np.atleast_2d(np.asarray(gammas, dtype=float).T).T
        self.dgammas = np.atleast_2d(np.asarray(dgammas, dtype=float).T).T
        self.ddgammas = np.atleast_2d(np.asarray(ddgammas, dtype=float).T).T
        self.signs = np.sign(self.dgammas)
        self._dense = dense

    @property
    def n(self):
        return self.gammas.shape[1]

    def __call__(self, x):
        """Dense state [gamma_j, gamma_j'] at x."""
        if self._dense is None:
            raise ValueError("trajectory has no dense interpolant")
        return self._dense(x)

    def gamma_at(self, x):
        state = self(x)
        return state[..., : self.n]

    def turning_points(self, kind="max"):
        """x locations where gamma_1' crosses zero (maxima or minima)."""
        want_down = kind == "max"
        out = []
        d = self.dgammas[:, 0]
        for i in range(len(self.xs) - 1):
            if d[i] == 0.0:
                continue
            crossing = d[i] > 0 > d[i + 1] if want_down else d[i] < 0 < d[i + 1]
            if crossing:
                lo, hi = self.xs[i], self.xs[i + 1]
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    dv = self(mid)[self.n]
                    if (dv > 0) == want_down:
                        lo = mid
                    else:
                        hi = mid
                out.append(0.5 * (lo + hi))
        return out


def integrate_gamma(spec, x_range=(0.0, 10.0), step=0.01, tol=1e-12, fixed_step=None):
    """Root-variable trajectory from the second-order form gamma'' = C'(gamma)/2.

    The first integral gamma'^2 - C(gamma) of the oscillation must stay below
    1e-8 * max(1, |C| scale); larger drift (step too large) is an error.
    """
    c = c_poly(spec)
    dc = c.poly.deriv() if isinstance(c, CPoly) else c.deriv()

    def rhs(x, s):
        return np.array([s[1], 0.5 * dc(s[0])])

    c0 = c(spec.gamma0)
    if c0 < 0:
        raise ValueError("C(gamma0) must be non-negative inside the band")
    y0 = np.array([spec.gamma0, spec.sign * math.sqrt(c0)])
    traj = numeric.integrate_ivp(rhs, x_range[0], y0, x_range[1], tol=tol, fixed_step=fixed_step)

    xs = np.arange(x_range[0], x_range[1] + 0.5 * step, step)
    states = traj(xs)
    gam = states[:, 0]
    dgam = states[:, 1]
    ddgam = 0.5 * np.array([dc(g) for g in gam])

    energy = np.abs(dgam**2 - np.array([c(g) for g in gam]))
    scale = max(1.0, abs(c0))
    if np.max(energy) > 1e-8 * scale:
        raise numeric.NumericError(
            f"energy drift {np.max(energy):.3g} exceeds tolerance; reduce the step"
        )
    return RootTrajectory(xs, gam, dgam, ddgam, dense=traj)


def period(spec, tol=1e-12):
    """Oscillation period: the band integral of 1/sqrt of the triple product.

    T = int_{lambda3}^{lambda2} dl / sqrt((lambda1 - l)(lambda2 - l)(l - lambda3)),
    computed with the sin^2 substitution that removes both endpoint
    singularities.  A closed gap (lambda2 -> lambda3) has a divergent period.
    """
    l1, l2, l3 = spec.lams
    if l2 - l3 < 1e-12:
        raise ValueError("degenerate gap: lambda2 - lambda3 vanishes, the period diverges")

    def f(lam):
        prod = (l1 - lam) * (l2 - lam) * (lam - l3)
        return 1.0 / math.sqrt(prod)

    return numeric.quadrature(f, l3, l2, tol=tol, endpoint_regularization=True)


def trace_potential(traj, spec):
    """u(x) = 2 gamma(x) - lambda1 - lambda2 - lambda3 on the trajectory grid."""
    if traj.n != 1:
        raise ValueError("the trace formula applies to 1-phase trajectories")
    return 2.0 * traj.gammas[:, 0] - spec.trace


def floquet_discriminant(spec, lam, traj=None, tol=1e-10):
    """Trace of the one-period transfer matrix of psi'' = (lam + u) psi.

    |trace| = 2 marks band edges of the periodic spectral problem.
    """
    t = period(spec)
    if traj is None or traj.xs[-1] < t:
        traj = integrate_gamma(spec, (0.0, 1.05 * t), step=t / 400, tol=1e-12)

    def u(x):
        return 2.0 * traj(x)[0] - spec.trace

    def rhs(x, s):
        return np.array([s[1], (lam + u(x)) * s[0]])

    m = np.empty((2, 2))
    for col, init in enumerate(((1.0, 0.0), (0.0, 1.0))):
        sol = numeric.integrate_ivp(rhs, 0.0, np.array(init), t, tol=tol)
        m[:, col] = sol.ys[-1]
    return float(m[0, 0] + m[1, 1])


# ---------------------------------------------------------------------------
# Dubrovin system for N root variables


def dubrovin_rhs(c, gamma):
    """Magnitudes |gamma_j'| = sqrt(C(gamma_j)) / prod_{k != j} |gamma_j - gamma_k|.

    Signs are the caller's branch state.  A root that left its band
    (C(gamma_j) < 0) or a collision gamma_j = gamma_k is an error.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.size
    out = np.empty(n)
    for j in range(n):
        cj = c(gamma[j])
        if cj < 0:
            raise ValueError(f"C(gamma_{j + 1}) < 0: root left its band")
        prod = 1.0
        for k in range(n):
            if k == j:
                continue
            d = gamma[j] - gamma[k]
            if d == 0:
                raise ValueError(f"root collision gamma_{j + 1} = gamma_{k + 1}")
            prod *= abs(d)
        out[j] = math.sqrt(cj) / prod
    return out


def _dubrovin_accel(c, dc, gamma, dgamma):
    n = gamma.size
    acc = np.empty(n)
    for j in range(n):
        q = 1.0
        cross = 0.0
        for k in range(n):
            if k == j:
                continue
            d = gamma[j] - gamma[k]
            q *= d
            cross += (dgamma[j] - dgamma[k]) / d
        acc[j] = 0.5 * dc(gamma[j]) / (q * q) - dgamma[j] * cross
    return acc


def integrate_dubrovin(c, gamma0, signs, x_range, step=0.005, tol=1e-12):
    """Integrate the N-root Dubrovin system in its smooth second-order form.

    gamma_j'' = C'(gamma_j)/(2 Q_j^2) - gamma_j' sum_{k != j}
    (gamma_j' - gamma_k')/(gamma_j - gamma_k), with Q_j the signed distance
    product; starting speeds come from ``dubrovin_rhs`` with caller signs.
    """
    poly = c.poly if isinstance(c, CPoly) else c
    dc = poly.deriv()
    gamma0 = np.asarray(gamma0, dtype=float)
    n = gamma0.size
    speeds = dubrovin_rhs(poly, gamma0) * np.asarray(signs, dtype=float)

    def rhs(x, s):
        gam, dgam = s[:n], s[n:]
        return np.concatenate([dgam, _dubrovin_accel(poly, dc, gam, dgam)])

    y0 = np.concatenate([gamma0, speeds])
    traj = numeric.integrate_ivp(rhs, x_range[0], y0, x_range[1], tol=tol)
    xs = np.arange(x_range[0], x_range[1] + 0.5 * step, step)
    states = traj(xs)
    gam = states[:, :n]
    dgam = states[:, n:]
    ddgam = np.array([_dubrovin_accel(poly, dc, g, dg) for g, dg in zip(gam, dgam)])
    return RootTrajectory(xs, gam, dgam, ddgam, dense=traj)


@dataclass
class DubrovinReport:
    item1_max: float
    remainder_max: float
    quotient_degree: int
    quotient_leading: float
    quotients: np.ndarray
    passed: bool


def dubrovin_checks(traj, c, tol=1e-6):
    """Verify the two root-variable identities along a trajectory.

    (1) C(gamma_j) equals phi_x^2 at lambda = gamma_j, where
        phi(x, lambda) = prod_j (lambda - gamma_j(x));
    (2) 2 phi phi_xx + C(lambda) - phi_x^2 is exactly divisible by phi^2 and
        the quotient is 4U with U monic of degree m.

    Returns per-identity maxima; ``passed`` reflects the given tolerance.
    """
    poly = c.poly if isinstance(c, CPoly) else c
    m_expected = (poly.degree - 2 * traj.n) if not isinstance(c, CPoly) else c.m
    c_desc = np.array(list(reversed(poly.coeffs)))

    item1 = 0.0
    remainder_max = 0.0
    leading = []
    quotients = []
    for idx in range(len(traj.xs)):
        gam = traj.gammas[idx]
        dgam = traj.dgammas[idx]
        ddgam = traj.ddgammas[idx]

        phi = np.poly(gam)  # descending coefficients of prod (lambda - gamma_j)
        phi_x = _poly_zero(traj.n)
        phi_xx = _poly_zero(traj.n)
        for j in range(traj.n):
            others = np.delete(gam, j)
            pj = np.poly(others) if others.size else np.array([1.0])
            phi_x = _poly_add(phi_x, -dgam[j] * pj)
            phi_xx = _poly_add(phi_xx, -ddgam[j] * pj)
            for k in range(traj.n):
                if k == j:
                    continue
                rest = np.delete(gam, [j, k])
                pjk = np.poly(rest) if rest.size else np.array([1.0])
                phi_xx = _poly_add(phi_xx, dgam[j] * dgam[k] * pjk)

        for j in range(traj.n):
            qj = np.prod(gam[j] - np.delete(gam, j)) if traj.n > 1 else 1.0
            item1 = max(item1, abs(poly(gam[j]) - (dgam[j] * qj) ** 2))

        numerator = _poly_add(2.0 * np.polymul(phi, phi_xx), _poly_add(c_desc, -np.polymul(phi_x, phi_x)))
        quot, rem = np.polydiv(numerator, np.polymul(phi, phi))
        remainder_max = max(remainder_max, float(np.max(np.abs(rem))) if rem.size else 0.0)
        leading.append(quot[0])
        quotients.append(quot)

    quotients = np.array(quotients)
    degree = quotients.shape[1] - 1
    lead = float(np.mean(leading))
    passed = item1 <= tol and remainder_max <= tol and degree == m_expected and abs(lead - 4.0) <= tol
    return DubrovinReport(item1, remainder_max, degree, lead, quotients, passed)


def _poly_zero(n):
    return np.zeros(1)


def _poly_add(a, b):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.size < b.size:
        a = np.concatenate([np.zeros(b.size - a.size), a])
    elif b.size < a.size:
        b = np.concatenate([np.zeros(a.size - b.size), b])
    return a + b
