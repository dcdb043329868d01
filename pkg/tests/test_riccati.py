import math
from fractions import Fraction

import numpy as np
import pytest

from riccatikit import expr as ex
from riccatikit import numeric
from riccatikit import riccati as rc

X = ex.Var("x")


def integrate_re(eq, phi0, x0, x1, tol=1e-12):
    def rhs(x, y):
        env = {"x": x}
        return np.array([
            eq.a.evaluate(env) * y[0] ** 2 + eq.b.evaluate(env) * y[0] + eq.c.evaluate(env)
        ])

    return numeric.integrate_ivp(rhs, x0, [phi0], x1, tol=tol)


class TestMobiusTransform:
    def test_inversion_flips_and_negates(self):
        eq = rc.RiccatiEq(ex.parse_expression("x"), ex.parse_expression("2"), ex.cosh(X))
        out = rc.mobius_transform(eq, rc.MobiusMap(0, 1, 1, 0))
        assert out.a == ex.neg(ex.cosh(X))
        assert out.b == ex.Rational(-2)
        assert out.c == ex.neg(X)

    def test_identity_map(self):
        eq = rc.RiccatiEq(ex.parse_expression("x"), ex.parse_expression("0"), ex.parse_expression("1"))
        out = rc.mobius_transform(eq, rc.MobiusMap(1, 0, 0, 1))
        assert (out.a, out.b, out.c) == (eq.a, eq.b, eq.c)

    def test_shift_by_x_on_pure_square(self):
        eq = rc.RiccatiEq(1, 0, 0)
        out = rc.mobius_transform(eq, rc.MobiusMap(1, X, 0, 1))
        assert out.a == ex.ONE
        assert out.b == ex.parse_expression("-2*x")
        assert out.c == ex.parse_expression("x^2 + 1")

    def test_degenerate_map_rejected(self):
        eq = rc.RiccatiEq(1, 0, 0)
        with pytest.raises(ValueError):
            rc.mobius_transform(eq, rc.MobiusMap(1, 2, 2, 4))

    def test_group_law(self):
        rng = np.random.default_rng(11)
        eq = rc.RiccatiEq(1, ex.parse_expression("x/4"), ex.parse_expression("1/(4+x^2)"))
        pts = np.linspace(-3, 3, 13)
        for _ in range(6):
            vals = rng.uniform(-2, 2, 8)
            m1 = rc.MobiusMap(*[float(v) for v in vals[:4]])
            m2 = rc.MobiusMap(*[float(v) for v in vals[4:]])
            det1 = vals[0] * vals[3] - vals[1] * vals[2]
            det2 = vals[4] * vals[7] - vals[5] * vals[6]
            if min(abs(det1), abs(det2)) < 0.1:
                continue
            two_step = rc.mobius_transform(rc.mobius_transform(eq, m1), m2)
            one_step = rc.mobius_transform(eq, m2.compose(m1))
            for name in ("a", "b", "c"):
                gap = max(
                    abs(getattr(two_step, name).evaluate(x=float(p)) - getattr(one_step, name).evaluate(x=float(p)))
                    for p in pts
                )
                assert gap <= 1e-9

    def test_solution_transport(self):
        rng = np.random.default_rng(12)
        eq = rc.RiccatiEq(1, 0, 0)
        phi = ex.neg(ex.recip(ex.add(X, ex.Rational(7))))  # solves phi' = phi^2
        for _ in range(6):
            vals = [float(v) for v in rng.uniform(-2, 2, 4)]
            if abs(vals[0] * vals[3] - vals[1] * vals[2]) < 0.1:
                continue
            m = rc.MobiusMap(*vals)
            out = rc.mobius_transform(eq, m)
            assert rc.riccati_residual(out, m.apply(phi)) <= 1e-9


class TestGeneralFromParticular:
    def test_quadrature_family_of_the_hermite_case(self):
        # y' = -y^2 + x^2 + 1 with particular solution y = x
        eq = rc.RiccatiEq(-1, 0, ex.parse_expression("x^2+1"))
        family = rc.general_from_particular(eq, X)
        for c0 in (1, 3):
            sol = family(c0)
            assert rc.riccati_residual(eq, sol, points=np.linspace(-1.5, 1.5, 20)) <= 1e-9

    def test_pure_square_family(self):
        eq = rc.RiccatiEq(1, 0, 0)
        family = rc.general_from_particular(eq, ex.ZERO)
        sol = family(5)
        assert rc.riccati_residual(eq, sol, points=np.linspace(-2, 2, 20)) <= 1e-12
        # separable-equation oracle: phi = -1/(x + C), here with C = -5
        assert sol.evaluate(x=1.0) == pytest.approx(-1.0 / (1.0 - 5.0), rel=1e-12)

    def test_linear_case_needs_no_particular_solution(self):
        eq = rc.RiccatiEq(0, 1, 1)
        family = rc.general_from_particular(eq)
        sol = family(2)
        # C e^x - 1 up to the anchoring of the quadrature constant
        for p in (-1.0, 0.0, 1.0):
            assert sol.evaluate(x=p) == pytest.approx(2 * math.exp(p) - 1, rel=1e-12)

    def test_rejects_non_solution(self):
        eq = rc.RiccatiEq(-1, 0, ex.parse_expression("x^2+1"))
        with pytest.raises(ValueError):
            rc.general_from_particular(eq, ex.intpow(X, 2))


class TestCrossRatio:
    def phis(self):
        return [ex.neg(ex.recip(ex.sub(X, ex.Rational(c)))) for c in (0, 1, 2)]

    def test_a_zero_collapses_to_phi1(self):
        p1, p2, p3 = self.phis()
        assert rc.cross_ratio_solution(p1, p2, p3, 0) == p1

    def test_a_one_collapses_to_phi3(self):
        p1, p2, p3 = self.phis()
        out = rc.cross_ratio_solution(p1, p2, p3, 1)
        pts = [3.0, 4.0, 5.5]
        assert max(abs(out.evaluate(x=p) - p3.evaluate(x=p)) for p in pts) <= 1e-12

    def test_fourth_solution_shares_the_pole_family(self):
        eq = rc.RiccatiEq(1, 0, 0)
        p1, p2, p3 = self.phis()
        out = rc.cross_ratio_solution(p1, p2, p3, -1)
        pts = np.linspace(3.0, 6.0, 16)
        assert rc.riccati_residual(eq, out, points=pts) <= 1e-12
        # root-finder oracle: c4 with out = -1/(x - c4) must be x-independent
        c4 = [p + 1.0 / out.evaluate(x=p) for p in pts]
        assert np.ptp(c4) <= 1e-9

    def test_degenerate_constant(self):
        p1, p2, p3 = self.phis()
        with pytest.raises(ValueError):
            rc.cross_ratio_solution(p1, p1, p3, 0.5)


class TestCrossRatioConservation:
    def test_four_integrated_solutions(self):
        eq = rc.RiccatiEq(1, ex.parse_expression("sin(x)/2"), ex.parse_expression("-1 - x/10"))
        x0, x1 = 0.0, 1.2
        starts = [0.0, 0.25, 0.5, 0.75]
        trajs = [integrate_re(eq, s, x0, x1) for s in starts]
        xs = np.linspace(x0, x1, 60)
        vals = np.array([[t(p)[0] for t in trajs] for p in xs])
        cr = (vals[:, 0] - vals[:, 1]) * (vals[:, 3] - vals[:, 2]) / (
            (vals[:, 0] - vals[:, 2]) * (vals[:, 3] - vals[:, 1])
        )
        assert np.max(np.abs(cr - cr[0])) <= 1e-8


class TestConvertReLode:
    def test_lode_to_re_shape(self):
        l = rc.Lode2(ex.parse_expression("x"), ex.parse_expression("cosh(x)"))
        eq, mapping = rc.convert_re_lode("lode_to_re", l)
        assert eq.a == ex.ONE
        assert eq.b == l.b
        assert eq.c == ex.neg(l.c)
        assert "psi" in mapping

    def test_lode_to_re_transport(self):
        # psi'' = psi has solution e^x; phi = -psi'/psi = -1 must solve the image
        l = rc.Lode2(0, 1)
        eq, _ = rc.convert_re_lode("lode_to_re", l)
        assert rc.riccati_residual(eq, ex.Rational(-1)) <= 1e-12

    def test_re_to_lode_canonical_case(self):
        eq = rc.RiccatiEq(1, 0, ex.parse_expression("x^2+1"))
        l, _ = rc.convert_re_lode("re_to_lode", eq)
        assert ex.is_zero(l.b)
        assert l.c == ex.parse_expression("-(x^2+1)")

    def test_round_trip(self):
        eq = rc.RiccatiEq(1, 0, ex.parse_expression("x^2+1"))
        l, _ = rc.convert_re_lode("re_to_lode", eq)
        back, _ = rc.convert_re_lode("lode_to_re", l)
        assert (back.a, back.b, back.c) == (eq.a, eq.b, eq.c)

    def test_re_to_lode_numeric_consistency(self):
        # integrate the RE and the LODE side by side: phi == -psi'/(a psi)
        eq = rc.RiccatiEq(1, 0, ex.parse_expression("x^2+1"))
        l, _ = rc.convert_re_lode("re_to_lode", eq)
        phi_traj = integrate_re(eq, 0.3, 0.0, 0.8)

        def lode_rhs(x, y):
            env = {"x": x}
            return np.array([y[1], l.b.evaluate(env) * y[1] + l.c.evaluate(env) * y[0]])

        psi_traj = numeric.integrate_ivp(lode_rhs, 0.0, [1.0, -0.3], 0.8, tol=1e-12)
        for p in np.linspace(0.0, 0.8, 9):
            psi, dpsi = psi_traj(p)
            assert phi_traj(p)[0] == pytest.approx(-dpsi / psi, abs=1e-8)

    def test_linear_case_refused(self):
        with pytest.raises(ValueError):
            rc.convert_re_lode("re_to_lode", rc.RiccatiEq(0, 1, 1))


class TestCanonicalForm:
    def test_no_first_derivative_term(self):
        l = rc.Lode2(0, ex.cosh(X))
        c_hat, gauge = rc.canonical_form(l)
        assert c_hat == ex.neg(ex.cosh(X))
        assert gauge == ex.ONE

    def test_hermite_equation(self):
        # omega'' - 2x omega' + 2 lam omega = 0 as psi'' = 2x psi' - 2 lam psi
        lam = 3
        l = rc.Lode2(ex.parse_expression("2*x"), ex.Rational(-2 * lam))
        c_hat, gauge = rc.canonical_form(l)
        assert c_hat == ex.parse_expression(f"{2 * lam} + 1 - x^2")
        assert gauge == ex.exp(ex.parse_expression("1/2*x^2"))

    def test_constant_coefficients(self):
        l = rc.Lode2(2, 0)
        c_hat, _ = rc.canonical_form(l)
        assert c_hat == ex.Rational(-1)

    def test_gauge_maps_solutions(self):
        # psi'' = 2x psi' - 2 psi (lam = 1) has solution omega = 2x;
        # psi_hat = omega / gauge must solve psi'' + c_hat psi = 0
        l = rc.Lode2(ex.parse_expression("2*x"), ex.Rational(-2))
        c_hat, gauge = rc.canonical_form(l)
        psi_hat = ex.mul(ex.parse_expression("2*x"), ex.recip(gauge))
        res = ex.add(ex.diff(psi_hat, "x", 2), ex.mul(c_hat, psi_hat))
        for p in (-1.5, 0.4, 2.0):
            assert abs(res.evaluate(x=p)) <= 1e-10


class TestSecondSolution:
    def test_trivial_equation(self):
        l = rc.Lode2(0, 0)
        psi2 = rc.second_solution(l, ex.ONE)
        assert psi2 == X

    def test_exponential_pair(self):
        l = rc.Lode2(0, 1)
        psi1 = ex.exp(X)
        psi2 = rc.second_solution(l, psi1)
        for p in (-1.0, 0.0, 1.3):
            assert psi2.evaluate(x=p) == pytest.approx(-0.5 * math.exp(-p), rel=1e-12)
        w = ex.sub(ex.mul(psi1, ex.diff(psi2, "x")), ex.mul(psi2, ex.diff(psi1, "x")))
        for p in (-1.0, 0.5):
            assert w.evaluate(x=p) == pytest.approx(1.0, rel=1e-12)

    def test_cosine_gives_sine(self):
        l = rc.Lode2(0, -1)
        psi2 = rc.second_solution(l, ex.cos(X), interval=(-1.3, 1.3))
        for p in (-1.0, 0.2, 1.2):
            assert psi2.evaluate(x=p) == pytest.approx(math.sin(p), rel=1e-12)

    def test_zero_crossing_reported(self):
        l = rc.Lode2(0, 0)
        with pytest.raises(ValueError):
            rc.second_solution(l, X)

    def test_requires_canonical_equation(self):
        with pytest.raises(ValueError):
            rc.second_solution(rc.Lode2(1, 0), ex.ONE)


class TestHermite:
    def test_polynomial_table(self):
        assert rc.hermite_polynomial(0)[0] == ex.ONE
        assert rc.hermite_polynomial(1)[0] == ex.parse_expression("2*x")
        assert rc.hermite_polynomial(2)[0] == ex.parse_expression("4*x^2 - 2")

    def test_witness_for_n0(self):
        _, y = rc.hermite_polynomial(0)
        assert y == ex.neg(X)

    @pytest.mark.parametrize("n", range(7))
    def test_witness_solves_the_riccati_equation(self, n):
        _, y = rc.hermite_polynomial(n)
        rhs = ex.parse_expression(f"x^2 - {2 * n + 1}")
        res = ex.add(ex.diff(y, "x"), ex.intpow(y, 2), ex.neg(rhs))
        for p in np.linspace(4.0, 9.0, 100):
            assert abs(res.evaluate(x=float(p))) <= 1e-10

    @pytest.mark.parametrize("n", range(11))
    def test_recurrence_equals_derivative_route(self, n):
        assert rc.hermite_coefficients(n) == rc.rodrigues_coefficients(n)

    def test_ladder_from_x(self):
        y_hat, alpha_hat = rc.hermite_ladder(X, 1)
        assert y_hat == ex.parse_expression("x + 1/x")
        assert alpha_hat == 3

    def test_ladder_preserves_the_equation(self):
        y_hat, alpha_hat = rc.hermite_ladder(X, 1)
        y2, alpha2 = rc.hermite_ladder(y_hat, alpha_hat)
        assert alpha2 == 5
        rhs = ex.parse_expression("x^2 + 5")
        res = ex.add(ex.diff(y2, "x"), ex.intpow(y2, 2), ex.neg(rhs))
        for p in (0.3, 0.9, 2.0, -1.7):
            assert abs(res.evaluate(x=p)) <= 1e-10

    def test_inverse_ladder(self):
        y_hat, alpha_hat = rc.hermite_ladder(X, 1)
        y, alpha = rc.inverse_hermite_ladder(y_hat, alpha_hat)
        assert y == X
        assert alpha == 1

    def test_ladder_rejects_identically_minus_x(self):
        with pytest.raises(ValueError):
            rc.hermite_ladder(ex.neg(X), 1)


class TestPoleSeries:
    def test_alpha_three_terminates(self):
        a = rc.pole_series(3, 0, 5)
        assert a == [0, 1, 0, 0, 0, 0]
        assert all(isinstance(v, Fraction) for v in a)

    def test_universal_low_order_lines(self):
        for alpha, eps in ((2, Fraction(1, 2)), (Fraction(-1, 3), 1)):
            a = rc.pole_series(alpha, eps, 4)
            assert a[0] == 0
            assert 4 * a[2] + 2 * eps == 0

    def test_alpha_one_coefficients(self):
        a = rc.pole_series(1, 0, 5)
        assert a[1] == Fraction(1, 3)
        assert a[3] == Fraction(8, 45)

    def test_series_matches_ivp_near_the_pole(self):
        a = rc.pole_series(1, 0, 5)

        def series(x):
            return 1.0 / x + sum(float(c) * x**j for j, c in enumerate(a))

        def rhs(x, y):
            return np.array([x * x + 1.0 - y[0] ** 2])

        x0, x1 = 0.2, 0.4
        traj = numeric.integrate_ivp(rhs, x0, [series(x0)], x1, tol=1e-13)
        # truncation order: next omitted term is O(x^7)
        assert abs(traj.ys[-1][0] - series(x1)) <= 1e-5
        traj2 = numeric.integrate_ivp(rhs, x0, [series(x0)], 0.25, tol=1e-13)
        assert abs(traj2.ys[-1][0] - series(0.25)) <= 5e-7


class TestLodoConstKernel:
    def residual(self, coeffs, f):
        n = len(coeffs)
        d = f
        total = ex.diff(f, "x", n)
        for i, a in enumerate(coeffs):
            total = ex.add(total, ex.mul(ex.as_expression(a), ex.diff(f, "x", n - 1 - i)))
        return total

    def test_distinct_real_roots(self):
        basis = rc.lodo_const_kernel([-3.0, 2.0]).functions  # psi'' - 3 psi' + 2 psi
        vals = sorted(str(b) for b in basis)
        assert len(basis) == 2
        for b in basis:
            res = self.residual([-3.0, 2.0], b)
            assert max(abs(res.evaluate(x=p)) for p in (-1.0, 0.0, 1.0)) <= 1e-8

    def test_double_root(self):
        out = rc.lodo_const_kernel([-2.0, 1.0])  # psi'' - 2 psi' + psi
        assert len(out.functions) == 2
        assert any(isinstance(b, ex.Product) for b in out.functions)  # x e^x
        for b in out.functions:
            res = self.residual([-2.0, 1.0], b)
            assert max(abs(res.evaluate(x=p)) for p in (-1.0, 0.5, 1.5)) <= 1e-6

    def test_pure_derivative_operator(self):
        out = rc.lodo_const_kernel([0.0, 0.0, 0.0])  # d^3/dx^3
        assert [str(b) for b in out.functions] == ["1", "x", "x^2"]

    def test_complex_pair_returns_real_basis(self):
        out = rc.lodo_const_kernel([0.0, 1.0])  # psi'' + psi
        names = {str(b) for b in out.functions}
        assert names == {"cos(x)", "sin(x)"}


class TestLodeFactor:
    def test_kernel_member_divides_exactly(self):
        l = rc.Lode2(0, 1)
        out = rc.lode_factor(l, ex.exp(X))
        assert out.a == ex.ONE
        assert out.magnitude <= 1e-12

    def test_non_member_leaves_constant_remainder(self):
        l = rc.Lode2(0, 1)
        out = rc.lode_factor(l, ex.exp(ex.mul(ex.Rational(2), X)))
        assert out.remainder == ex.Rational(3)

    def test_hermite_first_excited_state(self):
        l = rc.Lode2(ex.parse_expression("2*x"), ex.Rational(-2))
        out = rc.lode_factor(l, ex.parse_expression("2*x"))
        assert out.magnitude <= 1e-10


class TestKovalevskii:
    def test_n3_quadratic_integrals(self):
        rep = rc.kovalevskii_check(3, (1.0, 2.0, 3.0), (0.0, 0.25))
        assert set(rep.drifts) == {"F1", "F2"}
        assert rep.max_drift <= 1e-7

    def test_n4_cross_ratios(self):
        rep = rc.kovalevskii_check(4, (1.0, 2.0, 3.0, 4.0), (0.0, 0.12))
        assert "CR1234" in rep.drifts
        assert rep.max_drift <= 1e-7

    def test_equal_pair_keeps_f1_zero(self):
        rep = rc.kovalevskii_check(3, (2.0, 2.0, 1.0), (0.0, 0.3))
        assert rep.drifts["F1"] <= 1e-12

    def test_blow_up_is_reported(self):
        with pytest.raises(numeric.IntegrationBlowUp):
            rc.kovalevskii_check(3, (1.0, 2.0, 3.0), (0.0, 10.0))
