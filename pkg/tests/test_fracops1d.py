import numpy as np
import pytest
from scipy.special import gamma

from bcfrac import (
    DEFAULT_CONTROL,
    DomainError,
    FracSpec,
    Quadrature1D,
    QuadratureError,
    ScalarWeightFn,
    StepError,
    hausdorff_derivative,
    integral_rule,
    prop_derivative,
    prop_frac_derivative,
    prop_frac_integral,
    tabulate,
)


def brute_force_left_integral(f, alpha, sigma, phi, dphi, a, t, n=100_000):
    """Independent midpoint-rule oracle on a strongly graded mesh, written
    straight from the defining integral.

    Floating point cannot place mesh points closer to ``t`` than machine
    epsilon relatively, so a mass of order ``eps^alpha`` at the singular end
    is out of reach for any pointwise rule; usable down to ~1e-8 for
    ``alpha = 0.5``."""
    s = np.linspace(0.0, 1.0, n + 1) ** 4.0
    tau_edges = t - (t - a) * s[::-1]
    mid = 0.5 * (tau_edges[1:] + tau_edges[:-1])
    dt = np.diff(tau_edges)
    keep = dt > 0
    mid, dt = mid[keep], dt[keep]
    c = (sigma - 1.0) / sigma
    kern = np.exp(c * (phi(t) - phi(mid))) * (phi(t) - phi(mid)) ** (alpha - 1.0)
    total = np.sum(kern * f(mid) * dphi(mid) * dt)
    return total / (sigma**alpha * gamma(alpha))


class TestPropDerivative:
    def test_sigma_one_is_scaled_derivative(self, cubic_weight):
        f, df = np.sin, np.cos
        t = 0.6
        got = prop_derivative(f, df, cubic_weight, 1.0, t)
        assert abs(got - np.cos(t) / (1 + 3 * t**2)) < 1e-14

    def test_kernel_element_annihilated(self, identity_weight):
        sigma = 0.3
        rate = (sigma - 1.0) / sigma
        f = lambda t: np.exp(rate * t)
        df = lambda t: rate * np.exp(rate * t)
        got = prop_derivative(f, df, identity_weight, sigma, 0.4)
        assert abs(got) < 1e-14

    def test_direct_evaluation(self):
        w = ScalarWeightFn(phi=lambda t: t**3, dphi=lambda t: 3 * t**2, lo=1.0, hi=2.0)
        got = prop_derivative(lambda t: t**2, lambda t: 2 * t, w, 0.5, 1.5)
        expected = 0.5 * 1.5**2 + 0.5 * (2 * 1.5) / (3 * 1.5**2)
        assert abs(got - expected) < 1e-14
        assert abs(expected - 1.34722) < 1e-4

    def test_domain_error(self, identity_weight):
        with pytest.raises(DomainError):
            prop_derivative(np.sin, np.cos, identity_weight, 0.5, 2.0)

    def test_control_limits(self):
        # interpolation coefficients approach their endpoint roles
        t = 0.3
        assert abs(DEFAULT_CONTROL.chi1(1e-6, t) - 1.0) < 1e-4
        assert abs(DEFAULT_CONTROL.chi0(1e-6, t)) < 1e-4
        assert abs(DEFAULT_CONTROL.chi1(1 - 1e-6, t)) < 1e-4
        assert abs(DEFAULT_CONTROL.chi0(1 - 1e-6, t) - 1.0) < 1e-4

    def test_custom_control(self, identity_weight):
        from bcfrac import ProportionalControl

        ctrl = ProportionalControl(
            chi1=lambda s, t: (1 - s) * np.cos(s * np.asarray(t, dtype=float)),
            chi0=lambda s, t: s * np.ones_like(np.asarray(t, dtype=float)),
        )
        t, s = 0.4, 0.6
        got = prop_derivative(np.sin, np.cos, identity_weight, s, t, control=ctrl)
        want = (1 - s) * np.cos(s * t) * np.sin(t) + s * np.cos(t)
        assert abs(got - want) < 1e-14

    def test_linearity(self, cubic_weight):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=2)
        f1, df1 = np.sin, np.cos
        f2, df2 = lambda t: t**2, lambda t: 2 * t
        t = 0.55
        lhs = prop_derivative(
            lambda u: a * f1(u) + b * f2(u), lambda u: a * df1(u) + b * df2(u),
            cubic_weight, 0.6, t)
        rhs = a * prop_derivative(f1, df1, cubic_weight, 0.6, t) + b * prop_derivative(
            f2, df2, cubic_weight, 0.6, t)
        assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))


class TestPropFracIntegral:
    def test_classical_constant(self, identity_weight):
        got = prop_frac_integral(
            lambda t: np.ones_like(t), FracSpec(0.5, 1.0, identity_weight),
            "left", 1.0, Quadrature1D(n=2048))
        assert abs(got - 2.0 / np.sqrt(np.pi)) < 1e-6

    def test_near_order_one_recovers_plain_integral(self, identity_weight):
        got = prop_frac_integral(
            lambda t: t, FracSpec(1 - 1e-8, 1.0, identity_weight),
            "left", 1.0, Quadrature1D(n=2048))
        assert abs(got - 0.5) < 1e-5

    @pytest.mark.parametrize("alpha", [0.25, 0.5])
    def test_eigenfunction_closed_form(self, cubic_weight, alpha):
        # tempered power input: closed form validated first by the
        # brute-force oracle (at the order it can resolve), then pinned
        # against the engine at both orders and both schemes
        sigma, beta = 0.6, 1.5
        c = (sigma - 1.0) / sigma
        phi = lambda t: t + t**3
        dphi = lambda t: 1 + 3 * t**2
        f = lambda tau: np.exp(c * phi(tau)) * phi(tau) ** (beta - 1.0)
        t = 0.9
        closed = (gamma(beta) / (sigma**alpha * gamma(beta + alpha))
                  * np.exp(c * phi(t)) * phi(t) ** (beta + alpha - 1.0))
        if alpha == 0.5:
            oracle = brute_force_left_integral(f, alpha, sigma, phi, dphi, 0.0, t)
            assert abs(oracle - closed) < 1e-5
        for scheme, n in (("graded", 2048), ("gauss_jacobi", 256)):
            got = prop_frac_integral(f, FracSpec(alpha, sigma, cubic_weight),
                                     "left", t, Quadrature1D(n=n, scheme=scheme))
            assert abs(got - closed) < 1e-5

    def test_sigma_one_power_rule(self, identity_weight):
        alpha, beta, t = 0.25, 1.5, 0.8
        closed = gamma(beta) / gamma(beta + alpha) * t ** (beta + alpha - 1)
        got = prop_frac_integral(lambda tau: tau ** (beta - 1), FracSpec(alpha, 1.0, identity_weight),
                                 "left", t, Quadrature1D(n=256, scheme="gauss_jacobi"))
        assert abs(got - closed) < 1e-8

    def test_right_side_mirror(self, identity_weight):
        # right integral of 1 from b: (b - t)^alpha / Gamma(alpha + 1)
        alpha, t = 0.5, 0.25
        got = prop_frac_integral(lambda tau: np.ones_like(tau), FracSpec(alpha, 1.0, identity_weight),
                                 "right", t, Quadrature1D(n=2048))
        assert abs(got - (1 - t) ** alpha / gamma(1 + alpha)) < 1e-6

    def test_linearity(self, cubic_weight, quad_default):
        rng = np.random.default_rng(5)
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        spec = FracSpec(0.4, 0.8, cubic_weight)
        t = np.array([0.3, 0.7])
        lhs = prop_frac_integral(lambda u: a * np.sin(u) + b * u**2, spec, "left", t, quad_default)
        rhs = a * prop_frac_integral(np.sin, spec, "left", t, quad_default) \
            + b * prop_frac_integral(lambda u: u**2, spec, "left", t, quad_default)
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * (1 + np.max(np.abs(lhs)))

    def test_sigma_zero_is_identity_limit(self, cubic_weight, quad_default):
        got = prop_frac_integral(np.cos, FracSpec(0.5, 0.0, cubic_weight), "left", 0.4, quad_default)
        assert abs(got - np.cos(0.4)) < 1e-14

    def test_domain_errors(self, identity_weight, quad_default):
        spec = FracSpec(0.5, 1.0, identity_weight)
        with pytest.raises(DomainError):
            prop_frac_integral(np.sin, spec, "left", 1.5, quad_default)
        with pytest.raises(ValueError):
            prop_frac_integral(np.sin, spec, "up", 0.5, quad_default)

    def test_self_check_raises(self, identity_weight):
        # an impossible tolerance must trip the internal two-level estimate
        q = Quadrature1D(n=64, tol=1e-15)
        with pytest.raises(QuadratureError):
            prop_frac_integral(lambda t: np.exp(3 * t) * np.sin(9 * t),
                               FracSpec(0.3, 0.8, identity_weight), "left", 0.9, q)

    def test_rule_extraction_matches(self, cubic_weight, quad_default):
        spec = FracSpec(0.35, 0.7, cubic_weight)
        direct = prop_frac_integral(np.cos, spec, "left", 0.8, quad_default)
        tau, wts = integral_rule(spec, "left", 0.8, quad_default)
        assert abs(np.sum(wts * np.cos(tau)) - direct) < 1e-14

    def test_graded_convergence_order(self, cubic_weight):
        # smooth input, graded mesh at the automatic grading: order >= 2
        spec = FracSpec(0.5, 1.0, cubic_weight)
        ref = prop_frac_integral(np.sin, spec, "left", 0.9,
                                 Quadrature1D(n=400, scheme="gauss_jacobi"))
        errs = [abs(prop_frac_integral(np.sin, spec, "left", 0.9, Quadrature1D(n=n)) - ref)
                for n in (128, 256, 512)]
        order = np.polyfit(np.log2([128, 256, 512]), np.log2(errs), 1)[0]
        assert -order >= 2.0


class TestPropFracDerivative:
    def test_inversion_left_and_right(self, cubic_weight):
        q = Quadrature1D(n=1024)
        spec = FracSpec(0.5, 0.7, cubic_weight)
        tpts = np.linspace(0.2, 0.8, 5)
        for side, toward in (("left", 0.0), ("right", 1.0)):
            integral = tabulate(
                lambda x: prop_frac_integral(np.sin, spec, side, x, q),
                0.0, 1.0, 512, grade_toward=toward)
            got = prop_frac_derivative(integral, spec, side, tpts, q)
            assert np.max(np.abs(got - np.sin(tpts))) < 1e-4

    def test_derivative_of_constant(self, identity_weight):
        got = prop_frac_derivative(lambda t: np.ones_like(np.asarray(t, dtype=float)),
                                   FracSpec(0.5, 1.0, identity_weight), "left", 0.49,
                                   Quadrature1D(n=2048))
        assert abs(got - 0.49**-0.5 / gamma(0.5)) < 1e-6
        assert abs(1 / gamma(0.5) - 0.56419) < 1e-5

    def test_step_error(self, identity_weight, quad_default):
        spec = FracSpec(0.5, 0.7, identity_weight)
        with pytest.raises(StepError):
            prop_frac_derivative(np.sin, spec, "left", 0.5, quad_default, h=0.6)

    def test_order_validated(self, identity_weight, quad_default):
        with pytest.raises(ValueError):
            prop_frac_derivative(np.sin, FracSpec(1.0, 0.7, identity_weight),
                                 "left", 0.5, quad_default)


class TestHausdorff:
    def test_power_profile_gives_one(self):
        alpha, a = 0.37, 0.2
        l = lambda t: (t - a) ** alpha
        dl = lambda t: alpha * (t - a) ** (alpha - 1.0)
        got = hausdorff_derivative(l, dl, alpha, a, np.array([0.5, 1.0, 2.0]))
        assert np.max(np.abs(got - 1.0)) < 1e-12

    def test_linear_profile(self):
        got = hausdorff_derivative(lambda t: t, lambda t: np.ones_like(t), 0.5, 0.0, 4.0)
        assert abs(got - 4.0) < 1e-14

    def test_order_one_is_classical(self):
        got = hausdorff_derivative(np.sin, np.cos, 1.0, 0.0, 1.3)
        assert abs(got - np.cos(1.3)) < 1e-14

    def test_domain_error(self):
        with pytest.raises(DomainError):
            hausdorff_derivative(np.sin, np.cos, 0.5, 1.0, 0.5)


class TestWeightValidation:
    def test_monotone_required(self):
        w = ScalarWeightFn(phi=lambda t: -t, dphi=lambda t: -np.ones_like(t), lo=0.0, hi=1.0)
        with pytest.raises(DomainError):
            w.validate()

    def test_bisection_inverse(self, cubic_weight):
        u = cubic_weight.phi(np.array([0.3, 0.8]))
        back = cubic_weight.inverse(u)
        assert np.max(np.abs(back - [0.3, 0.8])) < 1e-13
