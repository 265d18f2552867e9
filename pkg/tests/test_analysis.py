import numpy as np
import pytest

from ffmfg.core import DomainError, ModelParams, NonPositiveDensityError
from ffmfg.analysis import (
    ConvexityViolationError,
    EntropyPair,
    InvalidExponentError,
    RiemannSpec,
    SpecOutOfRegionError,
    convexity_check,
    density_lower_bound,
    eigenstructure,
    entropy_condition_residual,
    entropy_eval,
    entropy_exponent_b,
    entropy_pde_terms,
    entropy_residual_pde,
    flux_jacobian,
    flux_phys,
    genuine_nonlinearity,
    riemann_values,
    riemann_w,
    riemann_z,
    theta_alpha,
)
from ffmfg.oracle import FDConfig, eig2_numeric, fd_derivatives, level_set_solve

SQRT3 = np.sqrt(3.0)


class TestFlux:
    def test_unit_state(self):
        p = ModelParams(alpha=1.0)
        assert np.allclose(flux_phys(1.0, 1.0, p), [0.5, -1.0])

    def test_zero_v(self):
        for alpha in (0.3, 1.0, 1.7):
            p = ModelParams(alpha=alpha)
            assert np.allclose(flux_phys(0.0, 1.0, p), [0.0, 0.0])

    def test_monotone_coupling(self):
        p = ModelParams(alpha=1.0, coupling="monotone_ff", K=1.0)
        assert np.allclose(flux_phys(2.0, 1.0, p), [1.0, -2.0])

    def test_antimonotone_sign(self):
        p = ModelParams(alpha=1.0, coupling="antimonotone", K=0.5)
        f = flux_phys(1.0, 1.0, p)
        assert np.allclose(f, [-0.5 - 0.5, -1.0])

    def test_rejects_zero_density(self):
        with pytest.raises(NonPositiveDensityError):
            flux_phys(1.0, 0.0, ModelParams(alpha=1.0))

    def test_vectorized(self):
        p = ModelParams(alpha=0.7)
        v = np.array([1.0, 2.0, 0.0])
        m = np.array([1.0, 0.5, 2.0])
        f = flux_phys(v, m, p)
        assert f.shape == (2, 3)
        for i in range(3):
            assert np.allclose(f[:, i], flux_phys(v[i], m[i], p))


class TestJacobian:
    def test_unit_state(self):
        jac = flux_jacobian(1.0, 1.0, ModelParams(alpha=1.0))
        assert np.allclose(jac, [[1.0, -0.5], [-1.0, 0.0]])

    def test_zero_v(self):
        jac = flux_jacobian(0.0, 1.0, ModelParams(alpha=1.0))
        assert np.allclose(jac, [[0.0, 0.0], [-1.0, 0.0]])

    def test_alpha_small_limit(self):
        # alpha -> 0 limit of the closed form at (v, m) = (1, 2)
        jac = flux_jacobian(1.0, 2.0, ModelParams(alpha=1e-12))
        assert np.allclose(jac, [[1.0, 0.0], [-2.0, -1.0]], atol=1e-10)

    def test_matches_fd_all_couplings(self):
        rng = np.random.default_rng(11)
        for coupling in ("none", "monotone_ff", "antimonotone"):
            for _ in range(20):
                p = ModelParams(
                    alpha=rng.uniform(0.1, 1.9),
                    coupling=coupling,
                    K=rng.uniform(0.1, 2.0) if coupling != "none" else 0.0,
                )
                v, m = rng.uniform(0.3, 3.0, 2)
                jac = flux_jacobian(v, m, p)
                for row in range(2):
                    grad_fd, _ = fd_derivatives(
                        lambda vv, mm: float(flux_phys(vv, mm, p)[row]), (v, m)
                    )
                    assert np.max(np.abs(grad_fd - jac[row])) <= 1e-6 * max(
                        1.0, np.max(np.abs(jac[row]))
                    )


class TestEigenstructure:
    def test_reference_point(self):
        pair = eigenstructure(1.0, 1.0, 1.0)
        assert pair.lambda1 == pytest.approx((1 - SQRT3) / 2, abs=1e-14)
        assert pair.lambda2 == pytest.approx((1 + SQRT3) / 2, abs=1e-14)
        assert np.allclose(pair.r1, [1 - SQRT3, -2.0])
        assert np.allclose(pair.r2, [1 + SQRT3, -2.0])

    def test_cross_check_numeric(self):
        pair = eigenstructure(1.0, 1.0, 1.0)
        numeric = eig2_numeric(flux_jacobian(1.0, 1.0, ModelParams(alpha=1.0)))
        assert np.allclose([pair.lambda1, pair.lambda2], numeric.values, atol=1e-12)

    def test_degenerate_at_zero_v(self):
        pair = eigenstructure(0.0, 1.0, 1.0)
        assert pair.lambda1 == pair.lambda2 == 0.0

    def test_eigen_residual_random(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            alpha = rng.uniform(0.05, 1.95)
            v, m = rng.uniform(0.1, 10.0, 2)
            pair = eigenstructure(v, m, alpha)
            jac = flux_jacobian(v, m, ModelParams(alpha=alpha))
            for lam, vec in ((pair.lambda1, pair.r1), (pair.lambda2, pair.r2)):
                res = np.max(np.abs(jac @ vec - lam * vec))
                assert res <= 1e-10 * np.max(np.abs(vec)) * max(abs(lam), 1.0)

    def test_ordering_for_negative_v(self):
        pair = eigenstructure(-1.0, 1.0, 1.0)
        assert pair.lambda1 <= pair.lambda2
        jac = flux_jacobian(-1.0, 1.0, ModelParams(alpha=1.0))
        for lam, vec in ((pair.lambda1, pair.r1), (pair.lambda2, pair.r2)):
            assert np.max(np.abs(jac @ vec - lam * vec)) <= 1e-12

    def test_sign_structure(self):
        # alpha < disc for alpha < 2, so lambda1 < 0 < lambda2 whenever v > 0
        rng = np.random.default_rng(13)
        for _ in range(50):
            alpha = rng.uniform(0.05, 1.95)
            v, m = rng.uniform(0.1, 5.0, 2)
            assert alpha < np.sqrt(4 - 2 * alpha + alpha * alpha)
            pair = eigenstructure(v, m, alpha)
            assert pair.lambda1 < 0.0 < pair.lambda2


class TestGenuineNonlinearity:
    def test_reference_point(self):
        g1, g2 = genuine_nonlinearity(1.0, 1.0, 1.0)
        assert g1 == pytest.approx(3 - 2 * SQRT3, abs=1e-14)
        assert g2 == pytest.approx(3 + 2 * SQRT3, abs=1e-14)

    def test_zero_at_zero_v(self):
        g1, g2 = genuine_nonlinearity(0.0, 1.0, 1.0)
        assert g1 == 0.0 and g2 == 0.0

    def test_linear_in_v(self):
        g1, g2 = genuine_nonlinearity(2.0, 1.0, 1.0)
        assert g1 == pytest.approx(2 * (3 - 2 * SQRT3))
        assert g2 == pytest.approx(2 * (3 + 2 * SQRT3))

    def test_signs_and_matches_fd_directional(self):
        # g_i equals the directional derivative of lambda_i along r_i
        rng = np.random.default_rng(14)
        for _ in range(20):
            alpha = rng.uniform(0.1, 1.9)
            v, m = rng.uniform(0.5, 3.0, 2)
            g1, g2 = genuine_nonlinearity(v, m, alpha)
            assert g1 < 0.0 < g2
            pair = eigenstructure(v, m, alpha)
            for lam_pick, vec, g in ((0, pair.r1, g1), (1, pair.r2, g2)):
                def lam_at(vv, mm, k=lam_pick):
                    p = eigenstructure(vv, mm, alpha)
                    return (p.lambda1, p.lambda2)[k]

                grad_fd, _ = fd_derivatives(lam_at, (v, m))
                assert abs(float(grad_fd @ vec) - float(g)) <= 1e-5 * max(abs(g), 1.0)


class TestTheta:
    def test_endpoints(self):
        assert theta_alpha(0.0) == pytest.approx(0.0, abs=1e-15)
        assert theta_alpha(1.0) == pytest.approx((SQRT3 - 1) / 2, abs=1e-15)
        assert theta_alpha(2.0) == pytest.approx(1.0, abs=1e-15)

    def test_monotone_increasing(self):
        grid = np.linspace(0.0, 2.0, 100)
        values = theta_alpha(grid)
        assert np.all(np.diff(values) > 0.0)


class TestEntropyExponent:
    def test_reference_value(self):
        assert entropy_exponent_b(1.0, 2.0) == pytest.approx((3 - np.sqrt(13)) / 2, abs=1e-14)

    def test_solves_condition(self):
        b = entropy_exponent_b(1.0, 2.0)
        # at alpha=1 the condition reduces to 2(b^2 - 3b - 1) = 0
        assert abs(2 * (b * b - 3 * b - 1)) <= 1e-12
        assert abs(entropy_condition_residual(1.0, 2.0, b)) <= 1e-12

    def test_limit_towards_theta(self):
        b = entropy_exponent_b(1.0, 1e6)
        assert abs(-b / 1e6 - theta_alpha(1.0)) <= 1e-5

    def test_negative_for_a_above_one(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            alpha = rng.uniform(0.05, 1.95)
            a = rng.uniform(1.01, 30.0)
            b = entropy_exponent_b(alpha, a)
            assert b < 0.0
            # -b/a approaches theta from below
            assert theta_alpha(alpha) + b / a > 0.0

    def test_invalid_a(self):
        for a in (0.0, 0.5, 1.0):
            with pytest.raises(InvalidExponentError):
                entropy_exponent_b(1.0, a)

    def test_negative_a_allowed(self):
        b = entropy_exponent_b(1.0, -1.0)
        assert abs(entropy_condition_residual(1.0, -1.0, b)) <= 1e-12


class TestEntropyPde:
    def test_entropy_pair_resolves(self):
        b = (3 - np.sqrt(13)) / 2
        res = entropy_residual_pde(2.0, b, 2.0, 3.0, 1.0)
        t1, t2, t3 = entropy_pde_terms(2.0, b, 2.0, 3.0, 1.0)
        assert abs(res) <= 1e-12 * max(abs(t1), abs(t2), abs(t3))

    def test_constant_entropy(self):
        assert entropy_residual_pde(0.0, 0.0, 1.7, 0.9, 1.3) == 0.0

    def test_non_entropy_pair_fails(self):
        res = entropy_residual_pde(2.0, 1.0, 1.0, 1.0, 1.0)
        assert abs(res) > 0.1

    def test_random_pairs_property(self):
        rng = np.random.default_rng(16)
        for _ in range(200):
            alpha = rng.uniform(0.05, 1.95)
            a = rng.uniform(1.1, 20.0)
            b = entropy_exponent_b(alpha, a)
            v = rng.uniform(0.1, 10.0, 10)
            m = rng.uniform(0.1, 10.0, 10)
            t1, t2, t3 = entropy_pde_terms(a, b, v, m, alpha)
            scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.abs(t3))
            assert np.max(np.abs(t1 + t2 + t3) / scale) <= 1e-9

    def test_domain_error(self):
        with pytest.raises(DomainError):
            entropy_residual_pde(2.0, -0.3, -1.0, 1.0, 1.0)


class TestEntropyEval:
    def test_value_with_unit_density(self):
        value, _, _ = entropy_eval(2.0, -0.3027756377319946, 2.0, 1.0)
        assert value == pytest.approx(4.0)

    def test_hessian_with_b_zero(self):
        _, _, hess = entropy_eval(2.0, 0.0, 3.0, 5.0)
        assert np.allclose(hess, [[2.0, 0.0], [0.0, 0.0]])

    def test_matches_fd(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            a = rng.uniform(1.5, 4.0)
            b = entropy_exponent_b(1.0, a)
            v, m = rng.uniform(0.3, 5.0, 2)
            value, grad, hess = entropy_eval(a, b, v, m)
            grad_fd, hess_fd = fd_derivatives(
                lambda vv, mm: vv**a * mm**b, (v, m), FDConfig(h=1e-4)
            )
            assert np.max(np.abs(grad - grad_fd)) <= 1e-6 * np.max(np.abs(grad))
            assert np.max(np.abs(hess - hess_fd)) <= 1e-6 * np.max(np.abs(hess))

    def test_entropy_pair_constructor_checks(self):
        pair = EntropyPair.for_alpha(1.0, 2.0)
        assert pair.is_convex()
        assert not EntropyPair(2.0, 1.0).is_convex()


class TestRiemannInvariants:
    def setup_method(self):
        self.spec = RiemannSpec(alpha=1.0, s=-1.0, r=-2.0)

    def test_unit_point(self):
        value, _, _ = riemann_z(self.spec, 1.0, 1.0)
        assert value == pytest.approx(1.0)

    def test_density_scaling(self):
        value, _, _ = riemann_z(self.spec, 1.0, 4.0)
        assert value == pytest.approx(0.5)

    def test_spec_coefficients(self):
        assert self.spec.A == pytest.approx(1 + SQRT3)
        assert self.spec.B == pytest.approx(1 - SQRT3)
        assert self.spec.s1_threshold == pytest.approx(-2 / SQRT3)
        assert self.spec.s_in_s0 and self.spec.r_in_s1

    def test_coefficient_identities(self):
        rng = np.random.default_rng(18)
        for _ in range(50):
            alpha = rng.uniform(0.01, 1.99)
            spec = RiemannSpec(alpha=alpha, s=-1.0, r=-3.0)
            disc = np.sqrt(4 - 2 * alpha + alpha * alpha)
            assert spec.A + spec.B == pytest.approx(2 * (2 - alpha), abs=1e-12)
            assert spec.A - spec.B == pytest.approx(2 * disc, abs=1e-12)
            assert spec.A > 0.0 > spec.B

    def test_annihilation(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            alpha = rng.uniform(0.05, 1.95)
            spec = RiemannSpec(alpha=alpha, s=-1.0, r=-2.5)
            v, m = rng.uniform(0.1, 10.0, 2)
            pair = eigenstructure(v, m, alpha)
            _, grad_z, _ = riemann_z(spec, v, m)
            _, grad_w, _ = riemann_w(spec, v, m)
            # z pairs with the fast-family eigenvector, w with the slow one
            for grad, vec in ((grad_z, pair.r2), (grad_w, pair.r1)):
                dot = abs(float(grad @ vec))
                assert dot <= 1e-10 * np.linalg.norm(grad) * np.linalg.norm(vec)

    def test_gradients_match_fd(self):
        rng = np.random.default_rng(20)
        for _ in range(20):
            v, m = rng.uniform(0.3, 5.0, 2)
            for func in (riemann_z, riemann_w):
                _, grad, hess = func(self.spec, v, m)
                grad_fd, hess_fd = fd_derivatives(
                    lambda vv, mm: func(self.spec, vv, mm)[0], (v, m), FDConfig(h=1e-4)
                )
                assert np.max(np.abs(grad - grad_fd)) <= 1e-6 * np.max(np.abs(grad))
                assert np.max(np.abs(hess - hess_fd)) <= 1e-6 * np.max(np.abs(hess))


class TestConvexityCheck:
    def test_z_in_region_passes(self):
        report = convexity_check("z", -1.0, 1.0, sample_count=1000)
        assert report.min_minor1 >= 0.0
        assert report.min_det >= -1e-20

    def test_w_in_region_passes(self):
        # threshold at alpha=1 is -2/sqrt(3); -2 lies inside S1
        report = convexity_check("w", -2.0, 1.0, sample_count=1000)
        assert report.samples == 1000

    def test_w_outside_region_fails(self):
        with pytest.raises(ConvexityViolationError) as err:
            convexity_check("w", -1.0, 1.0, sample_count=1000)
        assert err.value.det < 0.0

    def test_entropy_in_region_passes(self):
        convexity_check("entropy", 2.0, 1.0, sample_count=500)

    def test_deterministic(self):
        r1 = convexity_check("z", -1.0, 0.7, sample_count=200, seed=5)
        r2 = convexity_check("z", -1.0, 0.7, sample_count=200, seed=5)
        assert r1 == r2


class TestDensityLowerBound:
    def test_reference_case(self):
        spec = RiemannSpec(alpha=1.0, s=-1.0, r=-2.0)
        m_min = density_lower_bound(2.0, spec)
        assert m_min == pytest.approx(2.0 ** (-1.7886751345948129), rel=1e-14)
        assert m_min == pytest.approx(0.2894, abs=5e-5)

    def test_unit_level(self):
        spec = RiemannSpec(alpha=0.4, s=-2.0, r=-4.0)
        assert density_lower_bound(1.0, spec) == 1.0

    def test_out_of_region(self):
        spec = RiemannSpec(alpha=1.0, s=-1.0, r=-1.0)  # -1 > -2/sqrt(3)
        with pytest.raises(SpecOutOfRegionError):
            density_lower_bound(2.0, spec)

    def test_matches_level_set_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            alpha = rng.uniform(0.05, 1.95)
            s = rng.uniform(-3.0, -0.1)
            threshold = RiemannSpec(alpha, -1.0, -1.0).s1_threshold
            r = rng.uniform(1.5 * threshold, 1.01 * threshold)
            M = rng.uniform(0.5, 5.0)
            spec = RiemannSpec(alpha=alpha, s=s, r=r)
            m_closed = density_lower_bound(M, spec)
            _, m_star = level_set_solve(M, spec)
            assert abs(np.log(m_closed) - np.log(m_star)) <= 1e-12

    def test_level_set_round_trip(self):
        spec = RiemannSpec(alpha=1.3, s=-0.8, r=-3.0)
        v_star, m_star = level_set_solve(1.9, spec)
        z, w = riemann_values(spec, v_star, m_star)
        assert abs(z - 1.9) <= 1e-12 * 1.9
        assert abs(w - 1.9) <= 1e-12 * 1.9
