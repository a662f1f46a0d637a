import numpy as np
import pytest

from iterreg import (
    BlockBias,
    ContractViolation,
    Grad2D,
    MaskOperator,
    add_noise,
    certify,
    gen_matcomp,
    gen_sparse,
    load_problem,
    make_config,
    save_problem,
    tv_reformulate,
)


class TestGenSparse:
    def test_shapes_and_invariants(self):
        prob = gen_sparse(n=30, p=60, s=5, corr=0.2, y_norm=7.0, seed=3)
        assert prob.X.out_dim == 30 and prob.X.in_dim == 60
        assert np.linalg.norm(prob.y) == pytest.approx(7.0, rel=1e-12)
        assert np.count_nonzero(prob.ground_truth) == 5
        nz = prob.ground_truth[prob.ground_truth != 0]
        assert np.allclose(nz, nz[0])  # equal-valued entries
        assert np.linalg.norm(prob.X.apply(prob.ground_truth) - prob.y) <= 1e-10 * 7.0

    def test_deterministic_in_seed(self):
        a = gen_sparse(n=10, p=20, s=3, seed=5)
        b = gen_sparse(n=10, p=20, s=3, seed=5)
        assert np.array_equal(a.X.matrix, b.X.matrix)
        assert np.array_equal(a.y, b.y)
        c = gen_sparse(n=10, p=20, s=3, seed=6)
        assert not np.array_equal(a.y, c.y)

    def test_zero_sparsity(self):
        prob = gen_sparse(n=5, p=10, s=0, seed=0)
        assert np.array_equal(prob.y, np.zeros(5))
        assert np.array_equal(prob.ground_truth, np.zeros(10))

    def test_uncorrelated_columns_have_identity_covariance(self):
        # 5000 rows stacked from independent instances; max-entry tolerance 0.1
        blocks = [gen_sparse(n=100, p=100, s=0, corr=0.0, seed=s).X.matrix
                  for s in range(50)]
        X = np.vstack(blocks)
        cov = X.T @ X / X.shape[0]
        assert np.max(np.abs(cov - np.eye(100))) < 0.1

    def test_param_validation(self):
        with pytest.raises(ContractViolation):
            gen_sparse(n=10, p=5, s=2)
        with pytest.raises(ContractViolation):
            gen_sparse(n=5, p=10, s=2, corr=1.0)


class TestGenMatcomp:
    def test_rank_and_norm(self):
        prob = gen_matcomp(d=12, r=3, obs_frac_denom=4, y_norm=9.0, seed=2)
        Y = prob.ground_truth.reshape(12, 12)
        assert np.linalg.norm(Y) == pytest.approx(9.0, rel=1e-12)
        svals = np.linalg.svd(Y, compute_uv=False)
        assert np.sum(svals > 1e-9 * svals[0]) == 3
        assert isinstance(prob.X, MaskOperator)
        assert len(prob.X.observed) == (12 * 12) // 4
        assert np.linalg.norm(prob.X.apply(prob.ground_truth) - prob.y) <= 1e-12

    def test_fully_observed_full_rank_recovers_target(self):
        prob = gen_matcomp(d=4, r=4, obs_frac_denom=1, y_norm=3.0, seed=1)
        assert len(prob.X.observed) == 16
        from iterreg import Nuclear

        cert = certify(prob.X, Nuclear(4, 4), prob.y,
                       cfg=make_config(prob.X, max_iter=200_000), check_every=50)
        assert np.allclose(cert.w_star, prob.ground_truth, atol=1e-6)

    def test_deterministic(self):
        a = gen_matcomp(d=6, r=2, seed=4)
        b = gen_matcomp(d=6, r=2, seed=4)
        assert np.array_equal(a.y, b.y)
        assert a.X.observed == b.X.observed


class TestAddNoise:
    def test_exact_norm(self):
        prob = gen_sparse(n=20, p=40, s=4, seed=0)
        for delta in (0.3, 2.0, 11.0):
            noisy = add_noise(prob, delta, seed=9)
            assert np.linalg.norm(noisy.y - noisy.y_delta) == pytest.approx(delta, rel=1e-10)
            assert noisy.delta == delta

    def test_zero_delta(self):
        prob = gen_sparse(n=20, p=40, s=4, seed=0)
        noisy = add_noise(prob, 0.0, seed=9)
        assert np.array_equal(noisy.y_delta, prob.y)

    def test_different_seeds_equidistant(self):
        prob = gen_sparse(n=20, p=40, s=4, seed=0)
        a = add_noise(prob, 1.5, seed=1)
        b = add_noise(prob, 1.5, seed=2)
        assert not np.array_equal(a.y_delta, b.y_delta)
        assert np.linalg.norm(a.y_delta - prob.y) == pytest.approx(
            np.linalg.norm(b.y_delta - prob.y), rel=1e-12)

    def test_support_restriction(self):
        prob = gen_matcomp(d=6, r=2, obs_frac_denom=3, seed=0)
        noisy = add_noise(prob, 2.0, seed=3, support=prob.X.gain)
        diff = noisy.y_delta - prob.y
        assert np.linalg.norm(diff) == pytest.approx(2.0, rel=1e-10)
        assert np.all(diff[prob.X.gain == 0.0] == 0.0)

    def test_negative_delta_rejected(self):
        prob = gen_sparse(n=5, p=10, s=1, seed=0)
        with pytest.raises(ContractViolation):
            add_noise(prob, -1.0, seed=0)


class TestTvReformulate:
    def test_shapes_and_data_layout(self):
        mask = MaskOperator((3, 3), [(0, 0), (1, 1)])
        y = mask.apply(np.arange(9.0))
        lifted, bias, y_lifted = tv_reformulate(mask, y, 3, 3)
        assert lifted.in_dim == 9 + 18
        assert lifted.out_dim == 9 + 18
        assert isinstance(bias, BlockBias)
        assert np.array_equal(y_lifted[:9], y)
        assert np.array_equal(y_lifted[9:], np.zeros(18))

    def test_adjoint_consistency_inherited(self):
        mask = MaskOperator((3, 3), [(0, 0), (2, 2)])
        lifted, _, _ = tv_reformulate(mask, mask.apply(np.ones(9)), 3, 3)
        rng = np.random.default_rng(0)
        for _ in range(20):
            w = rng.standard_normal(lifted.in_dim)
            th = rng.standard_normal(lifted.out_dim)
            assert abs(lifted.apply(w) @ th - w @ lifted.adjoint(th)) <= 1e-10 * (
                1 + np.linalg.norm(w) * np.linalg.norm(th))

    def test_constant_image_fully_observed(self):
        from iterreg import identity

        image = np.full(9, 2.5)
        X = identity(9)
        lifted, bias, y_lifted = tv_reformulate(X, image.copy(), 3, 3)
        cert = certify(lifted, bias, y_lifted,
                       cfg=make_config(lifted, max_iter=200_000), check_every=50)
        assert np.allclose(cert.w_star[:9], image, atol=1e-7)
        assert np.allclose(cert.w_star[9:], 0.0, atol=1e-7)

    def test_piecewise_constant_inpainting(self):
        p1 = p2 = 4
        image = np.zeros((p1, p2))
        image[:2, :] = 1.0
        rng = np.random.default_rng(13)
        flat = rng.choice(16, size=11, replace=False)
        mask = MaskOperator((p1, p2), [(int(f) // p2, int(f) % p2) for f in flat])
        y = mask.apply(image.ravel())
        lifted, bias, y_lifted = tv_reformulate(mask, y, p1, p2)
        cert = certify(lifted, bias, y_lifted,
                       cfg=make_config(lifted, max_iter=400_000),
                       feas_tol=1e-9, subgrad_tol=1e-7, check_every=100)
        w_img = cert.w_star[:16]
        u = cert.w_star[16:]
        assert np.linalg.norm(Grad2D(p1, p2).apply(w_img) - u) <= 1e-8

    def test_dimension_validation(self):
        mask = MaskOperator((2, 2), [(0, 0)])
        with pytest.raises(ContractViolation):
            tv_reformulate(mask, np.zeros(4), 3, 3)


class TestSerialization:
    def test_dense_round_trip(self, tmp_path):
        prob = add_noise(gen_sparse(n=8, p=12, s=2, seed=7), 0.5, seed=1)
        save_problem(prob, tmp_path / "prob")
        back = load_problem(tmp_path / "prob")
        assert back.kind == "sparse"
        assert np.allclose(back.X.matrix, prob.X.matrix)
        assert np.allclose(back.y, prob.y)
        assert np.allclose(back.y_delta, prob.y_delta)
        assert back.delta == prob.delta
        assert np.allclose(back.ground_truth, prob.ground_truth)

    def test_mask_round_trip(self, tmp_path):
        prob = gen_matcomp(d=5, r=2, obs_frac_denom=2, seed=3)
        save_problem(prob, tmp_path / "mc")
        back = load_problem(tmp_path / "mc")
        assert isinstance(back.X, MaskOperator)
        assert back.X.observed == prob.X.observed
        assert np.allclose(back.y, prob.y)
