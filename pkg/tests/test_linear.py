import numpy as np
import pytest

from fairsvm.ccp import CcpConfig, covariance_penalty, linearized_pair
from fairsvm.constraints import covariance_gap, mean_difference
from fairsvm.data import SyntheticConfig, synthesize
from fairsvm.exceptions import DegenerateGroupError, DegenerateLabelError, InputError, TrainingError
from fairsvm.linear import (
    LinearModel,
    decision_values,
    hinge_objective,
    train_lsvm,
    train_ssvm,
    train_zsvm,
)
from fairsvm.metrics import dp_delta

from oracles import svm_1d_grid


@pytest.fixture(scope="module")
def synthetic():
    return synthesize(SyntheticConfig(seed=0))


class TestLSVM:
    def test_two_point(self):
        model = train_lsvm([[1.0], [-1.0]], [1, -1], 1.0)
        w_ref, b_ref, obj_ref = svm_1d_grid([1.0, -1.0], [1, -1], 1.0)
        assert (w_ref, b_ref) == pytest.approx((1.0, 0.0), abs=1e-6)
        # degenerate optimum: the solver pins it to ~sqrt(tol)
        np.testing.assert_allclose([model.w[0], model.b], [w_ref, b_ref], atol=1e-4)
        assert model.objective == pytest.approx(obj_ref, abs=1e-6)

    @pytest.mark.parametrize("seed", range(4))
    def test_grid_oracle(self, seed):
        rng = np.random.default_rng(seed)
        xs = rng.standard_normal(12)
        ys = np.where(xs + 0.8 * rng.standard_normal(12) > 0, 1.0, -1.0)
        ys[:2] = [1.0, -1.0]
        model = train_lsvm(xs[:, None], ys, 0.5)
        w_ref, b_ref, obj_ref = svm_1d_grid(xs, ys, 0.5)
        assert model.objective <= obj_ref + 1e-8
        assert model.objective == pytest.approx(obj_ref, abs=1e-6)
        np.testing.assert_allclose([model.w[0], model.b], [w_ref, b_ref], atol=1e-3)

    def test_replication(self, synthetic):
        X, y = synthetic.X, synthetic.y
        base = train_lsvm(X, y, 1.0)
        doubled = train_lsvm(np.vstack([X, X]), np.concatenate([y, y]), 2.0)
        np.testing.assert_allclose(doubled.w, base.w, atol=1e-6)
        assert doubled.b == pytest.approx(base.b, abs=1e-6)

    def test_heavy_regularization(self, synthetic):
        X, y = synthetic.X, synthetic.y
        model = train_lsvm(X, y, 1e6)
        assert np.linalg.norm(model.w) < 1e-4
        majority = 1.0 if (y > 0).sum() >= (y < 0).sum() else -1.0
        assert np.all(np.sign(decision_values(model, X)) == majority)

    def test_hinge_feasibility(self, synthetic):
        X, y = synthetic.X, synthetic.y
        model = train_lsvm(X, y, 1.0)
        assert model.objective == pytest.approx(hinge_objective(X, y, model.w, model.b, 1.0))

    def test_single_label(self):
        with pytest.raises(DegenerateLabelError):
            train_lsvm(np.ones((4, 2)), [1, 1, 1, 1], 1.0)

    def test_bad_lambda(self):
        with pytest.raises(InputError):
            train_lsvm([[1.0], [-1.0]], [1, -1], 0.0)


class TestZSVM:
    def test_d_zero(self, synthetic):
        ds = synthetic
        model = train_zsvm(ds.X, ds.y, ds.z, 1.0, 0.0)
        assert abs(mean_difference(ds.X, ds.z) @ model.w) <= 1e-7

    @pytest.mark.parametrize("d", [0.01, 0.075, 0.3])
    def test_bound_respected(self, synthetic, d):
        ds = synthetic
        model = train_zsvm(ds.X, ds.y, ds.z, 1.0, d)
        assert abs(mean_difference(ds.X, ds.z) @ model.w) <= d + 1e-7

    def test_huge_d_matches_lsvm(self, synthetic):
        ds = synthetic
        z_model = train_zsvm(ds.X, ds.y, ds.z, 1.0, 1e9)
        l_model = train_lsvm(ds.X, ds.y, 1.0)
        np.testing.assert_allclose(z_model.w, l_model.w, atol=1e-6)
        assert z_model.b == pytest.approx(l_model.b, abs=1e-6)

    def test_fairer_than_lsvm(self, synthetic):
        ds = synthetic
        lsvm = decision_values(train_lsvm(ds.X, ds.y, 1.0), ds.X)
        zsvm = decision_values(train_zsvm(ds.X, ds.y, ds.z, 1.0, 0.075), ds.X)
        assert dp_delta(zsvm, ds.z) <= dp_delta(lsvm, ds.z)

    def test_single_group(self):
        X = np.random.default_rng(0).standard_normal((6, 2))
        with pytest.raises(DegenerateGroupError):
            train_zsvm(X, [1, -1, 1, -1, 1, -1], [1] * 6, 1.0, 0.1)


class TestSSVM:
    def test_mu_zero_equals_zsvm(self, synthetic):
        ds = synthetic
        s = train_ssvm(ds.X, ds.y, ds.z, 1.0, 0.05, CcpConfig(mu=0.0))
        z = train_zsvm(ds.X, ds.y, ds.z, 1.0, 0.05)
        np.testing.assert_allclose(s.w, z.w, atol=1e-6)
        assert s.b == pytest.approx(z.b, abs=1e-6)

    @pytest.mark.parametrize("mu", [0.1, 1.0, 10.0])
    def test_monotone_history(self, synthetic, mu):
        ds = synthetic
        model = train_ssvm(ds.X, ds.y, ds.z, 1.0, 0.075, CcpConfig(mu=mu))
        hist = np.array(model.objective_history)
        assert len(hist) == model.iterations + 1
        assert np.all(np.diff(hist) <= 1e-8)
        assert abs(mean_difference(ds.X, ds.z) @ model.w) <= 0.075 + 1e-7

    def test_penalty_shrinks(self, synthetic):
        ds = synthetic
        split = covariance_gap(ds.X, ds.z).split
        z = train_zsvm(ds.X, ds.y, ds.z, 1.0, 0.075)
        s = train_ssvm(ds.X, ds.y, ds.z, 1.0, 0.075, CcpConfig(mu=10.0))
        assert covariance_penalty(split, s.w) <= covariance_penalty(split, z.w)

    def test_zero_gap_converges_immediately(self):
        rng = np.random.default_rng(7)
        rows = rng.standard_normal((20, 2))
        X = np.vstack([rows + [0.5, 0.0], -rows])
        y = np.where(X[:, 0] + 0.3 * rng.standard_normal(40) > 0, 1.0, -1.0)
        z = np.array([1.0] * 20 + [-1.0] * 20)
        split = covariance_gap(X, z).split
        model = train_ssvm(X, y, z, 1.0, 0.05, CcpConfig(mu=10.0))
        assert model.iterations == 1
        assert covariance_penalty(split, model.w) <= 1e-8

    def test_majorization_exact_at_iterate(self, synthetic):
        ds = synthetic
        gap = covariance_gap(ds.X, ds.z)
        split = gap.split
        rng = np.random.default_rng(8)
        for _ in range(20):
            wk = rng.standard_normal(ds.p)
            (Q1, c1, r1), (Q2, c2, r2) = linearized_pair(split.u_plus, split.u_minus, wk)
            true = wk @ gap.gap @ wk
            assert wk @ Q1 @ wk + c1 @ wk - r1 == pytest.approx(true, abs=1e-8)
            assert wk @ Q2 @ wk + c2 @ wk - r2 == pytest.approx(-true, abs=1e-8)
            # and they majorize everywhere
            v = rng.standard_normal(ds.p)
            assert v @ Q1 @ v + c1 @ v - r1 >= v @ gap.gap @ v - 1e-8
            assert v @ Q2 @ v + c2 @ v - r2 >= -(v @ gap.gap @ v) - 1e-8

    def test_solver_failure_carries_iteration(self, synthetic):
        ds = synthetic
        with pytest.raises(TrainingError) as info:
            train_ssvm(ds.X, ds.y, ds.z, 1.0, 0.05, CcpConfig(mu=1.0, inner_max_iter=1))
        assert info.value.iteration == 0

    def test_bad_config(self):
        with pytest.raises(InputError):
            CcpConfig(mu=-1.0)
        with pytest.raises(InputError):
            CcpConfig(max_outer_iterations=0)
        with pytest.raises(InputError):
            CcpConfig(objective_change_tolerance=0.0)


class TestDecisionValues:
    def test_constant(self):
        model = LinearModel(np.zeros(2), 0.5, 1.0)
        np.testing.assert_array_equal(decision_values(model, np.ones((3, 2))), [0.5, 0.5, 0.5])

    def test_separable(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((30, 2))
        y = np.where(X @ [1.0, -2.0] > 0, 1.0, -1.0)
        X += 0.5 * y[:, None] * np.array([1.0, -2.0]) / np.sqrt(5)
        model = train_lsvm(X, y, 0.01)
        np.testing.assert_array_equal(np.sign(decision_values(model, X)), y)

    def test_translation(self):
        X = np.random.default_rng(10).standard_normal((5, 2))
        m1 = LinearModel(np.array([1.0, 2.0]), 0.0, 1.0)
        m2 = LinearModel(np.array([1.0, 2.0]), 3.0, 1.0)
        np.testing.assert_allclose(decision_values(m2, X) - decision_values(m1, X), 3.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            decision_values(LinearModel(np.zeros(2), 0.0, 1.0), np.ones((3, 3)))
