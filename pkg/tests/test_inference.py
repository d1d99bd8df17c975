"""Belief propagation tests: exact moments, walk-summability, tree
exactness, and divergence handling on frustrated models."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import covdecomp as cd
from covdecomp import InfoModel, NonPositiveDiagonal, NotPositiveDefinite
from oracles import dense_moments, random_tree_info


def frustrated_model(p=4, coupling=0.6):
    j = np.eye(p) + coupling * (np.ones((p, p)) - np.eye(p))
    return InfoModel(j, np.ones(p))


class TestInfoModel:
    def test_valid_construction(self):
        m = InfoModel(np.eye(3), np.arange(3.0))
        assert m.dim == 3
        assert np.array_equal(np.asarray(m.h), [0.0, 1.0, 2.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            InfoModel(np.eye(3), np.zeros(2))

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            InfoModel(np.diag([1.0, -1.0]), np.zeros(2))

    def test_inputs_copied(self):
        h = np.zeros(2)
        m = InfoModel(np.eye(2), h)
        h[0] = 99.0
        assert m.h[0] == 0.0


class TestExactMoments:
    def test_identity_precision(self):
        mean, var = cd.exact_moments(InfoModel(np.eye(2), np.array([1.0, 2.0])))
        assert np.allclose(mean, [1.0, 2.0])
        assert np.allclose(var, [1.0, 1.0])

    def test_scalar_case(self):
        mean, var = cd.exact_moments(InfoModel(np.array([[2.0]]), np.array([4.0])))
        assert mean[0] == pytest.approx(2.0)
        assert var[0] == pytest.approx(0.5)

    def test_chain_against_dense_solve(self):
        j = np.eye(4)
        for i in range(3):
            j[i, i + 1] = j[i + 1, i] = -0.3
        h = np.array([1.0, -2.0, 0.5, 0.0])
        mean, var = cd.exact_moments(InfoModel(j, h))
        ref_mean, ref_var = dense_moments(j, h)
        assert np.allclose(mean, ref_mean, atol=1e-12)
        assert np.allclose(var, ref_var, atol=1e-12)


class TestWalkSummability:
    def test_diagonal_model_is_zero(self):
        assert cd.walk_summability(np.diag([2.0, 3.0, 4.0])) == 0.0

    def test_single_pair_value(self):
        j = np.array([[1.0, 0.5], [0.5, 1.0]])
        assert cd.walk_summability(j) == pytest.approx(0.5)

    def test_sign_of_coupling_irrelevant(self):
        j = np.array([[1.0, 0.5], [0.5, 1.0]])
        j_neg = np.array([[1.0, -0.5], [-0.5, 1.0]])
        assert cd.walk_summability(j) == pytest.approx(cd.walk_summability(j_neg))

    def test_nonpositive_diagonal_rejected(self):
        with pytest.raises(NonPositiveDiagonal):
            cd.walk_summability(np.diag([1.0, 0.0]))

    @settings(max_examples=25, deadline=None)
    @given(
        scales=st.lists(
            st.floats(min_value=0.1, max_value=10.0), min_size=3, max_size=3
        )
    )
    def test_invariant_under_diagonal_rescaling(self, scales):
        j = np.eye(3)
        j[0, 1] = j[1, 0] = 0.4
        j[1, 2] = j[2, 1] = -0.3
        d = np.diag(scales)
        base = cd.walk_summability(j)
        assert cd.walk_summability(d @ j @ d) == pytest.approx(base, rel=1e-9)


class TestLbpOnTrees:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_exact_after_at_most_p_iterations(self, seed):
        j, h = random_tree_info(p=12, seed=seed)
        m = InfoModel(j, h)
        trace = cd.lbp_run(m, max_iter=12, tol=1e-12)
        assert trace.mean_errors[-1] < 1e-8
        assert trace.var_errors[-1] < 1e-8

    def test_converged_flag_and_trace_lengths(self):
        j, h = random_tree_info(p=8, seed=7)
        trace = cd.lbp_run(InfoModel(j, h), max_iter=100, tol=1e-12)
        assert trace.converged
        assert len(trace.mean_errors) == trace.iterations_run
        assert len(trace.var_errors) == trace.iterations_run
        assert trace.iterations_run <= 100

    def test_diagonal_model_converges_immediately(self):
        m = InfoModel(np.diag([2.0, 3.0]), np.array([2.0, 3.0]))
        trace = cd.lbp_run(m, max_iter=10, tol=1e-12)
        assert trace.converged
        assert trace.iterations_run == 1
        assert trace.mean_errors[0] == 0.0
        assert trace.var_errors[0] == 0.0


class TestLbpOnLoopyModels:
    def test_walk_summable_loop_converges(self):
        # 4-cycle with weak couplings: ws < 1 certifies convergence
        j = np.eye(4)
        for i in range(4):
            k = (i + 1) % 4
            j[i, k] = j[k, i] = 0.2
        m = InfoModel(j, np.ones(4))
        assert cd.walk_summability(j) < 1.0
        trace = cd.lbp_run(m, max_iter=1000, tol=1e-10)
        assert trace.converged
        assert trace.mean_errors[-1] < 1e-6

    def test_frustrated_model_diverges(self):
        m = frustrated_model()
        assert cd.walk_summability(np.asarray(m.j)) > 1.5
        trace = cd.lbp_run(m, max_iter=1000, tol=1e-10)
        assert not trace.converged
        assert trace.iterations_run < 1000

    def test_damping_changes_trajectory_not_fixed_point(self):
        j = np.eye(4)
        for i in range(4):
            k = (i + 1) % 4
            j[i, k] = j[k, i] = 0.2
        m = InfoModel(j, np.ones(4))
        plain = cd.lbp_run(m, max_iter=2000, tol=1e-12)
        damped = cd.lbp_run(m, max_iter=2000, tol=1e-12, damping=0.5)
        assert plain.converged and damped.converged
        assert damped.iterations_run != plain.iterations_run
        assert abs(plain.mean_errors[-1] - damped.mean_errors[-1]) < 1e-9


class TestLbpValidation:
    def test_max_iter_must_be_positive(self):
        with pytest.raises(ValueError, match="max_iter"):
            cd.lbp_run(InfoModel(np.eye(2), np.zeros(2)), max_iter=0, tol=1e-8)

    @pytest.mark.parametrize("damping", [-0.1, 1.0, 1.5])
    def test_damping_range(self, damping):
        with pytest.raises(ValueError, match="damping"):
            cd.lbp_run(
                InfoModel(np.eye(2), np.zeros(2)),
                max_iter=10,
                tol=1e-8,
                damping=damping,
            )
