import numpy as np
import pytest

from spdg.linalg import OrthoSubspace
from spdg.operators import AffineOperator, BlackBoxOperator
from spdg.partial_inverse import (
    InvalidModuli,
    PartialInverse,
    PropositionViolated,
    modulus,
)
from util import random_spd_operator, random_subspace


def doubling() -> AffineOperator:
    return AffineOperator(2.0 * np.eye(2), np.zeros(2))


def axis_subspace() -> OrthoSubspace:
    return OrthoSubspace([[1.0], [0.0]])


class TestModulus:
    def test_balanced(self):
        assert modulus(1.0, 1.0) == pytest.approx(0.5)

    def test_ill_conditioned_reference_constants(self):
        assert modulus(9.0, 57.0) == pytest.approx(9.0 / 3250.0, rel=1e-15)

    def test_bound_is_valid_but_not_tight_for_the_axis_example(self):
        # hand-computed partial inverse diag(2, 1/2) has modulus 1/2 >= 2/5
        pi = PartialInverse(doubling(), axis_subspace())
        assert pi.mu == pytest.approx(0.4)
        report = pi.check_strong_monotonicity(1000, seed=0)
        assert report.worst_ratio >= 0.5 - 1e-9

    def test_invalid_moduli(self):
        with pytest.raises(InvalidModuli):
            modulus(0.0, 1.0)
        with pytest.raises(InvalidModuli):
            modulus(2.0, 1.0)


class TestEval:
    def test_full_subspace_is_the_operator(self):
        pi = PartialInverse(doubling(), OrthoSubspace.full(2))
        assert np.allclose(pi.eval([1.0, 1.0]), [2.0, 2.0], rtol=1e-14)

    def test_zero_subspace_is_the_inverse(self):
        pi = PartialInverse(doubling(), OrthoSubspace.zero(2))
        assert np.allclose(pi.eval([2.0, 2.0]), [1.0, 1.0], rtol=1e-14)

    def test_axis_subspace_closed_form(self):
        pi = PartialInverse(doubling(), axis_subspace())
        assert np.allclose(pi.eval([1.0, 2.0]), [2.0, 1.0], rtol=1e-14)

    def test_black_box_eval_unsupported(self):
        box = BlackBoxOperator(2, lambda z: 2.0 * z, lambda g, w: w / (1.0 + 2.0 * g), 2.0, 2.0)
        pi = PartialInverse(box, axis_subspace())
        with pytest.raises(TypeError):
            pi.eval([1.0, 2.0])

    @pytest.mark.parametrize("seed", range(15))
    def test_graph_membership(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 40))
        d = int(rng.integers(0, n + 1))
        op = random_spd_operator(rng, n, skew=0.3)
        pi = PartialInverse(op, random_subspace(rng, n, d))
        z = rng.standard_normal(n) * 3.0
        assert pi.graph_gap(z, pi.eval(z)) <= 1e-9 * (1.0 + np.linalg.norm(z))

    @pytest.mark.parametrize("seed", range(10))
    def test_involution(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(2, 25))
        d = int(rng.integers(0, n + 1))
        op = random_spd_operator(rng, n, skew=0.2)
        V = random_subspace(rng, n, d)
        rebuilt = PartialInverse(PartialInverse(op, V).as_affine_operator(), V)
        z = rng.standard_normal(n)
        assert np.linalg.norm(rebuilt.eval(z) - op.eval(z)) <= 1e-8 * (1.0 + np.linalg.norm(z))


class TestResolvent:
    def test_componentwise_example(self):
        pi = PartialInverse(doubling(), axis_subspace())
        assert np.allclose(pi.resolvent(1.0, [3.0, 3.0]), [1.0, 2.0], rtol=1e-14)

    def test_zero_fixed_point(self):
        pi = PartialInverse(doubling(), axis_subspace())
        assert np.allclose(pi.resolvent(1.0, np.zeros(2)), np.zeros(2), atol=1e-15)

    def test_full_subspace_matches_operator_resolvent(self):
        rng = np.random.default_rng(4)
        op = random_spd_operator(rng, 9, skew=0.3)
        pi = PartialInverse(op, OrthoSubspace.full(9))
        w = rng.standard_normal(9)
        assert np.linalg.norm(pi.resolvent(1.0, w) - op.resolvent(1.0, w)) <= 1e-10

    @pytest.mark.parametrize("seed", range(100))
    def test_direct_and_splitting_routes_agree(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        d = int(rng.integers(0, n + 1))
        op = random_spd_operator(rng, n, skew=0.4)
        pi = PartialInverse(op, random_subspace(rng, n, d))
        w = rng.standard_normal(n) * 2.0
        assert np.linalg.norm(pi.resolvent(1.0, w) - pi.resolvent_step(w)) <= 1e-8

    def test_splitting_route_for_black_box(self):
        rng = np.random.default_rng(9)
        op = random_spd_operator(rng, 7, skew=0.2)
        box = BlackBoxOperator(7, op.eval, op.resolvent, eta=op.eta, L=op.L)
        V = random_subspace(rng, 7, 3)
        w = rng.standard_normal(7)
        got = PartialInverse(box, V).resolvent(1.0, w)
        want = PartialInverse(op, V).resolvent(1.0, w)
        assert np.linalg.norm(got - want) <= 1e-8

    def test_black_box_rejects_other_gammas(self):
        box = BlackBoxOperator(2, lambda z: 2.0 * z, lambda g, w: w / (1.0 + 2.0 * g), 2.0, 2.0)
        pi = PartialInverse(box, axis_subspace())
        with pytest.raises(ValueError):
            pi.resolvent(0.5, [1.0, 1.0])

    def test_general_gamma_direct_solve(self):
        # resolvent of the hand-computed diag(2, 1/2) partial inverse at gamma = 2
        pi = PartialInverse(doubling(), axis_subspace())
        got = pi.resolvent(2.0, [5.0, 4.0])
        assert np.allclose(got, [1.0, 2.0], rtol=1e-14)


class TestStrongMonotonicity:
    def test_full_subspace_ratio_at_least_eta(self):
        rng = np.random.default_rng(1)
        op = random_spd_operator(rng, 10)
        pi = PartialInverse(op, OrthoSubspace.full(10))
        report = pi.check_strong_monotonicity(1000, seed=0)
        assert report.worst_ratio >= op.eta - 1e-9

    @pytest.mark.parametrize("seed", range(25))
    def test_random_problems_satisfy_the_modulus(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 40))
        d = int(rng.integers(0, n + 1))
        op = random_spd_operator(rng, n, skew=0.5)
        pi = PartialInverse(op, random_subspace(rng, n, d))
        report = pi.check_strong_monotonicity(1000, seed=seed)
        assert report.worst_slack >= -1e-9
        assert report.worst_ratio >= pi.mu - 1e-6

    def test_violation_detection_on_a_rigged_modulus(self):
        pi = PartialInverse(doubling(), axis_subspace())
        pi.mu = 0.75  # above the true 0.5
        with pytest.raises(PropositionViolated):
            pi.check_strong_monotonicity(1000, seed=0)

    def test_scaled_moduli_flow_through(self):
        op = AffineOperator(np.diag([9.0, 57.0]), np.zeros(2))
        gamma = 1.0 / 57.0
        pi = PartialInverse(op.scale(gamma), axis_subspace())
        assert pi.mu == pytest.approx(modulus(gamma * 9.0, gamma * 57.0), rel=1e-15)
