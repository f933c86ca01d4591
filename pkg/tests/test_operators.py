import numpy as np
import pytest

from spdg.linalg import DimensionMismatch
from spdg.operators import (
    AffineOperator,
    BlackBoxOperator,
    ModulusViolated,
    NonpositiveGamma,
    certify_moduli,
)
from util import random_spd_operator


def doubling() -> AffineOperator:
    return AffineOperator(2.0 * np.eye(2), np.zeros(2))


def running_example() -> AffineOperator:
    return AffineOperator(2.0 * np.eye(2), [-2.0, -4.0])


class TestEval:
    def test_linear(self):
        assert np.array_equal(doubling().eval([1.0, 1.0]), [2.0, 2.0])

    def test_with_offset(self):
        assert np.array_equal(running_example().eval([1.0, 0.0]), [0.0, -4.0])

    def test_wrong_length_raises(self):
        with pytest.raises(DimensionMismatch):
            doubling().eval([1.0, 2.0, 3.0])

    def test_moduli_from_spectrum(self):
        op = AffineOperator(np.diag([2.0, 5.0]), np.zeros(2))
        assert op.eta == pytest.approx(2.0, rel=1e-12)
        assert op.L == pytest.approx(5.0, rel=1e-12)

    def test_nonmonotone_matrix_rejected(self):
        from spdg.linalg import NotStronglyMonotone

        with pytest.raises(NotStronglyMonotone):
            AffineOperator([[0.0, -1.0], [1.0, 0.0]], np.zeros(2))


class TestResolvent:
    def test_doubling(self):
        z = doubling().resolvent(1.0, [3.0, 3.0])
        assert np.allclose(z, [1.0, 1.0], rtol=1e-14)

    def test_with_offset(self):
        z = running_example().resolvent(0.5, np.zeros(2))
        assert np.allclose(z, [0.5, 1.0], rtol=1e-14)

    def test_fixed_point_identity(self):
        rng = np.random.default_rng(7)
        op = random_spd_operator(rng, 6)
        z_star = rng.standard_normal(6)
        for gamma in (0.3, 1.0, 4.0):
            w = z_star + gamma * op.eval(z_star)
            assert np.linalg.norm(op.resolvent(gamma, w) - z_star) <= 1e-12 * (
                1.0 + np.linalg.norm(w)
            )

    def test_nonpositive_gamma_raises(self):
        with pytest.raises(NonpositiveGamma):
            doubling().resolvent(0.0, [1.0, 1.0])

    @pytest.mark.parametrize("seed", range(10))
    def test_firm_nonexpansiveness(self, seed):
        rng = np.random.default_rng(seed)
        op = random_spd_operator(rng, 8, skew=0.5)
        w = rng.standard_normal(8)
        w_prime = rng.standard_normal(8)
        for gamma in (0.2, 1.0, 5.0):
            z = op.resolvent(gamma, w)
            z_prime = op.resolvent(gamma, w_prime)
            dz = z - z_prime
            assert dz @ dz <= dz @ (w - w_prime) + 1e-9

    @pytest.mark.parametrize("seed", range(10))
    def test_resolvent_membership(self, seed):
        rng = np.random.default_rng(seed)
        op = random_spd_operator(rng, 8, skew=0.5)
        w = rng.standard_normal(8) * 3.0
        gamma = float(rng.uniform(0.1, 3.0))
        z = op.resolvent(gamma, w)
        assert np.linalg.norm(op.eval(z) - (w - z) / gamma) <= 1e-8 * (1.0 + np.linalg.norm(w))

    def test_residual_contract(self):
        rng = np.random.default_rng(11)
        op = random_spd_operator(rng, 30, skew=0.4)
        w = rng.standard_normal(30)
        gamma = 0.7
        z = op.resolvent(gamma, w)
        lhs = (gamma * op.M + np.eye(30)) @ z - (w - gamma * op.b)
        assert np.linalg.norm(lhs) <= 1e-10 * (1.0 + np.linalg.norm(w))


class TestScale:
    def test_identity_scale(self):
        op = running_example()
        scaled = op.scale(1.0)
        assert np.array_equal(scaled.M, op.M)
        assert np.array_equal(scaled.b, op.b)
        assert scaled.eta == op.eta and scaled.L == op.L

    def test_halving(self):
        op = running_example()
        scaled = op.scale(0.5)
        assert np.array_equal(scaled.M, np.eye(2))
        assert np.array_equal(scaled.b, [-1.0, -2.0])
        assert scaled.eta == pytest.approx(op.eta / 2.0)
        assert scaled.L == pytest.approx(op.L / 2.0)

    def test_scaling_to_unit_lipschitz(self):
        op = AffineOperator(np.diag([9.0, 57.0]), np.zeros(2))
        scaled = op.scale(1.0 / 57.0)
        assert scaled.eta == pytest.approx(9.0 / 57.0, rel=1e-12)
        assert scaled.L == pytest.approx(1.0, rel=1e-12)

    def test_nonpositive_gamma_raises(self):
        with pytest.raises(NonpositiveGamma):
            running_example().scale(-1.0)

    def test_scale_then_unit_resolvent_matches_scaled_resolvent(self):
        rng = np.random.default_rng(5)
        op = random_spd_operator(rng, 12, skew=0.3)
        w = rng.standard_normal(12)
        for gamma in (0.25, 1.5):
            direct = op.resolvent(gamma, w)
            via_scale = op.scale(gamma).resolvent(1.0, w)
            assert np.linalg.norm(direct - via_scale) <= 1e-10


class TestBlackBox:
    def make_pair(self, rng):
        op = random_spd_operator(rng, 6, skew=0.2)
        box = BlackBoxOperator(6, op.eval, op.resolvent, eta=op.eta, L=op.L)
        return op, box

    def test_matches_wrapped_affine(self):
        rng = np.random.default_rng(2)
        op, box = self.make_pair(rng)
        z = rng.standard_normal(6)
        assert np.array_equal(box.eval(z), op.eval(z))
        assert np.array_equal(box.resolvent(0.8, z), op.resolvent(0.8, z))

    def test_scale_folds_into_resolvent_parameter(self):
        rng = np.random.default_rng(3)
        op, box = self.make_pair(rng)
        w = rng.standard_normal(6)
        scaled_box = box.scale(0.5)
        assert np.allclose(scaled_box.eval(w), 0.5 * op.eval(w), rtol=1e-15)
        assert np.allclose(scaled_box.resolvent(2.0, w), op.resolvent(1.0, w), rtol=1e-12)

    def test_invalid_moduli_rejected(self):
        with pytest.raises(ValueError):
            BlackBoxOperator(2, lambda z: z, lambda g, w: w, eta=2.0, L=1.0)


class TestCertifyModuli:
    def test_correct_declaration_passes(self):
        op = AffineOperator(np.diag([2.0, 5.0]), np.zeros(2))
        report = certify_moduli(op, 1000, seed=0)
        assert report.worst_monotonicity_slack >= -1e-8
        assert report.worst_lipschitz_slack >= -1e-8

    def test_overstated_eta_is_caught(self):
        M = np.diag([2.0, 5.0])
        box = BlackBoxOperator(2, lambda z: M @ z, lambda g, w: w / (1.0 + g), eta=3.0, L=5.0)
        with pytest.raises(ModulusViolated):
            certify_moduli(box, 1000, seed=0)

    def test_understated_lipschitz_is_caught(self):
        M = np.diag([2.0, 5.0])
        box = BlackBoxOperator(2, lambda z: M @ z, lambda g, w: w / (1.0 + g), eta=2.0, L=4.0)
        with pytest.raises(ModulusViolated):
            certify_moduli(box, 1000, seed=0)

    def test_consistent_with_spectral_example(self):
        op = AffineOperator([[2.0, 1.0], [0.0, 2.0]], np.zeros(2))
        assert op.eta == pytest.approx(1.5, rel=1e-8)
        assert op.L == pytest.approx(2.5616, rel=1e-4)
        certify_moduli(op, 1000, seed=1)
