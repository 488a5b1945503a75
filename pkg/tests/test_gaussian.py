import numpy as np
import pytest

from usui.gaussian import (
    GaussianState,
    SqueezeOp,
    apply_loss,
    complex_to_quadrature_transform,
    displace,
    load_state,
    partial_trace,
    quadrature_covariance,
    save_state,
    squeeze_matrix,
    state_from_dict,
    state_to_dict,
    symplectic_form,
    two_mode_squeeze,
    vacuum_state,
    validate,
)

SQ2 = np.sqrt(2.0)


def random_physical_state(rng, n_modes=4, n_ops=6):
    """Random mixed Gaussian state from squeezes, displacements and loss."""
    state = vacuum_state(n_modes)
    for _ in range(n_ops):
        p, q = rng.choice(n_modes, size=2, replace=False)
        mu = 1.0 + 1.5 * rng.random()
        op = SqueezeOp(int(p), int(q), mu, np.sqrt(mu**2 - 1.0),
                       2 * np.pi * rng.random())
        state = two_mode_squeeze(state, op)
    state = displace(state, int(rng.integers(n_modes)),
                     rng.normal() + 1j * rng.normal())
    state = apply_loss(state, int(rng.integers(n_modes)), rng.random())
    return state


class TestVacuum:
    def test_two_mode_vacuum(self):
        state = vacuum_state(2)
        assert np.array_equal(state.A, np.eye(2))
        assert np.array_equal(state.B, np.zeros((2, 2)))
        assert np.array_equal(state.d, np.zeros(2))

    def test_identity_structure(self):
        state = vacuum_state(10)
        assert state.A[2, 2] == 1.0
        assert state.A[2, 4] == 0.0

    def test_vacuum_is_physical(self):
        assert validate(vacuum_state(3)).passed(tol=1e-12)

    def test_rejects_zero_modes(self):
        with pytest.raises(ValueError):
            vacuum_state(0)


class TestDisplace:
    def test_seed_amplitude(self):
        state = displace(vacuum_state(3), 0, 1000.0 / SQ2)
        assert np.isclose(state.d[0], 707.10678, atol=1e-5)
        assert state.d[1] == 0.0

    def test_additivity(self):
        a, b = 0.3 + 0.1j, -1.2 + 0.9j
        state = displace(displace(vacuum_state(2), 1, a), 1, b)
        assert np.isclose(state.d[1], a + b)

    def test_covariance_untouched(self):
        before = random_physical_state(np.random.default_rng(3))
        after = displace(before, 2, 5.0 - 1.0j)
        assert np.array_equal(before.A, after.A)
        assert np.array_equal(before.B, after.B)

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            displace(vacuum_state(2), 2, 1.0)


class TestTwoModeSqueeze:
    def test_power_gain_two_on_vacuum(self):
        op = SqueezeOp(0, 1, SQ2, 1.0, 0.0)
        state = two_mode_squeeze(vacuum_state(2), op)
        assert np.isclose(state.A[0, 0], 3.0)
        assert np.isclose(state.A[1, 1], 3.0)
        assert np.isclose(state.A[0, 1], 0.0)
        assert np.isclose(state.B[0, 1], 2.0 * SQ2)
        assert np.isclose(state.B[1, 0], 2.0 * SQ2)

    def test_identity_gain(self):
        state = random_physical_state(np.random.default_rng(5))
        out = two_mode_squeeze(state, SqueezeOp(0, 1, 1.0, 0.0, 0.4))
        assert np.allclose(out.A, state.A)
        assert np.allclose(out.B, state.B)
        assert np.allclose(out.d, state.d)

    def test_seeded_displacement_transform(self):
        # signal amplitude x/sqrt(2) maps to (mu, nu e^{i phi}) x/sqrt(2);
        # the creation-operator coupling carries the conjugated input
        x = 50.0
        mu, nu, phi = np.sqrt(5.0), 2.0, 0.7
        state = displace(vacuum_state(2), 0, x / SQ2)
        out = two_mode_squeeze(state, SqueezeOp(0, 1, mu, nu, phi))
        assert np.isclose(out.d[0], mu * x / SQ2)
        assert np.isclose(out.d[1], nu * np.exp(1j * phi) * x / SQ2)

    def test_invalid_ops(self):
        vac = vacuum_state(3)
        with pytest.raises(ValueError):
            two_mode_squeeze(vac, SqueezeOp(1, 1, SQ2, 1.0))
        with pytest.raises(ValueError):
            two_mode_squeeze(vac, SqueezeOp(0, 3, SQ2, 1.0))
        with pytest.raises(ValueError):
            two_mode_squeeze(vac, SqueezeOp(0, 1, 2.0, 1.0))  # mu^2 - nu^2 != 1
        with pytest.raises(ValueError):
            two_mode_squeeze(vac, SqueezeOp(0, 1, np.inf, np.inf))

    def test_symplectic_condition(self, rng):
        omega = symplectic_form(3)
        for _ in range(20):
            mu = 1.0 + 3.0 * rng.random()
            op = SqueezeOp(0, 2, mu, np.sqrt(mu**2 - 1), 2 * np.pi * rng.random())
            s_quad = complex_to_quadrature_transform(squeeze_matrix(3, op))
            assert np.abs(s_quad @ omega @ s_quad.T - omega).max() < 1e-12

    def test_purity_invariance(self, rng):
        for _ in range(10):
            state = random_physical_state(rng, n_modes=4, n_ops=3)
            det_before = np.linalg.det(quadrature_covariance(state))
            mu = 1.0 + 2.0 * rng.random()
            out = two_mode_squeeze(
                state, SqueezeOp(1, 3, mu, np.sqrt(mu**2 - 1), 1.1))
            det_after = np.linalg.det(quadrature_covariance(out))
            assert abs(det_after / det_before - 1.0) < 1e-10

    def test_inverse_restores_state(self, rng):
        # the inverse squeeze flips the sign of nu, i.e. shifts phase by pi
        state = random_physical_state(rng)
        mu, phi = 1.8, 0.3
        nu = np.sqrt(mu**2 - 1)
        fwd = two_mode_squeeze(state, SqueezeOp(0, 2, mu, nu, phi))
        back = two_mode_squeeze(fwd, SqueezeOp(0, 2, mu, nu, phi + np.pi))
        assert np.abs(back.A - state.A).max() < 1e-10
        assert np.abs(back.B - state.B).max() < 1e-10
        assert np.abs(back.d - state.d).max() < 1e-10


class TestPartialTrace:
    def test_thermal_reduction(self):
        state = two_mode_squeeze(vacuum_state(2), SqueezeOp(0, 1, SQ2, 1.0))
        reduced = partial_trace(state, [0])
        assert np.isclose(reduced.A[0, 0], 3.0)
        assert np.isclose(reduced.B[0, 0], 0.0)

    def test_keep_all_is_identity(self):
        state = random_physical_state(np.random.default_rng(9))
        same = partial_trace(state, range(state.n_modes))
        assert np.array_equal(same.A, state.A)
        assert np.array_equal(same.B, state.B)
        assert np.array_equal(same.d, state.d)

    def test_order_preserved(self):
        state = displace(displace(vacuum_state(3), 0, 1.0), 2, 2.0)
        swapped = partial_trace(state, [2, 0])
        assert np.allclose(swapped.d, [2.0, 1.0])

    def test_physicality_preserved(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            state = random_physical_state(rng, n_modes=5)
            keep = rng.choice(5, size=int(rng.integers(1, 5)), replace=False)
            assert validate(partial_trace(state, keep)).passed(1e-9)

    def test_errors(self):
        state = vacuum_state(3)
        with pytest.raises(ValueError):
            partial_trace(state, [])
        with pytest.raises(ValueError):
            partial_trace(state, [0, 0])

    def test_commutes_with_interior_squeeze(self, rng):
        state = random_physical_state(rng, n_modes=5)
        op = SqueezeOp(0, 2, 1.7, np.sqrt(1.7**2 - 1), 0.9)
        a = partial_trace(two_mode_squeeze(state, op), [0, 1, 2])
        b = two_mode_squeeze(partial_trace(state, [0, 1, 2]), op)
        assert np.abs(a.A - b.A).max() < 1e-10
        assert np.abs(a.B - b.B).max() < 1e-10


class TestApplyLoss:
    def test_eta_one_identity(self):
        state = random_physical_state(np.random.default_rng(13))
        out = apply_loss(state, 1, 1.0)
        assert np.allclose(out.A, state.A)
        assert np.allclose(out.B, state.B)

    def test_full_loss_gives_vacuum_mode(self):
        state = random_physical_state(np.random.default_rng(15))
        out = apply_loss(state, 2, 0.0)
        assert np.isclose(out.A[2, 2], 1.0)
        assert np.allclose(out.B[2, :], 0.0)
        assert np.allclose(out.A[2, :3], [0, 0, 1.0])
        assert out.d[2] == 0.0

    def test_thermal_attenuation(self):
        state = partial_trace(
            two_mode_squeeze(vacuum_state(2), SqueezeOp(0, 1, SQ2, 1.0)), [0])
        out = apply_loss(state, 0, 0.63)
        assert np.isclose(out.A[0, 0], 0.63 * 3.0 + 0.37)

    def test_composition(self, rng):
        state = random_physical_state(rng)
        a = apply_loss(apply_loss(state, 1, 0.8), 1, 0.55)
        b = apply_loss(state, 1, 0.8 * 0.55)
        assert np.abs(a.A - b.A).max() < 1e-12
        assert np.abs(a.B - b.B).max() < 1e-12
        assert np.abs(a.d - b.d).max() < 1e-12

    def test_preserves_physicality(self, rng):
        for _ in range(20):
            state = random_physical_state(rng)
            assert validate(apply_loss(state, 0, rng.random())).passed(1e-9)

    def test_eta_out_of_range(self):
        with pytest.raises(ValueError):
            apply_loss(vacuum_state(2), 0, 1.2)


class TestValidate:
    def test_vacuum_passes(self):
        assert validate(vacuum_state(4)).passed()

    def test_corrupted_hermiticity_flagged(self):
        A = np.eye(3, dtype=complex)
        A[1, 2] = 0.5
        A[2, 1] = 0.4  # not conj(A[1, 2])
        diag = validate(GaussianState(np.zeros(3), A, np.zeros((3, 3))))
        assert diag.hermiticity_defect > 0.05
        assert not diag.passed(1e-9)

    def test_nonphysical_covariance_flagged(self):
        # A below the vacuum floor violates the uncertainty relation
        diag = validate(GaussianState(np.zeros(2), 0.5 * np.eye(2), np.zeros((2, 2))))
        assert diag.min_physicality_eig < -0.4


class TestImmutability:
    def test_attribute_assignment_rejected(self):
        state = vacuum_state(2)
        with pytest.raises(AttributeError):
            state.n_modes = 3

    def test_arrays_read_only(self):
        state = vacuum_state(2)
        with pytest.raises(ValueError):
            state.A[0, 0] = 5.0


class TestSerialization:
    def test_round_trip(self, tmp_path):
        state = random_physical_state(np.random.default_rng(17))
        path = tmp_path / "state.json"
        save_state(state, path)
        back = load_state(path)
        assert np.array_equal(back.A, state.A)
        assert np.array_equal(back.B, state.B)
        assert np.array_equal(back.d, state.d)

    def test_dict_pairs_layout(self):
        state = displace(vacuum_state(1), 0, 1.0 + 2.0j)
        data = state_to_dict(state)
        assert data["displacement"] == [[1.0, 2.0]]
        assert state_from_dict(data).d[0] == 1.0 + 2.0j
