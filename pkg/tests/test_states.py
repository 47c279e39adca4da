import numpy as np
import pytest

from spintomo.pauli import PauliString
from spintomo.states import (
    BlochVector,
    DensityMatrix,
    coefficient_count,
    density_from_json,
    density_to_json,
    fidelity,
    from_bloch,
    make_density,
    random_density,
    to_bloch,
    trace_distance,
)


def ket(vec):
    v = np.array(vec, dtype=complex)
    v /= np.linalg.norm(v)
    return make_density(np.outer(v, v.conj()))


class TestBlochRoundTrip:
    def test_maximally_mixed_has_zero_vector(self):
        rho = make_density(np.eye(4) / 4)
        assert to_bloch(rho).r == {}

    def test_one_state_convention(self):
        # |1> = |down>, so r_z = Tr(rho sigma_z) = -1.
        rho = ket([0, 1])
        b = to_bloch(rho)
        assert b[PauliString.from_text("Z")] == pytest.approx(-1.0)
        assert b[PauliString.from_text("X")] == pytest.approx(0.0)
        assert b[PauliString.from_text("Y")] == pytest.approx(0.0)

    def test_round_trip(self):
        for seed in range(5):
            rho = random_density(2, "mixed", seed)
            back = from_bloch(to_bloch(rho))
            assert np.max(np.abs(back.matrix - rho.matrix)) < 1e-10
            assert back.psd

    def test_from_bloch_trivials(self):
        assert np.allclose(from_bloch(BlochVector(2)).matrix, np.eye(4) / 4)
        rho = from_bloch(BlochVector(1, {PauliString.from_text("Z"): -1.0}))
        assert np.allclose(rho.matrix, np.diag([0.0, 1.0]))

    def test_nonphysical_flagged_not_repaired(self):
        b = BlochVector(1, {PauliString.from_text("Z"): 1.5})
        rho = from_bloch(b)
        assert not rho.psd
        assert rho.min_eigenvalue() < -0.2
        # matrix is preserved as assembled
        assert np.allclose(rho.matrix, np.diag([1.25, -0.25]))

    def test_purity_bound(self):
        # sum r_P^2 = 2^n Tr(rho^2) - 1, equal to 2^n - 1 exactly when pure.
        for seed in range(4):
            rho = random_density(2, "pure", seed)
            ss = sum(v * v for v in to_bloch(rho).r.values())
            assert ss == pytest.approx(4 * rho.purity() - 1, abs=1e-10)
            assert ss == pytest.approx(3.0, abs=1e-10)
            mixed = random_density(2, "mixed", seed)
            ss = sum(v * v for v in to_bloch(mixed).r.values())
            assert ss <= 3.0 + 1e-10

    def test_coefficient_count_identity(self):
        for n in range(1, 7):
            assert coefficient_count(n) == 4**n - 1


class TestRandomDensity:
    def test_pure_is_rank_one(self):
        rho = random_density(1, "pure", 9)
        assert rho.purity() == pytest.approx(1.0, abs=1e-10)

    def test_mixed_invariants(self):
        rho = random_density(2, "mixed", 9)
        rho.validate()
        assert rho.purity() < 1.0

    def test_deterministic(self):
        a = random_density(2, "mixed", 123)
        b = random_density(2, "mixed", 123)
        assert np.array_equal(a.matrix, b.matrix)

    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            random_density(1, "thermal", 0)


class TestMetrics:
    def test_self_fidelity(self):
        rho = random_density(2, "mixed", 4)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal_states(self):
        zero, one = ket([1, 0]), ket([0, 1])
        assert fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)
        assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)

    def test_fuchs_van_de_graaf(self):
        # sqrt(F) >= 1 - D for the squared-fidelity convention used here.
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = random_density(2, "mixed", int(rng.integers(0, 2**31)))
            b = random_density(2, "mixed", int(rng.integers(0, 2**31)))
            f, d = fidelity(a, b), trace_distance(a, b)
            assert np.sqrt(f) >= 1 - d - 1e-10


class TestValidation:
    def test_validate_passes_physical(self):
        random_density(2, "mixed", 1).validate()

    def test_validate_rejects_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(1, np.eye(2, dtype=complex)).validate()

    def test_make_density_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            make_density(np.array([[1, 1], [0, 0]], dtype=complex))


class TestSerialization:
    def test_density_json_round_trip(self):
        rho = random_density(2, "mixed", 17)
        back = density_from_json(density_to_json(rho))
        assert np.array_equal(back.matrix, rho.matrix)

    def test_bloch_json_keys(self):
        b = to_bloch(random_density(2, "pure", 2))
        d = b.to_dict()
        assert all(len(k) == 2 and set(k) <= set("0XYZ") for k in d)
        back = BlochVector.from_dict(2, d)
        assert back.r == b.r
