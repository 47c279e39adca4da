import math

import numpy as np
import pytest
import scipy.linalg

from spintomo.hamiltonians import (
    ClosedFormInapplicable,
    SpinHamiltonianSpec,
    TimingError,
    TwoQubitParams,
    build_hamiltonian,
    closed_form_pair_unitary,
    global_phase_match,
    heisenberg_pair_unitary,
    make_preset,
    pair_hamiltonian,
    solve_fixed_ez_time,
    solve_xxz_times,
    xy_pair_unitary,
)
from spintomo.linalg import evolve, is_unitary, kron
from spintomo.pauli import SIGMA, to_matrix, PauliString

SZ1 = kron(SIGMA[3], SIGMA[0])
SZ2 = kron(SIGMA[0], SIGMA[3])


class TestBuildHamiltonian:
    def test_all_zero(self):
        poly = build_hamiltonian(SpinHamiltonianSpec(n=2))
        assert len(poly) == 0

    def test_single_qubit_field(self):
        spec = SpinHamiltonianSpec(n=1, eps=((1.0, 0.0, 0.0),))
        assert build_hamiltonian(spec).to_dict() == {"X": 1.0}

    def test_xy_preset_terms(self):
        spec = SpinHamiltonianSpec(n=2, couplings={(0, 1): (0.7, 0.7, 0.0)})
        assert build_hamiltonian(spec).to_dict() == {"XX": 0.7, "YY": 0.7}

    def test_matches_pair_block(self):
        spec = SpinHamiltonianSpec(
            n=2, eps=((0, 0, 1.3), (0, 0, 1.3)), couplings={(0, 1): (0.5, 0.8, 0.2)}
        )
        assert np.max(np.abs(build_hamiltonian(spec).to_matrix()
                             - pair_hamiltonian(0.5, 0.8, 0.2, 1.3))) < 1e-12

    def test_total_z_conserved_for_xy(self):
        h = pair_hamiltonian(1.0, 1.0, 0.0)
        assert np.max(np.abs(h @ (SZ1 + SZ2) - (SZ1 + SZ2) @ h)) < 1e-12


class TestClosedForm:
    def test_zero_time_is_identity(self):
        p = TwoQubitParams(jx=1.0, jy=0.4, jz=0.3, eps_z=0.9, t=0.0)
        assert np.max(np.abs(closed_form_pair_unitary(p) - np.eye(4))) < 1e-12

    def test_mixing_weight_normalization(self):
        # (1-a^2)^2 c^2 + 4 a^2 c^2 = 1 for any admissible parameters.
        rng = np.random.default_rng(31)
        for _ in range(50):
            jx, jy = rng.uniform(0.1, 2, size=2)
            if jx == jy:
                continue
            p = TwoQubitParams(jx=jx, jy=jy, jz=0.0, eps_z=rng.uniform(0, 2), t=1.0)
            a, c = p.a, p.c
            assert (1 - a * a) ** 2 * c * c + 4 * a * a * c * c == pytest.approx(1.0, abs=1e-10)

    def test_zero_field_kills_z_term(self):
        # eps_z = 0 with Jx != Jy gives |a| = 1, hence (1-a^2)c = 0.
        p = TwoQubitParams(jx=1.4, jy=0.6, jz=0.0, eps_z=0.0, t=1.0)
        assert abs(p.a) == pytest.approx(1.0)
        assert (1 - p.a**2) * p.c == pytest.approx(0.0)

    def test_against_matrix_exponential(self):
        rng = np.random.default_rng(32)
        for _ in range(200):
            jx, jy, jz = rng.uniform(0.1, 2, size=3)
            ez = rng.uniform(0, 2)
            if ez > 0 and abs(jx - jy) < 1e-6:
                jy = jx + 0.5
            t = rng.uniform(0, 4)
            got = closed_form_pair_unitary(TwoQubitParams(jx=jx, jy=jy, jz=jz, eps_z=ez, t=t))
            want = scipy.linalg.expm(-1j * pair_hamiltonian(jx, jy, jz, ez) * t)
            assert np.linalg.norm(got - want) < 1e-8
            assert is_unitary(got)

    def test_jy_above_jx_region(self):
        # The quadratic-root selection must track sign(Jx - Jy).
        p = TwoQubitParams(jx=0.3, jy=1.5, jz=0.7, eps_z=1.1, t=2.0)
        want = scipy.linalg.expm(-1j * pair_hamiltonian(0.3, 1.5, 0.7, 1.1) * 2.0)
        assert np.linalg.norm(closed_form_pair_unitary(p) - want) < 1e-8

    def test_inapplicable_branch(self):
        p = TwoQubitParams(jx=1.0, jy=1.0, jz=0.0, eps_z=0.5, t=1.0)
        with pytest.raises(ClosedFormInapplicable):
            closed_form_pair_unitary(p)


class TestPairConstants:
    def test_xy_constant_unitary(self):
        u = xy_pair_unitary()
        assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12

    def test_xy_equals_evolution_phase_sensitive(self):
        u = evolve(pair_hamiltonian(1.0, 1.0, 0.0), math.pi / 8)
        assert np.max(np.abs(u - xy_pair_unitary())) < 1e-10

    def test_heisenberg_up_to_global_phase(self):
        u = evolve(pair_hamiltonian(1.0, 1.0, 1.0), math.pi / 8)
        mag, phase = global_phase_match(u, heisenberg_pair_unitary())
        assert mag >= 1 - 1e-10
        # the measured phase of the closed-form constant is exp(-i pi/8)
        assert abs(phase - np.exp(-1j * math.pi / 8)) < 1e-10

    def test_xy_from_scaled_couplings(self):
        j = 0.37
        u = evolve(pair_hamiltonian(j, j, 0.0), math.pi / (8 * j))
        assert np.max(np.abs(u - xy_pair_unitary())) < 1e-10


class TestTimingSolvers:
    def test_fixed_ez_minimal(self):
        assert solve_fixed_ez_time(4.0, 1.0, 1, 1) == pytest.approx(math.pi / 8)

    def test_fixed_ez_second_branch(self):
        assert solve_fixed_ez_time(4 / 3, 1.0, 1, 2) == pytest.approx(3 * math.pi / 4)

    def test_fixed_ez_rejects_with_nearest(self):
        with pytest.raises(TimingError, match="nearest admissible"):
            solve_fixed_ez_time(1.0, 1.0, 1, 1)

    def test_xxz_minimal(self):
        tau = solve_xxz_times(16.0, 1.0, 0.0, 1, 1, 1)
        assert tau == pytest.approx(math.pi / 8)
        u = evolve(pair_hamiltonian(1.0, 1.0, 16.0), tau)
        assert np.max(np.abs(u - xy_pair_unitary())) < 1e-9

    def test_xxz_ratio_32_needs_n2(self):
        assert solve_xxz_times(32.0, 1.0, 0.0, 1, 1, 2) == pytest.approx(math.pi / 8)

    def test_xxz_rejects_equal_couplings(self):
        with pytest.raises(TimingError, match="no common tau"):
            solve_xxz_times(1.0, 1.0, 0.0, 1, 1, 1)

    def test_xxz_fixed_ez_constraint(self):
        # eps_z tau = l pi/2 solvable iff eps_z/Jx = 4l/(2m-1)
        tau = solve_xxz_times(16.0, 1.0, 8.0, 2, 1, 1)
        assert tau == pytest.approx(math.pi / 8)
        with pytest.raises(TimingError):
            solve_xxz_times(16.0, 1.0, 5.0, 2, 1, 1)


class TestPresets:
    def test_switchable_xy_is_reference_unitary(self):
        pre = make_preset("xy")
        assert np.max(np.abs(pre.pair_unitary() - xy_pair_unitary())) < 1e-10

    def test_xxz_switchable_reduces_to_xy(self):
        pre = make_preset("xxz")
        mag, _ = pre.xy_equivalence()
        assert mag >= 1 - 1e-10

    def test_xxz_fixed_ez_even_l_reduces_to_xy(self):
        pre = make_preset("xxz", "fixed_ez", l=2)
        mag, phase = pre.xy_equivalence()
        assert mag >= 1 - 1e-10
        assert abs(phase - 1.0) < 1e-9

    def test_xy_fixed_ez_minimal_branch_differs_by_zz(self):
        # (m, n) = (1, 1): the evolution equals (-zz) * U_xy, not U_xy up to
        # a global phase; the planner treats it as its own primitive.
        pre = make_preset("xy", "fixed_ez", m=1, n=1)
        u = pre.pair_unitary()
        zz = kron(SIGMA[3], SIGMA[3])
        assert np.max(np.abs(u - (-zz @ xy_pair_unitary()))) < 1e-9
        mag, _ = pre.xy_equivalence()
        assert mag < 0.1

    def test_xy_fixed_ez_branch_3_3_matches_up_to_phase(self):
        pre = make_preset("xy", "fixed_ez", m=3, n=3)
        mag, phase = pre.xy_equivalence()
        assert mag >= 1 - 1e-9
        assert abs(phase + 1.0) < 1e-9

    def test_heisenberg_fixed_ez_phase_condition(self):
        pre = make_preset("heisenberg", "fixed_ez", l=1)
        base = make_preset("heisenberg")
        mag, _ = global_phase_match(base.pair_unitary(), pre.pair_unitary())
        assert mag >= 1 - 1e-9

    def test_heisenberg_commutes_with_total_z(self):
        h = pair_hamiltonian(1.0, 1.0, 1.0)
        tot = SZ1 + SZ2
        assert np.max(np.abs(h @ tot - tot @ h)) < 1e-12

    def test_unknown_names_rejected(self):
        with pytest.raises(ValueError):
            make_preset("ising")
        with pytest.raises(ValueError):
            make_preset("xy", "pulsed")


def test_z_rotation_generator_convention():
    # H = eps sigma_x generates exp(-i eps t sigma_x): a pi/2 rotation needs
    # eps t = pi/4 (no 1/2 in the Hamiltonian convention).
    eps = 0.8
    t = math.pi / (4 * eps)
    u = evolve(eps * to_matrix(PauliString.from_text("X")), t)
    want = (np.eye(2) - 1j * to_matrix(PauliString.from_text("X"))) / math.sqrt(2)
    assert np.max(np.abs(u - want)) < 1e-12
