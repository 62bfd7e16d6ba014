"""Hamiltonian builders: explicit assembly checks, frames, rotating-wave step."""

import numpy as np
import pytest

from hqa.hilbert import HilbertSpace, annihilation, embed, number, pauli
from hqa.model import (
    HybridProblemSpec,
    ScheduleSample,
    build_driver_hamiltonian,
    build_effective,
    build_lab_frame,
    build_lab_frame_driver,
    build_lab_frame_problem,
    build_problem_hamiltonian,
    lab_frame_parts,
    rotating_transform,
    total_hamiltonian,
)

# ground energy of the effective problem Hamiltonian for the shared
# qubit-resonator pair, truncation 10, frozen from scipy.linalg.eigh;
# the untruncated displaced-oscillator value is -0.1 - 0.275**2 / 0.35
APPENDIX_E0_EFF_N10 = -0.3160714246781443


def single_pair_spec(**overrides) -> HybridProblemSpec:
    fields = dict(
        qubit_bias=[0.7],
        resonator_freq=[1.3],
        number_coupling=[[0.4]],
        displacement_coupling=[[0.2]],
        displacement_drive=[0.5],
        transverse_field=[0.9],
        field_freq=11.0,
    )
    fields.update(overrides)
    return HybridProblemSpec(**fields)


def test_problem_hamiltonian_matches_hand_assembly():
    spec = single_pair_spec()
    space = HilbertSpace.standard(1, 1, 3)
    sz = embed(space, 0, pauli("z")).matrix
    a = embed(space, 1, annihilation(3)).matrix
    n = embed(space, 1, number(3)).matrix
    disp = a + a.conj().T
    expected = 0.7 * sz + 1.3 * n + 0.4 * (sz @ n) + 0.2 * (sz @ disp) + 0.5 * disp
    built = build_problem_hamiltonian(spec, space)
    assert np.allclose(built.matrix, expected, atol=1e-14)


def test_two_qubit_zz_coupling():
    spec = HybridProblemSpec(
        qubit_bias=[0.0, 0.0],
        resonator_freq=[0.0],
        zz_coupling=[[0.0, 0.8], [0.0, 0.0]],
        number_coupling=[[0.0], [0.0]],
        displacement_coupling=[[0.0], [0.0]],
        displacement_drive=[0.0],
        transverse_field=[0.0, 0.0],
    )
    space = HilbertSpace.standard(2, 1, 2)
    sz0 = embed(space, 0, pauli("z")).matrix
    sz1 = embed(space, 1, pauli("z")).matrix
    built = build_problem_hamiltonian(spec, space)
    assert np.allclose(built.matrix, 0.8 * sz0 @ sz1, atol=1e-14)


def test_two_mode_hopping():
    spec = HybridProblemSpec(
        qubit_bias=[0.0],
        resonator_freq=[0.0, 0.0],
        number_coupling=[[0.0, 0.0]],
        displacement_coupling=[[0.0, 0.0]],
        displacement_drive=[0.0, 0.0],
        hopping=[[0.0, 0.6], [0.0, 0.0]],
        transverse_field=[0.0],
    )
    space = HilbertSpace.standard(1, 2, 3)
    a1 = embed(space, 1, annihilation(3)).matrix
    a2 = embed(space, 2, annihilation(3)).matrix
    expected = 0.6 * (a1 @ a2.conj().T + a1.conj().T @ a2)
    built = build_problem_hamiltonian(spec, space)
    assert np.allclose(built.matrix, expected, atol=1e-14)


def test_spec_rejects_lower_triangular_couplings():
    with pytest.raises(ValueError):
        HybridProblemSpec(
            qubit_bias=[0.0, 0.0],
            resonator_freq=[1.0],
            zz_coupling=[[0.0, 0.0], [0.3, 0.0]],
            number_coupling=[[0.0], [0.0]],
            displacement_coupling=[[0.0], [0.0]],
            displacement_drive=[0.0],
            transverse_field=[0.0, 0.0],
        )


def test_spec_shape_and_finiteness_errors():
    with pytest.raises(ValueError):
        single_pair_spec(qubit_bias=[0.1, 0.2])
    with pytest.raises(ValueError):
        single_pair_spec(displacement_drive=[np.inf])
    with pytest.raises(ValueError):
        single_pair_spec(field_freq=-3.0)


def test_schedule_sample_bounds():
    s = ScheduleSample.from_time(2.0, 8.0)
    assert s.s == pytest.approx(0.25)
    with pytest.raises(ValueError):
        ScheduleSample(t=1.0, s=1.5)


def test_total_hamiltonian_interpolates():
    spec = single_pair_spec()
    space = HilbertSpace.standard(1, 1, 3)
    hp = build_problem_hamiltonian(spec, space)
    hd = build_driver_hamiltonian(spec, space)
    assert np.allclose(total_hamiltonian(hd, hp, 0.0).matrix, hd.matrix)
    assert np.allclose(total_hamiltonian(hd, hp, 1.0).matrix, hp.matrix)
    mid = total_hamiltonian(hd, hp, ScheduleSample(t=1.0, s=0.5))
    assert np.allclose(mid.matrix, (hd.matrix + hp.matrix) / 2)


def test_driver_ground_is_analytic_product_state():
    """Diagonalizing the driver must reproduce |sx=-1>^L x vacuum."""
    from hqa.dynamics import ground_state

    spec = HybridProblemSpec(
        qubit_bias=[0.3, -0.2],
        resonator_freq=[1.0, 1.0],
        number_coupling=[[0.1, 0.0], [0.0, 0.2]],
        displacement_coupling=[[0.05, 0.0], [0.0, 0.1]],
        displacement_drive=[0.3, 0.1],
        transverse_field=[1.0, 1.0],
    )
    space = HilbertSpace.standard(2, 2, 3)
    hd = build_driver_hamiltonian(spec, space)
    energy, state = ground_state(hd)
    assert energy == pytest.approx(-1.0, abs=1e-12)

    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    vac = np.eye(3)[0]
    product = np.kron(np.kron(minus, minus), np.kron(vac, vac))
    assert abs(np.vdot(product, state.amplitudes)) == pytest.approx(1.0, abs=1e-10)


def test_driver_mode_frequency_falls_back_to_problem_frequency():
    spec = single_pair_spec(driver_freq=None)
    spec_explicit = single_pair_spec(driver_freq=[1.3])
    space = HilbertSpace.standard(1, 1, 4)
    assert np.allclose(
        build_driver_hamiltonian(spec, space).matrix,
        build_driver_hamiltonian(spec_explicit, space).matrix,
    )


def test_builders_are_hermitian(appendix_spec):
    specs = [single_pair_spec(), appendix_spec]
    for spec in specs:
        space = HilbertSpace.standard(spec.n_qubits, spec.n_resonators, 5)
        ops = [
            build_problem_hamiltonian(spec, space),
            build_driver_hamiltonian(spec, space),
        ]
        for t in (0.0, 0.31, 2.7):
            ops.append(build_lab_frame_problem(spec, space, t))
            ops.append(build_lab_frame_driver(spec, space, t))
            ops.append(build_lab_frame(spec, space, t, total_time=10.0))
        ops.extend(build_effective(spec, space))
        for op in ops:
            assert op.hermiticity_defect() < 1e-12


def test_lab_frame_is_static_part_plus_cosine_modulation(appendix_spec):
    space = HilbertSpace.standard(1, 1, 4)
    w = appendix_spec.field_freq
    p_static, p_mod, d_static, d_mod = lab_frame_parts(appendix_spec, space)
    t = 0.77
    assert np.allclose(
        build_lab_frame_problem(appendix_spec, space, t).matrix,
        p_static.matrix + np.cos(w * t) * p_mod.matrix,
        atol=1e-14,
    )
    quarter = (np.pi / 2) / w  # cosine vanishes
    assert np.allclose(
        build_lab_frame_driver(appendix_spec, space, quarter).matrix,
        d_static.matrix,
        atol=1e-12,
    )


def test_lab_frame_schedule_combination(appendix_spec):
    space = HilbertSpace.standard(1, 1, 3)
    t, total = 3.0, 12.0
    combined = build_lab_frame(appendix_spec, space, t, total_time=total)
    s = t / total
    expected = (1 - s) * build_lab_frame_driver(appendix_spec, space, t).matrix + (
        s
    ) * build_lab_frame_problem(appendix_spec, space, t).matrix
    assert np.allclose(combined.matrix, expected, atol=1e-13)


def test_frame_construction_requires_field_freq():
    spec = single_pair_spec(field_freq=None)
    space = HilbertSpace.standard(1, 1, 3)
    with pytest.raises(ValueError):
        build_effective(spec, space)
    with pytest.raises(ValueError):
        build_lab_frame_problem(spec, space, 0.0)


def test_effective_detunings_and_halved_couplings(appendix_spec):
    space = HilbertSpace.standard(1, 1, 4)
    sz = embed(space, 0, pauli("z")).matrix
    a = embed(space, 1, annihilation(4)).matrix
    n = embed(space, 1, number(4)).matrix
    disp = a + a.conj().T
    hp_eff, hd_eff = build_effective(appendix_spec, space)
    expected_p = (
        (153.7 - 153.9) / 2 * sz
        + (154.1 - 153.9) * n
        + 0.15 * (sz @ n)
        + (0.25 / 2) * (sz @ disp)
        + (0.30 / 2) * disp
    )
    expected_d = (153.7 - 153.9) / 2 * sz + (154.1 - 153.9) * n + (0.55 / 2) * (
        embed(space, 0, pauli("x")).matrix
    )
    assert np.allclose(hp_eff.matrix, expected_p, atol=1e-12)
    assert np.allclose(hd_eff.matrix, expected_d, atol=1e-12)


def test_effective_ground_energy_frozen_value(appendix_spec):
    from hqa.dynamics import ground_state

    space = HilbertSpace.standard(1, 1, 10)
    hp_eff, _ = build_effective(appendix_spec, space)
    energy = ground_state(hp_eff)[0]
    assert energy == pytest.approx(APPENDIX_E0_EFF_N10, abs=1e-9)
    # displaced-oscillator closed form, reached only as truncation grows
    assert energy == pytest.approx(-0.1 - 0.275**2 / 0.35, abs=1e-7)


def test_rotating_transform_is_unitary_and_periodic(appendix_spec):
    space = HilbertSpace.standard(1, 1, 5)
    w = appendix_spec.field_freq
    for t in (0.0, 0.13, 2.9):
        u = rotating_transform(space, appendix_spec, t).matrix
        assert np.allclose(u @ u.conj().T, np.eye(space.dim), atol=1e-12)
    assert np.allclose(rotating_transform(space, appendix_spec, 0.0).matrix, np.eye(space.dim))


@pytest.mark.parametrize("n_periods", [1, 2, 7])
def test_effective_hamiltonian_invariant_at_whole_periods(appendix_spec, n_periods):
    """U(2 pi n / w) conjugation leaves the effective problem Hamiltonian fixed."""
    space = HilbertSpace.standard(1, 1, 6)
    w = appendix_spec.field_freq
    t = 2 * np.pi * n_periods / w
    u = rotating_transform(space, appendix_spec, t).matrix
    hp_eff, _ = build_effective(appendix_spec, space)
    conjugated = u.conj().T @ hp_eff.matrix @ u
    assert np.max(np.abs(conjugated - hp_eff.matrix)) < 1e-10


def test_rotating_wave_step_is_the_time_average(appendix_spec):
    """Averaging U H_lab U+ - w (sz/2 + n) over a period gives H_eff.

    The integrand only carries harmonics at 0 and 2w, so a five-point
    rectangle rule is exact; agreement is far below the counter-rotating
    scale 2 max(couplings) / w that the approximation itself drops.
    """
    space = HilbertSpace.standard(1, 1, 5)
    spec = appendix_spec
    w = spec.field_freq
    sz = embed(space, 0, pauli("z")).matrix
    n = embed(space, 1, number(5)).matrix
    shift = w * (sz / 2 + n)

    period = 2 * np.pi / w
    points = 5
    avg = np.zeros((space.dim, space.dim), dtype=complex)
    for k in range(points):
        t = period * k / points
        u = rotating_transform(space, spec, t).matrix
        h_lab = build_lab_frame_problem(spec, space, t).matrix
        avg += u @ h_lab @ u.conj().T - shift
    avg /= points

    hp_eff, _ = build_effective(spec, space)
    budget = 2 * max(0.25, 0.30, 0.55) / w
    assert np.max(np.abs(avg - hp_eff.matrix)) < 1e-10  # exact up to rounding
    assert np.max(np.abs(avg - hp_eff.matrix)) < budget


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_specs_build_hermitian_operators(seed):
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.normal(size=(2, 2)), k=1)
    spec = HybridProblemSpec(
        qubit_bias=rng.normal(size=2),
        resonator_freq=rng.uniform(0.5, 2.0, size=2),
        zz_coupling=upper,
        number_coupling=rng.normal(size=(2, 2)),
        displacement_coupling=rng.normal(size=(2, 2)),
        displacement_drive=rng.normal(size=2),
        hopping=np.triu(rng.normal(size=(2, 2)), k=1),
        transverse_field=rng.uniform(0.1, 1.0, size=2),
        field_freq=25.0,
    )
    space = HilbertSpace.standard(2, 2, 3)
    assert build_problem_hamiltonian(spec, space).hermiticity_defect() < 1e-12
    assert build_driver_hamiltonian(spec, space).hermiticity_defect() < 1e-12
    for op in build_effective(spec, space):
        assert op.hermiticity_defect() < 1e-12
    t = rng.uniform(0.0, 5.0)
    assert build_lab_frame(spec, space, t, total_time=7.0).hermiticity_defect() < 1e-12
