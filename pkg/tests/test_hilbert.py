"""Operator and state primitives: algebra, embedding, truncation artifacts."""

import numpy as np
import pytest

from hqa.hilbert import (
    HilbertSpace,
    LinOp,
    Qubit,
    Resonator,
    StateVector,
    annihilation,
    coherent,
    commutator,
    creation,
    embed,
    expectation,
    identity,
    number,
    pauli,
)


def fock(space, level):
    amps = np.zeros(space.dim)
    amps[level] = 1.0
    return StateVector(space, amps)


def test_site_dims():
    assert Qubit().dim == 2
    assert Resonator(5).dim == 5


@pytest.mark.parametrize("bad", [1, 0, -3])
def test_resonator_rejects_tiny_truncation(bad):
    with pytest.raises(ValueError):
        Resonator(bad)


def test_standard_space_layout():
    space = HilbertSpace.standard(2, 3, 4)
    assert space.dims == (2, 2, 4, 4, 4)
    assert space.dim == 2 * 2 * 4 * 4 * 4
    assert space.qubit_indices == (0, 1)
    assert space.resonator_indices == (2, 3, 4)
    assert space.n_qubits == 2 and space.n_resonators == 3


def test_space_rejects_empty_and_foreign_sites():
    with pytest.raises(ValueError):
        HilbertSpace(sites=())
    with pytest.raises(TypeError):
        HilbertSpace(sites=(Qubit(), "resonator"))


@pytest.mark.parametrize("n", [2, 3, 8])
def test_ladder_matrix_elements(n):
    a = annihilation(n).matrix
    for k in range(n - 1):
        assert a[k, k + 1] == pytest.approx(np.sqrt(k + 1))
    assert np.count_nonzero(a) == n - 1
    assert np.array_equal(creation(n).matrix, a.conj().T)


@pytest.mark.parametrize("n", [2, 4, 9])
def test_truncated_canonical_commutator(n):
    """[a, a+] is the identity except the top diagonal entry, which is 1 - n."""
    c = commutator(annihilation(n), creation(n)).matrix
    expected = np.eye(n)
    expected[n - 1, n - 1] = 1 - n
    # products of the bidiagonal ladder factors are exactly diagonal;
    # the diagonal itself carries sqrt rounding of order one ulp
    assert np.array_equal(c - np.diag(np.diag(c)), np.zeros((n, n)))
    assert np.allclose(np.diag(c), np.diag(expected), rtol=0, atol=1e-13 * n)


def test_number_operator_is_ladder_product():
    n = 6
    lhs = number(n).matrix
    assert np.allclose(lhs, (creation(n) @ annihilation(n)).matrix, rtol=0, atol=1e-13)
    assert np.array_equal(np.diag(lhs), np.arange(n))


def test_pauli_algebra():
    sx, sy, sz = (pauli(axis).matrix for axis in "xyz")
    assert np.array_equal(sx @ sx, np.eye(2))
    assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
    assert np.allclose(sz @ sx, 1j * sy)
    with pytest.raises(ValueError):
        pauli("w")


def test_identity_matches_space():
    space = HilbertSpace.standard(1, 1, 3)
    assert np.array_equal(identity(space).matrix, np.eye(6))


def test_embed_reproduces_kron_product():
    space = HilbertSpace.standard(1, 2, 3)
    sz = pauli("z")
    n_op = number(3)
    by_hand = np.kron(np.kron(sz.matrix, np.eye(3)), n_op.matrix)
    assert np.allclose(embed(space, 0, sz).matrix @ embed(space, 2, n_op).matrix, by_hand)


def test_embedded_operators_on_distinct_sites_commute():
    space = HilbertSpace.standard(2, 1, 4)
    a = embed(space, 0, pauli("x"))
    b = embed(space, 2, number(4))
    assert np.max(np.abs(commutator(a, b).matrix)) == 0.0


def test_embed_errors():
    space = HilbertSpace.standard(1, 1, 3)
    with pytest.raises(ValueError):
        embed(space, 5, pauli("z"))
    with pytest.raises(ValueError):
        embed(space, 1, pauli("z"))  # resonator site, dim 3 vs 2


def test_linop_arithmetic_and_space_guard():
    space = HilbertSpace.standard(0, 1, 4)
    a = annihilation(4)
    n_op = number(4)
    assert np.allclose(((a + n_op) - n_op).matrix, a.matrix)
    assert np.allclose((2.5 * a).matrix, (a * 2.5).matrix)
    assert np.allclose((-a).matrix, -a.matrix)
    assert np.allclose(sum([a, a, a]).matrix, (3 * a).matrix)
    other = pauli("z")
    with pytest.raises(ValueError):
        _ = a + other


def test_linop_matrices_are_read_only():
    op = pauli("x")
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 7.0


def test_hermiticity_checks():
    assert number(5).hermiticity_defect() == 0.0
    assert number(5).is_hermitian()
    a = annihilation(5)
    assert a.hermiticity_defect() > 0.9
    assert not a.is_hermitian()


def test_state_norm_validation():
    space = HilbertSpace.standard(1, 0, 2)
    with pytest.raises(ValueError):
        StateVector(space, np.array([1.0, 1.0]))
    smeared = StateVector(space, np.array([1.0, 1.0]) / np.sqrt(2))
    assert smeared.norm() == pytest.approx(1.0)


def test_overlap_conjugate_symmetry():
    rng = np.random.default_rng(7)
    space = HilbertSpace.standard(1, 1, 3)
    raw1 = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    raw2 = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    psi = StateVector(space, raw1 / np.linalg.norm(raw1))
    phi = StateVector(space, raw2 / np.linalg.norm(raw2))
    assert psi.overlap(phi) == pytest.approx(np.conj(phi.overlap(psi)))


def test_expectation_of_number_on_fock_state():
    space = HilbertSpace(sites=(Resonator(6),))
    for k in range(6):
        val = expectation(number(6), fock(space, k))
        assert isinstance(val, float)
        assert val == pytest.approx(k)


def test_expectation_space_mismatch():
    space = HilbertSpace.standard(1, 0, 2)
    with pytest.raises(ValueError):
        expectation(number(4), fock(space, 0))


def test_coherent_state_statistics():
    alpha = 0.6 + 0.2j
    psi = coherent(24, alpha)
    assert psi.norm() == pytest.approx(1.0)
    n_op = number(24)
    assert expectation(n_op, psi) == pytest.approx(abs(alpha) ** 2, abs=1e-10)
    a_val = expectation(annihilation(24), psi)
    assert a_val == pytest.approx(alpha, abs=1e-10)


def test_coherent_vacuum_is_exact():
    psi = coherent(5, 0.0)
    assert np.array_equal(psi.amplitudes, np.eye(5)[0])


def test_coherent_renormalizes_after_truncation():
    # alpha far beyond the truncation still yields a unit vector
    psi = coherent(4, 3.0)
    assert psi.norm() == pytest.approx(1.0)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_random_hermitian_expectation_is_real(seed):
    rng = np.random.default_rng(seed)
    space = HilbertSpace.standard(1, 1, 4)
    raw = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    herm = LinOp(space, (raw + raw.conj().T) / 2)
    vec = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    psi = StateVector(space, vec / np.linalg.norm(vec))
    assert isinstance(expectation(herm, psi), float)
