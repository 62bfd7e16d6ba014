"""Operator algebra on truncated composite Hilbert spaces.

Spaces are ordered tensor products of two-level sites (qubits) and
bosonic modes truncated to a finite number of Fock levels (resonators).
Operators are stored as dense complex matrices; the spaces this package
targets are at most a few hundred dimensions, so dense algebra is both
simpler and fast enough.  Everything here is immutable after
construction and safe to share between threads.

Conventions: hbar = 1, qubit basis ordered so that sigma_z = diag(1, -1),
and composite spaces list qubits first, then resonators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Qubit",
    "Resonator",
    "HilbertSpace",
    "LinOp",
    "StateVector",
    "annihilation",
    "creation",
    "number",
    "pauli",
    "identity",
    "embed",
    "commutator",
    "expectation",
    "coherent",
]

# Norm slack accepted by StateVector; integration drift stays well below this.
_NORM_TOL = 1e-6


@dataclass(frozen=True)
class Qubit:
    """Two-level site."""

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class Resonator:
    """Bosonic mode truncated to `truncation` Fock levels (0 .. truncation-1)."""

    truncation: int

    def __post_init__(self) -> None:
        if not isinstance(self.truncation, int) or self.truncation < 2:
            raise ValueError(
                f"resonator truncation must be an integer >= 2, got {self.truncation!r}"
            )

    @property
    def dim(self) -> int:
        return self.truncation


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of qubit and resonator sites.

    The site order is fixed at construction; tensor factors in every
    embedded operator follow it.  Use :meth:`standard` for the package
    convention of qubits first, then resonators.
    """

    sites: tuple

    def __post_init__(self) -> None:
        sites = tuple(self.sites)
        if not sites:
            raise ValueError("a HilbertSpace needs at least one site")
        for s in sites:
            if not isinstance(s, (Qubit, Resonator)):
                raise TypeError(f"site must be Qubit or Resonator, got {type(s).__name__}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def standard(cls, n_qubits: int, n_resonators: int, truncation: int) -> "HilbertSpace":
        """Space with `n_qubits` qubits followed by `n_resonators` modes,
        each truncated to `truncation` levels."""
        return cls(tuple([Qubit()] * n_qubits + [Resonator(truncation)] * n_resonators))

    @property
    def dims(self) -> tuple:
        return tuple(s.dim for s in self.sites)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def qubit_indices(self) -> tuple:
        return tuple(i for i, s in enumerate(self.sites) if isinstance(s, Qubit))

    @property
    def resonator_indices(self) -> tuple:
        return tuple(i for i, s in enumerate(self.sites) if isinstance(s, Resonator))

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_indices)

    @property
    def n_resonators(self) -> int:
        return len(self.resonator_indices)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class LinOp:
    """Linear operator on a HilbertSpace, stored as a dense complex matrix.

    Supports +, -, scalar *, and @ (operator product).  The matrix is
    copied on construction and frozen, so instances can be shared freely.
    """

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        d = self.space.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match space dim {d}")
        object.__setattr__(self, "matrix", _readonly(mat))

    def dagger(self) -> "LinOp":
        return LinOp(self.space, self.matrix.conj().T)

    def hermiticity_defect(self) -> float:
        """Largest entry of |M - M^dagger|."""
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_defect() < tol

    def _check_same_space(self, other: "LinOp") -> None:
        if self.space != other.space:
            raise ValueError("operators act on different spaces")

    def __add__(self, other):
        if isinstance(other, LinOp):
            self._check_same_space(other)
            return LinOp(self.space, self.matrix + other.matrix)
        return NotImplemented

    # sum() starts from 0
    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, LinOp):
            self._check_same_space(other)
            return LinOp(self.space, self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return LinOp(self.space, -self.matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return LinOp(self.space, self.matrix * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            self._check_same_space(other)
            return LinOp(self.space, self.matrix @ other.matrix)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized state on a HilbertSpace."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.shape != (self.space.dim,):
            raise ValueError(
                f"amplitude count {amps.size} does not match space dim {self.space.dim}"
            )
        n = np.linalg.norm(amps)
        if abs(n - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {n!r} is not 1 within {_NORM_TOL}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.space, self.amplitudes / np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        if self.space != other.space:
            raise ValueError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _single_site_space(site) -> HilbertSpace:
    return HilbertSpace((site,))


def annihilation(truncation: int) -> LinOp:
    """Truncated annihilation operator a with a[n, n+1] = sqrt(n+1).

    Parameters
    ----------
    truncation : int
        Number of retained Fock levels, at least 2.

    Returns
    -------
    LinOp
        Single-site operator on a Resonator(truncation) space.
    """
    space = _single_site_space(Resonator(truncation))
    mat = np.diag(np.sqrt(np.arange(1, truncation, dtype=float)), k=1)
    return LinOp(space, mat)


def creation(truncation: int) -> LinOp:
    """a^dagger, the conjugate transpose of :func:`annihilation`."""
    return annihilation(truncation).dagger()


def number(truncation: int) -> LinOp:
    """Number operator a^dagger a = diag(0, 1, ..., truncation-1)."""
    space = _single_site_space(Resonator(truncation))
    return LinOp(space, np.diag(np.arange(truncation, dtype=float)))


_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def pauli(axis: str) -> LinOp:
    """Pauli matrix on a single qubit; axis is one of 'x', 'y', 'z'."""
    try:
        mat = _PAULI[axis]
    except KeyError:
        raise ValueError(f"axis must be 'x', 'y' or 'z', got {axis!r}") from None
    return LinOp(_single_site_space(Qubit()), mat)


def identity(space) -> LinOp:
    """Identity operator.

    Accepts a HilbertSpace, or an integer dimension for a single-site
    identity (2 is read as a qubit, anything larger as a resonator).
    """
    if isinstance(space, int):
        site = Qubit() if space == 2 else Resonator(space)
        space = _single_site_space(site)
    return LinOp(space, np.eye(space.dim))


def embed(space: HilbertSpace, site_index: int, local: LinOp) -> LinOp:
    """Embed a single-site operator at `site_index` of a composite space.

    Builds identity (x) ... (x) local (x) ... (x) identity in the
    space's fixed site order.

    Parameters
    ----------
    space : HilbertSpace
        Target composite space.
    site_index : int
        Position of the site the operator acts on.
    local : LinOp
        Single-site operator whose dimension matches that site.
    """
    if not 0 <= site_index < len(space.sites):
        raise ValueError(f"site index {site_index} out of range for {len(space.sites)} sites")
    d_local = space.sites[site_index].dim
    if local.space.dim != d_local:
        raise ValueError(
            f"local operator dim {local.space.dim} does not match site dim {d_local}"
        )
    mat = np.eye(1, dtype=complex)
    for i, site in enumerate(space.sites):
        factor = local.matrix if i == site_index else np.eye(site.dim)
        mat = np.kron(mat, factor)
    return LinOp(space, mat)


def commutator(a: LinOp, b: LinOp) -> LinOp:
    """[a, b] = ab - ba."""
    return a @ b - b @ a


def expectation(op: LinOp, psi: StateVector):
    """<psi|op|psi>.

    Returns a float when the value is real within 1e-9 (the case for
    Hermitian operators), otherwise the full complex number.
    """
    if op.space != psi.space:
        raise ValueError("operator and state live on different spaces")
    val = complex(np.vdot(psi.amplitudes, op.matrix @ psi.amplitudes))
    if abs(val.imag) < 1e-9:
        return val.real
    return val


def coherent(truncation: int, alpha: complex) -> StateVector:
    """Truncated coherent state |alpha>, renormalized after truncation.

    Intended for tests; the truncation error is governed by the weight
    of |alpha|^2 above the retained levels.
    """
    n = np.arange(truncation)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, truncation)))))
    amps = np.exp(n * np.log(complex(alpha)) - 0.5 * log_fact) if alpha != 0 else np.eye(truncation)[0].astype(complex)
    amps = np.asarray(amps, dtype=complex)
    amps /= np.linalg.norm(amps)
    return StateVector(_single_site_space(Resonator(truncation)), amps)
