"""Hamiltonian builders for hybrid qubit-resonator annealing.

A :class:`HybridProblemSpec` collects every coefficient of the hybrid
problem Hamiltonian

    H_P = sum_i h_i sz_i + sum_{i<j} J_ij sz_i sz_j
        + sum_{ij} g_ij sz_i n_j + sum_{ij} gt_ij sz_i (a_j + a_j^dag)
        + sum_j w_j n_j + sum_j lam_j (a_j + a_j^dag)
        + sum_{i<j} Jt_ij (a_i a_j^dag + a_i^dag a_j)

together with the driver data (transverse fields B_i, driver mode
frequencies) and, for driven-frame runs, the frequency of the applied
oscillating field.  Builders return dense Hermitian :class:`LinOp`s:

* :func:`build_problem_hamiltonian` / :func:`build_driver_hamiltonian`
  for the static annealing pair,
* :func:`build_lab_frame_problem` / :func:`build_lab_frame_driver` for
  the driven (lab-frame) forms in which the displacement and transverse
  terms oscillate as cos(w t),
* :func:`build_effective` for the rotating-frame pair after the
  rotating-wave approximation, where qubit splittings and mode
  frequencies turn into detunings and the oscillating couplings are
  halved,
* :func:`rotating_transform` for the frame unitary itself.

All coefficients share one energy unit (hbar = 1); time carries the
inverse unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (
    HilbertSpace,
    LinOp,
    annihilation,
    number,
    pauli,
)

__all__ = [
    "HybridProblemSpec",
    "ScheduleSample",
    "build_problem_hamiltonian",
    "build_driver_hamiltonian",
    "total_hamiltonian",
    "lab_frame_parts",
    "build_lab_frame_problem",
    "build_lab_frame_driver",
    "build_lab_frame",
    "build_effective",
    "rotating_transform",
]


def _as_array(value, shape, name):
    if value is None:
        arr = np.zeros(shape)
    else:
        arr = np.array(value, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


def _check_upper_triangular(arr, name):
    if arr.size and np.any(np.tril(arr) != 0.0):
        raise ValueError(f"{name} must be strictly upper-triangular")


@dataclass(frozen=True)
class HybridProblemSpec:
    """Coefficient record for the hybrid Hamiltonians.

    Parameters
    ----------
    qubit_bias : array (L,)
        Longitudinal sz coefficients.
    resonator_freq : array (M,)
        Mode frequencies (number-operator coefficients) of the problem
        Hamiltonian.
    zz_coupling : array (L, L), optional
        Qubit-qubit couplings, strictly upper-triangular.
    number_coupling : array (L, M), optional
        sz (x) n couplings.
    displacement_coupling : array (L, M), optional
        sz (x) (a + a^dag) couplings.
    displacement_drive : array (M,), optional
        Linear (a + a^dag) drives.
    hopping : array (M, M), optional
        Mode-mode hopping a_i a_j^dag + a_i^dag a_j, strictly
        upper-triangular.
    transverse_field : array (L,), optional
        Driver transverse-field strengths B_i; the driver applies
        (B_i / 2) sx_i.
    driver_freq : array (M,), optional
        Mode frequencies of the driver Hamiltonian.  Defaults to
        `resonator_freq` when omitted.
    field_freq : float, optional
        Frequency of the applied oscillating field; required only by the
        lab-frame, effective, and rotating-transform builders.
    """

    qubit_bias: np.ndarray
    resonator_freq: np.ndarray
    zz_coupling: np.ndarray = None
    number_coupling: np.ndarray = None
    displacement_coupling: np.ndarray = None
    displacement_drive: np.ndarray = None
    hopping: np.ndarray = None
    transverse_field: np.ndarray = None
    driver_freq: np.ndarray = None
    field_freq: float = None

    def __post_init__(self):
        h = np.atleast_1d(np.array(self.qubit_bias, dtype=float))
        w = np.atleast_1d(np.array(self.resonator_freq, dtype=float))
        L, M = h.shape[0], w.shape[0]
        set_ = object.__setattr__
        set_(self, "qubit_bias", _as_array(h, (L,), "qubit_bias"))
        set_(self, "resonator_freq", _as_array(w, (M,), "resonator_freq"))
        set_(self, "zz_coupling", _as_array(self.zz_coupling, (L, L), "zz_coupling"))
        set_(self, "number_coupling", _as_array(self.number_coupling, (L, M), "number_coupling"))
        set_(
            self,
            "displacement_coupling",
            _as_array(self.displacement_coupling, (L, M), "displacement_coupling"),
        )
        set_(
            self,
            "displacement_drive",
            _as_array(self.displacement_drive, (M,), "displacement_drive"),
        )
        set_(self, "hopping", _as_array(self.hopping, (M, M), "hopping"))
        set_(self, "transverse_field", _as_array(self.transverse_field, (L,), "transverse_field"))
        if self.driver_freq is not None:
            set_(self, "driver_freq", _as_array(self.driver_freq, (M,), "driver_freq"))
        if self.field_freq is not None:
            f = float(self.field_freq)
            if not np.isfinite(f) or f <= 0:
                raise ValueError(f"field_freq must be a positive number, got {f!r}")
            set_(self, "field_freq", f)
        _check_upper_triangular(self.zz_coupling, "zz_coupling")
        _check_upper_triangular(self.hopping, "hopping")

    @property
    def n_qubits(self) -> int:
        return self.qubit_bias.shape[0]

    @property
    def n_resonators(self) -> int:
        return self.resonator_freq.shape[0]

    def _require_field_freq(self) -> float:
        if self.field_freq is None:
            raise ValueError("this construction needs field_freq set on the spec")
        return self.field_freq


@dataclass(frozen=True)
class ScheduleSample:
    """A point on the linear annealing schedule: time t and s = t / T."""

    t: float
    s: float

    def __post_init__(self):
        if not (np.isfinite(self.t) and np.isfinite(self.s)):
            raise ValueError("schedule sample must be finite")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"schedule fraction s must lie in [0, 1], got {self.s}")

    @classmethod
    def from_time(cls, t: float, total_time: float) -> "ScheduleSample":
        return cls(t=float(t), s=float(t) / float(total_time))


def _check_space(spec: HybridProblemSpec, space: HilbertSpace) -> None:
    if space.n_qubits != spec.n_qubits or space.n_resonators != spec.n_resonators:
        raise ValueError(
            f"space has {space.n_qubits} qubits / {space.n_resonators} resonators, "
            f"spec wants {spec.n_qubits} / {spec.n_resonators}"
        )


class _SiteOps:
    """Embedded single-site operators for one space, built on demand."""

    def __init__(self, space: HilbertSpace):
        self.space = space
        self.dim = space.dim
        self._cache = {}

    def _embedded(self, kind: str, position: int) -> np.ndarray:
        # embed() would re-kron per call; build each factor chain once
        key = (kind, position)
        if key not in self._cache:
            if kind in ("sz", "sx"):
                sites = self.space.qubit_indices
                local = pauli(kind[-1]).matrix
            elif kind == "n":
                sites = self.space.resonator_indices
                local = None
            elif kind == "disp":
                sites = self.space.resonator_indices
                local = None
            elif kind == "a":
                sites = self.space.resonator_indices
                local = None
            site_index = sites[position]
            if local is None:
                trunc = self.space.sites[site_index].dim
                a = annihilation(trunc).matrix
                if kind == "n":
                    local = number(trunc).matrix
                elif kind == "disp":
                    local = a + a.conj().T
                else:
                    local = a
            mat = np.eye(1, dtype=complex)
            for i, site in enumerate(self.space.sites):
                mat = np.kron(mat, local if i == site_index else np.eye(site.dim))
            self._cache[key] = mat
        return self._cache[key]

    def sz(self, i):
        return self._embedded("sz", i)

    def sx(self, i):
        return self._embedded("sx", i)

    def n(self, j):
        return self._embedded("n", j)

    def disp(self, j):
        return self._embedded("disp", j)

    def a(self, j):
        return self._embedded("a", j)


def _assemble(
    space: HilbertSpace,
    *,
    sz=None,
    sx=None,
    zz=None,
    sz_number=None,
    sz_disp=None,
    mode_number=None,
    mode_disp=None,
    hopping=None,
) -> LinOp:
    """Sum coefficient arrays against the matching embedded operators."""
    ops = _SiteOps(space)
    total = np.zeros((space.dim, space.dim), dtype=complex)
    L, M = space.n_qubits, space.n_resonators
    if sz is not None:
        for i in range(L):
            if sz[i]:
                total += sz[i] * ops.sz(i)
    if sx is not None:
        for i in range(L):
            if sx[i]:
                total += sx[i] * ops.sx(i)
    if zz is not None:
        for i in range(L):
            for j in range(i + 1, L):
                if zz[i, j]:
                    total += zz[i, j] * (ops.sz(i) @ ops.sz(j))
    if sz_number is not None:
        for i in range(L):
            for j in range(M):
                if sz_number[i, j]:
                    total += sz_number[i, j] * (ops.sz(i) @ ops.n(j))
    if sz_disp is not None:
        for i in range(L):
            for j in range(M):
                if sz_disp[i, j]:
                    total += sz_disp[i, j] * (ops.sz(i) @ ops.disp(j))
    if mode_number is not None:
        for j in range(M):
            if mode_number[j]:
                total += mode_number[j] * ops.n(j)
    if mode_disp is not None:
        for j in range(M):
            if mode_disp[j]:
                total += mode_disp[j] * ops.disp(j)
    if hopping is not None:
        for i in range(M):
            for j in range(i + 1, M):
                if hopping[i, j]:
                    cross = ops.a(i) @ ops.a(j).conj().T
                    total += hopping[i, j] * (cross + cross.conj().T)
    return LinOp(space, total)


def build_problem_hamiltonian(spec: HybridProblemSpec, space: HilbertSpace) -> LinOp:
    """Static hybrid problem Hamiltonian (see module docstring for the form)."""
    _check_space(spec, space)
    return _assemble(
        space,
        sz=spec.qubit_bias,
        zz=spec.zz_coupling,
        sz_number=spec.number_coupling,
        sz_disp=spec.displacement_coupling,
        mode_number=spec.resonator_freq,
        mode_disp=spec.displacement_drive,
        hopping=spec.hopping,
    )


def build_driver_hamiltonian(spec: HybridProblemSpec, space: HilbertSpace) -> LinOp:
    """Driver Hamiltonian sum_m w_m n_m + sum_i (B_i / 2) sx_i.

    Mode frequencies come from `driver_freq` when set, else from
    `resonator_freq`.  Its ground state is the product of the sx = -1
    qubit states with every mode in vacuum, at energy -sum_i B_i / 2.
    """
    _check_space(spec, space)
    freq = spec.driver_freq if spec.driver_freq is not None else spec.resonator_freq
    return _assemble(space, sx=spec.transverse_field / 2.0, mode_number=freq)


def total_hamiltonian(h_driver: LinOp, h_problem: LinOp, sample) -> LinOp:
    """Scheduled Hamiltonian (1 - s) H_D + s H_P.

    `sample` is a :class:`ScheduleSample` or a bare fraction s in [0, 1].
    """
    if not isinstance(sample, ScheduleSample):
        sample = ScheduleSample(t=float(sample), s=float(sample))
    if h_driver.space != h_problem.space:
        raise ValueError("driver and problem Hamiltonians act on different spaces")
    return (1.0 - sample.s) * h_driver + sample.s * h_problem


def lab_frame_parts(spec: HybridProblemSpec, space: HilbertSpace):
    """Static / oscillating split of the lab-frame Hamiltonians.

    Returns (p_static, p_mod, d_static, d_mod) such that

        problem(t) = p_static + cos(w t) * p_mod
        driver(t)  = d_static + cos(w t) * d_mod

    with w = `spec.field_freq`.  The qubit bias enters the lab-frame
    forms as (h_i / 2) sz_i; the transverse term oscillates at full
    strength B_i.  Integrators use this exact split directly.
    """
    _check_space(spec, space)
    spec._require_field_freq()
    p_static = _assemble(
        space,
        sz=spec.qubit_bias / 2.0,
        zz=spec.zz_coupling,
        sz_number=spec.number_coupling,
        mode_number=spec.resonator_freq,
        hopping=spec.hopping,
    )
    p_mod = _assemble(
        space,
        sz_disp=spec.displacement_coupling,
        mode_disp=spec.displacement_drive,
    )
    d_static = _assemble(space, sz=spec.qubit_bias / 2.0, mode_number=spec.resonator_freq)
    d_mod = _assemble(space, sx=spec.transverse_field)
    return p_static, p_mod, d_static, d_mod


def build_lab_frame_problem(spec: HybridProblemSpec, space: HilbertSpace, t: float) -> LinOp:
    """Lab-frame problem Hamiltonian at time t."""
    p_static, p_mod, _, _ = lab_frame_parts(spec, space)
    return p_static + float(np.cos(spec.field_freq * t)) * p_mod


def build_lab_frame_driver(spec: HybridProblemSpec, space: HilbertSpace, t: float) -> LinOp:
    """Lab-frame driver Hamiltonian at time t."""
    _, _, d_static, d_mod = lab_frame_parts(spec, space)
    return d_static + float(np.cos(spec.field_freq * t)) * d_mod


def build_lab_frame(
    spec: HybridProblemSpec, space: HilbertSpace, t: float, total_time: float
) -> LinOp:
    """Scheduled lab-frame Hamiltonian (1 - t/T) driver(t) + (t/T) problem(t)."""
    p_static, p_mod, d_static, d_mod = lab_frame_parts(spec, space)
    c = float(np.cos(spec.field_freq * t))
    sample = ScheduleSample.from_time(t, total_time)
    return total_hamiltonian(d_static + c * d_mod, p_static + c * p_mod, sample)


def build_effective(spec: HybridProblemSpec, space: HilbertSpace):
    """Rotating-frame effective pair (H_P_eff, H_D_eff) under the RWA.

    Relative to the lab-frame forms: qubit biases and mode frequencies
    become detunings against the field frequency, and the oscillating
    couplings (displacement coupling, displacement drive, transverse
    field) are halved.
    """
    _check_space(spec, space)
    w = spec._require_field_freq()
    detuned_bias = (spec.qubit_bias - w) / 2.0
    detuned_freq = spec.resonator_freq - w
    hp_eff = _assemble(
        space,
        sz=detuned_bias,
        zz=spec.zz_coupling,
        sz_number=spec.number_coupling,
        sz_disp=spec.displacement_coupling / 2.0,
        mode_number=detuned_freq,
        mode_disp=spec.displacement_drive / 2.0,
        hopping=spec.hopping,
    )
    hd_eff = _assemble(
        space,
        sz=detuned_bias,
        sx=spec.transverse_field / 2.0,
        mode_number=detuned_freq,
    )
    return hp_eff, hd_eff


def rotating_transform(space: HilbertSpace, spec: HybridProblemSpec, t: float) -> LinOp:
    """Frame unitary U(t) = exp(i w t (sum_k sz_k / 2 + sum_m n_m)).

    The generator is diagonal in the product basis, so U is computed by
    exponentiating its diagonal elementwise; U is unitary to rounding.
    At w t = 2 pi n the conjugation U^dag H U is the identity map up to
    a global phase.
    """
    _check_space(spec, space)
    w = spec._require_field_freq()
    ops = _SiteOps(space)
    phases = np.zeros(space.dim)
    for i in range(space.n_qubits):
        phases += 0.5 * np.real(np.diag(ops.sz(i)))
    for j in range(space.n_resonators):
        phases += np.real(np.diag(ops.n(j)))
    return LinOp(space, np.diag(np.exp(1j * w * t * phases)))
