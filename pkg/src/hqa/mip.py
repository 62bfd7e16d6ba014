"""Production-planning MIP, its penalty form, and the quantum encoding.

The planning problem chooses, for each of K production lines, a binary
investment decision y_i and a production quantity x_i, minimizing

    f(y, x) = sum_i (c_i - ct_i y_i) x_i + sum_i d_i x_i^2
            + sum_i b_i y_i + lam (sum_i x_i - A)^2

where the quadratic penalty relaxes the total-production constraint
sum_i x_i = A.  :func:`encode` maps this cost onto a qubit-resonator
problem Hamiltonian by the replacements

    y_i -> (1 + sz_i) / 2,    x_i -> (a_i + a_i^dag) / 2,
    x_i^2 -> a_i^dag a_i,

applied term by term, except that the penalty square is kept as a
literal operator square of (sum_i quadratures - A), not expanded
through the x^2 replacement.  :func:`decode` reads (y, x) back off a
state as qubit and quadrature expectations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import HilbertSpace, LinOp, StateVector, annihilation, embed, expectation, identity, pauli
from .model import HybridProblemSpec, build_driver_hamiltonian, build_problem_hamiltonian

__all__ = ["MipInstance", "DecodedSolution", "EncodedProblem", "penalized_cost", "encode", "decode"]

# Slack on decoded binaries; sector structure keeps them at {0,1} to rounding.
_BINARY_TOL = 1e-6


@dataclass(frozen=True)
class MipInstance:
    """Data of one production-planning problem.

    Parameters
    ----------
    required_total : float
        Target total production A.
    investment_cost : array (K,)
        Fixed cost b_i of investing in line i.
    unit_cost : array (K,)
        Linear production cost c_i.
    cost_reduction : array (K,)
        Reduction ct_i of the unit cost when line i is invested in.
    quadratic_cost : array (K,)
        Coefficients d_i of the quadratic cost growth; must be positive.
    penalty_weight : float
        Weight lam of the squared constraint violation; nonnegative.
    """

    required_total: float
    investment_cost: np.ndarray
    unit_cost: np.ndarray
    cost_reduction: np.ndarray
    quadratic_cost: np.ndarray
    penalty_weight: float

    def __post_init__(self):
        set_ = object.__setattr__
        b = np.atleast_1d(np.array(self.investment_cost, dtype=float))
        k = b.shape[0]
        if k < 1:
            raise ValueError("instance needs at least one line")
        fields = {
            "investment_cost": b,
            "unit_cost": np.atleast_1d(np.array(self.unit_cost, dtype=float)),
            "cost_reduction": np.atleast_1d(np.array(self.cost_reduction, dtype=float)),
            "quadratic_cost": np.atleast_1d(np.array(self.quadratic_cost, dtype=float)),
        }
        for name, arr in fields.items():
            if arr.shape != (k,):
                raise ValueError(f"{name} must have shape ({k},), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arr.flags.writeable = False
            set_(self, name, arr)
        if np.any(self.quadratic_cost <= 0):
            raise ValueError("quadratic_cost entries must be positive")
        set_(self, "required_total", float(self.required_total))
        set_(self, "penalty_weight", float(self.penalty_weight))
        if not np.isfinite(self.required_total):
            raise ValueError("required_total must be finite")
        if not (np.isfinite(self.penalty_weight) and self.penalty_weight >= 0):
            raise ValueError("penalty_weight must be nonnegative")

    @property
    def line_count(self) -> int:
        return self.investment_cost.shape[0]


def penalized_cost(inst: MipInstance, y, x) -> float:
    """Penalized planning cost f(y, x); see the module docstring."""
    k = inst.line_count
    y = np.broadcast_to(np.asarray(y, dtype=float), (k,))
    x = np.broadcast_to(np.asarray(x, dtype=float), (k,))
    unit = (inst.unit_cost - inst.cost_reduction * y) @ x
    quad = inst.quadratic_cost @ (x * x)
    invest = inst.investment_cost @ y
    violation = float(np.sum(x)) - inst.required_total
    return float(unit + quad + invest + inst.penalty_weight * violation**2)


@dataclass(frozen=True)
class DecodedSolution:
    """(y, x) read off a quantum state.

    `y` and `x` are raw expectation values, `y_rounded` the nearest
    binaries (ties toward 0, i.e. no investment), `cost` the penalized
    cost at (y_rounded, x), and `nonneg` records whether every x_i is
    nonnegative - the encoding never enforces that constraint.
    """

    y: np.ndarray
    x: np.ndarray
    y_rounded: np.ndarray
    cost: float
    nonneg: bool


@dataclass(frozen=True)
class EncodedProblem:
    """Result of :func:`encode`: coefficient record plus the Hamiltonian recipe.

    `coefficients` carries every term expressible in the hybrid
    coefficient vocabulary; the penalty square and the scalar offset are
    applied on top by :meth:`problem_hamiltonian`, since an operator
    square and constants have no coefficient-record slot.
    """

    instance: MipInstance
    coefficients: HybridProblemSpec
    scalar_offset: float

    def space(self, truncation: int) -> HilbertSpace:
        """One qubit and one resonator per line, qubits first."""
        k = self.instance.line_count
        return HilbertSpace.standard(k, k, truncation)

    def quadrature_sum(self, space: HilbertSpace) -> LinOp:
        """sum_i (a_i + a_i^dag) / 2 over all resonators."""
        total = None
        for site in space.resonator_indices:
            a = annihilation(space.sites[site].dim)
            disp = embed(space, site, a + a.dagger())
            total = disp if total is None else total + disp
        return 0.5 * total

    def problem_hamiltonian(self, space: HilbertSpace) -> LinOp:
        """Full problem Hamiltonian: coefficient terms, scalar offset, and
        the literal operator square of the penalty."""
        inst = self.instance
        h = build_problem_hamiltonian(self.coefficients, space)
        h = h + self.scalar_offset * identity(space)
        shifted = self.quadrature_sum(space) - inst.required_total * identity(space)
        return h + inst.penalty_weight * (shifted @ shifted)

    def driver_hamiltonian(self, space: HilbertSpace) -> LinOp:
        return build_driver_hamiltonian(self.coefficients, space)


def encode(inst: MipInstance, transverse_field=None, driver_freq=None) -> EncodedProblem:
    """Map a MipInstance onto the hybrid coefficient record.

    Term-by-term application of the operator replacements gives

        (c_i - ct_i y_i) x_i -> ((c_i - ct_i/2)/2) (a+a^dag)
                                - (ct_i/4) sz (a+a^dag)
        d_i x_i^2            -> d_i n_i
        b_i y_i              -> (b_i/2) sz_i + b_i/2

    so the record holds those coefficients plus the accumulated scalar
    offset; the penalty square is left to the recipe.  `transverse_field`
    and `driver_freq` (defaults: all ones) populate the driver data.

    Parameters
    ----------
    inst : MipInstance
    transverse_field : array (K,), optional
        Driver field strengths B_i; the driver applies (B_i / 2) sx_i.
    driver_freq : array (K,), optional
        Driver resonator frequencies.

    Returns
    -------
    EncodedProblem
    """
    k = inst.line_count
    if transverse_field is None:
        transverse_field = np.ones(k)
    if driver_freq is None:
        driver_freq = np.ones(k)
    coefficients = HybridProblemSpec(
        qubit_bias=inst.investment_cost / 2.0,
        resonator_freq=inst.quadratic_cost,
        displacement_coupling=np.diag(-inst.cost_reduction / 4.0),
        displacement_drive=(inst.unit_cost - inst.cost_reduction / 2.0) / 2.0,
        transverse_field=transverse_field,
        driver_freq=driver_freq,
    )
    return EncodedProblem(
        instance=inst,
        coefficients=coefficients,
        scalar_offset=float(np.sum(inst.investment_cost) / 2.0),
    )


def decode(inst: MipInstance, state: StateVector) -> DecodedSolution:
    """Read (y, x) off a state as expectation values.

    y_i = <(1 + sz_i)/2> on qubit i, x_i = <(a_i + a_i^dag)/2> on
    resonator i; binaries are rounded at 0.5 with ties toward 0 and the
    cost is evaluated at (y_rounded, x).
    """
    space = state.space
    k = inst.line_count
    if space.n_qubits != k or space.n_resonators != k:
        raise ValueError(
            f"state space has {space.n_qubits} qubits / {space.n_resonators} resonators, "
            f"instance has {k} lines"
        )
    sz = pauli("z")
    y = np.array(
        [(1.0 + expectation(embed(space, site, sz), state)) / 2.0 for site in space.qubit_indices]
    )
    x = np.empty(k)
    for j, site in enumerate(space.resonator_indices):
        a = annihilation(space.sites[site].dim)
        x[j] = expectation(embed(space, site, 0.5 * (a + a.dagger())), state)
    if np.any(y < -_BINARY_TOL) or np.any(y > 1.0 + _BINARY_TOL):
        raise ValueError(f"decoded binaries {y} fall outside [0, 1]")
    y_rounded = (y > 0.5).astype(int)
    return DecodedSolution(
        y=y,
        x=x,
        y_rounded=y_rounded,
        cost=penalized_cost(inst, y_rounded, x),
        nonneg=bool(np.all(x >= -1e-9)),
    )
