"""Hybrid quantum annealing simulator for small mixed-integer quadratic programs.

Binary decisions ride on qubits, continuous amounts on the quadrature of
truncated harmonic resonators.  The package encodes a penalized quadratic
cost as a coupled qubit-resonator Hamiltonian, anneals it from a trivial
driver, decodes expectation values back into a candidate solution, and
cross-checks everything against an exact classical enumeration.
"""

from .hilbert import (
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
from .model import (
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
from .mip import DecodedSolution, EncodedProblem, MipInstance, decode, encode, penalized_cost
from .oracle import OracleSolution, SectorSolution, grid_check, solve, solve_sector
from .dynamics import (
    AnnealRun,
    EnergyDiagram,
    IntegrationError,
    StroboscopicComparison,
    Trajectory,
    adiabaticity_metric,
    energy_diagram,
    evolve,
    ground_state,
    rwa_budget,
    spectrum,
    stroboscopic_compare,
)

__version__ = "0.1.0"

__all__ = [
    "HilbertSpace",
    "LinOp",
    "Qubit",
    "Resonator",
    "StateVector",
    "annihilation",
    "coherent",
    "commutator",
    "creation",
    "embed",
    "expectation",
    "identity",
    "number",
    "pauli",
    "HybridProblemSpec",
    "ScheduleSample",
    "build_driver_hamiltonian",
    "build_effective",
    "build_lab_frame",
    "build_lab_frame_driver",
    "build_lab_frame_problem",
    "build_problem_hamiltonian",
    "lab_frame_parts",
    "rotating_transform",
    "total_hamiltonian",
    "DecodedSolution",
    "EncodedProblem",
    "MipInstance",
    "decode",
    "encode",
    "penalized_cost",
    "OracleSolution",
    "SectorSolution",
    "grid_check",
    "solve",
    "solve_sector",
    "AnnealRun",
    "EnergyDiagram",
    "IntegrationError",
    "StroboscopicComparison",
    "Trajectory",
    "adiabaticity_metric",
    "energy_diagram",
    "evolve",
    "ground_state",
    "rwa_budget",
    "spectrum",
    "stroboscopic_compare",
    "__version__",
]
