"""Independent classical ground truth for the planning problem.

For a fixed binary assignment y the penalized cost is a strictly convex
quadratic in x (the Hessian 2 diag(d) + 2 lam 11^T is positive definite
for d > 0), so each sector has a closed-form minimizer from one K x K
linear solve.  :func:`solve` enumerates all 2^K sectors and takes the
global minimum; :func:`grid_check` brute-forces a sector on a grid as a
cross-check that shares no code with the linear solve.

Nothing in this module touches operators or states; it exists so the
quantum results can be validated against an implementation with
completely different failure modes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mip import MipInstance, penalized_cost

__all__ = ["SectorSolution", "OracleSolution", "solve_sector", "solve", "grid_check"]

# 2^K sectors; above this the enumeration is no longer "small".
_MAX_LINES = 20


@dataclass(frozen=True)
class SectorSolution:
    """Closed-form minimizer of one binary sector.

    `stationarity_residual` is the max-norm of the gradient at x, and
    `condition_number` that of the sector Hessian; both are diagnostics
    recorded with every solve.  `nonneg` flags whether the unconstrained
    minimizer respects x >= 0 (checked, never enforced).
    """

    y: tuple
    x: np.ndarray
    cost: float
    stationarity_residual: float
    nonneg: bool
    condition_number: float


@dataclass(frozen=True)
class OracleSolution:
    """All sector solutions plus the global optimum."""

    sectors: tuple
    y: tuple
    x: np.ndarray
    cost: float

    def to_json_dict(self) -> dict:
        return {
            "y": list(self.y),
            "x": [float(v) for v in self.x],
            "cost": self.cost,
            "sectors": [
                {
                    "y": list(s.y),
                    "x": [float(v) for v in s.x],
                    "cost": s.cost,
                    "stationarity_residual": s.stationarity_residual,
                    "nonneg": s.nonneg,
                    "condition_number": s.condition_number,
                }
                for s in self.sectors
            ],
        }


def solve_sector(inst: MipInstance, y) -> SectorSolution:
    """Minimize the penalized cost over x at fixed binary y.

    Solves (2 diag(d) + 2 lam 11^T) x = -(c - ct * y) + 2 lam A 1 and
    evaluates the cost at the solution.
    """
    k = inst.line_count
    y = np.asarray(y, dtype=float)
    if y.shape != (k,):
        raise ValueError(f"y must have shape ({k},), got {y.shape}")
    lam = inst.penalty_weight
    hessian = 2.0 * np.diag(inst.quadratic_cost) + 2.0 * lam * np.ones((k, k))
    rhs = -(inst.unit_cost - inst.cost_reduction * y) + 2.0 * lam * inst.required_total
    try:
        x = np.linalg.solve(hessian, rhs)
    except np.linalg.LinAlgError as err:
        raise ValueError(f"ill-posed instance: sector Hessian is singular ({err})") from err
    residual = float(np.max(np.abs(hessian @ x - rhs)))
    return SectorSolution(
        y=tuple(int(v) for v in y),
        x=x,
        cost=penalized_cost(inst, y, x),
        stationarity_residual=residual,
        nonneg=bool(np.all(x >= 0)),
        condition_number=float(np.linalg.cond(hessian)),
    )


def solve(inst: MipInstance) -> OracleSolution:
    """Global optimum by enumerating every binary sector.

    Ties between sector costs resolve to the lexicographically smallest
    y, which is the first one visited.
    """
    k = inst.line_count
    if k > _MAX_LINES:
        raise ValueError(f"sector enumeration supports at most {_MAX_LINES} lines, got {k}")
    sectors = []
    best = None
    for y in itertools.product((0, 1), repeat=k):
        sol = solve_sector(inst, np.array(y, dtype=float))
        sectors.append(sol)
        if best is None or sol.cost < best.cost:
            best = sol
    return OracleSolution(sectors=tuple(sectors), y=best.y, x=best.x, cost=best.cost)


def grid_check(inst: MipInstance, y, x_range, resolution: int = 400):
    """Brute-force sector minimum over a uniform grid.

    Parameters
    ----------
    inst : MipInstance
    y : binary vector
        Sector to scan.
    x_range : (float, float)
        Common [low, high] range for every axis.
    resolution : int
        Points per axis, at least 100.

    Returns
    -------
    (x_best, cost_best)
        Grid point of least cost.  Always >= the closed-form sector
        cost; approaches it as the grid refines.
    """
    k = inst.line_count
    if resolution < 100:
        raise ValueError(f"resolution must be at least 100 per axis, got {resolution}")
    if resolution**k > 20_000_000:
        raise ValueError(f"grid of {resolution}^{k} points is too large")
    y = np.broadcast_to(np.asarray(y, dtype=float), (k,))
    lo, hi = float(x_range[0]), float(x_range[1])
    axis = np.linspace(lo, hi, resolution)
    grids = np.meshgrid(*([axis] * k), indexing="ij", sparse=True)
    cost = np.zeros([resolution] * k)
    total = np.zeros([resolution] * k)
    for i in range(k):
        ci = inst.unit_cost[i] - inst.cost_reduction[i] * y[i]
        cost = cost + ci * grids[i] + inst.quadratic_cost[i] * grids[i] ** 2
        total = total + grids[i]
    cost = cost + inst.investment_cost @ y
    cost = cost + inst.penalty_weight * (total - inst.required_total) ** 2
    flat_idx = int(np.argmin(cost))
    idx = np.unravel_index(flat_idx, cost.shape)
    x_best = np.array([axis[i] for i in idx])
    return x_best, float(cost[idx])
