"""Experiment runner: declarative configs in, data files out.

Four modes share one config shape:

* ``mip-anneal`` - encode a mixed-integer instance, anneal, decode, and
  compare against diagonalization and the classical oracle,
* ``appendix-lab-vs-eff`` - drive the lab-frame schedule next to its
  rotating-frame effective counterpart and difference them at whole
  periods of the drive,
* ``energy-diagram`` - instantaneous low-lying spectrum across the
  schedule, with the minimum gap located,
* ``oracle-only`` - classical sector enumeration plus a brute-force
  grid cross-check, no dynamics.

Every run writes into ``<out>/<name>/``: ``trajectory.csv`` (or
``diagram.csv``), ``summary.json`` with pass/fail checks, and SVG line
plots.  Output is deterministic: identical configs produce identical
bytes.  The two built-in presets carry the reference parameter sets so
the headline experiments need no config files.

Exit codes: 0 success, 1 a ``--check`` tolerance failed, 2 bad usage or
config, 3 execution failure (integration diagnostics on stderr).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli

from .dynamics import (
    AnnealRun,
    IntegrationError,
    adiabaticity_metric,
    energy_diagram,
    evolve,
    ground_state,
    rwa_budget,
    spectrum,
    stroboscopic_compare,
)
from .hilbert import HilbertSpace
from .mip import MipInstance, decode, encode
from .model import HybridProblemSpec, total_hamiltonian
from .oracle import grid_check, solve

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "ConvergenceReport",
    "load_config",
    "preset",
    "preset_names",
    "run_experiment",
    "write_artifacts",
    "convergence_report",
    "main",
]

MODES = ("mip-anneal", "appendix-lab-vs-eff", "energy-diagram", "oracle-only")

_EXIT_OK = 0
_EXIT_CHECK_FAILED = 1
_EXIT_CONFIG = 2
_EXIT_EXECUTION = 3

_CONVERGENCE_TOL = 1e-4


class ConfigError(ValueError):
    """Bad config file or inconsistent options; message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, resolved and validated.

    `samples` is the trajectory grid size for mip-anneal and the s-grid
    size for energy-diagram; appendix runs sample stroboscopically and
    use `oversample` points per drive period instead.  `levels` is the
    number of eigenvalues traced by energy-diagram.  `out` optionally
    pins the output root (flags and HQA_OUT otherwise decide).
    """

    name: str
    mode: str
    instance: object
    truncation: int
    total_time: float
    integrator_tol: float
    samples: int = 400
    oversample: int = 1
    levels: int = 4
    out: str | None = None

    def __post_init__(self):
        if not self.name or not all(c.isalnum() or c in "._-" for c in self.name):
            raise ConfigError(
                f"name must be a plain directory name, got {self.name!r}"
            )
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.mode in ("mip-anneal", "oracle-only"):
            if not isinstance(self.instance, MipInstance):
                raise ConfigError(f"mode {self.mode} needs an [instance] section")
        elif self.mode == "appendix-lab-vs-eff":
            if not isinstance(self.instance, HybridProblemSpec):
                raise ConfigError("mode appendix-lab-vs-eff needs a [problem] section")
        elif not isinstance(self.instance, (MipInstance, HybridProblemSpec)):
            raise ConfigError("mode energy-diagram needs [instance] or [problem]")
        if self.truncation < 2:
            raise ConfigError(f"truncation must be at least 2, got {self.truncation}")
        if self.total_time <= 0:
            raise ConfigError(f"total_time must be positive, got {self.total_time}")
        if self.integrator_tol <= 0:
            raise ConfigError(f"integrator_tol must be positive, got {self.integrator_tol}")
        if self.samples < 2:
            raise ConfigError(f"samples must be at least 2, got {self.samples}")
        if self.oversample < 1:
            raise ConfigError(f"oversample must be at least 1, got {self.oversample}")
        if self.levels < 2:
            raise ConfigError(f"levels must be at least 2, got {self.levels}")


def preset(name: str) -> ExperimentConfig:
    """Built-in parameter sets for the two reference experiments."""
    if name == "paper-fig1-3":
        return ExperimentConfig(
            name="paper-fig1-3",
            mode="mip-anneal",
            instance=MipInstance(
                required_total=2.0,
                investment_cost=(1.0, 2.0),
                unit_cost=(2.1, 2.2),
                cost_reduction=(1.8, 2.0),
                quadratic_cost=(3.3, 3.8),
                penalty_weight=15.0,
            ),
            truncation=8,
            total_time=4000.0,
            integrator_tol=1e-8,
            samples=400,
        )
    if name == "paper-appendix":
        return ExperimentConfig(
            name="paper-appendix",
            mode="appendix-lab-vs-eff",
            instance=HybridProblemSpec(
                qubit_bias=[153.7],
                resonator_freq=[154.1],
                number_coupling=[[0.15]],
                displacement_coupling=[[0.25]],
                displacement_drive=[0.30],
                transverse_field=[0.55],
                field_freq=153.9,
            ),
            truncation=10,
            total_time=408.2,
            integrator_tol=1e-9,
            samples=200,
        )
    raise ConfigError(f"unknown preset {name!r}; have {', '.join(preset_names())}")


def preset_names() -> tuple:
    return ("paper-fig1-3", "paper-appendix")


_TOP_KEYS = {
    "name",
    "mode",
    "truncation",
    "total_time",
    "integrator_tol",
    "samples",
    "oversample",
    "levels",
    "out",
}
_INSTANCE_KEYS = {
    "required_total",
    "investment_cost",
    "unit_cost",
    "cost_reduction",
    "quadratic_cost",
    "penalty_weight",
}
_PROBLEM_KEYS = {
    "qubit_bias",
    "resonator_freq",
    "zz_coupling",
    "number_coupling",
    "displacement_coupling",
    "displacement_drive",
    "hopping",
    "transverse_field",
    "driver_freq",
    "field_freq",
}


def _section(raw: dict, key: str, allowed: set) -> dict:
    body = raw.get(key)
    if body is None:
        return {}
    if not isinstance(body, dict):
        raise ConfigError(f"[{key}] must be a table")
    for field in body:
        if field not in allowed:
            raise ConfigError(f"unknown field {key}.{field}")
    return body


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment file.

    Top-level keys set run parameters; exactly one of [instance]
    (mixed-integer data) or [problem] (hybrid coefficients) describes
    what to run.  Defaults: mode from the section present, truncation
    8 for [instance] / 10 for [problem], integrator_tol 1e-8, samples
    400, name from the file stem.
    """
    path = Path(path)
    try:
        raw = tomli.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        # tomli reports line and column in the message
        raise ConfigError(f"parse error in {path}: {exc}") from exc

    for key in raw:
        if key not in _TOP_KEYS and key not in ("instance", "problem"):
            raise ConfigError(f"unknown top-level field {key!r} in {path}")

    inst_body = _section(raw, "instance", _INSTANCE_KEYS)
    prob_body = _section(raw, "problem", _PROBLEM_KEYS)
    if bool(inst_body) == bool(prob_body):
        raise ConfigError(f"{path}: exactly one of [instance] or [problem] is required")

    try:
        if inst_body:
            for field in _INSTANCE_KEYS:
                if field not in inst_body:
                    raise ConfigError(f"{path}: missing field instance.{field}")
            instance = MipInstance(**inst_body)
            default_mode, default_n = "mip-anneal", 8
        else:
            instance = HybridProblemSpec(**prob_body)
            default_mode, default_n = "appendix-lab-vs-eff", 10
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        section = "instance" if inst_body else "problem"
        raise ConfigError(f"{path}: invalid [{section}]: {exc}") from exc

    try:
        return ExperimentConfig(
            name=str(raw.get("name", path.stem)),
            mode=str(raw.get("mode", default_mode)),
            instance=instance,
            truncation=int(raw.get("truncation", default_n)),
            total_time=float(raw.get("total_time", 0.0)),
            integrator_tol=float(raw.get("integrator_tol", 1e-8)),
            samples=int(raw.get("samples", 400)),
            oversample=int(raw.get("oversample", 1)),
            levels=int(raw.get("levels", 4)),
            out=raw.get("out"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise ConfigError(f"{path}: {exc}") from None
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# checks and results


def _check(value: float, tolerance: float, comparison: str = "max_below") -> dict:
    """One pass/fail record: value vs tolerance.

    `max_below` passes when value <= tolerance (error-style);
    `min_above` passes when value > tolerance (gap-style).
    """
    if comparison == "max_below":
        passed = value <= tolerance
    elif comparison == "min_above":
        passed = value > tolerance
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    return {
        "value": float(value),
        "tolerance": float(tolerance),
        "comparison": comparison,
        "passed": bool(passed),
    }


@dataclass(frozen=True)
class ExperimentResult:
    """In-memory artifacts of one run, before anything touches disk.

    `tables` maps CSV file names to (columns, rows); `plots` maps SVG
    file names to document text; `report` is the flat observable map
    the convergence certifier differences.
    """

    config: ExperimentConfig
    summary: dict
    tables: dict
    plots: dict
    report: dict

    @property
    def checks(self) -> dict:
        return self.summary["checks"]

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _fmt_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG plotting: simple deterministic polylines, never load-bearing

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_PLOT_W, _PLOT_H = 720, 440
_MARG_L, _MARG_R, _MARG_T, _MARG_B = 74, 16, 34, 50
_MAX_PLOT_POINTS = 4000


def _ticks(lo: float, hi: float, n: int = 5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _svg_plot(title, xlabel, ylabel, series, *, hlines=(), vlines=()) -> str:
    """Line plot of (label, xs, ys) triples with optional dashed guides."""
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = float(ys_all.min()), float(ys_all.max())
    for _, y in hlines:
        y0, y1 = min(y0, y), max(y1, y)
    if x1 - x0 <= 0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pad = 0.05 * (y1 - y0) or max(abs(y0), 1.0) * 0.1
    y0, y1 = y0 - pad, y1 + pad

    iw = _PLOT_W - _MARG_L - _MARG_R
    ih = _PLOT_H - _MARG_T - _MARG_B

    def px(x):
        return _MARG_L + (x - x0) / (x1 - x0) * iw

    def py(y):
        return _MARG_T + (y1 - y) / (y1 - y0) * ih

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_PLOT_W} {_PLOT_H}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{_PLOT_W}" height="{_PLOT_H}" fill="white"/>',
        f'<text x="{_PLOT_W / 2:.2f}" y="20" text-anchor="middle" '
        f'font-size="14">{title}</text>',
    ]
    for tx in _ticks(x0, x1):
        x = px(tx)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARG_T}" x2="{x:.2f}" '
            f'y2="{_PLOT_H - _MARG_B}" stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_PLOT_H - _MARG_B + 16}" '
            f'text-anchor="middle">{tx:.6g}</text>'
        )
    for ty in _ticks(y0, y1):
        y = py(ty)
        parts.append(
            f'<line x1="{_MARG_L}" y1="{y:.2f}" x2="{_PLOT_W - _MARG_R}" '
            f'y2="{y:.2f}" stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{_MARG_L - 6}" y="{y + 4:.2f}" text-anchor="end">{ty:.6g}</text>'
        )
    for label, y in hlines:
        yy = py(y)
        parts.append(
            f'<line x1="{_MARG_L}" y1="{yy:.2f}" x2="{_PLOT_W - _MARG_R}" '
            f'y2="{yy:.2f}" stroke="#555555" stroke-dasharray="6 4"/>'
        )
        parts.append(
            f'<text x="{_PLOT_W - _MARG_R - 4}" y="{yy - 5:.2f}" '
            f'text-anchor="end" fill="#555555">{label}</text>'
        )
    for label, x in vlines:
        xx = px(x)
        parts.append(
            f'<line x1="{xx:.2f}" y1="{_MARG_T}" x2="{xx:.2f}" '
            f'y2="{_PLOT_H - _MARG_B}" stroke="#555555" stroke-dasharray="6 4"/>'
        )
        parts.append(
            f'<text x="{xx + 4:.2f}" y="{_MARG_T + 14}" fill="#555555">{label}</text>'
        )
    for i, (label, xs, ys) in enumerate(series):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        stride = max(1, int(np.ceil(xs.size / _MAX_PLOT_POINTS)))
        idx = np.arange(0, xs.size, stride)
        if idx[-1] != xs.size - 1:
            idx = np.append(idx, xs.size - 1)
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs[idx], ys[idx]))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = _MARG_T + 16 + 16 * i
        parts.append(
            f'<line x1="{_MARG_L + 8}" y1="{ly - 4}" x2="{_MARG_L + 30}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{_MARG_L + 36}" y="{ly}">{label}</text>')
    parts.append(
        f'<rect x="{_MARG_L}" y="{_MARG_T}" width="{iw}" height="{ih}" '
        f'fill="none" stroke="black"/>'
    )
    parts.append(
        f'<text x="{_MARG_L + iw / 2:.2f}" y="{_PLOT_H - 12}" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{_MARG_T + ih / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MARG_T + ih / 2:.2f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# mode implementations


def _common_summary(config: ExperimentConfig) -> dict:
    return {
        "name": config.name,
        "mode": config.mode,
        "truncation": config.truncation,
        "total_time": config.total_time,
        "integrator_tol": config.integrator_tol,
        "samples": config.samples,
    }


def _run_mip_anneal(config: ExperimentConfig) -> ExperimentResult:
    inst = config.instance
    enc = encode(inst)
    space = enc.space(config.truncation)
    hp = enc.problem_hamiltonian(space)
    hd = enc.driver_hamiltonian(space)

    run = AnnealRun.standard(
        hd,
        hp,
        config.total_time,
        integrator_tol=config.integrator_tol,
        samples=config.samples,
    )
    traj = evolve(run, run.initial_state())

    energies, states = spectrum(hp, 2)
    e0 = float(energies[0])
    gap = float(energies[1] - energies[0])
    ground_dec = decode(inst, states[0])
    final_dec = decode(inst, traj.final_state)
    oracle_sol = solve(inst)

    k = inst.line_count
    t = traj.times
    s = t / config.total_time
    y_series = [(1.0 + traj.observable(f"sz_{i + 1}")) / 2.0 for i in range(k)]
    x_series = [traj.observable(f"disp_{j + 1}") / 2.0 for j in range(k)]
    norm = traj.observable("norm")
    energy = traj.observable("expect_HP")

    columns = (
        ["t", "s", "expect_HP"]
        + [f"expect_y{i + 1}" for i in range(k)]
        + [f"expect_x{i + 1}" for i in range(k)]
        + ["norm"]
    )
    rows = list(zip(t, s, energy, *y_series, *x_series, norm))

    # adiabaticity profile over the schedule; endpoint gaps are finite
    metric_grid = np.linspace(0.0, 1.0, 41)
    metric = [
        adiabaticity_metric(hd, hp, config.total_time, float(sv * config.total_time))
        for sv in metric_grid
    ]
    metric_max = float(np.max(metric))

    excess = float(energy[-1] - e0)
    y_err = float(np.max(np.abs(final_dec.y - np.array(oracle_sol.y, dtype=float))))
    x_err = float(np.max(np.abs(final_dec.x - oracle_sol.x)))
    checks = {
        "final_energy_excess": _check(excess, 1e-2),
        "final_y_error": _check(y_err, 0.05),
        "final_x_error": _check(x_err, 0.02),
        "norm_drift": _check(float(np.max(np.abs(norm - 1.0))), 1e-6),
        "adiabaticity_max": _check(metric_max, 0.1),
    }

    summary = _common_summary(config)
    summary.update(
        {
            "final": {
                "expect_HP": float(energy[-1]),
                "y": final_dec.y,
                "x": final_dec.x,
                "y_rounded": final_dec.y_rounded,
                "cost": final_dec.cost,
                "nonneg": final_dec.nonneg,
                "norm": float(norm[-1]),
            },
            "ground": {
                "energy": e0,
                "gap": gap,
                "y": ground_dec.y,
                "x": ground_dec.x,
                "y_rounded": ground_dec.y_rounded,
                "cost": ground_dec.cost,
                "nonneg": ground_dec.nonneg,
            },
            "excess_energy": excess,
            "adiabaticity": {"max": metric_max, "grid_points": metric_grid.size},
            "oracle": oracle_sol.to_json_dict(),
            "checks": checks,
        }
    )

    plots = {
        "energy.svg": _svg_plot(
            f"{config.name}: energy expectation",
            "t",
            "expect_HP",
            [("expect_HP", t, energy)],
            hlines=[(f"E0 = {e0:.6g}", e0)],
        ),
        "binaries.svg": _svg_plot(
            f"{config.name}: binary readouts",
            "t",
            "(1 + sz) / 2",
            [(f"y{i + 1}", t, y_series[i]) for i in range(k)],
        ),
        "continuous.svg": _svg_plot(
            f"{config.name}: quadrature readouts",
            "t",
            "(a + a^) / 2",
            [(f"x{j + 1}", t, x_series[j]) for j in range(k)]
            + [(f"x{j + 1}*", t, np.full_like(t, oracle_sol.x[j])) for j in range(k)],
        ),
    }

    report = {"excess_energy": excess}
    for i in range(k):
        report[f"final_y{i + 1}"] = float(final_dec.y[i])
    for j in range(k):
        report[f"final_x{j + 1}"] = float(final_dec.x[j])

    return ExperimentResult(
        config=config,
        summary=summary,
        tables={"trajectory.csv": (columns, rows)},
        plots=plots,
        report=report,
    )


def _trajectory_rows(traj, total_time, n_qubits, n_resonators):
    t = traj.times
    s = t / total_time
    cols = [t, s, traj.observable("expect_HP")]
    for i in range(n_qubits):
        cols.append((1.0 + traj.observable(f"sz_{i + 1}")) / 2.0)
    for j in range(n_resonators):
        cols.append(traj.observable(f"disp_{j + 1}") / 2.0)
    cols.append(traj.observable("norm"))
    return list(zip(*cols))


def _run_appendix(config: ExperimentConfig) -> ExperimentResult:
    spec = config.instance
    space = HilbertSpace.standard(spec.n_qubits, spec.n_resonators, config.truncation)
    cmp = stroboscopic_compare(
        spec,
        space,
        config.total_time,
        integrator_tol=config.integrator_tol,
        oversample=config.oversample,
    )
    budget = rwa_budget(spec, space)
    e0 = cmp.ground_energy
    nq, nr = spec.n_qubits, spec.n_resonators
    columns = (
        ["t", "s", "expect_HP"]
        + [f"expect_y{i + 1}" for i in range(nq)]
        + [f"expect_x{j + 1}" for j in range(nr)]
        + ["norm"]
    )

    lab_e = cmp.lab.observable("expect_HP")
    eff_e = cmp.effective.observable("expect_HP")
    diff_names = sorted(cmp.differences)
    cmp_columns = ["t", "s", "stroboscopic"] + [f"diff_{n}" for n in diff_names]
    cmp_rows = list(
        zip(
            cmp.times,
            cmp.times / cmp.total_time,
            cmp.stroboscopic_mask,
            *(cmp.differences[n] for n in diff_names),
        )
    )

    max_diffs = {n: cmp.max_difference(n) for n in diff_names}
    lab_excess = float(lab_e[-1] - e0)
    eff_excess = float(eff_e[-1] - e0)
    checks = {
        "stroboscopic_energy_agreement": _check(max_diffs["expect_HP"], budget),
        "final_excess_lab": _check(abs(lab_excess), budget),
        "final_excess_effective": _check(abs(eff_excess), budget),
        "norm_drift": _check(
            float(
                max(
                    np.max(np.abs(cmp.lab.observable("norm") - 1.0)),
                    np.max(np.abs(cmp.effective.observable("norm") - 1.0)),
                )
            ),
            1e-6,
        ),
    }

    summary = _common_summary(config)
    summary.update(
        {
            "oversample": config.oversample,
            "n_periods": cmp.n_periods,
            "snapped_total_time": cmp.total_time,
            "ground_energy": e0,
            "rwa_budget": budget,
            "final": {
                "lab_expect_HP": float(lab_e[-1]),
                "effective_expect_HP": float(eff_e[-1]),
                "lab_excess": lab_excess,
                "effective_excess": eff_excess,
            },
            "max_stroboscopic_difference": max_diffs,
            "checks": checks,
        }
    )

    t = cmp.times
    plots = {
        "energy.svg": _svg_plot(
            f"{config.name}: lab vs effective energy",
            "t",
            "expect_HP",
            [("lab frame", t, lab_e), ("effective", t, eff_e)],
            hlines=[(f"E0 = {e0:.6g}", e0)],
        ),
        "binaries.svg": _svg_plot(
            f"{config.name}: binary readouts",
            "t",
            "(1 + sz) / 2",
            [
                (f"lab y{i + 1}", t, (1.0 + cmp.lab.observable(f"sz_{i + 1}")) / 2.0)
                for i in range(nq)
            ]
            + [
                (f"eff y{i + 1}", t, (1.0 + cmp.effective.observable(f"sz_{i + 1}")) / 2.0)
                for i in range(nq)
            ],
        ),
        "continuous.svg": _svg_plot(
            f"{config.name}: quadrature readouts",
            "t",
            "(a + a^) / 2",
            [
                (f"lab x{j + 1}", t, cmp.lab.observable(f"disp_{j + 1}") / 2.0)
                for j in range(nr)
            ]
            + [
                (f"eff x{j + 1}", t, cmp.effective.observable(f"disp_{j + 1}") / 2.0)
                for j in range(nr)
            ],
        ),
    }

    report = {
        "lab_excess": lab_excess,
        "effective_excess": eff_excess,
        "max_strobo_diff_expect_HP": max_diffs["expect_HP"],
    }

    return ExperimentResult(
        config=config,
        summary=summary,
        tables={
            "trajectory.csv": (
                columns,
                _trajectory_rows(cmp.lab, cmp.total_time, nq, nr),
            ),
            "trajectory_effective.csv": (
                columns,
                _trajectory_rows(cmp.effective, cmp.total_time, nq, nr),
            ),
            "comparison.csv": (cmp_columns, cmp_rows),
        },
        plots=plots,
        report=report,
    )


def _diagram_pair(config: ExperimentConfig):
    if isinstance(config.instance, MipInstance):
        enc = encode(config.instance)
        space = enc.space(config.truncation)
        return enc.driver_hamiltonian(space), enc.problem_hamiltonian(space)
    spec = config.instance
    space = HilbertSpace.standard(spec.n_qubits, spec.n_resonators, config.truncation)
    from .model import build_effective

    hp_eff, hd_eff = build_effective(spec, space)
    return hd_eff, hp_eff


def _run_diagram(config: ExperimentConfig) -> ExperimentResult:
    hd, hp = _diagram_pair(config)
    grid = np.linspace(0.0, 1.0, config.samples)
    diagram = energy_diagram(
        lambda s: total_hamiltonian(hd, hp, s), grid, k=config.levels
    )

    columns = (
        ["s"] + [f"E{i}" for i in range(config.levels)] + ["gap", "is_min_gap"]
    )
    gaps = diagram.energies[:, 1] - diagram.energies[:, 0]
    rows = [
        tuple(
            [diagram.s[i]]
            + list(diagram.energies[i])
            + [gaps[i], i == diagram.index_at_min]
        )
        for i in range(diagram.s.size)
    ]

    checks = {"min_gap_positive": _check(diagram.min_gap, 0.0, "min_above")}
    summary = _common_summary(config)
    summary.update(
        {
            "levels": config.levels,
            "min_gap": diagram.min_gap,
            "s_at_min_gap": diagram.s_at_min,
            "start_energies": diagram.energies[0],
            "end_energies": diagram.energies[-1],
            "checks": checks,
        }
    )

    plots = {
        "diagram.svg": _svg_plot(
            f"{config.name}: instantaneous spectrum",
            "s",
            "energy",
            [(f"E{i}", diagram.s, diagram.energies[:, i]) for i in range(config.levels)],
            vlines=[(f"min gap = {diagram.min_gap:.6g}", diagram.s_at_min)],
        )
    }

    report = {"min_gap": diagram.min_gap, "s_at_min_gap": diagram.s_at_min}
    return ExperimentResult(
        config=config,
        summary=summary,
        tables={"diagram.csv": (columns, rows)},
        plots=plots,
        report=report,
    )


def _run_oracle(config: ExperimentConfig) -> ExperimentResult:
    inst = config.instance
    sol = solve(inst)

    # brute-force cross-check around the winning sector; the bound is the
    # worst quadratic increment over one grid cell
    span = float(np.max(np.abs(sol.x), initial=1.0)) + 0.5
    lo, hi = min(0.0, float(np.min(sol.x))) - 0.5, span
    resolution = max(100, config.samples)
    x_grid, cost_grid = grid_check(inst, sol.y, (lo, hi), resolution)
    cell = (hi - lo) / (resolution - 1)
    curvature = 2.0 * float(np.max(inst.quadratic_cost)) + 2.0 * inst.penalty_weight * inst.line_count
    grid_gap = float(cost_grid - sol.cost)
    grid_tol = 0.5 * curvature * inst.line_count * cell**2

    checks = {
        "grid_never_beats_oracle": _check(-grid_gap, 1e-9),
        "grid_matches_oracle": _check(grid_gap, grid_tol),
        "optimum_nonnegative": _check(float(np.min(sol.x)), -1e-9, "min_above"),
    }
    summary = _common_summary(config)
    summary.update(
        {
            "oracle": sol.to_json_dict(),
            "grid_check": {
                "x": x_grid,
                "cost": float(cost_grid),
                "resolution": resolution,
                "range": [lo, hi],
            },
            "checks": checks,
        }
    )
    report = {"oracle_cost": float(sol.cost)}
    for j in range(inst.line_count):
        report[f"oracle_x{j + 1}"] = float(sol.x[j])
    return ExperimentResult(
        config=config, summary=summary, tables={}, plots={}, report=report
    )


_RUNNERS = {
    "mip-anneal": _run_mip_anneal,
    "appendix-lab-vs-eff": _run_appendix,
    "energy-diagram": _run_diagram,
    "oracle-only": _run_oracle,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute one experiment in memory; no files are written."""
    return _RUNNERS[config.mode](config)


def write_artifacts(result: ExperimentResult, out_dir) -> Path:
    """Write summary.json, CSV tables, and SVG plots under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonify(result.summary), indent=2, sort_keys=True) + "\n"
    (out / "summary.json").write_text(text)
    for name, (columns, rows) in result.tables.items():
        (out / name).write_text(_csv_text(columns, rows))
    for name, svg in result.plots.items():
        (out / name).write_text(svg)
    return out


# ---------------------------------------------------------------------------
# convergence certification


@dataclass(frozen=True)
class ConvergenceReport:
    """Deltas of reported observables under refinement.

    Rows are (observable, base, doubled_truncation, halved_tolerance,
    delta_truncation, delta_tolerance); `converged` is True when every
    delta is below the acceptance threshold.
    """

    config: ExperimentConfig
    threshold: float
    rows: tuple

    @property
    def converged(self) -> bool:
        return all(r[4] < self.threshold and r[5] < self.threshold for r in self.rows)

    def table_text(self) -> str:
        header = (
            f"{'observable':<28}{'base':>20}{'2N':>20}{'tol/2':>20}"
            f"{'|dN|':>12}{'|dtol|':>12}  flag"
        )
        lines = [header]
        for name, base, two_n, half_tol, d_n, d_tol in self.rows:
            flag = "ok" if d_n < self.threshold and d_tol < self.threshold else "NOT CONVERGED"
            lines.append(
                f"{name:<28}{base:>20.12g}{two_n:>20.12g}{half_tol:>20.12g}"
                f"{d_n:>12.3e}{d_tol:>12.3e}  {flag}"
            )
        return "\n".join(lines)


def convergence_report(
    config: ExperimentConfig, threshold: float = _CONVERGENCE_TOL
) -> ConvergenceReport:
    """Re-run at doubled truncation and halved tolerance, difference results.

    Flags any reported observable whose delta meets or exceeds
    `threshold` under either refinement.
    """
    base = run_experiment(config).report
    doubled = run_experiment(
        dataclasses.replace(config, truncation=2 * config.truncation)
    ).report
    halved = run_experiment(
        dataclasses.replace(config, integrator_tol=config.integrator_tol / 2)
    ).report
    rows = tuple(
        (
            name,
            base[name],
            doubled[name],
            halved[name],
            abs(doubled[name] - base[name]),
            abs(halved[name] - base[name]),
        )
        for name in base
    )
    return ConvergenceReport(config=config, threshold=threshold, rows=rows)


_CONVERGENCE_COLUMNS = (
    "observable",
    "base",
    "doubled_truncation",
    "halved_tolerance",
    "delta_truncation",
    "delta_tolerance",
    "converged",
)


# ---------------------------------------------------------------------------
# entry point


def _resolve_config(args) -> ExperimentConfig:
    if (args.preset is None) == (args.config is None):
        raise ConfigError("exactly one of --preset or --config is required")
    config = preset(args.preset) if args.preset else load_config(args.config)
    if args.mode and args.mode != config.mode:
        config = dataclasses.replace(
            config, mode=args.mode, name=f"{config.name}-{args.mode}"
        )
    if args.truncation:
        config = dataclasses.replace(config, truncation=args.truncation)
    if args.tol:
        config = dataclasses.replace(config, integrator_tol=args.tol)
    return config


def _out_root(args, config: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    if config.out:
        return Path(config.out)
    return Path(os.environ.get("HQA_OUT", "runs"))


def _run_one(config: ExperimentConfig, out_root: str) -> dict:
    # module-level so a process pool can ship it to workers
    result = run_experiment(config)
    out = write_artifacts(result, Path(out_root) / config.name)
    return {
        "name": config.name,
        "out": str(out),
        "passed": result.all_passed,
        "checks": result.checks,
    }


def _print_checks(outcome: dict) -> None:
    print(f"{outcome['name']}: artifacts in {outcome['out']}")
    for name, c in sorted(outcome["checks"].items()):
        mark = "pass" if c["passed"] else "FAIL"
        rel = "<=" if c["comparison"] == "max_below" else ">"
        print(
            f"  [{mark}] {name}: {c['value']:.6g} {rel} {c['tolerance']:.6g}"
        )


def _cmd_run(args) -> int:
    if args.sweep:
        if args.preset or args.config:
            raise ConfigError("--sweep takes config paths as positional arguments")
        if not args.configs:
            raise ConfigError("--sweep needs at least one config path")
        configs = [load_config(p) for p in args.configs]
        names = [c.name for c in configs]
        if len(set(names)) != len(names):
            raise ConfigError(f"sweep configs must have distinct names, got {names}")
        roots = [str(_out_root(args, c)) for c in configs]
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=min(len(configs), os.cpu_count() or 1)
        ) as pool:
            outcomes = list(pool.map(_run_one, configs, roots))
        for outcome in outcomes:
            _print_checks(outcome)
        if args.check and not all(o["passed"] for o in outcomes):
            return _EXIT_CHECK_FAILED
        return _EXIT_OK

    if args.configs:
        raise ConfigError("positional config paths require --sweep")
    config = _resolve_config(args)
    outcome = _run_one(config, str(_out_root(args, config)))
    _print_checks(outcome)
    if args.check and not outcome["passed"]:
        return _EXIT_CHECK_FAILED
    return _EXIT_OK


def _cmd_converge(args) -> int:
    config = _resolve_config(args)
    report = convergence_report(config)
    out = _out_root(args, config) / f"{config.name}-convergence"
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        r + (r[4] < report.threshold and r[5] < report.threshold,) for r in report.rows
    ]
    (out / "convergence.csv").write_text(_csv_text(_CONVERGENCE_COLUMNS, rows))
    print(report.table_text())
    print(f"convergence table in {out}")
    if args.check and not report.converged:
        return _EXIT_CHECK_FAILED
    return _EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hqa",
        description="Hybrid quantum annealing experiments: anneal, compare, certify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", choices=preset_names(), help="built-in parameter set")
        p.add_argument("--config", help="TOML experiment file")
        p.add_argument("--mode", choices=MODES, help="override the config's mode")
        p.add_argument("--out", help="output root directory (default $HQA_OUT or ./runs)")
        p.add_argument("--truncation", type=int, help="override Fock truncation")
        p.add_argument("--tol", type=float, help="override integrator tolerance")
        p.add_argument(
            "--check",
            action="store_true",
            help="exit 1 unless every summary tolerance passes",
        )

    run_p = sub.add_parser("run", help="execute one experiment (or a sweep)")
    common(run_p)
    run_p.add_argument(
        "--sweep",
        action="store_true",
        help="run the positional config files concurrently",
    )
    run_p.add_argument("configs", nargs="*", help="config paths for --sweep")
    run_p.set_defaults(func=_cmd_run)

    conv_p = sub.add_parser(
        "converge", help="certify truncation and tolerance convergence"
    )
    common(conv_p)
    conv_p.set_defaults(func=_cmd_converge)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except IntegrationError as exc:
        print(
            f"integration failed: {exc} (achieved error {exc.achieved_error:g})",
            file=sys.stderr,
        )
        return _EXIT_EXECUTION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_EXECUTION


if __name__ == "__main__":
    sys.exit(main())
