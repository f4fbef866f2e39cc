"""Trajectory driver, CSV emission, convergence sweeps, and comparisons.

CSV schema (fixed column order, 17 significant digits):

    t, qB_0..qB_{D-1}, pB_0..pB_{D-1}, sympl_residual, boris_mod_residual,
    linear_momentum, angular_momentum, energy, S

``boris_mod_residual`` is nan for runs where the modified Boris invariant is
not defined (nonlinear vector potential or non-Boris schemes).  The scalar
``angular_momentum`` column is L_eps(K) for the x1-x2 rotation generator.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .averaging import hermite_rule
from .config import RunConfig
from .errors import ConfigError, GridMismatch, StepTooLarge
from .integrators import (
    HEUN,
    RK4,
    boris_init,
    boris_splitting_step,
    boris_step,
    boris_sync_velocity,
    order4_step,
    strang_step,
    to_canonical,
    to_kinetic,
)
from .invariants import InvariantMonitor
from .packets import CanonicalState, KineticState

OUTPUT_DIR_ENV = "MAGWP_OUTPUT_DIR"


def fmt(x: float) -> str:
    return f"{x:.17g}"


def csv_header(d: int) -> list[str]:
    D = d + 2 * d * d
    cols = ["t"]
    cols += [f"qB_{i}" for i in range(D)]
    cols += [f"pB_{i}" for i in range(D)]
    cols += [
        "sympl_residual",
        "boris_mod_residual",
        "linear_momentum",
        "angular_momentum",
        "energy",
        "S",
    ]
    return cols


def write_csv(path: str | Path, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path):
    """Parse a CSV written by :func:`write_csv` back into header + float rows."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(tok) for tok in line.split(",")] for line in lines[1:]]
    return header, rows


def resolve_out_path(out_path: str | Path) -> Path:
    """Apply the output-directory override from the environment."""
    out_path = Path(out_path)
    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        return Path(override) / out_path.name
    return out_path


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    header: list[str]
    rows: list[list[float]]
    summary: dict
    csv_path: Path | None
    final_canonical: CanonicalState


def _row(canon: CanonicalState, report) -> list[float]:
    mod = report.modified_boris_residual
    return [
        canon.t,
        *canon.qB,
        *canon.pB,
        report.sympl_residual,
        math.nan if mod is None else mod,
        report.linear_momentum,
        report.angular_momentum_12(),
        report.energy,
        report.phase,
    ]


def _integrate(config: RunConfig, collect_rows: bool = True):
    """Core stepping loop shared by run() and convergence().

    Returns (rows, summary, final canonical state).  Rows are emitted at
    step 0, every ``output_every``-th step, and the final step.
    """
    field = config.field
    rule = hermite_rule(config.quad_N)
    tau = config.tau
    t0 = config.t0
    n_steps = config.n_steps
    every = config.output_every
    state0 = config.initial_state()
    monitor = InvariantMonitor(field, rule, tau, state0)

    rows: list[list[float]] = []
    reports = []

    def emit(st):
        rep = monitor.report(st)
        reports.append(rep)
        if collect_rows:
            if isinstance(st, KineticState):
                # canonical columns for a uniform CSV schema
                canon = to_canonical(st, field, rule)
            else:
                canon = st
            rows.append(_row(canon, rep))

    scheme = config.scheme
    try:
        if scheme in ("symplectic2", "symplectic4"):
            step = strang_step if scheme == "symplectic2" else order4_step
            tableau = HEUN if scheme == "symplectic2" else RK4
            st = state0
            emit(st)
            for n in range(n_steps):
                st = step(st, tau, t0 + n * tau, field, rule, tableau)
                if (n + 1) % every == 0 or n + 1 == n_steps:
                    emit(st)
            final = st
        elif scheme == "boris_splitting":
            ks = to_kinetic(state0, field, rule)
            emit(ks)
            for n in range(n_steps):
                ks = boris_splitting_step(ks, tau, t0 + n * tau, field, rule)
                if (n + 1) % every == 0 or n + 1 == n_steps:
                    emit(ks)
            final = to_canonical(ks, field, rule)
        elif scheme == "boris":
            # Staggered trajectory (q_n, v^s_n) with v^s_n ~ v(t_n - tau/2):
            # Euler half kick, one drift, then the one-step map; reported
            # rows reconstruct the synchronized velocity (v^s_n + v^s_{n+1})/2.
            ks0 = to_kinetic(state0, field, rule)
            emit(ks0)
            final = state0
            if n_steps > 0:
                kinit = boris_init(state0, tau, field, rule)
                ks = kinit.with_(qB=kinit.qB + tau * kinit.vB, t=t0 + tau)
                for n in range(1, n_steps + 1):
                    if n % every == 0 or n == n_steps:
                        vbar = boris_sync_velocity(ks, tau, t0 + n * tau, field, rule)
                        emit(ks.with_(vB=vbar))
                    if n < n_steps:
                        ks = boris_step(ks, tau, t0 + n * tau, field, rule)
                final = to_canonical(
                    ks.with_(vB=boris_sync_velocity(ks, tau, t0 + n_steps * tau, field, rule)),
                    field,
                    rule,
                )
        else:  # pragma: no cover - guarded by config validation
            raise ConfigError(f"unknown scheme {scheme!r}")
    except StepTooLarge as exc:
        raise StepTooLarge(f"aborted at step {len(reports)}: {exc}") from exc

    e0 = reports[0].energy
    denom = abs(e0) if e0 != 0.0 else 1.0
    summary = {
        "n_steps": n_steps,
        "max_sympl_residual": max(r.sympl_residual for r in reports),
        "max_energy_rel_err": max(abs(r.energy - e0) for r in reports) / denom,
        "final_energy_rel_err": abs(reports[-1].energy - e0) / denom,
        "max_boris_mod_residual": max(
            (r.modified_boris_residual for r in reports if r.modified_boris_residual is not None),
            default=math.nan,
        ),
        "final_t": reports[-1].t,
    }
    return rows, summary, final


def run(config: RunConfig, out_path: str | Path | None = None) -> RunResult:
    """Execute a configured run and write its CSV."""
    rows, summary, final = _integrate(config, collect_rows=True)
    header = csv_header(config.d)
    path = resolve_out_path(out_path if out_path is not None else config.out_path)
    write_csv(path, header, rows)
    return RunResult(
        config=config,
        header=header,
        rows=rows,
        summary=summary,
        csv_path=path,
        final_canonical=final,
    )


CONV_HEADER = ["tau", "energy_rel_err", "state_err", "order_energy", "order_state"]


def convergence(
    config: RunConfig,
    taus: list[float],
    tau_ref: float | None = None,
    out_path: str | Path | None = None,
):
    """Energy and state errors at T for a list of step sizes.

    The reference trajectory uses the same scheme at ``tau_ref``
    (default min(taus)/100; must be at most min(taus)/10).  Orders are
    estimated from successive log ratios.
    """
    taus = [float(t) for t in taus]
    if sorted(taus, reverse=True) != taus:
        raise ConfigError("taus must be given in descending order")
    if tau_ref is None:
        tau_ref = min(taus) / 100.0
    if tau_ref > min(taus) / 10.0:
        raise ConfigError("tau_ref must be at most min(taus)/10")

    def final_for(tau):
        cfg = replace(config, tau=tau)
        span = cfg.T - cfg.t0
        ratio = span / tau
        if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
            raise ConfigError(f"tau={tau} does not divide T - t0 = {span}")
        _, summary, final = _integrate(cfg, collect_rows=False)
        return summary, final

    ref_summary, ref = final_for(tau_ref)
    zref = np.concatenate([ref.qB, ref.pB])

    table = []
    for tau in taus:
        summary, final = final_for(tau)
        z = np.concatenate([final.qB, final.pB])
        table.append([tau, summary["final_energy_rel_err"], float(np.linalg.norm(z - zref))])

    rows = []
    for i, (tau, e_err, s_err) in enumerate(table):
        if i == 0:
            oe = os_ = math.nan
        else:
            t_prev, e_prev, s_prev = table[i - 1]
            lr = math.log(t_prev / tau)
            oe = math.log(e_prev / e_err) / lr if e_err > 0 and e_prev > 0 else math.nan
            os_ = math.log(s_prev / s_err) / lr if s_err > 0 and s_prev > 0 else math.nan
        rows.append([tau, e_err, s_err, oe, os_])

    if out_path is not None:
        write_csv(resolve_out_path(out_path), CONV_HEADER, rows)
    return rows


_INVARIANT_COLS = [
    "sympl_residual",
    "boris_mod_residual",
    "linear_momentum",
    "angular_momentum",
    "energy",
    "S",
]


def compare(config_a: RunConfig, config_b: RunConfig, out_path: str | Path | None = None):
    """Run two configurations on the same experiment and grid and join their
    invariant columns row by row."""
    same_grid = (
        config_a.experiment_id == config_b.experiment_id
        and config_a.experiment_params == config_b.experiment_params
        and config_a.t0 == config_b.t0
        and config_a.T == config_b.T
        and config_a.tau == config_b.tau
        and config_a.output_every == config_b.output_every
    )
    if not same_grid:
        raise GridMismatch("configurations differ in experiment or time grid")
    rows_a, _, _ = _integrate(config_a, collect_rows=True)
    rows_b, _, _ = _integrate(config_b, collect_rows=True)
    if len(rows_a) != len(rows_b):
        raise GridMismatch("runs produced different numbers of rows")
    header_full = csv_header(config_a.d)
    idx = {name: header_full.index(name) for name in _INVARIANT_COLS}
    header = ["t"]
    header += [f"a_{c}" for c in _INVARIANT_COLS]
    header += [f"b_{c}" for c in _INVARIANT_COLS]
    joined = []
    for ra, rb in zip(rows_a, rows_b):
        if ra[0] != rb[0]:
            raise GridMismatch(f"time grids differ at t={ra[0]} vs {rb[0]}")
        row = [ra[0]]
        row += [ra[idx[c]] for c in _INVARIANT_COLS]
        row += [rb[idx[c]] for c in _INVARIANT_COLS]
        joined.append(row)
    if out_path is not None:
        write_csv(resolve_out_path(out_path), header, joined)
    return header, joined
