"""CSV-producing commands.  Each returns the complete CSV text.

CSV layout: ``#``-prefixed provenance lines (package version, command, full
config as compact JSON, plus command-specific step counts), one header row,
then data rows.  Floats use 17 significant digits and lines end in ``\\n``,
so identical configs give byte-identical output.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import DetunedSystem, ZeroDetuning
from .integrate import integrate_orbit
from .model import wrap_phase
from .stability import (
    floquet_block,
    max_transverse_floquet,
    max_transverse_uniform,
    quartic_roots,
)
from .symmetry import DecoupledPoint, decoupled_state


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def render_csv(
    command: str,
    config: RunConfig,
    header: Sequence[str],
    rows: Iterable[Sequence],
    extra: dict | None = None,
) -> str:
    lines = [
        f"# decoupled_ring {__version__}",
        f"# command: {command}",
        f"# config: {json.dumps(config.to_dict(), sort_keys=True, separators=(',', ':'))}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _map_rows(fn: Callable, tasks: Sequence, workers: int) -> list:
    """Ordered map; with ``workers > 1`` the tasks run in a process pool."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def cmd_simulate(config: RunConfig) -> str:
    params = config.params()
    n = params.n
    state0 = decoupled_state(params, DecoupledPoint(config.theta0, config.psi0))
    traj = integrate_orbit(params, state0, config.dt, config.n_steps, stride=config.sample_stride)
    header = ["t"] + [f"a_{j}" for j in range(n)] + [f"phi_{j}" for j in range(n)] + ["theta", "psi"]
    theta, psi = traj.theta(), traj.psi()
    rows = []
    for i, t in enumerate(traj.times):
        rows.append([t, *traj.amplitudes[i], *wrap_phase(traj.phases[i]), theta[i], psi[i]])
    return render_csv("simulate", config, header, rows, {"n_steps": config.n_steps, "dt": fmt(config.dt)})


def _require_uniform(config: RunConfig) -> None:
    if config.detuning != 0.0:
        raise DetunedSystem(
            f"detuning = {config.detuning}: static eigenvalues need uniform frequencies (detuning 0)"
        )


def cmd_eigs(config: RunConfig) -> str:
    _require_uniform(config)
    params = config.params()
    ks = np.arange(params.n // 2)
    psis = config.psi_grid.values()
    values = quartic_roots(params.n, params.duffing, params.coupling, psis[:, None], ks[None, :])
    header = ["psi", "k"] + [f"{part}_{i}" for i in range(1, 5) for part in ("re", "im")]
    rows = []
    for i, psi in enumerate(psis):
        for k in ks:
            lam = values[i, k]
            rows.append([psi, int(k)] + [x for z in lam for x in (z.real, z.imag)])
    return render_csv("eigs", config, header, rows)


def _uniform_row(task):
    n, beta, alpha, psis = task
    return max_transverse_uniform(n, beta, alpha, psis)


def cmd_sweep_uniform(config: RunConfig, workers: int = 1) -> str:
    _require_uniform(config)
    alphas = config.alpha_grid.values()
    psis = config.psi_grid.values()
    tasks = [(config.n, config.beta, float(a), psis) for a in alphas]
    results = _map_rows(_uniform_row, tasks, workers)
    rows = [[a, psi, v] for a, row in zip(alphas, results) for psi, v in zip(psis, row)]
    return render_csv("sweep-uniform", config, ["alpha", "psi", "max_transverse"], rows)


def _check_detunings(omegas: np.ndarray) -> None:
    if np.any(omegas <= 0.0):
        raise ZeroDetuning("omega_grid must be strictly positive")


def _alternating_row(task):
    n, beta, alpha, omegas, n_steps, psi0 = task
    return max_transverse_floquet(n, beta, np.full(omegas.shape, alpha), omegas, n_steps, psi0)


def cmd_sweep_alternating(config: RunConfig, workers: int = 1) -> str:
    alphas = config.alpha_grid.values()
    omegas = config.omega_grid.values()
    _check_detunings(omegas)
    tasks = [(config.n, config.beta, float(a), omegas, config.floquet_steps, config.psi0) for a in alphas]
    results = _map_rows(_alternating_row, tasks, workers)
    rows = [[a, om, v] for a, row in zip(alphas, results) for om, v in zip(omegas, row)]
    return render_csv(
        "sweep-alternating",
        config,
        ["alpha", "omega_detuning", "max_transverse_floquet"],
        rows,
        {"floquet_steps": config.floquet_steps, "psi0": fmt(config.psi0)},
    )


def _floquet_row(task):
    config, omega = task
    params = config.params().with_(detuning=float(omega))
    return [floquet_block(params, k, config.psi0, config.floquet_steps) for k in range(params.n // 2)]


def cmd_floquet(config: RunConfig, workers: int = 1) -> str:
    omegas = config.omega_grid.values()
    _check_detunings(omegas)
    results = _map_rows(_floquet_row, [(config, om) for om in omegas], workers)
    rows = [
        [om, k, *exps] for om, per_k in zip(omegas, results) for k, exps in enumerate(per_k)
    ]
    return render_csv(
        "floquet",
        config,
        ["omega_detuning", "k", "exp_1", "exp_2", "exp_3", "exp_4"],
        rows,
        {"floquet_steps": config.floquet_steps, "psi0": fmt(config.psi0)},
    )


def read_csv(text: str) -> tuple[dict[str, str], list[str], np.ndarray]:
    """Parse output of the commands above: (comments, header, float rows)."""
    comments: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            comments[key.strip()] = value.strip()
        elif line:
            body.append(line)
    header = body[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in body[1:]]) if body[1:] else np.empty((0, len(header)))
    return comments, header, data


__all__ = [
    "cmd_eigs",
    "cmd_floquet",
    "cmd_simulate",
    "cmd_sweep_alternating",
    "cmd_sweep_uniform",
    "read_csv",
    "render_csv",
]
