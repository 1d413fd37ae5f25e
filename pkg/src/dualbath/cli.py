"""Command-line entry point.

    dualbath <dynamics|steady|mqs|oracle|kernels> --config <path>
             [--out <dir>] [--threads <n>]

Each subcommand reads the same JSON scenario schema (see scenario module),
runs the corresponding pipeline and writes deterministic CSV files plus a
metadata sidecar.  Exit codes: 0 success, 1 configuration/validation error
(the message names the offending field), 2 numerical failure (the message
names the sector and time).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bath import QuadratureError
from .csvio import write_csv, write_metadata
from .scenario import MODES, Scenario, ScenarioError, load_scenario
from .tls import IntegrationError, SteadyStateError
from .spinbath import HEvolutionError

__all__ = ["main"]


def _replace_system(scn: Scenario, **kw) -> Scenario:
    return dataclasses.replace(scn, system=dataclasses.replace(scn.system, **kw))


def _replace_bath(scn: Scenario, **kw) -> Scenario:
    return dataclasses.replace(scn, bath=dataclasses.replace(scn.bath, **kw))


_SWEEPABLE = {
    "gamma": lambda scn, v: _replace_system(scn, gamma=v),
    "eps": lambda scn, v: _replace_system(scn, eps=v),
    "J": lambda scn, v: _replace_system(scn, J=v),
    "alpha": lambda scn, v: _replace_system(scn, alpha=v),
    "kappa1": lambda scn, v: _replace_bath(scn, kappa1=v),
    "kappa2": lambda scn, v: _replace_bath(scn, kappa2=v),
    "kappa3": lambda scn, v: _replace_bath(scn, kappa3=v),
}


def _sweep_points(scn: Scenario):
    if scn.run.sweep_parameter is None:
        return None
    name = scn.run.sweep_parameter
    if name not in _SWEEPABLE:
        raise ScenarioError(
            f"run.sweep.parameter must be one of {sorted(_SWEEPABLE)}; got {name!r}")
    return [(v, _SWEEPABLE[name](scn, v)) for v in scn.run.sweep_grid]


def _pool_map(fn, items, threads: int):
    """Ordered map over sweep points; output order never depends on timing."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _stride(traj_t: np.ndarray, n_out: int) -> np.ndarray:
    if n_out and n_out < len(traj_t):
        return np.unique(np.linspace(0, len(traj_t) - 1, n_out).astype(int))
    return np.arange(len(traj_t))


def _meta(scn: Scenario, extra: dict, threads: int) -> dict:
    return {
        "version": __version__,
        "system": dataclasses.asdict(scn.system),
        "bath": dataclasses.asdict(scn.bath),
        "run": dataclasses.asdict(scn.run),
        "threads": threads,
        **extra,
    }


def _run_dynamics(scn: Scenario, out_dir: Path, threads: int):
    from . import tls

    points = _sweep_points(scn)
    stem = out_dir / scn.output.stem
    dt = scn.resolved_dt()
    outputs = []
    if points is None:
        traj = tls.integrate(scn)
        sel = _stride(traj.t, scn.run.n_out)
        outputs.append(write_csv(
            f"{stem}_dynamics.csv",
            ["t", "sigma_z", "sigma_x_P", "sigma_y_P", "P1"],
            zip(traj.t[sel], traj.sigma_z[sel], traj.sigma_x_P[sel],
                traj.sigma_y_P[sel], traj.P1[sel])))
        if scn.run.alpha_detail:
            nm = traj.alpha.shape[1]
            rows = []
            for i in sel:
                for j in range(nm):
                    rows.append((traj.t[i], j - (nm - 1) // 2,
                                 *traj.alpha[i, j], traj.alpha_e[j]))
            outputs.append(write_csv(
                f"{stem}_alpha_m.csv",
                ["t", "m", "alpha_x", "alpha_y", "alpha_z", "alpha_e"], rows))
    else:
        name = scn.run.sweep_parameter
        results = _pool_map(lambda pv: tls.integrate(pv[1]), points, threads)
        rows = []
        for (value, _), traj in zip(points, results):
            sel = _stride(traj.t, scn.run.n_out)
            for i in sel:
                rows.append((traj.t[i], value, traj.sigma_z[i]))
        outputs.append(write_csv(
            f"{stem}_surface.csv", ["t", name, "sigma_z"], rows))
    write_metadata(f"{stem}_meta.json",
                   _meta(scn, {"dt": dt, "outputs": [p.name for p in outputs]},
                         threads))
    return outputs


def _run_steady(scn: Scenario, out_dir: Path, threads: int):
    from . import tls

    stem = out_dir / scn.output.stem
    points = _sweep_points(scn)
    name = scn.run.sweep_parameter or "gamma"
    if points is None:
        points = [(scn.system.gamma, scn)]
    results = _pool_map(lambda pv: tls.steady_state(pv[1]), points, threads)
    out = write_csv(
        f"{stem}_steady.csv", [name, "P1_inf"],
        [(value, res.P1) for (value, _), res in zip(points, results)])
    write_metadata(f"{stem}_meta.json",
                   _meta(scn, {"outputs": [out.name],
                               "t_horizon": [r.t_horizon for r in results]},
                         threads))
    return [out]


_THETA_HEADER = ["t", "abs_tpp", "abs_tpm", "abs_tmp", "abs_tmm",
                 "re_tpp", "im_tpp", "re_tpm", "im_tpm",
                 "re_tmp", "im_tmp", "re_tmm", "im_tmm", "trace"]


def _theta_rows(t, pp, pm, mp, mm, trace):
    for i in range(len(t)):
        yield (t[i], abs(pp[i]), abs(pm[i]), abs(mp[i]), abs(mm[i]),
               pp[i].real, pp[i].imag, pm[i].real, pm[i].imag,
               mp[i].real, mp[i].imag, mm[i].real, mm[i].imag, trace[i])


def _run_mqs(scn: Scenario, out_dir: Path, threads: int):
    from . import spinbath

    stem = out_dir / scn.output.stem
    dt = scn.resolved_dt()
    traj = spinbath.run_mqs(scn.system, scn.bath, scn.run.t_max, dt,
                            store_matrices=scn.run.theta_dump)
    sel = _stride(traj.t, scn.run.n_out)
    outputs = [write_csv(
        f"{stem}_theta.csv", _THETA_HEADER,
        _theta_rows(traj.t[sel], traj.theta_pp[sel], traj.theta_pm[sel],
                    traj.theta_mp[sel], traj.theta_mm[sel], traj.trace[sel]))]

    # decoherence-free reference (the dotted comparison curves)
    N = scn.system.N
    ref = {k: [] for k in ("pp", "pm", "mp", "mm")}
    for t in traj.t[sel]:
        mat = spinbath.mqs_reference(float(t), N, scn.bath)
        ref["pp"].append(spinbath.theta_pm(mat, +1, +1, N))
        ref["pm"].append(spinbath.theta_pm(mat, +1, -1, N))
        ref["mp"].append(spinbath.theta_pm(mat, -1, +1, N))
        ref["mm"].append(spinbath.theta_pm(mat, -1, -1, N))
    ones = np.ones(len(sel))
    outputs.append(write_csv(
        f"{stem}_reference.csv", _THETA_HEADER,
        _theta_rows(traj.t[sel], np.array(ref["pp"]), np.array(ref["pm"]),
                    np.array(ref["mp"]), np.array(ref["mm"]), ones)))
    if scn.run.theta_dump and traj.theta_series is not None:
        nm = traj.theta_series.shape[1]
        rows = []
        for i in sel:
            for a in range(nm):
                for b in range(nm):
                    rows.append((traj.t[i], a - (nm - 1) // 2, b - (nm - 1) // 2,
                                 traj.theta_series[i, a, b].real,
                                 traj.theta_series[i, a, b].imag))
        outputs.append(write_csv(f"{stem}_theta_mn.csv",
                                 ["t", "m", "n", "re", "im"], rows))
    extra = {"dt": dt, "outputs": [p.name for p in outputs],
             "hermiticity_defect": traj.hermiticity_defect}
    try:
        extra["tau_mqs"] = spinbath.tau_mqs(scn.bath)
    except ValueError:
        pass
    write_metadata(f"{stem}_meta.json", _meta(scn, extra, threads))
    return outputs


def _run_oracle(scn: Scenario, out_dir: Path, threads: int):
    from .oracle import TruncatedModel, discretize_cubic_bath, propagate

    stem = out_dir / scn.output.stem
    bath = discretize_cubic_bath(scn.bath, scn.run.oracle_modes)
    model = TruncatedModel(
        n_spins=scn.system.N, bath=bath, n_max=scn.run.oracle_n_max,
        eps=scn.system.eps, J=scn.system.J, gamma=scn.system.gamma,
        alpha=scn.system.alpha)
    n_pts = scn.run.n_out or 201
    t_grid = np.linspace(0.0, scn.run.t_max, n_pts)
    traj = propagate(model, t_grid, spin_init=scn.run.oracle_spin_init)
    outputs = [
        write_csv(f"{stem}_oracle.csv",
                  ["t", "sigma_z", "sigma_x", "sigma_y"],
                  zip(traj.t, traj.sigma_z, traj.sigma_x, traj.sigma_y)),
        write_csv(f"{stem}_oracle_theta.csv", _THETA_HEADER,
                  _theta_rows(traj.t, traj.theta_pp, traj.theta_pm,
                              traj.theta_mp, traj.theta_mm,
                              np.einsum("tmm->t", traj.theta_s).real)),
    ]
    write_metadata(f"{stem}_meta.json",
                   _meta(scn, {"outputs": [p.name for p in outputs],
                               "modes": bath.omega, "xi": bath.xi,
                               "eta": bath.eta,
                               "fock_tail": traj.fock_tail}, threads))
    return outputs


def _run_kernels(scn: Scenario, out_dir: Path, threads: int):
    from .bath import BathKernels

    stem = out_dir / scn.output.stem
    dt = scn.resolved_dt()
    kernels = BathKernels.build(scn.bath, scn.system.J, scn.system.gamma,
                                scn.run.t_max, dt)
    sel = _stride(kernels.grid, scn.run.n_out)
    out = write_csv(
        f"{stem}_kernels.csv", ["t", "phi1", "phi2", "psi1"],
        zip(kernels.grid[sel], kernels.phi1[sel], kernels.phi2[sel],
            kernels.psi1[sel]))
    write_metadata(f"{stem}_meta.json", _meta(scn, {
        "dt": dt, "outputs": [out.name],
        "theta_factor": kernels.theta_factor, "j_tilde": kernels.j_tilde,
        "gamma_tilde": kernels.gamma_tilde, "eta": kernels.eta}, threads))
    return [out]


_RUNNERS = {
    "dynamics": _run_dynamics,
    "steady": _run_steady,
    "mqs": _run_mqs,
    "oracle": _run_oracle,
    "kernels": _run_kernels,
}


def run(mode: str, config_path, out_dir=None, threads: int | None = None):
    """Load a config, execute one pipeline, return the list of files written."""
    scn = load_scenario(config_path)
    if scn.run.mode != mode:
        scn = dataclasses.replace(
            scn, run=dataclasses.replace(scn.run, mode=mode))
    out = Path(out_dir) if out_dir is not None else Path(scn.output.directory)
    if threads is None:
        threads = int(os.environ.get("DUALBATH_THREADS", scn.run.threads))
    return _RUNNERS[mode](scn, out, threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dualbath",
        description="Polaron-frame TCL2 dynamics of a two-level system "
                    "coupled to a spin bath and a boson bath")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        files = run(args.mode, args.config, args.out, args.threads)
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, SteadyStateError, HEvolutionError,
            QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
