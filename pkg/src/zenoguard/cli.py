"""Command line entry point: ``zenoguard <mode> --config scenario.json``.

Modes: simulate, derive, steady, analyze, traject. Exit codes: 0 success,
2 configuration error, 3 numerical failure (partial outputs are removed).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import oracles
from .analyzer import effective_hamiltonian, find_dark_states
from .closure import derive_rate_system, p0_steady
from .config import ConfigError, ScenarioConfig
from .dynamics import IntegrationError, as_density_matrix, integrate_master_equation, simulate_p0
from .models import ModelParams, build_model
from .trajectories import STATS_FIELDS, dark_period_stats, run_ensemble

log = logging.getLogger("zenoguard")

MODES = ("simulate", "derive", "steady", "analyze", "traject")
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def point_stem(prefix: str, omega: float, gamma: float) -> str:
    return f"{prefix}_omega{omega:g}_gamma{gamma:g}"


def _scheme(cfg: ScenarioConfig, omega: float, gamma: float):
    return build_model(cfg.model, ModelParams(xi=cfg.xi, omega=omega, gamma=gamma))


def _psi0(cfg: ScenarioConfig, dim: int) -> np.ndarray:
    if cfg.initial == "mixed":
        raise ConfigError("field 'initial': trajectories need a pure initial state")
    level = 0 if cfg.initial == "ket0" else cfg.initial
    if level >= dim:
        raise ConfigError(f"field 'initial': level {level} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=complex)
    psi[level] = 1
    return psi


# --- per-point jobs (top level so they pickle for the worker pool) ----------


def job_simulate(cfg: ScenarioConfig, omega: float, gamma: float) -> dict:
    scheme = _scheme(cfg, omega, gamma)
    t = np.linspace(0.0, cfg.t_max, cfg.n_points)
    rho0 = as_density_matrix(cfg.initial, scheme.dim)
    tol = {"rtol": cfg.solver.rtol, "atol": cfg.solver.atol}
    if cfg.representation == "master":
        ts = integrate_master_equation(scheme, rho0, t, **tol)
    else:
        ts = simulate_p0(scheme, derive_rate_system(scheme), rho0, t, **tol)
    return {"series": ts, "dim": scheme.dim, "min_P0": float(ts.p0.min())}


def job_derive(cfg: ScenarioConfig, omega: float, gamma: float) -> dict:
    return {"rs": derive_rate_system(_scheme(cfg, omega, gamma), prune=cfg.prune)}


def job_steady(cfg: ScenarioConfig, omega: float, gamma: float) -> dict:
    scheme = _scheme(cfg, omega, gamma)
    try:
        p0 = p0_steady(derive_rate_system(scheme))
    except np.linalg.LinAlgError:
        p0 = None
    closed = None
    if cfg.model == "two_level" and gamma > 0:
        closed = oracles.steady_state_two_level(cfg.xi, gamma)
    return {"P0_ss": p0, "closed_form": closed}


def job_analyze(cfg: ScenarioConfig, omega: float, gamma: float) -> dict:
    scheme = _scheme(cfg, omega, gamma)
    return {
        "report": find_dark_states(scheme),
        "heff": effective_hamiltonian(scheme.h_int, scheme.p_cs),
    }


def job_traject(cfg: ScenarioConfig, omega: float, gamma: float) -> dict:
    scheme = _scheme(cfg, omega, gamma)
    tc = cfg.trajectories
    cps = np.linspace(0.0, cfg.t_max, tc.n_checkpoints) if tc.n_checkpoints else None
    ens = run_ensemble(scheme, _psi0(cfg, scheme.dim), cfg.t_max, tc.n_traj, tc.seed, cps)
    if tc.dark_threshold is None and cfg.xi == 0:
        raise ConfigError("field 'trajectories.dark_threshold': required when xi is 0")
    threshold = tc.dark_threshold if tc.dark_threshold is not None else 2.0 / cfg.xi
    stats = dark_period_stats(ens, threshold, cfg.t_max, seed=tc.seed)
    return {"ensemble": ens, "stats": stats}


JOBS = {
    "simulate": job_simulate,
    "derive": job_derive,
    "steady": job_steady,
    "analyze": job_analyze,
    "traject": job_traject,
}


# --- writers ------------------------------------------------------------------


class Outputs:
    """Tracks emitted files so failures can roll back and the manifest can digest them."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self.files: list[Path] = []
        self.meta: dict[str, dict] = {}

    def path(self, suffix: str, **meta) -> Path:
        p = Path(f"{self.prefix}{suffix}")
        p.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(p)
        self.meta[str(p)] = meta
        return p

    def remove_all(self) -> None:
        for p in self.files:
            if p.exists():
                p.unlink()

    def write_manifest(self, cfg: ScenarioConfig, mode: str, extra: dict | None = None) -> Path:
        entries = []
        for p in self.files:
            digest = hashlib.sha256(p.read_bytes()).hexdigest()
            entries.append({"file": p.name, "sha256": digest, **self.meta[str(p)]})
        manifest = {"mode": mode, "config": cfg.to_dict(), "files": entries, **(extra or {})}
        out = Path(f"{self.prefix}_{mode}_manifest.json")
        out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.files.append(out)
        return out


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def format_rate_system(rs) -> str:
    labels = list(rs.labels)
    width = max(12, max(len(s) for s in labels) + 2)
    lines = ["d<s>/dt = M <s> + b", " " * 10 + "".join(f"{s:>{width}}" for s in labels) + f"{'b':>{width}}"]
    for i, lab in enumerate(labels):
        row = "".join(f"{v:>{width}.6g}" for v in rs.m[i])
        lines.append(f"{lab:<10}{row}{rs.b[i]:>{width}.6g}")
    c = " + ".join(f"{v:.6g}*<{lab}>" for v, lab in zip(rs.p0_coeffs, labels) if abs(v) > 1e-12)
    lines.append(f"P0 = {rs.p0_identity:.6g} + {c}")
    return "\n".join(lines)


def _emit(mode: str, cfg: ScenarioConfig, results, out: Outputs, stdout) -> dict:
    extra: dict = {}
    if mode == "simulate":
        for (om, g), res in results:
            p = out.path(f"_omega{om:g}_gamma{g:g}.csv", omega=om, gamma=g, min_P0=_fmt(res["min_P0"]))
            res["series"].to_csv(p, dim=res["dim"])
    elif mode == "derive":
        for (om, g), res in results:
            rs = res["rs"]
            p = out.path(f"_omega{om:g}_gamma{g:g}_derive.csv", omega=om, gamma=g)
            rows = [[lab] + [_fmt(v) for v in rs.m[i]] + [_fmt(rs.b[i])] for i, lab in enumerate(rs.labels)]
            rows.append(["P0"] + [_fmt(v) for v in rs.p0_coeffs] + [_fmt(rs.p0_identity)])
            _write_rows(p, ["label", *rs.labels, "b"], rows)
            print(f"# {cfg.model} xi={cfg.xi:g} omega={om:g} gamma={g:g}", file=stdout)
            print(format_rate_system(rs), file=stdout)
    elif mode == "steady":
        p = out.path("_steady.csv")
        rows = []
        for (om, g), res in results:
            cells = [cfg.model, _fmt(cfg.xi), _fmt(om), _fmt(g)]
            cells += ["" if res[k] is None else _fmt(res[k]) for k in ("P0_ss", "closed_form")]
            rows.append(cells)
            print("  ".join(cells), file=stdout)
        _write_rows(p, ["model", "xi", "omega", "gamma", "P0_ss", "P0_ss_closed_form"], rows)
    elif mode == "analyze":
        verdicts = []
        for (om, g), res in results:
            rep = res["report"]
            d = rep.kernel_vectors.shape[1] if rep.n_dark else res["heff"].shape[0]
            p = out.path(f"_omega{om:g}_gamma{g:g}_dark.csv", omega=om, gamma=g, protected=rep.protected)
            header = ["vector"]
            header += [f"{part}_c{c}" for c in range(rep.couplings.shape[1]) for part in ("coupling_re", "coupling_im")]
            header += [f"{part}{i}" for i in range(d) for part in ("re", "im")]
            rows = []
            for k, v in enumerate(rep.kernel_vectors):
                cells = [k]
                for z in rep.couplings[k]:
                    cells += [_fmt(z.real), _fmt(z.imag)]
                for z in v:
                    cells += [_fmt(z.real), _fmt(z.imag)]
                rows.append(cells)
            _write_rows(p, header, rows)
            ph = out.path(f"_omega{om:g}_gamma{g:g}_heff.csv", omega=om, gamma=g)
            heff = res["heff"]
            _write_rows(
                ph,
                ["row"] + [f"{part}{j}" for j in range(d) for part in ("re", "im")],
                [[i] + [s for z in heff[i] for s in (_fmt(z.real), _fmt(z.imag))] for i in range(d)],
            )
            verdicts.append({"omega": om, "gamma": g, "protected": rep.protected, "n_dark": rep.n_dark})
            print(f"# {cfg.model} xi={cfg.xi:g} omega={om:g} gamma={g:g}", file=stdout)
            print(f"dark states: {rep.n_dark}", file=stdout)
            for k, v in enumerate(rep.kernel_vectors):
                amp = np.array2string(v, precision=6, suppress_small=True)
                print(f"  v{k} = {amp}  coupling |<v|H_slow|0>| = {np.abs(rep.couplings[k]).max():.6g}", file=stdout)
            print(f"protected: {rep.protected}", file=stdout)
            print("H_eff = P H P:\n" + np.array2string(heff, precision=6, suppress_small=True), file=stdout)
        extra["verdicts"] = verdicts
    elif mode == "traject":
        for (om, g), res in results:
            ens, stats = res["ensemble"], res["stats"]
            pj = out.path(f"_omega{om:g}_gamma{g:g}_jumps.csv", omega=om, gamma=g)
            ens.write_jumps_csv(pj)
            ps = out.path(f"_omega{om:g}_gamma{g:g}_stats.csv", omega=om, gamma=g)
            row = stats.csv_row()
            _write_rows(ps, STATS_FIELDS, [[row[k] for k in STATS_FIELDS]])
            if ens.populations is not None:
                mean, se = ens.mean_populations()
                pp = out.path(f"_omega{om:g}_gamma{g:g}_traj_p0.csv", omega=om, gamma=g)
                _write_rows(
                    pp,
                    ["t", "P0_mean", "P0_se"],
                    [[_fmt(t), _fmt(m), _fmt(s)] for t, m, s in zip(ens.sample_times, mean[:, 0], se[:, 0])],
                )
            print("  ".join(f"{k}={row[k]}" for k in STATS_FIELDS), file=stdout)
    return extra


def run_scenario(cfg: ScenarioConfig, mode: str, stdout=None) -> int:
    """Run every sweep point of ``cfg`` in ``mode``; returns the exit status."""
    stdout = stdout or sys.stdout
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "traject" and cfg.trajectories is None:
        raise ConfigError("field 'trajectories': required for traject mode")
    points = cfg.sweep()
    job = JOBS[mode]
    if cfg.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(job, cfg, om, g) for om, g in points]
            results = [f.result() for f in futures]
    else:
        results = [job(cfg, om, g) for om, g in points]
    out = Outputs(cfg.output)
    try:
        extra = _emit(mode, cfg, list(zip(points, results)), out, stdout)
        out.write_manifest(cfg, mode, extra)
    except BaseException:
        out.remove_all()
        raise
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zenoguard", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--out", help="output path prefix")
        p.add_argument("--model", help="override the model name")
        p.add_argument("--xi", type=float)
        p.add_argument("--omega", type=float, nargs="+")
        p.add_argument("--gamma", type=float, nargs="+")
        p.add_argument("--tmax", type=float)
        p.add_argument("--npoints", type=int)
        p.add_argument("--workers", type=int)
        if mode == "simulate":
            p.add_argument("--representation", choices=("rate", "master"))
        if mode == "traject":
            p.add_argument("--seed", type=int)
            p.add_argument("--ntraj", type=int)
            p.add_argument("--threshold", type=float)
    return parser


def config_from_args(args) -> ScenarioConfig:
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        ScenarioConfig.loads(text)  # line-aware validation of the file itself
        data = json.loads(text)
    else:
        data, text = {}, None
    overrides = {
        "out": "output",
        "model": "model",
        "xi": "xi",
        "omega": "omega",
        "gamma": "gamma",
        "tmax": "t_max",
        "npoints": "n_points",
        "workers": "workers",
        "representation": "representation",
    }
    for arg, key in overrides.items():
        value = getattr(args, arg, None)
        if value is not None:
            data[key] = value
    traj = {"seed": "seed", "ntraj": "n_traj", "threshold": "dark_threshold"}
    for arg, key in traj.items():
        value = getattr(args, arg, None)
        if value is not None:
            data.setdefault("trajectories", {})
            data["trajectories"] = {**(data["trajectories"] or {}), key: value}
    return ScenarioConfig.from_dict(data, text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        return run_scenario(cfg, args.mode)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
