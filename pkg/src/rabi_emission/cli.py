"""Command-line front end: ``rabi-emission {levels,rates,spectra,gauge-audit,compare}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .config import SweepConfig, load_config
from .errors import ConfigError, ConvergenceError, NormalizationError, RabiEmissionError
from .models import COULOMB, DIPOLE
from .pipeline import converged_eigensystem, gauge_audit, solve_point
from .spectra import reference_rate_eta0

log = logging.getLogger("rabi_emission")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_AUDIT = 0, 2, 3, 4
FLOAT_FMT = "%.12e"


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % float(x)


def write_csv(path: Path, header: Sequence[str], rows: list) -> None:
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def write_json(path: Path, obj) -> None:
    path.write_bytes((json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8"))


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class PointOutcome:
    eta: float
    rows: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)
    error: Optional[str] = None
    seconds: float = 0.0


def _run_point(task) -> PointOutcome:
    func, cfg, eta, extra = task
    t0 = time.perf_counter()
    try:
        out = func(cfg, eta, extra)
    except ConvergenceError as exc:
        out = PointOutcome(eta, error=f"convergence: {exc}")
    out.seconds = time.perf_counter() - t0
    return out


def run_sweep(func: Callable, cfg: SweepConfig, workers: int, extra=None) -> list[PointOutcome]:
    tasks = [(func, cfg, float(eta), extra) for eta in cfg.eta_grid]
    if workers <= 1 or len(tasks) == 1:
        results = [_run_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, tasks))
    return sorted(results, key=lambda r: r.eta)


# per-point workers -----------------------------------------------------------

def _levels_point(cfg: SweepConfig, eta: float, _extra) -> PointOutcome:
    params = cfg.params(eta)
    M = 10 if cfg.M == "auto" else cfg.M
    space, eig = converged_eigensystem(params, M, COULOMB, cfg.n_max)
    e0 = eig.energies[0]
    levels = [(eta, j, eig.labels[j], int(round(eig.parities[j])), (eig.energies[j] - e0) / params.omega_q)
              for j in range(eig.M)]
    transitions = []
    for k in range(eig.M):
        for j in range(k):
            if eig.parities[j] * eig.parities[k] < 0:
                transitions.append((eta, eig.labels[k], eig.labels[j],
                                    abs(eig.energies[k] - eig.energies[j]) / params.omega_q))
    return PointOutcome(eta, rows={"levels": levels, "transitions": transitions},
                        report={"n_max": space.n_max, "M": eig.M})


def _rates_point(cfg: SweepConfig, eta: float, extra) -> PointOutcome:
    model = extra.get("model", cfg.model)
    w0 = extra["w0"]
    params, bath = cfg.params(eta), cfg.bath()
    gauge = DIPOLE if cfg.gauge == DIPOLE else COULOMB
    pt = solve_point(params, bath, model, gauge, cfg.n_max, cfg.M, cfg.coupling_prefactor)
    row = [eta]
    for ch in ("cavity", "qubit"):
        row.append(pt.rate(ch) / w0 if ch in cfg.channels else float("nan"))
    report = {"n_max": pt.space.n_max, "M": pt.M, "warnings": pt.warnings}
    if "cavity_wrong" in cfg.channels:
        wrong_pt = pt if (gauge == DIPOLE or model == "standard_jc") else solve_point(
            params, bath, model, DIPOLE, pt.space.n_max, pt.M, cfg.coupling_prefactor)
        row.append(wrong_pt.rate("cavity_wrong") / w0)
    return PointOutcome(eta, rows={"rates": [tuple(row)]}, report=report)


def _spectra_point(cfg: SweepConfig, eta: float, extra) -> PointOutcome:
    model = extra.get("model", cfg.model)
    grid = cfg.omega_grid.values() * cfg.omega_q
    params, bath = cfg.params(eta), cfg.bath()
    gauge = DIPOLE if cfg.gauge == DIPOLE else COULOMB
    pt = solve_point(params, bath, model, gauge, cfg.n_max, cfg.M, cfg.coupling_prefactor)
    rows = []
    for ch in sorted(c for c in cfg.channels if c != "cavity_wrong"):
        spec = pt.spectrum(ch, grid, form=cfg.spectrum_form)
        peak = np.max(spec.values)
        values = spec.values / peak if peak > 0 else spec.values
        rows.extend((eta, w / cfg.omega_q, ch, s) for w, s in zip(spec.omegas, values))
    return PointOutcome(eta, rows={"spectra": rows},
                        report={"n_max": pt.space.n_max, "M": pt.M, "warnings": pt.warnings})


def _audit_point(cfg: SweepConfig, eta: float, _extra) -> PointOutcome:
    M = 20 if cfg.M == "auto" else cfg.M
    a = gauge_audit(cfg.params(eta), cfg.bath(), M, cfg.n_max)
    rep = {
        "eta": eta, "n_max": a.n_max, "M": M,
        "level_residual": a.level_residual, "element_residual": a.element_residual,
        "rate_residual": a.rate_residual, "wrong_operator_deviation": a.wrong_operator_deviation,
        "passed": a.passed(cfg.level_tol, cfg.element_tol, cfg.rate_tol),
        "wrong_operator_equal": a.wrong_operator_deviation < cfg.rate_tol,
    }
    return PointOutcome(eta, report=rep)


# commands --------------------------------------------------------------------

class Run:
    """Collects output files and per-point reports, then writes the manifest."""

    def __init__(self, command: str, cfg: SweepConfig, out: Path):
        self.command, self.cfg, self.out = command, cfg, out
        self.files: list[Path] = []
        self.points: list[dict] = []
        self.extra: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header, rows):
        p = self.out / name
        write_csv(p, header, rows)
        self.files.append(p)

    def json(self, name: str, obj):
        p = self.out / name
        write_json(p, obj)
        self.files.append(p)

    def record(self, results: list[PointOutcome], tag: Optional[str] = None):
        for r in results:
            entry = {"eta": r.eta, "wall_time_s": round(r.seconds, 6), "error": r.error}
            entry.update({k: v for k, v in r.report.items() if k in ("n_max", "M", "warnings")})
            if tag:
                entry["model"] = tag
            self.points.append(entry)

    def failed(self) -> bool:
        return any(p["error"] for p in self.points)

    def finish(self):
        manifest = {
            "command": self.command,
            "code_version": __version__,
            "config": self.cfg.echo(),
            "convergence": self.points,
            "files": {p.name: sha256(p) for p in self.files},
        }
        manifest.update(self.extra)
        write_json(self.out / "manifest.json", manifest)


def _rows(results, key):
    return [row for r in results if r.error is None for row in r.rows.get(key, [])]


def cmd_levels(cfg: SweepConfig, out: Path, workers: int) -> int:
    run = Run("levels", cfg, out)
    res = run_sweep(_levels_point, cfg, workers)
    run.record(res)
    run.csv("levels.csv", ["eta", "level_index", "label", "parity", "omega_j_minus_omega_0_over_wq"],
            sorted(_rows(res, "levels"), key=lambda r: (r[0], r[1])))
    run.csv("transitions.csv", ["eta", "upper", "lower", "omega_kj_over_wq"],
            sorted(_rows(res, "transitions"), key=lambda r: (r[0], r[3], r[1], r[2])))
    run.finish()
    return EXIT_CONVERGENCE if run.failed() else EXIT_OK


def _reference(cfg: SweepConfig) -> float:
    return reference_rate_eta0(cfg.bath(), cfg.params(0.0))


def cmd_rates(cfg: SweepConfig, out: Path, workers: int) -> int:
    run = Run("rates", cfg, out)
    w0 = _reference(cfg)
    res = run_sweep(_rates_point, cfg, workers, {"w0": w0})
    run.record(res)
    header = ["eta", "W_c_norm", "W_q_norm"] + (["W_c_wrong_norm"] if "cavity_wrong" in cfg.channels else [])
    run.csv("rates.csv", header, sorted(_rows(res, "rates")))
    run.extra["W_q0"] = w0
    run.finish()
    return EXIT_CONVERGENCE if run.failed() else EXIT_OK


def cmd_spectra(cfg: SweepConfig, out: Path, workers: int) -> int:
    run = Run("spectra", cfg, out)
    res = run_sweep(_spectra_point, cfg, workers, {})
    run.record(res)
    run.csv("spectra.csv", ["eta", "omega_over_wq", "channel", "S_norm"],
            sorted(_rows(res, "spectra"), key=lambda r: (r[0], r[1], r[2])))
    run.finish()
    return EXIT_CONVERGENCE if run.failed() else EXIT_OK


def cmd_gauge_audit(cfg: SweepConfig, out: Path, workers: int) -> int:
    if cfg.gauge != "both":
        raise ConfigError("gauge-audit requires gauge = both")
    run = Run("gauge-audit", cfg, out)
    res = run_sweep(_audit_point, cfg, workers)
    run.record(res)
    reports = [r.report for r in res if r.error is None]
    passed = bool(reports) and all(r["passed"] for r in reports) and not run.failed()
    run.json("gauge_audit.json", {"points": reports, "passed": passed,
                                  "tolerances": {"level": cfg.level_tol, "element": cfg.element_tol,
                                                 "rate": cfg.rate_tol}})
    run.finish()
    if run.failed():
        return EXIT_CONVERGENCE
    return EXIT_OK if passed else EXIT_AUDIT


def cmd_compare_models(cfg: SweepConfig, out: Path, workers: int) -> int:
    models = list(dict.fromkeys(cfg.models))
    if len(models) < 2:
        raise ConfigError("compare needs at least two models")
    run = Run("compare", cfg, out)
    w0 = _reference(cfg)
    rate_rows, spec_rows = [], []
    for model in models:
        res = run_sweep(_rates_point, cfg, workers, {"w0": w0, "model": model})
        run.record(res, model)
        rate_rows += [(r[0], model) + tuple(r[1:3]) for r in _rows(res, "rates")]
        res = run_sweep(_spectra_point, cfg, workers, {"model": model})
        spec_rows += [(r[0], r[1], r[2], model, r[3]) for r in _rows(res, "spectra")]
    warnings = sorted({w for p in run.points for w in p.get("warnings", [])})
    run.csv("compare_rates.csv", ["eta", "model", "W_c_norm", "W_q_norm"], sorted(rate_rows))
    run.csv("compare_spectra.csv", ["eta", "omega_over_wq", "channel", "model", "S_norm"],
            sorted(spec_rows, key=lambda r: (r[0], r[1], r[2], r[3])))
    run.extra["W_q0"] = w0
    run.extra["warnings"] = warnings
    run.finish()
    return EXIT_CONVERGENCE if run.failed() else EXIT_OK


COMMANDS = {
    "levels": cmd_levels,
    "rates": cmd_rates,
    "spectra": cmd_spectra,
    "gauge-audit": cmd_gauge_audit,
    "compare": cmd_compare_models,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rabi-emission",
                                     description="Emission rates and spectra of the dissipative quantum Rabi model.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True,
                       help="config file path or name of a bundled recipe (e.g. paper_defaults)")
        p.add_argument("--out", default=None, help="output directory (defaults to the config's outputs key)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seedless", action="store_true",
                       help="fail if the global numpy RNG state changes during the run")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _rng_fingerprint() -> str:
    state = np.random.get_state()
    return hashlib.sha256(repr(state[1].tolist()).encode() + repr(state[2:]).encode()).hexdigest()


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        out = Path(args.out or cfg.outputs)
        before = _rng_fingerprint() if args.seedless else None
        code = COMMANDS[args.command](cfg, out, args.workers)
        if args.seedless and _rng_fingerprint() != before:
            log.error("global RNG state changed during a --seedless run")
            return EXIT_CONFIG
        return code
    except (ConfigError, NormalizationError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
    except RabiEmissionError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
