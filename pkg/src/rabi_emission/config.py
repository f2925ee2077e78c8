"""Flat ``key = value`` run configuration with ``#`` comments and dotted keys.

Example::

    model = gme
    sweep.eta.log_min = -4
    sweep.eta.log_max = 0.4
    sweep.eta.points = 40
    bath.T_q = 0.05
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError
from .master import BathSpec
from .models import ModelParams
from .pipeline import MODELS

GAUGE_CHOICES = ("coulomb", "dipole", "both")
CHANNEL_CHOICES = ("cavity", "qubit", "cavity_wrong")
SPECTRUM_FORMS = ("replaced", "weighted")
_SECTION = "run"

KNOWN_KEYS = {
    "model", "models", "gauge", "delta", "omega_q", "channels", "outputs", "spectrum.form",
    "sweep.eta.values", "sweep.eta.log_min", "sweep.eta.log_max", "sweep.eta.min", "sweep.eta.max",
    "sweep.eta.points", "sweep.eta.spacing",
    "omega.min", "omega.max", "omega.points", "omega.spacing",
    "bath.kappa_over_wq", "bath.gamma_over_wq", "bath.T_c", "bath.T_q",
    "truncation.n_max", "truncation.M", "jc.coupling_prefactor",
    "audit.level_tol", "audit.element_tol", "audit.rate_tol",
}


@dataclass(frozen=True)
class OmegaGrid:
    min: float = 0.9
    max: float = 1.1
    points: int = 401
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(np.log10(self.min), np.log10(self.max), self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SweepConfig:
    model: str = "gme"
    models: tuple = ("gme", "dressed_rwa", "standard_jc")
    gauge: str = "coulomb"
    eta_grid: tuple = (0.1,)
    delta: float = 0.0
    omega_q: float = 1.0
    T_c: float = 0.0
    T_q: float = 0.05
    kappa_over_wq: float = 1e-3
    gamma_over_wq: float = 1e-4
    n_max: Union[int, str] = "auto"
    M: Union[int, str] = "auto"
    omega_grid: OmegaGrid = field(default_factory=OmegaGrid)
    channels: tuple = ("cavity", "qubit")
    outputs: str = "out"
    spectrum_form: str = "replaced"
    coupling_prefactor: float = 0.5
    level_tol: float = 1e-8
    element_tol: float = 1e-6
    rate_tol: float = 1e-6

    def __post_init__(self):
        if self.model not in MODELS or any(m not in MODELS for m in self.models):
            raise ConfigError(f"models must be among {MODELS}")
        if self.gauge not in GAUGE_CHOICES:
            raise ConfigError(f"gauge must be one of {GAUGE_CHOICES}")
        if not self.channels or any(c not in CHANNEL_CHOICES for c in self.channels):
            raise ConfigError(f"channels must be a non-empty subset of {CHANNEL_CHOICES}")
        eta = np.asarray(self.eta_grid, dtype=float)
        if eta.size == 0 or np.any(np.diff(eta) <= 0) or np.any(eta < 0):
            raise ConfigError("eta grid must be non-empty, non-negative and strictly ascending")
        if not (self.kappa_over_wq > 0 and self.gamma_over_wq > 0):
            raise ConfigError("rates must be positive")
        if self.T_c < 0 or self.T_q < 0:
            raise ConfigError("temperatures must be non-negative")
        if self.omega_q <= 0 or self.delta <= -1:
            raise ConfigError("need omega_q > 0 and delta > -1")
        g = self.omega_grid
        if g.spacing not in ("linear", "log") or g.points < 1 or not 0 < g.min < g.max:
            raise ConfigError("omega grid needs 0 < min < max, points >= 1, spacing linear|log")
        if self.spectrum_form not in SPECTRUM_FORMS:
            raise ConfigError(f"spectrum.form must be one of {SPECTRUM_FORMS}")
        for name in ("n_max", "M"):
            v = getattr(self, name)
            if v != "auto" and not (isinstance(v, int) and v >= 1):
                raise ConfigError(f"{name} must be a positive integer or 'auto'")

    def params(self, eta: float) -> ModelParams:
        return ModelParams.from_detuning(float(eta), self.delta, self.omega_q)

    def bath(self) -> BathSpec:
        return BathSpec(self.kappa_over_wq * self.omega_q, self.gamma_over_wq * self.omega_q,
                        self.T_c, self.T_q)

    def echo(self) -> dict:
        d = asdict(self)
        d["eta_grid"] = [float(x) for x in self.eta_grid]
        d["models"] = list(self.models)
        d["channels"] = list(self.channels)
        return d


def _split_list(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _truncation(text: str):
    if text.strip().lower() == "auto":
        return "auto"
    return int(text)


def _eta_grid(raw: dict) -> tuple:
    if "sweep.eta.values" in raw:
        return tuple(float(v) for v in _split_list(raw["sweep.eta.values"]))
    points = int(raw.get("sweep.eta.points", 1))
    if "sweep.eta.log_min" in raw:
        lo, hi = float(raw["sweep.eta.log_min"]), float(raw.get("sweep.eta.log_max", raw["sweep.eta.log_min"]))
        return tuple(np.logspace(lo, hi, points).tolist())
    if "sweep.eta.min" in raw:
        lo, hi = float(raw["sweep.eta.min"]), float(raw.get("sweep.eta.max", raw["sweep.eta.min"]))
        return tuple(np.linspace(lo, hi, points).tolist())
    return SweepConfig.eta_grid


def parse_config(text: str) -> SweepConfig:
    """Parse configuration text into a validated :class:`SweepConfig`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                       interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    raw = dict(parser[_SECTION])
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")

    d = SweepConfig()
    try:
        grid = OmegaGrid(
            min=float(raw.get("omega.min", d.omega_grid.min)),
            max=float(raw.get("omega.max", d.omega_grid.max)),
            points=int(raw.get("omega.points", d.omega_grid.points)),
            spacing=raw.get("omega.spacing", d.omega_grid.spacing),
        )
        return SweepConfig(
            model=raw.get("model", d.model),
            models=_split_list(raw["models"]) if "models" in raw else d.models,
            gauge=raw.get("gauge", d.gauge),
            eta_grid=_eta_grid(raw),
            delta=float(raw.get("delta", d.delta)),
            omega_q=float(raw.get("omega_q", d.omega_q)),
            T_c=float(raw.get("bath.T_c", d.T_c)),
            T_q=float(raw.get("bath.T_q", d.T_q)),
            kappa_over_wq=float(raw.get("bath.kappa_over_wq", d.kappa_over_wq)),
            gamma_over_wq=float(raw.get("bath.gamma_over_wq", d.gamma_over_wq)),
            n_max=_truncation(raw.get("truncation.n_max", "auto")),
            M=_truncation(raw.get("truncation.M", "auto")),
            omega_grid=grid,
            channels=_split_list(raw["channels"]) if "channels" in raw else d.channels,
            outputs=raw.get("outputs", d.outputs),
            spectrum_form=raw.get("spectrum.form", d.spectrum_form),
            coupling_prefactor=float(raw.get("jc.coupling_prefactor", d.coupling_prefactor)),
            level_tol=float(raw.get("audit.level_tol", d.level_tol)),
            element_tol=float(raw.get("audit.element_tol", d.element_tol)),
            rate_tol=float(raw.get("audit.rate_tol", d.rate_tol)),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def builtin_configs() -> list[str]:
    root = resources.files("rabi_emission") / "data"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(path: Union[str, Path]) -> SweepConfig:
    """Load a config file; a bare name such as ``paper_defaults`` selects a bundled recipe."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text(encoding="utf-8"))
    name = p.name[:-4] if p.name.endswith(".cfg") else p.name
    if p.parent == Path(".") and name in builtin_configs():
        text = (resources.files("rabi_emission") / "data" / f"{name}.cfg").read_text(encoding="utf-8")
        return parse_config(text)
    raise ConfigError(f"configuration file not found: {path}")
