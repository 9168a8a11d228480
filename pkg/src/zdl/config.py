"""Configuration for the laboratory.

Settings live in three dataclasses (evaluation, scanning, storage) bundled
into LabConfig.  A TOML file can override any field; the file is found via
the ZDL_CONFIG environment variable or an explicit path.  All fields have
working defaults so an empty environment is a valid configuration.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - py 3.10 path
    import tomli as tomllib

from .errors import ConfigError

ENV_VAR = "ZDL_CONFIG"


@dataclass(frozen=True)
class EvalConfig:
    """Knobs of the extended-precision evaluation core."""

    k_max: int = 4             # highest derivative order served
    pole_guard: float = 1e-3   # refuse evaluation when |s - 1| <= pole_guard
    output_bits: int = 64      # default certified output accuracy (absolute 2^-output_bits)
    guard_base: int = 32       # flat guard bits on top of output_bits
    guard_per_log_t: float = 8.0  # extra guard bits per unit of log(2 + |t|)
    sigma_k: float = 30.0      # far-field abscissa where normalized derivatives are 1 + O(1e-4)


@dataclass(frozen=True)
class ScanConfig:
    """Geometry of zero scans over the right half-plane strip."""

    sigma_left: float = 1e-6   # left strip edge; beta > 0 zeros with beta <= this are out of scope
    t_floor: float = 0.01      # bottom strip edge; keeps the pole at s = 1 outside every rectangle
    t_max: float = 5000.0      # refuse scans above this height (kernel not tuned beyond it)
    line_step: float = 0.125   # initial grid step for critical-line sign-change scans


@dataclass(frozen=True)
class StoreConfig:
    path: str = "zdl_store.jsonl"


@dataclass(frozen=True)
class LabConfig:
    eval: EvalConfig = dataclasses.field(default_factory=EvalConfig)
    scan: ScanConfig = dataclasses.field(default_factory=ScanConfig)
    store: StoreConfig = dataclasses.field(default_factory=StoreConfig)

    def canonical_dict(self) -> dict:
        """Nested plain-dict form with deterministic key order (for report headers)."""
        out: dict = {}
        for section in ("eval", "scan", "store"):
            sec = getattr(self, section)
            out[section] = {f.name: getattr(sec, f.name) for f in dataclasses.fields(sec)}
        return out


def _apply_section(cls, defaults, table: Mapping[str, Any], section: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {name: getattr(defaults, name) for name in known}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}")
        want = known[key].type
        # tolerate ints where floats are declared; reject the reverse and other mismatches
        current = kwargs[key]
        if isinstance(current, bool) or isinstance(value, bool):
            raise ConfigError(f"{section}.{key}: unsupported boolean")
        if isinstance(current, float) and isinstance(value, int):
            value = float(value)
        if not isinstance(value, type(current)):
            raise ConfigError(
                f"{section}.{key}: expected {type(current).__name__}, got {type(value).__name__}"
            )
        kwargs[key] = value
    del want
    return cls(**kwargs)


def load_config(path: Optional[str] = None) -> LabConfig:
    """Build a LabConfig from defaults, overriding from a TOML file if given.

    Resolution order: explicit ``path`` argument, else ``$ZDL_CONFIG``, else
    pure defaults.  Unknown keys and type mismatches raise ConfigError rather
    than being ignored, so typos in experiment configs fail loudly.
    """
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    base = LabConfig()
    if path is None:
        return base
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    sections = {}
    for name, cls, defaults in (
        ("eval", EvalConfig, base.eval),
        ("scan", ScanConfig, base.scan),
        ("store", StoreConfig, base.store),
    ):
        table = data.pop(name, {})
        if not isinstance(table, dict):
            raise ConfigError(f"section [{name}] must be a table")
        sections[name] = _apply_section(cls, defaults, table, name)
    if data:
        raise ConfigError(f"unknown config sections: {sorted(data)}")
    cfg = LabConfig(**sections)
    _validate(cfg)
    return cfg


def _validate(cfg: LabConfig) -> None:
    e, s = cfg.eval, cfg.scan
    if e.k_max < 1 or e.k_max > 8:
        raise ConfigError("eval.k_max must be in 1..8")
    if not (0 < e.pole_guard < 0.5):
        raise ConfigError("eval.pole_guard must be in (0, 0.5)")
    if e.output_bits < 53:
        raise ConfigError("eval.output_bits must be >= 53")
    if e.guard_base < 0 or e.guard_per_log_t < 0:
        raise ConfigError("guard bits must be nonnegative")
    if e.sigma_k < 10:
        raise ConfigError("eval.sigma_k must be >= 10 (far-field dominance)")
    if not (0 < s.sigma_left < 0.25):
        raise ConfigError("scan.sigma_left must be in (0, 0.25)")
    if not (e.pole_guard < s.t_floor < 1.0):
        raise ConfigError("scan.t_floor must exceed eval.pole_guard and stay below 1")
    if s.t_max <= 10 or s.t_max > 5000.0:
        raise ConfigError("scan.t_max must be in (10, 5000]")
