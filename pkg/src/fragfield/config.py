"""Run configuration from ``key = value`` text files."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .fmo import ESP_MODES, FMOOptions
from .scf import SCFOptions
from .vqe.optimize import OPTIMIZERS, OptimizeOptions


class ConfigError(ValueError):
    pass


@dataclass
class UCCSDOptions:
    trotter: bool = True
    guess: str = "mp2"  # or "zero"
    backend: str = "auto"
    degenerate_zero: float = 1e-6  # MP2 denominators below this seed a zero amplitude


@dataclass
class RunConfig:
    scf: SCFOptions = field(default_factory=SCFOptions)
    fmo: FMOOptions = field(default_factory=FMOOptions)
    vqe: OptimizeOptions = field(default_factory=OptimizeOptions)
    uccsd: UCCSDOptions = field(default_factory=UCCSDOptions)

    def __post_init__(self):
        self.fmo.scf = self.scf

    def to_dict(self) -> dict:
        d = {"scf": asdict(self.scf), "vqe": asdict(self.vqe), "uccsd": asdict(self.uccsd)}
        d["fmo"] = {k: v for k, v in asdict(self.fmo).items() if k not in ("scf", "jobs")}
        return d

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


_SECTIONS = {"scf": SCFOptions, "fmo": FMOOptions, "vqe": OptimizeOptions, "uccsd": UCCSDOptions}
_CHOICES = {
    ("fmo", "esp"): ESP_MODES,
    ("vqe", "optimizer"): OPTIMIZERS,
    ("uccsd", "guess"): ("mp2", "zero"),
    ("uccsd", "backend"): ("auto", "qubit", "sector"),
}


def _convert(section: str, key: str, raw: str, current):
    if (section, key) in _CHOICES:
        if raw not in _CHOICES[(section, key)]:
            raise ConfigError(f"{section}.{key} must be one of {_CHOICES[(section, key)]}, got {raw!r}")
        return raw
    if isinstance(current, bool):
        if raw.lower() in ("on", "true", "yes", "1"):
            return True
        if raw.lower() in ("off", "false", "no", "0"):
            return False
        raise ConfigError(f"{section}.{key} expects on/off, got {raw!r}")
    if raw.lower() in ("none", "null"):
        return None
    try:
        if isinstance(current, int) or key in ("max_evals", "max_iter", "scc_max", "diis_dim"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from None


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    objs = {"scf": cfg.scf, "fmo": cfg.fmo, "vqe": cfg.vqe, "uccsd": cfg.uccsd}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        section, _, name = key.partition(".")
        if section not in _SECTIONS or name not in {f.name for f in fields(_SECTIONS[section])} or name == "scf":
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        obj = objs[section]
        setattr(obj, name, _convert(section, name, raw, getattr(obj, name)))
    for obj in objs.values():
        if hasattr(obj, "__post_init__"):
            try:
                obj.__post_init__()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    cfg.fmo.scf = cfg.scf
    return cfg


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
