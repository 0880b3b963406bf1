"""Run configuration: dataclass defaults plus ``key = value`` text files."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class VerifyConfig:
    """Significance levels and budgets shared by the verification drivers."""

    seed: int = 1
    trials: int = 10_000
    sigma: float = 3.0
    moment_sigma: float = 4.0
    ks_alpha: float = 0.01
    convergence_allowance: float = 0.05
    bias_fraction: float = 0.01
    tail_eps: float = 1e-6
    oracle_dps: int = 40
    oracle_rtol: float = 1e-9
    threads: int = 1


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def _coerce(value: str, typ):
    if typ in (int, "int"):
        return int(float(value)) if "e" in value.lower() else int(value)
    if typ in (float, "float"):
        return float(value)
    return value


def apply_overrides(cfg, overrides: dict[str, str], strict: bool = True):
    """Return a copy of dataclass ``cfg`` with string overrides cast to the field types."""
    types = {f.name: f.type for f in fields(cfg)}
    changes = {}
    for k, v in overrides.items():
        if k not in types:
            if strict:
                raise KeyError(f"unknown configuration key {k!r}")
            continue
        changes[k] = _coerce(v, types[k])
    return dataclasses.replace(cfg, **changes)


def load_config(path: str | Path, base: VerifyConfig | None = None) -> VerifyConfig:
    return apply_overrides(base or VerifyConfig(), parse_key_values(Path(path).read_text()))
