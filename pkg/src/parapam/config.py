"""Plain-text ``key = value`` run configuration with CLI overrides."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .littlewood_paley import check_exponents
from .solver import MODELS, SCHEMES
from .torus import GridSpec


FORCINGS = ("noise", "smooth", "none")


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part.startswith("2^"):
            out.append(2.0 ** float(part[2:]))
        else:
            out.append(float(part))
    return tuple(out)


def _parse_int_list(text: str) -> tuple:
    """Comma list of non-negative integers; ``a-b`` is an inclusive range."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _parse_optional_float(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


@dataclass(frozen=True)
class RunConfig:
    n: int = 256
    T: float = 0.05
    dt: Optional[float] = None
    eps: tuple = tuple(2.0**-m for m in range(4, 9))
    seeds: tuple = (0,)
    renormalize: bool = True
    scheme: str = "imex"
    snapshots: int = 100
    alpha: float = 0.8
    beta: float = 0.7
    model: str = "sin-cos"
    forcing: str = "noise"
    out: str = "out"
    workers: int = 1
    trajectory: Optional[str] = None

    def validate(self) -> None:
        try:
            GridSpec(self.n)
        except ValueError as exc:
            raise ConfigError(f"n: {exc}") from None
        if not self.T > 0:
            raise ConfigError("T: must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt: must be positive or 'auto'")
        if not self.eps:
            raise ConfigError("eps: empty list")
        if any(e <= 0 for e in self.eps):
            raise ConfigError("eps: values must be positive")
        for a, b in zip(self.eps, self.eps[1:]):
            if not abs(a / b - 2.0) < 1e-9:
                raise ConfigError("eps: list must be dyadic and decreasing (each entry half the previous)")
        if not self.seeds:
            raise ConfigError("seeds: empty list")
        if self.model not in MODELS:
            raise ConfigError(f"model: {self.model!r} not in registry {sorted(MODELS)}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme: {self.scheme!r} not in {SCHEMES}")
        if self.forcing not in FORCINGS:
            raise ConfigError(f"forcing: must be one of {FORCINGS}")
        if self.snapshots < 1 or self.workers < 1:
            raise ConfigError("snapshots and workers must be >= 1")
        try:
            check_exponents(self.alpha, self.beta)
        except ValueError as exc:
            raise ConfigError(f"alpha/beta: {exc}") from None

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_PARSERS = {
    "n": int,
    "T": float,
    "dt": _parse_optional_float,
    "eps": _parse_float_list,
    "seeds": _parse_int_list,
    "renormalize": _parse_bool,
    "scheme": str.strip,
    "snapshots": int,
    "alpha": float,
    "beta": float,
    "model": str.strip,
    "forcing": str.strip,
    "out": str.strip,
    "workers": int,
    "trajectory": str.strip,
}


def apply_setting(values: dict, key: str, raw: str, where: str) -> None:
    key = key.strip()
    if key not in _PARSERS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        values[key] = _PARSERS[key](raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None


def load_config(path=None, overrides=()) -> RunConfig:
    """Read ``key = value`` lines ('#' comments), then apply ``key=value`` overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        try:
            lines = path.read_text().splitlines()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        for lineno, line in enumerate(lines, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = line.split("=", 1)
            apply_setting(values, key, raw, f"{path}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        apply_setting(values, key, raw, f"--set {key.strip()}")
    cfg = replace(RunConfig(), **values)
    cfg.validate()
    return cfg
