"""Line-based ``key = value`` run configuration."""
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, PotentialSpec

__all__ = ["RunConfig", "ConfigError", "parse_config", "format_config"]

KEYS = ("dimension", "l", "b", "blocks", "k_max", "tol", "window", "sweep", "out")


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunConfig:
    """Parsed run parameters.

    ``blocks`` is the number of retained block rows, i.e. ``N + 1``.
    """

    dimension: int = 3
    l: int = 0
    b: float = 1.0
    coefficients: tuple = ()
    blocks: int = 4
    k_max: int = 2**16
    tol: float = 1e-12
    window: tuple = None
    sweep: tuple = (0.5, 3.0, 26)
    out: str = None
    source: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def N(self):
        return self.blocks - 1

    def basis(self):
        return BasisSpec(self.dimension, self.l, self.b)

    def potential(self):
        return PotentialSpec.from_pairs(self.coefficients)

    def sweep_values(self):
        lo, hi, steps = self.sweep
        return np.linspace(lo, hi, int(steps))


def _number(text, lineno, integer=False):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"non-numeric value {text!r}", lineno) from None
    if integer:
        if value != int(value):
            raise ConfigError(f"expected an integer, got {text!r}", lineno)
        return int(value)
    return value


def _numbers(text, count, lineno):
    parts = [p for p in text.replace(",", " ").split()]
    if len(parts) != count:
        raise ConfigError(f"expected {count} numbers, got {text!r}", lineno)
    return tuple(_number(p, lineno) for p in parts)


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; later duplicate keys override earlier ones.

    >>> cfg = parse_config("dimension = 3\\ncoeff.-1 = -1.0\\ncoeff.1 = 1.0")
    >>> cfg.potential().coeffs
    {-1: -1.0, 1: 1.0}
    """
    values = {}
    coeffs = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed line {raw.strip()!r} (expected key = value)", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        if key.startswith("coeff."):
            power = _number(key[len("coeff."):], lineno, integer=True)
            if power < -1:
                raise ConfigError(f"power {power} < -1 is not supported", lineno)
            coeffs[power] = _number(value, lineno)
            continue
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in ("dimension", "l", "blocks", "k_max"):
            parsed = _number(value, lineno, integer=True)
        elif key in ("b", "tol"):
            parsed = _number(value, lineno)
        elif key == "window":
            parsed = _numbers(value, 2, lineno)
            if not parsed[0] < parsed[1]:
                raise ConfigError("window must satisfy lo < hi", lineno)
        elif key == "sweep":
            lo, hi, steps = _numbers(value, 3, lineno)
            if steps != int(steps) or steps < 1:
                raise ConfigError("sweep step count must be a positive integer", lineno)
            if lo <= 0 or hi <= 0:
                raise ConfigError("sweep b values must be positive", lineno)
            parsed = (lo, hi, int(steps))
        else:
            parsed = value
        values[key] = parsed
        lines[key] = lineno

    if not coeffs:
        raise ConfigError("required keys missing: at least one coeff.<i> entry")
    checks = {
        "b": lambda v: v > 0,
        "dimension": lambda v: v >= 2,
        "l": lambda v: v >= 0,
        "blocks": lambda v: v >= 1,
        "k_max": lambda v: v >= 2,
        "tol": lambda v: v > 0,
    }
    for key, ok in checks.items():
        if key in values and not ok(values[key]):
            raise ConfigError(f"invalid value for {key}: {values[key]}", lines[key])
    return RunConfig(coefficients=tuple(sorted(coeffs.items())), source=dict(values), **values)


def format_config(cfg: RunConfig):
    """Canonical ``key = value`` lines (parseable by :func:`parse_config`)."""
    out = [
        f"dimension = {cfg.dimension}",
        f"l = {cfg.l}",
        f"b = {cfg.b!r}",
    ]
    out += [f"coeff.{i} = {a!r}" for i, a in cfg.coefficients]
    out += [f"blocks = {cfg.blocks}", f"k_max = {cfg.k_max}", f"tol = {cfg.tol!r}"]
    if cfg.window is not None:
        out.append(f"window = {cfg.window[0]!r}, {cfg.window[1]!r}")
    out.append(f"sweep = {cfg.sweep[0]!r}, {cfg.sweep[1]!r}, {cfg.sweep[2]}")
    return out
