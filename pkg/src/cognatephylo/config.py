"""Flat ``key = value`` configuration with typed defaults.

Relative paths in a config file resolve against the file's directory;
paths given with ``--set`` resolve against the working directory.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional

from .errors import ConfigurationError

METHODS = ("CCM", "NED", "SCA", "LEXSTAT", "ONLINEPMI")
EXPERT = "EXPERT"


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _methods(text: str) -> tuple[str, ...]:
    return tuple(m.strip().upper() for m in text.split(",") if m.strip())


def _paths(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _unit(text: str) -> float:
    x = float(text)
    if not 0.0 < x <= 1.0:
        raise ValueError("must lie in (0, 1]")
    return x


def _positive_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise ValueError("must be a positive integer")
    return x


def _nonneg(text: str) -> float:
    x = float(text)
    if x < 0:
        raise ValueError("must be non-negative")
    return x


# key -> (parser, default text)
SCHEMA: dict[str, tuple[Callable[[str], Any], str]] = {
    "wordlist": (str, ""),
    "gold_tree": (str, ""),
    "family": (str, "FAMILY"),
    "methods": (_methods, ",".join(METHODS) + "," + EXPERT),
    "seed": (int, "1"),
    "partition": (str, ""),
    "matrix": (str, ""),
    "samples": (_paths, ""),
    "threshold.NED": (_unit, "0.75"),
    "threshold.SCA": (_unit, "0.45"),
    "threshold.LEXSTAT": (_unit, "0.55"),
    "threshold.ONLINEPMI": (_unit, "0.5"),
    "lexstat.n_perm": (_positive_int, "100"),
    "lexstat.prefilter": (_unit, "0.6"),
    "lexstat.epsilon": (float, "0.01"),
    "pmi.batch_size": (_positive_int, "256"),
    "pmi.iterations": (_positive_int, "10"),
    "pmi.mix": (_unit, "0.5"),
    "pmi.gap_open": (float, "-2.5"),
    "pmi.gap_extend": (float, "-1.75"),
    "mcmc.generations": (_positive_int, "100000"),
    "mcmc.sample_every": (_positive_int, "1000"),
    "mcmc.ascertainment": (_bool, "true"),
    "mcmc.weight.narrow": (_nonneg, "0.10"),
    "mcmc.weight.narrow_rates": (_nonneg, "0.12"),
    "mcmc.weight.spr": (_nonneg, "0.06"),
    "mcmc.weight.age": (_nonneg, "0.12"),
    "mcmc.weight.age_rates": (_nonneg, "0.10"),
    "mcmc.weight.root": (_nonneg, "0.05"),
    "mcmc.weight.pi0": (_nonneg, "0.03"),
    "mcmc.weight.alpha": (_nonneg, "0.03"),
    "mcmc.weight.sigma2": (_nonneg, "0.02"),
    "mcmc.weight.sigma2_rates": (_nonneg, "0.06"),
    "mcmc.weight.rate": (_nonneg, "0.20"),
    "mcmc.weight.rate_draw": (_nonneg, "0.10"),
    "eval.bcubed": (_choice("auto", "yes", "no"), "auto"),
    "eval.average": (_choice("concept", "item"), "concept"),
    "eval.min_freq": (_nonneg, "0.1"),
    "eval.asdsf_threshold": (_nonneg, "0.01"),
    "eval.consensus": (float, "0.5"),
    "eval.sd": (_choice("population", "sample"), "population"),
    "eval.pool": (_choice("both", "run1"), "both"),
    "eval.histogram": (_bool, "false"),
    "simulate.tree": (str, ""),
    "simulate.sites": (_positive_int, "500"),
    "simulate.pi0": (_unit, "0.7"),
    "simulate.alpha": (float, "1.0"),
    "simulate.sigma2": (_nonneg, "0.0"),
}

PATH_KEYS = ("wordlist", "gold_tree", "partition", "matrix", "simulate.tree")


class Config(Mapping[str, Any]):
    """Typed, validated view over the raw string settings."""

    def __init__(self, raw: Optional[Mapping[str, str]] = None):
        self.raw = {k: v for k, (_, v) in SCHEMA.items()}
        self._values: dict[str, Any] = {}
        for k, v in (raw or {}).items():
            self.set(k, v)
        for k in SCHEMA:
            if k not in self._values:
                self._values[k] = self._parse(k, self.raw[k])

    @staticmethod
    def _parse(key: str, text: str) -> Any:
        parser = SCHEMA[key][0]
        try:
            return parser(text)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {text!r} ({exc})") from None

    def set(self, key: str, text: str) -> None:
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigurationError(f"unknown config key {key!r}")
        text = text.strip()
        self._values[key] = self._parse(key, text)
        self.raw[key] = text

    def __getitem__(self, key: str) -> Any:
        return self._values[key]

    def __iter__(self):
        return iter(SCHEMA)

    def __len__(self) -> int:
        return len(SCHEMA)

    def digest(self) -> str:
        """SHA-256 over the sorted effective settings (first 16 hex digits)."""
        text = "\n".join(f"{k}={self.raw[k]}" for k in sorted(self.raw))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def path(self, key: str) -> Optional[Path]:
        text = self[key]
        return Path(text) if text else None

    def require_paths(self, keys: Iterable[str]) -> None:
        for key in keys:
            p = self.path(key)
            if p is None:
                raise ConfigurationError(f"{key} is not set")
            if not p.exists():
                raise ConfigurationError(f"{key}: no such file {str(p)!r}")

    def methods(self) -> tuple[str, ...]:
        known = set(METHODS) | {EXPERT}
        bad = [m for m in self["methods"] if m not in known]
        if bad:
            raise ConfigurationError(f"unknown methods: {bad}")
        if not self["methods"]:
            raise ConfigurationError("no methods selected")
        return self["methods"]

    def validate(self) -> None:
        if not 0.5 <= self["eval.consensus"] < 1.0:
            raise ConfigurationError("eval.consensus must be in [0.5, 1)")
        if self["mcmc.sample_every"] > self["mcmc.generations"]:
            raise ConfigurationError("mcmc.sample_every exceeds mcmc.generations")
        self.methods()


def parse_lines(lines: Iterable[str], base: Optional[Path] = None) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if base is not None and key in PATH_KEYS and value and not Path(value).is_absolute():
            value = str(base / value)
        if base is not None and key == "samples":
            value = ",".join(p if Path(p).is_absolute() else str(base / p) for p in _paths(value))
        out[key] = value
    return out


def load_config(path: Optional[str | Path] = None, overrides: Iterable[str] = ()) -> Config:
    raw: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
        raw.update(parse_lines(text.splitlines(), path.parent))
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    cfg = Config(raw)
    cfg.validate()
    return cfg
