"""Sound-class models: token -> class symbol lookup, and CCM keys."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

WILDCARD = "?"
PLACEHOLDER = "·"
TONE = "0"
KEEP, DISCARD = "keep", "discard"

# Modifier letters and marks stripped before a second lookup attempt.
_STRIP = set("ːˑʰʷʲˠˤⁿˡ̃ʼ'")
_TONE_CHARS = set("0123456789¹²³⁴⁵⁰˥˦˧˨˩")
_BOUNDARIES = {"+", "_", "#", "-"}


@dataclass(frozen=True)
class SoundClassModel:
    name: str
    mapping: Mapping[str, str]
    vowel_classes: frozenset
    vowel_policy: str = KEEP
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.vowel_policy not in (KEEP, DISCARD):
            raise ValueError(f"unknown vowel policy {self.vowel_policy!r}")

    @property
    def alphabet(self) -> tuple[str, ...]:
        """All class symbols the model can emit, wildcard last."""
        syms = dict.fromkeys(self.mapping.values())
        syms.pop(WILDCARD, None)
        return tuple(syms) + (TONE, WILDCARD)

    def classify(self, token: str) -> str:
        try:
            return self._cache[token]
        except KeyError:
            pass
        cls = self._lookup(token)
        self._cache[token] = cls
        return cls

    def _lookup(self, token: str) -> str:
        if token in self.mapping:
            return self.mapping[token]
        if token and all(ch in _TONE_CHARS for ch in token):
            return TONE
        base = "".join(
            ch for ch in unicodedata.normalize("NFD", token)
            if ch not in _STRIP and not unicodedata.combining(ch)
        )
        if base in self.mapping:
            return self.mapping[base]
        for ch in base:
            if ch in self.mapping:
                return self.mapping[ch]
        return WILDCARD

    def is_vowel(self, symbol: str) -> bool:
        return symbol in self.vowel_classes or symbol == TONE

    def with_policy(self, policy: str) -> "SoundClassModel":
        return SoundClassModel(self.name, self.mapping, self.vowel_classes, policy)


def to_class_string(tokens: Sequence[str], model: SoundClassModel) -> tuple[str, ...]:
    """Map tokens to class symbols, dropping vowels under the discard policy."""
    out = []
    for tok in tokens:
        if tok in _BOUNDARIES:
            continue
        sym = model.classify(tok)
        if model.vowel_policy == DISCARD and model.is_vowel(sym):
            continue
        out.append(sym)
    return tuple(out)


def ccm_key(tokens: Sequence[str], model: SoundClassModel) -> tuple[str, str]:
    """First two consonant classes, padded with the placeholder symbol."""
    if model.vowel_policy != DISCARD:
        raise ValueError("ccm_key needs a vowel-discarding model")
    classes = to_class_string(tokens, model)[:2]
    return tuple(classes) + (PLACEHOLDER,) * (2 - len(classes))


def read_mapping(lines: Iterable[str]) -> dict[str, str]:
    mapping = {}
    for i, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts == ["TOKEN", "CLASS"]:
            continue
        if len(parts) != 2 or not parts[0] or len(parts[1]) != 1:
            raise ValueError(f"line {i}: expected TOKEN<TAB>single-character CLASS")
        mapping[parts[0]] = parts[1]
    return mapping


def load_model(path, name=None, vowel_classes: Iterable[str] = ("V",), vowel_policy=KEEP):
    """Load a TOKEN/CLASS table from disk."""
    with open(path, encoding="utf-8") as fh:
        mapping = read_mapping(fh)
    return SoundClassModel(name or str(path), mapping, frozenset(vowel_classes), vowel_policy)


def _data_lines(filename):
    return resources.files("cognatephylo").joinpath("data", filename).read_text("utf-8").splitlines()


@lru_cache(maxsize=None)
def ccm_model() -> SoundClassModel:
    """Coarse consonant-class model (10 consonant classes, vowels discarded)."""
    return SoundClassModel("ccm", read_mapping(_data_lines("ccm.tsv")), frozenset("V"), DISCARD)


@lru_cache(maxsize=None)
def sca_model() -> SoundClassModel:
    """Finer 24-class model with vowel classes kept, used for alignment."""
    return SoundClassModel("sca", read_mapping(_data_lines("sca.tsv")), frozenset("AEIOUY"), KEEP)


@dataclass(frozen=True)
class ScoreTable:
    """Symmetric symbol-pair scores plus affine gap penalties."""

    symbols: tuple[str, ...]
    matrix: np.ndarray
    gap_open: float
    gap_extend: float

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def encode(self, symbols: Sequence[str]) -> np.ndarray:
        idx = self.index
        fallback = idx.get(WILDCARD, 0)
        return np.array([idx.get(s, fallback) for s in symbols], dtype=np.int64)

    def score(self, a: str, b: str) -> float:
        idx = self.index
        return float(self.matrix[idx.get(a, idx[WILDCARD]), idx.get(b, idx[WILDCARD])])

    def dumps(self) -> str:
        lines = [f"# gap_open={self.gap_open!r} gap_extend={self.gap_extend!r}", "SYMBOL_A\tSYMBOL_B\tSCORE"]
        for i, a in enumerate(self.symbols):
            for j, b in enumerate(self.symbols):
                lines.append(f"{a}\t{b}\t{float(self.matrix[i, j])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ScoreTable":
        gap_open, gap_extend = -1.0, -0.5
        entries = {}
        symbols = {}
        for i, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if line.startswith("#"):
                for part in line[1:].split():
                    key, _, val = part.partition("=")
                    if key == "gap_open":
                        gap_open = float(val)
                    elif key == "gap_extend":
                        gap_extend = float(val)
                continue
            parts = line.split("\t")
            if parts == ["SYMBOL_A", "SYMBOL_B", "SCORE"]:
                continue
            if len(parts) != 3:
                raise ValueError(f"line {i}: expected three tab-separated fields")
            a, b, s = parts
            symbols.setdefault(a, None)
            symbols.setdefault(b, None)
            entries[a, b] = float(s)
        syms = tuple(symbols)
        idx = {s: i for i, s in enumerate(syms)}
        mat = np.zeros((len(syms), len(syms)))
        for (a, b), s in entries.items():
            mat[idx[a], idx[b]] = s
            if (b, a) not in entries:
                mat[idx[b], idx[a]] = s
        return cls(syms, mat, gap_open, gap_extend)


@lru_cache(maxsize=None)
def sca_scores() -> ScoreTable:
    """Shipped symbol-pair score table for the SCA-style model."""
    return ScoreTable.loads("\n".join(_data_lines("sca_scores.tsv")))
