"""Tab-separated multilingual wordlists and coverage statistics."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, TextIO

from .errors import DuplicateIdError, FormatError, RowError

REQUIRED = ("ID", "LANGUAGE", "CONCEPT", "TOKENS")
OPTIONAL_COGNATE = "COGNATE_ID"


@dataclass(frozen=True)
class WordEntry:
    id: str
    language: str
    concept: str
    tokens: tuple[str, ...]
    gold_cognate_id: Optional[str] = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"entry {self.id!r} has no tokens")


@dataclass(frozen=True)
class Wordlist:
    entries: tuple[WordEntry, ...]
    languages: tuple[str, ...]
    concepts: tuple[str, ...]
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    @classmethod
    def from_entries(cls, entries: Iterable[WordEntry], meta=None) -> "Wordlist":
        entries = tuple(entries)
        seen = set()
        for e in entries:
            if e.id in seen:
                raise DuplicateIdError(e.id)
            seen.add(e.id)
        languages = tuple(dict.fromkeys(e.language for e in entries))
        concepts = tuple(dict.fromkeys(e.concept for e in entries))
        return cls(entries, languages, concepts, dict(meta or {}))

    def __len__(self):
        return len(self.entries)

    @property
    def has_gold(self) -> bool:
        return bool(self.entries) and all(e.gold_cognate_id is not None for e in self.entries)

    def by_concept(self) -> dict[str, list[WordEntry]]:
        out: dict[str, list[WordEntry]] = {c: [] for c in self.concepts}
        for e in self.entries:
            out[e.concept].append(e)
        return out

    def coverage(self) -> dict[str, frozenset]:
        """Concepts attested per language (synonyms count once)."""
        cov: dict[str, set] = {lang: set() for lang in self.languages}
        for e in self.entries:
            cov[e.language].add(e.concept)
        return {k: frozenset(v) for k, v in cov.items()}

    def restrict_languages(self, keep: Iterable[str]) -> "Wordlist":
        keep = set(keep)
        return Wordlist.from_entries(e for e in self.entries if e.language in keep)


def load_wordlist(source: TextIO | str, columns: Optional[Mapping[str, str]] = None) -> Wordlist:
    """Read a wordlist from a TSV stream.

    ``columns`` maps the canonical column names (ID, LANGUAGE, CONCEPT,
    TOKENS, COGNATE_ID) to the header names used in the file, for files with
    a different field layout.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    layout = {name: name for name in REQUIRED + (OPTIONAL_COGNATE,)}
    if columns:
        layout.update(columns)
    reader = csv.reader(source, delimiter="\t", quoting=csv.QUOTE_NONE)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty wordlist: no header row") from None
    index = {name: i for i, name in enumerate(header)}
    missing = [c for c in REQUIRED if layout[c] not in index]
    if missing:
        raise FormatError(f"missing required column(s): {', '.join(missing)}")
    cog_col = index.get(layout[OPTIONAL_COGNATE])
    cols = [index[layout[c]] for c in REQUIRED]

    entries = []
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell for cell in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        ident, language, concept, tokens = (row[i] for i in cols)
        if ident in seen:
            raise DuplicateIdError(ident)
        seen.add(ident)
        toks = tuple(t for t in tokens.split(" ") if t)
        if not toks:
            raise RowError(lineno, f"empty TOKENS field for ID {ident!r}")
        cog = row[cog_col] if cog_col is not None and row[cog_col] != "" else None
        entries.append(WordEntry(ident, language, concept, toks, cog))
    return Wordlist.from_entries(entries)


def read_wordlist(path, columns=None) -> Wordlist:
    with open(path, encoding="utf-8", newline="") as fh:
        return load_wordlist(fh, columns)


def dump_wordlist(wl: Wordlist, sink: TextIO, with_cognates: Optional[bool] = None) -> None:
    if with_cognates is None:
        with_cognates = any(e.gold_cognate_id is not None for e in wl.entries)
    header = list(REQUIRED) + ([OPTIONAL_COGNATE] if with_cognates else [])
    sink.write("\t".join(header) + "\n")
    for e in wl.entries:
        row = [e.id, e.language, e.concept, " ".join(e.tokens)]
        if with_cognates:
            row.append(e.gold_cognate_id or "")
        sink.write("\t".join(row) + "\n")


def _amc(coverage: Mapping[str, frozenset], n_concepts: int) -> float:
    langs = list(coverage)
    pairs = list(itertools.combinations(langs, 2))
    total = sum(len(coverage[a] & coverage[b]) for a, b in pairs)
    return total / (len(pairs) * n_concepts)


def average_mutual_coverage(wl: Wordlist) -> float:
    """Mean over language pairs of the fraction of the concept list both attest."""
    if len(wl.languages) < 2:
        raise ValueError("average mutual coverage needs at least two languages")
    if not wl.concepts:
        raise ValueError("average mutual coverage needs at least one concept")
    return _amc(wl.coverage(), len(wl.concepts))


def subselect_languages(wl: Wordlist, target_amc: float) -> Wordlist:
    """Greedily drop languages until the AMC reaches ``target_amc``.

    At each step the language whose removal raises the AMC most is dropped
    (ties go to the lexicographically smallest id).  Stops at two languages
    or when no single removal improves the AMC.  The returned wordlist
    carries ``meta["amc"]``, ``meta["below_target"]`` and
    ``meta["removed"]``.
    """
    if not 0.0 < target_amc <= 1.0:
        raise ValueError("target_amc must lie in (0, 1]")
    current = wl
    amc = average_mutual_coverage(current)
    removed = []
    while amc < target_amc and len(current.languages) > 2:
        cov = current.coverage()
        best = None
        for lang in sorted(current.languages):
            rest = {k: v for k, v in cov.items() if k != lang}
            n_concepts = len(frozenset().union(*rest.values()))
            value = _amc(rest, n_concepts) if n_concepts else 0.0
            if best is None or value > best[0]:
                best = (value, lang)
        if best[0] <= amc:
            break
        amc, lang = best
        removed.append(lang)
        current = current.restrict_languages(l for l in current.languages if l != lang)
    return Wordlist(
        current.entries,
        current.languages,
        current.concepts,
        {"amc": amc, "below_target": amc < target_amc, "removed": tuple(removed)},
    )
