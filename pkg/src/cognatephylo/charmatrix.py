"""Binary language x cognate-set character matrices."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .cogcluster import CognatePartition, format_label, parse_label
from .errors import ParseError
from .wordlist import Wordlist

MISSING = -1
_SYMBOL = {0: "0", 1: "1", MISSING: "?"}
_VALUE = {"0": 0, "1": 1, "?": MISSING}


@dataclass(frozen=True)
class CharacterMatrix:
    """``cells[i, c]`` is 0, 1 or :data:`MISSING` (-1)."""

    languages: tuple[str, ...]
    columns: tuple[str, ...]
    cells: np.ndarray
    column_concept: tuple[str, ...]

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.shape != (len(self.languages), len(self.columns)):
            raise ValueError("cell array shape does not match languages x columns")
        if len(self.column_concept) != len(self.columns):
            raise ValueError("column_concept must have one entry per column")
        if not np.isin(cells, (0, 1, MISSING)).all():
            raise ValueError("cells must be 0, 1 or missing")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n_languages(self) -> int:
        return len(self.languages)

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    def __eq__(self, other):
        if not isinstance(other, CharacterMatrix):
            return NotImplemented
        return (
            self.languages == other.languages
            and self.columns == other.columns
            and self.column_concept == other.column_concept
            and np.array_equal(self.cells, other.cells)
        )


def to_matrix(wl: Wordlist, part: CognatePartition) -> CharacterMatrix:
    """One column per cognate set, ordered by (concept order, cluster index)."""
    known = {e.id for e in wl.entries}
    unknown = sorted(part.ids - known)
    if unknown:
        raise ValueError(f"partition references unknown entry ids: {unknown}")
    uncovered = sorted(known - part.ids)
    if uncovered:
        raise ValueError(f"partition does not cover entry ids: {uncovered}")

    concept_rank = {c: i for i, c in enumerate(wl.concepts)}
    labels = sorted(set(part.assignment.values()), key=lambda lab: (concept_rank[lab[0]], lab[1]))
    col_index = {lab: j for j, lab in enumerate(labels)}
    lang_index = {lang: i for i, lang in enumerate(wl.languages)}

    cells = np.full((len(wl.languages), len(labels)), MISSING, dtype=np.int8)
    coverage = wl.coverage()
    for j, (concept, _) in enumerate(labels):
        for lang, concepts in coverage.items():
            if concept in concepts:
                cells[lang_index[lang], j] = 0
    for e in wl.entries:
        cells[lang_index[e.language], col_index[part.assignment[e.id]]] = 1
    return CharacterMatrix(
        tuple(wl.languages),
        tuple(format_label(lab) for lab in labels),
        cells,
        tuple(lab[0] for lab in labels),
    )


def write_matrix(m: CharacterMatrix, sink: TextIO) -> None:
    sink.write("LANGUAGE\t" + "\t".join(m.columns) + "\n")
    for lang, row in zip(m.languages, m.cells):
        sink.write(lang + "\t" + "\t".join(_SYMBOL[int(v)] for v in row) + "\n")


def read_matrix(source: TextIO | str) -> CharacterMatrix:
    if isinstance(source, str):
        source = io.StringIO(source)
    header = source.readline().rstrip("\n")
    if not header:
        raise ParseError("empty matrix file", "line 1")
    head = header.split("\t")
    if head[0] != "LANGUAGE":
        raise ParseError("first header field must be LANGUAGE", "line 1")
    columns = tuple(head[1:])
    try:
        concepts = tuple(parse_label(c)[0] for c in columns)
    except ValueError:
        concepts = columns
    languages, rows = [], []
    for lineno, line in enumerate(source, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != len(columns) + 1:
            raise ParseError(f"expected {len(columns) + 1} fields, found {len(parts)}", f"line {lineno}")
        try:
            rows.append([_VALUE[s] for s in parts[1:]])
        except KeyError as exc:
            raise ParseError(f"invalid symbol {exc.args[0]!r}", f"line {lineno}") from None
        languages.append(parts[0])
    cells = np.array(rows, dtype=np.int8).reshape(len(languages), len(columns))
    return CharacterMatrix(tuple(languages), columns, cells, concepts)


def write_phylip(m: CharacterMatrix, sink: TextIO) -> None:
    """Relaxed PHYLIP block: ``N C`` header, then ``name<space>0/1/? string``."""
    sink.write(f"{m.n_languages} {m.n_columns}\n")
    width = max(len(lang) for lang in m.languages)
    for lang, row in zip(m.languages, m.cells):
        sink.write(f"{lang.ljust(width)} {''.join(_SYMBOL[int(v)] for v in row)}\n")
