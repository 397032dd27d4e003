"""Pairwise word distances within concept slots.

Measures: normalised edit distance (NED), sound-class alignment (SCA),
language-pair specific log-odds scoring (LexStat) and online-trained PMI
scores passed through a sigmoid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .align import align_score, batch_count, batch_scores, edit_distance_kernel, pack
from .soundmodel import ScoreTable, SoundClassModel, sca_model, sca_scores, to_class_string
from .wordlist import WordEntry, Wordlist

NED, SCA, LEXSTAT, PMI = "NED", "SCA", "LEXSTAT", "PMI"

LEXSTAT_PREFILTER = 0.6
LEXSTAT_EPSILON = 0.01
LEXSTAT_N_PERM = 100
PMI_BATCH_SIZE = 256
PMI_ITERATIONS = 10
PMI_MIX = 0.5
PMI_GAP_OPEN = -2.5
PMI_GAP_EXTEND = -1.75


@dataclass(frozen=True)
class ConceptDistanceMatrix:
    concept: str
    items: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        self.d.setflags(write=False)

    def __len__(self):
        return len(self.items)


def _encode_tokens(a: Sequence[str], b: Sequence[str]):
    vocab: dict[str, int] = {}
    ea = np.array([vocab.setdefault(t, len(vocab)) for t in a], dtype=np.int64)
    eb = np.array([vocab.setdefault(t, len(vocab)) for t in b], dtype=np.int64)
    return ea, eb


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance over tokens."""
    ea, eb = _encode_tokens(a, b)
    return int(edit_distance_kernel(ea, eb))


def ned(a: Sequence[str], b: Sequence[str]) -> float:
    """Edit distance normalised by the longer sequence."""
    longest = max(len(a), len(b))
    if longest == 0:
        raise ValueError("ned is undefined for two empty sequences")
    return edit_distance(a, b) / longest


def _distance_from_scores(sab, saa, sbb):
    denom = saa + sbb
    if denom <= 0.0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - 2.0 * sab / denom))


def sca_distance(a: Sequence[str], b: Sequence[str], model: Optional[SoundClassModel] = None,
                 scores: Optional[ScoreTable] = None) -> float:
    """Alignment distance ``1 - 2 S(a,b) / (S(a,a) + S(b,b))`` over sound classes."""
    model = model or sca_model()
    scores = scores or sca_scores()
    ca = scores.encode(to_class_string(a, model))
    cb = scores.encode(to_class_string(b, model))
    if ca.size == 0 and cb.size == 0:
        raise ValueError("both words are empty after sound-class mapping")
    if ca.size == cb.size and np.array_equal(ca, cb):
        return 0.0
    m, go, ge = scores.matrix, scores.gap_open, scores.gap_extend
    return _distance_from_scores(
        align_score(ca, cb, m, go, ge), align_score(ca, ca, m, go, ge), align_score(cb, cb, m, go, ge)
    )


def sigmoid_distance(x: float) -> float:
    """``1 - 1/(1 + exp(-x))``, i.e. the logistic function of ``-x``."""
    if not math.isfinite(x):
        raise ValueError("sigmoid_distance needs a finite score")
    # Both branches are the same function; the split avoids overflow in exp.
    if x >= 0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


# ---------------------------------------------------------------------------
# LexStat


@dataclass
class LexstatScorer:
    """Per-language-pair score tables over the SCA alphabet.

    ``tables[(l1, l2)]`` scores symbols of ``l1`` (rows) against symbols of
    ``l2`` (columns); only the pair with ``l1 <= l2`` is stored and the
    transpose serves the reverse order.  Pairs without a trained table fall
    back to the generic score table.
    """

    base: ScoreTable
    model: SoundClassModel
    tables: dict = field(default_factory=dict)

    def table(self, lang_a: str, lang_b: str) -> np.ndarray:
        if lang_a <= lang_b:
            t = self.tables.get((lang_a, lang_b))
            return self.base.matrix if t is None else t
        t = self.tables.get((lang_b, lang_a))
        return self.base.matrix if t is None else t.T

    def is_trained(self, lang_a: str, lang_b: str) -> bool:
        return tuple(sorted((lang_a, lang_b))) in self.tables

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return self.base.encode(to_class_string(tokens, self.model))


def _lexstat_pairs(groups_a, groups_b, same_language):
    """Index pairs of words sharing a concept between two languages."""
    left, right = [], []
    for ws_a, ws_b in zip(groups_a, groups_b):
        if same_language:
            for x, y in itertools.combinations_with_replacement(ws_a, 2):
                left.append(x)
                right.append(y)
        else:
            for x in ws_a:
                for y in ws_b:
                    left.append(x)
                    right.append(y)
    return np.array(left, dtype=np.int64), np.array(right, dtype=np.int64)


def lexstat_train(wl: Wordlist, model: Optional[SoundClassModel] = None, n_perm: int = LEXSTAT_N_PERM,
                  seed: int = 0, prefilter: float = LEXSTAT_PREFILTER, epsilon: float = LEXSTAT_EPSILON,
                  base: Optional[ScoreTable] = None) -> LexstatScorer:
    """Infer language-pair specific log-odds scores.

    For each language pair the attested distribution counts aligned symbol
    pairs over same-concept word pairs within ``prefilter`` SCA distance;
    the expected distribution averages ``n_perm`` random reassignments of
    the second language's words to concepts.  The log2 ratio is averaged
    1:1 with the generic table.
    """
    if n_perm < 1:
        raise ValueError("n_perm must be at least 1")
    model = model or sca_model()
    base = base or sca_scores()
    rng = np.random.default_rng(seed)
    m, go, ge = base.matrix, base.gap_open, base.gap_extend
    k = len(base.symbols)

    seqs = [base.encode(to_class_string(e.tokens, model)) for e in wl.entries]
    flat, offsets = pack(seqs)
    all_idx = np.arange(len(seqs), dtype=np.int64)
    self_scores = batch_scores(flat, offsets, all_idx, all_idx, m, go, ge)

    by_lang_concept: dict[tuple[str, str], list[int]] = {}
    for i, e in enumerate(wl.entries):
        by_lang_concept.setdefault((e.language, e.concept), []).append(i)

    scorer = LexstatScorer(base, model)
    languages = sorted(wl.languages)
    for la, lb in itertools.combinations_with_replacement(languages, 2):
        shared = [c for c in wl.concepts if (la, c) in by_lang_concept and (lb, c) in by_lang_concept]
        if not shared:
            continue
        ga = [by_lang_concept[la, c] for c in shared]
        gb = [by_lang_concept[lb, c] for c in shared]
        left, right = _lexstat_pairs(ga, gb, la == lb)
        sab = batch_scores(flat, offsets, left, right, m, go, ge)
        dist = 1.0 - 2.0 * sab / np.maximum(self_scores[left] + self_scores[right], 1e-12)
        keep = dist <= prefilter
        attested = np.zeros((k, k))
        n_att = batch_count(flat, offsets, left[keep], right[keep], m, go, ge, attested)
        if n_att == 0:
            continue
        expected = np.zeros((k, k))
        n_exp = 0
        for _ in range(n_perm):
            perm = rng.permutation(len(shared))
            pl, pr = _lexstat_pairs(ga, [gb[p] for p in perm], False)
            n_exp += batch_count(flat, offsets, pl, pr, m, go, ge, expected)
        if la == lb:
            attested = 0.5 * (attested + attested.T)
        attested_f = attested
        expected_f = expected * (n_att / n_exp) if n_exp else expected
        logodds = np.log2((attested_f + epsilon) / (expected_f + epsilon))
        table = 0.5 * logodds + 0.5 * m
        if la == lb:
            table = 0.5 * (table + table.T)
        scorer.tables[la, lb] = table
    return scorer


def lexstat_distance(a: WordEntry | Sequence[str], b: WordEntry | Sequence[str], scorer: LexstatScorer,
                     languages: Optional[tuple[str, str]] = None) -> float:
    """SCA-style distance with the language-pair specific score table.

    Self-similarities use each language's own table.
    """
    if isinstance(a, WordEntry) and isinstance(b, WordEntry):
        languages = languages or (a.language, b.language)
        a, b = a.tokens, b.tokens
    if languages is None:
        raise ValueError("lexstat_distance needs the language pair")
    la, lb = languages
    ca, cb = scorer.encode(a), scorer.encode(b)
    if ca.size == 0 and cb.size == 0:
        raise ValueError("both words are empty after sound-class mapping")
    if ca.size == cb.size and np.array_equal(ca, cb):
        return 0.0
    go, ge = scorer.base.gap_open, scorer.base.gap_extend
    sab = align_score(ca, cb, scorer.table(la, lb), go, ge)
    saa = align_score(ca, ca, scorer.table(la, la), go, ge)
    sbb = align_score(cb, cb, scorer.table(lb, lb), go, ge)
    return _distance_from_scores(sab, saa, sbb)


# ---------------------------------------------------------------------------
# Online PMI


@dataclass(frozen=True)
class PmiMatrix:
    alphabet: tuple[str, ...]
    scores: np.ndarray
    gap_open: float = PMI_GAP_OPEN
    gap_extend: float = PMI_GAP_EXTEND

    def __post_init__(self):
        self.scores.setflags(write=False)

    def as_score_table(self) -> ScoreTable:
        return ScoreTable(self.alphabet, self.scores, self.gap_open, self.gap_extend)

    def dumps(self) -> str:
        return self.as_score_table().dumps()

    @classmethod
    def loads(cls, text: str) -> "PmiMatrix":
        t = ScoreTable.loads(text)
        return cls(t.symbols, np.array(t.matrix), t.gap_open, t.gap_extend)

    def similarity(self, a: Sequence[str], b: Sequence[str], model: Optional[SoundClassModel] = None) -> float:
        model = model or sca_model()
        t = self.as_score_table()
        return float(align_score(t.encode(to_class_string(a, model)), t.encode(to_class_string(b, model)),
                                 self.scores, self.gap_open, self.gap_extend))


def _cross_language_pairs(wl: Wordlist):
    left, right = [], []
    positions = {e.id: i for i, e in enumerate(wl.entries)}
    for entries in wl.by_concept().values():
        for x, y in itertools.combinations(entries, 2):
            if x.language != y.language:
                left.append(positions[x.id])
                right.append(positions[y.id])
    return np.array(left, dtype=np.int64), np.array(right, dtype=np.int64)


def online_pmi_train(wl: Wordlist, batch_size: int = PMI_BATCH_SIZE, iterations: int = PMI_ITERATIONS,
                     mix: float = PMI_MIX, seed: int = 0, model: Optional[SoundClassModel] = None,
                     gap_open: float = PMI_GAP_OPEN, gap_extend: float = PMI_GAP_EXTEND) -> PmiMatrix:
    """Estimate sound-class PMI scores by online EM over synonymous word pairs.

    Starts from an all-zero matrix.  Each pass shuffles the cross-language
    same-concept pairs, and for every minibatch aligns the pairs with the
    current scores, re-estimates PMI (natural log) from the aligned symbol
    pairs, and blends ``current <- (1 - mix) * current + mix * estimate`` on
    the symbol pairs seen in that minibatch.
    """
    if batch_size < 1 or iterations < 1:
        raise ValueError("batch_size and iterations must be at least 1")
    if not 0.0 < mix <= 1.0:
        raise ValueError("mix must lie in (0, 1]")
    model = model or sca_model()
    alphabet = model.alphabet
    index = {s: i for i, s in enumerate(alphabet)}
    seqs = [np.array([index[s] for s in to_class_string(e.tokens, model)], dtype=np.int64) for e in wl.entries]
    flat, offsets = pack(seqs)
    left, right = _cross_language_pairs(wl)
    if left.size == 0:
        raise ValueError("no cross-language synonymous word pairs to train on")

    k = len(alphabet)
    current = np.zeros((k, k))
    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        order = rng.permutation(left.size)
        for start in range(0, left.size, batch_size):
            sel = order[start:start + batch_size]
            counts = np.zeros((k, k))
            batch_count(flat, offsets, left[sel], right[sel], current, gap_open, gap_extend, counts)
            counts = counts + counts.T
            total = counts.sum()
            if total == 0:
                continue
            joint = counts / total
            marginal = joint.sum(axis=1)
            seen = counts > 0
            estimate = np.zeros((k, k))
            outer = np.outer(marginal, marginal)
            estimate[seen] = np.log(joint[seen] / outer[seen])
            current = np.where(seen, (1.0 - mix) * current + mix * estimate, current)
    return PmiMatrix(alphabet, current, gap_open, gap_extend)


# ---------------------------------------------------------------------------
# Concept matrices


def build_concept_matrices(wl: Wordlist, measure: str, model: Optional[SoundClassModel] = None,
                           scores: Optional[ScoreTable] = None, scorer: Optional[LexstatScorer] = None,
                           pmi: Optional[PmiMatrix] = None) -> list[ConceptDistanceMatrix]:
    """One symmetric distance matrix per concept over all its words."""
    measure = measure.upper()
    if measure == LEXSTAT and scorer is None:
        raise ValueError("LEXSTAT distances need a trained LexstatScorer")
    if measure == PMI and pmi is None:
        raise ValueError("PMI distances need a trained PmiMatrix")
    if measure not in (NED, SCA, LEXSTAT, PMI):
        raise ValueError(f"unknown distance measure {measure!r}")
    model = model or sca_model()

    def dist(x: WordEntry, y: WordEntry) -> float:
        if measure == NED:
            return ned(x.tokens, y.tokens)
        if measure == SCA:
            return sca_distance(x.tokens, y.tokens, model, scores)
        if measure == LEXSTAT:
            return lexstat_distance(x, y, scorer)
        return sigmoid_distance(pmi.similarity(x.tokens, y.tokens, model))

    out = []
    for concept, entries in wl.by_concept().items():
        n = len(entries)
        d = np.zeros((n, n))
        for i, j in itertools.combinations(range(n), 2):
            d[i, j] = d[j, i] = dist(entries[i], entries[j])
        out.append(ConceptDistanceMatrix(concept, tuple(e.id for e in entries), d))
    return out
