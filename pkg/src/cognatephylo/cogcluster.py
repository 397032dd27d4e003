"""Cognate-set partitioning of concept slots.

Local clusterings are lists of integer labels, one per item, renumbered in
order of first appearance.  :class:`CognatePartition` lifts them to global
labels ``(concept, local_index)``.
"""

from __future__ import annotations

import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from . import pairsim
from .errors import ConfigurationError, FormatError
from .pairsim import ConceptDistanceMatrix, LexstatScorer, PmiMatrix
from .soundmodel import PLACEHOLDER, WILDCARD, SoundClassModel, ccm_key, ccm_model
from .wordlist import Wordlist

CCM, NED, SCA, LEXSTAT, ONLINEPMI = "CCM", "NED", "SCA", "LEXSTAT", "ONLINEPMI"
DEFAULT_THRESHOLDS = {NED: 0.75, SCA: 0.45, LEXSTAT: 0.55, ONLINEPMI: 0.5}
LPA_MAX_PASSES = 100


def canonical_labels(labels: Sequence) -> list[int]:
    """Renumber labels 0, 1, ... in order of first appearance."""
    seen: dict = {}
    return [seen.setdefault(lab, len(seen)) for lab in labels]


@dataclass(frozen=True)
class CognatePartition:
    assignment: Mapping[str, tuple[str, int]]
    order: tuple[str, ...] = field(default=())

    @classmethod
    def from_local(cls, per_concept: Iterable[tuple[str, Sequence[str], Sequence[int]]]) -> "CognatePartition":
        assignment = {}
        order = []
        for concept, items, labels in per_concept:
            if len(items) != len(labels):
                raise ValueError(f"concept {concept!r}: {len(items)} items but {len(labels)} labels")
            for item, lab in zip(items, canonical_labels(labels)):
                if item in assignment:
                    raise ValueError(f"entry {item!r} assigned twice")
                assignment[item] = (concept, lab)
                order.append(item)
        return cls(assignment, tuple(order))

    @classmethod
    def from_gold(cls, wl: Wordlist) -> "CognatePartition":
        if not wl.has_gold:
            raise ConfigurationError("wordlist has no expert cognate ids")
        return cls.from_local(
            (c, [e.id for e in es], [e.gold_cognate_id for e in es]) for c, es in wl.by_concept().items()
        )

    def __len__(self):
        return len(self.assignment)

    @property
    def ids(self) -> frozenset:
        return frozenset(self.assignment)

    def concepts(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for item in self.order or sorted(self.assignment):
            out.setdefault(self.assignment[item][0], []).append(item)
        return out

    def clusters(self) -> dict[tuple[str, int], list[str]]:
        out: dict[tuple[str, int], list[str]] = defaultdict(list)
        for item in self.order or sorted(self.assignment):
            out[self.assignment[item]].append(item)
        return dict(out)

    def n_clusters(self) -> int:
        return len(set(self.assignment.values()))

    def same_partition(self, other: "CognatePartition") -> bool:
        """Equal as set partitions (label values ignored)."""
        if self.ids != other.ids:
            return False
        mine = {frozenset(v) for v in self.clusters().values()}
        theirs = {frozenset(v) for v in other.clusters().values()}
        return mine == theirs


def format_label(label: tuple[str, int]) -> str:
    return f"{label[0]}:{label[1]}"


def parse_label(text: str) -> tuple[str, int]:
    concept, sep, idx = text.rpartition(":")
    if not sep or not idx.isdigit():
        raise FormatError(f"malformed cluster label {text!r}")
    return concept, int(idx)


def write_partition(part: CognatePartition, sink: TextIO) -> None:
    sink.write("ID\tCONCEPT\tCLUSTER_LABEL\n")
    for item in part.order or sorted(part.assignment):
        concept, idx = part.assignment[item]
        sink.write(f"{item}\t{concept}\t{format_label((concept, idx))}\n")


def read_partition(source: TextIO | str) -> CognatePartition:
    if isinstance(source, str):
        source = io.StringIO(source)
    header = source.readline().rstrip("\n").split("\t")
    if header != ["ID", "CONCEPT", "CLUSTER_LABEL"]:
        raise FormatError("partition header must be ID, CONCEPT, CLUSTER_LABEL")
    assignment = {}
    order = []
    for lineno, line in enumerate(source, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 3 fields")
        item, concept, label = parts
        lab = parse_label(label)
        if lab[0] != concept:
            raise FormatError(f"line {lineno}: label {label!r} does not belong to concept {concept!r}")
        if item in assignment:
            raise FormatError(f"line {lineno}: duplicate ID {item!r}")
        assignment[item] = lab
        order.append(item)
    return CognatePartition(assignment, tuple(order))


# ---------------------------------------------------------------------------
# Clusterers


def ccm_partition(wl: Wordlist, model: Optional[SoundClassModel] = None) -> CognatePartition:
    """Group words of a concept by equal CCM key.

    Keys with no consonant at all, or containing the wildcard class, never
    match anything and stay singletons.
    """
    model = model or ccm_model()
    per_concept = []
    for concept, entries in wl.by_concept().items():
        labels = []
        for i, e in enumerate(entries):
            key = ccm_key(e.tokens, model)
            if key == (PLACEHOLDER, PLACEHOLDER) or WILDCARD in key:
                labels.append(("single", i))
            else:
                labels.append(key)
        per_concept.append((concept, [e.id for e in entries], labels))
    return CognatePartition.from_local(per_concept)


def _as_array(m) -> np.ndarray:
    return np.asarray(m.d if isinstance(m, ConceptDistanceMatrix) else m, dtype=float)


def _check_threshold(threshold):
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")


def flat_upgma(m, threshold: float) -> list[int]:
    """Average-linkage agglomeration cut where the closest pair exceeds ``threshold``.

    Among equally close cluster pairs the one with the smallest member
    indices merges first.
    """
    _check_threshold(threshold)
    d = _as_array(m)
    n = d.shape[0]
    clusters = {i: [i] for i in range(n)}
    link = d.copy()
    np.fill_diagonal(link, np.inf)
    active = list(range(n))
    while len(active) > 1:
        best = None
        for a_pos, a in enumerate(active):
            for b in active[a_pos + 1:]:
                v = link[a, b]
                key = (v, min(clusters[a]), min(clusters[b]))
                if best is None or key < best[0]:
                    best = (key, a, b)
        (v, _, _), a, b = best
        if v > threshold:
            break
        na, nb = len(clusters[a]), len(clusters[b])
        for c in active:
            if c != a and c != b:
                link[a, c] = link[c, a] = (na * link[a, c] + nb * link[b, c]) / (na + nb)
        clusters[a].extend(clusters.pop(b))
        active.remove(b)
    labels = [0] * n
    for lab, members in clusters.items():
        for i in members:
            labels[i] = lab
    return canonical_labels(labels)


def _graph(d: np.ndarray, threshold: float) -> np.ndarray:
    w = np.where(d < threshold, 1.0 - d, 0.0)
    np.fill_diagonal(w, 0.0)
    return w


def _components_by_label(w: np.ndarray, labels: Sequence[int]) -> list[int]:
    n = len(labels)
    comp = [-1] * n
    k = 0
    for start in range(n):
        if comp[start] >= 0:
            continue
        stack = [start]
        comp[start] = k
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(w[u]):
                if comp[v] < 0 and labels[v] == labels[u]:
                    comp[v] = k
                    stack.append(v)
        k += 1
    return canonical_labels(comp)


def label_propagation(m, threshold: float, seed: int = 0) -> list[int]:
    """Asynchronous weighted label propagation on the thresholded graph.

    Edge ``(i, j)`` exists iff ``d(i, j) < threshold`` and weighs
    ``1 - d(i, j)``.  A node keeps its label when it is among the heaviest;
    otherwise ties are broken with the seeded generator.
    """
    _check_threshold(threshold)
    w = _graph(_as_array(m), threshold)
    n = w.shape[0]
    rng = np.random.default_rng(seed)
    labels = list(range(n))
    neighbours = [np.flatnonzero(w[i]) for i in range(n)]
    for _ in range(LPA_MAX_PASSES):
        changed = False
        for i in rng.permutation(n):
            if neighbours[i].size == 0:
                continue
            votes: dict[int, float] = {}
            for j in neighbours[i]:
                votes[labels[j]] = votes.get(labels[j], 0.0) + w[i, j]
            top = max(votes.values())
            best = sorted(lab for lab, v in votes.items() if v >= top - 1e-12)
            if labels[i] in best:
                continue
            labels[i] = best[0] if len(best) == 1 else best[int(rng.integers(len(best)))]
            changed = True
        if not changed:
            break
    return _components_by_label(w, labels)


def _plogp(x):
    return x * math.log2(x) if x > 0 else 0.0


def map_equation(w: np.ndarray, labels: Sequence[int]) -> float:
    """Two-level map-equation description length (bits) of a partition of an
    undirected weighted graph."""
    w = np.asarray(w, dtype=float)
    strength = w.sum(axis=1)
    total = strength.sum()
    if total <= 0:
        return 0.0
    p = strength / total
    modules: dict[int, list[int]] = defaultdict(list)
    for i, lab in enumerate(labels):
        modules[lab].append(i)
    labels = np.asarray(labels)
    exits, flows = [], []
    for lab, members in modules.items():
        inside = labels == lab
        q = w[np.ix_(inside, ~inside)].sum() / total
        exits.append(q)
        flows.append(p[inside].sum())
    q_all = sum(exits)
    return (
        _plogp(q_all)
        - 2.0 * sum(_plogp(q) for q in exits)
        - sum(_plogp(x) for x in p)
        + sum(_plogp(q + f) for q, f in zip(exits, flows))
    )


def map_equation_communities(m, threshold: float, seed: int = 0) -> list[int]:
    """Greedy node moves minimising the two-level map equation.

    Each node, visited in seeded random order, moves to the neighbouring
    module giving the largest drop in description length; passes repeat
    until no move helps.
    """
    _check_threshold(threshold)
    w = _graph(_as_array(m), threshold)
    n = w.shape[0]
    strength = w.sum(axis=1)
    total = strength.sum()
    if total <= 0:
        return list(range(n))
    p = strength / total
    module = list(range(n))
    exit_w = strength.copy()  # per-module exit weight, indexed by module id
    flow = p.copy()
    rng = np.random.default_rng(seed)

    def length(exit_w, flow):
        q = exit_w / total
        occupied = flow > 0
        return (
            _plogp(q[occupied].sum())
            - 2.0 * sum(_plogp(x) for x in q[occupied])
            + sum(_plogp(a + b) for a, b in zip(q[occupied], flow[occupied]))
        )

    current = length(exit_w, flow)
    for _ in range(10 * n + 10):
        moved = False
        for i in rng.permutation(n):
            if strength[i] == 0:
                continue
            old = module[i]
            links: dict[int, float] = defaultdict(float)
            for j in np.flatnonzero(w[i]):
                links[module[j]] += w[i, j]
            w_old = links.get(old, 0.0)
            best = (current, old)
            for cand in sorted(links):
                if cand == old:
                    continue
                e = exit_w.copy()
                f = flow.copy()
                e[old] += -strength[i] + 2.0 * w_old
                f[old] -= p[i]
                e[cand] += strength[i] - 2.0 * links[cand]
                f[cand] += p[i]
                value = length(e, f)
                if value < best[0] - 1e-10:
                    best = (value, cand)
            if best[1] != old:
                cand = best[1]
                exit_w[old] += -strength[i] + 2.0 * w_old
                flow[old] -= p[i]
                exit_w[cand] += strength[i] - 2.0 * links[cand]
                flow[cand] += p[i]
                if flow[old] < 1e-15:
                    flow[old] = 0.0
                    exit_w[old] = 0.0
                module[i] = cand
                current = best[0]
                moved = True
        if not moved:
            break
    return canonical_labels(module)


# ---------------------------------------------------------------------------
# Dispatch


@dataclass
class DetectConfig:
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    seed: int = 0
    ccm: Optional[SoundClassModel] = None
    lexstat: Optional[LexstatScorer] = None
    pmi: Optional[PmiMatrix] = None


Method = Callable[[Wordlist, DetectConfig], CognatePartition]
_EXTRA_METHODS: dict[str, Method] = {}


def register_method(name: str, func: Method) -> None:
    """Plug in an additional detector (e.g. a supervised pair classifier)."""
    _EXTRA_METHODS[name.upper()] = func


def _matrices_partition(matrices, cluster, threshold, seed):
    per_concept = []
    for k, m in enumerate(matrices):
        labels = cluster(m, threshold, seed + k) if seed is not None else cluster(m, threshold)
        per_concept.append((m.concept, m.items, labels))
    return CognatePartition.from_local(per_concept)


def detect_cognates(wl: Wordlist, method: str, config: Optional[DetectConfig] = None) -> CognatePartition:
    config = config or DetectConfig()
    method = method.upper()
    thresholds = {**DEFAULT_THRESHOLDS, **config.thresholds}
    if method == CCM:
        return ccm_partition(wl, config.ccm)
    if method == NED:
        mats = pairsim.build_concept_matrices(wl, pairsim.NED)
        return _matrices_partition(mats, flat_upgma, thresholds[NED], None)
    if method == SCA:
        mats = pairsim.build_concept_matrices(wl, pairsim.SCA)
        return _matrices_partition(mats, flat_upgma, thresholds[SCA], None)
    if method == LEXSTAT:
        if config.lexstat is None:
            raise ConfigurationError("LEXSTAT needs a trained scorer (run lexstat_train)")
        mats = pairsim.build_concept_matrices(wl, pairsim.LEXSTAT, scorer=config.lexstat)
        return _matrices_partition(mats, map_equation_communities, thresholds[LEXSTAT], config.seed)
    if method == ONLINEPMI:
        if config.pmi is None:
            raise ConfigurationError("ONLINEPMI needs a trained PMI matrix (run online_pmi_train)")
        mats = pairsim.build_concept_matrices(wl, pairsim.PMI, pmi=config.pmi)
        return _matrices_partition(mats, label_propagation, thresholds[ONLINEPMI], config.seed)
    if method in _EXTRA_METHODS:
        return _EXTRA_METHODS[method](wl, config)
    raise ValueError(f"unknown cognate detection method {method!r}")
