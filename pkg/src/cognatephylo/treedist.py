"""Quartet distance (QD) and generalized quartet distance (GQD).

Every quartet is classified as a star or as one of three butterflies by
the four-point condition on unit-edge path lengths. The path lengths come
from per-leaf depths and pairwise LCA depths. Trees are treated as
unrooted, since a degree-2 root only subdivides an edge and never changes
which pair sum is smallest.

Quartets are enumerated in lexicographic order of sorted leaf labels, so
two trees on the same leaf set yield topology vectors that can be
compared position by position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from . import _accel
from ._accel import jit
from .errors import UndefinedMetricError
from .tree import Tree, parse_newick, tree_from_clusters

STAR = 0
# Codes 1..3 pair the sorted quartet (a, b, c, d) as ab|cd, ac|bd, ad|bc.
AB_CD, AC_BD, AD_BC = 1, 2, 3

REPORT_COLUMNS = ("METHOD", "FAMILY", "GQD_MEAN", "GQD_SD", "N_SAMPLES", "GQD")


@dataclass(frozen=True)
class QuartetTopology:
    """A butterfly ``pairing`` (two leaf pairs) or a star (``pairing is None``)."""

    leaves: tuple[str, str, str, str]
    pairing: Optional[tuple[tuple[str, str], tuple[str, str]]]

    @property
    def is_star(self) -> bool:
        return self.pairing is None

    def __str__(self) -> str:
        if self.pairing is None:
            return "{}{}x{}{}".format(*self.leaves)
        (a, b), (c, d) = self.pairing
        return f"{a}{b}|{c}{d}"


def _as_tree(t) -> Tree:
    if isinstance(t, str):
        return parse_newick(t)
    if hasattr(t, "parse_tree"):
        return t.parse_tree()
    return t


def path_lengths(tree: Tree, labels: Sequence[str]) -> np.ndarray:
    """Unit-edge path length between every pair of ``labels``."""
    pos = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    depth = [0] * len(tree)
    for v in reversed(tree.postorder()):
        if v != tree.root:
            depth[v] = depth[tree.parent[v]] + 1
    lca = np.zeros((n, n), dtype=np.int64)
    below: dict[int, list[int]] = {}
    for v in tree.postorder():
        if tree.is_leaf(v):
            below[v] = [pos[tree.labels[v]]]
            continue
        groups = [below.pop(c) for c in tree.children[v]]
        for g1, g2 in combinations(groups, 2):
            idx1 = np.array(g1)
            idx2 = np.array(g2)
            lca[np.ix_(idx1, idx2)] = depth[v]
            lca[np.ix_(idx2, idx1)] = depth[v]
        below[v] = [x for g in groups for x in g]
    leaf_depth = np.zeros(n, dtype=np.int64)
    for v in tree.leaves():
        leaf_depth[pos[tree.labels[v]]] = depth[v]
    d = leaf_depth[:, None] + leaf_depth[None, :] - 2 * lca
    np.fill_diagonal(d, 0)
    return d


@jit
def _topologies_loops(d):
    n = d.shape[0]
    total = n * (n - 1) * (n - 2) * (n - 3) // 24
    out = np.empty(total, dtype=np.int8)
    q = 0
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for e in range(c + 1, n):
                    s1 = d[a, b] + d[c, e]
                    s2 = d[a, c] + d[b, e]
                    s3 = d[a, e] + d[b, c]
                    if s1 < s2 and s1 < s3:
                        out[q] = 1
                    elif s2 < s1 and s2 < s3:
                        out[q] = 2
                    elif s3 < s1 and s3 < s2:
                        out[q] = 3
                    else:
                        out[q] = 0
                    q += 1
    return out


def _topologies_numpy(d):
    n = d.shape[0]
    if n < 4:
        return np.empty(0, dtype=np.int8)
    quads = np.fromiter(combinations(range(n), 4), dtype=np.dtype((np.int64, 4)))
    a, b, c, e = quads.T
    sums = np.stack([d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]], axis=1)
    low = sums.min(axis=1)
    unique = (sums == low[:, None]).sum(axis=1) == 1
    return np.where(unique, sums.argmin(axis=1) + 1, 0).astype(np.int8)


def quartet_topologies(tree, labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """Topology code of every quartet of ``labels`` (default: sorted leaf labels)."""
    tree = _as_tree(tree)
    labels = sorted(tree.leaf_set) if labels is None else list(labels)
    d = path_lengths(tree, labels)
    if _accel.USE_NUMBA:
        return _topologies_loops(d)
    return _topologies_numpy(d)


def quartet_topology(tree, leaves: Iterable[str]) -> QuartetTopology:
    tree = _as_tree(tree)
    quartet = tuple(sorted(set(leaves)))
    if len(quartet) != 4:
        raise ValueError("a quartet needs four distinct leaves")
    unknown = [lab for lab in quartet if lab not in tree.leaf_set]
    if unknown:
        raise ValueError(f"labels not in tree: {unknown}")
    code = int(quartet_topologies(tree, quartet)[0])
    a, b, c, d = quartet
    pairings = {AB_CD: ((a, b), (c, d)), AC_BD: ((a, c), (b, d)), AD_BC: ((a, d), (b, c))}
    return QuartetTopology(quartet, pairings.get(code))


def _shared_labels(t1: Tree, t2: Tree) -> list[str]:
    if t1.leaf_set != t2.leaf_set:
        raise ValueError(f"leaf sets differ: {sorted(t1.leaf_set ^ t2.leaf_set)}")
    if len(t1.leaf_set) < 4:
        raise ValueError("quartet distances need at least four leaves")
    return sorted(t1.leaf_set)


def quartet_distance(t1, t2) -> float:
    """``1 - (shared stars + shared butterflies) / C(n, 4)``."""
    t1, t2 = _as_tree(t1), _as_tree(t2)
    labels = _shared_labels(t1, t2)
    q1 = quartet_topologies(t1, labels)
    q2 = quartet_topologies(t2, labels)
    return float(np.count_nonzero(q1 != q2)) / q1.shape[0]


def _gqd_vectors(q: np.ndarray, gold_q: np.ndarray, n_butterflies: int) -> float:
    differing = np.count_nonzero((q != 0) & (gold_q != 0) & (q != gold_q))
    return differing / n_butterflies


def _gold_vector(gold: Tree, labels: list[str]) -> tuple[np.ndarray, int]:
    gq = quartet_topologies(gold, labels)
    nb = int(np.count_nonzero(gq))
    if nb == 0:
        raise UndefinedMetricError("gold tree has no resolved quartets")
    return gq, nb


def gqd(t, gold) -> float:
    """Butterflies resolved differently in both trees, over the gold tree's butterflies."""
    t, gold = _as_tree(t), _as_tree(gold)
    labels = _shared_labels(t, gold)
    gq, nb = _gold_vector(gold, labels)
    return _gqd_vectors(quartet_topologies(t, labels), gq, nb)


def gqd_values(samples: Iterable, gold) -> list[float]:
    """GQD of every sample; repeated unrooted topologies are computed once."""
    gold = _as_tree(gold)
    labels: Optional[list[str]] = None
    cache: dict[frozenset, float] = {}
    out = []
    for s in samples:
        s = _as_tree(s)
        if labels is None:
            labels = _shared_labels(s, gold)
            gq, nb = _gold_vector(gold, labels)
        elif s.leaf_set != gold.leaf_set:
            raise ValueError(f"leaf sets differ: {sorted(s.leaf_set ^ gold.leaf_set)}")
        key = s.splits()
        if key not in cache:
            cache[key] = _gqd_vectors(quartet_topologies(s, labels), gq, nb)
        out.append(cache[key])
    return out


def posterior_gqd_summary(samples: Iterable, gold, ddof: int = 0) -> tuple[float, float]:
    """Mean and standard deviation of per-sample GQD (population sd unless ``ddof=1``)."""
    values = np.array(gqd_values(samples, gold))
    if values.size == 0:
        raise ValueError("no samples to summarize")
    if ddof >= values.size:
        raise ValueError("too few samples for the requested ddof")
    return float(values.mean()), float(values.std(ddof=ddof))


def split_frequencies(samples: Iterable) -> tuple[frozenset, dict]:
    """Leaf set and fraction of samples containing each nontrivial unrooted split."""
    counts: dict = {}
    leaf_set = None
    n = 0
    for s in samples:
        s = _as_tree(s)
        if leaf_set is None:
            leaf_set = s.leaf_set
        elif s.leaf_set != leaf_set:
            raise ValueError(f"leaf sets differ: {sorted(s.leaf_set ^ leaf_set)}")
        for sp in s.splits():
            counts[sp] = counts.get(sp, 0) + 1
        n += 1
    if n == 0:
        raise ValueError("no samples")
    return leaf_set, {sp: c / n for sp, c in counts.items()}


def majority_consensus(samples: Iterable, threshold: float = 0.5) -> tuple[Tree, dict]:
    """Tree of the splits seen in more than ``threshold`` of the samples.

    Returns the (possibly polytomous) tree and the frequencies of every
    split observed.
    """
    if not 0.5 <= threshold < 1.0:
        raise ValueError("threshold must be in [0.5, 1)")
    leaf_set, freqs = split_frequencies(samples)
    kept = [sp for sp, f in freqs.items() if f > threshold]
    return tree_from_clusters(leaf_set, kept), freqs


def format_cell(mean: float, sd: float, digits: int = 4) -> str:
    """``"mean ± sd"`` with trailing zeros dropped (``0.0 ± 0.0``)."""
    return f"{round(mean, digits)!r} ± {round(sd, digits)!r}"


def write_report(rows: Iterable[dict], sink: TextIO, header: Sequence[str] = ()) -> None:
    """Rows need METHOD, FAMILY, GQD_MEAN, GQD_SD and N_SAMPLES.

    A row whose GQD_MEAN is None is written as skipped ("NA").
    """
    for line in header:
        sink.write(f"# {line}\n")
    sink.write("\t".join(REPORT_COLUMNS) + "\n")
    for r in rows:
        mean, sd = r.get("GQD_MEAN"), r.get("GQD_SD")
        if mean is None or (isinstance(mean, float) and math.isnan(mean)):
            vals = ["NA", "NA", str(r.get("N_SAMPLES", 0)), "NA"]
        else:
            vals = [f"{mean:.4f}", f"{sd:.4f}", str(r["N_SAMPLES"]), format_cell(mean, sd)]
        sink.write("\t".join([str(r["METHOD"]), str(r["FAMILY"])] + vals) + "\n")


def gqd_histogram(values: Sequence[float], bins: int = 10, width: int = 40) -> str:
    """Plain-text histogram of GQD values on [0, 1]."""
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    top = max(int(counts.max()), 1)
    lines = []
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        bar = "#" * int(round(width * c / top))
        lines.append(f"[{lo:.2f}, {hi:.2f}) {int(c):6d} {bar}")
    return "\n".join(lines)
