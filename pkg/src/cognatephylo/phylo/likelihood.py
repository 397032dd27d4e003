"""Felsenstein pruning with discrete-Gamma rates and ascertainment correction.

Unique site patterns are compressed with weights.  For ascertainment each
pattern is paired with its "all-absent" counterpart: observed cells set to
0 and missing cells left unconstrained.  The site likelihood is divided by
``1 - L(all-absent)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _accel
from .._accel import jit
from ..charmatrix import MISSING, CharacterMatrix
from ..tree import Tree
from .model import SubstModel2
from .timetree import TimeTree

_RESCALE = 1e-150


@dataclass(frozen=True)
class PatternData:
    """Compressed tips: ``tips[leaf, pattern, state]`` covers the data
    patterns first, followed by the distinct all-absent patterns."""

    languages: tuple[str, ...]
    tips: np.ndarray
    weights: np.ndarray
    absent_index: np.ndarray
    n_patterns: int

    @classmethod
    def from_matrix(cls, X: CharacterMatrix) -> "PatternData":
        cells = np.asarray(X.cells)
        cols, counts = np.unique(cells.T, axis=0, return_counts=True)
        absent_cols = np.where(cols == MISSING, MISSING, 0)
        absent, absent_idx = np.unique(absent_cols, axis=0, return_inverse=True)
        allcols = np.concatenate([cols, absent], axis=0)  # (P + Z, N)
        tips = np.empty((cells.shape[0], allcols.shape[0], 2))
        obs = allcols.T
        tips[:, :, 0] = np.where(obs == 1, 0.0, 1.0)
        tips[:, :, 1] = np.where(obs == 0, 0.0, 1.0)
        return cls(tuple(X.languages), tips, counts.astype(float), np.asarray(absent_idx).ravel() + cols.shape[0], cols.shape[0])


def transition_matrices(tree: TimeTree, branch_rates: np.ndarray, cat_rates: np.ndarray, model: SubstModel2) -> np.ndarray:
    """``P[node, category]`` for the branch above each node (identity at the root)."""
    t = (tree.branch_lengths() * branch_rates)[:, None] * cat_rates[None, :]
    decay = -np.expm1(-model.mu * t)
    out = np.empty(t.shape + (2, 2))
    out[..., 0, 1] = model.pi1 * decay
    out[..., 0, 0] = 1.0 - out[..., 0, 1]
    out[..., 1, 0] = model.pi0 * decay
    out[..., 1, 1] = 1.0 - out[..., 1, 0]
    return out


@jit
def _prune_loops(postorder, left, right, n_leaves, tips, pmats, freqs):
    n_nodes = pmats.shape[0]
    K = pmats.shape[1]
    P = tips.shape[1]
    part = np.empty((n_nodes, K, P, 2))
    for v in range(n_leaves):
        for k in range(K):
            for p in range(P):
                part[v, k, p, 0] = tips[v, p, 0]
                part[v, k, p, 1] = tips[v, p, 1]
    scale = np.zeros(P)
    for idx in range(postorder.shape[0]):
        v = postorder[idx]
        a = left[v]
        b = right[v]
        for p in range(P):
            biggest = 0.0
            for k in range(K):
                pa = pmats[a, k]
                pb = pmats[b, k]
                a0 = part[a, k, p, 0]
                a1 = part[a, k, p, 1]
                b0 = part[b, k, p, 0]
                b1 = part[b, k, p, 1]
                x0 = (pa[0, 0] * a0 + pa[0, 1] * a1) * (pb[0, 0] * b0 + pb[0, 1] * b1)
                x1 = (pa[1, 0] * a0 + pa[1, 1] * a1) * (pb[1, 0] * b0 + pb[1, 1] * b1)
                part[v, k, p, 0] = x0
                part[v, k, p, 1] = x1
                if x0 > biggest:
                    biggest = x0
                if x1 > biggest:
                    biggest = x1
            if biggest < _RESCALE and biggest > 0.0:
                for k in range(K):
                    part[v, k, p, 0] /= biggest
                    part[v, k, p, 1] /= biggest
                scale[p] += np.log(biggest)
    root = postorder[postorder.shape[0] - 1]
    out = np.empty(P)
    for p in range(P):
        s = 0.0
        for k in range(K):
            s += freqs[0] * part[root, k, p, 0] + freqs[1] * part[root, k, p, 1]
        out[p] = np.log(s / K) + scale[p]
    return out


def _prune_numpy(postorder, left, right, n_leaves, tips, pmats, freqs):
    K = pmats.shape[1]
    part = {v: np.broadcast_to(tips[v][None], (K,) + tips[v].shape) for v in range(n_leaves)}
    scale = np.zeros(tips.shape[1])
    for v in postorder:
        a, b = left[v], right[v]
        x = np.einsum("kst,kpt->kps", pmats[a], part[a]) * np.einsum("kst,kpt->kps", pmats[b], part[b])
        biggest = x.max(axis=(0, 2))
        small = (biggest < _RESCALE) & (biggest > 0)
        if small.any():
            factor = np.where(small, biggest, 1.0)
            x = x / factor[None, :, None]
            scale += np.log(factor)
        part[v] = x
    root = part[postorder[-1]]
    return np.log((root @ freqs).mean(axis=0)) + scale


def pattern_log_likelihoods(data: PatternData, tree: TimeTree, branch_rates: np.ndarray, cat_rates: np.ndarray,
                            model: SubstModel2) -> np.ndarray:
    """Category-averaged log-likelihood of every data and all-absent pattern."""
    pmats = transition_matrices(tree, branch_rates, cat_rates, model)
    args = (tree.postorder(), tree.left, tree.right, tree.n_leaves, data.tips, pmats, model.freqs)
    if _accel.USE_NUMBA:
        return _prune_loops(*args)
    return _prune_numpy(*args)


def log_likelihood_from_patterns(lnl: np.ndarray, data: PatternData, ascertainment: bool = True) -> float:
    site = lnl[: data.n_patterns]
    if ascertainment:
        absent = np.exp(lnl[data.absent_index])
        with np.errstate(divide="ignore"):
            site = site - np.log1p(-absent)
    return float(np.dot(data.weights, site))


def log_likelihood(X: CharacterMatrix | PatternData, tree: TimeTree | Tree, branch_rates: np.ndarray,
                   cat_rates: np.ndarray, model: SubstModel2, ascertainment: bool = True) -> float:
    data = X if isinstance(X, PatternData) else PatternData.from_matrix(X)
    if isinstance(tree, Tree):
        tree = TimeTree.from_tree(tree, data.languages)
    if tuple(tree.labels) != data.languages:
        raise ValueError("tree leaves must be the matrix languages in matrix order")
    return log_likelihood_from_patterns(
        pattern_log_likelihoods(data, tree, branch_rates, cat_rates, model), data, ascertainment
    )
