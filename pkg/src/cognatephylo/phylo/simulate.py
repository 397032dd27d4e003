"""Forward simulation of binary characters on a clock tree."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..charmatrix import CharacterMatrix
from .model import GammaRates, SubstModel2, transition_matrix
from .timetree import TimeTree


def simulate_characters(tree: TimeTree, model: SubstModel2, rates: GammaRates = GammaRates(),
                        branch_rates: Optional[np.ndarray] = None, n_sites: int = 100,
                        seed: int = 0) -> CharacterMatrix:
    """Simulate ``n_sites`` columns, redrawing any column with no 1 at the leaves."""
    if n_sites < 1:
        raise ValueError("n_sites must be at least 1")
    rng = np.random.default_rng(seed)
    if branch_rates is None:
        branch_rates = np.ones(tree.n_nodes)
    cat = rates.rates
    eff = tree.branch_lengths() * branch_rates
    pmats = np.array([[transition_matrix(eff[v] * r, model) for r in cat] for v in range(tree.n_nodes)])
    preorder = tree.postorder()[::-1]
    n = tree.n_leaves
    columns = []
    states = np.zeros(tree.n_nodes, dtype=np.int8)
    while len(columns) < n_sites:
        k = int(rng.integers(len(cat)))
        states[tree.root] = 0 if rng.random() < model.pi0 else 1
        for v in preorder:
            for c in (tree.left[v], tree.right[v]):
                p1 = pmats[c, k, states[v], 1]
                states[c] = 1 if rng.random() < p1 else 0
        col = states[:n].copy()
        if col.any():
            columns.append(col)
    cells = np.array(columns, dtype=np.int8).T
    names = tuple(f"s{i + 1}" for i in range(n_sites))
    return CharacterMatrix(tuple(tree.labels), tuple(f"{c}:0" for c in names), cells, names)


def igr_branch_rates(tree: TimeTree, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Branch rates drawn from the IGR clock; all ones when ``sigma2 == 0``."""
    rates = np.ones(tree.n_nodes)
    if sigma2 <= 0:
        return rates
    nonroot = tree.parent >= 0
    shape = tree.branch_lengths()[nonroot] / sigma2
    rates[nonroot] = rng.gamma(shape, 1.0 / shape)
    return rates
