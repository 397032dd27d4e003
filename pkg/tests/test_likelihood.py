import math

import numpy as np
import pytest

import oracles
from cognatephylo import _accel
from cognatephylo.charmatrix import MISSING, CharacterMatrix
from cognatephylo.phylo.likelihood import (
    PatternData,
    _prune_loops,
    _prune_numpy,
    log_likelihood,
    log_likelihood_from_patterns,
    pattern_log_likelihoods,
    transition_matrices,
)
from cognatephylo.phylo.model import SubstModel2, discretize_gamma, transition_matrix
from cognatephylo.phylo.timetree import TimeTree, random_topology, stick_breaking_ages
from cognatephylo.tree import parse_newick


def matrix(labels, cells):
    cells = np.asarray(cells, dtype=np.int8)
    cols = tuple(f"c{j}:0" for j in range(cells.shape[1]))
    return CharacterMatrix(tuple(labels), cols, cells, tuple(c.split(":")[0] for c in cols))


def random_case(rng, max_leaves=5, max_sites=4, missing=0.15):
    n = int(rng.integers(2, max_leaves + 1))
    labels = [f"L{i}" for i in range(n)]
    tree = random_topology(labels, rng)
    stick_breaking_ages(tree, float(rng.uniform(0.05, 2.0)), rng)
    rates = rng.gamma(2.0, 0.5, tree.n_nodes)
    sites = int(rng.integers(1, max_sites + 1))
    cells = rng.integers(0, 2, (n, sites))
    cells[rng.random((n, sites)) < missing] = MISSING
    for j in range(sites):
        if not (cells[:, j] == 1).any():
            cells[int(rng.integers(n)), j] = 1
    return tree, rates, matrix(labels, cells), SubstModel2(float(rng.uniform(0.05, 0.95))), \
        discretize_gamma(float(rng.uniform(0.2, 5.0)), 4)


def test_two_leaf_closed_form():
    t = 0.37
    tree = TimeTree.from_tree(parse_newick(f"(A:{t},B:{t});"))
    m = SubstModel2(0.5)
    p = transition_matrix(t, m)
    expected = 0.5 * p[0, 1] ** 2 + 0.5 * p[1, 1] ** 2
    got = log_likelihood(matrix("AB", [[1], [1]]), tree, np.ones(3), np.ones(1), m, ascertainment=False)
    assert got == pytest.approx(math.log(expected), abs=1e-12)


def test_matches_enumeration_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        tree, rates, X, model, cat = random_case(rng)
        eff = tree.branch_lengths() * rates
        for asc in (False, True):
            got = log_likelihood(X, tree, rates, cat, model, ascertainment=asc)
            want = oracles.enumerate_log_likelihood(tree.parent, tree.n_leaves, eff, X.cells, model.pi0, cat, asc)
            # log L == 0 up to rounding when L == 1; compare L's relative error there
            assert abs(got - want) <= 1e-10 * (abs(want) if abs(want) >= 1e-12 else 1.0)


def test_four_leaf_three_sites():
    tree = TimeTree.from_tree(parse_newick("((A:0.2,B:0.2):0.3,(C:0.4,D:0.4):0.1);"))
    X = matrix("ABCD", [[1, 0, 1], [1, 0, 0], [0, 1, 1], [0, 1, MISSING]])
    cat = discretize_gamma(0.8)
    rates = np.linspace(0.5, 1.5, tree.n_nodes)
    got = log_likelihood(X, tree, rates, cat, SubstModel2(0.6), ascertainment=False)
    want = oracles.enumerate_log_likelihood(tree.parent, 4, tree.branch_lengths() * rates, X.cells, 0.6, cat, False)
    assert got == pytest.approx(want, rel=1e-10)


def test_all_missing_column_contributes_nothing():
    tree = TimeTree.from_tree(parse_newick("((A:0.2,B:0.2):0.3,C:0.5);"))
    base = matrix("ABC", [[1], [0], [1]])
    with_gap = matrix("ABC", [[1, MISSING], [0, MISSING], [1, MISSING]])
    args = (tree, np.ones(tree.n_nodes), discretize_gamma(1.0), SubstModel2(0.4))
    assert log_likelihood(with_gap, *args, ascertainment=False) == pytest.approx(
        log_likelihood(base, *args, ascertainment=False), abs=1e-14)


def test_ascertainment_never_lowers_site_likelihood():
    rng = np.random.default_rng(5)
    for _ in range(30):
        tree, rates, X, model, cat = random_case(rng)
        assert log_likelihood(X, tree, rates, cat, model, True) >= log_likelihood(X, tree, rates, cat, model, False)


def test_pattern_compression_is_transparent():
    rng = np.random.default_rng(9)
    tree, rates, X, model, cat = random_case(rng, max_leaves=5, max_sites=1)
    reps = matrix(X.languages, np.repeat(X.cells, 7, axis=1))
    data = PatternData.from_matrix(reps)
    assert data.n_patterns == 1 and data.weights.tolist() == [7.0]
    assert log_likelihood(reps, tree, rates, cat, model) == pytest.approx(7 * log_likelihood(X, tree, rates, cat, model))


def test_non_binary_tree_rejected():
    with pytest.raises(ValueError):
        log_likelihood(matrix("ABC", [[1], [0], [1]]), parse_newick("(A:1,B:1,C:1);"), np.ones(4), np.ones(1),
                       SubstModel2())


def test_label_order_must_match():
    tree = TimeTree.from_tree(parse_newick("((A:1,B:1):1,C:2);"), labels=("C", "B", "A"))
    with pytest.raises(ValueError):
        log_likelihood(PatternData.from_matrix(matrix("ABC", [[1], [0], [1]])), tree, np.ones(5), np.ones(1),
                       SubstModel2())


def test_scaling_keeps_large_trees_finite():
    rng = np.random.default_rng(1)
    n = 70
    labels = [f"L{i}" for i in range(n)]
    tree = random_topology(labels, rng)
    stick_breaking_ages(tree, 3.0, rng)
    cells = rng.integers(0, 2, (n, 400))
    cells[0] = 1
    X = matrix(labels, cells)
    ll = log_likelihood(X, tree, np.ones(tree.n_nodes), discretize_gamma(0.5), SubstModel2(0.5))
    assert math.isfinite(ll) and ll < 0


def test_numba_and_numpy_pruning_agree():
    rng = np.random.default_rng(77)
    for n in (2, 5, 30):
        labels = [f"L{i}" for i in range(n)]
        tree = random_topology(labels, rng)
        stick_breaking_ages(tree, 1.5, rng)
        cells = rng.integers(-1, 2, (n, 200))
        cells[0] = 1
        data = PatternData.from_matrix(matrix(labels, cells))
        model = SubstModel2(0.3)
        pm = transition_matrices(tree, rng.gamma(4, 0.25, tree.n_nodes), discretize_gamma(0.6), model)
        args = (tree.postorder(), tree.left, tree.right, tree.n_leaves, data.tips, pm, model.freqs)
        ref = _prune_numpy(*args)
        assert np.allclose(_accel.py_func(_prune_loops)(*args), ref, rtol=1e-12, atol=1e-12)
        assert np.allclose(_prune_loops(*args), ref, rtol=1e-12, atol=1e-12)


def test_from_patterns_matches_direct():
    rng = np.random.default_rng(3)
    tree, rates, X, model, cat = random_case(rng)
    data = PatternData.from_matrix(X)
    lnl = pattern_log_likelihoods(data, tree, rates, cat, model)
    assert log_likelihood_from_patterns(lnl, data) == log_likelihood(data, tree, rates, cat, model)
