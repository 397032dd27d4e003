import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from cognatephylo.cogcluster import (
    DEFAULT_THRESHOLDS,
    CognatePartition,
    DetectConfig,
    canonical_labels,
    ccm_partition,
    detect_cognates,
    flat_upgma,
    label_propagation,
    map_equation,
    map_equation_communities,
    read_partition,
    register_method,
    write_partition,
)
from cognatephylo.errors import ConfigurationError, FormatError
from cognatephylo.pairsim import lexstat_train, online_pmi_train
from cognatephylo.wordlist import WordEntry, Wordlist


def concept_wl(*words, concept="c"):
    return Wordlist.from_entries(WordEntry(str(i), f"L{i}", concept, tuple(t.split())) for i, t in enumerate(words))


def groups(labels):
    out = {}
    for i, lab in enumerate(labels):
        out.setdefault(lab, set()).add(i)
    return frozenset(frozenset(g) for g in out.values())


def random_distances(rng, n):
    d = rng.random((n, n))
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0)
    return d


def two_cliques(inner, bridge, size=3):
    n = 2 * size
    d = np.ones((n, n))
    for block in (range(size), range(size, n)):
        for i in block:
            for j in block:
                d[i, j] = inner
    d[size - 1, size] = d[size, size - 1] = bridge
    np.fill_diagonal(d, 0)
    return d


# -- CCM ---------------------------------------------------------------------

def test_ccm_same_key_one_cluster():
    part = ccm_partition(concept_wl("k a t a", "k o t"))
    assert part.n_clusters() == 1


def test_ccm_different_first_class():
    assert ccm_partition(concept_wl("k a t", "p a t")).n_clusters() == 2


def test_ccm_all_placeholder_singletons():
    assert ccm_partition(concept_wl("a", "o")).n_clusters() == 2


def test_ccm_wildcard_never_matches():
    assert ccm_partition(concept_wl("☃ a t", "☃ a t")).n_clusters() == 2


def test_ccm_partial_placeholder_matches_on_full_key():
    assert ccm_partition(concept_wl("p a", "p o", "p a t")).n_clusters() == 2


# -- UPGMA -------------------------------------------------------------------

def test_upgma_all_far():
    assert flat_upgma(np.ones((4, 4)) - np.eye(4), 0.75) == [0, 1, 2, 3]


def test_upgma_two_close():
    assert flat_upgma(np.array([[0, 0.1], [0.1, 0]]), 0.75) == [0, 0]


def test_upgma_average_linkage_stops():
    d = np.array([[0, 0.2, 0.9], [0.2, 0, 0.2], [0.9, 0.2, 0]])
    assert flat_upgma(d, 0.5) == [0, 0, 1]


def test_upgma_rejects_bad_threshold():
    with pytest.raises(ValueError):
        flat_upgma(np.zeros((2, 2)), 0.0)


def test_upgma_matches_bruteforce_oracle():
    rng = np.random.default_rng(99)
    for case in range(200):
        n = 1 + case % 6
        d = random_distances(rng, n)
        threshold = float(rng.uniform(0.05, 1.0))
        assert groups(flat_upgma(d, threshold)) == oracles.upgma_partition(d, threshold)


def test_upgma_tie_break_smallest_index():
    d = np.array([[0, 0.3, 0.3], [0.3, 0, 0.3], [0.3, 0.3, 0]])
    # {0,1} merges first; linkage to 2 is then 0.3, so all merge at 0.3 but not at 0.29
    assert flat_upgma(d, 0.29) == [0, 1, 2]
    assert flat_upgma(d, 0.3) == [0, 0, 0]


@given(st.integers(2, 7), st.integers(0, 10_000))
def test_upgma_threshold_bounds(n, seed):
    d = random_distances(np.random.default_rng(seed), n)
    assert flat_upgma(d, 1.0) == [0] * n
    assert len(set(flat_upgma(d, 1e-9))) == n


# -- label propagation ---------------------------------------------------------

def test_lpa_no_edges():
    assert label_propagation(np.ones((4, 4)) - np.eye(4), 0.5, seed=1) == [0, 1, 2, 3]


def test_lpa_complete_graph_at_zero():
    assert label_propagation(np.zeros((5, 5)), 0.5, seed=1) == [0] * 5


def test_lpa_two_cliques_weak_bridge():
    d = two_cliques(0.1, 0.45)
    for seed in range(1, 101):
        assert groups(label_propagation(d, 0.5, seed)) == frozenset({frozenset({0, 1, 2}), frozenset({3, 4, 5})})


def test_lpa_deterministic():
    d = random_distances(np.random.default_rng(5), 9)
    assert label_propagation(d, 0.6, seed=3) == label_propagation(d, 0.6, seed=3)


# -- map equation --------------------------------------------------------------

def test_infomap_no_edges():
    assert map_equation_communities(np.ones((3, 3)) - np.eye(3), 0.55) == [0, 1, 2]


def test_infomap_single_clique():
    assert map_equation_communities(np.full((4, 4), 0.2) - 0.2 * np.eye(4), 0.55, seed=4) == [0] * 4


def test_infomap_barbell():
    d = two_cliques(0.1, 0.3, size=4)
    w = np.where(d < 0.55, 1 - d, 0.0)
    np.fill_diagonal(w, 0)
    two = [0] * 4 + [1] * 4
    assert map_equation(w, two) < map_equation(w, [0] * 8)
    for seed in range(20):
        assert groups(map_equation_communities(d, 0.55, seed)) == groups(two)


def test_map_equation_singletons_equals_entropy_bound():
    # one module: code length is the node-visit entropy
    w = np.ones((3, 3)) - np.eye(3)
    assert map_equation(w, [0, 0, 0]) == pytest.approx(np.log2(3))


# -- dispatch ----------------------------------------------------------------

def test_default_thresholds():
    assert (DEFAULT_THRESHOLDS["NED"], DEFAULT_THRESHOLDS["SCA"], DEFAULT_THRESHOLDS["LEXSTAT"],
            DEFAULT_THRESHOLDS["ONLINEPMI"]) == (0.75, 0.45, 0.55, 0.5)


def test_ned_identical_words_cluster():
    assert detect_cognates(concept_wl("k a t", "k a t"), "NED").n_clusters() == 1


@pytest.mark.parametrize("method", ["CCM", "NED", "SCA", "LEXSTAT", "ONLINEPMI"])
def test_single_word_concept_is_singleton(method, tutorial_wl):
    wl = Wordlist.from_entries(tutorial_wl.entries + (WordEntry("solo", "English", "lonely", ("s", "o")),))
    cfg = DetectConfig(lexstat=lexstat_train(wl, n_perm=2), pmi=online_pmi_train(wl, 64, 1))
    part = detect_cognates(wl, method, cfg)
    solo = part.assignment["solo"]
    assert [i for i, lab in part.assignment.items() if lab == solo] == ["solo"]


@pytest.mark.parametrize("method", ["LEXSTAT", "ONLINEPMI"])
def test_missing_artifact(method, tiny_wl):
    with pytest.raises(ConfigurationError):
        detect_cognates(tiny_wl, method)


def test_unknown_method(tiny_wl):
    with pytest.raises(ValueError, match="SVM"):
        detect_cognates(tiny_wl, "SVM")


def test_extension_point(tiny_wl):
    register_method("ALLONE", lambda wl, cfg: CognatePartition.from_local(
        (c, [e.id for e in es], [0] * len(es)) for c, es in wl.by_concept().items()))
    assert detect_cognates(tiny_wl, "allone").n_clusters() == 2


def test_threshold_override(tiny_wl):
    strict = detect_cognates(tiny_wl, "NED", DetectConfig(thresholds={"NED": 0.01}))
    assert strict.n_clusters() == len(tiny_wl)


@pytest.mark.parametrize("method", ["CCM", "NED", "SCA", "LEXSTAT", "ONLINEPMI"])
def test_every_method_partitions_and_is_deterministic(method, tutorial_wl):
    cfg = DetectConfig(lexstat=lexstat_train(tutorial_wl, n_perm=3, seed=1),
                       pmi=online_pmi_train(tutorial_wl, 64, 2, seed=1), seed=7)
    part = detect_cognates(tutorial_wl, method, cfg)
    assert part.ids == {e.id for e in tutorial_wl.entries}
    concept_of = {e.id: e.concept for e in tutorial_wl.entries}
    assert all(lab[0] == concept_of[i] for i, lab in part.assignment.items())
    assert detect_cognates(tutorial_wl, method, cfg) == part


# -- partitions --------------------------------------------------------------

def test_canonical_labels():
    assert canonical_labels(["b", "a", "b", "c"]) == [0, 1, 0, 2]


def test_partition_round_trip(tiny_wl):
    part = CognatePartition.from_gold(tiny_wl)
    buf = io.StringIO()
    write_partition(part, buf)
    again = read_partition(buf.getvalue())
    assert again == part
    assert part.n_clusters() == 5


def test_partition_from_gold_needs_ids():
    wl = concept_wl("k a")
    with pytest.raises(ConfigurationError):
        CognatePartition.from_gold(wl)


@pytest.mark.parametrize("text", [
    "ID\tCONCEPT\n",
    "ID\tCONCEPT\tCLUSTER_LABEL\n1\tc\tc:x\n",
    "ID\tCONCEPT\tCLUSTER_LABEL\n1\tc\td:0\n",
    "ID\tCONCEPT\tCLUSTER_LABEL\n1\tc\tc:0\n1\tc\tc:1\n",
])
def test_partition_parse_errors(text):
    with pytest.raises(FormatError):
        read_partition(text)


def test_labels_distinct_across_concepts(tiny_wl):
    part = CognatePartition.from_gold(tiny_wl)
    cat = {part.assignment[i] for i in ("1", "2", "3")}
    dog = {part.assignment[i] for i in ("4", "5", "6", "7")}
    assert not cat & dog
