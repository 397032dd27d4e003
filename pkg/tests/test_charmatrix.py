import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cognatephylo.charmatrix import MISSING, CharacterMatrix, read_matrix, to_matrix, write_matrix, write_phylip
from cognatephylo.cogcluster import CognatePartition, ccm_partition
from cognatephylo.errors import ParseError
from cognatephylo.wordlist import WordEntry, Wordlist


def test_three_languages_two_clusters():
    wl = Wordlist.from_entries(WordEntry(str(i), lang, "c", ("a",)) for i, lang in enumerate("ABC"))
    part = CognatePartition.from_local([("c", ["0", "1", "2"], [0, 0, 1])])
    m = to_matrix(wl, part)
    assert m.cells[:, 0].tolist() == [1, 1, 0]
    assert m.cells[:, 1].tolist() == [0, 0, 1]
    assert m.columns == ("c:0", "c:1")


def test_missing_concept_row(tiny_wl):
    wl = Wordlist.from_entries(tiny_wl.entries + (WordEntry("8", "D", "cat", ("k", "a"), "c1"),))
    m = to_matrix(wl, CognatePartition.from_gold(wl))
    d = wl.languages.index("D")
    dog = [j for j, c in enumerate(m.column_concept) if c == "dog"]
    assert (m.cells[d, dog] == MISSING).all()
    assert (m.cells[d, [j for j in range(m.n_columns) if j not in dog]] != MISSING).all()


def test_columns_have_a_one_and_count(tutorial_wl):
    part = ccm_partition(tutorial_wl)
    m = to_matrix(tutorial_wl, part)
    assert m.n_columns == part.n_clusters()
    assert ((m.cells == 1).sum(axis=0) >= 1).all()
    assert m.languages == tutorial_wl.languages


def test_row_order_independent_of_entry_order(tutorial_wl):
    part = ccm_partition(tutorial_wl)
    shuffled = list(tutorial_wl.entries)
    np.random.default_rng(0).shuffle(shuffled)
    wl2 = Wordlist(tuple(shuffled), tutorial_wl.languages, tutorial_wl.concepts)
    assert to_matrix(wl2, part) == to_matrix(tutorial_wl, part)


def test_unknown_ids(tiny_wl):
    part = CognatePartition.from_local([("cat", ["1", "2", "zz"], [0, 0, 1])])
    with pytest.raises(ValueError, match="zz"):
        to_matrix(tiny_wl, part)


@given(st.integers(2, 6), st.integers(1, 8), st.integers(0, 2**31))
def test_round_trip(n, c, seed):
    rng = np.random.default_rng(seed)
    cells = rng.choice([0, 1, MISSING], size=(n, c))
    m = CharacterMatrix(tuple(f"L{i}" for i in range(n)), tuple(f"k{j}:0" for j in range(c)), cells,
                        tuple(f"k{j}" for j in range(c)))
    buf = io.StringIO()
    write_matrix(m, buf)
    assert read_matrix(buf.getvalue()) == m


@pytest.mark.parametrize("text, where", [
    ("LANGUAGE\tc:0\nA\t2\n", "line 2"),
    ("LANGUAGE\tc:0\tc:1\nA\t1\n", "line 2"),
    ("LANGUAGE\tc:0\nA\t1\nB\t1\t0\n", "line 3"),
    ("", "line 1"),
])
def test_parse_errors(text, where):
    with pytest.raises(ParseError, match=where):
        read_matrix(text)


def test_phylip_export():
    m = CharacterMatrix(("A", "Bb"), ("x:0", "x:1"), np.array([[1, MISSING], [0, 1]]), ("x", "x"))
    buf = io.StringIO()
    write_phylip(m, buf)
    assert buf.getvalue() == "2 2\nA  1?\nBb 01\n"
