import os
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# (key, title, passed, detail) rows filled by test_acceptance.py
ACCEPTANCE: list = []

from cognatephylo.tree import Tree  # noqa: E402
from cognatephylo.wordlist import load_wordlist, read_wordlist  # noqa: E402


@pytest.fixture(scope="session")
def tutorial_dir() -> Path:
    return Path(str(resources.files("cognatephylo").joinpath("data", "tutorial")))


@pytest.fixture(scope="session")
def tutorial_wl(tutorial_dir):
    return read_wordlist(tutorial_dir / "wordlist.tsv")


@pytest.fixture
def tiny_wl():
    return load_wordlist(
        "ID\tLANGUAGE\tCONCEPT\tTOKENS\tCOGNATE_ID\n"
        "1\tA\tcat\tk a t\tc1\n"
        "2\tB\tcat\th a t\tc1\n"
        "3\tC\tcat\tp i s\tc2\n"
        "4\tA\tdog\td o g\td1\n"
        "5\tB\tdog\tt o k\td1\n"
        "6\tC\tdog\th u n d\td2\n"
        "7\tC\tdog\tk a n i s\td3\n"
    )


def random_binary_tree(labels, rng) -> Tree:
    """Random rooted binary tree (uniform leaf insertion) without lengths."""
    labels = list(labels)
    rng.shuffle(labels)
    t = Tree()
    root = t.add_node()
    t.add_node(root, labels[0])
    t.add_node(root, labels[1])
    for lab in labels[2:]:
        target = int(rng.integers(len(t)))
        # Splice a new internal node above `target`.
        new = t.add_node(-1)
        p = t.parent[target]
        if p < 0:
            t.root = new
        else:
            t.children[p][t.children[p].index(target)] = new
            t.parent[new] = p
        t.children[new] = [target]
        t.parent[target] = new
        t.add_node(new, lab)
    return t


def random_tree_with_polytomies(labels, rng, collapse=0.3) -> Tree:
    """Binary random tree with some internal edges contracted."""
    t = random_binary_tree(labels, rng)
    clades = [c for v, c in t.clades().items() if v != t.root and len(c) > 1 and rng.random() > collapse]
    from cognatephylo.tree import tree_from_clusters

    return tree_from_clusters(t.leaf_set, clades)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} [{key}] {title}: {detail}")
