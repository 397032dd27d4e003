"""Rooted trees with arbitrary out-degree, Newick I/O and split extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .errors import ParseError

_DELIMS = set("(),:;[")


@dataclass
class Tree:
    """Node ``i`` has ``children[i]``, ``parent[i]`` (-1 at the root), an
    optional label and an optional length for the branch above it."""

    children: list[list[int]] = field(default_factory=list)
    parent: list[int] = field(default_factory=list)
    labels: list[Optional[str]] = field(default_factory=list)
    lengths: list[Optional[float]] = field(default_factory=list)
    root: int = 0

    def add_node(self, parent: int = -1, label: Optional[str] = None, length: Optional[float] = None) -> int:
        idx = len(self.children)
        self.children.append([])
        self.parent.append(parent)
        self.labels.append(label)
        self.lengths.append(length)
        if parent >= 0:
            self.children[parent].append(idx)
        return idx

    def __len__(self):
        return len(self.children)

    def is_leaf(self, node: int) -> bool:
        return not self.children[node]

    def postorder(self, node: Optional[int] = None) -> list[int]:
        node = self.root if node is None else node
        out, stack = [], [(node, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
            else:
                stack.append((v, True))
                for c in reversed(self.children[v]):
                    stack.append((c, False))
        return out

    def leaves(self) -> list[int]:
        return [v for v in self.postorder() if self.is_leaf(v)]

    def leaf_labels(self) -> list[str]:
        return [self.labels[v] for v in self.leaves()]

    @property
    def leaf_set(self) -> frozenset:
        return frozenset(self.leaf_labels())

    def is_binary(self) -> bool:
        return all(len(c) in (0, 2) for c in self.children)

    def clades(self) -> dict[int, frozenset]:
        """Leaf-label set below every node."""
        below: dict[int, frozenset] = {}
        for v in self.postorder():
            if self.is_leaf(v):
                below[v] = frozenset((self.labels[v],))
            else:
                below[v] = frozenset().union(*(below[c] for c in self.children[v]))
        return below

    def splits(self) -> frozenset:
        """Nontrivial unrooted bipartitions.

        Each split is represented by the side that excludes the
        lexicographically smallest leaf label; only splits with at least
        two leaves on each side are reported.
        """
        clades = self.clades()
        full = clades[self.root]
        ref = min(full)
        out = set()
        for v, c in clades.items():
            side = full - c if ref in c else c
            if 2 <= len(side) <= len(full) - 2:
                out.add(side)
        return frozenset(out)

    def to_newick(self, lengths: bool = True, precision: int = 17, internal_labels: bool = True) -> str:
        def fmt(v: int) -> str:
            if self.children[v]:
                s = "(" + ",".join(fmt(c) for c in self.children[v]) + ")"
                if internal_labels and self.labels[v]:
                    s += _quote(self.labels[v])
            else:
                s = _quote(self.labels[v] or "")
            if lengths and self.lengths[v] is not None and v != self.root:
                s += f":{self.lengths[v]:.{precision}g}"
            return s

        return fmt(self.root) + ";"

    def topology_key(self) -> str:
        """Canonical rooted-topology string (children sorted, no lengths)."""

        def key(v: int) -> str:
            if not self.children[v]:
                return self.labels[v]
            return "(" + ",".join(sorted(key(c) for c in self.children[v])) + ")"

        return key(self.root)


def _quote(label: str) -> str:
    if any(ch in label for ch in "(),:;[] '\t"):
        return "'" + label.replace("'", "''") + "'"
    return label


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip(self):
        t = self.text
        while self.pos < len(t):
            ch = t[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "[":
                end = t.find("]", self.pos)
                if end < 0:
                    raise ParseError("unterminated comment", f"offset {self.pos}")
                self.pos = end + 1
            else:
                break

    def label(self) -> Optional[str]:
        self.skip()
        t = self.text
        if self.pos < len(t) and t[self.pos] == "'":
            start = self.pos
            self.pos += 1
            out = []
            while True:
                if self.pos >= len(t):
                    raise ParseError("unterminated quoted label", f"offset {start}")
                ch = t[self.pos]
                if ch == "'":
                    if self.pos + 1 < len(t) and t[self.pos + 1] == "'":
                        out.append("'")
                        self.pos += 2
                        continue
                    self.pos += 1
                    break
                out.append(ch)
                self.pos += 1
            return "".join(out)
        start = self.pos
        while self.pos < len(t) and t[self.pos] not in _DELIMS and not t[self.pos].isspace():
            self.pos += 1
        lab = t[start:self.pos]
        return lab or None

    def length(self) -> Optional[float]:
        if self.peek() != ":":
            return None
        self.pos += 1
        self.skip()
        start = self.pos
        t = self.text
        while self.pos < len(t) and t[self.pos] not in _DELIMS and not t[self.pos].isspace():
            self.pos += 1
        try:
            return float(t[start:self.pos])
        except ValueError:
            raise ParseError(f"invalid branch length {t[start:self.pos]!r}", f"offset {start}") from None


def parse_newick(text: str) -> Tree:
    """Parse a single Newick tree.  Polytomies, internal labels, quoted
    labels, comments and optional branch lengths are supported."""
    r = _Reader(text)
    tree = Tree()

    def subtree(parent: int) -> int:
        start = r.pos
        if r.peek() == "(":
            node = tree.add_node(parent)
            r.pos += 1
            while True:
                if r.peek() in (",", ")"):
                    raise ParseError("empty subtree", f"offset {r.pos}")
                if r.peek() == "":
                    raise ParseError("unbalanced parentheses: unexpected end of input", f"offset {r.pos}")
                subtree(node)
                ch = r.peek()
                if ch == ",":
                    r.pos += 1
                elif ch == ")":
                    r.pos += 1
                    break
                elif ch == "":
                    raise ParseError("unbalanced parentheses: unexpected end of input", f"offset {r.pos}")
                else:
                    raise ParseError(f"unexpected character {ch!r}", f"offset {r.pos}")
            tree.labels[node] = r.label()
        else:
            lab = r.label()
            if lab is None:
                raise ParseError("empty subtree", f"offset {start}")
            node = tree.add_node(parent, lab)
        tree.lengths[node] = r.length()
        return node

    if r.peek() == "":
        raise ParseError("empty input", "offset 0")
    tree.root = subtree(-1)
    ch = r.peek()
    if ch == ")":
        raise ParseError("unbalanced parentheses: unmatched ')'", f"offset {r.pos}")
    if ch != ";":
        raise ParseError("expected ';' at end of tree", f"offset {r.pos}")
    r.pos += 1
    if r.peek() != "":
        raise ParseError("trailing characters after ';'", f"offset {r.pos}")

    seen = set()
    for v in tree.leaves():
        lab = tree.labels[v]
        if lab in seen:
            raise ParseError(f"duplicate leaf label {lab!r}")
        seen.add(lab)
    return tree


def read_newick_lines(lines: Iterable[str]) -> Iterator[Tree]:
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            yield parse_newick(line)


def tree_from_clusters(leaves: Iterable[str], clusters: Iterable[frozenset]) -> Tree:
    """Build a tree whose non-root internal nodes are exactly ``clusters``.

    Clusters must be pairwise compatible (nested or disjoint).
    """
    leaves = sorted(leaves)
    clusters = sorted({c for c in clusters if 1 < len(c) < len(leaves)}, key=lambda c: (-len(c), sorted(c)))
    tree = Tree()
    root = tree.add_node()
    owner = {lab: root for lab in leaves}
    members = {root: frozenset(leaves)}
    for c in clusters:
        parents = {owner[lab] for lab in c}
        if len(parents) != 1:
            raise ValueError("clusters are not compatible")
        (p,) = parents
        node = tree.add_node(p)
        members[node] = c
        for lab in c:
            owner[lab] = node
    for lab in leaves:
        tree.add_node(owner[lab], lab)
    return tree
