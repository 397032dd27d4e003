"""Array-backed rooted binary time trees used by the sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..tree import Tree


@dataclass
class TimeTree:
    """Leaves are nodes ``0 .. n-1`` (ages 0); internal nodes ``n .. 2n-2``.

    ``left``/``right`` are -1 for leaves and ``parent`` is -1 at the root.
    Branch length of node ``v`` is ``ages[parent[v]] - ages[v]``.
    """

    labels: tuple[str, ...]
    parent: np.ndarray
    left: np.ndarray
    right: np.ndarray
    ages: np.ndarray
    root: int

    @property
    def n_leaves(self) -> int:
        return len(self.labels)

    @property
    def n_nodes(self) -> int:
        return self.parent.shape[0]

    def copy(self) -> "TimeTree":
        return TimeTree(self.labels, self.parent.copy(), self.left.copy(), self.right.copy(), self.ages.copy(), self.root)

    def children(self, v: int) -> tuple[int, int]:
        return int(self.left[v]), int(self.right[v])

    def sibling(self, v: int) -> int:
        p = self.parent[v]
        return int(self.right[p] if self.left[p] == v else self.left[p])

    def replace_child(self, p: int, old: int, new: int) -> None:
        if self.left[p] == old:
            self.left[p] = new
        else:
            self.right[p] = new
        self.parent[new] = p

    def postorder(self) -> np.ndarray:
        """Internal nodes, children before parents."""
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v >= self.n_leaves:
                out.append(v)
                stack.append(int(self.left[v]))
                stack.append(int(self.right[v]))
        return np.array(out[::-1], dtype=np.int64)

    def branch_lengths(self) -> np.ndarray:
        """Length above every node; 0 at the root."""
        b = np.zeros(self.n_nodes)
        mask = self.parent >= 0
        b[mask] = self.ages[self.parent[mask]] - self.ages[mask]
        return b

    def is_valid(self) -> bool:
        mask = self.parent >= 0
        return bool(np.all(self.ages[self.parent[mask]] > self.ages[mask]))

    def subtree_nodes(self, v: int) -> set:
        out = set()
        stack = [v]
        while stack:
            u = stack.pop()
            out.add(u)
            if u >= self.n_leaves:
                stack.append(int(self.left[u]))
                stack.append(int(self.right[u]))
        return out

    def log_rankings(self) -> float:
        """Log number of age orderings of internal nodes compatible with the topology."""
        n = self.n_leaves
        size = np.zeros(self.n_nodes, dtype=np.int64)
        total = 0.0
        for v in self.postorder():
            size[v] = 1 + size[self.left[v]] + size[self.right[v]]
            total += math.log(size[v])
        return math.lgamma(n) - total

    def to_tree(self, rates: Optional[np.ndarray] = None) -> Tree:
        """General :class:`Tree` with branch lengths ``(age difference) * rate``."""
        b = self.branch_lengths()
        if rates is not None:
            b = b * rates
        t = Tree()
        mapping = {}
        stack = [(self.root, -1)]
        while stack:
            v, p = stack.pop()
            label = self.labels[v] if v < self.n_leaves else None
            node = t.add_node(mapping.get(p, -1), label, None if v == self.root else float(b[v]))
            mapping[v] = node
            if v >= self.n_leaves:
                stack.append((int(self.right[v]), v))
                stack.append((int(self.left[v]), v))
        t.root = mapping[self.root]
        return t

    def to_newick(self, rates: Optional[np.ndarray] = None, precision: int = 17) -> str:
        return self.to_tree(rates).to_newick(precision=precision)

    def topology_key(self) -> str:
        def key(v):
            if v < self.n_leaves:
                return self.labels[v]
            return "(" + ",".join(sorted((key(int(self.left[v])), key(int(self.right[v]))))) + ")"

        return key(self.root)

    @classmethod
    def from_tree(cls, tree: Tree, labels: Optional[Sequence[str]] = None) -> "TimeTree":
        """Convert a binary tree with branch lengths (read as durations)."""
        if not tree.is_binary():
            raise ValueError("time trees must be strictly binary")
        leaf_nodes = tree.leaves()
        labels = tuple(labels) if labels is not None else tuple(tree.labels[v] for v in leaf_nodes)
        if set(labels) != tree.leaf_set:
            raise ValueError("label set does not match the tree's leaves")
        n = len(labels)
        depth = {tree.root: 0.0}
        for v in reversed(tree.postorder()):
            for c in tree.children[v]:
                length = tree.lengths[c]
                depth[c] = depth[v] + (1.0 if length is None else length)
        height = max(depth[v] for v in leaf_nodes)
        parent = np.full(2 * n - 1, -1, dtype=np.int64)
        left = np.full(2 * n - 1, -1, dtype=np.int64)
        right = np.full(2 * n - 1, -1, dtype=np.int64)
        ages = np.zeros(2 * n - 1)
        index = {}
        leaf_index = {lab: i for i, lab in enumerate(labels)}
        nxt = n
        for v in tree.postorder():
            if tree.is_leaf(v):
                index[v] = leaf_index[tree.labels[v]]
            else:
                index[v] = nxt
                ages[nxt] = height - depth[v]
                a, b = (index[c] for c in tree.children[v])
                left[nxt], right[nxt] = a, b
                parent[a] = parent[b] = nxt
                nxt += 1
        return cls(labels, parent, left, right, ages, index[tree.root])


def random_topology(labels: Sequence[str], rng: np.random.Generator) -> TimeTree:
    """Uniform random rooted binary topology with placeholder ages.

    Leaves are attached one at a time to a uniformly chosen branch,
    including the branch above the root; each of the ``(2n-3)!!``
    topologies is equally likely.
    """
    n = len(labels)
    if n < 2:
        raise ValueError("need at least two leaves")
    size = 2 * n - 1
    parent = np.full(size, -1, dtype=np.int64)
    left = np.full(size, -1, dtype=np.int64)
    right = np.full(size, -1, dtype=np.int64)
    root = n
    left[root], right[root] = 0, 1
    parent[0] = parent[1] = root
    present = [0, 1, root]
    nxt = n + 1
    for leaf in range(2, n):
        target = present[int(rng.integers(len(present)))]
        new = nxt
        nxt += 1
        p = parent[target]
        left[new], right[new] = target, leaf
        parent[leaf] = new
        if p < 0:
            root = new
        else:
            if left[p] == target:
                left[p] = new
            else:
                right[p] = new
        parent[new] = p
        parent[target] = new
        present.extend((leaf, new))
    tree = TimeTree(tuple(labels), parent, left, right, np.zeros(size), root)
    return tree


def stick_breaking_ages(tree: TimeTree, root_age: float, rng: np.random.Generator) -> None:
    """Assign internal ages top-down: each child is a uniform fraction of its parent's age."""
    tree.ages[:] = 0.0
    tree.ages[tree.root] = root_age
    stack = [tree.root]
    while stack:
        v = stack.pop()
        for c in (int(tree.left[v]), int(tree.right[v])):
            if c >= tree.n_leaves:
                tree.ages[c] = tree.ages[v] * rng.uniform(0.05, 0.95)
                stack.append(c)
