"""Time the hot kernels with numba on and off.

Each backend runs in its own interpreter because the switch
(``COGNATEPHYLO_DISABLE_NUMBA``) is read at import time.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from cognatephylo import _accel, align
from cognatephylo.charmatrix import CharacterMatrix
from cognatephylo.phylo.likelihood import PatternData, pattern_log_likelihoods
from cognatephylo.phylo.mcmc import McmcConfig, run_chain
from cognatephylo.phylo.model import SubstModel2, discretize_gamma
from cognatephylo.phylo.timetree import random_topology, stick_breaking_ages
from cognatephylo.soundmodel import sca_scores
from cognatephylo.treedist import quartet_topologies

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)

labels = [f"L{i}" for i in range(60)]
tree = random_topology(labels, rng)
stick_breaking_ages(tree, 2.0, rng)
cells = rng.integers(-1, 2, (60, 2000)).astype(np.int8)
cells[0] = 1
cols = tuple(f"c{j}:0" for j in range(2000))
data = PatternData.from_matrix(CharacterMatrix(tuple(labels), cols, cells, tuple(c[:-2] for c in cols)))
rates = np.ones(tree.n_nodes)
cat = discretize_gamma(0.5)
model = SubstModel2(0.6)

gold = tree.to_tree()

table = sca_scores()
seqs = [rng.integers(0, len(table.symbols), int(rng.integers(2, 10))).astype(np.int64) for _ in range(400)]
flat, offsets = align.pack(seqs)
left = rng.integers(0, 400, 5000).astype(np.int64)
right = rng.integers(0, 400, 5000).astype(np.int64)

work = {
    "pruning (60 taxa x 2000 sites)": lambda: pattern_log_likelihoods(data, tree, rates, cat, model),
    "quartet codes (60 taxa, 487635 quartets)": lambda: quartet_topologies(gold),
    "affine alignment (5000 pairs)": lambda: align.batch_scores(flat, offsets, left, right, table.matrix,
                                                               table.gap_open, table.gap_extend),
    "prior-only MCMC (20000 generations)": lambda: run_chain(
        None, McmcConfig(generations=20000, sample_every=1000), labels=labels[:12]),
}
out = {"numba": _accel.USE_NUMBA}
for name, fn in work.items():
    t0 = time.perf_counter()
    fn()  # warm-up (includes JIT compilation or cache load)
    first = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = {"first": first, "best": best}
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("COGNATEPHYLO_DISABLE_NUMBA", None)
    if disable:
        env["COGNATEPHYLO_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    if not fast.pop("numba"):
        print("warning: numba unavailable, both columns use the numpy path", file=sys.stderr)
    slow.pop("numba")
    width = max(len(k) for k in fast)
    print(f"{'kernel':<{width}}  {'numba (s)':>10}  {'numpy (s)':>10}  {'speedup':>8}  {'first call':>10}")
    for name in fast:
        f, s = fast[name]["best"], slow[name]["best"]
        print(f"{name:<{width}}  {f:>10.4f}  {s:>10.4f}  {s / f:>7.1f}x  {fast[name]['first']:>9.2f}s")


if __name__ == "__main__":
    started = time.perf_counter()
    main()
    print(f"total wall time {time.perf_counter() - started:.1f}s")
