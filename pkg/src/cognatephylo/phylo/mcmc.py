"""Metropolis-Hastings sampling of clock trees and model parameters.

The state holds a rooted binary time tree, the stationary frequency of
state 0, the Gamma shape for among-site rate variation, the variance
parameter of the independent-gamma-rates clock and one rate multiplier
per branch.  Priors:

* topology uniform over all rooted binary topologies;
* internal node ages uniform given the root age (normalised per topology);
* root age exponential (mean ``root_age_mean``);
* branch rate ``r_j ~ Gamma(shape=b_j/sigma2, rate=b_j/sigma2)``;
* ``pi0 ~ Uniform(0, 1)``, ``alpha`` and ``sigma2`` exponential.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .._accel import jit
from ..tree import Tree, parse_newick
from ..treedist import split_frequencies as _split_frequencies
from .likelihood import PatternData, log_likelihood_from_patterns, pattern_log_likelihoods
from .model import GammaRates, SubstModel2, discretize_gamma
from .timetree import TimeTree, random_topology, stick_breaking_ages

NARROW, NARROW_RATES, SPR, AGE, AGE_RATES, ROOT = "narrow", "narrow_rates", "spr", "age", "age_rates", "root"
PI0, ALPHA, SIGMA2, SIGMA2_RATES, RATE, RATE_DRAW = "pi0", "alpha", "sigma2", "sigma2_rates", "rate", "rate_draw"
KERNELS = (NARROW, NARROW_RATES, SPR, AGE, AGE_RATES, ROOT, PI0, ALPHA, SIGMA2, SIGMA2_RATES, RATE, RATE_DRAW)
DEFAULT_WEIGHTS = {
    NARROW: 0.10, NARROW_RATES: 0.12, SPR: 0.06, AGE: 0.12, AGE_RATES: 0.10, ROOT: 0.05,
    PI0: 0.03, ALPHA: 0.03, SIGMA2: 0.02, SIGMA2_RATES: 0.06, RATE: 0.20, RATE_DRAW: 0.10,
}
DEFAULT_TUNING = {
    AGE: 0.5,       # window width as a fraction of the admissible interval
    AGE_RATES: 0.5,
    ROOT: 0.5,      # log-scale multiplier width
    PI0: 0.1,       # sliding window width
    ALPHA: 1.2,
    SIGMA2: 1.5,
    SIGMA2_RATES: 1.0,
    RATE: 1.5,
}
DEBUG_CHECK_EVERY = 10_000


def num_rooted_topologies(n: int) -> int:
    """Number of rooted binary topologies on ``n`` labelled leaves,
    ``(2n-3)! / (2^(n-2) (n-2)!)``."""
    if n < 2:
        raise ValueError("need at least two leaves")
    return math.factorial(2 * n - 3) // (2 ** (n - 2) * math.factorial(n - 2))


def log_num_rooted_topologies(n: int) -> float:
    if n < 2:
        raise ValueError("need at least two leaves")
    return math.lgamma(2 * n - 2) - (n - 2) * math.log(2.0) - math.lgamma(n - 1)


@dataclass(frozen=True)
class PriorConfig:
    root_age_mean: float = 1.0
    alpha_mean: float = 1.0
    sigma2_mean: float = 1.0
    categories: int = 4


@dataclass(frozen=True)
class IgrClock:
    sigma2: float
    rates: np.ndarray


@dataclass
class McmcState:
    tree: TimeTree
    pi0: float
    alpha: float
    sigma2: float
    branch_rates: np.ndarray
    cat_rates: np.ndarray = field(default=None)
    loglik: float = math.nan
    logprior: float = math.nan

    def __post_init__(self):
        if self.cat_rates is None:
            self.cat_rates = discretize_gamma(self.alpha, 4)

    @property
    def model(self) -> SubstModel2:
        return SubstModel2(self.pi0)

    @property
    def rates(self) -> GammaRates:
        return GammaRates(self.alpha, len(self.cat_rates))

    @property
    def clock(self) -> IgrClock:
        return IgrClock(self.sigma2, self.branch_rates)

    def copy(self) -> "McmcState":
        return replace(self, tree=self.tree.copy(), branch_rates=self.branch_rates.copy())


@jit
def _tree_prior_kernel(parent, left, right, ages, rates, root, n_leaves, sigma2):
    """Clock density plus the per-topology node-age normaliser; -inf if invalid."""
    n_nodes = parent.shape[0]
    total = 0.0
    for v in range(n_nodes):
        if v == root:
            continue
        b = ages[parent[v]] - ages[v]
        r = rates[v]
        if not (b > 0.0 and r > 0.0):
            return -np.inf
        shape = b / sigma2
        total += shape * np.log(shape) - math.lgamma(shape) + (shape - 1.0) * np.log(r) - shape * r
    # Internal nodes sorted by age give a children-first order.
    order = np.argsort(ages[n_leaves:]) + n_leaves
    size = np.zeros(n_nodes, dtype=np.int64)
    log_sizes = 0.0
    for idx in range(order.shape[0]):
        v = order[idx]
        size[v] = 1 + size[left[v]] + size[right[v]]
        log_sizes += np.log(size[v])
    log_rankings = math.lgamma(n_leaves) - log_sizes
    if n_leaves > 2:
        total += math.lgamma(n_leaves - 1) - log_rankings - (n_leaves - 2) * np.log(ages[root])
    return total


def log_prior(s: McmcState, hyper: PriorConfig = PriorConfig()) -> float:
    tree = s.tree
    n = tree.n_leaves
    if not (0.0 < s.pi0 < 1.0 and s.alpha > 0 and s.sigma2 > 0):
        return -math.inf
    lp = _tree_prior_kernel(tree.parent, tree.left, tree.right, tree.ages, s.branch_rates, tree.root, n, s.sigma2)
    if lp == -math.inf:
        return lp
    T = float(tree.ages[tree.root])
    lp += -log_num_rooted_topologies(n)
    lp += -math.log(hyper.root_age_mean) - T / hyper.root_age_mean
    lp += -math.log(hyper.alpha_mean) - s.alpha / hyper.alpha_mean
    lp += -math.log(hyper.sigma2_mean) - s.sigma2 / hyper.sigma2_mean
    return float(lp)


def state_log_likelihood(data: PatternData, s: McmcState, ascertainment: bool = True) -> float:
    lnl = pattern_log_likelihoods(data, s.tree, s.branch_rates, s.cat_rates, s.model)
    return log_likelihood_from_patterns(lnl, data, ascertainment)


# ---------------------------------------------------------------------------
# Proposals.  Each takes (state copy, rng, tuning) and mutates the copy,
# returning the log Hastings ratio, or None when no move is possible.


def _narrow_moves(tree: TimeTree) -> list[tuple[int, int]]:
    moves = []
    ages = tree.ages
    for i in range(tree.n_leaves, tree.n_nodes):
        if i == tree.root:
            continue
        u = tree.sibling(i)
        if ages[u] < ages[i]:
            moves.append((i, int(tree.left[i])))
            moves.append((i, int(tree.right[i])))
    return moves


def propose_narrow(s: McmcState, rng, tuning) -> Optional[float]:
    tree = s.tree
    moves = _narrow_moves(tree)
    if not moves:
        return None
    i, c = moves[int(rng.integers(len(moves)))]
    p = int(tree.parent[i])
    u = tree.sibling(i)
    tree.replace_child(p, u, c)
    tree.replace_child(i, c, u)
    return math.log(len(moves)) - math.log(len(_narrow_moves(tree)))


def _keep_effective(s: McmcState, nodes, old_lengths) -> float:
    """Rescale rates above ``nodes`` so rate * length is unchanged; log Jacobian."""
    tree = s.tree
    log_jac = 0.0
    for v, b_old in zip(nodes, old_lengths):
        b_new = tree.ages[tree.parent[v]] - tree.ages[v]
        if not b_new > 0:
            return -math.inf
        s.branch_rates[v] *= b_old / b_new
        log_jac += math.log(b_old) - math.log(b_new)
    return log_jac


def propose_narrow_rates(s: McmcState, rng, tuning) -> Optional[float]:
    """Narrow exchange in which both swapped subtrees keep their effective
    branch lengths (an unrooted nearest-neighbour interchange)."""
    tree = s.tree
    moves = _narrow_moves(tree)
    if not moves:
        return None
    i, c = moves[int(rng.integers(len(moves)))]
    p = int(tree.parent[i])
    u = tree.sibling(i)
    old = (tree.ages[i] - tree.ages[c], tree.ages[p] - tree.ages[u])
    tree.replace_child(p, u, c)
    tree.replace_child(i, c, u)
    log_jac = _keep_effective(s, (c, u), old)
    return math.log(len(moves)) - math.log(len(_narrow_moves(tree))) + log_jac


def _spr_candidates(tree: TimeTree) -> list[int]:
    root = tree.root
    return [v for v in range(tree.n_nodes) if v != root and tree.parent[v] != root]


def propose_spr(s: McmcState, rng, tuning) -> Optional[float]:
    tree = s.tree
    cands = _spr_candidates(tree)
    if not cands:
        return None
    i = cands[int(rng.integers(len(cands)))]
    p = int(tree.parent[i])
    sib = tree.sibling(i)
    g = int(tree.parent[p])
    ages = tree.ages
    below = tree.subtree_nodes(i)

    def parent_after_prune(j):
        return g if j == sib else int(tree.parent[j])

    dests = [
        j for j in range(tree.n_nodes)
        if j != tree.root and j != p and j not in below and ages[parent_after_prune(j)] > ages[i]
    ]
    j = dests[int(rng.integers(len(dests)))]
    q = parent_after_prune(j)
    lo = max(ages[i], ages[j])
    len_fwd = ages[q] - lo
    len_rev = ages[g] - max(ages[i], ages[sib])
    new_age = lo + rng.random() * len_fwd
    if not lo < new_age < ages[q]:
        return -math.inf
    n_before = len(cands)
    tree.replace_child(g, p, sib)
    tree.replace_child(q, j, p)
    tree.replace_child(p, sib, j)
    ages[p] = new_age
    return math.log(n_before) - math.log(len(_spr_candidates(tree))) + math.log(len_fwd) - math.log(len_rev)


def _reflect(x: float, lo: float, hi: float) -> float:
    width = hi - lo
    if width <= 0:
        return lo
    y = (x - lo) % (2.0 * width)
    return lo + (y if y <= width else 2.0 * width - y)


def propose_age(s: McmcState, rng, tuning) -> Optional[float]:
    tree = s.tree
    internal = [v for v in range(tree.n_leaves, tree.n_nodes) if v != tree.root]
    if not internal:
        return None
    v = internal[int(rng.integers(len(internal)))]
    lo = max(tree.ages[tree.left[v]], tree.ages[tree.right[v]])
    hi = tree.ages[tree.parent[v]]
    w = tuning[AGE] * (hi - lo)
    if w > 0:
        tree.ages[v] = _reflect(tree.ages[v] + w * (rng.random() - 0.5), lo, hi)
    return 0.0


def propose_age_rates(s: McmcState, rng, tuning) -> Optional[float]:
    """Node-age slide that rescales the three adjacent branch rates so the
    effective lengths, and hence the likelihood, stay fixed."""
    tree = s.tree
    internal = [v for v in range(tree.n_leaves, tree.n_nodes) if v != tree.root]
    if not internal:
        return None
    v = internal[int(rng.integers(len(internal)))]
    a, b = int(tree.left[v]), int(tree.right[v])
    lo = max(tree.ages[a], tree.ages[b])
    hi = tree.ages[tree.parent[v]]
    w = tuning[AGE_RATES] * (hi - lo)
    if not w > 0:
        return None
    nodes = (v, a, b)
    old = [tree.ages[tree.parent[x]] - tree.ages[x] for x in nodes]
    tree.ages[v] = _reflect(tree.ages[v] + w * (rng.random() - 0.5), lo, hi)
    return _keep_effective(s, nodes, old)


def _multiplier(rng, width) -> float:
    return math.exp(width * (rng.random() - 0.5))


def propose_root(s: McmcState, rng, tuning) -> Optional[float]:
    tree = s.tree
    m = _multiplier(rng, tuning[ROOT])
    r = tree.root
    tree.ages[r] *= m
    if tree.ages[r] <= max(tree.ages[tree.left[r]], tree.ages[tree.right[r]]):
        return -math.inf
    return math.log(m)


def propose_pi0(s: McmcState, rng, tuning) -> Optional[float]:
    s.pi0 = _reflect(s.pi0 + tuning[PI0] * (rng.random() - 0.5), 0.0, 1.0)
    if not 0.0 < s.pi0 < 1.0:
        return -math.inf
    return 0.0


def propose_alpha(s: McmcState, rng, tuning) -> Optional[float]:
    m = _multiplier(rng, tuning[ALPHA])
    s.alpha *= m
    s.cat_rates = discretize_gamma(s.alpha, len(s.cat_rates))
    return math.log(m)


def propose_sigma2(s: McmcState, rng, tuning) -> Optional[float]:
    m = _multiplier(rng, tuning[SIGMA2])
    s.sigma2 *= m
    return math.log(m)


def propose_rate(s: McmcState, rng, tuning) -> Optional[float]:
    tree = s.tree
    v = int(rng.integers(tree.n_nodes - 1))
    if v >= tree.root:
        v += 1
    m = _multiplier(rng, tuning[RATE])
    s.branch_rates[v] *= m
    return math.log(m)


def _log_gamma_pdf(x: float, shape: float) -> float:
    return shape * math.log(shape) - math.lgamma(shape) + (shape - 1.0) * math.log(x) - shape * x


def propose_rate_draw(s: McmcState, rng, tuning) -> Optional[float]:
    """Redraw one branch rate from its clock prior given the branch length
    (an independence proposal; the ratio cancels the clock prior term)."""
    tree = s.tree
    v = int(rng.integers(tree.n_nodes - 1))
    if v >= tree.root:
        v += 1
    b = tree.ages[tree.parent[v]] - tree.ages[v]
    shape = b / s.sigma2
    old = s.branch_rates[v]
    new = rng.gamma(shape, 1.0 / shape)
    if not new > 0 or not math.isfinite(new):
        return -math.inf
    s.branch_rates[v] = new
    return _log_gamma_pdf(old, shape) - _log_gamma_pdf(new, shape)


def _requantile(rates: np.ndarray, shape_old: np.ndarray, shape_new: np.ndarray) -> tuple[np.ndarray, float]:
    """Move each rate to the same quantile of its new Gamma(shape, rate=shape).

    Returns the new rates and the log Jacobian ``sum log f_old(r) - log f_new(r')``.
    The upper tail is used above the mean, where the CDF saturates.
    """
    upper = rates > 1.0
    tail = np.where(upper, special.gammaincc(shape_old, shape_old * rates),
                    special.gammainc(shape_old, shape_old * rates))
    with np.errstate(all="ignore"):
        new = np.where(upper, special.gammainccinv(shape_new, tail),
                       special.gammaincinv(shape_new, tail)) / shape_new
    if not (np.all(np.isfinite(new)) and np.all(new > 0)):
        return new, -math.inf
    log_old = shape_old * np.log(shape_old) - special.gammaln(shape_old) + (shape_old - 1) * np.log(rates) - shape_old * rates
    log_new = shape_new * np.log(shape_new) - special.gammaln(shape_new) + (shape_new - 1) * np.log(new) - shape_new * new
    return new, float(np.sum(log_old) - np.sum(log_new))


def propose_sigma2_rates(s: McmcState, rng, tuning) -> Optional[float]:
    """Multiply sigma2 and carry every branch rate along at a fixed prior
    quantile, so the clock prior barely changes and the move is driven by
    the likelihood and the sigma2 hyperprior."""
    tree = s.tree
    m = _multiplier(rng, tuning[SIGMA2_RATES])
    nonroot = tree.parent >= 0
    b = tree.branch_lengths()[nonroot]
    new, log_jac = _requantile(s.branch_rates[nonroot], b / s.sigma2, b / (s.sigma2 * m))
    if log_jac == -math.inf:
        return -math.inf
    s.sigma2 *= m
    s.branch_rates[nonroot] = new
    return math.log(m) + log_jac


PROPOSALS = {
    NARROW: propose_narrow, NARROW_RATES: propose_narrow_rates, SPR: propose_spr, AGE: propose_age,
    AGE_RATES: propose_age_rates, ROOT: propose_root,
    PI0: propose_pi0, ALPHA: propose_alpha, SIGMA2: propose_sigma2, SIGMA2_RATES: propose_sigma2_rates,
    RATE: propose_rate, RATE_DRAW: propose_rate_draw,
}


@dataclass
class Target:
    """What the chain samples: the data (or ``None`` for the prior alone)."""

    data: Optional[PatternData]
    hyper: PriorConfig = PriorConfig()
    ascertainment: bool = True

    def log_likelihood(self, s: McmcState) -> float:
        if self.data is None:
            return 0.0
        return state_log_likelihood(self.data, s, self.ascertainment)

    def log_prior(self, s: McmcState) -> float:
        return log_prior(s, self.hyper)

    def refresh(self, s: McmcState) -> McmcState:
        s.logprior = self.log_prior(s)
        s.loglik = self.log_likelihood(s) if s.logprior > -math.inf else -math.inf
        return s


def _as_target(X) -> Target:
    if isinstance(X, Target):
        return X
    if X is None:
        return Target(None)
    if isinstance(X, PatternData):
        return Target(X)
    return Target(PatternData.from_matrix(X))


def mh_step(s: McmcState, X, kernel: str, rng: np.random.Generator,
            tuning: Optional[dict] = None) -> tuple[McmcState, bool]:
    """One Metropolis-Hastings update with the named proposal kernel.

    ``X`` is a CharacterMatrix, PatternData, Target or ``None`` (prior
    only).  The input state must carry up-to-date ``loglik``/``logprior``;
    on rejection it is returned unchanged.
    """
    target = _as_target(X)
    tuning = {**DEFAULT_TUNING, **(tuning or {})}
    if math.isnan(s.loglik) or math.isnan(s.logprior):
        target.refresh(s)
    new = s.copy()
    log_h = PROPOSALS[kernel](new, rng, tuning)
    if log_h is None or log_h == -math.inf:
        return s, False
    new.logprior = target.log_prior(new)
    if new.logprior == -math.inf:
        return s, False
    new.loglik = target.log_likelihood(new)
    log_r = (new.loglik - s.loglik) + (new.logprior - s.logprior) + log_h
    if log_r >= 0 or math.log(rng.random()) < log_r:
        return new, True
    return s, False


# ---------------------------------------------------------------------------
# Chains


@dataclass(frozen=True)
class ChainSample:
    generation: int
    loglik: float
    logprior: float
    pi0: float
    alpha: float
    sigma2: float
    tree: str

    def parse_tree(self) -> Tree:
        return parse_newick(self.tree)


@dataclass
class McmcConfig:
    generations: int = 100_000
    sample_every: int = 1000
    seed: int = 1
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    tuning: dict = field(default_factory=lambda: dict(DEFAULT_TUNING))
    hyper: PriorConfig = PriorConfig()
    ascertainment: bool = True
    use_likelihood: bool = True
    debug: bool = False

    def validate(self) -> None:
        if self.sample_every < 1 or self.generations < self.sample_every:
            raise ValueError("need generations >= sample_every >= 1")
        unknown = set(self.weights) - set(KERNELS)
        if unknown:
            raise ValueError(f"unknown proposal kernels: {sorted(unknown)}")
        if any(w < 0 for w in self.weights.values()) or sum(self.weights.values()) <= 0:
            raise ValueError("kernel weights must be non-negative with a positive sum")


def initial_state(labels: Sequence[str], rng: np.random.Generator, hyper: PriorConfig = PriorConfig()) -> McmcState:
    """Random topology, stick-broken ages under a prior-drawn root, parameters from their priors."""
    tree = random_topology(labels, rng)
    stick_breaking_ages(tree, rng.exponential(hyper.root_age_mean), rng)
    pi0 = float(rng.uniform(0.01, 0.99))
    alpha = float(rng.exponential(hyper.alpha_mean))
    sigma2 = float(rng.exponential(hyper.sigma2_mean))
    b = tree.branch_lengths()
    rates = np.ones(tree.n_nodes)
    nonroot = tree.parent >= 0
    shape = b[nonroot] / sigma2
    rates[nonroot] = rng.gamma(shape, 1.0 / shape)
    rates = np.clip(rates, 1e-6, 1e6)
    return McmcState(tree, pi0, max(alpha, 1e-3), max(sigma2, 1e-4), rates,
                     discretize_gamma(max(alpha, 1e-3), hyper.categories))


def _sample(gen: int, s: McmcState) -> ChainSample:
    return ChainSample(gen, s.loglik, s.logprior, s.pi0, s.alpha, s.sigma2, s.tree.to_newick())


def run_chain(X, config: McmcConfig, seed: Optional[int | np.random.SeedSequence] = None,
              labels: Optional[Sequence[str]] = None, acceptance: Optional[dict] = None) -> list[ChainSample]:
    """Run one chain, recording every ``sample_every``-th generation.

    If ``acceptance`` is given it is filled with ``kernel -> [proposed, accepted]``.
    """
    config.validate()
    rng = np.random.default_rng(config.seed if seed is None else seed)
    if X is None or not config.use_likelihood:
        if labels is None:
            labels = X.languages if X is not None else None
        if labels is None:
            raise ValueError("prior-only chains need leaf labels")
        target = Target(None, config.hyper, config.ascertainment)
    else:
        data = X if isinstance(X, PatternData) else PatternData.from_matrix(X)
        labels = data.languages
        target = Target(data, config.hyper, config.ascertainment)
    tuning = {**DEFAULT_TUNING, **config.tuning}
    names = [k for k in KERNELS if config.weights.get(k, 0) > 0]
    cum = np.cumsum([config.weights[k] for k in names])
    cum = list(cum / cum[-1])

    state = target.refresh(initial_state(labels, rng, config.hyper))
    samples = []
    for gen in range(1, config.generations + 1):
        kernel = names[min(bisect.bisect_right(cum, rng.random()), len(names) - 1)]
        state, accepted = mh_step(state, target, kernel, rng, tuning)
        if acceptance is not None:
            tally = acceptance.setdefault(kernel, [0, 0])
            tally[0] += 1
            tally[1] += accepted
        if config.debug and gen % DEBUG_CHECK_EVERY == 0:
            _check_caches(state, target)
        if gen % config.sample_every == 0:
            samples.append(_sample(gen, state))
    return samples


def _check_caches(s: McmcState, target: Target, tol: float = 1e-8) -> None:
    lp = target.log_prior(s)
    ll = target.log_likelihood(s)
    if abs(lp - s.logprior) > tol * max(1.0, abs(lp)) or abs(ll - s.loglik) > tol * max(1.0, abs(ll)):
        raise RuntimeError(
            f"cached values drifted: prior {s.logprior} vs {lp}, likelihood {s.loglik} vs {ll}"
        )


def burnin(samples: Sequence, fraction: float = 0.5) -> list:
    """Drop the first half (rounded down); keep the last ``ceil(n/2)``."""
    n = len(samples)
    return list(samples[int(math.floor(n * fraction)):])


def split_frequencies(trees: Sequence) -> tuple[frozenset, dict]:
    """Leaf set and frequency of every nontrivial unrooted split."""
    return _split_frequencies(t.parse_tree() if isinstance(t, ChainSample) else t for t in trees)


def asdsf(samples1: Sequence, samples2: Sequence, min_freq: float = 0.1) -> float:
    """Average standard deviation of split frequencies between two runs."""
    if not samples1 or not samples2:
        raise ValueError("both sample sets must be non-empty")
    leaves1, f1 = split_frequencies(samples1)
    leaves2, f2 = split_frequencies(samples2)
    if leaves1 != leaves2:
        raise ValueError(f"leaf sets differ: {sorted(leaves1 ^ leaves2)}")
    sds = []
    for sp in set(f1) | set(f2):
        a, b = f1.get(sp, 0.0), f2.get(sp, 0.0)
        if max(a, b) >= min_freq:
            sds.append(abs(a - b) / math.sqrt(2.0))
    return float(np.mean(sds)) if sds else 0.0


@dataclass
class DualRunResult:
    run1: list
    run2: list
    asdsf: float
    converged: bool
    threshold: float = 0.01

    @property
    def post1(self) -> list:
        return burnin(self.run1)

    @property
    def post2(self) -> list:
        return burnin(self.run2)

    @property
    def pooled(self) -> list:
        return self.post1 + self.post2


def chain_seeds(seed: int) -> tuple[int, int]:
    a, b = np.random.SeedSequence(seed).generate_state(2)
    return int(a), int(b)


def dual_run(X, config: McmcConfig, seeds: Optional[tuple[int, int]] = None, min_freq: float = 0.1,
             threshold: float = 0.01, labels=None) -> DualRunResult:
    """Two independently seeded chains, 50% burn-in, ASDSF convergence check."""
    config.validate()
    s1, s2 = seeds if seeds is not None else chain_seeds(config.seed)
    run1 = run_chain(X, config, seed=s1, labels=labels)
    run2 = run_chain(X, config, seed=s2, labels=labels)
    value = asdsf(burnin(run1), burnin(run2), min_freq)
    return DualRunResult(run1, run2, value, value < threshold, threshold)


# ---------------------------------------------------------------------------
# Sample log I/O

LOG_COLUMNS = ("GENERATION", "LNL", "LNPRIOR", "PI0", "ALPHA", "SIGMA2", "TREE_NEWICK")


def _g(x: float) -> str:
    return f"{x:.17g}"


def write_sample_log(samples: Sequence[ChainSample], sink) -> None:
    sink.write("\t".join(LOG_COLUMNS) + "\n")
    for s in samples:
        sink.write("\t".join((str(s.generation), _g(s.loglik), _g(s.logprior), _g(s.pi0), _g(s.alpha),
                              _g(s.sigma2), s.tree)) + "\n")


def read_sample_log(source) -> list[ChainSample]:
    header = source.readline().rstrip("\n").split("\t")
    if tuple(header) != LOG_COLUMNS:
        raise ValueError("not a sample log: unexpected header")
    out = []
    for line in source:
        line = line.rstrip("\n")
        if not line:
            continue
        g, ll, lp, pi0, a, s2, t = line.split("\t")
        out.append(ChainSample(int(g), float(ll), float(lp), float(pi0), float(a), float(s2), t))
    return out
