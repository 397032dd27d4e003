"""Bayesian inference of clock trees from binary character matrices."""

from .likelihood import PatternData, log_likelihood
from .mcmc import (
    ChainSample,
    DualRunResult,
    McmcConfig,
    McmcState,
    PriorConfig,
    asdsf,
    burnin,
    dual_run,
    log_prior,
    mh_step,
    num_rooted_topologies,
    run_chain,
)
from .model import GammaRates, SubstModel2, discretize_gamma, transition_matrix
from .simulate import simulate_characters
from .timetree import TimeTree, random_topology

__all__ = [
    "ChainSample", "DualRunResult", "GammaRates", "McmcConfig", "McmcState", "PatternData", "PriorConfig",
    "SubstModel2", "TimeTree", "asdsf", "burnin", "discretize_gamma", "dual_run", "log_likelihood",
    "log_prior", "mh_step", "num_rooted_topologies", "random_topology", "run_chain",
    "simulate_characters", "transition_matrix",
]
