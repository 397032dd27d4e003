"""Two-state reversible substitution model and discrete Gamma rates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats


@dataclass(frozen=True)
class SubstModel2:
    """Binary GTR model with stationary frequencies (pi0, 1 - pi0).

    The rate scale ``mu = 1 / (2 pi0 pi1)`` makes the expected number of
    substitutions per unit branch length equal to one.
    """

    pi0: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.pi0 < 1.0:
            raise ValueError("pi0 must lie in (0, 1)")

    @property
    def pi1(self) -> float:
        return 1.0 - self.pi0

    @property
    def mu(self) -> float:
        return 1.0 / (2.0 * self.pi0 * self.pi1)

    @property
    def freqs(self) -> np.ndarray:
        return np.array([self.pi0, self.pi1])


def transition_matrix(t_eff: float, model: SubstModel2) -> np.ndarray:
    if t_eff < 0:
        raise ValueError("branch length must be non-negative")
    decay = -math.expm1(-model.mu * t_eff)
    p01 = model.pi1 * decay
    p10 = model.pi0 * decay
    return np.array([[1.0 - p01, p01], [p10, 1.0 - p10]])


def discretize_gamma(alpha: float, k: int = 4) -> np.ndarray:
    """Mean rates of ``k`` equal-probability categories of Gamma(alpha, alpha).

    Category means come from the regularised incomplete gamma function of
    shape ``alpha + 1`` evaluated at the category boundaries; the result is
    rescaled to mean exactly one.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if k < 1:
        raise ValueError("need at least one category")
    if k == 1:
        return np.ones(1)
    cuts = stats.gamma.ppf(np.arange(1, k) / k, a=alpha, scale=1.0 / alpha)
    upper = special.gammainc(alpha + 1.0, alpha * cuts)
    cdf = np.concatenate(([0.0], upper, [1.0]))
    rates = k * np.diff(cdf)
    rates = np.maximum(rates, 0.0)
    rates = np.sort(rates)
    return rates / rates.mean()


@dataclass(frozen=True)
class GammaRates:
    alpha: float = 1.0
    k: int = 4

    @property
    def rates(self) -> np.ndarray:
        return discretize_gamma(self.alpha, self.k)


def igr_log_density(rates: np.ndarray, lengths: np.ndarray, sigma2: float) -> float:
    """Sum of log Gamma(r; shape b/sigma2, rate b/sigma2) over branches."""
    shape = lengths / sigma2
    return float(np.sum(shape * np.log(shape) - special.gammaln(shape) + (shape - 1.0) * np.log(rates) - shape * rates))
