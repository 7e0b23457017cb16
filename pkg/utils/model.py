"""Problem instance, prior-to-belief mapping and the explicit posterior mean."""

import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, Tuple, Union

import numpy as np

from utils.errors import InvalidInstanceError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Parameters:
    """
    One instance of the testing problem.

    Attributes:
        mu: Drift magnitude, the observed process is X_t = mu*theta*t + B_t
        p: Prior probability that theta = +1
        c0: Cost per unit of time spent before the initial decision
        c1: Cost per unit of time spent holding the wrong decision
        c2: Cost per change of the decision
    """

    mu: float
    p: float
    c0: float
    c1: float
    c2: float

    def __post_init__(self) -> None:
        for name in ("mu", "c0", "c1", "c2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidInstanceError(f"{name} must be a positive finite number, got {value}")
        if not math.isfinite(self.p) or not 0.0 <= self.p <= 1.0:
            raise InvalidInstanceError(f"p must lie in [0, 1], got {self.p}")

    @property
    def degenerate(self) -> bool:
        """True when the prior is a point mass and the belief never moves."""
        return self.p in (0.0, 1.0)

    def with_prior(self, x: float) -> "Parameters":
        """Same costs and drift, prior chosen so that the belief starts at x."""
        if not -1.0 <= x <= 1.0:
            raise InvalidInstanceError(f"starting belief must lie in [-1, 1], got {x}")
        return replace(self, p=(x + 1.0) / 2.0)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class Belief:
    """Posterior mean m = E(theta | observations) of the hidden sign."""

    m: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.m <= 1.0:
            raise InvalidInstanceError(f"belief must lie in [-1, 1], got {self.m}")


def initial_belief(params: Parameters) -> Belief:
    """Belief before any observation, m = 2p - 1."""
    return Belief(2.0 * params.p - 1.0)


def posterior_mean_array(params: Parameters, x: ArrayLike) -> np.ndarray:
    """
    Vectorised posterior mean 1 - 2(1-p) / (p*exp(2*mu*x) + 1 - p).

    The formula is evaluated in two branches so that the exponential never
    overflows: for x >= 0 the factor exp(2*mu*x) is pulled out of the fraction,
    for x < 0 it is used directly. Large |x| saturates at +-1.

    Args:
        params: Problem instance
        x: Observation value(s) X_t

    Returns:
        Array of beliefs with the shape of x
    """
    x = np.asarray(x, dtype=np.float64)
    p = params.p
    if p == 1.0:
        return np.ones_like(x)
    if p == 0.0:
        return -np.ones_like(x)

    with np.errstate(under="ignore"):
        e = np.exp(-2.0 * params.mu * np.abs(x))
    upper = 1.0 - 2.0 * (1.0 - p) * e / (p + (1.0 - p) * e)
    lower = -1.0 + 2.0 * p * e / (p * e + (1.0 - p))
    m = np.where(x >= 0.0, upper, lower)
    m = np.where(x == 0.0, 2.0 * p - 1.0, m)
    return np.clip(m, -1.0, 1.0)


def posterior_mean(params: Parameters, x: float) -> Belief:
    """Posterior mean after observing X_t = x."""
    return Belief(float(posterior_mean_array(params, np.array([x]))[0]))


def center_two_drift_problem(mu1: float, mu2: float, path_value: ArrayLike, t: ArrayLike) -> Tuple[float, ArrayLike]:
    """
    Reduce drifts {mu1, mu2} to the symmetric pair {+mu, -mu}.

    Args:
        mu1: Drift under the first hypothesis
        mu2: Drift under the second hypothesis
        path_value: Observed value(s) of the process
        t: Time(s) of the observation

    Returns:
        (mu, centered_value) with mu = |mu1 - mu2| / 2 and
        centered_value = path_value - (mu1 + mu2) * t / 2

    Raises:
        InvalidInstanceError: If mu1 == mu2
    """
    if mu1 == mu2:
        raise InvalidInstanceError(f"hypotheses are indistinguishable: mu1 = mu2 = {mu1}")
    mu = abs(mu1 - mu2) / 2.0
    centered = np.asarray(path_value, dtype=np.float64) - 0.5 * (mu1 + mu2) * np.asarray(t, dtype=np.float64)
    if centered.ndim == 0:
        centered = float(centered)
    return mu, centered
