"""Threshold equations for the switching boundary B and the decision boundary A."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from config import BRACKET_EPS, MONOTONE_CHECK_POINTS, THRESHOLD_TOL
from utils.errors import DomainError, ThresholdSolverError
from utils.model import Parameters

logger = logging.getLogger(__name__)

# Residual above which a returned root is rejected outright.
MAX_RESIDUAL = 1e-8


@dataclass(frozen=True)
class Thresholds:
    """Solved boundaries of the optimal rule and the constant of V."""

    a: float
    b: float
    k: float
    residual_a: float
    residual_b: float
    tol: float = THRESHOLD_TOL
    a_root_unique: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.a < 1.0 and 0.0 < self.b < 1.0):
            raise ThresholdSolverError(f"thresholds outside (0, 1): A={self.a}, B={self.b}")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _check_open_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {value}")


def equation_lhs_B(b: float) -> float:
    """Left-hand side ln((1-b)/(1+b)) + 2b/(1-b^2) of the equation for B."""
    _check_open_unit("b", b)
    return (math.log1p(-b) - math.log1p(b)) + 2.0 * b / (1.0 - b * b)


def equation_rhs_B(params: Parameters) -> float:
    return 2.0 * params.mu ** 2 * params.c2 / params.c1


def equation_lhs_A(params: Parameters, a: float) -> float:
    """
    Left-hand side of the equation for A, in its printed grouping.

    (c1/(2c0) - 1) ln((1-a)/(1+a)) + 2/(1+a) (c1/(2c0) + a/(1-a))
    """
    _check_open_unit("a", a)
    ratio = params.c1 / (2.0 * params.c0)
    return (ratio - 1.0) * (math.log1p(-a) - math.log1p(a)) + 2.0 / (1.0 + a) * (ratio + a / (1.0 - a))


def equation_lhs_A_grid(params: Parameters, a: np.ndarray) -> np.ndarray:
    """Array form of equation_lhs_A, same grouping, no domain check."""
    ratio = params.c1 / (2.0 * params.c0)
    return (ratio - 1.0) * (np.log1p(-a) - np.log1p(a)) + 2.0 / (1.0 + a) * (ratio + a / (1.0 - a))


def equation_rhs_A(params: Parameters, b: float) -> float:
    return params.c1 / (params.c0 * (1.0 - b * b))


def _bracketed_root(func: Callable[[float], float], bracket: Tuple[float, float], tol: float, label: str) -> float:
    lo, hi = bracket
    if not (0.0 < lo < hi < 1.0):
        raise DomainError(f"{label}: bracket must satisfy 0 < lo < hi < 1, got ({lo}, {hi})")
    f_lo, f_hi = func(lo), func(hi)
    if not (f_lo < 0.0 < f_hi):
        raise ThresholdSolverError(
            f"{label}: root not bracketed on ({lo:.3e}, {hi:.17g}); f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g}"
        )
    root, info = brentq(func, lo, hi, xtol=tol, maxiter=500, full_output=True)
    if not info.converged:
        raise ThresholdSolverError(f"{label}: solver did not converge ({info.flag}) after {info.iterations} iterations")
    logger.debug(f"{label}: root {root:.17g} after {info.iterations} iterations")
    return root


def solve_B(params: Parameters, tol: float = THRESHOLD_TOL, bracket: Optional[Tuple[float, float]] = None) -> float:
    """
    Solve ln((1-B)/(1+B)) + 2B/(1-B^2) = 2 mu^2 c2 / c1 for B in (0, 1).

    Args:
        params: Problem instance
        tol: Absolute tolerance on B
        bracket: Optional bracket (lo, hi) containing the root

    Returns:
        The switching threshold B
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    rhs = equation_rhs_B(params)
    bracket = bracket or (BRACKET_EPS, 1.0 - BRACKET_EPS)
    return _bracketed_root(lambda b: equation_lhs_B(b) - rhs, bracket, tol, "B")


def a_root_is_unique(params: Parameters, b: float, points: int = MONOTONE_CHECK_POINTS) -> bool:
    """
    Check on a grid that the equation for A changes sign exactly once.

    The left-hand side is not monotone when c1 > 2 c0 (it first decreases),
    so uniqueness is checked through sign changes rather than monotonicity.
    """
    rhs = equation_rhs_A(params, b)
    grid = np.linspace(BRACKET_EPS, 1.0 - 1e-9, points)
    values = equation_lhs_A_grid(params, grid) - rhs
    changes = np.count_nonzero(np.diff(np.sign(values)) != 0)
    return changes == 1


def solve_A(params: Parameters, b: float, tol: float = THRESHOLD_TOL,
            bracket: Optional[Tuple[float, float]] = None) -> float:
    """
    Solve the equation for the initial-decision threshold A given B.

    Args:
        params: Problem instance
        b: Switching threshold solved for the same instance
        tol: Absolute tolerance on A
        bracket: Optional bracket (lo, hi) containing the root

    Returns:
        The initial-decision threshold A

    Raises:
        ThresholdSolverError: If the root is not bracketed
    """
    _check_open_unit("b", b)
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    rhs = equation_rhs_A(params, b)
    bracket = bracket or (BRACKET_EPS, 1.0 - BRACKET_EPS)
    return _bracketed_root(lambda a: equation_lhs_A(params, a) - rhs, bracket, tol, "A")


def compute_K(params: Parameters, a: float, b: float) -> float:
    """Constant K of V, equal to the optimal risk at the symmetric prior."""
    mu2 = params.mu ** 2
    log_ratio = math.log1p(a) - math.log1p(-a)
    return ((params.c1 * (1.0 - a) / (4.0 * mu2) + params.c0 * a / (2.0 * mu2)) * log_ratio
            + params.c1 * (1.0 - a) / (2.0 * mu2 * (1.0 - b * b)))


def solve_thresholds(params: Parameters, tol: float = THRESHOLD_TOL) -> Thresholds:
    """Solve B, then A, then K for one instance and report the residuals."""
    b = solve_B(params, tol)
    a = solve_A(params, b, tol)
    residual_b = equation_lhs_B(b) - equation_rhs_B(params)
    residual_a = equation_lhs_A(params, a) - equation_rhs_A(params, b)
    for name, residual in (("A", residual_a), ("B", residual_b)):
        if not abs(residual) <= MAX_RESIDUAL:
            raise ThresholdSolverError(f"residual of the equation for {name} is {residual:.3e}")

    unique = a_root_is_unique(params, b)
    if not unique:
        logger.warning(f"Equation for A changes sign more than once for {params}")
    if params.c1 == 2.0 * params.c0 and abs(a - b) > 10.0 * tol:
        raise ThresholdSolverError(f"c1 = 2 c0 but |A - B| = {abs(a - b):.3e}")

    k = compute_K(params, a, b)
    logger.info(f"Thresholds solved: A={a:.12f}, B={b:.12f}, K={k:.12f}")
    return Thresholds(a=a, b=b, k=k, residual_a=residual_a, residual_b=residual_b, tol=tol, a_root_unique=unique)
