"""
Closed-form value functions U(x, y) and V(x) of the switching and stopping
problems, their derivatives, the generator of the belief diffusion and a
numerical check of the variational properties the functions must satisfy.

U(x, y) is the expected future cost when the belief is x and the current
decision is y; V(x) is the optimal risk before the initial decision. The same
formulas with arbitrary thresholds (A', B') and only value matching give the
cost of any threshold rule, which is what `rule_switching_value` and
`rule_risk` evaluate.
"""

import logging
from dataclasses import asdict, dataclass
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from config import KINK_WINDOW, LIMIT_EPS, PROPERTY_TOL, THRESHOLD_TOL
from utils.errors import DomainError, KinkPointError
from utils.model import ArrayLike, Parameters
from utils.thresholds import Thresholds, solve_thresholds

logger = logging.getLogger(__name__)

PROPERTY_IDS = ("U1", "U2", "U3", "U4", "V1", "V2", "V3", "V4",
                "fitU_cont", "fitU_smooth", "fitV_cont", "fitV_smooth")


@dataclass(frozen=True)
class ValueContext:
    """Problem instance bundled with its solved thresholds."""

    params: Parameters
    thresholds: Thresholds

    @classmethod
    def from_params(cls, params: Parameters, tol: float = THRESHOLD_TOL) -> "ValueContext":
        return cls(params=params, thresholds=solve_thresholds(params, tol))

    @property
    def kappa(self) -> float:
        """Coefficient of (1 - x) in the continuation branch of U(x, 1)."""
        b = self.thresholds.b
        return self.params.c1 / (2.0 * self.params.mu ** 2 * (1.0 - b * b))


@dataclass(frozen=True)
class PropertyReport:
    property_id: str
    grid_size: int
    max_violation: float
    passed: bool
    tolerance: float
    observed_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _as_output(values: np.ndarray, x: ArrayLike) -> Union[float, np.ndarray]:
    return float(values) if np.ndim(x) == 0 else values


def _check_closed(x: np.ndarray) -> None:
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > 1.0):
        raise DomainError("x must lie in [-1, 1]")


def _check_open(x: np.ndarray) -> None:
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) >= 1.0):
        raise DomainError("x must lie in (-1, 1)")


def _check_sign(y: int) -> None:
    if y not in (1, -1):
        raise DomainError(f"y must be +1 or -1, got {y}")


def _log_ratio(x: np.ndarray) -> np.ndarray:
    """ln((1 + x) / (1 - x))."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log1p(x) - np.log1p(-x)


def _f(params: Parameters, x: np.ndarray) -> np.ndarray:
    """c1 (1-x) / (4 mu^2) ln((1+x)/(1-x)), with its limit 0 at x = 1."""
    with np.errstate(invalid="ignore"):
        product = (1.0 - x) * _log_ratio(x)
    product = np.where(1.0 - x < LIMIT_EPS, 0.0, product)
    return params.c1 / (4.0 * params.mu ** 2) * product


def _f_prime(params: Parameters, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return params.c1 / (4.0 * params.mu ** 2) * (-_log_ratio(x) + 2.0 / (1.0 + x))


def _f_second(params: Parameters, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return params.c1 / (4.0 * params.mu ** 2) * (-2.0 / (1.0 - x * x) - 2.0 / (1.0 + x) ** 2)


def _g(params: Parameters, x: np.ndarray) -> np.ndarray:
    """c0 x / (2 mu^2) ln((1-x)/(1+x)), finite on (-1, 1)."""
    with np.errstate(invalid="ignore"):
        product = -x * _log_ratio(x)
    return params.c0 / (2.0 * params.mu ** 2) * product


def _g_prime(params: Parameters, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return -params.c0 / (2.0 * params.mu ** 2) * (_log_ratio(x) + 2.0 * x / (1.0 - x * x))


def _g_second(params: Parameters, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return -2.0 * params.c0 / (params.mu ** 2 * (1.0 - x * x) ** 2)


# Continuation branch of U(., 1) on (-B, 1]: f(x) + kappa (1 - x).

def _u1(params: Parameters, kappa: float, x: np.ndarray) -> np.ndarray:
    return _f(params, x) + kappa * (1.0 - x)


def _u1_prime(params: Parameters, kappa: float, x: np.ndarray) -> np.ndarray:
    return _f_prime(params, x) - kappa


def _u(params: Parameters, b: float, kappa: float, x: np.ndarray, y: int) -> np.ndarray:
    z = y * x  # U(x, -1) = U(-x, 1)
    with np.errstate(invalid="ignore"):
        return np.where(z > -b, _u1(params, kappa, z), _u1(params, kappa, -z) + params.c2)


def _u_prime(params: Parameters, b: float, kappa: float, x: np.ndarray, y: int) -> np.ndarray:
    z = y * x
    with np.errstate(invalid="ignore"):
        slope = np.where(z > -b, _u1_prime(params, kappa, z), -_u1_prime(params, kappa, -z))
    return y * slope


def _u_second(params: Parameters, b: float, x: np.ndarray, y: int) -> np.ndarray:
    z = y * x
    with np.errstate(invalid="ignore"):
        return np.where(z > -b, _f_second(params, z), _f_second(params, -z))


def _v(params: Parameters, a: float, kappa: float, k: float, x: np.ndarray) -> np.ndarray:
    inside = np.abs(x) < a
    with np.errstate(invalid="ignore"):
        return np.where(inside, _g(params, x) + k, _u1(params, kappa, np.abs(x)))


def _v_prime(params: Parameters, a: float, kappa: float, x: np.ndarray) -> np.ndarray:
    inside = np.abs(x) < a
    with np.errstate(invalid="ignore"):
        return np.where(inside, _g_prime(params, x), np.sign(x) * _u1_prime(params, kappa, np.abs(x)))


def _v_second(params: Parameters, a: float, x: np.ndarray) -> np.ndarray:
    inside = np.abs(x) < a
    with np.errstate(invalid="ignore"):
        return np.where(inside, _g_second(params, x), _f_second(params, np.abs(x)))


def value_U(ctx: ValueContext, x: ArrayLike, y: int) -> Union[float, np.ndarray]:
    """
    Value U(x, y) of the switching problem.

    Args:
        ctx: Instance with solved thresholds
        x: Belief value(s) in [-1, 1]
        y: Current decision, +1 or -1

    Returns:
        U(x, y), scalar for scalar x

    Raises:
        DomainError: If |x| > 1 or y is not +-1
    """
    _check_sign(y)
    xs = np.asarray(x, dtype=np.float64)
    _check_closed(xs)
    return _as_output(_u(ctx.params, ctx.thresholds.b, ctx.kappa, xs, y), x)


def value_V(ctx: ValueContext, x: ArrayLike) -> Union[float, np.ndarray]:
    """Optimal risk V(x) when the belief is x and no decision has been made yet."""
    xs = np.asarray(x, dtype=np.float64)
    _check_closed(xs)
    th = ctx.thresholds
    return _as_output(_v(ctx.params, th.a, ctx.kappa, th.k, xs), x)


def deriv_U(ctx: ValueContext, x: ArrayLike, y: int) -> Union[float, np.ndarray]:
    """First derivative of U(., y) at x in (-1, 1)."""
    _check_sign(y)
    xs = np.asarray(x, dtype=np.float64)
    _check_open(xs)
    return _as_output(_u_prime(ctx.params, ctx.thresholds.b, ctx.kappa, xs, y), x)


def deriv_V(ctx: ValueContext, x: ArrayLike) -> Union[float, np.ndarray]:
    """First derivative of V at x in (-1, 1)."""
    xs = np.asarray(x, dtype=np.float64)
    _check_open(xs)
    return _as_output(_v_prime(ctx.params, ctx.thresholds.a, ctx.kappa, xs), x)


def generator_apply(ctx: ValueContext, func: str, x: ArrayLike, y: int = 1) -> Union[float, np.ndarray]:
    """
    Apply L f(x) = mu^2/2 (1-x^2)^2 f''(x) to U(., y) or V.

    Args:
        ctx: Instance with solved thresholds
        func: "U" or "V"
        x: Point(s) in (-1, 1), none of them at a kink
        y: Decision for func = "U"

    Raises:
        KinkPointError: If x is exactly -y*B (for U) or +-A (for V)
    """
    xs = np.asarray(x, dtype=np.float64)
    _check_open(xs)
    th = ctx.thresholds
    if func == "U":
        _check_sign(y)
        if np.any(xs == -y * th.b):
            raise KinkPointError(f"U(., {y}) has no second derivative at x = {-y * th.b}")
        second = _u_second(ctx.params, th.b, xs, y)
    elif func == "V":
        if np.any(np.abs(xs) == th.a):
            raise KinkPointError(f"V has no second derivative at x = +-{th.a}")
        second = _v_second(ctx.params, th.a, xs)
    else:
        raise DomainError(f"func must be 'U' or 'V', got {func!r}")
    return _as_output(0.5 * ctx.params.mu ** 2 * (1.0 - xs * xs) ** 2 * second, x)


def switching_constant(params: Parameters, b_switch: float) -> float:
    """Coefficient kappa of U(x, 1) = f(x) + kappa (1 - x) for switching threshold b_switch."""
    if not 0.0 < b_switch < 1.0:
        raise DomainError(f"b_switch must lie in (0, 1), got {b_switch}")
    ends = _f(params, np.array([b_switch, -b_switch]))
    return float((ends[0] - ends[1] + params.c2) / (2.0 * b_switch))


def rule_switching_value(params: Parameters, b_switch: float, x: ArrayLike, y: int) -> Union[float, np.ndarray]:
    """
    Expected future cost of switching at +-b_switch from belief x and decision y.

    Coincides with U when b_switch is the optimal B.
    """
    _check_sign(y)
    xs = np.asarray(x, dtype=np.float64)
    _check_closed(xs)
    kappa = switching_constant(params, b_switch)
    return _as_output(_u(params, b_switch, kappa, xs, y), x)


def rule_risk(params: Parameters, a_init: float, b_switch: float, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Bayesian risk of the threshold rule (a_init, b_switch) started from belief x.

    Coincides with V when (a_init, b_switch) = (A, B).
    """
    if not 0.0 < a_init < 1.0:
        raise DomainError(f"a_init must lie in (0, 1), got {a_init}")
    xs = np.asarray(x, dtype=np.float64)
    _check_closed(xs)
    kappa = switching_constant(params, b_switch)
    edge = np.array([a_init])
    k = float(_u1(params, kappa, edge)[0] - _g(params, edge)[0])
    return _as_output(_v(params, a_init, kappa, k, xs), x)


def value_table(ctx: ValueContext, x_min: float, x_max: float, n: int) -> pd.DataFrame:
    """Table of (x, V(x), U(x, 1), U(x, -1)) on an even grid."""
    if n < 2 or not -1.0 <= x_min < x_max <= 1.0:
        raise DomainError(f"grid needs -1 <= x_min < x_max <= 1 and n >= 2, got ({x_min}, {x_max}, {n})")
    xs = np.linspace(x_min, x_max, n)
    return pd.DataFrame({
        "x": xs,
        "V": value_V(ctx, xs),
        "U_plus": value_U(ctx, xs, 1),
        "U_minus": value_U(ctx, xs, -1),
    })


def _report(property_id: str, grid_size: int, violation: float, tol: float,
            bound: Optional[float] = None) -> PropertyReport:
    violation = float(violation)
    passed = bool(np.isfinite(violation) and violation <= tol)
    if not passed:
        logger.warning(f"Property {property_id} failed: violation {violation:.3e} > {tol:.1e}")
    return PropertyReport(property_id, grid_size, violation, passed, tol, bound)


def _bound_report(property_id: str, grid_size: int, values: np.ndarray, tol: float) -> PropertyReport:
    bound = float(np.max(np.abs(values)))
    violation = 0.0 if np.isfinite(bound) else float("inf")
    return _report(property_id, grid_size, violation, tol, bound)


def verify_properties(ctx: ValueContext, grid_size: int, tol: float = PROPERTY_TOL) -> List[PropertyReport]:
    """
    Check the properties U1-U4, V1-V4 and the four fit conditions on a grid.

    Equalities are checked through their residuals, inequalities through their
    slack in the complementary regions. Points within KINK_WINDOW of a kink are
    left out of the grid; the kinks themselves are checked through the one-sided
    branch formulas.

    Args:
        ctx: Instance with solved thresholds
        grid_size: Number of interior grid points (at least 100)
        tol: Tolerance applied to every residual

    Returns:
        One report per property, in the order of PROPERTY_IDS
    """
    if grid_size < 100:
        raise DomainError(f"grid_size must be at least 100, got {grid_size}")
    params, th, kappa = ctx.params, ctx.thresholds, ctx.kappa
    a, b, c0, c1, c2 = th.a, th.b, params.c0, params.c1, params.c2

    grid = np.linspace(-1.0, 1.0, grid_size + 2)[1:-1]
    edge = 1.0 - np.logspace(-1, -12, 12)
    boundary_grid = np.concatenate([grid, edge, -edge])

    def away_from(points: np.ndarray, kinks) -> np.ndarray:
        mask = np.ones_like(points, dtype=bool)
        for kink in kinks:
            mask &= np.abs(points - kink) > KINK_WINDOW
        return points[mask]

    pair = np.array([b, -b])
    reports = []

    # U1: value and slope of the two branches agree at the kink x = -yB
    u_left = _u1(params, kappa, pair[::-1])[1] + c2   # U(B, 1) + c2, reflected branch at -B
    u_right = _u1(params, kappa, pair)[1]             # continuation branch at -B
    du_left = -_u1_prime(params, kappa, pair)[0]
    du_right = _u1_prime(params, kappa, pair)[1]
    reports.append(_report("U1", grid_size, max(abs(u_left - u_right), abs(du_left - du_right)), tol))

    # U2: (1 - x^2) U'(x, y) bounded
    slopes = np.concatenate([(1.0 - boundary_grid ** 2) * _u_prime(params, b, kappa, boundary_grid, y)
                             for y in (1, -1)])
    reports.append(_bound_report("U2", grid_size, slopes, tol))

    # U3: LU = -c1 (1 - xy)/2 for xy > -B, LU >= -c1 (1 - xy)/2 for xy < -B
    violation = 0.0
    for y in (1, -1):
        xs = away_from(grid, [-y * b])
        gap = generator_apply(ctx, "U", xs, y) + c1 * (1.0 - xs * y) / 2.0
        cont = xs * y > -b
        violation = max(violation, np.max(np.abs(gap[cont]), initial=0.0), np.max(-gap[~cont], initial=0.0))
    reports.append(_report("U3", grid_size, violation, tol))

    # U4: Delta U = -c2 for xy >= B, Delta U >= -c2 for xy < B
    violation = 0.0
    for y in (1, -1):
        delta = _u(params, b, kappa, grid, y) - _u(params, b, kappa, grid, -y) + c2
        switch = grid * y >= b
        violation = max(violation, np.max(np.abs(delta[switch]), initial=0.0), np.max(-delta[~switch], initial=0.0))
    reports.append(_report("U4", grid_size, violation, tol))

    # V1: branches agree in value and slope at +-A
    edge_a = np.array([a])
    v_inner = _g(params, edge_a)[0] + th.k
    v_outer = _u1(params, kappa, edge_a)[0]
    dv_inner = _g_prime(params, edge_a)[0]
    dv_outer = _u1_prime(params, kappa, edge_a)[0]
    reports.append(_report("V1", grid_size, max(abs(v_inner - v_outer), abs(dv_inner - dv_outer)), tol))

    # V2: (1 - x^2) V'(x) bounded
    reports.append(_bound_report("V2", grid_size,
                                 (1.0 - boundary_grid ** 2) * _v_prime(params, a, kappa, boundary_grid), tol))

    # V3: LV = -c0 for |x| < A, LV >= -c0 for |x| > A
    xs = away_from(grid, [a, -a])
    gap = generator_apply(ctx, "V", xs) + c0
    inside = np.abs(xs) < a
    violation = max(np.max(np.abs(gap[inside]), initial=0.0), np.max(-gap[~inside], initial=0.0))
    reports.append(_report("V3", grid_size, violation, tol))

    # V4: V = U(|x|, 1) for |x| >= A, V <= U(|x|, 1) for |x| < A
    gap = _u(params, b, kappa, np.abs(grid), 1) - _v(params, a, kappa, th.k, grid)
    inside = np.abs(grid) < a
    violation = max(np.max(np.abs(gap[~inside]), initial=0.0), np.max(-gap[inside], initial=0.0))
    reports.append(_report("V4", grid_size, violation, tol))

    # Fit conditions at the free boundaries
    reports.append(_report("fitU_cont", grid_size, abs(u_right - _u1(params, kappa, pair)[0] - c2), tol))
    reports.append(_report("fitU_smooth", grid_size, abs(du_right - du_left), tol))
    reports.append(_report("fitV_cont", grid_size, abs(v_inner - v_outer), tol))
    reports.append(_report("fitV_smooth", grid_size, abs(dv_inner - dv_outer), tol))

    failed = [r.property_id for r in reports if not r.passed]
    logger.info(f"Verified {len(reports)} properties on {grid_size} points, failed: {failed or 'none'}")
    return reports
