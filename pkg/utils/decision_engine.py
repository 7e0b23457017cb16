"""Execution of two-threshold decision rules along a simulated belief path."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from utils.errors import DecisionNotReachedError, DomainError, InvalidInstanceError
from utils.simulation import PathSample
from utils.thresholds import Thresholds
from utils.value_functions import ValueContext, rule_switching_value, value_U

logger = logging.getLogger(__name__)

ESTIMATORS = ("raw", "conditioned")


@dataclass(frozen=True)
class ThresholdRule:
    """
    Wait until |M| >= a_init, decide sgn(M), then reverse the decision each
    time M crosses -b_switch (while deciding +1) or +b_switch (while deciding -1).
    """

    a_init: float
    b_switch: float

    def __post_init__(self) -> None:
        for name in ("a_init", "b_switch"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise InvalidInstanceError(f"{name} must lie in (0, 1), got {value}")

    @classmethod
    def optimal(cls, thresholds: Thresholds) -> "ThresholdRule":
        return cls(a_init=thresholds.a, b_switch=thresholds.b)


@dataclass(frozen=True)
class DecisionTrajectory:
    rule: ThresholdRule
    n_points: int
    dt: float
    tau0_index: Optional[int]
    d: int
    switch_indices: Tuple[int, ...] = ()

    @property
    def reached(self) -> bool:
        return self.tau0_index is not None

    @property
    def tau0(self) -> float:
        return math.inf if self.tau0_index is None else self.tau0_index * self.dt

    @property
    def switch_times(self) -> List[float]:
        return [i * self.dt for i in self.switch_indices]

    @property
    def final_decision(self) -> int:
        if not self.reached:
            return 0
        return self.d if len(self.switch_indices) % 2 == 0 else -self.d

    def segments(self, end: int) -> List[Tuple[int, int, int]]:
        """(start, stop, decision) blocks of constant decision, clipped to [tau0, end)."""
        if not self.reached:
            return []
        bounds = [self.tau0_index, *self.switch_indices, max(end, self.tau0_index)]
        blocks, decision = [], self.d
        for start, stop in zip(bounds[:-1], bounds[1:]):
            blocks.append((min(start, end), min(stop, end), decision))
            decision = -decision
        return blocks

    @property
    def d_process(self) -> np.ndarray:
        """Decision in force at every grid point, 0 before tau0."""
        process = np.zeros(self.n_points, dtype=np.int64)
        for start, stop, decision in self.segments(self.n_points):
            process[start:stop] = decision
        return process


@dataclass(frozen=True)
class PenaltyBreakdown:
    delay: float
    wrong_time_raw: float
    wrong_time_conditioned: float
    switch_cost: float
    tail_correction: float
    truncation_bias: float = 0.0
    n_switches: int = 0

    def total(self, estimator: str) -> float:
        if estimator == "raw":
            wrong = self.wrong_time_raw
        elif estimator == "conditioned":
            wrong = self.wrong_time_conditioned
        else:
            raise DomainError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
        return self.delay + wrong + self.switch_cost + self.tail_correction

    def to_dict(self) -> dict:
        return asdict(self)


def _first_crossing(path: PathSample, start: int, level: float, downward: bool) -> Optional[int]:
    """First index >= start with m <= level (downward) or m >= level, or None."""
    m = path.m
    if downward:
        if path.suffix_min_m[start] > level:
            return None
        return start + int(np.argmax(m[start:] <= level))
    if path.suffix_max_m[start] < level:
        return None
    return start + int(np.argmax(m[start:] >= level))


def run_rule(rule: ThresholdRule, path: PathSample) -> DecisionTrajectory:
    """
    Apply a threshold rule to a belief path.

    tau0 is the first grid time with |m| >= a_init and d = sgn(m(tau0)) with
    sgn 0 = 1. Afterwards the decision flips at the first grid time with
    m <= -b_switch while deciding +1, and m >= b_switch while deciding -1.
    Levels that are never reached before truncation leave the corresponding
    times at +infinity.
    """
    tau0_index = int(np.searchsorted(path.running_max_abs_m, rule.a_init, side="left"))
    if tau0_index >= path.n_points:
        return DecisionTrajectory(rule, path.n_points, path.dt, None, 0)

    d = 1 if path.m[tau0_index] >= 0.0 else -1
    switches = []
    current, position = d, tau0_index
    while True:
        if current == 1:
            hit = _first_crossing(path, position, -rule.b_switch, downward=True)
        else:
            hit = _first_crossing(path, position, rule.b_switch, downward=False)
        if hit is None:
            break
        switches.append(hit)
        current, position = -current, hit
    return DecisionTrajectory(rule, path.n_points, path.dt, tau0_index, d, tuple(switches))


def continuation_cost(ctx: ValueContext, rule: ThresholdRule, m_end: float, decision: int) -> float:
    """Expected cost after truncation if the rule kept running from (m_end, decision)."""
    if rule.b_switch == ctx.thresholds.b:
        return float(value_U(ctx, m_end, decision))
    return float(rule_switching_value(ctx.params, rule.b_switch, m_end, decision))


def realized_penalty(traj: DecisionTrajectory, path: PathSample, ctx: ValueContext,
                     use_tail: bool = True) -> PenaltyBreakdown:
    """
    Realised cost of one trajectory on its path.

    The wrong-decision time is integrated with the left-endpoint rule from tau0
    to the end of the path, once with the indicator of D != theta and once
    with (1 - M D)/2, which needs no theta. The tail after truncation is the
    expected cost of continuing the same rule from the final state.

    Raises:
        DecisionNotReachedError: If the path ended before the initial decision
    """
    if not traj.reached:
        raise DecisionNotReachedError(
            f"no initial decision before t={path.truncated_at:.3f} on path {path.rng_stream_id}; increase t_max"
        )
    params = ctx.params
    end = path.n_points - 1
    prefix = path.prefix_sum_m

    raw_steps = 0
    conditioned = 0.0
    for start, stop, decision in traj.segments(end):
        length = stop - start
        if decision != path.theta:
            raw_steps += length
        conditioned += length - decision * (prefix[stop] - prefix[start])
    conditioned = max(conditioned, 0.0)

    continuation = continuation_cost(ctx, traj.rule, float(path.m[-1]), traj.final_decision)
    return PenaltyBreakdown(
        delay=params.c0 * traj.tau0,
        wrong_time_raw=params.c1 * path.dt * raw_steps,
        wrong_time_conditioned=0.5 * params.c1 * path.dt * conditioned,
        switch_cost=params.c2 * len(traj.switch_indices),
        tail_correction=continuation if use_tail else 0.0,
        truncation_bias=0.0 if use_tail else continuation,
        n_switches=len(traj.switch_indices),
    )
