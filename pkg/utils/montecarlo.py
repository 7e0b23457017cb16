"""
Monte Carlo estimation of the Bayesian risk of threshold rules.

Every path index owns its random substream, so all rules evaluated in one run
see the same paths (common random numbers), and the result does not depend on
how the paths are spread over worker processes: chunks are reassembled in path
order and reduced with math.fsum.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import ESTIMATOR, PATHS_PER_TASK, SWEEP_SIGMAS, UNRELIABLE_FRACTION
from utils.decision_engine import ESTIMATORS, ThresholdRule, realized_penalty, run_rule
from utils.errors import DomainError
from utils.model import Parameters
from utils.simulation import SimConfig, simulate_path
from utils.thresholds import Thresholds
from utils.value_functions import ValueContext, rule_risk, value_V

logger = logging.getLogger(__name__)

MIN_PATHS = 100


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    n_paths: int
    estimator: str
    tail_corrected: bool
    dt: float
    seed: int
    a_init: float
    b_switch: float
    n_unreached: int = 0
    unreliable: bool = False
    truncation_bias: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepCell:
    da: float
    db: float
    a_init: float
    b_switch: float
    skipped: bool
    estimate: Optional[RiskEstimate] = None
    diff_mean: float = 0.0
    diff_stderr: float = 0.0
    closed_form_risk: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepResult:
    offsets: Tuple[float, ...]
    constrained: bool
    cells: Tuple[SweepCell, ...]
    n_paths: int
    seed: int
    dt: float

    @property
    def baseline(self) -> SweepCell:
        return next(c for c in self.cells if c.da == 0.0 and c.db == 0.0)

    @property
    def valid_cells(self) -> List[SweepCell]:
        return [c for c in self.cells if not c.skipped]

    def baseline_is_minimal(self, sigmas: float = SWEEP_SIGMAS) -> bool:
        """Baseline mean <= every other mean + sigmas * paired-difference stderr."""
        base = self.baseline.estimate.mean
        return all(base <= c.estimate.mean + sigmas * c.diff_stderr for c in self.valid_cells)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for c in self.cells:
            rows.append({
                "da": c.da, "db": c.db, "a_init": c.a_init, "b_switch": c.b_switch, "skipped": c.skipped,
                "mean": c.estimate.mean if c.estimate else np.nan,
                "stderr": c.estimate.stderr if c.estimate else np.nan,
                "diff_mean": c.diff_mean, "diff_stderr": c.diff_stderr,
                "closed_form_risk": c.closed_form_risk if c.closed_form_risk is not None else np.nan,
            })
        return pd.DataFrame(rows)

    def to_matrix(self) -> pd.DataFrame:
        """Mean risk per cell with db along rows and da along columns."""
        frame = self.to_frame()
        matrix = frame.pivot(index="db", columns="da", values="mean")
        matrix.columns = [f"da={v:g}" for v in matrix.columns]
        return matrix.reset_index()

    def to_dict(self) -> dict:
        return {
            "offsets": list(self.offsets),
            "constrained": self.constrained,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "dt": self.dt,
            "baseline_minimal": self.baseline_is_minimal(),
            "cells": [c.to_dict() for c in self.cells],
        }


def _evaluate_chunk(params: Parameters, thresholds: Thresholds, cfg: SimConfig, rules: Sequence[ThresholdRule],
                    use_tail: bool, path_indices: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Totals for a block of paths.

    Returns:
        totals of shape (paths, rules, 2) holding the raw and conditioned totals
        (NaN where the initial decision was not reached) and truncation biases
        of shape (paths, rules)
    """
    ctx = ValueContext(params, thresholds)
    totals = np.full((len(path_indices), len(rules), 2), np.nan)
    biases = np.zeros((len(path_indices), len(rules)))
    for row, index in enumerate(path_indices):
        path = simulate_path(params, cfg, index)
        for col, rule in enumerate(rules):
            traj = run_rule(rule, path)
            if not traj.reached:
                continue
            penalty = realized_penalty(traj, path, ctx, use_tail)
            totals[row, col, 0] = penalty.total("raw")
            totals[row, col, 1] = penalty.total("conditioned")
            biases[row, col] = penalty.truncation_bias
    return totals, biases


def collect_totals(ctx: ValueContext, cfg: SimConfig, rules: Sequence[ThresholdRule], n_paths: int,
                   use_tail: bool = True, workers: int = 1, progress: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Run every rule on paths 0..n_paths-1; arrays are ordered by path index."""
    if n_paths < MIN_PATHS:
        raise DomainError(f"n_paths must be at least {MIN_PATHS}, got {n_paths}")
    blocks = [range(start, min(start + PATHS_PER_TASK, n_paths)) for start in range(0, n_paths, PATHS_PER_TASK)]
    task = partial(_evaluate_chunk, ctx.params, ctx.thresholds, cfg, tuple(rules), use_tail)
    logger.info(f"Simulating {n_paths} paths for {len(rules)} rule(s) with {workers} worker(s)")

    if workers <= 1:
        results = [task(block) for block in tqdm(blocks, desc="paths", unit="block", disable=not progress)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(task, blocks), total=len(blocks), desc="paths", unit="block",
                                disable=not progress))
    totals = np.concatenate([r[0] for r in results])
    biases = np.concatenate([r[1] for r in results])
    return totals, biases


def _mean_stderr(values: np.ndarray) -> Tuple[float, float]:
    n = values.size
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(values.tolist()) / n
    if n < 2:
        return mean, math.nan
    variance = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(variance / n)


def summarize(totals: np.ndarray, biases: np.ndarray, rule: ThresholdRule, cfg: SimConfig,
              estimator: str, use_tail: bool) -> RiskEstimate:
    """Reduce per-path totals of one rule to a RiskEstimate."""
    if estimator not in ESTIMATORS:
        raise DomainError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    column = totals[:, 1 if estimator == "conditioned" else 0]
    reached = ~np.isnan(column)
    n_unreached = int(np.count_nonzero(~reached))
    mean, stderr = _mean_stderr(column[reached])
    bias, _ = _mean_stderr(biases[reached])
    unreliable = n_unreached > UNRELIABLE_FRACTION * column.size or not math.isfinite(mean)
    if unreliable:
        logger.warning(f"{n_unreached} of {column.size} paths never reached the initial decision; "
                       f"estimate flagged unreliable")
    return RiskEstimate(
        mean=mean, stderr=stderr, n_paths=int(column.size), estimator=estimator, tail_corrected=use_tail,
        dt=cfg.dt, seed=cfg.seed, a_init=rule.a_init, b_switch=rule.b_switch,
        n_unreached=n_unreached, unreliable=unreliable, truncation_bias=bias,
    )


def estimate_risk(params: Parameters, rule: ThresholdRule, cfg: SimConfig, n_paths: int,
                  estimator: str = ESTIMATOR, use_tail: bool = True, workers: int = 1,
                  ctx: Optional[ValueContext] = None, progress: bool = True) -> RiskEstimate:
    """
    Monte Carlo estimate of the Bayesian risk of a threshold rule.

    Args:
        params: Problem instance
        rule: Rule to evaluate
        cfg: Discretisation settings, the seed fixes the paths
        n_paths: Number of paths (at least 100)
        estimator: "conditioned" or "raw"
        use_tail: Add the expected cost after truncation
        workers: Number of worker processes
        ctx: Solved instance, computed from params when omitted
        progress: Show a progress bar

    Returns:
        RiskEstimate, flagged unreliable when more than 0.1% of the paths end
        before the initial decision
    """
    ctx = ctx or ValueContext.from_params(params)
    totals, biases = collect_totals(ctx, cfg, [rule], n_paths, use_tail, workers, progress)
    estimate = summarize(totals[:, 0, :], biases[:, 0], rule, cfg, estimator, use_tail)
    logger.info(f"Risk of (A'={rule.a_init:.6f}, B'={rule.b_switch:.6f}): "
                f"{estimate.mean:.6f} +- {estimate.stderr:.6f} ({estimator})")
    return estimate


def compare_estimators(params: Parameters, rule: ThresholdRule, cfg: SimConfig, n_paths: int,
                       use_tail: bool = True, workers: int = 1, ctx: Optional[ValueContext] = None,
                       progress: bool = True) -> Tuple[RiskEstimate, RiskEstimate]:
    """Raw and conditioned estimates computed on the same paths."""
    ctx = ctx or ValueContext.from_params(params)
    totals, biases = collect_totals(ctx, cfg, [rule], n_paths, use_tail, workers, progress)
    raw = summarize(totals[:, 0, :], biases[:, 0], rule, cfg, "raw", use_tail)
    conditioned = summarize(totals[:, 0, :], biases[:, 0], rule, cfg, "conditioned", use_tail)
    return raw, conditioned


def _sweep_offsets(offsets: Sequence[float], constrained: bool) -> List[Tuple[float, float]]:
    if constrained:
        return [(o, o) for o in offsets]
    return list(itertools.product(offsets, offsets))


def optimality_sweep(params: Parameters, cfg: SimConfig, n_paths: int, offsets: Sequence[float],
                     estimator: str = ESTIMATOR, use_tail: bool = True, workers: int = 1,
                     constrained: bool = False, ctx: Optional[ValueContext] = None,
                     progress: bool = True) -> SweepResult:
    """
    Risk of the rules (A + da, B + db) around the optimal pair.

    All cells are evaluated on the same paths, and each cell reports the mean
    and standard error of its paired difference to the baseline (0, 0) cell.
    Cells whose thresholds leave (0, 1) are kept as skipped.

    Args:
        offsets: Offsets applied to both axes; must contain 0
        constrained: Only sweep the diagonal da = db
    """
    if 0.0 not in offsets:
        raise DomainError(f"offsets must contain 0, got {list(offsets)}")
    ctx = ctx or ValueContext.from_params(params)
    a, b = ctx.thresholds.a, ctx.thresholds.b
    start = 2.0 * params.p - 1.0

    grid = _sweep_offsets(offsets, constrained)
    valid, rules = [], []
    for da, db in grid:
        ok = 0.0 < a + da < 1.0 and 0.0 < b + db < 1.0
        valid.append(ok)
        if ok:
            rules.append(ThresholdRule(a + da, b + db))
        else:
            logger.warning(f"Skipping sweep cell ({da:+g}, {db:+g}): thresholds leave (0, 1)")

    totals, biases = collect_totals(ctx, cfg, rules, n_paths, use_tail, workers, progress)
    column = 1 if estimator == "conditioned" else 0
    valid_grid = [cell for cell, ok in zip(grid, valid) if ok]
    base_col = valid_grid.index((0.0, 0.0))
    base = totals[:, base_col, column]

    cells, col = [], 0
    for (da, db), ok in zip(grid, valid):
        if not ok:
            cells.append(SweepCell(da, db, a + da, b + db, skipped=True))
            continue
        rule = rules[col]
        estimate = summarize(totals[:, col, :], biases[:, col], rule, cfg, estimator, use_tail)
        diff = totals[:, col, column] - base
        diff_mean, diff_stderr = _mean_stderr(diff[~np.isnan(diff)])
        if col == base_col:
            diff_mean, diff_stderr = 0.0, 0.0
        cells.append(SweepCell(
            da, db, rule.a_init, rule.b_switch, skipped=False, estimate=estimate,
            diff_mean=diff_mean, diff_stderr=diff_stderr,
            closed_form_risk=float(rule_risk(params, rule.a_init, rule.b_switch, start)),
        ))
        col += 1

    result = SweepResult(tuple(offsets), constrained, tuple(cells), n_paths, cfg.seed, cfg.dt)
    logger.info(f"Sweep over {len(grid)} cells done; baseline minimal: {result.baseline_is_minimal()}")
    return result


def convergence_study(params: Parameters, cfg: SimConfig,
                      schedule: Sequence[Tuple[float, int]] = ((4e-3, 25_000), (1e-3, 100_000)),
                      workers: int = 1, progress: bool = True) -> List[Dict[str, float]]:
    """
    Conditioned, tail-corrected risk of the optimal rule along a (dt, n_paths)
    schedule, with the gap to the closed-form V(2p - 1) at each stage.
    """
    ctx = ValueContext.from_params(params)
    rule = ThresholdRule.optimal(ctx.thresholds)
    target = float(value_V(ctx, 2.0 * params.p - 1.0))
    stages = []
    for dt, n_paths in schedule:
        stage_cfg = replace(cfg, dt=dt)
        estimate = estimate_risk(params, rule, stage_cfg, n_paths, "conditioned", True, workers, ctx, progress)
        stages.append({"dt": dt, "n_paths": n_paths, "mean": estimate.mean, "stderr": estimate.stderr,
                       "closed_form": target, "gap": abs(estimate.mean - target)})
        logger.info(f"dt={dt}: gap to V = {stages[-1]['gap']:.6f} (stderr {estimate.stderr:.6f})")
    return stages
