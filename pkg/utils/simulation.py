"""Sample paths of the observed process X_t and the posterior mean M_t."""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import CHUNK_STEPS, DT, M_STOP, SCHEME, SEED, T_MAX_STEPS
from utils.errors import DomainError, InvalidInstanceError
from utils.model import Parameters, posterior_mean_array

logger = logging.getLogger(__name__)

SCHEMES = ("exact_posterior", "euler_sde")
MAX_CHUNK_STEPS = 1 << 18


@dataclass(frozen=True)
class SimConfig:
    """
    Discretisation settings for path generation.

    Attributes:
        dt: Time step
        t_max: Hard horizon
        m_stop: Paths end at the first grid time with |M| >= m_stop
        seed: Root seed; path i draws from the substream (seed, i)
        scheme: "exact_posterior" (closed-form M) or "euler_sde" (Euler-Maruyama on the SDE for M)
    """

    dt: float
    t_max: float
    m_stop: float = M_STOP
    seed: int = SEED
    scheme: str = SCHEME

    def __post_init__(self) -> None:
        if not 0.0 < self.dt <= 0.1:
            raise InvalidInstanceError(f"dt must lie in (0, 0.1], got {self.dt}")
        if not 0.9 <= self.m_stop < 1.0:
            raise InvalidInstanceError(f"m_stop must lie in [0.9, 1), got {self.m_stop}")
        if not self.t_max >= 100.0 * self.dt:
            raise InvalidInstanceError(f"t_max must be at least 100*dt = {100.0 * self.dt}, got {self.t_max}")
        if self.scheme not in SCHEMES:
            raise InvalidInstanceError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidInstanceError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @staticmethod
    def default_t_max(params: Parameters, dt: float) -> float:
        return T_MAX_STEPS * dt * math.ceil(1.0 / params.mu ** 2)

    @classmethod
    def for_instance(cls, params: Parameters, dt: float = DT, t_max: Optional[float] = None,
                     **kwargs) -> "SimConfig":
        if t_max is None:
            t_max = cls.default_t_max(params, dt)
        return cls(dt=dt, t_max=t_max, **kwargs)

    @property
    def max_steps(self) -> int:
        return int(math.floor(self.t_max / self.dt + 1e-9))


@dataclass
class PathSample:
    """
    One simulated trajectory on the grid t_i = i*dt.

    `dx` holds the observation increments X_{i+1} - X_i; the innovation
    increments are dx - mu*M*dt.
    """

    theta: int
    dt: float
    x: np.ndarray
    m: np.ndarray
    dx: np.ndarray
    rng_stream_id: int
    scheme: str
    reached_stop: bool = False
    times: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.times = np.arange(self.x.size) * self.dt

    @property
    def n_points(self) -> int:
        return int(self.x.size)

    @property
    def truncated_at(self) -> float:
        return float(self.times[-1])

    @cached_property
    def running_max_abs_m(self) -> np.ndarray:
        return np.maximum.accumulate(np.abs(self.m))

    @cached_property
    def suffix_min_m(self) -> np.ndarray:
        return np.minimum.accumulate(self.m[::-1])[::-1]

    @cached_property
    def suffix_max_m(self) -> np.ndarray:
        return np.maximum.accumulate(self.m[::-1])[::-1]

    @cached_property
    def prefix_sum_m(self) -> np.ndarray:
        """prefix_sum_m[i] = m[0] + ... + m[i-1]."""
        return np.concatenate([[0.0], np.cumsum(self.m)])


def path_generator(seed: int, path_index: int) -> np.random.Generator:
    """Counter-based generator owning the substream (seed, path_index)."""
    if path_index < 0:
        raise DomainError(f"path_index must be non-negative, got {path_index}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(path_index,))))


def euler_belief(params: Parameters, m_start: float, dx: np.ndarray, dt: float) -> np.ndarray:
    """
    Euler-Maruyama for dM = mu (1 - M^2) dB~ with dB~ = dX - mu M dt.

    Returns the beliefs after each increment (length of dx), clipped to [-1, 1].
    """
    mu = params.mu
    out = np.empty(dx.size)
    m = float(m_start)
    for i, step in enumerate(dx.tolist()):
        m += mu * (1.0 - m * m) * (step - mu * m * dt)
        m = min(1.0, max(-1.0, m))
        out[i] = m
    return out


def simulate_path(params: Parameters, cfg: SimConfig, path_index: int,
                  zero_noise: bool = False, stop_at_m: bool = True) -> PathSample:
    """
    Simulate theta, X and M for one path.

    theta is drawn from the prior, X by exact Gaussian increments with mean
    mu*theta*dt and variance dt, M by the closed-form posterior or by Euler on
    its SDE. Increments are generated in growing chunks until |M| >= m_stop
    (when stop_at_m) or t_max.

    Args:
        params: Problem instance
        cfg: Discretisation settings
        path_index: Index of the substream to draw from
        zero_noise: Replace the Brownian increments by zeros (the draws are still consumed)
        stop_at_m: End the path once |M| >= m_stop

    Returns:
        The simulated PathSample
    """
    rng = path_generator(cfg.seed, path_index)
    theta = 1 if rng.random() < params.p else -1
    sqrt_dt = math.sqrt(cfg.dt)
    drift = params.mu * theta * cfg.dt

    m0 = 2.0 * params.p - 1.0
    xs, ms, dxs = [np.zeros(1)], [np.array([m0])], []
    reached = stop_at_m and abs(m0) >= cfg.m_stop

    x_last, m_last = 0.0, m0
    steps_left = cfg.max_steps
    chunk = CHUNK_STEPS
    while steps_left > 0 and not reached:
        size = min(chunk, steps_left)
        noise = rng.standard_normal(size)
        if zero_noise:
            noise[:] = 0.0
        dx = drift + sqrt_dt * noise
        x_chunk = x_last + np.cumsum(dx)
        if cfg.scheme == "exact_posterior":
            m_chunk = posterior_mean_array(params, x_chunk)
        else:
            m_chunk = euler_belief(params, m_last, dx, cfg.dt)

        if stop_at_m:
            hits = np.flatnonzero(np.abs(m_chunk) >= cfg.m_stop)
            if hits.size:
                cut = int(hits[0]) + 1
                x_chunk, m_chunk, dx = x_chunk[:cut], m_chunk[:cut], dx[:cut]
                reached = True

        xs.append(x_chunk)
        ms.append(m_chunk)
        dxs.append(dx)
        x_last, m_last = float(x_chunk[-1]), float(m_chunk[-1])
        steps_left -= size
        chunk = min(2 * chunk, MAX_CHUNK_STEPS)

    path = PathSample(
        theta=theta,
        dt=cfg.dt,
        x=np.concatenate(xs),
        m=np.concatenate(ms),
        dx=np.concatenate(dxs) if dxs else np.zeros(0),
        rng_stream_id=path_index,
        scheme=cfg.scheme,
        reached_stop=reached,
    )
    logger.debug(f"Path {path_index}: theta={theta}, {path.n_points} points, ends at t={path.truncated_at:.3f}")
    return path


def _sup_discrepancy(params: Parameters, x: np.ndarray, dx: np.ndarray, dt: float) -> float:
    exact = posterior_mean_array(params, x)
    euler = euler_belief(params, exact[0], dx, dt)
    if euler.size == 0:
        return 0.0
    return float(np.max(np.abs(exact[1:] - euler)))


def compare_schemes(params: Parameters, cfg: SimConfig, n_paths: int,
                    horizon: Optional[float] = None, progress: bool = False) -> float:
    """
    Largest sup-norm gap between the closed-form M and its Euler approximation.

    Both representations are driven by the same observation increments of each
    path. With a horizon the paths run to that time instead of stopping at m_stop.
    """
    exact_cfg = replace(cfg, scheme="exact_posterior")
    if horizon is not None:
        exact_cfg = replace(exact_cfg, t_max=horizon)
    worst = 0.0
    for i in tqdm(range(n_paths), desc="compare schemes", disable=not progress):
        path = simulate_path(params, exact_cfg, i, stop_at_m=horizon is None)
        worst = max(worst, _sup_discrepancy(params, path.x, path.dx, cfg.dt))
    logger.info(f"Scheme discrepancy at dt={cfg.dt}: {worst:.3e} over {n_paths} paths")
    return worst


def scheme_convergence(params: Parameters, cfg: SimConfig, n_paths: int, factor: int = 4,
                       horizon: float = 20.0, progress: bool = False) -> Tuple[float, float]:
    """
    Scheme discrepancy at dt and at dt/factor on common Brownian paths.

    Each path is drawn once at the fine step; the coarse increments are sums of
    `factor` consecutive fine increments, so both resolutions see the same noise.

    Returns:
        (coarse discrepancy, fine discrepancy)
    """
    if factor < 2:
        raise DomainError(f"factor must be at least 2, got {factor}")
    fine_cfg = replace(cfg, dt=cfg.dt / factor, t_max=horizon, scheme="exact_posterior")
    coarse_worst = fine_worst = 0.0
    for i in tqdm(range(n_paths), desc="scheme convergence", disable=not progress):
        path = simulate_path(params, fine_cfg, i, stop_at_m=False)
        n_coarse = path.dx.size // factor
        dx_fine = path.dx[:n_coarse * factor]
        x_fine = np.concatenate([[0.0], np.cumsum(dx_fine)])
        dx_coarse = dx_fine.reshape(n_coarse, factor).sum(axis=1)
        x_coarse = np.concatenate([[0.0], np.cumsum(dx_coarse)])
        fine_worst = max(fine_worst, _sup_discrepancy(params, x_fine, dx_fine, fine_cfg.dt))
        coarse_worst = max(coarse_worst, _sup_discrepancy(params, x_coarse, dx_coarse, cfg.dt))
    logger.info(f"Scheme discrepancy: {coarse_worst:.3e} at dt={cfg.dt}, {fine_worst:.3e} at dt={fine_cfg.dt}")
    return coarse_worst, fine_worst


def path_table(path: PathSample, decisions: Optional[np.ndarray] = None) -> pd.DataFrame:
    """Table of (t, x, m, d) for one path; d is 0 where no decision is given."""
    if decisions is None:
        decisions = np.zeros(path.n_points, dtype=np.int64)
    return pd.DataFrame({"t": path.times, "x": path.x, "m": path.m, "d": np.asarray(decisions, dtype=np.int64)})
