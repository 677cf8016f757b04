"""Online additive smoothers built on an adaptive auxiliary particle filter.

Four statistic-update rules share one APF core:

* ``poorman``   -- trace the genealogy: ``tau^i <- tau^{I^i} + h~``.
* ``ffbsm``     -- forward-only FFBSm, Rao-Blackwellised over all ``N`` parents (O(N^2)).
* ``paris``     -- PaRIS, ``K`` rejection-sampled backward draws per particle.
* ``adasmooth`` -- poor man's update, except at backward-sampling times where
  the forward term is averaged with ``M`` backward draws.

The AdaSmooth backward-sampling times are chosen by monitoring how many
distinct ancestors (Enoch indices) survive since the last backward step.
Enoch indices here are 0-based.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .functional import AdditiveFunctional
from .model import PathModel
from .sampling import (
    AllWeightsZero,
    backward_indices_rejection,
    backward_probabilities,
    ess,
    log_normalize,
    make_rng,
    multinomial_indices,
)

# entries per block of the FFBSm backward-probability matrix
FFBSM_BLOCK_ELEMENTS = 1 << 20
# rejection rounds stop once the stragglers' exact rows fit in this many entries
REJECTION_EXACT_BUDGET = 1 << 12

FORWARD_STREAM = 0
BACKWARD_STREAM = 1


class Variant(str, enum.Enum):
    POORMAN = "poorman"
    FFBSM = "ffbsm"
    PARIS = "paris"
    ADASMOOTH = "adasmooth"


class BackwardSchedule(str, enum.Enum):
    ADAPTIVE = "adaptive"
    EVERY_RESAMPLING = "every_resampling"
    PERIODIC = "periodic"
    NEVER = "never"


@dataclass(frozen=True)
class SmootherConfig:
    variant: Variant = Variant.ADASMOOTH
    alpha: float = 0.6
    beta: float = 0.5
    precision_draws: int = 2
    adasmooth_draws: int = 1
    max_gap: int | None = None
    backward_schedule: BackwardSchedule = BackwardSchedule.ADAPTIVE
    period: int = 1
    rejection_cap: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "backward_schedule", BackwardSchedule(self.backward_schedule))
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.precision_draws < 1:
            raise ValueError(f"precision_draws must be >= 1, got {self.precision_draws}")
        if self.adasmooth_draws < 1:
            raise ValueError(f"adasmooth_draws must be >= 1, got {self.adasmooth_draws}")
        if self.max_gap is not None and self.max_gap < 1:
            raise ValueError(f"max_gap must be >= 1 or None, got {self.max_gap}")
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if self.rejection_cap is not None and self.rejection_cap < 0:
            raise ValueError(f"rejection_cap must be >= 0, got {self.rejection_cap}")

    @property
    def label(self) -> str:
        if self.variant is Variant.ADASMOOTH:
            return f"adasmooth({self.alpha:g},{self.beta:g})"
        if self.variant is Variant.PARIS:
            return f"paris(K={self.precision_draws})"
        if self.variant is Variant.POORMAN:
            return f"poorman({self.alpha:g})"
        return self.variant.value


@dataclass
class ParticleCloud:
    particles: np.ndarray
    logweights: np.ndarray
    stats: np.ndarray
    enoch: np.ndarray
    n: int = 0
    gap_counter: int = 0
    selections: int = 0
    # normalised weights, cached by ``step`` so they are computed once per time
    probs: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.particles.shape[0]


@dataclass
class StepDiagnostics:
    estimate: np.ndarray
    log_total_weight: float
    ess: float
    resampled: bool
    backward_triggered: bool
    distinct_enoch: int
    backward_trial_total: int
    fallbacks: int
    elapsed: float
    ancestors: np.ndarray = field(repr=False)


@dataclass
class RngPair:
    """Mutation/selection and backward draws use separate streams so that
    switching backward sampling on or off leaves the particle filter intact."""

    forward: np.random.Generator
    backward: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RngPair":
        return cls(make_rng(seed, FORWARD_STREAM), make_rng(seed, BACKWARD_STREAM))


def init_cloud(model: PathModel, functional: AdditiveFunctional, n_particles: int, rng) -> ParticleCloud:
    if n_particles < 2:
        raise ValueError(f"need at least 2 particles, got {n_particles}")
    x0 = model.sample_initial(rng, n_particles)
    logw = np.asarray(model.initial_log_weight(x0), dtype=float)
    if not np.any(np.isfinite(logw)):
        raise AllWeightsZero(time_index=0)
    return ParticleCloud(
        particles=x0,
        logweights=logw,
        stats=np.array(functional.initial_term(x0), dtype=float).reshape(n_particles, functional.dim),
        enoch=np.arange(n_particles),
    )


def resampling_indicator(cloud: ParticleCloud, config: SmootherConfig, ess_value: float | None = None) -> bool:
    """Resample iff ``ESS < alpha N`` or the gap since the last selection would reach ``max_gap``."""
    if ess_value is None:
        ess_value = ess(cloud.logweights)
    if config.max_gap is not None and cloud.gap_counter + 1 >= config.max_gap:
        return True
    return ess_value < config.alpha * cloud.size


def apf_step(cloud: ParticleCloud, model: PathModel, config: SmootherConfig, rho: bool, rng):
    """One selection/mutation/weighting pass.  Returns ``(particles, ancestors, logweights)``."""
    n, N, x = cloud.n, cloud.size, cloud.particles
    if rho:
        sel = cloud.logweights + model.adjustment_log(n, x)
        p, _ = log_normalize(sel)
        ancestors = multinomial_indices(p, N, rng)
    else:
        ancestors = np.arange(N)
    parents = x[ancestors]
    new_x = model.sample_proposal(n, parents, rng)
    logw = model.log_weight_increment(n, parents, new_x)
    if rho:
        logw = logw - model.adjustment_log(n, parents)
    else:
        logw = logw + cloud.logweights
    if not np.any(np.isfinite(logw)):
        raise AllWeightsZero(time_index=n + 1)
    return new_x, ancestors, logw


def update_stats_poor(stats: np.ndarray, ancestors: np.ndarray, increments: np.ndarray) -> np.ndarray:
    return stats[ancestors] + increments


def update_stats_ffbsm(cloud, model, functional, n, new_particles) -> np.ndarray:
    """Exact Rao-Blackwellised update, summing over every candidate parent."""
    N_new = new_particles.shape[0]
    out = np.empty((N_new, functional.dim))
    rows = max(1, FFBSM_BLOCK_ELEMENTS // cloud.size)
    for start in range(0, N_new, rows):
        xs = new_particles[start : start + rows]
        lam = backward_probabilities(model, n, cloud.particles, cloud.logweights, xs)
        inc = functional.increment(n, cloud.particles[None, :], xs[:, None])
        out[start : start + rows] = lam @ cloud.stats + np.einsum("bj,bjd->bd", lam, inc)
    return out


def _backward_terms(cloud, model, functional, n, new_particles, draws, rng, cap):
    J, trials, fell_back = backward_indices_rejection(
        model,
        n,
        cloud.particles,
        cloud.logweights,
        new_particles,
        rng,
        cap=cap,
        draws=draws,
        exact_budget=REJECTION_EXACT_BUDGET,
    )
    terms = cloud.stats[J] + functional.increment(n, cloud.particles[J], new_particles[:, None])
    return terms.sum(axis=1), int(trials.sum()), int(fell_back.sum())


def update_stats_paris(cloud, model, functional, n, new_particles, K, rng, cap=None):
    """Average of ``K`` backward-sampled terms.  Returns ``(stats, trials, fallbacks)``."""
    total, trials, fallbacks = _backward_terms(cloud, model, functional, n, new_particles, K, rng, cap)
    return total / K, trials, fallbacks


def update_stats_adasmooth(cloud, model, functional, n, new_particles, ancestors, eps, M, rng, cap=None):
    """Forward term alone when ``eps`` is off, else averaged with ``M`` backward terms.

    Returns ``(stats, trials, fallbacks)``.
    """
    fwd = update_stats_poor(
        cloud.stats, ancestors, functional.increment(n, cloud.particles[ancestors], new_particles)
    )
    if not eps:
        return fwd, 0, 0
    back, trials, fallbacks = _backward_terms(cloud, model, functional, n, new_particles, M, rng, cap)
    return (fwd + back) / (1.0 + M), trials, fallbacks


def count_distinct(indices: np.ndarray, N: int) -> int:
    return int(np.count_nonzero(np.bincount(indices, minlength=N)))


def backward_trigger(enoch, ancestors, rho: bool, beta: float, N: int):
    """Propagate Enoch indices through the forward indices and decide on backward sampling.

    Returns ``(new_enoch, eps, distinct)`` where ``distinct`` is the number of
    distinct Enoch indices before any reset.
    """
    new_enoch = enoch[ancestors]
    distinct = count_distinct(new_enoch, N)
    if rho and distinct < beta * N:
        return np.arange(N), True, distinct
    return new_enoch, False, distinct


def estimate(cloud: ParticleCloud) -> np.ndarray:
    p, _ = log_normalize(cloud.logweights)
    return p @ cloud.stats


def _schedule(cloud, config, ancestors, rho):
    N = cloud.size
    variant = config.variant
    if variant in (Variant.FFBSM, Variant.PARIS):
        new_enoch = cloud.enoch[ancestors]
        return np.arange(N), True, count_distinct(new_enoch, N)
    if variant is Variant.POORMAN:
        new_enoch = cloud.enoch[ancestors]
        return new_enoch, False, count_distinct(new_enoch, N)
    sched = config.backward_schedule
    if sched is BackwardSchedule.ADAPTIVE:
        return backward_trigger(cloud.enoch, ancestors, rho, config.beta, N)
    new_enoch = cloud.enoch[ancestors]
    distinct = count_distinct(new_enoch, N)
    if sched is BackwardSchedule.EVERY_RESAMPLING:
        eps = rho
    elif sched is BackwardSchedule.PERIODIC:
        eps = rho and (cloud.selections + 1) % config.period == 0
    else:
        eps = False
    return (np.arange(N) if eps else new_enoch), eps, distinct


def step(cloud: ParticleCloud, model: PathModel, functional: AdditiveFunctional, config: SmootherConfig, rngs: RngPair):
    """Advance the cloud from time ``n`` to ``n + 1``."""
    t0 = time.perf_counter()
    n, N = cloud.n, cloud.size
    model.check_index(n)
    p_prev = cloud.probs if cloud.probs is not None else log_normalize(cloud.logweights)[0]
    ess_n = float(1.0 / np.dot(p_prev, p_prev))
    if config.variant in (Variant.FFBSM, Variant.PARIS):
        rho = True
    else:
        rho = resampling_indicator(cloud, config, ess_n)
    new_x, ancestors, new_logw = apf_step(cloud, model, config, rho, rngs.forward)
    new_enoch, eps, distinct = _schedule(cloud, config, ancestors, rho)

    cap = config.rejection_cap
    trials = fallbacks = 0
    variant = config.variant
    if variant is Variant.POORMAN:
        stats = update_stats_poor(
            cloud.stats, ancestors, functional.increment(n, cloud.particles[ancestors], new_x)
        )
    elif variant is Variant.FFBSM:
        stats = update_stats_ffbsm(cloud, model, functional, n, new_x)
    elif variant is Variant.PARIS:
        stats, trials, fallbacks = update_stats_paris(
            cloud, model, functional, n, new_x, config.precision_draws, rngs.backward, cap
        )
    else:
        stats, trials, fallbacks = update_stats_adasmooth(
            cloud, model, functional, n, new_x, ancestors, eps, config.adasmooth_draws, rngs.backward, cap
        )

    new_cloud = ParticleCloud(
        particles=new_x,
        logweights=new_logw,
        stats=stats,
        enoch=new_enoch,
        n=n + 1,
        gap_counter=0 if rho else cloud.gap_counter + 1,
        selections=cloud.selections + int(rho),
    )
    p, log_total = log_normalize(new_logw)
    new_cloud.probs = p
    diag = StepDiagnostics(
        estimate=p @ stats,
        log_total_weight=log_total,
        ess=ess_n,
        resampled=rho,
        backward_triggered=eps,
        distinct_enoch=distinct,
        backward_trial_total=trials,
        fallbacks=fallbacks,
        elapsed=time.perf_counter() - t0,
        ancestors=ancestors,
    )
    return new_cloud, diag


@dataclass
class RunRecord:
    """Per-time-step output of one smoothing run.

    ``estimates[n]`` is the estimate at time ``n`` (row 0 is the initial
    estimate); the remaining arrays are indexed by transition ``n -> n + 1``.
    """

    estimates: np.ndarray
    log_total_weight: np.ndarray
    ess: np.ndarray
    resampled: np.ndarray
    backward_triggered: np.ndarray
    distinct_enoch: np.ndarray
    backward_trials: np.ndarray
    fallbacks: np.ndarray
    elapsed: np.ndarray
    wall_time: float
    config: SmootherConfig
    n_particles: int

    @property
    def n_steps(self) -> int:
        return len(self.resampled)


def _at_time(exc: AllWeightsZero, n: int) -> AllWeightsZero:
    return AllWeightsZero(str(exc), time_index=n)


def run_smoother(
    model: PathModel,
    functional: AdditiveFunctional,
    config: SmootherConfig,
    n_particles: int,
    n_steps: int | None = None,
) -> RunRecord:
    """Run ``n_steps`` transitions (default: through the whole observation record)."""
    if n_steps is None:
        n_steps = model.n_observations - 1
    if n_steps < 0 or n_steps > model.n_observations - 1:
        raise ValueError(f"n_steps={n_steps} outside [0, {model.n_observations - 1}]")
    rngs = RngPair.from_seed(config.seed)
    dim = functional.dim
    estimates = np.empty((n_steps + 1, dim))
    log_total = np.empty(n_steps + 1)
    ess_arr = np.empty(n_steps)
    rho = np.zeros(n_steps, dtype=bool)
    eps = np.zeros(n_steps, dtype=bool)
    distinct = np.empty(n_steps, dtype=np.int64)
    trials = np.zeros(n_steps, dtype=np.int64)
    fallbacks = np.zeros(n_steps, dtype=np.int64)
    elapsed = np.empty(n_steps)

    t0 = time.perf_counter()
    try:
        cloud = init_cloud(model, functional, n_particles, rngs.forward)
        p, log_total[0] = log_normalize(cloud.logweights)
    except AllWeightsZero as exc:
        if exc.time_index is not None:
            raise
        raise _at_time(exc, 0) from exc
    estimates[0] = p @ cloud.stats
    for k in range(n_steps):
        try:
            cloud, d = step(cloud, model, functional, config, rngs)
        except AllWeightsZero as exc:
            if exc.time_index is not None:
                raise
            raise _at_time(exc, k + 1) from exc
        estimates[k + 1] = d.estimate
        log_total[k + 1] = d.log_total_weight
        ess_arr[k] = d.ess
        rho[k] = d.resampled
        eps[k] = d.backward_triggered
        distinct[k] = d.distinct_enoch
        trials[k] = d.backward_trial_total
        fallbacks[k] = d.fallbacks
        elapsed[k] = d.elapsed
    wall = time.perf_counter() - t0
    return RunRecord(
        estimates=estimates,
        log_total_weight=log_total,
        ess=ess_arr,
        resampled=rho,
        backward_triggered=eps,
        distinct_enoch=distinct,
        backward_trials=trials,
        fallbacks=fallbacks,
        elapsed=elapsed,
        wall_time=wall,
        config=config,
        n_particles=n_particles,
    )


def with_seed(config: SmootherConfig, seed: int) -> SmootherConfig:
    return replace(config, seed=seed)
