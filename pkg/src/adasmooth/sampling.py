"""Weight bookkeeping, categorical sampling and backward-index samplers."""
from __future__ import annotations

import numpy as np


class AllWeightsZero(ArithmeticError):
    """Every weight underflowed to zero (total degeneracy or model/data mismatch)."""

    def __init__(self, message: str = "all weights are zero", time_index: int | None = None):
        if time_index is not None:
            message = f"{message} (time index {time_index})"
        super().__init__(message)
        self.time_index = time_index


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for substream ``stream`` of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def log_normalize(logw):
    """Return normalised probabilities and ``log sum exp(logw)``.

    Works along the last axis, so a matrix of log-weights is normalised
    row by row.
    """
    logw = np.asarray(logw, dtype=float)
    top = logw.max(axis=-1, keepdims=True)
    if not np.isfinite(top).all():
        if np.isnan(top).any() or (top == np.inf).any():
            raise AllWeightsZero("non-finite log-weight encountered")
        raise AllWeightsZero()
    w = np.exp(logw - top)
    total = w.sum(axis=-1, keepdims=True)
    p = w / total
    log_total = np.log(total[..., 0]) + top[..., 0]
    if log_total.ndim == 0:
        log_total = float(log_total)
    return p, log_total


def ess(logw) -> float:
    """Effective sample size ``1 / sum(normalised w^2)``."""
    p, _ = log_normalize(logw)
    return float(1.0 / np.dot(p, p))


def _cdf(p):
    cdf = np.cumsum(p, axis=-1)
    # exact 1.0 at the last support point, so u in [0, 1) never lands past it
    return cdf / cdf[..., -1:]


def sample_categorical(p, rng: np.random.Generator) -> int:
    return int(np.searchsorted(_cdf(np.asarray(p, dtype=float)), rng.random(), side="right"))


def multinomial_indices(p, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` i.i.d. draws from ``Cat(p)`` by inverse-CDF lookup."""
    return np.searchsorted(_cdf(np.asarray(p, dtype=float)), rng.random(size), side="right")


def sample_rows(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of a probability matrix."""
    cdf = _cdf(p)
    u = rng.random(cdf.shape[0])
    return np.minimum((cdf <= u[:, None]).sum(axis=1), cdf.shape[1] - 1)


def backward_log_weights(model, n, prev_particles, prev_logweights, x_next):
    """``log w_n^j + log l_n(xi_n^j, x')``; one row per entry of ``x_next``."""
    x_next = np.asarray(x_next, dtype=float)
    return prev_logweights + model.transition_logdensity(n, prev_particles, x_next[..., None])


def backward_probabilities(model, n, prev_particles, prev_logweights, x_next) -> np.ndarray:
    """Probability that each previous particle is the parent of ``x_next``.

    A scalar ``x_next`` gives a vector of length ``N``; an array of targets
    gives one normalised row per target.
    """
    p, _ = log_normalize(backward_log_weights(model, n, prev_particles, prev_logweights, x_next))
    return p


def backward_indices_rejection(
    model,
    n,
    prev_particles,
    prev_logweights,
    x_next,
    rng,
    cap: int | None = None,
    draws: int = 1,
    exact_budget: int = 0,
):
    """Draw ``draws`` backward indices for every target in ``x_next``.

    Candidates come from ``Cat(w_n)`` and are accepted with probability
    ``l_n(xi_n^J, x') / c_n(x')``.  Draws still pending after ``cap`` trials
    fall back to exact sampling from the normalised backward probabilities,
    which keeps the output distribution exact.  With ``exact_budget > 0`` the
    loop also stops early, after at least one round, once the pending draws
    times ``N`` fit in that many density evaluations; stopping depends only on
    rejections so far, hence exactness is preserved.

    Returns ``(indices, trials, fell_back)``, each shaped ``(len(x_next), draws)``.
    """
    x_next = np.atleast_1d(np.asarray(x_next, dtype=float))
    prev_logweights = np.asarray(prev_logweights, dtype=float)
    n_prev = prev_particles.shape[0]
    if cap is None:
        cap = n_prev
    targets = np.repeat(x_next, draws)
    total = targets.size
    out = np.empty(total, dtype=np.intp)
    trials = np.zeros(total, dtype=np.intp)
    fell_back = np.zeros(total, dtype=bool)

    p, _ = log_normalize(prev_logweights)
    cdf = _cdf(p)
    log_bound = model.transition_log_bound(n, targets)
    pending = np.arange(total)
    rounds = 0
    while pending.size and rounds < cap:
        cand = np.searchsorted(cdf, rng.random(pending.size), side="right")
        log_accept = model.transition_logdensity(n, prev_particles[cand], targets[pending]) - log_bound[pending]
        accepted = rng.random(pending.size) < np.exp(log_accept)
        out[pending[accepted]] = cand[accepted]
        trials[pending] += 1
        pending = pending[~accepted]
        rounds += 1
        if pending.size * n_prev <= exact_budget:
            break

    if pending.size:
        probs = backward_probabilities(model, n, prev_particles, prev_logweights, targets[pending])
        out[pending] = sample_rows(probs, rng)
        fell_back[pending] = True
    shape = (x_next.size, draws)
    return out.reshape(shape), trials.reshape(shape), fell_back.reshape(shape)


def backward_sample_rejection(model, n, prev_particles, prev_logweights, x_next, rng, cap: int | None = None):
    """Single backward draw for a scalar ``x_next``: ``(index, trials, fell_back)``."""
    idx, trials, fb = backward_indices_rejection(
        model, n, np.asarray(prev_particles, dtype=float), prev_logweights, [x_next], rng, cap
    )
    return int(idx[0, 0]), int(trials[0, 0]), bool(fb[0, 0])
