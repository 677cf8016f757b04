"""Path-space models driving the particle smoothers.

A model supplies everything the adaptive APF and the backward samplers need,
in log-domain and vectorised over particles:

* an initial proposal ``nu`` and the initial log-weight ``log chi - log nu``,
* unnormalised transition log-densities ``log l_n(x, x')`` together with an
  upper bound ``log c_n(x') >= log l_n(x, x')`` used for rejection sampling,
* a proposal kernel ``r_n(x, .)`` and adjustment multipliers ``theta_n``.

Two concrete scalar models are provided: a linear Gaussian HMM and a
stochastic volatility model with leverage (correlated noise).  Both use the
bootstrap proposal, i.e. particles are moved with the latent dynamics.
"""
from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


class ObservationsExhausted(IndexError):
    """Raised when a transition needs an observation beyond the record."""


def gaussian_logpdf(x, mean, var):
    """Log-density of ``N(mean, var)`` evaluated at ``x`` (broadcasting)."""
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


class PathModel(abc.ABC):
    """Abstract path-space model on the real line.

    Subclasses hold a fixed observation record ``y_0, ..., y_T``; transition
    ``n -> n + 1`` depends on ``y_{n+1}`` so valid indices are
    ``0 <= n < len(observations) - 1``.
    """

    state_dim = 1
    observations: np.ndarray

    @property
    def n_observations(self) -> int:
        return len(self.observations)

    def check_index(self, n: int) -> None:
        if n < 0 or n + 1 >= len(self.observations):
            raise ObservationsExhausted(
                f"transition {n} -> {n + 1} needs y_{n + 1}, "
                f"but only {len(self.observations)} observations are available"
            )

    # initialisation
    @abc.abstractmethod
    def sample_initial(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` particles from the initial proposal ``nu``."""

    @abc.abstractmethod
    def initial_proposal_logdensity(self, x0): ...

    @abc.abstractmethod
    def initial_target_logdensity(self, x0): ...

    def initial_log_weight(self, x0):
        return self.initial_target_logdensity(x0) - self.initial_proposal_logdensity(x0)

    # transitions
    @abc.abstractmethod
    def transition_logdensity(self, n: int, x, x_next): ...

    @abc.abstractmethod
    def transition_log_bound(self, n: int, x_next): ...

    @abc.abstractmethod
    def sample_proposal(self, n: int, x: np.ndarray, rng: np.random.Generator) -> np.ndarray: ...

    @abc.abstractmethod
    def proposal_logdensity(self, n: int, x, x_next): ...

    def adjustment_log(self, n: int, x):
        return np.zeros(np.shape(x))

    def log_weight_increment(self, n: int, x, x_next):
        """``log l_n(x, x') - log r_n(x, x')``, the APF importance weight."""
        return self.transition_logdensity(n, x, x_next) - self.proposal_logdensity(n, x, x_next)

    # data generation
    @abc.abstractmethod
    def simulate(self, n_steps: int, seed: int) -> "SimulatedTrajectory": ...

    @abc.abstractmethod
    def with_observations(self, observations) -> "PathModel": ...


@dataclass(frozen=True, eq=False)
class LinearGaussianHmm(PathModel):
    """``X_{n+1} = a X_n + sigma_u U``, ``Y_n = b X_n + sigma_v V``."""

    a: float
    b: float
    sigma_u: float
    sigma_v: float
    observations: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not abs(self.a) < 1.0:
            raise ValueError(f"LinearGaussianHmm requires |a| < 1, got a={self.a}")
        if not self.sigma_u > 0.0:
            raise ValueError(f"sigma_u must be > 0, got {self.sigma_u}")
        if not self.sigma_v > 0.0:
            raise ValueError(f"sigma_v must be > 0, got {self.sigma_v}")
        object.__setattr__(self, "observations", np.asarray(self.observations, dtype=float))

    @cached_property
    def stationary_var(self) -> float:
        return self.sigma_u**2 / (1.0 - self.a**2)

    @cached_property
    def _q_logmode(self) -> float:
        return -0.5 * math.log(2.0 * math.pi * self.sigma_u**2)

    def observation_logdensity(self, x, y):
        return gaussian_logpdf(y, self.b * x, self.sigma_v**2)

    def sample_initial(self, rng, size):
        return rng.normal(0.0, math.sqrt(self.stationary_var), size)

    def initial_proposal_logdensity(self, x0):
        return gaussian_logpdf(x0, 0.0, self.stationary_var)

    def initial_target_logdensity(self, x0):
        return self.initial_proposal_logdensity(x0) + self.observation_logdensity(x0, self.observations[0])

    def initial_log_weight(self, x0):
        return self.observation_logdensity(x0, self.observations[0])

    def transition_logdensity(self, n, x, x_next):
        self.check_index(n)
        return gaussian_logpdf(x_next, self.a * x, self.sigma_u**2) + self.observation_logdensity(
            x_next, self.observations[n + 1]
        )

    def transition_log_bound(self, n, x_next):
        self.check_index(n)
        return self._q_logmode + self.observation_logdensity(x_next, self.observations[n + 1])

    def sample_proposal(self, n, x, rng):
        return self.a * x + self.sigma_u * rng.standard_normal(np.shape(x))

    def proposal_logdensity(self, n, x, x_next):
        return gaussian_logpdf(x_next, self.a * x, self.sigma_u**2)

    def log_weight_increment(self, n, x, x_next):
        # bootstrap proposal: the prior kernel cancels exactly
        self.check_index(n)
        return self.observation_logdensity(x_next, self.observations[n + 1]) + np.zeros(np.shape(x))

    def simulate(self, n_steps, seed):
        if n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {n_steps}")
        rng = np.random.default_rng(seed)
        x = np.empty(n_steps)
        x[0] = rng.normal(0.0, math.sqrt(self.stationary_var))
        u = rng.standard_normal(n_steps)
        for k in range(1, n_steps):
            x[k] = self.a * x[k - 1] + self.sigma_u * u[k]
        y = self.b * x + self.sigma_v * rng.standard_normal(n_steps)
        return SimulatedTrajectory(states=x, observations=y, seed=seed)

    def with_observations(self, observations):
        return LinearGaussianHmm(self.a, self.b, self.sigma_u, self.sigma_v, observations)


@dataclass(frozen=True, eq=False)
class StochasticVolatilityModel(PathModel):
    """Log-volatility AR(1) with returns ``Y_n = b exp(X_n / 2) V_n``.

    ``(U_{n+1}, V_{n+1})`` are correlated with coefficient ``rho``, so the
    transition density couples ``y_{n+1}`` with both ``x_n`` and ``x_{n+1}``
    and the model is not an HMM.
    """

    a: float
    b: float
    sigma: float
    rho: float
    observations: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not abs(self.a) < 1.0:
            raise ValueError(f"StochasticVolatilityModel requires |a| < 1, got a={self.a}")
        if not self.b > 0.0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        object.__setattr__(self, "observations", np.asarray(self.observations, dtype=float))

    @cached_property
    def stationary_var(self) -> float:
        return self.sigma**2 / (1.0 - self.a**2)

    @cached_property
    def _q_logmode(self) -> float:
        return -0.5 * math.log(2.0 * math.pi * self.sigma**2)

    def _obs_logdensity(self, x, x_next, y):
        mean = self.b * np.exp(0.5 * x_next) * self.rho * (x_next - self.a * x) / self.sigma
        var = self.b**2 * np.exp(x_next) * (1.0 - self.rho**2)
        return gaussian_logpdf(y, mean, var)

    def sample_initial(self, rng, size):
        return rng.normal(0.0, math.sqrt(self.stationary_var), size)

    def initial_proposal_logdensity(self, x0):
        return gaussian_logpdf(x0, 0.0, self.stationary_var)

    def initial_target_logdensity(self, x0):
        return self.initial_proposal_logdensity(x0) + self.initial_log_weight(x0)

    def initial_log_weight(self, x0):
        # V_0 is independent of X_0 and U_1
        return gaussian_logpdf(self.observations[0], 0.0, self.b**2 * np.exp(x0))

    def transition_logdensity(self, n, x, x_next):
        self.check_index(n)
        return gaussian_logpdf(x_next, self.a * x, self.sigma**2) + self._obs_logdensity(
            x, x_next, self.observations[n + 1]
        )

    def transition_log_bound(self, n, x_next):
        self.check_index(n)
        x_next = np.asarray(x_next, dtype=float)
        return self._q_logmode - 0.5 * (
            LOG_2PI + 2.0 * math.log(self.b) + x_next + math.log1p(-self.rho**2)
        )

    def sample_proposal(self, n, x, rng):
        return self.a * x + self.sigma * rng.standard_normal(np.shape(x))

    def proposal_logdensity(self, n, x, x_next):
        return gaussian_logpdf(x_next, self.a * x, self.sigma**2)

    def log_weight_increment(self, n, x, x_next):
        self.check_index(n)
        return self._obs_logdensity(x, x_next, self.observations[n + 1])

    def simulate(self, n_steps, seed):
        if n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {n_steps}")
        rng = np.random.default_rng(seed)
        x = np.empty(n_steps)
        y = np.empty(n_steps)
        x[0] = rng.normal(0.0, math.sqrt(self.stationary_var))
        y[0] = self.b * math.exp(0.5 * x[0]) * rng.standard_normal()
        c = math.sqrt(1.0 - self.rho**2)
        for k in range(1, n_steps):
            u, w = rng.standard_normal(2)
            x[k] = self.a * x[k - 1] + self.sigma * u
            y[k] = self.b * math.exp(0.5 * x[k]) * (self.rho * u + c * w)
        return SimulatedTrajectory(states=x, observations=y, seed=seed)

    def with_observations(self, observations):
        return StochasticVolatilityModel(self.a, self.b, self.sigma, self.rho, observations)


@dataclass(frozen=True, eq=False)
class SimulatedTrajectory:
    states: np.ndarray
    observations: np.ndarray
    seed: int

    def __post_init__(self):
        if len(self.states) != len(self.observations):
            raise ValueError("states and observations must have equal length")

    def __len__(self):
        return len(self.states)

    def to_csv(self, path) -> None:
        """Write ``x,y`` rows followed by a ``# seed=<int>`` sidecar line.

        Floats are written with ``repr`` so reading them back is lossless.
        """
        lines = ["x,y"]
        lines += [f"{float(x)!r},{float(y)!r}" for x, y in zip(self.states, self.observations)]
        lines.append(f"# seed={int(self.seed)}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SimulatedTrajectory":
        xs, ys, seed = [], [], None
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "x,y":
                raise ValueError(f"{path}: expected header 'x,y', got {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    if key.strip() == "seed":
                        seed = int(value)
                    continue
                x, y = line.split(",")
                xs.append(float(x))
                ys.append(float(y))
        return cls(np.array(xs), np.array(ys), seed if seed is not None else -1)


def read_observations(path) -> np.ndarray:
    """Read a single-column ``y`` CSV (a two-column ``x,y`` file also works)."""
    with open(path) as fh:
        header = [h.strip() for h in fh.readline().strip().split(",")]
        if "y" not in header:
            raise ValueError(f"{path}: no 'y' column in header {header}")
        col = header.index("y")
        values = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            values.append(float(line.split(",")[col]))
    if not values:
        raise ValueError(f"{path}: no observations")
    return np.array(values)


def write_observations(path, observations) -> None:
    lines = ["y"] + [repr(float(y)) for y in observations]
    Path(path).write_text("\n".join(lines) + "\n")
