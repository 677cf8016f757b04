"""Flat ``section.key = value`` run configuration.

Example::

    seed = 7
    model.kind = lgssm
    model.a = 0.7
    model.b = 1.0
    model.sigma_u = 0.2
    model.sigma_v = 1.0
    simulate.n_steps = 501          # or: model.observations = data.csv
    functional = state_sum
    smoother.variant = adasmooth
    smoother.alpha = 0.6
    smoother.beta = 0.5
    smoother.particles = 200
    bench.replicates = 100
    bench.checkpoints = 100, 500
    output.dir = out

All randomness derives from ``seed``: the simulation uses ``seed`` (unless
``simulate.seed`` is given) and smoothing replicate ``r`` uses
``seed + SMOOTHER_SEED_OFFSET + r``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .functional import FUNCTIONALS, AdditiveFunctional
from .model import LinearGaussianHmm, PathModel, StochasticVolatilityModel, read_observations
from .smoother import BackwardSchedule, SmootherConfig, Variant

SMOOTHER_SEED_OFFSET = 1

MODEL_PARAMS = {
    "lgssm": ("a", "b", "sigma_u", "sigma_v"),
    "sv": ("a", "b", "sigma", "rho"),
}
MODEL_DEFAULTS = {
    "lgssm": {"a": 0.7, "b": 1.0, "sigma_u": 0.2, "sigma_v": 1.0},
    "sv": {"a": 0.975, "b": 0.641, "sigma": 0.165, "rho": -0.1},
}
DEFAULT_FUNCTIONAL = {"lgssm": "state_sum", "sv": "sv_triple"}

KNOWN_KEYS = {
    "seed",
    "functional",
    "output.dir",
    "model.kind",
    "model.observations",
    "simulate.n_steps",
    "simulate.seed",
    "smoother.variant",
    "smoother.alpha",
    "smoother.beta",
    "smoother.particles",
    "smoother.precision_draws",
    "smoother.adasmooth_draws",
    "smoother.max_gap",
    "smoother.backward_schedule",
    "smoother.period",
    "smoother.rejection_cap",
    "bench.replicates",
    "bench.checkpoints",
    "bench.alphas",
    "bench.betas",
    "bench.particles",
    "bench.variants",
    "bench.baselines",
} | {f"model.{p}" for params in MODEL_PARAMS.values() for p in params}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


def parse_text(text: str) -> dict[str, str]:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key)
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key", key)
        entries[key] = value
    return entries


def _typed(entries, key, kind, default=None):
    if key not in entries:
        return default
    raw = entries[key]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "optint":
            return None if raw.lower() in ("none", "inf", "unbounded") else int(raw)
        if kind == "ints":
            return [int(v) for v in raw.split(",") if v.strip()]
        if kind == "floats":
            return [float(v) for v in raw.split(",") if v.strip()]
        if kind == "words":
            return [v.strip() for v in raw.split(",") if v.strip()]
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r}", key) from None


@dataclass
class BenchSection:
    replicates: int = 100
    checkpoints: list[int] = field(default_factory=list)
    alphas: list[float] = field(default_factory=lambda: [0.6])
    betas: list[float] = field(default_factory=lambda: [0.5])
    particles: list[int] = field(default_factory=list)
    variants: list[str] = field(default_factory=lambda: ["adasmooth"])
    baselines: list[str] = field(default_factory=list)


@dataclass
class RunConfig:
    seed: int
    model_kind: str
    model_params: dict[str, float]
    observations_path: Path | None
    simulate_steps: int | None
    simulate_seed: int
    functional: str
    smoother: SmootherConfig
    particles: int
    bench: BenchSection
    output_dir: Path | None

    @property
    def smoother_seed(self) -> int:
        return self.seed + SMOOTHER_SEED_OFFSET

    def base_model(self, observations=()) -> PathModel:
        cls = LinearGaussianHmm if self.model_kind == "lgssm" else StochasticVolatilityModel
        return cls(**self.model_params, observations=np.asarray(observations, dtype=float))

    def build_model(self) -> PathModel:
        """Model with observations loaded from file or simulated."""
        if self.observations_path is not None:
            return self.base_model(read_observations(self.observations_path))
        if self.simulate_steps is not None:
            traj = self.base_model().simulate(self.simulate_steps, self.simulate_seed)
            return self.base_model(traj.observations)
        raise ConfigError("need model.observations or simulate.n_steps")

    def build_functional(self) -> AdditiveFunctional:
        return FUNCTIONALS[self.functional]()


def load_config(path=None, text: str | None = None, seed_override: int | None = None) -> RunConfig:
    """Parse and validate a configuration file (or literal ``text``)."""
    base_dir = Path(".")
    if text is None:
        if path is None:
            text = ""
        else:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            text = path.read_text()
            base_dir = path.parent
    e = parse_text(text)

    seed = _typed(e, "seed", int, 0)
    if seed_override is not None:
        seed = seed_override
    if seed < 0:
        raise ConfigError("must be non-negative", "seed")

    kind = _typed(e, "model.kind", str, "lgssm")
    if kind not in MODEL_PARAMS:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of {sorted(MODEL_PARAMS)}", "model.kind")
    params = dict(MODEL_DEFAULTS[kind])
    for p in MODEL_PARAMS[kind]:
        params[p] = _typed(e, f"model.{p}", float, params[p])
    for key in e:
        if key.startswith("model.") and key[6:] not in MODEL_PARAMS[kind] + ("kind", "observations"):
            raise ConfigError(f"not a parameter of model kind {kind!r}", key)
    cls = LinearGaussianHmm if kind == "lgssm" else StochasticVolatilityModel
    # check each parameter against otherwise-default values so the error names it
    for p in MODEL_PARAMS[kind]:
        try:
            cls(**{**MODEL_DEFAULTS[kind], p: params[p]})
        except ValueError as exc:
            raise ConfigError(str(exc), f"model.{p}") from None

    obs_path = None
    if "model.observations" in e:
        obs_path = Path(e["model.observations"])
        if not obs_path.is_absolute():
            obs_path = base_dir / obs_path
        if not obs_path.is_file():
            raise ConfigError(f"observation file not found: {obs_path}", "model.observations")
    n_sim = _typed(e, "simulate.n_steps", int)
    if n_sim is not None and n_sim < 1:
        raise ConfigError("must be >= 1", "simulate.n_steps")
    sim_seed = _typed(e, "simulate.seed", int, seed)

    functional = _typed(e, "functional", str, DEFAULT_FUNCTIONAL[kind])
    if functional not in FUNCTIONALS:
        raise ConfigError(f"unknown functional {functional!r}; expected one of {sorted(FUNCTIONALS)}", "functional")

    particles = _typed(e, "smoother.particles", int, 200)
    if particles < 2:
        raise ConfigError("must be >= 2", "smoother.particles")
    variant = _typed(e, "smoother.variant", str, "adasmooth")
    if variant not in {v.value for v in Variant}:
        raise ConfigError(f"unknown variant {variant!r}", "smoother.variant")
    schedule = _typed(e, "smoother.backward_schedule", str, "adaptive")
    if schedule not in {s.value for s in BackwardSchedule}:
        raise ConfigError(f"unknown schedule {schedule!r}", "smoother.backward_schedule")
    smoother_kwargs = dict(
        variant=variant,
        alpha=_typed(e, "smoother.alpha", float, 0.6),
        beta=_typed(e, "smoother.beta", float, 0.5),
        precision_draws=_typed(e, "smoother.precision_draws", int, 2),
        adasmooth_draws=_typed(e, "smoother.adasmooth_draws", int, 1),
        max_gap=_typed(e, "smoother.max_gap", "optint"),
        backward_schedule=schedule,
        period=_typed(e, "smoother.period", int, 1),
        rejection_cap=_typed(e, "smoother.rejection_cap", "optint"),
        seed=seed + SMOOTHER_SEED_OFFSET,
    )
    try:
        smoother = SmootherConfig(**smoother_kwargs)
    except ValueError as exc:
        name = str(exc).split()[0]
        raise ConfigError(str(exc), f"smoother.{name}") from None

    bench = BenchSection(
        replicates=_typed(e, "bench.replicates", int, 100),
        checkpoints=_typed(e, "bench.checkpoints", "ints", []),
        alphas=_typed(e, "bench.alphas", "floats", [smoother.alpha]),
        betas=_typed(e, "bench.betas", "floats", [smoother.beta]),
        particles=_typed(e, "bench.particles", "ints", [particles]),
        variants=_typed(e, "bench.variants", "words", ["adasmooth"]),
        baselines=_typed(e, "bench.baselines", "words", []),
    )
    if bench.replicates < 1:
        raise ConfigError("must be >= 1", "bench.replicates")
    if any(c < 0 for c in bench.checkpoints):
        raise ConfigError("checkpoints must be non-negative", "bench.checkpoints")
    if any(not 0.0 < a <= 1.0 for a in bench.alphas):
        raise ConfigError("alphas must lie in (0, 1]", "bench.alphas")
    if any(not 0.0 < b < 1.0 for b in bench.betas):
        raise ConfigError("betas must lie in (0, 1)", "bench.betas")
    if any(n < 2 for n in bench.particles):
        raise ConfigError("particle counts must be >= 2", "bench.particles")
    valid = {v.value for v in Variant}
    for key, names in (("bench.variants", bench.variants), ("bench.baselines", bench.baselines)):
        bad = [v for v in names if v not in valid]
        if bad:
            raise ConfigError(f"unknown variant(s) {bad}", key)

    out = e.get("output.dir")
    return RunConfig(
        seed=seed,
        model_kind=kind,
        model_params=params,
        observations_path=obs_path,
        simulate_steps=n_sim,
        simulate_seed=sim_seed,
        functional=functional,
        smoother=smoother,
        particles=particles,
        bench=bench,
        output_dir=Path(out) if out else None,
    )
