"""Exact smoothing for the scalar linear Gaussian HMM.

``smoothed_additive_expectation`` runs a Kalman filter followed by a
Rauch-Tung-Striebel backward pass; ``dense_joint_oracle`` solves the joint
posterior of ``x_{0:n}`` directly from its tridiagonal precision matrix and
serves as an independent cross-check at small ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functional import AdditiveFunctional, StateSumFunctional
from .model import LinearGaussianHmm


@dataclass(frozen=True, eq=False)
class KalmanState:
    filtered_mean: np.ndarray
    filtered_var: np.ndarray
    predicted_mean: np.ndarray
    predicted_var: np.ndarray
    loglik: float


@dataclass(frozen=True, eq=False)
class SmoothedMarginals:
    smoothed_mean: np.ndarray
    smoothed_var: np.ndarray


def kalman_filter(model: LinearGaussianHmm) -> KalmanState:
    """Scalar Kalman filter started from the stationary law ``N(0, sigma_u^2 / (1 - a^2))``.

    ``predicted_*[k]`` is the law of ``x_k`` given ``y_{0:k-1}`` (the prior at ``k = 0``).
    """
    y = model.observations
    T = len(y)
    if T == 0:
        raise ValueError("kalman_filter needs at least one observation")
    a, b = model.a, model.b
    q, r = model.sigma_u**2, model.sigma_v**2
    fm, fv = np.empty(T), np.empty(T)
    pm, pv = np.empty(T), np.empty(T)
    loglik = 0.0
    m, P = 0.0, model.stationary_var
    for k in range(T):
        if k > 0:
            m, P = a * fm[k - 1], a * a * fv[k - 1] + q
        pm[k], pv[k] = m, P
        S = b * b * P + r
        resid = y[k] - b * m
        gain = P * b / S
        fm[k] = m + gain * resid
        fv[k] = P - gain * b * P
        loglik += -0.5 * (np.log(2.0 * np.pi * S) + resid * resid / S)
    return KalmanState(fm, fv, pm, pv, float(loglik))


def rts_smoother(model: LinearGaussianHmm, kf: KalmanState | None = None) -> SmoothedMarginals:
    if kf is None:
        kf = kalman_filter(model)
    T = len(kf.filtered_mean)
    sm, sv = kf.filtered_mean.copy(), kf.filtered_var.copy()
    a = model.a
    for k in range(T - 2, -1, -1):
        gain = kf.filtered_var[k] * a / kf.predicted_var[k + 1]
        sm[k] = kf.filtered_mean[k] + gain * (sm[k + 1] - kf.predicted_mean[k + 1])
        sv[k] = kf.filtered_var[k] + gain * gain * (sv[k + 1] - kf.predicted_var[k + 1])
    return SmoothedMarginals(sm, sv)


def smoothed_additive_expectation(
    model: LinearGaussianHmm, functional: AdditiveFunctional | None = None, n: int | None = None
) -> float:
    """``E[x_0 + ... + x_n | y_{0:n}]``, by default with ``n`` the last observation index."""
    if functional is not None and not isinstance(functional, StateSumFunctional):
        raise TypeError("exact smoothing is only implemented for the state-sum functional")
    if n is not None:
        model = model.with_observations(model.observations[: n + 1])
    return float(rts_smoother(model).smoothed_mean.sum())


def state_sum_oracle(model: LinearGaussianHmm, checkpoints) -> np.ndarray:
    """Exact smoothed state sums for each checkpoint ``n`` (using ``y_{0:n}`` only)."""
    return np.array([smoothed_additive_expectation(model, n=int(n)) for n in checkpoints])


def joint_precision(model: LinearGaussianHmm, n: int, order=None):
    """Posterior precision matrix and linear term of ``x_{0:n} | y_{0:n}``.

    Contributions are accumulated one quadratic form at a time; ``order``
    permutes the sequence in which they are added.
    """
    a, b = model.a, model.b
    q, r = model.sigma_u**2, model.sigma_v**2
    y = model.observations
    terms = [("prior", 0)]
    terms += [("transition", k) for k in range(n)]
    terms += [("likelihood", k) for k in range(n + 1)]
    if order is not None:
        terms = [terms[i] for i in order]
    Q = np.zeros((n + 1, n + 1))
    lin = np.zeros(n + 1)
    for kind, k in terms:
        if kind == "prior":
            Q[0, 0] += 1.0 / model.stationary_var
        elif kind == "transition":
            # (x_{k+1} - a x_k)^2 / q
            Q[k, k] += a * a / q
            Q[k + 1, k + 1] += 1.0 / q
            Q[k, k + 1] -= a / q
            Q[k + 1, k] -= a / q
        else:
            # (y_k - b x_k)^2 / r
            Q[k, k] += b * b / r
            lin[k] += b * y[k] / r
    return Q, lin


def dense_joint_oracle(model: LinearGaussianHmm, n_max: int | None = None, order=None) -> np.ndarray:
    """Posterior means of ``x_0, ..., x_{n_max}`` from the dense joint Gaussian."""
    if n_max is None:
        n_max = len(model.observations) - 1
    if not 0 <= n_max < len(model.observations):
        raise ValueError(f"n_max={n_max} outside the observation record")
    Q, lin = joint_precision(model, n_max, order)
    return np.linalg.solve(Q, lin)
