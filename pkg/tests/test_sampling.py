import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adasmooth.sampling import (
    AllWeightsZero,
    backward_indices_rejection,
    backward_probabilities,
    backward_sample_rejection,
    ess,
    log_normalize,
    make_rng,
    multinomial_indices,
    sample_categorical,
)


class TableModel:
    """Transition density l(x, x') = x: particles carry their own density value."""

    def transition_logdensity(self, n, x, x_next):
        return np.log(np.asarray(x, dtype=float)) + 0.0 * np.asarray(x_next)

    def transition_log_bound(self, n, x_next):
        return np.zeros(np.shape(x_next))


@pytest.mark.parametrize(
    "logw,p,log_total",
    [
        ([0.0, 0.0], [0.5, 0.5], math.log(2)),
        ([0.0, -np.inf], [1.0, 0.0], 0.0),
        ([0.0, math.log(3)], [0.25, 0.75], math.log(4)),
    ],
)
def test_log_normalize_examples(logw, p, log_total):
    got_p, got_total = log_normalize(logw)
    assert got_p == pytest.approx(p, abs=1e-15)
    assert got_total == pytest.approx(log_total, abs=1e-15)


def test_log_normalize_extreme_values():
    p, total = log_normalize([1000.0, 1000.0 + math.log(3)])
    assert p == pytest.approx([0.25, 0.75])
    assert total == pytest.approx(1000.0 + math.log(4))


@pytest.mark.parametrize("bad", [[-np.inf, -np.inf], [np.nan, 0.0], [np.inf, 0.0]])
def test_log_normalize_degenerate(bad):
    with pytest.raises(AllWeightsZero):
        log_normalize(bad)


def test_ess_examples():
    assert ess(np.zeros(4)) == pytest.approx(4.0)
    assert ess([0.0, -np.inf, -np.inf, -np.inf]) == pytest.approx(1.0)
    assert ess(np.log([0.5, 0.25, 0.25])) == pytest.approx(2.6666666666666667, abs=1e-12)


logweights = arrays(float, st.integers(1, 30), elements=st.floats(-30, 30, allow_nan=False))


@pytest.mark.property
@given(logw=logweights, shift=st.floats(-500, 500, allow_nan=False))
def test_ess_shift_invariant_and_bounded(logw, shift):
    e = ess(logw)
    assert e == pytest.approx(ess(logw + shift), rel=1e-12)
    assert 1.0 - 1e-12 <= e <= logw.size + 1e-9


@pytest.mark.property
@given(logw=logweights)
def test_log_normalize_preserves_ratios(logw):
    p, total = log_normalize(logw)
    i, j = int(np.argmax(logw)), int(np.argmin(logw))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    if p[j] > 0:
        assert p[i] / p[j] == pytest.approx(math.exp(logw[i] - logw[j]), rel=1e-12)
    assert total == pytest.approx(np.log(np.sum(np.exp(logw))), rel=1e-12, abs=1e-12)


def test_categorical_degenerate_and_deterministic():
    rng = np.random.default_rng(0)
    assert all(sample_categorical([1.0, 0.0, 0.0], rng) == 0 for _ in range(200))
    assert not multinomial_indices([1.0, 0.0, 0.0], 500, rng).any()
    a = multinomial_indices([0.2, 0.3, 0.5], 100, make_rng(5, 0))
    b = multinomial_indices([0.2, 0.3, 0.5], 100, make_rng(5, 0))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, multinomial_indices([0.2, 0.3, 0.5], 100, make_rng(5, 1)))


def test_multinomial_frequencies():
    p = np.array([0.1, 0.6, 0.3])
    counts = np.bincount(multinomial_indices(p, 200_000, make_rng(1, 0)), minlength=3)
    se = np.sqrt(p * (1 - p) / 200_000)
    assert np.all(np.abs(counts / 200_000 - p) < 5 * se)


def test_backward_probabilities_examples():
    m = TableModel()
    assert backward_probabilities(m, 0, np.ones(3), np.zeros(3), 0.0) == pytest.approx(np.full(3, 1 / 3))
    assert backward_probabilities(m, 0, np.array([1.0, 3.0]), np.zeros(2), 0.0) == pytest.approx([0.25, 0.75])
    assert backward_probabilities(m, 0, np.array([0.5, 0.9]), np.array([0.0, -np.inf]), 0.0) == pytest.approx(
        [1.0, 0.0]
    )
    rows = backward_probabilities(m, 0, np.array([1.0, 3.0]), np.zeros(2), np.zeros(4))
    assert rows.shape == (4, 2)


def test_rejection_single_particle():
    idx, trials, fell_back = backward_sample_rejection(TableModel(), 0, [1.0], [0.0], 0.0, make_rng(0, 1))
    assert (idx, trials, fell_back) == (0, 1, False)


def _chi2_pvalue(counts, probs):
    from scipy.stats import chisquare

    keep = probs > 0
    assert counts[~keep].sum() == 0
    return chisquare(counts[keep], probs[keep] * counts.sum()).pvalue


def test_cap_zero_falls_back_exactly():
    m = TableModel()
    x = np.array([0.2, 0.5, 1.0, 0.1])
    logw = np.log([0.4, 0.1, 0.2, 0.3])
    idx, trials, fb = backward_indices_rejection(m, 0, x, logw, np.zeros(20_000), make_rng(3, 1), cap=0)
    assert fb.all() and not trials.any()
    probs = backward_probabilities(m, 0, x, logw, 0.0)
    assert _chi2_pvalue(np.bincount(idx.ravel(), minlength=4), probs) > 1e-3


@pytest.mark.parametrize("budget", [0, 64])
def test_rejection_draw_shapes_and_exactness(budget):
    m = TableModel()
    x = np.array([0.9, 0.05, 0.5, 0.3, 0.7])
    logw = np.log([0.1, 0.3, 0.2, 0.2, 0.2])
    idx, trials, fb = backward_indices_rejection(
        m, 0, x, logw, np.zeros(10_000), make_rng(4, 1), draws=3, exact_budget=budget
    )
    assert idx.shape == trials.shape == fb.shape == (10_000, 3)
    assert (trials[~fb] >= 1).all()
    probs = backward_probabilities(m, 0, x, logw, 0.0)
    assert _chi2_pvalue(np.bincount(idx.ravel(), minlength=5), probs) > 1e-3
