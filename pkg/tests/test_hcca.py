import inspect
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from hccalab import hcca
from hccalab.gf2m import FieldElement, FieldId
from hccalab.hcca import (
    UndefinedCorrelationError,
    VarianceUndefinedError,
    attack_trace,
    auc_score,
    average_profile,
    collision_coefficients,
    collision_csv,
    compress,
    correlate_all,
    mult_collision_experiment,
    mult_collision_experiments,
    pearson,
    planted_collision_trace,
    separation_stats,
    slice_slots,
    welch_t,
    window_bounds,
)
from hccalab.leakage import LeakageModel, Trace

import oracles

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_compress_constant_and_oracle(rng):
    t = Trace(np.full(30, 2.0), 10)
    assert compress(t).values.tolist() == [4.0, 4.0, 4.0]
    t = Trace(rng.normal(size=625 * 40), 625)
    got = compress(t).values
    want = oracles.compress_direct(t.samples.tolist(), 625)
    assert np.allclose(got, want, rtol=1e-12, atol=0)


def test_slice_slots():
    v = np.arange(108.0)
    s = slice_slots(v)
    assert s.shape == (2, 54) and s[1, 0] == 54
    with pytest.raises(ValueError):
        slice_slots(np.arange(100.0))
    assert slice_slots(np.arange(100.0), truncate=True).shape == (1, 54)
    with pytest.raises(ValueError):
        slice_slots(np.arange(10.0), truncate=True)


def test_window_bounds():
    assert window_bounds(1) == (0, 9)
    assert window_bounds(6) == (45, 54)
    for bad in (0, 7):
        with pytest.raises(ValueError):
            window_bounds(bad)


def test_average_profile(rng):
    slots = rng.normal(size=(5, 54))
    prof = average_profile(slots, 3)
    assert np.allclose(prof.values, slots[:, 18:27].mean(axis=0))
    assert prof.position == 3


def test_pearson_trivial():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(UndefinedCorrelationError):
        pearson([0.0, 0.0, 1e-249], [0.0, 0.0, 1.0])


def test_pearson_matches_two_pass_oracle(rng):
    for _ in range(1000):
        x = rng.normal(size=9) * rng.uniform(0.1, 1e3) + rng.uniform(-1e3, 1e3)
        y = rng.normal(size=9)
        assert abs(pearson(x, y) - oracles.pearson_two_pass(x.tolist(), y.tolist())) <= 1e-12


@given(st.lists(finite, min_size=3, max_size=20), st.data())
def test_pearson_invariants(xs, data):
    ys = data.draw(st.lists(finite, min_size=len(xs), max_size=len(xs)))
    x, y = np.array(xs), np.array(ys)
    assume(x.std() > 1e-3 and y.std() > 1e-3)
    r = pearson(x, y)
    assert -1.0 <= r <= 1.0
    assert pearson(y, x) == pytest.approx(r, abs=1e-9)
    assert pearson(3.0 * x + 7.0, y) == pytest.approx(r, abs=1e-6)


def test_auc_matches_bruteforce(rng):
    for _ in range(50):
        c = np.round(rng.normal(0.3, 1, rng.integers(1, 30)), 1)
        d = np.round(rng.normal(0, 1, rng.integers(1, 30)), 1)
        assert auc_score(c, d) == pytest.approx(oracles.auc_bruteforce(c, d), abs=1e-12)
    assert auc_score([2, 3], [0, 1]) == 1.0
    assert auc_score([0, 1], [2, 3]) == 0.0


def test_welch_t_matches_formula(rng):
    a, b = rng.normal(1, 1, 30), rng.normal(0, 2, 50)
    t, p = welch_t(a, b)
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    assert t == pytest.approx((a.mean() - b.mean()) / math.sqrt(va + vb), rel=1e-12)
    assert 0 < p < 1
    with pytest.raises(VarianceUndefinedError):
        welch_t([1.0], [1.0, 2.0])


def test_separation_stats_single_value_group():
    st_ = separation_stats([0.9], [0.1, 0.2, 0.3])
    assert not st_.t_defined and math.isnan(st_.t)
    assert st_.auc == 1.0


def test_planted_collision_is_separated(rng):
    for pos in (1, 3, 5):
        t = planted_collision_trace(60, pos, rng, samples_per_cycle=25)
        rep = attack_trace(t, pos)
        assert len(rep.coefficients) == 360
        assert rep.stats.auc >= 0.99
        assert rep.stats.n_common == 60 and rep.stats.n_different == 300


def test_correlate_all_is_label_free(rng):
    """Coefficients depend on the samples only; labels just annotate them."""
    params = inspect.signature(correlate_all).parameters
    assert list(params)[:2] == ["profile", "slots"]
    t = planted_collision_trace(20, 3, rng, samples_per_cycle=4)
    slots = slice_slots(compress(t))
    prof = average_profile(slots, 3)
    unlabeled = correlate_all(prof, slots)
    shuffled = rng.permutation(np.arange(120) % 6 == 0)
    labeled = correlate_all(prof, slots, labels=shuffled)
    assert unlabeled.labels is None and unlabeled.stats is None
    assert np.array_equal(unlabeled.coefficients, labeled.coefficients)
    stripped = Trace(t.samples, t.samples_per_cycle)
    rep = attack_trace(stripped, 3)
    assert np.array_equal(rep.coefficients, unlabeled.coefficients)
    assert rep.labels is None
    assert set(rep.to_csv().splitlines()[1].split(",")[-1:]) == {""}


def test_constant_window_recorded_as_missing():
    levels = np.ones((2, 54))
    levels[:, :9] = np.arange(9)
    rep = correlate_all(average_profile(levels, 1), levels)
    assert rep.missing == 10
    assert "nan" in rep.to_csv()
    assert rep.to_dict()["coefficients"][1] is None


def test_report_csv_columns(rng):
    t = planted_collision_trace(3, 2, rng, samples_per_cycle=2)
    lines = attack_trace(t, 2).to_csv().splitlines()
    assert lines[0] == "window_index,slot,position,coefficient,label"
    assert len(lines) == 1 + 18
    assert lines[2].startswith("1,0,2,") and lines[2].endswith(",common")


def test_collision_coefficients_repeated_product():
    f = FieldId.B233
    rng = np.random.default_rng(0)
    a, b, c, d, f_, g = (FieldElement.random(f, rng) for _ in range(6))
    model = LeakageModel(samples_per_cycle=4)
    # e = b makes mult3 the very same product as mult1: identical noiseless profile
    k = collision_coefficients(a, b, c, d, b, f_, g, model, 1)
    assert k[0] == pytest.approx(1.0, abs=1e-12)
    assert all(-1 <= v <= 1 for v in k)


def test_mult_experiment_shapes_and_csv():
    model = LeakageModel(samples_per_cycle=8)
    res = mult_collision_experiments(model, 5, 11)
    assert [r.bit_length for r in res] == [233, 283]
    assert all(len(r.K1) == 5 for r in res)
    text = collision_csv(res)
    lines = text.splitlines()
    assert lines[0] == "repetition,K1,K2,K3,K4,bitlength"
    assert len(lines) == 11
    assert lines[1].endswith(",233") and lines[-1].endswith(",283")
    again = collision_csv(mult_collision_experiments(model, 5, 11))
    assert again == text
    sep = res[0].separation()
    assert 0.0 <= sep.auc <= 1.0
    assert res[0].to_dict()["separation_K1_vs_rest"]["n_common"] == 5


def test_mult_experiment_rejects_zero_reps():
    with pytest.raises(ValueError):
        mult_collision_experiment(FieldId.B233, LeakageModel(), 0, 1)


def test_module_exports_documented_names():
    for name in ("compress", "pearson", "attack_trace", "mult_collision_experiment"):
        assert getattr(hcca, name).__doc__
