"""Horizontal collision correlation analysis on (simulated or ingested) traces.

Pipeline: compress each clock cycle to the mean squared sample, cut the
main loop into 54-cycle slots, average the 9-cycle window of one
multiplication position over all slots, and correlate that profile with
every multiplication window. Analysis functions only ever see trace
samples; ground-truth labels are read from annotations afterwards, to score
the separation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Sequence

import numpy as np
from scipy import stats

from .gf2m import FieldElement, FieldId
from .karatsuba import NUM_CYCLES, PartialProductPlan
from .leakage import (
    CYCLES_PER_SLOT,
    Annotation,
    LeakageModel,
    Trace,
    as_rng,
    render,
    simulate_mult_batch,
)

MULTS_PER_SLOT = CYCLES_PER_SLOT // NUM_CYCLES


class UndefinedCorrelationError(ValueError):
    """Pearson correlation of a constant sequence."""


class VarianceUndefinedError(ValueError):
    """Welch t needs at least two values per group."""


@dataclass
class CompressedTrace:
    values: np.ndarray
    samples_per_cycle: int
    annotations: list[Annotation] = dc_field(default_factory=list)
    source: dict[str, Any] = dc_field(default_factory=dict)  # metadata of the raw trace

    def __len__(self):
        return len(self.values)


def compress(t: Trace) -> CompressedTrace:
    """Mean of squared samples per clock cycle."""
    if t.num_cycles == 0:
        raise ValueError("cannot compress an empty trace")
    x = t.cycles()
    # numpy reduces the contiguous axis pairwise, keeping rounding error ~log(N)
    values = np.mean(x * x, axis=1)
    return CompressedTrace(values, t.samples_per_cycle, list(t.annotations), dict(t.metadata))


def slice_slots(ct: CompressedTrace | np.ndarray, slot_len: int = CYCLES_PER_SLOT,
                truncate: bool = False) -> np.ndarray:
    """Consecutive slots as an (n_slots, slot_len) array."""
    v = ct.values if isinstance(ct, CompressedTrace) else np.asarray(ct, dtype=float)
    if slot_len < 1:
        raise ValueError("slot_len must be positive")
    n, rem = divmod(len(v), slot_len)
    if rem and not truncate:
        raise ValueError(f"{len(v)} cycles is not a multiple of the slot length {slot_len}")
    if n == 0:
        raise ValueError("trace shorter than one slot")
    return v[: n * slot_len].reshape(n, slot_len)


def window_bounds(mult_index: int) -> tuple[int, int]:
    """0-based [start, stop) cycles of multiplication ``mult_index`` (1..6) in a slot."""
    if not 1 <= mult_index <= MULTS_PER_SLOT:
        raise ValueError(f"multiplication index must be in 1..{MULTS_PER_SLOT}")
    return (mult_index - 1) * NUM_CYCLES, mult_index * NUM_CYCLES


@dataclass(frozen=True)
class MultProfile:
    values: np.ndarray
    position: int

    def __post_init__(self):
        if len(self.values) != NUM_CYCLES:
            raise ValueError("a multiplication profile has exactly 9 values")


def average_profile(slots: np.ndarray, mult_index: int) -> MultProfile:
    slots = np.asarray(slots, dtype=float)
    if slots.ndim != 2 or slots.shape[0] == 0:
        raise ValueError("need at least one slot")
    lo, hi = window_bounds(mult_index)
    return MultProfile(slots[:, lo:hi].mean(axis=0), mult_index)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation, two-pass (center first, then accumulate)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D sequences of equal length")
    if len(x) < 2:
        raise ValueError("pearson needs at least two values")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant sequence")
    dx = x - x.mean()
    dy = y - y.mean()
    den = math.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    if den == 0.0 or not math.isfinite(den):
        raise UndefinedCorrelationError("correlation undefined: variance underflows or overflows")
    r = float(np.dot(dx, dy) / den)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class SeparationStats:
    n_common: int
    n_different: int
    mean_common: float
    mean_different: float
    t: float  # NaN when undefined
    p: float
    auc: float
    t_defined: bool = True

    def to_dict(self) -> dict:
        return {k: _json_num(v) for k, v in self.__dict__.items()}


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise VarianceUndefinedError("Welch t needs at least two values per group")
    res = stats.ttest_ind(a, b, equal_var=False)
    return float(res.statistic), float(res.pvalue)


def auc_score(common: Sequence[float], different: Sequence[float]) -> float:
    """P(common > different) + P(tie)/2 from the rank-sum statistic."""
    common = np.asarray(common, dtype=float)
    different = np.asarray(different, dtype=float)
    n1, n2 = len(common), len(different)
    if n1 == 0 or n2 == 0:
        raise ValueError("both groups must be nonempty")
    ranks = stats.rankdata(np.concatenate([common, different]))
    u = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n2))


def separation_stats(group_common: Sequence[float], group_different: Sequence[float]) -> SeparationStats:
    c = np.asarray(group_common, dtype=float)
    d = np.asarray(group_different, dtype=float)
    if len(c) == 0 or len(d) == 0:
        raise ValueError("both groups must be nonempty")
    auc = auc_score(c, d)
    try:
        t, p = welch_t(c, d)
        defined = True
    except VarianceUndefinedError:
        t, p, defined = math.nan, math.nan, False
    return SeparationStats(len(c), len(d), float(c.mean()), float(d.mean()), t, p, auc, defined)


@dataclass
class AttackReport:
    position: int  # multiplication position of the averaged profile
    profile: np.ndarray
    coefficients: np.ndarray  # NaN marks a window whose correlation is undefined
    slot: np.ndarray
    window_position: np.ndarray
    labels: np.ndarray | None = None  # True = same position as the profile
    stats: SeparationStats | None = None
    config: dict[str, Any] = dc_field(default_factory=dict)

    @property
    def missing(self) -> int:
        return int(np.isnan(self.coefficients).sum())

    def label_names(self) -> list[str]:
        if self.labels is None:
            return [""] * len(self.coefficients)
        return ["common" if v else "different" for v in self.labels]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window_index", "slot", "position", "coefficient", "label"])
        for i, (s, p, c, lab) in enumerate(zip(self.slot, self.window_position,
                                               self.coefficients, self.label_names())):
            w.writerow([i, int(s), int(p), "nan" if math.isnan(c) else repr(float(c)), lab])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "position": self.position,
            "profile": [float(v) for v in self.profile],
            "windows": len(self.coefficients),
            "missing": self.missing,
            "coefficients": [_json_num(c) for c in self.coefficients],
            "labels": None if self.labels is None else self.label_names(),
            "stats": None if self.stats is None else self.stats.to_dict(),
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _json_num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return None if math.isnan(v) or math.isinf(v) else v


def correlate_all(profile: MultProfile, slots: np.ndarray, labels: Sequence[bool] | None = None,
                  config: dict | None = None) -> AttackReport:
    """Pearson coefficient of ``profile`` against every 9-cycle window, in window order."""
    slots = np.asarray(slots, dtype=float)
    n_slots = slots.shape[0]
    windows = slots.reshape(n_slots * MULTS_PER_SLOT, NUM_CYCLES)
    coeffs = np.empty(len(windows))
    for i, w in enumerate(windows):
        try:
            coeffs[i] = pearson(profile.values, w)
        except UndefinedCorrelationError:
            coeffs[i] = math.nan
    slot_idx = np.repeat(np.arange(n_slots), MULTS_PER_SLOT)
    pos = np.tile(np.arange(1, MULTS_PER_SLOT + 1), n_slots)
    report = AttackReport(profile.position, profile.values, coeffs, slot_idx, pos,
                          config=dict(config or {}))
    if labels is not None:
        lab = np.asarray(labels, dtype=bool)
        if len(lab) != len(coeffs):
            raise ValueError("one label per window is required")
        report.labels = lab
        ok = ~np.isnan(coeffs)
        common, different = coeffs[ok & lab], coeffs[ok & ~lab]
        if len(common) and len(different):
            report.stats = separation_stats(common, different)
    return report


def window_labels(annotations: Sequence[Annotation], position: int, n_slots: int) -> np.ndarray | None:
    """Ground truth from slot annotations: True where a window shares ``position``.

    Returns None when the trace carries no slot annotations.
    """
    slot_anns = [a for a in annotations if a.label == "slot"]
    if not slot_anns:
        return None
    labels = np.zeros(n_slots * MULTS_PER_SLOT, dtype=bool)
    for a in slot_anns:
        s = a.start // CYCLES_PER_SLOT
        if s >= n_slots:
            continue
        for m in a.tags.get("mults", []):
            p = int(m["position"])
            labels[s * MULTS_PER_SLOT + p - 1] = p == position
    return labels


def attack_trace(t: Trace, position: int, truncate: bool = False) -> AttackReport:
    """Full pipeline on one trace: compress, slot, profile, correlate, score."""
    ct = compress(t)
    slots = slice_slots(ct, truncate=truncate)
    profile = average_profile(slots, position)
    labels = window_labels(ct.annotations, position, slots.shape[0])
    config = {
        "position": position,
        "slot_len": CYCLES_PER_SLOT,
        "truncate": truncate,
        "samples_per_cycle": t.samples_per_cycle,
        "trace": {k: t.metadata.get(k) for k in ("kind", "field", "curve", "seed", "model", "note")
                  if k in t.metadata},
    }
    return correlate_all(profile, slots, labels, config)


# --- planted-collision fixture ----------------------------------------------

def planted_collision_trace(n_slots: int, position: int, rng, samples_per_cycle: int = 625,
                            jitter: float = 0.05) -> Trace:
    """Trace whose ``position`` windows share one 9-cycle shape; all others are random.

    Separability is built in, so the pipeline must score it near AUC = 1.
    """
    gen, seed = as_rng(rng)
    lo, hi = window_bounds(position)
    base = gen.uniform(1.0, 2.0, NUM_CYCLES)
    levels = gen.uniform(1.0, 2.0, (n_slots, CYCLES_PER_SLOT))
    levels[:, lo:hi] = base + gen.normal(0.0, jitter, (n_slots, NUM_CYCLES))
    model = LeakageModel(1.0, 0.0, 0.0, 0.0, samples_per_cycle)
    samples = render(levels.ravel(), model, None)
    anns = [
        Annotation(s * CYCLES_PER_SLOT, (s + 1) * CYCLES_PER_SLOT, "slot",
                   {"slot": s, "mults": [{"position": p, "operand": "planted" if p == position else None}
                                         for p in range(1, MULTS_PER_SLOT + 1)]})
        for s in range(n_slots)
    ]
    meta = {"kind": "planted", "seed": seed, "planted_position": position, "jitter": jitter,
            "samples_per_cycle": samples_per_cycle, "note": "synthetic planted-collision fixture"}
    return Trace(samples, samples_per_cycle, anns, meta)


# --- multiplier-only collision experiment -----------------------------------

@dataclass
class CollisionExperimentResult:
    field: FieldId
    repetitions: int
    K1: np.ndarray  # mult1 vs mult3, common operand a
    K2: np.ndarray  # mult2 vs mult4
    K3: np.ndarray  # mult1 vs mult2
    K4: np.ndarray  # mult1 vs mult4
    config: dict[str, Any] = dc_field(default_factory=dict)

    @property
    def bit_length(self) -> int:
        return self.field.degree

    def separation(self) -> SeparationStats:
        """K1 against the pooled different-operand coefficients K2..K4."""
        k1 = self.K1[~np.isnan(self.K1)]
        rest = np.concatenate([self.K2, self.K3, self.K4])
        return separation_stats(k1, rest[~np.isnan(rest)])

    def rows(self):
        for i in range(self.repetitions):
            yield (i, self.K1[i], self.K2[i], self.K3[i], self.K4[i], self.bit_length)

    def to_dict(self) -> dict:
        return {
            "field": self.field.name,
            "bit_length": self.bit_length,
            "repetitions": self.repetitions,
            "K1": [_json_num(v) for v in self.K1],
            "K2": [_json_num(v) for v in self.K2],
            "K3": [_json_num(v) for v in self.K3],
            "K4": [_json_num(v) for v in self.K4],
            "separation_K1_vs_rest": self.separation().to_dict(),
            "config": self.config,
        }


def _safe_pearson(x, y) -> float:
    try:
        return pearson(x, y)
    except UndefinedCorrelationError:
        return math.nan


def collision_coefficients(a, b, c, d, e, f, g, model: LeakageModel, rng,
                           plan: PartialProductPlan | None = None) -> tuple[float, float, float, float]:
    """K1..K4 for mult1=a*b, mult2=c*d, mult3=a*e, mult4=f*g."""
    gen, _ = as_rng(rng)
    t = simulate_mult_batch([(a, b), (c, d), (a, e), (f, g)], model, gen, plan=plan,
                            names=[("a", "b"), ("c", "d"), ("a", "e"), ("f", "g")])
    prof = compress(t).values.reshape(4, NUM_CYCLES)
    m1, m2, m3, m4 = prof
    return (_safe_pearson(m1, m3), _safe_pearson(m2, m4),
            _safe_pearson(m1, m2), _safe_pearson(m1, m4))


def mult_collision_experiment(field: FieldId, model: LeakageModel, repetitions: int = 20, rng=None,
                              plan: PartialProductPlan | None = None) -> CollisionExperimentResult:
    """Fresh random operands a..g per repetition; see ``collision_coefficients``."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    gen, seed = as_rng(rng)
    ks = np.empty((repetitions, 4))
    for i in range(repetitions):
        ops = [FieldElement.random(field, gen) for _ in range(7)]
        ks[i] = collision_coefficients(*ops, model=model, rng=gen, plan=plan)
    config = {"seed": seed, "model": model.to_dict(), "note": "simulated: linear HD/HW leakage model"}
    return CollisionExperimentResult(field, repetitions, ks[:, 0], ks[:, 1], ks[:, 2], ks[:, 3], config)


def mult_collision_experiments(model: LeakageModel, repetitions: int = 20, rng=None,
                               fields: Sequence[FieldId] = (FieldId.B233, FieldId.B283),
                               plan: PartialProductPlan | None = None) -> list[CollisionExperimentResult]:
    """The experiment for each operand length, sharing one random stream."""
    gen, seed = as_rng(rng)
    out = []
    for fid in fields:
        res = mult_collision_experiment(fid, model, repetitions, gen, plan)
        res.config["seed"] = seed
        out.append(res)
    return out


def collision_csv(results: Sequence[CollisionExperimentResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["repetition", "K1", "K2", "K3", "K4", "bitlength"])
    for res in results:
        for rep, *ks, bits in res.rows():
            w.writerow([rep] + ["nan" if math.isnan(k) else repr(float(k)) for k in ks] + [bits])
    return buf.getvalue()
