"""Synthetic power traces driven by the multiplier cycle model.

Per clock cycle the noiseless power level is

    alpha * HD(acc[c-1], acc[c]) + beta * HW(partial_product[c])
        + gamma * HD(square_reg_before, square_reg_after)

spread over ``samples_per_cycle`` samples by a fixed template and topped up
with white Gaussian noise. This is a declared linear HD/HW model standing in
for a measured device; conclusions drawn from these traces hold under the
model only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Iterable

import numpy as np

from .curve import (
    AffinePoint,
    CurveParams,
    MULTS_PER_STEP,
    LadderTranscript,
    montgomery_kp,
)
from .gf2m import FieldElement
from .karatsuba import NUM_CYCLES, PartialProductPlan, default_plan, mul_karatsuba

CYCLES_PER_SLOT = MULTS_PER_STEP * NUM_CYCLES  # 54
MODEL_NOTE = "simulated: linear HD/HW leakage model, not a device measurement"


def hamming_weight(v) -> int:
    if isinstance(v, FieldElement):
        v = v.bits
    if v < 0:
        raise ValueError("bit vector must be non-negative")
    return v.bit_count()


def hamming_distance(u, v, width: int | None = None) -> int:
    """Popcount of u XOR v. FieldElements must share a field; ints may carry a width."""
    if isinstance(u, FieldElement) or isinstance(v, FieldElement):
        if not (isinstance(u, FieldElement) and isinstance(v, FieldElement)):
            raise ValueError("cannot mix field elements and raw bit vectors")
        if u.field is not v.field:
            raise ValueError("bit vectors of different lengths")
        return (u.bits ^ v.bits).bit_count()
    if width is not None and (u >> width or v >> width):
        raise ValueError(f"bit vector longer than {width} bits")
    return (u ^ v).bit_count()


def raised_cosine(n: int) -> np.ndarray:
    """Single-peak template with unit mean."""
    if n < 1:
        raise ValueError("samples_per_cycle must be >= 1")
    if n == 1:
        return np.ones(1)
    j = np.arange(n)
    w = 1.0 - np.cos(2.0 * np.pi * (j + 0.5) / n)
    return w / w.mean()


@dataclass(frozen=True)
class LeakageModel:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    sigma: float = 0.0
    samples_per_cycle: int = 625
    shape: tuple[float, ...] | None = None  # None selects the raised cosine

    def __post_init__(self):
        if self.samples_per_cycle < 1:
            raise ValueError("samples_per_cycle must be >= 1")
        if self.shape is not None:
            if len(self.shape) != self.samples_per_cycle:
                raise ValueError("shape must have samples_per_cycle entries")
            if any(w < 0 for w in self.shape):
                raise ValueError("shape weights must be non-negative")
        if self.alpha == 0 and self.beta == 0 and self.gamma == 0:
            raise ValueError("at least one of alpha, beta, gamma must be nonzero")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def weights(self) -> np.ndarray:
        if self.shape is None:
            return raised_cosine(self.samples_per_cycle)
        return np.asarray(self.shape, dtype=float)

    def scaled(self, c: float) -> "LeakageModel":
        return LeakageModel(self.alpha * c, self.beta * c, self.gamma * c,
                            self.sigma, self.samples_per_cycle, self.shape)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "sigma": self.sigma,
            "samples_per_cycle": self.samples_per_cycle,
            "shape": "raised-cosine" if self.shape is None else list(self.shape),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LeakageModel":
        shape = d.get("shape", "raised-cosine")
        return cls(
            alpha=float(d["alpha"]),
            beta=float(d["beta"]),
            gamma=float(d["gamma"]),
            sigma=float(d["sigma"]),
            samples_per_cycle=int(d["samples_per_cycle"]),
            shape=None if shape == "raised-cosine" else tuple(float(w) for w in shape),
        )


@dataclass
class Annotation:
    start: int  # first cycle
    stop: int  # one past the last cycle
    label: str
    tags: dict[str, Any] = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "label": self.label, "tags": self.tags}

    @classmethod
    def from_dict(cls, d: dict) -> "Annotation":
        return cls(int(d["start"]), int(d["stop"]), str(d["label"]), dict(d.get("tags", {})))


@dataclass(eq=False)
class Trace:
    samples: np.ndarray
    samples_per_cycle: int
    annotations: list[Annotation] = dc_field(default_factory=list)
    metadata: dict[str, Any] = dc_field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        self.validate()

    @property
    def num_cycles(self) -> int:
        return len(self.samples) // self.samples_per_cycle

    def cycles(self) -> np.ndarray:
        """Samples reshaped to (num_cycles, samples_per_cycle)."""
        return self.samples.reshape(self.num_cycles, self.samples_per_cycle)

    def validate(self) -> None:
        if self.samples_per_cycle < 1:
            raise ValueError("samples_per_cycle must be >= 1")
        if len(self.samples) % self.samples_per_cycle:
            raise ValueError("sample count is not a whole number of cycles")
        prev_stop = None
        for ann in sorted(self.annotations, key=lambda a: (a.start, a.stop)):
            if not 0 <= ann.start < ann.stop <= self.num_cycles:
                raise ValueError(f"annotation [{ann.start}, {ann.stop}) out of bounds")
            if prev_stop is not None and ann.start < prev_stop:
                raise ValueError(f"annotation [{ann.start}, {ann.stop}) overlaps its predecessor")
            prev_stop = ann.stop

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.samples_per_cycle == other.samples_per_cycle
            and self.samples.shape == other.samples.shape
            and np.array_equal(self.samples.view(np.uint64), other.samples.view(np.uint64))
            and [a.to_dict() for a in self.annotations] == [a.to_dict() for a in other.annotations]
            and self.metadata == other.metadata
        )


def as_rng(rng) -> tuple[np.random.Generator, int | None]:
    """Accept a seed or a Generator; return the Generator and the seed if known."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    seed = int(rng)
    return np.random.default_rng(seed), seed


def mult_cycle_levels(a: FieldElement, b: FieldElement, model: LeakageModel,
                      plan: PartialProductPlan | None = None) -> np.ndarray:
    """Noiseless level of each of the nine multiplier cycles (no squaring unit)."""
    _, states = mul_karatsuba(a, b, plan)
    levels = np.empty(len(states))
    prev = 0  # accumulator is cleared before every product
    for c, st in enumerate(states):
        acc = st.accumulator.bits
        levels[c] = model.alpha * (prev ^ acc).bit_count() + model.beta * st.partial_product.bit_count()
        prev = acc
    return levels


def render(levels: np.ndarray, model: LeakageModel, rng: np.random.Generator | None) -> np.ndarray:
    """Spread per-cycle levels over the template and add noise."""
    samples = np.multiply.outer(np.asarray(levels, dtype=float), model.weights).ravel()
    if model.sigma > 0:
        if rng is None:
            raise ValueError("noise requires a random generator")
        samples = samples + rng.normal(0.0, model.sigma, samples.shape)
    return samples


def _base_metadata(kind: str, field_name: str, model: LeakageModel, seed, plan) -> dict:
    return {
        "kind": kind,
        "field": field_name,
        "model": model.to_dict(),
        "seed": seed,
        "plan": (plan or default_plan()).to_text(),
        "note": MODEL_NOTE,
    }


def simulate_mult_trace(a: FieldElement, b: FieldElement, model: LeakageModel, rng,
                        plan: PartialProductPlan | None = None) -> Trace:
    """Nine-cycle trace of one field multiplication."""
    return simulate_mult_batch([(a, b)], model, rng, plan=plan)


def simulate_mult_batch(pairs: Iterable[tuple[FieldElement, FieldElement]], model: LeakageModel,
                        rng, plan: PartialProductPlan | None = None,
                        names: Iterable[tuple[str, str]] | None = None) -> Trace:
    """Back-to-back multiplications, one nine-cycle annotation each."""
    gen, seed = as_rng(rng)
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no multiplications to simulate")
    names = list(names) if names is not None else [None] * len(pairs)
    field = pairs[0][0].field
    levels = []
    annotations = []
    for i, ((a, b), nm) in enumerate(zip(pairs, names)):
        levels.append(mult_cycle_levels(a, b, model, plan))
        tags = {"index": i}
        if nm is not None:
            tags["operands"] = list(nm)
        annotations.append(Annotation(i * NUM_CYCLES, (i + 1) * NUM_CYCLES, "mult", tags))
    samples = render(np.concatenate(levels), model, gen)
    meta = _base_metadata("mult", field.name, model, seed, plan)
    return Trace(samples, model.samples_per_cycle, annotations, meta)


def kp_cycle_levels(transcript: LadderTranscript, model: LeakageModel,
                    plan: PartialProductPlan | None = None) -> np.ndarray:
    """Noiseless per-cycle levels of the ladder main loop from its transcript."""
    n_slots = len(transcript.steps)
    levels = np.zeros(n_slots * CYCLES_PER_SLOT)
    sq_reg = transcript.square_register.bits if transcript.square_register is not None else 0
    for s, step in enumerate(transcript.steps):
        base = s * CYCLES_PER_SLOT
        for op in step.mults:
            off = base + (op.position - 1) * NUM_CYCLES
            levels[off:off + NUM_CYCLES] = mult_cycle_levels(op.left, op.right, model, plan)
        for sq in sorted(step.squarings, key=lambda q: q.cycle):
            out = sq.result.bits
            levels[base + sq.cycle] += model.gamma * (sq_reg ^ out).bit_count()
            sq_reg = out
    return levels


def slot_annotations(transcript: LadderTranscript) -> list[Annotation]:
    anns = []
    for s, step in enumerate(transcript.steps):
        mults = [{"position": op.position, "operand": op.operand} for op in step.mults]
        anns.append(Annotation(
            s * CYCLES_PER_SLOT, (s + 1) * CYCLES_PER_SLOT, "slot",
            {"slot": s, "bit_index": step.bit_index, "mults": mults},
        ))
    return anns


def simulate_kp_trace(k: int, P: AffinePoint, C: CurveParams, model: LeakageModel, rng,
                      plan: PartialProductPlan | None = None) -> Trace:
    """Main-loop trace of a ladder run: 54 cycles (six products) per scalar bit."""
    gen, seed = as_rng(rng)
    _, transcript = montgomery_kp(k, P, C)
    levels = kp_cycle_levels(transcript, model, plan)
    samples = render(levels, model, gen)
    meta = _base_metadata("kp", C.field.name, model, seed, plan)
    meta.update({
        "curve": C.name,
        "slots": len(transcript.steps),
        "cycles_per_slot": CYCLES_PER_SLOT,
        "cycles_per_mult": NUM_CYCLES,
        "scalar_bits": transcript.scalar_bits,
    })
    return Trace(samples, model.samples_per_cycle, slot_annotations(transcript), meta)


def noise_residual_check(residual: np.ndarray, sigma: float) -> bool:
    """|mean| < 4 sigma / sqrt(n) and variance within 10% of sigma^2."""
    n = residual.size
    return abs(residual.mean()) < 4 * sigma / math.sqrt(n) and abs(residual.var() - sigma**2) <= 0.1 * sigma**2
