"""Cycle model of the flexible 4-segment Karatsuba field multiplier.

Both operands are cut into four 71-bit segments. One 71x71 partial product
is formed per clock cycle and folded into a reduced accumulator, so a field
product takes nine cycles for either field. ``mul_karatsuba`` returns the
accumulator/partial-product state of every cycle; the leakage simulator
consumes those states.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .gf2m import FieldElement, FieldId, _check_same, clmul, reduce_int

SEGMENT_BITS = 71
NUM_SEGMENTS = 4
NUM_CYCLES = 9
_SEG_MASK = (1 << SEGMENT_BITS) - 1


@dataclass(frozen=True)
class SegmentedOperand:
    segments: tuple[int, int, int, int]  # (A0, A1, A2, A3), A0 least significant
    field: FieldId

    def reassemble(self) -> FieldElement:
        v = 0
        for i, s in enumerate(self.segments):
            v |= s << (i * SEGMENT_BITS)
        return FieldElement(self.field, v)


def segment(a: FieldElement) -> SegmentedOperand:
    v = a.bits
    segs = tuple((v >> (i * SEGMENT_BITS)) & _SEG_MASK for i in range(NUM_SEGMENTS))
    return SegmentedOperand(segs, a.field)


@dataclass(frozen=True)
class PlanStep:
    left: frozenset[int]  # segment indices XORed into the left partial operand
    right: frozenset[int]
    folds: tuple[int, ...]  # bit offsets at which the partial product is XORed in


@dataclass(frozen=True)
class PartialProductPlan:
    steps: tuple[PlanStep, ...]

    def __post_init__(self):
        if len(self.steps) != NUM_CYCLES:
            raise ValueError(f"plan must have {NUM_CYCLES} steps, got {len(self.steps)}")
        for st in self.steps:
            if not st.left or not st.right:
                raise ValueError("empty operand combination in plan step")
            if not st.left <= {0, 1, 2, 3} or not st.right <= {0, 1, 2, 3}:
                raise ValueError("segment index out of range")
            if any(o < 0 or o % SEGMENT_BITS for o in st.folds):
                raise ValueError("fold offsets must be non-negative multiples of 71")

    def __len__(self):
        return len(self.steps)

    def to_text(self) -> str:
        lines = []
        for i, st in enumerate(self.steps):
            lines.append(
                f"cycle {i}: L={_fmt_set(st.left)} R={_fmt_set(st.right)} "
                f"fold={_fmt_set(st.folds)}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PartialProductPlan":
        steps = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            m = _PLAN_LINE.fullmatch(line)
            if m is None:
                raise ValueError(f"malformed plan line: {raw!r}")
            idx = int(m["cycle"])
            if idx in steps:
                raise ValueError(f"duplicate cycle {idx}")
            steps[idx] = PlanStep(
                frozenset(_parse_set(m["left"])),
                frozenset(_parse_set(m["right"])),
                tuple(sorted(_parse_set(m["fold"]))),
            )
        if sorted(steps) != list(range(len(steps))):
            raise ValueError("plan cycles must be numbered 0..n-1")
        return cls(tuple(steps[i] for i in range(len(steps))))


_PLAN_LINE = re.compile(
    r"cycle\s+(?P<cycle>\d+)\s*:\s*L=\{(?P<left>[\d,\s]*)\}\s+"
    r"R=\{(?P<right>[\d,\s]*)\}\s+fold=\{(?P<fold>[\d,\s]*)\}"
)


def _fmt_set(values) -> str:
    return "{" + ",".join(str(v) for v in sorted(values)) + "}"


def _parse_set(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(" ", "").split(",") if tok]


def _step(idx: set[int], folds_in_segments: tuple[int, ...]) -> PlanStep:
    s = frozenset(idx)
    return PlanStep(s, s, tuple(k * SEGMENT_BITS for k in sorted(folds_in_segments)))


def default_plan() -> PartialProductPlan:
    """Two-level Karatsuba: low half, high half, then the cross term.

    With P0=A0B0, P1=A1B1, P2=(A0+A1)(B0+B1), P3..P5 the same on (A2, A3) and
    P6..P8 on the half sums, each product lands at the segment offsets below
    (the Karatsuba corrections are the extra placements).
    """
    return PartialProductPlan((
        _step({0}, (0, 1, 2, 3)),
        _step({1}, (1, 2, 3, 4)),
        _step({0, 1}, (1, 3)),
        _step({2}, (2, 3, 4, 5)),
        _step({3}, (3, 4, 5, 6)),
        _step({2, 3}, (3, 5)),
        _step({0, 2}, (2, 3)),
        _step({1, 3}, (3, 4)),
        _step({0, 1, 2, 3}, (3,)),
    ))


@dataclass(frozen=True)
class MultCycleState:
    cycle_index: int
    partial_left: int
    partial_right: int
    partial_product: int
    accumulator: FieldElement


def partial_mul_71(x: int, y: int) -> int:
    """Classical 71x71 carry-less product."""
    if x < 0 or y < 0 or x >> SEGMENT_BITS or y >> SEGMENT_BITS:
        raise ValueError("partial multiplier operands must fit in 71 bits")
    return clmul(x, y)


def _combine(segs: tuple[int, ...], idx: frozenset[int]) -> int:
    v = 0
    for i in idx:
        v ^= segs[i]
    return v


def mul_karatsuba(
    a: FieldElement, b: FieldElement, plan: PartialProductPlan | None = None
) -> tuple[FieldElement, list[MultCycleState]]:
    field = _check_same(a, b)
    plan = plan or _DEFAULT
    sa = segment(a).segments
    sb = segment(b).segments
    acc = 0
    states = []
    for c, st in enumerate(plan.steps):
        x = _combine(sa, st.left)
        y = _combine(sb, st.right)
        pp = partial_mul_71(x, y)
        folded = 0
        for off in st.folds:
            folded ^= pp << off
        # accumulate and reduce in the same cycle
        acc = reduce_int(acc ^ folded, field)
        states.append(MultCycleState(c, x, y, pp, FieldElement(field, acc)))
    return FieldElement(field, acc), states


def evaluate_plan(a: FieldElement, b: FieldElement, plan: PartialProductPlan,
                  upto: int | None = None) -> FieldElement:
    """Reduced XOR-fold of plan steps 0..upto, recomputed from scratch."""
    field = _check_same(a, b)
    sa = segment(a).segments
    sb = segment(b).segments
    total = 0
    last = len(plan.steps) - 1 if upto is None else upto
    for st in plan.steps[: last + 1]:
        pp = clmul(_combine(sa, st.left), _combine(sb, st.right))
        for off in st.folds:
            total ^= pp << off
    return FieldElement(field, reduce_int(total, field))


_DEFAULT = default_plan()
