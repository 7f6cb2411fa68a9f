"""Binary-curve point arithmetic: affine group law, double-and-add, and the
López-Dahab Montgomery ladder with a per-iteration multiplication transcript.

Curves are y^2 + xy = x^3 + a*x^2 + b over GF(2^l). Domain parameters for
B-233 and B-283 ship as text files in ``hccalab/data``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field as dc_field
from importlib import resources

from .gf2m import (
    FieldElement,
    FieldId,
    clmul,
    inverse_int,
    reduce_int,
    spread,
)


class DegenerateLadderError(ArithmeticError):
    """The ladder hit a case its y-recovery formula cannot handle (Z2 = 0 or x = 0)."""


@dataclass(frozen=True)
class AffinePoint:
    x: FieldElement | None = None
    y: FieldElement | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("both coordinates must be given, or neither (infinity)")
        if self.x is not None and self.x.field is not self.y.field:
            raise ValueError("coordinates from different fields")

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        if self.is_infinity:
            return "AffinePoint(INFINITY)"
        return f"AffinePoint(x=0x{self.x.hex()}, y=0x{self.y.hex()})"


INFINITY = AffinePoint()


@dataclass(frozen=True)
class CurveParams:
    name: str
    field: FieldId
    a: FieldElement
    b: FieldElement
    G: AffinePoint
    order: int
    cofactor: int

    @property
    def order_hex_digits(self) -> int:
        return -(-self.order.bit_length() // 4)


def parse_params(text: str) -> CurveParams:
    """Parse the ``key = hex`` parameter format (field, a, b, Gx, Gy, order, cofactor)."""
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed parameter line: {raw!r}")
        kv[key.strip()] = value.strip()
    missing = {"field", "a", "b", "Gx", "Gy", "order", "cofactor"} - kv.keys()
    if missing:
        raise ValueError(f"missing curve parameters: {sorted(missing)}")
    fid = FieldId.parse(kv["field"])
    elem = functools.partial(FieldElement.from_hex, fid)
    return CurveParams(
        name=fid.name,
        field=fid,
        a=elem(kv["a"]),
        b=elem(kv["b"]),
        G=AffinePoint(elem(kv["Gx"]), elem(kv["Gy"])),
        order=int(kv["order"], 16),
        cofactor=int(kv["cofactor"], 16),
    )


@functools.lru_cache(maxsize=None)
def load_curve(name: str | FieldId) -> CurveParams:
    """Load and validate the bundled NIST parameters for B-233 or B-283."""
    fid = name if isinstance(name, FieldId) else FieldId.parse(name)
    text = resources.files("hccalab").joinpath("data", f"{fid.name.lower()}.txt").read_text()
    params = parse_params(text)
    validate_params(params)
    return params


def validate_params(C: CurveParams) -> None:
    if not is_on_curve(C.G, C):
        raise ValueError(f"{C.name}: base point is not on the curve")
    if C.order % 2 == 0:
        raise ValueError(f"{C.name}: order must be odd")
    if not kp_double_and_add(C.order, C.G, C).is_infinity:
        raise ValueError(f"{C.name}: order * G is not the point at infinity")


# --- int-level helpers; hot loops stay off FieldElement ---------------------

def _ops(fid: FieldId):
    def mul(u, v):
        return reduce_int(clmul(u, v), fid)

    def sqr(u):
        return reduce_int(spread(u), fid)

    def inv(u):
        return inverse_int(u, fid)

    return mul, sqr, inv


def is_on_curve(P: AffinePoint, C: CurveParams) -> bool:
    if P.is_infinity:
        return True
    if P.x.field is not C.field:
        return False
    mul, sqr, _ = _ops(C.field)
    x, y = P.x.bits, P.y.bits
    x2 = sqr(x)
    lhs = sqr(y) ^ mul(x, y)
    rhs = mul(x2, x) ^ mul(C.a.bits, x2) ^ C.b.bits
    return lhs == rhs


def negate(P: AffinePoint) -> AffinePoint:
    if P.is_infinity:
        return P
    return AffinePoint(P.x, P.x + P.y)


def _affine_double(x: int, y: int, a: int, fid: FieldId):
    if x == 0:
        return None
    mul, sqr, inv = _ops(fid)
    lam = x ^ mul(y, inv(x))
    x3 = sqr(lam) ^ lam ^ a
    y3 = sqr(x) ^ mul(lam, x3) ^ x3
    return x3, y3


def _affine_add(p, q, a: int, fid: FieldId):
    if p is None:
        return q
    if q is None:
        return p
    x1, y1 = p
    x2, y2 = q
    if x1 == x2:
        if y1 == y2:
            return _affine_double(x1, y1, a, fid)
        return None  # Q = -P
    mul, sqr, inv = _ops(fid)
    lam = mul(y1 ^ y2, inv(x1 ^ x2))
    x3 = sqr(lam) ^ lam ^ x1 ^ x2 ^ a
    y3 = mul(lam, x1 ^ x3) ^ x3 ^ y1
    return x3, y3


def _to_pair(P: AffinePoint):
    return None if P.is_infinity else (P.x.bits, P.y.bits)


def _from_pair(pair, fid: FieldId) -> AffinePoint:
    if pair is None:
        return INFINITY
    return AffinePoint(FieldElement(fid, pair[0]), FieldElement(fid, pair[1]))


def affine_add(P: AffinePoint, Q: AffinePoint, C: CurveParams) -> AffinePoint:
    return _from_pair(_affine_add(_to_pair(P), _to_pair(Q), C.a.bits, C.field), C.field)


def affine_double(P: AffinePoint, C: CurveParams) -> AffinePoint:
    if P.is_infinity:
        return P
    return _from_pair(_affine_double(P.x.bits, P.y.bits, C.a.bits, C.field), C.field)


def kp_double_and_add(k: int, P: AffinePoint, C: CurveParams) -> AffinePoint:
    """Left-to-right double-and-add in affine coordinates (reference for the ladder)."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    a, fid = C.a.bits, C.field
    base = _to_pair(P)
    acc = None
    for i in range(k.bit_length() - 1, -1, -1):
        acc = None if acc is None else _affine_double(acc[0], acc[1], a, fid)
        if (k >> i) & 1:
            acc = _affine_add(acc, base, a, fid)
    return _from_pair(acc, fid)


# --- Montgomery ladder --------------------------------------------------------

@dataclass(frozen=True)
class LadderState:
    X1: FieldElement
    Z1: FieldElement
    X2: FieldElement
    Z2: FieldElement
    T: FieldElement
    i: int  # bit index just processed; l-1 style "before loop" uses bit_length-1


@dataclass(frozen=True)
class MultOp:
    position: int  # 1..6 within the iteration
    left: FieldElement
    right: FieldElement
    operand: str | None = None  # "b" or "x" for the two constant-operand slots


@dataclass(frozen=True)
class SquareOp:
    cycle: int  # cycle within the 54-cycle slot where the squaring unit fires
    operand: FieldElement
    result: FieldElement


@dataclass(frozen=True)
class LadderStep:
    bit_index: int
    bit: int
    mults: tuple[MultOp, ...]
    squarings: tuple[SquareOp, ...]
    state: LadderState


@dataclass(frozen=True)
class LadderTranscript:
    field: FieldId
    scalar_bits: int
    initial: LadderState | None = None
    steps: tuple[LadderStep, ...] = dc_field(default_factory=tuple)
    # squaring-unit output register on loop entry (x^4 from initialization)
    square_register: FieldElement | None = None

    @property
    def num_mults(self) -> int:
        return sum(len(s.mults) for s in self.steps)


# Cycle (within a slot) at which the squaring unit produces each square.
# Z^2, Z^4, X^2, X^4 run alongside the first multiplication; the square of
# (M1 + M2) is available once M2 has finished, i.e. in the first cycle of M3.
SQUARE_CYCLES = (0, 1, 2, 3, 18)
MULTS_PER_STEP = 6
B_POSITION = 3
X_POSITION = 5


def _ladder(k: int, P: AffinePoint, C: CurveParams, record: bool):
    fid = C.field
    if k < 0:
        raise ValueError("scalar must be non-negative")
    if k == 0:
        return INFINITY, LadderTranscript(fid, 0)
    if P.is_infinity:
        raise ValueError("ladder input must be a finite point")
    if P.x.field is not fid:
        raise ValueError("point and curve use different fields")
    if not is_on_curve(P, C):
        raise ValueError("point is not on the curve")
    mul, sqr, inv = _ops(fid)
    x, y = P.x.bits, P.y.bits
    b = C.b.bits
    E = functools.partial(FieldElement._unchecked, fid)

    x2 = sqr(x)
    x4 = sqr(x2)
    X1, Z1, X2, Z2, T = x, 1, x4 ^ b, x2, 0
    n = k.bit_length()
    steps = []
    initial = LadderState(E(X1), E(Z1), E(X2), E(Z2), E(T), n - 1) if record else None

    for i in range(n - 2, -1, -1):
        bit = (k >> i) & 1
        # the k_i = 0 branch is the k_i = 1 branch with (X1,Z1) <-> (X2,Z2)
        if bit:
            xa, za, xb, zb = X1, Z1, X2, Z2
        else:
            xa, za, xb, zb = X2, Z2, X1, Z1
        t = za
        zb2 = sqr(zb)
        zb4 = sqr(zb2)
        xb2 = sqr(xb)
        xb4 = sqr(xb2)
        m1 = mul(xa, zb)
        m2 = mul(xb, t)
        za_new = sqr(m1 ^ m2)
        m3 = mul(b, zb4)
        m4 = mul(m1, m2)
        m5 = mul(x, za_new)
        m6 = mul(xb2, zb2)
        xa_new = m5 ^ m4
        t = xb
        xb_new = xb4 ^ m3
        zb_new = m6
        if bit:
            X1, Z1, X2, Z2 = xa_new, za_new, xb_new, zb_new
        else:
            X2, Z2, X1, Z1 = xa_new, za_new, xb_new, zb_new
        T = t
        if record:
            mults = (
                MultOp(1, E(xa), E(zb)),
                MultOp(2, E(xb), E(za)),
                MultOp(3, C.b, E(zb4), "b"),
                MultOp(4, E(m1), E(m2)),
                MultOp(5, P.x, E(za_new), "x"),
                MultOp(6, E(xb2), E(zb2)),
            )
            squarings = (
                SquareOp(SQUARE_CYCLES[0], E(zb), E(zb2)),
                SquareOp(SQUARE_CYCLES[1], E(zb2), E(zb4)),
                SquareOp(SQUARE_CYCLES[2], E(xb), E(xb2)),
                SquareOp(SQUARE_CYCLES[3], E(xb2), E(xb4)),
                SquareOp(SQUARE_CYCLES[4], E(m1 ^ m2), E(za_new)),
            )
            state = LadderState(E(X1), E(Z1), E(X2), E(Z2), E(T), i)
            steps.append(LadderStep(i, bit, mults, squarings, state))

    transcript = LadderTranscript(
        fid, n, initial, tuple(steps), E(x4) if record else None
    )

    # coordinate recovery
    if Z1 == 0:
        return INFINITY, transcript
    if Z2 == 0:
        raise DegenerateLadderError("Z2 = 0 in y-recovery: k = -1 mod ord(P)")
    xl = mul(X1, inv(Z1))
    den = mul(mul(x, Z1), Z2)
    if den == 0:
        raise DegenerateLadderError("x = 0 in y-recovery: P has order 2")
    bracket = mul(X1 ^ mul(x, Z1), X2 ^ mul(x, Z2)) ^ mul(x2 ^ y, mul(Z1, Z2))
    yl = y ^ mul(mul(x ^ xl, bracket), inv(den))
    return AffinePoint(E(xl), E(yl)), transcript


def montgomery_kp(k: int, P: AffinePoint, C: CurveParams) -> tuple[AffinePoint, LadderTranscript]:
    """kP by the López-Dahab Montgomery ladder, with the multiplication transcript.

    The loop starts below the most significant set bit of ``k``. Each iteration
    records its six field multiplications in slot order (M3 uses b, M5 uses x)
    and the five squarings with the cycle at which the squaring unit runs them.
    """
    return _ladder(k, P, C, record=True)


def scalar_mult(k: int, P: AffinePoint, C: CurveParams) -> AffinePoint:
    """``montgomery_kp`` without building a transcript."""
    return _ladder(k, P, C, record=False)[0]


def multi_scalar(u1: int, u2: int, Pub: AffinePoint, C: CurveParams) -> AffinePoint:
    """u1*G + u2*Pub as two ladders and one affine addition."""
    if not is_on_curve(Pub, C):
        raise ValueError("public point is not on the curve")
    left = scalar_mult(u1, C.G, C)
    right = INFINITY if u2 == 0 or Pub.is_infinity else scalar_mult(u2, Pub, C)
    return affine_add(left, right, C)


def full_length_scalar(k: int, C: CurveParams) -> int:
    """k + m*order with exactly l bits, so the ladder runs l-1 iterations.

    Adding multiples of the group order leaves k*G unchanged; it is the usual
    way to get a constant-length scalar when the order is shorter than l bits.
    """
    l = C.field.degree
    if k < 0:
        raise ValueError("scalar must be non-negative")
    while k.bit_length() < l:
        k += C.order
    if k.bit_length() != l:
        raise ValueError("no l-bit representative reachable by adding the order")
    return k
