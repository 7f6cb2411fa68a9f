"""Arithmetic in GF(2^233) and GF(2^283) with the NIST pentanomial/trinomial.

Elements are bit vectors stored in Python ints, coefficient of t^i at bit i.
The int-level helpers (``clmul``, ``spread``, ``reduce_int``) are what
the ladder and the multiplier model run on; :class:`FieldElement` wraps them
with a field tag for the public API.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class FieldMismatchError(ValueError):
    """Operands belong to different fields."""


class ReductionOverflowError(ValueError):
    """Polynomial too long to be the product of two field elements."""


class FieldId(enum.Enum):
    B233 = (233, (74, 0))
    B283 = (283, (12, 7, 5, 0))

    @property
    def degree(self) -> int:
        return self.value[0]

    @property
    def taps(self) -> tuple[int, ...]:
        """Exponents of f(t) below the leading term."""
        return self.value[1]

    @property
    def modulus(self) -> int:
        f = 1 << self.degree
        for e in self.taps:
            f |= 1 << e
        return f

    @property
    def hex_digits(self) -> int:
        return -(-self.degree // 4)

    @classmethod
    def parse(cls, name: str) -> "FieldId":
        key = name.strip().upper().replace("-", "")
        for fid in cls:
            if fid.name == key or str(fid.degree) == key:
                return fid
        raise ValueError(f"unknown field {name!r} (expected B233 or B283)")


# byte -> bits spread to even positions, split into low/high output byte
_SPREAD = [sum(((i >> j) & 1) << (2 * j) for j in range(8)) for i in range(256)]
_SPREAD_LO = bytes(v & 0xFF for v in _SPREAD)
_SPREAD_HI = bytes(v >> 8 for v in _SPREAD)


def spread(a: int) -> int:
    """Interleave zeros between the bits of ``a`` (a_i moves to position 2i)."""
    n = (a.bit_length() + 7) // 8 or 1
    src = a.to_bytes(n, "little")
    out = bytearray(2 * n)
    out[0::2] = src.translate(_SPREAD_LO)
    out[1::2] = src.translate(_SPREAD_HI)
    return int.from_bytes(out, "little")


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit vectors (4-bit comb over ``b``)."""
    if a == 0 or b == 0:
        return 0
    if b.bit_length() > a.bit_length():
        a, b = b, a
    t = [0] * 16
    t[1] = a
    for u in range(2, 16):
        t[u] = t[u - 1] ^ a if u & 1 else t[u >> 1] << 1
    r = 0
    s = 0
    while b:
        r ^= t[b & 15] << s
        b >>= 4
        s += 4
    return r


def clmul_bitwise(a: int, b: int) -> int:
    """Per-bit shift-XOR schoolbook product. Slow; kept as a reference."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def reduce_int(p: int, field: FieldId) -> int:
    """Reduce a polynomial of any degree modulo f(t) by folding the high part.

    Every fold substitutes t^l = sum of the low taps, so each round shrinks the
    degree by at least l - max(tap); two or three rounds suffice for products.
    """
    l = field.degree
    mask = (1 << l) - 1
    taps = field.taps
    while p >> l:
        hi = p >> l
        p &= mask
        for e in taps:
            p ^= hi << e
    return p


def reduce_longdiv(p: int, field: FieldId) -> int:
    """Remainder by textbook long division; slow reference for ``reduce``."""
    f = field.modulus
    l = field.degree
    while p.bit_length() > l:
        p ^= f << (p.bit_length() - 1 - l)
    return p


def inverse_int(a: int, field: FieldId) -> int:
    """Binary extended Euclid over GF(2)[t]."""
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^l)")
    u, v = a, field.modulus
    g1, g2 = 1, 0
    while u != 1:
        j = u.bit_length() - v.bit_length()
        if j < 0:
            u, v = v, u
            g1, g2 = g2, g1
            j = -j
        u ^= v << j
        g1 ^= g2 << j
    return g1


@dataclass(frozen=True, slots=True)
class FieldElement:
    field: FieldId
    bits: int

    def __post_init__(self):
        if not isinstance(self.field, FieldId):
            raise TypeError("field must be a FieldId")
        if self.bits < 0 or self.bits >> self.field.degree:
            raise ValueError(f"value does not fit in {self.field.degree} bits")

    @classmethod
    def _unchecked(cls, field: FieldId, bits: int) -> "FieldElement":
        # internal fast path; caller guarantees bits is reduced
        obj = object.__new__(cls)
        object.__setattr__(obj, "field", field)
        object.__setattr__(obj, "bits", bits)
        return obj

    @classmethod
    def zero(cls, field: FieldId) -> "FieldElement":
        return cls(field, 0)

    @classmethod
    def one(cls, field: FieldId) -> "FieldElement":
        return cls(field, 1)

    @classmethod
    def from_hex(cls, field: FieldId, text: str) -> "FieldElement":
        text = text.strip()
        if text.lower().startswith("0x"):
            text = text[2:]
        if not text:
            raise ValueError("empty hex string")
        return cls(field, int(text, 16))

    @classmethod
    def random(cls, field: FieldId, rng) -> "FieldElement":
        """Uniform element drawn from a numpy ``Generator``."""
        n = (field.degree + 7) // 8
        v = int.from_bytes(rng.bytes(n), "little") & ((1 << field.degree) - 1)
        return cls(field, v)

    def hex(self) -> str:
        """Most-significant nibble first, fixed width ceil(l/4)."""
        return format(self.bits, f"0{self.field.hex_digits}x")

    def is_zero(self) -> bool:
        return self.bits == 0

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return add(self, other)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return mul_classical(self, other)

    def __repr__(self):
        return f"FieldElement({self.field.name}, 0x{self.hex()})"


def _check_same(a: FieldElement, b: FieldElement) -> FieldId:
    if a.field is not b.field:
        raise FieldMismatchError(f"{a.field.name} vs {b.field.name}")
    return a.field


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return FieldElement(_check_same(a, b), a.bits ^ b.bits)


def reduce(p: int, field: FieldId) -> FieldElement:
    """Reduce an unreduced product (degree <= 2l-2) to a field element."""
    if p < 0:
        raise ValueError("polynomial bit vector must be non-negative")
    if p.bit_length() > 2 * field.degree - 1:
        raise ReductionOverflowError(
            f"degree {p.bit_length() - 1} exceeds 2l-2 = {2 * field.degree - 2}"
        )
    return FieldElement(field, reduce_int(p, field))


def square(a: FieldElement) -> FieldElement:
    # bit spread, then reduce: the one-cycle squaring unit
    return FieldElement(a.field, reduce_int(spread(a.bits), a.field))


def mul_classical(a: FieldElement, b: FieldElement) -> FieldElement:
    field = _check_same(a, b)
    return FieldElement(field, reduce_int(clmul(a.bits, b.bits), field))


def invert(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, inverse_int(a.bits, a.field))
