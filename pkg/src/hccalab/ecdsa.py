"""ECDSA over B-233/B-283 on top of the Montgomery ladder.

Digests come in already hashed and reduced modulo the group order; hashing is
the caller's business. All randomness is drawn from a caller-owned numpy
``Generator`` so every signature is reproducible from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .curve import (
    AffinePoint,
    CurveParams,
    DegenerateLadderError,
    affine_add,
    is_on_curve,
    kp_double_and_add,
    scalar_mult,
    INFINITY,
)


@dataclass(frozen=True)
class Scalar:
    """Integer modulo the group order."""

    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise ValueError("scalar out of range [0, order)")

    def __int__(self):
        return self.value

    def _other(self, y) -> int:
        if isinstance(y, Scalar):
            if y.modulus != self.modulus:
                raise ValueError("scalars use different moduli")
            return y.value
        return int(y)

    def __add__(self, y):
        return Scalar((self.value + self._other(y)) % self.modulus, self.modulus)

    def __sub__(self, y):
        return Scalar((self.value - self._other(y)) % self.modulus, self.modulus)

    def __mul__(self, y):
        return Scalar((self.value * self._other(y)) % self.modulus, self.modulus)

    def inv(self) -> "Scalar":
        return Scalar(inv_mod(self.value, self.modulus), self.modulus)


def inv_mod(x: int, n: int) -> int:
    if x % n == 0:
        raise ZeroDivisionError("zero has no inverse modulo the order")
    return pow(x, -1, n)


def random_scalar(rng, C: CurveParams) -> int:
    """Uniform in [1, order-1] by rejection sampling."""
    nbits = C.order.bit_length()
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    while True:
        k = int.from_bytes(rng.bytes(nbytes), "little") & mask
        if 1 <= k < C.order:
            return k


@dataclass(frozen=True)
class KeyPair:
    key: int
    pub: AffinePoint


@dataclass(frozen=True)
class Signature:
    r: int
    s: int

    def to_text(self, C: CurveParams) -> str:
        w = C.order_hex_digits
        return f"{self.r:0{w}x}:{self.s:0{w}x}"

    @classmethod
    def from_text(cls, text: str) -> "Signature":
        r, sep, s = text.strip().partition(":")
        if not sep or not r or not s:
            raise ValueError("signature must be <hex r>:<hex s>")
        return cls(int(r, 16), int(s, 16))


@dataclass(frozen=True)
class EphemeralDisclosure:
    """The nonce behind a signature. Laboratory use only."""

    k: int


def keygen(rng, C: CurveParams) -> KeyPair:
    key = random_scalar(rng, C)
    return KeyPair(key, scalar_mult(key, C.G, C))


def sign(e, key, rng, C: CurveParams) -> tuple[Signature, EphemeralDisclosure]:
    n = C.order
    e = int(e) % n
    key = int(key)
    if not 1 <= key < n:
        raise ValueError("private key out of range [1, order-1]")
    while True:
        k = random_scalar(rng, C)
        T = scalar_mult(k, C.G, C)
        r = T.x.bits % n
        if r == 0:
            continue
        s = (e + r * key) * inv_mod(k, n) % n
        if s == 0:
            continue
        return Signature(r, s), EphemeralDisclosure(k)


def _ladder_or_fallback(k: int, P: AffinePoint, C: CurveParams) -> AffinePoint:
    try:
        return scalar_mult(k, P, C)
    except DegenerateLadderError:
        return kp_double_and_add(k, P, C)


def verify(e, sig: Signature, pub: AffinePoint, C: CurveParams) -> bool:
    n = C.order
    r, s = int(sig.r), int(sig.s)
    if not (1 <= r < n and 1 <= s < n):
        return False
    if pub.is_infinity or not is_on_curve(pub, C):
        return False
    w = inv_mod(s, n)
    u1 = int(e) % n * w % n
    u2 = r * w % n
    left = _ladder_or_fallback(u1, C.G, C) if u1 else INFINITY
    right = _ladder_or_fallback(u2, pub, C)
    T = affine_add(left, right, C)
    if T.is_infinity:
        return False
    return T.x.bits % n == r


def recover_private_key(sig: Signature, e, k, C: CurveParams) -> int:
    """key = (s*k - e) / r mod order, given the nonce of one signature."""
    n = C.order
    if sig.r % n == 0:
        raise ValueError("r must be nonzero")
    return (sig.s * int(k) - int(e)) * inv_mod(sig.r, n) % n
