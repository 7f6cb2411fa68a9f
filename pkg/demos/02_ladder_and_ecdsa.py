"""
Montgomery ladder and ECDSA
===========================

The ladder processes one scalar bit per iteration with six field
multiplications. Its result is checked against affine double-and-add, then
used for ECDSA. A disclosed nonce gives the private key away.
"""

import numpy as np

from hccalab.curve import full_length_scalar, kp_double_and_add, load_curve, montgomery_kp
from hccalab.ecdsa import keygen, random_scalar, recover_private_key, sign, verify

rng = np.random.default_rng(2)
C = load_curve("B283")
print(C.name, "order has", C.order.bit_length(), "bits")

k = random_scalar(rng, C)
Q, transcript = montgomery_kp(k, C.G, C)
assert Q == kp_double_and_add(k, C.G, C)
print(f"{len(transcript.steps)} ladder iterations, {transcript.num_mults} multiplications")

# A random scalar modulo a 282-bit order is shorter than the field; adding the
# order once gives an equivalent 283-bit scalar and the full 282 iterations.
k_full = full_length_scalar(k, C)
Q_full, transcript = montgomery_kp(k_full, C.G, C)
assert Q_full == Q
print(f"full length: {len(transcript.steps)} iterations, {transcript.num_mults} multiplications")

step = transcript.steps[0]
for op in step.mults:
    print(f"  M{op.position}: operand {op.operand or '-'}")

pair = keygen(rng, C)
digest = random_scalar(rng, C)
sig, nonce = sign(digest, pair.key, rng, C)
print("signature valid:", verify(digest, sig, pair.pub, C))
print("tampered digest valid:", verify(digest ^ 1, sig, pair.pub, C))

recovered = recover_private_key(sig, digest, nonce.k, C)
print("key recovered from the nonce:", recovered == pair.key)
