"""
A simulated power trace of one kP
=================================

Per clock cycle the level is the accumulator Hamming distance plus the
partial-product Hamming weight plus the squaring-register Hamming distance.
Each level is drawn out over a raised-cosine pulse and Gaussian noise is
added. These are model traces, not device measurements.
"""

import tempfile
from pathlib import Path

import numpy as np

from hccalab.curve import full_length_scalar, load_curve
from hccalab.ecdsa import random_scalar
from hccalab.hcca import compress
from hccalab.io_traces import read_trace, write_csv, write_trace
from hccalab.leakage import LeakageModel, simulate_kp_trace

C = load_curve("B233")
rng = np.random.default_rng(3)
k = full_length_scalar(random_scalar(rng, C), C)

# 625 samples per cycle is the default; 25 keeps this script quick.
model = LeakageModel(sigma=0.5, samples_per_cycle=25)
trace = simulate_kp_trace(k, C.G, C, model, rng)
print(f"{trace.num_cycles} cycles = {len(trace.annotations)} slots of 54")
print("first slot tags:", trace.annotations[0].tags["mults"][2])

ct = compress(trace)
print("compressed: one value per cycle, first slot =", np.round(ct.values[:9], 1))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "kp.hct"
    write_trace(trace, path)
    print(f"HCT1 file: {path.stat().st_size} bytes")
    assert read_trace(path) == trace
    write_csv(trace, Path(tmp) / "kp.csv")
    print("CSV sidecar:", sorted(p.name for p in Path(tmp).iterdir()))
