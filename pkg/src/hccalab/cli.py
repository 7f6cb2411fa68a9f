"""Command-line entry point: ``hccalab <subcommand>``.

Exit codes: 0 success, 1 negative outcome (INVALID signature, attack below
--min-auc, degenerate ladder), 2 usage / malformed input, 3 I/O or trace file
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .curve import (
    AffinePoint,
    CurveParams,
    DegenerateLadderError,
    full_length_scalar,
    is_on_curve,
    kp_double_and_add,
    load_curve,
    montgomery_kp,
)
from .ecdsa import Signature, keygen, random_scalar, sign, verify
from .gf2m import FieldElement, FieldId
from .hcca import attack_trace, collision_csv, mult_collision_experiment
from .io_traces import TraceFileError, load_any, write_csv, write_trace
from .karatsuba import PartialProductPlan
from .leakage import LeakageModel, simulate_kp_trace, simulate_mult_batch

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    curve: str | None
    seed: int | None
    model: dict | None = None
    options: dict[str, Any] = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"command": self.command, "curve": self.curve, "seed": self.seed, "version": __version__}
        if self.model is not None:
            d["model"] = self.model
        d.update(self.options)
        return d

    def comment(self) -> str:
        return "# " + json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


# --- parsing helpers -----------------------------------------------------------

def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _hex_int(text: str) -> int:
    t = text.strip().lower()
    if t.startswith("0x"):
        t = t[2:]
    if not t:
        raise UsageError("empty hex value")
    try:
        return int(t, 16)
    except ValueError:
        raise UsageError(f"not a hex number: {text!r}") from None


def _read_kv(path) -> dict[str, str]:
    kv = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            k, sep, v = line.partition("=")
            if not sep:
                raise UsageError(f"{path}: malformed line {raw!r}")
            kv[k.strip()] = v.strip()
    return kv


def _write_kv(path, header: str, items: list[tuple[str, Any]]) -> None:
    lines = [f"# {header}"] + [f"{k} = {v}" for k, v in items]
    Path(path).write_text("\n".join(lines) + "\n")


def _point(C: CurveParams, text: str | None) -> AffinePoint:
    if text is None:
        return C.G
    x, sep, y = text.partition(",")
    if not sep:
        raise UsageError("--point must be X,Y in hex")
    try:
        return AffinePoint(FieldElement(C.field, _hex_int(x)), FieldElement(C.field, _hex_int(y)))
    except ValueError as exc:
        raise UsageError(f"bad point: {exc}") from None


def _model(args) -> LeakageModel:
    try:
        return LeakageModel(args.alpha, args.beta, args.gamma, args.sigma, args.samples_per_cycle)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _plan(args) -> PartialProductPlan | None:
    if not getattr(args, "plan", None):
        return None
    try:
        return PartialProductPlan.from_text(Path(args.plan).read_text())
    except ValueError as exc:
        raise UsageError(f"--plan: {exc}") from None


def _curve(args) -> CurveParams:
    return load_curve(args.curve)


def _pub_from_file(path, C: CurveParams) -> AffinePoint:
    kv = _read_kv(path)
    if FieldId.parse(kv.get("curve", C.name)) is not C.field:
        raise UsageError(f"{path}: key is for curve {kv.get('curve')}, not {C.name}")
    try:
        return AffinePoint(FieldElement(C.field, _hex_int(kv["pub_x"])),
                           FieldElement(C.field, _hex_int(kv["pub_y"])))
    except KeyError as exc:
        raise UsageError(f"{path}: missing {exc.args[0]}") from None


def _digest(text: str, C: CurveParams) -> int:
    return _hex_int(text) % C.order


def _scalar_hex(v: int, C: CurveParams) -> str:
    return format(v, f"0{C.order_hex_digits}x")


# --- subcommands -----------------------------------------------------------------

def cmd_keygen(args) -> int:
    C = _curve(args)
    kp = keygen(np.random.default_rng(args.seed), C)
    out = Path(args.out)
    common = [("curve", C.name), ("pub_x", kp.pub.x.hex()), ("pub_y", kp.pub.y.hex())]
    _write_kv(out, f"hccalab private key, seed={args.seed}",
              [("curve", C.name), ("seed", args.seed), ("key", _scalar_hex(kp.key, C))] + common[1:])
    pub = out.with_name(out.name + ".pub")
    _write_kv(pub, f"hccalab public key, seed={args.seed}", common + [("seed", args.seed)])
    print(f"wrote {out} and {pub}")
    return EXIT_OK


def cmd_sign(args) -> int:
    C = _curve(args)
    kv = _read_kv(args.key)
    if "key" not in kv:
        raise UsageError(f"{args.key}: no private key")
    if FieldId.parse(kv.get("curve", C.name)) is not C.field:
        raise UsageError(f"{args.key}: key is for curve {kv.get('curve')}, not {C.name}")
    e = _digest(args.digest, C)
    sig, nonce = sign(e, _hex_int(kv["key"]), np.random.default_rng(args.seed), C)
    text = sig.to_text(C)
    items = [("curve", C.name), ("seed", args.seed), ("digest", args.digest.lower()),
             ("signature", text)]
    if args.disclose_nonce:
        items.append(("k", _scalar_hex(nonce.k, C)))
    if args.out:
        _write_kv(args.out, "hccalab ECDSA signature (r:s)", items)
    print(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    C = _curve(args)
    pub = _pub_from_file(args.pub, C)
    sig_text = args.sig
    if Path(sig_text).is_file():
        kv = _read_kv(sig_text)
        if "signature" not in kv:
            raise UsageError(f"{sig_text}: no signature entry")
        sig_text = kv["signature"]
    try:
        sig = Signature.from_text(sig_text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ok = verify(_digest(args.digest, C), sig, pub, C)
    print("VALID" if ok else "INVALID")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_kp(args) -> int:
    C = _curve(args)
    k = _hex_int(args.k)
    P = _point(C, args.point)
    if not is_on_curve(P, C):
        raise UsageError("point is not on the curve")
    if args.oracle:
        R = kp_double_and_add(k, P, C)
        transcript = None
    else:
        try:
            R, transcript = montgomery_kp(k, P, C)
        except DegenerateLadderError as exc:
            print(f"error: degenerate ladder case: {exc}", file=sys.stderr)
            return EXIT_NEGATIVE
    if args.transcript and transcript is not None:
        with open(args.transcript, "w") as fh:
            fh.write(f"# curve={C.name} k={k:x} iterations={len(transcript.steps)}\n")
            for st in transcript.steps:
                for op in st.mults:
                    fh.write(f"{st.bit_index} {st.bit} M{op.position} {op.left.hex()} {op.right.hex()}"
                             f"{' ' + op.operand if op.operand else ''}\n")
    if R.is_infinity:
        print("INFINITY")
    else:
        print(f"x = {R.x.hex()}")
        print(f"y = {R.y.hex()}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    C = _curve(args)
    model = _model(args)
    plan = _plan(args)
    rng = np.random.default_rng(args.seed)
    if args.kind == "kp":
        if args.k is not None:
            k = _hex_int(args.k)
        else:
            k = full_length_scalar(random_scalar(rng, C), C)
        trace = simulate_kp_trace(k, _point(C, args.point), C, model, rng, plan=plan)
    else:
        pairs = [(FieldElement.random(C.field, rng), FieldElement.random(C.field, rng))
                 for _ in range(args.count)]
        trace = simulate_mult_batch(pairs, model, rng, plan=plan)
    trace.metadata["seed"] = args.seed
    trace.metadata["config"] = RunConfig("simulate", C.name, args.seed, model.to_dict(),
                                         {"kind": args.kind, "plan_file": args.plan}).to_dict()
    fmt = args.format or ("csv" if str(args.out).endswith(".csv") else "hct1")
    if fmt == "hct1":
        write_trace(trace, args.out)
    elif fmt == "csv":
        write_csv(trace, args.out)
    else:
        raise UsageError("simulate writes hct1 or csv")
    print(f"wrote {args.out}: {trace.num_cycles} cycles x {trace.samples_per_cycle} samples"
          + (f", {trace.num_cycles // 54} slots" if args.kind == "kp" else ""))
    return EXIT_OK


def cmd_attack(args) -> int:
    if not 1 <= args.position <= 6:
        raise UsageError("--position must be in 1..6")
    trace = load_any(args.trace, samples_per_cycle=args.samples_per_cycle_in)
    try:
        report = attack_trace(trace, args.position, truncate=args.truncate)
    except ValueError as exc:
        raise UsageError(f"{args.trace}: {exc} (use --truncate to drop a partial slot)") from None
    report.config["command"] = "attack"
    report.config["input"] = Path(args.trace).name
    prefix = Path(args.out)
    fmts = {"csv", "json"} if args.format is None else {args.format}
    if "json" in fmts:
        prefix.with_suffix(".json").write_text(report.to_json())
    if "csv" in fmts:
        header = "# " + json.dumps(report.config, sort_keys=True, separators=(",", ":")) + "\n"
        prefix.with_suffix(".csv").write_text(header + report.to_csv())
    print(f"windows={len(report.coefficients)} missing={report.missing} position={args.position}")
    st = report.stats
    if st is None:
        print("no ground-truth labels in trace; separation statistics skipped")
        return EXIT_OK
    print(f"mean_common={st.mean_common:.6f} mean_different={st.mean_different:.6f} "
          f"t={st.t:.4f} p={st.p:.3e} AUC={st.auc:.4f}")
    return EXIT_OK if st.auc >= args.min_auc else EXIT_NEGATIVE


def cmd_mult_experiment(args) -> int:
    model = _model(args)
    plan = _plan(args)
    fields = [FieldId.parse(args.curve)] if args.curve else [FieldId.B233, FieldId.B283]
    rng = np.random.default_rng(args.seed)
    results = [mult_collision_experiment(f, model, args.repetitions, rng, plan) for f in fields]
    cfg = RunConfig("mult-experiment", args.curve, args.seed, model.to_dict(),
                    {"repetitions": args.repetitions, "plan_file": args.plan})
    for r in results:
        r.config = cfg.to_dict()
    prefix = Path(args.out)
    fmts = {"csv", "json"} if args.format is None else {args.format}
    if "csv" in fmts:
        prefix.with_suffix(".csv").write_text(cfg.comment() + collision_csv(results))
    if "json" in fmts:
        doc = {"config": cfg.to_dict(), "results": [r.to_dict() for r in results]}
        prefix.with_suffix(".json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    for r in results:
        st = r.separation()
        print(f"{r.bit_length}-bit: K1 mean={st.mean_common:.4f} K2-K4 mean={st.mean_different:.4f} "
              f"t={st.t:.4f} p={st.p:.3e} AUC={st.auc:.4f}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------------

def _add_model_flags(p):
    g = p.add_argument_group("leakage model")
    g.add_argument("--alpha", type=float, default=1.0, help="weight of accumulator Hamming distance")
    g.add_argument("--beta", type=float, default=1.0, help="weight of partial-product Hamming weight")
    g.add_argument("--gamma", type=float, default=1.0, help="weight of squaring-unit Hamming distance")
    g.add_argument("--sigma", type=float, default=0.0, help="Gaussian noise std per sample")
    g.add_argument("--samples-per-cycle", type=int, default=625)
    g.add_argument("--plan", help="multiplier plan file (lines 'cycle i: L={..} R={..} fold={..}')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hccalab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, default_curve="B233"):
        p.add_argument("--curve", default=default_curve, help="B233 or B283")
        if seed:
            p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("keygen", help="generate a key pair")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("sign", help="sign a hex digest")
    common(p)
    p.add_argument("--key", required=True)
    p.add_argument("--digest", required=True)
    p.add_argument("--out")
    p.add_argument("--disclose-nonce", action="store_true", help="record k in the output (lab use)")
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="verify a signature; prints VALID/INVALID")
    common(p, seed=False)
    p.add_argument("--pub", required=True)
    p.add_argument("--digest", required=True)
    p.add_argument("--sig", required=True, help="signature file or literal r:s")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kp", help="scalar multiplication k*P")
    common(p, seed=False)
    p.add_argument("--k", required=True, help="scalar in hex")
    p.add_argument("--point", help="X,Y in hex (default: base point)")
    p.add_argument("--oracle", action="store_true", help="use affine double-and-add instead")
    p.add_argument("--transcript", help="dump the ladder multiplication transcript here")
    p.set_defaults(func=cmd_kp)

    p = sub.add_parser("simulate", help="synthesize a trace")
    common(p)
    p.add_argument("--kind", choices=["kp", "mult"], default="kp")
    p.add_argument("--k", help="scalar in hex (default: random full-length)")
    p.add_argument("--point", help="X,Y in hex (default: base point)")
    p.add_argument("--count", type=int, default=1, help="multiplications for --kind mult")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["hct1", "csv"])
    _add_model_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack", help="horizontal collision correlation analysis")
    p.add_argument("trace")
    p.add_argument("--position", type=int, default=3, help="multiplication position 1..6 to profile")
    p.add_argument("--out", required=True, help="output prefix (.json/.csv appended)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--truncate", action="store_true")
    p.add_argument("--min-auc", type=float, default=0.9,
                   help="AUC below this counts as a negative outcome (exit 1)")
    p.add_argument("--samples-per-cycle", dest="samples_per_cycle_in", type=int,
                   help="for CSV traces without a sidecar")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("mult-experiment", help="multiplier-only K1..K4 experiment")
    common(p, default_curve=None)
    p.add_argument("--repetitions", type=int, default=20)
    p.add_argument("--out", required=True, help="output prefix (.csv/.json appended)")
    p.add_argument("--format", choices=["csv", "json"])
    _add_model_flags(p)
    p.set_defaults(func=cmd_mult_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help/--version exit 0, bad usage exits 2
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hccalab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceFileError as exc:
        print(f"hccalab {args.command}: trace file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"hccalab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"hccalab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
