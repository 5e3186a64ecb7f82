"""Command-line entry point: ``distsecret <command> ...``.

Exit status is 0 on success, 2 on invalid input, 3 when an enumeration
guard refuses a configuration and 1 if the LP backend fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import regions
from .access import ThresholdParams, parse_access, validate
from .codec.hashing import ToeplitzHash, bits_to_hex, toeplitz_hash
from .errors import GuardExceeded, KeyExhausted, SolverError, ValidationError
from .gf import field
from .harness import ProtocolSpec, simulate, transcript, verify_protocol, _round_floats
from .source import load_source
from .threshold import (
    Broadcast,
    PairwiseKeys,
    dealer_broadcast,
    evaluation_points,
    participant_recover,
    ramp_share,
)

BOUNDS = ("inner", "outer", "aon-inner", "aon-outer", "thr-cap", "d2-fm", "d2-successive", "d1")


def hex_to_bits(text: str, nbits: int) -> np.ndarray:
    if nbits == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.unpackbits(np.frombuffer(bytes.fromhex(text), dtype=np.uint8))
    if raw.size < nbits:
        raise ValidationError(f"hex field holds {raw.size} bits, {nbits} expected")
    return raw[raw.size - nbits:]


def _parse_bits(text: str) -> np.ndarray:
    if not text or set(text) - {"0", "1"}:
        raise ValidationError("bits must be a non-empty string of 0 and 1")
    return np.array([int(c) for c in text], dtype=np.uint8)


def _emit(doc, args, rows: list[dict] | None = None) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        fields = sorted({k for r in rows for k in r})
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (" ".join(map(str, v)) if isinstance(v, list) else v) for k, v in r.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(_round_floats(doc), sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --- region ---------------------------------------------------------------------------


def _cmd_region(args) -> int:
    if args.bound == "thr-cap":
        if not args.access.startswith("thr:"):
            raise ValidationError("thr-cap needs --access thr:<L>:<t>:<z>")
        _, L, t, z = args.access.split(":")
        D = args.dealers if args.dealers else (load_source(args.source).D if args.source else None)
        if D is None:
            raise ValidationError("thr-cap needs --dealers or --source")
        region, corner = regions.threshold_capacity_region(int(L), D, ThresholdParams(int(t), int(z)))
        rows = region.rows()
        _emit({"bound": args.bound, "facets": rows, "corner": list(corner)}, args, rows)
        return 0
    if not args.source:
        raise ValidationError(f"--source is required for --bound {args.bound}")
    src = load_source(args.source)
    A = parse_access(args.access, src.L)
    doc: dict = {"bound": args.bound}
    if args.bound == "outer":
        rows = regions.outer_general(src, A).rows()
    elif args.bound == "inner":
        system = regions.inner_aux_system(src, A)
        region = regions.inner_sum_rate_bounds(src, A)
        rows = region.rows() if region is not None else []
        doc["empty"] = region is None
        doc["auxiliary"] = [
            {"subset": [d + 1 for d in sorted(regions.dealers_of(S))], "lower": system.lower[S],
             "upper": system.upper[S]}
            for S in regions.nonempty_subsets(src.D)
        ]
    elif args.bound in ("aon-inner", "aon-outer"):
        if A.unauthorized != frozenset(range(A.full)) or A.authorized != frozenset({A.full}):
            raise ValidationError(f"{args.bound} applies to the all-or-nothing structure only")
        fn = regions.aon_inner if args.bound == "aon-inner" else regions.aon_outer
        rows = fn(src).rows()
    elif args.bound == "d2-fm":
        b = regions.inner_d2_fm(src, A)
        rows = b.as_region().rows()
        doc["sum_terms"] = list(b.sum_terms)
    elif args.bound == "d2-successive":
        r = regions.aon_successive_inner_d2(src)
        rows = r.rows()
        s = regions.aon_sum_rates_d2(src)
        doc.update(hypothesis_met=r.hypothesis_met, sum_rates={
            "joint": s.joint, "one_then_two": s.one_then_two, "two_then_one": s.two_then_one},
            sum_rate_optimal=regions.sum_rate_optimality(src))
    else:
        b = regions.d1_bounds(src, A)
        rows = [{"subset": [1], "lower_bits": b.lower, "upper_bits": b.upper, "lower_raw_bits": b.lower_raw}]
    doc["facets"] = rows
    _emit(doc, args, rows)
    return 0


# --- verify / simulate -----------------------------------------------------------------


def _load_spec(path: str) -> ProtocolSpec:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return ProtocolSpec.from_dict(doc, base=p.parent)


def _cmd_verify(args) -> int:
    _emit(verify_protocol(_load_spec(args.spec)).to_dict(), args)
    return 0


def _cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    report = simulate(spec, args.trials, args.seed)
    if args.transcript:
        doc = transcript(spec, args.seed)
        Path(args.transcript).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    _emit(report.to_dict(), args)
    return 0


# --- threshold ---------------------------------------------------------------------------


def _cmd_share(args) -> int:
    L, t, z, D, m, blocks = args.L, args.t, args.z, args.D, args.m, args.blocks
    ThresholdParams(t, z).check(L)
    if D < 1 or blocks < 1:
        raise ValidationError("D and blocks must be >= 1")
    gf = field(m)
    points = evaluation_points(L, gf)
    rng = np.random.default_rng(args.seed)
    keys = PairwiseKeys.generate(L, D, m * blocks, int(rng.integers(2**63)))
    secrets = rng.integers(0, gf.order, size=(D, blocks, t - z))
    dealers = []
    for d in range(D):
        shares = ramp_share(secrets[d], t, z, L, m, seed=int(rng.integers(2**63)))
        bc = dealer_broadcast(keys, d, shares)
        dealers.append({"offsets": list(bc.offsets), "ciphertext": [bits_to_hex(c) for c in bc.ciphertext]})
    doc = {
        "field": {"m": m, "poly": hex(gf.poly)},
        "L": L, "t": t, "z": z, "D": D, "blocks": blocks,
        "points": list(points),
        "seed": args.seed,
        "share_bits": m * blocks,
        "secrets": [[[int(v) for v in blk] for blk in secrets[d]] for d in range(D)],
        "keys": [[bits_to_hex(keys.bits[l, d]) for d in range(D)] for l in range(L)],
        "key_bits": keys.length,
        "dealers": dealers,
    }
    _emit(doc, args)
    return 0


def _cmd_reconstruct(args) -> int:
    try:
        doc = json.loads(Path(args.input).read_text() if args.input != "-" else sys.stdin.read())
        L, t, z, D, m = doc["L"], doc["t"], doc["z"], doc["D"], doc["field"]["m"]
        nbits, kbits = doc["share_bits"], doc["key_bits"]
        keys = PairwiseKeys(np.array([[hex_to_bits(doc["keys"][l][d], kbits) for d in range(D)] for l in range(L)]))
        bcs = [Broadcast(d, tuple(doc["dealers"][d]["offsets"]),
                         np.array([hex_to_bits(c, nbits) for c in doc["dealers"][d]["ciphertext"]]))
               for d in range(D)]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed transcript: {exc}") from exc
    try:
        coalition = [int(v) - 1 for v in args.participants.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad participant list {args.participants!r}") from exc
    if any(not 0 <= l < L for l in coalition):
        raise ValidationError(f"participants must lie in 1..{L}")
    rec = participant_recover(bcs, keys, coalition, t, z, m)
    out = {"participants": sorted(l + 1 for l in set(coalition)),
           "secrets": [[[int(v) for v in blk] for blk in r] for r in rec]}
    if "secrets" in doc:
        out["match"] = out["secrets"] == doc["secrets"]
    _emit(out, args)
    return 0


# --- hash / source -----------------------------------------------------------------------


def _cmd_hash(args) -> int:
    x = _parse_bits(args.bits)
    rng = np.random.default_rng(args.seed)
    h = ToeplitzHash.random(x.size, args.r, rng)
    y = toeplitz_hash(h, x)
    _emit({"n_in": x.size, "r": args.r, "seed_bits": "".join(map(str, h.seed_bits)),
           "output": "".join(map(str, y)), "output_hex": bits_to_hex(y)}, args)
    return 0


def _cmd_source_validate(args) -> int:
    src = load_source(args.source)
    doc = {"valid": True, "L": src.L, "D": src.D, "shape": list(src.shape), "min_probability": src.mu}
    if args.access:
        A = parse_access(args.access, src.L)
        diags = validate(A)
        doc["access"] = A.describe()
        doc["diagnostics"] = [{"kind": d.kind, "subset": [i + 1 for i in d.subset], "message": d.message}
                              for d in diags]
    _emit(doc, args)
    return 0


# --- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="distsecret", description="Distributed secret sharing toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", help="rate-region bounds for a source and access structure")
    r.add_argument("--source")
    r.add_argument("--access", required=True, help="aon | thr:L:t:z | min:1,2;2,3")
    r.add_argument("--bound", required=True, choices=BOUNDS)
    r.add_argument("--dealers", type=int, help="dealer count for thr-cap without a source")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--out")
    r.set_defaults(fn=_cmd_region)

    v = sub.add_parser("verify", help="exact verification of a protocol spec")
    v.add_argument("--spec", required=True)
    v.add_argument("--out")
    v.set_defaults(fn=_cmd_verify)

    s = sub.add_parser("simulate", help="Monte-Carlo reliability of a protocol spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--transcript", help="write one run's public transcript here")
    s.add_argument("--out")
    s.set_defaults(fn=_cmd_simulate)

    t = sub.add_parser("threshold", help="ramp sharing with one-time-pad delivery")
    tsub = t.add_subparsers(dest="action", required=True)
    sh = tsub.add_parser("share")
    for name in ("L", "t", "z", "D", "m"):
        sh.add_argument(f"--{name}", type=int, required=True)
    sh.add_argument("--blocks", type=int, default=1)
    sh.add_argument("--seed", type=int, required=True)
    sh.add_argument("--out")
    sh.set_defaults(fn=_cmd_share)
    rc = tsub.add_parser("reconstruct")
    rc.add_argument("--in", dest="input", required=True, help="transcript file, or - for stdin")
    rc.add_argument("--participants", required=True, help="1-based, comma separated")
    rc.add_argument("--out")
    rc.set_defaults(fn=_cmd_reconstruct)

    h = sub.add_parser("hash", help="Toeplitz hash of a bit string")
    h.add_argument("--bits", required=True)
    h.add_argument("--r", type=int, required=True)
    h.add_argument("--seed", type=int, required=True)
    h.add_argument("--out")
    h.set_defaults(fn=_cmd_hash)

    so = sub.add_parser("source", help="source utilities")
    ssub = so.add_subparsers(dest="action", required=True)
    sv = ssub.add_parser("validate")
    sv.add_argument("--source", required=True)
    sv.add_argument("--access")
    sv.add_argument("--out")
    sv.set_defaults(fn=_cmd_source_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, KeyExhausted, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
