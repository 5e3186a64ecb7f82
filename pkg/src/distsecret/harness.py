"""End-to-end protocol runs with exact leakage and reliability oracles.

Exact quantities come from pushing the full input distribution through the
protocol maps.  Mutual information is never estimated from samples: when a
configuration is too large to enumerate, leakage is reported as not computed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .access import AccessStructure, ThresholdParams, members, parse_access, popcount, threshold_structure
from .codec.binning import (
    ProtocolParams,
    _group_sequences,
    bin_count,
    binning_error_exact,
    build_binning,
    build_nested_binning,
    decode_binning,
    encode_binning,
    nested_rate_schedule,
    successive_decode,
)
from .codec.hashing import ToeplitzHash, bits_to_hex, privacy_amplify, serialize_symbols, symbol_width
from .errors import GuardExceeded, ValidationError
from .gf import field as gf_field
from .source import JointSource, load_source, sample_block, source_from_dict
from .threshold import (
    PairwiseKeys,
    dealer_broadcast,
    evaluate_at,
    evaluation_points,
    participant_recover,
    ramp_share,
    vandermonde_row,
)

MAX_STATES = 2**24
_CHUNK = 2**20
SCHEMES = ("threshold-ramp", "random-binning", "nested-reconciliation+PA")


# --- exact pushforward ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Distribution:
    """Exact pmf over integer tuples, stored as mixed-radix keys.

    ``groups`` names column ranges, e.g. ``{"S": [0, 1], "M": [2, 3]}``.
    """

    radices: tuple[int, ...]
    keys: np.ndarray
    probs: np.ndarray
    groups: dict[str, list[int]] = field(default_factory=dict)

    def columns(self, cols: Sequence[int]) -> np.ndarray:
        full = np.array(np.unravel_index(self.keys, self.radices)) if self.radices else np.zeros((0, len(self.keys)))
        return full[list(cols)]

    def marginal(self, cols: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        cols = list(cols)
        if not cols:
            return np.zeros(1, dtype=np.int64), np.array([self.probs.sum()])
        sub = self.columns(cols)
        key = np.ravel_multi_index(tuple(sub), tuple(self.radices[c] for c in cols))
        uniq, inv = np.unique(key, return_inverse=True)
        return uniq, np.bincount(inv.ravel(), weights=self.probs)

    def entropy(self, cols: Sequence[int]) -> float:
        _, p = self.marginal(cols)
        p = p[p > 0]
        return float(-(p * np.log2(p)).sum())

    def cols(self, *names: str) -> list[int]:
        return [c for nm in names for c in self.groups[nm]]

    def mutual_information(self, a: Sequence[int], b: Sequence[int]) -> float:
        a, b = list(a), list(b)
        return max(self.entropy(a) + self.entropy(b) - self.entropy(a + b), 0.0)


def pushforward(factors: Sequence[np.ndarray], fn: Callable[..., np.ndarray], radices: Sequence[int],
                groups: Mapping[str, list[int]] | None = None, guard: int = MAX_STATES) -> Distribution:
    """Distribution of ``fn(i_1, ..., i_k)`` for independent ``i_j ~ factors[j]``.

    ``fn`` receives one index array per factor and returns an ``(N, c)`` integer
    array whose columns lie in ``range(radices[col])``.
    """
    sizes = [len(f) for f in factors]
    total = math.prod(sizes)
    if total > guard:
        raise GuardExceeded(f"input space has {total} states, above the limit {guard}")
    if math.prod(radices) >= 2**62:
        raise GuardExceeded(f"output space has {math.prod(radices)} cells, too many to index")
    keys, probs = [], []
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        idx = np.unravel_index(flat, sizes) if sizes else ()
        w = np.ones(len(flat))
        for f, i in zip(factors, idx):
            w = w * np.asarray(f)[i]
        live = w > 0
        out = np.asarray(fn(*(i[live] for i in idx)), dtype=np.int64).reshape(int(live.sum()), len(radices))
        k = np.ravel_multi_index(tuple(out.T), tuple(radices)) if len(radices) else np.zeros(len(out), dtype=np.int64)
        uniq, inv = np.unique(k, return_inverse=True)
        keys.append(uniq)
        probs.append(np.bincount(inv.ravel(), weights=w[live]))
    k = np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64)
    p = np.concatenate(probs) if probs else np.zeros(0)
    uniq, inv = np.unique(k, return_inverse=True)
    return Distribution(tuple(radices), uniq, np.bincount(inv.ravel(), weights=p), dict(groups or {}))


def _source_letters(src: JointSource, n: int):
    """Support letters of ``src`` and their probabilities, for n-fold enumeration."""
    flat = src.pmf.ravel()
    support = np.flatnonzero(flat > 0)
    letters = np.array(np.unravel_index(support, src.shape))  # (axes, s)
    return letters, flat[support]


def exact_joint_pushforward(src: JointSource, n: int,
                            maps: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
                            secret_radices: Sequence[int], message_radices: Sequence[int],
                            U: int) -> Distribution:
    """Exact pmf of ``(S, M, X_U^n)`` where ``(S, M) = maps(x, y)``.

    ``x`` has shape ``(N, L, n)`` and ``y`` shape ``(N, D, n)``; ``maps``
    returns integer arrays of shapes ``(N, len(secret_radices))`` and
    ``(N, len(message_radices))``.  ``U`` is a participant bitmask.
    """
    letters, p = _source_letters(src, n)
    L = src.L
    u_members = list(members(U))
    u_radices = [len(src.participant_alphabets[l]) ** n for l in u_members]

    def fn(*pos):
        seq = letters[:, np.stack(pos, axis=1)] if pos else letters[:, np.zeros((1, 0), dtype=np.int64)]
        seq = np.moveaxis(seq, 0, 1)  # (N, axes, n)
        x, y = seq[:, :L, :], seq[:, L:, :]
        s, m = maps(x, y)
        cols = [np.asarray(s).reshape(len(seq), -1), np.asarray(m).reshape(len(seq), -1)]
        for l in u_members:
            k = len(src.participant_alphabets[l])
            cols.append(((x[:, l, :]) * (k ** np.arange(n - 1, -1, -1))).sum(axis=1)[:, None])
        return np.concatenate(cols, axis=1)

    ns, nm = len(secret_radices), len(message_radices)
    radices = list(secret_radices) + list(message_radices) + u_radices
    groups = {"S": list(range(ns)), "M": list(range(ns, ns + nm)),
              "X": list(range(ns + nm, ns + nm + len(u_members)))}
    return pushforward([p] * n, fn, radices, groups)


# --- protocol specs and reports ---------------------------------------------------------


@dataclass(frozen=True)
class ProtocolSpec:
    """Everything needed to run one scheme reproducibly.

    ``threshold-ramp`` uses ``L, t, z, D, m, blocks``.  The binning schemes use
    ``source``, ``access`` and ``params``; ``random-binning`` also needs
    ``rates`` and ``aux_rates`` and ``nested-reconciliation+PA`` needs
    ``hash_lengths``.
    """

    scheme: str
    seed: int
    source: JointSource | None = None
    access: AccessStructure | None = None
    params: ProtocolParams | None = None
    rates: tuple[float, ...] = ()
    aux_rates: tuple[float, ...] = ()
    hash_lengths: tuple[int, ...] = ()
    decode_eps: float = 1.0
    L: int = 0
    t: int = 0
    z: int = 0
    D: int = 1
    m: int = 0
    blocks: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.scheme == "threshold-ramp":
            ThresholdParams(self.t, self.z).check(self.L)
            evaluation_points(self.L, gf_field(self.m))
            if self.D < 1 or self.blocks < 1:
                raise ValidationError("D and blocks must be >= 1")
            return
        if self.source is None or self.access is None or self.params is None:
            raise ValidationError(f"{self.scheme} needs a source, an access structure and params")
        D = self.source.D
        if self.scheme == "random-binning" and (len(self.rates) != D or len(self.aux_rates) != D):
            raise ValidationError(f"random-binning needs {D} rates and {D} auxiliary rates")
        if self.scheme == "nested-reconciliation+PA" and len(self.hash_lengths) != D:
            raise ValidationError(f"nested-reconciliation+PA needs {D} hash lengths")

    @property
    def access_structure(self) -> AccessStructure:
        if self.scheme == "threshold-ramp":
            return threshold_structure(self.L, ThresholdParams(self.t, self.z))
        return self.access

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "ProtocolSpec":
        doc = dict(doc)
        scheme = doc.pop("scheme", None)
        seed = doc.pop("seed", None)
        if scheme is None or seed is None:
            raise ValidationError("spec needs 'scheme' and 'seed'")
        kw: dict = {}
        src = None
        if "source" in doc:
            s = doc.pop("source")
            if isinstance(s, str):
                src = load_source((base / s) if base else s)
            else:
                src = source_from_dict(s)
            kw["source"] = src
        if "access" in doc:
            kw["access"] = parse_access(doc.pop("access"), src.L if src else None)
        if "params" in doc:
            kw["params"] = ProtocolParams(**doc.pop("params"))
        for k in ("rates", "aux_rates"):
            if k in doc:
                kw[k] = tuple(float(v) for v in doc.pop(k))
        if "hash_lengths" in doc:
            kw["hash_lengths"] = tuple(int(v) for v in doc.pop("hash_lengths"))
        for k in ("L", "t", "z", "D", "m", "blocks"):
            if k in doc:
                kw[k] = int(doc.pop(k))
        if "decode_eps" in doc:
            kw["decode_eps"] = float(doc.pop("decode_eps"))
        if doc:
            raise ValidationError(f"unknown spec fields: {sorted(doc)}")
        return cls(scheme=scheme, seed=int(seed), **kw)


@dataclass
class VerificationReport:
    scheme: str
    seed: int
    reliability: list[dict] = field(default_factory=list)
    leakage: list[dict] = field(default_factory=list)
    uniformity_deficit: float | None = None
    rates: list[float] = field(default_factory=list)
    security: str = "checked"
    trials: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max((r["error"] for r in self.reliability), default=0.0)

    @property
    def max_leakage(self) -> float | None:
        vals = [r["bits"] for r in self.leakage if r["bits"] is not None]
        return max(vals, default=None)

    def to_dict(self) -> dict:
        return _round_floats(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _round_floats(obj):
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round_floats(obj.item())
    return obj


def _one_based(mask: int) -> list[int]:
    return [i + 1 for i in members(mask)]


def _sorted_sets(family) -> list[int]:
    return sorted(family, key=lambda m: (popcount(m), m))


# --- threshold-ramp ---------------------------------------------------------------------


def _threshold_distribution(spec: ProtocolSpec) -> Distribution:
    """Exact pmf of (secrets, ciphertext symbols, key symbols) for uniform secrets, randomness and keys."""
    L, t, z, D, m, blocks = spec.L, spec.t, spec.z, spec.D, spec.m, spec.blocks
    gf = gf_field(m)
    q = gf.order
    points = evaluation_points(L, gf)
    ns, nr, nk = D * blocks * (t - z), D * blocks * z, L * D * blocks
    uniform = np.full(q, 1.0 / q)

    def fn(*idx):
        N = len(idx[0]) if idx else 1
        sec = np.stack(idx[:ns], axis=1).reshape(N, D, blocks, t - z)
        rnd = (np.stack(idx[ns:ns + nr], axis=1) if nr else np.zeros((N, 0), dtype=np.int64)).reshape(N, D, blocks, z)
        key = np.stack(idx[ns + nr:], axis=1).reshape(N, L, D, blocks)
        coeffs = np.concatenate([sec, rnd], axis=-1)
        shares = np.moveaxis(evaluate_at(gf, coeffs, points), 0, 1)  # (N, L, D, blocks)
        cipher = shares ^ key  # bitwise one-time pad on m-bit symbols
        return np.concatenate([sec.reshape(N, -1), cipher.reshape(N, -1), key.reshape(N, -1)], axis=1)

    radices = [q] * (ns + 2 * nk)
    groups = {"S": list(range(ns)), "M": list(range(ns, ns + nk)), "K": list(range(ns + nk, ns + 2 * nk))}
    return pushforward([uniform] * (ns + nr + nk), fn, radices, groups)


def _key_columns(spec: ProtocolSpec, dist: Distribution, U: int) -> list[int]:
    """Key-symbol columns observed by coalition ``U`` (all dealers, all blocks)."""
    D, blocks = spec.D, spec.blocks
    base = dist.groups["K"]
    return [base[(l * D + d) * blocks + b] for l in members(U) for d in range(D) for b in range(blocks)]


def _threshold_error_exact(spec: ProtocolSpec, A: int) -> float:
    """Exact reconstruction error for coalition ``A``; enumerates secrets and randomness.

    One-time-pad removal by a member is exact, so the error reduces to the
    interpolation step on the shares of ``A``.
    """
    L, t, z, D, m, blocks = spec.L, spec.t, spec.z, spec.D, spec.m, spec.blocks
    gf = gf_field(m)
    points = evaluation_points(L, gf)
    chosen = [points[l] for l in members(A)][:t]
    V = np.array([vandermonde_row(gf, p, t) for p in chosen], dtype=np.int64)
    Vinv = gf.solve(V, np.eye(t, dtype=np.int64))
    coeffs = _group_sequences([gf.order] * t, 1)[:, :, 0]  # every polynomial of degree < t
    if len(coeffs) > MAX_STATES:
        raise GuardExceeded(f"{len(coeffs)} polynomials exceed the limit {MAX_STATES}")
    shares = evaluate_at(gf, coeffs, chosen).T  # (N, t)
    rec = np.zeros_like(coeffs)
    for i in range(t):
        for j in range(t):
            rec[:, i] ^= gf.mul(Vinv[i, j], shares[:, j])
    wrong = np.any(rec[:, : t - z] != coeffs[:, : t - z], axis=1)
    # dealers and blocks are handled independently with the same map
    return float(1.0 - (1.0 - wrong.mean()) ** (D * blocks))


def _verify_threshold(spec: ProtocolSpec) -> VerificationReport:
    A = spec.access_structure
    report = VerificationReport(spec.scheme, spec.seed, rates=[float(spec.t - spec.z)] * spec.D)
    for a in _sorted_sets(A.authorized):
        report.reliability.append({"set": _one_based(a), "error": _threshold_error_exact(spec, a),
                                   "exact": True, "method": "enumeration"})
    try:
        dist = _threshold_distribution(spec)
    except GuardExceeded as exc:
        report.security = "not computed"
        report.notes.append(str(exc))
        return report
    S = dist.cols("S")
    for u in _sorted_sets(A.unauthorized):
        view = dist.cols("M") + _key_columns(spec, dist, u)
        report.leakage.append({"set": _one_based(u), "bits": dist.mutual_information(S, view), "exact": True})
    report.uniformity_deficit = max(len(S) * spec.m - dist.entropy(S), 0.0)
    return report


# --- binning schemes --------------------------------------------------------------------


def _seq_codes(seqs: np.ndarray, k: int) -> np.ndarray:
    n = seqs.shape[-1]
    return (seqs * (k ** np.arange(n - 1, -1, -1))).sum(axis=-1)


def _binning_maps(spec: ProtocolSpec):
    src, params = spec.source, spec.params
    code = build_binning(src, params, spec.rates, spec.aux_rates, spec.seed)
    ks = [len(a) for a in src.dealer_alphabets]

    def maps(x, y):
        idx = [_seq_codes(y[:, d, :], ks[d]) for d in range(src.D)]
        s = np.stack([code.key[d][idx[d]] for d in range(src.D)], axis=1)
        msg = np.stack([code.aux[d][idx[d]] for d in range(src.D)], axis=1)
        return s, msg

    s_rad = [bin_count(params.n, r) for r in spec.rates]
    m_rad = [bin_count(params.n, r) for r in spec.aux_rates]
    return code, maps, s_rad, m_rad


def _nested_setup(spec: ProtocolSpec):
    src, params = spec.source, spec.params
    n = params.n
    ss = np.random.SeedSequence(spec.seed)
    code_seed, hash_seed = (int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(2))
    schedules = [nested_rate_schedule(src, d, params.eps, params.delta or None) for d in range(src.D)]
    code = build_nested_binning(src, schedules, n, code_seed)
    rng = np.random.default_rng(hash_seed)
    ks = [len(a) for a in src.dealer_alphabets]
    hashes = [ToeplitzHash.random(max(1, n * symbol_width(k)), r, rng) for k, r in zip(ks, spec.hash_lengths)]
    return code, hashes, ks


def _hash_table(h: ToeplitzHash, k: int, n: int) -> np.ndarray:
    """Hash output (as an integer) of every sequence in Y^n."""
    seqs = _group_sequences([k], n)[:, 0, :]
    outs = privacy_amplify([h] * len(seqs), list(seqs), [k] * len(seqs)) if len(seqs) else []
    weights = 1 << np.arange(h.r - 1, -1, -1)
    return np.array([int(o @ weights) if h.r else 0 for o in outs], dtype=np.int64)


def _nested_maps(spec: ProtocolSpec):
    src, n = spec.source, spec.params.n
    code, hashes, ks = _nested_setup(spec)
    tables = [_hash_table(h, k, n) for h, k in zip(hashes, ks)]

    def maps(x, y):
        idx = [_seq_codes(y[:, d, :], ks[d]) for d in range(src.D)]
        s = np.stack([tables[d][idx[d]] for d in range(src.D)], axis=1)
        msg = np.stack([layer[idx[d]] for d in range(src.D) for layer in code.layers[d]], axis=1)
        return s, msg

    s_rad = [1 << h.r for h in hashes]
    m_rad = [bin_count(n, r) for sch in code.schedules for r in sch.layer_rates]
    return code, hashes, maps, s_rad, m_rad


def _leakage_rows(spec: ProtocolSpec, maps, s_rad, m_rad, report: VerificationReport) -> None:
    A = spec.access_structure
    src, n = spec.source, spec.params.n
    if not A.unauthorized:
        report.security = "vacuous"
        return
    try:
        for u in _sorted_sets(A.unauthorized):
            dist = exact_joint_pushforward(src, n, maps, s_rad, m_rad, u)
            S = dist.cols("S")
            report.leakage.append({"set": _one_based(u), "bits": dist.mutual_information(S, dist.cols("M", "X")),
                                   "exact": True})
        report.uniformity_deficit = max(sum(math.log2(r) for r in s_rad) - dist.entropy(S), 0.0)
    except GuardExceeded as exc:
        report.security = "not computed"
        report.notes.append(str(exc))


def _nested_error_exact(spec: ProtocolSpec, code) -> float:
    src, n = spec.source, spec.params.n
    letters, p = _source_letters(src, n)
    total = len(p) ** n
    if total > 2**16:
        raise GuardExceeded(f"exact successive decoding needs {total} decoder runs, above 65536")
    err = 0.0
    for flat in range(total):
        pos = np.unravel_index(flat, (len(p),) * n)
        seq = letters[:, list(pos)]
        x, y = seq[: src.L], seq[src.L:]
        msgs = code.encode(list(y))
        res = successive_decode(code, msgs, x, spec.decode_eps)
        if any(r.failed or not np.array_equal(r.ys[0], y[d]) for d, r in enumerate(res)):
            err += float(np.prod(p[list(pos)]))
    return err


def verify_protocol(spec: ProtocolSpec) -> VerificationReport:
    """Exact reliability per authorized set, leakage per unauthorized set, and uniformity deficit."""
    if spec.scheme == "threshold-ramp":
        return _verify_threshold(spec)
    A = spec.access_structure
    report = VerificationReport(spec.scheme, spec.seed)
    if spec.scheme == "random-binning":
        code, maps, s_rad, m_rad = _binning_maps(spec)
        report.rates = list(spec.rates)
        for a in _sorted_sets(A.authorized):
            rel = binning_error_exact(code, a, spec.decode_eps)
            report.reliability.append({"set": _one_based(a), "error": rel.error, "exact": True,
                                       "method": "enumeration"})
    else:
        code, hashes, maps, s_rad, m_rad = _nested_maps(spec)
        report.rates = [h.r / spec.params.n for h in hashes]
        try:
            err = _nested_error_exact(spec, code)
            report.reliability.append({"set": _one_based(A.full), "error": err, "exact": True,
                                       "method": "enumeration"})
        except GuardExceeded as exc:
            report.notes.append(str(exc))
    _leakage_rows(spec, maps, s_rad, m_rad, report)
    return report


# --- Monte-Carlo ------------------------------------------------------------------------


def wilson_interval(failures: int, trials: int) -> tuple[float, float]:
    lo, hi = proportion_confint(failures, trials, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def _trial_threshold(spec: ProtocolSpec, seed: int) -> dict[int, bool]:
    L, t, z, D, m, blocks = spec.L, spec.t, spec.z, spec.D, spec.m, spec.blocks
    rng = np.random.default_rng(seed)
    keys = PairwiseKeys.generate(L, D, m * blocks, int(rng.integers(2**63)))
    secrets = rng.integers(0, 1 << m, size=(D, blocks, t - z))
    bcs = [dealer_broadcast(keys, d, ramp_share(secrets[d], t, z, L, m, seed=int(rng.integers(2**63))))
           for d in range(D)]
    out = {}
    for a in spec.access_structure.authorized:
        rec = participant_recover(bcs, keys, members(a), t, z, m)
        out[a] = any(not np.array_equal(rec[d], secrets[d]) for d in range(D))
    return out


def _trial_binning(spec: ProtocolSpec, code, seed: int) -> dict[int, bool]:
    block = sample_block(spec.source, spec.params.n, seed)
    msgs, _ = _encode_block(code, block)
    out = {}
    for a in spec.access_structure.authorized:
        x = block.participants[list(members(a))]
        res = decode_binning(code, msgs, x, a, spec.decode_eps)
        out[a] = res.failed or any(not np.array_equal(res.ys[d], block.dealers[d]) for d in range(code.D))
    return out


def _encode_block(code, block):
    return encode_binning(code, list(block.dealers))


def _trial_nested(spec: ProtocolSpec, code, seed: int) -> dict[int, bool]:
    block = sample_block(spec.source, spec.params.n, seed)
    res = successive_decode(code, code.encode(list(block.dealers)), block.participants, spec.decode_eps)
    failed = any(r.failed or not np.array_equal(r.ys[0], block.dealers[d]) for d, r in enumerate(res))
    return {spec.access_structure.full: failed}


def simulate(spec: ProtocolSpec, trials: int, seed: int) -> VerificationReport:
    """Monte-Carlo reliability with Wilson 95% intervals; leakage only where exactly computable."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    streams = [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(trials)]
    if spec.scheme == "threshold-ramp":
        run = lambda s: _trial_threshold(spec, s)
        exact = _verify_threshold(spec)
    elif spec.scheme == "random-binning":
        code, maps, s_rad, m_rad = _binning_maps(spec)
        run = lambda s: _trial_binning(spec, code, s)
        exact = VerificationReport(spec.scheme, spec.seed, rates=list(spec.rates))
        _leakage_rows(spec, maps, s_rad, m_rad, exact)
    else:
        code, hashes, maps, s_rad, m_rad = _nested_maps(spec)
        run = lambda s: _trial_nested(spec, code, s)
        exact = VerificationReport(spec.scheme, spec.seed, rates=[h.r / spec.params.n for h in hashes])
        _leakage_rows(spec, maps, s_rad, m_rad, exact)
    failures: dict[int, int] = {}
    for s in streams:
        for a, bad in run(s).items():
            failures[a] = failures.get(a, 0) + int(bad)
    report = VerificationReport(spec.scheme, seed, leakage=exact.leakage,
                                uniformity_deficit=exact.uniformity_deficit, rates=exact.rates,
                                security=exact.security, trials=trials, notes=exact.notes)
    for a in _sorted_sets(failures):
        lo, hi = wilson_interval(failures[a], trials)
        report.reliability.append({"set": _one_based(a), "error": failures[a] / trials, "exact": False,
                                   "method": "wilson-95", "ci_low": lo, "ci_high": hi})
    return report


# --- transcripts ------------------------------------------------------------------------


def transcript(spec: ProtocolSpec, seed: int) -> dict:
    """One run of a binning scheme: per-dealer public layers and share, hash seeds, top-level seed."""
    if spec.scheme == "threshold-ramp":
        raise ValidationError("use the threshold share command for ramp transcripts")
    block = sample_block(spec.source, spec.params.n, seed)
    dealers = []
    if spec.scheme == "random-binning":
        code, *_ = _binning_maps(spec)
        msgs, keys = _encode_block(code, block)
        for d in range(code.D):
            share = serialize_symbols([keys[d]], bin_count(spec.params.n, spec.rates[d]))
            dealers.append({"layers": [int(msgs[d])], "share": bits_to_hex(share)})
        hash_seeds = []
    else:
        code, hashes, ks = _nested_setup(spec)
        layers = code.encode(list(block.dealers))
        shares = privacy_amplify(hashes, list(block.dealers), ks)
        for d in range(spec.source.D):
            dealers.append({"layers": [int(v) for v in layers[d]], "share": bits_to_hex(shares[d])})
        hash_seeds = [h.seed_hex() for h in hashes]
    return {"scheme": spec.scheme, "seed": f"{spec.seed:016x}", "sample_seed": f"{seed:016x}",
            "dealers": dealers, "hash_seeds": hash_seeds}
