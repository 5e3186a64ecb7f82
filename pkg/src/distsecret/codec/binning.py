"""Random binning codes, typicality decoding and nested reconciliation schedules.

Sequences over an alphabet of size ``k`` are indexed base ``k`` with the first
letter most significant, so ``all_sequences(k, n)[i]`` is the sequence with
index ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from ..errors import GuardExceeded, ValidationError
from ..source import GroupSelector, JointSource, conditional_entropy, dealers_of

MAX_SEQUENCES = 2**22
MAX_PAIRS = 2**24


@dataclass(frozen=True)
class ProtocolParams:
    """Block length, repetitions and slack terms.

    ``delta_eps`` and ``delta_n`` are finite-length stand-ins for the vanishing
    slack terms of the asymptotic analysis; they default to zero.
    """

    n: int
    B: int = 1
    eps: float = 0.1
    delta: float = 0.0
    xi: float = 0.0
    delta_eps: float = 0.0
    delta_n: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.B < 1:
            raise ValidationError("n and B must be >= 1")
        if not self.eps > 0:
            raise ValidationError("eps must be positive")
        if min(self.delta, self.xi, self.delta_eps, self.delta_n) < 0:
            raise ValidationError("slack terms must be non-negative")


def _guard(count: int, what: str, limit: int = MAX_SEQUENCES) -> None:
    if count > limit:
        raise GuardExceeded(f"{what} has {count} elements, above the limit {limit}")


def all_sequences(k: int, n: int) -> np.ndarray:
    _guard(k**n, f"alphabet {k} at n={n}")
    if k == 1:
        return np.zeros((1, n), dtype=np.int64)
    idx = np.arange(k**n, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers) % k


def sequence_index(seq: Sequence[int], k: int) -> int:
    out = 0
    for s in seq:
        if not 0 <= s < k:
            raise IndexError(f"symbol {s} outside alphabet of size {k}")
        out = out * k + int(s)
    return out


def bin_count(n: int, rate: float) -> int:
    """``ceil(2^{n R})``, at least 1."""
    if rate < 0:
        raise ValidationError(f"rate must be non-negative, got {rate}")
    if n * rate > 62:
        raise ValidationError(f"n*R = {n * rate:.3g} bits is too large for an index")
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


def _draw_map(rng: np.random.Generator, size: int, bins: int, injective: bool) -> np.ndarray:
    if injective:
        if bins < size:
            raise ValidationError(f"injective binning needs {size} bins, only {bins} available")
        if bins <= 4 * size:
            return rng.permutation(bins)[:size].astype(np.int64)
        # sparse draw without replacement from a large range
        chosen = set()
        out = np.empty(size, dtype=np.int64)
        for i in range(size):
            v = int(rng.integers(bins))
            while v in chosen:
                v = int(rng.integers(bins))
            chosen.add(v)
            out[i] = v
        return out
    return rng.integers(bins, size=size, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class BinningCode:
    """Per-dealer maps ``aux[d]`` (public message) and ``key[d]`` (secret index) on all of Y_d^n."""

    src: JointSource
    n: int
    rates: tuple[float, ...]
    aux_rates: tuple[float, ...]
    aux: tuple[np.ndarray, ...]
    key: tuple[np.ndarray, ...]
    seed: int

    @property
    def D(self) -> int:
        return len(self.aux)

    def alphabet(self, d: int) -> int:
        return len(self.src.dealer_alphabets[d])

    def bin_members(self, d: int, message: int) -> np.ndarray:
        return np.flatnonzero(self.aux[d] == message)


def build_binning(src: JointSource, params: ProtocolParams, rates: Sequence[float],
                  aux_rates: Sequence[float], seed: int, injective: bool = False) -> BinningCode:
    """Seeded uniform binning; ``injective`` makes every public-message bin a singleton."""
    D = src.D
    if len(rates) != D or len(aux_rates) != D:
        raise ValidationError(f"need {D} rates and {D} auxiliary rates")
    n = params.n
    children = np.random.SeedSequence(seed).spawn(D)
    aux, key = [], []
    for d in range(D):
        size = len(src.dealer_alphabets[d]) ** n
        _guard(size, f"Y_{d + 1}^n")
        rng = np.random.default_rng(children[d])
        aux.append(_draw_map(rng, size, bin_count(n, aux_rates[d]), injective))
        key.append(_draw_map(rng, size, bin_count(n, rates[d]), False))
    return BinningCode(src, n, tuple(map(float, rates)), tuple(map(float, aux_rates)),
                       tuple(aux), tuple(key), int(seed))


def encode_binning(code: BinningCode, ys: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Public messages and secret indices for dealer sequences ``ys``."""
    if len(ys) != code.D:
        raise ValidationError(f"need {code.D} dealer sequences")
    idx = [sequence_index(y, code.alphabet(d)) for d, y in enumerate(ys)]
    return (tuple(int(code.aux[d][i]) for d, i in enumerate(idx)),
            tuple(int(code.key[d][i]) for d, i in enumerate(idx)))


@dataclass(frozen=True, eq=False)
class DecodeResult:
    ys: tuple[np.ndarray, ...]
    failed: bool
    candidates: int


def _fallback(code_n: int, D: int) -> tuple[np.ndarray, ...]:
    return tuple(np.zeros(code_n, dtype=np.int64) for _ in range(D))


def _joint_marginal(src: JointSource, participants: int, dealers: int) -> np.ndarray:
    return src.marginal(GroupSelector(participants=dealers_of(participants), dealers=dealers_of(dealers)))


def _typical_rows(marg: np.ndarray, fixed: np.ndarray, cand: np.ndarray, eps: float) -> np.ndarray:
    """Letter typicality of ``[fixed; cand[c]]`` for every candidate ``c``.

    ``fixed`` has shape (a, n) and ``cand`` has shape (C, b, n) with
    ``a + b = marg.ndim``.
    """
    C, _, n = cand.shape
    rows = np.concatenate([np.broadcast_to(fixed, (C,) + fixed.shape), cand], axis=1)
    flat = np.zeros((C, n), dtype=np.int64)
    for axis, k in enumerate(marg.shape):
        flat = flat * k + rows[:, axis, :]
    counts = np.zeros((C, marg.size))
    np.add.at(counts, (np.repeat(np.arange(C), n), flat.ravel()), 1.0)
    p = marg.ravel()
    return np.all(np.abs(counts / n - p) <= eps * p + 1e-12, axis=1)


def decode_binning(code: BinningCode, messages: Sequence[int], x: np.ndarray, participants: int,
                eps: float) -> DecodeResult:
    """Unique jointly typical ``y_D^n`` in the announced bins, given ``x`` for ``participants``.

    ``x`` holds one row per participant in the bitmask, in increasing order.
    Zero or several candidates give the all-zero-index sequences and ``failed``.
    """
    D, n = code.D, code.n
    x = np.asarray(x, dtype=np.int64).reshape(-1, n)
    if x.shape[0] != len(dealers_of(participants)):
        raise ValidationError("one row of x is needed per participant in the set")
    members = [code.bin_members(d, int(m)) for d, m in enumerate(messages)]
    total = math.prod(len(m) for m in members)
    _guard(total, "candidate set")
    if total == 0:
        return DecodeResult(_fallback(n, D), True, 0)
    marg = _joint_marginal(code.src, participants, (1 << D) - 1)
    seqs = [all_sequences(code.alphabet(d), n)[m] for d, m in enumerate(members)]
    combos = np.array(list(product(*(range(len(m)) for m in members))), dtype=np.int64)
    cand = np.stack([seqs[d][combos[:, d]] for d in range(D)], axis=1)
    ok = np.flatnonzero(_typical_rows(marg, x, cand, eps))
    if len(ok) != 1:
        return DecodeResult(_fallback(n, D), True, int(len(ok)))
    return DecodeResult(tuple(cand[ok[0]]), False, 1)


def _group_sequences(sizes: Sequence[int], n: int) -> np.ndarray:
    """All joint sequences of a group, shape (N, len(sizes), n), C order over members."""
    per = [all_sequences(k, n) for k in sizes]
    total = math.prod(len(p) for p in per)
    _guard(total, "joint sequence set")
    if not per:
        return np.zeros((1, 0, n), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(len(p)) for p in per], indexing="ij")
    return np.stack([p[g.ravel()] for p, g in zip(per, grids)], axis=1)


def _letter_codes(seqs: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    flat = np.zeros((seqs.shape[0], seqs.shape[2]), dtype=np.int64)
    for axis, k in enumerate(sizes):
        flat = flat * k + seqs[:, axis, :]
    return flat


@dataclass(frozen=True)
class ReliabilityReport:
    error: float
    atypical: float
    ambiguous: float


def binning_error_exact(code: BinningCode, participants: int, eps: float) -> ReliabilityReport:
    """Exact probability that ``decode_binning`` misses ``y_D^n``.

    ``atypical`` is the mass where the true pair is not jointly typical and
    ``ambiguous`` the mass where another typical candidate shares its bins.
    """
    src, n, D = code.src, code.n, code.D
    xs_sizes = [len(src.participant_alphabets[l]) for l in sorted(dealers_of(participants))]
    ys_sizes = [code.alphabet(d) for d in range(D)]
    xseq = _group_sequences(xs_sizes, n)
    yseq = _group_sequences(ys_sizes, n)
    _guard(len(xseq) * len(yseq), "sequence pair table", MAX_PAIRS)
    Kx, Ky = math.prod(xs_sizes), math.prod(ys_sizes)
    xl = _letter_codes(xseq, xs_sizes)
    yl = _letter_codes(yseq, ys_sizes)
    p = _joint_marginal(src, participants, (1 << D) - 1).reshape(Kx, Ky)
    with np.errstate(divide="ignore"):
        logp = np.log2(p)
    y_onehot = np.zeros((len(yl), n, Ky))
    np.put_along_axis(y_onehot, yl[:, :, None], 1.0, axis=2)
    # one bin label per joint public message
    aux = np.stack([code.aux[d] for d in range(D)], axis=1)
    y_index = np.stack(np.meshgrid(*[np.arange(k**n) for k in ys_sizes], indexing="ij"), axis=-1).reshape(-1, D)
    msg = aux[y_index, np.arange(D)]
    _, bin_id = np.unique(msg, axis=0, return_inverse=True)
    bin_id = bin_id.ravel()
    nbins = int(bin_id.max()) + 1
    atyp = amb = 0.0
    for xi in range(len(xl)):
        x_onehot = np.zeros((n, Kx))
        x_onehot[np.arange(n), xl[xi]] = 1.0
        counts = np.einsum("na,ynb->yab", x_onehot, y_onehot).reshape(len(yl), -1)
        with np.errstate(invalid="ignore"):
            lp = np.where(counts > 0, counts * logp.ravel(), 0.0).sum(axis=1)
        prob = np.exp2(lp)
        if not prob.any():
            continue
        pv = p.ravel()
        typ = np.all(np.abs(counts / n - pv) <= eps * pv + 1e-12, axis=1)
        occupancy = np.bincount(bin_id[typ], minlength=nbins)
        atyp += prob[~typ].sum()
        amb += prob[typ & (occupancy[bin_id] > 1)].sum()
    return ReliabilityReport(float(atyp + amb), float(atyp), float(amb))


# --- nested binning for successive reconciliation -------------------------------------


@dataclass(frozen=True)
class NestedBinningSchedule:
    """Layer rates for one dealer.

    ``thresholds[j]`` is the cumulative rate after ``j + 1`` layers and
    ``subsets[j]`` the dealer subset that produced it; ``layer_rates`` has one
    more entry, the top layer.
    """

    dealer: int
    thresholds: tuple[float, ...]
    subsets: tuple[int, ...]
    layer_rates: tuple[float, ...]
    conditional_entropy: float
    delta: float
    eps: float

    @property
    def total_rate(self) -> float:
        return math.fsum(self.layer_rates)


def default_delta(h: float, eps: float) -> float:
    return 3 * eps * h + eps


def nested_rate_schedule(src: JointSource, dealer: int, eps: float, delta: float | None = None) -> NestedBinningSchedule:
    """Sorted thresholds ``max(H(Y_i | Y_{<i} Y_S X_L) - delta, 0)`` over all dealer subsets S."""
    if not 0 <= dealer < src.D:
        raise ValidationError(f"dealer index {dealer} out of range")
    if eps <= 0:
        raise ValidationError("eps must be positive")
    D = src.D
    xl = GroupSelector(participants=frozenset(range(src.L)))
    before = frozenset(range(dealer))
    yi = GroupSelector(dealers=frozenset({dealer}))
    h = conditional_entropy(src, yi, xl | GroupSelector(dealers=before))
    if delta is None:
        delta = default_delta(h, eps)
    if delta < 0:
        raise ValidationError("delta must be non-negative")
    entries = []
    for S in range(1 << D):
        given = xl | GroupSelector(dealers=before | dealers_of(S))
        entries.append((max(conditional_entropy(src, yi, given) - delta, 0.0), S))
    entries.sort()
    thresholds = tuple(v for v, _ in entries)
    increments = [thresholds[0]] + [b - a for a, b in zip(thresholds, thresholds[1:])]
    top = delta + eps * h + eps
    return NestedBinningSchedule(dealer, thresholds, tuple(S for _, S in entries),
                                 tuple(increments) + (top,), h, delta, eps)


@dataclass(frozen=True, eq=False)
class NestedBinningCode:
    """``layers[d][j]`` maps every index of Y_d^n to its layer-``j`` bin."""

    src: JointSource
    n: int
    schedules: tuple[NestedBinningSchedule, ...]
    layers: tuple[tuple[np.ndarray, ...], ...]
    seed: int

    def encode(self, ys: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
        out = []
        for d, y in enumerate(ys):
            i = sequence_index(y, len(self.src.dealer_alphabets[d]))
            out.append(tuple(int(t[i]) for t in self.layers[d]))
        return tuple(out)


def build_nested_binning(src: JointSource, schedules: Sequence[NestedBinningSchedule], n: int,
                         seed: int) -> NestedBinningCode:
    children = np.random.SeedSequence(seed).spawn(len(schedules))
    layers = []
    for sch, child in zip(schedules, children):
        size = len(src.dealer_alphabets[sch.dealer]) ** n
        _guard(size, f"Y_{sch.dealer + 1}^n")
        rng = np.random.default_rng(child)
        layers.append(tuple(_draw_map(rng, size, bin_count(n, r), False) for r in sch.layer_rates))
    return NestedBinningCode(src, n, tuple(schedules), tuple(layers), int(seed))


def successive_decode(code: NestedBinningCode, messages: Sequence[Sequence[int]], x: np.ndarray,
                      eps: float) -> list[DecodeResult]:
    """Decode dealers in index order, each conditioned on all participants and earlier estimates."""
    src, n = code.src, code.n
    x = np.asarray(x, dtype=np.int64).reshape(src.L, n)
    full = (1 << src.L) - 1
    decoded: list[np.ndarray] = []
    results = []
    for d, msgs in enumerate(messages):
        k = len(src.dealer_alphabets[d])
        mask = np.ones(k**n, dtype=bool)
        for table, m in zip(code.layers[d], msgs):
            mask &= table == int(m)
        members = np.flatnonzero(mask)
        marg = _joint_marginal(src, full, (1 << (d + 1)) - 1)
        if len(members):
            fixed = np.concatenate([x] + [s[None, :] for s in decoded]) if decoded else x
            cand = all_sequences(k, n)[members][:, None, :]
            ok = np.flatnonzero(_typical_rows(marg, fixed, cand, eps))
        else:
            ok = np.array([], dtype=np.int64)
        if len(ok) == 1:
            y = cand[ok[0], 0]
            results.append(DecodeResult((y,), False, 1))
        else:
            y = np.zeros(n, dtype=np.int64)
            results.append(DecodeResult((y,), True, int(len(ok))))
        decoded.append(y)
    return results
