"""Discrete memoryless sources with exact Shannon quantities.

A :class:`JointSource` holds a dense pmf over the product of ``L`` participant
alphabets followed by ``D`` dealer alphabets.  Axis ``l`` of the table is
participant ``l`` and axis ``L + d`` is dealer ``d`` (both 0-based).

All information quantities are in bits and use ``0 log 0 = 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import GuardExceeded, ValidationError

MAX_CELLS = 2**24
NORMALIZATION_TOL = 1e-12
FILE_NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    name: str
    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if not self.symbols:
            raise ValidationError(f"alphabet {self.name!r} is empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError(f"alphabet {self.name!r} has repeated symbols")

    def __len__(self) -> int:
        return len(self.symbols)

    @classmethod
    def of_size(cls, name: str, k: int) -> "Alphabet":
        return cls(name, tuple(str(i) for i in range(k)))


@dataclass(frozen=True)
class GroupSelector:
    """A set of dealers and a set of participants (0-based indices)."""

    dealers: frozenset[int] = frozenset()
    participants: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "dealers", frozenset(self.dealers))
        object.__setattr__(self, "participants", frozenset(self.participants))

    def __or__(self, other: "GroupSelector") -> "GroupSelector":
        return GroupSelector(self.dealers | other.dealers, self.participants | other.participants)

    @property
    def empty(self) -> bool:
        return not self.dealers and not self.participants


def sel(dealers: Iterable[int] = (), participants: Iterable[int] = ()) -> GroupSelector:
    """Shorthand constructor for :class:`GroupSelector`."""
    return GroupSelector(frozenset(dealers), frozenset(participants))


def dealers_of(mask: int) -> frozenset[int]:
    """Indices set in a bitmask."""
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def _entropy_of(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True, eq=False)
class JointSource:
    participant_alphabets: tuple[Alphabet, ...]
    dealer_alphabets: tuple[Alphabet, ...]
    pmf: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "participant_alphabets", tuple(self.participant_alphabets))
        object.__setattr__(self, "dealer_alphabets", tuple(self.dealer_alphabets))
        if self.L < 1 or self.D < 1:
            raise ValidationError("a source needs at least one participant and one dealer")
        shape = tuple(len(a) for a in self.participant_alphabets + self.dealer_alphabets)
        cells = math.prod(shape)
        if cells > MAX_CELLS:
            raise GuardExceeded(f"pmf table has {cells} cells (> {MAX_CELLS})")
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.shape != shape:
            raise ValidationError(f"pmf shape {pmf.shape} does not match alphabets {shape}")
        if np.any(pmf < 0):
            raise ValidationError("pmf has negative entries")
        total = float(pmf.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"pmf sums to {total!r}, not 1")
        pmf = pmf.copy()
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def L(self) -> int:
        return len(self.participant_alphabets)

    @property
    def D(self) -> int:
        return len(self.dealer_alphabets)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.pmf.shape

    @property
    def mu(self) -> float:
        """Smallest positive probability of the joint pmf."""
        return float(self.pmf[self.pmf > 0].min())

    def axes(self, group: GroupSelector) -> tuple[int, ...]:
        for l in group.participants:
            if not 0 <= l < self.L:
                raise IndexError(f"participant index {l} out of range [0, {self.L})")
        for d in group.dealers:
            if not 0 <= d < self.D:
                raise IndexError(f"dealer index {d} out of range [0, {self.D})")
        return tuple(sorted(group.participants)) + tuple(sorted(self.L + d for d in group.dealers))

    def marginal(self, group: GroupSelector) -> np.ndarray:
        """Marginal pmf with axes ordered participants first, then dealers."""
        keep = self.axes(group)
        drop = tuple(a for a in range(self.pmf.ndim) if a not in keep)
        return self.pmf.sum(axis=drop) if drop else self.pmf

    def entropy(self, group: GroupSelector) -> float:
        keep = frozenset(self.axes(group))
        if not keep:
            return 0.0
        try:
            return self._cache[keep]
        except KeyError:
            h = _entropy_of(self.marginal(group).ravel())
            self._cache[keep] = h
            return h

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(source_to_dict(self), indent=2, sort_keys=True))


def conditional_entropy(src: JointSource, target: GroupSelector, given: GroupSelector = GroupSelector()) -> float:
    """H(target | given) in bits."""
    return src.entropy(target | given) - src.entropy(given)


def conditional_mutual_information(
    src: JointSource, a: GroupSelector, b: GroupSelector, given: GroupSelector = GroupSelector()
) -> float:
    """I(a; b | given) in bits."""
    return (
        src.entropy(a | given)
        + src.entropy(b | given)
        - src.entropy(a | b | given)
        - src.entropy(given)
    )


def mutual_information(src: JointSource, a: GroupSelector, b: GroupSelector) -> float:
    return conditional_mutual_information(src, a, b)


@dataclass(frozen=True, eq=False)
class SampleBlock:
    """``n`` i.i.d. draws; ``participants[l]`` and ``dealers[d]`` are index sequences."""

    n: int
    participants: np.ndarray
    dealers: np.ndarray
    seed: int | None = None

    def sequences(self, group: GroupSelector) -> np.ndarray:
        rows = [self.participants[l] for l in sorted(group.participants)]
        rows += [self.dealers[d] for d in sorted(group.dealers)]
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.n)


def is_typical(src: JointSource, block: SampleBlock, eps: float, group: GroupSelector) -> bool:
    """Letter typicality of the ``group`` coordinates of ``block`` w.r.t. ``src``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    seqs = block.sequences(group)
    marg = src.marginal(group)
    if seqs.shape[0] == 0:
        return True
    for row, k in zip(seqs, marg.shape):
        if row.min(initial=0) < 0 or row.max(initial=0) >= k:
            raise IndexError("symbol index out of range")
    return letter_typical(marg, seqs, eps)


def letter_typical(marg: np.ndarray, seqs: np.ndarray, eps: float) -> bool:
    """Typicality of the columns of ``seqs`` (one row per axis of ``marg``)."""
    n = seqs.shape[1]
    flat = np.ravel_multi_index(tuple(seqs), marg.shape)
    freq = np.bincount(flat, minlength=marg.size) / n
    p = marg.ravel()
    return bool(np.all(np.abs(freq - p) <= eps * p + 1e-12))


def sample_block(src: JointSource, n: int, seed: int) -> SampleBlock:
    """Draw ``n`` i.i.d. letters from ``src`` using a PCG64 stream seeded by ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    flat = src.pmf.ravel()
    draws = rng.choice(flat.size, size=n, p=flat)
    coords = np.array(np.unravel_index(draws, src.shape), dtype=np.int64)
    return SampleBlock(n, coords[: src.L], coords[src.L :], seed)


def pairwise_key_source(L: int, D: int) -> JointSource:
    """Independent uniform key bits ``K[l, d]``; ``X_l = (K[l, d])_d`` and ``Y_d = (K[l, d])_l``.

    Symbol ``j`` of ``X_l`` has bit ``d`` equal to ``K[l, d]``; symbol ``j`` of
    ``Y_d`` has bit ``l`` equal to ``K[l, d]``.  The dense table has
    ``2**(2 L D)`` cells, so it is guarded at ``L * D <= 12``.
    """
    if L < 1 or D < 1:
        raise ValidationError("L and D must be >= 1")
    if 4 ** (L * D) > MAX_CELLS:
        raise GuardExceeded(f"pairwise key source with L*D = {L * D} needs {4 ** (L * D)} cells")
    pa = tuple(Alphabet.of_size(f"X{l + 1}", 2**D) for l in range(L))
    da = tuple(Alphabet.of_size(f"Y{d + 1}", 2**L) for d in range(D))
    pmf = np.zeros((2**D,) * L + (2**L,) * D)
    keys = np.array(list(product((0, 1), repeat=L * D)), dtype=np.int64).reshape(-1, L, D)
    xs = (keys << np.arange(D)).sum(axis=2)  # (outcomes, L)
    ys = (keys << np.arange(L)[:, None]).sum(axis=1)  # (outcomes, D)
    idx = tuple(xs.T) + tuple(ys.T)
    pmf[idx] = 2.0 ** (-L * D)
    return JointSource(pa, da, pmf)


def from_arrays(pmf: np.ndarray, L: int, names: Sequence[str] | None = None) -> JointSource:
    """Build a source from an ndarray whose first ``L`` axes are participants."""
    pmf = np.asarray(pmf, dtype=float)
    D = pmf.ndim - L
    names = list(names) if names else [f"X{l + 1}" for l in range(L)] + [f"Y{d + 1}" for d in range(D)]
    alph = [Alphabet.of_size(nm, k) for nm, k in zip(names, pmf.shape)]
    return JointSource(alph[:L], alph[L:], pmf)


def random_source(rng: np.random.Generator, participant_sizes: Sequence[int], dealer_sizes: Sequence[int],
                  concentration: float = 1.0) -> JointSource:
    """Dirichlet-random joint pmf; useful for property tests and sweeps."""
    shape = tuple(participant_sizes) + tuple(dealer_sizes)
    p = rng.dirichlet(np.full(math.prod(shape), concentration)).reshape(shape)
    return from_arrays(p, len(participant_sizes))


def source_to_dict(src: JointSource) -> dict:
    alph = src.participant_alphabets + src.dealer_alphabets
    rows = []
    for idx in zip(*np.nonzero(src.pmf)):
        rows.append({"outcome": [a.symbols[i] for a, i in zip(alph, idx)], "p": float(src.pmf[idx])})
    return {
        "participants": [{"name": a.name, "symbols": list(a.symbols)} for a in src.participant_alphabets],
        "dealers": [{"name": a.name, "symbols": list(a.symbols)} for a in src.dealer_alphabets],
        "pmf": rows,
    }


def source_from_dict(doc: dict) -> JointSource:
    try:
        pa = [Alphabet(a["name"], tuple(a["symbols"])) for a in doc["participants"]]
        da = [Alphabet(a["name"], tuple(a["symbols"])) for a in doc["dealers"]]
        rows = doc["pmf"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed source document: {exc}") from exc
    alph = pa + da
    shape = tuple(len(a) for a in alph)
    cells = math.prod(shape)
    if cells > MAX_CELLS:
        raise GuardExceeded(f"pmf table has {cells} cells (> {MAX_CELLS})")
    lookup = [{s: i for i, s in enumerate(a.symbols)} for a in alph]
    pmf = np.zeros(shape)
    for row in rows:
        outcome = row["outcome"]
        if len(outcome) != len(alph):
            raise ValidationError(f"outcome {outcome} has wrong arity")
        try:
            idx = tuple(lk[str(s)] for lk, s in zip(lookup, outcome))
        except KeyError as exc:
            raise ValidationError(f"unknown symbol {exc} in outcome {outcome}") from exc
        p = float(row["p"])
        if p < 0:
            raise ValidationError(f"negative probability for {outcome}")
        pmf[idx] += p
    total = float(pmf.sum())
    if abs(total - 1.0) > FILE_NORMALIZATION_TOL:
        raise ValidationError(f"probabilities sum to {total!r}")
    return JointSource(pa, da, pmf / total)


def load_source(path: str | Path) -> JointSource:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return source_from_dict(doc)
