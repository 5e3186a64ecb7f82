"""Ramp secret sharing over GF(2^m) delivered with pairwise one-time pads.

Each dealer splits ``t - z`` field symbols per block into ``L`` shares with a
degree ``t - 1`` polynomial whose top ``z`` coefficients are random, then
encrypts share ``l`` with the key it shares with participant ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .access import ThresholdParams
from .errors import KeyExhausted, ValidationError
from .gf import GF, field
from .codec.hashing import serialize_symbols


@dataclass(eq=False)
class PairwiseKeys:
    """Key bits ``bits[l, d]`` shared by participant ``l`` and dealer ``d``, with usage counters."""

    bits: np.ndarray
    seed: int | None = None
    used: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 3:
            raise ValidationError("key array must have shape (L, D, nbits)")
        if self.used is None:
            self.used = np.zeros(self.bits.shape[:2], dtype=np.int64)

    @classmethod
    def generate(cls, L: int, D: int, nbits: int, seed: int) -> "PairwiseKeys":
        rng = np.random.default_rng(seed)
        return cls(rng.integers(0, 2, size=(L, D, nbits), dtype=np.uint8), seed)

    @property
    def L(self) -> int:
        return self.bits.shape[0]

    @property
    def D(self) -> int:
        return self.bits.shape[1]

    @property
    def length(self) -> int:
        return self.bits.shape[2]

    def take(self, l: int, d: int, count: int) -> tuple[int, np.ndarray]:
        """Consume the next ``count`` unused bits; returns their offset and values."""
        start = int(self.used[l, d])
        if start + count > self.length:
            raise KeyExhausted(
                f"key ({l + 1},{d + 1}) has {self.length - start} unused bits, {count} requested"
            )
        self.used[l, d] = start + count
        return start, self.bits[l, d, start:start + count]

    def peek(self, l: int, d: int, offset: int, count: int) -> np.ndarray:
        if offset + count > self.length:
            raise KeyExhausted(f"key ({l + 1},{d + 1}) is shorter than offset {offset} + {count}")
        return self.bits[l, d, offset:offset + count]


@dataclass(frozen=True, eq=False)
class RampShareSet:
    """``shares[l, b]`` is participant ``l``'s share of block ``b``, evaluated at ``points[l]``."""

    m: int
    t: int
    z: int
    points: tuple[int, ...]
    shares: np.ndarray

    @property
    def blocks(self) -> int:
        return self.shares.shape[1]


def evaluation_points(L: int, gf: GF) -> tuple[int, ...]:
    """Points ``1..L``; when ``L = 2^m`` the last participant sits at infinity (encoded ``2^m``)."""
    if L < gf.order:
        return tuple(range(1, L + 1))
    if L == gf.order:
        return tuple(range(1, gf.order)) + (gf.order,)
    raise ValidationError(f"GF(2^{gf.m}) supports at most {gf.order} participants, got L={L}")


def vandermonde_row(gf: GF, point: int, t: int) -> np.ndarray:
    """Evaluation functional of a degree ``t - 1`` polynomial; infinity picks the leading coefficient."""
    if point == gf.order:
        row = np.zeros(t, dtype=np.int64)
        row[-1] = 1
        return row
    return np.array([int(gf.pow(point, j)) for j in range(t)], dtype=np.int64)


def evaluate_at(gf: GF, coeffs: np.ndarray, points: Sequence[int]) -> np.ndarray:
    """``out[i, ...]`` is the polynomial with coefficient rows ``coeffs`` evaluated at ``points[i]``."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    out = []
    for p in points:
        out.append(coeffs[..., -1] if p == gf.order else gf.poly_eval(coeffs, p))
    return np.array(out, dtype=np.int64)


def ramp_polynomials(secret: np.ndarray, randomness: np.ndarray) -> np.ndarray:
    """Coefficient rows ``[s_1..s_{t-z}, r_1..r_z]`` for each block."""
    return np.concatenate([np.asarray(secret, dtype=np.int64), np.asarray(randomness, dtype=np.int64)], axis=-1)


def ramp_share(secret: np.ndarray, t: int, z: int, L: int, m: int, seed: int | None = None,
               randomness: np.ndarray | None = None) -> RampShareSet:
    """Share ``secret`` (shape ``(blocks, t - z)``); randomness comes from ``seed`` unless given."""
    ThresholdParams(t, z).check(L)
    gf = field(m)
    points = evaluation_points(L, gf)
    secret = gf.check(np.atleast_2d(secret))
    if secret.shape[1] != t - z:
        raise ValidationError(f"each block needs {t - z} secret symbols, got {secret.shape[1]}")
    if randomness is None:
        if seed is None:
            raise ValidationError("either a seed or explicit randomness is required")
        randomness = np.random.default_rng(seed).integers(0, gf.order, size=(secret.shape[0], z))
    randomness = gf.check(np.asarray(randomness).reshape(secret.shape[0], z))
    coeffs = ramp_polynomials(secret, randomness)
    shares = evaluate_at(gf, coeffs, points)
    return RampShareSet(m, t, z, points, shares)


def ramp_reconstruct(points: Sequence[int], values: np.ndarray, t: int, z: int, m: int) -> np.ndarray:
    """Recover the ``t - z`` secret symbols per block from shares at ``points``.

    ``values[i, b]`` is the share at ``points[i]`` for block ``b``.  Only the
    first ``t`` points are used.
    """
    gf = field(m)
    pts = list(points)
    if len(set(pts)) != len(pts):
        raise ValidationError("evaluation points must be distinct")
    if len(pts) < t:
        raise ValidationError(f"need at least {t} shares, got {len(pts)}")
    values = gf.check(np.atleast_2d(values))
    V = np.array([vandermonde_row(gf, p, t) for p in pts[:t]], dtype=np.int64)
    coeffs = gf.solve(V, values[:t])
    return coeffs[: t - z].T


def privacy_matrices_invertible(L: int, t: int, z: int, m: int) -> bool:
    """Every ``z``-subset of points gives an invertible ``[p_i^{t-z+j}]`` matrix."""
    gf = field(m)
    points = evaluation_points(L, gf)
    for sub in combinations(points, z):
        M = np.array([vandermonde_row(gf, p, t)[t - z:] for p in sub], dtype=np.int64)
        if z and not gf.is_invertible(M):
            return False
    return True


@dataclass(frozen=True, eq=False)
class Broadcast:
    """One dealer's public message: ciphertext bits per participant and the key offsets used."""

    dealer: int
    offsets: tuple[int, ...]
    ciphertext: np.ndarray


def share_bits(shares: RampShareSet, l: int) -> np.ndarray:
    return serialize_symbols(shares.shares[l], 1 << shares.m)


def dealer_broadcast(keys: PairwiseKeys, dealer: int, shares: RampShareSet) -> Broadcast:
    L = len(shares.points)
    if keys.L != L:
        raise ValidationError(f"keys cover {keys.L} participants, shares cover {L}")
    rows, offsets = [], []
    for l in range(L):
        bits = share_bits(shares, l)
        off, pad = keys.take(l, dealer, bits.size)
        rows.append(bits ^ pad)
        offsets.append(off)
    return Broadcast(dealer, tuple(offsets), np.array(rows, dtype=np.uint8))


def _bits_to_symbols(bits: np.ndarray, m: int) -> np.ndarray:
    return (bits.reshape(-1, m).astype(np.int64) << np.arange(m - 1, -1, -1)).sum(axis=1)


def participant_recover(broadcasts: Sequence[Broadcast], keys: PairwiseKeys, coalition: Iterable[int],
                        t: int, z: int, m: int) -> list[np.ndarray]:
    """Each member unmasks its own shares; the pooled shares are interpolated per dealer."""
    members = sorted(set(coalition))
    if len(members) < t:
        raise ValidationError(f"coalition of {len(members)} participants is below the threshold {t}")
    points = evaluation_points(keys.L, field(m))
    out = []
    for bc in broadcasts:
        vals = []
        for l in members:
            c = bc.ciphertext[l]
            pad = keys.peek(l, bc.dealer, bc.offsets[l], c.size)
            vals.append(_bits_to_symbols(c ^ pad, m))
        out.append(ramp_reconstruct([points[l] for l in members], np.array(vals), t, z, m))
    return out


def achieved_rate(t: int, z: int, blocks: int, m: int, key_bits_used: int) -> float:
    """Secret bits per key bit consumed on each participant-dealer pair."""
    if key_bits_used <= 0:
        raise ValidationError("no key bits were used")
    return (t - z) * m * blocks / key_bits_used
