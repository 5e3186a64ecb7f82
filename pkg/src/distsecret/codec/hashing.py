"""Toeplitz two-universal hashing over GF(2) and symbol serialization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True, eq=False)
class ToeplitzHash:
    """``r x n_in`` Toeplitz matrix with ``T[i, j] = seed[i - j + n_in - 1]``."""

    n_in: int
    r: int
    seed_bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.seed_bits, dtype=np.uint8).ravel()
        if self.n_in < 1 or self.r < 0:
            raise ValidationError("need n_in >= 1 and r >= 0")
        want = self.n_in + self.r - 1 if self.r else 0
        if bits.size != want:
            raise ValidationError(f"seed must have {want} bits, got {bits.size}")
        if np.any(bits > 1):
            raise ValidationError("seed bits must be 0 or 1")
        object.__setattr__(self, "seed_bits", bits)

    @property
    def matrix(self) -> np.ndarray:
        i = np.arange(self.r)[:, None]
        j = np.arange(self.n_in)[None, :]
        if self.r == 0:
            return np.zeros((0, self.n_in), dtype=np.uint8)
        return self.seed_bits[i - j + self.n_in - 1]

    @classmethod
    def random(cls, n_in: int, r: int, rng: np.random.Generator) -> "ToeplitzHash":
        return cls(n_in, r, rng.integers(0, 2, size=n_in + r - 1 if r else 0, dtype=np.uint8))

    @classmethod
    def from_index(cls, n_in: int, r: int, index: int) -> "ToeplitzHash":
        """Seed whose bits are the binary digits of ``index`` (bit 0 first)."""
        m = n_in + r - 1 if r else 0
        return cls(n_in, r, (index >> np.arange(m)) & 1)

    def seed_hex(self) -> str:
        return bits_to_hex(self.seed_bits)


def toeplitz_hash(h: ToeplitzHash, x: Sequence[int]) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8).ravel()
    if x.size != h.n_in:
        raise ValidationError(f"input has {x.size} bits, hash expects {h.n_in}")
    return (h.matrix.astype(np.int64) @ x.astype(np.int64) % 2).astype(np.uint8)


def symbol_width(k: int) -> int:
    if k < 1:
        raise ValidationError("alphabet size must be >= 1")
    return math.ceil(math.log2(k)) if k > 1 else 0


def serialize_symbols(seq: Sequence[int], k: int) -> np.ndarray:
    """Big-endian fixed-width bits of each symbol index, concatenated."""
    w = symbol_width(k)
    seq = np.asarray(seq, dtype=np.int64).ravel()
    if seq.size and (seq.min() < 0 or seq.max() >= k):
        raise ValidationError(f"symbol outside alphabet of size {k}")
    if w == 0:
        return np.zeros(0, dtype=np.uint8)
    return ((seq[:, None] >> np.arange(w - 1, -1, -1)) & 1).astype(np.uint8).ravel()


def bits_to_hex(bits: Sequence[int]) -> str:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size == 0:
        return ""
    pad = (-bits.size) % 8
    packed = np.packbits(np.concatenate([np.zeros(pad, dtype=np.uint8), bits]))
    return packed.tobytes().hex()


def privacy_amplify(hashes: Sequence[ToeplitzHash], blocks: Sequence[Sequence[int]],
                    alphabet_sizes: Sequence[int]) -> list[np.ndarray]:
    """Hash each dealer's serialized block; short inputs are zero-padded to ``n_in``."""
    if not len(hashes) == len(blocks) == len(alphabet_sizes):
        raise ValidationError("need one hash, block and alphabet size per dealer")
    out = []
    for h, block, k in zip(hashes, blocks, alphabet_sizes):
        bits = serialize_symbols(block, k)
        if bits.size > h.n_in:
            raise ValidationError(f"serialized block has {bits.size} bits, hash accepts {h.n_in}")
        bits = np.concatenate([bits, np.zeros(h.n_in - bits.size, dtype=np.uint8)])
        out.append(toeplitz_hash(h, bits))
    return out


def collision_probability(n_in: int, r: int, x: Sequence[int], x2: Sequence[int]) -> float:
    """Exact ``P[F(x) = F(x')]`` over all ``2^{n_in + r - 1}`` seeds."""
    x = np.asarray(x, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    diff = (x ^ x2).astype(np.int64)
    if r == 0:
        return 1.0
    m = n_in + r - 1
    seeds = (np.arange(2**m)[:, None] >> np.arange(m)) & 1  # (S, m)
    i = np.arange(r)[:, None]
    j = np.arange(n_in)[None, :]
    mats = seeds[:, i - j + n_in - 1]  # (S, r, n_in)
    out = mats @ diff % 2
    return float(np.mean(~out.any(axis=1)))
