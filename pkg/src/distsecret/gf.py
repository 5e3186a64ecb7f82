"""Arithmetic in GF(2^m) via log/antilog tables, for m = 1..16."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ValidationError

# x^m + ... with the x^m bit included; each is primitive, so x generates the multiplicative group
PRIMITIVE_POLYNOMIALS = {
    1: 0b11,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


class GF:
    """Field with ``2**m`` elements; elements are ints whose bits are polynomial coefficients."""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLYNOMIALS:
            raise ValidationError(f"extension degree must be in 1..16, got {m}")
        self.m = m
        self.poly = PRIMITIVE_POLYNOMIALS[m]
        self.order = 1 << m
        q1 = self.order - 1
        exp = np.zeros(2 * q1, dtype=np.int64)
        log = np.full(self.order, -1, dtype=np.int64)
        a = 1
        for i in range(q1):
            if log[a] != -1:
                raise ValidationError(f"polynomial {self.poly:#x} is not primitive")
            exp[i] = a
            log[a] = i
            a <<= 1
            if a & self.order:
                a ^= self.poly
        exp[q1:] = exp[:q1]
        self.exp = exp
        self.log = log

    def __repr__(self) -> str:
        return f"GF(2^{self.m}, poly={self.poly:#x})"

    def check(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if a.size and (a.min() < 0 or a.max() >= self.order):
            raise ValidationError(f"element outside GF(2^{self.m})")
        return a

    def mul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        zero = (a == 0) | (b == 0)
        out = self.exp[(self.log[np.where(zero, 1, a)] + self.log[np.where(zero, 1, b)])]
        return np.where(zero, 0, out)

    def inv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse")
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def pow(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        zero = a == 0
        out = self.exp[(self.log[np.where(zero, 1, a)] * e) % (self.order - 1)]
        return np.where(zero, 0, out)

    def poly_eval(self, coeffs: np.ndarray, x) -> np.ndarray:
        """Evaluate ``sum_j coeffs[..., j] x^j`` by Horner; broadcasts ``x`` against the leading axes."""
        coeffs = np.asarray(coeffs, dtype=np.int64)
        acc = np.zeros(np.broadcast_shapes(coeffs.shape[:-1], np.shape(x)), dtype=np.int64)
        for j in range(coeffs.shape[-1] - 1, -1, -1):
            acc = self.mul(acc, x) ^ coeffs[..., j]
        return acc

    def solve(self, A: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Solve ``A X = b`` for square invertible ``A``; ``b`` may have several columns."""
        A = self.check(A).copy()
        b = self.check(b).copy()
        vec = b.ndim == 1
        if vec:
            b = b[:, None]
        n = A.shape[0]
        if A.shape != (n, n) or b.shape[0] != n:
            raise ValidationError("shape mismatch in linear solve")
        for col in range(n):
            piv = next((r for r in range(col, n) if A[r, col]), None)
            if piv is None:
                raise ValidationError("singular matrix")
            A[[col, piv]] = A[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
            s = self.inv(A[col, col])
            A[col] = self.mul(A[col], s)
            b[col] = self.mul(b[col], s)
            for r in range(n):
                if r != col and A[r, col]:
                    f = A[r, col]
                    A[r] ^= self.mul(A[col], f)
                    b[r] ^= self.mul(b[col], f)
        return b[:, 0] if vec else b

    def is_invertible(self, A: np.ndarray) -> bool:
        try:
            self.solve(A, np.zeros(len(A), dtype=np.int64))
        except ValidationError:
            return False
        return True


@lru_cache(maxsize=None)
def field(m: int) -> GF:
    return GF(m)
