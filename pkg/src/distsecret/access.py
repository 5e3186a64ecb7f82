"""Monotone access structures over participants, encoded as bitmasks.

Participant ``l`` (0-based) is bit ``1 << l``.  An :class:`AccessStructure`
carries both the authorized family and the unauthorized family explicitly,
because threshold structures leave the sizes strictly between ``z`` and ``t``
in neither family.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import ValidationError

MAX_PARTICIPANTS = 16


def mask_of(members: Iterable[int]) -> int:
    m = 0
    for i in members:
        m |= 1 << i
    return m


def members(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class ThresholdParams:
    t: int
    z: int

    def check(self, L: int) -> None:
        if not 1 <= self.t <= L:
            raise ValidationError(f"need 1 <= t <= L, got t={self.t}, L={L}")
        if not 0 <= self.z <= self.t - 1:
            raise ValidationError(f"need 0 <= z <= t-1, got z={self.z}, t={self.t}")

    @property
    def degenerate(self) -> bool:
        """With ``z = 0`` only the empty coalition is held to zero leakage."""
        return self.z == 0


@dataclass(frozen=True)
class AccessStructure:
    L: int
    authorized: frozenset[int]
    unauthorized: frozenset[int]

    def __post_init__(self):
        if not 1 <= self.L <= MAX_PARTICIPANTS:
            raise ValidationError(f"L must be in [1, {MAX_PARTICIPANTS}], got {self.L}")
        object.__setattr__(self, "authorized", frozenset(self.authorized))
        object.__setattr__(self, "unauthorized", frozenset(self.unauthorized))
        full = (1 << self.L) - 1
        for m in self.authorized | self.unauthorized:
            if m < 0 or m & ~full:
                raise ValidationError(f"subset {members(m)} is outside the {self.L} participants")
        if not self.authorized:
            raise ValidationError("the authorized family is empty")

    @property
    def full(self) -> int:
        return (1 << self.L) - 1

    def is_authorized(self, mask: int) -> bool:
        return mask in self.authorized

    def minimal_authorized(self) -> list[int]:
        return sorted(
            (a for a in self.authorized if not any(b != a and b & a == b for b in self.authorized)),
            key=lambda m: (popcount(m), m),
        )

    def maximal_unauthorized(self) -> list[int]:
        return sorted(
            (u for u in self.unauthorized if not any(v != u and v & u == u for v in self.unauthorized)),
            key=lambda m: (popcount(m), m),
        )

    def describe(self) -> dict:
        one_based = lambda ms: [[i + 1 for i in members(m)] for m in ms]
        return {
            "L": self.L,
            "minimal_authorized": one_based(self.minimal_authorized()),
            "maximal_unauthorized": one_based(self.maximal_unauthorized()),
        }


def monotone_closure(min_sets: Iterable[Iterable[int]], L: int) -> AccessStructure:
    """Upward closure of ``min_sets``; everything else is unauthorized."""
    gens = [frozenset(s) for s in min_sets]
    if not gens:
        raise ValidationError("at least one generating set is required")
    for s in gens:
        bad = [i for i in s if not 0 <= i < L]
        if bad:
            raise ValidationError(f"participant index {bad[0]} out of range [0, {L})")
    gmasks = [mask_of(s) for s in gens]
    auth = frozenset(m for m in range(1 << L) if any(m & g == g for g in gmasks))
    unauth = frozenset(m for m in range(1 << L) if m not in auth)
    return AccessStructure(L, auth, unauth)


def all_or_nothing(L: int) -> AccessStructure:
    return monotone_closure([range(L)], L)


def threshold_structure(L: int, params: ThresholdParams) -> AccessStructure:
    params.check(L)
    auth = frozenset(m for m in range(1 << L) if popcount(m) >= params.t)
    unauth = frozenset(m for m in range(1 << L) if popcount(m) <= params.z)
    return AccessStructure(L, auth, unauth)


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "monotonicity" | "overlap" | "gap"
    subset: tuple[int, ...]
    message: str

    @property
    def is_error(self) -> bool:
        return self.kind != "gap"


def validate(a: AccessStructure) -> list[Diagnostic]:
    """Monotonicity violations, overlaps and coverage gaps.

    Gaps (sets in neither family) are informational: threshold structures
    have them by construction.
    """
    out: list[Diagnostic] = []
    for m in sorted(a.authorized):
        for i in range(a.L):
            sup = m | 1 << i
            if sup != m and sup not in a.authorized:
                out.append(Diagnostic(
                    "monotonicity", members(sup),
                    f"{members(sup)} contains authorized {members(m)} but is not authorized",
                ))
    for m in sorted(a.authorized & a.unauthorized):
        out.append(Diagnostic("overlap", members(m), f"{members(m)} is both authorized and unauthorized"))
    for m in range(1 << a.L):
        if m not in a.authorized and m not in a.unauthorized:
            out.append(Diagnostic("gap", members(m), f"{members(m)} is in neither family"))
    # several minimal sets can witness the same violation
    seen, uniq = set(), []
    for d in out:
        if (d.kind, d.subset) not in seen:
            seen.add((d.kind, d.subset))
            uniq.append(d)
    return uniq


def require_valid(a: AccessStructure) -> None:
    errors = [d for d in validate(a) if d.is_error]
    if errors:
        raise ValidationError("; ".join(d.message for d in errors))


def parse_access(spec: str, L: int | None = None) -> AccessStructure:
    """Parse ``aon``, ``thr:<L>:<t>:<z>`` or ``min:<set>;<set>`` (1-based indices)."""
    spec = spec.strip()
    if spec == "aon":
        if L is None:
            raise ValidationError("'aon' needs the participant count from the source")
        return all_or_nothing(L)
    if spec.startswith("thr:"):
        try:
            L_, t, z = (int(v) for v in spec[4:].split(":"))
        except ValueError as exc:
            raise ValidationError(f"bad threshold spec {spec!r}; expected thr:<L>:<t>:<z>") from exc
        if L is not None and L_ != L:
            raise ValidationError(f"threshold spec has L={L_} but the source has L={L}")
        return threshold_structure(L_, ThresholdParams(t, z))
    if spec.startswith("min:"):
        if L is None:
            raise ValidationError("'min:' needs the participant count from the source")
        gens = []
        for part in spec[4:].split(";"):
            part = part.strip()
            if part in ("", "{}", "empty"):
                gens.append(())
                continue
            try:
                gens.append(tuple(int(v) - 1 for v in part.split(",")))
            except ValueError as exc:
                raise ValidationError(f"bad set {part!r} in {spec!r}") from exc
        return monotone_closure(gens, L)
    raise ValidationError(f"unknown access spec {spec!r}")
