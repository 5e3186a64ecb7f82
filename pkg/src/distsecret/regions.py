"""Inner/outer bounds and capacity regions for distributed secret sharing.

Rate vectors are indexed by dealer (0-based); subsets of dealers are
bitmasks.  Every region except the joint-binning inner bound has the shape
``{R >= 0 : sum_{d in S} R_d <= c(S) for all nonempty S}`` and is returned as a
:class:`SubsetBoundRegion`.  The joint-binning inner bound is a projection of
a polytope in ``(R, R')`` and is decided by linear feasibility.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .access import AccessStructure, ThresholdParams, popcount, require_valid
from .errors import SolverError, ValidationError
from .source import (
    GroupSelector,
    JointSource,
    conditional_entropy,
    conditional_mutual_information,
    dealers_of,
)

log = logging.getLogger(__name__)

MAX_DEALERS = 8
TOL = 1e-9
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def Y(mask: int) -> GroupSelector:
    return GroupSelector(dealers=dealers_of(mask))


def X(mask: int) -> GroupSelector:
    return GroupSelector(participants=dealers_of(mask))


def nonempty_subsets(D: int) -> range:
    return range(1, 1 << D)


def _check_D(src: JointSource) -> int:
    if src.D > MAX_DEALERS:
        raise ValidationError(f"D={src.D} exceeds the supported maximum {MAX_DEALERS}")
    return src.D


def _check_access(src: JointSource, A: AccessStructure) -> None:
    if A.L != src.L:
        raise ValidationError(f"access structure has L={A.L} but the source has L={src.L}")
    require_valid(A)


@dataclass(frozen=True)
class SubsetBoundRegion:
    """``{R >= 0 : R_S <= bound[S]}``; bounds may be negative (raw) or ``inf``."""

    D: int
    bound: dict[int, float]

    def __post_init__(self):
        missing = [S for S in nonempty_subsets(self.D) if S not in self.bound]
        if missing:
            raise ValidationError(f"missing bounds for subsets {missing}")

    def contains(self, R: Sequence[float], margin: float = 0.0) -> bool:
        R = np.asarray(R, dtype=float)
        if R.shape != (self.D,) or np.any(R < 0):
            return False
        return all(
            R[list(dealers_of(S))].sum() <= c - margin for S, c in self.bound.items()
        )

    def effective(self) -> "SubsetBoundRegion":
        """Same region with negative bounds clamped to 0 (intersection with R_+^D)."""
        return SubsetBoundRegion(self.D, {S: max(c, 0.0) for S, c in self.bound.items()})

    def facet_distance(self, R: Sequence[float]) -> float:
        """Smallest ``|R_S - c(S)|`` over finite facets and the coordinate planes."""
        R = np.asarray(R, dtype=float)
        d = [abs(R[list(dealers_of(S))].sum() - c) for S, c in self.bound.items() if math.isfinite(c)]
        return min(d + list(np.abs(R)))

    def rows(self) -> list[dict]:
        return [
            {"subset": [d + 1 for d in sorted(dealers_of(S))], "bound_bits": c}
            for S, c in sorted(self.bound.items(), key=lambda kv: (popcount(kv[0]), kv[0]))
        ]


def _min(values) -> float:
    return min(values, default=math.inf)


def _max(values) -> float:
    return max(values, default=-math.inf)


# --- general access structures ---------------------------------------------------------


def outer_general(src: JointSource, A: AccessStructure) -> SubsetBoundRegion:
    """c(S) = min over authorized A and unauthorized U of I(Y_S; X_A Y_{S^c} | X_U)."""
    _check_access(src, A)
    D = _check_D(src)
    full = (1 << D) - 1
    bound = {}
    for S in nonempty_subsets(D):
        bound[S] = _min(
            conditional_mutual_information(src, Y(S), X(a) | Y(full ^ S), X(u))
            for a in A.authorized
            for u in A.unauthorized
        )
    return SubsetBoundRegion(D, bound)


@dataclass(frozen=True)
class AuxFeasibilitySystem:
    """``R'_S >= lower[S]`` and ``R'_S + R_S <= upper[S]`` for nonempty ``S``."""

    D: int
    lower: dict[int, float]
    upper: dict[int, float]

    def consistent(self) -> bool:
        """Whether the zero rate admits auxiliary rates, i.e. the region is nonempty."""
        return is_inner_member(self, np.zeros(self.D))


def inner_aux_system(src: JointSource, A: AccessStructure) -> AuxFeasibilitySystem:
    _check_access(src, A)
    D = _check_D(src)
    full = (1 << D) - 1
    lower, upper = {}, {}
    for S in nonempty_subsets(D):
        lower[S] = _max(conditional_entropy(src, Y(S), Y(full ^ S) | X(a)) for a in A.authorized)
        upper[S] = _min(conditional_entropy(src, Y(S), X(u)) for u in A.unauthorized)
    return AuxFeasibilitySystem(D, lower, upper)


def _aux_constraints(system: AuxFeasibilitySystem, nvars: int, r_offset: int | None,
                     R: np.ndarray | None, margin: float):
    """Rows over variables ``R'`` (first D) and optionally ``R`` (at ``r_offset``)."""
    A_ub, b_ub = [], []
    D = system.D
    for S in nonempty_subsets(D):
        idx = list(dealers_of(S))
        row = np.zeros(nvars)
        row[idx] = -1.0
        A_ub.append(row)
        b_ub.append(-(system.lower[S] + margin))
        up = system.upper[S]
        if math.isfinite(up):
            row = np.zeros(nvars)
            row[idx] = 1.0
            rhs = up - margin
            if r_offset is not None:
                row[[r_offset + i for i in idx]] = 1.0
            else:
                rhs -= R[idx].sum()
            A_ub.append(row)
            b_ub.append(rhs)
    return np.array(A_ub), np.array(b_ub)


def is_inner_member(system: AuxFeasibilitySystem, R: Sequence[float], margin: float = 0.0) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (system.D,):
        raise ValidationError(f"rate vector must have length {system.D}")
    if np.any(R < 0):
        return False
    A_ub, b_ub = _aux_constraints(system, system.D, None, R, margin)
    res = linprog(np.zeros(system.D), A_ub=A_ub, b_ub=b_ub, bounds=[(0, None)] * system.D,
                  method="highs", options=_LP_OPTIONS)
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise SolverError(f"linprog status {res.status}: {res.message}")


def inner_general_membership(src: JointSource, A: AccessStructure, R: Sequence[float],
                             margin: float = 0.0) -> bool:
    """Whether some ``R' >= 0`` completes ``R`` in the joint-binning inner bound."""
    return is_inner_member(inner_aux_system(src, A), R, margin)


def inner_max_sum_rate(system: AuxFeasibilitySystem, S: int) -> float | None:
    """``max R_S`` over the projected inner region; ``None`` if the region is empty."""
    D = system.D
    nvars = 2 * D
    A_ub, b_ub = _aux_constraints(system, nvars, D, None, 0.0)
    c = np.zeros(nvars)
    c[[D + i for i in dealers_of(S)]] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(0, None)] * nvars, method="highs",
                  options=_LP_OPTIONS)
    if res.status == 0:
        return float(-res.fun)
    if res.status == 2:
        return None
    if res.status == 3:
        return math.inf
    raise SolverError(f"linprog status {res.status}: {res.message}")


def inner_sum_rate_bounds(src: JointSource, A: AccessStructure) -> SubsetBoundRegion | None:
    """Largest achievable ``R_S`` per subset under the joint-binning inner bound.

    This is the support function of the projected region along subset
    directions; it bounds the region from outside but the region itself may
    have further facets for D >= 3.
    """
    system = inner_aux_system(src, A)
    bound = {}
    for S in nonempty_subsets(system.D):
        v = inner_max_sum_rate(system, S)
        if v is None:
            return None
        bound[S] = v
    return SubsetBoundRegion(system.D, bound)


@dataclass(frozen=True)
class TwoDealerInner:
    """Closed-form two-dealer inner bound: ``R1 <= r1``, ``R2 <= r2``, ``R1+R2 <= min(sum_terms)``."""

    r1: float
    r2: float
    sum_terms: tuple[float, float, float]

    @property
    def sum_bound(self) -> float:
        return min(self.sum_terms)

    def contains(self, R: Sequence[float], margin: float = 0.0) -> bool:
        R1, R2 = (float(v) for v in R)
        return (
            R1 >= 0 and R2 >= 0
            and R1 <= self.r1 - margin
            and R2 <= self.r2 - margin
            and R1 + R2 <= self.sum_bound - margin
        )

    def as_region(self) -> SubsetBoundRegion:
        return SubsetBoundRegion(2, {1: self.r1, 2: self.r2, 3: self.sum_bound})


def inner_d2_fm(src: JointSource, A: AccessStructure) -> TwoDealerInner:
    _check_access(src, A)
    if src.D != 2:
        raise ValidationError(f"the closed-form two-dealer bound needs D=2, got D={src.D}")
    mi = lambda a, b, c=GroupSelector(): conditional_mutual_information(src, a, b, c)
    y1, y2, yd = Y(1), Y(2), Y(3)
    auth, unauth = A.authorized, A.unauthorized
    r1 = _min(mi(y1, y2 | X(a)) - mi(y1, X(u)) for a in auth for u in unauth)
    r2 = _min(mi(y2, y1 | X(a)) - mi(y2, X(u)) for a in auth for u in unauth)
    max_u_yd = _max(mi(yd, X(u)) for u in unauth)
    max_u_y1 = _max(mi(y1, X(u)) for u in unauth)
    max_u_y2 = _max(mi(y2, X(u)) for u in unauth)
    min_a_yd = _min(mi(yd, X(a)) for a in auth)
    s1 = min_a_yd - max_u_yd
    s2 = _min(mi(y1, y2 | X(a)) for a in auth) + _min(mi(y2, X(a), y1) for a in auth) - max_u_yd
    s3 = min_a_yd - max_u_y1 - max_u_y2 + mi(y1, y2)
    return TwoDealerInner(r1, r2, (s1, s2, s3))


@dataclass(frozen=True)
class SingleDealerBounds:
    lower: float
    upper: float
    lower_raw: float


def d1_bounds(src: JointSource, A: AccessStructure) -> SingleDealerBounds:
    """Lower and upper bounds on the single-dealer secret capacity."""
    _check_access(src, A)
    if src.D != 1:
        raise ValidationError(f"single-dealer bounds need D=1, got D={src.D}")
    y = Y(1)
    mi = lambda a, b, c=GroupSelector(): conditional_mutual_information(src, a, b, c)
    lower = _min(mi(y, X(a)) - mi(y, X(u)) for a in A.authorized for u in A.unauthorized)
    upper = _min(mi(y, X(a), X(u)) for a in A.authorized for u in A.unauthorized)
    return SingleDealerBounds(max(lower, 0.0), upper, lower)


# --- all-or-nothing access structure --------------------------------------------------


def _strict_subsets(L: int) -> range:
    return range((1 << L) - 1)


def aon_inner(src: JointSource) -> SubsetBoundRegion:
    """c(S) = min over strict subsets T of I(Y_S; X_L | X_T)."""
    D = _check_D(src)
    xl = X((1 << src.L) - 1)
    bound = {
        S: min(conditional_mutual_information(src, Y(S), xl, X(T)) for T in _strict_subsets(src.L))
        for S in nonempty_subsets(D)
    }
    return SubsetBoundRegion(D, bound)


def aon_outer(src: JointSource) -> SubsetBoundRegion:
    """c(S) = min over strict subsets T of I(Y_S; X_L Y_{S^c} | X_T)."""
    D = _check_D(src)
    full = (1 << D) - 1
    xl = X((1 << src.L) - 1)
    bound = {
        S: min(
            conditional_mutual_information(src, Y(S), xl | Y(full ^ S), X(T))
            for T in _strict_subsets(src.L)
        )
        for S in nonempty_subsets(D)
    }
    return SubsetBoundRegion(D, bound)


def conditional_sum_rate(src: JointSource, S: int, V: int = 0) -> float:
    """min over strict subsets T of [I(Y_S; X_L) - I(Y_S; Y_V X_T)]."""
    xl = X((1 << src.L) - 1)
    head = conditional_mutual_information(src, Y(S), xl)
    return min(
        head - conditional_mutual_information(src, Y(S), Y(V) | X(T)) for T in _strict_subsets(src.L)
    )


@dataclass(frozen=True)
class SuccessiveRegion:
    """Union of ``R({1}) x R({2}|{1})``, ``R({2}) x R({1}|{2})`` and ``R({1,2})``.

    ``values[(S, V)]`` holds the bound on ``R_S`` for the piece conditioned on
    dealers ``V``.
    """

    values: dict[tuple[int, int], float]
    hypothesis_met: bool
    min_single_capacity: float

    def pieces(self) -> list[SubsetBoundRegion]:
        v = self.values
        inf = math.inf
        return [
            SubsetBoundRegion(2, {1: v[(1, 0)], 2: v[(2, 1)], 3: inf}),
            SubsetBoundRegion(2, {1: v[(1, 2)], 2: v[(2, 0)], 3: inf}),
            SubsetBoundRegion(2, {1: v[(1, 0)], 2: v[(2, 0)], 3: v[(3, 0)]}),
        ]

    def contains(self, R: Sequence[float], margin: float = 0.0) -> bool:
        return any(p.contains(R, margin) for p in self.pieces())

    def rows(self) -> list[dict]:
        return [
            {"subset": [d + 1 for d in sorted(dealers_of(S))],
             "given": [d + 1 for d in sorted(dealers_of(V))], "bound_bits": b}
            for (S, V), b in sorted(self.values.items())
        ]


def aon_successive_inner_d2(src: JointSource) -> SuccessiveRegion:
    if src.D != 2:
        raise ValidationError(f"the successive two-dealer bound needs D=2, got D={src.D}")
    values = {(S, V): conditional_sum_rate(src, S, V) for S, V in [(1, 0), (2, 0), (3, 0), (2, 1), (1, 2)]}
    xl = X((1 << src.L) - 1)
    cap = min(
        conditional_mutual_information(src, Y(d), xl, X(T)) for d in (1, 2) for T in _strict_subsets(src.L)
    )
    met = cap > 0
    if not met:
        log.warning("successive bound hypothesis unmet: min single-dealer capacity %.3g <= 0", cap)
    return SuccessiveRegion(values, met, cap)


@dataclass(frozen=True)
class SumRates:
    joint: float
    one_then_two: float
    two_then_one: float

    @property
    def best(self) -> float:
        return max(self.joint, self.one_then_two, self.two_then_one)


def aon_sum_rates_d2(src: JointSource) -> SumRates:
    region = aon_successive_inner_d2(src)
    v = region.values
    return SumRates(
        joint=min(v[(3, 0)], v[(1, 0)] + v[(2, 0)]),
        one_then_two=v[(1, 0)] + v[(2, 1)],
        two_then_one=v[(2, 0)] + v[(1, 2)],
    )


def sum_rate_optimality(src: JointSource) -> bool:
    """Sufficient condition for the joint sum-rate to meet the outer bound."""
    if src.D != 2:
        raise ValidationError(f"needs D=2, got D={src.D}")
    return conditional_sum_rate(src, 3) <= conditional_sum_rate(src, 1) + conditional_sum_rate(src, 2) + TOL


# --- threshold structures with pairwise keys -----------------------------------------


def threshold_capacity_region(L: int, D: int, params: ThresholdParams) -> tuple[SubsetBoundRegion, tuple[float, ...]]:
    """Capacity region ``R_S <= |S|(t - z)`` and its corner ``R*_d = t - z``."""
    params.check(L)
    if not 1 <= D <= MAX_DEALERS:
        raise ValidationError(f"D must be in [1, {MAX_DEALERS}]")
    gap = params.t - params.z
    region = SubsetBoundRegion(D, {S: float(popcount(S) * gap) for S in nonempty_subsets(D)})
    return region, (float(gap),) * D


# --- set functions -------------------------------------------------------------------


class NotSubmodularWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SetFunction:
    """Values on all ``2**D`` subsets, indexed by bitmask, normalized at the empty set."""

    D: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (1 << self.D,):
            raise ValidationError(f"need {1 << self.D} values, got {vals.shape}")
        if vals[0] != 0:
            raise ValidationError("set function must vanish on the empty set")
        object.__setattr__(self, "values", vals)

    def __call__(self, mask: int) -> float:
        return float(self.values[mask])

    @classmethod
    def from_callable(cls, D: int, fn) -> "SetFunction":
        return cls(D, np.array([fn(S) if S else 0.0 for S in range(1 << D)]))


def is_submodular(f: SetFunction, tol: float = 1e-12) -> bool:
    v = f.values
    n = 1 << f.D
    for S in range(n):
        for T in range(S + 1, n):
            if v[S] + v[T] < v[S | T] + v[S & T] - tol:
                return False
    return True


def lp_feasible(f: SetFunction, g: SetFunction) -> bool:
    """Direct LP: is there ``x >= 0`` with ``-g(S) <= x(S) <= f(S)`` for every S?"""
    if f.D != g.D:
        raise ValidationError("set functions have different ground sets")
    D = f.D
    A_ub, b_ub = [], []
    for S in nonempty_subsets(D):
        row = np.zeros(D)
        row[list(dealers_of(S))] = 1.0
        A_ub += [row, -row]
        b_ub += [f(S), g(S)]
    res = linprog(np.zeros(D), A_ub=np.array(A_ub), b_ub=np.array(b_ub), bounds=[(0, None)] * D,
                  method="highs", options=_LP_OPTIONS)
    if res.status in (0, 2):
        return res.status == 0
    raise SolverError(f"linprog status {res.status}: {res.message}")


def submodular_feasible(f: SetFunction, g: SetFunction, tol: float = 1e-12) -> bool:
    """Feasibility of ``-g(S) <= x(S) <= f(S)``, ``x >= 0``, for submodular ``f, g``.

    With the sign constraint on ``x`` the exact test compares ``-g`` on each
    set with ``f`` on every superset; when ``f`` is monotone this is the
    pointwise test ``-g(S) <= f(S)``.  Non-submodular inputs fall back to the LP
    with a :class:`NotSubmodularWarning`.
    """
    if f.D != g.D:
        raise ValidationError("set functions have different ground sets")
    if not (is_submodular(f) and is_submodular(g)):
        warnings.warn("input is not submodular; deciding by LP", NotSubmodularWarning, stacklevel=2)
        return lp_feasible(f, g)
    n = 1 << f.D
    fv, gv = f.values, g.values
    # smallest f over supersets of each S
    f_up = fv.copy()
    for i in range(f.D):
        bit = 1 << i
        for S in range(n - 1, -1, -1):
            if not S & bit:
                f_up[S] = min(f_up[S], f_up[S | bit])
    return bool(np.all(-gv <= f_up + tol))


def pointwise_condition(f: SetFunction, g: SetFunction, tol: float = 1e-12) -> bool:
    """``-g(S) <= f(S)`` for every S, as stated for real-valued ``x``."""
    return bool(np.all(-g.values <= f.values + tol))
