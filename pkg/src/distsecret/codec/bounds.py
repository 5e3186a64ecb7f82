"""Finite-length bound calculators: leftover hash, smoothing and hash-length budgets."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ..access import AccessStructure, popcount, require_valid
from ..errors import GuardExceeded, SolverError, ValidationError
from ..source import GroupSelector, JointSource, conditional_mutual_information, dealers_of
from .binning import MAX_PAIRS, ProtocolParams, all_sequences
from .hashing import ToeplitzHash, serialize_symbols, toeplitz_hash

log = logging.getLogger(__name__)


def lhl_rhs(r: Mapping[int, float], hmin: Mapping[int, float]) -> float:
    """``sqrt(sum_S 2^{r_S - H_min(S)})`` evaluated in the log domain."""
    if set(r) != set(hmin):
        raise ValidationError("rate and min-entropy maps must cover the same subsets")
    if not r:
        return 0.0
    expo = [float(r[S]) - float(hmin[S]) for S in r]
    top = max(expo)
    if top == -math.inf:
        return 0.0
    log_sum = top + math.log2(math.fsum(2.0 ** (e - top) for e in expo))
    return 2.0 ** (0.5 * log_sum)


def smoothing_delta(card: int, n: int, D: int, eps: float) -> float:
    """``log2(card + 3) * sqrt((2/n) (D + log2(1/eps)))``."""
    if card < 1 or n < 1 or D < 0:
        raise ValidationError("need card >= 1, n >= 1 and D >= 0")
    if not 0 < eps <= 1:
        raise ValidationError(f"eps must lie in (0, 1], got {eps}")
    return math.log2(card + 3) * math.sqrt((2.0 / n) * (D + math.log2(1.0 / eps)))


def min_entropy(p_xz: np.ndarray, q_z: np.ndarray) -> float:
    """``-log2 max_{x, z in supp q} p(x, z) / q(z)``; ``p_xz`` has Z on the last axis."""
    p = np.asarray(p_xz, dtype=float).reshape(-1, len(q_z))
    q = np.asarray(q_z, dtype=float)
    supp = q > 0
    if not supp.any():
        raise ValidationError("q_Z has empty support")
    ratio = p[:, supp].max(axis=0) / q[supp]
    top = ratio.max()
    return math.inf if top == 0 else -math.log2(top)


def hashed_distance(p_yz: np.ndarray, hashes: Sequence[ToeplitzHash], sizes: Sequence[int]) -> float:
    """Exact ``V(p_{F(Y) Z}, unif x p_Z)`` for fixed hash functions.

    ``p_yz`` has one axis per dealer followed by a Z axis; the distance is the
    plain L1 sum.
    """
    p = np.asarray(p_yz, dtype=float)
    D = len(hashes)
    if p.ndim != D + 1 or tuple(p.shape[:D]) != tuple(sizes):
        raise ValidationError("pmf shape does not match the dealer alphabets")
    outputs = []
    for h, k in zip(hashes, sizes):
        codes = np.empty(k, dtype=np.int64)
        for y in range(k):
            bits = serialize_symbols([y], k)
            bits = np.concatenate([bits, np.zeros(h.n_in - bits.size, dtype=np.uint8)])
            out = toeplitz_hash(h, bits)
            codes[y] = int(out @ (1 << np.arange(h.r - 1, -1, -1))) if h.r else 0
        outputs.append(codes)
    out_shape = [1 << h.r for h in hashes]
    grids = np.meshgrid(*[o for o in outputs], indexing="ij")
    key = np.ravel_multi_index(tuple(g.ravel() for g in grids), out_shape)
    nz = p.shape[-1]
    flat = p.reshape(-1, nz)
    pk = np.zeros((math.prod(out_shape), nz))
    np.add.at(pk, key, flat)
    pz = flat.sum(axis=0)
    return float(np.abs(pk - pz[None, :] / pk.shape[0]).sum())


# --- smoothing by truncation -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SmoothedFunction:
    """Truncation ``w = q * 1{y in kept(z)}`` of an ``n``-fold product pmf.

    ``kept[z, y]`` indexes joint Z and Y_D sequences.  ``hmin`` and
    ``target`` map each nonempty dealer subset to the achieved min-entropy and
    its required lower bound.
    """

    n: int
    eps: float
    kept: np.ndarray
    distance: float
    hmin: dict[int, float]
    target: dict[int, float]
    deltas: dict[int, float]

    @property
    def distance_ok(self) -> bool:
        return self.distance <= self.eps + 1e-12

    @property
    def min_entropy_ok(self) -> bool:
        return all(self.hmin[S] >= self.target[S] - 1e-9 for S in self.target)


def _outer_sum(cols: Sequence[np.ndarray]) -> np.ndarray:
    """``out[i_1..i_n] = sum_j cols[j][i_j]`` flattened with the first index most significant."""
    out = cols[0]
    for c in cols[1:]:
        out = (out[:, None] + c[None, :]).ravel()
    return out


def smooth_truncate(q: np.ndarray, n: int, eps: float,
                    deltas: Mapping[int, float] | None = None) -> SmoothedFunction:
    """Truncate the ``n``-fold product of ``q`` (axes ``Y_1..Y_D, Z``) to the kept sets.

    A pair ``(y_D, z)`` is kept when ``-log q(y_S | z) >= n H(Y_S|Z) - n delta_S``
    for every dealer subset S.  ``deltas`` overrides the default per-subset
    slack; the distance guarantee only covers the default.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim < 2:
        raise ValidationError("q needs at least one dealer axis and a Z axis")
    if abs(q.sum() - 1) > 1e-9 or np.any(q < 0):
        raise ValidationError("q must be a pmf")
    D = q.ndim - 1
    ysizes = q.shape[:D]
    Ky, Kz = math.prod(ysizes), q.shape[-1]
    Ny, Nz = Ky**n, Kz**n
    if Ny * Nz > MAX_PAIRS:
        raise GuardExceeded(f"smoothing table has {Ny * Nz} cells, above the limit {MAX_PAIRS}")
    qz = q.reshape(Ky, Kz).sum(axis=0)
    yseq = all_sequences(Ky, n)
    zseq = all_sequences(Kz, n)
    letters = np.array(np.unravel_index(np.arange(Ky), ysizes)).T  # (Ky, D)
    subsets = range(1, 1 << D)
    # per-letter conditional log-probabilities and projections of Y_D letters onto Y_S
    override = deltas
    proj, logc, thresh, deltas, cards = {}, {}, {}, {}, {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for S in subsets:
            axes = sorted(dealers_of(S))
            drop = tuple(a for a in range(D) if a not in axes)
            qs = q.sum(axis=drop) if drop else q
            ks = qs.shape[:-1]
            qs = qs.reshape(-1, Kz)
            cond = np.where(qz > 0, qs / qz, 0.0)
            logc[S] = np.log2(cond)  # (K_S, Kz)
            letter_proj = np.ravel_multi_index(tuple(letters[:, axes].T), ks)
            proj[S] = letter_proj
            cards[S] = qs.shape[0]
            h = -np.nansum(np.where(qs > 0, qs * np.log2(cond), 0.0))
            deltas[S] = smoothing_delta(cards[S], n, D, eps) if override is None else float(override[S])
            thresh[S] = float(n * h - n * deltas[S])
    # sequence-level projections onto Y_S sequences
    seq_proj = {}
    for S in subsets:
        k = cards[S]
        lp = proj[S][yseq]
        seq_proj[S] = (lp * (k ** np.arange(n - 1, -1, -1))).sum(axis=1)
    log_pz_letters = np.log2(np.where(qz > 0, qz, 1.0))
    with np.errstate(divide="ignore"):
        log_pyz = np.log2(q.reshape(Ky, Kz))
    # log q(y_S|z) as a function of the Y_D letter, for each Z letter
    letter_logc = {S: logc[S][proj[S]] for S in subsets}
    kept = np.zeros((Nz, Ny), dtype=bool)
    removed = 0.0
    best = {S: 0.0 for S in subsets}
    with np.errstate(divide="ignore", invalid="ignore"):
        for zi, z in enumerate(zseq):
            if np.any(qz[z] == 0):
                continue
            keep = np.ones(Ny, dtype=bool)
            for S in subsets:
                lc = _outer_sum([letter_logc[S][:, zl] for zl in z])  # -inf where impossible
                keep &= (-lc >= thresh[S] - 1e-9)
            lq = _outer_sum([log_pyz[:, zl] for zl in z])
            prob = np.exp2(lq)
            kept[zi] = keep
            removed += prob[~keep].sum()
            pz_seq = np.exp2(log_pz_letters[z].sum())
            w = np.where(keep, prob, 0.0)
            for S in subsets:
                marg = np.bincount(seq_proj[S], weights=w, minlength=cards[S] ** n)
                best[S] = max(best[S], marg.max() / pz_seq)
    hmin = {S: (math.inf if best[S] == 0 else -math.log2(best[S])) for S in subsets}
    return SmoothedFunction(n, eps, kept, float(removed), hmin, thresh, deltas)


# --- hash length budget -----------------------------------------------------------------


@dataclass(frozen=True)
class HashBudget:
    budgets: dict[int, float]
    lengths: tuple[int, ...]
    binding: tuple[int, ...]
    diagnostics: tuple[str, ...] = field(default=())


def leakage_free_rate(src: JointSource, A: AccessStructure, S: int) -> float:
    """min over authorized A and unauthorized U of I(Y_S; X_A | X_U)."""
    ys = GroupSelector(dealers=dealers_of(S))
    return min(
        conditional_mutual_information(
            src, ys, GroupSelector(participants=dealers_of(a)), GroupSelector(participants=dealers_of(u))
        )
        for a in A.authorized
        for u in A.unauthorized
    )


def hash_length_budget(src: JointSource, A: AccessStructure, params: ProtocolParams,
                       eps_smooth: float | None = None) -> HashBudget:
    """Largest integer output lengths ``r_d`` whose subset sums fit every budget.

    ``budget_S = nB rate_S - nB delta_eps - B delta_n - B delta_S(n, B) - n xi``
    with ``delta_S(n, B) = log2(|Y_S|^n + 3) sqrt((2/B)(D + log2(1/eps)))``.
    """
    if A.L != src.L:
        raise ValidationError("access structure and source disagree on L")
    require_valid(A)
    D, n, B = src.D, params.n, params.B
    eps = params.eps if eps_smooth is None else eps_smooth
    if not 0 < eps <= 1:
        raise ValidationError("smoothing eps must lie in (0, 1]")
    budgets = {}
    for S in range(1, 1 << D):
        card = math.prod(len(src.dealer_alphabets[d]) for d in dealers_of(S))
        dS = math.log2(card**n + 3) * math.sqrt((2.0 / B) * (D + math.log2(1.0 / eps)))
        budgets[S] = (n * B * leakage_free_rate(src, A, S) - n * B * params.delta_eps
                      - B * params.delta_n - B * dS - n * params.xi)
    negative = [S for S, b in budgets.items() if b < 0]
    if negative:
        msg = "negative budget for dealer subsets " + ", ".join(
            str(sorted(d + 1 for d in dealers_of(S))) for S in negative)
        log.warning(msg)
        return HashBudget(budgets, (0,) * D, tuple(negative), (msg,))
    rows = np.array([[1.0 if S >> d & 1 else 0.0 for d in range(D)] for S in budgets])
    ub = np.array([math.floor(b + 1e-9) for b in budgets.values()])
    res = milp(-np.ones(D), constraints=LinearConstraint(rows, -np.inf, ub),
               integrality=np.ones(D), bounds=Bounds(0, np.inf))
    if res.status != 0:
        raise SolverError(f"milp status {res.status}: {res.message}")
    r = tuple(int(round(v)) for v in res.x)
    binding = tuple(S for S, b in budgets.items()
                    if b - sum(r[d] for d in dealers_of(S)) < 1)
    return HashBudget(budgets, r, binding)
