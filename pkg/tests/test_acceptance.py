"""Acceptance suite: ten end-to-end criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or ``python3 -m tests.test_acceptance``.
"""

from __future__ import annotations

import math
import time
from itertools import combinations

import numpy as np
import pytest

from distsecret import regions
from distsecret.access import ThresholdParams, all_or_nothing, threshold_structure
from distsecret.codec import (
    ProtocolParams,
    ToeplitzHash,
    binning_error_exact,
    build_binning,
    collision_probability,
    hashed_distance,
    lhl_rhs,
    min_entropy,
    nested_rate_schedule,
    smooth_truncate,
)
from distsecret.harness import ProtocolSpec, verify_protocol
from distsecret.source import conditional_entropy, from_arrays, pairwise_key_source, random_source, sel
from distsecret.threshold import PairwiseKeys, achieved_rate, dealer_broadcast, ramp_share

from ._gen import random_monotone, random_small_source, random_submodular

RESULTS: dict[int, str] = {}


def _record(num: int, title: str, ok: bool, detail: str, elapsed: float) -> bool:
    RESULTS[num] = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {title}: {detail} ({elapsed:.1f}s)"
    return ok


def criterion_1() -> tuple[bool, str]:
    src = pairwise_key_source(4, 2)
    A = threshold_structure(4, ThresholdParams(3, 1))
    inner = regions.inner_sum_rate_bounds(src, A)
    outer = regions.outer_general(src, A)
    cap, _ = regions.threshold_capacity_region(4, 2, ThresholdParams(3, 1))
    diffs = [abs(inner.bound[S] - cap.bound[S]) for S in (1, 2, 3)]
    diffs += [abs(outer.bound[S] - cap.bound[S]) for S in (1, 2, 3)]
    ok = max(diffs) <= 1e-9
    return ok, f"inner {[round(inner.bound[S], 12) for S in (1, 2, 3)]}, outer {[round(outer.bound[S], 12) for S in (1, 2, 3)]}, max dev {max(diffs):.1e}"


def criterion_2() -> tuple[bool, str]:
    parts = []
    ok = True
    for m in (2, 3):
        report = verify_protocol(ProtocolSpec("threshold-ramp", 7, L=4, t=3, z=1, D=1, m=m))
        n_auth = len(report.reliability)
        n_unauth = len(report.leakage)
        keys = PairwiseKeys.generate(4, 1, m, seed=m)
        shares = ramp_share(np.zeros((1, 2), dtype=np.int64), 3, 1, 4, m, seed=m)
        dealer_broadcast(keys, 0, shares)
        rate = achieved_rate(3, 1, 1, m, int(keys.used[0, 0]))
        this = (n_auth == math.comb(4, 3) + 1 and n_unauth == 5 and report.max_error == 0.0
                and report.max_leakage <= 1e-12 and report.uniformity_deficit <= 1e-12 and rate == 2.0)
        ok &= this
        parts.append(f"m={m}: {n_auth} sets err {report.max_error}, {n_unauth} sets leak {report.max_leakage:.1e}, "
                     f"deficit {report.uniformity_deficit:.1e}, rate {rate}")
    return ok, "; ".join(parts)


def criterion_3() -> tuple[bool, str]:
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        L = int(rng.choice([2, 3]))
        src = random_small_source(rng, L, 1)
        A = all_or_nothing(L)
        vals = [regions.aon_inner(src).bound[1], regions.aon_outer(src).bound[1]]
        b = regions.d1_bounds(src, A)
        vals += [b.lower, b.upper]
        worst = max(worst, max(vals) - min(vals))
    return worst <= 1e-9, f"20 sources, max spread {worst:.1e}"


def criterion_4() -> tuple[bool, str]:
    rng = np.random.default_rng(4)
    agree = feasible = 0
    for _ in range(200):
        D = int(rng.integers(1, 5))
        f, g = random_submodular(rng, D), random_submodular(rng, D)
        assert regions.is_submodular(f) and regions.is_submodular(g)
        fast = regions.submodular_feasible(f, g)
        lp = regions.lp_feasible(f, g)
        agree += fast == lp
        feasible += lp
    return agree == 200, f"{agree}/200 agree ({feasible} feasible, {200 - feasible} infeasible)"


def criterion_5() -> tuple[bool, str]:
    rng = np.random.default_rng(5)
    agree = total = skipped = 0
    findings = []
    for i in range(20):
        L = int(rng.choice([2, 3]))
        src = random_small_source(rng, L, 2, sizes=(2, 3))
        A = random_monotone(rng, L)
        fm = regions.inner_d2_fm(src, A)
        system = regions.inner_aux_system(src, A)
        region = fm.as_region()
        top = max(0.05, 1.3 * max(fm.r1, fm.r2, 0.0))
        for _ in range(100):
            R = rng.uniform(0, top, size=2)
            if region.facet_distance(R) < 1e-7:
                skipped += 1
                continue
            total += 1
            a, b = fm.contains(R), regions.is_inner_member(system, R)
            agree += a == b
            if a != b:
                findings.append((i, R.tolist(), a, b))
    ok = agree == total and not findings
    return ok, f"{agree}/{total} points agree, {skipped} near-facet points excluded" + (
        f", disagreements {findings[:3]}" if findings else "")


def criterion_6() -> tuple[bool, str]:
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        x = rng.integers(0, 2, 6)
        x2 = x.copy()
        while np.array_equal(x, x2):
            x2 = rng.integers(0, 2, 6)
        worst = max(worst, collision_probability(6, 3, x, x2))
    worst4 = 0.0
    for a, b in combinations(range(16), 2):
        xa = (a >> np.arange(4)) & 1
        xb = (b >> np.arange(4)) & 1
        worst4 = max(worst4, collision_probability(4, 3, xa, xb))
    ok = worst <= 2**-3 + 1e-12 and worst4 <= 2**-3 + 1e-12
    return ok, f"max collision n_in=6: {worst}, exhaustive n_in=4 (120 pairs): {worst4}, limit {2**-3}"


def lhl_instance() -> np.ndarray:
    """Y uniform on 6 bits; Z is Y's two leading bits through independent 0.1 bit flips."""
    p = np.zeros((64, 4))
    flip = 0.1
    for y in range(64):
        top = y >> 4
        for z in range(4):
            d = bin(top ^ z).count("1")
            p[y, z] = (1 / 64) * flip**d * (1 - flip) ** (2 - d)
    return p


def criterion_7() -> tuple[bool, str]:
    p = lhl_instance()
    hmin = min_entropy(p, p.sum(axis=0))
    needed = hmin + 2 * math.log2(0.125)
    rng = np.random.default_rng(7)
    ratios = {}
    for r in range(1, 7):
        dists = [hashed_distance(p, [ToeplitzHash.random(6, r, rng)], [64]) for _ in range(200)]
        ratios[r] = (float(np.mean(dists)), lhl_rhs({1: r}, {1: hmin}))
    inequality = all(m <= b for m, b in ratios.values())
    r_int = round(needed)
    admissible = r_int >= 1 and abs(needed - r_int) <= 1e-9
    ok = admissible and ratios[r_int][0] <= ratios[r_int][1]
    summary = ", ".join(f"r={r}: {m:.3f}<={b:.3f}" for r, (m, b) in ratios.items())
    if not admissible:
        return False, (f"no hash length gives bound 0.125: H_min={hmin:.3f} bits needs r={needed:.3f}; "
                       f"mean V <= bound holds at every r ({summary})" if inequality else summary)
    return ok, summary


def criterion_8() -> tuple[bool, str]:
    rng = np.random.default_rng(8)
    passed = runs = 0
    for i in range(10):
        if i < 2:
            q = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
        else:
            ky, kz = int(rng.choice([2, 3])), int(rng.choice([2, 3]))
            if ky == 3 and kz == 3:
                kz = 2
            q = rng.dirichlet(np.ones(ky * kz)).reshape(ky, kz)
        ok_all = True
        for eps in (0.25, 0.5):
            s = smooth_truncate(q, 8, eps)
            ok_all &= s.distance_ok and s.min_entropy_ok
            runs += 1
        passed += ok_all
    return passed == 10, f"{passed}/10 instances satisfy both postconditions at eps in (0.25, 0.5)"


CROSSOVER = 0.2
DECODE_EPS = 1.0


def reconciliation_errors(stream: int) -> list[float]:
    p = np.array([[0.5 - CROSSOVER / 2, CROSSOVER / 2], [CROSSOVER / 2, 0.5 - CROSSOVER / 2]])
    src = from_arrays(p, 1)
    h = conditional_entropy(src, sel(dealers=[0]), sel(participants=[0]))
    errs = []
    for n in (4, 6, 8):
        code = build_binning(src, ProtocolParams(n=n, eps=DECODE_EPS), [0.0], [h + 0.1], seed=1000 * stream + n)
        errs.append(binning_error_exact(code, 1, DECODE_EPS).error)
    return errs


def criterion_9() -> tuple[bool, str]:
    trend_ok = 0
    detail = []
    for s in range(5):
        e = reconciliation_errors(s)
        steps = sum([e[1] <= e[0] + 1e-12, e[2] <= e[1] + 1e-12, e[2] <= e[0] + 1e-12])
        trend_ok += steps >= 2
        detail.append("/".join(f"{v:.3f}" for v in e))
    rng = np.random.default_rng(9)
    worst = 0.0
    tested = 0
    for _ in range(20):
        src = random_source(rng, [2, 2], [2, 2])
        for eps in (0.01, 0.05):
            for d in range(2):
                sch = nested_rate_schedule(src, d, eps)
                if sch.conditional_entropy - sch.delta < 0:
                    continue
                tested += 1
                worst = max(worst, abs(sch.total_rate - ((1 + eps) * sch.conditional_entropy + eps)))
    ok = trend_ok == 5 and worst <= 1e-9 and tested > 0
    return ok, f"trend in {trend_ok}/5 streams (errors n=4/6/8: {', '.join(detail)}); telescoping max dev {worst:.1e} over {tested} schedules"


def criterion_10() -> tuple[bool, str]:
    rng = np.random.default_rng(10)
    worst = -math.inf
    empty = 0
    for _ in range(30):
        L = int(rng.integers(1, 4))
        D = int(rng.integers(1, 3))
        src = random_small_source(rng, L, D)
        A = random_monotone(rng, L)
        system = regions.inner_aux_system(src, A)
        outer = regions.outer_general(src, A)
        for S in regions.nonempty_subsets(D):
            v = regions.inner_max_sum_rate(system, S)
            if v is None:
                empty += 1
                break
            worst = max(worst, v - outer.bound[S])
    return worst <= 1e-9, f"max (inner sum-rate - outer facet) = {worst:.3g}; {empty} empty inner regions"


CRITERIA = {
    1: ("threshold capacity facets", criterion_1, 10),
    2: ("threshold scheme exactness", criterion_2, 60),
    3: ("single-dealer all-or-nothing identity", criterion_3, 5),
    4: ("submodular feasibility vs LP", criterion_4, 10),
    5: ("two-dealer closed form vs LP projection", criterion_5, 60),
    6: ("Toeplitz two-universality", criterion_6, 5),
    7: ("distributed leftover hash bound", criterion_7, 30),
    8: ("smoothing postconditions", criterion_8, 30),
    9: ("reconciliation trend and telescoping", criterion_9, None),
    10: ("region sandwich", criterion_10, None),
}


def run_criterion(num: int) -> bool:
    title, fn, budget = CRITERIA[num]
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        ok = False
        detail += f"; runtime {elapsed:.1f}s exceeds {budget}s"
    return _record(num, title, ok, detail, elapsed)


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    ok = run_criterion(num)
    print(RESULTS[num])
    assert ok, RESULTS[num]


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        run_criterion(k)
        print(RESULTS[k])
