"""Mean hashed distance against the leftover-hash bound over the hash output length.

The instance is Y uniform on 6 bits with Z a noisy copy of its two leading
bits.  Also prints the output length at which the bound would equal a target.
"""

import argparse
import math

import numpy as np

from distsecret.codec import ToeplitzHash, hashed_distance, lhl_rhs, min_entropy


def instance(flip):
    p = np.zeros((64, 4))
    for y in range(64):
        for z in range(4):
            d = bin((y >> 4) ^ z).count("1")
            p[y, z] = flip**d * (1 - flip) ** (2 - d) / 64
    return p


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--flip", type=float, default=0.1)
    ap.add_argument("--draws", type=int, default=500)
    ap.add_argument("--target", type=float, default=0.125)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    p = instance(args.flip)
    hmin = min_entropy(p, p.sum(axis=0))
    print(f"H_min(Y|Z) = {hmin:.4f} bits; bound equals {args.target} at r = {hmin + 2 * math.log2(args.target):.3f}")
    rng = np.random.default_rng(args.seed)
    for r in range(0, 7):
        v = [hashed_distance(p, [ToeplitzHash.random(6, r, rng)], [64]) for _ in range(args.draws)]
        print(f"r={r}: mean V {np.mean(v):.4f}  max V {np.max(v):.4f}  bound {lhl_rhs({1: r}, {1: hmin}):.4f}")


if __name__ == "__main__":
    main()
