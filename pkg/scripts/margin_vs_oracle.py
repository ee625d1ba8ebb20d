"""Compare certified margins with the brute-force oracle on random near-boundary vectors.

Usage: python scripts/margin_vs_oracle.py [--count 20] [--degree 2] [--seed 0]
"""
import argparse

import numpy as np

from momentcone.certify import brute_force_margin, certify
from momentcone.core import IndexSet, MomentVector
from momentcone.quadrature import AtomicMeasure, atomic_moments
from momentcone.regions import Box


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--mix", type=float, default=0.01, help="weight toward Lebesgue moments")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    T = Box(np.array([0.0]), np.array([1.0]))
    I = IndexSet.total_degree(args.degree)
    leb = 1.0 / np.arange(1, args.degree + 2)
    rng = np.random.default_rng(args.seed)
    print(f"{'certify':>12} {'oracle':>12} {'rel gap':>8}")
    for _ in range(args.count):
        nu = AtomicMeasure(rng.random((3, 1)), rng.dirichlet(np.ones(3)), T)
        base = atomic_moments(nu, I).values
        g = MomentVector(I, base + args.mix * (leb - base))
        c = certify(g, T).margin
        b = brute_force_margin(g, T, sphere_samples=10_000)
        print(f"{c:>12.5e} {b:>12.5e} {abs(c - b) / max(abs(b), 1e-300):>8.3f}")


if __name__ == "__main__":
    main()
