#!/usr/bin/env python3
"""Writes the CCA oracle fixtures in tests/data.

Canonical correlations come from the generalized symmetric eigenproblem
Cxy Cyy^-1 Cyx v = rho^2 Cxx v, solved with scipy.linalg.eigh. The C++ code
under test whitens and takes an SVD instead.
"""
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import eigh

FIXTURES = [(6, 2, 1), (20, 5, 2), (100, 10, 3)]


def oracle(X, Y):
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    cxx = Xc.T @ Xc / n
    cyy = Yc.T @ Yc / n
    cxy = Xc.T @ Yc / n
    m = cxy @ np.linalg.solve(cyy, cxy.T)
    m = (m + m.T) / 2
    rho2 = eigh(m, cxx, eigvals_only=True)[::-1]
    k = min(X.shape[1], Y.shape[1])
    return np.sqrt(np.clip(rho2[:k], 0.0, None))


def main(out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    for n, d, seed in FIXTURES:
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, d))
        # Planted structure: Y is a mixed copy of X with decreasing noise share.
        A = rng.normal(size=(d, d))
        noise = rng.normal(size=(n, d)) * np.linspace(0.3, 2.0, d)
        Y = X @ A + noise
        rho = oracle(X, Y)
        with open(out_dir / f"cca_{n}x{d}.txt", "w") as f:
            f.write(f"{n} {d} {d}\n")
            for M in (X, Y):
                for row in M:
                    f.write(" ".join(repr(float(v)) for v in row) + "\n")
            f.write(f"{len(rho)}\n")
            f.write(" ".join(repr(float(v)) for v in rho) + "\n")
        print(f"cca_{n}x{d}: {' '.join(f'{v:.10f}' for v in rho)}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "data")
