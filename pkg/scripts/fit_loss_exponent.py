"""Fit fidelity(L) = A (1-L)^p for the three-photon Fock herald and print A, p.

The heralded state after 'hhv' carries six cavity passes that matter, so p
should sit close to 6.
"""

import argparse

import numpy as np

from bqsim import HeraldPattern, InputSpec, LossConfig, ProtocolConfig, fock_state, lossy_herald_fidelity


def main(argv=None):
    ap = argparse.ArgumentParser(description="loss exponent fit")
    ap.add_argument("--alpha-sq", type=float, default=0.02)
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--l-max", type=float, default=0.1)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args(argv)

    spec = InputSpec.coherent_sq(args.alpha_sq)
    cfg = ProtocolConfig(3, n_max=args.n_max)
    grid = np.linspace(0.0, args.l_max, args.points)
    fids = np.array([
        lossy_herald_fidelity(spec, cfg, LossConfig(L), HeraldPattern.exact("hhv"), fock_state(3))[1]
        for L in grid
    ])
    p, log_a = np.polyfit(np.log1p(-grid), np.log(fids), 1)
    for L, f in zip(grid, fids):
        print(f"L={L:.3f}  fidelity={f:.6f}  (1-L)^6={(1 - L) ** 6:.6f}")
    print(f"fit: A={np.exp(log_a):.5f}  p={p:.4f}")


if __name__ == "__main__":
    main()
