#!/usr/bin/env python3
"""Phase-space demo: expectation identities for position/momentum/spin on a
random spin-1/2 state, plus the two-point witness showing position and
momentum cannot share one barrier."""

import argparse
import math
from fractions import Fraction

import numpy as np

from qcs.measure_maps import level_function
from qcs.phase_space import (
    PhaseSpaceState,
    build_measure,
    momentum_observable,
    position_observable,
    realize_barrier,
    shared_barrier_joint_gap,
    spin_observable,
    to_unit_interval,
)
from qcs.spectral import PiecewiseFn


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--dq", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    raw = rng.normal(size=(2, args.n)) + 1j * rng.normal(size=(2, args.n))
    state = PhaseSpaceState.normalized(Fraction(1, 2), raw, args.dq)
    equiv = to_unit_interval(build_measure(state))
    hat = state.momentum_amplitudes
    qdens = ((np.abs(state.amplitudes) ** 2) * state.dq).sum(axis=0)
    pdens = ((np.abs(hat) ** 2) * state.dp).sum(axis=0)

    cases = [
        ("position", position_observable(PiecewiseFn.identity(), state),
         math.fsum(q * w for q, w in zip(state.q_grid, qdens))),
        ("momentum", momentum_observable(PiecewiseFn.identity(), state),
         math.fsum(p * w for p, w in zip(state.p_grid, pdens))),
        ("spin", spin_observable(state),
         math.fsum(float(s) * m for s, m in zip(state.sector_labels, state.sector_masses()))),
    ]
    print(f"{'observable':10s} {'operator side':>16s} {'label side':>16s} {'gap':>10s}")
    for name, obs, op_side in cases:
        barrier, _ = realize_barrier(obs, equiv)
        label_side = math.fsum(
            v * float(hi - lo) for lo, hi, v in level_function(obs.cdf, barrier).cells()
        )
        print(f"{name:10s} {op_side:16.12f} {label_side:16.12f} {abs(op_side - label_side):10.2e}")

    two_point = np.zeros((1, 8), dtype=complex)
    two_point[0, 0] = two_point[0, 1] = 1.0
    witness = PhaseSpaceState.normalized(Fraction(0), two_point, 0.5)
    print(f"\nshared-barrier joint gap on the two-point state: "
          f"{shared_barrier_joint_gap(witness):.4f} (> 0: different barriers needed)")


if __name__ == "__main__":
    main()
