#!/usr/bin/env python3
"""Monte Carlo race: plain tomography vs adaptive estimation.

Both schemes estimate the same qubit state from m single-shot
measurements.  Tomography draws the three Pauli measurements uniformly;
the adaptive scheme re-derives the merit-optimal random measurement at its
running maximum-likelihood estimate before every shot.

The figure of merit 2m x BuresDistance(true, estimate) is plotted against
its theoretical floors.  This is a scaled-down run (fewer repetitions and
steps than a publication plot) so it finishes in about a minute.
"""

import time

import numpy as np

from qest.simulate import RunConfig, monte_carlo

X0 = np.array([0.55, 0.55, 0.55])


def main() -> None:
    cfg = RunConfig(x0=X0, weight="qfi", m_max=1500, reps=60, seed=7,
                    eps_ball=0.01)
    print(f"true state x0 = {X0}, weight = Fisher matrix, "
          f"{cfg.reps} repetitions, m up to {cfg.m_max}")
    start = time.time()
    results = monte_carlo(cfg)
    print(f"simulated in {time.time() - start:.0f} s\n")

    tomo = results["tomography"]
    adap = results["adaptive"]
    print(f"theoretical floors: adaptive c = {adap.c_opt:.3f}, "
          f"tomography cT = {tomo.c_tomo:.3f}\n")
    print(f"{'m':>6} {'tomography 2mB':>16} {'adaptive 2mB':>14}")
    for i, m in enumerate(tomo.checkpoints):
        if m < 10:
            continue
        print(f"{m:>6} {tomo.mean_bures[i]:13.2f} +- {tomo.se_bures[i]:<5.2f}"
              f"{adap.mean_bures[i]:10.2f} +- {adap.se_bures[i]:<5.2f}")
    print("\nThe adaptive scheme hugs its floor of 9 while tomography pays the")
    print("full Bures-weighted penalty: uniform Pauli sampling is not efficient")
    print("when the loss respects the state-space geometry.")


if __name__ == "__main__":
    main()
