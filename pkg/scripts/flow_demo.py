#!/usr/bin/env python3
"""Run the TV gradient flow on the bundled test image and print the energy decay."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from vgtv import PhiField, SolverConfig, load_image, run_flow  # noqa: E402


def main():
    here = os.path.dirname(__file__)
    u0 = load_image(os.path.join(here, "..", "data", "test64.pgm"))
    field = PhiField.classical_tv(u0.shape, u0.h)
    cfg = SolverConfig(lam=1.0, gap_tol=1e-7, max_iters=50000)
    trajectory = run_flow(u0, dt=0.02, n_steps=20, phi_field=field, cfg=cfg)
    for k, (t, e) in enumerate(zip(trajectory.times, trajectory.energies)):
        gap = "" if k == 0 else f"  step_gap={trajectory.step_gaps[k - 1]:.2e}"
        print(f"t={t:6.3f}  energy={e:.6f}{gap}")


if __name__ == "__main__":
    main()
