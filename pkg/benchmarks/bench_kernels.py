"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--steps 4000]

Both backends run the same RK4 push and the same far-field quadrature; the
script also reports the largest difference between their outputs.
"""
import argparse
import math
import time

import numpy as np

from thomsonwp import _backend
from thomsonwp.dynamics import ElectronState, push_trajectory
from thomsonwp.laser import BeamConfig
from thomsonwp.radiation import amplitudes
from thomsonwp.units import AngularSpectralGrid


def best_of(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=4000, help="RK4 steps per push")
    ap.add_argument("--directions", type=int, default=4, help="n_theta = n_phi of the grid")
    ap.add_argument("--omegas", type=int, default=32)
    args = ap.parse_args(argv)

    beam = BeamConfig(model="focused_pulsed", peak_intensity_W_cm2=1e19, fwhm_fs=10)
    dt = 2 * math.pi / 1000
    init = ElectronState(np.zeros(3), np.zeros(3), -args.steps * dt / 2)
    t_end = init.time + args.steps * dt
    grid = AngularSpectralGrid.sphere(args.directions, args.directions, args.omegas, 0.5, 3.0)
    nv = grid.unit_vectors().reshape(-1, 3)

    backends = ["python"] + (["cython"] if _backend.NAME == "cython" else [])
    rows, outs = [], {}
    for name in backends:
        tp, traj = best_of(lambda: push_trajectory(beam, init, t_end, dt, backend=name),
                           args.repeat)
        ta, amp = best_of(lambda: amplitudes(traj, nv, grid.omegas, window="hann",
                                             threads=1, backend=name), args.repeat)
        outs[name] = (traj, amp)
        rows.append((name, tp, ta))

    print(f"push: {args.steps} RK4 steps; far field: {nv.shape[0]} directions x "
          f"{args.omegas} frequencies; best of {args.repeat}")
    print(f"{'backend':<8} {'push [s]':>10} {'farfield [s]':>13}")
    for name, tp, ta in rows:
        print(f"{name:<8} {tp:10.4f} {ta:13.4f}")
    if len(rows) == 2:
        (_, p0, a0), (_, p1, a1) = rows
        print(f"speed-up  {p0 / p1:10.1f} {a0 / a1:13.1f}")
        (tr_py, amp_py), (tr_cy, amp_cy) = outs["python"], outs["cython"]
        print(f"max |dr| {np.max(np.abs(tr_py.r - tr_cy.r)):.2e}, "
              f"max |dA|/max|A| {np.max(np.abs(amp_py - amp_cy)) / np.max(np.abs(amp_cy)):.2e}")
    else:
        print("compiled kernels not available; only the fallback was timed")


if __name__ == "__main__":
    main()
