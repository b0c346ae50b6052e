"""Distributional forgetting of the cycle chain.

Starts the walk from two very different initial conditions and tracks the
total-variation distance between the laws of the n-th completed cycle.  A
same-law control run (same start, independent seed) shows the Monte Carlo
noise floor.  Desk scale; the acceptance suite runs 10x more replicates.
"""

from crossing_lab.ergodics import tv_decay_experiment
from crossing_lab.kernels import KernelSpec, build_kernel
from crossing_lab.walk import Thresholds

kernel = build_kernel(KernelSpec("state_shape", alpha=0.05, regen_width=0.02,
                                 bound=1.0))
thr = Thresholds(-0.005, 0.005)
series = tv_decay_experiment(kernel, thr, "U", [(-0.01, -1.0), (-0.01, 1.0)],
                             n_list=[1, 2, 3, 4, 6, 8], replicates=10_000,
                             seed=2024, bins=[2, 1, 2, 1], m_max=2,
                             step_cap=1 << 15)
print(" n   TV(two starts)   TV(control)")
for n, tv, ctl in zip(series.indices, series.tv, series.control_tv):
    print(f"{n:2d}   {tv:12.4f}   {ctl:11.4f}")
print(f"noise floor {series.noise_floor:.4f}; fitted log-slope "
      f"{series.fitted_rate} over window {series.fit_window}")
print(f"fraction of replicates completing all cycles: "
      f"{min(series.meta['completed_fraction']):.3f}")
print("at desk scale only n=1 rises above the floor; the acceptance run "
      "(10x replicates, coarser grid) resolves the decay through n=2-3")
