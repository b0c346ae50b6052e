"""Searching the thresholds for long-run average utility.

Evaluates the cycle objective on a small grid with common random numbers,
then runs a short Kiefer-Wolfowitz ascent from a poor starting point.  Desk
scale throughout: the point is the machinery, not a production calibration.
"""

import numpy as np

from crossing_lab.kernels import KernelSpec, build_kernel
from crossing_lab.optimizer import KwConfig, ThresholdBox, grid_search, kiefer_wolfowitz
from crossing_lab.trading import PenaltySpec, UtilitySpec, long_run_objective
from crossing_lab.walk import Thresholds

kernel = build_kernel(KernelSpec("state_shape", alpha=0.05, regen_width=0.02,
                                 bound=1.0))
utility = UtilitySpec("exponential", 1.0)
penalty = PenaltySpec("linear_capped", slope=0.002, cap=0.5)


def evaluator(theta, n_cycles, seed):
    # cycle lengths are finite but heavy-tailed; give each evaluation slack
    return long_run_objective(kernel, Thresholds(*theta), utility, penalty,
                              mu=0.0, variant="level", side="long",
                              n_cycles=n_cycles, seed=seed, step_cap=10 ** 9)


box = ThresholdBox((-0.03, -0.004), (0.004, 0.03), grid_counts=(3, 3))
result = grid_search(evaluator, box, n_cycles=400, seed=17)
print("theta_lower  theta_upper   mean      stderr")
for row in result.table:
    print(f"{row['theta_lower']:+.4f}     {row['theta_upper']:+.4f}   "
          f"{row['mean']:+.5f}  {row['stderr']:.5f}")
print(f"grid argmax: {result.best}")

cfg = KwConfig(a0=0.004, c0=0.003, iterations=8, n_cycles=200, projection=box)
traj = kiefer_wolfowitz(evaluator, cfg, (-0.025, 0.025), seed=23)
print(f"KW start (-0.025, 0.025) -> final {np.round(traj.final, 4)} "
      f"after {len(traj.values)} iterations")
