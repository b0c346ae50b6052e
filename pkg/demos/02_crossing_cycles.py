"""Threshold-crossing cycles of the fluctuation walk.

Simulates one path, extracts the alternating buy/sell cycles for the long
side and the mirrored short side, and prints the first few records.  The
first record is flagged: its law differs from the stationary chain.
"""

from crossing_lab.kernels import build_kernel, default_specs
from crossing_lab.walk import (Thresholds, extract_crossings,
                               extract_crossings_mirrored, simulate_path)

kernel = build_kernel(default_specs()["state_shape"])
thr = Thresholds(-0.1, 0.15)
path = simulate_path(kernel, s0=0.0, x0=0.0, n_steps=200_000, seed=7)

records = extract_crossings(path, thr)
print(f"{len(records)} completed long cycles on a 200k-step path")
for rec in records[:5]:
    print(f"  #{rec.index}: buy at step {rec.t_idx} (s={rec.s_at_t:+.3f}), "
          f"sell at {rec.l_idx} (s={rec.s_at_l:+.3f}), duration {rec.duration}, "
          f"stationary={rec.in_state_space}")

mirrored = extract_crossings_mirrored(path, thr)
print(f"{len(mirrored)} completed short cycles (sell first, buy back below)")
r = mirrored[1]
print(f"  example: sell at step {r.l_idx} (s={r.s_at_l:+.3f}), "
      f"buy back at {r.t_idx} (s={r.s_at_t:+.3f})")
