# The chain value n - 1/2 sum E over measurement chains from a to -a bounds
# the tau-average of |f|. Minimising it numerically for growing n approaches
# cos(theta); near maximal entanglement the approach is slow in n.
import numpy as np

from onticlab import RngStream, Z_AXIS, make_state, scan_bound

for k in (0, 2, 4, 5, 6):
    theta = k * np.pi / 12
    report = scan_bound(make_state(theta), Z_AXIS, 6, restarts=4, rng=RngStream(k))
    mins = " ".join(f"{r.min_value:.4f}" for r in report.per_n)
    print(f"theta = {k}pi/12  cos = {np.cos(theta):.4f}  min per n: {mins}  gap {report.gap:.2e}")

# at maximal entanglement E = cos(angle), and equal steps are optimal
n = 6
print(f"\nn(1 - cos(pi/2n)) at n={n}: {n * (1 - np.cos(np.pi / (2 * n))):.4f}")
