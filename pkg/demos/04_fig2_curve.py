# Variance bound cos(theta) - cos(theta)^2 for sigma_z against the variance of
# the Bell model and of the saturating model, as a table (and a plot if
# matplotlib is around).
import numpy as np

from onticlab.cli import fig2_rows

rows = np.array(fig2_rows(19))
print(" theta    bound     Bell      saturating")
for theta, bound, d_bell, d_sat in rows:
    print(f"{theta:6.4f}  {bound:.5f}  {d_bell:.5f}  {d_sat:.5f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fine = np.array(fig2_rows(181))
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(fine[:, 0], fine[:, 1], "--", label="bound")
    ax.plot(fine[:, 0], fine[:, 2], "-", label="Bell model")
    ax.set_xlabel("theta")
    ax.set_ylabel("variance of f")
    ax.legend()
    fig.tight_layout()
    fig.savefig("fig2.png", dpi=120)
    print("wrote fig2.png")
