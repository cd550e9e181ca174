# Fixing the polar angle tau (the accessible part of the ontic state) and
# averaging only over the azimuth gives local averages that differ from the
# quantum ones, while still not depending on the distant setting.
import numpy as np

from onticlab import (
    BellGeneralizedModel,
    RngStream,
    SaturatingSigmaZModel,
    Setting,
    X_AXIS,
    Z_AXIS,
    analytic_intermediate,
    check_nonsignalling,
    delta,
    f_analytic,
    f_mc,
    make_state,
    tau_average,
)
from onticlab.bound import bound_rhs

state = make_state(np.pi / 3)
bell = BellGeneralizedModel()
rng = RngStream(2)

print(" tau     f_exact    f_MC")
for i, tau in enumerate(np.linspace(0.3, np.pi - 0.3, 7)):
    est = f_mc(bell, state, Z_AXIS, X_AXIS, tau, 100_000, rng.child(i))
    print(f"{tau:5.3f}  {float(f_analytic(state, Z_AXIS, tau)):+.5f}  {est.mean:+.5f}")

f = analytic_intermediate(bell, state, Z_AXIS)
print("\naverage over tau:", tau_average(f), "(quantum <A> = -cos(theta) = -0.5)")

report = check_nonsignalling(
    bell, state, Z_AXIS, [X_AXIS, Z_AXIS, Setting.from_vector((1, 0, 1))], np.linspace(0.2, 2.9, 7), 50_000, rng.child(99)
)
print(f"non-signalling: passed={report.passed}, worst pair z = {report.worst_z:.2f}")

sat = SaturatingSigmaZModel()
print("\nvariance of f over tau:")
print("  Bell model        ", delta(state, Z_AXIS, f).value)
print("  saturating model  ", delta(state, Z_AXIS, analytic_intermediate(sat, state, Z_AXIS)).value)
print("  bound cos - <A>^2 ", bound_rhs(state, Z_AXIS))
