# Generalised Bell model: outcomes are +-1 on spherical caps, yet the full
# averages over the ontic sphere are exactly the quantum ones.
import numpy as np

from onticlab import (
    BellGeneralizedModel,
    Party,
    RngStream,
    Setting,
    correlation_qm,
    local_expectation,
    make_state,
    oracle_expectation,
)
from onticlab.models import estimate_all, xi, chi
from onticlab.sphere import angle_between

state = make_state(np.pi / 3)
a = Setting.in_plane(np.pi / 2)  # sigma_z
b = Setting.in_plane(0.3)

# closed forms against the dense 4x4 evaluation
print("<A>   closed", local_expectation(state, a, Party.A), " dense", oracle_expectation(state, a.operator(), np.eye(2)))
print("<AB>  closed", correlation_qm(state, a, b), " dense", oracle_expectation(state, a.operator(), b.operator()))

# cap sizes follow the marginals; the A-axis is tilted until the overlap
# reproduces the correlation
model = BellGeneralizedModel()
ahat = model.ahat(state, a, b)
print(f"xi = {xi(state, a):.6f}  chi = {chi(state, b):.6f}")
print(f"angle(ahat, b) = {angle_between(ahat.vector, b.vector):.6f}  (angle(a, b) = {angle_between(a.vector, b.vector):.6f})")

ea, eb, eab = estimate_all(model, state, a, b, 1_000_000, RngStream(1))
for name, est, exact in [
    ("<A>", ea, local_expectation(state, a, Party.A)),
    ("<B>", eb, local_expectation(state, b, Party.B)),
    ("<AB>", eab, correlation_qm(state, a, b)),
]:
    print(f"{name:5s} MC {est.mean:+.5f} +- {est.stderr:.5f}   quantum {exact:+.5f}")
