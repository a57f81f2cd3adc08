# %% [markdown]
# # Inverse dynamics two ways
# The actuator forces can be computed from joint-space inputs (which go
# through the forward position map) or directly from the Cartesian state.
# Both give the same answer; the Cartesian route skips the forward solve.

# %%
import numpy as np

from orthoglide import dynamics as dyn
from orthoglide import kinematics as kin
from orthoglide.params import MachineParams

p = MachineParams()
g = p.geom
rng = np.random.default_rng(1)
x = g.home + np.array([0.01, 0.02, -0.01])
s = dyn.CartesianState(x, np.array([0.2, -0.1, 0.05]), np.array([1.0, 2.0, -3.0]))

# %% joint-space route
q = kin.inverse_kinematics(s.pose, g)
qd, qdd = kin.global_rates_accels(s.pose, s.vel, s.acc, g)
c1, c2 = {}, {}
tau_joint = dyn.inverse_dynamics_joint(q, qd, qdd, p, counters=c1)

# %% Cartesian route
tau_cart = dyn.inverse_dynamics_cartesian(s, p, counters=c2)
print("joint route     ", tau_joint, c1)
print("Cartesian route ", tau_cart, c2)
print("relative gap    ", np.linalg.norm(tau_joint - tau_cart) / np.linalg.norm(tau_cart))

# %% the model inverted: forces back to acceleration
print("recovered acc   ", dyn.forward_dynamics(s.pose, s.vel, tau_cart, p))

# %% Cartesian mass matrix: symmetric, positive definite, close to the total
# moving mass near home
a = dyn.cartesian_mass_matrix(x, p)
print(np.round(a, 4))
print("eigenvalues", np.linalg.eigvalsh(a))

# %% power balance: d/dt of the mechanical energy equals qdot . force
h = 1e-5
e = [dyn.mechanical_energy(s.pose + s.vel * t + 0.5 * s.acc * t * t, s.vel + s.acc * t, p) for t in (-h, h)]
print("dE/dt =", (e[1] - e[0]) / (2 * h), " power =", (kin.d_inv(x, g) @ s.vel) @ tau_cart)
