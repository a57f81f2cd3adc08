# %% [markdown]
# # Kinematics tour
# Inverse and forward position maps of the three-leg prismatic machine,
# its velocity Jacobian, and how conditioning degrades toward the
# workspace boundary.

# %%
import numpy as np

from orthoglide import kinematics as kin
from orthoglide.params import GeomParams

g = GeomParams()
print("home pose", g.home, " d4 =", g.d4, " d6 =", g.d6)

# %% a pose, its joint values, and back
x = g.home + np.array([0.02, -0.01, 0.03])
q = kin.inverse_kinematics(x, g)
print("q =", q)
print("FK(IK(x)) - x =", kin.forward_kinematics(q, g) - x)

# %% passive joint angles: each leg carries a (sin, cos) pair for two revolutes
t = kin.passive_trig(x, g)
print("s2^2 + c2^2 - 1 =", t.s2 ** 2 + t.c2 ** 2 - 1)
print("s3^2 + c3^2 - 1 =", t.s3 ** 2 + t.c3 ** 2 - 1)

# %% velocity Jacobian against central differences
h = 1e-6
fd = np.stack([(kin.inverse_kinematics(x + h * e, g) - kin.inverse_kinematics(x - h * e, g)) / (2 * h)
               for e in np.eye(3)], axis=1)
print("d_inv =\n", kin.d_inv(x, g))
print("max |d_inv - FD| =", np.abs(kin.d_inv(x, g) - fd).max())

# %% conditioning along the x axis: near home the map is almost isotropic
for dx in (0.0, 0.05, 0.10, 0.15, 0.20):
    p = g.home + np.array([dx, 0.0, 0.0])
    if not kin.reachable(p, g):
        print(f"dx = {dx:.2f}: unreachable")
        continue
    print(f"dx = {dx:.2f}: cond(d_inv) = {np.linalg.cond(kin.d_inv(p, g)):8.3f}")

# %% roundtrip over random poses
rng = np.random.default_rng(0)
poses = kin.sample_poses(rng, 1000, g)
err = [np.linalg.norm(kin.forward_kinematics(kin.inverse_kinematics(p, g), g) - p) for p in poses]
print("max roundtrip error over 1000 poses:", max(err), "m")
