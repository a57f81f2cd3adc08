# %% [markdown]
# # Camera error versus acceleration
# A 200 mm linear move is observed by the simulated camera at several
# accelerations.  A motion blur term proportional to acceleration is
# calibrated so that the 1 m/s^2 move has a 286 um dynamic error.

# %%
from dataclasses import replace

from orthoglide.sensors import VisionConfig, calibrate_blur, characterize

base = VisionConfig(accuracy=100e-6, latency=0.0, static_bias=(198e-6, 0, 0), seed=7)

# %% no blur: the dynamic error is just the noise level, whatever the acceleration
for r in characterize(base):
    print(f"{r.acceleration:5.1f} m/s^2  static {r.static_error * 1e6:7.1f} um  dynamic {r.dynamic_error * 1e6:7.1f} um")

# %% calibrated blur
gain = calibrate_blur(base)
print("blur gain", gain)
for r in characterize(replace(base, blur_gain=gain)):
    print(f"{r.acceleration:5.1f} m/s^2  static {r.static_error * 1e6:7.1f} um  dynamic {r.dynamic_error * 1e6:7.1f} um")
