"""What the reservation waveguide costs in optical loss and laser power."""

from pnocsec import LossParams, build, load_profile, secure, worst_case_loss
from pnocsec.photonics import fabric_laser_power

for profile in ("loss_default", "loss_wallplug10"):
    lp = load_profile(profile)
    print(profile)
    for name in ("firefly", "swiftnoc", "luminoc"):
        plain = build(name)
        sec = secure(plain)
        g, l0 = worst_case_loss(plain, lp)
        _, l1 = worst_case_loss(sec, lp)
        p0 = fabric_laser_power(plain, lp)[1]
        p1 = fabric_laser_power(sec, lp)[1]
        print(f"  {name:<9} worst node {g:2d}: {l0:6.2f} -> {l1:6.2f} dB (+{l1 - l0:.2f}), "
              f"laser {p0:7.3f} -> {p1:7.3f} W electrical")

lp = LossParams()
print(f"double-MR through loss {lp.through_loss_double_mr_db} dB x 64 rings = "
      f"{64 * lp.through_loss_double_mr_db:.3f} dB on every path that crosses the reservation switch")
