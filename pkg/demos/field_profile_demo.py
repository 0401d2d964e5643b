"""
Magnetic field above an alternating wire array
==============================================

Sum the wire contributions directly, compare with the exact values at the
operation points and check the calibrated two-wire approximation.
"""

import numpy as np

from crossbar_rb import field_profile as fp

cfg = fp.WireArrayConfig.from_ratio(1.0)

# %%
# The lattice sum converges slowly, roughly as 1/N, towards the closed form.
exact = fp.closed_form_operation_point(0, cfg).bz
for cutoff in (10, 100, 1000, 10000):
    bz = fp.total_field(cfg.half_spacing, cfg, cutoff).bz
    print(f"N={cutoff:>6}  Bz(L)={bz:.10f}  rel.err={abs(bz - exact) / exact:.1e}")
print(f"closed form       {exact:.10f}")

# %%
# Near an operation point the field is almost purely along z, and the two
# nearest wires, rescaled once, reproduce it.
for x in np.linspace(0.8, 1.2, 5):
    full = fp.total_field(x, cfg, 2000)
    approx = fp.calibrated_two_wire_field(x, 0, cfg)
    print(f"x/L={x:.2f}  sum=({full.bx:+.5f}, {full.bz:.5f})  two-wire=({approx.bx:+.5f}, {approx.bz:.5f})")

# %%
# The field at the operation point peaks at an intermediate depth.
for ratio in (0.25, 0.5, 0.76, 1.0, 2.0):
    c = fp.WireArrayConfig.from_ratio(ratio)
    print(f"z0/L={ratio:<5} Bz(x0)/B0={fp.closed_form_operation_point(0, c).bz:.5f}")
