"""
Noise Hamiltonians and their dark states
========================================

Current fluctuations in the two side wires shift both Zeeman energies.  When
the fluctuations are correlated or anti-correlated, some two-spin states do
not feel them at all.
"""

import numpy as np

from crossbar_rb import spin_model as sm

ds = sm.dark_states()
kappa = 0.1

# %%
# At z0 = L both sets of dark states are exact.
for name, coeffs, states in (("correlated", sm.correlated_central(kappa), ds.symmetric()),
                             ("anti-correlated", sm.anticorrelated(kappa), ds.antisymmetric())):
    dH = sm.build_perturbation(coeffs)
    print(name, [f"{np.linalg.norm(dH @ psi):.1e}" for psi in states])

# %%
# Away from z0 = L only the triplet state stays dark under anti-correlated
# noise; the second state of each pair picks up a small leak.
for ratio in (0.3, 0.7, 1.0, 1.5):
    dH = sm.build_perturbation(sm.anticorrelated(kappa, ratio))
    print(f"z0/L={ratio}: |dH T0|={np.linalg.norm(dH @ ds.a1):.1e}  |dH D2|={np.linalg.norm(dH @ ds.a2):.2e}")

# %%
# The ideal entangling gate is a free evolution for time pi/J.
U = sm.ideal_gate()
print(np.round(np.exp(1j * np.pi / 4) * U, 12))
