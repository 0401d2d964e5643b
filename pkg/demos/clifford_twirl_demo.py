"""
Twirling a channel over the two-qubit Clifford group
====================================================

Averaging any channel over the 11520 Cliffords leaves a depolarizing channel
with the same average fidelity.
"""

import time

import numpy as np

from crossbar_rb import channels as ch
from crossbar_rb.clifford_group import generate_table

start = time.perf_counter()
table = generate_table()
print(f"{len(table)} Clifford elements in {time.perf_counter() - start:.2f}s")

rng = np.random.default_rng(0)
noise = ch.random_channel(rng, n_kraus=2)
twirled = ch.twirl_explicit(noise, table)

# %%
# The Pauli-transfer matrix becomes diag(1, p, ..., p).
ptm = twirled.ptm
print("off-diagonal max:", np.max(np.abs(ptm - np.diag(np.diag(ptm)))))
print("diagonal:", np.round(np.diag(ptm), 12))
print("trace formula p:", ch.depolarization_parameter_analytic(noise))
print("F_avg before/after:", ch.average_fidelity(noise), ch.average_fidelity(twirled))

# %%
# A projective measurement that is not read out depolarizes with p = 3/5
# whatever rank-1 projector is used.
for label, psi in (("uu", [1, 0, 0, 0]), ("T0", [0, 1, 1, 0]), ("random", rng.normal(size=4))):
    M = ch.measurement_channel(ch.density_matrix(np.asarray(psi, dtype=complex)))
    print(label, ch.depolarization_parameter_analytic(M))
