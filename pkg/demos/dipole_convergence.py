"""Single dipole: modal eigenvalues, feed impedance and mesh refinement."""

# %%
import numpy as np

from ccm import ArrayLayout, WireDipole, assemble_array, assemble_self, isolated_modes, modal_solve
from ccm.mom import delta_gap, input_impedance

# %%
for length in (0.3, 0.5, 0.7):
    r, x = assemble_self(WireDipole(length))
    print(length, isolated_modes(r, x, 4).lambdas)

# %%
# Refining the half-wave mesh. lambda_1 sits near resonance, where a
# one-ohm change in modal reactance moves it by about 2%.
for n in (15, 31, 61, 121):
    d = WireDipole(0.5, segments=n)
    r, x = assemble_self(d)
    lam = isolated_modes(r, x, 1).lambdas[0]
    print(f"{n:4d} segments  Zin = {input_impedance(d):.2f}  lambda_1 = {lam:.4f}")

# %%
# Modal expansion of the delta-gap current with one and four modes.
d = WireDipole(0.5)
z = assemble_array(ArrayLayout((d,))).self_blocks[0]
v = delta_gap(d)
direct = np.linalg.solve(z, v)
for k in (1, 4):
    sol = modal_solve(isolated_modes(z.real, z.imag, k), v)
    err = np.linalg.norm(sol.current - direct) / np.linalg.norm(direct)
    print(f"k = {k}: relative current error {err:.3f}")
