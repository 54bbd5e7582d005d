"""Five half-wave dipoles in a row, 0.4 apart, coupled through one mode each."""

# %%
import numpy as np

from ccm.cli import five_element

np.set_printoptions(precision=2, suppress=True, linewidth=120)

# %%
# Mode 1 of every element: the coupling matrix is mirror symmetric about
# the centre element.
_, iso, c = five_element(0)
print("isolated lambda_1:", iso[0].lambdas[0])
print("coupled:", {lab: round(float(v), 4) for lab, v in zip(c.column_labels(), c.lambdas_c)})
print(c.coupling.display_m)

# %%
# Mode 2: columns split into even and odd patterns across the array;
# the odd ones vanish on the centre element.
_, _, c2 = five_element(1)
print(c2.column_labels())
print(c2.coupling.display_m)
