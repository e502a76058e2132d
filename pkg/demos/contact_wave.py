"""Print contact-wave constants, a profile table and measured vs closed-form norms."""
import math

import numpy as np

from degen_waves import waves

for p in (1.5, 2.0, 3.0):
    w = waves.barenblatt_constants(p, 1.0, -1.0, 0.0)
    print(f"p={p}: A={w.A:.10f}  B={w.B:.10f}  halfwidth(t=1)={waves.support_halfwidth(w, 1.0):.6f}")

w = waves.barenblatt_constants(2.0, 1.0, -1.0, 0.0)
print("\n     x        U        U_x")
for x in np.linspace(-2.5, 2.5, 11):
    print(f"{x:6.2f}  {waves.contact_u(w, 1.0, x):8.5f}  {waves.contact_dux(w, 1.0, x):8.5f}")

print("\n  p    q   order   measured     closed form   rel. diff")
for p in (2.0, 3.0):
    w = waves.barenblatt_constants(p, 1.0, -1.0, 0.0)
    for q, order in ((2.0, 1), (math.inf, 1), (1.5, 2)):
        n = waves.contact_norm(w, 10.0, q, order)
        print(f"{p:4.1f} {q:4.1f}  {order:5d}  {n.value:11.6e}  {n.predicted:11.6e}  {n.relative_discrepancy:9.2e}")
