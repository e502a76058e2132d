"""Track the zero X(t) of the composite and its approach to the contact support edge."""
from degen_waves import diagnostics, waves

c = waves.make_composite(2.0, 1.0, -1.0, 1.0)
edge = c.contact.xi_edge
print("      t           X(t)      sqrt(A/B) - X/(1+t)^(1/3)     I12          I21")
for t in (1e1, 1e2, 1e3, 1e4, 1e5):
    r = diagnostics.interaction_integrals(c, t)
    gap = edge - r.X / (1.0 + t) ** (1.0 / 3.0)
    print(f"{t:9.0f}  {r.X:12.6f}  {gap:18.6e}        {r.I12:11.4e}  {r.I21:11.4e}")
