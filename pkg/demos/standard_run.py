"""Run the perturbed p=2 scenario on [-40, 60] and print the monitored quantities.

Takes about 15 seconds.
"""
from degen_waves import verify

sr = verify.standard_run()
rec = sr.recorder
print("    t    sup|u-U~|    G(t)        |phi|_2     sum(phi)dx")
for i, t in enumerate(rec.times):
    if t in (0.0, 5.0, 10.0, 20.0, 50.0, 100.0):
        print(f"{t:6.1f}  {rec.rows['deviation_sup'][i]:9.5f}  {rec.rows['energy_G'][i]:10.3e}  "
              f"{rec.rows['phi_l2'][i]:9.5f}  {rec.rows['phi_mass'][i]:10.6f}")
results, _ = verify.solver_checks(sr)
print()
for r in results:
    print(r.line())
