"""
Average tax rate as a function of income
========================================

Tabulates the rate curve for a few values of tau and writes the Belgian one
as CSV (plot it with any tool).
"""
import sys

import numpy as np

from eqtax import belgium_2014, build_policy, figure_grid, schedule_table
from eqtax.ingest import emit_schedule_csv
from eqtax.policy import tax_rate

x_c = 100e3
incomes = np.array([1e5, 2e5, 5e5, 1e6, 1e7])

print("   tau " + "".join(f"{x / 1e3:>9.0f}k" for x in incomes))
for tau in (0.95, 0.9, 0.85, 0.8, 0.7):
    print(f"  {tau:4.2f} " + "".join(f"{r:>10.2%}" for r in tax_rate(incomes, tau, x_c)))

# the rate tends to 1 only logarithmically slowly
print("\nincome at which T reaches 50%, tau=0.85:", f"{x_c * 2 ** (1 / 0.15) / 1e3:.0f} kEUR")

policy = build_policy(belgium_2014(), 16.4e9)
out = sys.argv[1] if len(sys.argv) > 1 else "rate_curve.csv"
with open(out, "w") as fh:
    fh.write(emit_schedule_csv(schedule_table(policy, figure_grid(x_c))))
print(f"wrote {out}")
