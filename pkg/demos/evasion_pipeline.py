"""
How much capital income goes undeclared?
========================================

If the shape of the declared tail is trusted, the exponent fixes the total
capital mass. Comparing it to the declared amount gives an estimate of the
missing part. Here the "true" incomes are simulated with gamma = 2.3.
"""
import numpy as np

from eqtax import CapitalModel, capital_from_gamma, evasion_gap, pareto_sample
from eqtax.ingest import fit_pareto_tail, sample_bins

n_cap, x_c, declared = 1.73e5, 100e3, 60e9

incomes = pareto_sample(10 ** 6, CapitalModel(2.3, x_c), seed=11)
fit = fit_pareto_tail(incomes, x_c)
print(f"Hill exponent     {fit.gamma_hat:.4f} +- {fit.stderr:.4f}")

# the same thing from a binned table, as a tax office would publish it
binned = fit_pareto_tail(sample_bins(incomes, 1e3, start=x_c), x_c)
print(f"binned exponent   {binned.gamma_hat:.4f} +- {binned.stderr:.4f}")

implied = capital_from_gamma(fit.gamma_hat, n_cap, x_c)
gap = evasion_gap(fit.gamma_hat, n_cap, x_c, declared)
lo, hi = (evasion_gap(g, n_cap, x_c, declared) for g in fit.gamma_hat + np.array([2, -2]) * fit.stderr)
print(f"implied mass      {implied / 1e9:.2f} GEUR")
print(f"evasion gap       {gap / 1e9:.2f} GEUR  (2-sigma band {lo / 1e9:.2f} .. {hi / 1e9:.2f})")
