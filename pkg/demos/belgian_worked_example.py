"""
Taxing the capital class without changing its shape
===================================================

A walk through the Belgian 2014 numbers: the capital-income exponent, the
money needed to close the poverty gap, and the tax map that raises it while
keeping the capital incomes Pareto distributed.
"""
from eqtax import belgium_2014, build_policy, flat_tax_alpha, poverty_levy

economy = belgium_2014()
print(f"mean labor income  {economy.x_bar / 1e3:8.2f} kEUR")
print(f"x_c / x_bar        {economy.x_c / economy.x_bar:8.3f}")

# the capital mass fixes the tail exponent
print(f"gamma              {economy.gamma:8.5f}")

# lifting everybody below x_pov up to x_pov
gap = poverty_levy(economy)
print(f"poverty gap        {gap / 1e9:8.3f} GEUR")

# raise exactly that from the capital class
policy = build_policy(economy, gap)
print(f"eta                {policy.eta:8.5f}")
print(f"tau                {policy.tau:8.5f}")
print(f"levy / capital     {policy.average_rate:8.2%}")
print(f"revenue check      {policy.revenue() / 1e9:8.3f} GEUR")

# the same amount as a flat cut of all labor incomes
print(f"flat labor factor  {flat_tax_alpha(gap, economy.m_lab):8.5f}")

for x in (120e3, 200e3, 500e3, 1e6):
    print(f"  T({x / 1e3:5.0f}k) = {policy.rate(x):6.2%}   keeps {policy.net(x) / 1e3:8.1f} kEUR")
