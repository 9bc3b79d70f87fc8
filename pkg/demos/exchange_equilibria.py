"""
Where the two income laws come from
===================================

Money-conserving random transfers settle on an exponential law; a
multiplicative walk reflected at a floor settles on a power law whose
exponent is set by the drift-to-volatility ratio. Small runs, a few seconds.
"""
from eqtax.simulator import (ExchangeConfig, cramer_exponent, drift_for_exponent,
                             simulate_additive_exchange, simulate_multiplicative)

x_bar = 28e3
add = simulate_additive_exchange(ExchangeConfig(n_agents=20_000, steps=20_000_000, seed=1), x_bar)
print("additive exchange")
print(f"  median / ln 2   {add.fitted_param / 1e3:7.2f} kEUR  (start {x_bar / 1e3:.2f})")
print(f"  KS distance     {add.ks_stat:7.4f}")
print(f"  total wealth    {add.final_wealth.sum() / 1e9:7.4f} GEUR")

print("multiplicative walk")
for target in (2.2, 2.4, 3.0):
    vol = 0.2
    drift = drift_for_exponent(target, vol)
    cfg = ExchangeConfig(n_agents=20_000, steps=1500, drift=drift, volatility=vol, barrier=1e5, seed=3)
    rep = simulate_multiplicative(cfg)
    print(f"  target {target:.2f}  Cramer root {cramer_exponent(drift, vol):.4f}"
          f"  Hill {rep.fitted_param:.3f}  converged={rep.converged}")
