"""Equilibrium-preserving taxation of capital income.

Labor income follows an exponential (Boltzmann-Gibbs) law and capital income
a Pareto law above a crossover ``x_c``. The tax map in :mod:`eqtax.policy`
turns one Pareto equilibrium into another while raising a chosen revenue.
"""
from .distributions import (CapitalModel, LaborModel, boltzmann_density, boltzmann_sample,
                            pareto_density, pareto_sample, pareto_tail_stats)
from .economy import (EconomySnapshot, belgium_2014, capital_from_gamma, capital_share_estimate,
                      evasion_gap, gamma_from_capital, mean_labor)
from .errors import (ConfigError, DomainError, EqtaxError, EstimationError,
                     InfeasibleEconomyError, InfeasibleLevyError, ParseError)
from .policy import (TaxPolicy, build_policy, flat_tax_alpha, policy_from_tau, post_tax_exponent,
                     figure_grid, post_tax_income, poverty_gap, poverty_levy, revenue, schedule_table,
                     tau_parameter, tax_rate)

__version__ = "0.1.0"
