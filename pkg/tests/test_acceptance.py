"""Acceptance suite: one test per criterion, tolerances as stated.

Run with ``pytest tests/test_acceptance.py -v``; each criterion reports as a
single PASS/FAIL line. Randomized runs are computed once per module and
re-run by the determinism check.
"""
import math

import mpmath as mp
import numpy as np
import pytest

from eqtax.distributions import CapitalModel, LaborModel, pareto_sample
from eqtax.economy import evasion_gap, gamma_from_capital
from eqtax.ingest import (emit_histogram_csv, emit_schedule_csv, fit_boltzmann_binned, fit_pareto_tail,
                          histogram_table, labor_bins)
from eqtax.policy import (build_policy, post_tax_derivative, post_tax_exponent, post_tax_income,
                          poverty_gap, poverty_gap_quadrature, revenue, revenue_quadrature,
                          schedule_table, tau_parameter, tax_rate)
from eqtax.simulator import (ExchangeConfig, cramer_exponent, drift_for_exponent,
                             simulate_additive_exchange, simulate_multiplicative, simulate_tax_mc)

from conftest import M_CAP, M_LAB, N_CAP, N_LAB, X_C, X_POV

GEUR = 1e9
SEED_TAX, SEED_EVASION, SEED_ADD, SEED_MULT = 7, 2026, 1, 3


# -- randomized runs, each a pure function of its seed -------------------------

def run_tax_mc():
    return simulate_tax_mc(10 ** 6, gamma_from_capital(M_CAP, N_CAP, X_C), X_C,
                           build_policy_belgium().tau, SEED_TAX, n_cap=N_CAP)


def run_evasion():
    sample = pareto_sample(10 ** 7, CapitalModel(2.3, X_C), SEED_EVASION)
    return sample, fit_pareto_tail(sample, X_C)


def run_additive():
    cfg = ExchangeConfig(n_agents=10 ** 5, steps=10 ** 8, seed=SEED_ADD)
    return simulate_additive_exchange(cfg, M_LAB / N_LAB)


def run_multiplicative():
    vol = 0.2
    cfg = ExchangeConfig(n_agents=10 ** 5, steps=1500, drift=drift_for_exponent(2.4, vol),
                         volatility=vol, barrier=X_C, seed=SEED_MULT)
    return simulate_multiplicative(cfg)


def build_policy_belgium():
    from eqtax.economy import belgium_2014
    return build_policy(belgium_2014(), 16.4 * GEUR)


def _hist_csv(values, edges):
    return emit_histogram_csv(histogram_table(values, edges))


def artifacts():
    """CSV artifacts of every randomized acceptance run."""
    tax = run_tax_mc()
    sample, fit = run_evasion()
    add = run_additive()
    mult = run_multiplicative()
    log_edges = X_C * np.geomspace(1, 1e4, 81)
    log_edges[-1] = max(log_edges[-1], np.nextafter(max(sample.max(), tax.final_wealth.max(),
                                                        mult.final_wealth.max()), np.inf))
    return {
        "tax": _hist_csv(tax.final_wealth, log_edges),
        "evasion": _hist_csv(sample, log_edges) + f"gamma_hat,{fit.gamma_hat!r}\n",
        "additive": _hist_csv(add.final_wealth, np.linspace(0, add.final_wealth.max() * 1.001, 101)),
        "multiplicative": _hist_csv(mult.final_wealth, log_edges),
    }, (tax, fit, add, mult)


@pytest.fixture(scope="module")
def runs():
    return artifacts()


# -- criteria ---------------------------------------------------------------------

def test_c01_belgian_gamma():
    assert abs(gamma_from_capital(60 * GEUR, 1.73e5, 100e3) - 2.40515) <= 1e-5


def test_c02_poverty_gap():
    x_bar = M_LAB / N_LAB
    gap = poverty_gap(X_POV, x_bar, M_LAB)
    assert abs(gap - 16.40 * GEUR) <= 0.01 * GEUR
    assert abs(poverty_gap_quadrature(X_POV, x_bar, M_LAB) - gap) <= 1e-9 * gap


def test_c03_post_tax_exponent():
    eta = post_tax_exponent(M_CAP, 16.4 * GEUR, N_CAP, X_C)
    tau = tau_parameter(gamma_from_capital(M_CAP, N_CAP, X_C), eta)
    assert abs(eta - 2.65779) <= 1e-5
    assert abs(tau - 0.84761) <= 1e-5


def test_c04_rate_curve():
    stated = {120e3: 2.698, 200e3: 9.869, 500e3: 21.445}
    off = {x: 100 * tax_rate(x, 0.85, X_C) - pct for x, pct in stated.items()}
    bad = {f"{x / 1e3:g}k": f"{d:+.5f} pts" for x, d in off.items() if abs(d) > 1e-3}
    assert not bad, f"outside +-0.001 percentage points: {bad}"


def test_c05_revenue_conservation():
    rng = np.random.default_rng(5)
    worst_dm = worst_q = 0.0
    for _ in range(1000):
        gamma = rng.uniform(2.05, 6.0)
        n_cap = rng.uniform(1e3, 1e6)
        x_c = rng.uniform(1e4, 1e6)
        m_cap = n_cap * x_c * (gamma - 1) / (gamma - 2)
        dm = rng.uniform(0.001, 0.999) * (m_cap - n_cap * x_c)
        eta = post_tax_exponent(m_cap, dm, n_cap, x_c)
        tau = tau_parameter(gamma, eta)
        r = revenue(gamma, tau, n_cap, x_c)
        worst_dm = max(worst_dm, abs(r - dm) / dm)
        worst_q = max(worst_q, abs(revenue_quadrature(gamma, tau, n_cap, x_c) - r) / r)
    assert worst_dm <= 1e-9 and worst_q <= 1e-9, (worst_dm, worst_q)


def test_c06_push_forward(runs):
    tax = runs[1][0]
    assert abs(tax.fitted_param - 2.65779) <= 0.01
    assert tax.ks_pvalue > 0.01


def test_c07_measure_preservation():
    pol = build_policy_belgium()
    grid = np.geomspace(X_C, 10 * X_C, 200)
    pre, post = pol.pre_tax, pol.post_tax
    lhs = post.density(post_tax_income(grid, pol.tau, X_C)) * post_tax_derivative(grid, pol.tau, X_C)
    rhs = pre.density(grid)
    assert np.max(np.abs(lhs / rhs - 1)) <= 1e-9
    # central differences at an mpmath reference precision
    mp.mp.dps = 40
    tau = mp.mpf(pol.tau)
    X = lambda x: mp.mpf(X_C) ** (1 - tau) * x ** tau
    fd = np.array([float(mp.diff(X, mp.mpf(float(x)), method="step", h=mp.mpf(float(x)) * mp.mpf("1e-12")))
                   for x in grid])
    assert np.max(np.abs(post_tax_derivative(grid, pol.tau, X_C) / fd - 1)) <= 1e-6


def test_c08_estimator_consistency():
    fit = fit_pareto_tail(pareto_sample(10 ** 6, CapitalModel(2.4, X_C), 8), X_C)
    assert abs(fit.stderr - 0.0014) < 1e-4
    assert abs(fit.gamma_hat - 2.4) <= 3 * fit.stderr
    bins = labor_bins(LaborModel(28013.0, N_LAB), np.arange(0, 101) * 1e3)
    lab = fit_boltzmann_binned(bins, X_POV, X_C)
    assert abs(lab.x_bar_hat / 28013.0 - 1) <= 2e-3


def test_c09_evasion_pipeline(runs):
    fit = runs[1][1]
    gap = evasion_gap(fit.gamma_hat, N_CAP, X_C, 60 * GEUR)
    # closed form: N x_c (g - 1)/(g - 2) at g = 2.3, minus the declared 60 GEUR
    oracle = float(mp.mpf(N_CAP) * X_C * mp.mpf("1.3") / mp.mpf("0.3")) - 60 * GEUR
    assert abs(oracle - 14.97 * GEUR) < 0.005 * GEUR
    assert abs(gap - oracle) <= 0.02 * oracle


def test_c10_additive_equilibrium(runs):
    add = runs[1][2]
    x_bar = M_LAB / N_LAB
    assert abs(add.fitted_param / x_bar - 1) <= 0.02
    unit = x_bar / 2 ** 20
    units = np.rint(add.final_wealth / unit).astype(np.int64)
    assert np.array_equal(units * unit, add.final_wealth)
    assert int(units.sum()) == 10 ** 5 * 2 ** 20


def test_c11_multiplicative_equilibrium(runs):
    vol = 0.2
    # pilot oracle: Cramer-Lundberg root by quadrature vs the closed-form drift
    assert abs(cramer_exponent(drift_for_exponent(2.4, vol), vol) - 2.4) <= 1e-6
    mult = runs[1][3]
    assert mult.converged
    assert abs(mult.fitted_param - 2.4) <= 0.1


def test_c12_determinism(runs):
    first = runs[0]
    second, _ = artifacts()
    for name in first:
        assert first[name].encode() == second[name].encode(), name
    pol = build_policy_belgium()
    grid = np.geomspace(X_C, 1e6, 50)
    assert emit_schedule_csv(schedule_table(pol, grid)) == emit_schedule_csv(schedule_table(pol, grid))
