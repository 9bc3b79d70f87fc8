import warnings

import mpmath
import pytest
from hypothesis import given, strategies as st

from eqtax.economy import (CrossoverWarning, EconomySnapshot, capital_estimates, capital_from_gamma,
                           capital_share_estimate, evasion_gap, gamma_from_capital, mean_labor,
                           resolve_capital)
from eqtax.errors import DomainError, InfeasibleEconomyError

from conftest import M_CAP, M_LAB, N_CAP, N_LAB, X_C, X_POV, rel


def test_gamma_belgium():
    assert gamma_from_capital(M_CAP, N_CAP, X_C) == pytest.approx(102.7 / 42.7, rel=1e-13)
    assert gamma_from_capital(M_CAP, N_CAP, X_C) == pytest.approx(2.40515, abs=1e-5)


def test_gamma_symmetric_point():
    assert gamma_from_capital(2 * N_CAP * X_C, N_CAP, X_C) == 3.0


def test_gamma_post_tax_mass():
    assert gamma_from_capital(43.6e9, N_CAP, X_C) == pytest.approx(2.65779, abs=1e-5)


def test_gamma_infeasible():
    with pytest.raises(InfeasibleEconomyError):
        gamma_from_capital(N_CAP * X_C, N_CAP, X_C)


def test_capital_from_gamma():
    assert capital_from_gamma(3.0, N_CAP, X_C) == pytest.approx(2 * N_CAP * X_C)
    assert capital_from_gamma(2.40515, N_CAP, X_C) == pytest.approx(60.0e9, rel=1e-4)
    with pytest.raises(DomainError):
        capital_from_gamma(2.0, N_CAP, X_C)


@pytest.mark.parametrize("g", [2.1, 2.5, 3.0, 5.0])
def test_roundtrip_listed(g):
    assert rel(gamma_from_capital(capital_from_gamma(g, N_CAP, X_C), N_CAP, X_C), g) < 1e-12


@given(g=st.floats(2.001, 50.0), n=st.floats(1.0, 1e7), xc=st.floats(1.0, 1e6))
def test_roundtrip_property(g, n, xc):
    assert rel(gamma_from_capital(capital_from_gamma(g, n, xc), n, xc), g) < 1e-12


@given(f1=st.floats(1.01, 100.0), f2=st.floats(1.01, 100.0))
def test_gamma_decreasing_in_mass(f1, f2):
    if f1 == f2:
        return
    lo, hi = sorted((f1, f2))
    assert gamma_from_capital(hi * N_CAP * X_C, N_CAP, X_C) < gamma_from_capital(lo * N_CAP * X_C, N_CAP, X_C)


def test_evasion_gap_closed_form():
    oracle = mpmath.mpf("17.3e9") * mpmath.mpf("1.3") / mpmath.mpf("0.3") - mpmath.mpf("60e9")
    assert rel(evasion_gap(2.3, N_CAP, X_C, 60e9), float(oracle)) < 1e-12
    assert evasion_gap(2.3, N_CAP, X_C, 60e9) == pytest.approx(14.967e9, rel=1e-4)


def test_evasion_gap_consistency():
    assert evasion_gap(2.40515, N_CAP, X_C, 60e9) == pytest.approx(0.0, abs=1e-3 * 60e9)
    implied = capital_from_gamma(2.7, N_CAP, X_C)
    assert evasion_gap(2.7, N_CAP, X_C, implied) == 0.0


@given(f=st.floats(1.001, 1000.0))
def test_evasion_gap_zero_at_own_gamma(f):
    m = f * N_CAP * X_C
    assert abs(evasion_gap(gamma_from_capital(m, N_CAP, X_C), N_CAP, X_C, m)) <= 1e-9 * m


def test_evasion_gap_negative_returned():
    assert evasion_gap(3.0, N_CAP, X_C, 100e9) < 0


def test_capital_share():
    assert capital_share_estimate(M_LAB, 0.5) == M_LAB
    assert capital_share_estimate(M_LAB, 0.26) == pytest.approx(60e9, rel=1e-3)
    lo, hi = capital_share_estimate(M_LAB, 0.25), capital_share_estimate(M_LAB, 0.30)
    assert lo == pytest.approx(56.87e9, rel=1e-4) and hi == pytest.approx(73.11e9, rel=1e-4)
    assert lo < 60e9 < hi
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            capital_share_estimate(M_LAB, bad)


def test_mean_labor():
    assert mean_labor(M_LAB, N_LAB) == pytest.approx(28013.1, abs=0.1)
    assert mean_labor(0.0, N_LAB) == 0.0
    assert 3 <= X_C / mean_labor(M_LAB, N_LAB) <= 4
    with pytest.raises(DomainError):
        mean_labor(1.0, 0.0)


def test_snapshot_validation(belgium):
    assert belgium.n_tot == 6.26e6
    assert belgium.gamma == pytest.approx(2.40515, abs=1e-5)
    with pytest.raises(DomainError):
        EconomySnapshot(N_LAB, N_CAP, M_LAB, x_pov=X_C, x_c=X_POV)
    with pytest.raises(InfeasibleEconomyError):
        EconomySnapshot(N_LAB, N_CAP, M_LAB, X_POV, X_C, m_cap=1e9)
    with pytest.raises(DomainError):
        EconomySnapshot(N_LAB, N_CAP, M_LAB, X_POV, X_C, n_tot=7e6)


def test_snapshot_crossover_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        EconomySnapshot(N_LAB, N_CAP, M_LAB, X_POV, X_C)
    with pytest.warns(CrossoverWarning):
        EconomySnapshot(N_LAB, N_CAP, M_LAB, X_POV, 200e3)


def test_capital_strategies_side_by_side(belgium):
    est = capital_estimates(belgium, share=0.26, gamma_fit=2.3)
    assert set(est) == {"declared", "share", "fit"}
    assert est["declared"] == 60e9
    assert est["share"] == pytest.approx(59.94e9, rel=1e-4)
    assert est["fit"] == pytest.approx(74.967e9, rel=1e-4)


def test_resolve_capital_default_share(belgium):
    bare = EconomySnapshot(N_LAB, N_CAP, M_LAB, X_POV, X_C)
    assert resolve_capital(bare).m_cap == pytest.approx(capital_share_estimate(M_LAB, 0.26))
    assert resolve_capital(belgium).m_cap == 60e9
