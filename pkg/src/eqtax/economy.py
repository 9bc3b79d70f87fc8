"""Aggregate accounting for a two-class economy.

Links the capital income mass to the Pareto exponent, estimates capital
income from a capital share, and measures the gap between fit-implied and
declared capital income.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

from .errors import DomainError, InfeasibleEconomyError

DEFAULT_CAPITAL_SHARE = 0.26
# empirical band for x_c / x_bar
CROSSOVER_RATIO_BAND = (3.0, 4.0)
# tolerance on n_lab + n_cap == n_tot; published head-counts are rounded
HEADCOUNT_RTOL = 1e-3


class CrossoverWarning(UserWarning):
    """x_c is outside three to four times the mean labor income."""


def gamma_from_capital(m_cap: float, n_cap: float, x_c: float) -> float:
    """Pareto exponent implied by a capital income mass.

    Inverts ``m_cap = n_cap x_c (gamma-1)/(gamma-2)``.

    Raises
    ------
    InfeasibleEconomyError
        If ``m_cap <= n_cap * x_c``: every capital earner has at least ``x_c``,
        so a smaller mass cannot come from a tail with finite mean.
    """
    floor = n_cap * x_c
    if not floor > 0:
        raise DomainError("n_cap and x_c must be positive")
    if not m_cap > floor:
        raise InfeasibleEconomyError(
            f"capital income {m_cap:.6g} EUR must exceed n_cap * x_c = {floor:.6g} EUR "
            "for a Pareto exponent above 2")
    return (2.0 * m_cap - floor) / (m_cap - floor)


def capital_from_gamma(gamma: float, n_cap: float, x_c: float) -> float:
    if not gamma > 2:
        raise DomainError(f"gamma must exceed 2, got {gamma}")
    return n_cap * x_c * (gamma - 1.0) / (gamma - 2.0)


def evasion_gap(gamma_fit: float, n_cap: float, x_c: float, m_declared: float) -> float:
    """Fit-implied capital income minus declared capital income (EUR).

    Positive values point at undeclared income. Negative values are returned
    unchanged; they indicate over-declaration or a poor fit.
    """
    if m_declared < 0:
        raise DomainError("declared income must be non-negative")
    return capital_from_gamma(gamma_fit, n_cap, x_c) - m_declared


def capital_share_estimate(m_lab: float, share: float) -> float:
    """Capital income such that ``m_cap / (m_cap + m_lab) == share``."""
    if not 0.0 < share < 1.0:
        raise DomainError(f"capital share must lie in (0, 1), got {share}")
    return m_lab * share / (1.0 - share)


def mean_labor(m_lab: float, n_lab: float) -> float:
    if not n_lab > 0:
        raise DomainError("n_lab must be positive")
    return m_lab / n_lab


@dataclass(frozen=True)
class EconomySnapshot:
    """Class totals and thresholds of one economy at one date.

    ``m_cap`` may be ``None`` until resolved by one of the strategies in
    :func:`capital_estimates`.
    """

    n_lab: float
    n_cap: float
    m_lab: float
    x_pov: float
    x_c: float
    m_cap: Optional[float] = None
    n_tot: Optional[float] = None

    def __post_init__(self):
        if self.n_lab < 0 or self.n_cap < 0:
            raise DomainError("head-counts must be non-negative")
        if self.m_lab < 0:
            raise DomainError("m_lab must be non-negative")
        if not 0 < self.x_pov < self.x_c:
            raise DomainError(
                f"thresholds must satisfy 0 < x_pov < x_c, got x_pov={self.x_pov}, x_c={self.x_c}")
        if self.n_tot is None:
            object.__setattr__(self, "n_tot", self.n_lab + self.n_cap)
        elif not math.isclose(self.n_lab + self.n_cap, self.n_tot, rel_tol=HEADCOUNT_RTOL):
            raise DomainError(
                f"n_lab + n_cap = {self.n_lab + self.n_cap:.6g} does not match n_tot = {self.n_tot:.6g}")
        if self.m_cap is not None and not self.m_cap > self.n_cap * self.x_c:
            raise InfeasibleEconomyError(
                f"m_cap = {self.m_cap:.6g} EUR must exceed n_cap * x_c = {self.n_cap * self.x_c:.6g} EUR")
        if self.n_lab > 0:
            ratio = self.x_c / self.x_bar
            lo, hi = CROSSOVER_RATIO_BAND
            if not lo <= ratio <= hi:
                warnings.warn(
                    f"x_c is {ratio:.2f} times the mean labor income; "
                    f"empirically the crossover sits at {lo:g}-{hi:g} times",
                    CrossoverWarning, stacklevel=3)

    @property
    def x_bar(self) -> float:
        return mean_labor(self.m_lab, self.n_lab)

    @property
    def gamma(self) -> float:
        if self.m_cap is None:
            raise DomainError("m_cap is unresolved; see capital_estimates()")
        return gamma_from_capital(self.m_cap, self.n_cap, self.x_c)

    @property
    def max_levy(self) -> float:
        """Supremum of the revenue the capital class can yield (EUR)."""
        if self.m_cap is None:
            raise DomainError("m_cap is unresolved")
        return self.m_cap - self.n_cap * self.x_c

    def with_capital(self, m_cap: float) -> "EconomySnapshot":
        return replace(self, m_cap=m_cap)


def capital_estimates(snapshot: EconomySnapshot, share: Optional[float] = None,
                      gamma_fit: Optional[float] = None) -> dict:
    """Capital income under each available strategy, keyed by strategy name.

    ``declared`` is the snapshot's own ``m_cap``; ``share`` uses the capital
    share of total income; ``fit`` inverts a fitted exponent. Strategies whose
    inputs are missing are left out. ``share`` defaults to
    :data:`DEFAULT_CAPITAL_SHARE` when neither other route is available.
    """
    out = {}
    if snapshot.m_cap is not None:
        out["declared"] = snapshot.m_cap
    if share is None and snapshot.m_cap is None and gamma_fit is None:
        share = DEFAULT_CAPITAL_SHARE
    if share is not None:
        out["share"] = capital_share_estimate(snapshot.m_lab, share)
    if gamma_fit is not None:
        out["fit"] = capital_from_gamma(gamma_fit, snapshot.n_cap, snapshot.x_c)
    return out


def resolve_capital(snapshot: EconomySnapshot, share: Optional[float] = None,
                    gamma_fit: Optional[float] = None) -> EconomySnapshot:
    """Fill ``m_cap``: declared value first, then share, then fit."""
    if snapshot.m_cap is not None:
        return snapshot
    est = capital_estimates(snapshot, share=share, gamma_fit=gamma_fit)
    m_cap = est.get("share", est.get("fit"))
    return snapshot.with_capital(m_cap)


def belgium_2014() -> EconomySnapshot:
    """Belgian 2014 personal income tax aggregates with M_cap = 60 GEUR."""
    return EconomySnapshot(n_lab=6.09e6, n_cap=1.73e5, m_lab=170.6e9,
                           x_pov=13.25e3, x_c=100e3, m_cap=60e9, n_tot=6.26e6)
