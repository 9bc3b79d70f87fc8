"""Equilibrium-preserving capital income tax.

A levy ``delta_m`` taken from the Pareto(gamma) capital class so that the
after-tax incomes are again Pareto, with exponent ``eta > gamma``. The
unique monotone map doing this is

    X(x) = x_c**(1 - tau) * x**tau,   tau = (gamma - 1) / (eta - 1),

a weighted geometric mean of the income and the threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .distributions import CapitalModel, LaborModel, boltzmann_density, integrate_finite, integrate_tail
from .economy import EconomySnapshot, capital_from_gamma, gamma_from_capital
from .errors import DomainError, InfeasibleLevyError

# grid used to tabulate the rate curve: x_c .. 10 x_c, geometric
FIGURE_GRID_DECADES = 1.0
FIGURE_GRID_POINTS = 200


def poverty_gap(x_pov: float, x_bar: float, m_lab: float) -> float:
    """Money needed to lift every labor-class income below ``x_pov`` to ``x_pov``.

    Closed form of the integral of ``(x_pov - x) f_lab(x)`` over ``[0, x_pov]``.
    """
    if not x_pov > 0 or not x_bar > 0:
        raise DomainError("x_pov and x_bar must be positive")
    if m_lab < 0:
        raise DomainError("m_lab must be non-negative")
    r = x_pov / x_bar
    # r - (1 - e^-r), computed without cancellation for small r
    if r < 1e-3:
        s = r * r / 2 - r ** 3 / 6 + r ** 4 / 24 - r ** 5 / 120
    else:
        s = r + math.expm1(-r)
    return m_lab * s


def poverty_gap_quadrature(x_pov: float, x_bar: float, m_lab: float) -> float:
    lab = LaborModel(x_bar, m_lab / x_bar)
    return integrate_finite(lambda x: (x_pov - x) * boltzmann_density(x, lab), 0.0, x_pov)


def _check_levy(m_cap, delta_m, n_cap, x_c):
    if delta_m < 0:
        raise DomainError("delta_m must be non-negative; subsidies to the capital class are not modelled")
    max_levy = m_cap - n_cap * x_c
    if not delta_m < max_levy:
        raise InfeasibleLevyError(
            f"levy of {delta_m / 1e9:.4g} GEUR is infeasible: the post-tax capital mass "
            f"cannot support a Pareto tail above x_c; maximum feasible levy is "
            f"{max_levy / 1e9:.4g} GEUR (exclusive)",
            max_delta_m=max_levy)


def post_tax_exponent(m_cap: float, delta_m: float, n_cap: float, x_c: float) -> float:
    _check_levy(m_cap, delta_m, n_cap, x_c)
    return gamma_from_capital(m_cap - delta_m, n_cap, x_c)


def tau_parameter(gamma: float, eta: float) -> float:
    if not gamma > 1:
        raise DomainError("gamma must exceed 1")
    if eta < gamma:
        raise DomainError(f"eta ({eta}) < gamma ({gamma}) would mean a negative tax")
    return (gamma - 1.0) / (eta - 1.0)


def _check_tau(tau):
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")


def _check_above(x, x_c):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < x_c) or np.any(np.isnan(xa)):
        raise DomainError(f"the tax applies to incomes x >= x_c = {x_c} only")
    return xa


def post_tax_income(x, tau: float, x_c: float):
    """After-tax income ``x_c**(1-tau) * x**tau``; scalar in, scalar out."""
    _check_tau(tau)
    xa = _check_above(x, x_c)
    if tau == 1.0:
        out = xa.copy()  # exp(log(.)) would not round-trip exactly
    else:
        out = x_c * np.exp(tau * np.log(xa / x_c))
    return float(out) if np.ndim(x) == 0 else out


def post_tax_derivative(x, tau: float, x_c: float):
    """dX/dx = tau X / x."""
    return tau * post_tax_income(x, tau, x_c) / np.asarray(x, dtype=float)


def tax_rate(x, tau: float, x_c: float):
    """Average tax rate ``1 - (x_c/x)**(1-tau)`` paid on total income ``x``."""
    _check_tau(tau)
    xa = _check_above(x, x_c)
    # + 0.0 turns the -0.0 at x_c into 0.0
    out = -np.expm1((1.0 - tau) * np.log(x_c / xa)) + 0.0
    return float(out) if np.ndim(x) == 0 else out


def revenue(gamma: float, tau: float, n_cap: float, x_c: float) -> float:
    """Total tax raised by the map with parameter ``tau`` from a Pareto(gamma) class.

    Integrating ``X(x) f_cap(x)`` gives the post-tax mass
    ``n_cap x_c (gamma-1)/(gamma-1-tau)``; the revenue is what is left of
    ``M_cap``.
    """
    _check_tau(tau)
    if not gamma > 2:
        raise DomainError("gamma must exceed 2")
    if not gamma - tau > 1:
        raise DomainError("gamma - tau must exceed 1 for the post-tax mass to be finite")
    if n_cap == 0:
        return 0.0
    if tau == 1.0:
        return 0.0
    m_cap = capital_from_gamma(gamma, n_cap, x_c)
    return m_cap - n_cap * x_c * (gamma - 1.0) / (gamma - 1.0 - tau)


def revenue_quadrature(gamma: float, tau: float, n_cap: float, x_c: float) -> float:
    """Revenue by direct quadrature of ``(x - X(x)) f_cap(x)`` over ``[x_c, inf)``."""
    if n_cap == 0:
        return 0.0
    model = CapitalModel(gamma, x_c, n_cap)
    c = (gamma - 1.0) * n_cap / x_c

    def integrand(x):
        r = x / x_c
        # x - X = x (1 - (x_c/x)^(1-tau))
        return x * -math.expm1((1.0 - tau) * math.log(1.0 / r)) * c * r ** (-model.gamma)

    # the integrand falls off like x**(1 - gamma)
    return integrate_tail(integrand, x_c, decay=gamma - 1.0)


def flat_tax_alpha(delta_m: float, m_lab: float) -> float:
    """Scale factor ``alpha`` such that ``x -> alpha x`` raises ``delta_m`` from labor."""
    if delta_m < 0:
        raise DomainError("delta_m must be non-negative")
    if delta_m > m_lab:
        raise DomainError(f"cannot raise {delta_m:.6g} EUR from a labor mass of {m_lab:.6g} EUR")
    if m_lab == 0:
        return 1.0
    return 1.0 - delta_m / m_lab


@dataclass(frozen=True)
class TaxPolicy:
    delta_m: float
    gamma: float
    eta: float
    tau: float
    x_c: float
    n_cap: float
    m_cap: float

    def __post_init__(self):
        if not self.gamma > 2:
            raise DomainError("gamma must exceed 2")
        if self.eta < self.gamma:
            raise DomainError("eta must be at least gamma")
        _check_tau(self.tau)
        if self.delta_m < 0:
            raise DomainError("delta_m must be non-negative")
        if not self.delta_m < self.m_cap - self.n_cap * self.x_c:
            raise InfeasibleLevyError("levy exceeds the capital class capacity",
                                      max_delta_m=self.m_cap - self.n_cap * self.x_c)

    @property
    def pre_tax(self) -> CapitalModel:
        return CapitalModel(self.gamma, self.x_c, self.n_cap)

    @property
    def post_tax(self) -> CapitalModel:
        return CapitalModel(self.eta, self.x_c, self.n_cap)

    @property
    def max_levy(self) -> float:
        return self.m_cap - self.n_cap * self.x_c

    @property
    def average_rate(self) -> float:
        return self.delta_m / self.m_cap

    def rate(self, x):
        return tax_rate(x, self.tau, self.x_c)

    def net(self, x):
        return post_tax_income(x, self.tau, self.x_c)

    def revenue(self) -> float:
        return revenue(self.gamma, self.tau, self.n_cap, self.x_c)


def build_policy(snapshot: EconomySnapshot, delta_m: float) -> TaxPolicy:
    """Policy raising ``delta_m`` EUR from the capital class of ``snapshot``."""
    if snapshot.m_cap is None:
        raise DomainError("snapshot has no capital income; resolve m_cap first")
    gamma = gamma_from_capital(snapshot.m_cap, snapshot.n_cap, snapshot.x_c)
    eta = post_tax_exponent(snapshot.m_cap, delta_m, snapshot.n_cap, snapshot.x_c)
    tau = tau_parameter(gamma, eta)
    return TaxPolicy(delta_m=float(delta_m), gamma=gamma, eta=eta, tau=tau,
                     x_c=snapshot.x_c, n_cap=snapshot.n_cap, m_cap=snapshot.m_cap)


def policy_from_tau(snapshot: EconomySnapshot, tau: float) -> TaxPolicy:
    """Policy fixed by ``tau`` instead of a revenue target."""
    _check_tau(tau)
    if snapshot.m_cap is None:
        raise DomainError("snapshot has no capital income; resolve m_cap first")
    gamma = gamma_from_capital(snapshot.m_cap, snapshot.n_cap, snapshot.x_c)
    eta = 1.0 + (gamma - 1.0) / tau
    delta_m = snapshot.m_cap - capital_from_gamma(eta, snapshot.n_cap, snapshot.x_c)
    return TaxPolicy(delta_m=max(delta_m, 0.0), gamma=gamma, eta=eta, tau=tau,
                     x_c=snapshot.x_c, n_cap=snapshot.n_cap, m_cap=snapshot.m_cap)


class ScheduleRow(NamedTuple):
    income: float
    rate: float
    post_tax_income: float


def schedule_table(policy: TaxPolicy, grid: Sequence[float]) -> list[ScheduleRow]:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1:
        raise DomainError("grid must be one-dimensional")
    if g.size and np.any(np.diff(g) < 0):
        raise DomainError("grid must be sorted in increasing order")
    if g.size == 0:
        return []
    rates = np.atleast_1d(tax_rate(g, policy.tau, policy.x_c))
    nets = np.atleast_1d(post_tax_income(g, policy.tau, policy.x_c))
    return [ScheduleRow(float(x), float(r), float(n)) for x, r, n in zip(g, rates, nets)]


def figure_grid(x_c: float, n: int = FIGURE_GRID_POINTS, decades: float = FIGURE_GRID_DECADES) -> np.ndarray:
    """Geometric grid from ``x_c`` to ``x_c * 10**decades``."""
    return np.geomspace(x_c, x_c * 10.0 ** decades, n)


def geometric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not 0 < lo <= hi or n < 1:
        raise DomainError("grid needs 0 < lo <= hi and n >= 1")
    return np.geomspace(lo, hi, n)


def poverty_levy(snapshot: EconomySnapshot) -> float:
    """The poverty gap of ``snapshot``'s labor class, as a revenue target."""
    return poverty_gap(snapshot.x_pov, snapshot.x_bar, snapshot.m_lab)

