"""Equilibrium income densities: Boltzmann-Gibbs (labor) and Pareto (capital).

Densities are *person* densities: they integrate to the class head-count, not
to one. All money is in EUR.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError


@dataclass(frozen=True)
class LaborModel:
    """Exponential income law of the additive (wage) class.

    Parameters
    ----------
    x_bar : float
        Mean income, EUR. Plays the role of a temperature.
    n_lab : float
        Head-count the density integrates to.
    """

    x_bar: float
    n_lab: float = 1.0

    def __post_init__(self):
        if not self.x_bar > 0:
            raise DomainError(f"x_bar must be positive, got {self.x_bar}")
        if not self.n_lab >= 0:
            raise DomainError(f"n_lab must be non-negative, got {self.n_lab}")

    @property
    def total_income(self) -> float:
        return self.n_lab * self.x_bar

    def density(self, x):
        return boltzmann_density(x, self)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return -np.expm1(-x / self.x_bar)

    def scaled(self, alpha: float) -> "LaborModel":
        """Law of ``alpha * x`` when ``x`` follows this model."""
        return LaborModel(self.x_bar * alpha, self.n_lab)


@dataclass(frozen=True)
class CapitalModel:
    """Pareto income law of the multiplicative (capital) class above ``x_c``."""

    gamma: float
    x_c: float
    n_cap: float = 1.0

    def __post_init__(self):
        if not self.gamma > 2:
            raise DomainError(
                f"gamma must exceed 2 for a finite capital mass, got {self.gamma}")
        if not self.x_c > 0:
            raise DomainError(f"x_c must be positive, got {self.x_c}")
        if not self.n_cap >= 0:
            raise DomainError(f"n_cap must be non-negative, got {self.n_cap}")

    @property
    def total_income(self) -> float:
        return self.n_cap * self.x_c * (self.gamma - 1) / (self.gamma - 2)

    def density(self, x):
        return pareto_density(x, self)

    def cdf(self, x):
        return pareto_tail_stats(self).cdf(x)


@dataclass(frozen=True)
class TailStats:
    cdf: Callable
    quantile: Callable
    total_income: float
    survival: Callable = None
    inverse_survival: Callable = None


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


def boltzmann_density(x, m: LaborModel):
    """Person density ``(n_lab / x_bar) * exp(-x / x_bar)`` for ``x >= 0``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("labor income density is defined for x >= 0 only")
    out = (m.n_lab / m.x_bar) * np.exp(-xa / m.x_bar)
    return _scalar_or_array(out, x)


def pareto_density(x, m: CapitalModel):
    """Person density ``((gamma-1) n_cap / x_c) (x/x_c)^-gamma`` for ``x >= x_c``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < m.x_c) or np.any(np.isnan(xa)):
        raise DomainError(f"capital income density is defined for x >= x_c = {m.x_c}")
    out = ((m.gamma - 1) * m.n_cap / m.x_c) * (xa / m.x_c) ** (-m.gamma)
    return _scalar_or_array(out, x)


def pareto_tail_stats(m: CapitalModel) -> TailStats:
    """CDF, quantile function and total income of a capital model.

    The CDF is the normalized one (reaches 1), irrespective of ``n_cap``.
    Far in the tail the CDF rounds to 1 in double precision; ``survival`` and
    ``inverse_survival`` keep full relative precision there.
    """
    g, xc = m.gamma, m.x_c

    def cdf(x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa < xc):
            raise DomainError(f"cdf is defined for x >= x_c = {xc}")
        # 1 - (x/xc)^(1-g), written to keep precision near x_c
        out = -np.expm1((1.0 - g) * np.log(xa / xc))
        return _scalar_or_array(out, x)

    def quantile(q):
        qa = np.asarray(q, dtype=float)
        if np.any(qa < 0) or np.any(qa >= 1) or np.any(np.isnan(qa)):
            raise DomainError("quantile level must lie in [0, 1)")
        out = xc * np.exp(np.log1p(-qa) / (1.0 - g))
        return _scalar_or_array(out, q)

    def survival(x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa < xc):
            raise DomainError(f"survival is defined for x >= x_c = {xc}")
        return _scalar_or_array(np.exp((1.0 - g) * np.log(xa / xc)), x)

    def inverse_survival(p):
        pa = np.asarray(p, dtype=float)
        if np.any(pa <= 0) or np.any(pa > 1) or np.any(np.isnan(pa)):
            raise DomainError("survival level must lie in (0, 1]")
        return _scalar_or_array(xc * np.exp(np.log(pa) / (1.0 - g)), p)

    return TailStats(cdf=cdf, quantile=quantile, total_income=m.total_income,
                     survival=survival, inverse_survival=inverse_survival)


def _rng(seed):
    return np.random.default_rng(seed)


def boltzmann_sample(n: int, m: LaborModel, seed: int) -> np.ndarray:
    """Draw ``n`` incomes by inverse-CDF from the normalized exponential."""
    if n < 0:
        raise DomainError("sample size must be non-negative")
    u = _rng(seed).random(n)
    return -m.x_bar * np.log1p(-u)


def pareto_sample(n: int, m: CapitalModel, seed: int) -> np.ndarray:
    """Draw ``n`` incomes by inverse-CDF from the normalized Pareto law.

    ``1 - u`` lies in ``(0, 1]`` so every draw is finite and ``>= x_c``.
    """
    if n < 0:
        raise DomainError("sample size must be non-negative")
    u = _rng(seed).random(n)
    return m.x_c * np.exp(np.log1p(-u) / (1.0 - m.gamma))


# -- quadrature -------------------------------------------------------------

QUAD_EPSREL = 1e-12


def _quad(func, a, b):
    # the target sits near double-precision roundoff; QUADPACK then warns
    # about its extrapolation table although the result is converged
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, a, b, epsabs=0.0, epsrel=QUAD_EPSREL, limit=500)
    return val


def integrate_finite(func, a: float, b: float) -> float:
    """Adaptive quadrature of ``func`` over ``[a, b]``."""
    return _quad(func, a, b)


def integrate_tail(func, x_c: float, decay: float = 2.0) -> float:
    """Integrate ``func`` over ``[x_c, inf)`` on a finite interval.

    Substitutes ``u = (x_c / x)**(decay - 1)``, mapping the half-line onto
    ``(0, 1]``. The default ``decay = 2`` is plain ``u = x_c / x``. When
    ``func`` falls off like ``x**-decay`` the transformed integrand tends to a
    constant at ``u = 0`` instead of an integrable singularity, which keeps
    the quadrature at full precision for heavy tails.
    """
    if not decay > 1:
        raise DomainError("decay exponent must exceed 1")
    k = 1.0 / (decay - 1.0)

    def g(u):
        # QUADPACK never evaluates the endpoint u = 0
        if u == 0.0:
            return 0.0
        return func(x_c * u ** -k) * x_c * k * u ** (-k - 1.0)

    return _quad(g, 0.0, 1.0)


def ks_distance(sample, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic of ``sample`` against ``cdf``."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    if n == 0:
        return math.nan
    f = np.asarray(cdf(s), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
