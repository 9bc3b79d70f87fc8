"""File formats and parameter estimation from data.

External files carry money in kEUR (GEUR for aggregates); everything in
memory is EUR. Unit conversion goes through :class:`decimal.Decimal` so that
emit/parse round trips are exact.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

from .distributions import CapitalModel, LaborModel, pareto_sample
from .economy import EconomySnapshot
from .errors import DomainError, EstimationError, ParseError

BINS_HEADER = ("income_keur_lo", "income_keur_hi", "count")
SCHEDULE_HEADER = ("income_keur", "tax_rate", "post_tax_keur")
HISTOGRAM_HEADER = ("wealth_keur_lo", "wealth_keur_hi", "count")

MIN_TAIL_OBSERVATIONS = 50
GAMMA_SEARCH = (2.0, 10.0)
GOLDEN_TOL = 1e-8
BOOTSTRAP_RESAMPLES = 200


# -- units -------------------------------------------------------------------

def keur_to_eur(text: str) -> float:
    return float(Decimal(text).scaleb(3))


def geur_to_eur(text: str) -> float:
    return float(Decimal(text).scaleb(9))


def eur_to_keur(value: float) -> str:
    """Exact decimal rendering of ``value / 1000``."""
    d = Decimal(repr(float(value))).scaleb(-3)
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def _fmt_count(c: float) -> str:
    c = float(c)
    return str(int(c)) if c.is_integer() and abs(c) < 2 ** 53 else repr(c)


# -- bins ----------------------------------------------------------------------

class Bin(NamedTuple):
    lo: float
    hi: float
    count: float


@dataclass(frozen=True)
class BinTable:
    """Binned income histogram, sorted and non-overlapping, EUR edges."""

    rows: tuple = ()

    def __post_init__(self):
        rows = tuple(Bin(float(lo), float(hi), float(c)) for lo, hi, c in self.rows)
        for k, b in enumerate(rows):
            if not b.lo < b.hi:
                raise DomainError(f"bin {k}: lo must be below hi")
            if not b.count >= 0:
                raise DomainError(f"bin {k}: counts must be non-negative")
            if k and b.lo < rows[k - 1].hi:
                raise DomainError(f"bin {k}: bins must be sorted and non-overlapping")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_arrays(cls, edges, counts) -> "BinTable":
        edges = np.asarray(edges, dtype=float)
        counts = np.asarray(counts, dtype=float)
        if edges.size != counts.size + 1:
            raise DomainError("need one more edge than counts")
        return cls(tuple(zip(edges[:-1], edges[1:], counts)))

    @property
    def contiguous(self) -> bool:
        return all(a.hi == b.lo for a, b in zip(self.rows, self.rows[1:]))

    @property
    def lo(self) -> np.ndarray:
        return np.array([b.lo for b in self.rows])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b.hi for b in self.rows])

    @property
    def counts(self) -> np.ndarray:
        return np.array([b.count for b in self.rows])

    def within(self, a: float, b: float) -> "BinTable":
        """Bins lying entirely inside ``[a, b]``."""
        return BinTable(tuple(r for r in self.rows if r.lo >= a and r.hi <= b))

    def __len__(self):
        return len(self.rows)


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_bins_csv(text: str) -> BinTable:
    lines = _data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("missing header " + ",".join(BINS_HEADER)) from None
    if tuple(h.strip() for h in header.split(",")) != BINS_HEADER:
        raise ParseError("expected header " + ",".join(BINS_HEADER), line=lineno, column=1)
    rows = []
    for lineno, line in lines:
        fields = next(csv.reader([line]))
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", line=lineno)
        vals = []
        for col, f in enumerate(fields, start=1):
            try:
                d = Decimal(f.strip())
            except InvalidOperation:
                raise ParseError(f"not a number: {f!r}", line=lineno, column=col) from None
            if not d.is_finite():
                raise ParseError(f"not a finite number: {f!r}", line=lineno, column=col)
            vals.append(d)
        lo, hi, count = vals
        if not lo < hi:
            raise ParseError("lower edge must be below upper edge", line=lineno)
        if count < 0:
            raise ParseError("count must be non-negative", line=lineno, column=3)
        if rows and float(lo.scaleb(3)) < rows[-1].hi:
            raise ParseError("bins must be sorted and non-overlapping", line=lineno)
        rows.append(Bin(float(lo.scaleb(3)), float(hi.scaleb(3)), float(count)))
    return BinTable(tuple(rows))


def emit_bins_csv(table: BinTable, header: Sequence[str] = BINS_HEADER) -> str:
    out = [",".join(header)]
    for b in table.rows:
        out.append(f"{eur_to_keur(b.lo)},{eur_to_keur(b.hi)},{_fmt_count(b.count)}")
    return "\n".join(out) + "\n"


def histogram_table(values, edges) -> BinTable:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=edges)
    return BinTable.from_arrays(edges, counts)


def emit_histogram_csv(table: BinTable) -> str:
    return emit_bins_csv(table, HISTOGRAM_HEADER)


def labor_bins(model: LaborModel, edges) -> BinTable:
    """Expected (real-valued) head-counts per bin under a labor model."""
    edges = np.asarray(edges, dtype=float)
    counts = model.n_lab * (np.exp(-edges[:-1] / model.x_bar) - np.exp(-edges[1:] / model.x_bar))
    return BinTable.from_arrays(edges, counts)


def capital_bins(model: CapitalModel, edges) -> BinTable:
    edges = np.asarray(edges, dtype=float)
    surv = np.exp((1.0 - model.gamma) * np.log(edges / model.x_c))
    return BinTable.from_arrays(edges, model.n_cap * (surv[:-1] - surv[1:]))


def sample_bins(values, width: float, start: float = 0.0, drop_empty: bool = True) -> BinTable:
    """Bin raw incomes on a regular grid of ``width`` starting at ``start``.

    Empty bins are dropped by default; the multinomial fits only use
    occupied bins and the span of the table, so nothing is lost.
    """
    v = np.asarray(values, dtype=float)
    idx = np.floor((v - start) / width).astype(np.int64)
    if np.any(idx < 0):
        raise DomainError("values below the first bin edge")
    uniq, counts = np.unique(idx, return_counts=True)
    if not drop_empty:
        full = np.zeros(int(uniq[-1]) + 1 if uniq.size else 0)
        full[uniq] = counts
        uniq, counts = np.arange(full.size), full
    lo = start + uniq * width
    return BinTable(tuple(zip(lo, lo + width, counts.astype(float))))


# -- scenario --------------------------------------------------------------

SCENARIO_KEYS = ("n_tot", "n_lab", "n_cap", "m_lab_geur", "m_cap_geur", "capital_share",
                 "x_pov_keur", "x_c_keur", "delta_m_geur", "tau", "seed")
REQUIRED_KEYS = ("n_lab", "n_cap", "m_lab_geur", "x_pov_keur", "x_c_keur")


@dataclass(frozen=True)
class Scenario:
    snapshot: EconomySnapshot
    delta_m: Optional[float] = None
    capital_share: Optional[float] = None
    tau_override: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.delta_m is not None and self.tau_override is not None:
            raise DomainError("set either delta_m or tau, not both")
        if self.capital_share is not None and not 0 < self.capital_share < 1:
            raise DomainError("capital_share must lie in (0, 1)")


def parse_scenario(text: str) -> Scenario:
    """Parse ``key = value`` lines into a :class:`Scenario`.

    Unknown and duplicate keys are errors. Money keys carry their unit in the
    name (``_geur`` or ``_keur``).
    """
    values: dict[str, tuple[int, str]] = {}
    for lineno, line in _data_lines(text):
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno, column=1)
        key, _, val = line.partition("=")
        key, val = key.strip(), val.split("#", 1)[0].strip()
        if key not in SCENARIO_KEYS:
            raise ParseError(f"unknown key {key!r}; allowed: {', '.join(SCENARIO_KEYS)}",
                             line=lineno, column=1)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno, column=1)
        if not val:
            raise ParseError(f"missing value for {key!r}", line=lineno, column=line.index("=") + 2)
        values[key] = (lineno, val)

    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ParseError("missing required keys: " + ", ".join(missing))
    if "m_cap_geur" in values and "capital_share" in values:
        raise ParseError("m_cap_geur and capital_share are mutually exclusive",
                         line=values["capital_share"][0])
    if "delta_m_geur" in values and "tau" in values:
        raise ParseError("delta_m_geur and tau are mutually exclusive", line=values["tau"][0])

    def num(key, conv=float):
        if key not in values:
            return None
        lineno, text_val = values[key]
        try:
            if conv is int:
                return int(text_val)
            d = Decimal(text_val)
            if not d.is_finite():
                raise InvalidOperation
            return conv(d)
        except (InvalidOperation, ValueError):
            raise ParseError(f"bad value for {key!r}: {text_val!r}", line=lineno,
                             column=len(key) + 1) from None

    try:
        snap = EconomySnapshot(
            n_lab=num("n_lab"), n_cap=num("n_cap"),
            m_lab=num("m_lab_geur", lambda d: float(d.scaleb(9))),
            x_pov=num("x_pov_keur", lambda d: float(d.scaleb(3))),
            x_c=num("x_c_keur", lambda d: float(d.scaleb(3))),
            m_cap=num("m_cap_geur", lambda d: float(d.scaleb(9))),
            n_tot=num("n_tot"))
        return Scenario(snapshot=snap,
                        delta_m=num("delta_m_geur", lambda d: float(d.scaleb(9))),
                        capital_share=num("capital_share"),
                        tau_override=num("tau"),
                        seed=num("seed", int))
    except ParseError:
        raise
    except DomainError as exc:
        raise ParseError(str(exc)) from exc


# -- estimation --------------------------------------------------------------

@dataclass(frozen=True)
class BoltzmannFit:
    x_bar_hat: float
    n_lab_hat: float
    gof: float
    pvalue: float = math.nan


@dataclass(frozen=True)
class ParetoFit:
    gamma_hat: float
    stderr: float
    gof: float
    n_tail: float
    pvalue: float = math.nan


def _expo_conditional_mean_offset(a, b, beta):
    """E[x | a < x < b] - a for an exponential with rate ``beta``."""
    w = b - a
    t = beta * w
    if abs(t) < 1e-8:
        return w / 2.0 - t * w / 12.0
    if t > 700.0:
        return 1.0 / beta
    return 1.0 / beta - w / math.expm1(t)


def _expo_bin_probs(lo, hi, beta):
    """Bin probabilities of the exponential truncated to ``[lo[0], hi[-1]]``."""
    a0 = lo[0]
    p = np.exp(-beta * (lo - a0)) - np.exp(-beta * (hi - a0))
    return p / p.sum()


def fit_boltzmann_binned(bins: BinTable, x_pov: float, x_c: float, *,
                         n_boot: int = 0, seed: Optional[int] = None) -> BoltzmannFit:
    """Maximum-likelihood exponential fit to the bins lying in ``[x_pov, x_c]``.

    The likelihood is multinomial over the bin probabilities of an
    exponential truncated to the span of the selected bins. Its score
    vanishes where the count-weighted average of the within-bin conditional
    means equals the conditional mean over the whole span; the rate solving
    this is found by bracketed root finding.

    ``n_lab_hat`` extrapolates the counts in the span to ``[0, inf)``.
    ``gof`` is the KS distance evaluated on bin edges; with ``n_boot > 0`` a
    parametric-bootstrap p-value is attached.
    """
    sel = bins.within(x_pov, x_c)
    lo, hi, counts = sel.lo, sel.hi, sel.counts
    if np.count_nonzero(counts) < 3:
        raise EstimationError("need at least 3 bins with positive counts inside [x_pov, x_c]")
    beta, n_lab_hat, ks = _fit_expo_bins(lo, hi, counts)

    pvalue = math.nan
    if n_boot:
        if seed is None:
            raise EstimationError("bootstrap needs an explicit seed")
        probs = _expo_bin_probs(lo, hi, beta)
        total = int(round(counts.sum()))
        exceed = 0
        for child in np.random.SeedSequence(seed).spawn(n_boot):
            resample = np.random.default_rng(child).multinomial(total, probs).astype(float)
            try:
                ks_b = _fit_expo_bins(lo, hi, resample)[2]
            except EstimationError:
                ks_b = math.inf
            exceed += ks_b >= ks
        pvalue = (exceed + 1) / (n_boot + 1)
    return BoltzmannFit(x_bar_hat=1.0 / beta, n_lab_hat=n_lab_hat, gof=ks, pvalue=pvalue)


def _fit_expo_bins(lo, hi, counts):
    if np.count_nonzero(counts) < 3:
        raise EstimationError("need at least 3 bins with positive counts")
    A, B = lo[0], hi[-1]
    total = counts.sum()
    span = B - A
    pos = counts > 0
    c, off, w = counts[pos], (lo - A)[pos], (hi - lo)[pos]

    def score(beta):
        within = sum(ck * (ok + _expo_conditional_mean_offset(0.0, wk, beta))
                     for ck, ok, wk in zip(c, off, w))
        return within / total - _expo_conditional_mean_offset(A, B, beta)

    # negative as beta -> 0 when the counts decay, positive as beta -> inf
    s_lo, s_hi = 1e-9, 50.0
    if score(s_lo / span) >= 0:
        raise EstimationError("binned counts do not decay; no exponential fit with positive mean")
    while score(s_hi / span) <= 0:
        s_hi *= 2.0
        if s_hi > 1e7:
            raise EstimationError("degenerate histogram: mass piled at the lower edge")
    beta = optimize.brentq(score, s_lo / span, s_hi / span, xtol=1e-300, rtol=1e-12, maxiter=500)

    # mass of the selected bins under the untruncated law
    mass = float(np.sum(np.exp(-beta * lo) - np.exp(-beta * hi)))
    if not mass > 0:
        raise EstimationError("fitted law puts no mass on the data range")
    model = np.concatenate([[0.0], np.cumsum(_expo_bin_probs(lo, hi, beta))])
    emp = np.concatenate([[0.0], np.cumsum(counts)]) / total
    ks = float(np.max(np.abs(emp - model)))
    return beta, total / mass, ks


def hill_fit(data, x_c: float) -> ParetoFit:
    """Hill estimator ``1 + n / sum(log(x / x_c))`` with stderr ``(g - 1)/sqrt(n)``."""
    x = np.asarray(data, dtype=float)
    if np.any(x < x_c):
        raise DomainError(f"observations below x_c = {x_c}; select the tail first")
    n = x.size
    if n < MIN_TAIL_OBSERVATIONS:
        raise EstimationError(f"need at least {MIN_TAIL_OBSERVATIONS} observations above x_c, got {n}")
    s = float(np.log(x / x_c).sum())
    if s == 0:
        raise EstimationError("all observations equal x_c; exponent is unbounded")
    g = 1.0 + n / s
    xs = np.sort(x)
    cdf = -np.expm1((1.0 - g) * np.log(xs / x_c))
    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    return ParetoFit(gamma_hat=g, stderr=(g - 1.0) / math.sqrt(n), gof=ks, n_tail=float(n))


def golden_section_max(f, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    """Maximizer of a unimodal ``f`` on ``[a, b]``, located to within ``tol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _pareto_survival(v, gamma, x_c):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    fin = np.isfinite(v)
    out[fin] = np.exp((1.0 - gamma) * np.log(v[fin] / x_c))
    return out


def fit_pareto_binned(bins: BinTable, x_c: float) -> ParetoFit:
    """Multinomial maximum likelihood for the exponent from bins above ``x_c``.

    Bin probabilities are conditioned on the span of the bins, so a finite
    last edge is handled. ``stderr`` comes from the observed information.
    """
    bins = BinTable(tuple(r for r in bins.rows if r.lo >= x_c))
    counts = bins.counts if len(bins) else np.zeros(0)
    total = float(counts.sum())
    if total < MIN_TAIL_OBSERVATIONS:
        raise EstimationError(f"need at least {MIN_TAIL_OBSERVATIONS} observations above x_c")
    lo, hi = bins.lo, bins.hi
    pos = counts > 0

    def loglik(g):
        s_lo, s_hi = _pareto_survival(lo, g, x_c), _pareto_survival(hi, g, x_c)
        span = s_lo[0] - s_hi[-1]
        return float(np.sum(counts[pos] * np.log((s_lo - s_hi)[pos] / span)))

    g_hat = golden_section_max(loglik, GAMMA_SEARCH[0], GAMMA_SEARCH[1])
    h = 1e-4
    d2 = (loglik(g_hat + h) - 2.0 * loglik(g_hat) + loglik(g_hat - h)) / (h * h)
    stderr = 1.0 / math.sqrt(-d2) if d2 < 0 else math.inf

    surv = _pareto_survival(np.append(lo, hi[-1]), g_hat, x_c)
    model = (surv[0] - surv) / (surv[0] - surv[-1])
    emp = np.concatenate([[0.0], np.cumsum(counts)]) / total
    ks = float(np.max(np.abs(emp - model)))
    return ParetoFit(gamma_hat=g_hat, stderr=stderr, gof=ks, n_tail=total)


def fit_pareto_tail(data, x_c: float, *, n_boot: int = 0, seed: Optional[int] = None) -> ParetoFit:
    """Fit the Pareto exponent above ``x_c`` from raw incomes or a :class:`BinTable`.

    Raw data use the Hill estimator; binned data use multinomial likelihood
    maximized by golden-section search on ``gamma`` in ``(2, 10]``. With
    ``n_boot > 0`` a parametric-bootstrap p-value of the KS statistic is
    attached (raw data only).
    """
    if isinstance(data, BinTable):
        return fit_pareto_binned(data, x_c)
    fit = hill_fit(data, x_c)
    if not n_boot:
        return fit
    if seed is None:
        raise EstimationError("bootstrap needs an explicit seed")
    n = int(fit.n_tail)
    model = CapitalModel(max(fit.gamma_hat, 2.0 + 1e-12), x_c)
    exceed = 0
    for child in np.random.SeedSequence(seed).spawn(n_boot):
        exceed += hill_fit(pareto_sample(n, model, child), x_c).gof >= fit.gof
    return ParetoFit(fit.gamma_hat, fit.stderr, fit.gof, fit.n_tail,
                     pvalue=(exceed + 1) / (n_boot + 1))


# -- schedule output -------------------------------------------------------

def emit_schedule_csv(rows: Iterable) -> str:
    """Schedule rows as CSV: income in kEUR, rate with six decimals, net kEUR."""
    out = [",".join(SCHEDULE_HEADER)]
    for income, rate, net in rows:
        out.append(f"{income / 1e3:.6g},{rate:.6f},{net / 1e3:.3f}")
    return "\n".join(out) + "\n"


def parse_schedule_csv(text: str) -> list[tuple[float, float, float]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != SCHEDULE_HEADER:
        raise ParseError("expected header " + ",".join(SCHEDULE_HEADER), line=1)
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        try:
            inc, rate, net = (float(v) for v in rec)
        except ValueError:
            raise ParseError("malformed schedule row", line=lineno) from None
        rows.append((inc * 1e3, rate, net * 1e3))
    return rows
