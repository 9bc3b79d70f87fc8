"""Command-line front end.

    eqtax gamma belgium.scn
    eqtax schedule belgium.scn --delta-m-geur 16.4 --out schedule.csv
    eqtax simulate-exchange --model additive --agents 100000 --steps 100000000 --seed 1

Exit status is 0 on success, 1 for domain or validation errors (including
infeasible levies) and 2 for usage errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import economy, ingest, policy, simulator
from .errors import EqtaxError, InfeasibleLevyError

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
REFERENCE_RATE_INCOMES = (120e3, 200e3, 500e3)


@dataclass
class CommandOutcome:
    exit_code: int
    files: list = field(default_factory=list)
    summary: str = ""
    csv: Optional[str] = None


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _grid(text: str):
    try:
        lo, hi, n = text.split(":")
        return float(lo) * 1e3, float(hi) * 1e3, int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi:n with lo, hi in kEUR") from None


def _geur(v: float) -> str:
    return f"{v / 1e9:.4g} GEUR"


def _keur(v: float) -> str:
    return f"{v / 1e3:.6g} kEUR"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eqtax", description="Equilibrium-preserving capital income tax.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("scenario", type=Path, help="scenario file (key = value lines)")
        return sp

    def levy_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--delta-m-geur", type=float, help="revenue to raise, GEUR")
        g.add_argument("--tau", type=float, help="tax map exponent in (0, 1]")
        sp.add_argument("--capital-share", type=float,
                        help="capital share of total income used when m_cap is not declared")

    sp = sub.add_parser("fit", help="fit exponential and Pareto laws to binned incomes")
    sp.add_argument("bins", type=Path)
    sp.add_argument("--x-pov-keur", type=float, required=True)
    sp.add_argument("--x-c-keur", type=float, required=True)
    sp.add_argument("--m-declared-geur", type=float, help="declared capital income, GEUR")
    sp.add_argument("--bootstrap", type=int, default=0, metavar="N",
                    help=f"bootstrap resamples for p-values (e.g. {ingest.BOOTSTRAP_RESAMPLES})")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", type=Path, help="write fitted parameters as CSV")

    sp = scenario_cmd("gamma", "Pareto exponent from the capital income mass")
    sp.add_argument("--capital-share", type=float)

    sp = scenario_cmd("schedule", "post-tax exponent, tau and the rate schedule")
    levy_flags(sp)
    sp.add_argument("--grid", type=_grid, help="lo:hi:n in kEUR, geometric spacing")
    sp.add_argument("--out", type=Path, default=Path("schedule.csv"))
    sp.add_argument("--csv", action="store_true", help="stream the CSV to stdout")

    sp = scenario_cmd("revenue", "revenue check and poverty gap")
    levy_flags(sp)

    sp = scenario_cmd("simulate-tax", "Monte-Carlo check of the tax map")
    levy_flags(sp)
    sp.add_argument("--n", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", type=Path, help="histogram CSV of post-tax incomes")
    sp.add_argument("--csv", action="store_true")

    sp = sub.add_parser("simulate-exchange", help="agent-based exchange equilibria")
    sp.add_argument("--model", choices=("additive", "multiplicative"), required=True)
    sp.add_argument("--agents", type=int, default=100_000)
    sp.add_argument("--steps", type=int, required=True,
                    help="exchange events (additive) or sweeps (multiplicative)")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--x-bar-keur", type=float, default=28.0)
    sp.add_argument("--fraction", type=float, default=1.0)
    sp.add_argument("--gamma-target", type=float, default=2.4)
    sp.add_argument("--volatility", type=float, default=0.2)
    sp.add_argument("--barrier-keur", type=float, default=100.0)
    sp.add_argument("--out", type=Path, help="histogram CSV of final wealth")
    sp.add_argument("--csv", action="store_true")

    sp = scenario_cmd("report", "reproduce the full worked example for a scenario")
    levy_flags(sp)
    return p


def _load(path: Path, share_flag=None):
    scn = ingest.parse_scenario(path.read_text(encoding="utf-8"))
    share = share_flag if share_flag is not None else scn.capital_share
    snap = economy.resolve_capital(scn.snapshot, share=share)
    return scn, snap


def _policy(args, scn, snap, lines):
    """Policy from flags, then scenario, then the poverty gap as default target."""
    tau = getattr(args, "tau", None)
    dm = getattr(args, "delta_m_geur", None)
    if tau is None and dm is None:
        tau, dm_eur = scn.tau_override, scn.delta_m
    else:
        dm_eur = None if dm is None else dm * 1e9
    if tau is not None:
        pol = policy.policy_from_tau(snap, tau)
        lines.append(f"tau (given)        = {tau:.6g}")
        return pol
    if dm_eur is None:
        dm_eur = policy.poverty_levy(snap)
        lines.append(f"delta_m            = poverty gap = {_geur(dm_eur)}")
    else:
        lines.append(f"delta_m (given)    = {_geur(dm_eur)}")
    return policy.build_policy(snap, dm_eur)


def _economy_lines(snap):
    return [
        f"n_lab              = {snap.n_lab:.6g}",
        f"n_cap              = {snap.n_cap:.6g}",
        f"m_lab              = {_geur(snap.m_lab)}",
        f"x_pov              = {_keur(snap.x_pov)}",
        f"x_c                = {_keur(snap.x_c)}",
        f"x_bar              = {_keur(snap.x_bar)}",
        f"x_c / x_bar        = {snap.x_c / snap.x_bar:.4f}",
        f"m_cap              = {_geur(snap.m_cap)}",
    ]


def _policy_lines(pol):
    return [
        f"gamma              = {pol.gamma:.6g}",
        f"eta                = {pol.eta:.6g}",
        f"tau                = {pol.tau:.6g}",
        f"delta_m            = {_geur(pol.delta_m)}",
        f"max feasible levy  = {_geur(pol.max_levy)}",
        f"feasibility margin = {_geur(pol.max_levy - pol.delta_m)}",
        f"average rate       = {pol.average_rate:.4%}",
    ]


def _write(path: Optional[Path], text: str, files: list):
    if path is None:
        return
    path.write_text(text, encoding="utf-8", newline="\n")
    files.append(str(path))


def cmd_fit(args, lines, files):
    table = ingest.parse_bins_csv(args.bins.read_text(encoding="utf-8"))
    x_pov, x_c = args.x_pov_keur * 1e3, args.x_c_keur * 1e3
    if args.bootstrap and args.seed is None:
        raise UsageError("eqtax fit: error: --bootstrap needs an explicit --seed")
    lab = ingest.fit_boltzmann_binned(table, x_pov, x_c, n_boot=args.bootstrap, seed=args.seed)
    cap = ingest.fit_pareto_tail(table, x_c)
    m_cap = economy.capital_from_gamma(cap.gamma_hat, cap.n_tail, x_c)
    lines += [
        f"x_bar_hat          = {_keur(lab.x_bar_hat)}",
        f"n_lab_hat          = {lab.n_lab_hat:.6g}",
        f"labor KS           = {lab.gof:.4g}",
    ]
    if args.bootstrap:
        lines.append(f"labor KS p-value   = {lab.pvalue:.4g}")
    lines += [
        f"gamma_hat          = {cap.gamma_hat:.4f} +- {cap.stderr:.4f}",
        f"n_cap (bins)       = {cap.n_tail:.6g}",
        f"capital KS         = {cap.gof:.4g}",
        f"implied m_cap      = {_geur(m_cap)}",
    ]
    gap = None
    if args.m_declared_geur is not None:
        gap = economy.evasion_gap(cap.gamma_hat, cap.n_tail, x_c, args.m_declared_geur * 1e9)
        lines.append(f"evasion gap        = {_geur(gap)}")
    rows = [("x_bar_hat_keur", lab.x_bar_hat / 1e3), ("n_lab_hat", lab.n_lab_hat),
            ("gamma_hat", cap.gamma_hat), ("gamma_stderr", cap.stderr),
            ("n_cap", cap.n_tail), ("m_cap_implied_geur", m_cap / 1e9)]
    if gap is not None:
        rows.append(("evasion_gap_geur", gap / 1e9))
    _write(args.out, "parameter,value\n" + "".join(f"{k},{v!r}\n" for k, v in rows), files)


def cmd_gamma(args, lines, files):
    scn, snap = _load(args.scenario, args.capital_share)
    est = economy.capital_estimates(scn.snapshot, share=args.capital_share or scn.capital_share)
    lines += _economy_lines(snap)
    for k, v in est.items():
        lines.append(f"m_cap [{k}]".ljust(19) + f"= {_geur(v)}")
    lines.append(f"gamma              = {snap.gamma:.6g}")


def _schedule_grid(args, pol):
    if args.grid is None:
        return policy.figure_grid(pol.x_c)
    return policy.geometric_grid(*args.grid)


def cmd_schedule(args, lines, files):
    scn, snap = _load(args.scenario, args.capital_share)
    pol = _policy(args, scn, snap, lines)
    lines += _policy_lines(pol)
    rows = policy.schedule_table(pol, _schedule_grid(args, pol))
    text = ingest.emit_schedule_csv(rows)
    _write(args.out, text, files)
    for x in REFERENCE_RATE_INCOMES:
        if x >= pol.x_c:
            lines.append(f"T({x / 1e3:g} kEUR)".ljust(19) + f"= {pol.rate(x):.4%}")
    return text if args.csv else None


def cmd_revenue(args, lines, files):
    scn, snap = _load(args.scenario, args.capital_share)
    gap = policy.poverty_levy(snap)
    gap_q = policy.poverty_gap_quadrature(snap.x_pov, snap.x_bar, snap.m_lab)
    lines += [
        f"poverty gap        = {_geur(gap)}",
        f"  by quadrature    = {_geur(gap_q)} (rel. diff {abs(gap_q - gap) / gap:.2e})",
    ]
    pol = _policy(args, scn, snap, lines)
    lines += _policy_lines(pol)
    r = pol.revenue()
    rq = policy.revenue_quadrature(pol.gamma, pol.tau, pol.n_cap, pol.x_c)
    lines += [
        f"revenue            = {_geur(r)}",
        f"  by quadrature    = {_geur(rq)}",
        f"flat labor alpha   = {policy.flat_tax_alpha(pol.delta_m, snap.m_lab):.5f}",
    ]


def _log_edges(lo, values, per_decade=20):
    top = max(float(np.max(values)), lo * 1.0001)
    n = max(1, int(math.ceil(math.log10(top / lo) * per_decade)))
    edges = lo * 10.0 ** (np.arange(n + 1) / per_decade)
    edges[-1] = max(edges[-1], np.nextafter(top, np.inf))
    return edges


def cmd_simulate_tax(args, lines, files):
    scn, snap = _load(args.scenario, args.capital_share)
    pol = _policy(args, scn, snap, lines)
    rep = simulator.simulate_tax_mc(args.n, pol.gamma, pol.x_c, pol.tau, args.seed, n_cap=pol.n_cap)
    lines += _policy_lines(pol)
    lines += [
        f"draws              = {args.n}",
        f"seed               = {args.seed}",
        f"refitted eta       = {rep.fitted_param:.4f} (expected {pol.eta:.4f})",
        f"KS vs Pareto(eta)  = {rep.ks_stat:.4g} (p = {rep.ks_pvalue:.3g})",
        f"tax collected      = {_geur(rep.tax_collected)} (expected {_geur(rep.tax_expected)})",
    ]
    text = ingest.emit_histogram_csv(ingest.histogram_table(rep.final_wealth,
                                                            _log_edges(pol.x_c, rep.final_wealth)))
    _write(args.out, text, files)
    return text if args.csv else None


def cmd_simulate_exchange(args, lines, files):
    if args.model == "additive":
        cfg = simulator.ExchangeConfig(n_agents=args.agents, steps=args.steps,
                                       exchange_fraction=args.fraction, seed=args.seed)
        x_bar = args.x_bar_keur * 1e3
        rep = simulator.simulate_additive_exchange(cfg, x_bar)
        lines += [
            f"agents             = {args.agents}",
            f"events             = {args.steps}",
            f"fitted mean        = {_keur(rep.fitted_param)} (initial {_keur(x_bar)})",
            f"KS vs exponential  = {rep.ks_stat:.4g}",
            f"total wealth       = {_geur(float(rep.final_wealth.sum()))}",
            f"converged          = {rep.converged}",
        ]
        top = float(rep.final_wealth.max())
        edges = np.linspace(0.0, max(top, x_bar) * (1 + 1e-12), 101)
    else:
        drift = simulator.drift_for_exponent(args.gamma_target, args.volatility)
        cfg = simulator.ExchangeConfig(n_agents=args.agents, steps=args.steps, drift=drift,
                                       volatility=args.volatility,
                                       barrier=args.barrier_keur * 1e3, seed=args.seed)
        rep = simulator.simulate_multiplicative(cfg)
        lines += [
            f"agents             = {args.agents}",
            f"sweeps             = {args.steps}",
            f"drift              = {drift:.6g}",
            f"target exponent    = {args.gamma_target:.4f}",
            f"Hill exponent      = {rep.fitted_param:.4f}",
            f"converged          = {rep.converged}",
        ]
        edges = _log_edges(cfg.barrier, rep.final_wealth)
    text = ingest.emit_histogram_csv(ingest.histogram_table(rep.final_wealth, edges))
    _write(args.out, text, files)
    return text if args.csv else None


def cmd_report(args, lines, files):
    scn, snap = _load(args.scenario, args.capital_share)
    lines.append("== economy")
    lines += _economy_lines(snap)
    for k, v in economy.capital_estimates(scn.snapshot, share=args.capital_share or scn.capital_share).items():
        lines.append(f"m_cap [{k}]".ljust(19) + f"= {_geur(v)}")
    lines.append(f"gamma              = {snap.gamma:.6g}")
    lines.append("== levy")
    gap = policy.poverty_levy(snap)
    lines.append(f"poverty gap        = {_geur(gap)}")
    pol = _policy(args, scn, snap, lines)
    lines += _policy_lines(pol)
    lines.append(f"revenue check      = {_geur(pol.revenue())}")
    lines.append(f"flat labor alpha   = {policy.flat_tax_alpha(pol.delta_m, snap.m_lab):.5f}")
    lines.append("== rates")
    for tau in (pol.tau, 0.85):
        rates = ", ".join(f"T({x / 1e3:g}k)={policy.tax_rate(x, tau, pol.x_c):.3%}"
                          for x in REFERENCE_RATE_INCOMES if x >= pol.x_c)
        lines.append(f"tau={tau:.4f}: {rates}")


COMMANDS = {
    "fit": cmd_fit, "gamma": cmd_gamma, "schedule": cmd_schedule, "revenue": cmd_revenue,
    "simulate-tax": cmd_simulate_tax, "simulate-exchange": cmd_simulate_exchange,
    "report": cmd_report,
}


def dispatch(argv) -> CommandOutcome:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return CommandOutcome(EXIT_USAGE, summary=str(exc))
    lines, files = [f"eqtax {args.command}"], []
    try:
        csv_text = COMMANDS[args.command](args, lines, files)
    except UsageError as exc:
        return CommandOutcome(EXIT_USAGE, summary=str(exc))
    except InfeasibleLevyError as exc:
        msg = f"error: {exc}"
        if exc.max_delta_m is not None:
            msg += f"\nmaximum feasible delta_m: {exc.max_delta_m / 1e9:.1f} GEUR"
        return CommandOutcome(EXIT_DOMAIN, summary=msg)
    except (EqtaxError, OSError) as exc:
        return CommandOutcome(EXIT_DOMAIN, summary=f"error: {exc}")
    return CommandOutcome(EXIT_OK, files=files, summary="\n".join(lines), csv=csv_text)


def main(argv=None) -> int:
    out = dispatch(sys.argv[1:] if argv is None else argv)
    if out.csv is not None:
        sys.stdout.write(out.csv)
        print(out.summary, file=sys.stderr)
    elif out.exit_code == EXIT_OK:
        print(out.summary)
        for f in out.files:
            print(f"wrote {f}")
    else:
        print(out.summary, file=sys.stderr)
    return out.exit_code


if __name__ == "__main__":
    sys.exit(main())
