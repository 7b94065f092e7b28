"""Command-line front end.

Subcommands write CSV to stdout (or ``--output``).  Probabilities are printed
with six decimals, rates and spectral efficiencies in %.6e.

Exit codes: 0 ok, 1 comparison tolerance breached, 2 usage or configuration
error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys

from . import __version__
from .config import BACKHAUL, LOS, MBS, NLOS, SBS, ConfigError, NetworkConfig, Tier, TierLink, \
    env_overrides, parse_config_text
from .coverage import coverage_curve, coverage_table, db_to_linear
from .metrics import PartitionPoint, apt, ase, ase_interference_limited, ase_noise_limited
from .montecarlo import SimSpec, run_drops
from .quadrature import NonConvergenceError

EXIT_OK, EXIT_BREACH, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3

ALL_LINKS = [TierLink(t, s) for t in (SBS, MBS, BACKHAUL) for s in (LOS, NLOS)]


class UsageError(Exception):
    pass


def prob(x):
    return f"{x:.6f}"


def rate(x):
    return f"{x:.6e}"


# ---------------------------------------------------------------------------
# argument helpers


def _float_list(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def _tier_list(text):
    try:
        return [Tier.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def load_config(path=None, overrides=(), env=None):
    """Defaults, then the config file, then ``IABCACHE_*`` variables, then ``--set`` pairs."""
    values = {}
    if path:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as err:
            raise ConfigError("--config", f"cannot read {path}: {err.strerror}") from None
    values.update(env_overrides(os.environ if env is None else env))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "expected key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        values[key] = raw
    return NetworkConfig.from_mapping(values)


def _point(args, cfg):
    C = cfg.C if args.C is None else args.C
    try:
        return PartitionPoint(args.eta, C).check(cfg)
    except ValueError as err:
        raise UsageError(str(err)) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_coverage(args, cfg, out):
    C = cfg.C if args.C is None else args.C
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["tier", "state", "gamma_db", "coverage"])
    for tier, state, g, p in coverage_table(args.tiers, args.gamma_db, cfg, C):
        w.writerow([tier.value, state.value if state else "total", f"{g:g}", prob(p)])
    return EXIT_OK


def cmd_apt(args, cfg, out):
    p = _point(args, cfg)
    res = apt(p, float(db_to_linear(args.gamma0_db)), cfg)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["eta", "C", "gamma0_db", "apt_total", "apt_sbs", "apt_mbs",
                "sbs_ll", "sbs_ln", "sbs_nl", "sbs_nn", "mbs_L", "mbs_NL"])
    w.writerow([f"{p.eta:g}", p.C, f"{args.gamma0_db:g}", rate(res.total), rate(res.sbs_total),
                rate(res.mbs_total)] + [rate(res.sbs[k]) for k in ("ll", "ln", "nl", "nn")]
               + [rate(res.mbs["L"]), rate(res.mbs["NL"])])
    return EXIT_OK


ASE_METHODS = {
    "general": lambda p, cfg: ase(p, cfg),
    "nested": lambda p, cfg: ase(p, cfg, method="nested"),
    "noise": ase_noise_limited,
    "interference": ase_interference_limited,
}


def cmd_ase(args, cfg, out):
    p = _point(args, cfg)
    res = ASE_METHODS[args.method](p, cfg)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["eta", "C", "method", "ase_total", "ase_sbs", "ase_mbs"])
    w.writerow([f"{p.eta:g}", p.C, args.method, rate(res.total), rate(res.sbs), rate(res.mbs)])
    return EXIT_OK


def _eta_grid(start, stop, step):
    if not step > 0:
        raise UsageError("--eta-step must be positive")
    if not 0 <= start <= stop <= 1:
        raise UsageError("need 0 <= --eta-start <= --eta-stop <= 1")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def cmd_sweep(args, cfg, out):
    etas = _eta_grid(args.eta_start, args.eta_stop, args.eta_step)
    Cs = args.C_list if args.C_list is not None else [cfg.C]
    if not Cs:
        raise UsageError("--C-list is empty")
    gamma0 = float(db_to_linear(args.gamma0_db))
    fp = cfg.fingerprint()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["eta", "C", "apt", "ase", "ase_noise", "ase_intf", "cov_s", "cov_m", "cov_bh",
                "fingerprint", "version"])
    best = {}
    for C in Cs:
        if C < 0 or C > cfg.F:
            raise UsageError(f"cache capacity {C} outside [0, {cfg.F}]")
        cells = []
        cov = _tier_coverages(cfg, C, gamma0)
        for eta in etas:
            p = PartitionPoint(eta, C)
            a = apt(p, gamma0, cfg)
            e = ase(p, cfg).total
            cells.append((eta, a.total, e))
            w.writerow([f"{eta:g}", C, rate(a.total), rate(e), rate(ase_noise_limited(p, cfg).total),
                        rate(ase_interference_limited(p, cfg).total),
                        prob(cov[SBS]), prob(cov[MBS]), prob(cov[BACKHAUL]), fp, __version__])
        col = 2 if args.objective == "ase" else 1
        best[C] = _grid_argmax(cells, col)
    base = best[0] if 0 in best else _grid_argmax(
        [(eta, apt(PartitionPoint(eta, 0), gamma0, cfg).total, ase(PartitionPoint(eta, 0), cfg).total)
         for eta in etas], 2 if args.objective == "ase" else 1)
    out.write("\n")
    w.writerow(["C", "objective", "eta_star", "value", "delta_eta"])
    for C in Cs:
        eta, val = best[C]
        w.writerow([C, args.objective, f"{eta:g}", rate(val), f"{eta - base[0]:g}"])
    return EXIT_OK


def _grid_argmax(cells, col):
    # first maximum wins, so ties go to the smaller eta
    best = max(range(len(cells)), key=lambda i: (cells[i][col], -i))
    return cells[best][0], cells[best][col]


def _tier_coverages(cfg, C, gamma):
    return {t: float(sum(coverage_curve(TierLink(t, s), [gamma], cfg, C)[0] for s in (LOS, NLOS)))
            for t in (SBS, MBS, BACKHAUL)}


def _sim_spec(args):
    try:
        return SimSpec(drops=args.drops, seed=args.seed, jobs=args.jobs, association=args.association)
    except ValueError as err:
        raise UsageError(str(err)) from None


def cmd_simulate(args, cfg, out):
    spec = _sim_spec(args)
    p = _point(args, cfg)
    table = run_drops(cfg, spec, p.C)
    if args.trace:
        table.write_csv(args.trace)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["quantity", "link", "gamma_db", "estimate", "ci_half_width"])
    for link in ALL_LINKS:
        e = table.association(link)
        w.writerow(["association", link.label, "", prob(e.mean), prob(e.half_width)])
    for g in args.gamma_db:
        gl = float(db_to_linear(g))
        for link in ALL_LINKS:
            e = table.coverage(link, gl)
            w.writerow(["coverage", link.label, f"{g:g}", prob(e.mean), prob(e.half_width)])
    e = table.ase(p.eta)
    w.writerow(["ase", "total", "", rate(e.mean), rate(e.half_width)])
    a = table.apt(p.eta, float(db_to_linear(args.gamma0_db)))
    w.writerow(["apt", "total", f"{args.gamma0_db:g}", rate(a.total), ""])
    return EXIT_OK


def cmd_compare(args, cfg, out):
    spec = _sim_spec(args)
    p = _point(args, cfg)
    table = run_drops(cfg, spec, p.C)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["quantity", "link", "gamma_db", "analytic", "montecarlo", "ci_half_width", "gap", "flag"])
    breached = False

    def row(quantity, label, g, analytic, est, fmt):
        nonlocal breached
        gap = abs(analytic - est.mean)
        limit = max(args.tolerance * (1.0 if fmt is prob else abs(est.mean)), 3.0 * est.half_width)
        flag = gap > limit
        breached |= flag
        w.writerow([quantity, label, g, fmt(analytic), fmt(est.mean), fmt(est.half_width), fmt(gap),
                    "BREACH" if flag else "ok"])

    for g in args.gamma_db:
        gl = float(db_to_linear(g))
        for link in ALL_LINKS:
            analytic = float(coverage_curve(link, [gl], cfg, p.C)[0])
            row("coverage", link.label, f"{g:g}", analytic, table.coverage(link, gl), prob)
    if args.ase:
        row("ase", "total", "", ase(p, cfg).total, table.ase(p.eta), rate)
    return EXIT_BREACH if breached else EXIT_OK


# ---------------------------------------------------------------------------
# parser


CSV_HELP = """\
CSV columns
  coverage : tier, state (L, NL or total), gamma_db, coverage
  apt      : eta, C, gamma0_db, apt_total, apt_sbs, apt_mbs, sbs_ll..sbs_nn, mbs_L, mbs_NL  (bit/s/m^2)
  ase      : eta, C, method, ase_total, ase_sbs, ase_mbs  (bit/s/Hz/m^2)
  sweep    : eta, C, apt, ase, ase_noise, ase_intf, cov_s, cov_m, cov_bh, fingerprint, version;
             then a blank line and C, objective, eta_star, value, delta_eta
  simulate : quantity, link, gamma_db, estimate, ci_half_width
  compare  : quantity, link, gamma_db, analytic, montecarlo, ci_half_width, gap, flag

Configuration: flat "section.key = value" files; IABCACHE_<SECTION>__<KEY> variables
override the file and --set key=value overrides both.
Exit codes: 0 ok, 1 compare tolerance breached, 2 usage/config error, 3 non-convergence.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="configuration file (defaults to the built-in parameters)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key, e.g. cache.C=200")
    common.add_argument("--output", "-o", help="write CSV here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for simulations")

    parser = _Parser(prog="iabcache", description=__doc__.split("\n\n")[0], epilog=CSV_HELP,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def point(p):
        p.add_argument("--eta", type=float, default=0.5, help="access bandwidth share")
        p.add_argument("--C", type=int, default=None, help="cache capacity in files (default: config)")

    p = sub.add_parser("coverage", parents=[common], help="SINR coverage per tier and state")
    p.add_argument("--gamma-db", type=_float_list, default=[0.0, 5.0, 10.0], help="comma-separated dB")
    p.add_argument("--tiers", type=_tier_list, default=[SBS, MBS, BACKHAUL], help="e.g. s,m,bh")
    p.add_argument("--C", type=int, default=None)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("apt", parents=[common], help="average potential throughput")
    point(p)
    p.add_argument("--gamma0-db", type=float, default=10.0)
    p.set_defaults(func=cmd_apt)

    p = sub.add_parser("ase", parents=[common], help="area spectral efficiency")
    point(p)
    p.add_argument("--method", choices=sorted(ASE_METHODS), default="general")
    p.set_defaults(func=cmd_ase)

    p = sub.add_parser("sweep", parents=[common], help="(eta, C) grid with per-C optimum")
    p.add_argument("--eta-start", type=float, default=0.0)
    p.add_argument("--eta-stop", type=float, default=1.0)
    p.add_argument("--eta-step", type=float, default=0.05)
    p.add_argument("--C-list", type=_int_list, default=None, help="comma-separated cache capacities")
    p.add_argument("--objective", choices=["ase", "apt"], default="ase")
    p.add_argument("--gamma0-db", type=float, default=10.0)
    p.set_defaults(func=cmd_sweep)

    for name, func, helptext in (("simulate", cmd_simulate, "Monte-Carlo estimates"),
                                 ("compare", cmd_compare, "analytic vs Monte-Carlo report")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        point(p)
        p.add_argument("--drops", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--gamma-db", type=_float_list, default=[0.0, 5.0, 10.0, 15.0])
        p.add_argument("--association", choices=["instantaneous", "mean"], default="instantaneous")
        p.set_defaults(func=func)
    sub.choices["simulate"].add_argument("--gamma0-db", type=float, default=10.0)
    sub.choices["simulate"].add_argument("--trace", help="write per-drop records to this CSV")
    sub.choices["compare"].add_argument("--tolerance", type=float, default=0.03,
                                        help="absolute gap allowed on probabilities (relative on ASE)")
    sub.choices["compare"].add_argument("--ase", action="store_true", help="also compare the ASE")
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        cfg = load_config(args.config, args.set)
        buf = io.StringIO()
        code = args.func(args, cfg, buf)
        if args.output:
            with open(args.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            stdout.write(buf.getvalue())
        return code
    except (UsageError, ConfigError) as err:
        print(f"iabcache: error: {err}", file=stderr)
        return EXIT_USAGE
    except NonConvergenceError as err:
        print(f"iabcache: numerical failure: {err}", file=stderr)
        return EXIT_NONCONVERGENCE
    except SystemExit as err:  # --help / --version
        return int(err.code or 0)


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
