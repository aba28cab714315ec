"""Command line front end.

    schelling1d <command> [flags]

Commands: simulate, thresholds, classify, probe, sweep, lambda, render.
Any flag can also come from a key-value file given with --config (one
`key = value` per line, keys spelled like the flags without dashes, e.g.
`tau_g = 0.38`); flags on the command line win.

Exit status: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from fractions import Fraction
from pathlib import Path

from .dynamics import Dynamic, dump_run, load_run, simulate
from .probe import cutoffs, probe, probe_monte_carlo
from .ring import Scenario, parse_tolerance
from .structure import run_statistics
from .sweep import SweepConfig, parse_span_end, read_csv, run_sweep, summary_text, write_csv
from .thresholds import (classify, domination_report, lambda_threshold, stochastically_stable,
                         thresholds)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _tolerance(text: str):
    try:
        return parse_tolerance(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _dynamic(text: str) -> Dynamic:
    try:
        return Dynamic.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _span(text: str) -> tuple[Fraction, Fraction]:
    try:
        lo, hi = text.split(":")
        return parse_span_end(lo), parse_span_end(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from exc


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _add_scenario(p, taus=True):
    p.add_argument("--rho", type=float, help="initial probability of green")
    if taus:
        p.add_argument("--tau-g", type=_tolerance, help="green tolerance, e.g. 0.38")
        p.add_argument("--tau-r", type=_tolerance, help="red tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="schelling1d", description=__doc__.split("\n")[0])
    parser.add_argument("--config", type=Path, help="key-value file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one ring")
    _add_scenario(p)
    p.add_argument("-w", type=int, help="neighbourhood radius")
    p.add_argument("-n", type=int, help="ring size")
    p.add_argument("--dynamic", type=_dynamic, default=Dynamic("selective"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--events", type=_on_off, default=True, help="record events: on|off")
    p.add_argument("--harmony", action="store_true", help="check every flip raises harmony")
    p.add_argument("--out", type=Path, help="write the run record here")

    p = sub.add_parser("thresholds", help="kappa and mu for a green share")
    _add_scenario(p, taus=False)

    p = sub.add_parser("classify", help="predicted outcome of a scenario")
    _add_scenario(p)
    p.add_argument("--dynamic", type=_dynamic, default=Dynamic("selective"))

    p = sub.add_parser("probe", help="exact initial-configuration probabilities")
    _add_scenario(p)
    p.add_argument("-w", type=int)
    p.add_argument("--mc", type=int, default=0, help="Monte-Carlo ring size (0: skip)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sweep", help="grid over (tau_r, tau_g)")
    _add_scenario(p, taus=False)
    p.add_argument("-w", type=int)
    p.add_argument("-n", type=int)
    p.add_argument("--dynamic", type=_dynamic, default=Dynamic("selective"))
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tau-r-span", type=_span, default=(Fraction(0), Fraction(1)),
                   help="lo:hi range of tau_r covered by the grid")
    p.add_argument("--tau-g-span", type=_span, default=(Fraction(0), Fraction(1)),
                   help="lo:hi range of tau_g covered by the grid")
    p.add_argument("--out", type=Path, help="CSV path; a .summary.txt is written beside it")

    sub.add_parser("lambda", help="green share where the stability threshold meets domination")

    p = sub.add_parser("render", help="SVG from a sweep CSV or a run record")
    p.add_argument("--input", type=Path)
    p.add_argument("--kind", choices=("landscape", "ring"), help="default: from the file")
    p.add_argument("--out", type=Path)
    return parser


def _config_defaults(path: Path) -> dict[str, str]:
    cp = configparser.ConfigParser()
    try:
        cp.read_string("[defaults]\n" + path.read_text())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return {k.replace("-", "_"): v for k, v in cp["defaults"].items()}


def _apply_config(parser, argv, args):
    """Re-parse with config values as defaults so explicit flags still win."""
    values = _config_defaults(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    converted = {}
    for key, raw in values.items():
        if key not in known:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            converted[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                converted[key] = action.type(raw) if action.type else raw
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
    sub.set_defaults(**converted)
    return parser.parse_args(argv)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") if len(m) > 1 else "-" + m for m in missing)
        raise UsageError(f"{args.command}: missing {flags}")


def _scenario(args) -> Scenario:
    try:
        return Scenario(args.rho, args.tau_g, args.tau_r)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(pairs) -> None:
    for k, v in pairs:
        print(f"{k}: {v}")


def cmd_simulate(args):
    _need(args, "rho", "tau_g", "tau_r", "w", "n")
    scen = _scenario(args)
    if args.w < 1 or args.n < 2 * args.w + 1:
        raise UsageError("need w >= 1 and n >= 2w + 1")
    rec = simulate(args.n, args.w, scen, args.dynamic, args.seed, args.max_steps,
                   record_events=args.events, monitor=args.harmony)
    s = run_statistics(rec)
    pairs = [("scenario", scen), ("w", args.w), ("n", args.n), ("dynamic", args.dynamic),
             ("seed", args.seed), ("steps", s.steps), ("termination", s.termination.value)]
    if s.cycle_period is not None:
        pairs.append(("cycle_period", s.cycle_period))
    pairs += [("initial_green_frac", f"{s.initial_green_fraction:.6f}"),
              ("final_green_frac", f"{s.final_green_fraction:.6f}"),
              ("changed_frac", f"{s.changed_fraction:.6f}")]
    if rec.harmony is not None:
        pairs.append(("harmony", f"{float(rec.harmony):.6f}"))
    if args.dynamic.kind != "perturbed":
        pairs.append(("predicted", classify(scen, args.dynamic).label.value))
    else:
        pairs.append(("stochastically_stable", stochastically_stable(scen, args.w)))
    _emit(pairs)
    if args.out:
        with open(args.out, "w") as fh:
            dump_run(rec, fh)


def cmd_thresholds(args):
    _need(args, "rho")
    t = thresholds(args.rho)
    _emit([("rho", args.rho), ("kappa_g", f"{t.kappa_g:.9f}"), ("kappa_r", f"{t.kappa_r:.9f}"),
           ("mu_g", f"{t.mu_g:.9f}"), ("mu_r", f"{t.mu_r:.9f}")])


def cmd_classify(args):
    _need(args, "rho", "tau_g", "tau_r")
    scen = _scenario(args)
    pred = classify(scen, args.dynamic)
    dom = domination_report(scen.rho, scen.tau_g, scen.tau_r)
    pairs = [("scenario", scen), ("dynamic", args.dynamic), ("label", pred.label.value),
             ("reason", pred.reason), ("domination", dom.kind.value),
             ("domination_margin", f"{dom.margin:.6g}")]
    if dom.line_extended:
        pairs.append(("domination_note", "ratio extended across tau_g + tau_r = 1"))
    if pred.z_limit is not None:
        pairs.append(("z_limit", f"{pred.z_limit:.6f}"))
    _emit(pairs)


def cmd_probe(args):
    _need(args, "rho", "tau_g", "tau_r", "w")
    scen = _scenario(args)
    rep = probe(scen, args.w)
    exact = rep.probabilities()
    mc = probe_monte_carlo(scen, args.w, args.mc, args.seed) if args.mc else {}
    cg, cr = cutoffs(scen.tau_g, args.w), cutoffs(scen.tau_r, args.w)
    pairs = [("scenario", scen), ("w", args.w),
             ("cutoffs_green", f"unhappy={cg.unhappy} stable={cg.stable} hopeful={cg.hopeful} "
                               f"intract={cg.intract}"),
             ("cutoffs_red", f"unhappy={cr.unhappy} stable={cr.stable} hopeful={cr.hopeful} "
                             f"intract={cr.intract}")]
    for key, p in exact.items():
        lg = getattr(rep, "log_" + key)
        line = f"{p:.6e} (log {lg:.6f})" if math.isfinite(lg) else "0"
        if key in mc:
            line += f" mc={mc[key]:.6e}"
        pairs.append((key, line))
    _emit(pairs)


def cmd_sweep(args):
    _need(args, "rho", "w", "n")
    try:
        cfg = SweepConfig(rho=args.rho, w=args.w, n=args.n, dynamic=args.dynamic, grid=args.grid,
                          reps=args.reps, base_seed=args.seed, max_steps=args.max_steps,
                          delta=args.delta, threads=args.threads,
                          tau_r_span=args.tau_r_span, tau_g_span=args.tau_g_span)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    grid = run_sweep(cfg)
    text = summary_text(grid)
    if args.out:
        with open(args.out, "w") as fh:
            write_csv(grid, fh)
        Path(str(args.out) + ".summary.txt").write_text(text)
    sys.stdout.write(text)


def cmd_lambda(args):
    lam = lambda_threshold()
    _emit([("lambda", f"{lam.value:.9f}"), ("kappa_g", f"{lam.kappa_g:.9f}"),
           ("kappa_r", f"{lam.kappa_r:.9f}"), ("dual_residual", f"{lam.dual_residual:.6g}")])


def cmd_render(args):
    from .render import render_landscape, render_ring

    _need(args, "input", "out")
    with open(args.input) as fh:
        first = fh.readline()
    kind = args.kind or ("ring" if first.startswith("schelling-run") else "landscape")
    with open(args.input) as fh:
        if kind == "ring":
            render_ring(load_run(fh), args.out)
        else:
            render_landscape(read_csv(fh), args.out)
    _emit([("wrote", args.out), ("kind", kind)])


COMMANDS = {"simulate": cmd_simulate, "thresholds": cmd_thresholds, "classify": cmd_classify,
            "probe": cmd_probe, "sweep": cmd_sweep, "lambda": cmd_lambda, "render": cmd_render}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config is not None:
            args = _apply_config(parser, argv, args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
