"""Command line: ``mbpei {quadrature,converge,simulate}``.

Exit codes: 0 success, 1 unexpected failure, 2 bad configuration or usage,
3 at least one simulated scheme left the admissible range.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ALIASES, RunConfig, parse_value
from .diagnostics import (
    ConvergenceSetup,
    TimeSeries,
    convergence_table,
    format_time,
    record_observer,
    steps_for,
    write_convergence_csv,
)
from .errors import BlowUpError, ConfigError, QuadratureError
from .grid import write_csv_matrix, write_pgm
from .integrator import evolve
from .quadrature import build_rule

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3

log = logging.getLogger("mbpei")

# shorthand flag -> config key (``--orders`` depends on the command)
_FLAG_KEYS = {
    "out": "run.out",
    "seed": "run.seed",
    "record_every": "run.record_every",
    "family": "scheme.quadrature_family",
    "tau": "scheme.tau",
    "T": "run.T",
    "taus": "converge.taus",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output directory (file for quadrature)")
    p.add_argument("--seed", type=int)
    p.add_argument("--allow-non-mbp", action="store_true", help="permit right Radau / Lobatto rules")
    p.add_argument("--record-every", type=int)
    p.add_argument("--orders", help="comma separated orders, e.g. 2,3,4")
    p.add_argument("--family", help="quadrature family")
    p.add_argument("--tau", type=float)
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--taus", help="comma separated decreasing step sizes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="mbpei", description=__doc__.splitlines()[0], parents=[])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    q = sub.add_parser("quadrature", parents=[common], help="print a rule on [0, 1] as CSV")
    q.add_argument("--nodes", type=int, default=2)
    sub.add_parser("converge", parents=[common], help="temporal convergence table")
    sub.add_parser("simulate", parents=[common], help="long-time runs with energy and bound tracking")
    return parser


def parse_overrides(extra: list[str]) -> dict:
    """``--section.key value`` / ``--section.key=value`` pairs."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        name = tok.split("=", 1)[0][2:]
        if not tok.startswith("--") or ("." not in name and name not in ALIASES):
            raise ConfigError(f"unrecognised argument {tok!r}")
        if "=" in tok:
            key, raw = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"{tok} needs a value")
            key, raw = tok[2:], extra[i + 1]
            i += 2
        out[key] = parse_value(raw)
    return out


def load_config(args, extra) -> RunConfig:
    overrides = {}
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr, None)
        if v is not None:
            overrides[key] = v
    if args.allow_non_mbp:
        overrides["scheme.allow_non_mbp"] = True
    if args.orders is not None:
        overrides["converge.orders" if args.command == "converge" else "scheme.order"] = args.orders
    overrides.update(parse_overrides(extra))
    return RunConfig.load(args.config, overrides)


def cmd_quadrature(args, extra, stdout) -> int:
    if extra:
        raise ConfigError(f"quadrature takes no config keys, got {extra[0]!r}")
    try:
        rule = build_rule(args.family or "left_radau", args.nodes)
    except QuadratureError as err:
        raise ConfigError(str(err)) from None
    lines = [f"# family={rule.family.value} nodes={len(rule.nodes)} degree={rule.degree}", "node,weight"]
    lines += [f"{s:.17g},{w:.17g}" for s, w in zip(rule.nodes, rule.weights)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    stdout.write(text)
    return EXIT_OK


def _prepare_outdir(cfg: RunConfig) -> str:
    out = cfg.run.out
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.echo"), "w", newline="\n") as fh:
        fh.write(cfg.echo())
    return out


def cmd_converge(args, extra, stdout) -> int:
    cfg = load_config(args, extra)
    c = cfg.converge
    model = cfg.build_model()
    grid = cfg.build_grid()
    setup = ConvergenceSetup(
        grid, model, cfg.model.epsilon, cfg.initial_field(grid, model), cfg.run.T, cfg.scheme.quadrature_family, cfg.model.eps_scaling
    )
    try:
        for tau in c.taus:
            steps_for(cfg.run.T, tau)
        ref = cfg.build_scheme(c.reference_order, min(c.taus) / c.reference_divisor)
    except ValueError as err:
        raise ConfigError(f"{cfg._where('converge.taus', 'run.T')}: {err}") from None
    out = _prepare_outdir(cfg)
    log.info("reference %s tau=%g", ref.label, ref.tau)
    table = convergence_table(setup, c.orders, c.taus, ref, cfg.build_scheme)
    path = os.path.join(out, "convergence.csv")
    write_convergence_csv(path, table)
    with open(path) as fh:
        stdout.write(fh.read())
    return EXIT_OK


def _snapshot(outdir, t, v, beta):
    stem = os.path.join(outdir, f"snap_t{format_time(t)}")
    write_csv_matrix(stem + ".csv", v)
    write_pgm(stem + ".pgm", v, beta)


def cmd_simulate(args, extra, stdout) -> int:
    cfg = load_config(args, extra)
    model = cfg.build_model()
    grid = cfg.build_grid()
    u0 = cfg.initial_field(grid, model)
    out = _prepare_outdir(cfg)
    tau = cfg.scheme.tau
    n_steps = steps_for(cfg.run.T, tau)
    status = EXIT_OK
    for k in cfg.scheme.order:
        spec = cfg.build_scheme(k, tau)
        ctx = cfg.build_context(spec, model)
        sub = os.path.join(out, spec.label)
        os.makedirs(sub, exist_ok=True)
        blowup_file = os.path.join(sub, "blowup.txt")
        if os.path.exists(blowup_file):
            os.remove(blowup_file)
        series = TimeSeries(grid, model, cfg.model.epsilon)
        series.record(0, 0.0, u0)
        snaps = [t for t in cfg.run.snapshot_times if 0 <= t <= cfg.run.T]
        if any(round(t / tau) == 0 for t in snaps):
            _snapshot(sub, 0.0, u0, model.beta)
        later = [t for t in snaps if round(t / tau) > 0]
        obs = record_observer(series, cfg.run.record_every, later, tau, sub)
        log.info("running %s for %d steps", spec.label, n_steps)
        try:
            evolve(ctx, u0, n_steps, obs)
            ups = series.energy_increases()
            line = (
                f"{spec.label}: completed T={cfg.run.T:g} max_violation={series.max_violation:.3e} "
                f"energy_increases={len(ups)}"
            )
        except BlowUpError as err:
            status = EXIT_BLOWUP
            with open(blowup_file, "w", newline="\n") as fh:
                fh.write(f"step={err.step}\ntime={err.time:.17g}\nmax_abs={err.max_abs:.17g}\n")
            line = f"{spec.label}: blew up at step {err.step} (t={err.time:g}, max|u|={err.max_abs:.6g})"
        series.write_csv(os.path.join(sub, "timeseries.csv"))
        stdout.write(line + "\n")
    return status


COMMANDS = {"quadrature": cmd_quadrature, "converge": cmd_converge, "simulate": cmd_simulate}


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        return COMMANDS[args.command](args, extra, stdout)
    except ConfigError as err:
        print(f"mbpei: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001
        print(f"mbpei: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
