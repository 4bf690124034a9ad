"""Command-line front end: sweeps, thresholds, coin tossing and envelope tables."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .coin import (NoCrossingError, bob_cheat_bound, classical_bound_at,
                   classical_equivalence_factor, default_event_model, load_classical_bounds,
                   table_event_model)
from .config import Config, ConfigError, Model, Protocol, SweepSpec, load_config
from .core import AttackScenario
from .envelope import builtin_envelope, load_envelope, max_x, scenario_feasible
from .sweep import NoThresholdError, Target, find_threshold, run_sweep

CSV_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_csv(path: Path | None, kind: str, columns: Sequence[str], rows) -> None:
    lines = [f"# muattack-csv v{CSV_VERSION} {kind}: " + ",".join(columns), ",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_bytes(text.encode("ascii"))


def _envelope(cfg: Config):
    return load_envelope(cfg.envelope_table) if cfg.envelope_table else None


def _need(value, what: str):
    if value is None:
        raise ConfigError(f"config is missing {what}")
    return value


def _coin_model(cfg: Config):
    coin = _need(cfg.coin, "the [coin] section")
    return table_event_model(coin.event_table) if coin.event_table else default_event_model(coin.params)


def _classical(cfg: Config) -> float:
    coin = cfg.coin
    if coin.classical_bound is not None:
        return coin.classical_bound
    table = load_classical_bounds(coin.classical_table)
    return classical_bound_at(coin.params.honest_abort, table)


def cmd_sweep(cfg: Config, args) -> int:
    spec: SweepSpec = _need(cfg.sweep, "the [sweep] section")
    _need(spec.scenario, "the [scenario] section")
    coin = cfg.coin.params if cfg.coin else None
    rows = run_sweep(spec, cfg.system, cfg.eve, coin,
                     _coin_model(cfg) if spec.protocol is Protocol.COIN_TOSS else None,
                     _envelope(cfg), workers=args.workers)
    value_name = "cheat_bound" if spec.protocol is Protocol.COIN_TOSS else "leaked_fraction"
    columns = [spec.axis.value, "x", value_name, "feasible", "within_envelope",
               "p_attack", "rate_residual"]
    write_csv(args.out, f"sweep protocol={spec.protocol.value} model={spec.model.value} "
              f"method={spec.scenario.method.value} n_blocked={spec.scenario.n_blocked}",
              columns,
              [(r.axis_value, r.x, r.value, r.feasible, r.within_envelope, r.p_attack,
                r.rate_residual) for r in rows])
    return EXIT_OK if any(r.feasible for r in rows) else EXIT_INFEASIBLE


def cmd_threshold(cfg: Config, args) -> int:
    scenario: AttackScenario = _need(cfg.scenario, "the [scenario] section")
    protocols = [Protocol(p) for p in args.protocol] if args.protocol else [
        cfg.sweep.protocol if cfg.sweep else Protocol.BB84]
    models = [Model(m) for m in args.model] if args.model else [
        cfg.sweep.model if cfg.sweep else Model.REALISTIC]
    targets = [Target(t) for t in args.target]
    envelope = _envelope(cfg)
    rows, found = [], 0
    for protocol in protocols:
        if protocol is Protocol.COIN_TOSS:
            raise ConfigError("use the coin-toss command for coin tossing")
        for model in models:
            for target in targets:
                try:
                    x = find_threshold(protocol, model, scenario, cfg.system, cfg.eve,
                                       target, envelope)
                    found += 1
                except NoThresholdError as exc:
                    print(f"no threshold: {exc}", file=sys.stderr)
                    x = None
                rows.append((protocol.value, model.value, scenario.method.value,
                             scenario.n_blocked, target.value, x))
    write_csv(args.out, "threshold",
              ["protocol", "model", "method", "n_blocked", "target", "x_threshold"], rows)
    return EXIT_OK if found else EXIT_INFEASIBLE


def cmd_coin(cfg: Config, args) -> int:
    coin = _need(cfg.coin, "the [coin] section")
    model = _coin_model(cfg)
    classical = _classical(cfg)
    scenario = cfg.scenario or AttackScenario("custom", 1.0)
    duty = scenario.duty
    spec = cfg.sweep
    xs = spec.grid() if spec is not None and spec.axis.value == "x_factor" else [
        1.0 + 0.05 * i for i in range(181)]
    rows = []
    for x in xs:
        bound = bob_cheat_bound(coin.params, model, x, duty)
        rows.append((x, bound, classical, bound >= classical,
                     scenario_feasible(AttackScenario(scenario.method, x, scenario.n_blocked),
                                       _envelope(cfg))))
    try:
        factor = classical_equivalence_factor(coin.params, model, classical, duty)
    except NoCrossingError as exc:
        print(f"no crossing: {exc}", file=sys.stderr)
        factor = None
    write_csv(args.out,
              f"coin-toss k_rounds={coin.params.k_rounds} duty={fmt(duty)} "
              f"classical_bound={fmt(classical)} equivalence_x={fmt(factor)}",
              ["x", "cheat_bound", "classical_bound", "at_or_above_classical",
               "within_envelope"], rows)
    return EXIT_OK if factor is not None else EXIT_INFEASIBLE


def cmd_envelope(cfg: Config, args) -> int:
    points = _envelope(cfg) or builtin_envelope()
    rows = [(p.method.value, p.n_blocked, p.x_max, p.pulse_energy_fj) for p in points]
    note = ""
    if cfg.scenario is not None:
        sc = cfg.scenario
        limit = max_x(sc.method, sc.n_blocked, points)
        note = (f" scenario={sc.method.value}/n_blocked={sc.n_blocked}/x={fmt(sc.x)}"
                f" x_limit={fmt(limit)} feasible={fmt(scenario_feasible(sc, points))}")
    write_csv(args.out, "envelope" + note,
              ["method", "n_blocked", "x_max", "pulse_energy_fj"], rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muattack",
        description="Security impact of mean-photon-number inflation on QKD and coin tossing.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, required=True, help="INI configuration file")
        p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
        return p

    p = common(sub.add_parser("sweep", help="leaked fraction or cheating bound over a grid"))
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("threshold", help="minimum x for partial/full key leakage"))
    p.add_argument("--protocol", action="append", choices=["bb84", "sarg04"])
    p.add_argument("--model", action="append", choices=["strong", "realistic"])
    p.add_argument("--target", action="append", choices=["partial", "full"])
    p.set_defaults(func=cmd_threshold)

    p = common(sub.add_parser("coin-toss", help="Bob's cheating bound versus x"))
    p.set_defaults(func=cmd_coin)

    p = common(sub.add_parser("envelope", help="print the hardware envelope table"))
    p.set_defaults(func=cmd_envelope)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "target", None) is None and args.command == "threshold":
        args.target = ["partial", "full"]
    try:
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
