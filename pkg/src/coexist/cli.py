"""Command-line front end: ``coexist <verb> [flags]``."""

from __future__ import annotations

import argparse
import csv
import sys
from contextlib import contextmanager
from typing import Sequence

import numpy as np

from . import oracle, sim
from .config import ConfigError, ScenarioConfig, dumps, load
from .contract import InfeasibleContract, PairContext, design_bundle, urllc_utility
from .frame import Mode
from .scheduler import required_rate


def _urllc_range(text: str) -> list[int]:
    try:
        a, b, step = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:step, got {text!r}") from None
    if step < 1 or b < a or a < 0:
        raise argparse.ArgumentTypeError(f"empty or invalid range {text!r}")
    return list(range(a, b + 1, step))


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coexist", description="eMBB/URLLC coexistence scheduling experiments")
    verbs = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    run = verbs.add_parser("run", help="Monte-Carlo sweep, CSV out")
    run.add_argument("--config")
    run.add_argument("--scheme", choices=["contract", "puncture", "nourllc", "all"])
    run.add_argument("--seeds", type=_positive)
    run.add_argument("--sweep-urllc", type=_urllc_range, metavar="A:B:STEP")
    run.add_argument("--sweep-epsilon", type=_float_list, metavar="LIST")
    run.add_argument("--out", default="-")

    orc = verbs.add_parser("oracle", help="heuristic vs exhaustive optimum on tiny instances")
    orc.add_argument("--config")
    orc.add_argument("--instances", type=_positive, default=100)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--out", default="-")

    bundle = verbs.add_parser("bundle-dump", help="contract items and the type-by-item utility table")
    bundle.add_argument("--config")
    bundle.add_argument("--out", default="-")

    check = verbs.add_parser("validate-config", help="parse and validate a config, optionally print it")
    check.add_argument("--config")
    check.add_argument("--dump", action="store_true", help="print the effective config")
    return parser


def _config(path: str | None) -> ScenarioConfig:
    return load(path) if path else ScenarioConfig()


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _cmd_run(args) -> int:
    config = _config(args.config)
    overrides = {}
    if args.scheme:
        overrides["scheduler.scheme"] = args.scheme
    if args.seeds:
        overrides["sim.seeds"] = args.seeds
    if args.sweep_urllc:
        overrides["sweep.n_urllc"] = args.sweep_urllc
    if args.sweep_epsilon:
        overrides["sweep.epsilon"] = args.sweep_epsilon
    if overrides:
        config = ScenarioConfig({**config.values, **overrides})
    rows = sim.run_experiment(config)
    with _output(args.out) as fh:
        sim.write_rows(rows, fh)
    return 0


def _cmd_oracle(args) -> int:
    config = _config(args.config)
    params = config.radio()
    ladder = config.ladder()
    pricing = config.pricing()
    rng = np.random.default_rng(args.seed)
    failures = 0
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["instance", "n_embb", "n_urllc", "rb_count", "minislots", "heuristic", "puncture", "oracle",
             "allowance", "dominance_ok", "contract_ge_puncture"]
        )
        for i in range(args.instances):
            inst = oracle.random_tiny_instance(rng, params, config["topology.radius_m"])
            rec = oracle.compare_on_instance(inst, params, ladder, pricing)
            n_e = sum(u.role == "embb" for u in inst.users)
            ok = rec.dominance_ok and rec.contract_ge_puncture
            failures += not ok
            writer.writerow(
                [i, n_e, len(inst.users) - n_e, inst.rb_count, inst.minislots, repr(rec.heuristic),
                 repr(rec.puncture), repr(rec.oracle), repr(rec.allowance), int(rec.dominance_ok),
                 int(rec.contract_ge_puncture)]
            )
    print(f"{args.instances - failures}/{args.instances} instances without violations", file=sys.stderr)
    return 1 if failures else 0


def _cmd_bundle(args) -> int:
    config = _config(args.config)
    ladder = config.ladder()
    need = required_rate(config.radio(), config.frame())
    bundle = design_bundle(ladder, PairContext(need, config.pricing()))
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["type_index", "type_value", "item_index", "promised_rate_bps", "price", "incentive", "utility"])
        for i, theta in enumerate(ladder.tiers, start=1):
            for j, item in enumerate(bundle, start=1):
                writer.writerow(
                    [i, repr(theta), j, repr(item.promised_rate), repr(item.price), repr(item.incentive),
                     repr(urllc_utility(item, Mode.PUNCTURE, theta))]
                )
    return 0


def _cmd_validate(args) -> int:
    config = _config(args.config)
    if args.dump:
        sys.stdout.write(dumps(config))
    else:
        print("config ok", file=sys.stderr)
    return 0


COMMANDS = {"run": _cmd_run, "oracle": _cmd_oracle, "bundle-dump": _cmd_bundle, "validate-config": _cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, InfeasibleContract, ValueError, OSError) as exc:
        print(f"coexist {args.verb}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
