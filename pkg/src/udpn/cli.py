"""Command-line interface.

Exit codes: 0 reachable/valid, 1 unreachable/invalid, 2 usage or input error,
3 internal invariant failure.  All outputs are deterministic: identical
inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import InternalError, Marking, UdpnError
from .histograms import decompose
from .oracle import GenConfig, random_run
from .reach import q_reach, qplus_reach
from .semantics import MODE_Q, MODE_QPLUS, validate_run
from .textio import (parse_histogram, parse_marking, parse_net, parse_run,
                     serialize_marking, serialize_net, serialize_run)
from .transforms import reduce_data, to_loopless


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UdpnError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UdpnError(f"cannot write {path}: {exc.strerror}") from exc


def _load_instance(args):
    net = parse_net(_read(args.net))
    i = parse_marking(_read(getattr(args, "from")), net)
    f = parse_marking(_read(args.to), net)
    return net, i, f


def _emit_json(out, record: dict) -> None:
    out.write(json.dumps(record, sort_keys=True) + "\n")


def _cmd_check(args, out) -> int:
    net, i, f = _load_instance(args)
    if args.mode == MODE_QPLUS:
        result = qplus_reach(net, i, f)
    else:
        result = q_reach(net, i, f)
    witness_path = None
    if result.reachable and args.witness:
        _write(args.witness, serialize_run(result.witness))
        witness_path = args.witness
    record = {
        "verdict": "reachable" if result.reachable else "unreachable",
        "witness-path": witness_path,
        "stats": {
            "data-values": list(result.stats.universe),
            "variables": result.stats.variable_count,
            "constraints": result.stats.constraint_count,
            "solver-pivots": result.stats.solver_pivots,
        },
    }
    if args.json:
        _emit_json(out, record)
    else:
        out.write(record["verdict"] + "\n")
    return 0 if result.reachable else 1


def _cmd_validate(args, out) -> int:
    net, i, f = _load_instance(args)
    run = parse_run(_read(args.run), net)
    verdict = validate_run(i, run, f, args.mode)
    record = {"verdict": "valid" if verdict.ok else "invalid"}
    if not verdict.ok:
        record["failure"] = {
            "step": verdict.failure.step_index,
            "place": verdict.failure.place,
            "datum": verdict.failure.datum,
            "shortfall": str(verdict.failure.shortfall),
        }
    if args.json:
        _emit_json(out, record)
    else:
        out.write(record["verdict"] + "\n")
    return 0 if verdict.ok else 1


def _cmd_transform(args, out) -> int:
    net = parse_net(_read(args.net))
    if getattr(args, "from") and args.to:
        i = parse_marking(_read(getattr(args, "from")), net)
        f = parse_marking(_read(args.to), net)
    else:
        i = Marking(net)
        f = Marking(net)
    net2, i2, f2, _mapping = to_loopless(net, i, f)
    if args.out_net:
        _write(args.out_net, serialize_net(net2))
        if args.out_from:
            _write(args.out_from, serialize_marking(i2))
        if args.out_to:
            _write(args.out_to, serialize_marking(f2))
    else:
        out.write(serialize_net(net2))
    return 0


def _cmd_reduce_data(args, out) -> int:
    net, i, f = _load_instance(args)
    run = parse_run(_read(args.run), net)
    verdict = validate_run(i, run, f, args.mode)
    if not verdict.ok:
        sys.stderr.write("input run does not lead from the initial to the "
                         "final marking\n")
        return 1
    reduced = reduce_data(i, f, run, args.mode)
    text = serialize_run(reduced)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    return 0


def _cmd_oracle(args, out) -> int:
    net = parse_net(_read(args.net))
    i = parse_marking(_read(getattr(args, "from")), net)
    seed = args.seed
    env_seed = os.environ.get("UDPN_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise UdpnError("UDPN_SEED must be an integer") from exc
    cfg = GenConfig(seed=seed, max_steps=args.steps, max_data=args.data)
    run, reached = random_run(net, i, cfg)
    text = serialize_run(run)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    out.write(serialize_marking(reached))
    return 0


def _cmd_hist(args, out) -> int:
    h = parse_histogram(_read(args.histogram))
    for amount, part in decompose(h):
        inner = ", ".join(f"{x} -> {a}" for (x, a), _v in part.items())
        out.write(f"part {amount}: {inner}\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udpn",
        description="Reachability for unordered data Petri nets over "
                    "rational and nonnegative-rational token counts.")
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_flags(p, with_to=True):
        p.add_argument("--net", required=True, help="net file")
        p.add_argument("--from", required=True, help="initial marking file")
        if with_to:
            p.add_argument("--to", required=True, help="final marking file")

    p = sub.add_parser("check", help="decide reachability")
    p.add_argument("--mode", choices=(MODE_Q, MODE_QPLUS), default=MODE_QPLUS)
    instance_flags(p)
    p.add_argument("--witness", help="write the witness run here if reachable")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("validate", help="validate a run between two markings")
    p.add_argument("--mode", choices=(MODE_Q, MODE_QPLUS), default=MODE_QPLUS)
    instance_flags(p)
    p.add_argument("--run", required=True, help="run file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("transform", help="net transformations")
    p.add_argument("--loopless", action="store_true", required=True)
    p.add_argument("--net", required=True)
    p.add_argument("--from", default=None, help="initial marking file")
    p.add_argument("--to", default=None, help="final marking file")
    p.add_argument("--out-net", default=None)
    p.add_argument("--out-from", default=None)
    p.add_argument("--out-to", default=None)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("reduce-data",
                       help="shrink the data values used by a run")
    p.add_argument("--mode", choices=(MODE_Q, MODE_QPLUS), default=MODE_QPLUS)
    instance_flags(p)
    p.add_argument("--run", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_reduce_data)

    p = sub.add_parser("oracle", help="generate a random fireable run")
    p.add_argument("--net", required=True)
    p.add_argument("--from", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--data", type=int, default=4)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("hist", help="decompose a histogram file")
    p.add_argument("--histogram", required=True)
    p.set_defaults(func=_cmd_hist)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args, sys.stdout)
    except InternalError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return 3
    except UdpnError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
