"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import arrival as arr
from .capacity import async_cpuc, async_cpuc_delay, gaussian_cpuc, sync_cpuc
from .channel import Channel, GaussianChannel, detect_infinite_cpuc, validate
from .errors import (AsyncCpucError, NonConvergence, NonConvergentSequence,
                     RejectionBudgetExceeded)
from .simulator import rows_to_csv, sweep_rate

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
_NUMERIC = (NonConvergence, NonConvergentSequence, RejectionBudgetExceeded, ArithmeticError)


class _Invalid(Exception):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ASYNCCPUC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _Invalid(f"ASYNCCPUC_SEED={env!r} is not an integer")


def _channel(args) -> Channel:
    if not args.channel:
        raise _Invalid("--channel is required")
    path = Path(args.channel)
    if not path.exists():
        raise _Invalid(f"channel file {path} does not exist")
    try:
        ch = Channel.load(path)
    except json.JSONDecodeError as e:
        raise _Invalid(f"{path}: malformed JSON ({e})")
    validate(ch)
    return ch


def _arrival_spec(args) -> dict:
    if args.arrival:
        text = args.arrival
        if Path(text).exists():
            text = Path(text).read_text()
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as e:
            raise _Invalid(f"--arrival: malformed JSON ({e})")
    elif args.channel:
        raw = json.loads(Path(args.channel).read_text())
        if "arrival" not in raw:
            raise _Invalid("no --arrival given and the channel file has no 'arrival' key")
        spec = raw["arrival"]
    else:
        raise _Invalid("--arrival is required")
    if not isinstance(spec, dict) or "family" not in spec:
        raise _Invalid("arrival spec must be an object with a 'family' key")
    return spec


def _out(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt_p(ch: Channel, p) -> str:
    return ", ".join(f"{lab}={v:.6g}" for lab, v in zip(ch.inputs, p))


def _check_beta(b: float) -> float:
    if not (b >= 0 and math.isfinite(b)):
        raise _Invalid(f"beta must be a finite number >= 0, got {b}")
    return b


def cmd_validate(args) -> int:
    ch = _channel(args)
    print(f"channel: {len(ch.inputs)} inputs, {len(ch.outputs)} outputs, "
          f"idle symbol {ch.inputs[ch.star]!r} ({'usable' if ch.usable_star else 'not usable'})")
    print("stochastic rows: ok")
    print(f"infinite capacity per unit cost: {'yes' if detect_infinite_cpuc(ch) else 'no'}")
    return EXIT_OK


def cmd_capacity(args) -> int:
    beta = _check_beta(args.beta[0] if args.beta else 0.0)
    if args.n0 is not None:
        g = GaussianChannel(args.n0)
        print(f"gaussian N0={args.n0} beta={beta}")
        print(f"value: {gaussian_cpuc(g, beta):.6f}")
        return EXIT_OK
    ch = _channel(args)
    res = async_cpuc(ch, beta)
    print(f"beta: {beta}")
    print(f"value: {res.value:.6f}")
    print(f"optimizer: {_fmt_p(ch, res.optimizer)}{'' if res.attained else ' (limit)'}")
    print(f"binding: {res.binding_term}")
    if beta == 0:
        print(f"sync value: {sync_cpuc(ch).value:.6f}")
    if args.delta is not None:
        if not 0 < args.delta < beta:
            raise _Invalid(f"need 0 < delta < beta, got delta={args.delta}")
        d = async_cpuc_delay(ch, beta, args.delta)
        print(f"delta: {args.delta}")
        print(f"value at delta: {d.value:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    ch = _channel(args)
    betas = [_check_beta(b) for b in (args.beta or [])]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "capacity", "binding_term"])
    for b in betas:
        res = async_cpuc(ch, b)
        w.writerow([repr(float(b)), repr(float(res.value)), res.binding_term])
    _out(args, buf.getvalue())
    return EXIT_OK


def cmd_simulate(args) -> int:
    ch = _channel(args)
    if args.trials is None or args.trials < 1:
        raise _Invalid("--trials must be >= 1")
    if args.bits is None or args.bits[0] < 1:
        raise _Invalid("--bits must be >= 1")
    beta = _check_beta(args.beta[0] if args.beta else 0.0)
    rhos = args.rho or [0.5]
    for r in rhos:
        if not 0 < r <= 2:
            raise _Invalid(f"--rho values must lie in (0, 2], got {r}")
    delta = args.delta or 0.0
    policy = "wait_multiple" if delta > 0 else "immediate"
    if delta and not 0 < delta < beta:
        raise _Invalid(f"need 0 < delta < beta, got delta={delta}")
    rows = sweep_rate(ch, beta, args.bits[0], rhos, args.trials, seed=_seed(args),
                      policy=policy, delta=delta, epsilon=args.epsilon,
                      threads=args.threads)
    _out(args, rows_to_csv(rows))
    return EXIT_OK


def cmd_arrival(args) -> int:
    spec = _arrival_spec(args)
    try:
        model = arr.ArrivalModel.from_dict(spec)
    except (KeyError, TypeError) as e:
        raise _Invalid(f"bad arrival spec: {e}")
    Bs = args.bits or [8, 12, 16, 20]
    est = arr.beta_bar(model, Bs)
    print(f"family: {model.family}")
    print(f"beta_bar: {est.value:.6f}")
    print(f"residual: {est.residual:.3g} (schedule {est.schedule})")
    print("B, log2 S / B, H / B")
    for B, h in zip(Bs, est.normalized_entropy):
        print(f"{B}, {est.sequences[est.schedule][Bs.index(B)]:.6f}, {h:.6f}")
    if args.channel:
        ch = _channel(args)
        print(f"effective capacity: {async_cpuc(ch, est.value).value:.6f}")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "capacity": cmd_capacity, "sweep": cmd_sweep,
            "simulate": cmd_simulate, "arrival": cmd_arrival}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asynccpuc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--channel", help="channel spec JSON file")
        s.add_argument("--beta", type=float, nargs="*",
                       help="timing uncertainty per bit (sweep takes a list)")
        s.add_argument("--delta", type=float, help="delay exponent, 0 < delta < beta")
        s.add_argument("--bits", type=int, nargs="*", help="message bits B (arrival: a list)")
        s.add_argument("--rho", type=float, nargs="*", help="rate fractions in (0, 2]")
        s.add_argument("--trials", type=int)
        s.add_argument("--seed", type=int, help="defaults to $ASYNCCPUC_SEED, then 0")
        s.add_argument("--epsilon", type=float, default=0.1)
        s.add_argument("--out", help="write CSV here instead of stdout")
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--arrival", help="arrival model JSON (inline or a file path)")
        s.add_argument("--n0", type=float, help="Gaussian channel noise parameter")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _NUMERIC as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (_Invalid, AsyncCpucError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
