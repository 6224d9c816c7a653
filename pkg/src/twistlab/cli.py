"""Command line front end."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import yaml

from .harness import (DEFAULT_SEED, SUITES, Config, default_threads, exit_status, format_records,
                      format_table, load_config, primitive_verdict, run_suite)
from .specio import SpecError, resolve_instance, serialize
from .twisted import TwistError

FAMILY_HELP = ("trivial-phi T P | nonfaithful n R | diagonal T | almost-simple k | "
               "blowup <instance> K")


def _emit(obj, fmt: str) -> None:
    if fmt == "records":
        print(json.dumps(obj, default=str, sort_keys=True))
    else:
        print(yaml.safe_dump(json.loads(json.dumps(obj, default=str)), sort_keys=False).rstrip())


def _load(args):
    return resolve_instance(args.spec, args.seed)


def cmd_construct(args) -> int:
    D = _load(args)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(serialize(D))
    _emit(D.summary(), args.format)
    return 0


def cmd_classify(args) -> int:
    from .primitive import block_oracle
    from .structure import classify_action

    D = _load(args)
    verdict, how = primitive_verdict(D)
    info = classify_action(D.P, D.k)
    out = {"instance": D.name, "primitive": verdict, "method": how,
           "top_group": {"transitive": info.transitive, "primitive": info.primitive,
                         "quasiprimitive": info.quasiprimitive, "semiprimitive": info.semiprimitive,
                         "soluble": info.soluble}}
    if args.oracle:
        if D.B_size() > 1_000_000:
            out["oracle"] = "skipped: |B| > 10^6"
        else:
            prim, block = block_oracle(D)
            out["oracle"] = {"primitive": prim, "block_size": None if block is None else len(block)}
    _emit(out, args.format)
    return 0


def cmd_base(args) -> int:
    from .base import bounds_report

    D = _load(args)
    verdict, _ = primitive_verdict(D) if args.primitivity else (None, "")
    rep = bounds_report(D, primitive=verdict, budget=args.budget, seed=args.seed)
    _emit(rep.as_dict(), args.format)
    return 0


def cmd_dist(args) -> int:
    from .dist import dist_bounds, dist_exact
    from .specio import named_group, parse_group

    if args.group:
        try:
            G = named_group(args.group)
        except ValueError:
            with open(args.group) as fh:
                G = parse_group(yaml.safe_load(fh), args.group)
        m = None
    else:
        D = _load(args)
        G, m = D.P, D.k
    res = dist_exact(G, m, seed=args.seed)
    b = dist_bounds(G, m, res.d if res.proven else None)
    out = {"d": res.d, "proven": res.proven, "method": res.method, "lower": res.lower,
           "witness": None if res.witness is None else (res.witness.labels + 1).tolist(),
           "sandwich": b.sandwich, "summary": b.summary, "notes": res.notes + b.notes}
    _emit(out, args.format)
    return 0


def cmd_prob(args) -> int:
    from .prob import q_montecarlo

    if not 1 <= args.b <= 4:
        print("error: --b must be between 1 and 4", file=sys.stderr)
        return 2
    D = _load(args)
    est = q_montecarlo(D, args.b, trials=args.trials, seed=args.seed, threads=args.threads)
    _emit(est.as_dict(), args.format)
    return 0


def cmd_balanced(args) -> int:
    from .primitive import balanced_subgroups, is_minimal_twisted, minimal_balanced, quotient_build

    D = _load(args)
    bal = balanced_subgroups(D)
    out = {"instance": D.name,
           "balanced": [{"order": b.group.order(), "block_size": len(b.block),
                         "block": " ".join(str(p + 1) for p in b.block)} for b in bal],
           "minimal_twisted": is_minimal_twisted(D, bal)}
    if args.quotient and not out["minimal_twisted"]:
        mins = minimal_balanced([b for b in bal if 2 <= len(b.block) < D.k])
        if mins:
            Dq = quotient_build(D, mins[0].group, mins[0].block, check_minimal=False)
            out["quotient"] = Dq.summary()
        else:
            out["quotient"] = "none: every proper balanced subgroup has a one-point block"
    _emit(out, args.format)
    return 0


def cmd_examples(args) -> int:
    params = ",".join(args.params)
    name = f"{args.family}({params})"
    D = resolve_instance(name, args.seed)
    text = serialize(D)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text.rstrip())
    return 0


def cmd_verify(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = Config(args.suite or list(SUITES), args.instance or [], seed=args.seed, budget=args.budget)
        if not cfg.instances:
            from .harness import DEFAULT_INSTANCES
            cfg.instances = list(DEFAULT_INSTANCES)
    cfg.threads = args.threads
    if args.trials is not None:
        cfg.trials = args.trials
    rows = run_suite(cfg)
    print(format_table(rows) if args.format == "text" else format_records(rows))
    if args.records:
        with open(args.records, "w") as fh:
            fh.write(format_records(rows) + "\n")
    return exit_status(rows)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistlab", description="Twisted wreath product toolkit")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--threads", type=int, default=default_threads())
    p.add_argument("--format", choices=("text", "records"), default="text")
    # the same flags are accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("text", "records"), default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="cmd", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    def with_spec(sp):
        sp.add_argument("--spec", required=True, help="spec file or built-in instance such as diagonal(A5)")
        return sp

    s = with_spec(sub.add_parser("construct", help="build and validate a datum"))
    s.add_argument("--out", help="write the normalised spec here")
    s.set_defaults(func=cmd_construct)

    s = with_spec(sub.add_parser("classify", help="primitivity verdict"))
    s.add_argument("--oracle", action="store_true", help="also run the block oracle when |B| <= 10^6")
    s.set_defaults(func=cmd_classify)

    s = with_spec(sub.add_parser("base", help="base size bounds and witnesses"))
    s.add_argument("--primitivity", action="store_true", help="apply the primitive refinements")
    s.set_defaults(func=cmd_base)

    s = sub.add_parser("dist", help="distinguishing number of the top group or of a group")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec")
    g.add_argument("--group", help="named group (S5, A6, C7, D4) or group spec file")
    s.set_defaults(func=cmd_dist)

    s = with_spec(sub.add_parser("prob", help="Q(G, b) bounds and estimate"))
    s.add_argument("--b", type=int, default=2)
    s.add_argument("--trials", type=int, default=10_000)
    s.set_defaults(func=cmd_prob)

    s = with_spec(sub.add_parser("balanced", help="balanced subgroups"))
    s.add_argument("--quotient", action="store_true", help="build the quotient by a minimal balanced subgroup")
    s.set_defaults(func=cmd_balanced)

    s = sub.add_parser("examples", help="emit a spec file for a built-in family")
    s.add_argument("--family", required=True,
                   choices=("trivial-phi", "nonfaithful", "diagonal", "almost-simple", "blowup"))
    s.add_argument("--params", nargs="+", required=True, help=FAMILY_HELP)
    s.add_argument("--out")
    s.set_defaults(func=cmd_examples)

    s = sub.add_parser("verify", help="run verification suites")
    s.add_argument("--config", help="YAML with suites, instances, seed, budget")
    s.add_argument("--suite", action="append", choices=SUITES)
    s.add_argument("--instance", action="append")
    s.add_argument("--trials", type=int)
    s.add_argument("--records", help="also write line records here")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, TwistError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
