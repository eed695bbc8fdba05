"""Command line interface: ``njcones {run,simulate,count,enumerate,paths}``."""
from __future__ import annotations

import argparse
import sys
import time

from ..combinat import (ENUMERATE_MAX_N, count_nj_paths, enumerate_agglomerated_trees,
                        enumerate_nj_paths, nj_to_motzkin, phi, unrooted_binary_trees)
from ..dissim import DissimilarityMap, read_matrix
from ..errors import DissimilarityError, NJConesError, ParseError, TooLarge
from ..newick import serialize, strip_labels, strip_order
from ..nj_core import TieBreakPolicy, nj_path, run_nj
from ..rng import stream
from .report import emit_report
from .simulate import MAX_SIMULATE_N, SampleSpec, simulate

EXIT_CONFIG = 2
EXIT_INPUT = 3

POLICIES = ["lex", "uniform", "baggage"]


class ConfigError(NJConesError):
    pass


def run_report(dmap: DissimilarityMap, policy="lex", seed: int = 0, trace: bool = False) -> str:
    policy = TieBreakPolicy.parse(policy)
    rng = stream(seed, 0) if policy.randomized else None
    res = run_nj(dmap, policy, rng)
    path = nj_path(res.trace)
    names = dmap.labels
    lines = [
        f"tree: {serialize(res.tree)}",
        f"unordered: {strip_labels(res.tree)}",
        f"topology: {strip_order(res.tree)}",
        f"nj_path: {path.word() or '-'}",
        f"motzkin: {nj_to_motzkin(path).word() or '-'}",
        f"partner: {serialize(res.partner)}",
    ]
    if trace:
        def bough(i):
            return names[i] if i < dmap.n else f"u{i - dmap.n + 1}"

        lines.append("trace:")
        for e in res.trace.events:
            a, b = (bough(x) for x in e.pair)
            lines.append(f"  step {e.step}: join {a},{b}  {e.step_class.symbol}  "
                         f"bough vector before {e.before.as_tuple()}")
        ft = res.trace.final_tie
        if ft is not None:
            tied = " vs ".join("{" + ",".join(bough(x) for x in p) + "}" for p in ft.pairs)
            lines.append(f"  final tie: {tied}; chose {'{' + ','.join(bough(x) for x in ft.pairs[ft.chosen]) + '}'}")
    return "\n".join(lines) + "\n"


def count_report(n: int) -> str:
    p = phi(n)
    return (f"taxa: {n}\n"
            f"unrooted_binary_trees: {unrooted_binary_trees(n)}\n"
            f"trees_from_nj: {p // 2}\n"
            f"ordered_newick_strings: {p}\n"
            f"nj_paths: {count_nj_paths(n)}\n")


def _write(data: bytes, out):
    if out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="njcones", description="Neighbor-Joining cones and agglomeration orders")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo cone fractions")
    s.add_argument("--taxa", type=int, required=True)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--policy", choices=POLICIES, default="uniform")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--format", choices=["csv", "json", "text"], default="csv")
    s.add_argument("--out", default=None)
    s.add_argument("--backend", choices=["numba", "numpy"], default=None)
    s.add_argument("--allow-large", action="store_true", help=f"permit more than {MAX_SIMULATE_N} taxa")

    r = sub.add_parser("run", help="run NJ on one matrix")
    r.add_argument("--matrix", required=True)
    r.add_argument("--format", choices=["csv", "phylip"], default=None)
    r.add_argument("--policy", choices=POLICIES, default="lex")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trace", action="store_true")

    c = sub.add_parser("count", help="exact counts for n taxa")
    c.add_argument("--taxa", type=int, required=True)

    e = sub.add_parser("enumerate", help="list every agglomerated tree")
    e.add_argument("--taxa", type=int, required=True)
    e.add_argument("--out", default=None)
    e.add_argument("--allow-large", action="store_true")

    q = sub.add_parser("paths", help="list NJ paths and their Motzkin images")
    q.add_argument("--taxa", type=int, required=True)
    return p


def _need_taxa(n: int):
    if n < 4:
        raise ConfigError("--taxa must be at least 4")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            _need_taxa(args.taxa)
            if args.samples < 1:
                raise ConfigError("--samples must be positive")
            if args.workers is not None and args.workers < 1:
                raise ConfigError("--workers must be positive")
            spec = SampleSpec(args.taxa, args.samples, args.seed, args.policy)
            t0 = time.perf_counter()
            table = simulate(spec, workers=args.workers, backend=args.backend,
                             allow_large=args.allow_large)
            _write(emit_report(table, args.format), args.out)
            print(f"simulated {spec.count} samples in {time.perf_counter() - t0:.1f}s",
                  file=sys.stderr)
        elif args.command == "run":
            try:
                dmap = read_matrix(args.matrix, args.format)
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_INPUT
            if dmap.n < 4:
                raise DissimilarityError("NJ needs at least 4 taxa")
            sys.stdout.write(run_report(dmap, args.policy, args.seed, args.trace))
        elif args.command == "count":
            _need_taxa(args.taxa)
            sys.stdout.write(count_report(args.taxa))
        elif args.command == "enumerate":
            _need_taxa(args.taxa)
            trees = enumerate_agglomerated_trees(args.taxa, allow_large=args.allow_large)
            _write("".join(t + "\n" for t in sorted(trees)).encode(), args.out)
        elif args.command == "paths":
            _need_taxa(args.taxa)
            for path in enumerate_nj_paths(args.taxa):
                print(f"{path.word() or '-'}\t{nj_to_motzkin(path).word() or '-'}\tend={path.end}")
    except (ParseError, DissimilarityError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, TooLarge, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
