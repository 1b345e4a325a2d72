"""Command-line front end: gen, partition, curve, simulate.

Exit codes: 0 success, 1 input/validation error, 2 infeasible drop,
3 simulated constraint violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import IO

from .generators import FAMILIES, GeneratorSpec, generate_pipeline
from .graph import PGT, ResourceVector, ValidationError, completion_time, dump_pgt, load_pgt
from .partition import InfeasibleDropError, dump_solution, load_solution, partition
from .simulate import dump_trace_summary, simulate, write_trace_csv

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_VIOLATION = 3


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleDropError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagpart",
        description="Partition workflow DAGs under resource-capacity bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic graph")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--n", type=int, default=0, help="chain length")
    gen.add_argument("--width", type=int, default=0, help="parallel lanes")
    gen.add_argument("--layers", type=int, default=0, help="alternating data/compute layers")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--exec-range", type=float, nargs=2, default=(1.0, 1.0), metavar=("LO", "HI"))
    gen.add_argument("--volume-range", type=float, nargs=2, default=(1.0, 1.0), metavar=("LO", "HI"))
    gen.add_argument("--cores-range", type=int, nargs=2, default=(1, 1), metavar=("LO", "HI"))
    gen.add_argument("--memory-range", type=int, nargs=2, default=(0, 0), metavar=("LO", "HI"))
    gen.add_argument("--bandwidth", type=float, default=1.0)
    gen.add_argument("--output", default=None, help="graph JSON path (default stdout)")
    gen.set_defaults(func=cmd_gen)

    part = sub.add_parser("partition", help="partition a graph and write the solution")
    _add_capacity_args(part)
    part.add_argument("--input", required=True, help="graph JSON path")
    part.add_argument("--output", default=None, help="solution JSON path")
    part.set_defaults(func=cmd_partition)

    curve = sub.add_parser("curve", help="write the (partition count, completion time) curve")
    _add_capacity_args(curve)
    curve.add_argument("--input", required=True, help="graph JSON path")
    curve.add_argument("--output", default=None, help="CSV path (default stdout)")
    curve.set_defaults(func=cmd_curve)

    sim = sub.add_parser("simulate", help="simulate a graph under a solution")
    sim.add_argument("--input", required=True, help="graph JSON path")
    sim.add_argument("--solution", required=True, help="solution JSON path")
    sim.add_argument("--output", default=None, help="trace CSV path (default stdout)")
    sim.add_argument("--summary", default=None, help="optional summary JSON path")
    sim.set_defaults(func=cmd_simulate)
    return parser


def _add_capacity_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cores", type=int, required=True, help="capacity: cores per partition")
    p.add_argument("--memory-mb", type=int, required=True, help="capacity: memory per partition")


def _capacity(args) -> ResourceVector:
    return ResourceVector(cores=args.cores, memory_mb=args.memory_mb)


def _load_graph(path: str) -> PGT:
    with open(path, "rb") as fp:
        return load_pgt(fp)


def _open_out(path: str | None) -> IO:
    if path is None:
        return sys.stdout
    return open(path, "w", newline="")


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        family=args.family,
        n=args.n,
        width=args.width,
        layers=args.layers,
        exec_range=tuple(args.exec_range),
        volume_range=tuple(args.volume_range),
        cores_range=tuple(args.cores_range),
        memory_range=tuple(args.memory_range),
        bandwidth=args.bandwidth,
        seed=args.seed,
    )
    g = generate_pipeline(spec)
    out = _open_out(args.output)
    try:
        dump_pgt(g, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_partition(args) -> int:
    g = _load_graph(args.input)
    solution = partition(g, _capacity(args))
    if args.output is not None:
        with open(args.output, "w") as fp:
            dump_solution(solution, fp)
    print(f"m_star: {solution.m_star}")
    print(f"t_star: {solution.t_star}")
    for p in solution.partitions:
        wmax = " ".join(f"{d}={p.wmax[d]}" for d in p.wmax.dims)
        print(f"partition {p.id}: {len(p.members)} drops, wmax {wmax}")
    return EXIT_OK


def cmd_curve(args) -> int:
    g = _load_graph(args.input)
    initial_t = completion_time(g, {d.id: i for i, d in enumerate(g.drops)})
    solution = partition(g, _capacity(args))
    out = _open_out(args.output)
    try:
        writer = csv.writer(out)
        writer.writerow(["m", "t"])
        writer.writerow([len(g), initial_t])
        for m, t in solution.merge_trace:
            writer.writerow([m, t])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = _load_graph(args.input)
    with open(args.solution, "rb") as fp:
        solution = load_solution(fp, g)
    trace = simulate(g, solution)
    out = _open_out(args.output)
    try:
        write_trace_csv(trace, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.summary is not None:
        with open(args.summary, "w") as fp:
            dump_trace_summary(trace, fp)

    capacity = solution.capacity
    violations = []
    for pid in sorted(trace.profiles):
        peak = trace.peak(pid)
        if not peak <= capacity:
            violations.append(pid)
    if violations:
        print(f"constraint violation: partitions {violations} exceed capacity", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
