"""Deterministic as-soon-as-possible execution simulation.

A drop starts the instant every predecessor has finished and every incoming
inter-partition transfer (volume / bandwidth, starting at the producer's
finish) has arrived; intra-partition handover is free.  Resources inside a
partition are never a gate — the partitioner's antichain bound is what
justifies that — so the produced per-partition demand traces are exactly
the quantity that bound promises to cap.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, Iterable

from .graph import PGT, ResourceVector, ValidationError
from .partition import Partition, PartitionSolution


@dataclass(frozen=True)
class SimulationTrace:
    """Per-drop schedule plus per-partition aggregate demand step functions.

    ``profiles[pid]`` lists (time, ResourceVector) breakpoints; the vector
    holds from its time until the next breakpoint, and is all zero at and
    after the partition's last breakpoint.
    """

    starts: dict[str, float]
    finishes: dict[str, float]
    makespan: float
    profiles: dict[int, list[tuple[float, ResourceVector]]]

    def peak(self, pid: int) -> ResourceVector:
        """Element-wise maximum demand ever held by partition ``pid``."""
        points = self.profiles[pid]
        dims = points[0][1].dims if points else ("cores", "memory_mb")
        peak = dict.fromkeys(dims, 0)
        for _, vec in points:
            for d in dims:
                if vec[d] > peak[d]:
                    peak[d] = vec[d]
        return ResourceVector(**peak)


def simulate(g: PGT, solution: PartitionSolution) -> SimulationTrace:
    """Run the ASAP schedule for ``g`` under ``solution``'s assignment.

    The makespan equals ``completion_time(g, assignment)`` exactly: both
    evaluate the same longest-path recurrence.
    """
    assignment = solution.assignment
    part = []
    for d in g.drops:
        if d.id not in assignment:
            raise ValidationError(f"drop {d.id!r} has no partition in the solution")
        part.append(assignment[d.id])
    if len(assignment) != len(g):
        extra = sorted(set(assignment) - set(g.drop_ids))
        raise ValidationError(f"solution assigns drops not in the graph: {extra}")

    n = len(g)
    start = [0.0] * n
    finish = [0.0] * n
    inv_bw = 1.0 / g.bandwidth
    for i in g._topo:
        ready = 0.0
        for u, ei in g._pred[i]:
            arrival = finish[u]
            if part[u] != part[i]:
                arrival += g.edges[ei].volume * inv_bw
            if arrival > ready:
                ready = arrival
        start[i] = ready
        finish[i] = ready + g.drops[i].exec_time

    makespan = max(finish)
    dims = g.drops[0].demand.dims
    zero = dict.fromkeys(dims, 0)

    profiles: dict[int, list[tuple[float, ResourceVector]]] = {}
    for pid in sorted(set(part)):
        # Demand deltas at every start/finish instant; zero-duration drops
        # hold nothing.
        deltas: dict[float, list[int]] = {}
        for i in range(n):
            if part[i] != pid or finish[i] <= start[i]:
                continue
            demand = g.drops[i].demand
            for sign, at in ((+1, start[i]), (-1, finish[i])):
                row = deltas.setdefault(at, [0] * len(dims))
                for k, d in enumerate(dims):
                    row[k] += sign * demand[d]
        points: list[tuple[float, ResourceVector]] = []
        running = [0] * len(dims)
        for at in sorted(deltas):
            running = [a + b for a, b in zip(running, deltas[at])]
            points.append((at, ResourceVector(**dict(zip(dims, running)))))
        if not points or points[-1][0] < makespan:
            points.append((makespan, ResourceVector(**zero)))
        profiles[pid] = points

    return SimulationTrace(
        starts={g.drops[i].id: start[i] for i in range(n)},
        finishes={g.drops[i].id: finish[i] for i in range(n)},
        makespan=makespan,
        profiles=profiles,
    )


def concurrent_sets(
    trace: SimulationTrace, g: PGT, partition: Partition | Iterable[str]
) -> list[frozenset[str]]:
    """The set of drops executing together during each maximal constant
    interval of the partition's trace, in time order.

    Every returned set is an antichain of the partition's subgraph: a drop
    that reaches another always finishes before the other starts.  Idle
    intervals yield empty sets.
    """
    members = partition.members if isinstance(partition, Partition) else frozenset(partition)
    for m in members:
        if m not in g:
            raise ValidationError(f"partition member {m!r} is not in the graph")
    intervals = [
        (trace.starts[m], trace.finishes[m], m)
        for m in sorted(members)
        if trace.finishes[m] > trace.starts[m]
    ]
    cuts = sorted({t for s, f, _ in intervals for t in (s, f)})
    return [
        frozenset(m for s, f, m in intervals if s <= lo and f >= hi)
        for lo, hi in zip(cuts, cuts[1:])
    ]


def write_trace_csv(trace: SimulationTrace, fp: IO) -> None:
    """Rows of ``partition_id,time,cores,memory_mb`` at every breakpoint."""
    dims = ("cores", "memory_mb")
    for points in trace.profiles.values():
        if points:
            dims = points[0][1].dims
            break
    writer = csv.writer(fp)
    writer.writerow(["partition_id", "time", *dims])
    for pid in sorted(trace.profiles):
        for at, vec in trace.profiles[pid]:
            writer.writerow([pid, at, *(vec[d] for d in dims)])


def trace_summary(trace: SimulationTrace) -> dict:
    """Makespan plus each partition's peak demand, JSON-ready."""
    return {
        "makespan": trace.makespan,
        "peaks": [
            {"partition": pid, **trace.peak(pid).as_dict()}
            for pid in sorted(trace.profiles)
        ],
    }


def dump_trace_summary(trace: SimulationTrace, fp: IO | None = None) -> str:
    text = json.dumps(trace_summary(trace), indent=2)
    if fp is not None:
        fp.write(text)
        fp.write("\n")
    return text
