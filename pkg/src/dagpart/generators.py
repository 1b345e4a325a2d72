"""Synthetic workflow graph families: chain, fork-join, layered-imaging.

Generation is deterministic for a fixed spec (including the seed), so a
spec can serve as a reproducible fixture or benchmark input.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .graph import PGT, DataflowEdge, Drop, ResourceVector

FAMILIES = ("chain", "fork-join", "layered-imaging")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for one synthetic graph family.

    ``n`` sizes a chain, ``width`` sizes fork-join and layered-imaging,
    ``layers`` counts the alternating data/compute layers of
    layered-imaging.  Ranges are inclusive and sampled uniformly.
    """

    family: str
    n: int = 0
    width: int = 0
    layers: int = 0
    exec_range: tuple[float, float] = (1.0, 1.0)
    volume_range: tuple[float, float] = (1.0, 1.0)
    cores_range: tuple[int, int] = (1, 1)
    memory_range: tuple[int, int] = (0, 0)
    cross_probability: float = 0.25
    bandwidth: float = 1.0
    seed: int = 0


def generate_pipeline(spec: GeneratorSpec) -> PGT:
    """Build the graph described by ``spec``; deterministic per seed."""
    if spec.family not in FAMILIES:
        raise ValueError(f"unknown generator family {spec.family!r}")
    if spec.bandwidth <= 0:
        raise ValueError(f"bandwidth must be > 0, got {spec.bandwidth}")
    for lo, hi, name in (
        (*spec.exec_range, "exec_range"),
        (*spec.volume_range, "volume_range"),
        (*spec.cores_range, "cores_range"),
        (*spec.memory_range, "memory_range"),
    ):
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid {name} ({lo}, {hi})")
    rng = random.Random(spec.seed)
    if spec.family == "chain":
        return _chain(spec, rng)
    if spec.family == "fork-join":
        return _fork_join(spec, rng)
    return _layered_imaging(spec, rng)


def _exec(spec: GeneratorSpec, rng: random.Random) -> float:
    lo, hi = spec.exec_range
    return lo if lo == hi else rng.uniform(lo, hi)


def _volume(spec: GeneratorSpec, rng: random.Random) -> float:
    lo, hi = spec.volume_range
    return lo if lo == hi else rng.uniform(lo, hi)


def _compute_demand(spec: GeneratorSpec, rng: random.Random) -> ResourceVector:
    return ResourceVector(
        cores=rng.randint(*spec.cores_range),
        memory_mb=rng.randint(*spec.memory_range),
    )


def _data_demand(spec: GeneratorSpec, rng: random.Random) -> ResourceVector:
    # Data drops hold no cores; they may pin memory for their payload.
    return ResourceVector(cores=0, memory_mb=rng.randint(*spec.memory_range))


def _chain(spec: GeneratorSpec, rng: random.Random) -> PGT:
    if spec.n <= 0:
        raise ValueError(f"chain needs n >= 1, got {spec.n}")
    drops = [
        Drop(f"n{i:04d}", "compute", _exec(spec, rng), _compute_demand(spec, rng))
        for i in range(spec.n)
    ]
    edges = [
        DataflowEdge(drops[i].id, drops[i + 1].id, _volume(spec, rng))
        for i in range(spec.n - 1)
    ]
    return PGT(drops, edges, spec.bandwidth)


def _fork_join(spec: GeneratorSpec, rng: random.Random) -> PGT:
    if spec.width <= 0:
        raise ValueError(f"fork-join needs width >= 1, got {spec.width}")
    root = Drop("data0000", "data", _exec(spec, rng), _data_demand(spec, rng))
    workers = [
        Drop(f"work{i:04d}", "compute", _exec(spec, rng), _compute_demand(spec, rng))
        for i in range(spec.width)
    ]
    join = Drop("join0000", "data", _exec(spec, rng), _data_demand(spec, rng))
    edges = [DataflowEdge(root.id, w.id, _volume(spec, rng)) for w in workers]
    edges += [DataflowEdge(w.id, join.id, _volume(spec, rng)) for w in workers]
    return PGT([root, *workers, join], edges, spec.bandwidth)


def _layered_imaging(spec: GeneratorSpec, rng: random.Random) -> PGT:
    """Alternating data/compute layers of equal width, in the style of a
    multi-stage imaging pipeline.

    Every vertex consumes its same-lane predecessor; extra cross-lane edges
    from the previous layer are added with ``cross_probability``.
    """
    if spec.width <= 0 or spec.layers <= 0:
        raise ValueError(f"layered-imaging needs width >= 1 and layers >= 1, got width={spec.width} layers={spec.layers}")
    drops: list[Drop] = []
    grid: list[list[str]] = []
    for layer in range(spec.layers):
        row = []
        for lane in range(spec.width):
            drop_id = f"l{layer:03d}n{lane:03d}"
            if layer % 2 == 0:
                drop = Drop(drop_id, "data", _exec(spec, rng), _data_demand(spec, rng))
            else:
                drop = Drop(drop_id, "compute", _exec(spec, rng), _compute_demand(spec, rng))
            drops.append(drop)
            row.append(drop_id)
        grid.append(row)

    edges: list[DataflowEdge] = []
    for layer in range(1, spec.layers):
        for lane in range(spec.width):
            edges.append(DataflowEdge(grid[layer - 1][lane], grid[layer][lane], _volume(spec, rng)))
            if spec.width > 1 and rng.random() < spec.cross_probability:
                other = rng.randrange(spec.width - 1)
                if other >= lane:
                    other += 1
                edges.append(DataflowEdge(grid[layer - 1][other], grid[layer][lane], _volume(spec, rng)))
    return PGT(drops, edges, spec.bandwidth)
