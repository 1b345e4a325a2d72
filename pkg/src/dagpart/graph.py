"""Workflow DAG data model: drops, dataflow edges, graphs, and path metrics.

A graph holds two kinds of vertices ("drops"): compute tasks and data items.
Edges carry the volume of data moving between drops; crossing a partition
boundary costs ``volume / bandwidth`` time units, staying inside a partition
costs nothing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Hashable, Iterable, Mapping

DROP_KINDS = ("compute", "data")

# JSON schema: exact key sets, anything else is rejected.
_TOP_KEYS = {"bandwidth", "drops", "edges"}
_DROP_KEYS = {"id", "kind", "exec_time", "demand"}
_EDGE_KEYS = {"src", "dst", "volume"}
_DEMAND_KEYS = ("cores", "memory_mb")


class ValidationError(ValueError):
    """A graph, assignment, or serialized document violates an invariant."""


class ResourceVector:
    """Ordered, named, non-negative integer resource amounts.

    ``cores`` and ``memory_mb`` are always present; extra dimensions may be
    supplied as keyword arguments.  Addition is per-dimension; ``a <= b``
    means per-dimension less-or-equal in every dimension (a partial order).
    """

    __slots__ = ("_dims", "_vals")

    def __init__(self, cores: int = 0, memory_mb: int = 0, **extra: int):
        items = [("cores", cores), ("memory_mb", memory_mb)]
        items.extend(extra.items())
        for name, value in items:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"resource dimension {name!r} must be an integer, got {value!r}")
            if value < 0:
                raise ValidationError(f"resource dimension {name!r} must be >= 0, got {value}")
        self._dims = tuple(name for name, _ in items)
        self._vals = tuple(value for _, value in items)

    @property
    def dims(self) -> tuple[str, ...]:
        return self._dims

    def __getitem__(self, dim: str) -> int:
        try:
            return self._vals[self._dims.index(dim)]
        except ValueError:
            raise KeyError(dim) from None

    def values(self) -> tuple[int, ...]:
        return self._vals

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self._dims, self._vals))

    @classmethod
    def from_dict(cls, data: Mapping[str, int]) -> "ResourceVector":
        missing = [d for d in _DEMAND_KEYS if d not in data]
        if missing:
            raise ValidationError(f"resource vector missing dimensions {missing}")
        extra = {k: v for k, v in data.items() if k not in _DEMAND_KEYS}
        return cls(cores=data["cores"], memory_mb=data["memory_mb"], **extra)

    def _check_dims(self, other: "ResourceVector") -> None:
        if self._dims != other._dims:
            raise ValidationError(f"mismatched resource dimensions: {self._dims} vs {other._dims}")

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        self._check_dims(other)
        summed = dict(zip(self._dims, (a + b for a, b in zip(self._vals, other._vals))))
        return ResourceVector(**summed)

    def __le__(self, other: "ResourceVector") -> bool:
        self._check_dims(other)
        return all(a <= b for a, b in zip(self._vals, other._vals))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResourceVector):
            return NotImplemented
        return self._dims == other._dims and self._vals == other._vals

    def __hash__(self) -> int:
        return hash((self._dims, self._vals))

    def __repr__(self) -> str:
        inner = ", ".join(f"{d}={v}" for d, v in zip(self._dims, self._vals))
        return f"ResourceVector({inner})"


@dataclass(frozen=True)
class Drop:
    """A workflow vertex: a compute task or a data item."""

    id: str
    kind: str
    exec_time: float
    demand: ResourceVector

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError(f"drop id must be a non-empty string, got {self.id!r}")
        if self.kind not in DROP_KINDS:
            raise ValidationError(f"drop {self.id!r} has unknown kind {self.kind!r}")
        _check_number("exec_time", self.exec_time, minimum=0.0, owner=f"drop {self.id!r}")


@dataclass(frozen=True)
class DataflowEdge:
    """A directed data movement between two drops, weighted by data volume."""

    src: str
    dst: str
    volume: float

    def __post_init__(self):
        if self.src == self.dst:
            raise ValidationError(f"self-loop edge on drop {self.src!r}")
        _check_number("volume", self.volume, minimum=0.0, owner=f"edge {self.src!r}->{self.dst!r}")


def _check_number(field: str, value, minimum: float, owner: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{owner}: {field} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{owner}: {field} must be finite, got {value!r}")
    if not value >= minimum:
        raise ValidationError(f"{owner}: {field} must be >= {minimum}, got {value!r}")


class PGT:
    """An immutable, validated DAG of drops with volume-weighted edges.

    Validation covers: non-empty drop set, unique drop ids, edge endpoints
    that exist, unique (src, dst) pairs, and acyclicity (checked by
    topological sort).  ``bandwidth`` converts edge volume to time for
    inter-partition edges.
    """

    def __init__(self, drops: Iterable[Drop], edges: Iterable[DataflowEdge], bandwidth: float = 1.0):
        self.drops: tuple[Drop, ...] = tuple(drops)
        self.edges: tuple[DataflowEdge, ...] = tuple(edges)
        if isinstance(bandwidth, bool) or not isinstance(bandwidth, (int, float)):
            raise ValidationError(f"bandwidth must be a number, got {bandwidth!r}")
        if not math.isfinite(bandwidth) or not bandwidth > 0:
            raise ValidationError(f"bandwidth must be > 0, got {bandwidth!r}")
        self.bandwidth = float(bandwidth)

        if not self.drops:
            raise ValidationError("graph contains no drops")
        self._index: dict[str, int] = {}
        for i, drop in enumerate(self.drops):
            if drop.id in self._index:
                raise ValidationError(f"duplicate drop id {drop.id!r}")
            self._index[drop.id] = i

        n = len(self.drops)
        self._succ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self._pred: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        seen_pairs: set[tuple[str, str]] = set()
        for ei, edge in enumerate(self.edges):
            for endpoint in (edge.src, edge.dst):
                if endpoint not in self._index:
                    raise ValidationError(f"edge {edge.src!r}->{edge.dst!r} references unknown drop {endpoint!r}")
            pair = (edge.src, edge.dst)
            if pair in seen_pairs:
                raise ValidationError(f"duplicate edge {edge.src!r}->{edge.dst!r}")
            seen_pairs.add(pair)
            u, v = self._index[edge.src], self._index[edge.dst]
            self._succ[u].append((v, ei))
            self._pred[v].append((u, ei))

        self._topo: tuple[int, ...] = self._topological_order()

    def _topological_order(self) -> tuple[int, ...]:
        n = len(self.drops)
        indeg = [len(p) for p in self._pred]
        queue = [i for i in range(n) if indeg[i] == 0]
        order: list[int] = []
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            order.append(u)
            for v, _ in self._succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        if len(order) != n:
            stuck = sorted(self.drops[i].id for i in range(n) if indeg[i] > 0)
            raise ValidationError(f"cycle detected involving drops {stuck}")
        return tuple(order)

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.drops)

    def __contains__(self, drop_id: str) -> bool:
        return drop_id in self._index

    def index_of(self, drop_id: str) -> int:
        return self._index[drop_id]

    def drop(self, drop_id: str) -> Drop:
        return self.drops[self._index[drop_id]]

    @property
    def drop_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.drops)

    @property
    def topological_order(self) -> tuple[str, ...]:
        return tuple(self.drops[i].id for i in self._topo)

    def successors(self, drop_id: str) -> tuple[str, ...]:
        return tuple(self.drops[v].id for v, _ in self._succ[self._index[drop_id]])

    def predecessors(self, drop_id: str) -> tuple[str, ...]:
        return tuple(self.drops[u].id for u, _ in self._pred[self._index[drop_id]])

    def induced(self, members: Iterable[str]) -> "PGT":
        """Subgraph on ``members``: those drops plus all edges between them."""
        idxs = sorted(self._index[m] for m in members)
        keep = set(idxs)
        drops = [self.drops[i] for i in idxs]
        edges = [
            self.edges[ei]
            for i in idxs
            for v, ei in self._succ[i]
            if v in keep
        ]
        edges.sort(key=lambda e: (self._index[e.src], self._index[e.dst]))
        return PGT(drops, edges, self.bandwidth)

    # -- precomputed arrays for path computations ---------------------------

    @cached_property
    def _exec_times(self) -> list[float]:
        return [float(d.exec_time) for d in self.drops]

    @cached_property
    def _edge_quads(self) -> list[tuple[int, int, float, float]]:
        # (src_idx, dst_idx, cost_if_cut, exec_time[dst]) ordered so that every
        # edge into a vertex appears before any edge out of it.
        pos = {v: k for k, v in enumerate(self._topo)}
        order = sorted(range(len(self.edges)), key=lambda ei: pos[self._index[self.edges[ei].dst]])
        quads = []
        for ei in order:
            edge = self.edges[ei]
            u, v = self._index[edge.src], self._index[edge.dst]
            quads.append((u, v, edge.volume / self.bandwidth, self._exec_times[v]))
        return quads

    @cached_property
    def _edge_quads_rev(self) -> list[tuple[int, int, float, float]]:
        # (src_idx, dst_idx, cost_if_cut, exec_time[src]) ordered so that every
        # edge out of a vertex appears before any edge into it.
        pos = {v: k for k, v in enumerate(self._topo)}
        order = sorted(range(len(self.edges)), key=lambda ei: -pos[self._index[self.edges[ei].src]])
        quads = []
        for ei in order:
            edge = self.edges[ei]
            u, v = self._index[edge.src], self._index[edge.dst]
            quads.append((u, v, edge.volume / self.bandwidth, self._exec_times[u]))
        return quads

    @cached_property
    def _edge_costs(self) -> list[float]:
        return [e.volume / self.bandwidth for e in self.edges]

    @cached_property
    def _reachability(self) -> "ReachabilityMatrix":
        return ReachabilityMatrix._compute(self)

    def to_json_dict(self) -> dict:
        return {
            "bandwidth": self.bandwidth,
            "drops": [
                {
                    "id": d.id,
                    "kind": d.kind,
                    "exec_time": d.exec_time,
                    "demand": d.demand.as_dict(),
                }
                for d in self.drops
            ],
            "edges": [{"src": e.src, "dst": e.dst, "volume": e.volume} for e in self.edges],
        }


class ReachabilityMatrix:
    """Transitive closure of a graph, stored as one bitmask row per drop.

    ``reaches(u, v)`` is true iff a directed path u -> v exists; by
    convention a drop never reaches itself.
    """

    def __init__(self, ids: tuple[str, ...], masks: list[int]):
        self._ids = ids
        self._index = {drop_id: i for i, drop_id in enumerate(ids)}
        self._masks = masks

    @classmethod
    def _compute(cls, g: PGT) -> "ReachabilityMatrix":
        n = len(g)
        masks = [0] * n
        for u in reversed(g._topo):
            acc = 0
            for v, _ in g._succ[u]:
                acc |= (1 << v) | masks[v]
            masks[u] = acc
        return cls(g.drop_ids, masks)

    def reaches(self, src: str, dst: str) -> bool:
        return bool(self._masks[self._index[src]] >> self._index[dst] & 1)

    def mask(self, drop_id: str) -> int:
        return self._masks[self._index[drop_id]]

    def index_masks(self) -> list[int]:
        return list(self._masks)


def reachability(g: PGT) -> ReachabilityMatrix:
    """Transitive closure of ``g`` (cached on the graph)."""
    return g._reachability


def completion_time(g: PGT, assignment: Mapping[str, Hashable]) -> float:
    """Length of the longest path under a drop -> partition assignment.

    Path length sums the execution time of every vertex on the path plus
    ``volume / bandwidth`` for each traversed edge whose endpoints sit in
    different partitions; intra-partition edges cost nothing.
    """
    part = []
    for d in g.drops:
        try:
            part.append(assignment[d.id])
        except KeyError:
            raise ValidationError(f"drop {d.id!r} missing from assignment") from None
    return completion_time_indexed(g, part)


def completion_time_indexed(g: PGT, part: list) -> float:
    """``completion_time`` with the assignment as a list aligned to ``g.drops``."""
    dist = list(g._exec_times)
    for u, v, cost, exec_v in g._edge_quads:
        cand = dist[u] + exec_v
        if part[u] != part[v]:
            cand += cost
        if cand > dist[v]:
            dist[v] = cand
    return max(dist)


def longest_path_dists(g: PGT, part: list) -> tuple[list[float], list[float], float]:
    """Per-drop longest path ending at / starting from each drop, plus the
    overall longest path length, under the given assignment.

    Both distances include the drop's own execution time, so an edge
    (u, v) lies on a path of length ``fwd[u] + cost(u, v) + bwd[v]``.
    """
    fwd = list(g._exec_times)
    for u, v, cost, exec_v in g._edge_quads:
        cand = fwd[u] + exec_v
        if part[u] != part[v]:
            cand += cost
        if cand > fwd[v]:
            fwd[v] = cand
    bwd = list(g._exec_times)
    for u, v, cost, exec_u in g._edge_quads_rev:
        cand = bwd[v] + exec_u
        if part[u] != part[v]:
            cand += cost
        if cand > bwd[u]:
            bwd[u] = cand
    return fwd, bwd, max(fwd)


# -- JSON serialization ------------------------------------------------------


def load_pgt(source: IO | bytes | str) -> PGT:
    """Parse and validate a graph from JSON text, bytes, or a file object.

    Raises ``ValidationError`` naming the offending element for schema
    violations (unknown keys, bad kinds, negative values, duplicate ids,
    dangling edges, cycles) and ``json.JSONDecodeError`` for malformed JSON.
    """
    if hasattr(source, "read"):
        data = json.load(source)
    elif isinstance(source, bytes):
        data = json.loads(source.decode("utf-8"))
    else:
        data = json.loads(source)
    return pgt_from_json_dict(data)


def pgt_from_json_dict(data) -> PGT:
    if not isinstance(data, dict):
        raise ValidationError(f"top-level document must be an object, got {type(data).__name__}")
    _check_keys("top-level object", data, _TOP_KEYS)
    if not isinstance(data["drops"], list):
        raise ValidationError("'drops' must be a list")
    if not isinstance(data["edges"], list):
        raise ValidationError("'edges' must be a list")

    drops = []
    for entry in data["drops"]:
        if not isinstance(entry, dict):
            raise ValidationError(f"drop entry must be an object, got {entry!r}")
        _check_keys(f"drop {entry.get('id')!r}", entry, _DROP_KEYS)
        demand = entry["demand"]
        if not isinstance(demand, dict):
            raise ValidationError(f"drop {entry['id']!r}: demand must be an object")
        _check_keys(f"drop {entry['id']!r} demand", demand, set(_DEMAND_KEYS))
        drops.append(
            Drop(
                id=entry["id"],
                kind=entry["kind"],
                exec_time=entry["exec_time"],
                demand=ResourceVector.from_dict(demand),
            )
        )

    edges = []
    for entry in data["edges"]:
        if not isinstance(entry, dict):
            raise ValidationError(f"edge entry must be an object, got {entry!r}")
        _check_keys(f"edge {entry.get('src')!r}->{entry.get('dst')!r}", entry, _EDGE_KEYS)
        edges.append(DataflowEdge(src=entry["src"], dst=entry["dst"], volume=entry["volume"]))

    return PGT(drops, edges, data["bandwidth"])


def _check_keys(owner: str, obj: dict, allowed: set) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValidationError(f"{owner}: unknown keys {unknown}")
    missing = sorted(allowed - set(obj))
    if missing:
        raise ValidationError(f"{owner}: missing keys {missing}")


def dump_pgt(g: PGT, fp: IO | None = None) -> str:
    """Serialize a graph to the JSON wire format; returns the text."""
    text = json.dumps(g.to_json_dict(), indent=2)
    if fp is not None:
        fp.write(text)
        fp.write("\n")
    return text
