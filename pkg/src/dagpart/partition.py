"""Greedy edge-zeroing partitioner with a per-partition concurrency bound.

Every drop starts in its own partition.  Edges are visited once, in
descending order of data volume; zeroing an edge proposes merging the two
partitions at its endpoints, and the merge is kept only if the merged
partition's maximum weighted antichain fits the capacity vector in every
resource dimension (the degree-of-parallelism constraint).  Because merges
only ever remove communication cost from paths, the completion time traced
after each accepted merge never increases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable

from .antichain import solve_max_weighted_antichain
from .graph import (
    PGT,
    ResourceVector,
    ValidationError,
    completion_time_indexed,
    longest_path_dists,
)


class InfeasibleDropError(ValueError):
    """A single drop's demand exceeds capacity; it can never be placed."""

    def __init__(self, drop_id: str, dim: str):
        super().__init__(f"drop {drop_id!r} demands more {dim} than the capacity provides")
        self.drop_id = drop_id
        self.dim = dim


@dataclass(frozen=True)
class Partition:
    """A set of co-located drops with its per-dimension antichain bound."""

    id: int
    members: frozenset[str]
    wmax: ResourceVector


class PartitionSolution:
    """Drop-to-partition assignment under construction or finalized.

    While merging is in progress the per-partition ``wmax`` values may be
    safe upper bounds (the sum of the merged parts' bounds); finalization
    recomputes them exactly.  Merge decisions are unaffected: an exact
    antichain computation runs whenever the bound alone cannot certify a
    merge.
    """

    def __init__(self, graph: PGT, capacity: ResourceVector):
        self.graph = graph
        self.capacity = capacity
        self._dims = capacity.dims
        self._cap_vals = capacity.values()
        self._demands = _aligned_demands(graph, self._dims)
        for i, drop in enumerate(graph.drops):
            for k, dim in enumerate(self._dims):
                if self._demands[i][k] > self._cap_vals[k]:
                    raise InfeasibleDropError(drop.id, dim)

        n = len(graph)
        self._part_of: list[int] = list(range(n))
        self._members: dict[int, set[int]] = {i: {i} for i in range(n)}
        self._bounds: dict[int, list[int]] = {i: list(self._demands[i]) for i in range(n)}
        self._gen: dict[int, int] = dict.fromkeys(range(n), 0)
        self._failed: set[tuple[int, int, int, int]] = set()
        self._last_moved: set[int] = set()
        self._trace: list[tuple[int, float]] = []
        self._finalized = False
        self._final_partitions: tuple[Partition, ...] = ()
        self._final_assignment: dict[str, int] = {}
        self._t_star = 0.0

    @property
    def partition_count(self) -> int:
        return len(self._members)

    @property
    def m_star(self) -> int:
        return self.partition_count

    @property
    def t_star(self) -> float:
        if self._finalized:
            return self._t_star
        if self._trace:
            return self._trace[-1][1]
        return completion_time_indexed(self.graph, self._part_of)

    @property
    def merge_trace(self) -> tuple[tuple[int, float], ...]:
        """(partition count, completion time) after each accepted merge."""
        return tuple(self._trace)

    @property
    def assignment(self) -> dict[str, int]:
        if self._finalized:
            return dict(self._final_assignment)
        return {d.id: self._part_of[i] for i, d in enumerate(self.graph.drops)}

    @property
    def partitions(self) -> tuple[Partition, ...]:
        if self._finalized:
            return self._final_partitions
        return tuple(self._partition_view(pid) for pid in sorted(self._members))

    @property
    def zeroed_edges(self) -> frozenset[tuple[str, str]]:
        """Edges whose endpoints ended up co-located (their cost is zero)."""
        g = self.graph
        part = self._part_of
        return frozenset(
            (e.src, e.dst)
            for e in g.edges
            if part[g.index_of(e.src)] == part[g.index_of(e.dst)]
        )

    def partition_of(self, drop_id: str) -> int:
        return self._part_of[self.graph.index_of(drop_id)]

    def _partition_view(self, pid: int) -> Partition:
        ids = frozenset(self.graph.drops[i].id for i in self._members[pid])
        wmax = ResourceVector(**dict(zip(self._dims, self._bounds[pid])))
        return Partition(id=pid, members=ids, wmax=wmax)

    def _local_subgraph(self, idxs: list[int], pids: tuple[int, ...]) -> list[tuple[int, int]]:
        # Edges of the subgraph induced by idxs, in local index space.  A
        # neighbour belongs to the subgraph iff its partition is one of pids.
        local = {gi: k for k, gi in enumerate(idxs)}
        part = self._part_of
        succ = self.graph._succ
        edges = []
        for gi in idxs:
            a = local[gi]
            for gj, _ in succ[gi]:
                if part[gj] in pids:
                    edges.append((a, local[gj]))
        return edges

    def _exact_wmax(self, idxs: list[int], pids: tuple[int, ...], dim_k: int) -> int:
        edges = self._local_subgraph(idxs, pids)
        weights = [self._demands[gi][dim_k] for gi in idxs]
        value, _ = solve_max_weighted_antichain(len(idxs), edges, weights)
        return value

    def _finalize(self) -> None:
        g = self.graph
        order = sorted(self._members, key=lambda pid: min(self._members[pid]))
        remap = {old: new for new, old in enumerate(order)}
        finals = []
        for old_pid in order:
            idxs = sorted(self._members[old_pid])
            edges = self._local_subgraph(idxs, (old_pid,))
            exact = []
            for k in range(len(self._dims)):
                weights = [self._demands[gi][k] for gi in idxs]
                value, _ = solve_max_weighted_antichain(len(idxs), edges, weights)
                exact.append(value)
            finals.append(
                Partition(
                    id=remap[old_pid],
                    members=frozenset(g.drops[i].id for i in idxs),
                    wmax=ResourceVector(**dict(zip(self._dims, exact))),
                )
            )
        self._t_star = self._trace[-1][1] if self._trace else completion_time_indexed(g, self._part_of)
        self._part_of = [remap[pid] for pid in self._part_of]
        self._members = {remap[pid]: members for pid, members in self._members.items()}
        self._bounds = {remap[pid]: [p.wmax[d] for d in self._dims] for pid, p in zip(order, finals)}
        self._gen = dict.fromkeys(self._members, 0)
        self._final_partitions = tuple(sorted(finals, key=lambda p: p.id))
        self._final_assignment = {d.id: self._part_of[i] for i, d in enumerate(g.drops)}
        self._finalized = True

    @classmethod
    def _from_member_lists(
        cls,
        graph: PGT,
        capacity: ResourceVector,
        member_lists: dict[int, list[int]],
        trace: list[tuple[int, float]],
        t_star: float | None,
    ) -> "PartitionSolution":
        sol = cls.__new__(cls)
        sol.graph = graph
        sol.capacity = capacity
        sol._dims = capacity.dims
        sol._cap_vals = capacity.values()
        sol._demands = _aligned_demands(graph, sol._dims)
        sol._part_of = [-1] * len(graph)
        sol._members = {}
        for pid, idxs in member_lists.items():
            sol._members[pid] = set(idxs)
            for i in idxs:
                sol._part_of[i] = pid
        sol._bounds = {}
        for pid, idxs_set in sol._members.items():
            idxs = sorted(idxs_set)
            edges = sol._local_subgraph(idxs, (pid,))
            sol._bounds[pid] = [
                solve_max_weighted_antichain(
                    len(idxs), edges, [sol._demands[i][k] for i in idxs]
                )[0]
                for k in range(len(sol._dims))
            ]
        sol._gen = dict.fromkeys(sol._members, 0)
        sol._failed = set()
        sol._trace = list(trace)
        sol._final_partitions = tuple(
            Partition(
                id=pid,
                members=frozenset(graph.drops[i].id for i in sol._members[pid]),
                wmax=ResourceVector(**dict(zip(sol._dims, sol._bounds[pid]))),
            )
            for pid in sorted(sol._members)
        )
        sol._final_assignment = {d.id: sol._part_of[i] for i, d in enumerate(graph.drops)}
        sol._t_star = t_star if t_star is not None else completion_time_indexed(graph, sol._part_of)
        sol._finalized = True
        return sol


def _aligned_demands(g: PGT, dims: tuple[str, ...]) -> list[tuple[int, ...]]:
    demands = []
    for d in g.drops:
        if d.demand.dims != dims:
            raise ValidationError(
                f"drop {d.id!r} demand dimensions {d.demand.dims} do not match capacity dimensions {dims}"
            )
        demands.append(d.demand.values())
    return demands


def singleton_solution(g: PGT, capacity: ResourceVector) -> PartitionSolution:
    """One partition per drop — the starting point for merging.

    Raises ``InfeasibleDropError`` if any single drop exceeds capacity.
    """
    return PartitionSolution(g, capacity)


def dop_satisfied(members: Iterable[str], g: PGT, capacity: ResourceVector) -> bool:
    """True iff the members' induced subgraph has a maximum weighted
    antichain within capacity in every resource dimension."""
    idxs = sorted(g.index_of(m) for m in members)
    demands = _aligned_demands(g, capacity.dims)
    keep = set(idxs)
    local = {gi: k for k, gi in enumerate(idxs)}
    edges = [
        (local[gi], local[gj])
        for gi in idxs
        for gj, _ in g._succ[gi]
        if gj in keep
    ]
    for k, cap in enumerate(capacity.values()):
        weights = [demands[gi][k] for gi in idxs]
        value, _ = solve_max_weighted_antichain(len(idxs), edges, weights)
        if value > cap:
            return False
    return True


def try_merge_partition(solution: PartitionSolution, u: str, v: str) -> Partition | None:
    """Merge the partitions holding drops ``u`` and ``v`` if the union
    satisfies the concurrency bound.

    Returns the (possibly pre-existing) merged partition on success and
    updates the solution in place; returns ``None`` and leaves the solution
    untouched when the union would exceed capacity.  Drops already sharing
    a partition merge trivially.
    """
    if solution._finalized:
        raise ValueError("cannot merge partitions of a finalized solution")
    g = solution.graph
    pid = _try_merge_idx(solution, g.index_of(u), g.index_of(v))
    return None if pid is None else solution._partition_view(pid)


def _try_merge_idx(sol: PartitionSolution, iu: int, iv: int) -> int | None:
    """Merge attempt in index space; returns the surviving partition id."""
    pu = sol._part_of[iu]
    pv = sol._part_of[iv]
    if pu == pv:
        return pu

    bounds_u = sol._bounds[pu]
    bounds_v = sol._bounds[pv]
    cap = sol._cap_vals
    new_bounds = [a + b for a, b in zip(bounds_u, bounds_v)]
    exact_dims = [k for k, total in enumerate(new_bounds) if total > cap[k]]

    if exact_dims:
        a, b = (pu, pv) if pu < pv else (pv, pu)
        key = (a, sol._gen[a], b, sol._gen[b])
        if key in sol._failed:
            return None
        idxs = list(sol._members[pu]) + list(sol._members[pv])
        edges = sol._local_subgraph(idxs, (pu, pv))
        for k in exact_dims:
            weights = [sol._demands[gi][k] for gi in idxs]
            value, _ = solve_max_weighted_antichain(len(idxs), edges, weights)
            if value > cap[k]:
                sol._failed.add(key)
                return None
            new_bounds[k] = value

    members_u = sol._members[pu]
    members_v = sol._members[pv]
    if len(members_u) > len(members_v):
        keep, lose = pu, pv
    elif len(members_v) > len(members_u):
        keep, lose = pv, pu
    else:
        keep, lose = (pu, pv) if pu < pv else (pv, pu)
    moved = sol._members[lose]
    part_of = sol._part_of
    for gi in moved:
        part_of[gi] = keep
    sol._members[keep] |= moved
    del sol._members[lose]
    sol._bounds[keep] = new_bounds
    del sol._bounds[lose]
    sol._gen[keep] += 1
    del sol._gen[lose]
    sol._last_moved = moved  # vertices whose partition just changed
    return keep


def partition(g: PGT, capacity: ResourceVector) -> PartitionSolution:
    """Run the full edge-zeroing pass and return the finalized solution.

    Edges are processed once, largest volume first (ties broken by
    ascending (src, dst) id); the trace records (partition count,
    completion time) after every merge that actually united two partitions.
    """
    sol = singleton_solution(g, capacity)
    order = sorted(
        range(len(g.edges)),
        key=lambda ei: (-g.edges[ei].volume, g.edges[ei].src, g.edges[ei].dst),
    )
    index_of = g.index_of
    part_of = sol._part_of
    succ, pred = g._succ, g._pred
    costs = g._edge_costs

    # The completion time after a merge differs from the previous one only
    # if a newly-zeroed edge lay on a longest path.  Keep forward/backward
    # longest-path distances from the last full recomputation; they only
    # overestimate as further edges get zeroed, so an edge whose best path
    # falls clearly short of the current longest cannot have changed it.
    fwd, bwd, t_now = longest_path_dists(g, part_of)
    for ei in order:
        edge = g.edges[ei]
        before = sol.partition_count
        survivor = _try_merge_idx(sol, index_of(edge.src), index_of(edge.dst))
        if sol.partition_count == before:
            continue
        moved = sol._last_moved
        margin = t_now - 1e-9 * (1.0 + abs(t_now))
        stale = False
        for gi in moved:
            for gj, ej in succ[gi]:
                if part_of[gj] == survivor and gj not in moved:
                    c = costs[ej]
                    if c > 0.0 and fwd[gi] + c + bwd[gj] >= margin:
                        stale = True
                        break
            if stale:
                break
            for gj, ej in pred[gi]:
                if part_of[gj] == survivor and gj not in moved:
                    c = costs[ej]
                    if c > 0.0 and fwd[gj] + c + bwd[gi] >= margin:
                        stale = True
                        break
            if stale:
                break
        if stale:
            fwd, bwd, t_now = longest_path_dists(g, part_of)
        sol._trace.append((sol.partition_count, t_now))
    sol._finalize()
    return sol


# -- virtual cluster merge -----------------------------------------------------


@dataclass(frozen=True)
class ClusterAssignment:
    """Partitions packed into a fixed number of virtual clusters."""

    num_clusters: int
    of_partition: dict[int, int]
    clusters: tuple[tuple[int, ...], ...]
    loads: tuple[tuple[float, int], ...]


def merge_to_m_clusters(solution: PartitionSolution, m: int) -> ClusterAssignment:
    """Pack partitions into ``m`` clusters, balancing (execution time,
    memory) by longest-processing-time-first placement.

    Each partition's load is the sum of its members' execution times and
    memory demands; each partition goes to the currently least-loaded
    cluster (lexicographic time-then-memory comparison).  Deterministic.
    """
    parts = solution.partitions
    if m <= 0 or m > len(parts):
        raise ValueError(f"cluster count must be in [1, {len(parts)}], got {m}")
    g = solution.graph

    def load_of(p: Partition) -> tuple[float, int]:
        exec_total = sum(g.drop(d).exec_time for d in p.members)
        mem_total = sum(g.drop(d).demand["memory_mb"] for d in p.members)
        return exec_total, mem_total

    loads = {p.id: load_of(p) for p in parts}
    order = sorted(parts, key=lambda p: (-loads[p.id][0], -loads[p.id][1], p.id))

    bins: list[list[int]] = [[] for _ in range(m)]
    bin_loads = [(0.0, 0)] * m
    for p in order:
        k = min(range(m), key=lambda i: (bin_loads[i][0], bin_loads[i][1], i))
        bins[k].append(p.id)
        bin_loads[k] = (bin_loads[k][0] + loads[p.id][0], bin_loads[k][1] + loads[p.id][1])

    # Renumber clusters by their smallest partition id so the m == count
    # case is the identity mapping.
    occupied = [(min(b), i) for i, b in enumerate(bins) if b]
    rank = {old: new for new, (_, old) in enumerate(sorted(occupied))}
    clusters: list[tuple[int, ...]] = [() for _ in range(len(rank))]
    new_loads: list[tuple[float, int]] = [(0.0, 0)] * len(rank)
    of_partition: dict[int, int] = {}
    for old, new in rank.items():
        clusters[new] = tuple(sorted(bins[old]))
        new_loads[new] = bin_loads[old]
        for pid in bins[old]:
            of_partition[pid] = new
    return ClusterAssignment(
        num_clusters=len(rank),
        of_partition=of_partition,
        clusters=tuple(clusters),
        loads=tuple(new_loads),
    )


# -- solution JSON -------------------------------------------------------------


def solution_to_json_dict(solution: PartitionSolution) -> dict:
    return {
        "capacity": solution.capacity.as_dict(),
        "partitions": [
            {"id": p.id, "members": sorted(p.members)} for p in solution.partitions
        ],
        "trace": [{"m": m, "t": t} for m, t in solution.merge_trace],
        "t_star": solution.t_star,
        "m_star": solution.m_star,
    }


def dump_solution(solution: PartitionSolution, fp: IO | None = None) -> str:
    text = json.dumps(solution_to_json_dict(solution), indent=2)
    if fp is not None:
        fp.write(text)
        fp.write("\n")
    return text


_SOLUTION_KEYS = {"capacity", "partitions", "trace", "t_star", "m_star"}


def load_solution(source: IO | bytes | str, g: PGT) -> PartitionSolution:
    """Read a solution document and validate it against ``g``.

    ``trace``, ``t_star``, and ``m_star`` are optional on input, so
    hand-written solutions need only capacity and partitions.  Membership
    must cover every drop of ``g`` exactly once.
    """
    if hasattr(source, "read"):
        data = json.load(source)
    elif isinstance(source, bytes):
        data = json.loads(source.decode("utf-8"))
    else:
        data = json.loads(source)
    if not isinstance(data, dict):
        raise ValidationError("solution document must be an object")
    unknown = sorted(set(data) - _SOLUTION_KEYS)
    if unknown:
        raise ValidationError(f"solution document: unknown keys {unknown}")
    for required in ("capacity", "partitions"):
        if required not in data:
            raise ValidationError(f"solution document: missing key {required!r}")

    capacity = ResourceVector.from_dict(data["capacity"])
    member_lists: dict[int, list[int]] = {}
    seen: dict[int, str] = {}
    for entry in data["partitions"]:
        if not isinstance(entry, dict) or set(entry) != {"id", "members"}:
            raise ValidationError(f"partition entry must have exactly id and members: {entry!r}")
        pid = entry["id"]
        if not isinstance(pid, int) or isinstance(pid, bool):
            raise ValidationError(f"partition id must be an integer, got {pid!r}")
        if pid in member_lists:
            raise ValidationError(f"duplicate partition id {pid}")
        if not entry["members"]:
            raise ValidationError(f"partition {pid} has no members")
        idxs = []
        for drop_id in entry["members"]:
            if drop_id not in g:
                raise ValidationError(f"partition {pid} references unknown drop {drop_id!r}")
            i = g.index_of(drop_id)
            if i in seen:
                raise ValidationError(f"drop {drop_id!r} appears in partitions {seen[i]} and {pid}")
            seen[i] = str(pid)
            idxs.append(i)
        member_lists[pid] = idxs
    if len(seen) != len(g):
        missing = sorted(d.id for i, d in enumerate(g.drops) if i not in seen)
        raise ValidationError(f"drops missing from solution: {missing}")

    trace = [(entry["m"], entry["t"]) for entry in data.get("trace", [])]
    if "m_star" in data and data["m_star"] != len(member_lists):
        raise ValidationError(
            f"m_star is {data['m_star']} but the document has {len(member_lists)} partitions"
        )
    return PartitionSolution._from_member_lists(
        g, capacity, member_lists, trace, data.get("t_star")
    )
