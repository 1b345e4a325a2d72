"""Maximum antichains of a DAG: exact polynomial algorithms plus an
exhaustive oracle.

An antichain is a set of pairwise mutually-unreachable vertices — exactly
the sets of drops that can execute concurrently in non-streaming mode.  The
weighted variant maximizes a per-vertex weight sum over all antichains; its
value bounds the aggregate resource demand of a partition at every instant.

The polynomial algorithm reduces the problem to minimum flow with arc lower
bounds on a split graph.  Each vertex v becomes an arc x_v -> y_v whose flow
must carry at least weight(v); every DAG edge u -> v becomes an unbounded
arc y_u -> x_v, and a source/sink close the network.  Any feasible flow
decomposes into weighted chains covering every vertex's demand, so the
minimum feasible flow value equals the minimum weighted chain cover, which
equals the maximum weighted antichain by LP duality (the weighted analogue
of Dilworth's theorem).  The witness antichain is read off the minimum
flow's residual cut: vertices whose x_v stays on the source side while y_v
falls on the sink side.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

from .graph import PGT, reachability

BRUTE_FORCE_LIMIT = 22


@dataclass(frozen=True)
class Antichain:
    """A set of mutually-unreachable drops and its total weight."""

    members: frozenset[str]
    weighted_length: float


def is_antichain(g: PGT, members: Iterable[str]) -> bool:
    """True iff no member reaches any other member in ``g``.

    Raises ``KeyError`` for unknown drop ids.  The empty set and every
    singleton are antichains.
    """
    idxs = [g.index_of(m) for m in members]
    masks = reachability(g).index_masks()
    member_mask = 0
    for i in idxs:
        member_mask |= 1 << i
    return all(masks[i] & member_mask == 0 for i in idxs)


def brute_force_max_weighted_antichain(
    g: PGT, weights: Mapping[str, float]
) -> tuple[float, Antichain]:
    """Exact maximum weighted antichain by backtracking over all antichains.

    Guarded to graphs of at most ``BRUTE_FORCE_LIMIT`` drops.  Serves as the
    independent oracle for the flow-based algorithm; it shares nothing with
    it beyond the graph itself (enumeration works on the transitive closure,
    the flow works on raw edges).
    """
    n = len(g)
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_LIMIT} drops, got {n}")
    w = _weight_list(g, weights)

    desc = reachability(g).index_masks()
    anc = [0] * n
    for u in range(n):
        m = desc[u]
        while m:
            v = (m & -m).bit_length() - 1
            anc[v] |= 1 << u
            m &= m - 1
    incomp = [~(desc[i] | anc[i] | (1 << i)) for i in range(n)]

    # Vertices in topological order; zero-weight vertices never change the
    # maximum and are skipped so the witness is deterministic and zero-free.
    order = [i for i in g._topo if w[i] > 0]
    suffix = [0.0] * (len(order) + 1)
    for k in range(len(order) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + w[order[k]]

    best_value = 0.0
    best_set = 0

    def extend(k: int, chosen_mask: int, allowed: int, value: float) -> None:
        nonlocal best_value, best_set
        for j in range(k, len(order)):
            if value + suffix[j] <= best_value:
                return
            v = order[j]
            bit = 1 << v
            if allowed & bit:
                extend(j + 1, chosen_mask | bit, allowed & incomp[v], value + w[v])
        if value > best_value:
            best_value = value
            best_set = chosen_mask

    extend(0, 0, -1, 0.0)

    members = frozenset(g.drops[i].id for i in range(n) if best_set >> i & 1)
    return best_value, Antichain(members=members, weighted_length=best_value)


def _weight_list(g: PGT, weights: Mapping[str, float]) -> list:
    w = []
    for d in g.drops:
        try:
            value = weights[d.id]
        except KeyError:
            raise KeyError(f"no weight for drop {d.id!r}") from None
        if value < 0:
            raise ValueError(f"negative weight {value!r} for drop {d.id!r}")
        w.append(value)
    return w


# -- maximum cardinality antichain (unit weights) -----------------------------


def max_antichain_length(g: PGT) -> int:
    """Maximum antichain cardinality via minimum chain cover.

    Equals |V| minus a maximum matching of the bipartite graph that joins
    left/right copies of V for every transitively-reachable pair.
    """
    n = len(g)
    masks = reachability(g).index_masks()
    adj: list[list[int]] = []
    for u in range(n):
        row = []
        m = masks[u]
        while m:
            v = (m & -m).bit_length() - 1
            row.append(v)
            m &= m - 1
        adj.append(row)
    return n - _hopcroft_karp(n, n, adj)


def _hopcroft_karp(nl: int, nr: int, adj: list[list[int]]) -> int:
    """Maximum bipartite matching with layered augmenting-path search."""
    INF = nl + nr + 1
    match_l = [-1] * nl
    match_r = [-1] * nr
    dist = [0] * nl
    matching = 0
    while True:
        queue = []
        for u in range(nl):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return matching

        def try_augment(u: int) -> bool:
            for v in adj[u]:
                w = match_r[v]
                if w == -1 or (dist[w] == dist[u] + 1 and try_augment(w)):
                    match_l[u] = v
                    match_r[v] = u
                    return True
            dist[u] = INF
            return False

        for u in range(nl):
            if match_l[u] == -1 and try_augment(u):
                matching += 1


# -- maximum weighted antichain via minimum flow -------------------------------


class FlowNetwork:
    """Arc-list flow network with capacities and optional lower bounds.

    Arcs are stored as residual pairs (forward arc 2k, reverse arc 2k+1).
    An arc may be created pre-loaded with flow, which is how the antichain
    solver seeds its initial feasible flow.  ``max_flow`` runs Dinic's
    algorithm on the current residuals, respecting lower bounds (flow on an
    arc never drops below its lower bound).
    """

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.adj: list[list[int]] = [[] for _ in range(num_nodes)]
        self.frm: list[int] = []
        self.to: list[int] = []
        self.res: list[int] = []
        self.cap: list[int] = []
        self.low: list[int] = []

    def add_arc(self, u: int, v: int, cap: int, low: int = 0, flow: int = 0) -> int:
        if not low <= flow <= cap:
            raise ValueError(f"arc flow {flow} outside [{low}, {cap}]")
        aid = len(self.to)
        self.frm.append(u)
        self.to.append(v)
        self.res.append(cap - flow)
        self.cap.append(cap)
        self.low.append(low)
        self.adj[u].append(aid)
        self.frm.append(v)
        self.to.append(u)
        self.res.append(flow - low)
        self.cap.append(cap)
        self.low.append(low)
        self.adj[v].append(aid + 1)
        return aid

    def flow(self, arc_id: int) -> int:
        return self.cap[arc_id] - self.res[arc_id]

    def arcs(self) -> list[tuple[int, int, int, int, int]]:
        """(u, v, flow, capacity, lower_bound) for every forward arc."""
        return [
            (self.frm[a], self.to[a], self.flow(a), self.cap[a], self.low[a])
            for a in range(0, len(self.to), 2)
        ]

    def max_flow(self, s: int, t: int) -> int:
        if s == t:
            raise ValueError("source and sink must differ")
        to, res, adj, frm = self.to, self.res, self.adj, self.frm
        n = self.num_nodes
        total = 0
        while True:
            level = [-1] * n
            level[s] = 0
            queue = [s]
            head = 0
            while head < len(queue):
                u = queue[head]
                head += 1
                lv = level[u] + 1
                for a in adj[u]:
                    v = to[a]
                    if level[v] < 0 and res[a] > 0:
                        level[v] = lv
                        queue.append(v)
            if level[t] < 0:
                return total
            # One blocking flow: depth-first advance with per-node arc
            # cursors; after saturating a path, resume from the arc that
            # went tight rather than from the source.
            it = [0] * n
            path: list[int] = []
            u = s
            while True:
                if u == t:
                    bottleneck = res[path[0]]
                    for a in path:
                        r = res[a]
                        if r < bottleneck:
                            bottleneck = r
                    total += bottleneck
                    resume = 0
                    for k, a in enumerate(path):
                        res[a] -= bottleneck
                        res[a ^ 1] += bottleneck
                        if res[a] == 0 and resume == 0:
                            resume = k + 1
                    u = frm[path[resume - 1]]
                    del path[resume - 1 :]
                    continue
                adj_u = adj[u]
                cursor = it[u]
                end = len(adj_u)
                moved = False
                lv = level[u] + 1
                while cursor < end:
                    a = adj_u[cursor]
                    if res[a] > 0 and level[to[a]] == lv:
                        it[u] = cursor
                        path.append(a)
                        u = to[a]
                        moved = True
                        break
                    cursor += 1
                if moved:
                    continue
                it[u] = cursor
                level[u] = -1
                if not path:
                    break
                a = path.pop()
                u = frm[a]

    def residual_reachable(self, start: int) -> list[bool]:
        seen = [False] * self.num_nodes
        seen[start] = True
        queue = [start]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for a in self.adj[u]:
                v = self.to[a]
                if self.res[a] > 0 and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return seen


def max_weighted_antichain(
    g: PGT, weights: Mapping[str, float]
) -> tuple[float, Antichain]:
    """Exact maximum weighted antichain in polynomial time.

    Weights must be non-negative; non-integers are scaled to integers by
    their common denominator and the result unscaled.  Returns the value
    together with a witness antichain of that exact weight (zero-weight
    drops are left out of the witness).
    """
    w = _weight_list(g, weights)
    scale = 1
    if not all(isinstance(x, int) for x in w):
        fracs = [Fraction(x) for x in w]
        scale = lcm(*(f.denominator for f in fracs)) if fracs else 1
        w = [int(f * scale) for f in fracs]

    edges = [(g.index_of(e.src), g.index_of(e.dst)) for e in g.edges]
    value, member_idx = solve_max_weighted_antichain(len(g), edges, w)

    if scale != 1:
        value = float(Fraction(value, scale))
    members = frozenset(g.drops[i].id for i in member_idx)
    return value, Antichain(members=members, weighted_length=value)


def solve_max_weighted_antichain(
    n: int, edges: list[tuple[int, int]], w: list[int]
) -> tuple[int, list[int]]:
    """Index-level solver: integer weights, edges as index pairs.

    Returns (maximum weight, witness vertex indices).  The split network has
    2n + 2 nodes: source 0, sink 1, and per vertex i the pair x_i = 2i + 2,
    y_i = 2i + 3.  The initial feasible flow routes each weight along
    s -> x_i -> y_i -> t; canceling with a maximum flow from t back to s
    leaves the minimum feasible flow, whose value is the answer.
    """
    total = sum(w)
    if total == 0:
        return 0, []
    big = total + 1  # strictly above any feasible flow, so "infinite" arcs never bind

    # Seed a feasible flow greedily along chains: each vertex pulls as much
    # of its required throughput as possible from predecessors' leftover
    # outflow, taking the rest from the source.  Any feasible seed works;
    # a chain-shaped one leaves far less for the cancellation pass to undo.
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for ei, (u, v) in enumerate(edges):
        succ[u].append(ei)
        indeg[v] += 1
    topo = [i for i in range(n) if indeg[i] == 0]
    head = 0
    while head < len(topo):
        u = topo[head]
        head += 1
        for ei in succ[u]:
            v = edges[ei][1]
            indeg[v] -= 1
            if indeg[v] == 0:
                topo.append(v)

    edge_seed = [0] * len(edges)
    need = list(w)  # lower bound still unfed from upstream
    out_rem = list(w)  # throughput not yet forwarded downstream
    for u in topo:
        for ei in succ[u]:
            v = edges[ei][1]
            if need[v] and out_rem[u]:
                q = need[v] if need[v] < out_rem[u] else out_rem[u]
                edge_seed[ei] = q
                need[v] -= q
                out_rem[u] -= q

    net = FlowNetwork(2 * n + 2)
    s, t = 0, 1
    for i in range(n):
        x, y = 2 * i + 2, 2 * i + 3
        # Source/sink arcs that carry no seed flow can never be used by the
        # cancellation (their reverse residual is zero); leave them out.
        if need[i] > 0:
            net.add_arc(s, x, big, 0, flow=need[i])
        if out_rem[i] > 0:
            net.add_arc(y, t, big, 0, flow=out_rem[i])
        net.add_arc(x, y, big, low=w[i], flow=w[i])
    for ei, (u, v) in enumerate(edges):
        net.add_arc(2 * u + 3, 2 * v + 2, big, 0, flow=edge_seed[ei])

    canceled = net.max_flow(t, s)
    wmax = sum(need) - canceled

    # Minimum cut of the final residual graph: the sink side is everything
    # still reachable from t.  A vertex whose x stays on the source side
    # while its y crossed to the sink side has its lower-bound arc in the
    # cut, and those lower bounds sum to exactly the minimum flow value.
    sink_side = net.residual_reachable(t)
    members = [
        i for i in range(n) if w[i] > 0 and not sink_side[2 * i + 2] and sink_side[2 * i + 3]
    ]
    return wmax, members
