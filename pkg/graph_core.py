#!/usr/bin/env python3
"""
Graph core - node-weighted graphs, shortest paths and rooted trees
Every pipeline builds on these types. Costs and prizes live on nodes; the cost
of a path is the sum over its nodes, both endpoints included.
"""

import heapq
import logging
import math
import operator
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from errors import ConnectivityError, ContractError, InfeasibleError, InputError

logger = logging.getLogger(__name__)

INF = math.inf
# Relative slack for "sum of member costs" style checks.
SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NodeWeightedGraph:
    """Directed or undirected graph with per-node cost and additive prize.

    Undirected graphs store both directions in ``adjacency``. ``origin`` maps
    every node to its id in the graph this one was induced from (empty for a
    graph built from scratch).
    """

    cost: Tuple[float, ...]
    prize: Tuple[float, ...]
    adjacency: Tuple[Tuple[int, ...], ...]
    root: int
    directed: bool = True
    labels: Tuple[str, ...] = ()
    origin: Tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.cost)
        if n == 0:
            raise InputError("graph needs at least one node")
        if len(self.prize) != n or len(self.adjacency) != n:
            raise InputError(
                f"cost/prize/adjacency lengths disagree ({n}, {len(self.prize)}, {len(self.adjacency)})"
            )
        if self.labels and len(self.labels) != n:
            raise InputError(f"expected {n} labels, got {len(self.labels)}")
        if self.origin and len(self.origin) != n:
            raise InputError(f"expected {n} origin ids, got {len(self.origin)}")
        for v in range(n):
            c, p = self.cost[v], self.prize[v]
            if not (math.isfinite(c) and c >= 0):
                raise InputError(f"node {self.label(v)} has invalid cost {c}")
            if not (math.isfinite(p) and p >= 0):
                raise InputError(f"node {self.label(v)} has invalid prize {p}")
        if not 0 <= self.root < n:
            raise InputError(f"root {self.root} is not a node id (n={n})")
        for u, outs in enumerate(self.adjacency):
            if len(set(outs)) != len(outs):
                raise InputError(f"parallel arcs leave node {self.label(u)}")
            for v in outs:
                if not 0 <= v < n:
                    raise InputError(f"arc ({u},{v}) references an unknown node")
                if v == u:
                    raise InputError(f"self-loop on node {self.label(u)}")
        if not self.directed:
            for u, outs in enumerate(self.adjacency):
                for v in outs:
                    if u not in self.arc_set_of(v):
                        raise InputError(f"undirected edge ({u},{v}) is stored in one direction only")

    @classmethod
    def from_arcs(cls, cost: Sequence[float], prize: Sequence[float],
                  arcs: Iterable[Tuple[int, int]], root: int = 0, directed: bool = True,
                  labels: Sequence[str] = ()) -> 'NodeWeightedGraph':
        """Build from an arc (or edge) list. Duplicates are rejected, not merged."""
        n = len(cost)
        outs: List[Set[int]] = [set() for _ in range(n)]
        seen: Set[Tuple[int, int]] = set()
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"arc ({u},{v}) references an unknown node")
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key in seen:
                raise InputError(f"duplicate {'arc' if directed else 'edge'} ({u},{v})")
            seen.add(key)
            outs[u].add(v)
            if not directed:
                outs[v].add(u)
        return cls(
            cost=tuple(float(c) for c in cost),
            prize=tuple(float(p) for p in prize),
            adjacency=tuple(tuple(sorted(s)) for s in outs),
            root=int(root),
            directed=bool(directed),
            labels=tuple(str(x) for x in labels),
        )

    @property
    def node_count(self) -> int:
        return len(self.cost)

    def nodes(self) -> range:
        return range(len(self.cost))

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels else str(v)

    def arc_set_of(self, u: int) -> FrozenSet[int]:
        return self._arc_sets[u]

    @cached_property
    def _arc_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(outs) for outs in self.adjacency)

    @cached_property
    def in_adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        ins: List[List[int]] = [[] for _ in self.cost]
        for u, outs in enumerate(self.adjacency):
            for v in outs:
                ins[v].append(u)
        return tuple(tuple(sorted(x)) for x in ins)

    def has_arc(self, u: int, v: int) -> bool:
        return v in self._arc_sets[u]

    def arcs(self) -> List[Tuple[int, int]]:
        return [(u, v) for u, outs in enumerate(self.adjacency) for v in outs]

    @property
    def arc_count(self) -> int:
        return sum(len(outs) for outs in self.adjacency)

    def total_cost(self, nodes: Optional[Iterable[int]] = None) -> float:
        return math.fsum(self.cost[v] for v in (self.nodes() if nodes is None else nodes))

    def total_prize(self, nodes: Optional[Iterable[int]] = None) -> float:
        return math.fsum(self.prize[v] for v in (self.nodes() if nodes is None else nodes))

    def check_node(self, v: int) -> None:
        try:
            v = operator.index(v)
        except TypeError:
            raise InputError(f"invalid node id {v!r}") from None
        if not 0 <= v < self.node_count:
            raise InputError(f"invalid node id {v!r} (n={self.node_count})")


@dataclass(frozen=True)
class DistanceMap:
    source: int
    dist: Tuple[float, ...]
    pred: Tuple[Optional[int], ...]

    def reachable(self, v: int) -> bool:
        return self.dist[v] < INF

    def path_to(self, v: int) -> List[int]:
        """Node list source..v along predecessor links."""
        if self.dist[v] == INF:
            raise ConnectivityError(v, f"node {v} is not reachable from {self.source}")
        path = [v]
        while path[-1] != self.source:
            path.append(self.pred[path[-1]])
        path.reverse()
        return path


@dataclass(frozen=True)
class RootedTree:
    """Out-arborescence (or rooted undirected tree) with cached totals."""

    root: int
    parent: Dict[int, int]
    members: FrozenSet[int]
    cost: float
    prize_additive: float

    @property
    def size(self) -> int:
        return len(self.members)

    @cached_property
    def children(self) -> Dict[int, Tuple[int, ...]]:
        kids: Dict[int, List[int]] = {v: [] for v in self.members}
        for child, par in self.parent.items():
            kids[par].append(child)
        return {v: tuple(sorted(k)) for v, k in kids.items()}

    @cached_property
    def depth(self) -> Dict[int, int]:
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            u = stack.pop()
            for w in self.children[u]:
                depth[w] = depth[u] + 1
                stack.append(w)
        return depth

    def arcs(self) -> List[Tuple[int, int]]:
        return sorted((par, child) for child, par in self.parent.items())

    def path_from_root(self, v: int) -> List[int]:
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path

    def subtree(self, v: int) -> List[int]:
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return out

    def postorder(self) -> List[int]:
        order, stack = [], [(self.root, False)]
        while stack:
            u, done = stack.pop()
            if done:
                order.append(u)
                continue
            stack.append((u, True))
            for w in reversed(self.children[u]):
                stack.append((w, False))
        return order


def node_weighted_shortest_paths(graph: NodeWeightedGraph, source: int,
                                 allowed: Optional[Iterable[int]] = None,
                                 cost: Optional[Sequence[float]] = None) -> DistanceMap:
    """Label-setting Dijkstra over node costs.

    ``cost`` overrides the graph's costs (purchased nodes priced at zero, etc.).
    Ties prefer the smaller predecessor id.
    """
    graph.check_node(source)
    n = graph.node_count
    if allowed is None:
        inside = None
    else:
        inside = [False] * n
        for v in allowed:
            graph.check_node(v)
            inside[v] = True
        if not inside[source]:
            raise InputError(f"source {source} is outside the allowed node set")
    weights = graph.cost if cost is None else cost
    if len(weights) != n:
        raise InputError(f"cost override has length {len(weights)}, expected {n}")

    dist = [INF] * n
    pred: List[Optional[int]] = [None] * n
    done = [False] * n
    dist[source] = float(weights[source])
    heap = [(dist[source], source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in graph.adjacency[u]:
            if done[v] or (inside is not None and not inside[v]):
                continue
            nd = d + weights[v]
            if nd < dist[v] or (nd == dist[v] and pred[v] is not None and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return DistanceMap(source=source, dist=tuple(dist), pred=tuple(pred))


def reaching_to(graph: NodeWeightedGraph, target: int,
                allowed: Optional[Iterable[int]] = None) -> Set[int]:
    """Nodes that can reach ``target`` (reverse BFS), optionally inside ``allowed``."""
    inside = None if allowed is None else set(allowed)
    seen = {target}
    stack = [target]
    while stack:
        v = stack.pop()
        for u in graph.in_adjacency[v]:
            if u not in seen and (inside is None or u in inside):
                seen.add(u)
                stack.append(u)
    return seen


def induced_subgraph(graph: NodeWeightedGraph, nodes: Iterable[int]) -> NodeWeightedGraph:
    """Induced subgraph on ``nodes`` (root must be kept), ids re-densified in ascending order."""
    keep = sorted(set(nodes))
    if graph.root not in keep:
        raise InputError("induced subgraph must keep the root")
    new_id = {v: i for i, v in enumerate(keep)}
    adjacency = tuple(
        tuple(new_id[w] for w in graph.adjacency[v] if w in new_id) for v in keep
    )
    return NodeWeightedGraph(
        cost=tuple(graph.cost[v] for v in keep),
        prize=tuple(graph.prize[v] for v in keep),
        adjacency=adjacency,
        root=new_id[graph.root],
        directed=graph.directed,
        labels=tuple(graph.label(v) for v in keep),
        origin=tuple(keep),
    )


def prune_to_b_proper(graph: NodeWeightedGraph, bound: float) -> NodeWeightedGraph:
    """Keep only nodes within node-weighted distance ``bound`` of the root.

    Distances are measured once on the input graph.
    """
    if bound < graph.cost[graph.root]:
        raise InfeasibleError(
            f"bound {bound} is below the root cost {graph.cost[graph.root]}; no tree fits"
        )
    dm = node_weighted_shortest_paths(graph, graph.root)
    slack = SUM_TOLERANCE * max(1.0, abs(bound))
    keep = [v for v in graph.nodes() if dm.dist[v] <= bound + slack]
    logger.debug(f"prune to bound {bound}: kept {len(keep)}/{graph.node_count} nodes")
    return induced_subgraph(graph, keep)


def tree_from_parent(graph: NodeWeightedGraph, root: int, parent: Mapping[int, int]) -> RootedTree:
    members = frozenset(parent) | {root}
    tree = RootedTree(
        root=root,
        parent=dict(parent),
        members=members,
        cost=graph.total_cost(sorted(members)),
        prize_additive=graph.total_prize(sorted(members)),
    )
    validate_tree(tree, graph)
    return tree


def build_arborescence(graph: NodeWeightedGraph, node_set: Iterable[int],
                       root: Optional[int] = None) -> RootedTree:
    """Shortest-path arborescence inside ``node_set`` spanning exactly that set.

    ``root`` defaults to the graph root; subtrees hanging elsewhere pass it
    explicitly.
    """
    nodes = set(node_set)
    root = graph.root if root is None else root
    if root not in nodes:
        raise InputError(f"node set must contain the root {graph.label(root)}")
    dm = node_weighted_shortest_paths(graph, root, allowed=nodes)
    for v in sorted(nodes):
        if not dm.reachable(v):
            raise ConnectivityError(
                v, f"node {graph.label(v)} is not reachable from {graph.label(root)} inside the node set"
            )
    parent = {v: dm.pred[v] for v in nodes if v != root}
    return tree_from_parent(graph, root, parent)


def validate_tree(tree: RootedTree, graph: NodeWeightedGraph) -> None:
    """Raise ContractError unless ``tree`` is a well-formed rooted tree of ``graph``."""
    if tree.root not in tree.members:
        raise ContractError(f"tree root {tree.root} is not a member")
    if tree.root in tree.parent:
        raise ContractError(f"tree root {tree.root} has a parent")
    if set(tree.parent) != set(tree.members) - {tree.root}:
        raise ContractError("every non-root member needs exactly one parent")
    for child, par in tree.parent.items():
        if par not in tree.members:
            raise ContractError(f"parent {par} of {child} is not a member")
        if not graph.has_arc(par, child):
            raise ContractError(f"tree arc ({par},{child}) is not an arc of the graph")
    seen = {tree.root}
    stack = [tree.root]
    kids: Dict[int, List[int]] = {}
    for child, par in tree.parent.items():
        kids.setdefault(par, []).append(child)
    while stack:
        u = stack.pop()
        for w in kids.get(u, ()):
            if w in seen:
                raise ContractError(f"node {w} reached twice")
            seen.add(w)
            stack.append(w)
    if seen != set(tree.members):
        missing = sorted(set(tree.members) - seen)
        raise ContractError(f"members {missing} are not reachable from the root (cycle in parent links)")
    cost = graph.total_cost(tree.members)
    prize = graph.total_prize(tree.members)
    if abs(cost - tree.cost) > SUM_TOLERANCE * max(1.0, abs(cost)):
        raise ContractError(f"cached tree cost {tree.cost} differs from member sum {cost}")
    if abs(prize - tree.prize_additive) > SUM_TOLERANCE * max(1.0, abs(prize)):
        raise ContractError(f"cached tree prize {tree.prize_additive} differs from member sum {prize}")


def lift_tree(tree: RootedTree, subgraph: NodeWeightedGraph, host: NodeWeightedGraph) -> RootedTree:
    """Map a tree of an induced subgraph back onto the graph it came from."""
    if not subgraph.origin:
        return tree
    up = subgraph.origin
    parent = {up[c]: up[p] for c, p in tree.parent.items()}
    return tree_from_parent(host, up[tree.root], parent)


def single_node_tree(graph: NodeWeightedGraph) -> RootedTree:
    return tree_from_parent(graph, graph.root, {})


def to_networkx(graph: NodeWeightedGraph) -> nx.Graph:
    """Export as ``nx.DiGraph`` (directed) or ``nx.Graph`` with cost/prize attributes."""
    g = nx.DiGraph() if graph.directed else nx.Graph()
    for v in graph.nodes():
        g.add_node(v, cost=graph.cost[v], prize=graph.prize[v], label=graph.label(v))
    g.add_edges_from(graph.arcs())
    g.graph['root'] = graph.root
    return g
