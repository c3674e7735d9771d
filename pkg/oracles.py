#!/usr/bin/env python3
"""
Exact oracles - brute-force ground truth for small instances
Subset enumeration for the tree problems, connected-subtree enumeration for
trimming checks, and vertex enumeration for small bounded LPs.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np

import settings
from errors import InfeasibleError, InputError, QuotaUnreachableError, SizeError
from graph_core import NodeWeightedGraph, RootedTree, build_arborescence, to_networkx
from lp_engine import LpModel, LpStatus, Relation, Sense
from submodular import PrizeOracle

logger = logging.getLogger(__name__)

SUBTREE_MAX_NODES = 14
LP_VERTEX_MAX_VARS = 8
PROBLEM_KINDS = ('dst', 'bdrat', 'qdrat', 'burst', 'qurst')
# Relative slack on budget/quota comparisons.
COMPARE_TOL = 1e-12


@dataclass(frozen=True)
class ExactResult:
    best_set: Optional[FrozenSet[int]]
    best_value: Optional[float]
    enumerated: int

    def tree(self, graph: NodeWeightedGraph) -> RootedTree:
        if self.best_set is None:
            raise InfeasibleError("exact search found no feasible node set")
        return build_arborescence(graph, self.best_set)


def _reachable_mask(out_masks: List[int], root: int, mask: int) -> int:
    seen = 1 << root
    frontier = seen
    while frontier:
        grow = 0
        f = frontier
        while f:
            low = f & -f
            grow |= out_masks[low.bit_length() - 1]
            f ^= low
        grow &= mask
        frontier = grow & ~seen
        seen |= frontier
    return seen


def exact_optimum(graph: NodeWeightedGraph, problem_kind: str, params: Mapping,
                  oracle: Optional[PrizeOracle] = None) -> ExactResult:
    """Scan every root-containing node set whose members are all reachable from the root.

    ``params`` carries ``terminals`` (dst), ``budget`` (bdrat/burst) or
    ``quota`` (qdrat/qurst).
    """
    if problem_kind not in PROBLEM_KINDS:
        raise InputError(f"unknown problem kind {problem_kind!r}")
    n = graph.node_count
    if n > settings.ORACLE_MAX_NODES:
        raise SizeError(f"exact enumeration is limited to {settings.ORACLE_MAX_NODES} nodes, got {n}")
    r = graph.root
    out_masks = [sum(1 << u for u in graph.adjacency[v]) for v in range(n)]
    others = [v for v in range(n) if v != r]

    def prize_of(nodes: Tuple[int, ...]) -> float:
        if oracle is not None:
            return oracle.evaluate(nodes)
        return math.fsum(graph.prize[v] for v in nodes)

    terminal_mask = 0
    budget = quota = None
    if problem_kind == 'dst':
        for t in params.get('terminals', ()):
            graph.check_node(t)
            terminal_mask |= 1 << t
    elif problem_kind in ('bdrat', 'burst'):
        budget = float(params['budget'])
    else:
        quota = float(params['quota'])
    maximize = budget is not None

    best_key = None
    best_set: Optional[FrozenSet[int]] = None
    best_value: Optional[float] = None
    enumerated = 0
    for bits in range(1 << len(others)):
        mask = 1 << r
        for i, v in enumerate(others):
            if bits >> i & 1:
                mask |= 1 << v
        if mask & terminal_mask != terminal_mask:
            continue
        if _reachable_mask(out_masks, r, mask) != mask:
            continue
        enumerated += 1
        nodes = tuple(v for v in range(n) if mask >> v & 1)
        cost = math.fsum(graph.cost[v] for v in nodes)
        if budget is not None:
            if cost > budget + COMPARE_TOL * max(1.0, abs(budget)):
                continue
            value = prize_of(nodes)
        elif quota is not None:
            if prize_of(nodes) < quota - COMPARE_TOL * max(1.0, abs(quota)):
                continue
            value = cost
        else:
            value = cost
        key = (-value if maximize else value, nodes)
        if best_key is None or key < best_key:
            best_key, best_set, best_value = key, frozenset(nodes), value
    logger.debug(f"exact {problem_kind}: {enumerated} connected sets, best {best_value}")
    return ExactResult(best_set=best_set, best_value=best_value, enumerated=enumerated)


def exact_budget_solver(oracle: Optional[PrizeOracle] = None) -> Callable[[NodeWeightedGraph, float], RootedTree]:
    """Exact best-prize tree within budget B, as a solver callable."""
    def solve(graph: NodeWeightedGraph, budget: float) -> RootedTree:
        kind = 'bdrat' if graph.directed else 'burst'
        result = exact_optimum(graph, kind, {'budget': budget}, oracle)
        if result.best_set is None:
            raise InfeasibleError(f"no tree fits budget {budget}")
        return result.tree(graph)
    return solve


def exact_quota_solver(oracle: Optional[PrizeOracle] = None) -> Callable[[NodeWeightedGraph, float], RootedTree]:
    """Exact cheapest tree reaching quota Q, as a solver callable."""
    def solve(graph: NodeWeightedGraph, quota: float) -> RootedTree:
        kind = 'qdrat' if graph.directed else 'qurst'
        result = exact_optimum(graph, kind, {'quota': quota}, oracle)
        if result.best_set is None:
            raise QuotaUnreachableError(f"no tree reaches quota {quota}")
        return result.tree(graph)
    return solve


def enumerate_connected_subtrees(tree: RootedTree) -> List[FrozenSet[int]]:
    """Every node set inducing a connected piece of ``tree``, listed once, by its topmost node."""
    if tree.size > SUBTREE_MAX_NODES:
        raise SizeError(f"subtree enumeration is limited to {SUBTREE_MAX_NODES} nodes, got {tree.size}")
    hanging = {}
    for v in reversed(_top_down(tree)):
        options = [frozenset((v,))]
        for child in tree.children[v]:
            options = [opt | extra for opt in options for extra in [frozenset()] + hanging[child]]
        hanging[v] = options
    return [piece for v in _top_down(tree) for piece in hanging[v]]


def _top_down(tree: RootedTree) -> List[int]:
    order = [tree.root]
    for v in order:
        order.extend(tree.children[v])
    return order


def tree_is_arborescence(graph: NodeWeightedGraph, tree: RootedTree) -> bool:
    """Independent structural check through networkx."""
    host = to_networkx(graph)
    t = nx.DiGraph()
    t.add_nodes_from(tree.members)
    t.add_edges_from(tree.arcs())
    if not all(host.has_edge(u, v) for u, v in t.edges):
        return False
    return nx.is_arborescence(t) and t.in_degree(tree.root) == 0


def lp_vertex_optimum(model: LpModel, tol: float = 1e-9) -> Tuple[LpStatus, Optional[np.ndarray], Optional[float]]:
    """Optimum of a small bounded LP by enumerating basic solutions.

    Every vertex of the box-bounded polytope is the unique solution of n
    active constraints drawn from the rows (as equalities) and the bounds.
    """
    n = model.num_vars
    if n > LP_VERTEX_MAX_VARS:
        raise SizeError(f"vertex enumeration is limited to {LP_VERTEX_MAX_VARS} variables, got {n}")
    A, b, relations = model.dense_rows()
    m = len(b)
    best_x, best_val = None, None
    sign = 1.0 if model.sense is Sense.MINIMIZE else -1.0
    for k in range(min(n, m) + 1):
        for free in itertools.combinations(range(n), k):
            fixed = [j for j in range(n) if j not in free]
            for at_upper in itertools.product((False, True), repeat=len(fixed)):
                x = np.zeros(n)
                for j, up in zip(fixed, at_upper):
                    x[j] = model.upper[j] if up else model.lower[j]
                for rows in itertools.combinations(range(m), k):
                    if k:
                        sub = A[np.ix_(rows, free)]
                        rhs = b[list(rows)] - A[np.ix_(rows, fixed)] @ x[fixed]
                        try:
                            x[list(free)] = np.linalg.solve(sub, rhs)
                        except np.linalg.LinAlgError:
                            continue
                    if not _feasible(x, A, b, relations, model, tol):
                        continue
                    val = float(model.objective @ x)
                    if best_val is None or sign * val < sign * best_val - 1e-12:
                        best_x, best_val = x.copy(), val
    if best_x is None:
        return LpStatus.INFEASIBLE, None, None
    return LpStatus.OPTIMAL, best_x, best_val


def _feasible(x: np.ndarray, A: np.ndarray, b: np.ndarray, relations: Iterable[Relation],
              model: LpModel, tol: float) -> bool:
    if np.any(x < model.lower - tol) or np.any(x > model.upper + tol):
        return False
    lhs = A @ x if A.size else np.zeros(len(b))
    for value, rhs, rel in zip(lhs, b, relations):
        if rel is Relation.LE and value > rhs + tol:
            return False
        if rel is Relation.GE and value < rhs - tol:
            return False
        if rel is Relation.EQ and abs(value - rhs) > tol:
            return False
    return True
