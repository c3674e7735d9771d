#!/usr/bin/env python3
"""
Flow LPs - multicommodity-flow relaxations over capacity variables
One commodity per non-root node v, shipping x_v units from the root to v.
Every node w other than v lets at most coef * x_w units of commodity v
leave it.
"""

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

import progress
import settings
from errors import ConnectivityError, InputError, NumericalError, SizeError
from graph_core import NodeWeightedGraph, RootedTree, node_weighted_shortest_paths, reaching_to
from lp_engine import (FEAS_TOL, LpModel, LpSolution, LpStatus, Relation, Sense, add_cut,
                       make_row, solve_lp)
from submodular import PrizeOracle, check_oracle_contract

logger = logging.getLogger(__name__)


class ProblemKind(enum.Enum):
    DST = 'dst'
    BUDGET = 'budget'
    QUOTA = 'quota'
    SUBMODULAR_BUDGET = 'submodular-budget'
    SUBMODULAR_QUOTA = 'submodular-quota'


class Objective(enum.Enum):
    MAX_PRIZE = 'max-prize'
    MIN_COST = 'min-cost'
    FEASIBILITY = 'feasibility'


@dataclass(frozen=True)
class VariableIndex:
    """Columns 0..n-1 are capacities x_v; flow columns follow, keyed (v, w, u)."""

    node_count: int
    flow: Dict[Tuple[int, int, int], int]
    commodities: Tuple[int, ...]

    @property
    def num_vars(self) -> int:
        return self.node_count + len(self.flow)

    def capacity(self, v: int) -> int:
        return v

    def flow_column(self, v: int, w: int, u: int) -> Optional[int]:
        return self.flow.get((v, w, u))

    def commodity_arcs(self, v: int) -> List[Tuple[int, int]]:
        return sorted((w, u) for (c, w, u) in self.flow if c == v)

    def names(self, graph: NodeWeightedGraph) -> Tuple[str, ...]:
        names = [f"x[{graph.label(v)}]" for v in range(self.node_count)]
        by_col = sorted(self.flow.items(), key=lambda kv: kv[1])
        names.extend(
            f"f[{graph.label(v)}]({graph.label(w)},{graph.label(u)})" for (v, w, u), _ in by_col
        )
        return tuple(names)


@dataclass(frozen=True, eq=False)
class RelaxationBundle:
    model: LpModel
    index: VariableIndex
    problem_kind: ProblemKind
    graph: NodeWeightedGraph
    budget: Optional[float] = None
    quota: Optional[float] = None
    capacity_coef: float = 1.0
    prize_weights: Tuple[float, ...] = ()
    cuts: Tuple[FrozenSet[int], ...] = ()

    def capacities(self, values: Sequence[float]) -> np.ndarray:
        return np.asarray(values, dtype=float)[:self.index.node_count]


@dataclass(frozen=True)
class Violation:
    nodes: FrozenSet[int]
    amount: float


def _commodity_arcs(graph: NodeWeightedGraph, v: int, from_root: FrozenSet[int]) -> List[Tuple[int, int]]:
    """Arcs on some root->v path; nothing enters the root and nothing leaves v."""
    usable = from_root & reaching_to(graph, v)
    r = graph.root
    return [
        (w, u)
        for w in sorted(usable) if w != v
        for u in graph.adjacency[w]
        if u in usable and u != r
    ]


def _flow_model(graph: NodeWeightedGraph, commodities: Sequence[int], capacity_coef: float,
                objective: np.ndarray, sense: Sense, lower: np.ndarray, upper: np.ndarray,
                extra_rows: Sequence) -> Tuple[LpModel, VariableIndex]:
    n = graph.node_count
    dm = node_weighted_shortest_paths(graph, graph.root)
    from_root = frozenset(v for v in graph.nodes() if dm.reachable(v))
    flow: Dict[Tuple[int, int, int], int] = {}
    arcs_by_commodity: Dict[int, List[Tuple[int, int]]] = {}
    for v in commodities:
        arcs = _commodity_arcs(graph, v, from_root) if v in from_root else []
        arcs_by_commodity[v] = arcs
        for w, u in arcs:
            flow[(v, w, u)] = n + len(flow)
    index = VariableIndex(node_count=n, flow=flow, commodities=tuple(commodities))
    num_vars = index.num_vars

    rows = list(extra_rows)
    for v in commodities:
        arcs = arcs_by_commodity[v]
        out_of: Dict[int, List[int]] = {}
        into: Dict[int, List[int]] = {}
        for w, u in arcs:
            col = flow[(v, w, u)]
            out_of.setdefault(w, []).append(col)
            into.setdefault(u, []).append(col)
        inflow = {col: 1.0 for col in into.get(v, [])}
        inflow[v] = -1.0
        rows.append(make_row(inflow, Relation.EQ, 0.0, num_vars, f"inflow[{v}]"))
        for w in sorted(out_of):
            coeffs = {col: 1.0 for col in out_of[w]}
            coeffs[w] = -capacity_coef
            rows.append(make_row(coeffs, Relation.LE, 0.0, num_vars, f"capacity[{v}][{w}]"))
        for w in sorted(set(out_of) | set(into)):
            if w in (graph.root, v):
                continue
            coeffs: Dict[int, float] = {}
            for col in into.get(w, []):
                coeffs[col] = coeffs.get(col, 0.0) + 1.0
            for col in out_of.get(w, []):
                coeffs[col] = coeffs.get(col, 0.0) - 1.0
            rows.append(make_row(coeffs, Relation.EQ, 0.0, num_vars, f"conserve[{v}][{w}]"))

    full_objective = np.zeros(num_vars)
    full_objective[:n] = objective
    lo = np.zeros(num_vars)
    hi = np.ones(num_vars)
    lo[:n] = lower
    hi[:n] = upper
    model = LpModel(
        num_vars=num_vars,
        objective=full_objective,
        sense=sense,
        rows=tuple(rows),
        lower=lo,
        upper=hi,
        var_names=index.names(graph),
    )
    return model, index


def _objective_for(objective: Objective, budget: Optional[float], quota: Optional[float]) -> Objective:
    if budget is not None and quota is not None:
        return Objective.FEASIBILITY
    if objective is Objective.MAX_PRIZE and budget is None:
        raise InputError("a max-prize relaxation needs a budget")
    if objective is Objective.MIN_COST and quota is None:
        raise InputError("a min-cost relaxation needs a quota")
    if objective is Objective.FEASIBILITY:
        raise InputError("feasibility mode needs both a budget and a quota")
    return objective


def _side_rows(graph: NodeWeightedGraph, weights: np.ndarray, num_vars: int,
               budget: Optional[float], quota: Optional[float]) -> List:
    n = graph.node_count
    rows = []
    if budget is not None:
        rows.append(make_row({v: graph.cost[v] for v in range(n)}, Relation.LE, budget, num_vars, 'budget'))
    if quota is not None:
        rows.append(make_row({v: float(weights[v]) for v in range(n)}, Relation.GE, quota, num_vars, 'quota'))
    return rows


def _build(graph: NodeWeightedGraph, weights: np.ndarray, budget: Optional[float], quota: Optional[float],
           objective: Objective, kind: ProblemKind, capacity_coef: float) -> RelaxationBundle:
    mode = _objective_for(objective, budget, quota)
    n = graph.node_count
    costs = np.asarray(graph.cost, dtype=float)
    if mode is Objective.MAX_PRIZE:
        obj, sense = weights.copy(), Sense.MAXIMIZE
    elif mode is Objective.MIN_COST:
        obj, sense = costs, Sense.MINIMIZE
    else:
        obj, sense = np.zeros(n), Sense.MINIMIZE
    commodities = [v for v in graph.nodes() if v != graph.root]
    # Side rows reference capacity columns only, so the final width is irrelevant to them.
    model, index = _flow_model(graph, commodities, capacity_coef, obj, sense,
                               np.zeros(n), np.ones(n), [])
    side = _side_rows(graph, weights, index.num_vars, budget, quota)
    model = replace(model, rows=tuple(side) + model.rows)
    return RelaxationBundle(
        model=model, index=index, problem_kind=kind, graph=graph,
        budget=budget, quota=quota, capacity_coef=capacity_coef,
        prize_weights=tuple(float(w) for w in weights),
    )


def build_const_drat(graph: NodeWeightedGraph, B: Optional[float] = None, Q: Optional[float] = None,
                     objective: Objective = Objective.MAX_PRIZE) -> RelaxationBundle:
    """Directed additive relaxation: budget row, quota row, or both (feasibility)."""
    if not graph.directed:
        raise InputError("the directed additive relaxation needs a directed graph")
    kind = ProblemKind.BUDGET if B is not None and Q is None else ProblemKind.QUOTA
    return _build(graph, np.asarray(graph.prize, dtype=float), B, Q, objective, kind, 1.0)


def build_lp_dst(graph: NodeWeightedGraph, terminals: Iterable[int]) -> RelaxationBundle:
    """Minimize sum c_v x_v with terminal capacities pinned at 1."""
    if not graph.directed:
        raise InputError("the directed Steiner relaxation needs a directed graph")
    terms = sorted(set(terminals))
    for t in terms:
        graph.check_node(t)
    dm = node_weighted_shortest_paths(graph, graph.root)
    for t in terms:
        if not dm.reachable(t):
            raise ConnectivityError(t, f"terminal {graph.label(t)} is not reachable from the root")
    n = graph.node_count
    lower = np.zeros(n)
    lower[terms] = 1.0
    commodities = [t for t in terms if t != graph.root]
    model, index = _flow_model(graph, commodities, 1.0, np.asarray(graph.cost, dtype=float),
                               Sense.MINIMIZE, lower, np.ones(n), [])
    return RelaxationBundle(model=model, index=index, problem_kind=ProblemKind.DST, graph=graph,
                            prize_weights=tuple(graph.prize))


def submodular_row(bundle: RelaxationBundle, oracle: PrizeOracle, nodes: FrozenSet[int]):
    weights = bundle.prize_weights
    coeffs = {v: weights[v] for v in sorted(nodes)}
    return make_row(coeffs, Relation.LE, oracle.evaluate(nodes), bundle.model.num_vars,
                    f"submod{{{','.join(str(v) for v in sorted(nodes))}}}")


def with_cuts(bundle: RelaxationBundle, oracle: PrizeOracle,
              cuts: Iterable[FrozenSet[int]]) -> RelaxationBundle:
    """Append submodular rows for the sets not already present."""
    model = bundle.model
    present = set(bundle.cuts)
    added = []
    for s in cuts:
        s = frozenset(s)
        if not s or s in present:
            continue
        row = submodular_row(bundle, oracle, s)
        model = add_cut(model, dict(zip(row.indices, row.values)), row.relation, row.rhs, row.name)
        present.add(s)
        added.append(s)
    return replace(bundle, model=model, cuts=bundle.cuts + tuple(added))


def build_const_urst(graph: NodeWeightedGraph, oracle: PrizeOracle, B: Optional[float] = None,
                     Q: Optional[float] = None, objective: Objective = Objective.MAX_PRIZE,
                     cuts: Iterable[FrozenSet[int]] = ()) -> RelaxationBundle:
    """Undirected submodular relaxation on the bidirected graph, capacity coefficient n."""
    if graph.directed:
        raise InputError("the submodular relaxation needs an undirected graph")
    if oracle.node_count != graph.node_count:
        raise InputError(f"oracle covers {oracle.node_count} nodes, graph has {graph.node_count}")
    check_oracle_contract(oracle)
    weights = oracle.singletons
    kind = ProblemKind.SUBMODULAR_BUDGET if B is not None and Q is None else ProblemKind.SUBMODULAR_QUOTA
    bundle = _build(graph, weights, B, Q, objective, kind, float(graph.node_count))
    return with_cuts(bundle, oracle, cuts)


def embed_tree_as_lp_solution(tree: RootedTree, bundle: RelaxationBundle,
                              capacities: Optional[Mapping[int, float]] = None) -> np.ndarray:
    """x_v = 1 on members (or ``capacities[v]``) and x_v units along each tree path."""
    index = bundle.index
    values = np.zeros(index.num_vars)
    for v in tree.members:
        values[v] = 1.0 if capacities is None else float(capacities[v])
    for v in index.commodities:
        if v not in tree.members:
            continue
        path = tree.path_from_root(v)
        for w, u in zip(path, path[1:]):
            col = index.flow_column(v, w, u)
            if col is None:
                raise InputError(f"tree arc ({w},{u}) has no flow column for commodity {v}")
            values[col] += values[v]
    return values


def decompose_commodity_flow(bundle: RelaxationBundle, values: Sequence[float], v: int,
                             tol: float = FEAS_TOL) -> List[Tuple[List[int], float]]:
    """Split commodity v's arc flow into weighted root->v paths; leftover cycles are dropped."""
    index = bundle.index
    residual: Dict[Tuple[int, int], float] = {}
    for (w, u) in index.commodity_arcs(v):
        amount = float(values[index.flow[(v, w, u)]])
        if amount > tol:
            residual[(w, u)] = amount
    root = bundle.graph.root
    paths = []
    while True:
        out: Dict[int, List[int]] = {}
        for (w, u) in sorted(residual):
            out.setdefault(w, []).append(u)
        parent = {root: None}
        queue = [root]
        for w in queue:
            if w == v:
                break
            for u in out.get(w, []):
                if u not in parent:
                    parent[u] = w
                    queue.append(u)
        if v not in parent or v == root:
            return paths
        path = [v]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        arcs = list(zip(path, path[1:]))
        amount = min(residual[a] for a in arcs)
        for a in arcs:
            residual[a] -= amount
            if residual[a] <= tol:
                del residual[a]
        paths.append((path, amount))


def path_form_violations(bundle: RelaxationBundle, values: Sequence[float],
                         tol: float = 1e-7) -> List[str]:
    """Check the path-form constraints via flow decomposition.

    Every commodity v must route x_v along root->v paths, and the paths
    through any w != v may carry at most coef * x_w.
    """
    x = bundle.capacities(values)
    problems = []
    for v in bundle.index.commodities:
        paths = decompose_commodity_flow(bundle, values, v, tol / 10)
        routed = math.fsum(weight for _, weight in paths)
        if abs(routed - x[v]) > tol * max(1.0, x[v]) * 10:
            problems.append(f"commodity {v} routes {routed:.9g} but x={x[v]:.9g}")
        through: Dict[int, float] = {}
        for path, weight in paths:
            for w in path[:-1]:
                through[w] = through.get(w, 0.0) + weight
        for w, amount in through.items():
            if amount > bundle.capacity_coef * x[w] + tol * 10:
                problems.append(f"commodity {v} pushes {amount:.9g} through {w} above capacity")
    return problems


def separate_submodular(x: Sequence[float], oracle: PrizeOracle,
                        support_cap: Optional[int] = None,
                        weights: Optional[Sequence[float]] = None) -> Optional[Violation]:
    """Most violated row sum_{v in S} x_v p_v <= p(S), by exhaustive search of the support."""
    cap = settings.SUPPORT_CAP if support_cap is None else support_cap
    x = np.asarray(x, dtype=float)
    support = [int(v) for v in np.flatnonzero(x > FEAS_TOL)]
    if len(support) > cap:
        raise SizeError(
            f"separation support has {len(support)} nodes, above the cap of {cap}; "
            f"raise STEINER_SUPPORT_CAP or shrink the instance"
        )
    if not support:
        return None
    p = oracle.singletons if weights is None else np.asarray(weights, dtype=float)
    k = len(support)
    masks = np.arange(1, 1 << k)
    bits = ((masks[:, None] >> np.arange(k)[None, :]) & 1).astype(bool)
    lhs = bits @ (x[support] * p[support])
    rhs = np.array([oracle.evaluate(support[i] for i in np.flatnonzero(row)) for row in bits])
    excess = lhs - rhs
    best = int(np.argmax(excess))
    if excess[best] <= FEAS_TOL:
        return None
    nodes = frozenset(support[i] for i in np.flatnonzero(bits[best]))
    return Violation(nodes=nodes, amount=float(excess[best]))


def solve_with_row_generation(graph: NodeWeightedGraph, oracle: PrizeOracle, B: Optional[float] = None,
                              Q: Optional[float] = None, objective: Objective = Objective.MAX_PRIZE,
                              support_cap: Optional[int] = None,
                              max_rounds: Optional[int] = None) -> Tuple[LpSolution, RelaxationBundle, int]:
    """Cutting-plane solve of the submodular relaxation.

    The first solve has no submodular rows. Singletons and the support set
    are then added, and the most violated set is appended each round until
    none is left.
    """
    rounds_cap = settings.SEPARATION_ROUNDS if max_rounds is None else max_rounds
    bundle = build_const_urst(graph, oracle, B, Q, objective)
    solution = solve_lp(bundle.model)
    if not solution.is_optimal:
        return solution, bundle, 0
    support = frozenset(int(v) for v in np.flatnonzero(bundle.capacities(solution.values) > FEAS_TOL))
    seed_cuts = [frozenset((v,)) for v in graph.nodes()] + ([support] if support else [])
    bundle = with_cuts(bundle, oracle, seed_cuts)
    rounds = 0
    while True:
        solution = solve_lp(bundle.model)
        if not solution.is_optimal:
            return solution, bundle, rounds
        violation = separate_submodular(bundle.capacities(solution.values), oracle, support_cap,
                                        bundle.prize_weights)
        if violation is None:
            logger.debug(f"row generation converged after {rounds} rounds, {len(bundle.cuts)} cuts")
            progress.clear_lane('separation')
            return solution, bundle, rounds
        if violation.nodes in set(bundle.cuts):
            raise NumericalError(
                f"separation returned the existing cut {sorted(violation.nodes)} "
                f"(violation {violation.amount:.3g}); the LP solution does not honour its own rows"
            )
        rounds += 1
        if rounds > rounds_cap:
            raise NumericalError(f"row generation did not converge within {rounds_cap} rounds")
        progress.note_separation(rounds, len(bundle.cuts) + 1, violation.nodes)
        bundle = with_cuts(bundle, oracle, [violation.nodes])
