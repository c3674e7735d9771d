#!/usr/bin/env python3
"""
Submodular pipelines - rooted trees on undirected graphs with submodular prizes
Klein-Ravi spiders for node-weighted Steiner trees, tree decomposition,
submodular trimming, and the budgeted / quota solvers built from them.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx

from errors import ConnectivityError, ContractError, InputError, NumericalError, QuotaUnreachableError
from flow_lp import Objective, solve_with_row_generation
from graph_core import (NodeWeightedGraph, RootedTree, build_arborescence, lift_tree,
                        node_weighted_shortest_paths, prune_to_b_proper, single_node_tree,
                        to_networkx, tree_from_parent)
from steiner_directed import (RATIO_TOL, SolveReport, _Candidate, _cheapest, _elapsed_ms, _run_guesses,
                              best_bundle, clean_capacities, guess_schedule_for, partition_support)
from submodular import PrizeOracle, restrict_oracle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpiderCandidate:
    center: int
    legs: Tuple[Tuple[int, Tuple[int, ...], float], ...]
    ratio: float


@dataclass(frozen=True)
class Decomposition:
    subtrees: Tuple[RootedTree, ...]
    m: float


@dataclass(frozen=True)
class TrimResult:
    """Trimmed tree plus the guarantee it carries (1: ratio window, 2: prize share within B)."""

    tree: RootedTree
    condition: int
    ratio: float = 0.0


def _components(host: nx.Graph, purchased: Set[int]) -> Dict[int, int]:
    """Node -> component id (smallest member) over the subgraph induced by ``purchased``."""
    comp_of = {}
    for comp in nx.connected_components(host.subgraph(purchased)):
        label = min(comp)
        for v in comp:
            comp_of[v] = label
    return comp_of


def _best_spider(graph: NodeWeightedGraph, working: List[float],
                 comp_of: Dict[int, int]) -> Optional[SpiderCandidate]:
    best: Optional[SpiderCandidate] = None
    for center in graph.nodes():
        dm = node_weighted_shortest_paths(graph, center, cost=working)
        reach: Dict[int, Tuple[float, int]] = {}
        for u, comp in comp_of.items():
            if not dm.reachable(u):
                continue
            leg = dm.dist[u] - working[center]
            if comp not in reach or (leg, u) < reach[comp]:
                reach[comp] = (leg, u)
        legs = sorted((leg, comp, u) for comp, (leg, u) in reach.items())
        # Legs may share nodes; each node is paid for once.
        bought = {center}
        total = working[center]
        for k, (leg, comp, u) in enumerate(legs, start=1):
            for v in dm.path_to(u):
                if v not in bought:
                    bought.add(v)
                    total += working[v]
            if k < 2:
                continue
            ratio = total / k
            if best is None or ratio < best.ratio - 1e-12:
                best = SpiderCandidate(
                    center=center,
                    legs=tuple((comp_id, tuple(dm.path_to(node)), leg_cost)
                              for leg_cost, comp_id, node in legs[:k]),
                    ratio=ratio,
                )
    return best


def klein_ravi_nwst(graph: NodeWeightedGraph, terminals: Iterable[int]) -> RootedTree:
    """Node-weighted Steiner tree by repeated minimum-ratio spider merges."""
    if graph.directed:
        raise InputError("klein_ravi_nwst needs an undirected graph")
    terms = set(terminals)
    for t in terms:
        graph.check_node(t)
    if graph.root not in terms:
        raise InputError(f"terminals must include the root {graph.label(graph.root)}")
    reach = node_weighted_shortest_paths(graph, graph.root)
    for t in sorted(terms):
        if not reach.reachable(t):
            raise ConnectivityError(t, f"terminal {graph.label(t)} is not connected to the root")

    host = to_networkx(graph)
    purchased = set(terms)
    working = [0.0 if v in purchased else graph.cost[v] for v in graph.nodes()]
    comp_of = _components(host, purchased)
    count = len(set(comp_of.values()))
    merges = 0
    while count > 1:
        spider = _best_spider(graph, working, comp_of)
        if spider is None:
            raise ConnectivityError(graph.root, "terminal components cannot be joined")
        for _, path, _ in spider.legs:
            for v in path:
                purchased.add(v)
                working[v] = 0.0
        comp_of = _components(host, purchased)
        new_count = len(set(comp_of.values()))
        if new_count >= count:
            raise ContractError(f"spider at {spider.center} did not merge components ({count} -> {new_count})")
        merges += 1
        logger.debug(f"spider #{merges} at {spider.center}: {len(spider.legs)} legs, "
                     f"ratio {spider.ratio:.6g}, {new_count} components left")
        count = new_count

    nodes = set(purchased)
    while True:
        tree = build_arborescence(graph, nodes)
        leaves = [v for v in tree.members if not tree.children[v] and v not in terms]
        if not leaves:
            return tree
        nodes.difference_update(leaves)


def _restricted(tree: RootedTree, graph: NodeWeightedGraph, root: int, nodes: Iterable[int]) -> RootedTree:
    keep = set(nodes)
    return tree_from_parent(graph, root, {v: tree.parent[v] for v in keep if v != root})


def decompose_tree(tree: RootedTree, graph: NodeWeightedGraph, m: float) -> Decomposition:
    """Cover ``tree`` with subtrees costing at most m plus their own root.

    The deepest node whose children side costs more than m gets its heavy
    children split off whole; the light ones are packed first-fit decreasing
    into bins of capacity m, and every bin but the emptiest leaves hanging
    from that node.
    """
    if m <= 0:
        raise InputError(f"decomposition size must be positive, got {m}")
    cost = graph.cost
    alive = set(tree.members)
    depth = tree.depth
    out: List[RootedTree] = []

    def alive_subtree(v: int) -> List[int]:
        found, stack = [], [v]
        while stack:
            u = stack.pop()
            found.append(u)
            stack.extend(c for c in tree.children[u] if c in alive)
        return found

    while True:
        sub: Dict[int, float] = {}
        for v in tree.postorder():
            if v in alive:
                sub[v] = cost[v] + math.fsum(sub[c] for c in tree.children[v] if c in alive)
        heavy_side = [v for v in sub if sub[v] - cost[v] > m]
        if not heavy_side:
            break
        u = min(heavy_side, key=lambda v: (-depth[v], v))
        kids = [c for c in tree.children[u] if c in alive]
        bins: List[Tuple[float, List[int]]] = []
        for c in sorted(kids, key=lambda c: (-sub[c], c)):
            if sub[c] > m:
                out.append(_restricted(tree, graph, c, alive_subtree(c)))
                continue
            for k, (load, members) in enumerate(bins):
                if load + sub[c] <= m:
                    bins[k] = (load + sub[c], members + [c])
                    break
            else:
                bins.append((sub[c], [c]))
        keep = min(range(len(bins)), key=lambda k: (bins[k][0], k)) if bins else None
        removed: Set[int] = set()
        for c in kids:
            if sub[c] > m:
                removed.update(alive_subtree(c))
        for k, (_, members) in enumerate(bins):
            if k == keep:
                continue
            nodes = [u] + [w for c in members for w in alive_subtree(c)]
            out.append(_restricted(tree, graph, u, nodes))
            removed.update(nodes[1:])
        alive -= removed
    out.append(_restricted(tree, graph, tree.root, alive))
    result = Decomposition(subtrees=tuple(out), m=m)
    _check_decomposition(result, tree, graph)
    return result


def _check_decomposition(result: Decomposition, tree: RootedTree, graph: NodeWeightedGraph) -> None:
    covered = frozenset().union(*(t.members for t in result.subtrees))
    if covered != tree.members:
        raise ContractError(f"decomposition misses nodes {sorted(tree.members - covered)}")
    for t in result.subtrees:
        limit = result.m + graph.cost[t.root]
        if t.cost > limit * (1 + RATIO_TOL):
            raise ContractError(f"subtree at {t.root} costs {t.cost:.6g}, above m + c(root) = {limit:.6g}")
    whole = math.floor(tree.cost / result.m)
    if whole >= 1 and len(result.subtrees) > 5 * whole:
        raise ContractError(f"decomposition produced {len(result.subtrees)} subtrees, above 5*{whole}")


def trim_submodular(tree: RootedTree, graph: NodeWeightedGraph, oracle: PrizeOracle,
                    B: float, epsilon: float) -> TrimResult:
    """Bring an over-budget tree back near B while keeping a share of its submodular prize.

    Condition 2: cost <= B and prize >= p(tree)/(5h'), h' = max(c(tree)/B, 1).
    Condition 1: cost in [eps*B/2, (1+eps)B] and ratio >= eps^2*gamma/640.
    """
    low = epsilon * B / 2
    high = (1 + epsilon) * B
    if tree.cost < low * (1 - RATIO_TOL):
        raise ContractError(f"tree cost {tree.cost:.6g} is below eps*B/2={low:.6g}; nothing to trim")
    p_tree = oracle.evaluate(tree.members)
    h = max(tree.cost / B, 1.0) if B > 0 else 1.0
    if tree.cost <= B * (1 + RATIO_TOL):
        return TrimResult(tree=tree, condition=2)

    decomposition = decompose_tree(tree, graph, B)
    scored = [(oracle.evaluate(t.members), -k, t) for k, t in enumerate(decomposition.subtrees)]
    _, _, top = max(scored, key=lambda s: (s[0], s[1]))
    reach = node_weighted_shortest_paths(graph, graph.root)
    joined = build_arborescence(graph, set(top.members) | set(reach.path_to(top.root)))
    p_joined = oracle.evaluate(joined.members)
    if joined.cost <= B * (1 + RATIO_TOL):
        if p_joined < p_tree / (5 * h) * (1 - RATIO_TOL):
            raise ContractError(f"joined subtree prize {p_joined:.6g} is below p/(5h')={p_tree / (5 * h):.6g}")
        logger.debug(f"trim_submodular: subtree at {top.root} fits the budget (condition 2)")
        return TrimResult(tree=joined, condition=2, ratio=p_joined / joined.cost if joined.cost else math.inf)

    trimmed, ratio, candidates = best_bundle(joined, graph, low, high, oracle.evaluate)
    gamma = p_tree / tree.cost
    target = epsilon ** 2 * gamma / 640
    if ratio < target * (1 - RATIO_TOL):
        heavy = max(graph.cost[v] for v in joined.members)
        if heavy > low * (1 + RATIO_TOL):
            logger.warning(f"submodular trim ratio {ratio:.6g} is below eps^2*gamma/640={target:.6g}; "
                           f"node cost {heavy:.6g} exceeds eps*B/2={low:.6g}")
            return TrimResult(tree=trimmed, condition=1, ratio=ratio)
        raise ContractError(
            f"submodular trim ratio {ratio:.6g} is below eps^2*gamma/640={target:.6g} ({candidates} candidates)"
        )
    logger.debug(f"trim_submodular: bundle of cost {trimmed.cost:.6g}, ratio {ratio:.6g} (condition 1)")
    return TrimResult(tree=trimmed, condition=1, ratio=ratio)


def _check_oracle_size(graph: NodeWeightedGraph, oracle: PrizeOracle) -> None:
    if graph.directed:
        raise InputError("submodular pipelines need an undirected graph")
    if oracle.node_count != graph.node_count:
        raise InputError(f"oracle covers {oracle.node_count} nodes, graph has {graph.node_count}")


def _path_tree(graph: NodeWeightedGraph, v: int) -> RootedTree:
    reach = node_weighted_shortest_paths(graph, graph.root)
    return build_arborescence(graph, reach.path_to(v))


def solve_burst(graph: NodeWeightedGraph, oracle: PrizeOracle, B: float, epsilon: float) -> SolveReport:
    """Budgeted rooted submodular tree: cost at most (1+eps)B."""
    started = time.perf_counter()
    if not 0 < epsilon <= 1:
        raise InputError(f"epsilon must lie in (0,1], got {epsilon}")
    _check_oracle_size(graph, oracle)
    pruned = prune_to_b_proper(graph, B)
    local = restrict_oracle(oracle, pruned.origin)
    solution, bundle, rounds = solve_with_row_generation(pruned, local, B=B, objective=Objective.MAX_PRIZE)
    if not solution.is_optimal:
        raise NumericalError(f"submodular budget relaxation reported {solution.status.value}")
    n = pruned.node_count
    theta = 1.0 / math.sqrt(n)
    x = clean_capacities(solution.values, n)
    part = partition_support(x, n, theta, theta)
    weights = local.singletons
    lp_value = solution.objective_value
    s1_mass = math.fsum(x[v] * weights[v] for v in part.S1)
    diagnostics: Dict[str, float] = {'n_pruned': float(n), 'theta1': theta, 'theta2': theta,
                                     'separation_rounds': float(rounds)}
    if s1_mass >= lp_value / 2 - RATIO_TOL * max(1.0, lp_value) or not part.S2:
        tree = klein_ravi_nwst(pruned, part.S1 | {pruned.root})
        branch = 'klein-ravi'
        if tree.cost > B * (1 + RATIO_TOL):
            diagnostics['gamma_in'] = local.evaluate(tree.members) / tree.cost
            outcome = trim_submodular(tree, pruned, local, B, epsilon)
            diagnostics.update({'trimmed': 1.0, 'trim_condition': float(outcome.condition),
                                'ratio_out': outcome.ratio})
            logger.info(f"burst: spider tree cost {tree.cost:.6g} trimmed to {outcome.tree.cost:.6g} "
                        f"(condition {outcome.condition})")
            tree = outcome.tree
    else:
        v = min(part.S2, key=lambda w: (-weights[w], w))
        tree = _path_tree(pruned, v)
        branch = 'single-vertex'
    final = lift_tree(tree, pruned, graph)
    if final.cost > (1 + epsilon) * B * (1 + RATIO_TOL) + RATIO_TOL:
        raise ContractError(f"final tree cost {final.cost:.9g} exceeds (1+eps)B={(1 + epsilon) * B:.9g}")
    prize = oracle.evaluate(final.members)
    logger.info(f"burst: {branch} tree with cost {final.cost:.6g}, prize {prize:.6g}, LP {lp_value:.6g}")
    return SolveReport(
        tree=final, prize=prize, lp_bound=lp_value, epsilon=epsilon, guesses_tried=1,
        wallclock_ms=_elapsed_ms(started), budget=B, branch=branch, diagnostics=diagnostics,
    )


def solve_qurst(graph: NodeWeightedGraph, oracle: PrizeOracle, Q: float, epsilon: float) -> SolveReport:
    """Quota rooted submodular tree.

    Klein-Ravi trees reach Q/2; single-vertex paths reach Q/(2 sqrt(n)) within
    the guessed cost.
    """
    started = time.perf_counter()
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if Q < 0:
        raise InputError(f"quota must be nonnegative, got {Q}")
    _check_oracle_size(graph, oracle)
    if Q == 0:
        tree = single_node_tree(graph)
        return SolveReport(tree=tree, prize=oracle.evaluate(tree.members), lp_bound=0.0, epsilon=epsilon,
                           wallclock_ms=_elapsed_ms(started), quota=Q, branch='trivial')
    schedule = guess_schedule_for(graph, epsilon)

    def attempt(i: int, guess: float) -> Optional[_Candidate]:
        if guess < graph.cost[graph.root]:
            return None
        pruned = prune_to_b_proper(graph, guess)
        local = restrict_oracle(oracle, pruned.origin)
        solution, _, rounds = solve_with_row_generation(pruned, local, Q=Q, objective=Objective.MIN_COST)
        if not solution.is_optimal:
            logger.debug(f"qurst: guess {guess:.6g} infeasible")
            return None
        n = pruned.node_count
        theta = 1.0 / math.sqrt(n)
        x = clean_capacities(solution.values, n)
        part = partition_support(x, n, theta, theta)
        weights = local.singletons
        s1_mass = math.fsum(x[v] * weights[v] for v in part.S1)
        slack = RATIO_TOL * max(1.0, Q)
        if s1_mass >= Q / 2 - slack or not part.S2:
            tree = klein_ravi_nwst(pruned, part.S1 | {pruned.root})
            branch, floor = 'klein-ravi', Q / 2
        else:
            v = min(part.S2, key=lambda w: (-weights[w], w))
            tree = _path_tree(pruned, v)
            branch, floor = 'single-vertex', Q / (2 * math.sqrt(n))
        prize = local.evaluate(tree.members)
        if prize < floor - slack:
            raise ContractError(f"{branch} tree prize {prize:.9g} is below its floor {floor:.9g}")
        diagnostics = {'guess': guess, 'n_pruned': float(n), 'theta1': theta, 'theta2': theta,
                       'separation_rounds': float(rounds)}
        return _Candidate(lift_tree(tree, pruned, graph), solution.objective_value, branch, diagnostics)

    results = _run_guesses(schedule, attempt)
    picked = _cheapest(results)
    if picked is None:
        raise QuotaUnreachableError(f"quota {Q} is unreachable under every cost guess")
    index, best = picked
    lp_bound = min(c.lp_value for c in results if c is not None)
    prize = oracle.evaluate(best.tree.members)
    logger.info(f"qurst: {best.branch} tree with cost {best.tree.cost:.6g}, prize {prize:.6g} "
                f"at guess {index + 1}/{len(schedule)}")
    return SolveReport(
        tree=best.tree, prize=prize, lp_bound=lp_bound, epsilon=epsilon, guesses_tried=len(schedule),
        wallclock_ms=_elapsed_ms(started), quota=Q, branch=best.branch, diagnostics=best.diagnostics,
    )
