#!/usr/bin/env python3
"""
Directed pipelines - LP rounding for directed Steiner and rooted additive trees
Covers the directed Steiner tree, budgeted and quota rooted trees with
additive prizes, tree trimming, cost guessing, and the reductions between
budget and quota solvers.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

import progress
import settings
from errors import (ConnectivityError, ContractError, InfeasibleError, InputError, NumericalError,
                    QuotaUnreachableError)
from flow_lp import Objective, RelaxationBundle, build_const_drat, build_lp_dst
from graph_core import (NodeWeightedGraph, RootedTree, build_arborescence, lift_tree,
                        node_weighted_shortest_paths, prune_to_b_proper, single_node_tree)
from hitting_set import SetFamily, greedy_hitting_set
from lp_engine import FEAS_TOL, row_violations, solve_lp
from submodular import PrizeOracle

logger = logging.getLogger(__name__)

RATIO_TOL = 1e-6


@dataclass(frozen=True)
class SupportPartition:
    S: FrozenSet[int]
    S1: FrozenSet[int]
    S2: FrozenSet[int]
    U: FrozenSet[int]
    U_prime: FrozenSet[int]
    theta1: float
    theta2: float
    values: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ExpensiveCover:
    CH: FrozenSet[int]
    EX: FrozenSet[int]
    x_sets: Dict[int, FrozenSet[int]]
    hitters: Tuple[int, ...]
    attachments: Dict[int, int]


@dataclass
class SolveReport:
    """Output of a pipeline. Ratios are derived from the tree, never stored."""

    tree: RootedTree
    prize: float
    lp_bound: Optional[float]
    epsilon: float
    guesses_tried: int = 0
    wallclock_ms: int = 0
    budget: Optional[float] = None
    quota: Optional[float] = None
    branch: str = ''
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def cost(self) -> float:
        return self.tree.cost

    @property
    def budget_violation(self) -> float:
        if self.budget is None:
            return 1.0
        if self.budget <= 0:
            return 1.0 if self.cost <= 0 else math.inf
        return max(1.0, self.cost / self.budget)

    @property
    def quota_fraction(self) -> float:
        if not self.quota:
            return 1.0
        return self.prize / self.quota


@dataclass
class _Candidate:
    tree: RootedTree
    lp_value: float
    branch: str
    diagnostics: Dict[str, float]


def clean_capacities(values: Sequence[float], n: int) -> np.ndarray:
    """First n LP values clipped to [0,1] with noise below the feasibility tolerance zeroed."""
    x = np.clip(np.asarray(values, dtype=float)[:n], 0.0, 1.0)
    x[x < FEAS_TOL] = 0.0
    return x


def partition_support(x: Sequence[float], n: int, theta1: float, theta2: float) -> SupportPartition:
    """Threshold split of the support; comparisons are on the raw values."""
    values = tuple(float(v) for v in x)
    if len(values) != n:
        raise InputError(f"capacity vector has length {len(values)}, expected {n}")
    S = frozenset(v for v in range(n) if values[v] > 0)
    S1 = frozenset(v for v in S if values[v] >= theta1)
    U = frozenset(v for v in S if values[v] >= theta2)
    return SupportPartition(S=S, S1=S1, S2=S - S1, U=U, U_prime=S - U,
                            theta1=theta1, theta2=theta2, values=values)


def expensive_cover(graph: NodeWeightedGraph, part: SupportPartition,
                    targets: Iterable[int]) -> ExpensiveCover:
    """Split targets into cheap (root-reachable through U) and expensive, and hit the gateways."""
    targets = frozenset(targets)
    r = graph.root
    via_u = node_weighted_shortest_paths(graph, r, allowed=part.U | {r})
    CH = frozenset(v for v in targets if via_u.reachable(v))
    EX = targets - CH

    gateways = {w: node_weighted_shortest_paths(graph, w, allowed=part.U | {w})
                for w in sorted(part.U_prime)} if EX else {}
    x_sets: Dict[int, FrozenSet[int]] = {}
    slack = 2 * graph.node_count * FEAS_TOL
    for v in sorted(EX):
        X_v = frozenset(w for w, dm in gateways.items() if dm.reachable(v))
        if not X_v:
            raise ContractError(
                f"expensive node {graph.label(v)} has no low-capacity gateway; "
                f"the capacity vector is not a feasible flow solution"
            )
        if part.values and len(X_v) * part.theta2 < part.values[v] - slack:
            raise ContractError(
                f"node {graph.label(v)} has {len(X_v)} gateways, fewer than x_v/theta2="
                f"{part.values[v] / part.theta2:.4g}"
            )
        x_sets[v] = X_v

    hitters: Tuple[int, ...] = ()
    attachments: Dict[int, int] = {}
    if EX:
        family = SetFamily.of([x_sets[v] for v in sorted(EX)], universe=part.U_prime)
        hitters = tuple(greedy_hitting_set(family))
        chosen = set(hitters)
        for v in sorted(EX):
            attachments[v] = min(chosen & x_sets[v], key=lambda w: (gateways[w].dist[v], w))
    return ExpensiveCover(CH=CH, EX=EX, x_sets=x_sets, hitters=hitters, attachments=attachments)


def _span(graph: NodeWeightedGraph, part: SupportPartition, cover: ExpensiveCover) -> Tuple[RootedTree, Dict[str, float]]:
    """Union of the cheap paths, the root->gateway paths and the gateway->target paths."""
    r = graph.root
    nodes: Set[int] = {r}
    via_u = node_weighted_shortest_paths(graph, r, allowed=part.U | {r})
    for v in cover.CH:
        nodes.update(via_u.path_to(v))
    ch_cost = graph.total_cost(nodes)
    if cover.EX:
        full = node_weighted_shortest_paths(graph, r)
        used = sorted(set(cover.attachments.values()))
        for w in used:
            nodes.update(full.path_to(w))
            inner = node_weighted_shortest_paths(graph, w, allowed=part.U | {w})
            for v, a in cover.attachments.items():
                if a == w:
                    nodes.update(inner.path_to(v))
    tree = build_arborescence(graph, nodes)
    diagnostics = {
        'ch_cost': ch_cost,
        'ex_hitters': float(len(cover.hitters)),
        'u_cost': graph.total_cost(part.U),
    }
    return tree, diagnostics


def guess_schedule_for(graph: NodeWeightedGraph, epsilon: float) -> List[float]:
    reach = node_weighted_shortest_paths(graph, graph.root)
    costs = [graph.cost[v] for v in graph.nodes() if reach.reachable(v)]
    positive = [c for c in costs if c > 0]
    if not positive:
        return [0.0]
    return guess_cost_schedule(min(positive), math.fsum(costs), epsilon)


def guess_cost_schedule(c_min: float, c_M: float, epsilon: float) -> List[float]:
    """c_min * (1+eps)^(i-1) for i = 1..N, N the first index reaching c_M."""
    if c_min <= 0:
        raise InputError(f"c_min must be positive, got {c_min}")
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if c_M < c_min:
        raise InputError(f"c_M={c_M} is below c_min={c_min}")
    schedule = [c_min]
    while schedule[-1] < c_M * (1 - 1e-12):
        schedule.append(c_min * (1 + epsilon) ** len(schedule))
    return schedule


def _run_guesses(schedule: Sequence[float], attempt: Callable[[int, float], Optional[_Candidate]]) -> List[Optional[_Candidate]]:
    """Evaluate every guess, in parallel when configured; results stay in guess order."""
    results: List[Optional[_Candidate]] = [None] * len(schedule)
    total = len(schedule)
    if settings.GUESS_WORKERS > 1 and total > 1:
        with ThreadPoolExecutor(max_workers=settings.GUESS_WORKERS) as executor:
            futures = {executor.submit(attempt, i, g): i for i, g in enumerate(schedule)}
            done = 0
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                done += 1
                progress.note_guesses(done, total)
    else:
        for i, g in enumerate(schedule):
            progress.note_guesses(i + 1, total)
            results[i] = attempt(i, g)
    progress.clear_lane('guesses')
    return results


def _cheapest(results: Sequence[Optional[_Candidate]]) -> Optional[Tuple[int, _Candidate]]:
    feasible = [(c.tree.cost, i, c) for i, c in enumerate(results) if c is not None]
    if not feasible:
        return None
    _, i, best = min(feasible, key=lambda t: (t[0], t[1]))
    return i, best


def _elapsed_ms(started: float) -> int:
    return int(round((time.perf_counter() - started) * 1000))


def solve_dst(graph: NodeWeightedGraph, terminals: Iterable[int], epsilon: float) -> SolveReport:
    """Directed Steiner tree by LP rounding under guessed cost bounds."""
    started = time.perf_counter()
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    terms = sorted(set(terminals))
    reach = node_weighted_shortest_paths(graph, graph.root)
    for t in terms:
        graph.check_node(t)
        if not reach.reachable(t):
            raise ConnectivityError(t, f"terminal {graph.label(t)} is not reachable from the root")
    if not [t for t in terms if t != graph.root]:
        tree = single_node_tree(graph)
        return SolveReport(tree=tree, prize=tree.prize_additive, lp_bound=tree.cost, epsilon=epsilon,
                           wallclock_ms=_elapsed_ms(started), branch='trivial')

    schedule = guess_schedule_for(graph, epsilon)

    def attempt(i: int, guess: float) -> Optional[_Candidate]:
        if guess < graph.cost[graph.root]:
            return None
        pruned = prune_to_b_proper(graph, guess)
        local = {orig: k for k, orig in enumerate(pruned.origin)}
        if any(t not in local for t in terms):
            return None
        local_terms = [local[t] for t in terms]
        bundle = build_lp_dst(pruned, local_terms)
        solution = solve_lp(bundle.model)
        if not solution.is_optimal:
            return None
        n = pruned.node_count
        theta = 1.0 / math.sqrt(n)
        x = clean_capacities(solution.values, n)
        part = partition_support(x, n, theta, theta)
        cover = expensive_cover(pruned, part, local_terms)
        tree, diagnostics = _span(pruned, part, cover)
        diagnostics.update({'guess': guess, 'n_pruned': float(n), 'theta1': theta, 'theta2': theta})
        return _Candidate(lift_tree(tree, pruned, graph), solution.objective_value, 'dst', diagnostics)

    results = _run_guesses(schedule, attempt)
    picked = _cheapest(results)
    if picked is None:
        raise InfeasibleError("no cost guess admits a feasible directed Steiner relaxation")
    index, best = picked
    missing = [t for t in terms if t not in best.tree.members]
    if missing:
        raise ContractError(f"rounded tree misses terminals {missing}")
    lp_bound = min(c.lp_value for c in results if c is not None)
    logger.info(
        f"dst: cost {best.tree.cost:.6g} at guess {index + 1}/{len(schedule)}, LP bound {lp_bound:.6g}"
    )
    return SolveReport(
        tree=best.tree, prize=best.tree.prize_additive, lp_bound=lp_bound, epsilon=epsilon,
        guesses_tried=len(schedule), wallclock_ms=_elapsed_ms(started), branch=best.branch,
        diagnostics=best.diagnostics,
    )


def _good_tree(graph: NodeWeightedGraph, x: np.ndarray, B: float, Q: float, F: float,
               bundle: Optional[RelaxationBundle] = None,
               values: Optional[Sequence[float]] = None) -> Tuple[RootedTree, str, Dict[str, float]]:
    n = graph.node_count
    prizes = np.asarray(graph.prize, dtype=float)
    costs = np.asarray(graph.cost, dtype=float)
    scale = FEAS_TOL * max(1.0, float(prizes.sum()), float(costs.sum()))
    if bundle is not None and values is not None:
        broken = row_violations(bundle.model, values)
        if broken:
            raise ContractError(f"fractional solution violates {len(broken)} rows, first {broken[0][1]}")
    if x.shape != (n,) or np.any(x < 0) or np.any(x > 1):
        raise ContractError("capacity vector must lie in [0,1]^n")
    if float(costs @ x) > B + scale or float(prizes @ x) < Q - scale:
        raise ContractError(
            f"capacity vector misses its budget/quota rows (cost {costs @ x:.6g} vs B={B:.6g}, "
            f"prize {prizes @ x:.6g} vs Q={Q:.6g})"
        )

    part = partition_support(x, n, n ** (-1.0 / 3.0), n ** (-2.0 / 3.0))
    s1_mass = math.fsum(x[v] * prizes[v] for v in part.S1)
    diagnostics = {'n_pruned': float(n), 'theta1': part.theta1, 'theta2': part.theta2,
                   'F': F, 'u_cost': graph.total_cost(part.U)}
    if s1_mass >= Q / 2 - scale or not part.S2:
        cover = expensive_cover(graph, part, part.S1)
        tree, span_diag = _span(graph, part, cover)
        diagnostics.update(span_diag)
        branch = 's1'
    else:
        ordered = sorted(part.S2, key=lambda v: (-x[v], v))
        size = 2 * math.ceil(len(ordered) ** (2.0 / 3.0))
        groups = [ordered[k:k + size] for k in range(0, len(ordered), size)]
        best_group = max(groups, key=lambda g: math.fsum(prizes[v] for v in g))
        full = node_weighted_shortest_paths(graph, graph.root)
        nodes: Set[int] = {graph.root}
        for v in best_group:
            nodes.update(full.path_to(v))
        tree = build_arborescence(graph, nodes)
        diagnostics.update({'groups': float(len(groups)), 'group_size': float(size)})
        branch = 's2'
    if tree.prize_additive < Q / 2 - scale:
        raise ContractError(f"{branch} tree prize {tree.prize_additive:.9g} is below Q/2={Q / 2:.9g}")
    return tree, branch, diagnostics


def good_tree_from_fraction(graph: NodeWeightedGraph, x: Sequence[float], B: float, Q: float, F: float,
                            bundle: Optional[RelaxationBundle] = None,
                            values: Optional[Sequence[float]] = None) -> RootedTree:
    """Tree with prize at least Q/2 rounded from a feasible capacity vector."""
    tree, _, _ = _good_tree(graph, clean_capacities(x, graph.node_count), B, Q, F, bundle, values)
    return tree


def solve_bdrat(graph: NodeWeightedGraph, B: float, epsilon: float) -> SolveReport:
    """Budgeted rooted additive tree: cost at most (1+eps)B."""
    started = time.perf_counter()
    if not 0 < epsilon <= 1:
        raise InputError(f"epsilon must lie in (0,1], got {epsilon}")
    if not graph.directed:
        raise InputError("solve_bdrat needs a directed graph")
    pruned = prune_to_b_proper(graph, B)
    bundle = build_const_drat(pruned, B=B, objective=Objective.MAX_PRIZE)
    solution = solve_lp(bundle.model)
    if not solution.is_optimal:
        raise NumericalError(f"budget relaxation reported {solution.status.value}; x=0 is always feasible")
    n = pruned.node_count
    x = clean_capacities(solution.values, n)
    Q = solution.objective_value
    reach = node_weighted_shortest_paths(pruned, pruned.root)
    F = max(reach.dist)
    tree, branch, diagnostics = _good_tree(pruned, x, B, Q, F, bundle, solution.values)
    diagnostics['trimmed'] = 0.0
    if tree.cost > B * (1 + RATIO_TOL):
        gamma = tree.prize_additive / tree.cost
        trimmed = trim_additive(tree, pruned, B, epsilon, gamma)
        diagnostics.update({
            'trimmed': 1.0, 'gamma_in': gamma,
            'ratio_out': trimmed.prize_additive / trimmed.cost if trimmed.cost > 0 else math.inf,
        })
        logger.info(f"bdrat: tree cost {tree.cost:.6g} over budget {B:.6g}, trimmed to {trimmed.cost:.6g}")
        tree = trimmed
    final = lift_tree(tree, pruned, graph)
    if final.cost > (1 + epsilon) * B * (1 + RATIO_TOL) + RATIO_TOL:
        raise ContractError(f"final tree cost {final.cost:.9g} exceeds (1+eps)B={(1 + epsilon) * B:.9g}")
    return SolveReport(
        tree=final, prize=final.prize_additive, lp_bound=Q, epsilon=epsilon, guesses_tried=1,
        wallclock_ms=_elapsed_ms(started), budget=B, branch=branch, diagnostics=diagnostics,
    )


def solve_qdrat(graph: NodeWeightedGraph, Q: float, epsilon: float) -> SolveReport:
    """Quota rooted additive tree: prize at least Q/2 at low cost."""
    started = time.perf_counter()
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if Q < 0:
        raise InputError(f"quota must be nonnegative, got {Q}")
    if not graph.directed:
        raise InputError("solve_qdrat needs a directed graph")
    if Q == 0:
        tree = single_node_tree(graph)
        return SolveReport(tree=tree, prize=tree.prize_additive, lp_bound=0.0, epsilon=epsilon,
                           wallclock_ms=_elapsed_ms(started), quota=Q, branch='trivial')
    schedule = guess_schedule_for(graph, epsilon)

    def attempt(i: int, guess: float) -> Optional[_Candidate]:
        if guess < graph.cost[graph.root]:
            return None
        pruned = prune_to_b_proper(graph, guess)
        bundle = build_const_drat(pruned, Q=Q, objective=Objective.MIN_COST)
        solution = solve_lp(bundle.model)
        if not solution.is_optimal:
            logger.debug(f"qdrat: guess {guess:.6g} infeasible")
            return None
        x = clean_capacities(solution.values, pruned.node_count)
        tree, branch, diagnostics = _good_tree(pruned, x, solution.objective_value, Q, guess,
                                               bundle, solution.values)
        diagnostics['guess'] = guess
        return _Candidate(lift_tree(tree, pruned, graph), solution.objective_value, branch, diagnostics)

    results = _run_guesses(schedule, attempt)
    picked = _cheapest(results)
    if picked is None:
        raise QuotaUnreachableError(f"quota {Q} is unreachable under every cost guess")
    index, best = picked
    lp_bound = min(c.lp_value for c in results if c is not None)
    logger.info(f"qdrat: cost {best.tree.cost:.6g}, prize {best.tree.prize_additive:.6g} "
                f"({best.branch}) at guess {index + 1}/{len(schedule)}")
    return SolveReport(
        tree=best.tree, prize=best.tree.prize_additive, lp_bound=lp_bound, epsilon=epsilon,
        guesses_tried=len(schedule), wallclock_ms=_elapsed_ms(started), quota=Q,
        branch=best.branch, diagnostics=best.diagnostics,
    )


def carve_pieces(tree: RootedTree, cost: Sequence[float], threshold: float) -> List[Tuple[FrozenSet[int], Optional[int]]]:
    """Cut ``tree`` into disjoint connected pieces, each costing at least ``threshold``.

    Returns (nodes, anchor) pairs. A piece with an anchor hangs below the
    anchor (the anchor itself may or may not belong to it); ``None`` means the
    piece holds the root. Pieces never exceed 2*threshold, except a piece
    whose top node alone costs more than threshold, which stays within
    c(top) + threshold. The final root remainder, cheaper than threshold, is
    folded into the last piece cut.
    """
    root = tree.root
    alive = set(tree.members)
    depth = tree.depth
    pieces: List[Tuple[FrozenSet[int], Optional[int]]] = []

    def alive_subtree(v: int) -> FrozenSet[int]:
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(c for c in tree.children[u] if c in alive)
        return frozenset(out)

    while root in alive:
        sub: Dict[int, float] = {}
        for v in tree.postorder():
            if v in alive:
                sub[v] = cost[v] + math.fsum(sub[c] for c in tree.children[v] if c in alive)
        if sub[root] < threshold:
            break
        u = min((v for v in sub if sub[v] >= threshold), key=lambda v: (-depth[v], v))
        kids = [c for c in tree.children[u] if c in alive]
        below = math.fsum(sub[c] for c in kids)
        if sub[u] <= 2 * threshold or below < threshold:
            nodes = alive_subtree(u)
            pieces.append((nodes, None if u == root else u))
            alive -= nodes
            continue
        group: List[int] = []
        acc = 0.0
        for c in kids:
            group.append(c)
            acc += sub[c]
            if acc >= threshold:
                nodes = frozenset().union(*(alive_subtree(g) for g in group))
                pieces.append((nodes, u))
                alive -= nodes
                group, acc = [], 0.0
    if alive and pieces:
        nodes, _ = pieces[-1]
        pieces[-1] = (nodes | frozenset(alive), None)
    return pieces


def best_bundle(tree: RootedTree, graph: NodeWeightedGraph, threshold: float, ceiling: float,
                prize_of: Callable[[FrozenSet[int]], float]) -> Tuple[RootedTree, float, int]:
    """Best prize-to-cost tree among carved pieces (plus root connectors) and heavy nodes.

    Returns the tree, its ratio and how many candidates were scored.
    """
    reach = node_weighted_shortest_paths(graph, graph.root)
    candidates: List[FrozenSet[int]] = []
    for nodes, anchor in carve_pieces(tree, graph.cost, threshold):
        if anchor is None:
            candidates.append(nodes)
        else:
            candidates.append(nodes | frozenset(reach.path_to(anchor)))
    for v in sorted(tree.members):
        if graph.cost[v] >= threshold:
            candidates.append(frozenset(reach.path_to(v)))
    best: Optional[Tuple[float, int, FrozenSet[int]]] = None
    for k, nodes in enumerate(candidates):
        c = graph.total_cost(nodes)
        if c < threshold * (1 - RATIO_TOL) or c > ceiling * (1 + RATIO_TOL) or c <= 0:
            logger.debug(f"bundle #{k} with cost {c:.6g} falls outside [{threshold:.6g}, {ceiling:.6g}]")
            continue
        ratio = prize_of(nodes) / c
        if best is None or ratio > best[0]:
            best = (ratio, k, nodes)
    if best is None:
        raise ContractError(
            f"no trimmed bundle fits the window [{threshold:.6g}, {ceiling:.6g}] "
            f"({len(candidates)} candidates)"
        )
    ratio, _, nodes = best
    return build_arborescence(graph, nodes), ratio, len(candidates)


def trim_additive(tree: RootedTree, graph: NodeWeightedGraph, B: float, epsilon: float,
                  gamma: Optional[float] = None) -> RootedTree:
    """Shrink an over-budget tree into [eps*B/2, (1+eps)B] keeping ratio >= eps*gamma/4."""
    low = epsilon * B / 2
    high = (1 + epsilon) * B
    if tree.cost < low * (1 - RATIO_TOL):
        raise ContractError(f"tree cost {tree.cost:.6g} is below eps*B/2={low:.6g}; nothing to trim")
    if tree.cost <= high * (1 + RATIO_TOL):
        return tree
    if gamma is None:
        gamma = tree.prize_additive / tree.cost
    result, ratio, scored = best_bundle(tree, graph, low, high, graph.total_prize)
    target = epsilon * gamma / 4
    if ratio < target * (1 - RATIO_TOL):
        heavy = max(graph.cost[v] for v in tree.members)
        if heavy > low * (1 + RATIO_TOL):
            logger.warning(f"trimmed ratio {ratio:.6g} is below eps*gamma/4={target:.6g}; "
                           f"node cost {heavy:.6g} exceeds eps*B/2={low:.6g}, so the bound does not apply")
            return result
        raise ContractError(
            f"trimmed ratio {ratio:.6g} is below eps*gamma/4={target:.6g} "
            f"({scored} candidates, heaviest node {heavy:.6g}, eps*B/2={low:.6g})"
        )
    return result


def _prize_function(oracle: Optional[PrizeOracle]) -> Callable[[RootedTree], float]:
    if oracle is None:
        return lambda t: t.prize_additive
    return lambda t: oracle.evaluate(t.members)


def _as_tree(result: Union[RootedTree, SolveReport]) -> RootedTree:
    return result.tree if isinstance(result, SolveReport) else result


def quota_via_budget(graph: NodeWeightedGraph, Q: float,
                     budget_solver: Callable[[NodeWeightedGraph, float], Union[RootedTree, SolveReport]],
                     epsilon: float, alpha: float = 1.0,
                     oracle: Optional[PrizeOracle] = None) -> SolveReport:
    """Raise the budget geometrically until the budget solver reaches Q/alpha."""
    started = time.perf_counter()
    if epsilon <= 0 or alpha < 1:
        raise InputError(f"need epsilon > 0 and alpha >= 1, got {epsilon}, {alpha}")
    prize_of = _prize_function(oracle)
    positive = [c for c in graph.cost if c > 0]
    ceiling = graph.total_cost()
    B = min(positive) if positive else 0.0
    target = Q / alpha
    iterations = 0
    while True:
        iterations += 1
        try:
            tree = _as_tree(budget_solver(graph, B))
        except InfeasibleError as e:
            logger.debug(f"quota_via_budget: budget {B:.6g} infeasible ({e})")
            tree = None
        if tree is not None:
            prize = prize_of(tree)
            if prize >= target * (1 - 1e-12):
                logger.info(f"quota_via_budget: reached prize {prize:.6g} with budget {B:.6g} "
                            f"after {iterations} iterations")
                return SolveReport(tree=tree, prize=prize, lp_bound=None, epsilon=epsilon,
                                   guesses_tried=iterations, wallclock_ms=_elapsed_ms(started),
                                   budget=B, quota=Q, branch='reduction')
        if B >= ceiling:
            raise QuotaUnreachableError(f"quota {Q} is not reached even with budget {ceiling}")
        B = min((1 + epsilon) * B, ceiling)


def _reachable_prize(graph: NodeWeightedGraph, oracle: Optional[PrizeOracle]) -> Tuple[float, float]:
    reach = node_weighted_shortest_paths(graph, graph.root)
    nodes = [v for v in graph.nodes() if reach.reachable(v)]
    if oracle is None:
        singles = [graph.prize[v] for v in nodes]
        total = graph.total_prize(nodes)
    else:
        singles = [oracle.singleton(v) for v in nodes]
        total = oracle.evaluate(nodes)
    positive = [p for p in singles if p > 0]
    return total, (min(positive) if positive else 0.0)


def budget_via_quota(graph: NodeWeightedGraph, B: float,
                     quota_solver: Callable[[NodeWeightedGraph, float], Union[RootedTree, SolveReport]],
                     epsilon: float, alpha: float = 1.0,
                     oracle: Optional[PrizeOracle] = None) -> SolveReport:
    """Lower the quota geometrically until the quota solver fits within alpha*B.

    The quota walks P, P/(1+eps), ... down to the smallest positive singleton
    prize, then 0.
    """
    started = time.perf_counter()
    if epsilon <= 0 or alpha < 1:
        raise InputError(f"need epsilon > 0 and alpha >= 1, got {epsilon}, {alpha}")
    if B < graph.cost[graph.root]:
        raise InfeasibleError(f"budget {B} is below the root cost {graph.cost[graph.root]}")
    prize_of = _prize_function(oracle)
    total, smallest = _reachable_prize(graph, oracle)
    Q = total
    iterations = 0
    while True:
        iterations += 1
        try:
            tree = _as_tree(quota_solver(graph, Q))
        except InfeasibleError as e:
            logger.debug(f"budget_via_quota: quota {Q:.6g} infeasible ({e})")
            tree = None
        if tree is not None and tree.cost <= alpha * B * (1 + 1e-12) + 1e-12:
            prize = prize_of(tree)
            logger.info(f"budget_via_quota: cost {tree.cost:.6g} within budget at quota {Q:.6g} "
                        f"after {iterations} iterations")
            return SolveReport(tree=tree, prize=prize, lp_bound=None, epsilon=epsilon,
                               guesses_tried=iterations, wallclock_ms=_elapsed_ms(started),
                               budget=B, quota=Q, branch='reduction')
        if Q <= 0:
            raise InfeasibleError(f"even the root alone does not fit within {alpha}*{B}")
        if Q > smallest and Q / (1 + epsilon) < smallest:
            Q = smallest
        elif Q <= smallest:
            Q = 0.0
        else:
            Q = Q / (1 + epsilon)
