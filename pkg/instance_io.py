#!/usr/bin/env python3
"""
Instance I/O - text formats, random instances, bench rows and verification
Instances and solutions are line-based UTF-8 with '#' comments. Every output
file is written atomically.
"""

import csv
import io
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

import settings
from errors import GenerationError, InputError, InstanceFormatError
from graph_core import NodeWeightedGraph, RootedTree, node_weighted_shortest_paths, to_networkx
from lp_engine import LpModel, Relation, Sense
from submodular import AdditiveOracle, CoverageOracle, PrizeOracle

logger = logging.getLogger(__name__)

INSTANCE_HEADER = 'steiner-instance v1'
SOLUTION_HEADER = 'solution v1'
INSTANCE_SUFFIX = '.inst'
KINDS = ('dst', 'bdrat', 'qdrat', 'burst', 'qurst')
DIRECTED_KINDS = ('dst', 'bdrat', 'qdrat')
BUDGET_KINDS = ('bdrat', 'burst')
QUOTA_KINDS = ('qdrat', 'qurst')
SUBMODULAR_KINDS = ('burst', 'qurst')
BENCH_HEADER = ('instance', 'algorithm', 'n', 'cost', 'prize', 'opt_cost', 'opt_prize',
                'budget_violation', 'quota_fraction', 'lp_bound', 'runtime_ms', 'seed')
GEN_MAX_ATTEMPTS = 50
VERIFY_REL_TOL = 1e-8


def fmt(x: float) -> str:
    return format(float(x), '.9g')


@dataclass
class InstanceFile:
    kind: str
    graph: NodeWeightedGraph
    budget: Optional[float] = None
    quota: Optional[float] = None
    terminals: Tuple[int, ...] = ()
    covers: Dict[int, Tuple[str, ...]] = field(default_factory=dict)
    weights: Dict[str, float] = field(default_factory=dict)
    epsilon: float = settings.DEFAULT_EPSILON
    seed: Optional[int] = None
    name: str = ''

    @property
    def submodular(self) -> bool:
        return bool(self.covers)

    @property
    def oracle(self) -> PrizeOracle:
        """Coverage oracle when cover records exist, else the additive node prizes."""
        if not self.covers:
            return AdditiveOracle(self.graph.prize)
        covers = [self.covers.get(v, ()) for v in self.graph.nodes()]
        return CoverageOracle(covers, self.weights)

    @property
    def params(self) -> Dict[str, object]:
        if self.kind == 'dst':
            return {'terminals': self.terminals}
        if self.kind in BUDGET_KINDS:
            return {'budget': self.budget}
        return {'quota': self.quota}


@dataclass
class SolutionFile:
    status: str
    cost: Optional[float] = None
    prize: Optional[float] = None
    nodes: Tuple[int, ...] = ()
    arcs: Tuple[Tuple[int, int], ...] = ()


@dataclass
class BenchRecord:
    instance: str
    algorithm: str
    n: int
    cost: Optional[float] = None
    prize: Optional[float] = None
    opt_cost: Optional[float] = None
    opt_prize: Optional[float] = None
    budget_violation: Optional[float] = None
    quota_fraction: Optional[float] = None
    lp_bound: Optional[float] = None
    runtime_ms: int = 0
    seed: Optional[int] = None

    def row(self) -> List[str]:
        out = []
        for name in BENCH_HEADER:
            value = getattr(self, name)
            if value is None:
                out.append('')
            elif isinstance(value, float):
                out.append(fmt(value))
            else:
                out.append(str(value))
        return out


def _real(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InstanceFormatError(line_no, f"{what} {token!r} is not a number") from None
    if not math.isfinite(value):
        raise InstanceFormatError(line_no, f"{what} must be finite, got {token}")
    return value


def _seed_comment(comment: str) -> Optional[int]:
    parts = comment.split()
    if len(parts) == 2 and parts[0] == 'seed':
        try:
            return int(parts[1])
        except ValueError:
            return None
    return None


def parse_instance(text: str, name: str = '') -> InstanceFile:
    """Parse the instance format; ids get dense indices in declaration order."""
    header_seen = False
    kind: Optional[str] = None
    directed: Optional[bool] = None
    declared: Optional[int] = None
    ids: Dict[str, int] = {}
    labels: List[str] = []
    costs: List[float] = []
    prizes: List[float] = []
    links: List[Tuple[int, int]] = []
    link_keys = set()
    root: Optional[int] = None
    budget = quota = epsilon = None
    terminals: List[int] = []
    covers: Dict[int, Tuple[str, ...]] = {}
    weights: Dict[str, float] = {}
    seed: Optional[int] = None
    last_line = 0

    def node(token: str, line_no: int) -> int:
        if token not in ids:
            raise InstanceFormatError(line_no, f"node {token!r} is used before its 'v' record")
        return ids[token]

    for line_no, raw in enumerate(text.splitlines(), start=1):
        last_line = line_no
        body, _, comment = raw.partition('#')
        if comment and seed is None:
            seed = _seed_comment(comment)
        fields = body.split()
        if not fields:
            continue
        if not header_seen:
            if ' '.join(fields) != INSTANCE_HEADER:
                raise InstanceFormatError(line_no, f"expected header {INSTANCE_HEADER!r}")
            header_seen = True
            continue
        tag, args = fields[0], fields[1:]

        def arity(count: int) -> None:
            if len(args) != count:
                raise InstanceFormatError(line_no, f"'{tag}' takes {count} field(s), got {len(args)}")

        def once(current, what: str) -> None:
            if current is not None:
                raise InstanceFormatError(line_no, f"duplicate '{what}' record")

        if tag == 'problem':
            arity(1)
            once(kind, 'problem')
            if args[0] not in KINDS:
                raise InstanceFormatError(line_no, f"unknown problem kind {args[0]!r}")
            kind = args[0]
        elif tag == 'directed':
            arity(1)
            once(directed, 'directed')
            if args[0] not in ('true', 'false'):
                raise InstanceFormatError(line_no, f"directed must be true or false, got {args[0]!r}")
            directed = args[0] == 'true'
        elif tag == 'nodes':
            arity(1)
            once(declared, 'nodes')
            try:
                declared = int(args[0])
            except ValueError:
                raise InstanceFormatError(line_no, f"node count {args[0]!r} is not an integer") from None
            if declared < 1:
                raise InstanceFormatError(line_no, "an instance needs at least one node")
        elif tag == 'v':
            arity(3)
            if kind is None or directed is None or declared is None:
                raise InstanceFormatError(line_no, "'problem', 'directed' and 'nodes' must precede 'v' records")
            if args[0] in ids:
                raise InstanceFormatError(line_no, f"node {args[0]!r} declared twice")
            if len(ids) >= declared:
                raise InstanceFormatError(line_no, f"more 'v' records than the declared {declared} nodes")
            cost = _real(args[1], line_no, 'cost')
            prize = _real(args[2], line_no, 'prize')
            if cost < 0 or prize < 0:
                raise InstanceFormatError(line_no, f"node {args[0]!r} has a negative cost or prize")
            ids[args[0]] = len(labels)
            labels.append(args[0])
            costs.append(cost)
            prizes.append(prize)
        elif tag in ('a', 'e'):
            arity(2)
            if directed is None:
                raise InstanceFormatError(line_no, "'directed' must precede connections")
            if tag == 'a' and not directed:
                raise InstanceFormatError(line_no, "'a' records need 'directed true'; use 'e'")
            if tag == 'e' and directed:
                raise InstanceFormatError(line_no, "'e' records need 'directed false'; use 'a'")
            u, v = node(args[0], line_no), node(args[1], line_no)
            if u == v:
                raise InstanceFormatError(line_no, f"self-loop on node {args[0]!r}")
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key in link_keys:
                raise InstanceFormatError(line_no, f"duplicate connection {args[0]} {args[1]}")
            link_keys.add(key)
            links.append((u, v))
        elif tag == 'root':
            arity(1)
            once(root, 'root')
            root = node(args[0], line_no)
        elif tag == 'budget':
            arity(1)
            once(budget, 'budget')
            budget = _real(args[0], line_no, 'budget')
            if budget < 0:
                raise InstanceFormatError(line_no, "budget must be nonnegative")
        elif tag == 'quota':
            arity(1)
            once(quota, 'quota')
            quota = _real(args[0], line_no, 'quota')
            if quota < 0:
                raise InstanceFormatError(line_no, "quota must be nonnegative")
        elif tag == 'terminal':
            arity(1)
            terminals.append(node(args[0], line_no))
        elif tag == 'cover':
            if not args:
                raise InstanceFormatError(line_no, "'cover' needs a node id")
            v = node(args[0], line_no)
            if v in covers:
                raise InstanceFormatError(line_no, f"node {args[0]!r} has two 'cover' records")
            covers[v] = tuple(args[1:])
        elif tag == 'weight':
            arity(2)
            if args[0] in weights:
                raise InstanceFormatError(line_no, f"element {args[0]!r} weighted twice")
            w = _real(args[1], line_no, 'weight')
            if w < 0:
                raise InstanceFormatError(line_no, f"element {args[0]!r} has a negative weight")
            weights[args[0]] = w
        elif tag == 'epsilon':
            arity(1)
            once(epsilon, 'epsilon')
            epsilon = _real(args[0], line_no, 'epsilon')
            if epsilon <= 0:
                raise InstanceFormatError(line_no, "epsilon must be positive")
        else:
            raise InstanceFormatError(line_no, f"unknown record tag {tag!r}")

    end = last_line + 1
    if not header_seen:
        raise InstanceFormatError(end, "missing header")
    if kind is None or directed is None or declared is None:
        raise InstanceFormatError(end, "'problem', 'directed' and 'nodes' are required")
    if len(labels) != declared:
        raise InstanceFormatError(end, f"declared {declared} nodes but found {len(labels)} 'v' records")
    if root is None:
        raise InstanceFormatError(end, "missing 'root' record")
    if directed != (kind in DIRECTED_KINDS):
        raise InstanceFormatError(end, f"problem {kind} needs 'directed {str(kind in DIRECTED_KINDS).lower()}'")
    wants_budget = kind in BUDGET_KINDS
    wants_quota = kind in QUOTA_KINDS
    if (budget is not None) != wants_budget or (quota is not None) != wants_quota:
        needed = 'budget' if wants_budget else 'quota' if wants_quota else 'neither budget nor quota'
        raise InstanceFormatError(end, f"problem {kind} takes exactly {needed}")
    if terminals and kind != 'dst':
        raise InstanceFormatError(end, "'terminal' records are only valid for dst")
    if (covers or weights) and kind not in SUBMODULAR_KINDS:
        raise InstanceFormatError(end, "'cover'/'weight' records are only valid for burst and qurst")
    if epsilon is None:
        epsilon = settings.DEFAULT_EPSILON
    if kind in BUDGET_KINDS and epsilon > 1:
        raise InstanceFormatError(end, f"budget problems need epsilon in (0,1], got {epsilon}")
    elements = {e for cover in covers.values() for e in cover}
    for e in sorted(elements - set(weights)):
        weights[e] = 1.0

    graph = NodeWeightedGraph.from_arcs(costs, prizes, links, root=root, directed=directed, labels=labels)
    return InstanceFile(
        kind=kind, graph=graph, budget=budget, quota=quota, terminals=tuple(sorted(set(terminals))),
        covers=covers, weights=weights, epsilon=epsilon, seed=seed, name=name,
    )


def read_instance(path: Path) -> InstanceFile:
    path = Path(path)
    return parse_instance(path.read_text(encoding='utf-8'), name=path.stem)


def emit_instance(inst: InstanceFile) -> str:
    """Canonical text: parse(emit(x)) reproduces x."""
    g = inst.graph
    lines = [INSTANCE_HEADER]
    if inst.seed is not None:
        lines.append(f"# seed {inst.seed}")
    lines += [f"problem {inst.kind}", f"directed {'true' if g.directed else 'false'}", f"nodes {g.node_count}"]
    lines += [f"v {g.label(v)} {fmt(g.cost[v])} {fmt(g.prize[v])}" for v in g.nodes()]
    tag = 'a' if g.directed else 'e'
    for u, v in g.arcs():
        if g.directed or u < v:
            lines.append(f"{tag} {g.label(u)} {g.label(v)}")
    lines.append(f"root {g.label(g.root)}")
    if inst.budget is not None:
        lines.append(f"budget {fmt(inst.budget)}")
    if inst.quota is not None:
        lines.append(f"quota {fmt(inst.quota)}")
    lines += [f"terminal {g.label(t)}" for t in inst.terminals]
    for v in sorted(inst.covers):
        lines.append(' '.join(['cover', g.label(v), *inst.covers[v]]))
    lines += [f"weight {e} {fmt(w)}" for e, w in sorted(inst.weights.items())]
    lines.append(f"epsilon {fmt(inst.epsilon)}")
    return '\n'.join(lines) + '\n'


def emit_solution(graph: NodeWeightedGraph, tree: Optional[RootedTree], prize: Optional[float] = None) -> str:
    """Solution text; ``tree=None`` writes an infeasible status."""
    if tree is None:
        return f"{SOLUTION_HEADER}\nstatus infeasible\n"
    prize = tree.prize_additive if prize is None else prize
    lines = [SOLUTION_HEADER, 'status ok', f"cost {fmt(tree.cost)}", f"prize {fmt(prize)}"]
    lines += [f"node {graph.label(v)}" for v in sorted(tree.members)]
    lines += [f"arc {graph.label(p)} {graph.label(c)}" for p, c in tree.arcs()]
    return '\n'.join(lines) + '\n'


def parse_solution(text: str, graph: NodeWeightedGraph) -> SolutionFile:
    ids = {graph.label(v): v for v in graph.nodes()}
    lines = [(i, raw.partition('#')[0].split()) for i, raw in enumerate(text.splitlines(), start=1)]
    lines = [(i, f) for i, f in lines if f]
    if not lines or ' '.join(lines[0][1]) != SOLUTION_HEADER:
        raise InstanceFormatError(lines[0][0] if lines else 1, f"expected header {SOLUTION_HEADER!r}")
    sol = SolutionFile(status='')
    nodes: List[int] = []
    arcs: List[Tuple[int, int]] = []

    def node(token: str, line_no: int) -> int:
        if token not in ids:
            raise InstanceFormatError(line_no, f"solution names unknown node {token!r}")
        return ids[token]

    for line_no, fields in lines[1:]:
        tag, args = fields[0], fields[1:]
        expected = {'status': 1, 'cost': 1, 'prize': 1, 'node': 1, 'arc': 2}
        if tag not in expected:
            raise InstanceFormatError(line_no, f"unknown solution record {tag!r}")
        if len(args) != expected[tag]:
            raise InstanceFormatError(line_no, f"'{tag}' takes {expected[tag]} field(s)")
        if tag == 'status':
            if args[0] not in ('ok', 'infeasible'):
                raise InstanceFormatError(line_no, f"unknown status {args[0]!r}")
            sol.status = args[0]
        elif tag == 'cost':
            sol.cost = _real(args[0], line_no, 'cost')
        elif tag == 'prize':
            sol.prize = _real(args[0], line_no, 'prize')
        elif tag == 'node':
            nodes.append(node(args[0], line_no))
        else:
            arcs.append((node(args[0], line_no), node(args[1], line_no)))
    if not sol.status:
        raise InstanceFormatError(lines[-1][0] + 1, "missing 'status' record")
    sol.nodes = tuple(nodes)
    sol.arcs = tuple(arcs)
    return sol


def feasibility_witness(inst: InstanceFile) -> Optional[str]:
    """Describe a feasible solution of ``inst`` if one exists, else None."""
    g = inst.graph
    reach = node_weighted_shortest_paths(g, g.root)
    if inst.kind == 'dst':
        if all(reach.reachable(t) for t in inst.terminals):
            return "every terminal is reachable from the root"
        return None
    if inst.kind in BUDGET_KINDS:
        if g.cost[g.root] <= inst.budget * (1 + 1e-9) + 1e-9:
            return f"the root alone costs {fmt(g.cost[g.root])}, within B = {fmt(inst.budget)}"
        return None
    reachable = [v for v in g.nodes() if reach.reachable(v)]
    prize = inst.oracle.evaluate(reachable)
    if prize >= inst.quota * (1 - 1e-9) - 1e-9:
        return f"the nodes reachable from the root earn {fmt(prize)}, reaching Q = {fmt(inst.quota)}"
    return None


def verify(inst: InstanceFile, sol: SolutionFile) -> List[str]:
    """Recompute a solution from scratch; returns every problem found (empty means valid)."""
    if sol.status == 'infeasible':
        witness = feasibility_witness(inst)
        return [f"claimed infeasible but {witness}"] if witness else []
    g = inst.graph
    problems = []
    members = set(sol.nodes)
    if len(members) != len(sol.nodes):
        problems.append("solution lists a node twice")
    if g.root not in members:
        problems.append(f"root {g.label(g.root)} is missing")
    host = to_networkx(g)
    tree = nx.DiGraph()
    tree.add_nodes_from(members)
    for u, v in sol.arcs:
        if not host.has_edge(u, v):
            problems.append(f"arc {g.label(u)} {g.label(v)} is not in the graph")
        if u not in members or v not in members:
            problems.append(f"arc {g.label(u)} {g.label(v)} leaves the node list")
        tree.add_edge(u, v)
    rooted = g.root in tree and nx.is_arborescence(tree) and tree.in_degree(g.root) == 0
    if members and not rooted:
        problems.append("arcs do not form an out-tree rooted at the root")
    cost = math.fsum(g.cost[v] for v in members)
    prize = inst.oracle.evaluate(members)
    if sol.cost is None or not math.isclose(cost, sol.cost, rel_tol=VERIFY_REL_TOL, abs_tol=1e-9):
        problems.append(f"claimed cost {sol.cost} but the nodes cost {fmt(cost)}")
    if sol.prize is None or not math.isclose(prize, sol.prize, rel_tol=VERIFY_REL_TOL, abs_tol=1e-9):
        problems.append(f"claimed prize {sol.prize} but the nodes earn {fmt(prize)}")
    slack = 1e-9
    if inst.kind == 'dst':
        missing = [g.label(t) for t in inst.terminals if t not in members]
        if missing:
            problems.append(f"terminals {missing} are not spanned")
    elif inst.kind in BUDGET_KINDS:
        limit = (1 + inst.epsilon) * inst.budget
        if cost > limit * (1 + slack) + slack:
            problems.append(f"cost {fmt(cost)} exceeds (1+eps)B = {fmt(limit)}")
    elif inst.kind == 'qdrat':
        if prize < inst.quota / 2 * (1 - slack) - slack:
            problems.append(f"prize {fmt(prize)} is below Q/2 = {fmt(inst.quota / 2)}")
    else:
        floor = inst.quota / (2 * math.sqrt(g.node_count))
        if prize < floor * (1 - slack) - slack:
            problems.append(f"prize {fmt(prize)} is below Q/(2 sqrt n) = {fmt(floor)}")
    return problems


def format_lp_text(model: LpModel) -> str:
    """CPLEX-LP style rendering of a model, one row per line."""
    def terms(pairs) -> str:
        parts = [f"{'-' if a < 0 else '+'} {fmt(abs(a))} {model.var_name(j)}" for j, a in pairs if a != 0]
        if not parts:
            return '0'
        text = ' '.join(parts)
        return text[2:] if text.startswith('+ ') else text

    ops = {Relation.LE: '<=', Relation.EQ: '=', Relation.GE: '>='}
    lines = ['\\ node-weighted Steiner relaxation',
             'Minimize' if model.sense is Sense.MINIMIZE else 'Maximize',
             f" obj: {terms(enumerate(model.objective))}",
             'Subject To']
    for i, row in enumerate(model.rows):
        name = row.name or f"r{i}"
        lines.append(f" {name}: {terms(zip(row.indices, row.values))} {ops[row.relation]} {fmt(row.rhs)}")
    lines.append('Bounds')
    for j in range(model.num_vars):
        lines.append(f" {fmt(model.lower[j])} <= {model.var_name(j)} <= {fmt(model.upper[j])}")
    lines.append('End')
    return '\n'.join(lines) + '\n'


def gen_random(kind: str, n: int, arc_density: float, cost_range: Tuple[int, int] = (1, 10),
               prize_kind: str = 'additive', seed: int = 0) -> InstanceFile:
    """Random instance, reproducible from ``seed``; node 0 is the zero-cost root."""
    if kind not in KINDS:
        raise InputError(f"unknown problem kind {kind!r}")
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    if not 0 < arc_density <= 1:
        raise InputError(f"arc density must lie in (0,1], got {arc_density}")
    if prize_kind not in ('additive', 'coverage'):
        raise InputError(f"unknown prize kind {prize_kind!r}")
    if prize_kind == 'coverage' and kind not in SUBMODULAR_KINDS:
        raise InputError("coverage prizes are only available for burst and qurst")
    lo, hi = cost_range
    if lo < 0 or hi < lo:
        raise InputError(f"invalid cost range {cost_range}")
    directed = kind in DIRECTED_KINDS
    rng = np.random.default_rng(seed)
    costs = [float(c) for c in rng.integers(lo, hi + 1, size=n)]
    costs[0] = 0.0
    prizes = [float(p) for p in rng.integers(0, 11, size=n)]
    prizes[0] = 0.0
    covers: Dict[int, Tuple[str, ...]] = {}
    weights: Dict[str, float] = {}
    if prize_kind == 'coverage':
        universe = [f"e{k}" for k in range(max(2, n))]
        weights = {e: float(w) for e, w in zip(universe, rng.integers(1, 6, size=len(universe)))}
        for v in range(1, n):
            size = int(rng.integers(1, 4))
            covers[v] = tuple(sorted(str(e) for e in rng.choice(universe, size=size, replace=False)))
        prizes = [0.0] * n

    pairs = [(u, v) for u in range(n) for v in range(n) if u != v and (directed or u < v)]
    need = math.ceil(n / 2)
    for attempt in range(GEN_MAX_ATTEMPTS):
        links = [pair for pair, draw in zip(pairs, rng.random(len(pairs))) if draw < arc_density]
        graph = NodeWeightedGraph.from_arcs(costs, prizes, links, root=0, directed=directed,
                                            labels=[str(v) for v in range(n)])
        reach = node_weighted_shortest_paths(graph, 0)
        reachable = [v for v in graph.nodes() if reach.reachable(v)]
        if len(reachable) >= need:
            break
        logger.debug(f"gen: attempt {attempt + 1} reaches {len(reachable)}/{n} nodes, re-rolling")
    else:
        raise GenerationError(seed, f"no arc draw reached {need} of {n} nodes in {GEN_MAX_ATTEMPTS} attempts")

    inst = InstanceFile(kind=kind, graph=graph, covers=covers, weights=weights,
                        epsilon=settings.DEFAULT_EPSILON, seed=seed, name=f"{kind}-n{n}-s{seed}")
    if kind in BUDGET_KINDS:
        inst.budget = float(max(1, round(0.3 * graph.total_cost())))
    elif kind in QUOTA_KINDS:
        total = inst.oracle.evaluate(reachable)
        inst.quota = float(round(0.4 * total))
    else:
        others = [v for v in reachable if v != 0]
        count = min(math.ceil(n / 4), len(others))
        picked = rng.choice(others, size=count, replace=False) if count else []
        inst.terminals = tuple(sorted(int(v) for v in picked))
    if kind in BUDGET_KINDS and inst.epsilon > 1:
        inst.epsilon = 1.0
    return inst


def bench_csv_text(records: Sequence[BenchRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(BENCH_HEADER)
    for record in records:
        writer.writerow(record.row())
    return buffer.getvalue()


def read_bench_csv(path: Path) -> List[Dict[str, str]]:
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def write_text_atomic(path: Path, text: str) -> None:
    """Write to a temp file in the same directory, fsync, then os.replace."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path('.')
    temp_fd, temp_path = tempfile.mkstemp(suffix=path.suffix or '.tmp', prefix=f".{path.stem}_", dir=parent)
    try:
        with os.fdopen(temp_fd, 'w', encoding='utf-8') as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(temp_path, path)
        try:
            dir_fd = os.open(str(parent), os.O_RDONLY)
            try:
                os.fsync(dir_fd)
            finally:
                os.close(dir_fd)
        except OSError:
            pass
    except BaseException:
        try:
            os.unlink(temp_path)
        except OSError:
            pass
        raise
