#!/usr/bin/env python3
"""
Steiner - command line for the node-weighted Steiner tree solvers
Subcommands: solve, oracle, verify, gen, bench, lp-dump.
Exit codes: 0 ok, 1 usage/input, 2 infeasible, 3 numerical failure, 4 contract failure.
"""

import argparse
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import progress
import settings
from errors import ContractError, InfeasibleError, InputError, SizeError, SteinerError
from flow_lp import Objective, build_const_drat, build_const_urst, build_lp_dst
from graph_core import prune_to_b_proper
from instance_io import (INSTANCE_SUFFIX, KINDS, BenchRecord, InstanceFile, bench_csv_text, emit_instance,
                         emit_solution, format_lp_text, gen_random, parse_solution, read_instance, verify,
                         write_text_atomic)
from oracles import exact_optimum
from steiner_directed import SolveReport, solve_bdrat, solve_dst, solve_qdrat
from steiner_submodular import solve_burst, solve_qurst
from submodular import restrict_oracle

logger = logging.getLogger(__name__)

# Relative slack when checking LP bounds against exact optima.
BRACKET_TOL = 1e-6

ALGORITHMS = {
    'dst': 'solve_dst',
    'bdrat': 'solve_bdrat',
    'qdrat': 'solve_qdrat',
    'burst': 'solve_burst',
    'qurst': 'solve_qurst',
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of calling sys.exit(2)."""

    def error(self, message):
        raise _UsageError(message)


def solve_instance(inst: InstanceFile, epsilon: Optional[float] = None) -> SolveReport:
    eps = inst.epsilon if epsilon is None else epsilon
    g = inst.graph
    if inst.kind == 'dst':
        return solve_dst(g, inst.terminals, eps)
    if inst.kind == 'bdrat':
        return solve_bdrat(g, inst.budget, eps)
    if inst.kind == 'qdrat':
        return solve_qdrat(g, inst.quota, eps)
    if inst.kind == 'burst':
        return solve_burst(g, inst.oracle, inst.budget, eps)
    return solve_qurst(g, inst.oracle, inst.quota, eps)


def relaxation_for(inst: InstanceFile):
    """The LP a pipeline starts from, on the full graph (pruned to B for budget kinds)."""
    g = inst.graph
    if inst.kind == 'dst':
        return build_lp_dst(g, inst.terminals).model
    if inst.kind == 'bdrat':
        return build_const_drat(prune_to_b_proper(g, inst.budget), B=inst.budget).model
    if inst.kind == 'qdrat':
        return build_const_drat(g, Q=inst.quota, objective=Objective.MIN_COST).model
    if inst.kind == 'burst':
        pruned = prune_to_b_proper(g, inst.budget)
        return build_const_urst(pruned, restrict_oracle(inst.oracle, pruned.origin), B=inst.budget).model
    return build_const_urst(g, inst.oracle, Q=inst.quota, objective=Objective.MIN_COST).model


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        write_text_atomic(Path(out), text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> int:
    inst = read_instance(Path(args.file))
    try:
        report = solve_instance(inst, args.epsilon)
    except InfeasibleError as e:
        logger.error(f"{inst.name}: {e}")
        _write_output(emit_solution(inst.graph, None), args.out)
        return e.exit_code
    logger.info(
        f"{inst.name}: {report.branch} tree, {report.tree.size} nodes, cost {report.cost:.6g}, "
        f"prize {report.prize:.6g}, LP bound {report.lp_bound}, {report.wallclock_ms} ms"
    )
    _write_output(emit_solution(inst.graph, report.tree, report.prize), args.out)
    return 0


def _cmd_oracle(args) -> int:
    inst = read_instance(Path(args.file))
    result = exact_optimum(inst.graph, inst.kind, inst.params, inst.oracle if inst.submodular else None)
    if result.best_set is None:
        logger.error(f"{inst.name}: no feasible node set among {result.enumerated} connected sets")
        _write_output(emit_solution(inst.graph, None), args.out)
        return InfeasibleError.exit_code
    tree = result.tree(inst.graph)
    logger.info(f"{inst.name}: exact value {result.best_value:.9g} over {result.enumerated} connected sets")
    _write_output(emit_solution(inst.graph, tree, inst.oracle.evaluate(tree.members)), args.out)
    return 0


def _cmd_verify(args) -> int:
    inst = read_instance(Path(args.instance))
    sol = parse_solution(Path(args.solution).read_text(encoding='utf-8'), inst.graph)
    problems = verify(inst, sol)
    for problem in problems:
        logger.error(f"verify: {problem}")
    if problems:
        return ContractError.exit_code
    print(f"ok {sol.status}")
    return 0


def _cmd_gen(args) -> int:
    inst = gen_random(args.kind, args.n, args.density, (args.cost_min, args.cost_max),
                      args.prize_kind, args.seed)
    _write_output(emit_instance(inst), args.out)
    return 0


def _cmd_lp_dump(args) -> int:
    inst = read_instance(Path(args.file))
    model = relaxation_for(inst)
    logger.info(f"{inst.name}: {model.num_vars} variables, {model.num_rows} rows")
    _write_output(format_lp_text(model), args.out)
    return 0


def _bench_one(path: Path, with_oracle: bool) -> Tuple[BenchRecord, List[str]]:
    """Solve one instance; returns its CSV record and any bracketing failures."""
    inst = read_instance(path)
    record = BenchRecord(instance=inst.name, algorithm=ALGORITHMS[inst.kind], n=inst.graph.node_count,
                         seed=inst.seed)
    failures: List[str] = []
    started = time.perf_counter()
    try:
        report = solve_instance(inst)
    except InfeasibleError as e:
        logger.warning(f"bench {inst.name}: {e}")
        progress.record_outcome(progress.SolveOutcome(
            instance=inst.name, kind=inst.kind, feasible=False,
            runtime_ms=int((time.perf_counter() - started) * 1000)))
        report = None
    if report is not None:
        record.cost = report.cost
        record.prize = report.prize
        record.budget_violation = report.budget_violation
        record.quota_fraction = report.quota_fraction
        record.lp_bound = report.lp_bound
        record.runtime_ms = report.wallclock_ms
        progress.record_outcome(progress.SolveOutcome(
            instance=inst.name, kind=inst.kind, feasible=True, branch=report.branch,
            cost=report.cost, lp_bound=report.lp_bound, runtime_ms=report.wallclock_ms))
    if with_oracle:
        try:
            exact = exact_optimum(inst.graph, inst.kind, inst.params, inst.oracle if inst.submodular else None)
        except SizeError as e:
            logger.warning(f"bench {inst.name}: skipping exact oracle ({e})")
            return record, failures
        if exact.best_set is not None:
            maximize = inst.kind in ('bdrat', 'burst')
            if maximize:
                record.opt_prize = exact.best_value
            else:
                record.opt_cost = exact.best_value
            lp = record.lp_bound
            if lp is not None:
                slack = BRACKET_TOL * max(1.0, abs(exact.best_value))
                if maximize and lp < exact.best_value - slack:
                    failures.append(f"{inst.name}: LP bound {lp:.9g} below exact prize {exact.best_value:.9g}")
                if not maximize and lp > exact.best_value + slack:
                    failures.append(f"{inst.name}: LP bound {lp:.9g} above exact cost {exact.best_value:.9g}")
    return record, failures


def _cmd_bench(args) -> int:
    folder = Path(args.dir)
    if not folder.is_dir():
        raise InputError(f"bench directory {folder} does not exist")
    files = sorted(folder.glob(f"*{INSTANCE_SUFFIX}"))
    if not files:
        raise InputError(f"no *{INSTANCE_SUFFIX} files in {folder}")
    progress.begin_bench(len(files))
    with ThreadPoolExecutor(max_workers=settings.BENCH_WORKERS) as executor:
        results = list(executor.map(lambda p: _bench_one(p, args.with_oracle), files))
    progress.clear_lane('bench')
    write_text_atomic(Path(args.csv), bench_csv_text([r for r, _ in results]))
    summary = progress.bench_summary()
    logger.info(f"bench: {summary['finished']}/{summary['queued']} instances, wrote {args.csv}; "
                f"slowest {summary['slowest']} ({summary['slowest_ms']} ms)"
                + (f", infeasible: {summary['infeasible']}" if summary['infeasible'] else ''))
    failures = [f for _, fs in results for f in fs]
    for failure in failures:
        logger.error(f"bracketing: {failure}")
    return ContractError.exit_code if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='steiner', description='Node-weighted Steiner tree approximation solvers')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('solve', help='Solve an instance file')
    p.add_argument('file')
    p.add_argument('--epsilon', type=float, default=None, help='Override the instance epsilon')
    p.add_argument('--out', help='Solution file (default: stdout)')
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser('oracle', help='Exact optimum by enumeration (small instances)')
    p.add_argument('file')
    p.add_argument('--out')
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser('verify', help='Recompute and check a solution file')
    p.add_argument('instance')
    p.add_argument('solution')
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser('gen', help='Generate a random instance')
    p.add_argument('kind', choices=KINDS)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--density', type=float, default=0.3)
    p.add_argument('--cost-min', type=int, default=1)
    p.add_argument('--cost-max', type=int, default=10)
    p.add_argument('--prize-kind', choices=('additive', 'coverage'), default='additive')
    p.add_argument('--out')
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser('bench', help=f'Solve every *{INSTANCE_SUFFIX} file in a directory')
    p.add_argument('dir')
    p.add_argument('--csv', required=True)
    p.add_argument('--with-oracle', action='store_true', help='Check LP bounds against exact optima')
    p.set_defaults(handler=_cmd_bench)

    p = sub.add_parser('lp-dump', help='Write the starting relaxation in LP text format')
    p.add_argument('file')
    p.add_argument('--out', required=True)
    p.set_defaults(handler=_cmd_lp_dump)
    return parser


def run_command(argv: Sequence[str]) -> int:
    try:
        args = build_parser().parse_args(list(argv))
    except _UsageError as e:
        logger.error(f"usage: {e}")
        return 1
    try:
        return args.handler(args)
    except SteinerError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 1


def main():
    argv = sys.argv[1:]
    verbose = '-v' in argv or '--verbose' in argv
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format='%(asctime)s [%(levelname)s] %(message)s',
        datefmt='%H:%M:%S'
    )
    sys.exit(run_command(argv))


if __name__ == '__main__':
    main()
