#!/usr/bin/env python3
"""
Submodular prizes - monotone submodular oracles and tight capacities
Oracles must be stateless: pipelines may evaluate them from several threads.
"""

import abc
import logging
import math
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from errors import InputError, OracleContractError, ContractError, SizeError
from graph_core import RootedTree

logger = logging.getLogger(__name__)

TABLE_MAX_NODES = 16
TIGHT_MAX_NODES = 16
TIGHT_TOL = 1e-9
CONTRACT_TOL = 1e-9


class PrizeOracle(abc.ABC):
    """p: 2^V -> R>=0, monotone and submodular, p(empty) = 0."""

    kind = 'custom'

    def __init__(self, node_count: int):
        if node_count < 1:
            raise InputError("oracle needs at least one node")
        self.node_count = node_count

    @abc.abstractmethod
    def evaluate(self, nodes: Iterable[int]) -> float:
        ...

    @cached_property
    def singletons(self) -> np.ndarray:
        """p({v}) for every node, evaluated once."""
        return np.array([self.evaluate((v,)) for v in range(self.node_count)], dtype=float)

    def singleton(self, v: int) -> float:
        return float(self.singletons[v])

    def _check_nodes(self, nodes: Iterable[int]) -> FrozenSet[int]:
        s = frozenset(nodes)
        for v in s:
            if not 0 <= v < self.node_count:
                raise InputError(f"oracle asked about node {v} (n={self.node_count})")
        return s


class AdditiveOracle(PrizeOracle):
    kind = 'additive'

    def __init__(self, prizes: Sequence[float]):
        super().__init__(len(prizes))
        self.prizes = tuple(float(p) for p in prizes)
        if any(p < 0 or not math.isfinite(p) for p in self.prizes):
            raise InputError("additive prizes must be finite and nonnegative")

    def evaluate(self, nodes: Iterable[int]) -> float:
        return math.fsum(self.prizes[v] for v in self._check_nodes(nodes))


class CoverageOracle(PrizeOracle):
    """Weighted coverage: p(S) is the total weight of elements covered by S."""

    kind = 'coverage'

    def __init__(self, covers: Sequence[Iterable[str]], weights: Mapping[str, float]):
        super().__init__(len(covers))
        self.covers: Tuple[FrozenSet[str], ...] = tuple(frozenset(c) for c in covers)
        self.weights: Dict[str, float] = {str(e): float(w) for e, w in weights.items()}
        for elem, w in self.weights.items():
            if w < 0 or not math.isfinite(w):
                raise InputError(f"element {elem} has invalid weight {w}")
        missing = set().union(*self.covers) - set(self.weights)
        if missing:
            raise InputError(f"covered elements without a weight: {sorted(missing)}")

    def evaluate(self, nodes: Iterable[int]) -> float:
        covered = set()
        for v in self._check_nodes(nodes):
            covered |= self.covers[v]
        return math.fsum(self.weights[e] for e in sorted(covered))


class TableOracle(PrizeOracle):
    """Explicit table indexed by the bitmask of the node set."""

    kind = 'table'

    def __init__(self, node_count: int, table: Sequence[float]):
        if node_count > TABLE_MAX_NODES:
            raise SizeError(f"table oracle supports at most {TABLE_MAX_NODES} nodes, got {node_count}")
        super().__init__(node_count)
        if len(table) != 1 << node_count:
            raise InputError(f"table needs {1 << node_count} entries, got {len(table)}")
        self.table = np.asarray(table, dtype=float)
        if self.table[0] != 0:
            raise InputError("table oracle must map the empty set to 0")

    def evaluate(self, nodes: Iterable[int]) -> float:
        mask = 0
        for v in self._check_nodes(nodes):
            mask |= 1 << v
        return float(self.table[mask])


class SubgraphOracle(PrizeOracle):
    """View of ``base`` over an induced subgraph; ``origin[v]`` is v's id in the base."""

    def __init__(self, base: PrizeOracle, origin: Sequence[int]):
        super().__init__(len(origin))
        self.base = base
        self.origin = tuple(origin)
        self.kind = base.kind

    def evaluate(self, nodes: Iterable[int]) -> float:
        return self.base.evaluate(self.origin[v] for v in self._check_nodes(nodes))


def restrict_oracle(oracle: PrizeOracle, origin: Sequence[int]) -> PrizeOracle:
    if not origin:
        return oracle
    return SubgraphOracle(oracle, origin)


def evaluate(oracle: PrizeOracle, nodes: Iterable[int]) -> float:
    return oracle.evaluate(nodes)


def check_oracle_contract(oracle: PrizeOracle, samples: int = 200, seed: int = 0) -> None:
    """Spot-check p(empty)=0, monotonicity and diminishing returns on random triples."""
    if abs(oracle.evaluate(())) > CONTRACT_TOL:
        raise OracleContractError(f"{oracle.kind} oracle maps the empty set to {oracle.evaluate(())}")
    n = oracle.node_count
    if n < 2:
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        base = {int(v) for v in np.flatnonzero(rng.random(n) < 0.5)} - {a, b}
        p_s = oracle.evaluate(base)
        p_sa = oracle.evaluate(base | {a})
        p_sb = oracle.evaluate(base | {b})
        p_sab = oracle.evaluate(base | {a, b})
        scale = CONTRACT_TOL * max(1.0, abs(p_sab))
        if p_sa < p_s - scale:
            raise OracleContractError(
                f"{oracle.kind} oracle is not monotone: p(S+{a})={p_sa} < p(S)={p_s} for S={sorted(base)}"
            )
        if p_sa - p_s < p_sab - p_sb - scale:
            raise OracleContractError(
                f"{oracle.kind} oracle is not submodular at S={sorted(base)}, a={a}, b={b}"
            )


def _subset_table(members: Sequence[int], oracle: PrizeOracle) -> Tuple[np.ndarray, np.ndarray]:
    """(bit matrix, prize per mask) over all subsets of ``members``."""
    k = len(members)
    masks = np.arange(1 << k)
    bits = ((masks[:, None] >> np.arange(k)[None, :]) & 1).astype(bool)
    prizes = np.array(
        [oracle.evaluate(members[i] for i in np.flatnonzero(row)) for row in bits], dtype=float
    )
    return bits, prizes


def construct_tight_capacities(tree: RootedTree, oracle: PrizeOracle,
                               n: Optional[int] = None) -> Dict[int, float]:
    """Raise capacities from 1/n, one node at a time in ascending id order.

    Each node climbs until it reaches 1 or some set containing it becomes
    tight. ``n`` defaults to the member count.
    """
    members = sorted(tree.members)
    k = len(members)
    if k > TIGHT_MAX_NODES:
        raise SizeError(f"tight-capacity construction enumerates subsets; {k} members exceeds {TIGHT_MAX_NODES}")
    n = k if n is None else n
    bits, p_table = _subset_table(members, oracle)
    singles = np.array([p_table[1 << i] for i in range(k)])
    x = np.full(k, 1.0 / n)
    lhs = bits @ (x * singles)
    for i in range(k):
        if singles[i] <= 0:
            continue
        holding = bits[:, i]
        room = float(np.min(p_table[holding] - lhs[holding])) / singles[i]
        rise = max(0.0, min(1.0 - x[i], room))
        x[i] += rise
        lhs += rise * singles[i] * holding
    scale = TIGHT_TOL * max(1.0, float(p_table[-1]))
    worst = float(np.max(lhs - p_table))
    if worst > scale:
        raise ContractError(f"tight capacities overshoot a submodular row by {worst:.3g}")
    if abs(lhs[-1] - p_table[-1]) > scale:
        raise ContractError(
            f"row for the whole tree is not tight: {lhs[-1]:.12g} vs p={p_table[-1]:.12g}"
        )
    logger.debug(f"tight capacities over {k} members: min x={float(np.min(x)) if k else 0:.4g}")
    return {v: float(x[i]) for i, v in enumerate(members)}


def tight_sets(members: Iterable[int], oracle: PrizeOracle,
               capacities: Mapping[int, float]) -> List[FrozenSet[int]]:
    """All subsets S of ``members`` with sum x_v p_v == p(S) (the empty set included)."""
    ordered = sorted(members)
    bits, p_table = _subset_table(ordered, oracle)
    singles = np.array([p_table[1 << i] for i in range(len(ordered))])
    x = np.array([capacities[v] for v in ordered])
    lhs = bits @ (x * singles)
    scale = TIGHT_TOL * max(1.0, float(p_table[-1]))
    tight = np.flatnonzero(np.abs(lhs - p_table) <= scale)
    return [frozenset(ordered[i] for i in np.flatnonzero(bits[m])) for m in tight]


def audit_tight_closure(tight: Sequence[FrozenSet[int]]) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
    """Pairs of tight sets whose union or intersection is not itself tight."""
    known = set(tight)
    return [
        (a, b)
        for i, a in enumerate(tight)
        for b in tight[i + 1:]
        if (a | b) not in known or (a & b) not in known
    ]
