#!/usr/bin/env python3
"""
Hitting set - greedy counter algorithm
Picks, round after round, the element contained in the most still-unhit sets.
If every set has at least R of the M universe elements, the greedy stops
after at most ceil((M/R) * ln N) picks for N >= 2 sets.
"""

import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence, Set, Tuple

from errors import InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SetFamily:
    universe: FrozenSet[int]
    sets: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        for i, s in enumerate(self.sets):
            if not s:
                raise InputError(f"set #{i} of the family is empty and can never be hit")
            stray = s - self.universe
            if stray:
                raise InputError(f"set #{i} has elements {sorted(stray)} outside the universe")

    @classmethod
    def of(cls, sets: Iterable[Iterable[int]], universe: Iterable[int] = ()) -> 'SetFamily':
        frozen = tuple(frozenset(s) for s in sets)
        uni = frozenset(universe) or frozenset().union(*frozen)
        return cls(universe=uni, sets=frozen)

    @property
    def min_size(self) -> int:
        return min((len(s) for s in self.sets), default=0)


def size_bound(family: SetFamily) -> int:
    """Guaranteed ceiling on the greedy output size."""
    n_sets = len(family.sets)
    if n_sets == 0:
        return 0
    if n_sets == 1:
        return 1
    ratio = len(family.universe) / family.min_size
    return max(1, math.ceil(ratio * math.log(n_sets)))


def greedy_hitting_set(family: SetFamily) -> List[int]:
    """Greedy hitting set, ties broken toward the smallest element id.

    Counters are recomputed from scratch every round.
    """
    unhit: List[FrozenSet[int]] = list(family.sets)
    chosen: List[int] = []
    while unhit:
        counts = {}
        for s in unhit:
            for e in s:
                counts[e] = counts.get(e, 0) + 1
        pick = min(counts, key=lambda e: (-counts[e], e))
        chosen.append(pick)
        unhit = [s for s in unhit if pick not in s]
    bound = size_bound(family)
    if len(chosen) > bound:
        logger.warning(f"greedy hitting set used {len(chosen)} picks, above its bound {bound}")
    return sorted(chosen)


def hits_all(family: SetFamily, picks: Sequence[int]) -> bool:
    chosen: Set[int] = set(picks)
    return all(chosen & s for s in family.sets)
