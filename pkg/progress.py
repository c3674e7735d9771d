#!/usr/bin/env python3
"""In-process progress registry for long solver runs.

Cost-guess loops and row generation publish a one-line status per lane;
``steiner bench`` records one :class:`SolveOutcome` per instance and logs
:func:`bench_summary` at the end. Everything here may be called from the
guess and bench thread pools.
"""

import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

_lock = threading.Lock()

_lanes: Dict[str, str] = {}
_outcomes: Dict[str, 'SolveOutcome'] = {}
_queued = 0


@dataclass(frozen=True)
class SolveOutcome:
    instance: str
    kind: str
    feasible: bool
    branch: str = ''
    cost: Optional[float] = None
    lp_bound: Optional[float] = None
    runtime_ms: int = 0


def note_guesses(done: int, total: int) -> None:
    with _lock:
        _lanes['guesses'] = f"{max(0, int(done))}/{max(0, int(total))}"


def note_separation(rounds: int, cuts: int, last_cut: Sequence[int]) -> None:
    with _lock:
        _lanes['separation'] = f"round {int(rounds)}, {int(cuts)} cuts, last {sorted(last_cut)}"


def clear_lane(lane: str) -> None:
    with _lock:
        _lanes.pop(lane, None)


def lanes() -> Dict[str, str]:
    with _lock:
        return dict(_lanes)


def begin_bench(total: int) -> None:
    """Forget earlier outcomes and expect ``total`` instances."""
    global _queued
    with _lock:
        _outcomes.clear()
        _lanes.clear()
        _queued = max(0, int(total))


def record_outcome(outcome: SolveOutcome) -> None:
    with _lock:
        _outcomes[outcome.instance] = outcome
        _lanes['bench'] = f"{len(_outcomes)}/{_queued}"


def bench_summary() -> Dict[str, object]:
    """Counts, infeasible instance names and the slowest solve so far."""
    with _lock:
        done: List[SolveOutcome] = sorted(_outcomes.values(), key=lambda o: o.instance)
        slowest = max(done, key=lambda o: (o.runtime_ms, o.instance), default=None)
        return {
            'queued': _queued,
            'finished': len(done),
            'infeasible': [o.instance for o in done if not o.feasible],
            'branches': sorted({o.branch for o in done if o.branch}),
            'slowest': slowest.instance if slowest else None,
            'slowest_ms': slowest.runtime_ms if slowest else 0,
        }
