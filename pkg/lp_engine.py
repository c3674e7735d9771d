#!/usr/bin/env python3
"""
LP engine - dense two-phase bounded-variable primal simplex
Sized for the relaxations built in flow_lp (up to ~10^4 columns). Variables
carry native [lo, hi] bounds so the [0,1] boxes never become rows.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

import settings
from errors import InputError, NumericalError

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-7
OPT_TOL = 1e-6
PIVOT_TOL = 1e-9
# Reduced-cost threshold for declaring a column attractive.
DUAL_TOL = 1e-9
# A step below this counts as degenerate.
STEP_TOL = 1e-12


class Sense(enum.Enum):
    MINIMIZE = 'min'
    MAXIMIZE = 'max'


class Relation(enum.Enum):
    LE = '<='
    EQ = '='
    GE = '>='


class LpStatus(enum.Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass(frozen=True)
class LpRow:
    """Sparse row: sum(values[k] * x[indices[k]]) <relation> rhs."""

    indices: Tuple[int, ...]
    values: Tuple[float, ...]
    relation: Relation
    rhs: float
    name: str = ''


@dataclass(frozen=True, eq=False)
class LpModel:
    num_vars: int
    objective: np.ndarray
    sense: Sense
    rows: Tuple[LpRow, ...] = ()
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    var_names: Tuple[str, ...] = ()

    def __post_init__(self):
        n = self.num_vars
        if n < 0:
            raise InputError(f"num_vars must be nonnegative, got {n}")
        object.__setattr__(self, 'objective', np.asarray(self.objective, dtype=float))
        lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        upper = np.ones(n) if self.upper is None else np.asarray(self.upper, dtype=float)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        object.__setattr__(self, 'rows', tuple(self.rows))
        if self.objective.shape != (n,):
            raise InputError(f"objective has shape {self.objective.shape}, expected ({n},)")
        if lower.shape != (n,) or upper.shape != (n,):
            raise InputError(f"bounds must have length {n}")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InputError("variable bounds must be finite")
        if np.any(lower < 0) or np.any(lower > upper):
            bad = int(np.flatnonzero((lower < 0) | (lower > upper))[0])
            raise InputError(f"variable {bad} has invalid bounds [{lower[bad]}, {upper[bad]}]")
        if self.var_names and len(self.var_names) != n:
            raise InputError(f"expected {n} variable names, got {len(self.var_names)}")
        for i, row in enumerate(self.rows):
            _check_row(row, n, i)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def var_name(self, j: int) -> str:
        return self.var_names[j] if self.var_names else f"x{j}"

    def dense_rows(self) -> Tuple[np.ndarray, np.ndarray, List[Relation]]:
        A = np.zeros((len(self.rows), self.num_vars))
        b = np.zeros(len(self.rows))
        for i, row in enumerate(self.rows):
            for j, a in zip(row.indices, row.values):
                A[i, j] += a
            b[i] = row.rhs
        return A, b, [row.relation for row in self.rows]


@dataclass
class LpSolution:
    status: LpStatus
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = math.nan
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _check_row(row: LpRow, n: int, i: int) -> None:
    if len(row.indices) != len(row.values):
        raise InputError(f"row {row.name or i}: {len(row.indices)} indices but {len(row.values)} values")
    for j in row.indices:
        if not 0 <= j < n:
            raise InputError(f"row {row.name or i} references variable {j} (num_vars={n})")
    if not math.isfinite(row.rhs):
        raise InputError(f"row {row.name or i} has non-finite rhs {row.rhs}")
    if not all(math.isfinite(a) for a in row.values):
        raise InputError(f"row {row.name or i} has a non-finite coefficient")


def make_row(coefficients: Union[Sequence[float], Mapping[int, float], np.ndarray], relation: Relation,
             rhs: float, num_vars: int, name: str = '') -> LpRow:
    """Sparse row from a dense array (length checked) or an index -> value mapping."""
    if isinstance(coefficients, Mapping):
        items = sorted((int(j), float(a)) for j, a in coefficients.items() if a != 0)
    else:
        dense = np.asarray(coefficients, dtype=float)
        if dense.shape != (num_vars,):
            raise InputError(f"cut has {dense.size} coefficients, model has {num_vars} variables")
        items = [(int(j), float(dense[j])) for j in np.flatnonzero(dense)]
    row = LpRow(
        indices=tuple(j for j, _ in items),
        values=tuple(a for _, a in items),
        relation=Relation(relation),
        rhs=float(rhs),
        name=name,
    )
    _check_row(row, num_vars, -1)
    return row


def add_cut(model: LpModel, coefficients, relation: Relation, rhs: float, name: str = '') -> LpModel:
    """Return a copy of ``model`` with one more row; existing rows are untouched."""
    row = make_row(coefficients, relation, rhs, model.num_vars, name)
    return replace(model, rows=model.rows + (row,))


def row_violations(model: LpModel, values: Sequence[float],
                   tol: float = FEAS_TOL) -> List[Tuple[int, str, float]]:
    """Rows (and bounds) violated by ``values`` beyond ``tol`` (scaled by row magnitude)."""
    x = np.asarray(values, dtype=float)
    if x.shape != (model.num_vars,):
        raise InputError(f"assignment has length {x.size}, model has {model.num_vars} variables")
    out = []
    for i, row in enumerate(model.rows):
        lhs = math.fsum(a * x[j] for j, a in zip(row.indices, row.values))
        scale = 1.0 + abs(row.rhs) + math.fsum(abs(a * x[j]) for j, a in zip(row.indices, row.values))
        gap = lhs - row.rhs
        if row.relation is Relation.LE:
            excess = gap
        elif row.relation is Relation.GE:
            excess = -gap
        else:
            excess = abs(gap)
        if excess > tol * scale:
            out.append((i, row.name or f"r{i}", excess))
    low = np.flatnonzero(x < model.lower - tol)
    high = np.flatnonzero(x > model.upper + tol)
    for j in low:
        out.append((-1, f"lower bound of {model.var_name(int(j))}", float(model.lower[j] - x[j])))
    for j in high:
        out.append((-1, f"upper bound of {model.var_name(int(j))}", float(x[j] - model.upper[j])))
    return out


class _BoundedSimplex:
    """Per-call solver state. Columns are [structural | slack | artificial]."""

    def __init__(self, model: LpModel):
        self.model = model
        A, b, relations = model.dense_rows()
        m, n = A.shape
        self.m, self.n_struct = m, n

        lo = list(model.lower)
        hi = list(model.upper)
        residual = b - A @ model.lower
        extra_cols: List[np.ndarray] = []
        self.basis: List[int] = [-1] * m
        start_values: List[float] = []
        n_slack = sum(1 for rel in relations if rel is not Relation.EQ)
        slack_at = n
        art_cols: List[Tuple[int, float]] = []
        for i, rel in enumerate(relations):
            if rel is Relation.EQ:
                art_cols.append((i, 1.0 if residual[i] >= 0 else -1.0))
                continue
            sign = 1.0 if rel is Relation.LE else -1.0
            col = np.zeros(m)
            col[i] = sign
            extra_cols.append(col)
            lo.append(0.0)
            hi.append(math.inf)
            slack_value = sign * residual[i]
            if slack_value >= 0:
                self.basis[i] = slack_at
                start_values.append(slack_value)
            else:
                start_values.append(0.0)
                art_cols.append((i, 1.0 if residual[i] >= 0 else -1.0))
            slack_at += 1
        self.first_art = n + n_slack
        for k, (i, sign) in enumerate(art_cols):
            col = np.zeros(m)
            col[i] = sign
            extra_cols.append(col)
            lo.append(0.0)
            hi.append(math.inf)
            start_values.append(abs(residual[i]))
            self.basis[i] = self.first_art + k

        self.A = np.hstack([A] + [c.reshape(m, 1) for c in extra_cols]) if extra_cols else A.copy()
        self.b = b
        self.lo = np.array(lo, dtype=float)
        self.hi = np.array(hi, dtype=float)
        self.N = self.A.shape[1]
        self.x = np.concatenate([model.lower.astype(float), np.array(start_values, dtype=float)])
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.enterable = np.ones(self.N, dtype=bool)
        self.cap = settings.LP_ITERATION_FACTOR * (n + m + 1)
        self.iterations = 0
        self._refactor()

    def _refactor(self) -> None:
        if self.m == 0:
            self.T = np.zeros((0, self.N))
            return
        B = self.A[:, self.basis]
        nonbasic = ~self.is_basic
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        try:
            self.T = np.linalg.solve(B, self.A)
            self.x[self.basis] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"basis matrix became singular during refactorization ({e})") from e

    def _run_phase(self, d: np.ndarray, label: str) -> LpStatus:
        bland = False
        streak = 0
        since_refactor = 0
        dual_tol = DUAL_TOL * max(1.0, float(np.max(np.abs(d))) if d.size else 1.0)
        while True:
            if self.iterations >= self.cap:
                raise NumericalError(
                    f"simplex iteration cap {self.cap} exceeded in {label} "
                    f"({self.n_struct} vars, {self.m} rows)"
                )
            rc = d - d[self.basis] @ self.T if self.m else d.copy()
            at_upper = (self.x >= self.hi - STEP_TOL) & np.isfinite(self.hi)
            movable = self.enterable & ~self.is_basic & (self.hi > self.lo)
            gain = np.where(at_upper, rc, -rc)
            eligible = movable & (gain > dual_tol)
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(gain[candidates])])
            direction = -1.0 if at_upper[j] else 1.0

            col = self.T[:, j] * direction
            step, leave_row, leave_to_upper = self._ratio_test(col, bland)
            flip = self.hi[j] - self.lo[j]
            if math.isinf(step) and math.isinf(flip):
                return LpStatus.UNBOUNDED

            self.iterations += 1
            if flip <= step:
                self.x[j] += direction * flip
                self.x[self.basis] -= flip * col
                streak = 0
                continue

            streak = streak + 1 if step <= STEP_TOL else 0
            if streak >= settings.LP_DEGENERATE_STREAK and not bland:
                logger.debug(f"{label}: {streak} degenerate pivots, switching to Bland's rule")
                bland = True
            self.x[j] += direction * step
            self.x[self.basis] -= step * col
            leaving = self.basis[leave_row]
            self.x[leaving] = self.hi[leaving] if leave_to_upper else self.lo[leaving]
            self._pivot(leave_row, j)
            since_refactor += 1
            if since_refactor >= settings.LP_REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0

    def _ratio_test(self, col: np.ndarray, bland: bool) -> Tuple[float, int, bool]:
        best, best_row, to_upper, best_pivot = math.inf, -1, False, 0.0
        if self.m == 0:
            return best, best_row, to_upper
        xb = self.x[self.basis]
        lob = self.lo[self.basis]
        hib = self.hi[self.basis]
        for i in np.flatnonzero(np.abs(col) > PIVOT_TOL):
            a = col[i]
            if a > 0:
                limit = max(0.0, (xb[i] - lob[i]) / a)
                upper = False
            elif math.isfinite(hib[i]):
                limit = max(0.0, (hib[i] - xb[i]) / -a)
                upper = True
            else:
                continue
            better = limit < best - STEP_TOL
            tie = not better and limit <= best + STEP_TOL
            if tie and best_row >= 0:
                if bland:
                    better = self.basis[i] < self.basis[best_row]
                else:
                    better = abs(a) > best_pivot
            if better or best_row < 0:
                best, best_row, to_upper, best_pivot = limit, int(i), upper, abs(a)
        return best, best_row, to_upper

    def _pivot(self, r: int, j: int) -> None:
        pivot_row = self.T[r] / self.T[r, j]
        column = self.T[:, j].copy()
        self.T -= np.outer(column, pivot_row)
        self.T[r] = pivot_row
        self.is_basic[self.basis[r]] = False
        self.basis[r] = j
        self.is_basic[j] = True

    def _evict_artificials(self) -> None:
        for r in range(self.m):
            if self.basis[r] < self.first_art:
                continue
            row = np.abs(self.T[r, :self.first_art])
            row[self.is_basic[:self.first_art]] = 0.0
            j = int(np.argmax(row)) if row.size else 0
            if row.size and row[j] > PIVOT_TOL:
                self.x[self.basis[r]] = 0.0
                self._pivot(r, j)
        # Redundant rows keep their artificial basic, pinned at zero.
        self.hi[self.first_art:] = 0.0
        self.lo[self.first_art:] = 0.0
        self.x[self.first_art:] = np.where(self.is_basic[self.first_art:], self.x[self.first_art:], 0.0)
        self.enterable[self.first_art:] = False

    def solve(self) -> LpSolution:
        model = self.model
        if self.first_art < self.N:
            d1 = np.zeros(self.N)
            d1[self.first_art:] = 1.0
            self._run_phase(d1, 'phase 1')
            self._refactor()
            infeasibility = float(np.sum(self.x[self.first_art:]))
            scale = 1.0 + (float(np.max(np.abs(self.b))) if self.m else 0.0)
            if infeasibility > FEAS_TOL * scale:
                logger.debug(f"phase 1 ended with infeasibility {infeasibility:.3g}")
                return LpSolution(LpStatus.INFEASIBLE, iterations=self.iterations)
            self._evict_artificials()
            self._refactor()

        sign = 1.0 if model.sense is Sense.MINIMIZE else -1.0
        d2 = np.zeros(self.N)
        d2[:self.n_struct] = sign * model.objective
        status = self._run_phase(d2, 'phase 2')
        if status is LpStatus.UNBOUNDED:
            return LpSolution(status, iterations=self.iterations)
        self._refactor()

        values = np.clip(self.x[:self.n_struct], model.lower, model.upper)
        drift = np.max(np.abs(values - self.x[:self.n_struct])) if self.n_struct else 0.0
        if drift > FEAS_TOL:
            raise NumericalError(f"basic variables drifted {drift:.3g} outside their bounds")
        bad = row_violations(model, values, FEAS_TOL)
        if bad:
            i, name, amount = bad[0]
            raise NumericalError(f"optimal basis violates row {name} by {amount:.3g}")
        objective = float(model.objective @ values) if self.n_struct else 0.0
        return LpSolution(LpStatus.OPTIMAL, values, objective, self.iterations)


def solve_lp(model: LpModel) -> LpSolution:
    """Solve ``model``; infeasible/unbounded come back as statuses, not exceptions."""
    solver = _BoundedSimplex(model)
    solution = solver.solve()
    logger.debug(
        f"LP {model.num_vars}x{model.num_rows}: {solution.status.value} after "
        f"{solution.iterations} iterations, objective {solution.objective_value:.9g}"
    )
    return solution
