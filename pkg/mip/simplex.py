"""
Bounded-variable revised primal simplex for the LP relaxations solved by
branch-and-bound.

Every row i of the model is turned into `a_i x - s_i = 0` with a logical
variable s_i carrying the row bounds, so only variable bounds remain. Phase 1
adds one artificial column per row violated by the starting point and
minimizes their sum. The basis is factorized with a sparse LU and updated in
product form, refactorized every `refactor_every` pivots.
"""

import logging
import math
import time
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as splinalg
from pydantic import BaseModel, ConfigDict, Field

from mip.ir import ModelIR

logger = logging.getLogger(__name__)

BASIC, AT_LB, AT_UB, FREE = 0, 1, 2, 3


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL_FAILURE = "numerical_failure"


class LPParams(BaseModel):
    """Simplex tolerances and limits."""
    pivot_tol: float = Field(default=1e-9, gt=0, description="Smallest usable pivot magnitude")
    feasibility_tol: float = Field(default=1e-7, gt=0, description="Row and bound feasibility tolerance")
    optimality_tol: float = Field(default=1e-9, gt=0, description="Reduced-cost tolerance")
    refactor_every: int = Field(default=50, ge=1, description="Pivots between basis refactorizations")
    stall_threshold: int = Field(default=50, ge=1, description="Consecutive degenerate pivots before Bland's rule")
    max_iterations: int = Field(default=200_000, ge=1, description="Pivot limit per solve")
    max_retries: int = Field(default=3, ge=0, description="Restarts after a numerical failure")


class LPSolution(BaseModel):
    """Result of one LP solve."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: LPStatus
    objective: float = Field(default=math.nan)
    values: np.ndarray = Field(default_factory=lambda: np.zeros(0))
    iterations: int = 0


class _NumericalTrouble(Exception):
    pass


class CompiledLP:
    """Row/column arrays of a ModelIR, built once and shared by every node solve."""

    def __init__(self, model: ModelIR):
        m, n = model.num_constraints, model.num_vars
        rows, cols, data = [], [], []
        row_lb = np.full(m, -math.inf)
        row_ub = np.full(m, math.inf)
        for i, con in enumerate(model.constraints):
            for var_id, coef in con.terms:
                rows.append(i)
                cols.append(var_id)
                data.append(coef)
            if con.sense in ("<=", "="):
                row_ub[i] = con.rhs
            if con.sense in (">=", "="):
                row_lb[i] = con.rhs
        self.m = m
        self.n = n
        self.A = sp.csc_matrix((data, (rows, cols)), shape=(m, n), dtype=float)
        self.row_lb = row_lb
        self.row_ub = row_ub
        self.c = model.objective_vector()
        self.lb = model.lower_bounds()
        self.ub = model.upper_bounds()

    def max_violation(self, x: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> float:
        activity = self.A @ x if self.m else np.zeros(0)
        worst = 0.0
        if self.m:
            worst = max(worst, float(np.max(activity - self.row_ub, initial=0.0)), float(np.max(self.row_lb - activity, initial=0.0)))
        if self.n:
            worst = max(worst, float(np.max(lb - x)), float(np.max(x - ub)))
        return worst


class BoundedSimplex:
    """
    Primal simplex over a compiled LP. One instance is single-threaded; the
    compiled arrays are read-only, so separate instances over the same
    CompiledLP may run concurrently.
    """

    def __init__(self, lp: CompiledLP, params: Optional[LPParams] = None):
        self.lp = lp
        self.params = params or LPParams()
        self.logger = logging.getLogger(__name__)

    def solve(self, lb: Optional[np.ndarray] = None, ub: Optional[np.ndarray] = None) -> LPSolution:
        """
        Solve `min c x` subject to the model rows and the given variable bounds.

        Args:
            lb: Lower bounds overriding the model's (length n)
            ub: Upper bounds overriding the model's (length n)

        Returns:
            LPSolution; status NUMERICAL_FAILURE after `max_retries` restarts
        """
        lb = self.lp.lb if lb is None else np.asarray(lb, dtype=float)
        ub = self.lp.ub if ub is None else np.asarray(ub, dtype=float)
        if np.any(lb > ub):
            return LPSolution(status=LPStatus.INFEASIBLE, iterations=0)

        iterations = 0
        for attempt in range(self.params.max_retries + 1):
            run = _SimplexRun(self.lp, lb, ub, self.params, bland=attempt > 0,
                              refactor_every=max(1, self.params.refactor_every // (1 + 4 * attempt)))
            try:
                solution = run.execute()
            except _NumericalTrouble as e:
                iterations += run.iterations
                self.logger.warning(f"simplex numerical trouble ({e}); restart {attempt + 1}/{self.params.max_retries}")
                continue
            solution.iterations += iterations
            return solution
        self.logger.error(f"simplex failed after {self.params.max_retries} restarts")
        return LPSolution(status=LPStatus.NUMERICAL_FAILURE, iterations=iterations)


class _SimplexRun:
    """State of a single two-phase solve."""

    def __init__(self, lp: CompiledLP, lb: np.ndarray, ub: np.ndarray, params: LPParams, bland: bool, refactor_every: int):
        self.lp = lp
        self.params = params
        self.force_bland = bland
        self.refactor_every = refactor_every
        self.iterations = 0
        m, n = lp.m, lp.n

        x_struct = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        activity = lp.A @ x_struct if m else np.zeros(0)
        tol = params.feasibility_tol

        art_rows: List[int] = []
        art_signs: List[float] = []
        s_value = activity.copy()
        s_status = np.full(m, BASIC, dtype=np.int8)
        for i in range(m):
            v = activity[i]
            if v < lp.row_lb[i] - tol:
                s_value[i] = lp.row_lb[i]
                s_status[i] = AT_LB
            elif v > lp.row_ub[i] + tol:
                s_value[i] = lp.row_ub[i]
                s_status[i] = AT_UB
            else:
                continue
            art_rows.append(i)
            art_signs.append(1.0 if s_value[i] > v else -1.0)

        k = len(art_rows)
        self.n_struct = n
        self.art_start = n + m
        self.n_total = n + m + k
        art = sp.csc_matrix((art_signs, (art_rows, list(range(k)))), shape=(m, k))
        self.W = sp.hstack([lp.A, -sp.identity(m, format="csc"), art], format="csc")
        self.WT = self.W.T.tocsr()

        self.L = np.concatenate([lb, lp.row_lb, np.zeros(k)])
        self.U = np.concatenate([ub, lp.row_ub, np.full(k, math.inf)])
        status = np.empty(self.n_total, dtype=np.int8)
        status[:n] = np.where(np.isfinite(lb), AT_LB, np.where(np.isfinite(ub), AT_UB, FREE))
        status[n:n + m] = s_status
        status[self.art_start:] = BASIC
        self.status = status

        x = np.zeros(self.n_total)
        x[:n] = x_struct
        x[n:n + m] = s_value
        if k:
            x[self.art_start:] = np.abs(s_value[art_rows] - activity[art_rows])
        self.x = x

        basis = np.array([n + i for i in range(m)], dtype=np.int64)
        for j, row in enumerate(art_rows):
            basis[row] = self.art_start + j
        self.basis = basis
        self.lu = None
        self.etas: List[Tuple[int, np.ndarray]] = []

    # -- linear algebra --------------------------------------------------

    def _factorize(self) -> None:
        self.etas = []
        if self.lp.m == 0:
            self.lu = None
            return
        try:
            self.lu = splinalg.splu(self.W[:, self.basis].tocsc())
        except RuntimeError as e:
            raise _NumericalTrouble(f"singular basis: {e}") from None

    def _ftran(self, rhs: np.ndarray) -> np.ndarray:
        if self.lp.m == 0:
            return np.zeros(0)
        w = self.lu.solve(rhs)
        for r, eta in self.etas:
            wr = w[r]
            if wr != 0.0:
                w += wr * eta
                w[r] = wr * eta[r]
        return w

    def _btran(self, rhs: np.ndarray) -> np.ndarray:
        if self.lp.m == 0:
            return np.zeros(0)
        v = rhs.copy()
        for r, eta in reversed(self.etas):
            v[r] = float(eta @ v)
        return self.lu.solve(v, trans="T")

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.lp.m)
        start, end = self.W.indptr[j], self.W.indptr[j + 1]
        col[self.W.indices[start:end]] = self.W.data[start:end]
        return col

    def _recompute_basics(self) -> None:
        if self.lp.m == 0:
            return
        x_nb = self.x.copy()
        x_nb[self.basis] = 0.0
        self.x[self.basis] = self._ftran(-(self.W @ x_nb))
        if not np.all(np.isfinite(self.x[self.basis])):
            raise _NumericalTrouble("non-finite basic values")

    # -- phases ------------------------------------------------------------

    def execute(self) -> LPSolution:
        self._factorize()
        n_art = self.n_total - self.art_start
        if n_art:
            cost = np.zeros(self.n_total)
            cost[self.art_start:] = 1.0
            status = self._iterate(cost)
            if status != LPStatus.OPTIMAL:
                return LPSolution(status=status, iterations=self.iterations)
            infeasibility = float(np.sum(self.x[self.art_start:]))
            if infeasibility > self.params.feasibility_tol:
                return LPSolution(status=LPStatus.INFEASIBLE, iterations=self.iterations)
            self.U[self.art_start:] = 0.0
            nonbasic_art = self.status[self.art_start:] != BASIC
            self.status[self.art_start:][nonbasic_art] = AT_LB
            self.x[self.art_start:][nonbasic_art] = 0.0

        cost = np.zeros(self.n_total)
        cost[:self.n_struct] = self.lp.c
        status = self._iterate(cost)
        if status != LPStatus.OPTIMAL:
            return LPSolution(status=status, iterations=self.iterations)

        self._factorize()
        self._recompute_basics()
        lb, ub = self.L[:self.n_struct], self.U[:self.n_struct]
        values = self.x[:self.n_struct].copy()
        violation = self.lp.max_violation(values, lb, ub)
        if violation > 10 * self.params.feasibility_tol:
            raise _NumericalTrouble(f"final point violates constraints by {violation:.3e}")
        values = np.clip(values, lb, ub)
        return LPSolution(
            status=LPStatus.OPTIMAL,
            objective=float(self.lp.c @ values),
            values=values,
            iterations=self.iterations,
        )

    def _iterate(self, cost: np.ndarray) -> LPStatus:
        p = self.params
        movable = self.U > self.L
        degenerate_run = 0
        bland = self.force_bland

        while True:
            if self.iterations >= p.max_iterations:
                logger.warning(f"simplex iteration limit {p.max_iterations} reached")
                return LPStatus.ITERATION_LIMIT

            y = self._btran(cost[self.basis])
            d = cost - (self.WT @ y if self.lp.m else 0.0)
            st = self.status
            can_increase = ((st == AT_LB) | (st == FREE)) & movable & (d < -p.optimality_tol)
            can_decrease = ((st == AT_UB) | (st == FREE)) & movable & (d > p.optimality_tol)
            candidates = np.flatnonzero(can_increase | can_decrease)
            if candidates.size == 0:
                return LPStatus.OPTIMAL

            if bland:
                q = int(candidates[0])
            else:
                q = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = 1.0 if can_increase[q] else -1.0

            alpha = self._ftran(self._column(q))
            delta = -direction * alpha
            theta, r = self._ratio_test(delta)
            flip = self.U[q] - self.L[q]
            if not math.isfinite(theta) and not math.isfinite(flip):
                return LPStatus.UNBOUNDED

            self.iterations += 1
            if flip <= theta:
                step = flip
                self.x[self.basis] += step * delta
                self.x[q] = self.U[q] if direction > 0 else self.L[q]
                st[q] = AT_UB if direction > 0 else AT_LB
            else:
                step = theta
                self.x[self.basis] += step * delta
                self.x[q] += direction * step
                leaving = int(self.basis[r])
                if delta[r] < 0 or self.L[leaving] == self.U[leaving]:
                    st[leaving], self.x[leaving] = AT_LB, self.L[leaving]
                else:
                    st[leaving], self.x[leaving] = AT_UB, self.U[leaving]
                self.basis[r] = q
                st[q] = BASIC
                eta = -alpha / alpha[r]
                eta[r] = 1.0 / alpha[r]
                self.etas.append((r, eta))
                if len(self.etas) >= self.refactor_every:
                    self._factorize()
                    self._recompute_basics()

            if step <= 1e-12:
                degenerate_run += 1
                if degenerate_run > p.stall_threshold and not bland:
                    logger.debug(f"stalled for {degenerate_run} pivots, switching to Bland's rule")
                    bland = True
            else:
                degenerate_run = 0
                bland = self.force_bland

    def _ratio_test(self, delta: np.ndarray) -> Tuple[float, int]:
        if self.lp.m == 0:
            return math.inf, -1
        p = self.params
        x_b = self.x[self.basis]
        ratios = np.full(self.lp.m, math.inf)
        down = delta < -p.pivot_tol
        up = delta > p.pivot_tol
        with np.errstate(invalid="ignore"):
            ratios[down] = (x_b[down] - self.L[self.basis][down]) / -delta[down]
            ratios[up] = (self.U[self.basis][up] - x_b[up]) / delta[up]
        ratios = np.maximum(ratios, 0.0)
        theta = float(np.min(ratios))
        if not math.isfinite(theta):
            return math.inf, -1
        ties = np.flatnonzero(ratios <= theta + 1e-12)
        # lowest variable index among tied rows
        r = int(ties[np.argmin(self.basis[ties])])
        return theta, r


def solve_lp(model: ModelIR, overrides: Optional[Dict[int, Tuple[float, float]]] = None,
             params: Optional[LPParams] = None) -> LPSolution:
    """
    Solve the LP relaxation of a model (integrality dropped).

    Args:
        model: The model; binaries are relaxed to [0, 1]
        overrides: Optional {var id: (lb, ub)} bound overrides
        params: Simplex tolerances

    Returns:
        LPSolution
    """
    model.validate()
    lp = CompiledLP(model)
    lb, ub = lp.lb.copy(), lp.ub.copy()
    for var_id, (lo, hi) in (overrides or {}).items():
        lb[var_id], ub[var_id] = lo, hi
    started = time.perf_counter()
    solution = BoundedSimplex(lp, params).solve(lb, ub)
    logger.debug(f"LP {model.name}: {solution.status.value} obj={solution.objective} "
                 f"iters={solution.iterations} in {time.perf_counter() - started:.3f}s")
    return solution
