"""
Branch-and-bound over the binary variables of a ModelIR.

Nodes are LP relaxations with some binaries fixed. Selection is best-bound
with depth-first plunging while no incumbent exists and for a budget of nodes
after each incumbent improvement. Every incumbent is polished by fixing its
binaries and re-solving the LP, then re-verified against the original model.
"""

import heapq
import io
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from mip.errors import SolverError
from mip.ir import ModelIR
from mip.simplex import BoundedSimplex, CompiledLP, LPParams, LPSolution, LPStatus

logger = logging.getLogger(__name__)

_VERIFY_TOL = 1e-6


class MIPStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_LIMIT = "feasible_limit"
    INFEASIBLE = "infeasible"
    NO_SOLUTION_LIMIT = "no_solution_limit"
    UNBOUNDED = "unbounded"


class MIPParams(BaseModel):
    """Branch-and-bound parameters."""
    rel_gap: float = Field(default=1e-4, ge=0, description="Stop when (obj - bound) / max(1, |obj|) is at most this")
    time_limit: float = Field(default=300.0, gt=0, description="Wall-clock limit in seconds")
    node_limit: int = Field(default=1_000_000, gt=0, description="Maximum number of nodes evaluated")
    branching: Literal["most_fractional"] = Field(default="most_fractional", description="Branching rule")
    search: Literal["best_bound_with_plunge"] = Field(default="best_bound_with_plunge", description="Node selection")
    integrality_tol: float = Field(default=1e-6, gt=0, description="Distance from 0/1 accepted as integral")
    seed: int = Field(default=0, description="Seed for the randomized rounding heuristic")
    threads: int = Field(default=1, ge=1, description="Node LPs evaluated concurrently")
    prune: bool = Field(default=True, description="Prune by bound; disable only to debug")
    heuristic_frequency: int = Field(default=20, ge=0, description="Run the rounding heuristic every N nodes (0 = root only)")
    plunge_nodes: int = Field(default=50, ge=0, description="Depth-first nodes after each incumbent improvement")
    lp: LPParams = Field(default_factory=LPParams, description="Node LP tolerances")


class NodeRecord(BaseModel):
    node: int
    depth: int
    bound: float
    incumbent: float
    gap: float


class MIPSolution(BaseModel):
    """Result of a branch-and-bound solve."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: MIPStatus
    incumbent: Optional[np.ndarray] = None
    objective: float = math.inf
    best_bound: float = -math.inf
    gap: float = math.inf
    nodes: int = 0
    wall_time: float = 0.0
    node_log: List[NodeRecord] = Field(default_factory=list)

    @property
    def has_incumbent(self) -> bool:
        return self.incumbent is not None


def relative_gap(objective: float, bound: float) -> float:
    if not math.isfinite(objective):
        return math.inf
    if not math.isfinite(bound):
        return math.inf
    return max(0.0, (objective - bound) / max(1.0, abs(objective)))


class IncumbentStore:
    """The best known solution, shared by concurrent node evaluations."""

    def __init__(self):
        self._lock = threading.Lock()
        self.objective = math.inf
        self.values: Optional[np.ndarray] = None

    def offer(self, values: np.ndarray, objective: float) -> bool:
        with self._lock:
            if objective < self.objective - 1e-12:
                self.objective = objective
                self.values = values.copy()
                return True
            return False

    def snapshot(self) -> Tuple[float, Optional[np.ndarray]]:
        with self._lock:
            return self.objective, self.values


@dataclass(order=True)
class _Node:
    bound: float
    node_id: int
    depth: int = field(compare=False)
    fixings: Tuple[Tuple[int, float], ...] = field(compare=False, default=())


class BranchAndBound:
    """Solves one model; create a new instance per solve."""

    def __init__(self, model: ModelIR, params: Optional[MIPParams] = None):
        model.validate()
        self.model = model
        self.params = params or MIPParams()
        self.logger = logging.getLogger(__name__)
        self.lp = CompiledLP(model)
        self.simplex = BoundedSimplex(self.lp, self.params.lp)
        self.binaries = np.array(model.binary_ids, dtype=np.int64)
        self.store = IncumbentStore()
        self.rng = np.random.default_rng(self.params.seed)
        self.node_log: List[NodeRecord] = []
        self._unresolved_bound = math.inf

    # -- LP helpers ------------------------------------------------------

    def _bounds(self, fixings: Sequence[Tuple[int, float]]) -> Tuple[np.ndarray, np.ndarray]:
        lb, ub = self.lp.lb.copy(), self.lp.ub.copy()
        for var_id, value in fixings:
            lb[var_id] = ub[var_id] = value
        return lb, ub

    def _solve_node(self, node: _Node) -> LPSolution:
        lb, ub = self._bounds(node.fixings)
        return self.simplex.solve(lb, ub)

    def _polish(self, binary_values: np.ndarray) -> Optional[Tuple[np.ndarray, float]]:
        """Fix every binary to the given 0/1 values, re-solve, and verify."""
        lb, ub = self.lp.lb.copy(), self.lp.ub.copy()
        lb[self.binaries] = ub[self.binaries] = binary_values
        result = self.simplex.solve(lb, ub)
        if result.status != LPStatus.OPTIMAL:
            return None
        values = result.values
        violation = self.model.max_violation(values, binary_tol=self.params.integrality_tol)
        if violation > _VERIFY_TOL:
            self.logger.warning(f"polished candidate rejected, violation {violation:.3e}")
            return None
        return values, self.model.evaluate_objective(values)

    def _try_incumbent(self, binary_values: np.ndarray, source: str) -> bool:
        polished = self._polish(np.round(binary_values))
        if polished is None:
            return False
        values, objective = polished
        improved = self.store.offer(values, objective)
        if improved:
            self.logger.info(f"new incumbent {objective:.6g} from {source}")
        return improved

    def _rounding_heuristic(self, lp_values: np.ndarray) -> bool:
        frac = lp_values[self.binaries]
        if self._try_incumbent((frac >= 0.5).astype(float), "rounding"):
            return True
        thresholds = self.rng.uniform(0.25, 0.75, size=frac.size)
        return self._try_incumbent((frac >= thresholds).astype(float), "randomized rounding")

    def _branch_variable(self, lp_values: np.ndarray) -> Optional[int]:
        if self.binaries.size == 0:
            return None
        frac = lp_values[self.binaries]
        distance = np.minimum(frac - np.floor(frac), np.ceil(frac) - frac)
        distance[np.abs(frac - np.round(frac)) <= self.params.integrality_tol] = -1.0
        best = int(np.argmax(distance))
        if distance[best] < 0:
            return None
        # argmax returns the first maximum, i.e. the lowest var id
        return int(self.binaries[best])

    # -- search ----------------------------------------------------------

    def solve(self, warm_start: Optional[Sequence[float]] = None) -> MIPSolution:
        """
        Run branch-and-bound.

        Args:
            warm_start: Optional full assignment; installed as the first
                incumbent when its binaries give a feasible fix-and-solve

        Returns:
            MIPSolution with node log

        Raises:
            SolverError: If the root relaxation fails numerically
        """
        p = self.params
        started = time.perf_counter()

        root = self.simplex.solve()
        if root.status in (LPStatus.NUMERICAL_FAILURE, LPStatus.ITERATION_LIMIT):
            self.logger.error(f"root relaxation of {self.model.name!r} failed: {root.status.value}")
            raise SolverError(f"root relaxation failed with status {root.status.value}")
        if root.status == LPStatus.INFEASIBLE:
            return self._finish(MIPStatus.INFEASIBLE, started, nodes=1)
        if root.status == LPStatus.UNBOUNDED:
            return self._finish(MIPStatus.UNBOUNDED, started, nodes=1)

        if self.binaries.size == 0:
            self.store.offer(root.values, root.objective)
            self._log(0, 0, root.objective)
            return self._finish(MIPStatus.OPTIMAL, started, nodes=1, bound=root.objective)

        if warm_start is not None:
            ws = np.asarray(warm_start, dtype=float)
            if ws.shape != (self.model.num_vars,):
                raise SolverError(f"warm start has {ws.size} values, model has {self.model.num_vars} variables")
            if not self._try_incumbent(ws[self.binaries], "warm start"):
                self.logger.warning("warm start rejected: fixing its binaries gives no feasible point")

        heap: List[_Node] = []
        stack: List[_Node] = []
        next_id = 0
        nodes = 0
        plunge_budget = 0
        global_bound = -math.inf
        pending: List[Tuple[_Node, LPSolution]] = [(_Node(root.objective, next_id, 0), root)]
        next_id += 1
        status: Optional[MIPStatus] = None
        executor = ThreadPoolExecutor(max_workers=p.threads) if p.threads > 1 else None

        try:
            while pending or heap or stack:
                if not pending:
                    batch = []
                    while len(batch) < p.threads and (heap or stack):
                        plunging = stack and (self.store.values is None or plunge_budget > 0)
                        if not plunging and stack:
                            for node in stack:
                                heapq.heappush(heap, node)
                            stack.clear()
                        if plunging:
                            batch.append(stack.pop())
                            plunge_budget = max(0, plunge_budget - 1)
                        else:
                            batch.append(heapq.heappop(heap))
                    incumbent_obj, _ = self.store.snapshot()
                    if p.prune:
                        batch = [n for n in batch if n.bound < incumbent_obj - 1e-9]
                    if executor is not None and len(batch) > 1:
                        pending = list(zip(batch, executor.map(self._solve_node, batch)))
                    else:
                        pending = [(node, self._solve_node(node)) for node in batch]
                    continue

                node, result = pending.pop(0)
                nodes += 1
                incumbent_obj, _ = self.store.snapshot()

                if result.status == LPStatus.OPTIMAL:
                    lp_obj = max(result.objective, node.bound) if node.depth else result.objective
                    if not (p.prune and lp_obj >= incumbent_obj - 1e-9):
                        branch_var = self._branch_variable(result.values)
                        if branch_var is None:
                            if self._try_incumbent(result.values[self.binaries], f"node {node.node_id}"):
                                plunge_budget = p.plunge_nodes
                        else:
                            if (node.depth == 0 or (p.heuristic_frequency and nodes % p.heuristic_frequency == 0)) \
                                    and self._rounding_heuristic(result.values):
                                plunge_budget = p.plunge_nodes
                            up_first = result.values[branch_var] >= 0.5
                            children = []
                            for value in ((1.0, 0.0) if up_first else (0.0, 1.0)):
                                children.append(_Node(lp_obj, next_id, node.depth + 1, node.fixings + ((branch_var, value),)))
                                next_id += 1
                            preferred, other = children
                            heapq.heappush(heap, other)
                            if self.store.values is None or plunge_budget > 0:
                                stack.append(preferred)
                            else:
                                heapq.heappush(heap, preferred)
                elif result.status in (LPStatus.NUMERICAL_FAILURE, LPStatus.ITERATION_LIMIT, LPStatus.UNBOUNDED):
                    self.logger.warning(f"node {node.node_id} LP {result.status.value}; its bound {node.bound:.6g} is kept")
                    self._unresolved_bound = min(self._unresolved_bound, node.bound)

                incumbent_obj, _ = self.store.snapshot()
                open_bound = min([n.bound for n in heap] + [n.bound for n in stack] + [n.bound for n, _ in pending]
                                 + [self._unresolved_bound, incumbent_obj])
                global_bound = max(global_bound, open_bound)
                self._log(node.node_id, node.depth, global_bound)

                if p.prune and relative_gap(incumbent_obj, global_bound) <= p.rel_gap:
                    status = MIPStatus.OPTIMAL
                    break
                if nodes >= p.node_limit:
                    self.logger.warning(f"node limit {p.node_limit} reached")
                    break
                if time.perf_counter() - started >= p.time_limit:
                    self.logger.warning(f"time limit {p.time_limit}s reached after {nodes} nodes")
                    break
        finally:
            if executor is not None:
                executor.shutdown(wait=True)

        incumbent_obj, incumbent = self.store.snapshot()
        tree_empty = not (pending or heap or stack)
        if status is None:
            if tree_empty and math.isinf(self._unresolved_bound):
                status = MIPStatus.OPTIMAL if incumbent is not None else MIPStatus.INFEASIBLE
                global_bound = max(global_bound, incumbent_obj) if incumbent is not None else global_bound
            elif incumbent is not None:
                status = MIPStatus.FEASIBLE_LIMIT
                if tree_empty:
                    global_bound = max(global_bound, min(self._unresolved_bound, incumbent_obj))
            else:
                status = MIPStatus.NO_SOLUTION_LIMIT
        if status == MIPStatus.FEASIBLE_LIMIT and relative_gap(incumbent_obj, global_bound) <= p.rel_gap:
            status = MIPStatus.OPTIMAL
        return self._finish(status, started, nodes=nodes, bound=global_bound)

    def _log(self, node_id: int, depth: int, bound: float) -> None:
        objective, _ = self.store.snapshot()
        record = NodeRecord(node=node_id, depth=depth, bound=bound, incumbent=objective,
                            gap=relative_gap(objective, bound))
        self.node_log.append(record)
        self.logger.debug(f"node {node_id} depth {depth} bound {bound:.6g} incumbent {objective:.6g}")

    def _finish(self, status: MIPStatus, started: float, nodes: int, bound: float = -math.inf) -> MIPSolution:
        objective, incumbent = self.store.snapshot()
        if incumbent is not None:
            bound = min(bound, objective)
        gap = relative_gap(objective, bound) if incumbent is not None else math.inf
        if self.node_log:
            last = self.node_log[-1]
            last.bound = bound
            last.incumbent = objective
            last.gap = gap
        elif status in (MIPStatus.INFEASIBLE, MIPStatus.UNBOUNDED):
            self.node_log.append(NodeRecord(node=0, depth=0, bound=bound, incumbent=objective, gap=gap))
        wall = time.perf_counter() - started
        self.logger.info(f"B&B {self.model.name!r}: {status.value} obj={objective:.6g} bound={bound:.6g} "
                         f"gap={gap:.3g} nodes={nodes} in {wall:.2f}s")
        return MIPSolution(
            status=status,
            incumbent=incumbent,
            objective=objective,
            best_bound=bound,
            gap=gap,
            nodes=nodes,
            wall_time=wall,
            node_log=self.node_log,
        )


def solve_mip(model: ModelIR, params: Optional[MIPParams] = None,
              warm_start: Optional[Sequence[float]] = None) -> MIPSolution:
    """
    Solve a minimization MIP whose integer variables are all binary.

    Args:
        model: The model to solve
        params: Search parameters
        warm_start: Optional assignment offered as the first incumbent

    Returns:
        MIPSolution
    """
    return BranchAndBound(model, params).solve(warm_start)


def export_node_log(solution: MIPSolution) -> str:
    """Node log as CSV with columns node, depth, bound, incumbent, gap."""
    frame = pd.DataFrame([r.model_dump() for r in solution.node_log], columns=list(NodeRecord.model_fields))
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.17g")
    return buffer.getvalue()
