"""
Arms x architectures x seeds grid on the XOR benchmark, with a results CSV
and the minimum-size summary table.
"""

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator

from data.xor import Dataset, gen_xor
from formulations.arch import ArchSpec, HyperParams
from formulations.binary import build_binary_full
from formulations.relu import build_relu_full
from mip.branch_bound import MIPParams, solve_mip
from mip.errors import SolverError
from network.evaluate import evaluate
from network.extract import extract_net
from network.net import TrainedNet
from training.errors import TrainingError
from training.greedy import greedy_binary, greedy_relu
from training.sgd import FloatNet, SgdConfig, greedy_sgd, train_sgd
from util.template_loader import load_template, markdown_table

logger = logging.getLogger(__name__)

DEFAULT_ARMS = (
    "binary_mip",
    "greedy_binary_mip",
    "greedy_binary_mip_sgd",
    "binary_sgd",
    "greedy_binary_sgd",
    "greedy_binary_sgd_sgd",
    "relu_sgd",
    "relu_greedy_sgd",
    "relu_greedy_sgd_sgd",
)
ARMS = DEFAULT_ARMS + ("relu_mip", "greedy_relu_mip")

Cell = Tuple[str, int, int, int]


class ExperimentConfig(BaseModel):
    """Grid definition; sizes not swept are held at fixed_units / fixed_layers."""
    mode: Literal["depth_sweep", "width_sweep", "single"] = Field(default="depth_sweep", description="What to sweep")
    arms: List[str] = Field(default_factory=lambda: list(DEFAULT_ARMS), description="Training arms to run")
    n_train: int = Field(default=200, ge=1, description="Training rows per seed")
    n_test: int = Field(default=100, ge=1, description="Test rows per seed")
    noise_p: float = Field(default=0.1, ge=0.0, lt=0.5, description="Label flip probability")
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2], description="Experiment seeds")
    depth_min: int = Field(default=1, ge=1, description="Smallest hidden layer count in a depth sweep")
    depth_max: int = Field(default=5, ge=1, description="Largest hidden layer count in a depth sweep")
    width_min: int = Field(default=1, ge=1, description="Smallest width in a width sweep")
    width_max: int = Field(default=5, ge=1, description="Largest width in a width sweep")
    fixed_units: int = Field(default=5, ge=1, description="Width used by depth sweeps and single runs")
    fixed_layers: int = Field(default=3, ge=1, description="Depth used by width sweeps")
    single_layers: int = Field(default=1, ge=1, description="Depth of a single run")
    threshold: float = Field(default=0.85, ge=0.0, le=1.0, description="Mean test accuracy a size must reach")
    solve_time_limit: float = Field(default=300.0, gt=0, description="Seconds per MIP solve")
    workers: int = Field(default=1, ge=1, description="Worker processes for grid cells")

    @field_validator("arms")
    @classmethod
    def _known_arms(cls, arms: List[str]) -> List[str]:
        if not arms:
            raise ValueError("arms must not be empty")
        unknown = [a for a in arms if a not in ARMS]
        if unknown:
            raise ValueError(f"unknown arm(s) {unknown}; choose from {list(ARMS)}")
        return arms

    @model_validator(mode="after")
    def _check_ranges(self) -> "ExperimentConfig":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if self.depth_min > self.depth_max:
            raise ValueError(f"empty depth range [{self.depth_min}, {self.depth_max}]")
        if self.width_min > self.width_max:
            raise ValueError(f"empty width range [{self.width_min}, {self.width_max}]")
        return self

    @property
    def sweep_field(self) -> str:
        return "units" if self.mode == "width_sweep" else "layers"

    @property
    def largest_size(self) -> int:
        index = 1 if self.mode == "width_sweep" else 0
        return max(size[index] for size in self.sizes())

    def sizes(self) -> List[Tuple[int, int]]:
        """(layers, units) pairs in sweep order."""
        if self.mode == "depth_sweep":
            return [(l, self.fixed_units) for l in range(self.depth_min, self.depth_max + 1)]
        if self.mode == "width_sweep":
            return [(self.fixed_layers, k) for k in range(self.width_min, self.width_max + 1)]
        return [(self.single_layers, self.fixed_units)]


class ResultRow(BaseModel):
    arm: str
    layers: int
    units: int
    seed: int
    test_accuracy: Optional[float] = Field(default=None, ge=0.0, le=1.0, description="None when no network was produced")
    train_accuracy: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    objective: float = Field(default=math.nan, description="MIP objective, or final SGD loss")
    gap: float = Field(default=math.nan, description="Relative MIP gap; NaN for SGD arms")
    wall_time: float = 0.0
    status: str = Field(description="MIP status, completed, diverged or failed")
    config_hash: str = ""


def config_hash(config: ExperimentConfig, hyper: HyperParams, mip: MIPParams, sgd: SgdConfig) -> str:
    """Stable digest of everything that determines the rows; workers is excluded."""
    payload = {
        "experiment": config.model_dump(exclude={"workers"}),
        "hyper": hyper.model_dump(),
        "mip": mip.model_dump(exclude={"threads"}),
        "sgd": sgd.model_dump(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def _score(net: TrainedNet, train: Dataset, test: Dataset) -> Tuple[float, float]:
    return evaluate(net, train).accuracy, evaluate(net, test).accuracy


def _sgd_config(sgd: SgdConfig, activation: str, seed: int) -> SgdConfig:
    return sgd.model_copy(update={"activation": activation, "seed": sgd.seed + seed, "init": "random_uniform"})


def _finish_sgd(row: dict, net: FloatNet, curve: np.ndarray, hyper: HyperParams,
                train: Dataset, test: Dataset) -> dict:
    row["objective"] = float(curve[-1])
    if not np.isfinite(curve[-1]):
        row["status"] = "diverged"
        return row
    row["train_accuracy"], row["test_accuracy"] = _score(net.to_trained_net(hyper.eps), train, test)
    row["status"] = "completed"
    return row


def _run_mip_arm(arm: str, L: int, K: int, train: Dataset, test: Dataset, hyper: HyperParams,
                 mip: MIPParams, sgd: SgdConfig, seed: int) -> dict:
    row: dict = {}
    if arm in ("binary_mip", "relu_mip"):
        activation = "binary" if arm == "binary_mip" else "relu"
        arch = ArchSpec(d=train.d, K=K, L=L, J=train.J, activation=activation)
        builder = build_binary_full if activation == "binary" else build_relu_full
        artifact = builder(train, arch, hyper)
        try:
            solution = solve_mip(artifact.model, mip)
        except SolverError as e:
            logger.error(f"{arm} L={L} K={K} seed={seed}: solver failure: {e}")
            return dict(status="failed")
        row.update(status=solution.status.value, objective=solution.objective, gap=solution.gap)
        if solution.has_incumbent:
            net = extract_net(solution, artifact.index, arch, hyper)
            row["train_accuracy"], row["test_accuracy"] = _score(net, train, test)
        return row

    trainer = greedy_relu if arm == "greedy_relu_mip" else greedy_binary
    try:
        net, trace = trainer(train, L, K, hyper, mip, layer_time_limit=mip.time_limit)
    except TrainingError as e:
        logger.warning(f"{arm} L={L} K={K} seed={seed}: {e}")
        return dict(status="no_solution_limit")
    except SolverError as e:
        logger.error(f"{arm} L={L} K={K} seed={seed}: solver failure: {e}")
        return dict(status="failed")
    last = trace.records[-1]
    row.update(status=last.status, objective=last.objective, gap=max(r.gap for r in trace.records))
    if arm == "greedy_binary_mip_sgd":
        config = _sgd_config(sgd, "binary_ste", seed)
        float_net, curve = train_sgd(train, net.arch, config, warm_start=net)
        sgd_row = _finish_sgd({}, float_net, curve, hyper, train, test)
        row.update(train_accuracy=sgd_row.get("train_accuracy"), test_accuracy=sgd_row.get("test_accuracy"))
        if sgd_row["status"] == "diverged":
            row["status"] = "diverged"
        return row
    row["train_accuracy"], row["test_accuracy"] = _score(net, train, test)
    return row


def _run_sgd_arm(arm: str, L: int, K: int, train: Dataset, test: Dataset, hyper: HyperParams,
                 sgd: SgdConfig, seed: int) -> dict:
    activation = "binary_ste" if "binary" in arm else "relu"
    config = _sgd_config(sgd, activation, seed)
    arch = ArchSpec(d=train.d, K=K, L=L, J=train.J)
    if arm in ("binary_sgd", "relu_sgd"):
        net, curve = train_sgd(train, arch, config)
        return _finish_sgd({}, net, curve, hyper, train, test)
    try:
        stacked = greedy_sgd(train, L, K, config)
    except TrainingError as e:
        logger.warning(f"{arm} L={L} K={K} seed={seed}: {e}")
        return dict(status="diverged")
    if arm.endswith("_sgd_sgd"):
        net, curve = train_sgd(train, arch, config, warm_start=stacked)
        return _finish_sgd({}, net, curve, hyper, train, test)
    row = {"status": "completed", "objective": math.nan}
    row["train_accuracy"], row["test_accuracy"] = _score(stacked.to_trained_net(hyper.eps), train, test)
    return row


def run_cell(cell: Cell, config: ExperimentConfig, hyper: HyperParams, mip: MIPParams,
             sgd: SgdConfig, digest: str) -> ResultRow:
    """Train and score one (arm, layers, units, seed) cell. Module-level so worker processes can pickle it."""
    arm, L, K, seed = cell
    started = time.perf_counter()
    train = gen_xor(config.n_train, seed, config.noise_p, split="train")
    test = gen_xor(config.n_test, seed, config.noise_p, split="test")
    solve_params = mip.model_copy(update={"time_limit": config.solve_time_limit})
    if "_mip" in arm:
        row = _run_mip_arm(arm, L, K, train, test, hyper, solve_params, sgd, seed)
    else:
        row = _run_sgd_arm(arm, L, K, train, test, hyper, sgd, seed)
    result = ResultRow(arm=arm, layers=L, units=K, seed=seed, wall_time=time.perf_counter() - started,
                       config_hash=digest, **row)
    logger.info(f"{arm} L={L} K={K} seed={seed}: {result.status} test_acc={result.test_accuracy}")
    return result


class ExperimentRunner:
    """Runs the grid, appends rows to a results CSV and summarizes them."""

    def __init__(self, config: ExperimentConfig, hyper: Optional[HyperParams] = None,
                 mip: Optional[MIPParams] = None, sgd: Optional[SgdConfig] = None):
        self.config = config
        self.hyper = hyper or HyperParams()
        self.mip = mip or MIPParams()
        self.sgd = sgd or SgdConfig()
        self.digest = config_hash(config, self.hyper, self.mip, self.sgd)
        self.logger = logging.getLogger(__name__)

    def cells(self) -> List[Cell]:
        return [(arm, L, K, seed) for arm in self.config.arms for L, K in self.config.sizes()
                for seed in self.config.seeds]

    def run(self) -> List[ResultRow]:
        """
        Evaluate every cell; rows come back in cell order regardless of workers.
        """
        cells = self.cells()
        self.logger.info(f"experiment {self.digest}: {len(cells)} cells, {self.config.workers} worker(s)")
        args = (self.config, self.hyper, self.mip, self.sgd, self.digest)
        if self.config.workers == 1:
            return [run_cell(cell, *args) for cell in cells]
        with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
            futures = [pool.submit(run_cell, cell, *args) for cell in cells]
            return [f.result() for f in futures]

    def summarize(self, rows: List[ResultRow]) -> Dict[str, str]:
        """
        Per arm, the smallest swept size whose mean test accuracy over the
        seeds reaches the threshold. A size with any seed lacking a network
        does not qualify. ">max" when none qualifies, "NaN" when no run of
        the arm produced a network.
        """
        frame = pd.DataFrame([r.model_dump() for r in rows], columns=list(ResultRow.model_fields))
        field = self.config.sweep_field
        largest = self.config.largest_size
        summary: Dict[str, str] = {}
        for arm in self.config.arms:
            arm_rows = frame[frame["arm"] == arm]
            if arm_rows.empty or arm_rows["test_accuracy"].isna().all():
                summary[arm] = "NaN"
                continue
            summary[arm] = f">{largest}"
            for size, group in arm_rows.groupby(field, sort=True):
                if group["test_accuracy"].notna().all() and group["test_accuracy"].mean() >= self.config.threshold:
                    summary[arm] = str(int(size))
                    break
        return summary

    def render_summary(self, summary: Dict[str, str]) -> str:
        field = self.config.sweep_field
        return load_template(
            "summary",
            sweep=field,
            threshold=self.config.threshold,
            mode=self.config.mode,
            seeds=", ".join(str(s) for s in self.config.seeds),
            n_train=self.config.n_train,
            n_test=self.config.n_test,
            noise_p=self.config.noise_p,
            config_hash=self.digest,
            table=markdown_table(["arm", f"minimum {field}"], [[arm, value] for arm, value in summary.items()]),
            max_value=self.config.largest_size,
        )


def append_results(rows: List[ResultRow], path: Union[str, Path]) -> None:
    """Append rows to a results CSV, writing the header only when the file is new."""
    path = Path(path)
    frame = pd.DataFrame([r.model_dump() for r in rows], columns=list(ResultRow.model_fields))
    new_file = not path.exists() or path.stat().st_size == 0
    frame.to_csv(path, mode="a", header=new_file, index=False, float_format="%.17g")
