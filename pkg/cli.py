"""
Command-line surface.

Exit codes: 0 success, 2 configuration or input error, 3 solver or training failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import dotenv
import numpy as np
from pydantic import ValidationError

from config import ConfigError, Settings, load_settings, parse_overrides, setup_logging
from data.xor import DatasetError, gen_xor, load_csv, save_csv
from experiments.harness import ExperimentRunner, append_results
from formulations.arch import ArchSpec
from formulations.binary import build_binary_full
from formulations.census import count_families
from formulations.errors import FormulationError
from formulations.output_layer import build_output_layer
from formulations.relu import build_relu_full
from mip.branch_bound import export_node_log, solve_mip
from mip.errors import ModelError, SolverError
from mip.lp_format import export_lp
from mip.mps import export_mps, import_mps
from mip.solution_file import read_solution_text, values_to_vector, write_solution_text
from network.errors import EvaluationError, ExtractionError, NetFormatError
from network.evaluate import evaluate
from network.net import parity_net
from network.serialize import load_net, save_net
from training.errors import TrainingError
from training.greedy import greedy_binary, greedy_relu
from training.sgd import greedy_sgd, save_loss_curve, train_sgd

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

logger = logging.getLogger(__name__)


def _read_text(path: str) -> str:
    if not Path(path).is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return Path(path).read_text()


def _load_dataset(path: str):
    if not Path(path).is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    return load_csv(path)


def cmd_gen_data(args: argparse.Namespace, settings: Settings) -> int:
    noise = settings.experiment.noise_p if args.noise is None else args.noise
    dataset = gen_xor(args.n, args.seed, noise, split=args.split)
    save_csv(dataset, args.out)
    logger.info(f"wrote {dataset.n} {args.split} rows to {args.out}")
    return EXIT_OK


def cmd_build(args: argparse.Namespace, settings: Settings) -> int:
    dataset = _load_dataset(args.data)
    arch = ArchSpec(d=dataset.d, K=args.units, L=args.layers, J=dataset.J, activation=args.activation)
    if arch.L == 0:
        artifact = build_output_layer(dataset, arch, settings.hyper)
    elif arch.activation == "binary":
        artifact = build_binary_full(dataset, arch, settings.hyper)
    else:
        artifact = build_relu_full(dataset, arch, settings.hyper)
    text = export_lp(artifact.model) if args.format == "lp" else export_mps(artifact.model)
    Path(args.out).write_text(text)
    stats = artifact.model.stats()
    logger.info(f"wrote {args.format.upper()} to {args.out}: {stats.variables} vars ({stats.binaries} binary), "
                f"{stats.constraints} rows, {stats.nonzeros} nonzeros")
    logger.debug(f"row families: {count_families(artifact.model)}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    model = import_mps(_read_text(args.model))
    warm = None
    if args.warm_start:
        warm = values_to_vector(model, read_solution_text(_read_text(args.warm_start), model))
    solution = solve_mip(model, settings.mip, warm_start=warm)
    print(f"status {solution.status.value} objective {solution.objective:.10g} bound {solution.best_bound:.10g} "
          f"gap {solution.gap:.4g} nodes {solution.nodes}")
    if args.out and solution.has_incumbent:
        header = {"status": solution.status.value, "objective": solution.objective, "gap": solution.gap}
        Path(args.out).write_text(write_solution_text(model, solution.incumbent, header))
    if args.node_log:
        Path(args.node_log).write_text(export_node_log(solution))
    return EXIT_OK


def cmd_train_greedy(args: argparse.Namespace, settings: Settings) -> int:
    dataset = _load_dataset(args.data)
    trainer = greedy_binary if args.activation == "binary" else greedy_relu
    net, trace = trainer(dataset, args.layers, args.units, settings.hyper, settings.mip,
                         layer_time_limit=args.layer_time_limit)
    save_net(net, args.out)
    if args.trace:
        trace.to_csv(args.trace)
    print(trace.to_frame().to_string(index=False))
    return EXIT_OK


def cmd_train_sgd(args: argparse.Namespace, settings: Settings) -> int:
    dataset = _load_dataset(args.data)
    config = settings.sgd
    arch = ArchSpec(d=dataset.d, K=args.units, L=args.layers, J=dataset.J)
    warm = load_net(args.warm_start) if args.warm_start else None
    if args.greedy:
        stacked = greedy_sgd(dataset, args.layers, args.units, config)
        if not all(np.all(np.isfinite(a)) for a in stacked.weights + stacked.biases):
            logger.error("layer-wise SGD diverged: the stacked network has non-finite parameters")
            return EXIT_SOLVER
        warm = stacked if args.then_sgd else None
        if not args.then_sgd:
            save_net(stacked.to_trained_net(settings.hyper.eps), args.out)
            print(f"train accuracy {evaluate(stacked.to_trained_net(settings.hyper.eps), dataset).accuracy:.4f}")
            return EXIT_OK
    net, curve = train_sgd(dataset, arch, config, warm_start=warm)
    if args.loss_curve:
        save_loss_curve(curve, args.loss_curve)
    if not np.isfinite(curve[-1]):
        logger.error(f"SGD diverged after {len(curve) - 1} epochs")
        return EXIT_SOLVER
    trained = net.to_trained_net(settings.hyper.eps)
    save_net(trained, args.out)
    print(f"final loss {curve[-1]:.6f} train accuracy {evaluate(trained, dataset).accuracy:.4f}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> int:
    if args.parity:
        net = parity_net(settings.hyper.eps)
    elif args.net:
        net = load_net(args.net)
    else:
        raise ConfigError("evaluate needs --net or --parity")
    if args.data:
        dataset = _load_dataset(args.data)
    else:
        dataset = gen_xor(args.n, args.seed, args.noise, split="test")
    report = evaluate(net, dataset)
    print(f"accuracy {report.accuracy:.4f} on {report.n} rows")
    print(f"confusion {report.confusion}")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace, settings: Settings) -> int:
    runner = ExperimentRunner(settings.experiment, settings.hyper, settings.mip, settings.sgd)
    rows = runner.run()
    append_results(rows, args.results)
    text = runner.render_summary(runner.summarize(rows))
    if args.summary:
        Path(args.summary).write_text(text)
    print(text)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    from main import create_app
    uvicorn.run(create_app(settings=settings), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mipnet", description="Train neural networks by mixed-integer programming.")
    parser.add_argument("--config", help="key=value settings file (SECTION__FIELD=value)")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION__FIELD=VALUE",
                        help="Override one setting; repeatable")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="Generate an XOR parity dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=None, help="Label flip probability (default EXPERIMENT__NOISE_P)")
    p.add_argument("--split", choices=["train", "test"], default="train")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("build", help="Write the training MIP as MPS or LP")
    p.add_argument("--data", required=True)
    p.add_argument("--layers", type=int, default=1, help="Hidden layers; 0 builds the output-layer model")
    p.add_argument("--units", type=int, default=5)
    p.add_argument("--activation", choices=["binary", "relu"], default="binary")
    p.add_argument("--format", choices=["mps", "lp"], default="mps")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("solve", help="Solve an MPS model with the embedded branch and bound")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="Solution file")
    p.add_argument("--node-log", help="Node log CSV")
    p.add_argument("--warm-start", help="Solution file offered as the first incumbent")
    p.add_argument("--time-limit", type=float, dest="MIP__TIME_LIMIT")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("train-greedy", help="Greedy layer-wise MIP training")
    p.add_argument("--data", required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--activation", choices=["binary", "relu"], default="binary")
    p.add_argument("--layer-time-limit", type=float, default=None)
    p.add_argument("--out", required=True, help="Serialized network")
    p.add_argument("--trace", help="Per-layer trace CSV")
    p.set_defaults(handler=cmd_train_greedy)

    p = sub.add_parser("train-sgd", help="SGD baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--activation", choices=["relu", "binary_ste"], dest="SGD__ACTIVATION")
    p.add_argument("--epochs", type=int, dest="SGD__EPOCHS")
    p.add_argument("--seed", type=int, dest="SGD__SEED")
    p.add_argument("--greedy", action="store_true", help="Layer-wise SGD")
    p.add_argument("--then-sgd", action="store_true", help="With --greedy, fine-tune the stack with full SGD")
    p.add_argument("--warm-start", help="Serialized network to start from")
    p.add_argument("--loss-curve", help="Loss curve CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_train_sgd)

    p = sub.add_parser("evaluate", help="Score a network")
    p.add_argument("--net")
    p.add_argument("--parity", action="store_true", help="Use the hand-built parity network")
    p.add_argument("--data", help="Dataset CSV; a generated test set otherwise")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("experiment", help="Run the arms x sizes x seeds grid")
    p.add_argument("--results", required=True, help="Results CSV (appended)")
    p.add_argument("--summary", help="Summary markdown")
    p.add_argument("--mode", choices=["depth_sweep", "width_sweep", "single"], dest="EXPERIMENT__MODE")
    p.add_argument("--arms", dest="EXPERIMENT__ARMS", help="Comma-separated arms")
    p.add_argument("--workers", type=int, dest="EXPERIMENT__WORKERS")
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("serve", help="Run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)
    return parser


def _flag_overrides(args: argparse.Namespace) -> Dict[str, str]:
    """Subcommand flags whose dest is a SECTION__FIELD key."""
    return {key: str(value) for key, value in vars(args).items() if "__" in key and value is not None}


def main(argv: Optional[List[str]] = None) -> int:
    dotenv.load_dotenv()
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_overrides(args.set)
        overrides.update(_flag_overrides(args))
        settings = load_settings(args.config, overrides)
        return args.handler(args, settings)
    except (ConfigError, ValidationError, FileNotFoundError, DatasetError, ModelError, FormulationError,
            NetFormatError, EvaluationError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_CONFIG
    except (SolverError, TrainingError, ExtractionError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
