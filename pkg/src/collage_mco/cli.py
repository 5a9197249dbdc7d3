"""Command line entry point: ``collage-mco {forward,synth,invert,sweep,validate}``.

Exit status is 0 on success, 1 for configuration/usage errors and 2 for
numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .assembly import solve_forward
from .config import ExperimentConfig, load_config
from .data import add_noise, sample_solution, save_observations
from .errors import CoercivityError, ConfigError, NumericError, ObservationFormatError
from .report import run_experiment, true_solution

log = logging.getLogger("collage_mco")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment TOML file")
    common.add_argument("--seed", type=int, help="override the config seed (optimizer starts and noise)")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="collage-mco", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("forward", parents=[common], help="solve the forward problem with k_true and dump u")
    sub.add_parser("synth", parents=[common], help="sample (noisy) observations of the true solution")
    sub.add_parser("invert", parents=[common], help="run the configured model for every parameter row")
    sub.add_parser("sweep", parents=[common], help="model 1 over a weight grid, keep the Pareto set")
    sub.add_parser("validate", parents=[common], help="check a config file")
    return parser


def _load(args) -> ExperimentConfig:
    if args.config is None:
        raise _UsageError(f"{args.command} requires --config")
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.out is not None:
        config = config.with_output_dir(args.out)
    return config


def cmd_forward(config: ExperimentConfig) -> int:
    pr = config.problem
    if pr.k_true is None:
        raise ConfigError("forward needs [problem] k_true")
    u = solve_forward(pr.k_true, pr.f, pr.bc, config.mesh_nodes, pr.interval)
    path = Path(config.output_dir) / "forward.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,u\n")
        for x, v in zip(u.breakpoints, u.values):
            fh.write(f"{float(x)!r},{float(v)!r}\n")
    print(path)
    return EXIT_OK


def cmd_synth(config: ExperimentConfig) -> int:
    pr = config.problem
    obs = sample_solution(true_solution(config), config.n_interior, pr.interval, pr.bc)
    obs = add_noise(obs, config.noise)
    path = save_observations(obs, Path(config.output_dir) / "observations.csv")
    print(path)
    return EXIT_OK


def cmd_invert(config: ExperimentConfig, pareto: bool) -> int:
    if pareto and config.model not in ("sweep", "model1"):
        raise ConfigError("sweep needs a [sweep] or [model1] section with weights")
    if not pareto and config.model not in ("model1", "model2", "model3"):
        raise ConfigError("invert needs one of [model1], [model2], [model3]")
    run_experiment(config, write=True, pareto=pareto)
    sys.stdout.write((Path(config.output_dir) / "results.csv").read_text(encoding="utf-8"))
    return EXIT_OK


def cmd_validate(config: ExperimentConfig) -> int:
    if config.model == "none":
        raise ConfigError("no model section ([model1], [model2], [model3] or [sweep])")
    print(f"ok: {config.model} with {len(config.params)} row(s), "
          f"basis {list(config.interior_counts)}, target {config.target_mode}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        config = _load(args)
        if args.command == "forward":
            return cmd_forward(config)
        if args.command == "synth":
            return cmd_synth(config)
        if args.command == "invert":
            return cmd_invert(config, pareto=False)
        if args.command == "sweep":
            return cmd_invert(config, pareto=True)
        return cmd_validate(config)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"collage-mco: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ObservationFormatError, OSError) as exc:
        print(f"collage-mco: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, CoercivityError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"collage-mco: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
