#!/usr/bin/env python3
"""
DenseCRF Engine - Command line
===========================================================================

Commands:
    infer         mean-field inference on one image + DCU1 unary file
    learn-compat  learn the label compatibility from a manifest
    grid-search   appearance kernel grid search on a manifest
    sweep         theta_alpha x theta_beta accuracy surface
    eval          metrics for a predicted label map against ground truth
    bench-filter  lattice filter runtime and oracle error

Reports go to stdout as key=value lines; logs go to stderr. Any error ends
the command with a single "❌ <message>" line and exit status 1.

Usage:
    python cli.py infer --image img.ppm --unary img.dcu --out labels.png
    python cli.py eval --pred labels.png --gt truth.png --trimap-width 1 2 4 --voc

Author: DenseCRF Engine Team
Version: 1.0.0
License: MIT
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.evaluation import format_report
from src.schemas import GridSpec, OptimizerConfig, RunConfig
from src.services import BenchmarkService, EvaluationService, InferenceService, LearningService
from src.utils import ConfigLoader, setup_root_logger

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad command line; exit status 2."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of printing usage and exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def setup_logging(cfg: Optional[ConfigLoader], level_override: Optional[str] = None) -> None:
    """Configure logging from the `logging` section of config.yaml."""
    log_cfg = cfg.get_logging_config() if cfg is not None else {}
    setup_root_logger(
        level=level_override or log_cfg.get("level", "WARNING"),
        log_file=log_cfg.get("file") or None,
        max_bytes=int(log_cfg.get("max_bytes", 10485760)),
        backup_count=int(log_cfg.get("backup_count", 5)),
        loggers=log_cfg.get("loggers"),
        fmt=log_cfg.get("format") or "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


class DenseCRFCLI:
    """argparse front end over the service layer"""

    def __init__(self, out=None, err=None):
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.config: Optional[ConfigLoader] = None

    # ------------------------------------------------------------------
    # output helpers
    # ------------------------------------------------------------------

    def print_report(self, metrics: Dict[str, Any]) -> None:
        self.out.write(format_report(metrics))

    def print_error(self, msg: str) -> None:
        """One-line diagnostic on stderr."""
        line = " ".join(str(msg).split())
        if not line.startswith("❌"):
            line = f"❌ {line}"
        self.err.write(line + "\n")

    # ------------------------------------------------------------------
    # parser
    # ------------------------------------------------------------------

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = _Parser(prog="densecrf", description="Dense CRF inference, learning and evaluation")
        parser.add_argument("--config-dir", default=None, help="Directory holding config.yaml")
        parser.add_argument("--log-level", default=None, help="Override logging level")
        sub = parser.add_subparsers(dest="command", required=True)

        def kernel_flags(p: argparse.ArgumentParser) -> None:
            p.add_argument("--w1", type=float, default=None, help="Appearance kernel weight")
            p.add_argument("--theta-alpha", type=float, default=None)
            p.add_argument("--theta-beta", type=float, default=None)
            p.add_argument("--w2", type=float, default=None, help="Smoothness kernel weight (default 1)")
            p.add_argument("--theta-gamma", type=float, default=None, help="Smoothness stddev (default 1)")
            p.add_argument("--iters", type=int, default=None, help="Mean-field iterations (default 10)")
            p.add_argument("--compat", default=None, help="'potts' or a compatibility matrix file")
            p.add_argument("--normalization", choices=("pixelwise", "global", "none"), default=None)
            p.add_argument("--seed", type=int, default=None)

        infer = sub.add_parser("infer", help="Run mean-field inference on one image")
        infer.add_argument("--image", required=True)
        infer.add_argument("--unary", required=True)
        infer.add_argument("--out", required=True, help="Output label map PNG")
        infer.add_argument("--kl-trace", default=None, help="Write the KL trace CSV here")
        kernel_flags(infer)

        learn = sub.add_parser("learn-compat", help="Learn the label compatibility matrix")
        learn.add_argument("--manifest", required=True)
        learn.add_argument("--out", required=True)
        learn.add_argument("--max-iterations", type=int, default=None)
        learn.add_argument("--backend", choices=("builtin", "scipy"), default=None)
        kernel_flags(learn)

        grid = sub.add_parser("grid-search", help="Grid search w1, theta_alpha, theta_beta")
        grid.add_argument("--manifest", required=True)
        grid.add_argument("--grid", required=True, help="YAML/JSON file with w1, theta_alpha, theta_beta lists")
        kernel_flags(grid)

        sweep = sub.add_parser("sweep", help="Accuracy surface over theta_alpha x theta_beta")
        sweep.add_argument("--manifest", required=True)
        sweep.add_argument("--alphas", type=float, nargs="+", required=True)
        sweep.add_argument("--betas", type=float, nargs="+", required=True)
        sweep.add_argument("--sweep-w2", type=float, default=0.0, help="Smoothness weight during the sweep")
        sweep.add_argument("--long-range", type=float, default=None,
                           help="Also report the share of pairwise energy on edges at least this long")
        sweep.add_argument("--csv", default=None)
        kernel_flags(sweep)

        ev = sub.add_parser("eval", help="Score a predicted label map")
        ev.add_argument("--pred", required=True)
        ev.add_argument("--gt", required=True)
        ev.add_argument("--trimap-width", type=int, nargs="*", default=[])
        ev.add_argument("--voc", action="store_true")
        ev.add_argument("--labels", type=int, default=None, help="Number of labels (default: inferred)")
        ev.add_argument("--csv", default=None)

        bench = sub.add_parser("bench-filter", help="Lattice filter runtime and oracle error")
        bench.add_argument("--n", type=int, default=None)
        bench.add_argument("--d", type=int, default=None)
        bench.add_argument("--l", type=int, default=None)
        bench.add_argument("--seed", type=int, default=None)
        return parser

    # ------------------------------------------------------------------
    # config
    # ------------------------------------------------------------------

    def load_config(self, config_dir: Optional[str]) -> Optional[ConfigLoader]:
        try:
            return ConfigLoader(config_dir=config_dir)
        except FileNotFoundError:
            if config_dir is not None:
                raise
            logger.warning("⚠️ config.yaml not found, using built-in defaults")
            return None

    def run_config(self, args: argparse.Namespace) -> RunConfig:
        overrides = dict(
            w1=args.w1, theta_alpha=args.theta_alpha, theta_beta=args.theta_beta,
            w2=args.w2, theta_gamma=args.theta_gamma, iterations=args.iters,
            compat=args.compat, normalization=args.normalization, seed=args.seed,
        )
        if self.config is None:
            return RunConfig(**{k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_config(self.config, **overrides)

    # ------------------------------------------------------------------
    # commands
    # ------------------------------------------------------------------

    def cmd_infer(self, args: argparse.Namespace) -> int:
        service = InferenceService(self.run_config(args))
        outcome = service.run(args.image, args.unary, args.out, kl_trace_path=args.kl_trace)
        report: Dict[str, Any] = {"output": str(outcome.output), "iterations": service.run_config.iterations}
        if outcome.kl_trace:
            report["kl_initial"] = outcome.kl_trace[0]
            report["kl_final"] = outcome.kl_trace[-1]
        self.print_report(report)
        return 0

    def cmd_learn_compat(self, args: argparse.Namespace) -> int:
        optimizer = OptimizerConfig.from_config(
            self.config, max_iterations=args.max_iterations, backend=args.backend
        )
        service = LearningService(self.run_config(args), optimizer)
        _, result, path = service.learn_compatibility(args.manifest, args.out)
        self.print_report({
            "output": str(path),
            "iterations": result.iterations,
            "surrogate": result.value,
            "gradient_norm": result.gradient_norm,
            "converged": result.converged,
        })
        return 0

    def cmd_grid_search(self, args: argparse.Namespace) -> int:
        service = LearningService(self.run_config(args))
        w1, alpha, beta = service.grid_search(args.manifest, GridSpec.from_file(args.grid))
        self.print_report({"w1": w1, "theta_alpha": alpha, "theta_beta": beta})
        return 0

    def cmd_sweep(self, args: argparse.Namespace) -> int:
        service = LearningService(self.run_config(args))
        surface = service.sweep(
            args.manifest, args.alphas, args.betas, w1=args.w1, w2=args.sweep_w2,
            csv_path=args.csv, long_range_min_length=args.long_range,
        )
        self.out.write(surface.format_table())
        alpha, beta, best = surface.peak()
        self.print_report({"peak_theta_alpha": alpha, "peak_theta_beta": beta, "peak_global": best})
        return 0

    def cmd_eval(self, args: argparse.Namespace) -> int:
        metrics = EvaluationService(args.labels).evaluate_files(
            args.pred, args.gt, trimap_widths=args.trimap_width, voc=args.voc, csv_path=args.csv
        )
        self.print_report(metrics)
        return 0

    def cmd_bench_filter(self, args: argparse.Namespace) -> int:
        defaults = self.config.get_benchmark_config() if self.config is not None else {}
        lattice_cfg = self.config.get_lattice_config() if self.config is not None else {}
        service = BenchmarkService(brute_force_cap=int(lattice_cfg.get("brute_force_cap", 10_000)))
        report = service.bench_filter(
            n=args.n if args.n is not None else int(defaults.get("n", 1000)),
            d=args.d if args.d is not None else int(defaults.get("d", 5)),
            n_values=args.l if args.l is not None else int(defaults.get("l", 4)),
            seed=args.seed if args.seed is not None else int(defaults.get("seed", 0)),
        )
        self.print_report(report)
        return 0

    COMMANDS = {
        "infer": cmd_infer,
        "learn-compat": cmd_learn_compat,
        "grid-search": cmd_grid_search,
        "sweep": cmd_sweep,
        "eval": cmd_eval,
        "bench-filter": cmd_bench_filter,
    }

    def run(self, argv: Optional[List[str]] = None) -> int:
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except UsageError as exc:
            self.print_error(str(exc))
            return 2
        except SystemExit as exc:
            return int(exc.code) if exc.code is not None else 0
        try:
            self.config = self.load_config(args.config_dir)
            setup_logging(self.config, args.log_level)
            return self.COMMANDS[args.command](self, args)
        except Exception as exc:
            logger.debug("Command %s failed", args.command, exc_info=True)
            self.print_error(str(exc))
            return 1


def main(argv: Optional[List[str]] = None) -> int:
    return DenseCRFCLI().run(argv)


if __name__ == "__main__":
    sys.exit(main())
