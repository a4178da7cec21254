"""Command-line entry point.

Subcommands: `run` (replication campaign), `scatter` (perturbation study),
`dare` (solve and print the benchmark or a file-described system), and
`summarize` (aggregate a trial CSV). Exit codes: 0 success, 1 configuration
error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, NoConvergence, RandstabError
from .harness import (
    ExperimentConfig,
    lemma1_scatter,
    read_trials_csv,
    run_experiment,
    summarize,
    _load,
)
from .riccati import solve_dare, spectral_radius

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags by default; 2 is reserved for I/O here.
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="randstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run a replication campaign")
    p_run.add_argument("--algo", choices=["sf", "sp", "both"], default="both")
    p_run.add_argument("--T", type=_int_list, default=[100, 200, 400, 800, 1600, 3200],
                       help="comma-separated horizons")
    p_run.add_argument("--k", type=_int_list, default=[2, 3, 4, 5],
                       help="comma-separated episode counts")
    p_run.add_argument("--sigma", type=_float_list, default=[1.0],
                       help="comma-separated randomization scales")
    p_run.add_argument("--reps", type=int, default=100)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--system", default="preset", help="'preset' or a JSON file path")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--workers", type=int, default=1)

    p_sc = sub.add_parser("scatter",
                          help="perturbation scatter around the benchmark parameter")
    p_sc.add_argument("--samples", type=int, default=1000)
    p_sc.add_argument("--radii", type=_float_list,
                      default=[0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0])
    p_sc.add_argument("--seed", type=int, default=0)
    p_sc.add_argument("--out", required=True)

    p_dare = sub.add_parser("dare",
                            help="solve the Riccati equation and print K, L, radius")
    p_dare.add_argument("--system", default="preset")

    p_sum = sub.add_parser("summarize", help="aggregate a trial CSV")
    p_sum.add_argument("--in", dest="input", required=True)
    p_sum.add_argument("--out", required=True)
    return parser


def _fmt_matrix(name: str, m: np.ndarray) -> str:
    rows = ["  " + " ".join(f"{v:10.6f}" for v in row) for row in m]
    return f"{name} =\n" + "\n".join(rows)


def cmd_dare(args) -> int:
    plant, costs = _load(args.system)
    sol = solve_dare(plant, costs)
    radius = spectral_radius(plant.A + plant.B @ sol.L)
    print(_fmt_matrix("K", sol.K))
    print(_fmt_matrix("L", sol.L))
    print(f"spectral_radius(A+BL) = {radius:.6f}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = ExperimentConfig(
        algo=args.algo, T_grid=tuple(args.T), k_grid=tuple(args.k),
        sigma_grid=tuple(args.sigma), replications=args.reps,
        master_seed=args.seed, system_source=args.system, output_path=args.out,
    )
    records = run_experiment(cfg, workers=args.workers)
    print(f"wrote {len(records)} trials to {args.out}")
    return EXIT_OK


def cmd_scatter(args) -> int:
    records = lemma1_scatter(args.samples, args.radii, args.seed, output_path=args.out)
    print(f"wrote {len(records)} samples to {args.out}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    rows = summarize(read_trials_csv(args.input), output_path=args.out)
    print(f"wrote {len(rows)} summary rows to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "scatter": cmd_scatter,
    "dare": cmd_dare,
    "summarize": cmd_summarize,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except NoConvergence as exc:
        print(f"error: Riccati solve failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError, json.JSONDecodeError, RandstabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
