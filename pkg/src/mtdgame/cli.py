"""Command-line entry point.

Exit codes: 0 success (and certified, for ``solve``), 1 solved but the
deviation certificate failed, 2 combinatorial budget exceeded, 3 usage or
parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .game import GameError, GameSpec
from .results import (
    bundle_tables,
    csv_text,
    fmt,
    load_policies,
    metadata,
    solution_bundle,
    write_csv,
    now_iso,
    write_json,
)
from .sim import empirical_switch_rate, sim_horizon, simulate, simulate_episode
from .specdoc import load_spec
from .strategies import DEFAULT_MAX_CELLS, BudgetExceeded
from . import sweeps

log = logging.getLogger("mtdgame")

EXIT_OK, EXIT_UNCERTIFIED, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _scenario(text: str):
    parts = text.split(":")
    if len(parts) == 1:
        p = _floats(parts[0])
        return (p, p)
    if len(parts) == 2:
        return (_floats(parts[0]), _floats(parts[1]))
    raise argparse.ArgumentTypeError(f"scenario must be 'P1' or 'P1:P2', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="game spec document (default: the built-in 2x2 instance)")
    common.add_argument("--out", type=Path, help="output directory (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS,
                        help="refuse bimatrix games with more cells (default: %(default)s)")
    common.add_argument("--label", type=int, default=1, help="Lemke-Howson initial label (default: 1)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--jobs", type=int, default=1, help="parallel solves for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="mtdgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="solve one game")
    p.add_argument("--all-labels", action="store_true",
                   help="also report the distinct equilibria reached from every label")

    p = sub.add_parser("sweep-beta", parents=[common], help="equilibrium values across discount factors")
    p.add_argument("--from", dest="start", type=float, default=0.1)
    p.add_argument("--to", dest="stop", type=float, default=0.9)
    p.add_argument("--step", type=float, default=0.1)

    p = sub.add_parser("compare-uniform", parents=[common],
                       help="equilibrium versus uniform defender policy")
    p.add_argument("--betas", type=_floats, help="comma-separated discount factors (default: spec value)")

    p = sub.add_parser("sweep-cost", parents=[common], help="defender value under switching-cost models")
    p.add_argument("--models", default="none,log,linear")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--betas", type=_floats, default=[round(0.1 * k, 1) for k in range(1, 10)])
    p.add_argument("--state", type=int, default=2, help="1-based state index (default: 2)")

    p = sub.add_parser("sweep-power", parents=[common], help="defender value per power scenario")
    p.add_argument("--scenario", type=_scenario, action="append",
                   help="P1 or P1:P2 power vectors, e.g. 1,3 or 1,3:1,3 (repeatable)")
    p.add_argument("--beta", type=float, default=0.75)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo rotation under stationary policies")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--policy", type=Path, help="solve result (JSON) holding the policies")
    src.add_argument("--solve-first", action="store_true")
    p.add_argument("--episodes", type=int, default=10_000)
    p.add_argument("--horizon", type=int, help="steps per episode (default: from the discounted tail bound)")
    p.add_argument("--start", type=int, help="1-based start state (default: every state)")
    p.add_argument("--log", type=Path, help="write per-episode records as JSON lines")
    p.add_argument("--log-episodes", type=int, default=10)
    return parser


def _emit_rows(args, name: str, rows: list[dict], meta: dict) -> None:
    header = list(rows[0]) if rows else []
    text_rows = [[_cell(r[k]) for k in header] for r in rows]
    if args.format == "csv":
        text = csv_text(header, text_rows)
    else:
        payload = {"metadata": meta, "rows": [dict(zip(header, r)) for r in text_rows]}
        text = json.dumps(payload, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"{name}.{args.format}"
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float) or v is None:
        return fmt(v)
    return str(v)


def _load(args) -> GameSpec:
    return GameSpec() if args.spec is None else load_spec(args.spec)


def cmd_solve(args) -> int:
    from .pipeline import solve
    from .solver import lemke_howson_all_labels

    spec = _load(args)
    started = now_iso()
    sol = solve(spec, label=args.label, max_cells=args.max_cells)
    bundle = solution_bundle(sol, started=started)
    if args.all_labels:
        bundle["all_labels"] = [
            {"x_support": [i for i, p in enumerate(pair.x) if p > 0],
             "y_support": [j for j, p in enumerate(pair.y) if p > 0]}
            for pair in lemke_howson_all_labels(sol.game)
        ]
    if args.out is None:
        if args.format == "json":
            sys.stdout.write(json.dumps(bundle, indent=2) + "\n")
        else:
            header, rows = bundle_tables(bundle)["values"]
            sys.stdout.write(csv_text(header, rows))
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.format == "json":
            write_json(args.out / "result.json", bundle)
        else:
            for name, (header, rows) in bundle_tables(bundle).items():
                write_csv(args.out / f"{name}.csv", header, rows)
        log.info("wrote results to %s", args.out)
    if not sol.certificate.passed:
        log.warning("deviation certificate failed: max regret %s", fmt(sol.certificate.max_regret))
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_sweep_beta(args) -> int:
    spec = _load(args)
    betas = sweeps.beta_grid(args.start, args.stop, args.step)
    rows = sweeps.sweep_beta(spec, betas, args.label, args.max_cells, args.jobs)
    _emit_rows(args, "sweep_beta", rows, metadata(spec, args.label))
    return EXIT_OK


def cmd_compare_uniform(args) -> int:
    spec = _load(args)
    rows = sweeps.compare_uniform(spec, args.betas, args.label, args.max_cells, args.jobs)
    _emit_rows(args, "compare_uniform", rows, metadata(spec, args.label))
    return EXIT_OK


def cmd_sweep_cost(args) -> int:
    spec = _load(args)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    rows = sweeps.sweep_cost(spec, models, args.q, args.betas, args.state, args.label,
                             args.max_cells, args.jobs)
    _emit_rows(args, "sweep_cost", rows, metadata(spec, args.label))
    return EXIT_OK


def cmd_sweep_power(args) -> int:
    spec = _load(args)
    scenarios = args.scenario or [([1, 3], [1, 3]), ([2, 2], [2, 2]), ([3, 1], [3, 1])]
    rows = sweeps.sweep_power(spec, scenarios, args.beta, args.label, args.max_cells, args.jobs)
    _emit_rows(args, "sweep_power", rows, metadata(spec, args.label))
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .equilibrium import StationaryPolicy, policy_values

    spec = _load(args)
    if args.policy is not None:
        E, H, _ = load_policies(args.policy)
    elif args.solve_first:
        from .pipeline import solve

        sol = solve(spec, label=args.label, max_cells=args.max_cells)
        E, H = sol.defender_policy.probs, sol.attacker_policy.probs
    else:
        log.error("simulate needs --policy PATH or --solve-first")
        return EXIT_USAGE
    E, H = StationaryPolicy(E), StationaryPolicy(H)
    horizon = args.horizon or sim_horizon(spec)
    starts = range(spec.num_states) if args.start is None else [args.start - 1]
    reference = policy_values(E, H, spec).defender
    rows = []
    for s in starts:
        summary = simulate(E, H, s, horizon, args.episodes, args.seed, spec)
        rows.append(
            {
                "state": s + 1,
                "episodes": summary.episodes,
                "horizon": summary.horizon,
                "mean_defender": summary.mean_defender,
                "se_defender": summary.se_defender,
                "mean_attacker": summary.mean_attacker,
                "se_attacker": summary.se_attacker,
                "value_defender": float(reference[s]),
                "switch_rate": empirical_switch_rate(summary),
            }
        )
    _emit_rows(args, "simulate", rows, metadata(spec, args.label, seed=args.seed))
    if args.log is not None:
        with open(args.log, "w", encoding="utf-8") as fh:
            for s in starts:
                for e in range(min(args.log_episodes, args.episodes)):
                    rec = simulate_episode(E, H, s, horizon, args.seed, e, spec)
                    fh.write(json.dumps(asdict(rec)) + "\n")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep-beta": cmd_sweep_beta,
    "compare-uniform": cmd_compare_uniform,
    "sweep-cost": cmd_sweep_cost,
    "sweep-power": cmd_sweep_power,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        log.error("%s", exc)
        print(f"refused: bimatrix needs {exc.count} cells (limit {exc.limit})", file=sys.stderr)
        return EXIT_BUDGET
    except GameError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
