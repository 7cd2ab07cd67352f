"""Command-line front end.

Exit codes: 0 on success, 1 on invalid input or usage, 2 when a solver
fails to converge.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import _io
from .design import DesignProblem, SolverError, solve, verify_solution
from .experiments import ExperimentConfig, parse_grid, run_parity_experiment, run_tabular_experiment
from .mmsebounds import CorrelationSpec, estimability_bound, mmse_lower_bound, one_bit_report
from .pic import decompose
from .probspace import (
    Channel,
    ValidationError,
    load_json,
    marginals,
    read_channel_json,
    read_pmf_json,
    read_samples_csv,
    standardize,
)
from .putbounds import sweep
from .robustness import monte_carlo_validate

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="picput", description="Privacy-utility trade-offs via principal inertia components.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("pic", help="PIC decomposition of a joint pmf")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--pmf", type=Path)
    src.add_argument("--samples", type=Path)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("put-bounds", help="lower/upper bounds on the chi2 privacy-utility function")
    s.add_argument("--pmf", type=Path, required=True)
    s.add_argument("--eps-grid", type=_positive_int, default=50)
    s.add_argument("--f0", type=float)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("design", help="design a privacy-assuring channel")
    s.add_argument("--pmf", type=Path, required=True)
    s.add_argument("--functions", type=Path, required=True)
    s.add_argument("--objective", choices=["min", "weighted"])
    s.add_argument("--weights", type=_float_list)
    s.add_argument("--theta-grid")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("mmse-bound", help="MMSE lower bound from correlation data")
    s.add_argument("--spec", type=Path, required=True)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("robustness", help="Monte-Carlo check of the finite-sample envelope")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--pmf", type=Path)
    src.add_argument("--samples", type=Path)
    s.add_argument("--channel", type=Path)
    s.add_argument("--n", type=_positive_int, default=10000)
    s.add_argument("--beta", type=float, default=0.05)
    s.add_argument("--trials", type=_positive_int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("experiment", help="run a bundled experiment")
    s.add_argument("name", choices=["parity", "tabular"])
    s.add_argument("--theta-grid", default="0:1:21")
    s.add_argument("--objective", choices=["min", "weighted"])
    s.add_argument("--weights", type=_float_list)
    s.add_argument("--samples", type=Path)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=True)
    return p


def _emit(text: str, out: Path | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    _io.write_text(out / name, text)


def _load_pmf(args):
    if getattr(args, "pmf", None) is not None:
        return read_pmf_json(args.pmf), {"pmf": args.pmf}
    return read_samples_csv(args.samples), {"samples": args.samples}


def cmd_pic(args) -> int:
    j, _ = _load_pmf(args)
    dec = decompose(j)
    _emit(_io.dumps({"chi2": float(dec.lambdas.sum()), **dec.to_dict()}), args.out, "pic.json")
    return EXIT_OK


def cmd_put_bounds(args) -> int:
    j = read_pmf_json(args.pmf)
    if args.eps_grid < 1:
        raise ValidationError("--eps-grid needs at least one point")
    rows = sweep(j, args.eps_grid, args.f0)
    text = _io.render_csv(["eps", "lower", "upper", "simple_dpi"], rows,
                          [_io.provenance_line(None, {"pmf": args.pmf})])
    _emit(text, args.out, "put_bounds.csv")
    return EXIT_OK


def _problem_from_files(args, thetas=None):
    j = read_pmf_json(args.pmf)
    spec = load_json(args.functions)
    p_s, p_x = marginals(j)
    try:
        useful = [standardize(u, p_x) for u in spec.get("useful", [])]
        private = [standardize(s, p_s) for s in spec.get("private", [])]
    except ValueError as exc:
        raise ValidationError(f"functions JSON: {exc}") from None
    if thetas is None:
        thetas = spec.get("thetas", [])
    objective = args.objective or spec.get("objective", "weighted")
    weights = args.weights if args.weights is not None else spec.get("weights")
    return DesignProblem(j, useful, private, thetas, objective, weights)


def _mmse_columns(problem):
    return ([f"useful_{i}" for i in range(len(problem.useful))]
            + [f"private_{i}" for i in range(len(problem.private))])


def cmd_design(args) -> int:
    inputs = {"pmf": args.pmf, "functions": args.functions}
    if args.theta_grid is None:
        problem = _problem_from_files(args)
        sol = solve(problem)
        report = verify_solution(problem, sol)
        payload = dict(sol.to_dict(), verification=report.checks, verified=report.ok)
        _emit(_io.dumps(payload), args.out, "solution.json")
        if args.out is not None:
            row = dict(zip(_mmse_columns(problem),
                           np.concatenate([sol.achieved_mmse_useful, sol.achieved_mmse_private])))
            text = _io.render_csv(_mmse_columns(problem), [row], [_io.provenance_line(None, inputs)])
            _io.write_text(args.out / "mmse.csv", text)
        return EXIT_OK if report.ok else EXIT_SOLVER

    grid = parse_grid(args.theta_grid)
    rows, status = [], EXIT_OK
    columns = None
    for theta in grid:
        n_private = len(load_json(args.functions).get("private", []))
        problem = _problem_from_files(args, [theta] * n_private)
        columns = _mmse_columns(problem)
        row = {"theta": theta}
        try:
            sol = solve(problem)
            ok = verify_solution(problem, sol).ok
            row.update(zip(columns, np.concatenate([sol.achieved_mmse_useful, sol.achieved_mmse_private])))
            row["objective_value"] = sol.objective_value
            row["status"] = "ok" if ok else "verify_failed"
            if not ok:
                status = EXIT_SOLVER
        except SolverError as exc:
            row["status"] = f"failed: {exc}"
            status = EXIT_SOLVER
        rows.append(row)
    text = _io.render_csv(["theta", *columns, "objective_value", "status"], rows,
                          [_io.provenance_line(None, inputs)])
    _emit(text, args.out, "mmse.csv")
    return status


def cmd_mmse_bound(args) -> int:
    data = load_json(args.spec)
    if "alphas" in data:
        rep = one_bit_report(data["rhos"], data["alphas"], data.get("means"))
        payload = {"bound": rep["bound"], "kind": "one_bit_error_probability",
                   "sum_rho_sq": rep["sum_rho_sq"],
                   "references_span_target": rep["references_span_target"]}
    else:
        spec = CorrelationSpec.from_dict(data)
        value, cert = estimability_bound(spec)
        payload = {"bound": mmse_lower_bound(spec), "value": value, "rho0": spec.rho0, "t": spec.t,
                   "certificate": None if cert is None else cert.to_dict()}
    _emit(_io.dumps(payload), args.out, "mmse_bound.json")
    return EXIT_OK


def cmd_robustness(args) -> int:
    truth, inputs = _load_pmf(args)
    if args.channel is not None:
        channel = read_channel_json(args.channel)
        inputs["channel"] = args.channel
    else:
        channel = Channel.identity(truth.cols)
    rep = monte_carlo_validate(truth, channel, args.n, args.beta, args.trials, args.seed)
    columns = ["trial", "n", "gap_s", "gap_x", "bound_s", "bound_x", "exceeded"]
    comments = [_io.provenance_line(args.seed, inputs)]
    if rep.envelope is not None:
        comments.append(f"# eps_n={_io.fmt(rep.envelope.eps_n)} beta={_io.fmt(args.beta)} "
                        f"exceedance={_io.fmt(rep.exceedance)} skipped={rep.skipped}")
    _emit(_io.render_csv(columns, rep.rows, comments), args.out, "robustness.csv")
    return EXIT_OK


def cmd_experiment(args) -> int:
    inputs = {"samples": args.samples} if args.samples else {}
    cfg = ExperimentConfig(args.name, parse_grid(args.theta_grid), args.out, args.objective,
                           args.weights, args.samples, args.seed, inputs=inputs)
    run = run_parity_experiment if args.name == "parity" else run_tabular_experiment
    result = run(cfg)
    failed = [r for r in result["rows"] if str(r.get("status", "")).startswith("failed")]
    print(f"wrote {result['csv']}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


COMMANDS = {
    "pic": cmd_pic,
    "put-bounds": cmd_put_bounds,
    "design": cmd_design,
    "mmse-bound": cmd_mmse_bound,
    "robustness": cmd_robustness,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        # --help exits 0; anything else argparse raises is a usage problem
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValidationError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
