"""Command-line front end for the experiment harness.

Subcommands: ``run`` (plan to records CSV), ``mse`` (plan to MSE summary),
``fit`` (records CSV to a complexity slope report), ``check`` (model to an
assumption report). Exit codes: 0 ok, 2 validation, 3 assumption failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness, mlmc
from .errors import AssumptionError, InsufficientDataError, ParameterError, RbmMlmcError
from .params import build_symmetric, check_assumptions, load_network, symmetric_constants

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ASSUMPTIONS = 3
EXIT_IO = 4


def _int_list(text):
    return tuple(int(part) for part in text.split(",") if part)


def _float_list(text):
    return tuple(float(part) for part in text.split(",") if part)


def _add_plan_flags(parser):
    parser.add_argument("plan", nargs="?", help="plan JSON file (flags override its fields)")
    parser.add_argument("--dims", type=_int_list, help="comma-separated dimensions, e.g. 5,10,20")
    parser.add_argument("--beta", type=float, help="load parameter of the symmetric family")
    parser.add_argument("--gamma", type=_float_list, help="step-size base(s), e.g. 0.05 or 0.1,0.05")
    parser.add_argument("--eps", type=float, help="target RMSE")
    parser.add_argument("--reps", type=int, help="replications per (d, gamma)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--convention", choices=("experiment", "theory"),
                        help="hyperparameter convention")
    parser.add_argument("--k1", type=float, help="additive constant in the level formula")
    parser.add_argument("--xi1", type=float, help="contraction-rate constant (theory convention)")
    parser.add_argument("--threads", type=int, help="worker processes")
    parser.add_argument("--payoff", help="payoff selector: coord:<i> or mean")
    parser.add_argument("--network", help="explicit network JSON (switches model to explicit)")


def _resolve_plan(args) -> harness.ExperimentPlan:
    plan = harness.plan_from_file(args.plan) if args.plan else harness.ExperimentPlan()
    updates = {}
    mapping = {
        "dims": args.dims, "beta": args.beta, "gammas": args.gamma,
        "epsilon": args.eps, "replications": args.reps, "master_seed": args.seed,
        "output": args.out, "convention": args.convention, "k1": args.k1,
        "xi1": args.xi1, "threads": args.threads, "payoff": args.payoff,
    }
    if args.network:
        mapping["network"] = args.network
        mapping["model"] = "explicit"
    for key, value in mapping.items():
        if value is not None:
            updates[key] = value
    return dataclasses.replace(plan, **updates) if updates else plan


def _cmd_run(args) -> int:
    plan = _resolve_plan(args)
    records = harness.run_plan(plan)
    print(f"wrote {len(records)} records to {plan.output}")
    return EXIT_OK


def _cmd_mse(args) -> int:
    plan = _resolve_plan(args)
    summary_path = plan.output
    records_path = plan.output + ".records.csv"
    plan = dataclasses.replace(plan, output=records_path)
    summaries = harness.mse_study(plan, summary_path=summary_path)
    for s in summaries:
        if s.mse is None:
            print(f"d={s.d} gamma={s.gamma}: estimator variance {s.est_variance:.6g} (no truth)")
        else:
            band = ("" if s.band_low is None
                    else f"  95% band [{s.band_low:.6g}, {s.band_high:.6g}]")
            print(f"d={s.d} gamma={s.gamma}: MSE {s.mse:.6g} over {s.replications} reps{band}")
    print(f"wrote summary to {summary_path}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    records = harness.load_records(args.records)
    groups = {}
    for rec in records:
        groups.setdefault((rec.gamma, rec.epsilon), []).append(rec)
    for (gamma, epsilon), group in sorted(groups.items()):
        fit = harness.complexity_fit(group)
        print(f"gamma={gamma} eps={epsilon}: slope {fit.slope:.4f}  "
              f"R^2 {fit.r_squared:.4f}  dims {list(fit.dims)}")
    return EXIT_OK


def _cmd_check(args) -> int:
    if args.network:
        models = [load_network(args.network)]
        constants = harness._default_constants(models[0])
    else:
        dims = args.dims or (10,)
        beta = args.beta if args.beta is not None else 0.8
        models = [build_symmetric(d, beta) for d in dims]
        constants = symmetric_constants(beta)
    overrides = {name: getattr(args, name) for name in ("beta0", "kappa0", "delta0", "b0")
                 if getattr(args, name) is not None}
    if overrides:
        constants = dataclasses.replace(constants, **overrides)
    worst = EXIT_OK
    for params in models:
        report = check_assumptions(params, constants, n_max=args.n_max)
        status = "ok" if report.all_ok else "FAILED"
        exact = " (contraction certified analytically)" if report.a1_exact else ""
        print(f"d={params.d}: {status}{exact}")
        print(f"  contraction: {'ok' if report.a1_ok else 'violated'} "
              f"margin {report.a1_margin:.6g}")
        print(f"  stability:   {'ok' if report.a2_ok else 'violated'} "
              f"margin {report.a2_margin:.6g}")
        print(f"  variances:   {'ok' if report.a3_ok else 'violated'} "
              f"range {report.a3_margins}")
        if not report.all_ok:
            worst = EXIT_ASSUMPTIONS
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbm-mlmc",
        description="Steady-state estimation of reflected Brownian motion "
                    "by multilevel Monte Carlo",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a plan and write one record per cell")
    _add_plan_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_mse = sub.add_parser("mse", help="replication study with an MSE summary table")
    _add_plan_flags(p_mse)
    p_mse.set_defaults(func=_cmd_mse)

    p_fit = sub.add_parser("fit", help="log-log complexity slope from a records CSV")
    p_fit.add_argument("records", help="records CSV produced by 'run'")
    p_fit.set_defaults(func=_cmd_fit)

    p_check = sub.add_parser("check", help="print the assumption report for a model")
    p_check.add_argument("--dims", type=_int_list, help="dimensions to check")
    p_check.add_argument("--beta", type=float, help="symmetric-family load parameter")
    p_check.add_argument("--network", help="explicit network JSON")
    p_check.add_argument("--n-max", type=int, default=64, dest="n_max",
                         help="power depth for the contraction check")
    for name, doc in (("beta0", "claimed contraction rate"),
                      ("kappa0", "claimed contraction prefactor"),
                      ("delta0", "claimed stability margin"),
                      ("b0", "claimed marginal-variance bound")):
        p_check.add_argument(f"--{name}", type=float, help=doc)
    p_check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AssumptionError as exc:
        print(f"assumption failure: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTIONS
    except (ParameterError, InsufficientDataError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except RbmMlmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
