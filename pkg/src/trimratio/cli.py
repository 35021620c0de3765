"""Command line front end: CSV ingestion, estimation, simulation, oracles.

Reports are emitted as JSON with a fixed key order and floats rendered with
17 significant digits, so identical runs produce byte-identical files and
every number survives a parse round trip exactly.

Exit codes: 0 success, 1 validation or configuration error, 2 numerical
error (degenerate design, variance floor, quadrature failure), 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from .basis import orthonormality_residual
from .dgp import GammaNormalDgp, dgp_truth
from .errors import NumericalError, ValidationError
from .estimator import EstimateReport, TrimmedRatioEstimator
from .montecarlo import MonteCarloReport, run_replications, t_stat_normality
from .oracle import BUILTIN_DESIGNS, exact_trim_bias, named_design
from .validation import normalize_pairs

ORTHONORMALITY_TOL = 1e-10


# ---------------------------------------------------------------------------
# CSV ingestion


def ingest_csv(path: str):
    """Read an `a,b` CSV and normalize the pairs onto the unit interval.

    Rows with a <= 0 are rejected with their line numbers; when max(a) > 1
    both columns are rescaled by max(a), which leaves every ratio unchanged.
    Returns (a, b, scale).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: file is empty")
        if header != ["a", "b"]:
            raise ValidationError(
                f"{path}: header row must be exactly 'a,b', got {','.join(header)!r}"
            )
        a_vals: list[float] = []
        b_vals: list[float] = []
        bad_parse: list[int] = []
        nonpositive: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                bad_parse.append(lineno)
                continue
            try:
                a_val = float(row[0])
                b_val = float(row[1])
            except ValueError:
                bad_parse.append(lineno)
                continue
            if not (np.isfinite(a_val) and np.isfinite(b_val)):
                bad_parse.append(lineno)
                continue
            if a_val <= 0:
                nonpositive.append(lineno)
            a_vals.append(a_val)
            b_vals.append(b_val)
    if bad_parse:
        raise ValidationError(
            f"{path}: could not parse line(s) {', '.join(map(str, bad_parse))}"
        )
    if nonpositive:
        raise ValidationError(
            f"{path}: denominator must be strictly positive (no mass at zero); "
            f"offending line(s) {', '.join(map(str, nonpositive))}"
        )
    if not a_vals:
        raise ValidationError(f"{path}: no data rows")
    return normalize_pairs(np.array(a_vals), np.array(b_vals))


# ---------------------------------------------------------------------------
# JSON rendering with stable bytes


def _render(value, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(key))}: {_render(val, indent + 1)}"
            for key, val in value.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        seq = list(value)
        if not seq:
            return "[]"
        items = ",\n".join(f"{inner}{_render(val, indent + 1)}" for val in seq)
        return "[\n" + items + "\n" + pad + "]"
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return "null"
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot render {type(value).__name__} as JSON")


def render_json(payload: dict) -> str:
    return _render(payload) + "\n"


def emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def report_payload(report: EstimateReport) -> dict:
    d = report.diagnostics
    return {
        "theta_trimmed": report.theta_trimmed,
        "bias_hat": report.bias_hat,
        "theta_corrected": report.theta_corrected,
        "std_error": report.std_error,
        "ci": [report.ci_lower, report.ci_upper],
        "h": report.h,
        "k": report.smoothness,
        "K": report.degree,
        "n": report.n,
        "n_trimmed": report.n_trimmed,
        "normalization_scale": report.normalization_scale,
        "diagnostics": {
            "gram_condition": d.gram_condition,
            "gram_condition_warning": d.gram_condition_warning,
            "variance_floor": d.variance_floor,
            "basis": d.basis,
            "influence": d.influence,
            "threshold_rule": d.threshold_rule,
            "rate_constant": d.rate_constant,
            "threshold_clamped": d.threshold_clamped,
            "t_stat": report.t_stat,
            "confidence_level": report.confidence_level,
        },
    }


def simulation_payload(report: MonteCarloReport) -> dict:
    params = report.estimator_params
    truth = dgp_truth(report.dgp)
    ks = None
    if report.reps >= 500 and report.successes > 0:
        ks = t_stat_normality(report)
    return {
        "reps": report.reps,
        "n": report.n,
        "seed": report.seed,
        "theta_true": report.theta_true,
        "moment_exists": truth.moment_exists,
        "variance_exists": truth.variance_exists,
        "config": {
            "alpha": report.dgp.alpha,
            "beta": report.dgp.beta,
            "c1": report.dgp.c1,
            "c2": report.dgp.c2,
            "d": report.dgp.d,
            "noiseless": report.dgp.noiseless,
            "k": params["smoothness"],
            "K": params["degree"],
            "threshold": "auto" if params["threshold"] == "auto" else float(params["threshold"]),
            "rate_constant": params["rate_constant"],
            "basis": params["basis"],
            "influence": params["influence"],
            "confidence_level": params["confidence_level"],
        },
        "successes": report.successes,
        "failures": dict(report.failures),
        "mean_h": report.mean_h,
        "estimators": {
            name: {
                "mean_bias": s.mean_bias,
                "rmse": s.rmse,
                "sd": s.sd,
                "mean_se": s.mean_se,
                "coverage": s.coverage,
                "mean_ci_length": s.mean_ci_length,
            }
            for name, s in report.summaries.items()
        },
        "ks_to_normal": ks,
    }


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_estimate(args) -> int:
    a, b, scale = ingest_csv(args.input)
    model = TrimmedRatioEstimator(
        smoothness=args.k,
        degree=args.K,
        threshold="auto" if args.h is None else args.h,
        rate_constant=args.rate_C if args.rate_C is not None else 1.0,
        basis=args.basis,
        influence=args.influence,
        confidence_level=args.level,
        null_value=args.null,
    )
    # ingest_csv already normalized; feed the normalized pairs but surface the scale
    model.fit(a, b)
    report = model.report_
    if scale != 1.0:
        report = replace(report, normalization_scale=scale)
    print(
        f"estimate: n={report.n} kept={report.n - report.n_trimmed} "
        f"h={report.h:.6g} theta={report.theta_corrected:.6g} "
        f"se={report.std_error:.6g}",
        file=sys.stderr,
    )
    emit(render_json(report_payload(report)), args.out)
    return 0


def _cmd_simulate(args) -> int:
    dgp = GammaNormalDgp(
        alpha=args.alpha,
        beta=args.beta,
        c1=args.c1,
        c2=args.c2,
        d=args.d,
        noiseless=args.noiseless,
    )
    template = TrimmedRatioEstimator(
        smoothness=args.k,
        degree=args.K,
        threshold="auto" if args.h is None else args.h,
        rate_constant=args.rate_C if args.rate_C is not None else 1.0,
        basis=args.basis,
        influence=args.influence,
        confidence_level=args.level,
    )
    report = run_replications(
        dgp, args.n, args.reps, args.seed, estimator=template, workers=args.workers
    )
    print(
        f"simulate: reps={report.reps} successes={report.successes} "
        f"corrected bias={report.summaries['corrected'].mean_bias:.6g} "
        f"coverage={report.summaries['corrected'].coverage:.4g}",
        file=sys.stderr,
    )
    emit(render_json(simulation_payload(report)), args.out)
    return 0


def _cmd_oracle_bias(args) -> int:
    design = named_design(args.design)
    decomposition = exact_trim_bias(design, args.h, args.k)
    payload = {
        "design": design.name,
        "h": args.h,
        "k": args.k,
        "main_terms": list(decomposition.main_terms),
        "remainder": decomposition.remainder,
        "total": decomposition.total,
        "identity_gap": decomposition.identity_gap,
        "tail_mass_above_one": design.tail_mass_above_one,
    }
    emit(render_json(payload), args.out)
    return 0


def _cmd_basis_check(args) -> int:
    shifted = orthonormality_residual(args.K, "shifted")
    literal = orthonormality_residual(args.K, "literal")
    passed = shifted <= ORTHONORMALITY_TOL and literal <= ORTHONORMALITY_TOL
    payload = {
        "K": args.K,
        "max_residual_shifted": shifted,
        "max_residual_literal": literal,
        "tolerance": ORTHONORMALITY_TOL,
        "pass": passed,
    }
    emit(render_json(payload), args.out)
    if not passed:
        print(
            f"basis-check: orthonormality residual exceeds {ORTHONORMALITY_TOL:g}",
            file=sys.stderr,
        )
        return 2
    return 0


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the exit-code contract
    # reserves 2 for numerical failures, so remap to 1.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="trimratio",
        description=(
            "Trimmed means of ratios with bias correction and "
            "self-normalized confidence intervals"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser(
        "estimate",
        help="estimate from a CSV file with header 'a,b'",
        description=(
            "Estimate the mean ratio from paired observations. The column a "
            "holds denominators (for treatment-effect weighting, supply the "
            "propensity values as a and the weighted outcomes as b); column "
            "b holds numerators. When max(a) > 1 both columns are rescaled "
            "by max(a), which leaves every ratio unchanged."
        ),
    )
    est.add_argument("--input", required=True, help="CSV path, header exactly 'a,b'")
    group = est.add_mutually_exclusive_group()
    group.add_argument("--h", type=float, default=None, help="fixed trimming threshold in [0, 1)")
    group.add_argument(
        "--rate-C",
        dest="rate_C",
        type=float,
        default=None,
        help="rate-rule constant C for h = C * n**-r (default rule when --h absent)",
    )
    est.add_argument("--k", type=int, required=True, help="smoothness order (>= 2)")
    est.add_argument("--K", type=int, required=True, help="basis degree (>= k)")
    est.add_argument("--basis", choices=["shifted", "literal"], default="shifted")
    est.add_argument("--influence", choices=["sandwich", "literal"], default="sandwich")
    est.add_argument("--level", type=float, default=0.95, help="confidence level")
    est.add_argument("--null", type=float, default=0.0, help="null value for the t statistic")
    est.add_argument("--out", default=None, help="output path (default stdout)")
    est.set_defaults(func=_cmd_estimate)

    sim = sub.add_parser("simulate", help="replicated estimation experiment")
    sim.add_argument("--alpha", type=float, required=True)
    sim.add_argument("--beta", type=float, required=True)
    sim.add_argument("--c1", type=float, required=True)
    sim.add_argument("--c2", type=float, required=True)
    sim.add_argument("--d", type=float, required=True)
    sim.add_argument("--noiseless", action="store_true")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--reps", type=int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--k", type=int, default=4)
    sim.add_argument("--K", type=int, default=6)
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--h", type=float, default=None)
    group.add_argument("--rate-C", dest="rate_C", type=float, default=None)
    sim.add_argument("--basis", choices=["shifted", "literal"], default="shifted")
    sim.add_argument("--influence", choices=["sandwich", "literal"], default="sandwich")
    sim.add_argument("--level", type=float, default=0.95)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=_cmd_simulate)

    orc = sub.add_parser("oracle-bias", help="exact trimming-bias decomposition")
    orc.add_argument("--design", choices=list(BUILTIN_DESIGNS), required=True)
    orc.add_argument("--h", type=float, required=True)
    orc.add_argument("--k", type=int, required=True)
    orc.add_argument("--out", default=None)
    orc.set_defaults(func=_cmd_oracle_bias)

    chk = sub.add_parser("basis-check", help="orthonormality residuals of both bases")
    chk.add_argument("--K", type=int, required=True)
    chk.add_argument("--out", default=None)
    chk.set_defaults(func=_cmd_basis_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"trimratio: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"trimratio: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"trimratio: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
