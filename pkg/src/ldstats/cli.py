"""Batch command-line front end.

Subcommands: fit, sample, hist, mse, simulate.  Exit codes: 0 success,
1 input error, 2 estimation failure.  Any command is byte-reproducible
given the same configuration and seed.  Delimited output goes to stdout;
``--plot`` renders an optional matplotlib figure next to it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from itertools import product

import numpy as np

from .errors import (
    BudgetError,
    DomainError,
    EstimationError,
    InputError,
    LDStatsError,
)
from .gf import GFControls, gf_fit, p0_estimate, wald_inference
from .growth import (
    DEFAULT_DIVISION_BUDGET,
    GenerationModel,
    GenerationTimeLaw,
    harris_constant,
    malthusian,
    simulate_gm0_detail,
    calibrate_mutation_probability,
)
from .lddist import DEFAULT_TABLE_BUDGET, LDParams, ld_pmf_table, ld_sample
from .ml import MLOptions, ml_fit, winsorized_ml_fit
from .samples import Sample

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ESTIMATION = 2

_METHOD_CHOICES = ("gf", "ml", "ml-winsor", "p0")


def _sig12(x) -> float | None:
    """Serialize at 12 significant digits; non-finite becomes null."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream derived from (seed, index...)."""
    return np.random.default_rng([int(seed), *map(int, key)])


def read_sample(path: str) -> Sample:
    """One non-negative integer per line; '#' comments and blank lines are
    skipped; an optional single-column CSV header 'count' is accepted."""
    if path == "-":
        lines = sys.stdin.read().splitlines()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
    counts: list[int] = []
    header_allowed = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header_allowed and line.lower() == "count":
            header_allowed = False
            continue
        header_allowed = False
        try:
            value = int(line)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: not an integer: {line!r}") from exc
        if value < 0:
            raise InputError(f"{path}:{lineno}: negative count {value}")
        counts.append(value)
    if not counts:
        raise InputError(f"{path}: no counts found")
    return Sample(np.array(counts, dtype=np.int64))


def _interval(ci) -> list | None:
    if ci is None:
        return None
    return [_sig12(ci[0]), _sig12(ci[1])]


def _emit_fit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
        return
    flat = dict(payload)
    cov = flat.pop("cov")
    for i, name in enumerate(("cov_aa", "cov_ar", "cov_ra", "cov_rr")):
        flat[name] = cov[i]
    for key in ("ci_alpha", "ci_rho", "ci_mutation_rate"):
        if key in flat:
            pair = flat.pop(key)
            flat[f"{key}_lo"] = None if pair is None else pair[0]
            flat[f"{key}_hi"] = None if pair is None else pair[1]
    flat["warnings"] = ";".join(flat.get("warnings", []))
    if "diagnostics" in flat:
        diag = flat.pop("diagnostics")
        for k, v in diag.items():
            flat[f"diag_{k}"] = v if not isinstance(v, list) else ";".join(map(str, v))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(flat.keys())
    writer.writerow(["" if v is None else v for v in flat.values()])
    sys.stdout.write(buf.getvalue())


def cmd_fit(args) -> int:
    try:
        sample = read_sample(args.input)
        controls = GFControls(args.z1, args.z2, args.z3, args.q)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    diagnostics = None
    try:
        if args.method == "gf":
            result, diag = gf_fit(sample, controls)
            diagnostics = {
                "b": _sig12(diag.b),
                "g_hat": [_sig12(g) for g in diag.g_hat],
                "y_hat": _sig12(diag.y_hat),
            }
        elif args.method == "ml":
            result = ml_fit(sample, opts=MLOptions(table_budget=args.table_budget))
        elif args.method == "ml-winsor":
            result = winsorized_ml_fit(
                sample,
                bound=args.winsor_bound,
                opts=MLOptions(table_budget=args.table_budget),
            )
        else:
            result = p0_estimate(sample)
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION

    payload = {
        "alpha_hat": _sig12(result.alpha_hat),
        "rho_hat": _sig12(result.rho_hat),
        "cov": [_sig12(v) for v in result.cov.ravel()],
        "ci_alpha": None,
        "ci_rho": None,
        "method": result.method,
        "n": result.n,
        "iterations": result.iterations,
        "converged": result.converged,
        "warnings": list(result.warnings),
    }
    if diagnostics is not None:
        payload["diagnostics"] = diagnostics

    if not result.converged:
        _emit_fit(payload, args.format)
        print(
            "estimation failed: " + ("; ".join(result.warnings) or "did not converge"),
            file=sys.stderr,
        )
        return EXIT_ESTIMATION

    inference = wald_inference(
        result, level=args.level, null={"rho": 1.0} if args.test_rho1 else None
    )
    payload["ci_alpha"] = _interval(inference.ci_alpha)
    payload["ci_rho"] = _interval(inference.ci_rho)
    if args.test_rho1:
        payload["p_value_rho1"] = _sig12(inference.p_value)
    if args.total_cells is not None:
        scale = float(args.total_cells)
        payload["mutation_rate"] = _sig12(result.alpha_hat / scale)
        ci = inference.ci_alpha
        payload["ci_mutation_rate"] = (
            None if ci is None else [_sig12(ci[0] / scale), _sig12(ci[1] / scale)]
        )
    if args.plot:
        from .plots import save_ellipse_figure

        save_ellipse_figure(result, inference, args.plot)
    _emit_fit(payload, args.format)
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        params = LDParams(args.alpha, args.rho)
        if args.size < 1:
            raise DomainError("size must be >= 1")
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sample = ld_sample(params, args.size, _rng(args.seed))
    text = "\n".join(str(int(x)) for x in sample.counts) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _hist_rows(sample: Sample) -> list[tuple[str, int]]:
    zeros = int(np.sum(sample.counts == 0))
    rows = [("zero", zeros)]
    if sample.max_count >= 1:
        # class n holds 10^n <= X < 10^(n+1); digit count is exact where
        # float log10 would wobble at class boundaries
        nmax = len(str(sample.max_count)) - 1
        classes = np.zeros(nmax + 1, dtype=np.int64)
        positive = sample.counts[sample.counts > 0]
        digits = np.array([len(str(int(x))) - 1 for x in positive])
        np.add.at(classes, digits, 1)
        rows.extend((str(n), int(classes[n])) for n in range(nmax + 1))
    return rows


def cmd_hist(args) -> int:
    try:
        sample = read_sample(args.input)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.linear:
        rows = [(str(int(v)), int(c)) for v, c in zip(sample.values, sample.freqs)]
    else:
        rows = _hist_rows(sample)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["class", "count"])
    writer.writerows(rows)
    if args.plot:
        from .plots import save_histogram_figure

        save_histogram_figure(rows, args.plot)
    return EXIT_OK


def _parse_grid(text: str, name: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"bad {name} grid {text!r}") from exc
    if not values:
        raise InputError(f"empty {name} grid")
    return values


def _fit_for_mse(method: str, sample: Sample, controls: GFControls, winsor_bound: int):
    """(alpha_hat, rho_hat) or None on failure; shared by the harness."""
    if method == "gf":
        res, _ = gf_fit(sample, controls)
        return res.alpha_hat, res.rho_hat
    if method == "p0":
        res = p0_estimate(sample)
        return res.alpha_hat, res.rho_hat
    if method == "ml":
        res = ml_fit(sample)
    else:
        res = winsorized_ml_fit(sample, bound=winsor_bound)
    if not res.converged:
        raise EstimationError("; ".join(res.warnings) or "no convergence")
    return res.alpha_hat, res.rho_hat


def cmd_mse(args) -> int:
    try:
        alphas = _parse_grid(args.alpha_grid, "alpha")
        rhos = _parse_grid(args.rho_grid, "rho")
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        for m in methods:
            if m not in _METHOD_CHOICES:
                raise InputError(f"unknown method {m!r}")
        if args.replicates < 1:
            raise InputError("replicates must be >= 1")
        controls = GFControls(args.z1, args.z2, args.z3, args.q)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    rows = []
    for cell_index, (alpha, rho) in enumerate(product(alphas, rhos)):
        params = LDParams(alpha, rho)
        sq_err = {m: ([], []) for m in methods}
        failures = {m: 0 for m in methods}
        for rep in range(args.replicates):
            sample = ld_sample(params, args.size, _rng(args.seed, cell_index, rep))
            for method in methods:
                try:
                    a_hat, r_hat = _fit_for_mse(method, sample, controls, args.winsor_bound)
                except (EstimationError, BudgetError):
                    failures[method] += 1
                    continue
                sq_err[method][0].append((a_hat - alpha) ** 2)
                if math.isfinite(r_hat):
                    sq_err[method][1].append((r_hat - rho) ** 2)
        for method in methods:
            errs_a, errs_r = sq_err[method]
            rows.append({
                "alpha": alpha,
                "rho": rho,
                "method": method,
                "replicates": args.replicates,
                "n": args.size,
                "failures": failures[method],
                "mse_alpha": _sig12(np.mean(errs_a)) if errs_a else None,
                "mse_rho": _sig12(np.mean(errs_r)) if errs_r else None,
            })

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["alpha", "rho", "method", "replicates", "n",
                     "failures", "mse_alpha", "mse_rho"])
    for row in rows:
        writer.writerow([
            row["alpha"], row["rho"], row["method"], row["replicates"], row["n"],
            row["failures"],
            "" if row["mse_alpha"] is None else row["mse_alpha"],
            "" if row["mse_rho"] is None else row["mse_rho"],
        ])
    if args.plot:
        from .plots import save_mse_figure

        save_mse_figure(rows, args.plot)
    return EXIT_OK


def _build_law(args) -> GenerationTimeLaw:
    if args.law == "deterministic":
        if args.gen_time is None:
            raise InputError("deterministic law needs --gen-time")
        return GenerationTimeLaw.deterministic(args.gen_time)
    if args.law == "exponential":
        if args.rate is None:
            raise InputError("exponential law needs --rate")
        return GenerationTimeLaw.exponential(args.rate)
    if args.law == "gamma":
        if args.shape is None or args.rate is None:
            raise InputError("gamma law needs --shape and --rate")
        return GenerationTimeLaw.gamma(args.shape, args.rate)
    if args.mu_log is None or args.sigma_log is None:
        raise InputError("lognormal law needs --mu-log and --sigma-log")
    return GenerationTimeLaw.lognormal(args.mu_log, args.sigma_log)


def _tv_distance(counts: np.ndarray, params: LDParams, kmax: int = 200) -> float:
    table = ld_pmf_table(params, kmax)
    edges = np.arange(kmax + 2)
    empirical = np.histogram(np.minimum(counts, kmax + 1), bins=edges.tolist() + [np.inf])[0]
    empirical = empirical / counts.size
    theoretical = np.append(table.q, table.tail_bound)
    return 0.5 * float(np.sum(np.abs(empirical - theoretical)))


def cmd_simulate(args) -> int:
    try:
        law = _build_law(args)
        if args.alpha is not None:
            p = calibrate_mutation_probability(law, args.mu, args.alpha, args.t_end, args.n0)
        elif args.p is not None:
            p = args.p
        else:
            raise InputError("simulate needs either --alpha (calibrated) or --p")
        model = GenerationModel(law=law, mu=args.mu, p=p, n0=args.n0, t_end=args.t_end)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    nu = malthusian(law)
    c = harris_constant(law, nu)
    implied_alpha = p * args.n0 * c * math.exp(nu * args.t_end)
    rho = nu / args.mu
    mutants = np.zeros(args.replicates, dtype=np.int64)
    mutation_events = np.zeros(args.replicates, dtype=np.int64)
    pop_averages = []
    for rep in range(args.replicates):
        try:
            res = simulate_gm0_detail(
                model,
                _rng(args.seed, rep),
                max_divisions=args.max_divisions,
                population_window=args.population_window,
            )
        except BudgetError as exc:
            print(f"replicate {rep}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        mutants[rep] = min(res.mutants, 2**62)
        mutation_events[rep] = res.mutation_events
        if res.population_average is not None:
            pop_averages.append(res.population_average)

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write("\n".join(str(int(x)) for x in mutants) + "\n")
    summary = {
        "law": args.law,
        "nu": _sig12(nu),
        "harris_constant": _sig12(c),
        "p": _sig12(p),
        "alpha": _sig12(implied_alpha),
        "rho": _sig12(rho),
        "replicates": args.replicates,
        "mean_mutants": _sig12(float(np.mean(mutants))),
        "mean_mutation_events": _sig12(float(np.mean(mutation_events))),
        "zero_fraction": _sig12(float(np.mean(mutants == 0))),
    }
    if pop_averages:
        summary["population_average"] = _sig12(float(np.mean(pop_averages)))
    if args.tv_check:
        summary["tv_distance"] = _sig12(
            _tv_distance(mutants, LDParams(implied_alpha, rho))
        )
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldstats",
        description="Mutant-count statistics: fitting, sampling, histograms, "
                    "Monte Carlo error tables and branching-process simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="estimate (alpha, rho) from a count file")
    fit.add_argument("input", help="count file, '-' for stdin")
    fit.add_argument("--method", choices=_METHOD_CHOICES, default="gf")
    fit.add_argument("--z1", type=float, default=0.1)
    fit.add_argument("--z2", type=float, default=0.9)
    fit.add_argument("--z3", type=float, default=0.8)
    fit.add_argument("--q", type=float, default=0.1)
    fit.add_argument("--winsor-bound", type=int, default=500)
    fit.add_argument("--level", type=float, default=0.95)
    fit.add_argument("--table-budget", type=int, default=DEFAULT_TABLE_BUDGET)
    fit.add_argument("--total-cells", type=float, default=None,
                     help="report alpha and its CI divided by this cell count")
    fit.add_argument("--test-rho1", action="store_true",
                     help="Wald p-value for the null rho = 1")
    fit.add_argument("--format", choices=("json", "csv"), default="json")
    fit.add_argument("--plot", default=None, metavar="FILE",
                     help="render the confidence ellipse to FILE")
    fit.set_defaults(func=cmd_fit)

    smp = sub.add_parser("sample", help="draw a seeded sample")
    smp.add_argument("--alpha", type=float, required=True)
    smp.add_argument("--rho", type=float, required=True)
    smp.add_argument("--size", type=int, required=True)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--output", default=None)
    smp.set_defaults(func=cmd_sample)

    hist = sub.add_parser("hist", help="log10 class counts of a sample")
    hist.add_argument("input")
    hist.add_argument("--linear", action="store_true",
                      help="per-value frequencies instead of log10 classes")
    hist.add_argument("--plot", default=None, metavar="FILE")
    hist.set_defaults(func=cmd_hist)

    mse = sub.add_parser("mse", help="Monte Carlo mean-squared-error table")
    mse.add_argument("--alpha-grid", required=True)
    mse.add_argument("--rho-grid", required=True)
    mse.add_argument("--replicates", type=int, default=1000)
    mse.add_argument("--size", type=int, default=100)
    mse.add_argument("--methods", default="gf")
    mse.add_argument("--seed", type=int, default=0)
    mse.add_argument("--z1", type=float, default=0.1)
    mse.add_argument("--z2", type=float, default=0.9)
    mse.add_argument("--z3", type=float, default=0.8)
    mse.add_argument("--q", type=float, default=0.1)
    mse.add_argument("--winsor-bound", type=int, default=500)
    mse.add_argument("--plot", default=None, metavar="FILE")
    mse.set_defaults(func=cmd_mse)

    sim = sub.add_parser("simulate", help="direct branching-process runs")
    sim.add_argument("--law", choices=("deterministic", "exponential",
                                       "gamma", "lognormal"), required=True)
    sim.add_argument("--gen-time", type=float, default=None,
                     help="deterministic generation time")
    sim.add_argument("--rate", type=float, default=None,
                     help="exponential or gamma rate")
    sim.add_argument("--shape", type=float, default=None, help="gamma shape")
    sim.add_argument("--mu-log", type=float, default=None)
    sim.add_argument("--sigma-log", type=float, default=None)
    sim.add_argument("--mu", type=float, required=True,
                     help="mutant division rate")
    sim.add_argument("--p", type=float, default=None,
                     help="mutation probability per division")
    sim.add_argument("--alpha", type=float, default=None,
                     help="calibrate p so the expected mutation count is alpha")
    sim.add_argument("--n0", type=int, default=100)
    sim.add_argument("--t-end", type=float, required=True)
    sim.add_argument("--replicates", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--max-divisions", type=int, default=DEFAULT_DIVISION_BUDGET)
    sim.add_argument("--population-window", type=float, default=None,
                     help="trailing window for the normalized population average")
    sim.add_argument("--tv-check", action="store_true",
                     help="report total-variation distance to the matched "
                          "mutant-count law")
    sim.add_argument("--output", default=None, help="write per-replicate counts here")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LDStatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
