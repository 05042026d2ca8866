"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 numeric or convergence
error, 4 I/O error.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import sys

import click
import numpy as np

from .distributions import ResidualSpec, cdf_t
from .errors import IOFailure, NumericError, ValidationError, VarprodError
from .estimators import empirical_acvf, mc_confidence_bounds, sample_correlation
from .inference import (
    chi2_independence,
    corr_t_test,
    fit_gaussian_zero_mean,
    fit_t_locscale,
    ks_test,
    yule_walker_var1,
)
from .numerics import RandomStream
from .pipeline import (
    CaseStudyConfig,
    CsvSchema,
    emit_outputs,
    forecast_error,
    ingest_csv,
    run_case_study,
    weekly_means,
)
from .product_acvf import product_series, theoretical_curve
from .var1 import Trajectory, TransitionMatrix, Var1Model, simulate


def guarded(f):
    """Map package exceptions to the documented exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except NumericError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except IOFailure as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)
        except VarprodError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _model_options(f):
    opts = [
        click.option("--case", "case", type=click.Choice(["1", "2", "3", "general"]),
                     default="general", show_default=True,
                     help="Dependence regime; cases 1-3 validate the coefficient pattern."),
        click.option("--dist", "dist", type=click.Choice(["gaussian", "t", "t-indep"]),
                     default="gaussian", show_default=True),
        click.option("--phi11", type=float, default=0.0, show_default=True),
        click.option("--phi12", type=float, default=0.0, show_default=True),
        click.option("--phi21", type=float, default=0.0, show_default=True),
        click.option("--phi22", type=float, default=0.0, show_default=True),
        click.option("--sigma1", type=float, default=None,
                     help="Marginal standard deviation of component 1 "
                          "[default: 1 for gaussian, sqrt(eta/(eta-2)) for t]."),
        click.option("--sigma2", type=float, default=None,
                     help="Marginal standard deviation of component 2."),
        click.option("--rho", type=float, default=0.0, show_default=True,
                     help="Residual correlation (gaussian and bivariate t)."),
        click.option("--eta", type=float, default=5.0, show_default=True,
                     help="Degrees of freedom for the t families."),
        click.option("--eta2", "eta2_", type=float, default=None,
                     help="Second-component degrees of freedom (t-indep) [default: --eta]."),
        click.option("--mean-shift", type=float, default=0.0, show_default=True,
                     help="Constant added to component 1 in the product."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _t_scale(sigma: float | None, eta: float) -> float:
    """Scale parameter giving the requested marginal standard deviation."""
    if sigma is None:
        return 1.0
    if eta <= 2.0:
        raise ValidationError(
            f"cannot target a standard deviation with eta = {eta} <= 2 (infinite variance)"
        )
    return sigma / math.sqrt(eta / (eta - 2.0))


def build_model(case, dist, phi11, phi12, phi21, phi22, sigma1, sigma2,
                rho, eta, eta2_, mean_shift) -> Var1Model:
    """Assemble a model from CLI flags, enforcing the chosen regime."""
    if case in ("1", "2") and (phi12 != 0.0 or phi21 != 0.0):
        raise ValidationError(f"case {case} requires phi12 = phi21 = 0")
    if case == "3":
        if phi21 != 0.0:
            raise ValidationError("case 3 requires phi21 = 0")
        if phi12 == 0.0:
            raise ValidationError("case 3 requires phi12 != 0")
    if case in ("1", "3"):
        if dist == "t":
            raise ValidationError(
                f"case {case} needs independent residual components; "
                "the bivariate t is dependent even at rho = 0 (use --dist t-indep)"
            )
        if rho != 0.0:
            raise ValidationError(f"case {case} requires rho = 0")
    if case == "2" and dist == "gaussian" and rho == 0.0:
        raise ValidationError("case 2 with a gaussian residual requires rho != 0")

    if dist == "gaussian":
        spec = ResidualSpec.gaussian(
            sigma1 if sigma1 is not None else 1.0,
            sigma2 if sigma2 is not None else 1.0,
            rho,
        )
    elif dist == "t":
        spec = ResidualSpec.bivariate_t(
            eta=eta, rho=rho,
            lambda1=_t_scale(sigma1, eta), lambda2=_t_scale(sigma2, eta),
        )
    else:
        e2 = eta2_ if eta2_ is not None else eta
        if rho != 0.0:
            raise ValidationError("t-indep residuals have no correlation parameter")
        spec = ResidualSpec.independent_t(
            eta1=eta, eta2=e2,
            lambda1=_t_scale(sigma1, eta), lambda2=_t_scale(sigma2, e2),
        )
    return Var1Model(TransitionMatrix(phi11, phi12, phi21, phi22), spec, mean_shift)


def _read_columns(path, wanted: list[str] | None = None) -> dict[str, np.ndarray]:
    """Read a numeric CSV into named columns."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [c.strip() for c in next(reader)]
            except StopIteration:
                raise IOFailure(f"{path}: empty file") from None
            rows = [row for row in reader if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise IOFailure(f"{path}: no data rows")
    cols: dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[i]) for r in rows])
        except (ValueError, IndexError):
            continue  # non-numeric column (timestamps etc.)
    if wanted:
        missing = [w for w in wanted if w not in cols]
        if missing:
            raise ValidationError(f"{path}: missing numeric columns {missing}; found {list(cols)}")
    if not cols:
        raise ValidationError(f"{path}: no numeric columns found")
    return cols


def _pick_series(path, column: str | None) -> np.ndarray:
    cols = _read_columns(path)
    if column is not None:
        if column not in cols:
            raise ValidationError(f"{path}: no column {column!r}; found {list(cols)}")
        return cols[column]
    name = list(cols)[-1]
    return cols[name]


def _write_rows(out, header: list[str], rows) -> None:
    if out is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@click.group()
@click.version_option()
def cli():
    """Product of bi-dimensional VAR(1) components: simulate, analyze, fit."""


@cli.command("simulate")
@_model_options
@click.option("--n", type=int, required=True, help="Trajectory length to keep.")
@click.option("--burnin", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output CSV (t,x1,x2) [default: stdout].")
@guarded
def simulate_cmd(n, burnin, seed, out, **model_flags):
    """Simulate one trajectory of the two components."""
    model = build_model(**model_flags)
    traj = simulate(model, n, burnin, RandomStream(seed))
    rows = [(t + 1, repr(float(traj.x1[t])), repr(float(traj.x2[t]))) for t in range(n)]
    _write_rows(out, ["t", "x1", "x2"], rows)


@cli.command("acvf")
@_model_options
@click.option("--mode", type=click.Choice(["closed", "numeric", "auto"]),
              default="auto", show_default=True)
@click.option("--hmax", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@guarded
def acvf_cmd(mode, hmax, out, **model_flags):
    """Theoretical product autocovariance at lags 0..hmax."""
    model = build_model(**model_flags)
    curve = theoretical_curve(model, hmax, mode=mode)
    rows = [(int(h), repr(float(v))) for h, v in zip(curve.lags, curve.values)]
    _write_rows(out, ["h", "acvf"], rows)


@cli.command("mc-bounds")
@_model_options
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--hmax", type=int, default=10, show_default=True)
@click.option("--levels", default="0.05,0.95", show_default=True,
              help="Comma-separated lower,upper quantile levels.")
@click.option("--burnin", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@guarded
def mc_bounds_cmd(reps, n, hmax, levels, burnin, seed, out, **model_flags):
    """Monte Carlo quantile band of the product empirical autocovariance."""
    try:
        low, high = (float(v) for v in levels.split(","))
    except ValueError:
        raise ValidationError(f"--levels expects two comma-separated numbers, got {levels!r}")
    model = build_model(**model_flags)
    band = mc_confidence_bounds(model, n=n, reps=reps, hmax=hmax,
                                level_low=low, level_high=high,
                                rng=RandomStream(seed), burnin=burnin)
    rows = [(int(h), repr(float(lo)), repr(float(up)))
            for h, lo, up in zip(band.lags, band.lower, band.upper)]
    _write_rows(out, ["h", "lower", "upper"], rows)


@cli.command("empirical-acvf")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--hmax", type=int, default=10, show_default=True)
@click.option("--column", default=None, help="Column to analyze [default: last numeric].")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@guarded
def empirical_acvf_cmd(file, hmax, column, out):
    """Empirical autocovariance of one series from a CSV file."""
    series = _pick_series(file, column)
    curve = empirical_acvf(series, hmax)
    rows = [(int(h), repr(float(v))) for h, v in zip(curve.lags, curve.values)]
    _write_rows(out, ["h", "acvf"], rows)


@cli.command("fit-var")
@click.argument("file", type=click.Path(dir_okay=False))
@guarded
def fit_var_cmd(file):
    """Fit the coefficient matrix of a two-component trajectory (columns x1,x2)."""
    cols = _read_columns(file, wanted=["x1", "x2"])
    traj = Trajectory(x1=cols["x1"], x2=cols["x2"])
    phi_hat, resid_cov = yule_walker_var1(traj)
    _echo_json({
        "phi_hat": [[phi_hat.phi11, phi_hat.phi12], [phi_hat.phi21, phi_hat.phi22]],
        "residual_cov": resid_cov.tolist(),
    })


@cli.command("fit-dist")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--family", type=click.Choice(["gaussian", "t-locscale"]), required=True)
@click.option("--fix-mu/--free-mu", default=True, show_default=True,
              help="Pin the location at zero (t-locscale only).")
@click.option("--column", default=None)
@guarded
def fit_dist_cmd(file, family, fix_mu, column):
    """Fit a marginal distribution to one series."""
    series = _pick_series(file, column)
    if family == "gaussian":
        fit = fit_gaussian_zero_mean(series)
        _echo_json({"family": "gaussian", "mu": 0.0, "sigma": fit.sigma,
                    "loglik": fit.loglik})
    else:
        fit = fit_t_locscale(series, fix_mu_at_zero=fix_mu)
        _echo_json({"family": "t_locscale", "mu": fit.mu, "lambda": fit.lam,
                    "eta": fit.eta, "loglik": fit.loglik,
                    "effectively_gaussian": fit.effectively_gaussian})


@cli.group("test")
def test_group():
    """Hypothesis tests on series read from CSV files."""


def _two_series(file, col_a, col_b):
    cols = _read_columns(file)
    names = list(cols)
    a_name = col_a or ("x1" if "x1" in cols else names[0])
    b_name = col_b or ("x2" if "x2" in cols else names[-1])
    for name in (a_name, b_name):
        if name not in cols:
            raise ValidationError(f"{file}: no column {name!r}; found {names}")
    if a_name == b_name:
        raise ValidationError("the two columns must differ")
    return cols[a_name], cols[b_name]


@test_group.command("corr-t")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--col-a", default=None)
@click.option("--col-b", default=None)
@guarded
def test_corr_t(file, col_a, col_b):
    """Zero-correlation t test between two columns."""
    a, b = _two_series(file, col_a, col_b)
    res = corr_t_test(a, b)
    _echo_json({"name": res.name.value, "statistic": res.statistic,
                "p_value": res.p_value, **res.details})


@test_group.command("chi2")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--col-a", default=None)
@click.option("--col-b", default=None)
@click.option("--bins", type=int, default=4, show_default=True)
@guarded
def test_chi2(file, col_a, col_b, bins):
    """Chi-square independence test between two columns."""
    a, b = _two_series(file, col_a, col_b)
    res = chi2_independence(a, b, bins)
    _echo_json({"name": res.name.value, "statistic": res.statistic,
                "p_value": res.p_value, **res.details})


@test_group.command("ks")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--family", type=click.Choice(["gaussian", "t-locscale"]), required=True)
@click.option("--sigma", type=float, default=1.0, show_default=True,
              help="Gaussian standard deviation.")
@click.option("--mu", type=float, default=0.0, show_default=True)
@click.option("--lam", "--lambda", "lam", type=float, default=1.0, show_default=True)
@click.option("--eta", type=float, default=5.0, show_default=True)
@click.option("--column", default=None)
@guarded
def test_ks(file, family, sigma, mu, lam, eta, column):
    """Kolmogorov-Smirnov goodness-of-fit test of one column."""
    series = _pick_series(file, column)
    if family == "gaussian":
        cdf = lambda v: 0.5 * math.erfc(-(v - mu) / (sigma * math.sqrt(2.0)))
    else:
        cdf = lambda v: cdf_t((v - mu) / lam, eta)
    res = ks_test(series, cdf)
    _echo_json({"name": res.name.value, "statistic": res.statistic,
                "p_value": res.p_value, **res.details})


@cli.command("case-study")
@click.option("--prices", "prices_file", type=click.Path(dir_okay=False), required=True,
              help="CSV timestamp,price.")
@click.option("--load", "load_file", type=click.Path(dir_okay=False), required=True,
              help="CSV timestamp,forecast,actual.")
@click.option("--weekly/--raw", default=False, show_default=True,
              help="Inputs are already weekly means (skip aggregation).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--hmax", type=int, default=20, show_default=True)
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--significance", type=float, default=0.05, show_default=True)
@click.option("--bins", type=int, default=4, show_default=True)
@click.option("--levels", default="0.05,0.95", show_default=True)
@guarded
def case_study_cmd(prices_file, load_file, weekly, seed, out_dir, hmax, reps,
                   significance, bins, levels):
    """Run the full price/forecast-error analysis and write its outputs."""
    try:
        low, high = (float(v) for v in levels.split(","))
    except ValueError:
        raise ValidationError(f"--levels expects two comma-separated numbers, got {levels!r}")
    prices = ingest_csv(prices_file, CsvSchema.PRICE_SERIES)
    fc, actual = ingest_csv(load_file, CsvSchema.FORECAST_ACTUAL_PAIR)
    errors = forecast_error(fc, actual)
    if not weekly:
        prices = weekly_means(prices)
        errors = weekly_means(errors)
    config = CaseStudyConfig(significance=significance, hmax=hmax, reps=reps,
                             level_low=low, level_high=high, seed=seed, bins=bins)
    report = run_case_study(prices, errors, config)
    written = emit_outputs(report, out_dir)
    click.echo(f"case: {report.case_tag.value}  "
               f"coverage: {report.coverage_fraction:.3f}  mu_x: {report.mu_x:.4f}")
    for path in written:
        click.echo(path)


main = cli

if __name__ == "__main__":
    main()
