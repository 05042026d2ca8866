"""Data ingestion, weekly aggregation, and the case-study pipeline.

The case study models weekly mean prices jointly with weekly mean
forecast errors: prices are demeaned, a full coefficient matrix is
fitted by the moment method, residuals are tested for cross-dependence,
and when nothing contradicts the decoupled regime the model is refitted
with a diagonal matrix and independent Student's t residuals.  The
theoretical autocovariance of the shifted product is then compared with
the empirical one inside a Monte Carlo quantile band.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import Family, ResidualSpec
from .errors import (
    InsufficientDataError,
    IOFailure,
    ParseError,
    ValidationError,
)
from .estimators import ConfidenceBand, empirical_acvf, empirical_ccvf, mc_confidence_bounds, sample_correlation
from .inference import (
    DistFit,
    FitReport,
    TestName,
    TestResult,
    chi2_independence,
    corr_t_test,
    extract_residuals,
    fit_gaussian_zero_mean,
    fit_t_locscale,
    ks_test,
    yule_walker_var1,
)
from .numerics import RandomStream
from .product_acvf import AcvfCurve, CaseTag, classify_case, product_series, theoretical_curve
from .var1 import Trajectory, TransitionMatrix, Var1Model
from .distributions import cdf_t

log = logging.getLogger(__name__)

__all__ = [
    "CsvSchema",
    "MarketSeries",
    "CaseStudyConfig",
    "CaseStudyReport",
    "ingest_csv",
    "forecast_error",
    "weekly_means",
    "run_case_study",
    "emit_outputs",
]


class CsvSchema(enum.Enum):
    PRICE_SERIES = "price"
    FORECAST_ACTUAL_PAIR = "forecast_actual"


_SCHEMA_COLUMNS = {
    CsvSchema.PRICE_SERIES: ("timestamp", "price"),
    CsvSchema.FORECAST_ACTUAL_PAIR: ("timestamp", "forecast", "actual"),
}


@dataclass(frozen=True)
class MarketSeries:
    """Timestamped scalar series with strictly increasing UTC timestamps."""

    timestamps: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if ts.shape != vals.shape or ts.ndim != 1:
            raise ValidationError("timestamps and values must be 1-d arrays of equal length")
        if ts.size == 0:
            raise ValidationError("series is empty")
        diffs = np.diff(ts)
        if np.any(diffs <= np.timedelta64(0, "s")):
            bad = ts[1:][diffs <= np.timedelta64(0, "s")][0]
            raise ValidationError(f"timestamps not strictly increasing at {bad}")
        if not np.isfinite(vals).all():
            raise ValidationError("series contains non-finite values")

    def __len__(self) -> int:
        return self.values.size


def _parse_timestamp(text: str) -> dt.datetime:
    """ISO-8601 to a naive UTC datetime; 'Z' and offsets are honored."""
    raw = text.strip().replace("Z", "+00:00")
    try:
        when = dt.datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}") from exc
    if when.tzinfo is not None:
        when = when.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return when


def ingest_csv(path, schema: CsvSchema, strict: bool = False):
    """Parse a CSV export into one or two timestamp-sorted series.

    PRICE_SERIES expects a ``timestamp,price`` header and returns one
    series; FORECAST_ACTUAL_PAIR expects ``timestamp,forecast,actual``
    and returns a (forecast, actual) tuple.  Rows with missing values are
    dropped and counted; malformed rows raise when ``strict`` and are
    dropped (with a warning) otherwise.  Duplicate timestamps always
    raise.
    """
    columns = _SCHEMA_COLUMNS[schema]
    if not os.path.exists(path):
        raise IOFailure(f"no such file: {path}")
    rows: list[tuple[dt.datetime, list[float]]] = []
    dropped_missing = 0
    dropped_malformed = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IOFailure(f"{path}: empty file") from None
        names = [c.strip().lower() for c in header]
        if names[: len(columns)] != list(columns):
            raise ParseError(
                f"{path}: header {names} does not match schema {list(columns)}", line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(columns):
                if strict:
                    raise ParseError(f"{path}: expected {len(columns)} fields, got {len(row)}",
                                     line=lineno)
                dropped_malformed += 1
                continue
            cells = [c.strip() for c in row[: len(columns)]]
            if any(c == "" or c.upper() in ("NA", "NAN", "NULL") for c in cells[1:]):
                dropped_missing += 1
                continue
            try:
                when = _parse_timestamp(cells[0])
                vals = [float(c) for c in cells[1:]]
            except ValueError as exc:
                if strict:
                    raise ParseError(f"{path}: {exc}", line=lineno) from exc
                dropped_malformed += 1
                continue
            if any(math.isnan(v) for v in vals):
                dropped_missing += 1
                continue
            rows.append((when, vals))
    if not rows:
        raise IOFailure(f"{path}: no data rows")
    if dropped_missing or dropped_malformed:
        log.warning("%s: dropped %d rows with missing values, %d malformed rows",
                    path, dropped_missing, dropped_malformed)
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise ParseError(f"{path}: duplicated timestamp {prev[0].isoformat()}")
    stamps = [r[0] for r in rows]
    meta = {"dropped_missing": dropped_missing, "dropped_malformed": dropped_malformed}
    if schema is CsvSchema.PRICE_SERIES:
        return MarketSeries(stamps, [r[1][0] for r in rows], meta)
    forecast = MarketSeries(stamps, [r[1][0] for r in rows], dict(meta))
    actual = MarketSeries(stamps, [r[1][1] for r in rows], dict(meta))
    return forecast, actual


def forecast_error(forecast: MarketSeries, actual: MarketSeries) -> MarketSeries:
    """Pointwise forecast minus actual on the timestamps both series share."""
    common, ia, ib = np.intersect1d(forecast.timestamps, actual.timestamps,
                                    return_indices=True)
    if common.size == 0:
        raise InsufficientDataError("forecast and actual series share no timestamps")
    return MarketSeries(common, forecast.values[ia] - actual.values[ib])


def _iso_week_monday(when: dt.datetime) -> dt.datetime:
    monday = when.date() - dt.timedelta(days=when.weekday())
    return dt.datetime(monday.year, monday.month, monday.day)


def weekly_means(series: MarketSeries) -> MarketSeries:
    """Per ISO-week arithmetic means stamped at each week's Monday 00:00 UTC.

    Head and tail weeks that do not cover all seven calendar days are
    kept; ``meta["week_complete"]`` flags which weeks do.
    """
    stamps = series.timestamps.astype("datetime64[s]").tolist()
    sums: dict[dt.datetime, float] = {}
    counts: dict[dt.datetime, int] = {}
    days: dict[dt.datetime, set] = {}
    for when, value in zip(stamps, series.values):
        monday = _iso_week_monday(when)
        sums[monday] = sums.get(monday, 0.0) + float(value)
        counts[monday] = counts.get(monday, 0) + 1
        days.setdefault(monday, set()).add(when.date())
    mondays = sorted(sums)
    means = [sums[m] / counts[m] for m in mondays]
    complete = [len(days[m]) == 7 for m in mondays]
    return MarketSeries(mondays, means, {"week_complete": complete})


@dataclass(frozen=True)
class CaseStudyConfig:
    """Tunable settings of the case-study pipeline."""

    significance: float = 0.05
    hmax: int = 20
    reps: int = 1000
    level_low: float = 0.05
    level_high: float = 0.95
    seed: int = 0
    burnin: int = 1000
    bins: int = 4
    min_weeks: int = 30
    # lower bound on fitted t degrees of freedom: the product
    # autocovariance needs finite residual variances, so the marginal
    # fits are kept inside eta > 2 with a small margin
    min_eta: float = 2.1


@dataclass(frozen=True)
class CaseStudyReport:
    """Everything the case study produces, ready for serialization."""

    mu_x: float
    fit: FitReport
    case_tag: CaseTag
    case1_refit: tuple[float, float] | None
    theoretical_acvf: AcvfCurve
    empirical_acvf: AcvfCurve
    band: ConfidenceBand
    coverage_fraction: float
    seed: int
    traj: Trajectory
    residuals: Trajectory

    def to_json_dict(self) -> dict:
        phi = self.fit.phi_hat
        return {
            "mu_x": float(self.mu_x),
            "phi_hat": [[phi.phi11, phi.phi12], [phi.phi21, phi.phi22]],
            "residual_cov": np.asarray(self.fit.residual_cov).tolist(),
            "rho_z_hat": float(self.fit.rho_z_hat),
            "dist_fits": [
                {"family": d.family, "mu": d.mu, "lambda": d.lam, "eta": d.eta,
                 "loglik": d.loglik, "ks_p": d.ks_p}
                for d in self.fit.dist_fits
            ],
            "tests": [
                {"name": t.name.value, "statistic": t.statistic, "p_value": t.p_value,
                 "details": {k: (v if not isinstance(v, float) or math.isfinite(v) else None)
                             for k, v in t.details.items()}}
                for t in self.fit.test_results
            ],
            "case_tag": self.case_tag.value,
            "case1_refit": (
                None if self.case1_refit is None
                else {"phi11": self.case1_refit[0], "phi22": self.case1_refit[1]}
            ),
            "acvf": {
                "h": self.theoretical_acvf.lags.tolist(),
                "empirical": self.empirical_acvf.values.tolist(),
                "theoretical": self.theoretical_acvf.values.tolist(),
                "lower": self.band.lower.tolist(),
                "upper": self.band.upper.tolist(),
            },
            "coverage_fraction": float(self.coverage_fraction),
            "seed": int(self.seed),
        }


def _phi_entry_pvalues(phi_hat: TransitionMatrix, resid_cov: np.ndarray,
                       g0: np.ndarray, n: int) -> np.ndarray:
    """Two-sided asymptotic p-values for each coefficient being zero.

    The large-sample covariance of the coefficient rows is
    resid_cov[i, i] * G(0)^{-1} / n.
    """
    g0_inv = np.linalg.inv(g0)
    phi = phi_hat.as_array()
    pvals = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            se = math.sqrt(resid_cov[i, i] * g0_inv[j, j] / n)
            t = phi[i, j] / se if se > 0 else math.inf
            pvals[i, j] = math.erfc(abs(t) / math.sqrt(2.0))
    return pvals


def _scalar_yule_walker(x: np.ndarray) -> float:
    """Lag-1 autocorrelation of one demeaned component."""
    curve = empirical_acvf(x, 1)
    if curve.values[0] == 0.0:
        raise ValidationError("component has zero variance")
    return float(curve.values[1] / curve.values[0])


def run_case_study(prices: MarketSeries, errors: MarketSeries,
                   config: CaseStudyConfig = CaseStudyConfig()) -> CaseStudyReport:
    """Fit, test, select, and band the weekly price/error product.

    Steps: demean prices, fit the full coefficient matrix, test the
    off-diagonal entries and the residual cross-dependence at the
    configured level, refit the decoupled model with independent
    Student's t residuals when nothing rejects, then compute the
    theoretical shifted-product autocovariance, its empirical
    counterpart, and a Monte Carlo quantile band from the fitted model.
    """
    common, ip, ie = np.intersect1d(prices.timestamps, errors.timestamps,
                                    return_indices=True)
    if common.size < config.min_weeks:
        raise InsufficientDataError(
            f"need at least {config.min_weeks} aligned weeks, got {common.size}"
        )
    price_vals = prices.values[ip]
    error_vals = errors.values[ie]
    mu_x = float(price_vals.mean())
    traj = Trajectory(x1=price_vals - mu_x, x2=error_vals)
    n = len(traj)

    phi_hat, resid_cov = yule_walker_var1(traj)
    residuals = extract_residuals(phi_hat, traj)
    rho_z = sample_correlation(residuals.x1, residuals.x2)
    corr_test = corr_t_test(residuals.x1, residuals.x2)
    chi2_test = chi2_independence(residuals.x1, residuals.x2, config.bins)

    xc = traj.as_array() - traj.as_array().mean(axis=0)
    g0 = xc.T @ xc / n
    off_diag_p = _phi_entry_pvalues(phi_hat, resid_cov, g0, n)[(0, 1), (1, 0)]

    tests: list[TestResult] = [corr_test, chi2_test]
    dist_fits: list[DistFit] = []

    alpha = config.significance
    decoupled = (
        bool((off_diag_p > alpha).all())
        and corr_test.p_value > alpha
        and chi2_test.p_value > alpha
    )

    if decoupled:
        phi11 = _scalar_yule_walker(traj.x1)
        phi22 = _scalar_yule_walker(traj.x2)
        model_phi = TransitionMatrix.diagonal(phi11, phi22)
        final_residuals = extract_residuals(model_phi, traj)
        case1_refit = (phi11, phi22)
    else:
        model_phi = phi_hat
        final_residuals = residuals
        case1_refit = None

    # per-component marginal fits and goodness-of-fit, on the final residuals
    t_fits = []
    for idx, z in enumerate((final_residuals.x1, final_residuals.x2), start=1):
        gfit = fit_gaussian_zero_mean(z)
        ks_gauss = ks_test(z, lambda v, s=gfit.sigma: 0.5 * math.erfc(-v / (s * math.sqrt(2.0))))
        tests.append(TestResult(TestName.KS_GOODNESS, ks_gauss.statistic, ks_gauss.p_value,
                                {**ks_gauss.details, "component": idx, "family": "gaussian",
                                 "sigma": gfit.sigma}))
        tfit = fit_t_locscale(z, fix_mu_at_zero=True, min_eta=config.min_eta)
        ks_t = ks_test(z, lambda v, f=tfit: cdf_t((v - f.mu) / f.lam, f.eta))
        tests.append(TestResult(TestName.KS_GOODNESS, ks_t.statistic, ks_t.p_value,
                                {**ks_t.details, "component": idx, "family": "t_locscale",
                                 "lambda": tfit.lam, "eta": tfit.eta}))
        t_fits.append(tfit)
        dist_fits.append(DistFit("t_locscale", tfit.mu, tfit.lam, tfit.eta,
                                 tfit.loglik, ks_t.p_value))

    if decoupled:
        spec = ResidualSpec.independent_t(
            eta1=t_fits[0].eta, eta2=t_fits[1].eta,
            lambda1=t_fits[0].lam, lambda2=t_fits[1].lam,
        )
        model = Var1Model(model_phi, spec, mean_shift=mu_x)
    else:
        # dependence confirmed: keep the full matrix and a correlated
        # Gaussian residual pair matching the sample covariance
        spec = ResidualSpec.gaussian(
            sigma1=math.sqrt(resid_cov[0, 0]), sigma2=math.sqrt(resid_cov[1, 1]),
            rho=max(-0.999, min(0.999, rho_z)),
        )
        model = Var1Model(model_phi, spec, mean_shift=mu_x)

    case_tag = classify_case(model)
    theo = theoretical_curve(model, config.hmax)
    emp = empirical_acvf(product_series(traj, mu_x), config.hmax)
    band = mc_confidence_bounds(
        model, n=n, reps=config.reps, hmax=config.hmax,
        level_low=config.level_low, level_high=config.level_high,
        rng=RandomStream(config.seed), burnin=config.burnin,
    )
    coverage = float(band.covers(emp.values).mean())

    fit = FitReport(
        phi_hat=phi_hat,
        residual_cov=resid_cov,
        rho_z_hat=rho_z,
        dist_fits=tuple(dist_fits),
        test_results=tuple(tests),
    )
    return CaseStudyReport(
        mu_x=mu_x,
        fit=fit,
        case_tag=case_tag,
        case1_refit=case1_refit,
        theoretical_acvf=theo,
        empirical_acvf=emp,
        band=band,
        coverage_fraction=coverage,
        seed=config.seed,
        traj=traj,
        residuals=final_residuals,
    )


def emit_outputs(report: CaseStudyReport, out_dir) -> list[str]:
    """Write report.json and the plot-ready CSVs; return the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    payload = report.to_json_dict()
    payload["generated_at"] = dt.datetime.now(dt.timezone.utc).isoformat()
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)

    path = os.path.join(out_dir, "acvf_product.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "empirical", "theoretical", "lower", "upper"])
        for i, h in enumerate(report.theoretical_acvf.lags):
            writer.writerow([
                int(h),
                repr(float(report.empirical_acvf.values[i])),
                repr(float(report.theoretical_acvf.values[i])),
                repr(float(report.band.lower[i])),
                repr(float(report.band.upper[i])),
            ])
    written.append(path)

    path = os.path.join(out_dir, "residual_acvf.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "acvf_z1", "acvf_z2", "ccvf_z1z2"])
        if len(report.theoretical_acvf) > 0 and len(report.residuals) > 1:
            hmax_resid = int(min(report.theoretical_acvf.lags.max(),
                                 len(report.residuals) - 1))
            z1, z2 = report.residuals.x1, report.residuals.x2
            acvf_z1 = empirical_acvf(z1, hmax_resid)
            acvf_z2 = empirical_acvf(z2, hmax_resid)
            ccvf_z = empirical_ccvf(z1, z2, hmax_resid)
            for i in range(hmax_resid + 1):
                writer.writerow([i, repr(float(acvf_z1.values[i])),
                                 repr(float(acvf_z2.values[i])),
                                 repr(float(ccvf_z.values[i]))])
    written.append(path)

    path = os.path.join(out_dir, "trajectory.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x1", "x2"])
        for t in range(len(report.traj)):
            writer.writerow([t + 1, repr(float(report.traj.x1[t])),
                             repr(float(report.traj.x2[t]))])
    written.append(path)
    return written
