"""Catalog-level spectral statistics and direct parameter extraction.

Quantiles use the median-unbiased order-statistic estimator
(numpy method "median_unbiased"), pinned so figures reproduce bit-for-bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRecord, TooFewRecords, ZeroVarianceColumn

G_ACCEL = 9.80665


@dataclass(frozen=True)
class SpectraMatrix:
    """log Sa values, one row per record, one column per period."""

    log_sa: np.ndarray  # (n_records, n_periods)
    periods: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        log_sa = np.asarray(self.log_sa, dtype=float)
        periods = np.asarray(self.periods, dtype=float)
        if log_sa.ndim != 2 or log_sa.shape[1] != periods.size:
            raise ValueError("log_sa must be (n_records, n_periods)")
        if not np.all(np.isfinite(log_sa)):
            raise ValueError("log_sa contains non-finite entries")
        object.__setattr__(self, "log_sa", log_sa)
        object.__setattr__(self, "periods", periods)

    @property
    def n_records(self):
        return self.log_sa.shape[0]


def spectral_quantiles(sm, q):
    """Per-period empirical quantile of log Sa."""
    if sm.n_records < 2:
        raise TooFewRecords("need at least 2 records for quantiles")
    if not 0 < q < 1:
        raise ValueError("q must be in (0, 1)")
    return np.quantile(sm.log_sa, q, axis=0, method="median_unbiased")


def spectral_std(sm):
    """Per-period sample standard deviation of log Sa."""
    if sm.n_records < 2:
        raise TooFewRecords("need at least 2 records for a dispersion statistic")
    return sm.log_sa.std(axis=0, ddof=1)


def spectral_correlation(sm):
    """Pearson correlation of log Sa between every pair of periods."""
    if sm.n_records < 3:
        raise TooFewRecords("need at least 3 records for correlations")
    var = sm.log_sa.var(axis=0)
    if np.any(var <= 0):
        bad = sm.periods[np.nonzero(var <= 0)[0]]
        raise ZeroVarianceColumn(f"zero variance at periods {bad.tolist()}")
    rho = np.corrcoef(sm.log_sa, rowvar=False)
    rho = (rho + rho.T) / 2
    np.fill_diagonal(rho, 1.0)
    return rho


def extract_simple_params(record):
    """Arias intensity, effective duration and mid-energy arrival time.

    AI = (pi/2g) int a^2 dt by trapezoid; t5/t45/t95 are the first times the
    normalized cumulative crosses 0.05/0.45/0.95 (linear interpolation
    between cumulative samples).
    """
    rec = record.to_si()
    a2 = rec.accel ** 2
    cum = np.concatenate([[0.0], np.cumsum((a2[1:] + a2[:-1]) / 2 * rec.dt)])
    total = cum[-1]
    if total <= 0:
        raise DegenerateRecord(f"record {rec.id} has zero Arias intensity")
    ai = math.pi / (2 * G_ACCEL) * total
    t = np.arange(cum.size) * rec.dt
    t5, t45, t95 = np.interp([0.05, 0.45, 0.95], cum / total, t)
    return {"log_ai": math.log(ai), "d595": t95 - t5, "t_mid": t45}
