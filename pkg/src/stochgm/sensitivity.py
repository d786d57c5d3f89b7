"""Per-period OLS of log Sa on the seven model parameters, with exact
variance and covariance decompositions.

Every empirical (co)variance here (input covariance, residual variance and
covariances, output variance) uses the population divisor n, so the
variance identity

    Var(Y) = beta' S beta + Var(eps)

and the four-term covariance identity hold algebraically, not just in
expectation. Cross-covariances between inputs and in-sample OLS residuals
vanish by the normal equations; they are carried through the covariance
decomposition anyway so the four reported terms always sum to the empirical
covariance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient

PARAM_LABELS = ("log_ai", "d595", "t_mid", "omega_mid", "omega_rate",
                "zeta_f", "fc_hz")
FC_INDEX = 6


@dataclass(frozen=True)
class DesignMatrix:
    """n_records x 7 input matrix, columns ordered as PARAM_LABELS."""

    theta: np.ndarray
    labels: tuple = PARAM_LABELS

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 2 or theta.shape[1] != len(self.labels):
            raise ValueError(f"theta must be (n, {len(self.labels)})")
        if theta.shape[0] <= theta.shape[1] + 1:
            raise ValueError("need more records than coefficients (incl. intercept)")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta contains non-finite entries")
        if np.linalg.matrix_rank(np.column_stack([np.ones(theta.shape[0]), theta])) \
                < theta.shape[1] + 1:
            raise RankDeficient("design matrix (with intercept) is rank deficient")
        object.__setattr__(self, "theta", theta)

    @property
    def n(self):
        return self.theta.shape[0]

    @property
    def p(self):
        return self.theta.shape[1]


@dataclass(frozen=True)
class RegressionBundle:
    """All per-period fits plus the shared input covariance (divisor n)."""

    periods: np.ndarray          # (nT,)
    beta0: np.ndarray            # (nT,)
    beta: np.ndarray             # (p, nT)
    residuals: np.ndarray        # (n, nT)
    sigma_tt: np.ndarray         # (p, p)
    var_y: np.ndarray            # (nT,)
    var_eps: np.ndarray          # (nT,)
    cov_eps: np.ndarray          # (nT, nT)
    cov_theta_eps: np.ndarray    # (p, nT)
    labels: tuple = PARAM_LABELS

    def period_index(self, period):
        j = int(np.argmin(np.abs(self.periods - period)))
        if abs(self.periods[j] - period) > 1e-9 * max(period, 1.0):
            raise KeyError(f"period {period} not in fitted grid")
        return j


def ols_fit(dm, y):
    """OLS with intercept for one period; returns (beta0, beta, residuals)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (dm.n,):
        raise ValueError("y must have one value per record")
    X = np.column_stack([np.ones(dm.n), dm.theta])
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < dm.p + 1:
        raise RankDeficient("design matrix lost rank during the solve")
    resid = y - X @ coef
    return float(coef[0]), coef[1:], resid


def fit_bundle(dm, log_sa, periods):
    """Independent per-period OLS fits assembled into one bundle."""
    log_sa = np.asarray(log_sa, dtype=float)
    periods = np.asarray(periods, dtype=float)
    if log_sa.shape != (dm.n, periods.size):
        raise ValueError("log_sa must be (n_records, n_periods)")

    n, p, n_t = dm.n, dm.p, periods.size
    beta0 = np.empty(n_t)
    beta = np.empty((p, n_t))
    resid = np.empty((n, n_t))
    for j in range(n_t):
        beta0[j], beta[:, j], resid[:, j] = ols_fit(dm, log_sa[:, j])

    theta_c = dm.theta - dm.theta.mean(axis=0)
    resid_c = resid - resid.mean(axis=0)  # in-sample mean is already ~0
    sigma_tt = theta_c.T @ theta_c / n
    return RegressionBundle(
        periods=periods, beta0=beta0, beta=beta, residuals=resid,
        sigma_tt=sigma_tt,
        var_y=log_sa.var(axis=0),
        var_eps=resid.var(axis=0),
        cov_eps=resid_c.T @ resid_c / n,
        cov_theta_eps=theta_c.T @ resid_c / n,
        labels=dm.labels)


def variance_decompose(bundle, period, sigma_tt=None):
    """Split Var(Y(T)) into the regression and residual parts."""
    j = bundle.period_index(period)
    s = bundle.sigma_tt if sigma_tt is None else sigma_tt
    b = bundle.beta[:, j]
    explained = float(b @ s @ b)
    residual = float(bundle.var_eps[j])
    return {"explained": explained, "residual": residual,
            "r2": explained / float(bundle.var_y[j])}


def covariance_decompose(bundle, t1, t2, sigma_tt=None):
    """Four-term split of Cov(Y(T1), Y(T2)); terms sum to the empirical
    covariance exactly under the shared divisor-n convention."""
    j1, j2 = bundle.period_index(t1), bundle.period_index(t2)
    s = bundle.sigma_tt if sigma_tt is None else sigma_tt
    b1, b2 = bundle.beta[:, j1], bundle.beta[:, j2]
    return {
        "beta_sigma_beta": float(b1 @ s @ b2),
        "beta1_cov_theta_eps2": float(b1 @ bundle.cov_theta_eps[:, j2]),
        "beta2_cov_theta_eps1": float(b2 @ bundle.cov_theta_eps[:, j1]),
        "cov_eps": float(bundle.cov_eps[j1, j2]),
    }


def r2_curve(bundle):
    """Coefficient of determination at every fitted period."""
    explained = np.einsum("pj,pq,qj->j", bundle.beta, bundle.sigma_tt, bundle.beta)
    return explained / bundle.var_y


def weighted_coefficients(bundle):
    """beta_n * sigma_theta_n per parameter and period (p, nT)."""
    sigma = np.sqrt(np.diag(bundle.sigma_tt))
    return bundle.beta * sigma[:, None]


def modified_sigma_tt(bundle, mode):
    """Input covariance with the fc row/column zeroed.

    const_fc zeroes the whole fc row and column including the variance;
    no_cov zeroes only the off-diagonal entries. no_cov can break positive
    semidefiniteness; the matrix is returned as-is (no repair).
    """
    s = bundle.sigma_tt.copy()
    if mode == "const_fc":
        s[FC_INDEX, :] = 0.0
        s[:, FC_INDEX] = 0.0
    elif mode == "no_cov":
        keep = s[FC_INDEX, FC_INDEX]
        s[FC_INDEX, :] = 0.0
        s[:, FC_INDEX] = 0.0
        s[FC_INDEX, FC_INDEX] = keep
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return s


def scenario_neglect_fc(bundle, mode):
    """Recompute the variance and correlation surfaces with the fc entries
    of the input covariance removed; betas and residual terms unchanged."""
    s = modified_sigma_tt(bundle, mode)
    quad = bundle.beta.T @ s @ bundle.beta  # (nT, nT)
    var = np.diag(quad) + bundle.var_eps
    cov = quad + bundle.cov_theta_eps.T @ bundle.beta \
        + (bundle.cov_theta_eps.T @ bundle.beta).T + bundle.cov_eps
    negative = var <= 0
    rho = cov / np.sqrt(np.outer(np.abs(var), np.abs(var)))
    rho = (rho + rho.T) / 2
    np.fill_diagonal(rho, 1.0)
    return {"var": var, "cov": cov, "rho": rho, "sigma_tt": s,
            "negative_variance": negative}


def baseline_surfaces(bundle):
    """Unmodified Var and rho surfaces implied by the fitted bundle."""
    quad = bundle.beta.T @ bundle.sigma_tt @ bundle.beta
    cov = quad + bundle.cov_theta_eps.T @ bundle.beta \
        + (bundle.cov_theta_eps.T @ bundle.beta).T + bundle.cov_eps
    var = np.diag(cov)
    rho = cov / np.sqrt(np.outer(var, var))
    rho = (rho + rho.T) / 2
    np.fill_diagonal(rho, 1.0)
    return {"var": var, "cov": cov, "rho": rho}


def covariance_percentages(bundle, t1, t2):
    """Each Eq-style covariance term as a percentage of the total."""
    terms = covariance_decompose(bundle, t1, t2)
    total = sum(terms.values())
    return {k: 100.0 * v / total for k, v in terms.items()}
