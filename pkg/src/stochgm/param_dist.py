"""Marginal fits and Gaussian-copula sampling of the seven model parameters.

Default family assignment (overridable per column): corner frequency ->
exponential; log AI -> normal; D5-95, t_mid and the filter bandwidth ->
beta on data-driven bounds; filter frequency -> gamma; frequency rate ->
normal. Bounded supports are widened by 5% of the data range on each side
before fitting.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateSample, ExcessiveRejection, OutOfSupport

log = logging.getLogger(__name__)

DEFAULT_FAMILIES = ("normal", "beta", "beta", "gamma", "normal", "beta", "exponential")
BOUND_MARGIN = 0.05  # fraction of the data range added on each side


@dataclass(frozen=True)
class MarginalModel:
    """One fitted marginal: family tag, scipy shape parameters, support."""

    family: str
    params: tuple
    support: tuple

    def _dist(self):
        lo, hi = self.support
        if self.family == "normal":
            return stats.norm(*self.params)
        if self.family == "lognormal":
            return stats.lognorm(self.params[0], scale=np.exp(self.params[1]))
        if self.family == "exponential":
            return stats.expon(scale=1.0 / self.params[0])
        if self.family == "gamma":
            return stats.gamma(self.params[0], scale=self.params[1])
        if self.family == "beta":
            return stats.beta(self.params[0], self.params[1], loc=lo, scale=hi - lo)
        raise ValueError(f"unknown family {self.family!r}")

    def cdf(self, x):
        return self._dist().cdf(x)

    def ppf(self, u):
        return self._dist().ppf(u)

    def mean(self):
        return float(self._dist().mean())


@dataclass(frozen=True)
class JointParamModel:
    """Seven marginals coupled by a Gaussian copula."""

    marginals: tuple
    correlation: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        corr = np.asarray(self.correlation, dtype=float)
        p = len(self.marginals)
        if corr.shape != (p, p):
            raise ValueError("correlation must be square, one row per marginal")
        if not np.allclose(corr, corr.T) or not np.allclose(np.diag(corr), 1.0):
            raise ValueError("correlation must be symmetric with unit diagonal")
        if np.linalg.eigvalsh(corr).min() < -1e-10:
            raise ValueError("correlation must be positive semidefinite")
        object.__setattr__(self, "correlation", corr)


def fit_marginal(samples, family):
    """Maximum-likelihood fit of one family; bounded families get support
    bounds from the data range plus the documented margin."""
    x = np.asarray(samples, dtype=float)
    if x.size < 5:
        raise DegenerateSample("need at least 5 samples")
    if np.ptp(x) == 0:
        raise DegenerateSample("sample has zero variance")

    if family == "normal":
        return MarginalModel("normal", (float(x.mean()), float(x.std())),
                             (-np.inf, np.inf))
    if family == "lognormal":
        if np.any(x <= 0):
            raise OutOfSupport("lognormal requires positive samples")
        lx = np.log(x)
        return MarginalModel("lognormal", (float(lx.std()), float(lx.mean())),
                             (0.0, np.inf))
    if family == "exponential":
        if np.any(x < 0):
            raise OutOfSupport("exponential requires nonnegative samples")
        return MarginalModel("exponential", (float(1.0 / x.mean()),), (0.0, np.inf))
    if family == "gamma":
        if np.any(x <= 0):
            raise OutOfSupport("gamma requires positive samples")
        a, _, scale = stats.gamma.fit(x, floc=0.0)
        return MarginalModel("gamma", (float(a), float(scale)), (0.0, np.inf))
    if family == "beta":
        margin = BOUND_MARGIN * np.ptp(x)
        lo, hi = float(x.min() - margin), float(x.max() + margin)
        a, b, _, _ = stats.beta.fit(x, floc=lo, fscale=hi - lo)
        return MarginalModel("beta", (float(a), float(b)), (lo, hi))
    raise ValueError(f"unknown family {family!r}")


def fit_copula(theta_matrix, marginals):
    """Pearson correlation of the Gaussian scores z = Phi^-1(F(x)).

    Projected to the nearest positive semidefinite matrix (eigenvalue
    clipping plus rescaling to unit diagonal) if sampling noise pushes the
    minimum eigenvalue below zero.
    """
    theta = np.asarray(theta_matrix, dtype=float)
    if theta.ndim != 2 or theta.shape[1] != len(marginals):
        raise ValueError("theta_matrix must have one column per marginal")
    u = np.column_stack([m.cdf(theta[:, j]) for j, m in enumerate(marginals)])
    u = np.clip(u, 1e-12, 1 - 1e-12)
    z = stats.norm.ppf(u)
    corr = np.corrcoef(z, rowvar=False)
    corr = (corr + corr.T) / 2
    np.fill_diagonal(corr, 1.0)
    if np.linalg.eigvalsh(corr).min() < 0:
        log.warning("copula correlation not PSD; projecting")
        vals, vecs = np.linalg.eigh(corr)
        corr = vecs @ np.diag(np.clip(vals, 1e-12, None)) @ vecs.T
        d = np.sqrt(np.diag(corr))
        corr = corr / np.outer(d, d)
        np.fill_diagonal(corr, 1.0)
    return corr


def sample_params(model, n, seed, row_valid=None, max_tries=100):
    """Draw n correlated parameter rows through the Gaussian copula.

    Rows failing the optional validity predicate are rejected and redrawn;
    more than 50% rejection overall raises ExcessiveRejection.
    """
    p = len(model.marginals)
    try:
        chol = np.linalg.cholesky(model.correlation)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(model.correlation)
        chol = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    rows = []
    drawn = kept = 0
    while len(rows) < n and max_tries > 0:
        want = n - len(rows)
        z = gen.standard_normal((want, p)) @ chol.T
        u = np.clip(stats.norm.cdf(z), 1e-15, 1 - 1e-15)
        x = np.column_stack([m.ppf(u[:, j]) for j, m in enumerate(model.marginals)])
        valid = np.ones(want, dtype=bool)
        if row_valid is not None:
            valid = np.array([bool(row_valid(row)) for row in x])
        drawn += want
        kept += int(valid.sum())
        rows.extend(x[valid])
        max_tries -= 1
        if drawn >= 2 * n and kept < drawn / 2:
            raise ExcessiveRejection(
                f"rejected {drawn - kept}/{drawn} candidate parameter rows")
    if len(rows) < n:
        raise ExcessiveRejection("could not draw enough valid parameter rows")
    out = np.asarray(rows[:n])
    n_rejected = drawn - kept
    if n_rejected:
        log.info("sample_params: %d of %d draws rejected", n_rejected, drawn)
    return out


def save_joint_model(model, path):
    """Write the joint model as line-oriented text (see README)."""
    with open(path, "w") as fh:
        for j, m in enumerate(model.marginals):
            label = model.labels[j] if model.labels else f"col{j}"
            params = " ".join(f"{v:.12g}" for v in m.params)
            lo, hi = m.support
            fh.write(f"marginal {label} {m.family} params {params} "
                     f"support {lo:.12g} {hi:.12g}\n")
        for row in model.correlation:
            fh.write("corr " + " ".join(f"{v:.12g}" for v in row) + "\n")


def load_joint_model(path):
    marginals, labels, corr_rows = [], [], []
    with open(path) as fh:
        for line in fh:
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "marginal":
                labels.append(tok[1])
                family = tok[2]
                ip = tok.index("params")
                isup = tok.index("support")
                params = tuple(float(v) for v in tok[ip + 1:isup])
                support = (float(tok[isup + 1]), float(tok[isup + 2]))
                marginals.append(MarginalModel(family, params, support))
            elif tok[0] == "corr":
                corr_rows.append([float(v) for v in tok[1:]])
    return JointParamModel(marginals=tuple(marginals),
                           correlation=np.asarray(corr_rows),
                           labels=tuple(labels))
