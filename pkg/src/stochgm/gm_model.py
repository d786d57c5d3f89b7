"""Modulated filtered white-noise ground-motion simulation.

Both engines build the same pre-filter process X3:

1. filtered white noise X1, either by time-domain convolution with the
   evolutionary impulse response of a single oscillator, or by spectral
   representation with the oscillator's frequency response frozen at each
   time instant;
2. exact pointwise normalization X2 = X1 / sigma_X1(t);
3. gamma-type envelope X3 = q(t) * X2.

The high-pass stage (critically damped oscillator, corner frequency fc) is
kept separate so an fc search can reuse one X3 batch.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.signal import fftconvolve
from scipy.special import gammainc, gammaincinv, gammaln

from .errors import NoSolution, UnstableDiscretization

G_ACCEL = 9.80665
SIGMA_FLOOR_REL = 1e-6  # below this fraction of max sigma, X2 is set to 0


@dataclass(frozen=True)
class GMParams:
    """Seven model parameters plus total duration.

    log_ai is the natural log of Arias intensity in m/s; omega_mid and
    omega_rate define the linear filter-frequency law
    omega(t) = omega_mid + omega_rate * (t - t_mid); zeta_f is the constant
    filter bandwidth; fc_hz may be None while the corner frequency is still
    being fitted.
    """

    log_ai: float
    d595: float
    t_mid: float
    omega_mid: float
    omega_rate: float
    zeta_f: float
    t_total: float
    fc_hz: float | None = None

    def __post_init__(self):
        if self.d595 <= 0:
            raise ValueError("d595 must be > 0")
        if not 0 < self.t_mid < self.t_total:
            raise ValueError("need 0 < t_mid < t_total")
        if not 0 < self.zeta_f < 1:
            raise ValueError("zeta_f must be in (0, 1)")
        if self.fc_hz is not None and self.fc_hz < 0:
            raise ValueError("fc_hz must be >= 0")
        # linear law: positivity on [0, t_total] is decided at the endpoints
        if self.omega_at(0.0) <= 0 or self.omega_at(self.t_total) <= 0:
            raise ValueError("omega(t) must stay > 0 on [0, t_total]")

    def omega_at(self, t):
        return self.omega_mid + self.omega_rate * (np.asarray(t, dtype=float) - self.t_mid)

    @property
    def omega_max(self):
        return max(float(self.omega_at(0.0)), float(self.omega_at(self.t_total)))

    @property
    def ai(self):
        return math.exp(self.log_ai)

    def with_fc(self, fc_hz):
        return replace(self, fc_hz=fc_hz)


@dataclass(frozen=True)
class ModulatorCoeffs:
    """Coefficients of q(t) = a1 * t**(a2-1) * exp(-a3*t)."""

    a1: float
    a2: float
    a3: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = self.a1 * t[pos] ** (self.a2 - 1) * np.exp(-self.a3 * t[pos])
        if self.a2 <= 1:  # q(0) finite only for a2 > 1; a2 == 1 gives a1
            out[~pos] = self.a1 if self.a2 == 1 else 0.0
        return out


@dataclass(frozen=True)
class SimBatch:
    """n realizations of one parameter set; rows are realizations (m/s^2)."""

    realizations: np.ndarray  # (n, m)
    dt: float
    seed: int
    params: GMParams
    domain_tag: str  # "temporal" | "spectral"

    @property
    def n(self):
        return self.realizations.shape[0]

    @property
    def times(self):
        return np.arange(self.realizations.shape[1]) * self.dt

    def save_npz(self, path):
        """Columnar binary container; see README for the key layout."""
        p = self.params
        np.savez_compressed(
            path,
            realizations=self.realizations, dt=self.dt, seed=self.seed,
            domain_tag=self.domain_tag,
            params=np.array([p.log_ai, p.d595, p.t_mid, p.omega_mid,
                             p.omega_rate, p.zeta_f, p.t_total,
                             np.nan if p.fc_hz is None else p.fc_hz]))

    @classmethod
    def load_npz(cls, path):
        with np.load(path) as z:
            pv = z["params"]
            fc = None if np.isnan(pv[7]) else float(pv[7])
            params = GMParams(*[float(v) for v in pv[:7]], fc_hz=fc)
            return cls(realizations=z["realizations"], dt=float(z["dt"]),
                       seed=int(z["seed"]), params=params,
                       domain_tag=str(z["domain_tag"]))


# ---------------------------------------------------------------------------
# modulating function
# ---------------------------------------------------------------------------

def _ai_quantile_times(k, r, t_total, qs=(0.05, 0.45, 0.95)):
    """Times at which the cumulative of t**(k-1)exp(-r t) on [0, t_total]
    reaches the given fractions of its total."""
    ptot = gammainc(k, r * t_total)
    return np.array([gammaincinv(k, q * ptot) / r for q in qs])


def solve_modulator(log_ai, d595, t_mid, t_total):
    """Fit (a1, a2, a3) so q^2 reproduces the energy-arrival targets.

    q^2 is proportional to a gamma kernel with shape k = 2*a2 - 1 and rate
    r = 2*a3, truncated at t_total. Nested bracketed root-finding: for each
    candidate shape, the rate matching t95 - t5 = d595 is found by brentq;
    the outer brentq drives t45 to t_mid. a1 then scales q so that
    (pi / 2g) * integral(q^2) equals AI = exp(log_ai).
    """
    if d595 >= t_total:
        raise NoSolution(f"d595={d595} does not fit inside t_total={t_total}")
    if not 0 < t_mid < t_total:
        raise NoSolution("t_mid must lie inside (0, t_total)")

    def span_resid(r, k):
        t5, _, t95 = _ai_quantile_times(k, r, t_total)
        return (t95 - t5) - d595

    def rate_for_span(k):
        rlo, rhi = 1e-7, 1e4
        if span_resid(rlo, k) < 0:
            return None  # even the flattest member of this shape is too short
        return brentq(span_resid, rlo, rhi, args=(k,), xtol=1e-13, rtol=8.9e-16)

    def tmid_resid(logk):
        k = math.exp(logk)
        r = rate_for_span(k)
        if r is None:
            return None
        return _ai_quantile_times(k, r, t_total)[1] - t_mid

    # scan shapes (k > 1 so that a2 > 1) for a sign change, then refine
    logks = np.log(np.logspace(math.log10(1.0005), math.log10(2e4), 120))
    bracket = None
    prev = None
    for lk in logks:
        v = tmid_resid(lk)
        if v is None:
            prev = None
            continue
        if prev is not None and np.sign(v) != np.sign(prev[1]):
            bracket = (prev[0], lk)
            break
        prev = (lk, v)
    if bracket is None:
        raise NoSolution(
            f"no gamma modulator reproduces d595={d595}, t_mid={t_mid}, t_total={t_total}")
    logk = brentq(tmid_resid, *bracket, xtol=1e-12)
    k = math.exp(logk)
    r = rate_for_span(k)

    # (pi/2g) * a1^2 * int_0^T t^(k-1) e^(-rt) dt = AI
    integral = math.exp(gammaln(k) - k * math.log(r)) * gammainc(k, r * t_total)
    a1 = math.sqrt(math.exp(log_ai) * 2 * G_ACCEL / math.pi / integral)
    return ModulatorCoeffs(a1=a1, a2=(k + 1) / 2, a3=r / 2)


def modulator_targets(coeffs, t_total, dt=1e-3):
    """Measure (AI, d595, t_mid) induced by q^2 on [0, t_total] by quadrature."""
    t = np.arange(0.0, t_total + dt / 2, dt)
    q2 = coeffs(t) ** 2
    cum = np.concatenate([[0.0], np.cumsum((q2[1:] + q2[:-1]) / 2 * dt)])
    total = cum[-1]
    ai = math.pi / (2 * G_ACCEL) * total
    t5, t45, t95 = np.interp([0.05, 0.45, 0.95], cum / total, t)
    return {"ai": ai, "d595": t95 - t5, "t_mid": t45}


# ---------------------------------------------------------------------------
# white-noise substreams
# ---------------------------------------------------------------------------

def _noise_matrix(seed, n, shape_per_realization):
    """Independent standard-normal draws, one Philox substream per
    realization, so results are independent of any parallel schedule."""
    children = np.random.SeedSequence(seed).spawn(n)
    out = np.empty((n,) + shape_per_realization)
    for i, child in enumerate(children):
        gen = np.random.Generator(np.random.Philox(child))
        out[i] = gen.standard_normal(shape_per_realization)
    return out


def _time_grid(params, dt):
    m = int(round(params.t_total / dt)) + 1
    return np.arange(m) * dt


def _check_dt(params, dt):
    if params.omega_max * dt >= 0.5:
        raise UnstableDiscretization(
            f"omega_max*dt = {params.omega_max * dt:.3f} >= 0.5; reduce dt")


def _normalize_and_modulate(x1, sigma, q):
    """Steps 2-3 shared by both engines; x1 has shape (m, n)."""
    x2 = np.zeros_like(x1)
    ok = sigma > SIGMA_FLOOR_REL * sigma.max()
    x2[ok] = x1[ok] / sigma[ok, None]
    return q[:, None] * x2


def simulate_temporal(params, dt, n, seed):
    """Time-domain engine: convolution of white-noise increments with the
    frozen-parameter oscillator impulse response, then Steps 2-3."""
    _check_dt(params, dt)
    t = _time_grid(params, dt)
    m = t.size

    omega = params.omega_at(t)  # filter parameters frozen at excitation time
    zeta = params.zeta_f
    sq = math.sqrt(1 - zeta ** 2)
    lag = t[:, None] - t[None, :]
    np.clip(lag, 0.0, None, out=lag)
    h = (omega[None, :] / sq) * np.exp(-zeta * omega[None, :] * lag) \
        * np.sin(omega[None, :] * sq * lag)
    h[lag <= 0] = 0.0

    sigma = np.sqrt((h ** 2).sum(axis=1) * dt)

    z = _noise_matrix(seed, n, (m,))  # (n, m)
    x1 = h @ (z.T * math.sqrt(dt))  # (m, n)

    q = solve_modulator(params.log_ai, params.d595, params.t_mid, params.t_total)(t)
    x3 = _normalize_and_modulate(x1, sigma, q)
    return SimBatch(realizations=np.ascontiguousarray(x3.T), dt=dt, seed=seed,
                    params=params, domain_tag="temporal")


def simulate_spectral(params, dt, n, seed):
    """Frequency-domain engine: spectral representation with the oscillator
    frequency response frozen at each output time, then Steps 2-3."""
    _check_dt(params, dt)
    t = _time_grid(params, dt)

    # K * dw = pi/dt with dw <= 2*pi/t_total
    big_k = int(math.ceil(params.t_total / (2 * dt)))
    dw = math.pi / (dt * big_k)
    w = dw * np.arange(1, big_k + 1)

    omega = params.omega_at(t)[:, None]
    zeta = params.zeta_f
    mag = omega ** 2 / np.sqrt((omega ** 2 - w[None, :] ** 2) ** 2
                               + (2 * zeta * omega * w[None, :]) ** 2)
    sigma = np.sqrt((mag ** 2).sum(axis=1) * 2 * dw)

    phase = w[None, :] * t[:, None]
    cmat = mag * np.cos(phase) * math.sqrt(2 * dw)
    smat = mag * np.sin(phase) * math.sqrt(2 * dw)

    ab = _noise_matrix(seed, n, (2, big_k))  # (n, 2, K)
    x1 = cmat @ ab[:, 0, :].T + smat @ ab[:, 1, :].T  # (m, n)

    q = solve_modulator(params.log_ai, params.d595, params.t_mid, params.t_total)(t)
    x3 = _normalize_and_modulate(x1, sigma, q)
    return SimBatch(realizations=np.ascontiguousarray(x3.T), dt=dt, seed=seed,
                    params=params, domain_tag="spectral")


def simulate(params, dt, n, seed, engine="spectral"):
    """Dispatch on engine tag; fc (if set on params) is NOT applied here."""
    if engine == "temporal":
        return simulate_temporal(params, dt, n, seed)
    if engine == "spectral":
        return simulate_spectral(params, dt, n, seed)
    raise ValueError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# high-pass filter
# ---------------------------------------------------------------------------

def _filter_kernel(fc_hz, dt):
    """Samples of t*exp(-wc*t) up to where the tail drops below 1e-8 of
    the kernel maximum."""
    wc = 2 * math.pi * fc_hz
    hmax = math.exp(-1) / wc
    length = max(int(2 / (wc * dt)), 16)
    while True:
        th = np.arange(length) * dt
        hf = th * np.exp(-wc * th)
        if hf[-1] < 1e-8 * hmax and length * dt > 1 / wc:
            break
        length *= 2
    keep = np.nonzero(hf >= 1e-8 * hmax)[0][-1] + 2
    return hf[:keep]


def highpass(x3, fc_hz, dt):
    """Apply the critically damped high-pass filter along the last axis.

    The input is zero-padded by the kernel's effective length, convolved
    with t*exp(-wc*t), and the second discrete derivative of the result is
    returned, i.e. the transfer (iw)^2/(iw + wc)^2. fc_hz = 0 bypasses the
    filter entirely. The output is longer than the input by the pad, so the
    motion settles to zero velocity and displacement.
    """
    x3 = np.asarray(x3, dtype=float)
    if not np.all(np.isfinite(x3)):
        raise ValueError("highpass input contains non-finite values")
    if fc_hz < 0:
        raise ValueError("fc_hz must be >= 0")
    if fc_hz == 0:
        return x3.copy()

    hf = _filter_kernel(fc_hz, dt)
    pad = np.zeros(x3.shape[:-1] + (hf.size,))
    xp = np.concatenate([x3, pad], axis=-1)
    kernel = hf.reshape((1,) * (xp.ndim - 1) + (hf.size,))
    z = dt * fftconvolve(xp, kernel, mode="full", axes=-1)[..., :xp.shape[-1]]

    d2 = np.empty_like(z)
    d2[..., 1:-1] = z[..., 2:] - 2 * z[..., 1:-1] + z[..., :-2]
    d2[..., 0] = z[..., 1] - 2 * z[..., 0]            # virtual z[-1] = 0
    d2[..., -1] = -2 * z[..., -1] + z[..., -2]        # virtual z[m]  = 0
    return d2 / dt ** 2


def apply_highpass(batch, fc_hz):
    """High-pass every realization of a batch; returns a new SimBatch."""
    out = highpass(batch.realizations, fc_hz, batch.dt)
    return SimBatch(realizations=out, dt=batch.dt, seed=batch.seed,
                    params=batch.params.with_fc(fc_hz), domain_tag=batch.domain_tag)
