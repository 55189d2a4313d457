"""Monte Carlo driver and empirical distance estimators."""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import chaos, kernels
from .bounds import kappa_matrix, kolmogorov_rate, rate_curve, truncation_order
from .chaos import Nonlinearity
from .config import RunConfig
from .errors import DomainError, SizeError, WavechaosError
from .gpsim import build_grid, choose_dt, path_seed, synthesize_batch
from .transform import WINDOW_REL, FSample, make_f_sample
from .wavelets import sigma_j

# ---------------------------------------------------------------------------
# Estimators


def _check_1d(samples, variance):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise DomainError("need at least 2 samples")
    if not (variance > 0 and math.isfinite(variance)):
        raise DomainError(f"variance must be positive and finite, got {variance}")
    return x


def empirical_kolmogorov_1d(samples, mean: float, variance: float) -> float:
    """``sup_z |F̂_N(z) - Φ((z - mean)/σ)|`` checked at both sides of each jump."""
    x = np.sort(_check_1d(samples, variance))
    cdf = special.ndtr((x - mean) / math.sqrt(variance))
    return float(kernels.ks_sup(cdf))


def empirical_w1_1d(samples, mean: float, variance: float) -> float:
    """``∫ |F̂⁻¹ - Φ⁻¹|`` by order statistics at plotting positions ``(k - ½)/N``."""
    x = np.sort(_check_1d(samples, variance))
    n = x.size
    q = mean + math.sqrt(variance) * special.ndtri((np.arange(1, n + 1) - 0.5) / n)
    return float(np.mean(np.abs(x - q)))


_GL64 = np.polynomial.legendre.leggauss(64)


def bivariate_normal_cdf(h, k, rho: float):
    """Standard bivariate normal CDF ``P(Z₁ ≤ h, Z₂ ≤ k)`` with correlation ``rho``.

    Uses ``Φ(h)Φ(k) + (2π)^{-1} ∫_0^{arcsin ρ} exp(-(h² + k² - 2hk sin θ) / (2cos²θ)) dθ``
    with 64-point Gauss-Legendre.
    """
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if not -1 < rho < 1:
        raise DomainError("correlation must lie strictly inside (-1, 1)")
    base = special.ndtr(h) * special.ndtr(k)
    if rho == 0:
        return base
    top = math.asin(rho)
    x, wt = _GL64
    theta = 0.5 * top * (x + 1)
    s, c2 = np.sin(theta), np.cos(theta) ** 2
    hh, kk = h[..., None], k[..., None]
    integrand = np.exp(-(hh * hh + kk * kk - 2 * hh * kk * s) / (2 * c2))
    return base + (0.5 * top) * (integrand @ wt) / (2 * math.pi)


def empirical_kolmogorov_2d(samples, mean, cov, grid_size: int = 200) -> float:
    """Lower-orthant distance on a ``grid_size²`` product grid.

    Grid points sit at empirical marginal quantiles; the empirical orthant
    probabilities are exact counts at those points.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise DomainError("2-d Kolmogorov distance needs samples of shape (n, 2); d > 2 is not supported")
    if x.shape[0] < 2:
        raise DomainError("need at least 2 samples")
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    sd = np.sqrt(np.diag(cov))
    if not np.all(sd > 0) or np.linalg.det(cov) <= 0:
        raise DomainError("covariance must be positive definite")
    rho = cov[0, 1] / (sd[0] * sd[1])
    levels = (np.arange(grid_size) + 0.5) / grid_size
    z1 = np.quantile(x[:, 0], levels)
    z2 = np.quantile(x[:, 1], levels)
    i1 = np.searchsorted(z1, x[:, 0], side="left")
    i2 = np.searchsorted(z2, x[:, 1], side="left")
    keep = (i1 < grid_size) & (i2 < grid_size)
    H = np.zeros((grid_size, grid_size))
    np.add.at(H, (i1[keep], i2[keep]), 1.0)
    emp = H.cumsum(0).cumsum(1) / x.shape[0]
    model = bivariate_normal_cdf(((z1 - mean[0]) / sd[0])[:, None],
                                 ((z2 - mean[1]) / sd[1])[None, :], rho)
    return float(np.max(np.abs(emp - model)))


def empirical_kolmogorov(samples, mean, cov) -> float:
    """Dispatch on dimension: exact for ``d = 1``, product grid for ``d = 2``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1 or x.shape[1] == 1:
        return empirical_kolmogorov_1d(x.ravel(), float(np.ravel(mean)[0]),
                                       float(np.ravel(cov)[0]))
    return empirical_kolmogorov_2d(x, mean, cov)


# ---------------------------------------------------------------------------
# Experiment driver

MAX_N_TIME = 1 << 22  # grid length per path; one path then holds ~64 MB of complex data


@dataclass(frozen=True)
class PathPlan:
    """Grid and crop window needed to evaluate ``F`` at one ``J``."""

    J: int
    n_time: int
    dt: float
    t_center: float
    index_range: tuple


def plan_paths(config: RunConfig, J: int) -> PathPlan:
    """Smallest power-of-two grid whose valid half covers every window.

    At least ``64 · 2^J`` samples are used; the time step follows
    :func:`gpsim.choose_dt` unless the config fixes it.
    """
    js = list(config.j_list)
    dt = config.dt or choose_dt(config.model, config.wavelet, js, config.oversample)
    h = math.ldexp(config.lowpass.support_halfwidth(WINDOW_REL), J)
    times = [math.ldexp(t, J) for t in config.t_list]
    lo, hi = min(times) - h, max(times) + h
    span = (hi - lo) / dt + 4
    n = 1 << math.ceil(math.log2(max(2 * span + 8, 64 * 2 ** J)))
    if n > MAX_N_TIME:
        raise SizeError(f"J={J} with the {config.lowpass.kind} low-pass needs n_time={n} > "
                        f"{MAX_N_TIME}; lower J or use a faster-decaying window")
    centre = 0.5 * (lo + hi)
    t0 = centre - (n // 2) * dt
    i0 = max(0, math.floor((lo - t0) / dt) - 1)
    i1 = min(n, math.ceil((hi - t0) / dt) + 2)
    return PathPlan(J, n, dt, centre, (i0, i1))


def simulate_f_samples(config: RunConfig, J: int, n_paths: int | None = None,
                       nonlinearities=None, stream: int = 0, workers: int = 1,
                       chunk_cells: int = 1 << 22) -> dict:
    """``F`` samples at level ``J`` for each nonlinearity, from shared paths.

    Path ``p`` uses the seed ``path_seed(config.seed, stream, J, p)``, so
    rows for different ``J`` (or streams) are independent and any row can
    be regenerated alone.

    Returns
    -------
    dict
        ``{label: FSample}`` keyed by :attr:`Nonlinearity.label`.
    """
    n_paths = config.n_paths if n_paths is None else int(n_paths)
    As = list(nonlinearities or config.A)
    plan = plan_paths(config, J)
    js = sorted(set(config.j_list))
    grid = build_grid(config.model, config.wavelet, js, plan.n_time, plan.dt)
    sig = {j: sigma_j(config.wavelet, config.model, j) for j in js}
    chunk = max(1, min(256, chunk_cells // plan.n_time))
    parts = {A.label: [] for A in As}
    bad = {A.label: 0 for A in As}
    for start in range(0, n_paths, chunk):
        seeds = [path_seed(config.seed, stream, J, p)
                 for p in range(start, min(n_paths, start + chunk))]
        batch = synthesize_batch(config.model, config.wavelet, grid, js, seeds,
                                 t_center=plan.t_center, index_range=plan.index_range,
                                 workers=workers)
        for A in As:
            fs = make_f_sample(batch, A, config.lowpass, J, config.spec, sig)
            parts[A.label].append(fs.values)
            bad[A.label] += fs.n_invalid
    out = {}
    for A in As:
        out[A.label] = FSample(np.vstack(parts[A.label]), config.spec, J, A, bad[A.label])
    return out


@dataclass
class CltRow:
    """Summary of the ``F`` population for one nonlinearity and one ``J``."""

    A: str
    J: int
    K: int
    n_paths: int
    mean: np.ndarray
    cov: np.ndarray
    se_mean: np.ndarray
    d_kol: float
    d_kol_empirical_centering: float
    w1: float
    predicted_cov: np.ndarray | None
    envelope: float
    kol_envelope: float
    n_invalid: int
    status: str = "ok"
    wall_clock: float = 0.0


@dataclass
class CltReport:
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    def for_A(self, label: str) -> list:
        return [r for r in self.rows if r.A == label]

    def d_kol(self, label: str) -> dict:
        return {r.J: r.d_kol for r in self.for_A(label) if r.status == "ok"}


def summarize(fs, predicted_cov, envelope, kol_envelope, K) -> CltRow:
    """Moments and distances of one ``FSample`` against its matched Gaussian."""
    F = fs.values
    n, d = F.shape
    mean = F.mean(axis=0)
    cov = np.atleast_2d(np.cov(F, rowvar=False))
    se = np.sqrt(np.diag(cov) / n)
    zero = np.zeros(d)
    d_kol = empirical_kolmogorov(F, zero, cov)
    d_emp = empirical_kolmogorov(F, mean, cov)
    w1 = empirical_w1_1d(F[:, 0], 0.0, float(cov[0, 0])) if d == 1 else float("nan")
    return CltRow(fs.A.label, fs.J, K, n, mean, cov, se, d_kol, d_emp, w1, predicted_cov,
                  envelope, kol_envelope, fs.n_invalid)


def fitted_slope(J, d_kol, A: Nonlinearity) -> float:
    """Log-log slope of ``d_Kol`` against ``J`` (log₂-linear for finite chaos)."""
    J = np.asarray(J, dtype=float)
    y = np.log(np.asarray(d_kol, dtype=float))
    if J.size < 2:
        return float("nan")
    xs = J * math.log(2) if A.finite_chaos else np.log(J)
    return float(np.polyfit(xs, y, 1)[0])


def count_inversions(values) -> list:
    """Index pairs ``(i, i+1)`` where a supposedly decreasing sequence rises."""
    v = list(values)
    return [(i, i + 1) for i in range(len(v) - 1) if v[i + 1] >= v[i]]


def run_clt_experiment(config: RunConfig, workers: int = 1, log=None) -> CltReport:
    """Monte Carlo summary per ``(A, J)`` with rate envelopes and κ prediction.

    Failures at one ``J`` are recorded in that row's ``status``; the other
    rows are still produced.
    """
    report = CltReport()
    preds = {}
    for A in config.A:
        try:
            km = kappa_matrix(config.wavelet, config.model, A, config.j_list, config.K,
                              lp=config.lowpass, t_list=config.t_list,
                              rtol=config.tolerances.get("kappa_rtol", 1e-9))
            preds[A.label] = km.limit_cov
        except WavechaosError as exc:
            preds[A.label] = None
            if log:
                log(f"kappa prediction unavailable for {A.label}: {exc}")
    for J in config.J_list:
        t_start = time.perf_counter()
        try:
            samples = simulate_f_samples(config, J, workers=workers)
        except WavechaosError as exc:
            for A in config.A:
                d = len(config.j_list)
                nan = np.full(d, np.nan)
                report.rows.append(CltRow(A.label, J, truncation_order(J), 0, nan,
                                          np.full((d, d), np.nan), nan, np.nan, np.nan,
                                          np.nan, preds[A.label], np.nan, np.nan, 0,
                                          status=f"error: {exc}"))
            continue
        elapsed = time.perf_counter() - t_start
        for A in config.A:
            rc = rate_curve(A, [J], config.eps)
            kr = kolmogorov_rate(A, [J], config.eps, d=len(config.j_list))
            row = summarize(samples[A.label], preds[A.label], float(rc.envelope[0]),
                            float(kr.envelope[0]), int(rc.K[0]))
            row.wall_clock = elapsed
            report.rows.append(row)
        if log:
            log(f"J={J}: {config.n_paths} paths in {elapsed:.1f}s")
    for A in config.A:
        dk = report.d_kol(A.label)
        report.slopes[A.label] = fitted_slope(list(dk), list(dk.values()), A)
    return report


# ---------------------------------------------------------------------------
# Exact identity suite


@dataclass
class SuiteResult:
    """Outcome of :func:`run_identity_suite`; ``failures`` holds witnesses."""

    checks: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, name: str, ok: bool, witness=None):
        self.checks.append((name, ok))
        if not ok:
            self.failures.append((name, witness))


def run_identity_suite(b_brute=None, b_hyper=None, b_closed=None, coeff=None,
                       coeff_quad=None) -> SuiteResult:
    """Exact and high-precision identities of the coefficient machinery.

    The keyword arguments substitute alternative implementations (used to
    confirm that a corrupted evaluator is caught).
    """
    b_brute = b_brute or chaos.b_bruteforce
    b_hyper = b_hyper or chaos.b_hypergeometric
    b_closed = b_closed or chaos.b_closed_form
    coeff = coeff or chaos.laguerre_coefficient
    coeff_quad = coeff_quad or chaos.laguerre_coefficient_quadrature
    res = SuiteResult()

    bad = None
    for ell in (2, 4, 6, 8):
        for N in range(ell + 1):
            signs = [-1] * N + [1] * (ell - N)
            vals = (b_brute(ell, signs), b_hyper(ell, N), b_closed(ell, N))
            if not vals[0] == vals[1] == vals[2]:
                bad = bad or (ell, N, vals)
    res.record("B three-way identity", bad is None, bad)

    bad = None
    for ell in (2, 4, 6):
        for mask in range(2 ** ell):
            signs = [-1 if mask >> i & 1 else 1 for i in range(ell)]
            if b_brute(ell, signs) != b_closed(ell, signs.count(-1)):
                bad = bad or (ell, tuple(signs))
    res.record("B depends only on the negative count", bad is None, bad)

    As = [Nonlinearity.power(0.5), Nonlinearity.power(1), Nonlinearity.power(2),
          Nonlinearity.power(3), Nonlinearity.log()]
    bad = None
    for A in As:
        for k in range(21):
            diff = abs(coeff(A, k) - coeff_quad(A, k))
            if not diff < 1e-8:
                bad = bad or (A.label, k, diff)
    res.record("Laguerre closed form vs quadrature", bad is None, bad)

    p2 = Nonlinearity.power(2)
    expected = [2.0, -2.0] + [0.0] * 19
    got = [coeff(p2, k) for k in range(21)]
    res.record("power:2 coefficients 2, -2, 0, ...", got == expected, got)
    lg = Nonlinearity.log()
    expected = [(math.log(2) - chaos.EULER_GAMMA) / 2] + [-1 / (2 * k) for k in range(1, 21)]
    got = [coeff(lg, k) for k in range(21)]
    res.record("log coefficients", got == expected, got)

    t1 = [chaos.theta1(l) for l in range(1, 42)]
    res.record("theta1(1) = 0, theta1(2) = sqrt 2",
               t1[0] == 0.0 and abs(t1[1] - math.sqrt(2)) < 1e-15, t1[:2])
    bad = [l for l in range(1, 21) if not t1[l - 1] <= 3.0 ** (l - 1) - 1 + 1e-9]
    res.record("theta1 bound", not bad, bad)
    ratios = [t1[l] / t1[l - 1] for l in range(10, 41)]
    ok = all(2.5 < r <= 3.0 for r in ratios) and all(b > a for a, b in zip(ratios, ratios[1:]))
    res.record("theta1 ratio in (2.5, 3] increasing", ok, ratios)
    bad = [(l, lp) for l in range(1, 21) for lp in range(1, 21)
           if not chaos.theta2(l, lp) <= 3.0 ** (l / 2) * 3.0 ** (lp / 2)]
    res.record("theta2 bound", not bad, bad[:1])
    bad = [l for l in range(2, 41, 2) if not chaos.stirling_ratio(l) <= math.sqrt(2 * math.pi * l)]
    res.record("Stirling bound", not bad, bad)
    return res


def print_progress(msg: str):
    print(msg, file=sys.stderr, flush=True)
