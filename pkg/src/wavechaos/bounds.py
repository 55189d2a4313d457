"""Closed-form bound evaluators, rate envelopes and the limit covariance."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .chaos import Nonlinearity, build_chaos_table, laguerre_coefficients
from .errors import DomainError, NumericalError
from .spectra import SpectralModel, density
from .wavelets import AnalyticWavelet, LowPass, phi_hat_autocorr, psi_hat, sigma_j

DEFAULT_EPS = 0.1
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


# ---------------------------------------------------------------------------
# Cross-spectral transform and covariance series


def _band(w: AnalyticWavelet, model: SpectralModel, j_m: int, j_n: int):
    # support of ψ̂_R(2^{j_m}λ) ψ̂_R(2^{j_n}λ) f(λ) down to 1e-17 of its peak
    def logq(lam):
        lam = np.asarray(lam, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.log(0.25) + np.log(density(model, lam))
        for j in (j_m, j_n):
            u = np.ldexp(lam, j)
            out = out + w.alpha * np.log(u) - u ** w.gamma
        return out

    centre = math.ldexp(w.peak_frequency, -max(j_m, j_n))
    grid = centre * np.logspace(-10, 4, 4001)
    vals = logq(grid)
    i = int(np.argmax(vals))
    target = vals[i] + math.log(1e-17)
    above = np.nonzero(vals > target)[0]
    hi = grid[min(above[-1] + 1, grid.size - 1)]
    lo = grid[max(above[0] - 1, 0)] if above[0] > 0 else grid[0]
    return lo, hi, grid[i]


def _panels(lo: float, hi: float, peak: float, width: float):
    # geometric panels from lo up to min(peak, hi)/4, uniform panels after
    knee = min(peak / 4, hi)
    edges = [lo]
    while edges[-1] * 2 < knee:
        edges.append(edges[-1] * 2)
    n = max(1, math.ceil((hi - edges[-1]) / width))
    edges.extend(np.linspace(edges[-1], hi, n + 1)[1:])
    e = np.asarray(edges)
    a, b = e[:-1, None], e[1:, None]
    nodes = (0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)).ravel()
    wts = (0.5 * (b - a) * _GL_WEIGHTS).ravel()
    return nodes, wts


def cross_spectral_transform(w: AnalyticWavelet, model: SpectralModel, j_m: int, j_n: int,
                             taus) -> np.ndarray:
    """``G(τ) = ∫_0^∞ e^{iτλ} ψ̂_R(2^{j_m}λ) ψ̂_R(2^{j_n}λ) f(λ) dλ`` (complex).

    Gauss-Legendre panels: geometric near the origin, then of width at
    most ``π / (4|τ|)`` so every panel sees a quarter period or less.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    lo, hi, peak = _band(w, model, int(j_m), int(j_n))
    out = np.empty(taus.shape, dtype=complex)
    order = np.argsort(np.abs(taus))
    base = (hi - lo) / 256
    for block in np.array_split(order, max(1, math.ceil(taus.size / 64))):
        if block.size == 0:
            continue
        tmax = float(np.max(np.abs(taus[block])))
        width = min(base, math.pi / (4 * tmax)) if tmax > 0 else base
        nodes, wts = _panels(lo, hi, peak, width)
        q = 0.25 * (psi_hat(w, np.ldexp(nodes, int(j_m))).real
                    * psi_hat(w, np.ldexp(nodes, int(j_n))).real * density(model, nodes))
        out[block] = np.exp(1j * np.outer(taus[block], nodes)) @ (wts * q)
    return out


def _check_long_memory(w: AnalyticWavelet, model: SpectralModel):
    if 2 * w.alpha + model.beta_eff < 1:
        raise DomainError(
            f"2*alpha + beta = {2 * w.alpha + model.beta_eff:g} < 1: the covariance of the "
            "modulus process is not integrable")


def u_cross_covariance(w: AnalyticWavelet, model: SpectralModel, A: Nonlinearity,
                       j_m: int, j_n: int, tau, K: int, sigmas=None):
    """``Cov(A(|W[j_m]X(τ)|), A(|W[j_n]X(0)|))`` from the chaos series.

    Uses ``pref · Σ_{k=1}^{K/2} c_{A,k}² ρ(τ)^{2k}`` with
    ``ρ = 2|G(τ)| / (σ_{j_m} σ_{j_n})`` and ``pref = (σ_{j_m} σ_{j_n})^ν``
    (1 for the logarithm).  Each summand equals ``ℓ! c_ℓ² C(ℓ, ℓ/2)
    (σσ)^{-ℓ} |G|^ℓ`` at ``ℓ = 2k``.  Vectorized over ``tau``.
    """
    if K < 2 or K % 2:
        raise DomainError("K must be even and >= 2")
    _check_long_memory(w, model)
    if sigmas is None:
        sm, sn = sigma_j(w, model, j_m), sigma_j(w, model, j_n)
    else:
        sm, sn = sigmas
    G = cross_spectral_transform(w, model, j_m, j_n, tau)
    rho2 = np.minimum((2 * np.abs(G) / (sm * sn)) ** 2, 1.0)
    c = laguerre_coefficients(A, K // 2)[1:]
    powers = rho2[..., None] ** np.arange(1, K // 2 + 1)
    pref = 1.0 if A.kind == "log" else (sm * sn) ** A.nu
    out = pref * (powers @ (c * c))
    return out if np.ndim(tau) else float(out[0])


@dataclass(frozen=True)
class KappaMatrix:
    """``κ_{m,n} = (2π)^{-1} ∫ Cov(U[j_m](τ), U[j_n](0)) dτ`` and its assembly.

    ``limit_cov`` is ``κ_{m,n} ∫ e^{iλ(t_m - t_n)} |φ̂(λ)|² dλ`` when a
    low-pass and times were supplied, else ``None``.
    """

    kappa: np.ndarray
    residuals: np.ndarray
    j_list: tuple
    tau_max: float
    limit_cov: np.ndarray | None = field(default=None)
    t_list: tuple | None = None

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.kappa)))


def _trapezoid_half_line(fun, tau_max: float, h0: float, rtol: float = 1e-9):
    # ∫_0^{τ_max} of an even function, halving the step until settled
    n = max(16, math.ceil(tau_max / h0))
    taus = np.linspace(0.0, tau_max, n + 1)
    vals = fun(taus)
    prev = (np.sum(vals) - 0.5 * (vals[0] + vals[-1])) * (taus[1] - taus[0])
    for _ in range(12):
        mids = 0.5 * (taus[:-1] + taus[1:])
        mvals = fun(mids)
        t2 = np.empty(taus.size + mids.size)
        t2[0::2], t2[1::2] = taus, mids
        v2 = np.empty_like(t2)
        v2[0::2], v2[1::2] = vals, mvals
        taus, vals = t2, v2
        cur = (np.sum(vals) - 0.5 * (vals[0] + vals[-1])) * (taus[1] - taus[0])
        if abs(cur - prev) <= rtol * abs(cur) + 1e-300:
            return cur, abs(cur - prev)
        prev = cur
    raise NumericalError("trapezoid rule for kappa did not settle", abs(cur - prev))


def kappa_matrix(w: AnalyticWavelet, model: SpectralModel, A: Nonlinearity, j_list, K: int = 200,
                 tau_max: float | None = None, lp: LowPass | None = None,
                 t_list=None, rtol: float = 1e-9) -> KappaMatrix:
    """Limit covariance coefficients for the scales in ``j_list``.

    ``tau_max`` defaults to the first doubling at which every integrand
    has fallen below ``1e-6`` of its value at 0.

    Raises
    ------
    DomainError
        When ``2α + β < 1`` or the integrand fails to decay.
    """
    _check_long_memory(w, model)
    js = [int(j) for j in j_list]
    d = len(js)
    if d == 0:
        raise DomainError("j_list must be non-empty")
    if A.finite_chaos:
        K = min(K, int(A.nu))
    sig = {j: sigma_j(w, model, j) for j in set(js)}
    pairs = [(m, n) for m in range(d) for n in range(m, d)]

    def cov_fun(m, n):
        return lambda t: u_cross_covariance(w, model, A, js[m], js[n], t, K,
                                            sigmas=(sig[js[m]], sig[js[n]]))

    scale = math.ldexp(1.0, max(js)) / w.peak_frequency
    if tau_max is None:
        tau_max = 8 * scale
        for _ in range(40):
            ok = True
            for m, n in pairs:
                f = cov_fun(m, n)
                c0 = abs(f(np.array([0.0]))[0])
                tail = np.abs(f(np.linspace(tau_max / 2, tau_max, 33)))
                if np.max(tail) > 1e-6 * c0:
                    ok = False
                    break
            if ok:
                break
            tau_max *= 2
        else:
            raise DomainError("modulus covariance does not decay; check 2*alpha + beta >= 1")
    h0 = math.ldexp(1.0, min(js)) / (4 * w.peak_frequency)
    kappa = np.zeros((d, d))
    resid = np.zeros((d, d))
    for m, n in pairs:
        val, err = _trapezoid_half_line(cov_fun(m, n), tau_max, h0, rtol)
        kappa[m, n] = kappa[n, m] = val / math.pi
        resid[m, n] = resid[n, m] = err / math.pi
    limit = None
    tl = None
    if lp is not None:
        tl = tuple(float(t) for t in (t_list if t_list is not None else [0.0] * d))
        if len(tl) != d:
            raise DomainError("t_list must match j_list in length")
        dt = np.subtract.outer(tl, tl)
        limit = kappa * phi_hat_autocorr(lp, dt)
    return KappaMatrix(kappa, resid, tuple(js), float(tau_max), limit, tl)


# ---------------------------------------------------------------------------
# Lower bounds and rate envelopes


def wasserstein_lower_bound(A: Nonlinearity, sigma_1j: float, sigma_2j: float) -> float:
    """Distance between the means of two modulus processes.

    ``2^{ν/2} Γ(ν/2+1) |σ₁^ν - σ₂^ν|`` for ``r^ν``; ``|ln σ₁ - ln σ₂|`` for the log.
    """
    if not (sigma_1j > 0 and sigma_2j > 0):
        raise DomainError("sigmas must be positive")
    # log1p/expm1 of the relative gap: subtracting rounded logs or powers
    # returns 0 for adjacent distinct floats
    lo, hi = sorted((sigma_1j, sigma_2j))  # ordered, so the result is exactly symmetric
    rel = math.log1p((hi - lo) / lo)
    if A.kind == "log":
        return rel
    h = A.nu / 2
    return 2 ** h * math.gamma(h + 1) * lo ** A.nu * math.expm1(A.nu * rel)


def long_memory_slope(w: AnalyticWavelet, model_1: SpectralModel, model_2: SpectralModel,
                      j: int) -> float:
    """``(2/ln 2) · |ln σ_{1,j} - ln σ_{2,j}| / j``, which tends to ``|β₁ - β₂|``."""
    b = wasserstein_lower_bound(Nonlinearity.log(), sigma_j(w, model_1, j),
                                sigma_j(w, model_2, j))
    return 2 / math.log(2) * b / j


def truncation_order(J: int) -> int:
    """``K(J) = 2 ⌊(J/4) log₃ 2⌋``."""
    # the 1e-12 nudge absorbs rounding when J log₃2 / 4 is an integer
    return 2 * math.floor(J / 4 * math.log(2) / math.log(3) + 1e-12)


def regime(A: Nonlinearity) -> str:
    if A.finite_chaos:
        return "exponential"
    return "polynomial-log" if A.kind == "log" else "polynomial-power"


@dataclass(frozen=True)
class RateCurve:
    """Unit-constant rate envelopes over a list of ``J``.

    For finite-chaos nonlinearities ``K`` is the fixed chaos order and
    ``finite_chaos`` is set; the truncation schedule does not apply.
    """

    A: Nonlinearity
    J: np.ndarray
    K: np.ndarray
    tail_term: np.ndarray
    stein_term: np.ndarray
    envelope: np.ndarray
    regime: str
    eps: float
    finite_chaos: bool
    combined: np.ndarray | None = None


def _check_eps(A: Nonlinearity, eps: float):
    if regime(A) == "polynomial-power" and not 0 < eps <= 0.5:
        raise DomainError(f"eps must lie in (0, 0.5], got {eps}")


def rate_curve(A: Nonlinearity, J_list, eps: float = DEFAULT_EPS) -> RateCurve:
    """Smooth-Wasserstein rate envelope and its two ingredient terms per ``J``.

    Tail term ``2 K^{-ν/2-1/4+ε}`` and middle term
    ``2^{-J/2} 3^K K^{-ν-3/2+ε}`` with ``K = K(J)``; when the schedule
    gives ``K = 0`` the terms are evaluated at ``K = 2``.  The logarithm
    uses ``ν = 0`` and no ``ε``.
    """
    _check_eps(A, eps)
    J = np.asarray(J_list, dtype=float)
    reg = regime(A)
    if reg == "exponential":
        K = np.full(J.shape, int(A.nu))
        tail = np.zeros(J.shape)
        stein = 2.0 ** (-J / 2)
        env = stein.copy()
    else:
        K = np.array([truncation_order(int(j)) for j in J])
        Kc = np.maximum(K, 2).astype(float)
        e = 0.0 if reg == "polynomial-log" else eps
        nu = A.nu
        tail = 2 * Kc ** (-nu / 2 - 0.25 + e)
        # log space: 3^K alone overflows for very large J
        stein = np.exp(-J / 2 * math.log(2) + Kc * math.log(3) + (-nu - 1.5 + e) * np.log(Kc))
        env = J ** (-0.25) if reg == "polynomial-log" else J ** (-nu / 2 - 0.25 + e)
    return RateCurve(A, J, K, tail, stein, env, reg, float(eps), reg == "exponential")


def kolmogorov_from_smooth_wasserstein(d_h2, d: int = 1, min_var: float = 1.0):
    """``3 ((√(2 ln d) + 2) / √min_var)^{2/3} d_H2^{1/3} + d_H2``."""
    if d < 1 or not min_var > 0:
        raise DomainError("need d >= 1 and min_var > 0")
    d_h2 = np.asarray(d_h2, dtype=float)
    c = (math.sqrt(2 * math.log(d)) + 2) / math.sqrt(min_var)
    return 3 * c ** (2 / 3) * np.cbrt(d_h2) + d_h2


def kolmogorov_rate(A: Nonlinearity, J_list, eps: float = DEFAULT_EPS, d: int = 1,
                    min_var: float = 1.0, d_h2=None) -> RateCurve:
    """Kolmogorov-distance envelope (cube-root regime of the smooth rate).

    ``combined`` applies :func:`kolmogorov_from_smooth_wasserstein` to
    ``d_h2`` when given, else to the smooth-Wasserstein envelope.
    """
    base = rate_curve(A, J_list, eps)
    J = base.J
    if base.regime == "exponential":
        env = 2.0 ** (-J / 6)
    elif base.regime == "polynomial-log":
        env = J ** (-1 / 12)
    else:
        env = J ** (-A.nu / 6 - 1 / 12 + eps)
    surrogate = base.envelope if d_h2 is None else d_h2
    comb = kolmogorov_from_smooth_wasserstein(surrogate, d, min_var)
    return RateCurve(A, J, base.K, base.tail_term, base.stein_term, env, base.regime,
                     base.eps, base.finite_chaos, np.broadcast_to(comb, J.shape).copy())


def stein_constant(w: AnalyticWavelet, model: SpectralModel, lp: LowPass, A: Nonlinearity,
                   j_list) -> float:
    """Computable constant ``C`` multiplying ``2^{-J/2} (Σ|c_ℓ|√(ℓ!)3^{ℓ/2})²``.

    ``C² = ‖φ̂‖_∞ ‖φ̂‖₁³ max_{m,n} max(σ_m^{2ν-2} σ_n^{2ν-4} M³, σ_m^{2ν-2} σ_n^{2ν-2} M²)``
    with ``M = max_{m,n} sup_λ |ψ̂_R(2^{j_m}λ) ψ̂_R(2^{j_n}λ)| f(λ)``.  A
    diagnostic only; it is infinite when the windowed density is
    unbounded at the origin.
    """
    js = [int(j) for j in j_list]
    M = 0.0
    for jm in js:
        for jn in js:
            lo, hi, _ = _band(w, model, jm, jn)
            lam = np.geomspace(lo, hi, 20001)
            q = 0.25 * (psi_hat(w, np.ldexp(lam, jm)).real * psi_hat(w, np.ldexp(lam, jn)).real
                        * density(model, lam))
            M = max(M, float(np.max(q)))
    sig = [sigma_j(w, model, j) for j in js]
    nu = A.nu
    best = 0.0
    for sm in sig:
        for sn in sig:
            best = max(best, sm ** (2 * nu - 2) * sn ** (2 * nu - 4) * M ** 3,
                       sm ** (2 * nu - 2) * sn ** (2 * nu - 2) * M ** 2)
    return math.sqrt(lp.hat_sup * lp.hat_l1 ** 3 * best)


def stein_bound(A: Nonlinearity, K: int, J: int, constant: float = 1.0) -> float:
    """``constant · 2^{-J/2} (Σ_{ℓ≤K} |c_ℓ| √(ℓ!) 3^{ℓ/2})²``."""
    table = build_chaos_table(A, K)
    return constant * 2.0 ** (-J / 2) * table.stein_series ** 2


def tail_bound(A: Nonlinearity, K: int, d: int = 1) -> float:
    """``d · (Σ_{ℓ>K} ℓ! c_ℓ²)^{1/2}``, the measured truncation error in L²."""
    return d * math.sqrt(build_chaos_table(A, K).tail_sq)


__all__ = [
    "DEFAULT_EPS", "KappaMatrix", "RateCurve", "cross_spectral_transform", "kappa_matrix",
    "kolmogorov_from_smooth_wasserstein", "kolmogorov_rate", "long_memory_slope",
    "rate_curve", "regime", "stein_bound", "stein_constant", "tail_bound",
    "truncation_order", "u_cross_covariance", "wasserstein_lower_bound",
]
