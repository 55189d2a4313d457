"""Spectral synthesis of Gaussian paths and their wavelet coefficients.

The spectral measure is discretized on the FFT-conjugate grid
``λ_k = k dλ`` with ``dλ = 2π / (n_time Δt)``.  Each positive cell gets
one circular complex Gaussian scaled by the square root of its exact
mass; negative cells are the complex conjugates, so only the positive
half is stored.  Cell 0 is the symmetric cell ``[-dλ/2, dλ/2]`` and
carries a real Gaussian.  All scales share the same draw.

Because ``W[j]X`` is analytic (positive frequencies only), the complex
coefficient series is alias-free on the whole band ``[0, 2π/Δt)``.  The
real path ``x`` is the exact grid sampling of the discretized process;
content above the Nyquist frequency folds back into it, as sampling a
continuous path would.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import optimize

from .errors import DomainError, SizeError
from .spectra import SpectralModel, cumulative_mass, density
from .wavelets import AnalyticWavelet, psi_hat

CUTOFF_REL = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    """Positive half of a Hermitian-symmetric frequency grid.

    Attributes
    ----------
    n_time : int
        Time samples (FFT length).
    n_freq : int
        Stored cells ``k = 0..n_freq-1``; cells past ``n_freq`` are empty.
    dt, d_lambda : float
    lambda_cut : float
        Frequency past which the windowed integrand is below
        ``1e-12`` of its peak for every requested scale.
    cell_masses : ndarray
        ``m_0`` for the symmetric centre cell, then the positive cells.
    """

    n_time: int
    n_freq: int
    dt: float
    d_lambda: float
    lambda_cut: float
    cell_masses: np.ndarray = field(repr=False)

    @property
    def lambda_max(self) -> float:
        """Upper edge of the last stored cell."""
        return (self.n_freq - 0.5) * self.d_lambda

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.n_freq) * self.d_lambda

    @property
    def total_mass(self) -> float:
        """Mass over ``[-λ_max, λ_max]``, i.e. the variance of ``x``."""
        m = self.cell_masses
        return float(m[0] + 2 * np.sum(m[1:]))


def _log_window(w, model, j, lam):
    # log of |ψ̂_R(2^j λ)|² f(λ) for λ > 0
    u = np.ldexp(lam, j)
    with np.errstate(divide="ignore"):  # underflowed density -> -inf is fine here
        return math.log(0.25) + 2 * w.alpha * np.log(u) - 2 * u ** w.gamma + np.log(density(model, lam))


def windowed_peak_and_cutoff(model: SpectralModel, w: AnalyticWavelet, j_set,
                             rel: float = CUTOFF_REL):
    """Peak value of ``max_j |ψ̂_R(2^j λ)|² f(λ)`` and the cutoff frequency.

    Returns
    -------
    peak : float
        Largest value over ``λ > 0`` and ``j``.
    argmax : float
        Frequency of that peak.
    cutoff : float
        Smallest ``λ`` past every scale's peak where each scale's
        integrand has dropped to ``rel · peak``.
    """
    js = sorted(set(int(j) for j in j_set))
    if not js:
        raise DomainError("j_set must be non-empty")
    lp = w.peak_frequency
    peaks = []
    for j in js:
        centre = math.ldexp(lp, -j)
        grid = centre * np.logspace(-8, 3, 2201)
        vals = _log_window(w, model, j, grid)
        i = int(np.argmax(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = optimize.minimize_scalar(lambda s: -_log_window(w, model, j, np.exp(s)),
                                       bounds=(math.log(lo), math.log(hi)), method="bounded",
                                       options={"xatol": 1e-10})
        lam_pk = float(np.exp(res.x)) if -res.fun >= vals[i] else float(grid[i])
        peaks.append((max(-res.fun, vals[i]), lam_pk))
    log_peak = max(p[0] for p in peaks)
    argmax = max(peaks)[1]
    target = log_peak + math.log(rel)
    cut = 0.0
    for j, (_, lam_pk) in zip(js, peaks):
        hi = 2 * lam_pk
        while _log_window(w, model, j, np.array(hi)) > target:
            hi *= 2
        root = optimize.brentq(lambda x: float(_log_window(w, model, j, np.array(x))) - target,
                               lam_pk, hi, xtol=1e-12, rtol=1e-12)
        cut = max(cut, root)
    return math.exp(log_peak), argmax, cut


def choose_dt(model: SpectralModel, w: AnalyticWavelet, j_set, oversample: float = 1.0) -> float:
    """Time step resolving the finest scale and the spectral cutoff.

    ``Δt = min(2π/(9/8 λ_cut), 2^{j_min} · 2π/(8 λ_peak)) / oversample``
    where ``λ_peak`` is the Morse peak frequency.  The 9/8 headroom keeps
    the last occupied cell inside the alias-free band ``[0, 2π/Δt)``.
    """
    if not oversample >= 1:
        raise DomainError("oversample must be >= 1")
    _, _, cut = windowed_peak_and_cutoff(model, w, j_set)
    j_min = min(int(j) for j in j_set)
    period = math.ldexp(2 * math.pi / w.peak_frequency, j_min)
    return min(2 * math.pi / (1.125 * cut), period / 8) / oversample


def _next_pow2(n: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(n, 1))))


def build_grid(model: SpectralModel, w: AnalyticWavelet, j_set, n_time: int,
               dt: float | None = None, n_freq: int | None = None,
               oversample: float = 1.0) -> FrequencyGrid:
    """Frequency grid for ``n_time`` samples at step ``dt``.

    Raises
    ------
    SizeError
        When the band ``[0, n_freq dλ]`` cannot reach the cutoff; the
        message carries the ``n_freq`` (or ``dt``) that would.
    """
    if not j_set:
        raise DomainError("j_set must be non-empty")
    n_time = int(n_time)
    if n_time < 8 or n_time & (n_time - 1):
        raise DomainError(f"n_time must be a power of two >= 8, got {n_time}")
    if dt is None:
        dt = choose_dt(model, w, j_set, oversample)
    if not dt > 0:
        raise DomainError("dt must be positive")
    _, _, cut = windowed_peak_and_cutoff(model, w, j_set)
    dlam = 2 * math.pi / (n_time * dt)
    needed = math.ceil(cut / dlam + 0.5)
    if n_freq is None:
        n_freq = _next_pow2(needed)
        if n_freq > n_time:
            raise SizeError(
                f"cutoff {cut:.4g} needs n_freq={n_freq} > n_time={n_time}; "
                f"use dt <= {2 * math.pi / cut:.6g}")
    elif n_freq < needed or n_freq > n_time:
        raise SizeError(f"n_freq={n_freq} cannot reach cutoff {cut:.4g}; "
                        f"use n_freq={_next_pow2(needed)} (at most n_time={n_time})")
    edges = (np.arange(n_freq) + 0.5) * dlam
    m = cumulative_mass(model, edges)
    masses = np.empty(n_freq)
    masses[0] = 2 * m[0]
    masses[1:] = np.maximum(np.diff(m), 0.0)
    return FrequencyGrid(n_time, int(n_freq), float(dt), dlam, cut, masses)


def path_seed(master: int, *key: int) -> int:
    """64-bit seed for one path, split from ``master`` by an integer key."""
    state = np.random.SeedSequence([int(master) % 2**64, *[int(k) for k in key]])
    lo, hi = state.generate_state(2, np.uint32)
    return int(hi) << 32 | int(lo)


def draw_cells(grid: FrequencyGrid, seed: int) -> np.ndarray:
    """Scaled cell amplitudes ``√m_k ξ_k`` (``ξ_0`` real) for one seed.

    Draws come from a Philox counter-based generator keyed by ``seed``,
    consumed in cell order, so a path does not depend on how paths are
    distributed over workers.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    z = rng.standard_normal(2 * grid.n_freq)
    a = (z[0::2] + 1j * z[1::2]) * math.sqrt(0.5)
    a[0] = z[0]
    return a * np.sqrt(grid.cell_masses)


@dataclass
class PathBundle:
    """One synthesized path.

    ``times[k] = t0 + k dt``; ``w`` maps each scale to ``W[j]X`` on the
    same grid.  The central half ``valid`` is free of wrap-around.
    """

    t0: float
    dt: float
    x: np.ndarray
    w: dict
    seed: int
    grid: FrequencyGrid

    @property
    def n_time(self) -> int:
        return self.grid.n_time

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_time)

    @property
    def valid(self) -> tuple:
        return valid_region(self.n_time)

    offset = 0


@dataclass
class PathBatch:
    """Many paths, optionally cropped to columns ``offset..offset+width``."""

    t0: float
    dt: float
    n_time: int
    offset: int
    w: dict
    seeds: list
    x: np.ndarray | None = None

    @property
    def valid(self) -> tuple:
        return valid_region(self.n_time)


def valid_region(n_time: int) -> tuple:
    """Index range ``[n/4, 3n/4)`` unaffected by periodic wrap-around."""
    return n_time // 4, 3 * n_time // 4


def _origin(grid: FrequencyGrid, t_center: float) -> float:
    return t_center - (grid.n_time // 2) * grid.dt


def _scale_factors(w: AnalyticWavelet, grid: FrequencyGrid, j_set):
    lam = grid.frequencies
    return {int(j): psi_hat(w, np.ldexp(lam, int(j))).real for j in j_set}


def synthesize(model: SpectralModel, w: AnalyticWavelet, grid: FrequencyGrid, j_set,
               seed: int, t_center: float = 0.0, workers: int = 1) -> PathBundle:
    """Draw one path ``x`` and its coefficients ``W[j]X`` for ``j ∈ j_set``.

    The grid midpoint sits at ``t_center``.  Deterministic in ``seed``.
    """
    if not j_set:
        raise DomainError("j_set must be non-empty")
    n = grid.n_time
    t0 = _origin(grid, t_center)
    a = draw_cells(grid, seed)
    b = a * np.exp(1j * grid.frequencies * t0)
    a0 = b[0].real
    b[0] = 0.0
    full = sfft.ifft(b, n=n, workers=workers) * n
    x = model.mean + a0 + 2 * full.real
    ws = {j: sfft.ifft(b * h, n=n, workers=workers) * n
          for j, h in _scale_factors(w, grid, j_set).items()}
    return PathBundle(t0, grid.dt, x, ws, int(seed), grid)


def synthesize_batch(model: SpectralModel, w: AnalyticWavelet, grid: FrequencyGrid, j_set,
                     seeds, t_center: float = 0.0, index_range=None, keep_x: bool = False,
                     workers: int = 1) -> PathBatch:
    """Row ``p`` equals ``synthesize(..., seeds[p])`` restricted to ``index_range``."""
    if not j_set:
        raise DomainError("j_set must be non-empty")
    n = grid.n_time
    i0, i1 = (0, n) if index_range is None else (int(index_range[0]), int(index_range[1]))
    if not 0 <= i0 < i1 <= n:
        raise DomainError(f"index range [{i0}, {i1}) outside [0, {n})")
    t0 = _origin(grid, t_center)
    phase = np.exp(1j * grid.frequencies * t0)
    b = np.stack([draw_cells(grid, s) for s in seeds]) * phase
    ws = {}
    for j, h in _scale_factors(w, grid, j_set).items():
        ws[j] = (sfft.ifft(b * h, n=n, axis=-1, workers=workers) * n)[:, i0:i1].copy()
    x = None
    if keep_x:
        a0 = b[:, 0].real.copy()
        b[:, 0] = 0.0
        full = sfft.ifft(b, n=n, axis=-1, workers=workers) * n
        x = (model.mean + a0[:, None] + 2 * full.real)[:, i0:i1].copy()
    return PathBatch(t0, grid.dt, n, i0, ws, [int(s) for s in seeds], x)
