"""Modulus nonlinearity, low-pass moving average and the statistic ``F``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chaos import Nonlinearity, laguerre_coefficient
from .errors import DomainError
from .gpsim import valid_region
from .wavelets import LowPass, phi_J

WINDOW_REL = 1e-10


@dataclass
class TimeSeries:
    """Values on the grid ``t0 + (offset + k) dt``.

    ``values`` may be 1-D (one path) or 2-D with time on the last axis.
    ``n_time`` is the length of the full periodic grid; ``valid`` is the
    index range (in full-grid indices) free of wrap-around effects.
    """

    values: np.ndarray
    t0: float
    dt: float
    n_time: int | None = None
    offset: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.n_time is None:
            self.n_time = self.values.shape[-1]
        if not self.dt > 0:
            raise DomainError("dt must be positive")

    @property
    def valid(self) -> tuple:
        lo, hi = valid_region(self.n_time)
        lo = max(lo, self.offset)
        hi = min(hi, self.offset + self.values.shape[-1])
        if lo >= hi:
            raise DomainError("time series has an empty valid region")
        return lo, hi

    @classmethod
    def from_source(cls, source, j=None):
        """Wrap ``x`` (``j=None``) or ``w[j]`` of a bundle or batch."""
        vals = source.x if j is None else source.w[int(j)]
        return cls(vals, source.t0, source.dt, source.n_time, getattr(source, "offset", 0))


def apply_nonlinearity(A: Nonlinearity, w: TimeSeries) -> TimeSeries:
    """Pointwise ``A(|w|)``; under the logarithm exact zeros become ``-inf``."""
    return TimeSeries(A(np.abs(w.values)), w.t0, w.dt, w.n_time, w.offset)


def count_invalid(u: TimeSeries) -> int:
    """Number of ``-inf`` samples produced by the logarithm."""
    return int(np.count_nonzero(np.isneginf(u.values)))


def analytic_mean_u(A: Nonlinearity, sigma_j: float) -> float:
    """``E[A(|W[j]X(t)|)]``: ``σ^ν c_{A,0}`` or ``c_{A,0} + ln σ``."""
    if not sigma_j > 0:
        raise DomainError("sigma_j must be positive")
    c0 = laguerre_coefficient(A, 0)
    if A.kind == "log":
        return c0 + math.log(sigma_j)
    return sigma_j ** A.nu * c0


def analytic_mean_s(A: Nonlinearity, sigma_j: float, lp: LowPass) -> float:
    """Mean of the moving average, ``E[U] φ̂(0)``, independent of ``J`` and ``t``."""
    return analytic_mean_u(A, sigma_j) * lp.hat_at_zero


def window(lp: LowPass, J: int, t: float, series: TimeSeries):
    """Index range and weights ``φ_J(t - s_n) Δt`` covering the effective support.

    Returns
    -------
    start : int
        Column (relative to ``series.values``) of the first weight.
    weights : ndarray
    """
    h = math.ldexp(lp.support_halfwidth(WINDOW_REL), int(J))
    dt = series.dt
    n_lo = math.ceil((t - h - series.t0) / dt - 1e-9)
    n_hi = math.floor((t + h - series.t0) / dt + 1e-9)
    lo, hi = series.valid
    if n_lo < lo or n_hi >= hi:
        need = 1 << math.ceil(math.log2(2 * (n_hi - n_lo + 1) + 4))
        centre = series.t0 + (series.n_time // 2) * dt
        raise DomainError(
            f"window for t={t:g}, J={J} spans grid indices [{n_lo}, {n_hi}] outside the "
            f"valid region [{lo}, {hi}); needs n_time >= {need} centred near t (grid centre "
            f"{centre:g})")
    s = series.t0 + dt * np.arange(n_lo, n_hi + 1)
    return n_lo - series.offset, phi_J(lp, J, t - s) * dt


def moving_average(u: TimeSeries, lp: LowPass, J: int, t_eval) -> np.ndarray:
    """``(u ⋆ φ_J)(t)`` at each absolute time in ``t_eval``.

    Rectangle/trapezoid rule at the path resolution (identical here since
    the window weights vanish to ``1e-10`` at both ends).  ``-inf``
    samples are skipped.  Output has shape ``(len(t_eval),)`` for a
    single path or ``(P, len(t_eval))`` for a batch.
    """
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    vals = np.where(np.isneginf(u.values), 0.0, u.values)
    out = []
    for t in t_eval:
        start, wts = window(lp, J, float(t), u)
        out.append(vals[..., start:start + wts.size] @ wts)
    return np.stack(out, axis=-1)


@dataclass
class FSample:
    """Per-path vectors ``(F_1, ..., F_d)`` with their metadata.

    ``values`` has shape ``(n_paths, d)``; ``spec`` lists ``(j_m, t_m)``.
    """

    values: np.ndarray
    spec: list
    J: int
    A: Nonlinearity
    n_invalid: int = 0

    @property
    def d(self) -> int:
        return self.values.shape[1]


def make_f_sample(source, A: Nonlinearity, lp: LowPass, J: int, spec, sigmas) -> FSample:
    """``F_m = 2^{J/2} (S[j_m](2^J t_m) - E S[j_m])`` for every path in ``source``.

    Parameters
    ----------
    source : PathBundle or PathBatch
        Must hold ``w[j_m]`` for every ``j_m`` in ``spec``.
    spec : list of (int, float)
        Scale and rescaled time ``(j_m, t_m)`` of each coordinate.
    sigmas : mapping
        ``σ_{j}`` for each scale in ``spec``; centering uses the analytic
        mean, never the sample mean.
    """
    if not spec:
        raise DomainError("spec must contain at least one (j, t) pair")
    kind = 1 if A.kind == "log" else 0
    cols, bad = [], 0
    for j, t in spec:
        ws = TimeSeries.from_source(source, j)
        start, wts = window(lp, J, math.ldexp(float(t), int(J)), ws)
        seg = np.atleast_2d(ws.values)[:, start:start + wts.size]
        sums, nb = kernels.modulus_window_sum(np.ascontiguousarray(seg), wts, kind, float(A.nu))
        bad += nb
        cols.append(sums - analytic_mean_s(A, sigmas[int(j)], lp))
    vals = 2.0 ** (J / 2) * np.column_stack(cols)
    return FSample(vals, [(int(j), float(t)) for j, t in spec], int(J), A, bad)
