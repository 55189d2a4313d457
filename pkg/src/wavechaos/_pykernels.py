"""Pure NumPy implementations of the hot loops (fallback backend)."""
from __future__ import annotations

from itertools import permutations
from math import comb

import numpy as np


def modulus_window_sum(w, weights, kind, nu):
    """Weighted sums ``Σ_n weights[n] A(|w[p, n]|)`` for each row ``p``.

    ``kind`` is 0 for ``r^ν`` and 1 for ``ln r``.  Exact zeros under the
    logarithm are skipped and counted.

    Returns
    -------
    sums : ndarray, shape (P,)
    n_invalid : int
    """
    w = np.atleast_2d(w)
    r2 = w.real * w.real + w.imag * w.imag
    if kind == 1:
        bad = r2 == 0
        with np.errstate(divide="ignore"):
            u = 0.5 * np.log(r2)
        u[bad] = 0.0
        return u @ weights, int(bad.sum())
    if nu == 2.0:
        u = r2
    elif nu == 1.0:
        u = np.sqrt(r2)
    else:
        u = r2 ** (0.5 * nu)
    return u @ weights, 0


def ks_sup(cdf_sorted):
    """Two-sided sup ``|F̂_N - F|`` given model CDF values at sorted samples."""
    c = np.asarray(cdf_sorted, dtype=float)
    n = c.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - c), np.max(c - (i - 1) / n)))


def sign_split_sum(signs):
    """Integer sum over all orderings of ``signs`` and even splits.

    For every ordering ``p`` and every even ``n ≤ ℓ`` add
    ``C(ℓ/2, n/2) (-1)^{n/2} Π_{k>ℓ-n} s_{p(k)}``.
    """
    ell = len(signs)
    h = ell // 2
    coef = [comb(h, q) * (-1) ** q for q in range(h + 1)]
    total = 0
    for perm in permutations(signs):
        prod = 1
        acc = coef[0]
        # suffix products in steps of two positions
        for q in range(1, h + 1):
            prod *= perm[ell - 2 * q] * perm[ell - 2 * q + 1]
            acc += coef[q] * prod
        total += acc
    return total
