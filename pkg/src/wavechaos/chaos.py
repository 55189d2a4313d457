"""Expansion coefficients of ``A(|x₁ + i x₂|)`` and related combinatorics.

Covers the radial Laguerre coefficients ``c_{A,k}``, the bivariate
Hermite weights, the chaos coefficients ``c_ℓ``, the sign-permutation
quantity ``B(ℓ, ·)`` evaluated three independent ways, and the
combinatorial sums ``Θ₁`` and ``Θ₂``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np
from scipy import special

from . import kernels
from .errors import DomainError, NumericalError, SizeError

EULER_GAMMA = 0.57721566490153286061

#: Largest number of tail terms summed by :func:`build_chaos_table`.
TAIL_CAP = 10**6


@dataclass(frozen=True)
class Nonlinearity:
    """``A(r) = r^ν`` (``kind="power"``) or ``A(r) = ln r`` (``kind="log"``)."""

    kind: str
    nu: float = 0.0

    def __post_init__(self):
        if self.kind == "power":
            if not (self.nu > 0 and math.isfinite(self.nu)):
                raise DomainError(f"power exponent must be positive, got {self.nu}")
        elif self.kind == "log":
            object.__setattr__(self, "nu", 0.0)
        else:
            raise DomainError(f"unknown nonlinearity {self.kind!r}")

    @classmethod
    def power(cls, nu: float) -> "Nonlinearity":
        return cls("power", float(nu))

    @classmethod
    def log(cls) -> "Nonlinearity":
        return cls("log")

    @classmethod
    def parse(cls, text: str) -> "Nonlinearity":
        """Parse ``"power:ν"`` or ``"log"``."""
        s = str(text).strip().lower()
        if s == "log":
            return cls.log()
        if s.startswith("power:"):
            try:
                nu = float(s.split(":", 1)[1])
            except ValueError:
                raise DomainError(f"bad power exponent in {text!r}") from None
            return cls.power(nu)
        raise DomainError(f"cannot parse nonlinearity {text!r}; use 'power:<nu>' or 'log'")

    @property
    def label(self) -> str:
        return "log" if self.kind == "log" else f"power:{self.nu:g}"

    @property
    def finite_chaos(self) -> bool:
        """True for ``r^ν`` with ``ν`` an even integer (finitely many chaoses)."""
        return self.kind == "power" and self.nu == int(self.nu) and int(self.nu) % 2 == 0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "log":
            with np.errstate(divide="ignore"):
                return np.log(r)
        return r ** self.nu


# ---------------------------------------------------------------------------
# Laguerre coefficients


def laguerre_poly(k: int, u):
    """Laguerre polynomial ``L_k(u)`` by the three-term recurrence."""
    if k < 0:
        raise DomainError("Laguerre degree must be nonnegative")
    u = np.asarray(u, dtype=float)
    prev = np.ones_like(u)
    if k == 0:
        return prev
    cur = 1.0 - u
    for n in range(1, k):
        prev, cur = cur, ((2 * n + 1 - u) * cur - n * prev) / (n + 1)
    return cur


def laguerre_coefficient(A: Nonlinearity, k: int) -> float:
    """Closed-form ``c_{A,k} = ∫_0^∞ A(√(2u)) L_k(u) e^{-u} du``.

    The power case uses the falling-factorial product for the generalized
    binomial, which stays finite (and exactly zero past ``ν/2``) when ``ν``
    is an even integer.
    """
    if k < 0:
        raise DomainError("k must be nonnegative")
    if A.kind == "log":
        if k == 0:
            return (math.log(2.0) - EULER_GAMMA) / 2
        return -1.0 / (2 * k)
    h = A.nu / 2
    val = 2.0 ** h * math.gamma(h + 1)
    for i in range(k):
        val *= (i - h) / (i + 1)
    return val


def laguerre_coefficients(A: Nonlinearity, kmax: int) -> np.ndarray:
    """``c_{A,k}`` for ``k = 0..kmax`` as an array."""
    if A.kind == "log":
        out = np.empty(kmax + 1)
        out[0] = laguerre_coefficient(A, 0)
        out[1:] = -0.5 / np.arange(1, kmax + 1)
        return out
    h = A.nu / 2
    i = np.arange(kmax, dtype=float)
    ratios = (i - h) / (i + 1)
    return 2.0 ** h * math.gamma(h + 1) * np.concatenate(([1.0], np.cumprod(ratios)))


def _power_quadrature(nu: float, k: int, n: int) -> float:
    x, wts = special.roots_genlaguerre(n, nu / 2)
    return 2.0 ** (nu / 2) * float(np.dot(wts, laguerre_poly(k, x)))


def laguerre_coefficient_quadrature(A: Nonlinearity, k: int, tol: float = 1e-9) -> float:
    """Quadrature value of ``c_{A,k}``, independent of the closed form.

    Power: generalized Gauss-Laguerre with weight ``u^{ν/2} e^{-u}``; the
    node count is doubled until successive values agree within ``tol``.
    Log: tanh-sinh quadrature in 30-digit arithmetic (the logarithmic
    endpoint singularity defeats Gauss rules), refined until the degree
    increase changes the result by less than ``tol``.
    """
    if not 0 <= k <= 40:
        raise SizeError("quadrature oracle supports 0 <= k <= 40")
    if A.kind == "power":
        n = max(8, k + 2)
        prev = _power_quadrature(A.nu, k, n)
        while n < 512:
            n *= 2
            cur = _power_quadrature(A.nu, k, n)
            if abs(cur - prev) < tol:
                return cur
            prev = cur
        raise NumericalError(f"Gauss-Laguerre did not settle for k={k}", abs(cur - prev))
    with mpmath.workdps(30):
        def f(u):
            return mpmath.log(2 * u) / 2 * mpmath.laguerre(k, 0, u) * mpmath.exp(-u)

        pieces = [0, 1, 2 * k + 4, 8 * k + 40, mpmath.inf]
        prev = None
        for deg in (6, 8, 10):
            cur = mpmath.quad(f, pieces, method="tanh-sinh", maxdegree=deg)
            if prev is not None and abs(cur - prev) < tol:
                return float(cur)
            prev = cur
    raise NumericalError(f"tanh-sinh quadrature did not settle for k={k}")


# ---------------------------------------------------------------------------
# Hermite structure and chaos coefficients


def hermite_weight(m: int) -> float:
    """``h_m = (-1)^{m/2} √(m!) / (2^{m/2} (m/2)!)`` for even ``m``."""
    if m < 0 or m % 2:
        raise DomainError(f"hermite_weight needs an even nonnegative m, got {m}")
    h = m // 2
    return (-1) ** h * math.sqrt(factorial(m)) / (2 ** h * factorial(h))


def hermite_coefficient(A: Nonlinearity, m: int, n: int) -> float:
    """``C_{m,n} = h_m h_n c_{A,(m+n)/2}`` when both indices are even, else 0."""
    if m < 0 or n < 0:
        raise DomainError("indices must be nonnegative")
    if m % 2 or n % 2:
        return 0.0
    return hermite_weight(m) * hermite_weight(n) * laguerre_coefficient(A, (m + n) // 2)


def _c_ell_factor(ell: int) -> float:
    h = ell // 2
    return float(Fraction((-2) ** h * factorial(h), factorial(ell)))


def chaos_coefficient(A: Nonlinearity, ell: int) -> float:
    """``c_ℓ = (-2)^{ℓ/2} (ℓ/2)! / ℓ! · c_{A,ℓ/2}`` for even ``ℓ ≥ 2``."""
    if ell < 2 or ell % 2:
        raise DomainError(f"chaos order must be even and >= 2, got {ell}")
    return _c_ell_factor(ell) * laguerre_coefficient(A, ell // 2)


# ---------------------------------------------------------------------------
# Sign-permutation identity


def b_bruteforce(ell: int, signs) -> Fraction:
    """``B(ℓ, λ)`` by enumerating all ``ℓ!`` orderings of the signs.

    Each ordering contributes, for every even split ``m + n = ℓ``, the
    product of the last ``n`` signs weighted by
    ``(-1)^{n/2} / ((m/2)! (n/2)!)``.  Multiplying through by ``(ℓ/2)!``
    makes every weight an integer, so the sum is accumulated exactly.
    """
    if ell not in (2, 4, 6, 8):
        raise SizeError(f"brute-force enumeration supports ell in {{2,4,6,8}}, got {ell}")
    s = [int(x) for x in signs]
    if len(s) != ell or any(x not in (-1, 1) for x in s):
        raise DomainError("signs must be a sequence of +1/-1 of length ell")
    total = kernels.sign_split_sum(s)
    return Fraction(total, factorial(ell) * factorial(ell // 2))


def b_hypergeometric(ell: int, n_negative: int) -> Fraction:
    """``B`` through the count-based weights ``Σ_n w_n a_n``."""
    if ell < 2 or ell % 2:
        raise DomainError("ell must be even and >= 2")
    N = int(n_negative)
    if not 0 <= N <= ell:
        raise DomainError("n_negative must lie in [0, ell]")
    total = Fraction(0)
    for n in range(0, ell + 1, 2):
        a_n = sum((-1) ** q * comb(N, q) * comb(ell - N, n - q)
                  for q in range(0, min(N, n) + 1))
        w_n = Fraction(factorial(n) * factorial(ell - n),
                       factorial(ell) * factorial(n // 2) * factorial((ell - n) // 2))
        total += (-1) ** (n // 2) * w_n * a_n
    return total


def b_closed_form(ell: int, n_negative: int) -> Fraction:
    """``2^ℓ (ℓ/2)! / ℓ!`` when exactly half the signs are negative, else 0."""
    if ell < 2 or ell % 2:
        raise DomainError("ell must be even and >= 2")
    if int(n_negative) != ell // 2:
        return Fraction(0)
    return Fraction(2 ** ell * factorial(ell // 2), factorial(ell))


# ---------------------------------------------------------------------------
# Θ sums

_THETA_MAX = 60


def theta1(ell: int) -> float:
    """``Θ₁(ℓ) = -1 + Σ_{k<ℓ} C(ℓ-1, k) √C(2k, k)`` in 50-digit arithmetic."""
    if ell < 1:
        raise DomainError("theta1 needs ell >= 1")
    if ell > _THETA_MAX:
        raise SizeError(f"theta1 supports ell <= {_THETA_MAX}")
    with mpmath.workdps(50):
        s = mpmath.mpf(-1)
        for k in range(ell):
            s += comb(ell - 1, k) * mpmath.sqrt(comb(2 * k, k))
        return float(s)


def theta1_direct(ell: int) -> float:
    """``Θ₁`` from its defining sum ``(ℓ-1)!^{-1} Σ_r (r-1)! C(ℓ-1,r-1)² √((2ℓ-2r)!)``."""
    if ell < 1 or ell > _THETA_MAX:
        raise SizeError(f"theta1_direct supports 1 <= ell <= {_THETA_MAX}")
    with mpmath.workdps(50):
        s = mpmath.mpf(0)
        for r in range(1, ell):
            s += factorial(r - 1) * comb(ell - 1, r - 1) ** 2 * mpmath.sqrt(factorial(2 * ell - 2 * r))
        return float(s / factorial(ell - 1))


def theta2(ell: int, ell_prime: int) -> float:
    """``Θ₂(ℓ, ℓ')``, the cross-order analogue of ``Θ₁``."""
    if ell < 1 or ell_prime < 1:
        raise DomainError("theta2 needs ell, ell' >= 1")
    if ell > _THETA_MAX or ell_prime > _THETA_MAX:
        raise SizeError(f"theta2 supports orders <= {_THETA_MAX}")
    L, Lp = ell, ell_prime
    with mpmath.workdps(50):
        s = mpmath.mpf(0)
        for r in range(1, min(L, Lp) + 1):
            term = mpmath.mpf(r) / Lp
            term *= mpmath.sqrt(mpmath.mpf(factorial(L)) / (factorial(L - r) * factorial(r)))
            term *= mpmath.sqrt(mpmath.mpf(factorial(Lp)) / (factorial(Lp - r) * factorial(r)))
            term *= mpmath.sqrt(factorial(L + Lp - 2 * r))
            term /= mpmath.sqrt(factorial(L - r)) * mpmath.sqrt(factorial(Lp - r))
            s += term
        return float(s)


def stirling_ratio(ell: int) -> float:
    """``2^ℓ ((ℓ/2)!)² / ℓ!``, bounded by ``√(2πℓ)``."""
    if ell < 2 or ell % 2:
        raise DomainError("ell must be even and >= 2")
    return float(Fraction(2 ** ell * factorial(ell // 2) ** 2, factorial(ell)))


# ---------------------------------------------------------------------------
# Tables


@dataclass(frozen=True)
class ChaosTable:
    """Coefficients and summary series for one nonlinearity up to order ``K``.

    Attributes
    ----------
    c_a : ndarray
        ``c_{A,k}`` for ``k = 0..K/2``.
    c_ell : ndarray
        ``c_ℓ`` for ``ℓ = 2, 4, ..., K``.
    tail_sq : float
        ``Σ_{ℓ>K even} ℓ! c_ℓ²`` including ``tail_remainder``.
    tail_remainder : float
        Power-law extrapolation of the terms beyond the summation cap
        (0 when the relative stopping rule fired first).
    stein_series : float
        ``Σ_{ℓ≤K} |c_ℓ| √(ℓ!) 3^{ℓ/2}``.
    """

    nonlinearity: Nonlinearity
    K: int
    c_a: np.ndarray = field(repr=False)
    c_ell: np.ndarray = field(repr=False)
    tail_sq: float
    tail_remainder: float
    stein_series: float

    @property
    def ells(self) -> np.ndarray:
        return np.arange(2, self.K + 1, 2)

    @property
    def ell_factorial_c_ell_sq(self) -> np.ndarray:
        """``ℓ! c_ℓ²`` per order, computed without forming ``ℓ!``."""
        k = np.arange(1, self.K // 2 + 1)
        return _central_ratio(k) * self.c_a[1:] ** 2

    @property
    def stein_terms(self) -> np.ndarray:
        """``|c_ℓ| √(ℓ!) 3^{ℓ/2}`` per order."""
        return np.sqrt(self.ell_factorial_c_ell_sq) * 3.0 ** (self.ells / 2)


def _central_ratio(k):
    # 2^{2k} (k!)² / (2k)! = ℓ! c_ℓ² / c_{A,k}² at ℓ = 2k
    k = np.asarray(k, dtype=float)
    return np.exp(2 * k * math.log(2) + 2 * special.gammaln(k + 1) - special.gammaln(2 * k + 1))


def _tail_sum(A: Nonlinearity, k0: int, c_k0: float):
    """Sum ``ℓ! c_ℓ²`` over ``k = ℓ/2 > k0``; returns (sum, remainder)."""
    if A.finite_chaos and k0 >= A.nu / 2:
        return 0.0, 0.0
    chunk = 8192
    total = 0.0
    logc = math.log(abs(c_k0)) if c_k0 != 0 else -math.inf
    start = k0
    while start - k0 < TAIL_CAP:
        n = min(chunk, TAIL_CAP - (start - k0))
        k = np.arange(start + 1, start + n + 1, dtype=float)
        if A.kind == "log":
            terms = _central_ratio(k) * (0.5 / k) ** 2
        else:
            i = k - 1
            with np.errstate(divide="ignore"):
                steps = np.log(np.abs((i - A.nu / 2) / (i + 1)))
            logs = logc + np.cumsum(steps)
            logc = logs[-1]
            terms = _central_ratio(k) * np.exp(2 * logs)
        total = math.fsum([total, float(np.sum(terms[::-1]))])
        start += n
        if total == 0.0 or terms[-1] < 1e-16 * total:
            return total, 0.0
    # remaining tail t_k ≈ t_last (k/k_last)^{-p}, with the asymptotic exponent
    # p = ν + 3/2 (log: 3/2); fitting p from adjacent terms loses too many digits
    p = 1.5 if A.kind == "log" else A.nu + 1.5
    kl = float(k[-1])
    rem = float(terms[-1]) * kl ** p * float(special.zeta(p, kl + 1))
    return total + rem, rem


def build_chaos_table(A: Nonlinearity, K: int) -> ChaosTable:
    """Assemble :class:`ChaosTable` for ``A`` truncated at even order ``K``."""
    if K < 2 or K % 2 or K > 200:
        raise DomainError(f"K must be even with 2 <= K <= 200, got {K}")
    if A.finite_chaos and K < A.nu:
        warnings.warn(f"K={K} < nu={A.nu:g}: truncation drops nonzero finite-chaos terms",
                      RuntimeWarning, stacklevel=2)
    kmax = K // 2
    c_a = laguerre_coefficients(A, kmax)
    ells = np.arange(2, K + 1, 2)
    c_ell = np.array([_c_ell_factor(int(l)) for l in ells]) * c_a[1:]
    tail, rem = _tail_sum(A, kmax, float(c_a[-1]))
    terms = np.sqrt(_central_ratio(np.arange(1, kmax + 1)) * c_a[1:] ** 2) * 3.0 ** (ells / 2)
    return ChaosTable(A, K, c_a, c_ell, tail, rem, math.fsum(terms))
