"""Independent reference computations used only by the tests.

None of these share code paths with the package routines they check.
"""
import math

import numpy as np
from scipy import integrate, special


def rayleigh_moment(A_kind, nu, sigma):
    """E[A(R)] for R Rayleigh(σ): (√2σ)^ν Γ(1+ν/2), or ln σ + (ln 2 - γ)/2."""
    if A_kind == "log":
        return math.log(sigma) + (math.log(2) - np.euler_gamma) / 2
    return (math.sqrt(2) * sigma) ** nu * math.gamma(1 + nu / 2)


def cartesian_modulus_variance(fun, sigma, box=12.0):
    """Var f(|X + iY|) for iid N(0, σ²) parts by 2-d Cartesian quadrature."""
    def dens(y, x):
        return math.exp(-(x * x + y * y) / (2 * sigma ** 2)) / (2 * math.pi * sigma ** 2)

    L = box * sigma
    opts = dict(epsabs=1e-12, epsrel=1e-10)
    m1 = integrate.dblquad(lambda y, x: fun(math.hypot(x, y)) * dens(y, x), -L, L, -L, L, **opts)[0]
    m2 = integrate.dblquad(lambda y, x: fun(math.hypot(x, y)) ** 2 * dens(y, x), -L, L, -L, L,
                           **opts)[0]
    return m2 - m1 * m1


def bivariate_rayleigh_cov(fun, s1, s2, rho, n=400, rmax=10.0):
    """Cov(f(R1), f(R2)) for moduli of circular complex Gaussians with |corr| = ρ.

    Joint density r1 r2 / (s1² s2² (1-ρ²)) exp(-(r1²/s1² + r2²/s2²)/(2(1-ρ²)))
    I0(ρ r1 r2 / (s1 s2 (1-ρ²))), integrated by tensor Gauss-Legendre in
    the square-root variables r = v² (which removes the r → 0 kink).
    """
    x, wt = np.polynomial.legendre.leggauss(n)
    vmax = math.sqrt(rmax)
    v = 0.5 * vmax * (x + 1)
    wv = 0.5 * vmax * wt
    r = v * v
    jac = 2 * v * wv
    r1 = s1 * r[:, None]
    r2 = s2 * r[None, :]
    q = 1 - rho * rho
    z = rho * r[:, None] * r[None, :] / q
    dens = (r[:, None] * r[None, :] / q * np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2 * q))
            * special.i0e(z) * np.exp(z))
    W = jac[:, None] * jac[None, :] * dens
    f1, f2 = fun(r1), fun(r2)
    total = np.sum(W)
    e1 = np.sum(W * f1) / total
    e2 = np.sum(W * f2) / total
    e12 = np.sum(W * f1 * f2) / total
    return e12 - e1 * e2, total


def g_transform_quadpack(w_alpha, w_gamma, dens, j_m, j_n, tau, upper=200.0):
    """G(τ) by QUADPACK's Fourier-weighted rules (cos and sin parts)."""
    def q(lam):
        if lam == 0.0:  # ψ̂(0) = 0 kills any integrable density singularity
            return 0.0
        u, v = lam * 2.0 ** j_m, lam * 2.0 ** j_n
        return 0.25 * u ** w_alpha * math.exp(-u ** w_gamma) * v ** w_alpha * math.exp(-v ** w_gamma) * dens(lam)

    if tau == 0:
        return integrate.quad(q, 0, upper, limit=500, epsabs=0, epsrel=1e-12)[0] + 0j
    re = integrate.quad(q, 0, upper, weight="cos", wvar=tau, limit=2000)[0]
    im = integrate.quad(q, 0, upper, weight="sin", wvar=tau, limit=2000)[0]
    return re + 1j * im


def trapezoid_sigma_sq(alpha, gamma, dens, j, upper, n=10**6):
    """σ_j² = 2 ∫_0^∞ ¼ ψ̂(2^j λ)² f(λ) dλ by a wide uniform trapezoid rule."""
    lam = np.linspace(0.0, upper, n + 1)[1:]
    u = lam * 2.0 ** j
    g = 0.25 * u ** (2 * alpha) * np.exp(-2 * u ** gamma) * dens(lam)
    h = upper / n
    return 2 * h * (np.sum(g) - 0.5 * g[-1])
