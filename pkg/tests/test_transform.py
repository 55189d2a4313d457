import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import rayleigh_moment
from wavechaos.chaos import EULER_GAMMA, Nonlinearity
from wavechaos.errors import DomainError
from wavechaos.gpsim import build_grid, path_seed, synthesize_batch
from wavechaos.spectra import SpectralModel
from wavechaos.transform import (TimeSeries, analytic_mean_s, analytic_mean_u,
                                 apply_nonlinearity, count_invalid, make_f_sample,
                                 moving_average, window)
from wavechaos.wavelets import AnalyticWavelet, LowPass, phi_hat, sigma_j

P1, P2, LOG = Nonlinearity.power(1), Nonlinearity.power(2), Nonlinearity.log()
GAUSS = LowPass("gaussian")
M11 = AnalyticWavelet(1.0, 1.0)
OU = SpectralModel.ou(1.0)


def _series(values, dt=0.125, t0=None):
    values = np.asarray(values)
    n = values.shape[-1]
    t0 = -(n // 2) * dt if t0 is None else t0
    return TimeSeries(values, t0, dt)


def test_apply_nonlinearity_examples():
    w = _series(np.array([3 + 4j, math.e + 0j, 0j, -1 + 0j]))
    assert apply_nonlinearity(P2, w).values[0] == pytest.approx(25)
    assert apply_nonlinearity(P1, w).values[0] == pytest.approx(5)
    u = apply_nonlinearity(LOG, w)
    assert u.values[1] == pytest.approx(1.0)
    assert np.isneginf(u.values[2])
    assert count_invalid(u) == 1


def test_analytic_mean_u_examples():
    assert analytic_mean_u(P2, 1.5) == pytest.approx(4.5, rel=1e-15)
    for s in (0.3, 1.0, 2.7):
        assert analytic_mean_u(P1, s) == pytest.approx(s * math.sqrt(math.pi / 2), rel=1e-14)
    assert analytic_mean_u(LOG, 1.0) == pytest.approx((math.log(2) - EULER_GAMMA) / 2, rel=1e-14)
    assert analytic_mean_u(LOG, 1.0) == pytest.approx(0.05797, abs=5e-6)
    with pytest.raises(DomainError):
        analytic_mean_u(P1, 0.0)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 3.3])
def test_analytic_mean_u_rayleigh_oracle(nu):
    for s in (0.4, 1.7):
        A = Nonlinearity.power(nu)
        assert analytic_mean_u(A, s) == pytest.approx(rayleigh_moment("power", nu, s), rel=1e-12)
    assert analytic_mean_u(LOG, 1.7) == pytest.approx(rayleigh_moment("log", 0, 1.7), rel=1e-12)


def test_analytic_mean_s_examples():
    assert analytic_mean_s(P2, 1.0, GAUSS) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-15)
    assert analytic_mean_s(LOG, 1.0, LowPass("laplace")) == pytest.approx(
        math.log(2) - EULER_GAMMA, rel=1e-14)


@pytest.mark.parametrize("J", [0, 1, 3])
def test_constant_input(J):
    u = _series(np.full(2048, 2.5))
    s = moving_average(u, GAUSS, J, [-3.0, 0.0, 4.25])
    assert np.allclose(s, 2.5 * math.sqrt(math.pi), rtol=0, atol=1e-8)


@pytest.mark.parametrize("J,omega", [(0, 0.7), (1, 0.9), (2, 0.3)])
def test_cosine_multiplier(J, omega):
    u = _series(np.zeros(2048))
    t = u.t0 + u.dt * np.arange(2048)
    u.values = np.cos(omega * t)
    te = np.array([-2.0, 0.0, 1.5])
    s = moving_average(u, GAUSS, J, te)
    assert np.allclose(s, np.cos(omega * te) * phi_hat(GAUSS, 2.0 ** J * omega), atol=1e-6)


def test_large_J_flattens():
    # slowly varying u: the spread of S over a fixed window shrinks with J
    n = 1 << 14
    u = _series(np.zeros(n), dt=0.25)
    t = u.t0 + u.dt * np.arange(n)
    u.values = 1.0 + 0.5 * np.sin(0.3 * t) + 0.3 * np.cos(1.1 * t)
    te = np.linspace(-5, 5, 11)
    spreads = [np.ptp(moving_average(u, GAUSS, J, te)) for J in range(0, 5)]
    assert all(b < a for a, b in zip(spreads, spreads[1:]))
    assert moving_average(u, GAUSS, 5, [0.0])[0] == pytest.approx(math.sqrt(math.pi), rel=1e-3)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3),
       u=arrays(float, 256, elements=st.floats(-5, 5)),
       v=arrays(float, 256, elements=st.floats(-5, 5)))
def test_linearity(a, b, u, v):
    te = [0.0, 1.0]
    lhs = moving_average(_series(a * u + b * v), GAUSS, 0, te)
    rhs = a * moving_average(_series(u), GAUSS, 0, te) + b * moving_average(_series(v), GAUSS, 0, te)
    assert np.allclose(lhs, rhs, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(u=arrays(float, 256, elements=st.floats(-5, 5)), k=st.integers(-8, 8))
def test_shift_covariance(u, k):
    dt = 0.125
    base = moving_average(_series(u, dt), GAUSS, 0, [k * dt])
    shifted = moving_average(_series(np.roll(u, 1), dt), GAUSS, 0, [(k + 1) * dt])
    assert shifted == pytest.approx(base, abs=1e-12)


def test_window_support_error_names_length():
    u = _series(np.ones(256), dt=0.125)
    with pytest.raises(DomainError, match="n_time >= "):
        window(GAUSS, 4, 0.0, u)
    with pytest.raises(DomainError):
        moving_average(u, GAUSS, 0, [10.0])


def _const_source(modulus, n=2048, dt=0.125, j=0):
    w = np.full((3, n), modulus + 0j)
    return SimpleNamespace(w={j: w}, t0=-(n // 2) * dt, dt=dt, n_time=n, offset=0)


@pytest.mark.parametrize("A", [P1, P2, LOG], ids=lambda a: a.label)
def test_f_zero_for_mean_constant(A):
    sig = 1.3
    m = analytic_mean_u(A, sig)
    r = math.exp(m) if A.kind == "log" else m ** (1 / A.nu)
    f = make_f_sample(_const_source(r), A, GAUSS, 2, [(0, 0.0), (0, 0.5)], {0: sig})
    assert f.values.shape == (3, 2) and f.d == 2
    assert np.allclose(f.values, 0.0, atol=1e-7)


def test_f_sample_requires_spec():
    with pytest.raises(DomainError):
        make_f_sample(_const_source(1.0), P1, GAUSS, 0, [], {0: 1.0})


def test_f_doubling_J_needs_longer_grid():
    src = _const_source(1.0, n=1024)
    make_f_sample(src, P1, GAUSS, 2, [(0, 0.0)], {0: 1.0})
    with pytest.raises(DomainError, match="n_time"):
        make_f_sample(src, P1, GAUSS, 3, [(0, 0.0)], {0: 1.0})


N_MC = 10_000


def _batch(model, j, n_time=256, n_paths=N_MC, master=21):
    grid = build_grid(model, M11, [j], n_time)
    seeds = [path_seed(master, p) for p in range(n_paths)]
    return synthesize_batch(model, M11, grid, [j], seeds)


@pytest.fixture(scope="module")
def ou_batch():
    return _batch(OU, 0)


@pytest.fixture(scope="module")
def pl_batch():
    return _batch(SpectralModel.power_law(0.5, profile="exponential"), 1, master=22)


@pytest.mark.parametrize("A", [P1, P2, LOG], ids=lambda a: a.label)
@pytest.mark.parametrize("which", ["ou", "pl"])
def test_mean_law(A, which, ou_batch, pl_batch):
    if which == "ou":
        batch, model, j = ou_batch, OU, 0
    else:
        batch, model, j = pl_batch, SpectralModel.power_law(0.5, profile="exponential"), 1
    u = apply_nonlinearity(A, TimeSeries.from_source(batch, j)).values[:, 128]
    se = u.std(ddof=1) / math.sqrt(u.size)
    assert abs(u.mean() - analytic_mean_u(A, sigma_j(M11, model, j))) < 3 * se


def test_power2_variance_law(ou_batch):
    s = sigma_j(M11, OU, 0)
    u = np.abs(ou_batch.w[0][:, 128]) ** 2
    # |W|² is 2σ² times a unit exponential: Var of the variance estimator is 8 (2σ²)^4 / n
    se = math.sqrt(8 / u.size) * (2 * s * s) ** 2
    assert abs(u.var(ddof=1) - 4 * s ** 4) < 3 * se


def test_f_mean_zero(ou_batch):
    f = make_f_sample(ou_batch, P1, GAUSS, 2, [(0, 0.0)], {0: sigma_j(M11, OU, 0)})
    assert np.all(np.isfinite(f.values))
    v = f.values[:, 0]
    assert abs(v.mean()) < 3 * v.std(ddof=1) / math.sqrt(v.size)


def test_f_reproducible():
    b1, b2 = _batch(OU, 0, n_paths=5), _batch(OU, 0, n_paths=5)
    s = {0: sigma_j(M11, OU, 0)}
    f1 = make_f_sample(b1, LOG, GAUSS, 1, [(0, 0.0)], s)
    f2 = make_f_sample(b2, LOG, GAUSS, 1, [(0, 0.0)], s)
    assert np.array_equal(f1.values, f2.values)
