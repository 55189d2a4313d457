"""End-to-end acceptance criteria, one test group per criterion.

The terminal summary prints one ``criterion n: PASS/FAIL`` line per group.
Monte Carlo seeds are fixed in advance (``SEED``) and never tuned.
"""
import filecmp
import math
from fractions import Fraction
import time

import numpy as np
import pytest

from oracles import cartesian_modulus_variance, rayleigh_moment
from wavechaos import chaos, cli
from wavechaos.bounds import (long_memory_slope, truncation_order, u_cross_covariance,
                              wasserstein_lower_bound)
from wavechaos.chaos import Nonlinearity
from wavechaos.config import config_from_dict
from wavechaos.gpsim import build_grid, path_seed, synthesize_batch
from wavechaos.harness import (count_inversions, empirical_kolmogorov_1d, empirical_w1_1d,
                               run_clt_experiment, run_identity_suite)
from wavechaos.spectra import SpectralModel
from wavechaos.transform import TimeSeries, analytic_mean_u, apply_nonlinearity
from wavechaos.wavelets import AnalyticWavelet, sigma_j

SEED = 20261016
P05, P1, P2, P3, LOG = (Nonlinearity.power(0.5), Nonlinearity.power(1), Nonlinearity.power(2),
                        Nonlinearity.power(3), Nonlinearity.log())
M11 = AnalyticWavelet(1.0, 1.0)
OU = SpectralModel.ou(1.0)
PL = SpectralModel.power_law(0.5, profile="exponential")


# ---- 1 ---------------------------------------------------------------------

@pytest.mark.criterion(1, "B identity: brute force = hypergeometric = closed form")
def test_c1_b_identity():
    t0 = time.perf_counter()
    for ell in (2, 4, 6, 8):
        for N in range(ell + 1):
            signs = [-1] * N + [1] * (ell - N)
            brute = chaos.b_bruteforce(ell, signs)
            hyper = chaos.b_hypergeometric(ell, N)
            closed = chaos.b_closed_form(ell, N)
            assert brute == hyper == closed, (ell, N, brute, hyper, closed)
            if N == ell // 2:
                assert closed == Fraction(2 ** ell * math.factorial(ell // 2), math.factorial(ell))
            else:
                assert closed == 0
    assert time.perf_counter() - t0 < 30


# ---- 2 ---------------------------------------------------------------------

@pytest.mark.criterion(2, "Laguerre coefficients: closed form vs quadrature, printed values")
@pytest.mark.parametrize("A", [P05, P1, P2, P3, LOG], ids=lambda a: a.label)
def test_c2_closed_vs_quadrature(A):
    for k in range(21):
        assert abs(chaos.laguerre_coefficient(A, k)
                   - chaos.laguerre_coefficient_quadrature(A, k)) < 1e-8, k


@pytest.mark.criterion(2, "Laguerre coefficients: closed form vs quadrature, printed values")
def test_c2_printed_values():
    assert [chaos.laguerre_coefficient(P2, k) for k in range(8)] == [2.0, -2.0] + [0.0] * 6
    g = (math.log(2) - chaos.EULER_GAMMA) / 2
    assert [chaos.laguerre_coefficient(LOG, k) for k in range(4)] == [g, -0.5, -0.25, -1 / 6]


# ---- 3 ---------------------------------------------------------------------

N3 = 10_000


@pytest.fixture(scope="module")
def mean_law_batches():
    out = {}
    for name, model in (("ou", OU), ("powerlaw", PL)):
        grid = build_grid(model, M11, [0, 2], 1024)
        seeds = [path_seed(SEED, 3, p) for p in range(N3)]
        b = synthesize_batch(model, M11, grid, [0, 2], seeds, index_range=(512, 513))
        out[name] = (model, b)
    return out


@pytest.mark.criterion(3, "mean laws for U over 1e4 paths (OU and long memory)")
@pytest.mark.parametrize("name", ["ou", "powerlaw"])
@pytest.mark.parametrize("j", [0, 2])
@pytest.mark.parametrize("A", [P1, P2, LOG], ids=lambda a: a.label)
def test_c3_mean_law(mean_law_batches, name, j, A):
    model, batch = mean_law_batches[name]
    s = sigma_j(M11, model, j)
    pred = analytic_mean_u(A, s)
    # independent Rayleigh-marginal oracle
    assert pred == pytest.approx(rayleigh_moment(A.kind, A.nu, s), rel=1e-12)
    u = apply_nonlinearity(A, TimeSeries.from_source(batch, j)).values[:, 0]
    se = u.std(ddof=1) / math.sqrt(u.size)
    assert abs(u.mean() - pred) < 3 * se, (u.mean(), pred, se)


# ---- 4 ---------------------------------------------------------------------

@pytest.mark.criterion(4, "covariance series vs Rayleigh variance and 2-d quadrature")
def test_c4_power1():
    s = sigma_j(M11, OU, 0)
    v = u_cross_covariance(M11, OU, P1, 0, 0, 0.0, 40)
    assert abs(v - s * s * (2 - math.pi / 2)) < 1e-4
    assert abs(v - cartesian_modulus_variance(lambda r: r, s)) < 1e-4


@pytest.mark.criterion(4, "covariance series vs Rayleigh variance and 2-d quadrature")
def test_c4_power2():
    s = sigma_j(M11, OU, 0)
    v = u_cross_covariance(M11, OU, P2, 0, 0, 0.0, 2)
    assert v == pytest.approx(4 * s ** 4, rel=1e-13)
    assert abs(v - cartesian_modulus_variance(lambda r: r * r, s)) < 1e-4


# ---- 5 and 6: shared Monte Carlo run ----------------------------------------

@pytest.fixture(scope="module")
def clt_report():
    cfg = config_from_dict({"seed": SEED, "J": [4, 6, 8, 10], "n_paths": 10_000,
                            "transform.A": ["power:1", "power:2"]})
    t0 = time.perf_counter()
    rep = run_clt_experiment(cfg)
    rep.elapsed = time.perf_counter() - t0
    return rep


@pytest.mark.slow
@pytest.mark.criterion(5, "limit covariance: Var(F) at J=10 within 10% of kappa prediction")
def test_c5_limit_variance(clt_report, record_property):
    row = next(r for r in clt_report.for_A("power:2") if r.J == 10)
    pred = row.predicted_cov[0, 0]
    record_property("detail", f"power:2 J=10: sample Var(F) {row.cov[0, 0]:.5f}, predicted "
                              f"{pred:.5f}, MC run {clt_report.elapsed:.0f}s")
    assert abs(row.cov[0, 0] - pred) < 0.10 * pred, (row.cov[0, 0], pred)
    assert clt_report.elapsed < 600


@pytest.mark.slow
@pytest.mark.criterion(5, "limit covariance: Var(F) at J=10 within 10% of kappa prediction")
def test_c5_mean_within_three_se(clt_report):
    for r in clt_report.rows:
        assert abs(r.mean[0]) < 3 * r.se_mean[0], (r.A, r.J, r.mean[0], r.se_mean[0])


@pytest.mark.slow
@pytest.mark.criterion(6, "CLT decay: power:1 d_Kol decreasing, < 0.05 at J=10, power:2 below")
def test_c6_clt_decay(clt_report, record_property):
    d1 = clt_report.d_kol("power:1")
    d2 = clt_report.d_kol("power:2")
    seq = [d1[J] for J in (4, 6, 8, 10)]
    for label, d in (("power:1", d1), ("power:2", d2)):
        vals = ", ".join(f"{d[J]:.4f}" for J in (4, 6, 8, 10))
        record_property("detail", f"{label} d_Kol at J=4,6,8,10: {vals}; fitted slope "
                                  f"{clt_report.slopes[label]:.3f}")
    assert not count_inversions(seq), f"d_Kol not decreasing: {seq}"
    assert d1[10] < 0.05
    assert d2[10] < d1[10], (d2[10], d1[10])


# ---- 7 ---------------------------------------------------------------------

@pytest.mark.criterion(7, "bound machinery: Theta, Stirling, K(J), Wasserstein bounds")
def test_c7_theta_and_stirling():
    assert chaos.theta1(1) == 0
    assert chaos.theta1(2) == pytest.approx(math.sqrt(2), rel=1e-15)
    for ell in range(10, 41):
        r = chaos.theta1(ell + 1) / chaos.theta1(ell)
        assert 2.5 < r <= 3.0
    for ell in range(2, 41, 2):
        assert chaos.stirling_ratio(ell) <= math.sqrt(2 * math.pi * ell)


@pytest.mark.criterion(7, "bound machinery: Theta, Stirling, K(J), Wasserstein bounds")
def test_c7_schedule_and_lower_bounds():
    assert truncation_order(40) == 12
    assert wasserstein_lower_bound(P2, 1.0, 2.0) == pytest.approx(6.0, rel=1e-15)
    m1 = SpectralModel.power_law(0.3, profile="exponential")
    m2 = SpectralModel.power_law(0.8, profile="exponential")
    assert long_memory_slope(M11, m1, m2, 20) == pytest.approx(0.5, rel=0.05)


# ---- 8 ---------------------------------------------------------------------

@pytest.mark.criterion(8, "estimator calibration on exact Gaussian samples")
def test_c8_kolmogorov_calibration(record_property):
    rng = np.random.default_rng(SEED)
    n = 10_000
    d = np.array([empirical_kolmogorov_1d(rng.standard_normal(n), 0.0, 1.0) for _ in range(200)])
    q99 = np.quantile(d, 0.99)
    record_property("detail", f"d_Kol 99th percentile {q99 * math.sqrt(n):.4f}/sqrt(N), "
                              f"mean {d.mean() * math.sqrt(n):.4f}/sqrt(N) over 200 replicates")
    assert q99 < 1.63 / math.sqrt(n)


@pytest.mark.criterion(8, "estimator calibration on exact Gaussian samples")
def test_c8_w1_calibration():
    rng = np.random.default_rng(SEED + 1)
    n = 10_000
    w = [empirical_w1_1d(rng.standard_normal(n), 0.0, 1.0) for _ in range(200)]
    assert max(w) < 5 / math.sqrt(n)


# ---- 9 ---------------------------------------------------------------------

DET_CONFIG = """\
seed = 99
n_paths = 100
J = [2, 3]
[wavelet]
alpha = 1.0
gamma = 1.0
[transform]
A = [power:1, log]
j = [0, 1]
t = [0.0, 0.5]
[bounds]
K = 20
[grid]
n_time = 512
"""


@pytest.mark.criterion(9, "determinism: byte-identical CSV on rerun")
@pytest.mark.parametrize("command", cli.SUBCOMMANDS)
def test_c9_byte_identical(tmp_path, command):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(DET_CONFIG)
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        argv = [command, "--config", str(cfg), "--out", str(out)]
        if command in ("simulate", "clt"):
            argv.append("--dump-paths")
        assert cli.main(argv) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names and names == sorted(p.name for p in outs[1].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
    assert not mismatch and not errors
