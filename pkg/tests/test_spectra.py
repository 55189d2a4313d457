import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy import integrate

from wavechaos.errors import DomainError
from wavechaos.spectra import (SpectralModel, cell_integral, cell_masses, covariance,
                               cumulative_mass, density)

OU1 = SpectralModel.ou(1.0)
PL_CONST = SpectralModel.power_law(0.5)
PL_EXP = SpectralModel.power_law(0.5, profile="exponential")

MODELS = [
    OU1,
    SpectralModel.ou(2.5, variance=3.0),
    PL_CONST,
    PL_EXP,
    SpectralModel.power_law(0.3, cx_at_0=2.0, profile="rational", profile_scale=0.7),
    SpectralModel.power_law(1.0, profile="exponential", profile_scale=2.0),
]


def test_ou_density_values():
    assert density(OU1, 0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert density(OU1, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)


def test_power_law_density_value():
    assert density(PL_CONST, 4.0) == pytest.approx(0.5, rel=1e-15)


def test_singular_density_at_zero_raises():
    with pytest.raises(DomainError):
        density(PL_CONST, 0.0)
    # β = 1 is bounded at the origin
    assert density(SpectralModel.power_law(1.0), 0.0) == 1.0


@pytest.mark.parametrize("model", MODELS)
def test_density_even_and_nonnegative(model):
    lam = np.linspace(0.01, 40, 997)
    assert np.allclose(density(model, lam), density(model, -lam), rtol=1e-14, atol=0)
    assert np.all(density(model, lam) >= 0)


def test_ou_covariance_closed_form():
    assert covariance(SpectralModel.ou(2.0), 0.0) == 1.0
    assert covariance(SpectralModel.ou(2.0), 0.5) == pytest.approx(math.exp(-1), rel=1e-15)


def test_ou_density_fourier_quadrature_matches_exponential():
    # independent route: QAWF on the closed-form density
    c = 1.3
    m = SpectralModel.ou(c)
    for t in np.linspace(0.25, 5, 20):
        val = 2 * integrate.quad(lambda x: float(density(m, x)), 0, np.inf, weight="cos",
                                 wvar=t)[0]
        assert val == pytest.approx(math.exp(-c * t), abs=1e-6)


def test_power_law_covariance_at_zero_exponential_profile():
    # 2 ∫_0^∞ e^{-λ} λ^{-1/2} dλ = 2Γ(1/2) = 2√π
    assert covariance(PL_EXP, 0.0) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)


def test_power_law_covariance_constant_profile_at_zero_raises():
    with pytest.raises(DomainError):
        covariance(PL_CONST, 0.0)


def test_power_law_covariance_constant_profile_closed_form():
    # 2 ∫_0^∞ cos(tλ) λ^{β-1} dλ = 2Γ(β) cos(πβ/2) |t|^{-β}
    for beta in (0.3, 0.5, 0.8):
        m = SpectralModel.power_law(beta)
        for t in (0.5, 2.0, 7.0):
            exact = 2 * math.gamma(beta) * math.cos(math.pi * beta / 2) * t ** -beta
            assert covariance(m, t) == pytest.approx(exact, rel=1e-6)


def test_power_law_covariance_exponential_profile_closed_form():
    # 2 ∫_0^∞ cos(tλ) e^{-λ} λ^{β-1} dλ = 2Γ(β) cos(β atan t) / (1+t²)^{β/2}
    beta = 0.5
    for t in (0.3, 1.0, 4.0):
        exact = 2 * math.gamma(beta) * math.cos(beta * math.atan(t)) / (1 + t * t) ** (beta / 2)
        assert covariance(PL_EXP, t) == pytest.approx(exact, rel=1e-6)


def test_cell_integral_examples():
    h = 0.37
    assert cell_integral(PL_CONST, -h, h) == pytest.approx(4 * math.sqrt(h), rel=1e-14)
    assert cell_integral(OU1, -np.inf, np.inf) == pytest.approx(1.0, abs=1e-6)
    exp1 = SpectralModel.power_law(1.0, profile="exponential")
    assert cell_integral(exp1, 0.0, np.inf) == pytest.approx(1.0, rel=1e-12)


def test_cell_integral_rejects_empty_cell():
    with pytest.raises(DomainError):
        cell_integral(OU1, 1.0, 1.0)


@pytest.mark.parametrize("model", MODELS)
@settings(max_examples=40, deadline=None)
@given(a=st.floats(-30, 30), gaps=st.tuples(st.floats(1e-3, 20), st.floats(1e-3, 20)))
@example(a=1e-8, gaps=(1.0, 0.25))  # cell starting just above the singularity
def test_cell_integral_additive(model, a, gaps):
    b = a + gaps[0]
    c = b + gaps[1]
    lhs = cell_integral(model, a, b) + cell_integral(model, b, c)
    assert lhs == pytest.approx(cell_integral(model, a, c), abs=1e-10)


@pytest.mark.parametrize("model", MODELS)
def test_closed_form_masses_match_quadrature_cells(model):
    edges = np.array([-7.0, -1.5, -0.02, 0.01, 0.4, 2.0, 11.0])
    vec = cell_masses(model, edges)
    ref = [cell_integral(model, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    assert np.allclose(vec, ref, rtol=1e-10, atol=1e-14)
    assert np.all(vec >= 0)


def test_rational_mass_continuous_across_branch():
    m = SpectralModel.power_law(0.3, profile="rational", profile_scale=2.0)
    x = np.array([2.0 - 1e-9, 2.0, 2.0 + 1e-9])
    v = cumulative_mass(m, x)
    assert abs(v[0] - v[1]) < 1e-8 and abs(v[2] - v[1]) < 1e-8


def test_cumulative_mass_to_infinity_matches_covariance():
    for m in MODELS:
        if not m.finite_variance:
            continue
        assert 2 * float(cumulative_mass(m, np.inf)) == pytest.approx(covariance(m, 0.0),
                                                                        rel=1e-12)


def test_invalid_parameters_rejected():
    for bad in (lambda: SpectralModel.ou(0.0), lambda: SpectralModel.power_law(0.0),
                lambda: SpectralModel.power_law(1.2),
                lambda: SpectralModel.power_law(0.5, profile="box")):
        with pytest.raises(DomainError):
            bad()
