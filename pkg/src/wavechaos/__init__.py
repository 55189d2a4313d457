"""Moving-averaged modulus wavelet transforms of stationary Gaussian processes."""
from .chaos import ChaosTable, Nonlinearity, build_chaos_table
from .errors import ConfigError, DomainError, NumericalError, SizeError, WavechaosError
from .kernels import BACKEND
from .spectra import SpectralModel
from .wavelets import AnalyticWavelet, LowPass

__version__ = "0.1.0"

__all__ = [
    "AnalyticWavelet", "BACKEND", "ChaosTable", "ConfigError", "DomainError",
    "LowPass", "Nonlinearity", "NumericalError", "SizeError", "SpectralModel",
    "WavechaosError", "build_chaos_table",
]
