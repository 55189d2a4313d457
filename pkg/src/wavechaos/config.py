"""Run configuration: a flat, sectioned ``key = value`` text format.

Grammar
-------
* ``# ...`` and ``; ...`` lines are comments; blank lines are ignored.
* ``[section]`` starts a section; a key ``k`` inside it has the key path
  ``section.k``.  Keys before the first section are top-level.
* Values are Python literals (``3``, ``0.5``, ``[4, 6, 8]``, ``"text"``),
  bare words (``ou``, ``power:1``, ``auto``, ``true``) or bracketed lists
  mixing both (``[power:1, log]``).

See README.md for the list of keys and defaults.
"""
from __future__ import annotations

import ast
import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .chaos import Nonlinearity
from .errors import ConfigError, DomainError
from .spectra import PROFILES, SpectralModel
from .wavelets import LOWPASS_KINDS, AnalyticWavelet, LowPass

J_CAP = 12
DEFAULT_N_PATHS = 10_000
MIN_N_PATHS = 100

_KNOWN = {
    "seed", "n_paths", "J", "J_cap", "output_dir",
    "model.kind", "model.c", "model.variance", "model.beta", "model.cx_at_0",
    "model.profile", "model.profile_scale", "model.mean",
    "wavelet.alpha", "wavelet.gamma",
    "lowpass.kind",
    "transform.A", "transform.j", "transform.t",
    "bounds.eps", "bounds.K",
    "grid.dt", "grid.oversample", "grid.n_time",
    "tolerance.kappa_rtol",
}


@dataclass
class RunConfig:
    """Validated settings shared by every subcommand."""

    model: SpectralModel
    wavelet: AnalyticWavelet
    A: tuple
    seed: int
    lowpass: LowPass = field(default_factory=LowPass)
    j_list: tuple = (0,)
    t_list: tuple = (0.0,)
    J_list: tuple = (4, 6, 8)
    n_paths: int = DEFAULT_N_PATHS
    output_dir: str = "."
    eps: float = 0.1
    K: int = 200
    dt: float | None = None
    oversample: float = 1.0
    n_time: int = 4096
    J_cap: int = J_CAP
    tolerances: dict = field(default_factory=lambda: {"kappa_rtol": 1e-9})

    @property
    def spec(self) -> list:
        """``(j_m, t_m)`` pairs of the statistic."""
        return list(zip(self.j_list, self.t_list))


def _literal(raw: str):
    s = raw.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(s)
    except (ValueError, SyntaxError):
        pass
    if s.startswith("[") and s.endswith("]"):
        # list of bare words, e.g. [power:1, log]
        inner = s[1:-1].strip()
        return [_literal(item) for item in inner.split(",")] if inner else []
    return s


def read_key_values(text: str) -> dict:
    """Parse config text into ``{key_path: value}``."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       comment_prefixes=("#", ";"), delimiters=("=",),
                                       strict=True)
    parser.optionxform = str
    try:
        parser.read_string("[__top__]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    out = {}
    for sec in parser.sections():
        for key, raw in parser.items(sec):
            path = key if sec == "__top__" else f"{sec}.{key}"
            out[path] = _literal(raw)
    return out


class _Collector:
    def __init__(self, values: dict):
        self.values = values
        self.errors = []

    def get(self, key, default=None, kind=float, check=None, message="invalid value"):
        if key not in self.values:
            return default
        raw = self.values[key]
        try:
            if kind is int:
                if isinstance(raw, bool) or not float(raw).is_integer():
                    raise ValueError
                val = int(raw)
            elif kind is float:
                if isinstance(raw, bool):
                    raise ValueError
                val = float(raw)
                if not math.isfinite(val):
                    raise ValueError
            else:
                val = kind(raw)
        except (TypeError, ValueError):
            self.errors.append(f"{key}: expected {kind.__name__}, got {raw!r}")
            return default
        if check is not None and not check(val):
            self.errors.append(f"{key}: {message} (got {raw!r})")
            return default
        return val

    def get_list(self, key, default, kind=float):
        if key not in self.values:
            return default
        raw = self.values[key]
        items = list(raw) if isinstance(raw, (list, tuple)) else [raw]
        out = []
        for i, item in enumerate(items):
            try:
                if kind is int and (isinstance(item, bool) or not float(item).is_integer()):
                    raise ValueError
                out.append(kind(item))
            except (TypeError, ValueError):
                self.errors.append(f"{key}[{i}]: expected {kind.__name__}, got {item!r}")
        return tuple(out)


def config_from_dict(values: dict) -> RunConfig:
    """Validate a key-path mapping; every problem is reported at once."""
    c = _Collector(values)
    for key in sorted(values):
        if key not in _KNOWN:
            c.errors.append(f"{key}: unknown key")

    pos = (lambda v: v > 0, "must be positive")
    seed = c.get("seed", kind=int, check=lambda v: v >= 0, message="must be nonnegative")
    if "seed" not in values:
        c.errors.append("seed: required (runs are never seeded from the clock)")

    kind = str(values.get("model.kind", "ou")).lower()
    model = None
    if kind == "ou":
        cc = c.get("model.c", 1.0, float, *pos)
        var = c.get("model.variance", 1.0, float, *pos)
        mean = c.get("model.mean", 0.0)
        try:
            model = SpectralModel.ou(cc, var, mean)
        except DomainError as exc:
            c.errors.append(f"model: {exc}")
    elif kind == "powerlaw":
        beta = c.get("model.beta", None, float, lambda v: 0 < v <= 1, "must lie in (0, 1]")
        if "model.beta" not in values:
            c.errors.append("model.beta: required for kind = powerlaw")
        cx = c.get("model.cx_at_0", 1.0, float, *pos)
        prof = str(values.get("model.profile", "exponential")).lower()
        if prof not in PROFILES:
            c.errors.append(f"model.profile: unknown profile {prof!r}; valid: {', '.join(PROFILES)}")
        scale = c.get("model.profile_scale", 1.0, float, *pos)
        mean = c.get("model.mean", 0.0)
        if beta is not None and prof in PROFILES:
            model = SpectralModel.power_law(beta, cx, prof, scale, mean)
    else:
        c.errors.append(f"model.kind: unknown kind {kind!r}; valid: ou, powerlaw")

    alpha = c.get("wavelet.alpha", 3.0, float, *pos)
    gamma = c.get("wavelet.gamma", 1.0, float, *pos)
    lp_kind = str(values.get("lowpass.kind", "gaussian")).lower()
    if lp_kind not in LOWPASS_KINDS:
        c.errors.append(f"lowpass.kind: unknown kind {lp_kind!r}; valid kinds: "
                        f"{', '.join(LOWPASS_KINDS)}")
        lp_kind = "gaussian"

    raw_a = values.get("transform.A", "power:1")
    A = []
    for item in (raw_a if isinstance(raw_a, (list, tuple)) else str(raw_a).split(",")):
        try:
            A.append(Nonlinearity.parse(str(item)))
        except DomainError as exc:
            c.errors.append(f"transform.A: {exc}")

    j_list = c.get_list("transform.j", (0,), int)
    t_list = c.get_list("transform.t", tuple(0.0 for _ in j_list), float)
    if len(j_list) != len(t_list):
        c.errors.append(f"transform.t: length {len(t_list)} does not match transform.j "
                        f"length {len(j_list)}")
    if not j_list:
        c.errors.append("transform.j: at least one scale required")
    if len(j_list) > 2:
        c.errors.append("transform.j: at most 2 coordinates (d <= 2) are supported")

    J_cap = c.get("J_cap", J_CAP, int, *pos)
    J_list = c.get_list("J", (4, 6, 8), int)
    if not J_list:
        c.errors.append("J: at least one value required")
    if list(J_list) != sorted(set(J_list)):
        c.errors.append("J: must be strictly ascending")
    if any(J < 0 for J in J_list):
        c.errors.append("J: values must be nonnegative")

    n_paths = c.get("n_paths", DEFAULT_N_PATHS, int, lambda v: v >= MIN_N_PATHS,
                    f"must be at least {MIN_N_PATHS}")
    eps = c.get("bounds.eps", 0.1, float, lambda v: 0 < v <= 0.5, "must lie in (0, 0.5]")
    K = c.get("bounds.K", 200, int, lambda v: v >= 2 and v % 2 == 0 and v <= 200,
              "must be even in [2, 200]")
    dt_raw = values.get("grid.dt", "auto")
    dt = None if str(dt_raw).lower() == "auto" else c.get("grid.dt", None, float, *pos)
    oversample = c.get("grid.oversample", 1.0, float, lambda v: v >= 1, "must be >= 1")
    n_time = c.get("grid.n_time", 4096, int, lambda v: v >= 8 and v & (v - 1) == 0,
                   "must be a power of two >= 8")
    rtol = c.get("tolerance.kappa_rtol", 1e-9, float, *pos)
    out_dir = str(values.get("output_dir", "."))

    if c.errors:
        raise ConfigError(c.errors)
    return RunConfig(model=model, wavelet=AnalyticWavelet(alpha, gamma), A=tuple(A), seed=seed,
                     lowpass=LowPass(lp_kind), j_list=tuple(j_list), t_list=tuple(t_list),
                     J_list=tuple(J_list), n_paths=n_paths, output_dir=out_dir, eps=eps, K=K,
                     dt=dt, oversample=oversample, n_time=n_time, J_cap=J_cap,
                     tolerances={"kappa_rtol": rtol})


def check_J_cap(config: RunConfig):
    """Reject simulation levels above ``config.J_cap`` (desk-scale limit)."""
    over = [J for J in config.J_list if J > config.J_cap]
    if over:
        raise ConfigError(f"J: values {over} exceed the simulation cap J_cap={config.J_cap}")


def parse_config(path) -> RunConfig:
    """Read and validate a config file.

    Raises
    ------
    ConfigError
        Listing every missing or invalid key with its key path.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return config_from_dict(read_key_values(p.read_text()))
