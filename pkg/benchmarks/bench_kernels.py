"""Compare the compiled and pure-Python kernel backends.

Run ``python benchmarks/bench_kernels.py``.  Prints per-kernel timings
for both backends and, for context, a profile split of one full
``F``-sample batch (RNG, FFT, window sums).
"""
import argparse
import time

import numpy as np

from wavechaos import _pykernels
from wavechaos.config import config_from_dict
from wavechaos.gpsim import build_grid, draw_cells, path_seed, synthesize_batch
from wavechaos.harness import plan_paths
from wavechaos.transform import make_f_sample
from wavechaos.wavelets import sigma_j

try:
    from wavechaos import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_table():
    rng = np.random.default_rng(0)
    w = rng.standard_normal((256, 2048)) + 1j * rng.standard_normal((256, 2048))
    wts = rng.random(2048)
    cdf = np.sort(rng.random(100_000))
    signs = [1, -1] * 4
    cases = [
        ("window sum, |w|", lambda m: m.modulus_window_sum(w, wts, 0, 1.0)),
        ("window sum, |w|^1.5", lambda m: m.modulus_window_sum(w, wts, 0, 1.5)),
        ("window sum, ln|w|", lambda m: m.modulus_window_sum(w, wts, 1, 0.0)),
        ("KS sup, n=1e5", lambda m: m.ks_sup(cdf)),
        ("sign split, l=8", lambda m: m.sign_split_sum(signs)),
    ]
    print(f"{'kernel':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, fn in cases:
        tp = best_of(lambda: fn(_pykernels))
        if _ckernels is None:
            print(f"{name:<22}{tp * 1e3:>14.2f}{'n/a':>14}{'':>10}")
            continue
        tc = best_of(lambda: fn(_ckernels))
        print(f"{name:<22}{tp * 1e3:>14.2f}{tc * 1e3:>14.2f}{tp / tc:>10.1f}")


def pipeline_split(J, n_paths):
    cfg = config_from_dict({"seed": 1, "J": [J]})
    plan = plan_paths(cfg, J)
    js = list(cfg.j_list)
    grid = build_grid(cfg.model, cfg.wavelet, js, plan.n_time, plan.dt)
    sig = {j: sigma_j(cfg.wavelet, cfg.model, j) for j in js}
    seeds = [path_seed(1, 0, J, p) for p in range(n_paths)]
    t_rng = best_of(lambda: [draw_cells(grid, s) for s in seeds], 3)
    t_syn = best_of(lambda: synthesize_batch(cfg.model, cfg.wavelet, grid, js, seeds,
                                             t_center=plan.t_center,
                                             index_range=plan.index_range), 3)
    batch = synthesize_batch(cfg.model, cfg.wavelet, grid, js, seeds, t_center=plan.t_center,
                             index_range=plan.index_range)
    t_f = best_of(lambda: make_f_sample(batch, cfg.A[0], cfg.lowpass, J, cfg.spec, sig), 3)
    total = t_syn + t_f
    print(f"\nJ={J}, n_time={plan.n_time}, {n_paths} paths:")
    print(f"  RNG draws      {t_rng * 1e3:9.1f} ms  ({100 * t_rng / total:4.1f}%)")
    print(f"  FFT + scaling  {(t_syn - t_rng) * 1e3:9.1f} ms  ({100 * (t_syn - t_rng) / total:4.1f}%)")
    print(f"  window sums    {t_f * 1e3:9.1f} ms  ({100 * t_f / total:4.1f}%)")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--J", type=int, default=8)
    ap.add_argument("--paths", type=int, default=64)
    args = ap.parse_args()
    kernel_table()
    pipeline_split(args.J, args.paths)
