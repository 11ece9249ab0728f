"""Compare the compiled and numpy decoding kernels.

    python3 benchmarks/bench_kernels.py [--frames 2000] [--snr 5.0]

Prints per-frame time of the full parallel decoder and of a batch of SC
component decodes for each available backend, and checks both backends
produce identical output.
"""
import argparse
import math
import time

import numpy as np

from gncoset.channel import ChannelParams
from gncoset.code import construct_product_gaussian_approx, encode
from gncoset.decoder import decode_batch, default_schedule
from gncoset.kernels import available_backends, get_backend
from gncoset.sc import MINSUM, frozen_mask


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--K", type=int, default=220)
    ap.add_argument("--frames", type=int, default=2000)
    ap.add_argument("--snr", type=float, default=5.0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    spec = construct_product_gaussian_approx(args.n, args.K, 6.8)
    rng = np.random.default_rng(0)
    x = encode(rng.integers(0, 2, (args.frames, spec.K), dtype=np.uint8), spec)
    sigma2 = ChannelParams(args.snr).sigma2
    llrs = 2.0 * (1.0 - 2.0 * x + math.sqrt(sigma2) * rng.standard_normal(x.shape)) / sigma2
    comp = llrs.reshape(-1, spec.sqrt_n)
    mask = frozen_mask(spec.row_frozen, spec.sqrt_n)

    print(f"N={spec.N} K={spec.K} frames={args.frames} Es/N0={args.snr} dB")
    print(f"{'backend':<8} {'decoder us/frame':>17} {'SC us/component':>16}")
    results = {}
    for name in available_backends():
        frames = args.frames if name == "cython" else min(args.frames, 200)
        t_dec, out = best_of(lambda: decode_batch(llrs[:frames], spec, default_schedule(), 8, sigma2,
                                                  backend=name), args.repeats)
        kern = get_backend(name)
        t_sc, _ = best_of(lambda: kern.sc_decode_batch(comp, mask, MINSUM), args.repeats)
        results[name] = (t_dec / frames, out)
        print(f"{name:<8} {1e6 * t_dec / frames:>17.1f} {1e6 * t_sc / len(comp):>16.2f}")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        frames = len(py[1][0])
        same = all(np.array_equal(a, b[:frames]) for a, b in zip(py[1], cy[1]))
        print(f"speedup {py[0] / cy[0]:.1f}x, outputs identical: {same}")


if __name__ == "__main__":
    main()
