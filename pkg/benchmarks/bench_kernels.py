#!/usr/bin/env python3
"""Benchmark the compiled LSTM kernels against the pure-NumPy fallback.

Times one forward+backward pass over a training-shaped batch for each
available backend and reports the speedup, plus the max absolute
disagreement between backends on identical inputs.

Usage: python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import time

import numpy as np

from powercast.kernels import available_backends

SHAPES = [
    # (batch, steps, hidden)  - full protocol and desk-scale shapes
    (32, 90, 100),
    (32, 90, 16),
    (256, 90, 100),
]


def run_once(mod, x, w, b, dh):
    hs, cs, g = mod.lstm_forward(x, w, b)
    dw, db = mod.lstm_backward(x, w, hs, cs, g, dh)
    return hs, dw, db


def bench(mod, x, w, b, dh, repeat):
    run_once(mod, x, w, b, dh)  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        run_once(mod, x, w, b, dh)
    return (time.perf_counter() - start) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    rng = np.random.default_rng(0)

    for batch, steps, hidden in SHAPES:
        x = rng.standard_normal((batch, steps, 1))
        w = rng.standard_normal((4 * hidden, hidden + 1)) * 0.2
        b = rng.standard_normal(4 * hidden) * 0.1
        dh = rng.standard_normal((batch, hidden))

        times = {}
        outs = {}
        for name, mod in backends.items():
            times[name] = bench(mod, x, w, b, dh, args.repeat)
            outs[name] = run_once(mod, x, w, b, dh)

        line = f"batch={batch:4d} steps={steps} hidden={hidden:4d}: "
        line += "  ".join(f"{n}={t * 1e3:8.2f} ms" for n, t in times.items())
        if len(times) == 2:
            line += f"  speedup={times['numpy'] / times['cython']:5.2f}x"
            diff = max(
                np.abs(a - b).max() for a, b in zip(outs["numpy"], outs["cython"])
            )
            line += f"  max|diff|={diff:.2e}"
        print(line)


if __name__ == "__main__":
    main()
