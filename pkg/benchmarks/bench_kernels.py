"""Compare the compiled and numpy kernel backends.

Times the two hot functions, `forward` and `loss_and_grads_core`, on
identical seeded inputs at several batch sizes. Before timing anything
the outputs of both backends are checked against each other; a
disagreement aborts the run, since a fast wrong kernel is not worth
reporting.

Per cell the benchmark calibrates an iteration count so one sample
takes roughly --target-ms, collects --repeats samples, and reports the
fastest one (least scheduler noise). Speedup is python time over
compiled time, so values below 1.0 mean numpy won that cell; with a
multithreaded BLAS that is the expected outcome at large batches.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --batch-sizes 1,4,32 --repeats 9
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from etadm._kernels import available_backends, load_backend


def make_inputs(rng, batch, d_in, d_hidden, actions):
    X = rng.standard_normal((batch, d_in))
    labels = rng.integers(0, actions, size=batch).astype(np.intp)
    W_fuse = rng.standard_normal((d_hidden, d_in)) * 0.1
    b_fuse = rng.standard_normal(d_hidden) * 0.1
    W_pred = rng.standard_normal((actions, d_hidden)) * 0.1
    b_pred = rng.standard_normal(actions) * 0.1
    return X, labels, W_fuse, b_fuse, W_pred, b_pred


def check_agreement(backends, inputs):
    """Largest elementwise gap between backends across both kernels."""
    X, labels, W_fuse, b_fuse, W_pred, b_pred = inputs
    worst = 0.0
    outs = [b.forward(X, W_fuse, b_fuse, W_pred, b_pred) for b in backends]
    for ref, other in zip(outs[0], outs[1]):
        worst = max(worst, float(np.max(np.abs(np.asarray(ref) - np.asarray(other)))))
    grads = [
        b.loss_and_grads_core(X, labels, W_fuse, b_fuse, W_pred, b_pred)
        for b in backends
    ]
    worst = max(worst, abs(grads[0][0] - grads[1][0]))
    for ref, other in zip(grads[0][1:], grads[1][1:]):
        worst = max(worst, float(np.max(np.abs(np.asarray(ref) - np.asarray(other)))))
    return worst


def time_call(fn, args, repeats, target_s):
    # calibrate: grow the inner loop until one sample costs ~target_s
    iterations = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(iterations):
            fn(*args)
        elapsed = time.perf_counter() - t0
        if elapsed >= target_s / 4 or iterations >= 1 << 20:
            break
        iterations *= 2
    iterations = max(1, int(iterations * target_s / max(elapsed, 1e-9)))

    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(iterations):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / iterations)
    return best


def fmt_us(seconds):
    us = seconds * 1e6
    if us < 100:
        return f"{us:8.2f}"
    return f"{us:8.0f}"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d-in", type=int, default=832,
                        help="input width (default matches context 768 + state 64)")
    parser.add_argument("--d-hidden", type=int, default=128)
    parser.add_argument("--actions", type=int, default=13)
    parser.add_argument("--batch-sizes", default="1,8,32,256",
                        help="comma separated batch sizes")
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--target-ms", type=float, default=100.0,
                        help="rough duration of one timing sample")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    names = available_backends()
    if "compiled" not in names:
        print("compiled backend is not built; timing python only", file=sys.stderr)
    backends = [load_backend(n) for n in names]

    batches = [int(s) for s in args.batch_sizes.split(",") if s.strip()]
    rng = np.random.default_rng(args.seed)
    target_s = args.target_ms / 1000.0

    print(f"backends: {', '.join(names)}")
    print(f"dims: d_in={args.d_in} d_hidden={args.d_hidden} actions={args.actions}; "
          f"repeats={args.repeats}, best-of shown, times per call")

    if len(backends) == 2:
        gap = check_agreement(backends, make_inputs(
            rng, max(batches), args.d_in, args.d_hidden, args.actions))
        print(f"agreement: max elementwise gap {gap:.3e}")
        if gap > 1e-8:
            print("backends disagree beyond rounding; refusing to time", file=sys.stderr)
            return 1

    for kernel in ("forward", "loss_and_grads_core"):
        print(f"\n{kernel}")
        header = f"  {'batch':>6}" + "".join(f"  {n + ' us':>12}" for n in names)
        if len(names) == 2:
            header += f"  {'speedup':>8}"
        print(header)
        for batch in batches:
            X, labels, W_fuse, b_fuse, W_pred, b_pred = make_inputs(
                rng, batch, args.d_in, args.d_hidden, args.actions)
            if kernel == "forward":
                call_args = (X, W_fuse, b_fuse, W_pred, b_pred)
            else:
                call_args = (X, labels, W_fuse, b_fuse, W_pred, b_pred)
            times = {}
            for name, backend in zip(names, backends):
                times[name] = time_call(
                    getattr(backend, kernel), call_args, args.repeats, target_s)
            row = f"  {batch:>6}" + "".join(f"  {fmt_us(times[n]):>12}" for n in names)
            if len(names) == 2:
                row += f"  {times['python'] / times['compiled']:>7.2f}x"
            print(row)

    return 0


if __name__ == "__main__":
    sys.exit(main())
