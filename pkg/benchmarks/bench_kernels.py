"""Compare the compiled kernels with the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--points 5000]
"""
import argparse
import time

import numpy as np

from discoverability import _backend, catalog
from discoverability.integrate import IntegratorConfig, flow


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--points", type=int, default=5000, help="points for the pair-count kernel")
    ap.add_argument("--t-end", type=float, default=50.0, help="Lorenz integration horizon")
    args = ap.parse_args(argv)

    if "compiled" not in _backend.BACKENDS:
        print("compiled kernels not built; only the fallback is available")
    lorenz = catalog.get("lorenz")
    cfg = IntegratorConfig(t_end=args.t_end)
    pts = np.random.default_rng(0).uniform(-1, 1, (args.points, 3))
    radii = np.geomspace(2.0 ** -9, 0.5, 16)

    cases = {
        f"dopri5 lorenz t_end={args.t_end:g}": lambda b: flow(lorenz, [1.0, 1.0, 1.0], cfg, backend=b).states,
        f"pair counts n={args.points}": lambda b: _backend.pair_counts(pts, radii, backend=b),
    }
    print(f"{'kernel':32s} {'backend':10s} {'seconds':>10s} {'speedup':>9s}")
    for name, run in cases.items():
        base = None
        results = {}
        for backend in reversed(_backend.BACKENDS):  # fallback first
            secs, results[backend] = best_of(lambda: run(backend), args.repeat)
            base = base or secs
            print(f"{name:32s} {backend:10s} {secs:10.4f} {base / secs:8.1f}x")
        if len(results) == 2:
            # chaotic flows amplify round-off, so only the first samples are compared
            a, b = results["compiled"][:100], results["python"][:100]
            print(f"{'':32s} max |compiled - python| over the first samples: {np.max(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()
