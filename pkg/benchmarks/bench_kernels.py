"""Timing comparison between the compiled stepping kernels and the numpy fallback.

Run from the repository root after building the extension in place::

    python3 benchmarks/bench_kernels.py --dims 2,4,8,16 --steps 20000

Each micro-benchmark cell is the median of ``--repeats`` runs. The
end-to-end row propagates the shifted qubit geodesic at the requested step
count, so it includes everything around the kernels (midpoint evaluation,
batching, sampling bookkeeping) and shows what the compiled path buys in
practice rather than in isolation.
"""

import argparse
import statistics
import time

import numpy as np

from adialab import _kern, propagator, schedule, spectral
from adialab._kern import _fallback


def hermitian_stack(rng, n, dim):
    m = rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))
    return np.ascontiguousarray((m + m.conj().swapaxes(-1, -2)) / 2)


def median_time(fn, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def time_backends(fn, backends, repeats):
    out = {}
    for name in backends:
        prev = _kern.use(name)
        try:
            out[name] = median_time(fn, repeats)
        finally:
            _kern.use(prev)
    return out


def row(label, timings):
    cells = [f"{label:<28}"]
    for name in ("numpy", "cython"):
        cells.append(f"{timings[name] * 1e3:10.3f} ms" if name in timings else " " * 13)
    if "cython" in timings:
        cells.append(f"{timings['numpy'] / timings['cython']:7.2f}x")
    print("  ".join(cells))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", default="2,4,8,16",
                        help="comma-separated matrix dimensions (default 2,4,8,16)")
    parser.add_argument("--steps", type=int, default=20000,
                        help="batch length / propagation step count (default 20000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="runs per cell, median reported (default 5)")
    args = parser.parse_args(argv)
    dims = [int(d) for d in args.dims.split(",") if d.strip()]

    backends = ["numpy"] + (["cython"] if _kern.HAVE_EXT else [])
    if not _kern.HAVE_EXT:
        print("compiled extension not available; timing the numpy fallback only\n")

    header = f"{'operation':<28}  {'numpy':>13}  {'cython':>13}  speedup"
    print(f"kernel micro-benchmarks: steps={args.steps}, median of {args.repeats}")
    print(header)
    rng = np.random.default_rng(0)
    for dim in dims:
        hs = hermitian_stack(rng, args.steps, dim)
        us = _fallback.expi_herm_batch(hs, 0.01)
        psi0 = np.zeros(dim, dtype=complex)
        psi0[0] = 1.0

        def run_expi():
            _kern.expi_herm_batch(hs, 0.01)

        def run_chain():
            _kern.chain_apply(us, psi0.copy())

        row(f"expi_herm_batch dim={dim}", time_backends(run_expi, backends, args.repeats))
        row(f"chain_apply     dim={dim}", time_backends(run_chain, backends, args.repeats))

    sched = schedule.QubitGeodesic(1.0)
    trk = spectral.track(sched, 0, 2001)
    shifted = spectral.shift_schedule(sched, trk)
    strk = spectral.track(shifted, 0, 2001)
    cfg = propagator.PropagationConfig(T=20.0, steps=max(args.steps, propagator.stability_steps(20.0, strk.h_max)))

    def run_propagate():
        propagator.propagate(shifted, strk, cfg)

    print(f"\nend-to-end: shifted qubit geodesic, T=20, steps={cfg.steps}")
    print(header)
    row("propagate", time_backends(run_propagate, backends, args.repeats))


if __name__ == "__main__":
    main()
