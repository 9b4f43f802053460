"""Time the Lindblad right-hand side: compiled extension versus numpy fallback.

    python3 benchmarks/bench_fock_kernel.py [--cutoffs 3 4 5 6 7 8] [--repeat 20]

Also times one full oracle integration per backend at the default
low-temperature point.
"""

from __future__ import annotations

import argparse
import math
import time
import timeit

import numpy as np

from trimerheat import kernels
from trimerheat.fock import FockConfig, integrate_to_steady
from trimerheat.model import TrimerParams


def bench_rhs(n_max: int, repeat: int) -> dict[str, float]:
    basis = kernels.SectorBasis(n_max)
    rng = np.random.default_rng(0)
    rho = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    h = np.array([[0, 1, 1j], [1, 0, 1], [-1j, 1, 0]])
    loss, gain = np.array([0.04, 0.03, 0.02]), np.array([0.01, 0.02, 0.01])
    out = {}
    for backend in kernels.available_backends():
        op = kernels.LindbladRHS(basis, h, loss, gain, backend=backend)
        buf = np.empty_like(rho)
        op(rho, buf)
        out[backend] = min(timeit.repeat(lambda: op(rho, buf), number=1, repeat=repeat))
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'n_max':>5} {'packed':>8} " + " ".join(f"{b + ' [ms]':>14}" for b in backends) + "  speedup")
    for n in args.cutoffs:
        t = bench_rhs(n, args.repeat)
        size = kernels.SectorBasis(n).size
        speed = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        cells = " ".join(f"{1e3 * t[b]:14.3f}" for b in backends)
        print(f"{n:5d} {size:8d} {cells}  {speed:6.1f}x")

    p = TrimerParams.from_ratio(0.3, theta=math.pi / 2, T_hot=0.4, T_cold=0.25)
    for b in backends:
        t0 = time.perf_counter()
        res = integrate_to_steady(p, cfg=FockConfig(backend=b))
        print(f"oracle integration [{b}]: {time.perf_counter() - t0:.2f} s (n_max {res.cutoff}, t = {res.time:.0f})")


if __name__ == "__main__":
    main()
