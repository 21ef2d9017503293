"""Time each hot kernel under numba and under its numpy twin.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Results agree between twins (checked here too); only speed differs.
"""
import argparse
import time

import numpy as np

from jcdisc import _accel
from jcdisc.core import ChannelProblem, CostSpec, DiscreteChannel
from jcdisc.sim import LlrtSpec, TypeComposition, _class_tables


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)

    pts = rng.random((200_000, 3)).round(3)
    _, keys = _accel.pareto_order_and_keys(pts)
    yield "pareto (200k pts)", (lambda: _accel.pareto_sweep_numba(keys)), \
        (lambda: _accel.pareto_sweep_numpy(keys)), np.array_equal

    bsc = ChannelProblem(DiscreteChannel.bsc(0.1), DiscreteChannel.bsc(0.1),
                         DiscreteChannel.bsc(0.3), CostSpec.free(2))
    x = np.repeat([0, 1], [5, 5]).astype(np.int64)
    cdf = np.cumsum(bsc.w.matrix, axis=1)
    u = rng.random((100_000, x.size))
    tab = np.ascontiguousarray(bsc.log_ratio)
    yield "monte-carlo llr (1e5 x 10)", (lambda: _accel.mc_llr_numba(u, x, cdf, tab)), \
        (lambda: _accel.mc_llr_numpy(u, x, cdf, tab)), np.array_equal

    w = 0.8 * rng.dirichlet(np.ones(3), size=2) + 0.2 / 3
    v = 0.8 * rng.dirichlet(np.ones(3), size=2) + 0.2 / 3
    tri = ChannelProblem(DiscreteChannel.bsc(0.1), DiscreteChannel(w), DiscreteChannel(v), CostSpec.free(2))
    comp = TypeComposition((40, 40))
    tables = _class_tables(tri, comp)
    thr = LlrtSpec.for_composition(tri, comp, 0.5).threshold
    yield "exact enumeration (861^2 patterns)", \
        (lambda: _accel.product_error_sums_numba(*tables, thr)), \
        (lambda: _accel.product_error_sums_numpy(*tables, thr)), \
        (lambda a, b: np.allclose(a, b, rtol=1e-12, atol=1e-15))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':38s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}  agree")
    for name, fast, slow, same in cases():
        fast()  # compile outside the timed region
        t_fast, a = best_of(fast, args.repeat)
        t_slow, b = best_of(slow, args.repeat)
        print(f"{name:38s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f}x  {bool(same(a, b))}")


if __name__ == "__main__":
    main()
