"""Compare the compiled and pure-Python geometry kernels.

    python3 benchmarks/bench_geometry.py [--nodes 30 200] [--repeat 5]

Also times one short full scenario under each backend (in subprocesses,
since the backend is chosen at import).
"""
import argparse
import os
import random
import subprocess
import sys
import timeit
from array import array

from manet_dri import _geometry_py as pure

try:
    from manet_dri import _geometry as fast
except ImportError:
    fast = None

SCENARIO = """
import time
from manet_dri import geometry
from manet_dri.config import ScenarioConfig
from manet_dri.scenario import run_scenario
t0 = time.perf_counter()
run_scenario(ScenarioConfig(duration=300.0, protocol="aodv-dri", seed=1))
print(geometry.BACKEND, time.perf_counter() - t0)
"""


def arrays(n, rng):
    def mk(lo, hi):
        return array("d", [rng.uniform(lo, hi) for _ in range(n)])
    return mk(0, 1000), mk(0, 1000), mk(0, 1000), mk(0, 1000), mk(5, 20), array("d", [0.0] * n)


def bench_kernels(mod, n, repeat):
    rng = random.Random(n)
    xs, ys, wx, wy, speed, pause = arrays(n, rng)
    r2 = 200.0 * 200.0
    nb = min(timeit.repeat(lambda: [mod.neighbors(xs, ys, i, r2) for i in range(n)],
                           number=200, repeat=repeat)) / 200
    adv = min(timeit.repeat(lambda: mod.advance(xs, ys, wx, wy, speed, pause, 0.1, 10.0,
                                                1000.0, 1000.0),
                            number=500, repeat=repeat)) / 500
    return nb, adv


def bench_scenario(pure_backend):
    env = dict(os.environ)
    env.pop("MANET_DRI_PURE", None)
    if pure_backend:
        env["MANET_DRI_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", SCENARIO], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    return out[0], float(out[1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[30, 200])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-scenario", action="store_true")
    args = ap.parse_args()
    if fast is None:
        print("compiled backend not built; only the pure-Python kernels are timed")
    print(f"{'nodes':>6} {'kernel':<18} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for n in args.nodes:
        p = bench_kernels(pure, n, args.repeat)
        c = bench_kernels(fast, n, args.repeat) if fast is not None else (float("nan"),) * 2
        for name, a, b in (("neighbors (all)", p[0], c[0]), ("advance", p[1], c[1])):
            print(f"{n:>6} {name:<18} {a * 1e6:>10.1f} {b * 1e6:>10.1f} {a / b:>7.1f}x")
    if not args.no_scenario:
        for flag in (True, False):
            backend, secs = bench_scenario(flag)
            print(f"300 s aodv-dri scenario, {backend} backend: {secs:.2f} s")


if __name__ == "__main__":
    main()
