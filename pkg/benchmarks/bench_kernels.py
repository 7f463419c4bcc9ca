"""Compare the numba and pure-numpy kernel paths.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``METRIPLECTIC_DISABLE_NUMBA``. Prints per-kernel timings and
the full symmetric-bracket RHS on a 32^3 grid, and checks that both paths
return identical bits.

    python benchmarks/bench_kernels.py [--n 32] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import hashlib, json, sys, timeit
import numpy as np
from metriplectic import kernels, EquationOfState, FluidState, Grid, TransportCoefficients, random_test_functional
from metriplectic.brackets import sym_rhs

n, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
m = n ** 3
f = rng.standard_normal((n, n, n))
a, b = rng.standard_normal((3, 3, m)), rng.standard_normal((3, 3, m))
eta, bulk, scale = rng.uniform(0, 1, m), rng.uniform(-0.5, 0.5, m), rng.uniform(0.5, 2, m)
st = FluidState.random_smooth(Grid((n, n, n), (1.0, 1.0, 1.0)), 1)
eos, c = EquationOfState(), TransportCoefficients(0.1, 0.05, 0.1)
G = random_test_functional(2).derivative(st)

cases = {
    "diff3": lambda: kernels.diff3(f, 1, 0.5),
    "strain_pair": lambda: kernels.strain_pair(a, b, eta, bulk),
    "lambda_apply": lambda: kernels.lambda_apply(b, eta, bulk, scale),
    "sym_rhs": lambda: sym_rhs(st, G, eos, c),
}
out = {"backend": kernels.BACKEND, "times": {}, "digest": {}}
for name, fn in cases.items():
    res = fn()  # warm-up (JIT compile)
    out["times"][name] = min(timeit.repeat(fn, number=1, repeat=repeat))
    arrs = [res.v, res.rho, res.s] if hasattr(res, "v") else [res]
    out["digest"][name] = hashlib.sha256(b"".join(np.ascontiguousarray(x).tobytes() for x in arrs)).hexdigest()
print(json.dumps(out))
"""


def run_backend(disable, n, repeat):
    env = dict(os.environ, METRIPLECTIC_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(n), str(repeat)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast = run_backend(False, args.n, args.repeat)
    ref = run_backend(True, args.n, args.repeat)
    print(f"grid {args.n}^3, best of {args.repeat}")
    print(f"{'kernel':<14}{ref['backend']:>12}{fast['backend']:>12}{'speedup':>10}  bitwise")
    for name in ref["times"]:
        t0, t1 = ref["times"][name], fast["times"][name]
        same = ref["digest"][name] == fast["digest"][name]
        print(f"{name:<14}{t0 * 1e3:>10.2f}ms{t1 * 1e3:>10.2f}ms{t0 / t1:>9.2f}x  {'yes' if same else 'NO'}")


if __name__ == "__main__":
    main()
