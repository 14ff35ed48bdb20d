"""Compare the compiled jet core with the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--repeat 3]

Each backend runs in its own interpreter (the backend is picked at import).
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
import qfi_lab
from qfi_lab import catalog
from qfi_lab.discovery import BD_OPERATOR, nullspace_solve
from qfi_lab.dynamics import integrate

e = catalog.instantiate("Vs1")
timings = {}
t = time.perf_counter()
integrate(e.potential, e.reference_ics, 1e-3, 10000, "verlet")
timings["verlet_10k_steps"] = time.perf_counter() - t
t = time.perf_counter()
integrate(e.potential, e.reference_ics, 1e-3, 10000, "rk4")
timings["rk4_10k_steps"] = time.perf_counter() - t
t = time.perf_counter()
for i in range(20000):
    e.potential.jet(1.0 + 1e-5 * i, 0.7)
timings["jet_20k_points"] = time.perf_counter() - t
t = time.perf_counter()
nullspace_solve(BD_OPERATOR, e.potential, n_points=400)
timings["bd_nullspace_400_points"] = time.perf_counter() - t
print(json.dumps({"backend": qfi_lab.BACKEND, "timings": timings}))
"""


def run(pure, repeat):
    env = dict(os.environ)
    env.pop("QFI_LAB_PURE_PYTHON", None)
    if pure:
        env["QFI_LAB_PURE_PYTHON"] = "1"
    best = None
    for _ in range(repeat):
        out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True)
        rec = json.loads(out.stdout)
        if best is None:
            best = rec
        else:
            best["timings"] = {k: min(v, rec["timings"][k]) for k, v in best["timings"].items()}
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'workload':<26}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for k, v in fast["timings"].items():
        w = slow["timings"][k]
        print(f"{k:<26}{v:>11.3f}s{w:>11.3f}s{w / v:>9.1f}x")


if __name__ == "__main__":
    main()
