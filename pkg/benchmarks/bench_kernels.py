"""Compare the numba kernels with the pure-numpy / pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--quick]

Each path runs in its own interpreter because BLINDAI_DISABLE_JIT is read
at import time. Numba compile time is excluded by a warm-up call.
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _time(fn, repeat):
    fn()  # warm-up (compiles or loads the cache)
    t = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t) / repeat


def run_cases(quick: bool) -> dict:
    import numpy as np

    from blindai import dsp
    from blindai._jit import JIT_ENABLED
    from blindai.arena import default_actions, reset
    from blindai.arena import kernel as K
    from blindai.tensor.optim import _adam_kernel, _adam_numpy

    rng = np.random.default_rng(0)
    table = default_actions().table
    out = {"jit": JIT_ENABLED}

    rows = rng.standard_normal((10, 2048))
    out["fft 10x2048"] = _time(lambda: dsp.fft_rows(rows, 2048), 20)

    frames = 600 if quick else 3600
    a1 = rng.integers(0, K.N_ACTIONS, frames)
    a2 = rng.integers(0, K.N_ACTIONS, frames)
    ev = np.zeros((K.MAX_EVENTS, 3), dtype=np.int64)

    def round_():
        s = reset(0).data
        K.run_frames(s, table, a1, a2, ev)

    out[f"simulate {frames} frames"] = _time(round_, 3)

    budget = 50 if quick or not JIT_ENABLED else 2000
    root = reset(0).data
    out[f"mcts budget {budget}"] = _time(lambda: K.mcts_search(root, table, 1, budget, 60, 2, 7, 1.0, 50.0), 3)

    n = 2_000_000
    p, g, m, v = (rng.standard_normal(n) for _ in range(4))
    v = np.abs(v)
    adam = _adam_kernel if JIT_ENABLED else _adam_numpy
    out["adam 2M params"] = _time(lambda: adam(p, g, m, v, 3e-4, 0.9, 0.999, 0.1, 0.001, 1e-8), 5)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(run_cases(args.quick)))
        return
    results = {}
    for label, flag in (("numba", "0"), ("fallback", "1")):
        env = dict(os.environ, BLINDAI_DISABLE_JIT=flag)
        cmd = [sys.executable, __file__, "--child"] + (["--quick"] if args.quick else [])
        res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(res.stdout.strip().splitlines()[-1])
    print(f"{'case':<26}{'numba ms':>12}{'fallback ms':>14}{'speedup':>10}")
    for case in results["numba"]:
        if case == "jit":
            continue
        a = results["numba"][case]
        b = results["fallback"].get(case)
        if b is None:  # budgets differ between paths
            print(f"{case:<26}{a * 1e3:>12.2f}{'-':>14}{'-':>10}")
            continue
        print(f"{case:<26}{a * 1e3:>12.2f}{b * 1e3:>14.2f}{b / a:>9.1f}x")
    for case, b in results["fallback"].items():
        if case != "jit" and case not in results["numba"]:
            print(f"{case:<26}{'-':>12}{b * 1e3:>14.2f}{'-':>10}")


if __name__ == "__main__":
    main()
