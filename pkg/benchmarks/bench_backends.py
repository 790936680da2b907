"""Compare the numba and numpy backends on the hot kernels.

The backend is fixed at import time by ``DOCREC_BACKEND``, so each backend
runs in its own subprocess.  Usage::

    python3 benchmarks/bench_backends.py [--repeat N]

Prints one row per kernel with the median wall time of each backend and the
speed-up of numba over numpy.
"""
from __future__ import annotations

import argparse
import json
import os
import statistics
import subprocess
import sys
import time


def _cases():
    import numpy as np

    from docrec.ctc import brute_force_prob, ctc_loss, ctc_loss_grad
    from docrec.textmetrics import levenshtein
    from docrec.tokens import TokenDictionary

    rng = np.random.default_rng(0)
    d = TokenDictionary(tuple("abcdefghijklmnopqrstuvwxyz "))
    logits = rng.normal(size=(400, d.size_with_blank))
    lattice = np.exp(logits - logits.max(1, keepdims=True))
    lattice /= lattice.sum(1, keepdims=True)
    target = "".join(rng.choice(list("abcdefghij"), size=80))

    small = TokenDictionary(tuple("ab"))
    lat8 = rng.dirichlet(np.ones(3), size=8)

    s1 = "".join(rng.choice(list("abcdefgh "), size=2000))
    s2 = "".join(rng.choice(list("abcdefgh "), size=2000))

    return {
        "ctc_loss T=400 |y|=80": lambda: ctc_loss(lattice, target, d),
        "ctc_loss_grad T=400 |y|=80": lambda: ctc_loss_grad(logits, target, d),
        "brute_force T=8 |A|=2": lambda: brute_force_prob(lat8, "ab", small),
        "levenshtein 2000x2000": lambda: levenshtein(s1, s2),
    }


def _worker(repeat: int) -> dict:
    from docrec import _accel

    out = {"backend": _accel.backend(), "times": {}}
    for name, fn in _cases().items():
        fn()  # warm-up and JIT compile
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        out["times"][name] = statistics.median(times)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        print(json.dumps(_worker(args.repeat)))
        return

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, DOCREC_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--worker", "--repeat", str(args.repeat)],
            env=env, capture_output=True, text=True, check=True,
        )
        res = json.loads(proc.stdout)
        results[res["backend"]] = res["times"]
    if "numba" not in results:
        print("numba is not importable; only the numpy backend was timed")
    names = list(next(iter(results.values())))
    print(f"{'kernel':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speed-up':>9s}")
    for name in names:
        nb = results.get("numba", {}).get(name)
        np_ = results["numpy"][name]
        nb_s = f"{nb * 1e3:10.3f}" if nb is not None else f"{'-':>10s}"
        ratio = f"{np_ / nb:8.1f}x" if nb else f"{'-':>9s}"
        print(f"{name:32s} {nb_s} {np_ * 1e3:10.3f} {ratio}")


if __name__ == "__main__":
    main()
