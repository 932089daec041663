"""Compare the numba and numpy kernel backends.

Each backend runs in its own interpreter (the backend is fixed at import
time by TERMCON_DISABLE_NUMBA). JIT compilation is excluded by a warm-up call.

    python benchmarks/bench_kernels.py [--sentences 100000] [--pairs 300]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from termcon import _kernels
from termcon.metrics import ter_stats

n_sent, n_pairs, repeat = (int(x) for x in sys.argv[1:4])
rng = np.random.default_rng(0)
lengths = rng.integers(5, 40, n_sent)
keys = _kernels.stream_keys(7, np.arange(n_sent))
hyps = [rng.integers(0, 30, rng.integers(15, 40)) for _ in range(n_pairs)]
refs = [rng.integers(0, 30, rng.integers(15, 40)) for _ in range(n_pairs)]
words = [tuple(map(str, h)) for h in hyps], [tuple(map(str, r)) for r in refs]

def best(fn):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t = time.perf_counter(); fn(); times.append(time.perf_counter() - t)
    return min(times)

def spans():
    _kernels.sample_spans(lengths, keys, 0.1, 0.75, 0.1)

def wed():
    for h, r in zip(hyps, refs):
        _kernels.weighted_edit_distance(h, r, np.ones(h.size), np.ones(r.size), with_path=True)

def ter():
    for h, r in zip(*words):
        ter_stats(h, r)

print(json.dumps({"backend": _kernels.backend(), "sample_spans": best(spans),
                  "edit_distance": best(wed), "ter": best(ter)}))
"""


def run(disable: bool, args) -> dict:
    env = dict(os.environ, TERMCON_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(args.sentences), str(args.pairs), str(args.repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=100_000, help="sentences for span sampling")
    ap.add_argument("--pairs", type=int, default=300, help="sentence pairs for edit distance / TER")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    nb, npy = run(False, args), run(True, args)
    print(f"{'kernel':<16}{'numba s':>10}{'numpy s':>10}{'speedup':>10}")
    for k in ("sample_spans", "edit_distance", "ter"):
        print(f"{k:<16}{nb[k]:>10.3f}{npy[k]:>10.3f}{npy[k] / nb[k]:>9.1f}x")
    if nb["backend"] != "numba":
        print("note: numba unavailable, both rows used numpy")


if __name__ == "__main__":
    main()
