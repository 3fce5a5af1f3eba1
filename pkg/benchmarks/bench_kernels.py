"""Compare the compiled and pure-Python kernel backends.

Kernel timings run in-process against both modules.  The end-to-end timing
runs one learning cell in a subprocess per backend (``GENLINK_PURE_PYTHON``
selects the fallback) on a synthetic set sized like a small public
benchmark (112 positive and 112 negative links).  A few mislabelled
training links keep the learner from stopping early.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--skip-learn]
"""
import argparse
import json
import os
import random
import subprocess
import sys
import timeit

from genlink import kernels


def random_words(rng, n, lo=4, hi=16):
    alphabet = "abcdefghijklmnopqrstuvwxyz "
    return ["".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi))) for _ in range(n)]


def kernel_cases(rng):
    xs, ys = random_words(rng, 2000), random_words(rng, 2000)
    sets = [(random_words(rng, 3), random_words(rng, 3)) for _ in range(1000)]
    pts = [([(rng.uniform(-80, 80), rng.uniform(-180, 180)) for _ in range(3)],
            [(rng.uniform(-80, 80), rng.uniform(-180, 180)) for _ in range(3)]) for _ in range(2000)]
    return {
        "levenshtein x2000": lambda k: [k.levenshtein(a, b) for a, b in zip(xs, ys)],
        "min_levenshtein 3x3 x1000": lambda k: [k.min_levenshtein(a, b) for a, b in sets],
        "min_haversine 3x3 x2000": lambda k: [k.min_haversine(a, b) for a, b in pts],
    }


_LEARN = """
import json, time
from genlink import kernels
from genlink.learner import LearnerConfig, learn
from genlink.synthetic import persons
ds = persons(seed=0, people=112)
cfg = LearnerConfig(max_iterations={iterations}, rng_seed=0)
t = time.perf_counter()
pos = ds.links.positive[::2] + ds.links.negative[1:8:2]
r = learn(ds, pos, ds.links.negative[::2], cfg)
print(json.dumps({{"backend": kernels.BACKEND, "seconds": time.perf_counter() - t,
                  "iterations": len(r.history) - 1}}))
"""


def learn_cell(pure: bool, iterations: int) -> dict:
    env = dict(os.environ)
    env.pop("GENLINK_PURE_PYTHON", None)
    if pure:
        env["GENLINK_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", _LEARN.format(iterations=iterations)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--iterations", type=int, default=50)
    parser.add_argument("--skip-learn", action="store_true")
    args = parser.parse_args(argv)

    backends = kernels.backends()
    cases = kernel_cases(random.Random(0))
    print(f"{'kernel':<28}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for label, fn in cases.items():
        times = {name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for name, mod in backends.items()}
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<28}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times.values())
              + f"{speedup:>9.1f}x")

    if args.skip_learn:
        return
    print()
    runs = [learn_cell(pure=False, iterations=args.iterations)] if "cython" in backends else []
    runs.append(learn_cell(pure=True, iterations=args.iterations))
    for r in runs:
        # the cross-validation protocol runs 10 x 2 such cells
        print(f"learn cell [{r['backend']}]: {r['seconds']:.1f} s for {r['iterations']} iterations; "
              f"10 runs x 2 folds serial ~ {20 * r['seconds'] / 60:.1f} min")


if __name__ == "__main__":
    main()
