"""Time the compiled and pure-Python ground-evaluation kernels on the same workloads.

    python benchmarks/bench_kernel.py [--repeat N]
"""
import argparse
import random
import statistics
import time
from pathlib import Path

from chcspec.gen import GenConfig, random_program
from chcspec.oracle import KERNEL, GridSpec, ground_eval
from chcspec.parser import parse_program

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def workloads():
    yield "fib dims [0,12]", parse_program((DATA / "fib.chc").read_text()), GridSpec(0, 12)
    yield "nested_loop [-6,6]", parse_program((DATA / "nested_loop.chc").read_text()), GridSpec(-6, 6)
    progs = [random_program(random.Random(s), GenConfig(max_arity=3)) for s in range(20)]
    yield "20 random arity<=3 [-4,4]", progs, GridSpec(-4, 4)


def timed(program, grid, kernel, repeat):
    programs = program if isinstance(program, list) else [program]
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        for p in programs:
            ground_eval(p, grid, kernel=kernel)
        times.append(time.perf_counter() - t)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = ["python"] + (["compiled"] if KERNEL == "compiled" else [])
    print(f"{'workload':30} " + " ".join(f"{k:>10}" for k in kernels) + ("    speedup" if len(kernels) == 2 else ""))
    for name, prog, grid in workloads():
        ts = [timed(prog, grid, k, args.repeat) for k in kernels]
        row = f"{name:30} " + " ".join(f"{t:9.3f}s" for t in ts)
        if len(ts) == 2:
            row += f"  {ts[0] / ts[1]:8.1f}x"
        print(row)
    if KERNEL != "compiled":
        print("compiled kernel not available; only the Python kernel was timed")


if __name__ == "__main__":
    main()
