#!/usr/bin/env python3
"""Benchmark the rewrite kernel: compiled extension vs pure interpreter.

The workload is the hot path of the workbench: observing stock corecursive
programs and an extracted round-trip program on random regular streams.
When the compiled kernel is not built, only the pure timing is reported
(build it with `python3 setup.py build_ext --inplace`).
"""
from __future__ import annotations

import importlib.util
import pathlib
import random
import sys
import time

import coeq.kernel
from coeq.corec import check_primitive_corecursive, compile_schema, stock_library
from coeq.evaluation import DiagramEnv, Session
from coeq.extract import extract, prove_corec
from coeq.kernel import KERNEL_BACKEND
from coeq.logic import normalize
from coeq.system import boolean_stream_system, random_stream_coterm
from coeq.terms import Fun

SM = boolean_stream_system()
DEPTH = 64
REPEAT = 3


def build_workload():
    lib = stock_library()
    work = []
    rng = random.Random(77)
    for name, entry in lib.items():
        names = [f"u{i}" for i in range(entry.arity)]
        for _ in range(4):
            env = DiagramEnv.of({n: random_stream_coterm(rng) for n in names})
            work.append((entry.program, env,
                         Fun(entry.name, tuple(Fun(n) for n in names))))
    verdict = check_primitive_corecursive(lib["even"].program, SM)
    compiled_prog = compile_schema(verdict.bundle, SM)
    extraction = extract(normalize(prove_corec(verdict.bundle, SM)),
                         compiled_prog, SM)
    for _ in range(4):
        env = DiagramEnv.of({"u": random_stream_coterm(rng)})
        work.append((extraction.program, env,
                     Fun(extraction.principal, (Fun("u"), Fun("u")))))
    return work


def run(work, kernel_session_cls) -> tuple[float, int]:
    saved = coeq.kernel.KernelSession
    coeq.kernel.KernelSession = kernel_session_cls
    try:
        best = None
        steps = 0
        for _ in range(REPEAT):
            t0 = time.perf_counter()
            steps = 0
            for prog, env, t in work:
                sess = Session(prog, SM, env, validate=False)
                sess.observe(t, DEPTH, budget=200_000)
                steps += sess.k.steps_total
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        return best, steps
    finally:
        coeq.kernel.KernelSession = saved


def load_pure():
    path = pathlib.Path(coeq.kernel.__file__).parent / "_core.py"
    spec = importlib.util.spec_from_file_location("coeq_kernel_pure_bench", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main() -> int:
    work = build_workload()
    pure = load_pure()
    t_pure, steps = run(work, pure.KernelSession)
    print(f"workload: {len(work)} observations to depth {DEPTH}, "
          f"{steps} rewrite steps per pass")
    print(f"pure interpreter : {t_pure * 1000:8.1f} ms")
    if KERNEL_BACKEND == "compiled":
        t_fast, _ = run(work, coeq.kernel.KernelSession)
        print(f"compiled kernel  : {t_fast * 1000:8.1f} ms")
        print(f"speedup          : {t_pure / t_fast:8.2f}x")
    else:
        print("compiled kernel  : not built "
              "(python3 setup.py build_ext --inplace)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
