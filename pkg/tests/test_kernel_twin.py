"""The compiled kernel and the pure interpreter are one source file; when
the extension is built, both must behave identically."""
import importlib.util
import pathlib
import random

import pytest
from helpers import SM, bisim_b_program, flip_program, fn, random_stream

import coeq.kernel
from coeq.evaluation import DiagramEnv, Session
from coeq.kernel import KERNEL_BACKEND


def _load_pure_core():
    path = pathlib.Path(coeq.kernel.__file__).parent / "_core.py"
    spec = importlib.util.spec_from_file_location("coeq_kernel_pure_twin", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_backend_reports_itself():
    assert KERNEL_BACKEND in ("pure", "compiled")


@pytest.mark.skipif(KERNEL_BACKEND != "compiled",
                    reason="compiled kernel not built; twins coincide")
def test_compiled_and_pure_twins_agree(monkeypatch):
    pure = _load_pure_core()
    assert pure.COMPILED is False
    rng = random.Random(321)
    cases = []
    for _ in range(20):
        ct = random_stream(rng)
        cases.append((flip_program(), DiagramEnv.of({"u": ct}),
                      fn("flip", fn("u")), rng.randint(1, 24)))
        ct2 = random_stream(rng)
        cases.append((bisim_b_program(),
                      DiagramEnv.of({"u": ct, "w": ct2}),
                      fn("b", fn("u"), fn("w")), rng.randint(1, 24)))
    results_active = [Session(p, SM, e).observe(t, d, budget=3_000)
                      for p, e, t, d in cases]
    monkeypatch.setattr(coeq.kernel, "KernelSession", pure.KernelSession)
    results_pure = [Session(p, SM, e).observe(t, d, budget=3_000)
                    for p, e, t, d in cases]
    assert results_active == results_pure
