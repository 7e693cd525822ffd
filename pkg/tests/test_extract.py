import random

from helpers import (SM, ZERO, ONE, alternating_stream, approx_bits, cons, fn,
                     random_stream, stream_prefix, v)

from coeq.corec import check_primitive_corecursive, compile_schema, stock_library
from coeq.evaluation import DiagramEnv, Session, derives_omega, first_stall
from coeq.extract import (ExtractError, extract, prove_corec,
                          prove_corec_program, roundtrip_report)
from coeq.logic import (PolarityClass, assert_sp_proof, check_proof,
                        classify_formula, has_detour, normalize)
from coeq.program import assemble_program
from coeq.realize import (RealizabilityJudgment, RealizerAlgebra, even_term,
                          merge_term, odd_term, realizes, split_term,
                          with_algebra)
from coeq.system import coterm_bits, random_stream_coterm
from coeq.terms import Con, Fun, Var


# -- split/merge algebra -------------------------------------------------------

def _alg(env=None):
    lib = stock_library()
    return RealizerAlgebra(lib["ident"].program, SM, env)


def test_split_even_positions():
    env = DiagramEnv.of({"a": alternating_stream()})
    alg = _alg(env)
    out = alg.observe(split_term(fn("a"), 0), 16)
    assert approx_bits(out) == [0] * 16


def test_split_head_positions():
    rng = random.Random(88)
    for _ in range(10):
        ct = random_stream(rng)
        bits = stream_prefix(ct, 64)
        env = DiagramEnv.of({"u": ct})
        alg = _alg(env)
        for i in range(4):
            out = alg.observe(split_term(fn("u"), i), 1)
            assert approx_bits(out)[:1] == [bits[2 ** i - 1]], i


def test_merge_inverts_split():
    rng = random.Random(13)
    for _ in range(20):
        ct = random_stream(rng)
        env = DiagramEnv.of({"u": ct})
        alg = _alg(env)
        t = merge_term(even_term(fn("u")), odd_term(fn("u")))
        r = alg.equal(t, fn("u"), 32)
        assert r.equal


def test_split_of_merge_projects():
    rng = random.Random(14)
    for _ in range(20):
        a, b = random_stream(rng), random_stream(rng)
        env = DiagramEnv.of({"a": a, "b": b})
        alg = _alg(env)
        assert alg.equal(even_term(merge_term(fn("a"), fn("b"))), fn("a"), 32).equal
        assert alg.equal(odd_term(merge_term(fn("a"), fn("b"))), fn("b"), 32).equal


def test_merge_constant_streams():
    lib = stock_library()
    eqs = [e for e in lib["zeros"].program.body if e.function == "zeros"]
    eqs += [e for e in lib["ones"].program.body if e.function == "ones"]
    prog = assemble_program(SM, eqs, "zeros")
    alg = RealizerAlgebra(prog, SM)
    out = alg.observe(merge_term(fn("zeros"), fn("ones")), 16)
    assert approx_bits(out) == [0, 1] * 8


# -- realizes -------------------------------------------------------------------

def test_realizes_stream_atom():
    from coeq.logic import DataAtom
    lib = stock_library()
    env = DiagramEnv.of({"a": alternating_stream()})
    prog = lib["flip"].program
    j = RealizabilityJudgment.of(prog, SM, env, {},
                                 fn("flip", fn("a")),
                                 DataAtom("S", Fun("flip", (Fun("a"),))), 8)
    assert realizes(j).holds
    j2 = RealizabilityJudgment.of(prog, SM, env, {}, fn("a"),
                                  DataAtom("S", Fun("flip", (Fun("a"),))), 8)
    r2 = realizes(j2)
    assert r2.status == "fails"


def test_realizes_disjunction_selects_by_head():
    from coeq.logic import EqAtom, Or, DataAtom
    lib = stock_library()
    env = DiagramEnv.of({"a": alternating_stream()})
    prog = lib["zeros"].program
    phi = Or(EqAtom(Con("0"), Con("0")), DataAtom("S", Var("nope")))
    # head 0 selects the left disjunct; tail must realize 0 = 0
    realizer = cons(ZERO, fn("zeros"))
    j = RealizabilityJudgment.of(prog, SM, env, {"nope": fn("a")}, realizer, phi, 4)
    assert realizes(j).holds
    bad = cons(ONE, fn("zeros"))
    j2 = RealizabilityJudgment.of(prog, SM, env, {"nope": fn("a")}, bad, phi, 4)
    assert not realizes(j2).holds


def test_realizes_exists_conjunction():
    from coeq.logic import And, DataAtom, EqAtom, Exists
    lib = stock_library()
    env = DiagramEnv.of({"a": alternating_stream()})
    prog = lib["ident"].program
    # ex y. S(y) & ident(y) = z   realized by merge(a, merge(value, zeros))
    phi = Exists("y", And(DataAtom("S", Var("y")),
                          EqAtom(Fun("ident", (Var("y"),)), Var("z"))))
    zeros = Fun("split_zeros")
    body_realizer = merge_term(fn("a"), merge_term(fn("ident", fn("a")), zeros))
    realizer = merge_term(fn("a"), merge_term(body_realizer, zeros))
    j = RealizabilityJudgment.of(prog, SM, env, {"z": fn("ident", fn("a"))},
                                 realizer, phi, 4)
    assert realizes(j).holds


def test_realizes_rejects_non_sp():
    from coeq.logic import DataAtom, Imp
    import pytest
    lib = stock_library()
    phi = Imp(DataAtom("S", Var("x")), DataAtom("S", Var("x")))
    j = RealizabilityJudgment.of(lib["ident"].program, SM, None, {},
                                 fn("split_zeros"), phi, 4)
    with pytest.raises(ValueError):
        realizes(j)


# -- prove_corec ----------------------------------------------------------------

def _prove(name):
    entry = stock_library()[name]
    verdict = check_primitive_corecursive(entry.program, SM)
    assert verdict.accepted, verdict.reason
    compiled = compile_schema(verdict.bundle, SM)
    d = prove_corec(verdict.bundle, SM)
    return d, compiled, verdict


def test_prove_corec_even_checks():
    d, compiled, _ = _prove("even")
    res = check_proof(SM, compiled, d)
    assert res.ok, res.violations[:3]
    from coeq.logic import DataAtom
    assert res.conclusion == DataAtom("S", Fun("even", (Var("x1"),)))
    assert set(res.assumptions) == {("h1", DataAtom("S", Var("x1")))}


def test_prove_corec_identity_and_flip():
    for name in ("ident", "flip"):
        d, compiled, _ = _prove(name)
        res = check_proof(SM, compiled, d)
        assert res.ok, (name, res.violations[:3])


def test_prove_corec_all_library_normal_and_sp():
    for name in stock_library():
        d, compiled, _ = _prove(name)
        res = check_proof(SM, compiled, d)
        assert res.ok, (name, res.violations[:3])
        n = normalize(d)
        assert not has_detour(n)
        res2 = check_proof(SM, compiled, n)
        assert res2.ok, (name, res2.violations[:3])
        assert res2.conclusion == res.conclusion
        assert assert_sp_proof(n) is None, name


def test_prove_corec_uses_strongly_positive_invariant():
    d, compiled, verdict = _prove("merge")
    coind = [node for _p, node in d.nodes() if node.rule == "coinduction"]
    assert coind
    for node in coind:
        phi = node.attr("formula")
        assert classify_formula(phi) is PolarityClass.STRONGLY_POSITIVE


# -- extraction -------------------------------------------------------------------

def _extract(name):
    entry = stock_library()[name]
    verdict = check_primitive_corecursive(entry.program, SM)
    compiled = compile_schema(verdict.bundle, SM)
    d = normalize(prove_corec(verdict.bundle, SM))
    return extract(d, compiled, SM), entry


def test_extract_identity_bisimilar():
    result, entry = _extract("ident")
    rng = random.Random(7)
    for _ in range(5):
        ct = random_stream(rng)
        env = DiagramEnv.of({"u": ct})
        sess = Session(result.program, SM, env)
        lhs = Fun(result.principal, (fn("u"), fn("u")))
        r = derives_omega(result.program, env, lhs, fn("u"), 32,
                          100_000, session=sess)
        assert r.equal, r


def test_extract_even_bisimilar():
    result, entry = _extract("even")
    rng = random.Random(9)
    for _ in range(5):
        ct = random_stream(rng)
        bits = stream_prefix(ct, 130)
        env = DiagramEnv.of({"u": ct})
        sess = Session(result.program, SM, env)
        lhs = Fun(result.principal, (fn("u"), fn("u")))
        out = sess.observe(lhs, 32, budget=100_000)
        got = approx_bits(out)
        assert got == [bits[2 * i] for i in range(len(got))] and len(got) == 32


def test_extract_passes_recognizer():
    result, _ = _extract("even")
    verdict = check_primitive_corecursive(result.program, SM)
    assert verdict.accepted, verdict.reason


def test_extract_rejects_detours_and_non_sp():
    import pytest
    from coeq.logic import and_elim, and_intro, assume, DataAtom, refl
    entry = stock_library()["ident"]
    verdict = check_primitive_corecursive(entry.program, SM)
    compiled = compile_schema(verdict.bundle, SM)
    detour = and_elim(1, and_intro(assume("h1", DataAtom("S", Var("x1"))),
                                   refl(Var("t"))))
    with pytest.raises(ExtractError):
        extract(detour, compiled, SM)


def test_extraction_certificate_renders():
    result, _ = _extract("even")
    text = result.certificate.render()
    assert "coinductions\t" in text
    assert result.certificate.required_input_depth(32) >= 64


def test_extract_realizes_conclusion():
    """Extraction soundness at desk scale: for every library entry, the
    extracted function applied to input realizers (the argument streams
    themselves) realizes the conclusion at half the input depth."""
    from coeq.logic import DataAtom
    for name in stock_library():
        result, entry = _extract(name)
        rng = random.Random(101)
        k = entry.arity
        names = [f"u{i}" for i in range(k)]
        env = DiagramEnv.of({n: random_stream(rng) for n in names})
        args = tuple(fn(n) for n in names)
        lhs = Fun(result.principal, args + args)
        eta = {f"x{i + 1}": args[i] for i in range(k)}
        j = RealizabilityJudgment.of(
            result.program, SM, env, eta, lhs,
            DataAtom("S", Fun(entry.program.principal,
                              tuple(Var(f"x{i + 1}") for i in range(k)))), 32,
            budget=200_000)
        assert realizes(j).holds, name


# -- the roundtrip -----------------------------------------------------------------

def test_roundtrip_small_depth():
    report = roundtrip_report(depth=16, inputs_per_entry=3)
    assert report.ok, report.render()


def test_roundtrip_includes_rejection_of_morse_thue():
    from coeq.corec import morse_thue_program, StockEntry
    lib = stock_library()
    lib = dict(lib)
    lib["morse_thue"] = StockEntry("morse_thue", morse_thue_program(), 0,
                                   "cumulative corecursion (not accepted)")
    report = roundtrip_report(depth=8, library=lib, inputs_per_entry=2)
    stages = report.entries["morse_thue"]
    assert len(stages) == 1 and stages[0].stage == "recognize" and not stages[0].ok
    assert all(all(s.ok for s in ss) for n, ss in report.entries.items()
               if n != "morse_thue")
