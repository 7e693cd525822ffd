import io
import sys

import pytest

from coeq.cli import (ParseError, Parser, Workspace, main, parse_workspace,
                      show_approximation, show_derivation, show_workspace,
                      tokenize)
from coeq.evaluation import GeneratorBinding, Session
from coeq.logic import check_proof
from coeq.system import RegularCoterm
from coeq.terms import Con, Fun, Var

SM_SOURCE = """
system Sm {
  inductive B;
  coinductive S;
  constructor 0 : B;
  constructor 1 : B;
  constructor cons : B * S -> S;
}

program flip {
  flip(cons(0, w)) = cons(1, flip(w));
  flip(cons(1, w)) = cons(0, flip(w));
}

env E {
  v_a = 0 : v_b;
  v_b = 1 : v_a;
  v_r = rec a. 0 : 1 : a;
  v_f = flip(v_a);
}
"""

PROOF_SOURCE = SM_SOURCE + """
proof triv {
  (and-intro (and (S x) (= (flip x) (flip x))) (
    (assume (S x) () {label u})
    (refl (= (flip x) (flip x)) () {})
  ) {})
}
"""


def test_parse_workspace_and_validate():
    ws = parse_workspace(SM_SOURCE)
    assert ws.system_name == "Sm"
    assert set(ws.programs) == {"flip"}
    assert set(ws.envs) == {"E"}
    env = dict(ws.envs["E"].bindings)
    assert isinstance(env["v_a"], RegularCoterm)
    assert isinstance(env["v_f"], GeneratorBinding)


def test_parse_rec_coterm_semantics():
    ws = parse_workspace(SM_SOURCE)
    sess = Session(ws.programs["flip"], ws.system, ws.envs["E"])
    from helpers import approx_bits
    bits = approx_bits(sess.observe(Fun("v_r"), 8))
    assert bits == [0, 1, 0, 1, 0, 1, 0, 1]
    bits2 = approx_bits(sess.observe(Fun("v_f"), 6))
    assert bits2 == [1, 0, 1, 0, 1, 0]


def test_parse_errors_have_positions():
    with pytest.raises(ParseError) as e:
        parse_workspace("system X {\n  constructor c : Nope;\n}")
    assert "unknown predicate" in str(e.value)
    with pytest.raises(ParseError) as e2:
        parse_workspace(SM_SOURCE + "\nprogram bad { f(cons(0)) = 0; }")
    assert "arity" in str(e2.value)


def test_unknown_constructor_in_pattern_rejected():
    with pytest.raises(ParseError) as e:
        parse_workspace(SM_SOURCE + "\nprogram bad { f(g(x)) = 0; }")
    assert "not a constructor" in str(e.value)


def test_print_then_parse_identity():
    ws = parse_workspace(PROOF_SOURCE)
    text = show_workspace(ws)
    ws2 = parse_workspace(text)
    assert ws2.system == ws.system
    assert ws2.programs == ws.programs
    assert ws2.envs == ws.envs
    assert ws2.proofs == ws.proofs
    # printing is a fixed point
    assert show_workspace(ws2) == text


def test_proof_parses_and_checks():
    ws = parse_workspace(PROOF_SOURCE)
    res = check_proof(ws.system, ws.programs["flip"], ws.proofs["triv"])
    assert res.ok


def test_generated_proof_roundtrips_through_text():
    from coeq.corec import check_primitive_corecursive, compile_schema, stock_library
    from coeq.extract import prove_corec
    ws = parse_workspace(SM_SOURCE)
    entry = stock_library()["even"]
    verdict = check_primitive_corecursive(entry.program, ws.system)
    d = prove_corec(verdict.bundle, ws.system)
    compiled = compile_schema(verdict.bundle, ws.system)
    # make the workspace aware of the compiled program's functions
    from coeq.cli import show_program
    src = (SM_SOURCE + "\nprogram even {\n"
           + "\n".join("  " + line for line in
                       show_program("even", compiled).splitlines()[1:-1])
           + "\n}\n"
           + "proof p { " + show_derivation(d) + " }")
    ws2 = parse_workspace(src)
    assert ws2.proofs["p"] == d
    res = check_proof(ws2.system, ws2.programs["even"], ws2.proofs["p"])
    assert res.ok, res.violations[:3]


# -- command-level tests ---------------------------------------------------------

@pytest.fixture()
def ws_file(tmp_path):
    f = tmp_path / "work.cds"
    f.write_text(SM_SOURCE)
    return str(f)


def run_main(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cmd_check(ws_file, capsys):
    code, out, _ = run_main(capsys, "check", ws_file)
    assert code == 0
    assert "flip" in out


def test_cmd_eval_flip(ws_file, capsys):
    code, out, _ = run_main(capsys, "eval", ws_file, "flip(v_a)",
                            "--depth", "4", "--env", "E")
    assert code == 0
    assert out.strip() == "1:0:1:0:<cut@4>"


def test_cmd_eval_stall_exit(ws_file, capsys, tmp_path):
    nat = tmp_path / "nat.cds"
    nat.write_text("""
system N {
  inductive N;
  constructor 0 : N;
  constructor s : N -> N;
}
program f {
  f(0) = 0;
  f(s(s(x))) = f(s(s(s(x))));
}
""")
    code, out, _ = run_main(capsys, "eval", str(nat), "f(s(0))", "--depth", "1")
    assert code == 1
    assert "<stall:no-match>" in out
    code2, out2, _ = run_main(capsys, "eval", str(nat), "f(s(s(0)))",
                              "--depth", "1", "--budget", "500")
    assert code2 == 1
    assert "<stall:budget@500>" in out2


def test_cmd_bisim(ws_file, capsys):
    code, out, _ = run_main(capsys, "bisim", ws_file, "flip(v_a)", "v_b",
                            "--depth", "32", "--env", "E")
    assert code == 0
    assert "equal-up-to-depth" in out
    code2, out2, _ = run_main(capsys, "bisim", ws_file, "v_a", "v_b",
                              "--depth", "4", "--env", "E")
    assert code2 == 1


def test_cmd_productive(ws_file, capsys, tmp_path):
    code, out, _ = run_main(capsys, "productive", ws_file, "flip")
    assert code == 0
    assert "primitive-corecursive" in out
    mt = tmp_path / "mt.cds"
    mt.write_text(SM_SOURCE + """
program mt {
  notf(x) = delta(x, 1, 0, 0);
  mrg(x, y) = cons(pi1(x), mrg(y, pi2(x)));
  mt = 1 : mrg(mt, notf(mt));
}
""")
    code2, out2, _ = run_main(capsys, "productive", str(mt), "mt")
    assert code2 == 1
    assert "recursive occurrence" in out2


def test_cmd_prove_and_classify(ws_file, capsys):
    code, out, _ = run_main(capsys, "prove-corec", ws_file, "flip")
    assert code == 0
    assert "|-" in out
    code2, out2, _ = run_main(capsys, "classify", ws_file,
                              "(ex y (and (S y) (= (flip y) z)))")
    assert code2 == 0
    assert out2.strip() == "strongly-positive"
    code3, out3, _ = run_main(capsys, "classify", ws_file,
                              "(imp (S x) (S (flip x)))")
    assert out3.strip() == "general"


def test_cmd_check_proof_and_normalize(tmp_path, capsys):
    f = tmp_path / "p.cds"
    f.write_text(PROOF_SOURCE)
    code, out, _ = run_main(capsys, "check-proof", str(f), "triv")
    assert code == 0
    assert "|-" in out
    code2, out2, _ = run_main(capsys, "normalize", str(f), "triv")
    assert code2 == 0


def test_cmd_extract_program(ws_file, capsys, tmp_path):
    out_file = tmp_path / "extracted.cds"
    code, out, _ = run_main(capsys, "extract", ws_file, "flip",
                            "--out", str(out_file))
    assert code == 0
    text = out_file.read_text()
    assert "program f0" in text
    ws2 = parse_workspace(text)
    assert "f0" in ws2.programs


def test_cmd_roundtrip_small(capsys):
    code, out, _ = run_main(capsys, "roundtrip", "--depth", "8", "--inputs", "2")
    assert code == 0
    assert "PASS" in out


def test_tagged_format(ws_file, capsys):
    code, out, _ = run_main(capsys, "--format", "tagged", "bisim", ws_file,
                            "flip(v_a)", "v_b", "--depth", "8", "--env", "E")
    assert code == 0
    assert "VERDICT\tequal-up-to-depth" in out
