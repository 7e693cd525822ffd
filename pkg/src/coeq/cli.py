"""Surface syntax and batch commands.

Workspace files (.cds) hold four kinds of stanzas:

    system NAME {
      inductive B; coinductive S;
      constructor 0 : B;
      constructor cons : B * S -> S;
    }
    program NAME { f(cons(0, w)) = cons(1, f(w)); ... }
    env NAME { v_a = 0 : v_b;  v_r = rec a. 0 : 1 : a;  v_g = flip(v_a); }
    proof NAME { (rule CONCLUSION (PREMISES...) {ATTRS...}) }

`:` is sugar for the binary constructor named `cons`; `rec x. e` closes a
cycle in a regular coterm; an env right-hand side `f(v1 ...)` names a
program of the workspace applied to other bindings.  Formulas are
s-expressions: (S t), (= t t'), (and f g), (or f g), (imp f g),
(ex x f), (all x f).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .corec import check_primitive_corecursive
from .evaluation import (DEFAULT_BUDGET, ApproxNode, Approximation, Cut,
                         DiagramEnv, GeneratorBinding, Session, Stalled,
                         derives_omega, first_stall)
from .extract import ExtractError, extract, prove_corec_program, roundtrip_report
from .logic import (And, DataAtom, Derivation, EqAtom, Exists, Forall,
                    Formula, Imp, Or, check_proof, classify_formula,
                    has_detour, normalize)
from .program import (Equation, Program, assemble_program, reserved_function,
                      standard_functions, validate_program)
from .system import (Constructor, ConstructorType, CotermNode, DataPredicate,
                     DataSystem, Kind, RegularCoterm, validate_system)
from .terms import Con, Fun, Term, Var

FORMULA_HEADS = ("and", "or", "imp", "ex", "all", "=")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------

_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyz"
                   "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'[]$@")


@dataclass(frozen=True)
class Tok:
    kind: str   # "ident" | "punct" | "eof"
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Tok]:
    toks: list[Tok] = []
    line, col = 1, 1
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if src.startswith("->", i):
            toks.append(Tok("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if c in "{}(),;:*=.":
            toks.append(Tok("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c in _IDENT_CHARS or (c == "-" and i + 1 < n and src[i + 1] in _IDENT_CHARS):
            j = i
            while j < n:
                ch = src[j]
                if ch in _IDENT_CHARS:
                    j += 1
                elif ch == "-" and j + 1 < n and src[j + 1] in _IDENT_CHARS:
                    j += 1
                else:
                    break
            toks.append(Tok("ident", src[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Workspace
# ---------------------------------------------------------------------------

@dataclass
class Workspace:
    system: DataSystem | None = None
    system_name: str = ""
    programs: dict[str, Program] = field(default_factory=dict)
    envs: dict[str, DiagramEnv] = field(default_factory=dict)
    proofs: dict[str, Derivation] = field(default_factory=dict)

    def sole_program(self) -> tuple[str, Program]:
        if len(self.programs) != 1:
            raise ValueError(f"workspace defines {len(self.programs)} programs; "
                             f"pass --program")
        return next(iter(self.programs.items()))

    def pick_program(self, name: str | None) -> Program:
        if name is None:
            return self.sole_program()[1]
        if name not in self.programs:
            raise ValueError(f"unknown program '{name}'")
        return self.programs[name]

    def merged_program(self) -> Program:
        """Union of all programs: one session over every defined function.
        Distinct programs defining the same function differently surface
        as overlap violations."""
        if not self.programs:
            raise ValueError("workspace defines no programs")
        if len(self.programs) == 1:
            return self.sole_program()[1]
        eqs: list[Equation] = []
        seen: set[str] = set()
        principal = next(iter(self.programs))
        for prog in self.programs.values():
            for e in prog.body:
                if reserved_function(e.function) or str(e) in seen:
                    continue
                seen.add(str(e))
                eqs.append(e)
        return assemble_program(self.system, eqs, principal)

    def function_names(self) -> set[str]:
        out: set[str] = set()
        for p in self.programs.values():
            out.update(p.functions())
        return out

    def binding_names(self) -> set[str]:
        out: set[str] = set()
        for e in self.envs.values():
            out.update(e.names())
        return out


class Parser:
    def __init__(self, toks: list[Tok], ws: Workspace | None = None):
        self.toks = toks
        self.i = 0
        self.ws = ws or Workspace()

    # -- cursor ----------------------------------------------------------------

    def peek(self) -> Tok:
        return self.toks[self.i]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg + (f" (found {t.text!r})" if t.text else " (at end)"),
                          t.line, t.col)

    def expect(self, text: str) -> Tok:
        t = self.next()
        if t.text != text:
            self.i -= 1
            raise self.fail(f"expected {text!r}")
        return t

    def ident(self, what: str = "identifier") -> str:
        t = self.next()
        if t.kind != "ident":
            self.i -= 1
            raise self.fail(f"expected {what}")
        return t.text

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    # -- stanzas ------------------------------------------------------------------

    def parse_workspace(self) -> Workspace:
        while not self.at_end():
            kw = self.ident("stanza keyword")
            if kw == "system":
                self.parse_system()
            elif kw == "program":
                self.parse_program()
            elif kw == "env":
                self.parse_env()
            elif kw == "proof":
                self.parse_proof()
            else:
                self.i -= 1
                raise self.fail("expected system, program, env or proof")
        return self.ws

    def parse_system(self) -> None:
        name = self.ident("system name")
        if self.ws.system is not None:
            raise self.fail("a workspace holds one system")
        self.expect("{")
        preds: list[DataPredicate] = []
        cons: dict[str, Constructor] = {}
        vocab_order: list[str] = []
        types: list[tuple[str, list[str], str]] = []
        while self.peek().text != "}":
            kw = self.ident("declaration")
            if kw in ("inductive", "coinductive"):
                while True:
                    pname = self.ident("predicate name")
                    if pname in FORMULA_HEADS:
                        raise self.fail(f"'{pname}' is reserved")
                    preds.append(DataPredicate(
                        pname,
                        Kind.INDUCTIVE if kw == "inductive" else Kind.COINDUCTIVE,
                        len(preds)))
                    if self.peek().text == ",":
                        self.next()
                        continue
                    break
                self.expect(";")
            elif kw == "constructor":
                cname = self.ident("constructor name")
                self.expect(":")
                args: list[str] = []
                first = self.ident("predicate name")
                if self.peek().text in ("*", "->"):
                    args.append(first)
                    while self.peek().text == "*":
                        self.next()
                        args.append(self.ident("predicate name"))
                    self.expect("->")
                    result = self.ident("predicate name")
                else:
                    result = first
                self.expect(";")
                if cname not in cons:
                    cons[cname] = Constructor(cname, len(args))
                    vocab_order.append(cname)
                elif cons[cname].arity != len(args):
                    raise self.fail(f"constructor '{cname}' redeclared at a "
                                    f"different arity")
                types.append((cname, args, result))
            else:
                self.i -= 1
                raise self.fail("expected inductive, coinductive or constructor")
        self.expect("}")
        by_name = {p.name: p for p in preds}

        def pred(nm: str) -> DataPredicate:
            if nm not in by_name:
                raise self.fail(f"unknown predicate '{nm}'")
            return by_name[nm]

        self.ws.system = DataSystem(
            vocabulary=tuple(cons[c] for c in vocab_order),
            predicates=tuple(preds),
            types=tuple(ConstructorType(cons[c], tuple(pred(a) for a in args),
                                        pred(res))
                        for c, args, res in types))
        self.ws.system_name = name

    def _need_system(self) -> DataSystem:
        if self.ws.system is None:
            raise self.fail("no system declared yet")
        return self.ws.system

    # -- programs --------------------------------------------------------------------

    def parse_program(self) -> None:
        name = self.ident("program name")
        ds = self._need_system()
        self.expect("{")
        raw: list[Equation] = []
        fnames = {name}
        while self.peek().text != "}":
            fn = self.ident("function name")
            fnames.add(fn)
            patterns: list[Term] = []
            if self.peek().text == "(":
                self.next()
                if self.peek().text != ")":
                    patterns.append(self.parse_pattern(ds))
                    while self.peek().text == ",":
                        self.next()
                        patterns.append(self.parse_pattern(ds))
                self.expect(")")
            self.expect("=")
            rhs = self.parse_term(ds)
            self.expect(";")
            raw.append(Equation(fn, tuple(patterns), rhs))
        self.expect("}")
        known = fnames | self.ws.function_names() | self.ws.binding_names() \
            | {e.function for e in standard_functions(ds)}
        eqs = [Equation(e.function, e.patterns, _vars_from_funs(e.rhs, known))
               for e in raw]
        if name not in {e.function for e in eqs}:
            raise self.fail(f"program '{name}' does not define '{name}'")
        self.ws.programs[name] = assemble_program(ds, eqs, name)

    def parse_pattern(self, ds: DataSystem) -> Term:
        t = self.parse_term(ds)

        def check(u: Term) -> Term:
            if isinstance(u, Fun):
                if u.args:
                    raise self.fail(f"'{u.name}' is not a constructor")
                return Var(u.name)
            if not u.args:
                return u
            return type(u)(u.name, tuple(check(a) for a in u.args))

        return check(t)

    def parse_term(self, ds: DataSystem) -> Term:
        left = self.parse_term_atom(ds)
        if self.peek().text == ":":
            self.next()
            right = self.parse_term(ds)
            c = ds.constructor("cons")
            if c is None or c.arity != 2:
                raise self.fail("':' needs a binary constructor named 'cons'")
            return Con("cons", (left, right))
        return left

    def parse_term_atom(self, ds: DataSystem) -> Term:
        if self.peek().text == "(":
            self.next()
            t = self.parse_term(ds)
            self.expect(")")
            return t
        name = self.ident("term")
        args: list[Term] = []
        if self.peek().text == "(":
            self.next()
            if self.peek().text != ")":
                args.append(self.parse_term(ds))
                while self.peek().text == ",":
                    self.next()
                    args.append(self.parse_term(ds))
            self.expect(")")
        c = ds.constructor(name)
        if c is not None:
            if len(args) != c.arity:
                raise self.fail(f"constructor '{name}' has arity {c.arity}, "
                                f"applied to {len(args)} arguments")
            return Con(name, tuple(args))
        return Fun(name, tuple(args))

    # -- environments -------------------------------------------------------------------

    def parse_env(self) -> None:
        name = self.ident("env name")
        ds = self._need_system()
        self.expect("{")
        bindings: dict[str, RegularCoterm | GeneratorBinding] = {}
        while self.peek().text != "}":
            v = self.ident("binding name")
            if v in bindings:
                raise self.fail(f"binding '{v}' rebound")
            self.expect("=")
            bindings[v] = self.parse_binding_rhs(ds)
            self.expect(";")
        self.expect("}")
        self.ws.envs[name] = DiagramEnv.of(bindings)

    def parse_binding_rhs(self, ds: DataSystem):
        t = self.peek()
        if t.kind == "ident" and ds.constructor(t.text) is None and t.text != "rec" \
                and t.text in self.ws.programs:
            gen_name = self.next().text
            self.expect("(")
            args: list[str] = []
            if self.peek().text != ")":
                args.append(self.ident("binding name"))
                while self.peek().text == ",":
                    self.next()
                    args.append(self.ident("binding name"))
            self.expect(")")
            prog = self.ws.programs[gen_name]
            return GeneratorBinding(prog, prog.principal, tuple(args))
        nodes: list[CotermNode | None] = []

        def chain(recvars: dict[str, int]):
            left = atom(recvars)
            if self.peek().text == ":":
                self.next()
                c = ds.constructor("cons")
                if c is None or c.arity != 2:
                    raise self.fail("':' needs a binary constructor named 'cons'")
                slot = len(nodes)
                nodes.append(None)
                right = chain(recvars)
                nodes[slot] = CotermNode("cons", (left, right))
                return slot
            return left

        def atom(recvars: dict[str, int]):
            tok = self.peek()
            if tok.text == "(":
                self.next()
                out = chain(recvars)
                self.expect(")")
                return out
            if tok.text == "rec":
                self.next()
                rv = self.ident("cycle variable")
                self.expect(".")
                slot = len(nodes)
                nodes.append(None)
                inner = chain({**recvars, rv: slot})
                if not isinstance(inner, int) or inner == slot:
                    raise self.fail("a cycle must pass through a constructor")
                if nodes[inner] is None:
                    raise self.fail("degenerate cycle")
                nodes[slot] = nodes[inner]
                return slot
            name2 = self.ident("coterm")
            c = ds.constructor(name2)
            if c is not None:
                kids: list[object] = []
                if self.peek().text == "(":
                    self.next()
                    if self.peek().text != ")":
                        kids.append(chain(recvars))
                        while self.peek().text == ",":
                            self.next()
                            kids.append(chain(recvars))
                    self.expect(")")
                if len(kids) != c.arity:
                    raise self.fail(f"constructor '{name2}' has arity {c.arity}, "
                                    f"got {len(kids)} children")
                nodes.append(CotermNode(name2, tuple(kids)))
                return len(nodes) - 1
            if name2 in recvars:
                return recvars[name2]
            return name2  # cross-binding reference

        entry = chain({})
        if not isinstance(entry, int):
            raise self.fail("a binding must start with a constructor, rec, "
                            "or a program call")
        filled = tuple(n if n is not None else CotermNode("?", ())
                       for n in nodes)
        return RegularCoterm(filled, entry)

    # -- formulas and proofs ---------------------------------------------------------------

    def parse_formula(self) -> Formula:
        ds = self._need_system()
        self.expect("(")
        if self.peek().text == "=":
            head = self.next().text
        else:
            head = self.ident("formula head")
        if head == "and" or head == "or" or head == "imp":
            left = self.parse_formula()
            right = self.parse_formula()
            self.expect(")")
            cls = {"and": And, "or": Or, "imp": Imp}[head]
            return cls(left, right)
        if head in ("ex", "all"):
            var = self.ident("variable")
            body = self.parse_formula()
            self.expect(")")
            return (Exists if head == "ex" else Forall)(var, body)
        if head == "=":
            left = self.parse_sexp_term()
            right = self.parse_sexp_term()
            self.expect(")")
            return EqAtom(left, right)
        if ds.predicate(head) is None:
            raise self.fail(f"unknown predicate '{head}'")
        term = self.parse_sexp_term()
        self.expect(")")
        return DataAtom(head, term)

    def parse_sexp_term(self) -> Term:
        ds = self._need_system()
        if self.peek().text == "(":
            self.next()
            name = self.ident("term head")
            args: list[Term] = []
            while self.peek().text != ")":
                args.append(self.parse_sexp_term())
            self.expect(")")
            return self._resolve_sexp_name(ds, name, tuple(args), True)
        name = self.ident("term")
        return self._resolve_sexp_name(ds, name, (), False)

    def _resolve_sexp_name(self, ds, name, args, applied) -> Term:
        c = ds.constructor(name)
        if c is not None:
            if len(args) != c.arity:
                raise self.fail(f"constructor '{name}' has arity {c.arity}")
            return Con(name, args)
        known = self.ws.function_names() | self.ws.binding_names() \
            | {e.function for e in standard_functions(ds)}
        if applied or name in known:
            return Fun(name, args)
        return Var(name)

    def parse_proof(self) -> None:
        name = self.ident("proof name")
        self.expect("{")
        d = self.parse_derivation()
        self.expect("}")
        self.ws.proofs[name] = d

    def parse_derivation(self) -> Derivation:
        ds = self._need_system()
        self.expect("(")
        rule = self.ident("rule name")
        conclusion = self.parse_formula()
        self.expect("(")
        premises: list[Derivation] = []
        while self.peek().text != ")":
            premises.append(self.parse_derivation())
        self.expect(")")
        attrs: list[tuple[str, object]] = []
        self.expect("{")
        while self.peek().text != "}":
            key = self.ident("attribute key")
            attrs.append((key.replace("-", "_"), self.parse_attr_value(key, ds)))
        self.expect("}")
        self.expect(")")
        return Derivation(rule, conclusion, tuple(premises), tuple(attrs))

    def parse_attr_value(self, key: str, ds: DataSystem):
        key = key.replace("-", "_")
        if key in ("i", "idx"):
            n = self.ident("number")
            if not n.isdigit():
                raise self.fail(f"attribute '{key}' needs a number")
            return int(n)
        if key == "witness":
            return self.parse_sexp_term()
        if key == "formula":
            return self.parse_formula()
        if key == "type":
            self.expect("(")
            cname = self.ident("constructor")
            preds: list[str] = []
            while self.peek().text != ")":
                preds.append(self.ident("predicate"))
            self.expect(")")
            c = ds.constructor(cname)
            if c is None or len(preds) != c.arity + 1:
                raise self.fail(f"bad constructor type for '{cname}'")
            ct = ConstructorType(
                c, tuple(_pred_of(ds, p, self) for p in preds[:-1]),
                _pred_of(ds, preds[-1], self))
            if ct not in ds.types:
                raise self.fail(f"type '{ct}' is not declared by the system")
            return ct
        if key == "pos":
            self.expect("(")
            out: list[int] = []
            while self.peek().text != ")":
                n = self.ident("number")
                if not n.isdigit():
                    raise self.fail("positions are numbers")
                out.append(int(n))
            self.expect(")")
            return tuple(out)
        if key in ("case_vars", "case_labels"):
            self.expect("(")
            groups: list[tuple[str, ...]] = []
            while self.peek().text != ")":
                self.expect("(")
                group: list[str] = []
                while self.peek().text != ")":
                    group.append(self.ident("name"))
                self.expect(")")
                groups.append(tuple(group))
            self.expect(")")
            return tuple(groups)
        return self.ident("attribute value")


def _pred_of(ds: DataSystem, name: str, p: Parser) -> DataPredicate:
    out = ds.predicate(name)
    if out is None:
        raise p.fail(f"unknown predicate '{name}'")
    return out


def _vars_from_funs(t: Term, known: set[str]) -> Term:
    """Nullary applications of unknown names were parsed as functions;
    inside program right-hand sides they are variables."""
    if isinstance(t, Fun) and not t.args and t.name not in known:
        return Var(t.name)
    if not t.args:
        return t
    return type(t)(t.name, tuple(_vars_from_funs(a, known) for a in t.args))


def parse_workspace(source: str) -> Workspace:
    ws = Parser(tokenize(source)).parse_workspace()
    resolve_workspace(ws)
    return ws


def parse_files(paths: list[str]) -> Workspace:
    src = "\n".join(open(p, encoding="utf-8").read() for p in paths)
    return parse_workspace(src)


class ResolutionError(Exception):
    pass


def resolve_workspace(ws: Workspace) -> None:
    """Total name resolution before any command runs."""
    if ws.system is None:
        raise ResolutionError("no system declared")
    rep = validate_system(ws.system)
    if not rep.ok:
        raise ResolutionError(f"system '{ws.system_name}': {rep}")
    for name, prog in ws.programs.items():
        rep = validate_program(prog, ws.system)
        if not rep.ok:
            raise ResolutionError(f"program '{name}': {rep}")
    if len(ws.programs) > 1:
        rep = validate_program(ws.merged_program(), ws.system)
        if not rep.ok:
            raise ResolutionError(f"programs conflict: {rep}")
    for name, env in ws.envs.items():
        bound = set(env.names())
        for b, value in env.bindings:
            if isinstance(value, RegularCoterm):
                crep = value.validate(ws.system)
                if not crep.ok:
                    raise ResolutionError(f"env '{name}', binding '{b}': {crep}")
                for node in value.nodes:
                    for ch in node.children:
                        if isinstance(ch, str) and ch not in bound:
                            raise ResolutionError(
                                f"env '{name}', binding '{b}': unknown "
                                f"binding '{ch}'")
            else:
                for a in value.args:
                    if a not in bound:
                        raise ResolutionError(
                            f"env '{name}', binding '{b}': unknown binding '{a}'")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def show_term(t: Term) -> str:
    return str(t)


def show_system(ws: Workspace) -> str:
    ds = ws.system
    lines = [f"system {ws.system_name or 'main'} {{"]
    for p in ds.predicates:
        lines.append(f"  {p.kind.value} {p.name};")
    for ct in ds.types:
        if ct.argument_predicates:
            args = " * ".join(q.name for q in ct.argument_predicates)
            lines.append(f"  constructor {ct.constructor.name} : {args} -> "
                         f"{ct.result_predicate.name};")
        else:
            lines.append(f"  constructor {ct.constructor.name} : "
                         f"{ct.result_predicate.name};")
    lines.append("}")
    return "\n".join(lines)


def show_program(name: str, prog: Program) -> str:
    lines = [f"program {name} {{"]
    for e in prog.body:
        if reserved_function(e.function):
            continue
        args = ", ".join(str(p) for p in e.patterns)
        head = f"{e.function}({args})" if e.patterns else e.function
        lines.append(f"  {head} = {e.rhs};")
    lines.append("}")
    return "\n".join(lines)


def show_env(name: str, env: DiagramEnv) -> str:
    lines = [f"env {name} {{"]
    for b, value in env.bindings:
        lines.append(f"  {b} = {show_binding(value)};")
    lines.append("}")
    return "\n".join(lines)


def show_binding(value) -> str:
    if isinstance(value, GeneratorBinding):
        return f"{value.principal}({', '.join(value.args)})"
    ct: RegularCoterm = value
    names: dict[int, str] = {}
    counter = [0]

    def show(ref, stack) -> str:
        if isinstance(ref, str):
            return ref
        if ref in stack:
            if ref not in names:
                counter[0] += 1
                names[ref] = f"rv_{counter[0]}"
            return names[ref]
        node = ct.nodes[ref]
        kids = [show(ch, stack | {ref}) for ch in node.children]
        if node.constructor == "cons" and len(kids) == 2:
            inner = f"{kids[0]} : {kids[1]}"
        elif kids:
            inner = f"{node.constructor}({', '.join(kids)})"
        else:
            inner = node.constructor
        if ref in names:
            return f"(rec {names[ref]}. {inner})"
        return inner

    # two passes so cycle names exist before the rec wrapper prints
    show(ct.entry, frozenset())
    return show(ct.entry, frozenset())


def show_formula(f: Formula) -> str:
    if isinstance(f, DataAtom):
        return f"({f.predicate} {show_sexp_term(f.term)})"
    if isinstance(f, EqAtom):
        return f"(= {show_sexp_term(f.left)} {show_sexp_term(f.right)})"
    if isinstance(f, And):
        return f"(and {show_formula(f.left)} {show_formula(f.right)})"
    if isinstance(f, Or):
        return f"(or {show_formula(f.left)} {show_formula(f.right)})"
    if isinstance(f, Imp):
        return f"(imp {show_formula(f.left)} {show_formula(f.right)})"
    if isinstance(f, Exists):
        return f"(ex {f.var} {show_formula(f.body)})"
    assert isinstance(f, Forall)
    return f"(all {f.var} {show_formula(f.body)})"


def show_sexp_term(t: Term) -> str:
    if not t.args and isinstance(t, (Var, Con)):
        return t.name
    if not t.args and isinstance(t, Fun):
        return f"({t.name})"
    return f"({t.name} {' '.join(show_sexp_term(a) for a in t.args)})"


def show_attr_value(key: str, v) -> str:
    if isinstance(v, int):
        return str(v)
    if isinstance(v, ConstructorType):
        names = [p.name for p in v.argument_predicates] + [v.result_predicate.name]
        return f"({v.constructor.name} {' '.join(names)})"
    if isinstance(v, Term):
        return show_sexp_term(v)
    if isinstance(v, Formula):
        return show_formula(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "(" + " ".join("(" + " ".join(x) + ")" for x in v) + ")"
        return "(" + " ".join(str(x) for x in v) + ")"
    return str(v)


def show_derivation(d: Derivation, indent: int = 0) -> str:
    pad = "  " * indent
    attrs = " ".join(f"{k.replace('_', '-')} {show_attr_value(k, v)}"
                     for k, v in d.attrs)
    if not d.premises:
        return f"{pad}({d.rule} {show_formula(d.conclusion)} () {{{attrs}}})"
    inner = "\n".join(show_derivation(p, indent + 1) for p in d.premises)
    return (f"{pad}({d.rule} {show_formula(d.conclusion)} (\n{inner}\n"
            f"{pad}) {{{attrs}}})")


def show_workspace(ws: Workspace) -> str:
    parts = [show_system(ws)]
    for name, p in ws.programs.items():
        parts.append(show_program(name, p))
    for name, e in ws.envs.items():
        parts.append(show_env(name, e))
    for name, d in ws.proofs.items():
        parts.append(f"proof {name} {{\n{show_derivation(d, 1)}\n}}")
    return "\n\n".join(parts) + "\n"


def show_approximation(a: Approximation) -> str:
    """Stream-flattened rendering: `1:0:1:0:<cut@4>`."""
    if isinstance(a, Cut):
        return f"<cut@{a.depth}>"
    if isinstance(a, Stalled):
        if a.reason.kind == "no-matching-equation":
            return "<stall:no-match>"
        return f"<stall:budget@{a.reason.steps}>"
    assert isinstance(a, ApproxNode)
    if a.constructor == "cons" and len(a.children) == 2 \
            and isinstance(a.children[0], ApproxNode) \
            and not a.children[0].children:
        return f"{a.children[0].constructor}:{show_approximation(a.children[1])}"
    if not a.children:
        return a.constructor
    return f"{a.constructor}({', '.join(show_approximation(c) for c in a.children)})"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

class Reporter:
    def __init__(self, tagged: bool):
        self.tagged = tagged
        self.lines: list[str] = []

    def kv(self, key: str, value) -> None:
        if self.tagged:
            self.lines.append(f"{key}\t{value}")

    def text(self, line: str) -> None:
        if not self.tagged:
            self.lines.append(line)

    def emit(self) -> None:
        for line in self.lines:
            print(line)


def _load(args) -> Workspace:
    if not args.files:
        raise ResolutionError("no workspace files given")
    return parse_files(args.files)


def cmd_check(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    r.text(f"system {ws.system_name}: ok "
           f"({len(ws.system.vocabulary)} constructors, "
           f"{len(ws.system.predicates)} predicates)")
    r.kv("SYSTEM", "ok")
    for name in ws.programs:
        r.text(f"program {name}: ok")
        r.kv(f"PROGRAM {name}", "ok")
    for name in ws.envs:
        r.text(f"env {name}: ok")
        r.kv(f"ENV {name}", "ok")
    r.emit()
    return 0


def _session(ws: Workspace, args) -> Session:
    name = getattr(args, "program", None)
    prog = ws.merged_program() if name is None else ws.pick_program(name)
    env = None
    if getattr(args, "env", None):
        if args.env not in ws.envs:
            raise ResolutionError(f"unknown env '{args.env}'")
        env = ws.envs[args.env]
    elif len(ws.envs) == 1:
        env = next(iter(ws.envs.values()))
    return Session(prog, ws.system, env)


def _parse_cli_term(ws: Workspace, text: str) -> Term:
    p = Parser(tokenize(text), ws)
    t = p.parse_term(ws.system)
    if not p.at_end():
        raise p.fail("trailing input after term")
    known = ws.function_names() | ws.binding_names() \
        | {e.function for e in standard_functions(ws.system)}
    return _vars_from_funs(t, known)


def cmd_eval(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    sess = _session(ws, args)
    t = _parse_cli_term(ws, args.term)
    a = sess.observe(t, args.depth, args.budget)
    rendered = show_approximation(a)
    r.text(rendered)
    r.kv("APPROXIMATION", rendered)
    stall = first_stall(a)
    if stall is not None:
        path, leaf = stall
        r.kv("STALL", f"{list(path)} {leaf.reason}")
        r.emit()
        return 1
    r.kv("STALL", "none")
    r.emit()
    return 0


def cmd_bisim(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    sess = _session(ws, args)
    t1 = _parse_cli_term(ws, args.term1)
    t2 = _parse_cli_term(ws, args.term2)
    res = derives_omega(sess.program, None, t1, t2, args.depth, args.budget,
                        session=sess)
    r.text(str(res))
    r.kv("VERDICT", res.status)
    if res.status != "equal-up-to-depth":
        r.kv("PATH", list(res.path))
    r.emit()
    return 0 if res.equal else 1


def cmd_productive(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    prog = ws.pick_program(args.prog)
    verdict = check_primitive_corecursive(prog, ws.system)
    r.text(verdict.report())
    r.kv("VERDICT", "primitive-corecursive" if verdict.accepted else "rejected")
    if not verdict.accepted:
        r.kv("REASON", verdict.reason)
    r.emit()
    return 0 if verdict.accepted else 1


def cmd_prove_corec(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    prog = ws.pick_program(args.prog)
    try:
        d, compiled = prove_corec_program(prog, ws.system)
    except ExtractError as e:
        r.text(f"failed: {e}")
        r.kv("VERDICT", "failed")
        r.kv("REASON", str(e))
        r.emit()
        return 1
    res = check_proof(ws.system, compiled, d)
    r.kv("VERDICT", "proved" if res.ok else "failed")
    if res.ok:
        r.text(res.judgment())
        r.kv("JUDGMENT", res.judgment())
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(show_derivation(d) + "\n")
        r.emit()
        return 0
    r.text("generated proof failed to check")
    r.emit()
    return 1


def cmd_check_proof(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    if args.name not in ws.proofs:
        raise ResolutionError(f"unknown proof '{args.name}'")
    prog = ws.merged_program() if args.program is None else ws.pick_program(args.program)
    res = check_proof(ws.system, prog, ws.proofs[args.name])
    if res.ok:
        r.text(res.judgment())
        r.kv("VERDICT", "ok")
        r.kv("JUDGMENT", res.judgment())
    else:
        for v in res.violations:
            r.text(str(v))
            r.kv("VIOLATION", str(v))
        r.kv("VERDICT", "invalid")
    r.emit()
    return 0 if res.ok else 1


def cmd_normalize(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    if args.name not in ws.proofs:
        raise ResolutionError(f"unknown proof '{args.name}'")
    prog = ws.merged_program() if args.program is None else ws.pick_program(args.program)
    d = ws.proofs[args.name]
    before = check_proof(ws.system, prog, d)
    if not before.ok:
        r.text("input proof does not check")
        r.kv("VERDICT", "invalid")
        r.emit()
        return 1
    n = normalize(d)
    out = show_derivation(n)
    r.text(out)
    r.kv("VERDICT", "ok")
    r.kv("DETOUR-FREE", str(not has_detour(n)).lower())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    r.emit()
    return 0


def cmd_classify(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    p = Parser(tokenize(args.formula), ws)
    f = p.parse_formula()
    cls = classify_formula(f)
    r.text(cls.value)
    r.kv("CLASS", cls.value)
    r.emit()
    return 0


def cmd_extract(args) -> int:
    r = Reporter(args.format == "tagged")
    ws = _load(args)
    if args.name in ws.proofs:
        prog = ws.merged_program() if args.program is None else ws.pick_program(args.program)
        d = normalize(ws.proofs[args.name])
    elif args.name in ws.programs:
        d, prog = prove_corec_program(ws.programs[args.name], ws.system)
        d = normalize(d)
    else:
        raise ResolutionError(f"'{args.name}' names no proof or program")
    try:
        result = extract(d, prog, ws.system)
    except ExtractError as e:
        r.text(f"extraction failed: {e}")
        r.kv("VERDICT", "failed")
        r.emit()
        return 1
    text = show_program(result.principal, result.program)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(show_system(ws) + "\n\n" + text + "\n")
        r.text(f"wrote {args.out}")
    else:
        r.text(text)
    r.kv("VERDICT", "extracted")
    r.kv("PRINCIPAL", result.principal)
    r.text("certificate:")
    for line in result.certificate.render().splitlines():
        r.text("  " + line)
        r.kv("CERT", line)
    r.emit()
    return 0


def cmd_roundtrip(args) -> int:
    r = Reporter(args.format == "tagged")
    report = roundtrip_report(depth=args.depth, seed=args.seed,
                              inputs_per_entry=args.inputs)
    r.text(report.render())
    for name, stages in report.entries.items():
        verdict = "pass" if all(s.ok for s in stages) else "fail"
        r.kv(f"ENTRY {name}", verdict)
    r.kv("VERDICT", "pass" if report.ok else "fail")
    r.emit()
    return 0 if report.ok else 1


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coeq",
        description="equational programs over inductive/coinductive data: "
                    "evaluate, check productivity, check proofs, extract")
    ap.add_argument("--format", choices=["text", "tagged"], default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    def files(p):
        p.add_argument("files", nargs="+", help="workspace .cds files")

    p = sub.add_parser("check", help="validate system, programs and envs")
    files(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", help="observe a term to a depth")
    files(p)
    p.add_argument("term")
    p.add_argument("--depth", type=int, default=16)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--env")
    p.add_argument("--program")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("bisim", help="observational equality to a depth")
    files(p)
    p.add_argument("term1")
    p.add_argument("term2")
    p.add_argument("--depth", type=int, default=16)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--env")
    p.add_argument("--program")
    p.set_defaults(fn=cmd_bisim)

    p = sub.add_parser("productive", help="primitive-corecurrence check")
    files(p)
    p.add_argument("prog")
    p.set_defaults(fn=cmd_productive)

    p = sub.add_parser("prove-corec", help="corecursion to coinduction proof")
    files(p)
    p.add_argument("prog")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_prove_corec)

    p = sub.add_parser("check-proof", help="check a derivation")
    files(p)
    p.add_argument("name")
    p.add_argument("--program")
    p.set_defaults(fn=cmd_check_proof)

    p = sub.add_parser("normalize", help="remove logical detours")
    files(p)
    p.add_argument("name")
    p.add_argument("--program")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("classify", help="polarity class of a formula")
    files(p)
    p.add_argument("formula")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("extract", help="realizability extraction")
    files(p)
    p.add_argument("name")
    p.add_argument("--program")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("roundtrip", help="stock-library pipeline")
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--seed", type=int, default=20240817)
    p.add_argument("--inputs", type=int, default=10)
    p.set_defaults(fn=cmd_roundtrip)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ResolutionError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
