"""The intrinsic-theory proof kernel.

Formulas are first-order over data atoms and equations; the logic is
minimal (no falsum, no negation, no excluded middle).  Derivations are
rule-labeled trees checked nodewise: logical rules, data introduction for
inductive predicates, data elimination for coinductive ones (constructor
and destructor shape), injectivity/separation/reflexivity for equations,
program equations as atomic rewrite inferences, induction, and
coinduction restricted to strongly-positive invariant formulas with the
decomposition premise required.

`normalize` removes logical detours (an introduction feeding its matching
elimination as major premise); on detour-free derivations with
strongly-positive endpoints every node formula stays strongly positive,
which `assert_sp_proof` scans for.
"""
from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass

from .program import Program, pi_name
from .system import ConstructorType, DataSystem
from .terms import Con, Fun, Term, Var, substitute, variables


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class DataAtom(Formula):
    predicate: str
    term: Term

    def __str__(self) -> str:
        return f"{self.predicate}({self.term})"


@dataclass(frozen=True, slots=True)
class EqAtom(Formula):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True, slots=True)
class Imp(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula

    def __str__(self) -> str:
        return f"(ex {self.var}. {self.body})"


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula

    def __str__(self) -> str:
        return f"(all {self.var}. {self.body})"


def fv(f: Formula) -> set[str]:
    if isinstance(f, DataAtom):
        return variables(f.term)
    if isinstance(f, EqAtom):
        return variables(f.left) | variables(f.right)
    if isinstance(f, (And, Or, Imp)):
        return fv(f.left) | fv(f.right)
    assert isinstance(f, (Exists, Forall))
    return fv(f.body) - {f.var}


def _fresh_name(base: str, avoid: set[str]) -> str:
    cand = base
    while cand in avoid:
        cand += "'"
    return cand


def subst_formula(f: Formula, var: str, t: Term) -> Formula:
    """Capture-avoiding substitution of t for free occurrences of var."""
    if isinstance(f, DataAtom):
        return DataAtom(f.predicate, substitute(f.term, {var: t}))
    if isinstance(f, EqAtom):
        return EqAtom(substitute(f.left, {var: t}), substitute(f.right, {var: t}))
    if isinstance(f, (And, Or, Imp)):
        return type(f)(subst_formula(f.left, var, t), subst_formula(f.right, var, t))
    assert isinstance(f, (Exists, Forall))
    if f.var == var:
        return f
    if f.var in variables(t) and var in fv(f.body):
        fresh = _fresh_name(f.var, variables(t) | fv(f.body) | {var})
        body = subst_formula(f.body, f.var, Var(fresh))
        return type(f)(fresh, subst_formula(body, var, t))
    return type(f)(f.var, subst_formula(f.body, var, t))


def alpha_eq(a: Formula, b: Formula) -> bool:
    def go(x: Formula, y: Formula, env: tuple[tuple[str, str], ...]) -> bool:
        if type(x) is not type(y):
            return False
        if isinstance(x, DataAtom):
            return x.predicate == y.predicate and _teq(x.term, y.term, env)
        if isinstance(x, EqAtom):
            return _teq(x.left, y.left, env) and _teq(x.right, y.right, env)
        if isinstance(x, (And, Or, Imp)):
            return go(x.left, y.left, env) and go(x.right, y.right, env)
        assert isinstance(x, (Exists, Forall))
        return go(x.body, y.body, env + ((x.var, y.var),))

    def _teq(s: Term, t: Term, env) -> bool:
        if isinstance(s, Var) or isinstance(t, Var):
            if not (isinstance(s, Var) and isinstance(t, Var)):
                return False
            for xa, xb in reversed(env):
                if s.name == xa or t.name == xb:
                    return s.name == xa and t.name == xb
            return s.name == t.name
        if type(s) is not type(t) or s.name != t.name or len(s.args) != len(t.args):
            return False
        return all(_teq(a2, b2, env) for a2, b2 in zip(s.args, t.args))

    return go(a, b, ())


# ---------------------------------------------------------------------------
# Polarity
# ---------------------------------------------------------------------------

class PolarityClass(enum.Enum):
    STRONGLY_POSITIVE = "strongly-positive"
    POSITIVE = "positive"
    UNIPOLAR = "unipolar"
    GENERAL = "general"


def classify_formula(f: Formula) -> PolarityClass:
    """Tightest of strongly-positive < positive < unipolar < general.

    Negative occurrences are those under an odd number of left sides of
    implications; only data atoms carry polarity.
    """
    occs: list[tuple[str, int]] = []
    flags = {"imp": False, "forall": False}

    def walk(g: Formula, sign: int) -> None:
        if isinstance(g, DataAtom):
            occs.append((g.predicate, sign))
        elif isinstance(g, EqAtom):
            pass
        elif isinstance(g, (And, Or)):
            walk(g.left, sign)
            walk(g.right, sign)
        elif isinstance(g, Imp):
            flags["imp"] = True
            walk(g.left, -sign)
            walk(g.right, sign)
        elif isinstance(g, Exists):
            walk(g.body, sign)
        else:
            assert isinstance(g, Forall)
            flags["forall"] = True
            walk(g.body, sign)

    walk(f, 1)
    if not flags["imp"] and not flags["forall"]:
        return PolarityClass.STRONGLY_POSITIVE
    if all(s > 0 for _, s in occs):
        return PolarityClass.POSITIVE
    both = {p for p, s in occs if s > 0} & {p for p, s in occs if s < 0}
    if not both:
        return PolarityClass.UNIPOLAR
    return PolarityClass.GENERAL


# ---------------------------------------------------------------------------
# The decomposition disjunction Dcm
# ---------------------------------------------------------------------------

def build_dcm(ds: DataSystem, pred_name: str, phi: Formula, hole: str,
              x: str) -> Formula:
    """The disjunction over constructor decompositions of a coinductive
    predicate, with phi substituted at recursive argument positions.

    For boolean streams this is  ex z0. ex z1. B(z0) & (phi[z1] & x = z0:z1).
    """
    pred = ds.predicate(pred_name)
    if pred is None:
        raise ValueError(f"unknown predicate '{pred_name}'")
    types = ds.types_for_result(pred)
    if not types:
        raise ValueError(f"predicate '{pred_name}' has an empty constructor set")
    avoid = fv(phi) | {x, hole}
    disjuncts: list[Formula] = []
    for ct in types:
        r = ct.constructor.arity
        zs: list[str] = []
        for i in range(r):
            z = _fresh_name(f"z{i}", avoid | set(zs))
            zs.append(z)
        eq = EqAtom(Var(x), Con(ct.constructor.name, tuple(Var(z) for z in zs)))
        body: Formula = eq
        for i in range(r - 1, -1, -1):
            ei = ct.argument_predicates[i]
            if ei.name == pred_name:
                conj: Formula = subst_formula(phi, hole, Var(zs[i]))
            else:
                conj = DataAtom(ei.name, Var(zs[i]))
            body = And(conj, body)
        for z in reversed(zs):
            body = Exists(z, body)
        disjuncts.append(body)
    out = disjuncts[-1]
    for d in reversed(disjuncts[:-1]):
        out = Or(d, out)
    return out


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

Attrs = tuple[tuple[str, object], ...]


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Formula
    premises: tuple["Derivation", ...] = ()
    attrs: Attrs = ()

    def attr(self, key: str, default=None):
        for k, v in self.attrs:
            if k == key:
                return v
        return default

    def nodes(self):
        """All nodes with their paths, preorder."""
        stack = [((), self)]
        while stack:
            path, d = stack.pop()
            yield path, d
            for i in range(len(d.premises) - 1, -1, -1):
                stack.append((path + (i,), d.premises[i]))


def assume(label: str, f: Formula) -> Derivation:
    return Derivation("assume", f, (), (("label", label),))


def imp_intro(label: str, hyp: Formula, body: Derivation) -> Derivation:
    return Derivation("imp-intro", Imp(hyp, body.conclusion), (body,),
                      (("label", label),))


def imp_elim(d_imp: Derivation, d_arg: Derivation) -> Derivation:
    assert isinstance(d_imp.conclusion, Imp)
    return Derivation("imp-elim", d_imp.conclusion.right, (d_imp, d_arg))


def and_intro(a: Derivation, b: Derivation) -> Derivation:
    return Derivation("and-intro", And(a.conclusion, b.conclusion), (a, b))


def and_elim(i: int, d: Derivation) -> Derivation:
    assert isinstance(d.conclusion, And)
    side = d.conclusion.left if i == 1 else d.conclusion.right
    return Derivation("and-elim", side, (d,), (("i", i),))


def or_intro(i: int, d: Derivation, other: Formula) -> Derivation:
    f = Or(d.conclusion, other) if i == 1 else Or(other, d.conclusion)
    return Derivation("or-intro", f, (d,), (("i", i),))


def or_elim(d_or: Derivation, label1: str, d1: Derivation,
            label2: str, d2: Derivation) -> Derivation:
    return Derivation("or-elim", d1.conclusion, (d_or, d1, d2),
                      (("label1", label1), ("label2", label2)))


def ex_intro(var: str, body: Formula, witness: Term, d: Derivation) -> Derivation:
    return Derivation("ex-intro", Exists(var, body), (d,),
                      (("witness", witness),))


def ex_elim(d_ex: Derivation, eigen: str, label: str, d_body: Derivation) -> Derivation:
    return Derivation("ex-elim", d_body.conclusion, (d_ex, d_body),
                      (("eigen", eigen), ("label", label)))


def all_intro(var: str, body: Formula, eigen: str, d: Derivation) -> Derivation:
    return Derivation("all-intro", Forall(var, body), (d,), (("eigen", eigen),))


def all_elim(d: Derivation, witness: Term) -> Derivation:
    assert isinstance(d.conclusion, Forall)
    return Derivation("all-elim",
                      subst_formula(d.conclusion.body, d.conclusion.var, witness),
                      (d,), (("witness", witness),))


def refl(t: Term) -> Derivation:
    return Derivation("refl", EqAtom(t, t))


def inj(i: int, d: Derivation) -> Derivation:
    eq = d.conclusion
    assert isinstance(eq, EqAtom)
    return Derivation("inj", EqAtom(eq.left.args[i - 1], eq.right.args[i - 1]),
                      (d,), (("i", i),))


def sep(d: Derivation, concl: Formula) -> Derivation:
    return Derivation("sep", concl, (d,))


def rewrite(eq_function: str, eq_index: int, direction: str,
            position: tuple[int, ...], d: Derivation, concl: Formula) -> Derivation:
    return Derivation("rewrite", concl, (d,),
                      (("fn", eq_function), ("idx", eq_index),
                       ("dir", direction), ("pos", tuple(position))))


def data_intro(ct: ConstructorType, args: tuple[Derivation, ...]) -> Derivation:
    term = Con(ct.constructor.name,
               tuple(_atom_term(p.conclusion) for p in args))
    return Derivation("data-intro", DataAtom(ct.result_predicate.name, term),
                      args, (("type", ct),))


def _atom_term(f: Formula) -> Term:
    assert isinstance(f, DataAtom)
    return f.term


def data_elim(ct: ConstructorType, i: int, d: Derivation) -> Derivation:
    src = d.conclusion
    assert isinstance(src, DataAtom)
    t = src.term
    if isinstance(t, Con) and t.name == ct.constructor.name:
        out = t.args[i - 1]
    else:
        out = Fun(pi_name(i), (t,))
    return Derivation("data-elim", DataAtom(ct.argument_predicates[i - 1].name, out),
                      (d,), (("type", ct), ("i", i)))


def induction(pred: str, hole: str, phi: Formula, d_major: Derivation,
              cases: tuple[Derivation, ...],
              case_vars: tuple[tuple[str, ...], ...],
              case_labels: tuple[tuple[str, ...], ...]) -> Derivation:
    t = _atom_term(d_major.conclusion)
    return Derivation("induction", subst_formula(phi, hole, t),
                      (d_major,) + cases,
                      (("pred", pred), ("var", hole), ("formula", phi),
                       ("case_vars", case_vars), ("case_labels", case_labels)))


def coinduction(pred: str, hole: str, phi: Formula, t: Term, label: str,
                d_init: Derivation, d_dcm: Derivation) -> Derivation:
    return Derivation("coinduction", DataAtom(pred, t), (d_init, d_dcm),
                      (("pred", pred), ("var", hole), ("formula", phi),
                       ("label", label)))


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

Assumptions = Counter  # Counter[(label, Formula)]


@dataclass(frozen=True)
class ProofViolation:
    path: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        where = "/".join(str(i) for i in self.path) or "root"
        return f"at {where}: {self.message}"


@dataclass
class CheckResult:
    ok: bool
    conclusion: Formula | None
    assumptions: Counter
    violations: list[ProofViolation]

    def judgment(self) -> str:
        if not self.ok:
            return "invalid: " + "; ".join(str(v) for v in self.violations)
        hyp = ", ".join(f"{label}: {f}" for (label, f) in sorted(
            self.assumptions.keys(), key=lambda kv: kv[0]))
        return f"{{{hyp}}} |- {self.conclusion}"


def _match_extend(pattern: Term, subject: Term, binds: dict[str, Term]) -> bool:
    if isinstance(pattern, Var):
        if pattern.name in binds:
            return binds[pattern.name] == subject
        binds[pattern.name] = subject
        return True
    if type(pattern) is not type(subject) or pattern.name != subject.name \
            or len(pattern.args) != len(subject.args):
        return False
    return all(_match_extend(p, s, binds)
               for p, s in zip(pattern.args, subject.args))


def _atom_slots(f: Formula) -> list[Term]:
    if isinstance(f, DataAtom):
        return [f.term]
    if isinstance(f, EqAtom):
        return [f.left, f.right]
    raise ValueError("not an atomic formula")


def _atom_get(f: Formula, pos: tuple[int, ...]) -> Term | None:
    try:
        t = _atom_slots(f)[pos[0] - 1]
        for i in pos[1:]:
            t = t.args[i - 1]
        return t
    except (IndexError, ValueError):
        return None


def _atom_put(f: Formula, pos: tuple[int, ...], new: Term) -> Formula | None:
    def put(t: Term, rest: tuple[int, ...]) -> Term:
        if not rest:
            return new
        args = list(t.args)
        args[rest[0] - 1] = put(t.args[rest[0] - 1], rest[1:])
        return type(t)(t.name, tuple(args))

    try:
        slots = _atom_slots(f)
        slots[pos[0] - 1] = put(slots[pos[0] - 1], pos[1:])
    except (IndexError, ValueError):
        return None
    if isinstance(f, DataAtom):
        return DataAtom(f.predicate, slots[0])
    return EqAtom(slots[0], slots[1])


class ProofChecker:
    def __init__(self, ds: DataSystem, program: Program):
        self.ds = ds
        self.program = program
        self.violations: list[ProofViolation] = []

    def bad(self, path, msg) -> Counter:
        self.violations.append(ProofViolation(path, msg))
        return Counter()

    def discharge(self, open_: Counter, label: str, f: Formula, path) -> Counter:
        out = Counter(open_)
        hit = False
        for (lab, g) in list(out):
            if lab == label:
                if alpha_eq(g, f):
                    hit = True
                    del out[(lab, g)]
                else:
                    self.bad(path, f"discharge of '{label}' expects {f}, found {g}")
        # vacuous discharge (not hit) is permitted in minimal logic
        del hit
        return out

    def check(self, d: Derivation, path: tuple[int, ...] = ()) -> Counter:
        opens = [self.check(p, path + (i,)) for i, p in enumerate(d.premises)]
        rule = d.rule
        f = d.conclusion
        try:
            handler = getattr(self, "_r_" + rule.replace("-", "_"))
        except AttributeError:
            return self.bad(path, f"unknown rule '{rule}'")
        return handler(d, f, opens, path)

    # each handler returns the node's open-assumption multiset

    def _r_assume(self, d, f, opens, path):
        label = d.attr("label")
        if not isinstance(label, str) or not label:
            return self.bad(path, "assumption without a label")
        return Counter({(label, f): 1})

    def _r_imp_intro(self, d, f, opens, path):
        if not isinstance(f, Imp) or len(d.premises) != 1:
            return self.bad(path, "implication introduction malformed")
        if not alpha_eq(d.premises[0].conclusion, f.right):
            return self.bad(path, "premise does not match implication conclusion")
        return self.discharge(opens[0], d.attr("label"), f.left, path)

    def _r_imp_elim(self, d, f, opens, path):
        if len(d.premises) != 2:
            return self.bad(path, "implication elimination needs two premises")
        major = d.premises[0].conclusion
        if not isinstance(major, Imp):
            return self.bad(path, "major premise is not an implication")
        if not alpha_eq(d.premises[1].conclusion, major.left):
            return self.bad(path, "minor premise does not match antecedent")
        if not alpha_eq(f, major.right):
            return self.bad(path, "conclusion does not match consequent")
        return opens[0] + opens[1]

    def _r_and_intro(self, d, f, opens, path):
        if not isinstance(f, And) or len(d.premises) != 2 \
                or not alpha_eq(d.premises[0].conclusion, f.left) \
                or not alpha_eq(d.premises[1].conclusion, f.right):
            return self.bad(path, "conjunction introduction malformed")
        return opens[0] + opens[1]

    def _r_and_elim(self, d, f, opens, path):
        i = d.attr("i")
        major = d.premises[0].conclusion if d.premises else None
        if i not in (1, 2) or not isinstance(major, And):
            return self.bad(path, "conjunction elimination malformed")
        want = major.left if i == 1 else major.right
        if not alpha_eq(f, want):
            return self.bad(path, "conclusion is not the selected conjunct")
        return opens[0]

    def _r_or_intro(self, d, f, opens, path):
        i = d.attr("i")
        if i not in (1, 2) or not isinstance(f, Or) or len(d.premises) != 1:
            return self.bad(path, "disjunction introduction malformed")
        want = f.left if i == 1 else f.right
        if not alpha_eq(d.premises[0].conclusion, want):
            return self.bad(path, "premise does not match selected disjunct")
        return opens[0]

    def _r_or_elim(self, d, f, opens, path):
        if len(d.premises) != 3:
            return self.bad(path, "disjunction elimination needs three premises")
        major = d.premises[0].conclusion
        if not isinstance(major, Or):
            return self.bad(path, "major premise is not a disjunction")
        if not alpha_eq(d.premises[1].conclusion, f) or not alpha_eq(d.premises[2].conclusion, f):
            return self.bad(path, "minor premises must both conclude the conclusion")
        o1 = self.discharge(opens[1], d.attr("label1"), major.left, path)
        o2 = self.discharge(opens[2], d.attr("label2"), major.right, path)
        return opens[0] + o1 + o2

    def _r_ex_intro(self, d, f, opens, path):
        w = d.attr("witness")
        if not isinstance(f, Exists) or len(d.premises) != 1 or not isinstance(w, Term):
            return self.bad(path, "existential introduction malformed")
        if not alpha_eq(d.premises[0].conclusion, subst_formula(f.body, f.var, w)):
            return self.bad(path, "premise is not the body at the witness")
        return opens[0]

    def _r_ex_elim(self, d, f, opens, path):
        eigen = d.attr("eigen")
        if len(d.premises) != 2 or not isinstance(eigen, str):
            return self.bad(path, "existential elimination malformed")
        major = d.premises[0].conclusion
        if not isinstance(major, Exists):
            return self.bad(path, "major premise is not existential")
        inst = subst_formula(major.body, major.var, Var(eigen))
        rest = self.discharge(opens[1], d.attr("label"), inst, path)
        if not alpha_eq(d.premises[1].conclusion, f):
            return self.bad(path, "conclusion does not match the minor premise")
        if eigen in fv(f) or eigen in fv(major):
            return self.bad(path, f"eigenvariable '{eigen}' escapes")
        for (lab, g) in rest:
            if eigen in fv(g):
                return self.bad(path, f"eigenvariable '{eigen}' free in open assumption '{lab}'")
        return opens[0] + rest

    def _r_all_intro(self, d, f, opens, path):
        eigen = d.attr("eigen")
        if not isinstance(f, Forall) or len(d.premises) != 1 or not isinstance(eigen, str):
            return self.bad(path, "universal introduction malformed")
        if not alpha_eq(d.premises[0].conclusion,
                        subst_formula(f.body, f.var, Var(eigen))):
            return self.bad(path, "premise is not the body at the eigenvariable")
        if eigen in fv(f):
            return self.bad(path, f"eigenvariable '{eigen}' free in conclusion")
        for (lab, g) in opens[0]:
            if eigen in fv(g):
                return self.bad(path, f"eigenvariable '{eigen}' free in open assumption '{lab}'")
        return opens[0]

    def _r_all_elim(self, d, f, opens, path):
        w = d.attr("witness")
        major = d.premises[0].conclusion if d.premises else None
        if not isinstance(major, Forall) or not isinstance(w, Term):
            return self.bad(path, "universal elimination malformed")
        if not alpha_eq(f, subst_formula(major.body, major.var, w)):
            return self.bad(path, "conclusion is not the body at the witness")
        return opens[0]

    def _r_refl(self, d, f, opens, path):
        if not isinstance(f, EqAtom) or f.left != f.right or d.premises:
            return self.bad(path, "reflexivity concludes t = t only")
        return Counter()

    def _r_inj(self, d, f, opens, path):
        i = d.attr("i")
        major = d.premises[0].conclusion if d.premises else None
        if not isinstance(major, EqAtom) or not isinstance(major.left, Con) \
                or not isinstance(major.right, Con) \
                or major.left.name != major.right.name:
            return self.bad(path, "injectivity needs c(...) = c(...)")
        if not isinstance(i, int) or not (1 <= i <= len(major.left.args)):
            return self.bad(path, "injectivity index out of range")
        if f != EqAtom(major.left.args[i - 1], major.right.args[i - 1]):
            return self.bad(path, "conclusion is not the selected argument equality")
        return opens[0]

    def _r_sep(self, d, f, opens, path):
        major = d.premises[0].conclusion if d.premises else None
        if not isinstance(major, EqAtom) or not isinstance(major.left, Con) \
                or not isinstance(major.right, Con) \
                or major.left.name == major.right.name:
            return self.bad(path, "separation needs c(...) = d(...) with c distinct from d")
        return opens[0]

    def _r_rewrite(self, d, f, opens, path):
        fn, idx = d.attr("fn"), d.attr("idx")
        direction, pos = d.attr("dir"), d.attr("pos")
        if len(d.premises) != 1:
            return self.bad(path, "rewrite needs one premise")
        prem = d.premises[0].conclusion
        if not isinstance(prem, (DataAtom, EqAtom)) or not isinstance(f, (DataAtom, EqAtom)):
            return self.bad(path, "rewrite acts on atomic formulas")
        eqs = self.program.equations_of(fn) if isinstance(fn, str) else []
        if not isinstance(idx, int) or not (0 <= idx < len(eqs)):
            return self.bad(path, f"no equation {fn}#{idx} in the program")
        eq = eqs[idx]
        if direction not in ("lr", "rl"):
            return self.bad(path, "rewrite direction must be lr or rl")
        src_side = eq.definiendum if direction == "lr" else eq.rhs
        dst_side = eq.rhs if direction == "lr" else eq.definiendum
        if not isinstance(pos, tuple):
            return self.bad(path, "rewrite position missing")
        at = _atom_get(prem, pos)
        to = _atom_get(f, pos)
        if at is None or to is None:
            return self.bad(path, "rewrite position outside the atom")
        binds: dict[str, Term] = {}
        if not _match_extend(src_side, at, binds) or not _match_extend(dst_side, to, binds):
            return self.bad(path, f"no instance of '{eq}' rewrites '{at}' to '{to}'")
        if _atom_put(prem, pos, to) != f:
            return self.bad(path, "rewrite changes more than the stated position")
        return opens[0]

    def _r_data_intro(self, d, f, opens, path):
        ct = d.attr("type")
        if not isinstance(ct, ConstructorType) or ct not in self.ds.types:
            return self.bad(path, "data introduction needs a declared constructor type")
        if not ct.result_predicate.inductive:
            return self.bad(path, f"data introduction requires an inductive result, "
                                  f"'{ct.result_predicate.name}' is coinductive")
        r = ct.constructor.arity
        if len(d.premises) != r or not isinstance(f, DataAtom) \
                or f.predicate != ct.result_predicate.name:
            return self.bad(path, "data introduction malformed")
        t = f.term
        if not isinstance(t, Con) or t.name != ct.constructor.name or len(t.args) != r:
            return self.bad(path, "conclusion term is not the constructor applied")
        for i in range(r):
            want = DataAtom(ct.argument_predicates[i].name, t.args[i])
            if not alpha_eq(d.premises[i].conclusion, want):
                return self.bad(path, f"argument premise {i + 1} is not {want}")
        return sum(opens, Counter())

    def _r_data_elim(self, d, f, opens, path):
        ct, i = d.attr("type"), d.attr("i")
        if not isinstance(ct, ConstructorType) or ct not in self.ds.types:
            return self.bad(path, "data elimination needs a declared constructor type")
        if ct.result_predicate.inductive:
            return self.bad(path, "data elimination requires a coinductive result")
        if not isinstance(i, int) or not (1 <= i <= ct.constructor.arity):
            return self.bad(path, "data elimination index out of range")
        major = d.premises[0].conclusion if d.premises else None
        if not isinstance(major, DataAtom) or major.predicate != ct.result_predicate.name:
            return self.bad(path, "major premise is not the coinductive atom")
        t = major.term
        want_pred = ct.argument_predicates[i - 1].name
        if isinstance(t, Con) and t.name == ct.constructor.name:
            want_term = t.args[i - 1]
        else:
            # destructor shape: sound only when every constructor of the
            # predicate agrees on the argument predicate at this position
            for other in self.ds.types_for_result(ct.result_predicate):
                if other.constructor.arity < i \
                        or other.argument_predicates[i - 1].name != want_pred:
                    return self.bad(
                        path, f"destructor-shape elimination ambiguous at position {i}")
            want_term = Fun(pi_name(i), (t,))
        if f != DataAtom(want_pred, want_term):
            return self.bad(path, f"conclusion is not {DataAtom(want_pred, want_term)}")
        return opens[0]

    def _r_induction(self, d, f, opens, path):
        pred_name = d.attr("pred")
        hole = d.attr("var")
        phi = d.attr("formula")
        case_vars = d.attr("case_vars") or ()
        case_labels = d.attr("case_labels") or ()
        pred = self.ds.predicate(pred_name) if isinstance(pred_name, str) else None
        if pred is None or not pred.inductive or not isinstance(phi, Formula):
            return self.bad(path, "induction needs an inductive predicate and a formula")
        types = self.ds.types_for_result(pred)
        if len(d.premises) != 1 + len(types):
            return self.bad(path, f"induction needs the major premise plus "
                                  f"{len(types)} case premises")
        major = d.premises[0].conclusion
        if not isinstance(major, DataAtom) or major.predicate != pred_name:
            return self.bad(path, "major premise is not the inductive atom")
        if not alpha_eq(f, subst_formula(phi, hole, major.term)):
            return self.bad(path, "conclusion is not the formula at the major term")
        if len(case_vars) != len(types) or len(case_labels) != len(types):
            return self.bad(path, "case variable/label vectors malformed")
        total = Counter(opens[0])
        for k, ct in enumerate(types):
            r = ct.constructor.arity
            vs = case_vars[k]
            labs = case_labels[k]
            if len(vs) != r or len(labs) != r:
                return self.bad(path, f"case {k + 1}: expected {r} eigenvariables/labels")
            case = d.premises[1 + k]
            want = subst_formula(phi, hole,
                                 Con(ct.constructor.name, tuple(Var(v) for v in vs)))
            if not alpha_eq(case.conclusion, want):
                return self.bad(path, f"case {k + 1} concludes {case.conclusion}, wants {want}")
            rest = Counter(opens[1 + k])
            for j in range(r):
                ei = ct.argument_predicates[j]
                hyp = subst_formula(phi, hole, Var(vs[j])) if ei.name == pred_name \
                    else DataAtom(ei.name, Var(vs[j]))
                rest = self.discharge(rest, labs[j], hyp, path)
            bad_vs = set(vs) & (fv(phi) - {hole})
            if bad_vs:
                return self.bad(path, f"case {k + 1}: eigenvariables {sorted(bad_vs)} "
                                      f"occur in the invariant")
            for (lab, g) in rest:
                if set(vs) & fv(g):
                    return self.bad(path, f"case {k + 1}: eigenvariable escapes into "
                                          f"open assumption '{lab}'")
            total += rest
        return total

    def _r_coinduction(self, d, f, opens, path):
        pred_name = d.attr("pred")
        hole = d.attr("var")
        phi = d.attr("formula")
        label = d.attr("label")
        pred = self.ds.predicate(pred_name) if isinstance(pred_name, str) else None
        if pred is None or pred.inductive or not isinstance(phi, Formula):
            return self.bad(path, "coinduction needs a coinductive predicate and a formula")
        if classify_formula(phi) is not PolarityClass.STRONGLY_POSITIVE:
            return self.bad(path, "coinduction invariant must be strongly positive")
        if len(d.premises) != 2:
            return self.bad(path, "coinduction needs the instance premise and the "
                                  "decomposition premise")
        if not isinstance(f, DataAtom) or f.predicate != pred_name:
            return self.bad(path, "conclusion is not the coinductive atom")
        if not alpha_eq(d.premises[0].conclusion, subst_formula(phi, hole, f.term)):
            return self.bad(path, "first premise is not the invariant at the subject term")
        want_dcm = build_dcm(self.ds, pred_name, phi, hole, hole)
        if not alpha_eq(d.premises[1].conclusion, want_dcm):
            return self.bad(path, f"decomposition premise concludes "
                                  f"{d.premises[1].conclusion}, wants {want_dcm}")
        rest = self.discharge(opens[1], label, phi, path)
        for (lab, g) in rest:
            if hole in fv(g):
                return self.bad(path, f"subject variable '{hole}' free in open "
                                      f"assumption '{lab}' of the decomposition premise")
        return opens[0] + rest


def check_proof(ds: DataSystem, program: Program, d: Derivation) -> CheckResult:
    checker = ProofChecker(ds, program)
    opens = checker.check(d)
    ok = not checker.violations
    return CheckResult(ok, d.conclusion if ok else None,
                       opens if ok else Counter(), checker.violations)


# ---------------------------------------------------------------------------
# Normalization (logical detour elimination)
# ---------------------------------------------------------------------------

class NormalizationLimit(Exception):
    pass


_BINDER_LABEL_ATTRS = {
    "imp-intro": ("label",),
    "or-elim": ("label1", "label2"),
    "ex-elim": ("label",),
    "coinduction": ("label",),
}


def _labels_of(d: Derivation) -> set[str]:
    out: set[str] = set()
    for _p, node in d.nodes():
        if node.rule == "assume":
            out.add(node.attr("label"))
        for key in _BINDER_LABEL_ATTRS.get(node.rule, ()):
            out.add(node.attr(key))
        if node.rule == "induction":
            for labs in node.attr("case_labels") or ():
                out.update(labs)
    return out


def _relabel(d: Derivation, env: dict[str, str], fresh: "itertools.count",
             avoid: set[str]) -> Derivation:
    """Rename discharge labels that clash with `avoid`, respecting scope."""
    attrs = dict(d.attrs)
    if d.rule == "assume":
        lab = attrs["label"]
        if lab in env:
            attrs["label"] = env[lab]
        return Derivation(d.rule, d.conclusion, (), tuple(attrs.items()))
    new_env = env
    binder_keys = _BINDER_LABEL_ATTRS.get(d.rule, ())
    if d.rule == "induction":
        case_labels = attrs.get("case_labels") or ()
        flat = [lab for labs in case_labels for lab in labs]
    else:
        flat = [attrs[k] for k in binder_keys]
    if any(lab in avoid for lab in flat):
        new_env = dict(env)
        mapping = {}
        for lab in flat:
            if lab in avoid:
                nl = f"_l{next(fresh)}"
                mapping[lab] = nl
                new_env[lab] = nl
        if d.rule == "induction":
            attrs["case_labels"] = tuple(
                tuple(mapping.get(lab, lab) for lab in labs)
                for labs in attrs["case_labels"])
        else:
            for k in binder_keys:
                attrs[k] = mapping.get(attrs[k], attrs[k])
    elif flat:
        # labels rebound here shadow outer renamings
        if any(lab in env for lab in flat):
            new_env = {k: v for k, v in env.items() if k not in flat}
    prems = tuple(_relabel(p, new_env, fresh, avoid) for p in d.premises)
    return Derivation(d.rule, d.conclusion, prems, tuple(attrs.items()))


_FRESH_COUNTER = itertools.count(1)


def graft(d: Derivation, label: str, f: Formula, replacement: Derivation) -> Derivation:
    """Replace open assumptions (label, f) in d by `replacement`, renaming
    d's discharge labels away from the replacement's open labels first."""
    rep_labels = {lab for _p, n in replacement.nodes() if n.rule == "assume"
                  for lab in [n.attr("label")]}

    def go(node: Derivation) -> Derivation:
        if node.rule == "assume" and node.attr("label") == label \
                and alpha_eq(node.conclusion, f):
            return replacement
        binder = _BINDER_LABEL_ATTRS.get(node.rule, ())
        rebinds = label in [node.attr(k) for k in binder]
        if node.rule == "induction":
            rebinds = rebinds or any(label in labs
                                     for labs in node.attr("case_labels") or ())
        if rebinds:
            return node
        prems = tuple(go(p) for p in node.premises)
        if prems == node.premises:
            return node
        return Derivation(node.rule, node.conclusion, prems, node.attrs)

    if rep_labels:
        d = _relabel(d, {}, _FRESH_COUNTER, rep_labels)
    return go(d)


def _bound_vars(node: Derivation) -> list[str]:
    if node.rule in ("ex-elim", "all-intro"):
        return [node.attr("eigen")]
    if node.rule == "induction":
        return [v for vs in node.attr("case_vars") or () for v in vs]
    if node.rule == "coinduction":
        return [node.attr("var")]
    return []


def _derivation_vars(d: Derivation) -> set[str]:
    out: set[str] = set()
    for _p, node in d.nodes():
        out |= fv(node.conclusion)
        for _k, v in node.attrs:
            if isinstance(v, Term):
                out |= variables(v)
            elif isinstance(v, Formula):
                out |= fv(v)
            elif isinstance(v, str):
                out.add(v)
    return out


def _rename_var(node: Derivation, old: str, new: str) -> Derivation:
    """Blind consistent renaming; `new` must be globally fresh."""
    attrs = dict(node.attrs)
    for k, v in list(attrs.items()):
        if isinstance(v, Term):
            attrs[k] = substitute(v, {old: Var(new)})
        elif isinstance(v, Formula):
            attrs[k] = subst_formula(v, old, Var(new))
        elif k in ("eigen", "var") and v == old:
            attrs[k] = new
        elif k == "case_vars":
            attrs[k] = tuple(tuple(new if q == old else q for q in vs) for vs in v)
    prems = tuple(_rename_var(p, old, new) for p in node.premises)
    return Derivation(node.rule, subst_formula(node.conclusion, old, Var(new)),
                      prems, tuple(attrs.items()))


def subst_derivation(d: Derivation, var: str, t: Term) -> Derivation:
    """Substitute a term for a variable throughout a derivation, renaming
    eigenvariables that would capture.  A node that itself binds `var`
    (eigenvariable shadowing) is left alone."""
    tvars = variables(t)

    def go(node: Derivation) -> Derivation:
        bound = _bound_vars(node)
        if var in bound:
            return node
        for b in bound:
            if b in tvars:
                freshv = _fresh_name(b, tvars | {var} | _derivation_vars(node))
                node = _rename_var(node, b, freshv)
        attrs = dict(node.attrs)
        for k, v in list(attrs.items()):
            if isinstance(v, Term):
                attrs[k] = substitute(v, {var: t})
            elif isinstance(v, Formula):
                attrs[k] = subst_formula(v, var, t)
        prems = tuple(go(p) for p in node.premises)
        return Derivation(node.rule, subst_formula(node.conclusion, var, t),
                          prems, tuple(attrs.items()))

    return go(d)


def _reduce_node(d: Derivation) -> Derivation | None:
    """One detour reduction at the root, if the root is a redex."""
    if d.rule == "and-elim" and d.premises[0].rule == "and-intro":
        return d.premises[0].premises[d.attr("i") - 1]
    if d.rule == "imp-elim" and d.premises[0].rule == "imp-intro":
        intro = d.premises[0]
        hyp = intro.conclusion.left
        return graft(intro.premises[0], intro.attr("label"), hyp, d.premises[1])
    if d.rule == "or-elim" and d.premises[0].rule == "or-intro":
        intro = d.premises[0]
        i = intro.attr("i")
        minor = d.premises[i]
        label = d.attr("label1") if i == 1 else d.attr("label2")
        side = intro.conclusion.left if i == 1 else intro.conclusion.right
        return graft(minor, label, side, intro.premises[0])
    if d.rule == "ex-elim" and d.premises[0].rule == "ex-intro":
        intro = d.premises[0]
        w = intro.attr("witness")
        eigen = d.attr("eigen")
        ex = intro.conclusion
        inst = subst_formula(ex.body, ex.var, Var(eigen))
        body = graft(d.premises[1], d.attr("label"), inst,
                     _placeholder(inst))
        body = subst_derivation(body, eigen, w)
        hyp = subst_formula(ex.body, ex.var, w)
        return graft(body, _PLACEHOLDER_LABEL, hyp, intro.premises[0])
    if d.rule == "all-elim" and d.premises[0].rule == "all-intro":
        intro = d.premises[0]
        return subst_derivation(intro.premises[0], intro.attr("eigen"),
                                d.attr("witness"))
    return None


_PLACEHOLDER_LABEL = "_graft_hole"


def _placeholder(f: Formula) -> Derivation:
    return assume(_PLACEHOLDER_LABEL, f)


def _reduce_leftmost(d: Derivation) -> Derivation | None:
    red = _reduce_node(d)
    if red is not None:
        return red
    for i, p in enumerate(d.premises):
        r = _reduce_leftmost(p)
        if r is not None:
            prems = d.premises[:i] + (r,) + d.premises[i + 1:]
            return Derivation(d.rule, d.conclusion, prems, d.attrs)
    return None


def normalize(d: Derivation, max_steps: int = 10_000) -> Derivation:
    """Remove logical detours; raises NormalizationLimit if the step bound
    is hit (which signals a kernel bug, not an expected outcome)."""
    for _ in range(max_steps):
        r = _reduce_leftmost(d)
        if r is None:
            return d
        d = r
    raise NormalizationLimit(f"no normal form within {max_steps} steps")


def has_detour(d: Derivation) -> bool:
    pairs = {"and-elim": "and-intro", "imp-elim": "imp-intro",
             "or-elim": "or-intro", "ex-elim": "ex-intro",
             "all-elim": "all-intro"}
    for _p, node in d.nodes():
        want = pairs.get(node.rule)
        if want and node.premises and node.premises[0].rule == want:
            return True
    return False


def assert_sp_proof(d: Derivation) -> tuple[tuple[int, ...], Formula] | None:
    """None when every node formula is strongly positive; otherwise the
    first offending node (path, formula)."""
    offenders = [(path, node.conclusion) for path, node in d.nodes()
                 if classify_formula(node.conclusion)
                 is not PolarityClass.STRONGLY_POSITIVE]
    if not offenders:
        return None
    return min(offenders, key=lambda pf: (len(pf[0]), pf[0]))
