"""Realizer streams: the even/odd split algebra and finite-depth
realizability checking for strongly-positive formulas.

A realizer is a stream value; evidence for a compound formula is packed
into one stream by interleaving.  With sigma_0 = even(sigma) and
sigma_1 = even(odd(sigma)): a conjunction's conjuncts are realized by
sigma_0 and sigma_1; a disjunction is realized by head-bit selection with
the tail realizing the chosen disjunct; an existential realizer carries
the witness value in sigma_0 and body evidence in sigma_1.  Boolean
values ride in stream heads.
"""
from __future__ import annotations

from dataclasses import dataclass

from .evaluation import (DEFAULT_BUDGET, ApproxNode, DiagramEnv,
                         OmegaResult, Session, derives_omega)
from .logic import (And, DataAtom, EqAtom, Exists, Formula, Imp, Or,
                    PolarityClass, classify_formula)
from .program import Equation, Program, assemble_program, pi_name
from .system import DataSystem
from .terms import Con, Fun, Term, Var, substitute

EVEN = "split_even"
ODD = "split_odd"
MERGE = "split_merge"
ZEROS = "split_zeros"


def algebra_equations() -> list[Equation]:
    x, y = Var("x"), Var("y")

    def p1(t: Term) -> Term:
        return Fun(pi_name(1), (t,))

    def p2(t: Term) -> Term:
        return Fun(pi_name(2), (t,))

    return [
        Equation(EVEN, (x,), Con("cons", (p1(x), Fun(EVEN, (p2(p2(x)),))))),
        Equation(ODD, (x,), Fun(EVEN, (p2(x),))),
        Equation(MERGE, (x, y), Con("cons", (p1(x), Fun(MERGE, (y, p2(x)))))),
        Equation(ZEROS, (), Con("cons", (Con("0"), Fun(ZEROS)))),
    ]


def with_algebra(program: Program, ds: DataSystem) -> Program:
    """Extend a program with the split algebra (idempotent)."""
    have = {e.function for e in program.body}
    extra = [e for e in algebra_equations() if e.function not in have]
    if not extra:
        return program
    return assemble_program(ds, list(program.body) + extra, program.principal,
                            program.arity)


def even_term(t: Term) -> Term:
    return Fun(EVEN, (t,))


def odd_term(t: Term) -> Term:
    return Fun(ODD, (t,))


def merge_term(a: Term, b: Term) -> Term:
    return Fun(MERGE, (a, b))


def zeros_term() -> Term:
    return Fun(ZEROS)


def split_term(sigma: Term, i: int) -> Term:
    """sigma_i = even(odd^i(sigma)): positionally, source indices congruent
    to 2^i - 1 modulo 2^{i+1}."""
    t = sigma
    for _ in range(i):
        t = odd_term(t)
    return even_term(t)


def split_prime_term(sigma: Term, i: int) -> Term:
    """sigma_i' = odd^{i+1}(sigma), the leftover complement."""
    t = sigma
    for _ in range(i + 1):
        t = odd_term(t)
    return t


class RealizerAlgebra:
    """An evaluation session whose program carries the split algebra."""

    def __init__(self, program: Program, ds: DataSystem,
                 env: DiagramEnv | None = None):
        self.ds = ds
        self.program = with_algebra(program, ds)
        self.session = Session(self.program, ds, env)

    def split(self, sigma: Term, i: int) -> Term:
        return split_term(sigma, i)

    def merge(self, a: Term, b: Term) -> Term:
        return merge_term(a, b)

    def observe(self, t: Term, depth: int, budget: int = DEFAULT_BUDGET):
        return self.session.observe(t, depth, budget)

    def equal(self, a: Term, b: Term, depth: int,
              budget: int = DEFAULT_BUDGET) -> OmegaResult:
        return derives_omega(self.program, None, a, b, depth, budget,
                             session=self.session)

    def head_bit(self, t: Term, budget: int = DEFAULT_BUDGET) -> str | None:
        """Name of the head constructor of a value, None on stall."""
        a = self.session.observe(t, 1, budget)
        if isinstance(a, ApproxNode):
            return a.constructor
        return None

    def bool_value(self, t: Term, budget: int = DEFAULT_BUDGET) -> str | None:
        """A boolean-valued term's constant, None on stall."""
        a = self.session.observe(t, 1, budget)
        if isinstance(a, ApproxNode) and not a.children:
            return a.constructor
        return None


# ---------------------------------------------------------------------------
# Sorts: desk-scale inference of boolean vs stream positions
# ---------------------------------------------------------------------------

def infer_sorts(f: Formula, ds: DataSystem) -> dict[str, str]:
    """Variable sorts ('B' or 'S') from atom positions, defaulting to 'S'.
    Propagates through constructor arguments and the standard projections."""
    sorts: dict[str, str] = {}

    def note(v: str, s: str) -> None:
        if sorts.get(v, s) != s:
            raise ValueError(f"variable '{v}' used at both sorts")
        sorts[v] = s

    def walk_term(t: Term, s: str | None) -> None:
        if isinstance(t, Var):
            if s:
                note(t.name, s)
            return
        if isinstance(t, Con):
            ct = ds.types_of(t.name)
            if len(ct) == 1:
                for arg, p in zip(t.args, ct[0].argument_predicates):
                    walk_term(arg, "B" if p.inductive else "S")
                return
        if isinstance(t, Fun) and t.name in (pi_name(1), pi_name(2)) and len(t.args) == 1:
            walk_term(t.args[0], "S")
            return
        for a in t.args:
            walk_term(a, None)

    def walk(g: Formula) -> None:
        if isinstance(g, DataAtom):
            pred = ds.predicate(g.predicate)
            walk_term(g.term, "B" if pred and pred.inductive else "S")
        elif isinstance(g, EqAtom):
            walk_term(g.left, None)
            walk_term(g.right, None)
        elif isinstance(g, (And, Or, Imp)):
            walk(g.left)
            walk(g.right)
        else:
            walk(g.body)

    walk(f)
    return sorts


# ---------------------------------------------------------------------------
# realizes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealizabilityJudgment:
    program: Program
    ds: DataSystem
    env: DiagramEnv | None
    eta: tuple[tuple[str, Term], ...]      # variable -> value term
    realizer: Term
    formula: Formula
    depth: int
    budget: int = DEFAULT_BUDGET

    @staticmethod
    def of(program, ds, env, eta: dict[str, Term], realizer, formula, depth,
           budget=DEFAULT_BUDGET) -> "RealizabilityJudgment":
        return RealizabilityJudgment(program, ds, env, tuple(eta.items()),
                                     realizer, formula, depth, budget)


@dataclass(frozen=True)
class RealizeResult:
    status: str                       # holds-up-to-depth | fails | stalled
    path: tuple[str, ...] = ()
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "holds-up-to-depth"

    def __str__(self) -> str:
        if self.holds:
            return self.status
        where = "/".join(self.path) or "root"
        return f"{self.status} at {where}: {self.detail}"


HOLDS = RealizeResult("holds-up-to-depth")


def realizes(j: RealizabilityJudgment) -> RealizeResult:
    """Finite-depth realizability per the clause set: atoms compare values
    observationally, conjunction and existentials split the realizer,
    disjunction selects by the head bit."""
    if classify_formula(j.formula) is not PolarityClass.STRONGLY_POSITIVE:
        raise ValueError("realizability is defined for strongly-positive formulas only")
    alg = RealizerAlgebra(j.program, j.ds, j.env)
    sorts = infer_sorts(j.formula, j.ds)

    def value(t: Term, eta: dict[str, Term]) -> Term:
        return substitute(t, eta)

    def go(f: Formula, sigma: Term, eta: dict[str, Term],
           path: tuple[str, ...]) -> RealizeResult:
        if isinstance(f, DataAtom):
            pred = j.ds.predicate(f.predicate)
            tv = value(f.term, eta)
            if pred is not None and pred.inductive:
                b = alg.bool_value(tv, j.budget)
                h = alg.bool_value(Fun(pi_name(1), (sigma,)), j.budget)
                if b is None or h is None:
                    return RealizeResult("stalled", path, f"observing {f}")
                if b != h:
                    return RealizeResult("fails", path,
                                         f"head encodes {h}, value is {b}")
                return HOLDS
            r = alg.equal(sigma, tv, j.depth, j.budget)
            if r.equal:
                return HOLDS
            status = "stalled" if r.status == "stalled" else "fails"
            return RealizeResult(status, path, f"{f}: {r}")
        if isinstance(f, EqAtom):
            lv, rv = value(f.left, eta), value(f.right, eta)
            head = alg.head_bit(lv, j.budget)
            if head is None:
                return RealizeResult("stalled", path, f"observing {f.left}")
            if head in ("0", "1"):
                bl = alg.bool_value(lv, j.budget)
                br = alg.bool_value(rv, j.budget)
                hs = alg.bool_value(Fun(pi_name(1), (sigma,)), j.budget)
                if None in (bl, br, hs):
                    return RealizeResult("stalled", path, f"observing {f}")
                if bl == br == hs:
                    return HOLDS
                return RealizeResult("fails", path,
                                     f"{f}: values {bl}, {br}, head {hs}")
            r1 = alg.equal(lv, rv, j.depth, j.budget)
            if not r1.equal:
                status = "stalled" if r1.status == "stalled" else "fails"
                return RealizeResult(status, path, f"{f}: {r1}")
            r2 = alg.equal(sigma, lv, j.depth, j.budget)
            if not r2.equal:
                status = "stalled" if r2.status == "stalled" else "fails"
                return RealizeResult(status, path, f"realizer != value: {r2}")
            return HOLDS
        if isinstance(f, And):
            r = go(f.left, split_term(sigma, 0), eta, path + ("and-left",))
            if not r.holds:
                return r
            return go(f.right, split_term(sigma, 1), eta, path + ("and-right",))
        if isinstance(f, Or):
            bit = alg.bool_value(Fun(pi_name(1), (sigma,)), j.budget)
            if bit is None:
                return RealizeResult("stalled", path, "selector head")
            if bit not in ("0", "1"):
                return RealizeResult("fails", path, f"selector head is '{bit}'")
            side = f.left if bit == "0" else f.right
            tag = "or-left" if bit == "0" else "or-right"
            return go(side, Fun(pi_name(2), (sigma,)), eta, path + (tag,))
        assert isinstance(f, Exists)
        witness_value = split_term(sigma, 0)
        if sorts.get(f.var) == "B":
            witness_value = Fun(pi_name(1), (witness_value,))
        eta2 = dict(eta)
        eta2[f.var] = witness_value
        return go(f.body, split_term(sigma, 1), eta2, path + ("exists",))

    return go(j.formula, j.realizer, dict(j.eta), ())
