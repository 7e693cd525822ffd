"""Between corecursion and coinduction proofs.

`prove_corec` turns a recognized corecursive definition into a checked
natural-deduction proof that its functions map streams to streams: one
coinduction per schema, with the invariant "z is a value of some vector
member on stream arguments", and component typings synthesized bottom-up
(destructor eliminations, boolean case analysis for discriminator
dispatch, and grafted proofs of previously defined functions).

`extract` walks a detour-free, all-strongly-positive derivation and emits
a primitive-corecursive program realizing its conclusion: logical rules
become realizer plumbing over the split algebra, data eliminations become
destructors, rewrites are free, and each coinduction becomes one fresh
corecursive function producing head bits while stepping the decomposition
evidence.

`roundtrip_report` drives the full pipeline over the stock library and
checks the extracted programs against the originals observationally.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .corec import (Component, CompositionDef, CorecBundle, CorecSchema,
                    PlainSlot, RecSlot, SchemaFun, Stratum, arg_vars,
                    bundle_equal, check_primitive_corecursive, compile_schema,
                    stock_library)
from .evaluation import DiagramEnv, Session, derives_omega
from .logic import (And, DataAtom, Derivation, EqAtom, Exists, Formula, Or,
                    and_elim, and_intro, assert_sp_proof, assume, build_dcm,
                    check_proof, coinduction, data_elim, data_intro, ex_elim,
                    ex_intro, fv, graft, has_detour, induction, normalize,
                    or_elim, or_intro, refl, rewrite, subst_derivation,
                    subst_formula)
from .program import (DELTA, Equation, Program, assemble_program, pi_name,
                      reserved_function)
from .realize import (EVEN, MERGE, ODD, ZEROS, even_term, infer_sorts,
                      merge_term, odd_term, zeros_term)
from .system import DataSystem, random_stream_coterm
from .terms import Con, Fun, Term, Var, substitute, variables


class ExtractError(Exception):
    pass


# ---------------------------------------------------------------------------
# Component typing proofs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProofTemplate:
    params: tuple[str, ...]
    labels: tuple[str, ...]
    arg_preds: tuple[str, ...]
    result_pred: str
    derivation: Derivation


class _Labels:
    def __init__(self, prefix: str = "l"):
        self.prefix = prefix
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"


class Prover:
    """Builds checked derivations about one compiled program."""

    def __init__(self, ds: DataSystem, program: Program):
        self.ds = ds
        self.program = program
        self.registry: dict[str, ProofTemplate] = {}
        self.labels = _Labels("q")
        b = ds.predicate("B")
        s = ds.predicate("S")
        if b is None or s is None or not b.inductive or s.inductive:
            raise ExtractError("proof generation expects a boolean-stream system")
        self.cons_type = next(t for t in ds.types_for_result(s))
        self.b_types = ds.types_for_result(b)

    # -- sorts ---------------------------------------------------------------

    def sort_of(self, t: Term, var_sorts: dict[str, str]) -> str:
        if isinstance(t, Var):
            try:
                return var_sorts[t.name]
            except KeyError:
                raise ExtractError(f"unknown sort for variable '{t.name}'")
        if isinstance(t, Con):
            types = self.ds.types_of(t.name)
            if not types:
                raise ExtractError(f"untyped constructor '{t.name}'")
            return "B" if types[0].result_predicate.inductive else "S"
        assert isinstance(t, Fun)
        if t.name == pi_name(1):
            return "B" if self.cons_type.argument_predicates[0].inductive else "S"
        if t.name == pi_name(2):
            return "B" if self.cons_type.argument_predicates[1].inductive else "S"
        if t.name == DELTA:
            branch_sorts = {self.sort_of(t.args[1 + i], var_sorts)
                            for i, c in enumerate(self.ds.vocabulary)
                            if any(ty.result_predicate.inductive
                                   for ty in self.ds.types_of(c.name))}
            if len(branch_sorts) != 1:
                raise ExtractError(f"mixed branch sorts in '{t}'")
            return branch_sorts.pop()
        tpl = self.registry.get(t.name)
        if tpl is None:
            raise ExtractError(f"no typing available for '{t.name}'")
        return "B" if self.ds.predicate(tpl.result_pred).inductive else "S"

    def infer_arg_sorts(self, term: Term, k: int) -> dict[str, str]:
        sorts: dict[str, str] = {}

        def note(v: str, s: str) -> None:
            if sorts.get(v, s) != s:
                raise ExtractError(f"variable '{v}' used at both sorts in '{term}'")
            sorts[v] = s

        def walk(t: Term, s: str | None) -> None:
            if isinstance(t, Var):
                if s:
                    note(t.name, s)
                return
            if isinstance(t, Con) and t.name == self.cons_type.constructor.name:
                walk(t.args[0], "B")
                walk(t.args[1], "S")
                return
            if isinstance(t, Fun):
                if t.name in (pi_name(1), pi_name(2)):
                    walk(t.args[0], "S")
                    return
                if t.name == DELTA:
                    walk(t.args[0], "B")
                    for a in t.args[1:]:
                        walk(a, None)
                    return
                tpl = self.registry.get(t.name)
                if tpl is not None:
                    for a, p in zip(t.args, tpl.arg_preds):
                        walk(a, "B" if self.ds.predicate(p).inductive else "S")
                    return
            for a in t.args:
                walk(a, None)

        walk(term, None)
        for i in range(k):
            sorts.setdefault(f"x{i + 1}", "S")
        return sorts

    def _pred(self, sort: str) -> str:
        return "B" if sort == "B" else "S"

    # -- the synthesizer -------------------------------------------------------

    def typing(self, t: Term, var_sorts: dict[str, str],
               hyp_labels: dict[str, str],
               sub_proofs: dict[Term, Derivation] | None = None) -> Derivation:
        """Derivation of Pred(t) from labeled hypotheses Pred_v(v)."""
        if sub_proofs and t in sub_proofs:
            return sub_proofs[t]
        if isinstance(t, Var):
            pred = self._pred(var_sorts[t.name])
            return assume(hyp_labels[t.name], DataAtom(pred, t))
        if isinstance(t, Con):
            types = [ty for ty in self.ds.types_of(t.name)
                     if ty.result_predicate.inductive]
            if not types or t.args:
                raise ExtractError(f"cannot type constructor term '{t}'")
            return data_intro(types[0], ())
        assert isinstance(t, Fun)
        if t.name in (pi_name(1), pi_name(2)):
            inner = self.typing(t.args[0], var_sorts, hyp_labels, sub_proofs)
            i = 1 if t.name == pi_name(1) else 2
            return data_elim(self.cons_type, i, inner)
        if t.name == DELTA:
            return self._delta_typing(t, var_sorts, hyp_labels, sub_proofs)
        tpl = self.registry.get(t.name)
        if tpl is None:
            raise ExtractError(f"no typing available for '{t.name}'")
        d = tpl.derivation
        fresh = [f"_p{self.labels.fresh()}" for _ in tpl.params]
        for old, new in zip(tpl.params, fresh):
            d = subst_derivation(d, old, Var(new))
        for new, arg in zip(fresh, t.args):
            d = subst_derivation(d, new, arg)
        for lab, pred, arg in zip(tpl.labels, tpl.arg_preds, t.args):
            arg_d = self.typing(arg, var_sorts, hyp_labels, sub_proofs)
            d = graft(d, lab, DataAtom(pred, arg), arg_d)
        return d

    def _delta_typing(self, t: Term, var_sorts, hyp_labels, sub_proofs) -> Derivation:
        sel = t.args[0]
        sel_d = self.typing(sel, var_sorts, hyp_labels, sub_proofs)
        target = self._pred(self.sort_of(t, var_sorts))
        hole = "q0"
        avoid = variables(t)
        while hole in avoid:
            hole += "'"
        phi = DataAtom(target, Fun(DELTA, (Var(hole),) + t.args[1:]))
        cases = []
        delta_positions = {c.name: i for i, c in enumerate(self.ds.vocabulary)}
        for ct in self.b_types:
            cname = ct.constructor.name
            idx = delta_positions[cname]
            branch = t.args[1 + idx]
            inner = self.typing(branch, var_sorts, hyp_labels, sub_proofs)
            concl = DataAtom(target, Fun(DELTA, (Con(cname),) + t.args[1:]))
            cases.append(rewrite(DELTA, idx, "rl", (1,), inner, concl))
        return induction("B", hole, phi, sel_d, tuple(cases),
                         tuple(() for _ in self.b_types),
                         tuple(() for _ in self.b_types))

    # -- compositions ------------------------------------------------------------

    def register_composition(self, cdef: CompositionDef,
                             sub_proofs=None) -> Derivation:
        k = cdef.arity
        var_sorts = self.infer_arg_sorts(cdef.component.term, k)
        params = tuple(f"x{i + 1}" for i in range(k))
        labels = tuple(f"h{i + 1}" for i in range(k))
        hyp = dict(zip(params, labels))
        body_d = self.typing(cdef.component.term, var_sorts, hyp, sub_proofs)
        result = self._pred(self.sort_of(cdef.component.term, var_sorts))
        eq_idx = self._eq_index(cdef.name, 0)
        concl = DataAtom(result, Fun(cdef.name, tuple(Var(p) for p in params)))
        d = rewrite(cdef.name, eq_idx, "rl", (1,), body_d, concl)
        self.registry[cdef.name] = ProofTemplate(
            params, labels, tuple(self._pred(var_sorts[p]) for p in params),
            result, d)
        return d

    def _eq_index(self, fn: str, i: int) -> int:
        eqs = self.program.equations_of(fn)
        if not eqs:
            raise ExtractError(f"no equations for '{fn}' in the compiled program")
        return i

    # -- schemas (the corecursion-to-coinduction proof) ---------------------------

    def register_schema(self, schema: CorecSchema, sub_proofs=None) -> dict[str, Derivation]:
        fns = schema.functions
        for f in fns:
            if f.selector is not None or f.produced != self.cons_type.constructor.name:
                raise ExtractError(
                    f"'{f.name}': only stream-form schemas generate proofs")
            if len(f.slots) != 2 or not isinstance(f.slots[0], PlainSlot) \
                    or not isinstance(f.slots[1], RecSlot):
                raise ExtractError(
                    f"'{f.name}': expected one head component and one corecursive call")
        zz = "zz"
        phi = self._vector_invariant(fns, zz)
        out: dict[str, Derivation] = {}
        for p, f in enumerate(fns):
            d = self._member_proof(schema, p, phi, zz, sub_proofs)
            out[f.name] = d
            params = tuple(f"x{i + 1}" for i in range(f.arity))
            labels = tuple(f"h{i + 1}" for i in range(f.arity))
            self.registry[f.name] = ProofTemplate(
                params, labels, tuple("S" for _ in params), "S", d)
        return out

    def _vector_invariant(self, fns, zz: str) -> Formula:
        disjuncts = []
        for f in fns:
            ys = [f"y{i + 1}" for i in range(f.arity)]
            eq = EqAtom(Var(zz), Fun(f.name, tuple(Var(y) for y in ys)))
            body: Formula = eq
            for y in reversed(ys):
                body = And(DataAtom("S", Var(y)), body)
            for y in reversed(ys):
                body = Exists(y, body)
            disjuncts.append(body)
        out = disjuncts[-1]
        for d in reversed(disjuncts[:-1]):
            out = Or(d, out)
        return out

    def _intro_exists(self, names: list[str], body: Formula,
                      witnesses: list[Term], d: Derivation) -> Derivation:
        n = len(names)
        for i in range(n - 1, -1, -1):
            inner = body
            for j in range(n - 1, i, -1):
                inner = Exists(names[j], inner)
            partial = inner
            for j in range(i):
                partial = subst_formula(partial, names[j], witnesses[j])
            d = ex_intro(names[i], partial, witnesses[i], d)
        return d

    def _intro_member(self, fns, phi: Formula, zz: str, p: int, val: Term,
                      arg_values: list[Term], arg_proofs: list[Derivation],
                      eq_proof: Derivation) -> Derivation:
        """phi[zz := val] via disjunct p: the existentials and conjunctions
        of 'val is f_p on streams arg_values'."""
        f = fns[p]
        ys = [f"y{i + 1}" for i in range(f.arity)]
        eq = EqAtom(val, Fun(f.name, tuple(Var(y) for y in ys)))
        chain: Formula = eq
        for y in reversed(ys):
            chain = And(DataAtom("S", Var(y)), chain)
        d = eq_proof
        for pd in reversed(arg_proofs):
            d = and_intro(pd, d)
        d = self._intro_exists(ys, chain, arg_values, d)
        # now select disjunct p inside the right-associated chain
        inst = [self._disjunct_inst(fns, j, zz, val) for j in range(len(fns))]

        def suffix(i: int) -> Formula:
            out = inst[-1]
            for g in reversed(inst[i:-1]):
                out = Or(g, out)
            return out

        if p < len(fns) - 1:
            d = or_intro(1, d, suffix(p + 1))
        for i in range(p - 1, -1, -1):
            d = or_intro(2, d, inst[i])
        return d

    def _disjunct_inst(self, fns, j: int, zz: str, val: Term) -> Formula:
        f = fns[j]
        ys = [f"y{i + 1}" for i in range(f.arity)]
        eq = EqAtom(val, Fun(f.name, tuple(Var(y) for y in ys)))
        body: Formula = eq
        for y in reversed(ys):
            body = And(DataAtom("S", Var(y)), body)
        for y in reversed(ys):
            body = Exists(y, body)
        return body

    def _member_proof(self, schema: CorecSchema, p: int, phi: Formula,
                      zz: str, sub_proofs) -> Derivation:
        fns = schema.functions
        fp = fns[p]
        xs = [Var(f"x{i + 1}") for i in range(fp.arity)]
        t = Fun(fp.name, tuple(xs))
        hyp_labels = {x.name: f"h{i + 1}" for i, x in enumerate(xs)}
        arg_proofs = [assume(hyp_labels[x.name], DataAtom("S", x)) for x in xs]
        premise1 = self._intro_member(fns, phi, zz, p, t,
                                      [x for x in xs], arg_proofs, refl(t))
        d_dcm = self._dcm_proof(schema, phi, zz, sub_proofs)
        return coinduction("S", zz, phi, t, "w", premise1, d_dcm)

    def _dcm_proof(self, schema: CorecSchema, phi: Formula, zz: str,
                   sub_proofs) -> Derivation:
        fns = schema.functions
        inst = [self._disjunct_inst(fns, j, zz, Var(zz)) for j in range(len(fns))]

        def suffix(i: int) -> Formula:
            out = inst[-1]
            for g in reversed(inst[i:-1]):
                out = Or(g, out)
            return out

        def case(j: int, d_j: Derivation) -> Derivation:
            return self._dcm_case(schema, phi, zz, j, d_j, sub_proofs)

        def cases_from(i: int, major: Derivation) -> Derivation:
            if i == len(fns) - 1:
                return case(i, major)
            l1 = self.labels.fresh()
            l2 = self.labels.fresh()
            left = case(i, assume(l1, inst[i]))
            right = cases_from(i + 1, assume(l2, suffix(i + 1)))
            return or_elim(major, l1, left, l2, right)

        return cases_from(0, assume("w", phi))

    def _dcm_case(self, schema: CorecSchema, phi: Formula, zz: str, j: int,
                  d_j: Derivation, sub_proofs) -> Derivation:
        """From a proof of disjunct j (zz is f_j on streams), derive the
        decomposition of zz."""
        fns = schema.functions
        fj = fns[j]
        k = fj.arity
        es = [f"e{self.labels.fresh()}" for _ in range(k)]
        # peel the existentials, then the conjunction chain
        chain_vars = [Var(e) for e in es]
        eq_formula = EqAtom(Var(zz), Fun(fj.name, tuple(chain_vars)))
        chain: Formula = eq_formula
        for v in reversed(chain_vars):
            chain = And(DataAtom("S", v), chain)
        a_label = self.labels.fresh()
        inner_assumption = assume(a_label, chain)
        s_proofs: list[Derivation] = []
        cur: Derivation = inner_assumption
        for _ in range(k):
            s_proofs.append(and_elim(1, cur))
            cur = and_elim(2, cur)
        d_eq = cur  # zz = f_j(e...)
        # rewrite the call one step: zz = cons(head, f_l(tailargs))
        head_c = fj.slots[0].component
        tail_slot = fj.slots[1]
        e_args = tuple(Var(e) for e in es)
        head_term = head_c.apply(e_args)
        tail_args = [c.apply(e_args) for c in tail_slot.args]
        callee = fns[tail_slot.target - 1]
        tail_term = Fun(callee.name, tuple(tail_args))
        eq_idx = 0
        stepped = rewrite(fj.name, eq_idx, "lr", (2,), d_eq,
                          EqAtom(Var(zz), Con(fj.produced, (head_term, tail_term))))
        # typings
        var_sorts = {e: "S" for e in es}
        hyp_labels: dict[str, str] = {}
        tmp_labels = {}
        for e in es:
            tmp = self.labels.fresh()
            tmp_labels[e] = tmp
            hyp_labels[e] = tmp
        d_head = self.typing(head_term, var_sorts, hyp_labels, sub_proofs)
        tail_arg_proofs = [self.typing(a, var_sorts, hyp_labels, sub_proofs)
                           for a in tail_args]
        pd_head = d_head
        for e, sp in zip(es, s_proofs):
            pd_head = graft(pd_head, tmp_labels[e], DataAtom("S", Var(e)), sp)
        tails = []
        for tp in tail_arg_proofs:
            for e, sp in zip(es, s_proofs):
                tp = graft(tp, tmp_labels[e], DataAtom("S", Var(e)), sp)
            tails.append(tp)
        d_phi_tail = self._intro_member(fns, phi, zz, tail_slot.target - 1,
                                        tail_term, tail_args, tails,
                                        refl(tail_term))
        dcm_formula = build_dcm(self.ds, "S", phi, zz, zz)
        body = and_intro(pd_head, and_intro(d_phi_tail, stepped))
        dcm_shape = dcm_formula
        z_names = []
        while isinstance(dcm_shape, Exists):
            z_names.append(dcm_shape.var)
            dcm_shape = dcm_shape.body
        d = self._intro_exists(z_names, dcm_shape, [head_term, tail_term], body)
        return self._close_exists(fj, zz, es, a_label, d, d_j)

    def _close_exists(self, fj, zz: str, es: list[str], a_label: str,
                      core: Derivation, d_j: Derivation) -> Derivation:
        """Wrap `core` (built from the innermost chain assumption labeled
        a_label) in existential eliminations for e_1..e_k, majored by d_j."""
        k = len(es)
        ys = [f"y{i + 1}" for i in range(k)]
        chain = self._chain_formula(fj, zz, [Var(y) for y in ys])
        if k == 0:
            return graft(core, a_label, chain, d_j)

        def remaining(i: int) -> Formula:
            """ex ys[i]..ys[k-1]. chain, with ys[0..i-1] already e's."""
            out: Formula = chain
            for jj in range(k - 1, i - 1, -1):
                out = Exists(ys[jj], out)
            for jj in range(i):
                out = subst_formula(out, ys[jj], Var(es[jj]))
            return out

        def close(i: int, major: Derivation) -> Derivation:
            body_i = remaining(i)
            assert isinstance(body_i, Exists)
            inst = subst_formula(body_i.body, body_i.var, Var(es[i]))
            if i == k - 1:
                return ex_elim(major, es[i], a_label, core)
            lab = self.labels.fresh()
            minor = close(i + 1, assume(lab, inst))
            return ex_elim(major, es[i], lab, minor)

        return close(0, d_j)

    def _chain_formula(self, fj, zz: str, vs: list[Term]) -> Formula:
        eq = EqAtom(Var(zz), Fun(fj.name, tuple(vs)))
        body: Formula = eq
        for v in reversed(vs):
            body = And(DataAtom("S", v), body)
        return body


# ---------------------------------------------------------------------------
# prove_corec
# ---------------------------------------------------------------------------

def prove_corec(bundle: CorecBundle | CorecSchema, ds: DataSystem,
                sub_proofs: dict[Term, Derivation] | None = None,
                member: str | None = None) -> Derivation:
    """The corecursion-to-coinduction proof: a checked derivation of
    S(f(x1..xk)) from assumptions S(x1)..S(xk), for the compiled program of
    the bundle.  `sub_proofs` may supply component typings keyed by their
    component term; missing ones are synthesized."""
    if isinstance(bundle, CorecSchema):
        bundle = CorecBundle((bundle,), bundle.functions[-1].name)
    program = compile_schema(bundle, ds)
    prover = Prover(ds, program)
    principal = member or bundle.principal
    result: Derivation | None = None
    for stratum in bundle.strata:
        if isinstance(stratum, CompositionDef):
            d = prover.register_composition(stratum, sub_proofs)
            if stratum.name == principal:
                result = d
        else:
            ds_map = prover.register_schema(stratum, sub_proofs)
            if principal in ds_map:
                result = ds_map[principal]
    if result is None:
        raise ExtractError(f"principal '{principal}' not defined by the bundle")
    return result


def prove_corec_program(program: Program, ds: DataSystem) -> tuple[Derivation, Program]:
    """Recognize, compile, prove: the derivation plus the compiled program
    it is checked against."""
    verdict = check_primitive_corecursive(program, ds)
    if not verdict.accepted:
        raise ExtractError(f"not primitive corecursive: {verdict.reason}")
    compiled = compile_schema(verdict.bundle, ds)
    return prove_corec(verdict.bundle, ds), compiled


# ---------------------------------------------------------------------------
# Extraction: symbolic realizers
# ---------------------------------------------------------------------------

class SymR:
    __slots__ = ()


@dataclass(frozen=True)
class Leaf(SymR):
    term: Term


@dataclass(frozen=True)
class Pair(SymR):
    head: SymR
    rest: SymR


@dataclass(frozen=True)
class ConsR(SymR):
    head_term: Term
    tail: SymR


def mat(r: SymR) -> Term:
    if isinstance(r, Leaf):
        return r.term
    if isinstance(r, Pair):
        return merge_term(mat(r.head), mat(r.rest))
    assert isinstance(r, ConsR)
    return Con("cons", (r.head_term, mat(r.tail)))


def even_r(r: SymR) -> SymR:
    if isinstance(r, Pair):
        return r.head
    return Leaf(even_term(mat(r)))


def odd_r(r: SymR) -> SymR:
    if isinstance(r, Pair):
        return r.rest
    return Leaf(odd_term(mat(r)))


def sigma0(r: SymR) -> SymR:
    return even_r(r)


def sigma1(r: SymR) -> SymR:
    return even_r(odd_r(r))


def head_term_of(r: SymR) -> Term:
    if isinstance(r, ConsR):
        return r.head_term
    if isinstance(r, Pair):
        return head_term_of(r.head)
    return Fun(pi_name(1), (mat(r),))


def tail_r(r: SymR) -> SymR:
    if isinstance(r, ConsR):
        return r.tail
    if isinstance(r, Pair):
        return Pair(r.rest, tail_r(r.head))
    return Leaf(Fun(pi_name(2), (mat(r),)))


ZEROS_R = Leaf(zeros_term())


@dataclass
class ExtractionCertificate:
    lines: list[str] = field(default_factory=list)
    split_chain: int = 0
    coinductions: int = 0

    def note(self, path: tuple[int, ...], rule: str, what: str) -> None:
        where = "/".join(str(i) for i in path) or "root"
        self.lines.append(f"{where}\t{rule}\t{what}")

    def required_input_depth(self, output_depth: int) -> int:
        # conservative static bound; merge/split round trips created and
        # consumed inside one extraction are depth-neutral at runtime
        return output_depth * (2 ** max(1, self.split_chain)) + 8

    def render(self) -> str:
        head = [f"coinductions\t{self.coinductions}",
                f"max-split-chain\t{self.split_chain}"]
        return "\n".join(head + self.lines)


@dataclass
class ExtractionResult:
    bundle: CorecBundle
    program: Program
    value_params: tuple[str, ...]       # free variables, in parameter order
    realizer_params: tuple[str, ...]    # assumption labels, in parameter order
    certificate: ExtractionCertificate

    @property
    def principal(self) -> str:
        return self.bundle.principal


def _algebra_strata() -> list[Stratum]:
    p1 = Component.destructor(1)
    p2 = Component.destructor(2)
    tl2 = Component.compose(p2, [p2])
    return [
        CorecSchema((SchemaFun(EVEN, 1, (PlainSlot(p1), RecSlot(1, (tl2,))),
                               produced="cons"),)),
        CompositionDef(ODD, 1, Component(1, Fun(EVEN, (Fun(pi_name(2), (Var("x1"),)),)))),
        CorecSchema((SchemaFun(MERGE, 2,
                               (PlainSlot(Component(2, Fun(pi_name(1), (Var("x1"),)))),
                                RecSlot(1, (Component.projection(2, 2),
                                            Component(2, Fun(pi_name(2), (Var("x1"),)))))),
                               produced="cons"),)),
        CorecSchema((SchemaFun(ZEROS, 0,
                               (PlainSlot(Component(0, Con("0"))), RecSlot(1, ())),
                               produced="cons"),)),
    ]


class Extractor:
    def __init__(self, ds: DataSystem, program: Program):
        self.ds = ds
        self.program = program
        self.defs: list[Stratum] = []
        self.counter = itertools.count(1)
        self.cert = ExtractionCertificate()
        self.cons_name = "cons"
        taken = set(program.functions())

        def fresh_name(base: str) -> str:
            while True:
                n = f"{base}{next(self.counter)}"
                if n not in taken:
                    taken.add(n)
                    return n

        self.fresh_name = fresh_name

    # -- values ---------------------------------------------------------------

    def value_term(self, t: Term, ctx: dict) -> Term:
        binding = {}
        for v in variables(t):
            if v in ctx["values"]:
                sort, val = ctx["values"][v]
                binding[v] = val if sort == "B" else mat(val)
        return substitute(t, binding)

    def _chain_len(self, t: Term) -> int:
        n = 0
        while isinstance(t, Fun) and t.name in (EVEN, ODD):
            n += 1
            t = t.args[0]
        return n

    def _track_split(self, r: SymR) -> None:
        if isinstance(r, Leaf):
            self.cert.split_chain = max(self.cert.split_chain,
                                        self._chain_len(r.term))

    # -- the walk ----------------------------------------------------------------

    def extract(self, d: Derivation, ctx: dict, path: tuple[int, ...] = ()) -> SymR:
        rule = d.rule
        handler = getattr(self, "_x_" + rule.replace("-", "_"), None)
        if handler is None:
            raise ExtractError(f"rule '{rule}' outside the supported extraction set")
        out = handler(d, ctx, path)
        self._track_split(out)
        return out

    def _x_assume(self, d, ctx, path):
        label = d.attr("label")
        try:
            return ctx["realizers"][label]
        except KeyError:
            raise ExtractError(f"no realizer for open assumption '{label}'")

    def _x_and_intro(self, d, ctx, path):
        a = self.extract(d.premises[0], ctx, path + (0,))
        b = self.extract(d.premises[1], ctx, path + (1,))
        self.cert.note(path, d.rule, "merge of the two conjunct realizers")
        return Pair(a, Pair(b, ZEROS_R))

    def _x_and_elim(self, d, ctx, path):
        w = self.extract(d.premises[0], ctx, path + (0,))
        self.cert.note(path, d.rule, f"split {d.attr('i')}")
        return sigma0(w) if d.attr("i") == 1 else sigma1(w)

    def _x_or_intro(self, d, ctx, path):
        r = self.extract(d.premises[0], ctx, path + (0,))
        bit = "0" if d.attr("i") == 1 else "1"
        self.cert.note(path, d.rule, f"tag head bit {bit}")
        return ConsR(Con(bit), r)

    def _x_or_elim(self, d, ctx, path):
        w = self.extract(d.premises[0], ctx, path + (0,))
        tail = tail_r(w)
        ctx1 = _extend(ctx, realizers={d.attr("label1"): tail})
        ctx2 = _extend(ctx, realizers={d.attr("label2"): tail})
        if isinstance(w, ConsR) and isinstance(w.head_term, Con) \
                and w.head_term.name in ("0", "1"):
            pick = 1 if w.head_term.name == "0" else 2
            self.cert.note(path, d.rule, f"static branch {pick}")
            return self.extract(d.premises[pick], ctx1 if pick == 1 else ctx2,
                                path + (pick,))
        r1 = self.extract(d.premises[1], ctx1, path + (1,))
        r2 = self.extract(d.premises[2], ctx2, path + (2,))
        self.cert.note(path, d.rule, "discriminator dispatch on the head bit")
        return Leaf(Fun(DELTA, (head_term_of(w), mat(r1), mat(r2), mat(r1))))

    def _x_ex_intro(self, d, ctx, path):
        body_r = self.extract(d.premises[0], ctx, path + (0,))
        concl = d.conclusion
        witness = d.attr("witness")
        wt = self.value_term(witness, ctx)
        sorts = infer_sorts(concl, self.ds)
        if sorts.get(concl.var) == "B":
            wit_r: SymR = ConsR(wt, ZEROS_R)
        else:
            wit_r = Leaf(wt)
        self.cert.note(path, d.rule, f"witness value {wt}")
        return Pair(wit_r, Pair(body_r, ZEROS_R))

    def _x_ex_elim(self, d, ctx, path):
        w = self.extract(d.premises[0], ctx, path + (0,))
        major = d.premises[0].conclusion
        eigen = d.attr("eigen")
        sorts = infer_sorts(major, self.ds)
        v0 = sigma0(w)
        if sorts.get(major.var) == "B":
            value = ("B", head_term_of(v0))
        else:
            value = ("S", v0)
        ctx2 = _extend(ctx, values={eigen: value},
                       realizers={d.attr("label"): sigma1(w)})
        return self.extract(d.premises[1], ctx2, path + (1,))

    def _x_refl(self, d, ctx, path):
        t = d.conclusion.left
        vt = self.value_term(t, ctx)
        if self._bool_sorted(t, ctx):
            return ConsR(vt, ZEROS_R)
        return Leaf(vt)

    def _bool_sorted(self, t: Term, ctx) -> bool:
        if isinstance(t, Var):
            entry = ctx["values"].get(t.name)
            return bool(entry and entry[0] == "B")
        if isinstance(t, Con):
            types = self.ds.types_of(t.name)
            return bool(types) and types[0].result_predicate.inductive
        if isinstance(t, Fun) and t.name == pi_name(1):
            return True
        return False

    def _x_rewrite(self, d, ctx, path):
        return self.extract(d.premises[0], ctx, path + (0,))

    def _x_data_intro(self, d, ctx, path):
        ct = d.attr("type")
        if ct.constructor.arity != 0 or not ct.result_predicate.inductive:
            raise ExtractError("extraction supports nullary data introductions only")
        return ConsR(Con(ct.constructor.name), ZEROS_R)

    def _x_data_elim(self, d, ctx, path):
        w = self.extract(d.premises[0], ctx, path + (0,))
        ct, i = d.attr("type"), d.attr("i")
        self.cert.note(path, d.rule, f"destructor {pi_name(i)}")
        if ct.argument_predicates[i - 1].inductive:
            if i == 1:
                return ConsR(head_term_of(w), ZEROS_R)
            return ConsR(Fun(pi_name(i), (mat(w),)), ZEROS_R)
        if i == 2:
            return tail_r(w)
        return Leaf(Fun(pi_name(i), (mat(w),)))

    def _x_induction(self, d, ctx, path):
        if d.attr("pred") != "B":
            raise ExtractError("extraction supports induction over booleans only")
        major = self.extract(d.premises[0], ctx, path + (0,))
        cases = [self.extract(p, ctx, path + (1 + i,))
                 for i, p in enumerate(d.premises[1:])]
        bit = head_term_of(major)
        self.cert.note(path, d.rule, "boolean case analysis")
        return Leaf(Fun(DELTA, (bit, mat(cases[0]), mat(cases[1]), mat(cases[0]))))

    def _x_coinduction(self, d, ctx, path):
        hole = d.attr("var")
        label = d.attr("label")
        t = d.conclusion.term
        self.cert.coinductions += 1
        g = self.extract(d.premises[0], ctx, path + (0,))
        # extract the decomposition step symbolically over the current
        # context plus the subject value u and invariant realizer v
        items_v = sorted(ctx["values"].items())
        items_r = sorted(ctx["realizers"].items())
        nparams = len(items_v) + len(items_r)
        xs = arg_vars(nparams + 2)
        hctx = {"values": {}, "realizers": {}}
        for i, (name, (sort, _val)) in enumerate(items_v):
            hctx["values"][name] = (sort, xs[i] if sort == "B" else Leaf(xs[i]))
        for i, (lab, _r) in enumerate(items_r):
            hctx["realizers"][lab] = Leaf(xs[len(items_v) + i])
        u_param, v_param = xs[nparams], xs[nparams + 1]
        hctx["values"][hole] = ("S", Leaf(u_param))
        hctx["realizers"][label] = Leaf(v_param)
        h_sym = self.extract(d.premises[1], hctx, path + (1,))
        # the runner consumes exactly three slots of the decomposition
        # evidence; project them now so no evidence tree is rebuilt and
        # re-split at run time
        bit_term = head_term_of(sigma0(h_sym))          # the produced bit
        unext = mat(sigma0(sigma1(h_sym)))              # next subject value
        vnext = mat(sigma0(sigma1(sigma1(sigma1(h_sym)))))  # next realizer
        r_name = self.fresh_name("run")
        self.defs.append(CorecSchema((SchemaFun(
            r_name, nparams + 2,
            (PlainSlot(Component(nparams + 2, bit_term)),
             RecSlot(1, tuple(Component.projection(nparams + 2, i + 1)
                              for i in range(nparams))
                     + (Component(nparams + 2, unext),
                        Component(nparams + 2, vnext)))),
            produced=self.cons_name),)))
        self.cert.note(path, d.rule,
                       f"corecurrence {r_name} over the projected "
                       f"decomposition evidence")
        actuals = [val if sort == "B" else mat(val)
                   for _n, (sort, val) in items_v]
        actuals += [mat(r) for _l, r in items_r]
        u0 = self.value_term(t, ctx)
        return Leaf(Fun(r_name, tuple(actuals) + (u0, mat(g))))


def _extend(ctx: dict, values: dict | None = None,
            realizers: dict | None = None) -> dict:
    out = {"values": dict(ctx["values"]), "realizers": dict(ctx["realizers"])}
    if values:
        out["values"].update(values)
    if realizers:
        out["realizers"].update(realizers)
    return out


def extract(d: Derivation, program: Program, ds: DataSystem,
            check: bool = True) -> ExtractionResult:
    """Lemma-2 extraction from a detour-free, all-strongly-positive
    derivation: a primitive-corecursive program whose principal maps values
    of the judgment's free variables plus realizers of its open assumptions
    to a realizer of the conclusion."""
    if check:
        res = check_proof(ds, program, d)
        if not res.ok:
            raise ExtractError(f"derivation does not check: {res.violations[0]}")
        if has_detour(d):
            raise ExtractError("derivation has logical detours; normalize first")
        offending = assert_sp_proof(d)
        if offending is not None:
            raise ExtractError(f"non-strongly-positive node at {offending[0]}")
        assumptions = sorted(res.assumptions.keys(), key=lambda kv: kv[0])
    else:
        assumptions = sorted({(n.attr("label"), n.conclusion)
                              for _p, n in d.nodes() if n.rule == "assume"},
                             key=lambda kv: kv[0])
    free = sorted(fv(d.conclusion) | {v for _l, f in assumptions for v in fv(f)})
    ex = Extractor(ds, program)
    ctx = {"values": {}, "realizers": {}}
    n_in = len(free) + len(assumptions)
    xs = arg_vars(n_in)
    sorts = infer_sorts(d.conclusion, ds)
    for (label, f) in assumptions:
        for v2, s in infer_sorts(f, ds).items():
            sorts.setdefault(v2, s)
    for i, v2 in enumerate(free):
        if sorts.get(v2) == "B":
            ctx["values"][v2] = ("B", Fun(pi_name(1), (xs[i],)))
        else:
            ctx["values"][v2] = ("S", Leaf(xs[i]))
    for i, (label, f) in enumerate(assumptions):
        ctx["realizers"][label] = Leaf(xs[len(free) + i])
    out = ex.extract(d, ctx)
    f0 = ex.fresh_name("f0_") if "f0" in program.functions() else "f0"
    ex.defs.append(CompositionDef(f0, n_in, Component(n_in, mat(out))))
    bundle = CorecBundle(tuple(_algebra_strata()) + tuple(ex.defs), f0)
    compiled = compile_schema(bundle, ds)
    base = [e for e in program.body if not reserved_function(e.function)]
    extra = [e for e in compiled.body if not reserved_function(e.function)
             and e.function not in {b.function for b in base}]
    merged = assemble_program(ds, base + extra, f0)
    return ExtractionResult(bundle, merged, tuple(free),
                            tuple(l for l, _f in assumptions), ex.cert)


# ---------------------------------------------------------------------------
# The Theorem-2 round trip
# ---------------------------------------------------------------------------

@dataclass
class StageResult:
    stage: str
    ok: bool
    detail: str = ""


@dataclass
class RoundtripReport:
    depth: int
    entries: dict[str, list[StageResult]]

    @property
    def ok(self) -> bool:
        return all(s.ok for ss in self.entries.values() for s in ss)

    def render(self) -> str:
        lines = []
        for name, stages in self.entries.items():
            status = "PASS" if all(s.ok for s in stages) else "FAIL"
            lines.append(f"{name}\t{status}")
            for s in stages:
                mark = "ok" if s.ok else "FAIL"
                detail = f"\t{s.detail}" if s.detail and not s.ok else ""
                lines.append(f"  {s.stage}\t{mark}{detail}")
        return "\n".join(lines)


def _rename_functions(program: Program, suffix: str, ds: DataSystem) -> Program:
    mapping = {f: f + suffix for f in program.user_functions()}

    def ren(t: Term) -> Term:
        if isinstance(t, Var):
            return t
        args = tuple(ren(a) for a in t.args)
        if isinstance(t, Fun) and t.name in mapping:
            return Fun(mapping[t.name], args)
        return type(t)(t.name, args)

    eqs = [Equation(mapping.get(e.function, e.function),
                    tuple(ren(p) for p in e.patterns), ren(e.rhs))
           for e in program.body if not reserved_function(e.function)]
    return assemble_program(ds, eqs, mapping[program.principal])


def roundtrip_report(depth: int = 64, ds: DataSystem | None = None,
                     library: dict | None = None, seed: int = 20240817,
                     inputs_per_entry: int = 10,
                     budget: int = 100_000) -> RoundtripReport:
    from .system import boolean_stream_system
    ds = ds or boolean_stream_system()
    library = library or stock_library()
    report = RoundtripReport(depth, {})
    for name, entry in library.items():
        stages: list[StageResult] = []
        report.entries[name] = stages
        verdict = check_primitive_corecursive(entry.program, ds)
        stages.append(StageResult("recognize", verdict.accepted,
                                  verdict.reason or ""))
        if not verdict.accepted:
            continue
        compiled = compile_schema(verdict.bundle, ds)
        v2 = check_primitive_corecursive(compiled, ds)
        again = v2.accepted and bundle_equal(verdict.bundle, v2.bundle)
        stages.append(StageResult("compile", again,
                                  "" if again else "re-extraction differs"))
        if not again:
            continue
        try:
            proof = prove_corec(verdict.bundle, ds)
        except ExtractError as e:
            stages.append(StageResult("prove-corec", False, str(e)))
            continue
        chk = check_proof(ds, compiled, proof)
        stages.append(StageResult("prove-corec", chk.ok,
                                  "" if chk.ok else str(chk.violations[0])))
        if not chk.ok:
            continue
        normal = normalize(proof)
        chk2 = check_proof(ds, compiled, normal)
        ok_norm = chk2.ok and not has_detour(normal)
        stages.append(StageResult("normalize", ok_norm,
                                  "" if ok_norm else "detour or check failure"))
        if not ok_norm:
            continue
        sp = assert_sp_proof(normal)
        stages.append(StageResult("sp-scan", sp is None,
                                  "" if sp is None else f"offender at {sp[0]}"))
        if sp is not None:
            continue
        try:
            extraction = extract(normal, compiled, ds)
        except ExtractError as e:
            stages.append(StageResult("extract", False, str(e)))
            continue
        rec = check_primitive_corecursive(extraction.program, ds)
        stages.append(StageResult("extract", rec.accepted,
                                  rec.reason or ""))
        if not rec.accepted:
            continue
        ok_bisim, detail = _bisim_stage(entry, extraction, ds, depth, seed,
                                        inputs_per_entry, budget)
        stages.append(StageResult("bisim", ok_bisim, detail))
    return report


def _bisim_stage(entry, extraction: ExtractionResult, ds: DataSystem,
                 depth: int, seed: int, inputs_per_entry: int,
                 budget: int) -> tuple[bool, str]:
    rng = random.Random(seed)
    orig = _rename_functions(entry.program, "_orig", ds)
    eqs = [e for e in extraction.program.body if not reserved_function(e.function)]
    eqs += [e for e in orig.body if not reserved_function(e.function)]
    merged = assemble_program(ds, eqs, extraction.principal)
    k = entry.arity
    runs = inputs_per_entry if k > 0 else 1
    for case in range(runs):
        names = [f"in{i}" for i in range(k)]
        env = DiagramEnv.of({n: random_stream_coterm(rng) for n in names})
        session = Session(merged, ds, env)
        args = tuple(Fun(n) for n in names)
        values = {v2: args[i] for i, v2 in enumerate(extraction.value_params)}
        f0_args = tuple(values[v2] for v2 in extraction.value_params)
        f0_args += tuple(values[_label_var(l)] if _label_var(l) in values
                         else args[0] if args else Fun(ZEROS)
                         for l in extraction.realizer_params)
        lhs = Fun(extraction.principal, f0_args)
        rhs = Fun(entry.program.principal + "_orig", args)
        r = derives_omega(merged, env, lhs, rhs, depth, budget, session=session)
        if not r.equal:
            return False, f"case {case}: {r}"
    return True, ""


def _label_var(label: str) -> str:
    # assumption labels for argument streams are h1..hk matching x1..xk
    if label.startswith("h") and label[1:].isdigit():
        return f"x{label[1:]}"
    return label
