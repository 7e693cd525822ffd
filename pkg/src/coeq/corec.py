"""Primitive corecurrence: schema values, the productivity recognizer, and
compilation of schemas back to equational programs.

A schema component is a closed combination of constructors, destructors,
the discriminator, and previously accepted functions, represented as a
term over argument variables x1..xk.  Definitions by cases on input
patterns are merged into single components by compiling the case analysis
into discriminator dispatch; the merge demands exhaustive patterns, which
is what separates total corecursive case analysis from partial programs.

Recursion is accepted only in the argument slots directly under the
produced constructor; anything else is rejected with the offending
subterm named.
"""
from __future__ import annotations

from dataclasses import dataclass

from .program import (DELTA, Equation, Program, assemble_program, pi_name,
                      reserved_function, validate_program)
from .system import DataSystem
from .terms import Con, Fun, Term, Var, substitute, subterms


def arg_vars(k: int) -> tuple[Term, ...]:
    return tuple(Var(f"x{i + 1}") for i in range(k))


@dataclass(frozen=True)
class Component:
    """A previously-available function of the component algebra, as a term
    over x1..x{arity}."""
    arity: int
    term: Term

    @staticmethod
    def constructor(name: str, r: int) -> "Component":
        return Component(r, Con(name, arg_vars(r)))

    @staticmethod
    def destructor(i: int) -> "Component":
        return Component(1, Fun(pi_name(i), (Var("x1"),)))

    @staticmethod
    def discriminator(k: int) -> "Component":
        return Component(k + 1, Fun(DELTA, arg_vars(k + 1)))

    @staticmethod
    def previously_defined(name: str, arity: int) -> "Component":
        return Component(arity, Fun(name, arg_vars(arity)))

    @staticmethod
    def projection(arity: int, i: int) -> "Component":
        return Component(arity, Var(f"x{i}"))

    @staticmethod
    def compose(outer: "Component", inners: list["Component"]) -> "Component":
        if outer.arity != len(inners):
            raise ValueError("composition arity mismatch")
        if inners:
            k = inners[0].arity
            if any(c.arity != k for c in inners):
                raise ValueError("inner component arities disagree")
        else:
            k = 0
        binding = {f"x{i + 1}": c.term for i, c in enumerate(inners)}
        return Component(k, substitute(outer.term, binding))

    def apply(self, args: tuple[Term, ...]) -> Term:
        if len(args) != self.arity:
            raise ValueError("component applied at wrong arity")
        return substitute(self.term, {f"x{i + 1}": a for i, a in enumerate(args)})


@dataclass(frozen=True)
class PlainSlot:
    component: Component


@dataclass(frozen=True)
class RecSlot:
    target: int  # 1-based index into the schema vector
    args: tuple[Component, ...]


Slot = PlainSlot | RecSlot


@dataclass(frozen=True)
class SchemaFun:
    name: str
    arity: int
    slots: tuple[Slot, ...]
    produced: str | None = None        # single produced constructor (stream form)
    selector: Component | None = None  # cocase selector (general form)


@dataclass(frozen=True)
class CorecSchema:
    functions: tuple[SchemaFun, ...]

    def names(self) -> list[str]:
        return [f.name for f in self.functions]


@dataclass(frozen=True)
class CompositionDef:
    name: str
    arity: int
    component: Component


Stratum = CompositionDef | CorecSchema


@dataclass(frozen=True)
class CorecBundle:
    """Stratified definitions: each stratum uses only earlier ones."""
    strata: tuple[Stratum, ...]
    principal: str

    def schema_of(self, name: str) -> CorecSchema | None:
        for s in self.strata:
            if isinstance(s, CorecSchema) and name in s.names():
                return s
        return None

    def composition_of(self, name: str) -> CompositionDef | None:
        for s in self.strata:
            if isinstance(s, CompositionDef) and s.name == name:
                return s
        return None


@dataclass(frozen=True)
class ProductivityVerdict:
    accepted: bool
    bundle: CorecBundle | None = None
    reason: str | None = None
    offending: Equation | None = None

    @property
    def schema(self) -> CorecSchema | None:
        if self.bundle is None:
            return None
        return self.bundle.schema_of(self.bundle.principal)

    def report(self) -> str:
        if not self.accepted:
            lines = ["rejected: " + (self.reason or "unknown")]
            if self.offending is not None:
                lines.append(f"  at equation: {self.offending}")
            return "\n".join(lines)
        lines = ["primitive-corecursive"]
        for s in self.bundle.strata:
            if isinstance(s, CompositionDef):
                lines.append(f"  {s.name}/{s.arity}: composition {s.component.term}")
            else:
                for f in s.functions:
                    head = f"  {f.name}/{f.arity}: corecurrence"
                    if f.selector is not None:
                        head += f" selector h = {f.selector.term}"
                    elif f.produced:
                        head += f" producing '{f.produced}'"
                    lines.append(head)
                    for i, slot in enumerate(f.slots):
                        if isinstance(slot, PlainSlot):
                            lines.append(f"    slot {i + 1}: g = {slot.component.term}")
                        else:
                            args = ", ".join(str(a.term) for a in slot.args)
                            tgt = s.functions[slot.target - 1].name
                            lines.append(f"    slot {i + 1}: call {tgt} (l = {slot.target}) on [{args}]")
        return "\n".join(lines)


class _Reject(Exception):
    def __init__(self, reason: str, equation: Equation | None = None):
        super().__init__(reason)
        self.reason = reason
        self.equation = equation


# -- case merging -------------------------------------------------------------

class _Fresh:
    def __init__(self) -> None:
        self.n = 0

    def var(self) -> Var:
        self.n += 1
        return Var(f"_w{self.n}")


def _merge_cases(ds: DataSystem, rows: list[tuple[tuple[Term, ...], Term]],
                 subjects: list[Term], fresh: _Fresh,
                 equation: Equation | None) -> Term:
    """Compile case-analyzing rows into one term over the subjects.

    Each row is (patterns aligned with subjects, result term).  Splits are
    discriminator dispatches; a split position's cases must cover the
    constructor set of some predicate, otherwise the definition is partial
    and is rejected.
    """
    if not rows:
        raise _Reject("no cases left", equation)
    split_at = -1
    for i in range(len(subjects)):
        if any(not isinstance(r[0][i], Var) for r in rows):
            split_at = i
            break
    if split_at < 0:
        if len(rows) > 1:
            raise _Reject("overlapping variable cases", equation)
        pats, rhs = rows[0]
        return substitute(rhs, {p.name: s for p, s in zip(pats, subjects)
                                if isinstance(p, Var)})
    subject = subjects[split_at]
    demanded = {r[0][split_at].name for r in rows if not isinstance(r[0][split_at], Var)}
    has_var_row = any(isinstance(r[0][split_at], Var) for r in rows)
    if not has_var_row:
        covered = any(demanded == {c.name for c in ds.constructors_of(p)}
                      for p in ds.predicates)
        if not covered:
            raise _Reject(
                f"non-exhaustive patterns: cases {{{', '.join(sorted(demanded))}}} at "
                f"'{subject}' match no predicate's constructor set", equation)

    def branch(cname: str, r: int) -> Term:
        new_subjects = (subjects[:split_at]
                        + [Fun(pi_name(i + 1), (subject,)) for i in range(r)]
                        + subjects[split_at + 1:])
        new_rows: list[tuple[tuple[Term, ...], Term]] = []
        for pats, rhs in rows:
            p = pats[split_at]
            if isinstance(p, Var):
                wilds = tuple(fresh.var() for _ in range(r))
                new_rows.append((pats[:split_at] + wilds + pats[split_at + 1:],
                                 substitute(rhs, {p.name: subject})))
            elif p.name == cname:
                new_rows.append((pats[:split_at] + tuple(p.args) + pats[split_at + 1:], rhs))
        if not new_rows:
            return subject  # unreachable on canonical data
        return _merge_cases(ds, new_rows, new_subjects, fresh, equation)

    if len(demanded) == 1 and not has_var_row:
        c = ds.constructor(next(iter(demanded)))
        return branch(c.name, c.arity)
    branches = tuple(branch(c.name, c.arity) for c in ds.vocabulary)
    return Fun(DELTA, (subject,) + branches)


# -- the recognizer -----------------------------------------------------------

def _used_functions(t: Term) -> set[str]:
    return {u.name for u in subterms(t) if isinstance(u, Fun)}


def _sccs(order: list[str], deps: dict[str, set[str]]) -> list[list[str]]:
    """Strongly connected components in reverse topological order
    (Tarjan), members listed in declaration order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on: set[str] = set()
    out: list[list[str]] = []
    counter = [0]

    def visit(v: str) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        for w in sorted(deps.get(v, ()), key=order.index):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(sorted(comp, key=order.index))

    for v in order:
        if v not in index:
            visit(v)
    return out


def check_primitive_corecursive(program: Program, ds: DataSystem) -> ProductivityVerdict:
    rep = validate_program(program, ds)
    if not rep.ok:
        return ProductivityVerdict(False, reason=f"invalid program: {rep}")
    order = program.user_functions()
    decl_index = {f: i for i, f in enumerate(order)}
    deps = {f: {g for e in program.equations_of(f) for g in _used_functions(e.rhs)
                if g in decl_index}
            for f in order}
    try:
        strata: list[Stratum] = []
        accepted: dict[str, int] = {}
        cocases: dict[str, int] = {}
        for f in order:
            m = _cocase_slot_count(f, program)
            if m is not None:
                cocases[f] = m
        for scc in _sccs(order, deps):
            recursive = any(g in scc for f in scc for g in deps[f])
            first_decl = min(decl_index[f] for f in scc)
            for f in scc:
                for g in deps[f]:
                    if g not in scc and decl_index[g] > first_decl:
                        raise _Reject(
                            f"forward reference: '{f}' uses '{g}' declared later",
                            program.equations_of(f)[0])
            if not recursive:
                (f,) = scc
                strata.append(_composition(program, ds, f, accepted))
                accepted[f] = len(program.equations_of(f)[0].patterns)
            else:
                schema = _corecurrence(program, ds, scc, accepted, cocases)
                strata.append(schema)
                for sf in schema.functions:
                    accepted[sf.name] = sf.arity
        bundle = CorecBundle(tuple(strata), program.principal)
        return ProductivityVerdict(True, bundle=bundle)
    except _Reject as r:
        return ProductivityVerdict(False, reason=r.reason, offending=r.equation)


def _check_component_term(t: Term, ds: DataSystem, accepted: dict[str, int],
                          equation: Equation | None) -> None:
    for u in subterms(t):
        if isinstance(u, Fun) and not reserved_function(u.name) and u.name not in accepted:
            raise _Reject(
                f"recursive occurrence under non-component context: '{u}' in '{t}'",
                equation)


def _composition(program: Program, ds: DataSystem, f: str,
                 accepted: dict[str, int]) -> CompositionDef:
    eqs = program.equations_of(f)
    k = len(eqs[0].patterns)
    rows = [(e.patterns, e.rhs) for e in eqs]
    merged = _merge_cases(ds, rows, list(arg_vars(k)), _Fresh(), eqs[0])
    _check_component_term(merged, ds, accepted, eqs[0])
    return CompositionDef(f, k, Component(k, merged))


def _cocase_slot_count(f: str, program: Program) -> int | None:
    """Recognize an output-dispatch helper: one equation per constructor,
    cocase(c(y...), v1..vm) = c(v1..vr).  Returns m, or None."""
    if not f.startswith("cocase") or not f[6:].isdigit():
        return None
    m = int(f[6:])
    for e in program.equations_of(f):
        if len(e.patterns) != m + 1 or not isinstance(e.patterns[0], Con):
            return None
        r = len(e.patterns[0].args)
        want = Con(e.patterns[0].name, e.patterns[1:r + 1])
        if e.rhs != want:
            return None
    return m


def _corecurrence(program: Program, ds: DataSystem, scc: list[str],
                  accepted: dict[str, int],
                  cocases: dict[str, int] | None = None) -> CorecSchema:
    cocases = cocases or {}
    target_index = {f: i + 1 for i, f in enumerate(scc)}
    funs: list[SchemaFun] = []
    for f in scc:
        eqs = program.equations_of(f)
        k = len(eqs[0].patterns)
        if all(isinstance(e.rhs, Fun) and e.rhs.name in cocases for e in eqs):
            funs.append(_cocase_call_fun(program, ds, f, k, scc, target_index,
                                         accepted, cocases))
            continue
        produced: list[str] = []
        for e in eqs:
            if not isinstance(e.rhs, Con):
                raise _Reject(
                    f"unguarded recursion: right-hand side '{e.rhs}' of a recursive "
                    f"function is not constructor-headed", e)
            if e.rhs.name not in produced:
                produced.append(e.rhs.name)
            if not any(not t.result_predicate.inductive
                       for t in ds.types_of(e.rhs.name)):
                raise _Reject(
                    f"produced constructor '{e.rhs.name}' builds no coinductive data", e)
        if len(produced) > 1:
            arities = {ds.constructor(c).arity for c in produced}
            if len(arities) > 1:
                raise _Reject(
                    "mixed arities among produced constructors "
                    f"{sorted(produced)}", eqs[0])
            funs.append(_cocase_fun(program, ds, f, k, scc, target_index, accepted))
            continue
        c = ds.constructor(produced[0])
        slots: list[Slot] = []
        for i in range(c.arity):
            slots.append(_merge_slot(program, ds, f, k, i, scc, target_index,
                                     accepted, eqs,
                                     [e.rhs.args[i] for e in eqs]))
        funs.append(SchemaFun(f, k, tuple(slots), produced=c.name))
    return CorecSchema(tuple(funs))


def _cocase_call_fun(program: Program, ds: DataSystem, f: str, k: int,
                     scc: list[str], target_index: dict[str, int],
                     accepted: dict[str, int],
                     cocases: dict[str, int]) -> SchemaFun:
    """Re-extract a compiled cocase-form definition
    f(x...) = cocaseM(h(x...), e_1 .. e_M)."""
    eqs = program.equations_of(f)
    m = cocases[eqs[0].rhs.name]
    for e in eqs:
        if cocases.get(e.rhs.name) != m or len(e.rhs.args) != m + 1:
            raise _Reject(f"inconsistent output dispatch in '{f}'", e)
    sel_rows = [(e.patterns, e.rhs.args[0]) for e in eqs]
    selector = _merge_cases(ds, sel_rows, list(arg_vars(k)), _Fresh(), eqs[0])
    _check_component_term(selector, ds, accepted, eqs[0])
    slots: list[Slot] = []
    for i in range(m):
        slots.append(_merge_slot(program, ds, f, k, i, scc, target_index,
                                 accepted, eqs,
                                 [e.rhs.args[1 + i] for e in eqs]))
    return SchemaFun(f, k, tuple(slots), selector=Component(k, selector))


def _classify_slot_term(t: Term, scc: list[str], equation: Equation) -> tuple[str, Term]:
    occ = [u for u in subterms(t) if isinstance(u, Fun) and u.name in scc]
    if not occ:
        return ("plain", t)
    if isinstance(t, Fun) and t.name in scc:
        inner = [u for a in t.args for u in subterms(a)
                 if isinstance(u, Fun) and u.name in scc]
        if not inner:
            return ("rec", t)
        raise _Reject(
            f"recursive occurrence under non-component context: '{inner[0]}' "
            f"inside recursive call '{t}'", equation)
    raise _Reject(
        f"recursive occurrence under non-component context: '{occ[0]}' in '{t}'",
        equation)


def _merge_slot(program: Program, ds: DataSystem, f: str, k: int, i: int,
                scc: list[str], target_index: dict[str, int],
                accepted: dict[str, int], eqs: list[Equation],
                terms: list[Term]) -> Slot:
    kinds = []
    for e, t in zip(eqs, terms):
        kinds.append((_classify_slot_term(t, scc, e), e))
    tags = {kind for (kind, _t), _e in kinds}
    if tags == {"plain"}:
        rows = [(e.patterns, t) for (_k, t), e in kinds]
        merged = _merge_cases(ds, rows, list(arg_vars(k)), _Fresh(), eqs[0])
        _check_component_term(merged, ds, accepted, eqs[0])
        return PlainSlot(Component(k, merged))
    if tags == {"rec"}:
        targets = {t.name for (_k, t), _e in kinds}
        if len(targets) > 1:
            raise _Reject(
                f"case-dependent recursion target {sorted(targets)} in slot {i + 1}",
                eqs[0])
        callee = targets.pop()
        callee_arity = len(kinds[0][0][1].args)
        args: list[Component] = []
        for j in range(callee_arity):
            rows = [(e.patterns, t.args[j]) for (_k, t), e in kinds]
            merged = _merge_cases(ds, rows, list(arg_vars(k)), _Fresh(), eqs[0])
            _check_component_term(merged, ds, accepted, eqs[0])
            args.append(Component(k, merged))
        return RecSlot(target_index[callee], tuple(args))
    raise _Reject(
        f"slot {i + 1} of '{f}' mixes direct values and recursive calls across cases",
        eqs[0])


def _cocase_fun(program: Program, ds: DataSystem, f: str, k: int,
                scc: list[str], target_index: dict[str, int],
                accepted: dict[str, int]) -> SchemaFun:
    """Varying produced constructors of a common arity: extract a cocase
    selector whose value's head picks the constructor."""
    eqs = program.equations_of(f)
    r = ds.constructor(eqs[0].rhs.name).arity
    sel_rows = []
    for e in eqs:
        args = tuple(e.patterns[0] if e.patterns else Con(ds.vocabulary[0].name)
                     for _ in range(r))
        # selector value only steers by its head constructor
        sel_rows.append((e.patterns, Con(e.rhs.name, args)))
    fresh = _Fresh()
    selector = _merge_cases(ds, sel_rows, list(arg_vars(k)), fresh, eqs[0])
    _check_component_term(selector, ds, accepted, eqs[0])
    slots: list[Slot] = []
    for i in range(r):
        slots.append(_merge_slot(program, ds, f, k, i, scc, target_index,
                                 accepted, eqs,
                                 [e.rhs.args[i] for e in eqs]))
    return SchemaFun(f, k, tuple(slots), selector=Component(k, selector))


# -- compilation --------------------------------------------------------------

def cocase_name(m: int) -> str:
    return f"cocase{m}"


def compile_schema(item: CorecBundle | CorecSchema | CompositionDef,
                   ds: DataSystem, principal: str | None = None) -> Program:
    """Emit the equational program of a schema (or a whole stratified
    bundle).  Recursive functions come out in constructor-producing form,
    so the result is directly evaluable; the compiled program validates and
    the recognizer re-extracts an equal schema."""
    if isinstance(item, CorecBundle):
        strata = item.strata
        principal = principal or item.principal
    else:
        strata = (item,)
    eqs: list[Equation] = []
    names: list[str] = []
    cocases: set[int] = set()
    for s in strata:
        if isinstance(s, CorecSchema):
            for fdef in s.functions:
                if fdef.selector is not None:
                    cocases.add(len(fdef.slots))
    # output-dispatch helpers come first: later definitions may only use
    # earlier ones
    for m in sorted(cocases):
        vs = tuple(Var(f"v{i + 1}") for i in range(m))
        for c in ds.vocabulary:
            if c.arity > m:
                continue
            ys = tuple(Var(f"y{i + 1}") for i in range(c.arity))
            eqs.append(Equation(cocase_name(m), (Con(c.name, ys),) + vs,
                                Con(c.name, vs[:c.arity])))
    for s in strata:
        if isinstance(s, CompositionDef):
            names.append(s.name)
            eqs.append(Equation(s.name, arg_vars(s.arity), s.component.term))
            continue
        vector = s.names()
        names.extend(vector)
        for fdef in s.functions:
            xs = arg_vars(fdef.arity)

            def slot_term(slot: Slot) -> Term:
                if isinstance(slot, PlainSlot):
                    return slot.component.apply(xs)
                callee = vector[slot.target - 1]
                return Fun(callee, tuple(a.apply(xs) for a in slot.args))

            slot_terms = tuple(slot_term(sl) for sl in fdef.slots)
            if fdef.selector is None:
                eqs.append(Equation(fdef.name, xs, Con(fdef.produced, slot_terms)))
            else:
                m = len(fdef.slots)
                eqs.append(Equation(
                    fdef.name, xs,
                    Fun(cocase_name(m), (fdef.selector.apply(xs),) + slot_terms)))
    if principal is None:
        principal = names[-1]
    return assemble_program(ds, eqs, principal)


def schema_equal(a: CorecSchema, b: CorecSchema) -> bool:
    """Structural equality up to renaming of the vector functions."""
    if len(a.functions) != len(b.functions):
        return False
    for fa, fb in zip(a.functions, b.functions):
        if (fa.arity, fa.produced, len(fa.slots)) != (fb.arity, fb.produced, len(fb.slots)):
            return False
        if (fa.selector is None) != (fb.selector is None):
            return False
        if fa.selector is not None and fa.selector != fb.selector:
            return False
        for sa, sb in zip(fa.slots, fb.slots):
            if type(sa) is not type(sb):
                return False
            if isinstance(sa, PlainSlot):
                if sa.component != sb.component:
                    return False
            else:
                if (sa.target, sa.args) != (sb.target, sb.args):
                    return False
    return True


def bundle_equal(a: CorecBundle, b: CorecBundle) -> bool:
    if len(a.strata) != len(b.strata):
        return False
    for sa, sb in zip(a.strata, b.strata):
        if isinstance(sa, CompositionDef):
            if not isinstance(sb, CompositionDef):
                return False
            if (sa.name, sa.arity, sa.component) != (sb.name, sb.arity, sb.component):
                return False
        else:
            if not isinstance(sb, CorecSchema) or not schema_equal(sa, sb):
                return False
    return True


# -- stock corpus -------------------------------------------------------------

@dataclass(frozen=True)
class StockEntry:
    name: str
    program: Program
    arity: int
    description: str


def _sm() -> DataSystem:
    from .system import boolean_stream_system
    return boolean_stream_system()


def stock_library() -> dict[str, StockEntry]:
    """Named corecursive programs over boolean streams; every entry passes
    the recognizer."""
    ds = _sm()
    x, y, w = Var("x"), Var("y"), Var("w")
    zero, one = Con("0"), Con("1")

    def c(h: Term, t: Term) -> Term:
        return Con("cons", (h, t))

    def p1(t: Term) -> Term:
        return Fun("pi1", (t,))

    def p2(t: Term) -> Term:
        return Fun("pi2", (t,))

    even_eq = Equation("even", (x,), c(p1(x), Fun("even", (p2(p2(x)),))))
    notf_eq = Equation("notf", (x,), Fun(DELTA, (x, one, zero, zero)))
    entries = [
        StockEntry("ident", assemble_program(ds, [
            Equation("ident", (x,), c(p1(x), Fun("ident", (p2(x),)))),
        ], "ident"), 1, "identity corecursion"),
        StockEntry("even", assemble_program(ds, [even_eq], "even"), 1,
                   "even-positioned elements"),
        StockEntry("odd", assemble_program(ds, [
            even_eq,
            Equation("odd", (x,), Fun("even", (p2(x),))),
        ], "odd"), 1, "odd-positioned elements (even after tail)"),
        StockEntry("flip", assemble_program(ds, [
            Equation("flip", (c(zero, w),), c(one, Fun("flip", (w,)))),
            Equation("flip", (c(one, w),), c(zero, Fun("flip", (w,)))),
        ], "flip"), 1, "bitwise complement, by cases"),
        StockEntry("merge", assemble_program(ds, [
            Equation("merge", (x, y), c(p1(x), Fun("merge", (y, p2(x))))),
        ], "merge"), 2, "interleave two streams"),
        StockEntry("zeros", assemble_program(ds, [
            Equation("zeros", (), c(zero, Fun("zeros"))),
        ], "zeros"), 0, "constant 0 stream"),
        StockEntry("ones", assemble_program(ds, [
            Equation("ones", (), c(one, Fun("ones"))),
        ], "ones"), 0, "constant 1 stream"),
        StockEntry("zipxor", assemble_program(ds, [
            notf_eq,
            Equation("zipxor", (x, y),
                     c(Fun(DELTA, (p1(x), p1(y), Fun("notf", (p1(y),)), zero)),
                       Fun("zipxor", (p2(x), p2(y))))),
        ], "zipxor"), 2, "pointwise xor via discriminator dispatch"),
        StockEntry("alt", assemble_program(ds, [
            Equation("alt", (), c(zero, Fun("altb"))),
            Equation("altb", (), c(one, Fun("alt"))),
        ], "alt"), 0, "mutually corecursive alternating pair"),
    ]
    return {e.name: e for e in entries}


def morse_thue_program() -> Program:
    """x = 1 : merge(x, not x) — cumulative corecursion, not accepted."""
    ds = _sm()
    x, y = Var("x"), Var("y")
    return assemble_program(ds, [
        Equation("notf", (x,), Fun(DELTA, (x, Con("1"), Con("0"), Con("0")))),
        Equation("merge", (x, y), Con("cons", (Fun("pi1", (x,)),
                                               Fun("merge", (y, Fun("pi2", (x,))))))),
        Equation("mt", (), Con("cons", (Con("1"),
                                        Fun("merge", (Fun("mt"),
                                                      Fun("notf", (Fun("mt"),))))))),
    ], "mt")
