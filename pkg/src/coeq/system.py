"""Data systems: constructor vocabularies, inductive/coinductive predicates,
typing of constructors, and depth-bounded membership in the canonical model.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .terms import Con, Fun, Term, Var


class Kind(enum.Enum):
    INDUCTIVE = "inductive"
    COINDUCTIVE = "coinductive"


@dataclass(frozen=True, slots=True)
class Constructor:
    name: str
    arity: int


@dataclass(frozen=True, slots=True)
class DataPredicate:
    name: str
    kind: Kind
    index: int

    @property
    def inductive(self) -> bool:
        return self.kind is Kind.INDUCTIVE


@dataclass(frozen=True, slots=True)
class ConstructorType:
    """A functional type c : E_1 x ... x E_r -> E_0 for a constructor."""
    constructor: Constructor
    argument_predicates: tuple[DataPredicate, ...]
    result_predicate: DataPredicate

    def __str__(self) -> str:
        if not self.argument_predicates:
            return f"{self.constructor.name} : {self.result_predicate.name}"
        args = " * ".join(p.name for p in self.argument_predicates)
        return f"{self.constructor.name} : {args} -> {self.result_predicate.name}"


@dataclass(frozen=True)
class DataSystem:
    vocabulary: tuple[Constructor, ...]
    predicates: tuple[DataPredicate, ...]
    types: tuple[ConstructorType, ...]

    def constructor(self, name: str) -> Constructor | None:
        for c in self.vocabulary:
            if c.name == name:
                return c
        return None

    def predicate(self, name: str) -> DataPredicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def types_of(self, constructor_name: str) -> list[ConstructorType]:
        return [t for t in self.types if t.constructor.name == constructor_name]

    def types_for_result(self, pred: DataPredicate) -> list[ConstructorType]:
        return [t for t in self.types if t.result_predicate == pred]

    def constructors_of(self, pred: DataPredicate) -> list[Constructor]:
        """The associated constructor set C_n of a predicate, from the types."""
        seen: list[Constructor] = []
        for t in self.types_for_result(pred):
            if t.constructor not in seen:
                seen.append(t.constructor)
        return seen

    @property
    def max_arity(self) -> int:
        return max((c.arity for c in self.vocabulary), default=0)


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def validate_system(ds: DataSystem) -> ValidationReport:
    """Check all structural invariants of a data system.

    Violations are data, not exceptions: every offending type or predicate
    is named in the report.
    """
    out: list[Violation] = []
    names = [c.name for c in ds.vocabulary]
    for n in sorted({n for n in names if names.count(n) > 1}):
        out.append(Violation("dup-constructor", f"constructor '{n}' declared more than once"))
    pnames = [p.name for p in ds.predicates]
    for n in sorted({n for n in pnames if pnames.count(n) > 1}):
        out.append(Violation("dup-predicate", f"predicate '{n}' declared more than once"))
    indices = sorted(p.index for p in ds.predicates)
    if indices != list(range(len(ds.predicates))):
        out.append(Violation("bad-indices", f"predicate indices {indices} are not contiguous 0..{len(ds.predicates) - 1}"))
    for t in ds.types:
        if ds.constructor(t.constructor.name) != t.constructor:
            out.append(Violation("unknown-constructor", f"type '{t}' uses a constructor not in the vocabulary"))
        if len(t.argument_predicates) != t.constructor.arity:
            out.append(Violation(
                "arity-mismatch",
                f"type '{t}' has {len(t.argument_predicates)} argument predicates "
                f"but {t.constructor.name} has arity {t.constructor.arity}"))
        for p in t.argument_predicates + (t.result_predicate,):
            if ds.predicate(p.name) != p:
                out.append(Violation("unknown-predicate", f"type '{t}' mentions undeclared predicate '{p.name}'"))
        for p in t.argument_predicates:
            if p.index > t.result_predicate.index:
                out.append(Violation(
                    "argument-after-result",
                    f"type '{t}': argument predicate {p.name} comes after result {t.result_predicate.name}"))
    return ValidationReport(tuple(out))


class UnknownIdentifierError(Exception):
    pass


def syntactic_class(t: Term, ds: DataSystem) -> str:
    """Smallest of the classes 'data' < 'base' < 'program' containing t."""
    cls = "data"
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Con):
            c = ds.constructor(u.name)
            if c is None:
                raise UnknownIdentifierError(f"unknown constructor '{u.name}'")
            if c.arity != len(u.args):
                raise UnknownIdentifierError(
                    f"constructor '{u.name}' used with {len(u.args)} arguments, arity is {c.arity}")
        elif isinstance(u, Var):
            if cls == "data":
                cls = "base"
        elif isinstance(u, Fun):
            cls = "program"
        stack.extend(u.args)
    return cls


# ---------------------------------------------------------------------------
# Regular coterms: possibly-infinite constructor trees with finitely many
# distinct subtrees, as finite cyclic graphs.  A child may also be a named
# reference to another environment binding (resolved by the eval session).
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class CotermNode:
    constructor: str
    children: tuple[object, ...] = ()  # each child: int (node index) or str (binding ref)


@dataclass(frozen=True)
class RegularCoterm:
    nodes: tuple[CotermNode, ...]
    entry: int = 0

    def validate(self, ds: DataSystem) -> ValidationReport:
        out: list[Violation] = []
        for i, n in enumerate(self.nodes):
            c = ds.constructor(n.constructor)
            if c is None:
                out.append(Violation("unknown-constructor", f"node {i}: unknown constructor '{n.constructor}'"))
            elif c.arity != len(n.children):
                out.append(Violation(
                    "bad-out-degree",
                    f"node {i}: constructor '{n.constructor}' has arity {c.arity}, node has {len(n.children)} children"))
            for ch in n.children:
                if isinstance(ch, int) and not (0 <= ch < len(self.nodes)):
                    out.append(Violation("dangling-child", f"node {i}: child index {ch} out of range"))
        if not (0 <= self.entry < len(self.nodes)):
            out.append(Violation("bad-entry", f"entry {self.entry} out of range"))
        return ValidationReport(tuple(out))

    def is_cyclic_from(self, start: int | None = None) -> bool:
        start = self.entry if start is None else start
        state: dict[int, int] = {}  # 0 = on stack, 1 = done

        def visit(i: int) -> bool:
            if state.get(i) == 0:
                return True
            if state.get(i) == 1:
                return False
            state[i] = 0
            for ch in self.nodes[i].children:
                if isinstance(ch, int) and visit(ch):
                    return True
            state[i] = 1
            return False

        return visit(start)

    def unfold(self, depth: int, start: int | None = None) -> Term:
        """Finite approximation to the given depth; cut points become
        variables named '_cut' (only meaningful for inspection/tests)."""
        start = self.entry if start is None else start

        def go(i: int, d: int) -> Term:
            if d == 0:
                return Var("_cut")
            n = self.nodes[i]
            kids = []
            for ch in n.children:
                if isinstance(ch, int):
                    kids.append(go(ch, d - 1))
                else:
                    kids.append(Fun(str(ch)))
            return Con(n.constructor, tuple(kids))

        return go(start, depth)


def stream_coterm(bits: list[int], loop_to: int, cons: str = "cons",
                  names: tuple[str, str] = ("0", "1")) -> RegularCoterm:
    """Regular boolean stream: emits `bits`, then loops back to position
    `loop_to`.  Node layout: leaf nodes for the bit constants first, then
    one cons node per position."""
    nodes: list[CotermNode] = [CotermNode(names[0]), CotermNode(names[1])]
    base = 2
    k = len(bits)
    if not (0 <= loop_to < k):
        raise ValueError("loop_to out of range")
    for i, b in enumerate(bits):
        nxt = base + (i + 1 if i + 1 < k else loop_to)
        nodes.append(CotermNode(cons, (b, nxt)))
    return RegularCoterm(tuple(nodes), entry=base)


def random_stream_coterm(rng, max_nodes: int = 6, cons: str = "cons",
                         names: tuple[str, str] = ("0", "1")) -> RegularCoterm:
    """Seeded random regular boolean stream: a cyclic list of cons nodes."""
    n = rng.randint(1, max_nodes)
    bits = [rng.randint(0, 1) for _ in range(n)]
    return stream_coterm(bits, rng.randrange(n), cons, names)


def coterm_bits(ct: RegularCoterm, n: int) -> list[int]:
    """First n head-bits of a boolean-stream coterm (positional oracle).

    Only follows integer children; raises on cross-binding references.
    """
    out: list[int] = []
    i = ct.entry
    for _ in range(n):
        node = ct.nodes[i]
        head, tail = node.children
        if isinstance(head, str) or isinstance(tail, str):
            raise ValueError("coterm_bits needs a self-contained stream coterm")
        out.append(0 if ct.nodes[head].constructor == "0" else 1)
        i = tail
    return out


_YES = "yes"
_NO = "no"
_YES_UPTO = "yes-up-to-depth"
_RANK = {_NO: 0, _YES_UPTO: 1, _YES: 2}


def canonical_member(ds: DataSystem, pred: DataPredicate, v: RegularCoterm,
                     depth: int) -> str:
    """Membership of a regular coterm in the canonical model of a predicate.

    Inductive predicates are decided exactly on well-founded spines (cycles
    through inductive positions mean 'no'); coinductive predicates check the
    constructor/typing discipline along every path down to `depth` and answer
    at best 'yes-up-to-depth'.
    """
    # key: (node index, predicate name); value on stack marker for the
    # least-fixpoint reading of inductive recursion.
    on_stack: set[tuple[int, str]] = set()

    def best(a: str, b: str) -> str:
        return a if _RANK[a] >= _RANK[b] else b

    def worst(a: str, b: str) -> str:
        return a if _RANK[a] <= _RANK[b] else b

    def check(i: object, p: DataPredicate, d: int) -> str:
        if isinstance(i, str):
            # Cross-binding reference: not resolvable here; treat as an
            # unverified leaf (membership only up to this point).
            return _YES_UPTO
        assert isinstance(i, int)
        if p.inductive:
            if (i, p.name) in on_stack:
                return _NO  # infinite descent through an inductive position
        else:
            if d <= 0:
                return _YES_UPTO
        node = v.nodes[i]
        types = [t for t in ds.types_of(node.constructor) if t.result_predicate == p]
        if not types:
            return _NO
        result = _NO
        key = (i, p.name)
        if p.inductive:
            on_stack.add(key)
        try:
            for t in types:
                acc = _YES
                for child, ep in zip(node.children, t.argument_predicates):
                    nd = d - 1 if not p.inductive else d
                    acc = worst(acc, check(child, ep, nd))
                    if acc == _NO:
                        break
                if not p.inductive and acc == _YES:
                    # Coinductive membership is never certified outright.
                    acc = _YES_UPTO
                result = best(result, acc)
                if result == _YES:
                    break
        finally:
            if p.inductive:
                on_stack.discard(key)
        return result

    return check(v.entry, pred, depth)


# ---------------------------------------------------------------------------
# The running example systems.
# ---------------------------------------------------------------------------

def boolean_stream_system() -> DataSystem:
    """Booleans (inductive, from 0 and 1) plus streams of booleans
    (coinductive, cons : B * S -> S)."""
    zero = Constructor("0", 0)
    one = Constructor("1", 0)
    cons = Constructor("cons", 2)
    b = DataPredicate("B", Kind.INDUCTIVE, 0)
    s = DataPredicate("S", Kind.COINDUCTIVE, 1)
    return DataSystem(
        vocabulary=(zero, one, cons),
        predicates=(b, s),
        types=(
            ConstructorType(zero, (), b),
            ConstructorType(one, (), b),
            ConstructorType(cons, (b, s), s),
        ),
    )


def mixed_example_system() -> DataSystem:
    """Booleans, naturals, infinite s/t-words, streams of naturals, and
    lists of such streams (constructors reused across predicates)."""
    zero = Constructor("0", 0)
    one = Constructor("1", 0)
    nil = Constructor("[]", 0)
    s = Constructor("s", 1)
    t = Constructor("t", 1)
    c = Constructor("c", 2)
    b = DataPredicate("B", Kind.INDUCTIVE, 0)
    n = DataPredicate("N", Kind.INDUCTIVE, 1)
    j = DataPredicate("J", Kind.COINDUCTIVE, 2)
    st = DataPredicate("S", Kind.COINDUCTIVE, 3)
    li = DataPredicate("L", Kind.INDUCTIVE, 4)
    return DataSystem(
        vocabulary=(zero, one, nil, s, t, c),
        predicates=(b, n, j, st, li),
        types=(
            ConstructorType(zero, (), b),
            ConstructorType(zero, (), n),
            ConstructorType(one, (), b),
            ConstructorType(nil, (), li),
            ConstructorType(s, (n,), n),
            ConstructorType(s, (j,), j),
            ConstructorType(t, (j,), j),
            ConstructorType(c, (n, st), st),
            ConstructorType(c, (st, li), li),
        ),
    )
