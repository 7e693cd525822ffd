"""Rewrite kernel: interned terms and budgeted head-normalization.

This module is deliberately written in a flat, allocation-light style
(ints, tuples, dicts, no dataclasses) so the same source compiles under
Cython in pure-Python mode; `coeq.kernel` selects the compiled build when
one is importable and this interpreter otherwise.

Terms are hash-consed into integer ids, so equality is `==` on ints and
memo tables are cheap.  Rewriting is leftmost-outermost: an equation is
tried by demanding head constructors only at its constructor-pattern
positions, and match failure is detected from already-forced information
before any further forcing happens.
"""
try:
    import cython
    COMPILED = cython.compiled
except ImportError:  # plain interpreter, no cython installed
    COMPILED = False

# term kinds
VAR = 0
CON = 1
FUN = 2

# head_normalize statuses
WHNF = 0
STALL_NOMATCH = 1
STALL_BUDGET = 2

# per-equation match outcomes
_M_MATCH = 0
_M_FAIL = 1
_M_NEEDS = 2
_M_STUCK = 3


class KernelSession:
    """One arena of interned symbols/terms plus rules, env bindings and
    the WHNF memo.  Single-threaded by design."""

    def __init__(self):
        self.sym_ids = {}       # name -> sid
        self.sym_names = []     # sid -> name
        self.sym_kinds = []     # sid -> VAR/CON/FUN
        self.sym_arities = []   # sid -> arity
        self.intern = {}        # (kind, sid, args) -> tid
        self.t_kind = []        # tid -> kind
        self.t_sym = []         # tid -> sid
        self.t_args = []        # tid -> tuple of tids
        self.rules = {}         # fn sid -> list of (pattern tid tuple, rhs tid)
        self.env = {}           # env fn sid -> unfold tid
        self.memo = {}          # tid -> whnf tid (successes)
        self.nomatch = {}       # tid -> stuck tid (definitive no-match stalls)
        self.steps_total = 0

    # -- symbols ----------------------------------------------------------

    def sym(self, name, kind, arity):
        sid = self.sym_ids.get(name, -1)
        if sid >= 0:
            if self.sym_kinds[sid] != kind or self.sym_arities[sid] != arity:
                raise ValueError(
                    "symbol %r redeclared with different kind/arity" % name)
            return sid
        sid = len(self.sym_names)
        self.sym_ids[name] = sid
        self.sym_names.append(name)
        self.sym_kinds.append(kind)
        self.sym_arities.append(arity)
        return sid

    # -- term interning ---------------------------------------------------

    def mk(self, kind, sid, args):
        key = (kind, sid, args)
        tid = self.intern.get(key, -1)
        if tid >= 0:
            return tid
        tid = len(self.t_kind)
        self.intern[key] = tid
        self.t_kind.append(kind)
        self.t_sym.append(sid)
        self.t_args.append(args)
        return tid

    def var(self, name):
        return self.mk(VAR, self.sym(name, VAR, 0), ())

    # -- rules and environment -------------------------------------------

    def add_rule(self, fn_sid, pattern_tids, rhs_tid):
        self.rules.setdefault(fn_sid, []).append((pattern_tids, rhs_tid))

    def set_env(self, env_sid, unfold_tid):
        self.env[env_sid] = unfold_tid

    # -- substitution on interned terms ------------------------------------

    def subst(self, tid, binds):
        k = self.t_kind[tid]
        if k == VAR:
            return binds.get(tid, tid)
        args = self.t_args[tid]
        if not args:
            return tid
        new_args = tuple(self.subst(a, binds) for a in args)
        if new_args == args:
            return tid
        return self.mk(k, self.t_sym[tid], new_args)

    # -- matching ----------------------------------------------------------

    def _match_eq(self, pats, args, binds):
        """Try one equation against argument tids.

        Returns (_M_MATCH, 0) with `binds` filled, (_M_FAIL, 0),
        (_M_NEEDS, child_tid) for the leftmost unforced demanded position,
        or (_M_STUCK, 0) when a demanded position is irreducible.
        Failure wins over stuck/needs: a definitive mismatch anywhere kills
        the equation without forcing anything else.
        """
        needs = -1
        stuck = False
        stack = [(pats[i], args[i]) for i in range(len(pats) - 1, -1, -1)]
        while stack:
            pat, sub = stack.pop()
            pk = self.t_kind[pat]
            if pk == VAR:
                binds[pat] = sub
                continue
            # constructor pattern: need subject's head
            head = sub
            while True:
                hk = self.t_kind[head]
                if hk == CON:
                    break
                if hk == VAR:
                    stuck = True
                    head = -1
                    break
                nxt = self.memo.get(head, -1)
                if nxt < 0:
                    if head in self.nomatch:
                        stuck = True
                        head = -1
                    elif needs < 0:
                        needs = head
                    head = -2 if head >= 0 else head
                    break
                head = nxt
            if head == -1:
                continue  # irreducible here; other positions may still fail
            if head == -2:
                continue  # unforced; recorded in `needs`
            if self.t_sym[head] != self.t_sym[pat]:
                return (_M_FAIL, 0)
            pargs = self.t_args[pat]
            hargs = self.t_args[head]
            for i in range(len(pargs) - 1, -1, -1):
                stack.append((pargs[i], hargs[i]))
        if needs >= 0:
            return (_M_NEEDS, needs)
        if stuck:
            return (_M_STUCK, 0)
        return (_M_MATCH, 0)

    def _try_step(self, tid):
        """One unit of progress on tid.

        Returns (tag, payload): tag 'w' WHNF, 'r' rewritten (payload new
        tid), 'n' needs child forced (payload child tid), 's' definitive
        no-match stall.
        """
        k = self.t_kind[tid]
        if k == CON:
            return ("w", tid)
        if k == VAR:
            return ("s", tid)
        sid = self.t_sym[tid]
        unfold = self.env.get(sid, -1)
        if unfold >= 0:
            return ("r", unfold)
        eqs = self.rules.get(sid)
        if not eqs:
            return ("s", tid)
        args = self.t_args[tid]
        needs = -1
        for pats_rhs in eqs:
            binds = {}
            outcome, payload = self._match_eq(pats_rhs[0], args, binds)
            if outcome == _M_MATCH:
                return ("r", self.subst(pats_rhs[1], binds))
            if outcome == _M_NEEDS and needs < 0:
                needs = payload
        if needs >= 0:
            return ("n", needs)
        return ("s", tid)

    # -- head normalization -------------------------------------------------

    def head_normalize(self, tid, budget):
        """Reduce tid to a constructor-headed form.

        Returns (status, tid, steps_used): on WHNF the tid of the
        constructor form; on STALL_NOMATCH the irreducible form reached;
        on STALL_BUDGET the current form when the budget ran out.

        One step is one equation application or one environment unfold.
        Forcing of subterms demanded by pattern matching shares the same
        budget.  Successful head-normalizations and definitive no-match
        stalls are memoized for the life of the session.
        """
        steps = 0
        stack = [tid]
        chains = [[tid]]
        root_current = tid
        while True:
            cur = stack[len(stack) - 1]
            done = self.memo.get(cur, -1)
            if done >= 0:
                tag = "w"
                payload = done
            elif cur in self.nomatch:
                tag = "s"
                payload = self.nomatch[cur]
            else:
                tag, payload = self._try_step(cur)
            if tag == "r":
                if steps >= budget:
                    self.steps_total += steps
                    return (STALL_BUDGET, root_current, steps)
                steps += 1
                stack[len(stack) - 1] = payload
                chains[len(chains) - 1].append(payload)
                if len(stack) == 1:
                    root_current = payload
            elif tag == "w":
                for t in chains[len(chains) - 1]:
                    self.memo[t] = payload
                stack.pop()
                chains.pop()
                if not stack:
                    self.steps_total += steps
                    return (WHNF, payload, steps)
            elif tag == "n":
                stack.append(payload)
                chains.append([payload])
            else:  # definitive no-match stall of `cur`
                for t in chains[len(chains) - 1]:
                    self.nomatch[t] = payload
                if len(stack) == 1:
                    self.steps_total += steps
                    return (STALL_NOMATCH, root_current, steps)
                stack.pop()
                chains.pop()
