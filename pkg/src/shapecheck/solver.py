"""Entailment of the constraint queue.

The queue holds atomic constraints as engine terms. One constraint at a
time is picked by weight, dispatched to its kind-specific solver, and any
constraints it spawns (instantiated arrow obligations, pattern
sub-constraints, deferred residuals) are appended; the run succeeds when
the queue is empty. All forking happens inside the relational engine, so
each search branch carries its own queue.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .engine import (
    Compound,
    Var,
    Wildcard,
    conj,
    delay,
    disj,
    disunify,
    fail,
    fresh_many,
    fresh_with,
    is_not_var,
    is_var,
    reify_term,
    shallow_walk,
    succeed,
    unify,
)
from .types import (
    LNIL,
    T_INT,
    T_STR,
    TagTable,
    _walk_list,
    apply_type_subst,
    c_match,
    c_sexp,
    eq_t,
    eq_ts,
    lcons,
    llist,
    p_shape,
    t_array,
    t_arrow,
    t_ctor,
    t_sexp,
    unmu,
)


@dataclass
class SolverOpts:
    table: TagTable
    prune: bool = True
    max_ctors: int | None = None  # overrides the interned constructor count

    @property
    def sexp_bound(self) -> int:
        if self.max_ctors is not None:
            return self.max_ctors
        return self.table.sexp_max_length


# ---------------------------------------------------------------------------
# Scheduling.
# ---------------------------------------------------------------------------

_W_EQ = 0
_W_SEXP_GROUND = 1
_W_IND_GROUND = 2
_W_CALL_GROUND = 3
_W_SEXP_FREE = 4
_W_IND_FREE = 5
_W_MATCH = 6
_W_CALL_FREE = 7


def _is_free(t, subst) -> bool:
    return isinstance(shallow_walk(t, subst), (Var, Wildcard))


def constraint_weight(c, state):
    """Weight of a constraint in the current state; None marks a residual
    that cannot make progress yet (a boxedness check on a still-free
    subject) and must not be picked."""
    w = shallow_walk(c, state.subst)
    if isinstance(w, (Var, Wildcard)):
        return None
    if w.tag == "Eq":
        return _W_EQ
    if w.tag == "SexpC":
        return _W_SEXP_GROUND if not _is_free(w.args[1], state.subst) else _W_SEXP_FREE
    if w.tag == "Ind":
        return _W_IND_GROUND if not _is_free(w.args[0], state.subst) else _W_IND_FREE
    if w.tag == "Call":
        return _W_CALL_GROUND if not _is_free(w.args[0], state.subst) else _W_CALL_FREE
    if w.tag == "Match":
        if _is_free(w.args[0], state.subst):
            pats = _walk_list(w.args[1], state.subst)
            if pats:
                walked = [shallow_walk(p, state.subst) for p in pats]
                if all(
                    isinstance(p, Compound) and p.tag == "PShape" and p.args[0] == "box"
                    for p in walked
                ):
                    return None
        return _W_MATCH
    raise ValueError(f"not a constraint: {w!r}")


def pick_next(queue, state):
    """Index of the minimal-weight pickable constraint (ties broken by
    queue position); None when every remaining constraint is residual."""
    best = None
    best_w = None
    for i, c in enumerate(queue):
        w = constraint_weight(c, state)
        if w is None:
            continue
        if best_w is None or w < best_w:
            best, best_w = i, w
            if w == 0:
                break
    return best


# ---------------------------------------------------------------------------
# The dispatch loop.
# ---------------------------------------------------------------------------


def entail_all(queue, opts: SolverOpts):
    """Succeed iff every constraint in the queue is entailed.

    The empty queue succeeds; otherwise one constraint is picked, solved,
    and the loop recurses on the remainder plus whatever it spawned. A
    nonempty queue of only unpickable residuals is stuck and fails.
    """
    queue = list(queue)

    def goal(state):
        if not queue:
            return succeed(state)
        idx = pick_next(queue, state)
        if idx is None:
            return None
        item = queue[idx]
        rest = queue[:idx] + queue[idx + 1 :]
        state.counters.dispatched += 1
        # Stored lazily (term + persistent substitution); reified only if
        # the failure report needs it.
        state.counters.last_constraint = (item, state.subst)

        def kont(spawned):
            return delay(lambda: entail_all(rest + list(spawned), opts))

        w = shallow_walk(item, state.subst)
        if w.tag == "Eq":
            return conj(eq_t(w.args[0], w.args[1]), kont([]))(state)
        if w.tag == "Ind":
            return solve_ind(w.args[0], w.args[1], opts, kont)(state)
        if w.tag == "Call":
            args = _walk_list(w.args[1], state.subst)
            if args is None:
                return None
            return solve_call(w.args[0], args, w.args[2], opts, kont)(state)
        if w.tag == "SexpC":
            args = _walk_list(w.args[2], state.subst)
            if args is None:
                return None
            return solve_sexp(w.args[0], w.args[1], args, opts, kont)(state)
        if w.tag == "Match":
            return solve_match(w.args[0], w.args[1], opts, kont)(state)
        return None

    return goal


# ---------------------------------------------------------------------------
# Ind: indexing into strings, arrays and S-expressions.
# ---------------------------------------------------------------------------


def solve_ind(container, elem, opts: SolverOpts, kont):
    table = opts.table

    def dispatch(u):
        def goal(state):
            w = shallow_walk(u, state.subst)
            if isinstance(w, (Var, Wildcard)):
                branches = [
                    conj(unify(w, T_STR), eq_t(elem, T_INT)),
                    fresh_with(lambda t: conj(unify(w, t_array(t)), eq_t(elem, t))),
                ]
                for length in range(1, opts.sexp_bound + 1):
                    for combo in combinations(table.all_ids(), length):
                        branches.append(delay(lambda c=combo: _ind_sexp_branch(w, elem, c, table)))
                return disj(*branches)(state)
            if w.tag == "TStr":
                return eq_t(elem, T_INT)(state)
            if w.tag == "TArray":
                return eq_t(elem, w.args[0])(state)
            if w.tag == "TSexp":
                goals = []
                entries = w.args[0]
                entries = shallow_walk(entries, state.subst)
                while isinstance(entries, Compound) and entries.tag == "lcons":
                    cell = shallow_walk(entries.args[0], state.subst)
                    if isinstance(cell, Compound) and cell.tag == "ctor":
                        args = _walk_list(cell.args[1], state.subst)
                        if args is not None:
                            goals.extend(eq_t(a, elem) for a in args)
                    entries = shallow_walk(entries.args[1], state.subst)
                return conj(*goals)(state) if goals else succeed(state)
            return None

        return goal

    return fresh_with(lambda u: conj(unmu(container, u), dispatch(u), kont([])))


def _ind_sexp_branch(w, elem, tag_ids, table: TagTable):
    """w becomes an S-expression type listing exactly these tags (in id
    order), every argument position equal to the element type."""

    def build(tid_list, cells):
        if not tid_list:
            ctors = llist(cells)
            return unify(w, t_sexp(ctors))
        tid = tid_list[0]
        arity = table.arity(tid)
        return fresh_many(
            arity,
            lambda vs: conj(
                *[eq_t(v, elem) for v in vs],
                build(tid_list[1:], cells + [t_ctor(tid, llist(vs))]),
            ),
        )

    return build(list(tag_ids), [])


# ---------------------------------------------------------------------------
# Call: function application.
# ---------------------------------------------------------------------------


def solve_call(fn, args, result, opts: SolverOpts, kont):
    nargs = len(args)

    def with_arrow(u, fxs, fc, ps, r):
        def instantiate(state):
            st = state
            names = _walk_list(fxs, st.subst) or []
            mapping = {}
            for name in names:
                name = shallow_walk(name, st.subst)
                if isinstance(name, str):
                    v, st = st.fresh_var()
                    mapping[name] = v
            spawned = [
                apply_type_subst(mapping, c, st.subst)
                for c in (_walk_list(fc, st.subst) or [])
            ]
            params = _walk_list(ps, st.subst) or []
            goals = [
                eq_t(apply_type_subst(mapping, p, st.subst), a)
                for p, a in zip(params, args)
            ]
            goals.append(eq_t(apply_type_subst(mapping, r, st.subst), result))
            goals.append(kont(spawned))
            return conj(*goals)(st)

        return conj(
            unmu(fn, u),
            unify(u, t_arrow(fxs, fc, ps, r)),
            fresh_many(nargs, lambda vs: unify(ps, llist(vs))),
            _force_empty(fxs, opts),
            _force_empty(fc, opts),
            instantiate,
        )

    return fresh_many(5, lambda vs: with_arrow(*vs))


def _force_empty(lst, opts: SolverOpts):
    """A free binder/constraint list of an applied function is forced
    empty; a determined one is kept. Without pruning a free list is
    enumerated instead (empty first, then ever longer)."""
    if opts.prune:
        return disj(conj(is_var(lst), unify(lst, LNIL)), is_not_var(lst))

    def gen(v):
        return disj(
            unify(v, LNIL),
            delay(
                lambda: fresh_with(
                    lambda h: fresh_with(lambda t: conj(unify(v, lcons(h, t)), gen(t)))
                )
            ),
        )

    return disj(conj(is_var(lst), gen(lst)), is_not_var(lst))


# ---------------------------------------------------------------------------
# Sexp: exactly-one-constructor membership with bounded lists.
# ---------------------------------------------------------------------------


def solve_sexp(tag, subject, args, opts: SolverOpts, kont):
    max_len = opts.sexp_bound
    want_args = llist(args)

    def check_n(n):
        # The length bound is part of the pruning; without it candidate
        # constructor lists grow without limit (lazily).
        if not opts.prune:
            return succeed
        return succeed if n <= max_len else fail

    def not_in_tail(n, xs):
        # xs must not contain the tag; the disequality is a pure tag test,
        # so generated cells keep a free argument-list variable that later
        # constraints can still fill in.
        def cell():
            return fresh_with(
                lambda tv: fresh_with(
                    lambda cargs: fresh_with(
                        lambda rest: conj(
                            unify(xs, lcons(t_ctor(tv, cargs), rest)),
                            disunify(tag, tv),
                            not_in_tail(n + 1, rest),
                        )
                    )
                )
            )

        return conj(check_n(n), disj(unify(xs, LNIL), delay(cell)))

    def hlp(n, xs):
        # xs contains exactly one entry with this tag, matching args; any
        # entry scanned past must already have a determined, distinct tag.
        def cell():
            return fresh_with(
                lambda tv: fresh_with(
                    lambda tsv: fresh_with(
                        lambda rest: conj(
                            unify(xs, lcons(t_ctor(tv, tsv), rest)),
                            disj(
                                conj(
                                    unify(tag, tv),
                                    eq_ts(want_args, tsv),
                                    not_in_tail(n + 1, rest),
                                ),
                                conj(
                                    is_not_var(tv),
                                    disunify(tag, tv),
                                    hlp(n + 1, rest),
                                ),
                            ),
                        )
                    )
                )
            )

        return conj(check_n(n), delay(cell))

    return fresh_with(
        lambda u: fresh_with(
            lambda cl: conj(
                unmu(subject, u),
                unify(u, t_sexp(cl)),
                hlp(0, cl),
                kont([]),
            )
        )
    )


# ---------------------------------------------------------------------------
# Match: pattern shapes as lower bounds on the subject.
# ---------------------------------------------------------------------------


def solve_match(subject, pats, opts: SolverOpts, kont):
    def process(u):
        def goal(state):
            st = state
            goals = []
            spawned = []

            def fv():
                nonlocal st
                v, st2 = st.fresh_var()
                st = st2
                return v

            def handle(p, subj):
                p = shallow_walk(p, st.subst)
                if p.tag == "PWild":
                    return
                if p.tag == "PAt":
                    goals.append(eq_t(p.args[0], subj))
                    handle(p.args[1], subj)
                    return
                if p.tag == "PArray":
                    e = fv()
                    goals.append(eq_t(subj, t_array(e)))
                    for q in _walk_list(p.args[0], st.subst) or []:
                        handle(q, e)
                    return
                if p.tag == "PSexp":
                    qs = _walk_list(p.args[1], st.subst) or []
                    ts = [fv() for _ in qs]
                    spawned.append(c_sexp(p.args[0], subj, llist(ts)))
                    for q, t in zip(qs, ts):
                        handle(q, t)
                    return
                if p.tag == "PShape":
                    kind = p.args[0]
                    if kind == "unbox":
                        goals.append(eq_t(subj, T_INT))
                    elif kind == "str":
                        goals.append(eq_t(subj, T_STR))
                    elif kind == "array":
                        goals.append(eq_t(subj, t_array(fv())))
                    elif kind == "sexp":
                        goals.append(eq_t(subj, t_sexp(fv())))
                    elif kind == "fun":
                        fxs, fc, ps, r = fv(), fv(), fv(), fv()
                        goals.append(eq_t(subj, t_arrow(fxs, fc, ps, r)))
                        goals.append(_force_empty(fxs, opts))
                        goals.append(_force_empty(fc, opts))
                    elif kind == "box":
                        w = shallow_walk(subj, st.subst)
                        if isinstance(w, (Var, Wildcard)):
                            # Cannot decide boxedness yet: leave a residual
                            # that reschedules once the subject determines.
                            spawned.append(c_match(subj, llist([p_shape("box")])))
                        else:
                            goals.append(disunify(subj, T_INT))
                    return
                raise ValueError(f"not a pattern: {p!r}")

            for p in _walk_list(pats, st.subst) or []:
                handle(p, u)
            goals.append(kont(spawned))
            return conj(*goals)(st)

        return goal

    return fresh_with(lambda u: conj(unmu(subject, u), process(u)))
