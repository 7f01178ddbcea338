"""The type language as engine terms.

Types cover integers, strings, homogeneous arrays, S-expression unions,
quantified arrows carrying a constraint list, and equirecursive mu-types.
This module houses the engine-term encodings, tag interning, mu-unfolding,
the hook-aware equality relations, and the rendering / parsing of types.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import (
    Compound,
    FreeVar,
    Goal,
    Var,
    Wildcard,
    bind_occurs_hook,
    conj,
    delay,
    disj,
    disunify,
    fresh_with,
    shallow_walk,
    unify,
)

# ---------------------------------------------------------------------------
# Engine-term constructors.
# ---------------------------------------------------------------------------

T_INT = Compound("TInt", ())
T_STR = Compound("TStr", ())
LNIL = Compound("lnil", ())


def lcons(h, t):
    return Compound("lcons", (h, t))


def llist(items):
    out = LNIL
    for x in reversed(items):
        out = lcons(x, out)
    return out


def t_name(sym: str):
    return Compound("TName", (sym,))


def t_array(elem):
    return Compound("TArray", (elem,))


def t_ctor(tag, args):
    return Compound("ctor", (tag, args))


def t_sexp(ctors):
    return Compound("TSexp", (ctors,))


def t_arrow(bvars, bconstr, params, result):
    return Compound("TArrow", (bvars, bconstr, params, result))


def t_mu(binder, body):
    return Compound("TMu", (binder, body))


# Constraint terms.


def c_ind(container, elem):
    return Compound("Ind", (container, elem))


def c_call(fn, args, result):
    return Compound("Call", (fn, args, result))


def c_sexp(tag, subject, args):
    return Compound("SexpC", (tag, subject, args))


def c_match(subject, pats):
    return Compound("Match", (subject, pats))


def c_eq(a, b):
    return Compound("Eq", (a, b))


# Type-pattern terms.

P_WILD = Compound("PWild", ())


def p_at(ty, pat):
    return Compound("PAt", (ty, pat))


def p_array(pats):
    return Compound("PArray", (pats,))


def p_sexp(tag, pats):
    return Compound("PSexp", (tag, pats))


def p_shape(kind: str):
    return Compound("PShape", (kind,))


SHAPE_KINDS = ("box", "unbox", "str", "array", "sexp", "fun")


# ---------------------------------------------------------------------------
# Tag interning.
# ---------------------------------------------------------------------------


class TagTable:
    """Bijection between (label, arity) pairs and numeric tag ids.

    Also tracks the total number of distinct constructors (the bound on
    generated constructor-list lengths) and the maximal arity (the bound on
    generated argument lists).
    """

    def __init__(self):
        self._ids: dict[tuple[str, int], int] = {}
        self._info: list[tuple[str, int]] = []

    def intern(self, label: str, arity: int) -> int:
        key = (label, arity)
        tid = self._ids.get(key)
        if tid is None:
            tid = len(self._info)
            self._ids[key] = tid
            self._info.append(key)
        return tid

    def lookup(self, tid: int) -> tuple[str, int]:
        return self._info[tid]

    def label(self, tid: int) -> str:
        return self._info[tid][0]

    def arity(self, tid: int) -> int:
        return self._info[tid][1]

    def all_ids(self) -> list[int]:
        return list(range(len(self._info)))

    @property
    def sexp_max_length(self) -> int:
        return len(self._info)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self._info), default=0)


# ---------------------------------------------------------------------------
# Mu-unfolding and type substitution.
# ---------------------------------------------------------------------------


def apply_type_subst(mapping: dict, term, subst):
    """Capture-avoiding replacement of TName occurrences, deep-walking as
    it goes. Binders in TMu / TArrow shadow identically-named entries.
    """
    t = shallow_walk(term, subst)
    if isinstance(t, (Var, Wildcard)) or not isinstance(t, Compound):
        return t
    if t.tag == "TName":
        return mapping.get(t.args[0], t)
    if t.tag == "TMu":
        binder = shallow_walk(t.args[0], subst)
        inner = {k: v for k, v in mapping.items() if k != binder}
        if not inner:
            return t
        return t_mu(binder, apply_type_subst(inner, t.args[1], subst))
    if t.tag == "TArrow":
        bvars = _walk_list(t.args[0], subst)
        if bvars is not None:
            shadowed = {shallow_walk(b, subst) for b in bvars}
            inner = {k: v for k, v in mapping.items() if k not in shadowed}
        else:
            inner = mapping
        if not inner:
            return t
        args = tuple(apply_type_subst(inner, a, subst) for a in t.args)
        return Compound(t.tag, (t.args[0],) + args[1:])
    return Compound(t.tag, tuple(apply_type_subst(mapping, a, subst) for a in t.args))


def _walk_list(term, subst) -> Optional[list]:
    """Deep-walk an engine list spine; None if the spine is not ground."""
    out = []
    t = shallow_walk(term, subst)
    while isinstance(t, Compound) and t.tag == "lcons":
        out.append(t.args[0])
        t = shallow_walk(t.args[1], subst)
    if isinstance(t, Compound) and t.tag == "lnil":
        return out
    return None


def unfold_mu(t: Compound, subst):
    """One unfolding step: mu x. s  |->  s[x -> mu x. s]."""
    binder = shallow_walk(t.args[0], subst)
    return apply_type_subst({binder: t}, t.args[1], subst)


def unmu(t, out) -> Goal:
    """out is t with a single top-level mu unfolded, if there is one.

    A free variable is assumed not to stand for a recursive type.
    """

    def goal(state):
        w = shallow_walk(t, state.subst)
        if isinstance(w, (Var, Wildcard)):
            return unify(w, out)(state)
        if isinstance(w, Compound) and w.tag == "TMu":
            return unify(out, unfold_mu(w, state.subst))(state)
        return unify(w, out)(state)

    return goal


def subst_t(mapping: dict, t, out) -> Goal:
    """Relational wrapper over apply_type_subst."""

    def goal(state):
        return unify(out, apply_type_subst(mapping, t, state.subst))(state)

    return goal


# ---------------------------------------------------------------------------
# Occurs hooks for types.
# ---------------------------------------------------------------------------


def mu_binder_name(vid: int) -> str:
    return f"r{vid}"


def type_occurs_hook(vars_bag, vid: int, reified):
    """Replace the offending variable with a type name and wrap in a mu."""
    name = mu_binder_name(vid)

    def back(t):
        if isinstance(t, FreeVar):
            if t.var_id == vid:
                return t_name(name)
            return vars_bag.get(t.var_id)
        if isinstance(t, Compound):
            return Compound(t.tag, tuple(back(a) for a in t.args))
        return t

    return t_mu(name, back(reified))


def set_type_hook(t) -> Goal:
    return bind_occurs_hook(t, type_occurs_hook)


# ---------------------------------------------------------------------------
# Equality of types modulo mu-unfolding.
# ---------------------------------------------------------------------------


def eq_t(t, u) -> Goal:
    """Syntactic equality w.r.t. recursive type unfolding.

    When exactly one side is determined, an occurs hook is registered on
    the variable side immediately before unifying, so a cyclic equation
    resolves to a mu-type instead of failing.
    """

    def goal(state):
        a = shallow_walk(t, state.subst)
        b = shallow_walk(u, state.subst)
        a_var = isinstance(a, (Var, Wildcard))
        b_var = isinstance(b, (Var, Wildcard))
        if a_var and b_var:
            return unify(a, b)(state)
        if a_var:
            return conj(set_type_hook(a), unify(a, b))(state)
        if b_var:
            return conj(set_type_hook(b), unify(b, a))(state)
        a_mu = a.tag == "TMu"
        b_mu = b.tag == "TMu"
        if a_mu and b_mu:
            x1 = shallow_walk(a.args[0], state.subst)
            x2 = shallow_walk(b.args[0], state.subst)
            same = conj(unify(a.args[0], b.args[0]), delay(lambda: eq_t(a.args[1], b.args[1])))
            if x1 == x2 and not isinstance(x1, (Var, Wildcard)):
                return same(state)
            # Differing binders: both sides unfold (contractivity keeps
            # ground comparisons productive).
            both = delay(lambda: eq_t(unfold_mu(a, state.subst), unfold_mu(b, state.subst)))
            return disj(same, conj(disunify(a.args[0], b.args[0]), both))(state)
        if a_mu:
            return delay(lambda: eq_t(unfold_mu(a, state.subst), b))(state)
        if b_mu:
            return delay(lambda: eq_t(a, unfold_mu(b, state.subst)))(state)
        return _eq_structural(a, b)(state)

    return goal


def _eq_structural(a: Compound, b: Compound) -> Goal:
    if a.tag != b.tag:
        return lambda state: None
    if a.tag in ("TInt", "TStr"):
        return succeed_goal
    if a.tag == "TName":
        return unify(a, b)
    if a.tag == "TArray":
        return eq_t(a.args[0], b.args[0])
    if a.tag == "TSexp":
        return _eq_list(a.args[0], b.args[0], _eq_ctor)
    if a.tag == "TArrow":
        return conj(
            unify(a.args[0], b.args[0]),
            _eq_list(a.args[1], b.args[1], eq_constraint),
            eq_ts(a.args[2], b.args[2]),
            eq_t(a.args[3], b.args[3]),
        )
    return unify(a, b)


def succeed_goal(state):
    return (state, None)


def _eq_list(xs, ys, elem_eq) -> Goal:
    """Element-wise equality of engine lists, decomposing spines
    relationally so free spines are synthesized cell by cell. A
    non-list tail (e.g. a name standing for further union members)
    must match the other side's tail exactly."""

    def goal(state):
        a = shallow_walk(xs, state.subst)
        b = shallow_walk(ys, state.subst)
        if (isinstance(a, Compound) and a.tag not in ("lcons", "lnil")) or (
            isinstance(b, Compound) and b.tag not in ("lcons", "lnil")
        ):
            return unify(a, b)(state)
        return disj(conj(unify(a, LNIL), unify(b, LNIL)), delay(lambda: step(a, b)))(state)

    def step(a, b):
        return fresh_with(
            lambda hx: fresh_with(
                lambda tx: fresh_with(
                    lambda hy: fresh_with(
                        lambda ty: conj(
                            unify(a, lcons(hx, tx)),
                            unify(b, lcons(hy, ty)),
                            elem_eq(hx, hy),
                            _eq_list(tx, ty, elem_eq),
                        )
                    )
                )
            )
        )

    return goal


def _eq_ctor(c, d) -> Goal:
    return fresh_with(
        lambda xt: fresh_with(
            lambda xa: fresh_with(
                lambda yt: fresh_with(
                    lambda ya: conj(
                        unify(c, t_ctor(xt, xa)),
                        unify(d, t_ctor(yt, ya)),
                        unify(xt, yt),
                        eq_ts(xa, ya),
                    )
                )
            )
        )
    )


def eq_ts(ts, us) -> Goal:
    """eq_t mapped over equal-length type lists."""
    return _eq_list(ts, us, eq_t)


def eq_c(cs, ds) -> Goal:
    """eq over equal-length constraint lists."""
    return _eq_list(cs, ds, eq_constraint)


def eq_constraint(c, d) -> Goal:
    def goal(state):
        a = shallow_walk(c, state.subst)
        b = shallow_walk(d, state.subst)
        if isinstance(a, (Var, Wildcard)) or isinstance(b, (Var, Wildcard)):
            return unify(a, b)(state)
        if a.tag != b.tag:
            return None
        if a.tag == "Ind":
            return conj(eq_t(a.args[0], b.args[0]), eq_t(a.args[1], b.args[1]))(state)
        if a.tag == "Eq":
            return conj(eq_t(a.args[0], b.args[0]), eq_t(a.args[1], b.args[1]))(state)
        if a.tag == "Call":
            return conj(
                eq_t(a.args[0], b.args[0]),
                eq_ts(a.args[1], b.args[1]),
                eq_t(a.args[2], b.args[2]),
            )(state)
        if a.tag == "SexpC":
            return conj(
                unify(a.args[0], b.args[0]),
                eq_t(a.args[1], b.args[1]),
                eq_ts(a.args[2], b.args[2]),
            )(state)
        if a.tag == "Match":
            return conj(eq_t(a.args[0], b.args[0]), _eq_list(a.args[1], b.args[1], eq_pattern))(state)
        return unify(a, b)(state)

    return goal


def eq_pattern(p, q) -> Goal:
    def goal(state):
        a = shallow_walk(p, state.subst)
        b = shallow_walk(q, state.subst)
        if isinstance(a, (Var, Wildcard)) or isinstance(b, (Var, Wildcard)):
            return unify(a, b)(state)
        if a.tag != b.tag:
            return None
        if a.tag == "PWild" or a.tag == "PShape":
            return unify(a, b)(state)
        if a.tag == "PAt":
            return conj(eq_t(a.args[0], b.args[0]), eq_pattern(a.args[1], b.args[1]))(state)
        if a.tag == "PArray":
            return _eq_list(a.args[0], b.args[0], eq_pattern)(state)
        if a.tag == "PSexp":
            return conj(unify(a.args[0], b.args[0]), _eq_list(a.args[1], b.args[1], eq_pattern))(state)
        return unify(a, b)(state)

    return goal


# ---------------------------------------------------------------------------
# Python-level type syntax (used by the generator, renderer and parser).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TyVar:
    """A free type variable, to be injected as an engine variable."""

    name: str


@dataclass(frozen=True)
class TyName:
    """A bound type name (a mu binder or an arrow-quantified variable)."""

    name: str


@dataclass(frozen=True)
class TyInt:
    pass


@dataclass(frozen=True)
class TyStr:
    pass


@dataclass(frozen=True)
class TyArray:
    elem: "Ty"


@dataclass(frozen=True)
class TySexp:
    # Each constructor is (tag id, argument types); rest names a free
    # "further constructors" variable when the union is open.
    ctors: tuple
    rest: Optional[str] = None


@dataclass(frozen=True)
class TyFun:
    bound_vars: tuple
    bound_constraints: tuple
    params: tuple
    result: "Ty"


@dataclass(frozen=True)
class TyMu:
    binder: str
    body: "Ty"


Ty = object


@dataclass(frozen=True)
class CInd:
    container: Ty
    elem: Ty


@dataclass(frozen=True)
class CCall:
    fn: Ty
    args: tuple
    result: Ty


@dataclass(frozen=True)
class CSexp:
    tag: int
    subject: Ty
    args: tuple


@dataclass(frozen=True)
class CMatch:
    subject: Ty
    pats: tuple


@dataclass(frozen=True)
class CEq:
    left: Ty
    right: Ty


@dataclass(frozen=True)
class PatWild:
    pass


@dataclass(frozen=True)
class PatAt:
    ty: Ty
    pat: "Pat"


@dataclass(frozen=True)
class PatArray:
    pats: tuple


@dataclass(frozen=True)
class PatSexp:
    tag: int
    pats: tuple


@dataclass(frozen=True)
class PatShape:
    kind: str


Pat = object


# ---------------------------------------------------------------------------
# Injection: Python types -> engine terms.
# ---------------------------------------------------------------------------


def ty_to_term(ty: Ty, varmap: dict):
    """varmap maps TyVar names to engine variables (must be prefilled)."""
    if isinstance(ty, TyVar):
        return varmap[ty.name]
    if isinstance(ty, TyName):
        return t_name(ty.name)
    if isinstance(ty, TyInt):
        return T_INT
    if isinstance(ty, TyStr):
        return T_STR
    if isinstance(ty, TyArray):
        return t_array(ty_to_term(ty.elem, varmap))
    if isinstance(ty, TySexp):
        if ty.rest is None:
            tail = LNIL
        elif ty.rest in varmap:
            tail = varmap[ty.rest]
        else:
            tail = t_name(ty.rest)
        out = tail
        for tag, args in reversed(ty.ctors):
            out = lcons(t_ctor(tag, llist([ty_to_term(a, varmap) for a in args])), out)
        return t_sexp(out)
    if isinstance(ty, TyFun):
        return t_arrow(
            llist([n for n in ty.bound_vars]),
            llist([constraint_to_term(c, varmap) for c in ty.bound_constraints]),
            llist([ty_to_term(p, varmap) for p in ty.params]),
            ty_to_term(ty.result, varmap),
        )
    if isinstance(ty, TyMu):
        return t_mu(ty.binder, ty_to_term(ty.body, varmap))
    raise TypeError(f"not a type: {ty!r}")


def constraint_to_term(c, varmap: dict):
    if isinstance(c, CInd):
        return c_ind(ty_to_term(c.container, varmap), ty_to_term(c.elem, varmap))
    if isinstance(c, CCall):
        return c_call(
            ty_to_term(c.fn, varmap),
            llist([ty_to_term(a, varmap) for a in c.args]),
            ty_to_term(c.result, varmap),
        )
    if isinstance(c, CSexp):
        return c_sexp(
            c.tag,
            ty_to_term(c.subject, varmap),
            llist([ty_to_term(a, varmap) for a in c.args]),
        )
    if isinstance(c, CMatch):
        return c_match(
            ty_to_term(c.subject, varmap),
            llist([pattern_to_term(p, varmap) for p in c.pats]),
        )
    if isinstance(c, CEq):
        return c_eq(ty_to_term(c.left, varmap), ty_to_term(c.right, varmap))
    raise TypeError(f"not a constraint: {c!r}")


def pattern_to_term(p, varmap: dict):
    if isinstance(p, PatWild):
        return P_WILD
    if isinstance(p, PatAt):
        return p_at(ty_to_term(p.ty, varmap), pattern_to_term(p.pat, varmap))
    if isinstance(p, PatArray):
        return p_array(llist([pattern_to_term(x, varmap) for x in p.pats]))
    if isinstance(p, PatSexp):
        return p_sexp(p.tag, llist([pattern_to_term(x, varmap) for x in p.pats]))
    if isinstance(p, PatShape):
        return p_shape(p.kind)
    raise TypeError(f"not a pattern: {p!r}")


def free_ty_vars(obj) -> list:
    """TyVar names occurring in a type / constraint / pattern, in order."""
    seen: list[str] = []

    def go(x):
        if isinstance(x, TyVar):
            if x.name not in seen:
                seen.append(x.name)
        elif isinstance(x, TyName) or x is None:
            pass
        elif isinstance(x, (TyInt, TyStr, PatWild, PatShape)):
            pass
        elif isinstance(x, TyArray):
            go(x.elem)
        elif isinstance(x, TySexp):
            for _, args in x.ctors:
                for a in args:
                    go(a)
            if x.rest is not None and x.rest not in seen:
                seen.append(x.rest)
        elif isinstance(x, TyFun):
            for c in x.bound_constraints:
                go(c)
            for p in x.params:
                go(p)
            go(x.result)
        elif isinstance(x, TyMu):
            go(x.body)
        elif isinstance(x, CInd):
            go(x.container), go(x.elem)
        elif isinstance(x, CCall):
            go(x.fn)
            for a in x.args:
                go(a)
            go(x.result)
        elif isinstance(x, CSexp):
            go(x.subject)
            for a in x.args:
                go(a)
        elif isinstance(x, CMatch):
            go(x.subject)
            for p in x.pats:
                go(p)
        elif isinstance(x, CEq):
            go(x.left), go(x.right)
        elif isinstance(x, PatAt):
            go(x.ty), go(x.pat)
        elif isinstance(x, (PatArray, PatSexp)):
            for p in x.pats:
                go(p)
        elif isinstance(x, (list, tuple)):
            for y in x:
                go(y)
        else:
            raise TypeError(f"unexpected node: {x!r}")

    go(obj)
    return seen


def rename_ty(obj, mapping: dict):
    """Rename TyVar occurrences to TyName (generalization support)."""

    def go(x):
        if isinstance(x, TyVar):
            return TyName(mapping[x.name]) if x.name in mapping else x
        if isinstance(x, (TyInt, TyStr, TyName, PatWild, PatShape)):
            return x
        if isinstance(x, TyArray):
            return TyArray(go(x.elem))
        if isinstance(x, TySexp):
            return TySexp(tuple((t, tuple(go(a) for a in args)) for t, args in x.ctors), x.rest)
        if isinstance(x, TyFun):
            return TyFun(
                x.bound_vars,
                tuple(go(c) for c in x.bound_constraints),
                tuple(go(p) for p in x.params),
                go(x.result),
            )
        if isinstance(x, TyMu):
            return TyMu(x.binder, go(x.body))
        if isinstance(x, CInd):
            return CInd(go(x.container), go(x.elem))
        if isinstance(x, CCall):
            return CCall(go(x.fn), tuple(go(a) for a in x.args), go(x.result))
        if isinstance(x, CSexp):
            return CSexp(x.tag, go(x.subject), tuple(go(a) for a in x.args))
        if isinstance(x, CMatch):
            return CMatch(go(x.subject), tuple(go(p) for p in x.pats))
        if isinstance(x, CEq):
            return CEq(go(x.left), go(x.right))
        if isinstance(x, PatAt):
            return PatAt(go(x.ty), go(x.pat))
        if isinstance(x, PatArray):
            return PatArray(tuple(go(p) for p in x.pats))
        if isinstance(x, PatSexp):
            return PatSexp(x.tag, tuple(go(p) for p in x.pats))
        raise TypeError(f"unexpected node: {x!r}")

    return go(obj)


# ---------------------------------------------------------------------------
# Reified engine terms -> Python types.
# ---------------------------------------------------------------------------


def ty_from_term(t) -> Ty:
    if isinstance(t, FreeVar):
        return TyVar(f"v{t.var_id}")
    if isinstance(t, (Var, Wildcard)):
        return TyVar(f"v{t.id}")
    if not isinstance(t, Compound):
        raise ValueError(f"not a reified type: {t!r}")
    if t.tag == "TInt":
        return TyInt()
    if t.tag == "TStr":
        return TyStr()
    if t.tag == "TName":
        return TyName(t.args[0])
    if t.tag == "TArray":
        return TyArray(ty_from_term(t.args[0]))
    if t.tag == "TSexp":
        ctors, rest = _list_from_term(t.args[0])
        out = []
        for c in ctors:
            if isinstance(c, Compound) and c.tag == "ctor" and isinstance(c.args[0], int):
                args, _ = _list_from_term(c.args[1])
                out.append((c.args[0], tuple(ty_from_term(a) for a in args)))
            elif isinstance(c, Compound) and c.tag == "ctor":
                # entry whose tag is still free: show it as a variable
                out.append((-1, (ty_from_term(c.args[0]),)))
            else:
                out.append((-1, (ty_from_term(c),)))
        return TySexp(tuple(out), rest)
    if t.tag == "TArrow":
        bvars, _ = _list_from_term(t.args[0])
        bcs, _ = _list_from_term(t.args[1])
        params, _ = _list_from_term(t.args[2])
        return TyFun(
            tuple(b if isinstance(b, str) else f"v{b.var_id}" for b in bvars),
            tuple(constraint_from_term(c) for c in bcs),
            tuple(ty_from_term(p) for p in params),
            ty_from_term(t.args[3]),
        )
    if t.tag == "TMu":
        binder = t.args[0]
        if not isinstance(binder, str):
            binder = f"v{binder.var_id}"
        return TyMu(binder, ty_from_term(t.args[1]))
    raise ValueError(f"not a reified type: {t!r}")


def _list_from_term(t):
    out = []
    while isinstance(t, Compound) and t.tag == "lcons":
        out.append(t.args[0])
        t = t.args[1]
    if isinstance(t, Compound) and t.tag == "lnil":
        return out, None
    if isinstance(t, FreeVar):
        return out, f"v{t.var_id}"
    if isinstance(t, (Var, Wildcard)):
        return out, f"v{t.id}"
    return out, None


def constraint_from_term(t):
    if isinstance(t, (FreeVar, Var, Wildcard)):
        return CEq(ty_from_term(t), ty_from_term(t))
    if t.tag == "Ind":
        return CInd(ty_from_term(t.args[0]), ty_from_term(t.args[1]))
    if t.tag == "Call":
        args, _ = _list_from_term(t.args[1])
        return CCall(ty_from_term(t.args[0]), tuple(ty_from_term(a) for a in args), ty_from_term(t.args[2]))
    if t.tag == "SexpC":
        args, _ = _list_from_term(t.args[2])
        return CSexp(t.args[0], ty_from_term(t.args[1]), tuple(ty_from_term(a) for a in args))
    if t.tag == "Match":
        pats, _ = _list_from_term(t.args[1])
        return CMatch(ty_from_term(t.args[0]), tuple(pattern_from_term(p) for p in pats))
    if t.tag == "Eq":
        return CEq(ty_from_term(t.args[0]), ty_from_term(t.args[1]))
    raise ValueError(f"not a reified constraint: {t!r}")


def pattern_from_term(t):
    if isinstance(t, (FreeVar, Var, Wildcard)):
        return PatWild()
    if t.tag == "PWild":
        return PatWild()
    if t.tag == "PAt":
        return PatAt(ty_from_term(t.args[0]), pattern_from_term(t.args[1]))
    if t.tag == "PArray":
        pats, _ = _list_from_term(t.args[0])
        return PatArray(tuple(pattern_from_term(p) for p in pats))
    if t.tag == "PSexp":
        pats, _ = _list_from_term(t.args[1])
        return PatSexp(t.args[0], tuple(pattern_from_term(p) for p in pats))
    if t.tag == "PShape":
        return PatShape(t.args[0])
    raise ValueError(f"not a reified pattern: {t!r}")


# ---------------------------------------------------------------------------
# Rendering.
# ---------------------------------------------------------------------------


def _letter(i: int) -> str:
    base = "abcdefghijklmnopqrstuvwxyz"
    if i < 26:
        return base[i]
    return f"{base[i % 26]}{i // 26}"


class _NameGen:
    def __init__(self):
        self.names: dict[str, str] = {}

    def get(self, raw: str) -> str:
        if raw not in self.names:
            self.names[raw] = _letter(len(self.names))
        return self.names[raw]


def pretty_type(ty: Ty, table: TagTable, names: Optional[_NameGen] = None) -> str:
    """Deterministic rendering with variables lettered in
    first-occurrence order; re-parseable by parse_type. Pass a shared
    name generator to letter several types consistently."""
    return _render(ty, table, names or _NameGen(), top=True)


def _render(ty, table, names, top=False) -> str:
    def atomish(t):
        s = _render(t, table, names)
        if isinstance(t, (TyFun, TyMu)) or (isinstance(t, TySexp) and (len(t.ctors) + (1 if t.rest else 0)) > 1):
            return f"({s})"
        return s

    if isinstance(ty, TyVar):
        return names.get("var:" + ty.name)
    if isinstance(ty, TyName):
        return names.get("name:" + ty.name)
    if isinstance(ty, TyInt):
        return "Int"
    if isinstance(ty, TyStr):
        return "Str"
    if isinstance(ty, TyArray):
        return f"[{_render(ty.elem, table, names)}]"
    if isinstance(ty, TySexp):
        parts = []
        for tag, args in ty.ctors:
            label = table.label(tag) if 0 <= tag < table.sexp_max_length else "?"
            if args and tag >= 0:
                parts.append(f"{label}({', '.join(atomish(a) for a in args)})")
            elif tag < 0:
                parts.append(atomish(args[0]))
            else:
                parts.append(label)
        if ty.rest is not None:
            parts.append(names.get("var:" + ty.rest))
        return " | ".join(parts)
    if isinstance(ty, TyFun):
        quant = ""
        if ty.bound_vars:
            quant = "forall " + " ".join(names.get("name:" + b) for b in ty.bound_vars) + ". "
        constr = ""
        if ty.bound_constraints:
            constr = " & ".join(render_constraint(c, table, names) for c in ty.bound_constraints) + " => "
        params = ", ".join(atomish(p) for p in ty.params)
        return f"{quant}{constr}({params}) -> {atomish(ty.result)}"
    if isinstance(ty, TyMu):
        return f"mu {names.get('name:' + ty.binder)}. {_render(ty.body, table, names)}"
    raise TypeError(f"not a type: {ty!r}")


def render_constraint(c, table: TagTable, names: Optional[_NameGen] = None) -> str:
    names = names or _NameGen()

    def r(t):
        return _render(t, table, names)

    if isinstance(c, CInd):
        return f"Ind({r(c.container)}, {r(c.elem)})"
    if isinstance(c, CCall):
        return f"Call({r(c.fn)}; {', '.join(r(a) for a in c.args)}; {r(c.result)})"
    if isinstance(c, CSexp):
        return f"Sexp[{table.label(c.tag)}]({r(c.subject)}; {', '.join(r(a) for a in c.args)})"
    if isinstance(c, CMatch):
        return f"Match({r(c.subject)}; {', '.join(render_pattern(p, table, names) for p in c.pats)})"
    if isinstance(c, CEq):
        return f"Eq({r(c.left)}, {r(c.right)})"
    raise TypeError(f"not a constraint: {c!r}")


def render_pattern(p, table: TagTable, names: Optional[_NameGen] = None) -> str:
    names = names or _NameGen()
    if isinstance(p, PatWild):
        return "_"
    if isinstance(p, PatAt):
        return f"{_render(p.ty, table, names)} @ {render_pattern(p.pat, table, names)}"
    if isinstance(p, PatArray):
        return f"[{', '.join(render_pattern(x, table, names) for x in p.pats)}]"
    if isinstance(p, PatSexp):
        label = table.label(p.tag)
        if p.pats:
            return f"{label}({', '.join(render_pattern(x, table, names) for x in p.pats)})"
        return label
    if isinstance(p, PatShape):
        return f"#{p.kind}"
    raise TypeError(f"not a pattern: {p!r}")


# ---------------------------------------------------------------------------
# Parsing rendered types back (used by the corpus harness).
# ---------------------------------------------------------------------------


class TypeParseError(ValueError):
    pass


class _TypeParser:
    def __init__(self, text: str, table: TagTable):
        self.text = text
        self.pos = 0
        self.table = table
        self.bound: list[str] = []  # mu / forall binders in scope

    def error(self, msg):
        raise TypeParseError(f"{msg} at offset {self.pos} in {self.text!r}")

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos:self.pos + 1]

    def eat(self, s: str) -> bool:
        self.skip()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.eat(s):
            self.error(f"expected {s!r}")

    def ident(self) -> Optional[str]:
        self.skip()
        i = self.pos
        while i < len(self.text) and (self.text[i].isalnum() or self.text[i] == "_"):
            i += 1
        if i == self.pos:
            return None
        word = self.text[self.pos:i]
        self.pos = i
        return word

    def parse(self) -> Ty:
        ty = self.type_()
        self.skip()
        if self.pos != len(self.text):
            self.error("trailing input")
        return ty

    def type_(self) -> Ty:
        save = self.pos
        word = self.ident()
        if word == "mu":
            binder = self.ident()
            if binder is None:
                self.error("expected a binder after mu")
            self.expect(".")
            self.bound.append(binder)
            try:
                return TyMu(binder, self.type_())
            finally:
                self.bound.pop()
        if word == "forall":
            bvars = []
            while True:
                b = self.ident()
                if b is None:
                    break
                bvars.append(b)
            self.expect(".")
            self.bound.extend(bvars)
            try:
                fn = self.arrow(tuple(bvars))
            finally:
                del self.bound[len(self.bound) - len(bvars) :]
            if fn is None:
                self.error("expected arrow after forall")
            return fn
        self.pos = save
        fn = self.arrow(())
        if fn is not None:
            return fn
        self.pos = save
        return self.union()

    def arrow(self, bvars) -> Optional[TyFun]:
        save = self.pos
        constraints = []
        while True:
            mark = self.pos
            c = self.try_constraint()
            if c is None:
                self.pos = mark
                break
            constraints.append(c)
            if not self.eat("&"):
                break
        if constraints and not self.eat("=>"):
            self.pos = save
            constraints = []
        if not self.eat("("):
            self.pos = save
            return None
        params = []
        if not self.eat(")"):
            while True:
                params.append(self.type_())
                if self.eat(")"):
                    break
                self.expect(",")
        if not self.eat("->"):
            self.pos = save
            return None
        result = self.type_()
        return TyFun(tuple(bvars), tuple(constraints), tuple(params), result)

    def try_constraint(self):
        word = self.ident()
        if word == "Ind" and self.eat("("):
            a = self.type_()
            self.expect(",")
            b = self.type_()
            self.expect(")")
            return CInd(a, b)
        if word == "Eq" and self.eat("("):
            a = self.type_()
            self.expect(",")
            b = self.type_()
            self.expect(")")
            return CEq(a, b)
        if word == "Call" and self.eat("("):
            fn = self.type_()
            self.expect(";")
            args = []
            if self.peek() != ";":
                while True:
                    args.append(self.type_())
                    if self.peek() in (";", ""):
                        break
                    self.expect(",")
            self.expect(";")
            res = self.type_()
            self.expect(")")
            return CCall(fn, tuple(args), res)
        if word == "Sexp" and self.eat("["):
            label = self.ident()
            self.expect("]")
            self.expect("(")
            subj = self.type_()
            self.expect(";")
            args = []
            if self.peek() != ")":
                while True:
                    args.append(self.type_())
                    if self.peek() == ")":
                        break
                    self.expect(",")
            self.expect(")")
            return CSexp(self.table.intern(label, len(args)), subj, tuple(args))
        return None

    def union(self) -> Ty:
        members = [self.member()]
        while self.eat("|"):
            members.append(self.member())
        if len(members) == 1 and not isinstance(members[0], tuple):
            return members[0]
        ctors = []
        rest = None
        for m in members:
            if isinstance(m, tuple):
                ctors.append(m)
            elif isinstance(m, TyVar):
                rest = m.name
            else:
                self.error("bad union member")
        return TySexp(tuple(ctors), rest)

    def member(self):
        self.skip()
        if self.eat("["):
            elem = self.type_()
            self.expect("]")
            return TyArray(elem)
        if self.eat("("):
            ty = self.type_()
            self.expect(")")
            return ty
        word = self.ident()
        if word is None:
            self.error("expected a type")
        if word == "Int":
            return TyInt()
        if word == "Str":
            return TyStr()
        if word[0].isupper():
            args = []
            if self.eat("("):
                while True:
                    args.append(self.type_())
                    if self.eat(")"):
                        break
                    self.expect(",")
            return (self.table.intern(word, len(args)), tuple(args))
        if word in self.bound:
            return TyName(word)
        return TyVar(word)


def parse_type(text: str, table: TagTable) -> Ty:
    return _TypeParser(text, table).parse()


# ---------------------------------------------------------------------------
# Canonicalization and equality checks over Python-level types.
# ---------------------------------------------------------------------------


def canonicalize(ty: Ty) -> Ty:
    """Rename every variable and binder, free or bound, to n0, n1, ... in
    first-occurrence order; result contains only TyName leaves."""
    names: dict[str, str] = {}

    def fresh(kind, raw):
        key = f"{kind}:{raw}"
        if key not in names:
            names[key] = f"n{len(names)}"
        return names[key]

    def go(x):
        if isinstance(x, TyVar):
            return TyName(fresh("v", x.name))
        if isinstance(x, TyName):
            return TyName(fresh("n", x.name))
        if isinstance(x, (TyInt, TyStr)):
            return x
        if isinstance(x, TyArray):
            return TyArray(go(x.elem))
        if isinstance(x, TySexp):
            ctors = tuple((t, tuple(go(a) for a in args)) for t, args in x.ctors)
            rest = fresh("v", x.rest) if x.rest is not None else None
            return TySexp(ctors, rest)
        if isinstance(x, TyFun):
            bvars = tuple(fresh("n", b) for b in x.bound_vars)
            return TyFun(
                bvars,
                tuple(go_c(c) for c in x.bound_constraints),
                tuple(go(p) for p in x.params),
                go(x.result),
            )
        if isinstance(x, TyMu):
            return TyMu(fresh("n", x.binder), go(x.body))
        raise TypeError(f"not a type: {x!r}")

    def go_c(c):
        if isinstance(c, CInd):
            return CInd(go(c.container), go(c.elem))
        if isinstance(c, CCall):
            return CCall(go(c.fn), tuple(go(a) for a in c.args), go(c.result))
        if isinstance(c, CSexp):
            return CSexp(c.tag, go(c.subject), tuple(go(a) for a in c.args))
        if isinstance(c, CMatch):
            return CMatch(go(c.subject), tuple(go_p(p) for p in c.pats))
        if isinstance(c, CEq):
            return CEq(go(c.left), go(c.right))
        raise TypeError(f"not a constraint: {c!r}")

    def go_p(p):
        if isinstance(p, (PatWild, PatShape)):
            return p
        if isinstance(p, PatAt):
            return PatAt(go(p.ty), go_p(p.pat))
        if isinstance(p, PatArray):
            return PatArray(tuple(go_p(x) for x in p.pats))
        if isinstance(p, PatSexp):
            return PatSexp(p.tag, tuple(go_p(x) for x in p.pats))
        raise TypeError(f"not a pattern: {p!r}")

    return go(ty)


def types_equal(a: Ty, b: Ty, fuel: int = 200_000) -> bool:
    """eq_t over canonicalized (hence ground) types: syntactic equality
    modulo mu-unfolding, with binder names normalized away."""
    from .engine import run

    ta = ty_to_term(canonicalize(a), {})
    tb = ty_to_term(canonicalize(b), {})
    res = run(lambda q: conj(unify(q, 1), eq_t(ta, tb)), max_answers=1, fuel=fuel)
    return bool(res.answers)
