"""Syntax-directed constraint extraction.

A resolved program is traversed once: every S-expression label is interned
first (the solver needs global constructor counts before it starts), then
each construct contributes a type and a list of atomic constraints.
Function literals are generalized on the spot: variables not free in the
environment are quantified and the body constraints that mention them move
into the arrow, to be instantiated at call sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as S
from .types import (
    CCall,
    CEq,
    CInd,
    CMatch,
    CSexp,
    PatArray,
    PatAt,
    PatSexp,
    PatShape,
    PatWild,
    TagTable,
    TyArray,
    TyFun,
    TyInt,
    TyStr,
    TyVar,
    free_ty_vars,
    rename_ty,
)


@dataclass
class GenResult:
    constraints: list
    table: TagTable
    roots: list  # of (name, Ty) in declaration order
    env_types: dict = field(default_factory=dict)  # binder id -> Ty


class _Gen:
    def __init__(self, table: TagTable):
        self.table = table
        self.counter = 0
        self.bound_counter = 0
        self.env: dict[int, object] = {}

    def fresh(self) -> TyVar:
        self.counter += 1
        return TyVar(f"t{self.counter}")

    def fresh_bound_name(self) -> str:
        self.bound_counter += 1
        return f"q{self.bound_counter}"

    # -- expressions --------------------------------------------------------

    def infer_expr(self, e):
        """Returns (type, constraints)."""
        if isinstance(e, S.IntLit):
            return TyInt(), []
        if isinstance(e, S.StrLit):
            return TyStr(), []
        if isinstance(e, S.VarRef):
            return self.env[e.binder], []
        if isinstance(e, S.ArrayLit):
            elem = self.fresh()
            cs = []
            for x in e.elems:
                t, c = self.infer_expr(x)
                cs += c
                cs.append(CEq(t, elem))
            return TyArray(elem), cs
        if isinstance(e, S.SexpLit):
            tid = self.table.intern(e.label, len(e.args))
            subject = self.fresh()
            cs = []
            args = []
            for x in e.args:
                t, c = self.infer_expr(x)
                cs += c
                args.append(t)
            cs.append(CSexp(tid, subject, tuple(args)))
            return subject, cs
        if isinstance(e, S.Index):
            ts, cs = self.infer_expr(e.subject)
            ti, ci = self.infer_expr(e.index)
            elem = self.fresh()
            return elem, cs + ci + [CEq(ti, TyInt()), CInd(ts, elem)]
        if isinstance(e, S.CallE):
            tf, cs = self.infer_expr(e.fn)
            args = []
            for x in e.args:
                t, c = self.infer_expr(x)
                cs += c
                args.append(t)
            r = self.fresh()
            return r, cs + [CCall(tf, tuple(args), r)]
        if isinstance(e, S.Length):
            ts, cs = self.infer_expr(e.subject)
            return TyInt(), cs + [CMatch(ts, (PatShape("box"),))]
        if isinstance(e, S.Assign):
            tl, cl = self.infer_expr(e.lhs)
            tr, cr = self.infer_expr(e.rhs)
            return TyInt(), cl + cr + [CEq(tl, tr)]
        if isinstance(e, S.Binop):
            tl, cl = self.infer_expr(e.left)
            tr, cr = self.infer_expr(e.right)
            return TyInt(), cl + cr + [CEq(tl, TyInt()), CEq(tr, TyInt())]
        if isinstance(e, S.If):
            tc, cs = self.infer_expr(e.cond)
            cs.append(CEq(tc, TyInt()))
            tt, ct = self.infer_expr(e.then)
            cs += ct
            if e.orelse is None:
                return TyInt(), cs
            te, ce = self.infer_expr(e.orelse)
            return tt, cs + ce + [CEq(tt, te)]
        if isinstance(e, S.While):
            tc, cs = self.infer_expr(e.cond)
            _, cb = self.infer_expr(e.body)
            return TyInt(), cs + cb + [CEq(tc, TyInt())]
        if isinstance(e, S.For):
            _, c0 = self.infer_expr(e.init)
            tc, c1 = self.infer_expr(e.cond)
            _, c2 = self.infer_expr(e.step)
            _, c3 = self.infer_expr(e.body)
            return TyInt(), c0 + c1 + [CEq(tc, TyInt())] + c2 + c3
        if isinstance(e, S.Case):
            ts, cs = self.infer_expr(e.scrutinee)
            res = self.fresh()
            pats = []
            for pat, body in e.branches:
                tp = self.infer_pattern(pat)
                pats.append(tp)
                tb, cb = self.infer_expr(body)
                cs += cb
                cs.append(CEq(tb, res))
            cs.append(CMatch(ts, tuple(pats)))
            return res, cs
        if isinstance(e, S.FunLit):
            return self.infer_fun(e)
        if isinstance(e, S.Scope):
            return self.infer_scope(e)
        raise TypeError(f"unexpected expression: {e!r}")

    def infer_scope(self, scope: S.Scope):
        ty = TyInt()
        cs = []
        for item in scope.items:
            if isinstance(item, S.VarDecl):
                t = self.fresh()
                self.env[item.binder] = t  # visible in its own initializer
                if item.init is not None:
                    ti, ci = self.infer_expr(item.init)
                    cs += ci
                    cs.append(CEq(t, ti))
                ty = TyInt()
            elif isinstance(item, S.FunDecl):
                # The function sees itself monomorphically.
                m = self.fresh()
                self.env[item.binder] = m
                arrow, ci = self.infer_fun(item.fun)
                cs += ci
                cs.append(CEq(m, arrow))
                ty = TyInt()
            else:
                ty, ci = self.infer_expr(item)
                cs += ci
        return ty, cs

    def infer_fun(self, fn: S.FunLit):
        env_ftv = set()
        for t in self.env.values():
            env_ftv.update(free_ty_vars(t))
        params = []
        for name, binder in fn.params:
            t = self.fresh()
            self.env[binder] = t
            params.append(t)
        result, body_cs = self.infer_expr(fn.body)
        return self.generalize(env_ftv, params, result, body_cs)

    def generalize(self, env_ftv, params, result, body_cs):
        """Quantify everything not free in the environment; constraints
        touching a quantified variable travel with the arrow."""
        own = []
        for t in params:
            own += free_ty_vars(t)
        own += free_ty_vars(result)
        for c in body_cs:
            own += free_ty_vars(c)
        quantified = [v for v in dict.fromkeys(own) if v not in env_ftv]
        mapping = {v: self.fresh_bound_name() for v in quantified}
        moved = []
        residual = []
        for c in body_cs:
            if any(v in mapping for v in free_ty_vars(c)):
                moved.append(rename_ty(c, mapping))
            else:
                residual.append(c)
        arrow = TyFun(
            tuple(mapping[v] for v in quantified),
            tuple(moved),
            tuple(rename_ty(p, mapping) for p in params),
            rename_ty(result, mapping),
        )
        return arrow, residual

    # -- patterns -----------------------------------------------------------

    def infer_pattern(self, p):
        """Translate a syntactic pattern into a type pattern, extending the
        environment with binder types. Integer literals become an
        integer-typed hole so the subject is pinned wherever it nests."""
        if isinstance(p, S.PWild):
            return PatWild()
        if isinstance(p, S.PInt):
            return PatAt(TyInt(), PatWild())
        if isinstance(p, S.PBind):
            t = self.fresh()
            self.env[p.binder] = t
            return PatAt(t, PatWild())
        if isinstance(p, S.PAt):
            t = self.fresh()
            self.env[p.binder] = t
            return PatAt(t, self.infer_pattern(p.pat))
        if isinstance(p, S.PSexp):
            tid = self.table.intern(p.label, len(p.args))
            return PatSexp(tid, tuple(self.infer_pattern(x) for x in p.args))
        if isinstance(p, S.PArray):
            return PatArray(tuple(self.infer_pattern(x) for x in p.elems))
        if isinstance(p, S.PShape):
            return PatShape(p.kind)
        raise TypeError(f"unexpected pattern: {p!r}")


def _intern_all(table: TagTable, node):
    """Pre-pass interning every constructor label/arity in the program."""
    if isinstance(node, S.SexpLit):
        table.intern(node.label, len(node.args))
        for a in node.args:
            _intern_all(table, a)
        return
    if isinstance(node, S.PSexp):
        table.intern(node.label, len(node.args))
        for a in node.args:
            _intern_all(table, a)
        return
    for name in getattr(node, "__dataclass_fields__", {}):
        v = getattr(node, name)
        if isinstance(v, S.Node):
            _intern_all(table, v)
        elif isinstance(v, (list, tuple)):
            for x in v:
                if isinstance(x, S.Node):
                    _intern_all(table, x)
                elif isinstance(x, tuple):
                    for y in x:
                        if isinstance(y, S.Node):
                            _intern_all(table, y)


BUILTIN_TYPES = {
    "read": TyFun((), (), (), TyInt()),
    "write": TyFun((), (), (TyInt(),), TyInt()),
}


def infer_program(prog: S.Program) -> GenResult:
    table = TagTable()
    _intern_all(table, prog.body)
    gen = _Gen(table)
    for name, binder in prog.builtins.items():
        gen.env[binder] = BUILTIN_TYPES[name]
    _, constraints = gen.infer_scope(prog.body)
    roots = []
    for item in prog.body.items:
        if isinstance(item, (S.VarDecl, S.FunDecl)) and item.binder in gen.env:
            roots.append((item.name, gen.env[item.binder]))
    return GenResult(constraints, table, roots, dict(gen.env))
