"""Independent brute-force oracles used by the test-suite.

Nothing here touches the relational engine: ground entailment is decided
by direct rule application with bounded recursive-type unfolding, and the
candidate-list enumerator counts bounded constructor lists directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

# Ground type syntax for the oracle: plain tuples.
#   ("int",) ("str",) ("arr", t) ("sexp", ((tag, (t, ...)), ...))
#   ("arrow", (names...), (constraints...), (params...), ret)
#   ("mu", name, body) ("name", sym)

INT = ("int",)
STR = ("str",)


def arr(t):
    return ("arr", t)


def sexp(*ctors):
    return ("sexp", tuple(ctors))


def arrow(names, constraints, params, ret):
    return ("arrow", tuple(names), tuple(constraints), tuple(params), ret)


def mu(name, body):
    return ("mu", name, body)


def name(sym):
    return ("name", sym)


# Constraints: ("ind", c, e) | ("call", fn, args, res) | ("sexpc", tag, subj, args)


def subst(mapping, t):
    kind = t[0]
    if kind in ("int", "str"):
        return t
    if kind == "name":
        return mapping.get(t[1], t)
    if kind == "arr":
        return ("arr", subst(mapping, t[1]))
    if kind == "sexp":
        return ("sexp", tuple((tag, tuple(subst(mapping, a) for a in args)) for tag, args in t[1]))
    if kind == "arrow":
        inner = {k: v for k, v in mapping.items() if k not in t[1]}
        return (
            "arrow",
            t[1],
            tuple(subst_c(inner, c) for c in t[2]),
            tuple(subst(inner, p) for p in t[3]),
            subst(inner, t[4]),
        )
    if kind == "mu":
        inner = {k: v for k, v in mapping.items() if k != t[1]}
        return ("mu", t[1], subst(inner, t[2]))
    raise ValueError(t)


def subst_c(mapping, c):
    if c[0] == "ind":
        return ("ind", subst(mapping, c[1]), subst(mapping, c[2]))
    if c[0] == "call":
        return ("call", subst(mapping, c[1]), tuple(subst(mapping, a) for a in c[2]), subst(mapping, c[3]))
    if c[0] == "sexpc":
        return ("sexpc", c[1], subst(mapping, c[2]), tuple(subst(mapping, a) for a in c[3]))
    raise ValueError(c)


def unfold(t):
    assert t[0] == "mu"
    return subst({t[1]: t}, t[2])


def teq(a, b, depth=3) -> bool:
    """Syntactic equality modulo bounded recursive-type unfolding."""
    if a == b:
        return True
    if a[0] == "mu" and depth > 0 and teq(unfold(a), b, depth - 1):
        return True
    if b[0] == "mu" and depth > 0 and teq(a, unfold(b), depth - 1):
        return True
    if a[0] == "mu" or b[0] == "mu" or a[0] != b[0]:
        return False
    if a[0] == "arr":
        return teq(a[1], b[1], depth)
    if a[0] == "sexp":
        if len(a[1]) != len(b[1]):
            return False
        return all(
            ta == tb and len(xa) == len(xb) and all(teq(x, y, depth) for x, y in zip(xa, xb))
            for (ta, xa), (tb, xb) in zip(a[1], b[1])
        )
    if a[0] == "arrow":
        if a[1] != b[1] or len(a[3]) != len(b[3]) or a[2] != b[2]:
            return False
        return all(teq(x, y, depth) for x, y in zip(a[3], b[3])) and teq(a[4], b[4], depth)
    return False


def entails(constraints, pool, depth=3, fuel=10_000) -> bool:
    """Brute-force derivability of a ground constraint list.

    pool is the set of ground types tried for instantiating quantified
    arrow variables in call constraints.
    """
    state = {"fuel": fuel}

    def one(c) -> bool:
        if state["fuel"] <= 0:
            return False
        state["fuel"] -= 1
        kind = c[0]
        if kind == "ind":
            subject = c[1]
            for _ in range(depth + 1):
                if subject[0] != "mu":
                    break
                subject = unfold(subject)
            if subject[0] == "str":
                return teq(c[2], INT, depth)
            if subject[0] == "arr":
                return teq(c[2], subject[1], depth)
            if subject[0] == "sexp":
                return all(teq(a, c[2], depth) for _, args in subject[1] for a in args)
            return False
        if kind == "call":
            fn = c[1]
            for _ in range(depth + 1):
                if fn[0] != "mu":
                    break
                fn = unfold(fn)
            if fn[0] != "arrow":
                return False
            names, bound_cs, params, ret = fn[1], fn[2], fn[3], fn[4]
            if len(params) != len(c[2]):
                return False
            for values in product(pool, repeat=len(names)):
                mapping = dict(zip(names, values))
                if not all(teq(subst(mapping, p), a, depth) for p, a in zip(params, c[2])):
                    continue
                if not teq(subst(mapping, ret), c[3], depth):
                    continue
                if all(one(subst_c(mapping, bc)) for bc in bound_cs):
                    return True
            return False
        if kind == "sexpc":
            subject = c[2]
            for _ in range(depth + 1):
                if subject[0] != "mu":
                    break
                subject = unfold(subject)
            if subject[0] != "sexp":
                return False
            return any(
                tag == c[1]
                and len(args) == len(c[3])
                and all(teq(x, y, depth) for x, y in zip(args, c[3]))
                for tag, args in subject[1]
            )
        raise ValueError(c)

    return all(one(c) for c in constraints)


@dataclass(frozen=True)
class FreeCell:
    """A constructor slot whose tag is undetermined."""


def count_sexp_candidates(n_constraints_on_fresh: int, max_len: int) -> int:
    """How many bounded candidate constructor lists exist per fresh
    subject, and the product over independent subjects.

    A candidate list has the required constructor first (list order is
    fixed, no permutations) followed by k undetermined slots; k ranges
    over 0 .. max_len - 1, so each fresh subject yields max_len
    candidates and independent subjects multiply.
    """
    per_subject = len([k for k in range(max_len)])
    return per_subject ** n_constraints_on_fresh
