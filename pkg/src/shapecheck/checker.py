"""End-to-end checking: parse, generate constraints, solve, report.

The solver query binds one variable to the list of root type variables
(one per top-level binding), so a single answer carries every reported
type. Verdicts: Typed (first answer found), IllTyped (search exhausted
with no answer), Unknown (fuel ran out), Malformed (frontend error).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import Counters, conj, fresh_many, reify_term, run, unify
from .gen import GenResult, infer_program
from .solver import SolverOpts, entail_all
from .syntax import ParseError, ResolveError, parse_program
from .types import (
    TagTable,
    _NameGen,
    constraint_from_term,
    constraint_to_term,
    free_ty_vars,
    llist,
    pretty_type,
    render_constraint,
    ty_from_term,
    ty_to_term,
    _list_from_term,
)

DEFAULT_FUEL = 1_000_000

TYPED = "Typed"
ILL_TYPED = "IllTyped"
UNKNOWN = "Unknown"
MALFORMED = "Malformed"

EXIT_CODES = {TYPED: 0, ILL_TYPED: 1, UNKNOWN: 2, MALFORMED: 3}


@dataclass
class CheckOptions:
    fuel: int = DEFAULT_FUEL
    max_answers: int = 1
    max_constructors: Optional[int] = None
    prune: bool = True
    emit_constraints: bool = False


@dataclass
class Report:
    verdict: str
    bindings: list = field(default_factory=list)  # of (name, Ty)
    table: Optional[TagTable] = None
    message: str = ""
    stats: dict = field(default_factory=dict)
    constraints_rendered: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def render_bindings(self) -> list:
        names = _NameGen()
        return [f"{name} : {pretty_type(ty, self.table, names)}" for name, ty in self.bindings]


def _stats_dict(counters: Counters, generated: int, fuel_used: int) -> dict:
    return {
        "constraints-generated": generated,
        "constraints-dispatched": counters.dispatched,
        "engine-unifications": counters.unifications,
        "answers-requested": counters.answers_requested,
        "answers-found": counters.answers_found,
        "fuel-used": fuel_used,
    }


def solve_gen(genr: GenResult, options: CheckOptions):
    """Run the solver over a generation result. Returns (RunResult,
    Counters, root names)."""
    opts = SolverOpts(genr.table, prune=options.prune, max_ctors=options.max_constructors)
    all_vars = []
    for c in genr.constraints:
        all_vars += free_ty_vars(c)
    for _, t in genr.roots:
        all_vars += free_ty_vars(t)
    var_names = list(dict.fromkeys(all_vars))
    counters = Counters()
    counters.generated = len(genr.constraints)

    def query(q):
        def with_vars(vs):
            varmap = dict(zip(var_names, vs))
            roots = llist([ty_to_term(t, varmap) for _, t in genr.roots])
            queue = [constraint_to_term(c, varmap) for c in genr.constraints]
            return conj(unify(q, roots), entail_all(queue, opts))

        return fresh_many(len(var_names), with_vars)

    result = run(query, max_answers=options.max_answers, fuel=options.fuel, counters=counters)
    return result, counters


def check_source(source: str, options: Optional[CheckOptions] = None) -> Report:
    options = options or CheckOptions()
    try:
        prog = parse_program(source)
    except (ParseError, ResolveError) as exc:
        return Report(MALFORMED, message=str(exc))
    genr = infer_program(prog)
    rendered = []
    if options.emit_constraints:
        rendered = [render_constraint(c, genr.table) for c in genr.constraints]
    result, counters = solve_gen(genr, options)
    fuel_used = options.fuel if result.fuel_exhausted else counters.steps
    stats = _stats_dict(counters, len(genr.constraints), fuel_used)
    if result.answers:
        answer = result.answers[0]
        types, _ = _list_from_term(answer)
        bindings = [(name, ty_from_term(t)) for (name, _), t in zip(genr.roots, types)]
        return Report(TYPED, bindings, genr.table, stats=stats, constraints_rendered=rendered)
    if result.fuel_exhausted:
        return Report(
            UNKNOWN,
            table=genr.table,
            message=f"fuel exhausted after {counters.steps} steps",
            stats=stats,
            constraints_rendered=rendered,
        )
    message = ""
    if counters.last_constraint is not None:
        term, subst = counters.last_constraint
        reified = reify_term(term, subst)
        try:
            c = constraint_from_term(reified)
            message = render_constraint(c, genr.table)
        except (ValueError, IndexError):
            message = repr(reified)
    return Report(ILL_TYPED, table=genr.table, message=message, stats=stats, constraints_rendered=rendered)


def check_file(path: str, options: Optional[CheckOptions] = None) -> Report:
    with open(path, encoding="utf-8") as fh:
        return check_source(fh.read(), options)
