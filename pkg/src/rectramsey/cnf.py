"""CNF export of avoidance problems and model decoding.

Variable numbering is bit-exact for reproducible DIMACS files:

* assignment variable x(p, c) = p*r + c + 1 for point p, color c;
* for every unordered pair {p, q} appearing in some forbidden rectangle, in
  lexicographic pair order, an equality variable e(p, q) followed by its r
  auxiliary conjunction variables and(p, q, c).

Clause semantics: exactly one color per point; a clause (-x(p,c), -x(q,c))
per forbidden segment and color; e(p, q) defined as "p and q share a color"
through the conjunction variables; and per forbidden rectangle one clause
requiring some corner pair to be equal (at most three distinct colors).
The instance is satisfiable iff an avoiding coloring exists.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coloring import AvoidanceProblem, Coloring
from .geometry import Pair


@dataclass
class CnfInstance:
    num_vars: int
    clauses: list[tuple[int, ...]]
    n_points: int
    r: int
    varmap: dict[tuple[int, int], int]
    rev_varmap: dict[int, tuple[int, int]]
    eqmap: dict[Pair, int]


class ModelError(ValueError):
    """Solver output is malformed or inconsistent with the encoding."""


def encode_cnf(problem: AvoidanceProblem) -> CnfInstance:
    n = problem.cfg.n_points
    r = problem.r
    varmap = {(p, c): p * r + c + 1 for p in range(n) for c in range(r)}
    rev_varmap = {v: pc for pc, v in varmap.items()}
    clauses: list[tuple[int, ...]] = []

    for p in range(n):
        clauses.append(tuple(varmap[(p, c)] for c in range(r)))
        for c1 in range(r):
            for c2 in range(c1 + 1, r):
                clauses.append((-varmap[(p, c1)], -varmap[(p, c2)]))

    for seg in problem.mono_forbidden:
        for c in range(r):
            clauses.append((-varmap[(seg.p, c)], -varmap[(seg.q, c)]))

    rect_pairs: set[Pair] = set()
    for rect in problem.rainbow_forbidden:
        rect_pairs.update(rect.side_a_edges)
        rect_pairs.update(rect.side_b_edges)
        rect_pairs.update(rect.diagonals)

    next_var = n * r + 1
    eqmap: dict[Pair, int] = {}
    for pair in sorted(rect_pairs):
        p, q = pair
        eq = next_var
        ands = tuple(next_var + 1 + c for c in range(r))
        next_var += 1 + r
        eqmap[pair] = eq
        for c in range(r):
            xp, xq, av = varmap[(p, c)], varmap[(q, c)], ands[c]
            clauses.append((-av, xp))
            clauses.append((-av, xq))
            clauses.append((-xp, -xq, av))
        clauses.append((-eq,) + ands)
        for av in ands:
            clauses.append((-av, eq))

    for rect in problem.rainbow_forbidden:
        pairs = sorted(rect.side_a_edges + rect.side_b_edges + rect.diagonals)
        clauses.append(tuple(eqmap[pair] for pair in pairs))

    return CnfInstance(
        num_vars=next_var - 1,
        clauses=clauses,
        n_points=n,
        r=r,
        varmap=varmap,
        rev_varmap=rev_varmap,
        eqmap=eqmap,
    )


def write_dimacs(instance: CnfInstance) -> bytes:
    lines = [f"p cnf {instance.num_vars} {len(instance.clauses)}"]
    for clause in instance.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_model(instance: CnfInstance, text: str) -> Coloring | None:
    """Decode standard SAT-competition output ("s ..." / "v ... 0" lines).

    Returns None for UNSATISFIABLE, a total Coloring for SATISFIABLE.
    Raises ModelError for malformed output or a model violating the
    exactly-one-color groups.
    """
    status: str | None = None
    literals: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("s ") or line == "s":
            status = line[1:].strip()
        elif line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                try:
                    literals.append(int(tok))
                except ValueError as exc:
                    raise ModelError(f"bad literal {tok!r} in model line") from exc
    if status is None:
        raise ModelError("no 's' status line in solver output")
    if status.upper() == "UNSATISFIABLE":
        return None
    if status.upper() != "SATISFIABLE":
        raise ModelError(f"unrecognized solver status {status!r}")
    if literals and literals[-1] == 0:
        literals.pop()
    if 0 in literals:
        raise ModelError("model contains an interior 0 terminator")

    true_vars = {lit for lit in literals if lit > 0}
    colors: list[int] = []
    for p in range(instance.n_points):
        chosen = [c for c in range(instance.r) if instance.varmap[(p, c)] in true_vars]
        if len(chosen) != 1:
            raise ModelError(
                f"point {p} has {len(chosen)} colors selected; exactly-one violated"
            )
        colors.append(chosen[0])
    return Coloring(instance.r, tuple(colors))
