"""Exact linear-constraint solving over nonnegative rationals.

Three entry points: `feasible` finds some nonnegative solution, `max_support`
finds a solution positive on every variable that is positive in any solution,
and `solve_implications` additionally honours implications "x > 0 => y > 0".
The engine is a sparse two-phase simplex on exact rationals (gmpy2.mpq
internally, fractions.Fraction at the boundary); every returned assignment is
re-verified by substitution before being handed back.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from gmpy2 import mpq

from .core import InternalError, UdpnError, ZERO, as_fraction

REL_EQ = "=="
REL_LE = "<="
REL_GE = ">="
_RELS = (REL_EQ, REL_LE, REL_GE)

# consecutive degenerate pivots tolerated before switching to Bland's rule
_DEGENERATE_LIMIT = 30

Constraint = tuple[dict, str, Fraction]


class LinearSystem:
    """Constraints over named variables, all implicitly >= 0."""

    __slots__ = ("variables", "constraints")

    def __init__(self, variables, constraints):
        self.variables = tuple(variables)
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise UdpnError("duplicate variable name in linear system")
        cleaned = []
        for coeffs, rel, const in constraints:
            if rel not in _RELS:
                raise UdpnError(f"unknown relation {rel!r}")
            row = {}
            for v, a in coeffs.items():
                if v not in declared:
                    raise UdpnError(f"constraint refers to undeclared variable {v!r}")
                a = as_fraction(a)
                if a != 0:
                    row[v] = a
            cleaned.append((row, rel, as_fraction(const)))
        self.constraints = tuple(cleaned)


@dataclass(frozen=True)
class ImplicationSystem:
    base: LinearSystem
    implications: tuple = ()

    def __post_init__(self):
        declared = set(self.base.variables)
        for a, b in self.implications:
            if a not in declared or b not in declared:
                raise UdpnError("implication refers to undeclared variable")


def _check_assignment(sys: LinearSystem, assignment: dict) -> None:
    for v in sys.variables:
        if assignment[v] < 0:
            raise InternalError(f"negative value for {v!r} in solver output")
    for coeffs, rel, const in sys.constraints:
        lhs = sum((a * assignment[v] for v, a in coeffs.items()), ZERO)
        ok = (lhs == const if rel == REL_EQ else
              lhs <= const if rel == REL_LE else lhs >= const)
        if not ok:
            raise InternalError("solver output fails substitution check")


def dump_system(sys: LinearSystem) -> str:
    """One constraint per line; rationals printed as p or p/q."""
    lines = []
    for coeffs, rel, const in sys.constraints:
        terms = " + ".join(f"{a}*{v}" for v, a in sorted(coeffs.items(), key=repr)) or "0"
        lines.append(f"{terms} {rel} {const}")
    return "\n".join(lines)


def dump_implications(isys: ImplicationSystem) -> str:
    lines = [dump_system(isys.base)] if isys.base.constraints else []
    for a, b in isys.implications:
        lines.append(f"{a} > 0 => {b} > 0")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# presolve


class _Infeasible(Exception):
    pass


def _presolve(sys: LinearSystem):
    """Fix forced variables, drop vacuous rows, dedupe.

    Returns (fixed values, remaining constraints).  Raises _Infeasible when a
    contradiction is detected.  Only same-sign rows and singletons are
    examined; anything subtler is left to the simplex.
    """
    fixed: dict[str, Fraction] = {}
    work = [(dict(c), rel, k) for c, rel, k in sys.constraints]
    changed = True
    while changed:
        changed = False
        kept = []
        for coeffs, rel, const in work:
            for v in [v for v in coeffs if v in fixed]:
                const -= coeffs.pop(v) * fixed[v]
            if not coeffs:
                ok = (const == 0 if rel == REL_EQ else
                      const >= 0 if rel == REL_LE else const <= 0)
                if not ok:
                    raise _Infeasible()
                continue
            if len(coeffs) == 1:
                (v, a), = coeffs.items()
                if rel == REL_EQ:
                    val = const / a
                    if val < 0:
                        raise _Infeasible()
                    fixed[v] = val
                    changed = True
                    continue
                bound_hi = (rel == REL_LE and a > 0) or (rel == REL_GE and a < 0)
                if bound_hi:
                    if const / a < 0:
                        raise _Infeasible()
                    if const / a == 0:
                        fixed[v] = ZERO
                        changed = True
                        continue
                else:
                    if const / a <= 0:
                        continue  # vacuous lower bound
            signs = {a > 0 for a in coeffs.values()}
            if len(signs) == 1:
                pos = signs.pop()
                force_zero = False
                if rel == REL_EQ:
                    if (pos and const < 0) or (not pos and const > 0):
                        raise _Infeasible()
                    if const == 0:
                        force_zero = True
                elif rel == REL_LE and pos:
                    if const < 0:
                        raise _Infeasible()
                    if const == 0:
                        force_zero = True
                elif rel == REL_GE and not pos:
                    if const > 0:
                        raise _Infeasible()
                    if const == 0:
                        force_zero = True  # lhs <= 0 and >= 0 only via zeros
                elif rel == REL_GE and pos and const <= 0:
                    continue  # vacuous
                elif rel == REL_LE and not pos and const >= 0:
                    continue  # vacuous
                if force_zero:
                    for v in coeffs:
                        fixed[v] = ZERO
                    changed = True
                    continue
            kept.append((coeffs, rel, const))
        work = kept
    seen = set()
    out = []
    for coeffs, rel, const in work:
        key = (tuple(sorted(coeffs.items(), key=repr)), rel, const)
        if key not in seen:
            seen.add(key)
            out.append((coeffs, rel, const))
    return fixed, out


# ---------------------------------------------------------------------------
# simplex core (integer column indices, mpq arithmetic)


def _to_mpq(x: Fraction):
    return mpq(x.numerator, x.denominator)


class _Simplex:
    """Two-phase tableau simplex; all data exact mpq."""

    def __init__(self, num_vars: int):
        self.n = num_vars          # decision columns 0..n-1
        self.ncols = num_vars
        self.rows: list[dict] = []
        self.rhs: list = []
        self.row_slack: list = []  # slack column of each row, or None
        self.pivots = 0

    def add(self, coeffs: dict, rel: str, const) -> None:
        row = {j: _to_mpq(a) for j, a in coeffs.items() if a != 0}
        b = _to_mpq(const)
        slack = None
        if rel != REL_EQ:
            slack = self.ncols
            self.ncols += 1
            row[slack] = mpq(1) if rel == REL_LE else mpq(-1)
        if b < 0:
            row = {j: -a for j, a in row.items()}
            b = -b
        self.rows.append(row)
        self.rhs.append(b)
        self.row_slack.append(slack)

    def solve(self, objective: Optional[dict] = None):
        """Phase 1 then optional maximization.

        Returns None if infeasible; otherwise (values list over decision
        columns, objective value or None).  Raises on unbounded objectives.
        """
        basis = []
        art_start = self.ncols
        artificial_rows = []
        for i, row in enumerate(self.rows):
            slack = self.row_slack[i]
            if slack is not None and row.get(slack) == 1:
                basis.append(slack)
            else:
                col = self.ncols
                self.ncols += 1
                row[col] = mpq(1)
                basis.append(col)
                artificial_rows.append(i)
        # starting-basis columns anchor the lexicographic leaving rule
        self.lex_cols = sorted(basis)
        if artificial_rows:
            w = {}
            wconst = mpq(0)
            for i in artificial_rows:
                for j, a in self.rows[i].items():
                    if j < art_start:
                        w[j] = w.get(j, mpq(0)) + a
                wconst += self.rhs[i]
            w = {j: a for j, a in w.items() if a != 0}
            self._iterate(basis, w, limit=art_start)
            value = sum((self.rhs[i] for i in range(len(self.rows))
                         if basis[i] >= art_start), mpq(0))
            if value != 0:
                return None
            self._evict_artificials(basis, art_start)
        if objective is None:
            return self._extract(basis), None
        z = {j: _to_mpq(a) for j, a in objective.items() if a != 0}
        for i, b in enumerate(basis):
            if b in z and z[b] != 0:
                coef = z.pop(b)
                for j, a in self.rows[i].items():
                    if j == b:
                        continue
                    nv = z.get(j, mpq(0)) - coef * a
                    if nv == 0:
                        z.pop(j, None)
                    else:
                        z[j] = nv
        self._iterate(basis, z, limit=art_start)
        values = self._extract(basis)
        total = sum((_to_mpq(a) * values[j] for j, a in objective.items()
                     if j < self.n), mpq(0))
        return values, Fraction(int(total.numerator), int(total.denominator))

    def _iterate(self, basis, z, limit):
        degenerate = 0
        bland = False
        while True:
            entering = self._entering(z, basis, limit, bland)
            if entering is None:
                return
            leave = self._ratio_test(entering, basis, limit, bland)
            if leave is None:
                raise UdpnError("linear objective is unbounded")
            if self.rhs[leave] == 0:
                degenerate += 1
                if degenerate > _DEGENERATE_LIMIT:
                    bland = True
            else:
                degenerate = 0
                bland = False
            self._pivot(leave, entering, basis, z)

    def _entering(self, z, basis, limit, bland):
        in_basis = set(basis)
        best = None
        best_val = None
        for j, a in z.items():
            if a <= 0 or j >= limit or j in in_basis:
                continue
            if bland:
                if best is None or j < best:
                    best = j
            else:
                if best_val is None or a > best_val or (a == best_val and j < best):
                    best = j
                    best_val = a
        return best

    def _ratio_test(self, j, basis, limit, bland):
        # Bland mode ties break on the smallest basis column (required for
        # the anti-cycling guarantee); otherwise the lexicographic rule over
        # the starting-basis columns picks a unique leaving row.
        ties = []
        best_ratio = None
        for i, row in enumerate(self.rows):
            a = row.get(j)
            if a is None or a <= 0:
                continue
            ratio = self.rhs[i] / a
            if best_ratio is None or ratio < best_ratio:
                best_ratio = ratio
                ties = [i]
            elif ratio == best_ratio:
                ties.append(i)
        if not ties:
            return None
        if len(ties) == 1:
            return ties[0]
        if bland:
            return min(ties, key=lambda i: basis[i])
        # prefer evicting auxiliary columns (>= limit) before refining
        aux = [i for i in ties if basis[i] >= limit]
        if aux:
            ties = aux
        if len(ties) == 1:
            return ties[0]
        zero = mpq(0)
        for c in self.lex_cols:
            best_val = None
            kept = []
            for i in ties:
                val = self.rows[i].get(c, zero) / self.rows[i][j]
                if best_val is None or val < best_val:
                    best_val = val
                    kept = [i]
                elif val == best_val:
                    kept.append(i)
            ties = kept
            if len(ties) == 1:
                return ties[0]
        return min(ties, key=lambda i: basis[i])

    def _pivot(self, r, j, basis, z):
        self.pivots += 1
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            row = {k: a / piv for k, a in row.items()}
            self.rows[r] = row
            self.rhs[r] = self.rhs[r] / piv
        basis[r] = j
        rrhs = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            c = other.get(j)
            if c is None or c == 0:
                continue
            for k, a in row.items():
                nv = other.get(k, mpq(0)) - c * a
                if nv == 0:
                    other.pop(k, None)
                else:
                    other[k] = nv
            other.pop(j, None)
            self.rhs[i] -= c * rrhs
        c = z.get(j)
        if c:
            for k, a in row.items():
                nv = z.get(k, mpq(0)) - c * a
                if nv == 0:
                    z.pop(k, None)
                else:
                    z[k] = nv
            z.pop(j, None)

    def _evict_artificials(self, basis, art_start):
        drop = []
        for i in range(len(self.rows)):
            if basis[i] < art_start:
                continue
            target = None
            for k in sorted(self.rows[i]):
                if k < art_start and self.rows[i][k] != 0:
                    target = k
                    break
            if target is None:
                drop.append(i)
            else:
                self._pivot(i, target, basis, {})
        for i in reversed(drop):
            del self.rows[i]
            del self.rhs[i]
            del basis[i]

    def _extract(self, basis):
        values = [mpq(0)] * self.ncols
        for i, b in enumerate(basis):
            values[b] = self.rhs[i]
        return values


def _run_simplex(variables, constraints, objective=None, stats=None):
    """Solve the named system; returns (assignment, value) or None."""
    index = {v: j for j, v in enumerate(variables)}
    sx = _Simplex(len(variables))
    for coeffs, rel, const in constraints:
        sx.add({index[v]: a for v, a in coeffs.items()}, rel, const)
    obj = None
    if objective is not None:
        obj = {index[v]: a for v, a in objective.items() if a != 0}
    result = sx.solve(obj)
    if stats is not None:
        stats["pivots"] = stats.get("pivots", 0) + sx.pivots
    if result is None:
        return None
    values, objval = result
    assignment = {v: Fraction(int(values[j].numerator),
                              int(values[j].denominator))
                  for v, j in index.items()}
    return assignment, objval


# ---------------------------------------------------------------------------
# public entry points


def feasible(sys: LinearSystem, stats=None) -> Optional[dict]:
    """Some nonnegative solution, or None.  Output verified by substitution."""
    try:
        fixed, remaining = _presolve(sys)
    except _Infeasible:
        return None
    live = sorted({v for coeffs, _r, _k in remaining for v in coeffs}, key=repr)
    solved = _run_simplex(live, remaining, stats=stats)
    if solved is None:
        return None
    assignment, _ = solved
    out = {v: ZERO for v in sys.variables}
    out.update(fixed)
    out.update(assignment)
    _check_assignment(sys, out)
    return out


def _optimize(sys: LinearSystem, objective: dict, stats=None):
    """Maximize the objective; returns (value, assignment) or None."""
    solved = _run_simplex(sys.variables, sys.constraints, objective, stats=stats)
    if solved is None:
        return None
    assignment, value = solved
    _check_assignment(sys, assignment)
    return value, assignment


def max_support(sys: LinearSystem, stats=None):
    """A solution positive exactly on the variables positive in any solution.

    Returns (support set, assignment) or None if infeasible.  Iterates: take
    the current solution's zero set, maximize the sum of capped copies
    min(x, 1) over it; optimum zero certifies those variables are zero in
    every solution, otherwise average the two solutions and repeat.
    """
    try:
        fixed, remaining = _presolve(sys)
    except _Infeasible:
        return None
    live = sorted({v for coeffs, _r, _k in remaining for v in coeffs}, key=repr)
    solved = _run_simplex(live, remaining, stats=stats)
    if solved is None:
        return None
    current = {v: ZERO for v in sys.variables}
    current.update(fixed)
    current.update(solved[0])
    # variables outside every remaining constraint and not fixed are free to
    # be positive; presolve fixings hold in every solution, so only the live
    # zero set needs probing
    for v in sys.variables:
        if v not in fixed and v not in solved[0]:
            current[v] = Fraction(1)
    aux_of = {v: f"__sup__{v}" for v in live}
    for _ in range(len(live) + 1):
        zero_set = [v for v in live if current[v] == 0]
        if not zero_set:
            break
        aux_vars = [aux_of[v] for v in zero_set]
        constraints = list(remaining)
        for v in zero_set:
            constraints.append(({aux_of[v]: Fraction(1), v: Fraction(-1)}, REL_LE, ZERO))
            constraints.append(({aux_of[v]: Fraction(1)}, REL_LE, Fraction(1)))
        opt = _run_simplex(tuple(live) + tuple(aux_vars), constraints,
                           {a: Fraction(1) for a in aux_vars}, stats=stats)
        if opt is None:
            raise InternalError("support probe infeasible on a feasible system")
        assignment, value = opt
        if value == 0:
            break
        half = Fraction(1, 2)
        for v in live:
            current[v] = (current[v] + assignment[v]) * half
    else:
        raise InternalError("support iteration failed to stabilize")
    _check_assignment(sys, current)
    support = frozenset(v for v in sys.variables if current[v] > 0)
    return support, current


def solve_implications(isys: ImplicationSystem, stats=None) -> Optional[dict]:
    """Satisfy the base system plus all positivity implications, or None.

    Saturation: variables proven incompatible with some implication are
    pinned to zero and the max-support solution is recomputed.  Each round
    pins at least one variable, so the loop is linear in the variable count.
    """
    base = isys.base
    pinned: set[str] = set()

    def pinned_system() -> LinearSystem:
        constraints = list(base.constraints)
        for v in sorted(pinned, key=repr):
            constraints.append(({v: Fraction(1)}, REL_EQ, ZERO))
        return LinearSystem(base.variables, constraints)

    # cheap pruning round: antecedents of consequents that presolve already
    # forces to zero can be pinned without solving any linear program
    for _ in range(len(base.variables) + 1):
        try:
            fixed, _rem = _presolve(pinned_system())
        except _Infeasible:
            return None
        newly = set()
        for a, b in isys.implications:
            if fixed.get(b) == 0 and a not in pinned:
                if fixed.get(a, ZERO) > 0:
                    return None
                newly.add(a)
        if not newly:
            break
        pinned.update(newly)
    else:
        raise InternalError("implication pruning failed to terminate")

    for _ in range(len(base.variables) + 1):
        ms = max_support(pinned_system(), stats=stats)
        if ms is None:
            return None
        support, assignment = ms
        # a consequent outside the support is zero in every solution, so all
        # antecedents implying one can be pinned in a single round
        violated = {a for a, b in isys.implications
                    if a in support and b not in support}
        if not violated:
            for a, b in isys.implications:
                if assignment[a] > 0 and assignment[b] <= 0:
                    raise InternalError("implication violated by max-support point")
            _check_assignment(base, assignment)
            return assignment
        pinned.update(violated)
    raise InternalError("implication saturation failed to terminate")
