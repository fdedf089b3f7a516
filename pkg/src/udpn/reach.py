"""Reachability solvers over rational and nonnegative-rational semantics.

`q_reach` decides reachability when markings may go negative: a final marking
is reachable iff the marking difference is a sum of per-transition histogram
effects over a bounded data universe.  `qplus_reach` decides reachability with
nonnegative intermediate markings via a pipeline: make the net loop-less, fix
a bounded data universe, encode a prefix schema / middle run / suffix schema
as linear constraints with positivity implications, solve, and turn the
solution into a witness run that is independently validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (InternalError, Marking, Net, RESERVED_DATA_PREFIX, Run,
                   Step, UdpnError, ZERO, sorted_data)
from .histograms import Histogram, expand_to_steps, histogram
from .linsolve import (REL_EQ, REL_GE, REL_LE, ImplicationSystem,
                       LinearSystem, feasible, solve_implications)
from .semantics import (MODE_Q, MODE_QPLUS, dval_marking, post_set, pre_set,
                        validate_run)
from .transforms import project_witness, to_loopless


@dataclass(frozen=True)
class ReachStats:
    universe: tuple[str, ...]
    variable_count: int
    constraint_count: int
    solver_pivots: int


@dataclass(frozen=True)
class ReachResult:
    reachable: bool
    witness: Optional[Run]
    stats: ReachStats

    def __post_init__(self):
        if self.reachable != (self.witness is not None):
            raise InternalError("witness must be present exactly when reachable")


@dataclass(frozen=True)
class DataUniverse:
    values: tuple[str, ...]


def data_bound(net: Net, i: Marking, f: Marking) -> DataUniverse:
    """Data values of both markings padded with fresh ones up to the bound.

    The bound is |dval(i) + dval(f)| + 1 + (largest variable count of any
    transition); some witness run needs no more distinct data values.
    """
    known = sorted_data(dval_marking(i) | dval_marking(f))
    size = len(known) + 1 + net.max_vars()
    taken = set(known)
    fresh = []
    k = 0
    while len(known) + len(fresh) < size:
        name = f"{RESERVED_DATA_PREFIX}{k}"
        if name not in taken:
            fresh.append(name)
        k += 1
    return DataUniverse(tuple(known + fresh))


def _check_instance(net: Net, i: Marking, f: Marking, nonnegative: bool) -> None:
    if i.net != net or f.net != net:
        raise UdpnError("markings do not belong to the given net")
    if nonnegative and not (i.is_nonnegative() and f.is_nonnegative()):
        raise UdpnError("markings must be nonnegative in this mode")


def _hist_vars(tag, t: str, rows, universe):
    return {(x, a): (tag, t, x, a) for x in rows for a in universe}


def _hist_constraints(varmap, rows, universe):
    """Equal row sums (tied to the first row) and column sums bounded by it."""
    out = []
    ref = rows[0]
    ref_row = {varmap[(ref, a)]: Fraction(1) for a in universe}
    for x in rows[1:]:
        coeffs = {varmap[(x, a)]: Fraction(1) for a in universe}
        for v, c in ref_row.items():
            coeffs[v] = coeffs.get(v, ZERO) - c
        out.append((coeffs, REL_EQ, ZERO))
    for a in universe:
        coeffs = {varmap[(x, a)]: Fraction(1) for x in rows}
        for v, c in ref_row.items():
            coeffs[v] = coeffs.get(v, ZERO) - c
        out.append((coeffs, REL_LE, ZERO))
    return out


def _hist_from_solution(varmap, assignment) -> Histogram:
    entries = {}
    for (x, a), v in varmap.items():
        value = assignment[v]
        if value != 0:
            entries[(x, a)] = value
    return histogram(entries)


def _active_transitions(net: Net):
    return [t for t in net.transitions if net.vars_of(t)]


# ---------------------------------------------------------------------------
# reachability with markings free to go negative


def q_reach(net: Net, i: Marking, f: Marking, stats_out: Optional[dict] = None) -> ReachResult:
    """Decide reachability in the sign-free semantics, with a validated witness.

    Feasibility of: f - i equals the sum over transitions of the displacement
    applied to a histogram over the bounded data universe.  Complete because
    some witness stays within the universe and every run yields histograms.
    """
    _check_instance(net, i, f, nonnegative=False)
    universe = data_bound(net, i, f).values
    transitions = _active_transitions(net)
    varmaps = {}
    variables = []
    constraints = []
    for t in transitions:
        rows = sorted(net.vars_of(t))
        varmaps[t] = _hist_vars("h", t, rows, universe)
        variables.extend(varmaps[t][(x, a)] for x in rows for a in universe)
        constraints.extend(_hist_constraints(varmaps[t], rows, universe))
    diff = f.entries.sub(i.entries)
    for p in net.places:
        for a in universe:
            coeffs = {}
            for t in transitions:
                for x, d in net.delta(t).row(p).items():
                    v = varmaps[t][(x, a)]
                    coeffs[v] = coeffs.get(v, ZERO) + d
            constraints.append((coeffs, REL_EQ, diff.get(p, a)))
    system = LinearSystem(variables, constraints)
    lp_stats: dict = {}
    solution = feasible(system, stats=lp_stats)
    stats = ReachStats(universe, len(variables), len(constraints),
                       lp_stats.get("pivots", 0))
    if stats_out is not None:
        stats_out.update(lp_stats)
    if solution is None:
        return ReachResult(False, None, stats)
    witness: Run = []
    for t in transitions:
        witness.extend(expand_to_steps(net, t, _hist_from_solution(varmaps[t], solution)))
    verdict = validate_run(i, witness, f, MODE_Q)
    if not verdict.ok:
        raise InternalError("extracted witness fails validation")
    return ReachResult(True, witness, stats)


# ---------------------------------------------------------------------------
# encoding for the nonnegative semantics


@dataclass(frozen=True)
class QplusDecode:
    """Ties solver variables back to markings and histograms."""

    net: Net
    universe: tuple[str, ...]
    i: Marking
    f: Marking
    iprime: dict
    fprime: dict
    middle: dict
    prefix: tuple
    suffix: tuple


def _require_loopless(net: Net) -> None:
    for t in net.transitions:
        if net.pre_matrix(t).rows() & net.post_matrix(t).rows():
            raise UdpnError(f"net is not loop-less at transition {t!r}")


def full_block_bounds(net: Net, universe) -> tuple[int, int]:
    """Complete schema lengths: consumed and produced (place, datum) pairs."""
    pre = max(1, len(net.pre_places()) * len(universe))
    post = max(1, len(net.post_places()) * len(universe))
    return pre, post


def encode_qplus(net: Net, i: Marking, f: Marking, universe,
                 prefix_blocks: Optional[int] = None,
                 suffix_blocks: Optional[int] = None):
    """Build the implication system for the loop-less net and data universe.

    The system has: marking variable arrays for the two intermediate markings;
    a histogram per transition for the middle sign-free run, with implications
    forcing consumed (produced) tokens to be present in the first (second)
    intermediate marking; and prefix/suffix schemas of single-transition
    histogram steps whose partial effects must keep every marking nonnegative.
    Block counts below the full bounds keep the system sound but incomplete.
    """
    _require_loopless(net)
    _check_instance(net, i, f, nonnegative=True)
    universe = tuple(universe)
    uni_set = set(universe)
    for m in (i, f):
        if not dval_marking(m) <= uni_set:
            raise UdpnError("marking uses a datum outside the data universe")
    pre_full, post_full = full_block_bounds(net, universe)
    if prefix_blocks is None:
        prefix_blocks = pre_full
    if suffix_blocks is None:
        suffix_blocks = post_full
    transitions = _active_transitions(net)
    cells = [(p, a) for p in net.places for a in universe]

    iprime = {(p, a): ("im", p, a) for p, a in cells}
    fprime = {(p, a): ("fm", p, a) for p, a in cells}
    variables = list(iprime.values()) + list(fprime.values())
    constraints = []
    implications = []

    # middle sign-free run with positivity implications
    middle = {}
    for t in transitions:
        rows = sorted(net.vars_of(t))
        middle[t] = _hist_vars("h", t, rows, universe)
        variables.extend(middle[t][(x, a)] for x in rows for a in universe)
        constraints.extend(_hist_constraints(middle[t], rows, universe))
        for (p, x), _n in sorted(net.pre_matrix(t).raw().items()):
            for a in universe:
                implications.append((middle[t][(x, a)], iprime[(p, a)]))
        for (p, x), _n in sorted(net.post_matrix(t).raw().items()):
            for a in universe:
                implications.append((middle[t][(x, a)], fprime[(p, a)]))
    for p, a in cells:
        coeffs = {fprime[(p, a)]: Fraction(1), iprime[(p, a)]: Fraction(-1)}
        for t in transitions:
            for x, d in net.delta(t).row(p).items():
                v = middle[t][(x, a)]
                coeffs[v] = coeffs.get(v, ZERO) + (-d)
        constraints.append((coeffs, REL_EQ, ZERO))

    def schema(tag, blocks, start):
        """Single-transition histogram micro-steps with explicit states.

        `start` maps each cell to its initial (variable or None, constant)
        pair.  Each micro-step introduces fresh state variables only for the
        cells its transition touches; other cells carry their state forward.
        Implicit variable nonnegativity enforces marking nonnegativity at
        every micro-step boundary.  Returns (steps, final state map).
        """
        steps = []
        state = dict(start)
        k = 0
        for _m in range(blocks):
            for t in transitions:
                rows = sorted(net.vars_of(t))
                varmap = _hist_vars((tag, k), t, rows, universe)
                variables.extend(varmap[(x, a)] for x in rows for a in universe)
                constraints.extend(_hist_constraints(varmap, rows, universe))
                steps.append((t, varmap))
                delta = net.delta(t)
                for p in sorted(delta.rows()):
                    drow = delta.row(p)
                    for a in universe:
                        old_var, old_const = state[(p, a)]
                        new = (tag, "s", k, p, a)
                        variables.append(new)
                        coeffs = {new: Fraction(1)}
                        if old_var is not None:
                            coeffs[old_var] = coeffs.get(old_var, ZERO) - 1
                        for x, d in drow.items():
                            v = varmap[(x, a)]
                            coeffs[v] = coeffs.get(v, ZERO) - d
                        constraints.append((coeffs, REL_EQ, old_const))
                        state[(p, a)] = (new, ZERO)
                k += 1
        return steps, state

    start = {cell: (None, i.entries.get(*cell)) for cell in cells}
    prefix_steps, pre_state = schema("g", prefix_blocks, start)
    for cell in cells:
        var, const = pre_state[cell]
        coeffs = {iprime[cell]: Fraction(1)}
        if var is not None:
            coeffs[var] = coeffs.get(var, ZERO) - 1
        constraints.append((coeffs, REL_EQ, const))

    start = {cell: (fprime[cell], ZERO) for cell in cells}
    suffix_steps, post_state = schema("k", suffix_blocks, start)
    for cell in cells:
        var, const = post_state[cell]
        coeffs = {} if var is None else {var: Fraction(1)}
        constraints.append((coeffs, REL_EQ, f.entries.get(*cell) - const))

    system = ImplicationSystem(LinearSystem(variables, constraints),
                               tuple(implications))
    decode = QplusDecode(net, universe, i, f, iprime, fprime, middle,
                         tuple(prefix_steps), tuple(suffix_steps))
    return system, decode


def extract_witness(assignment, decode: QplusDecode) -> Run:
    """Turn a solution of the encoded system into a validated witness run.

    Prefix and suffix histogram steps expand directly (single-transition
    histogram effects between nonnegative markings are always fireable in a
    loop-less net).  The middle sign-free run is repeated n times at scale
    1/n, with n large enough that no consumed token stock is ever exhausted.
    """
    net = decode.net
    run: Run = []
    for t, varmap in decode.prefix:
        h = _hist_from_solution(varmap, assignment)
        run.extend(expand_to_steps(net, t, h))

    sigma: Run = []
    for t in sorted(decode.middle):
        sigma.extend(expand_to_steps(net, t, _hist_from_solution(decode.middle[t], assignment)))
    if sigma:
        omega = ZERO
        for step in sigma:
            pre = net.pre_matrix(step.transition)
            post = net.post_matrix(step.transition)
            weight = sum(pre.raw().values(), ZERO) + sum(post.raw().values(), ZERO)
            omega += step.coefficient * weight
        stock = []
        for p, a in pre_set(net, sigma):
            stock.append(assignment[decode.iprime[(p, a)]])
        for p, a in post_set(net, sigma):
            stock.append(assignment[decode.fprime[(p, a)]])
        if stock:
            c = min(stock)
            if c <= 0:
                raise InternalError("middle run touches an empty token stock")
            n = max(int(math.ceil(omega / c)), 2)
        else:
            n = 2
        piece = [Step(s.coefficient / n, s.transition, s.mode) for s in sigma]
        for _ in range(n):
            run.extend(piece)

    for t, varmap in decode.suffix:
        h = _hist_from_solution(varmap, assignment)
        run.extend(expand_to_steps(net, t, h))

    verdict = validate_run(decode.i, run, decode.f, MODE_QPLUS)
    if not verdict.ok:
        raise InternalError(f"extracted witness fails validation: {verdict.failure}")
    return run


def _ladder(limit: int):
    out = [0]
    k = 1
    while k < limit:
        out.append(k)
        k *= 2
    out.append(limit)
    return sorted(set(out))


# block counts tried during the cheap positive search on every universe size
_CHEAP_BLOCKS = 2


def _universe_ladder(full: tuple, known: int) -> list:
    """Prefixes of the full universe: known data first, then one fresh, all."""
    sizes = sorted({max(1, known), min(known + 1, len(full)), len(full)})
    return [full[:s] for s in sizes]


def qplus_reach(net: Net, i: Marking, f: Marking) -> ReachResult:
    """Decide reachability with nonnegative intermediate markings.

    Pipeline: a sign-free precheck, the loop-less transformation, a cheap
    positive search over growing data universes and schema lengths, a relaxed
    necessary-condition check, then the exhaustive search on the full
    universe.  Short schemas and small universes can only produce genuine
    witnesses, so the answer is sound at every stage; only the full-length
    schema on the full universe may conclude unreachability.  Every positive
    answer carries a witness validated against the original net.
    """
    _check_instance(net, i, f, nonnegative=True)
    pivots = 0

    base = q_reach(net, i, f)
    pivots += base.stats.solver_pivots
    if not base.reachable:
        stats = ReachStats(base.stats.universe, base.stats.variable_count,
                           base.stats.constraint_count, pivots)
        return ReachResult(False, None, stats)
    if i == f:
        return ReachResult(True, [], ReachStats(base.stats.universe, 0, 0, pivots))

    net2, i2, f2, mapping = to_loopless(net, i, f)
    full_universe = data_bound(net2, i2, f2).values
    known = len(dval_marking(i2) | dval_marking(f2))
    lp_stats: dict = {}
    last_stats = None

    def attempt(universe, rung):
        nonlocal last_stats
        pre_full, post_full = full_block_bounds(net2, universe)
        system, decode = encode_qplus(net2, i2, f2, universe,
                                      prefix_blocks=min(rung, pre_full),
                                      suffix_blocks=min(rung, post_full))
        solution = solve_implications(system, stats=lp_stats)
        last_stats = ReachStats(tuple(universe), len(system.base.variables),
                                len(system.base.constraints),
                                pivots + lp_stats.get("pivots", 0))
        if solution is None:
            return None
        witness2 = extract_witness(solution, decode)
        witness = project_witness(net, witness2, mapping)
        verdict = validate_run(i, witness, f, MODE_QPLUS)
        if not verdict.ok:
            raise InternalError("projected witness fails validation")
        return ReachResult(True, witness, last_stats)

    # cheap positive search: small universes and short schemas first
    for universe in _universe_ladder(full_universe, known):
        for rung in range(_CHEAP_BLOCKS + 1):
            found = attempt(universe, rung)
            if found is not None:
                return found

    # necessary condition before committing to the exhaustive search
    relaxed = _relaxed_system(net2, i2, f2, full_universe)
    if solve_implications(relaxed, stats=lp_stats) is None:
        pivots += lp_stats.get("pivots", 0)
        stats = ReachStats(full_universe, len(relaxed.base.variables),
                           len(relaxed.base.constraints), pivots)
        return ReachResult(False, None, stats)

    pre_full, post_full = full_block_bounds(net2, full_universe)
    for rung in _ladder(max(pre_full, post_full)):
        if rung <= _CHEAP_BLOCKS:
            continue  # already tried during the cheap search
        found = attempt(full_universe, rung)
        if found is not None:
            return found
    return ReachResult(False, None, last_stats)


def _relaxed_system(net: Net, i: Marking, f: Marking, universe) -> ImplicationSystem:
    """Necessary conditions only: state equations without path nonnegativity.

    The prefix and suffix are summarized by one unconstrained histogram per
    transition, so any true witness induces a solution; unsolvability proves
    unreachability.
    """
    transitions = _active_transitions(net)
    cells = [(p, a) for p in net.places for a in universe]
    iprime = {(p, a): ("im", p, a) for p, a in cells}
    fprime = {(p, a): ("fm", p, a) for p, a in cells}
    variables = list(iprime.values()) + list(fprime.values())
    constraints = []
    implications = []
    maps = {}
    for tag in ("g", "h", "k"):
        maps[tag] = {}
        for t in transitions:
            rows = sorted(net.vars_of(t))
            varmap = _hist_vars(tag, t, rows, universe)
            maps[tag][t] = varmap
            variables.extend(varmap[(x, a)] for x in rows for a in universe)
            constraints.extend(_hist_constraints(varmap, rows, universe))
    for t in transitions:
        for (p, x), _n in sorted(net.pre_matrix(t).raw().items()):
            for a in universe:
                implications.append((maps["h"][t][(x, a)], iprime[(p, a)]))
        for (p, x), _n in sorted(net.post_matrix(t).raw().items()):
            for a in universe:
                implications.append((maps["h"][t][(x, a)], fprime[(p, a)]))
    for p, a in cells:
        coeffs = {iprime[(p, a)]: Fraction(-1)}
        for t in transitions:
            for x, d in net.delta(t).row(p).items():
                v = maps["g"][t][(x, a)]
                coeffs[v] = coeffs.get(v, ZERO) + d
        constraints.append((coeffs, REL_EQ, -i.entries.get(p, a)))
        coeffs = {fprime[(p, a)]: Fraction(1), iprime[(p, a)]: Fraction(-1)}
        for t in transitions:
            for x, d in net.delta(t).row(p).items():
                v = maps["h"][t][(x, a)]
                coeffs[v] = coeffs.get(v, ZERO) - d
        constraints.append((coeffs, REL_EQ, ZERO))
        coeffs = {fprime[(p, a)]: Fraction(1)}
        for t in transitions:
            for x, d in net.delta(t).row(p).items():
                v = maps["k"][t][(x, a)]
                coeffs[v] = coeffs.get(v, ZERO) + d
        constraints.append((coeffs, REL_EQ, f.entries.get(p, a)))
    return ImplicationSystem(LinearSystem(variables, constraints),
                             tuple(implications))
