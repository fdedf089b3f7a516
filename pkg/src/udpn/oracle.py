"""Independent oracles: random run generation, brute-force implication
solving, and a second reachability equation emitter.

These exist to cross-check the main solvers.  They share only the raw LP
feasibility core with the rest of the package; all modelling (equations,
subsets, probes) is written independently from first principles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core import Marking, Net, Run, UdpnError, ZERO, make_step
from .linsolve import (REL_EQ, REL_LE, ImplicationSystem, LinearSystem,
                       _optimize, feasible)
from .semantics import step_consumption, fire_step, step_fireable


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_places: int = 4
    max_transitions: int = 3
    max_variables: int = 2
    max_data: int = 4
    max_steps: int = 6
    denominator_bound: int = 4

    def __post_init__(self):
        for name in ("max_places", "max_transitions", "max_variables",
                     "max_data", "max_steps", "denominator_bound"):
            if getattr(self, name) < 1:
                raise UdpnError(f"{name} must be at least 1")


def _data_pool(i: Marking, cfg: GenConfig) -> list[str]:
    pool = sorted(i.dval())
    k = 0
    while len(pool) < cfg.max_data:
        name = f"v{k}"
        if name not in pool:
            pool.append(name)
        k += 1
    return sorted(pool[:max(cfg.max_data, 1)])


def random_run(net: Net, i: Marking, cfg: GenConfig):
    """A nonnegativity-respecting run from i, by rejection sampling.

    Each attempted step draws a transition, an injective mode over a bounded
    data pool, and a coefficient sampled from a denominator-bounded grid kept
    under the largest value that leaves all consumed entries nonnegative.
    Deterministic per seed; returns (run, reached marking).
    """
    if not i.is_nonnegative():
        raise UdpnError("random_run starts from a nonnegative marking")
    rng = random.Random(cfg.seed)
    pool = _data_pool(i, cfg)
    run: Run = []
    current = i
    usable = [t for t in net.transitions if len(net.vars_of(t)) <= len(pool)]
    if not usable:
        return [], i
    target = rng.randint(1, cfg.max_steps)
    attempts = 0
    while len(run) < target and attempts < 20 * cfg.max_steps:
        attempts += 1
        t = rng.choice(usable)
        needed = sorted(net.vars_of(t))
        values = rng.sample(pool, len(needed))
        probe = make_step(net, 1, t, dict(zip(needed, values)))
        consumed = step_consumption(net, probe)
        cap = None
        for (p, a), v in consumed.items():
            if v > 0:
                room = current.get(p, a) / v
                cap = room if cap is None else min(cap, room)
        if cap is None:
            cap = Fraction(2)
        den = rng.randint(1, cfg.denominator_bound)
        top = (cap * den).__floor__()
        if top < 1:
            continue
        c = Fraction(rng.randint(1, top), den)
        step = make_step(net, c, t, dict(zip(needed, values)))
        if not step_fireable(current, step, "qplus"):
            continue
        run.append(step)
        current = fire_step(current, step)
    return run, current


def random_net(cfg: GenConfig) -> Net:
    """A random small net; arcs are sparse and multiplicities small."""
    rng = random.Random(cfg.seed)
    places = [f"p{k}" for k in range(rng.randint(1, cfg.max_places))]
    transitions = [f"t{k}" for k in range(rng.randint(1, cfg.max_transitions))]
    variables = [f"x{k}" for k in range(rng.randint(1, cfg.max_variables))]
    flow_in = {}
    flow_out = {}
    for t in transitions:
        used = rng.sample(variables, rng.randint(1, len(variables)))
        for p in places:
            if rng.random() < 0.4:
                arc = {x: rng.randint(1, 2) for x in used if rng.random() < 0.6}
                if arc:
                    flow_in[(p, t)] = arc
            if rng.random() < 0.4:
                arc = {x: rng.randint(1, 2) for x in used if rng.random() < 0.6}
                if arc:
                    flow_out[(t, p)] = arc
    return Net(places, transitions, variables, flow_in, flow_out)


def random_marking(net: Net, cfg: GenConfig, seed_shift: int = 1) -> Marking:
    rng = random.Random(cfg.seed + seed_shift)
    pool = [f"v{k}" for k in range(cfg.max_data)]
    entries = {}
    for p in net.places:
        for a in pool:
            if rng.random() < 0.5:
                entries[(p, a)] = Fraction(rng.randint(1, 4),
                                           rng.randint(1, cfg.denominator_bound))
    return Marking(net, entries)


def brute_implication(isys: ImplicationSystem) -> bool:
    """Exhaustive solvability check for small implication systems.

    Enumerates the subsets of antecedent variables pinned to zero.  For each
    subset the remaining antecedents and their consequents must all admit
    positive values in one common solution; per-variable maximization probes
    establish this (a convex average of positive probes is positive on all).
    Any satisfying assignment induces such a subset, so the enumeration over
    antecedent subsets is exhaustive.
    """
    base = isys.base
    if len(base.variables) > 12:
        raise UdpnError("brute_implication is limited to 12 variables")
    antecedents = sorted({a for a, _b in isys.implications})
    for size in range(len(antecedents) + 1):
        for zeros in combinations(antecedents, size):
            zset = set(zeros)
            constraints = list(base.constraints)
            for v in zeros:
                constraints.append(({v: Fraction(1)}, REL_EQ, ZERO))
            pinned = LinearSystem(base.variables, constraints)
            if feasible(pinned) is None:
                continue
            must_be_positive = set(antecedents) - zset
            for a, b in isys.implications:
                if a not in zset:
                    must_be_positive.add(b)
            if all(_probe_positive(pinned, v) for v in sorted(must_be_positive)):
                return True
    return False


def _probe_positive(sys: LinearSystem, v: str) -> bool:
    """Can v exceed zero in some solution?  Maximize min(v, 1)."""
    aux = f"__probe__{v}"
    constraints = list(sys.constraints)
    constraints.append(({aux: Fraction(1), v: Fraction(-1)}, REL_LE, ZERO))
    constraints.append(({aux: Fraction(1)}, REL_LE, Fraction(1)))
    probe = LinearSystem(tuple(sys.variables) + (aux,), constraints)
    result = _optimize(probe, {aux: Fraction(1)})
    if result is None:
        return False
    value, _assignment = result
    return value > 0


def naive_q_reach(net: Net, i: Marking, f: Marking) -> bool:
    """Second, independently written sign-free reachability emitter.

    Works straight off the flow dictionaries: one unknown per (transition,
    variable, datum), balance equations per (place, datum), and row/column
    sum conditions making each block a histogram.  Used only to cross-check.
    """
    dvals = sorted({a for (_p, a) in i.entries.raw()} |
                   {a for (_p, a) in f.entries.raw()})
    per_transition = {}
    for t in net.transitions:
        used = set()
        for (p, tt), arc in net.flow_in.items():
            if tt == t:
                used.update(arc)
        for (tt, p), arc in net.flow_out.items():
            if tt == t:
                used.update(arc)
        per_transition[t] = sorted(used)
    widest = max((len(v) for v in per_transition.values()), default=0)
    universe = list(dvals)
    k = 0
    while len(universe) < len(dvals) + 1 + widest:
        name = f"_d{k}"
        if name not in universe:
            universe.append(name)
        k += 1

    variables = []
    constraints = []
    for t, used in per_transition.items():
        for x in used:
            for a in universe:
                variables.append(("N", t, x, a))
        if not used:
            continue
        first = used[0]
        for x in used[1:]:
            row = {("N", t, x, a): Fraction(1) for a in universe}
            for a in universe:
                row[("N", t, first, a)] = row.get(("N", t, first, a), ZERO) - 1
            constraints.append((row, REL_EQ, ZERO))
        for a in universe:
            col = {("N", t, x, a): Fraction(1) for x in used}
            for b in universe:
                col[("N", t, first, b)] = col.get(("N", t, first, b), ZERO) - 1
            constraints.append((col, REL_LE, ZERO))
    for p in net.places:
        for a in universe:
            row = {}
            for (tt, pp), arc in net.flow_out.items():
                if pp == p:
                    for x, n in arc.items():
                        key = ("N", tt, x, a)
                        row[key] = row.get(key, ZERO) + n
            for (pp, tt), arc in net.flow_in.items():
                if pp == p:
                    for x, n in arc.items():
                        key = ("N", tt, x, a)
                        row[key] = row.get(key, ZERO) - n
            goal = f.entries.get(p, a) - i.entries.get(p, a)
            constraints.append((row, REL_EQ, goal))
    system = LinearSystem(variables, constraints)
    return feasible(system) is not None
