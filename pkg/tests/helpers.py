"""Shared fixtures and random generators for the test suite."""

import random
from fractions import Fraction

from udpn import (GenConfig, ImplicationSystem, LinearSystem, Marking, Net,
                  REL_EQ, REL_GE, REL_LE, make_step, random_marking,
                  random_net, random_run)


def golden_net() -> Net:
    return Net(
        places=["p1", "p2", "p3", "p4"],
        transitions=["t"],
        variables=["x", "y", "z"],
        flow_in={("p1", "t"): {"y": 1}, ("p2", "t"): {"x": 1}},
        flow_out={("t", "p3"): {"y": 2}, ("t", "p4"): {"x": 1, "z": 1}},
    )


def golden_i(net: Net) -> Marking:
    return Marking(net, {
        ("p1", "red"): 1, ("p1", "green"): 1,
        ("p2", "blue"): 1,
        ("p3", "red"): 2,
        ("p4", "red"): 1, ("p4", "blue"): 1,
    })


def golden_f(net: Net) -> Marking:
    return Marking(net, {
        ("p1", "red"): 1,
        ("p3", "red"): 2, ("p3", "green"): 2,
        ("p4", "red"): 1, ("p4", "blue"): 2, ("p4", "black"): 1,
    })


def golden_step(net: Net):
    return make_step(net, 1, "t", {"x": "blue", "y": "green", "z": "black"})


def self_loop_net() -> Net:
    """One transition sharing pre and post places (p1 and p2)."""
    return Net(
        places=["p1", "p2", "p3", "p4"],
        transitions=["t"],
        variables=["x", "y", "z"],
        flow_in={("p1", "t"): {"y": 1}, ("p2", "t"): {"x": 1}},
        flow_out={("t", "p1"): {"x": 1}, ("t", "p2"): {"z": 1},
                  ("t", "p3"): {"y": 2}, ("t", "p4"): {"x": 1, "z": 1}},
    )


def padded_net() -> Net:
    """A net with a producer/consumer pair for zero-effect run padding."""
    return Net(
        places=["p1", "p2", "p3"],
        transitions=["move", "mk", "rm"],
        variables=["x", "y"],
        flow_in={("p1", "move"): {"x": 1}, ("p3", "rm"): {"y": 1}},
        flow_out={("move", "p2"): {"x": 1}, ("mk", "p3"): {"y": 1}},
    )


def pad_run(net: Net, run, rng, extra_data):
    """Insert produce-then-consume pairs on fresh data; net effect zero."""
    out = list(run)
    for a in extra_data:
        c = Fraction(rng.randint(1, 6), rng.randint(1, 4))
        pos = rng.randint(0, len(out))
        pair = [make_step(net, c, "mk", {"y": a}),
                make_step(net, c, "rm", {"y": a})]
        out[pos:pos] = pair
    return out


def random_rational(rng, denominator_bound=4, top=4) -> Fraction:
    return Fraction(rng.randint(1, top), rng.randint(1, denominator_bound))


def random_system(rng, max_vars=10, max_constraints=8):
    """A small random linear system; half the draws plant a solution."""
    names = [f"u{k}" for k in range(rng.randint(1, max_vars))]
    planted = None
    if rng.random() < 0.5:
        planted = {v: (random_rational(rng) if rng.random() < 0.6 else Fraction(0))
                   for v in names}
    constraints = []
    for _ in range(rng.randint(1, max_constraints)):
        support = rng.sample(names, rng.randint(1, min(4, len(names))))
        coeffs = {v: Fraction(rng.randint(-3, 3)) for v in support}
        coeffs = {v: c for v, c in coeffs.items() if c}
        rel = rng.choice([REL_EQ, REL_LE, REL_GE])
        if planted is not None:
            lhs = sum((c * planted[v] for v, c in coeffs.items()), Fraction(0))
            slack = Fraction(rng.randint(0, 2))
            const = lhs if rel == REL_EQ else lhs + slack if rel == REL_LE else lhs - slack
        else:
            const = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        constraints.append((coeffs, rel, const))
    return LinearSystem(names, constraints), planted


def random_implication_system(rng, max_vars=10, max_constraints=8, max_implications=6):
    base, _planted = random_system(rng, max_vars, max_constraints)
    names = list(base.variables)
    implications = []
    for _ in range(rng.randint(0, max_implications)):
        a = rng.choice(names)
        b = rng.choice(names)
        if a != b:
            implications.append((a, b))
    return ImplicationSystem(base, tuple(implications))


def random_instance(seed, mix_reachable=True, **caps):
    """A (net, i, f) draw; odd seeds take f from a generated run."""
    cfg = GenConfig(seed=seed, **caps)
    net = random_net(cfg)
    i = random_marking(net, cfg)
    if mix_reachable and seed % 2:
        _run, f = random_run(net, i, cfg)
    else:
        f = random_marking(net, cfg, seed_shift=2)
    return net, i, f


def random_step(net: Net, rng, pool):
    t = rng.choice([t for t in net.transitions if net.vars_of(t)])
    needed = sorted(net.vars_of(t))
    values = rng.sample(pool, len(needed))
    c = random_rational(rng)
    return make_step(net, c, t, dict(zip(needed, values)))
