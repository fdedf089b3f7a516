"""Run transformations that shrink the set of data values, and the loop-less
net transformation with witness back-mapping.

The data-shrinking pipeline works on one step at a time: `rotate` cycles the
mode's assignments through a set E of data values, `uniformize` averages a
step over all rotations of E, `replace` moves a step off a datum alpha, and
`decrease` combines them to produce an equivalent run that avoids alpha
entirely.  `reduce_data` iterates `decrease` until the number of data values
falls under the bound |dval(i) + dval(f)| + 1 + max vars per transition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (InternalError, Marking, Net, RESERVED_PLACE_PREFIX,
                   RESERVED_TRANSITION_PREFIX, Run, Step, UdpnError,
                   make_step, sorted_data)
from .semantics import dval_marking, dval_run, validate_run


def rotate(E: set[str], step: Step) -> Step:
    """Shift every assignment inside E to its cyclic predecessor.

    Column alpha of the new mode matrix equals column next(alpha) of the old
    one, next being the cyclic successor in the fixed data order; assignments
    outside E are untouched.
    """
    if not E:
        raise UdpnError("rotate requires a non-empty data set")
    order = sorted_data(E)
    prev = {order[k]: order[k - 1] for k in range(len(order))}
    mode = {x: (prev[a] if a in prev else a) for x, a in step.mode.items()}
    return Step(step.coefficient, step.transition, mode)


def uniformize(E: set[str], step: Step) -> Run:
    """All |E| rotations of the step, each at 1/|E| of the coefficient."""
    if not E:
        raise UdpnError("uniformize requires a non-empty data set")
    scaled = Step(step.coefficient / len(E), step.transition, dict(step.mode))
    out = []
    current = scaled
    for _ in range(len(E)):
        out.append(current)
        current = rotate(E, current)
    return out


def replace(alpha: str, E: set[str], step: Step) -> Step:
    """Reassign every variable mapped to alpha onto an unused datum from E.

    Steps not using alpha pass through.  The replacement target is the
    smallest datum of E absent from the mode's image, so the result never
    mentions alpha and stays injective.
    """
    if alpha in E:
        raise UdpnError("replace target must lie outside the replacement pool")
    used = set(step.mode.values())
    if alpha not in used:
        return step
    candidates = [b for b in sorted_data(E) if b not in used]
    if not candidates:
        raise UdpnError("replace inapplicable: no unused datum in the pool")
    beta = candidates[0]
    mode = {x: (beta if a == alpha else a) for x, a in step.mode.items()}
    return Step(step.coefficient, step.transition, mode)


def decrease(E: set[str], alpha: str, run: Run) -> Run:
    """Uniformized replacement of alpha across the whole run."""
    out: Run = []
    for step in run:
        out.extend(uniformize(E, replace(alpha, E, step)))
    return out


def data_bound_size(net: Net, i: Marking, f: Marking) -> int:
    return len(dval_marking(i) | dval_marking(f)) + 1 + net.max_vars()


def reduce_data(i: Marking, f: Marking, run: Run, mode: str) -> Run:
    """Shrink the run's data values under the bound, preserving endpoints.

    Each pass removes the largest datum foreign to both endpoint markings.
    The output is revalidated; a validation failure is a bug, not bad input.
    """
    net = i.net
    verdict = validate_run(i, run, f, mode)
    if not verdict.ok:
        raise UdpnError("reduce_data requires a valid run between the markings")
    bound = data_bound_size(net, i, f)
    current = list(run)
    while len(dval_run(net, current)) > bound:
        frozen = dval_marking(i) | dval_marking(f)
        removable = sorted_data(dval_run(net, current) - frozen)
        alpha = removable[-1]
        E = set(removable[:-1])
        current = decrease(E, alpha, current)
        if alpha in dval_run(net, current):
            raise InternalError("decrease failed to remove the chosen datum")
    check = validate_run(i, current, f, mode)
    if not check.ok:
        raise InternalError("reduced run no longer validates")
    return current


@dataclass(frozen=True)
class LoopMapping:
    """Bookkeeping for the loop-less transformation.

    `shadow` maps each original place to its buffer place; `copies` maps each
    original place to the transition draining the buffer back into it.
    """

    shadow: dict[str, str]
    copies: dict[str, str]
    copy_variable: str

    def is_copy(self, transition: str) -> bool:
        return transition in set(self.copies.values())


def to_loopless(net: Net, i: Marking, f: Marking):
    """Split every transition's self-loop places through buffer places.

    Outputs to a place that the same transition also consumes from go to a
    new buffer place instead; one copy transition per place moves a single
    datum from the buffer back.  Nonnegative-reachability verdicts between
    the extended markings match the original instance.
    """
    def fresh(base: str, taken) -> str:
        name = base
        while name in taken:
            name += "_"
        return name

    # transforming an already-transformed net must not collide with its names
    shadow = {}
    for p in net.places:
        shadow[p] = fresh(RESERVED_PLACE_PREFIX + p,
                          set(net.places) | set(shadow.values()))
    copies = {}
    for p in net.places:
        copies[p] = fresh(RESERVED_TRANSITION_PREFIX + p,
                          set(net.transitions) | set(copies.values()))
    variables = list(net.variables)
    copy_var = variables[0] if variables else "__copy_x"
    if not variables:
        variables = [copy_var]

    places = list(net.places) + [shadow[p] for p in net.places]
    transitions = list(net.transitions) + [copies[p] for p in net.places]
    flow_in = dict(net.flow_in)
    flow_out = {}
    for (t, p), arc in net.flow_out.items():
        if (p, t) in net.flow_in:
            flow_out[(t, shadow[p])] = dict(arc)
        else:
            flow_out[(t, p)] = dict(arc)
    for p in net.places:
        flow_in[(shadow[p], copies[p])] = {copy_var: 1}
        flow_out[(copies[p], p)] = {copy_var: 1}

    net2 = Net(places, transitions, variables, flow_in, flow_out)
    for t in net2.transitions:
        if net2.pre_matrix(t).rows() & net2.post_matrix(t).rows():
            raise InternalError(f"transition {t!r} still shares pre and post places")
    i2 = Marking(net2, dict(i.entries.raw()))
    f2 = Marking(net2, dict(f.entries.raw()))
    return net2, i2, f2, LoopMapping(shadow, copies, copy_var)


def project_witness(net: Net, run: Run, mapping: LoopMapping) -> Run:
    """Drop copy-transition steps and rebind the rest to the original net."""
    out: Run = []
    for step in run:
        if mapping.is_copy(step.transition):
            continue
        out.append(make_step(net, step.coefficient, step.transition, dict(step.mode)))
    return out
