"""Firing semantics: fireability, run effects, validation, dval and Pre/Post sets.

Two firing modes exist.  In "q" mode coefficients act on markings that may go
negative, so every step is fireable.  In "qplus" mode every intermediate
marking must stay entrywise nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .core import Marking, Net, Run, SparseMatrix, Step, UdpnError, mode_matrix

MODE_Q = "q"
MODE_QPLUS = "qplus"


@dataclass(frozen=True)
class Failure:
    step_index: int
    place: str
    datum: str
    shortfall: Fraction


@dataclass(frozen=True)
class Verdict:
    ok: bool
    failure: Optional[Failure] = None

    def __post_init__(self):
        if self.ok == (self.failure is not None):
            raise UdpnError("verdict must carry a failure exactly when not ok")


def _check_mode(mode: str) -> None:
    if mode not in (MODE_Q, MODE_QPLUS):
        raise UdpnError(f"unknown firing mode {mode!r}")


def dval_marking(m: Marking) -> set[str]:
    """Data values with a nonzero entry in some place."""
    return m.dval()


def dval_run(net: Net, run: Run) -> set[str]:
    """Data values used by some step's mode, restricted to vars(t)."""
    out: set[str] = set()
    for step in run:
        needed = net.vars_of(step.transition)
        out.update(a for x, a in step.mode.items() if x in needed)
    return out


def vars_of(net: Net, t: str) -> set[str]:
    return set(net.vars_of(t))


def step_consumption(net: Net, step: Step) -> SparseMatrix:
    """c * F(.,t) * P, the places x data matrix of tokens the step consumes."""
    return net.pre_matrix(step.transition).matmul(mode_matrix(step)).scale(step.coefficient)


def step_effect(net: Net, step: Step) -> SparseMatrix:
    """c * delta(t) * P, the places x data displacement of the step."""
    return net.delta(step.transition).matmul(mode_matrix(step)).scale(step.coefficient)


def step_fireable(m: Marking, step: Step, mode: str = MODE_QPLUS) -> bool:
    """In q mode always true; in qplus mode the consumed tokens must be present."""
    _check_mode(mode)
    if mode == MODE_Q:
        return True
    return m.entries.sub(step_consumption(m.net, step)).is_nonnegative()


def fire_step(m: Marking, step: Step) -> Marking:
    return m.add_matrix(step_effect(m.net, step))


def run_effect(net: Net, run: Run) -> SparseMatrix:
    total = SparseMatrix()
    for step in run:
        total = total.add(step_effect(net, step))
    return total


def validate_run(i: Marking, run: Run, f: Marking, mode: str = MODE_QPLUS) -> Verdict:
    """Check that the run leads from i to f, with nonnegative prefixes in qplus mode.

    The first failing prefix is reported: either a negative intermediate entry
    (identified by step index, place and datum) or, if all steps fire, the
    mismatch between the reached and the expected final marking.
    """
    _check_mode(mode)
    if i.net != f.net:
        raise UdpnError("initial and final markings belong to different nets")
    net = i.net
    current = i.entries
    for idx, step in enumerate(run):
        net.vars_of(step.transition)
        if mode == MODE_QPLUS:
            after_consume = current.sub(step_consumption(net, step))
            bad = _first_negative(after_consume)
            if bad is not None:
                (p, a), v = bad
                return Verdict(False, Failure(idx, p, a, -v))
        current = current.add(step_effect(net, step))
        if mode == MODE_QPLUS:
            bad = _first_negative(current)
            if bad is not None:
                (p, a), v = bad
                return Verdict(False, Failure(idx, p, a, -v))
    diff = f.entries.sub(current)
    if not diff.is_zero():
        (p, a), v = next(iter(diff.items()))
        return Verdict(False, Failure(len(run), p, a, v))
    return Verdict(True)


def _first_negative(m: SparseMatrix):
    for key, v in m.items():
        if v < 0:
            return key, v
    return None


def pre_set(net: Net, run: Run) -> set[tuple[str, str]]:
    """(place, datum) pairs consumed by some step, regardless of coefficient."""
    out: set[tuple[str, str]] = set()
    for step in run:
        for (p, x), _n in net.pre_matrix(step.transition).raw().items():
            out.add((p, step.mode[x]))
    return out


def post_set(net: Net, run: Run) -> set[tuple[str, str]]:
    """(place, datum) pairs produced by some step, regardless of coefficient."""
    out: set[tuple[str, str]] = set()
    for step in run:
        for (p, x), _n in net.post_matrix(step.transition).raw().items():
            out.add((p, step.mode[x]))
    return out
