"""Exact rational arithmetic and the sparse data model for nets, markings and runs.

Everything is built on `fractions.Fraction`; no floating point is used anywhere
in the package.  Matrices are sparse maps from (row, column) label pairs to
nonzero rationals; rows and columns are indexed by arbitrary strings (places,
variables, data values) rather than integer ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional


class UdpnError(Exception):
    """User-facing error: malformed input or violated operation contract."""


class InternalError(UdpnError):
    """Broken internal invariant; signals a bug, never a bad input."""


# Reserved name prefixes; the parser rejects them in user input so that
# generated names (loop-less transformation, data-universe padding) can never
# collide with user names.
RESERVED_PLACE_PREFIX = "__shadow_"
RESERVED_TRANSITION_PREFIX = "__copy_"
RESERVED_DATA_PREFIX = "_d"

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    """Coerce ints / strings / Fractions to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise UdpnError("floating point values are not allowed")
    return Fraction(value)


def data_order_key(datum: str) -> str:
    """Key of the fixed linear order on data values (lexicographic)."""
    return datum


def sorted_data(data: Iterable[str]) -> list[str]:
    return sorted(data, key=data_order_key)


class SparseMatrix:
    """Immutable sparse matrix with string-labelled rows/columns.

    Only nonzero entries are stored.  Arithmetic follows the usual pointwise
    rules restricted to the union of nonzero index sets; matrix product sums
    over the nonzero columns of the left factor.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping] = None):
        cleaned = {}
        if entries:
            for key, value in entries.items():
                v = as_fraction(value)
                if v != 0:
                    cleaned[key] = v
        self._entries = cleaned

    @classmethod
    def zero(cls) -> "SparseMatrix":
        return cls()

    def get(self, row: str, col: str) -> Fraction:
        return self._entries.get((row, col), ZERO)

    def items(self) -> Iterator[tuple[tuple[str, str], Fraction]]:
        """Entries in canonical (row, column) order."""
        return iter(sorted(self._entries.items()))

    def raw(self) -> Mapping[tuple[str, str], Fraction]:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self._entries.values())

    def rows(self) -> set[str]:
        return {r for (r, _) in self._entries}

    def cols(self) -> set[str]:
        return {c for (_, c) in self._entries}

    def row(self, r: str) -> dict[str, Fraction]:
        return {c: v for (rr, c), v in self._entries.items() if rr == r}

    def column(self, c: str) -> dict[str, Fraction]:
        return {r: v for (r, cc), v in self._entries.items() if cc == c}

    def column_is_zero(self, c: str) -> bool:
        return all(cc != c for (_, cc) in self._entries)

    def scale(self, k) -> "SparseMatrix":
        k = as_fraction(k)
        if k == 0:
            return SparseMatrix()
        return SparseMatrix({key: v * k for key, v in self._entries.items()})

    def add(self, other: "SparseMatrix") -> "SparseMatrix":
        out = dict(self._entries)
        for key, v in other._entries.items():
            s = out.get(key, ZERO) + v
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        m = SparseMatrix()
        m._entries = out
        return m

    def sub(self, other: "SparseMatrix") -> "SparseMatrix":
        return self.add(other.scale(-1))

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        by_row: dict[str, list[tuple[str, Fraction]]] = {}
        for (k, c), v in other._entries.items():
            by_row.setdefault(k, []).append((c, v))
        out: dict[tuple[str, str], Fraction] = {}
        for (r, k), a in self._entries.items():
            for c, b in by_row.get(k, ()):
                key = (r, c)
                s = out.get(key, ZERO) + a * b
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        m = SparseMatrix()
        m._entries = out
        return m

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self._entries == other._entries

    def __le__(self, other: "SparseMatrix") -> bool:
        keys = set(self._entries) | set(other._entries)
        return all(self._entries.get(k, ZERO) <= other._entries.get(k, ZERO) for k in keys)

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        cells = ", ".join(f"({r},{c})={v}" for (r, c), v in self.items())
        return f"SparseMatrix({cells})"


class Net:
    """An unordered data Petri net: places, transitions, variables and flows.

    `flow_in[(p, t)]` and `flow_out[(t, p)]` map variables to the (nonnegative
    integer) multiplicities consumed from / produced to place `p` when firing
    transition `t`.
    """

    __slots__ = ("places", "transitions", "variables", "flow_in", "flow_out",
                 "_vars_of", "_pre", "_post", "_delta")

    def __init__(self, places, transitions, variables, flow_in=None, flow_out=None):
        self.places = tuple(places)
        self.transitions = tuple(transitions)
        self.variables = tuple(variables)
        _check_distinct("place", self.places)
        _check_distinct("transition", self.transitions)
        _check_distinct("variable", self.variables)
        pset, tset, vset = set(self.places), set(self.transitions), set(self.variables)
        self.flow_in = _clean_flow(flow_in or {}, pset, tset, vset, inward=True)
        self.flow_out = _clean_flow(flow_out or {}, pset, tset, vset, inward=False)

        self._vars_of: dict[str, frozenset[str]] = {}
        self._pre: dict[str, SparseMatrix] = {}
        self._post: dict[str, SparseMatrix] = {}
        self._delta: dict[str, SparseMatrix] = {}
        for t in self.transitions:
            pre = {}
            post = {}
            for p in self.places:
                for x, n in self.flow_in.get((p, t), {}).items():
                    pre[(p, x)] = Fraction(n)
                for x, n in self.flow_out.get((t, p), {}).items():
                    post[(p, x)] = Fraction(n)
            pre_m = SparseMatrix(pre)
            post_m = SparseMatrix(post)
            self._pre[t] = pre_m
            self._post[t] = post_m
            self._delta[t] = post_m.sub(pre_m)
            self._vars_of[t] = frozenset(pre_m.cols() | post_m.cols())

    def _check_transition(self, t: str) -> None:
        if t not in self._vars_of:
            raise UdpnError(f"unknown transition {t!r}")

    def vars_of(self, t: str) -> frozenset[str]:
        """Variables with nonzero flow on some arc of `t`."""
        self._check_transition(t)
        return self._vars_of[t]

    def pre_matrix(self, t: str) -> SparseMatrix:
        """F(.,t) as a places x variables matrix."""
        self._check_transition(t)
        return self._pre[t]

    def post_matrix(self, t: str) -> SparseMatrix:
        """F(t,.) as a places x variables matrix."""
        self._check_transition(t)
        return self._post[t]

    def delta(self, t: str) -> SparseMatrix:
        """Displacement of `t`: produced minus consumed flow."""
        self._check_transition(t)
        return self._delta[t]

    def max_vars(self) -> int:
        return max((len(v) for v in self._vars_of.values()), default=0)

    def pre_places(self) -> set[str]:
        return {p for (p, _t) in self.flow_in}

    def post_places(self) -> set[str]:
        return {p for (_t, p) in self.flow_out}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Net):
            return NotImplemented
        return (self.places == other.places and self.transitions == other.transitions
                and self.variables == other.variables
                and self.flow_in == other.flow_in and self.flow_out == other.flow_out)

    def __repr__(self) -> str:
        return (f"Net(places={self.places}, transitions={self.transitions}, "
                f"variables={self.variables})")


def _check_distinct(kind: str, names: tuple[str, ...]) -> None:
    seen = set()
    for name in names:
        if not name:
            raise UdpnError(f"empty {kind} name")
        if name in seen:
            raise UdpnError(f"duplicate {kind} name {name!r}")
        seen.add(name)


def _clean_flow(flow, pset, tset, vset, inward):
    cleaned = {}
    for key, mapping in flow.items():
        p, t = (key if inward else (key[1], key[0]))
        if p not in pset:
            raise UdpnError(f"flow refers to unknown place {p!r}")
        if t not in tset:
            raise UdpnError(f"flow refers to unknown transition {t!r}")
        entry = {}
        for x, n in mapping.items():
            if x not in vset:
                raise UdpnError(f"flow refers to undeclared variable {x!r}")
            if not isinstance(n, int) or isinstance(n, bool) or n < 0:
                raise UdpnError(f"flow multiplicity for {x!r} must be a nonnegative integer")
            if n:
                entry[x] = n
        if entry:
            cleaned[key] = entry
    return cleaned


class Marking:
    """Finitely supported map (place, data value) -> rational amount."""

    __slots__ = ("net", "entries")

    def __init__(self, net: Net, entries=None):
        self.net = net
        matrix = entries if isinstance(entries, SparseMatrix) else SparseMatrix(entries or {})
        places = set(net.places)
        for (p, _a) in matrix.raw():
            if p not in places:
                raise UdpnError(f"marking refers to unknown place {p!r}")
        self.entries = matrix

    def get(self, place: str, datum: str) -> Fraction:
        return self.entries.get(place, datum)

    def dval(self) -> set[str]:
        return self.entries.cols()

    def is_nonnegative(self) -> bool:
        return self.entries.is_nonnegative()

    def add_matrix(self, m: SparseMatrix) -> "Marking":
        return Marking(self.net, self.entries.add(m))

    def scale(self, k) -> "Marking":
        return Marking(self.net, self.entries.scale(k))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self.net == other.net and self.entries == other.entries

    def __repr__(self) -> str:
        return f"Marking({self.entries!r})"


@dataclass(frozen=True)
class Step:
    """A scaled transition firing (coefficient, transition, mode).

    The mode assigns each variable of the transition a distinct data value.
    Assignments for variables outside vars(t) are dropped at construction;
    only those columns of the flow matrices can be nonzero.
    """

    coefficient: Fraction
    transition: str
    mode: Mapping[str, str] = field(default_factory=dict)

    def mode_items(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self.mode.items()))


def make_step(net: Net, coefficient, transition: str, mode: Mapping[str, str]) -> Step:
    """Validated step constructor; restricts the mode to vars(transition)."""
    c = as_fraction(coefficient)
    if c < 0:
        raise UdpnError("step coefficient must be nonnegative")
    needed = net.vars_of(transition)
    restricted = {}
    for x in sorted(needed):
        if x not in mode:
            raise UdpnError(f"mode misses variable {x!r} of transition {transition!r}")
        restricted[x] = mode[x]
    if len(set(restricted.values())) != len(restricted):
        raise UdpnError(f"mode of transition {transition!r} is not injective")
    return Step(c, transition, restricted)


Run = list  # a run is a list of Step


def mode_matrix(step: Step) -> SparseMatrix:
    """The 0/1 variables x data matrix of the step's mode."""
    return SparseMatrix({(x, a): ONE for x, a in step.mode.items()})


def delta(net: Net, t: str) -> SparseMatrix:
    """Displacement matrix of a transition (places x variables)."""
    return net.delta(t)
