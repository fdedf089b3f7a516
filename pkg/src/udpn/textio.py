"""Line-oriented text formats for nets, markings, runs and histograms.

Grammar ('#' starts a comment running to end of line):

    net { places p1 p2; vars x y;
          transition t { in p1: 2x, z; out p2: y; } }
    marking { p1: red 1, green 3/2; p2: blue 2; }
    run { step 1/2 t { x -> blue; y -> green } }
    histogram { x: a 1/2, b 1/2; y: a 1/2, b 1/2; }

"in p1: 2x, z" consumes two x-tokens and one z-token from p1.  Rationals are
written p or p/q and serialized in lowest terms.  Names starting with the
reserved prefixes "__copy_", "__shadow_" or "_d" are rejected in user input.
Serialization is canonical, so parse(serialize(x)) = x.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (Marking, Net, RESERVED_DATA_PREFIX, RESERVED_PLACE_PREFIX,
                   RESERVED_TRANSITION_PREFIX, Run, UdpnError,
                   make_step, sorted_data)
from .histograms import Histogram, histogram


class ParseError(UdpnError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_RESERVED = (RESERVED_PLACE_PREFIX, RESERVED_TRANSITION_PREFIX, RESERVED_DATA_PREFIX)


def _tokenize(text: str):
    tokens = []
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if text.startswith("->", i):
            tokens.append(("sym", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "{};:,/-":
            tokens.append(("sym", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str):
        _k, _v, line, col = self.peek()
        raise ParseError(message, line, col)

    def expect_sym(self, sym: str):
        kind, value, _l, _c = self.peek()
        if kind != "sym" or value != sym:
            self.fail(f"expected {sym!r}")
        return self.next()

    def expect_name(self) -> str:
        kind, value, _l, _c = self.peek()
        if kind != "name":
            self.fail("expected a name")
        return self.next()[1]

    def expect_keyword(self, word: str):
        kind, value, _l, _c = self.peek()
        if kind != "name" or value != word:
            self.fail(f"expected {word!r}")
        self.next()

    def at_sym(self, sym: str) -> bool:
        kind, value, _l, _c = self.peek()
        return kind == "sym" and value == sym

    def at_name(self, word=None) -> bool:
        kind, value, _l, _c = self.peek()
        return kind == "name" and (word is None or value == word)

    def user_name(self, kind: str) -> str:
        name = self.expect_name()
        for prefix in _RESERVED:
            if name.startswith(prefix):
                self.fail(f"{kind} name {name!r} uses reserved prefix {prefix!r}")
        return name

    def nat(self) -> int:
        kind, value, _l, _c = self.peek()
        if kind != "num":
            self.fail("expected a number")
        return int(self.next()[1])

    def rational(self) -> Fraction:
        sign = 1
        if self.at_sym("-"):
            self.next()
            sign = -1
        p = self.nat()
        if self.at_sym("/"):
            self.next()
            q = self.nat()
            if q == 0:
                self.fail("zero denominator")
            return Fraction(sign * p, q)
        return Fraction(sign * p)

    def expect_eof(self):
        if self.peek()[0] != "eof":
            self.fail("trailing input")


def parse_net(text: str) -> Net:
    p = _Parser(text)
    p.expect_keyword("net")
    p.expect_sym("{")
    p.expect_keyword("places")
    places = []
    # generated names (loop-less transformation) must round-trip through
    # files, so net components skip the reserved-prefix check; data values
    # in markings keep it
    while p.at_name():
        places.append(p.expect_name())
    p.expect_sym(";")
    p.expect_keyword("vars")
    variables = []
    while p.at_name() and not p.at_name("transition"):
        variables.append(p.expect_name())
    p.expect_sym(";")
    transitions = []
    flow_in = {}
    flow_out = {}
    while p.at_name("transition"):
        p.next()
        t = p.expect_name()
        transitions.append(t)
        p.expect_sym("{")
        while p.at_name("in") or p.at_name("out"):
            inward = p.next()[1] == "in"
            place = p.expect_name()
            p.expect_sym(":")
            arc: dict[str, int] = {}
            while True:
                mult = 1
                if p.peek()[0] == "num":
                    mult = p.nat()
                var = p.expect_name()
                arc[var] = arc.get(var, 0) + mult
                if p.at_sym(","):
                    p.next()
                    continue
                break
            p.expect_sym(";")
            key = (place, t) if inward else (t, place)
            target = flow_in if inward else flow_out
            merged = target.setdefault(key, {})
            for var, mult in arc.items():
                merged[var] = merged.get(var, 0) + mult
        p.expect_sym("}")
    p.expect_sym("}")
    p.expect_eof()
    return Net(places, transitions, variables, flow_in, flow_out)


def _parse_row_block(p: _Parser, keyword: str):
    """Shared shape of marking and histogram bodies: rows of (datum, amount)."""
    p.expect_keyword(keyword)
    p.expect_sym("{")
    entries = {}
    while p.at_name():
        row = p.expect_name()
        p.expect_sym(":")
        while True:
            datum = p.user_name("data value")
            amount = p.rational()
            key = (row, datum)
            entries[key] = entries.get(key, Fraction(0)) + amount
            if p.at_sym(","):
                p.next()
                continue
            break
        p.expect_sym(";")
    p.expect_sym("}")
    p.expect_eof()
    return entries


def parse_marking(text: str, net: Net) -> Marking:
    entries = _parse_row_block(_Parser(text), "marking")
    return Marking(net, entries)


def parse_histogram(text: str) -> Histogram:
    entries = _parse_row_block(_Parser(text), "histogram")
    return histogram(entries)


def parse_run(text: str, net: Net) -> Run:
    p = _Parser(text)
    p.expect_keyword("run")
    p.expect_sym("{")
    run = []
    while p.at_name("step"):
        p.next()
        coeff = p.rational()
        t = p.expect_name()
        p.expect_sym("{")
        mode = {}
        while p.at_name():
            var = p.expect_name()
            p.expect_sym("->")
            # runs may mention generated data values, so no prefix check here
            datum = p.expect_name()
            if var in mode:
                p.fail(f"variable {var!r} assigned twice")
            mode[var] = datum
            if p.at_sym(";"):
                p.next()
        p.expect_sym("}")
        run.append(make_step(net, coeff, t, mode))
    p.expect_sym("}")
    p.expect_eof()
    return run


# ---------------------------------------------------------------------------
# serialization (canonical; deterministic byte-for-byte)


def serialize_net(net: Net) -> str:
    lines = ["net {"]
    lines.append("  places " + " ".join(net.places) + ";")
    lines.append("  vars " + " ".join(net.variables) + ";")
    for t in net.transitions:
        lines.append(f"  transition {t} {{")
        for p in net.places:
            arc = net.flow_in.get((p, t))
            if arc:
                lines.append(f"    in {p}: " + _arc_text(arc) + ";")
        for p in net.places:
            arc = net.flow_out.get((t, p))
            if arc:
                lines.append(f"    out {p}: " + _arc_text(arc) + ";")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _arc_text(arc: dict[str, int]) -> str:
    parts = []
    for var in sorted(arc):
        mult = arc[var]
        parts.append(var if mult == 1 else f"{mult}{var}")
    return ", ".join(parts)


def serialize_marking(m: Marking) -> str:
    lines = ["marking {"]
    for p in m.net.places:
        row = m.entries.row(p)
        if row:
            cells = ", ".join(f"{a} {row[a]}" for a in sorted_data(row))
            lines.append(f"  {p}: {cells};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_run(run: Run) -> str:
    lines = ["run {"]
    for step in run:
        inner = "; ".join(f"{x} -> {a}" for x, a in step.mode_items())
        if inner:
            inner = " " + inner + " "
        lines.append(f"  step {step.coefficient} {step.transition} {{{inner}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_histogram(h: Histogram) -> str:
    lines = ["histogram {"]
    for x in sorted(h.matrix.rows()):
        row = h.matrix.row(x)
        cells = ", ".join(f"{a} {row[a]}" for a in sorted_data(row))
        lines.append(f"  {x}: {cells};")
    lines.append("}")
    return "\n".join(lines) + "\n"
