"""Histograms: weighted mode aggregates of one transition, and their decomposition.

A histogram of order q is a nonnegative variables x data matrix whose nonzero
rows each sum to q and whose columns sum to at most q.  Any histogram splits
into scaled partial-permutation (mode-shaped) matrices; this file implements
that split via bipartite matching and the inverse expansion into run steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (InternalError, Net, Run, SparseMatrix, UdpnError, ZERO,
                   as_fraction, make_step)


def check_histogram(matrix: SparseMatrix) -> Optional[Fraction]:
    """Return the order if the matrix is a histogram, else None."""
    if not matrix.is_nonnegative():
        return None
    row_sums: dict[str, Fraction] = {}
    col_sums: dict[str, Fraction] = {}
    for (r, c), v in matrix.raw().items():
        row_sums[r] = row_sums.get(r, ZERO) + v
        col_sums[c] = col_sums.get(c, ZERO) + v
    if not row_sums:
        return ZERO
    orders = set(row_sums.values())
    if len(orders) != 1:
        return None
    q = orders.pop()
    if any(s > q for s in col_sums.values()):
        return None
    return q


@dataclass(frozen=True)
class Histogram:
    matrix: SparseMatrix
    order: Fraction

    def __post_init__(self):
        q = check_histogram(self.matrix)
        if q is None or q != self.order:
            raise UdpnError("matrix is not a histogram of the claimed order")

    def is_zero(self) -> bool:
        return self.order == 0


def histogram(matrix) -> Histogram:
    """Build a histogram from a matrix or mapping, inferring the order."""
    m = matrix if isinstance(matrix, SparseMatrix) else SparseMatrix(matrix)
    q = check_histogram(m)
    if q is None:
        raise UdpnError("matrix is not a histogram")
    return Histogram(m, q)


def add_histograms(h1: Histogram, h2: Histogram) -> Histogram:
    """Entrywise sum; orders add.  Nonzero row sets must coincide."""
    if not h1.matrix.is_zero() and not h2.matrix.is_zero():
        if h1.matrix.rows() != h2.matrix.rows():
            raise UdpnError("histogram row sets differ")
    return Histogram(h1.matrix.add(h2.matrix), h1.order + h2.order)


def hist_of_run(net: Net, run: Run) -> dict[str, Histogram]:
    """Per-transition weighted sum of the run's mode matrices."""
    sums = {t: SparseMatrix() for t in net.transitions}
    for step in run:
        m = SparseMatrix({(x, a): step.coefficient for x, a in step.mode.items()})
        sums[step.transition] = sums[step.transition].add(m)
    return {t: histogram(m) for t, m in sums.items()}


def decompose(h: Histogram) -> list[tuple[Fraction, SparseMatrix]]:
    """Split h into scaled 0/1 mode-shaped parts summing back to h exactly.

    Each part's matrix has row sums 1 on the nonzero rows of h and column sums
    at most 1.  The extraction amount is capped so that every remainder keeps
    its column sums below the shrunken order: besides the minimum matched
    weight, it may not exceed q minus the sum of any unmatched nonzero column.
    """
    entries = dict(h.matrix.raw())
    order = h.order
    parts: list[tuple[Fraction, SparseMatrix]] = []
    guard = len(entries) + len({c for (_r, c) in entries}) + 1
    while order > 0:
        if guard == 0:
            raise InternalError("histogram decomposition failed to terminate")
        guard -= 1
        rows = sorted({r for (r, _c) in entries})
        if not rows:
            raise InternalError("positive order with no entries")
        col_sums: dict[str, Fraction] = {}
        for (_r, c), v in entries.items():
            col_sums[c] = col_sums.get(c, ZERO) + v
        full = sorted(c for c, s in col_sums.items() if s == order)
        adj: dict[str, list[str]] = {r: [] for r in rows}
        for (r, c) in sorted(entries):
            adj[r].append(c)
        row_match, col_match = _saturating_matching(rows, full, adj)
        matched = sorted(row_match.items())
        amount = min(entries[(r, c)] for r, c in matched)
        for c, s in sorted(col_sums.items()):
            if c not in col_match:
                amount = min(amount, order - s)
        if amount <= 0:
            raise InternalError("nonpositive extraction amount in decomposition")
        part = SparseMatrix({(r, c): 1 for r, c in matched})
        parts.append((amount, part))
        for r, c in matched:
            left = entries[(r, c)] - amount
            if left == 0:
                del entries[(r, c)]
            else:
                entries[(r, c)] = left
        order -= amount
    if entries:
        raise InternalError("nonzero remainder after decomposition")
    return parts


def _saturating_matching(rows, full_cols, adj):
    """Matching covering every row and every full column; failure is a bug.

    Full columns are matched first; augmenting the remaining rows never
    unmatches an already matched vertex, so both sides stay saturated.
    """
    col_adj: dict[str, list[str]] = {}
    for r in rows:
        for c in adj[r]:
            col_adj.setdefault(c, []).append(r)
    row_match: dict[str, str] = {}
    col_match: dict[str, str] = {}

    def augment_col(c, seen):
        for r in col_adj.get(c, ()):
            if r in seen:
                continue
            seen.add(r)
            if r not in row_match or augment_col(row_match[r], seen):
                row_match[r] = c
                col_match[c] = r
                return True
        return False

    def augment_row(r, seen):
        for c in adj[r]:
            if c in seen:
                continue
            seen.add(c)
            if c not in col_match or augment_row(col_match[c], seen):
                row_match[r] = c
                col_match[c] = r
                return True
        return False

    for c in full_cols:
        if not augment_col(c, set()):
            raise InternalError(f"cannot saturate full column {c!r}")
    for r in rows:
        if r not in row_match and not augment_row(r, set()):
            raise InternalError(f"cannot saturate row {r!r}")
    return row_match, col_match


def expand_to_steps(net: Net, t: str, h: Histogram) -> Run:
    """One step per decomposition part; the run's effect equals delta(t) * h.

    Rows of h outside vars(t) are rejected.  A variable of t with a zero row
    is tolerated only when its displacement column is zero; each part's mode
    then pads it with a distinct otherwise-unused data value.
    """
    needed = net.vars_of(t)
    extra_rows = h.matrix.rows() - needed
    if extra_rows:
        raise UdpnError(f"histogram row {sorted(extra_rows)[0]!r} is not a variable of {t!r}")
    if h.order == 0:
        return []
    missing = sorted(needed - h.matrix.rows())
    for x in missing:
        if not net.delta(t).column_is_zero(x):
            raise UdpnError(f"zero histogram row for consuming/producing variable {x!r}")
    used_cols = h.matrix.cols()
    run = []
    for amount, part in decompose(h):
        mode = {r: c for (r, c), _v in part.items()}
        pad = _fresh_data(used_cols, len(missing))
        for x, a in zip(missing, pad):
            mode[x] = a
        run.append(make_step(net, amount, t, mode))
    return run


def _fresh_data(used: set[str], count: int) -> list[str]:
    out = []
    k = 0
    while len(out) < count:
        name = f"_dpad{k}"
        if name not in used:
            out.append(name)
        k += 1
    return out


def scale_histogram(h: Histogram, k) -> Histogram:
    k = as_fraction(k)
    if k < 0:
        raise UdpnError("histogram scale factor must be nonnegative")
    return Histogram(h.matrix.scale(k), h.order * k)
