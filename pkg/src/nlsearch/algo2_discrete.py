"""Idealized discrete dynamics of the second algorithm.

Each input branch |i> carries one flag bit.  A scan round along slot k pairs
the branches that differ only in input bit k and, whenever a pair holds one 0
and one 1, sets the 0 to 1.  That is a pairwise OR along one hypercube
dimension, so n rounds saturate every flag to the OR of the whole table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linear_stage import TruthTable
from .qstate import StateVector


@dataclass(frozen=True, eq=False)
class FlagTable(TruthTable):
    """Per-branch flag assignment; same storage and hex format as TruthTable."""

    @property
    def flags(self) -> np.ndarray:
        return self.bits


def from_truth_table(f: TruthTable) -> FlagTable:
    return FlagTable(f.n, f.bits)


def _slot_mask(n: int, k: int) -> int:
    if not 1 <= k <= n:
        raise DomainError(f"slot k={k} outside 1..{n}")
    # slot 1 is the most significant input bit
    return 1 << (n - k)


def scan_pairs(n: int, k: int) -> list[tuple[int, int]]:
    """Branch pairs (lo, hi) compared in round k, i.e. indices differing only in slot k."""
    mask = _slot_mask(n, k)
    return [(idx, idx | mask) for idx in range(2**n) if not idx & mask]


def scan_round(table: FlagTable, k: int) -> FlagTable:
    mask = _slot_mask(table.n, k)
    # axis 1 of this view is input bit k
    view = table.flags.reshape(2 ** (k - 1), 2, mask)
    merged = np.logical_or(view[:, 0, :], view[:, 1, :])
    out = np.repeat(merged[:, None, :], 2, axis=1)
    return FlagTable(table.n, out.reshape(-1))


def scan_history(table: FlagTable, order=None) -> list[FlagTable]:
    """Tables before the first round and after each round (length n + 1)."""
    order = range(1, table.n + 1) if order is None else order
    history = [table]
    for k in order:
        history.append(scan_round(history[-1], k))
    return history


def run_scan(table: FlagTable, order=None) -> FlagTable:
    return scan_history(table, order)[-1]


def to_state(table: FlagTable) -> StateVector:
    """sum_i |i>|flags[i]> / sqrt(2^n)."""
    rows = np.zeros((2**table.n, 2))
    rows[np.arange(2**table.n), table.flags.astype(int)] = 2 ** (-table.n / 2)
    return StateVector(table.n, rows.reshape(-1))


@dataclass(frozen=True)
class MergeReport:
    overlap_in: float
    overlap_out: float
    merged: bool


def check_merge_obstruction(t1: FlagTable, t2: FlagTable) -> MergeReport:
    """Compare overlaps before and after the scan.

    Distinct inputs mapped onto one output cannot come from reversible,
    first-order dynamics; ``merged`` flags exactly that case.
    """
    if t1 == t2:
        raise DomainError("tables must differ")
    before = abs(to_state(t1).inner(to_state(t2)))
    r1, r2 = run_scan(t1), run_scan(t2)
    after = abs(to_state(r1).inner(to_state(r2)))
    return MergeReport(before, after, r1 == r2)
