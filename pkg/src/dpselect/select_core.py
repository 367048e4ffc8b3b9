"""Instrumented single- and dual-pivot Quickselect.

Every key comparison goes through :meth:`CostTally.less`, so the tally sees
exactly the data comparisons the algorithms perform; index arithmetic and
bound checks are never counted.

Positions are 0-based Python indices.  Ranks are 1-based: rank ``r`` asks for
the element that would sit at index ``r - 1`` after sorting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, MutableSequence, Sequence


class ContractError(ValueError):
    """An operation was called outside its precondition."""


@dataclass
class CostTally:
    comparisons: int = 0
    swaps: int = 0
    partition_calls: int = 0

    def less(self, a: Any, b: Any) -> bool:
        self.comparisons += 1
        return a < b

    def reset(self) -> None:
        self.comparisons = self.swaps = self.partition_calls = 0


@dataclass(frozen=True)
class PartitionOutcome:
    """Final pivot positions of one dual-pivot pass plus that pass's toll."""

    ip: int
    iq: int
    toll_comparisons: int
    toll_swaps: int


@dataclass
class SelectionTask:
    keys: MutableSequence[Any]
    rank: int

    def __post_init__(self) -> None:
        if len(self.keys) == 0:
            raise ContractError("selection needs a non-empty array")
        if not 1 <= self.rank <= len(self.keys):
            raise ContractError(f"rank {self.rank} outside [1, {len(self.keys)}]")


def partition_yaroslavskiy(a: MutableSequence[Any], left: int, right: int,
                           tally: CostTally) -> PartitionOutcome:
    """Yaroslavskiy's dual-pivot partition of ``a[left..right]`` (inclusive).

    Afterwards ``a[left:ip] <= a[ip] <= a[ip+1:iq] <= a[iq] <= a[iq+1:right+1]``.

    Swap convention: every exchange counts one (the double exchange when a
    large key at ``k`` meets a small key at ``g`` counts two), and each of the
    two closing pivot placements counts one.
    """
    if right - left < 1:
        raise ContractError("dual-pivot partition needs a segment of length >= 2")
    c0, s0 = tally.comparisons, tally.swaps
    tally.partition_calls += 1
    less = tally.less

    if less(a[right], a[left]):
        p, q = a[right], a[left]
    else:
        p, q = a[left], a[right]
    l = left + 1
    g = right - 1
    k = l
    while k <= g:
        if less(a[k], p):
            a[k], a[l] = a[l], a[k]
            tally.swaps += 1
            l += 1
        elif not less(a[k], q):
            # guard is evaluated left to right: the key comparison always fires
            while less(q, a[g]) and k < g:
                g -= 1
            if not less(a[g], p):
                a[k], a[g] = a[g], a[k]
                tally.swaps += 1
            else:
                a[k], a[g] = a[g], a[k]
                a[k], a[l] = a[l], a[k]
                tally.swaps += 2
                l += 1
            g -= 1
        k += 1
    l -= 1
    g += 1
    a[left] = a[l]
    a[l] = p
    a[right] = a[g]
    a[g] = q
    tally.swaps += 2
    return PartitionOutcome(l, g, tally.comparisons - c0, tally.swaps - s0)


def partition_classic(a: MutableSequence[Any], left: int, right: int,
                      tally: CostTally) -> int:
    """Hoare crossing-pointer partition around ``a[left]``; returns the pivot index.

    Both scans stop on keys equal to the pivot, which keeps duplicates balanced
    and means the right scan can never run past ``left``.
    """
    if right < left:
        raise ContractError("classic partition needs a non-empty segment")
    if right == left:
        return left
    tally.partition_calls += 1
    less = tally.less
    v = a[left]
    i, j = left, right + 1
    while True:
        i += 1
        while less(a[i], v):
            if i == right:
                break
            i += 1
        j -= 1
        while less(v, a[j]):
            j -= 1
        if i >= j:
            break
        a[i], a[j] = a[j], a[i]
        tally.swaps += 1
    a[left], a[j] = a[j], a[left]
    tally.swaps += 1
    return j


def quickselect_dual(task: SelectionTask, tally: CostTally) -> Any:
    """Return the ``task.rank``-th smallest key; permutes ``task.keys`` in place."""
    a = task.keys
    target = task.rank - 1
    left, right = 0, len(a) - 1
    while right > left:
        out = partition_yaroslavskiy(a, left, right, tally)
        if target < out.ip:
            right = out.ip - 1
        elif target == out.ip:
            return a[out.ip]
        elif target < out.iq:
            left, right = out.ip + 1, out.iq - 1
        elif target == out.iq:
            return a[out.iq]
        else:
            left = out.iq + 1
    return a[left]


def quickselect_classic(task: SelectionTask, tally: CostTally) -> Any:
    a = task.keys
    target = task.rank - 1
    left, right = 0, len(a) - 1
    while right > left:
        j = partition_classic(a, left, right, tally)
        if target < j:
            right = j - 1
        elif target > j:
            left = j + 1
        else:
            return a[j]
    return a[left]


def select(keys: Sequence[Any], rank: int, algo: str = "dual",
           tally: CostTally | None = None) -> Any:
    """Convenience wrapper that copies ``keys`` before selecting."""
    task = SelectionTask(list(keys), rank)
    tally = tally if tally is not None else CostTally()
    if algo == "dual":
        return quickselect_dual(task, tally)
    if algo == "classic":
        return quickselect_classic(task, tally)
    raise ValueError(f"unknown algorithm {algo!r}")
