"""Expected-topic-coverage objective with exact incremental updates.

The objective over a multiset of presented item copies is

    value = sum over topics j of (1 - prod over copies containing j of (1 - p)),

i.e. the expected number of distinct topics clicked at least once, treating
every presented copy as an independent Bernoulli trial.  The state supports
O(|topics of item|) marginal gains, additions, and removals; removal is what
the swapping policies need.

Numerics: per topic we keep the count of probability-1 contributors separately
(a zero factor cannot be divided back out) and accumulate the remaining
factors as a sum of log1p(-p) terms so that removal is a subtraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class RemovalError(ValueError):
    """Removal of an item that is not currently contributing to a topic."""

    def __init__(self, topic: int, detail: str):
        self.topic = topic
        super().__init__(f"topic {topic}: {detail}")


@dataclass(frozen=True)
class Item:
    """One stream element: opaque id, covered topics, click probability.

    ``click_prob`` may be None for items loaded from a file that has no
    probability column; it must be assigned before the item enters a stream.
    """

    id: int | str
    topics: tuple[int, ...]
    click_prob: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "topics", tuple(sorted(set(self.topics))))
        p = self.click_prob
        if p is not None and not 0.0 <= p <= 1.0:
            raise ValueError(f"item {self.id}: click_prob {p} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class ItemCopy:
    """A single presentation of an item.

    Re-presenting an item is a fresh Bernoulli trial, so copies are distinct:
    two copies are equal iff both the underlying item id and the tag match.
    """

    item: Item
    copy_tag: int | str

    def __eq__(self, other):
        if not isinstance(other, ItemCopy):
            return NotImplemented
        return self.item.id == other.item.id and self.copy_tag == other.copy_tag

    def __hash__(self):
        return hash((self.item.id, self.copy_tag))


@dataclass(slots=True)
class SurvivalCell:
    """Removable product of (1 - p) factors for one topic.

    ``survival`` caches the current product: 0 when any contributor has
    p = 1, else exp(log_survival).  It is refreshed on every mutation so
    that reads in the hot marginal-gain path stay O(1).
    """

    zero_count: int = 0
    log_survival: float = 0.0
    n_log_terms: int = 0
    survival: float = 1.0

    @property
    def contributor_count(self) -> int:
        return self.zero_count + self.n_log_terms

    def refresh(self) -> None:
        self.survival = 0.0 if self.zero_count else math.exp(self.log_survival)


@dataclass(slots=True)
class CoverageState:
    """Incrementally maintained coverage value over applied item copies."""

    per_topic: dict[int, SurvivalCell] = field(default_factory=dict)
    cached_value: float = 0.0

    def clone(self) -> "CoverageState":
        copied = {
            t: SurvivalCell(c.zero_count, c.log_survival, c.n_log_terms, c.survival)
            for t, c in self.per_topic.items()
        }
        return CoverageState(copied, self.cached_value)


def _unwrap(entry: Item | ItemCopy) -> Item:
    return entry.item if isinstance(entry, ItemCopy) else entry


def _checked_prob(item: Item) -> float:
    p = item.click_prob
    if p is None:
        raise ValueError(f"item {item.id} has no click probability assigned")
    return p


def coverage_value(state: CoverageState) -> float:
    return state.cached_value


def marginal_gain(state: CoverageState, item: Item) -> float:
    """Gain of adding one more copy of ``item``: sum of p * survival(topic)."""
    p = _checked_prob(item)
    per_topic = state.per_topic
    gain = 0.0
    for t in item.topics:
        cell = per_topic.get(t)
        gain += p if cell is None else p * cell.survival
    return gain


def marginal_gain_set(state: CoverageState, items) -> float:
    """Joint gain of a batch of items/copies, without mutating the state.

    Aggregates the batch's per-topic survival factor analytically, so the
    result matches apply-then-read exactly (no rollback needed).
    """
    pending: dict[int, list] = {}
    for entry in items:
        item = _unwrap(entry)
        p = _checked_prob(item)
        for t in item.topics:
            acc = pending.get(t)
            if acc is None:
                acc = [0, 0.0]
                pending[t] = acc
            if p >= 1.0:
                acc[0] += 1
            else:
                acc[1] += math.log1p(-p)
    per_topic = state.per_topic
    gain = 0.0
    for t, (zeros, log_sum) in pending.items():
        cell = per_topic.get(t)
        survival = 1.0 if cell is None else cell.survival
        batch_factor = 0.0 if zeros else math.exp(log_sum)
        gain += survival * (1.0 - batch_factor)
    return gain


def apply_item(state: CoverageState, item: Item) -> CoverageState:
    """Fold one copy of ``item`` into the state; returns the mutated state."""
    p = _checked_prob(item)
    per_topic = state.per_topic
    for t in item.topics:
        cell = per_topic.get(t)
        if cell is None:
            cell = SurvivalCell()
            per_topic[t] = cell
        old = cell.survival
        if p >= 1.0:
            cell.zero_count += 1
        else:
            cell.log_survival += math.log1p(-p)
            cell.n_log_terms += 1
        cell.refresh()
        state.cached_value += old - cell.survival
    return state


def remove_item(state: CoverageState, item: Item) -> CoverageState:
    """Inverse of :func:`apply_item` for a copy that is currently applied.

    Raises :class:`RemovalError` naming the topic when the per-topic
    contributor accounting would underflow, i.e. the caller removes an item
    that was never applied (or already removed).
    """
    p = _checked_prob(item)
    per_topic = state.per_topic
    for t in item.topics:
        cell = per_topic.get(t)
        if cell is None:
            raise RemovalError(t, "no contributors recorded")
        old = cell.survival
        if p >= 1.0:
            if cell.zero_count == 0:
                raise RemovalError(t, "no probability-1 contributor to remove")
            cell.zero_count -= 1
        else:
            if cell.n_log_terms == 0:
                raise RemovalError(t, "no fractional contributor to remove")
            cell.n_log_terms -= 1
            if cell.n_log_terms == 0:
                cell.log_survival = 0.0
            else:
                cell.log_survival -= math.log1p(-p)
        cell.refresh()
        state.cached_value += old - cell.survival
    return state


def recompute_from_scratch(items) -> CoverageState:
    """Build a fresh state by folding every item; verification oracle for
    the incremental path."""
    state = CoverageState()
    for entry in items:
        apply_item(state, _unwrap(entry))
    return state
