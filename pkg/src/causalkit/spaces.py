"""Finite product measurable spaces with exact rational measures.

A ``CoordinateSpace`` is an ordered list of named finite coordinates.  An
outcome is a tuple of coordinate values and is addressed by its mixed-radix
index (first coordinate most significant, so ``itertools.product`` order
agrees with index order).  Events are bitsets over outcome indices, measures
are dense tables of ``Fraction`` weights, and kernels are row tables indexed
by the atoms of a coordinate subset.  All arithmetic is exact; equality of
measures means equality of every weight.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping

from .errors import OutcomeCapError, SpaceError

DEFAULT_MAX_OUTCOMES = 4096
MAX_OUTCOMES_ENV = "CAUSALKIT_MAX_OUTCOMES"

ZERO = Fraction(0)
ONE = Fraction(1)


def outcome_cap(explicit: int | None = None) -> int:
    """Resolve the outcome-count bound: explicit value, else env var, else default."""
    if explicit is not None:
        return explicit
    env = os.environ.get(MAX_OUTCOMES_ENV)
    if env is not None:
        return int(env)
    return DEFAULT_MAX_OUTCOMES


@dataclass(frozen=True)
class Coordinate:
    name: str
    cardinality: int


@dataclass(frozen=True)
class CoordinateSpace:
    """Ordered finite product space; outcomes are mixed-radix indexed."""

    coords: tuple[Coordinate, ...]
    max_outcomes: int | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        names = [c.name for c in self.coords]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate coordinate names: {names}")
        for c in self.coords:
            if c.cardinality < 1:
                raise SpaceError(f"coordinate {c.name!r} has cardinality {c.cardinality}")
        total = 1
        for c in self.coords:
            total *= c.cardinality
        cap = outcome_cap(self.max_outcomes)
        if total > cap:
            raise OutcomeCapError(f"{total} outcomes exceeds bound {cap}")

    @classmethod
    def make(cls, pairs: Iterable[tuple[str, int]], max_outcomes: int | None = None) -> "CoordinateSpace":
        return cls(tuple(Coordinate(n, k) for n, k in pairs), max_outcomes)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coords)

    @cached_property
    def cards(self) -> tuple[int, ...]:
        return tuple(c.cardinality for c in self.coords)

    @cached_property
    def n_outcomes(self) -> int:
        total = 1
        for c in self.coords:
            total *= c.cardinality
        return total

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = [1] * len(self.coords)
        for i in range(len(self.coords) - 2, -1, -1):
            out[i] = out[i + 1] * self.coords[i + 1].cardinality
        return tuple(out)

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SpaceError(f"unknown coordinate {name!r}") from None

    def positions(self, subset: Iterable[str]) -> tuple[int, ...]:
        """Positions of a coordinate subset, in space order."""
        wanted = set(subset)
        unknown = wanted - set(self.names)
        if unknown:
            raise SpaceError(f"unknown coordinates {sorted(unknown)}")
        return tuple(i for i, n in enumerate(self.names) if n in wanted)

    def index(self, values: tuple[int, ...]) -> int:
        if len(values) != len(self.coords):
            raise SpaceError("outcome arity mismatch")
        idx = 0
        for v, c, s in zip(values, self.coords, self.strides):
            if not 0 <= v < c.cardinality:
                raise SpaceError(f"value {v} out of range for {c.name!r}")
            idx += v * s
        return idx

    def outcome(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.n_outcomes:
            raise SpaceError(f"outcome index {index} out of range")
        vals = []
        for s, c in zip(self.strides, self.coords):
            vals.append((index // s) % c.cardinality)
        return tuple(vals)

    def outcomes(self) -> Iterator[tuple[int, ...]]:
        for i in range(self.n_outcomes):
            yield self.outcome(i)

    def restrict(self, subset: Iterable[str]) -> "CoordinateSpace":
        """Sub-space on a coordinate subset, keeping this space's order."""
        pos = self.positions(subset)
        return CoordinateSpace(tuple(self.coords[i] for i in pos), self.max_outcomes)

    def project_index(self, index: int, subset: Iterable[str]) -> int:
        """Index of the projection of outcome ``index`` onto ``subset``."""
        pos = self.positions(subset)
        vals = self.outcome(index)
        sub = self.restrict(subset)
        return sub.index(tuple(vals[i] for i in pos))

    def index_from_values(self, assignment: Mapping[str, int]) -> int:
        """Full-outcome index from a total name-to-value assignment."""
        if set(assignment) != set(self.names):
            raise SpaceError("assignment must cover every coordinate exactly")
        return self.index(tuple(assignment[n] for n in self.names))


def product_space(a: CoordinateSpace, b: CoordinateSpace) -> CoordinateSpace:
    """Concatenate two spaces with disjoint coordinate names.

    The index relation is ``i = i_a * b.n_outcomes + i_b``.
    """
    clash = set(a.names) & set(b.names)
    if clash:
        raise SpaceError(f"coordinate name collision: {sorted(clash)}")
    cap = None
    if a.max_outcomes is not None or b.max_outcomes is not None:
        cap = max(outcome_cap(a.max_outcomes), outcome_cap(b.max_outcomes))
    return CoordinateSpace(a.coords + b.coords, cap)


def rename_space(space: CoordinateSpace, mapping: Mapping[str, str]) -> CoordinateSpace:
    coords = tuple(
        Coordinate(mapping.get(c.name, c.name), c.cardinality) for c in space.coords
    )
    return CoordinateSpace(coords, space.max_outcomes)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Event:
    """Measurable set, stored as a bitset over outcome indices."""

    space: CoordinateSpace
    mask: int

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.space.n_outcomes):
            raise SpaceError("event mask out of range for space")

    @classmethod
    def empty(cls, space: CoordinateSpace) -> "Event":
        return cls(space, 0)

    @classmethod
    def full(cls, space: CoordinateSpace) -> "Event":
        return cls(space, (1 << space.n_outcomes) - 1)

    @classmethod
    def from_indices(cls, space: CoordinateSpace, indices: Iterable[int]) -> "Event":
        mask = 0
        for i in indices:
            if not 0 <= i < space.n_outcomes:
                raise SpaceError(f"outcome index {i} out of range")
            mask |= 1 << i
        return cls(space, mask)

    @classmethod
    def singleton(cls, space: CoordinateSpace, index: int) -> "Event":
        return cls.from_indices(space, [index])

    @classmethod
    def cylinder(cls, space: CoordinateSpace, assignment: Mapping[str, int]) -> "Event":
        """Outcomes agreeing with a partial name-to-value assignment."""
        pos = {space.position(n): v for n, v in assignment.items()}
        mask = 0
        for i in range(space.n_outcomes):
            vals = space.outcome(i)
            if all(vals[p] == v for p, v in pos.items()):
                mask |= 1 << i
        return cls(space, mask)

    def indices(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def contains(self, index: int) -> bool:
        return bool((self.mask >> index) & 1)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def _check_space(self, other: "Event") -> None:
        if self.space != other.space:
            raise SpaceError("events live on different spaces")

    def union(self, other: "Event") -> "Event":
        self._check_space(other)
        return Event(self.space, self.mask | other.mask)

    def intersect(self, other: "Event") -> "Event":
        self._check_space(other)
        return Event(self.space, self.mask & other.mask)

    def complement(self) -> "Event":
        return Event(self.space, Event.full(self.space).mask ^ self.mask)

    def is_subset(self, other: "Event") -> bool:
        self._check_space(other)
        return self.mask & ~other.mask == 0

    __or__ = union
    __and__ = intersect


def atoms(space: CoordinateSpace, subset: Iterable[str]) -> list[Event]:
    """Atoms of the sub-sigma-algebra generated by a coordinate subset.

    Returned in the index order of the restricted space; for the empty
    subset the single atom is the whole space.
    """
    sub = space.restrict(subset)
    names = sub.names
    masks = [0] * sub.n_outcomes
    for i in range(space.n_outcomes):
        masks[space.project_index(i, names)] |= 1 << i
    return [Event(space, m) for m in masks]


def is_measurable(event: Event, subset: Iterable[str]) -> bool:
    """Whether an event belongs to the sub-sigma-algebra of a coordinate subset."""
    for atom in atoms(event.space, subset):
        inter = event.mask & atom.mask
        if inter != 0 and inter != atom.mask:
            return False
    return True


@dataclass(frozen=True)
class FiniteMeasure:
    """Dense table of exact rational weights over a coordinate space."""

    space: CoordinateSpace
    weights: tuple[Fraction, ...]
    subprobability: bool = False

    def __post_init__(self):
        if len(self.weights) != self.space.n_outcomes:
            raise SpaceError("weight table length mismatch")
        total = ZERO
        for w in self.weights:
            if not isinstance(w, Fraction):
                raise SpaceError("weights must be Fractions")
            if w < 0 or w > 1:
                raise SpaceError(f"weight {w} outside [0, 1]")
            total += w
        if self.subprobability:
            if total > 1:
                raise SpaceError(f"weights sum to {total} > 1")
        elif total != 1:
            raise SpaceError(f"weights sum to {total}, expected 1")

    @classmethod
    def from_weights(cls, space: CoordinateSpace, weights: Iterable, **kw) -> "FiniteMeasure":
        return cls(space, tuple(Fraction(w) for w in weights), **kw)

    @classmethod
    def dirac(cls, space: CoordinateSpace, index: int) -> "FiniteMeasure":
        w = [ZERO] * space.n_outcomes
        w[index] = ONE
        return cls(space, tuple(w))

    @classmethod
    def uniform(cls, space: CoordinateSpace) -> "FiniteMeasure":
        n = space.n_outcomes
        return cls(space, tuple(Fraction(1, n) for _ in range(n)))

    def mass(self, event: Event) -> Fraction:
        if event.space != self.space:
            raise SpaceError("event on a different space")
        total = ZERO
        for i in event.indices():
            total += self.weights[i]
        return total

    def support(self) -> Event:
        return Event.from_indices(self.space, (i for i, w in enumerate(self.weights) if w > 0))

    def tensor(self, other: "FiniteMeasure") -> "FiniteMeasure":
        """Product measure on the product space."""
        prod = product_space(self.space, other.space)
        nb = other.space.n_outcomes
        w = [ZERO] * prod.n_outcomes
        for i, wi in enumerate(self.weights):
            if wi == 0:
                continue
            for j, wj in enumerate(other.weights):
                if wj != 0:
                    w[i * nb + j] = wi * wj
        return FiniteMeasure(prod, tuple(w))

    def condition(self, event: Event) -> "FiniteMeasure":
        """Conditional measure given an event of positive mass."""
        z = self.mass(event)
        if z == 0:
            raise SpaceError("conditioning on a null event")
        w = [
            (self.weights[i] / z if event.contains(i) else ZERO)
            for i in range(self.space.n_outcomes)
        ]
        return FiniteMeasure(self.space, tuple(w))


def project(measure: FiniteMeasure, subset: Iterable[str]) -> FiniteMeasure:
    """Marginal of a measure on a coordinate subset."""
    sub = measure.space.restrict(subset)
    w = [ZERO] * sub.n_outcomes
    for i, wi in enumerate(measure.weights):
        if wi != 0:
            w[measure.space.project_index(i, sub.names)] += wi
    return FiniteMeasure(sub, tuple(w), subprobability=measure.subprobability)


@dataclass(frozen=True)
class StochKernel:
    """Markov kernel from the atoms of a coordinate subset to a target space.

    ``domain`` is the restricted space whose outcomes index the rows; each
    row is a probability measure on ``codomain``.
    """

    domain: CoordinateSpace
    codomain: CoordinateSpace
    rows: tuple[FiniteMeasure, ...]

    def __post_init__(self):
        if len(self.rows) != self.domain.n_outcomes:
            raise SpaceError("kernel row count mismatch")
        for row in self.rows:
            if row.space != self.codomain:
                raise SpaceError("kernel row on wrong space")

    @classmethod
    def from_rows(cls, domain: CoordinateSpace, codomain: CoordinateSpace,
                  rows: Iterable[Iterable]) -> "StochKernel":
        return cls(domain, codomain,
                   tuple(FiniteMeasure.from_weights(codomain, r) for r in rows))

    @classmethod
    def identity(cls, space: CoordinateSpace) -> "StochKernel":
        rows = tuple(FiniteMeasure.dirac(space, i) for i in range(space.n_outcomes))
        return cls(space, space, rows)

    @classmethod
    def constant(cls, domain: CoordinateSpace, measure: FiniteMeasure) -> "StochKernel":
        return cls(domain, measure.space, tuple(measure for _ in range(domain.n_outcomes)))

    @classmethod
    def deterministic(cls, domain: CoordinateSpace, codomain: CoordinateSpace,
                      table: Iterable[int]) -> "StochKernel":
        rows = tuple(FiniteMeasure.dirac(codomain, j) for j in table)
        return cls(domain, codomain, rows)

    @classmethod
    def from_function(cls, domain: CoordinateSpace,
                      fn: Callable[[tuple[int, ...]], FiniteMeasure]) -> "StochKernel":
        rows = tuple(fn(domain.outcome(i)) for i in range(domain.n_outcomes))
        return cls(domain, rows[0].space, rows)

    def value(self, row_index: int, event: Event) -> Fraction:
        return self.rows[row_index].mass(event)


def kernel_compose(first: StochKernel, second: StochKernel) -> StochKernel:
    """Chain two kernels: integrate ``second`` against each row of ``first``.

    The codomain of ``first`` must be the full-coordinate domain of
    ``second``; sub-distributivity never arises because rows are exact
    probability measures.
    """
    if first.codomain != second.domain:
        raise SpaceError("kernel domains do not chain")
    n_out = second.codomain.n_outcomes
    rows = []
    for row in first.rows:
        w = [ZERO] * n_out
        for i, wi in enumerate(row.weights):
            if wi == 0:
                continue
            mid = second.rows[i].weights
            for j in range(n_out):
                if mid[j] != 0:
                    w[j] += wi * mid[j]
        rows.append(FiniteMeasure(second.codomain, tuple(w)))
    return StochKernel(first.domain, second.codomain, tuple(rows))


def kernel_product(a: StochKernel, b: StochKernel) -> StochKernel:
    """Tensor two kernels: rows are outer products, domains concatenate."""
    dom = product_space(a.domain, b.domain)
    cod = product_space(a.codomain, b.codomain)
    nb = b.domain.n_outcomes
    rows = []
    for i in range(dom.n_outcomes):
        ia, ib = divmod(i, nb)
        rows.append(a.rows[ia].tensor(b.rows[ib]))
    return StochKernel(dom, cod, tuple(rows))
