"""Finite structural models and their compilation into causal spaces.

Each variable has a finite domain, a private noise with exact rational
weights, and a mechanism given as a dense lookup table over (parent values,
noise value).  Compilation enumerates noise configurations exhaustively:
the base measure pushes the noise product law through the equations, and
the kernel for a subset S is the law of the mutilated system with S pinned
to the atom's values and all other equations re-run on fresh noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product as iproduct
from typing import Iterable, Mapping

from .causal import FiniteCausalSpace
from .errors import CyclicSCMError, NullAtomError, SpaceError
from .spaces import (
    ZERO,
    ONE,
    Coordinate,
    CoordinateSpace,
    Event,
    FiniteMeasure,
    StochKernel,
    project,
)


@dataclass(frozen=True)
class FiniteSCM:
    """Structural model over finite domains with tabulated mechanisms.

    ``mechanisms[v]`` is a flat tuple indexed mixed-radix over the parent
    values (in ``parents[v]`` order, first parent most significant) and then
    the noise value.  ``noises[v]`` holds the noise weights; the noise
    cardinality is their count.
    """

    variables: tuple[Coordinate, ...]
    parents: Mapping[str, tuple[str, ...]]
    noises: Mapping[str, tuple[Fraction, ...]]
    mechanisms: Mapping[str, tuple[int, ...]]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate variable names: {names}")
        cards = {v.name: v.cardinality for v in self.variables}
        for v in names:
            for key, table in (("parents", self.parents), ("noises", self.noises),
                               ("mechanisms", self.mechanisms)):
                if v not in table:
                    raise SpaceError(f"variable {v!r} missing from {key}")
        for v in names:
            for p in self.parents[v]:
                if p not in cards:
                    raise SpaceError(f"unknown parent {p!r} of {v!r}")
            weights = self.noises[v]
            if sum(weights, ZERO) != ONE or any(w < 0 for w in weights):
                raise SpaceError(f"noise weights of {v!r} are not a probability vector")
            size = len(weights)
            for p in self.parents[v]:
                size *= cards[p]
            if len(self.mechanisms[v]) != size:
                raise SpaceError(f"mechanism table of {v!r} has wrong length")
            if any(not 0 <= x < cards[v] for x in self.mechanisms[v]):
                raise SpaceError(f"mechanism table of {v!r} has out-of-range values")
        self.topo_order()

    @classmethod
    def build(cls, variables: Iterable[tuple[str, int]],
              parents: Mapping[str, Iterable[str]],
              noises: Mapping[str, Iterable],
              mechanisms: Mapping[str, Iterable[int]]) -> "FiniteSCM":
        return cls(
            variables=tuple(Coordinate(n, k) for n, k in variables),
            parents={v: tuple(ps) for v, ps in parents.items()},
            noises={v: tuple(Fraction(w) for w in ws) for v, ws in noises.items()},
            mechanisms={v: tuple(m) for v, m in mechanisms.items()},
        )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def cards(self) -> dict[str, int]:
        return {v.name: v.cardinality for v in self.variables}

    def space(self) -> CoordinateSpace:
        return CoordinateSpace(self.variables)

    def topo_order(self) -> tuple[str, ...]:
        """Topological order of the variable DAG; raises on cycles."""
        remaining = {v: set(self.parents[v]) for v in self.names}
        order: list[str] = []
        while remaining:
            ready = sorted(v for v, ps in remaining.items() if not ps)
            if not ready:
                raise CyclicSCMError(f"cycle among {sorted(remaining)}")
            for v in ready:
                order.append(v)
                del remaining[v]
            for ps in remaining.values():
                ps.difference_update(ready)
        return tuple(order)

    def mechanism_value(self, var: str, parent_values: Mapping[str, int],
                        noise_value: int) -> int:
        idx = 0
        for p in self.parents[var]:
            idx = idx * self.cards[p] + parent_values[p]
        idx = idx * len(self.noises[var]) + noise_value
        return self.mechanisms[var][idx]


def _mutilated_law(scm: FiniteSCM, pinned: Mapping[str, int]) -> FiniteMeasure:
    """Law of the system with some variables pinned and the rest re-run.

    Noise is enumerated only for the free variables; pinned variables keep
    their assigned value regardless of their own equation.
    """
    space = scm.space()
    order = scm.topo_order()
    free = [v for v in order if v not in pinned]
    weights = [ZERO] * space.n_outcomes
    noise_ranges = [range(len(scm.noises[v])) for v in free]
    for combo in iproduct(*noise_ranges):
        prob = ONE
        for v, nv in zip(free, combo):
            prob *= scm.noises[v][nv]
        if prob == 0:
            continue
        vals = dict(pinned)
        noise_of = dict(zip(free, combo))
        for v in order:
            if v in pinned:
                continue
            vals[v] = scm.mechanism_value(v, vals, noise_of[v])
        weights[space.index_from_values(vals)] += prob
    return FiniteMeasure(space, tuple(weights))


def compile_scm(scm: FiniteSCM) -> FiniteCausalSpace:
    """Causal space of a structural model, with kernels generated lazily.

    K_S at an atom is the law of the mutilated system with S pinned; the
    empty subset reproduces the observational law exactly.
    """
    space = scm.space()
    base = _mutilated_law(scm, {})

    def make(subset: frozenset) -> StochKernel:
        sub = space.restrict(subset)
        rows = []
        for a in range(sub.n_outcomes):
            pinned = dict(zip(sub.names, sub.outcome(a)))
            rows.append(_mutilated_law(scm, pinned))
        return StochKernel(sub, space, tuple(rows))

    return FiniteCausalSpace.lazy(space, base, make)


def pin(scm: FiniteSCM, assignment: Mapping[str, int]) -> FiniteSCM:
    """Hard intervention at the model level: replace equations by constants."""
    parents = dict(scm.parents)
    noises = dict(scm.noises)
    mechanisms = dict(scm.mechanisms)
    for var, value in assignment.items():
        if not 0 <= value < scm.cards[var]:
            raise SpaceError(f"pinned value {value} out of range for {var!r}")
        parents[var] = ()
        noises[var] = (ONE,)
        mechanisms[var] = (value,)
    return FiniteSCM(scm.variables, parents, noises, mechanisms)


def marginal_space(scm: FiniteSCM, subset: Iterable[str]) -> FiniteCausalSpace:
    """Causal space on a variable subset, marginalised from the full model.

    The base measure is the marginal of the observational law, and the
    kernel for S' projects the full-system kernel:
    K_{S'}(omega, A) = L_{S'}(omega, A x Omega_rest).
    """
    full = compile_scm(scm)
    keep = frozenset(subset)
    space = full.space.restrict(keep)
    base = project(full.P, keep)

    def make(inner: frozenset) -> StochKernel:
        sub = space.restrict(inner)
        big = full.kernel(inner)
        rows = tuple(project(r, keep) for r in big.rows)
        return StochKernel(sub, space, rows)

    return FiniteCausalSpace.lazy(space, base, make)


def inclusion_transform(scm: FiniteSCM, subset: Iterable[str]):
    """Conditional-probability transformation from a marginal into the full model.

    kappa(omega, .) = P(. | X_S = omega) with rho the identity embedding of
    the kept variables.  Every kept atom must have positive mass; otherwise
    the conditional is undefined and ``NullAtomError`` lists the offenders.
    """
    from .transform import IndexMap, Transformation

    keep = frozenset(subset)
    source = marginal_space(scm, keep)
    target = compile_scm(scm)
    sub = source.space
    rows = []
    null = []
    for a in range(sub.n_outcomes):
        atom_values = dict(zip(sub.names, sub.outcome(a)))
        atom_event = Event.cylinder(target.space, atom_values)
        if target.P.mass(atom_event) == 0:
            null.append(sub.outcome(a))
            continue
        rows.append(target.P.condition(atom_event))
    if null:
        raise NullAtomError(
            f"null atoms of the kept variables: {null}", atoms=null)
    kernel = StochKernel(sub, target.space, tuple(rows))
    rho = IndexMap(
        source=sub.names,
        target=target.space.names,
        mapping={n: n for n in sub.names},
    )
    return Transformation(source=source, target=target, rho=rho, kernel=kernel)
