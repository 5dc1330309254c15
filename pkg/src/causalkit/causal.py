"""Finite causal spaces and the operations defined on them.

A causal space is a finite product probability space together with one
causal kernel per coordinate subset S.  Kernels are stored in atom-indexed
form: the row of K_S at the atom of omega_S determines K_S(omega, A) for
every outcome omega in that atom, and an adapter projects full outcomes
before lookup.  Two axioms are verified: the empty kernel reproduces the
base measure, and K_S(omega, .) puts all of its mass on the H_S-atom of
omega.

Kernel families may be tabulated (every subset present up front) or lazy
(computed on demand and cached), so that compiled structural models never
materialise all 2^d kernels unless asked to.  Checks report rather than
raise: an object violating the axioms is still representable, which keeps
counterexamples first-class.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from random import Random
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .errors import InvalidMechanismError, MissingKernelError, SpaceError
from .report import CheckReport, Witness, combine
from .spaces import (
    ZERO,
    CoordinateSpace,
    Event,
    FiniteMeasure,
    StochKernel,
    atoms,
    kernel_product,
    product_space,
    project,
    rename_space,
)

KernelSource = Callable[[frozenset], StochKernel]


def subsets_of(names: Iterable[str]) -> Iterator[tuple[str, ...]]:
    """All subsets of a name collection, by increasing size then name order.

    This is the canonical search order used whenever a check scans subsets,
    so first-witness output is deterministic.
    """
    base = sorted(names)
    for size in range(len(base) + 1):
        for combo in combinations(base, size):
            yield combo


class FiniteCausalSpace:
    """Probability space plus one causal kernel per coordinate subset."""

    def __init__(self, space: CoordinateSpace, P: FiniteMeasure,
                 kernels: Optional[Mapping[frozenset, StochKernel]] = None,
                 kernel_fn: Optional[KernelSource] = None):
        if P.space != space:
            raise SpaceError("base measure on wrong space")
        if (kernels is None) == (kernel_fn is None):
            raise SpaceError("exactly one of kernels / kernel_fn required")
        self.space = space
        self.P = P
        self._table = dict(kernels) if kernels is not None else None
        self._fn = kernel_fn
        self._cache: dict[frozenset, StochKernel] = {}

    @classmethod
    def tabulated(cls, space: CoordinateSpace, P: FiniteMeasure,
                  kernels: Mapping[Iterable[str], StochKernel]) -> "FiniteCausalSpace":
        table = {frozenset(k): v for k, v in kernels.items()}
        return cls(space, P, kernels=table)

    @classmethod
    def lazy(cls, space: CoordinateSpace, P: FiniteMeasure,
             kernel_fn: KernelSource) -> "FiniteCausalSpace":
        return cls(space, P, kernel_fn=kernel_fn)

    def kernel(self, subset: Iterable[str]) -> StochKernel:
        key = frozenset(subset)
        unknown = key - set(self.space.names)
        if unknown:
            raise SpaceError(f"unknown coordinates {sorted(unknown)}")
        if self._table is not None:
            try:
                k = self._table[key]
            except KeyError:
                raise MissingKernelError(f"no kernel for subset {sorted(key)}") from None
        else:
            if key in self._cache:
                return self._cache[key]
            k = self._fn(key)
            self._cache[key] = k
        expected = self.space.restrict(key)
        if k.domain != expected or k.codomain != self.space:
            raise SpaceError(f"kernel for {sorted(key)} has wrong domain or codomain")
        return k

    def kernel_value(self, subset: Iterable[str], outcome_index: int, event: Event) -> Fraction:
        """K_S(omega, A) for a full outcome: project to the atom, then look up."""
        key = frozenset(subset)
        k = self.kernel(key)
        row = self.space.project_index(outcome_index, k.domain.names)
        return k.value(row, event)

    def subsets(self) -> Iterator[tuple[str, ...]]:
        return subsets_of(self.space.names)

    def materialize(self) -> "FiniteCausalSpace":
        """Tabulated copy with every kernel computed."""
        table = {frozenset(s): self.kernel(s) for s in self.subsets()}
        return FiniteCausalSpace(self.space, self.P, kernels=table)


def causal_spaces_equal(a: FiniteCausalSpace, b: FiniteCausalSpace) -> bool:
    """Exact equality: same space, same measure, same kernel table."""
    if a.space != b.space or a.P != b.P:
        return False
    return all(a.kernel(s) == b.kernel(s) for s in a.subsets())


def validate_causal_space(c: FiniteCausalSpace) -> CheckReport:
    """Check both kernel axioms exactly, reporting the first violation.

    Axiom (i): the empty-subset kernel equals the base measure.
    Axiom (ii): each row of K_S is supported inside its own H_S-atom
    (equivalently K_S(omega_S, atom(omega_S)) = 1), which is the atom form
    of K_S(omega, A & B) = 1_A(omega) K_S(omega, B) for A in H_S.
    """
    empty = c.kernel(())
    base_row = empty.rows[0]
    if base_row != c.P:
        diff = next(i for i in range(c.space.n_outcomes)
                    if base_row.weights[i] != c.P.weights[i])
        return CheckReport(
            check="causal-space-axioms",
            passed=False,
            witness=Witness(
                message=(f"empty-subset kernel gives {base_row.weights[diff]} on outcome "
                         f"{c.space.outcome(diff)} but the base measure gives {c.P.weights[diff]}"),
                subset=(),
                outcome=c.space.outcome(diff),
                event=(diff,),
            ),
        )
    for subset in c.subsets():
        if not subset:
            continue
        k = c.kernel(subset)
        fibers = atoms(c.space, subset)
        for a, atom in enumerate(fibers):
            row = k.rows[a]
            for i, w in enumerate(row.weights):
                if w != 0 and not atom.contains(i):
                    return CheckReport(
                        check="causal-space-axioms",
                        passed=False,
                        witness=Witness(
                            message=(f"K_{{{','.join(subset)}}} at atom {k.domain.outcome(a)} "
                                     f"puts mass {w} on outcome {c.space.outcome(i)} outside the atom"),
                            subset=subset,
                            outcome=k.domain.outcome(a),
                            event=(i,),
                        ),
                    )
    return CheckReport(check="causal-space-axioms", passed=True)


def independent_pinning_space(P: FiniteMeasure) -> FiniteCausalSpace:
    """Causal space over P whose kernels pin S and draw the rest from P.

    K_S(omega_S, .) = delta_{omega_S} (x) P restricted to the remaining
    coordinates.  This always satisfies both axioms and is the canonical
    mechanism carrying no dependence between coordinates beyond P itself.
    """
    space = P.space

    def make(subset: frozenset) -> StochKernel:
        sub = space.restrict(subset)
        rest = tuple(n for n in space.names if n not in subset)
        rest_marginal = project(P, rest)
        rows = []
        for a in range(sub.n_outcomes):
            pinned = dict(zip(sub.names, sub.outcome(a)))
            w = [ZERO] * space.n_outcomes
            for i in range(space.n_outcomes):
                vals = dict(zip(space.names, space.outcome(i)))
                if all(vals[n] == v for n, v in pinned.items()):
                    j = rest_marginal.space.index(tuple(vals[n] for n in rest))
                    w[i] = rest_marginal.weights[j]
            rows.append(FiniteMeasure(space, tuple(w)))
        return StochKernel(sub, space, tuple(rows))

    return FiniteCausalSpace.lazy(space, P, make)


def _combine_atom_index(space: CoordinateSpace, parts: Mapping[str, int]) -> int:
    """Index in space.restrict(parts.keys()) of a name-to-value assignment."""
    sub = space.restrict(parts.keys())
    return sub.index(tuple(parts[n] for n in sub.names))


def intervene(c: FiniteCausalSpace, on: Iterable[str], measure: FiniteMeasure,
              mechanism: Optional[FiniteCausalSpace] = None) -> FiniteCausalSpace:
    """Intervention do(U, Q, L) on a causal space.

    The new base measure integrates K_U against Q, and the new kernel for S
    integrates K_{S u U} against L_{S n U}:

        P^do(A)          = sum_u Q(u) K_U(u, A)
        K^do_S(omega, A) = sum_u L_{S n U}(omega_{S n U}, u) K_{S u U}((omega_{S \\ U}, u), A)

    ``mechanism`` is a causal space over the U-marginal space whose base
    measure must equal Q; when omitted, the independent pinning mechanism of
    Q is used.  The caller is responsible for ``c`` itself satisfying the
    axioms; this function does not re-validate it.
    """
    U = frozenset(on)
    u_space = c.space.restrict(U)
    if measure.space != u_space:
        raise SpaceError("intervention measure must live on the restricted space")
    if mechanism is None:
        mechanism = independent_pinning_space(measure)
    if mechanism.space != u_space:
        raise InvalidMechanismError("mechanism lives on the wrong space")
    if mechanism.P != measure:
        raise InvalidMechanismError("mechanism base measure differs from Q")
    mech_report = validate_causal_space(mechanism)
    if not mech_report.passed:
        raise InvalidMechanismError(
            f"mechanism violates the kernel axioms: {mech_report.witness.message}")

    k_u = c.kernel(U)
    n = c.space.n_outcomes
    new_w = [ZERO] * n
    for u in range(u_space.n_outcomes):
        q = measure.weights[u]
        if q == 0:
            continue
        row = k_u.rows[u].weights
        for i in range(n):
            if row[i] != 0:
                new_w[i] += q * row[i]
    new_p = FiniteMeasure(c.space, tuple(new_w))

    u_names = u_space.names

    def make(subset: frozenset) -> StochKernel:
        sub = c.space.restrict(subset)
        inter = subset & U
        s_minus_u = tuple(n for n in sub.names if n not in U)
        l_kernel = mechanism.kernel(inter)
        k_big = c.kernel(subset | U)
        rows = []
        for a in range(sub.n_outcomes):
            vals = dict(zip(sub.names, sub.outcome(a)))
            l_row = l_kernel.rows[_combine_atom_index(u_space, {n: vals[n] for n in inter})]
            w = [ZERO] * n
            for u in range(u_space.n_outcomes):
                lw = l_row.weights[u]
                if lw == 0:
                    continue
                u_vals = dict(zip(u_names, u_space.outcome(u)))
                merged = {n: vals[n] for n in s_minus_u}
                merged.update(u_vals)
                big_row = k_big.rows[_combine_atom_index(c.space, merged)].weights
                for i in range(n):
                    if big_row[i] != 0:
                        w[i] += lw * big_row[i]
            rows.append(FiniteMeasure(c.space, tuple(w)))
        return StochKernel(sub, c.space, tuple(rows))

    return FiniteCausalSpace.lazy(c.space, new_p, make)


class EffectClass:
    """Trichotomy tag for the effect of H_U on an event or sub-sigma-algebra."""

    NO_EFFECT = "no-effect"
    ACTIVE = "active"
    DORMANT = "dormant"

    def __init__(self, tag: str, witness: Optional[Witness] = None):
        if tag not in (self.NO_EFFECT, self.ACTIVE, self.DORMANT):
            raise ValueError(f"unknown tag {tag!r}")
        if (witness is None) != (tag == self.NO_EFFECT):
            raise ValueError("witness required exactly when the tag is not no-effect")
        self.tag = tag
        self.witness = witness

    def __repr__(self):
        return f"EffectClass({self.tag!r})"

    def __eq__(self, other):
        if isinstance(other, EffectClass):
            return self.tag == other.tag
        return NotImplemented

    def to_dict(self) -> dict:
        return {"tag": self.tag, "witness": self.witness.to_dict() if self.witness else None}


def _first_interventional_violation(c: FiniteCausalSpace, U: frozenset,
                                    event: Event) -> Optional[Witness]:
    """First (S, omega) with K_S(omega, A) != K_{S \\ U}(omega, A).

    Scans subsets by increasing cardinality then name order; inside a
    subset, atoms by index.  Equality for every pair means H_U has no
    causal effect on the event.
    """
    for subset in subsets_of(c.space.names):
        s = frozenset(subset)
        reduced = s - U
        if reduced == s:
            continue
        k_s = c.kernel(s)
        k_r = c.kernel(reduced)
        sub = k_s.domain
        for a in range(sub.n_outcomes):
            lhs = k_s.value(a, event)
            omega = sub.outcome(a)
            vals = dict(zip(sub.names, omega))
            r = _combine_atom_index(c.space, {n: vals[n] for n in reduced}) if reduced else 0
            rhs = k_r.value(r, event)
            if lhs != rhs:
                return Witness(
                    message=(f"K_{{{','.join(subset)}}} at {omega} gives {lhs} on the event "
                             f"but dropping {sorted(U)} gives {rhs}"),
                    subset=subset,
                    outcome=omega,
                    event=tuple(sorted(event.indices())),
                )
    return None


def _first_active_witness(c: FiniteCausalSpace, U: frozenset,
                          event: Event) -> Optional[Witness]:
    k_u = c.kernel(U)
    base = c.P.mass(event)
    for a in range(k_u.domain.n_outcomes):
        val = k_u.value(a, event)
        if val != base:
            return Witness(
                message=(f"K_{{{','.join(sorted(U))}}} at {k_u.domain.outcome(a)} gives {val} "
                         f"on the event but the base measure gives {base}"),
                subset=tuple(sorted(U)),
                outcome=k_u.domain.outcome(a),
                event=tuple(sorted(event.indices())),
            )
    return None


def classify_effect(c: FiniteCausalSpace, on: Iterable[str], event: Event) -> EffectClass:
    """Classify the effect of H_U on an event: no-effect, active, or dormant.

    Active: some omega has K_U(omega, A) != P(A).  No effect: every subset S
    satisfies K_S(omega, A) = K_{S \\ U}(omega, A) for every omega, with no
    exemption for null outcomes.  Dormant: neither.
    """
    U = frozenset(on)
    active = _first_active_witness(c, U, event)
    if active is not None:
        return EffectClass(EffectClass.ACTIVE, active)
    violation = _first_interventional_violation(c, U, event)
    if violation is None:
        return EffectClass(EffectClass.NO_EFFECT)
    return EffectClass(EffectClass.DORMANT, violation)


def classify_effect_on(c: FiniteCausalSpace, on: Iterable[str],
                       target: Iterable[str]) -> EffectClass:
    """Classify the effect of H_U on the sub-sigma-algebra H_V.

    Both defining quantifiers are additive in the event, so checking the
    atoms of H_V settles every union of atoms as well.
    """
    U = frozenset(on)
    target_atoms = atoms(c.space, target)
    for atom in target_atoms:
        w = _first_active_witness(c, U, atom)
        if w is not None:
            return EffectClass(EffectClass.ACTIVE, w)
    for atom in target_atoms:
        w = _first_interventional_violation(c, U, atom)
        if w is not None:
            return EffectClass(EffectClass.DORMANT, w)
    return EffectClass(EffectClass.NO_EFFECT)


def is_source(c: FiniteCausalSpace, on: Iterable[str],
              target: Iterable[str]) -> CheckReport:
    """Whether K_U(., A) is a version of the conditional probability of A given H_U.

    Finite form: on every U-atom of positive mass, K_U(omega_U, A) must equal
    P(A & atom) / P(atom) for every atom A of H_V.  Null U-atoms are
    unconstrained by the definition of conditional probability; they are
    exempted and listed in the report.  With V the full coordinate set this
    is the global-source check.
    """
    U = tuple(sorted(frozenset(on)))
    k_u = c.kernel(U)
    u_atoms = atoms(c.space, U)
    exempt = []
    for a, u_atom in enumerate(u_atoms):
        z = c.P.mass(u_atom)
        if z == 0:
            exempt.append(f"null atom {k_u.domain.outcome(a)} of H_{{{','.join(U)}}} exempted")
            continue
        for v_atom in atoms(c.space, target):
            lhs = k_u.value(a, v_atom)
            rhs = c.P.mass(v_atom & u_atom) / z
            if lhs != rhs:
                return CheckReport(
                    check="local-source",
                    passed=False,
                    witness=Witness(
                        message=(f"K_{{{','.join(U)}}} at {k_u.domain.outcome(a)} gives {lhs} "
                                 f"but conditioning gives {rhs}"),
                        subset=U,
                        outcome=k_u.domain.outcome(a),
                        event=tuple(sorted(v_atom.indices())),
                    ),
                    details=tuple(exempt),
                )
    return CheckReport(check="local-source", passed=True, details=tuple(exempt))


def is_global_source(c: FiniteCausalSpace, on: Iterable[str]) -> CheckReport:
    return is_source(c, on, c.space.names)


def causally_independent(c: FiniteCausalSpace, on: Iterable[str],
                         a: Event, b: Event) -> bool:
    """Whether K_U(omega, A & B) = K_U(omega, A) K_U(omega, B) for every omega."""
    k_u = c.kernel(frozenset(on))
    both = a & b
    for row in range(k_u.domain.n_outcomes):
        if k_u.value(row, both) != k_u.value(row, a) * k_u.value(row, b):
            return False
    return True


def causally_independent_on(c: FiniteCausalSpace, on: Iterable[str],
                            first: Iterable[str], second: Iterable[str],
                            max_enum_atoms: int = 16, samples: int = 64,
                            seed: int = 0) -> bool:
    """Causal independence of two sub-sigma-algebras on H_U.

    The product identity is not additive in either argument, so atom pairs
    alone do not witness it for unions.  When the two atom counts total at
    most ``max_enum_atoms`` every pair of atom unions is enumerated; beyond
    that, all atom pairs plus ``samples`` seeded random union pairs are
    checked.
    """
    atoms_a = atoms(c.space, first)
    atoms_b = atoms(c.space, second)
    na, nb = len(atoms_a), len(atoms_b)

    def union(atom_list, mask):
        ev = Event.empty(c.space)
        for i in iter_atoms(mask):
            ev = ev | atom_list[i]
        return ev

    def iter_atoms(mask):
        i = 0
        while mask:
            if mask & 1:
                yield i
            mask >>= 1
            i += 1

    if na + nb <= max_enum_atoms:
        pairs = (
            (union(atoms_a, ma), union(atoms_b, mb))
            for ma in range(1 << na)
            for mb in range(1 << nb)
        )
    else:
        rng = Random(seed)
        fixed = [(a, b) for a in atoms_a for b in atoms_b]
        sampled = [
            (union(atoms_a, rng.randrange(1, 1 << na)),
             union(atoms_b, rng.randrange(1, 1 << nb)))
            for _ in range(samples)
        ]
        pairs = iter(fixed + sampled)

    return all(causally_independent(c, on, a, b) for a, b in pairs)


def product(c1: FiniteCausalSpace, c2: FiniteCausalSpace) -> FiniteCausalSpace:
    """Product causal space: measures tensor and kernels split by factor.

    K_{S}(omega, A1 x A2) = K1_{S n T1}(omega_1, A1) K2_{S n T2}(omega_2, A2).
    Coordinate names must be disjoint; use ``rename`` first if they clash.
    """
    space = product_space(c1.space, c2.space)
    names1 = set(c1.space.names)
    names2 = set(c2.space.names)
    p = c1.P.tensor(c2.P)

    def make(subset: frozenset) -> StochKernel:
        # factor-wise concatenation agrees with space.restrict(subset)
        # because the product space lists first-factor coordinates first
        k1 = c1.kernel(subset & names1)
        k2 = c2.kernel(subset & names2)
        return kernel_product(k1, k2)

    return FiniteCausalSpace.lazy(space, p, make)


def rename(c: FiniteCausalSpace, mapping: Mapping[str, str]) -> FiniteCausalSpace:
    """Rename coordinates everywhere (space, measure, kernel family)."""
    space = rename_space(c.space, mapping)
    inverse = {mapping.get(n, n): n for n in c.space.names}
    p = FiniteMeasure(space, c.P.weights, c.P.subprobability)

    def make(subset: frozenset) -> StochKernel:
        old = c.kernel(frozenset(inverse[n] for n in subset))
        dom = rename_space(old.domain, mapping)
        rows = tuple(FiniteMeasure(space, r.weights, r.subprobability) for r in old.rows)
        return StochKernel(dom, space, rows)

    return FiniteCausalSpace.lazy(space, p, make)
