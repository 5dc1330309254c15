"""Transformations between finite causal spaces.

A transformation is a Markov kernel kappa from one causal space to another
together with a map rho between their coordinate index sets.  Three
properties are checked separately and never gate construction:

  admissible        kappa(., A) is H_{rho^-1(S)}-measurable for A in H_S,
                    for every subset S of the image of rho
  distributional    integrating kappa against the source base measure
                    reproduces the target base measure
  interventional    integrating the source kernel K_{rho^-1(S)} against
                    kappa equals integrating kappa against the target
                    kernel K_S, on the image sigma-algebra

Deterministic maps are stored as outcome tables and lifted to Dirac kernels
on demand.  Both consistency identities are measure-valued in the event
argument, so checks run on atoms; exhaustive event sweeps live in the
oracle module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Optional

from .causal import (
    FiniteCausalSpace,
    independent_pinning_space,
    intervene,
    product,
    subsets_of,
    validate_causal_space,
)
from .errors import (
    NotAdmissibleError,
    NotSurjectiveError,
    SpaceError,
    WellDefinednessError,
)
from .report import CheckReport, Witness, combine
from .spaces import (
    ZERO,
    CoordinateSpace,
    Event,
    FiniteMeasure,
    StochKernel,
    atoms,
    kernel_compose,
)


@dataclass(frozen=True)
class IndexMap:
    """Total map between coordinate index sets."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    mapping: Mapping[str, str]

    def __post_init__(self):
        missing = set(self.source) - set(self.mapping)
        if missing:
            raise SpaceError(f"index map undefined on {sorted(missing)}")
        extra = set(self.mapping) - set(self.source)
        if extra:
            raise SpaceError(f"index map defined on unknown coordinates {sorted(extra)}")
        bad = set(self.mapping.values()) - set(self.target)
        if bad:
            raise SpaceError(f"index map hits unknown targets {sorted(bad)}")

    def __call__(self, name: str) -> str:
        return self.mapping[name]

    def image(self) -> frozenset:
        return frozenset(self.mapping.values())

    def is_surjective(self) -> bool:
        return self.image() == frozenset(self.target)

    def preimage(self, subset: Iterable[str]) -> frozenset:
        wanted = set(subset)
        return frozenset(n for n in self.source if self.mapping[n] in wanted)

    def compose(self, then: "IndexMap") -> "IndexMap":
        if set(self.target) != set(then.source):
            raise SpaceError("index maps do not chain")
        return IndexMap(
            source=self.source,
            target=then.target,
            mapping={n: then.mapping[self.mapping[n]] for n in self.source},
        )


@dataclass(frozen=True)
class Transformation:
    """Kernel (or deterministic outcome table) plus an index map."""

    source: FiniteCausalSpace
    target: FiniteCausalSpace
    rho: IndexMap
    kernel: Optional[StochKernel] = None
    outcome_map: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if (self.kernel is None) == (self.outcome_map is None):
            raise SpaceError("exactly one of kernel / outcome_map required")
        if self.rho.source != self.source.space.names or self.rho.target != self.target.space.names:
            raise SpaceError("index map does not match the coordinate sets")
        if self.kernel is not None:
            if self.kernel.domain != self.source.space or self.kernel.codomain != self.target.space:
                raise SpaceError("kernel does not match source and target spaces")
        else:
            n1, n2 = self.source.space.n_outcomes, self.target.space.n_outcomes
            if len(self.outcome_map) != n1 or any(not 0 <= j < n2 for j in self.outcome_map):
                raise SpaceError("outcome map does not match source and target spaces")

    def is_deterministic(self) -> bool:
        return self.outcome_map is not None

    def lifted_kernel(self) -> StochKernel:
        if self.kernel is not None:
            return self.kernel
        return StochKernel.deterministic(
            self.source.space, self.target.space, self.outcome_map)


def check_admissible(t: Transformation) -> CheckReport:
    """kappa(., A) must be constant on rho^-1(S)-atoms for A an atom of H_S.

    Atoms suffice because kappa(omega, .) is a measure.  S ranges over the
    subsets of the image of rho, taken inclusively.
    """
    lifted = t.lifted_kernel()
    for subset in subsets_of(t.rho.image()):
        pre = t.rho.preimage(subset)
        fibers = atoms(t.source.space, pre)
        for a_event in atoms(t.target.space, subset):
            for fiber in fibers:
                first = None
                first_val = None
                for i in fiber.indices():
                    val = lifted.rows[i].mass(a_event)
                    if first is None:
                        first, first_val = i, val
                    elif val != first_val:
                        return CheckReport(
                            check="admissible",
                            passed=False,
                            witness=Witness(
                                message=(
                                    f"kappa(., A) varies on a fiber of {sorted(pre)}: "
                                    f"{first_val} at {t.source.space.outcome(first)} vs "
                                    f"{val} at {t.source.space.outcome(i)} for an atom of "
                                    f"H_{{{','.join(subset)}}}"),
                                subset=subset,
                                outcome=t.source.space.outcome(i),
                                event=tuple(sorted(a_event.indices())),
                            ),
                        )
    return CheckReport(check="admissible", passed=True)


def check_distributional(t: Transformation) -> CheckReport:
    """Integrating kappa against the source measure must give the target measure."""
    lifted = t.lifted_kernel()
    n2 = t.target.space.n_outcomes
    pushed = [ZERO] * n2
    for i, wi in enumerate(t.source.P.weights):
        if wi == 0:
            continue
        row = lifted.rows[i].weights
        for j in range(n2):
            if row[j] != 0:
                pushed[j] += wi * row[j]
    for j in range(n2):
        if pushed[j] != t.target.P.weights[j]:
            return CheckReport(
                check="distributional",
                passed=False,
                witness=Witness(
                    message=(f"pushforward gives {pushed[j]} on outcome "
                             f"{t.target.space.outcome(j)} but the target measure "
                             f"gives {t.target.P.weights[j]}"),
                    outcome=t.target.space.outcome(j),
                    event=(j,),
                ),
            )
    return CheckReport(check="distributional", passed=True)


def expand_kernel(k: StochKernel, full: CoordinateSpace) -> StochKernel:
    """Reindex an atom-indexed kernel by full outcomes of its base space."""
    rows = tuple(
        k.rows[full.project_index(i, k.domain.names)] for i in range(full.n_outcomes)
    )
    return StochKernel(full, k.codomain, rows)


def check_interventional(t: Transformation) -> CheckReport:
    """Interventions commute with the transformation on the image sigma-algebra.

    For every S inside the image of rho and every source outcome omega,

        int K^1_{rho^-1(S)}(omega, d omega') kappa(omega', A)
      = int kappa(omega, d omega'') K^2_S(omega'', A)

    for A an atom of the image sigma-algebra (atoms suffice: both sides are
    measures in A).  No outcome is exempted, including null ones.
    """
    lifted = t.lifted_kernel()
    image_atoms = atoms(t.target.space, t.rho.image())
    for subset in subsets_of(t.rho.image()):
        pre = t.rho.preimage(subset)
        k1 = expand_kernel(t.source.kernel(pre), t.source.space)
        k2 = expand_kernel(t.target.kernel(subset), t.target.space)
        lhs = kernel_compose(k1, lifted)
        rhs = kernel_compose(lifted, k2)
        for i in range(t.source.space.n_outcomes):
            for a_event in image_atoms:
                left = lhs.rows[i].mass(a_event)
                right = rhs.rows[i].mass(a_event)
                if left != right:
                    return CheckReport(
                        check="interventional",
                        passed=False,
                        witness=Witness(
                            message=(
                                f"at S={{{','.join(subset)}}} and omega="
                                f"{t.source.space.outcome(i)}: source route gives {left}, "
                                f"target route gives {right}"),
                            subset=subset,
                            outcome=t.source.space.outcome(i),
                            event=tuple(sorted(a_event.indices())),
                        ),
                    )
    return CheckReport(check="interventional", passed=True)


def check_all(t: Transformation) -> CheckReport:
    return combine("causal-transformation", [
        check_admissible(t),
        check_distributional(t),
        check_interventional(t),
    ])


def is_abstraction(t: Transformation) -> CheckReport:
    """Causal transformation whose index map is surjective."""
    reports = [check_all(t)]
    if t.rho.is_surjective():
        reports.append(CheckReport(check="rho-surjective", passed=True))
    else:
        missing = sorted(set(t.rho.target) - set(t.rho.image()))
        reports.append(CheckReport(
            check="rho-surjective", passed=False,
            witness=Witness(message=f"rho misses target coordinates {missing}")))
    return combine("abstraction", reports)


def is_perfect_abstraction(t: Transformation) -> CheckReport:
    """Abstraction that is deterministic with a surjective outcome map."""
    reports = [is_abstraction(t)]
    if not t.is_deterministic():
        reports.append(CheckReport(
            check="deterministic", passed=False,
            witness=Witness(message="kappa is stochastic, not an outcome map")))
    else:
        reports.append(CheckReport(check="deterministic", passed=True))
        hit = set(t.outcome_map)
        if len(hit) == t.target.space.n_outcomes:
            reports.append(CheckReport(check="outcome-map-surjective", passed=True))
        else:
            miss = next(j for j in range(t.target.space.n_outcomes) if j not in hit)
            reports.append(CheckReport(
                check="outcome-map-surjective", passed=False,
                witness=Witness(
                    message=f"no source outcome maps to {t.target.space.outcome(miss)}",
                    outcome=t.target.space.outcome(miss))))
    return combine("perfect-abstraction", reports)


def compose(first: Transformation, second: Transformation) -> tuple[Transformation, CheckReport]:
    """Chain two transformations and check the composite.

    The middle spaces must agree.  The composite of two deterministic maps
    stays deterministic; otherwise kernels are chained.  The composite is
    returned together with its full check report: composing preserves the
    transformation property when the first map is an abstraction, but not
    in general, so the report is the caller's evidence either way.
    """
    if first.target.space != second.source.space or first.target.P != second.source.P:
        raise SpaceError("middle spaces do not match")
    rho = first.rho.compose(second.rho)
    if first.is_deterministic() and second.is_deterministic():
        table = tuple(second.outcome_map[j] for j in first.outcome_map)
        composite = Transformation(first.source, second.target, rho, outcome_map=table)
    else:
        k = kernel_compose(first.lifted_kernel(), second.lifted_kernel())
        composite = Transformation(first.source, second.target, rho, kernel=k)
    return composite, check_all(composite)


def inclusion_into_product(c1: FiniteCausalSpace, c2: FiniteCausalSpace) -> Transformation:
    """Embed a factor into a product: kappa(omega, .) = delta_omega (x) P2."""
    target = product(c1, c2)
    rows = tuple(
        FiniteMeasure.dirac(c1.space, i).tensor(c2.P)
        for i in range(c1.space.n_outcomes)
    )
    kernel = StochKernel(c1.space, target.space, rows)
    rho = IndexMap(
        source=c1.space.names,
        target=target.space.names,
        mapping={n: n for n in c1.space.names},
    )
    return Transformation(source=c1, target=target, rho=rho, kernel=kernel)


class Pushforward(NamedTuple):
    space: FiniteCausalSpace
    transformation: Transformation
    report: CheckReport


def _check_pushforward_admissible(source: FiniteCausalSpace, outcome_map: tuple[int, ...],
                                  rho: IndexMap, target_space: CoordinateSpace) -> None:
    # per-coordinate constancy on rho^-1(s)-fibers implies the subset form
    for s2 in target_space.names:
        pre = rho.preimage((s2,))
        pos = target_space.position(s2)
        for fiber in atoms(source.space, pre):
            seen = None
            seen_at = None
            for i in fiber.indices():
                val = target_space.outcome(outcome_map[i])[pos]
                if seen is None:
                    seen, seen_at = val, i
                elif val != seen:
                    raise NotAdmissibleError(
                        f"f sends {source.space.outcome(seen_at)} and "
                        f"{source.space.outcome(i)} to different values of {s2!r} "
                        f"although they agree on {sorted(pre)}")


def pushforward_space(source: FiniteCausalSpace, outcome_map: Iterable[int],
                      rho: IndexMap, target_space: CoordinateSpace) -> Pushforward:
    """Unique causal space making a surjective deterministic pair a transformation.

    Requires rho and f surjective, (f, rho) admissible, and the kernel
    measurability condition: K^1_{rho^-1(S)}(., f^-1(A)) constant on the
    cells of f^-1(H^2_S), for every subset S of the target coordinates.
    The target base measure is the pushforward of the source measure and
    each target kernel row copies the source kernel through f from any
    representative of the cell.
    """
    table = tuple(outcome_map)
    if not rho.is_surjective():
        raise NotSurjectiveError(
            f"rho misses target coordinates {sorted(set(rho.target) - set(rho.image()))}")
    n1, n2 = source.space.n_outcomes, target_space.n_outcomes
    if len(table) != n1 or any(not 0 <= j < n2 for j in table):
        raise SpaceError("outcome map does not match source and target spaces")
    if len(set(table)) != n2:
        miss = next(j for j in range(n2) if j not in set(table))
        raise NotSurjectiveError(f"no source outcome maps to {target_space.outcome(miss)}")
    _check_pushforward_admissible(source, table, rho, target_space)

    preimage_event = [
        Event.from_indices(source.space, (i for i in range(n1) if table[i] == j))
        for j in range(n2)
    ]

    kernels: dict[frozenset, StochKernel] = {}
    for subset in subsets_of(target_space.names):
        pre = rho.preimage(subset)
        k1 = source.kernel(pre)
        sub2 = target_space.restrict(subset)
        pushed_atom_row = [
            tuple(r.mass(preimage_event[j]) for j in range(n2)) for r in k1.rows
        ]
        # cells of f^-1(H^2_S): source outcomes grouped by the S-projection
        # of their image; the pushed kernel row must not depend on the
        # representative chosen inside a cell
        rows: list[Optional[FiniteMeasure]] = [None] * sub2.n_outcomes
        rep_of: list[Optional[int]] = [None] * sub2.n_outcomes
        for i in range(n1):
            cell = target_space.project_index(table[i], sub2.names)
            pushed = pushed_atom_row[source.space.project_index(i, k1.domain.names)]
            if rows[cell] is None:
                rows[cell] = FiniteMeasure(target_space, pushed)
                rep_of[cell] = i
            elif rows[cell].weights != pushed:
                raise WellDefinednessError(
                    f"K_{{{','.join(sorted(pre))}}}(., f^-1(.)) differs between "
                    f"{source.space.outcome(rep_of[cell])} and {source.space.outcome(i)} "
                    f"although f agrees on {sorted(subset)}",
                    witness=(source.space.outcome(rep_of[cell]), source.space.outcome(i)))
        # f surjective onto the target, so every S-atom has a nonempty cell
        kernels[frozenset(subset)] = StochKernel(sub2, target_space, tuple(rows))

    pushed_p = FiniteMeasure(
        target_space,
        tuple(source.P.mass(preimage_event[j]) for j in range(n2)),
    )
    result = FiniteCausalSpace(target_space, pushed_p, kernels=kernels)
    t = Transformation(source=source, target=result, rho=rho, outcome_map=table)
    report = combine("pushforward", [validate_causal_space(result), check_all(t)])
    return Pushforward(result, t, report)


class PushforwardIntervention(NamedTuple):
    source_intervened: FiniteCausalSpace
    target_intervened: FiniteCausalSpace
    transformation: Transformation
    report: CheckReport


def pushforward_intervention(source: FiniteCausalSpace, outcome_map: Iterable[int],
                             rho: IndexMap, target_space: CoordinateSpace,
                             on_target: Iterable[str], measure: FiniteMeasure,
                             mechanism: Optional[FiniteCausalSpace] = None
                             ) -> PushforwardIntervention:
    """Intervene on both sides of a perfect abstraction and re-check the pair.

    The target space is constructed by pushforward, the source is intervened
    on U1 = rho^-1(U2) with (Q1, L1), and the target on U2 with the pushed
    pair Q2 = f_* Q1 and L2 copied through f.  L1 must satisfy the same
    kernel measurability condition as the space kernels, restricted to the
    intervened coordinates; violations raise ``WellDefinednessError``.
    """
    table = tuple(outcome_map)
    pushed = pushforward_space(source, table, rho, target_space)
    u2 = frozenset(on_target)
    u1 = rho.preimage(u2)
    u1_space = source.space.restrict(u1)
    u2_space = target_space.restrict(u2)
    if measure.space != u1_space:
        raise SpaceError("intervention measure must live on the pulled-back subset")
    if mechanism is None:
        mechanism = independent_pinning_space(measure)
    src_done = intervene(source, u1, measure, mechanism)

    # f restricted to the intervened block: admissibility makes the image
    # of omega_{U1} under f's U2-component independent of the rest
    n_u1 = u1_space.n_outcomes
    rep_of_u1: list[Optional[int]] = [None] * n_u1
    for i in range(source.space.n_outcomes):
        a = source.space.project_index(i, u1_space.names)
        if rep_of_u1[a] is None:
            rep_of_u1[a] = i
    f_block = tuple(
        target_space.project_index(table[rep_of_u1[a]], u2_space.names)
        for a in range(n_u1)
    )
    block_preimage = [
        Event.from_indices(u1_space, (a for a in range(n_u1) if f_block[a] == j))
        for j in range(u2_space.n_outcomes)
    ]
    if any(ev.mask == 0 for ev in block_preimage):
        raise NotSurjectiveError("f does not map onto the intervened block")

    # push the mechanism through f, checking along the way that its kernels
    # are measurable with respect to f (cells of equal image must push to
    # the same row)
    pushed_q = FiniteMeasure(
        u2_space,
        tuple(measure.mass(block_preimage[j]) for j in range(u2_space.n_outcomes)),
    )
    nq = u2_space.n_outcomes
    l2_kernels: dict[frozenset, StochKernel] = {}
    for subset in subsets_of(u2):
        pre_sub = rho.preimage(subset)
        l_kernel = mechanism.kernel(pre_sub)
        pushed_atom_row = [
            tuple(r.mass(block_preimage[j]) for j in range(nq)) for r in l_kernel.rows
        ]
        sub2 = u2_space.restrict(subset)
        rows: list[Optional[FiniteMeasure]] = [None] * sub2.n_outcomes
        rep_of: list[Optional[int]] = [None] * sub2.n_outcomes
        for a in range(n_u1):
            cell = u2_space.project_index(f_block[a], sub2.names)
            row = pushed_atom_row[u1_space.project_index(a, l_kernel.domain.names)]
            if rows[cell] is None:
                rows[cell] = FiniteMeasure(u2_space, row)
                rep_of[cell] = a
            elif rows[cell].weights != row:
                raise WellDefinednessError(
                    f"mechanism kernel L_{{{','.join(sorted(pre_sub))}}} is not "
                    f"measurable with respect to f",
                    witness=(u1_space.outcome(rep_of[cell]), u1_space.outcome(a)))
        l2_kernels[frozenset(subset)] = StochKernel(sub2, u2_space, tuple(rows))
    pushed_mechanism = FiniteCausalSpace(u2_space, pushed_q, kernels=l2_kernels)

    tgt_done = intervene(pushed.space, u2, pushed_q, pushed_mechanism)
    t = Transformation(source=src_done, target=tgt_done, rho=rho, outcome_map=table)
    report = combine("pushforward-intervention", [
        validate_causal_space(src_done),
        validate_causal_space(tgt_done),
        check_all(t),
    ])
    return PushforwardIntervention(src_done, tgt_done, t, report)


def rigidity_check(first: Transformation, second: Transformation) -> CheckReport:
    """Two targets of the same (kappa, rho) agree up to null atoms.

    Requires the two transformations to share source, kernel, index map,
    and target measurable space.  Verifies that the target base measures
    are identical and that for every subset S the target kernels agree on
    the atoms of the image sigma-algebra, except on rows whose S-atom is
    null under the (common) target measure; exemptions are listed.
    """
    if first.source is not second.source and first.source.space != second.source.space:
        raise SpaceError("transformations have different sources")
    if first.rho.mapping != second.rho.mapping:
        raise SpaceError("transformations have different index maps")
    if first.lifted_kernel() != second.lifted_kernel():
        raise SpaceError("transformations have different kernels")
    t_space = first.target.space
    if t_space != second.target.space:
        raise SpaceError("targets live on different measurable spaces")
    if first.target.P != second.target.P:
        diff = next(j for j in range(t_space.n_outcomes)
                    if first.target.P.weights[j] != second.target.P.weights[j])
        return CheckReport(
            check="rigidity",
            passed=False,
            witness=Witness(
                message=(f"target measures differ on {t_space.outcome(diff)}: "
                         f"{first.target.P.weights[diff]} vs {second.target.P.weights[diff]}"),
                outcome=t_space.outcome(diff),
                event=(diff,),
            ),
        )
    image_atoms = atoms(t_space, first.rho.image())
    exempt = []
    for subset in subsets_of(t_space.names):
        k_a = first.target.kernel(subset)
        k_b = second.target.kernel(subset)
        s_atoms = atoms(t_space, subset)
        for row in range(k_a.domain.n_outcomes):
            if first.target.P.mass(s_atoms[row]) == 0:
                exempt.append(
                    f"null atom {k_a.domain.outcome(row)} of H_{{{','.join(subset)}}} exempted")
                continue
            for a_event in image_atoms:
                va = k_a.value(row, a_event)
                vb = k_b.value(row, a_event)
                if va != vb:
                    return CheckReport(
                        check="rigidity",
                        passed=False,
                        witness=Witness(
                            message=(f"K_{{{','.join(subset)}}} at {k_a.domain.outcome(row)} "
                                     f"gives {va} vs {vb} on an image atom"),
                            subset=subset,
                            outcome=k_a.domain.outcome(row),
                            event=tuple(sorted(a_event.indices())),
                        ),
                        details=tuple(exempt),
                    )
    return CheckReport(check="rigidity", passed=True, details=tuple(exempt))
