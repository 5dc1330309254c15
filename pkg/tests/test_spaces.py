"""Measurable-space layer: atoms, measurability, projection, kernel algebra.

Matrix-product and outer-product oracles for the kernel operations are
written out longhand in exact rational arithmetic so the implementations
are checked against independent code, not against themselves.
"""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import causalkit as ck
from conftest import coordinate_spaces, events, kernels, measures

F = Fraction


def two_bits():
    return ck.CoordinateSpace.make([("X", 2), ("Y", 2)])


# ---------------------------------------------------------------------------
# coordinate spaces


def test_duplicate_names_rejected():
    with pytest.raises(ck.SpaceError):
        ck.CoordinateSpace.make([("X", 2), ("X", 2)])


def test_zero_cardinality_rejected():
    with pytest.raises(ck.SpaceError):
        ck.CoordinateSpace.make([("X", 0)])


def test_outcome_cap_default_and_override(monkeypatch):
    with pytest.raises(ck.OutcomeCapError):
        ck.CoordinateSpace.make([(f"V{i}", 4) for i in range(7)])  # 4^7 > 4096
    big = ck.CoordinateSpace.make([(f"V{i}", 4) for i in range(7)],
                                  max_outcomes=20_000)
    assert big.n_outcomes == 4 ** 7
    monkeypatch.setenv("CAUSALKIT_MAX_OUTCOMES", "20000")
    assert ck.CoordinateSpace.make([(f"V{i}", 4) for i in range(7)]).n_outcomes == 4 ** 7
    monkeypatch.setenv("CAUSALKIT_MAX_OUTCOMES", "8")
    with pytest.raises(ck.OutcomeCapError):
        ck.CoordinateSpace.make([("X", 3), ("Y", 3)])


@given(coordinate_spaces())
def test_index_outcome_roundtrip(space):
    seen = set()
    for i in range(space.n_outcomes):
        o = space.outcome(i)
        assert space.index(o) == i
        seen.add(o)
    assert len(seen) == space.n_outcomes


@given(coordinate_spaces())
def test_project_index_consistent_with_outcome(space):
    names = space.names
    for i in range(space.n_outcomes):
        vals = dict(zip(names, space.outcome(i)))
        for subset in ck.subsets_of(names):
            sub = space.restrict(subset)
            j = space.project_index(i, subset)
            assert sub.outcome(j) == tuple(vals[n] for n in sub.names)


def test_restrict_keeps_space_order():
    space = ck.CoordinateSpace.make([("B", 2), ("A", 3), ("C", 2)])
    assert space.restrict(("C", "A")).names == ("A", "C")


def test_product_space_disjointness():
    a = two_bits()
    with pytest.raises(ck.SpaceError):
        ck.product_space(a, ck.CoordinateSpace.make([("Y", 3)]))
    prod = ck.product_space(a, ck.CoordinateSpace.make([("Z", 3)]))
    assert prod.names == ("X", "Y", "Z")
    assert prod.n_outcomes == 12


def test_rename_space():
    renamed = ck.rename_space(two_bits(), {"X": "A", "Y": "B"})
    assert renamed.names == ("A", "B")
    assert renamed.cards == (2, 2)
    with pytest.raises(ck.SpaceError):
        ck.rename_space(two_bits(), {"X": "Y", "Y": "Y"})


# ---------------------------------------------------------------------------
# events, atoms, measurability


@given(coordinate_spaces())
def test_atoms_partition_the_space(space):
    for subset in ck.subsets_of(space.names):
        ats = ck.atoms(space, subset)
        assert len(ats) == space.restrict(subset).n_outcomes
        covered = sorted(i for a in ats for i in a.indices())
        assert covered == list(range(space.n_outcomes))
        for i, a in enumerate(ats):
            for b in ats[i + 1:]:
                assert a.intersect(b).size == 0


def test_atoms_of_known_subsets():
    space = two_bits()
    assert [a.size for a in ck.atoms(space, ())] == [4]
    assert [a.size for a in ck.atoms(space, ("X",))] == [2, 2]
    assert [a.size for a in ck.atoms(space, ("X", "Y"))] == [1, 1, 1, 1]


def test_is_measurable_known_cases():
    space = two_bits()
    x0 = ck.Event.from_indices(space, [space.index((0, 0)), space.index((0, 1))])
    single = ck.Event.singleton(space, space.index((0, 0)))
    assert ck.is_measurable(x0, ("X",))
    assert not ck.is_measurable(single, ("X",))
    assert ck.is_measurable(single, ("X", "Y"))
    assert ck.is_measurable(ck.Event.full(space), ())
    assert ck.is_measurable(ck.Event.empty(space), ())
    assert not ck.is_measurable(x0, ())


@given(st.data())
def test_is_measurable_iff_union_of_atoms(data):
    space = data.draw(coordinate_spaces())
    event = data.draw(events(space))
    for subset in ck.subsets_of(space.names):
        ats = ck.atoms(space, subset)
        union_of_atoms = all(
            a.is_subset(event) or a.intersect(event).size == 0 for a in ats)
        assert ck.is_measurable(event, subset) == union_of_atoms


@given(st.data())
def test_measurability_monotone_in_subset(data):
    space = data.draw(coordinate_spaces())
    event = data.draw(events(space))
    names = list(space.names)
    small = data.draw(st.sets(st.sampled_from(names))) if names else set()
    extra = data.draw(st.sets(st.sampled_from(names))) if names else set()
    if ck.is_measurable(event, tuple(small)):
        assert ck.is_measurable(event, tuple(small | extra))


def test_event_cylinder():
    space = two_bits()
    ev = ck.Event.cylinder(space, {"Y": 1})
    assert sorted(ev.indices()) == [space.index((0, 1)), space.index((1, 1))]
    assert ck.Event.cylinder(space, {"Y": 2}).size == 0
    with pytest.raises(ck.SpaceError):
        ck.Event.from_indices(space, [4])
    with pytest.raises(ck.SpaceError):
        ck.Event(space, 1 << 4)


# ---------------------------------------------------------------------------
# measures


def test_measure_must_sum_to_one_exactly():
    space = two_bits()
    with pytest.raises(ck.SpaceError):
        ck.FiniteMeasure(space, (F(1, 2), F(1, 2), F(1, 2), F(0)))
    with pytest.raises(ck.SpaceError):
        ck.FiniteMeasure(space, (F(3, 2), F(-1, 2), F(0), F(0)))


@given(measures())
def test_measure_mass_is_additive_and_total(m):
    full = ck.Event.full(m.space)
    assert m.mass(full) == 1
    half = ck.Event.from_indices(
        m.space, range(0, m.space.n_outcomes, 2))
    assert m.mass(half) + m.mass(half.complement()) == 1


@given(measures())
def test_projection_preserves_mass_of_cylinders(m):
    for subset in ck.subsets_of(m.space.names):
        proj = ck.project(m, subset)
        assert proj.space == m.space.restrict(subset)
        assert sum(proj.weights) == 1
        for j, atom in enumerate(ck.atoms(m.space, subset)):
            assert proj.weights[j] == m.mass(atom)


def test_project_known_value(xor):
    marg = ck.project(xor.P, ("Y",))
    assert marg.weights == (F(1, 2), F(1, 2))
    margx = ck.project(xor.P, ("X",))
    assert margx.weights == (F(1, 2), F(1, 2))


def test_condition_and_tensor():
    space = two_bits()
    m = ck.FiniteMeasure(space, (F(1, 4), F(1, 4), F(1, 4), F(1, 4)))
    x1 = ck.Event.cylinder(space, {"X": 1})
    cond = m.condition(x1)
    assert cond.mass(x1) == 1
    with pytest.raises(ck.SpaceError):
        m.condition(ck.Event.empty(space))
    coin = ck.FiniteMeasure.uniform(ck.CoordinateSpace.make([("Z", 2)]))
    joint = m.tensor(coin)
    assert joint.space.names == ("X", "Y", "Z")
    assert sum(joint.weights) == 1


# ---------------------------------------------------------------------------
# kernels


def compose_oracle(first, second):
    """Row-by-row rational matrix product, written out longhand."""
    rows = []
    for a in range(first.domain.n_outcomes):
        w = [F(0)] * second.codomain.n_outcomes
        for mid in range(first.codomain.n_outcomes):
            p = first.rows[a].weights[mid]
            if p == 0:
                continue
            for j in range(second.codomain.n_outcomes):
                w[j] += p * second.rows[mid].weights[j]
        rows.append(tuple(w))
    return rows


@given(st.data())
def test_kernel_compose_matches_matrix_product(data):
    mid = data.draw(coordinate_spaces(max_coords=2))
    first = data.draw(kernels(codomain=mid))
    second = data.draw(kernels(domain=mid))
    composed = ck.kernel_compose(first, second)
    assert composed.domain == first.domain
    assert composed.codomain == second.codomain
    expected = compose_oracle(first, second)
    for a in range(first.domain.n_outcomes):
        assert composed.rows[a].weights == expected[a]


@given(st.data())
def test_kernel_compose_identity_neutral(data):
    k = data.draw(kernels())
    left = ck.kernel_compose(ck.StochKernel.identity(k.domain), k)
    right = ck.kernel_compose(k, ck.StochKernel.identity(k.codomain))
    assert left.rows == k.rows
    assert right.rows == k.rows


@given(st.data())
def test_kernel_compose_associative(data):
    s1 = data.draw(coordinate_spaces(max_coords=2))
    s2 = data.draw(coordinate_spaces(max_coords=2))
    k1 = data.draw(kernels(codomain=s1))
    k2 = data.draw(kernels(domain=s1, codomain=s2))
    k3 = data.draw(kernels(domain=s2))
    lhs = ck.kernel_compose(ck.kernel_compose(k1, k2), k3)
    rhs = ck.kernel_compose(k1, ck.kernel_compose(k2, k3))
    assert lhs.rows == rhs.rows


def outer_oracle(a, b, prod):
    """Entrywise outer product of two kernels over the product indexing."""
    dom = prod.domain
    cod = prod.codomain
    rows = []
    for r in range(dom.n_outcomes):
        ra = dom.project_index(r, a.domain.names)
        rb = dom.project_index(r, b.domain.names)
        w = [F(0)] * cod.n_outcomes
        for j in range(cod.n_outcomes):
            ja = cod.project_index(j, a.codomain.names)
            jb = cod.project_index(j, b.codomain.names)
            w[j] = a.rows[ra].weights[ja] * b.rows[rb].weights[jb]
        rows.append(tuple(w))
    return rows


@given(st.data())
def test_kernel_product_matches_outer_product(data):
    a = data.draw(kernels(domain=ck.CoordinateSpace.make([("A", 2)]),
                          codomain=ck.CoordinateSpace.make([("U", 2)])))
    b = data.draw(kernels(domain=ck.CoordinateSpace.make([("B", 3)]),
                          codomain=ck.CoordinateSpace.make([("V", 2)])))
    prod = ck.kernel_product(a, b)
    expected = outer_oracle(a, b, prod)
    for r in range(prod.domain.n_outcomes):
        assert prod.rows[r].weights == expected[r]


def test_kernel_product_of_diracs_is_dirac():
    s = ck.CoordinateSpace.make([("A", 2)])
    t = ck.CoordinateSpace.make([("B", 3)])
    a = ck.StochKernel.identity(s)
    b = ck.StochKernel.identity(t)
    prod = ck.kernel_product(a, b)
    for r in range(prod.domain.n_outcomes):
        w = prod.rows[r].weights
        assert sorted(w, reverse=True)[0] == 1
        assert w[r] == 1  # domain and codomain share the index layout here


def test_kernel_rows_validated():
    s = two_bits()
    dom = s.restrict(("X",))
    good = ck.FiniteMeasure.uniform(s)
    with pytest.raises(ck.SpaceError):
        ck.StochKernel(dom, s, (good,))  # one row missing
    with pytest.raises(ck.SpaceError):
        ck.StochKernel(dom, s, (good, ck.FiniteMeasure.uniform(dom)))


def test_kernel_constructors():
    s = two_bits()
    m = ck.FiniteMeasure.dirac(s, 3)
    const = ck.StochKernel.constant(s.restrict(("X",)), m)
    assert all(r.weights[3] == 1 for r in const.rows)
    det = ck.StochKernel.deterministic(s, s, tuple((i + 1) % 4 for i in range(4)))
    assert det.rows[0].weights[1] == 1
    ycod = s.restrict(("Y",))
    fn = ck.StochKernel.from_function(
        s, lambda o: ck.FiniteMeasure.dirac(ycod, o[1]))
    assert fn.rows[s.index((0, 1))].weights[1] == 1
    assert fn.value(s.index((1, 0)), ck.Event.cylinder(ycod, {"Y": 0})) == 1
