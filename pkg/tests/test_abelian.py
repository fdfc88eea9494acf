import itertools

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from commons.funcs_abelian import (FiniteAbelianGroup, Phase, Bicharacter, QuadraticForm, Subgroup,
                                   enumerate_bicharacters, enumerate_quadratic_forms, even_quadratic_forms,
                                   bicharacter_classes, fourier, automorphisms, orthogonal_and_lagrangian,
                                   lagrangian_subgroups, all_subgroups)
from commons.funcs_common import InputError, ResourceError

GROUPS_UP_TO_12 = [(2,), (3,), (4,), (2, 2), (5,), (6,), (7,), (8,), (2, 4), (2, 2, 2), (9,), (3, 3), (10,),
                   (11,), (12,), (2, 6)]


def _form(b, table):
    G = b.group
    return QuadraticForm(b, tuple(table[g] for g in G.elements()))


def test_phase_arithmetic():
    p = Phase.from_ratio(1, 3)
    assert (p * p * p).is_one()
    assert p.conjugate() == Phase.from_ratio(2, 3)
    assert Phase.from_ratio(-1, 4).value() == -1j
    assert Phase.from_ratio(6, 8).to_json() == {"num": 3, "den": 4}


def test_canonical_form_is_enforced():
    with pytest.raises(InputError):
        FiniteAbelianGroup((6, 2))
    assert FiniteAbelianGroup.from_factors((2, 2, 3)).group.invariant_factors == (2, 6)
    assert FiniteAbelianGroup.from_factors((4, 2)).group.invariant_factors == (2, 4)


@pytest.mark.parametrize("factors", [(2, 2, 3), (3, 2), (4, 6), (2, 3, 5)])
def test_presentation_is_isomorphism(factors):
    pres = FiniteAbelianGroup.from_factors(factors)
    G = pres.group
    images = {pres.to_canonical(x) for x in pres.elements()}
    assert len(images) == G.order
    for x, y in itertools.product(pres.elements(), repeat=2):
        s = tuple((u + v) % n for u, v, n in zip(x, y, factors))
        assert pres.to_canonical(s) == G.add(pres.to_canonical(x), pres.to_canonical(y))


@pytest.mark.parametrize("factors", [(6,), (2, 6), (3, 12), (5,)])
def test_canonical_presentation_is_identity(factors):
    pres = FiniteAbelianGroup.from_factors(factors)
    assert pres.group.invariant_factors == factors
    for x in pres.elements():
        assert pres.to_canonical(x) == x


def test_z2_has_one_nondegenerate_bicharacter(z2):
    bichars = enumerate_bicharacters(z2, nondegenerate_only=True)
    assert len(bichars) == 1
    assert bichars[0].pair((1,), (1,)).value() == -1


def test_z2z2_has_two_classes(z2z2):
    assert len(bicharacter_classes(z2z2, nondegenerate_only=True)) == 2


def test_z3_bicharacters(z3):
    bichars = enumerate_bicharacters(z3, nondegenerate_only=True)
    assert len(bichars) == 2
    assert {b.pair((1,), (1,)) for b in bichars} == {Phase.from_ratio(1, 3), Phase.from_ratio(2, 3)}
    # g ↦ 2g squares the exponent, so the two forms are only related by complex conjugation
    assert len(bicharacter_classes(z3)) == 2
    assert len(bicharacter_classes(z3, up_to_conjugation=True)) == 1


@pytest.mark.parametrize("factors", GROUPS_UP_TO_12)
def test_bicharacters_are_symmetric_and_bilinear(factors):
    G = FiniteAbelianGroup(factors)
    elements = G.elements()
    for b in enumerate_bicharacters(G):
        table = b.phase_table
        for i, j in itertools.product(range(G.order), repeat=2):
            assert table[i][j] == table[j][i]
        for g, g2, h in itertools.product(elements, repeat=3):
            assert b.pair(G.add(g, g2), h) == b.pair(g, h) * b.pair(g2, h)


@pytest.mark.parametrize("factors", GROUPS_UP_TO_12)
def test_quadratic_forms_satisfy_coboundary(factors):
    G = FiniteAbelianGroup(factors)
    for b in enumerate_bicharacters(G, nondegenerate_only=True):
        forms = enumerate_quadratic_forms(b)
        assert len(forms) == G.order
        assert len({a.values for a, _ in forms}) == G.order
        for a, even in forms:
            assert a.is_valid()
            assert even == all(a(g) == a(G.neg(g)) for g in G.elements())


def test_z2_forms(z2):
    b = enumerate_bicharacters(z2, nondegenerate_only=True)[0]
    forms = enumerate_quadratic_forms(b)
    assert {a((1,)).value() for a, _ in forms} == {1j, -1j}
    assert all(even for _, even in forms)


def test_z3_even_form(z3):
    b = Bicharacter.standard(z3)
    values = {a.values for a in even_quadratic_forms(b)}
    zeta = Phase.from_ratio(1, 3)
    assert (Phase(), zeta, zeta) in values


def test_z5_form_is_valid(z5):
    b = Bicharacter.standard(z5)
    a = QuadraticForm(b, tuple(Phase.from_ratio(2 * g * g, 5) for g in range(5)))
    assert a.is_valid() and a.is_even()
    ahat = fourier(a.vector, b)
    assert abs(abs(ahat[0]) - 1) < 1e-12
    assert np.allclose(ahat, ahat[0] * np.conj(a.vector), atol=1e-12)


def test_fourier_examples(z2, z3):
    delta = np.array([1, 0, 0], dtype=complex)
    assert np.allclose(fourier(delta, Bicharacter.standard(z3)), np.full(3, 1 / np.sqrt(3)))
    b = Bicharacter.standard(z2)
    a = QuadraticForm(b, (Phase(), Phase.from_ratio(1, 4)))
    assert abs(a.gauss_sum() - (1 + 1j) / np.sqrt(2)) < 1e-12


@settings(deadline=None)
@given(st.sampled_from([(3,), (4,), (2, 2), (6,), (3, 3)]),
       st.lists(st.floats(-10, 10), min_size=18, max_size=18))
def test_fourier_involution_and_plancherel(factors, raw):
    G = FiniteAbelianGroup(factors)
    b = enumerate_bicharacters(G, nondegenerate_only=True)[0]
    f = np.array(raw[:G.order]) + 1j * np.array(raw[G.order:2 * G.order])
    twice = fourier(fourier(f, b), b)
    assert np.allclose(twice, f[G.neg_index], atol=1e-10)
    assert abs(np.linalg.norm(fourier(f, b)) - np.linalg.norm(f)) < 1e-12 * max(1.0, np.linalg.norm(f))


@pytest.mark.parametrize("factors", [(2,), (3,), (4,), (2, 2), (5,), (7,), (2, 4), (3, 3)])
def test_gauss_sum_of_even_forms_is_unimodular(factors):
    G = FiniteAbelianGroup(factors)
    for b in enumerate_bicharacters(G, nondegenerate_only=True):
        for a in even_quadratic_forms(b):
            assert abs(abs(a.gauss_sum()) - 1) < 1e-12


@pytest.mark.parametrize("factors, count", [((2,), 1), ((5,), 4), ((2, 2), 6), ((3, 3), 48), ((2, 4), 8)])
def test_automorphism_counts(factors, count):
    G = FiniteAbelianGroup(factors)
    auts = automorphisms(G)
    assert len(auts) == count
    keys = {tuple(t.perm) for t in auts}
    for s, t in itertools.product(auts, repeat=2):
        assert tuple(s.compose(t).perm) in keys
    for t in auts:
        for g, h in itertools.product(G.elements(), repeat=2):
            assert t(G.add(g, h)) == G.add(t(g), t(h))


def test_automorphisms_resource_bound():
    with pytest.raises(ResourceError):
        automorphisms(FiniteAbelianGroup((2, 2, 2)), max_order=4)


def test_z2z2_lagrangian(z2z2):
    b = Bicharacter.from_exponents(z2z2, [[1, 0], [0, 1]])
    i, mi = Phase.from_ratio(1, 4), Phase.from_ratio(3, 4)
    a = _form(b, {(0, 0): Phase(), (1, 0): i, (0, 1): mi, (1, 1): Phase()})
    assert a.is_valid()
    H_perp, isotropic, lagrangian = orthogonal_and_lagrangian(z2z2, b, a, [(0, 0), (1, 1)])
    assert isotropic and lagrangian
    assert set(H_perp.elements) == {(0, 0), (1, 1)}


def test_z3z3_has_exactly_two_lagrangians():
    G = FiniteAbelianGroup((3, 3))
    b = Bicharacter.from_exponents(G, [[1, 0], [0, -1]])
    a = _form(b, {g: Phase.from_ratio(g[0] ** 2 - g[1] ** 2, 3) for g in G.elements()})
    assert a.is_valid()
    found = {frozenset(H.elements) for H in lagrangian_subgroups(b, a)}
    assert found == {frozenset({(0, 0), (1, 1), (2, 2)}), frozenset({(0, 0), (1, 2), (2, 1)})}


def test_trivial_subgroup_is_isotropic(z3):
    b = Bicharacter.standard(z3)
    a = even_quadratic_forms(b)[0]
    H_perp, isotropic, lagrangian = orthogonal_and_lagrangian(z3, b, a, [(0,)])
    assert H_perp.order == 3 and isotropic and not lagrangian


def test_subgroup_must_be_closed(z4):
    b = Bicharacter.standard(z4)
    a = even_quadratic_forms(b)[0]
    with pytest.raises(InputError):
        orthogonal_and_lagrangian(z4, b, a, [(0,), (1,)])


def test_subgroup_lattice_of_z2z2(z2z2):
    assert len(all_subgroups(z2z2)) == 5
    H = Subgroup.generated_by(z2z2, [(1, 1)])
    assert H.order == 2 and len(H.cosets()) == 2
