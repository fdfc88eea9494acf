import os

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from commons.constants import DIM_IRRATIONAL, DIM_RATIONAL, DIM_INCONSISTENT, ALPHA, RHO, SIGMA, PI, GAMMA_ALPHA, \
    GAMMA_RHO
from commons.funcs_abelian import (FiniteAbelianGroup, Bicharacter, QuadraticForm, Phase, Subgroup,
                                   GroupAutomorphism, enumerate_bicharacters, enumerate_quadratic_forms,
                                   lagrangian_subgroups)
from commons.funcs_cases import z3_m6_data, z3_m6_family
from commons.funcs_common import InputError, VerificationError
from commons.funcs_fusion import (FusionRing, SimpleObject, GammaData, dimension_diagnosis, near_group_ring,
                                  principal_graph, dequiv_fusion, dequiv_twisted, check_twisting_cocycle,
                                  equiv_fusion, ktog_check, rings_isomorphic, contains_ring, quotient_group,
                                  group_type_guess, out_group)
from commons.funcs_neargroup import MNSolution

GAMMA_D8 = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "gamma", "d8.yaml")


def _haagerup_ring():
    """
    1, α, α², σ, ασ, α²σ with σα = α²σ and σ² = 1 + σ + ασ + α²σ
    """
    labels = [("a", i) for i in range(3)] + [("s", i) for i in range(3)]

    def rule(x, y):
        (kx, i), (ky, j) = x, y
        if kx == "a" and ky == "a":
            return {("a", (i + j) % 3): 1}
        if kx == "a":
            return {("s", (i + j) % 3): 1}
        if ky == "a":
            return {("s", (i - j) % 3): 1}
        out = {("s", k): 1 for k in range(3)}
        out[("a", (i - j) % 3)] = 1
        return out

    return FusionRing.from_rule("Haagerup", labels, rule)


def _su2_even_ring(level):
    """
    Even spins of SU(2)_level: f_i f_j = f_{|i−j|} + … + f_{min(i+j, 2·level−i−j)}
    """
    labels = list(range(0, level + 1, 2))

    def rule(i, j):
        return {k: 1 for k in range(abs(i - j), min(i + j, 2 * level - i - j) + 1, 2)}

    return FusionRing.from_rule(f"SU(2)_{level} even", labels, rule)


def _z3z3_data():
    G = FiniteAbelianGroup((3, 3))
    b = Bicharacter.from_exponents(G, [[1, 0], [0, -1]])
    a = QuadraticForm(b, tuple(Phase.from_ratio(g[0] ** 2 - g[1] ** 2, 3) for g in G.elements()))
    return G, b, a


def _z2z2z3_twisting():
    """
    ℤ₂×ℤ₂×ℤ₃ with the hyperbolic form on ℤ₂×ℤ₂, H = ℤ₂×ℤ₂ and the cocycle table on g₀ = e₁, g₁ = e₂, g₂ = e₁+e₂
    """
    pres = FiniteAbelianGroup.from_factors((2, 2, 3))
    G = pres.group
    b = pres.bicharacter([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    a = enumerate_quadratic_forms(b)[0][0]
    zero = pres.to_canonical((0, 0, 0))
    g = [pres.to_canonical(x) for x in ((1, 0, 0), (0, 1, 0), (1, 1, 0))]
    H = Subgroup.from_elements(G, [zero] + g)
    table = [[1, 1j, -1j],
             [-1j, 1, 1j],
             [1j, -1j, 1]]
    omega = {(zero, zero): 1}
    for i, h in enumerate(g):
        omega[(zero, h)] = omega[(h, zero)] = 1
        for j, k in enumerate(g):
            omega[(h, k)] = table[i][j]
    return G, b, a, H, omega


@pytest.mark.parametrize("n, m, kind, s, t", [
    (3, 2, DIM_RATIONAL, 3, 1),
    (8, 2, DIM_RATIONAL, 2, 2),
    (4, 0, DIM_RATIONAL, 1, 2),
    (2, 2, DIM_IRRATIONAL, None, None),
    (8, 4, DIM_IRRATIONAL, None, None),
    (6, 1, DIM_INCONSISTENT, None, None),
])
def test_dimension_diagnosis(n, m, kind, s, t):
    diagnosis = dimension_diagnosis(n, m)
    assert diagnosis.kind == kind
    assert (diagnosis.s, diagnosis.t) == (s, t)
    assert diagnosis.consistent == (kind != DIM_INCONSISTENT)
    if kind == DIM_RATIONAL:
        assert n == s * t * t and m == (s - 1) * t
        assert float(diagnosis.d) == pytest.approx(s * t)


def test_dimension_diagnosis_z2_value():
    assert float(dimension_diagnosis(2, 2).d) == pytest.approx(1 + np.sqrt(3))
    with pytest.raises(InputError):
        dimension_diagnosis(0, 1)


@given(st.integers(min_value=1, max_value=60), st.integers(min_value=0, max_value=60))
def test_dimension_diagnosis_rational_factorization(n, m):
    diagnosis = dimension_diagnosis(n, m)
    d = float(diagnosis.d)
    assert d * d == pytest.approx(n + m * d)
    if diagnosis.kind == DIM_RATIONAL:
        assert diagnosis.s * diagnosis.t ** 2 == n
        assert (diagnosis.s - 1) * diagnosis.t == m


def test_near_group_ring_z2(z2):
    ring = near_group_ring(z2, 2)
    rho = SimpleObject(RHO)
    assert ring.product(rho, rho) == {SimpleObject(ALPHA, (0,)): 1, SimpleObject(ALPHA, (1,)): 1, rho: 2}
    assert ring.dimension(rho) == pytest.approx(1 + np.sqrt(3))
    assert ring.format_product(rho, rho) == "α(0) ⊕ α(1) ⊕ 2ρ"


def test_near_group_ring_trivial_group_is_fibonacci():
    ring = near_group_ring(FiniteAbelianGroup(()), 1)
    assert ring.size == 2
    assert ring.dimension(SimpleObject(RHO)) == pytest.approx((1 + np.sqrt(5)) / 2)
    assert str(ring.labels[0]) == "1"


@pytest.mark.parametrize("factors, l", [((2,), 1), ((3,), 2), ((2, 2), 1), ((4,), 3), ((2, 6), 1)])
def test_near_group_ring_axioms(factors, l):
    G = FiniteAbelianGroup(factors)
    ring = near_group_ring(G, l * G.order)
    defects = ring.check()
    assert defects["associativity"] == 0
    assert defects["unit"] == 0
    assert defects["dimension"] < 1e-9
    d = ring.dimension(SimpleObject(RHO))
    assert d * d == pytest.approx(G.order + l * G.order * d, abs=1e-12 * d * d)


def test_non_associative_ring_is_rejected():
    labels = ["1", "x"]
    N = np.zeros((2, 2, 2), dtype=int)
    N[0, 0, 0] = N[0, 1, 1] = N[1, 0, 1] = 1
    N[1, 1, 0] = 1
    N[1, 1, 1] = 1
    N[0, 1, 0] = 1
    with pytest.raises(VerificationError):
        FusionRing("broken", labels, N).validate()


def test_fusion_ring_to_json(z3):
    data = near_group_ring(z3, 3).to_json()
    assert data["labels"] == ["α(0)", "α(1)", "α(2)", "ρ"]
    assert np.array(data["structure_constants"]).shape == (4, 4, 4)
    assert data["objects"][3] == {"kind": RHO, "element": [], "rep": ""}


@pytest.mark.parametrize("factors", [(), (2,), (3,), (2, 2), (5,), (6,), (2, 4), (3, 3), (12,), (2, 6)])
@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_principal_graph_norm(factors, l):
    G = FiniteAbelianGroup(factors)
    graph = principal_graph(G, l)
    assert graph.norm_residual() < 1e-9
    assert graph.index() == pytest.approx(1 + l * float(graph.d))


def test_principal_graph_z3_l2(z3):
    graph = principal_graph(z3, 2)
    assert graph.norm_squared() == pytest.approx(1 + 2 * (3 + 2 * np.sqrt(3)))
    assert graph.adjacency.tolist() == [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [2, 2, 2, 1]]
    dot = graph.to_dot()
    assert dot.startswith('graph "2^{Z3}_2 1"')
    assert dot.count('label="2"') == 3
    assert graph.metadata["self_dual"] is None
    assert graph.to_json()["even"][-1] == "ρ"


def test_principal_graph_rejects_l_zero(z2):
    with pytest.raises(InputError):
        principal_graph(z2, 0)


def test_principal_graph_self_duality_flag():
    s = z3_m6_family(0.1)
    graph = principal_graph(s.group, 2, s)
    assert graph.metadata["self_dual"] == (len(set(s.acj.shifts)) == 1)
    assert principal_graph(s.group, 1).metadata["self_dual"] is True
    with pytest.raises(InputError):
        principal_graph(s.group, 3, s)


def test_dequiv_trivial_subgroup_returns_near_group_ring():
    G, b, a = z3_m6_data()
    assert a.is_valid()
    ring = dequiv_fusion(G, b, a, [G.zero])
    assert rings_isomorphic(ring, near_group_ring(G, G.order)) is not None


def test_dequiv_rejects_non_isotropic_subgroup(z3):
    G, b, a = z3_m6_data()
    with pytest.raises(InputError):
        dequiv_fusion(G, b, a, G.elements())


def test_z3z3_has_two_lagrangians():
    G, b, a = _z3z3_data()
    assert a.is_valid()
    found = {H.elements for H in lagrangian_subgroups(b, a)}
    assert found == {((0, 0), (1, 1), (2, 2)), ((0, 0), (1, 2), (2, 1))}


def test_z3z3_dequiv_gives_haagerup_rules():
    G, b, a = _z3z3_data()
    haagerup = _haagerup_ring()
    for H in lagrangian_subgroups(b, a):
        ring = dequiv_fusion(G, b, a, H)
        assert ring.notes["lagrangian"]
        assert ring.notes["sigma_self_conjugate"]
        assert rings_isomorphic(ring, haagerup) is not None
        sigma = SimpleObject(SIGMA, G.zero)
        d = ring.dimension(sigma)
        assert d == pytest.approx((3 + np.sqrt(13)) / 2)


def test_z2z2_dequiv_gives_even_part_of_a7(z2z2):
    a7_even = _su2_even_ring(6)
    rings = []
    for b in enumerate_bicharacters(z2z2, nondegenerate_only=True):
        for a, _ in enumerate_quadratic_forms(b):
            for H in lagrangian_subgroups(b, a):
                rings.append(dequiv_fusion(z2z2, b, a, H))
    assert rings
    for ring in rings:
        assert ring.size == 4
        assert rings_isomorphic(ring, a7_even) is not None


def test_dequiv_sigma_dimension_bookkeeping():
    G, b, a = _z3z3_data()
    d = (9 + np.sqrt(81 + 36)) / 2
    for H in lagrangian_subgroups(b, a):
        ring = dequiv_fusion(G, b, a, H)
        assert ring.dimension(SimpleObject(SIGMA, G.zero)) == pytest.approx(d / H.order)


def test_twisting_cocycle_table_is_valid():
    G, b, a, H, omega = _z2z2z3_twisting()
    report = check_twisting_cocycle(b, H, omega)
    assert report.passed, report.residuals


def test_dequiv_twisted_z2z2z3_gives_z3_m6():
    G, b, a, H, omega = _z2z2z3_twisting()
    ring = dequiv_twisted(G, b, a, H, omega)
    assert ring.name == "K(Z3, 6)"
    assert ring.notes["s"] == 1
    assert rings_isomorphic(ring, near_group_ring(FiniteAbelianGroup((3,)), 6)) is not None


def test_dequiv_twisted_rejects_trivial_cocycle():
    G, b, a, H, omega = _z2z2z3_twisting()
    trivial = {key: 1 for key in omega}
    with pytest.raises(VerificationError):
        dequiv_twisted(G, b, a, H, trivial)


def test_dequiv_twisted_trivial_subgroup_is_identity(z3):
    G, b, a = z3_m6_data()
    ring = dequiv_twisted(G, b, a, [G.zero])
    assert rings_isomorphic(ring, near_group_ring(G, 3)) is not None


def test_dequiv_twisted_needs_elementary_two_group(z4):
    b = Bicharacter.standard(z4)
    a = enumerate_quadratic_forms(b)[0][0]
    with pytest.raises(InputError):
        dequiv_twisted(z4, b, a, z4.elements(), {})


def test_gamma_data_from_yaml():
    gamma = GammaData.from_yaml(GAMMA_D8)
    assert gamma.names == ("1", "a", "b", "ab", "E")
    assert gamma.defining_dim == 2
    ring = gamma.representation_ring()
    assert ring.dimension("E") == pytest.approx(2)
    assert ring.product("E", "E") == {"1": 1, "a": 1, "b": 1, "ab": 1}


def test_gamma_data_incomplete_is_rejected():
    with pytest.raises(InputError):
        GammaData.from_dict({"name": "broken", "irreps": [{"name": "1"}]})
    gamma = GammaData.from_dict({"irreps": [{"name": "1", "dim": 1}, {"name": "x", "dim": 1}],
                                 "defining": {"x": 1}})
    with pytest.raises(InputError):
        gamma.representation_ring()


def test_equiv_d8_contains_z2z2z3_m12(z3):
    ring = equiv_fusion(z3, 6, GammaData.from_yaml(GAMMA_D8))
    assert ring.size == 20
    target = near_group_ring(FiniteAbelianGroup.from_factors((2, 2, 3)).group, 12)
    embedding = contains_ring(ring, target)
    assert embedding is not None
    assert embedding[SimpleObject(RHO)] == SimpleObject(RHO, (), "E")


def test_equiv_gamma_dimension_mismatch(z3):
    with pytest.raises(InputError):
        equiv_fusion(z3, 3, GammaData.from_yaml(GAMMA_D8))


def test_equiv_involution_z5(z5):
    ring = equiv_fusion(z5, 5, GroupAutomorphism.negation(z5))
    rho = SimpleObject(RHO)
    product = ring.product(rho, rho)
    assert product[rho] == 3
    assert product[SimpleObject(GAMMA_RHO)] == 2
    assert product[SimpleObject(ALPHA, (0,))] == 1
    assert {x for x in ring.labels if x.kind == PI} == {SimpleObject(PI, (1,)), SimpleObject(PI, (2,))}
    assert ring.product(SimpleObject(PI, (1,)), rho) == {rho: 1, SimpleObject(GAMMA_RHO): 1}
    d = (5 + np.sqrt(45)) / 2
    assert ring.dimension(rho) == pytest.approx(d)


def test_equiv_involution_identity_doubles(z3):
    ring = equiv_fusion(z3, 3, GroupAutomorphism.identity(z3))
    assert ring.size == 2 * (z3.order + 1)
    assert not [x for x in ring.labels if x.kind == PI]
    assert sum(1 for x in ring.labels if x.kind == GAMMA_ALPHA) == 3
    assert contains_ring(ring, near_group_ring(z3, 3)) is not None


def test_equiv_involution_needs_m_equal_n(z3):
    with pytest.raises(InputError):
        equiv_fusion(z3, 6, GroupAutomorphism.negation(z3))


def test_ktog_check(z3):
    ring = ktog_check(z3, 1)
    assert ring.name == "K(Z3xZ3, 9)"
    ring = ktog_check(FiniteAbelianGroup((5,)), 2)
    assert ring.name == "K(Z5xZ5, 50)"
    with pytest.raises(InputError):
        ktog_check(FiniteAbelianGroup((2,)))


def test_rings_isomorphic_distinguishes_multiplicity(z3):
    assert rings_isomorphic(near_group_ring(z3, 3), near_group_ring(z3, 6)) is None
    assert rings_isomorphic(near_group_ring(z3, 3), near_group_ring(FiniteAbelianGroup((4,)), 3)) is None
    assert rings_isomorphic(near_group_ring(FiniteAbelianGroup((2, 2)), 4),
                            near_group_ring(FiniteAbelianGroup((4,)), 4)) is None


def test_quotient_group(z2z2):
    G = FiniteAbelianGroup((2, 6))
    H = Subgroup.generated_by(G, [(0, 3)])
    assert quotient_group(G, H).label() == "Z6"
    assert quotient_group(z2z2, Subgroup.generated_by(z2z2, [(1, 1)])).label() == "Z2"


@pytest.mark.parametrize("order, orders, abelian, expected", [
    (1, [1], True, "trivial"),
    (2, [1, 2], True, "Z2"),
    (4, [1, 2, 2, 2], True, "Z2xZ2 (Klein four)"),
    (8, [1, 2, 2, 2, 2, 2, 4, 4], False, "D8"),
    (8, [1, 2, 4, 4, 4, 4, 4, 4], False, "Q8"),
    (6, [1, 2, 2, 2, 3, 3], False, "S3"),
])
def test_group_type_guess(order, orders, abelian, expected):
    assert group_type_guess(order, orders, abelian) == expected


def test_out_group_z2_is_trivial(z2):
    b = Bicharacter.standard(z2)
    a = QuadraticForm(b, (Phase(0), Phase.from_ratio(3, 4)))
    s = MNSolution(b, a, np.array([0.0, 1.0], dtype=complex), np.exp(-2j * np.pi / 3))
    group = out_group(s)
    assert group.order == 1
    assert group.type_guess() == "trivial"


def test_out_group_z3_m6_is_dihedral():
    s = z3_m6_family(0.05)
    group = out_group(s, grid_resolution=128)
    assert group.closed
    assert group.order == 8
    assert not group.is_abelian()
    assert group.type_guess() == "D8"
    assert group.to_json()["type"] == "D8"


@pytest.mark.parametrize("name, order, kind", [
    ("z2_m2", 1, "trivial"),
    ("z3_m3", 1, "trivial"),
    ("z4_m4", 1, "trivial"),
    ("z5_m5", 2, "Z2"),
    pytest.param("z3_m6", 8, "D8", marks=pytest.mark.slow),
])
def test_out_group_of_bundled(bundled, name, order, kind):
    group = out_group(bundled(name), grid_resolution=128)
    assert group.closed
    assert group.order == order
    assert group.type_guess() == kind
