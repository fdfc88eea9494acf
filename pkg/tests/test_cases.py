import mpmath
import numpy as np
import pytest

from commons.constants import CASE_I, CASE_II, CASE_III, CASE_IV
from commons.funcs_abelian import FiniteAbelianGroup, automorphisms, bicharacter_classes, form_classes
from commons.funcs_cases import (CaseTag, case_tags, case_acj, case_of, case_feasibility, feasible_cases,
                                 base_cube_root, z3_m6_data, z3_m6_family, Z3_M6_RADIUS2, _support_reach)
from commons.funcs_common import InputError
from commons.funcs_neargroup import residual_general, lift_mn
from commons.funcs_spectral import cube_root_choices


def _pairs(G):
    auts = automorphisms(G)
    return [(b, a) for b in bicharacter_classes(G) for a in form_classes(b, auts)]


@pytest.mark.parametrize("tag, label", [
    (CaseTag(CASE_I, (0, 1)), "I(1,ζ)"),
    (CaseTag(CASE_II, (2,)), "II(ζ²)"),
    (CaseTag(CASE_III, (4, 0)), "III(ζ,1)"),
    (CaseTag(CASE_IV), "IV"),
])
def test_case_labels(tag, label):
    assert tag.label() == label
    assert CaseTag.from_json(tag.to_json()) == tag


@pytest.mark.parametrize("kind, omegas", [("V", ()), (CASE_I, (0,)), (CASE_II, (0, 1)), (CASE_IV, (0,))])
def test_case_tag_rejects(kind, omegas):
    with pytest.raises(InputError):
        CaseTag(kind, omegas)


def test_case_tag_list(z3):
    tags = case_tags(z3)
    assert len(tags) == 6 + 3 + 9 + 1
    assert len(set(tags)) == len(tags)


def test_base_cube_root():
    _, b, a = z3_m6_data()
    c = base_cube_root(a).value()
    assert abs(c ** 3 * a.gauss_sum() - 1) < 1e-12
    assert abs(c - cube_root_choices(a)[0]) < 1e-12


def test_case_of_normal_forms():
    _, b, a = z3_m6_data()
    for tag in case_tags(b.group):
        if tag.kind in (CASE_I, CASE_II):
            assert case_of(case_acj(b, a, tag)) == tag


def test_case_of_needs_two_dimensions(bundled):
    with pytest.raises(InputError):
        case_of(lift_mn(bundled("z2_m2")).acj)


def test_bundled_z3_m6_case(bundled):
    assert case_of(bundled("z3_m6").acj) == CaseTag(CASE_I, (0, 0))


@pytest.mark.parametrize("x", [0.0, 0.1, -0.15, np.sqrt(Z3_M6_RADIUS2)])
def test_z3_m6_family_on_circle(x):
    s = z3_m6_family(x)
    assert s.m == 6
    report = residual_general(s)
    assert report.passed, report.failed()
    assert case_of(s.acj).label() == "I(1,1)"


def test_z3_m6_family_conjugate():
    s = z3_m6_family(0.05, conjugate=True)
    assert residual_general(s).passed
    assert s.provenance["x"] == 0.05


@pytest.mark.parametrize("x, y", [(1.0, None), (0.1, 0.1)])
def test_z3_m6_family_off_circle(x, y):
    with pytest.raises(InputError):
        z3_m6_family(x, y)


def test_case_four_and_three_refuted(z3):
    _, b, a = z3_m6_data()
    cert = case_feasibility(z3, b, a, CaseTag(CASE_IV))
    assert not cert.feasible
    cert = case_feasibility(z3, b, a, CaseTag(CASE_III, (0, 0)))
    assert not cert.feasible
    assert "odd" in cert.reason


def test_z3_case_one_certificates(z3):
    _, b, a = z3_m6_data()
    assert case_feasibility(z3, b, a, CaseTag(CASE_I, (0, 0))).feasible
    cert = case_feasibility(z3, b, a, CaseTag(CASE_I, (0, 1)))
    assert not cert.feasible
    assert cert.reason
    doc = cert.to_json()
    assert doc["case"] == "I(1,ζ)"
    assert not doc["feasible"]
    assert all(not x["feasible"] for x in doc["branches"])


def test_z2_case_two_refuted(z2):
    for b, a in _pairs(z2):
        for j in range(3):
            assert not case_feasibility(z2, b, a, CaseTag(CASE_II, (j,))).feasible


def test_z2_every_case_refuted(z2):
    for b, a in _pairs(z2):
        certificates, surviving = feasible_cases(z2, b, a)
        assert len(certificates) == len(case_tags(z2))
        assert surviving == []


@pytest.mark.slow
def test_z4_every_case_refuted(z4):
    for b, a in _pairs(z4):
        _, surviving = feasible_cases(z4, b, a)
        assert surviving == []


@pytest.mark.parametrize("name", ["z2", "z4", "z2z2"])
def test_case_three_refuted_below_order_eight(name, request):
    G = request.getfixturevalue(name)
    for b, a in _pairs(G):
        cert = case_feasibility(G, b, a, CaseTag(CASE_III, (0, 0)))
        assert not cert.feasible
        assert cert.reason == "every branch violates a constraint"
        assert cert.branches
        assert all(not x.feasible and "¹²" in x.constraint for x in cert.branches)


def test_case_three_order_eight_is_computed():
    G = FiniteAbelianGroup((8,))
    for b, a in _pairs(G):
        cert = case_feasibility(G, b, a, CaseTag(CASE_III, (1, 2)))
        assert len(cert.branches) == 2
        assert {x.branch.split()[-1] for x in cert.branches} == {"κ=+1", "κ=-1"}
        assert cert.feasible == any(x.feasible for x in cert.branches)
        assert all(x.feasible or x.constraint for x in cert.branches)


def test_case_three_branches_per_order_two_element():
    G = FiniteAbelianGroup((2, 2, 2))
    b, a = _pairs(G)[0]
    cert = case_feasibility(G, b, a, CaseTag(CASE_III, (0, 0)))
    assert len(cert.branches) == 2 * 7


def test_support_reach():
    with mpmath.workdps(30):
        least, rank = _support_reach([(mpmath.mpc(1), 1)], mpmath.mpc(0.5))
        assert rank == 1
        assert abs(least - 0.25) < 1e-20
        assert _support_reach([(mpmath.mpc(1), 1)], mpmath.mpc(0, 0.5)) is None

        least, rank = _support_reach([(mpmath.mpc(1), 2)], mpmath.mpc(1))
        assert abs(least - 0.5) < 1e-20

        least, rank = _support_reach([(mpmath.mpc(1), 1), (mpmath.mpc(0, 1), 1)], mpmath.mpc(3, 4))
        assert rank == 2
        assert abs(least - 25) < 1e-20

        assert _support_reach([], mpmath.mpc(0)) == (0, 0)
        assert _support_reach([], mpmath.mpc(1)) is None


def test_z2z2_case_two_refuted(z2z2):
    pointwise = []
    for b, a in _pairs(z2z2):
        for j in range(3):
            cert = case_feasibility(z2z2, b, a, CaseTag(CASE_II, (j,)))
            assert not cert.feasible, cert.to_json()
            pointwise += [x for x in cert.branches if x.constraint.startswith("ℬ(g) unitarity")]
    assert pointwise
    assert all(x.branch.startswith("(2)") for x in pointwise)


def test_case_one_eigenspace_dimensions(z3):
    _, b, a = z3_m6_data()
    cert = case_feasibility(z3, b, a, CaseTag(CASE_I, (0, 0)))
    assert sum(cert.dimensions) == 3
    assert cert.surviving
