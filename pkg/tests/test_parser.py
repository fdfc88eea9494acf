import pytest

from commons.funcs_abelian import GroupAutomorphism
from commons.funcs_common import InputError
from commons.mgr_parser import GroupSpec, parse_group


@pytest.mark.parametrize("text, factors", [
    ("Z2", (2,)),
    ("z_5", (5,)),
    ("Z2xZ2", (2, 2)),
    ("Z2 x Z2 x Z3", (2, 6)),
    ("Z4*Z2", (2, 4)),
    ("Z3×Z3", (3, 3)),
    ("Z6", (6,)),
])
def test_group_spec(text, factors):
    assert parse_group(text).invariant_factors == factors


def test_trivial_group():
    assert GroupSpec("trivial").group.order == 1
    assert GroupSpec("1").group.order == 1


@pytest.mark.parametrize("text", ["Z", "Zx2", "Z2xx Z3", "Q8", "Z2,Z2", ""])
def test_bad_group_spec(text):
    with pytest.raises(InputError):
        GroupSpec(text)


def test_elements_use_written_coordinates():
    spec = GroupSpec("Z2xZ2xZ3")
    G = spec.group
    g = spec.parse_element("(1,0,0)")
    h = spec.parse_element("(0,0,1)")
    assert G.element_order(g) == 2
    assert G.element_order(h) == 3
    assert G.element_order(G.add(g, h)) == 6
    assert spec.parse_element("(0,0,-1)") == G.neg(h)


def test_element_in_cyclic_group():
    spec = GroupSpec("Z5")
    assert spec.parse_element("3") == (3,)
    assert spec.parse_element("(7)") == (2,)
    with pytest.raises(InputError):
        spec.parse_element("(1,2)")


def test_subgroup_generators_and_elements():
    spec = GroupSpec("Z3xZ3")
    H = spec.parse_subgroup("<(1,1)>")
    assert set(H.elements) == {(0, 0), (1, 1), (2, 2)}
    assert spec.parse_subgroup("{(0,0),(1,1),(2,2)}") == H
    assert spec.parse_subgroup("<>").order == 1
    assert spec.parse_subgroup("<(1,0),(0,1)>").order == 9


def test_single_generator_subgroup():
    spec = GroupSpec("Z4")
    assert set(spec.parse_subgroup("<2>").elements) == {(0,), (2,)}


def test_subgroup_must_be_closed():
    spec = GroupSpec("Z4")
    with pytest.raises(InputError):
        spec.parse_subgroup("{0,1}")


def test_automorphisms():
    spec = GroupSpec("Z5")
    G = spec.group
    assert spec.parse_automorphism("id").is_identity()
    neg = spec.parse_automorphism("neg")
    assert neg((1,)) == (4,)
    assert spec.parse_automorphism("-1").perm.tolist() == neg.perm.tolist()
    assert spec.parse_automorphism("2")((1,)) == (2,)
    assert spec.parse_automorphism("[(3)]")((2,)) == (1,)
    assert GroupAutomorphism.identity(G).perm.tolist() == spec.parse_automorphism("1").perm.tolist()


def test_swap_automorphism():
    spec = GroupSpec("Z2xZ2")
    theta = spec.parse_automorphism("[(0,1),(1,0)]")
    assert theta((1, 0)) == (0, 1)
    assert theta.compose(theta).is_identity()


@pytest.mark.parametrize("text", ["2", "[(1,1),(1,1)]", "[(1,0)]", "swap"])
def test_bad_automorphisms(text):
    with pytest.raises(InputError):
        GroupSpec("Z2xZ2").parse_automorphism(text)


def test_cocycle_values():
    spec = GroupSpec("Z2xZ2")
    H = spec.parse_subgroup("<(1,0),(0,1)>")
    omega = spec.parse_cocycle("(1,0)(0,1)=-1; (0,1)(1,0)=i; (1,1)(1,1)=e(1/2);", H)
    assert omega[((1, 0), (0, 1))] == -1
    assert omega[((0, 1), (1, 0))] == 1j
    assert abs(omega[((1, 1), (1, 1))] + 1) < 1e-12
    assert omega[((0, 0), (1, 0))] == 1


def test_cocycle_outside_subgroup():
    spec = GroupSpec("Z4")
    H = spec.parse_subgroup("<2>")
    with pytest.raises(InputError):
        spec.parse_cocycle("(1)(2)=-1", H)
