import numpy as np
import pytest

from commons.constants import ORACLE_TOLERANCE, MAX_CUNTZ_LEVEL, DEFAULT_MAX_ORACLE_TERMS
from commons.funcs_common import InputError, ResourceError
from commons.funcs_cuntz import CuntzElement, GeneratorEndomorphism, normalize, oracle_check, fs_indicators
from commons.funcs_tuple import to_tuple, build_z2_m1_tuple, build_extraspecial_tuple


def test_isometries_are_orthogonal():
    s0, s1 = CuntzElement.generator(3, 0), CuntzElement.generator(3, 1)
    assert (s0.adjoint() * s1).zero_residual() == 0
    assert (s0.adjoint() * s0).equals(CuntzElement.identity(3))


def test_cuntz_completeness():
    size = 3
    total = CuntzElement.zero(size)
    for i in range(size):
        s = CuntzElement.generator(size, i)
        total = total + s * s.adjoint()
    assert (total - 1.0).zero_residual() == 0
    assert total.max_length() == 1


def test_scalar_value():
    s0, s1 = CuntzElement.generator(2, 0), CuntzElement.generator(2, 1)
    x = CuntzElement.scalar(2, 2.5) + s0 * s0.adjoint() + s1 * s1.adjoint() - 1.0
    assert x.scalar_value() == 2.5
    assert x.scalar_residual() < 1e-15
    assert (s0 * s1.adjoint()).scalar_residual() == 1


def test_normalize():
    one = CuntzElement.identity(2)
    lifted = normalize(one, 2)
    assert len(lifted.terms) == 4
    assert lifted.equals(one)
    with pytest.raises(InputError):
        normalize(CuntzElement.word(2, (0, 1)), 1)
    with pytest.raises(ResourceError):
        normalize(one, MAX_CUNTZ_LEVEL + 1)


def test_adjoint_is_involution():
    x = CuntzElement.word(3, (0, 2), (1,), 1 + 2j) + CuntzElement.word(3, (), (2,), -1j)
    assert (x.adjoint().adjoint() - x).max_abs() == 0


def test_alphabet_checks():
    with pytest.raises(InputError):
        CuntzElement.word(2, (2,))
    with pytest.raises(InputError):
        CuntzElement.generator(2, 0) + CuntzElement.generator(3, 0)


@pytest.mark.parametrize("name", ["z2_m2", "z3_m3", "z4_m4", "z2z2_m4",
                                  pytest.param("z5_m5", marks=pytest.mark.slow),
                                  pytest.param("z3_m6", marks=pytest.mark.slow)])
def test_oracle_on_solutions(bundled, name):
    report = oracle_check(to_tuple(bundled(name)))
    assert report.passed, report.residuals


def test_oracle_bound_on_large_alphabet(bundled):
    T = to_tuple(bundled("z2z2z3_m12"))
    engine = GeneratorEndomorphism(T)
    assert max(engine.estimate_terms(x) for x in range(engine.size)) > DEFAULT_MAX_ORACLE_TERMS
    with pytest.raises(ResourceError) as err:
        oracle_check(T)
    assert str(DEFAULT_MAX_ORACLE_TERMS) in err.value.msg


def test_oracle_bound_is_configurable(bundled):
    with pytest.raises(ResourceError):
        oracle_check(to_tuple(bundled("z2_m2")), max_terms=10)


def test_oracle_estimate_grows_with_alphabet(bundled):
    small = GeneratorEndomorphism(to_tuple(bundled("z2_m2")))
    large = GeneratorEndomorphism(to_tuple(bundled("z5_m5")))
    assert all(small.estimate_terms(x) > 0 for x in range(small.size))
    assert max(map(small.estimate_terms, range(small.size))) < max(map(large.estimate_terms, range(large.size)))
    small.check_budget()


def test_oracle_on_constructed_tuples():
    assert oracle_check(build_z2_m1_tuple()).passed
    assert oracle_check(build_extraspecial_tuple(1, "D")).passed


def test_oracle_detects_broken_tuple(bundled):
    T = to_tuple(bundled("z2_m2"))
    T.L[...] = 0
    assert not oracle_check(T).passed


@pytest.mark.parametrize("zeta", [1, np.exp(2j * np.pi / 3)])
def test_z2_m1_indicators(zeta):
    nu21, nu31, nu41 = fs_indicators(build_z2_m1_tuple(zeta), cross_check=True)
    assert nu21 == 1
    assert abs(nu31 - np.conj(zeta)) < 1e-12


@pytest.mark.parametrize("kind", ["D", "Q"])
def test_extraspecial_indicators(kind):
    zeta = np.exp(2j * np.pi / 3)
    T = build_extraspecial_tuple(1, kind, zeta)
    indicators = fs_indicators(T)
    assert indicators.nu21 == (1 if kind == "D" else -1)
    assert abs(indicators.nu31 - T.m * np.conj(zeta)) < 1e-12


def test_indicator_cross_check(bundled):
    indicators = fs_indicators(to_tuple(bundled("z2_m2")), cross_check=True)
    assert indicators.residuals["nu31_words"] < ORACLE_TOLERANCE
    assert indicators.residuals["nu41_scalarity"] < ORACLE_TOLERANCE
    assert indicators.nu21 in (1, -1)
    assert set(indicators.to_json()) == {"nu21", "nu31", "nu41", "residuals"}
