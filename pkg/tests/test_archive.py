import copy
import dataclasses
import json

import numpy as np
import pytest

from commons.constants import bundled_corpus, bundled_galois
from commons.funcs_common import InputError, VerificationError
from commons.funcs_neargroup import MNSolution, GeneralSolution, fingerprint
from commons.mgr_archive import ArchiveManager, bundled_path, parse_value, solution_from_json, \
    solution_to_json, verify_solution, solution_key, dump_json


def _bundled_doc(name):
    with open(bundled_path(name), "r", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture(scope="module")
def archive():
    return ArchiveManager()


@pytest.mark.parametrize("name", bundled_corpus + bundled_galois)
def test_bundled_solution_passes(archive, name):
    s = archive.load_bundled(name)
    report = verify_solution(s)
    assert report.passed, report.failed()
    assert s.m == _bundled_doc(name)["m"]


def test_bundled_dimensions(archive):
    z2 = archive.load_bundled("z2_m2")
    assert abs(z2.d_value - (1 + np.sqrt(3))) < 1e-12
    galois = archive.load_bundled("z2_m2_galois")
    assert not galois.unitary
    assert abs(galois.d_value - (1 - np.sqrt(3))) < 1e-12
    z5 = archive.load_bundled("z5_m5")
    assert abs(z5.d_value - (5 + 3 * np.sqrt(5)) / 2) < 1e-12


def test_bundled_kinds(archive):
    solutions = archive.bundled()
    assert list(solutions) == bundled_corpus
    assert isinstance(solutions["z2_m2"], MNSolution)
    assert isinstance(solutions["z3_m6"], GeneralSolution)
    assert isinstance(solutions["z2z2z3_m12"], MNSolution)
    assert solutions["z3_m6"].m == 6
    assert len(archive.bundled(include_galois=True)) == len(bundled_corpus) + len(bundled_galois)


def test_z2_m2_values(archive):
    s = archive.load_bundled("z2_m2")
    assert abs(s.b[0] + 1 / (1 + np.sqrt(3))) < 1e-12
    assert abs(s.b[1] - (1 - 1j) / 2) < 1e-12
    assert abs(s.c_prime - np.exp(-7j * np.pi / 12) / np.sqrt(2)) < 1e-12


def test_written_coordinates_are_mapped(archive):
    s = archive.load_bundled("z2z2z3_m12")
    assert s.group.invariant_factors == (2, 6)
    assert s.group.order == 12


@pytest.mark.parametrize("name", ["z2_m2", "z4_m4_galois", "z2z2z3_m12", "z3_m6"])
def test_json_round_trip(archive, name):
    s = archive.load_bundled(name)
    t = solution_from_json(json.loads(dump_json(solution_to_json(s))))
    assert verify_solution(t).passed
    assert fingerprint(t) == fingerprint(s)
    assert solution_key(t) == solution_key(s)
    if isinstance(s, MNSolution):
        assert np.allclose(t.b, s.b, atol=1e-14)
        assert t.unitary == s.unitary
    else:
        assert np.allclose(t.B, s.B, atol=1e-14)


def test_store_and_reload(tmp_path, archive):
    s = archive.load_bundled("z3_m3")
    store = ArchiveManager(str(tmp_path))
    path = store.store(s)
    assert path.endswith(".json")
    assert store.stored() == [path]
    t = store.load(path)
    assert np.allclose(t.b, s.b, atol=1e-14)


def test_store_refuses_failing_solution(tmp_path, archive):
    s = archive.load_bundled("z2_m2")
    broken = dataclasses.replace(s, b=s.b + np.array([0.1, 0]))
    store = ArchiveManager(str(tmp_path))
    with pytest.raises(VerificationError):
        store.store(broken)
    assert store.stored() == []


def test_store_needs_archive_path(archive):
    s = archive.load_bundled("z2_m2")
    with pytest.raises(InputError):
        ArchiveManager(None).store(s)


def test_load_reverifies(tmp_path):
    doc = _bundled_doc("z2_m2")
    doc["b"][1][1] = [0.9, 0.0]
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(VerificationError) as err:
        ArchiveManager().load(str(path))
    assert err.value.exit_code == 1
    assert err.value.report is not None


def test_stated_dimension_must_match():
    doc = _bundled_doc("z2_m2")
    doc["d"] = {"p": 1, "q": 1, "D": 5, "r": 1}
    with pytest.raises(InputError):
        solution_from_json(doc)


def test_stated_m_must_match():
    doc = _bundled_doc("z3_m3")
    doc["m"] = 6
    with pytest.raises(InputError):
        solution_from_json(doc)


@pytest.mark.parametrize("mutate", [
    lambda doc: doc.pop("b"),
    lambda doc: doc.pop("bicharacter"),
    lambda doc: doc.update(kind="unknown"),
    lambda doc: doc.update(schema_version=99),
    lambda doc: doc["b"].pop(),
    lambda doc: doc.update(group={}),
])
def test_malformed_documents(mutate):
    doc = copy.deepcopy(_bundled_doc("z2_m2"))
    mutate(doc)
    with pytest.raises(InputError):
        solution_from_json(doc)


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(InputError):
        ArchiveManager().load("no_such_solution")
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(InputError):
        ArchiveManager().read(str(path))


@pytest.mark.parametrize("value, expected", [
    ([0.5, -0.5], 0.5 - 0.5j),
    (2, 2 + 0j),
    ({"exact": "zeta(4)"}, 1j),
    ({"exact": "sqrt(3)/2 + I/2"}, np.exp(1j * np.pi / 6)),
    ({"phase": {"num": 1, "den": 2}}, -1),
])
def test_parse_value(value, expected):
    assert abs(parse_value(value) - expected) < 1e-14


@pytest.mark.parametrize("value", [True, "1", [1, 2, 3], {"exact": "sqrt("}])
def test_parse_value_rejects(value):
    with pytest.raises(InputError):
        parse_value(value)
