"""
Solution archive: the versioned JSON schema of solutions, the bundled corpus and re-verification on load.

Group elements in a file are written in the coordinates of the listed cyclic factors; loading maps them
onto the canonical invariant-factor group. Complex values are [re, im] pairs, {"exact": "<expr>"} with
zeta(n) = exp(2πi/n) available in the expression, or {"phase": {"num": p, "den": q}}.
"""
from commons.constants import SOLUTION_SCHEMA_VERSION, KIND_MN, KIND_GENERAL, DEFAULT_TOLERANCE, \
    bundled_dir_name, bundled_corpus, bundled_galois
from commons.funcs_abelian import FiniteAbelianGroup, Bicharacter, QuadraticForm, Phase
from commons.funcs_cases import z3_m6_family
from commons.funcs_common import InputError, VerificationError, complex_to_pair, pair_to_complex
from commons.funcs_neargroup import QuadIrrational, MNSolution, ACJData, BTensor, GeneralSolution, residual_mn, \
    residual_general, fingerprint
from commons.mgr_logger import LoggerManager

import hashlib
import json
import os
import sympy

KIND_FAMILY = "family"

_FAMILIES = {
    "z3_m6": z3_m6_family,
}

_EXACT_LOCALS = {
    "zeta": lambda n: sympy.exp(2 * sympy.pi * sympy.I / n),
    "I": sympy.I,
    "sqrt": sympy.sqrt,
    "exp": sympy.exp,
    "pi": sympy.pi,
}


def _get_data_dir():
    return os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")


def bundled_path(name):
    file_name = name if name.endswith(".json") else f"{name}.json"
    return os.path.join(_get_data_dir(), bundled_dir_name, file_name)


def parse_value(value):
    """
    :param value: [re, im], a real number, {"exact": expr} or {"phase": {"num", "den"}}
    :return: complex
    """
    if isinstance(value, dict):
        if "exact" in value:
            try:
                expr = sympy.sympify(value["exact"], locals=_EXACT_LOCALS)
                return complex(sympy.N(expr, 30))
            except (sympy.SympifyError, TypeError, SyntaxError) as err:
                raise InputError(f"Exact value cannot be evaluated: {value['exact']} ({err})")
        if "phase" in value:
            return Phase.from_json(value["phase"]).value()
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        return pair_to_complex(value)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise InputError(f"Unrecognized complex value: {value}")


def _presentation(data):
    try:
        factors = data["group"]["factors"]
    except (KeyError, TypeError):
        raise InputError("Solution file has no group factors")
    return FiniteAbelianGroup.from_factors(factors)


def _bicharacter(pres, data):
    G = pres.group
    if "numerators" in data:
        return pres.bicharacter(data["numerators"])
    if "gram" in data:
        return Bicharacter.from_json(G, data)
    raise InputError("Bicharacter needs either numerators or a gram table")


def _table(pres, entries, what):
    """
    [[g, value], ...] in written coordinates → complex vector in canonical element order
    """
    G = pres.group
    values = [None] * G.order
    for g, value in entries:
        values[G.index(pres.to_canonical(g))] = parse_value(value)
    if any(v is None for v in values):
        raise InputError(f"Table {what} does not cover the group {G.label()}")
    return values


def _check_dimension(s, data):
    if "d" not in data:
        return
    stated = QuadIrrational.from_json(data["d"])
    if abs(float(stated) - s.d_value) > 1e-12:
        raise InputError(f"Stated dimension {stated} does not solve d² = n + md for n={s.n}, m={s.m} "
                         f"(expected {s.d})")


def solution_from_json(data):
    """
    :param data: decoded solution document
    :return: MNSolution or GeneralSolution (not yet verified)
    """
    version = data.get("schema_version")
    if version != SOLUTION_SCHEMA_VERSION:
        raise InputError(f"Unsupported solution schema version: {version}")

    kind = data.get("kind")
    provenance = dict(data.get("provenance", {}))

    if kind == KIND_FAMILY:
        name = data.get("family")
        if name not in _FAMILIES:
            raise InputError(f"Unknown solution family: {name}")
        x = parse_value(data["x"]).real
        y = parse_value(data["y"]).real if "y" in data else None
        s = _FAMILIES[name](x, y, bool(data.get("conjugate", False)))
        s.provenance.update(provenance)
        return s

    if kind not in (KIND_MN, KIND_GENERAL):
        raise InputError(f"Unknown solution kind: {kind}")

    try:
        pres = _presentation(data)
        G = pres.group
        b = _bicharacter(pres, data["bicharacter"])
        a = QuadraticForm.from_json(b, data["form"], pres.to_canonical)
        if not a.is_valid():
            raise InputError("Quadratic form does not satisfy a(g+h)⟨g,h⟩ = a(g)a(h)")

        if kind == KIND_MN:
            table = _table(pres, data["b"], "b")
            unitary = bool(data.get("unitary", True))
            if "c_prime" in data:
                s = MNSolution.from_cprime(b, a, table, parse_value(data["c_prime"]), unitary=unitary,
                                           provenance=provenance)
            else:
                s = MNSolution(b, a, table, parse_value(data["c"]), unitary=unitary, provenance=provenance)
        else:
            acj_data = data["acj"]
            acj = ACJData(b, a, tuple(acj_data["bar"]), tuple(pres.to_canonical(g) for g in acj_data["shifts"]),
                          tuple(parse_value(x) for x in acj_data["c"]), tuple(acj_data["signs"]),
                          int(acj_data.get("eps", 1)))
            k = acj.size
            entries = [(tuple(idx) + (G.index(pres.to_canonical(g)),), parse_value(value))
                       for idx, g, value in data["btensor"]["entries"]]
            s = GeneralSolution(acj, BTensor.from_sparse(k, G.order, entries), provenance=provenance)
    except KeyError as err:
        raise InputError(f"Solution file is missing the field {err}")
    except (TypeError, ValueError) as err:
        raise InputError(f"Solution file is malformed: {err}")

    if "m" in data and int(data["m"]) != s.m:
        raise InputError(f"Stated m={data['m']} does not match the data (m={s.m})")
    _check_dimension(s, data)
    return s


def solution_to_json(s, threshold=0.0):
    """
    Canonical coordinates are written, so the factor list is the invariant factors of the group
    """
    G = s.group
    doc = {
        "schema_version": SOLUTION_SCHEMA_VERSION,
        "group": G.to_json(),
        "m": s.m,
        "d": s.d.to_json(),
        "d_value": s.d_value,
        "bicharacter": s.bicharacter.to_json(),
        "form": s.form.to_json(),
        "provenance": _jsonable(s.provenance),
    }
    if isinstance(s, MNSolution):
        doc["kind"] = KIND_MN
        doc["unitary"] = s.unitary
        doc["c"] = complex_to_pair(s.c)
        doc["b"] = [[list(g), complex_to_pair(z)] for g, z in zip(G.elements(), s.b)]
        return doc

    acj = s.acj
    elements = G.elements()
    doc["kind"] = KIND_GENERAL
    doc["acj"] = {
        "bar": list(acj.bar),
        "shifts": [list(g) for g in acj.shifts],
        "c": [complex_to_pair(z) for z in acj.c],
        "signs": list(acj.signs),
        "eps": acj.eps,
    }
    doc["btensor"] = {
        "size": s.k,
        "entries": [[list(key[:4]), list(elements[key[4]]), complex_to_pair(z)]
                    for key, z in s.btensor.to_sparse(threshold)],
    }
    return doc


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return complex_to_pair(x)
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def verify_solution(s, tol=DEFAULT_TOLERANCE):
    return residual_mn(s, tol) if isinstance(s, MNSolution) else residual_general(s, tol)


def solution_key(s):
    """
    (group label, m, fingerprint digest) under which a solution is stored
    """
    digest = hashlib.sha1(json.dumps(_jsonable(fingerprint(s))).encode("utf-8")).hexdigest()
    return s.group.label(), s.m, digest[:12]


class ArchiveManager:
    """
    Directory of verified solutions. Every load re-verifies; store refuses failing solutions.
    """

    def __init__(self, archive_path=None, tol=DEFAULT_TOLERANCE):

        self.logger = LoggerManager.get_logger(__name__)
        self.archive_path = archive_path
        self.tol = tol

    def _resolve(self, file_name):
        candidates = [file_name, f"{file_name}.json"]
        if self.archive_path is not None:
            candidates += [os.path.join(self.archive_path, c) for c in (file_name, f"{file_name}.json")]
        candidates += [os.path.join(_get_data_dir(), file_name), bundled_path(file_name)]
        for path in candidates:
            if os.path.isfile(path):
                return path
        raise InputError(f"Solution file ( {file_name} ) does not exist.")

    def read(self, file_name):
        """
        :return: (solution, path) without verification
        """
        path = self._resolve(file_name)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as err:
            raise InputError(f"Solution file ( {path} ) is not valid JSON: {err}")
        s = solution_from_json(data)
        s.provenance.setdefault("file", os.path.basename(path))
        return s, path

    def load(self, file_name):
        """
        Loads and re-verifies a solution
        :return: solution
        """
        s, path = self.read(file_name)
        report = verify_solution(s, self.tol)
        if not report.passed:
            self.logger.warning(f"{path}: re-verification failed on {', '.join(report.failed())} "
                                f"(overall {report.overall:.3e})")
            raise VerificationError(f"Solution file ( {path} ) fails re-verification: "
                                    f"{', '.join(report.failed())}", report)
        self.logger.info(f"{path}: loaded {s.label()}, overall residual {report.overall:.3e}")
        return s

    def load_bundled(self, name):
        return self.load(bundled_path(name))

    def bundled(self, include_galois=False):
        """
        :return: {name: solution} of the bundled corpus in listing order
        """
        names = bundled_corpus + (bundled_galois if include_galois else [])
        return {name: self.load_bundled(name) for name in names}

    def store(self, s, file_name=None):
        """
        Writes a verified solution under the archive path
        :return: path of the written file
        """
        report = verify_solution(s, self.tol)
        if not report.passed:
            raise VerificationError(f"Refusing to store {s.label()}: fails on {', '.join(report.failed())}",
                                    report)
        if self.archive_path is None:
            raise InputError("No archive path is configured")

        os.makedirs(self.archive_path, exist_ok=True)
        if file_name is None:
            label, m, digest = solution_key(s)
            file_name = f"{label.lower()}_m{m}_{digest}.json"
        path = os.path.join(self.archive_path, file_name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(dump_json(solution_to_json(s)))
        self.logger.info(f"{path}: stored {s.label()}")
        return path

    def stored(self):
        if self.archive_path is None or not os.path.isdir(self.archive_path):
            return []
        return sorted(os.path.join(self.archive_path, x) for x in os.listdir(self.archive_path) if x.endswith(".json"))


def dump_json(doc):
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
