"""
Solvers of the classification systems: Newton multistart for m = n, the case-reduced search for m = 2n,
a least-squares fallback for larger m, and classification into equivalence classes.
"""
from commons.constants import COMPLETE, HEURISTIC, CASE_I, CASE_II, EQUAL_THRESHOLD, NEWTON_TOLERANCE, \
    DEFAULT_TOLERANCE, ORACLE_TOLERANCE, EQUAL, UNEQUAL, tqdm_ncols, tqdm_bar_format, tqdm_case_postfix
from commons.funcs_abelian import automorphisms, bicharacter_classes, form_classes
from commons.funcs_cases import case_acj, case_one_btensor, case_two_btensor, feasible_cases, base_cube_root
from commons.funcs_common import InputError, ResourceError
from commons.funcs_cuntz import oracle_check
from commons.funcs_neargroup import QuadIrrational, MNSolution, GeneralSolution, ACJData, BTensor, residual_mn, \
    residual_general, general_equations, equivalent, conjugate_solution, fingerprint
from commons.funcs_spectral import CUBE_ROOTS, cube_root_choices, rotation, rotation_from_cprime, conjugation, \
    eigenspace_basis, fixed_real_eigenbasis
from commons.funcs_tuple import to_tuple
from commons.mgr_config import SearchBudget
from commons.mgr_logger import LoggerManager

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from tqdm import tqdm

import itertools
import numpy as np
import scipy.optimize


def _stack(z):
    return np.concatenate([z.real, z.imag])


def _check_mn_input(b, a):
    if not b.is_nondegenerate():
        raise InputError("Bicharacter is degenerate")
    if not a.is_even():
        raise InputError("Quadratic form is not even")


class _MNSystem:
    """
    The m = n equations on b = basis·x, x real, for a fixed c′: b(0) = −1/d, a(g)b(g)b(−g) = 1/n − δ/d
    and the cubic equation in rotation form
    """

    def __init__(self, b, a, c_prime, basis, d):
        G = b.group
        self.n = G.order
        self.basis = basis
        self.avec = a.vector
        self.Mc = np.conj(b.matrix)
        self.neg = G.neg_index
        self.add = G.add_table
        self.zero = G.index(G.zero)
        self.d = d
        self.c_prime = c_prime
        delta = np.zeros(self.n)
        delta[self.zero] = 1.0
        self.target = 1 / self.n - delta / d
        self.constant = 1 / (c_prime * d * self.n)

    def values(self, x):
        f = self.basis @ x
        S = f[self.add]
        weight = self.avec * f[self.neg]
        cubic = np.einsum("g,gh,gk->hk", weight, S, S) - self.Mc * np.outer(f, f) + self.constant
        return np.concatenate([[f[self.zero] + 1 / self.d], self.avec * f * f[self.neg] - self.target,
                               cubic.reshape(-1)])

    def jacobian(self, x):
        B = self.basis
        f = B @ x
        S = f[self.add]
        Bs = B[self.add]
        weight = self.avec * f[self.neg]
        first = B[self.zero][None, :]
        product = self.avec[:, None] * (B * f[self.neg][:, None] + f[:, None] * B[self.neg])
        cubic = np.einsum("g,gi,gh,gk->hki", self.avec, B[self.neg], S, S) \
            + np.einsum("g,ghi,gk->hki", weight, Bs, S) + np.einsum("g,gh,gki->hki", weight, S, Bs) \
            - self.Mc[:, :, None] * (B[:, None, :] * f[None, :, None] + f[:, None, None] * B[None, :, :])
        return np.vstack([first, product, cubic.reshape(self.n * self.n, -1)])

    def residual(self, x):
        return float(np.linalg.norm(self.values(x)))


def _newton(system, x0, max_iter, tol=NEWTON_TOLERANCE):
    """
    Gauss–Newton with step halving; None when the start does not converge
    """
    x = np.array(x0, dtype=float)
    r = system.residual(x)
    for _ in range(max_iter):
        if r < tol:
            return x
        F = _stack(system.values(x))
        Jc = system.jacobian(x)
        Jm = np.vstack([Jc.real, Jc.imag])
        step, *_ = np.linalg.lstsq(Jm, -F, rcond=None)
        scale = 1.0
        while scale > 1e-10:
            candidate = x + scale * step
            rc = system.residual(candidate)
            if rc < r:
                break
            scale /= 2
        else:
            return None
        x, r = candidate, rc
    return x if r < tol else None


def _grid_starts(dim, radius=1.0):
    per_dim = max(2, int(np.ceil((10 ** min(dim, 4)) ** (1.0 / dim))))
    axis = np.linspace(-radius, radius, per_dim)
    return [np.array(p) for p in itertools.product(axis, repeat=dim)]


def solve_mn(G, b, a, budget=None, tol=DEFAULT_TOLERANCE, progress=False):
    """
    Solutions of the m = n system for fixed (⟨·,·⟩, a)
    :param G: FiniteAbelianGroup
    :param b: nondegenerate Bicharacter
    :param a: even QuadraticForm of b
    :param budget: SearchBudget
    :param tol: residual tolerance for accepting a solution
    :param progress: show a progress bar
    :return: list of MNSolution, pairwise distinct
    """
    logger = LoggerManager.get_logger(__name__)
    budget = budget if budget is not None else SearchBudget()
    _check_mn_input(b, a)

    n = G.order
    d = QuadIrrational.from_nm(n, n)
    rng = np.random.default_rng(budget.seed)
    J = conjugation(a)
    found = []

    for c in cube_root_choices(a):
        c_prime = np.conj(c) / np.sqrt(n)
        R = rotation_from_cprime(b, a, c_prime)
        basis = fixed_real_eigenbasis(R, J, 1)
        dim = basis.shape[1]
        logger.debug(f"{G.label()} m={n}: c={c:.6f}, fixed real eigenspace of dimension {dim}")
        if dim == 0:
            continue

        system = _MNSystem(b, a, c_prime, basis, float(d))
        starts = _grid_starts(dim) + list(rng.uniform(-1, 1, size=(budget.random_starts, dim)))
        for x0 in tqdm(starts, disable=not progress, ncols=tqdm_ncols, bar_format=tqdm_bar_format,
                       postfix=tqdm_case_postfix(f"m=n c={np.angle(c):+.3f}")):
            x = _newton(system, x0, budget.newton_max_iter)
            if x is None:
                continue
            values = basis @ x
            if any(np.max(np.abs(values - s.b)) < EQUAL_THRESHOLD for s in found):
                continue
            s = MNSolution(b, a, values, c, d=d,
                           provenance={"source": "solve_mn", "c_root": complex(c), **budget.provenance()})
            report = residual_mn(s, tol)
            if report.passed:
                logger.info(f"{G.label()} m={n}: solution accepted, residual {report.overall:.3e}")
                found.append(s)

    return found


class _CaseSearch:
    """
    Case I or II unknowns as real coordinates. Case I keeps ξ_r, η_r inside ker(𝓡 − ω_r) and μ free;
    Case II keeps ξ, η and μ free.
    """

    def __init__(self, b, a, tag):
        self.tag = tag
        self.acj = case_acj(b, a, tag)
        G = b.group
        self.n = G.order
        self.d = QuadIrrational.from_nm(self.n, 2 * self.n)
        self.R = rotation(b, a, base_cube_root(a).value())
        self.J = conjugation(a)
        identity = np.eye(self.n, dtype=complex)
        if tag.kind == CASE_I:
            j1, j2 = tag.omegas
            E1 = eigenspace_basis(self.R, CUBE_ROOTS[j1])
            E2 = eigenspace_basis(self.R, CUBE_ROOTS[j2])
            self.blocks = [E1, E2, E1, E2, identity]
        else:
            self.blocks = [identity, identity, identity]
        self.sizes = [B.shape[1] for B in self.blocks]
        self.dim = 2 * sum(self.sizes)

    def functions(self, x):
        z = x[:self.dim // 2] + 1j * x[self.dim // 2:]
        out = []
        offset = 0
        for B, size in zip(self.blocks, self.sizes):
            out.append(B @ z[offset:offset + size])
            offset += size
        return out

    def solution(self, x, provenance=None):
        fs = self.functions(x)
        if self.tag.kind == CASE_I:
            xi1, xi2, eta1, eta2, mu = fs
            btensor = case_one_btensor(xi1, xi2, eta1, eta2, mu, self.R, self.tag.omegas)
        else:
            xi, eta, mu = fs
            btensor = case_two_btensor(xi, eta, mu, self.R, self.J, self.tag.omegas[0])
        return GeneralSolution(self.acj, btensor, self.d, provenance or {})

    def objective(self, x):
        return _stack(general_equations(self.solution(x)))


def _least_squares(objective, x0):
    fit = scipy.optimize.least_squares(objective, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                       max_nfev=4000)
    return fit.x, float(np.max(np.abs(fit.fun))) if fit.fun.size else 0.0


def _distinct(s, found):
    return all(np.max(np.abs(s.B - t.B)) >= EQUAL_THRESHOLD for t in found)


def solve_m2n(G, b, a, budget=None, tol=DEFAULT_TOLERANCE, progress=False, certificates=None):
    """
    Solutions of the m = 2n system over every case the feasibility certificates leave open
    :param certificates: precomputed (certificates, surviving tags) from feasible_cases
    :return: (list of (GeneralSolution, CaseTag), certificates, unsolved surviving tags)
    """
    logger = LoggerManager.get_logger(__name__)
    budget = budget if budget is not None else SearchBudget()
    _check_mn_input(b, a)

    certs, surviving = certificates if certificates is not None else feasible_cases(G, b, a)
    rng = np.random.default_rng(budget.seed)
    starts = max(1, budget.random_starts // 10)
    found = []
    unsolved = []

    for tag in surviving:
        if tag.kind not in (CASE_I, CASE_II):
            logger.info(f"{G.label()} m={2 * G.order}: case {tag.label()} stays open, no reduced search")
            unsolved.append(tag)
            continue
        search = _CaseSearch(b, a, tag)
        logger.info(f"{G.label()} m={2 * G.order}: searching case {tag.label()} over {search.dim} real parameters")
        hits = []
        for _ in tqdm(range(starts), disable=not progress, ncols=tqdm_ncols, bar_format=tqdm_bar_format,
                      postfix=tqdm_case_postfix(tag.label())):
            x0 = rng.normal(scale=1 / np.sqrt(G.order), size=search.dim)
            x, worst = _least_squares(search.objective, x0)
            if worst > 1e-6:
                continue
            s = search.solution(x, {"source": "solve_m2n", "case": tag.label(), **budget.provenance()})
            if not _distinct(s, hits):
                continue
            report = residual_general(s, tol)
            if report.passed:
                logger.info(f"{G.label()} m={s.m}: case {tag.label()} solution, residual {report.overall:.3e}")
                hits.append(s)
        if not hits:
            unsolved.append(tag)
        found += [(s, tag) for s in hits]

    return found, certs, unsolved


def _general_acj_choices(b, a, k):
    """
    Normal forms with trivial characters used by the fallback search: J = id with ε = 1, and for even |Λ| the
    pairing J e_{2i} = e_{2i+1}, J e_{2i+1} = −e_{2i} with ε = −1; scalars c_t = ω_t·c non-decreasing in t
    """
    G = b.group
    c0 = base_cube_root(a).value()
    zero = G.zero
    out = []
    for js in itertools.combinations_with_replacement(range(3), k):
        cs = tuple(CUBE_ROOTS[j] * c0 for j in js)
        out.append(ACJData(b, a, tuple(range(k)), (zero,) * k, cs, (1,) * k, 1))
    if k % 2 == 0:
        bar = tuple(t + 1 if t % 2 == 0 else t - 1 for t in range(k))
        signs = tuple(1 if t % 2 == 0 else -1 for t in range(k))
        for js in itertools.combinations_with_replacement(range(3), k // 2):
            cs = tuple(CUBE_ROOTS[js[t // 2]] * c0 for t in range(k))
            out.append(ACJData(b, a, bar, (zero,) * k, cs, signs, -1))
    return out


def search_general(G, b, a, k, budget=None, tol=DEFAULT_TOLERANCE, progress=False):
    """
    Levenberg–Marquardt on the full coefficient-tensor residual from random starts; results are heuristic
    :return: list of GeneralSolution
    """
    logger = LoggerManager.get_logger(__name__)
    budget = budget if budget is not None else SearchBudget()
    n = G.order
    d = QuadIrrational.from_nm(n, n * k)
    rng = np.random.default_rng(budget.seed)
    size = k ** 4 * n
    found = []
    choices = _general_acj_choices(b, a, k)
    per_choice = max(1, budget.lsq_starts // len(choices))

    for acj in choices:
        def objective(x, acj=acj):
            B = (x[:size] + 1j * x[size:]).reshape(k, k, k, k, n)
            return _stack(general_equations(GeneralSolution(acj, BTensor(B), d)))

        for _ in tqdm(range(per_choice), disable=not progress, ncols=tqdm_ncols, bar_format=tqdm_bar_format,
                      postfix=tqdm_case_postfix(f"k={k} eps={acj.eps:+d}")):
            x, worst = _least_squares(objective, rng.normal(scale=1 / np.sqrt(n * k), size=2 * size))
            if worst > 1e-6:
                continue
            s = GeneralSolution(acj, BTensor((x[:size] + 1j * x[size:]).reshape(k, k, k, k, n)), d,
                                {"source": "search_general", **budget.provenance()})
            if _distinct(s, found) and residual_general(s, tol).passed:
                logger.info(f"{G.label()} m={n * k}: heuristic solution found")
                found.append(s)
    return found


@dataclass
class SolutionClass:
    representative: object
    report: object
    fingerprint: tuple
    case: object = None
    members: int = 1
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {
            "case": self.case.label() if self.case is not None else None,
            "members": self.members,
            "fingerprint": [list(x) if isinstance(x, tuple) else x for x in self.fingerprint],
            "residuals": self.report.to_json(),
            "warnings": list(self.warnings),
        }


@dataclass
class ClassificationResult:
    group: object
    m: int
    classes: list
    status: str
    certificates: list = field(default_factory=list)
    conjugates_merged: bool = False
    provenance: dict = field(default_factory=dict)

    @property
    def count(self):
        return len(self.classes)

    def to_json(self):
        return {
            "group": self.group.to_json(),
            "m": self.m,
            "count": self.count,
            "status": self.status,
            "conjugates_merged": self.conjugates_merged,
            "classes": [x.to_json() for x in self.classes],
            "certificates": [x.to_json() for x in self.certificates],
            "provenance": self.provenance,
        }


def _b_table_key(s):
    values = s.b if isinstance(s, MNSolution) else s.B.reshape(-1)
    return tuple((round(float(z.real), 9), round(float(z.imag), 9)) for z in values)


def _same_class(s, t, merge_conjugates, budget):
    """
    EQUAL or INCONCLUSIVE verdict between s (or its conjugate) and t; None when they differ
    """
    candidates = [s, conjugate_solution(s)] if merge_conjugates else [s]
    best = None
    for x in candidates:
        if fingerprint(x) != fingerprint(t):
            continue
        result = equivalent(x, t, budget.grid_resolution, budget.seed)
        if result.verdict != UNEQUAL and (best is None or result.distance < best.distance):
            best = result
    return best


def _merge(found, merge_conjugates, budget, tol):
    """
    Deterministic reduction of solutions into classes; representative = minimal fingerprint, then b table
    """
    logger = LoggerManager.get_logger(__name__)
    ordered = sorted(found, key=lambda x: (fingerprint(x[0]), _b_table_key(x[0])))
    classes = []
    for s, tag in ordered:
        for cls in classes:
            verdict = _same_class(s, cls.representative, merge_conjugates, budget)
            if verdict is not None:
                cls.members += 1
                if verdict.verdict != EQUAL:
                    cls.warnings.append(f"inconclusive equivalence at distance {verdict.distance:.2e}")
                    logger.warning(f"{s.label()}: inconclusive equivalence merged, distance {verdict.distance:.2e}")
                break
        else:
            report = residual_mn(s, tol) if isinstance(s, MNSolution) else residual_general(s, tol)
            classes.append(SolutionClass(s, report, fingerprint(s), tag))
    return classes


def _attach_oracle(cls, tol, max_terms):
    report = oracle_check(to_tuple(cls.representative), max(tol, ORACLE_TOLERANCE), max_terms=max_terms)
    cls.report = cls.report.merged(report, prefix="oracle.")


def classify(G, m, budget=None, tol=DEFAULT_TOLERANCE, progress=False, oracle=True, merge_conjugates=None):
    """
    Near-group solutions for (G, m) up to equivalence
    :param G: FiniteAbelianGroup
    :param m: positive multiple of |G| with irrational d
    :param budget: SearchBudget
    :param oracle: cross-check every class representative with the Cuntz oracle
    :param merge_conjugates: identify complex conjugate solutions; defaults to True exactly when m = n
    :return: ClassificationResult
    """
    logger = LoggerManager.get_logger(__name__)
    budget = budget if budget is not None else SearchBudget()
    n = G.order
    if n > budget.max_group_order:
        raise ResourceError(f"Group order {n} exceeds the configured bound {budget.max_group_order}")
    if m <= 0 or m % n:
        raise InputError(f"m = {m} is not a positive multiple of |G| = {n}")
    if QuadIrrational.from_nm(n, m).is_rational():
        raise InputError(f"Dimension is rational for n={n}, m={m}; see dimension_diagnosis")
    k = m // n
    if merge_conjugates is None:
        merge_conjugates = k == 1

    auts = automorphisms(G, budget.max_group_order)
    pairs = [(b, a) for b in bicharacter_classes(G, True, merge_conjugates, budget.max_group_order)
             for a in form_classes(b, auts)]
    logger.info(f"classify {G.label()} m={m}: {len(pairs)} (bicharacter, form) pairs")

    def work(pair):
        b, a = pair
        if k == 1:
            return [(s, None) for s in solve_mn(G, b, a, budget, tol)], [], []
        if k == 2:
            return solve_m2n(G, b, a, budget, tol)
        return [(s, None) for s in search_general(G, b, a, k, budget, tol)], [], []

    if budget.threads > 1:
        with ThreadPoolExecutor(max_workers=budget.threads) as pool:
            outcomes = list(pool.map(work, pairs))
    else:
        outcomes = [work(pair) for pair in tqdm(pairs, disable=not progress, ncols=tqdm_ncols,
                                                bar_format=tqdm_bar_format, postfix=tqdm_case_postfix(f"m={m}"))]

    found, certificates, unsolved = [], [], []
    for solutions, certs, open_tags in outcomes:
        found += solutions
        certificates += certs
        unsolved += open_tags

    classes = _merge(found, merge_conjugates, budget, tol)
    if oracle:
        for cls in classes:
            _attach_oracle(cls, tol, budget.max_oracle_terms)

    if k == 1:
        status = COMPLETE if n <= 5 else HEURISTIC
    elif k == 2:
        status = COMPLETE if n <= 4 and not unsolved else HEURISTIC
    else:
        status = HEURISTIC
    logger.info(f"classify {G.label()} m={m}: {len(classes)} classes ({status})")

    provenance = {"pairs": len(pairs), "unsolved_cases": sorted({t.label() for t in unsolved}), **budget.provenance()}
    return ClassificationResult(G, m, classes, status, certificates, merge_conjugates, provenance)
