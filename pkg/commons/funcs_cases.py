"""
Case reduction of the m = 2n system.

With |Λ| = 2 the normal form (A, C, J) falls into four cases by the characters χ₁, χ₂ and the sign ε.
Cases I and II reduce ℬ(g) to a few functions ξ, η, μ on ℓ²(G) living in eigenspaces of the rotation 𝓡.
The feasibility certificate tests, branch by branch, the closed-form values at g = 0, the eigenspace
dimensions, the norm identities and the unitarity of ℬ(g) at every point where the reduced functions are
fixed by their values at 0. Case III is tested through the support of μ: its values off 0 must reach
the twelfth-root condition on 𝓡μ(0) within the norm left over by μ(0).
The inputs are exact (phases, √n, d); decisions use 60-digit arithmetic.
"""
from commons.constants import CASE_I, CASE_II, CASE_III, CASE_IV, CASE_KINDS, CERTIFICATE_DIGITS, \
    CERTIFICATE_ZERO, CERTIFICATE_ROOT_TOLERANCE
from commons.funcs_abelian import FiniteAbelianGroup, Bicharacter, QuadraticForm, Phase
from commons.funcs_common import InputError
from commons.funcs_neargroup import ACJData, BTensor, GeneralSolution, conjugate_solution
from commons.funcs_spectral import CUBE_ROOTS, rotation, conjugation, eigenspace_basis
from commons.mgr_logger import LoggerManager

from dataclasses import dataclass, field
from fractions import Fraction

import itertools
import mpmath
import numpy as np
import sympy

ZETA_NAMES = ("1", "ζ", "ζ²")


@dataclass(frozen=True)
class CaseTag:
    """
    I(ω₁,ω₂), II(ω), III(ω₁,ω₂) or IV, with ω's stored as exponents j of ζ₃^j
    """
    kind: str
    omegas: tuple = ()

    def __post_init__(self):
        if self.kind not in CASE_KINDS:
            raise InputError(f"Unknown case: {self.kind}")
        omegas = tuple(int(j) % 3 for j in self.omegas)
        expected = {CASE_I: 2, CASE_II: 1, CASE_III: 2, CASE_IV: 0}[self.kind]
        if len(omegas) != expected:
            raise InputError(f"Case {self.kind} takes {expected} cube roots, got {len(omegas)}")
        object.__setattr__(self, "omegas", omegas)

    @property
    def omega_values(self):
        return tuple(CUBE_ROOTS[j] for j in self.omegas)

    def label(self):
        if not self.omegas:
            return self.kind
        return f"{self.kind}({','.join(ZETA_NAMES[j] for j in self.omegas)})"

    def to_json(self):
        return {"kind": self.kind, "omegas": list(self.omegas)}

    @classmethod
    def from_json(cls, data):
        return cls(data["kind"], tuple(data.get("omegas", ())))


def case_tags(G):
    """
    Every case of the four-way split; Case I up to exchanging the two basis vectors
    """
    tags = [CaseTag(CASE_I, (j1, j2)) for j1 in range(3) for j2 in range(j1, 3)]
    tags += [CaseTag(CASE_II, (j,)) for j in range(3)]
    tags += [CaseTag(CASE_III, pair) for pair in itertools.product(range(3), repeat=2)]
    tags.append(CaseTag(CASE_IV))
    return tags


def _base_phase(gauss):
    k = int(round(np.angle(gauss) * 4 / np.pi))
    if abs(gauss - np.exp(1j * np.pi * k / 4)) > 1e-9:
        raise InputError(f"Gauss sum {gauss:.6f} is not an eighth root of unity")
    return Phase(Fraction(-k, 24))


def base_cube_root(a):
    """
    The c with c³â(0) = 1 of smallest argument, exactly; equals cube_root_choices(a)[0]
    """
    return _base_phase(a.gauss_sum())


def _cube_root_index(z):
    distances = [abs(complex(z) - w) for w in CUBE_ROOTS]
    j = int(np.argmin(distances))
    if distances[j] > 1e-6:
        raise InputError(f"Ratio {complex(z):.6f} is not a cube root of unity")
    return j


def case_acj(b, a, tag):
    """
    Normal form (A, C, J) of a Case I or Case II tag, with c_t = ω_t·c for the base cube root c
    """
    G = b.group
    zero = G.zero
    c0 = base_cube_root(a).value()
    if tag.kind == CASE_I:
        w1, w2 = tag.omega_values
        return ACJData(b, a, (0, 1), (zero, zero), (w1 * c0, w2 * c0), (1, 1), 1)
    if tag.kind == CASE_II:
        (w,) = tag.omega_values
        return ACJData(b, a, (1, 0), (zero, zero), (w * c0, w * c0), (1, -1), -1)
    raise InputError(f"No structured normal form for Case {tag.kind}")


def case_of(acj):
    """
    CaseTag matching the character pattern (χ₁, χ₂, ε) of a two-dimensional normal form
    """
    if acj.size != 2:
        raise InputError(f"Case split needs |Λ| = 2, got {acj.size}")
    G = acj.group
    n = G.order
    omegas = []
    for t in range(2):
        twisted = complex(np.dot(acj.form.vector, acj.chi[t]) / np.sqrt(n))
        omegas.append(_cube_root_index(acj.c[t] / _base_phase(twisted).value()))
    orders = sorted(G.element_order(g) for g in acj.shifts)
    if orders == [1, 1]:
        if acj.eps == 1:
            return CaseTag(CASE_I, tuple(sorted(omegas)))
        return CaseTag(CASE_II, (omegas[0],))
    if orders == [1, 2]:
        if G.element_order(acj.shifts[0]) != 1:
            omegas.reverse()
        return CaseTag(CASE_III, tuple(omegas))
    return CaseTag(CASE_IV)


def _rotation_matrix(R):
    return R.matrix if hasattr(R, "matrix") else np.asarray(R, dtype=complex)


def _from_matrices(rows):
    """
    rows[(r,t)][(s,u)] = function on G  →  BTensor with B[r, s, t, u, g]
    """
    mats = np.array([[np.asarray(f, dtype=complex) for f in row] for row in rows])
    n = mats.shape[-1]
    return BTensor(mats.reshape(2, 2, 2, 2, n).transpose(0, 2, 1, 3, 4))


def case_one_btensor(xi1, xi2, eta1, eta2, mu, R, omegas=(0, 0)):
    """
    ℬ(g) of Case I, rows (r,t) and columns (s,u):
        ξ₁        η₂        η₂        μ
        ω₁ω₂²η₂   ω₂𝓡²μ     ω₁²𝓡μ     ω₁ω₂²η₁
        ω₁²ω₂η₂   ω₂²𝓡μ     ω₁𝓡²μ     ω₁²ω₂η₁
        μ         η₁        η₁        ξ₂
    :param R: rotation 𝓡 built with the base cube root
    :param omegas: exponents of ω₁, ω₂
    """
    M = _rotation_matrix(R)
    w1, w2 = (CUBE_ROOTS[j % 3] for j in omegas)
    mu = np.asarray(mu, dtype=complex)
    Rmu = M @ mu
    R2mu = M @ Rmu
    rows = [
        [xi1, eta2, eta2, mu],
        [w1 * w2 ** 2 * np.asarray(eta2), w2 * R2mu, w1 ** 2 * Rmu, w1 * w2 ** 2 * np.asarray(eta1)],
        [w1 ** 2 * w2 * np.asarray(eta2), w2 ** 2 * Rmu, w1 * R2mu, w1 ** 2 * w2 * np.asarray(eta1)],
        [mu, eta1, eta1, xi2],
    ]
    return _from_matrices(rows)


def case_two_btensor(xi, eta, mu, R, J, omega=0):
    """
    ℬ(g) of Case II, rows (r,t) and columns (s,u):
        −ω𝓡²μ   η     −𝓙η    ω̄𝓡μ
        η       ξ     μ      −η
        −𝓙η    μ     −𝓙ξ    𝓙η
        ω̄𝓡μ    −η    𝓙η     −ω𝓡²μ
    """
    M = _rotation_matrix(R)
    w = CUBE_ROOTS[omega % 3]
    xi, eta, mu = (np.asarray(f, dtype=complex) for f in (xi, eta, mu))
    Rmu = M @ mu
    R2mu = M @ Rmu
    Jeta = J(eta)
    Jxi = J(xi)
    rows = [
        [-w * R2mu, eta, -Jeta, np.conj(w) * Rmu],
        [eta, xi, mu, -eta],
        [-Jeta, mu, -Jxi, Jeta],
        [np.conj(w) * Rmu, -eta, Jeta, -w * R2mu],
    ]
    return _from_matrices(rows)


Z3_M6_RADIUS2 = np.sqrt(3) / 24


def z3_m6_data():
    """
    ℤ₃ with ⟨g,h⟩ = ζ₃^{gh} and a(1) = a(2) = ζ₃
    """
    G = FiniteAbelianGroup.cyclic(3)
    b = Bicharacter.standard(G)
    third = Phase.from_ratio(1, 3)
    a = QuadraticForm(b, (Phase(0), third, third))
    return G, b, a


def z3_m6_family(x, y=None, conjugate=False):
    """
    Case I(1,1) solutions for ℤ₃, m = 6 on the circle x² + y² = √3/24
    :param x: first circle coordinate
    :param y: second coordinate; defaults to the non-negative root
    :param conjugate: return the complex conjugate category instead
    :return: GeneralSolution
    """
    x = float(x)
    if y is None:
        rest = Z3_M6_RADIUS2 - x * x
        if rest < -1e-12:
            raise InputError(f"x = {x} is off the circle x² + y² = √3/24")
        y = np.sqrt(max(rest, 0.0))
    y = float(y)
    if abs(x * x + y * y - Z3_M6_RADIUS2) > 1e-9:
        raise InputError(f"(x, y) = ({x}, {y}) is off the circle x² + y² = √3/24")

    G, b, a = z3_m6_data()
    tag = CaseTag(CASE_I, (0, 0))
    acj = case_acj(b, a, tag)
    R = rotation(b, a, acj.c[0])
    z = CUBE_ROOTS[1]
    r3 = np.sqrt(3)
    f0 = np.array([1, -z / 2, -z / 2])
    f0p = np.array([0, z * 1j, -z * 1j])
    f1 = np.array([1, z, z])

    xi = -(r3 - 1) / 2 * f0 + x * f0p
    mu = -(r3 - 1) / 6 * f0 - x * f0p + f1 / 3
    btensor = case_one_btensor(xi, xi, y * f0p, -y * f0p, mu, R, tag.omegas)
    provenance = {"source": "Z3 m=6 circle family", "x": x, "y": y, "case": tag.label()}
    s = GeneralSolution(acj, btensor, provenance=provenance)
    return conjugate_solution(s) if conjugate else s


@dataclass
class BranchCheck:
    branch: str
    feasible: bool
    constraint: str = ""

    def to_json(self):
        return {"branch": self.branch, "feasible": self.feasible, "constraint": self.constraint}


@dataclass
class FeasibilityCertificate:
    tag: CaseTag
    feasible: bool
    reason: str = ""
    branches: list = field(default_factory=list)
    dimensions: tuple = ()

    @property
    def surviving(self):
        return [x for x in self.branches if x.feasible]

    def to_json(self):
        return {
            "case": self.tag.label(),
            "feasible": self.feasible,
            "reason": self.reason,
            "dimensions": list(self.dimensions),
            "branches": [x.to_json() for x in self.branches],
        }


def _mp(expr):
    value = sympy.N(expr, CERTIFICATE_DIGITS + 10)
    re, im = value.as_real_imag()
    return mpmath.mpc(mpmath.mpf(str(re)), mpmath.mpf(str(im)))


def _is_zero(z):
    return abs(z) < CERTIFICATE_ZERO


class _Affine:
    """
    α + β·s + γ·e in the branch parameters: e = η₁(0) and s = √(1 − 4n·e²),
    both rational in t through s = (1 − t²)/(1 + t²), e = t/(√n(1 + t²)), |t| ≤ 1
    """
    __slots__ = ("coef",)

    def __init__(self, alpha=0, beta=0, gamma=0):
        self.coef = (mpmath.mpc(alpha), mpmath.mpc(beta), mpmath.mpc(gamma))

    def __add__(self, other):
        return _Affine(*(x + y for x, y in zip(self.coef, other.coef)))

    def __sub__(self, other):
        return _Affine(*(x - y for x, y in zip(self.coef, other.coef)))

    def __neg__(self):
        return _Affine(*(-x for x in self.coef))

    def scale(self, z):
        return _Affine(*(z * x for x in self.coef))

    def conj(self):
        return _Affine(*(mpmath.conj(x) for x in self.coef))

    def numerator(self, root_n):
        """
        value·(1 + t²) as ascending coefficients in t
        """
        alpha, beta, gamma = self.coef
        return [alpha + beta, gamma / root_n, alpha - beta]


def _pmul(p, q):
    out = [mpmath.mpc(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def _padd(p, q, scale=1):
    out = [mpmath.mpc(0)] * max(len(p), len(q))
    for i, x in enumerate(p):
        out[i] += x
    for i, y in enumerate(q):
        out[i] += scale * y
    return out


_ONE_PLUS_T2 = [mpmath.mpc(1), mpmath.mpc(0), mpmath.mpc(1)]


def _trim(p):
    p = list(p)
    while p and _is_zero(p[-1]):
        p.pop()
    return p


def _evaluate(p, t):
    return sum((c * t ** i for i, c in enumerate(p)), mpmath.mpc(0))


def _real_roots(p):
    """
    :return: None when p vanishes identically, otherwise the real roots with |t| ≤ 1
    """
    coeffs = _trim(p)
    if not coeffs:
        return None
    if len(coeffs) == 1:
        return []
    try:
        roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=400, extraprec=2 * CERTIFICATE_DIGITS)
    except mpmath.NoConvergence:
        return None
    return [mpmath.re(r) for r in roots
            if abs(mpmath.im(r)) < CERTIFICATE_ROOT_TOLERANCE and abs(mpmath.re(r)) <= 1 + CERTIFICATE_ROOT_TOLERANCE]


def _constant_value(p, degree):
    """
    value of p(t)/(1 + t²)^degree when it does not depend on t, else None
    """
    samples = [mpmath.mpf(0), mpmath.mpf(1) / 2, mpmath.mpf(1)]
    values = [_evaluate(p, t) / (1 + t * t) ** degree for t in samples]
    if all(abs(v - values[0]) < CERTIFICATE_ROOT_TOLERANCE for v in values):
        return values[0]
    return None


class _Branch:
    """
    Equations are numerators of quantities q(t)·(1 + t²)^degree that must vanish; bounds must be ≤ 0
    """

    def __init__(self, name, root_n):
        self.name = name
        self.root_n = root_n
        self.equations = []
        self.bounds = []

    def linear(self, label, value):
        self.equations.append((label, value.numerator(self.root_n), 1))

    def quadratic(self, label, products, constant=0):
        """
        Σ coef·x·y + constant = 0 for (coef, x, y) in products
        """
        self.equations.append((label, self._quadratic(products, constant), 2))

    def bound(self, label, products, constant=0):
        self.bounds.append((label, self._quadratic(products, constant), 2))

    def _quadratic(self, products, constant):
        total = [mpmath.mpc(constant) * c for c in _pmul(_ONE_PLUS_T2, _ONE_PLUS_T2)]
        for coef, x, y in products:
            total = _padd(total, _pmul(x.numerator(self.root_n), y.numerator(self.root_n)), coef)
        return total

    def decide(self):
        candidates = None
        for label, poly, degree in self.equations:
            if candidates is not None:
                scale = [abs(_evaluate(poly, t)) / (1 + t * t) ** degree for t in candidates]
                candidates = [t for t, v in zip(candidates, scale) if v < CERTIFICATE_ROOT_TOLERANCE]
                if not candidates:
                    return BranchCheck(self.name, False, label)
                continue
            roots = _real_roots(poly)
            if roots is None:
                continue
            if not roots:
                return BranchCheck(self.name, False, label)
            candidates = roots

        for label, poly, degree in self.bounds:
            if candidates is None:
                value = _constant_value(poly, degree)
                if value is not None and mpmath.re(value) > CERTIFICATE_ROOT_TOLERANCE:
                    return BranchCheck(self.name, False, label)
                continue
            values = [mpmath.re(_evaluate(poly, t) / (1 + t * t) ** degree) for t in candidates]
            if min(values) > CERTIFICATE_ROOT_TOLERANCE:
                return BranchCheck(self.name, False, label)
        return BranchCheck(self.name, True)


class _CaseContext:
    """
    Exact spectral data of 𝓡 at the point 0: p_k = ‖P_kδ₀‖² and f_k = P_kδ₀/p_k for the
    projections P_k onto ker(𝓡 − ζ₃^k)
    """

    def __init__(self, b, a):
        G = b.group
        n = G.order
        self.group = G
        self.n = n
        self.zero = G.index(G.zero)
        self.c_phase = base_cube_root(a)
        self.a_values = [_mp(a.values[i].exact()) for i in range(n)]
        self.root_n = mpmath.sqrt(n)
        self.d = _mp(n + sympy.sqrt(n * n + n))
        self.d_exact = n + sympy.sqrt(n * n + n)

        self.R = rotation(b, a, self.c_phase.value())
        self.J = conjugation(a)
        self.bases = [eigenspace_basis(self.R, w) for w in CUBE_ROOTS]
        self.dims = tuple(B.shape[1] for B in self.bases)

        table = b.phase_table
        conj_ca = [(self.c_phase * a.values[i]).conjugate() for i in range(n)]
        root = sympy.sqrt(n)
        col1 = [conj_ca[i].exact() / root for i in range(n)]
        col2 = [sympy.Add(*[(conj_ca[i] * table[i][h] * conj_ca[h]).exact() for h in range(n)]) / n
                for i in range(n)]
        self.p = []
        self.f = []
        for k in range(3):
            zk = Phase(Fraction(k, 3))
            column = [(sympy.Integer(int(i == self.zero)) + zk.conjugate().exact() * col1[i]
                       + zk.exact() * col2[i]) / 3 for i in range(n)]
            p = _mp(column[self.zero])
            self.p.append(p)
            self.f.append(None if _is_zero(p) else [_mp(x) / p for x in column])

    def point_free(self, k):
        """
        ker(𝓡 − ζ^k) forces the value at 0 to vanish
        """
        return self.dims[k] == 0 or self.f[k] is None

    def determined(self, k, gi):
        B = self.bases[k]
        if B.shape[1] == 0:
            return True
        rank0 = np.linalg.matrix_rank(B[[self.zero]], tol=1e-8)
        return np.linalg.matrix_rank(B[[self.zero, gi]], tol=1e-8) == rank0

    def value(self, k, gi, v):
        """
        f(g) for f ∈ ker(𝓡 − ζ^k) determined at g by f(0) = v
        """
        if self.dims[k] == 0 or self.f[k] is None:
            return _Affine()
        return v.scale(self.f[k][gi])

    def norm_terms(self, k, v, coef=1):
        """
        coefficient terms of ‖f‖² for f ∈ ker(𝓡 − ζ^k) with f(0) = v, when the eigenspace fixes it
        """
        if self.dims[k] == 0:
            return []
        return [(coef / self.p[k], v, v.conj())]

    def norm_fixed(self, k):
        return self.dims[k] == 0 or (self.dims[k] == 1 and self.f[k] is not None)


def _mu_components(mu0, rmu0, r2mu0):
    """
    μ_k(0) = (μ(0) + ζ^{-k}𝓡μ(0) + ζ^k𝓡²μ(0))/3
    """
    out = []
    for k in range(3):
        z = mpmath.expjpi(mpmath.mpf(2 * k) / 3)
        out.append((mu0 + rmu0.scale(mpmath.conj(z)) + r2mu0.scale(z)).scale(mpmath.mpf(1) / 3))
    return out


def _pair_constraints(branch, ctx, mus, excluded, target):
    pair = [k for k in range(3) if k != excluded]
    terms = []
    exact = True
    for k in pair:
        if ctx.dims[k] == 0:
            continue
        if ctx.f[k] is None:
            exact = False
            continue
        terms += ctx.norm_terms(k, mus[k])
        if ctx.dims[k] > 1:
            exact = False
    label = f"norm identity over μ_{pair[0]}, μ_{pair[1]}"
    if exact:
        branch.quadratic(label, terms, -target)
    else:
        branch.bound(label, terms, -target)


def _case_one_branches(ctx, tag):
    n, d, rn = ctx.n, ctx.d, ctx.root_n
    j1, j2 = tag.omegas
    w12 = mpmath.conj(mpmath.expjpi(mpmath.mpf(2 * (j1 + j2)) / 3))
    excluded = (-(j1 + j2)) % 3
    half_d = 1 / (2 * d)
    branches = []

    for variant, k1, k2 in itertools.product((1, 2), (1, -1), (1, -1)):
        if variant == 1:
            name = f"(1) κ₁={k1:+d} κ₂={k2:+d}"
            xi0 = _Affine(-half_d, -k1 / (2 * rn))
            eta0 = _Affine(0, 0, 1)
            mu0 = _Affine(half_d * -1, k1 / (2 * rn))
            rmu0 = _Affine(w12 * k2 * 1j / (2 * rn), w12 * k1 / (2 * rn))
        else:
            name = f"(2) κ₁={k1:+d} κ₂={k2:+d}"
            xi0 = _Affine(-half_d - k1 / (2 * rn))
            eta0 = _Affine()
            mu0 = _Affine(-half_d + k1 / (2 * rn))
            rmu0 = _Affine(w12 * (-k1 + k2 * 1j) / (2 * rn))
        mus = _mu_components(mu0, rmu0, rmu0.conj())
        eta = (eta0, -eta0)
        branch = _Branch(name, rn)

        for r, k in enumerate((j1, j2)):
            if ctx.point_free(k):
                branch.linear(f"ξ_{r + 1}(0) = 0", xi0)
                branch.linear(f"η_{r + 1}(0) = 0", eta[r])
        for k in range(3):
            if ctx.point_free(k):
                branch.linear(f"μ_{k}(0) = 0", mus[k])

        _pair_constraints(branch, ctx, mus, excluded, 1 / mpmath.mpf(3))

        for r, k in enumerate((j1, j2)):
            if ctx.norm_fixed(k) and ctx.norm_fixed(excluded):
                terms = ctx.norm_terms(k, xi0) + ctx.norm_terms(k, eta[r], -2) + ctx.norm_terms(excluded, mus[excluded], -3)
                branch.quadratic(f"norm identity for ξ_{r + 1}, η_{r + 1}", terms, 1 / d)

        _pointwise_case_one(branch, ctx, tag, xi0, eta, mus)
        branches.append(branch.decide())
    return branches


def _pointwise_case_one(branch, ctx, tag, xi0, eta, mus):
    j1, j2 = tag.omegas
    w1, w2 = (mpmath.expjpi(mpmath.mpf(2 * j) / 3) for j in (j1, j2))
    zetas = [mpmath.expjpi(mpmath.mpf(2 * k) / 3) for k in range(3)]
    G = ctx.group
    for gi in range(ctx.n):
        if gi == ctx.zero or not all(ctx.determined(k, gi) for k in range(3)):
            continue
        xi1 = ctx.value(j1, gi, xi0)
        xi2 = ctx.value(j2, gi, xi0)
        eta1 = ctx.value(j1, gi, eta[0])
        eta2 = ctx.value(j2, gi, eta[1])
        parts = [ctx.value(k, gi, mus[k]) for k in range(3)]
        mu = parts[0] + parts[1] + parts[2]
        rmu = _Affine()
        r2mu = _Affine()
        for k in range(3):
            rmu = rmu + parts[k].scale(zetas[k])
            r2mu = r2mu + parts[k].scale(zetas[k] ** 2)
        B = [
            [xi1, eta2, eta2, mu],
            [eta2.scale(w1 * w2 ** 2), r2mu.scale(w2), rmu.scale(w1 ** 2), eta1.scale(w1 * w2 ** 2)],
            [eta2.scale(w1 ** 2 * w2), rmu.scale(w2 ** 2), r2mu.scale(w1), eta1.scale(w1 ** 2 * w2)],
            [mu, eta1, eta1, xi2],
        ]
        where = G.element(gi)
        for i, j in itertools.product(range(4), repeat=2):
            target = -1 / mpmath.mpf(ctx.n) if i == j else 0
            left = [(1, B[l][i].conj(), B[l][j]) for l in range(4)]
            right = [(1, B[i][l], B[j][l].conj()) for l in range(4)]
            branch.quadratic(f"ℬ*ℬ unitarity at {where}", left, target)
            branch.quadratic(f"ℬℬ* unitarity at {where}", right, target)


def _lmul(x, y):
    """
    x·ȳ for x, y affine in a real parameter p, as ascending coefficients in p
    """
    return [x[0] * mpmath.conj(y[0]), x[0] * mpmath.conj(y[1]) + x[1] * mpmath.conj(y[0]), x[1] * mpmath.conj(y[1])]


def _re(p):
    return [mpmath.mpc(mpmath.re(c)) for c in p]


def _im(p):
    return [mpmath.mpc(mpmath.im(c)) for c in p]


def _solvable(equations, positive=None):
    """
    :param equations: polynomials in a real parameter that must vanish together
    :param positive: polynomial that must stay positive at the common root
    :return: False only when no common real root exists
    """
    candidates = None
    for poly in equations:
        coeffs = _trim(poly)
        if not coeffs:
            continue
        if candidates is None:
            if len(coeffs) == 1:
                return False
            try:
                roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=400, extraprec=2 * CERTIFICATE_DIGITS)
            except mpmath.NoConvergence:
                return True
            candidates = [mpmath.re(r) for r in roots if abs(mpmath.im(r)) < CERTIFICATE_ROOT_TOLERANCE]
        else:
            candidates = [t for t in candidates if abs(_evaluate(coeffs, t)) < CERTIFICATE_ROOT_TOLERANCE]
        if not candidates:
            return False
    if candidates is None or positive is None:
        return True
    return any(mpmath.re(_evaluate(positive, t)) > -CERTIFICATE_ROOT_TOLERANCE for t in candidates)


def _pointwise_case_two(ctx, j, mus):
    """
    Order-two points g ≠ 0 where μ_k(g), k ≠ j, are fixed by μ_k(0). There 𝓙μ_j = −μ_j leaves
    μ_j(g) = u·p with u² = −conj(a(g)) and p real, and the columns of ℬ(g) are orthogonal of norm 1/n
    only if η = ξ = 0, or η = μ = 0, or η ≠ 0 with ξ = −η²/μ.
    :return: index of the first point admitting none of the three, else None
    """
    zetas = [mpmath.expjpi(mpmath.mpf(2 * k) / 3) for k in range(3)]
    w = zetas[j]
    inv_n = 1 / mpmath.mpf(ctx.n)
    others = [k for k in range(3) if k != j]
    neg = ctx.group.neg_index
    for gi in range(ctx.n):
        if gi == ctx.zero or neg[gi] != gi or not all(ctx.determined(k, gi) for k in others):
            continue
        fixed = {k: ctx.value(k, gi, mus[k]).coef[0] for k in others}
        u = mpmath.sqrt(-mpmath.conj(ctx.a_values[gi]))
        mu = (fixed[others[0]] + fixed[others[1]], u)
        r1 = (sum(zetas[k] * fixed[k] for k in others), w * u)
        r2 = (sum(zetas[k] ** 2 * fixed[k] for k in others), w ** 2 * u)
        s = (mpmath.conj(w) * r1[0] + w * r2[0], mpmath.conj(w) * r1[1] + w * r2[1])

        columns = _padd(_re(_padd(_lmul(r1, r1), _lmul(r2, r2))), [-inv_n])
        cross = _re(_lmul((w * r1[0], w * r1[1]), r2))
        norm_mu = _re(_lmul(mu, mu))
        h = [-x for x in _lmul(mu, (s[0] - mu[0], s[1] - mu[1]))]
        re_h = _re(h)

        if _solvable([columns, cross, _padd(norm_mu, [-inv_n])]):
            continue
        if _solvable([_re(list(mu)), _im(list(mu)), columns, cross]):
            continue
        quartic = _padd(_padd(_pmul(re_h, re_h), _pmul(norm_mu, norm_mu)), _pmul(_padd([-inv_n], re_h, 2), norm_mu))
        if _solvable([_im(h), _padd(columns, re_h, 2), _padd(cross, re_h), quartic], re_h):
            continue
        return gi
    return None


def _case_two_branches(ctx, tag):
    d, rn = ctx.d, ctx.root_n
    (j,) = tag.omegas
    w = mpmath.expjpi(mpmath.mpf(2 * j) / 3)
    half_d = 1 / (2 * d)
    target = (1 - 2 / d) / 3
    branches = []
    variants = [(1, k1, k2) for k1, k2 in itertools.product((1, -1), repeat=2)]
    variants += [(2, k, 0) for k in (1, -1)]
    for variant, k1, k2 in variants:
        if variant == 1:
            name = f"(1) κ₁={k1:+d} κ₂={k2:+d}"
            mu0 = _Affine(1j * k1 / (2 * rn), -1j * k2 / (2 * rn))
            rmu0 = _Affine(-w * half_d, -w * 1j * k2 / (2 * rn))
        else:
            name = f"(2) κ={k1:+d}"
            mu0 = _Affine(1j * k1 / rn)
            rmu0 = _Affine(w * (-half_d - 1j * k1 / (2 * rn)))
        mus = _mu_components(mu0, rmu0, -rmu0.conj())
        if variant == 2:
            free = ctx.dims[j] - (0 if ctx.f[j] is None else 1)
            if free < 2:
                branches.append(BranchCheck(name, False, "dim{f ∈ ker(𝓡 − ω): f(0) = 0} ≥ 2"))
                continue
        branch = _Branch(name, rn)
        for k in range(3):
            if ctx.point_free(k):
                branch.linear(f"μ_{k}(0) = 0", mus[k])
        _pair_constraints(branch, ctx, mus, j, target)
        check = branch.decide()
        if check.feasible and variant == 2:
            gi = _pointwise_case_two(ctx, j, mus)
            if gi is not None:
                check = BranchCheck(name, False, f"ℬ(g) unitarity at {ctx.group.element(gi)}")
        branches.append(check)
    return branches


def _support_reach(lines, w):
    """
    Least Σ t²/λ over real t with Σ v·t = w
    :param lines: (v, λ) per free direction, v a unit complex number
    :param w: target
    :return: (least value, rank of the directions), or None when w is out of their span
    """
    cols = [(mpmath.re(v) * mpmath.sqrt(lam), mpmath.im(v) * mpmath.sqrt(lam)) for v, lam in lines]
    gxx = sum((x * x for x, _ in cols), mpmath.mpf(0))
    gxy = sum((x * y for x, y in cols), mpmath.mpf(0))
    gyy = sum((y * y for _, y in cols), mpmath.mpf(0))
    wx, wy = mpmath.re(w), mpmath.im(w)
    det = gxx * gyy - gxy * gxy
    if det > CERTIFICATE_ROOT_TOLERANCE:
        return (gyy * wx * wx - 2 * gxy * wx * wy + gxx * wy * wy) / det, 2
    trace = gxx + gyy
    if trace > CERTIFICATE_ROOT_TOLERANCE:
        ux, uy = max(cols, key=lambda c: c[0] * c[0] + c[1] * c[1])
        size = mpmath.sqrt(ux * ux + uy * uy)
        ux, uy = ux / size, uy / size
        if abs(wx * uy - wy * ux) > CERTIFICATE_ROOT_TOLERANCE:
            return None
        return (wx * ux + wy * uy) ** 2 / trace, 1
    if abs(w) > CERTIFICATE_ROOT_TOLERANCE:
        return None
    return mpmath.mpf(0), 0


def _case_three_branches(b, a):
    """
    μ is supported on S = {h: ⟨h, g_χ⟩ = 1} with 𝓙μ = μ, ‖μ‖² = 1/2 and μ(0) = −1/(2d) + κ/(2√n),
    while σ = Σ_{h∈S} μ(h) = c√n·𝓡μ(0) has (√2·σ/c)¹² = −⟨g_χ,g_χ⟩.
    An order-two h ∈ S contributes μ(h) = v·t with v² = conj(a(h)) and t real, a pair {h, −h}
    contributes v·t with |μ(h)|² + |μ(−h)|² ≥ t²/2.
    """
    G = b.group
    n = G.order
    zero = G.index(G.zero)
    neg = G.neg_index
    table = b.phase_table
    rn = mpmath.sqrt(n)
    d = mpmath.re(_mp(n + sympy.sqrt(n * n + n)))
    c = _mp(base_cube_root(a).exact())
    branches = []
    for gc in range(n):
        if gc == zero or neg[gc] != gc:
            continue
        support = [h for h in range(n) if h != zero and table[h][gc].is_one()]
        lines, slack, seen = [], False, set()
        for h in support:
            if h in seen:
                continue
            seen.update((h, int(neg[h])))
            v = mpmath.sqrt(mpmath.conj(_mp(a.values[h].exact())))
            if neg[h] == h:
                lines.append((v, 1))
            else:
                lines.append((v, 2))
                slack = True
        odd = 1 if table[gc][gc].is_one() else 0
        rhos = [mpmath.expjpi(mpmath.mpf(2 * k + odd) / 12) for k in range(12)]
        for kappa in (1, -1):
            name = f"g_χ={G.element(gc)} κ={kappa:+d}"
            mu0 = -1 / (2 * d) + kappa / (2 * rn)
            budget = mpmath.mpf(1) / 2 - mu0 * mu0
            feasible = False
            for rho in rhos:
                reach = _support_reach(lines, c * rho / mpmath.sqrt(2) - mu0)
                if reach is None:
                    continue
                least, rank = reach
                if slack or len(lines) > rank:
                    feasible = least <= budget + CERTIFICATE_ROOT_TOLERANCE
                else:
                    feasible = abs(least - budget) < CERTIFICATE_ROOT_TOLERANCE
                if feasible:
                    break
            constraint = "" if feasible else "(√(2n)𝓡μ(0))¹² = −⟨g_χ,g_χ⟩ with ‖μ‖² = 1/2 on the support of μ"
            branches.append(BranchCheck(name, feasible, constraint))
    return branches


def case_feasibility(G, b, a, case):
    """
    Refutes or keeps a case of the m = 2n split for the data (⟨·,·⟩, a)
    :param G: FiniteAbelianGroup of b
    :param b: nondegenerate Bicharacter
    :param a: even QuadraticForm of b
    :param case: CaseTag
    :return: FeasibilityCertificate; feasible=False carries the violated constraint per branch
    """
    logger = LoggerManager.get_logger(__name__)
    n = G.order

    if case.kind == CASE_IV:
        return FeasibilityCertificate(case, False, "Case IV never occurs")
    if case.kind == CASE_III and n % 2:
        return FeasibilityCertificate(case, False, "no character of order two on a group of odd order")

    with mpmath.workdps(CERTIFICATE_DIGITS):
        if case.kind == CASE_III:
            dims = ()
            branches = _case_three_branches(b, a)
            cert = FeasibilityCertificate(case, any(x.feasible for x in branches), "", branches)
        elif case.kind == CASE_I:
            ctx = _CaseContext(b, a)
            dims = ctx.dims
            j1, j2 = case.omegas
            if j1 == j2 and dims[j1] < 2:
                cert = FeasibilityCertificate(case, False, f"dim ker(𝓡 − ω) = {dims[j1]} < 2", dimensions=dims)
            else:
                branches = _case_one_branches(ctx, case)
                cert = FeasibilityCertificate(case, any(x.feasible for x in branches), "", branches, dims)
        else:
            ctx = _CaseContext(b, a)
            dims = ctx.dims
            (j,) = case.omegas
            if dims[j] < 2:
                cert = FeasibilityCertificate(case, False, f"dim ker(𝓡 − ω) = {dims[j]} < 2", dimensions=dims)
            else:
                branches = _case_two_branches(ctx, case)
                cert = FeasibilityCertificate(case, any(x.feasible for x in branches), "", branches, dims)

    if not cert.feasible and not cert.reason:
        cert.reason = "every branch violates a constraint"
    for x in cert.branches:
        if not x.feasible:
            logger.debug(f"{G.label()} case {case.label()} branch {x.branch}: refuted by {x.constraint}")
    logger.info(f"{G.label()} case {case.label()}: {'open' if cert.feasible else 'refuted'} "
                f"(eigenspace dimensions {dims}) {cert.reason}")
    return cert


def feasible_cases(G, b, a):
    """
    :return: (certificates of every case, tags that survive)
    """
    certificates = [case_feasibility(G, b, a, tag) for tag in case_tags(G)]
    return certificates, [x.tag for x in certificates if x.feasible]
