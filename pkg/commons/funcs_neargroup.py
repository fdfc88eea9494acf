"""
Solution data of near-group categories over a finite abelian group with irrational dimension,
residuals of the classifying polynomial systems, gauge and automorphism actions, equivalence.

Two regimes share this module. For m = n a solution is the quadruple (⟨·,·⟩, a, b, c) with b a
function on G. For m = n·|Λ| a solution carries the normal form (A, C, J) on 𝒦₀ = ℂ^Λ and the
coefficient tensor B[r, s, t, u, g] = b^{r,s}_{t,u}(g).
"""
from commons.constants import DEFAULT_TOLERANCE, EQUAL, UNEQUAL, INCONCLUSIVE, EQUAL_THRESHOLD, \
    UNEQUAL_THRESHOLD, DEFAULT_GRID_RESOLUTION, DEFAULT_SEED
from commons.funcs_abelian import automorphisms, fourier
from commons.funcs_common import InputError, VerificationError
from commons.funcs_spectral import rotation_from_cprime, conjugation
from commons.mgr_logger import LoggerManager

from dataclasses import dataclass, field
from functools import cached_property
from math import gcd

import itertools
import numpy as np
import scipy.linalg
import scipy.optimize
import sympy


@dataclass(frozen=True)
class QuadIrrational:
    """
    (p + q·√D)/r with D square-free, r > 0 and gcd(p, q, r) = 1
    """
    p: int
    q: int = 0
    D: int = 1
    r: int = 1

    def __post_init__(self):
        p, q, D, r = int(self.p), int(self.q), int(self.D), int(self.r)
        if r == 0:
            raise InputError("Denominator of a quadratic irrational must not be zero")
        if D < 0:
            raise InputError(f"Radicand must be non-negative: {D}")
        if D == 0:
            q, D = 0, 1
        root = 1
        for prime, e in sympy.factorint(D).items():
            root *= prime ** (e // 2)
        D //= root * root
        q *= root
        if D == 1:
            p, q = p + q, 0
        if r < 0:
            p, q, r = -p, -q, -r
        common = gcd(gcd(abs(p), abs(q)), r)
        object.__setattr__(self, "p", p // common)
        object.__setattr__(self, "q", q // common)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "r", r // common)

    @classmethod
    def from_nm(cls, n, m):
        """
        Positive root d = (m + √(m² + 4n))/2 of d² = n + md
        """
        return cls(m, 1, m * m + 4 * n, 2)

    def is_rational(self):
        return self.q == 0

    def value(self):
        return (self.p + self.q * np.sqrt(self.D)) / self.r

    def exact(self):
        return (sympy.Integer(self.p) + self.q * sympy.sqrt(self.D)) / self.r

    def conjugate(self):
        """
        Galois conjugate (p − q·√D)/r
        """
        return QuadIrrational(self.p, -self.q, self.D, self.r)

    def __float__(self):
        return float(self.value())

    def __str__(self):
        if self.q == 0:
            body = f"{self.p}"
        else:
            coef = "" if abs(self.q) == 1 else f"{abs(self.q)}"
            sign = "+" if self.q > 0 else "-"
            body = f"{self.p}{sign}{coef}√{self.D}" if self.p else f"{'-' if self.q < 0 else ''}{coef}√{self.D}"
        if self.r == 1:
            return body
        return f"({body})/{self.r}"

    def to_json(self):
        return {"p": self.p, "q": self.q, "D": self.D, "r": self.r}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["p"]), int(data["q"]), int(data["D"]), int(data["r"]))


def _safe(func):
    """
    Evaluates a residual; numerical failure is reported as an infinite residual
    """
    try:
        with np.errstate(all="ignore"):
            value = float(func())
    except (ArithmeticError, ValueError, IndexError, np.linalg.LinAlgError):
        return float("inf")
    if np.isnan(value):
        return float("inf")
    return value


def _max_abs(x):
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


@dataclass
class ResidualReport:
    """
    Per-equation maximum absolute residuals. Informational entries are shown but never decide the verdict.
    """
    residuals: dict
    tolerance: float = DEFAULT_TOLERANCE
    informational: frozenset = frozenset()

    @property
    def overall(self):
        values = [float("inf") if np.isnan(v) else v for k, v in self.residuals.items()
                  if k not in self.informational]
        return max(values, default=0.0)

    @property
    def passed(self):
        return self.overall < self.tolerance

    def failed(self):
        return [k for k, v in self.residuals.items() if k not in self.informational and not v < self.tolerance]

    def merged(self, other, prefix=""):
        residuals = dict(self.residuals)
        residuals.update({f"{prefix}{k}": v for k, v in other.residuals.items()})
        informational = set(self.informational) | {f"{prefix}{k}" for k in other.informational}
        return ResidualReport(residuals, self.tolerance, frozenset(informational))

    def to_json(self):
        return {
            "residuals": {k: (v if np.isfinite(v) else "inf") for k, v in self.residuals.items()},
            "informational": sorted(self.informational),
            "overall": self.overall if np.isfinite(self.overall) else "inf",
            "tolerance": self.tolerance,
            "passed": self.passed
        }


def _dimension(n, m, unitary=True):
    d = QuadIrrational.from_nm(n, m)
    if d.is_rational():
        raise InputError(f"Dimension d = {d} is rational for n={n}, m={m}; see dimension_diagnosis")
    return d if unitary else d.conjugate()


@dataclass(frozen=True, eq=False)
class MNSolution:
    """
    (⟨·,·⟩, a, b, c) for m = n. unitary=False marks a Galois-conjugate solution, whose d is the
    negative conjugate root.
    """
    bicharacter: object
    form: object
    b: np.ndarray
    c: complex
    unitary: bool = True
    d: QuadIrrational = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        G = self.bicharacter.group
        b = np.asarray(self.b, dtype=complex)
        if b.shape != (G.order,):
            raise InputError(f"Table b must have {G.order} entries, got shape {b.shape}")
        if self.form.bicharacter != self.bicharacter:
            raise InputError("Quadratic form does not belong to the given bicharacter")
        c = complex(self.c)
        if abs(abs(c) - 1) > 1e-9:
            raise InputError(f"Scalar c must be unimodular: |c| = {abs(c)}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if self.d is None:
            object.__setattr__(self, "d", _dimension(G.order, G.order, self.unitary))

    @classmethod
    def from_cprime(cls, bicharacter, form, b, c_prime, **kwargs):
        """
        Solution given with c′ = c̄/√n
        """
        n = bicharacter.group.order
        return cls(bicharacter, form, b, np.conj(complex(c_prime)) * np.sqrt(n), **kwargs)

    @property
    def group(self):
        return self.bicharacter.group

    @property
    def n(self):
        return self.group.order

    @property
    def m(self):
        return self.n

    @property
    def d_value(self):
        return float(self.d)

    @property
    def c_prime(self):
        return np.conj(self.c) / np.sqrt(self.n)

    def label(self):
        return f"{self.group.label()} m={self.m}"


@dataclass(frozen=True, eq=False)
class ACJData:
    """
    Normal form of (A, C, J) on 𝒦₀ in a basis {e_t}: A(g)e_t = a(g)χ_t(g)e_t, Ce_t = c_t·e_t and
    Je_t = ε_t·e_{t̄}, with χ_t = ⟨·, g_t⟩
    """
    bicharacter: object
    form: object
    bar: tuple
    shifts: tuple
    c: tuple
    signs: tuple
    eps: int = 1

    def __post_init__(self):
        G = self.bicharacter.group
        k = len(self.bar)
        bar = tuple(int(x) for x in self.bar)
        shifts = tuple(G.reduce(g) for g in self.shifts)
        c = tuple(complex(x) for x in self.c)
        signs = tuple(int(x) for x in self.signs)
        if k == 0 or len(shifts) != k or len(c) != k or len(signs) != k:
            raise InputError("Index set data have inconsistent lengths")
        if self.form.bicharacter != self.bicharacter:
            raise InputError("Quadratic form does not belong to the given bicharacter")
        if self.eps not in (1, -1) or any(x not in (1, -1) for x in signs):
            raise InputError("Signs must be ±1")
        for t in range(k):
            tb = bar[t]
            if not 0 <= tb < k or bar[tb] != t:
                raise InputError(f"Index map t ↦ t̄ is not an involution at {t}")
            if shifts[tb] != G.neg(shifts[t]):
                raise InputError(f"Character of {tb} is not the inverse of the character of {t}")
            if abs(c[tb] - c[t]) > 1e-9:
                raise InputError(f"Scalars c_t differ on the pair ({t}, {tb})")
            if abs(abs(c[t]) - 1) > 1e-9:
                raise InputError(f"Scalar c_{t} must be unimodular")
            if signs[t] * signs[tb] != self.eps:
                raise InputError(f"Sign condition ε_t·ε_t̄ = ε fails at {t}")
        object.__setattr__(self, "bar", bar)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "signs", signs)

    @property
    def group(self):
        return self.bicharacter.group

    @property
    def size(self):
        return len(self.bar)

    @cached_property
    def shift_index(self):
        return np.array([self.group.index(g) for g in self.shifts], dtype=int)

    @cached_property
    def chi(self):
        """
        chi[t, g] = χ_t(g) = ⟨g, g_t⟩
        """
        return self.bicharacter.matrix[:, self.shift_index].T.copy()

    @cached_property
    def c_vector(self):
        return np.array(self.c, dtype=complex)

    @cached_property
    def sign_vector(self):
        return np.array(self.signs, dtype=float)

    @cached_property
    def j_matrix(self):
        """
        J as v ↦ Jmat·conj(v)
        """
        k = self.size
        J = np.zeros((k, k), dtype=complex)
        for t in range(k):
            J[self.bar[t], t] = self.signs[t]
        return J

    def a_matrices(self):
        """
        A(g) as diagonal matrices, in group element order
        """
        avec = self.form.vector
        return [np.diag(avec[i] * self.chi[:, i]) for i in range(self.group.order)]

    def gauss_residual(self):
        """
        max_t |Σ_g a(g)χ_t(g) − √n·c_t⁻³|
        """
        n = self.group.order
        sums = self.chi @ self.form.vector
        return _max_abs(sums - np.sqrt(n) * self.c_vector ** -3)

    def act(self, theta):
        return ACJData(self.bicharacter.act(theta), self.form.act(theta), self.bar,
                       tuple(theta(g) for g in self.shifts), self.c, self.signs, self.eps)

    def conjugate(self):
        return ACJData(self.bicharacter.conjugate(), self.form.conjugate(), self.bar, self.shifts,
                       tuple(np.conj(x) for x in self.c), self.signs, self.eps)

    def same_structure(self, other, tol=1e-9):
        return (self.bicharacter == other.bicharacter and self.form == other.form and self.bar == other.bar
                and self.shifts == other.shifts and self.signs == other.signs and self.eps == other.eps
                and _max_abs(self.c_vector - other.c_vector) < tol)


@dataclass(frozen=True, eq=False)
class BTensor:
    """
    coefficients[r, s, t, u, g] = b^{r,s}_{t,u}(g)
    """
    coefficients: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.coefficients, dtype=complex)
        if B.ndim != 5 or len(set(B.shape[:4])) != 1:
            raise InputError(f"Coefficient tensor must have shape (k, k, k, k, n), got {B.shape}")
        object.__setattr__(self, "coefficients", B)

    @property
    def size(self):
        return self.coefficients.shape[0]

    @property
    def order(self):
        return self.coefficients.shape[4]

    def matrices(self):
        """
        ℬ(g) with ((r,t),(s,u)) entry b^{r,s}_{t,u}(g), stacked over g
        """
        k = self.size
        return self.coefficients.transpose(4, 0, 2, 1, 3).reshape(self.order, k * k, k * k)

    def matrix(self, gi):
        return self.matrices()[gi]

    @classmethod
    def zeros(cls, k, n):
        return cls(np.zeros((k, k, k, k, n), dtype=complex))

    @classmethod
    def from_sparse(cls, k, n, entries):
        """
        :param entries: iterable of ((r, s, t, u, g_index), value)
        """
        B = np.zeros((k, k, k, k, n), dtype=complex)
        for key, value in entries:
            B[tuple(key)] = value
        return cls(B)

    def to_sparse(self, threshold=0.0):
        return [(tuple(int(i) for i in key), complex(self.coefficients[key]))
                for key in zip(*np.nonzero(np.abs(self.coefficients) > threshold))]


@dataclass(frozen=True, eq=False)
class GeneralSolution:
    acj: ACJData
    btensor: BTensor
    d: QuadIrrational = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        btensor = self.btensor if isinstance(self.btensor, BTensor) else BTensor(self.btensor)
        if btensor.size != self.acj.size or btensor.order != self.acj.group.order:
            raise InputError(f"Coefficient tensor shape {btensor.coefficients.shape} does not match "
                             f"|Λ|={self.acj.size}, n={self.acj.group.order}")
        object.__setattr__(self, "btensor", btensor)
        if self.d is None:
            object.__setattr__(self, "d", _dimension(self.n, self.m))

    @property
    def group(self):
        return self.acj.group

    @property
    def bicharacter(self):
        return self.acj.bicharacter

    @property
    def form(self):
        return self.acj.form

    @property
    def n(self):
        return self.group.order

    @property
    def k(self):
        return self.acj.size

    @property
    def m(self):
        return self.n * self.k

    @property
    def d_value(self):
        return float(self.d)

    @property
    def B(self):
        return self.btensor.coefficients

    def label(self):
        return f"{self.group.label()} m={self.m}"


def residual_mn(s, tol=DEFAULT_TOLERANCE):
    """
    Residuals of the m = n system in both its rotation form (with c′ = c̄/√n) and its original form
    :param s: MNSolution
    :param tol: pass tolerance
    :return: ResidualReport
    """
    G = s.group
    n = G.order
    b = s.b
    avec = s.form.vector
    M = s.bicharacter.matrix
    neg = G.neg_index
    add = G.add_table
    zero = G.index(G.zero)
    d = s.d_value
    c = s.c
    cp = s.c_prime
    delta = np.zeros(n)
    delta[zero] = 1.0

    def cubic(conjugated):
        # T[h, k] = Σ_g w(g)·b(g+h)·b(g+k)
        weight = np.conj(b) if conjugated else avec * b[neg]
        shifted = b[add]  # shifted[g, h] = b(g+h)
        lhs = np.einsum("g,gh,gk->hk", weight, shifted, shifted)
        if conjugated:
            rhs = np.conj(M) * np.outer(b, b) - c / (d * np.sqrt(n))
        else:
            rhs = np.conj(M) * np.outer(b, b) - 1 / (cp * d * n)
        return _max_abs(lhs - rhs)

    residuals = {
        "cube_root": _safe(lambda: abs(cp ** 3 - avec.sum() / n ** 2)),
        "dimension": _safe(lambda: abs(d * d - d * n - n)),
        "rotation_fixed": _safe(lambda: _max_abs(rotation_from_cprime(s.bicharacter, s.form, cp)(b) - b)),
        "b_zero": _safe(lambda: abs(b[zero] + 1 / d)),
        "product_norm": _safe(lambda: _max_abs(avec * b * b[neg] - (1 / n - delta / d))),
        "cubic": _safe(lambda: cubic(False)),
        "conjugation_fixed": _safe(lambda: _max_abs(conjugation(s.form)(b) - b)),
        "positive_dimension": _safe(lambda: max(0.0, -d)),
        "fourier_twist": _safe(lambda: _max_abs(fourier(b, s.bicharacter) - c * avec * b[neg])),
        "modulus": _safe(lambda: _max_abs(np.abs(b) ** 2 - (1 / n - delta / d))),
        "reflection": _safe(lambda: _max_abs(np.conj(b) - avec * b[neg])),
        "cubic_unitary": _safe(lambda: cubic(True)),
    }
    informational = frozenset()
    if not s.unitary:
        informational = frozenset({"conjugation_fixed", "positive_dimension", "modulus", "reflection",
                                   "cubic_unitary"})
    return ResidualReport(residuals, tol, informational)


def _general_context(s):
    acj = s.acj
    G = s.group
    return {
        "n": G.order,
        "k": acj.size,
        "B": s.B,
        "M": acj.bicharacter.matrix,
        "avec": acj.form.vector,
        "chi": acj.chi,
        "c": acj.c_vector,
        "sg": acj.sign_vector,
        "bar": np.array(acj.bar, dtype=int),
        "eps": acj.eps,
        "d": s.d_value,
        "neg": G.neg_index,
        "add": G.add_table,
        "zero": G.index(G.zero),
        "shift": acj.shift_index,
    }


def _fourier_twist(x):
    B, M, n, bar = x["B"], x["M"], x["n"], x["bar"]
    sg, c, chi, avec = x["sg"], x["c"], x["chi"], x["avec"]
    lhs = np.einsum("gh,rstuh->rstug", M, B) / np.sqrt(n)
    # P[r,s,t,u,g] = B[s, t̄, r̄, u, g]
    P = B[:, bar][:, :, bar].transpose(2, 0, 1, 3, 4)
    coef = x["eps"] * sg[:, None, None, None, None] * sg[None, None, :, None, None] \
        * c[None, None, None, :, None] * (avec[None, :] * chi)[None, None, None, :, :]
    return lhs - coef * P


def _traces(x):
    B0 = x["B"][..., x["zero"]]
    target = -np.eye(x["k"]) / x["d"]
    left = np.einsum("rsru->su", B0) - target
    right = np.einsum("rsts->rt", B0) - target
    return left, right


def _unitarity(x, mats):
    k, n, d, zero = x["k"], x["n"], x["d"], x["zero"]
    delta = np.eye(k).reshape(k * k)
    target = np.repeat(np.eye(k * k, dtype=complex)[None] / n, n, axis=0)
    target[zero] -= np.outer(delta, delta) / d
    adjoint = mats.conj().transpose(0, 2, 1)
    return adjoint @ mats - target, mats @ adjoint - target


def _support(x):
    B, shift, add = x["B"], x["shift"], x["add"]
    sums = add[shift[:, None], shift[None, :]]
    mask = sums[:, :, None, None] != sums[None, None, :, :]
    return B[mask].reshape(-1)


def _conjugation_first(x):
    B, bar, neg = x["B"], x["bar"], x["neg"]
    sg, chi, avec = x["sg"], x["chi"], x["avec"]
    # Q[r,s,t,u,g] = B[t, s̄, r, ū, −g]
    Q = B[:, bar][:, :, :, bar][..., neg].transpose(2, 1, 0, 3, 4)
    coef = sg[None, :, None, None, None] * sg[None, None, None, :, None] \
        * (avec[None, :] * chi)[None, None, None, :, :]
    return np.conj(B) - coef * Q


def _conjugation_second(x):
    B, bar, neg = x["B"], x["bar"], x["neg"]
    sg, chi, avec, c = x["sg"], x["chi"], x["avec"], x["c"]
    # Q[r,s,t,u,g] = B[r̄, u, t̄, s, −g]
    Q = B[bar][:, :, bar][..., neg].transpose(0, 3, 2, 1, 4)
    coef = (sg * c)[:, None, None, None, None] * (sg * np.conj(c))[None, None, :, None, None] \
        * (avec[None, :] * chi)[:, None, None, None, :]
    return np.conj(B) - coef * Q


def _reflection(x):
    B, bar = x["B"], x["bar"]
    sg, chi, c = x["sg"], x["chi"], x["c"]
    # Q[r,s,t,u,g] = B[t̄, ū, r̄, s̄, g]
    Q = B[bar][:, bar][:, :, bar][:, :, :, bar].transpose(2, 3, 0, 1, 4)
    coef = (sg * np.conj(c))[:, None, None, None, None] * sg[None, :, None, None, None] \
        * (sg * c)[None, None, :, None, None] * sg[None, None, None, :, None] \
        * np.conj(chi[:, None, None, None, :] * chi[None, :, None, None, :])
    return B - coef * Q


def _cubic(x):
    B, bar, add, M = x["B"], x["bar"], x["add"], x["M"]
    sg, chi, c, k, n, d = x["sg"], x["chi"], x["c"], x["k"], x["n"], x["d"]
    shifted = B[..., add]  # shifted[r,s,t,u,g,h] = B[r,s,t,u,g+h]
    Y = shifted[bar][:, :, bar]  # Y[r,u,t,s,g,h] = B[r̄, u, t̄, s, g+h]
    weight = sg * np.conj(c)
    lhs = np.einsum("vwqsg,rutsgh,pxqtgk,t->ruvwpxhk", np.conj(B), Y, shifted, weight, optimize=True)
    lhs *= (c * sg)[:, None, None, None, None, None, None, None]

    Z = B[:, bar][:, :, :, bar]  # Z[x,w,y,u,h] = B[x, w̄, y, ū, h]
    S = np.einsum("pyvrk,xwyuh->ruvwpxhk", B, Z, optimize=True)
    pre = sg[None, :, None, None, None] * sg[None, None, :, None, None] \
        * chi[:, None, None, :, None] * np.conj(chi)[None, :, None, :, None] \
        * np.conj(M)[None, None, None, :, :]  # pre[r,u,w,h,k]
    rhs = pre[:, :, None, :, None, None, :, :] * S

    const = np.zeros((k, k, k, k, k, k), dtype=complex)
    for r, v, p in itertools.product(range(k), repeat=3):
        const[r, r, v, bar[v], p, bar[p]] = -c[r] * sg[bar[p]] * sg[v] / (d * np.sqrt(n))
    rhs = rhs + const[..., None, None]
    return lhs - rhs


def _exchange(x):
    B, c, k, add, shift = x["B"], x["c"], x["k"], x["add"], x["shift"]
    terms = []
    for r, s, t, u in itertools.product(range(k), repeat=4):
        # g + g_s − g_u
        offset = add[shift[s], x["neg"][shift[u]]]
        moved = B[s, r, u, t][add[:, offset]]
        coef = c[r] * c[u] * np.conj(c[s] * c[t])
        terms.append(B[r, s, t, u] - coef * moved)
    return np.concatenate(terms)


def _delta_eigen(x, mats):
    k, d, zero = x["k"], x["d"], x["zero"]
    delta = np.eye(k).reshape(k * k)
    B0 = mats[zero]
    return np.concatenate([B0 @ delta + delta / d, B0.conj().T @ delta + delta / d])


def _general_terms(s):
    """
    Residual arrays of every equation of the coefficient-tensor system, keyed by equation name
    """
    x = _general_context(s)
    mats = s.btensor.matrices()
    left_trace, right_trace = _traces(x)
    unitarity_left, unitarity_right = _unitarity(x, mats)
    return {
        "fourier_twist": _fourier_twist(x),
        "left_trace": left_trace,
        "right_trace": right_trace,
        "unitarity_left": unitarity_left,
        "unitarity_right": unitarity_right,
        "support": _support(x),
        "conjugation_first": _conjugation_first(x),
        "conjugation_second": _conjugation_second(x),
        "reflection": _reflection(x),
        "cubic": _cubic(x),
        "exchange": _exchange(x),
        "delta_eigen": _delta_eigen(x, mats),
    }


def general_equations(s):
    """
    All residual terms of residual_general flattened into one complex vector, for least-squares searches
    """
    return np.concatenate([np.asarray(v, dtype=complex).reshape(-1) for v in _general_terms(s).values()])


def residual_general(s, tol=DEFAULT_TOLERANCE):
    """
    Residuals of the coefficient-tensor system over all index and group combinations
    :param s: GeneralSolution
    :param tol: pass tolerance
    :return: ResidualReport
    """
    if s.B.shape != (s.k, s.k, s.k, s.k, s.n):
        raise InputError("Coefficient tensor does not match the index set")
    terms = [None]

    def part(name):
        if terms[0] is None:
            terms[0] = _general_terms(s)
        return _max_abs(terms[0][name])

    names = ("fourier_twist", "left_trace", "right_trace", "unitarity_left", "unitarity_right", "support",
             "conjugation_first", "conjugation_second", "reflection", "cubic", "exchange", "delta_eigen")
    residuals = {name: _safe(lambda name=name: part(name)) for name in names}
    residuals["gauss_sum"] = _safe(s.acj.gauss_residual)
    return ResidualReport(residuals, tol)


def lift_mn(s):
    """
    MNSolution as a GeneralSolution with a one-point index set
    """
    G = s.group
    acj = ACJData(s.bicharacter, s.form, (0,), (G.zero,), (s.c,), (1,), 1)
    B = s.b.reshape(1, 1, 1, 1, G.order)
    return GeneralSolution(acj, BTensor(B), s.d, dict(s.provenance))


def j_matrices(s):
    """
    Matrices of j₁ and j₂ on 𝒦 = ℓ²(G)⊗𝒦₀ (index (h, t) ↦ h·|Λ| + t), as anti-linear maps v ↦ U·conj(v)
    """
    if isinstance(s, MNSolution):
        s = lift_mn(s)
    acj = s.acj
    G = s.group
    n, k = G.order, acj.size
    avec = acj.form.vector
    chi, c, sg = acj.chi, acj.c_vector, acj.sign_vector
    M = acj.bicharacter.matrix
    neg = G.neg_index
    U1 = np.zeros((n * k, n * k), dtype=complex)
    U2 = np.zeros((n * k, n * k), dtype=complex)
    for h in range(n):
        for t in range(k):
            tb = acj.bar[t]
            U1[neg[h] * k + tb, h * k + t] = sg[t] * avec[h] * chi[t, h]
            for kk in range(n):
                U2[kk * k + tb, h * k + t] = acj.eps * sg[t] * np.conj(c[t]) * np.conj(M[h, kk]) / np.sqrt(n)
    return U1, U2


def nu31(s):
    """
    tr(j₁∘j₂), the third Frobenius–Schur indicator
    """
    U1, U2 = j_matrices(s)
    return complex(np.trace(U1 @ np.conj(U2)))


def in_gauge_group(v, acj, tol=1e-9):
    """
    v is unitary and commutes with every A(g), with C and with J
    """
    v = np.asarray(v, dtype=complex)
    k = acj.size
    if v.shape != (k, k):
        return False
    if _max_abs(v.conj().T @ v - np.eye(k)) > tol:
        return False
    for i in range(acj.group.order):
        D = np.diag(acj.chi[:, i])
        if _max_abs(v @ D - D @ v) > tol:
            return False
    C = np.diag(acj.c_vector)
    J = acj.j_matrix
    return _max_abs(v @ C - C @ v) < tol and _max_abs(v @ J - J @ np.conj(v)) < tol


def _gauge_transform(v, B):
    return np.einsum("ai,bj,ck,dl,ijklg->abcdg", v, v, np.conj(v), np.conj(v), B, optimize=True)


def gauge_act(v, s, tol=1e-9):
    """
    b′^{r′,s′}_{t′,u′}(g) = Σ v_{r′r}v_{s′s}conj(v_{t′t}v_{u′u})·b^{r,s}_{t,u}(g)
    :param v: unitary on 𝒦₀ in the gauge group
    :param s: GeneralSolution or MNSolution (gauge group {±1})
    """
    if isinstance(s, MNSolution):
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape != (1,) or abs(abs(v[0].real) - 1) > tol or abs(v[0].imag) > tol:
            raise VerificationError(f"Gauge element outside {{±1}}: {v}")
        return s
    if not in_gauge_group(v, s.acj, tol):
        raise VerificationError("Gauge element does not commute with A(g), C and J")
    return GeneralSolution(s.acj, BTensor(_gauge_transform(np.asarray(v, dtype=complex), s.B)), s.d,
                           dict(s.provenance))


def aut_act(theta, s):
    """
    Transport along θ ∈ Aut(G): b′(θg) = b(g), with ⟨·,·⟩, a and the characters moved along
    """
    perm = theta.perm
    if isinstance(s, MNSolution):
        b = np.empty_like(s.b)
        b[perm] = s.b
        return MNSolution(s.bicharacter.act(theta), s.form.act(theta), b, s.c, s.unitary, s.d, dict(s.provenance))
    B = np.empty_like(s.B)
    B[..., perm] = s.B
    return GeneralSolution(s.acj.act(theta), BTensor(B), s.d, dict(s.provenance))


def conjugate_solution(s):
    """
    Complex conjugate solution: every datum conjugated, characters kept
    """
    if isinstance(s, MNSolution):
        return MNSolution(s.bicharacter.conjugate(), s.form.conjugate(), np.conj(s.b), np.conj(s.c), s.unitary,
                          s.d, dict(s.provenance))
    return GeneralSolution(s.acj.conjugate(), BTensor(np.conj(s.B)), s.d, dict(s.provenance))


def gauge_lie_algebra(acj):
    """
    Real basis of the Lie algebra of 𝒢(A,C,J): skew-Hermitian X commuting with A(g), C and J
    :return: list of k×k complex matrices, orthonormal for the real Frobenius inner product
    """
    k = acj.size
    dim = 2 * k * k
    J = acj.j_matrix
    C = np.diag(acj.c_vector)
    diagonals = [np.diag(acj.chi[:, i]) for i in range(acj.group.order)]

    def constraints(X):
        parts = [X + X.conj().T, X @ C - C @ X, X @ J - J @ np.conj(X)]
        parts += [X @ D - D @ X for D in diagonals]
        flat = np.concatenate([p.reshape(-1) for p in parts])
        return np.concatenate([flat.real, flat.imag])

    columns = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        X = (e[:k * k] + 1j * e[k * k:]).reshape(k, k)
        columns.append(constraints(X))
    null = scipy.linalg.null_space(np.array(columns).T)
    return [(null[:k * k, j] + 1j * null[k * k:, j]).reshape(k, k) for j in range(null.shape[1])]


def intertwiners(acj1, acj2, tol=1e-9):
    """
    Signed permutation matrices W with W·A₁(g) = A₂(g)·W, W·C₁ = C₂·W and W·J₁ = J₂·conj(W)
    """
    k = acj1.size
    if acj2.size != k:
        return []
    perms = list(itertools.permutations(range(k))) if k <= 4 else [tuple(range(k))]
    signs = list(itertools.product((1, -1), repeat=k)) if k <= 4 else [(1,) * k, (-1,) * k]
    C1, C2 = np.diag(acj1.c_vector), np.diag(acj2.c_vector)
    J1, J2 = acj1.j_matrix, acj2.j_matrix
    found = []
    for perm in perms:
        for sign in signs:
            W = np.zeros((k, k), dtype=complex)
            for t in range(k):
                W[perm[t], t] = sign[t]
            if _max_abs(W @ C1 - C2 @ W) > tol or _max_abs(W @ J1 - J2 @ np.conj(W)) > tol:
                continue
            if any(_max_abs(W @ np.diag(acj1.chi[:, i]) - np.diag(acj2.chi[:, i]) @ W) > tol
                   for i in range(acj1.group.order)):
                continue
            found.append(W)
    return found


@dataclass
class EquivalenceResult:
    verdict: str
    distance: float
    theta: object = None
    gauge: np.ndarray = None

    def __bool__(self):
        return self.verdict == EQUAL

    def to_json(self):
        return {
            "verdict": self.verdict,
            "distance": self.distance if np.isfinite(self.distance) else "inf",
            "theta": self.theta.to_json() if self.theta is not None else None
        }


def _verdict(distance):
    if distance < EQUAL_THRESHOLD:
        return EQUAL
    if distance > UNEQUAL_THRESHOLD:
        return UNEQUAL
    return INCONCLUSIVE


def _gauge_search(B1, B2, algebra, base, grid_resolution, rng):
    """
    min over v = exp(X)·base of max |v·B1 − B2|, grid over exponential coordinates then least squares
    """
    def transform(coords):
        X = sum((x * Y for x, Y in zip(coords, algebra)), np.zeros_like(base))
        return scipy.linalg.expm(X) @ base

    def objective(coords):
        diff = (_gauge_transform(transform(coords), B1) - B2).reshape(-1)
        return np.concatenate([diff.real, diff.imag])

    p = len(algebra)
    if p == 0:
        return _max_abs(_gauge_transform(base, B1) - B2), base

    span = np.pi * np.sqrt(2)
    per_dim = max(4, int(round(grid_resolution ** (1.0 / p))))
    axis = np.linspace(-span, span, per_dim, endpoint=False)
    scored = []
    for coords in itertools.product(axis, repeat=p):
        scored.append((float(np.linalg.norm(objective(coords))), coords))
    scored.sort(key=lambda x: x[0])
    starts = [np.array(c) for _, c in scored[:3]] + [rng.uniform(-span, span, size=p)]

    best = (float("inf"), base)
    for start in starts:
        fit = scipy.optimize.least_squares(objective, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        v = transform(fit.x)
        dist = _max_abs(_gauge_transform(v, B1) - B2)
        if dist < best[0]:
            best = (dist, v)
    return best


def equivalent(s1, s2, grid_resolution=DEFAULT_GRID_RESOLUTION, seed=DEFAULT_SEED):
    """
    Searches (θ, v) ∈ Aut(G) × 𝒢(A,C,J) mapping s1 to s2
    :return: EquivalenceResult; truthy when the verdict is EQUAL
    """
    logger = LoggerManager.get_logger(__name__)

    if s1.group != s2.group or s1.m != s2.m or type(s1) is not type(s2):
        return EquivalenceResult(UNEQUAL, float("inf"))

    best = EquivalenceResult(UNEQUAL, float("inf"))
    rng = np.random.default_rng(seed)

    for theta in automorphisms(s1.group):
        moved = aut_act(theta, s1)
        if moved.bicharacter != s2.bicharacter or moved.form != s2.form:
            continue

        if isinstance(s1, MNSolution):
            if s1.unitary != s2.unitary or abs(moved.c - s2.c) > 1e-9:
                continue
            dist = _max_abs(moved.b - s2.b)
            if dist < best.distance:
                best = EquivalenceResult(_verdict(dist), dist, theta, np.ones((1, 1)))
            continue

        algebra = gauge_lie_algebra(s2.acj)
        for W in intertwiners(moved.acj, s2.acj):
            dist, v = _gauge_search(moved.B, s2.B, algebra, W, grid_resolution, rng)
            logger.debug(f"equivalence {s1.label()}: theta={theta.images}, distance={dist:.3e}")
            if dist < best.distance:
                best = EquivalenceResult(_verdict(dist), dist, theta, v)

        if best.verdict == EQUAL:
            break

    return best


def delta_values(s):
    """
    δ*ℬ(g)δ for every g; equals b(g) when m = n and is unchanged by the gauge action
    """
    if isinstance(s, MNSolution):
        return s.b.copy()
    return np.einsum("rsrsg->g", s.B)


def _round(x, digits):
    return round(float(x), digits) + 0.0


def fingerprint(s, digits=7):
    """
    (group, m, sorted |δ*ℬ(g)δ| multiset, sorted c orbit, ν₃₁, d), all rounded;
    invariant under Aut(G) and the gauge group
    """
    values = tuple(sorted(_round(abs(z), digits) for z in delta_values(s)))
    cs = [s.c] if isinstance(s, MNSolution) else list(s.acj.c)
    orbit = tuple(sorted((_round(z.real, digits), _round(z.imag, digits)) for z in cs))
    nu = nu31(s)
    return (s.group.label(), s.m, values, orbit, (_round(nu.real, digits), _round(nu.imag, digits)),
            _round(s.d_value, digits))
