"""
Admissible tuples (𝒦, j₁, j₂, V, U_𝒦, χ, l) and their verification.

𝒦 has the orthonormal basis {T_x}; l(T_y) = Σ L[x1, x2, x3, y]·T_x1·T_x2·T_x3*.
"""
from commons.constants import DEFAULT_TOLERANCE, PRUNE_THRESHOLD
from commons.funcs_common import InputError, complex_to_pair
from commons.funcs_neargroup import QuadIrrational, ResidualReport, MNSolution, lift_mn, j_matrices, _safe, _max_abs
from commons.funcs_spectral import AntiUnitary, matrix_to_json
from commons.mgr_logger import LoggerManager

from dataclasses import dataclass, field

import itertools
import numpy as np

EXTRASPECIAL_KINDS = ("D", "Q")


@dataclass(frozen=True, eq=False)
class AdmissibleTuple:
    """
    :param V: representation α_g|𝒦, shape (n, m, m)
    :param UK: representation U_𝒦, shape (n, m, m)
    :param chi: chi[h, g] = χ_h(g)
    :param mul: mul[g, h] = index of g·h, identity at index 0
    :param L: tensor of l, shape (m, m, m, m)
    """
    m: int
    n: int
    d: QuadIrrational
    eps: int
    V: np.ndarray
    UK: np.ndarray
    chi: np.ndarray
    mul: np.ndarray
    J1: AntiUnitary
    J2: AntiUnitary
    L: np.ndarray
    labels: tuple = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        m, n = self.m, self.n
        for name, shape in (("V", (n, m, m)), ("UK", (n, m, m)), ("chi", (n, n)), ("mul", (n, n)),
                            ("L", (m, m, m, m))):
            if np.shape(getattr(self, name)) != shape:
                raise InputError(f"Tuple component {name} must have shape {shape}, got {np.shape(getattr(self, name))}")
        if self.J1.dim != m or self.J2.dim != m:
            raise InputError("Anti-unitaries do not act on 𝒦")

    @property
    def d_value(self):
        return float(self.d)

    @property
    def W(self):
        """
        j₂∘j₁⁻¹, a linear unitary
        """
        return self.J2.matrix @ self.J1.matrix.conj().T

    def to_json(self, threshold=PRUNE_THRESHOLD):
        """
        Matrices as [re, im] pair grids; l as the sparse list [[x1, x2, x3, y], [re, im]]
        """
        entries = [[[int(i) for i in key], complex_to_pair(self.L[key])]
                   for key in zip(*np.nonzero(np.abs(self.L) > threshold))]
        return {
            "m": self.m,
            "n": self.n,
            "d": self.d.to_json(),
            "d_value": self.d_value,
            "eps": self.eps,
            "labels": list(self.labels),
            "V": [matrix_to_json(X) for X in self.V],
            "UK": [matrix_to_json(X) for X in self.UK],
            "chi": matrix_to_json(self.chi),
            "mul": self.mul.tolist(),
            "j1": matrix_to_json(self.J1.matrix),
            "j2": matrix_to_json(self.J2.matrix),
            "l": entries,
            "provenance": self.provenance
        }


def to_tuple(s):
    """
    Admissible tuple of a solution on 𝒦 = ℓ²(G)⊗𝒦₀, with T_h(e_t) at index h·|Λ| + t
    """
    if isinstance(s, MNSolution):
        s = lift_mn(s)
    acj = s.acj
    G = s.group
    n, k = G.order, acj.size
    N = n * k
    M = acj.bicharacter.matrix
    avec = acj.form.vector
    chi_t = acj.chi
    add = G.add_table
    neg = G.neg_index
    B = s.B

    V = np.zeros((n, N, N), dtype=complex)
    UK = np.zeros((n, N, N), dtype=complex)
    eye = np.eye(k)
    for g in range(n):
        V[g] = np.kron(np.diag(M[g]), eye)
        shift = np.zeros((n, n))
        for h in range(n):
            shift[add[h, neg[g]], h] = 1
        UK[g] = np.kron(shift, eye)

    L = np.zeros((N, N, N, N), dtype=complex)
    for g, h, kk in itertools.product(range(n), repeat=3):
        block = M[g, kk] * avec[h] * chi_t[:, h][:, None, None, None] * B[..., add[g, h]]
        x1, x2 = add[h, kk], neg[h]
        L[x1 * k:(x1 + 1) * k, x2 * k:(x2 + 1) * k, kk * k:(kk + 1) * k, g * k:(g + 1) * k] = block

    U1, U2 = j_matrices(s)
    labels = tuple(str(g) for g in G.elements())
    return AdmissibleTuple(N, n, s.d, acj.eps, V, UK, M.copy(), add.copy(), AntiUnitary(U1), AntiUnitary(U2), L,
                           labels, {"source": s.label()})


def _pauli():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    return X, Z


def _matrix_key(X):
    return tuple(np.round(X.reshape(-1), 6).view(float).round(6) + 0.0)


def matrix_group(generators, max_order=4096):
    """
    Closure of a set of unitary matrices under multiplication
    :return: (elements with the identity first, multiplication table)
    """
    dim = generators[0].shape[0]
    identity = np.eye(dim, dtype=complex)
    elements = [identity]
    index = {_matrix_key(identity): 0}
    frontier = [identity]
    while frontier:
        nxt = []
        for X in frontier:
            for Y in generators:
                Z = X @ Y
                key = _matrix_key(Z)
                if key not in index:
                    index[key] = len(elements)
                    elements.append(Z)
                    nxt.append(Z)
                    if len(elements) > max_order:
                        raise InputError(f"Matrix group exceeds {max_order} elements")
        frontier = nxt
    size = len(elements)
    mul = np.zeros((size, size), dtype=int)
    for i, j in itertools.product(range(size), repeat=2):
        mul[i, j] = index[_matrix_key(elements[i] @ elements[j])]
    return elements, mul


def build_extraspecial_tuple(k, kind="D", zeta=1):
    """
    Tuple (𝒦_π, π, π, j, εζj, χ, 0) of the extra-special 2-group of order 2^{2k+1} on its
    irreducible representation π of dimension 2^k
    :param k: number of tensor factors
    :param kind: "D" for the central product of dihedral groups, "Q" with one quaternion factor
    :param zeta: cube root of unity
    """
    logger = LoggerManager.get_logger(__name__)

    if k < 1:
        raise InputError(f"Number of tensor factors must be positive: {k}")
    if kind not in EXTRASPECIAL_KINDS:
        raise InputError(f"Unknown extra-special kind: {kind}")
    zeta = complex(zeta)
    if abs(zeta ** 3 - 1) > 1e-9:
        raise InputError(f"zeta must be a cube root of unity: {zeta}")

    X, Z = _pauli()
    I2 = np.eye(2, dtype=complex)
    factors = []
    for i in range(k):
        if kind == "Q" and i == 0:
            factors.append((1j * X, 1j * Z))
        else:
            factors.append((X, Z))

    generators = []
    for i, pair in enumerate(factors):
        for P in pair:
            mats = [I2] * k
            mats[i] = P
            out = mats[0]
            for A in mats[1:]:
                out = np.kron(out, A)
            generators.append(out)

    elements, mul = matrix_group(generators)
    n, m = len(elements), 2 ** k
    if n != 2 ** (2 * k + 1):
        raise InputError(f"Generated group has order {n}, expected {2 ** (2 * k + 1)}")
    logger.debug(f"extra-special group kind={kind} k={k}: order {n}")

    pi = np.array(elements)
    chi = np.zeros((n, n), dtype=complex)
    for h, g in itertools.product(range(n), repeat=2):
        # π(g)π(h) = χ_h(g)π(h)π(g)
        lhs = pi[g] @ pi[h]
        rhs = pi[h] @ pi[g]
        chi[h, g] = np.trace(rhs.conj().T @ lhs) / m

    if kind == "Q":
        eps = -1
        Y = np.array([[0, 1], [-1, 0]], dtype=complex)
        U = np.kron(Y, np.eye(m // 2)) if k > 1 else Y
    else:
        eps = 1
        U = np.eye(m, dtype=complex)

    J1 = AntiUnitary(U)
    J2 = AntiUnitary(eps * zeta * U)
    L = np.zeros((m, m, m, m), dtype=complex)
    labels = tuple(f"g{i}" for i in range(n))
    return AdmissibleTuple(m, n, QuadIrrational(2 ** (k + 1)), eps, pi.copy(), pi.copy(), chi, mul, J1, J2, L, labels,
                           {"construction": "extraspecial", "kind": kind, "k": k})


def build_z2_m1_tuple(zeta=1):
    """
    ℤ₂ with m = 1: V = U_𝒦 the sign representation, trivial χ, j₁ = conjugation, j₂ = ζ·j₁, l = 0
    """
    zeta = complex(zeta)
    if abs(zeta ** 3 - 1) > 1e-9:
        raise InputError(f"zeta must be a cube root of unity: {zeta}")
    V = np.array([[[1]], [[-1]]], dtype=complex)
    chi = np.ones((2, 2), dtype=complex)
    mul = np.array([[0, 1], [1, 0]], dtype=int)
    L = np.zeros((1, 1, 1, 1), dtype=complex)
    return AdmissibleTuple(1, 2, QuadIrrational(2), 1, V, V.copy(), chi, mul, AntiUnitary(np.eye(1)),
                           AntiUnitary(zeta * np.eye(1)), L, ("0", "1"), {"construction": "z2_m1"})


def _representation(T):
    n, m, d = T.n, T.m, T.d_value
    worst = 0.0
    for g, h in itertools.product(range(n), repeat=2):
        gh = T.mul[g, h]
        worst = max(worst, _max_abs(T.V[g] @ T.V[h] - T.V[gh]), _max_abs(T.UK[g] @ T.UK[h] - T.UK[gh]))
    worst = max(worst, _max_abs(T.V[0] - np.eye(m)), _max_abs(T.UK[0] - np.eye(m)))
    # δ_{g,e} = (1/d²)Σ_h χ_h(g) + (1/d)·tr U_𝒦(g), and tr V = tr U_𝒦
    traces_v = np.einsum("gii->g", T.V)
    traces_u = np.einsum("gii->g", T.UK)
    identity = np.zeros(n)
    identity[0] = 1.0
    character = T.chi.sum(axis=0) / d ** 2 + traces_u / d - identity
    return max(worst, _max_abs(character), _max_abs(traces_v - traces_u))


def _symmetric(T):
    worst = _max_abs(T.chi - T.chi.T)
    for g, h in itertools.product(range(T.n), repeat=2):
        worst = max(worst, _max_abs(T.chi[:, T.mul[g, h]] - T.chi[:, g] * T.chi[:, h]))
    return worst


def _weyl(T):
    worst = 0.0
    for g, h in itertools.product(range(T.n), repeat=2):
        worst = max(worst, _max_abs(T.UK[g] @ T.V[h] - T.chi[h, g] * T.V[h] @ T.UK[g]))
    return worst


def _invariance(T):
    V, L = T.V, T.L
    return max(_max_abs(np.einsum("ax,by,xyzk,cz->abck", V[g], V[g], L, np.conj(V[g]), optimize=True) - L)
               for g in range(T.n))


def _equivariance(T):
    V, UK, L = T.V, T.UK, T.L
    return max(_max_abs(np.einsum("abcy,yk->abck", L, V[g])
                        - np.einsum("ax,xbzk,cz->abck", UK[g], L, np.conj(UK[g]), optimize=True))
               for g in range(T.n))


def _orthogonality_first(T):
    U1, U2, L = T.J1.matrix, T.J2.matrix, T.L
    A = np.einsum("gab,by->ay", T.V, U2)
    term = T.eps / T.d_value * np.conj(A) + np.einsum("bi,ibxy->xy", np.conj(U1), L)
    return _max_abs(term)


def _orthogonality_second(T):
    m = T.m
    P = np.einsum("hab,by->hay", T.V, T.J2.matrix)
    first = np.einsum("hcq,hey->ceqy", P, np.conj(P)) / T.d_value
    second = np.einsum("abcq,abey->ceqy", np.conj(T.L), T.L, optimize=True)
    target = np.einsum("ce,qy->ceqy", np.eye(m), np.eye(m))
    return _max_abs(first + second - target)


def _frobenius(T):
    U1, U2, L = T.J1.matrix, T.J2.matrix, T.L
    first = _max_abs(np.einsum("cxiq,qy->cxiy", L, U1) - np.einsum("ijcy,xj->cxiy", np.conj(L), U1))
    second = _max_abs(np.einsum("icbq,qy->icby", L, U2) - np.einsum("abcy,ai->icby", np.conj(L), U1))
    return first, second


def _rho_u(T):
    U1, L, d, m = T.J1.matrix, T.L, T.d_value, T.m
    W = T.W
    Y = np.einsum("hpi,qi->hpq", T.UK, U1)
    # contraction over (c, y) as an m² × m² matrix product
    flat = L.reshape(m * m, m * m)
    worst = 0.0
    for g in range(T.n):
        A = W @ T.UK[g] @ W.conj().T
        lhs = np.einsum("aA,bB->abAB", A, T.UK[g])
        weights = T.chi[:, g]
        rhs = np.einsum("h,hab,hAB->abAB", weights, Y, np.conj(Y)) / d
        moved = np.einsum("abcx,xy->abcy", L, T.UK[g]).reshape(m * m, m * m)
        rhs = rhs + (moved @ flat.conj().T).reshape(m, m, m, m)
        worst = max(worst, _max_abs(lhs - rhs))
        for h in range(T.n):
            worst = max(worst, _max_abs(T.V[h] @ A @ T.V[h].conj().T - T.chi[h, g] * A))
    return worst


def _s_rho2_s(T):
    U2, L, d, n, m = T.J2.matrix, T.L, T.d_value, T.n, T.m
    result = np.einsum("ibjy,ai,akgb,gj->ky", L, np.conj(U2), L, U2, optimize=True) / d
    return _max_abs(result - (1 - 2 * n / d ** 2) * np.eye(m))


def _l_contraction(T):
    U1, U2, L, d, m = T.J1.matrix, T.J2.matrix, T.L, T.d_value, T.m
    X = np.einsum("aicy,az->yzic", np.conj(L), U2, optimize=True)
    J2X = np.einsum("rc,yzic->yzir", U2, np.conj(X), optimize=True)
    lhs = np.einsum("wqri,yzir->yzwq", L, J2X, optimize=True)
    P = np.einsum("xy,hxz->hyz", np.conj(U1), T.UK)
    Q = np.einsum("qs,hsw->hqw", U1, np.conj(T.UK))
    rhs = T.eps * np.einsum("zw,yq->yzwq", np.eye(m), np.eye(m)) - np.einsum("hyz,hqw->yzwq", P, Q) / d
    return _max_abs(lhs - rhs)


def _l_intertwining(T):
    W, L = T.W, T.L
    lhs = np.einsum("abcz,aq,by->czqy", np.conj(L), W, W, optimize=True)
    rhs = np.einsum("cb,zbqy->czqy", W, L, optimize=True)
    return _max_abs(lhs - rhs)


def _l_composition(T):
    """
    l(T″)*T′l(T) against Σ_i l(T″*l(T)T_i)l(T_i)*T′ plus the S-sector term, over all basis triples
    """
    U1, L, d, m = T.J1.matrix, T.L, T.d_value, T.m
    VW = np.einsum("hab,bc->hac", T.V, T.W)
    Y = np.einsum("hpi,qi->hpq", T.UK, U1)
    worst = 0.0
    for y in range(m):
        # indices: w = T′, z = T″, output slots T_p T_q T_r*
        lhs = np.einsum("wbpz,bqr->wzpqr", np.conj(L), L[..., y], optimize=True)
        first = np.einsum("zqi,abcq,wrci->wzabr", L[..., y], L, np.conj(L), optimize=True)
        second = np.einsum("hz,hpq,hwr->wzpqr", VW[:, :, y], Y, np.conj(Y), optimize=True) / d
        worst = max(worst, _max_abs(lhs - first - second))
    return worst


def verify_admissible(T, tol=DEFAULT_TOLERANCE):
    """
    Residuals of every defining equation of an admissible tuple, each evaluated on basis vectors
    :param T: AdmissibleTuple
    :return: ResidualReport
    """
    U1, U2, eps, m, n, d = T.J1.matrix, T.J2.matrix, T.eps, T.m, T.n, T.d_value
    identity = np.eye(m)
    frobenius = [None]

    def frobenius_part(i):
        if frobenius[0] is None:
            frobenius[0] = _frobenius(T)
        return frobenius[0][i]

    residuals = {
        "involution": _safe(lambda: max(_max_abs(U1 @ np.conj(U1) - eps * identity),
                                        _max_abs(U2 @ np.conj(U2) - eps * identity))),
        "j1_intertwining": _safe(lambda: max(_max_abs(T.V[g] @ U1 - U1 @ np.conj(T.V[g])) for g in range(n))),
        "j2_intertwining": _safe(lambda: max(_max_abs(T.UK[g] @ U2 - U2 @ np.conj(T.V[g])) for g in range(n))),
        "period_three": _safe(lambda: _max_abs(np.linalg.matrix_power(U2 @ np.conj(U1), 3) - identity)),
        "representation": _safe(lambda: _representation(T)),
        "weyl": _safe(lambda: _weyl(T)),
        "symmetric": _safe(lambda: _symmetric(T)),
        "invariance": _safe(lambda: _invariance(T)),
        "orthogonality_first": _safe(lambda: _orthogonality_first(T)),
        "orthogonality_second": _safe(lambda: _orthogonality_second(T)),
        "frobenius_j1": _safe(lambda: frobenius_part(0)),
        "frobenius_j2": _safe(lambda: frobenius_part(1)),
        "equivariance": _safe(lambda: _equivariance(T)),
        "rho_u": _safe(lambda: _rho_u(T)),
        "s_rho2_s": _safe(lambda: _s_rho2_s(T)),
        "l_contraction": _safe(lambda: _l_contraction(T)),
        "l_intertwining": _safe(lambda: _l_intertwining(T)),
        "l_composition": _safe(lambda: _l_composition(T)),
        "dimension": _safe(lambda: abs(d * d - n - m * d)),
    }
    return ResidualReport(residuals, tol)
