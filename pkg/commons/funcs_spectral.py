"""
Linear and anti-linear operators on ℓ²(G) and on small complex spaces
"""
from commons.constants import RANK_TOLERANCE
from commons.funcs_common import InputError

from dataclasses import dataclass

import numpy as np
import scipy.linalg

ZETA3 = np.exp(2j * np.pi / 3)
CUBE_ROOTS = (1 + 0j, ZETA3, ZETA3 ** 2)


@dataclass(frozen=True, eq=False)
class AntiUnitary:
    """
    v ↦ U·conj(v)
    """
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __call__(self, v):
        return self.matrix @ np.conj(v)

    def is_unitary(self, tol=RANK_TOLERANCE):
        U = self.matrix
        return np.linalg.norm(U.conj().T @ U - np.eye(self.dim)) < tol

    def compose(self, other):
        """
        self ∘ other for another anti-unitary: the linear map U₁·conj(U₂)
        """
        return self.matrix @ np.conj(other.matrix)

    def after_linear(self, X):
        """
        self ∘ X for a linear X: again anti-linear, with matrix U·conj(X)
        """
        return AntiUnitary(self.matrix @ np.conj(X))

    def before_linear(self, X):
        """
        X ∘ self for a linear X
        """
        return AntiUnitary(X @ self.matrix)

    def square(self):
        return self.compose(self)

    def inverse(self):
        return AntiUnitary(self.matrix.T)

    def scale(self, z):
        return AntiUnitary(z * self.matrix)

    def conjugate_linear(self, X):
        """
        J X J⁻¹ for a linear X
        """
        return self.matrix @ np.conj(X) @ self.matrix.conj().T

    def residual(self, other):
        return float(np.max(np.abs(self.matrix - other.matrix))) if self.dim else 0.0


@dataclass(frozen=True, eq=False)
class RotationOperator:
    """
    R[g,h] = conj(c·a(g))·⟨g,h⟩/√n
    """
    matrix: np.ndarray
    bicharacter: object
    form: object
    c: complex

    @property
    def dim(self):
        return self.matrix.shape[0]

    def cube_residual(self):
        return float(np.max(np.abs(np.linalg.matrix_power(self.matrix, 3) - np.eye(self.dim))))

    def __call__(self, f):
        return self.matrix @ np.asarray(f, dtype=complex)


def cube_root_choices(a):
    """
    The three c ∈ 𝕋 with c³â(0) = 1
    """
    gauss = a.gauss_sum()
    base = np.exp(-1j * np.angle(gauss) / 3)
    return [complex(base * w) for w in CUBE_ROOTS]


def rotation(b, a, c):
    """
    Period-3 rotation on ℓ²(G)
    :param b: Bicharacter
    :param a: QuadraticForm for b
    :param c: unimodular scalar, c³â(0)=1 gives R³=I
    :return: RotationOperator
    """
    c = complex(c)
    if abs(abs(c) - 1) > 1e-12:
        raise InputError(f"Scalar c must be unimodular: |c| = {abs(c)}")
    n = b.group.order
    R = np.conj(c * a.vector)[:, None] * b.matrix / np.sqrt(n)
    return RotationOperator(R, b, a, c)


def rotation_from_cprime(b, a, c_prime):
    """
    𝓡_{c′}f(g) = c′a(g)⁻¹Σ_h⟨g,h⟩f(h), i.e. rotation with c = conj(c′)·√n
    """
    n = b.group.order
    return rotation(b, a, np.conj(complex(c_prime)) * np.sqrt(n))


def conjugation(a):
    """
    𝓙f(g) = conj(a(g)·f(−g))
    """
    G = a.group
    n = G.order
    U = np.zeros((n, n), dtype=complex)
    neg = G.neg_index
    avec = a.vector
    for i in range(n):
        U[i, neg[i]] = np.conj(avec[i])
    return AntiUnitary(U)


def eigenprojection(R, eigenvalue):
    """
    (I + ω̄R + ω̄²R²)/3, the projection onto ker(R − ω) when R³ = I
    """
    M = R.matrix if isinstance(R, RotationOperator) else np.asarray(R)
    w = np.conj(complex(eigenvalue))
    identity = np.eye(M.shape[0], dtype=complex)
    return (identity + w * M + w * w * (M @ M)) / 3


def eigenspace_basis(R, eigenvalue, tol=RANK_TOLERANCE):
    """
    orthonormal complex basis (columns) of ker(R − ω)
    """
    P = eigenprojection(R, eigenvalue)
    if np.linalg.norm(P) < tol:
        return np.zeros((P.shape[0], 0), dtype=complex)
    return scipy.linalg.orth(P, rcond=tol)


def eigenspace_dims(R, tol=RANK_TOLERANCE):
    return [eigenspace_basis(R, w, tol).shape[1] for w in CUBE_ROOTS]


def _real_stack(vectors):
    return np.vstack([vectors.real, vectors.imag])


def fixed_real_eigenbasis(R, J, eigenvalue, tol=RANK_TOLERANCE):
    """
    Real-linear orthonormal basis of {f : Rf = ωf, Jf = f}
    :param R: RotationOperator
    :param J: AntiUnitary normalizing the eigenspace
    :param eigenvalue: cube root of unity
    :return: complex array with one basis vector per column (zero columns when the eigenspace is trivial)
    """
    if min(abs(complex(eigenvalue) - w) for w in CUBE_ROOTS) > 1e-9:
        raise InputError(f"Eigenvalue must be a cube root of unity: {eigenvalue}")
    B = eigenspace_basis(R, eigenvalue, tol)
    n, k = B.shape
    if k == 0:
        return B
    JB = J.matrix @ np.conj(B)
    P = eigenprojection(R, eigenvalue)
    if np.linalg.norm(JB - P @ JB) > 1e-8:
        raise InputError("Anti-unitary does not normalize the eigenspace")

    candidates = np.hstack([B, 1j * B])
    symmetrized = (candidates + J.matrix @ np.conj(candidates)) / 2
    stacked = _real_stack(symmetrized)
    Q = scipy.linalg.orth(stacked, rcond=tol)
    basis = Q[:n] + 1j * Q[n:]
    return basis


def real_span_residual(basis, f):
    """
    distance from f to the real span of the basis columns
    """
    if basis.shape[1] == 0:
        return float(np.linalg.norm(f))
    A = _real_stack(basis)
    y = _real_stack(np.asarray(f, dtype=complex)[:, None])[:, 0]
    coeffs, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(np.linalg.norm(A @ coeffs - y))


def heisenberg_representation(b, a, c):
    """
    Operators of the irreducible representation of the Heisenberg-type group on ℓ²(G):
    v0(g)f(h) = ⟨g,h⟩f(h), v1(g)f(h) = f(h+g), v2(g)f(h) = a(h)conj(a(h−g))f(h−g),
    wf(h) = (c/√n)Σ_k a(h)conj(⟨h,k⟩)f(k)
    :return: dict with lists "v0", "v1", "v2" (indexed like G.elements()) and matrix "w"
    """
    G = b.group
    n = G.order
    M = b.matrix
    avec = a.vector
    add = G.add_table
    neg = G.neg_index
    v0, v1, v2 = [], [], []
    for gi in range(n):
        v0.append(np.diag(M[gi]))
        shift = np.zeros((n, n), dtype=complex)
        twist = np.zeros((n, n), dtype=complex)
        for hi in range(n):
            shift[hi, add[hi, gi]] = 1
            src = add[hi, neg[gi]]
            twist[hi, src] = avec[hi] * np.conj(avec[src])
        v1.append(shift)
        v2.append(twist)
    w = complex(c) * avec[:, None] * np.conj(M) / np.sqrt(n)
    return {"v0": v0, "v1": v1, "v2": v2, "w": w}


def check_heisenberg_relations(b, a, c):
    """
    :return: dict of maximum residuals of the commutation, rotation and period relations
    """
    rep = heisenberg_representation(b, a, c)
    G = b.group
    n = G.order
    M = b.matrix
    w = rep["w"]
    vs = [rep["v0"], rep["v1"], rep["v2"]]
    commute = 0.0
    rotate = 0.0
    for i in range(3):
        nxt = vs[(i + 1) % 3]
        for gi in range(n):
            rotate = max(rotate, np.max(np.abs(w.conj().T @ vs[i][gi] @ w - nxt[gi])))
            for hi in range(n):
                lhs = nxt[gi] @ vs[i][hi]
                rhs = M[hi, gi] * vs[i][hi] @ nxt[gi]
                commute = max(commute, np.max(np.abs(lhs - rhs)))
    period = float(np.max(np.abs(w @ w @ w - np.eye(n))))
    normalisation = abs(complex(c) ** 3 * a.vector.sum() - np.sqrt(n))
    return {"commutation": float(commute), "rotation": float(rotate), "period3": period,
            "normalisation": float(normalisation)}


def matrix_to_json(X):
    X = np.asarray(X, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in X]


def matrix_from_json(data):
    return np.array([[complex(p[0], p[1]) for p in row] for row in data], dtype=complex)
