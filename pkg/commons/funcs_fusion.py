"""
Fusion-ring layer: near-group rings K(G, m), the dimension diagnosis, 2^G_l 1 principal graphs, outer
automorphism groups of a solution and the fusion rules produced by de-equivariantization and
equivariantization.

Simple objects carry structured labels (kind, group element, representation name) so that coset and
orbit computations act on them directly. Structure constants are stored as N[x, y, z] = N_{xy}^z with
the unit at index 0.
"""
from commons.constants import DEFAULT_TOLERANCE, DEFAULT_GRID_RESOLUTION, DEFAULT_SEED, EQUAL, INCONCLUSIVE, \
    DIM_IRRATIONAL, DIM_RATIONAL, DIM_INCONSISTENT, ALPHA, RHO, SIGMA, PI, GAMMA_ALPHA, GAMMA_RHO, \
    DIMENSION_TOLERANCE, OUT_REFINE_STARTS
from commons.funcs_abelian import FiniteAbelianGroup, GroupAutomorphism, Subgroup, automorphisms, \
    orthogonal_and_lagrangian
from commons.funcs_common import InputError, VerificationError
from commons.funcs_neargroup import QuadIrrational, ResidualReport, MNSolution, aut_act, \
    gauge_lie_algebra, intertwiners, _gauge_transform, _max_abs, _verdict
from commons.funcs_spectral import matrix_to_json
from commons.mgr_logger import LoggerManager

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from math import isqrt
from sympy.utilities.iterables import partitions

import itertools
import numpy as np
import scipy.linalg
import scipy.optimize
import sympy
import yaml


@dataclass(frozen=True)
class DimensionDiagnosis:
    kind: str
    n: int
    m: int
    d: QuadIrrational
    s: int = None
    t: int = None
    message: str = ""

    @property
    def consistent(self):
        return self.kind != DIM_INCONSISTENT

    def to_json(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "m": self.m,
            "d": str(self.d),
            "d_value": float(self.d),
            "s": self.s,
            "t": self.t,
            "message": self.message
        }


def dimension_diagnosis(n, m):
    """
    Classifies d = (m + √(m² + 4n))/2. An irrational d is the regime the solvers work in; a rational d
    forces n = st², m = (s − 1)t and d = st with natural s, t
    :param n: group order
    :param m: multiplicity of ρ in ρ²
    :return: DimensionDiagnosis
    """
    n, m = int(n), int(m)
    if n < 1 or m < 0:
        raise InputError(f"Dimension diagnosis needs n ≥ 1 and m ≥ 0, got n={n}, m={m}")

    d = QuadIrrational.from_nm(n, m)
    disc = m * m + 4 * n
    root = isqrt(disc)
    if root * root != disc:
        return DimensionDiagnosis(DIM_IRRATIONAL, n, m, d, message=f"d = {d} is irrational")

    # root ≡ m (mod 2), so d is an integer and d(d − m) = n
    dv = (m + root) // 2
    t = dv - m
    if dv % t != 0:
        return DimensionDiagnosis(DIM_INCONSISTENT, n, m, d,
                                  message=f"d = {dv} is rational but n = {n} has no factorization n = st² "
                                          f"with m = (s−1)t; no C*-near-group category has this fusion ring")
    s = dv // t
    return DimensionDiagnosis(DIM_RATIONAL, n, m, d, s, t, message=f"d = {dv} = st with s={s}, t={t}")


@dataclass(frozen=True)
class SimpleObject:
    """
    kind is one of alpha (invertible α̃_g), sigma (α̃_gσ), pi (π_g), gamma_alpha (γ̂α̃_g), rho, gamma_rho;
    rep names the representation of Γ in equivariantized rings
    """
    kind: str
    element: tuple = ()
    rep: str = ""

    def label(self):
        g = "(" + ",".join(str(x) for x in self.element) + ")" if self.element else ""
        base = {
            ALPHA: f"α{g}" if g else "1",
            SIGMA: f"σ{g}",
            PI: f"π{g}",
            GAMMA_ALPHA: f"γ̂α{g}",
            RHO: "ρ",
            GAMMA_RHO: "γ̂ρ"
        }[self.kind]
        return f"{self.rep}⊗{base}" if self.rep else base

    def __str__(self):
        return self.label()

    def to_json(self):
        return {"kind": self.kind, "element": list(self.element), "rep": self.rep}


def _label_json(x):
    if isinstance(x, SimpleObject):
        return x.to_json()
    return {"name": str(x)}


@dataclass(frozen=True, eq=False)
class FusionRing:
    """
    Based ring with basis labels, labels[0] the unit, and N[x, y, z] = N_{xy}^z
    """
    name: str
    labels: tuple
    N: np.ndarray
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = tuple(self.labels)
        N = np.asarray(self.N, dtype=np.int64)
        k = len(labels)
        if k == 0 or N.shape != (k, k, k):
            raise InputError(f"{self.name}: structure constants must have shape ({k}, {k}, {k}), got {N.shape}")
        if len(set(labels)) != k:
            raise InputError(f"{self.name}: basis labels are not distinct")
        if (N < 0).any():
            raise InputError(f"{self.name}: structure constants must be non-negative")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "N", N)

    @classmethod
    def from_rule(cls, name, labels, rule, notes=None):
        """
        :param rule: rule(x, y) -> {z: N_{xy}^z}
        """
        labels = tuple(labels)
        index = {x: i for i, x in enumerate(labels)}
        k = len(labels)
        N = np.zeros((k, k, k), dtype=np.int64)
        for i, x in enumerate(labels):
            for j, y in enumerate(labels):
                for z, mult in rule(x, y).items():
                    if z not in index:
                        raise VerificationError(f"{name}: product {x}·{y} leaves the basis at {z}")
                    N[i, j, index[z]] += mult
        return cls(name, labels, N, dict(notes or {}))

    @property
    def size(self):
        return len(self.labels)

    @cached_property
    def _index(self):
        return {x: i for i, x in enumerate(self.labels)}

    def index(self, x):
        try:
            return self._index[x]
        except KeyError:
            raise InputError(f"{self.name}: unknown basis element {x}")

    def product(self, x, y):
        i, j = self.index(x), self.index(y)
        return {self.labels[z]: int(self.N[i, j, z]) for z in np.nonzero(self.N[i, j])[0]}

    def format_product(self, x, y):
        terms = [str(z) if mult == 1 else f"{mult}{z}" for z, mult in self.product(x, y).items()]
        return " ⊕ ".join(terms) if terms else "0"

    def unit_defect(self):
        eye = np.eye(self.size, dtype=np.int64)
        return int(np.abs(self.N[0] - eye).sum() + np.abs(self.N[:, 0, :] - eye).sum())

    def associativity_defect(self):
        """
        max |Σ_w N_{xy}^w N_{wz}^u − Σ_w N_{yz}^w N_{xw}^u| over all x, y, z, u
        """
        left = np.einsum("xyw,wzu->xyzu", self.N, self.N)
        right = np.einsum("yzw,xwu->xyzu", self.N, self.N)
        return int(np.abs(left - right).max())

    @cached_property
    def duals(self):
        """
        duals[x] = index of x̄ with N_{x x̄}^1 = N_{x̄ x}^1 = 1, or -1 when there is none
        """
        out = []
        for i in range(self.size):
            hits = np.nonzero(self.N[i, :, 0])[0]
            ok = len(hits) == 1 and self.N[i, hits[0], 0] == 1 and self.N[hits[0], i, 0] == 1
            out.append(int(hits[0]) if ok else -1)
        return tuple(out)

    @cached_property
    def dimensions(self):
        """
        Perron–Frobenius dimensions: the positive common eigenvector of the left multiplications, d(1) = 1
        """
        total = self.N.sum(axis=0).astype(float)
        values, vectors = np.linalg.eig(total)
        top = int(np.argmax(values.real))
        d = np.abs(vectors[:, top].real)
        return d / d[0]

    def dimension(self, x):
        return float(self.dimensions[self.index(x)])

    def dimension_residual(self):
        """
        max |d(x)d(y) − Σ_z N_{xy}^z d(z)|
        """
        d = self.dimensions
        return float(np.abs(np.outer(d, d) - self.N @ d).max())

    @property
    def global_dimension(self):
        return float((self.dimensions ** 2).sum())

    def invertibles(self):
        return [x for x, dx in zip(self.labels, self.dimensions) if abs(dx - 1) < DIMENSION_TOLERANCE]

    def check(self):
        return {
            "unit": float(self.unit_defect()),
            "associativity": float(self.associativity_defect()),
            "rigidity": float(sum(1 for x in self.duals if x < 0)),
            "dimension": self.dimension_residual()
        }

    def validate(self, tol=DIMENSION_TOLERANCE):
        defects = self.check()
        failed = [k for k, v in defects.items() if (v > tol if k == "dimension" else v != 0)]
        if failed:
            raise VerificationError(f"{self.name}: fusion ring axioms fail ({', '.join(failed)})", defects)
        return self

    def to_json(self):
        return {
            "name": self.name,
            "labels": [str(x) for x in self.labels],
            "objects": [_label_json(x) for x in self.labels],
            "structure_constants": self.N.tolist(),
            "dimensions": [float(x) for x in self.dimensions],
            "notes": self.notes
        }


def near_group_ring(G, m):
    """
    K(G, m): g·h = g + h, g·ρ = ρ·g = ρ and ρ·ρ = ⊕_g g ⊕ mρ
    """
    m = int(m)
    if m < 0:
        raise InputError(f"Multiplicity m must be non-negative, got {m}")
    rho = SimpleObject(RHO)
    alphas = [SimpleObject(ALPHA, g) for g in G.elements()]

    def rule(x, y):
        if x.kind == ALPHA and y.kind == ALPHA:
            return {SimpleObject(ALPHA, G.add(x.element, y.element)): 1}
        if x.kind == ALPHA or y.kind == ALPHA:
            return {rho: 1}
        out = {alpha: 1 for alpha in alphas}
        if m:
            out[rho] = m
        return out

    return FusionRing.from_rule(f"K({G.label()}, {m})", alphas + [rho], rule).validate()


@dataclass(frozen=True, eq=False)
class PrincipalGraph:
    """
    Bipartite 2^n_l 1 graph; adjacency[even, odd] with even vertices α(g), ρ and odd vertices α(g)ι, π
    """
    group: FiniteAbelianGroup
    l: int
    even: tuple
    odd: tuple
    adjacency: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def name(self):
        return f"2^{{{self.group.label()}}}_{self.l} 1"

    @property
    def d(self):
        n = self.group.order
        return QuadIrrational.from_nm(n, self.l * n)

    def norm_squared(self):
        A = self.adjacency.astype(float)
        return float(np.linalg.eigvalsh(A @ A.T).max())

    def expected_norm_squared(self):
        return 1 + self.l * float(self.d)

    def index(self):
        return float(self.d) ** 2 / self.group.order

    def norm_residual(self):
        return abs(self.norm_squared() - self.expected_norm_squared())

    def to_dot(self):
        lines = [f'graph "{self.name}" {{']
        lines += [f'  "{v}" [shape=circle];' for v in self.even]
        lines += [f'  "{w}" [shape=box];' for w in self.odd]
        for i, j in zip(*np.nonzero(self.adjacency)):
            weight = int(self.adjacency[i, j])
            attr = "" if weight == 1 else f' [label="{weight}", penwidth={weight}]'
            lines.append(f'  "{self.even[i]}" -- "{self.odd[j]}"{attr};')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {
            "name": self.name,
            "group": self.group.to_json(),
            "l": self.l,
            "even": list(self.even),
            "odd": list(self.odd),
            "adjacency": self.adjacency.tolist(),
            "norm_squared": self.norm_squared(),
            "expected_norm_squared": self.expected_norm_squared(),
            "metadata": self.metadata
        }


def _self_dual_flag(G, l, solution):
    if l == 1:
        return True
    if solution is None:
        return None
    if solution.group != G or solution.m != l * G.order:
        raise InputError(f"Solution {solution.label()} does not belong to the 2^{{{G.label()}}}_{l} 1 graph")
    if isinstance(solution, MNSolution):
        return True
    return len(set(solution.acj.shifts)) == 1


def principal_graph(G, l, solution=None):
    """
    2^G_l 1 principal graph: v_g–w_g with weight 1, w_g–v_ρ with weight l, v_ρ–w_π with weight 1
    :param G: FiniteAbelianGroup
    :param l: m / n
    :param solution: optional solution deciding the self-duality flag through A(g)
    :return: PrincipalGraph
    """
    l = int(l)
    if l < 1:
        raise InputError(f"Graph parameter l must be at least 1, got {l}")
    n = G.order
    alphas = [str(SimpleObject(ALPHA, g)) for g in G.elements()]
    even = tuple(alphas) + ("ρ",)
    odd = tuple(f"{x}ι" for x in alphas) + ("π",)
    A = np.zeros((n + 1, n + 1), dtype=int)
    for i in range(n):
        A[i, i] = 1
        A[n, i] = l
    A[n, n] = 1
    metadata = {
        "near_group_correspondence": f"corresponds one-to-one to a C*-near-group category for {G.label()} "
                                     f"with m={l * n}",
        "self_dual_criterion": "every 2^G 1 subfactor is self-dual" if l == 1 else "self-dual when A(g) is scalar",
        "self_dual": _self_dual_flag(G, l, solution)
    }
    return PrincipalGraph(G, l, even, odd, A, metadata)


def _abelian_groups(n):
    """
    Every abelian group of order n, one per isomorphism class
    """
    per_prime = []
    for p, e in sympy.factorint(n).items():
        per_prime.append([[p ** k for k, mult in part.items() for _ in range(mult)] for part in partitions(e)])
    for combo in itertools.product(*per_prime):
        yield FiniteAbelianGroup.from_factors([q for block in combo for q in block]).group


def _order_profile(orders):
    return tuple(sorted(Counter(orders).items()))


def abelian_type(order, orders):
    """
    Abelian group whose element orders match; abelian groups are determined by this profile
    """
    profile = _order_profile(orders)
    for G in _abelian_groups(order):
        if _order_profile(G.element_order(g) for g in G.elements()) == profile:
            return G
    return None


def quotient_group(G, H):
    """
    G/H up to isomorphism, from the orders of the cosets
    """
    members = set(H.elements)
    orders = []
    for g in H.cosets():
        k = 1
        while G.scale(k, g) not in members:
            k += 1
        orders.append(k)
    return abelian_type(len(orders), orders)


NONABELIAN_PROFILES = {
    6: {((1, 1), (2, 3), (3, 2)): "S3"},
    8: {((1, 1), (2, 5), (4, 2)): "D8", ((1, 1), (2, 1), (4, 6)): "Q8"},
    10: {((1, 1), (2, 5), (5, 4)): "D10"},
    12: {((1, 1), (2, 7), (3, 2), (6, 2)): "D12", ((1, 1), (2, 3), (3, 8)): "A4",
         ((1, 1), (2, 1), (3, 2), (4, 6), (6, 2)): "Dic12"},
    14: {((1, 1), (2, 7), (7, 6)): "D14"},
    16: {((1, 1), (2, 9), (4, 2), (8, 4)): "D16", ((1, 1), (2, 5), (4, 6), (8, 4)): "SD16",
         ((1, 1), (2, 1), (4, 10), (8, 4)): "Q16", ((1, 1), (2, 3), (4, 4), (8, 8)): "M16",
         ((1, 1), (2, 11), (4, 4)): "D8xZ2"}
}


def group_type_guess(order, orders, abelian):
    """
    Isomorphism type from element-order statistics, for orders up to 16
    :param orders: element orders of every group element
    """
    if order > 16:
        return None
    if abelian:
        G = abelian_type(order, orders)
        if G is None:
            return None
        if G.order == 1:
            return "trivial"
        return "Z2xZ2 (Klein four)" if G.invariant_factors == (2, 2) else G.label()
    profile = _order_profile(orders)
    return NONABELIAN_PROFILES.get(order, {}).get(profile, f"non-abelian group of order {order}")


@dataclass(frozen=True, eq=False)
class OutElement:
    theta: GroupAutomorphism
    u: np.ndarray

    def to_json(self):
        return {"theta": self.theta.to_json(), "u": matrix_to_json(self.u)}


def _same_element(e, theta, u, tol=1e-6):
    if e.theta.images != theta.images or e.u.shape != u.shape:
        return False
    return min(_max_abs(e.u - u), _max_abs(e.u + u)) < tol


def _find_element(elements, theta, u):
    for i, e in enumerate(elements):
        if _same_element(e, theta, u):
            return i
    return -1


@dataclass
class OutGroup:
    """
    Out(𝒞) as a list of (θ, u) representatives modulo (id, ±I) with its Cayley table
    """
    label: str
    elements: list
    table: np.ndarray
    inconclusive: list = field(default_factory=list)

    @property
    def order(self):
        return len(self.elements)

    @property
    def closed(self):
        return bool((self.table >= 0).all())

    @property
    def identity(self):
        for i, e in enumerate(self.elements):
            k = e.u.shape[0]
            if e.theta.is_identity() and min(_max_abs(e.u - np.eye(k)), _max_abs(e.u + np.eye(k))) < 1e-6:
                return i
        return -1

    def element_order(self, i):
        e = self.identity
        x, k = i, 1
        while x != e:
            if x < 0 or k > self.order:
                return None
            x = int(self.table[x, i])
            k += 1
        return k

    def is_abelian(self):
        return bool((self.table == self.table.T).all())

    def generators(self):
        """
        Greedy generating set in element order
        """
        gens = []
        span = {self.identity}
        for i in range(self.order):
            if i in span:
                continue
            gens.append(i)
            frontier = list(span)
            while frontier:
                x = frontier.pop()
                for g in gens:
                    y = int(self.table[x, g])
                    if y >= 0 and y not in span:
                        span.add(y)
                        frontier.append(y)
        return [self.elements[i] for i in gens]

    def type_guess(self):
        if not self.closed or self.identity < 0:
            return None
        orders = [self.element_order(i) for i in range(self.order)]
        if any(k is None for k in orders):
            return None
        return group_type_guess(self.order, orders, self.is_abelian())

    def to_json(self):
        return {
            "solution": self.label,
            "order": self.order,
            "type": self.type_guess(),
            "generators": [e.to_json() for e in self.generators()] if self.closed else [],
            "elements": [e.to_json() for e in self.elements],
            "inconclusive": list(self.inconclusive)
        }


def _stabilizing_gauges(B_moved, B_target, algebra, base, grid_resolution, rng):
    """
    Local minima of max |v·B_moved − B_target| over v = exp(X)·base with X in the gauge Lie algebra:
    grid over exponential coordinates, then least squares from the best grid points
    :return: list of (distance, v)
    """
    def transform(coords):
        X = sum((x * Y for x, Y in zip(coords, algebra)), np.zeros_like(base))
        return scipy.linalg.expm(X) @ base

    def objective(coords):
        diff = (_gauge_transform(transform(coords), B_moved) - B_target).reshape(-1)
        return np.concatenate([diff.real, diff.imag])

    p = len(algebra)
    if p == 0:
        return [(_max_abs(_gauge_transform(base, B_moved) - B_target), base)]

    span = np.pi * np.sqrt(2)
    per_dim = max(4, int(round(grid_resolution ** (1.0 / p))))
    axis = np.linspace(-span, span, per_dim, endpoint=False)
    points = [np.array(c) for c in itertools.product(axis, repeat=p)]
    scores = np.array([np.linalg.norm(objective(c)) for c in points])
    chosen = set(np.argsort(scores)[:OUT_REFINE_STARTS].tolist())
    if p == 1:
        size = len(points)
        chosen |= {i for i in range(size) if scores[i] <= scores[i - 1] and scores[i] <= scores[(i + 1) % size]}
    chosen.add(int(rng.integers(len(points))))

    results = []
    for i in sorted(chosen):
        fit = scipy.optimize.least_squares(objective, points[i], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        v = transform(fit.x)
        results.append((_max_abs(_gauge_transform(v, B_moved) - B_target), v))
    return results


def out_group(s, grid_resolution=DEFAULT_GRID_RESOLUTION, seed=DEFAULT_SEED):
    """
    Outer automorphism group of the category of a verified solution.
    For m = n: the θ ∈ Aut(G) preserving ⟨·,·⟩, a and b. For larger m: the pairs (θ, u), u in the gauge
    group, with B_{θg} = (u⊗u)B_g(u*·)u*, modulo (id, ±I). Distances between the equality thresholds
    are reported in inconclusive and never counted as elements.
    :param s: MNSolution or GeneralSolution
    :param grid_resolution: grid points over the gauge Lie algebra per intertwiner
    :param seed: random seed of the extra refinement start
    :return: OutGroup
    """
    logger = LoggerManager.get_logger(__name__)

    rng = np.random.default_rng(seed)
    elements = []
    notes = []
    algebra = None if isinstance(s, MNSolution) else gauge_lie_algebra(s.acj)

    for theta in automorphisms(s.group):
        moved = aut_act(theta, s)
        if moved.bicharacter != s.bicharacter or moved.form != s.form:
            continue

        if isinstance(s, MNSolution):
            candidates = [(_max_abs(moved.b - s.b), np.ones((1, 1), dtype=complex))]
        else:
            candidates = []
            for W in intertwiners(moved.acj, s.acj):
                candidates += _stabilizing_gauges(moved.B, s.B, algebra, W, grid_resolution, rng)

        for dist, u in candidates:
            verdict = _verdict(dist)
            if verdict == EQUAL:
                if _find_element(elements, theta, u) < 0:
                    elements.append(OutElement(theta, u))
            elif verdict == INCONCLUSIVE:
                note = f"theta={theta.images}: distance {dist:.2e} between the equality thresholds"
                if note not in notes:
                    notes.append(note)

    size = len(elements)
    table = -np.ones((size, size), dtype=int)
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            table[i, j] = _find_element(elements, x.theta.compose(y.theta), x.u @ y.u)
    if (table < 0).any():
        notes.append("products of the found elements leave the found set; the search missed elements")

    group = OutGroup(s.label(), elements, table, notes)
    logger.info(f"Out({s.label()}): order {group.order}, type {group.type_guess()}, "
                f"{len(notes)} inconclusive notes")
    return group


def _as_subgroup(G, H):
    if isinstance(H, Subgroup):
        if H.group != G:
            raise InputError("Subgroup belongs to a different group")
        return H
    return Subgroup.from_elements(G, H)


def _check_data(G, b, a):
    if b.group != G:
        raise InputError(f"Bicharacter is not defined on {G.label()}")
    if a.bicharacter != b:
        raise InputError("Quadratic form does not belong to the given bicharacter")


def _coset_rep(G, H, g):
    return min(G.add(g, h) for h in H.elements)


def character_shift(b, a, H):
    """
    g_a with a(h) = ⟨h, g_a⟩ on an isotropic H, smallest in element order; the choice only matters modulo H⊥
    """
    G = b.group
    for g in G.elements():
        if all(a(h) == b.pair(h, g) for h in H.elements):
            return g
    raise VerificationError("Restriction of a to H is not a character of H")


def dequiv_fusion(G, b, a, H):
    """
    Fusion ring of the de-equivariantization of the m = n category by an isotropic subgroup H.
    Invertibles α̃_g for g ∈ G/H, non-invertibles σ_x = α̃_xσ for x ∈ G/H⊥, with
    σ_xσ_y = ⊕_{k∈H⊥/H} α̃_{x−y+k−g_a} ⊕ |H⊥/H|·⊕_z σ_z and σ_xα̃_g = σ_{x−g}
    :param H: Subgroup or element list, H ⊆ H⊥
    :return: FusionRing; notes hold g_a, self-conjugacy of σ and whether H is Lagrangian
    """
    logger = LoggerManager.get_logger(__name__)

    _check_data(G, b, a)
    H = _as_subgroup(G, H)
    H_perp, isotropic, lagrangian = orthogonal_and_lagrangian(G, b, a, H)
    if not isotropic:
        raise InputError(f"Subgroup {list(H.elements)} is not isotropic: H is not contained in H⊥")

    g_a = character_shift(b, a, H)
    middle = sorted({_coset_rep(G, H, k) for k in H_perp.elements})
    mult = len(middle)
    alphas = [SimpleObject(ALPHA, g) for g in H.cosets()]
    sigmas = [SimpleObject(SIGMA, x) for x in H_perp.cosets()]

    def rule(x, y):
        if x.kind == ALPHA and y.kind == ALPHA:
            return {SimpleObject(ALPHA, _coset_rep(G, H, G.add(x.element, y.element))): 1}
        if x.kind == ALPHA:
            return {SimpleObject(SIGMA, _coset_rep(G, H_perp, G.add(x.element, y.element))): 1}
        if y.kind == ALPHA:
            return {SimpleObject(SIGMA, _coset_rep(G, H_perp, G.sub(x.element, y.element))): 1}
        base = G.sub(G.sub(x.element, y.element), g_a)
        out = Counter(SimpleObject(ALPHA, _coset_rep(G, H, G.add(base, k))) for k in middle)
        for z in sigmas:
            out[z] += mult
        return out

    self_conjugate = all(a(h).is_one() for h in H.elements)
    notes = {
        "g_a": list(g_a),
        "sigma_self_conjugate": self_conjugate,
        "lagrangian": lagrangian,
        "subgroup": [list(h) for h in H.elements]
    }
    ring = FusionRing.from_rule(f"{G.label()} de-equivariantized by H of order {H.order}", alphas + sigmas,
                                rule, notes).validate()
    logger.info(f"{ring.name}: {len(alphas)} invertibles, {len(sigmas)} σ-orbit objects, g_a={g_a}")
    return ring


def _omega_value(x):
    return x.value() if hasattr(x, "value") and not isinstance(x, complex) else complex(x)


def check_twisting_cocycle(b, H, omega, tol=DEFAULT_TOLERANCE):
    """
    Residuals of the twisting conditions on ω: |ω| = 1, ω(h,k)ω(h+k,l) = ω(h,k+l)ω(k,l) and
    ω(h,k)·conj(ω(k,h)) = ⟨h,k⟩
    :param omega: {(h, k): value} over H×H
    :return: ResidualReport
    """
    G = b.group
    elems = list(H.elements)
    try:
        w = {(h, k): _omega_value(omega[(h, k)]) for h in elems for k in elems}
    except KeyError as e:
        raise InputError(f"Cocycle table misses the pair {e}")

    unimodular = max(abs(abs(v) - 1) for v in w.values())
    cocycle = max(abs(w[(h, k)] * w[(G.add(h, k), j)] - w[(h, G.add(k, j))] * w[(k, j)])
                  for h in elems for k in elems for j in elems)
    antisymmetry = max(abs(w[(h, k)] * np.conj(w[(k, h)]) - b.pair(h, k).value()) for h in elems for k in elems)
    return ResidualReport({"unimodular": unimodular, "cocycle": cocycle, "antisymmetrization": antisymmetry}, tol)


def dequiv_twisted(G, b, a, H, omega=None, tol=DEFAULT_TOLERANCE):
    """
    Twisted de-equivariantization by H ≅ ℤ₂^{2s} with ⟨·,·⟩|_H non-degenerate and a 2-cocycle ω whose
    antisymmetrization is ⟨·,·⟩|_H. The result is the near-group ring K(G/H, 2^s|G/H|)
    :param omega: {(h, k): value}; may be omitted only for the trivial subgroup
    :return: FusionRing
    """
    logger = LoggerManager.get_logger(__name__)

    _check_data(G, b, a)
    H = _as_subgroup(G, H)
    if any(G.scale(2, h) != G.zero for h in H.elements):
        raise InputError("Twisting subgroup must be an elementary abelian 2-group")
    power = H.order.bit_length() - 1
    if 2 ** power != H.order or power % 2:
        raise InputError(f"Twisting subgroup must have order 4^s, got {H.order}")
    s = power // 2
    for h in H.elements:
        if h != G.zero and all(b.pair(h, k).is_one() for k in H.elements):
            raise InputError(f"Bicharacter restricted to H is degenerate at {h}")

    if omega is None:
        if H.order != 1:
            raise InputError("A 2-cocycle on H is required for a non-trivial twisting subgroup")
        omega = {(G.zero, G.zero): 1}
    report = check_twisting_cocycle(b, H, omega, tol)
    if not report.passed:
        raise VerificationError(f"Cocycle conditions fail: {', '.join(report.failed())}", report)

    reps = H.cosets()
    m = 2 ** s * len(reps)
    Q = quotient_group(G, H)
    sigma = SimpleObject(SIGMA)
    alphas = [SimpleObject(ALPHA, g) for g in reps]

    def rule(x, y):
        if x.kind == ALPHA and y.kind == ALPHA:
            return {SimpleObject(ALPHA, _coset_rep(G, H, G.add(x.element, y.element))): 1}
        if x.kind == ALPHA or y.kind == ALPHA:
            return {sigma: 1}
        out = {alpha: 1 for alpha in alphas}
        out[sigma] = m
        return out

    notes = {"s": s, "quotient": Q.label() if Q is not None else None, "cocycle": report.to_json()}
    name = f"K({Q.label() if Q is not None else 'G/H'}, {m})"
    ring = FusionRing.from_rule(name, alphas + [sigma], rule, notes).validate()
    logger.info(f"twisted de-equivariantization of {G.label()} by H of order {H.order}: {ring.name}")
    return ring


@dataclass(frozen=True, eq=False)
class GammaData:
    """
    Character-theory data of a finite group Γ of gauge unitaries: irreducible representations with
    dimensions (trivial one first), tensor product decompositions, and the decomposition of the
    defining representation π₀ on 𝒦₀
    """
    name: str
    irreps: tuple
    products: dict
    defining: dict

    @classmethod
    def from_dict(cls, data):
        try:
            irreps = tuple((str(r["name"]), int(r["dim"])) for r in data["irreps"])
            products = {}
            for entry in data.get("products", []):
                products[(str(entry["left"]), str(entry["right"]))] = \
                    {str(z): int(k) for z, k in entry["result"].items()}
            defining = {str(z): int(k) for z, k in data["defining"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise InputError(f"Γ-data is incomplete or malformed: {e}")
        if not irreps:
            raise InputError("Γ-data lists no irreducible representations")
        return cls(str(data.get("name", "Γ")), irreps, products, defining)

    @classmethod
    def from_yaml(cls, path):
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(yaml.safe_load(f))

    @property
    def names(self):
        return tuple(name for name, _ in self.irreps)

    def dim(self, name):
        return dict(self.irreps)[name]

    @property
    def defining_dim(self):
        return sum(k * self.dim(z) for z, k in self.defining.items())

    def decompose(self, x, y):
        unit = self.names[0]
        if x == unit:
            return {y: 1}
        if y == unit:
            return {x: 1}
        for key in ((x, y), (y, x)):
            if key in self.products:
                return self.products[key]
        raise InputError(f"Γ-data gives no decomposition of {x}⊗{y}")

    def representation_ring(self):
        names = set(self.names)
        unknown = {z for result in self.products.values() for z in result} | set(self.defining)
        unknown -= names
        if unknown:
            raise InputError(f"Γ-data refers to unknown representations: {sorted(unknown)}")
        ring = FusionRing.from_rule(f"Rep({self.name})", self.names, self.decompose)
        try:
            ring.validate()
        except VerificationError as e:
            raise InputError(f"Γ-data does not define a representation ring: {e.msg}")
        given = np.array([d for _, d in self.irreps], dtype=float)
        if _max_abs(ring.dimensions - given) > DIMENSION_TOLERANCE:
            raise InputError("Γ-data dimensions do not match the tensor product decompositions")
        return ring


def _equiv_gamma(G, m, gamma):
    """
    [ρ̃²] = ⊕_g [α̃_g] ⊕ n[γ̂_{π₀}ρ̃]; γ̂_τ commutes with α̃_g and ρ̃, and α̃_gρ̃ = ρ̃
    """
    n = G.order
    rep = gamma.representation_ring()
    l = gamma.defining_dim
    if n * l != m:
        raise InputError(f"Defining representation of dimension {l} does not match m/n = {m}/{n}")

    alphas = [SimpleObject(ALPHA, g, tau) for tau in gamma.names for g in G.elements()]
    rhos = [SimpleObject(RHO, (), tau) for tau in gamma.names]

    def rule(x, y):
        out = Counter()
        for tau, k in rep.product(x.rep, y.rep).items():
            if x.kind == ALPHA and y.kind == ALPHA:
                out[SimpleObject(ALPHA, G.add(x.element, y.element), tau)] += k
            elif x.kind == ALPHA or y.kind == ALPHA:
                out[SimpleObject(RHO, (), tau)] += k
            else:
                for g in G.elements():
                    out[SimpleObject(ALPHA, g, tau)] += k
                for part, mult in gamma.defining.items():
                    for sigma, j in rep.product(tau, part).items():
                        out[SimpleObject(RHO, (), sigma)] += n * k * mult * j
        return out

    return FusionRing.from_rule(f"K({G.label()}, {m}) equivariantized by {gamma.name}", alphas + rhos, rule,
                                {"gamma": gamma.name, "defining_dim": l})


def _equiv_involution(G, m, theta):
    """
    m = n with θ of order at most two: Rep(Ĝ⋊ℤ₂) on α̃_g, γ̂α̃_g (g ∈ G^θ) and π_g (g ∈ Λ), together with ρ̃
    and γ̂ρ̃; ρ̃² = ⊕_{G^θ} α̃_g ⊕ ⊕_Λ π_g ⊕ (n+|G^θ|)/2·ρ̃ ⊕ (n−|G^θ|)/2·γ̂ρ̃ and π_gρ̃ = ρ̃ ⊕ γ̂ρ̃
    """
    n = G.order
    if m != n:
        raise InputError(f"The order-two automorphism form needs m = |G| = {n}, got {m}")
    if theta.group != G or not theta.is_bijective():
        raise InputError("θ is not an automorphism of the group")
    if not theta.compose(theta).is_identity():
        raise InputError("θ must have order at most two")

    fixed = [g for g in G.elements() if theta(g) == g]
    orbit_reps = sorted({min(g, theta(g)) for g in G.elements() if theta(g) != g})
    f = len(fixed)
    one_dim = (ALPHA, GAMMA_ALPHA)
    rho_kinds = (RHO, GAMMA_RHO)

    def sign(x):
        return -1 if x.kind in (GAMMA_ALPHA, GAMMA_RHO) else 1

    def induced(g):
        if theta(g) == g:
            return Counter({SimpleObject(ALPHA, g): 1, SimpleObject(GAMMA_ALPHA, g): 1})
        return Counter({SimpleObject(PI, min(g, theta(g))): 1})

    def flip(x):
        swap = {ALPHA: GAMMA_ALPHA, GAMMA_ALPHA: ALPHA, RHO: GAMMA_RHO, GAMMA_RHO: RHO, PI: PI}
        return SimpleObject(swap[x.kind], x.element)

    def rule(x, y):
        if x.kind in one_dim and y.kind in one_dim:
            kind = ALPHA if sign(x) * sign(y) == 1 else GAMMA_ALPHA
            return {SimpleObject(kind, G.add(x.element, y.element)): 1}
        if x.kind in one_dim and y.kind == PI or x.kind == PI and y.kind in one_dim:
            g = G.add(x.element, y.element)
            return {SimpleObject(PI, min(g, theta(g))): 1}
        if x.kind == PI and y.kind == PI:
            return induced(G.add(x.element, y.element)) + induced(G.add(x.element, theta(y.element)))
        if x.kind in one_dim or y.kind in one_dim:
            kind = RHO if sign(x) * sign(y) == 1 else GAMMA_RHO
            return {SimpleObject(kind): 1}
        if x.kind == PI or y.kind == PI:
            return {SimpleObject(RHO): 1, SimpleObject(GAMMA_RHO): 1}
        out = Counter({SimpleObject(ALPHA, g): 1 for g in fixed})
        out.update({SimpleObject(PI, g): 1 for g in orbit_reps})
        out[SimpleObject(RHO)] += (n + f) // 2
        out[SimpleObject(GAMMA_RHO)] += (n - f) // 2
        if sign(x) * sign(y) == -1:
            out = Counter({flip(z): k for z, k in out.items()})
        return +out

    labels = [SimpleObject(ALPHA, g) for g in fixed] + [SimpleObject(GAMMA_ALPHA, g) for g in fixed]
    labels += [SimpleObject(PI, g) for g in orbit_reps] + [SimpleObject(kind) for kind in rho_kinds]
    notes = {"fixed": [list(g) for g in fixed], "orbit_representatives": [list(g) for g in orbit_reps]}
    return FusionRing.from_rule(f"K({G.label()}, {m}) equivariantized by θ", labels, rule, notes)


def equiv_fusion(G, m, gamma):
    """
    Fusion ring of the equivariantization of the near-group category by Γ
    :param gamma: GammaData (or its dict / YAML form) for m = n·dim π₀, or a GroupAutomorphism θ of
                  order at most two for m = n
    :return: FusionRing
    """
    logger = LoggerManager.get_logger(__name__)

    if isinstance(gamma, GroupAutomorphism):
        ring = _equiv_involution(G, int(m), gamma)
    else:
        if isinstance(gamma, dict):
            gamma = GammaData.from_dict(gamma)
        if not isinstance(gamma, GammaData):
            raise InputError("Insufficient Γ-data: expected character data or an automorphism of order two")
        ring = _equiv_gamma(G, int(m), gamma)

    ring.validate()
    logger.info(f"{ring.name}: {ring.size} simple objects, global dimension {ring.global_dimension:.6f}")
    return ring


def _sigma_ring(K, l):
    """
    [β_k][σ] = [σ][β_{−k}] and [σ]² = [id] ⊕ l⊕_k[β_k][σ], on labels β_k and β_kσ
    """
    sigmas = [SimpleObject(SIGMA, k) for k in K.elements()]

    def rule(x, y):
        if x.kind == ALPHA and y.kind == ALPHA:
            return {SimpleObject(ALPHA, K.add(x.element, y.element)): 1}
        if x.kind == ALPHA:
            return {SimpleObject(SIGMA, K.add(x.element, y.element)): 1}
        if y.kind == ALPHA:
            return {SimpleObject(SIGMA, K.sub(x.element, y.element)): 1}
        out = Counter({SimpleObject(ALPHA, K.sub(x.element, y.element)): 1})
        for z in sigmas:
            out[z] += l
        return out

    labels = [SimpleObject(ALPHA, k) for k in K.elements()] + sigmas
    return FusionRing.from_rule(f"{K.label()} σ-category, l={l}", labels, rule)


def ktog_check(K, l=1, tol=DIMENSION_TOLERANCE):
    """
    Fusion-level check that the category generated by κ(σ⊗id)κ̄ over an odd abelian group K is a
    near-group category for an extension of K by K̂ with m = l|K|²
    :return: FusionRing K(K×K, l|K|²)
    """
    logger = LoggerManager.get_logger(__name__)

    if K.order % 2 == 0:
        raise InputError(f"The construction needs an odd abelian group, got {K.label()}")
    l = int(l)
    if l < 1:
        raise InputError(f"Multiplicity l must be at least 1, got {l}")

    source = _sigma_ring(K, l).validate(tol)
    d_sigma = source.dimension(SimpleObject(SIGMA, K.zero))

    # ⊕_k [β̃_{−2k}κκ̄] meets every β̃ once
    images = Counter(K.scale(-2, k) for k in K.elements())
    if len(images) != K.order:
        raise VerificationError(f"k ↦ −2k is not a bijection of {K.label()}")
    # each κ(β_kσ⊗id)κ̄ is equivalent to ρ exactly once
    for k in K.elements():
        hits = sum(1 for j in K.elements() if K.add(k, K.scale(2, j)) == K.zero)
        if hits != 1:
            raise VerificationError(f"κ(β_kσ⊗id)κ̄ meets ρ {hits} times at k={k}")

    m = l * K.order ** 2
    G = FiniteAbelianGroup.from_factors(K.invariant_factors * 2).group
    ring = near_group_ring(G, m)
    d_rho = ring.dimension(SimpleObject(RHO))
    if abs(d_rho - K.order * d_sigma) > tol * max(1.0, d_rho):
        raise VerificationError(f"d(ρ) = {d_rho:.9f} differs from |K|·d(σ) = {K.order * d_sigma:.9f}")
    logger.info(f"construction over {K.label()} with l={l}: {ring.name}, d(σ)={d_sigma:.6f}")
    return ring


def _profile(ring, i):
    diagonal = tuple(sorted(int(x) for x in ring.N[i, i] if x))
    return round(float(ring.dimensions[i]), 6), ring.duals[i] == i, diagonal


def _embedding(small, big):
    """
    Injective label map f with N_small[x,y,z] = N_big[f(x),f(y),f(z)], by backtracking over labels of equal
    dimension, self-duality and square multiplicities
    """
    k = small.size
    big_profiles = [_profile(big, j) for j in range(big.size)]
    candidates = [[j for j in range(big.size) if big_profiles[j] == _profile(small, i)] for i in range(k)]
    candidates[0] = [0] if 0 in candidates[0] else []
    if any(not c for c in candidates):
        return None

    order = [0] + sorted(range(1, k), key=lambda i: (len(candidates[i]), i))
    f = [-1] * k
    used = set()
    Ns, Nb = small.N, big.N

    def consistent(i):
        assigned = [x for x in range(k) if f[x] >= 0]
        for x in assigned:
            for y in assigned:
                zs = assigned if i in (x, y) else [i]
                for z in zs:
                    if Ns[x, y, z] != Nb[f[x], f[y], f[z]]:
                        return False
        return True

    def search(pos):
        if pos == k:
            return True
        i = order[pos]
        for j in candidates[i]:
            if j in used:
                continue
            f[i] = j
            used.add(j)
            if consistent(i) and search(pos + 1):
                return True
            f[i] = -1
            used.discard(j)
        return False

    if not search(0):
        return None
    return {small.labels[i]: big.labels[f[i]] for i in range(k)}


def contains_ring(R, S):
    """
    Embedding of the fusion ring S into R as a based subring
    :return: label map S → R, or None
    """
    if S.size > R.size:
        return None
    return _embedding(S, R)


def rings_isomorphic(R1, R2):
    """
    :return: label bijection R1 → R2 preserving structure constants, or None
    """
    if R1.size != R2.size:
        return None
    return _embedding(R1, R2)
