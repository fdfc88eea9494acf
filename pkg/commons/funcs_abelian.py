"""
Finite abelian groups, exact phases, symmetric bicharacters, quadratic forms, Fourier transform,
automorphisms and subgroups.

Elements are residue tuples in canonical invariant-factor coordinates. Every function table on a
group (a, b, Fourier inputs) is a numpy vector indexed in the order of FiniteAbelianGroup.elements().
"""
from commons.constants import DEFAULT_MAX_GROUP_ORDER
from commons.funcs_common import InputError, ResourceError

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, lcm

import itertools
import sympy
import numpy as np


@dataclass(frozen=True)
class Phase:
    """
    exp(2πi·exponent) with exponent a rational number reduced into [0, 1)
    """
    exponent: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "exponent", Fraction(self.exponent) % 1)

    @classmethod
    def from_ratio(cls, num, den):
        return cls(Fraction(num, den))

    @classmethod
    def root_of_unity(cls, order, power=1):
        return cls(Fraction(power, order))

    @property
    def num(self):
        return self.exponent.numerator

    @property
    def den(self):
        return self.exponent.denominator

    def __mul__(self, other):
        return Phase(self.exponent + other.exponent)

    def __truediv__(self, other):
        return Phase(self.exponent - other.exponent)

    def __pow__(self, k):
        return Phase(self.exponent * k)

    def conjugate(self):
        return Phase(-self.exponent)

    def is_one(self):
        return self.exponent == 0

    def value(self):
        if self.den == 1:
            return 1 + 0j
        if self.den == 2:
            return -1 + 0j
        if self.den == 4:
            return 1j if self.num == 1 else -1j
        return complex(np.exp(2j * np.pi * float(self.exponent)))

    def exact(self):
        return sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(self.num, self.den))

    def to_json(self):
        return {"num": self.num, "den": self.den}

    @classmethod
    def from_json(cls, data):
        return cls.from_ratio(int(data["num"]), int(data["den"]))

    def __repr__(self):
        return f"Phase({self.num}/{self.den})"


def _canonical_factors(factors):
    """
    Invariant factors n_1 | n_2 | ... of the product of cyclic groups of the given orders
    """
    primes = {}
    for n in factors:
        for p, e in sympy.factorint(n).items():
            primes.setdefault(p, []).append(e)
    length = max((len(v) for v in primes.values()), default=0)
    invariant = [1] * length
    for p, exps in primes.items():
        exps = sorted(exps)
        for i, e in enumerate(exps):
            invariant[length - len(exps) + i] *= p ** e
    return tuple(x for x in invariant if x > 1)


@dataclass(frozen=True)
class FiniteAbelianGroup:
    invariant_factors: tuple = ()

    def __post_init__(self):
        factors = tuple(int(x) for x in self.invariant_factors)
        for x in factors:
            if x < 2:
                raise InputError(f"Invariant factor must be at least 2: {factors}")
        for x, y in zip(factors, factors[1:]):
            if y % x != 0:
                raise InputError(f"Invariant factors are not in canonical form: {factors}")
        object.__setattr__(self, "invariant_factors", factors)

    @classmethod
    def from_factors(cls, factors):
        """
        Canonical group isomorphic to the product of cyclic groups of the given orders
        :return: GroupPresentation holding the canonical group and the coordinate map
        """
        return GroupPresentation(tuple(int(x) for x in factors))

    @classmethod
    def cyclic(cls, n):
        return cls((n,)) if n > 1 else cls(())

    @property
    def order(self):
        return reduce(lambda x, y: x * y, self.invariant_factors, 1)

    @property
    def rank(self):
        return len(self.invariant_factors)

    @property
    def exponent(self):
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @cached_property
    def _elements(self):
        return tuple(itertools.product(*[range(n) for n in self.invariant_factors]))

    @cached_property
    def _index(self):
        return {g: i for i, g in enumerate(self._elements)}

    def elements(self):
        return list(self._elements)

    def index(self, g):
        return self._index[self.reduce(g)]

    def element(self, i):
        return self._elements[i]

    @property
    def zero(self):
        return tuple(0 for _ in self.invariant_factors)

    def generators(self):
        return [tuple(1 if j == i else 0 for j in range(self.rank)) for i in range(self.rank)]

    def reduce(self, g):
        return tuple(int(x) % n for x, n in zip(g, self.invariant_factors))

    def add(self, g, h):
        return tuple((x + y) % n for x, y, n in zip(g, h, self.invariant_factors))

    def neg(self, g):
        return tuple((-x) % n for x, n in zip(g, self.invariant_factors))

    def sub(self, g, h):
        return tuple((x - y) % n for x, y, n in zip(g, h, self.invariant_factors))

    def scale(self, k, g):
        return tuple((k * x) % n for x, n in zip(g, self.invariant_factors))

    def element_order(self, g):
        g = self.reduce(g)
        k = 1
        for x, n in zip(g, self.invariant_factors):
            k = lcm(k, n // gcd(x, n))
        return k

    @cached_property
    def add_table(self):
        """
        add_table[i, j] = index of element(i) + element(j)
        """
        n = self.order
        table = np.zeros((n, n), dtype=int)
        for i, g in enumerate(self._elements):
            for j, h in enumerate(self._elements):
                table[i, j] = self._index[self.add(g, h)]
        return table

    @cached_property
    def neg_index(self):
        return np.array([self._index[self.neg(g)] for g in self._elements], dtype=int)

    def label(self):
        if not self.invariant_factors:
            return "1"
        return "x".join(f"Z{n}" for n in self.invariant_factors)

    def to_json(self):
        return {"factors": list(self.invariant_factors)}

    @classmethod
    def from_json(cls, data):
        return cls(tuple(data["factors"]))


class GroupPresentation:
    """
    Product of cyclic groups in the order a user wrote it, mapped onto the canonical
    invariant-factor group. Used by the group-spec grammar and by bundled data written in
    product coordinates.
    """

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.group = FiniteAbelianGroup(_canonical_factors(self.factors))

    @cached_property
    def _from_canonical(self):
        return {self.to_canonical(x): x for x in self.elements()}

    def from_canonical(self, g):
        return self._from_canonical[self.group.reduce(g)]

    def bicharacter(self, numerators):
        """
        Bicharacter given by its Gram exponents on the product generators,
        ⟨x,y⟩ = Π exp(2πi·x_i·y_j·num_ij / gcd(n_i, n_j))
        """
        k = len(self.factors)

        def pair(x, y):
            e = Fraction(0)
            for i in range(k):
                for j in range(k):
                    e += Fraction(numerators[i][j] * x[i] * y[j], gcd(self.factors[i], self.factors[j]))
            return Phase(e)

        gens = [self.from_canonical(e) for e in self.group.generators()]
        return Bicharacter(self.group, tuple(tuple(pair(x, y) for y in gens) for x in gens))

    def to_canonical(self, residues):
        """
        Canonical coordinates of the element with the given product coordinates. The p-part of each
        factor lands in the p-part of its slot through the CRT idempotent, so canonical factors map
        identically.
        """
        canonical = self.group.invariant_factors
        out = [0] * len(canonical)
        for f, x in enumerate(residues):
            n = self.factors[f]
            for p, e in sympy.factorint(n).items():
                q = p ** e
                slot = self._slot(f, p)
                big = canonical[slot]
                q_slot = p ** sympy.multiplicity(p, big)
                rest = big // q_slot
                idempotent = rest * pow(rest, -1, q_slot) % big
                out[slot] = (out[slot] + (int(x) % q) * (q_slot // q) * idempotent) % big
        return tuple(out)

    def _slot(self, f, p):
        canonical = self.group.invariant_factors
        length = len(canonical)
        items = sorted((e, g) for g, n in enumerate(self.factors) for q, e in sympy.factorint(n).items() if q == p)
        for i, (e, g) in enumerate(items):
            if g == f:
                return length - len(items) + i
        raise InputError(f"Prime {p} does not divide factor {self.factors[f]}")

    def elements(self):
        return list(itertools.product(*[range(n) for n in self.factors]))


@dataclass(frozen=True)
class GroupAutomorphism:
    group: FiniteAbelianGroup
    images: tuple

    def __call__(self, g):
        G = self.group
        out = G.zero
        for x, img in zip(g, self.images):
            out = G.add(out, G.scale(x, img))
        return out

    @cached_property
    def perm(self):
        """
        perm[i] = index of θ(element(i))
        """
        G = self.group
        return np.array([G.index(self(g)) for g in G.elements()], dtype=int)

    def is_bijective(self):
        return len(set(self.perm.tolist())) == self.group.order

    def is_identity(self):
        return all(self(g) == g for g in self.group.generators())

    def compose(self, other):
        """
        (self ∘ other)(g) = self(other(g))
        """
        return GroupAutomorphism(self.group, tuple(self(other(e)) for e in self.group.generators()))

    def inverse(self):
        G = self.group
        inv = np.argsort(self.perm)
        return GroupAutomorphism(G, tuple(G.element(int(inv[G.index(e)])) for e in G.generators()))

    @classmethod
    def identity(cls, G):
        return cls(G, tuple(G.generators()))

    @classmethod
    def negation(cls, G):
        return cls(G, tuple(G.neg(e) for e in G.generators()))

    def to_json(self):
        return {"images": [list(x) for x in self.images]}

    @classmethod
    def from_json(cls, G, data):
        return cls(G, tuple(G.reduce(x) for x in data["images"]))


@dataclass(frozen=True)
class Bicharacter:
    """
    ⟨g,h⟩ = Π_{i,j} exp(2πi·E_ij·g_i·h_j) with E the Gram exponent matrix on the generators
    """
    group: FiniteAbelianGroup
    gram: tuple

    def __post_init__(self):
        G = self.group
        gram = tuple(tuple(x if isinstance(x, Phase) else Phase(x) for x in row) for row in self.gram)
        if len(gram) != G.rank or any(len(row) != G.rank for row in gram):
            raise InputError(f"Gram matrix shape does not match the rank of {G.label()}")
        for i, n_i in enumerate(G.invariant_factors):
            for j, n_j in enumerate(G.invariant_factors):
                if not (gram[i][j] ** gcd(n_i, n_j)).is_one():
                    raise InputError(f"Gram entry ({i},{j}) is not well defined modulo the factor orders")
        object.__setattr__(self, "gram", gram)

    @classmethod
    def from_exponents(cls, G, numerators):
        """
        Gram entries exp(2πi·x_ij / gcd(n_i, n_j))
        """
        factors = G.invariant_factors
        return cls(G, tuple(tuple(Phase.from_ratio(numerators[i][j], gcd(factors[i], factors[j]))
                                  for j in range(G.rank)) for i in range(G.rank)))

    @classmethod
    def standard(cls, G, sign=1):
        """
        ⟨g,h⟩ = Π exp(±2πi g_i h_i / n_i)
        """
        return cls(G, tuple(tuple(Phase.from_ratio(sign if i == j else 0, G.invariant_factors[i])
                                  for j in range(G.rank)) for i in range(G.rank)))

    def pair(self, g, h):
        e = Fraction(0)
        for i, x in enumerate(g):
            if x == 0:
                continue
            for j, y in enumerate(h):
                if y:
                    e += self.gram[i][j].exponent * x * y
        return Phase(e)

    @cached_property
    def phase_table(self):
        G = self.group
        return tuple(tuple(self.pair(g, h) for h in G.elements()) for g in G.elements())

    @cached_property
    def matrix(self):
        """
        complex matrix M[g, h] = ⟨g,h⟩
        """
        table = self.phase_table
        n = self.group.order
        out = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = table[i][j].value()
        return out

    def character(self, g):
        """
        χ_g = ⟨g,·⟩ as a complex vector
        """
        return self.matrix[self.group.index(g)].copy()

    def is_symmetric(self):
        return all(self.gram[i][j] == self.gram[j][i] for i in range(self.group.rank) for j in range(self.group.rank))

    def is_nondegenerate(self):
        G = self.group
        table = self.phase_table
        zero = G.index(G.zero)
        for i in range(G.order):
            if i != zero and all(p.is_one() for p in table[i]):
                return False
        return True

    def exponent_key(self):
        return tuple((p.num, p.den) for row in self.gram for p in row)

    def act(self, theta):
        """
        (θ·b)(g,h) = b(θ⁻¹g, θ⁻¹h)
        """
        inv = theta.inverse()
        gens = self.group.generators()
        return Bicharacter(self.group, tuple(tuple(self.pair(inv(e), inv(f)) for f in gens) for e in gens))

    def conjugate(self):
        return Bicharacter(self.group, tuple(tuple(p.conjugate() for p in row) for row in self.gram))

    def to_json(self):
        return {"gram": [[p.to_json() for p in row] for row in self.gram]}

    @classmethod
    def from_json(cls, G, data):
        return cls(G, tuple(tuple(Phase.from_json(p) for p in row) for row in data["gram"]))


@dataclass(frozen=True)
class QuadraticForm:
    bicharacter: Bicharacter
    values: tuple

    @property
    def group(self):
        return self.bicharacter.group

    def __call__(self, g):
        return self.values[self.group.index(g)]

    @cached_property
    def vector(self):
        return np.array([p.value() for p in self.values], dtype=complex)

    def is_valid(self):
        """
        a(0) = 1 and a(g+h)⟨g,h⟩ = a(g)a(h) over all pairs
        """
        G = self.group
        table = self.bicharacter.phase_table
        add = G.add_table
        if not self.values[G.index(G.zero)].is_one():
            return False
        for i in range(G.order):
            for j in range(G.order):
                if self.values[add[i, j]] * table[i][j] != self.values[i] * self.values[j]:
                    return False
        return True

    def is_even(self):
        neg = self.group.neg_index
        return all(self.values[i] == self.values[neg[i]] for i in range(self.group.order))

    def gauss_sum(self):
        """
        â(0) = n^{-1/2} Σ_g a(g)
        """
        return complex(self.vector.sum() / np.sqrt(self.group.order))

    def act(self, theta):
        """
        (θ·a)(g) = a(θ⁻¹g)
        """
        G = self.group
        inv = theta.inverse()
        return QuadraticForm(self.bicharacter.act(theta), tuple(self(inv(g)) for g in G.elements()))

    def conjugate(self):
        return QuadraticForm(self.bicharacter.conjugate(), tuple(p.conjugate() for p in self.values))

    def to_json(self):
        G = self.group
        return [[list(g), p.to_json()] for g, p in zip(G.elements(), self.values)]

    @classmethod
    def from_json(cls, b, data, to_canonical=None):
        G = b.group
        values = [None] * G.order
        for g, p in data:
            key = to_canonical(g) if to_canonical is not None else G.reduce(g)
            values[G.index(key)] = Phase.from_json(p)
        if any(v is None for v in values):
            raise InputError("Quadratic form table does not cover the group")
        return cls(b, tuple(values))


@dataclass(frozen=True)
class Subgroup:
    """
    Sorted element list of a subgroup with a generating set
    """
    group: FiniteAbelianGroup
    elements: tuple
    generators: tuple = field(default=())

    @classmethod
    def generated_by(cls, G, gens):
        gens = tuple(G.reduce(g) for g in gens)
        elements = {G.zero}
        frontier = [G.zero]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = G.add(x, g)
                if y not in elements:
                    elements.add(y)
                    frontier.append(y)
        return cls(G, tuple(sorted(elements)), gens)

    @classmethod
    def from_elements(cls, G, elements):
        elements = {G.reduce(g) for g in elements}
        if G.zero not in elements:
            raise InputError("Subgroup must contain the identity element")
        for g in elements:
            for h in elements:
                if G.add(g, h) not in elements:
                    raise InputError(f"Subset is not closed under addition: {g} + {h}")
        return cls(G, tuple(sorted(elements)), tuple(sorted(elements)))

    @property
    def order(self):
        return len(self.elements)

    def __contains__(self, g):
        return self.group.reduce(g) in set(self.elements)

    def issubset(self, other):
        return set(self.elements) <= set(other.elements)

    def __eq__(self, other):
        return isinstance(other, Subgroup) and set(self.elements) == set(other.elements)

    def __hash__(self):
        return hash(frozenset(self.elements))

    def cosets(self):
        """
        coset representatives (minimal element of each coset) in element order
        """
        G = self.group
        seen = set()
        reps = []
        for g in G.elements():
            if g in seen:
                continue
            reps.append(g)
            for h in self.elements:
                seen.add(G.add(g, h))
        return reps


def _check_order(G, max_order):
    if G.order > max_order:
        raise ResourceError(f"Group order {G.order} exceeds the configured bound {max_order}")


def all_subgroups(G, max_order=DEFAULT_MAX_GROUP_ORDER):
    """
    Every subgroup of G, grown one generator at a time from the trivial subgroup
    """
    _check_order(G, max_order)
    trivial = Subgroup(G, (G.zero,), ())
    found = {frozenset(trivial.elements): trivial}
    frontier = [trivial]
    while frontier:
        H = frontier.pop()
        members = set(H.elements)
        for g in G.elements():
            if g in members:
                continue
            K = Subgroup.generated_by(G, H.generators + (g,))
            key = frozenset(K.elements)
            if key not in found:
                found[key] = K
                frontier.append(K)
    return sorted(found.values(), key=lambda H: (H.order, H.elements))


def enumerate_bicharacters(G, nondegenerate_only=False, max_order=DEFAULT_MAX_GROUP_ORDER):
    """
    Every symmetric bicharacter of G
    :param G: FiniteAbelianGroup
    :param nondegenerate_only: keep only those with g ↦ ⟨g,·⟩ injective
    :return: list of Bicharacter
    """
    _check_order(G, max_order)
    k = G.rank
    factors = G.invariant_factors
    slots = [(i, j) for i in range(k) for j in range(i, k)]
    ranges = [range(gcd(factors[i], factors[j])) for i, j in slots]
    result = []
    for choice in itertools.product(*ranges):
        numerators = [[0] * k for _ in range(k)]
        for (i, j), x in zip(slots, choice):
            numerators[i][j] = x
            numerators[j][i] = x
        b = Bicharacter.from_exponents(G, numerators)
        if nondegenerate_only and not b.is_nondegenerate():
            continue
        result.append(b)
    return result


def enumerate_quadratic_forms(b):
    """
    All a with a(g+h)⟨g,h⟩ = a(g)a(h), exactly |G| of them
    :return: list of (QuadraticForm, is_even) pairs
    """
    G = b.group
    factors = G.invariant_factors
    # a(e_i)^{n_i} = ⟨e_i,e_i⟩^{n_i(n_i-1)/2}
    generator_choices = []
    for i, n in enumerate(factors):
        base = b.gram[i][i].exponent * (n * (n - 1) // 2)
        generator_choices.append([Phase((base + j) / n) for j in range(n)])

    result = []
    for choice in itertools.product(*generator_choices):
        values = []
        for g in G.elements():
            e = Fraction(0)
            for i, x in enumerate(g):
                e += choice[i].exponent * x - b.gram[i][i].exponent * Fraction(x * (x - 1), 2)
                for j in range(i + 1, G.rank):
                    e -= b.gram[i][j].exponent * x * g[j]
            values.append(Phase(e))
        a = QuadraticForm(b, tuple(values))
        result.append((a, a.is_even()))
    return result


def even_quadratic_forms(b):
    return [a for a, even in enumerate_quadratic_forms(b) if even]


def fourier(f, b):
    """
    f̂(g) = n^{-1/2} Σ_h conj(⟨g,h⟩) f(h)
    """
    f = np.asarray(f, dtype=complex)
    return np.conj(b.matrix) @ f / np.sqrt(b.group.order)


def automorphisms(G, max_order=DEFAULT_MAX_GROUP_ORDER):
    """
    Aut(G) by brute force over generator images of matching order
    """
    _check_order(G, max_order)
    candidates = []
    for n in G.invariant_factors:
        candidates.append([g for g in G.elements() if G.scale(n, g) == G.zero])
    result = []
    for images in itertools.product(*candidates):
        theta = GroupAutomorphism(G, tuple(images))
        if theta.is_bijective():
            result.append(theta)
    return result


class UnionFind:
    def __init__(self, X):
        self.parent = {x: x for x in X}
        self.rank = {x: 0 for x in X}

    def find(self, x):
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x
        del self.rank[y]

    def reps(self):
        return set(self.rank)


def find_orbits(gens, space, action):
    """
    orbits of the action of the group generated by gens on a finite space of hashable items
    """
    space = list(space)
    uf = UnionFind(space)
    for g in gens:
        for x in space:
            uf.union(x, action(g, x))
    orbits = {rep: [] for rep in uf.reps()}
    for x in space:
        orbits[uf.find(x)].append(x)
    return list(orbits.values())


def bicharacter_classes(G, nondegenerate_only=True, up_to_conjugation=False, max_order=DEFAULT_MAX_GROUP_ORDER):
    """
    Representatives of symmetric bicharacters up to Aut(G) (and complex conjugation when asked):
    lexicographically minimal Gram exponent matrix of each orbit
    """
    bichars = enumerate_bicharacters(G, nondegenerate_only, max_order)
    auts = automorphisms(G, max_order)
    by_key = {b.exponent_key(): b for b in bichars}

    def action(theta, key):
        if theta is None:
            return by_key[key].conjugate().exponent_key()
        return by_key[key].act(theta).exponent_key()

    gens = auts + [None] if up_to_conjugation else auts
    orbits = find_orbits(gens, by_key.keys(), action)
    return [by_key[min(orbit)] for orbit in sorted(orbits, key=min)]


def form_classes(b, auts):
    """
    Even quadratic forms for b up to the stabilizer of b in Aut(G)
    """
    stabilizer = [theta for theta in auts if b.act(theta) == b]
    forms = {a.values: a for a in even_quadratic_forms(b)}
    orbits = find_orbits(stabilizer, forms.keys(), lambda theta, key: forms[key].act(theta).values)
    reps = []
    for orbit in orbits:
        reps.append(forms[min(orbit, key=lambda v: tuple((p.num, p.den) for p in v))])
    return sorted(reps, key=lambda a: tuple((p.num, p.den) for p in a.values))


def orthogonal_complement(b, H):
    """
    H⊥ = {g : ⟨g,h⟩ = 1 for all h ∈ H}
    """
    G = b.group
    elements = [g for g in G.elements() if all(b.pair(g, h).is_one() for h in H.elements)]
    return Subgroup(G, tuple(sorted(elements)), tuple(sorted(elements)))


def orthogonal_and_lagrangian(G, b, a, H):
    """
    :return: (H⊥, isotropic, lagrangian) where isotropic ⇔ H ⊆ H⊥ and lagrangian ⇔ H = H⊥ with a|_H ≡ 1
    """
    if not isinstance(H, Subgroup):
        H = Subgroup.from_elements(G, H)
    else:
        H = Subgroup.from_elements(G, H.elements)
    H_perp = orthogonal_complement(b, H)
    isotropic = H.issubset(H_perp)
    lagrangian = H == H_perp and all(a(h).is_one() for h in H.elements)
    return H_perp, isotropic, lagrangian


def lagrangian_subgroups(b, a, max_order=DEFAULT_MAX_GROUP_ORDER):
    G = b.group
    return [H for H in all_subgroups(G, max_order) if orthogonal_and_lagrangian(G, b, a, H)[2]]
