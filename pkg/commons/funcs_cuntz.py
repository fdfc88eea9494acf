"""
Sparse word engine for the Cuntz algebra 𝒪_N and the endomorphism ρ of an admissible tuple.

Letters 0..n−1 stand for S_g in group element order, letters n..n+m−1 for T_i.
"""
from commons.constants import ORACLE_TOLERANCE, PRUNE_THRESHOLD, MAX_CUNTZ_LEVEL, DEFAULT_MAX_ORACLE_TERMS, \
    tqdm_bar_format, tqdm_ncols, tqdm_case_postfix
from commons.funcs_common import InputError, ResourceError
from commons.funcs_neargroup import ResidualReport, _safe
from commons.mgr_logger import LoggerManager

from collections import defaultdict
from dataclasses import dataclass, field
from tqdm import tqdm

import itertools
import numbers
import numpy as np


def _pruned(terms):
    return {k: v for k, v in terms.items() if abs(v) > PRUNE_THRESHOLD}


class CuntzElement:
    """
    Σ c·S_μS_ν* over reduced word pairs (μ, ν)
    """
    __slots__ = ("size", "terms", "_index")

    def __init__(self, size, terms=None):
        self.size = int(size)
        self.terms = _pruned({(tuple(mu), tuple(nu)): complex(c) for (mu, nu), c in (terms or {}).items()})
        self._index = None

    @classmethod
    def _raw(cls, size, terms):
        out = cls.__new__(cls)
        out.size = size
        out.terms = _pruned(terms)
        out._index = None
        return out

    @classmethod
    def zero(cls, size):
        return cls._raw(size, {})

    @classmethod
    def scalar(cls, size, c=1.0):
        return cls._raw(size, {((), ()): complex(c)})

    @classmethod
    def identity(cls, size):
        return cls.scalar(size, 1.0)

    @classmethod
    def word(cls, size, mu=(), nu=(), c=1.0):
        for letter in tuple(mu) + tuple(nu):
            if not 0 <= letter < size:
                raise InputError(f"Letter {letter} outside the alphabet of size {size}")
        return cls._raw(size, {(tuple(mu), tuple(nu)): complex(c)})

    @classmethod
    def generator(cls, size, i):
        return cls.word(size, (i,))

    @classmethod
    def combination(cls, size, letters, coefficients):
        """
        Σ_x coefficients[x]·S_{letters[x]}
        """
        terms = defaultdict(complex)
        for letter, c in zip(letters, coefficients):
            terms[((letter,), ())] += c
        return cls._raw(size, terms)

    def _check(self, other):
        if other.size != self.size:
            raise InputError(f"Cuntz elements over different alphabets: {self.size} and {other.size}")

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = CuntzElement.scalar(self.size, other)
        self._check(other)
        terms = defaultdict(complex, self.terms)
        for k, v in other.terms.items():
            terms[k] += v
        return CuntzElement._raw(self.size, terms)

    __radd__ = __add__

    def __neg__(self):
        return CuntzElement._raw(self.size, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            other = CuntzElement.scalar(self.size, other)
        return self + (-other)

    def _by_first(self):
        """
        right factor terms indexed by the first letter of μ; key None holds μ = ()
        """
        if self._index is None:
            index = defaultdict(list)
            for (alpha, beta), c in self.terms.items():
                index[alpha[0] if alpha else None].append((alpha, beta, c))
            self._index = index
        return self._index

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return CuntzElement._raw(self.size, {k: v * other for k, v in self.terms.items()})
        self._check(other)
        index = other._by_first()
        empty = index.get(None, ())
        out = defaultdict(complex)
        for (mu, nu), c in self.terms.items():
            if not nu:
                for (alpha, beta), c2 in other.terms.items():
                    out[(mu + alpha, beta)] += c * c2
                continue
            for _, beta, c2 in empty:
                out[(mu, beta + nu)] += c * c2
            lv = len(nu)
            for alpha, beta, c2 in index.get(nu[0], ()):
                la = len(alpha)
                if lv <= la:
                    if alpha[:lv] == nu:
                        out[(mu + alpha[lv:], beta)] += c * c2
                elif nu[:la] == alpha:
                    out[(mu, beta + nu[la:])] += c * c2
        return CuntzElement._raw(self.size, out)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self * other
        return NotImplemented

    def adjoint(self):
        return CuntzElement._raw(self.size, {(nu, mu): np.conj(c) for (mu, nu), c in self.terms.items()})

    def max_length(self):
        return max((max(len(mu), len(nu)) for mu, nu in self.terms), default=0)

    def components(self):
        """
        terms split by gauge degree |μ| − |ν|
        """
        parts = defaultdict(dict)
        for (mu, nu), c in self.terms.items():
            parts[len(mu) - len(nu)][(mu, nu)] = c
        return dict(parts)

    def max_abs(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def zero_residual(self):
        """
        Largest coefficient of the element in normal form; zero exactly when the element vanishes in 𝒪_N
        """
        return max((_component_residual(part, self.size) for part in self.components().values()), default=0.0)

    def scalar_value(self):
        """
        λ with x = λ·1 when x is scalar, read off by compressing with S_0*·S_0
        """
        terms = self.components().get(0, {})
        while terms and any(mu or nu for mu, nu in terms):
            child = defaultdict(complex)
            for (mu, nu), c in terms.items():
                if mu and nu:
                    if mu[0] == 0 and nu[0] == 0:
                        child[(mu[1:], nu[1:])] += c
                elif mu:
                    if mu[0] == 0:
                        child[(mu[1:] + (0,), ())] += c
                elif nu:
                    if nu[0] == 0:
                        child[((), nu[1:] + (0,))] += c
                else:
                    child[((), ())] += c
            terms = child
        return complex(terms.get(((), ()), 0.0))

    def scalar_residual(self):
        return (self - self.scalar_value()).zero_residual()

    def equals(self, other, tol=ORACLE_TOLERANCE):
        return (self - other).zero_residual() < tol

    def to_json(self):
        return [{"word": [list(mu), "*", list(nu)], "coeff": [float(c.real), float(c.imag)]}
                for (mu, nu), c in sorted(self.terms.items())]

    def __repr__(self):
        return f"CuntzElement(size={self.size}, terms={len(self.terms)})"


def _component_residual(terms, size):
    """
    Residual of a single-degree component, peeling one letter from each side per level
    """
    if not terms:
        return 0.0
    if all(not nu for _, nu in terms) or all(not mu for mu, _ in terms):
        return max(abs(c) for c in terms.values())
    children = defaultdict(lambda: defaultdict(complex))
    for (mu, nu), c in terms.items():
        if mu and nu:
            children[(mu[0], nu[0])][(mu[1:], nu[1:])] += c
        elif mu:
            for j in range(size):
                children[(mu[0], j)][(mu[1:] + (j,), ())] += c
        elif nu:
            for i in range(size):
                children[(i, nu[0])][((), nu[1:] + (i,))] += c
        else:
            for i in range(size):
                children[(i, i)][((), ())] += c
    return max(_component_residual(child, size) for child in children.values())


def normalize(x, level=None):
    """
    Raises every word pair to common length by inserting Σ_i S_iS_i* = 1
    :param x: CuntzElement
    :param level: target length, at least the longest word in x
    :return: CuntzElement whose coefficient table determines x
    """
    longest = x.max_length()
    if level is None:
        level = longest
    if level < longest:
        raise InputError(f"Normalization level {level} is below the longest word length {longest}")
    if level > MAX_CUNTZ_LEVEL:
        raise ResourceError(f"Normalization level {level} exceeds the word length bound {MAX_CUNTZ_LEVEL}")
    out = defaultdict(complex)
    for (mu, nu), c in x.terms.items():
        r = level - max(len(mu), len(nu))
        for w in itertools.product(range(x.size), repeat=r):
            out[(mu + w, nu + w)] += c
    return CuntzElement._raw(x.size, out)


class GeneratorEndomorphism:
    """
    ρ and α_g of an admissible tuple on the generators of 𝒪_{n+m}
    """

    def __init__(self, tup, max_terms=DEFAULT_MAX_ORACLE_TERMS):
        self.logger = LoggerManager.get_logger(__name__)
        self.tuple = tup
        self.max_terms = int(max_terms)
        self.n = tup.n
        self.m = tup.m
        self.size = tup.n + tup.m
        self.d = tup.d_value
        self.unitaries = [self._unitary(g) for g in range(self.n)]
        self.images = self._images()

    def s(self, g):
        return CuntzElement.generator(self.size, g)

    def t(self, i):
        return CuntzElement.generator(self.size, self.n + i)

    def vector(self, v):
        """
        Σ_x v_x·T_x
        """
        return CuntzElement.combination(self.size, range(self.n, self.size), v)

    def _unitary(self, g):
        T = self.tuple
        n = self.n
        terms = defaultdict(complex)
        for h in range(n):
            terms[((h,), (h,))] += T.chi[h, g]
        for i, j in itertools.product(range(self.m), repeat=2):
            terms[((n + i,), (n + j,))] += T.UK[g][i, j]
        return CuntzElement._raw(self.size, terms)

    def _images(self):
        T = self.tuple
        n, m, d = self.n, self.m, self.d
        U1, U2, W, L = T.J1.matrix, T.J2.matrix, T.W, T.L

        rho_se = defaultdict(complex)
        for h in range(n):
            rho_se[((h,), ())] += T.eps / d
        for i, x in itertools.product(range(m), repeat=2):
            rho_se[((n + i, n + x), ())] += U1[x, i] / np.sqrt(d)
        rho_se = CuntzElement._raw(self.size, rho_se)

        images = []
        for g in range(n):
            U = self.unitaries[g]
            images.append(U * rho_se * U.adjoint())

        for y in range(m):
            terms = defaultdict(complex)
            for h in range(n):
                dual = T.V[h] @ U2[:, y]
                moved = (T.V[h] @ W)[:, y]
                for x in range(m):
                    terms[((h,), (n + x,))] += np.conj(dual[x]) / np.sqrt(d)
                    terms[((n + x, h), (h,))] += moved[x]
            for x1, x2, x3 in zip(*np.nonzero(np.abs(L[..., y]) > PRUNE_THRESHOLD)):
                terms[((n + int(x1), n + int(x2)), (n + int(x3),))] += L[x1, x2, x3, y]
            images.append(CuntzElement._raw(self.size, terms))
        return images

    def alpha(self, g, letter):
        """
        α_g on a generator: S_h ↦ S_{gh}, T ↦ V(g)T
        """
        if letter < self.n:
            return self.s(int(self.tuple.mul[g, letter]))
        return self.vector(self.tuple.V[g][:, letter - self.n])

    def apply(self, x):
        """
        ρ(x) by recursion on the first letter of μ; the μ-empty part is handled through adjoints
        """
        groups = defaultdict(dict)
        rest = {}
        out = defaultdict(complex)
        for (mu, nu), c in x.terms.items():
            if mu:
                groups[mu[0]][(mu[1:], nu)] = c
            elif nu:
                rest[(nu, ())] = np.conj(c)
            else:
                out[((), ())] += c
        for letter, sub in groups.items():
            image = self.images[letter]
            if len(sub) == 1 and ((), ()) in sub:
                part = image * sub[((), ())]
            else:
                part = image * self.apply(CuntzElement._raw(self.size, sub))
            for k, v in part.terms.items():
                out[k] += v
        if rest:
            for k, v in self.apply(CuntzElement._raw(self.size, rest)).adjoint().terms.items():
                out[k] += v
        return CuntzElement._raw(self.size, out)

    def isometry_residual(self):
        worst = 0.0
        for i, j in itertools.product(range(self.size), repeat=2):
            product = self.images[i].adjoint() * self.images[j]
            worst = max(worst, (product - (1.0 if i == j else 0.0)).zero_residual())
        return worst

    def completeness_residual(self):
        total = CuntzElement.zero(self.size)
        for image in self.images:
            total = total + image * image.adjoint()
        return (total - 1.0).zero_residual()

    def _held(self, count, what):
        if count > self.max_terms:
            raise ResourceError(f"Oracle {what} holds {count} terms, above the bound of {self.max_terms}")

    def estimate_terms(self, letter):
        """
        Expected size of one block S_a*ρ²(x) for the generator x, counting a product X·Y as |X|·|Y|/N terms
        :param letter: generator index
        :return: float
        """
        sizes = [len(image.terms) for image in self.images]
        total = 0.0
        for mu, nu in self.images[letter].terms:
            word = mu + nu
            product = 1.0
            for x in word:
                product *= sizes[x]
            total += product / self.size ** max(len(word) - 1, 0)
        return total / self.size

    def check_budget(self):
        """
        Raises ResourceError before any ρ² expansion whose blocks would exceed max_terms
        """
        estimates = [self.estimate_terms(letter) for letter in range(self.size)]
        letter = int(np.argmax(estimates))
        self.logger.debug(f"oracle alphabet={self.size}: largest block estimate {estimates[letter]:.3g} "
                          f"on letter {letter}")
        if estimates[letter] > self.max_terms:
            raise ResourceError(f"Oracle on alphabet {self.size}: ρ² of generator {letter} is estimated at "
                                f"{estimates[letter]:.3g} terms per block, above the bound of {self.max_terms}")

    def _blocks(self, x):
        """
        S_a*·ρ(x) for every letter a in turn, from ρ(x) = Σ_l ρ(S_l)·ρ(x_l) + ρ(x_∅)
        where x_l collects the words of x after their first letter l
        """
        groups = defaultdict(dict)
        rest = {}
        for (mu, nu), c in x.terms.items():
            if mu:
                groups[mu[0]][(mu[1:], nu)] = c
            else:
                rest[(mu, nu)] = c
        tails = {letter: self.apply(CuntzElement._raw(self.size, sub)) for letter, sub in groups.items()}
        head = self.apply(CuntzElement._raw(self.size, rest)) if rest else None
        self._held(sum(len(tail.terms) for tail in tails.values()), "word tails")

        for a in range(self.size):
            adjoint = CuntzElement.generator(self.size, a).adjoint()
            out = defaultdict(complex)
            for letter, tail in tails.items():
                for k, v in ((adjoint * self.images[letter]) * tail).terms.items():
                    out[k] += v
            if head is not None:
                for k, v in (adjoint * head).terms.items():
                    out[k] += v
            self._held(len(out), f"block {a}")
            yield a, CuntzElement._raw(self.size, out)

    def relation_residual(self, letter):
        """
        ρ²(x) − Σ_g S_gα_g(x)S_g* − Σ_i T_iρ(x)T_i* for a generator x, compressed by S_a* one letter a at a time
        """
        x = self.images[letter]
        worst = 0.0
        terms = 0
        for a, block in self._blocks(x):
            if a < self.n:
                rhs = self.alpha(a, letter) * self.s(a).adjoint()
            else:
                rhs = x * self.t(a - self.n).adjoint()
            worst = max(worst, (block - rhs).zero_residual())
            terms = max(terms, len(block.terms))
        self.logger.debug(f"relation letter={letter}: largest block {terms} terms, residual {worst:.3e}")
        return worst

    def rho_u_residual(self, g):
        """
        ρ(U(g)) − Σ_h S_hS_{hg}* − Σ w_ij·T_iU(g)T_j* with w = (j₂∘j₁⁻¹)U_𝒦(g)(j₂∘j₁⁻¹)*
        """
        T = self.tuple
        lhs = self.apply(self.unitaries[g])
        terms = defaultdict(complex)
        for h in range(self.n):
            terms[((h,), (int(T.mul[h, g]),))] += 1.0
        rhs = CuntzElement._raw(self.size, terms)
        w = T.W @ T.UK[g] @ T.W.conj().T
        for i, j in itertools.product(range(self.m), repeat=2):
            if abs(w[i, j]) > PRUNE_THRESHOLD:
                rhs = rhs + self.t(i) * self.unitaries[g] * self.t(j).adjoint() * w[i, j]
        return (lhs - rhs).zero_residual()

    def oracle_check(self, tol=ORACLE_TOLERANCE, progress=False):
        """
        Cuntz relations of ρ, the defining relation of ρ² on every generator and the formula for ρ(U(g))
        :return: ResidualReport
        """
        self.check_budget()
        relation = 0.0
        for letter in tqdm(range(self.size), disable=not progress, ncols=tqdm_ncols, bar_format=tqdm_bar_format,
                           postfix=tqdm_case_postfix("rho^2")):
            relation = max(relation, _safe(lambda: self.relation_residual(letter)))
        residuals = {
            "isometry": _safe(self.isometry_residual),
            "completeness": _safe(self.completeness_residual),
            "endomorphism_relation": relation,
            "rho_u": _safe(lambda: max(self.rho_u_residual(g) for g in range(self.n))),
        }
        report = ResidualReport(residuals, tol)
        self.logger.info(f"oracle alphabet={self.size}: overall residual {report.overall:.3e}")
        return report

    def nu31_words(self):
        """
        Σ_i T_i*·Φ⁻¹(E(Φ(T_i))) with Φ(T) = ρ(T)S_e, E = d·S_e*ρ(·)S_e and Φ⁻¹ = ε·d·S_e*ρ(·)
        """
        eps, d = self.tuple.eps, self.d
        se = self.s(0)
        total = CuntzElement.zero(self.size)
        for i in range(self.m):
            phi = self.images[self.n + i] * se
            rotated = se.adjoint() * self.apply(phi) * se * d
            back = se.adjoint() * self.apply(rotated) * (eps * d)
            total = total + self.t(i).adjoint() * back
        return total.scalar_value(), total.scalar_residual()

    def nu41_words(self):
        """
        Σ_{i,j} T_i*j₂(T_i)*ρ(T_j)j₁(T_j) as a scalar, with its scalarity residual
        """
        U1, U2 = self.tuple.J1.matrix, self.tuple.J2.matrix
        left = CuntzElement.zero(self.size)
        right = CuntzElement.zero(self.size)
        for i in range(self.m):
            left = left + (self.vector(U2[:, i]) * self.t(i)).adjoint()
            right = right + self.images[self.n + i] * self.vector(U1[:, i])
        total = left * right
        return total.scalar_value(), total.scalar_residual()


@dataclass
class FrobeniusSchurIndicators:
    nu21: int
    nu31: complex
    nu41: complex
    residuals: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.nu21, self.nu31, self.nu41))

    def to_json(self):
        def pair(z):
            return [float(np.real(z)), float(np.imag(z))]
        return {"nu21": self.nu21, "nu31": pair(self.nu31), "nu41": pair(self.nu41), "residuals": self.residuals}


def oracle_check(tup, tol=ORACLE_TOLERANCE, progress=False, max_terms=DEFAULT_MAX_ORACLE_TERMS):
    return GeneratorEndomorphism(tup, max_terms).oracle_check(tol, progress)


def fs_indicators(tup, cross_check=False):
    """
    ν₂₁ = ε, ν₃₁ = tr(j₁∘j₂), ν₄₁ = (1/d)Σ_g conj(χ_g(g)) + Σ_{i,j} T_i*j₂(T_i)*ρ(T_j)j₁(T_j)
    :param cross_check: also evaluate ν₃₁ through Cuntz words
    """
    engine = GeneratorEndomorphism(tup)
    nu31 = complex(np.trace(tup.J1.matrix @ np.conj(tup.J2.matrix)))
    scalar, scalarity = engine.nu41_words()
    nu41 = complex(np.sum(np.conj(np.diag(tup.chi))) / tup.d_value + scalar)
    residuals = {"nu41_scalarity": scalarity}
    if cross_check:
        words, words_scalarity = engine.nu31_words()
        residuals["nu31_words"] = abs(words - nu31)
        residuals["nu31_scalarity"] = words_scalarity
    return FrobeniusSchurIndicators(int(tup.eps), nu31, nu41, residuals)
