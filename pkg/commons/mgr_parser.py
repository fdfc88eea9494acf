from commons.funcs_abelian import FiniteAbelianGroup, GroupAutomorphism, Subgroup
from commons.funcs_common import InputError
from commons.mgr_logger import LoggerManager

from fractions import Fraction
from pyparsing import Word, delimitedList, Optional, Group, nums, CaselessKeyword, CaselessLiteral, Suppress, \
                      ParseBaseException, tokenMap, Literal, StringEnd, oneOf

import cmath
import math

LBRACKET = Suppress("(").setName("LBRACKET")
RBRACKET = Suppress(")").setName("RBRACKET")

INTEGER = Word(nums).setParseAction(tokenMap(int)).setName("integer")
SIGNED_INTEGER = (Optional(oneOf("+ -"), default="+") + Word(nums))\
    .setParseAction(lambda toks: int(toks[0] + toks[1])).setName("signed_integer")

# Z2xZ2xZ3, Z4*Z2, Z_5, or 1 for the trivial group
CYCLIC = (Suppress(CaselessLiteral("Z")) + Optional(Suppress("_")) + INTEGER).setName("cyclic")
GROUP_SPEC = (CaselessKeyword("trivial") | Literal("1") |
              delimitedList(CYCLIC, delim=oneOf("x X * ×"))).setResultsName("factors")

# (1,0,2) or a bare integer for cyclic groups
ELEMENT = (Group(LBRACKET + delimitedList(SIGNED_INTEGER) + RBRACKET) |
           Group(SIGNED_INTEGER)).setName("element")
ELEMENT_LIST = delimitedList(ELEMENT)

# <(1,1)> generators, {(0,0),(1,1),(2,2)} elements
SUBGROUP_SPEC = (Suppress("<") + Optional(Group(ELEMENT_LIST).setResultsName("generators")) + Suppress(">")) | \
                (Suppress("{") + Group(ELEMENT_LIST).setResultsName("elements") + Suppress("}"))

# -1, neg, id, k (multiplication by k), or [(0,1),(1,0)] images of the generators
AUT_SPEC = CaselessKeyword("id").setResultsName("identity") | \
           CaselessKeyword("neg").setResultsName("negation") | \
           (Suppress("[") + Group(ELEMENT_LIST).setResultsName("images") + Suppress("]")) | \
           SIGNED_INTEGER.setResultsName("scalar")

# ±1, ±i, or e(p/q) = exp(2πi·p/q)
ROOT_OF_UNITY = (Suppress(CaselessLiteral("e")) + LBRACKET + SIGNED_INTEGER + Suppress("/") + INTEGER + RBRACKET)\
    .setParseAction(lambda toks: cmath.exp(2j * math.pi * Fraction(toks[0], toks[1])))
UNIT_VALUE = (Optional(oneOf("+ -"), default="+") +
              (Literal("i").setParseAction(lambda: 1j) | Literal("1").setParseAction(lambda: 1 + 0j) | ROOT_OF_UNITY))\
    .setParseAction(lambda toks: -toks[1] if toks[0] == "-" else toks[1])

# (h)(k)=value; ...
COCYCLE_ENTRY = Group(ELEMENT + ELEMENT + Suppress("=") + UNIT_VALUE)
COCYCLE_SPEC = delimitedList(COCYCLE_ENTRY, delim=";") + Optional(Suppress(";"))


def _parse(expr, text, what):
    try:
        return (expr + StringEnd()).parseString(text.strip())
    except ParseBaseException as pbe:
        raise InputError(f"You have an error in the {what} syntax: \n"
                         f"    input: {text} \n"
                         f"    col: {pbe.col} (position {pbe.loc}) \n"
                         f"    {pbe.msg}")


class GroupSpec:
    """
    A parsed group spec: the cyclic factors as written and the canonical invariant-factor group.
    Elements given on the command line use the written coordinates.
    """

    def __init__(self, text):

        self.logger = LoggerManager.get_logger(__name__)
        self.text = text

        result = _parse(GROUP_SPEC, text, "group spec")
        factors = [int(x) for x in result if str(x).lower() not in ("trivial", "1")]
        if any(n < 1 for n in factors):
            raise InputError(f"Cyclic factor orders must be positive: {text}")
        factors = [n for n in factors if n > 1]

        self.presentation = FiniteAbelianGroup.from_factors(factors)
        self.group = self.presentation.group
        self.logger.debug(f"group spec {text} -> {self.group.label()}")

    @property
    def factors(self):
        return self.presentation.factors

    def element(self, residues):
        residues = tuple(int(x) for x in residues)
        if len(residues) != len(self.factors):
            raise InputError(f"Element {residues} does not have {len(self.factors)} coordinates")
        return self.presentation.to_canonical(residues)

    def parse_element(self, text):
        return self.element(_parse(ELEMENT, text, "element")[0])

    def parse_subgroup(self, text):
        """
        :param text: <g1,g2,...> generators or {h1,h2,...} the full element list
        :return: Subgroup of the canonical group
        """
        result = _parse(SUBGROUP_SPEC, text, "subgroup")
        if "elements" in result:
            return Subgroup.from_elements(self.group, [self.element(x) for x in result["elements"]])
        gens = [self.element(x) for x in result.get("generators", [])]
        return Subgroup.generated_by(self.group, gens)

    def parse_automorphism(self, text):
        """
        :param text: id, neg, an integer k for g ↦ kg, or [x1,...,xr] images of the written generators
        :return: GroupAutomorphism
        """
        G = self.group
        result = _parse(AUT_SPEC, text, "automorphism")
        if "identity" in result:
            theta = GroupAutomorphism.identity(G)
        elif "negation" in result:
            theta = GroupAutomorphism.negation(G)
        elif "scalar" in result:
            k = int(result["scalar"])
            theta = GroupAutomorphism(G, tuple(G.scale(k, e) for e in G.generators()))
        else:
            images = [self.element(x) for x in result["images"]]
            if len(images) != len(self.factors):
                raise InputError(f"Automorphism needs {len(self.factors)} generator images, got {len(images)}")
            canonical_images = []
            for e in G.generators():
                written = self.presentation.from_canonical(e)
                out = G.zero
                for x, img in zip(written, images):
                    out = G.add(out, G.scale(x, img))
                canonical_images.append(out)
            theta = GroupAutomorphism(G, tuple(canonical_images))
        if not theta.is_bijective():
            raise InputError(f"Map {text} is not an automorphism of {G.label()}")
        return theta

    def parse_cocycle(self, text, H):
        """
        :param text: entries (h)(k)=value separated by ';' with value ±1, ±i or e(p/q); missing pairs are 1
        :param H: Subgroup the cocycle lives on
        :return: {(h, k): complex}
        """
        omega = {(h, k): 1 + 0j for h in H.elements for k in H.elements}
        for h, k, value in _parse(COCYCLE_SPEC, text, "cocycle"):
            key = (self.element(h), self.element(k))
            if key not in omega:
                raise InputError(f"Cocycle entry {key} lies outside the subgroup")
            omega[key] = complex(value)
        return omega


def parse_group(text):
    return GroupSpec(text).group
