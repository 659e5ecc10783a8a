"""
Exact arithmetic kernels for implicitization

Three polynomial shapes are used throughout the toolkit, all over QQ:

- UniPoly: polynomial in the curve parameter t (sympy ring ``T_RING``)
- MultiPoly: sparse polynomial in the sphere coordinates (u, y0, ..., y4),
  stored in ``Y_RING`` with graded lexicographic order u > y0 > ... > y4
- TPoly: polynomial in t whose coefficients are MultiPolys

PolyVecs are plain tuples of UniPolys. Resultants are Sylvester
determinants taken at caller-declared formal degrees, so roots at infinity
of the homogenized inputs are accounted for.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ, ZZ
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyElement, ring

from error_utils import ComputationError, InputError

logger = logging.getLogger(__name__)

Y_RING, U, Y0, Y1, Y2, Y3, Y4 = ring("u,y0,y1,y2,y3,y4", QQ, grlex)
T_RING, T = ring("t", QQ)

VARIABLE_NAMES = ("u", "y0", "y1", "y2", "y3", "y4")

Rational = QQ.dtype
UniPoly = PolyElement
MultiPoly = PolyElement
PolyVec = Tuple[PolyElement, ...]
Monomial = Tuple[int, ...]

DETERMINANT_KERNELS = ("expansion", "bareiss")


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def parse_rational(value: Union[int, str, Fraction], field: str = "value") -> Rational:
    """
    Parse an exact rational from an integer, a Fraction or a string such as "3/4".

    Args:
        value: the raw value
        field: name reported in the error message

    Returns:
        QQ element

    Raises:
        InputError: for floats, booleans and malformed strings
    """
    if isinstance(value, bool) or not isinstance(value, (int, str, Fraction)):
        raise InputError(f"{field}: expected an integer or rational, got {value!r}", {'field': field})
    try:
        fraction = Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{field}: malformed rational {value!r}", {'field': field})
    return QQ(fraction.numerator, fraction.denominator)


# ---------------------------------------------------------------------------
# UniPoly and PolyVec helpers
# ---------------------------------------------------------------------------

def uni_poly(coeffs: Iterable) -> UniPoly:
    """Build a UniPoly from coefficients listed low degree first"""
    return T_RING.from_dict({(k,): QQ.convert(c) for k, c in enumerate(coeffs) if c})


def uni_degree(p: UniPoly) -> int:
    """Degree in t, -1 for the zero polynomial"""
    return p.degree() if p else -1


def uni_coeffs(p: UniPoly) -> List[Rational]:
    """Coefficients low degree first; empty for zero"""
    return [p.get((k,), QQ.zero) for k in range(uni_degree(p) + 1)]


def uni_eval(p: UniPoly, t0: Rational) -> Rational:
    value = QQ.zero
    for c in reversed(uni_coeffs(p)):
        value = value * t0 + c
    return value


def uni_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic greatest common divisor"""
    if not a and not b:
        raise ComputationError("gcd of zero polynomials")
    return a.gcd(b).monic()


def uni_gcd_all(polys: Iterable[UniPoly]) -> UniPoly:
    g = T_RING.zero
    for p in polys:
        if p:
            g = uni_gcd(g, p)
            if g == 1:
                break
    if not g:
        raise ComputationError("gcd of zero polynomials")
    return g


def vec_degree(A: Sequence[UniPoly]) -> int:
    return max(uni_degree(p) for p in A)


def leading_vector(A: Sequence[UniPoly]) -> Tuple[Rational, ...]:
    """Coefficient vector of t^deg A"""
    delta = vec_degree(A)
    return tuple(p.get((delta,), QQ.zero) for p in A)


def vec_diff(A: Sequence[UniPoly]) -> PolyVec:
    return tuple(p.diff(T) for p in A)


def vec_exquo(A: Sequence[UniPoly], g: UniPoly) -> PolyVec:
    return tuple(p.exquo(g) for p in A)


def wedge(A: Sequence[UniPoly], B: Sequence[UniPoly]) -> PolyVec:
    """Plücker coordinates [i,j] = A_i B_j - A_j B_i in lexicographic order of (i, j)"""
    if len(A) != len(B):
        raise ComputationError(f"wedge of vectors of lengths {len(A)} and {len(B)}")
    return tuple(A[i] * B[j] - A[j] * B[i] for i, j in combinations(range(len(A)), 2))


# ---------------------------------------------------------------------------
# TPoly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TPoly:
    """Polynomial in t with MultiPoly coefficients; coeffs[k] multiplies t^k"""
    coeffs: Tuple[MultiPoly, ...]

    def __post_init__(self):
        coeffs = [Y_RING(c) if not isinstance(c, PolyElement) else c for c in self.coeffs]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        object.__setattr__(self, 'coeffs', tuple(coeffs))

    @classmethod
    def from_uni(cls, p: UniPoly, factor: Optional[MultiPoly] = None) -> "TPoly":
        """Lift p(t) to a TPoly, optionally multiplied by a MultiPoly"""
        factor = Y_RING.one if factor is None else factor
        return cls(tuple(factor * c for c in uni_coeffs(p)))

    @classmethod
    def linear_form(cls, vec: Sequence[UniPoly], variables: Optional[Sequence[MultiPoly]] = None) -> "TPoly":
        """The form vec(t) . x in the given variables (default: the first len(vec) of u, y0, ...)"""
        variables = Y_RING.gens[:len(vec)] if variables is None else variables
        if len(variables) != len(vec):
            raise ComputationError(f"linear form needs {len(vec)} variables, got {len(variables)}")
        degree = vec_degree(vec)
        coeffs = []
        for k in range(degree + 1):
            c = Y_RING.zero
            for entry, x in zip(vec, variables):
                a = entry.get((k,), QQ.zero)
                if a:
                    c += x * a
            coeffs.append(c)
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> MultiPoly:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Y_RING.zero

    @property
    def leading_coeff(self) -> MultiPoly:
        return self.coeffs[-1] if self.coeffs else Y_RING.zero

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __add__(self, other: "TPoly") -> "TPoly":
        size = max(len(self.coeffs), len(other.coeffs))
        return TPoly(tuple(self.coeff(k) + other.coeff(k) for k in range(size)))

    def __neg__(self) -> "TPoly":
        return TPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "TPoly") -> "TPoly":
        return self + (-other)

    def __mul__(self, other) -> "TPoly":
        if not isinstance(other, TPoly):
            return TPoly(tuple(c * other for c in self.coeffs))
        if not self or not other:
            return TPoly(())
        out = [Y_RING.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return TPoly(tuple(out))

    def diff(self) -> "TPoly":
        """Derivative with respect to t"""
        return TPoly(tuple(c * k for k, c in enumerate(self.coeffs) if k > 0))

    def map_coeffs(self, fn: Callable[[MultiPoly], MultiPoly]) -> "TPoly":
        return TPoly(tuple(fn(c) for c in self.coeffs))


# ---------------------------------------------------------------------------
# Determinants and resultants
# ---------------------------------------------------------------------------

def _unit_like(entry, value: int):
    if isinstance(entry, PolyElement):
        return entry.ring(value)
    return QQ(value)


def _check_square(matrix: Sequence[Sequence]) -> int:
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise ComputationError("determinant of a non-square matrix",
                               details={'shape': [len(matrix)] + sorted({len(row) for row in matrix})})
    return n


def _exact_quotient(a, b):
    if b == 1:
        return a
    if isinstance(a, PolyElement):
        try:
            return a.exquo(b)
        except ExactQuotientFailed:
            raise ComputationError("inexact division in fraction-free elimination")
    return a / b


def ff_determinant(matrix: Sequence[Sequence]):
    """
    Determinant by fraction-free (Bareiss) elimination.

    Every division by the previous pivot is exact; a failing division
    raises ComputationError. Entries may be ring elements or rationals.
    """
    n = _check_square(matrix)
    M = [list(row) for row in matrix]
    one = _unit_like(M[0][0], 1)
    zero = _unit_like(M[0][0], 0)
    sign = 1
    previous = one

    for k in range(n - 1):
        pivot_row = next((i for i in range(k, n) if M[i][k]), None)
        if pivot_row is None:
            return zero
        if pivot_row != k:
            M[k], M[pivot_row] = M[pivot_row], M[k]
            sign = -sign
        pivot = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = _exact_quotient(M[i][j] * pivot - M[i][k] * M[k][j], previous)
            M[i][k] = zero
        previous = pivot

    det = M[n - 1][n - 1]
    return det if sign > 0 else -det


def _permutation_sign(order: Sequence[int]) -> int:
    inversions = sum(1 for i, j in combinations(range(len(order)), 2) if order[i] > order[j])
    return -1 if inversions % 2 else 1


def expansion_determinant(matrix: Sequence[Sequence]):
    """
    Division-free determinant by row-wise minor expansion.

    Partial minors are keyed by the set of columns already used. Rows are
    processed in order of their first nonzero column and partial minors
    that leave a column no remaining row can fill are dropped, which keeps
    the state count small on banded (Sylvester) matrices.
    """
    n = _check_square(matrix)
    zero = _unit_like(matrix[0][0], 0)
    one = _unit_like(matrix[0][0], 1)

    first_nonzero = [next((j for j, e in enumerate(row) if e), n) for row in matrix]
    order = sorted(range(n), key=lambda i: (first_nonzero[i], i))
    rows = [matrix[i] for i in order]

    last_row = [max((r for r in range(n) if rows[r][c]), default=-1) for c in range(n)]
    if min(last_row) < 0:
        return zero
    required = [sum(1 << c for c in range(n) if last_row[c] < r) for r in range(n + 1)]

    states: Dict[int, object] = {0: one}
    for r, row in enumerate(rows):
        need = required[r + 1]
        entries = [(c, e) for c, e in enumerate(row) if e]
        following: Dict[int, object] = {}
        for mask, value in states.items():
            for c, e in entries:
                bit = 1 << c
                if mask & bit:
                    continue
                new_mask = mask | bit
                if new_mask & need != need:
                    continue
                term = value * e
                if bin(mask >> (c + 1)).count("1") % 2:
                    term = -term
                following[new_mask] = following[new_mask] + term if new_mask in following else term
        states = {mask: value for mask, value in following.items() if value}
        if not states:
            return zero

    det = states.get((1 << n) - 1, zero)
    return det if _permutation_sign(order) > 0 else -det


def determinant(matrix: Sequence[Sequence], kernel: str = "expansion"):
    if kernel == "expansion":
        return expansion_determinant(matrix)
    if kernel == "bareiss":
        return ff_determinant(matrix)
    raise ComputationError(f"Unknown determinant kernel: {kernel}", details={'allowed': list(DETERMINANT_KERNELS)})


def sylvester_matrix(f: TPoly, g: TPoly, deg_f: int, deg_g: int) -> List[List[MultiPoly]]:
    """Sylvester matrix at formal degrees: deg_g shifted rows of f, then deg_f rows of g"""
    if deg_f < 0 or deg_g < 0 or deg_f < f.degree or deg_g < g.degree:
        raise ComputationError(
            "formal degree below actual degree",
            details={'deg_f': deg_f, 'actual_f': f.degree, 'deg_g': deg_g, 'actual_g': g.degree}
        )
    if deg_f == 0 and deg_g == 0:
        raise ComputationError("no variable to eliminate")

    size = deg_f + deg_g
    matrix = []
    for poly, formal, shifts in ((f, deg_f, deg_g), (g, deg_g, deg_f)):
        for i in range(shifts):
            row = [Y_RING.zero] * size
            for k in range(formal + 1):
                row[i + formal - k] = poly.coeff(k)
            matrix.append(row)
    return matrix


def sylvester_resultant(f: TPoly, g: TPoly, deg_f: int, deg_g: int, kernel: str = "expansion") -> MultiPoly:
    """
    Resultant with respect to t, returned raw (not normalized).

    Args:
        f, g: the two TPolys
        deg_f, deg_g: formal degrees, at least the actual t-degrees
        kernel: "expansion" (default) or "bareiss"

    Raises:
        ComputationError: formal degrees invalid or both zero
    """
    matrix = sylvester_matrix(f, g, deg_f, deg_g)
    logger.debug(f"Sylvester matrix of size {len(matrix)} at formal degrees ({deg_f}, {deg_g})")
    return determinant(matrix, kernel)


# ---------------------------------------------------------------------------
# MultiPoly utilities
# ---------------------------------------------------------------------------

def _monomial_add(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _from_terms(terms: Dict[Monomial, Rational]) -> MultiPoly:
    return Y_RING.from_dict({m: c for m, c in terms.items() if c})


def canonical_form(F: MultiPoly) -> MultiPoly:
    """
    Scale F to coprime integer coefficients with a positive coefficient on
    the graded-lex leading monomial (u > y0 > y1 > y2 > y3 > y4).
    """
    if not F:
        raise ComputationError("canonical form of the zero polynomial")
    denominator = ZZ.one
    for c in F.itercoeffs():
        denominator = ZZ.lcm(denominator, QQ.denom(c))
    F = F.mul_ground(QQ(denominator))

    content = ZZ.zero
    for c in F.itercoeffs():
        content = ZZ.gcd(content, QQ.numer(c))
    F = F.quo_ground(QQ(content))

    return -F if F.LC < 0 else F


def total_degree(F: MultiPoly) -> int:
    if not F:
        raise ComputationError("degree of the zero polynomial")
    return max(sum(m) for m in F.itermonoms())


def monomial_count(F: MultiPoly) -> int:
    return len(F)


def weighted_degree(F: MultiPoly) -> int:
    """Degree counting u twice, y0 zero times and y1..y4 once"""
    if not F:
        raise ComputationError("weighted degree of the zero polynomial")
    return max(2 * m[0] + m[2] + m[3] + m[4] + m[5] for m in F.itermonoms())


def exact_divide(F: MultiPoly, G: MultiPoly) -> Optional[MultiPoly]:
    """Quotient Q with F = Q*G, or None when G does not divide F"""
    if not G:
        raise ComputationError("division by the zero polynomial")
    try:
        return F.exquo(G)
    except ExactQuotientFailed:
        return None


def compose(F: MultiPoly, images: Dict[int, MultiPoly]) -> MultiPoly:
    """
    Substitute variables simultaneously: variable index i -> images[i].

    Powers of each image are cached, so pulling back large resultants
    through quadratic maps stays linear in the number of terms.
    """
    cache = {i: [Y_RING.one] for i in images}
    terms: Dict[Monomial, Rational] = {}
    for monom, coeff in F.iterterms():
        kept = list(monom)
        factor = None
        for i, image in images.items():
            e = monom[i]
            kept[i] = 0
            if e:
                powers = cache[i]
                while len(powers) <= e:
                    powers.append(powers[-1] * image)
                factor = powers[e] if factor is None else factor * powers[e]
        kept = tuple(kept)
        if factor is None:
            terms[kept] = terms.get(kept, QQ.zero) + coeff
            continue
        for m, c in factor.iterterms():
            key = _monomial_add(m, kept)
            terms[key] = terms.get(key, QQ.zero) + coeff * c
    return _from_terms(terms)


def dehomogenize(F: MultiPoly) -> MultiPoly:
    """Set y0 = 1"""
    return compose(F, {1: Y_RING.one})


def evaluate(F: MultiPoly, point: Sequence[Rational]) -> Rational:
    """Value of F at a point given in the order (u, y0, ..., y4)"""
    value = QQ.zero
    for monom, coeff in F.iterterms():
        term = coeff
        for x, e in zip(point, monom):
            if e:
                term *= QQ.convert(x) ** e
        value += term
    return value


def substitution_quadric(d: Optional[Rational] = None) -> MultiPoly:
    """Numerator replacing u y0: y1²+y2²+y3²-y4², or y1²+y2²+y3²-d²y0² for an offset"""
    base = Y1**2 + Y2**2 + Y3**2
    if d is None:
        return base - Y4**2
    return base - Y0**2 * (QQ.convert(d) ** 2)


def substitute_u_raw(F: MultiPoly, d: Optional[Rational] = None) -> Tuple[MultiPoly, int]:
    """
    Replace u by Q/y0 and clear denominators.

    Returns the unnormalized result and k_sub, the power of y0 that was
    finally multiplied in. Only y0 factors introduced by the substitution
    are stripped, so inputs without u pass through unchanged.
    """
    if not F:
        raise ComputationError("substitution into the zero polynomial")
    k = max(m[0] for m in F.itermonoms())
    if k == 0:
        return F, 0

    quadric = substitution_quadric(d)
    powers = [Y_RING.one]
    for _ in range(k):
        powers.append(powers[-1] * quadric)

    terms: Dict[Monomial, Rational] = {}
    for monom, coeff in F.iterterms():
        a = monom[0]
        rest = (0, monom[1] + k - a) + tuple(monom[2:])
        for m, c in powers[a].iterterms():
            key = _monomial_add(m, rest)
            terms[key] = terms.get(key, QQ.zero) + coeff * c
    result = _from_terms(terms)
    if not result:
        raise ComputationError("substitution annihilated the polynomial")

    shift = min(min(m[1] for m in result.itermonoms()), k)
    if shift:
        result = Y_RING.from_dict({(m[0], m[1] - shift) + m[2:]: c for m, c in result.iterterms()})
    return result, k - shift


def substitute_u(F: MultiPoly, d: Optional[Rational] = None) -> MultiPoly:
    """
    Isotropic substitution u -> Q/y0 with the y0-power made minimal.

    Args:
        F: polynomial in (u, y0, ...)
        d: None for the gamma mode (Q = y1²+y2²+y3²-y4²), a rational for
           the offset mode (Q = y1²+y2²+y3²-d²y0²)

    Returns:
        canonical form of the substituted polynomial
    """
    result, k_sub = substitute_u_raw(F, d)
    logger.debug(f"u-substitution ({'gamma' if d is None else f'offset {d}'}) used y0^{k_sub}")
    return canonical_form(result)


def primitive_vector(values: Sequence[Rational]) -> Tuple[Rational, ...]:
    """Divide a rational vector by its positive content, giving coprime integers"""
    if not any(values):
        raise ComputationError("content of the zero vector")
    denominator = ZZ.one
    for v in values:
        denominator = ZZ.lcm(denominator, QQ.denom(QQ.convert(v)))
    scaled = [QQ.convert(v) * denominator for v in values]
    content = ZZ.zero
    for v in scaled:
        content = ZZ.gcd(content, QQ.numer(v))
    return tuple(v / content for v in scaled)
