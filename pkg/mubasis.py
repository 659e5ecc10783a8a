"""
Modules with two quasi-generators over QQ[t]

A pair of polynomial vectors A, B spans the module of polynomial vectors
that are QQ(t)-combinations of A and B. This module computes the Smith
form of the 2 x d matrix W with rows A and B, reduces the resulting
generators to a mu-basis (generators of minimal total degree), checks
module membership, and measures the degree k of the Plücker map
t -> A(t) ^ B(t), i.e. the power to which the implicit equation appears
in the resultant.
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from canal_config import PipelineConfig, create_pipeline_config
from error_utils import ComputationError, DegenerateInputError, SamplingError, log_performance
from exactalg import (
    T, T_RING, MultiPoly, PolyVec, TPoly, UniPoly, canonical_form, leading_vector,
    sylvester_resultant, total_degree, uni_degree, uni_eval, uni_gcd_all, vec_degree,
    vec_exquo, wedge,
)

logger = logging.getLogger(__name__)

Matrix = List[List[UniPoly]]


@dataclass(frozen=True)
class SmithDecomposition:
    """W = U . S . V with S the 2 x d matrix diag(1, q)"""
    U: Tuple[PolyVec, ...]
    q: UniPoly
    V: Tuple[PolyVec, ...]
    d: int

    def diagonal_matrix(self) -> Matrix:
        S = [[T_RING.zero] * self.d for _ in range(2)]
        S[0][0] = T_RING.one
        S[1][1] = self.q
        return S

    def reconstruct(self) -> Matrix:
        return matmul(matmul([list(r) for r in self.U], self.diagonal_matrix()), [list(r) for r in self.V])


@dataclass(frozen=True)
class MuBasis:
    a_tilde: PolyVec
    b_tilde: PolyVec
    deg_pair: Tuple[int, int]
    plucker_gcd: UniPoly
    k: Optional[int] = None

    @property
    def degree(self) -> int:
        return self.deg_pair[0] + self.deg_pair[1]


@dataclass(frozen=True)
class ModuleDegreeReport:
    deg_wedge: int
    deg_gcd: int
    k: int
    deg_hypersurface: int
    deg_module: int


def matmul(X: Matrix, Y: Matrix) -> Matrix:
    inner = len(Y)
    return [[sum((X[i][m] * Y[m][j] for m in range(inner)), T_RING.zero) for j in range(len(Y[0]))]
            for i in range(len(X))]


def _identity(n: int) -> Matrix:
    return [[T_RING.one if i == j else T_RING.zero for j in range(n)] for i in range(n)]


class _SmithState:
    """Working matrix M with the invariant W = U . M . V under elementary operations"""

    def __init__(self, W: Sequence[Sequence[UniPoly]]):
        self.M = [list(row) for row in W]
        self.d = len(self.M[0])
        self.U = _identity(2)
        self.V = _identity(self.d)

    def swap_rows(self):
        self.M[0], self.M[1] = self.M[1], self.M[0]
        for row in self.U:
            row[0], row[1] = row[1], row[0]

    def add_row(self, src: int, dst: int, h: UniPoly):
        """row dst += h * row src"""
        self.M[dst] = [a + h * b for a, b in zip(self.M[dst], self.M[src])]
        for row in self.U:
            row[src] = row[src] - h * row[dst]

    def scale_row(self, i: int, c):
        self.M[i] = [a * c for a in self.M[i]]
        for row in self.U:
            row[i] = row[i] * (1 / c)

    def swap_cols(self, i: int, j: int):
        if i == j:
            return
        for row in self.M:
            row[i], row[j] = row[j], row[i]
        self.V[i], self.V[j] = self.V[j], self.V[i]

    def add_col(self, src: int, dst: int, h: UniPoly):
        """col dst += h * col src"""
        for row in self.M:
            row[dst] = row[dst] + h * row[src]
        self.V[src] = [a - h * b for a, b in zip(self.V[src], self.V[dst])]

    def min_degree_position(self, rows: Sequence[int], first_col: int) -> Optional[Tuple[int, int]]:
        """Smallest-degree nonzero entry, sweeping columns left to right"""
        best = None
        for j in range(first_col, self.d):
            for i in rows:
                entry = self.M[i][j]
                if entry and (best is None or uni_degree(entry) < uni_degree(self.M[best[0]][best[1]])):
                    best = (i, j)
        return best


def smith_form(W: Sequence[Sequence[UniPoly]]) -> SmithDecomposition:
    """
    Smith form of a 2 x d polynomial matrix by extended-Euclid pivoting.

    Args:
        W: two rows of equal length d

    Returns:
        SmithDecomposition with monic q and unimodular U, V

    Raises:
        DegenerateInputError: rank < 2, or the entries share a nonconstant factor
    """
    if len(W) != 2 or len(W[0]) != len(W[1]) or not W[0]:
        raise ComputationError("smith_form expects a 2 x d matrix")
    state = _SmithState(W)
    dependent = "quasi-generators are linearly dependent over Q[t]"

    while True:
        position = state.min_degree_position((0, 1), 0)
        if position is None:
            raise DegenerateInputError(dependent)
        i, j = position
        if i == 1:
            state.swap_rows()
        state.swap_cols(0, j)
        pivot = state.M[0][0]

        reduced = True
        for col in range(1, state.d):
            if state.M[0][col]:
                quotient, remainder = state.M[0][col].div(pivot)
                state.add_col(0, col, -quotient)
                reduced = reduced and not remainder
        if state.M[1][0]:
            quotient, remainder = state.M[1][0].div(pivot)
            state.add_row(0, 1, -quotient)
            reduced = reduced and not remainder
        if not reduced:
            continue

        stray = next((col for col in range(1, state.d)
                      if state.M[1][col] and state.M[1][col].rem(pivot)), None)
        if stray is None:
            break
        logger.debug(f"Smith pivot of degree {uni_degree(pivot)} does not divide column {stray}")
        state.add_row(1, 0, T_RING.one)

    if uni_degree(state.M[0][0]) > 0:
        raise DegenerateInputError("input is p.D form, not reduced",
                                   {'common_factor': str(state.M[0][0].monic())})

    while True:
        position = state.min_degree_position((1,), 1)
        if position is None:
            raise DegenerateInputError(dependent)
        state.swap_cols(1, position[1])
        pivot = state.M[1][1]
        reduced = True
        for col in range(2, state.d):
            if state.M[1][col]:
                quotient, remainder = state.M[1][col].div(pivot)
                state.add_col(1, col, -quotient)
                reduced = reduced and not remainder
        if reduced:
            break

    state.scale_row(0, 1 / state.M[0][0].LC)
    state.scale_row(1, 1 / state.M[1][1].LC)
    return SmithDecomposition(
        U=tuple(tuple(row) for row in state.U),
        q=state.M[1][1],
        V=tuple(tuple(row) for row in state.V),
        d=state.d,
    )


def _proportionality(x: Sequence, y: Sequence) -> Optional[object]:
    """c with x = c*y, or None when x and y are independent"""
    pivot = next(i for i, v in enumerate(y) if v)
    c = x[pivot] / y[pivot]
    if all(a == c * b for a, b in zip(x, y)):
        return c
    return None


def _shifted(A: Sequence[UniPoly], scalar, shift: int) -> PolyVec:
    h = T**shift * scalar
    return tuple(h * a for a in A)


def _subtract(A: Sequence[UniPoly], B: Sequence[UniPoly]) -> PolyVec:
    return tuple(a - b for a, b in zip(A, B))


def _check_certificates(a: PolyVec, b: PolyVec):
    if uni_gcd_all(wedge(a, b)) != 1:
        raise ComputationError("mu-basis certificate failed: Plücker gcd is not 1")
    if _proportionality(leading_vector(a), leading_vector(b)) is not None:
        raise ComputationError("mu-basis certificate failed: dependent leading vectors")


@log_performance("mu_basis")
def mu_basis(A: Sequence[UniPoly], B: Sequence[UniPoly]) -> MuBasis:
    """
    Reduce quasi-generators A, B to a mu-basis of the module they span.

    A common factor of all entries of A and B does not change the module
    over QQ(t) and is divided out before the Smith form is computed.

    Raises:
        DegenerateInputError: A and B are dependent
    """
    if len(A) != len(B):
        raise ComputationError(f"quasi-generators of lengths {len(A)} and {len(B)}")
    content = uni_gcd_all(tuple(A) + tuple(B))
    if content != 1:
        logger.debug(f"Removing common factor {content} from quasi-generators")
        A, B = vec_exquo(A, content), vec_exquo(B, content)

    smith = smith_form((A, B))
    a, b = smith.V[0], smith.V[1]

    while True:
        da, db = vec_degree(a), vec_degree(b)
        la, lb = leading_vector(a), leading_vector(b)
        if da > db:
            c = _proportionality(la, lb)
            if c is None:
                break
            a = _subtract(a, _shifted(b, c, da - db))
        else:
            c = _proportionality(lb, la)
            if c is None:
                break
            b = _subtract(b, _shifted(a, c, db - da))
        logger.debug(f"Leading-vector reduction: degrees now ({vec_degree(a)}, {vec_degree(b)})")

    _check_certificates(a, b)
    basis = MuBasis(a_tilde=a, b_tilde=b, deg_pair=(vec_degree(a), vec_degree(b)), plucker_gcd=T_RING.one)
    logger.info(f"mu-basis of degrees {basis.deg_pair} for d={len(a)}")
    return basis


def _solve_leading(target: Sequence, vectors: Sequence[Sequence]) -> Optional[Tuple]:
    """Exact coefficients with target = sum c_i vectors_i, or None"""
    if not vectors:
        return () if not any(target) else None
    if len(vectors) == 1:
        v = vectors[0]
        pivot = next(i for i, x in enumerate(v) if x)
        c = target[pivot] / v[pivot]
        return (c,) if all(t == c * x for t, x in zip(target, v)) else None
    v, w = vectors
    n = len(v)
    i, j = next((i, j) for i in range(n) for j in range(i + 1, n) if v[i] * w[j] != v[j] * w[i])
    det = v[i] * w[j] - v[j] * w[i]
    alpha = (target[i] * w[j] - target[j] * w[i]) / det
    beta = (v[i] * target[j] - v[j] * target[i]) / det
    if all(t == alpha * x + beta * y for t, x, y in zip(target, v, w)):
        return alpha, beta
    return None


def module_membership(C: Sequence[UniPoly], basis: MuBasis) -> Optional[Tuple[UniPoly, UniPoly]]:
    """
    Coefficients (h1, h2) with C = h1*A~ + h2*B~, or None when C is not in the module.

    Elimination runs by descending degree against the independent leading
    vectors of the basis.
    """
    a, b = basis.a_tilde, basis.b_tilde
    if len(C) != len(a):
        raise ComputationError(f"vector of length {len(C)} against a basis of length {len(a)}")
    da, db = basis.deg_pair
    la, lb = leading_vector(a), leading_vector(b)
    h1, h2 = T_RING.zero, T_RING.zero
    remainder = tuple(C)

    while any(remainder):
        delta = vec_degree(remainder)
        usable = [(vec, lv, deg, idx) for idx, (vec, lv, deg) in enumerate(((a, la, da), (b, lb, db))) if deg <= delta]
        solution = _solve_leading(leading_vector(remainder), [lv for _, lv, _, _ in usable])
        if solution is None:
            logger.debug(f"Not a member: leading vector of degree {delta} is outside the span")
            return None
        for c, (vec, _, deg, idx) in zip(solution, usable):
            if not c:
                continue
            remainder = _subtract(remainder, _shifted(vec, c, delta - deg))
            if idx == 0:
                h1 += T**(delta - deg) * c
            else:
                h2 += T**(delta - deg) * c
    return h1, h2


def plucker_param_degree(A: Sequence[UniPoly], B: Sequence[UniPoly],
                         config: Optional[PipelineConfig] = None) -> int:
    """
    Degree k of t -> (A ^ B)(t) as a map to projective space.

    k is the size of a generic fiber: for a random rational t0 the
    2-minors of the rows P(t), P(t0) share a gcd whose degree counts the
    parameters mapping to the same point. A value must be seen
    ``sample_agreement`` times within ``sample_attempts`` samples.

    Raises:
        SamplingError: no value reached agreement ("degenerate sampling")
    """
    config = config or create_pipeline_config()
    P = wedge(A, B)
    g = uni_gcd_all(P)
    P = vec_exquo(P, g)
    if vec_degree(P) <= 0:
        return 1

    rng = random.Random(config.seed)
    counts = Counter()
    used = set()
    for attempt in range(config.sample_attempts):
        t0 = QQ(rng.randint(-60, 60), rng.randint(1, 7))
        while t0 in used:
            t0 = QQ(rng.randint(-60, 60), rng.randint(1, 7))
        used.add(t0)
        P0 = [uni_eval(p, t0) for p in P]
        minors = [P[i] * P0[j] - P[j] * P0[i] for i in range(len(P)) for j in range(i + 1, len(P))]
        k = uni_degree(uni_gcd_all(minors))
        counts[k] += 1
        logger.debug(f"Fiber sample {attempt + 1} at t0={t0}: {k} parameter(s)")
        if counts[k] >= config.sample_agreement:
            return k
    raise SamplingError("degenerate sampling", {'samples': dict(counts)})


@log_performance("degree_report")
def degree_report(A: Sequence[UniPoly], B: Sequence[UniPoly],
                  config: Optional[PipelineConfig] = None) -> ModuleDegreeReport:
    """Degree data of the module and of its hypersurface, with the identities checked"""
    P = wedge(A, B)
    q = uni_gcd_all(P)
    deg_wedge, deg_gcd = vec_degree(P), uni_degree(q)
    basis = mu_basis(A, B)
    k = plucker_param_degree(A, B, config)

    deg_module = basis.degree
    if deg_module != deg_wedge - deg_gcd:
        raise ComputationError("module degree differs from deg(A^B) - deg gcd",
                               {'deg_module': deg_module, 'deg_wedge': deg_wedge, 'deg_gcd': deg_gcd})
    if deg_module % k:
        raise ComputationError("module degree is not a multiple of k", {'deg_module': deg_module, 'k': k})
    return ModuleDegreeReport(deg_wedge=deg_wedge, deg_gcd=deg_gcd, k=k,
                              deg_hypersurface=deg_module // k, deg_module=deg_module)


def linear_forms(basis: MuBasis, variables: Optional[Sequence[MultiPoly]] = None) -> Tuple[TPoly, TPoly]:
    return TPoly.linear_form(basis.a_tilde, variables), TPoly.linear_form(basis.b_tilde, variables)


@log_performance("mu_resultant")
def mu_resultant(basis: MuBasis, kernel: str = "expansion",
                 variables: Optional[Sequence[MultiPoly]] = None) -> MultiPoly:
    """
    Canonical resultant of the two linear forms A~(t).x and B~(t).x.

    Args:
        basis: a mu-basis
        kernel: determinant kernel for the Sylvester matrix
        variables: the forms' variables (default: the first d of u, y0, ...)
    """
    if basis.deg_pair == (0, 0):
        raise ComputationError("module defines no hypersurface")
    f, g = linear_forms(basis, variables)
    equation = canonical_form(sylvester_resultant(f, g, basis.deg_pair[0], basis.deg_pair[1], kernel))
    if total_degree(equation) != basis.degree:
        raise ComputationError("resultant degree differs from the mu-basis degree",
                               {'degree': total_degree(equation), 'expected': basis.degree})
    return equation
