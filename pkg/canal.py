"""
Canal surfaces, offsets and dual varieties from a rational spine curve

A spine curve t -> (e0 : e1 : e2 : e3 : e4) gives, for every t, the sphere
with center (e1, e2, e3)/e0 and signed radius e4/e0. The pipeline lifts it
to the Lie quadric, replaces the two defining moving hyperplanes by a
mu-basis and eliminates t. This yields, free of extraneous factors:

- F_V: the dual variety V of the lifted curve
- F_Vd: its section for the offset distance d
- F_Gamma: the isotropic hypersurface (all offsets at once)
- F_Cd: the d-offset of the canal surface, F_C0 being the canal surface

The naive envelopes (resultants of the sphere family and its derivative)
are kept for comparison; they carry the extraneous factors.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from canal_config import PipelineConfig, create_pipeline_config
from error_utils import ComputationError, DegenerateInputError, InputError, NotGeneralTypeError, log_performance
from exactalg import (
    T, T_RING, Y_RING, Y0, Y1, Y2, Y3, Y4, MultiPoly, PolyVec, Rational, TPoly, UniPoly,
    canonical_form, compose, dehomogenize, ff_determinant, monomial_count, primitive_vector,
    substitute_u, sylvester_resultant, total_degree, uni_degree, uni_eval, uni_gcd,
    uni_gcd_all, uni_poly, vec_degree, vec_diff, vec_exquo, weighted_degree,
)
from liegeom import LiePoint, apply_c_vector, lie_product, lorentz, phi_inverse_polynomials
from mubasis import MuBasis, linear_forms, mu_basis, mu_resultant, plucker_param_degree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpineCurve:
    """Homogeneous spine (e0, e1, e2, e3, e4) with gcd 1"""
    components: PolyVec

    @property
    def e0(self) -> UniPoly:
        return self.components[0]

    @property
    def e(self) -> PolyVec:
        return self.components[1:]

    @property
    def n(self) -> int:
        return vec_degree(self.components)

    def to_dict(self) -> Dict[str, Any]:
        return {f"e{i}": str(p.as_expr()) for i, p in enumerate(self.components)}


@dataclass(frozen=True)
class ImplicitResult:
    """A canonical equation together with its degree data"""
    equation: MultiPoly
    k: int
    total_degree: int
    monomial_count: int
    weighted_degree: Optional[int] = None
    mu_degrees: Optional[Tuple[int, int]] = None

    @classmethod
    def build(cls, equation: MultiPoly, k: int, mu_degrees: Optional[Tuple[int, int]] = None,
              weighted: bool = False) -> "ImplicitResult":
        return cls(
            equation=equation,
            k=k,
            total_degree=total_degree(equation),
            monomial_count=monomial_count(equation),
            weighted_degree=weighted_degree(equation) if weighted else None,
            mu_degrees=mu_degrees,
        )


@dataclass(frozen=True)
class GeneralTypeReport:
    w: PolyVec
    gamma: int
    gcd_w_degree: int
    gcd_w_trivial: bool
    gcd_e0_e0prime_trivial: bool
    gcd_e0_ee_trivial: bool
    degree_match: bool
    k: int
    k_is_one: bool = field(init=False)
    is_general_type: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'k_is_one', self.k == 1)
        object.__setattr__(self, 'is_general_type', all(self.flags().values()))

    def flags(self) -> Dict[str, bool]:
        return {
            'gcd_w_trivial': self.gcd_w_trivial,
            'gcd_e0_e0prime_trivial': self.gcd_e0_e0prime_trivial,
            'gcd_e0_ee_trivial': self.gcd_e0_ee_trivial,
            'degree_match': self.degree_match,
            'k_is_one': self.k_is_one,
        }

    def failed_flags(self) -> List[str]:
        return [name for name, value in self.flags().items() if not value]


@dataclass(frozen=True)
class PredictedDegrees:
    deg_v: int
    deg_gamma: int
    conjectured_gamma: int


# ---------------------------------------------------------------------------
# Spine ingestion and lifting
# ---------------------------------------------------------------------------

def spine_w(s: SpineCurve) -> PolyVec:
    """w_j = e_j' e0 - e_j e0' for j = 1..4"""
    e0p = s.e0.diff(T)
    return tuple(ej.diff(T) * s.e0 - ej * e0p for ej in s.e)


def make_spine(numerators: Sequence[UniPoly], denominators: Optional[Sequence[UniPoly]] = None) -> SpineCurve:
    """
    Build a spine from the four rational functions num_i / den_i.

    Args:
        numerators: four UniPolys
        denominators: four nonzero UniPolys (default: all 1)

    Returns:
        SpineCurve with e0 the monic lcm of the denominators and gcd 1

    Raises:
        InputError: wrong arity or a zero denominator
        DegenerateInputError: the spine is a single sphere
    """
    denominators = denominators if denominators is not None else (T_RING.one,) * 4
    if len(numerators) != 4 or len(denominators) != 4:
        raise InputError("a spine needs four numerators and four denominators")
    for i, den in enumerate(denominators):
        if not den:
            raise InputError(f"zero denominator for e{i + 1}", {'field': f"denominators[{i}]"})

    e0 = T_RING.one
    for den in denominators:
        e0 = e0.lcm(den).monic()
    components = (e0,) + tuple(num * e0.exquo(den) for num, den in zip(numerators, denominators))
    components = vec_exquo(components, uni_gcd_all(components))

    spine = SpineCurve(components)
    if not any(spine_w(spine)):
        raise DegenerateInputError("point spine", {'spine': spine.to_dict()})
    logger.debug(f"Spine of degree {spine.n}: {spine.to_dict()}")
    return spine


def lift_spine(s: SpineCurve) -> PolyVec:
    """(<e,e>, e0², e0 e1, e0 e2, e0 e3, e0 e4), a curve on the Lie quadric"""
    lifted = (lorentz(s.e, s.e), s.e0 * s.e0) + tuple(s.e0 * ej for ej in s.e)
    if lie_product(lifted, lifted):
        raise ComputationError("lifted spine is not on the Lie quadric")
    return lifted


def build_e_eprime(s: SpineCurve) -> Tuple[PolyVec, PolyVec]:
    """E = lift C and its t-derivative E'"""
    E = apply_c_vector(lift_spine(s))
    return E, vec_diff(E)


def build_d_dprime(s: SpineCurve, d: Rational) -> Tuple[PolyVec, PolyVec]:
    """E with y4 = -d y0 folded into the y0 slot, dropping the y4 slot; D' = dD/dt"""
    E, _ = build_e_eprime(s)
    D = (E[0], E[1] + s.e0 * s.e[3] * QQ.convert(d)) + E[2:5]
    return D, vec_diff(D)


# ---------------------------------------------------------------------------
# The g- and h-systems
# ---------------------------------------------------------------------------

def h_system(s: SpineCurve) -> Tuple[TPoly, TPoly]:
    """h1 = u e0² + y0<e,e> - 2<e0 e, y> = -2 E.y^ and h2 = dh1/dt"""
    E, _ = build_e_eprime(s)
    h1 = TPoly.linear_form(E) * QQ(-2)
    return h1, h1.diff()


def g_system(s: SpineCurve) -> Tuple[TPoly, TPoly]:
    """g1 = <e0 y - e y0, e0 y - e y0>, the isotropic cone along the spine, and g2 = dg1/dt"""
    v = [TPoly.from_uni(s.e0, yi) - TPoly.from_uni(ei, Y0) for yi, ei in zip((Y1, Y2, Y3, Y4), s.e)]
    g1 = lorentz(v, v)
    return g1, g1.diff()


def _kernel(config: Optional[PipelineConfig]) -> str:
    return (config or create_pipeline_config()).determinant_kernel


def _specialize(f: TPoly, images: Dict[int, MultiPoly]) -> TPoly:
    return f.map_coeffs(lambda c: compose(c, images)) if images else f


def h_pullback(H: MultiPoly) -> MultiPoly:
    """H(<y,y>, y0², y0 y1, ..., y0 y4)"""
    return compose(H, dict(enumerate(phi_inverse_polynomials())))


@log_performance("h_resultant")
def h_resultant(s: SpineCurve, config: Optional[PipelineConfig] = None) -> MultiPoly:
    """H = Res_t(h1, h2) at formal degrees (deg h1, deg h1 - 1), canonical"""
    h1, h2 = h_system(s)
    return canonical_form(sylvester_resultant(h1, h2, h1.degree, h1.degree - 1, _kernel(config)))


@log_performance("naive_envelope")
def naive_envelope(s: SpineCurve, config: Optional[PipelineConfig] = None,
                   affine_early: bool = False) -> MultiPoly:
    """G = Res_t(g1, g2) at formal degrees (deg g1, deg g1 - 1), extraneous factors included"""
    g1, g2 = g_system(s)
    images = {1: Y_RING.one} if affine_early else {}
    G = sylvester_resultant(_specialize(g1, images), _specialize(g2, images),
                            g1.degree, g1.degree - 1, _kernel(config))
    return canonical_form(G)


@log_performance("naive_envelope_d")
def naive_envelope_d(s: SpineCurve, d: Rational, config: Optional[PipelineConfig] = None,
                     affine_early: bool = False) -> MultiPoly:
    """G_d = Res_t(g1, g2) with y4 = -d y0, at the formal degrees of the unsubstituted pair"""
    g1, g2 = g_system(s)
    images = {5: Y0 * (-QQ.convert(d))}
    if affine_early:
        images = {1: Y_RING.one, 5: Y_RING(-QQ.convert(d))}
    G = sylvester_resultant(_specialize(g1, images), _specialize(g2, images),
                            g1.degree, g1.degree - 1, _kernel(config))
    return canonical_form(G)


@log_performance("affine_naive_envelope")
def affine_naive_envelope(s: SpineCurve, config: Optional[PipelineConfig] = None) -> MultiPoly:
    """
    Affine envelope resultant with y4 = 0, y0 = 1.

    The second equation is e0³ times the derivative of g1/e0², i.e.
    e0 g1' - 2 e0' g1; the resultant carries the extra factor Res_t(g1, e0).
    Formal degrees: (deg g1, deg e0 + deg g1 - 1).

    At a root of e0 the specialized g1 reduces to <e,e>, so Res_t(g1, e0)
    vanishes exactly when e0 and <e,e> share a factor.

    Raises:
        DegenerateInputError: e0 and <e,e> share a factor, so both resultants vanish
    """
    common = uni_gcd(s.e0, lorentz(s.e, s.e))
    if uni_degree(common) > 0:
        raise DegenerateInputError("e0 and <e,e> share a factor; the affine envelope resultant vanishes",
                                   {'common_factor': str(common.as_expr())})
    g1, _ = g_system(s)
    f1 = _specialize(g1, {1: Y_RING.one, 5: Y_RING.zero})
    check = TPoly.from_uni(s.e0) * f1.diff() - TPoly.from_uni(s.e0.diff(T)) * f1 * QQ(2)
    deg1 = g1.degree
    G = sylvester_resultant(f1, check, deg1, uni_degree(s.e0) + deg1 - 1, _kernel(config))
    if not G:
        raise DegenerateInputError("affine envelope resultant vanishes identically")
    return canonical_form(G)


# ---------------------------------------------------------------------------
# Clean implicit equations via mu-bases
# ---------------------------------------------------------------------------

def _eliminate(basis: MuBasis, config: PipelineConfig, affine_early: bool) -> MultiPoly:
    if not affine_early:
        return mu_resultant(basis, config.determinant_kernel)
    f, g = (p.map_coeffs(dehomogenize) for p in linear_forms(basis))
    return canonical_form(sylvester_resultant(f, g, basis.deg_pair[0], basis.deg_pair[1],
                                              config.determinant_kernel))


@log_performance("dual_variety_equation")
def dual_variety_equation(s: SpineCurve, config: Optional[PipelineConfig] = None,
                          affine_early: bool = False) -> ImplicitResult:
    """F_V^k as the resultant of a mu-basis of <E, E'>"""
    config = config or create_pipeline_config()
    E, Eprime = build_e_eprime(s)
    basis = mu_basis(E, Eprime)
    k = plucker_param_degree(E, Eprime, config)
    result = ImplicitResult.build(_eliminate(basis, config, affine_early), k, basis.deg_pair, weighted=True)
    logger.info(f"F_V: degree {result.total_degree}, {result.monomial_count} monomials, k={k}")
    return result


@log_performance("offset_dual_equation")
def offset_dual_equation(s: SpineCurve, d: Rational, config: Optional[PipelineConfig] = None,
                         affine_early: bool = False) -> ImplicitResult:
    """F_Vd^k in (u, y0, y1, y2, y3) from a mu-basis of <D, D'>"""
    config = config or create_pipeline_config()
    D, Dprime = build_d_dprime(s, d)
    basis = mu_basis(D, Dprime)
    k = plucker_param_degree(D, Dprime, config)
    result = ImplicitResult.build(_eliminate(basis, config, affine_early), k, basis.deg_pair, weighted=True)
    logger.info(f"F_Vd (d={d}): degree {result.total_degree}, {result.monomial_count} monomials, k={k}")
    return result


@log_performance("gamma_equation")
def gamma_equation(s: SpineCurve, config: Optional[PipelineConfig] = None,
                   dual: Optional[ImplicitResult] = None, affine_early: bool = False) -> ImplicitResult:
    """
    F_Gamma by substituting u = (y1²+y2²+y3²-y4²)/y0 into F_V.

    The degree of F_Gamma equals the weighted degree of F_V; a mismatch
    raises ComputationError. ``dual`` reuses an already computed F_V.
    """
    dual = dual or dual_variety_equation(s, config, affine_early)
    equation = substitute_u(dual.equation)
    if affine_early:
        equation = canonical_form(dehomogenize(equation))
    elif total_degree(equation) != dual.weighted_degree:
        raise ComputationError("degree of F_Gamma differs from the weighted degree of F_V",
                               {'degree': total_degree(equation), 'weighted_degree': dual.weighted_degree})
    return ImplicitResult.build(equation, dual.k, dual.mu_degrees)


@log_performance("canal_equation")
def canal_equation(s: SpineCurve, d: Rational, config: Optional[PipelineConfig] = None,
                   offset_dual: Optional[ImplicitResult] = None, affine_early: bool = False) -> ImplicitResult:
    """F_Cd by substituting u = (y1²+y2²+y3²-d²y0²)/y0 into F_Vd; d = 0 gives the canal surface"""
    offset_dual = offset_dual or offset_dual_equation(s, d, config, affine_early)
    equation = substitute_u(offset_dual.equation, QQ.convert(d))
    if affine_early:
        equation = canonical_form(dehomogenize(equation))
    return ImplicitResult.build(equation, offset_dual.k, offset_dual.mu_degrees)


# ---------------------------------------------------------------------------
# Degree prediction
# ---------------------------------------------------------------------------

def general_type_check(s: SpineCurve, config: Optional[PipelineConfig] = None) -> GeneralTypeReport:
    w = spine_w(s)
    gcd_w = uni_gcd_all(w)
    E, Eprime = build_e_eprime(s)
    report = GeneralTypeReport(
        w=w,
        gamma=vec_degree(w),
        gcd_w_degree=uni_degree(gcd_w),
        gcd_w_trivial=gcd_w == 1,
        gcd_e0_e0prime_trivial=uni_gcd(s.e0, s.e0.diff(T)) == 1,
        gcd_e0_ee_trivial=uni_gcd(s.e0, lorentz(s.e, s.e)) == 1,
        degree_match=uni_degree(s.e0) == s.n,
        k=plucker_param_degree(E, Eprime, config),
    )
    logger.debug(f"General-type flags: {report.flags()}")
    return report


def predicted_degrees(s: SpineCurve, config: Optional[PipelineConfig] = None,
                      report: Optional[GeneralTypeReport] = None) -> PredictedDegrees:
    """
    (4n-2, 6n-4) for spines of general type, computed without elimination.

    Raises:
        NotGeneralTypeError: a general-type condition fails
    """
    report = report or general_type_check(s, config)
    if not report.is_general_type:
        raise NotGeneralTypeError("spine is not of general type", {'failed_flags': report.failed_flags()})
    deg_v = 4 * s.n - 2
    prediction = PredictedDegrees(deg_v=deg_v, deg_gamma=6 * s.n - 4,
                                  conjectured_gamma=deg_v + report.gamma - report.gcd_w_degree)
    logger.info(f"Predicted degrees: deg V = {prediction.deg_v}, deg Gamma = {prediction.deg_gamma} "
                f"(conjectured {prediction.conjectured_gamma})")
    return prediction


def dual_point_sample(s: SpineCurve, t0: Rational, a1: Sequence, a2: Sequence, a3: Sequence) -> LiePoint:
    """
    A point of V from the tangent hyperplane at t0.

    The signed 5 x 5 minors of the rows E(t0), E'(t0), a1, a2, a3 give the
    coefficients of det(y^, E(t0), E'(t0), a1, a2, a3) in y^.

    Raises:
        DegenerateInputError: the five rows have rank < 5
    """
    E, Eprime = build_e_eprime(s)
    t0 = QQ.convert(t0)
    rows = [[uni_eval(p, t0) for p in E], [uni_eval(p, t0) for p in Eprime]]
    rows += [[QQ.convert(c) for c in a] for a in (a1, a2, a3)]
    minors = []
    for i in range(6):
        det = ff_determinant([[row[j] for j in range(6) if j != i] for row in rows])
        minors.append(det if i % 2 == 0 else -det)
    if not any(minors):
        raise DegenerateInputError("degenerate sample", {'t0': str(t0)})
    return LiePoint(primitive_vector(minors))


# ---------------------------------------------------------------------------
# Random spines
# ---------------------------------------------------------------------------

def random_spine(rng: random.Random, n: int) -> SpineCurve:
    """
    Numerators with coefficients in [-9, 9] over a common denominator that
    is 1+t² (quadratic spines, half of the time) or a random degree-n
    polynomial with nonzero constant term.
    """
    def coefficient(nonzero: bool = False) -> int:
        value = rng.randint(-9, 9)
        while nonzero and not value:
            value = rng.randint(-9, 9)
        return value

    if n == 2 and rng.random() < 0.5:
        denominator = uni_poly([1, 0, 1])
    else:
        denominator = uni_poly([coefficient(True)] + [coefficient() for _ in range(n - 1)] + [coefficient(True)])
    numerators = [uni_poly([coefficient() for _ in range(n + 1)]) for _ in range(4)]
    return make_spine(numerators, [denominator] * 4)


def sample_general_type_spine(rng: random.Random, n: int, max_tries: int = 50,
                              config: Optional[PipelineConfig] = None) -> Tuple[SpineCurve, GeneralTypeReport]:
    """Rejection-sample random spines of degree n until one is of general type"""
    for attempt in range(1, max_tries + 1):
        try:
            spine = random_spine(rng, n)
        except DegenerateInputError:
            continue
        report = general_type_check(spine, config)
        if report.is_general_type:
            logger.debug(f"General-type spine of degree {n} after {attempt} draw(s)")
            return spine, report
    raise ComputationError(f"no general-type spine of degree {n} in {max_tries} draws")
