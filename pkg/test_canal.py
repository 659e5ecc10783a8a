"""
Tests for the canal surface pipeline

Worked spines: an ellipse (double ellipsoid of revolution), a polynomial
spine, the Viviani curve with constant radius, and a torus. Random spines
exercise the substitution identity between the two envelope systems, the
degree formulas for spines of general type and dual-point sampling.
"""

import random
import warnings

import pytest
from sympy.polys.domains import QQ

from canal import (
    build_d_dprime, build_e_eprime, canal_equation, dual_point_sample, dual_variety_equation,
    affine_naive_envelope, g_system, gamma_equation, general_type_check, h_pullback, h_resultant,
    h_system, lift_spine, make_spine, naive_envelope, naive_envelope_d, offset_dual_equation,
    predicted_degrees, random_spine, sample_general_type_spine,
)
from canal_config import create_pipeline_config
from error_utils import DegenerateInputError, InputError, NotGeneralTypeError
from exactalg import (
    T, U, Y0, Y1, Y2, Y3, Y4, Y_RING, TPoly, canonical_form, compose, dehomogenize, evaluate,
    exact_divide, sylvester_resultant, uni_degree, uni_eval, uni_gcd_all, uni_poly,
    vec_diff, weighted_degree, wedge,
)
from liegeom import apply_c_vector, lie_product, lorentz, phi_inverse_proj, same_projective_point
from mubasis import MuBasis, degree_report, module_membership, mu_basis

CIRCLE = 1 + T**2
AFFINE_NO_RADIUS = {1: Y_RING.one, 5: Y_RING.zero}


def ellipse_spine():
    return make_spine([uni_poly([]), uni_poly([]), 8 * T, 3 - 3 * T**2], [CIRCLE] * 4)


def polynomial_spine():
    return make_spine([3 * T**2 + 1, 4 * T**2 + T, uni_poly([]), 5 * T**2])


def viviani_spine():
    return make_spine([(1 - T**2)**2, 2 * T * (1 - T**2), 2 * T, uni_poly([1])],
                      [CIRCLE**2, CIRCLE**2, CIRCLE, uni_poly([1])])


def torus_spine():
    return make_spine([1 - T**2, 2 * T, uni_poly([]), uni_poly([QQ(1, 2)])],
                      [CIRCLE, CIRCLE, uni_poly([1]), uni_poly([1])])


def torus_equation(r):
    """Torus with unit center circle and tube radius r"""
    s = Y1**2 + Y2**2 + Y3**2
    return canonical_form((s + (1 - r**2) * Y0**2)**2 - 4 * Y0**2 * (Y1**2 + Y2**2))


def at_point(f, point):
    """Specialize the MultiPoly coefficients of a TPoly at a rational point"""
    return f.map_coeffs(lambda c: Y_RING(evaluate(c, point)))


def random_point(rng, size=6):
    return tuple(QQ(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(size))


def random_spines(rng, count, degrees=(1, 2, 3)):
    spines = []
    while len(spines) < count:
        try:
            spines.append(random_spine(rng, rng.choice(degrees)))
        except DegenerateInputError:
            continue
    return spines


def report_soft_count(label, actual, expected):
    if actual != expected:
        warnings.warn(f"{label}: recomputed {actual} monomials, expected {expected}")


@pytest.fixture(scope="module")
def ellipse_dual():
    return dual_variety_equation(ellipse_spine())


@pytest.fixture(scope="module")
def polynomial_dual():
    return dual_variety_equation(polynomial_spine())


@pytest.fixture(scope="module")
def viviani_dual():
    return dual_variety_equation(viviani_spine())


@pytest.fixture(scope="module")
def torus_naive_third():
    return naive_envelope_d(torus_spine(), QQ(1, 3))


class TestMakeSpine:
    """Test spine ingestion"""

    def test_ellipse(self):
        """Test the common denominator and degree"""
        s = ellipse_spine()
        assert s.e0 == CIRCLE
        assert s.e == (uni_poly([]), uni_poly([]), 8 * T, 3 - 3 * T**2)
        assert s.n == 2

    def test_polynomial_spine(self):
        """Test denominators default to 1"""
        s = polynomial_spine()
        assert s.e0 == 1
        assert s.n == 2

    def test_mixed_denominators(self):
        """Test e0 is the lcm and e_i are rescaled"""
        s = viviani_spine()
        assert s.e0 == CIRCLE**2
        assert s.e[2] == 2 * T * CIRCLE
        assert s.e[3] == CIRCLE**2
        assert s.n == 4

    def test_common_factor_removed(self):
        """Test the homogeneous tuple is divided by its gcd"""
        s = make_spine([T**2, T, uni_poly([]), uni_poly([])], [T, T, uni_poly([1]), uni_poly([1])])
        assert s.components == (uni_poly([1]), T, uni_poly([1]), uni_poly([]), uni_poly([]))

    def test_point_spine(self):
        """Test a constant spine is rejected"""
        half = uni_poly([QQ(1, 2)])
        with pytest.raises(DegenerateInputError, match="point spine"):
            make_spine([half, uni_poly([]), uni_poly([]), half])

    def test_zero_denominator(self):
        """Test zero denominators are input errors"""
        one = uni_poly([1])
        with pytest.raises(InputError, match="zero denominator for e2"):
            make_spine([T, T, T, T], [one, uni_poly([]), one, one])


class TestLifting:
    """Test the lifted curve and the E/E' and D/D' vectors"""

    def test_lift_on_lie_quadric(self):
        """Test the lift of the ellipse"""
        lifted = lift_spine(ellipse_spine())
        assert lifted[0] == 64 * T**2 - (3 - 3 * T**2)**2
        assert lie_product(lifted, lifted) == 0

    def test_lift_of_random_spines(self):
        """Test the Lie quadric identity on random spines"""
        for s in random_spines(random.Random(7), 10):
            lifted = lift_spine(s)
            assert lie_product(lifted, lifted) == 0

    def test_e_vectors(self):
        """Test E = lift . C and E' its derivative"""
        s = ellipse_spine()
        E, Eprime = build_e_eprime(s)
        assert E == (
            -CIRCLE**2 * QQ(1, 2),
            -(64 * T**2 - (3 - 3 * T**2)**2) * QQ(1, 2),
            uni_poly([]),
            uni_poly([]),
            8 * T * CIRCLE,
            -(3 - 3 * T**2) * CIRCLE,
        )
        assert Eprime == vec_diff(E)

    def test_h_system_matches_e(self):
        """Test -2 E.y = u e0² + y0<e,e> - 2<e0 e, y> and its derivative"""
        for s in [ellipse_spine(), viviani_spine()] + random_spines(random.Random(3), 4):
            E, Eprime = build_e_eprime(s)
            ee = lorentz(s.e, s.e)
            expected = TPoly.from_uni(s.e0**2, U) + TPoly.from_uni(ee, Y0)
            for ei, yi, sign in zip(s.e, (Y1, Y2, Y3, Y4), (-2, -2, -2, 2)):
                expected = expected + TPoly.from_uni(s.e0 * ei, yi * sign)
            h1, h2 = h_system(s)
            assert h1 == expected
            assert h2 == h1.diff()
            assert TPoly.linear_form(Eprime) * QQ(-2) == h2

    def test_d_vectors(self):
        """Test D at d = 0 and the folded substitution y4 = -d y0"""
        s = torus_spine()
        E, _ = build_e_eprime(s)
        D0, _ = build_d_dprime(s, 0)
        assert D0 == E[:5]

        d = QQ(1, 3)
        D, Dprime = build_d_dprime(s, d)
        folded = TPoly.linear_form(E).map_coeffs(lambda c: compose(c, {5: Y0 * (-d)}))
        assert TPoly.linear_form(D, (U, Y0, Y1, Y2, Y3)) == folded
        assert Dprime == vec_diff(D)

    def test_ellipse_offset_plucker_gcd(self):
        """Test the Plücker vector of (D, D') at d = 0 has gcd t² - 1"""
        D, Dprime = build_d_dprime(ellipse_spine(), 0)
        assert uni_gcd_all(wedge(D, Dprime)) == T**2 - 1


class TestEllipse:
    """Test the double ellipsoid of revolution"""

    def test_dual_variety(self, ellipse_dual):
        """Test F_V has degree 6 and 26 monomials"""
        assert ellipse_dual.mu_degrees == (3, 3)
        assert ellipse_dual.total_degree == 6
        assert ellipse_dual.monomial_count == 26
        assert ellipse_dual.k == 1

    def test_gamma_hypersurface(self, ellipse_dual):
        """Test F_Gamma has degree 8 = d_w(F_V)"""
        gamma = gamma_equation(ellipse_spine(), dual=ellipse_dual)
        assert gamma.total_degree == 8
        assert weighted_degree(ellipse_dual.equation) == 8

    def test_gamma_restriction_factors(self, ellipse_dual):
        """Test F_Gamma(1, y1, y2, y3, 0) = two spheres times the squared ellipsoid"""
        gamma = gamma_equation(ellipse_spine(), dual=ellipse_dual)
        restricted = compose(gamma.equation, AFFINE_NO_RADIUS)
        upper = Y1**2 + Y2**2 + Y3**2 + 8 * Y3 + 16
        lower = Y1**2 + Y2**2 + Y3**2 - 8 * Y3 + 16
        quotient = exact_divide(restricted, upper)
        assert quotient is not None
        residual = exact_divide(quotient, lower)
        assert residual is not None
        assert canonical_form(residual) == canonical_form((25 * Y1**2 + 25 * Y2**2 + 9 * Y3**2 - 225)**2)

    def test_offset_dual_at_zero(self):
        """Test F_V0 is a square with mu-degrees (2, 2)"""
        result = offset_dual_equation(ellipse_spine(), 0)
        assert result.mu_degrees == (2, 2)
        assert result.k == 2
        assert result.equation == canonical_form((16 * Y3**2 + 225 * Y0**2 - 25 * Y0 * U)**2)

    def test_canal_surface(self):
        """Test the canal surface is the double ellipsoid"""
        result = canal_equation(ellipse_spine(), 0)
        assert result.equation == canonical_form((25 * Y1**2 + 25 * Y2**2 + 9 * Y3**2 - 225 * Y0**2)**2)
        assert result.total_degree == 4

    def test_offset_at_one_third(self):
        """Test the offset at d = 1/3 has degree 8, k = 1 and mu-degrees (3, 3)"""
        result = canal_equation(ellipse_spine(), QQ(1, 3))
        assert result.total_degree == 8
        assert result.k == 1
        assert result.mu_degrees == (3, 3)

    def test_module_degree_report(self):
        """Test deg(E, E') = 6, k = 1 and a hypersurface of degree 6"""
        report = degree_report(*build_e_eprime(ellipse_spine()))
        assert (report.deg_module, report.k, report.deg_hypersurface) == (6, 1, 6)

    def test_affine_early_matches_late_specialization(self, ellipse_dual):
        """Test y0 = 1 before elimination gives the dehomogenized equation"""
        early = gamma_equation(ellipse_spine(), affine_early=True)
        late = gamma_equation(ellipse_spine(), dual=ellipse_dual)
        assert early.equation == canonical_form(dehomogenize(late.equation))

    def test_bareiss_kernel_agrees(self, ellipse_dual):
        """Test the Bareiss kernel reproduces F_V"""
        config = create_pipeline_config(determinant_kernel="bareiss")
        assert dual_variety_equation(ellipse_spine(), config).equation == ellipse_dual.equation

    def test_dual_divides_h_resultant(self, ellipse_dual):
        """Test Res(h1, h2) = LC(h1) F_V for a spine of general type"""
        H = h_resultant(ellipse_spine())
        h1, _ = h_system(ellipse_spine())
        assert exact_divide(H, ellipse_dual.equation) is not None
        assert H == canonical_form(ellipse_dual.equation * h1.leading_coeff)

    def test_general_type(self):
        """Test all general-type flags and gamma = 2"""
        report = general_type_check(ellipse_spine())
        assert report.gamma == 2
        assert report.is_general_type
        assert report.failed_flags() == []

    def test_predicted_degrees(self):
        """Test (4n - 2, 6n - 4) = (6, 8)"""
        prediction = predicted_degrees(ellipse_spine())
        assert (prediction.deg_v, prediction.deg_gamma) == (6, 8)
        assert prediction.conjectured_gamma == 8

    def test_h1_g_variant(self):
        """Test LC(h1) Res(h1, h1' g - h1 g') = Res(h1, h1' g) with g = e0², pointwise"""
        s = ellipse_spine()
        h1, h2 = h_system(s)
        g = TPoly.from_uni(s.e0**2)
        variant = h2 * g - h1 * g.diff()
        plain = h2 * g
        m, formal = h1.degree, h1.degree + 2 * uni_degree(s.e0) - 1
        rng = random.Random(11)
        for _ in range(5):
            point = random_point(rng)
            f = at_point(h1, point)
            lhs = sylvester_resultant(f, at_point(variant, point), m, variant.degree)
            lhs = lhs * evaluate(h1.leading_coeff, point) ** (formal - variant.degree)
            assert lhs == sylvester_resultant(f, at_point(plain, point), m, formal)


class TestPolynomialSpine:
    """Test a polynomial spine of odd implicit degree"""

    def test_weighted_degree(self, polynomial_dual):
        """Test d_w(F_V) = deg F_Gamma = 5"""
        assert polynomial_dual.weighted_degree == 5
        assert gamma_equation(polynomial_spine(), dual=polynomial_dual).total_degree == 5
        report_soft_count("polynomial spine F_V", polynomial_dual.monomial_count, 54)

    def test_canal_degree(self):
        """Test the canal surface has degree 5"""
        assert canal_equation(polynomial_spine(), 0).total_degree == 5

    def test_not_general_type(self):
        """Test deg e0 = 0 < n fails the degree condition"""
        report = general_type_check(polynomial_spine())
        assert report.gamma == 1
        assert not report.degree_match
        assert not report.is_general_type
        assert "degree_match" in report.failed_flags()

    def test_no_prediction(self):
        """Test degree prediction refuses spines not of general type"""
        with pytest.raises(NotGeneralTypeError, match="not of general type") as excinfo:
            predicted_degrees(polynomial_spine())
        assert "degree_match" in excinfo.value.details['failed_flags']


class TestViviani:
    """Test the Viviani curve with constant radius"""

    KNOWN_DUAL_BASIS = (
        (uni_poly([]), 4 + 4 * T**2, 4 - 4 * T**2, 6 * T - 2 * T**3, 6 * T + 2 * T**3, 4 + 4 * T**2),
        (uni_poly([]), 4 * T + 4 * T**3, 4 * T * (T**2 - 1), 2 - 6 * T**2, 2 + 6 * T**2, 4 * T + 4 * T**3),
    )

    def test_dual_variety(self, viviani_dual):
        """Test mu-degrees (3, 3), degree 6 and d_w = 10"""
        assert viviani_dual.mu_degrees == (3, 3)
        assert viviani_dual.total_degree == 6
        assert viviani_dual.weighted_degree == 10
        report_soft_count("Viviani F_V", viviani_dual.monomial_count, 58)

    def test_gamma_degree(self, viviani_dual):
        """Test the isotropic hypersurface has degree 10"""
        assert gamma_equation(viviani_spine(), dual=viviani_dual).total_degree == 10

    def test_canal_surface(self, viviani_dual):
        """Test the canal surface has degree 10 = deg Gamma, k = 1 and mu-degrees (3, 3)"""
        result = canal_equation(viviani_spine(), 0)
        assert result.total_degree == 10
        assert result.k == 1
        assert result.mu_degrees == (3, 3)
        assert result.total_degree == gamma_equation(viviani_spine(), dual=viviani_dual).total_degree

    def test_module_degree_report(self):
        """Test the lifted curve's module defines a hypersurface of degree 6"""
        report = degree_report(*build_e_eprime(viviani_spine()))
        assert report.k == 1
        assert report.deg_hypersurface == 6

    def test_module_equals_known_basis(self):
        """Test two-sided membership against a known mu-basis of the lifted curve"""
        E, Eprime = build_e_eprime(viviani_spine())
        computed = mu_basis(E, Eprime)
        a, b = (apply_c_vector(v) for v in self.KNOWN_DUAL_BASIS)
        known = MuBasis(a_tilde=a, b_tilde=b, deg_pair=(3, 3), plucker_gcd=uni_poly([1]))
        for vector in (a, b):
            assert module_membership(vector, computed) is not None
        for vector in (computed.a_tilde, computed.b_tilde):
            assert module_membership(vector, known) is not None


class TestTorus:
    """Test extraneous factors of the naive envelope on a torus"""

    def test_canal_surface(self):
        """Test the canal pipeline returns the plain torus"""
        result = canal_equation(torus_spine(), 0)
        assert result.k == 1
        assert result.equation == torus_equation(QQ(1, 2))

    def test_offset(self):
        """Test the 1/3-offset of the spheres of radius -1/2 is the torus of tube radius 5/6"""
        result = canal_equation(torus_spine(), QQ(1, 3))
        assert result.equation == torus_equation(QQ(5, 6))

    def test_naive_envelope_factors(self):
        """Test G0 = (y1²+y2²)² (4y1²+4y2²+4y3²+8y1+3) F_T with y4 = 0, y0 = 1"""
        G0 = naive_envelope_d(torus_spine(), 0, affine_early=True)
        F_T = canonical_form(dehomogenize(torus_equation(QQ(1, 2))))
        expected = (Y1**2 + Y2**2)**2 * (4 * Y1**2 + 4 * Y2**2 + 4 * Y3**2 + 8 * Y1 + 3) * F_T
        assert G0 == canonical_form(expected)

    def test_canal_divides_naive_envelope(self, torus_naive_third):
        """Test F_Cd divides G_d at d = 0 and d = 1/3"""
        G = naive_envelope_d(torus_spine(), 0)
        assert exact_divide(G, canal_equation(torus_spine(), 0).equation) is not None
        assert exact_divide(torus_naive_third, torus_equation(QQ(5, 6))) is not None

    def test_other_offset_does_not_divide(self, torus_naive_third):
        """Test the unshifted torus is not a factor of G_d at d = 1/3"""
        assert exact_divide(torus_naive_third, torus_equation(QQ(1, 2))) is None

    def test_affine_variant_degenerate(self):
        """Test e0 = 1 + t² dividing <e,e> makes the e0-cleared resultant vanish"""
        with pytest.raises(DegenerateInputError, match="share a factor") as excinfo:
            affine_naive_envelope(torus_spine())
        assert excinfo.value.details['common_factor']


class TestAffineNaiveEnvelope:
    """Test the e0-cleared naive envelope on spines where e0 and <e,e> are coprime"""

    def check(self, s):
        g1, _ = g_system(s)
        f1 = g1.map_coeffs(lambda c: compose(c, AFFINE_NO_RADIUS))
        extra = sylvester_resultant(f1, TPoly.from_uni(s.e0), g1.degree, uni_degree(s.e0))
        assert extra
        G0 = naive_envelope_d(s, 0, affine_early=True)
        assert affine_naive_envelope(s) == canonical_form(extra * G0)

    def test_ellipse(self):
        """Test the cleared resultant equals Res(g1, e0) G0 on the ellipse"""
        self.check(ellipse_spine())

    def test_quadratic_spines(self):
        """Test the identity on two seeded quadratic spines of general type"""
        rng = random.Random(31)
        for _ in range(2):
            s, report = sample_general_type_spine(rng, 2)
            assert report.gcd_e0_ee_trivial
            self.check(s)


class TestEnvelopeSubstitution:
    """Test G = H o Phi^-1 between the g- and h-systems"""

    def test_pointwise_on_random_spines(self):
        """Test Res(g1, g2)(y) = Res(h1, h2)(<y,y>, y0², y0 y) on 20 random spines"""
        rng = random.Random(2024)
        for s in random_spines(rng, 20):
            g1, g2 = g_system(s)
            h1, h2 = h_system(s)
            assert (g1.degree, g2.degree) == (h1.degree, h2.degree)
            ybar = random_point(rng, 5)
            lifted = (QQ(0),) + ybar
            image = phi_inverse_proj(ybar).coords
            G = sylvester_resultant(at_point(g1, lifted), at_point(g2, lifted), g1.degree, g1.degree - 1)
            H = sylvester_resultant(at_point(h1, image), at_point(h2, image), h1.degree, h1.degree - 1)
            assert G == H

    def test_symbolic_on_linear_spine(self):
        """Test the identity on whole polynomials for a line of spheres"""
        s = make_spine([T, uni_poly([]), uni_poly([]), 2 * T])
        assert naive_envelope(s) == canonical_form(h_pullback(h_resultant(s)))


class TestDualPointSample:
    """Test points of the dual variety from tangent hyperplanes"""

    UNIT = [tuple(QQ(int(i == j)) for j in range(6)) for i in range(6)]

    def test_unit_vectors(self):
        """Test a sample at t0 = 1 lies on F_V and on both hyperplanes"""
        s = ellipse_spine()
        point = dual_point_sample(s, 1, self.UNIT[2], self.UNIT[3], self.UNIT[4])
        assert evaluate(dual_variety_equation(s).equation, point.coords) == 0
        E, Eprime = build_e_eprime(s)
        for vector in (E, Eprime):
            assert sum(uni_eval(p, QQ(1)) * y for p, y in zip(vector, point)) == 0

    def test_scaling_is_projective(self):
        """Test scaling one row gives the same projective point"""
        s = ellipse_spine()
        a1 = (QQ(1), QQ(2), QQ(5), QQ(-1), QQ(3), QQ(1))
        first = dual_point_sample(s, QQ(1, 2), a1, self.UNIT[3], self.UNIT[5])
        second = dual_point_sample(s, QQ(1, 2), tuple(2 * c for c in a1), self.UNIT[3], self.UNIT[5])
        assert same_projective_point(first, second)

    def test_degenerate_rows(self):
        """Test repeated rows raise"""
        with pytest.raises(DegenerateInputError, match="degenerate sample"):
            dual_point_sample(ellipse_spine(), 1, self.UNIT[2], self.UNIT[2], self.UNIT[4])

    def test_random_samples_vanish(self):
        """Test F_V vanishes at 20 random samples on three spines"""
        rng = random.Random(99)
        spines = [ellipse_spine()] + [sample_general_type_spine(rng, 2)[0] for _ in range(2)]
        for s in spines:
            F = dual_variety_equation(s).equation
            valid = 0
            for _ in range(20):
                t0 = QQ(rng.randint(-9, 9), rng.randint(1, 5))
                rows = [tuple(QQ(rng.randint(-5, 5)) for _ in range(6)) for _ in range(3)]
                try:
                    point = dual_point_sample(s, t0, *rows)
                except DegenerateInputError:
                    continue
                assert evaluate(F, point.coords) == 0
                valid += 1
            assert valid >= 15


class TestDegreeTheorems:
    """Test deg V = 4n - 2 and deg Gamma = 6n - 4 on random spines of general type"""

    def check(self, s, report, n):
        prediction = predicted_degrees(s, report=report)
        dual = dual_variety_equation(s)
        gamma = gamma_equation(s, dual=dual)
        assert dual.total_degree == prediction.deg_v == 4 * n - 2
        assert gamma.total_degree == prediction.deg_gamma == 6 * n - 4
        assert dual.weighted_degree == gamma.total_degree

    def test_quadratic_spines(self):
        """Test ten random quadratic spines"""
        rng = random.Random(20240607)
        for _ in range(10):
            s, report = sample_general_type_spine(rng, 2)
            self.check(s, report, 2)

    def test_h_resultant_is_lc_times_dual(self):
        """Test Res(h1, h1') = LC(h1) F_V on three random quadratic spines"""
        rng = random.Random(515)
        for _ in range(3):
            s, _ = sample_general_type_spine(rng, 2)
            h1, _ = h_system(s)
            dual = dual_variety_equation(s)
            assert h_resultant(s) == canonical_form(dual.equation * h1.leading_coeff)

    @pytest.mark.slow
    def test_cubic_spines(self):
        """Test five random cubic spines"""
        rng = random.Random(20240608)
        for _ in range(5):
            s, report = sample_general_type_spine(rng, 3)
            self.check(s, report, 3)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
