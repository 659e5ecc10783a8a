"""
Lie and Laguerre sphere geometry primitives

Points of P^5 are written (u : y0 : y1 : y2 : y3 : y4). Oriented spheres
and planes are encoded as points of the Lie quadric
-u y0 + y1² + y2² + y3² - y4² = 0; the affine chart y0 != 0 identifies
spheres with points of the Lorentz space R^4_1.

The bilinear forms accept any sequences whose entries support ring
arithmetic, so the same code evaluates rationals and builds polynomials.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

from sympy.polys.domains import QQ

from error_utils import DegenerateInputError
from exactalg import Rational, Y_RING, MultiPoly, Y0, Y1, Y2, Y3, Y4

logger = logging.getLogger(__name__)

HALF = QQ(1, 2)


def _rationals(values: Sequence, size: int, name: str) -> Tuple[Rational, ...]:
    if len(values) != size:
        raise DegenerateInputError(f"{name} needs {size} coordinates, got {len(values)}")
    return tuple(QQ.convert(v) for v in values)


@dataclass(frozen=True)
class LiePoint:
    """Projective representative (u, y0, y1, y2, y3, y4)"""
    coords: Tuple[Rational, ...]

    def __post_init__(self):
        coords = _rationals(self.coords, 6, "LiePoint")
        if not any(coords):
            raise DegenerateInputError("LiePoint must not be the zero vector")
        object.__setattr__(self, 'coords', coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, index):
        return self.coords[index]

    def __len__(self):
        return 6


@dataclass(frozen=True)
class Sphere:
    """Oriented sphere; the sign of the radius encodes orientation, r = 0 is a point"""
    center: Tuple[Rational, ...]
    radius: Rational

    def __post_init__(self):
        object.__setattr__(self, 'center', _rationals(self.center, 3, "Sphere center"))
        object.__setattr__(self, 'radius', QQ.convert(self.radius))


@dataclass(frozen=True)
class Plane:
    """Oriented plane v . n = h with unit normal"""
    normal: Tuple[Rational, ...]
    offset: Rational

    def __post_init__(self):
        normal = _rationals(self.normal, 3, "Plane normal")
        if sum(n * n for n in normal) != 1:
            raise DegenerateInputError("plane normal must satisfy n.n = 1", {'normal': [str(n) for n in normal]})
        object.__setattr__(self, 'normal', normal)
        object.__setattr__(self, 'offset', QQ.convert(self.offset))


@dataclass(frozen=True)
class Point4:
    """Point (y1, y2, y3, y4) of the Lorentz space"""
    coords: Tuple[Rational, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coords', _rationals(self.coords, 4, "Point4"))

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, index):
        return self.coords[index]

    def __len__(self):
        return 4


class LineType(Enum):
    PLUS = "(+)-line"
    ZERO = "(0)-line"
    MINUS = "(-)-line"


def lie_product(x: Sequence, z: Sequence):
    """[x,z] = (-x1 z2 - x2 z1)/2 + x3 z3 + x4 z4 + x5 z5 - x6 z6"""
    return -(x[0] * z[1] + x[1] * z[0]) * HALF + x[2] * z[2] + x[3] * z[3] + x[4] * z[4] - x[5] * z[5]


def apply_c_vector(x: Sequence) -> tuple:
    """Row vector x C, so that lie_product(x, z) equals (x C) . z"""
    return (-x[1] * HALF, -x[0] * HALF, x[2], x[3], x[4], -x[5])


def apply_c(x: LiePoint) -> LiePoint:
    return LiePoint(apply_c_vector(x))


def lorentz(v: Sequence, w: Sequence):
    """<v,w> = v1 w1 + v2 w2 + v3 w3 - v4 w4"""
    return v[0] * w[0] + v[1] * w[1] + v[2] * w[2] - v[3] * w[3]


def sphere_to_lie(s: Sphere) -> LiePoint:
    p, r = s.center, s.radius
    pp = sum(c * c for c in p)
    return LiePoint((2 * (pp - r * r), QQ(2), 2 * p[0], 2 * p[1], 2 * p[2], 2 * r))


def plane_to_lie(plane: Plane) -> LiePoint:
    n = plane.normal
    return LiePoint((2 * plane.offset, QQ.zero, n[0], n[1], n[2], QQ.one))


def phi(x: LiePoint) -> Point4:
    """Affine chart (y1/y0, y2/y0, y3/y0, y4/y0)"""
    y0 = x[1]
    if not y0:
        raise DegenerateInputError("point in tangent hyperplane T_q", {'point': [str(c) for c in x]})
    return Point4(tuple(c / y0 for c in x.coords[2:]))


def phi_inverse(y: Point4) -> LiePoint:
    return LiePoint((lorentz(y, y), QQ.one) + tuple(y))


def phi_inverse_proj(ybar: Sequence) -> LiePoint:
    """(<y,y> : y0² : y0 y1 : ... : y0 y4) for ybar = (y0, y1, ..., y4)"""
    y0, y = QQ.convert(ybar[0]), _rationals(ybar[1:], 4, "projective point")
    if not y0 and not any(y):
        raise DegenerateInputError("projective point must not be zero")
    return LiePoint((lorentz(y, y), y0 * y0) + tuple(y0 * c for c in y))


def phi_inverse_polynomials() -> Tuple[MultiPoly, ...]:
    """The six quadrics (<y,y>, y0², y0 y1, ..., y0 y4) in the MultiPoly ring"""
    y = (Y1, Y2, Y3, Y4)
    return (lorentz(y, y), Y0 * Y0) + tuple(Y0 * c for c in y)


def oriented_contact(s1: Sphere, s2: Sphere) -> bool:
    """True iff the spheres touch with matching orientation"""
    return lie_product(sphere_to_lie(s1), sphere_to_lie(s2)) == 0


def line_type(v: Point4) -> LineType:
    if not any(v):
        raise DegenerateInputError("line direction must not be zero")
    value = lorentz(v, v)
    if value > 0:
        return LineType.PLUS
    if value < 0:
        return LineType.MINUS
    return LineType.ZERO


def isotropic_cone_eval(a: Sequence, y: Sequence):
    """g((a0:a),(y0:y)) = y0²<a,a> - 2 a0 y0 <a,y> + a0²<y,y>"""
    a0, av = a[0], a[1:]
    y0, yv = y[0], y[1:]
    return y0 * y0 * lorentz(av, av) - 2 * a0 * y0 * lorentz(av, yv) + a0 * a0 * lorentz(yv, yv)


def same_projective_point(x: Sequence, z: Sequence) -> bool:
    """Proportionality of two nonzero representatives"""
    return all(x[i] * z[j] == x[j] * z[i] for i in range(len(x)) for j in range(i + 1, len(x)))
