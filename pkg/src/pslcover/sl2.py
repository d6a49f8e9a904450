"""Arithmetic in SL(2,R) and PSL(2,R).

Matrices are stored as four floats with determinant 1.  A projective isometry
is represented by the canonical sign choice of its matrix: positive trace, or
(for trace zero) the first entry of (a, c, b) of significant magnitude made
positive.  Tying the sign to the first column means the canonical direction
angle atan2(c, a) of a trace-zero element always lies in [0, pi), which is the
convention the universal-cover layer builds on.

All 2x2 operations are closed-form in plain floats; this keeps the hot loops
(a hundred thousand square roots in the acceptance suite) an order of
magnitude faster than going through numpy for each tiny matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonFinite, NonPositiveDeterminant

TAU_DET = 1e-12     # determinant renormalization guard
TAU_DET_IN = 1e-6   # relative window within which inputs are renormalized
TAU_TR = 1e-9       # trace sign tie-break threshold
TAU_CLASS = 1e-9    # conjugacy classification band around |tr| = 2

ELLIPTIC = "elliptic"
PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"
IDENTITY = "identity"


@dataclass(frozen=True)
class UnitDetMatrix:
    """A real 2x2 matrix of determinant 1 (entries row-major a, b, c, d)."""

    a: float
    b: float
    c: float
    d: float

    @property
    def trace(self):
        return self.a + self.d

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __neg__(self):
        return UnitDetMatrix(-self.a, -self.b, -self.c, -self.d)


IDENTITY_MATRIX = UnitDetMatrix(1.0, 0.0, 0.0, 1.0)
J0 = UnitDetMatrix(0.0, -1.0, 1.0, 0.0)  # quarter turn; J0^2 = -I


def make_unit_det(a, b, c, d):
    """Validate and renormalize four entries into a UnitDetMatrix.

    The determinant must be positive and within relative 1e-6 of 1; it is
    divided out exactly rather than trusted.
    """
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c) and math.isfinite(d)):
        raise NonFinite("matrix entry is not finite")
    det = a * d - b * c
    if det <= 0.0:
        raise NonPositiveDeterminant(f"determinant {det} is not positive")
    if abs(det - 1.0) > TAU_DET_IN:
        raise NonPositiveDeterminant(f"determinant {det} too far from 1")
    if abs(det - 1.0) > TAU_DET:
        s = 1.0 / math.sqrt(det)
        return UnitDetMatrix(a * s, b * s, c * s, d * s)
    return UnitDetMatrix(a, b, c, d)


def _renorm(a, b, c, d):
    # internal: renormalize a product whose det may have drifted; prescale by
    # the largest entry so det never overflows for huge group elements
    big = max(abs(a), abs(b), abs(c), abs(d))
    if big > 1e100:
        a, b, c, d = a / big, b / big, c / big, d / big
        det = a * d - b * c
        if det <= 0.0:
            raise NonPositiveDeterminant(
                f"determinant lost to overflow (scale {big:.3e})")
        s = 1.0 / math.sqrt(det)
        return UnitDetMatrix(a * s, b * s, c * s, d * s)
    det = a * d - b * c
    if abs(det - 1.0) > TAU_DET:
        s = 1.0 / math.sqrt(det)
        return UnitDetMatrix(a * s, b * s, c * s, d * s)
    return UnitDetMatrix(a, b, c, d)


def from_scaled(a, b, c, d):
    """Build a UnitDetMatrix from entries with arbitrary positive determinant."""
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c) and math.isfinite(d)):
        raise NonFinite("matrix entry is not finite")
    det = a * d - b * c
    if det <= 0.0:
        raise NonPositiveDeterminant(f"determinant {det} is not positive")
    s = 1.0 / math.sqrt(det)
    return UnitDetMatrix(a * s, b * s, c * s, d * s)


def multiply(m, n):
    return _renorm(
        m.a * n.a + m.b * n.c,
        m.a * n.b + m.b * n.d,
        m.c * n.a + m.d * n.c,
        m.c * n.b + m.d * n.d,
    )


def invert(m):
    return UnitDetMatrix(m.d, -m.b, -m.c, m.a)


def conjugate(g, m):
    """g m g^{-1}."""
    return multiply(multiply(g, m), invert(g))


def frobenius(m, n):
    """Frobenius distance between two matrices."""
    return math.sqrt(
        (m.a - n.a) ** 2 + (m.b - n.b) ** 2 + (m.c - n.c) ** 2 + (m.d - n.d) ** 2
    )


def canonical_sign(m):
    """The canonical representative in {m, -m}."""
    tr = m.a + m.d
    if tr > TAU_TR:
        return m
    if tr < -TAU_TR:
        return -m
    for entry in (m.a, m.c, m.b):
        if entry > TAU_TR:
            return m
        if entry < -TAU_TR:
            return -m
    # det 1 forces a large trace when a, b, c are all tiny; unreachable
    return m


@dataclass(frozen=True)
class ProjectiveIsometry:
    """An element of PSL(2,R), stored by its canonical matrix representative."""

    rep: UnitDetMatrix

    @property
    def trace(self):
        return self.rep.trace


def projectivize(m):
    """Project a UnitDetMatrix to PSL(2,R)."""
    return ProjectiveIsometry(canonical_sign(m))


PROJ_IDENTITY = ProjectiveIsometry(IDENTITY_MATRIX)


def proj_multiply(p, q):
    return projectivize(multiply(p.rep, q.rep))


def proj_invert(p):
    return projectivize(invert(p.rep))


def proj_conjugate(g, p):
    """Conjugate a projective isometry by g (UnitDetMatrix or ProjectiveIsometry)."""
    if isinstance(g, ProjectiveIsometry):
        g = g.rep
    return projectivize(conjugate(g, p.rep))


def proj_distance(p, q):
    """min over signs of the Frobenius distance between representatives."""
    return min(frobenius(p.rep, q.rep), frobenius(p.rep, -q.rep))


def conj_type(p):
    """Conjugacy classification of a projective isometry."""
    m = p.rep if isinstance(p, ProjectiveIsometry) else canonical_sign(p)
    if min(frobenius(m, IDENTITY_MATRIX), frobenius(m, -IDENTITY_MATRIX)) <= TAU_CLASS:
        return IDENTITY
    t = abs(m.trace)
    if t > 2.0 + TAU_CLASS:
        return HYPERBOLIC
    if t < 2.0 - TAU_CLASS:
        return ELLIPTIC
    return PARABOLIC


def is_hyperbolic(p):
    return conj_type(p) == HYPERBOLIC


# --- canonical one-parameter families ---------------------------------------

def rotation(theta):
    """R_theta = [[cos, sin], [-sin, cos]]; acts on directions by t -> t - theta."""
    ct, st = math.cos(theta), math.sin(theta)
    return UnitDetMatrix(ct, st, -st, ct)


def boost(t):
    """H_t = [[cosh, sinh], [sinh, cosh]], hyperbolic for t != 0."""
    ch, sh = math.cosh(t), math.sinh(t)
    return UnitDetMatrix(ch, sh, sh, ch)


def parabolic(u):
    """P_u = [[1, u], [0, 1]]."""
    return UnitDetMatrix(1.0, float(u), 0.0, 1.0)


def diagonal(lam):
    """diag(lam, 1/lam) for lam > 0."""
    if lam <= 0:
        raise NonPositiveDeterminant("diagonal entry must be positive")
    return UnitDetMatrix(float(lam), 0.0, 0.0, 1.0 / lam)


# --- random sampling ---------------------------------------------------------

def random_unit_det(rng):
    """Random SL(2,R) matrix: 4 iid standard normals, reject det <= 0.01."""
    while True:
        a, b, c, d = rng.standard_normal(4)
        det = a * d - b * c
        if det > 0.01:
            s = 1.0 / math.sqrt(det)
            return UnitDetMatrix(a * s, b * s, c * s, d * s)


def random_isometry(rng):
    return projectivize(random_unit_det(rng))


def random_hyperbolic(rng):
    while True:
        p = random_isometry(rng)
        if conj_type(p) == HYPERBOLIC:
            return p


# --- serialization ------------------------------------------------------------

def matrix_to_text(m):
    return " ".join(f"{x:.17g}" for x in m.entries())


def matrix_from_text(line):
    from .errors import ParseError

    parts = line.split()
    if len(parts) != 4:
        raise ParseError(f"expected 4 entries, got {len(parts)}")
    try:
        vals = [float(x) for x in parts]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return make_unit_det(*vals)
