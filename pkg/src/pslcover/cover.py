"""The universal cover of PSL(2,R).

PSL(2,R) acts on the circle of directions through the origin (period pi).  An
element of the universal cover is a projective isometry together with the
value at 0 of a chosen increasing lift of its direction action; the lift value
is congruent to alpha(g) = atan2(c, a) modulo pi.  The center is generated by
z = (identity, pi); z^2 covers the SL(2,R) deck transformation.

Region bookkeeping follows the displacement function (f(t) - t)/pi of the
lifted action: its extrema [m_low, m_high] classify an element into elliptic
bands E(i), hyperbolic wedges H(i), parabolic walls P+(i)/P-(i), or central
points Z(k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import sl2
from .errors import AmbiguousRegion, NotHyperbolic, NotCentral
from .sl2 import ProjectiveIsometry, PROJ_IDENTITY, projectivize

PI = math.pi
TAU_ROT = 1e-9   # rotation detection threshold on sqrt(q^2 + r^2)
TAU_REG = 1e-7   # region wall tolerance, in units of pi


@dataclass(frozen=True)
class CoverElement:
    """Element of the universal cover: projective base plus lift value f(0)."""

    base: ProjectiveIsometry
    lift: float


@dataclass(frozen=True)
class Region:
    """Cover region label: letter in {E, H, P+, P-, Z} with integer index."""

    letter: str
    index: int

    def __str__(self):
        return f"{self.letter}({self.index})"


COVER_IDENTITY = CoverElement(PROJ_IDENTITY, 0.0)


def alpha(p):
    """Canonical direction angle of the first column, in [0, pi)."""
    m = p.rep
    return math.atan2(m.c, m.a) % PI


def lift_base(p):
    """The lift of p with lift value in [0, pi)."""
    return CoverElement(p, alpha(p))


def shift(x, k):
    """z^k * x: shift the lift by k*pi."""
    if k == 0:
        return x
    return CoverElement(x.base, x.lift + k * PI)


def z_power(k):
    return CoverElement(PROJ_IDENTITY, k * PI)


def act_lift(x, t):
    """Evaluate the increasing lift f of the direction action of x at t,
    normalized so f(0) = x.lift."""
    n = math.floor(t / PI)
    t0 = t - n * PI
    m = x.base.rep
    ct, st = math.cos(t0), math.sin(t0)
    img = math.atan2(m.c * ct + m.d * st, m.a * ct + m.b * st) % PI
    # unique representative of img (mod pi) in [x.lift, x.lift + pi)
    img += PI * math.ceil((x.lift - img) / PI)
    if img < x.lift:  # guard against rounding at the interval edge
        img += PI
    elif img >= x.lift + PI:
        img -= PI
    return img + n * PI


def cover_mul(x, y):
    """Product in the universal cover (composition of lifted actions)."""
    base = sl2.proj_multiply(x.base, y.base)
    lift = act_lift(x, y.lift)
    # re-anchor onto the canonical angle of the product base to kill drift
    a0 = alpha(base)
    k = round((lift - a0) / PI)
    return CoverElement(base, a0 + k * PI)


def cover_inv(x):
    """Inverse in the universal cover."""
    base = sl2.proj_invert(x.base)
    l0 = alpha(base)
    s = act_lift(x, l0)
    k = round(-s / PI)
    return CoverElement(base, l0 + k * PI)


def project_sl2(x):
    """The SL(2,R) representative selected by the parity of the lift."""
    m = x.base.rep
    a0 = math.atan2(m.c, m.a)
    n = round((x.lift - a0) / PI)
    return m if n % 2 == 0 else -m


def cover_trace(x):
    return project_sl2(x).trace


def cover_distance(x, y):
    """Product distance: sign-minimized Frobenius on bases plus lift gap."""
    return sl2.proj_distance(x.base, y.base) + abs(x.lift - y.lift)


def displacement_extrema(x):
    """Min and max of (f(t) - t)/pi over one period of the lifted action."""
    m = x.base.rep
    a, b, c, d = m.entries()
    p = 0.5 * (a * a + b * b + c * c + d * d)
    q = 0.5 * (a * a + c * c - b * b - d * d)
    r = a * b + c * d
    rad = math.hypot(q, r)
    if rad <= TAU_ROT:
        # rotation: constant displacement equal to the lift value
        v = x.lift / PI
        return (v, v)
    co = (1.0 - p) / rad
    co = max(-1.0, min(1.0, co))
    phi = math.acos(co)
    psi = math.atan2(r, q)
    vals = []
    for tt in ((psi + phi) / 2.0, (psi - phi) / 2.0):
        vals.append((act_lift(x, tt) - tt) / PI)
    return (min(vals), max(vals))


def classify_region(x, tau=TAU_REG):
    """Region of a cover element; raises AmbiguousRegion inside wall bands."""
    if sl2.conj_type(x.base) == sl2.IDENTITY:
        return Region("Z", round(x.lift / PI))
    ml, mh = displacement_extrema(x)
    nl, nh = round(ml), round(mh)
    low_wall = abs(ml - nl) <= tau
    high_wall = abs(mh - nh) <= tau
    if low_wall and high_wall:
        raise AmbiguousRegion(f"extrema [{ml}, {mh}] both within {tau} of integers")
    if low_wall:
        if mh > nl + tau:
            return Region("P+", nl)
        raise AmbiguousRegion(f"extrema [{ml}, {mh}] ambiguous near {nl}")
    if high_wall:
        if ml < nh - tau:
            return Region("P-", nh)
        raise AmbiguousRegion(f"extrema [{ml}, {mh}] ambiguous near {nh}")
    lo = math.floor(ml)
    if math.floor(mh) == lo:
        if ml > lo + tau and mh < lo + 1 - tau:
            return Region("E", lo)
        raise AmbiguousRegion(f"extrema [{ml}, {mh}] too close to a wall")
    interior = [i for i in range(math.floor(ml) + 1, math.floor(mh) + 1)
                if ml + tau < i < mh - tau]
    if len(interior) == 1:
        return Region("H", interior[0])
    raise AmbiguousRegion(f"extrema [{ml}, {mh}] straddle {len(interior)} integers")


def is_central(x, tol=TAU_REG):
    """True when the base is (within tolerance) the identity isometry."""
    return sl2.proj_distance(x.base, PROJ_IDENTITY) <= tol


def central_power(x, tol=TAU_REG):
    """k such that x is within tolerance of z^k; raises NotCentral otherwise."""
    if sl2.proj_distance(x.base, PROJ_IDENTITY) > tol:
        raise NotCentral("base is not the identity isometry")
    k = round(x.lift / PI)
    if abs(x.lift - k * PI) > max(tol, 1e-7):
        raise NotCentral("lift is not an integer multiple of pi")
    return k


def canonical_hyperbolic_lift(p):
    """The H(0) lift of a hyperbolic isometry, pinned by its expanding
    fixed direction t_f in [0, pi): lift lies in (t_f - pi, t_f]."""
    if sl2.conj_type(p) != sl2.HYPERBOLIC:
        raise NotHyperbolic("canonical lift requires a hyperbolic element")
    m = p.rep
    tr = m.trace
    disc = math.sqrt(tr * tr - 4.0)
    lam = (tr + disc) / 2.0 if tr > 0 else (tr - disc) / 2.0  # |lam| > 1
    # eigenvector of the eigenvalue of largest magnitude
    v1 = (m.b, lam - m.a)
    v2 = (lam - m.d, m.c)
    v = v1 if math.hypot(*v1) >= math.hypot(*v2) else v2
    t_f = math.atan2(v[1], v[0]) % PI
    a0 = alpha(p)
    lift = a0 - PI * math.ceil((a0 - t_f) / PI)
    # keep strictly inside (t_f - pi, t_f]
    if lift > t_f:
        lift -= PI
    elif lift <= t_f - PI:
        lift += PI
    return CoverElement(p, lift)


def continue_lift(prev, p):
    """Lift of the isometry p whose lift value is nearest to prev.lift.

    Continuation helper for discrete paths: among all lifts of p, pick the one
    minimizing |lift - prev.lift|.
    """
    a0 = alpha(p)
    k = round((prev.lift - a0) / PI)
    return CoverElement(p, a0 + k * PI)
