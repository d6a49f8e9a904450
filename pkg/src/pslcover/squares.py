"""The squaring map on PSL(2,R) and its lift to the universal cover.

Squaring is well defined from PSL(2,R) to SL(2,R) since (-A)^2 = A^2.  Its
image J consists of the matrices of trace > -2 together with -I; off -I the
square root is unique and closed-form, A = (K + I)/sqrt(tr K + 2), while the
fiber over -I is the conjugacy class of the quarter turn J0.  On the universal
cover the square root stays unique (the cover is torsion-free) and exists
exactly away from the odd hyperbolic wedges and walls; paths through the odd
central points z^(2k+1) are lifted by bridging through the fiber.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import cover, sl2
from .cover import PI, CoverElement
from .errors import (
    AmbiguousRegion,
    CentralInput,
    DivergentApproach,
    NegIdentityFiber,
    NotInImage,
    StepTooCoarse,
)
from .sl2 import ProjectiveIsometry, UnitDetMatrix, projectivize

TAU_CENTRAL = 1e-7          # detection tolerance for central path samples
BRIDGE_SAMPLES = 32         # initial sample count of a fiber bridge
CAUCHY_WINDOW = 16          # pre-crossing samples subjected to the Cauchy test


def square(p: ProjectiveIsometry) -> UnitDetMatrix:
    """p^2 as an SL(2,R) element; independent of the sign of the lift."""
    m = p.rep
    return sl2.multiply(m, m)


def in_image_J(k: UnitDetMatrix) -> bool:
    """Membership in the image of squaring: tr > -2, or k = -I."""
    if k.trace > -2.0 + sl2.TAU_CLASS:
        return True
    return sl2.frobenius(k, -sl2.IDENTITY_MATRIX) <= sl2.TAU_CLASS


def psl_sqrt(k: UnitDetMatrix) -> ProjectiveIsometry:
    """The unique projective square root of k, for tr k > -2."""
    if sl2.frobenius(k, -sl2.IDENTITY_MATRIX) <= sl2.TAU_CLASS:
        raise NegIdentityFiber(
            "-I has a one-parameter family of square roots; use fiber_neg_identity")
    s = k.trace + 2.0
    if s <= sl2.TAU_CLASS:
        raise NotInImage(f"trace {k.trace} is not > -2")
    r = 1.0 / math.sqrt(s)
    return projectivize(sl2.from_scaled(
        (k.a + 1.0) * r, k.b * r, k.c * r, (k.d + 1.0) * r))


def fiber_neg_identity(g: ProjectiveIsometry | UnitDetMatrix) -> ProjectiveIsometry:
    """The square root of -I conjugated into position by g: g J0 g^{-1}."""
    m = g.rep if isinstance(g, ProjectiveIsometry) else g
    return projectivize(sl2.conjugate(m, sl2.J0))


def fiber_coordinates(p: ProjectiveIsometry | UnitDetMatrix,
                      tol: float = 1e-6) -> tuple[float, float]:
    """Coordinates (x, z), z > 0, of a trace-zero projective element.

    A trace-zero unit-determinant matrix [[x, *], [z, -x]] has z != 0 (else
    the determinant would be -x^2 <= 0), so after a sign flip making z > 0
    the pair (x, z) parametrizes the fiber over -I.
    """
    m = p.rep if isinstance(p, ProjectiveIsometry) else p
    if abs(m.trace) > tol:
        raise NotInImage(f"trace {m.trace} is not 0; not in the fiber over -I")
    x = 0.5 * (m.a - m.d)
    z = m.c
    if z < 0.0:
        x, z = -x, -z
    return x, z


def fiber_conjugator_from(x: float, z: float) -> UnitDetMatrix:
    """The triangular g with g J0 g^{-1} = [[x, (-1-x^2)/z], [z, -x]]."""
    rz = math.sqrt(z)
    return sl2.from_scaled(1.0 / rz, x / rz, 0.0, rz)


def fiber_conjugator(p: ProjectiveIsometry, tol: float = 1e-6) -> UnitDetMatrix:
    """A conjugator g with fiber_neg_identity(g) = p, for trace-0 p."""
    return fiber_conjugator_from(*fiber_coordinates(p, tol=tol))


def in_J_tilde(x: CoverElement) -> bool:
    """Membership in the image of squaring on the cover.

    Excluded: hyperbolic wedges H(odd) and walls P+(odd)/P-(odd).  All central
    points are allowed (odd ones as limits of the fiber bridges).
    """
    reg = cover.classify_region(x)
    if reg.letter in ("H", "P+", "P-") and reg.index % 2 != 0:
        return False
    return True


def cover_sqrt(k: CoverElement) -> CoverElement:
    """The unique square root of k in the universal cover.

    The projective square root is lifted to its base lift and the remaining
    deck defect, necessarily an integer multiple of pi, is split in half; an
    odd defect means k is not a square.
    """
    if cover.is_central(k):
        raise CentralInput("central targets are handled by central_fiber_element")
    if not in_J_tilde(k):
        raise NotInImage(f"region {cover.classify_region(k)} is outside the image")
    # the SL(2,R) representative picked by the lift parity is the one whose
    # square root lifts to a root of k; its trace exceeds -2 exactly because
    # the odd wedges and walls were excluded above
    a0 = cover.lift_base(psl_sqrt(cover.project_sl2(k)))
    sq = cover.cover_mul(a0, a0)
    defect = k.lift - sq.lift
    n = round(defect / PI)
    if abs(defect - n * PI) > 1e-6:
        raise NotInImage(f"lift defect {defect} is not a multiple of pi")
    if n % 2 != 0:
        raise NotInImage("odd deck defect: no square root in the cover")
    return cover.shift(a0, n // 2)


def central_fiber_element(g: ProjectiveIsometry | UnitDetMatrix, k: int) -> CoverElement:
    """The lift of g J0 g^{-1} whose square is z^(2k+1)."""
    b0 = cover.lift_base(fiber_neg_identity(g))
    sq = cover.cover_mul(b0, b0)
    q = round(sq.lift / PI)
    # q is odd: a trace-zero element squares to an odd central point
    return cover.shift(b0, (2 * k + 1 - q) // 2)


@dataclass(frozen=True)
class CrossingSpec:
    """Marks a path sample sitting at the odd central point z^(2k+1)."""

    index: int
    k: int
    pre_conjugator: Optional[ProjectiveIsometry] = None
    post_conjugator: Optional[ProjectiveIsometry] = None


def _bridge(pre: CoverElement, post: CoverElement, k: int,
            coords0: tuple[float, float], coords1: tuple[float, float],
            eta_out: float) -> list[CoverElement]:
    """Fiber path of square roots of z^(2k+1) joining (approximately) the
    one-sided limits pre and post, densified until steps are below eta_out."""
    x0, z0 = coords0
    x1, z1 = coords1
    n = BRIDGE_SAMPLES
    while True:
        out = []
        for i in range(n + 1):
            s = i / n
            x = (1.0 - s) * x0 + s * x1
            z = z0 * (z1 / z0) ** s
            out.append(central_fiber_element(fiber_conjugator_from(x, z), k))
        ok = all(cover.cover_distance(out[i], out[i + 1]) <= eta_out
                 for i in range(n))
        if ok:
            break
        if n > (1 << 16):
            raise StepTooCoarse("fiber bridge would not densify below eta_out")
        n *= 2
    if cover.cover_distance(pre, out[0]) > 4.0 * eta_out or \
            cover.cover_distance(out[-1], post) > 4.0 * eta_out:
        raise StepTooCoarse("one-sided limits too far from the fiber bridge")
    return out


def lift_square_path(path: Sequence[CoverElement],
                     crossings: Sequence[CrossingSpec] = (),
                     eta_out: float = 0.05) -> list[CoverElement]:
    """Square roots along a discrete path in the image of cover squaring.

    Away from the flagged central crossings each sample gets its (unique)
    cover_sqrt; at a crossing the two one-sided root limits are joined by an
    inserted path inside the fiber over z^(2k+1), so the output is a
    continuous discrete path whose squares reproduce the input (with constant
    central stretches where bridges were inserted).  Samples are only ever
    inserted, never removed, so the caller's endpoints survive.
    """
    if not path:
        return []
    cross_by_index = {c.index: c for c in crossings}
    for c in crossings:
        val = path[c.index]
        target = cover.z_power(2 * c.k + 1)
        if cover.cover_distance(val, target) > max(TAU_CENTRAL, eta_out):
            raise NotInImage(
                f"crossing at index {c.index} is not within tolerance of "
                f"z^{2 * c.k + 1}")
    roots: list[Optional[CoverElement]] = []
    for i, x in enumerate(path):
        if i in cross_by_index:
            roots.append(None)
            continue
        try:
            roots.append(cover_sqrt(x))
        except CentralInput:
            # unflagged central sample: even powers have a unique root
            m = cover.central_power(x, tol=max(TAU_CENTRAL, eta_out))
            if m % 2 != 0:
                raise NotInImage(
                    f"unflagged odd central sample at index {i}") from None
            roots.append(cover.z_power(m // 2))
        except AmbiguousRegion:
            raise NotInImage(
                f"sample {i} sits on a region wall at this tolerance") from None
    out: list[CoverElement] = []
    i = 0
    n = len(path)
    while i < n:
        if roots[i] is not None:
            prev = out[-1] if out else None
            if prev is not None and \
                    cover.cover_distance(prev, roots[i]) > eta_out and \
                    (i - 1) not in cross_by_index:
                raise StepTooCoarse(
                    f"root step {cover.cover_distance(prev, roots[i]):.3g} at "
                    f"index {i} exceeds eta_out={eta_out}")
            out.append(roots[i])
            i += 1
            continue
        spec = cross_by_index[i]
        if i == 0 or i == n - 1 or roots[i - 1] is None or roots[i + 1] is None:
            raise NotInImage("crossings must be isolated interior samples")
        # Cauchy test on the approach from each side (the Remark obstruction)
        for side in (roots[max(0, i - CAUCHY_WINDOW):i],
                     roots[i + 1:i + 1 + CAUCHY_WINDOW]):
            window = [r for r in side if r is not None]
            for a in window:
                for b in window:
                    if cover.cover_distance(a, b) > 4.0 * eta_out:
                        raise DivergentApproach(
                            "square roots oscillate on approach to the "
                            f"crossing at index {i}")
        pre, post = roots[i - 1], roots[i + 1]
        if spec.pre_conjugator is not None:
            c_pre = fiber_coordinates(fiber_neg_identity(spec.pre_conjugator))
        else:
            c_pre = fiber_coordinates(pre.base, tol=8.0 * eta_out)
        if spec.post_conjugator is not None:
            c_post = fiber_coordinates(fiber_neg_identity(spec.post_conjugator))
        else:
            c_post = fiber_coordinates(post.base, tol=8.0 * eta_out)
        out.extend(_bridge(pre, post, spec.k, c_pre, c_post, eta_out))
        i += 1
    return out


def remark_counterexample(tgrid: Sequence[float]) -> list[UnitDetMatrix]:
    """The elliptic path K_t = g_t R_(pi - t) g_t^{-1} that converges to -I
    while its square roots oscillate between two limits.

    g_t = [[sqrt2 + sin(1/t), cos(1/t)], [cos(1/t), sqrt2 - sin(1/t)]] has
    determinant 1; along t_n = 1/(2*pi*n + pi/2) it tends to diag(sqrt2 + 1,
    sqrt2 - 1) and along 1/(2*pi*n + 3*pi/2) to diag(sqrt2 - 1, sqrt2 + 1),
    so the conjugated roots g_t R_((pi - t)/2) g_t^{-1} have two distinct
    accumulation points even though K_t -> -I.
    """
    r2 = math.sqrt(2.0)
    out = []
    for t in tgrid:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"grid value {t} outside (0, 1]")
        s, c = math.sin(1.0 / t), math.cos(1.0 / t)
        g = UnitDetMatrix(r2 + s, c, c, r2 - s)
        out.append(sl2.conjugate(g, sl2.rotation(PI - t)))
    return out


def remark_sqrt(tgrid: Sequence[float]) -> list[ProjectiveIsometry]:
    """psl_sqrt along the Remark path, computed in closed form."""
    return [psl_sqrt(k) for k in remark_counterexample(tgrid)]
