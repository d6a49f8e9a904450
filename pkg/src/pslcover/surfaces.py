"""Surface group representations and their characteristic classes.

A surface is presented by crosscap generators a_i, handle generators x_j, y_j
and boundary generators c_l with the single relator
a_1^2 ... a_c^2 [x_1,y_1] ... [x_h,y_h] c_1 ... c_m.  Lifting the generator
images to the universal cover and evaluating the relator gives a central
element z^n; its residue class records the Stiefel-Whitney class o2 (crosscap
presentations, mod 2) or the relative Euler class e (orientable presentations
with canonical boundary lifts, full integer).  Central z-shifts of any single
generator lift cancel in the relator because every generator has even total
exponent (or is normalized canonically), which is what makes the classes
well defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import cover, sl2, squares, words
from .errors import (
    InterfaceNotHyperbolic,
    NotCentral,
    NotInW,
    RelationViolated,
    TargetUnreachable,
)
from .sl2 import ProjectiveIsometry, projectivize

TAU_REL = 1e-8
TAU_CENTRAL = 1e-6   # per relator letter

EULER_INTEGER = "EulerInteger"
SW_MOD2 = "SWMod2"


@dataclass(frozen=True)
class SurfacePresentation:
    """Presentation data: crosscaps + handles + boundary, one relator.

    genus is the non-orientable genus k (= crosscaps + 2*handles) when
    non-orientable, the orientable genus g (= handles) otherwise.
    """

    orientable: bool
    genus: int
    boundary: int = 0
    handles: int = 0    # only meaningful for non-orientable mixed forms

    def __post_init__(self):
        if self.genus < 0 or self.boundary < 0 or self.handles < 0:
            raise ValueError("negative presentation data")
        if self.orientable:
            if self.handles not in (0, self.genus):
                raise ValueError("orientable surfaces have genus = handles")
        else:
            if self.crosscaps < 1:
                raise ValueError(
                    "non-orientable presentation needs at least one crosscap")

    @property
    def crosscaps(self) -> int:
        return 0 if self.orientable else self.genus - 2 * self.handles

    @property
    def handle_count(self) -> int:
        return self.genus if self.orientable else self.handles

    @property
    def generator_count(self) -> int:
        return self.crosscaps + 2 * self.handle_count + self.boundary

    @property
    def euler_characteristic(self) -> int:
        if self.orientable:
            return 2 - 2 * self.genus - self.boundary
        return 2 - self.genus - self.boundary

    def relator(self) -> words.Word:
        return words.relator_word(self.crosscaps, self.handle_count,
                                  self.boundary)

    def boundary_indices(self) -> range:
        n = self.generator_count
        return range(n - self.boundary, n)


@dataclass(frozen=True)
class Representation:
    """Generator images (projective isometries) in presentation order."""

    presentation: SurfacePresentation
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.presentation.generator_count:
            raise ValueError(
                f"expected {self.presentation.generator_count} images, "
                f"got {len(self.images)}")


@dataclass(frozen=True)
class ClassValue:
    """A characteristic class value: integer Euler or mod-2 Stiefel-Whitney."""

    kind: str
    value: int

    def __str__(self):
        return (f"euler={self.value}" if self.kind == EULER_INTEGER
                else f"sw={self.value}")


def relation_residual(r: Representation) -> float:
    """Distance of the relator image from the identity in PSL(2,R)."""
    val = words.evaluate_proj(r.presentation.relator(), r.images)
    return sl2.proj_distance(val, sl2.PROJ_IDENTITY)


def in_W(r: Representation) -> bool:
    """All boundary images hyperbolic and the relation satisfied."""
    if relation_residual(r) > TAU_REL:
        return False
    return all(sl2.is_hyperbolic(r.images[i])
               for i in r.presentation.boundary_indices())


def _central_tol(p: SurfacePresentation) -> float:
    return TAU_CENTRAL * max(1, len(p.relator()))


def _relator_power(r: Representation, lifts) -> int:
    """Central power of the lifted relator; NotCentral if the lift product
    is not within tolerance of a deck element."""
    val = words.evaluate_cover(r.presentation.relator(), lifts)
    return cover.central_power(val, tol=_central_tol(r.presentation))


def _free_lifts(r: Representation, lift_offsets: Optional[Sequence[int]],
                n_free: int):
    offs = lift_offsets if lift_offsets is not None else (0,) * n_free
    if len(offs) != n_free:
        raise ValueError(f"expected {n_free} lift offsets, got {len(offs)}")
    return [cover.shift(cover.lift_base(r.images[i]), offs[i])
            for i in range(n_free)]


def sw_class_closed(r: Representation,
                    lift_offsets: Optional[Sequence[int]] = None) -> ClassValue:
    """Stiefel-Whitney class of a closed non-orientable representation.

    The relator evaluated on any lifts of the generator images is central;
    its deck power mod 2 is independent of the lift choices (lift_offsets
    exercise exactly that freedom).
    """
    p = r.presentation
    if p.orientable or p.boundary != 0:
        raise ValueError("closed non-orientable presentation required")
    if relation_residual(r) > TAU_REL:
        raise RelationViolated(
            f"relator residual {relation_residual(r):.3g} exceeds {TAU_REL}")
    lifts = _free_lifts(r, lift_offsets, p.generator_count)
    return ClassValue(SW_MOD2, _relator_power(r, lifts) % 2)


def sw_class_relative(r: Representation,
                      lift_offsets: Optional[Sequence[int]] = None) -> ClassValue:
    """Relative Stiefel-Whitney class of a bounded non-orientable
    representation with hyperbolic boundary: boundary images take their
    canonical H(0) lifts, interior generators any lifts."""
    p = r.presentation
    if p.orientable or p.boundary < 1:
        raise ValueError("bounded non-orientable presentation required")
    if not in_W(r):
        raise NotInW("boundary images must be hyperbolic with the relation met")
    n_free = p.generator_count - p.boundary
    lifts = _free_lifts(r, lift_offsets, n_free)
    lifts += [cover.canonical_hyperbolic_lift(r.images[i])
              for i in p.boundary_indices()]
    return ClassValue(SW_MOD2, _relator_power(r, lifts) % 2)


def euler_relative(r: Representation,
                   lift_offsets: Optional[Sequence[int]] = None) -> ClassValue:
    """Relative Euler class of an orientable representation (full integer):
    commutators kill the lift freedom of handle generators, boundary images
    take canonical H(0) lifts."""
    p = r.presentation
    if not p.orientable:
        raise ValueError("orientable presentation required")
    if not in_W(r):
        raise NotInW("boundary images must be hyperbolic with the relation met")
    n_free = p.generator_count - p.boundary
    lifts = _free_lifts(r, lift_offsets, n_free)
    lifts += [cover.canonical_hyperbolic_lift(r.images[i])
              for i in p.boundary_indices()]
    return ClassValue(EULER_INTEGER, _relator_power(r, lifts))


def milnor_wood_check(r: Representation) -> bool:
    """|e| <= |Euler characteristic| for orientable representations in W."""
    return abs(euler_relative(r).value) <= abs(r.presentation.euler_characteristic)


# --- decompositions ----------------------------------------------------------

MOBIUS_ORIENTABLE = "mobius-orientable"
MOBIUS_NONORIENTABLE = "mobius-nonorientable"
PANTS_SPLIT = "pants"

PANTS = SurfacePresentation(orientable=True, genus=0, boundary=3)
ONE_HOLED_TORUS = SurfacePresentation(orientable=True, genus=1, boundary=1,
                                      handles=1)
MOBIUS = SurfacePresentation(orientable=False, genus=1, boundary=1)
TWO_HOLED_TORUS = SurfacePresentation(orientable=True, genus=1, boundary=2,
                                      handles=1)
TWO_HOLED_PROJ = SurfacePresentation(orientable=False, genus=1, boundary=2)


@dataclass(frozen=True)
class AdditivityReport:
    """Comparison of a total class with the sum over decomposition pieces."""

    split: str
    total: ClassValue
    pieces: tuple
    piece_sum: int
    matches: bool

    def __str__(self):
        parts = " + ".join(str(v) for _, v in self.pieces)
        return (f"{self.split}: total {self.total} vs {parts} "
                f"= {self.piece_sum} -> {'ok' if self.matches else 'MISMATCH'}")


def _mobius_piece(a: ProjectiveIsometry) -> Representation:
    c = sl2.proj_invert(sl2.proj_multiply(a, a))
    if not sl2.is_hyperbolic(c):
        raise InterfaceNotHyperbolic("crosscap square is not hyperbolic")
    return Representation(MOBIUS, (a, c))


def mixed_images(r: Representation):
    """Images of the crosscap-plus-handle generators for a closed genus-3 or
    genus-4 crosscap representation."""
    k = r.presentation.genus
    table = {3: words.GENUS3_TO_MIXED, 4: words.GENUS4_TO_MIXED}[k]
    return tuple(words.evaluate_exact(table[i + 1], r.images)
                 for i in range(len(table)))


def crosscap_images(p: SurfacePresentation, mixed):
    """Inverse of mixed_images: crosscap generator images from mixed ones."""
    table = {3: words.GENUS3_FROM_MIXED, 4: words.GENUS4_FROM_MIXED}[p.genus]
    return tuple(words.evaluate_exact(table[i + 1], mixed)
                 for i in range(len(table)))


def check_additivity(r: Representation, split: str) -> AdditivityReport:
    """Compare the class of r to the class sum over a built-in decomposition."""
    p = r.presentation
    if split == MOBIUS_ORIENTABLE:
        # closed genus-3: Mobius strip around the mixed crosscap A, whose
        # complement is a one-holed torus with boundary word [X,Y] = A^{-2}
        if p.orientable or p.boundary != 0 or p.genus != 3:
            raise ValueError("mobius-orientable split needs closed genus 3")
        total = sw_class_closed(r)
        A, X, Y = mixed_images(r)
        mob = _mobius_piece(A)
        comm = sl2.proj_multiply(
            sl2.proj_multiply(X, Y),
            sl2.proj_multiply(sl2.proj_invert(X), sl2.proj_invert(Y)))
        torus = Representation(ONE_HOLED_TORUS, (X, Y, sl2.proj_invert(comm)))
        v1 = sw_class_relative(mob)
        v2 = euler_relative(torus)
        s = (v1.value + v2.value) % 2
        return AdditivityReport(split, total,
                                (("mobius", v1), ("one-holed-torus", v2)),
                                s, s == total.value)
    if split == MOBIUS_NONORIENTABLE:
        # closed genus-k: Mobius strip around a_1, complement a bounded
        # non-orientable surface on a_2 ... a_k
        if p.orientable or p.boundary != 0 or p.handles != 0 or p.genus < 3:
            raise ValueError(
                "mobius-nonorientable split needs a closed crosscap "
                "presentation of genus >= 3")
        total = sw_class_closed(r)
        mob = _mobius_piece(r.images[0])
        rest_pres = SurfacePresentation(orientable=False, genus=p.genus - 1,
                                        boundary=1)
        tail = r.images[1:]
        prod = sl2.PROJ_IDENTITY
        for a in tail:
            prod = sl2.proj_multiply(prod, sl2.proj_multiply(a, a))
        rest = Representation(rest_pres, tail + (sl2.proj_invert(prod),))
        v1 = sw_class_relative(mob)
        v2 = sw_class_relative(rest)
        s = (v1.value + v2.value) % 2
        return AdditivityReport(split, total,
                                (("mobius", v1), ("bounded-piece", v2)),
                                s, s == total.value)
    if split == PANTS_SPLIT:
        # four-holed sphere cut into two pairs of pants along d = (c1 c2)^{-1}
        if not p.orientable or p.genus != 0 or p.boundary != 4:
            raise ValueError("pants split needs a four-holed sphere")
        if not in_W(r):
            raise NotInW("boundary images must be hyperbolic")
        total = euler_relative(r)
        c1, c2, c3, c4 = r.images
        d = sl2.proj_invert(sl2.proj_multiply(c1, c2))
        if not sl2.is_hyperbolic(d):
            raise InterfaceNotHyperbolic("interface curve is not hyperbolic")
        p1 = Representation(PANTS, (c1, c2, d))
        p2 = Representation(PANTS, (sl2.proj_invert(d), c3, c4))
        v1 = euler_relative(p1)
        v2 = euler_relative(p2)
        s = v1.value + v2.value
        return AdditivityReport(split, total,
                                (("pants-1", v1), ("pants-2", v2)),
                                s, s == total.value)
    raise ValueError(f"unknown split template {split!r}")


# --- sampling ----------------------------------------------------------------

SAMPLE_BUDGET = 500


def _closed_nonorientable_sample(p, rng, target_class):
    k = p.genus
    for _ in range(SAMPLE_BUDGET):
        head = [sl2.random_isometry(rng) for _ in range(k - 1)]
        prod = sl2.PROJ_IDENTITY
        for a in head:
            prod = sl2.proj_multiply(prod, sl2.proj_multiply(a, a))
        kk = sl2.proj_invert(prod).rep   # canonical sign: trace >= 0 > -2
        branches = [kk]
        if abs(kk.trace) < 2.0 - 1e-6:
            branches.append(-kk)         # elliptic: both SL lifts are in J
        for branch in branches:
            last = squares.psl_sqrt(branch)
            r = Representation(p, tuple(head) + (last,))
            if target_class is None or sw_class_closed(r).value == target_class:
                return r
    raise TargetUnreachable(
        f"no genus-{k} sample with class {target_class} in {SAMPLE_BUDGET} tries")


def _bounded_sample(p, rng):
    n_free = p.generator_count - p.boundary
    prefix = words.relator_word(p.crosscaps, p.handle_count, p.boundary)[:-1]
    for _ in range(SAMPLE_BUDGET):
        imgs = [sl2.random_isometry(rng)
                for _ in range(p.generator_count - 1)]
        last = sl2.proj_invert(words.evaluate_proj(prefix, imgs))
        r = Representation(p, tuple(imgs) + (last,))
        if in_W(r):
            return r
    raise TargetUnreachable(
        f"no in-W sample for {p} in {SAMPLE_BUDGET} tries")


def sample_representation(p: SurfacePresentation, seed,
                          target_class: Optional[int] = None) -> Representation:
    """Seeded random representation satisfying the relator exactly.

    Closed non-orientable: the last crosscap image is a square root of the
    inverse of the preceding squares, with the elliptic sign branch (when
    available) used to steer the Stiefel-Whitney class toward target_class.
    Bounded presentations: the last boundary image is derived from the
    relator; resampled until all boundary images are hyperbolic.
    """
    import numpy as np

    rng = seed if hasattr(seed, "standard_normal") else np.random.default_rng(seed)
    if not p.orientable and p.boundary == 0 and p.handles == 0:
        return _closed_nonorientable_sample(p, rng, target_class)
    if p.boundary >= 1:
        if target_class is not None:
            raise ValueError("target_class is only supported for closed "
                             "non-orientable presentations")
        return _bounded_sample(p, rng)
    raise ValueError(f"unsupported presentation for sampling: {p}")
