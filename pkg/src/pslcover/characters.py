"""Trace coordinates for pairs of SL(2,R) matrices.

A pair (X, Y) is recorded by its character chi = (tr X, tr Y, tr XY); the
commutator trace is the polynomial kappa(x, y, z) = x^2 + y^2 + z^2 - xyz - 2.
Away from the forbidden set (the cube [-2,2]^3 intersected with the kappa
preimage of [-2,2]) and the reducible locus kappa = 2, the character map is a
submersion, so discrete trace paths lift to pair paths by chained Newton
corrections with the conjugation gauge directions projected out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sl2
from .errors import ForbiddenSample, NoConvergence, SingularFiber, StepTooCoarse
from .sl2 import TAU_CLASS, UnitDetMatrix

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 25
RANK_TOL = 1e-8
MAX_DENSIFY = 1 << 10


@dataclass(frozen=True)
class CharacterTriple:
    """Trace coordinates (tr X, tr Y, tr XY) of a pair."""

    x: float
    y: float
    zc: float

    def as_tuple(self):
        return (self.x, self.y, self.zc)


def chi(X: UnitDetMatrix, Y: UnitDetMatrix) -> CharacterTriple:
    """The character (tr X, tr Y, tr XY) of a pair."""
    trXY = X.a * Y.a + X.b * Y.c + X.c * Y.b + X.d * Y.d
    return CharacterTriple(X.trace, Y.trace, trXY)


def kappa(t: CharacterTriple) -> float:
    """x^2 + y^2 + z^2 - xyz - 2; equals tr[X, Y] on characters."""
    x, y, z = t.as_tuple()
    return x * x + y * y + z * z - x * y * z - 2.0


def in_forbidden_set(t: CharacterTriple) -> bool:
    """The cube [-2,2]^3 intersected with kappa^{-1}([-2,2])."""
    if max(abs(t.x), abs(t.y), abs(t.zc)) > 2.0 + TAU_CLASS:
        return False
    return -2.0 - TAU_CLASS <= kappa(t) <= 2.0 + TAU_CLASS


def _residual(pair, target):
    c = chi(*pair)
    return max(abs(c.x - target.x), abs(c.y - target.y), abs(c.zc - target.zc))


def _system(pair, target):
    """Value and Jacobian of (traces - target, dets - 1) over R^8."""
    X, Y = pair
    a1, b1, c1, d1 = X.entries()
    a2, b2, c2, d2 = Y.entries()
    c0 = chi(X, Y)
    F = np.array([
        c0.x - target.x,
        c0.y - target.y,
        c0.zc - target.zc,
        X.det - 1.0,
        Y.det - 1.0,
    ])
    J = np.array([
        [1, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 0, 1],
        [a2, c2, b2, d2, a1, c1, b1, d1],
        [d1, -c1, -b1, a1, 0, 0, 0, 0],
        [0, 0, 0, 0, d2, -c2, -b2, a2],
    ], dtype=float)
    return F, J


def solve_fiber(target: CharacterTriple,
                seed_pair: tuple[UnitDetMatrix, UnitDetMatrix],
                ) -> tuple[UnitDetMatrix, UnitDetMatrix]:
    """A pair with character target, found by Newton from the seed pair.

    The system (three traces, two determinants) has a three-dimensional null
    space — the conjugation orbit directions — so the minimum-norm least
    squares step is automatically orthogonal to the gauge.  Rank deficiency
    beyond the gauge means the seed sits on the reducible locus kappa = 2.
    """
    pair = seed_pair
    for _ in range(NEWTON_MAX_ITER + 1):
        if _residual(pair, target) <= NEWTON_TOL:
            X, Y = pair
            return (sl2.from_scaled(*X.entries()), sl2.from_scaled(*Y.entries()))
        F, J = _system(pair, target)
        s = np.linalg.svd(J, compute_uv=False)
        if s[-1] < RANK_TOL * s[0]:
            raise SingularFiber(
                "character Jacobian is rank-deficient (reducible locus)")
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        v = np.array([*pair[0].entries(), *pair[1].entries()]) + step
        pair = (UnitDetMatrix(*v[:4]), UnitDetMatrix(*v[4:]))
    raise NoConvergence(
        f"Newton did not reach {NEWTON_TOL} in {NEWTON_MAX_ITER} iterations")


def _lerp(t0: CharacterTriple, t1: CharacterTriple, s: float) -> CharacterTriple:
    return CharacterTriple(
        t0.x + s * (t1.x - t0.x),
        t0.y + s * (t1.y - t0.y),
        t0.zc + s * (t1.zc - t0.zc),
    )


def lift_trace_path(trace_path: Sequence[CharacterTriple],
                    start_pair: tuple[UnitDetMatrix, UnitDetMatrix],
                    ) -> list[tuple[UnitDetMatrix, UnitDetMatrix]]:
    """Pairs realizing a discrete trace path, chained from start_pair.

    Each sample is solved with the previous pair as Newton seed; a failing
    segment is densified (linear interpolation of triples, doubling up to
    2^10 subsamples) before giving up.  Only the pairs at the caller's
    samples are returned.
    """
    if not trace_path:
        return []
    for i, t in enumerate(trace_path):
        if in_forbidden_set(t):
            raise ForbiddenSample(f"sample {i} lies in the forbidden set")
    if _residual(start_pair, trace_path[0]) > 1e-8:
        raise StepTooCoarse("start pair does not match the first triple")
    out = [solve_fiber(trace_path[0], start_pair)]
    for i in range(1, len(trace_path)):
        prev_t, cur_t = trace_path[i - 1], trace_path[i]
        seed = out[-1]
        n = 1
        while True:
            try:
                pair = seed
                for j in range(1, n + 1):
                    mid = _lerp(prev_t, cur_t, j / n)
                    if in_forbidden_set(mid):
                        raise ForbiddenSample(
                            f"densified segment {i} enters the forbidden set")
                    pair = solve_fiber(mid, pair)
                break
            except NoConvergence:
                n *= 2
                if n > MAX_DENSIFY:
                    raise StepTooCoarse(
                        f"segment {i} failed after densification to {n}")
        out.append(pair)
    return out
