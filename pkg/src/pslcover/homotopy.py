"""Explicit homotopies between surface-group representations.

Discrete representation paths, boundary-tracking lifts, Euler-class bumps,
and a constructive connect-to-hub pipeline: two representations with the
same mod-2 class are joined by contracting generators along one-parameter
subgroups while the distinguished crosscap follows as a continuous square
root of the interface curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import cover, sl2, squares, surfaces, words
from .characters import CharacterTriple, chi, kappa, lift_trace_path, solve_fiber
from .cover import (PI, CoverElement, cover_distance, cover_inv,
                    cover_mul, cover_trace, is_central,
                    central_power, continue_lift, lift_base, project_sl2,
                    shift, z_power)
from .errors import (ClassTooHigh, DifferentClasses, InterfaceNotHyperbolic,
                     NoConvergence, NotInCommutatorImage, NotInW,
                     StepTooCoarse,
                     TargetLeavesHyperbolic, TemplateUnsupported,
                     TrackerFailure, WrongStartClass)
from .sl2 import (IDENTITY_MATRIX, J0, PROJ_IDENTITY, ProjectiveIsometry,
                  UnitDetMatrix, from_scaled, frobenius, invert, multiply,
                  proj_conjugate, proj_distance, proj_invert, proj_multiply,
                  projectivize)
from .squares import psl_sqrt
from .surfaces import Representation, SurfacePresentation

STEP_BOUND = 0.05          # default bound on per-generator sample steps
RESIDUAL_BOUND = 1e-6      # relator residual allowed along a certified path
STAGE_BUDGET = 2 ** 14     # maximum number of samples per pipeline stage
HYP_MARGIN = 0.5           # trace excess when driving a curve hyperbolic
_SNAP = 1e-7               # centrality window for crossing handling


# --------------------------------------------------------------------------
# path containers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RepPath:
    """A discrete path of representations of a fixed presentation."""

    presentation: SurfacePresentation
    samples: tuple
    step_bound: float = STEP_BOUND

    def __post_init__(self):
        if len(self.samples) < 2:
            raise ValueError("a path needs at least two samples")
        for r in self.samples:
            if r.presentation != self.presentation:
                raise ValueError("sample presentation mismatch")


@dataclass(frozen=True)
class PathReport:
    """Verification summary for a RepPath."""

    samples: int
    max_residual: float
    max_step: float
    boundary_ok: bool
    start_class: Optional[str]
    end_class: Optional[str]
    passed: bool


def path_step(r0: Representation, r1: Representation) -> float:
    """Largest projective distance between corresponding generator images."""
    return max(proj_distance(p, q) for p, q in zip(r0.images, r1.images))


def _endpoint_class(r: Representation) -> Optional[str]:
    p = r.presentation
    try:
        if not p.orientable and p.boundary == 0:
            return str(surfaces.sw_class_closed(r))
        if p.boundary > 0 and surfaces.in_W(r):
            if p.orientable:
                return str(surfaces.euler_relative(r))
            return str(surfaces.sw_class_relative(r))
    except Exception:
        return None
    return None


def verify_rep_path(path: RepPath,
                    residual_bound: float = RESIDUAL_BOUND) -> PathReport:
    """Check residuals, step sizes, endpoint boundary types and classes."""
    res = max(surfaces.relation_residual(r) for r in path.samples)
    stp = max(path_step(a, b)
              for a, b in zip(path.samples, path.samples[1:]))
    boundary_ok = True
    if path.presentation.boundary > 0:
        boundary_ok = (surfaces.in_W(path.samples[0])
                       and surfaces.in_W(path.samples[-1]))
    c0 = _endpoint_class(path.samples[0])
    c1 = _endpoint_class(path.samples[-1])
    passed = (res <= residual_bound and stp <= path.step_bound + 1e-12
              and boundary_ok)
    return PathReport(len(path.samples), res, stp, boundary_ok, c0, c1, passed)


# --------------------------------------------------------------------------
# one-parameter subgroup paths
# --------------------------------------------------------------------------

def one_param_path(p: ProjectiveIsometry) -> Callable[[float], ProjectiveIsometry]:
    """f with f(0) = identity, f(1) = p, moving along p's one-parameter
    subgroup.  The canonical representative keeps elliptic angles in
    (0, pi/2], so the traceless part scales monotonically in t."""
    m = p.rep
    c = 0.5 * m.trace
    ua, ub, uc, ud = m.a - c, m.b, m.c, m.d - c

    if c < 1.0 - 1e-12:
        th = math.acos(max(-1.0, c))
        sn = math.sin(th)

        def f(t):
            s = math.sin(t * th) / sn
            k = math.cos(t * th)
            return projectivize(from_scaled(k + s * ua, s * ub,
                                            s * uc, k + s * ud))
    elif c > 1.0 + 1e-12:
        sh = math.acosh(c)
        sn = math.sinh(sh)

        def f(t):
            s = math.sinh(t * sh) / sn
            k = math.cosh(t * sh)
            return projectivize(from_scaled(k + s * ua, s * ub,
                                            s * uc, k + s * ud))
    else:
        def f(t):
            return projectivize(from_scaled(1.0 + t * ua, t * ub,
                                            t * uc, 1.0 + t * ud))
    return f


def conjugation_path(g: UnitDetMatrix) -> Callable[[float], UnitDetMatrix]:
    """Path from the identity to g (det 1) via polar interpolation."""
    arr = np.array([[g.a, g.b], [g.c, g.d]])
    u, s, vt = np.linalg.svd(arr)
    if np.linalg.det(arr) < 0:
        raise ValueError("conjugation paths exist only for det +1")
    q = u @ vt
    phi = math.atan2(q[1, 0], q[0, 0])
    lgs = np.log(s)

    def f(t):
        qt = np.array([[math.cos(t * phi), -math.sin(t * phi)],
                       [math.sin(t * phi), math.cos(t * phi)]])
        p = vt.T @ np.diag(np.exp(t * lgs)) @ vt
        m = qt @ p
        return from_scaled(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return f


# --------------------------------------------------------------------------
# crosscap follower: continuous square roots of an interface path
# --------------------------------------------------------------------------

def _fiber_matrix(x: float, z: float) -> UnitDetMatrix:
    """Trace-zero unit-determinant matrix with coordinates (x, z), z > 0."""
    return from_scaled(x, (-1.0 - x * x) / z, z, -x)


def _fiber_coords_of(p: ProjectiveIsometry) -> Tuple[float, float]:
    """Fiber coordinates of the nearest quarter-turn, dropping the trace
    part of p; p must be elliptic and close to the fiber."""
    m = p.rep
    c = 0.5 * m.trace
    du = (m.a - c) * (m.d - c) - m.b * m.c
    if du <= 0.0:
        raise TrackerFailure("cannot snap a non-elliptic element to the "
                             "quarter-turn fiber")
    s = math.sqrt(du)
    x, z = (m.a - c) / s, m.c / s
    if z < 0.0:
        x, z = -x, -z
    if abs(z) < 1e-300:
        raise TrackerFailure("quarter-turn snap hit the z = 0 chart boundary")
    return x, z


def _follow_crosscap(kpath: Sequence[CoverElement],
                     a_init: ProjectiveIsometry) -> List[ProjectiveIsometry]:
    """Square roots A_t with A_t^2 = K_t for a continuous interface path.

    Regular samples use the parity-selected SL(2,R) representative, whose
    unique square root is the continuous choice; odd central samples keep
    the previous root, which then sits on the quarter-turn fiber.  A parity
    defect means the interface left the liftable set.
    """
    out: List[ProjectiveIsometry] = []
    prev = a_init
    for i, k in enumerate(kpath):
        try:
            if is_central(k, _SNAP):
                m = central_power(k, 1e-6)
                if m % 2 == 0:
                    a = PROJ_IDENTITY
                else:
                    # fiber point: reuse the previous root if it already
                    # squares to the central value, else snap its coordinates
                    if frobenius(squares.square(prev),
                                 UnitDetMatrix(-1.0, 0.0, 0.0, -1.0)) < 1e-6:
                        a = prev
                    else:
                        x, z = _fiber_coords_of(prev)
                        a = projectivize(_fiber_matrix(x, z))
            else:
                m = project_sl2(k)
                if m.trace <= -2.0:
                    raise TrackerFailure(
                        f"interface sample {i} left the liftable set "
                        f"(trace {m.trace:.6f})")
                a = psl_sqrt(m)
                a0 = lift_base(a)
                defect = k.lift - cover_mul(a0, a0).lift
                n = round(defect / PI)
                if abs(defect - n * PI) > 1e-6 or n % 2 != 0:
                    raise TrackerFailure(
                        f"interface sample {i} has odd lift defect")
        except TrackerFailure as exc:
            exc.sample_index = i
            raise
        out.append(a)
        prev = a
    if proj_distance(out[0], a_init) > 1e-6:
        raise TrackerFailure("square-root path does not start at the "
                             "given crosscap image")
    return out


# --------------------------------------------------------------------------
# stage machinery for the connect pipeline
# --------------------------------------------------------------------------

def _cover_commutator(x: ProjectiveIsometry,
                      y: ProjectiveIsometry) -> CoverElement:
    """Lift of [x, y]; independent of the choice of generator lifts."""
    xt, yt = lift_base(x), lift_base(y)
    return cover_mul(cover_mul(xt, yt),
                     cover_mul(cover_inv(xt), cover_inv(yt)))


def _exact_base(factors) -> ProjectiveIsometry:
    """Product of (isometry, exponent) pairs in integer-mantissa arithmetic.

    Word products of large group elements lose their determinant to
    cancellation in floating renormalization chains; integer products keep
    the base of the interface path accurate at every sample.
    """
    acc = (1, 0, 0, 1)
    for p, e in factors:
        ent = words.exact_entries(p.rep)
        if e < 0:
            ent = (ent[3], -ent[1], -ent[2], ent[0])
        acc = words.exact_multiply(acc, ent)
    return words.exact_to_proj(acc)


def _assign_lifts(bases: Sequence[ProjectiveIsometry],
                  lift0: float) -> List[CoverElement]:
    """Cover elements over the given bases, lifts chained by continuity
    starting from lift0 (which must be a lift of the first base)."""
    ks: List[CoverElement] = []
    prev = lift0
    for b in bases:
        al = cover.alpha(b)
        lift = al + PI * round((prev - al) / PI)
        ks.append(CoverElement(b, lift))
        prev = lift
    return ks


@dataclass
class _Stage:
    """One pipeline stage: free generator images as a function of t in
    [0, 1], with the distinguished crosscap following as a square root."""

    free_fn: Callable[[float], tuple]   # t -> tuple of free images
    base_fn: Callable[[tuple], ProjectiveIsometry]  # free -> interface base
    a_fn: Optional[Callable[[float], ProjectiveIsometry]] = None  # explicit A


def _run_stage(stage: _Stage, a_init: ProjectiveIsometry, lift0: float,
               to_rep: Callable[[ProjectiveIsometry, tuple], Representation],
               step_bound: float):
    """Sample a stage adaptively until generator steps obey the bound.

    lift0 is the interface lift carried over from the previous stage; the
    lifts of all samples are continued from it.  Returns the sampled
    representations and the final interface lift.
    """
    ts = [i / 32.0 for i in range(33)]
    for _ in range(200):
        free = [stage.free_fn(t) for t in ts]
        lift_end = lift0
        if stage.a_fn is not None:
            roots = [stage.a_fn(t) for t in ts]
        else:
            ks = _assign_lifts([stage.base_fn(fr) for fr in free], lift0)
            lift_end = ks[-1].lift
            try:
                roots = _follow_crosscap(ks, a_init)
            except TrackerFailure as exc:
                # a parity defect on a coarse grid usually means the grid
                # skipped past a fast lift motion; refine near the failure
                # and only report a genuine wall once the grid is fine there
                i = getattr(exc, "sample_index", 0)
                if i == 0 or len(ts) >= STAGE_BUDGET:
                    raise
                gap = max(proj_distance(p, q)
                          for p, q in zip(free[i - 1], free[i]))
                if gap <= 1e-5:
                    raise
                ts.insert(i, 0.5 * (ts[i - 1] + ts[i]))
                continue
        reps = [to_rep(a, fr) for a, fr in zip(roots, free)]
        bad = [i for i in range(len(ts) - 1)
               if path_step(reps[i], reps[i + 1]) > step_bound]
        if not bad:
            return reps, lift_end
        if len(ts) + len(bad) > STAGE_BUDGET:
            raise StepTooCoarse("stage refinement budget exhausted")
        for i in reversed(bad):
            ts.insert(i + 1, 0.5 * (ts[i] + ts[i + 1]))
    raise StepTooCoarse("stage refinement did not converge")


_SL2_BASIS = (np.array([[1.0, 0.0], [0.0, -1.0]]),
              np.array([[0.0, 1.0], [0.0, 0.0]]),
              np.array([[0.0, 0.0], [1.0, 0.0]]))


def center_conjugator(images) -> UnitDetMatrix:
    """Determinant-one matrix g minimizing the generator norms of the
    conjugated tuple; gradient descent on the sum of squared Frobenius
    norms, which is geodesically convex on the hyperbolic plane."""
    mats = [np.array([[p.rep.a, p.rep.b], [p.rep.c, p.rep.d]])
            for p in images]
    g = np.eye(2)

    def cost(gm):
        gi = np.linalg.inv(gm)
        return sum(float(np.sum((gm @ m @ gi) ** 2)) for m in mats)

    step = 0.25
    f0 = cost(g)
    for _ in range(400):
        grads = []
        h = 1e-6
        for e in _SL2_BASIS:
            gp = (np.eye(2) + h * e) @ g
            grads.append((cost(gp) - f0) / h)
        gnorm = math.sqrt(sum(v * v for v in grads))
        if gnorm < 1e-9 * (1.0 + f0):
            break
        d = -np.array(grads) / gnorm
        while step > 1e-12:
            move = np.eye(2) + step * (d[0] * _SL2_BASIS[0]
                                       + d[1] * _SL2_BASIS[1]
                                       + d[2] * _SL2_BASIS[2])
            gt = move @ g
            dt = np.linalg.det(gt)
            if dt <= 1e-12:
                step *= 0.5
                continue
            gt /= math.sqrt(dt)
            ft = cost(gt)
            if ft < f0:
                g, f0 = gt, ft
                step *= 1.3
                break
            step *= 0.5
        else:
            break
    return from_scaled(g[0, 0], g[0, 1], g[1, 0], g[1, 1])


def _conjugation_stage(r: Representation, g: UnitDetMatrix,
                       step_bound: float) -> List[Representation]:
    """Adaptive path from r to the conjugate of r by g."""
    f = conjugation_path(g)

    def rep_at(t):
        gm = f(t)
        return Representation(r.presentation,
                              tuple(proj_conjugate(projectivize(gm), p)
                                    for p in r.images))

    ts = [i / 8.0 for i in range(9)]
    for _ in range(80):
        reps = [rep_at(t) for t in ts]
        bad = [i for i in range(len(ts) - 1)
               if path_step(reps[i], reps[i + 1]) > step_bound]
        if not bad:
            return reps
        if len(ts) + len(bad) > 8 * STAGE_BUDGET:
            raise StepTooCoarse("conjugation stage budget exhausted")
        for i in reversed(bad):
            ts.insert(i + 1, 0.5 * (ts[i] + ts[i + 1]))
    raise StepTooCoarse("conjugation stage did not converge")


def _centered_prefix(r: Representation, step_bound: float):
    """Conjugate r so that both its generators and its mixed images have
    small norms; returns (prefix samples, centred representation).

    The interface bookkeeping happens on the mixed images, so those are
    what the centering cost must control.
    """
    images = tuple(r.images) + tuple(surfaces.mixed_images(r))
    g = center_conjugator(images)
    if frobenius(g, IDENTITY_MATRIX) < 1e-9:
        return [r], r
    try:
        reps = _conjugation_stage(r, g, step_bound)
    except StepTooCoarse:
        # centering is an optimization; give the contraction stages a chance
        # even when the centering conjugator is too large to discretize
        return [r], r
    return reps, reps[-1]


def _is_identity(p: ProjectiveIsometry, tol: float = 1e-12) -> bool:
    return proj_distance(p, PROJ_IDENTITY) <= tol


def _contract_fn(p: ProjectiveIsometry):
    """t -> subgroup point at parameter (1 - t): starts at p, ends at I."""
    f = one_param_path(p)
    return lambda t: f(1.0 - t)


# ---- genus 3 ---------------------------------------------------------------

def _g3_base_fn(free):
    """Interface base for mixed genus-3 samples (X, Y free): ([X, Y])^-1."""
    x, y = free
    return _exact_base(((y, 1), (x, 1), (y, -1), (x, -1)))


def _g4_base_fn(free):
    """Interface base for mixed genus-4 samples (A, X, Y free):
    (A^2 [X, Y])^-1."""
    a, x, y = free
    return _exact_base(((y, 1), (x, 1), (y, -1), (x, -1), (a, -1), (a, -1)))


def _initial_interface_lift(crosscap: ProjectiveIsometry) -> float:
    """Lift of the interface at the start of the pipeline: the square of
    the distinguished crosscap's base lift."""
    l = lift_base(crosscap)
    return cover_mul(l, l).lift


def _fiber_align_stage(a_cur: ProjectiveIsometry, free_const: tuple):
    """Optional stage sliding a quarter-turn fiber point to the standard
    one (coordinates (0, 1)); returns None when already there."""
    x1, z1 = _fiber_coords_of(a_cur)
    if abs(x1) <= 1e-12 and abs(z1 - 1.0) <= 1e-12:
        return None
    lz = math.log(z1)

    def a_path(t, x1=x1, lz=lz):
        return projectivize(_fiber_matrix((1.0 - t) * x1,
                                          math.exp((1.0 - t) * lz)))
    return _Stage(lambda t: free_const, lambda fr: PROJ_IDENTITY,
                  a_fn=a_path)


def _g3_to_rep(pres: SurfacePresentation):
    def to_rep(a, fr):
        imgs = surfaces.crosscap_images(pres, (a,) + tuple(fr))
        return Representation(pres, imgs)
    return to_rep


def _g3_hub_stages(r: Representation, step_bound: float) -> List[Representation]:
    """Path from a closed genus-3 representation to the class hub:
    (I, I, I) for class 0 and (J0, I, I) for class 1, in mixed images."""
    pres = r.presentation
    prefix, rc = _centered_prefix(r, step_bound)
    a0, x0, y0 = surfaces.mixed_images(rc)
    to_rep = _g3_to_rep(pres)
    out: List[Representation] = list(prefix)
    lift_cur = _initial_interface_lift(a0)

    def run(stage, a_init):
        nonlocal lift_cur
        reps, lift_cur = _run_stage(stage, a_init, lift_cur, to_rep,
                                    step_bound)
        if path_step(out[-1], reps[0]) > step_bound:
            raise TrackerFailure("stage junction gap")
        out.extend(reps[1:] if path_step(out[-1], reps[0]) < 1e-9 else reps)

    a_cur = a0
    # stage 1: contract X along its subgroup; the commutator trace moves
    # monotonically to 2, so the interface lift never enters an odd region
    if not _is_identity(x0, 1e-9):
        cf = _contract_fn(x0)
        run(_Stage(lambda t, cf=cf, y=y0: (cf(t), y), _g3_base_fn), a_cur)
        a_cur = surfaces.mixed_images(out[-1])[0]
    # stage 2: contract Y; the commutator is now trivial, so the crosscap
    # image stays constant (identity for class 0, a fiber point for class 1)
    if not _is_identity(y0, 1e-9):
        cf = _contract_fn(y0)
        run(_Stage(lambda t, cf=cf: (PROJ_IDENTITY, cf(t)), _g3_base_fn),
            a_cur)
        a_cur = surfaces.mixed_images(out[-1])[0]
    # stage 3 (class 1 only): slide the crosscap inside the quarter-turn
    # fiber to the standard representative
    if round(lift_cur / PI) % 2 != 0:
        stage = _fiber_align_stage(a_cur, (PROJ_IDENTITY, PROJ_IDENTITY))
        if stage is not None:
            run(stage, a_cur)
    return out


# ---- genus 4 ---------------------------------------------------------------

def _g4_to_rep(pres: SurfacePresentation):
    def to_rep(ah, fr):
        imgs = surfaces.crosscap_images(pres, (ah,) + tuple(fr))
        return Representation(pres, imgs)
    return to_rep


def _to_quarter_turn_fn(p: ProjectiveIsometry):
    """Linear matrix path from p to a quarter turn about i, with the sign
    of the target chosen so the determinant stays positive throughout."""
    m = p.rep
    s = 1.0 if m.b - m.c <= 0.0 else -1.0

    def f(t):
        return projectivize(from_scaled(
            (1.0 - t) * m.a, (1.0 - t) * m.b - t * s,
            (1.0 - t) * m.c + t * s, (1.0 - t) * m.d))
    return f


_QUARTER_TURN = projectivize(J0)


def _g4_script(mixed, order: Sequence):
    """Stage list for a genus-4 mixed tuple: tuples of generator names
    contract jointly along one-parameter subgroups; the token "a2e" first
    moves the free crosscap-square generator A to a quarter turn, which
    unlocks contractions that a hyperbolic A would obstruct."""
    cur = {"a": mixed[1], "x": mixed[2], "y": mixed[3]}
    stages = []
    for group in order:
        if group == "a2e":
            if _is_identity(cur["a"], 1e-9):
                continue
            f = _to_quarter_turn_fn(cur["a"])
            frozen = dict(cur)

            def fn(t, f=f, frozen=frozen):
                return (f(t), frozen["x"], frozen["y"])
            stages.append(fn)
            cur["a"] = _QUARTER_TURN
            continue
        group = tuple(n for n in group if not _is_identity(cur[n], 1e-9))
        if not group:
            continue
        cfs = {n: _contract_fn(cur[n]) for n in group}
        frozen = dict(cur)

        def fn(t, cfs=cfs, frozen=frozen):
            vals = dict(frozen)
            for n, cf in cfs.items():
                vals[n] = cf(t)
            return (vals["a"], vals["x"], vals["y"])
        stages.append(fn)
        for n in group:
            cur[n] = PROJ_IDENTITY
    return stages


_G4_ORDERS = (
    (("x",), ("y",), ("a",)),
    (("a",), ("x",), ("y",)),
    (("x", "y"), ("a",)),
    (("a",), ("x", "y")),
    (("a", "x", "y"),),
    (("y",), ("x",), ("a",)),
    (("x",), ("a",), ("y",)),
    (("a",), ("y",), ("x",)),
    (("y",), ("a",), ("x",)),
    (("x", "a"), ("y",)),
    (("y", "a"), ("x",)),
    ("a2e", ("x",), ("y",), ("a",)),
    ("a2e", ("x", "y"), ("a",)),
    ("a2e", ("y",), ("x",), ("a",)),
)


def _g4_hub_stages(r: Representation, step_bound: float) -> List[Representation]:
    prefix, rc = _centered_prefix(r, step_bound)
    mixed = surfaces.mixed_images(rc)
    to_rep = _g4_to_rep(r.presentation)

    last_err: Optional[Exception] = None
    for order in _G4_ORDERS:
        try:
            return _g4_run_script(prefix, mixed, order, to_rep, step_bound)
        except (TrackerFailure, StepTooCoarse, ValueError) as exc:
            last_err = exc
    raise TrackerFailure(f"no contraction order reached the hub: {last_err}")


def _g4_run_script(prefix, mixed, order, to_rep, step_bound):
    out: List[Representation] = list(prefix)
    lift_cur = _initial_interface_lift(mixed[0])

    def run(stage, a_init):
        nonlocal lift_cur
        reps, lift_cur = _run_stage(stage, a_init, lift_cur, to_rep,
                                    step_bound)
        out.extend(reps[1:] if path_step(out[-1], reps[0]) < 1e-9 else reps)

    ah_cur = mixed[0]
    for fn in _g4_script(mixed, order):
        run(_Stage(fn, _g4_base_fn), ah_cur)
        ah_cur = surfaces.mixed_images(out[-1])[0]
    # fiber alignment for the odd class
    if round(lift_cur / PI) % 2 != 0:
        stage = _fiber_align_stage(ah_cur, (PROJ_IDENTITY, PROJ_IDENTITY,
                                            PROJ_IDENTITY))
        if stage is not None:
            run(stage, ah_cur)
    return out



# --------------------------------------------------------------------------
# connect
# --------------------------------------------------------------------------

def connect_representations(r1: Representation, r2: Representation,
                            step_bound: float = STEP_BOUND) -> RepPath:
    """Join two closed non-orientable representations of the same class by
    an explicit path through the class hub."""
    pres = r1.presentation
    if r2.presentation != pres:
        raise TemplateUnsupported("presentations differ")
    if pres.orientable or pres.boundary != 0 or pres.genus not in (3, 4):
        raise TemplateUnsupported(
            "connection implemented for closed non-orientable genus 3 or 4")
    c1 = surfaces.sw_class_closed(r1)
    c2 = surfaces.sw_class_closed(r2)
    if c1.value != c2.value:
        raise DifferentClasses(f"{c1} vs {c2}")
    if path_step(r1, r2) < 1e-12:
        return RepPath(pres, (r1, r2), step_bound)

    builder = _g3_hub_stages if pres.genus == 3 else _g4_hub_stages
    left = builder(r1, step_bound)
    right = builder(r2, step_bound)
    if path_step(left[-1], right[-1]) > 1e-9:
        raise TrackerFailure("hub mismatch between the two half-paths")
    samples = left + right[-2::-1]
    return RepPath(pres, tuple(samples), step_bound)


# --------------------------------------------------------------------------
# mirrors, conjugators, boundary lifts
# --------------------------------------------------------------------------

def _mirror_proj(p: ProjectiveIsometry) -> ProjectiveIsometry:
    """Conjugation by the orientation-reversing diag(1, -1)."""
    m = p.rep
    return projectivize(UnitDetMatrix(m.a, -m.b, -m.c, m.d))


def _mirror_rep(r: Representation) -> Representation:
    return Representation(r.presentation,
                          tuple(_mirror_proj(p) for p in r.images))


def _rotation(theta: float) -> UnitDetMatrix:
    c, s = math.cos(theta), math.sin(theta)
    return UnitDetMatrix(c, -s, s, c)


def _boost(alpha: float) -> UnitDetMatrix:
    c, s = math.cosh(alpha), math.sinh(alpha)
    return UnitDetMatrix(c, s, s, c)


_X_STAR = UnitDetMatrix(2.0, 0.0, 0.0, 0.5)


def _np2(m: UnitDetMatrix) -> np.ndarray:
    return np.array([[m.a, m.b], [m.c, m.d]])


def _conjugator(src, dst, tol: float = 1e-7) -> Optional[UnitDetMatrix]:
    """g with g s g^-1 = d projectively for all paired elements, or None.

    The intertwiner equations are linear in g once representative signs are
    fixed, so the kernel of the stacked system is searched over all sign
    choices; a positive-determinant kernel element is the PSL conjugator.
    """
    import itertools

    n = len(src)
    for signs in itertools.product((1.0, -1.0), repeat=n - 1):
        rows = []
        for s, d, sg in zip(src, dst, (1.0,) + signs):
            F, T = _np2(s.rep), sg * _np2(d.rep)
            rows.append(np.kron(np.eye(2), F.T) - np.kron(T, np.eye(2)))
        M = np.vstack(rows)
        _, sv, vt = np.linalg.svd(M)
        scale = max(1.0, sv[0])
        kernel = [vt[i] for i in range(3, -1, -1) if sv[i] < tol * scale]
        if not kernel:
            continue
        g = _positive_det_combination(kernel)
        if g is not None:
            return g
    return None


def _positive_det_combination(kernel) -> Optional[UnitDetMatrix]:
    """Unit-determinant element of a 1- or 2-dimensional matrix kernel."""
    g1 = kernel[0].reshape(2, 2)
    if len(kernel) == 1:
        d = np.linalg.det(g1)
        if d <= 1e-14:
            return None
        g = g1 / math.sqrt(d)
        return UnitDetMatrix(g[0, 0], g[0, 1], g[1, 0], g[1, 1])
    g2 = kernel[1].reshape(2, 2)
    # determinant restricted to span(g1, g2) is a binary quadratic form
    d1, d2 = np.linalg.det(g1), np.linalg.det(g2)
    m = 0.5 * (np.linalg.det(g1 + g2) - d1 - d2)
    w, v = np.linalg.eigh(np.array([[d1, m], [m, d2]]))
    if w[-1] <= 1e-14:
        return None
    g = v[0, -1] * g1 + v[1, -1] * g2
    g = g / math.sqrt(np.linalg.det(g))
    return UnitDetMatrix(g[0, 0], g[0, 1], g[1, 0], g[1, 1])


def _sign_chain(projs) -> List[UnitDetMatrix]:
    """SL(2,R) representatives of a projective path, signs continued."""
    out = [projs[0].rep]
    for p in projs[1:]:
        m = p.rep
        prev = out[-1]
        if (m.a * prev.a + m.b * prev.b + m.c * prev.c + m.d * prev.d) < 0.0:
            m = UnitDetMatrix(-m.a, -m.b, -m.c, -m.d)
        out.append(m)
    return out


def boundary_cover_path(path: RepPath, index: int,
                        lift0: Optional[float] = None) -> List[CoverElement]:
    """Continuity-chained lifts of one boundary image along a path, started
    from the canonical hyperbolic lift of the first sample."""
    bases = [s.images[index] for s in path.samples]
    if lift0 is None:
        lift0 = cover.canonical_hyperbolic_lift(bases[0]).lift
    return _assign_lifts(bases, lift0)


# --------------------------------------------------------------------------
# boundary path lifting on orientable templates
# --------------------------------------------------------------------------

_LIFT_TEMPLATES = (surfaces.PANTS, surfaces.ONE_HOLED_TORUS,
                   surfaces.TWO_HOLED_TORUS)


def _word_eval_np(word, mats) -> np.ndarray:
    P = np.eye(2)
    for s in word:
        m = mats[abs(s) - 1]
        if s < 0:
            m = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        P = P @ m
    return P


def _solve_images(pres: SurfacePresentation, j: int, T: np.ndarray,
                  seed, pins, s_rel: float,
                  tol: float = 1e-11) -> Optional[list]:
    """Generator matrices with image j pinned to T, solving the relator and
    the trace/determinant constraints by damped Gauss-Newton from seed."""
    free = [i for i in range(pres.generator_count) if i != j]
    relator = pres.relator()

    def residual(x):
        mats = [None] * pres.generator_count
        for idx, i in enumerate(free):
            mats[i] = x[4 * idx:4 * idx + 4].reshape(2, 2)
        mats[j] = T
        P = _word_eval_np(relator, mats)
        parts = [(P - s_rel * np.eye(2)).reshape(4)]
        parts.append(np.array([np.linalg.det(mats[i]) - 1.0 for i in free]))
        if pins:
            parts.append(np.array([np.trace(mats[i]) - c for i, c in pins]))
        return np.concatenate(parts), mats

    x = np.concatenate([seed[i].reshape(4) for i in free])
    F, mats = residual(x)
    slow = 0
    for _ in range(60):
        nf = np.linalg.norm(F, np.inf)
        if nf < tol:
            out = list(mats)
            out[j] = T
            return out
        J = np.empty((len(F), len(x)))
        for k in range(len(x)):
            h = 1e-7 * max(1.0, abs(x[k]))
            xp = x.copy()
            xp[k] += h
            J[:, k] = (residual(xp)[0] - F) / h
        # the solution manifold is positive-dimensional: truncate the
        # near-null directions instead of stepping along them
        step, *_ = np.linalg.lstsq(J, -F, rcond=1e-6)
        lam = 1.0
        for _ in range(25):
            xn = x + lam * step
            Fn, mats_n = residual(xn)
            if np.linalg.norm(Fn, np.inf) < nf:
                x, F, mats = xn, Fn, mats_n
                break
            lam *= 0.5
        else:
            return None
        slow = slow + 1 if np.linalg.norm(F, np.inf) > 0.95 * nf else 0
        if slow >= 3:
            return None
    return None


def _images_to_rep(pres: SurfacePresentation, mats) -> Representation:
    return Representation(pres, tuple(
        projectivize(from_scaled(m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
        for m in mats))


def lift_boundary_path(r0: Representation, target,
                       boundary_index: Optional[int] = None,
                       step_bound: float = STEP_BOUND) -> RepPath:
    """Path of representations tracking a prescribed boundary-image path.

    The designated boundary image follows the target exactly; the other
    boundary images keep their traces (hence conjugacy classes), and the
    remaining freedom is resolved by minimum-norm Newton continuation, so
    the lift stays close to the start representation.
    """
    pres = r0.presentation
    if pres not in _LIFT_TEMPLATES:
        raise TemplateUnsupported(
            "boundary lifting implemented for pants and the one- and "
            "two-holed torus")
    if not surfaces.in_W(r0):
        raise NotInW("start representation must have hyperbolic boundary "
                     "images and satisfy the relation")
    bset = list(pres.boundary_indices())
    j = bset[-1] if boundary_index is None else int(boundary_index)
    if j not in bset:
        raise ValueError(f"generator {j} is not a boundary")
    targets = list(target)
    if not targets:
        raise ValueError("empty target path")
    for i, t in enumerate(targets):
        if not sl2.is_hyperbolic(t):
            raise TargetLeavesHyperbolic(f"target sample {i} is not hyperbolic")
    if proj_distance(targets[0], r0.images[j]) > 1e-7:
        raise ValueError("target path must start at the boundary image")
    if len(targets) == 1:
        targets = targets * 2

    # solve in a centred frame: conjugating every image by the norm
    # minimiser keeps the Newton system well conditioned for large inputs
    G = center_conjugator(list(r0.images) + [targets[-1]])
    Gm, Gi = _np2(G), _np2(invert(G))
    Ts = [Gm @ _np2(m) @ Gi for m in _sign_chain(targets)]
    # match the first representative to the relator sign of the start
    mats0 = [Gm @ _np2(p.rep) @ Gi for p in r0.images]
    mats0[j] = Ts[0]
    s_rel = 1.0 if np.trace(_word_eval_np(pres.relator(), mats0)) > 0 else -1.0
    pins = [(i, float(np.trace(mats0[i]))) for i in bset if i != j]

    def to_rep(mats):
        return _images_to_rep(pres, [Gi @ m @ Gm for m in mats])

    samples = [r0]
    cur = mats0
    budget = 4 * STAGE_BUDGET
    for A, B in zip(Ts, Ts[1:]):
        stack = [(0.0, 1.0)]
        base_u = 0.0
        while stack:
            u0, u1 = stack.pop()
            if u0 < base_u - 1e-15:
                continue
            Tm = (1.0 - u1) * A + u1 * B
            det = np.linalg.det(Tm)
            if det <= 1e-12:
                raise TrackerFailure("target interpolant degenerates")
            Tm = Tm / math.sqrt(det)
            sol = _solve_images(pres, j, Tm, cur, pins, s_rel)
            rep = None if sol is None else to_rep(sol)
            if sol is None or path_step(samples[-1], rep) > step_bound:
                if u1 - u0 < 1e-9 or len(samples) > budget:
                    raise TrackerFailure(
                        "boundary lift did not converge after refinement")
                mid = 0.5 * (u0 + u1)
                stack.append((mid, u1))
                stack.append((u0, mid))
                continue
            cur = sol
            base_u = u1
            if path_step(samples[-1], rep) > 1e-12:
                samples.append(rep)
    if len(samples) == 1:
        samples.append(samples[0])
    return RepPath(pres, tuple(samples), step_bound)


# --------------------------------------------------------------------------
# character-coordinate tracking for the bump operations
# --------------------------------------------------------------------------

def _chi_samples(waypoints, max_leg: float = 0.2):
    pts = [tuple(map(float, waypoints[0]))]
    for a, b in zip(waypoints, waypoints[1:]):
        length = max(abs(b[i] - a[i]) for i in range(3))
        n = max(1, int(math.ceil(length / max_leg)))
        for k in range(1, n + 1):
            s = k / n
            pts.append(tuple(a[i] + s * (b[i] - a[i]) for i in range(3)))
    return [CharacterTriple(*p) for p in pts]


def _track_chi(waypoints, seed_pair, build, step_bound: float):
    """Representations realizing a piecewise-linear character path, refined
    until generator steps obey the bound.  Returns (reps, pairs)."""
    tri = _chi_samples(waypoints)
    for _ in range(24):
        pairs = lift_trace_path(tri, seed_pair)
        reps = [build(X, Y) for X, Y in pairs]
        bad = [i for i in range(len(reps) - 1)
               if path_step(reps[i], reps[i + 1]) > step_bound]
        if not bad:
            return reps, pairs
        if len(tri) + len(bad) > 4 * STAGE_BUDGET:
            raise StepTooCoarse("character path refinement budget exhausted")
        for i in reversed(bad):
            a, b = tri[i], tri[i + 1]
            tri.insert(i + 1, CharacterTriple(0.5 * (a.x + b.x),
                                              0.5 * (a.y + b.y),
                                              0.5 * (a.zc + b.zc)))
    raise StepTooCoarse("character path did not reach the step bound")


def _adaptive_reps(fn, step_bound: float) -> List[Representation]:
    """Samples of a representation-valued function on [0, 1], refined until
    consecutive steps obey the bound."""
    ts = [i / 8.0 for i in range(9)]
    for _ in range(60):
        reps = [fn(t) for t in ts]
        bad = [i for i in range(len(ts) - 1)
               if path_step(reps[i], reps[i + 1]) > step_bound]
        if not bad:
            return reps
        if len(ts) + len(bad) > STAGE_BUDGET:
            raise StepTooCoarse("stage refinement budget exhausted")
        for i in reversed(bad):
            ts.insert(i + 1, 0.5 * (ts[i] + ts[i + 1]))
    raise StepTooCoarse("stage did not reach the step bound")


def _join(samples: List[Representation], nxt, step_bound: float):
    for r in nxt:
        gap = path_step(samples[-1], r)
        if gap < 1e-9:
            continue
        if gap > step_bound:
            raise TrackerFailure("stage junction gap exceeds the step bound")
        samples.append(r)


def _canonical_pair(p: ProjectiveIsometry, q: ProjectiveIsometry):
    return p.rep, q.rep


def _lower_root(x: float, y: float) -> float:
    """Smaller z with kappa(x, y, z) = 2, for |x|, |y| > 2."""
    return 0.5 * (x * y - math.sqrt((x * x - 4.0) * (y * y - 4.0)))


def _relator_lift0(r: Representation, index: int) -> float:
    """Lift of boundary image `index` determined by lifting the relator.

    The relator of every supported template ends with the designated
    boundary generator, so the product of the standard lifts of the
    remaining letters determines the lift of the boundary up to nothing:
    its central defect is the relative Euler class.
    """
    word = r.presentation.relator()
    if abs(word[-1]) - 1 != index or word[-1] < 0:
        raise TemplateUnsupported("relator does not end in the boundary")
    acc = None
    for s in word[:-1]:
        p = r.images[abs(s) - 1]
        # canonical H(0) lifts pin the central defect of the product;
        # non-hyperbolic letters only occur in cancelling commutator
        # positions, where any lift choice drops out
        g = (cover.canonical_hyperbolic_lift(p) if sl2.is_hyperbolic(p)
             else lift_base(p))
        if s < 0:
            g = cover_inv(g)
        acc = g if acc is None else cover_mul(acc, g)
    return cover_inv(acc).lift


def _model_hyperbolic(x: float) -> UnitDetMatrix:
    """diag(lam, 1/lam) with trace x > 2."""
    lam = 0.5 * (x + math.sqrt(x * x - 4.0))
    return UnitDetMatrix(lam, 0.0, 0.0, 1.0 / lam)


def _pants_model_y(x: float, theta: float) -> UnitDetMatrix:
    """Y with X Y = R(theta) for X = diag(lam, 1/lam) of trace x."""
    lam = 0.5 * (x + math.sqrt(x * x - 4.0))
    c, s = math.cos(theta), math.sin(theta)
    return UnitDetMatrix(c / lam, -s / lam, lam * s, lam * c)


def _check_bump(path: RepPath, index: int, e0: int):
    """Endpoint class and shifted-interface lift checks shared by bumps."""
    e1 = surfaces.euler_relative(path.samples[-1]).value
    if e1 != e0 + 2:
        raise TrackerFailure(f"endpoint class {e1}, expected {e0 + 2}")
    lift0 = _relator_lift0(path.samples[0], index)
    ks = boundary_cover_path(path, index, lift0)
    for eps in (1, -1):
        if all(squares.in_J_tilde(shift(k, eps)) for k in ks):
            return
    raise TrackerFailure("shifted boundary lift leaves the square-image set")


def euler_bump_pants(r0: Representation,
                     step_bound: float = STEP_BOUND) -> RepPath:
    """Raise the relative Euler class of a pants representation from -1 to
    +1; the first two boundary images stay hyperbolic at every sample.

    The third boundary enters the elliptic region and its lift winds once
    through a central point: the pair is steered onto the normal form
    X = diag(lam, 1/lam), X Y = R(theta), the angle theta is swung through
    zero, and the mirrored character path is tracked back to the start
    character.  The lift of the interface therefore moves between adjacent
    odd hyperbolic wedges without ever resting in an even one.
    """
    if r0.presentation != surfaces.PANTS:
        raise TemplateUnsupported("pants presentation required")
    e0 = surfaces.euler_relative(r0).value
    if e0 != -1:
        raise WrongStartClass(f"relative Euler class {e0}; the bump starts "
                              "at -1")
    X0, Y0 = _canonical_pair(r0.images[0], r0.images[1])
    t0 = chi(X0, Y0)
    if t0.zc >= -2.0:
        raise TrackerFailure("odd-class pants start must have negative "
                             "interface trace")
    # rest angle inside the elliptic band; z1 > 4/x keeps tr Y = x cos(theta)
    # above 2 for the whole swing
    z1 = 1.0 + 2.0 / t0.x
    y1 = 0.5 * t0.x * z1
    theta1 = math.acos(0.5 * z1)

    def build(X, Y):
        return Representation(surfaces.PANTS, (
            projectivize(X), projectivize(Y),
            projectivize(invert(multiply(X, Y)))))

    wps = [(t0.x, t0.y, t0.zc), (t0.x, t0.y, z1), (t0.x, y1, z1)]
    reps_a, pairs_a = _track_chi(wps, (X0, Y0), build, step_bound)
    Xm, Ym = pairs_a[-1]
    Xs = _model_hyperbolic(t0.x)
    g = sigma = None
    for sig in (1, -1):
        g = _conjugator((projectivize(Xm), projectivize(Ym)),
                        (projectivize(Xs),
                         projectivize(_pants_model_y(t0.x, sig * theta1))))
        if g is not None:
            sigma = sig
            break
    if g is None:
        raise TrackerFailure("pair does not align with the swing model")
    reps_conj = _conjugation_stage(reps_a[-1], g, step_bound)

    def swing(t):
        return build(Xs, _pants_model_y(t0.x, sigma * theta1 * (1.0 - 2.0 * t)))

    reps_swing = _adaptive_reps(swing, step_bound)
    wps_c = [(t0.x, y1, z1), (t0.x, t0.y, z1), (t0.x, t0.y, t0.zc)]
    seed = (Xs, _pants_model_y(t0.x, -sigma * theta1))
    reps_c, _ = _track_chi(wps_c, seed, build, step_bound)

    samples = [r0]
    for stage in (reps_a, reps_conj, reps_swing, reps_c):
        _join(samples, stage, step_bound)
    path = RepPath(surfaces.PANTS, tuple(samples), step_bound)
    for i, s in enumerate(path.samples):
        if not (sl2.is_hyperbolic(s.images[0]) and
                sl2.is_hyperbolic(s.images[1])):
            raise TrackerFailure(f"held boundary left H at sample {i}")
    _check_bump(path, 2, e0)
    return path


def _torus_build(X: UnitDetMatrix, Y: UnitDetMatrix) -> Representation:
    C = multiply(multiply(Y, X), invert(multiply(X, Y)))
    return Representation(surfaces.ONE_HOLED_TORUS,
                          (projectivize(X), projectivize(Y), projectivize(C)))


_TORUS_ALPHA = math.asinh(math.sqrt(20.0) / 3.0)   # commutator trace -3


def _torus_vertex_waypoints(x0: float, y0: float, z0: float):
    """Waypoints from a class -1 torus character to the swing-model
    character (2.5, 2 cosh a, 2.5 cosh a), keeping the commutator trace
    below -2 throughout.

    Leg 1 moves x to the vertex x = yz/2 of the commutator-trace parabola
    (monotone decrease); leg 2 moves log(y^2-4), log(z^2-4) linearly with
    x pinned to the vertex, where the commutator trace is a monotone
    function of their sum; leg 3 releases x from the vertex.
    """
    ch = math.cosh(_TORUS_ALPHA)
    ys, zs = 2.0 * ch, 2.5 * ch
    wps = [(x0, y0, z0), (0.5 * y0 * z0, y0, z0)]
    u0, v0 = math.log(y0 * y0 - 4.0), math.log(z0 * z0 - 4.0)
    u1, v1 = math.log(ys * ys - 4.0), math.log(zs * zs - 4.0)
    n = 64
    for i in range(1, n + 1):
        t = i / n
        y = math.sqrt(4.0 + math.exp(u0 + t * (u1 - u0)))
        z = math.sqrt(4.0 + math.exp(v0 + t * (v1 - v0)))
        wps.append((0.5 * y * z, y, z))
    wps.append((2.5, ys, zs))
    return wps


def euler_bump_torus(r0: Representation,
                     step_bound: float = STEP_BOUND) -> RepPath:
    """Raise the relative Euler class of a one-holed torus representation
    from -1 to +1 by driving the lifted boundary through a central point.

    The character is carried to the model (2.5, 2 cosh a, 2.5 cosh a), the
    pair is conjugated onto (diag(2, 1/2), H(a)), the boost parameter is
    swung through zero (where the commutator crosses the identity and the
    lifted boundary passes a central point), and the mirrored character
    path is tracked back to the start character.
    """
    if r0.presentation != surfaces.ONE_HOLED_TORUS:
        raise TemplateUnsupported("one-holed torus presentation required")
    e0 = surfaces.euler_relative(r0).value
    if e0 != -1:
        raise WrongStartClass(f"relative Euler class {e0}; the bump starts "
                              "at -1")
    X0, Y0 = _canonical_pair(r0.images[0], r0.images[1])
    t0 = chi(X0, Y0)
    # boundary trace below -2 forces xyz > 0; flip representative signs so
    # the whole character sits in the positive octant
    if t0.x < 0.0:
        X0 = UnitDetMatrix(-X0.a, -X0.b, -X0.c, -X0.d)
    if t0.y < 0.0:
        Y0 = UnitDetMatrix(-Y0.a, -Y0.b, -Y0.c, -Y0.d)
    t0 = chi(X0, Y0)
    if min(t0.y, t0.zc) <= 2.0 or kappa(t0) >= -2.0:
        raise TrackerFailure("start character is not in the odd-class "
                             "vertex region")

    wps = _torus_vertex_waypoints(t0.x, t0.y, t0.zc)
    reps_a, pairs_a = _track_chi(wps, (X0, Y0), _torus_build, step_bound)
    Xm, Ym = pairs_a[-1]
    Xs = UnitDetMatrix(2.0, 0.0, 0.0, 0.5)
    g = sigma = None
    for sig in (1, -1):
        g = _conjugator((projectivize(Xm), projectivize(Ym)),
                        (projectivize(Xs),
                         projectivize(_boost(sig * _TORUS_ALPHA))))
        if g is not None:
            sigma = sig
            break
    if g is None:
        raise TrackerFailure("pair does not align with the swing model")
    reps_conj = _conjugation_stage(reps_a[-1], g, step_bound)

    def swing(t):
        return _torus_build(Xs, _boost(sigma * _TORUS_ALPHA * (1.0 - 2.0 * t)))

    reps_swing = _adaptive_reps(swing, step_bound)
    seed = (Xs, _boost(-sigma * _TORUS_ALPHA))
    reps_c, _ = _track_chi(list(reversed(wps)), seed, _torus_build, step_bound)

    samples = [r0]
    for stage in (reps_a, reps_conj, reps_swing, reps_c):
        _join(samples, stage, step_bound)
    path = RepPath(surfaces.ONE_HOLED_TORUS, tuple(samples), step_bound)
    _check_bump(path, 2, e0)
    return path


# --------------------------------------------------------------------------
# commutator fibers in the cover
# --------------------------------------------------------------------------

def commutator_solve(kt: CoverElement,
                     tol: float = 1e-7) -> Tuple[UnitDetMatrix, UnitDetMatrix]:
    """A pair (X, Y) whose lifted commutator equals the cover element kt.

    One explicit one-parameter family realizes every commutator lift trace
    above 2 and one every trace below 2, with a reducible family on the
    non-central trace-2 wall; mirrored candidates cover both rotation
    senses.  A candidate is accepted only after conjugation onto the base
    of kt reproduces the full cover element, so unreachable regions are
    reported rather than approximated.
    """
    if is_central(kt):
        if central_power(kt) != 0:
            raise NotInCommutatorImage(
                "nonzero central elements are not lifted commutators")
        return IDENTITY_MATRIX, IDENTITY_MATRIX
    tau = cover_trace(kt)
    pairs = []
    if tau > 2.0 + _SNAP:
        s = math.asinh(math.sqrt(0.5 * (tau - 2.0)))
        for sg in (1.0, -1.0):
            pairs.append((_rotation(0.25 * PI), _boost(sg * s)))
    elif tau < 2.0 - _SNAP:
        a = math.asinh(math.sqrt((2.0 - tau) / 2.25))
        for sg in (1.0, -1.0):
            pairs.append((UnitDetMatrix(2.0, 0.0, 0.0, 0.5), _boost(sg * a)))
    else:
        for sg in (1.0, -1.0):
            pairs.append((UnitDetMatrix(2.0, 0.0, 0.0, 0.5),
                          UnitDetMatrix(1.0, sg / 3.0, 0.0, 1.0)))
    mirrored = [(UnitDetMatrix(X.a, -X.b, -X.c, X.d),
                 UnitDetMatrix(Y.a, -Y.b, -Y.c, Y.d)) for X, Y in pairs]
    for X, Y in pairs + mirrored:
        C = multiply(multiply(X, Y), invert(multiply(Y, X)))
        g = _conjugator((projectivize(C),), (kt.base,))
        if g is None:
            continue
        Xa = multiply(multiply(g, X), invert(g))
        Ya = multiply(multiply(g, Y), invert(g))
        got = _cover_commutator(projectivize(Xa), projectivize(Ya))
        if cover_distance(got, kt) <= tol:
            return Xa, Ya
    raise NotInCommutatorImage(
        "no commutator candidate reproduces the target lift")


# --------------------------------------------------------------------------
# general bump on the two-holed torus
# --------------------------------------------------------------------------

def _commutator_residual(x, T, s):
    Xm = x[:4].reshape(2, 2)
    Ym = x[4:].reshape(2, 2)
    P = Xm @ Ym @ _inv2(Xm) @ _inv2(Ym)
    return np.concatenate([
        (P - s * T).reshape(4),
        np.array([np.linalg.det(Xm) - 1.0, np.linalg.det(Ym) - 1.0])])


def _commutator_newton(x0, T, s, tol: float = 1e-11):
    """Solve [X, Y] = s*T from the 8-vector x0 by Levenberg-Marquardt;
    returns the refined 8-vector or None.  Damping copes with the
    structural redundancy (det [X, Y] = 1 makes one matrix-entry row
    dependent) without truncating genuine directions."""
    x = x0.copy()
    F = _commutator_residual(x, T, s)
    mu = 1e-6
    for _ in range(200):
        nf = np.linalg.norm(F, np.inf)
        if nf < tol:
            return x
        J = np.empty((6, 8))
        for k in range(8):
            h = 1e-7 * max(1.0, abs(x[k]))
            xp = x.copy()
            xp[k] += h
            J[:, k] = (_commutator_residual(xp, T, s) - F) / h
        JtJ = J.T @ J
        g = J.T @ F
        scale = max(np.trace(JtJ) / 8.0, 1e-30)
        improved = False
        for _ in range(40):
            try:
                step = np.linalg.solve(JtJ + mu * scale * np.eye(8), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            Fn = _commutator_residual(x + step, T, s)
            if np.linalg.norm(Fn, np.inf) < nf:
                x, F = x + step, Fn
                mu = max(mu / 3.0, 1e-14)
                improved = True
                break
            mu *= 10.0
            if mu > 1e14:
                break
        if not improved:
            return None
    return None


def _centered_commutator_newton(x0, T, s, tol: float = 1e-11):
    """Commutator solve in a balanced conjugation frame.

    The solution sheet of [X, Y] = s*T turns numerically vertical when the
    matrix entries grow, so the continuation is conjugated to a centered
    frame, solved there, and mapped back."""
    Xm, Ym = x0[:4].reshape(2, 2), x0[4:].reshape(2, 2)
    if max(np.abs(x0).max(), np.abs(T).max()) < 8.0:
        return _commutator_newton(x0, T, s, tol)
    g = center_conjugator([
        projectivize(from_scaled(m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
        for m in (Xm, Ym, T)])
    gm, gi = _np2(g), _np2(invert(g))
    xc = np.concatenate([(gm @ Xm @ gi).reshape(4),
                         (gm @ Ym @ gi).reshape(4)])
    xn = _commutator_newton(xc, gm @ T @ gi, s, tol)
    if xn is None:
        return None
    return np.concatenate([(gi @ xn[:4].reshape(2, 2) @ gm).reshape(4),
                           (gi @ xn[4:].reshape(2, 2) @ gm).reshape(4)])


def _commutator_sign(x, T) -> float:
    """Representative sign of the target matching the seed commutator."""
    F_plus = _commutator_residual(x, T, 1.0)
    F_minus = _commutator_residual(x, T, -1.0)
    return 1.0 if (np.linalg.norm(F_plus) <= np.linalg.norm(F_minus)) else -1.0


def _follow_commutator(d_path, X0: UnitDetMatrix, Y0: UnitDetMatrix,
                       tol: float = 1e-11):
    """Pairs (X_t, Y_t) with [X_t, Y_t] = D_t along a sign-chained SL(2,R)
    path of targets, continued from (X0, Y0) by minimum-norm Newton."""
    x = np.concatenate([X0.reshape(4), Y0.reshape(4)])
    s = _commutator_sign(x, d_path[0])
    # working frame: recentered whenever the continued pair drifts, which
    # keeps the solution sheet of the commutator map well-conditioned
    Hm, Hi = np.eye(2), np.eye(2)

    def recenter(x, Hm, Hi, Tc):
        g = center_conjugator([
            projectivize(from_scaled(m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
            for m in (x[:4].reshape(2, 2), x[4:].reshape(2, 2), Tc)])
        gm, gi = _np2(g), _np2(invert(g))
        xc = np.concatenate([(gm @ x[:4].reshape(2, 2) @ gi).reshape(4),
                             (gm @ x[4:].reshape(2, 2) @ gi).reshape(4)])
        return xc, gm @ Hm, Hi @ gi

    def attempt(x, Hm, Hi, T):
        Tc = Hm @ T @ Hi
        if max(np.abs(x).max(), np.abs(Tc).max()) > 8.0:
            x, Hm, Hi = recenter(x, Hm, Hi, Tc)
            Tc = Hm @ T @ Hi
        xn = _commutator_newton(x, Tc, s, tol)
        if xn is None:
            # a fresh balanced frame often rescues a stalled solve even
            # when the drift threshold has not been hit yet
            xr, Hmr, Hir = recenter(x, Hm, Hi, Tc)
            xn = _commutator_newton(xr, Hmr @ T @ Hir, s, tol)
            if xn is not None:
                return xn, Hmr, Hir
        return xn, Hm, Hi

    out = []
    prev = d_path[0]  # last solved target, kept in the fixed frame
    for T in d_path:
        xn, Hm, Hi = attempt(x, Hm, Hi, T)
        if xn is None:
            # pull the target back toward the last solved one and walk in
            stack = [T]
            depth = 0
            while stack and depth < 4 * STAGE_BUDGET:
                depth += 1
                Tm = stack[-1]
                xn, Hm, Hi = attempt(x, Hm, Hi, Tm)
                if xn is None:
                    half = 0.5 * (prev + Tm)
                    det = np.linalg.det(half)
                    if det <= 1e-12 or np.abs(Tm - prev).max() < 1e-9:
                        raise TrackerFailure(
                            "torus piece lost the interface target")
                    stack.append(half / math.sqrt(det))
                else:
                    x, prev = xn, Tm
                    stack.pop()
            if stack:
                raise TrackerFailure("torus piece lost the interface target")
            xn = x
        x, prev = xn, T
        Xo = Hi @ x[:4].reshape(2, 2) @ Hm
        Yo = Hi @ x[4:].reshape(2, 2) @ Hm
        out.append((Xo, Yo))
    return out


def _inv2(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def euler_bump_general(r0: Representation,
                       step_bound: float = STEP_BOUND) -> RepPath:
    """Raise the relative Euler class of a two-holed torus representation
    by 2: split off a pants containing both boundary curves, bump it, and
    make the one-holed torus piece follow the moving interface.

    The first boundary curve is the one driven through the elliptic
    region; the second keeps its trace.  The pants piece must carry class
    -1 (the decomposition with the interface class on the torus side
    stalls on a singular fiber, so it is reported, not attempted).
    """
    if r0.presentation != surfaces.TWO_HOLED_TORUS:
        raise TemplateUnsupported("two-holed torus presentation required")
    n = surfaces.euler_relative(r0).value
    if n > 0:
        raise ClassTooHigh(f"class {n} cannot be raised by 2 within the "
                           "Milnor-Wood range")
    X0p, Y0p, C1p, C2p = r0.images
    D = words.evaluate_exact((1, 2, -1, -2), r0.images)
    if not sl2.is_hyperbolic(D):
        raise TrackerFailure("interface commutator is not hyperbolic")
    pants0 = Representation(surfaces.PANTS, (C2p, D, C1p))
    torus0 = Representation(surfaces.ONE_HOLED_TORUS,
                            (X0p, Y0p, proj_invert(D)))
    e_p = surfaces.euler_relative(pants0).value
    e_t = surfaces.euler_relative(torus0).value
    if e_p + e_t != n:
        raise TrackerFailure("piece classes do not add up to the total")
    if e_p != -1:
        raise TrackerFailure(
            f"pants piece carries class {e_p}; only the -1 arrangement "
            "admits a wall-free interface")

    G = center_conjugator(r0.images)
    Gm, Gi = _np2(G), _np2(invert(G))
    pants_path = euler_bump_pants(pants0, step_bound)
    c2_np = [Gm @ _np2(m) @ Gi
             for m in _sign_chain([s.images[0] for s in pants_path.samples])]
    d_np = [Gm @ _np2(m) @ Gi
            for m in _sign_chain([s.images[1] for s in pants_path.samples])]
    pairs = _follow_commutator(d_np, Gm @ _np2(X0p.rep) @ Gi,
                               Gm @ _np2(Y0p.rep) @ Gi)
    s_com = _commutator_sign(
        np.concatenate([(Gm @ _np2(X0p.rep) @ Gi).reshape(4),
                        (Gm @ _np2(Y0p.rep) @ Gi).reshape(4)]), d_np[0])

    def _renorm(m):
        det = np.linalg.det(m)
        if det <= 1e-12:
            raise TrackerFailure("interface interpolant degenerates")
        return m / math.sqrt(det)

    def to_sample(knot):
        c2m, dm, x = knot
        C2o = Gi @ c2m @ Gm
        Do = Gi @ dm @ Gm
        mats = (Gi @ x[:4].reshape(2, 2) @ Gm,
                Gi @ x[4:].reshape(2, 2) @ Gm,
                _inv2(C2o @ Do), C2o)
        return Representation(surfaces.TWO_HOLED_TORUS, tuple(
            projectivize(from_scaled(m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
            for m in mats))

    knots = [(c2m, dm, np.concatenate([Xn.reshape(4), Yn.reshape(4)]))
             for c2m, dm, (Xn, Yn) in zip(c2_np, d_np, pairs)]
    # the fiber over the interface can move much faster than the interface
    # itself: refine on the assembled path, not on the pants path
    out = [(knots[0], to_sample(knots[0]))]
    budget = 4 * STAGE_BUDGET
    for nxt in knots[1:]:
        stack = [(out[-1], (nxt, to_sample(nxt)))]
        while stack:
            (ka, sa), (kb, sb) = stack.pop()
            if path_step(sa, sb) <= step_bound:
                out.append((kb, sb))
                continue
            budget -= 1
            gap = max(np.abs(ka[0] - kb[0]).max(), np.abs(ka[1] - kb[1]).max())
            if budget <= 0 or gap < 1e-9:
                raise TrackerFailure("torus piece steps exceed the bound "
                                     "after refinement")
            c2m = _renorm(0.5 * (ka[0] + kb[0]))
            dm = _renorm(0.5 * (ka[1] + kb[1]))
            xm = _centered_commutator_newton(0.5 * (ka[2] + kb[2]), dm, s_com)
            if xm is None:
                xm = _centered_commutator_newton(ka[2], dm, s_com)
            if xm is None:
                raise TrackerFailure("torus piece lost the interface target")
            km = (c2m, dm, xm)
            mid = (km, to_sample(km))
            stack.append((mid, (kb, sb)))
            stack.append(((ka, sa), mid))
    samples = [s for _, s in out]
    path = RepPath(surfaces.TWO_HOLED_TORUS, tuple(samples), step_bound)
    e1 = surfaces.euler_relative(path.samples[-1]).value
    if e1 != n + 2:
        raise TrackerFailure(f"endpoint class {e1}, expected {n + 2}")
    return path


# --------------------------------------------------------------------------
# interface hyperbolization and Mobius-strip extension
# --------------------------------------------------------------------------

def _rotate_tuple(items, i):
    return tuple(items[i:]) + tuple(items[:i])


def _pair_build(X: UnitDetMatrix, Y: UnitDetMatrix) -> Representation:
    px, py = projectivize(X), projectivize(Y)
    return Representation(surfaces.PANTS,
                          (px, py, proj_invert(proj_multiply(px, py))))


def _hyperbolize_proj(r0: Representation, step_bound: float) -> RepPath:
    A0, C1, C2 = r0.images
    if not surfaces.in_W(r0):
        raise NotInW("boundary images must be hyperbolic")
    K0 = proj_invert(proj_multiply(C1, C2))
    if sl2.is_hyperbolic(K0):
        return RepPath(r0.presentation, (r0, r0), step_bound)
    X0, Y0 = _canonical_pair(C1, C2)
    t0 = chi(X0, Y0)
    lift0 = cover_mul(lift_base(A0), lift_base(A0)).lift
    last: Optional[Exception] = None
    for zt in (-(2.0 + HYP_MARGIN), 2.0 + HYP_MARGIN):
        try:
            sb = step_bound
            for _ in range(6):
                reps, _ = _track_chi([(t0.x, t0.y, t0.zc),
                                      (t0.x, t0.y, zt)],
                                     (X0, Y0), _pair_build, sb)
                bases = [_exact_base(((s.images[1], -1), (s.images[0], -1)))
                         for s in reps]
                ks = _assign_lifts(bases, lift0)
                if not all(squares.in_J_tilde(k) for k in ks):
                    raise TrackerFailure("interface lift leaves the "
                                         "square-image set")
                roots = _follow_crosscap(ks, A0)
                samples = [Representation(r0.presentation,
                                          (a, s.images[0], s.images[1]))
                           for a, s in zip(roots, reps)]
                # the square root can move faster than the boundary pair;
                # tighten the pair bound until the whole tuple complies
                if all(path_step(samples[i], samples[i + 1]) <= step_bound
                       for i in range(len(samples) - 1)):
                    break
                sb *= 0.5
            else:
                raise TrackerFailure("crosscap image moves faster than the "
                                     "step bound")
            if not sl2.is_hyperbolic(proj_invert(proj_multiply(
                    samples[-1].images[1], samples[-1].images[2]))):
                raise TrackerFailure("endpoint interface is not hyperbolic")
            return RepPath(r0.presentation, tuple(samples), step_bound)
        except (TrackerFailure, StepTooCoarse, NoConvergence) as exc:
            last = exc
    raise TrackerFailure(f"interface drive failed in both directions: {last}")


def _hyperbolize_g3(r0: Representation, step_bound: float) -> RepPath:
    pres = r0.presentation
    A0 = surfaces.mixed_images(r0)[0]
    if sl2.is_hyperbolic(proj_multiply(A0, A0)):
        return RepPath(pres, (r0, r0), step_bound)
    out = _g3_hub_stages(r0, step_bound)
    to_rep = _g3_to_rep(pres)
    a_cur = surfaces.mixed_images(out[-1])[0]
    sw = surfaces.sw_class_closed(r0).value
    # the even part of the carried interface lift is immaterial: the
    # square-root follower only uses its parity
    lift_cur = PI * sw
    if sw == 0:
        s_star = math.asinh(math.sqrt(HYP_MARGIN / 2.0))
        fx = one_param_path(projectivize(_rotation(0.25 * math.pi)))
        fy = one_param_path(projectivize(_boost(s_star)))
        reps, _ = _run_stage(_Stage(lambda t: (fx(t), fy(t)), _g3_base_fn),
                             a_cur, lift_cur, to_rep, step_bound)
        _join(out, reps, step_bound)
    else:
        alpha = math.asinh(math.sqrt((4.0 + HYP_MARGIN) / 2.25))
        last: Optional[Exception] = None
        for sigma in (1.0, -1.0):
            fx = one_param_path(projectivize(_X_STAR))
            fy = one_param_path(projectivize(_boost(sigma * alpha)))
            try:
                reps, _ = _run_stage(
                    _Stage(lambda t: (fx(t), fy(t)), _g3_base_fn),
                    a_cur, lift_cur, to_rep, step_bound)
                break
            except (TrackerFailure, StepTooCoarse) as exc:
                last = exc
        else:
            raise TrackerFailure(f"odd-class interface drive failed: {last}")
        _join(out, reps, step_bound)
    A1, X1, Y1 = surfaces.mixed_images(out[-1])
    if not sl2.is_hyperbolic(proj_multiply(A1, A1)):
        raise TrackerFailure("endpoint interface is not hyperbolic")
    return RepPath(pres, tuple(out), step_bound)


def hyperbolize_interface(r0: Representation, mobius_index: int = 0,
                          step_bound: float = STEP_BOUND) -> RepPath:
    """Path making the interface curve of a designated Mobius strip
    hyperbolic, keeping the crosscap generator a continuous square root of
    the interface lift throughout.

    Supported templates: the two-holed projective plane (drive the trace of
    the interface out of the elliptic band, boundary traces pinned) and the
    closed genus-3 crosscap form (contract to the class hub, then open a
    handle pair whose commutator is hyperbolic)."""
    pres = r0.presentation
    if pres == surfaces.TWO_HOLED_PROJ:
        if mobius_index != 0:
            raise TemplateUnsupported(
                "the two-holed projective plane has a single crosscap")
        return _hyperbolize_proj(r0, step_bound)
    if (not pres.orientable and pres.boundary == 0 and pres.handles == 0
            and pres.genus == 3):
        if mobius_index not in (0, 1, 2):
            raise TemplateUnsupported("crosscap index out of range")
        rot = Representation(pres, _rotate_tuple(r0.images, mobius_index))
        path = _hyperbolize_g3(rot, step_bound)
        back = (3 - mobius_index) % 3
        samples = tuple(Representation(pres, _rotate_tuple(s.images, back))
                        for s in path.samples)
        return RepPath(pres, samples, step_bound)
    raise TemplateUnsupported(
        "supported templates: two-holed projective plane, closed genus-3 "
        "crosscap form")


def extend_over_mobius(base_path: RepPath,
                       r0_full: Representation) -> RepPath:
    """Extension of a path on the complement of a Mobius strip to the whole
    surface: the crosscap image follows the unique hyperbolic square root
    of the interface at every sample."""
    sp = base_path.presentation
    fp = r0_full.presentation
    if sp == surfaces.PANTS and fp == surfaces.TWO_HOLED_PROJ:
        # pants boundary 0 is the interface K = A^2; boundaries 1, 2 match
        A0 = r0_full.images[0]
        start = base_path.samples[0]
        if max(proj_distance(start.images[1], r0_full.images[1]),
               proj_distance(start.images[2], r0_full.images[2]),
               proj_distance(start.images[0],
                             proj_multiply(A0, A0))) > 1e-6:
            raise ValueError("full representation does not restrict to the "
                             "start of the base path")
        for i, s in enumerate(base_path.samples):
            if not sl2.is_hyperbolic(s.images[0]):
                raise InterfaceNotHyperbolic(
                    f"interface sample {i} is not hyperbolic")
        lift0 = cover_mul(lift_base(A0), lift_base(A0)).lift
        ks = _assign_lifts([s.images[0] for s in base_path.samples], lift0)
        roots = _follow_crosscap(ks, A0)
        samples = tuple(Representation(fp, (a, s.images[1], s.images[2]))
                        for a, s in zip(roots, base_path.samples))
        return RepPath(fp, samples, base_path.step_bound)
    if (sp == surfaces.ONE_HOLED_TORUS and not fp.orientable
            and fp.boundary == 0 and fp.handles == 0 and fp.genus == 3):
        # torus boundary is the interface K = A^2 = [X, Y]^{-1}
        A0, X0, Y0 = surfaces.mixed_images(r0_full)
        start = base_path.samples[0]
        if max(proj_distance(start.images[0], X0),
               proj_distance(start.images[1], Y0),
               proj_distance(start.images[2],
                             proj_multiply(A0, A0))) > 1e-6:
            raise ValueError("full representation does not restrict to the "
                             "start of the base path")
        for i, s in enumerate(base_path.samples):
            if not sl2.is_hyperbolic(s.images[2]):
                raise InterfaceNotHyperbolic(
                    f"interface sample {i} is not hyperbolic")
        lift0 = cover_mul(lift_base(A0), lift_base(A0)).lift
        ks = _assign_lifts([s.images[2] for s in base_path.samples], lift0)
        roots = _follow_crosscap(ks, A0)
        samples = tuple(
            Representation(fp, surfaces.crosscap_images(
                fp, (a, s.images[0], s.images[1])))
            for a, s in zip(roots, base_path.samples))
        return RepPath(fp, samples, base_path.step_bound)
    raise TemplateUnsupported(
        "supported extensions: pants -> two-holed projective plane, "
        "one-holed torus -> closed genus-3 crosscap form")
