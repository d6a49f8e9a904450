"""Command-line interface: classification, invariants, sampling, connection,
counterexample probing, and the two-component certification experiment.

All reports are plain text, ``key=value`` pairs, one record per line, in
stable sorted order, so runs with identical configuration (including the
seed) produce byte-identical output.

Exit codes: 0 success, 2 parse/usage, 3 region ambiguity, 4 class failure,
5 certification or path failure.
"""
from __future__ import annotations

import math
import sys

import click

from . import cover, homotopy, sl2, squares, surfaces
from .cover import CoverElement
from .errors import (AmbiguousRegion, DifferentClasses, NotCentral,
                     ParseError, PslCoverError, RelationViolated)
from .sl2 import from_scaled, projectivize

EXIT_PARSE = 2
EXIT_AMBIGUOUS = 3
EXIT_CLASS = 4
EXIT_CERTIFY = 5


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _record(**kv) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in sorted(kv.items()))


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


# --- file formats -----------------------------------------------------------

def _parse_floats(line: str):
    try:
        return [float(tok) for tok in line.split()]
    except ValueError as exc:
        raise ParseError(f"bad numeric line {line!r}") from exc


def _pres_header(p: surfaces.SurfacePresentation) -> str:
    return (f"orientable={1 if p.orientable else 0} genus={p.genus} "
            f"boundary={p.boundary} handles={p.handles}\n")


def _parse_pres(line: str) -> surfaces.SurfacePresentation:
    kv = {}
    for tok in line.split():
        if "=" not in tok:
            raise ParseError(f"bad header token {tok!r}")
        k, v = tok.split("=", 1)
        kv[k] = v
    try:
        return surfaces.SurfacePresentation(
            orientable=bool(int(kv["orientable"])), genus=int(kv["genus"]),
            boundary=int(kv["boundary"]), handles=int(kv["handles"]))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad presentation header {line!r}") from exc


def _image_line(p) -> str:
    m = p.rep
    return (f"{float(m.a)!r} {float(m.b)!r} "
            f"{float(m.c)!r} {float(m.d)!r}\n")


def save_representation(r: surfaces.Representation, path: str):
    with open(path, "w") as fh:
        fh.write(_pres_header(r.presentation))
        for p in r.images:
            fh.write(_image_line(p))


def load_representation(path: str) -> surfaces.Representation:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()
                 and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty representation file")
    pres = _parse_pres(lines[0])
    body = lines[1:]
    if len(body) != pres.generator_count:
        raise ParseError(f"expected {pres.generator_count} image lines, "
                         f"got {len(body)}")
    images = []
    for ln in body:
        vals = _parse_floats(ln)
        if len(vals) != 4:
            raise ParseError(f"image line needs 4 entries: {ln!r}")
        images.append(projectivize(from_scaled(*vals)))
    return surfaces.Representation(pres, tuple(images))


def save_path(p: homotopy.RepPath, path: str):
    with open(path, "w") as fh:
        fh.write(_pres_header(p.presentation))
        fh.write(f"step_bound={p.step_bound!r} samples={len(p.samples)}\n")
        for s in p.samples:
            for img in s.images:
                fh.write(_image_line(img))


def load_path(path: str) -> homotopy.RepPath:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()
                 and not ln.startswith("#")]
    if len(lines) < 2:
        raise ParseError("truncated path file")
    pres = _parse_pres(lines[0])
    kv = dict(tok.split("=", 1) for tok in lines[1].split() if "=" in tok)
    try:
        step = float(kv["step_bound"])
        n = int(kv["samples"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad path header {lines[1]!r}") from exc
    g = pres.generator_count
    body = lines[2:]
    if len(body) != n * g:
        raise ParseError(f"expected {n * g} image lines, got {len(body)}")
    samples = []
    for i in range(n):
        images = []
        for ln in body[i * g:(i + 1) * g]:
            vals = _parse_floats(ln)
            if len(vals) != 4:
                raise ParseError(f"image line needs 4 entries: {ln!r}")
            images.append(projectivize(from_scaled(*vals)))
        samples.append(surfaces.Representation(pres, tuple(images)))
    return homotopy.RepPath(pres, tuple(samples), step)


# --- commands ---------------------------------------------------------------

@click.group()
def main():
    """Connected-component toolkit for PSL(2,R) surface representations."""


@main.command()
@click.argument("input", default="-")
def classify(input):
    """Classify matrix or cover-element lines (4 or 5 numbers per line).

    Four numbers are a unit-determinant matrix (the canonical lift is
    classified); a fifth number is an explicit lift value.
    """
    try:
        data = (sys.stdin.read() if input == "-"
                else open(input).read())
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        for line in data.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vals = _parse_floats(line)
            if len(vals) == 4:
                p = projectivize(from_scaled(*vals))
                t = sl2.conj_type(p)
                if t == sl2.HYPERBOLIC:
                    k = cover.canonical_hyperbolic_lift(p)
                else:
                    k = cover.lift_base(p)
            elif len(vals) == 5:
                p = projectivize(from_scaled(*vals[:4]))
                k = CoverElement(p, vals[4])
                t = sl2.conj_type(p)
            else:
                raise ParseError(f"need 4 or 5 numbers: {line!r}")
            region = cover.classify_region(k)
            ml, mh = cover.displacement_extrema(k)
            name = "central" if t == sl2.IDENTITY else t
            click.echo(_record(m_high=mh, m_low=ml, region=str(region),
                               trace=cover.cover_trace(k), type=name))
    except ParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    except AmbiguousRegion as exc:
        click.echo(f"ambiguous region: {exc}", err=True)
        sys.exit(EXIT_AMBIGUOUS)


@main.command()
@click.argument("repfile")
def invariants(repfile):
    """Print residual, boundary check, and the characteristic class."""
    try:
        r = load_representation(repfile)
    except (ParseError, OSError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    kv = {"residual": surfaces.relation_residual(r),
          "in_w": surfaces.in_W(r)}
    p = r.presentation
    try:
        if p.orientable:
            kv["euler"] = surfaces.euler_relative(r).value
        elif p.boundary == 0 and p.handles == 0:
            kv["sw"] = surfaces.sw_class_closed(r).value
        else:
            kv["sw"] = surfaces.sw_class_relative(r).value
    except (NotCentral, RelationViolated) as exc:
        click.echo(_record(**kv))
        click.echo(f"class failure: {exc}", err=True)
        sys.exit(EXIT_CLASS)
    click.echo(_record(**kv))


@main.command()
@click.option("--genus", type=int, required=True)
@click.option("--boundary", type=int, default=0)
@click.option("--handles", type=int, default=0)
@click.option("--orientable", is_flag=True, default=False)
@click.option("--seed", type=int, required=True)
@click.option("--target-class", type=int, default=None)
@click.option("--out", default=None)
def sample(genus, boundary, handles, orientable, seed, target_class, out):
    """Sample a representation and write it to a file (or stdout)."""
    try:
        pres = surfaces.SurfacePresentation(
            orientable=orientable, genus=genus, boundary=boundary,
            handles=handles)
    except ValueError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    r = surfaces.sample_representation(pres, seed, target_class=target_class)
    if out:
        save_representation(r, out)
    else:
        sys.stdout.write(_pres_header(pres))
        for img in r.images:
            sys.stdout.write(_image_line(img))


@main.command()
@click.argument("repfile1")
@click.argument("repfile2")
@click.option("--step", type=float, default=homotopy.STEP_BOUND)
@click.option("--out", default=None)
def connect(repfile1, repfile2, step, out):
    """Connect two same-class closed representations by an explicit path."""
    try:
        r1 = load_representation(repfile1)
        r2 = load_representation(repfile2)
    except (ParseError, OSError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        p = homotopy.connect_representations(r1, r2, step_bound=step)
    except DifferentClasses as exc:
        click.echo(f"class failure: {exc}", err=True)
        sys.exit(EXIT_CLASS)
    except PslCoverError as exc:
        click.echo(f"connection failure: {type(exc).__name__}: {exc}",
                   err=True)
        sys.exit(EXIT_CERTIFY)
    report = homotopy.verify_rep_path(p)
    if out:
        save_path(p, out)
    click.echo(_record(max_residual=report.max_residual,
                       max_step=report.max_step, passed=report.passed,
                       samples=report.samples))
    if not report.passed:
        sys.exit(EXIT_CERTIFY)


@main.command(name="verify-path")
@click.argument("pathfile")
def verify_path(pathfile):
    """Audit a path file: residuals, steps, boundary types, end classes."""
    try:
        p = load_path(pathfile)
    except (ParseError, OSError, ValueError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    rep = homotopy.verify_rep_path(p)
    click.echo(_record(boundary_ok=rep.boundary_ok,
                       end_class=rep.end_class.replace("=", ":"),
                       max_residual=rep.max_residual,
                       max_step=rep.max_step, passed=rep.passed,
                       samples=rep.samples,
                       start_class=rep.start_class.replace("=", ":")))
    if not rep.passed:
        sys.exit(EXIT_CERTIFY)


@main.command()
@click.option("--out", default=None)
def counterexample(out):
    """Oscillation probe: square roots along K_t -> -I do not converge."""
    lines = []
    for n in (10, 100, 1000):
        tp = 1.0 / (2.0 * math.pi * n + 0.5 * math.pi)
        tm = 1.0 / (2.0 * math.pi * n + 1.5 * math.pi)
        ap, am = squares.remark_sqrt([tp, tm])
        sep = sl2.proj_distance(ap, am)
        lines.append(_record(n=n, sqrt_separation=sep, t_minus=tm, t_plus=tp))
    neg = sl2.UnitDetMatrix(-1.0, 0.0, 0.0, -1.0)
    for t in (1e-1, 1e-2, 1e-3, 1e-4):
        (k,) = squares.remark_counterexample([t])
        lines.append(_record(k_dist_to_neg_identity=sl2.frobenius(k, neg),
                             t=t))
    _emit("".join(ln + "\n" for ln in lines), out)


@main.command()
@click.option("--genus", type=int, required=True)
@click.option("--samples", "n_samples", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--step", type=float, default=homotopy.STEP_BOUND)
@click.option("--tol-rel", type=float, default=homotopy.RESIDUAL_BOUND)
@click.option("--out", default=None)
def certify(genus, n_samples, seed, step, tol_rel, out):
    """Certify at desk scale that sampled representations fall into exactly
    two path-connected classes separated by the Stiefel-Whitney invariant."""
    if genus not in (3, 4):
        click.echo("refused: connectivity certification requires "
                   "non-orientable genus k >= 3 (implemented for k in "
                   "{3, 4})", err=True)
        sys.exit(EXIT_PARSE)
    if n_samples < 1:
        click.echo("refused: need at least one sample", err=True)
        sys.exit(EXIT_PARSE)
    pres = surfaces.SurfacePresentation(orientable=False, genus=genus)
    reps, lines = [], []
    for i in range(n_samples):
        r = surfaces.sample_representation(pres, seed + i)
        sw = surfaces.sw_class_closed(r).value
        reps.append((i, r, sw))
        lines.append(_record(record="sample", index=i,
                             residual=surfaces.relation_residual(r), sw=sw))
    buckets = {0: [x for x in reps if x[2] == 0],
               1: [x for x in reps if x[2] == 1]}
    failures = 0
    connections = 0
    for sw in (0, 1):
        members = buckets[sw]
        if not members:
            continue
        hub_i, hub_r, _ = members[0]
        for j, r, _ in members[1:]:
            connections += 1
            try:
                p = homotopy.connect_representations(hub_r, r,
                                                     step_bound=step)
                rep = homotopy.verify_rep_path(p)
                ok = (rep.passed and rep.max_residual <= tol_rel
                      and rep.max_step <= step
                      and rep.start_class == rep.end_class)
                lines.append(_record(
                    record="connect", sw=sw, pair=f"{hub_i}-{j}",
                    status="pass" if ok else "fail",
                    max_residual=rep.max_residual, max_step=rep.max_step,
                    path_samples=rep.samples))
                if not ok:
                    failures += 1
            except PslCoverError as exc:
                failures += 1
                lines.append(_record(record="connect", sw=sw,
                                     pair=f"{hub_i}-{j}", status="fail",
                                     error=type(exc).__name__))
    both = bool(buckets[0]) and bool(buckets[1])
    certified = failures == 0 and both
    summary = {"record": "summary", "samples": n_samples,
               "class0": len(buckets[0]), "class1": len(buckets[1]),
               "connections": connections, "failures": failures,
               "certified": certified}
    if n_samples == 1 or not both:
        summary["warning"] = ("certified-incomplete: only one class "
                              "observed")
        summary["certified"] = failures == 0
    lines.append(_record(**summary))
    _emit("".join(ln + "\n" for ln in lines), out)
    if failures:
        sys.exit(EXIT_CERTIFY)


if __name__ == "__main__":
    main()
