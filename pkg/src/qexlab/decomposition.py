"""Slab-and-cap decomposition of a cap pair and pigeonhole selection.

The E-side cap of radii (r; rho) splits into affine images of the shrunken
cap of radii (lambda r; lambda rho): a net of rotations moves the small cap
along the sphere (pitch lambda r_i per axis in graph coordinates) and a
stack of 2/lambda + 1 shifts of size lambda rho moves it radially.  Each
piece map is

    B(x) = R_j (x + e_d) - e_d + lambda rho i e_d,

with R_j the in-plane rotation taking the net point of the cap to the
pole.  The paired F-side pieces use the same maps; the compatibility
identity (incidences of the shrunken E-cap against the full F-cap all have
radial offset O(lambda rho)) is what makes one shared index set work for
both sides, and a pigeonhole over pieces then selects a sub-pair carrying
its share of the form.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import (Frame, FramedRegion, IntersectRegion, Radii, Region,
                       SphereCapE, SphereCapF, measure, relaxed_radii,
                       rotation_to_pole, sample_members)
from .rng import Stream
from .surface_ops import Estimate, bilinear_form, subseed


class DecompositionError(ValueError):
    pass


def _check_dyadic(lam: float) -> int:
    m = round(-math.log2(lam))
    if m < 1 or abs(lam - 2.0 ** -m) > 1e-12:
        raise DecompositionError(f"lambda must be a dyadic 2^-m < 1, got {lam}")
    return m


def select_lambda(target_e: float, target_f: float, rd: Radii, n: int,
                  seed: int, max_m: int = 40):
    """Largest dyadic lambda < 1 with lambda^d |E| <= target_e and
    lambda |F| <= target_f, using measured cap volumes."""
    if target_e <= 0.0 or target_f <= 0.0:
        raise DecompositionError("targets must be positive")
    me = measure(SphereCapE(rd), n, subseed(seed, "lamE")).value
    mf = measure(SphereCapF(rd), n, subseed(seed, "lamF")).value
    for m in range(1, max_m + 1):
        lam = 2.0 ** -m
        if lam ** rd.d * me <= target_e and lam * mf <= target_f:
            return lam, me, mf
    raise DecompositionError(
        f"no dyadic lambda >= 2^-{max_m} satisfies the measure targets"
    )


@dataclass(frozen=True)
class AffinePiece:
    """One piece of the decomposition: radial index i, net index j."""

    i: int
    j: int
    net_point: np.ndarray   # graph coordinates of the cap net point
    frame: Frame


def _net_axes(rd: Radii, lam: float):
    """Per-axis net centers: pitch lambda r_i, half-offset, 2/lambda points."""
    per_axis = []
    half = int(round(1.0 / lam))
    for ri in rd.r:
        pitch = lam * ri
        centers = (np.arange(-half, half) + 0.5) * pitch
        per_axis.append(centers)
    return per_axis


def partition(rd: Radii, lam: float) -> list:
    """Affine pieces covering the E-side cap of ``rd``.

    Net points live on the cap in graph coordinates with pitch lambda r_i
    (2/lambda per axis, pieces of half-width lambda r_i, so neighbours
    overlap by half); the radial index runs over |i| <= 1/lambda.
    """
    _check_dyadic(lam)
    half = int(round(1.0 / lam))
    axes = _net_axes(rd, lam)
    grids = np.meshgrid(*axes, indexing="ij")
    net = np.column_stack([g.ravel() for g in grids])
    e_d = np.zeros(rd.d)
    e_d[-1] = 1.0
    pieces = []
    for j, s in enumerate(net):
        s2 = float(np.sum(s ** 2))
        if s2 >= 1.0:
            continue
        omega = np.append(s, math.sqrt(1.0 - s2))
        R = rotation_to_pole(omega)
        base_shift = R @ e_d - e_d
        for i in range(-half, half + 1):
            frame = Frame(R, base_shift + lam * rd.rho * i * e_d)
            pieces.append(AffinePiece(i, j, s.copy(), frame))
    return pieces


def piece_regions(rd: Radii, lam: float, piece: AffinePiece,
                  thickness_factor: float = 1.0):
    """The piece's E and F regions: framed shrunken caps, optionally with
    inflated thickness."""
    small = relaxed_radii([lam * ri for ri in rd.r],
                         thickness_factor * lam * rd.rho, rd.d)
    return (FramedRegion(SphereCapE(small), piece.frame),
            FramedRegion(SphereCapF(small), piece.frame))


def coverage_check(rd: Radii, lam: float, n: int, seed: int):
    """Fraction of sampled E-cap points lying in at least one piece."""
    pieces = partition(rd, lam)
    E = SphereCapE(rd)
    pts = sample_members(E, n, Stream(seed, "coverage"))
    covered = np.zeros(n, dtype=bool)
    for piece in pieces:
        e_piece, _ = piece_regions(rd, lam, piece)
        covered |= e_piece.contains(pts)
        if covered.all():
            break
    return float(np.mean(covered)), pieces


def piece_containment_check(rd: Radii, lam: float, n: int, seed: int,
                            thickness_c: float, horizontal_slack: float):
    """Fraction of piece points inside the cap with widths (1 + slack
    lambda) r and thickness c rho.

    The half-overlapping net necessarily pokes out horizontally by up to
    half a piece width, so the containment target widens the radii by
    lambda-proportional slack instead of using the raw r.
    """
    pieces = partition(rd, lam)
    wide = relaxed_radii([min((1.0 + horizontal_slack * lam) * ri, 1.0)
                          for ri in rd.r], thickness_c * rd.rho, rd.d)
    target = SphereCapE(wide)
    worst = 1.0
    stream = Stream(seed, "piece_containment")
    for idx, piece in enumerate(pieces):
        e_piece, _ = piece_regions(rd, lam, piece)
        pts = sample_members(e_piece, n, stream.derive(f"p{idx}"))
        frac = float(np.mean(target.contains(pts)))
        worst = min(worst, frac)
    return worst


@dataclass(frozen=True)
class CompatibilityResult:
    t_full: Estimate
    t_small: Estimate
    passed: bool


def compatibility_check(rd: Radii, lam: float, c_big: float, n: int,
                        seed: int, workers: int = 1) -> CompatibilityResult:
    """T(E(lam r; lam rho), F(r; rho)) against the same form with F cut
    down to the compatibility cap F(lam r; c_big lam rho).

    Every incidence partner of the shrunken E-cap has radial offset
    O(lambda rho), so for c_big large enough the cut loses no incidences
    and the two estimates agree sample by sample; c_big = 1 is the
    negative control that clips real incidence mass.
    """
    small = rd.scaled(lam)
    e_small = SphereCapE(small)
    f_full = SphereCapF(rd)
    f_compat = SphereCapF(relaxed_radii(list(small.r), c_big * small.rho, rd.d))
    t_full = bilinear_form(e_small, f_full, n, subseed(seed, "compat"),
                           workers=workers)
    t_small = bilinear_form(e_small, IntersectRegion(f_full, f_compat), n,
                            subseed(seed, "compat"), workers=workers)
    gap = abs(t_full.value - t_small.value)
    tol = 3.0 * math.hypot(t_full.std_error, t_small.std_error)
    return CompatibilityResult(t_full, t_small, gap <= tol)


@dataclass(frozen=True)
class Delta2Result:
    max_ratio: float
    n_solved: int
    n_skipped: int


def delta2_bound_check(rd: Radii, lam: float, n: int, seed: int,
                       width_c: float = 4.0) -> Delta2Result:
    """Radial offset of F-side incidence partners of the shrunken cap.

    Samples x in E(lam r; lam rho) and a horizontal y' in the widened
    F-box, solves |x - y| = 1 along the radial coordinate of y (the lower
    root), and returns max |y_d + sqrt(1-|y'|^2)| / (lam rho).  Pairs with
    no solution are skipped and counted.  The widened box must stay well
    inside the unit ball (width_c rho <= r_i / 2), else the thin-cap
    expansion behind the lambda rho scale does not apply.
    """
    if any(width_c * rd.rho > ri / 2.0 for ri in rd.r):
        raise DecompositionError(
            "delta2 check needs width_c * rho <= r_i / 2 for all radii"
        )
    small = rd.scaled(lam)
    e_small = SphereCapE(small)
    stream = Stream(seed, "delta2")
    xs = sample_members(e_small, n, stream.derive("x"))
    widths = width_c * rd.rho / np.asarray(rd.r)
    u = stream.derive("y").uniforms(0, n, rd.d - 1)
    yp = (2.0 * u - 1.0) * widths
    gap2 = 1.0 - np.sum((xs[:, :-1] - yp) ** 2, axis=1)
    solvable = gap2 > 0.0
    y_d = xs[:, -1] - np.sqrt(np.clip(gap2, 0.0, None))
    yp2 = np.sum(yp ** 2, axis=1)
    on_sphere = yp2 < 1.0
    good = solvable & on_sphere
    delta2 = y_d[good] + np.sqrt(1.0 - yp2[good])
    if delta2.size == 0:
        return Delta2Result(float("nan"), 0, n)
    ratio = float(np.max(np.abs(delta2))) / (lam * rd.rho)
    return Delta2Result(ratio, int(np.count_nonzero(good)),
                        int(n - np.count_nonzero(good)))


@dataclass(frozen=True)
class PieceEstimate:
    i: int
    j: int
    net_point: np.ndarray
    t: float
    se: float


@dataclass(frozen=True)
class PigeonholeReport:
    pieces: list            # PieceEstimate rows
    best: PieceEstimate
    total: Estimate
    sum_pieces: float
    passed: bool


def pigeonhole_best(E: Region, F: Region, rd: Radii, lam: float, c_big: float,
                    n: int, seed: int, workers: int = 1) -> PigeonholeReport:
    """Per-piece forms T(E cap piece_E, F cap piece_F) and their argmax.

    The contract is best >= total / piece count - 3 combined errors, the
    checkable direction of the pigeonhole step.
    """
    pieces = partition(rd, lam)
    rows = []
    for idx, piece in enumerate(pieces):
        e_piece, f_piece = piece_regions(rd, lam, piece, thickness_factor=c_big)
        est = bilinear_form(IntersectRegion(E, e_piece),
                            IntersectRegion(F, f_piece), n,
                            subseed(seed, f"piece{idx}"), workers=workers)
        rows.append(PieceEstimate(piece.i, piece.j, piece.net_point,
                                  est.value, est.std_error))
    total = bilinear_form(E, F, n, subseed(seed, "total"), workers=workers)
    if not rows:
        raise DecompositionError("empty partition")
    best = max(rows, key=lambda r: r.t)
    share = total.value / len(rows)
    tol = 3.0 * math.hypot(best.se, total.std_error / len(rows))
    passed = best.t >= share - tol
    return PigeonholeReport(rows, best, total, sum(r.t for r in rows), passed)
