"""Surface-measure sampling and the incidence bilinear form.

The operator under study averages a function over a unit sphere:
``(T f)(x)`` integrates ``f(x - w)`` over unit vectors w with respect to
surface measure.  For indicator functions the pairing

    T(E, F) = integral over (y, w) of chi_E(y - w) chi_F(y)

measures the mass of point pairs at distance exactly one.  Estimators here
sample y uniformly in a bounding box and w by symmetric Gaussian
normalization (optionally restricted to a polar cap for variance
reduction), with everything driven by counter-based streams so estimates
are reproducible bit for bit at any worker count.

A paraboloid variant integrates over the graph measure dt of the surface
x_d = |x'|^2; it exists as the flat-geometry control for degeneracy
experiments.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import (Region, ParabCapE, ParabCapF, MeasureEstimate,
                       box_volume, measure, rotation_to_pole)
from .rng import Stream, chunked_sum


class EstimatorError(ValueError):
    pass


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_samples: int
    seed: int
    method: str


@dataclass(frozen=True)
class QexReport:
    """Bilinear form, measures and the derived near-extremality scalars.

    ratio = T / (|E| |F|)^{d/(d+1)};  alpha = T / |E|;  beta = T / |F|.
    """

    t_value: Estimate
    meas_e: MeasureEstimate
    meas_f: MeasureEstimate
    d: int
    ratio: float
    alpha: float
    beta: float
    degenerate: bool


def subseed(seed: int, tag: str) -> int:
    """Deterministic int sub-seed for a labeled component of a computation."""
    return Stream(seed, tag)._state.item() & 0x7FFFFFFFFFFFFFFF


def sphere_area(d: int) -> float:
    """Closed-form surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def sphere_sample(d: int, stream: Stream, start: int = 0, count: int = 1) -> np.ndarray:
    """(count, d) points uniform on the unit sphere."""
    if d < 2:
        raise EstimatorError("d must be >= 2")
    g = stream.normals(start, count, d)
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a Box-Muller vector is never the zero vector, but guard anyway
    norms[norms == 0.0] = 1.0
    w = g / norms
    return w / np.linalg.norm(w, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Polar-cap restricted sampling (variance reduction)
# ---------------------------------------------------------------------------

def cap_area(d: int, aperture: float) -> float:
    """Surface area of {w : |w - c| < aperture} for a unit vector c.

    ``aperture`` is a Euclidean chord length; anything >= 2 is the whole
    sphere.
    """
    if aperture >= 2.0:
        return sphere_area(d)
    psi = 2.0 * math.asin(aperture / 2.0)
    if d == 2:
        return 2.0 * psi
    if d == 3:
        return 2.0 * math.pi * (1.0 - math.cos(psi))
    raise EstimatorError("cap areas are implemented for d in {2, 3}")


def cap_sample(d: int, center: np.ndarray, aperture: float, stream: Stream,
               start: int, count: int) -> np.ndarray:
    """Uniform points of the polar cap {w : |w - center| < aperture}."""
    if aperture >= 2.0:
        return sphere_sample(d, stream, start, count)
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    psi = 2.0 * math.asin(aperture / 2.0)
    basis = rotation_to_pole(c).T  # columns: images of e_1 .. e_d, e_d -> c
    if d == 2:
        u = stream.uniforms(start, count, 1)[:, 0]
        ang = psi * (2.0 * u - 1.0)
        local = np.column_stack([np.sin(ang), np.cos(ang)])
        return local @ basis.T
    if d == 3:
        u = stream.uniforms(start, count, 2)
        h = 1.0 - u[:, 0] * (1.0 - math.cos(psi))
        az = 2.0 * math.pi * u[:, 1]
        rad = np.sqrt(np.maximum(0.0, 1.0 - h ** 2))
        local = np.column_stack([rad * np.cos(az), rad * np.sin(az), h])
        return local @ basis.T
    raise EstimatorError("cap sampling is implemented for d in {2, 3}")


def default_cap_aperture(rd: geometry.Radii) -> float:
    """4 * max(largest radius, largest reciprocal width), chord-clipped."""
    a = 4.0 * max(rd.r[-1], rd.rho / rd.r[0])
    return min(a, 2.0)


def cap_sample_centers(d: int, centers: np.ndarray, aperture: float,
                       stream: Stream, start: int, count: int) -> np.ndarray:
    """Uniform cap points with a different cap center per sample.

    Draws the cap around the pole e_d and reflects it onto each center by
    the Householder map e_d -> center, an isometry of the sphere.
    """
    pole = np.zeros(d)
    pole[-1] = 1.0
    local = cap_sample(d, pole, aperture, stream, start, count)
    nvec = pole[None, :] - centers
    nn = np.sum(nvec ** 2, axis=1)
    safe = nn > 1e-24
    coef = np.zeros_like(nn)
    coef[safe] = 2.0 * np.einsum("ij,ij->i", local, nvec)[safe] / nn[safe]
    return local - coef[:, None] * nvec


def _auto_cap_geometry(inner: Region):
    """Cap radius that provably contains {w : p - w in inner} for every p.

    If c is the center and R the half-diagonal of inner's bounding box,
    any unit w with p - w in inner satisfies |w - u(p)| <= 2R, where u(p)
    is the unit vector along p - c.
    """
    lo, hi = inner.bounding_box()
    center = 0.5 * (lo + hi)
    radius = 0.5 * float(np.linalg.norm(hi - lo))
    return center, min(2.0, 2.0 * radius + 1e-12)


# ---------------------------------------------------------------------------
# T chi_E at a point
# ---------------------------------------------------------------------------

def t_indicator_at(x, region: Region, mode: str = "mc", n: int = 1 << 16,
                   seed: int = 0, step: float = 1e-2, s_max: float = 0.9,
                   workers: int = 1, cap=None) -> Estimate:
    """Estimate the surface measure of {w : x - w in region}.

    mc mode averages ``area * chi(x - w)`` over uniform sphere samples;
    cap="auto" restricts w to the cap around x - center(region) that
    provably contains the fiber, keeping the average unbiased.  graph mode
    integrates over both hemispheres w = (s, +-sqrt(1-|s|^2)) with density
    ds / sqrt(1-|s|^2) on a tensor grid of the given pitch, restricted to
    |s| <= s_max; it is deterministic and reports zero standard error.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if mode == "mc":
        area = sphere_area(d)
        stream = Stream(seed, "t_indicator")
        center = None
        if cap == "auto":
            c_in, aperture = _auto_cap_geometry(region)
            if aperture < 2.0 and d <= 3:
                v = x - c_in
                nv = float(np.linalg.norm(v))
                center = v / nv if nv > 1e-300 else None
                if center is not None:
                    area = cap_area(d, aperture)

        def per_chunk(start, count):
            if center is None:
                w = sphere_sample(d, stream, start, count)
            else:
                w = cap_sample(d, center, aperture, stream, start, count)
            return (int(np.count_nonzero(region.contains(x[None, :] - w))),)

        (hits,) = chunked_sum(n, per_chunk, workers=workers)
        p = hits / n
        se = area * math.sqrt(p * (1.0 - p) / n)
        return Estimate(area * p, se, n, seed, "mc")
    if mode == "graph":
        if step <= 0.0:
            raise EstimatorError("graph mode needs a positive step")
        m = max(1, int(math.floor(2.0 * s_max / step)))
        centers = -s_max + (np.arange(m) + 0.5) * step
        grids = np.meshgrid(*([centers] * (d - 1)), indexing="ij")
        s = np.column_stack([g.ravel() for g in grids])
        rad2 = np.sum(s ** 2, axis=1)
        keep = rad2 <= s_max ** 2
        s = s[keep]
        height = np.sqrt(1.0 - rad2[keep])
        weight = step ** (d - 1) / height
        total = 0.0
        for sign in (1.0, -1.0):
            w = np.column_stack([s, sign * height])
            inside = region.contains(x[None, :] - w)
            total += float(np.sum(weight[inside]))
        return Estimate(total, 0.0, 2 * s.shape[0], seed, "graph_quadrature")
    raise EstimatorError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Bilinear form
# ---------------------------------------------------------------------------

def bilinear_form(E: Region, F: Region, n: int, seed: int, side: str = "f",
                  cap="auto", workers: int = 1) -> Estimate:
    """Monte Carlo estimate of T(E, F).

    side "f" samples y in F's bounding box and tests y - w in E; side "e"
    is the adjoint estimator (x in E's box, x + w in F).

    ``cap`` controls how the unit vector w is drawn:
      * None: uniformly over the whole sphere;
      * (center, aperture): a fixed polar cap, weighted by its area;
      * "auto" (default): a cap of the same aperture per sample but
        centered on the direction from the inner set to the sampled point.
        The aperture is twice the inner set's bounding half-diagonal, which
        provably contains every w that can register a hit, so the estimate
        stays unbiased while the variance drops by the cap fraction.
    Auto mode falls back to the full sphere when the cap would cover it or
    when d > 3 (no closed-form cap sampler there).
    """
    if n < 1:
        raise EstimatorError("n must be >= 1")
    if side not in ("f", "e"):
        raise EstimatorError(f"side must be 'f' or 'e', got {side!r}")
    inner, outer = (E, F) if side == "f" else (F, E)
    d = E.d
    auto = cap == "auto"
    if auto:
        inner_center, aperture = _auto_cap_geometry(inner)
        if aperture >= 2.0 or d > 3:
            cap = None
    lo, hi = outer.bounding_box()
    vol = box_volume(lo, hi)
    method = f"mc_{side}box" + ("_autocap" if auto and cap is not None else
                                "_cap" if cap is not None else "")
    if vol == 0.0:
        return Estimate(0.0, 0.0, n, seed, method)
    if cap is None:
        area = sphere_area(d)
    else:
        area = cap_area(d, aperture if auto else cap[1])
    stream = Stream(seed, f"bilinear_{side}")
    pt_stream = stream.derive("point")
    w_stream = stream.derive("sphere")
    sgn = -1.0 if side == "f" else 1.0

    def per_chunk(start, count):
        pts = geometry.sample_box(lo, hi, pt_stream, start, count)
        if cap is None:
            w = sphere_sample(d, w_stream, start, count)
        elif auto:
            # w-support is pts - inner (side f) or inner - pts (side e)
            v = -sgn * (pts - inner_center[None, :])
            norms = np.linalg.norm(v, axis=1, keepdims=True)
            u = np.divide(v, norms, out=np.zeros_like(v), where=norms > 1e-300)
            u[norms[:, 0] <= 1e-300, -1] = 1.0
            w = cap_sample_centers(d, u, aperture, w_stream, start, count)
        else:
            w = cap_sample(d, cap[0], cap[1], w_stream, start, count)
        hit = outer.contains(pts) & inner.contains(pts + sgn * w)
        return (int(np.count_nonzero(hit)),)

    (hits,) = chunked_sum(n, per_chunk, workers=workers)
    p = hits / n
    scale = vol * area
    return Estimate(scale * p, scale * math.sqrt(p * (1.0 - p) / n), n, seed, method)


def _parab_t_box(E: ParabCapE, F: ParabCapF):
    r = np.asarray(E.radii.r)
    w = np.asarray(F.radii.widths_f)
    center = E.x0[:-1] - F.y0[:-1]
    return center - (r + w), center + (r + w)


def bilinear_form_parab(E: ParabCapE, F: ParabCapF, n: int, seed: int,
                        workers: int = 1) -> Estimate:
    """T_P(E, F) for the paraboloid operator, integrating the graph measure.

    Incidences pair x in E with y in F through x - y = (t, |t|^2) on the
    surface, matching the anchor condition x0 - y0 on the surface.  Samples
    y in F's box and the shift parameter t in its exact support (outside it
    the integrand vanishes identically), then tests (y' + t, y_d + |t|^2)
    in E.
    """
    if not isinstance(E, ParabCapE) or not isinstance(F, ParabCapF):
        raise EstimatorError("paraboloid form needs paraboloid cap regions")
    if n < 1:
        raise EstimatorError("n must be >= 1")
    lo, hi = F.bounding_box()
    vol_y = box_volume(lo, hi)
    t_lo, t_hi = _parab_t_box(E, F)
    vol_t = float(np.prod(t_hi - t_lo))
    d = E.d
    stream = Stream(seed, "bilinear_parab")
    y_stream = stream.derive("point")
    t_stream = stream.derive("shift")

    def per_chunk(start, count):
        y = geometry.sample_box(lo, hi, y_stream, start, count)
        t = t_lo + t_stream.uniforms(start, count, d - 1) * (t_hi - t_lo)
        moved = np.column_stack([y[:, :-1] + t, y[:, -1] + np.sum(t ** 2, axis=1)])
        hit = F.contains(y) & E.contains(moved)
        return (int(np.count_nonzero(hit)),)

    (hits,) = chunked_sum(n, per_chunk, workers=workers)
    p = hits / n
    scale = vol_y * vol_t
    return Estimate(scale * p, scale * math.sqrt(p * (1.0 - p) / n), n, seed, "mc_parab")


def _is_parab_pair(E: Region, F: Region) -> bool:
    return isinstance(E, ParabCapE) and isinstance(F, ParabCapF)


def qex_report(E: Region, F: Region, n: int, seed: int, workers: int = 1,
               cap="auto") -> QexReport:
    """Measures, bilinear form and the near-extremality ratio of a pair.

    The ratio uses the endpoint exponent d / (d + 1).  A zero measure or a
    zero form marks the report degenerate with an undefined ratio.
    """
    d = E.d
    meas_e = measure(E, n, subseed(seed, "measE"), workers=workers)
    meas_f = measure(F, n, subseed(seed, "measF"), workers=workers)
    if _is_parab_pair(E, F):
        t_est = bilinear_form_parab(E, F, n, subseed(seed, "t"), workers=workers)
    else:
        t_est = bilinear_form(E, F, n, subseed(seed, "t"), cap=cap, workers=workers)
    p = d / (d + 1.0)
    if t_est.value <= 0.0 or meas_e.value <= 0.0 or meas_f.value <= 0.0:
        return QexReport(t_est, meas_e, meas_f, d, float("nan"), float("nan"),
                         float("nan"), degenerate=True)
    ratio = t_est.value / (meas_e.value ** p * meas_f.value ** p)
    alpha = t_est.value / meas_e.value
    beta = t_est.value / meas_f.value
    return QexReport(t_est, meas_e, meas_f, d, ratio, alpha, beta, degenerate=False)


def rho_d_lower_check(rd: geometry.Radii, n: int, seed: int, c0: float,
                      workers: int = 1):
    """Test T(E, F) >= c0 * rho^d for the cap pair of ``rd``.

    Returns (t_estimate, rho^d, passed).
    """
    E, F = geometry.make_sphere_pair(rd)
    t_est = bilinear_form(E, F, n, seed, workers=workers)
    rho_d = rd.rho ** rd.d
    return t_est, rho_d, bool(t_est.value >= c0 * rho_d)
