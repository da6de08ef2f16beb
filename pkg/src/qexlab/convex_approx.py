"""Balanced convex approximation of point clouds.

A measurable set in R^k is discretized as a point cloud with a common
weight, so its mass is weight * count.  The machinery here fits a balanced
(origin-symmetric) ellipsoid around the cloud, then refines it by a
stopping-time search: as long as some much smaller balanced sub-ellipsoid
captures almost all of the mass, the fit is replaced by it.  A refined body
V is "removal stable": carving out any balanced sub-ellipsoid of at most
half the volume leaves a definite fraction of the cloud mass behind,
quantitatively at least of order (mass / vol V)^eta * mass.  That stability
is what drives the determinant-integral lower bound

    integral over A^k of |det(u_1 .. u_k)| >= c * |V| * mass^k * (mass/|V|)^{eta k},

estimated here by Monte Carlo over cloud tuples.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import Stream, chunked_sum


class ConvexError(ValueError):
    pass


class RefinementError(RuntimeError):
    """Stopping-time search failed to terminate; carries the trace."""

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = trace


def unit_ball_volume(k: int) -> float:
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class EllipsoidBody:
    """Balanced ellipsoid A(unit ball), A symmetric positive-definite."""

    shape: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.shape, dtype=float)
        object.__setattr__(self, "shape", A)
        if not np.allclose(A, A.T, atol=1e-10):
            raise ConvexError("shape matrix must be symmetric")

    @property
    def k(self) -> int:
        return self.shape.shape[0]

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.shape))) * unit_ball_volume(self.k)

    def semi_axes(self) -> np.ndarray:
        return np.sort(np.linalg.eigvalsh(self.shape))

    def mahalanobis(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.linalg.norm(np.linalg.solve(self.shape, pts.T).T, axis=1)

    def contains(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        return self.mahalanobis(pts) <= 1.0 + tol

    def scaled(self, factors) -> "EllipsoidBody":
        """Rescale per principal axis; scalar factors shrink isotropically."""
        vals, vecs = np.linalg.eigh(self.shape)
        f = np.broadcast_to(np.asarray(factors, dtype=float), vals.shape)
        return EllipsoidBody((vecs * (vals * f)) @ vecs.T)


@dataclass(frozen=True)
class PointCloud:
    """Finite sample of a set, all points sharing one weight."""

    points: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ConvexError("point cloud must be non-empty")
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def mass(self) -> float:
        return self.weight * self.count

    @staticmethod
    def from_csv(path, weight: float = 1.0) -> "PointCloud":
        pts = np.loadtxt(path, delimiter=",", ndmin=2)
        return PointCloud(pts, weight)

    def to_csv(self, path):
        np.savetxt(path, self.points, delimiter=",", fmt="%.17g")


def body_to_csv(body: "EllipsoidBody", path):
    """Serialize the symmetric shape matrix, one row per line."""
    np.savetxt(path, body.shape, delimiter=",", fmt="%.17g")


def body_from_csv(path) -> "EllipsoidBody":
    return EllipsoidBody(np.loadtxt(path, delimiter=",", ndmin=2))


_DEGENERATE_SCALE = 1e-12


def _sym_sqrt(M: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(M)
    vals = np.maximum(vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.T


def mvee_centered(points: np.ndarray, tol: float = 1e-6,
                  max_iter: int = 10 ** 4) -> EllipsoidBody:
    """Minimum-volume origin-centered ellipsoid enclosing +-points.

    Multiplicative-weights iteration with away steps on the symmetrized
    cloud (the optimal design view: maximize log det of the weighted
    second-moment matrix; away steps drop weight from interior points and
    give linear convergence).  The returned body always encloses every
    input point; the volume is minimal up to the tolerance at convergence.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    # the symmetrized design duplicates each direction, so optimizing over
    # the raw points with the quadratic form already yields the balanced fit
    P = pts
    m, k = P.shape
    scale = float(np.max(np.abs(P)))
    if scale <= 0.0:
        return EllipsoidBody(_DEGENERATE_SCALE * np.eye(k))
    u = np.full(m, 1.0 / m)
    kkt_tol = 2.0 * tol / k  # (1 + eps)^{k/2} - 1 <= tol
    ridge = (scale ** 2) * 1e-14
    eye = ridge * np.eye(k)
    M = (P * u[:, None]).T @ P + eye
    for _ in range(max_iter):
        Minv = np.linalg.inv(M)
        w = np.einsum("ij,jl,il->i", P, Minv, P)
        j_up = int(np.argmax(w))
        eps_up = w[j_up] / k - 1.0
        support = u > 1e-12 / m
        w_sup = np.where(support, w, np.inf)
        j_dn = int(np.argmin(w_sup))
        eps_dn = 1.0 - w[j_dn] / k
        if max(eps_up, eps_dn) <= kkt_tol:
            break
        if eps_up >= eps_dn:
            j, wj = j_up, w[j_up]
            step = (wj - k) / (k * (wj - 1.0))
        else:
            # away step: shrink or drop the most interior support weight
            j, wj = j_dn, w[j_dn]
            lam_min = -u[j] / (1.0 - u[j]) if u[j] < 1.0 else 0.0
            if wj <= 1.0:
                step = lam_min
            else:
                step = max((wj - k) / (k * (wj - 1.0)), lam_min)
        u *= 1.0 - step
        u[j] += step
        u = np.maximum(u, 0.0)
        M = (P * u[:, None]).T @ P + eye
    # enclose exactly: scale the ellipsoid out to the farthest point
    Minv = np.linalg.inv(M)
    w = np.einsum("ij,jl,il->i", P, Minv, P)
    kappa = max(float(np.max(w)), k * 1e-30)
    return EllipsoidBody(_sym_sqrt(kappa * M))


def john_balanced_fit(cloud: PointCloud, coverage: float = 1.0,
                      tol: float = 1e-6) -> EllipsoidBody:
    """Balanced enclosing ellipsoid of (at least) a coverage fraction.

    coverage = 1 is a plain centered MVEE of the symmetrized cloud; below 1
    the farthest points are peeled off in small batches and the fit is
    repeated, which makes the body robust to outliers.
    """
    if not 0.0 < coverage <= 1.0:
        raise ConvexError("coverage must be in (0, 1]")
    pts = cloud.points
    if np.max(np.abs(pts)) <= 0.0:
        return EllipsoidBody(_DEGENERATE_SCALE * np.eye(cloud.k))
    target = int(math.ceil(coverage * cloud.count))
    kept = pts
    body = mvee_centered(kept, tol=tol)
    while kept.shape[0] > max(target, cloud.k):
        radii = body.mahalanobis(kept)
        drop = max(1, min(kept.shape[0] - target, kept.shape[0] // 50))
        keep_idx = np.argsort(radii, kind="stable")[: kept.shape[0] - drop]
        kept = kept[np.sort(keep_idx)]
        body = mvee_centered(kept, tol=tol)
    return body


_AXIS_FACTORS = [2.0 ** (-j / 4.0) for j in range(1, 13)]


def _axis_candidates(k: int):
    """Per-axis shrink factors with overall volume factor at most 1/2."""
    import itertools

    out = []
    for combo in itertools.product(_AXIS_FACTORS, repeat=k):
        if np.prod(combo) <= 0.5 + 1e-12:
            out.append(combo)
    return out


def stopping_time_refine(cloud: PointCloud, eta: float,
                         violation_scale: float = 0.05,
                         max_iter: int = 64) -> EllipsoidBody:
    """Shrink the fitted ellipsoid until no cheap sub-ellipsoid hides the mass.

    At each round the current fit V is tested against axis-rescaled
    sub-ellipsoids V' of at most half the volume; if the cloud mass left in
    V minus V' falls below violation_scale * (mass/|V|)^eta * mass, the fit
    is replaced by V' and the search repeats.  Stops when no candidate
    violates or when |V| has dropped below the cloud mass.
    """
    k = cloud.k
    if not 0.0 < eta < 1.0 / k:
        raise ConvexError(f"eta must be in (0, 1/{k}) for clouds in R^{k}")
    body = john_balanced_fit(cloud, coverage=1.0)
    mass = cloud.mass
    pts = cloud.points
    weight = cloud.weight
    candidates = _axis_candidates(k)
    trace = []
    for iteration in range(max_iter):
        vol = body.volume
        if vol < mass:
            return body
        vals, vecs = np.linalg.eigh(body.shape)
        local = pts @ vecs  # coordinates in the principal frame
        radii2_axes = local ** 2
        in_v = np.sum(radii2_axes / np.maximum(vals, 1e-300) ** 2, axis=1) <= 1.0 + 1e-12
        n_v = int(np.count_nonzero(in_v))
        threshold = violation_scale * (mass / vol) ** eta * mass
        best = None
        for combo in candidates:
            scaled = np.maximum(vals * np.asarray(combo), 1e-300)
            inside = np.sum(radii2_axes / scaled ** 2, axis=1) <= 1.0 + 1e-12
            removed = weight * (n_v - int(np.count_nonzero(inside)))
            if removed < threshold:
                key = (removed, float(np.prod(combo)))
                if best is None or key < best[0]:
                    best = (key, combo)
        if best is None:
            return body
        combo = best[1]
        body = EllipsoidBody((vecs * (vals * np.asarray(combo))) @ vecs.T)
        trace.append({"iteration": iteration, "volume": vol,
                      "removed": best[0][0], "factors": combo})
    raise RefinementError(
        f"stopping-time refinement did not terminate in {max_iter} rounds",
        trace,
    )


@dataclass(frozen=True)
class StabilityResult:
    passed: bool
    worst_ratio: float
    ratios: np.ndarray
    candidate_family: str


def random_balanced_subellipsoid(body: EllipsoidBody, stream: Stream,
                                 index: int) -> EllipsoidBody:
    """Random balanced ellipsoid inside ``body`` with at most half its volume."""
    k = body.k
    g = stream.derive("rot").normals(index, 1, k * k)[0].reshape(k, k)
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    u = stream.derive("fac").uniforms(index, 1, k + 1)[0]
    factors = 0.1 + 0.9 * u[:k]
    target = (0.1 + 0.9 * u[k]) * 0.5
    prod = float(np.prod(factors))
    if prod > target:
        factors = factors * (target / prod) ** (1.0 / k)
    T = (q * factors) @ q.T  # symmetric, operator norm <= 1
    M = body.shape @ T @ T @ body.shape.T
    return EllipsoidBody(_sym_sqrt(M))


def removal_stability_check(cloud: PointCloud, body: EllipsoidBody, eta: float,
                            trials: int, stream: Stream,
                            pass_threshold: float) -> StabilityResult:
    """Monte Carlo version of the removal-stability property of a refined fit.

    For random balanced sub-ellipsoids V' of at most half the volume, the
    mass of cloud points in V minus V' is compared against
    (mass/|V|)^eta * mass; the check passes when the worst ratio stays
    above ``pass_threshold``.
    """
    mass = cloud.mass
    vol = body.volume
    if vol <= 0.0:
        raise ConvexError("degenerate body")
    in_v = body.contains(cloud.points)
    denom = (mass / vol) ** eta * mass
    ratios = np.empty(trials)
    for j in range(trials):
        sub = random_balanced_subellipsoid(body, stream, j)
        in_sub = sub.contains(cloud.points)
        removed = cloud.weight * int(np.count_nonzero(in_v & ~in_sub))
        ratios[j] = removed / denom
    worst = float(np.min(ratios))
    return StabilityResult(worst >= pass_threshold, worst, ratios,
                           "axis-free random balanced sub-ellipsoids")


@dataclass(frozen=True)
class DetIntegralEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int
    method: str = "mc_cloud_tuples"


def det_integral(cloud: PointCloud, n: int, stream: Stream) -> DetIntegralEstimate:
    """Monte Carlo estimate of the integral of |det(u_1 .. u_k)| over A^k.

    Tuples are drawn uniformly from the cloud with replacement; the sample
    mean of |det| is scaled by mass^k.
    """
    k = cloud.k
    pts = cloud.points

    def per_chunk(start, count):
        idx = stream.integers(start, count, k, cloud.count)
        mats = pts[idx]  # (count, k, k): rows are the tuple vectors
        dets = np.abs(np.linalg.det(mats))
        return (float(np.sum(dets)), float(np.sum(dets ** 2)))

    s1, s2 = chunked_sum(n, per_chunk)
    mean = s1 / n
    var = max(s2 / n - mean ** 2, 0.0)
    scale = cloud.mass ** k
    return DetIntegralEstimate(scale * mean, scale * math.sqrt(var / n),
                               n, stream.seed)


def det_integral_lower_bound(cloud: PointCloud, body: EllipsoidBody,
                             eta: float) -> float:
    """The benchmark |V| * mass^k * (mass/|V|)^{eta k} the estimate is held to."""
    k = cloud.k
    return body.volume * cloud.mass ** k * (cloud.mass / body.volume) ** (eta * k)


def dist_product_identity(vectors) -> float:
    """Product of distances of u_i to span(u_1 .. u_{i-1}).

    Equals |det(u_1 .. u_k)|; the agreement is asserted to 1e-9 relative
    (both sides of the identity are computed independently).
    """
    us = np.atleast_2d(np.asarray(vectors, dtype=float))
    k = us.shape[0]
    if us.shape != (k, k):
        raise ConvexError("need k vectors in R^k")
    prod = 1.0
    basis = []
    for i in range(k):
        v = us[i].copy()
        for b in basis:
            v -= np.dot(v, b) * b
        dist = float(np.linalg.norm(v))
        prod *= dist
        if dist > 1e-300:
            basis.append(v / dist)
    det = abs(float(np.linalg.det(us.T)))
    ref = max(abs(det), abs(prod))
    if ref > 1e-300 and abs(det - prod) > 1e-9 * ref:
        raise ConvexError(
            f"distance product {prod!r} disagrees with |det| {det!r}"
        )
    return prod
