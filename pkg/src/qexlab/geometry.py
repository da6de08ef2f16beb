"""Cap-pair geometry: radii, rigid frames, membership-testable regions.

The central objects are the dual cap pairs on the unit sphere.  For a
radius tuple r = (r_1, ..., r_{d-1}) and thickness rho, the E-side cap is
the set of x with |x_i| < r_i, dist(x + e_d, S^{d-1}) < rho and x_d > -1
(a thin ellipsoidal patch of the sphere centered at -e_d, touching the
origin), and the F-side cap is the set of y with |y_i| < rho / r_i,
dist(y, S^{d-1}) < rho and y_d < 0 (the reciprocal patch at the south pole
of the unit sphere).  Paraboloid analogues replace the radial conditions
with |x_d - (y0)_d - |x' - y0'|^2| < rho and its mirror.

Every region exposes a vectorized membership predicate and a finite
axis-aligned bounding box, which is all the Monte Carlo machinery needs.
"""

from dataclasses import dataclass, field

import numpy as np

from .rng import Stream, chunked_sum


class GeometryError(ValueError):
    pass


class RadiiValidationError(GeometryError):
    """Non-finite, non-positive or mis-shaped radii input."""


class SamplingError(RuntimeError):
    """Rejection sampling failed to find member points."""


COND_SMALL = "small"       # rho <= r_i <= 1
COND_MONOTONE = "monotone"  # r_i <= r_{i+1}
COND_NONDEG = "nondeg"     # r_1 >= sqrt(rho) * r_{d-1}


# ---------------------------------------------------------------------------
# Radii
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Radii:
    """A (d-1)-tuple of cap radii plus thickness rho.

    ``admissible`` is True iff all three defining conditions hold:
    rho <= r_i <= 1, monotone r, and r_1 >= sqrt(rho) * r_{d-1}.
    ``violations`` lists the violated condition names in check order, so
    a rejected tuple carries its own report.
    """

    r: tuple
    rho: float
    d: int
    admissible: bool
    violations: tuple = ()
    relaxed: bool = False

    def __post_init__(self):
        if self.violations and not self.relaxed:
            raise RadiiValidationError(
                f"radii violate {self.violations[0]} and were not built "
                "with the relaxed constructor"
            )

    @property
    def widths_f(self) -> tuple:
        """Reciprocal widths rho / r_i of the F-side cap."""
        return tuple(self.rho / ri for ri in self.r)

    def scaled(self, c: float) -> "Radii":
        """Radii (c * r; c * rho); used by inclusion checks and partitions."""
        return relaxed_radii([c * ri for ri in self.r], c * self.rho, self.d)

    def split_index(self) -> int:
        """Largest k with r_k <= sqrt(rho), clipped to [0, d-1].

        k = 0 means all radii exceed sqrt(rho) (thick caps) and k = d-1
        means all radii are below it (thin caps).
        """
        root = np.sqrt(self.rho)
        k = 0
        for ri in self.r:
            if ri <= root:
                k += 1
        return k


def check_conditions(r, rho: float) -> list:
    """Names of the violated admissibility conditions, in check order."""
    bad = []
    if not all(rho <= ri <= 1.0 for ri in r):
        bad.append(COND_SMALL)
    if any(r[i] > r[i + 1] for i in range(len(r) - 1)):
        bad.append(COND_MONOTONE)
    if r and r[0] < np.sqrt(rho) * r[-1]:
        bad.append(COND_NONDEG)
    return bad


def _validate_entries(r, rho: float, d: int):
    if d < 2:
        raise RadiiValidationError(f"dimension must be >= 2, got {d}")
    r = tuple(float(ri) for ri in r)
    rho = float(rho)
    if len(r) != d - 1:
        raise RadiiValidationError(
            f"expected {d - 1} radii for d={d}, got {len(r)}"
        )
    for value in (*r, rho):
        if not np.isfinite(value) or value <= 0.0:
            raise RadiiValidationError(f"radii entries must be finite and positive, got {value}")
    return r, rho


def validate_radii(r, rho: float, d: int) -> Radii:
    """Classify a radius tuple; never raises on an inadmissible (but
    finite, positive, correctly shaped) tuple."""
    r, rho = _validate_entries(r, rho, d)
    bad = check_conditions(r, rho)
    return Radii(r, rho, d, admissible=not bad, violations=tuple(bad), relaxed=True)


def strict_radii(r, rho: float, d: int) -> Radii:
    """Admissible radii or RadiiValidationError."""
    rd = validate_radii(r, rho, d)
    if not rd.admissible:
        raise RadiiValidationError(f"inadmissible radii: violates {rd.violations[0]}")
    return Radii(rd.r, rd.rho, rd.d, admissible=True)


def relaxed_radii(r, rho: float, d: int) -> Radii:
    """Radii that may violate the admissibility conditions.

    Exists for degeneracy probes and paraboloid pairs; the violations are
    recorded on the object.
    """
    r, rho = _validate_entries(r, rho, d)
    bad = check_conditions(r, rho)
    return Radii(r, rho, d, admissible=not bad, violations=tuple(bad), relaxed=True)


def ball_radii(rho: float, d: int) -> Radii:
    """All radii equal to rho (the E-side cap is a ball of radius ~rho)."""
    return strict_radii([rho] * (d - 1), rho, d)


def knapp_radii(rho: float, d: int) -> Radii:
    """All radii equal to sqrt(rho) (the classical slab example)."""
    return strict_radii([np.sqrt(rho)] * (d - 1), rho, d)


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

_ORTHO_TOL = 1e-12
_DRIFT_TOL = 1e-10


@dataclass(frozen=True)
class Frame:
    """Rigid motion x -> R x + t with R orthogonal."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        drift = np.max(np.abs(R.T @ R - np.eye(R.shape[0])))
        if drift > _ORTHO_TOL:
            raise GeometryError(f"rotation is not orthogonal (drift {drift:.3e})")

    @property
    def d(self) -> int:
        return self.rotation.shape[0]

    @staticmethod
    def identity(d: int) -> "Frame":
        return Frame(np.eye(d), np.zeros(d))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.rotation.T + self.translation

    def inverse_apply(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return (pts - self.translation) @ self.rotation

    def compose(self, other: "Frame") -> "Frame":
        """Frame of x -> self(other(x)); re-orthonormalized on drift."""
        R = self.rotation @ other.rotation
        t = self.rotation @ other.translation + self.translation
        drift = np.max(np.abs(R.T @ R - np.eye(self.d)))
        if drift > _DRIFT_TOL:
            # closest orthogonal matrix, via SVD
            u, _, vt = np.linalg.svd(R)
            R = u @ vt
        return Frame(R, t)

    def inverse(self) -> "Frame":
        return Frame(self.rotation.T, -self.rotation.T @ self.translation)


def random_rotation(d: int, stream: Stream, index: int = 0) -> np.ndarray:
    """Haar-ish orthogonal matrix from a QR factorization of normals."""
    g = stream.normals(index, 1, d * d)[0].reshape(d, d)
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    return q


def random_frame(d: int, stream: Stream, index: int = 0, shift: float = 1.0) -> Frame:
    q = random_rotation(d, stream.derive("rot"), index)
    t = shift * (2.0 * stream.derive("shift").uniforms(index, 1, d)[0] - 1.0)
    return Frame(q, t)


def rotation_to_pole(direction: np.ndarray) -> np.ndarray:
    """Rotation in the plane span(direction, e_d) that maps ``direction``
    (a unit vector) to e_d and fixes the orthogonal complement."""
    w = np.asarray(direction, dtype=float)
    d = w.shape[0]
    w = w / np.linalg.norm(w)
    cos_t = w[-1]
    horiz = w.copy()
    horiz[-1] = 0.0
    sin_t = np.linalg.norm(horiz)
    if sin_t < 1e-15:
        if cos_t > 0:
            return np.eye(d)
        # antipodal: flip in the (e_1, e_d) plane
        R = np.eye(d)
        R[0, 0] = -1.0
        R[-1, -1] = -1.0
        return R
    v = horiz / sin_t
    u = np.zeros(d)
    u[-1] = 1.0
    R = (np.eye(d)
         + (cos_t - 1.0) * (np.outer(u, u) + np.outer(v, v))
         + sin_t * (np.outer(u, v) - np.outer(v, u)))
    return R


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

class Region:
    """Membership-testable subset of R^d with a finite bounding box."""

    kind = "Region"
    d: int

    def contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def contains_point(self, x) -> bool:
        return bool(self.contains(np.asarray(x, dtype=float)[None, :])[0])


def _as_points(pts: np.ndarray, d: int) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise GeometryError(f"expected points of shape (m, {d}), got {pts.shape}")
    return pts


@dataclass(frozen=True)
class SphereCapE(Region):
    """E-side spherical cap: |x_i| < r_i, dist(x + e_d, S^{d-1}) < rho, x_d > -1."""

    radii: Radii
    kind = "SphereE"

    @property
    def d(self) -> int:
        return self.radii.d

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        r = np.asarray(self.radii.r)
        ok = np.all(np.abs(pts[:, :-1]) < r, axis=1)
        shifted = pts.copy()
        shifted[:, -1] += 1.0
        dist = np.abs(np.linalg.norm(shifted, axis=1) - 1.0)
        return ok & (dist < self.radii.rho) & (pts[:, -1] > -1.0)

    def bounding_box(self):
        r = np.asarray(self.radii.r)
        rho = self.radii.rho
        lo = np.append(-r, 0.0)
        hi = np.append(r, rho)
        rr = float(np.sum(r ** 2))
        inner = (1.0 - rho) ** 2 - rr
        lo[-1] = np.sqrt(inner) - 1.0 if inner > 0.0 else -1.0
        return lo, hi


@dataclass(frozen=True)
class SphereCapF(Region):
    """F-side spherical cap: |y_i| < rho / r_i, dist(y, S^{d-1}) < rho, y_d < 0."""

    radii: Radii
    kind = "SphereF"

    @property
    def d(self) -> int:
        return self.radii.d

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        w = np.asarray(self.radii.widths_f)
        ok = np.all(np.abs(pts[:, :-1]) < w, axis=1)
        dist = np.abs(np.linalg.norm(pts, axis=1) - 1.0)
        return ok & (dist < self.radii.rho) & (pts[:, -1] < 0.0)

    def bounding_box(self):
        w = np.asarray(self.radii.widths_f)
        rho = self.radii.rho
        lo = np.append(-w, -(1.0 + rho))
        hi = np.append(w, 0.0)
        ww = float(np.sum(w ** 2))
        inner = (1.0 - rho) ** 2 - ww
        hi[-1] = -np.sqrt(inner) if inner > 0.0 else 0.0
        return lo, hi


@dataclass(frozen=True)
class ParabCapE(Region):
    """Paraboloid E-side cap around x0: |x_i - x0_i| < r_i and
    |x_d - (y0)_d - |x' - y0'|^2| < rho."""

    radii: Radii
    x0: np.ndarray
    y0: np.ndarray
    kind = "ParabE"

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "y0", np.asarray(self.y0, dtype=float))

    @property
    def d(self) -> int:
        return self.radii.d

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        r = np.asarray(self.radii.r)
        ok = np.all(np.abs(pts[:, :-1] - self.x0[:-1]) < r, axis=1)
        gap = pts[:, :-1] - self.y0[:-1]
        vert = pts[:, -1] - self.y0[-1] - np.sum(gap ** 2, axis=1)
        return ok & (np.abs(vert) < self.radii.rho)

    def bounding_box(self):
        r = np.asarray(self.radii.r)
        rho = self.radii.rho
        lo = np.empty(self.d)
        hi = np.empty(self.d)
        lo[:-1] = self.x0[:-1] - r
        hi[:-1] = self.x0[:-1] + r
        g = np.abs(self.x0[:-1] - self.y0[:-1])
        m2 = float(np.sum(np.maximum(0.0, g - r) ** 2))
        M2 = float(np.sum((g + r) ** 2))
        lo[-1] = self.y0[-1] + m2 - rho
        hi[-1] = self.y0[-1] + M2 + rho
        return lo, hi


@dataclass(frozen=True)
class ParabCapF(Region):
    """Paraboloid F-side cap around y0: |y_i - y0_i| < rho / r_i and
    |y_d - (x0)_d + |y' - x0'|^2| < rho."""

    radii: Radii
    x0: np.ndarray
    y0: np.ndarray
    kind = "ParabF"

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "y0", np.asarray(self.y0, dtype=float))

    @property
    def d(self) -> int:
        return self.radii.d

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        w = np.asarray(self.radii.widths_f)
        ok = np.all(np.abs(pts[:, :-1] - self.y0[:-1]) < w, axis=1)
        gap = pts[:, :-1] - self.x0[:-1]
        vert = pts[:, -1] - self.x0[-1] + np.sum(gap ** 2, axis=1)
        return ok & (np.abs(vert) < self.radii.rho)

    def bounding_box(self):
        w = np.asarray(self.radii.widths_f)
        rho = self.radii.rho
        lo = np.empty(self.d)
        hi = np.empty(self.d)
        lo[:-1] = self.y0[:-1] - w
        hi[:-1] = self.y0[:-1] + w
        g = np.abs(self.y0[:-1] - self.x0[:-1])
        m2 = float(np.sum(np.maximum(0.0, g - w) ** 2))
        M2 = float(np.sum((g + w) ** 2))
        lo[-1] = self.x0[-1] - M2 - rho
        hi[-1] = self.x0[-1] - m2 + rho
        return lo, hi


@dataclass(frozen=True)
class Box(Region):
    """Axis-aligned closed box."""

    lo: np.ndarray
    hi: np.ndarray
    kind = "Box"

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise GeometryError("box corners must be 1-d arrays of equal length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self) -> int:
        return self.lo.shape[0]

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(frozen=True)
class FramedRegion(Region):
    """Image of a base region under a rigid frame."""

    base: Region
    frame: Frame
    kind = "Framed"

    @property
    def d(self) -> int:
        return self.base.d

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        return self.base.contains(self.frame.inverse_apply(pts))

    def bounding_box(self):
        lo, hi = self.base.bounding_box()
        corners = _box_corners(lo, hi)
        moved = self.frame.apply(corners)
        return moved.min(axis=0), moved.max(axis=0)


@dataclass(frozen=True)
class IntersectRegion(Region):
    """Intersection of two regions; bounding box is the box intersection."""

    a: Region
    b: Region
    kind = "Intersect"

    @property
    def d(self) -> int:
        return self.a.d

    def contains(self, pts):
        pts = _as_points(pts, self.d)
        return self.a.contains(pts) & self.b.contains(pts)

    def bounding_box(self):
        lo_a, hi_a = self.a.bounding_box()
        lo_b, hi_b = self.b.bounding_box()
        lo = np.maximum(lo_a, lo_b)
        hi = np.maximum(np.minimum(hi_a, hi_b), lo)  # collapse empty overlap
        return lo, hi


def _box_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    d = lo.shape[0]
    corners = np.empty((1 << d, d))
    for j in range(1 << d):
        for i in range(d):
            corners[j, i] = hi[i] if (j >> i) & 1 else lo[i]
    return corners


def box_volume(lo: np.ndarray, hi: np.ndarray) -> float:
    sides = np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
    if np.any(sides <= 0.0):
        return 0.0
    return float(np.prod(sides))


# ---------------------------------------------------------------------------
# Pair constructors
# ---------------------------------------------------------------------------

def make_sphere_pair(rd: Radii, frame: Frame | None = None):
    """The framed dual cap pair (E, F) for a radius tuple."""
    e = SphereCapE(rd)
    f = SphereCapF(rd)
    if frame is None:
        return e, f
    return FramedRegion(e, frame), FramedRegion(f, frame)


_PARAB_POINT_TOL = 1e-9


def on_paraboloid(p: np.ndarray, tol: float = _PARAB_POINT_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(abs(p[-1] - np.sum(p[:-1] ** 2)) <= tol)


def make_parab_pair(rd: Radii, x0=None, y0=None):
    """Paraboloid cap pair anchored at x0, y0 with x0 - y0 on the surface.

    Any positive radii are accepted here; admissibility is a sphere-only
    notion.
    """
    d = rd.d
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    y0 = np.zeros(d) if y0 is None else np.asarray(y0, dtype=float)
    if not on_paraboloid(x0 - y0):
        raise GeometryError("x0 - y0 must lie on the paraboloid")
    return ParabCapE(rd, x0, y0), ParabCapF(rd, x0, y0)


def special_pair(kind: str, rho: float, d: int, frame: Frame | None = None):
    """The ball (r_i = rho) or slab (r_i = sqrt(rho)) sphere pair."""
    if not 0.0 < rho < 1.0:
        raise GeometryError(f"rho must be in (0, 1), got {rho}")
    if kind == "ball":
        rd = ball_radii(rho, d)
    elif kind == "knapp":
        rd = knapp_radii(rho, d)
    else:
        raise GeometryError(f"unknown special pair kind {kind!r}")
    return make_sphere_pair(rd, frame)


# ---------------------------------------------------------------------------
# Measure estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int


def sample_box(lo, hi, stream: Stream, start: int, count: int) -> np.ndarray:
    u = stream.uniforms(start, count, lo.shape[0])
    return lo + u * (hi - lo)


def measure(region: Region, n: int, seed: int, workers: int = 1) -> MeasureEstimate:
    """Hit-or-miss Lebesgue measure over the region's bounding box.

    Unbiased; deterministic for a fixed seed at any worker count because the
    hit count is an integer accumulated per index chunk.
    """
    if n < 1:
        raise GeometryError("n must be >= 1")
    lo, hi = region.bounding_box()
    vol = box_volume(lo, hi)
    if vol == 0.0:
        return MeasureEstimate(0.0, 0.0, n, seed)
    stream = Stream(seed, "measure")

    def per_chunk(start, count):
        pts = sample_box(lo, hi, stream, start, count)
        return (int(np.count_nonzero(region.contains(pts))),)

    (hits,) = chunked_sum(n, per_chunk, workers=workers)
    p = hits / n
    return MeasureEstimate(vol * p, vol * float(np.sqrt(p * (1.0 - p) / n)), n, seed)


def sample_members(region: Region, count: int, stream: Stream,
                   max_draws: int = 10 ** 6) -> np.ndarray:
    """Rejection-sample ``count`` member points from the bounding box."""
    lo, hi = region.bounding_box()
    if box_volume(lo, hi) == 0.0:
        raise SamplingError("region has an empty bounding box")
    out = []
    got = 0
    start = 0
    while got < count:
        batch = min(1 << 14, max_draws - start)
        if batch <= 0:
            raise SamplingError(
                f"only {got} of {count} member points in {max_draws} box "
                f"draws; region may be too thin"
            )
        pts = sample_box(lo, hi, stream, start, batch)
        hit = pts[region.contains(pts)]
        out.append(hit)
        got += hit.shape[0]
        start += batch
    return np.concatenate(out)[:count]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _fmt_vec(v) -> str:
    return " ".join(_fmt(x) for x in np.asarray(v, dtype=float).ravel())


def _flatten(region: Region, prefix: str, lines: list):
    lines.append(f"{prefix}kind = {region.kind}")
    if isinstance(region, (SphereCapE, SphereCapF)):
        rd = region.radii
        lines.append(f"{prefix}d = {rd.d}")
        lines.append(f"{prefix}r = {_fmt_vec(rd.r)}")
        lines.append(f"{prefix}rho = {_fmt(rd.rho)}")
    elif isinstance(region, (ParabCapE, ParabCapF)):
        rd = region.radii
        lines.append(f"{prefix}d = {rd.d}")
        lines.append(f"{prefix}r = {_fmt_vec(rd.r)}")
        lines.append(f"{prefix}rho = {_fmt(rd.rho)}")
        lines.append(f"{prefix}x0 = {_fmt_vec(region.x0)}")
        lines.append(f"{prefix}y0 = {_fmt_vec(region.y0)}")
    elif isinstance(region, Box):
        lines.append(f"{prefix}d = {region.d}")
        lines.append(f"{prefix}lo = {_fmt_vec(region.lo)}")
        lines.append(f"{prefix}hi = {_fmt_vec(region.hi)}")
    elif isinstance(region, FramedRegion):
        lines.append(f"{prefix}d = {region.d}")
        lines.append(f"{prefix}frame.rotation = {_fmt_vec(region.frame.rotation)}")
        lines.append(f"{prefix}frame.translation = {_fmt_vec(region.frame.translation)}")
        _flatten(region.base, prefix + "base.", lines)
    elif isinstance(region, IntersectRegion):
        lines.append(f"{prefix}d = {region.d}")
        _flatten(region.a, prefix + "a.", lines)
        _flatten(region.b, prefix + "b.", lines)
    else:
        raise GeometryError(f"cannot serialize region kind {region.kind!r}")


def region_to_record(region: Region) -> str:
    lines: list = []
    _flatten(region, "", lines)
    return "\n".join(lines) + "\n"


def _parse_record(text: str) -> dict:
    table = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        table[key.strip()] = value.strip()
    return table


def _build(table: dict, prefix: str) -> Region:
    kind = table[prefix + "kind"]
    if kind in ("SphereE", "SphereF"):
        d = int(table[prefix + "d"])
        r = [float(x) for x in table[prefix + "r"].split()]
        rho = float(table[prefix + "rho"])
        rd = relaxed_radii(r, rho, d)
        return SphereCapE(rd) if kind == "SphereE" else SphereCapF(rd)
    if kind in ("ParabE", "ParabF"):
        d = int(table[prefix + "d"])
        r = [float(x) for x in table[prefix + "r"].split()]
        rho = float(table[prefix + "rho"])
        rd = relaxed_radii(r, rho, d)
        x0 = np.array([float(x) for x in table[prefix + "x0"].split()])
        y0 = np.array([float(x) for x in table[prefix + "y0"].split()])
        cls = ParabCapE if kind == "ParabE" else ParabCapF
        return cls(rd, x0, y0)
    if kind == "Box":
        lo = np.array([float(x) for x in table[prefix + "lo"].split()])
        hi = np.array([float(x) for x in table[prefix + "hi"].split()])
        return Box(lo, hi)
    if kind == "Framed":
        d = int(table[prefix + "d"])
        R = np.array([float(x) for x in table[prefix + "frame.rotation"].split()])
        t = np.array([float(x) for x in table[prefix + "frame.translation"].split()])
        base = _build(table, prefix + "base.")
        return FramedRegion(base, Frame(R.reshape(d, d), t))
    if kind == "Intersect":
        return IntersectRegion(_build(table, prefix + "a."), _build(table, prefix + "b."))
    raise GeometryError(f"unknown region kind {kind!r} in record")


def region_from_record(text: str) -> Region:
    return _build(_parse_record(text), "")
