"""Experiment drivers.

Five families of experiments are wired here:

  * ratio sweeps over radius families (sphere or paraboloid), producing one
    reproducible record per (radii, rho);
  * direct verification of the box-to-cap inclusion behind the lower bound
    T(E, F) >= c rho^d, together with the Taylor-remainder estimate that
    the inclusion rests on;
  * sampled refinement towers: a base point x0 in E plus nested parameter
    sets whose alternating sphere sums land in F and E in turn, feeding the
    inflation (determinant) and slicing (fiber length) lower bounds on |E|;
  * slice sets and the degeneracy probe: radii breaking the r_1 >=
    sqrt(rho) r_{d-1} condition produce near-disjoint slices and a ratio
    that decays on the sphere but not on the paraboloid;
  * the recovery pipeline: from any pair with positive form, reconstruct a
    framed cap pair comparable to it (tower, balanced ellipsoid, radii
    read-off, framed pair, intersected form).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import convex_approx as cvx
from . import geometry
from . import maps
from .geometry import (Frame, FramedRegion, IntersectRegion, Radii, Region,
                       SphereCapE, SphereCapF, measure, relaxed_radii,
                       rotation_to_pole, sample_members)
from .rng import Stream
from .surface_ops import (Estimate, QexReport, _auto_cap_geometry,
                          bilinear_form, cap_sample_centers, qex_report,
                          sphere_sample, subseed, t_indicator_at)


class LabError(RuntimeError):
    pass


class TowerError(LabError):
    """Tower construction failed; the message carries the diagnostics."""


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    d: int
    surface: str
    r: tuple
    rho: float
    admissible: bool
    meas_e: float
    meas_f: float
    t: float
    t_se: float
    ratio: float
    alpha: float
    beta: float
    n: int
    seed: int
    error: str = ""


def _record_from_report(rd: Radii, surface: str, rep: QexReport, n: int,
                        seed: int) -> SweepRecord:
    return SweepRecord(rd.d, surface, rd.r, rd.rho, rd.admissible,
                       rep.meas_e.value, rep.meas_f.value, rep.t_value.value,
                       rep.t_value.std_error, rep.ratio, rep.alpha, rep.beta,
                       n, seed)


def sweep(d: int, rho_list, radii_generator, n: int, seed: int,
          surface: str = "sphere", workers: int = 1) -> list:
    """One record per (radii, rho); estimator failures are recorded per row.

    ``radii_generator(rho)`` returns a Radii or a list of them.
    """
    if surface not in ("sphere", "parab"):
        raise LabError(f"unknown surface {surface!r}")
    records = []
    for idx_rho, rho in enumerate(rho_list):
        rds = radii_generator(rho)
        if isinstance(rds, Radii):
            rds = [rds]
        for idx_r, rd in enumerate(rds):
            rec_seed = subseed(seed, f"sweep:{idx_rho}:{idx_r}")
            try:
                if surface == "sphere":
                    E, F = geometry.make_sphere_pair(rd)
                else:
                    E, F = geometry.make_parab_pair(rd)
                rep = qex_report(E, F, n, rec_seed, workers=workers)
                records.append(_record_from_report(rd, surface, rep, n, rec_seed))
            except (geometry.GeometryError, LabError, ValueError) as exc:
                records.append(SweepRecord(d, surface, rd.r, rd.rho,
                                           rd.admissible, math.nan, math.nan,
                                           math.nan, math.nan, math.nan,
                                           math.nan, math.nan, n, rec_seed,
                                           error=str(exc)))
    return records


def ball_family(d: int):
    return lambda rho: geometry.ball_radii(rho, d)


def knapp_family(d: int):
    return lambda rho: geometry.knapp_radii(rho, d)


def degenerate_family(d: int, a: float, b: float):
    """r_i = rho^{e_i}, exponents sliding from a down to b; a - b > 0 breaks
    the nondegeneracy condition as rho shrinks."""
    def gen(rho):
        exps = [a] if d == 2 else list(np.linspace(a, b, d - 1))
        return relaxed_radii([rho ** e for e in exps], rho, d)
    return gen


# ---------------------------------------------------------------------------
# Inclusion and Taylor checks
# ---------------------------------------------------------------------------

_INCLUSION_RHO_MAX = 2.0 ** -6
_INCLUSION_R_MAX = 2.0 ** -3


def verify_inclusion(rd: Radii, c: float, n: int, seed: int,
                     max_draws: int = 10 ** 6) -> float:
    """Fraction of sampled (x, s) with x - (s, sqrt(1-|s|^2)) in the F cap.

    x is drawn from the shrunken cap E(c r; c rho) and s from the box
    |s_i - x_i| < c rho / r_i.  For admissible radii and small c the
    fraction is exactly 1; this inclusion is what pushes the incidence form
    above rho^d.
    """
    if not rd.admissible:
        raise LabError("inclusion check needs admissible radii")
    if rd.rho > _INCLUSION_RHO_MAX or max(rd.r) > _INCLUSION_R_MAX:
        raise LabError("inclusion check needs rho <= 2^-6 and r_i <= 2^-3")
    if any(rd.rho > ri / 8.0 for ri in rd.r):
        raise LabError("inclusion check needs rho <= r_i / 8")
    small = rd.scaled(c)
    e_small = SphereCapE(small)
    f_full = SphereCapF(rd)
    stream = Stream(seed, "inclusion")
    xs = sample_members(e_small, n, stream.derive("x"), max_draws=max_draws)
    half = c * rd.rho / np.asarray(rd.r)
    u = stream.derive("s").uniforms(0, n, rd.d - 1)
    s = xs[:, :-1] + (2.0 * u - 1.0) * half
    height = np.sqrt(np.maximum(0.0, 1.0 - np.sum(s ** 2, axis=1)))
    y = np.column_stack([xs[:, :-1] - s, xs[:, -1] - height])
    return float(np.mean(f_full.contains(y)))


@dataclass(frozen=True)
class TaylorCheck:
    max_over_rho: float
    k: int
    thin_branch: bool   # r_{d-1} <= rho^{1/4}; otherwise r_1 >= rho^{3/4}
    n: int
    seed: int


def taylor_reduction_check(rd: Radii, n: int, seed: int) -> TaylorCheck:
    """Max of |g(y) + g(t) - g(joint) - 1| / rho over the proof ranges.

    t runs over the thin-radius block (|t_j| < rho / r_j for radii below
    sqrt(rho)) and y over the thick block (|y_i| < r_i above it).  The
    residual is O(rho) exactly when the nondegeneracy condition holds.
    """
    k = rd.split_index()
    t_half = np.array([rd.rho / rd.r[j] for j in range(k)])
    y_half = np.array([rd.r[i] for i in range(k, rd.d - 1)])
    stream = Stream(seed, "taylor")
    u = stream.uniforms(0, n, rd.d - 1)
    t = (2.0 * u[:, :k] - 1.0) * t_half
    y = (2.0 * u[:, k:] - 1.0) * y_half
    t2 = np.sum(t ** 2, axis=1)
    y2 = np.sum(y ** 2, axis=1)
    joint = np.clip(1.0 - y2 - t2, 0.0, None)
    lhs = np.abs(np.sqrt(1.0 - y2) + np.sqrt(1.0 - t2) - np.sqrt(joint) - 1.0)
    thin = rd.r[-1] <= rd.rho ** 0.25
    return TaylorCheck(float(np.max(lhs)) / rd.rho, k, thin, n, seed)


# ---------------------------------------------------------------------------
# Towers
# ---------------------------------------------------------------------------

@dataclass
class TowerLevel:
    parents: np.ndarray       # (m,) index into the previous level's samples
    samples: np.ndarray       # (m, d-1) accepted graph coordinates
    world: np.ndarray         # (m, d) chain point after this level
    fiber_of: np.ndarray      # (p,) previous-level rows that got a fiber
    densities: np.ndarray     # (p,) Lebesgue fiber density estimates
    attempts: int


@dataclass
class ChainTower:
    """Sampled refinement tower over a pair (E, F).

    Graph coordinates live in a rotated frame; the world increment of level
    j is (-1)^j R^T (t, sqrt(1 - |t|^2)).  Odd levels land in F, even ones
    in E, starting from a base point x0 in E.
    """

    E: Region
    F: Region
    x0: np.ndarray
    rotation: np.ndarray
    levels: list
    meas_e: geometry.MeasureEstimate
    meas_f: geometry.MeasureEstimate
    t_est: Estimate
    alpha_hat: float
    beta_hat: float
    eps_hat: float
    seed: int

    @property
    def d(self) -> int:
        return self.x0.shape[0]

    @property
    def omega1(self) -> np.ndarray:
        return self.levels[0].samples

    @property
    def omega1_density(self) -> float:
        return float(self.levels[0].densities[0])

    def increments(self, coords: np.ndarray, level: int) -> np.ndarray:
        coords = np.atleast_2d(coords)
        h = np.sqrt(np.maximum(0.0, 1.0 - np.sum(coords ** 2, axis=1)))
        w = np.column_stack([coords, h]) @ self.rotation
        return -w if level % 2 == 1 else w

    def chain_points(self, upto: int) -> np.ndarray:
        """Recompute x0 + alternating increments through level ``upto``."""
        level = self.levels[upto - 1]
        pts = np.repeat(self.x0[None, :], level.samples.shape[0], axis=0)
        idx = np.arange(level.samples.shape[0])
        for back in range(upto, 0, -1):
            lvl = self.levels[back - 1]
            pts = pts + self.increments(lvl.samples[idx], back)
            idx = lvl.parents[idx]
        return pts

    def verify_membership(self) -> list:
        """Independently re-evaluate alternating membership per level."""
        out = []
        for j in range(1, len(self.levels) + 1):
            if self.levels[j - 1].samples.shape[0] == 0:
                out.append(float("nan"))
                continue
            target = self.F if j % 2 == 1 else self.E
            out.append(float(np.mean(target.contains(self.chain_points(j)))))
        return out

    def fiber_arrays(self, level: int = 2):
        """(s-index array, list of sample blocks) for the given level."""
        if len(self.levels) < level:
            empty = TowerLevel(np.zeros(0, dtype=int),
                               np.zeros((0, self.d - 1)),
                               np.zeros((0, self.d)),
                               np.zeros(0, dtype=int), np.zeros(0), 0)
            return empty, {}
        lvl = self.levels[level - 1]
        blocks = {}
        for row, parent in enumerate(lvl.parents):
            blocks.setdefault(int(parent), []).append(row)
        return lvl, blocks


def _rotated_box(rotation: np.ndarray, region: Region):
    lo, hi = region.bounding_box()
    center = rotation @ (0.5 * (lo + hi))
    half = np.abs(rotation) @ (0.5 * (hi - lo))
    return center, half


def build_tower(E: Region, F: Region, seed: int, depth: int = 3,
                n_scan: int = 1 << 18, m_candidates: int = 24,
                n_level: int = 1 << 13, fiber_count: int = 48,
                s_clip: float = 0.85) -> ChainTower:
    """Greedy sampled tower.

    The base point is the best of ``m_candidates`` incidence hits (largest
    empirical average of the indicator of F over the sphere), the frame
    comes from the mean incidence direction, and each level is rejection
    sampled inside a box guaranteed to contain its fiber.
    """
    d = E.d
    stream = Stream(seed, "tower")
    meas_e = measure(E, n_scan, subseed(seed, "towerE"))
    meas_f = measure(F, n_scan, subseed(seed, "towerF"))
    t_est = bilinear_form(E, F, n_scan, subseed(seed, "towerT"))
    if t_est.value <= 0.0:
        raise TowerError("no incidences found; T(E, F) estimate is zero")
    alpha_hat = t_est.value / meas_e.value if meas_e.value > 0 else math.nan
    beta_hat = t_est.value / meas_f.value if meas_f.value > 0 else math.nan
    p = d / (d + 1.0)
    eps_hat = t_est.value / (meas_e.value ** p * meas_f.value ** p)

    # incidence scan: collect hits (y in F, y - w in E)
    lo_f, hi_f = F.bounding_box()
    c_e, aperture = _auto_cap_geometry(E)
    use_cap = aperture < 2.0 and d <= 3
    y_stream = stream.derive("scan_y")
    w_stream = stream.derive("scan_w")
    hits_y, hits_w, got = [], [], 0
    start, batch = 0, 1 << 14
    while got < 2048 and start < 64 * batch:
        y = geometry.sample_box(lo_f, hi_f, y_stream, start, batch)
        if use_cap:
            v = y - c_e[None, :]
            norms = np.linalg.norm(v, axis=1, keepdims=True)
            u = np.divide(v, norms, out=np.zeros_like(v), where=norms > 1e-300)
            u[norms[:, 0] <= 1e-300, -1] = 1.0
            w = cap_sample_centers(d, u, aperture, w_stream, start, batch)
        else:
            w = sphere_sample(d, w_stream, start, batch)
        hit = F.contains(y) & E.contains(y - w)
        hits_y.append(y[hit])
        hits_w.append(w[hit])
        got += int(np.count_nonzero(hit))
        start += batch
    if got == 0:
        raise TowerError(
            f"no incidence hits in {start} scan draws although the T "
            f"estimate is {t_est.value:.3e}"
        )
    ws = np.concatenate(hits_w)
    xs = np.concatenate(hits_y) - ws

    # base point: incidence hit with the largest local density
    cand = xs[: min(m_candidates, xs.shape[0])]
    vals = [t_indicator_at(x, F, mode="mc", n=1 << 11,
                           seed=subseed(seed, f"cand{i}"), cap="auto").value
            for i, x in enumerate(cand)]
    x0 = cand[int(np.argmax(vals))]

    # level-1 increments are x0 - R^T (s, g(s)); the scan's w points from E
    # to F, so -w_mean is the direction that must map to the pole
    w_mean = np.mean(ws, axis=0)
    norm = float(np.linalg.norm(w_mean))
    if norm < 1e-12:
        raise TowerError("incidence directions average out; no stable frame")
    R = rotation_to_pole(-w_mean / norm)

    def targets(level):
        return F if level % 2 == 1 else E

    def incr(coords, level):
        h = np.sqrt(np.maximum(0.0, 1.0 - np.sum(coords ** 2, axis=1)))
        w = np.column_stack([coords, h]) @ R
        return -w if level % 2 == 1 else w

    def fiber_box(base_world, level):
        """Box in graph coordinates containing the level's whole fiber."""
        tgt = targets(level)
        c_t, h_t = _rotated_box(R, tgt)
        sign = -1.0 if level % 2 == 1 else 1.0
        ctr = sign * (c_t - R @ base_world)
        hw = 1.05 * h_t + 1e-4
        lo = np.clip(ctr[:-1] - hw[:-1], -s_clip, s_clip)
        hi = np.clip(ctr[:-1] + hw[:-1], -s_clip, s_clip)
        return lo, hi

    def sample_level(level, parent_world, parent_rows, n_draw):
        parents, samples, world, fiber_of, dens = [], [], [], [], []
        for pi, row in enumerate(parent_rows):
            lo, hi = fiber_box(parent_world[pi], level)
            if np.any(hi <= lo):
                fiber_of.append(row)
                dens.append(0.0)
                continue
            ss = stream.derive(f"lvl{level}p{row}")
            u = ss.uniforms(0, n_draw, d - 1)
            t = lo + u * (hi - lo)
            inside = np.sum(t ** 2, axis=1) < 0.95 ** 2
            pts = parent_world[pi][None, :] + incr(t, level)
            ok = inside & targets(level).contains(pts)
            acc = t[ok]
            samples.append(acc)
            world.append(pts[ok])
            parents.append(np.full(acc.shape[0], row, dtype=int))
            fiber_of.append(row)
            vol = float(np.prod(hi - lo))
            dens.append(vol * float(np.count_nonzero(ok)) / n_draw)
        if samples:
            samples = np.concatenate(samples)
            world = np.concatenate(world)
            parents = np.concatenate(parents)
        else:
            samples = np.zeros((0, d - 1))
            world = np.zeros((0, d))
            parents = np.zeros(0, dtype=int)
        return TowerLevel(parents, samples, world, np.asarray(fiber_of),
                          np.asarray(dens), n_draw)

    levels = [sample_level(1, x0[None, :], np.zeros(1, dtype=int), n_level)]
    if levels[0].samples.shape[0] == 0:
        raise TowerError("level-1 sampling accepted no directions")
    for level in range(2, depth + 1):
        prev = levels[-1]
        count = prev.samples.shape[0]
        if count == 0:
            break
        take = min(fiber_count, count)
        sel = np.unique(np.linspace(0, count - 1, take).astype(int))
        levels.append(sample_level(level, prev.world[sel], sel,
                                   max(n_level // 4, 1 << 10)))
    return ChainTower(E, F, x0, R, levels, meas_e, meas_f, t_est,
                      alpha_hat, beta_hat, eps_hat, seed)


# ---------------------------------------------------------------------------
# Inflation, containment, slicing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InflationResult:
    det_integral: float
    det_integral_se: float
    alpha_beta_d: float
    meas_e_power: float
    upper_budget: float   # C eps^{-(d+1)} beta^d alpha
    lower_ok: bool        # measE^{d-1} >= c * det integral
    chain_ok: bool        # det integral >= c' * alpha beta^d
    upper_ok: bool        # measE^{d-1} <= C eps^{-(d+1)} beta^d alpha
    vacuous: bool


def inflation_lower_bound_check(tower: ChainTower, n: int, seed: int,
                                c_lower: float, c_alpha_beta: float,
                                c_upper: float) -> InflationResult:
    """Monte Carlo determinant integral over the tower's (level 1, level 2).

    Estimates the integral over s in level 1 and (d-1)-tuples from the
    fiber of s of |det of the gnomonic differences|, then checks the chain
    measE^{d-1} >= c * integral >= c'' * alpha beta^d and the upper budget
    from near-extremality.
    """
    d = tower.d
    lvl2, blocks = tower.fiber_arrays(2)
    s_rows = [r for r in blocks if len(blocks[r]) >= 1]
    dens_by_row = {int(r): float(dv) for r, dv in
                   zip(lvl2.fiber_of, lvl2.densities)}
    omega1 = tower.omega1
    vac = len(s_rows) == 0
    meas_e_pow = tower.meas_e.value ** (d - 1)
    ab = tower.alpha_hat * tower.beta_hat ** d
    budget = c_upper * tower.eps_hat ** (-(d + 1)) * tower.beta_hat ** d * tower.alpha_hat
    if vac:
        return InflationResult(0.0, 0.0, ab, meas_e_pow, budget,
                               True, False, meas_e_pow <= budget, True)
    stream = Stream(seed, "inflation")
    pick_s = stream.derive("s").integers(0, n, 1, len(s_rows))[:, 0]
    pick_t = stream.derive("t")
    vals = np.empty(n)
    for i in range(n):
        row = s_rows[pick_s[i]]
        fiber_rows = blocks[row]
        idx = pick_t.integers(i, 1, d - 1, len(fiber_rows))[0]
        ts = [lvl2.samples[fiber_rows[j]] for j in idx]
        s = omega1[row]
        try:
            det = abs(maps.inflation_det(s, ts))
        except maps.DomainError:
            det = 0.0
        vals[i] = dens_by_row[row] ** (d - 1) * det
    mean = float(np.mean(vals))
    se = float(np.std(vals) / math.sqrt(n))
    integral = tower.omega1_density * mean
    integral_se = tower.omega1_density * se
    single_width = all(len(blocks[r]) < d - 1 or
                       len({tuple(lvl2.samples[j]) for j in blocks[r]}) < 2
                       for r in s_rows) if d > 2 else False
    vacuous = integral == 0.0 and single_width
    return InflationResult(
        integral, integral_se, ab, meas_e_pow, budget,
        meas_e_pow >= c_lower * integral,
        integral >= c_alpha_beta * ab,
        meas_e_pow <= budget,
        vacuous,
    )


@dataclass(frozen=True)
class ContainmentResult:
    body: cvx.EllipsoidBody
    tau: np.ndarray
    cloud: cvx.PointCloud
    vol_ratio_to_alpha: float
    degenerate: bool


def ellipsoid_containment(tower: ChainTower, eta: float) -> ContainmentResult:
    """Balanced ellipsoid around the gnomonic image of level 1.

    tau is the pullback of the empirical centroid, so the image cloud is
    centered; the fitted volume is reported relative to alpha.
    """
    omega1 = tower.omega1
    if omega1.shape[0] < 2:
        body = cvx.EllipsoidBody(1e-12 * np.eye(tower.d - 1))
        return ContainmentResult(body, np.zeros(tower.d - 1),
                                 cvx.PointCloud(np.zeros((1, tower.d - 1))),
                                 float("nan"), True)
    images = np.vstack([maps.gnomonic(s) for s in omega1])
    tau = maps.gnomonic_inverse(np.mean(images, axis=0))
    centered = images - maps.gnomonic(tau)[None, :]
    weight = tower.omega1_density / omega1.shape[0]
    cloud = cvx.PointCloud(centered, weight=weight)
    body = cvx.stopping_time_refine(cloud, eta)
    ratio = body.volume / tower.alpha_hat if tower.alpha_hat > 0 else float("nan")
    return ContainmentResult(body, tau, cloud, ratio, False)


@dataclass(frozen=True)
class SlicingResult:
    estimate: float
    estimate_se: float
    meas_e: float
    passed: bool
    vacuous: bool


def slicing_lower_bound_check(tower: ChainTower, body: cvx.EllipsoidBody,
                              tau: np.ndarray, n: int, seed: int,
                              c_lower: float) -> SlicingResult:
    """|det A|^{-1} integral over level-2 pairs of |A (DF_tau(s))^{-1} F_s(t)|.

    The integral is a fiber-weighted Monte Carlo over the stored tower; the
    check passes when measE covers c_lower times the estimate.
    """
    d = tower.d
    lvl2, blocks = tower.fiber_arrays(2)
    s_rows = [r for r in blocks if len(blocks[r]) >= 1]
    if not s_rows:
        return SlicingResult(0.0, 0.0, tower.meas_e.value, True, True)
    dens_by_row = {int(r): float(dv) for r, dv in
                   zip(lvl2.fiber_of, lvl2.densities)}
    A = body.shape
    det_a = abs(float(np.linalg.det(A)))
    if det_a <= 0.0:
        return SlicingResult(0.0, 0.0, tower.meas_e.value, True, True)
    stream = Stream(seed, "slicing")
    pick_s = stream.derive("s").integers(0, n, 1, len(s_rows))[:, 0]
    pick_t = stream.derive("t")
    omega1 = tower.omega1
    vals = np.empty(n)
    for i in range(n):
        row = s_rows[pick_s[i]]
        fiber_rows = blocks[row]
        j = int(pick_t.integers(i, 1, 1, len(fiber_rows))[0, 0])
        s = omega1[row]
        t = lvl2.samples[fiber_rows[j]]
        try:
            df = maps.f_map_jacobian(tau, s)
            v = A @ np.linalg.solve(df, maps.f_map(s, t))
            vals[i] = dens_by_row[row] * float(np.linalg.norm(v))
        except maps.DomainError:
            vals[i] = 0.0
    mean = float(np.mean(vals))
    se = float(np.std(vals) / math.sqrt(n))
    estimate = tower.omega1_density * mean / det_a
    estimate_se = tower.omega1_density * se / det_a
    passed = tower.meas_e.value >= c_lower * estimate
    return SlicingResult(estimate, estimate_se, tower.meas_e.value, passed, False)


def rho_scale(alpha: float, beta: float, d: int, eps_hat: float,
              coeff: float = 1.0, eps_power: float = 0.0) -> float:
    """The thickness scale coeff * eps^{-eps_power} * (alpha beta)^{1/(d-1)}."""
    if alpha <= 0 or beta <= 0:
        raise LabError("rho scale needs positive alpha and beta")
    return coeff * eps_hat ** (-eps_power) * (alpha * beta) ** (1.0 / (d - 1))


# ---------------------------------------------------------------------------
# Slice sets and the degeneracy probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceSpec:
    """A slice of the E-side difference set at frozen trailing coordinates.

    s_tilde freezes the graph coordinates s_2 .. s_{d-1}; k is the split
    index with r_k <= sqrt(rho) <= r_{k+1}.  Membership of x combines an
    upper and a floor bound on |x_i| for i <= k, an affine pinning of the
    middle coordinates, and a vertical pinning at scale rho.
    """

    rd: Radii
    s_tilde: np.ndarray
    k: int

    @staticmethod
    def make(rd: Radii, s_tilde) -> "SliceSpec":
        root = math.sqrt(rd.rho)
        k = min(rd.d - 2, rd.split_index())
        if not (1 <= k <= rd.d - 2 and rd.r[k - 1] <= root <= rd.r[k]):
            raise LabError(
                f"slice sets need a split r_k <= sqrt(rho) <= r_k+1; "
                f"got r={rd.r}, rho={rd.rho}"
            )
        s_tilde = np.asarray(s_tilde, dtype=float)
        if s_tilde.shape != (rd.d - 2,):
            raise LabError(f"s_tilde must have length {rd.d - 2}")
        return SliceSpec(rd, s_tilde, k)

    def s_trailing(self) -> np.ndarray:
        """s_{k+1} .. s_{d-1} (the frozen block beyond the split)."""
        return self.s_tilde[self.k - 1:]


def slice_membership(x, spec: SliceSpec, k1: float, k2: float, k3: float,
                     floor: float) -> np.ndarray:
    """Vectorized membership of points in the slice set.

    Groups, with w_i = rho / r_i:
      (a) floor * w_i < |x_i| <= k1 * w_i for i <= k;
      (b) |x_i - s_i (sqrt(1 - |x_I|^2) - 1)| <= k2 * w_i for k < i < d;
      (c) |x_d - sqrt(1 - |s_II|^2)(sqrt(1 - |x_I|^2) - 1)| <= k3 * rho.
    None of the conditions involves s_1, which is the point: the slice only
    remembers the frozen trailing block.
    """
    rd, k = spec.rd, spec.k
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    w = rd.rho / np.asarray(rd.r)
    ok = np.ones(pts.shape[0], dtype=bool)
    x_i = np.abs(pts[:, :k])
    ok &= np.all(x_i <= k1 * w[:k], axis=1)
    ok &= np.all(x_i > floor * w[:k], axis=1)
    dip = np.sqrt(np.clip(1.0 - np.sum(pts[:, :k] ** 2, axis=1), 0.0, None)) - 1.0
    for i in range(k, rd.d - 1):
        s_i = spec.s_tilde[i - 1]
        ok &= np.abs(pts[:, i] - s_i * dip) <= k2 * w[i]
    s_ii = spec.s_trailing()
    height = math.sqrt(max(0.0, 1.0 - float(np.sum(s_ii ** 2))))
    ok &= np.abs(pts[:, -1] - height * dip) <= k3 * rd.rho
    return ok


def slice_sample(spec: SliceSpec, count: int, stream: Stream,
                 floor: float) -> np.ndarray:
    """Constructive slice points (t, g(t)) - (s, g(s)).

    s = (s_1, s_tilde) with s_1 ranging over its radius; for i <= k the
    difference t_i - s_i is drawn between the floor and the full reciprocal
    width, and beyond the split t follows the pinned affine shape.  Draws
    that leave the coordinate ball are rejected.
    """
    rd, k = spec.rd, spec.k
    d = rd.d
    w = rd.rho / np.asarray(rd.r)
    out = []
    start, batch = 0, max(count, 1 << 10)
    while sum(b.shape[0] for b in out) < count and start < 64 * batch:
        u = stream.uniforms(start, batch, 2 * (d - 1) + 1)
        s1 = (2.0 * u[:, 0] - 1.0) * rd.r[0]
        s = np.column_stack([s1, np.repeat(spec.s_tilde[None, :], batch, axis=0)])
        mag = floor * w[:k] + u[:, 1:k + 1] * (1.0 - floor) * w[:k]
        sign = np.where(u[:, k + 1:2 * k + 1] < 0.5, -1.0, 1.0)
        t = np.empty((batch, d - 1))
        t[:, :k] = s[:, :k] + sign * mag
        t_i2 = np.sum(t[:, :k] ** 2, axis=1)
        shrink = np.sqrt(np.clip(1.0 - t_i2, 0.0, None))
        tail = u[:, 2 * k + 1:k + d]
        for i in range(k, d - 1):
            delta = (2.0 * tail[:, i - k] - 1.0) * 0.5 * w[i]
            t[:, i] = s[:, i] * shrink + delta
        s2 = np.sum(s ** 2, axis=1)
        t2 = np.sum(t ** 2, axis=1)
        good = (s2 < 1.0) & (t2 < 1.0)
        g_s = np.sqrt(np.clip(1.0 - s2, 0.0, None))
        g_t = np.sqrt(np.clip(1.0 - t2, 0.0, None))
        pts = np.column_stack([t - s, g_t - g_s])
        out.append(pts[good])
        start += batch
    pts = np.concatenate(out) if out else np.zeros((0, d))
    if pts.shape[0] < count:
        raise LabError("slice sampling kept too few points inside the ball")
    return pts[:count]


@dataclass(frozen=True)
class ProbeRow:
    rho: float
    ratio_sphere: float
    ratio_parab: float
    overlap: float
    n: int
    seed: int


@dataclass(frozen=True)
class ProbeResult:
    rows: list
    fit_exponent_sphere: float
    fit_exponent_parab: float
    per_halving_sphere: float
    per_halving_parab: float


def _fit_exponent(rhos, ratios) -> float:
    x = np.log(np.asarray(rhos))
    y = np.log(np.asarray(ratios))
    good = np.isfinite(y)
    if np.count_nonzero(good) < 2:
        return float("nan")
    slope = np.polyfit(x[good], y[good], 1)[0]
    return float(slope)


def disjointness_demo(rho_list, a: float, b: float, n: int, seed: int,
                      d: int = 3, n_slices: int = 6,
                      n_slice_pts: int = 512, consts=None) -> ProbeResult:
    """Degeneracy probe: ratio decay plus slice overlap, with the
    paraboloid control on identical radii.

    For each rho the radii are (rho^a, ..., rho^b); slices are taken at
    n_slices separated trailing coordinates and their pairwise overlap
    fraction is measured on constructively sampled points.
    """
    from .constants import Constants
    consts = consts or Constants()
    rows = []
    for idx, rho in enumerate(rho_list):
        gen = degenerate_family(d, a, b)
        rd = gen(rho)
        row_seed = subseed(seed, f"probe{idx}")
        E, F = geometry.make_sphere_pair(rd)
        rep = qex_report(E, F, n, row_seed)
        EP, FP = geometry.make_parab_pair(rd)
        repp = qex_report(EP, FP, n, row_seed)
        overlap = float("nan")
        try:
            anchors = np.linspace(-0.8, 0.8, n_slices)
            specs = []
            for j, frac in enumerate(anchors):
                s_t = np.zeros(d - 2)
                s_t[-1] = frac * rd.r[-1]
                specs.append(SliceSpec.make(rd, s_t))
        except LabError:
            specs = []
        if specs:
            samples = [slice_sample(spec, n_slice_pts,
                                    Stream(row_seed, f"slice{j}"),
                                    consts.slice_floor)
                       for j, spec in enumerate(specs)]
            cross = []
            for i_s in range(n_slices):
                for j_s in range(n_slices):
                    if i_s == j_s:
                        continue
                    mem = slice_membership(samples[i_s], specs[j_s],
                                           consts.slice_k1, consts.slice_k2,
                                           consts.slice_k3, consts.slice_floor)
                    cross.append(float(np.mean(mem)))
            overlap = float(np.mean(cross))
        rows.append(ProbeRow(rho, rep.ratio, repp.ratio, overlap, n, row_seed))
    rhos = [r.rho for r in rows]
    e_s = _fit_exponent(rhos, [r.ratio_sphere for r in rows])
    e_p = _fit_exponent(rhos, [r.ratio_parab for r in rows])
    return ProbeResult(rows, e_s, e_p, 2.0 ** e_s, 2.0 ** e_p)


# ---------------------------------------------------------------------------
# Recovery pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompareReport:
    base: QexReport
    radii: Radii | None
    frame: Frame | None
    e_tilde: Region | None
    f_tilde: Region | None
    t_intersect: Estimate | None
    t_ratio: float
    meas_ratio_e: float
    meas_ratio_f: float
    failed_stage: str = ""


def _repair_radii(raw_r: np.ndarray, rho: float, d: int) -> Radii:
    """Clip to (rho, 1], sort, and lift the low radii onto the
    nondegeneracy floor sqrt(rho) * r_max."""
    r = np.sort(np.clip(raw_r, rho, 1.0))
    floor = math.sqrt(rho) * r[-1]
    r = np.maximum(r, floor)
    return relaxed_radii(list(r), rho, d)


def recover_cap_pair(E: Region, F: Region, n: int, seed: int,
                     consts=None) -> CompareReport:
    """Recover a framed cap pair comparable to an arbitrary pair.

    Pipeline: near-extremality report, tower, centered ellipsoid around the
    gnomonic level-1 image, thickness from the (alpha beta)^{1/(d-1)}
    scale, radii as thickness over reversed fitted axes (repaired into
    admissibility), frame from the tower rotation and the fitted axes.  The
    returned report carries T(E cap E~, F cap F~) / T(E, F) and the measure
    inflation of the recovered pair.
    """
    from .constants import Constants
    consts = consts or Constants()
    d = E.d
    nan = float("nan")

    rep = qex_report(E, F, n, subseed(seed, "cmp_qex"))
    if rep.degenerate:
        return CompareReport(rep, None, None, None, None, None,
                             nan, nan, nan, failed_stage="qex_report")
    try:
        tower = build_tower(E, F, subseed(seed, "cmp_tower"))
    except TowerError as exc:
        return CompareReport(rep, None, None, None, None, None,
                             nan, nan, nan, failed_stage=f"tower: {exc}")
    eta = 1.0 / (2.0 * (d - 1))
    try:
        cont = ellipsoid_containment(tower, eta)
    except cvx.RefinementError as exc:
        return CompareReport(rep, None, None, None, None, None,
                             nan, nan, nan, failed_stage=f"containment: {exc}")
    if cont.degenerate:
        return CompareReport(rep, None, None, None, None, None,
                             nan, nan, nan, failed_stage="containment: degenerate")
    rho_t = rho_scale(rep.alpha, rep.beta, d, rep.ratio,
                      consts.rho_scale_coeff, consts.rho_scale_eps_power)
    rho_t = min(max(rho_t, 1e-12), 0.5)
    vals, vecs = np.linalg.eigh(cont.body.shape)
    axes = np.maximum(vals, 1e-12)
    raw_r = rho_t / axes[::-1]
    rd = _repair_radii(raw_r, rho_t, d)
    # axes ascend with vals; radii r_i pair with the reversed eigenvectors
    U = vecs[:, ::-1]
    Q = np.eye(d)
    Q[:-1, :-1] = U
    frame = Frame(tower.rotation.T @ Q, tower.x0)
    e_t, f_t = geometry.make_sphere_pair(rd, frame)
    me = measure(e_t, n, subseed(seed, "cmp_me"))
    mf = measure(f_t, n, subseed(seed, "cmp_mf"))
    t_int = bilinear_form(IntersectRegion(E, e_t), IntersectRegion(F, f_t),
                          n, subseed(seed, "cmp_t"))
    t_ratio = t_int.value / rep.t_value.value if rep.t_value.value > 0 else nan
    mre = me.value / rep.meas_e.value if rep.meas_e.value > 0 else nan
    mrf = mf.value / rep.meas_f.value if rep.meas_f.value > 0 else nan
    return CompareReport(rep, rd, frame, e_t, f_t, t_int, t_ratio, mre, mrf)
