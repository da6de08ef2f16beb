"""Named verification checks.

Every quantitative contract of the package is expressed here as a check
returning (passed, detail).  The "full" tier reproduces the release
acceptance gate; the "fast" tier is the sub-minute subset of direct
identities and invariants.  Thresholds come from the pinned constants.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import convex_approx as cvx
from . import decomposition as dec
from . import geometry as geo
from . import lab
from . import maps
from . import oracle
from . import surface_ops as sfc
from .constants import Constants
from .rng import Stream


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _run(name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Acceptance criteria
# ---------------------------------------------------------------------------

def check_endpoint_flatness(consts: Constants, n: int = 10 ** 6, seed: int = 2024):
    """Ball family ratio (endpoint exponents 2/3 and 3/4) flat within the
    pinned factor across rho in 2^-3 .. 2^-7 for d = 2 and 3."""
    rhos = [2.0 ** -m for m in range(3, 8)]
    spans = []
    for d in (2, 3):
        recs = lab.sweep(d, rhos, lab.ball_family(d), n, seed)
        ratios = np.array([r.ratio for r in recs])
        if not np.all(np.isfinite(ratios)):
            return False, f"d={d}: non-finite ratios {ratios}"
        spans.append((d, float(ratios.max() / ratios.min())))
    ok = all(s <= consts.ratio_flat_factor for _, s in spans)
    detail = "; ".join(f"d={d}: max/min={s:.3f}" for d, s in spans)
    return ok, detail + f" (allowed {consts.ratio_flat_factor})"


def check_rho_d_law(consts: Constants, n: int = 10 ** 6, seed: int = 2025):
    """T / rho^d stable within the pinned factor, and above the pinned
    floor, for the ball and slab families in d = 2 and 3."""
    rhos = [2.0 ** -m for m in range(3, 8)]
    details = []
    ok = True
    for d in (2, 3):
        c0 = consts.c0_rhod_d2 if d == 2 else consts.c0_rhod_d3
        for kind, family in (("ball", lab.ball_family(d)),
                             ("knapp", lab.knapp_family(d))):
            recs = lab.sweep(d, rhos, family, n, seed)
            norm = np.array([r.t / r.rho ** d for r in recs])
            if not np.all(np.isfinite(norm)) or norm.min() <= 0:
                return False, f"d={d} {kind}: bad T/rho^d {norm}"
            span = float(norm.max() / norm.min())
            floor_ok = bool(norm.min() >= c0)
            ok &= span <= consts.ratio_flat_factor and floor_ok
            details.append(f"d={d} {kind}: span={span:.3f} min={norm.min():.2f}")
    return ok, "; ".join(details)


def check_inclusion(consts: Constants, n: int = 10 ** 4, seed: int = 2026):
    """Box-to-cap inclusion at c = 1/64 with fraction exactly 1, covering
    the thin, thick and mixed split-index branches."""
    cases = [
        ("d2 thick", geo.strict_radii([2.0 ** -3], 2.0 ** -8, 2)),
        ("d2 thin", geo.strict_radii([2.0 ** -6], 2.0 ** -10, 2)),
        ("d3 thick", geo.strict_radii([2.0 ** -3, 2.0 ** -3], 2.0 ** -8, 3)),
        ("d3 thin", geo.strict_radii([2.0 ** -6, 2.0 ** -6], 2.0 ** -10, 3)),
        ("d3 mixed", geo.strict_radii([2.0 ** -5, 2.0 ** -3], 2.0 ** -8, 3)),
    ]
    fracs = []
    for idx, (name, rd) in enumerate(cases):
        if name == "d3 mixed" and not 1 <= rd.split_index() <= rd.d - 2:
            return False, "mixed case split index not proper"
        frac = lab.verify_inclusion(rd, 1.0 / 64.0, n, seed + idx)
        fracs.append((name, frac))
    ok = all(f == 1.0 for _, f in fracs)
    return ok, "; ".join(f"{nm}: {f:.4f}" for nm, f in fracs)


def check_degeneracy_necessity(consts: Constants, n: int = 10 ** 6,
                               seed: int = 2027):
    """Degenerate radii (rho^0.9, rho^0.1) in d = 3: the sphere ratio must
    decay by the pinned factor per halving of rho while the paraboloid
    ratio stays flat within the pinned factor on identical radii."""
    rhos = [2.0 ** -m for m in range(4, 9)]
    probe = lab.disjointness_demo(rhos, 0.9, 0.1, n, seed, consts=consts)
    sphere = np.array([r.ratio_sphere for r in probe.rows])
    parab = np.array([r.ratio_parab for r in probe.rows])
    if not (np.all(np.isfinite(sphere)) and np.all(np.isfinite(parab))):
        return False, "non-finite ratios in probe"
    parab_span = float(parab.max() / parab.min())
    per_halving = probe.per_halving_sphere
    ok = (per_halving >= consts.decay_gamma
          and parab_span <= consts.parab_flat_factor)
    detail = (f"sphere per-halving={per_halving:.3f} "
              f"(required {consts.decay_gamma}); "
              f"parab span={parab_span:.3f} "
              f"(allowed {consts.parab_flat_factor})")
    return ok, detail


def check_oracle_equivalence(consts: Constants, n: int = 2 * 10 ** 5,
                             seed: int = 2028):
    """Plane MC bilinear form against the nested quadrature oracle on 20
    configurations, within 3 standard errors."""
    stream = Stream(seed, "oracle_cfg")
    u = stream.uniforms(0, 20, 2)
    worst = 0.0
    for i in range(20):
        rho = 2.0 ** -(3 + 4 * u[i, 0])          # rho in [2^-7, 2^-3]
        lo = math.sqrt(rho)
        r = lo + (0.45 - lo) * u[i, 1] if lo < 0.45 else lo
        rd = geo.validate_radii([r], rho, 2)
        if not rd.admissible:
            rd = geo.knapp_radii(rho, 2)
        E, F = geo.make_sphere_pair(rd)
        cap_mode = "auto" if i % 2 == 0 else None
        est = sfc.bilinear_form(E, F, n, seed + i, cap=cap_mode)
        ref = oracle.t_form_quad(rd.r[0], rd.rho)
        dev = abs(est.value - ref) / max(est.std_error, 1e-300)
        worst = max(worst, dev)
        if dev > 3.0:
            return False, (f"config {i} (r={rd.r[0]:.4f}, rho={rho:.5f}): "
                           f"deviation {dev:.2f} se")
    return True, f"20 configs, worst deviation {worst:.2f} se (allowed 3)"


def _upper_bound_roster(seed: int):
    roster = []
    for d in (2, 3):
        for m in (3, 5, 7):
            roster.append((f"ball d{d} 2^-{m}", *geo.special_pair("ball", 2.0 ** -m, d), d))
            roster.append((f"knapp d{d} 2^-{m}", *geo.special_pair("knapp", 2.0 ** -m, d), d))
    rd_mix = geo.strict_radii([2.0 ** -5, 2.0 ** -3], 2.0 ** -8, 3)
    roster.append(("mixed d3", *geo.make_sphere_pair(rd_mix), 3))
    for m in (4, 6, 8):
        rd_deg = geo.relaxed_radii([(2.0 ** -m) ** 0.9, (2.0 ** -m) ** 0.1], 2.0 ** -m, 3)
        roster.append((f"degenerate d3 2^-{m}", *geo.make_sphere_pair(rd_deg), 3))
    stream = Stream(seed, "roster")
    for d in (2, 3):
        for j in range(3):
            u = stream.uniforms(10 * d + j, 1, 2 * d)[0]
            size = 0.1 + 0.3 * u[:d]
            center = 0.4 * (2.0 * u[d:] - 1.0)
            e_box = geo.Box(center - size, center + size)
            shift = np.zeros(d)
            shift[-1] = -1.0
            f_box = geo.Box(center - size + shift, center + size + shift)
            roster.append((f"boxes d{d} #{j}", e_box, f_box, d))
    for d in (2, 3):
        frame = geo.random_frame(d, Stream(seed, f"fr{d}"), 0, shift=0.5)
        E, F = geo.special_pair("knapp", 2.0 ** -5, d, frame)
        roster.append((f"framed knapp d{d}", E, F, d))
    return roster


def check_universal_upper(consts: Constants, n: int = 4 * 10 ** 5,
                          seed: int = 2029):
    """ratio <= pinned c_up per dimension over the whole pair roster
    (admissible, degenerate, boxes, framed)."""
    worst = {2: 0.0, 3: 0.0}
    for name, E, F, d in _upper_bound_roster(seed):
        rep = sfc.qex_report(E, F, n, seed)
        if rep.degenerate:
            continue
        worst[d] = max(worst[d], rep.ratio)
    ok = (worst[2] <= consts.c_up_d2 and worst[3] <= consts.c_up_d3)
    return ok, (f"worst d=2: {worst[2]:.3f} (<= {consts.c_up_d2}); "
                f"worst d=3: {worst[3]:.3f} (<= {consts.c_up_d3})")


def _central_diff_jacobian(fn, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2 * h))
    return np.column_stack(cols)


def check_map_correctness(consts: Constants, seed: int = 2030):
    """Analytic derivatives against central differences (1e-6) and the
    distance-product identity (1e-9 relative) on random inputs."""
    stream = Stream(seed, "maps")
    worst_fj = worst_hg = worst_inf = 0.0
    for d in (2, 3):
        k = d - 1
        u = stream.derive(f"d{d}").uniforms(0, 100, k * (1 + k + 1))
        for i in range(100):
            row = u[i]
            s = 0.4 * (2.0 * row[:k] - 1.0)
            t = 0.4 * (2.0 * row[k:2 * k] - 1.0)
            fj = maps.f_map_jacobian(s, t)
            num = _central_diff_jacobian(lambda tt: maps.f_map(s, tt), t)
            worst_fj = max(worst_fj, float(np.max(np.abs(fj - num))))
            hg = maps.hessian_g(s)
            num_h = _central_diff_jacobian(
                lambda ss: -ss / np.sqrt(1.0 - np.dot(ss, ss)), s)
            worst_hg = max(worst_hg, float(np.max(np.abs(hg - num_h))))
        # inflation determinant vs jacobian of the stacked chord map
        uu = stream.derive(f"inf{d}").uniforms(0, 100, k + k * k)
        for i in range(100):
            row = uu[i]
            s = 0.3 * (2.0 * row[:k] - 1.0)
            ts = [0.3 * (2.0 * row[k + j * k:k + (j + 1) * k] - 1.0)
                  for j in range(k)]
            det = maps.inflation_det(s, ts)
            full = np.concatenate([s] + list(ts))

            def stacked(z):
                zs = z[:k]
                zts = [z[k + j * k:k + (j + 1) * k] for j in range(k)]
                return maps.psi_natural(zs, zts)

            J = _central_diff_jacobian(stacked, full)
            worst_inf = max(worst_inf, abs(det - float(np.linalg.det(J))))
    ok = worst_fj <= 1e-6 and worst_hg <= 1e-6 and worst_inf <= 1e-6
    # distance product identity on 1000 random tuples
    for d in (2, 3):
        k = d - 1
        g = Stream(seed, f"dp{d}").normals(0, 1000, k * k)
        for i in range(1000):
            cvx.dist_product_identity(g[i].reshape(k, k))
    return ok, (f"jacobian dev {worst_fj:.2e}, hessian dev {worst_hg:.2e}, "
                f"inflation dev {worst_inf:.2e} (all <= 1e-6); "
                "distance product held to 1e-9 on 2000 tuples")


def check_bezout(consts: Constants, seed: int = 2031):
    """At most 2 intersection points with residuals <= 1e-9 on 1000
    generic configurations in each of d = 2, 3."""
    worst_res = 0.0
    for d in (2, 3):
        stream = Stream(seed, f"bez{d}")
        u = stream.uniforms(0, 1000, (d - 1) * d)
        count_bad = 0
        for i in range(1000):
            centers = []
            for j in range(d - 1):
                raw = 2.0 * u[i, j * d:(j + 1) * d] - 1.0
                norm = np.linalg.norm(raw)
                radius = 0.1 + 1.8 * (norm % 1.0)
                centers.append(radius * raw / max(norm, 1e-12))
            count, pts, degen = maps.sphere_intersection_count(np.array(centers))
            if degen:
                continue
            if count > 2:
                count_bad += 1
            for p in pts:
                worst_res = max(worst_res,
                                maps.intersection_residual(centers, p))
        if count_bad:
            return False, f"d={d}: {count_bad} configs exceeded 2 points"
    ok = worst_res <= 1e-9
    return ok, f"2000 configs, counts <= 2, worst residual {worst_res:.2e}"


def _random_cloud(k: int, stream: Stream, index: int) -> cvx.PointCloud:
    """A varied cloud family: boxes, ellipses, segments, annuli, clusters."""
    u = stream.uniforms(index, 1, 6)[0]
    kind = int(u[0] * 5)
    m = 400 + int(u[1] * 600)
    pts_stream = stream.derive(f"pts{index}")
    uu = pts_stream.uniforms(0, m, k + 1)
    gg = pts_stream.normals(0, m, k)
    scale = 0.2 + 1.5 * u[2]
    aspect = 0.05 + 0.95 * u[3]
    if kind == 0:      # box
        pts = scale * (2.0 * uu[:, :k] - 1.0)
        pts[:, -1] *= aspect
        vol = (2 * scale) ** k * aspect
    elif kind == 1:    # gaussian blob
        pts = scale * gg * aspect
        vol = (2.5 * scale * aspect) ** k
    elif kind == 2:    # segment cluster with thickness
        pts = scale * (2.0 * uu[:, :k] - 1.0)
        pts[:, 1:] *= 0.02
        vol = (2 * scale) * (0.04 * scale) ** (k - 1)
    elif kind == 3:    # annulus / shell
        g = gg / np.maximum(np.linalg.norm(gg, axis=1, keepdims=True), 1e-12)
        radius = scale * (0.7 + 0.3 * uu[:, k:k + 1])
        pts = g * radius
        vol = (2 * scale) ** k * 0.3
    else:              # two symmetric clusters plus core
        core = 0.3 * scale * gg
        offset = np.zeros(k)
        offset[0] = scale
        flip = np.where(uu[:, k] < 0.5, -1.0, 1.0)
        pts = np.where(uu[:, 0:1] < 0.3,
                       0.15 * scale * gg + flip[:, None] * offset,
                       core)
        vol = (2 * scale) ** k * 0.2
    return cvx.PointCloud(pts, weight=vol / m)


def check_convex_suite(consts: Constants, seed: int = 2032,
                       n_clouds: int = 100):
    """Stopping-time refinement terminates within 64 rounds on the cloud
    suite; outputs pass removal stability with 50 trials each; the
    determinant integral clears the pinned lower bound; the refined volume
    stays above the pinned multiple of the cloud mass."""
    stream = Stream(seed, "clouds")
    eta = 0.25
    worst_stability = math.inf
    worst_det = math.inf
    worst_vol = math.inf
    for i in range(n_clouds):
        cloud = _random_cloud(2, stream, i)
        try:
            body = cvx.stopping_time_refine(
                cloud, eta, violation_scale=consts.refine_violation_scale)
        except cvx.RefinementError as exc:
            return False, f"cloud {i}: refinement failed ({exc})"
        res = cvx.removal_stability_check(
            cloud, body, eta, 50, Stream(seed, f"stab{i}"),
            consts.stability_pass_c)
        worst_stability = min(worst_stability, res.worst_ratio)
        if not res.passed:
            return False, (f"cloud {i}: removal stability worst ratio "
                           f"{res.worst_ratio:.4f} < {consts.stability_pass_c}")
        worst_vol = min(worst_vol, body.volume / cloud.mass)
        if i < 50:
            est = cvx.det_integral(cloud, 4000, Stream(seed, f"det{i}"))
            bound = cvx.det_integral_lower_bound(cloud, body, eta)
            worst_det = min(worst_det, est.value / bound if bound > 0 else math.inf)
    ok = (worst_det >= consts.det_integral_c
          and worst_vol >= consts.refine_volume_c)
    return ok, (f"{n_clouds} clouds refined <= 64 rounds; worst stability "
                f"{worst_stability:.4f}; worst det/bound {worst_det:.4f} "
                f"(>= {consts.det_integral_c}); worst vol/mass "
                f"{worst_vol:.4f} (>= {consts.refine_volume_c})")


def check_decomposition(consts: Constants, seed: int = 2033):
    """Partition coverage 1.0 on 10^4 samples, the compatibility identity
    at c_big = 8 with the c_big = 1 negative control failing, and the
    pigeonhole contract for the best piece."""
    rd = geo.strict_radii([0.25], 2.0 ** -6, 2)
    cov, pieces = dec.coverage_check(rd, 0.25, 10 ** 4, seed)
    rd3 = geo.strict_radii([2.0 ** -4, 2.0 ** -3], 2.0 ** -7, 3)
    cov3, _ = dec.coverage_check(rd3, 0.5, 10 ** 4, seed + 1)
    comp = dec.compatibility_check(rd, 0.25, consts.c_big, 4 * 10 ** 5, seed)
    comp_neg = dec.compatibility_check(rd, 0.25, 1.0, 4 * 10 ** 5, seed)
    E, F = geo.make_sphere_pair(rd)
    pig = dec.pigeonhole_best(E, F, rd, 0.5, consts.c_big, 10 ** 5, seed)
    ok = (cov == 1.0 and cov3 == 1.0 and comp.passed
          and not comp_neg.passed and pig.passed)
    return ok, (f"coverage d2={cov:.4f} d3={cov3:.4f}; compat C=8 pass="
                f"{comp.passed}, C=1 pass={comp_neg.passed} (must fail); "
                f"pigeonhole best={pig.best.t:.3e} >= share"
                f"={pig.total.value / len(pig.pieces):.3e} - 3se: {pig.passed}")


def check_self_recovery(consts: Constants, n: int = 4 * 10 ** 5,
                        seed: int = 2034):
    """Recovery pipeline on a rotated + translated cap pair: radii within
    the pinned per-axis factor and intersection ratio above the pinned
    floor."""
    results = []
    for d, rho in ((2, 2.0 ** -5), (3, 2.0 ** -5)):
        rd_true = geo.knapp_radii(rho, d)
        frame = geo.random_frame(d, Stream(seed, f"frame{d}"), 0, shift=0.4)
        E, F = geo.make_sphere_pair(rd_true, frame)
        rep = lab.recover_cap_pair(E, F, n, seed + d)
        if rep.failed_stage:
            return False, f"d={d}: pipeline failed at {rep.failed_stage}"
        factors = [max(rr / rt, rt / rr)
                   for rr, rt in zip(rep.radii.r, rd_true.r)]
        rho_factor = max(rep.radii.rho / rho, rho / rep.radii.rho)
        ok_r = max(factors) <= consts.recovery_radii_factor
        ok_t = rep.t_ratio >= consts.recovery_c_intersection
        results.append((d, max(factors), rho_factor, rep.t_ratio, ok_r and ok_t))
    ok = all(r[4] for r in results)
    detail = "; ".join(
        f"d={d}: radii factor {rf:.2f} (<= {consts.recovery_radii_factor}), "
        f"rho factor {pf:.2f}, T ratio {tr:.3f} "
        f"(>= {consts.recovery_c_intersection})"
        for d, rf, pf, tr, _ in results)
    return ok, detail


def check_determinism(consts: Constants, seed: int = 2035):
    """Identical estimates at any worker count, bit for bit, across the
    estimator family."""
    rd = geo.strict_radii([0.25], 2.0 ** -6, 2)
    E, F = geo.make_sphere_pair(rd)
    pairs = []
    for workers in (1, 3):
        m = geo.measure(E, 2 * 10 ** 5, seed, workers=workers)
        t = sfc.bilinear_form(E, F, 2 * 10 ** 5, seed, workers=workers)
        rep = sfc.qex_report(E, F, 10 ** 5, seed, workers=workers)
        pairs.append((m.value, m.std_error, t.value, t.std_error, rep.ratio))
    ok = pairs[0] == pairs[1]
    return ok, f"workers 1 vs 3: {'identical' if ok else f'{pairs[0]} != {pairs[1]}'}"


# ---------------------------------------------------------------------------
# Fast-tier checks
# ---------------------------------------------------------------------------

def check_pole_points(consts: Constants):
    rd = geo.strict_radii([0.1, 0.2], 0.05, 3)
    E, F = geo.make_sphere_pair(rd)
    ok = (E.contains_point([0.0, 0.0, 0.0])
          and F.contains_point([0.0, 0.0, -1.0])
          and not E.contains_point([0.0, 0.0, 0.5]))
    return ok, "origin in E, -e_d in F"


def check_radii_conditions(consts: Constants):
    a = geo.validate_radii([0.1, 0.2], 0.05, 3)
    b = geo.validate_radii([0.01, 0.5], 0.04, 3)
    nd = geo.validate_radii([0.05, 0.5], 0.04, 3)
    c_ok = all(geo.validate_radii([rho] * 2, rho, 3).admissible
               for rho in (0.9, 0.5, 0.1, 0.01))
    k_ok = all(geo.knapp_radii(rho, 3).admissible for rho in (0.9, 0.1, 0.001))
    ok = (a.admissible and not b.admissible
          and geo.COND_NONDEG in b.violations
          and nd.violations == (geo.COND_NONDEG,) and c_ok and k_ok)
    return ok, (f"admissible={a.admissible}, rejected={b.violations}, "
                f"nondeg-only={nd.violations}")


def check_serialization_roundtrip(consts: Constants, seed: int = 11):
    rd = geo.strict_radii([0.125, 0.25], 2.0 ** -6, 3)
    frame = geo.random_frame(3, Stream(seed, "ser"), 0)
    E, _ = geo.make_sphere_pair(rd, frame)
    text = geo.region_to_record(E)
    back = geo.region_from_record(text)
    pts = geo.sample_box(*E.bounding_box(), Stream(seed, "pts"), 0, 2000)
    ok = bool(np.array_equal(E.contains(pts), back.contains(pts)))
    ok &= geo.region_to_record(back) == text
    return ok, "framed cap record roundtrips and membership agrees"


def check_adjoint_symmetry(consts: Constants, seed: int = 12):
    rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
    E, F = geo.make_sphere_pair(rd)
    a = sfc.bilinear_form(E, F, 3 * 10 ** 5, seed, side="f")
    b = sfc.bilinear_form(E, F, 3 * 10 ** 5, seed, side="e")
    dev = abs(a.value - b.value) / math.hypot(a.std_error, b.std_error)
    return dev <= 3.0, f"F-box vs E-box deviation {dev:.2f} se"


def check_cap_arclength(consts: Constants, seed: int = 13):
    box = geo.Box(np.array([-0.05, -1.05]), np.array([0.05, -0.95]))
    est = sfc.t_indicator_at(np.zeros(2), box, mode="mc", n=1 << 18, seed=seed)
    # fiber of the origin through a box at -e_2 of half-width 0.05: the
    # polar arc |w_1| <= 0.05, of length exactly 2 arcsin(0.05)
    ref = 2.0 * math.asin(0.05)
    dev = abs(est.value - ref) / max(est.std_error, 1e-300)
    return dev <= 4.0, f"arc {est.value:.5f} vs {ref:.5f} ({dev:.2f} se)"


def check_graph_vs_mc(consts: Constants, seed: int = 14):
    stream = Stream(seed, "gvm")
    u = stream.uniforms(0, 20, 4)
    worst = 0.0
    for i in range(20):
        d = 2 if i % 2 == 0 else 3
        rho = 2.0 ** -(4 + 2 * u[i, 0])
        rd = geo.knapp_radii(rho, d)
        E, _ = geo.make_sphere_pair(rd)
        x = np.zeros(d)
        x[-1] = 1.0 + (u[i, 1] - 0.5) * rho   # unit distance above the cap
        x[0] = 0.2 * rho * (u[i, 2] - 0.5)
        mc = sfc.t_indicator_at(x, E, mode="mc", n=1 << 17, seed=seed + i,
                                cap="auto")
        gq = sfc.t_indicator_at(x, E, mode="graph",
                                step=math.sqrt(rho) / 40.0)
        dev = abs(mc.value - gq.value) / max(mc.std_error, 1e-300)
        worst = max(worst, dev)
        if dev > 3.0:
            return False, f"config {i}: graph vs mc deviation {dev:.2f} se"
    return True, f"20 configs, worst deviation {worst:.2f} se"


def check_frame_invariance(consts: Constants, seed: int = 15):
    rd = geo.strict_radii([0.25], 2.0 ** -5, 2)
    base_e, base_f = geo.make_sphere_pair(rd)
    ref = sfc.qex_report(base_e, base_f, 2 * 10 ** 5, seed)
    worst = 0.0
    for i in range(5):
        frame = geo.random_frame(2, Stream(seed, "fi"), i)
        E, F = geo.make_sphere_pair(rd, frame)
        rep = sfc.qex_report(E, F, 2 * 10 ** 5, seed + i)
        t_se = math.hypot(rep.t_value.std_error, ref.t_value.std_error)
        worst = max(worst, abs(rep.t_value.value - ref.t_value.value) / t_se)
    return worst <= 3.0, f"5 random frames, worst T deviation {worst:.2f} se"


def check_tower_membership(consts: Constants, seed: int = 16):
    E, F = geo.special_pair("knapp", 2.0 ** -5, 2)
    tower = lab.build_tower(E, F, seed)
    fracs = tower.verify_membership()
    ok = all(f == 1.0 for f in fracs if not math.isnan(f))
    dens_ok = tower.omega1_density >= consts.tower_c_omega1 * tower.alpha_hat
    return ok and dens_ok, (f"membership {fracs}; level-1 density "
                            f"{tower.omega1_density:.4f} vs alpha "
                            f"{tower.alpha_hat:.4f}")


FAST_CHECKS = [
    ("pole_points", check_pole_points),
    ("radii_conditions", check_radii_conditions),
    ("serialization_roundtrip", check_serialization_roundtrip),
    ("adjoint_symmetry", check_adjoint_symmetry),
    ("cap_arclength", check_cap_arclength),
    ("graph_vs_mc", check_graph_vs_mc),
    ("frame_invariance", check_frame_invariance),
    ("tower_membership", check_tower_membership),
    ("determinism", check_determinism),
]

ACCEPTANCE_CHECKS = [
    ("endpoint_flatness", check_endpoint_flatness),
    ("rho_d_law", check_rho_d_law),
    ("inclusion", check_inclusion),
    ("degeneracy_necessity", check_degeneracy_necessity),
    ("oracle_equivalence", check_oracle_equivalence),
    ("universal_upper", check_universal_upper),
    ("map_correctness", check_map_correctness),
    ("bezout", check_bezout),
    ("convex_suite", check_convex_suite),
    ("decomposition", check_decomposition),
    ("self_recovery", check_self_recovery),
    ("determinism", check_determinism),
]


def run_suite(tier: str = "fast", consts: Constants | None = None):
    consts = consts or Constants()
    checks = FAST_CHECKS if tier == "fast" else ACCEPTANCE_CHECKS
    results = []
    for name, fn in checks:
        results.append(_run(name, lambda fn=fn: fn(consts)))
    return results
