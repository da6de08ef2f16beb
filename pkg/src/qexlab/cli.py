"""Command-line entry point.

Subcommands: ratio, sweep, probe, tower, decompose, verify.  Each report
command writes CSV files plus a manifest into the output directory and, on
the report paths, renders a PNG figure next to the delimited output.

Exit codes: 0 success, 1 check failure, 2 degenerate estimate, 64 usage.
A config file (INI, one section per command) supplies defaults that
command-line flags override; QEX_SEED sets the default seed.
"""

import argparse
import configparser
import math
import os
import sys
import time

import numpy as np

from . import decomposition as dec
from . import geometry as geo
from . import lab
from . import plotting, reports
from . import surface_ops as sfc
from .constants import Constants, load_constants, save_constants
from .rng import Stream

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_DEGENERATE = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_rho_list(text: str):
    """'2^-4..2^-8', '2^-6' or '0.125,0.0625' into a list of floats."""
    text = text.strip()

    def one(tok):
        tok = tok.strip()
        if "^" in tok:
            base, exp = tok.split("^")
            return float(base) ** float(exp)
        return float(tok)

    if ".." in text:
        lo_s, hi_s = text.split("..")
        lo, hi = one(lo_s), one(hi_s)
        m_lo = round(math.log2(lo))
        m_hi = round(math.log2(hi))
        if abs(lo - 2.0 ** m_lo) > 1e-12 or abs(hi - 2.0 ** m_hi) > 1e-12:
            raise UsageError("range syntax needs dyadic endpoints like 2^-4..2^-8")
        step = -1 if m_hi < m_lo else 1
        return [2.0 ** m for m in range(m_lo, m_hi + step, step)]
    return [one(tok) for tok in text.split(",") if tok.strip()]


def _count(text) -> int:
    return int(float(text))


def _build_parser() -> _Parser:
    parser = _Parser(prog="qexlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="base seed (default: QEX_SEED or 0)")
        p.add_argument("--n", type=_count, default=None,
                       help="samples per estimate")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--no-figures", action="store_true", default=None)
        p.add_argument("--constants", default=None,
                       help="pinned constants INI (default: packaged)")

    p = sub.add_parser("ratio", help="near-extremality report for one pair")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--r", default=None, help="comma-separated radii")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--surface", choices=["sphere", "parab"], default=None)
    p.add_argument("--frame", choices=["identity", "random"], default=None)

    p = sub.add_parser("sweep", help="ratio sweep over a radius family")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--family", choices=["ball", "knapp", "degenerate"],
                   default=None)
    p.add_argument("--surface", choices=["sphere", "parab"], default=None)
    p.add_argument("--rho-list", dest="rho_list", default=None)
    p.add_argument("--a", type=float, default=None,
                   help="first exponent of the degenerate family")
    p.add_argument("--b", type=float, default=None,
                   help="last exponent of the degenerate family")

    p = sub.add_parser("probe", help="degeneracy probe with paraboloid control")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--rho-list", dest="rho_list", default=None)

    p = sub.add_parser("tower", help="sampled refinement tower on a cap pair")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--kind", choices=["ball", "knapp"], default=None)
    p.add_argument("--r", default=None)
    p.add_argument("--rho", type=float, default=None)

    p = sub.add_parser("decompose", help="partition, compatibility, pigeonhole")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--r", default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--c-big", dest="c_big", type=float, default=None)

    p = sub.add_parser("verify", help="run the invariant suite")
    common(p)
    p.add_argument("--suite", choices=["fast", "full"], default=None)
    p.add_argument("--repin", action="store_true", default=None,
                   help="re-measure pinnable constants and report drift")
    return parser


_DEFAULTS = {
    "ratio": {"d": 2, "r": "0.25", "rho": 0.0625, "surface": "sphere",
              "frame": "identity", "n": 10 ** 6},
    "sweep": {"d": 2, "family": "ball", "surface": "sphere",
              "rho_list": "2^-3..2^-7", "a": 0.9, "b": 0.1, "n": 10 ** 6},
    "probe": {"d": 3, "a": 0.9, "b": 0.1, "rho_list": "2^-4..2^-8",
              "n": 10 ** 6},
    "tower": {"d": 2, "kind": "knapp", "r": None, "rho": 0.03125,
              "n": 1 << 18},
    "decompose": {"d": 2, "r": "0.25", "rho": 0.015625, "lam": 0.25,
                  "c_big": 8.0, "n": 4 * 10 ** 5},
    "verify": {"suite": "fast", "repin": False, "n": 10 ** 6},
}
_COMMON_DEFAULTS = {"out": "qexlab_out", "workers": 1, "no_figures": False}


def _resolve(args) -> dict:
    """Merge CLI values, config file section and hard defaults."""
    merged = dict(_COMMON_DEFAULTS)
    merged.update(_DEFAULTS[args.command])
    merged["seed"] = int(os.environ.get("QEX_SEED", "0"))
    if args.config:
        parser = configparser.ConfigParser()
        with open(args.config) as fh:
            parser.read_file(fh)
        if parser.has_section(args.command):
            for key, raw in parser.items(args.command):
                key = key.replace("-", "_")
                if key not in merged and key not in ("seed",):
                    raise UsageError(f"unknown config key {key!r}")
                current = merged.get(key)
                if isinstance(current, bool):
                    merged[key] = parser.getboolean(args.command, key)
                elif isinstance(current, int):
                    merged[key] = _count(raw)
                elif isinstance(current, float):
                    merged[key] = float(raw)
                else:
                    merged[key] = raw
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _radii_from(cfg, d: int) -> geo.Radii:
    if cfg.get("r"):
        r = [float(tok) for tok in str(cfg["r"]).split(",")]
        return geo.relaxed_radii(r, float(cfg["rho"]), d)
    if cfg.get("kind"):
        if cfg["kind"] == "ball":
            return geo.ball_radii(float(cfg["rho"]), d)
        return geo.knapp_radii(float(cfg["rho"]), d)
    raise UsageError("--r (with --rho) or --kind is required")


def _prep_out(cfg) -> str:
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    return out


def cmd_ratio(cfg) -> int:
    out = _prep_out(cfg)
    d = int(cfg["d"])
    if cfg["r"] is None:
        raise UsageError("ratio needs --r")
    if cfg["rho"] is None:
        raise UsageError("ratio needs --rho")
    rd = _radii_from(cfg, d)
    frame = None
    if cfg["frame"] == "random":
        frame = geo.random_frame(d, Stream(cfg["seed"], "cli_frame"), 0)
    if cfg["surface"] == "parab":
        E, F = geo.make_parab_pair(rd)
    else:
        E, F = geo.make_sphere_pair(rd, frame)
    rep = sfc.qex_report(E, F, cfg["n"], cfg["seed"], workers=cfg["workers"])
    rec = lab._record_from_report(rd, cfg["surface"], rep, cfg["n"], cfg["seed"])
    reports.write_csv(os.path.join(out, "ratio.csv"),
                      reports.sweep_header(d), reports.sweep_rows([rec]))
    params = f"r={cfg['r']};rho={cfg['rho']};surface={cfg['surface']}"
    est_rows = reports.estimate_rows(
        [("t", rep.t_value), ("measE", rep.meas_e), ("measF", rep.meas_f)],
        d, params)
    reports.write_csv(os.path.join(out, "estimates.csv"),
                      ["method", "d", "params", "value", "std_error", "n", "seed"],
                      est_rows)
    line = (f"d={d} r={rd.r} rho={rd.rho} T={rep.t_value.value:.6g} "
            f"ratio={rep.ratio:.6g} alpha={rep.alpha:.6g} beta={rep.beta:.6g}")
    print(line)
    return EXIT_DEGENERATE if rep.degenerate else EXIT_OK


def cmd_sweep(cfg) -> int:
    out = _prep_out(cfg)
    d = int(cfg["d"])
    rhos = parse_rho_list(str(cfg["rho_list"]))
    if cfg["family"] == "ball":
        gen = lab.ball_family(d)
    elif cfg["family"] == "knapp":
        gen = lab.knapp_family(d)
    else:
        gen = lab.degenerate_family(d, float(cfg["a"]), float(cfg["b"]))
    recs = lab.sweep(d, rhos, gen, cfg["n"], cfg["seed"],
                     surface=cfg["surface"], workers=cfg["workers"])
    name = f"sweep_{cfg['family']}_{cfg['surface']}_d{d}"
    reports.write_csv(os.path.join(out, name + ".csv"),
                      reports.sweep_header(d), reports.sweep_rows(recs))
    if not cfg["no_figures"]:
        plotting.sweep_figure(recs, os.path.join(out, name + ".png"),
                              title=f"{cfg['family']} family, {cfg['surface']}")
    failures = [r for r in recs if r.error]
    for r in failures:
        print(f"row rho={r.rho} failed: {r.error}", file=sys.stderr)
    print(f"wrote {len(recs)} records to {name}.csv")
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def cmd_probe(cfg) -> int:
    out = _prep_out(cfg)
    rhos = parse_rho_list(str(cfg["rho_list"]))
    consts = _load_consts(cfg)
    probe = lab.disjointness_demo(rhos, float(cfg["a"]), float(cfg["b"]),
                                  cfg["n"], cfg["seed"], d=int(cfg["d"]),
                                  consts=consts)
    reports.write_csv(os.path.join(out, "decay_sphere.csv"),
                      reports.DECAY_HEADER, reports.decay_rows(probe, "sphere"))
    reports.write_csv(os.path.join(out, "decay_parab.csv"),
                      reports.DECAY_HEADER, reports.decay_rows(probe, "parab"))
    if not cfg["no_figures"]:
        plotting.probe_figure(probe, os.path.join(out, "decay.png"))
    print(f"sphere per-halving factor {probe.per_halving_sphere:.4f}, "
          f"parab {probe.per_halving_parab:.4f}")
    return EXIT_OK


def cmd_tower(cfg) -> int:
    out = _prep_out(cfg)
    d = int(cfg["d"])
    rd = _radii_from(cfg, d)
    E, F = geo.make_sphere_pair(rd)
    tower = lab.build_tower(E, F, cfg["seed"])
    membership = tower.verify_membership()
    rows = []
    for j, lvl in enumerate(tower.levels, start=1):
        dens = float(np.mean(lvl.densities)) if lvl.densities.size else 0.0
        rows.append([j, lvl.samples.shape[0], dens,
                     membership[j - 1], tower.alpha_hat, tower.beta_hat])
    reports.write_csv(os.path.join(out, "tower_levels.csv"),
                      ["level", "count", "mean_density", "membership",
                       "alpha_hat", "beta_hat"], rows)
    if not cfg["no_figures"]:
        plotting.tower_figure(tower, os.path.join(out, "tower.png"))
    ok = all(m == 1.0 for m in membership if not math.isnan(m))
    print(f"tower levels {[lvl.samples.shape[0] for lvl in tower.levels]}, "
          f"membership {membership}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_decompose(cfg) -> int:
    out = _prep_out(cfg)
    d = int(cfg["d"])
    rd = _radii_from(cfg, d)
    if not rd.admissible:
        raise UsageError("decompose needs admissible radii")
    lam = float(cfg["lam"])
    consts = _load_consts(cfg)
    cov, pieces = dec.coverage_check(rd, lam, 10 ** 4, cfg["seed"])
    comp = dec.compatibility_check(rd, lam, float(cfg["c_big"]), cfg["n"],
                                   cfg["seed"], workers=cfg["workers"])
    E, F = geo.make_sphere_pair(rd)
    pig = dec.pigeonhole_best(E, F, rd, lam, float(cfg["c_big"]),
                              max(cfg["n"] // 4, 10 ** 4), cfg["seed"],
                              workers=cfg["workers"])
    reports.write_csv(os.path.join(out, "partition.csv"),
                      reports.partition_header(d), reports.partition_rows(pig))
    if not cfg["no_figures"]:
        plotting.partition_figure(pig, os.path.join(out, "partition.png"))
    ok = cov == 1.0 and comp.passed and pig.passed
    print(f"coverage {cov:.4f} over {len(pieces)} pieces; compatibility "
          f"{'pass' if comp.passed else 'FAIL'}; pigeonhole "
          f"{'pass' if pig.passed else 'FAIL'} "
          f"(best {pig.best.t:.3e}, total {pig.total.value:.3e})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _load_consts(cfg) -> Constants:
    if cfg.get("constants"):
        return load_constants(cfg["constants"])
    try:
        return load_constants()
    except FileNotFoundError:
        return Constants()


def cmd_verify(cfg) -> int:
    from . import suite as suite_mod

    out = _prep_out(cfg)
    consts = _load_consts(cfg)
    tier = cfg["suite"]
    results = suite_mod.run_suite(tier, consts)
    rows = []
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name} ({res.seconds:.1f}s): {res.detail}")
        rows.append([res.name, res.passed, res.detail])
        failed += 0 if res.passed else 1
    reports.write_csv(os.path.join(out, f"verify_{tier}.csv"),
                      ["check", "passed", "detail"], rows)
    if cfg.get("repin"):
        measured = repin_constants(consts, cfg["seed"])
        path = os.path.join(out, "pinned_measured.ini")
        save_constants(measured, path)
        print(f"re-measured constants written to {path}")
        for name, old, new in _drift(consts, measured):
            print(f"  drift {name}: pinned {old} -> measured {new}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def repin_constants(consts: Constants, seed: int) -> Constants:
    """Re-measure the pinnable constants on the reference suite.

    Floors are set to half the worst observed ratio, caps to twice the
    worst observed value, leaving symmetric headroom for reruns.
    """
    from . import suite as suite_mod

    measured = Constants(**consts.as_dict())
    worst = {2: 0.0, 3: 0.0}
    for name, E, F, d in suite_mod._upper_bound_roster(seed):
        rep = sfc.qex_report(E, F, 2 * 10 ** 5, seed)
        if not rep.degenerate:
            worst[d] = max(worst[d], rep.ratio)
    measured.c_up_d2 = round(2.0 * worst[2], 3)
    measured.c_up_d3 = round(2.0 * worst[3], 3)
    for d in (2, 3):
        rhos = [2.0 ** -m for m in range(3, 8)]
        floor = math.inf
        for fam in (lab.ball_family(d), lab.knapp_family(d)):
            recs = lab.sweep(d, rhos, fam, 2 * 10 ** 5, seed)
            floor = min(floor, min(r.t / r.rho ** d for r in recs))
        if d == 2:
            measured.c0_rhod_d2 = round(0.5 * floor, 3)
        else:
            measured.c0_rhod_d3 = round(0.5 * floor, 3)
    return measured


def _drift(old: Constants, new: Constants):
    out = []
    for name, value in old.as_dict().items():
        updated = new.as_dict()[name]
        if updated != value:
            out.append((name, value, updated))
    return out


_COMMANDS = {
    "ratio": cmd_ratio,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
    "tower": cmd_tower,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve(args)
        t0 = time.perf_counter()
        code = _COMMANDS[args.command](cfg)
        if os.path.isdir(cfg["out"]):
            reports.write_manifest(
                os.path.join(cfg["out"], "manifest.txt"), args.command,
                argv, cfg, time.perf_counter() - t0)
        return code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (geo.GeometryError, dec.DecompositionError, lab.LabError,
            sfc.EstimatorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
