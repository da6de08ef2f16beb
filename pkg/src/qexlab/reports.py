"""Delimited output and run manifests.

CSV files are byte-deterministic: fixed %.17g float formatting, canonical
row ordering supplied by the caller, LF line endings.  Timestamps and
host facts live only in the manifest file so reruns can be compared
byte for byte.
"""

import sys
import time

import numpy as np


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_value(v) for v in row) + "\n")


def sweep_header(d: int):
    return (["d"] + [f"r_{i}" for i in range(1, d)]
            + ["rho", "admissible", "measE", "measF", "t", "se", "ratio",
               "alpha", "beta", "seed"])


def sweep_rows(records):
    rows = []
    for rec in sorted(records, key=lambda r: (r.d, r.rho, r.r)):
        rows.append([rec.d, *rec.r, rec.rho, rec.admissible, rec.meas_e,
                     rec.meas_f, rec.t, rec.t_se, rec.ratio, rec.alpha,
                     rec.beta, rec.seed])
    return rows


DECAY_HEADER = ["rho", "ratio", "overlap", "fit_exponent"]


def decay_rows(probe, surface: str):
    rows = []
    exponent = (probe.fit_exponent_sphere if surface == "sphere"
                else probe.fit_exponent_parab)
    for r in sorted(probe.rows, key=lambda x: -x.rho):
        ratio = r.ratio_sphere if surface == "sphere" else r.ratio_parab
        rows.append([r.rho, ratio, r.overlap if surface == "sphere" else "",
                     exponent])
    return rows


def estimate_rows(named_estimates, d: int, params: str):
    """Rows in the estimate-serialization layout:
    method, d, params, value, std_error, n, seed."""
    rows = []
    for name, est in named_estimates:
        method = getattr(est, "method", "hit_or_miss")
        rows.append([f"{name}:{method}", d, params, est.value,
                     est.std_error, est.n_samples, est.seed])
    return rows


def partition_header(d: int):
    return (["i", "j"] + [f"net_{k}" for k in range(1, d)] + ["t", "se"])


def partition_rows(report):
    rows = []
    for p in sorted(report.pieces, key=lambda q: (q.i, q.j)):
        rows.append([p.i, p.j, *p.net_point, p.t, p.se])
    return rows


def write_manifest(path, command: str, argv, resolved: dict,
                   wall_seconds: float):
    import qexlab

    lines = [
        f"command: {command}",
        f"argv: {' '.join(argv)}",
        f"package: qexlab {qexlab.__version__}",
        f"python: {sys.version.split()[0]}",
        f"numpy: {np.__version__}",
        f"wall_seconds: {wall_seconds:.3f}",
        f"finished_at: {time.strftime('%Y-%m-%dT%H:%M:%S%z')}",
        "resolved:",
    ]
    for key in sorted(resolved):
        lines.append(f"  {key} = {resolved[key]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
