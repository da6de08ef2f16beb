"""Pinned empirical constants.

The qualitative bounds this package checks ("at least a constant times",
"at most a constant times") do not come with numeric constants.  Each one
is therefore pinned once, from a frozen reference suite, and shipped in
``pinned.ini`` next to this module; reruns compare against the pinned
values so regressions are detectable.  ``repin`` recomputes the measurable
ones and reports drift.
"""

import configparser
from dataclasses import dataclass, fields
from importlib import resources


@dataclass
class Constants:
    # universal ratio bounds per dimension: T(E,F) <= c_up * (|E||F|)^{d/(d+1)}
    c_up_d2: float = 2.8
    c_up_d3: float = 3.2
    # lower bound floor: T(E,F) >= c0 * rho^d for admissible cap pairs
    c0_rhod_d2: float = 3.5
    c0_rhod_d3: float = 13.0
    # ratio flatness factor across a sweep of an admissible family
    ratio_flat_factor: float = 2.0
    # max of |reduction residual| / rho in the taylor check
    taylor_max_over_rho: float = 1.0
    # tower level-1 density >= tower_c_omega1 * alpha
    tower_c_omega1: float = 0.2
    # inflation chain: measE^{d-1} >= c * det-integral >= c' * alpha beta^d
    infl_c_lower: float = 0.5
    infl_c_alpha_beta: float = 0.08
    infl_c_upper: float = 1.5
    # slicing bound: measE >= c * |det A|^{-1} integral
    slicing_c_lower: float = 0.5
    # containment: fitted |V| <= C * alpha
    containment_c_vol: float = 4.0
    knapp_axis_factor: float = 4.0
    # slice-set box constants (multiples of rho/r_i resp. rho) and the floor
    slice_k1: float = 2.0
    slice_k2: float = 2.0
    slice_k3: float = 8.0
    slice_floor: float = 0.05
    # degeneracy probe: per-halving decay of the sphere ratio, paraboloid flat
    decay_gamma: float = 1.5
    probe_gamma_demo: float = 1.03
    parab_flat_factor: float = 2.0
    overlap_control_min: float = 0.9
    overlap_drop_min: float = 1.5
    # balanced-convex machinery
    refine_violation_scale: float = 0.05
    stability_pass_c: float = 0.02
    det_integral_c: float = 0.03
    refine_volume_c: float = 0.5
    # decomposition
    c_big: float = 8.0
    delta2_max_ratio: float = 16.0
    piece_horizontal_slack: float = 1.0
    # recovery pipeline
    rho_scale_coeff: float = 1.0
    rho_scale_eps_power: float = 0.0
    recovery_radii_factor: float = 8.0
    recovery_c_intersection: float = 0.3

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_constants(path=None) -> Constants:
    """Constants from an INI file; defaults to the pinned file in the package."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("qexlab").joinpath("pinned.ini").read_text()
        parser.read_string(text)
    else:
        with open(path) as fh:
            parser.read_file(fh)
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            values[key] = float(raw)
    known = {f.name for f in fields(Constants)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown pinned constants: {sorted(unknown)}")
    return Constants(**values)


_SECTIONS = {
    "surface": ["c_up_d2", "c_up_d3", "c0_rhod_d2", "c0_rhod_d3"],
    "lab": ["ratio_flat_factor", "taylor_max_over_rho", "tower_c_omega1",
            "infl_c_lower", "infl_c_alpha_beta", "infl_c_upper",
            "slicing_c_lower", "containment_c_vol", "knapp_axis_factor"],
    "slices": ["slice_k1", "slice_k2", "slice_k3", "slice_floor"],
    "probe": ["decay_gamma", "probe_gamma_demo", "parab_flat_factor",
              "overlap_control_min", "overlap_drop_min"],
    "convex": ["refine_violation_scale", "stability_pass_c",
               "det_integral_c", "refine_volume_c"],
    "decomp": ["c_big", "delta2_max_ratio", "piece_horizontal_slack"],
    "recovery": ["rho_scale_coeff", "rho_scale_eps_power", "recovery_radii_factor",
                 "recovery_c_intersection"],
}


def save_constants(consts: Constants, path):
    parser = configparser.ConfigParser()
    table = consts.as_dict()
    for section, names in _SECTIONS.items():
        parser[section] = {name: repr(table[name]) for name in names}
    with open(path, "w") as fh:
        parser.write(fh)
