"""Batch experiment runner binding every module of the package.

``fuplab <kind> [options]`` executes one experiment kind and persists its
artifacts (CSV/JSON results plus a ``manifest.json`` echoing the fully
resolved configuration, defaults included) under the output directory.
Options may come from an INI config file — one section per kind plus a
``[run]`` section for the global options — with command-line flags taking
precedence over the file and the file over built-in defaults.  Parsing is
strict: unknown sections, unknown keys, or malformed values abort with
exit code 2 before anything is written.

Exit codes: 0 success with all checks passing; 1 checks failed (results
still written); 2 configuration error (nothing written); 3 numerical
contract violation (manifest and error report written).

Given identical configuration and seed, result files are byte-identical
across runs; timestamps appear only in the manifest.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

__all__ = ["main"]


class ConfigError(Exception):
    """Invalid configuration; reported on stderr with exit code 2."""


# ---------------------------------------------------------------------------
# option registry


@dataclass(frozen=True)
class Opt:
    """One configuration key: converter tag, default, and help text."""

    conv: str  # int | float | str | bool | floats | ints | irange
    default: object = None
    required: bool = False
    help: str = ""


GLOBAL_OPTS = {
    "out": Opt("str", None, help="output directory (default: $FUPLAB_OUT/<kind> or ./fuplab_runs/<kind>)"),
    "seed": Opt("int", 0, help="base random seed for kinds without an explicit seed list"),
    "threads": Opt("int", 1, help="BLAS/FFT thread cap (default 1 for reproducibility)"),
    "precision": Opt("int", 30, help="working precision in decimal digits for arbitrary-precision kinds"),
}

_SET_OPTS = {
    "base": Opt("int", 3, help="Cantor construction base"),
    "alphabet": Opt("ints", (0, 2), help="retained digits, comma separated"),
    "depth": Opt("int", 4, help="construction depth"),
    "dimension": Opt("int", 1, help="ambient dimension (1 or 2)"),
    "set": Opt("str", None, help="JSON grid-set file (overrides the Cantor options)"),
}

KIND_OPTS = {
    "cantor": dict(_SET_OPTS),
    "regularity": {
        **_SET_OPTS,
        "delta": Opt("float", None, help="regularity exponent (default: Cantor similarity dimension)"),
        "alpha0": Opt("float", None, help="smallest window scale (default: set resolution)"),
        "alpha1": Opt("float", None, help="largest window scale (default: extent width)"),
        "CR": Opt("float", math.inf, help="requested regularity constant to check against"),
        "budget": Opt("int", 1_000_000, help="window sample budget"),
    },
    "porosity": {
        **_SET_OPTS,
        "L": Opt("int", 3, help="porosity scale"),
        "depths": Opt("irange", (0, 1, 2), help="depths to scan, e.g. 0..5"),
    },
    "conformal-check": {
        "q": Opt("floats", (0.3, 0.2, 0.1), help="aspect parameters"),
    },
    "cartan-check": {
        "seeds": Opt("irange", tuple(range(50)), help="mass-configuration seeds"),
        "H": Opt("floats", (0.1, 0.01), help="radius budgets"),
        "masses": Opt("int", 12, help="number of point masses per configuration"),
        "probes": Opt("int", 2048, help="probe points per configuration"),
    },
    "localization": {
        "d": Opt("int", 1, help="dimension (1 or 2)"),
        "q": Opt("floats", (0.1,), help="localization exponents"),
        "lambda": Opt("floats", (0.25,), help="cell measures"),
        "seeds": Opt("irange", (0,), help="sample seeds"),
        "band": Opt("float", 4.0, help="spectral band of the samples"),
        "half_period": Opt("int", 16, help="torus half-period W"),
        "points_per_cell": Opt("int", 16, help="grid points per unit cell"),
        "placement": Opt("str", "fixed", help="interval placement: fixed | random"),
        "offset": Opt("float", 0.0, help="fixed placement offset"),
        "c_tilde": Opt("float", 1.0, help="constant in the kappa cap"),
    },
    "damping": {
        "set": Opt("str", None, help="JSON grid-set file with the 1-D frequency set"),
        "frame": Opt("str", None, help="JSON admissible-frame file (2-D product build)"),
        "c1": Opt("float", None, required=True, help="support parameter"),
        "iota": Opt("float", 1e-2, help="certificate slack factor"),
        "delta": Opt("float", None, help="regularity exponent override"),
        "leakage_tol": Opt("float", 1e-6, help="relative mass allowed outside the support"),
        "export_arrays": Opt("bool", False, help="also write psi arrays as CSV"),
        "stride": Opt("int", 64, help="subsampling stride for array export"),
    },
    "fup-scan": {
        "spec": Opt("str", None, help="JSON Cantor family file (overrides base/alphabet/dimension)"),
        "base": Opt("int", 3, help="Cantor construction base"),
        "alphabet": Opt("ints", (0, 2), help="retained digits"),
        "dimension": Opt("int", 1, help="ambient dimension"),
        "k": Opt("irange", (1, 2, 3, 4), help="depth range, e.g. 1..6"),
        "rotate": Opt("float", 0.0, help="rotation of the frequency mask in degrees (2-D)"),
        "oversample": Opt("int", 4, help="physical grid oversampling"),
        "diffeo": Opt("str", None, help="distortion family:amplitude:d0 (switches to quadrature norms)"),
    },
    "constants": {
        "d": Opt("int", 2, help="dimension"),
        "delta": Opt("float", 1.0, help="total regularity exponent"),
        "delta1": Opt("float", 0.5, help="per-axis exponent"),
        "CR": Opt("float", 1.0, help="regularity constant"),
        "eps0": Opt("float", 0.9, help="frame transversality"),
        "iota": Opt("float", 1e-2, help="damping slack factor"),
        "m": Opt("int", 1, help="number of covers"),
        "q_star": Opt("float", 0.05, help="localization cap"),
    },
    "distort-scan": {
        "base": Opt("int", 3, help="Cantor construction base"),
        "alphabet": Opt("ints", (0, 2), help="retained digits"),
        "dimension": Opt("int", 1, help="ambient dimension"),
        "k": Opt("irange", (1, 2, 3), help="depth range"),
        "oversample": Opt("int", 4, help="physical grid oversampling"),
        "family": Opt("str", "sine_shear", help="distortion family"),
        "amplitude": Opt("float", 1.0 / 6.0, help="distortion amplitude"),
        "d0": Opt("float", 1.2, help="derivative bound of the distortion"),
    },
}

_FLAG_NAMES = {"lambda": "--lambda", "set": "--set", "frame": "--frame",
               "spec": "--spec", "H": "--H", "CR": "--CR", "L": "--L", "d0": "--d0"}


def _convert(kind: str, key: str, opt: Opt, raw: str):
    try:
        if opt.conv == "int":
            return int(raw)
        if opt.conv == "float":
            return float(raw)
        if opt.conv == "str":
            return raw
        if opt.conv == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if opt.conv == "floats":
            return tuple(float(t) for t in raw.split(",") if t.strip())
        if opt.conv == "ints":
            return tuple(int(t) for t in raw.split(",") if t.strip())
        if opt.conv == "irange":
            raw = raw.strip()
            if ".." in raw:
                lo, hi = raw.split("..", 1)
                return tuple(range(int(lo), int(hi) + 1))
            return tuple(int(t) for t in raw.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"[{kind}] {key}: {exc}") from None
    raise ConfigError(f"internal: unknown converter {opt.conv!r}")


def _load_config_file(path: str) -> dict:
    """Strictly parse the INI file into {section: {key: raw string}}."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case (H, CR, L)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    out: dict = {}
    for section in parser.sections():
        if section != "run" and section not in KIND_OPTS:
            raise ConfigError(f"unknown config section [{section}]")
        registry = GLOBAL_OPTS if section == "run" else KIND_OPTS[section]
        block = {}
        for key, value in parser.items(section):
            if key not in registry:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            block[key] = value
        out[section] = block
    return out


def _resolve(kind: str, file_cfg: dict, cli_vals: dict) -> tuple[dict, dict]:
    """Merge defaults < config file < CLI flags; returns (params, globals)."""
    params = {}
    for key, opt in KIND_OPTS[kind].items():
        value = opt.default
        if key in file_cfg.get(kind, {}):
            value = _convert(kind, key, opt, file_cfg[kind][key])
        if cli_vals.get(key) is not None:
            value = _convert(kind, key, opt, cli_vals[key])
        if value is None and opt.required:
            raise ConfigError(f"[{kind}] missing required option {key!r}")
        params[key] = value
    run = {}
    for key, opt in GLOBAL_OPTS.items():
        value = opt.default
        if key in file_cfg.get("run", {}):
            value = _convert("run", key, opt, file_cfg["run"][key])
        if cli_vals.get(key) is not None:
            value = _convert("run", key, opt, cli_vals[key])
        run[key] = value
    return params, run


# ---------------------------------------------------------------------------
# serialization helpers


def _jsonable(obj):
    """Recursively convert dataclasses / numpy scalars / tuples for JSON."""
    import numpy as np

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    if type(obj).__module__.split(".")[0] == "mpmath":
        return float(obj)
    if obj is None or isinstance(obj, (str, int, float, bool)):
        return obj
    return repr(obj)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunContext:
    """Collects artifacts and check results for one run."""

    def __init__(self, kind: str, params: dict, run: dict, outdir: Path):
        self.kind = kind
        self.params = params
        self.run = run
        self.outdir = outdir
        self.artifacts: list = []
        self.checks: dict = {}

    def write_text(self, name: str, text: str) -> None:
        self.outdir.mkdir(parents=True, exist_ok=True)
        (self.outdir / name).write_text(text, encoding="utf-8")
        self.artifacts.append(name)

    def write_json(self, name: str, payload) -> None:
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
        self.write_text(name, text + "\n")

    def write_csv(self, name: str, header: list, rows: list) -> None:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        self.write_text(name, "\n".join(lines) + "\n")

    def rng_seed(self) -> int:
        return int(self.run["seed"])


# ---------------------------------------------------------------------------
# shared builders


def _load_gridset(path: str):
    from .regular_sets import gridset_from_json

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read grid-set file: {exc}") from None
    return gridset_from_json(text)


def _build_set(ctx: RunContext):
    """Grid set from --set file or the Cantor options; returns (set, spec|None)."""
    from .regular_sets import CantorSpec, build_cantor

    p = ctx.params
    if p.get("set"):
        return _load_gridset(p["set"]), None
    try:
        spec = CantorSpec(
            base=p["base"], alphabet=tuple(p["alphabet"]), depth=p["depth"],
            dimension=p["dimension"],
            extent=((0.0, 1.0),) * p["dimension"],
        )
    except ValueError as exc:
        raise ConfigError(f"invalid Cantor options: {exc}") from None
    return build_cantor(spec), spec


def _parse_diffeo(text: str, dimension: int):
    from .fup_operator import DiffeoSpec

    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("diffeo must be family:amplitude:d0")
    family, amp, d0 = parts[0], parts[1], parts[2]
    try:
        return DiffeoSpec(kind=family, dimension=dimension,
                          amplitude=float(amp), d0=float(d0))
    except ValueError as exc:
        raise ConfigError(f"invalid diffeo: {exc}") from None


# ---------------------------------------------------------------------------
# kind handlers (return nothing; record into ctx)


def _run_cantor(ctx: RunContext) -> None:
    from .regular_sets import gridset_to_json, merged_intervals

    gset, _ = _build_set(ctx)
    ctx.write_text("set.json", gridset_to_json(gset) + "\n")
    if gset.dimension == 1:
        rows = [[lo, hi] for lo, hi in merged_intervals(gset)]
        ctx.write_csv("intervals.csv", ["lo", "hi"], rows)
    else:
        centers = gset.cube_centers()
        rows = [[float(c[0]), float(c[1])] for c in centers]
        ctx.write_csv("cubes.csv", ["x", "y"], rows)
    ctx.checks["built"] = True


def _run_regularity(ctx: RunContext) -> None:
    from .regular_sets import CubeMeasure, check_regularity, natural_measure

    p = ctx.params
    gset, spec = _build_set(ctx)
    delta = p["delta"]
    if delta is None:
        if spec is None:
            raise ConfigError("delta is required when loading a grid-set file")
        delta = gset.dimension * math.log(len(p["alphabet"])) / math.log(p["base"])
    if spec is not None:
        measure = natural_measure(spec)
    else:
        n = len(gset.cubes)
        measure = CubeMeasure(gset, tuple([1.0 / n] * n))
    alpha0 = p["alpha0"] if p["alpha0"] is not None else gset.resolution
    alpha1 = p["alpha1"] if p["alpha1"] is not None else max(
        hi - lo for lo, hi in gset.extent)
    report = check_regularity(gset, measure, delta, alpha0, alpha1,
                              sample_budget=p["budget"], requested_cr=p["CR"])
    ctx.write_json("report.json", report)
    rows = [[float(s)] for s in report.scales_tested]
    ctx.write_csv("scales.csv", ["alpha"], rows)
    ctx.checks["regular"] = bool(report.passed)


def _run_porosity(ctx: RunContext) -> None:
    from .regular_sets import check_porosity

    p = ctx.params
    gset, _ = _build_set(ctx)
    report = check_porosity(gset, p["L"], list(p["depths"]))
    ctx.write_json("report.json", report)
    ctx.checks["porous"] = report.porous()


def _run_conformal(ctx: RunContext) -> None:
    from .conformal import asymptotics_report, elliptic_L, elliptic_H

    rows = []
    ok = True
    for q in ctx.params["q"]:
        rep = asymptotics_report(q)
        rows.append([
            rep.q, rep.k, elliptic_L(rep.k), elliptic_H(rep.k),
            rep.theta_num, rep.theta_asym,
            rep.delta1_num, rep.delta1_asym,
            rep.delta2_num, rep.delta2_asym,
            rep.rel_dev_theta, rep.rel_dev_delta1, rep.rel_dev_delta2,
        ])
        ok = ok and max(rep.rel_devs()) <= 3.0 * q
    ctx.write_csv(
        "conformal.csv",
        ["q", "k", "L_k", "H_k", "theta_num", "theta_asym",
         "delta1_num", "delta1_asym", "delta2_num", "delta2_asym",
         "rel_dev_theta", "rel_dev_delta1", "rel_dev_delta2"],
        rows,
    )
    ctx.checks["rel_dev_within_3q"] = ok


def _run_cartan(ctx: RunContext) -> None:
    import numpy as np

    from .potential_theory import PointMasses, cartan_disks, log_potential

    p = ctx.params
    reports = []
    all_ok = True
    for seed in p["seeds"]:
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-1.0, 1.0, p["masses"]) + 1j * rng.uniform(
            -1.0, 1.0, p["masses"])
        w = rng.uniform(0.2, 1.0, p["masses"])
        w = w / w.sum()
        masses = PointMasses(pts, w)
        for H in p["H"]:
            cover = cartan_disks(masses, H, probe_count=p["probes"], seed=seed)
            probe_rng = np.random.default_rng(10_000 + seed)
            z = probe_rng.uniform(-2.0, 2.0, p["probes"]) + 1j * probe_rng.uniform(
                -2.0, 2.0, p["probes"])
            outside = ~cover.contains(z)
            bound = masses.total * math.log(H / math.e)
            u = log_potential(z[outside], masses)
            violations = int(np.sum(u < bound - 1e-12))
            radii_ok = cover.radius_sum <= 5.0 * H + 1e-12
            ok = violations == 0 and radii_ok
            all_ok = all_ok and ok
            reports.append({
                "seed": seed, "H": H, "total_mass": masses.total,
                "disks": int(cover.radii.size),
                "sum_radii": float(cover.radius_sum),
                "radii_budget_ok": bool(radii_ok),
                "probes_outside": int(np.sum(outside)),
                "violations": violations,
                "bound": bound,
                "ok": bool(ok),
            })
    ctx.write_json("reports.json", reports)
    ctx.checks["cartan_bound"] = all_ok


def _run_localization(ctx: RunContext) -> None:
    from .localization import (IntervalFamily, TorusGrid, band_limited_sample,
                               localization_check)

    p = ctx.params
    if p["placement"] not in ("fixed", "random"):
        raise ConfigError("placement must be fixed or random")
    if p["d"] not in (1, 2):
        raise ConfigError("d must be 1 or 2")
    if any(not 0.0 < q <= 0.25 for q in p["q"]):
        raise ConfigError("q values must lie in (0, 0.25]")
    if any(not 0.0 < lam <= 0.5 for lam in p["lambda"]):
        raise ConfigError("lambda values must lie in (0, 0.5]")
    grid = TorusGrid(p["d"], p["half_period"], p["points_per_cell"])
    rows = []
    ok = True
    for lam in p["lambda"]:
        family = IntervalFamily(p["d"], lam, p["half_period"],
                                placement=p["placement"], offset=p["offset"],
                                seed=ctx.rng_seed())
        for seed in p["seeds"]:
            f = band_limited_sample(seed, p["band"], p["d"], grid)
            for q in p["q"]:
                rep = localization_check(f, family, q, c_tilde=p["c_tilde"])
                finite = math.isfinite(rep.empirical_constant) and not rep.degenerate
                ok = ok and finite
                rows.append([
                    p["d"], q, lam, seed, p["band"], rep.kappa_used,
                    rep.lhs, rep.sum_local, rep.weight_norm,
                    rep.empirical_constant,
                    math.log(rep.empirical_constant) if rep.empirical_constant > 0
                    else float("nan"),
                    rep.quantization_error, rep.degenerate,
                ])
    ctx.write_csv(
        "cases.csv",
        ["d", "q", "lambda", "seed", "band", "kappa", "lhs", "sum_local",
         "weight_norm", "empirical_constant", "log_empirical_constant",
         "quantization_error", "degenerate"],
        rows,
    )
    ctx.checks["all_finite"] = ok


def _run_damping(ctx: RunContext) -> None:
    import numpy as np

    from .damping import (AdmissibleFrame, CoverSpec, build_regular_damping,
                          product_damping, verify_damping)
    from .regular_sets import gridset_from_json

    p = ctx.params
    if bool(p["set"]) == bool(p["frame"]):
        raise ConfigError("damping needs exactly one of set= or frame=")
    if not 0.0 < p["c1"] <= 1.0:
        raise ConfigError("c1 must lie in (0, 1]")
    kwargs = {"iota": p["iota"], "leakage_tol": p["leakage_tol"]}
    if p["set"]:
        y = _load_gridset(p["set"])
        psi = build_regular_damping(y, p["c1"], delta=p["delta"], **kwargs)
        report = verify_damping(psi, y, leakage_tol=p["leakage_tol"])
    else:
        try:
            blob = json.loads(Path(p["frame"]).read_text(encoding="utf-8"))
            covers = tuple(
                CoverSpec(
                    e1=tuple(c["e1"]), e2=tuple(c["e2"]),
                    Y1=gridset_from_json(json.dumps(c["Y1"])),
                    Y2=gridset_from_json(json.dumps(c["Y2"])),
                )
                for c in blob["covers"]
            )
            frame = AdmissibleFrame(covers, epsilon0=blob.get("epsilon0", 0.05))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid frame file: {exc}") from None
        psi = product_damping(frame, p["c1"], **kwargs)
        report = verify_damping(psi, frame, leakage_tol=p["leakage_tol"])
    payload = {
        "dimension": psi.dimension,
        "c1": psi.c1, "c2": psi.c2, "c3": psi.c3, "alpha": psi.alpha,
        "support_target": psi.support_target,
        "meta": psi.meta,
        "report": report,
    }
    ctx.write_json("psi.json", payload)
    if p["export_arrays"]:
        stride = max(1, p["stride"])
        if psi.dimension == 1:
            xs = psi.physical_axes[0][::stride]
            vals = psi.physical[::stride]
            ctx.write_csv("psi_phys.csv", ["x", "re", "im"],
                          [[float(x), float(v.real), float(v.imag)]
                           for x, v in zip(xs, vals)])
            fs = psi.spectral_axes[0][::stride]
            svals = psi.spectral[::stride]
            ctx.write_csv("psi_spec.csv", ["xi", "re", "im"],
                          [[float(x), float(v.real), float(v.imag)]
                           for x, v in zip(fs, svals)])
        else:
            # 2-D products are separable: export each cover's 1-D factors
            for j, (_matrix, psi_a, psi_b) in enumerate(psi.components):
                for tag, factor in (("a", psi_a), ("b", psi_b)):
                    fs = factor.spectral_axes[0][::stride]
                    svals = factor.spectral[::stride]
                    ctx.write_csv(f"psi_cover{j}{tag}_spec.csv",
                                  ["xi", "re", "im"],
                                  [[float(x), float(v.real), float(v.imag)]
                                   for x, v in zip(fs, svals)])
    ctx.checks.update({name: bool(v) for name, v in report.passes.items()})


def _run_fup_scan(ctx: RunContext) -> None:
    from .fup_operator import (FupInstance, distorted_fup_norm,
                               fup_decay_curve)
    from .regular_sets import CantorSpec, build_cantor, scale_shift

    p = ctx.params
    base, alphabet, dim = p["base"], tuple(p["alphabet"]), p["dimension"]
    if p["spec"]:
        try:
            blob = json.loads(Path(p["spec"]).read_text(encoding="utf-8"))
            base = int(blob["base"])
            alphabet = tuple(int(a) for a in blob["alphabet"])
            dim = int(blob.get("dimension", 1))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid family spec file: {exc}") from None
    try:
        family = CantorSpec(base=base, alphabet=alphabet, depth=1,
                            dimension=dim, extent=((0.0, 1.0),) * dim)
    except ValueError as exc:
        raise ConfigError(f"invalid Cantor family: {exc}") from None

    if p["rotate"] and dim != 2:
        raise ConfigError("rotate requires dimension = 2")
    diffeo = _parse_diffeo(p["diffeo"], dim) if p["diffeo"] else None
    if diffeo is None:
        curve = fup_decay_curve(family, p["k"],
                                oversample=p["oversample"],
                                rotate_degrees=p["rotate"])
        rows = [[pt.k, pt.N, pt.dimension, pt.norm, pt.method, pt.residual]
                for pt in curve.points]
        diag = {
            "beta_hat": curve.beta_hat, "r_squared": curve.r_squared,
            "residual_max": curve.residual_max,
            "excluded_k1": curve.excluded_k1,
        }
    else:
        if p["rotate"]:
            raise ConfigError("rotate and diffeo cannot be combined")
        ov_f = max(1, math.ceil(4 * dim * diffeo.d0))
        rows = []
        logs = []
        for k in sorted(p["k"]):
            n_scale = float(base**k)
            spec_k = CantorSpec(base=base, alphabet=alphabet, depth=k,
                                dimension=dim, extent=((0.0, 1.0),) * dim)
            unit = build_cantor(spec_k)
            X = scale_shift(unit, 2.0, (-1.0,) * dim)
            Y = scale_shift(unit, 2.0 * n_scale, (-n_scale,) * dim)
            inst = FupInstance(N=n_scale, X=X, Y=Y,
                               oversample=p["oversample"],
                               freq_oversample=ov_f, distortion=diffeo)
            norm = distorted_fup_norm(inst)
            rows.append([k, n_scale, dim, norm, "quadrature", 0.0])
            logs.append((math.log(n_scale), -math.log(norm)))
        xs = [a for a, _ in logs]
        ys = [b for _, b in logs]
        n = len(xs)
        if n >= 2:
            xbar, ybar = sum(xs) / n, sum(ys) / n
            beta = sum((x - xbar) * (y - ybar) for x, y in logs) / max(
                sum((x - xbar) ** 2 for x in xs), 1e-300)
        else:
            beta = float("nan")
        diag = {"beta_hat": beta, "freq_oversample": ov_f,
                "diffeo": {"family": diffeo.kind,
                           "amplitude": diffeo.amplitude, "d0": diffeo.d0}}
    ctx.write_csv("curve.csv", ["k", "N", "dim", "norm", "method", "residual"],
                  rows)
    ctx.write_json("beta.json", diag)
    ctx.checks["norms_at_most_one"] = all(row[3] <= 1.0 + 1e-9 for row in rows)


def _run_constants(ctx: RunContext) -> None:
    from .constants import ChainInputs, beta_chain, choose_L, damping_params

    p = ctx.params
    bits = max(64, int(math.ceil(ctx.run["precision"] * math.log2(10))) + 16)
    inputs = ChainInputs(d=p["d"], delta=p["delta"], delta1=p["delta1"],
                         C_R=p["CR"], eps0=p["eps0"], iota=p["iota"],
                         m=p["m"], q_star=p["q_star"], precision=bits)
    chain = beta_chain(inputs)
    dp = damping_params(1.0 / (2.0 * chain.L), C_R=p["CR"], delta1=p["delta1"],
                        m=p["m"], d=p["d"], iota=p["iota"], q_star=p["q_star"])
    audit = {
        "inputs": inputs,
        "L": chain.L,
        "dominant_case": chain.dominant_case,
        "clamps": chain.clamps,
        "notes": chain.notes,
        "values": chain.render(),
        "log_magnitudes": chain.log_magnitudes(),
        "choose_L": choose_L(p["d"], p["delta"], p["CR"]),
        "damping_params": dp,
    }
    ctx.write_json("audit.json", audit)
    ctx.checks["chain_evaluated"] = True


def _run_distort_scan(ctx: RunContext) -> None:
    from .fup_operator import (DiffeoSpec, FupInstance, assemble_operator,
                               distorted_fup_norm, operator_norm)
    from .regular_sets import CantorSpec, build_cantor, scale_shift

    p = ctx.params
    dim = p["dimension"]
    try:
        diffeo = DiffeoSpec(kind=p["family"], dimension=dim,
                            amplitude=p["amplitude"], d0=p["d0"])
    except ValueError as exc:
        raise ConfigError(f"invalid distortion: {exc}") from None
    ov_f = max(1, math.ceil(4 * dim * diffeo.d0))
    rows = []
    for k in sorted(p["k"]):
        n_scale = float(p["base"] ** k)
        spec_k = CantorSpec(base=p["base"], alphabet=tuple(p["alphabet"]),
                            depth=k, dimension=dim,
                            extent=((0.0, 1.0),) * dim)
        unit = build_cantor(spec_k)
        X = scale_shift(unit, 2.0, (-1.0,) * dim)
        Y = scale_shift(unit, 2.0 * n_scale, (-n_scale,) * dim)
        inst_d = FupInstance(N=n_scale, X=X, Y=Y, oversample=p["oversample"],
                             freq_oversample=ov_f, distortion=diffeo)
        norm_d = distorted_fup_norm(inst_d)
        inst_s = FupInstance(N=n_scale, X=X, Y=Y, oversample=p["oversample"],
                             freq_oversample=ov_f)
        norm_s, resid, _it = operator_norm(assemble_operator(inst_s))
        rows.append([k, n_scale, dim, norm_s, norm_d,
                     norm_d / norm_s if norm_s else float("nan"), resid])
    ctx.write_csv(
        "distort.csv",
        ["k", "N", "dim", "norm_straight", "norm_distorted", "ratio",
         "residual"],
        rows,
    )
    ctx.write_json("diffeo.json", {
        "family": diffeo.kind, "amplitude": diffeo.amplitude,
        "d0": diffeo.d0, "freq_oversample": ov_f,
        "derivative_checks": diffeo.validate(),
    })
    ctx.checks["ratios_finite"] = all(math.isfinite(r[5]) for r in rows)


HANDLERS = {
    "cantor": _run_cantor,
    "regularity": _run_regularity,
    "porosity": _run_porosity,
    "conformal-check": _run_conformal,
    "cartan-check": _run_cartan,
    "localization": _run_localization,
    "damping": _run_damping,
    "fup-scan": _run_fup_scan,
    "constants": _run_constants,
    "distort-scan": _run_distort_scan,
}


# ---------------------------------------------------------------------------
# driver


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuplab",
        description="numerical laboratory for fractal uncertainty experiments",
        allow_abbrev=False,
    )
    parser.add_argument("--config", help="INI config file", default=None)
    sub = parser.add_subparsers(dest="kind", metavar="kind")
    for kind, opts in KIND_OPTS.items():
        sp = sub.add_parser(kind, allow_abbrev=False,
                            help=f"run the {kind} experiment")
        for key, opt in opts.items():
            flag = _FLAG_NAMES.get(key, "--" + key.replace("_", "-"))
            sp.add_argument(flag, dest=key, type=str, default=None,
                            help=opt.help)
        for key, opt in GLOBAL_OPTS.items():
            sp.add_argument("--" + key, dest=key, type=str, default=None,
                            help=opt.help)
    return parser


def _outdir_for(kind: str, run: dict) -> Path:
    if run["out"]:
        return Path(run["out"])
    root = os.environ.get("FUPLAB_OUT", "fuplab_runs")
    return Path(root) / kind


def main(argv: list | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.kind is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        file_cfg = _load_config_file(args.config) if args.config else {}
        cli_vals = {k: v for k, v in vars(args).items()
                    if k not in ("kind", "config")}
        params, run = _resolve(args.kind, file_cfg, cli_vals)
        if run["threads"] < 1:
            raise ConfigError("threads must be >= 1")
    except ConfigError as exc:
        print(f"fuplab: config error: {exc}", file=sys.stderr)
        return 2

    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(run["threads"])

    outdir = _outdir_for(args.kind, run)
    ctx = RunContext(args.kind, params, run, outdir)
    status = "pass"
    error: dict | None = None
    try:
        # late validation that needs module imports still counts as config
        HANDLERS[args.kind](ctx)
    except ConfigError as exc:
        # no partial outputs on configuration errors
        for name in ctx.artifacts:
            try:
                (outdir / name).unlink()
            except OSError:
                pass
        print(f"fuplab: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        status = "contract-violation"
        error = {"type": type(exc).__name__, "message": str(exc)}
        ctx.write_json("error.json", error)
    if status == "pass" and not all(ctx.checks.values()):
        status = "checks-failed"

    manifest = {
        "kind": ctx.kind,
        "params": _jsonable(ctx.params),
        "run": _jsonable(ctx.run),
        "resolved_out": str(outdir),
        "artifacts": ctx.artifacts,
        "checks": _jsonable(ctx.checks),
        "status": status,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "package": "fuplab",
    }
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    if status == "contract-violation":
        print(f"fuplab: contract violation: {error['message']}", file=sys.stderr)
        return 3
    if status == "checks-failed":
        failed = [k for k, v in ctx.checks.items() if not v]
        print(f"fuplab: checks failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
