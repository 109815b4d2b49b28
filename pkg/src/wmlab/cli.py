"""Command line interface.

Every subcommand reads an optional JSON config (validated against a
strict schema: unknown keys are rejected), applies a few flag overrides
(--N, --seed, --out, --threads), runs the computation and writes its
artifacts into the output directory:

* a CSV with the numbers (efficiency curves share one canonical column
  set; other commands have their own small formats),
* a best-effort SVG chart where a curve makes sense,
* a ``manifest.json`` recording the effective configuration, which keys
  came from defaults, the package version, wall time and the artifact
  list.

CSV artifacts are byte-identical across reruns and thread counts; the
manifest is not (it contains the wall time).

Exit codes: 0 success; 2 configuration error (bad JSON, schema
violation, invalid parameter values); 3 numerical-integrity failure,
with a JSON diagnostic dump on stderr.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np

from . import __version__
from .diagnostics import (
    VerdictInput,
    cm_equivalence_constants,
    cross_gram,
    hs_curve,
    table1_verdict,
    verdict_input_from_models,
)
from .errors import (
    AssemblyIntegrityError,
    ConditioningError,
    DegenerateTargetError,
    NumericalIntegrityError,
    WmlabError,
)
from .fem1d import DIRICHLET, DIRICHLET_LAPLACE, assemble_aL, build_basis
from .kriging import (
    _model_covariance,
    curve_rows,
    efficiency_curve_integral,
    efficiency_curve_point,
    write_curves_csv,
)
from .matern import compare_fem_vs_matern
from .matio import write_eigenvalues_csv, write_matrix
from .model_config import BUILTIN_MODEL_NAMES, builtin_model, model_from_dict
from .spectral import covariance_weights, generalized_eig, sample_field


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------
# schemas and defaults

_FIELD_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {
            "enum": [
                "constant",
                "polynomial",
                "sigmoid_scaled",
                "sigmoid_reciprocal",
                "tabulated",
            ]
        },
        "params": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
    "required": ["kind", "params"],
    "additionalProperties": False,
}

_MODEL_REF_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "name": {"enum": list(BUILTIN_MODEL_NAMES)},
                "beta": {"type": "number"},
                "delta": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["name", "beta"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "beta": {"type": "number"},
                "a": _FIELD_SCHEMA,
                "kappa2": _FIELD_SCHEMA,
                "tau": {"type": "number", "exclusiveMinimum": 0},
                "basis_order": {"type": "integer", "minimum": 1, "maximum": 3},
            },
            "required": ["beta", "a", "kappa2", "tau"],
            "additionalProperties": False,
        },
    ]
}

_POSITIVE_INT_ARRAY = {
    "type": "array",
    "items": {"type": "integer", "minimum": 1},
    "minItems": 1,
}

_COMMON_PROPS = {
    "N": {"type": "integer", "minimum": 10},
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string", "minLength": 1},
    "threads": {"type": "integer", "minimum": 1},
    "svg": {"type": "boolean"},
}

_MODELS_PROP = {
    "type": "array",
    "items": {"enum": ["model1", "model2"]},
    "minItems": 1,
    "uniqueItems": True,
}


def _schema(extra_props, required=()):
    props = dict(_COMMON_PROPS)
    props.update(extra_props)
    return {
        "type": "object",
        "properties": props,
        "required": list(required),
        "additionalProperties": False,
    }


_FIG_N_VALUES_DEFAULT = [10, 20, 50, 100, 200, 300, 400, 500]

SCHEMAS = {
    "fig1_integral": _schema(
        {
            "deltas": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "models": _MODELS_PROP,
            "n_values": _POSITIVE_INT_ARRAY,
            "per_target": {"type": "boolean"},
        }
    ),
    "fig1_point": _schema(
        {
            "deltas": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "models": _MODELS_PROP,
            "n_values": _POSITIVE_INT_ARRAY,
            "s0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "delta_o": {
                "type": "number",
                "exclusiveMinimum": 0,
                "exclusiveMaximum": 0.5,
            },
        }
    ),
    "fig2": _schema(
        {
            "betas": {
                "type": "array",
                "items": {"enum": [1, 2, 3]},
                "minItems": 1,
                "uniqueItems": True,
            },
            "models": _MODELS_PROP,
            "n_values": _POSITIVE_INT_ARRAY,
            "per_target": {"type": "boolean"},
        }
    ),
    "matern_check": _schema(
        {
            "model": _MODEL_REF_SCHEMA,
            "offsets": {
                "type": "array",
                "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
                "minItems": 1,
            },
        }
    ),
    "diagnose": _schema(
        {
            "base_model": _MODEL_REF_SCHEMA,
            "alt_model": _MODEL_REF_SCHEMA,
            "gamma": {"type": "number"},
            "c": {"type": "number", "exclusiveMinimum": 0},
            "truncations": _POSITIVE_INT_ARRAY,
            "cm_beta": {"type": "number", "exclusiveMinimum": 0.25},
        },
        required=("base_model", "alt_model"),
    ),
    "verdict": {
        "type": "object",
        "oneOf": [
            {
                "type": "object",
                "properties": {
                    "out": _COMMON_PROPS["out"],
                    "d": {"type": "integer", "minimum": 1},
                    "beta": {"type": "number"},
                    "beta_alt": {"type": "number"},
                    "a_relation": {"enum": ["equal", "proportional", "different"]},
                    "a_ratio": {"type": "number", "exclusiveMinimum": 0},
                    "kappa2_boundary_base": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 4,
                        "maxItems": 4,
                    },
                    "kappa2_boundary_alt": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 4,
                        "maxItems": 4,
                    },
                    "mean_diff_in_cm": {"type": ["boolean", "null"]},
                    "kappa2_equal": {"type": ["boolean", "null"]},
                    "higher_traces_zero": {"type": ["boolean", "null"]},
                },
                "required": ["beta", "beta_alt", "a_relation"],
                "additionalProperties": False,
            },
            {
                "type": "object",
                "properties": {
                    "out": _COMMON_PROPS["out"],
                    "d": {"type": "integer", "minimum": 1},
                    "base_model": _MODEL_REF_SCHEMA,
                    "alt_model": _MODEL_REF_SCHEMA,
                    "mean_diff_in_cm": {"type": ["boolean", "null"]},
                    "higher_traces_zero": {"type": ["boolean", "null"]},
                },
                "required": ["base_model", "alt_model"],
                "additionalProperties": False,
            },
        ],
    },
    "sample": _schema(
        {
            "model": _MODEL_REF_SCHEMA,
            "n_samples": {"type": "integer", "minimum": 1},
            "format": {"enum": ["csv", "bin"]},
        }
    ),
}

DEFAULTS = {
    "fig1_integral": {
        "N": 1000,
        "seed": 0,
        "out": "out/fig1_integral",
        "threads": 1,
        "svg": True,
        "deltas": [1.0, 10.0, 100.0],
        "models": ["model1", "model2"],
        "n_values": _FIG_N_VALUES_DEFAULT,
        "per_target": False,
    },
    "fig1_point": {
        "N": 1000,
        "seed": 0,
        "out": "out/fig1_point",
        "threads": 1,
        "svg": True,
        "deltas": [1.0, 10.0, 100.0],
        "models": ["model1", "model2"],
        "n_values": list(range(10, 100, 10)),
        "s0": 0.5,
        "delta_o": 0.01,
    },
    "fig2": {
        "N": 1000,
        "seed": 0,
        "out": "out/fig2",
        "threads": 1,
        "svg": True,
        "betas": [1, 2, 3],
        "models": ["model1", "model2"],
        "n_values": _FIG_N_VALUES_DEFAULT,
        "per_target": False,
    },
    "matern_check": {
        "N": 1000,
        "seed": 0,
        "out": "out/matern_check",
        "threads": 1,
        "svg": False,
        "model": {"name": "base41", "beta": 1},
        "offsets": [0.0, 0.005, 0.01, 0.02, 0.05, 0.1],
    },
    "diagnose": {
        "N": 800,
        "seed": 0,
        "out": "out/diagnose",
        "threads": 1,
        "svg": False,
        "gamma": 1.0,
        "c": 1.0,
        "truncations": [100, 200, 400, 800],
    },
    "verdict": {
        "out": "out/verdict",
        "d": 1,
    },
    "sample": {
        "N": 1000,
        "seed": 0,
        "out": "out/sample",
        "threads": 1,
        "svg": False,
        "model": {"name": "base41", "beta": 1},
        "n_samples": 10,
        "format": "csv",
    },
}


def load_config(command, config_path, overrides):
    """Read + validate the JSON config, apply flag overrides and defaults.

    Returns (effective_config, defaulted_keys).
    """
    user = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config is not valid JSON: line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")

    schema = SCHEMAS[command]
    for key, value in overrides.items():
        if value is None:
            continue
        allowed = set(schema.get("properties", {}))
        if not allowed:  # oneOf-style schema (verdict)
            for branch in schema.get("oneOf", []):
                allowed |= set(branch.get("properties", {}))
        if key not in allowed:
            raise ConfigError(f"flag --{key} is not applicable to '{command}'")
        user[key] = value

    validator = jsonschema.Draft202012Validator(schema)
    err = jsonschema.exceptions.best_match(validator.iter_errors(user))
    if err is not None:
        path = "".join(
            f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path
        )
        raise ConfigError(f"config field '{path or '.'}': {err.message}")

    defaults = DEFAULTS[command]
    effective = dict(defaults)
    effective.update(user)
    defaulted = sorted(set(defaults) - set(user))
    return effective, defaulted


# ---------------------------------------------------------------------
# shared helpers

def _resolve_model(ref):
    if "name" in ref:
        return builtin_model(ref["name"], ref["beta"], ref.get("delta", 10.0))
    return model_from_dict(ref)


def _covariance_for(model, N):
    """(basis, covariance) by the appropriate route for the exponent."""
    b = model.beta
    is_int = abs(b - round(b)) < 1e-12 and int(round(b)) in (1, 2, 3)
    mode = DIRICHLET_LAPLACE if (is_int and int(round(b)) == 3) else DIRICHLET
    basis = build_basis(int(N), model.basis_order, mode)
    if is_int:
        return basis, _model_covariance(model, basis)
    ops = assemble_aL(basis, model.a, model.kappa2)
    dec = generalized_eig(ops)
    return basis, covariance_weights(dec, b, model.tau)


def _write_manifest(outdir, command, cfg, defaulted, artifacts, t0):
    manifest = {
        "command": command,
        "config": cfg,
        "defaulted_keys": list(defaulted),
        "version": __version__,
        "wall_time_seconds": time.time() - t0,
        "artifacts": sorted(artifacts),
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


_SVG_COLORS = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


def write_svg_log_curves(path, title, series, xlabel="n", ylabel="value"):
    """Minimal hand-rolled SVG: polylines on a log10 y axis.

    ``series`` is a list of (label, xs, ys); nonpositive ys are skipped
    (they cannot appear on a log axis). Purely deterministic output.
    """
    W, H = 840, 520
    ml, mr, mt, mb = 80, 200, 48, 56
    pw, ph = W - ml - mr, H - mt - mb
    pts = [
        (float(x), float(y))
        for _, xs, ys in series
        for x, y in zip(xs, ys)
        if y > 0.0
    ]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{ml}" y="26" font-family="sans-serif" font-size="16" '
        f'fill="#222222">{title}</text>',
    ]
    if not pts:
        out.append(
            f'<text x="{ml}" y="{mt + 40}" font-family="sans-serif" '
            f'font-size="13" fill="#666666">no positive values to plot</text>'
        )
        out.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
        return
    xmin = min(p[0] for p in pts)
    xmax = max(p[0] for p in pts)
    if xmax == xmin:
        xmin, xmax = xmin - 1.0, xmax + 1.0
    lo = math.floor(math.log10(min(p[1] for p in pts)))
    hi = math.ceil(math.log10(max(p[1] for p in pts)))
    if hi <= lo:
        hi = lo + 1

    def sx(x):
        return ml + pw * (x - xmin) / (xmax - xmin)

    def sy(y):
        return mt + ph * (hi - math.log10(y)) / (hi - lo)

    out.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#444444"/>'
    )
    for dec in range(lo, hi + 1):
        y = mt + ph * (hi - dec) / (hi - lo)
        out.append(
            f'<line x1="{ml}" y1="{y:.2f}" x2="{ml + pw}" y2="{y:.2f}" '
            f'stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="#222222">1e{dec}</text>'
        )
    xticks = sorted({x for _, xs, _ in series for x in xs})
    if len(xticks) > 10:
        idx = np.linspace(0, len(xticks) - 1, 8).round().astype(int)
        xticks = [xticks[i] for i in sorted(set(idx))]
    for x in xticks:
        out.append(
            f'<line x1="{sx(x):.2f}" y1="{mt + ph}" x2="{sx(x):.2f}" '
            f'y2="{mt + ph + 5}" stroke="#444444"/>'
        )
        label = str(int(x)) if float(x).is_integer() else f"{x:g}"
        out.append(
            f'<text x="{sx(x):.2f}" y="{mt + ph + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" fill="#222222">{label}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2:.2f}" y="{H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" fill="#222222">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{mt + ph / 2:.2f}" font-family="sans-serif" '
        f'font-size="12" fill="#222222" '
        f'transform="rotate(-90 20 {mt + ph / 2:.2f})">{ylabel}</text>'
    )
    for k, (label, xs, ys) in enumerate(series):
        color = _SVG_COLORS[k % len(_SVG_COLORS)]
        seg = []
        segments = []
        for x, y in zip(xs, ys):
            if y > 0.0:
                seg.append(f"{sx(float(x)):.2f},{sy(float(y)):.2f}")
            else:
                if len(seg) >= 2:
                    segments.append(seg)
                seg = []
        if len(seg) >= 2:
            segments.append(seg)
        for seg in segments:
            out.append(
                f'<polyline points="{" ".join(seg)}" fill="none" '
                f'stroke="{color}" stroke-width="1.8"/>'
            )
        for x, y in zip(xs, ys):
            if y > 0.0:
                out.append(
                    f'<circle cx="{sx(float(x)):.2f}" cy="{sy(float(y)):.2f}" '
                    f'r="2.6" fill="{color}"/>'
                )
        ly = mt + 16 + 18 * k
        out.append(
            f'<line x1="{ml + pw + 14}" y1="{ly - 4}" x2="{ml + pw + 38}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{ml + pw + 44}" y="{ly}" font-family="sans-serif" '
            f'font-size="12" fill="#222222">{label}</text>'
        )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _run_cells(jobs, threads):
    """Run keyed thunks, possibly in a thread pool; collect in key order.

    ``jobs`` is a list of (key, callable); the result is a list of
    (key, value) in the original (deterministic) order regardless of
    completion order or pool width.
    """
    if threads <= 1 or len(jobs) <= 1:
        return [(key, fn()) for key, fn in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [(key, pool.submit(fn)) for key, fn in jobs]
        return [(key, fut.result()) for key, fut in futures]


# ---------------------------------------------------------------------
# subcommands

def run_fig1_integral(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    base = builtin_model("base41", 1)

    def make_job(label, delta):
        def job():
            missp = builtin_model(f"{label}_41", 1, delta)
            return efficiency_curve_integral(
                base,
                missp,
                cfg["N"],
                n_values=cfg["n_values"],
                keep_per_target=cfg["per_target"],
            )

        return job

    jobs = [
        ((label, float(delta)), make_job(label, float(delta)))
        for label in sorted(cfg["models"])
        for delta in cfg["deltas"]
    ]
    results = _run_cells(jobs, cfg["threads"])

    rows = []
    series = []
    for (label, delta), curve in results:
        rows.extend(
            curve_rows(
                "fig1_integral", label, 1.0, delta, curve, per_target=cfg["per_target"]
            )
        )
        series.append(
            (f"{label} delta={delta:g}", list(curve.n_values), list(curve.e_max))
        )
    csv_path = os.path.join(outdir, "fig1_integral.csv")
    write_curves_csv(csv_path, rows)
    artifacts = [csv_path]
    if cfg["svg"]:
        svg_path = os.path.join(outdir, "fig1_integral.svg")
        write_svg_log_curves(
            svg_path,
            "worst-case efficiency loss, integral observations",
            series,
            xlabel="number of observations n",
            ylabel="max efficiency loss",
        )
        artifacts.append(svg_path)
    artifacts.append(
        _write_manifest(outdir, "fig1_integral", cfg, defaulted, artifacts, t0)
    )
    print(f"fig1_integral: wrote {csv_path}")
    return 0


def run_fig1_point(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    base = builtin_model("base41", 1)

    def make_job(label, delta):
        def job():
            missp = builtin_model(f"{label}_41", 1, delta)
            return efficiency_curve_point(
                base,
                missp,
                cfg["N"],
                n_values=cfg["n_values"],
                s0=cfg["s0"],
                delta_o=cfg["delta_o"],
            )

        return job

    jobs = [
        ((label, float(delta)), make_job(label, float(delta)))
        for label in sorted(cfg["models"])
        for delta in cfg["deltas"]
    ]
    results = _run_cells(jobs, cfg["threads"])

    rows = []
    series = []
    for (label, delta), curve in results:
        rows.extend(curve_rows("fig1_point", label, 1.0, delta, curve))
        series.append(
            (f"{label} delta={delta:g}", list(curve.n_values), list(curve.e_max))
        )
    csv_path = os.path.join(outdir, "fig1_point.csv")
    write_curves_csv(csv_path, rows)
    artifacts = [csv_path]
    if cfg["svg"]:
        svg_path = os.path.join(outdir, "fig1_point.svg")
        write_svg_log_curves(
            svg_path,
            "efficiency loss predicting z(s0), point observations",
            series,
            xlabel="number of observations n",
            ylabel="efficiency loss",
        )
        artifacts.append(svg_path)
    artifacts.append(
        _write_manifest(outdir, "fig1_point", cfg, defaulted, artifacts, t0)
    )
    print(f"fig1_point: wrote {csv_path}")
    return 0


def run_fig2(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)

    def make_job(label, beta):
        def job():
            true_model = builtin_model("base42", beta)
            missp = builtin_model(f"{label}_42", beta)
            return efficiency_curve_integral(
                true_model,
                missp,
                cfg["N"],
                n_values=cfg["n_values"],
                keep_per_target=cfg["per_target"],
            )

        return job

    jobs = [
        ((label, int(beta)), make_job(label, int(beta)))
        for label in sorted(cfg["models"])
        for beta in sorted(cfg["betas"])
    ]
    results = _run_cells(jobs, cfg["threads"])

    rows = []
    series = []
    for (label, beta), curve in results:
        rows.extend(
            curve_rows("fig2", label, float(beta), None, curve, per_target=cfg["per_target"])
        )
        series.append((f"{label} beta={beta}", list(curve.n_values), list(curve.e_max)))
    csv_path = os.path.join(outdir, "fig2.csv")
    write_curves_csv(csv_path, rows)
    artifacts = [csv_path]
    if cfg["svg"]:
        svg_path = os.path.join(outdir, "fig2.svg")
        write_svg_log_curves(
            svg_path,
            "worst-case efficiency loss, polynomial reaction perturbations",
            series,
            xlabel="number of observations n",
            ylabel="max efficiency loss",
        )
        artifacts.append(svg_path)
    artifacts.append(
        _write_manifest(outdir, "fig2", cfg, defaulted, artifacts, t0)
    )
    print(f"fig2: wrote {csv_path}")
    return 0


def run_matern_check(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    model = _resolve_model(cfg["model"])
    basis, cov = _covariance_for(model, cfg["N"])
    comparison = compare_fem_vs_matern(model, cov, basis, cfg["offsets"])
    csv_path = os.path.join(outdir, "matern_check.csv")
    comparison.write_csv(csv_path)
    artifacts = [csv_path]
    artifacts.append(
        _write_manifest(outdir, "matern_check", cfg, defaulted, artifacts, t0)
    )
    print(
        f"matern_check: max relative error {comparison.max_rel_error:.6g} "
        f"over {len(cfg['offsets'])} offsets"
    )
    return 0


def run_diagnose(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    base = _resolve_model(cfg["base_model"])
    alt = _resolve_model(cfg["alt_model"])
    N = cfg["N"]
    truncations = [t for t in cfg["truncations"] if t <= N]
    if not truncations:
        raise ConfigError(f"all truncations exceed N={N}")
    basis = build_basis(int(N), 1, DIRICHLET)
    ops_base = assemble_aL(basis, base.a, base.kappa2)
    ops_alt = assemble_aL(basis, alt.a, alt.kappa2)
    dec_base = generalized_eig(ops_base)
    dec_alt = generalized_eig(ops_alt)
    pair = cross_gram(dec_base, dec_alt, ops_base.M)
    report = hs_curve(pair, cfg["gamma"], cfg["c"], truncations)
    payload = report.to_dict()
    if "cm_beta" in cfg:
        by_trunc = {
            str(t): list(cm_equivalence_constants(pair, cfg["cm_beta"], t))
            for t in truncations
        }
        payload["cm_beta"] = cfg["cm_beta"]
        payload["cm_constants_by_truncation"] = by_trunc

    csv_path = os.path.join(outdir, "diagnose.csv")
    report.write_csv(csv_path)
    json_path = os.path.join(outdir, "diagnose.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    eig_base_path = os.path.join(outdir, "eigenvalues_base.csv")
    eig_alt_path = os.path.join(outdir, "eigenvalues_alt.csv")
    write_eigenvalues_csv(eig_base_path, dec_base.eigenvalues)
    write_eigenvalues_csv(eig_alt_path, dec_alt.eigenvalues)
    artifacts = [csv_path, json_path, eig_base_path, eig_alt_path]
    artifacts.append(
        _write_manifest(outdir, "diagnose", cfg, defaulted, artifacts, t0)
    )
    print(f"diagnose: classification = {report.classification}")
    return 0


def run_verdict(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    if "base_model" in cfg:
        base = _resolve_model(cfg["base_model"])
        alt = _resolve_model(cfg["alt_model"])
        vin = verdict_input_from_models(
            base,
            alt,
            d=cfg["d"],
            mean_diff_in_cm=cfg.get("mean_diff_in_cm"),
            higher_traces_zero=cfg.get("higher_traces_zero"),
        )
    else:
        vin = VerdictInput(
            d=cfg["d"],
            beta=cfg["beta"],
            beta_alt=cfg["beta_alt"],
            a_relation=cfg["a_relation"],
            a_ratio=cfg.get("a_ratio", 1.0),
            kappa2_boundary_base=(
                tuple(cfg["kappa2_boundary_base"])
                if "kappa2_boundary_base" in cfg
                else None
            ),
            kappa2_boundary_alt=(
                tuple(cfg["kappa2_boundary_alt"])
                if "kappa2_boundary_alt" in cfg
                else None
            ),
            mean_diff_in_cm=cfg.get("mean_diff_in_cm"),
            kappa2_equal=cfg.get("kappa2_equal"),
            higher_traces_zero=cfg.get("higher_traces_zero"),
        )
    verdict = table1_verdict(vin)
    json_path = os.path.join(outdir, "verdict.json")
    with open(json_path, "w") as fh:
        json.dump(verdict.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts = [json_path]
    artifacts.append(
        _write_manifest(outdir, "verdict", cfg, defaulted, artifacts, t0)
    )
    print(f"cm_isomorphic: {verdict.cm_isomorphic}")
    print(f"measures_equivalent: {verdict.measures_equivalent}")
    print(f"asympt_optimal: {verdict.asympt_optimal}")
    for note in verdict.notes:
        print(f"note: {note}")
    return 0


def run_sample(cfg, defaulted):
    t0 = time.time()
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    model = _resolve_model(cfg["model"])
    basis, cov = _covariance_for(model, cfg["N"])
    draws = sample_field(cov, cfg["seed"], cfg["n_samples"])
    artifacts = []
    if cfg["format"] == "bin":
        bin_path = os.path.join(outdir, "samples.bin")
        write_matrix(bin_path, draws)
        artifacts.append(bin_path)
    else:
        csv_path = os.path.join(outdir, "samples.csv")
        with open(csv_path, "w", newline="") as fh:
            fh.write("sample,index,weight\n")
            for j in range(draws.shape[1]):
                for i in range(draws.shape[0]):
                    fh.write(f"{j},{i},{repr(float(draws[i, j]))}\n")
        artifacts.append(csv_path)
    artifacts.append(
        _write_manifest(outdir, "sample", cfg, defaulted, artifacts, t0)
    )
    print(f"sample: wrote {artifacts[0]}")
    return 0


COMMANDS = {
    "fig1_integral": run_fig1_integral,
    "fig1_point": run_fig1_point,
    "fig2": run_fig2,
    "matern_check": run_matern_check,
    "diagnose": run_diagnose,
    "verdict": run_verdict,
    "sample": run_sample,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wmlab",
        description=(
            "Numerical experiments with random fields on the unit interval: "
            "kriging efficiency under covariance misspecification, analytic "
            "covariance checks, and operator-comparison diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--N", type=int, default=None, help="discretization size")
        p.add_argument("--seed", type=int, default=None, help="random seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "N": args.N,
        "seed": args.seed,
        "out": args.out,
        "threads": args.threads,
    }
    try:
        cfg, defaulted = load_config(args.command, args.config, overrides)
        return COMMANDS[args.command](cfg, defaulted)
    except ConfigError as exc:
        print(f"wmlab {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except (
        NumericalIntegrityError,
        ConditioningError,
        AssemblyIntegrityError,
        DegenerateTargetError,
    ) as exc:
        dump = {
            "command": args.command,
            "error": type(exc).__name__,
            "message": str(exc),
        }
        cond = getattr(exc, "condition_estimate", None)
        if cond is not None:
            dump["condition_estimate"] = cond
        print(json.dumps(dump, indent=2, sort_keys=True), file=sys.stderr)
        return 3
    except WmlabError as exc:
        print(
            f"wmlab {args.command}: invalid configuration value: "
            f"{type(exc).__name__}: {exc}",
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
