"""Configuration-driven experiment runner.

A configuration file is JSON with one key ``experiments`` holding a list;
each entry is either the name of a built-in preset bundle or a dictionary
with the fields below (matching :class:`ExperimentConfig` one to one)::

    {
      "experiments": [
        "bg-reduction",
        {
          "name": "my-run",            experiment id, used for the CSV name
          "identity": "frac-gauss",    one of the registered identities
          "domain": [0,1,0,1,0,1,0,1], rectangle bounds a1,b1,c1,d1,a2,b2,c2,d2
          "weights": "classical",      classical | constant:a+bi,c+di
                                       | scaled-classical:<expr in x,y>
          "phi": "linear",             linear | fractal:d0,d1,d2,d3
                                       | custom:<expr>|<expr>
          "alpha": [0.5,0.5,0.5,0.5],  orders per trace direction
          "sigma": [1,0,1,0],          proportions per trace direction
          "field": "poly",             test input F (see field presets)
          "m": 32, "k": 32, "n": 512,  area/boundary/1-D resolutions
          "scheme": "graded",          graded | gauss_jacobi
          "grading": null,             mesh grading exponent (null = auto)
          "fd_step": null,             finite-difference step (null = auto)
          "margin": 0.15,              patch inset from the rectangle
          "include_area": true,        keep the area term of reconstructions
          "tolerance": 1e-6,           pass/fail threshold (finest level)
          "levels": 1                  refinement levels (>1 fits an order)
        }
      ]
    }

Bicomplex values in reports use the textual form ``"a+bi E + c+di E*"``
(see ``hypercomplex.bc_to_text``).  CSV rows carry the schema
``identity,m,k,n,res_l1,res_l2,order,seconds``; wall-clock seconds are
reported but excluded from determinism comparisons.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import BcfracError, ConfigError
from .frac_cr_bicomplex import FracParams, LambdaWeights, lambda_for_constant_weights
from .fracops1d import FracSpec, Quadrature1D, ScalarWeightFn, prop_frac_derivative, prop_frac_integral, hausdorff_derivative
from .presets import (
    EXPERIMENT_PRESETS,
    field_preset,
    phi_preset,
    rect_from_bounds,
    weight_preset,
)
from .quadrature_verify import (
    IDENTITIES,
    Resolution,
    ResidualReport,
    SurfacePatch,
    VerificationSetup,
    convergence_study,
    run_identity,
)

_REQUIRED = ("name", "identity", "domain", "weights", "phi", "alpha", "sigma",
             "field", "m", "k", "n", "tolerance")
_DEFAULTS = {"fd_step": None, "margin": 0.15, "include_area": True, "levels": 1,
             "scheme": "graded", "grading": None}


@dataclass
class ExperimentConfig:
    """Validated form of one experiment entry."""

    name: str
    identity: str
    setup: VerificationSetup
    resolution: Resolution
    tolerance: float
    levels: int


def _config_error(index, key, message):
    raise ConfigError(f"experiments[{index}].{key}: {message}")


def parse_experiment(entry: dict, index: int) -> ExperimentConfig:
    for key in _REQUIRED:
        if key not in entry:
            _config_error(index, key, "missing required field")
    known = set(_REQUIRED) | set(_DEFAULTS)
    for key in entry:
        if key not in known:
            _config_error(index, key, "unknown field")
    merged = {**_DEFAULTS, **entry}

    if merged["identity"] not in IDENTITIES:
        _config_error(index, "identity", f"unknown identity; known: {', '.join(IDENTITIES)}")
    try:
        rect = rect_from_bounds(merged["domain"])
    except (ConfigError, ValueError) as exc:
        _config_error(index, "domain", str(exc))
    try:
        wp = weight_preset(merged["weights"])
    except ConfigError as exc:
        _config_error(index, "weights", str(exc))
    try:
        phi = phi_preset(merged["phi"])
    except ConfigError as exc:
        _config_error(index, "phi", str(exc))
    try:
        F = field_preset(merged["field"])
    except ConfigError as exc:
        _config_error(index, "field", str(exc))

    m, k, n = int(merged["m"]), int(merged["k"]), int(merged["n"])
    if min(m, k, n) < 4:
        _config_error(index, "m", "resolutions must be at least 4")
    tolerance = float(merged["tolerance"])
    if tolerance <= 0:
        _config_error(index, "tolerance", "tolerance must be positive")
    levels = int(merged["levels"])
    if levels < 1:
        _config_error(index, "levels", "levels must be at least 1")

    try:
        quad = Quadrature1D(n=n, scheme=merged["scheme"],
                            grading=None if merged["grading"] is None else float(merged["grading"]))
    except ValueError as exc:
        _config_error(index, "scheme", str(exc))
    try:
        params = FracParams(
            rect,
            tuple(float(a) for a in merged["alpha"]),
            tuple(float(s) for s in merged["sigma"]),
            phi,
            quad,
            fd_step=merged["fd_step"],
        )
    except ValueError as exc:
        _config_error(index, "alpha", str(exc))

    sig = params.sigma
    if sig.z1 == 1 and sig.z2 == 1:
        lam = LambdaWeights.zero()
    elif merged["identity"] in ("factorization", "frac-gauss", "frac-borel-pompeiu"):
        try:
            lam = lambda_for_constant_weights(wp, params)
        except BcfracError as exc:
            _config_error(index, "sigma", f"multiplier unavailable: {exc}")
    else:
        lam = LambdaWeights.zero()

    patch = SurfacePatch.inside(rect, margin=float(merged["margin"]), m=m, k=k)
    setup = VerificationSetup(
        F=F, wp=wp, params=params, lam=lam,
        W=rect.point(0.45, 0.4, 0.55, 0.6),
        Z=rect.point(0.5, 0.55, 0.45, 0.5),
        patch=patch,
        include_area=bool(merged["include_area"]),
    )
    return ExperimentConfig(str(merged["name"]), merged["identity"], setup,
                            Resolution(m, k, n), tolerance, levels)


def load_config(path: str) -> list:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    entries = raw.get("experiments")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("config needs a nonempty 'experiments' list")
    expanded = []
    for i, entry in enumerate(entries):
        if isinstance(entry, str):
            if entry not in EXPERIMENT_PRESETS:
                raise ConfigError(
                    f"experiments[{i}]: unknown preset {entry!r}; "
                    f"known: {', '.join(sorted(EXPERIMENT_PRESETS))}"
                )
            expanded.extend(EXPERIMENT_PRESETS[entry])
        elif isinstance(entry, dict):
            expanded.append(entry)
        else:
            raise ConfigError(f"experiments[{i}]: must be a preset name or a table")
    return [parse_experiment(e, i) for i, e in enumerate(expanded)]


def run_suite(configs: list, levels_override: Optional[int] = None, jobs: int = 1):
    """Execute every experiment; returns ``(summary, reports_by_name)``."""

    def run_one(cfg: ExperimentConfig):
        levels = levels_override or cfg.levels
        if levels > 1:
            return convergence_study(cfg.identity, cfg.setup, cfg.resolution, levels)
        return [run_identity(cfg.identity, cfg.setup, cfg.resolution)]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            all_reports = list(pool.map(run_one, configs))
    else:
        all_reports = [run_one(cfg) for cfg in configs]

    summary = {"experiments": [], "all_passed": True}
    reports_by_name = {}
    for cfg, reports in zip(configs, all_reports):
        final = reports[-1]
        passed = bool(final.max_residual() <= cfg.tolerance)
        summary["experiments"].append({
            "name": cfg.name,
            "identity": cfg.identity,
            "max_residual": float(final.max_residual()),
            "order": None if final.order is None else float(final.order),
            "tolerance": float(cfg.tolerance),
            "passed": passed,
        })
        summary["all_passed"] = summary["all_passed"] and passed
        reports_by_name[cfg.name] = reports
    return summary, reports_by_name


def emit_report(reports_by_name: dict, summary: dict, out_dir: str) -> list:
    """Write one CSV per experiment plus a JSON summary; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, reports in reports_by_name.items():
        path = out / f"{name}.csv"
        lines = [ResidualReport.CSV_HEADER]
        lines.extend(r.csv_row() for r in reports)
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    spath = out / "summary.json"
    spath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(spath)
    return written


def _cmd_verify(args) -> int:
    try:
        configs = load_config(args.config)
        summary, reports = run_suite(configs, levels_override=args.levels, jobs=args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    emit_report(reports, summary, args.out)
    for entry in summary["experiments"]:
        status = "PASS" if entry["passed"] else "FAIL"
        order = "" if entry["order"] is None else f" order={entry['order']:.2f}"
        print(f"{status} {entry['name']} [{entry['identity']}] "
              f"residual={entry['max_residual']:.3e} tol={entry['tolerance']:.1e}{order}")
    return 0 if summary["all_passed"] else 1


def _cmd_list_presets(_args) -> int:
    print("experiment bundles:")
    for name, entries in EXPERIMENT_PRESETS.items():
        ids = ", ".join(e["identity"] for e in entries)
        print(f"  {name}: {ids}")
    print("weights: classical | constant:a+bi,c+di | scaled-classical:<expr in x,y>")
    print("phi: linear | fractal:d0,d1,d2,d3 | custom:<expr>|<expr>")
    print("fields: poly, exp, affine, conjugate, one")
    print("identities: " + ", ".join(IDENTITIES))
    return 0


def _oracle_weight(which: str) -> ScalarWeightFn:
    if which == "identity":
        return ScalarWeightFn(phi=lambda t: t,
                              dphi=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                              lo=0.0, hi=2.0, inv=lambda u: u)
    return ScalarWeightFn(phi=lambda t: t + t**3, dphi=lambda t: 1.0 + 3.0 * t**2,
                          lo=0.0, hi=2.0)


def _cmd_oracle(args) -> int:
    from scipy.special import gamma

    q = Quadrature1D(n=args.n)
    if args.op == "rl-power":
        # classical left integral of (t-a)^(beta-1) at proportion one
        w = _oracle_weight("identity")
        spec = FracSpec(args.alpha, 1.0, w)
        closed = gamma(args.beta) / gamma(args.beta + args.alpha) * args.t ** (args.beta + args.alpha - 1)
        engine = prop_frac_integral(lambda tau: tau ** (args.beta - 1.0), spec, "left", args.t, q)
    elif args.op == "eigen":
        # tempered power input reproduced in closed form under the cubic weight
        w = _oracle_weight("cubic")
        spec = FracSpec(args.alpha, args.sigma, w)
        c = (args.sigma - 1.0) / args.sigma
        pt = args.t + args.t**3
        closed = (gamma(args.beta) / (args.sigma ** args.alpha * gamma(args.beta + args.alpha))
                  * np.exp(c * pt) * pt ** (args.beta + args.alpha - 1))
        engine = prop_frac_integral(
            lambda tau: np.exp(c * (tau + tau**3)) * (tau + tau**3) ** (args.beta - 1.0),
            spec, "left", args.t, q)
    elif args.op == "rl-const-derivative":
        w = _oracle_weight("identity")
        spec = FracSpec(args.alpha, 1.0, w)
        closed = args.t ** (-args.alpha) / gamma(1.0 - args.alpha)
        engine = prop_frac_derivative(
            lambda t: np.ones_like(np.asarray(t, dtype=float)), spec, "left", args.t, q)
    elif args.op == "hausdorff":
        closed = args.t ** (1.0 - args.alpha) / args.alpha  # for l(t) = t, a = 0
        engine = hausdorff_derivative(
            lambda t: np.asarray(t, dtype=float),
            lambda t: np.ones_like(np.asarray(t, dtype=float)),
            args.alpha, 0.0, args.t)
    else:
        print(f"unknown oracle op {args.op!r}", file=sys.stderr)
        return 2
    err = abs(complex(engine) - complex(closed))
    print(f"closed-form={complex(closed):.12g} engine={complex(engine):.12g} abs-error={err:.3e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bcfrac",
        description="Verify bicomplex proportional fractional calculus identities by quadrature.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run experiments from a JSON config")
    p_verify.add_argument("--config", required=True, help="path to the JSON configuration")
    p_verify.add_argument("--levels", type=int, default=None,
                          help="override refinement levels for every experiment")
    p_verify.add_argument("--out", default="results", help="output directory")
    p_verify.add_argument("--jobs", type=int, default=1, help="parallel experiment workers")
    p_verify.set_defaults(fn=_cmd_verify)

    p_list = sub.add_parser("list-presets", help="show preset names")
    p_list.set_defaults(fn=_cmd_list_presets)

    p_oracle = sub.add_parser("oracle", help="closed-form spot checks of the 1-D operators")
    p_oracle.add_argument("op", choices=["rl-power", "eigen", "rl-const-derivative", "hausdorff"])
    p_oracle.add_argument("--alpha", type=float, default=0.5)
    p_oracle.add_argument("--beta", type=float, default=1.5)
    p_oracle.add_argument("--sigma", type=float, default=0.6)
    p_oracle.add_argument("--t", type=float, default=0.8)
    p_oracle.add_argument("--n", type=int, default=512)
    p_oracle.set_defaults(fn=_cmd_oracle)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
