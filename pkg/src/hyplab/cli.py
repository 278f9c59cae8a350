"""Command line front end: ``hyplab <command> --config FILE [--output-dir DIR] [--seed N]``.

A config is one JSON document::

    {"command": "analyze", "family": {...}, "params": {...}}

Exit status is 0 on success, 2 on invalid input and 3 when a solver fails.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

from .bracket import BracketParams, bracket_solve, calibrate_delta
from .errors import ConfigError, SolverError, ValidationError
from .family import FamilySpec
from .hyperbolicity import c2_certificate, estimate_constants
from .manifolds import local_manifold
from .markov import (
    build_partition,
    check_markov,
    choose_gamma,
    coverage,
    dense_set,
    eigen_partition,
    transition_matrices,
)
from .shadowing import choose_params, read_pseudo_orbit_csv, shadow, validate_pseudo_orbit
from .torus import TorusPoint

COMMANDS = ("analyze", "manifold", "bracket", "shadow", "markov", "code")

_POINT = "point"
_BRACKET_KEYS = {"epsilon": 0.05, "delta": 0.0124, "cone_alpha": 0.25, "calibrate": True}
_SHADOW_KEYS = {**_BRACKET_KEYS, "beta": 0.02, "probes": 200}
_PARTITION_KEYS = {**_SHADOW_KEYS, "partition": "bowen", "gamma": None, "N": 20, "samples": 8, "markov_probes": 200, "max_solves": 4000}

PARAM_DEFAULTS = {
    "analyze": {"grid": 4, "depth": 30},
    "manifold": {"index": 0, "point": _POINT, "flavor": "unstable", "epsilon": 0.05, "depth": 30},
    "bracket": {**_BRACKET_KEYS, "index": 0, "p": _POINT, "q": _POINT},
    "shadow": {**_SHADOW_KEYS, "pseudo_orbit": "", "jump_bound": None},
    "markov": _PARTITION_KEYS,
    "code": _PARTITION_KEYS,
}


def _positive(path, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigError(path, "expected a positive number")
    return v


def _point(path, v):
    if not isinstance(v, list) or len(v) != 2 or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        raise ConfigError(path, "expected [x, y]")
    return TorusPoint(float(v[0]), float(v[1]))


def load_config(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno} column {e.colno}", e.msg) from e
    if not isinstance(doc, dict):
        raise ConfigError("$", "expected an object")
    unknown = set(doc) - {"command", "family", "params", "seed"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError("command", f"expected one of {COMMANDS}")
    if "family" not in doc:
        raise ConfigError("family", "missing")
    family = FamilySpec.from_dict(doc["family"])
    raw = doc.get("params", {})
    if not isinstance(raw, dict):
        raise ConfigError("params", "expected an object")
    defaults = PARAM_DEFAULTS[command]
    unknown = set(raw) - set(defaults)
    if unknown:
        raise ConfigError(f"params.{sorted(unknown)[0]}", "unknown key")
    params = {**defaults, **raw}
    for key in ("p", "q", "point"):
        if key in defaults:
            if params[key] is _POINT:
                raise ConfigError(f"params.{key}", "missing")
            params[key] = _point(f"params.{key}", params[key])
    for key in ("epsilon", "delta", "beta", "cone_alpha", "grid", "depth", "samples", "N", "probes"):
        if key in defaults:
            _positive(f"params.{key}", params[key])
    for key in ("gamma", "jump_bound"):
        if params.get(key) is not None:
            _positive(f"params.{key}", params[key])
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", "expected an integer")
    return command, family, params, seed


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _json(doc):
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _bracket_params(family, p, seed):
    try:
        bp = BracketParams(p["epsilon"], p["delta"], p["cone_alpha"])
    except ValidationError as e:
        raise ConfigError("params.delta", str(e)) from e
    return calibrate_delta(family, bp, seed=seed) if p["calibrate"] else bp


def _shadow_params(family, p, seed):
    bp = _bracket_params(family, p, seed)
    est = estimate_constants(family, family.window)
    return choose_params(family, p["beta"], est, bp, probes=p["probes"], seed=seed)


def run_analyze(family, p, seed, out):
    est = estimate_constants(family, family.window, grid=p["grid"], depth=p["depth"])
    doc = {"hyperbolicity": est.to_dict(), "c2": c2_certificate(family).to_dict()}
    write_atomic(out / "analyze.json", _json(doc))


def run_manifold(family, p, seed, out):
    m = local_manifold(family, p["index"], p["point"], p["flavor"], p["epsilon"], p["depth"])
    write_atomic(out / "manifold.csv", m.to_csv())


def run_bracket(family, p, seed, out):
    bp = _bracket_params(family, p, seed)
    z, t, u = bracket_solve(family, p["index"], p["p"], p["q"], bp)
    doc = {"point": [z.x, z.y], "stable_parameter": t, "unstable_parameter": u, "params": asdict(bp)}
    write_atomic(out / "bracket.json", _json(doc))


def run_shadow(family, p, seed, out, base):
    if not p["pseudo_orbit"]:
        raise ConfigError("params.pseudo_orbit", "missing")
    path = (base / p["pseudo_orbit"]).resolve()
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError("params.pseudo_orbit", f"cannot read {path}: {e.strerror}") from e
    start, pts = read_pseudo_orbit_csv(text)
    sp = _shadow_params(family, p, seed)
    jump = sp.alpha if p["jump_bound"] is None else p["jump_bound"]
    po = validate_pseudo_orbit(family, start, pts, jump)
    res = shadow(family, po, sp)
    write_atomic(out / "shadow.json", _json({**res.to_dict(), "params": sp.to_dict()}))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "x", "y", "error"])
    for k, (xy, err) in enumerate(zip(res.orbit, res.per_step_error)):
        w.writerow([start + k, repr(float(xy[0])), repr(float(xy[1])), repr(err)])
    write_atomic(out / "shadow_steps.csv", buf.getvalue())


def _partition(family, p, seed):
    if p["partition"] == "eigen":
        return eigen_partition(family, (family.window[0], family.window[1] + 1))
    if p["partition"] != "bowen":
        raise ConfigError("params.partition", "expected 'bowen' or 'eigen'")
    sp = _shadow_params(family, p, seed)
    gamma = p["gamma"] or choose_gamma(family, sp.alpha, sp.beta)
    P = dense_set(gamma, seed)
    return build_partition(family, P, sp, N=p["N"], sample_budget=p["samples"], seed=seed, max_solves=p["max_solves"])


def run_markov(family, p, seed, out):
    part = _partition(family, p, seed)
    report = check_markov(family, part, p["markov_probes"], seed=seed)
    cov = {str(i): asdict(coverage(rs)) for i, rs in sorted(part.levels.items())}
    write_atomic(out / "partition.json", part.to_json() + "\n")
    for i in sorted(part.levels):
        write_atomic(out / f"partition_level{i}.svg", part.to_svg(i))
    write_atomic(out / "markov_report.json", _json({"markov": report.to_dict(), "coverage": cov}))


def run_code(family, p, seed, out):
    part = _partition(family, p, seed)
    write_atomic(out / "transitions.json", transition_matrices(family, part).to_json() + "\n")


def run(config_path, output_dir=None, seed=None, expected=None):
    config_path = Path(config_path)
    try:
        text = config_path.read_text()
    except OSError as e:
        raise ConfigError(str(config_path), e.strerror) from e
    command, family, params, cfg_seed = load_config(text)
    if expected is not None and command != expected:
        raise ConfigError("command", f"config is for '{command}', not '{expected}'")
    seed = cfg_seed if seed is None else seed
    out = Path(output_dir) if output_dir else Path.cwd()
    if command == "shadow":
        run_shadow(family, params, seed, out, config_path.parent)
    else:
        globals()[f"run_{command}"](family, params, seed, out)
    return command


def main(argv=None):
    ap = argparse.ArgumentParser(prog="hyplab", description="Hyperbolic dynamics on non-stationary torus families.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--output-dir", default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)
    try:
        run(args.config, args.output_dir, args.seed, expected=args.command)
    except ValidationError as e:
        print(f"hyplab: invalid input: {e}", file=sys.stderr)
        return 2
    except SolverError as e:
        print(f"hyplab: solver failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
