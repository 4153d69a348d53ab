"""Command-line front end: verify, solve, spectrum.

One JSON config document describes a run; command-line flags override
individual fields. Reports are deterministic for a fixed config and
seed, with wall-clock data quarantined in a separate top-level field so
files stay comparable.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
import time

import numpy as np

from . import fields as fd
from . import qbundle as qb
from . import qriemann as qr
from .matforms import CONVENTIONS_ID, DerivationCalculus
from .verify import run_verification

MODES = ("verify", "solve", "spectrum")
METHODS = ("gd", "gauss_newton")

_DEFAULTS = {
    "mode": "verify",
    "N": 2,
    "seed": 0,
    "charge": 0,
    "potential": [0.0],
    "tol": 1e-8,
    "max_iter": 100_000,
    "method": "gd",
    "grade": None,
    "out": None,
    "strict_conventions": False,
    "connection": None,
    "left": None,
    "right": None,
    "vary_connection": True,
    "vary_left": True,
    "vary_right": True,
    "fd_step": 1e-7,
    "initial_step": 1.0,
}


class ConfigError(Exception):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _parse_potential(value):
    if isinstance(value, str):
        parts = [s.strip() for s in value.split(",") if s.strip()]
        if not parts:
            raise ConfigError("potential", "no coefficients given")
        try:
            value = [float(s) for s in parts]
        except ValueError as exc:
            raise ConfigError("potential", f"bad coefficient: {exc}") from None
    if not isinstance(value, (list, tuple)):
        raise ConfigError("potential", "expected a list of coefficients")
    coeffs = []
    for c in value:
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise ConfigError("potential", f"coefficient {c!r} is not a real number")
        if not np.isfinite(c):
            raise ConfigError("potential", "coefficients must be finite")
        coeffs.append(float(c))
    return coeffs


def _require_int(cfg, field, minimum=None):
    v = cfg[field]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(field, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {v}")
    return v


def _require_float(cfg, field, positive=False):
    v = cfg[field]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(field, f"expected a number, got {v!r}")
    v = float(v)
    if not np.isfinite(v):
        raise ConfigError(field, "must be finite")
    if positive and v <= 0:
        raise ConfigError(field, f"must be > 0, got {v}")
    cfg[field] = v
    return v


def _require_bool(cfg, field):
    if not isinstance(cfg[field], bool):
        raise ConfigError(field, f"expected true/false, got {cfg[field]!r}")
    return cfg[field]


def validate_config(cfg):
    """Normalize a merged config dict in place; raise ConfigError on the
    first offending field."""
    for key in cfg:
        if key not in _DEFAULTS:
            raise ConfigError(key, "unknown field")
    if cfg["mode"] not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {cfg['mode']!r}")
    N = _require_int(cfg, "N", minimum=2)
    _require_int(cfg, "seed", minimum=0)
    _require_int(cfg, "charge")
    _require_int(cfg, "max_iter", minimum=1)
    cfg["potential"] = _parse_potential(cfg["potential"])
    _require_float(cfg, "tol", positive=True)
    _require_float(cfg, "fd_step", positive=True)
    _require_float(cfg, "initial_step", positive=True)
    if cfg["method"] not in METHODS:
        raise ConfigError("method", f"expected one of {METHODS}, got {cfg['method']!r}")
    if cfg["grade"] is not None:
        g = _require_int(cfg, "grade", minimum=0)
        if g > N * N - 1:
            raise ConfigError("grade", f"must be <= {N * N - 1} for N={N}, got {g}")
    if cfg["out"] is not None and not isinstance(cfg["out"], str):
        raise ConfigError("out", "expected a path string")
    for key in ("strict_conventions", "vary_connection", "vary_left", "vary_right"):
        _require_bool(cfg, key)
    for key in ("connection", "left", "right"):
        if cfg[key] is not None and cfg["mode"] != "solve":
            raise ConfigError(key, "only meaningful in solve mode")
    return cfg


def _matrix_from_json(calc, value, field):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(field, "expected nested [re, im] number pairs") from None
    if arr.shape != (calc.N, calc.N, 2):
        raise ConfigError(field, f"expected shape {(calc.N, calc.N, 2)}, got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _build_solve_configuration(cfg, calc, rng):
    if cfg["connection"] is not None:
        if not isinstance(cfg["connection"], dict):
            raise ConfigError("connection", "expected a connection payload object")
        try:
            conn = qb.GaugeConnection.from_payload(calc, cfg["connection"])
        except Exception as exc:
            raise ConfigError("connection", str(exc)) from None
    else:
        conn = qb.GaugeConnection(calc.random_form(1, rng))
    n = cfg["charge"]
    with_sections = n != 0 or cfg["left"] is not None or cfg["right"] is not None
    if not with_sections:
        return fd.FieldConfiguration(conn)
    if cfg["left"] is not None:
        a = _matrix_from_json(calc, cfg["left"], "left")
    else:
        a = calc.random_matrix(rng)
    if cfg["right"] is not None:
        b = _matrix_from_json(calc, cfg["right"], "right")
    else:
        b = calc.random_matrix(rng)
    return fd.FieldConfiguration(
        conn,
        qb.ChargedSection(calc, n, "left", a),
        qb.ChargedSection(calc, -n, "right", b),
        fd.PolynomialPotential(cfg["potential"]))


def _config_echo(cfg):
    # the output path does not influence results, so it stays out of the
    # reproducibility-relevant echo
    echo = {k: v for k, v in cfg.items() if v != _DEFAULTS[k] and k != "out"}
    echo["mode"] = cfg["mode"]
    echo["N"] = cfg["N"]
    echo["seed"] = cfg["seed"]
    return echo


def _run_verify(cfg):
    body = run_verification(cfg["seed"], cfg["N"], cfg["strict_conventions"])
    body["config"] = _config_echo(cfg)
    summary = body["summary"]
    line = (f"verify: {summary['passed']}/{summary['total']} checks passed, "
            f"{summary['failed']} failed, {summary['warned']} warnings")
    return body, line, 0 if body["ok"] else 1


def _run_solve(cfg):
    calc = DerivationCalculus(cfg["N"])
    rng = np.random.default_rng(cfg["seed"])
    cfg0 = _build_solve_configuration(cfg, calc, rng)
    options = fd.SolverOptions(
        tol=cfg["tol"], max_iter=cfg["max_iter"], method=cfg["method"],
        fd_step=cfg["fd_step"], initial_step=cfg["initial_step"],
        vary_connection=cfg["vary_connection"], vary_left=cfg["vary_left"],
        vary_right=cfg["vary_right"])
    initial_actions = fd.action_summary(cfg0)
    solved, report = fd.solve_stationary(cfg0, options)
    report.seed = cfg["seed"]
    curv_norm = solved.connection.curvature().frobenius()
    body = {
        "mode": "solve",
        "config": _config_echo(cfg),
        "conventions_id": CONVENTIONS_ID,
        "initial_actions": initial_actions,
        "solver": report.to_dict(),
        "curvature_norm": curv_norm,
        "solution": {
            "connection": solved.connection.to_payload(),
            "left": None if solved.left is None else _matrix_to_json(solved.left.p),
            "right": None if solved.right is None else _matrix_to_json(solved.right.p),
        },
    }
    status = "converged" if report.converged else "did not converge"
    worst = max(report.residual_norms.values())
    line = (f"solve: {status} after {report.iterations} iterations, "
            f"max residual norm {worst:.3e}, |dA| = {curv_norm:.3e}")
    return body, line, 0 if report.converged else 1


def _run_spectrum(cfg):
    calc = DerivationCalculus(cfg["N"])
    grades = [cfg["grade"]] if cfg["grade"] is not None else list(range(calc.dim + 1))
    lines = ["grade,index,eigenvalue"]
    count = 0
    for g in grades:
        for i, ev in enumerate(qr.spectrum(calc, g)):
            lines.append(f"{g},{i},{ev:.17g}")
            count += 1
    text = "\n".join(lines) + "\n"
    return text, f"spectrum: wrote {count} eigenvalues for grades {grades}", 0


def _emit(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matym",
        description="Derivation-calculus gauge fields over matrix algebras: "
                    "verification suite, stationary-point solver, spectrum export.")
    parser.add_argument("--mode", choices=MODES, help="what to run")
    parser.add_argument("--config", metavar="FILE", help="JSON config document")
    parser.add_argument("--seed", type=int, help="RNG seed")
    parser.add_argument("--tol", type=float, help="solver residual tolerance")
    parser.add_argument("--charge", type=int, help="section charge n")
    parser.add_argument("--potential", metavar="c0,c1,...",
                        help="polynomial potential coefficients")
    parser.add_argument("--out", metavar="PATH", help="output file (default "
                        "report.json / spectrum.csv)")
    parser.add_argument("--grade", type=int, help="restrict spectrum mode to one grade")
    parser.add_argument("--N", type=int, dest="N", help="matrix algebra size")
    parser.add_argument("--max-iter", type=int, dest="max_iter", help="iteration budget")
    parser.add_argument("--method", choices=METHODS, help="solver method")
    parser.add_argument("--strict-conventions", action="store_true", default=None,
                        dest="strict_conventions",
                        help="fail (instead of warn) on convention-sensitive checks")
    return parser


def load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = f.read()
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data


def merge_config(args):
    cfg = dict(_DEFAULTS)
    if args.config is not None:
        cfg.update(load_config_file(args.config))
    for key in ("mode", "seed", "tol", "charge", "potential", "out", "grade",
                "N", "max_iter", "method", "strict_conventions"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    return validate_config(cfg)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
    except ConfigError as exc:
        print(f"matym: config error: {exc}", file=sys.stderr)
        return 2

    started = time.time()
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    try:
        if cfg["mode"] == "verify":
            body, line, code = _run_verify(cfg)
        elif cfg["mode"] == "solve":
            body, line, code = _run_solve(cfg)
        else:
            text, line, code = _run_spectrum(cfg)
            _emit(cfg["out"] or "spectrum.csv", text)
            print(line)
            return code
    except ConfigError as exc:
        print(f"matym: config error: {exc}", file=sys.stderr)
        return 2
    except fd.SolverAbort as exc:
        print(f"matym: solver aborted: {exc}", file=sys.stderr)
        return 1

    document = {
        "report": body,
        "timing": {"generated_at": stamp, "elapsed_seconds": time.time() - started},
    }
    _emit(cfg["out"] or "report.json",
          json.dumps(document, indent=2, sort_keys=True) + "\n")
    print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
