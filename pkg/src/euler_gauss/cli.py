"""Command-line front end.

Every subcommand reads an optional ``--config`` JSON file, overlays the
command-line flags, validates the merged configuration against
``schemas/config.schema.json`` and writes its JSON (and CSV) artifacts to
``--output-dir``. Exit codes: 0 success, 2 configuration error,
3 unsupported request (no certified tail, support too large for the exact
oracle), 4 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema

EXIT_OK, EXIT_CONFIG, EXIT_UNSUPPORTED, EXIT_NUMERICAL = 0, 2, 3, 4

__all__ = ["main", "build_parser", "load_schema", "validate", "ConfigError"]


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    text = resources.files("euler_gauss").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(obj: dict, name: str) -> None:
    """Raise ConfigError (config) or jsonschema.ValidationError (artifacts)."""
    schema = load_schema(name)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        if name == "config":
            raise ConfigError(f"config schema error at {where}: {e.message}")
        raise jsonschema.ValidationError(f"{name} schema error at {where}: {e.message}")


# ----------------------------------------------------------------------------- parsing

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with run settings (flags override it)")
    p.add_argument("--output-dir", dest="output_dir", help="directory for artifacts (default .)")
    p.add_argument("--reproducible", action="store_true", default=None,
                   help="deterministic output: no timestamps or timings")
    p.add_argument("--threads", type=int, help="FFT worker threads (default: EULER_GAUSS_THREADS or all cores)")


def _sequence_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--profile", help="built-in profile: lemma61, powerlog, line, circle25, gibbs-like")
    p.add_argument("--sequence", help="path to a sequence JSON file")
    p.add_argument("--radius", type=int, help="support radius for powerlog / gibbs-like")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="euler-gauss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="closed-form gamma_s of a sequence")
    _sequence_args(p)
    p.add_argument("--s", type=float)
    p.add_argument("--s-grid", dest="s_grid", help="comma-separated s values (scan mode)")
    p.add_argument("--summation-radius", dest="summation_radius", type=int)
    p.add_argument("--prefactor", choices=["bare", "paper"])
    _common(p)

    p = sub.add_parser("certify", help="interval certificate of gamma > 0")
    _sequence_args(p)
    p.add_argument("--s", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--convention", choices=["appendix", "standard"])
    _common(p)

    p = sub.add_parser("classify", help="degeneracy class of the support")
    _sequence_args(p)
    _common(p)

    p = sub.add_parser("mc-verify", help="Monte Carlo checks of the Gaussian expectations")
    _sequence_args(p)
    p.add_argument("--s", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--truncation", type=int)
    _common(p)

    p = sub.add_parser("evolve", help="short-time growth experiment on the truncated flow")
    _sequence_args(p)
    p.add_argument("--s", type=float)
    p.add_argument("--tmax", dest="t_max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--N", dest="truncation", type=int, help="Galerkin truncation")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    _common(p)

    p = sub.add_parser("report", help="merge JSON artifacts into CSV / Markdown / figures")
    p.add_argument("inputs", nargs="*", help="artifact files or directories (default: output dir)")
    _common(p)
    return parser


_DEFAULTS = {
    "gamma": {"s": 1.0, "prefactor": "bare"},
    "certify": {"profile": "powerlog", "s": 0.5, "N": 30, "convention": "appendix"},
    "classify": {},
    "mc-verify": {"s": 0.5, "samples": 20000, "seed": 0},
    "evolve": {"s": 0.5, "t_max": 0.05, "dt": 1e-3, "truncation": 16, "samples": 2000, "seed": 0},
    "report": {},
}


def load_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        if cfg.get("command", args.command) != args.command:
            raise ConfigError(f"config is for command {cfg['command']!r}, not {args.command!r}")
    cfg["command"] = args.command
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        if key == "s_grid":
            try:
                value = [float(x) for x in value.split(",") if x.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --s-grid: {exc}") from exc
        if key == "inputs" and not value:
            continue
        cfg[key] = value
    validate(cfg, "config")
    for k, v in _DEFAULTS[args.command].items():
        cfg.setdefault(k, v)
    return cfg


def resolve_sequence(cfg: dict):
    from .lattice import CoefficientSequence, named_profile

    seq = cfg.get("sequence")
    if seq is not None:
        if isinstance(seq, str):
            try:
                with open(seq) as fh:
                    seq = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read sequence {cfg['sequence']}: {exc}") from exc
            sub = load_schema("config")["$defs"]["sequence"]
            errs = list(jsonschema.Draft202012Validator(sub).iter_errors(seq))
            if errs:
                raise ConfigError(f"sequence file schema error: {errs[0].message}")
        return CoefficientSequence.from_json(seq)
    name = cfg.get("profile")
    if name is None:
        raise ConfigError("give --profile or --sequence")
    return named_profile(name, cfg.get("radius"))


# ----------------------------------------------------------------------------- output

def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit(cfg: dict, name: str, schema: str, payload: dict, quiet: bool = False) -> Path:
    payload = _jsonable(payload)
    if not cfg.get("reproducible"):
        payload["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    validate(payload, schema)
    out = Path(cfg.get("output_dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    path.write_text(text)
    if not quiet:
        sys.stdout.write(text)
    return path


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg.get("output_dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------------------------- commands

def cmd_gamma(cfg: dict) -> int:
    from .gamma import PrefactorMode, gamma, scan_s

    a = resolve_sequence(cfg)
    radius = cfg.get("summation_radius")
    mode = PrefactorMode(cfg["prefactor"])
    base = {"artifact": "gamma", "sequence": a.name or a.content_hash(),
            "sequence_hash": a.content_hash(), "prefactor": mode.value}
    if "s_grid" in cfg:
        res = scan_s(a, cfg["s_grid"], summation_radius=radius)
        base["scan"] = res.to_json()
    else:
        rep = gamma(a, cfg["s"], radius)
        base.update(rep.to_json())
        base["sequence"] = rep.sequence_id
        base["gamma"] = rep.value(mode)
    _emit(cfg, "gamma", "gamma", base)
    return EXIT_OK


def cmd_certify(cfg: dict) -> int:
    from .certificate import certify
    from .lattice import Profile

    if cfg.get("profile") == "powerlog" and "radius" not in cfg and "sequence" not in cfg:
        cfg["radius"] = cfg["N"]
    a = resolve_sequence(cfg)
    if a.profile is Profile.POWER_LOG and a.radius < cfg["N"] - 1:
        raise ConfigError(f"powerlog radius {a.radius} does not cover the disc |n| < {cfg['N']}")
    cert = certify(a, cfg["s"], cfg["N"], cfg["convention"], strict=True)
    payload = {"artifact": "certificate", **cert.to_json()}
    if cfg.get("reproducible"):
        payload["runtime_ms"] = None
    _emit(cfg, "certificate", "certificate", payload)
    return EXIT_OK


def cmd_classify(cfg: dict) -> int:
    from .gamma import classify_support

    a = resolve_sequence(cfg)
    sc = classify_support(a)
    payload = {"artifact": "classification", "sequence": a.name or a.content_hash(),
               **sc.to_json(), "degenerate": sc.degenerate}
    _emit(cfg, "classification", "classification", payload)
    return EXIT_OK


def _check(name: str, est, expected: float) -> dict:
    ok = est.within(expected, 3.0)
    if est.stderr == 0.0:
        ok = abs(est.mean - expected) <= 1e-12 * max(1.0, abs(expected))
    return {"name": name, "mean": est.mean, "stderr": est.stderr, "expected": expected,
            "M": est.sample_count, "status": "pass" if ok else "fail"}


def cmd_mc_verify(cfg: dict) -> int:
    from .functionals import Functional, FunctionalKind as K
    from .gamma import expected_B1_normsq_closed, expected_omega_B2_closed, gamma
    from .lattice import h_sigma_norm_sq
    from .rng import SamplerConfig
    from .stochastic import KAPPA, expansion_fit, mc_estimate, write_manifest, write_results_csv

    a = resolve_sequence(cfg)
    s, M = cfg["s"], cfg["samples"]
    sc = SamplerConfig(a, cfg.get("truncation", max(1, a.max_component)), cfg["seed"], M)
    plan = [
        (Functional(K.HS_NORM_SQ, s), 2.0 * h_sigma_norm_sq(a, s)),
        (Functional(K.OMEGA_DOT_B1, s), 0.0),
        (Functional(K.B1_DOT_B2, s), 0.0),
        (Functional(K.B1_NORM_SQ, s), KAPPA * expected_B1_normsq_closed(a, s)),
        (Functional(K.OMEGA_DOT_B2, s), KAPPA * expected_omega_B2_closed(a, s)),
    ]
    results, checks = [], []
    for f, expected in plan:
        est = mc_estimate(sc, f, M)
        results.append((f, est))
        checks.append(_check(str(f), est, expected))
    fit = expansion_fit(sc, s, [0.0, 0.01, 0.02, 0.03, 0.05], M)
    checks.append(_check(f"expansion_e2:{s:g}", fit.coefficients[2], KAPPA * gamma(a, s).gamma_bare))
    out = _out_dir(cfg)
    write_results_csv(out / "mc_results.csv", results)
    write_manifest(out / "mc_manifest.json", sc, [f for f, _ in plan], {"command": "mc-verify", "s": s})
    payload = {
        "artifact": "mc-verify", "sequence": a.name or a.content_hash(), "sequence_hash": a.content_hash(),
        "s": s, "seed": cfg["seed"], "samples": M, "truncation": sc.truncation, "kappa": KAPPA,
        "checks": checks, "all_pass": all(c["status"] == "pass" for c in checks),
    }
    _emit(cfg, "mc_verify", "mc_verify", payload)
    return EXIT_OK


def cmd_evolve(cfg: dict) -> int:
    import numpy as np

    from .flow import energy, enstrophy, evolve, remainder_norms, remainder_slope
    from .lattice import SpectralField
    from .rng import SamplerConfig, sample_coeffs
    from .stochastic import growth_experiment

    a = resolve_sequence(cfg)
    sc = SamplerConfig(a, cfg["truncation"], cfg["seed"], cfg["samples"])
    res = growth_experiment(sc, cfg["s"], cfg["t_max"], cfg["dt"], cfg["samples"])
    # one representative trajectory for the remainder and conservation diagnostics
    grid = [k * cfg["dt"] for k in range(int(round(cfg["t_max"] / cfg["dt"])) + 1)]
    traj = evolve(SpectralField(sample_coeffs(sc, [0])[0], check=False), grid, cfg["dt"])
    rem = remainder_norms(traj, cfg["s"])
    try:
        slope = remainder_slope(traj, cfg["s"], t_min=grid[1], t_max=cfg["t_max"])
    except ValueError:
        slope = None
    z = np.array([enstrophy(st) for st in traj.states])
    e = np.array([energy(st) for st in traj.states])
    drift = lambda v: float(np.max(np.abs(v / v[0] - 1.0))) if v[0] > 0 else 0.0

    out = _out_dir(cfg)
    with open(out / "growth.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean_increment", "fit", "reference"])
        for t, d in zip(res.times, res.mean_increment):
            fit = res.fitted_quadratic * t * t + res.fitted_cubic * t**3
            w.writerow([repr(t), repr(d), repr(fit), repr(res.reference * t * t)])
    traj.summary_csv(out / "trajectory_summary.csv", cfg["s"])
    payload = {
        "artifact": "evolve", "sequence": a.name or a.content_hash(), "sequence_hash": a.content_hash(),
        "s": cfg["s"], "truncation": cfg["truncation"], "seed": cfg["seed"],
        "t_max": cfg["t_max"], "dt": cfg["dt"], **res.to_json(),
        "remainder": [[t, v] for t, v in rem], "remainder_slope": slope,
        "enstrophy_drift": drift(z), "energy_drift": drift(e),
    }
    _emit(cfg, "growth", "growth", payload)
    return EXIT_OK


def cmd_report(cfg: dict) -> int:
    from .report import build_report

    inputs = cfg.get("inputs") or [cfg.get("output_dir") or "."]
    payload = build_report(inputs, _out_dir(cfg))
    _emit(cfg, "report", "report", payload, quiet=True)
    sys.stdout.write((_out_dir(cfg) / "report.md").read_text())
    return EXIT_OK


COMMANDS = {
    "gamma": cmd_gamma,
    "certify": cmd_certify,
    "classify": cmd_classify,
    "mc-verify": cmd_mc_verify,
    "evolve": cmd_evolve,
    "report": cmd_report,
}


def _set_threads(cfg: dict) -> None:
    if "threads" in cfg:
        os.environ["EULER_GAUSS_THREADS"] = str(cfg["threads"])
    else:
        os.environ.setdefault("EULER_GAUSS_THREADS", str(os.cpu_count() or 1))


def main(argv: list[str] | None = None) -> int:
    from .certificate import UnsupportedProfileError
    from .flow import NumericalAbort
    from .lattice import SequenceError
    from .wick import SupportTooLarge

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        _set_threads(cfg)
        return COMMANDS[cfg["command"]](cfg)
    except (UnsupportedProfileError, SupportTooLarge) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, SequenceError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

if __name__ == "__main__":
    sys.exit(main())
