"""Command-line front end: ``oscidecay {classify,witness,norm}``.

Every sweep writes its resolved configuration to ``config.json`` next to
its outputs; ``--config`` replays such a file.  Exit codes: 0 success,
2 invalid input, 3 numerical failure.  Errors are also reported as a JSON
object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from threadpoolctl import threadpool_limits

from .decayfit import (
    MODES,
    SweepConfig,
    fit_power_law,
    fit_to_json,
    geometric_lambdas,
    render_svg,
    rows_to_csv,
    sweep,
)
from .errors import NumericalError, ValidationError
from .normest import SEED, GramConfig, NormConfig, WitnessConfig
from .phase import NAMED_PHASES, LinearForm, QuadraticForm, make_spec

log = logging.getLogger("oscidecay")

THREADS_ENV = "OSCIDECAY_THREADS"
WITNESS_COLUMNS = ["norm_f", "norm_Tf", "quotient", "pointwise_min", "grid_nt", "grid_nuv", "eps", "window_energy"]
NORM_COLUMNS = ["iterations", "residual", "n_t", "n_uv", "method", "window", "edge_mass", "seed"]


@dataclass
class RunConfig:
    """Resolved parameters of one CLI run."""

    command: str = "norm"
    phase: Optional[str] = None
    p1: Optional[list] = None
    p2: Optional[list] = None
    lambda_min: Optional[float] = None
    lambda_max: Optional[float] = None
    count: Optional[int] = None
    eps: str = "auto"
    delta: float = 0.5
    mode: Optional[str] = None
    method: str = "auto"
    node_cap: int = 9000
    uv_order: int = 4
    uv_cap: int = 2_000_000
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = SEED
    threads: int = 1
    out: Optional[str] = None

    def validate(self) -> None:
        if self.command not in ("classify", "witness", "norm"):
            raise ValidationError(f"unknown command {self.command!r}")
        if self.phase is not None and self.phase not in NAMED_PHASES:
            raise ValidationError(f"unknown phase {self.phase!r}; choose from {sorted(NAMED_PHASES)}")
        if self.p1 is not None and len(self.p1) != 2:
            raise ValidationError("--p1 takes two comma-separated numbers")
        if self.p2 is not None and len(self.p2) != 3:
            raise ValidationError("--p2 takes three comma-separated numbers")
        if self.command == "classify":
            if self.phase is None and (self.p1 is None or self.p2 is None):
                raise ValidationError("classify needs --p1 and --p2, or --phase")
            return
        if self.eps != "auto":
            try:
                eps = float(self.eps)
            except ValueError as exc:
                raise ValidationError("--eps must be a number or 'auto'") from exc
            if not 0 < eps < 0.5:
                raise ValidationError("eps must lie in (0, 1/2)")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.count is None or self.count < 5:
            raise ValidationError("a sweep needs at least 5 lambda values")
        if not (self.lambda_min and self.lambda_max and 0 < self.lambda_min < self.lambda_max):
            raise ValidationError("need 0 < lambda-min < lambda-max (a sweep needs at least 5 distinct points)")
        if self.threads < 1 or self.node_cap < 2 or self.uv_order < 1 or self.tol <= 0 or self.max_iter < 1:
            raise ValidationError("threads, node-cap, uv-order, tol and max-iter must be positive")
        if self.delta <= 0:
            raise ValidationError("delta must be positive")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


DEFAULTS = {
    "witness": {"lambda_min": 1e2, "lambda_max": 1e5, "count": 10, "mode": "rayleigh", "out": "witness-out"},
    "norm": {"lambda_min": 1e2, "lambda_max": 1e4, "count": 8, "mode": "opnorm", "phase": "case-c", "out": "norm-out"},
    "classify": {},
}


def _numbers(text: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _phase_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p1", type=_numbers, help="coefficients p,q of P1 = p u + q v")
    p.add_argument("--p2", type=_numbers, help="coefficients a,b,c of P2 = a u^2 + b u v + c v^2")
    p.add_argument("--phase", choices=sorted(NAMED_PHASES), help="named normal form instead of coefficients")


def _sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--count", type=int, help="number of geometric sweep points")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="replay a config.json written by an earlier run")
    p.add_argument("--threads", type=int, help=f"worker cap (default: ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscidecay", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("classify", help="classify a phase and print its normal form")
    _phase_args(pc)

    pw = sub.add_parser("witness", help="sweep the lower-bound witness over lambda")
    _sweep_args(pw)
    pw.add_argument("--eps", help="window half-width, or 'auto' to calibrate")
    pw.add_argument("--delta", type=float, help="phase-window tolerance used by eps calibration")
    pw.add_argument("--mode", choices=["rayleigh", "image", "pointwise", "norm_f"], help="quantity to fit")
    pw.add_argument("--uv-order", type=int, help="Gauss-Legendre nodes per uv panel")
    pw.add_argument("--uv-cap", type=int, help="maximum number of uv nodes")

    pn = sub.add_parser("norm", help="sweep operator-norm estimates over lambda")
    _phase_args(pn)
    _sweep_args(pn)
    pn.add_argument("--method", choices=["auto", "gram", "dense"])
    pn.add_argument("--node-cap", type=int, help="largest t-grid for the Gram path")
    pn.add_argument("--tol", type=float, help="relative tolerance of power iteration")
    pn.add_argument("--max-iter", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    cfg = RunConfig(command=args.command, **DEFAULTS[args.command])
    if getattr(args, "config", None):
        loaded = RunConfig.from_file(args.config)
        if loaded.command != args.command:
            raise ValidationError(f"config is for {loaded.command!r}, not {args.command!r}")
        cfg = loaded
    updates = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None and f.name != "command":
            updates[f.name] = val
    explicit_forms = "p1" in updates or "p2" in updates
    if explicit_forms and "phase" in updates:
        raise ValidationError("give either --phase or --p1/--p2, not both")
    if explicit_forms:
        updates["phase"] = None
    cfg = replace(cfg, **updates)
    if getattr(args, "threads", None) is None and not getattr(args, "config", None):
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                cfg.threads = int(env)
            except ValueError as exc:
                raise ValidationError(f"{THREADS_ENV} must be an integer") from exc
    if cfg.phase is not None:
        cfg.p1 = cfg.p2 = None
    cfg.validate()
    return cfg


def _spec_from(cfg: RunConfig):
    if cfg.phase is not None:
        return NAMED_PHASES[cfg.phase]()
    if cfg.p1 is None or cfg.p2 is None:
        raise ValidationError("need --p1 and --p2, or --phase")
    return make_spec(LinearForm(*cfg.p1), QuadraticForm(*cfg.p2))


def cmd_classify(cfg: RunConfig) -> dict:
    spec = _spec_from(cfg)
    out = spec.to_dict()
    print(json.dumps(out, indent=2))
    return out


def _sweep_config(cfg: RunConfig) -> SweepConfig:
    return SweepConfig(
        eps=None if cfg.eps == "auto" else float(cfg.eps),
        delta=cfg.delta,
        witness=WitnessConfig(uv_order=cfg.uv_order, uv_cap=cfg.uv_cap, workers=cfg.threads),
        norm=NormConfig(method=cfg.method, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed,
                        gram=GramConfig(node_cap=cfg.node_cap)),
    )


def _write_outputs(cfg: RunConfig, stem: str, rows, columns, report: dict, fits, title: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json(), encoding="utf-8")
    rows_to_csv(rows, columns, out / f"{stem}.csv")
    (out / "fit.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if any(r.ok for r in rows):
        (out / f"{stem}.svg").write_text(render_svg(rows, fits, title), encoding="utf-8")
    return out


def _fits(rows, models):
    fits, report = [], {}
    for model in models:
        try:
            fit = fit_power_law(rows, model)
        except ValidationError as exc:
            report[model] = {"error": str(exc)}
            continue
        fits.append(fit)
        report[model] = fit.to_dict()
    return fits, report


def _finish(rows, report) -> int:
    failed = [r for r in rows if not r.ok]
    report["rows_ok"] = len(rows) - len(failed)
    report["rows_failed"] = len(failed)
    if any(r.error and r.error.startswith(("NonConvergence", "NonFinite", "Numerical")) for r in failed):
        return 3
    if failed and report["rows_ok"] < 5:
        return 2
    return 0


def cmd_witness(cfg: RunConfig) -> int:
    lams = geometric_lambdas(cfg.lambda_min, cfg.lambda_max, cfg.count)
    scfg = _sweep_config(cfg)
    eps = scfg.resolved_eps()
    with threadpool_limits(cfg.threads):
        rows = sweep(None, lams, cfg.mode, replace(scfg, eps=eps))
    fits, report = _fits(rows, ["pure_power"])
    report.update({"mode": cfg.mode, "eps": eps, "delta": cfg.delta})
    code = _finish(rows, report)
    columns = ["norm_f", "grid_nt", "eps"] if cfg.mode == "norm_f" else WITNESS_COLUMNS
    out = _write_outputs(cfg, "witness", rows, columns, report, fits, f"witness sweep ({cfg.mode})")
    log.info("wrote %s", out)
    print(fit_to_json(fits[0], {"mode": cfg.mode}) if fits else json.dumps(report))
    return code


def cmd_norm(cfg: RunConfig) -> int:
    spec = _spec_from(cfg)
    lams = geometric_lambdas(cfg.lambda_min, cfg.lambda_max, cfg.count)
    with threadpool_limits(cfg.threads):
        rows = sweep(spec, lams, "opnorm", _sweep_config(cfg))
    fits, report = _fits(rows, ["pure_power", "power_with_log"])
    report["phase"] = spec.to_dict()
    code = _finish(rows, report)
    out = _write_outputs(cfg, "norm", rows, NORM_COLUMNS, report, fits, "operator norm sweep")
    log.info("wrote %s", out)
    print(json.dumps({k: report[k] for k in ("pure_power", "power_with_log")}, indent=2))
    return code


def _fail(kind: str, exc: Exception, code: int) -> int:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    residual = getattr(exc, "residual", None)
    if residual is not None:
        payload["residual"] = residual
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        if cfg.command == "classify":
            cmd_classify(cfg)
            return 0
        if cfg.command == "witness":
            return cmd_witness(cfg)
        return cmd_norm(cfg)
    except ValidationError as exc:
        return _fail("validation", exc, 2)
    except NumericalError as exc:
        return _fail("numerical", exc, 3)


if __name__ == "__main__":
    sys.exit(main())
