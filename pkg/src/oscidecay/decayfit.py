"""Geometric lambda sweeps and log-log power-law fits.

``fit_power_law`` regresses ``log y`` on ``log lam`` (model ``pure_power``)
or on ``log lam`` and ``log log lam`` (model ``power_with_log``, for rates
like ``lam**s * log(lam)**k``).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .normest import NormConfig, WitnessConfig, WitnessRecord, estimate_norm, witness_chain
from .phase import PhaseSpec, case_c
from .quadrature import Amplitude
from .testfn import ExtremalParams, calibrate_epsilon, l2_norm, make_extremal

log = logging.getLogger(__name__)

MODES = ("rayleigh", "opnorm", "norm_f", "pointwise", "image")
MODELS = ("pure_power", "power_with_log")
WITNESS_FIELDS = {"rayleigh": "quotient", "norm_f": "norm_f", "pointwise": "pointwise_min", "image": "norm_Tf"}


@dataclass
class SweepRow:
    """One sweep point; ``error`` is set (and ``quantity`` is NaN) when the point failed."""

    lam: float
    quantity: float
    mode: str
    meta: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and math.isfinite(self.quantity) and self.quantity > 0


@dataclass
class DecayFit:
    """Least-squares fit of ``log y = intercept + slope log lam [+ log_coef log log lam]``."""

    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    model: str
    n: int
    max_abs_residual: float
    log_coef: Optional[float] = None
    log_coef_stderr: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def predict(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = self.intercept + self.slope * np.log(lam)
        if self.log_coef is not None:
            out = out + self.log_coef * np.log(np.log(lam))
        return np.exp(out)


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines the rows of a sweep.

    ``eps=None`` calibrates the witness window from ``delta``.
    """

    eps: Optional[float] = None
    delta: float = 0.5
    witness: WitnessConfig = field(default_factory=WitnessConfig)
    norm: NormConfig = field(default_factory=NormConfig)
    amp: Amplitude = field(default_factory=Amplitude)

    def resolved_eps(self) -> float:
        return calibrate_epsilon(self.delta) if self.eps is None else float(self.eps)


def geometric_lambdas(lam_min: float, lam_max: float, count: int) -> np.ndarray:
    """``count`` logarithmically equispaced values from ``lam_min`` to ``lam_max``."""
    if count < 5:
        raise ValidationError("a sweep needs at least 5 lambda values")
    if not 0 < lam_min < lam_max:
        raise ValidationError("need 0 < lambda_min < lambda_max")
    return np.geomspace(lam_min, lam_max, count)


def _check_lambdas(lams) -> np.ndarray:
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or len(lams) < 5:
        raise ValidationError("a sweep needs at least 5 lambda values")
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise ValidationError("lambda values must be positive and strictly increasing")
    return lams


def witness_rows(records: Sequence[WitnessRecord], mode: str) -> list[SweepRow]:
    """Project witness records onto one of the witness-derived modes."""
    key = WITNESS_FIELDS[mode]
    rows = []
    for rec in records:
        meta = rec.to_dict()
        rows.append(SweepRow(rec.lam, float(meta[key]), mode, meta))
    return rows


def sweep(spec: Optional[PhaseSpec], lams, mode: str, cfg: SweepConfig = SweepConfig()) -> list[SweepRow]:
    """Compute one row per lambda; failures are recorded on the row and the sweep continues.

    Parameters
    ----------
    spec : PhaseSpec or None
        Phase for ``opnorm`` mode.  Witness modes always use
        ``u t**2 + v**2 t``; ``None`` selects that phase.
    lams : sequence of float
        Strictly increasing, at least 5 values.
    mode : str
        ``rayleigh``, ``image``, ``pointwise``, ``norm_f`` or ``opnorm``.
    cfg : SweepConfig
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}")
    lams = _check_lambdas(lams)
    spec = case_c() if spec is None else spec
    rows = []
    eps = cfg.resolved_eps() if mode != "opnorm" else None
    for lam in lams:
        try:
            if mode == "opnorm":
                res = estimate_norm(spec, lam, cfg.amp, cfg.norm)
                row = SweepRow(float(lam), res.value, mode, {**res.to_dict(), "seed": cfg.norm.seed})
            elif mode == "norm_f":
                f = make_extremal(ExtremalParams(eps, lam), cfg.witness.quad)
                row = SweepRow(float(lam), l2_norm(f), mode, {"eps": eps, "delta": cfg.delta, "grid_nt": len(f)})
            else:
                rec = witness_chain(lam, eps, cfg.witness, amp=cfg.amp)
                row = witness_rows([rec], mode)[0]
                row.meta["delta"] = cfg.delta
        except (NumericalError, ValidationError, MemoryError) as exc:
            log.warning("sweep point lambda=%g failed: %s", lam, exc)
            row = SweepRow(float(lam), float("nan"), mode, {}, f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


def fit_power_law(rows, model: str = "pure_power") -> DecayFit:
    """Ordinary least squares on ``(log lam, log y)``.

    Parameters
    ----------
    rows : sequence of SweepRow, or a pair ``(lams, values)``
        Failed rows are skipped.
    model : {"pure_power", "power_with_log"}

    Raises
    ------
    ValidationError
        Fewer than 5 usable rows, non-positive values, or a rank-deficient
        design matrix.
    """
    if model not in MODELS:
        raise ValidationError(f"model must be one of {MODELS}")
    if isinstance(rows, tuple) and len(rows) == 2 and not isinstance(rows[0], SweepRow):
        lams, ys = (np.asarray(a, dtype=float) for a in rows)
    else:
        good = [r for r in rows if r.ok]
        lams = np.array([r.lam for r in good], dtype=float)
        ys = np.array([r.quantity for r in good], dtype=float)
    if len(lams) < 5:
        raise ValidationError("a fit needs at least 5 successful rows")
    if np.any(ys <= 0) or np.any(lams <= 0) or not np.all(np.isfinite(ys)):
        raise ValidationError("lambda values and quantities must be positive and finite")
    x = np.log(lams)
    cols = [np.ones_like(x), x]
    if model == "power_with_log":
        if np.any(lams <= 1):
            raise ValidationError("power_with_log needs lambda > 1")
        cols.append(np.log(x))
    design = np.column_stack(cols)
    y = np.log(ys)
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise ValidationError("degenerate design matrix: lambda values do not spread enough")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    n, k = design.shape
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # a constant series has no variance to explain beyond roundoff
    flat = ss_tot <= n * (1e-12 * max(1.0, float(np.max(np.abs(y))))) ** 2
    r2 = 1.0 if flat else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    dof = n - k
    if dof > 0:
        cov = ss_res / dof * np.linalg.inv(design.T @ design)
        stderr = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    else:
        stderr = np.zeros(k)
    return DecayFit(
        slope=float(coef[1]),
        intercept=float(coef[0]),
        r_squared=r2,
        slope_stderr=float(stderr[1]),
        model=model,
        n=n,
        max_abs_residual=float(np.max(np.abs(resid))),
        log_coef=float(coef[2]) if k == 3 else None,
        log_coef_stderr=float(stderr[2]) if k == 3 else None,
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def rows_to_csv(rows: Sequence[SweepRow], columns: Optional[Sequence[str]] = None, dest=None) -> Optional[str]:
    """CSV with columns ``lambda, quantity, mode``, the metadata keys, then ``error``.

    Floats use the shortest round-trip representation.  Returns the text
    when ``dest`` is None.
    """
    if columns is None:
        columns = []
        for r in rows:
            for key in r.meta:
                if key not in columns and key != "lam":
                    columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "quantity", "mode", *columns, "error"])
    for r in rows:
        writer.writerow([_fmt(r.lam), _fmt(r.quantity), r.mode, *(_fmt(r.meta.get(c)) for c in columns), r.error or ""])
    text = buf.getvalue()
    if dest is None:
        return text
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return None


def _parse(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def rows_from_csv(source) -> list[SweepRow]:
    """Inverse of :func:`rows_to_csv`; accepts a path or a text stream."""
    if hasattr(source, "read"):
        records = list(csv.DictReader(source))
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            records = list(csv.DictReader(fh))
    rows = []
    for rec in records:
        meta = {k: _parse(v) for k, v in rec.items() if k not in ("lambda", "quantity", "mode", "error")}
        rows.append(SweepRow(float(rec["lambda"]), float(rec["quantity"]), rec["mode"], meta, rec["error"] or None))
    return rows


def fit_to_json(fit: DecayFit, extra: Optional[dict] = None) -> str:
    return json.dumps({**fit.to_dict(), **(extra or {})}, indent=2, sort_keys=True)


def render_svg(rows: Sequence[SweepRow], fits: Sequence[DecayFit] = (), title: str = "", width: int = 640,
               height: int = 420) -> str:
    """Static log-log chart of the sweep points with the fitted curves."""
    good = [r for r in rows if r.ok]
    if not good:
        raise ValidationError("nothing to plot")
    x = np.log10([r.lam for r in good])
    y = np.log10([r.quantity for r in good])
    curves = []
    xs = np.linspace(x.min(), x.max(), 60)
    for fit in fits:
        curves.append((fit, np.log10(fit.predict(10 ** xs))))
    ally = np.concatenate([y] + [c for _, c in curves])
    x0, x1 = x.min(), x.max()
    y0, y1 = ally.min(), ally.max()
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad_l, pad_r, pad_t, pad_b = 70, 20, 40, 50

    def px(v):
        return pad_l + (v - x0) / (x1 - x0) * (width - pad_l - pad_r)

    def py(v):
        return height - pad_b - (v - y0) / (y1 - y0) * (height - pad_t - pad_b)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_escape(title)}</text>',
        f'<line x1="{pad_l}" y1="{height - pad_b}" x2="{width - pad_r}" y2="{height - pad_b}" stroke="black"/>',
        f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{height - pad_b}" stroke="black"/>',
    ]
    for k in range(int(np.ceil(x0)), int(np.floor(x1)) + 1):
        out.append(f'<text x="{px(k):.1f}" y="{height - pad_b + 18}" text-anchor="middle">1e{k}</text>')
    for k in np.linspace(y0, y1, 5):
        out.append(f'<text x="{pad_l - 6}" y="{py(k) + 4:.1f}" text-anchor="end">{10 ** k:.2g}</text>')
    out.append(f'<text x="{(pad_l + width - pad_r) / 2:.1f}" y="{height - 12}" text-anchor="middle">lambda</text>')
    colors = ["#c0392b", "#2471a3", "#239b56"]
    for i, (fit, cy) in enumerate(curves):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, cy))
        color = colors[i % len(colors)]
        label = f"{fit.model}: slope {fit.slope:.4f}"
        if fit.log_coef is not None:
            label += f", log-log coef {fit.log_coef:.3f}"
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{pad_l + 10}" y="{pad_t + 16 * (i + 1)}" fill="{color}">{_escape(label)}</text>')
    for a, b in zip(x, y):
        out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3.5" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def witness_sweep(lams, cfg: SweepConfig = SweepConfig()) -> list[WitnessRecord]:
    """Full witness records for each lambda; one pass serves every witness-derived mode."""
    lams = _check_lambdas(lams)
    eps = cfg.resolved_eps()
    return [witness_chain(lam, eps, cfg.witness, amp=cfg.amp) for lam in lams]
