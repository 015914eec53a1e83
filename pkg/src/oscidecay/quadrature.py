"""Composite Gauss-Legendre evaluation of ``T f(u, v) = int e^{i lam S} Phi f dt``.

The number of panels grows with the number of oscillations of the phase
over the integration interval, so each panel sees a bounded amount of
oscillation and the fixed-order rule stays near machine accuracy.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NonFiniteError, ValidationError
from .mollifier import rising_step
from .phase import PhaseSpec, eval_phase

DEFAULT_INTERVAL = (-2.0, 2.0)
TRANSITION_PANELS = 8
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class QuadConfig:
    """Panel-selection parameters for the composite rule."""

    gl_order: int = 10
    panels_per_oscillation: float = 4.0
    min_panels: int = 8
    max_panels: int = 200_000

    def __post_init__(self):
        if self.gl_order < 4:
            raise ValidationError("gl_order must be >= 4")
        if self.panels_per_oscillation < 1:
            raise ValidationError("panels_per_oscillation must be >= 1")
        if self.min_panels < 1 or self.max_panels < self.min_panels:
            raise ValidationError("need 1 <= min_panels <= max_panels")

    def refined(self, factor: float = 2.0) -> "QuadConfig":
        """Same rule with ``factor`` times as many panels."""
        return QuadConfig(
            self.gl_order,
            self.panels_per_oscillation * factor,
            int(np.ceil(self.min_panels * factor)),
            int(np.ceil(self.max_panels * factor)),
        )


@dataclass(frozen=True)
class Amplitude:
    """Smooth cutoff ``Phi(u, v, t)``, 1 on the plateau box and 0 outside the support box.

    With ``func`` left as ``None`` the amplitude is the tensor product
    ``chi(u) chi(v) chi(t)`` of a one-dimensional C-infinity cutoff.  A custom
    callable may be supplied instead; it must broadcast over arrays.
    """

    r0: float = 1.5
    r: float = 2.0
    func: Optional[Callable] = None

    def __post_init__(self):
        if not 0.0 < self.r0 < self.r:
            raise ValidationError("need 0 < r0 < r")

    @property
    def is_tensor(self) -> bool:
        return self.func is None

    def profile(self, x):
        """One-dimensional cutoff factor."""
        ax = np.abs(np.asarray(x, dtype=float))
        return 1.0 - rising_step((ax - self.r0) / (self.r - self.r0))

    def __call__(self, u, v, t):
        if self.func is not None:
            return self.func(u, v, t)
        return self.profile(u) * self.profile(v) * self.profile(t)


class SampledFunction:
    """Function values on a one-dimensional quadrature grid.

    Parameters
    ----------
    nodes : array_like
        Strictly increasing sample points.
    weights : array_like
        Positive quadrature weights.
    values : array_like
        Real or complex samples; stored as complex.
    """

    __slots__ = ("nodes", "weights", "values")

    def __init__(self, nodes, weights, values):
        nodes = np.array(nodes, dtype=float)
        weights = np.array(weights, dtype=float)
        values = np.array(values, dtype=complex)
        if not (nodes.ndim == weights.ndim == values.ndim == 1):
            raise ValidationError("nodes, weights and values must be one-dimensional")
        if not (len(nodes) == len(weights) == len(values)):
            raise ValidationError("nodes, weights and values must have equal lengths")
        if len(nodes) > 1 and np.any(np.diff(nodes) <= 0):
            raise ValidationError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValidationError("weights must be positive")
        for arr in (nodes, weights, values):
            arr.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("SampledFunction is immutable")

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"SampledFunction(n={len(self)}, span=[{self.nodes[0]:g}, {self.nodes[-1]:g}])"

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.nodes, self.weights, values)

    def scaled(self, c: complex) -> "SampledFunction":
        return self.with_values(c * self.values)

    def to_csv(self, dest=None) -> Optional[str]:
        """Write columns ``node, weight, re, im``; returns the text when ``dest`` is None."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node", "weight", "re", "im"])
        for x, w, z in zip(self.nodes, self.weights, self.values):
            writer.writerow([repr(float(x)), repr(float(w)), repr(float(z.real)), repr(float(z.imag))])
        text = buf.getvalue()
        if dest is None:
            return text
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None

    @classmethod
    def from_csv(cls, source) -> "SampledFunction":
        """Read the format written by :meth:`to_csv` from a path or a text stream."""
        if hasattr(source, "read"):
            rows = list(csv.DictReader(source))
        else:
            with open(source, encoding="utf-8", newline="") as fh:
                rows = list(csv.DictReader(fh))
        return cls(
            [float(r["node"]) for r in rows],
            [float(r["weight"]) for r in rows],
            [complex(float(r["re"]), float(r["im"])) for r in rows],
        )


@lru_cache(maxsize=64)
def _reference_rule(order: int):
    x, w = leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gl_panel(order: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on ``[a, b]``.

    Exact for polynomials of degree up to ``2 * order - 1``.
    """
    if order < 1:
        raise ValidationError("order must be >= 1")
    if not a < b:
        raise ValidationError("need a < b")
    x, w = _reference_rule(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def composite_gl(edges, order: int):
    """Composite rule over consecutive panels given by increasing ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValidationError("edges must be strictly increasing with at least two entries")
    x, w = _reference_rule(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def panel_count(lam: float, phase_range: float, cfg: QuadConfig = QuadConfig()) -> int:
    """Panels needed to put ``panels_per_oscillation`` panels on each oscillation."""
    if phase_range < 0:
        raise ValidationError("phase_range must be non-negative")
    raw = np.ceil(cfg.panels_per_oscillation * abs(lam) * phase_range / (2 * np.pi))
    return int(min(max(raw, cfg.min_panels), cfg.max_panels))


def panel_edges(a: float, b: float, n_panels: int, amp: Optional[Amplitude] = None) -> np.ndarray:
    """Edges of ``n_panels`` roughly equal panels on ``[a, b]``.

    When ``amp`` is a cutoff, its breakpoints ``+-r0`` and ``+-r`` become
    panel edges and each transition zone gets at least ``TRANSITION_PANELS``
    panels, since the cutoff has large high-order derivatives there.
    """
    if amp is None:
        return np.linspace(a, b, n_panels + 1)
    marks = [a, b] + [x for x in (-amp.r, -amp.r0, amp.r0, amp.r) if a < x < b]
    marks = np.unique(marks)
    pieces = []
    for lo, hi in zip(marks[:-1], marks[1:]):
        k = int(np.ceil(n_panels * (hi - lo) / (b - a)))
        mid = 0.5 * (lo + hi)
        if amp.r0 < abs(mid) < amp.r:
            k = max(k, TRANSITION_PANELS)
        pieces.append(np.linspace(lo, hi, max(k, 1) + 1)[:-1])
    pieces.append([b])
    return np.concatenate(pieces)


def _phase_values(spec, u, v, t):
    if isinstance(spec, PhaseSpec):
        return eval_phase(spec, u, v, t)
    return spec(u, v, t)


def sampled_phase_range(spec, u: float, v: float, interval) -> float:
    """Spread of the phase over ``interval`` from 32 interior samples plus the endpoints."""
    t = np.linspace(interval[0], interval[1], 34)
    s = np.asarray(_phase_values(spec, u, v, t), dtype=float) * np.ones_like(t)
    return float(s.max() - s.min())


def _check_finite(values, u, v, t):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        uu = np.broadcast_to(u, bad.shape)[idx]
        vv = np.broadcast_to(v, bad.shape)[idx]
        tt = np.broadcast_to(t, bad.shape)[idx]
        where = (float(uu), float(vv), float(tt))
        raise NonFiniteError(f"non-finite integrand at (u, v, t) = {where}", where)


def _kernel_rows(spec, lam, amp, u, v, t, wf):
    """``sum_j e^{i lam S(u_k, v_k, t_j)} Phi(u_k, v_k, t_j) wf_j`` for each k."""
    uc, vc, tr = u[:, None], v[:, None], t[None, :]
    phase = _phase_values(spec, uc, vc, tr)
    if amp is None:
        kern = np.exp(1j * lam * phase)
        weighted = wf
        scale = 1.0
    elif isinstance(amp, Amplitude) and amp.is_tensor:
        kern = np.exp(1j * lam * phase)
        weighted = amp.profile(t) * wf
        scale = amp.profile(u) * amp.profile(v)
    else:
        kern = np.exp(1j * lam * phase) * amp(uc, vc, tr)
        weighted = wf
        scale = 1.0
    _check_finite(kern, uc, vc, tr)
    out = scale * (kern @ weighted)
    _check_finite(out[:, None], uc, vc, tr[:, :1])
    return out


def oscillatory_integral(
    spec: Union[PhaseSpec, Callable],
    lam: float,
    u: float,
    v: float,
    amp: Optional[Amplitude],
    f: Union[Callable, SampledFunction],
    interval=DEFAULT_INTERVAL,
    cfg: QuadConfig = QuadConfig(),
    n_panels: Optional[int] = None,
) -> complex:
    """Composite Gauss-Legendre value of ``int e^{i lam S(u,v,t)} Phi(u,v,t) f(t) dt``.

    Parameters
    ----------
    spec : PhaseSpec or callable
        The phase.  A callable ``(u, v, t) -> real`` is used as-is, which
        allows arbitrary test phases.
    lam : float
        Oscillation parameter; negative values conjugate the result.
    u, v : float
        Output point.
    amp : Amplitude or None
        Amplitude; ``None`` means the constant 1.
    f : callable or SampledFunction
        A callable is sampled on a composite rule over ``interval`` whose
        panel count follows :func:`panel_count`.  A ``SampledFunction`` is
        integrated with its own nodes and weights and ``interval`` is ignored.
    interval : tuple of float
        Integration limits for callable ``f``.
    cfg : QuadConfig
        Panel-selection rule.
    n_panels : int, optional
        Explicit panel count overriding ``cfg``.

    Returns
    -------
    complex

    Raises
    ------
    NonFiniteError
        If any integrand sample is NaN or infinite.
    """
    u_arr = np.array([float(u)])
    v_arr = np.array([float(v)])
    if isinstance(f, SampledFunction):
        wf = f.weights * f.values
        return complex(_kernel_rows(spec, lam, amp, u_arr, v_arr, f.nodes, wf)[0])
    a, b = float(interval[0]), float(interval[1])
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ValidationError("interval must be finite with a < b")
    if n_panels is None:
        n_panels = panel_count(lam, sampled_phase_range(spec, u, v, (a, b)), cfg)
    t, w = composite_gl(panel_edges(a, b, n_panels, amp), cfg.gl_order)
    fv = np.asarray(f(t), dtype=complex) * np.ones_like(t)
    _check_finite(fv, u, v, t)
    return complex(_kernel_rows(spec, lam, amp, u_arr, v_arr, t, w * fv)[0])


def apply_operator(spec, lam: float, amp: Optional[Amplitude], f: SampledFunction, uv_points, workers: int = 1):
    """Evaluate ``T f`` at every ``(u, v)`` in ``uv_points``.

    Points are split into independent chunks, optionally evaluated by a
    thread pool; the output keeps the input order.

    Returns
    -------
    numpy.ndarray
        Complex array with one entry per point.
    """
    pts = np.asarray(uv_points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return np.zeros(0, dtype=complex)
    wf = f.weights * f.values
    step = max(1, _CHUNK_ELEMENTS // max(len(f), 1))
    bounds = [(i, min(i + step, len(pts))) for i in range(0, len(pts), step)]

    def work(span):
        lo, hi = span
        return _kernel_rows(spec, lam, amp, pts[lo:hi, 0], pts[lo:hi, 1], f.nodes, wf)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    return np.concatenate(parts)
