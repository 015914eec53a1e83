"""Plateau bumps and the lower-bound witness family ``f_lam``.

``f_lam`` equals 1 for ``lam**0.5 * t`` within ``eps/2`` of 1 and vanishes
once ``lam**0.5 * t`` is ``eps`` away from 1.  On the window

    u in (1-eps, 1+eps),  v in lam**-0.25 (1-eps, 1+eps),  t in lam**-0.5 (1-eps, 1+eps)

the scaled phase ``lam (u t**2 + v**2 t)`` stays close to 2, so ``T f_lam``
cannot cancel there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .mollifier import plateau
from .phase import PhaseSpec, case_c, eval_phase
from .quadrature import QuadConfig, SampledFunction, composite_gl, panel_count

SMOOTHNESS = ("C_inf_exp", "polynomial")
EPS_CANDIDATES = (0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.0025, 0.001)


@dataclass(frozen=True)
class BumpSpec:
    """Plateau on ``inner = (b, c)``, support ``outer = (a, d)``."""

    outer: tuple
    inner: tuple
    smoothness: str = "C_inf_exp"
    order: int = 3

    def __post_init__(self):
        a, d = self.outer
        b, c = self.inner
        if not a < b < c < d:
            raise ValidationError("need a < b < c < d")
        if self.smoothness not in SMOOTHNESS:
            raise ValidationError(f"smoothness must be one of {SMOOTHNESS}")
        if self.smoothness == "polynomial" and self.order < 1:
            raise ValidationError("polynomial order must be >= 1")


def make_bump(spec: BumpSpec):
    """Vectorized plateau function described by ``spec``."""

    def bump_fn(t):
        return plateau(t, spec.outer, spec.inner, spec.smoothness, spec.order)

    return bump_fn


@dataclass(frozen=True)
class ExtremalParams:
    """Window half-width ``eps`` and oscillation parameter ``lam``."""

    eps: float
    lam: float

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise ValidationError("eps must lie in (0, 1/2)")
        if not self.lam > 0.0:
            raise ValidationError("lam must be positive")

    @property
    def t_scale(self) -> float:
        return self.lam ** -0.5

    @property
    def v_scale(self) -> float:
        return self.lam ** -0.25

    def bump_spec(self, smoothness: str = "C_inf_exp") -> BumpSpec:
        s, e = self.t_scale, self.eps
        return BumpSpec((s * (1 - e), s * (1 + e)), (s * (1 - e / 2), s * (1 + e / 2)), smoothness)


def extremal_phase_range(params: ExtremalParams, box: float = 2.0) -> float:
    """Upper bound on the spread of ``u t**2 + v**2 t`` over the support of ``f_lam``.

    Taken over ``|u|, |v| <= box``; used to size the t-grid so that
    ``T f_lam`` is resolved everywhere on the output box.
    """
    lo = params.t_scale * (1 - params.eps)
    hi = params.t_scale * (1 + params.eps)
    return box * (hi * hi - lo * lo) + box * box * (hi - lo)


def make_extremal(
    params: ExtremalParams,
    cfg: QuadConfig = QuadConfig(),
    phase_range: float | None = None,
    transition_panels: int = 8,
    smoothness: str = "C_inf_exp",
    n_panels: int | None = None,
) -> SampledFunction:
    """Sample ``f_lam`` on a composite Gauss-Legendre grid aligned with its breakpoints.

    Parameters
    ----------
    params : ExtremalParams
    cfg : QuadConfig
        Rule order and oscillation-based panel count.
    phase_range : float, optional
        Spread of the phase over the support, before multiplying by ``lam``.
        Defaults to :func:`extremal_phase_range`.
    transition_panels : int
        Minimum number of panels on each transition and on the plateau.
    smoothness : str
        Transition family.
    n_panels : int, optional
        Total panel budget overriding the oscillation-based count.

    Returns
    -------
    SampledFunction
    """
    if phase_range is None:
        phase_range = extremal_phase_range(params)
    if n_panels is None:
        n_panels = panel_count(params.lam, phase_range, cfg)
    s, e = params.t_scale, params.eps
    breaks = s * np.array([1 - e, 1 - e / 2, 1 + e / 2, 1 + e])
    # transitions cover a quarter of the support each, the plateau half
    counts = (
        max(transition_panels, int(np.ceil(n_panels / 4))),
        max(transition_panels, int(np.ceil(n_panels / 2))),
        max(transition_panels, int(np.ceil(n_panels / 4))),
    )
    edges = np.concatenate(
        [np.linspace(breaks[i], breaks[i + 1], k + 1)[:-1] for i, k in enumerate(counts)] + [breaks[-1:]]
    )
    nodes, weights = composite_gl(edges, cfg.gl_order)
    values = make_bump(params.bump_spec(smoothness))(nodes)
    return SampledFunction(nodes, weights, values)


def l2_norm(f: SampledFunction) -> float:
    """``sqrt(sum w |f|**2)``."""
    return float(np.sqrt(np.sum(f.weights * np.abs(f.values) ** 2)))


def window_axes(params: ExtremalParams, n: int = 21):
    """Equispaced ``u``, ``v`` and ``t`` samples spanning the closed window."""
    e = params.eps
    base = np.linspace(1 - e, 1 + e, n)
    return base, params.v_scale * base, params.t_scale * base


def window_deviation(eps: float, lam: float = 1e3, n: int = 21, spec: PhaseSpec | None = None) -> float:
    """Maximum of ``|lam S - 2 D|`` over an ``n**3`` grid of the window."""
    spec = case_c() if spec is None else spec
    u, v, t = window_axes(ExtremalParams(eps, lam), n)
    uu, vv, tt = np.meshgrid(u, v, t, indexing="ij")
    return float(np.max(np.abs(lam * eval_phase(spec, uu, vv, tt) - 2 * spec.d_const)))


def calibrate_epsilon(delta: float = 0.5, lam: float = 1e3, candidates=EPS_CANDIDATES, n: int = 21) -> float:
    """Largest candidate ``eps`` whose window keeps ``|lam S - 2| < delta``.

    For the ``u t**2 + v**2 t`` phase the scaled phase on the window does not
    depend on ``lam``, so the result does not either.
    """
    if not delta > 0:
        raise ValidationError("delta must be positive")
    for eps in sorted(candidates, reverse=True):
        if window_deviation(eps, lam, n) < delta:
            return float(eps)
    raise ValidationError(f"no candidate eps satisfies delta={delta}")
