"""Operator-norm and Rayleigh-quotient estimates for ``T_lam``.

Two discretizations are provided.

* Dense: ``M[k, j] = e^{i lam S(u_k, v_k, t_j)} Phi w_j`` on explicit
  ``(u, v)`` and ``t`` grids.  Memory grows like (number of uv nodes) x
  (number of t nodes), so it is only practical for small ``lam``; it also
  serves as the reference for the Gram path.
* Gram: the kernel of ``T* T`` on a uniform t-grid.  When ``P2`` has no
  ``u v`` term and the amplitude is a tensor product, the ``(u, v)``
  integral factorizes into two one-dimensional Fresnel-type integrals

      F(A, B) = int chi(z)**2 exp(i (A z**2 + B z)) dz

  which are evaluated along each diagonal of the Gram matrix with a chirp
  z-transform, or in closed form when the stationary point sits well
  inside the plateau of ``chi``.

Both feed the same weighted power iteration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import czt

from .errors import NonConvergenceError, NonFiniteError, ValidationError
from .phase import PhaseSpec, case_c, eval_phase
from .quadrature import (
    Amplitude,
    QuadConfig,
    SampledFunction,
    apply_operator,
    composite_gl,
    panel_count,
)
from .testfn import ExtremalParams, l2_norm, make_extremal, window_axes

SEED = 0x5EED


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class UVGrid:
    """Tensor-product quadrature grid on the ``(u, v)`` box.

    Points are ordered with ``u`` as the slow index.
    """

    u_nodes: np.ndarray
    u_weights: np.ndarray
    v_nodes: np.ndarray
    v_weights: np.ndarray
    v_scale: Optional[float] = None

    def __post_init__(self):
        for w in (self.u_weights, self.v_weights):
            if np.any(np.asarray(w) <= 0):
                raise ValidationError("grid weights must be positive")
        if len(self.u_nodes) != len(self.u_weights) or len(self.v_nodes) != len(self.v_weights):
            raise ValidationError("nodes and weights must have equal lengths")

    @property
    def size(self) -> int:
        return len(self.u_nodes) * len(self.v_nodes)

    def points(self) -> np.ndarray:
        uu, vv = np.meshgrid(self.u_nodes, self.v_nodes, indexing="ij")
        return np.column_stack([uu.ravel(), vv.ravel()])

    def weights(self) -> np.ndarray:
        return np.outer(self.u_weights, self.v_weights).ravel()


def _graded_edges(lo, hi, width):
    n = max(1, int(np.ceil((hi - lo) / width - 1e-12)))
    return np.linspace(lo, hi, n + 1)


def _join(*pieces):
    edges = np.concatenate(pieces)
    return np.unique(np.round(edges, 15))


def build_uv_grid(
    lam: float,
    eps: float = 0.05,
    box: float = 2.0,
    base_n: int = 4,
    coarse_width: float = 0.125,
    panels_per_oscillation: float = 4.0,
    cap: int = 2_000_000,
) -> UVGrid:
    """Grid resolving ``T f_lam`` over the box ``[-box, box]**2``.

    Parameters
    ----------
    lam : float
        Oscillation parameter.
    eps : float
        Window half-width of the witness.
    box : float
        Half-width of the square output domain.
    base_n : int
        Gauss-Legendre nodes per panel.
    coarse_width : float
        Largest panel width anywhere.
    panels_per_oscillation : float
        Panels per oscillation of ``|T f_lam|**2`` in ``v`` away from ``v = 0``.
    cap : int
        Maximum number of ``(u, v)`` nodes.

    Notes
    -----
    ``u`` panels have width ``eps/4`` on ``|u - 1| <= 2 eps``.  ``v`` panels
    have width ``eps lam**-0.25 / 4`` on ``|v| <= 2 lam**-0.25``.  Beyond
    that the envelope of ``|T f_lam|**2`` oscillates at rate about
    ``4 eps lam**0.5 |v|``, and panels are spaced uniformly in ``v**2``.
    """
    if not lam > 0:
        raise ValidationError("lam must be positive")
    lo_u, hi_u = max(-box, 1 - 2 * eps), min(box, 1 + 2 * eps)
    u_edges = _join(
        _graded_edges(-box, lo_u, coarse_width),
        _graded_edges(lo_u, hi_u, eps / 4),
        _graded_edges(hi_u, box, coarse_width),
    )
    scale = lam ** -0.25
    zone = min(box, 2 * scale)
    inner = _graded_edges(-zone, zone, min(coarse_width, eps * scale / 4))
    pieces = [inner]
    if zone < box:
        total = 2 * eps * math.sqrt(lam) * (box ** 2 - zone ** 2)
        n_out = max(1, int(np.ceil(panels_per_oscillation * total / (2 * np.pi))))
        n_out = max(n_out, int(np.ceil((box - zone) / coarse_width)))
        outer = np.sqrt(np.linspace(zone ** 2, box ** 2, n_out + 1))
        pieces += [outer, -outer]
    v_edges = _join(*pieces)
    size = (len(u_edges) - 1) * (len(v_edges) - 1) * base_n ** 2
    if size > cap:
        raise ValidationError(
            f"uv grid needs {size} nodes, above the cap of {cap}; lower lam or use a coarser base_n"
        )
    u, wu = composite_gl(u_edges, base_n)
    v, wv = composite_gl(v_edges, base_n)
    return UVGrid(u, wu, v, wv, scale)


def _phase_spreads(spec, box: float, t_extent: float, n: int = 41):
    # largest spread of S along u, along v and along t lines of a sample grid
    u = np.linspace(-box, box, n)
    t = np.linspace(-t_extent, t_extent, n)
    uu, vv, tt = np.meshgrid(u, u, t, indexing="ij")
    s = eval_phase(spec, uu, vv, tt) if isinstance(spec, PhaseSpec) else spec(uu, vv, tt)
    return tuple(float(np.max(s.max(axis=k) - s.min(axis=k))) for k in range(3))


DENSE_QUAD = QuadConfig(gl_order=10, panels_per_oscillation=1.0, min_panels=4)


def dense_grids(spec, lam: float, cfg: QuadConfig = DENSE_QUAD, box: float = 2.0, t_extent: float = 2.0):
    """Oscillation-resolving ``t`` rule and ``(u, v)`` grid for the dense path.

    Panel counts follow :func:`panel_count` applied to the sampled spread of
    the phase along each coordinate direction.

    Returns
    -------
    (t_nodes, t_weights), UVGrid
    """
    su, sv, st = _phase_spreads(spec, box, t_extent)
    nt = panel_count(lam, st, cfg)
    nu = panel_count(lam, su, cfg)
    nv = panel_count(lam, sv, cfg)
    t = composite_gl(np.linspace(-t_extent, t_extent, nt + 1), cfg.gl_order)
    u, wu = composite_gl(np.linspace(-box, box, nu + 1), cfg.gl_order)
    v, wv = composite_gl(np.linspace(-box, box, nv + 1), cfg.gl_order)
    return t, UVGrid(u, wu, v, wv)


# ---------------------------------------------------------------------------
# operators


@dataclass
class DiscreteOperator:
    """Matrix ``M`` acting on t-samples, with quadrature weights on both sides.

    ``M @ f`` approximates ``T f`` at the uv nodes.  The operator norm is
    measured in the weighted inner products ``sum w_t f conj(g)`` and
    ``sum w_uv F conj(G)``.
    """

    matrix: np.ndarray
    row_weights: np.ndarray
    col_weights: np.ndarray

    def __post_init__(self):
        m, n = self.matrix.shape
        if self.row_weights.shape != (m,) or self.col_weights.shape != (n,):
            raise ValidationError("weights do not match the matrix shape")
        if not np.all(np.isfinite(self.matrix)):
            raise NonFiniteError("operator matrix has non-finite entries")

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def weights(self) -> np.ndarray:
        return self.col_weights

    def apply(self, x):
        return self.matrix @ x

    def normal(self, x):
        """``T* T x`` in the weighted inner products."""
        y = self.row_weights * (self.matrix @ x)
        return (self.matrix.conj().T @ y) / self.col_weights

    def weighted_matrix(self) -> np.ndarray:
        """``W_uv**0.5 M W_t**-0.5``; its spectral norm is the operator norm."""
        return np.sqrt(self.row_weights)[:, None] * self.matrix / np.sqrt(self.col_weights)[None, :]

    def dense_norm(self) -> float:
        """Largest singular value by a full SVD (small grids only)."""
        return float(np.linalg.svd(self.weighted_matrix(), compute_uv=False)[0])


@dataclass
class GramOperator:
    """Kernel of ``T* T`` sampled on a t-grid, with t quadrature weights."""

    matrix: np.ndarray
    weights: np.ndarray
    t_nodes: np.ndarray
    window: float

    @property
    def shape(self):
        return self.matrix.shape

    def normal(self, x):
        return self.matrix @ (self.weights * x)

    def dense_norm(self) -> float:
        """Square root of the top eigenvalue of the symmetrized matrix (small grids only)."""
        s = np.sqrt(self.weights)
        sym = s[:, None] * self.matrix * s[None, :]
        return float(np.sqrt(max(np.linalg.eigvalsh(sym)[-1], 0.0)))


def discretize(spec, lam: float, amp: Optional[Amplitude], t_grid, uv_grid) -> DiscreteOperator:
    """Assemble ``M[k, j] = e^{i lam S(u_k, v_k, t_j)} Phi(u_k, v_k, t_j) w_j``.

    Parameters
    ----------
    t_grid : tuple of arrays or SampledFunction
        ``(nodes, weights)``; a ``SampledFunction`` contributes its grid only.
    uv_grid : UVGrid or (points, weights)
    """
    if isinstance(t_grid, SampledFunction):
        t, wt = t_grid.nodes, t_grid.weights
    else:
        t, wt = (np.asarray(a, dtype=float) for a in t_grid)
    if isinstance(uv_grid, UVGrid):
        pts, wuv = uv_grid.points(), uv_grid.weights()
    else:
        pts, wuv = (np.asarray(a, dtype=float) for a in uv_grid)
        pts = pts.reshape(-1, 2)
    rows = []
    step = max(1, (1 << 22) // max(len(t), 1))
    for lo in range(0, len(pts), step):
        chunk = pts[lo:lo + step]
        uc, vc = chunk[:, :1], chunk[:, 1:]
        phase = eval_phase(spec, uc, vc, t[None, :]) if isinstance(spec, PhaseSpec) else spec(uc, vc, t[None, :])
        kern = np.exp(1j * lam * phase)
        if amp is not None:
            kern = kern * amp(uc, vc, t[None, :])
        rows.append(kern * wt[None, :])
    matrix = np.concatenate(rows) if rows else np.zeros((0, len(t)), dtype=complex)
    return DiscreteOperator(matrix, np.asarray(wuv, dtype=float), np.asarray(wt, dtype=float))


@dataclass(frozen=True)
class GramConfig:
    """Resolution controls for the Gram path.

    Attributes
    ----------
    oversampling : float
        Extra factor on the t-grid density relative to the fastest
        oscillation of the kernel.
    node_cap : int
        Largest t-grid; if the full support needs more nodes the t-domain
        is truncated to the widest symmetric window that fits.
    band : float
        Bandwidth allowance for ``chi**2`` in the Fresnel integrals.
    tol : float
        Target accuracy of individual Fresnel integrals.
    cutoff_rate : float
        Phase-derivative bound beyond which a Fresnel integral is treated as zero.
    """

    oversampling: float = 1.25
    node_cap: int = 9000
    band: float = 1000.0
    tol: float = 1e-12
    cutoff_rate: float = 1500.0
    window: Optional[float] = None


def gram_applicable(spec: PhaseSpec, amp: Optional[Amplitude]) -> bool:
    """True when the ``(u, v)`` integral factorizes."""
    amp = Amplitude() if amp is None else amp
    return amp.is_tensor and abs(spec.p2.beta) <= 1e-14 * spec.p2.norm()


def _fresnel_diagonal(A, b0, b1, m, profile_sq, r0, r, cfg: GramConfig):
    """``F(A, b0 + i b1)`` for ``i = 0 .. m-1``."""
    out = np.zeros(m, dtype=complex)
    b = b0 + b1 * np.arange(m)
    if A != 0.0:
        zs = -b / (2 * A)
        dist = r0 - np.abs(zs)
        far = (dist > 0.05) & (abs(A) * dist >= (math.log(1 / cfg.tol) + 2) ** 2)
        if np.any(far):
            out[far] = (
                np.exp(-1j * b[far] ** 2 / (4 * A))
                * math.sqrt(math.pi / abs(A))
                * np.exp(1j * math.pi / 4 * math.copysign(1.0, A))
            )
        min_rate = np.where(np.abs(zs) > r, 2 * abs(A) * (np.abs(zs) - r), 0.0)
        need = ~far & (min_rate < cfg.cutoff_rate)
    else:
        need = np.abs(b) <= cfg.cutoff_rate
    idx = np.flatnonzero(need)
    if idx.size == 0:
        return out
    i0, i1 = idx[0], idx[-1] + 1
    rate = 2 * abs(A) * r + np.abs(b[i0:i1]).max()
    delta = 2 * np.pi / (1.1 * (rate + cfg.band))
    n_z = int(np.ceil(2 * r / delta)) + 1
    z = np.linspace(-r, r, n_z)
    dz = z[1] - z[0]
    g = dz * profile_sq(z) * np.exp(1j * (A * z * z + b[i0] * z))
    n = i1 - i0
    if b1 == 0.0 or n == 1:
        seg = np.full(n, g.sum())
    elif n * n_z <= 1 << 15:
        # direct sum; cheaper than the chirp transform setup for short diagonals
        seg = np.exp(1j * b1 * np.outer(np.arange(n), z)) @ g
    else:
        seg = czt(g, m=n, w=np.exp(1j * b1 * dz), a=1.0) * np.exp(-1j * r * b1 * np.arange(n))
    sel = need[i0:i1]
    out[i0:i1][sel] = seg[sel]
    return out


def _dt_spread_fn(spec: PhaseSpec, box: float):
    # a -> max - min of dS/dt = 2 P1 t + P2 over the box and |t| <= a
    g = np.linspace(-box, box, 201)
    uu, vv = np.meshgrid(g, g)
    p1 = spec.p1(uu, vv)
    p2 = spec.p2(uu, vv)

    def spread(a):
        vals = np.stack([p2 - 2 * a * p1, p2, p2 + 2 * a * p1])
        return spec.d_const * float(vals.max() - vals.min())

    return spread


def _step(lam, spread, cfg):
    return 2 * np.pi / (abs(lam) * spread * cfg.oversampling + 200.0)


def gram_step(spec: PhaseSpec, lam: float, a: float, cfg: GramConfig, box: float = 2.0) -> float:
    """Uniform t-spacing resolving the kernel on ``|t| <= a``."""
    return _step(lam, _dt_spread_fn(spec, box)(a), cfg)


def gram_window(spec: PhaseSpec, lam: float, cfg: GramConfig, amp: Amplitude) -> float:
    """Widest symmetric t-window within the amplitude support whose grid fits the node cap."""
    a_max = amp.r if cfg.window is None else min(cfg.window, amp.r)
    spread = _dt_spread_fn(spec, amp.r)

    def nodes(a):
        return 2 * a / _step(lam, spread(a), cfg) + 1

    if nodes(a_max) <= cfg.node_cap:
        return a_max
    lo, hi = 0.0, a_max
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if nodes(mid) <= cfg.node_cap else (lo, mid)
    if lo <= 0.0:
        raise ValidationError("node cap too small for any t-window")
    return lo


def gram_operator(spec: PhaseSpec, lam: float, amp: Optional[Amplitude] = None, cfg: GramConfig = GramConfig()) -> GramOperator:
    """Assemble the ``T* T`` kernel on a uniform t-grid.

    Entry ``(i, j)`` is ``chi(t_i) chi(t_j) F_u F_v`` where the Fresnel
    integrals carry ``A = lam alpha (t_j - t_i)`` and
    ``B = lam p (t_j**2 - t_i**2)`` for ``u`` (``gamma`` and ``q`` for ``v``).
    Along a diagonal ``A`` is constant and ``B`` is an arithmetic progression.

    Raises
    ------
    ValidationError
        If the phase has a ``u v`` term or the amplitude is not a tensor product.
    """
    amp = Amplitude() if amp is None else amp
    if not gram_applicable(spec, amp):
        raise ValidationError("Gram path needs a tensor amplitude and no u*v term in P2")
    a = gram_window(spec, lam, cfg, amp)
    h = gram_step(spec, lam, a, cfg, amp.r)
    n = int(np.floor(2 * a / h))
    t = h * (np.arange(n + 1) - n / 2)
    size = len(t)
    lam_eff = lam * spec.d_const
    al, ga = spec.p2.alpha, spec.p2.gamma
    p, q = spec.p1.p, spec.p1.q
    chi_t = amp.profile(t)

    cache = {}

    def profile_sq(z):
        # z grids are linspace(-r, r, n) and n repeats across diagonals
        if len(z) not in cache:
            cache[len(z)] = amp.profile(z) ** 2
        return cache[len(z)]

    kernel = np.empty((size, size), dtype=complex)
    rows = np.arange(size)
    for d in range(size):
        m = size - d
        gap = d * h
        factor = chi_t[:m] * chi_t[d:]
        for quad_coef, lin_coef in ((al, p), (ga, q)):
            A = lam_eff * quad_coef * gap
            b0 = lam_eff * lin_coef * gap * (2 * t[0] + gap)
            b1 = lam_eff * lin_coef * gap * 2 * h
            factor = factor * _fresnel_diagonal(A, b0, b1, m, profile_sq, amp.r0, amp.r, cfg)
        i = rows[:m]
        kernel[i, i + d] = factor
        kernel[i + d, i] = np.conj(factor)
    weights = np.full(size, h)
    if a < amp.r:
        weights[[0, -1]] = h / 2
    return GramOperator(kernel, weights, t, a)


# ---------------------------------------------------------------------------
# power iteration


@dataclass
class NormResult:
    """Outcome of a norm estimate.

    Attributes
    ----------
    value : float
        Estimated operator norm.
    iterations : int
        Power iterations used, including confirmation steps.
    residual : float
        Relative change of the estimate at the last iteration.
    n_t, n_uv : int
        Grid sizes; ``n_uv`` is 0 on the Gram path where the ``(u, v)``
        integral is done inside the kernel.
    method : str
        ``"dense"`` or ``"gram"``.
    window : float or None
        Half-width of the t-domain actually used.
    edge_mass : float or None
        Fraction of the top singular vector's weight on the outer 10% of the
        t-window; a large value signals that truncation matters.
    """

    value: float
    iterations: int
    residual: float
    n_t: int
    n_uv: int
    method: str = "dense"
    window: Optional[float] = None
    edge_mass: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def operator_norm(op, tol: float = 1e-10, max_iter: int = 5000, seed: int = SEED, confirm: int = 2) -> NormResult:
    """Largest singular value by power iteration on the weighted normal operator.

    Stops once successive estimates agree to ``tol`` relative and stay within
    ``tol`` for ``confirm`` more iterations.

    Raises
    ------
    NonConvergenceError
        After ``max_iter`` iterations without meeting the tolerance.
    """
    w = np.asarray(op.weights, dtype=float)
    n = len(w)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    def wnorm(z):
        return math.sqrt(float(np.sum(w * np.abs(z) ** 2)))

    x /= wnorm(x)
    prev = None
    streak = 0
    residual = math.inf
    for k in range(1, max_iter + 1):
        y = op.normal(x)
        if not np.all(np.isfinite(y)):
            raise NonFiniteError("power iteration produced non-finite values")
        est = max(float(np.sum(w * (y * np.conj(x)).real)), 0.0)
        ny = wnorm(y)
        if ny == 0.0:
            return _result(op, 0.0, k, 0.0, x)
        x = y / ny
        sigma = math.sqrt(est)
        if prev is not None:
            residual = abs(sigma - prev) / sigma if sigma > 0 else 0.0
            streak = streak + 1 if residual <= tol else 0
            if streak > confirm:
                return _result(op, sigma, k, residual, x)
        prev = sigma
    raise NonConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual,
        max_iter,
    )


def _result(op, sigma, iterations, residual, x) -> NormResult:
    if isinstance(op, GramOperator):
        w = op.weights
        mass = w * np.abs(x) ** 2
        edge = np.abs(op.t_nodes) > 0.9 * op.window
        edge_mass = float(mass[edge].sum() / mass.sum()) if mass.sum() > 0 else 0.0
        return NormResult(sigma, iterations, residual, len(w), 0, "gram", op.window, edge_mass)
    m, n = op.shape
    return NormResult(sigma, iterations, residual, n, m, "dense")


@dataclass(frozen=True)
class NormConfig:
    """Settings for :func:`estimate_norm`."""

    method: str = "auto"
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = SEED
    gram: GramConfig = field(default_factory=GramConfig)
    quad: QuadConfig = DENSE_QUAD
    dense_cap: int = 20_000_000

    def __post_init__(self):
        if self.method not in ("auto", "gram", "dense"):
            raise ValidationError("method must be auto, gram or dense")


def estimate_norm(spec: PhaseSpec, lam: float, amp: Optional[Amplitude] = None, cfg: NormConfig = NormConfig()) -> NormResult:
    """Estimate ``||T_lam||`` choosing the Gram path whenever it applies."""
    amp = Amplitude() if amp is None else amp
    method = cfg.method
    if method == "auto":
        method = "gram" if gram_applicable(spec, amp) else "dense"
    if method == "gram":
        op = gram_operator(spec, lam, amp, cfg.gram)
    else:
        t_grid, uv = dense_grids(spec, lam, cfg.quad, amp.r, amp.r)
        if uv.size * len(t_grid[0]) > cfg.dense_cap:
            raise ValidationError(
                f"dense operator would have {uv.size * len(t_grid[0])} entries, above the cap of {cfg.dense_cap}"
            )
        op = discretize(spec, lam, amp, t_grid, uv)
    return operator_norm(op, cfg.tol, cfg.max_iter, cfg.seed)


# ---------------------------------------------------------------------------
# Rayleigh quotients and the witness


def image_norm(spec, lam, amp, f: SampledFunction, uv_grid: UVGrid, workers: int = 1) -> float:
    """``sqrt(sum w_uv |T f|**2)``."""
    vals = apply_operator(spec, lam, amp, f, uv_grid.points(), workers)
    return float(np.sqrt(np.sum(uv_grid.weights() * np.abs(vals) ** 2)))


def rayleigh_quotient(spec, lam: float, amp, f: SampledFunction, uv_grid: UVGrid, workers: int = 1) -> float:
    """``||T f|| / ||f||`` on the given grids; a lower bound for the operator norm."""
    nf = l2_norm(f)
    if nf == 0.0:
        raise ValidationError("f must be non-zero")
    return image_norm(spec, lam, amp, f, uv_grid, workers) / nf


@dataclass(frozen=True)
class WitnessConfig:
    """Resolution settings for :func:`witness_chain`."""

    quad: QuadConfig = field(default_factory=QuadConfig)
    uv_order: int = 4
    window_n: int = 21
    uv_cap: int = 2_000_000
    workers: int = 1


@dataclass
class WitnessRecord:
    """Quantities along the lower-bound argument at one ``lam``."""

    lam: float
    eps: float
    norm_f: float
    norm_Tf: float
    quotient: float
    pointwise_min: float
    window_energy: float
    grid_nt: int
    grid_nuv: int

    def to_dict(self) -> dict:
        return asdict(self)


def witness_chain(lam: float, eps: float, cfg: WitnessConfig = WitnessConfig(), spec: Optional[PhaseSpec] = None,
                  amp: Optional[Amplitude] = None) -> WitnessRecord:
    """Evaluate ``f_lam`` and ``T f_lam`` for the ``u t**2 + v**2 t`` phase.

    ``pointwise_min`` is the minimum of ``|T f_lam|`` over a
    ``window_n x window_n`` grid of the ``(u, v)`` window, and
    ``window_energy`` the part of ``||T f_lam||**2`` from uv nodes inside the
    window.
    """
    if lam < 10:
        raise ValidationError("witness_chain needs lam >= 10")
    spec = case_c() if spec is None else spec
    amp = Amplitude() if amp is None else amp
    params = ExtremalParams(eps, lam)
    f = make_extremal(params, cfg.quad)
    grid = build_uv_grid(lam, eps, amp.r, cfg.uv_order, cap=cfg.uv_cap)
    pts, wuv = grid.points(), grid.weights()
    vals = apply_operator(spec, lam, amp, f, pts, cfg.workers)
    mass = wuv * np.abs(vals) ** 2
    norm_tf = float(np.sqrt(mass.sum()))
    lo, hi = 1 - eps, 1 + eps
    inside = (pts[:, 0] > lo) & (pts[:, 0] < hi) & (pts[:, 1] > lo * params.v_scale) & (pts[:, 1] < hi * params.v_scale)
    u_w, v_w, _ = window_axes(params, cfg.window_n)
    uu, vv = np.meshgrid(u_w, v_w, indexing="ij")
    win = apply_operator(spec, lam, amp, f, np.column_stack([uu.ravel(), vv.ravel()]), cfg.workers)
    nf = l2_norm(f)
    return WitnessRecord(
        lam=float(lam),
        eps=float(eps),
        norm_f=nf,
        norm_Tf=norm_tf,
        quotient=norm_tf / nf,
        pointwise_min=float(np.abs(win).min()),
        window_energy=float(mass[inside].sum()),
        grid_nt=len(f),
        grid_nuv=grid.size,
    )
