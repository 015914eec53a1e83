"""Cubic homogeneous phases ``S(u, v, t) = P1(u, v) t**2 + P2(u, v) t``.

``P1`` is a linear binary form and ``P2`` a quadratic one.  The phase is
non-degenerate when ``P2`` is square-free.  Degenerate phases split by
whether ``P1`` divides ``P2`` and reduce, after a linear change of
``(u, v)``, to ``u t**2 + a u**2 t`` or to ``u t**2 + v**2 t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError

NON_DEGENERATE = "non_degenerate"
DEGENERATE_B = "degenerate_b"
DEGENERATE_C = "degenerate_c"
TAGS = (NON_DEGENERATE, DEGENERATE_B, DEGENERATE_C)

DISCRIMINANT_RTOL = 1e-10
DIVIDES_RTOL = 1e-12


@dataclass(frozen=True)
class LinearForm:
    """The binary linear form ``p u + q v``."""

    p: float
    q: float

    def __call__(self, u, v):
        return self.p * u + self.q * v

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.p, self.q], dtype=float)

    def norm(self) -> float:
        return float(np.hypot(self.p, self.q))

    def is_zero(self) -> bool:
        return self.p == 0.0 and self.q == 0.0

    def compose(self, matrix) -> "LinearForm":
        """Return the form ``(u, v) -> L(A @ (u, v))``."""
        p, q = self.coeffs @ np.asarray(matrix, dtype=float)
        return LinearForm(float(p), float(q))

    def scaled(self, s: float) -> "LinearForm":
        return LinearForm(s * self.p, s * self.q)


@dataclass(frozen=True)
class QuadraticForm:
    """The binary quadratic form ``alpha u**2 + beta u v + gamma v**2``."""

    alpha: float
    beta: float
    gamma: float

    def __call__(self, u, v):
        return self.alpha * u * u + self.beta * u * v + self.gamma * v * v

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma], dtype=float)

    def gram(self) -> np.ndarray:
        """Symmetric matrix ``G`` with ``Q(x) = x^T G x``."""
        return np.array([[self.alpha, self.beta / 2], [self.beta / 2, self.gamma]])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_zero(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0 and self.gamma == 0.0

    def compose(self, matrix) -> "QuadraticForm":
        """Return the form ``(u, v) -> Q(A @ (u, v))``."""
        a = np.asarray(matrix, dtype=float)
        g = a.T @ self.gram() @ a
        return QuadraticForm(float(g[0, 0]), float(g[0, 1] + g[1, 0]), float(g[1, 1]))

    def scaled(self, s: float) -> "QuadraticForm":
        return QuadraticForm(s * self.alpha, s * self.beta, s * self.gamma)

    @classmethod
    def square(cls, form: LinearForm, scale: float = 1.0) -> "QuadraticForm":
        """``scale * form**2`` expanded into coefficients."""
        p, q = form.p, form.q
        return cls(scale * p * p, 2.0 * scale * p * q, scale * q * q)


@dataclass(frozen=True)
class PhaseClass:
    """Classification tag, with the coefficient ``a`` for the ``u t**2 + a u**2 t`` family."""

    tag: str
    a: Optional[float] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValidationError(f"unknown phase class tag {self.tag!r}")
        if (self.tag == DEGENERATE_B) != (self.a is not None):
            raise ValidationError("the coefficient a is carried by degenerate_b only")

    def to_dict(self) -> dict:
        out = {"tag": self.tag}
        if self.a is not None:
            out["a"] = self.a
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseClass":
        a = data.get("a")
        return cls(data["tag"], None if a is None else float(a))


@dataclass(frozen=True)
class PhaseSpec:
    """A classified phase together with its normal-form coordinates.

    Attributes
    ----------
    p1, p2 : LinearForm, QuadraticForm
        The phase in the caller's coordinates.
    klass : PhaseClass
        Classification result.
    transform : tuple of tuple of float
        Rows are the linear forms giving the normal-form coordinates
        ``(u', v') = A @ (u, v)``.  Identity for non-degenerate phases.
    d_const : float
        Overall scale ``D`` in ``(0, 1]`` applied to the phase.
    sign : int
        ``+1`` normally.  ``-1`` when ``P2`` is a negative square, in which
        case the phase equals minus the normal form; the operator is then the
        complex conjugate of the normal-form operator and has the same norms.
    """

    p1: LinearForm
    p2: QuadraticForm
    klass: PhaseClass
    transform: tuple = ((1.0, 0.0), (0.0, 1.0))
    d_const: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if not 0.0 < self.d_const <= 1.0:
            raise ValidationError("d_const must lie in (0, 1]")
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        if abs(np.linalg.det(self.matrix)) == 0.0:
            raise ValidationError("transform must be invertible")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.transform, dtype=float)

    def with_d_const(self, d_const: float) -> "PhaseSpec":
        return PhaseSpec(self.p1, self.p2, self.klass, self.transform, d_const, self.sign)

    def normal_form(self, u, v, t):
        """Evaluate ``D`` times the normal form at already-transformed ``(u', v')``."""
        if self.klass.tag == DEGENERATE_B:
            val = u * t * t + self.klass.a * u * u * t
        elif self.klass.tag == DEGENERATE_C:
            val = u * t * t + v * v * t
        else:
            val = self.p1(u, v) * t * t + self.p2(u, v) * t
        return self.sign * self.d_const * val

    def pulled_back(self, u, v, t):
        """Normal form evaluated at ``A @ (u, v)``; equals ``eval_phase``."""
        m = self.matrix
        return self.normal_form(m[0, 0] * u + m[0, 1] * v, m[1, 0] * u + m[1, 1] * v, t)

    def to_dict(self) -> dict:
        return {
            **forms_to_dict(self.p1, self.p2),
            "class": self.klass.to_dict(),
            "transform": [list(row) for row in self.transform],
            "d_const": self.d_const,
            "sign": self.sign,
        }


def forms_to_dict(p1: LinearForm, p2: QuadraticForm) -> dict:
    return {"p1": [p1.p, p1.q], "p2": [p2.alpha, p2.beta, p2.gamma]}


def forms_from_dict(data: dict) -> tuple[LinearForm, QuadraticForm]:
    try:
        p, q = (float(x) for x in data["p1"])
        a, b, c = (float(x) for x in data["p2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed forms object: {exc}") from exc
    return LinearForm(p, q), QuadraticForm(a, b, c)


def forms_to_json(p1: LinearForm, p2: QuadraticForm) -> str:
    return json.dumps(forms_to_dict(p1, p2))


def forms_from_json(text: str) -> tuple[LinearForm, QuadraticForm]:
    return forms_from_dict(json.loads(text))


def eval_phase(spec: PhaseSpec, u, v, t):
    """Return ``D * (P1(u, v) t**2 + P2(u, v) t)``; broadcasts over arrays."""
    return spec.d_const * (spec.p1(u, v) * t * t + spec.p2(u, v) * t)


def discriminant(q: QuadraticForm) -> float:
    """``beta**2 - 4 alpha gamma``; zero exactly when the form is a square up to scale."""
    return q.beta * q.beta - 4.0 * q.alpha * q.gamma


def is_square_free(q: QuadraticForm) -> bool:
    """Discriminant test relative to the size of the coefficients."""
    scale = q.alpha ** 2 + q.beta ** 2 + q.gamma ** 2
    return abs(discriminant(q)) > DISCRIMINANT_RTOL * scale


def divides(form: LinearForm, q: QuadraticForm, tol: float = DIVIDES_RTOL) -> bool:
    """True when the linear form divides the quadratic one.

    Tests whether ``Q`` vanishes on the root direction ``(q, -p)`` of ``L``,
    relative to ``||Q|| * ||L||**2``.
    """
    if form.is_zero():
        raise ValidationError("the linear form must be non-zero")
    val = q(form.q, -form.p)
    return abs(val) <= tol * q.norm() * form.norm() ** 2


def _check_nonzero(p1: LinearForm, p2: QuadraticForm) -> None:
    if p1.is_zero():
        raise ValidationError("P1 must be non-zero")
    if p2.is_zero():
        raise ValidationError("P2 must be non-zero")
    if not (np.all(np.isfinite(p1.coeffs)) and np.all(np.isfinite(p2.coeffs))):
        raise ValidationError("coefficients must be finite")


def _ratio_to_square(p1: LinearForm, p2: QuadraticForm) -> float:
    # least-squares a with P2 = a * P1**2 over the coefficient vectors
    sq = QuadraticForm.square(p1).coeffs
    return float(sq @ p2.coeffs / (sq @ sq))


def classify(p1: LinearForm, p2: QuadraticForm) -> PhaseClass:
    """Classify the phase ``P1 t**2 + P2 t``.

    Examples
    --------
    >>> classify(LinearForm(1, 0), QuadraticForm(0, 0, 1)).tag
    'degenerate_c'
    >>> classify(LinearForm(1, 0), QuadraticForm(1, 0, 0))
    PhaseClass(tag='degenerate_b', a=1.0)
    """
    _check_nonzero(p1, p2)
    if is_square_free(p2):
        return PhaseClass(NON_DEGENERATE)
    if divides(p1, p2):
        return PhaseClass(DEGENERATE_B, _ratio_to_square(p1, p2))
    return PhaseClass(DEGENERATE_C)


def _repeated_factor(p2: QuadraticForm) -> tuple[LinearForm, float]:
    """Split a square ``P2`` as ``s * L**2``."""
    a, b, c = p2.alpha, p2.beta, p2.gamma
    if abs(a) >= abs(c):
        return LinearForm(1.0, b / (2.0 * a)), a
    return LinearForm(b / (2.0 * c), 1.0), c


def _complement(form: LinearForm) -> LinearForm:
    n = form.norm()
    return LinearForm(-form.q / n, form.p / n)


def reduce_to_normal_form(p1: LinearForm, p2: QuadraticForm, d_const: float = 1.0) -> PhaseSpec:
    """Find linear coordinates in which a degenerate phase takes normal form.

    Raises
    ------
    ValidationError
        If the phase is non-degenerate or either form is zero.
    """
    klass = classify(p1, p2)
    if klass.tag == NON_DEGENERATE:
        raise ValidationError("phase is non-degenerate; no normal form reduction applies")
    if klass.tag == DEGENERATE_B:
        rows = (p1, _complement(p1))
        sign = 1
    else:
        factor, s = _repeated_factor(p2)
        sign = 1 if s > 0 else -1
        first = p1 if sign > 0 else p1.scaled(-1.0)
        rows = (first, factor.scaled(np.sqrt(abs(s))))
    transform = tuple((float(r.p), float(r.q)) for r in rows)
    return PhaseSpec(p1, p2, klass, transform, d_const, sign)


def make_spec(p1: LinearForm, p2: QuadraticForm, d_const: float = 1.0) -> PhaseSpec:
    """Classify and, where possible, reduce; non-degenerate phases keep identity coordinates."""
    klass = classify(p1, p2)
    if klass.tag == NON_DEGENERATE:
        return PhaseSpec(p1, p2, klass, d_const=d_const)
    return reduce_to_normal_form(p1, p2, d_const)


def case_b(a: float = 1.0, d_const: float = 1.0) -> PhaseSpec:
    """``u t**2 + a u**2 t``."""
    return make_spec(LinearForm(1.0, 0.0), QuadraticForm(a, 0.0, 0.0), d_const)


def case_c(d_const: float = 1.0) -> PhaseSpec:
    """``u t**2 + v**2 t``."""
    return make_spec(LinearForm(1.0, 0.0), QuadraticForm(0.0, 0.0, 1.0), d_const)


def hyperbolic(d_const: float = 1.0) -> PhaseSpec:
    """Non-degenerate contrast ``u t**2 + (u**2 - v**2) t``."""
    return make_spec(LinearForm(1.0, 0.0), QuadraticForm(1.0, 0.0, -1.0), d_const)


NAMED_PHASES = {"case-b": case_b, "case-c": case_c, "hyperbolic": hyperbolic}
