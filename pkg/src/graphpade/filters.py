"""Pade rational and polynomial spectral filters.

All filters act on normalized eigenvalues ``t = lambda / lambda_max`` in
[0, 1]. The Chebyshev basis is evaluated on [-1, 1]; callers working on
[0, 1] map ``t -> 2t - 1`` first (see :func:`to_chebyshev_domain`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericalFailure, PoleError

POLE_GUARD = 1e-8
CHEB_SLACK = 1e-12
RIDGE = 1e-12


def _coeffs(values) -> np.ndarray:
    a = np.array(values, dtype=float).ravel()
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("filter coefficients must be finite")
    a.setflags(write=False)
    return a


def horner(coeffs, t):
    """Evaluate ``sum_i coeffs[i] * t**i``; empty coefficients give 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for c in reversed(coeffs):
        out = out * t + c
    return out


def clenshaw(coeffs, t):
    """Evaluate ``sum_k coeffs[k] * T_k(t)`` by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for c in reversed(coeffs[1:]):
        b1, b2 = 2.0 * t * b1 - b2 + c, b1
    c0 = coeffs[0] if len(coeffs) else 0.0
    return t * b1 - b2 + c0


@dataclass(frozen=True)
class RationalFilter:
    """``P(t) / Q(t)`` with ``P = sum psi_i t^i`` and ``Q = 1 + sum phi_j t^j``.

    ``phi`` holds the denominator coefficients from degree 1 upwards; the
    constant term of ``Q`` is fixed at one and not stored.
    """

    psi: np.ndarray
    phi: np.ndarray = ()

    def __post_init__(self):
        object.__setattr__(self, "psi", _coeffs(self.psi))
        object.__setattr__(self, "phi", _coeffs(self.phi))
        if len(self.psi) == 0:
            raise InvalidParameterError("numerator needs at least one coefficient")

    @property
    def m(self) -> int:
        return len(self.psi) - 1

    @property
    def n(self) -> int:
        return len(self.phi)

    def numerator(self, t):
        return horner(self.psi, t)

    def denominator(self, t):
        return horner(np.concatenate(([1.0], self.phi)), t)

    def __call__(self, t):
        return eval_rational(self, t)

    def to_dict(self) -> dict:
        return {"psi": [float(v) for v in self.psi], "phi": [float(v) for v in self.phi]}

    @classmethod
    def from_dict(cls, d: dict) -> "RationalFilter":
        return cls(d["psi"], d.get("phi", []))


@dataclass(frozen=True)
class PolynomialFilter:
    """``sum theta_k B_k(t)`` in the monomial or Chebyshev (first kind) basis."""

    theta: np.ndarray
    basis: str = "monomial"

    def __post_init__(self):
        if self.basis not in ("monomial", "chebyshev"):
            raise InvalidParameterError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "theta", _coeffs(self.theta))

    @property
    def degree(self) -> int:
        return len(self.theta) - 1

    def __call__(self, t):
        return eval_poly(self, t)

    def to_monomial(self) -> "PolynomialFilter":
        if self.basis == "monomial":
            return self
        return PolynomialFilter(np.polynomial.chebyshev.cheb2poly(self.theta), "monomial")

    def to_chebyshev(self) -> "PolynomialFilter":
        if self.basis == "chebyshev":
            return self
        return PolynomialFilter(np.polynomial.chebyshev.poly2cheb(self.theta), "chebyshev")

    def to_dict(self) -> dict:
        return {"theta": [float(v) for v in self.theta], "basis": self.basis}

    @classmethod
    def from_dict(cls, d: dict) -> "PolynomialFilter":
        return cls(d["theta"], d.get("basis", "monomial"))


def eval_rational(f: RationalFilter, t, guard: float = POLE_GUARD):
    """Elementwise ``P(t)/Q(t)``; raises :class:`PoleError` where ``|Q| < guard``."""
    t = np.asarray(t, dtype=float)
    q = f.denominator(t)
    bad = np.abs(q) < guard
    if np.any(bad):
        where = np.asarray(t)[bad] if t.ndim else t
        raise PoleError(f"denominator below {guard:g} at t = {np.ravel(where)[0]!r}")
    return f.numerator(t) / q


def eval_poly(f: PolynomialFilter, t):
    t = np.asarray(t, dtype=float)
    if f.basis == "monomial":
        return horner(f.theta, t)
    if t.size and (t.min() < -1 - CHEB_SLACK or t.max() > 1 + CHEB_SLACK):
        raise InvalidParameterError("Chebyshev evaluation requires t in [-1, 1]")
    return clenshaw(f.theta, t)


def to_chebyshev_domain(t):
    """Affine map [0, 1] -> [-1, 1]."""
    return 2.0 * np.asarray(t, dtype=float) - 1.0


def _matrix_horner(coeffs, M: np.ndarray) -> np.ndarray:
    out = np.zeros_like(M)
    eye = np.eye(M.shape[0])
    for c in reversed(coeffs):
        out = out @ M + c * eye
    return out


def apply_rational_vertex(f: RationalFilter, L: np.ndarray, lambda_max: float, x) -> np.ndarray:
    """Vertex-domain filtering ``P(Lt) Q(Lt)^{-1} x`` with ``Lt = L / lambda_max``.

    Solves ``Q(Lt) z = x`` by LU rather than forming the inverse, then applies
    ``P(Lt)`` to ``z`` by Horner's rule on matrix-vector products.
    """
    x = np.asarray(x, dtype=float)
    Lt = np.asarray(L, dtype=float) / float(lambda_max)
    Qm = _matrix_horner(np.concatenate(([1.0], f.phi)), Lt)
    try:
        z = scipy.linalg.solve(Qm, x, assume_a="sym", check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise PoleError(f"Q(L) is singular: {exc}") from exc
    resid = np.linalg.norm(Qm @ z - x)
    if not np.isfinite(resid) or resid > 1e-6 * max(np.linalg.norm(x), np.finfo(float).tiny):
        raise PoleError(f"Q(L) solve residual {resid:.3e} too large; denominator has a pole")

    y = np.zeros_like(z)
    for c in reversed(f.psi):
        y = Lt @ y + c * z
    return y


def fit_poly_least_squares(ts, ys, degree: int, basis: str = "monomial") -> PolynomialFilter:
    """Least-squares polynomial fit through the normal equations.

    The Gram matrix is symmetrically scaled to unit diagonal and a ridge of
    ``1e-12`` is added before the Cholesky solve.
    """
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if degree < 0:
        raise InvalidParameterError("degree must be non-negative")
    if ts.shape != ys.shape or len(ts) < degree + 1:
        raise InvalidParameterError("need len(ts) == len(ys) >= degree + 1")

    if basis == "monomial":
        V = np.vander(ts, degree + 1, increasing=True)
    elif basis == "chebyshev":
        if ts.min() < -1 - CHEB_SLACK or ts.max() > 1 + CHEB_SLACK:
            raise InvalidParameterError("Chebyshev fit requires ts in [-1, 1]")
        V = np.polynomial.chebyshev.chebvander(ts, degree)
    else:
        raise InvalidParameterError(f"unknown basis {basis!r}")

    G = V.T @ V
    rhs = V.T @ ys
    d = np.sqrt(np.diag(G))
    if np.any(d == 0):
        raise NumericalFailure("rank-deficient design: a basis column is identically zero")
    Gs = G / np.outer(d, d) + RIDGE * np.eye(degree + 1)
    try:
        c, low = scipy.linalg.cho_factor(Gs)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"normal equations are rank deficient: {exc}") from exc
    theta = scipy.linalg.cho_solve((c, low), rhs / d) / d
    return PolynomialFilter(theta, basis)
