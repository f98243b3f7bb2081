"""Laplacian eigendecomposition, graph Fourier transform and spectral filtering."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, NumericalFailure

SYMMETRY_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and orthonormal eigenvectors (columns of ``U``)."""

    lambdas: np.ndarray
    U: np.ndarray = field(repr=False)

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        U = np.array(self.U, dtype=float)
        if U.shape != (len(lam), len(lam)):
            raise InvalidParameterError("U must be n x n with n = len(lambdas)")
        lam.setflags(write=False)
        U.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "U", U)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[-1])

    def normalized(self) -> np.ndarray:
        """Eigenvalues divided by ``lambda_max``; lands in [0, 1]."""
        if self.lambda_max <= 0:
            raise NumericalFailure("lambda_max is zero; graph has no edges")
        return np.clip(self.lambdas / self.lambda_max, 0.0, 1.0)


def _check_symmetric(L: np.ndarray) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {L.shape}")
    asym = np.max(np.abs(L - L.T)) if L.size else 0.0
    if asym > SYMMETRY_TOL:
        raise InvalidParameterError(f"matrix is not symmetric (max |L - L^T| = {asym:.3e})")
    return L


def jacobi_eigh(A: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigensolver for a dense symmetric matrix.

    Sweeps over all (p, q) pairs applying the classical rotation that zeroes
    ``A[p, q]``, until the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``.

    Returns:
        (eigenvalues ascending, eigenvectors as columns)
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), 1.0)

    def off(M):
        # summed directly; ||M||^2 - ||diag||^2 cancels catastrophically
        return np.sqrt(2.0 * np.sum(np.triu(M, 1) ** 2))

    for _ in range(max_sweeps):
        if off(A) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    else:
        if off(A) > tol * scale:
            raise NumericalFailure(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def decompose(L: np.ndarray, method: str = "lapack") -> EigenSystem:
    """Full symmetric eigendecomposition ``L = U diag(lambdas) U^T``.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` uses
    the in-package cyclic Jacobi solver (slow, intended for small graphs and
    cross-checks).
    """
    L = _check_symmetric(L)
    if method == "lapack":
        try:
            w, U = np.linalg.eigh(L)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    elif method == "jacobi":
        w, U = jacobi_eigh(L)
    else:
        raise InvalidParameterError(f"unknown eigensolver {method!r}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(U))):
        raise NumericalFailure("eigensolver produced non-finite values")
    return EigenSystem(w, U)


def _as_signal(es: EigenSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != es.n:
        raise InvalidParameterError(f"signal length {x.shape[0]} != graph size {es.n}")
    return x


def gft(es: EigenSystem, x) -> np.ndarray:
    """Graph Fourier transform ``U^T x``."""
    return es.U.T @ _as_signal(es, x)


def igft(es: EigenSystem, xhat) -> np.ndarray:
    """Inverse graph Fourier transform ``U xhat``."""
    return es.U @ _as_signal(es, xhat)


def apply_spectral_filter(es: EigenSystem, h: Callable, x) -> np.ndarray:
    """Compute ``U diag(h(lambda)) U^T x`` with ``h`` taking raw eigenvalues."""
    x = _as_signal(es, x)
    gains = np.asarray(h(es.lambdas), dtype=float)
    if gains.shape == ():
        gains = np.full(es.n, float(gains))
    bad = ~np.isfinite(gains)
    if np.any(bad):
        lam = es.lambdas[np.argmax(bad)]
        raise NumericalFailure(f"filter is not finite at eigenvalue {lam!r}")
    return es.U @ (gains * (es.U.T @ x))


def dirichlet_energy(L: np.ndarray, x) -> float:
    """Quadratic form ``x^T L x``."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != L.shape[0]:
        raise InvalidParameterError(f"signal length {x.shape[0]} != graph size {L.shape[0]}")
    return float(x @ (L @ x))


# On-disk cache: two CSV files with 17 significant digits per value.
#   <key>.lambdas.csv  one eigenvalue per line, ascending
#   <key>.U.csv        n rows, n comma-separated columns (column i = eigenvector i)


def save_eigensystem(es: EigenSystem, directory, key: str) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    np.savetxt(d / f"{key}.lambdas.csv", es.lambdas, fmt="%.17g")
    np.savetxt(d / f"{key}.U.csv", es.U, fmt="%.17g", delimiter=",")


def load_eigensystem(directory, key: str) -> EigenSystem | None:
    d = Path(directory)
    lp, up = d / f"{key}.lambdas.csv", d / f"{key}.U.csv"
    if not (lp.exists() and up.exists()):
        return None
    lam = np.atleast_1d(np.loadtxt(lp))
    U = np.loadtxt(up, delimiter=",", ndmin=2)
    return EigenSystem(lam, U)
