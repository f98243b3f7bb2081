"""Gradient-descent refinement of Pade filter coefficients on spectral MSE."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, PoleError
from .filters import POLE_GUARD, RationalFilter, horner
from .remez import DiscreteTarget

MAX_HALVINGS = 20
BLOWUP_FACTOR = 10.0
PRECONDITIONERS = ("gauss-newton", "none")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    max_epochs: int = 5000
    tol: float = 1e-12
    window: int = 50
    pole_guard: float = POLE_GUARD
    preconditioner: str = "gauss-newton"

    def __post_init__(self):
        if self.preconditioner not in PRECONDITIONERS:
            raise InvalidParameterError(f"unknown preconditioner {self.preconditioner!r}")
        if self.learning_rate < 0 or self.max_epochs < 0 or self.tol < 0:
            raise InvalidParameterError("training settings must be non-negative")
        if self.window < 1 or self.pole_guard <= 0:
            raise InvalidParameterError("window and pole_guard must be positive")


@dataclass
class FitReport:
    """Outcome of fitting one method to one target."""

    method: str
    coefficients: dict = field(default_factory=dict)
    spectral_mse: float = float("nan")
    vertex_mse: float = float("nan")
    epochs: int = 0
    loss_trace: list = field(default_factory=list)
    init: str = "given"
    orders: dict = field(default_factory=dict)
    seconds: float | None = None
    error: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)

    def write_trace_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss"])
            for i, v in enumerate(self.loss_trace):
                w.writerow([i, f"{v:.17g}"])


def _xhat(target, xhat):
    if xhat is None:
        return np.ones(len(target))
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape != target.ts.shape:
        raise InvalidParameterError("xhat length must match the target")
    return xhat


def _parts(f: RationalFilter, ts, guard):
    q = f.denominator(ts)
    bad = np.abs(q) < guard
    if np.any(bad):
        raise PoleError(f"denominator below {guard:g} at t = {ts[np.argmax(bad)]!r}")
    p = f.numerator(ts)
    return p, q


def spectral_loss(f: RationalFilter, target: DiscreteTarget, xhat=None, guard: float = POLE_GUARD) -> float:
    """Mean of ``(R(t_d) * xhat_d - y_d)^2``; ``xhat`` defaults to all ones."""
    xh = _xhat(target, xhat)
    p, q = _parts(f, target.ts, guard)
    e = p / q * xh - target.ys
    return float(np.mean(e * e))


def gradients(f: RationalFilter, target: DiscreteTarget, xhat=None, guard: float = POLE_GUARD):
    """Analytic gradient of :func:`spectral_loss` in ``(psi, phi)``.

    With ``e_d = R(t_d) xhat_d - y_d``:
    ``dL/dpsi_i = 2/N sum e_d xhat_d t_d^i / Q_d`` and
    ``dL/dphi_j = -2/N sum e_d xhat_d t_d^j P_d / Q_d^2``.
    """
    ts = target.ts
    xh = _xhat(target, xhat)
    p, q = _parts(f, ts, guard)
    w = 2.0 / len(ts) * (p / q * xh - target.ys) * xh / q
    dpsi = np.vander(ts, f.m + 1, increasing=True).T @ w
    if f.n:
        powers = ts[:, None] ** np.arange(1, f.n + 1)[None, :]
        dphi = -(powers.T @ (w * p / q))
    else:
        dphi = np.zeros(0)
    return dpsi, dphi


def gauss_newton_direction(f: RationalFilter, target: DiscreteTarget, xhat=None, guard: float = POLE_GUARD):
    """Least-squares solution of ``J d = e`` for the residual Jacobian ``J``.

    ``e_d = R(t_d) xhat_d - y_d``; columns of ``J`` are the partial
    derivatives of ``e`` in ``(psi, phi)``. Singular values below ``1e-12``
    of the largest are dropped.
    """
    ts = target.ts
    xh = _xhat(target, xhat)
    p, q = _parts(f, ts, guard)
    e = p / q * xh - target.ys
    cols = [np.vander(ts, f.m + 1, increasing=True) * (xh / q)[:, None]]
    if f.n:
        cols.append(-(ts[:, None] ** np.arange(1, f.n + 1)[None, :]) * (xh * p / q**2)[:, None])
    J = np.hstack(cols)
    d = np.linalg.lstsq(J, e, rcond=1e-12)[0]
    return d[: f.m + 1], d[f.m + 1 :]


def pad_orders(f: RationalFilter, m: int, n: int) -> RationalFilter:
    """Same function written as type ``(m, n)`` by appending zero coefficients."""
    if m < f.m or n < f.n:
        raise InvalidParameterError(f"cannot shrink ({f.m}, {f.n}) to ({m}, {n})")
    return RationalFilter(np.r_[f.psi, np.zeros(m - f.m)], np.r_[f.phi, np.zeros(n - f.n)])


def improvement(initial: float, final: float) -> float:
    """Relative reduction ``(initial - final) / initial``."""
    return (initial - final) / initial if initial else 0.0


def train(
    f0: RationalFilter,
    target: DiscreteTarget,
    xhat=None,
    cfg: TrainConfig = TrainConfig(),
    method: str = "rational",
    init: str = "given",
) -> FitReport:
    """Full-batch descent with step rejection.

    The step direction is the Gauss-Newton direction by default and the
    plain gradient with ``preconditioner="none"``.

    A step is retried at half size (up to 20 times) when it would push any
    ``|Q(t_d)|`` under the pole guard, flip the sign of ``Q`` at a sample, or
    multiply the loss by more than 10; if no size works the epoch is skipped.
    Training stops after ``max_epochs`` or once the best loss improved by no
    more than ``tol`` over the last ``window`` epochs. The best iterate is
    returned, so the result is never worse than ``f0``.

    ``loss_trace[0]`` is the loss of ``f0``; entry ``k`` is the loss after
    epoch ``k``.
    """
    guard = cfg.pole_guard
    xh = _xhat(target, xhat)
    ts = target.ts
    psi = np.array(f0.psi, dtype=float)
    phi = np.array(f0.phi, dtype=float)
    cur = RationalFilter(psi, phi)
    loss = spectral_loss(cur, target, xh, guard)
    q_sign = np.sign(cur.denominator(ts))

    best_loss, best = loss, cur
    trace = [loss]
    best_hist = [loss]
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        if cfg.preconditioner == "gauss-newton":
            dpsi, dphi = gauss_newton_direction(cur, target, xh, guard)
        else:
            dpsi, dphi = gradients(cur, target, xh, guard)
        step = cfg.learning_rate
        for _ in range(MAX_HALVINGS + 1):
            if step == 0:
                break
            cand_phi = phi - step * dphi
            q = horner(np.concatenate(([1.0], cand_phi)), ts)
            if np.all(np.abs(q) >= guard) and np.all(np.sign(q) == q_sign):
                cand = RationalFilter(psi - step * dpsi, cand_phi)
                cand_loss = spectral_loss(cand, target, xh, guard)
                if np.isfinite(cand_loss) and cand_loss <= BLOWUP_FACTOR * loss:
                    cur, loss = cand, cand_loss
                    psi, phi = np.array(cand.psi), np.array(cand.phi)
                    break
            step *= 0.5

        trace.append(loss)
        if loss < best_loss:
            best_loss, best = loss, cur
        best_hist.append(best_loss)
        if epoch >= cfg.window and best_hist[epoch - cfg.window] - best_loss <= cfg.tol:
            break

    return FitReport(
        method=method,
        coefficients=best.to_dict(),
        spectral_mse=best_loss,
        epochs=epoch,
        loss_trace=trace,
        init=init,
        orders={"m": best.m, "n": best.n},
    )


def write_reports(reports, path) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True))
