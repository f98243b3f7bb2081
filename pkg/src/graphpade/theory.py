"""Jump-discontinuity targets, the Newman rational approximant and decay-rate experiments.

Sup norms are measured on dense uniform grids as a stand-in for the
continuum supremum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .filters import to_chebyshev_domain
from .remez import DiscreteTarget, remez_poly

MIN_DEGREE = 5
MIN_GRID = 10_000
DEFAULT_GRID = 100_000


@dataclass(frozen=True)
class JumpTarget:
    """``a |u| / u^sigma + b u`` with ``u = x - shift``.

    ``sigma = 0`` gives a kink (``a|u| + bu``), ``sigma = 1`` a jump
    (``a sign(u) + bu``). At ``u = 0`` with ``sigma = 1`` the value is 0.
    """

    a: float = 1.0
    b: float = 0.0
    sigma: int = 0
    shift: float = 0.0

    def __post_init__(self):
        if self.sigma not in (0, 1):
            raise InvalidParameterError(f"sigma must be 0 or 1, got {self.sigma!r}")

    def __call__(self, x):
        return eval_jump(self, x)


def eval_jump(j: JumpTarget, x):
    u = np.asarray(x, dtype=float) - j.shift
    head = np.abs(u) if j.sigma == 0 else np.sign(u)
    return j.a * head + j.b * u


def _log_newman(x, n):
    """Sign and log-magnitude of ``N(x) = prod_{i=1}^{n-1} (x + alpha^i)``."""
    alpha = np.exp(-1.0 / np.sqrt(n))
    roots = alpha ** np.arange(1, n)
    f = np.asarray(x, dtype=float)[..., None] + roots
    with np.errstate(divide="ignore"):
        logmag = np.sum(np.log(np.abs(f)), axis=-1)
    sign = np.prod(np.sign(f), axis=-1)
    return sign, logmag


def newman_ratio(n: int, x):
    """``(N(x) - N(-x)) / (N(x) + N(-x))``, the Newman approximation of ``sign(x)``.

    Evaluated from signs and log magnitudes so that large ``n`` does not
    underflow. The value at ``x = 0`` is 0.
    """
    if int(n) != n or n < MIN_DEGREE:
        raise InvalidParameterError(f"Newman degree must be an integer >= {MIN_DEGREE}, got {n!r}")
    x = np.asarray(x, dtype=float)
    sp, lp = _log_newman(x, int(n))
    sm, lm = _log_newman(-x, int(n))
    # divide numerator and denominator by the larger of |N(x)|, |N(-x)|
    top = np.maximum(lp, lm)
    with np.errstate(invalid="ignore", over="ignore"):
        a = sp * np.exp(lp - top)
        b = sm * np.exp(lm - top)
        out = (a - b) / (a + b)
    return np.where(x == 0, 0.0, out)


def newman_approx(n: int, x):
    """Newman approximant ``A_n(x) = x (N(x) - N(-x)) / (N(x) + N(-x))`` of ``|x|``."""
    x = np.asarray(x, dtype=float)
    return x * newman_ratio(n, x)


def newman_bound(n: int, c: float = 1.0) -> float:
    """``3 c e^{-sqrt(n)}``, the sup-error bound of ``c A_n(x / c)`` against ``|x|`` on [-c, c]."""
    return 3.0 * c * np.exp(-np.sqrt(n))


def scaled_newman(n: int, x, c: float = 1.0):
    """``c A_n(x / c)``, the Newman approximant stretched to [-c, c]."""
    if c <= 0:
        raise InvalidParameterError("scale c must be positive")
    return c * newman_approx(n, np.asarray(x, dtype=float) / c)


def newman_sup_error(n: int, c: float = 1.0, grid_size: int = DEFAULT_GRID) -> float:
    x = np.linspace(-c, c, grid_size)
    return float(np.max(np.abs(np.abs(x) - scaled_newman(n, x, c))))


def check_newman_bound(n: int, c: float = 1.0, grid_size: int = DEFAULT_GRID) -> tuple[float, float, bool]:
    """Measured sup error, bound, and whether the bound holds."""
    err = newman_sup_error(n, c, grid_size)
    bound = newman_bound(n, c)
    return err, bound, err <= bound


def jump_rational(j: JumpTarget, n: int, x, c: float | None = None):
    """Newman-based rational approximation of a jump target.

    For ``sigma = 0`` this is ``a c A_n(u / c) + b u``. For ``sigma = 1`` the
    sign part uses the Newman ratio directly; its error near the jump tends
    to ``|a|`` because any continuous function misses a jump.
    """
    u = np.asarray(x, dtype=float) - j.shift
    if c is None:
        c = float(np.max(np.abs(u))) if u.size else 1.0
    c = max(c, np.finfo(float).tiny)
    if j.sigma == 0:
        head = scaled_newman(n, u, c)
    else:
        head = newman_ratio(n, u / c)
    return j.a * head + j.b * u


def _check_degrees(degrees):
    degrees = [int(d) for d in degrees]
    if not degrees:
        raise InvalidParameterError("need at least one degree")
    low = [d for d in degrees if d < MIN_DEGREE]
    if low:
        raise InvalidParameterError(f"degrees must be >= {MIN_DEGREE}, got {low}")
    return degrees


def rate_experiment(
    kind: str,
    target: JumpTarget,
    degrees,
    grid_size: int = DEFAULT_GRID,
    domain: tuple[float, float] = (-1.0, 1.0),
) -> list[tuple[int, float]]:
    """Sup error against degree for Newman rationals or minimax polynomials.

    Args:
        kind: ``"rational"`` (Newman construction) or ``"polynomial"``
            (discrete Remez with no denominator).
        target: function to approximate.
        degrees: degrees to test, each at least 5.
        grid_size: number of uniform grid points on ``domain`` (at least 1e4).
        domain: interval carrying the grid.

    Returns:
        ``[(degree, sup_error), ...]`` in the order given.
    """
    degrees = _check_degrees(degrees)
    if grid_size < MIN_GRID:
        raise InvalidParameterError(f"grid_size must be >= {MIN_GRID}")
    lo, hi = map(float, domain)
    if not hi > lo:
        raise InvalidParameterError("domain must have hi > lo")
    x = np.linspace(lo, hi, int(grid_size))
    y = eval_jump(target, x)

    rows = []
    if kind == "rational":
        for d in degrees:
            err = np.max(np.abs(y - jump_rational(target, d, x)))
            rows.append((d, float(err)))
    elif kind == "polynomial":
        u = to_chebyshev_domain((x - lo) / (hi - lo))
        tgt = DiscreteTarget(u, y)
        for d in degrees:
            p, _ = remez_poly(tgt, d)
            rows.append((d, float(np.max(np.abs(y - p(u))))))
    else:
        raise InvalidParameterError(f"unknown kind {kind!r}")
    return rows


def log_sqrt_fit(rows) -> tuple[float, float, float]:
    """Least-squares line of ``log(err)`` against ``sqrt(degree)``.

    Returns:
        (slope, intercept, R^2)
    """
    d = np.array([r[0] for r in rows], dtype=float)
    e = np.array([r[1] for r in rows], dtype=float)
    if len(d) < 2 or np.any(e <= 0):
        raise InvalidParameterError("need at least two positive errors")
    s = np.sqrt(d)
    ly = np.log(e)
    slope, intercept = np.polyfit(s, ly, 1)
    fit = slope * s + intercept
    ss_res = float(np.sum((ly - fit) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def write_rates_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["degree", "sup_error"])
        for d, e in rows:
            w.writerow([d, f"{e:.17g}"])
