"""Relaxed Remez exchange on discrete samples.

Produces Pade coefficients ``(psi, phi)`` that level the error
``f(t_d) - R(t_d) = (-1)^d E`` on ``m + n + 2`` control points, exchanging
the control set for residual extrema until the leveled error dominates the
full residual or a relaxed stopping rule fires.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NoFitError, PoleError, SingularSystemError
from .filters import POLE_GUARD, PolynomialFilter, RationalFilter, horner

PIVOT_TOL = 1e-12
INNER_TOL = 1e-6
LEVEL_SLACK = 1e-9
REPEAT_TOL = 1e-9
TIE_TOL = 1e-12
POLE_RESIDUAL = 1e300
POLISH_REL = 1e-3


@dataclass(frozen=True)
class DiscreteTarget:
    """Target values ``ys = f(ts)`` on sorted abscissae."""

    ts: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        ts = np.array(self.ts, dtype=float).ravel()
        ys = np.array(self.ys, dtype=float).ravel()
        if ts.shape != ys.shape:
            raise InvalidParameterError("ts and ys must have the same length")
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(ys))):
            raise InvalidParameterError("target samples must be finite")
        if np.any(np.diff(ts) < 0):
            raise InvalidParameterError("ts must be sorted ascending")
        ts.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return len(self.ts)

    def unique(self, tol: float = 1e-12) -> "DiscreteTarget":
        """Merge abscissae closer than ``tol``, averaging their targets."""
        if len(self.ts) == 0:
            return self
        group = np.concatenate(([0], np.cumsum(np.diff(self.ts) > tol)))
        counts = np.bincount(group)
        ts = np.bincount(group, weights=self.ts) / counts
        ys = np.bincount(group, weights=self.ys) / counts
        return DiscreteTarget(ts, ys)


@dataclass
class RemezState:
    """Working state of one (m, n) Remez run.

    ``psi``, ``phi``, ``E`` and ``control_points`` all refer to the same
    (best-so-far) outer iteration. ``E`` is signed: the residual at control
    point ``d`` is ``(-1)^d E``.
    """

    m: int
    n: int
    control_points: np.ndarray
    control_index: np.ndarray
    E: float = 0.0
    psi: np.ndarray = None
    phi: np.ndarray = None
    max_residual: float = np.inf
    outer_iter: int = 0
    inner_iter: int = 0
    inner_converged: bool = False
    status: str = "running"
    has_pole: bool = False
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "status": self.status,
            "E": float(self.E),
            "max_residual": float(self.max_residual),
            "outer_iter": self.outer_iter,
            "inner_iter": self.inner_iter,
            "inner_converged": self.inner_converged,
            "control_points": [float(v) for v in self.control_points],
            "psi": [float(v) for v in (self.psi if self.psi is not None else [])],
            "phi": [float(v) for v in (self.phi if self.phi is not None else [])],
            "trace": self.trace,
        }


def _monomial_vander(t, m):
    return np.vander(np.asarray(t, dtype=float), m + 1, increasing=True)


def _cheb_vander(t, m):
    return np.polynomial.chebyshev.chebvander(np.asarray(t, dtype=float), m)


def _cheb_eval(c, t):
    return np.polynomial.chebyshev.chebval(np.asarray(t, dtype=float), c)


def _solve(xs, ys, m, n, E_r, vander):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    K = m + n + 2
    if len(xs) != K:
        raise InvalidParameterError(f"need exactly m + n + 2 = {K} control points")
    signs = (-1.0) ** np.arange(K)
    A = np.empty((K, K))
    A[:, : m + 1] = vander(xs, m)
    if n:
        powers = xs[:, None] ** np.arange(1, n + 1)[None, :]
        A[:, m + 1 : m + 1 + n] = (signs * E_r - ys)[:, None] * powers
    A[:, -1] = signs
    if not np.all(np.isfinite(A)):
        raise SingularSystemError("non-finite entries in the leveling system")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    scale = max(1.0, np.max(np.abs(A)))
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL * scale:
        raise SingularSystemError(f"leveling system is singular for (m, n) = ({m}, {n})")
    sol = scipy.linalg.lu_solve((lu, piv), ys, check_finite=False)
    return sol[: m + 1], sol[m + 1 : m + 1 + n], float(sol[-1])


def solve_linearized(xs, ys, m: int, n: int, E_r: float):
    """One linearized leveling step.

    Row ``d`` of the system reads
    ``sum_i psi_i x_d^i + ((-1)^d E_r - y_d) sum_j phi_j x_d^j + (-1)^d E_next = y_d``
    with unknowns ``psi_0..psi_m, phi_1..phi_n, E_next``.

    Returns:
        (psi, phi, E_next)

    Raises:
        SingularSystemError: if an LU pivot falls below ``1e-12`` times the
            largest matrix entry.
    """
    return _solve(xs, ys, m, n, E_r, _monomial_vander)


def _level(xs, ys, m, n, max_inner, tol, vander):
    E_r = 0.0
    for it in range(1, max_inner + 1):
        psi, phi, E_next = _solve(xs, ys, m, n, E_r, vander)
        if abs(E_next - E_r) < tol:
            return psi, phi, E_next, it, True
        E_r = E_next
    return psi, phi, E_next, max_inner, False


def _fill_signs(r):
    s = np.sign(r)
    nz = np.flatnonzero(s)
    if len(nz) == 0:
        return np.ones_like(s)
    # zero residuals join the run of the nearest preceding nonzero sign
    idx = np.maximum.accumulate(np.where(s != 0, np.arange(len(s)), -1))
    idx[idx < 0] = nz[0]
    return s[idx]


def exchange(residual, prev_index, K: int) -> np.ndarray:
    """New control indices from the residual's sign-run extrema.

    The samples are split into maximal runs of constant residual sign and the
    largest-magnitude sample of each run is taken. Surplus points are removed
    smallest first while keeping the signs alternating; a shortfall is filled
    with the previous control points carrying the largest residuals.
    """
    r = np.asarray(residual, dtype=float)
    a = np.abs(r)
    s = _fill_signs(r)
    starts = np.concatenate(([0], np.flatnonzero(np.diff(s) != 0) + 1, [len(r)]))
    cand = [lo + int(np.argmax(a[lo:hi])) for lo, hi in zip(starts[:-1], starts[1:])]

    while len(cand) > K:
        if len(cand) - K == 1:
            cand.pop(0 if a[cand[0]] < a[cand[-1]] else -1)
            continue
        i = int(np.argmin(a[cand]))
        if i == 0 or i == len(cand) - 1:
            cand.pop(i)
        else:
            left, right = cand[i - 1], cand[i + 1]
            drop = i - 1 if a[left] < a[right] else i + 1
            for j in sorted((i, drop), reverse=True):
                cand.pop(j)

    if len(cand) < K:
        spare = [int(p) for p in prev_index if int(p) not in set(cand)]
        spare.sort(key=lambda p: -a[p])
        cand.extend(spare[: K - len(cand)])
        if len(cand) < K:
            rest = [int(p) for p in np.argsort(-a, kind="stable") if int(p) not in set(cand)]
            cand.extend(rest[: K - len(cand)])
    return np.array(sorted(cand), dtype=int)


def _perturb(index, N):
    for step in (1, -1):
        new = index.copy()
        new[1:-1] += step
        if new[0] >= 0 and new[-1] < N and np.all(np.diff(new) > 0):
            return new
    return index


def _has_pole(q, guard):
    return np.min(np.abs(q)) < guard or (np.min(q) < 0 < np.max(q))


def _pencil_solutions(xs, ys, m, n, vander):
    """Real solutions ``(E, psi, phi)`` of the nonlinear leveling equations.

    ``P(x_d) - (y_d - (-1)^d E) Q(x_d) = 0`` is a generalized eigenproblem
    in ``E``; each real eigenpair with a nonzero ``Q`` constant term gives
    one solution, normalized so that ``Q(0) = 1``.
    """
    K = m + n + 2
    signs = (-1.0) ** np.arange(K)
    Vq = np.vander(xs, n + 1, increasing=True)
    A = np.hstack([vander(xs, m), -ys[:, None] * Vq])
    B = np.hstack([np.zeros((K, m + 1)), signs[:, None] * Vq])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            w, vecs = scipy.linalg.eig(A, -B)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(f"exact leveling failed: {exc}") from exc

    out = []
    for E, c in zip(w, vecs.T):
        if not np.isfinite(E) or abs(E.imag) > 1e-10 * max(1.0, abs(E)):
            continue
        if np.max(np.abs(c.imag)) > 1e-8 * np.max(np.abs(c)):
            continue
        c = c.real
        if abs(c[m + 1]) < 1e-14 * np.max(np.abs(c)):
            continue
        c = c / c[m + 1]
        out.append((float(E.real), c[: m + 1], c[m + 2 :]))
    return out


def exact_level(xs, ys, m: int, n: int, ts=None, vander=_monomial_vander):
    """Solve the nonlinear leveling equations directly.

    Among the real solutions whose denominator keeps one sign over ``ts``
    (the control points if omitted), the smallest ``|E|`` is returned.

    Returns:
        (psi, phi, E)

    Raises:
        SingularSystemError: no real, pole-free leveled solution exists.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    ts = xs if ts is None else np.asarray(ts, dtype=float)
    found = []
    for E, psi, phi in _pencil_solutions(xs, ys, m, n, vander):
        q = horner(np.concatenate(([1.0], phi)), ts)
        if np.all(np.isfinite(q)) and (np.min(q) > 0 or np.max(q) < 0):
            found.append((abs(E), E, psi, phi))
    if not found:
        raise SingularSystemError(f"no pole-free leveled solution for (m, n) = ({m}, {n})")
    _, E, psi, phi = min(found, key=lambda it: it[0])
    return psi, phi, E


def polish_level(xs, ys, m, n, E, vander=_monomial_vander, rel=None):
    """Snap a converged linearized solution onto the exact leveled solution.

    The fixed point of the linearized iteration solves the nonlinear
    leveling equations, so it is the real pencil solution nearest ``E``.
    Returns None when no solution lies within ``rel * (1 + |E|)``.
    """
    rel = POLISH_REL if rel is None else rel
    sols = _pencil_solutions(np.asarray(xs, float), np.asarray(ys, float), m, n, vander)
    if not sols:
        return None
    Ee, psi, phi = min(sols, key=lambda it: abs(it[0] - E))
    if abs(Ee - E) > rel * (1.0 + abs(E)):
        return None
    return psi, phi, Ee


def _residual(psi, phi, ts, ys, numer_eval, guard):
    q = horner(np.concatenate(([1.0], phi)), ts)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = ys - numer_eval(psi, ts) / q
    # samples sitting on a pole get a huge residual so the exchange picks them
    r = np.where(np.isfinite(r) & (np.abs(q) >= guard), r, np.copysign(POLE_RESIDUAL, -q))
    return r, q, _has_pole(q, guard)


def _remez(target, m, n, max_outer, max_inner, inner_tol, guard, vander, numer_eval, leveling,
           allow_poles=False):
    if m < 0 or n < 0:
        raise InvalidParameterError("orders must be non-negative")
    if leveling not in ("linearized", "auto"):
        raise InvalidParameterError(f"unknown leveling {leveling!r}")
    ts, ys = target.ts, target.ys
    N = len(ts)
    K = m + n + 2
    if N < K:
        raise InvalidParameterError(f"need at least m + n + 2 = {K} samples, got {N}")

    index = np.unique(np.round(np.linspace(0, N - 1, K)).astype(int))
    state = RemezState(m, n, ts[index], index)
    best = None
    prev_deltas = None
    retried = False

    for outer in range(1, max_outer + 1):
        state.outer_iter = outer
        xs, fs = ts[index], ys[index]
        cands = []
        try:
            psi, phi, E, inner, ok = _level(xs, fs, m, n, max_inner, inner_tol, vander)
            state.inner_iter += inner
            cands.append(("linearized", psi, phi, E, inner, ok))
        except SingularSystemError:
            if leveling == "linearized":
                if best is None:
                    state.status = "singular-skip"
                    raise
                state.status = "relaxed-stop"
                break
        if leveling == "auto" and n > 0:
            try:
                psi, phi, E = exact_level(xs, fs, m, n, xs if allow_poles else ts, vander)
                cands.append(("exact", psi, phi, E, 0, True))
            except SingularSystemError:
                pass
        if not cands:
            if best is None:
                state.status = "singular-skip"
                raise SingularSystemError(f"leveling system is singular for (m, n) = ({m}, {n})")
            state.status = "relaxed-stop"
            break

        scored = []
        for method, psi, phi, E, inner, ok in cands:
            r, q, pole = _residual(psi, phi, ts, ys, numer_eval, guard)
            scored.append((pole, float(np.abs(r).max()), method, psi, phi, E, inner, ok, r))
        pole, max_res, method, psi, phi, E, inner, ok, r = min(scored, key=lambda c: (c[0], c[1]))

        if pole and leveling == "linearized" and not allow_poles:
            state.trace.append({"outer": outer, "E": E, "pole": True, "leveling": method})
            if not retried:
                retried = True
                index = _perturb(index, N)
                continue
            state.status = "relaxed-stop"
            break

        delta = np.abs(r)
        state.trace.append({
            "outer": outer, "E": E, "max_residual": max_res, "inner_iter": inner,
            "inner_converged": ok, "leveling": method, "pole": bool(pole),
        })
        if (allow_poles or not pole) and (best is None or (pole, max_res) < (best[6], best[0])):
            best = (max_res, psi, phi, E, index.copy(), ok, pole)

        if not pole and max_res <= abs(E) + LEVEL_SLACK:
            state.status = "converged"
            break

        new_index = exchange(r, index, K)
        deltas = (float(delta[new_index].min()), float(delta[new_index].max()))
        if prev_deltas is not None and all(abs(x - y) <= REPEAT_TOL for x, y in zip(deltas, prev_deltas)):
            state.status = "relaxed-stop"
            break
        prev_deltas = deltas
        index = new_index
    else:
        state.status = "relaxed-stop"

    if best is None:
        state.status = "relaxed-stop"
        err = PoleError(f"every Remez iterate for (m, n) = ({m}, {n}) has a pole in the sample range")
        err.state = state
        raise err
    max_res, psi, phi, E, index, ok, pole = best
    if ok and n > 0:
        # the linearized fixed point is only accurate to the inner tolerance
        polished = polish_level(ts[index], ys[index], m, n, E, vander)
        if polished is not None:
            r, _, p_pole = _residual(polished[0], polished[1], ts, ys, numer_eval, guard)
            p_max = float(np.abs(r).max())
            if p_pole <= pole and p_max <= max_res + POLISH_REL * (1.0 + abs(E)):
                psi, phi, E = polished
                max_res, pole = p_max, p_pole
    state.has_pole = bool(pole)
    state.max_residual = max_res
    state.psi, state.phi, state.E = psi, phi, E
    state.control_index = index
    state.control_points = ts[index]
    state.inner_converged = ok
    return state


def remez_fit(
    target: DiscreteTarget,
    m: int,
    n: int,
    max_outer: int = 50,
    max_inner: int = 100,
    inner_tol: float = INNER_TOL,
    pole_guard: float = POLE_GUARD,
    leveling: str = "auto",
    allow_poles: bool = False,
):
    """Relaxed Remez fit of a type-(m, n) Pade function to ``target``.

    With ``allow_poles`` an iterate whose denominator vanishes or changes
    sign between samples may still be returned (pole-free iterates win when
    available) and ``state.has_pole`` records it. Such a filter is only
    meaningful on the samples themselves.

    Returns:
        (RationalFilter, RemezState) holding the best iterate by maximum
        residual over all samples.

    Raises:
        SingularSystemError: the very first leveling system is singular.
        PoleError: every iterate put a pole inside the sample range.
    """
    state = _remez(
        target, m, n, max_outer, max_inner, inner_tol, pole_guard, _monomial_vander, horner, leveling,
        allow_poles,
    )
    return RationalFilter(state.psi, state.phi), state


def remez_poly(target: DiscreteTarget, degree: int, max_outer: int = 50):
    """Discrete minimax polynomial on [-1, 1] samples, in the Chebyshev basis.

    Same exchange as :func:`remez_fit` with no denominator; the Chebyshev
    basis keeps the leveling system well conditioned at high degree.
    """
    if target.ts.size and (target.ts.min() < -1 - 1e-12 or target.ts.max() > 1 + 1e-12):
        raise InvalidParameterError("remez_poly expects abscissae in [-1, 1]")
    state = _remez(
        target, degree, 0, max_outer, 2, INNER_TOL, POLE_GUARD, _cheb_vander, _cheb_eval, "linearized"
    )
    return PolynomialFilter(state.psi, "chebyshev"), state


def decrement_orders(m: int, n: int) -> list[tuple[int, int]]:
    """Order schedule lowering n and m in turns, starting from (m, n)."""
    out = [(m, n)]
    turn_n = True
    while m > 0 or n > 0:
        if (turn_n and n > 0) or m == 0:
            n -= 1
        else:
            m -= 1
        turn_n = not turn_n
        out.append((m, n))
    return out


def traverse_orders(
    target: DiscreteTarget,
    m_max: int,
    n_max: int,
    max_outer: int = 50,
    max_inner: int = 100,
    schedule: str = "lattice",
    threads: int = 1,
    leveling: str = "auto",
):
    """Run :func:`remez_fit` over candidate orders and keep the best.

    ``schedule="lattice"`` tries every ``0 <= m <= m_max, 0 <= n <= n_max``;
    ``"decrement"`` follows :func:`decrement_orders`. Orders needing more
    control points than there are samples are skipped. The winner has the
    smallest maximum residual; near-ties go to smaller ``m + n``, then
    smaller ``n``.

    Returns:
        (RationalFilter, RemezState, cells) where ``cells`` maps each tried
        ``(m, n)`` to ``{"status": ..., "max_residual": ...}``.
    """
    if m_max < 0 or n_max < 0:
        raise InvalidParameterError("m_max and n_max must be non-negative")
    if schedule == "lattice":
        orders = [(m, n) for m in range(m_max + 1) for n in range(n_max + 1)]
    elif schedule == "decrement":
        orders = decrement_orders(m_max, n_max)
    else:
        raise InvalidParameterError(f"unknown schedule {schedule!r}")
    orders = [(m, n) for m, n in orders if m + n + 2 <= len(target)]

    def run(order):
        m, n = order
        try:
            return order, remez_fit(target, m, n, max_outer, max_inner, leveling=leveling), None
        except SingularSystemError:
            return order, None, "singular-skip"
        except PoleError:
            return order, None, "pole"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, orders))
    else:
        results = [run(o) for o in orders]

    cells = {}
    fits = []
    for order, fit, err in results:
        if fit is None:
            cells[order] = {"status": err, "max_residual": None}
        else:
            cells[order] = {"status": fit[1].status, "max_residual": fit[1].max_residual}
            fits.append((order, fit))
    if not fits:
        raise NoFitError("no (m, n) order produced a usable fit")

    lowest = min(fit[1].max_residual for _, fit in fits)
    ties = [
        (order, fit) for order, fit in fits
        if fit[1].max_residual <= lowest + TIE_TOL * (1.0 + lowest)
    ]
    order, (filt, state) = min(ties, key=lambda it: (it[0][0] + it[0][1], it[0][1]))
    return filt, state, cells
