"""End-to-end regression pipelines: graph, eigenbasis, spectral target, fits, reports."""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .filters import RationalFilter, fit_poly_least_squares, to_chebyshev_domain
from .graph import Graph, build_laplacian, generate_block_graph, read_edge_list
from .optimizer import FitReport, TrainConfig, pad_orders, spectral_loss, train
from .remez import DiscreteTarget, traverse_orders
from .spectral import EigenSystem, decompose, dirichlet_energy, igft, load_eigensystem, save_eigensystem
from .theory import JumpTarget, eval_jump

log = logging.getLogger(__name__)

TARGETS = ("abs", "sign", "highpass", "jump")
METHODS = ("rational+remez", "remez", "rational-no-remez", "poly-ls", "cheb-ls", "poly-gd", "lr")
NO_REMEZ_INIT = 1e-2
RESULT_COLUMNS = ("method", "m", "n", "k", "s_err", "v_err", "epochs", "seconds")


@dataclass(frozen=True)
class GraphSource:
    """Either a synthetic block graph (seeded by the experiment) or an edge-list file."""

    groups: int = 5
    group_size: int = 100
    intra_max: int = 8
    inter_max: int = 3
    path: str | None = None


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to rerun one experiment bit-for-bit."""

    target: str = "abs"
    methods: tuple = ("rational+remez", "poly-ls")
    m: int = 5
    n: int = 5
    k: int = 10
    seed: int = 0
    graph: GraphSource = field(default_factory=GraphSource)
    train: TrainConfig = field(default_factory=TrainConfig)
    jump: dict | None = None
    out_dir: str | None = None
    cache_dir: str | None = None
    threads: int = 1
    repeats: int = 1
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise InvalidParameterError("at least one method is required")
        unknown = [mth for mth in self.methods if mth not in METHODS]
        if unknown:
            raise InvalidParameterError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
        if self.target not in TARGETS:
            raise InvalidParameterError(f"unknown target {self.target!r}; choose from {list(TARGETS)}")
        if self.target == "jump" and not self.jump:
            raise InvalidParameterError("target 'jump' needs jump parameters (a, b, sigma, shift)")
        if min(self.m, self.n, self.k) < 0:
            raise InvalidParameterError("orders must be non-negative")
        if self.threads < 1 or self.repeats < 1:
            raise InvalidParameterError("threads and repeats must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        if "graph" in d:
            d["graph"] = GraphSource(**d["graph"])
        if "train" in d:
            d["train"] = TrainConfig(**d["train"])
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidParameterError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def target_function(name: str, jump: dict | None = None):
    """Spectral response ``g(t)`` on normalized eigenvalues."""
    if name == "abs":
        return lambda t: np.abs(t - 0.5)
    if name == "sign":
        return lambda t: np.sign(t - 0.5)
    if name == "highpass":
        return lambda t: (np.sign(t - 0.5) + 1.0) / 2.0
    if name == "jump":
        j = JumpTarget(**(jump or {}))
        return lambda t: eval_jump(j, t)
    raise InvalidParameterError(f"unknown target {name!r}")


def make_target(es: EigenSystem, name: str, jump: dict | None = None):
    """Sampled spectral target and its vertex-domain counterpart.

    Returns:
        (DiscreteTarget over normalized eigenvalues, vertex truth ``U y``)
    """
    t = es.normalized()
    y = np.asarray(target_function(name, jump)(t), dtype=float)
    return DiscreteTarget(t, y), igft(es, y)


def load_graph(spec: ExperimentSpec, seed: int) -> Graph:
    src = spec.graph
    if src.path:
        g, _ = read_edge_list(src.path)
        return g
    return generate_block_graph(src.groups, src.group_size, src.intra_max, src.inter_max, seed)


def eigensystem(g: Graph, cache_dir=None) -> EigenSystem:
    """Decompose the Laplacian, reusing a cache keyed by the edge-list hash."""
    if cache_dir:
        key = g.content_hash()
        es = load_eigensystem(cache_dir, key)
        if es is not None and es.n == g.n:
            return es
        es = decompose(build_laplacian(g))
        save_eigensystem(es, cache_dir, key)
        return es
    return decompose(build_laplacian(g))


def _mse(a, b) -> float:
    d = np.asarray(a) - np.asarray(b)
    return float(np.mean(d * d))


def _fit_method(method, spec, es, target, truth) -> FitReport:
    t, y = target.ts, target.ys
    m, n, k = spec.m, spec.n, spec.k
    if method in ("rational+remez", "remez"):
        f0, state, cells = traverse_orders(target.unique(), m, n, threads=spec.threads)
        extras = {
            "remez_orders": [state.m, state.n],
            "remez_status": state.status,
            "remez_max_residual": state.max_residual,
            "lattice": {f"{a},{b}": c for (a, b), c in sorted(cells.items())},
        }
        f0 = pad_orders(f0, m, n)
        if method == "remez":
            loss = spectral_loss(f0, target)
            rep = FitReport(method, f0.to_dict(), loss, init="remez", loss_trace=[loss], orders={"m": m, "n": n})
            gains = f0(t)
        else:
            rep = train(f0, target, cfg=spec.train, method=method, init="remez")
            gains = RationalFilter.from_dict(rep.coefficients)(t)
            extras["init_mse"] = rep.loss_trace[0]
            extras["improvement"] = (rep.loss_trace[0] - rep.spectral_mse) / rep.loss_trace[0] if rep.loss_trace[0] else 0.0
        rep.extras.update(extras)
    elif method == "rational-no-remez":
        f0 = RationalFilter(np.full(m + 1, NO_REMEZ_INIT), np.zeros(n))
        rep = train(f0, target, cfg=spec.train, method=method, init="zeros")
        gains = RationalFilter.from_dict(rep.coefficients)(t)
    elif method in ("poly-ls", "lr"):
        deg = k if method == "poly-ls" else 1
        p = fit_poly_least_squares(t, y, deg)
        gains = p(t)
        rep = FitReport(method, p.to_dict(), _mse(gains, y), init="given", orders={"k": deg})
    elif method == "cheb-ls":
        u = to_chebyshev_domain(t)
        p = fit_poly_least_squares(u, y, k, basis="chebyshev")
        gains = p(u)
        rep = FitReport(method, p.to_dict(), _mse(gains, y), init="given", orders={"k": k})
    elif method == "poly-gd":
        rep = train(RationalFilter(np.zeros(k + 1)), target, cfg=spec.train, method=method, init="zeros")
        gains = RationalFilter.from_dict(rep.coefficients)(t)
        rep.orders = {"k": k}
    else:
        raise InvalidParameterError(f"unknown method {method!r}")

    rep.vertex_mse = _mse(igft(es, gains), truth)
    return rep


def run_method(method, spec, es, target, truth) -> FitReport:
    """Fit one method; failures come back as a report with ``error`` set."""
    start = time.perf_counter()
    try:
        rep = _fit_method(method, spec, es, target, truth)
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        log.error("method %s failed: %s", method, exc)
        rep = FitReport(method, error=f"{method}: {type(exc).__name__}: {exc}")
    if spec.timing:
        rep.seconds = time.perf_counter() - start
    return rep


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def result_row(rep: FitReport) -> list[str]:
    o = rep.orders
    return [
        rep.method, _fmt(o.get("m")), _fmt(o.get("n")), _fmt(o.get("k")),
        _fmt(float(rep.spectral_mse)), _fmt(float(rep.vertex_mse)), _fmt(rep.epochs), _fmt(rep.seconds),
    ]


def write_results_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for rep in reports:
            w.writerow(result_row(rep))


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def report_filename(method: str) -> str:
    return method.replace("+", "_") + ".json"


def run_single(spec: ExperimentSpec, seed: int | None = None, out_dir=None):
    """One graph realization: every method of ``spec``.

    Returns:
        (reports in method order, summary dict)
    """
    seed = spec.seed if seed is None else seed
    g = load_graph(spec, seed)
    es = eigensystem(g, spec.cache_dir)
    target, truth = make_target(es, spec.target, spec.jump)
    L = build_laplacian(g)

    def one(method):
        return run_method(method, spec, es, target, truth)

    if spec.threads > 1 and len(spec.methods) > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            reports = list(pool.map(one, spec.methods))
    else:
        reports = [one(mth) for mth in spec.methods]

    summary = {
        "seed": seed,
        "vertices": g.n,
        "edges": g.num_edges,
        "graph_hash": g.content_hash(),
        "lambda_max": es.lambda_max,
        "target": spec.target,
        "dirichlet_energy": dirichlet_energy(L, truth),
        "failed": [r.method for r in reports if not r.ok],
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            _dump(rep.to_dict(), out / report_filename(rep.method))
        write_results_csv(reports, out / "results.csv")
        _dump(summary, out / "summary.json")
    return reports, summary


def aggregate(runs) -> list[dict]:
    """Mean and standard deviation of the errors per method over repeats."""
    by_method: dict[str, list[FitReport]] = {}
    for reports in runs:
        for rep in reports:
            by_method.setdefault(rep.method, []).append(rep)
    rows = []
    for method, reps in by_method.items():
        ok = [r for r in reps if r.ok]
        s = np.array([r.spectral_mse for r in ok])
        v = np.array([r.vertex_mse for r in ok])
        rows.append({
            "method": method,
            "runs": len(ok),
            "s_err_mean": float(s.mean()) if len(ok) else float("nan"),
            "s_err_std": float(s.std()) if len(ok) else float("nan"),
            "v_err_mean": float(v.mean()) if len(ok) else float("nan"),
            "v_err_std": float(v.std()) if len(ok) else float("nan"),
        })
    return rows


def write_aggregate_csv(rows, path) -> None:
    cols = ("method", "runs", "s_err_mean", "s_err_std", "v_err_mean", "v_err_std")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])


def run_experiment(spec: ExperimentSpec):
    """Run ``spec`` once, or over ``repeats`` consecutive seeds.

    With one repeat, outputs go straight into ``out_dir``; otherwise each
    seed gets ``out_dir/seed_<s>`` and ``aggregate.csv`` sits on top.

    Returns:
        (list of report lists, one per seed; list of summaries)
    """
    runs, summaries = [], []
    for r in range(spec.repeats):
        seed = spec.seed + r
        if spec.out_dir is None:
            out = None
        elif spec.repeats == 1:
            out = Path(spec.out_dir)
        else:
            out = Path(spec.out_dir) / f"seed_{seed}"
        reports, summary = run_single(spec, seed, out)
        runs.append(reports)
        summaries.append(summary)
    if spec.out_dir is not None:
        _dump(spec.to_dict(), Path(spec.out_dir) / "spec.json")
        if spec.repeats > 1:
            write_aggregate_csv(aggregate(runs), Path(spec.out_dir) / "aggregate.csv")
    return runs, summaries


def with_overrides(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    """Copy of ``spec`` with the non-None keyword overrides applied."""
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})
