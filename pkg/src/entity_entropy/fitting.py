"""Per-entity parameter fitting of the growth model to observed entropy series.

The protocol: anchor each entity at the first day its entropy exceeds zero,
fit on the next ``train_days`` days, score on the ``eval_days`` after that.
Fitting minimises the RMSE between the observed series and the
expectation-mode trajectory with L-BFGS-B (central finite-difference
gradients, multi-start).
"""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize

from .corpus import CorpusIndex
from .genmodel import DocSchedule, GenParams, Window, expected_entropy
from .temporal import EntropySeries, TemporalUnavailable, daily_document_counts, entropy_series

log = logging.getLogger(__name__)

DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "alpha_e": (-10.0, 10.0),
    "delta_e": (0.0, 1.0),
    "alpha_local": (0.0, 100.0),
    "alpha_global": (0.0, 100.0),
    "alpha_docs": (0.01, 1000.0),
}

# alpha_docs, mu and sigma leave the expectation trajectory unchanged, so only
# these four are searched.
FITTED = ("alpha_e", "delta_e", "alpha_local", "alpha_global")


class InsufficientHistory(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class FitConfig:
    train_days: int = 30
    eval_days: int = 90
    bounds: Mapping[str, tuple[float, float]] = dataclasses.field(
        default_factory=lambda: dict(DEFAULT_BOUNDS))
    max_iterations: int = 200
    tolerance: float = 1e-10
    restarts: int = 8
    screen: int = 1024
    seed: int = 0
    fd_step: float = 1e-5
    window: Window = "day"
    stop_rmse: float = 1e-6
    alpha_docs: float = 10.0
    mu_facts: float = 2.0
    sigma_facts: float = 1.0

    def __post_init__(self):
        if self.train_days < 1:
            raise ValueError("train_days must be >= 1")
        if self.eval_days < 0:
            raise ValueError("eval_days must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.screen < 0:
            raise ValueError("screen must be >= 0")
        bounds = dict(DEFAULT_BOUNDS)
        bounds.update(self.bounds)
        for name, (lo, hi) in bounds.items():
            if name not in DEFAULT_BOUNDS:
                raise ValueError(f"unknown bounded parameter {name!r}")
            if lo > hi:
                raise ValueError(f"{name}: empty bound interval [{lo}, {hi}]")
        for name in ("delta_e", "alpha_local", "alpha_global"):
            if bounds[name][0] < 0:
                raise ValueError(f"{name}: lower bound must be >= 0")
        if bounds["alpha_docs"][0] <= 0:
            raise ValueError("alpha_docs: lower bound must be > 0")
        object.__setattr__(self, "bounds", bounds)

    def box(self) -> list[tuple[float, float]]:
        return [self.bounds[name] for name in FITTED]

    def params_from_vector(self, x: Sequence[float]) -> GenParams:
        return GenParams(**dict(zip(FITTED, map(float, x))), alpha_docs=self.alpha_docs,
                         mu_facts=self.mu_facts, sigma_facts=self.sigma_facts)


@dataclasses.dataclass(frozen=True)
class FitResult:
    entity_id: str
    train_days: int
    params: GenParams
    train_rmse: float
    test_rmse: float | None
    converged: bool
    iterations: int
    restarts_used: int
    anchor: int = 0


@dataclasses.dataclass(frozen=True)
class TrainEvalSplit:
    anchor: int
    train: np.ndarray
    eval: np.ndarray


def rmse(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty series")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def first_nonzero(values: Sequence[float]) -> int | None:
    for t, v in enumerate(values):
        if v > 0:
            return t
    return None


def split_train_eval(series: EntropySeries | Sequence[float], train_days: int,
                     eval_days: int) -> TrainEvalSplit:
    """Cut the series into train/eval windows starting at its first non-zero value.

    Raises:
        InsufficientHistory: entropy never leaves zero, or fewer than
            ``train_days + eval_days`` days remain after the anchor.
    """
    values = np.asarray(series.values if isinstance(series, EntropySeries) else series, float)
    anchor = first_nonzero(values)
    if anchor is None:
        raise InsufficientHistory("entropy never exceeds zero")
    available = len(values) - anchor
    if available < train_days + eval_days:
        raise InsufficientHistory(
            f"{available} days after first non-zero entropy, need {train_days + eval_days}")
    mid = anchor + train_days
    return TrainEvalSplit(anchor, values[anchor:mid], values[mid:mid + eval_days])


def _counts(schedule: DocSchedule | Sequence[int]) -> tuple[int, ...]:
    return schedule.counts if isinstance(schedule, DocSchedule) else tuple(schedule)


def objective(params: GenParams, observed: Sequence[float], schedule: DocSchedule | Sequence[int],
              start: int = 0, window: Window = "day") -> float:
    """RMSE between ``observed`` and the expectation trajectory on days ``start..start+len-1``.

    Day 0 of ``schedule`` is the entity's first mention.
    """
    counts = _counts(schedule)
    stop = start + len(observed)
    if len(counts) < stop:
        raise ValueError(f"schedule covers {len(counts)} days, need {stop}")
    sim = expected_entropy(params, counts[:stop], window)
    return rmse(sim[start:], observed)


def _value_and_grad(f, x: np.ndarray, box, step: float):
    fx = f(x)
    grad = np.empty_like(x)
    for i, (lo, hi) in enumerate(box):
        h = step * max(1.0, abs(x[i]))
        up, down = min(x[i] + h, hi), max(x[i] - h, lo)
        if up == down:
            grad[i] = 0.0
            continue
        xu, xd = x.copy(), x.copy()
        xu[i], xd[i] = up, down
        grad[i] = (f(xu) - f(xd)) / (up - down)
    return fx, grad


def fit_entity(observed: EntropySeries | Sequence[float], schedule: DocSchedule | Sequence[int],
               config: FitConfig = FitConfig(), entity_id: str | None = None) -> FitResult:
    """Fit one entity under the train/eval protocol.

    Non-convergence is not an error: the best point found is returned with
    ``converged=False``.
    """
    if entity_id is None:
        entity_id = observed.entity_id if isinstance(observed, EntropySeries) else ""
    split = split_train_eval(observed, config.train_days, config.eval_days)
    counts = _counts(schedule)
    horizon = split.anchor + config.train_days + config.eval_days
    if len(counts) < horizon:
        raise InsufficientHistory(f"schedule covers {len(counts)} days, need {horizon}")
    train = split.train
    train_counts = counts[:split.anchor + config.train_days]

    def f(x):
        return objective(config.params_from_vector(x), train, train_counts, split.anchor,
                         config.window)

    box = config.box()
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    rng = np.random.default_rng(config.seed)
    # screen a larger uniform sample and start local searches from its best points
    pool = rng.uniform(lo, hi, size=(max(config.screen, config.restarts), len(box)))
    scores = np.array([f(x) for x in pool]) if len(pool) > config.restarts else np.zeros(len(pool))
    starts = pool[np.argsort(scores, kind="stable")[:config.restarts]]

    best_x, best_f, best_res = None, math.inf, None
    used = 0
    for x0 in starts:
        used += 1
        res = optimize.minimize(lambda x: _value_and_grad(f, x, box, config.fd_step), x0,
                                jac=True, method="L-BFGS-B", bounds=box,
                                options={"maxiter": config.max_iterations,
                                         "ftol": config.tolerance, "gtol": 1e-10})
        fx = f(res.x)
        if fx < best_f:
            best_x, best_f, best_res = res.x, fx, res
        if best_f <= config.stop_rmse:
            break

    params = config.params_from_vector(best_x)
    test = None
    if config.eval_days > 0:
        full = expected_entropy(params, counts[:horizon], config.window)
        test = rmse(full[split.anchor + config.train_days:], split.eval)
    return FitResult(entity_id, config.train_days, params, best_f, test,
                     bool(best_res.success), int(best_res.nit), used, split.anchor)


def fit_summary(results: Iterable[FitResult], metric: str = "test") -> list[dict]:
    """Mean / median / std RMSE and sample count per training window."""
    groups: dict[int, list[float]] = {}
    for r in results:
        value = r.test_rmse if metric == "test" else r.train_rmse
        if value is None:
            continue
        groups.setdefault(r.train_days, []).append(value)
    rows = []
    for days in sorted(groups):
        v = np.asarray(groups[days])
        rows.append({"train_days": days, "mean_rmse": float(v.mean()),
                     "median_rmse": float(np.median(v)), "std_rmse": float(v.std(ddof=0)),
                     "valid_samples": int(v.size)})
    return rows


def document_fact_totals(index: CorpusIndex) -> dict[str, int]:
    """Facts per document summed over all admitted entities (documents with none omitted)."""
    totals: dict[str, int] = {}
    for table in index:
        for d, n in table.counts.items():
            totals[d] = totals.get(d, 0) + n
    return dict(sorted(totals.items()))


def fit_lognormal(values: Sequence[float]) -> tuple[float, float] | None:
    """Maximum-likelihood lognormal ``(mu, sigma)``; ``None`` for fewer than two values."""
    v = np.asarray([x for x in values if x > 0], dtype=float)
    if v.size < 2:
        return None
    logs = np.log(v)
    mu, sigma = float(logs.mean()), float(logs.std(ddof=0))
    if sigma <= 0:
        raise ValueError("degenerate fact-count distribution: sigma must be > 0")
    return mu, sigma


def fit_global_fact_params(index: CorpusIndex) -> tuple[float, float] | None:
    return fit_lognormal(list(document_fact_totals(index).values()))


@dataclasses.dataclass(frozen=True)
class _Task:
    entity_id: str
    values: tuple[float, ...]
    counts: tuple[int, ...]
    config: FitConfig


def _run_task(task: _Task) -> FitResult:
    return fit_entity(task.values, task.counts, task.config, task.entity_id)


def fit_corpus(index: CorpusIndex, train_windows: Sequence[int] = (30, 60, 90),
               eval_days: int = 90, config: FitConfig = FitConfig(),
               workers: int = 1) -> tuple[list[FitResult], dict[str, str]]:
    """Apply the protocol to every admitted entity for each training window.

    Returns the fit results (ordered by entity id, then window) and a map of
    excluded ``entity_id -> reason`` for entities not fitted under any window.
    """
    try:
        fact_params = fit_global_fact_params(index)
    except ValueError:
        # every document holds the same total; keep the configured mu/sigma
        fact_params = None
    if fact_params is not None:
        config = dataclasses.replace(config, mu_facts=fact_params[0], sigma_facts=fact_params[1])
    last_day = max((d.created_at for d in index.documents.values() if d.created_at), default=None)

    tasks: list[_Task] = []
    excluded: dict[str, str] = {}
    for eid in index.entity_ids:
        try:
            series = entropy_series(index, eid)
        except TemporalUnavailable as exc:
            excluded[eid] = str(exc)
            continue
        horizon = (last_day - series.first_mention).days
        series = entropy_series(index, eid, horizon)
        counts = tuple(daily_document_counts(index, series.first_mention, horizon + 1))
        eligible = False
        reason = ""
        for days in train_windows:
            try:
                split_train_eval(series, days, eval_days)
            except InsufficientHistory as exc:
                reason = str(exc)
                continue
            eligible = True
            tasks.append(_Task(eid, series.values, counts,
                               dataclasses.replace(config, train_days=days, eval_days=eval_days)))
        if not eligible:
            excluded[eid] = reason
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    return results, excluded
