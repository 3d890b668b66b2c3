"""Monte Carlo trajectories of the D-BMAP/G/inf system.

Time convention (shared with :mod:`transq.exact`): a horizon-``t`` trajectory
has transitions ``k = 0..t-1``; the batch of transition ``k`` arrives at time
``k``.  A customer from epoch ``k`` with service time ``Y`` is present at
slot ``u`` iff ``k <= u < k + Y``; the count reported for the horizon itself
is therefore ``#{k + Y > t}``, and customers finishing exactly at ``t`` are
not counted.

Every run ``r`` draws from ``default_rng([seed, r])`` so aggregated results do
not depend on how runs are split across workers.
"""
from __future__ import annotations

import bisect
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arrival import DBmapModel
from .service import ServiceLaw


@dataclass
class TrajectoryRecord:
    horizon: int
    state_path: np.ndarray  # I(0..t)
    batch_sizes: np.ndarray  # batch of transition k, k = 0..t-1
    epochs: np.ndarray  # arrival epoch of each customer
    service_times: np.ndarray  # Y of each customer, aligned with epochs
    counts: np.ndarray  # N(0..t)

    @property
    def arrivals(self) -> list[tuple[int, int, list[int]]]:
        """``(epoch, batch_size, service times)`` for every epoch with a nonempty batch."""
        out = []
        start = 0
        for k, b in enumerate(self.batch_sizes):
            if b:
                out.append((k, int(b), self.service_times[start : start + b].tolist()))
            start += b
        return out


@dataclass
class EmpiricalResult:
    time: int
    n_runs: int
    seed: int
    histogram: np.ndarray  # integer counts per m
    distribution: np.ndarray
    std_errors: np.ndarray
    mean: float
    mean_se: float
    factorial_moment_2: float
    factorial_moment_2_se: float

    @classmethod
    def from_histogram(cls, time: int, seed: int, hist: np.ndarray) -> "EmpiricalResult":
        n = int(hist.sum())
        m = np.arange(hist.size, dtype=float)
        p = hist / n
        se = np.sqrt(p * (1 - p) / n)
        mean = float(p @ m)
        ff = m * (m - 1)
        fm2 = float(p @ ff)

        def _se(values, mu):
            if n < 2:
                return 0.0
            var = float(hist @ (values - mu) ** 2) / (n - 1)
            return math.sqrt(var / n)

        return cls(time, n, seed, hist, p, se, mean, _se(m, mean), fm2, _se(ff, fm2))

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "runs": self.n_runs,
            "seed": self.seed,
            "mean": self.mean,
            "mean_se": self.mean_se,
            "factorial_moment_2": self.factorial_moment_2,
            "factorial_moment_2_se": self.factorial_moment_2_se,
            "distribution": [float(x) for x in self.distribution],
            "std_errors": [float(x) for x in self.std_errors],
        }


def _outcome_tables(model: DBmapModel):
    """Per current state: cumulative probabilities over the flattened (j, l) outcomes."""
    if "sim_tables" not in model._cache:
        K, L = model.num_states, model.max_batch
        tables = []
        for i in range(K):
            # outcome index o = j * (L + 1) + l
            probs = model.batch_matrices[:, i, :].T.reshape(-1)
            tables.append(np.cumsum(probs).tolist())
        model._cache["sim_tables"] = (tables, np.cumsum(model.initial_dist).tolist())
    return model._cache["sim_tables"]


def _pick(cum: list, u: float) -> int:
    return min(bisect.bisect_right(cum, u), len(cum) - 1)


def _sample_path(model: DBmapModel, law: ServiceLaw, t: int, rng: np.random.Generator):
    tables, init = _outcome_tables(model)
    width = model.max_batch + 1
    u = rng.random(t + 1)
    states = np.empty(t + 1, dtype=np.int64)
    batches = np.zeros(t, dtype=np.int64)
    state = _pick(init, u[0])
    states[0] = state
    for k in range(t):
        state, batches[k] = divmod(_pick(tables[state], u[k + 1]), width)
        states[k + 1] = state
    n = int(batches.sum())
    service = law.sample_many(rng, n) if n else np.zeros(0, dtype=np.int64)
    epochs = np.repeat(np.arange(t, dtype=np.int64), batches)
    return states, batches, epochs, service


def _occupancy(epochs: np.ndarray, service: np.ndarray, t: int) -> np.ndarray:
    """N(u) for u = 0..t: customers with ``k <= u < k + Y``."""
    diff = np.zeros(t + 2, dtype=np.int64)
    np.add.at(diff, epochs, 1)
    np.add.at(diff, np.minimum(epochs + service, t + 1), -1)
    return np.cumsum(diff)[: t + 1]


def simulate_trajectory(model: DBmapModel, law: ServiceLaw, t: int, rng: np.random.Generator) -> TrajectoryRecord:
    if t < 0:
        raise ValueError("horizon must be nonnegative")
    states, batches, epochs, service = _sample_path(model, law, t, rng)
    return TrajectoryRecord(t, states, batches, epochs, service, _occupancy(epochs, service, t))


def count_at_horizon(traj: TrajectoryRecord, t: int | None = None) -> int:
    """Customers present at time t counting only arrivals of transitions before t."""
    t = traj.horizon if t is None else t
    mask = traj.epochs < t
    return int(np.count_nonzero(traj.epochs[mask] + traj.service_times[mask] > t))


def effective_path(traj: TrajectoryRecord, t: int) -> np.ndarray:
    """``N(s; t)`` for s = 0..t: present at s and still in service at t.

    For ``s <= t`` the condition ``Y > t - k`` implies ``Y > s - k``, so this
    is the number of survivors-to-t among epochs ``k <= s``.
    """
    if t > traj.horizon or t < 0:
        raise ValueError(f"target time {t} outside 0..{traj.horizon}")
    k, y = traj.epochs, traj.service_times
    keep = (k <= t) & (k + y > t)
    per_epoch = np.bincount(k[keep], minlength=t + 1)[: t + 1]
    return np.cumsum(per_epoch)


@dataclass
class LemmaCheck:
    trajectories: int = 0
    endpoint: int = 0  # N(t; t) != N(t)
    dominated: int = 0  # N(s; t) > N(s)
    monotone: int = 0  # N(s; t) decreasing somewhere

    @property
    def violations(self) -> int:
        return self.endpoint + self.dominated + self.monotone

    def to_dict(self) -> dict:
        return {
            "trajectories": self.trajectories,
            "endpoint_violations": self.endpoint,
            "dominance_violations": self.dominated,
            "monotonicity_violations": self.monotone,
        }


def check_effective_properties(traj: TrajectoryRecord, check: LemmaCheck | None = None) -> LemmaCheck:
    """Compare every effective path N(.; t), 1 <= t <= horizon, with the occupancy N(.)."""
    check = check or LemmaCheck()
    check.trajectories += 1
    n = traj.counts
    for t in range(1, traj.horizon + 1):
        path = effective_path(traj, t)
        check.endpoint += int(path[t] != n[t])
        check.dominated += int(np.count_nonzero(path > n[: t + 1]))
        check.monotone += int(np.count_nonzero(np.diff(path) < 0))
    return check


def run_rng(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng([seed, run])


def _count_block(model, law, horizon, times, seed, start, stop, effective_checks):
    times = np.asarray(times)
    out = np.empty((times.size, stop - start), dtype=np.int64)
    check = LemmaCheck() if effective_checks else None
    for col, r in enumerate(range(start, stop)):
        states, batches, epochs, service = _sample_path(model, law, horizon, run_rng(seed, r))
        # customer counted at horizon h iff k < h < k + Y
        diff = np.zeros(horizon + 2, dtype=np.int64)
        np.add.at(diff, epochs + 1, 1)
        np.add.at(diff, np.minimum(epochs + service, horizon + 1), -1)
        out[:, col] = np.cumsum(diff)[times]
        if check is not None:
            traj = TrajectoryRecord(horizon, states, batches, epochs, service, _occupancy(epochs, service, horizon))
            check_effective_properties(traj, check)
    return out, check


def _blocks(n_runs: int, workers: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, n_runs, max(1, workers) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def sample_counts(
    model: DBmapModel,
    law: ServiceLaw,
    times: Sequence[int],
    n_runs: int,
    seed: int,
    workers: int = 1,
    effective_checks: bool = False,
) -> tuple[np.ndarray, LemmaCheck | None]:
    """Counts ``N(t)`` for each t in ``times`` (rows) and each run (columns).

    All horizons are read off one trajectory of length ``max(times)`` per run:
    its first t transitions are a horizon-t trajectory.
    """
    if n_runs < 1:
        raise ValueError("need at least one run")
    times = [int(x) for x in times]
    if min(times) < 0:
        raise ValueError("times must be nonnegative")
    horizon = max(times)
    blocks = _blocks(n_runs, workers)
    args = [(model, law, horizon, times, seed, a, b, effective_checks) for a, b in blocks]
    if workers <= 1 or len(blocks) == 1:
        parts = [_count_block(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_count_block, *zip(*args)))
    counts = np.concatenate([p[0] for p in parts], axis=1)
    check = None
    if effective_checks:
        check = LemmaCheck()
        for _, c in parts:
            check.trajectories += c.trajectories
            check.endpoint += c.endpoint
            check.dominated += c.dominated
            check.monotone += c.monotone
    return counts, check


def empirical_curve(
    model: DBmapModel,
    law: ServiceLaw,
    times: Sequence[int],
    n_runs: int,
    seed: int,
    workers: int = 1,
) -> dict[int, EmpiricalResult]:
    counts, _ = sample_counts(model, law, times, n_runs, seed, workers)
    return {int(t): EmpiricalResult.from_histogram(int(t), seed, np.bincount(row)) for t, row in zip(times, counts)}


def empirical_distribution(
    model: DBmapModel, law: ServiceLaw, t: int, n_runs: int, seed: int, workers: int = 1
) -> EmpiricalResult:
    return empirical_curve(model, law, [t], n_runs, seed, workers)[t]
