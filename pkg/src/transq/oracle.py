"""Brute-force propagation of the joint law of (background state, effective count).

``table[i, m] = P(I(s) = i, N(s; t) = m)`` where ``N(s; t)`` counts the
customers that arrived in transitions ``0..s-1`` and are still in service at
time ``t``.  One step applies the transition kernel directly; no generating
functions are involved.  Deliberately slow and simple.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arrival import DBmapModel
from .service import ServiceLaw

MAX_TABLE_SIZE = 10**6


@lru_cache(maxsize=None)
def pascal(n: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1]]
    for _ in range(n):
        prev = rows[-1]
        rows.append([1] + [prev[k - 1] + prev[k] for k in range(1, len(prev))] + [1])
    return tuple(tuple(r) for r in rows)


@dataclass
class JointState:
    s: int
    t: int
    table: np.ndarray  # (K, M+1)

    @property
    def total(self) -> float:
        return float(self.table.sum())


def transition_prob(model: DBmapModel, law: ServiceLaw, i: int, j: int, delta: int, horizon_gap: int) -> float:
    """P(next state j and exactly ``delta`` new customers survive to t | state i).

    ``horizon_gap = t - s``: a customer arriving in transition s survives iff
    its service time exceeds it.
    """
    if delta < 0 or horizon_gap < 1:
        raise ValueError("need delta >= 0 and horizon_gap >= 1")
    L = model.max_batch
    if delta > L:
        return 0.0
    phi = law.survival(horizon_gap)
    binom = pascal(L)
    total = 0.0
    for l in range(delta, L + 1):
        d = model.batch_matrices[l, i, j]
        if d:
            total += d * binom[l][delta] * phi**delta * (1.0 - phi) ** (l - delta)
    return total


def kernel(model: DBmapModel, law: ServiceLaw, horizon_gap: int) -> np.ndarray:
    """``kern[i, j, delta] = transition_prob(i, j, delta, horizon_gap)``, memoised on the model."""
    key = ("oracle_kernel", law, horizon_gap)
    if key in model._cache:
        return model._cache[key]
    K, L = model.num_states, model.max_batch
    kern = np.zeros((K, K, L + 1))
    for i in range(K):
        for j in range(K):
            for delta in range(L + 1):
                kern[i, j, delta] = transition_prob(model, law, i, j, delta, horizon_gap)
    kern.setflags(write=False)
    model._cache[key] = kern
    return kern


def initial_state(model: DBmapModel, t: int) -> JointState:
    table = np.zeros((model.num_states, 1))
    table[:, 0] = model.initial_dist
    return JointState(0, t, table)


def joint_update(state: JointState, model: DBmapModel, law: ServiceLaw, kern: np.ndarray | None = None) -> JointState:
    """``p_{j,n}(s+1) = sum_i sum_{m<=n} p_{i,m}(s) * P(i -> j, n - m new survivors)``."""
    if state.s >= state.t:
        raise ValueError(f"already at the horizon (s={state.s}, t={state.t})")
    if kern is None:
        kern = kernel(model, law, state.t - state.s)
    K, L = model.num_states, model.max_batch
    old = state.table
    width = old.shape[1]
    new = np.zeros((K, width + L))
    for i in range(K):
        for j in range(K):
            for delta in range(L + 1):
                w = kern[i, j, delta]
                if w:
                    new[j, delta : delta + width] += w * old[i]
    return JointState(state.s + 1, state.t, new)


def run(model: DBmapModel, law: ServiceLaw, t: int, on_step=None) -> JointState:
    """Propagate from s=0 to s=t; ``on_step(before, after)`` sees every step."""
    K, L = model.num_states, model.max_batch
    size = K * L * t
    if size > MAX_TABLE_SIZE:
        raise ValueError(f"K*L*t = {size} exceeds the oracle limit {MAX_TABLE_SIZE}")
    state = initial_state(model, t)
    while state.s < t:
        nxt = joint_update(state, model, law, kernel(model, law, t - state.s))
        if on_step is not None:
            on_step(state, nxt)
        state = nxt
    return state


def brute_distribution(model: DBmapModel, law: ServiceLaw, t: int) -> np.ndarray:
    """``p_m(t) = sum_i P(I(t) = i, N(t; t) = m)``."""
    return run(model, law, t).table.sum(axis=0)
