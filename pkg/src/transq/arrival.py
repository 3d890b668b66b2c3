"""Finite-state discrete-time batch Markovian arrival processes (D-BMAP).

A model is the list of batch matrices ``D_0 .. D_L`` plus an initial
distribution over background states.  ``D_l[i, j]`` is the probability of a
transition ``i -> j`` that brings exactly ``l`` arrivals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Sequence

import numpy as np

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    where: str
    message: str
    defect: float

    def __str__(self) -> str:
        return f"{self.where}: {self.message} (defect {self.defect:.3g})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


@dataclass(frozen=True, eq=False)
class DBmapModel:
    """Batch matrices ``D_0..D_L`` (shape ``(L+1, K, K)``) and initial law ``p0``.

    Construction does not validate; use :func:`validate` or the ``from_*``
    constructors, which reject malformed input.
    """

    batch_matrices: np.ndarray
    initial_dist: np.ndarray
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        d = np.array(self.batch_matrices, dtype=float)
        p0 = np.array(self.initial_dist, dtype=float).reshape(-1)
        if d.ndim != 3 or d.shape[1] != d.shape[2] or d.shape[0] == 0:
            raise ValueError(f"batch matrices must have shape (L+1, K, K), got {d.shape}")
        if p0.shape != (d.shape[1],):
            raise ValueError(f"initial distribution has length {p0.size}, expected {d.shape[1]}")
        d.setflags(write=False)
        p0.setflags(write=False)
        object.__setattr__(self, "batch_matrices", d)
        object.__setattr__(self, "initial_dist", p0)

    @property
    def num_states(self) -> int:
        return self.batch_matrices.shape[1]

    @property
    def max_batch(self) -> int:
        """L, the largest batch size with a stored matrix."""
        return self.batch_matrices.shape[0] - 1

    @property
    def transition_matrix(self) -> np.ndarray:
        """P = D(1), the background chain's transition matrix."""
        if "P" not in self._cache:
            P = self.batch_matrices.sum(axis=0)
            P.setflags(write=False)
            self._cache["P"] = P
        return self._cache["P"]

    def batch_pgf_coeffs(self, i: int, j: int) -> np.ndarray:
        """Coefficients of ``D_ij(z)`` in increasing powers of z."""
        return self.batch_matrices[:, i, j]

    def __eq__(self, other):
        if not isinstance(other, DBmapModel):
            return NotImplemented
        return (
            self.batch_matrices.shape == other.batch_matrices.shape
            and np.array_equal(self.batch_matrices, other.batch_matrices)
            and np.array_equal(self.initial_dist, other.initial_dist)
        )

    __hash__ = None


def validate(model: DBmapModel, tol: float = STOCHASTIC_TOL) -> ValidationReport:
    """Check entry ranges, stochasticity of ``sum_l D_l`` and of ``p0``."""
    out = []
    d = model.batch_matrices
    for l, mat in enumerate(d):
        if not np.all(np.isfinite(mat)):
            out.append(Violation(f"D_{l}", "non-finite entry", float("nan")))
            continue
        lo, hi = mat.min(), mat.max()
        if lo < 0:
            i, j = np.unravel_index(mat.argmin(), mat.shape)
            out.append(Violation(f"D_{l}[{i},{j}]", f"negative entry {lo:g}", float(-lo)))
        if hi > 1:
            i, j = np.unravel_index(mat.argmax(), mat.shape)
            out.append(Violation(f"D_{l}[{i},{j}]", f"entry {hi:g} > 1", float(hi - 1)))
    rows = d.sum(axis=(0, 2))
    for i, r in enumerate(rows):
        if not abs(r - 1.0) <= tol:
            out.append(Violation(f"row {i} of sum(D_l)", f"row sum {r:.17g} != 1", float(abs(r - 1.0))))
    p0 = model.initial_dist
    if np.any(p0 < 0) or not np.all(np.isfinite(p0)):
        out.append(Violation("initial", "negative or non-finite probability", float(-p0.min())))
    s = p0.sum()
    if not abs(s - 1.0) <= tol:
        out.append(Violation("initial", f"sum {s:.17g} != 1", float(abs(s - 1.0))))
    return ValidationReport(tuple(out))


def _checked(model: DBmapModel) -> DBmapModel:
    report = validate(model)
    if not report:
        raise ValueError(f"invalid D-BMAP:\n{report}")
    return model


def from_matrices(matrices: Sequence, initial=None) -> DBmapModel:
    """Build a validated model from ``[D_0, ..., D_L]``.

    ``initial`` defaults to starting in background state 0.
    """
    d = np.asarray(matrices, dtype=float)
    if d.ndim == 2:
        d = d[None]
    if d.ndim != 3:
        raise ValueError(f"expected a list of K x K matrices, got array of shape {d.shape}")
    k = d.shape[1]
    if initial is None:
        initial = np.eye(k)[0]
    return _checked(DBmapModel(d, np.asarray(initial, dtype=float)))


def from_bernoulli(p: float) -> DBmapModel:
    """Single-state process: one arrival per slot with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"arrival probability must lie in [0, 1], got {p}")
    return from_matrices([[[1.0 - p]], [[p]]], [1.0])


def from_mmbp(d0, d1, initial=None) -> DBmapModel:
    """Markov-modulated Bernoulli process: batches of size 0 or 1 only."""
    d0 = np.atleast_2d(np.asarray(d0, dtype=float))
    d1 = np.atleast_2d(np.asarray(d1, dtype=float))
    if d0.shape != d1.shape:
        raise ValueError(f"D_0 and D_1 shapes differ: {d0.shape} vs {d1.shape}")
    return from_matrices([d0, d1], initial)


def from_modulated_binomial(P, trials: Sequence[int], probs: Sequence[float], initial=None) -> DBmapModel:
    """Background chain ``P`` where leaving state i brings a Binomial(trials[i], probs[i]) batch.

    ``D_ij(z) = P_ij (1 - q_i + q_i z)^{n_i}``.
    """
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    if len(trials) != k or len(probs) != k:
        raise ValueError("need one (trials, prob) pair per background state")
    L = max(trials)
    d = np.zeros((L + 1, k, k))
    for i, (n, q) in enumerate(zip(trials, probs)):
        pmf = np.array([comb(n, l) * q**l * (1 - q) ** (n - l) for l in range(n + 1)])
        d[: n + 1, i, :] = pmf[:, None] * P[i][None, :]
    return from_matrices(d, initial)


def eval_pgf_matrix(model: DBmapModel, x: float) -> np.ndarray:
    """``D(x) = sum_l D_l x^l`` for x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"D(x) is only evaluated on [0, 1], got x={x}")
    powers = x ** np.arange(model.max_batch + 1)
    return np.tensordot(powers, model.batch_matrices, axes=1)


def derivative_matrix_at_one(model: DBmapModel, k: int) -> np.ndarray:
    """k-th derivative of D(z) at z=1: the factorial-moment matrix of batch sizes."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    key = ("dk", k)
    if key not in model._cache:
        L = model.max_batch
        # falling factorial l (l-1) ... (l-k+1); zero for l < k
        weights = np.array([factorial(l) // factorial(l - k) if l >= k else 0 for l in range(L + 1)], dtype=float)
        m = np.tensordot(weights, model.batch_matrices, axes=1)
        m.setflags(write=False)
        model._cache[key] = m
    return model._cache[key]


def random_model(rng: np.random.Generator, num_states: int, max_batch: int) -> DBmapModel:
    """Random valid model: each row of ``[D_0 .. D_L]`` is a Dirichlet draw over (j, l)."""
    k, L = num_states, max_batch
    rows = rng.dirichlet(np.ones(k * (L + 1)), size=k).reshape(k, L + 1, k)
    d = np.transpose(rows, (1, 0, 2)).copy()
    # push the rounding residue into the largest entry so rows sum to 1
    for i in range(k):
        resid = 1.0 - d[:, i, :].sum()
        idx = np.unravel_index(d[:, i, :].argmax(), (L + 1, k))
        d[idx[0], i, idx[1]] += resid
    p0 = rng.dirichlet(np.ones(k))
    p0[p0.argmax()] += 1.0 - p0.sum()
    return from_matrices(d, p0)
