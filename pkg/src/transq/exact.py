"""Exact transient analysis of the discrete-time D-BMAP/G/inf queue.

Conventions: the horizon ``t`` has slot transitions ``k = 0..t-1``; the batch
brought by transition ``k`` arrives at time ``k`` and one of its customers is
still present at time ``t`` iff its service time exceeds ``t - k``.  With
``phi = survival(t - k)`` every arriving customer is thinned independently,
so the count PGF after transition ``k`` picks up the factor
``T(z, k; t) = D(phi z + 1 - phi)`` and

    g(z, t) = p0 T(z, 0; t) T(z, 1; t) ... T(z, t-1; t).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import factorial, prod
from typing import Iterator

import numpy as np

from .arrival import DBmapModel, derivative_matrix_at_one
from .poly import PgfVector, Poly, add, affine_compose, derivative, eval_at, mul
from .service import ServiceLaw

LEIBNIZ_MAX_ORDER = 4


class StationaryNotConverged(RuntimeError):
    def __init__(self, last_tv: float, t_max: int):
        super().__init__(f"no convergence within t_max={t_max}; last TV distance {last_tv:.3g}")
        self.last_tv = last_tv
        self.t_max = t_max


@dataclass
class TransientResult:
    time: int
    distribution: np.ndarray
    mean: float
    variance: float
    fano: float | None
    factorial_moments: np.ndarray
    normalization_defect: float
    truncation_loss: float
    state_masses: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "mean": self.mean,
            "variance": self.variance,
            "fano": self.fano,
            "factorial_moments": [float(x) for x in self.factorial_moments],
            "distribution": [float(x) for x in self.distribution],
            "normalization_defect": self.normalization_defect,
            "truncation_loss": self.truncation_loss,
        }


def _slot_matrix(model: DBmapModel, phi: float) -> list[list[Poly]]:
    k = model.num_states
    return [
        [affine_compose(Poly(model.batch_pgf_coeffs(i, j)), phi, 1.0 - phi) for j in range(k)]
        for i in range(k)
    ]


def build_slot_matrix(model: DBmapModel, law: ServiceLaw, k: int, t: int) -> list[list[Poly]]:
    """``T(z, k; t)``: entry (i, j) is ``D_ij(phi z + 1 - phi)`` with ``phi = survival(t - k)``."""
    if not 0 <= k <= t - 1:
        raise ValueError(f"slot index k={k} outside 0..{t - 1}")
    return _slot_matrix(model, law.survival(t - k))


def _row_times_matrix(g: list[Poly], T: list[list[Poly]], max_degree) -> list[Poly]:
    k = len(g)
    out = []
    for j in range(k):
        acc = mul(g[0], T[0][j], max_degree)
        for i in range(1, k):
            acc = add(acc, mul(g[i], T[i][j], max_degree))
        out.append(acc)
    return out


def transient_pgf(model: DBmapModel, law: ServiceLaw, t: int, max_degree: int | None = None) -> PgfVector:
    """State-resolved PGF ``g(z, t)`` of the customer count at time t.

    The row vector ``p0`` is pushed through ``T(z, 0; t), ..., T(z, t-1; t)``
    in that order.  ``max_degree=None`` keeps every coefficient (degree L t);
    a cap moves the discarded mass into ``truncation_loss``.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    g = [Poly.constant(x) for x in model.initial_dist]
    for k in range(t):
        g = _row_times_matrix(g, build_slot_matrix(model, law, k, t), max_degree)
    return PgfVector(g)


def transient_series(
    model: DBmapModel, law: ServiceLaw, t_max: int, max_degree: int | None = None
) -> Iterator[tuple[int, PgfVector]]:
    """Yield ``(t, g(z, t))`` for t = 0..t_max in O(t_max) slot products.

    Going from t to t+1 prepends the factor built from ``survival(t+1)``, so
    the matrix ``H_t = T(phi(t)) ... T(phi(1))`` is carried and
    ``g(z, t) = p0 H_t``.
    """
    k = model.num_states
    H = [[Poly.constant(1.0 if i == j else 0.0) for j in range(k)] for i in range(k)]
    p0 = [Poly.constant(x) for x in model.initial_dist]
    yield 0, PgfVector(p0)
    for t in range(1, t_max + 1):
        T = _slot_matrix(model, law.survival(t))
        H = [_row_times_matrix(T[i], H, max_degree) for i in range(k)]
        yield t, PgfVector(_row_times_matrix(p0, H, max_degree))


def distribution(g: PgfVector, up_to_m: int | None = None) -> np.ndarray:
    """``p_m(t)`` for m = 0..up_to_m (default: the full retained support)."""
    c = g.total().coeffs
    if up_to_m is None:
        return c.copy()
    out = np.zeros(up_to_m + 1)
    n = min(c.size, up_to_m + 1)
    out[:n] = c[:n]
    return out


def factorial_moments_from_pgf(g: PgfVector, k_max: int) -> np.ndarray:
    """``[mu_1, ..., mu_k_max]`` with ``mu_k = G^(k)(1)``."""
    G = g.total()
    return np.array([eval_at(derivative(G, k), 1.0) for k in range(1, k_max + 1)])


def _powers(P: np.ndarray, n: int) -> list[np.ndarray]:
    out = [np.eye(P.shape[0])]
    for _ in range(n):
        out.append(out[-1] @ P)
    return out


def closed_derivative_vectors(model: DBmapModel, law: ServiceLaw, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Row vectors ``g'(1, t)`` and ``g''(1, t)`` from the explicit matrix sums.

    The pair sum ``sum_{i<j} phi_i phi_j P^i D' P^(j-i-1) D' P^(t-1-j)`` is
    accumulated with the running prefix ``u_j = sum_{i<j} phi_i p0 P^i D' P^(j-1-i)``.
    """
    P = model.transition_matrix
    D1 = derivative_matrix_at_one(model, 1)
    D2 = derivative_matrix_at_one(model, 2)
    Pw = _powers(P, max(t, 0))
    k = model.num_states
    g1 = np.zeros(k)
    g2 = np.zeros(k)
    if t <= 0:
        return g1, g2
    phi = np.array([law.survival(t - i) for i in range(t)])
    left = model.initial_dist.copy()  # p0 P^i
    u = np.zeros(k)
    cross = np.zeros(k)
    for i in range(t):
        tail = Pw[t - 1 - i]
        a1 = left @ D1
        g1 += phi[i] * (a1 @ tail)
        g2 += phi[i] ** 2 * ((left @ D2) @ tail)
        cross += phi[i] * ((u @ D1) @ tail)
        u = u @ P + phi[i] * a1
        left = left @ P
    g2 += 2.0 * cross
    return g1, g2


def mean_variance_closed(model: DBmapModel, law: ServiceLaw, t: int) -> tuple[float, float]:
    """Mean and variance of N(t) without forming any generating function."""
    g1, g2 = closed_derivative_vectors(model, law, t)
    m = float(g1.sum())
    return m, float(g2.sum()) + m - m * m


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    for cuts in combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def factorial_moment_leibniz(model: DBmapModel, law: ServiceLaw, t: int, m: int) -> tuple[float, np.ndarray]:
    """``mu_m(t)`` and ``g^(m)(1, t)`` from the multinomial expansion of the product.

    Every composition ``l_0 + ... + l_{t-1} = m`` contributes
    ``m! / prod(l_i!) * prod_i phi_i^{l_i} D^{(l_i)}(1)`` in index order.  Only
    the nonzero ``l_i`` are enumerated; runs of zeros are powers of P.
    """
    if m < 0 or m > LEIBNIZ_MAX_ORDER:
        raise ValueError(f"factorial moment order must be in 0..{LEIBNIZ_MAX_ORDER}, got {m}")
    P = model.transition_matrix
    Pw = _powers(P, max(t, 0))
    p0 = model.initial_dist
    if m == 0:
        vec = p0 @ Pw[t]
        return float(vec.sum()), vec
    vec = np.zeros(model.num_states)
    if t <= 0:
        return 0.0, vec
    phi = [law.survival(t - i) for i in range(t)]
    dmat = [derivative_matrix_at_one(model, l) for l in range(m + 1)]
    for r in range(1, min(m, t) + 1):
        for parts in _compositions(m, r):
            weight = factorial(m) / prod(factorial(l) for l in parts)
            for pos in combinations(range(t), r):
                row = p0
                prev = -1
                coef = weight
                for i, l in zip(pos, parts):
                    coef *= phi[i] ** l
                    row = (row @ Pw[i - prev - 1]) @ dmat[l]
                    prev = i
                if coef == 0.0:
                    continue
                vec = vec + coef * (row @ Pw[t - 1 - prev])
    return float(vec.sum()), vec


def solve(
    model: DBmapModel,
    law: ServiceLaw,
    t: int,
    moments: int = 2,
    max_degree: int | None = None,
) -> TransientResult:
    g = transient_pgf(model, law, t, max_degree)
    return _result(t, g, moments)


def _result(t: int, g: PgfVector, moments: int) -> TransientResult:
    dist = distribution(g)
    mu = factorial_moments_from_pgf(g, max(moments, 2))
    mean = float(mu[0])
    var = float(mu[1] + mu[0] - mu[0] ** 2)
    loss = g.truncation_loss
    return TransientResult(
        time=t,
        distribution=dist,
        mean=mean,
        variance=var,
        fano=var / mean if mean > 0 else None,
        factorial_moments=mu[:moments],
        normalization_defect=float(dist.sum() + loss - 1.0),
        truncation_loss=loss,
        state_masses=g.state_masses(),
    )


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    n = max(p.size, q.size)
    a = np.zeros(n)
    b = np.zeros(n)
    a[: p.size] = p
    b[: q.size] = q
    return 0.5 * float(np.abs(a - b).sum())


def stationary_distribution(
    model: DBmapModel,
    law: ServiceLaw,
    tol: float = 1e-10,
    t_max: int = 10000,
    max_degree: int | None = None,
) -> tuple[np.ndarray, int]:
    """Run t = 1, 2, ... until consecutive distributions are within ``tol`` in TV.

    Raises :class:`StationaryNotConverged` if ``t_max`` is reached first.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    prev = None
    tv = float("inf")
    for t, g in transient_series(model, law, t_max, max_degree):
        dist = distribution(g)
        if prev is not None:
            tv = total_variation(dist, prev)
            if tv < tol:
                return dist, t
        prev = dist
    raise StationaryNotConverged(tv, t_max)


# -- geometric arrivals and geometric service -------------------------------


def mminf_closed_form(p: float, alpha: float, t: int) -> Poly:
    """``prod_{i=1..t} (1 + p alpha^i (z - 1))``: independent Bernoulli(p alpha^i) cohorts."""
    out = Poly.constant(1.0)
    for i in range(1, t + 1):
        q = p * alpha**i
        out = mul(out, Poly([1.0 - q, q]))
    return out


def mminf_moments(p: float, alpha: float, t: int) -> tuple[float, float, float | None]:
    m = p * alpha * (1 - alpha**t) / (1 - alpha)
    var = m - p**2 * alpha**2 * (1 - alpha ** (2 * t)) / (1 - alpha**2)
    return m, var, (var / m if m > 0 else None)


def mminf_recursion(p: float, alpha: float, t: int, thinned_arrivals: bool = False) -> Poly:
    """Iterate ``G(z, tau) = G(1 - alpha + alpha z, tau - 1) * A(z)`` from ``G(z, 0) = 1``.

    ``A(z) = 1 - p + p z`` counts the fresh arrival untouched, which gives
    ``prod_{i=0..t-1} (1 + p alpha^i (z - 1))``.  With ``thinned_arrivals``
    the fresh arrival must already survive one slot, ``A(z) = 1 + p alpha (z - 1)``,
    and the result coincides with :func:`mminf_closed_form`.
    """
    q = p * alpha if thinned_arrivals else p
    arrive = Poly([1.0 - q, q])
    G = Poly.constant(1.0)
    for _ in range(t):
        G = mul(affine_compose(G, alpha, 1.0 - alpha), arrive)
    return G

