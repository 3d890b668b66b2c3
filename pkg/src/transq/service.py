"""Service-time laws on {1, 2, ...}.

Every law exposes the survival function ``survival(t) = P(Y > t)`` and
samplers driven by a caller-owned :class:`numpy.random.Generator`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

PMF_TOL = 1e-12
# tail terms below this are dropped when summing or tabulating the Poisson tail
_TAIL_EPS = 1e-17


class ServiceLaw:
    """Base class; subclasses are frozen dataclasses."""

    kind: str = ""

    def survival(self, t: int) -> float:
        raise NotImplementedError

    def pmf(self, k: int) -> float:
        """P(Y = k)."""
        if k < 1:
            return 0.0
        return self.survival(k - 1) - self.survival(k)

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.sample_many(rng, 1)[0])

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Geometric(ServiceLaw):
    """P(Y = k) = (1 - alpha) alpha^(k-1): each slot the customer stays with probability alpha."""

    alpha: float
    kind = "geometric"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"geometric alpha must lie in (0, 1), got {self.alpha}")

    def survival(self, t: int) -> float:
        if t < 0:
            raise ValueError("t must be nonnegative")
        return self.alpha**t

    def sample_many(self, rng, n):
        u = 1.0 - rng.random(n)  # (0, 1]
        return 1 + np.floor(np.log(u) / math.log(self.alpha)).astype(np.int64)

    def mean(self):
        return 1.0 / (1.0 - self.alpha)

    def to_dict(self):
        return {"type": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class ShiftedPoisson(ServiceLaw):
    """Y = 1 + Z with Z ~ Poisson(lam)."""

    lam: float
    kind = "shifted_poisson"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"Poisson rate must be positive, got {self.lam}")

    def _term(self, i: int) -> float:
        return math.exp(i * math.log(self.lam) - self.lam - math.lgamma(i + 1))

    def survival(self, t: int) -> float:
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            return 1.0
        # P(Z >= t).  Below the mode the head is small, so 1 - head is safe;
        # past it the tail terms decrease monotonically and are summed directly.
        if t <= self.lam:
            term = math.exp(-self.lam)
            head = 0.0
            for i in range(t):
                head += term
                term *= self.lam / (i + 1)
            return max(0.0, 1.0 - head)
        term = self._term(t)
        total = 0.0
        i = t
        while term > 0.0 and term >= _TAIL_EPS * max(total, 1e-300):
            total += term
            i += 1
            term *= self.lam / i
        return total

    def pmf(self, k):
        return self._term(k - 1) if k >= 1 else 0.0

    @cached_property
    def _cdf_table(self) -> np.ndarray:
        # cdf[k] = P(Y <= k + 1); extended until the remaining tail is negligible
        cdf = []
        k = 0
        while True:
            tail = self.survival(k + 1)
            cdf.append(1.0 - tail)
            if tail < _TAIL_EPS:
                break
            k += 1
        return np.array(cdf)

    def sample_many(self, rng, n):
        u = rng.random(n)
        return 1 + np.searchsorted(self._cdf_table, u, side="right").astype(np.int64)

    def mean(self):
        return 1.0 + self.lam

    def to_dict(self):
        return {"type": self.kind, "lambda": self.lam}


@dataclass(frozen=True)
class Deterministic(ServiceLaw):
    d: int
    kind = "deterministic"

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"deterministic service time must be an integer >= 1, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

    def survival(self, t):
        if t < 0:
            raise ValueError("t must be nonnegative")
        return 1.0 if t < self.d else 0.0

    def sample_many(self, rng, n):
        return np.full(n, self.d, dtype=np.int64)

    def mean(self):
        return float(self.d)

    def to_dict(self):
        return {"type": self.kind, "d": self.d}


@dataclass(frozen=True)
class ExplicitPmf(ServiceLaw):
    """Finite pmf: ``q[k-1] = P(Y = k)`` for k = 1..M."""

    q: tuple
    kind = "pmf"

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        if not q:
            raise ValueError("pmf must have at least one entry")
        if min(q) < 0:
            raise ValueError("pmf entries must be nonnegative")
        s = math.fsum(q)
        if abs(s - 1.0) > PMF_TOL:
            raise ValueError(f"pmf sums to {s!r}, not 1")
        object.__setattr__(self, "q", q)

    @cached_property
    def _tail(self) -> tuple:
        # _tail[t] = sum_{k > t} q_k, summed from the far end to keep small tails exact
        tails = [0.0] * (len(self.q) + 1)
        acc = 0.0
        for t in range(len(self.q) - 1, -1, -1):
            acc += self.q[t]
            tails[t] = acc
        tails[0] = 1.0
        return tuple(tails)

    def survival(self, t):
        if t < 0:
            raise ValueError("t must be nonnegative")
        return self._tail[t] if t < len(self.q) else 0.0

    def pmf(self, k):
        return self.q[k - 1] if 1 <= k <= len(self.q) else 0.0

    def sample_many(self, rng, n):
        cdf = np.cumsum(self.q)
        cdf[-1] = np.inf
        return 1 + np.searchsorted(cdf, rng.random(n), side="right").astype(np.int64)

    def mean(self):
        return math.fsum(k * qk for k, qk in enumerate(self.q, start=1))

    def to_dict(self):
        return {"type": self.kind, "q": list(self.q)}


def truncate(law: ServiceLaw, tail_mass: float = 1e-13) -> ExplicitPmf:
    """Finite pmf agreeing with ``law`` up to the first t where P(Y > t) < tail_mass.

    The remaining tail is lumped onto the last support point so the result
    is an exact probability vector.
    """
    q = []
    t = 0
    while law.survival(t) >= tail_mass:
        t += 1
        q.append(law.pmf(t))
    q[-1] += max(0.0, 1.0 - math.fsum(q))
    return ExplicitPmf(tuple(q))


def from_dict(spec: dict) -> ServiceLaw:
    kind = spec.get("type")
    if kind == "geometric":
        return Geometric(float(spec["alpha"]))
    if kind == "shifted_poisson":
        return ShiftedPoisson(float(spec["lambda"]))
    if kind == "deterministic":
        return Deterministic(spec["d"])
    if kind == "pmf":
        return ExplicitPmf(tuple(spec["q"]))
    raise ValueError(f"unknown service type {kind!r}")
