"""Truncated power series in the generating-function variable z.

``Poly`` carries its coefficients ``c_0..c_N`` together with
``truncation_loss``: the mass (value at z=1) dropped by any truncation that
produced it.  No operation renormalises.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np

COMPOSE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Poly:
    coeffs: np.ndarray
    truncation_loss: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size == 0:
            c = np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "truncation_loss", float(self.truncation_loss))

    @classmethod
    def constant(cls, c: float) -> "Poly":
        return cls(np.array([c], dtype=float))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, Poly):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __call__(self, x: float) -> float:
        return eval_at(self, x)

    def __repr__(self):
        loss = f", truncation_loss={self.truncation_loss:g}" if self.truncation_loss else ""
        return f"Poly({self.coeffs.tolist()}{loss})"


def add(a: Poly, b: Poly) -> Poly:
    n = max(a.coeffs.size, b.coeffs.size)
    c = np.zeros(n)
    c[: a.coeffs.size] += a.coeffs
    c[: b.coeffs.size] += b.coeffs
    return Poly(c, a.truncation_loss + b.truncation_loss)


def scale(a: Poly, c: float) -> Poly:
    return Poly(a.coeffs * c, a.truncation_loss * c)


def mul(a: Poly, b: Poly, max_degree: int | None = None) -> Poly:
    """Cauchy product, truncated above ``max_degree``.

    Mass already lost by either factor is carried through (scaled by the
    other factor's total), and coefficients cut here are added to it.
    """
    c = np.convolve(a.coeffs, b.coeffs)
    va, vb = a.coeffs.sum(), b.coeffs.sum()
    la, lb = a.truncation_loss, b.truncation_loss
    loss = la * vb + va * lb + la * lb
    if max_degree is not None and c.size > max_degree + 1:
        loss += c[max_degree + 1 :].sum()
        c = c[: max_degree + 1]
    return Poly(c, loss)


def eval_at(p: Poly, x: float) -> float:
    """Horner evaluation of the retained coefficients."""
    acc = 0.0
    for ck in p.coeffs[::-1]:
        acc = acc * x + ck
    return float(acc)


def coefficient(p: Poly, m: int) -> float:
    if m < 0:
        raise ValueError("coefficient index must be nonnegative")
    return float(p.coeffs[m]) if m < p.coeffs.size else 0.0


def derivative(p: Poly, k: int = 1) -> Poly:
    """k-th formal derivative (truncation loss is not differentiable and is dropped)."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    c = p.coeffs
    if k == 0:
        return Poly(c)
    if k > p.degree:
        return Poly.constant(0.0)
    m = np.arange(k, c.size)
    ff = np.ones(m.size)
    for j in range(k):
        ff *= m - j
    return Poly(c[k:] * ff)


def affine_compose(p: Poly, a: float, b: float) -> Poly:
    """Return ``p(a z + b)`` for ``a, b >= 0`` with ``a + b <= 1``.

    Rebuilt by Horner's rule in the substituted variable; degree is kept.
    """
    if a < 0 or b < 0 or a + b > 1 + COMPOSE_TOL:
        raise ValueError(f"substitution z -> {a} z + {b} leaves the unit interval")
    c = p.coeffs
    n = c.size
    out = np.zeros(n)
    out[0] = c[-1]
    deg = 0
    for ck in c[-2::-1]:
        # out <- out * (a z + b) + ck
        out[1 : deg + 2] = b * out[1 : deg + 2] + a * out[: deg + 1]
        out[0] = b * out[0] + ck
        deg += 1
    return Poly(out, p.truncation_loss)


def product(factors: Sequence[Poly], max_degree: int | None = None) -> Poly:
    out = Poly.constant(1.0)
    for f in factors:
        out = mul(out, f, max_degree)
    return out


def taylor_coefficient(p: Poly, m: int) -> float:
    """``p^(m)(0) / m!``, the derivative route to a coefficient."""
    return eval_at(derivative(p, m), 0.0) / factorial(m)


@dataclass(frozen=True)
class PgfVector:
    """One series per background state; their sum is the customer-count PGF."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, j):
        return self.entries[j]

    def total(self) -> Poly:
        out = Poly.constant(0.0)
        for e in self.entries:
            out = add(out, e)
        return out

    @property
    def truncation_loss(self) -> float:
        return sum(e.truncation_loss for e in self.entries)

    def state_masses(self) -> np.ndarray:
        """P(I(t) = j) restricted to the retained coefficients."""
        return np.array([e.coeffs.sum() for e in self.entries])
