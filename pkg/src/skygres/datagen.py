"""Seedable synthetic datasets in [0, 1)^d: uniform (UNI) and anticorrelated (ANT).

All randomness comes from numpy's PCG64 bit generator seeded with
``GenSpec.seed``, so a spec always yields the same bytes.

ANT recipe, per tuple:

1. draw a per-coordinate level ``c ~ Normal(0.5, 0.01)``, redrawn until it
   lies in [0, 1); the tuple starts at ``(c, ..., c)``, i.e. on the plane
   ``sum(t) = c * d``;
2. ``d`` times, pick two distinct coordinates ``i, j`` and move a uniform
   amount ``h`` from ``j`` to ``i``, with ``h`` drawn from the widest interval
   that keeps both coordinates in [0, 1]; the sum is preserved;
3. clamp to [0, 1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import ContractViolation, Relation

ANT_CENTER = 0.5
ANT_SPREAD = 0.01
_BELOW_ONE = np.nextafter(1.0, 0.0)


class Distribution(str, enum.Enum):
    UNI = "uni"
    ANT = "ant"


@dataclass(frozen=True)
class GenSpec:
    n: int
    d: int
    distribution: Distribution = Distribution.UNI
    seed: int = 0

    def __post_init__(self):
        if self.n < 0 or self.d < 1:
            raise ContractViolation("need n >= 0 and d >= 1")
        object.__setattr__(self, "distribution", Distribution(self.distribution))

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(self.n, self.d, self.distribution, seed)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_uniform(spec: GenSpec) -> Relation:
    if spec.distribution is not Distribution.UNI:
        raise ContractViolation("gen_uniform needs a UNI spec")
    values = _rng(spec.seed).random((spec.n, spec.d))
    return Relation(values, d=spec.d)


def gen_anticorrelated(spec: GenSpec) -> Relation:
    if spec.distribution is not Distribution.ANT:
        raise ContractViolation("gen_anticorrelated needs an ANT spec")
    rng = _rng(spec.seed)
    n, d = spec.n, spec.d
    level = rng.normal(ANT_CENTER, ANT_SPREAD, n)
    bad = (level < 0) | (level >= 1)
    while bad.any():
        level[bad] = rng.normal(ANT_CENTER, ANT_SPREAD, int(bad.sum()))
        bad = (level < 0) | (level >= 1)
    x = np.repeat(level[:, None], d, axis=1)
    if d > 1:
        rows = np.arange(n)
        for _ in range(d):
            i = rng.integers(0, d, n)
            j = (i + rng.integers(1, d, n)) % d
            xi, xj = x[rows, i], x[rows, j]
            lo = np.maximum(-xi, xj - 1.0)
            hi = np.minimum(1.0 - xi, xj)
            h = lo + (hi - lo) * rng.random(n)
            x[rows, i] = xi + h
            x[rows, j] = xj - h
    np.clip(x, 0.0, _BELOW_ONE, out=x)
    return Relation(x, d=d)


def generate(spec: GenSpec) -> Relation:
    if spec.distribution is Distribution.ANT:
        return gen_anticorrelated(spec)
    return gen_uniform(spec)


__all__ = ["Distribution", "GenSpec", "gen_anticorrelated", "gen_uniform", "generate"]
