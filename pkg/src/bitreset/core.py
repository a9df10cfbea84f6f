"""Equilibrium quantities and reference work for a driven two-level bit.

The bit has logical states "0" and "1" with energies E0 = 0 (held fixed)
and E1 >= 0 (the control knob). The environment is a heat bath at inverse
temperature beta; thermalization is a partial swap at rate mu towards the
instantaneous Gibbs state. Entropic quantities are in nats throughout;
work is in energy units with beta carried explicitly, so for beta = 1 work
is in units of kB*T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BathParams",
    "TwoLevelState",
    "EnergyLevel",
    "UNIFORM",
    "log1pexp",
    "thermal_state",
    "relative_entropy",
    "quasistatic_work",
]


def log1pexp(x: float) -> float:
    """Numerically stable ln(1 + e^x); switches branch at x > 30."""
    if x > 30.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@dataclass(frozen=True)
class BathParams:
    """Fixed environment: inverse temperature beta and swap rate mu."""

    beta: float
    mu: float

    def __post_init__(self) -> None:
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")


@dataclass(frozen=True)
class TwoLevelState:
    """Occupation probabilities of the bit; p0 is derived as 1 - p1."""

    p1: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError(f"p1 must lie in [0, 1], got {self.p1}")

    @property
    def p0(self) -> float:
        return 1.0 - self.p1


@dataclass(frozen=True)
class EnergyLevel:
    """Energy of logical "1" (E0 is pinned at zero)."""

    e1: float

    def __post_init__(self) -> None:
        if not self.e1 >= 0.0:
            raise ValueError(f"e1 must be non-negative, got {self.e1}")

    def partition_function(self, beta: float) -> float:
        return 1.0 + math.exp(-beta * self.e1)


#: Maximally mixed bit state, the initial condition of every reset.
UNIFORM = TwoLevelState(0.5)


def thermal_state(bath: BathParams, level: EnergyLevel) -> TwoLevelState:
    """Gibbs state at the given level: gamma1 = 1/(1 + e^(beta*e1)).

    Evaluated through e^(-beta*e1) so that large gaps saturate cleanly to
    gamma1 = 0 instead of overflowing.
    """
    t = math.exp(-bath.beta * level.e1)
    return TwoLevelState(t / (1.0 + t))


def relative_entropy(p: TwoLevelState, q: TwoLevelState) -> float:
    """Kullback-Leibler divergence D[p||q] in nats, with 0*ln(0) := 0.

    Returns math.inf when p has support where q has none (infinite
    divergence); otherwise the result is non-negative and vanishes only
    for p == q.
    """
    d = 0.0
    for pa, qa in ((p.p0, q.p0), (p.p1, q.p1)):
        if pa == 0.0:
            continue
        if qa == 0.0:
            return math.inf
        d += pa * math.log(pa / qa)
    # Tiny negative round-off near p == q is clamped to keep d >= 0 exact.
    return d if d > 0.0 else 0.0


def quasistatic_work(bath: BathParams, e_max: float) -> float:
    """Work along the infinitely slow drive from E1 = 0 up to e_max.

    Equals (1/beta) * ln[2 / (1 + e^(-beta*e_max))]; increases with e_max
    and approaches ln(2)/beta, the one-bit erasure limit.
    """
    if e_max < 0.0:
        raise ValueError(f"e_max must be non-negative, got {e_max}")
    return (math.log(2.0) - math.log1p(math.exp(-bath.beta * e_max))) / bath.beta
