"""Time evolution of the bit under partial-swap thermalization.

The occupation of level "1" obeys

    dP1/dt = mu * (gamma1(t) - P1(t)),

where gamma1(t) is the Gibbs occupation at the instantaneous energy gap
E1(t). Energy schedules are piecewise linear in time with instantaneous
upward jumps allowed at segment boundaries; jumps leave the populations
untouched and only move the Gibbs state.

Three solution routes are provided: the exact one-interval map for a
constant gap (`swap_step`), the integral solution for a general schedule
(`swap_integral`, quadrature on ramps), and the closed form for the
linear-ramp-with-initial-jump schedule (`linear_drive_p1`). A fixed-step
4th-order integrator (`ode_oracle`) serves as an independent cross-check
and is used only for verification.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import BathParams, EnergyLevel, TwoLevelState, log1pexp, thermal_state

__all__ = [
    "Segment",
    "Schedule",
    "Trajectory",
    "QuadratureConvergenceError",
    "StepSizeError",
    "swap_step",
    "swap_integral",
    "linear_drive_p1",
    "ode_oracle",
]


class QuadratureConvergenceError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class StepSizeError(RuntimeError):
    """Integrator step too large for the requested accuracy."""


@dataclass(frozen=True)
class Segment:
    """Linear piece of an energy schedule: E1 goes e0 -> e1 over [t0, t1]."""

    t0: float
    t1: float
    e0: float
    e1: float

    def __post_init__(self) -> None:
        if self.t1 < self.t0:
            raise ValueError(f"segment times out of order: {self}")
        if self.e1 < self.e0:
            raise ValueError(f"segment energy must be non-decreasing: {self}")
        if self.e0 < 0.0:
            raise ValueError(f"segment energy must be non-negative: {self}")

    @property
    def duration(self) -> float:
        return self.t1 - self.t0

    @property
    def is_constant(self) -> bool:
        return self.e1 == self.e0

    def level(self, t: float) -> float:
        if self.is_constant or self.t1 == self.t0:
            return self.e0
        s = (t - self.t0) / (self.t1 - self.t0)
        return self.e0 + s * (self.e1 - self.e0)


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear energy schedule E1(t) on [0, tau].

    Segments tile [0, tau]; a discontinuity between consecutive segments
    (or a first segment starting above zero) is an instantaneous upward
    jump. E1 just before t = 0 is always 0, so `initial_level` is the gap
    seen by the bath immediately after the protocol starts.
    """

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        if self.segments[0].t0 != 0.0:
            raise ValueError("schedule must start at t = 0")
        prev = self.segments[0]
        for seg in self.segments[1:]:
            if seg.t0 != prev.t1:
                raise ValueError("segments must tile [0, tau] without gaps")
            if seg.e0 < prev.e1:
                raise ValueError("jumps must not decrease the energy")
            prev = seg

    @property
    def duration(self) -> float:
        return self.segments[-1].t1

    @property
    def initial_level(self) -> float:
        """E1 at t = 0+ (after any opening jump)."""
        return self.segments[0].e0

    @property
    def final_level(self) -> float:
        return self.segments[-1].e1

    def level(self, t: float) -> float:
        """E1 at time t, right-continuous at jumps; E1(tau) is the final gap."""
        if not 0.0 <= t <= self.duration:
            raise ValueError(f"t={t} outside [0, {self.duration}]")
        starts = [seg.t0 for seg in self.segments]
        i = bisect_right(starts, t) - 1
        seg = self.segments[i]
        if t == seg.t1 and i + 1 < len(self.segments):
            return self.segments[i + 1].e0
        return seg.level(t)

    @classmethod
    def stepwise(cls, levels: "list[float] | tuple[float, ...]", tau: float) -> "Schedule":
        """Equal-duration constant steps, jumping to levels[k] at k*tau/N."""
        n = len(levels)
        if n == 0:
            raise ValueError("need at least one level")
        segs = []
        for k, e in enumerate(levels):
            t0 = tau * k / n
            t1 = tau * (k + 1) / n
            segs.append(Segment(t0, t1, float(e), float(e)))
        return cls(tuple(segs))

    @classmethod
    def linear(cls, e_start: float, e_end: float, tau: float) -> "Schedule":
        """Jump to e_start at t = 0, then ramp linearly to e_end at tau."""
        return cls((Segment(0.0, tau, e_start, e_end),))

    @classmethod
    def constant(cls, level: float, tau: float) -> "Schedule":
        return cls((Segment(0.0, tau, level, level),))


@dataclass(frozen=True)
class Trajectory:
    """Dense time series of the level-1 occupation."""

    times: np.ndarray
    p1: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> TwoLevelState:
        return TwoLevelState(float(self.p1[-1]))


def swap_step(
    p_prev: TwoLevelState, gamma: TwoLevelState, bath: BathParams, dt: float
) -> TwoLevelState:
    """Exact partial-swap map over duration dt at a constant Gibbs state.

    p1 -> e^(-mu*dt) * p1 + (1 - e^(-mu*dt)) * gamma1, a convex mix, so the
    result always lies between the previous occupation and gamma1.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    q = math.exp(-bath.mu * dt)
    return TwoLevelState(q * p_prev.p1 + (1.0 - q) * gamma.p1)


def _gamma1(beta: float, e: float) -> float:
    t = math.exp(-beta * e)
    return t / (1.0 + t)


def _segment_end_p1(p1: float, seg: Segment, bath: BathParams, t_end: float) -> float:
    """Propagate p1 from seg.t0 to t_end (inside seg) via the integral solution.

    Constant pieces use the exact map. Ramps evaluate
    mu * int e^(-mu*(t_end - s)) * gamma1(s) ds by adaptive quadrature
    (abs tol 1e-10, at most 60 bisections per segment).
    """
    dt = t_end - seg.t0
    if dt == 0.0:
        return p1
    q = math.exp(-bath.mu * dt)
    if seg.is_constant:
        return q * p1 + (1.0 - q) * _gamma1(bath.beta, seg.e0)
    slope = (seg.e1 - seg.e0) / (seg.t1 - seg.t0)

    def integrand(s: float) -> float:
        e = seg.e0 + slope * (s - seg.t0)
        return math.exp(-bath.mu * (t_end - s)) * _gamma1(bath.beta, e)

    out = quad(integrand, seg.t0, t_end, epsabs=1e-10, epsrel=1e-10, limit=60, full_output=1)
    if len(out) > 3:
        raise QuadratureConvergenceError(
            f"swap integral did not converge on [{seg.t0}, {t_end}]: {out[3]}"
        )
    return q * p1 + bath.mu * out[0]


def swap_integral(
    p0: TwoLevelState, schedule: Schedule, bath: BathParams, t: float
) -> TwoLevelState:
    """Occupation at time t from the integral solution

        P1(t) = e^(-mu*t) * [P1(0) + mu * int_0^t e^(mu*s) gamma1(s) ds],

    marched segment by segment. Piecewise-constant schedules reduce to the
    exact composed `swap_step` maps; ramps are integrated adaptively.
    """
    if not 0.0 <= t <= schedule.duration:
        raise ValueError(f"t={t} outside [0, {schedule.duration}]")
    p1 = p0.p1
    for seg in schedule.segments:
        if t <= seg.t0:
            break
        p1 = _segment_end_p1(p1, seg, bath, min(t, seg.t1))
    return TwoLevelState(p1)


def linear_drive_p1(bath: BathParams, delta: float, t: float) -> TwoLevelState:
    """Closed-form occupation for the jump-then-linear-ramp schedule.

    The schedule is E1(t) = (mu*t + delta)/beta: an opening jump of
    delta/beta followed by a ramp at speed mu/beta. Starting from the
    maximally mixed state,

        P1(t) = e^(-mu*t) * [1/2 + e^(-delta) * ln((1+e^(mu*t+delta)) / (1+e^delta))].

    The log terms are evaluated in softplus form so large mu*t + delta
    never overflows.
    """
    if delta < 0.0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    if t < 0.0:
        raise ValueError(f"t must be non-negative, got {t}")
    x = bath.mu * t
    log_ratio = log1pexp(x + delta) - log1pexp(delta)
    return TwoLevelState(math.exp(-x) * (0.5 + math.exp(-delta) * log_ratio))


def _probe_local_error(
    y: float, t: float, h: float, seg: Segment, bath: BathParams
) -> float:
    """Richardson estimate of the local RK4 truncation error at (t, y)."""
    full = _rk4_step(y, t, h, seg, bath)
    half = _rk4_step(y, t, 0.5 * h, seg, bath)
    half = _rk4_step(half, t + 0.5 * h, 0.5 * h, seg, bath)
    return abs(full - half) / 15.0


def _rk4_step(y: float, t: float, h: float, seg: Segment, bath: BathParams) -> float:
    mu, beta = bath.mu, bath.beta
    g0 = _gamma1(beta, seg.level(t))
    gm = _gamma1(beta, seg.level(t + 0.5 * h))
    g1 = _gamma1(beta, seg.level(t + h))
    k1 = mu * (g0 - y)
    k2 = mu * (gm - (y + 0.5 * h * k1))
    k3 = mu * (gm - (y + 0.5 * h * k2))
    k4 = mu * (g1 - (y + h * k3))
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def ode_oracle(
    p0: TwoLevelState,
    schedule: Schedule,
    bath: BathParams,
    step: "float | None" = None,
) -> Trajectory:
    """Brute-force fixed-step RK4 integration of the master equation.

    Steps never straddle a segment boundary, so jumps are handled exactly:
    the Gibbs state changes discontinuously while P1 stays continuous.
    Local truncation is probed by step doubling inside each segment and
    the run is rejected if the estimate exceeds 1e-6. Verification tool;
    the production paths are the closed forms and `swap_integral`.
    """
    tau = schedule.duration
    if step is None:
        step = 1e-4 * min(1.0 / bath.mu, tau) if tau > 0.0 else 1e-4 / bath.mu
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step}")
    if tau == 0.0:
        return Trajectory(np.array([0.0]), np.array([p0.p1]))

    mu, beta = bath.mu, bath.beta
    times = [0.0]
    values = [p0.p1]
    y = p0.p1
    for seg in schedule.segments:
        if seg.duration == 0.0:
            continue
        n = max(1, math.ceil(seg.duration / step))
        h = seg.duration / n
        # Gibbs occupations on the half-step grid of this segment, vectorized.
        tg = np.linspace(seg.t0, seg.t1, 2 * n + 1)
        slope = (seg.e1 - seg.e0) / seg.duration
        x = beta * (seg.e0 + slope * (tg - seg.t0))
        ex = np.exp(-x)
        g = ex / (1.0 + ex)
        for i in (0, n // 2, n - 1):
            est = _probe_local_error(y if i == 0 else values[-1], seg.t0 + i * h, h, seg, bath)
            if est > 1e-6:
                raise StepSizeError(
                    f"local error estimate {est:.3e} > 1e-6 at step {h:.3e}; decrease step"
                )
        g0 = g[0:-1:2].tolist()
        gm = g[1::2].tolist()
        g1 = g[2::2].tolist()
        sixth = h / 6.0
        seg_times = np.linspace(seg.t0, seg.t1, n + 1)
        for i in range(n):
            k1 = mu * (g0[i] - y)
            k2 = mu * (gm[i] - (y + 0.5 * h * k1))
            k3 = mu * (gm[i] - (y + 0.5 * h * k2))
            k4 = mu * (g1[i] - (y + h * k3))
            y += sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            values.append(y)
        times.extend(seg_times[1:].tolist())
    return Trajectory(np.asarray(times), np.asarray(values))


def schedule_thermal_state(bath: BathParams, schedule: Schedule, t: float) -> TwoLevelState:
    """Gibbs state at the instantaneous (right-continuous) schedule level."""
    return thermal_state(bath, EnergyLevel(schedule.level(t)))
