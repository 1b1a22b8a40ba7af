"""Velocity control: switching law, buffered blending, and iterative learning.

The minimum-principle analysis of the distance-maximization problem yields a
bang/learn/bang structure. Away from the tightened SOC bounds the optimal
velocity is constant and dual to a constant (negative) costate:

    u* = sqrt(-1 / (3 * k_m * p1))        p1 = -1 / (3 * k_m * u*^2)

which is exactly the stationary point of the control Hamiltonian: the
stationarity residual -1 - 3 * k_m * p1 * u^2 vanishes at u*. At the bounds
the control saturates:

    u = u_max   if b >= b_u(t)     (burn: avoid curtailing charge)
    u = u_min   if b <= b_l(t)     (hold: protect the feasible future)
    u = u*      otherwise

The buffered variant linearly blends between the saturated and interior
commands over a band of width delta Wh inside each bound, which removes
chattering and makes the commanded velocity continuous in b.

The interior velocity itself is learned across daily cycles instead of being
solved from a forecast:

* once per cycle (terminal SOC b_tf, target b_des):
      u_hat <- u_hat + k_p * (b_tf - b_des)
* each step, a rate correction against the previous cycle's SOC trace:
      u_cmd(t) = u_hat + k_d * (b(t) - b_prev(t))
  applied to the cycle-frozen u_hat (corrections do not compound).

Both updates project onto [u_min, u_max]. A violation accumulator integrates
the squared excursion outside the envelope; it stays near zero (one-step
integration error) for any run that respects the barriers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .barrier import BarrierEnvelope
from .vessel import VesselParams


@dataclass(frozen=True)
class Costate:
    """Adjoint state of the distance-maximization Hamiltonian.

    p1 is the battery-SOC costate; it must be negative (stored energy has
    positive value, the Hamiltonian sign convention makes the adjoint
    negative). p2 is the adjoint of the violation accumulator; its dynamics
    are identically zero, so it is carried as a constant diagnostic and plays
    no role in the control law.
    """

    p1: float
    p2: float = 0.0

    def __post_init__(self) -> None:
        if not self.p1 < 0:
            raise ValueError("p1 must be < 0")


def velocity_from_costate(costate: Costate, params: VesselParams) -> float:
    """Interior optimal velocity for a given costate, projected onto limits."""
    u = math.sqrt(-1.0 / (3.0 * params.k_m * costate.p1))
    return min(max(u, params.u_min), params.u_max)


def costate_from_velocity(u: float, params: VesselParams) -> Costate:
    """Inverse duality map. Requires u > 0 (p1 diverges as u -> 0)."""
    if u <= 0:
        raise ValueError("u must be > 0 to map to a finite costate")
    return Costate(p1=-1.0 / (3.0 * params.k_m * u * u))


def stationarity_residual(u: float, costate: Costate, params: VesselParams) -> float:
    """dH/du of the interior Hamiltonian; zero at the dual velocity."""
    return -1.0 - 3.0 * params.k_m * costate.p1 * u * u


# ---------------------------------------------------------------------------
# switching / buffered control
# ---------------------------------------------------------------------------

def _switching_velocity(
    b: float, b_l: float, b_u: float, u_hat: float, u_min: float, u_max: float
) -> float:
    if b >= b_u:
        return u_max
    if b <= b_l:
        return u_min
    return u_hat


def switching_control(
    b: float, t: float, env: BarrierEnvelope, u_hat: float, params: VesselParams
) -> float:
    """Hard three-branch switching law at time ``t``."""
    return _switching_velocity(
        b, env.lower_at(t), env.upper_at(t), u_hat, params.u_min, params.u_max
    )


def _buffered_velocity(
    b: float,
    b_l: float,
    b_u: float,
    u_star: float,
    delta: float,
    u_min: float,
    u_max: float,
) -> float:
    if b <= b_l:
        return u_min
    if b >= b_u:
        return u_max
    gap_l = b - b_l
    if gap_l < delta:
        w = gap_l / delta
        return w * u_star + (1.0 - w) * u_min
    gap_u = b_u - b
    if gap_u < delta:
        w = gap_u / delta
        return w * u_star + (1.0 - w) * u_max
    return u_star


def validate_buffer(env: BarrierEnvelope, delta: float) -> None:
    """Reject buffer widths whose bands would overlap anywhere on the grid."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    min_gap = float(np.min(env.upper - env.lower))
    if not 2.0 * delta < min_gap:
        raise ValueError(
            f"buffer width delta={delta} Wh does not fit: envelope gap narrows "
            f"to {min_gap} Wh and the two bands (2*delta) would overlap"
        )


def buffered_control(
    b: float,
    t: float,
    env: BarrierEnvelope,
    u_star: float,
    delta: float,
    params: VesselParams,
) -> float:
    """Switching law with linear blending bands of width ``delta`` Wh.

    Continuous in b: equals u_min at b_l, u_star at b_l + delta, u_star at
    b_u - delta and u_max at b_u. The caller must ensure the bands fit
    (see :func:`validate_buffer`).
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    return _buffered_velocity(
        b, env.lower_at(t), env.upper_at(t), u_star, delta, params.u_min, params.u_max
    )


def buffered_velocity_array(
    b: np.ndarray,
    b_l: float,
    b_u: float,
    u_star: float,
    delta: float,
    params: VesselParams,
) -> np.ndarray:
    """Vectorized :func:`buffered_control` at fixed bounds.

    Element-for-element identical to the scalar path (same arithmetic), used
    by dense continuity sweeps.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    b = np.asarray(b, dtype=float)
    w_l = (b - b_l) / delta
    w_u = (b_u - b) / delta
    out = np.full_like(b, u_star)
    lower_band = (b > b_l) & (w_l < 1.0)
    upper_band = (b < b_u) & (w_u < 1.0) & ~lower_band
    out[lower_band] = w_l[lower_band] * u_star + (1.0 - w_l[lower_band]) * params.u_min
    out[upper_band] = w_u[upper_band] * u_star + (1.0 - w_u[upper_band]) * params.u_max
    out[b <= b_l] = params.u_min
    out[b >= b_u] = params.u_max
    return out


# ---------------------------------------------------------------------------
# iterative learning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IlcState:
    """Learned-velocity estimator state across daily cycles.

    u_hat: current interior velocity estimate, m/s (within vessel limits).
    k_p: per-cycle proportional gain, (m/s)/Wh.
    k_d: intra-cycle rate gain, (m/s)/Wh.
    b_des: terminal-SOC target for the running cycle, Wh.
    prev_soc_trace: SOC trace of the previous cycle (one entry per step),
        None until the first cycle completes.
    iteration: completed cycles.
    """

    u_hat: float
    k_p: float
    k_d: float
    b_des: float
    prev_soc_trace: np.ndarray | None = None
    iteration: int = 0


def ilc_daily_update(
    state: IlcState,
    b_tf: float,
    params: VesselParams,
    day_trace: np.ndarray | None = None,
    b_des_next: float | None = None,
) -> IlcState:
    """Close one cycle: proportional update on the terminal-SOC error.

    ``day_trace`` is the completed cycle's SOC trace and becomes
    prev_soc_trace for the next cycle (None keeps the old trace).
    ``b_des_next`` retargets the next cycle (None keeps b_des).
    """
    u = state.u_hat + state.k_p * (b_tf - state.b_des)
    u = min(max(u, params.u_min), params.u_max)
    trace = state.prev_soc_trace if day_trace is None else np.asarray(day_trace, float)
    return replace(
        state,
        u_hat=u,
        prev_soc_trace=trace,
        iteration=state.iteration + 1,
        b_des=state.b_des if b_des_next is None else b_des_next,
    )


def ilc_rate_update(
    state: IlcState, b_now: float, t_index: int, params: VesselParams
) -> float:
    """Rate-corrected interior velocity for step ``t_index`` of the cycle.

    Compares the current SOC with the previous cycle's SOC at the same
    within-cycle step. During iteration 0 (no previous trace) the estimate is
    returned unmodified. The correction is applied to the cycle-frozen
    u_hat, so successive corrections do not compound.
    """
    if state.prev_soc_trace is None:
        u = state.u_hat
    else:
        if not 0 <= t_index < state.prev_soc_trace.size:
            raise ValueError(
                f"t_index {t_index} outside previous trace of length "
                f"{state.prev_soc_trace.size}"
            )
        u = state.u_hat + state.k_d * (b_now - float(state.prev_soc_trace[t_index]))
    return min(max(u, params.u_min), params.u_max)


# ---------------------------------------------------------------------------
# violation bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ViolationAccumulator:
    """Integrated squared envelope excursion, Wh^2 * s."""

    x2: float = 0.0


def _violation_rate(b: float, b_l: float, b_u: float) -> float:
    if b < b_l:
        d = b_l - b
        return d * d
    if b > b_u:
        d = b - b_u
        return d * d
    return 0.0


def accumulate_violation(
    acc: ViolationAccumulator,
    b: float,
    env: BarrierEnvelope,
    t: float,
    dt: float,
) -> ViolationAccumulator:
    """Add one step of squared-excursion penalty outside the envelope."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    rate = _violation_rate(b, env.lower_at(t), env.upper_at(t))
    if rate == 0.0:
        return acc
    return ViolationAccumulator(x2=acc.x2 + rate * dt)
