"""Vessel energy model: cubic drag power law and battery state-of-charge stepping.

Electrical load at cruise is a constant hotel draw plus a motor term cubic in
speed through water:

    power_draw(u) = k_h + k_m * u**3        [W]

The battery integrates net power with forward Euler. SOC is held in Wh, so one
step is

    b' = b + (p_in - power_draw(u)) * dt / 3600

clamped to the physical window [b_min, b_max]. Clamping at the top models solar
curtailment (energy the charge controller throws away on a full battery);
clamping at the bottom is a mission failure and latches the ``failed`` flag.
The 1/3600 W.s -> Wh conversion lives here and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class VesselParams:
    """Vessel energy constants. Defaults are the 4.8 m survey-vessel values."""

    k_h: float = 10.0      # hotel load, W
    k_m: float = 83.0      # motor constant, kg/m
    b_min: float = 0.0     # battery floor, Wh
    b_max: float = 6500.0  # battery capacity, Wh
    u_min: float = 0.0     # m/s
    u_max: float = 2.315   # m/s

    def __post_init__(self) -> None:
        if self.k_h < 0:
            raise ValueError("k_h must be >= 0")
        if self.k_m <= 0:
            raise ValueError("k_m must be > 0")
        if not self.b_min < self.b_max:
            raise ValueError("b_min must be strictly below b_max")
        if not 0.0 <= self.u_min < self.u_max:
            raise ValueError("velocity limits must satisfy 0 <= u_min < u_max")


@dataclass(frozen=True)
class SocState:
    """Battery state: SOC in Wh plus a latched underflow flag.

    ``failed`` is set (and stays set) once an unclamped update would have taken
    the SOC below the physical floor, i.e. the mission demanded energy the
    battery did not have.
    """

    b: float
    failed: bool = False


def power_draw(u: float, params: VesselParams) -> float:
    """Total electrical draw in W at speed ``u``.

    Raises ValueError if ``u`` lies outside [u_min, u_max].
    """
    if not params.u_min <= u <= params.u_max:
        raise ValueError(
            f"u={u} outside velocity limits [{params.u_min}, {params.u_max}]"
        )
    return params.k_h + params.k_m * u ** 3


def step_soc(
    state: SocState, u: float, p_in: float, dt: float, params: VesselParams
) -> SocState:
    """Advance the SOC one forward-Euler step of ``dt`` seconds.

    ``p_in`` is the solar input power in W. The returned state is clamped to
    [b_min, b_max]; with no clamping active the energy bookkeeping is exact:
    b' - b == (p_in - power_draw(u)) * dt / 3600.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if p_in < 0:
        raise ValueError("p_in must be >= 0")
    raw = state.b + (p_in - power_draw(u, params)) * dt / 3600.0
    failed = state.failed or raw < params.b_min
    b = min(max(raw, params.b_min), params.b_max)
    return SocState(b=b, failed=failed)
