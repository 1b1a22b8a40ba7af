"""Closed-loop mission harness: configuration, stepping loop, CSV exports.

Conventions
-----------
* The mission clock starts at t = 0 (local midnight) and advances in fixed
  steps of ``dt`` seconds; mission_length must be a positive multiple of dt.
* Step i spans [i*dt, (i+1)*dt). The input power used by the forward-Euler
  step is sampled at the step start; the commanded velocity is constant over
  the step. Trace arrays have one entry per step: velocity_trace[i] and
  p_in_trace[i] belong to the step start, soc_trace[i] is the SOC at the step
  END, so soc_trace[-1] is the terminal SOC.
* Iteration (learning-cycle) boundaries align with solar-cycle boundaries:
  every 86400 s of mission time.
* distance = sum(velocity_trace) * dt exactly (the discretized path length).
* The controller sees the measured SOC (true SOC plus optional seeded
  Gaussian noise); the battery and the violation accumulator use the true
  SOC. Identical config and seed reproduce the simulation payload
  bit-for-bit.
* Energy bookkeeping is audited: terminal = initial + sum((p_in - draw) *
  dt/3600) + floor_added - curtailed, where the last two are the clamp
  ledgers in Wh.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .barrier import BarrierEnvelope, build_envelope
from .benchmark import MpcConfig, energy_balance_velocity, mpc_controller
from .controller import costate_from_velocity, validate_buffer
from .solar import (
    IdealizedSolarParams,
    SolarProfile,
    load_profile,
    sample_array,
    tabulate_idealized,
    tabulate_seasonal,
)
from .vessel import VesselParams

STRATEGIES = ("ilc", "constant-unconstrained", "constant-constrained", "mpc")
BARRIER_MODES = ("horizon", "periodic-day")
DAY_S = 86400.0


class ConfigError(ValueError):
    """Raised when a SimConfig fails validation; message lists every failure."""


@dataclass(frozen=True)
class IdealizedSource:
    """Idealized clear-sky input, optionally with per-day constants."""

    d0: float = 300.0
    d1: float = 500.0
    period: float = 86400.0
    d0_by_day: tuple[float, ...] | None = None
    d1_by_day: tuple[float, ...] | None = None


@dataclass(frozen=True)
class FileSource:
    """Input power read from a two-column time_s,power file."""

    path: str
    scale: float = 1.0
    interpolation: str = "linear"
    period: float | None = None


@dataclass(frozen=True)
class IlcSettings:
    """Learned-controller gains and buffer width."""

    k_p: float = 5e-5    # (m/s)/Wh per cycle
    k_d: float = 1e-5    # (m/s)/Wh per step
    delta: float = 100.0  # blending band, Wh
    u_init: float = 1.0   # initial velocity estimate, m/s
    b_des: float | None = None  # fixed terminal target; None tracks cycle start


@dataclass(frozen=True)
class SimConfig:
    mission_length: float = 31_536_000.0  # s (365 days)
    dt: float = 360.0
    initial_soc: float = 3250.0
    strategy: str = "ilc"
    solar: IdealizedSource | FileSource = field(default_factory=IdealizedSource)
    barrier_mode: str = "periodic-day"
    rng_seed: int = 0
    noise_std: float = 0.0
    output_dir: str = "out"
    vessel: VesselParams = field(default_factory=VesselParams)
    ilc: IlcSettings = field(default_factory=IlcSettings)
    mpc: MpcConfig = field(default_factory=MpcConfig)

    def validate(self) -> list[str]:
        """Collect every validation failure as a 'field: problem' string."""
        errors: list[str] = []
        p = self.vessel
        if self.dt <= 0:
            errors.append("sim.dt: must be > 0")
        if self.mission_length <= 0:
            errors.append("sim.mission_length: must be > 0")
        elif self.dt > 0:
            steps = self.mission_length / self.dt
            if abs(steps - round(steps)) > 1e-9:
                errors.append(
                    "sim.mission_length: must be a positive multiple of sim.dt"
                )
        if not p.b_min <= self.initial_soc <= p.b_max:
            errors.append(
                f"sim.initial_soc: {self.initial_soc} outside battery window "
                f"[{p.b_min}, {p.b_max}]"
            )
        if self.strategy not in STRATEGIES:
            errors.append(f"sim.strategy: {self.strategy!r} not one of {STRATEGIES}")
        if self.barrier_mode not in BARRIER_MODES:
            errors.append(
                f"barrier.mode: {self.barrier_mode!r} not one of {BARRIER_MODES}"
            )
        if self.noise_std < 0:
            errors.append("sim.noise_std: must be >= 0")
        if self.strategy == "ilc":
            if self.dt > 0 and abs(DAY_S / self.dt - round(DAY_S / self.dt)) > 1e-9:
                errors.append("sim.dt: must divide 86400 s for the ilc strategy")
            if self.ilc.delta <= 0:
                errors.append("controller.delta: must be > 0")
            if not p.u_min <= self.ilc.u_init <= p.u_max:
                errors.append(
                    f"controller.u_init: {self.ilc.u_init} outside velocity limits"
                )
        if isinstance(self.solar, IdealizedSource):
            s = self.solar
            if s.period <= 0:
                errors.append("solar.period: must be > 0")
            if s.d1 < 0:
                errors.append("solar.d1: must be >= 0")
            tables = (s.d0_by_day, s.d1_by_day)
            if (tables[0] is None) != (tables[1] is None):
                errors.append("solar.table: d0_by_day and d1_by_day must come together")
            elif tables[0] is not None and len(tables[0]) != len(tables[1]):
                errors.append("solar.table: d0_by_day and d1_by_day lengths differ")
        elif isinstance(self.solar, FileSource):
            if self.solar.scale <= 0:
                errors.append("solar.scale: must be > 0")
        else:
            errors.append("solar.source: unrecognized source type")
        return errors


class IterationRecord(NamedTuple):
    iteration: int
    u_hat: float
    p1: float
    terminal_soc: float


@dataclass
class SimResult:
    strategy: str
    dt: float
    initial_soc: float
    soc_trace: np.ndarray       # Wh at step end
    velocity_trace: np.ndarray  # m/s commanded per step
    p_in_trace: np.ndarray      # W sampled at step start
    distance: float             # m
    terminal_soc: float         # Wh
    violation: float            # Wh^2 * s
    per_iteration: list[IterationRecord]
    wall_time: float            # s
    curtailed_wh: float         # energy clamped away at b_max
    floor_added_wh: float       # phantom energy added by the b_min clamp
    battery_failed: bool


def build_input_profile(cfg: SimConfig) -> SolarProfile:
    """Tabulate or load the mission's P_in signal."""
    if isinstance(cfg.solar, FileSource):
        s = cfg.solar
        return load_profile(
            s.path, scale=s.scale, interpolation=s.interpolation, period=s.period
        )
    s = cfg.solar
    if s.d0_by_day is not None:
        return tabulate_seasonal(s.d0_by_day, s.d1_by_day, cfg.dt, period=s.period)
    return tabulate_idealized(
        IdealizedSolarParams(d0=s.d0, d1=s.d1, period=s.period), cfg.dt
    )


def nominal_day_profile(cfg: SimConfig) -> SolarProfile:
    """The configured clear-sky day used by periodic-day barrier building."""
    if isinstance(cfg.solar, IdealizedSource):
        params = IdealizedSolarParams(
            d0=cfg.solar.d0, d1=cfg.solar.d1, period=cfg.solar.period
        )
    else:
        params = IdealizedSolarParams()
    return tabulate_idealized(params, cfg.dt)


def build_mission_envelope(cfg: SimConfig, profile: SolarProfile) -> BarrierEnvelope:
    if cfg.barrier_mode == "horizon":
        if not profile.covers(0.0, cfg.mission_length) or (
            not profile.periodic and profile.end < cfg.mission_length
        ):
            raise ConfigError(
                "solar source does not cover the mission; horizon barriers need "
                f"data through t={cfg.mission_length}"
            )
        grid = np.arange(0.0, cfg.mission_length + cfg.dt / 2, cfg.dt)
        return build_envelope(profile, cfg.vessel, grid, mode="horizon")
    nominal = nominal_day_profile(cfg)
    grid = np.arange(0.0, float(nominal.period), cfg.dt)
    return build_envelope(nominal, cfg.vessel, grid, mode="periodic-day")


def run_mission(cfg: SimConfig) -> SimResult:
    """Simulate one mission under the configured strategy."""
    errors = cfg.validate()
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    wall0 = time.perf_counter()

    profile = build_input_profile(cfg)
    if not profile.periodic and profile.end < cfg.mission_length:
        raise ConfigError(
            "solar source does not cover the mission "
            f"(data ends at t={profile.end}, mission ends at t={cfg.mission_length})"
        )
    env = build_mission_envelope(cfg, profile)

    p = cfg.vessel
    dt = float(cfg.dt)
    dtf = dt / 3600.0
    n = int(round(cfg.mission_length / dt))
    times = np.arange(n) * dt
    p_list = sample_array(profile, times).tolist()
    bl_arr, bu_arr = env.bounds_arrays(times)
    bl_list = bl_arr.tolist()
    bu_list = bu_arr.tolist()
    noise_list = None
    if cfg.noise_std > 0:
        rng = np.random.default_rng(cfg.rng_seed)
        noise_list = rng.normal(0.0, cfg.noise_std, n).tolist()

    vel = [0.0] * n
    soc = [0.0] * n
    k_h, k_m = p.k_h, p.k_m
    b_min, b_max = p.b_min, p.b_max
    u_min, u_max = p.u_min, p.u_max
    b = float(cfg.initial_soc)
    x2 = 0.0
    sum_u = 0.0
    curtailed = 0.0
    floor_added = 0.0
    failed = False
    per_iter: list[IterationRecord] = []

    if cfg.strategy == "ilc":
        validate_buffer(env, cfg.ilc.delta)
        spd = int(round(DAY_S / dt))
        k_p, k_d, delta = cfg.ilc.k_p, cfg.ilc.k_d, cfg.ilc.delta
        fixed_target = cfg.ilc.b_des
        b_des = float(fixed_target) if fixed_target is not None else b
        u_hat = float(cfg.ilc.u_init)
        prev: list[float] | None = None
        day_buf = [0.0] * spd
        iteration = 0
        for i in range(n):
            p_in = p_list[i]
            b_l = bl_list[i]
            b_u = bu_list[i]
            meas = b + noise_list[i] if noise_list is not None else b
            j = i % spd
            day_buf[j] = meas
            if prev is None:
                u_star = u_hat
            else:
                u_star = u_hat + k_d * (meas - prev[j])
                if u_star < u_min:
                    u_star = u_min
                elif u_star > u_max:
                    u_star = u_max
            # buffered switching law on the measured SOC
            if meas <= b_l:
                u = u_min
            elif meas >= b_u:
                u = u_max
            else:
                gap_l = meas - b_l
                if gap_l < delta:
                    w = gap_l / delta
                    u = w * u_star + (1.0 - w) * u_min
                else:
                    gap_u = b_u - meas
                    if gap_u < delta:
                        w = gap_u / delta
                        u = w * u_star + (1.0 - w) * u_max
                    else:
                        u = u_star
            # violation measured on the true SOC at the step start
            if b < b_l:
                d = b_l - b
                x2 += d * d * dt
            elif b > b_u:
                d = b - b_u
                x2 += d * d * dt
            raw = b + (p_in - k_h - k_m * u * u * u) * dtf
            if raw < b_min:
                floor_added += b_min - raw
                raw = b_min
                failed = True
            elif raw > b_max:
                curtailed += raw - b_max
                raw = b_max
            vel[i] = u
            sum_u += u
            b = raw
            soc[i] = b
            if j == spd - 1:
                iteration += 1
                u_hat += k_p * (b - b_des)
                if u_hat < u_min:
                    u_hat = u_min
                elif u_hat > u_max:
                    u_hat = u_max
                prev = day_buf
                day_buf = [0.0] * spd
                if fixed_target is None:
                    b_des = b
                p1 = (
                    costate_from_velocity(u_hat, p).p1
                    if u_hat > 0
                    else float("nan")
                )
                per_iter.append(IterationRecord(iteration, u_hat, p1, b))
    elif cfg.strategy in ("constant-unconstrained", "constant-constrained"):
        u_const = energy_balance_velocity(profile, cfg.mission_length, p)
        constrained = cfg.strategy == "constant-constrained"
        for i in range(n):
            p_in = p_list[i]
            b_l = bl_list[i]
            b_u = bu_list[i]
            if constrained:
                meas = b + noise_list[i] if noise_list is not None else b
                if meas >= b_u:
                    u = u_max
                elif meas <= b_l:
                    u = u_min
                else:
                    u = u_const
            else:
                u = u_const
            if b < b_l:
                d = b_l - b
                x2 += d * d * dt
            elif b > b_u:
                d = b - b_u
                x2 += d * d * dt
            raw = b + (p_in - k_h - k_m * u * u * u) * dtf
            if raw < b_min:
                floor_added += b_min - raw
                raw = b_min
                failed = True
            elif raw > b_max:
                curtailed += raw - b_max
                raw = b_max
            vel[i] = u
            sum_u += u
            b = raw
            soc[i] = b
    elif cfg.strategy == "mpc":
        controller = mpc_controller(
            cfg.mpc, profile, env, p, dt, t_end=cfg.mission_length
        )
        for i in range(n):
            p_in = p_list[i]
            b_l = bl_list[i]
            b_u = bu_list[i]
            meas = b + noise_list[i] if noise_list is not None else b
            u = controller(meas, times[i])
            if b < b_l:
                d = b_l - b
                x2 += d * d * dt
            elif b > b_u:
                d = b - b_u
                x2 += d * d * dt
            raw = b + (p_in - k_h - k_m * u * u * u) * dtf
            if raw < b_min:
                floor_added += b_min - raw
                raw = b_min
                failed = True
            elif raw > b_max:
                curtailed += raw - b_max
                raw = b_max
            vel[i] = u
            sum_u += u
            b = raw
            soc[i] = b
    else:  # pragma: no cover - validate() rejects unknown strategies
        raise ConfigError(f"sim.strategy: unknown strategy {cfg.strategy!r}")

    wall = time.perf_counter() - wall0
    return SimResult(
        strategy=cfg.strategy,
        dt=dt,
        initial_soc=float(cfg.initial_soc),
        soc_trace=np.asarray(soc),
        velocity_trace=np.asarray(vel),
        p_in_trace=np.asarray(p_list),
        distance=sum_u * dt,
        terminal_soc=b,
        violation=x2,
        per_iteration=per_iter,
        wall_time=wall,
        curtailed_wh=curtailed,
        floor_added_wh=floor_added,
        battery_failed=failed,
    )


# ---------------------------------------------------------------------------
# strategy comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrategyRow:
    strategy: str
    distance_m: float
    terminal_soc_wh: float
    violation: float
    wall_time_s: float


@dataclass
class ComparisonResult:
    rows: list[StrategyRow]
    # cumulative distance at each full-day boundary, aligned with rows
    daily_distance: list[np.ndarray]
    results: list[SimResult]

    @property
    def days(self) -> int:
        return self.daily_distance[0].size if self.daily_distance else 0


def daily_cumulative_distance(result: SimResult) -> np.ndarray:
    """Cumulative distance (m) sampled at the end of each full mission day."""
    n = result.velocity_trace.size
    steps_per_day = DAY_S / result.dt
    days = int(np.floor(n / steps_per_day + 1e-9))
    if days == 0:
        return np.asarray([])
    cum = np.cumsum(result.velocity_trace) * result.dt
    idx = (np.arange(1, days + 1) * steps_per_day).astype(int) - 1
    return cum[idx]


def compare_strategies(cfgs: Sequence[SimConfig]) -> ComparisonResult:
    """Run each config and collate distance/SOC/violation/runtime rows.

    All configs must share the solar source and mission length so the
    distances are comparable.
    """
    if len(cfgs) < 2:
        raise ConfigError("compare needs at least two configurations")
    first = cfgs[0]
    for i, cfg in enumerate(cfgs[1:], start=2):
        if cfg.solar != first.solar:
            raise ConfigError(
                f"compare: config {i} has a different solar source than config 1"
            )
        if cfg.mission_length != first.mission_length:
            raise ConfigError(
                f"compare: config {i} has a different mission length than config 1"
            )
    rows: list[StrategyRow] = []
    daily: list[np.ndarray] = []
    results: list[SimResult] = []
    for cfg in cfgs:
        res = run_mission(cfg)
        rows.append(
            StrategyRow(
                strategy=res.strategy,
                distance_m=res.distance,
                terminal_soc_wh=res.terminal_soc,
                violation=res.violation,
                wall_time_s=res.wall_time,
            )
        )
        daily.append(daily_cumulative_distance(res))
        results.append(res)
    return ComparisonResult(rows=rows, daily_distance=daily, results=results)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def export_traces(result: SimResult, out_dir: str | Path) -> list[Path]:
    """Write trace.csv, iterations.csv, summary.csv (and daily.csv) to a dir.

    Output is deterministic: identical results produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    trace = out / "trace.csv"
    lines = ["time_s,soc_wh,velocity_ms,p_in_w"]
    dt = result.dt
    for i in range(result.velocity_trace.size):
        lines.append(
            f"{_fmt(i * dt)},{_fmt(result.soc_trace[i])},"
            f"{_fmt(result.velocity_trace[i])},{_fmt(result.p_in_trace[i])}"
        )
    trace.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(trace)

    iters = out / "iterations.csv"
    lines = ["iteration,u_hat,p1,terminal_soc_wh"]
    for rec in result.per_iteration:
        lines.append(
            f"{rec.iteration},{_fmt(rec.u_hat)},{_fmt(rec.p1)},{_fmt(rec.terminal_soc)}"
        )
    iters.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(iters)

    summary = out / "summary.csv"
    header = (
        "strategy,distance_m,terminal_soc_wh,violation_wh2s,wall_time_s,"
        "curtailed_wh,floor_added_wh,battery_failed,steps,dt_s,initial_soc_wh"
    )
    row = ",".join(
        [
            result.strategy,
            _fmt(result.distance),
            _fmt(result.terminal_soc),
            _fmt(result.violation),
            _fmt(result.wall_time),
            _fmt(result.curtailed_wh),
            _fmt(result.floor_added_wh),
            str(result.battery_failed).lower(),
            str(result.velocity_trace.size),
            _fmt(result.dt),
            _fmt(result.initial_soc),
        ]
    )
    summary.write_text(header + "\n" + row + "\n", encoding="utf-8")
    written.append(summary)

    daily = out / "daily.csv"
    series = daily_cumulative_distance(result)
    spd = int(round(DAY_S / result.dt)) if (DAY_S / result.dt).is_integer() else None
    lines = ["day,mean_velocity_ms,mean_soc_wh,distance_m"]
    if spd:
        for d in range(series.size):
            sl = slice(d * spd, (d + 1) * spd)
            lines.append(
                f"{d},{_fmt(float(np.mean(result.velocity_trace[sl])))},"
                f"{_fmt(float(np.mean(result.soc_trace[sl])))},{_fmt(series[d])}"
            )
    daily.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(daily)
    return written


def export_comparison(comp: ComparisonResult, out_dir: str | Path) -> list[Path]:
    """Write comparison.csv and distance_series.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    comparison = out / "comparison.csv"
    lines = ["strategy,distance_m,terminal_soc_wh,violation_wh2s,wall_time_s"]
    for row in comp.rows:
        lines.append(
            f"{row.strategy},{_fmt(row.distance_m)},{_fmt(row.terminal_soc_wh)},"
            f"{_fmt(row.violation)},{_fmt(row.wall_time_s)}"
        )
    comparison.write_text("\n".join(lines) + "\n", encoding="utf-8")

    series = out / "distance_series.csv"
    names = [row.strategy for row in comp.rows]
    lines = ["day," + ",".join(f"distance_m_{name}" for name in names)]
    for d in range(comp.days):
        vals = ",".join(_fmt(arr[d]) for arr in comp.daily_distance)
        lines.append(f"{d},{vals}")
    series.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [comparison, series]
