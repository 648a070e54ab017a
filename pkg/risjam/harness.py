"""
Monte Carlo harness: seeded trials per scheme and sweep point, and the SMP/SJP/power aggregates.

Seeds are derived so that every scheme at the same sweep point and trial index sees the same placement and
channels, while each scheme's solver draws from its own stream.
"""

import dataclasses
import logging
import math
import typing as t
from concurrent.futures import ProcessPoolExecutor
from enum import Enum

import numpy as np

from risjam.baselines import SchemeId, scheme_channels, solve_scheme
from risjam.beamforming import link_metrics
from risjam.geometry import (
    Position3D,
    ScenarioConfig,
    db_to_linear,
    generate_channel_set,
    linear_to_db,
    place_monitor_and_jammers,
)
from risjam.solver import SolverConfig

logger = logging.getLogger(__name__)

Placement = t.Tuple[Position3D, t.Sequence[Position3D]]
SUCCESS_RTOL = 1e-9
PLACEMENT_SPAWN_KEY = 1


# SECTION 1: Records and aggregates
@dataclasses.dataclass(frozen=True)
class TrialRecord:
    seed: int
    scheme: SchemeId
    p_j: float
    gamma_m: float
    gamma_sr: float
    jam_success: bool
    monitor_success: bool
    rounds_used: int
    sweep_value: float = math.nan
    trial_index: int = 0
    failed: bool = False
    error: t.Optional[str] = None

    @classmethod
    def failure(
        cls,
        seed: int,
        scheme: SchemeId,
        error: Exception,
        sweep_value: float = math.nan,
        trial_index: int = 0,
    ) -> "TrialRecord":
        return cls(
            seed=seed,
            scheme=scheme,
            p_j=math.nan,
            gamma_m=math.nan,
            gamma_sr=math.nan,
            jam_success=False,
            monitor_success=False,
            rounds_used=0,
            sweep_value=sweep_value,
            trial_index=trial_index,
            failed=True,
            error=str(error),
        )


@dataclasses.dataclass(frozen=True)
class AggregateMetrics:
    smp: float
    sjp: float
    mean_p_j: float
    mean_gamma_m_db: float
    n_trials: int
    n_failed: int = 0


def aggregate(records: t.Sequence[TrialRecord]) -> AggregateMetrics:
    """Failed trials only count towards n_trials and n_failed.

    mean_p_j averages jam-successful trials; mean_gamma_m_db is the dB value of the mean linear SNR.
    """
    if not records:
        raise ValueError("Cannot aggregate an empty list of trial records.")
    done = [r for r in records if not r.failed]
    n_failed = len(records) - len(done)
    if not done:
        return AggregateMetrics(0.0, 0.0, math.nan, math.nan, len(records), n_failed)
    jammed = [r.p_j for r in done if r.jam_success]
    mean_gamma_m = math.fsum(r.gamma_m for r in done) / len(done)
    return AggregateMetrics(
        smp=sum(r.monitor_success for r in done) / len(done),
        sjp=len(jammed) / len(done),
        mean_p_j=math.fsum(jammed) / len(jammed) if jammed else math.nan,
        mean_gamma_m_db=linear_to_db(mean_gamma_m),
        n_trials=len(records),
        n_failed=n_failed,
    )


# SECTION 2: Sweeps
class SweptParameter(Enum):
    P_ST = "p_st_w"
    RIS_Y = "ris_y_m"
    N_ELEMENTS = "n_elements"
    GAMMA_SR_TH = "gamma_sr_th_db"

    def apply(self, scenario: ScenarioConfig, value: float) -> ScenarioConfig:
        if self is SweptParameter.P_ST:
            return scenario.replace(p_st=float(value))
        if self is SweptParameter.RIS_Y:
            return scenario.replace(ris_position=scenario.ris_position.replace(y=float(value)))
        if self is SweptParameter.N_ELEMENTS:
            if value != int(value):
                raise ValueError(f"N_ELEMENTS sweep values must be integers, got {value}.")
            return scenario.replace(n_elements=int(value))
        return scenario.replace(gamma_sr_th=db_to_linear(float(value)))


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    swept_parameter: SweptParameter = dataclasses.field(
        default=SweptParameter.P_ST, metadata={"key": "parameter"}
    )
    values: t.Tuple[float, ...] = dataclasses.field(
        default=(0.5, 1.0, 2.0, 3.0), metadata={"key": "values"}
    )
    schemes: t.Tuple[SchemeId, ...] = dataclasses.field(
        default=tuple(SchemeId), metadata={"key": "schemes"}
    )
    n_trials: int = dataclasses.field(default=200, metadata={"key": "n_trials"})
    base_seed: int = dataclasses.field(default=0, metadata={"key": "base_seed"})

    def replace(self, **changes) -> "SweepSpec":
        return dataclasses.replace(self, **changes)

    def apply(self, scenario: ScenarioConfig, value: float) -> ScenarioConfig:
        return self.swept_parameter.apply(scenario, value)

    def problems(self) -> t.List[str]:
        problems = []
        if not self.values:
            problems.append("sweep.values must not be empty")
        if not self.schemes:
            problems.append("sweep.schemes must not be empty")
        if not isinstance(self.n_trials, int) or self.n_trials < 1:
            problems.append(f"sweep.n_trials must be a positive integer, got {self.n_trials!r}")
        if not isinstance(self.base_seed, int) or self.base_seed < 0:
            problems.append(f"sweep.base_seed must be a nonnegative integer, got {self.base_seed!r}")
        if self.swept_parameter is SweptParameter.N_ELEMENTS:
            if bad := [v for v in self.values if v != int(v) or v < 1]:
                problems.append(f"sweep.values must be positive integers for N_ELEMENTS, got {bad}")
        if self.swept_parameter is SweptParameter.P_ST:
            if bad := [v for v in self.values if not v > 0]:
                problems.append(f"sweep.values must be > 0 watts for P_ST, got {bad}")
        return problems


@dataclasses.dataclass(frozen=True)
class SweepRow:
    value: float
    scheme: SchemeId
    metrics: AggregateMetrics


@dataclasses.dataclass(frozen=True)
class SweepResult:
    parameter: SweptParameter
    rows: t.Tuple[SweepRow, ...]
    records: t.Tuple[TrialRecord, ...]


def trial_seed(base_seed: int, sweep_index: int, trial_index: int) -> int:
    state = np.random.SeedSequence([base_seed, sweep_index, trial_index]).generate_state(1)
    return int(state[0])


def solver_seed(seed: int, scheme: SchemeId) -> np.random.SeedSequence:
    # offset keeps the entropy distinct from the channel stream's [seed]
    return np.random.SeedSequence([seed, scheme.value + 1])


def placement_rng(base_seed: int, sweep_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([base_seed, sweep_index], spawn_key=(PLACEMENT_SPAWN_KEY,))
    )


def run_trial(
    scheme: SchemeId,
    scenario: ScenarioConfig,
    solver_cfg: SolverConfig,
    seed: int,
    placement: t.Optional[Placement] = None,
    sweep_value: float = math.nan,
    trial_index: int = 0,
) -> TrialRecord:
    logger.debug("Trial %d (%s) seed=%d", trial_index, scheme.name, seed)
    rng = np.random.default_rng(seed)
    try:
        with np.errstate(divide="raise", invalid="raise"):
            lm, ljs = placement if placement else place_monitor_and_jammers(rng, scenario)
            ch = generate_channel_set(rng, scenario, lm, ljs)
            result = solve_scheme(
                scheme, ch, scenario, solver_cfg, np.random.default_rng(solver_seed(seed, scheme))
            )
            metrics = link_metrics(
                scheme_channels(scheme, ch),
                result.phi_star,
                scenario.p_st,
                result.p_j_star,
                scenario.sigma2_sr,
                scenario.sigma2_m,
            )
    except (ValueError, FloatingPointError) as e:
        logger.warning("Trial %d (%s, seed=%d) failed: %s", trial_index, scheme.name, seed, e)
        return TrialRecord.failure(seed, scheme, e, sweep_value, trial_index)
    return TrialRecord(
        seed=seed,
        scheme=scheme,
        p_j=float(result.p_j_star),
        gamma_m=float(metrics.gamma_m),
        gamma_sr=float(metrics.gamma_sr),
        jam_success=bool(
            metrics.gamma_sr <= scenario.gamma_sr_th * (1 + SUCCESS_RTOL)
            and result.p_j_star <= scenario.p_j_max
        ),
        monitor_success=bool(metrics.gamma_m >= scenario.gamma_m_th),
        rounds_used=result.rounds_used,
        sweep_value=float(sweep_value),
        trial_index=trial_index,
    )


def _run_task(task: tuple) -> TrialRecord:
    return run_trial(*task)


def sweep_tasks(
    spec: SweepSpec, scenario: ScenarioConfig, solver_cfg: SolverConfig, sweep_index: int
) -> t.List[tuple]:
    value = spec.values[sweep_index]
    point = spec.apply(scenario, value)
    placement = None
    if not point.redraw_positions:
        placement = place_monitor_and_jammers(placement_rng(spec.base_seed, sweep_index), point)
    return [
        (scheme, point, solver_cfg, trial_seed(spec.base_seed, sweep_index, i), placement, value, i)
        for scheme in spec.schemes
        for i in range(spec.n_trials)
    ]


def run_sweep(
    spec: SweepSpec,
    scenario: ScenarioConfig,
    solver_cfg: SolverConfig,
    parallel: int = 1,
) -> SweepResult:
    """Rows come out in (value, scheme) order regardless of `parallel`."""
    pool = ProcessPoolExecutor(max_workers=parallel) if parallel > 1 else None
    rows, records = [], []
    try:
        for index, value in enumerate(spec.values):
            tasks = sweep_tasks(spec, scenario, solver_cfg, index)
            if pool is None:
                point_records = [_run_task(task) for task in tasks]
            else:
                point_records = list(pool.map(_run_task, tasks))
            for k, scheme in enumerate(spec.schemes):
                batch = point_records[k * spec.n_trials : (k + 1) * spec.n_trials]
                rows.append(SweepRow(value=value, scheme=scheme, metrics=aggregate(batch)))
            records += point_records
            logger.info(
                "%s = %g done (%d/%d)",
                spec.swept_parameter.name,
                value,
                index + 1,
                len(spec.values),
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(
        parameter=spec.swept_parameter, rows=tuple(rows), records=tuple(records)
    )


def regroup(records: t.Sequence[TrialRecord]) -> t.List[SweepRow]:
    "Aggregate stored records per (sweep value, scheme), in first-seen order."
    groups: t.Dict[t.Tuple[t.Optional[float], SchemeId], t.List[TrialRecord]] = {}
    for r in records:
        # NaN never equals itself, so unswept records share a None key
        value = None if math.isnan(r.sweep_value) else r.sweep_value
        groups.setdefault((value, r.scheme), []).append(r)
    return [
        SweepRow(value=batch[0].sweep_value, scheme=scheme, metrics=aggregate(batch))
        for (_, scheme), batch in groups.items()
    ]
