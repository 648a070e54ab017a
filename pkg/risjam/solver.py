"""
BCD-PSO phase-shift optimization.

Each BCD round visits the RIS elements in order. For element ℓ the other phases are held fixed and the
P2 objective collapses to a ratio of two sinusoids in θ_ℓ (see forms.py). A closed-form jamming step minimizes it,
then a particle swarm refines the result under the monitoring constraint.
"""

import dataclasses
import logging
import math
import typing as t

import numpy as np

from risjam.beamforming import (
    TWO_PI,
    PhaseVector,
    effective_channels,
    link_metrics,
    mrt_lj_direction,
    mrt_st,
    pj_lower_bound,
    wrap_phase,
)
from risjam.forms import (
    DENOMINATOR_FLOOR,
    FormKind,
    PerElementCoeffs,
    build_form,
    per_element_coeffs,
)
from risjam.geometry import ChannelSet, Rng, ScenarioConfig

logger = logging.getLogger(__name__)

ArrayLike = t.Union[float, np.ndarray]
GRID_POINTS = 64
ARCSIN_SLACK = 1e-9


# SECTION 1: Configuration
@dataclasses.dataclass(frozen=True)
class SAConfig:
    initial_temperature: float = 1.0
    cooling_ratio: float = 0.95
    steps_per_temperature: int = 10
    proposal_width: float = math.pi / 4
    min_temperature: float = 1e-4

    def problems(self, prefix: str = "solver.sa") -> t.List[str]:
        problems = []
        if not self.initial_temperature > 0:
            problems.append(f"{prefix}.initial_temperature must be > 0")
        if not 0 < self.cooling_ratio < 1:
            problems.append(f"{prefix}.cooling_ratio must be in (0, 1)")
        if not (isinstance(self.steps_per_temperature, int) and self.steps_per_temperature > 0):
            problems.append(f"{prefix}.steps_per_temperature must be a positive integer")
        if not self.proposal_width > 0:
            problems.append(f"{prefix}.proposal_width must be > 0")
        if not self.min_temperature > 0:
            problems.append(f"{prefix}.min_temperature must be > 0")
        return problems


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    r_max: int = 50
    t_max: int = 80
    n_particles: int = 20
    c1: float = 1.5
    c2: float = 1.5
    w_min: float = 0.0
    w_max: float = TWO_PI
    c_p: float = 1e6
    eps_th: float = 0.01
    init_jitter: float = math.pi / 8
    wrap_velocity: bool = True
    sa: SAConfig = dataclasses.field(default_factory=SAConfig)

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def problems(self) -> t.List[str]:
        problems = []
        for name in ("r_max", "t_max", "n_particles"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                problems.append(f"solver.{name} must be a positive integer, got {value!r}")
        for name in ("c1", "c2", "init_jitter"):
            if not getattr(self, name) >= 0:
                problems.append(f"solver.{name} must be >= 0, got {getattr(self, name)}")
        if not self.w_max >= self.w_min:
            problems.append(f"solver.w_max ({self.w_max}) must be >= solver.w_min ({self.w_min})")
        if not self.c_p > 0:
            problems.append(f"solver.c_p must be > 0, got {self.c_p}")
        if not self.eps_th > 0:
            problems.append(f"solver.eps_th must be > 0, got {self.eps_th}")
        return problems + self.sa.problems()


# SECTION 2: Per-element problem
def objective_p4(
    theta: ArrayLike,
    coeffs_st: PerElementCoeffs,
    coeffs_j: PerElementCoeffs,
    gamma_sr_th: float,
    sigma2_sr: float,
) -> ArrayLike:
    """P2 objective as a function of one element's phase: the jammer power bound before clamping."""
    denominator = gamma_sr_th * coeffs_j.value(theta)
    if np.any(denominator <= DENOMINATOR_FLOOR):
        raise ValueError(
            "P4 denominator is not positive: the jammer's effective channel vanishes."
        )
    return (coeffs_st.value(theta) - sigma2_sr * gamma_sr_th) / denominator


def monitoring_margin(
    theta: ArrayLike, coeffs_m: PerElementCoeffs, gamma_m_th: float, sigma2_m: float
) -> ArrayLike:
    "<= 0 where LM's SNR constraint holds."
    return sigma2_m * gamma_m_th - coeffs_m.value(theta)


def pso_fitness(
    x: ArrayLike,
    coeffs_st: PerElementCoeffs,
    coeffs_j: PerElementCoeffs,
    coeffs_m: PerElementCoeffs,
    gamma_sr_th: float,
    gamma_m_th: float,
    sigma2_sr: float,
    sigma2_m: float,
    c_p: float,
) -> ArrayLike:
    penalty = np.where(monitoring_margin(x, coeffs_m, gamma_m_th, sigma2_m) <= 0, 0.0, c_p)
    value = objective_p4(x, coeffs_st, coeffs_j, gamma_sr_th, sigma2_sr) + penalty
    return float(value) if np.ndim(value) == 0 else value


@dataclasses.dataclass(frozen=True)
class ElementProblem:
    """Everything needed to update element `index` with the other phases frozen."""

    index: int
    theta: float
    st: PerElementCoeffs
    j: PerElementCoeffs
    m: PerElementCoeffs
    gamma_sr_th: float
    gamma_m_th: float
    sigma2_sr: float
    sigma2_m: float
    c_p: float

    def objective(self, x: ArrayLike) -> ArrayLike:
        return objective_p4(x, self.st, self.j, self.gamma_sr_th, self.sigma2_sr)

    def fitness(self, x: ArrayLike) -> ArrayLike:
        return pso_fitness(
            x,
            self.st,
            self.j,
            self.m,
            self.gamma_sr_th,
            self.gamma_m_th,
            self.sigma2_sr,
            self.sigma2_m,
            self.c_p,
        )

    def feasible(self, x: ArrayLike) -> ArrayLike:
        return monitoring_margin(x, self.m, self.gamma_m_th, self.sigma2_m) <= 0

    def jamming_step(self, **kwargs) -> "JammingStepResult":
        return jamming_step(
            self.st, self.j, self.gamma_sr_th, self.sigma2_sr, incumbent=self.theta, **kwargs
        )


# SECTION 3: Jamming optimization
@dataclasses.dataclass(frozen=True)
class JammingStepResult:
    theta_hat: float
    candidates: t.Tuple[float, float]
    B: float
    C: float
    psi: float
    p2: float
    q2: float
    objective: float
    source: str = "stationary"
    fallback: bool = False


def jamming_step(
    coeffs_st: PerElementCoeffs,
    coeffs_j: PerElementCoeffs,
    gamma_sr_th: float,
    sigma2_sr: float,
    incumbent: t.Optional[float] = None,
    admissible: t.Optional[t.Callable[[np.ndarray], np.ndarray]] = None,
    boundary: t.Sequence[float] = (),
    grid_points: int = GRID_POINTS,
) -> JammingStepResult:
    """Minimize the per-element objective in closed form.

    Stationary points solve B + C sin(θ + ψ) = 0. Both arcsin sign variants are tried, together with the
    incumbent and a coarse grid, and the smallest objective wins. With `admissible`, only angles it accepts
    (plus `boundary`) compete; if none is admissible the unconstrained minimizer is returned.
    """
    rho_s, phase_s = coeffs_st.rho, coeffs_st.phase
    rho_j, phase_j = coeffs_j.rho, coeffs_j.phase
    B = gamma_sr_th * rho_s * rho_j * math.sin(phase_j - phase_s)
    p2 = gamma_sr_th * rho_j * (coeffs_st.beta - sigma2_sr * gamma_sr_th)
    q2 = gamma_sr_th * rho_s * coeffs_j.beta
    x = p2 * math.cos(phase_j) - q2 * math.cos(phase_s)
    y = p2 * math.sin(phase_j) - q2 * math.sin(phase_s)
    C, psi = math.hypot(x, y), math.atan2(y, x)

    fallback = C == 0 or abs(B) > C * (1 + ARCSIN_SLACK)
    if fallback:
        pair: t.Tuple[float, float] = (math.nan, math.nan)
        stationary: t.List[float] = []
    else:
        ratio = max(-1.0, min(1.0, B / C))
        pair = (
            float(wrap_phase(math.asin(ratio) - psi)),
            float(wrap_phase(math.pi - math.asin(ratio) - psi)),
        )
        stationary = [
            *pair,
            float(wrap_phase(math.asin(-ratio) - psi)),
            float(wrap_phase(math.pi - math.asin(-ratio) - psi)),
        ]

    pools = [
        ("incumbent", [] if incumbent is None else [float(wrap_phase(incumbent))]),
        ("stationary", stationary),
        ("boundary", [float(wrap_phase(b)) for b in boundary]),
        ("grid", list(np.arange(grid_points) * (TWO_PI / grid_points))),
    ]
    angles = np.array([a for _, pool in pools for a in pool])
    sources = [name for name, pool in pools for _ in pool]
    values = np.asarray(objective_p4(angles, coeffs_st, coeffs_j, gamma_sr_th, sigma2_sr))
    if admissible is not None:
        allowed = np.asarray(admissible(angles), dtype=bool)
        if allowed.any():
            values = np.where(allowed, values, np.inf)
    best = int(np.argmin(values))
    if fallback and sources[best] == "grid":
        logger.warning("Jamming step fell back to grid search (B=%g, C=%g).", B, C)
    return JammingStepResult(
        theta_hat=float(angles[best]),
        candidates=pair,
        B=B,
        C=C,
        psi=psi,
        p2=p2,
        q2=q2,
        objective=float(values[best]),
        source=sources[best],
        fallback=fallback,
    )


# SECTION 4: Monitoring optimization
def inertia(t_: int, cfg: SolverConfig) -> float:
    return cfg.w_max - ((cfg.w_max - cfg.w_min) / cfg.t_max) * t_


@dataclasses.dataclass(frozen=True)
class ParticleState:
    position: float
    velocity: float
    fitness: float
    best_position: float
    best_fitness: float


@dataclasses.dataclass(eq=False)
class Swarm:
    """Positions are kept unwrapped during flight; fitness is 2π-periodic."""

    position: np.ndarray
    velocity: np.ndarray
    fitness: np.ndarray
    best_position: np.ndarray
    best_fitness: np.ndarray
    group_position: float
    group_fitness: float
    history: t.List[float] = dataclasses.field(default_factory=list)

    @classmethod
    def initialize(cls, positions: np.ndarray, fitness: t.Callable) -> "Swarm":
        positions = np.asarray(positions, dtype=float)
        values = np.asarray(fitness(positions), dtype=float)
        k = int(np.argmin(values))
        return cls(
            position=positions.copy(),
            velocity=np.zeros_like(positions),
            fitness=values.copy(),
            best_position=positions.copy(),
            best_fitness=values.copy(),
            group_position=float(positions[k]),
            group_fitness=float(values[k]),
            history=[float(values[k])],
        )

    def __len__(self):
        return self.position.size

    def particle(self, k: int) -> ParticleState:
        return ParticleState(
            position=float(self.position[k]),
            velocity=float(self.velocity[k]),
            fitness=float(self.fitness[k]),
            best_position=float(self.best_position[k]),
            best_fitness=float(self.best_fitness[k]),
        )

    def step(self, w: float, cfg: SolverConfig, rng: Rng, fitness: t.Callable) -> None:
        r1, r2 = rng.random(len(self)), rng.random(len(self))
        velocity = (
            w * self.velocity
            + cfg.c1 * r1 * (self.best_position - self.position)
            + cfg.c2 * r2 * (self.group_position - self.position)
        )
        if cfg.wrap_velocity:
            # same displacement modulo 2π
            velocity = np.mod(velocity + np.pi, TWO_PI) - np.pi
        self.velocity = velocity
        self.position = self.position + velocity
        self.fitness = np.asarray(fitness(self.position), dtype=float)
        improved = self.fitness < self.best_fitness
        self.best_position = np.where(improved, self.position, self.best_position)
        self.best_fitness = np.where(improved, self.fitness, self.best_fitness)
        k = int(np.argmin(self.best_fitness))
        if self.best_fitness[k] < self.group_fitness:
            self.group_position = float(self.best_position[k])
            self.group_fitness = float(self.best_fitness[k])
        self.history.append(self.group_fitness)


def run_swarm(
    positions: np.ndarray, problem: ElementProblem, cfg: SolverConfig, rng: Rng
) -> Swarm:
    swarm = Swarm.initialize(positions, problem.fitness)
    for t_ in range(cfg.t_max):
        swarm.step(inertia(t_, cfg), cfg, rng, problem.fitness)
    return swarm


def anchored_positions(theta_hat: float, cfg: SolverConfig, rng: Rng) -> np.ndarray:
    "Particle 0 sits on theta_hat, the rest are jittered around it."
    jitter = rng.uniform(-cfg.init_jitter, cfg.init_jitter, cfg.n_particles)
    jitter[0] = 0.0
    return theta_hat + jitter


def pso_monitoring_step(
    theta_hat: float, problem: ElementProblem, cfg: SolverConfig, rng: Rng
) -> t.Tuple[float, float]:
    swarm = run_swarm(anchored_positions(theta_hat, cfg, rng), problem, cfg, rng)
    return float(wrap_phase(swarm.group_position)), swarm.group_fitness


# SECTION 5: BCD sweep
@dataclasses.dataclass(frozen=True, eq=False)
class SolverResult:
    phi_star: PhaseVector
    p_j_star: float
    p_j_required: float
    monitor_snr: float
    feasible_monitoring: bool
    feasible_jamming: bool
    rounds_used: int
    epsilon_trace: t.Tuple[float, ...] = ()


ElementStep = t.Callable[[ElementProblem, SolverConfig, Rng], float]


def convergence_epsilon(previous: PhaseVector, current: PhaseVector) -> float:
    v0, v1 = previous.v, current.v
    return float(np.sum(np.abs(v1 - v0)) / np.sum(np.abs(v0)))


def finalize(
    ch: ChannelSet,
    scenario: ScenarioConfig,
    phases: PhaseVector,
    epsilon_trace: t.Sequence[float] = (),
) -> SolverResult:
    """Common P_J* and feasibility accounting for every scheme."""
    required = pj_lower_bound(
        ch, phases, scenario.p_st, scenario.gamma_sr_th, scenario.sigma2_sr
    )
    p_j = min(required, scenario.p_j_max)
    metrics = link_metrics(
        ch, phases, scenario.p_st, p_j, scenario.sigma2_sr, scenario.sigma2_m
    )
    return SolverResult(
        phi_star=phases,
        p_j_star=p_j,
        p_j_required=required,
        monitor_snr=metrics.gamma_m,
        feasible_monitoring=metrics.gamma_m >= scenario.gamma_m_th,
        feasible_jamming=required <= scenario.p_j_max,
        rounds_used=len(epsilon_trace),
        epsilon_trace=tuple(epsilon_trace),
    )


def bcd_sweep(
    ch: ChannelSet,
    scenario: ScenarioConfig,
    cfg: SolverConfig,
    rng: Rng,
    step: ElementStep,
    start: t.Optional[PhaseVector] = None,
) -> SolverResult:
    """Cyclic element-wise updates until ε <= eps_th or r_max rounds.

    The jammer direction w̄_J, and with it the J form, is refreshed before every element update.
    """
    phases = PhaseVector.ones(ch.n_elements) if start is None else start
    w_st = mrt_st(ch, scenario.p_st)
    st_form = build_form(FormKind.ST, ch, w_st)
    m_form = build_form(FormKind.M, ch, w_st)
    trace: t.List[float] = []
    for r in range(cfg.r_max):
        round_start = phases
        for ell in range(ch.n_elements):
            w_j_bar = mrt_lj_direction(effective_channels(ch, phases))
            j_form = build_form(FormKind.J, ch, w_st, w_j_bar)
            problem = ElementProblem(
                index=ell,
                theta=float(phases.theta[ell]),
                st=per_element_coeffs(st_form, phases, ell),
                j=per_element_coeffs(j_form, phases, ell),
                m=per_element_coeffs(m_form, phases, ell),
                gamma_sr_th=scenario.gamma_sr_th,
                gamma_m_th=scenario.gamma_m_th,
                sigma2_sr=scenario.sigma2_sr,
                sigma2_m=scenario.sigma2_m,
                c_p=cfg.c_p,
            )
            phases = phases.with_element(ell, step(problem, cfg, rng))
        trace.append(convergence_epsilon(round_start, phases))
        logger.debug("BCD round %d: epsilon=%.3e", r + 1, trace[-1])
        if trace[-1] <= cfg.eps_th:
            break
    return finalize(ch, scenario, phases, trace)


def bcd_pso_step(problem: ElementProblem, cfg: SolverConfig, rng: Rng) -> float:
    theta_hat = problem.jamming_step().theta_hat
    theta, fitness = pso_monitoring_step(theta_hat, problem, cfg, rng)
    if fitness > problem.fitness(problem.theta):
        return problem.theta
    return theta


def solve(
    ch: ChannelSet, scenario: ScenarioConfig, cfg: SolverConfig, rng: Rng
) -> SolverResult:
    return bcd_sweep(ch, scenario, cfg, rng, bcd_pso_step)
