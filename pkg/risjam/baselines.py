"""
Comparison schemes. Every iterative scheme reuses the BCD element sweep from solver.py and differs only in
how one element's phase is chosen.
"""

import logging
import math
import typing as t
from enum import Enum

import numpy as np

from risjam.beamforming import TWO_PI, PhaseVector, wrap_phase
from risjam.forms import PerElementCoeffs
from risjam.geometry import ChannelSet, Rng, ScenarioConfig
from risjam.solver import (
    ElementProblem,
    ElementStep,
    SAConfig,
    SolverConfig,
    SolverResult,
    bcd_pso_step,
    bcd_sweep,
    finalize,
    run_swarm,
)

logger = logging.getLogger(__name__)

Arc = t.Tuple[float, float]
ARC_TOL = 1e-12


class SchemeId(Enum):
    BCD_PSO = 0
    PSO = 1
    SA = 2
    PSO_DOMAIN = 3
    BCD_DOMAIN = 4
    BCD_SA = 5
    RANDOM_PHASE = 6
    WITHOUT_RIS = 7

    @classmethod
    def parse(cls, text: str) -> "SchemeId":
        key = text.strip().upper().replace("-", "_").replace(" ", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(
                f"Unknown scheme {text!r}; expected one of {', '.join(s.name for s in cls)}."
            ) from None

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    SchemeId.BCD_PSO: "BCD-PSO",
    SchemeId.PSO: "PSO",
    SchemeId.SA: "SA",
    SchemeId.PSO_DOMAIN: "PSO-Domain",
    SchemeId.BCD_DOMAIN: "BCD-Domain",
    SchemeId.BCD_SA: "BCD-SA",
    SchemeId.RANDOM_PHASE: "Random Phase",
    SchemeId.WITHOUT_RIS: "Without RIS",
}


# SECTION 1: Monitoring-feasible arcs
def feasible_intervals(
    coeffs_m: PerElementCoeffs, gamma_m_th: float, sigma2_m: float
) -> t.List[Arc]:
    """Arcs of θ in [0, 2π] where ρ_M cos(θ + θ_M) + β_M >= σ_M² γ_M,th."""
    rhs = sigma2_m * gamma_m_th - coeffs_m.beta
    if coeffs_m.rho == 0:
        return [(0.0, TWO_PI)] if rhs <= 0 else []
    tau = rhs / coeffs_m.rho
    if tau <= -1:
        return [(0.0, TWO_PI)]
    if tau > 1:
        return []
    half = math.acos(tau)
    center = float(wrap_phase(-coeffs_m.phase))
    lo, hi = center - half, center + half
    if lo < 0:
        return [(0.0, hi), (lo + TWO_PI, TWO_PI)]
    if hi > TWO_PI:
        return [(0.0, hi - TWO_PI), (lo, TWO_PI)]
    return [(lo, hi)]


def in_intervals(theta, arcs: t.Sequence[Arc]) -> np.ndarray:
    theta = wrap_phase(np.asarray(theta, dtype=float))
    inside = np.zeros(theta.shape, dtype=bool)
    for lo, hi in arcs:
        inside |= (theta >= lo - ARC_TOL) & (theta <= hi + ARC_TOL)
    return inside


def arc_endpoints(arcs: t.Sequence[Arc]) -> t.List[float]:
    return [end for arc in arcs for end in arc]


def sample_intervals(arcs: t.Sequence[Arc], rng: Rng, size: int) -> np.ndarray:
    "Uniform over the union of arcs."
    lengths = np.array([hi - lo for lo, hi in arcs])
    if lengths.sum() <= 0:
        # touching threshold: single feasible angle
        return np.full(size, arcs[0][0])
    pick = rng.choice(len(arcs), size=size, p=lengths / lengths.sum())
    lo = np.array([arcs[i][0] for i in pick])
    return lo + rng.random(size) * lengths[pick]


# SECTION 2: Simulated annealing
def metropolis_accept(delta: float, temperature: float, rng: Rng) -> bool:
    if delta <= 0:
        return True
    return bool(rng.random() < math.exp(-delta / temperature))


def anneal(
    fitness: t.Callable[[float], float], start: float, cfg: SAConfig, rng: Rng
) -> t.Tuple[float, float]:
    """Geometric cooling from initial_temperature down to min_temperature; returns the best point visited."""
    x, fx = start, float(fitness(start))
    best_x, best_f = x, fx
    temperature = cfg.initial_temperature
    while temperature >= cfg.min_temperature:
        for _ in range(cfg.steps_per_temperature):
            candidate = x + rng.uniform(-cfg.proposal_width, cfg.proposal_width)
            fc = float(fitness(candidate))
            if metropolis_accept(fc - fx, temperature, rng):
                x, fx = candidate, fc
                if fx < best_f:
                    best_x, best_f = x, fx
        temperature *= cfg.cooling_ratio
    return float(wrap_phase(best_x)), best_f


# SECTION 3: Per-element steps
def _swarm_best(positions: np.ndarray, problem: ElementProblem, cfg: SolverConfig, rng: Rng):
    swarm = run_swarm(positions, problem, cfg, rng)
    return float(wrap_phase(swarm.group_position))


def pso_step(problem: ElementProblem, cfg: SolverConfig, rng: Rng) -> float:
    return _swarm_best(rng.uniform(0.0, TWO_PI, cfg.n_particles), problem, cfg, rng)


def pso_domain_step(problem: ElementProblem, cfg: SolverConfig, rng: Rng) -> float:
    arcs = feasible_intervals(problem.m, problem.gamma_m_th, problem.sigma2_m)
    if arcs:
        positions = sample_intervals(arcs, rng, cfg.n_particles)
    else:
        logger.warning(
            "Element %d has no monitoring-feasible phase; sampling the full circle.",
            problem.index,
        )
        positions = rng.uniform(0.0, TWO_PI, cfg.n_particles)
    return _swarm_best(positions, problem, cfg, rng)


def bcd_domain_step(problem: ElementProblem, cfg: SolverConfig, rng: Rng) -> float:
    arcs = feasible_intervals(problem.m, problem.gamma_m_th, problem.sigma2_m)
    if not arcs:
        return problem.jamming_step().theta_hat
    return problem.jamming_step(
        admissible=lambda x: in_intervals(x, arcs), boundary=arc_endpoints(arcs)
    ).theta_hat


def sa_step(problem: ElementProblem, cfg: SolverConfig, rng: Rng) -> float:
    return anneal(problem.fitness, rng.uniform(0.0, TWO_PI), cfg.sa, rng)[0]


def bcd_sa_step(problem: ElementProblem, cfg: SolverConfig, rng: Rng) -> float:
    return anneal(problem.fitness, problem.jamming_step().theta_hat, cfg.sa, rng)[0]


ELEMENT_STEPS: t.Dict[SchemeId, ElementStep] = {
    SchemeId.BCD_PSO: bcd_pso_step,
    SchemeId.PSO: pso_step,
    SchemeId.SA: sa_step,
    SchemeId.PSO_DOMAIN: pso_domain_step,
    SchemeId.BCD_DOMAIN: bcd_domain_step,
    SchemeId.BCD_SA: bcd_sa_step,
}


# SECTION 4: Dispatch
def scheme_channels(scheme: SchemeId, ch: ChannelSet) -> ChannelSet:
    "The channels a scheme actually sees."
    return ch.without_ris() if scheme is SchemeId.WITHOUT_RIS else ch


def solve_scheme(
    scheme: SchemeId,
    ch: ChannelSet,
    scenario: ScenarioConfig,
    cfg: SolverConfig,
    rng: Rng,
) -> SolverResult:
    if not isinstance(scheme, SchemeId):
        raise ValueError(f"Unknown scheme {scheme!r}.")
    if scheme is SchemeId.RANDOM_PHASE:
        return finalize(ch, scenario, PhaseVector.random(ch.n_elements, rng))
    if scheme is SchemeId.WITHOUT_RIS:
        return finalize(scheme_channels(scheme, ch), scenario, PhaseVector.ones(ch.n_elements))
    return bcd_sweep(ch, scenario, cfg, rng, ELEMENT_STEPS[scheme])
