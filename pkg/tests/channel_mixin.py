import math
from unittest import TestCase

import numpy as np

from risjam import (
    ChannelSet,
    ElementProblem,
    PerElementCoeffs,
    PhaseVector,
    SAConfig,
    ScenarioConfig,
    SolverConfig,
    complex_gaussian,
    generate_channel_set,
    place_monitor_and_jammers,
)


def angular_distance(a: float, b: float) -> float:
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


class Channels(TestCase):
    seed = 20240501

    @property
    def rng(self) -> np.random.Generator:
        if not hasattr(self, "_rng"):
            self._rng = np.random.default_rng(self.seed)
        return self._rng

    @property
    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(m_t=2, n_elements=4, k_jammers=2)

    @property
    def fast_solver(self) -> SolverConfig:
        return SolverConfig(
            r_max=3,
            t_max=10,
            n_particles=5,
            sa=SAConfig(cooling_ratio=0.5, min_temperature=0.01, steps_per_temperature=3),
        )

    def channels(self, scenario: ScenarioConfig = None, seed: int = None) -> ChannelSet:
        "Channels drawn from the scenario geometry."
        scenario = scenario if scenario is not None else self.scenario
        rng = np.random.default_rng(seed) if seed is not None else self.rng
        lm, ljs = place_monitor_and_jammers(rng, scenario)
        return generate_channel_set(rng, scenario, lm, ljs)

    def unit_channels(self, n: int = 4, m_t: int = 2, k: int = 2) -> ChannelSet:
        "CN(0, 1) entries, no path loss."
        g = lambda rows, cols: complex_gaussian(self.rng, rows, cols)
        return ChannelSet(
            H_TI=g(m_t, n),
            h_IR=g(n, 1)[:, 0],
            H_KI=g(n, k),
            h_IM=g(n, 1)[:, 0],
            h_TM=g(1, m_t)[0],
            h_TR=g(1, m_t)[0],
            h_KR=g(1, k)[0],
        )

    def random_phases(self, n: int = 4) -> PhaseVector:
        return PhaseVector.random(n, self.rng)

    def random_coeffs(self, margin: float = 0.1) -> PerElementCoeffs:
        "Coefficients of a nonnegative sinusoid, beta >= rho + margin."
        rho = self.rng.uniform(0.0, 3.0)
        phase = self.rng.uniform(0.0, 2 * math.pi)
        beta = rho + margin + self.rng.uniform(0.0, 2.0)
        return PerElementCoeffs(alpha=complex(rho * np.exp(1j * phase)), beta=float(beta))

    def element_problem(self, m: PerElementCoeffs = None, **changes) -> ElementProblem:
        params = dict(
            index=0,
            theta=0.0,
            st=self.random_coeffs(),
            j=self.random_coeffs(),
            m=m if m is not None else PerElementCoeffs(0j, 10.0),
            gamma_sr_th=1.0,
            gamma_m_th=1.0,
            sigma2_sr=0.05,
            sigma2_m=1.0,
            c_p=1e6,
        )
        params.update(changes)
        return ElementProblem(**params)
