import math
from unittest import main

import numpy as np

from risjam import (
    FormKind,
    PerElementCoeffs,
    PhaseVector,
    SchemeId,
    SolverConfig,
    Swarm,
    bcd_pso_step,
    build_form,
    convergence_epsilon,
    effective_channels,
    inertia,
    jamming_step,
    link_metrics,
    mrt_lj_direction,
    mrt_st,
    objective_p4,
    per_element_coeffs,
    pj_lower_bound,
    pso_fitness,
    pso_monitoring_step,
    run_swarm,
    solve,
    solve_scheme,
    unit_modulus_violation,
)

from .channel_mixin import Channels, angular_distance

TWO_PI = 2 * math.pi


class TestObjective(Channels):
    def test_constant_without_coupling(self):
        st, j = PerElementCoeffs(0j, 3.0), PerElementCoeffs(0j, 2.0)
        values = objective_p4(np.linspace(0, TWO_PI, 7), st, j, 0.5, 0.2)
        np.testing.assert_allclose(values, (3.0 - 0.2 * 0.5) / (0.5 * 2.0))

    def test_periodic(self):
        st, j = self.random_coeffs(), self.random_coeffs()
        for th in self.rng.uniform(0, TWO_PI, 10):
            self.assertAlmostEqual(
                objective_p4(th, st, j, 0.1, 0.01),
                objective_p4(th + TWO_PI, st, j, 0.1, 0.01),
                places=12,
            )

    def test_matches_channels(self):
        sc = self.scenario
        ch = self.channels()
        phi = self.random_phases()
        w_st = mrt_st(ch, sc.p_st)
        w_j_bar = mrt_lj_direction(effective_channels(ch, phi))
        ell = 2
        st = per_element_coeffs(build_form(FormKind.ST, ch, w_st), phi, ell)
        j = per_element_coeffs(build_form(FormKind.J, ch, w_st, w_j_bar), phi, ell)
        for th in np.linspace(0, TWO_PI, 256, endpoint=False):
            eff = effective_channels(ch, phi.with_element(ell, th))
            signal = abs(eff.h_s @ w_st) ** 2
            jam = abs(eff.h_i @ w_j_bar.conj()) ** 2
            expected = (signal - sc.sigma2_sr * sc.gamma_sr_th) / (sc.gamma_sr_th * jam)
            value = objective_p4(th, st, j, sc.gamma_sr_th, sc.sigma2_sr)
            self.assertLessEqual(abs(value / expected - 1), 1e-8)

    def test_bad_denominator(self):
        with self.assertRaises(ValueError):
            objective_p4(0.0, self.random_coeffs(), PerElementCoeffs(0j, 0.0), 0.1, 0.01)


class TestJammingStep(Channels):
    def test_alignment(self):
        j = PerElementCoeffs(alpha=complex(0.8 * np.exp(1.1j)), beta=1.5)
        result = jamming_step(PerElementCoeffs(0j, 2.0), j, 1.0, 0.1)
        self.assertLess(angular_distance(result.theta_hat, -1.1), 1e-9)

    def test_grid_oracle(self):
        grid = np.linspace(0, TWO_PI, 8192, endpoint=False)
        for _ in range(500):
            st, j = self.random_coeffs(), self.random_coeffs()
            gamma, sigma2 = self.rng.uniform(0.05, 2.0), self.rng.uniform(0.0, 0.5)
            result = jamming_step(st, j, gamma, sigma2)
            best = float(np.min(objective_p4(grid, st, j, gamma, sigma2)))
            self.assertLessEqual(result.objective, best + 1e-6 * max(1.0, abs(best)))
            self.assertAlmostEqual(
                result.objective, objective_p4(result.theta_hat, st, j, gamma, sigma2)
            )
            self.assertFalse(result.fallback)

    def test_candidates(self):
        st, j = self.random_coeffs(), self.random_coeffs()
        result = jamming_step(st, j, 0.5, 0.1)
        for c in result.candidates:
            self.assertTrue(0 <= c < TWO_PI)
        self.assertTrue(0 <= result.theta_hat < TWO_PI)
        self.assertLessEqual(abs(result.B), result.C)

    def test_stationary_condition(self):
        st, j = self.random_coeffs(), self.random_coeffs()
        gamma, sigma2 = 0.3, 0.05
        result = jamming_step(st, j, gamma, sigma2)
        self.assertEqual(result.source, "stationary")
        h = 1e-6
        slope = (
            objective_p4(result.theta_hat + h, st, j, gamma, sigma2)
            - objective_p4(result.theta_hat - h, st, j, gamma, sigma2)
        ) / (2 * h)
        self.assertAlmostEqual(slope, 0.0, places=5)
        self.assertAlmostEqual(
            result.B + result.C * math.sin(result.theta_hat + result.psi), 0.0, places=9
        )

    def test_flat_objective(self):
        st = PerElementCoeffs(alpha=complex(2 * np.exp(0.7j)), beta=4.0)
        j = PerElementCoeffs(alpha=complex(np.exp(0.7j)), beta=2.0)
        result = jamming_step(st, j, 1.0, 0.0)
        self.assertAlmostEqual(result.objective, 2.0, places=10)
        self.assertTrue(result.fallback)
        self.assertTrue(0 <= result.theta_hat < TWO_PI)

    def test_never_worse_than_incumbent(self):
        for _ in range(100):
            st, j = self.random_coeffs(), self.random_coeffs()
            incumbent = self.rng.uniform(0, TWO_PI)
            result = jamming_step(st, j, 0.2, 0.1, incumbent=incumbent)
            self.assertLessEqual(
                result.objective, objective_p4(incumbent, st, j, 0.2, 0.1) + 1e-9
            )

    def test_incumbent_just_below_zero(self):
        st, j = self.random_coeffs(), self.random_coeffs()
        at_zero = lambda x: np.asarray(x) == 0.0
        result = jamming_step(st, j, 0.2, 0.1, incumbent=-1e-17, admissible=at_zero)
        self.assertEqual(result.source, "incumbent")
        self.assertEqual(result.theta_hat, 0.0)

    def test_admissible(self):
        st, j = self.random_coeffs(), self.random_coeffs()
        allowed = lambda x: np.mod(x, TWO_PI) <= 1.0
        result = jamming_step(st, j, 0.2, 0.1, admissible=allowed, boundary=[0.0, 1.0])
        self.assertLessEqual(result.theta_hat, 1.0)
        nothing = jamming_step(st, j, 0.2, 0.1, admissible=lambda x: np.zeros(np.shape(x), bool))
        free = jamming_step(st, j, 0.2, 0.1)
        self.assertEqual(nothing.theta_hat, free.theta_hat)


class TestFitness(Channels):
    def setUp(self):
        self.st, self.j = self.random_coeffs(), self.random_coeffs()
        # feasible where cos(x) >= 0.5
        self.m = PerElementCoeffs(alpha=1 + 0j, beta=1.0)

    def fitness(self, x, c_p=1e6):
        return pso_fitness(x, self.st, self.j, self.m, 0.2, 1.5, 0.1, 1.0, c_p)

    def test_feasible(self):
        self.assertEqual(self.fitness(0.0), objective_p4(0.0, self.st, self.j, 0.2, 0.1))

    def test_infeasible(self):
        self.assertAlmostEqual(
            self.fitness(math.pi), objective_p4(math.pi, self.st, self.j, 0.2, 0.1) + 1e6
        )

    def test_penalty_dominates(self):
        self.assertLess(self.fitness(0.0), self.fitness(math.pi))
        self.assertLess(5.0 + 0.0, -100.0 + 1e6)

    def test_vectorized(self):
        x = np.array([0.0, math.pi])
        np.testing.assert_allclose(self.fitness(x), [self.fitness(0.0), self.fitness(math.pi)])


class TestInertia(Channels):
    def test_schedule(self):
        cfg = SolverConfig(t_max=80, w_min=0.1, w_max=2.1)
        self.assertEqual(inertia(0, cfg), 2.1)
        self.assertAlmostEqual(inertia(80, cfg), 0.1)
        self.assertAlmostEqual(inertia(40, cfg), 1.1)


class TestSwarm(Channels):
    def test_frozen_swarm(self):
        problem = self.element_problem()
        cfg = SolverConfig(n_particles=1, c1=0.0, c2=0.0, t_max=30)
        theta, fitness = pso_monitoring_step(1.0, problem, cfg, self.rng)
        self.assertAlmostEqual(theta, 1.0)
        self.assertAlmostEqual(fitness, problem.fitness(1.0), places=9)

    def test_never_worse_than_start(self):
        m = PerElementCoeffs(alpha=1 + 0j, beta=1.0)
        for _ in range(20):
            problem = self.element_problem(m=m, gamma_m_th=1.5)
            theta_hat = self.rng.uniform(0, TWO_PI)
            _, fitness = pso_monitoring_step(theta_hat, problem, SolverConfig(t_max=20), self.rng)
            self.assertLessEqual(fitness, problem.fitness(theta_hat) + 1e-9)

    def test_group_best_history(self):
        problem = self.element_problem()
        positions = self.rng.uniform(0, TWO_PI, 10)
        swarm = run_swarm(positions, problem, SolverConfig(t_max=40), self.rng)
        self.assertEqual(len(swarm.history), 41)
        self.assertTrue(all(b <= a for a, b in zip(swarm.history, swarm.history[1:])))
        self.assertEqual(swarm.history[-1], swarm.group_fitness)
        particle = swarm.particle(3)
        self.assertLessEqual(particle.best_fitness, particle.fitness)

    def test_initialize(self):
        problem = self.element_problem()
        positions = np.array([0.5, 1.5, 2.5])
        swarm = Swarm.initialize(positions, problem.fitness)
        self.assertEqual(len(swarm), 3)
        np.testing.assert_array_equal(swarm.velocity, 0.0)
        k = int(np.argmin(problem.fitness(positions)))
        self.assertEqual(swarm.group_position, positions[k])

    def test_velocity_wrapped(self):
        problem = self.element_problem()
        swarm = run_swarm(self.rng.uniform(0, TWO_PI, 8), problem, SolverConfig(t_max=5), self.rng)
        self.assertTrue(np.all(np.abs(swarm.velocity) <= math.pi + 1e-12))

    def test_finds_unconstrained_minimum(self):
        st = PerElementCoeffs(alpha=complex(np.exp(0.3j)), beta=2.0)
        j = PerElementCoeffs(alpha=complex(0.8 * np.exp(2.0j)), beta=1.5)
        problem = self.element_problem(st=st, j=j, gamma_sr_th=1.0, sigma2_sr=0.1)
        optimum = jamming_step(st, j, 1.0, 0.1).theta_hat
        cfg = SolverConfig()
        hits = 0
        for seed in range(100):
            theta, _ = pso_monitoring_step(
                optimum + 1.0, problem, cfg, np.random.default_rng(seed)
            )
            hits += angular_distance(theta, optimum) <= 1e-2
        self.assertGreaterEqual(hits, 90)

    def test_acceptance_guard(self):
        # every particle lands in the penalized region except the incumbent
        m = PerElementCoeffs(alpha=1 + 0j, beta=1.0)
        problem = self.element_problem(m=m, gamma_m_th=1.999, theta=0.0)
        cfg = SolverConfig(n_particles=3, t_max=3, init_jitter=0.5)
        theta = bcd_pso_step(problem, cfg, self.rng)
        self.assertTrue(problem.feasible(theta))
        self.assertLessEqual(problem.fitness(theta), problem.fitness(0.0))


class TestSolve(Channels):
    def test_identical_vectors(self):
        phi = self.random_phases()
        self.assertEqual(convergence_epsilon(phi, phi), 0.0)

    def test_epsilon(self):
        before = PhaseVector.ones(2)
        after = PhaseVector([math.pi, 0.0])
        self.assertAlmostEqual(convergence_epsilon(before, after), 1.0)

    def test_disconnected_ris(self):
        sc = self.scenario
        ch = self.channels()
        result = solve(ch.without_ris(), sc, self.fast_solver, self.rng)
        expected = solve_scheme(SchemeId.WITHOUT_RIS, ch, sc, self.fast_solver, self.rng)
        self.assertEqual(result.epsilon_trace, (0.0,))
        self.assertEqual(result.rounds_used, 1)
        self.assertEqual(result.p_j_star, expected.p_j_star)

    def test_small_instance(self):
        base = self.scenario
        ch = self.channels(seed=99)
        ones = PhaseVector.ones(base.n_elements)
        gamma_m_ones = link_metrics(ch, ones, base.p_st, 0.0, base.sigma2_sr, base.sigma2_m).gamma_m
        sc = base.replace(gamma_m_th=0.5 * gamma_m_ones)
        p_j_ones = pj_lower_bound(ch, ones, sc.p_st, sc.gamma_sr_th, sc.sigma2_sr)
        cfg = SolverConfig(r_max=10, t_max=40)
        result = solve(ch, sc, cfg, np.random.default_rng(1))
        self.assertLessEqual(result.p_j_star, p_j_ones * (1 + 1e-9) + 1e-15)
        self.assertTrue(result.feasible_monitoring)
        self.assertGreaterEqual(result.monitor_snr, sc.gamma_m_th)
        self.assertLessEqual(unit_modulus_violation(result.phi_star), 1e-12)
        self.assertEqual(len(result.epsilon_trace), result.rounds_used)
        self.assertLessEqual(result.rounds_used, cfg.r_max)
        self.assertTrue(all(math.isfinite(e) for e in result.epsilon_trace))

    def test_deterministic(self):
        ch = self.channels(seed=3)
        a = solve(ch, self.scenario, self.fast_solver, np.random.default_rng(8))
        b = solve(ch, self.scenario, self.fast_solver, np.random.default_rng(8))
        np.testing.assert_array_equal(a.phi_star.theta, b.phi_star.theta)
        self.assertEqual(a.p_j_star, b.p_j_star)
        self.assertEqual(a.epsilon_trace, b.epsilon_trace)

    def test_power_cap(self):
        ch = self.channels(seed=4)
        sc = self.scenario.replace(p_j_max=1e-9)
        result = solve(ch, sc, self.fast_solver, self.rng)
        self.assertFalse(result.feasible_jamming)
        self.assertEqual(result.p_j_star, 1e-9)
        self.assertGreater(result.p_j_required, 1e-9)


if __name__ == "__main__":
    main()  # pragma: no cover
