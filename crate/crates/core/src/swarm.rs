//! Simulated-annealing particle swarm search over antenna positions.
//!
//! A particle is a full layout of the K antennas, flattened as
//! `[x_1, y_1, …, x_K, y_K]`. Fitness is the primary rate at a fixed
//! beamformer minus a penalty of `r₁` per antenna pair closer than `d_min`
//! and another `r₁` when the backscatter BER cap is missed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{AntennaPosition, PlacementRegion, ScenarioRealization};
use crate::config::ScenarioConfig;
use crate::error::ModelError;
use crate::linalg::CVector;
use crate::metrics::{rate_at, secondary_ber, secondary_snr, LinkBudget};

/// Temperatures are floored here before entering the acceptance rule.
pub const TEMPERATURE_FLOOR: f64 = 1e-12;

/// Swarm hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaPsoParams {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Penalty per constraint violation, bits.
    pub penalty: f64,
    pub initial_temperature: f64,
    pub d_min: f64,
    pub region: PlacementRegion,
    /// When false the global best only ever moves to a better candidate (plain PSO).
    pub annealing: bool,
}

impl SaPsoParams {
    pub fn from_config(config: &ScenarioConfig, annealing: bool) -> Self {
        Self {
            swarm_size: config.swarm_size,
            max_iterations: config.swarm_iterations,
            inertia: config.inertia,
            cognitive: config.cognitive_factor,
            social: config.social_factor,
            penalty: config.penalty,
            initial_temperature: config.initial_temperature,
            d_min: config.d_min,
            region: config.region(),
            annealing,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best_fitness: f64,
    pub temperature: f64,
    pub iteration: usize,
}

pub fn flatten(positions: &[AntennaPosition]) -> Vec<f64> {
    positions.iter().flat_map(|p| [p.x, p.y]).collect()
}

pub fn unflatten(flat: &[f64]) -> Vec<AntennaPosition> {
    flat.chunks_exact(2)
        .map(|c| AntennaPosition::new(c[0], c[1]))
        .collect()
}

/// Number of unordered antenna pairs closer than `d_min`.
pub fn violation_count(positions: &[AntennaPosition], d_min: f64) -> usize {
    let mut count = 0;
    for (i, p) in positions.iter().enumerate() {
        for q in &positions[i + 1..] {
            if p.distance(q) < d_min {
                count += 1;
            }
        }
    }
    count
}

/// Fitness of one candidate layout, with its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: f64,
    pub rate: f64,
    pub violations: usize,
    pub ber_violated: bool,
}

impl Evaluation {
    /// A smooth, penalty-free evaluation.
    pub fn unconstrained(value: f64) -> Self {
        Self {
            fitness: value,
            rate: value,
            violations: 0,
            ber_violated: false,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violations == 0 && !self.ber_violated
    }
}

/// Rate-minus-penalty objective at a fixed beamformer.
#[derive(Debug, Clone)]
pub struct PositionObjective<'a> {
    pub scenario: &'a ScenarioRealization,
    pub beamformer: &'a CVector,
    pub alpha: f64,
    pub noise: f64,
    pub ber_max: f64,
    pub penalty: f64,
    pub d_min: f64,
}

impl<'a> PositionObjective<'a> {
    pub fn new(
        scenario: &'a ScenarioRealization,
        beamformer: &'a CVector,
        config: &ScenarioConfig,
    ) -> Self {
        Self {
            scenario,
            beamformer,
            alpha: config.reflection_efficiency,
            noise: config.noise_power,
            ber_max: config.ber_max,
            penalty: config.penalty,
            d_min: config.d_min,
        }
    }

    /// Channels re-synthesized at `positions`.
    pub fn link_budget(&self, positions: &[AntennaPosition]) -> LinkBudget {
        LinkBudget {
            h_u: self
                .scenario
                .h_u(positions)
                .expect("scenario links are well formed"),
            h_b: self
                .scenario
                .h_b(positions)
                .expect("scenario links are well formed"),
            h_s: self.scenario.h_s,
            alpha: self.alpha,
            noise: self.noise,
        }
    }

    pub fn evaluate(&self, positions: &[AntennaPosition]) -> Evaluation {
        let lb = self.link_budget(positions);
        let rate = rate_at(&lb, self.beamformer);
        let ber = secondary_ber(secondary_snr(&lb, self.beamformer)).unwrap_or(0.5);
        let violations = violation_count(positions, self.d_min);
        let ber_violated = ber > self.ber_max;
        let penalties = violations + usize::from(ber_violated);
        Evaluation {
            fitness: rate - self.penalty * penalties as f64,
            rate,
            violations,
            ber_violated,
        }
    }
}

/// Fitness of `positions` for beamformer `w` on `scenario`.
pub fn fitness(
    positions: &[AntennaPosition],
    w: &CVector,
    scenario: &ScenarioRealization,
    config: &ScenarioConfig,
) -> f64 {
    PositionObjective::new(scenario, w, config)
        .evaluate(positions)
        .fitness
}

/// Velocity update with explicit random factors `r2`, `r3` ∈ [0, 1].
///
/// Each component is clamped to ± the region extent along its axis.
pub fn update_velocity_with(
    particle: &Particle,
    global_best: &[f64],
    params: &SaPsoParams,
    r2: f64,
    r3: f64,
) -> Vec<f64> {
    let (vx, vy) = (params.region.width(), params.region.height());
    particle
        .velocity
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let p = particle.position[i];
            let next = params.inertia * v
                + params.cognitive * r2 * (particle.best_position[i] - p)
                + params.social * r3 * (global_best[i] - p);
            let cap = if i % 2 == 0 { vx } else { vy };
            next.clamp(-cap, cap)
        })
        .collect()
}

/// Velocity update drawing fresh `r2`, `r3` from `rng`.
pub fn update_velocity<R: Rng + ?Sized>(
    particle: &Particle,
    global_best: &[f64],
    params: &SaPsoParams,
    rng: &mut R,
) -> Vec<f64> {
    let r2: f64 = rng.random();
    let r3: f64 = rng.random();
    update_velocity_with(particle, global_best, params, r2, r3)
}

/// Moves by `velocity` and clamps each coordinate back into the region.
pub fn update_position(position: &[f64], velocity: &[f64], region: &PlacementRegion) -> Vec<f64> {
    position
        .iter()
        .zip(velocity)
        .enumerate()
        .map(|(i, (&p, &v))| {
            let z = p + v;
            let (lo, hi) = if i % 2 == 0 {
                (region.x_min, region.x_max)
            } else {
                (region.y_min, region.y_max)
            };
            if z < lo {
                lo
            } else if z > hi {
                hi
            } else {
                z
            }
        })
        .collect()
}

/// Metropolis probability of moving the global best from `incumbent` to `candidate`.
pub fn acceptance_probability(candidate: f64, incumbent: f64, temperature: f64) -> f64 {
    if candidate >= incumbent {
        1.0
    } else {
        ((candidate - incumbent) / temperature.max(TEMPERATURE_FLOOR)).exp()
    }
}

/// Draws the SA acceptance decision.
pub fn sa_accept<R: Rng + ?Sized>(
    candidate: f64,
    incumbent: f64,
    temperature: f64,
    rng: &mut R,
) -> Result<bool, ModelError> {
    if !(temperature > 0.0) {
        return Err(ModelError::NonPositiveTemperature(temperature));
    }
    if candidate >= incumbent {
        return Ok(true);
    }
    let u: f64 = rng.random();
    Ok(acceptance_probability(candidate, incumbent, temperature) > u)
}

/// `T ← ((Q − q)/Q) T`.
pub fn anneal(temperature: f64, q: usize, max_iterations: usize) -> f64 {
    let q = q.min(max_iterations);
    (max_iterations - q) as f64 / max_iterations as f64 * temperature
}

/// Result of one swarm run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmOutcome {
    /// Best layout ever evaluated (feasible ones dominate through the penalty).
    pub best_positions: Vec<AntennaPosition>,
    pub best: Evaluation,
    /// False when no penalty-free layout was ever evaluated.
    pub feasible: bool,
    /// Whether `r₁` exceeded the best feasible rate, so one penalty outweighs any rate gain.
    pub penalty_dominates: bool,
    /// Global-best fitness after initialization and after each iteration.
    pub global_best_trace: Vec<f64>,
    /// Best-so-far fitness, same indexing.
    pub incumbent_trace: Vec<f64>,
    /// Temperature used in each iteration.
    pub temperature_trace: Vec<f64>,
    pub evaluations: usize,
    pub sa_acceptances: usize,
}

struct Incumbent {
    position: Vec<f64>,
    eval: Evaluation,
}

impl Incumbent {
    fn offer(&mut self, position: &[f64], eval: Evaluation) {
        if eval.fitness > self.eval.fitness {
            self.position.clear();
            self.position.extend_from_slice(position);
            self.eval = eval;
        }
    }
}

/// SA-PSO search for the position objective.
pub fn optimize_positions<R: Rng + ?Sized>(
    objective: &PositionObjective<'_>,
    antennas: usize,
    params: &SaPsoParams,
    initial: Option<&[AntennaPosition]>,
    rng: &mut R,
) -> SwarmOutcome {
    run_sa_pso(|p| objective.evaluate(p), antennas, params, initial, rng)
}

/// SA-PSO over an arbitrary layout fitness.
///
/// Particles start uniformly in the region with zero velocity; when `initial`
/// is given it seeds particle 0. Each iteration moves every particle, updates
/// personal bests, then ranks the swarm: the top particle replaces the global
/// best if it is at least as fit, otherwise (annealing on) a uniformly drawn
/// ranked particle replaces it with the Metropolis probability. The best
/// layout ever evaluated is tracked separately and returned.
pub fn run_sa_pso<F, R>(
    fitness: F,
    antennas: usize,
    params: &SaPsoParams,
    initial: Option<&[AntennaPosition]>,
    rng: &mut R,
) -> SwarmOutcome
where
    F: Fn(&[AntennaPosition]) -> Evaluation,
    R: Rng + ?Sized,
{
    let region = params.region;
    let dim = 2 * antennas;
    let mut evaluations = 0usize;
    let mut eval = |flat: &[f64]| {
        evaluations += 1;
        fitness(&unflatten(flat))
    };

    let mut particles = Vec::with_capacity(params.swarm_size);
    let mut current = Vec::with_capacity(params.swarm_size);
    for s in 0..params.swarm_size {
        let position: Vec<f64> = match (s, initial) {
            (0, Some(layout)) => update_position(&flatten(layout), &vec![0.0; dim], &region),
            _ => (0..dim)
                .map(|i| {
                    if i % 2 == 0 {
                        rng.random_range(region.x_min..=region.x_max)
                    } else {
                        rng.random_range(region.y_min..=region.y_max)
                    }
                })
                .collect(),
        };
        let e = eval(&position);
        current.push(e);
        particles.push(Particle {
            velocity: vec![0.0; dim],
            best_position: position.clone(),
            best_fitness: e.fitness,
            position,
        });
    }

    let top = argmax(&current);
    let mut state = SwarmState {
        global_best_position: particles[top].position.clone(),
        global_best_fitness: current[top].fitness,
        particles,
        temperature: params.initial_temperature,
        iteration: 0,
    };
    let mut incumbent = Incumbent {
        position: state.global_best_position.clone(),
        eval: current[top],
    };
    for (p, e) in state.particles.iter().zip(&current) {
        incumbent.offer(&p.position, *e);
    }

    let mut global_best_trace = vec![state.global_best_fitness];
    let mut incumbent_trace = vec![incumbent.eval.fitness];
    let mut temperature_trace = Vec::with_capacity(params.max_iterations);
    let mut sa_acceptances = 0usize;

    while state.iteration < params.max_iterations {
        let q = state.iteration;
        for (s, particle) in state.particles.iter_mut().enumerate() {
            particle.velocity = update_velocity(particle, &state.global_best_position, params, rng);
            particle.position = update_position(&particle.position, &particle.velocity, &region);
            let e = eval(&particle.position);
            current[s] = e;
            incumbent.offer(&particle.position, e);
            if e.fitness > particle.best_fitness {
                particle.best_fitness = e.fitness;
                particle.best_position = particle.position.clone();
            }
        }

        let mut ranked: Vec<usize> = (0..state.particles.len()).collect();
        ranked.sort_by(|&a, &b| current[b].fitness.total_cmp(&current[a].fitness));
        let leader = ranked[0];
        temperature_trace.push(state.temperature);
        if current[leader].fitness >= state.global_best_fitness {
            state.global_best_fitness = current[leader].fitness;
            state.global_best_position = state.particles[leader].position.clone();
        } else if params.annealing {
            let pick = ranked[rng.random_range(0..ranked.len())];
            let temperature = state.temperature.max(TEMPERATURE_FLOOR);
            let accepted = sa_accept(
                current[pick].fitness,
                state.global_best_fitness,
                temperature,
                rng,
            )
            .expect("temperature is floored above zero");
            if accepted {
                sa_acceptances += 1;
                state.global_best_fitness = current[pick].fitness;
                state.global_best_position = state.particles[pick].position.clone();
            }
        }

        state.temperature = anneal(state.temperature, q, params.max_iterations);
        state.iteration += 1;
        global_best_trace.push(state.global_best_fitness);
        incumbent_trace.push(incumbent.eval.fitness);
    }

    let feasible = incumbent.eval.is_feasible();
    SwarmOutcome {
        best_positions: unflatten(&incumbent.position),
        penalty_dominates: !feasible || params.penalty >= incumbent.eval.rate,
        best: incumbent.eval,
        feasible,
        global_best_trace,
        incumbent_trace,
        temperature_trace,
        evaluations,
        sa_acceptances,
    }
}

fn argmax(evals: &[Evaluation]) -> usize {
    let mut best = 0;
    for (i, e) in evals.iter().enumerate() {
        if e.fitness > evals[best].fitness {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> SaPsoParams {
        SaPsoParams {
            swarm_size: 20,
            max_iterations: 30,
            inertia: 1.2,
            cognitive: 1.4,
            social: 1.4,
            penalty: 50.0,
            initial_temperature: 1.0,
            d_min: 0.05,
            region: PlacementRegion::centered_square(0.3),
            annealing: true,
        }
    }

    fn particle(pos: &[f64], vel: &[f64], best: &[f64]) -> Particle {
        Particle {
            position: pos.to_vec(),
            velocity: vel.to_vec(),
            best_position: best.to_vec(),
            best_fitness: 0.0,
        }
    }

    #[test]
    fn violation_examples() {
        assert_eq!(violation_count(&[AntennaPosition::ORIGIN], 0.05), 0);
        assert_eq!(violation_count(&[AntennaPosition::ORIGIN; 2], 0.05), 1);
        let cluster = [
            AntennaPosition::new(0.0, 0.0),
            AntennaPosition::new(0.01, 0.0),
            AntennaPosition::new(0.0, 0.01),
            AntennaPosition::new(0.01, 0.01),
        ];
        assert_eq!(violation_count(&cluster, 0.05), 6);
        // exactly d_min apart is allowed
        let pair = [
            AntennaPosition::new(0.0, 0.0),
            AntennaPosition::new(0.05, 0.0),
        ];
        assert_eq!(violation_count(&pair, 0.05), 0);
    }

    #[test]
    fn velocity_fixed_point_and_pure_inertia() {
        let p = params();
        let at_best = particle(&[0.01, -0.02], &[0.0, 0.0], &[0.01, -0.02]);
        assert_eq!(
            update_velocity_with(&at_best, &[0.01, -0.02], &p, 0.7, 0.3),
            vec![0.0, 0.0]
        );

        let drift = SaPsoParams {
            inertia: 1.0,
            cognitive: 0.0,
            social: 0.0,
            ..p
        };
        let moving = particle(&[0.0, 0.0], &[0.02, -0.01], &[0.1, 0.1]);
        assert_eq!(
            update_velocity_with(&moving, &[-0.1, 0.1], &drift, 0.9, 0.9),
            vec![0.02, -0.01]
        );
    }

    #[test]
    fn velocity_replay_with_pinned_randoms() {
        let p = params();
        let pa = particle(&[0.02, -0.03], &[0.01, 0.005], &[0.05, 0.0]);
        let v = update_velocity_with(&pa, &[-0.04, 0.06], &p, 1.0, 1.0);
        // 1.2*0.01 + 1.4*(0.05-0.02) + 1.4*(-0.04-0.02) = 0.012 + 0.042 - 0.084
        assert!((v[0] - (-0.03)).abs() < 1e-15);
        // 1.2*0.005 + 1.4*(0.0+0.03) + 1.4*(0.06+0.03) = 0.006 + 0.042 + 0.126
        assert!((v[1] - 0.174).abs() < 1e-15);
    }

    #[test]
    fn velocity_is_clamped_to_region_extent() {
        let p = params();
        let pa = particle(&[0.15, -0.15], &[-0.3, 0.3], &[0.15, -0.15]);
        let v = update_velocity_with(&pa, &[-0.15, 0.15], &p, 1.0, 1.0);
        assert_eq!(v, vec![-0.3, 0.3]);
    }

    #[test]
    fn position_clamping() {
        let r = PlacementRegion::centered_square(0.3);
        assert_eq!(
            update_position(&[0.0, 0.01], &[0.05, -0.02], &r),
            vec![0.05, 0.01 - 0.02]
        );
        assert_eq!(
            update_position(&[-0.1, 0.0], &[-0.2, 0.0], &r),
            vec![-0.15, 0.0]
        );
        assert_eq!(
            update_position(&[0.1, 0.1], &[0.2, 0.2], &r),
            vec![0.15, 0.15]
        );
    }

    #[test]
    fn acceptance_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(sa_accept(1.0, 1.0, 0.5, &mut rng).unwrap());
            assert!(sa_accept(2.0, 1.0, 1e-9, &mut rng).unwrap());
        }
        assert!(acceptance_probability(0.0, 1.0, 1e-6) < 1e-300);
        assert!(acceptance_probability(0.0, 1.0, 0.0) == 0.0);
        assert!(sa_accept(0.0, 1.0, 0.0, &mut rng).is_err());
        assert!(sa_accept(0.0, 1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn anneal_schedule() {
        assert_eq!(anneal(1.0, 0, 150), 1.0);
        assert_eq!(anneal(1.0, 150, 150), 0.0);
        assert_eq!(anneal(1.0, 75, 150), 0.5);
        assert_eq!(anneal(2.0, 30, 60), 1.0);
    }

    #[test]
    fn single_antenna_smooth_fitness() {
        let p = SaPsoParams {
            swarm_size: 15,
            max_iterations: 40,
            ..params()
        };
        let bowl = |pos: &[AntennaPosition]| {
            let q = pos[0];
            Evaluation::unconstrained(-((q.x - 0.03).powi(2) + (q.y + 0.07).powi(2)))
        };
        let out = run_sa_pso(bowl, 1, &p, None, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(out.best.fitness >= out.incumbent_trace[0]);
        assert!(out.best.fitness > -1e-4);
        assert_eq!(out.evaluations, 15 * 41);
        assert_eq!(out.temperature_trace.len(), 40);
        for w in out.incumbent_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let again = run_sa_pso(bowl, 1, &p, None, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(out, again);
    }

    #[test]
    fn plain_pso_global_best_never_drops() {
        let p = SaPsoParams {
            annealing: false,
            ..params()
        };
        let bumpy = |pos: &[AntennaPosition]| {
            let q = pos[0];
            Evaluation::unconstrained((40.0 * q.x).sin() * (30.0 * q.y).cos() - q.x * q.x)
        };
        let out = run_sa_pso(bumpy, 1, &p, None, &mut ChaCha8Rng::seed_from_u64(8));
        for w in out.global_best_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(out.sa_acceptances, 0);
    }

    #[test]
    fn seeded_layout_is_never_lost() {
        let p = params();
        let layout = [
            AntennaPosition::new(0.1, 0.1),
            AntennaPosition::new(-0.1, -0.1),
        ];
        // only the seeded layout scores well
        let spike = move |pos: &[AntennaPosition]| {
            let d: f64 = pos.iter().zip(&layout).map(|(a, b)| a.distance(b)).sum();
            Evaluation::unconstrained(if d < 1e-12 { 10.0 } else { -d })
        };
        let out = run_sa_pso(
            spike,
            2,
            &p,
            Some(&layout),
            &mut ChaCha8Rng::seed_from_u64(2),
        );
        assert_eq!(out.best.fitness, 10.0);
        assert_eq!(out.best_positions, layout.to_vec());
    }
}
