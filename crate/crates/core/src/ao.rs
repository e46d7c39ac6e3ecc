//! Alternating beamforming / antenna-position optimization.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beamforming::{sca_optimize, BeamSolution, ScaTrace};
use crate::channel::{AntennaPosition, ScenarioRealization};
use crate::config::ScenarioConfig;
use crate::error::SolverError;
use crate::linalg::CVector;
use crate::metrics::{min_snr_for_ber, rate_at, secondary_ber, secondary_snr, LinkBudget};
use crate::swarm::{
    run_sa_pso, violation_count, Evaluation, PositionObjective, SaPsoParams, SwarmOutcome,
};

pub const MAX_OUTER_ITERATIONS: usize = 20;

/// Relative shortfall allowed on the power budget.
pub const POWER_TOLERANCE: f64 = 1e-8;
pub const BER_TOLERANCE: f64 = 1e-6;
/// Meters.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// Constraint margins of a candidate solution; non-negative means satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `P_max − ‖w‖²`, watts.
    pub power_margin: f64,
    /// `e_max − e_c`.
    pub ber_margin: f64,
    /// Smallest distance of any coordinate to its region bound, meters.
    pub region_margin: f64,
    /// Smallest pairwise distance minus `d_min`; `None` for a single antenna.
    pub spacing_margin: Option<f64>,
    pub rate: f64,
    pub ber: f64,
}

impl FeasibilityReport {
    pub fn satisfied(&self, p_max: f64) -> bool {
        self.power_margin >= -POWER_TOLERANCE * p_max
            && self.ber_margin >= -BER_TOLERANCE
            && self.region_margin >= 0.0
            && self.spacing_margin.is_none_or(|m| m >= -SPACING_TOLERANCE)
    }
}

pub fn link_budget(
    scenario: &ScenarioRealization,
    positions: &[AntennaPosition],
    config: &ScenarioConfig,
) -> LinkBudget {
    LinkBudget {
        h_u: scenario
            .h_u(positions)
            .expect("scenario links are well formed"),
        h_b: scenario
            .h_b(positions)
            .expect("scenario links are well formed"),
        h_s: scenario.h_s,
        alpha: config.reflection_efficiency,
        noise: config.noise_power,
    }
}

/// Audits a (beamformer, layout) pair against the full constraint set.
pub fn evaluate_solution(
    w: &CVector,
    positions: &[AntennaPosition],
    scenario: &ScenarioRealization,
    config: &ScenarioConfig,
) -> FeasibilityReport {
    let lb = link_budget(scenario, positions, config);
    let ber = secondary_ber(secondary_snr(&lb, w)).unwrap_or(0.5);
    let region = config.region();
    let region_margin = positions
        .iter()
        .map(|&p| region.margin(p))
        .fold(f64::INFINITY, f64::min);
    let mut min_distance: Option<f64> = None;
    for (i, p) in positions.iter().enumerate() {
        for q in &positions[i + 1..] {
            let d = p.distance(q);
            min_distance = Some(min_distance.map_or(d, |m| m.min(d)));
        }
    }
    FeasibilityReport {
        power_margin: config.p_max - w.norm_squared(),
        ber_margin: config.ber_max - ber,
        region_margin,
        spacing_margin: min_distance.map(|d| d - config.d_min),
        rate: rate_at(&lb, w),
        ber,
    }
}

/// Centered square grid with spacing `max(d_min, side/⌈√K⌉)`.
pub fn initial_positions(antennas: usize, config: &ScenarioConfig) -> Vec<AntennaPosition> {
    let cols = (antennas as f64).sqrt().ceil() as usize;
    let rows = antennas.div_ceil(cols);
    let spacing = config.d_min.max(config.region_side / cols as f64);
    let offset = |n: usize, i: usize| (i as f64 - (n as f64 - 1.0) / 2.0) * spacing;
    (0..antennas)
        .map(|k| AntennaPosition::new(offset(cols, k % cols), offset(rows, k / cols)))
        .collect()
}

/// Knobs that distinguish the compared schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoOptions {
    /// SA-gated global best (true) or plain PSO (false).
    pub annealing: bool,
    /// When false the layout stays at its starting point.
    pub move_antennas: bool,
    pub max_outer_iterations: usize,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self {
            annealing: true,
            move_antennas: true,
            max_outer_iterations: MAX_OUTER_ITERATIONS,
        }
    }
}

/// Compressed record of one swarm run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmSummary {
    pub global_best_trace: Vec<f64>,
    pub incumbent_trace: Vec<f64>,
    pub evaluations: usize,
    pub sa_acceptances: usize,
    pub feasible: bool,
    pub penalty_dominates: bool,
}

impl From<&SwarmOutcome> for SwarmSummary {
    fn from(o: &SwarmOutcome) -> Self {
        Self {
            global_best_trace: o.global_best_trace.clone(),
            incumbent_trace: o.incumbent_trace.clone(),
            evaluations: o.evaluations,
            sa_acceptances: o.sa_acceptances,
            feasible: o.feasible,
            penalty_dominates: o.penalty_dominates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterStep {
    pub swarm: SwarmSummary,
    /// Rate of the re-solved beam at the candidate layout; `None` if that solve failed.
    pub candidate_rate: Option<f64>,
    pub accepted: bool,
    pub sca: Option<ScaTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoTrace {
    /// Incumbent rate after the initial solve and after each outer iteration.
    pub rates: Vec<f64>,
    pub steps: Vec<OuterStep>,
    /// Trace of the solve at the starting layout (absent if it was infeasible).
    pub initial_sca: Option<ScaTrace>,
    /// Swarm runs spent looking for a layout that can meet the BER cap.
    pub feasibility_search: Option<SwarmSummary>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub swarm_evaluations: usize,
    pub sca_iterations: usize,
    pub newton_steps: usize,
}

impl AoTrace {
    fn count_sca(&mut self, t: &ScaTrace) {
        self.sca_iterations += t.iterations;
        self.newton_steps += t.newton_steps;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoSolution {
    pub w: Vec<Complex64>,
    pub positions: Vec<AntennaPosition>,
    pub rate: f64,
    pub report: FeasibilityReport,
    pub trace: AoTrace,
}

impl AoSolution {
    pub fn beamformer(&self) -> CVector {
        CVector::from_vec(self.w.clone())
    }
}

#[derive(Debug, Error)]
pub enum AoError {
    /// No explored layout lets any beam meet the BER cap.
    #[error("BER cap unreachable: best secondary SNR {achievable:.4e} < required {required:.4e}")]
    Infeasible {
        achievable: f64,
        required: f64,
        best_effort: Box<AoSolution>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Secondary SNR of the full-power beam matched to `h_b`, the largest any beam can reach.
fn max_backscatter_snr(lb: &LinkBudget, p_max: f64) -> f64 {
    lb.backscatter_gain() * p_max * lb.h_b.norm_squared() / lb.noise
}

fn solve_at(
    scenario: &ScenarioRealization,
    positions: &[AntennaPosition],
    config: &ScenarioConfig,
    gamma_min: f64,
) -> Result<(BeamSolution, ScaTrace), SolverError> {
    let lb = link_budget(scenario, positions, config);
    sca_optimize(&lb, config.p_max, gamma_min, config.tolerance)
}

fn finish(
    scenario: &ScenarioRealization,
    config: &ScenarioConfig,
    w: CVector,
    positions: Vec<AntennaPosition>,
    trace: AoTrace,
) -> AoSolution {
    let report = evaluate_solution(&w, &positions, scenario, config);
    AoSolution {
        rate: report.rate,
        w: w.iter().copied().collect(),
        positions,
        report,
        trace,
    }
}

/// Alternates SCA beamforming with an SA-PSO position update.
///
/// Starting from `start`, each outer iteration runs the swarm at the current
/// beam (particle 0 seeded with the current layout), re-solves the beam at
/// the swarm's layout and keeps it only if the rate does not drop. The loop
/// stops once the incumbent rate moves by at most `config.tolerance`.
///
/// If no beam can meet the BER cap at `start`, the swarm first searches for a
/// layout that raises the attainable backscatter SNR enough; failing that the
/// best-effort layout and matched beam come back inside [`AoError::Infeasible`].
pub fn alternate<R: Rng + ?Sized>(
    scenario: &ScenarioRealization,
    config: &ScenarioConfig,
    start: &[AntennaPosition],
    options: &AoOptions,
    rng: &mut R,
) -> Result<AoSolution, AoError> {
    let gamma_min = min_snr_for_ber(config.ber_max).map_err(SolverError::from)?;
    let params = SaPsoParams::from_config(config, options.annealing);
    let k = start.len();
    let mut trace = AoTrace {
        rates: Vec::new(),
        steps: Vec::new(),
        initial_sca: None,
        feasibility_search: None,
        outer_iterations: 0,
        converged: false,
        swarm_evaluations: 0,
        sca_iterations: 0,
        newton_steps: 0,
    };

    let mut positions = start.to_vec();
    let (mut beam, mut rate) = match solve_at(scenario, &positions, config, gamma_min) {
        Ok((sol, t)) => {
            trace.count_sca(&t);
            trace.initial_sca = Some(t);
            (sol.w, sol.rate)
        }
        Err(SolverError::Infeasible { .. }) if options.move_antennas => {
            let snr_at = |p: &[AntennaPosition]| {
                max_backscatter_snr(&link_budget(scenario, p, config), config.p_max)
            };
            let search = run_sa_pso(
                |p| {
                    let snr = snr_at(p);
                    let violations = violation_count(p, config.d_min);
                    let shortfall = usize::from(snr < gamma_min);
                    Evaluation {
                        // spacing outranks the SNR floor so the search never trades one for the other
                        fitness: snr.ln_1p() - config.penalty * (2 * violations + shortfall) as f64,
                        rate: snr.ln_1p(),
                        violations,
                        ber_violated: shortfall == 1,
                    }
                },
                k,
                &params,
                Some(&positions),
                rng,
            );
            trace.swarm_evaluations += search.evaluations;
            trace.feasibility_search = Some(SwarmSummary::from(&search));
            if violation_count(&search.best_positions, config.d_min) == 0 {
                positions = search.best_positions;
            }
            match solve_at(scenario, &positions, config, gamma_min) {
                Ok((sol, t)) => {
                    trace.count_sca(&t);
                    trace.initial_sca = Some(t);
                    (sol.w, sol.rate)
                }
                Err(SolverError::Infeasible {
                    achievable,
                    required,
                }) => {
                    return Err(infeasible(
                        scenario, config, positions, trace, achievable, required,
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(SolverError::Infeasible {
            achievable,
            required,
        }) => {
            return Err(infeasible(
                scenario, config, positions, trace, achievable, required,
            ));
        }
        Err(e) => return Err(e.into()),
    };
    trace.rates.push(rate);

    if !options.move_antennas {
        trace.converged = true;
        return Ok(finish(scenario, config, beam, positions, trace));
    }

    for _ in 0..options.max_outer_iterations {
        let objective = PositionObjective::new(scenario, &beam, config);
        let outcome = run_sa_pso(|p| objective.evaluate(p), k, &params, Some(&positions), rng);
        trace.swarm_evaluations += outcome.evaluations;
        let mut step = OuterStep {
            swarm: SwarmSummary::from(&outcome),
            candidate_rate: None,
            accepted: false,
            sca: None,
        };
        let previous = rate;
        if outcome.feasible && outcome.best_positions != positions {
            if let Ok((sol, t)) = solve_at(scenario, &outcome.best_positions, config, gamma_min) {
                trace.count_sca(&t);
                step.candidate_rate = Some(sol.rate);
                step.sca = Some(t);
                if sol.rate >= rate {
                    step.accepted = true;
                    rate = sol.rate;
                    beam = sol.w;
                    positions = outcome.best_positions;
                }
            }
        }
        trace.steps.push(step);
        trace.rates.push(rate);
        trace.outer_iterations += 1;
        if (rate - previous).abs() <= config.tolerance {
            trace.converged = true;
            break;
        }
    }
    Ok(finish(scenario, config, beam, positions, trace))
}

fn infeasible(
    scenario: &ScenarioRealization,
    config: &ScenarioConfig,
    positions: Vec<AntennaPosition>,
    trace: AoTrace,
    achievable: f64,
    required: f64,
) -> AoError {
    let lb = link_budget(scenario, &positions, config);
    let norm = lb.h_b.norm();
    let w = if norm > 0.0 {
        lb.h_b.unscale(norm) * Complex64::new(config.p_max.sqrt(), 0.0)
    } else {
        CVector::zeros(positions.len())
    };
    AoError::Infeasible {
        achievable,
        required,
        best_effort: Box::new(finish(scenario, config, w, positions, trace)),
    }
}
