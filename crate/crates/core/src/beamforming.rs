//! SCA outer loop over the relaxed subproblem for fixed antenna positions.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::linalg::{normalize_phase, outer, principal_eigenpair, CMatrix, CVector};
use crate::metrics::{rate_at, secondary_snr, LinkBudget};
use crate::sdp::{
    lifted_rate, rank_one_gap, solve_subproblem, SdpSubproblem, DEFAULT_GAP, RANK_ONE_THRESHOLD,
};

/// Hard cap on SCA iterations.
pub const MAX_SCA_ITERATIONS: usize = 50;

/// Slack allowed on surrogate ascent before the loop is declared non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Per-run record of the SCA iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaTrace {
    /// Entry 0 is the rate at the initial point; entry `i` the surrogate optimum of step `i`.
    pub surrogate_values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// λ₂/λ₁ of each subproblem optimum.
    pub eigen_ratios: Vec<f64>,
    pub rank_repairs: usize,
    pub newton_steps: usize,
}

/// Beamformer recovered from the converged lifted matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSolution {
    pub w: CVector,
    pub w_matrix: CMatrix,
    /// Primary rate at `w`, bits.
    pub rate: f64,
    /// Primary rate of the lifted matrix `W*`, which the surrogate equals at its own expansion point.
    pub lifted_rate: f64,
    pub eigen_ratio: f64,
    pub rank_repaired: bool,
}

/// Principal-eigenpair extraction `w = √λ₁ v₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub w: CVector,
    pub eigen_ratio: f64,
    /// Raised when the input was not numerically rank one.
    pub rank_repaired: bool,
}

/// Recovers a beamformer from a lifted Hermitian PSD matrix.
pub fn extract_beamformer(w: &CMatrix) -> Result<Extracted, SolverError> {
    let eigen_ratio = rank_one_gap(w)?;
    let (lambda, v) = principal_eigenpair(w);
    Ok(Extracted {
        w: v * Complex64::new(lambda.sqrt(), 0.0),
        eigen_ratio,
        rank_repaired: eigen_ratio > RANK_ONE_THRESHOLD,
    })
}

/// Full-power beam aligned with `h_b`, which maximizes the backscatter SNR.
///
/// Fails with [`SolverError::Infeasible`] when even this beam misses `γ_min`.
pub fn initialize_w(lb: &LinkBudget, p_max: f64, gamma_min: f64) -> Result<CMatrix, SolverError> {
    let k = lb.antennas();
    let hb_norm_sq = lb.h_b.norm_squared();
    let achievable = lb.backscatter_gain() * p_max * hb_norm_sq / lb.noise;
    if gamma_min > 0.0 && achievable < gamma_min * (1.0 - 1e-12) {
        return Err(SolverError::Infeasible {
            achievable,
            required: gamma_min,
        });
    }
    let direction = if hb_norm_sq > 0.0 {
        lb.h_b.normalize()
    } else if lb.h_u.norm_squared() > 0.0 {
        lb.h_u.normalize()
    } else {
        let mut e = DVector::zeros(k);
        e[0] = Complex64::new(1.0, 0.0);
        e
    };
    Ok(outer(&direction) * Complex64::new(p_max, 0.0))
}

/// Iterates the surrogate subproblem until successive optima differ by at
/// most `tolerance` bits, then extracts the beamformer.
pub fn sca_optimize(
    lb: &LinkBudget,
    p_max: f64,
    gamma_min: f64,
    tolerance: f64,
) -> Result<(BeamSolution, ScaTrace), SolverError> {
    let mut w = initialize_w(lb, p_max, gamma_min)?;
    let start = SdpSubproblem::from_budget(lb, p_max, gamma_min, w.clone());
    let mut trace = ScaTrace {
        surrogate_values: vec![lifted_rate(&w, &start)],
        iterations: 0,
        converged: false,
        eigen_ratios: Vec::new(),
        rank_repairs: 0,
        newton_steps: 0,
    };

    for iteration in 1..=MAX_SCA_ITERATIONS {
        let sp = SdpSubproblem::from_budget(lb, p_max, gamma_min, w);
        let sol = solve_subproblem(&sp, DEFAULT_GAP)?;
        let previous = *trace
            .surrogate_values
            .last()
            .expect("seeded with the start value");
        if sol.surrogate_value < previous - MONOTONE_SLACK {
            return Err(SolverError::NonMonotone {
                iteration,
                previous,
                current: sol.surrogate_value,
            });
        }
        trace.iterations = iteration;
        trace.surrogate_values.push(sol.surrogate_value);
        trace.eigen_ratios.push(sol.eigen_ratio);
        trace.rank_repairs += usize::from(sol.rank_repaired);
        trace.newton_steps += sol.newton_steps;
        w = sol.w_opt;
        if (sol.surrogate_value - previous).abs() <= tolerance {
            trace.converged = true;
            break;
        }
    }

    let extracted = extract_beamformer(&w)?;
    let mut beam = extracted.w;
    // undo the tiny C̄2 shortfall left by discarding the minor eigenvalues
    if gamma_min > 0.0 {
        let snr = secondary_snr(lb, &beam);
        let power = beam.norm_squared();
        if snr < gamma_min && snr > 0.0 {
            let gain = (gamma_min / snr).min(p_max / power).max(1.0);
            beam *= Complex64::new(gain.sqrt(), 0.0);
        }
    }
    let beam = normalize_phase(&beam);
    let final_sp = SdpSubproblem::from_budget(lb, p_max, gamma_min, w.clone());
    let solution = BeamSolution {
        rate: rate_at(lb, &beam),
        lifted_rate: lifted_rate(&w, &final_sp),
        eigen_ratio: extracted.eigen_ratio,
        rank_repaired: extracted.rank_repaired,
        w: beam,
        w_matrix: w,
    };
    Ok((solution, trace))
}
