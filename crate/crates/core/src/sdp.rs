//! Interior-point solver for the relaxed beamforming subproblem.
//!
//! Each SCA step maximizes the concave lower bound
//!
//! ```text
//! R̃(W) = log2(Tr(AW) + Tr(BW) + σ²) − log2(Tr(B W_ref) + σ²)
//!        − Tr(B (W − W_ref)) / (ln2 (Tr(B W_ref) + σ²))
//! ```
//!
//! over Hermitian `W ⪰ 0` with `Tr(W) ≤ P_max` and `Tr(BW) ≥ t_min`.
//!
//! The solver is a primal log-barrier method. Variables are normalized as
//! `X = W / P_max` with gains scaled by `P_max/σ²`, and every Newton step is
//! taken in the congruence-scaled coordinates `X + ΔX = L (I + ΔY) L^H`
//! (`X = L L^H`). In those coordinates the log-det Hessian is the identity,
//! so the Newton system is `I` plus at most three rank-one terms and stays
//! well conditioned even as `X` approaches rank one.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::linalg::{
    hermitian_eigen, hermitian_residual, max_abs, outer, principal_eigenpair, symmetrize, trace,
    trace_product, CMatrix, CVector,
};
use crate::metrics::LinkBudget;

/// Eigen-ratio above which the solution is treated as not rank one.
pub const RANK_ONE_THRESHOLD: f64 = 1e-5;

/// Default duality-gap target in bits.
pub const DEFAULT_GAP: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;

/// Data of one SCA subproblem in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSubproblem {
    /// `h_u h_u^H`.
    pub a: CMatrix,
    /// `α|h_s|² h_b h_b^H`.
    pub b: CMatrix,
    pub noise: f64,
    pub p_max: f64,
    /// Required lower bound on `Tr(BW)`, i.e. `γ_min σ²`.
    pub t_min: f64,
    /// Linearization point.
    pub w_ref: CMatrix,
}

impl SdpSubproblem {
    pub fn from_budget(lb: &LinkBudget, p_max: f64, gamma_min: f64, w_ref: CMatrix) -> Self {
        let gain = Complex64::new(lb.backscatter_gain(), 0.0);
        Self {
            a: outer(&lb.h_u),
            b: outer(&lb.h_b) * gain,
            noise: lb.noise,
            p_max,
            t_min: gamma_min * lb.noise,
            w_ref,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn check(&self) -> Result<(), SolverError> {
        for m in [&self.a, &self.b, &self.w_ref] {
            let r = hermitian_residual(m);
            if r > HERMITIAN_TOL * max_abs(m).max(1.0) {
                return Err(SolverError::NotHermitian(r));
            }
        }
        Ok(())
    }

    /// Largest achievable `Tr(BW)` over the power ball, `P_max λ_max(B)`.
    pub fn max_backscatter_power(&self) -> f64 {
        self.p_max * principal_eigenpair(&self.b).0.max(0.0)
    }

    /// Whether `W` meets both trace constraints within the given relative slack.
    pub fn is_feasible(&self, w: &CMatrix, rel_tol: f64) -> bool {
        trace(w) <= self.p_max * (1.0 + rel_tol)
            && trace_product(&self.b, w) >= self.t_min * (1.0 - rel_tol)
    }
}

/// Output of [`solve_subproblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    #[serde(skip)]
    pub w_opt: CMatrix,
    /// Surrogate objective at `w_opt`, bits.
    pub surrogate_value: f64,
    /// Certified bound on the surrogate's distance to the optimum, bits:
    /// `(m + λ²)/t` with `m` the barrier parameter and `λ` the final Newton decrement.
    pub kkt_residual: f64,
    /// `λ₂/λ₁` of `w_opt` before any rank repair.
    pub eigen_ratio: f64,
    /// Set when the principal eigenpair replaced a numerically high-rank optimum.
    pub rank_repaired: bool,
    pub newton_steps: usize,
    pub barrier_rounds: usize,
}

/// Lower bound `R̃(W)`; equals the true rate at `W = W_ref`.
pub fn surrogate_objective(w: &CMatrix, sp: &SdpSubproblem) -> Result<f64, SolverError> {
    let r = hermitian_residual(w);
    if r > HERMITIAN_TOL * max_abs(w).max(1.0) {
        return Err(SolverError::NotHermitian(r));
    }
    sp.check()?;
    let ta = trace_product(&sp.a, w);
    let tb = trace_product(&sp.b, w);
    let tb_ref = trace_product(&sp.b, &sp.w_ref);
    let denom = tb_ref + sp.noise;
    Ok(((ta + tb + sp.noise) / denom).log2() - (tb - tb_ref) / (LN_2 * denom))
}

/// Primary rate of the lifted matrix, `log2(1 + Tr(AW) / (Tr(BW) + σ²))`.
pub fn lifted_rate(w: &CMatrix, sp: &SdpSubproblem) -> f64 {
    let ta = trace_product(&sp.a, w);
    let tb = trace_product(&sp.b, w);
    (ta / (tb + sp.noise)).ln_1p() / LN_2
}

/// `λ₂/λ₁` of a Hermitian PSD matrix; 0 for 1×1 input.
pub fn rank_one_gap(w: &CMatrix) -> Result<f64, SolverError> {
    let (vals, _) = hermitian_eigen(w);
    let top = vals[0];
    if !(top > 0.0) {
        return Err(SolverError::ZeroMatrix);
    }
    let second = vals.get(1).copied().unwrap_or(0.0);
    Ok((second / top).clamp(0.0, 1.0))
}

const STALL_STEPS: usize = 8;
const STALL_DECREMENT: f64 = 1e-4;

/// Tuning of the barrier path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSettings {
    /// Stop once the duality-gap bound `m/t` falls below this, bits.
    pub gap: f64,
    pub initial_weight: f64,
    pub growth: f64,
    /// Centering stops when half the squared Newton decrement is below this.
    pub newton_tol: f64,
    pub max_newton_per_round: usize,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self {
            gap: DEFAULT_GAP,
            initial_weight: 1.0,
            growth: 10.0,
            newton_tol: 1e-8,
            max_newton_per_round: 200,
        }
    }
}

/// Orthonormal real basis of K×K Hermitian matrices under `Tr(XY)`.
struct HermitianBasis {
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianBasis {
    fn new(k: usize) -> Self {
        let pairs = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        Self { k, pairs }
    }

    fn dim(&self) -> usize {
        self.k * self.k
    }

    /// Coordinates `Tr(M E_a)` of a Hermitian matrix.
    fn coords(&self, m: &CMatrix) -> DVector<f64> {
        let s2 = std::f64::consts::SQRT_2;
        let mut out = DVector::zeros(self.dim());
        for i in 0..self.k {
            out[i] = m[(i, i)].re;
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            // E_re = (e_i e_j^T + e_j e_i^T)/√2, E_im = i(e_i e_j^T − e_j e_i^T)/√2
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            out[self.k + 2 * p] = s2 * z.re;
            out[self.k + 2 * p + 1] = s2 * z.im;
        }
        out
    }

    fn matrix(&self, y: &DVector<f64>) -> CMatrix {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMatrix::zeros(self.k, self.k);
        for i in 0..self.k {
            m[(i, i)] = Complex64::new(y[i], 0.0);
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let z = Complex64::new(r * y[self.k + 2 * p], r * y[self.k + 2 * p + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m
    }

    fn identity_coords(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim());
        for i in 0..self.k {
            e[i] = 1.0;
        }
        e
    }
}

/// Normalized problem: `X = W/P`, gains multiplied by `P/σ²`.
struct Scaled {
    c: CMatrix,
    b: CMatrix,
    snr_floor: f64,
    has_floor: bool,
    b_ref: f64,
    c0: f64,
}

impl Scaled {
    fn new(sp: &SdpSubproblem) -> Self {
        let s = Complex64::new(sp.p_max / sp.noise, 0.0);
        let a = &sp.a * s;
        let b = &sp.b * s;
        let x_ref = &sp.w_ref * Complex64::new(1.0 / sp.p_max, 0.0);
        let b_ref = trace_product(&b, &x_ref);
        let snr_floor = sp.t_min / sp.noise;
        Self {
            c: symmetrize(&(a + &b)),
            b: symmetrize(&b),
            snr_floor,
            has_floor: snr_floor > 0.0,
            b_ref,
            c0: b_ref + 1.0,
        }
    }

    /// Surrogate in bits from the two linear functionals.
    fn objective(&self, tc: f64, tb: f64) -> f64 {
        (tc + 1.0).log2() - self.c0.log2() - (tb - self.b_ref) / (LN_2 * self.c0)
    }

    fn barrier_params(&self, k: usize) -> f64 {
        (k + 1 + usize::from(self.has_floor)) as f64
    }
}

/// Solves the relaxed subproblem to a duality gap of `tol` bits.
///
/// Returns [`SolverError::Infeasible`] when even the full-power beam aligned
/// with the backscatter channel cannot reach `t_min`.
pub fn solve_subproblem(sp: &SdpSubproblem, tol: f64) -> Result<SdpSolution, SolverError> {
    solve_with(
        sp,
        &BarrierSettings {
            gap: tol,
            ..BarrierSettings::default()
        },
    )
}

/// [`solve_subproblem`] with explicit barrier settings.
pub fn solve_with(
    sp: &SdpSubproblem,
    settings: &BarrierSettings,
) -> Result<SdpSolution, SolverError> {
    sp.check()?;
    let k = sp.dim();
    let scaled = Scaled::new(sp);
    let (lambda_b, u_b) = principal_eigenpair(&scaled.b);

    if scaled.has_floor {
        if lambda_b < scaled.snr_floor * (1.0 - 1e-12) {
            return Err(SolverError::Infeasible {
                achievable: lambda_b,
                required: scaled.snr_floor,
            });
        }
        // the feasible set has (numerically) collapsed to the aligned beam
        if 1.0 - scaled.snr_floor / lambda_b < 1e-9 {
            let x = outer(&u_b);
            return Ok(finish(sp, &scaled, x, 0.0, 0, 0));
        }
    }

    let mut x = initial_point(&scaled, k, lambda_b, &u_b);
    let basis = HermitianBasis::new(k);
    let e = basis.identity_coords();
    let m = scaled.barrier_params(k);
    let mut t = settings.initial_weight;
    let mut newton_steps = 0usize;
    let mut rounds = 0usize;
    let residual;

    loop {
        rounds += 1;
        let mut last_decrement;
        let mut steps_this_round = 0usize;
        let mut best_decrement = f64::INFINITY;
        let mut stalled = 0usize;
        loop {
            let step = newton_step(&scaled, &basis, &e, &x, t).ok_or_else(|| {
                SolverError::NumericalFailure {
                    reason: "iterate lost positive definiteness".into(),
                    barrier_weight: t,
                    newton_steps,
                }
            })?;
            last_decrement = step.decrement_sq;
            if step.decrement_sq / 2.0 <= settings.newton_tol {
                break;
            }
            // the decrement has hit the rounding floor of a nearly active constraint
            if step.decrement_sq < best_decrement {
                best_decrement = step.decrement_sq;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= STALL_STEPS && best_decrement <= STALL_DECREMENT {
                    break;
                }
            }
            if steps_this_round >= settings.max_newton_per_round {
                return Err(SolverError::NumericalFailure {
                    reason: "centering did not converge".into(),
                    barrier_weight: t,
                    newton_steps,
                });
            }
            steps_this_round += 1;
            newton_steps += 1;
            match line_search(&scaled, &basis, &x, &step, t) {
                Some(next) => x = next,
                // no further progress possible at this precision
                None => break,
            }
        }
        if m / t <= settings.gap {
            residual = (m + last_decrement) / t;
            break;
        }
        t *= settings.growth;
    }

    Ok(finish(sp, &scaled, x, residual, newton_steps, rounds))
}

fn initial_point(scaled: &Scaled, k: usize, lambda_b: f64, u_b: &CVector) -> CMatrix {
    let eye = CMatrix::identity(k, k);
    if !scaled.has_floor {
        return eye * Complex64::new(0.5 / k as f64, 0.0);
    }
    let rho = scaled.snr_floor / lambda_b;
    let total = 1.0 - (1.0 - rho) / 4.0;
    let spread = if k > 1 {
        (1.0 - rho) / (4.0 * (k - 1) as f64)
    } else {
        0.0
    };
    outer(u_b) * Complex64::new(total - k as f64 * spread, 0.0) + eye * Complex64::new(spread, 0.0)
}

struct NewtonStep {
    direction: DVector<f64>,
    decrement_sq: f64,
    chol: CMatrix,
    // functionals at the current point and their directional derivatives
    tc: f64,
    tb: f64,
    tr: f64,
    dc: f64,
    db: f64,
    dtr: f64,
    dir_slope: f64,
}

fn newton_step(
    scaled: &Scaled,
    basis: &HermitianBasis,
    e: &DVector<f64>,
    x: &CMatrix,
    t: f64,
) -> Option<NewtonStep> {
    let chol = x.clone().cholesky()?.l();
    let lh = chol.adjoint();
    let c_t = symmetrize(&(&lh * &scaled.c * &chol));
    let b_t = symmetrize(&(&lh * &scaled.b * &chol));
    let tr_t = symmetrize(&(&lh * &chol));
    let cv = basis.coords(&c_t);
    let bv = basis.coords(&b_t);
    let trv = basis.coords(&tr_t);

    let tc = trace(&c_t);
    let tb = trace(&b_t);
    let tr = trace(&tr_t);
    let s = tc + 1.0;
    let g1 = 1.0 - tr;
    let g2 = tb - scaled.snr_floor;
    if !(g1 > 0.0) || (scaled.has_floor && !(g2 > 0.0)) {
        return None;
    }

    let n = basis.dim();
    let mut grad = -(&cv * (t / (LN_2 * s)) - &bv * (t / (LN_2 * scaled.c0))) - e + &trv / g1;
    let mut hess = DMatrix::<f64>::identity(n, n);
    hess.ger(t / (LN_2 * s * s), &cv, &cv, 1.0);
    hess.ger(1.0 / (g1 * g1), &trv, &trv, 1.0);
    if scaled.has_floor {
        grad -= &bv / g2;
        hess.ger(1.0 / (g2 * g2), &bv, &bv, 1.0);
    }
    let rhs = -&grad;
    let direction = match hess.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => hess.lu().solve(&rhs)?,
    };
    let decrement_sq = -grad.dot(&direction);
    Some(NewtonStep {
        dc: cv.dot(&direction),
        db: bv.dot(&direction),
        dtr: trv.dot(&direction),
        dir_slope: grad.dot(&direction),
        direction,
        decrement_sq,
        chol,
        tc,
        tb,
        tr,
    })
}

/// Change of the barrier objective along the step, `None` outside the domain.
///
/// Evaluated as a sum of `ln_1p` increments so late-path steps, whose effect
/// is far below the rounding error of the absolute objective, still register.
fn barrier_change(
    scaled: &Scaled,
    step: &NewtonStep,
    eig: &[f64],
    alpha: f64,
    t: f64,
) -> Option<f64> {
    let mut logdet = 0.0;
    for &mu in eig {
        if !(1.0 + alpha * mu > 0.0) {
            return None;
        }
        logdet += (alpha * mu).ln_1p();
    }
    let s = step.tc + 1.0;
    let g1 = 1.0 - step.tr;
    let g2 = step.tb - scaled.snr_floor;
    let rel_s = alpha * step.dc / s;
    let rel_g1 = -alpha * step.dtr / g1;
    let rel_g2 = alpha * step.db / g2;
    if !(rel_s > -1.0) || !(rel_g1 > -1.0) || (scaled.has_floor && !(rel_g2 > -1.0)) {
        return None;
    }
    let d_obj = rel_s.ln_1p() / LN_2 - alpha * step.db / (LN_2 * scaled.c0);
    let mut change = -t * d_obj - logdet - rel_g1.ln_1p();
    if scaled.has_floor {
        change -= rel_g2.ln_1p();
    }
    Some(change)
}

fn line_search(
    scaled: &Scaled,
    basis: &HermitianBasis,
    x: &CMatrix,
    step: &NewtonStep,
    t: f64,
) -> Option<CMatrix> {
    let dy = basis.matrix(&step.direction);
    let (eig, _) = hermitian_eigen(&dy);
    // keep a fraction of the distance to every boundary
    let mut alpha_max = 1.0_f64;
    let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < 0.0 {
        alpha_max = alpha_max.min(-0.99 / min_eig);
    }
    let g1 = 1.0 - step.tr;
    if step.dtr > 0.0 {
        alpha_max = alpha_max.min(0.99 * g1 / step.dtr);
    }
    if scaled.has_floor && step.db < 0.0 {
        alpha_max = alpha_max.min(0.99 * (step.tb - scaled.snr_floor) / -step.db);
    }
    let mut alpha = alpha_max;
    while alpha > 1e-14 {
        if let Some(change) = barrier_change(scaled, step, &eig, alpha, t) {
            if change <= 0.25 * alpha * step.dir_slope {
                let inner =
                    CMatrix::identity(x.nrows(), x.ncols()) + dy * Complex64::new(alpha, 0.0);
                let next = symmetrize(&(&step.chol * inner * step.chol.adjoint()));
                return Some(next);
            }
        }
        alpha *= 0.5;
    }
    None
}

fn finish(
    sp: &SdpSubproblem,
    scaled: &Scaled,
    x: CMatrix,
    kkt_residual: f64,
    newton_steps: usize,
    barrier_rounds: usize,
) -> SdpSolution {
    let mut w = x * Complex64::new(sp.p_max, 0.0);
    let eigen_ratio = rank_one_gap(&w).unwrap_or(0.0);
    let mut rank_repaired = false;
    if eigen_ratio > RANK_ONE_THRESHOLD {
        let (lambda, v) = principal_eigenpair(&w);
        let mut beam = v * Complex64::new(lambda.max(0.0).sqrt(), 0.0);
        let achieved = crate::linalg::trace_product(&sp.b, &outer(&beam));
        if sp.t_min > 0.0 && achieved < sp.t_min && achieved > 0.0 {
            let power = beam.norm_squared();
            let gain = (sp.t_min / achieved).min(sp.p_max / power);
            beam *= Complex64::new(gain.sqrt(), 0.0);
        }
        w = outer(&beam);
        rank_repaired = true;
    }
    let tc = trace_product(&scaled.c, &w) / sp.p_max;
    let tb = trace_product(&scaled.b, &w) / sp.p_max;
    SdpSolution {
        surrogate_value: scaled.objective(tc, tb),
        w_opt: w,
        kkt_residual,
        eigen_ratio,
        rank_repaired,
        newton_steps,
        barrier_rounds,
    }
}
