//! Baseline schemes, seeded Monte Carlo trials, parameter sweeps and output files.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ao::{
    alternate, evaluate_solution, link_budget, AoError, AoOptions, AoTrace, FeasibilityReport,
};
use crate::beamforming::{sca_optimize, ScaTrace};
use crate::channel::{draw_scenario, AntennaPosition, PlacementRegion, ScenarioRealization};
use crate::config::{dbm_to_watts, ScenarioConfig};
use crate::error::{ConfigError, HarnessError, SolverError};
use crate::linalg::CVector;
use crate::metrics::{min_snr_for_ber, rate_at};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Movable antennas, SA-PSO placement.
    MaSaPso,
    /// Movable antennas, plain PSO placement.
    MaPso,
    /// Fixed uniform linear array with optimized beam.
    Fa,
    /// Fixed array with an isotropic random full-power beam.
    RandomBeam,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::MaSaPso,
        Scheme::MaPso,
        Scheme::Fa,
        Scheme::RandomBeam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MaSaPso => "ma-sa-pso",
            Scheme::MaPso => "ma-pso",
            Scheme::Fa => "fa",
            Scheme::RandomBeam => "random-beam",
        }
    }

    /// Parses a comma-separated scheme list.
    pub fn parse_list(list: &str) -> Result<Vec<Scheme>, String> {
        let mut out: Vec<Scheme> = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let s = item.parse()?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            return Err("empty scheme list".into());
        }
        out.sort();
        Ok(out)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                format!("unknown scheme `{s}` (expected ma-sa-pso|ma-pso|fa|random-beam)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Transmit power budget, dBm.
    Power,
    Paths,
    Antennas,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Power => "power",
            SweepAxis::Paths => "paths",
            SweepAxis::Antennas => "antennas",
        }
    }

    /// Copy of `config` with the swept parameter set to `value`.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, ConfigError> {
        let count = |field: &'static str| {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(ConfigError::Invalid {
                    field,
                    reason: format!("sweep value must be a positive integer, got {value}"),
                })
            }
        };
        let mut c = config.clone();
        match self {
            SweepAxis::Power => c.p_max = dbm_to_watts(value),
            SweepAxis::Paths => c.paths = count("paths")?,
            SweepAxis::Antennas => c.antennas = count("antennas")?,
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "power" => Ok(SweepAxis::Power),
            "paths" => Ok(SweepAxis::Paths),
            "antennas" => Ok(SweepAxis::Antennas),
            other => Err(format!(
                "unknown sweep axis `{other}` (expected power|paths|antennas)"
            )),
        }
    }
}

/// Centered linear array along x with half-wavelength spacing.
pub fn fa_positions(
    antennas: usize,
    wavelength: f64,
    region: &PlacementRegion,
) -> Result<Vec<AntennaPosition>, HarnessError> {
    let spacing = wavelength / 2.0;
    let span = spacing * antennas.saturating_sub(1) as f64;
    if span > region.width() * (1.0 + 1e-12) {
        return Err(HarnessError::ArrayTooLarge {
            antennas,
            span,
            side: region.width(),
        });
    }
    Ok((0..antennas)
        .map(|k| AntennaPosition::new(-span / 2.0 + k as f64 * spacing, 0.0))
        .collect())
}

/// Full-power beam along a standard complex Gaussian direction.
pub fn random_beamformer<R: Rng + ?Sized>(antennas: usize, p_max: f64, rng: &mut R) -> CVector {
    let g = CVector::from_fn(antennas, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let norm = g.norm();
    g * Complex64::new(p_max.sqrt() / norm, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    /// Primary rate, bits; 0 when the scheme reported the BER cap unreachable.
    pub rate: f64,
    /// The scheme's solver reported the BER cap unreachable.
    pub outage: bool,
    /// Whether the returned point meets every constraint within tolerance.
    pub constraints_met: bool,
    pub report: FeasibilityReport,
    pub positions: Vec<AntennaPosition>,
    pub w: Vec<Complex64>,
    pub outer_iterations: usize,
    pub ao_trace: Option<AoTrace>,
    pub sca_trace: Option<ScaTrace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// SHA-256 of the channel draw every scheme in this trial used.
    pub fingerprint: String,
    pub schemes: Vec<SchemeResult>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Equality ignores the wall time.
impl PartialEq for TrialResult {
    fn eq(&self, other: &Self) -> bool {
        self.trial == other.trial
            && self.seed == other.seed
            && self.fingerprint == other.fingerprint
            && self.schemes == other.schemes
    }
}

impl TrialResult {
    pub fn get(&self, scheme: Scheme) -> Option<&SchemeResult> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }

    pub fn rate(&self, scheme: Scheme) -> Option<f64> {
        self.get(scheme).map(|s| s.rate)
    }
}

fn ao_result(
    scheme: Scheme,
    scenario: &ScenarioRealization,
    config: &ScenarioConfig,
    start: &[AntennaPosition],
    annealing: bool,
    swarm_seed: u64,
) -> Result<SchemeResult, HarnessError> {
    let options = AoOptions {
        annealing,
        ..AoOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(swarm_seed);
    let (sol, outage) = match alternate(scenario, config, start, &options, &mut rng) {
        Ok(sol) => (sol, false),
        Err(AoError::Infeasible { best_effort, .. }) => (*best_effort, true),
        Err(AoError::Solver(e)) => return Err(solver_failure(scheme, e)),
    };
    Ok(SchemeResult {
        scheme,
        rate: if outage { 0.0 } else { sol.rate },
        outage,
        constraints_met: !outage && sol.report.satisfied(config.p_max),
        report: sol.report,
        outer_iterations: sol.trace.outer_iterations,
        positions: sol.positions,
        w: sol.w,
        ao_trace: Some(sol.trace),
        sca_trace: None,
    })
}

fn solver_failure(scheme: Scheme, e: SolverError) -> HarnessError {
    HarnessError::Solver {
        scheme: scheme.name(),
        source: e,
    }
}

/// Runs the selected schemes on one seeded channel draw.
///
/// The trial stream draws the scenario first, then a swarm seed shared by
/// both movable-antenna schemes and a seed for the random beam. Both
/// movable-antenna schemes start from the fixed array, so each dominates it.
pub fn run_trial(
    config: &ScenarioConfig,
    trial: usize,
    seed: u64,
    schemes: &[Scheme],
) -> Result<TrialResult, HarnessError> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenario = draw_scenario(config, &mut rng);
    let swarm_seed = rng.next_u64();
    let beam_seed = rng.next_u64();
    let fa = fa_positions(config.antennas, config.wavelength, &config.region())?;
    let gamma_min =
        min_snr_for_ber(config.ber_max).map_err(|e| solver_failure(Scheme::Fa, e.into()))?;

    let mut results = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let result = match scheme {
            Scheme::MaSaPso => ao_result(scheme, &scenario, config, &fa, true, swarm_seed)?,
            Scheme::MaPso => ao_result(scheme, &scenario, config, &fa, false, swarm_seed)?,
            Scheme::Fa => {
                let lb = link_budget(&scenario, &fa, config);
                match sca_optimize(&lb, config.p_max, gamma_min, config.tolerance) {
                    Ok((sol, trace)) => {
                        let report = evaluate_solution(&sol.w, &fa, &scenario, config);
                        SchemeResult {
                            scheme,
                            rate: sol.rate,
                            outage: false,
                            constraints_met: report.satisfied(config.p_max),
                            report,
                            positions: fa.clone(),
                            w: sol.w.iter().copied().collect(),
                            outer_iterations: 0,
                            ao_trace: None,
                            sca_trace: Some(trace),
                        }
                    }
                    Err(SolverError::Infeasible { .. }) => {
                        let w = CVector::zeros(fa.len());
                        SchemeResult {
                            scheme,
                            rate: 0.0,
                            outage: true,
                            constraints_met: false,
                            report: evaluate_solution(&w, &fa, &scenario, config),
                            positions: fa.clone(),
                            w: w.iter().copied().collect(),
                            outer_iterations: 0,
                            ao_trace: None,
                            sca_trace: None,
                        }
                    }
                    Err(e) => return Err(solver_failure(scheme, e)),
                }
            }
            Scheme::RandomBeam => {
                let w = random_beamformer(
                    fa.len(),
                    config.p_max,
                    &mut ChaCha8Rng::seed_from_u64(beam_seed),
                );
                let report = evaluate_solution(&w, &fa, &scenario, config);
                SchemeResult {
                    scheme,
                    rate: rate_at(&link_budget(&scenario, &fa, config), &w),
                    outage: false,
                    constraints_met: report.satisfied(config.p_max),
                    report,
                    positions: fa.clone(),
                    w: w.iter().copied().collect(),
                    outer_iterations: 0,
                    ao_trace: None,
                    sca_trace: None,
                }
            }
        };
        results.push(result);
    }
    Ok(TrialResult {
        trial,
        seed,
        fingerprint: scenario.fingerprint(),
        schemes: results,
        wall_time: started.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub mean_rate: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_rate: f64,
    pub trials: usize,
    pub outages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// `None` for a single unswept run.
    pub axis_value: Option<f64>,
    pub summaries: Vec<SchemeSummary>,
    pub trials: Vec<TrialResult>,
}

impl SweepPoint {
    pub fn summary(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.summaries.iter().find(|s| s.scheme == scheme)
    }

    pub fn mean(&self, scheme: Scheme) -> Option<f64> {
        self.summary(scheme).map(|s| s.mean_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// `power`, `paths`, `antennas`, or `none`.
    pub axis: String,
    pub seed_base: u64,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub config: ScenarioConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    /// Any scheme, on any trial, reporting the BER cap unreachable.
    pub fn has_outage(&self) -> bool {
        self.points
            .iter()
            .flat_map(|p| &p.trials)
            .flat_map(|t| &t.schemes)
            .any(|s| s.outage)
    }
}

fn summarize(scheme: Scheme, trials: &[TrialResult]) -> SchemeSummary {
    let rates: Vec<f64> = trials.iter().filter_map(|t| t.rate(scheme)).collect();
    let n = rates.len();
    let mean = rates.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SchemeSummary {
        scheme,
        mean_rate: mean,
        std_rate: std,
        trials: n,
        outages: trials
            .iter()
            .filter_map(|t| t.get(scheme))
            .filter(|s| s.outage)
            .count(),
    }
}

/// Averages every scheme over `trials` seeded trials at each axis value.
///
/// Trial `i` uses seed `config.seed + i` at every axis value. Trials run in
/// parallel; results are ordered by (axis value, trial index) regardless of
/// scheduling. With `axis = None` a single point is run at `config` as is.
pub fn sweep(
    config: &ScenarioConfig,
    axis: Option<SweepAxis>,
    values: &[f64],
    trials: usize,
    schemes: &[Scheme],
) -> Result<SweepReport, HarnessError> {
    if schemes.is_empty() {
        return Err(HarnessError::NoSchemes);
    }
    if trials == 0 {
        return Err(ConfigError::Invalid {
            field: "trials",
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let mut schemes = schemes.to_vec();
    schemes.sort();
    schemes.dedup();
    let points: Vec<(Option<f64>, ScenarioConfig)> = match axis {
        Some(axis) => {
            if values.is_empty() {
                return Err(HarnessError::EmptyValues);
            }
            values
                .iter()
                .map(|&v| Ok((Some(v), axis.apply(config, v)?)))
                .collect::<Result<_, ConfigError>>()?
        }
        None => vec![(None, config.clone())],
    };
    for (_, c) in &points {
        fa_positions(c.antennas, c.wavelength, &c.region())?;
    }

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(p, t)| {
            run_trial(
                &points[p].1,
                t,
                config.seed.wrapping_add(t as u64),
                &schemes,
            )
        })
        .collect::<Result<_, _>>()?;

    let mut chunks = results.chunks(trials);
    let points = points
        .iter()
        .map(|(value, _)| {
            let trial_results = chunks.next().expect("one chunk per point").to_vec();
            SweepPoint {
                axis_value: *value,
                summaries: schemes
                    .iter()
                    .map(|&s| summarize(s, &trial_results))
                    .collect(),
                trials: trial_results,
            }
        })
        .collect();
    Ok(SweepReport {
        axis: axis.map_or("none", SweepAxis::name).to_string(),
        seed_base: config.seed,
        trials,
        schemes,
        config: config.clone(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv|json)")),
        }
    }
}

pub const CSV_HEADER: &str = "axis_name,axis_value,scheme,mean_rate_bits,std_rate,trials,seed_base";

/// One row per (axis value, scheme).
pub fn to_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for point in &report.points {
        let value = point.axis_value.map(|v| v.to_string()).unwrap_or_default();
        for s in &point.summaries {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                report.axis, value, s.scheme, s.mean_rate, s.std_rate, s.trials, report.seed_base
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn to_json(report: &SweepReport) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_outputs(
    report: &SweepReport,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    let path = path.as_ref();
    let body = match format {
        OutputFormat::Csv => to_csv(report),
        OutputFormat::Json => to_json(report)?,
    };
    std::fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads back a JSON report written by [`write_outputs`].
pub fn load_report(path: impl AsRef<Path>) -> Result<SweepReport, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}
