//! Geometric multipath channels for a movable-antenna transmitter.
//!
//! Conjugation convention: a channel vector `h` is stored so that the
//! received scalar for beamformer `w` is `h^H w`. For a link with receive
//! response `f`, path gains `σ` and transmit responses `g(p_k)`,
//!
//! ```text
//! h^H = f^H diag(σ) G    =>    h_k = conj( Σ_m conj(f_m) σ_m g_m(p_k) )
//! ```
//!
//! Path-loss distances use the node-level topology (PT at the origin, BD at
//! (30, 40) m, PU at (ξ, 0) m). Antenna coordinates are local to each node's
//! placement region and only affect path phases.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::ModelError;

/// Backscatter device location in the topology plane, meters.
pub const BD_LOCATION: (f64, f64) = (30.0, 40.0);
/// Range of the primary user's x coordinate, meters.
pub const PU_X_RANGE: (f64, f64) = (30.0, 60.0);

/// Axis-aligned rectangle the movable antennas are confined to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlacementRegion {
    /// Square of the given side centered at the origin.
    pub fn centered_square(side: f64) -> Self {
        let h = side / 2.0;
        Self {
            x_min: -h,
            x_max: h,
            y_min: -h,
            y_max: h,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: AntennaPosition) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    /// Smallest distance from `p` to any of the four edges; negative when outside.
    pub fn margin(&self, p: AntennaPosition) -> f64 {
        (p.x - self.x_min)
            .min(self.x_max - p.x)
            .min(p.y - self.y_min)
            .min(self.y_max - p.y)
    }
}

/// Antenna coordinates in meters, local to the owning node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AntennaPosition {
    pub x: f64,
    pub y: f64,
}

impl AntennaPosition {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Azimuth and elevation of one propagation path, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathAngles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl PathAngles {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }
}

/// One drawn multipath link: per-path angles at both ends and diagonal path gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRealization {
    pub transmit_angles: Vec<PathAngles>,
    pub receive_angles: Vec<PathAngles>,
    pub path_responses: Vec<Complex64>,
    pub wavelength: f64,
}

impl LinkRealization {
    pub fn paths(&self) -> usize {
        self.path_responses.len()
    }

    fn check(&self) -> Result<(), ModelError> {
        let l = self.path_responses.len();
        if l == 0 {
            return Err(ModelError::NoPaths);
        }
        if !(self.wavelength > 0.0) {
            return Err(ModelError::NonPositiveWavelength(self.wavelength));
        }
        for (what, got) in [
            ("transmit_angles", self.transmit_angles.len()),
            ("receive_angles", self.receive_angles.len()),
        ] {
            if got != l {
                return Err(ModelError::LengthMismatch {
                    what,
                    got,
                    expected: l,
                });
            }
        }
        Ok(())
    }
}

/// Extra propagation distance of a transmit path relative to the region origin.
pub fn transmit_path_difference(p: AntennaPosition, a: PathAngles) -> f64 {
    p.x * a.elevation.sin() * a.azimuth.cos() + p.y * a.elevation.cos()
}

/// Receive-side counterpart of [`transmit_path_difference`]; same geometry.
pub fn receive_path_difference(p: AntennaPosition, a: PathAngles) -> f64 {
    transmit_path_difference(p, a)
}

/// Unit-modulus phase vector `exp(j 2π/λ ρ_m(p))` over the given paths.
pub fn field_response_vector(
    p: AntennaPosition,
    angles: &[PathAngles],
    wavelength: f64,
) -> Result<Vec<Complex64>, ModelError> {
    if !(wavelength > 0.0) {
        return Err(ModelError::NonPositiveWavelength(wavelength));
    }
    if angles.is_empty() {
        return Err(ModelError::NoPaths);
    }
    let k0 = 2.0 * PI / wavelength;
    Ok(angles
        .iter()
        .map(|&a| Complex64::from_polar(1.0, k0 * transmit_path_difference(p, a)))
        .collect())
}

/// Channel vector from the movable-antenna transmitter to a fixed receiver.
pub fn synthesize_pt_channel(
    positions: &[AntennaPosition],
    link: &LinkRealization,
    receive_pos: AntennaPosition,
) -> Result<DVector<Complex64>, ModelError> {
    if positions.is_empty() {
        return Err(ModelError::NoAntennas);
    }
    link.check()?;
    let f = field_response_vector(receive_pos, &link.receive_angles, link.wavelength)?;
    // conj(f_m) σ_m is shared by every antenna
    let weights: Vec<Complex64> = f
        .iter()
        .zip(&link.path_responses)
        .map(|(fm, s)| fm.conj() * s)
        .collect();
    let k0 = 2.0 * PI / link.wavelength;
    let h = positions.iter().map(|&p| {
        let sum: Complex64 = weights
            .iter()
            .zip(&link.transmit_angles)
            .map(|(c, &a)| c * Complex64::from_polar(1.0, k0 * transmit_path_difference(p, a)))
            .sum();
        sum.conj()
    });
    Ok(DVector::from_iterator(positions.len(), h))
}

/// Scalar BD→PU channel `f_u^H Σ_s g_s`.
pub fn synthesize_bd_pu_channel(
    link: &LinkRealization,
    bd_pos: AntennaPosition,
    pu_pos: AntennaPosition,
) -> Result<Complex64, ModelError> {
    link.check()?;
    let f = field_response_vector(pu_pos, &link.receive_angles, link.wavelength)?;
    let g = field_response_vector(bd_pos, &link.transmit_angles, link.wavelength)?;
    Ok(f.iter()
        .zip(&link.path_responses)
        .zip(&g)
        .map(|((fm, s), gm)| fm.conj() * s * gm)
        .sum())
}

/// One random draw of the topology and all three multipath links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRealization {
    pub link_pt_bd: LinkRealization,
    pub link_pt_pu: LinkRealization,
    pub link_bd_pu: LinkRealization,
    pub bd_position: AntennaPosition,
    pub pu_position: AntennaPosition,
    /// Primary user x coordinate in the topology plane, meters.
    pub pu_topology_x: f64,
    pub h_s: Complex64,
}

impl ScenarioRealization {
    pub fn pt_bd_distance(&self) -> f64 {
        BD_LOCATION.0.hypot(BD_LOCATION.1)
    }

    pub fn pt_pu_distance(&self) -> f64 {
        self.pu_topology_x
    }

    pub fn bd_pu_distance(&self) -> f64 {
        bd_pu_distance(self.pu_topology_x)
    }

    /// PT→PU channel for the given antenna layout.
    pub fn h_u(&self, positions: &[AntennaPosition]) -> Result<DVector<Complex64>, ModelError> {
        synthesize_pt_channel(positions, &self.link_pt_pu, self.pu_position)
    }

    /// PT→BD channel for the given antenna layout.
    pub fn h_b(&self, positions: &[AntennaPosition]) -> Result<DVector<Complex64>, ModelError> {
        synthesize_pt_channel(positions, &self.link_pt_bd, self.bd_position)
    }

    /// Hex SHA-256 over every drawn number, used to audit that schemes share a draw.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        let mut put = |v: f64| hasher.update(v.to_le_bytes());
        for link in [&self.link_pt_bd, &self.link_pt_pu, &self.link_bd_pu] {
            put(link.wavelength);
            for (t, r) in link.transmit_angles.iter().zip(&link.receive_angles) {
                put(t.azimuth);
                put(t.elevation);
                put(r.azimuth);
                put(r.elevation);
            }
            for s in &link.path_responses {
                put(s.re);
                put(s.im);
            }
        }
        put(self.pu_topology_x);
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// BD–PU distance for a primary user at (ξ, 0).
pub fn bd_pu_distance(pu_x: f64) -> f64 {
    (BD_LOCATION.0 - pu_x).hypot(BD_LOCATION.1)
}

/// Per-path gain variance `υ d^{-ν} / L`.
pub fn path_variance(config: &ScenarioConfig, distance: f64) -> f64 {
    config.path_loss * distance.powf(-config.path_loss_exponent) / config.paths as f64
}

fn draw_link<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    distance: f64,
    rng: &mut R,
) -> LinkRealization {
    let angle = Uniform::new_inclusive(-FRAC_PI_2, FRAC_PI_2).expect("valid angle range");
    let l = config.paths;
    let angles = |rng: &mut R| -> Vec<PathAngles> {
        (0..l)
            .map(|_| PathAngles::new(angle.sample(rng), angle.sample(rng)))
            .collect()
    };
    let transmit_angles = angles(rng);
    let receive_angles = angles(rng);
    let scale = (path_variance(config, distance) / 2.0).sqrt();
    let path_responses = (0..l)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(scale * re, scale * im)
        })
        .collect();
    LinkRealization {
        transmit_angles,
        receive_angles,
        path_responses,
        wavelength: config.wavelength,
    }
}

/// Draws node placement, angles and path gains from a seeded stream.
///
/// The stream is consumed in a fixed order (PU position, PT→BD, PT→PU,
/// BD→PU) so a seed pins the realization exactly.
pub fn draw_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> ScenarioRealization {
    let pu_x = Uniform::new_inclusive(PU_X_RANGE.0, PU_X_RANGE.1)
        .expect("valid PU range")
        .sample(rng);
    let pt_bd = BD_LOCATION.0.hypot(BD_LOCATION.1);
    let link_pt_bd = draw_link(config, pt_bd, rng);
    let link_pt_pu = draw_link(config, pu_x, rng);
    let link_bd_pu = draw_link(config, bd_pu_distance(pu_x), rng);
    let bd_position = AntennaPosition::ORIGIN;
    let pu_position = AntennaPosition::ORIGIN;
    let h_s = synthesize_bd_pu_channel(&link_bd_pu, bd_position, pu_position)
        .expect("drawn link is well formed");
    ScenarioRealization {
        link_pt_bd,
        link_pt_pu,
        link_bd_pu,
        bd_position,
        pu_position,
        pu_topology_x: pu_x,
        h_s,
    }
}
