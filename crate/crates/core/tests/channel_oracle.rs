use std::f64::consts::PI;

use masr::channel::{
    synthesize_bd_pu_channel, synthesize_pt_channel, AntennaPosition, LinkRealization, PathAngles,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `conj(f^H Σ G)` with Σ expanded to a full diagonal matrix and every sum spelled out.
fn oracle_vector(
    positions: &[AntennaPosition],
    link: &LinkRealization,
    rx: AntennaPosition,
) -> Vec<Complex64> {
    let l = link.path_responses.len();
    let lambda = link.wavelength;
    let phase = |p: AntennaPosition, theta: f64, phi: f64| {
        let rho = p.x * theta.sin() * phi.cos() + p.y * theta.cos();
        Complex64::new(0.0, 2.0 * PI / lambda * rho).exp()
    };
    let mut out = Vec::new();
    for &p in positions {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..l {
            let r = link.receive_angles[n];
            let f_n = phase(rx, r.elevation, r.azimuth);
            for m in 0..l {
                let sigma = if n == m {
                    link.path_responses[n]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let t = link.transmit_angles[m];
                acc += f_n.conj() * sigma * phase(p, t.elevation, t.azimuth);
            }
        }
        out.push(acc.conj());
    }
    out
}

fn random_link(rng: &mut ChaCha8Rng, l: usize) -> LinkRealization {
    let mut angles = || {
        (0..l)
            .map(|_| {
                PathAngles::new(
                    rng.random_range(-PI / 2.0..PI / 2.0),
                    rng.random_range(-PI / 2.0..PI / 2.0),
                )
            })
            .collect::<Vec<_>>()
    };
    let transmit_angles = angles();
    let receive_angles = angles();
    LinkRealization {
        transmit_angles,
        receive_angles,
        path_responses: (0..l)
            .map(|_| Complex64::new(rng.random_range(-1e-2..1e-2), rng.random_range(-1e-2..1e-2)))
            .collect(),
        wavelength: 0.1,
    }
}

#[test]
fn matches_nested_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let k = rng.random_range(1..=4);
        let l = rng.random_range(1..=4);
        let link = random_link(&mut rng, l);
        let positions: Vec<AntennaPosition> = (0..k)
            .map(|_| {
                AntennaPosition::new(rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15))
            })
            .collect();
        let rx = AntennaPosition::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
        let got = synthesize_pt_channel(&positions, &link, rx).unwrap();
        let want = oracle_vector(&positions, &link, rx);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10);
        }
        let scalar = synthesize_bd_pu_channel(&link, positions[0], rx).unwrap();
        assert!((scalar - want[0].conj()).norm() < 1e-10);
    }
}

#[test]
fn origin_antenna_sees_sum_of_gains() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let link = random_link(&mut rng, 3);
    let h =
        synthesize_pt_channel(&[AntennaPosition::ORIGIN], &link, AntennaPosition::ORIGIN).unwrap();
    let sum: Complex64 = link.path_responses.iter().sum();
    assert!((h[0] - sum.conj()).norm() < 1e-15);
}

proptest! {
    #[test]
    fn single_path_magnitude_is_position_free(
        x in -0.15f64..0.15, y in -0.15f64..0.15,
        az in -1.5f64..1.5, el in -1.5f64..1.5,
    ) {
        let link = LinkRealization {
            transmit_angles: vec![PathAngles::new(az, el)],
            receive_angles: vec![PathAngles::new(0.3, -0.2)],
            path_responses: vec![Complex64::new(3e-3, -4e-3)],
            wavelength: 0.1,
        };
        let h = synthesize_pt_channel(&[AntennaPosition::new(x, y)], &link, AntennaPosition::ORIGIN).unwrap();
        prop_assert!((h[0].norm() - 5e-3).abs() < 1e-15);
    }
}
