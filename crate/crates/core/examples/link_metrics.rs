// BER-to-SNR inversion and the primary/secondary link figures for two beams.

use std::error::Error;

use masr::ao::{initial_positions, link_budget};
use masr::channel::draw_scenario;
use masr::config::ScenarioConfig;
use masr::linalg::CVector;
use masr::metrics::{min_snr_for_ber, primary_rate, primary_sinr, secondary_ber, secondary_snr};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("e_max   gamma_min");
    for e in [0.01, 0.05, 0.1, 0.2, 0.3, 0.4] {
        println!("{e:<6}  {:.6}", min_snr_for_ber(e)?);
    }

    let config = ScenarioConfig::test();
    let scenario = draw_scenario(&config, &mut ChaCha8Rng::seed_from_u64(1));
    let positions = initial_positions(config.antennas, &config);
    let lb = link_budget(&scenario, &positions, &config);
    let scale = |h: &CVector| h.normalize() * Complex64::new(config.p_max.sqrt(), 0.0);
    for (label, w) in [("toward PU", scale(&lb.h_u)), ("toward BD", scale(&lb.h_b))] {
        let snr = secondary_snr(&lb, &w);
        println!(
            "{label}: R_p = {:.3} bits, gamma_c = {:.3}, BER = {:.4}",
            primary_rate(primary_sinr(&lb, &w))?,
            snr,
            secondary_ber(snr)?
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
