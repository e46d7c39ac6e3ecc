// Beamforming for a fixed antenna layout by successive convex approximation.

use std::error::Error;

use masr::ao::{evaluate_solution, initial_positions, link_budget};
use masr::beamforming::sca_optimize;
use masr::channel::draw_scenario;
use masr::config::ScenarioConfig;
use masr::metrics::min_snr_for_ber;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = ScenarioConfig::test();
    let scenario = draw_scenario(&config, &mut ChaCha8Rng::seed_from_u64(5));
    let positions = initial_positions(config.antennas, &config);
    let lb = link_budget(&scenario, &positions, &config);
    let gamma_min = min_snr_for_ber(config.ber_max)?;

    let (beam, trace) = sca_optimize(&lb, config.p_max, gamma_min, config.tolerance)?;
    for (i, v) in trace.surrogate_values.iter().enumerate() {
        println!("iteration {i}: {v:.6} bits");
    }
    println!(
        "converged: {} after {} iterations",
        trace.converged, trace.iterations
    );

    let report = evaluate_solution(&beam.w, &positions, &scenario, &config);
    println!(
        "R_p = {:.4} bits, power margin {:.2e} W, BER {:.4} (cap {})",
        beam.rate, report.power_margin, report.ber, config.ber_max
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
