// Joint beam and placement optimization on one draw, compared with the fixed array.

use std::error::Error;

use masr::ao::{alternate, AoOptions};
use masr::channel::draw_scenario;
use masr::config::ScenarioConfig;
use masr::harness::fa_positions;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = ScenarioConfig::test();
    let scenario = draw_scenario(&config, &mut ChaCha8Rng::seed_from_u64(21));
    let start = fa_positions(config.antennas, config.wavelength, &config.region())?;

    let fixed = AoOptions {
        move_antennas: false,
        ..AoOptions::default()
    };
    let fa = alternate(
        &scenario,
        &config,
        &start,
        &fixed,
        &mut ChaCha8Rng::seed_from_u64(0),
    )?;
    let ma = alternate(
        &scenario,
        &config,
        &start,
        &AoOptions::default(),
        &mut ChaCha8Rng::seed_from_u64(0),
    )?;

    println!("fixed array: {:.4} bits", fa.rate);
    println!(
        "movable:     {:.4} bits after {} outer iterations",
        ma.rate, ma.trace.outer_iterations
    );
    println!("rate per outer iteration: {:?}", ma.trace.rates);
    let r = &ma.report;
    println!(
        "margins: power {:.2e} W, BER {:.2e}, region {:.4} m, spacing {:?}",
        r.power_margin, r.ber_margin, r.region_margin, r.spacing_margin
    );
    println!(
        "work: {} swarm evaluations, {} SCA iterations, {} newton steps",
        ma.trace.swarm_evaluations, ma.trace.sca_iterations, ma.trace.newton_steps
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
