// Antenna placement for a fixed beam: SA-PSO against plain PSO on one draw.

use std::error::Error;

use masr::ao::{initial_positions, link_budget};
use masr::beamforming::sca_optimize;
use masr::channel::draw_scenario;
use masr::config::ScenarioConfig;
use masr::metrics::min_snr_for_ber;
use masr::swarm::{optimize_positions, PositionObjective, SaPsoParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = ScenarioConfig::test();
    let scenario = draw_scenario(&config, &mut ChaCha8Rng::seed_from_u64(11));
    let start = initial_positions(config.antennas, &config);
    let lb = link_budget(&scenario, &start, &config);
    let (beam, _) = sca_optimize(
        &lb,
        config.p_max,
        min_snr_for_ber(config.ber_max)?,
        config.tolerance,
    )?;
    println!("rate at starting layout: {:.4} bits", beam.rate);

    let objective = PositionObjective::new(&scenario, &beam.w, &config);
    for annealing in [true, false] {
        let params = SaPsoParams::from_config(&config, annealing);
        let out = optimize_positions(
            &objective,
            config.antennas,
            &params,
            Some(&start),
            &mut ChaCha8Rng::seed_from_u64(2),
        );
        println!(
            "{:>7}: best fitness {:.4} bits, feasible {}, {} SA moves, {} evaluations",
            if annealing { "SA-PSO" } else { "PSO" },
            out.best.fitness,
            out.feasible,
            out.sa_acceptances,
            out.evaluations
        );
        for p in &out.best_positions {
            println!("         ({:+.4}, {:+.4})", p.x, p.y);
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
