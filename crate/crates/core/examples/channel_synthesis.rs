// Draws one scenario and shows how moving the antennas reshapes the channels.

use std::error::Error;

use masr::ao::initial_positions;
use masr::channel::{draw_scenario, AntennaPosition};
use masr::config::ScenarioConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = ScenarioConfig::test();
    let scenario = draw_scenario(&config, &mut ChaCha8Rng::seed_from_u64(7));
    println!("realization {}", &scenario.fingerprint()[..16]);
    println!(
        "PT-PU {:.2} m, PT-BD {:.2} m, BD-PU {:.2} m, |h_s|^2 = {:.3e}",
        scenario.pt_pu_distance(),
        scenario.pt_bd_distance(),
        scenario.bd_pu_distance(),
        scenario.h_s.norm_sqr()
    );

    let grid = initial_positions(config.antennas, &config);
    let shifted: Vec<AntennaPosition> = grid
        .iter()
        .map(|p| AntennaPosition::new(p.x + 0.02, p.y - 0.01))
        .collect();
    for (label, layout) in [("grid", &grid), ("shifted", &shifted)] {
        let h_u = scenario.h_u(layout)?;
        let h_b = scenario.h_b(layout)?;
        println!(
            "{label:>8}: |h_u|^2 = {:.4e}  |h_b|^2 = {:.4e}",
            h_u.norm_squared(),
            h_b.norm_squared()
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
