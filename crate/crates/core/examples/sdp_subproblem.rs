// Solves one relaxed beamforming subproblem and inspects the optimum.

use std::error::Error;

use masr::ao::{initial_positions, link_budget};
use masr::beamforming::initialize_w;
use masr::channel::draw_scenario;
use masr::config::ScenarioConfig;
use masr::metrics::min_snr_for_ber;
use masr::sdp::{lifted_rate, solve_subproblem, surrogate_objective, SdpSubproblem, DEFAULT_GAP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = ScenarioConfig::test();
    let scenario = draw_scenario(&config, &mut ChaCha8Rng::seed_from_u64(3));
    let lb = link_budget(
        &scenario,
        &initial_positions(config.antennas, &config),
        &config,
    );
    let gamma_min = min_snr_for_ber(config.ber_max)?;
    let w_ref = initialize_w(&lb, config.p_max, gamma_min)?;
    let sp = SdpSubproblem::from_budget(&lb, config.p_max, gamma_min, w_ref.clone());

    println!(
        "at expansion point: surrogate {:.6}, rate {:.6}",
        surrogate_objective(&w_ref, &sp)?,
        lifted_rate(&w_ref, &sp)
    );
    let sol = solve_subproblem(&sp, DEFAULT_GAP)?;
    println!(
        "optimum: surrogate {:.6} bits, true rate {:.6} bits",
        sol.surrogate_value,
        lifted_rate(&sol.w_opt, &sp)
    );
    println!(
        "kkt residual {:.2e}, lambda2/lambda1 {:.2e}, {} newton steps over {} barrier rounds",
        sol.kkt_residual, sol.eigen_ratio, sol.newton_steps, sol.barrier_rounds
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
