use masr::channel::{AntennaPosition, PlacementRegion};
use masr::config::ScenarioConfig;
use masr::swarm::{run_sa_pso, violation_count, Evaluation, SaPsoParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Multimodal landscape with a spacing penalty, cheap enough for many cases.
fn landscape(p: &[AntennaPosition], d_min: f64) -> Evaluation {
    let rate: f64 = p
        .iter()
        .map(|q| (40.0 * q.x).sin() * (30.0 * q.y).cos() + 2.0 - 10.0 * (q.x * q.x + q.y * q.y))
        .sum();
    let violations = violation_count(p, d_min);
    Evaluation {
        fitness: rate - 5.0 * violations as f64,
        rate,
        violations,
        ber_violated: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trajectories_respect_invariants(
        seed in any::<u64>(),
        antennas in 1usize..4,
        swarm_size in 2usize..12,
        iterations in 1usize..25,
        side in 0.1f64..0.5,
        annealing in any::<bool>(),
    ) {
        let params = SaPsoParams {
            swarm_size,
            max_iterations: iterations,
            penalty: 5.0,
            region: PlacementRegion::centered_square(side),
            annealing,
            ..SaPsoParams::from_config(&ScenarioConfig::test(), annealing)
        };
        let d_min = params.d_min;
        let out = run_sa_pso(|p| landscape(p, d_min), antennas, &params, None, &mut ChaCha8Rng::seed_from_u64(seed));

        prop_assert_eq!(out.best_positions.len(), antennas);
        prop_assert!(out.best_positions.iter().all(|&p| params.region.contains(p)));
        prop_assert!(out.incumbent_trace.windows(2).all(|w| w[1] >= w[0]));
        let temps = &out.temperature_trace;
        prop_assert_eq!(temps.len(), iterations);
        prop_assert_eq!(temps[0], params.initial_temperature);
        if iterations > 1 {
            prop_assert_eq!(temps[1], temps[0]);
            prop_assert!(temps[1..].windows(2).all(|w| w[1] < w[0]));
        }
        prop_assert!(out.temperature_trace.iter().all(|&t| t > 0.0));
        prop_assert_eq!(out.evaluations, swarm_size * (iterations + 1));
        let top = out.incumbent_trace.last().copied().unwrap();
        prop_assert_eq!(top, landscape(&out.best_positions, d_min).fitness);
        if !annealing {
            prop_assert_eq!(out.sa_acceptances, 0);
            prop_assert_eq!(&out.global_best_trace, &out.incumbent_trace);
        }
    }
}
