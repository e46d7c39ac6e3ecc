// A short paths sweep over all four schemes, written as CSV.

use std::error::Error;

use masr::config::ScenarioConfig;
use masr::harness::{sweep, to_csv, Scheme, SweepAxis};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = ScenarioConfig::test();
    let report = sweep(
        &config,
        Some(SweepAxis::Paths),
        &[3.0, 6.0, 9.0],
        4,
        &Scheme::ALL,
    )?;
    print!("{}", to_csv(&report));
    for point in &report.points {
        let fa = point.mean(Scheme::Fa).unwrap_or(0.0);
        let ma = point.mean(Scheme::MaSaPso).unwrap_or(0.0);
        println!(
            "L = {:?}: movable gain over fixed {:+.3} bits",
            point.axis_value.unwrap_or(0.0),
            ma - fa
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
