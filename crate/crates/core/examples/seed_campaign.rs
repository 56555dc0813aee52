//! Several independent random starts run concurrently, ranked by final
//! fidelity, with leakage out of the {|1>, |3>} subspace tracked along the
//! way.
//!
//! `cargo run --release --example seed_campaign -- [seeds] [iterations]`

use aqec::optimizer::{multi_seed_with_targets, OptimizerConfig};
use aqec::{uniform_decay, Result, Subspace};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let max_iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);

    let model = uniform_decay(4)?;
    let cfg = OptimizerConfig { max_iterations, ..Default::default() };
    let target = Subspace::from_levels("odd", 4, &[1, 3])?;
    let runs = multi_seed_with_targets(&model, &cfg, seeds, &[target])?;

    println!("{:>4}  {:>10}  {:>10}  {:>8}", "seed", "F", "leakage", "iters");
    for run in &runs {
        let last = run.log.records.last();
        let leakage = last.and_then(|r| r.leakage.first().copied()).unwrap_or(f64::NAN);
        println!("{:>4}  {:>10.6}  {:>10.4}  {:>8}", run.seed, run.fidelity, leakage, run.log.iterations());
    }
    Ok(())
}
