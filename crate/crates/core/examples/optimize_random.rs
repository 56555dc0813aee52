//! Full search from a random starting point: code words, induced jumps and
//! the control Hamiltonian are all updated. Drives the optimizer one
//! iteration at a time and prints progress.
//!
//! `cargo run --release --example optimize_random -- [iterations] [seed]`

use aqec::optimizer::{Optimizer, OptimizerConfig};
use aqec::{uniform_decay, Result};
use std::time::Instant;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let max_iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let model = uniform_decay(4)?;
    let cfg = OptimizerConfig { seed, max_iterations, ..Default::default() };
    let mut opt = Optimizer::new(&model, &cfg, None)?;
    println!("start: F = {:.6}", opt.log().initial_fidelity);

    let t = Instant::now();
    let mut next_report = 1;
    while !opt.is_finished() {
        opt.step()?;
        let k = opt.log().iterations();
        if k == next_report {
            println!("iteration {k:>6}: 1-F = {:.3e}", 1.0 - opt.log().final_fidelity());
            next_report *= 10;
        }
    }
    let log = opt.log();
    println!(
        "done after {} iterations ({:.0} it/s): F = {:.6}, {}",
        log.iterations(),
        log.iterations() as f64 / t.elapsed().as_secs_f64(),
        log.final_fidelity(),
        log.termination.map(|r| r.to_string()).unwrap_or_default()
    );
    let code = &opt.state().code;
    println!("largest |b| entry {:.2}, largest |O| entry {:.2}",
        code.induced_jumps()[0].max_abs(), code.control().max_abs());
    Ok(())
}
