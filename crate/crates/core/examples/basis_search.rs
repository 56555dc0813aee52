//! Basis-only search: the 13 code's dissipation and control are held fixed
//! while the code words start from a random pair. The words find their way
//! back to the 13 code subspace within a handful of iterations.

use aqec::optimizer::{init_random, optimize, OptimizerConfig};
use aqec::{thirteen_code, uniform_decay, Result};

fn main() -> Result<()> {
    let model = uniform_decay(4)?;
    let reference = thirteen_code(1e6)?;
    for seed in 0..3 {
        let cfg = OptimizerConfig {
            seed,
            max_iterations: 10,
            freeze_b: true,
            freeze_o: true,
            ..Default::default()
        };
        let random = init_random(&model, &cfg)?;
        let start = reference.with_words(random.word0().clone(), random.word1().clone())?;
        let (code, log) = optimize(&model, &cfg, Some(start))?;
        println!("seed {seed}: F {:.6} -> {:.9} in {} iterations ({})",
            log.initial_fidelity, log.final_fidelity(), log.iterations(),
            log.termination.map(|t| t.to_string()).unwrap_or_default());
        let overlap: f64 = [reference.word0(), reference.word1()]
            .iter()
            .flat_map(|r| [code.word0(), code.word1()].map(|w| r.inner(w).norm_sqr()))
            .sum();
        println!("         overlap with the 13 code space: {:.9} of 2", overlap);
    }
    Ok(())
}
