//! How the 13 code fares when the decay rates of the upper levels follow a
//! power law instead of being uniform. Writes nothing; the CLI `sweep`
//! command does the same with files.

use aqec::codes::free_slope;
use aqec::{fidelity, kappa, power_law, thirteen_code, KappaConfig, Result};

fn main() -> Result<()> {
    let code = thirteen_code(1e6)?;
    println!("{:>6}  {:>14}  {:>12}  {:>12}", "α", "1-F", "κ", "free slope");
    for i in 0..=10 {
        let alpha = i as f64 / 5.0;
        let model = power_law(4, alpha)?;
        let f = fidelity(&model, &code, 1.0)?;
        let k = kappa(&model, &code, &KappaConfig::default());
        let k = k.map(|k| format!("{k:.3e}")).unwrap_or_else(|e| e.to_string());
        println!("{alpha:>6.1}  {:>14.6e}  {k:>12}  {:>12.4}", 1.0 - f, free_slope(&model, &code)?);
    }
    Ok(())
}
