//! The effective decay-rate reduction κ of the 13 code as the induced
//! rate grows, and how it depends on the two time multipliers.

use aqec::{kappa, thirteen_code, uniform_decay, KappaConfig, Result};

fn main() -> Result<()> {
    let model = uniform_decay(4)?;
    let cfg = KappaConfig::default();
    println!("{:>10}  {:>12}", "Γ/γ", "κ");
    for ratio in [1e1, 1e2, 1e3, 1e4, 1e5, 1e6] {
        let code = thirteen_code(ratio)?;
        println!("{ratio:>10.0e}  {:>12.4e}", kappa(&model, &code, &cfg)?);
    }

    let code = thirteen_code(1e6)?;
    for (beta1, beta2) in [(0.3, 0.1), (0.5, 0.1), (0.2, 0.05)] {
        let k = kappa(&model, &code, &KappaConfig { beta1, beta2 })?;
        println!("β = ({beta1}, {beta2}): κ = {k:.4e}");
    }
    Ok(())
}
