//! Fidelity of the known reference codes against the bare physical level.
//!
//! Run with `cargo run --release --example reference_codes`.

use aqec::{binomial_code, fidelity, ladder_code, photon_loss, uniform_decay, AqecCode, Result};
use aqec::oracle::relaxation_fidelity;

fn main() -> Result<()> {
    let tau = 1.0;
    let ratio = 1e6;

    println!("unprotected qubit, F(1) = {:.7}", relaxation_fidelity(tau));

    let thirteen = aqec::thirteen_code(ratio)?;
    let f = fidelity(&uniform_decay(4)?, &thirteen, tau)?;
    println!("13 code on uniform decay, n=4:  F = {f:.9}  (1-F = {:.3e})", 1.0 - f);

    let binomial = binomial_code(ratio)?;
    let f = fidelity(&photon_loss(5)?, &binomial, tau)?;
    println!("binomial code on photon loss, n=5: F = {f:.9}  (1-F = {:.3e})", 1.0 - f);

    for n in [6, 8] {
        let ladder = ladder_code(n, ratio)?;
        let f = fidelity(&uniform_decay(n)?, &ladder, tau)?;
        println!("ladder code on uniform decay, n={n}: F = {f:.9}");
    }

    // stripping the engineered dissipation leaves only the passive words
    let passive = AqecCode::passive(thirteen.word0().clone(), thirteen.word1().clone())?;
    let f = fidelity(&uniform_decay(4)?, &passive, tau)?;
    println!("13 code words without correction: F = {f:.6}");
    Ok(())
}
