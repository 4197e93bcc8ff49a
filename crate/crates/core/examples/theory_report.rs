//! Closed-form time scales for the three parameter points.

use kifid::harness::commands::{cmd_theory, to_pretty_json, TheoryRequest};
use kifid::harness::Preset;
use kifid::theory::{d_sigma_x, fit_plateau_constant};

fn main() -> kifid::Result<()> {
    let report = cmd_theory(&TheoryRequest {
        params: Preset::Integrable.params(),
        n_sites: 24,
        delta_prime: 0.02,
        s_a: None,
        c_a: None,
        d_a: None,
    })?;
    println!("{}", to_pretty_json(&report)?);

    // Ergodic point: S_M/L ≈ 1.18 as measured at L = 14, and an illustrative
    // plateau constant fitted to D(L) ≈ c/2^L.
    let c = fit_plateau_constant(&[(10, 0.035), (12, 0.0127), (14, 0.0031)])?;
    let report = cmd_theory(&TheoryRequest {
        params: Preset::Ergodic.params(),
        n_sites: 24,
        delta_prime: 0.01,
        s_a: Some(1.18 * 24.0),
        c_a: Some(c),
        d_a: None,
    })?;
    println!("{}", to_pretty_json(&report)?);

    for j in [0.05, 0.1, 0.2, 1.0, 1.5] {
        println!("D_σx(J = {j}, h_x = 1.4) = {:.6}", d_sigma_x(j, 1.4)?);
    }
    Ok(())
}
