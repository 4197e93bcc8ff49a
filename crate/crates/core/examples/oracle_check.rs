//! Dense-matrix verification of the gate kernels, correlation and fidelity,
//! and the same check against the reversed factor order.

use kifid::harness::commands::{cmd_oracle_check, default_oracle_request};

fn main() -> kifid::Result<()> {
    let req = default_oracle_request();
    let ok = cmd_oracle_check(&req)?;
    println!(
        "L = {}, {} periods: state {:.1e}, perturbed {:.1e}, C_M {:.1e}, F {:.1e}, pure F {:.1e} -> passed {}",
        req.n_sites,
        req.steps,
        ok.max_state_deviation,
        ok.max_perturbed_state_deviation,
        ok.max_correlation_deviation,
        ok.max_fidelity_deviation,
        ok.max_pure_fidelity_deviation,
        ok.passed
    );
    let swapped = cmd_oracle_check(&kifid::harness::OracleRequest { swap_order: true, ..req })?;
    println!("reversed factor order: max deviation {:.2e} -> passed {}", swapped.max_deviation(), swapped.passed);
    Ok(())
}
