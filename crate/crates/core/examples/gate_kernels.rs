//! Evolve a random state through the kicked Ising map and compare the bitwise
//! kernels with the dense propagator on a small ring.

use kifid::dense;
use kifid::state::{floquet_step, inverse_floquet_step, random_state, KickedIsingParams, RngSeed};

fn main() -> kifid::Result<()> {
    let params = KickedIsingParams::new(1.0, 1.4, 0.4)?;

    let l = 8;
    let mut psi = random_state(l, RngSeed(1))?;
    let u = dense::floquet_matrix(l, &params)?;
    let mut reference = psi.clone();
    for _ in 0..20 {
        floquet_step(&mut psi, &params);
        reference = dense::apply(&u, &reference)?;
    }
    println!("L = {l}, 20 periods: max |gate - dense| = {:.2e}", psi.max_abs_diff(&reference)?);

    let l = 16;
    let start = random_state(l, RngSeed(2))?;
    let mut psi = start.clone();
    for _ in 0..1000 {
        floquet_step(&mut psi, &params);
    }
    println!("L = {l}, 1000 periods: |1 - norm| = {:.2e}", (1.0 - psi.norm()).abs());
    for _ in 0..1000 {
        inverse_floquet_step(&mut psi, &params);
    }
    println!("L = {l}, forward then back: max deviation = {:.2e}", psi.max_abs_diff(&start)?);
    Ok(())
}
