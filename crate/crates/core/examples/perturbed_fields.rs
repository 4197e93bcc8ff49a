//! The perturbation exp(-iδM) absorbed into shifted kick fields, and the
//! size of what the first-order map leaves out.

use kifid::dense;
use kifid::observables::Axis;
use kifid::state::KickedIsingParams;
use kifid::theory::perturbed_field_map;

fn main() -> kifid::Result<()> {
    let (l, j, h_x, h_z) = (6, 1.0, 1.4, 0.4);
    let params = KickedIsingParams::new(j, h_x, h_z)?;
    for delta in [4e-3, 2e-3, 1e-3] {
        let (hx2, hz2) = perturbed_field_map(h_x, h_z, delta)?;
        let u_delta = dense::perturbed_floquet_matrix(l, &params, delta)?;
        let u_mapped = dense::floquet_matrix(l, &KickedIsingParams::new(j, hx2, hz2)?)?;
        // Rotate about z to absorb the induced σ^y field; the angle follows
        // from the y component h_z δ of the exact first-order kick.
        let phi = -(h_z * delta).atan2(hx2);
        let r = dense::unitary_from_generator(&dense::magnetization(l, Axis::Z), phi / 2.0);
        let gauged = &r * &u_delta * r.adjoint();
        println!(
            "δ = {delta:.0e}: h_x' = {hx2:.6}, h_z' = {hz2:.6}, |U_δ - U'| = {:.2e}, after z-rotation {:.2e}",
            dense::operator_norm(&(&u_delta - &u_mapped)),
            dense::operator_norm(&(gauged - &u_mapped)),
        );
    }
    Ok(())
}
