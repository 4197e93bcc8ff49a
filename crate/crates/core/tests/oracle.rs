//! Gate kernels and observables against dense Kronecker-product matrices.

use kifid::dense::{self, DenseMatrix};
use kifid::observables::{Axis, ObservableSpec};
use kifid::state::{
    apply_kick_layer, apply_perturbation_kick, apply_site_gate, apply_zz_layer, floquet_step, kick_gate,
    perturbed_floquet_step, random_state, KickedIsingParams, RngSeed, StateVector,
};
use kifid::theory::perturbed_field_map;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn dense_apply(m: &DenseMatrix, psi: &StateVector) -> StateVector {
    dense::apply(m, psi).unwrap()
}

#[test]
fn zz_layer_three_sites() {
    let mut psi = random_state(3, RngSeed(11)).unwrap();
    let expected = dense_apply(&dense::zz_layer_matrix(3, 0.7).unwrap(), &psi);
    apply_zz_layer(&mut psi, 0.7);
    assert!(psi.max_abs_diff(&expected).unwrap() <= 1e-12);
}

#[test]
fn kick_layer_three_sites() {
    let mut psi = random_state(3, RngSeed(12)).unwrap();
    let expected = dense_apply(&dense::kick_layer_matrix(3, 1.4, 0.4).unwrap(), &psi);
    apply_kick_layer(&mut psi, 1.4, 0.4);
    assert!(psi.max_abs_diff(&expected).unwrap() <= 1e-12);
}

#[test]
fn twenty_periods_at_eight_sites() {
    let params = KickedIsingParams::new(1.0, 1.4, 0.4).unwrap();
    let u = dense::floquet_matrix(8, &params).unwrap();
    let mut u20 = DenseMatrix::identity(256, 256);
    for _ in 0..20 {
        u20 = &u * u20;
    }
    let mut psi = random_state(8, RngSeed(3)).unwrap();
    let expected = dense_apply(&u20, &psi);
    for _ in 0..20 {
        floquet_step(&mut psi, &params);
    }
    assert!(psi.max_abs_diff(&expected).unwrap() <= 1e-10);
}

#[test]
fn perturbation_kick_six_sites() {
    let m = dense::magnetization(6, Axis::X);
    let mut psi = random_state(6, RngSeed(4)).unwrap();
    let expected = dense_apply(&dense::unitary_from_generator(&m, 0.01), &psi);
    apply_perturbation_kick(&mut psi, 0.01);
    assert!(psi.max_abs_diff(&expected).unwrap() <= 1e-12);
}

#[test]
fn perturbed_step_eight_sites() {
    let params = KickedIsingParams::new(1.0, 1.4, 1.4).unwrap();
    let ud = dense::perturbed_floquet_matrix(8, &params, 0.03).unwrap();
    let mut psi = random_state(8, RngSeed(5)).unwrap();
    let expected = dense_apply(&ud, &psi);
    perturbed_floquet_step(&mut psi, &params, 0.03);
    assert!(psi.max_abs_diff(&expected).unwrap() <= 1e-10);
}

#[test]
fn random_draws_up_to_eight_sites() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..24 {
        let l = rng.random_range(2..=8);
        let params = KickedIsingParams::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        )
        .unwrap();
        let delta = rng.random_range(-0.5..0.5);
        let psi = random_state(l, RngSeed(draw)).unwrap();

        let mut zz = psi.clone();
        apply_zz_layer(&mut zz, params.j_z);
        let mut kick = psi.clone();
        apply_kick_layer(&mut kick, params.h_x, params.h_z);
        let mut step = psi.clone();
        floquet_step(&mut step, &params);
        let mut pert = psi.clone();
        perturbed_floquet_step(&mut pert, &params, delta);

        let checks = [
            (zz, dense::zz_layer_matrix(l, params.j_z).unwrap()),
            (kick, dense::kick_layer_matrix(l, params.h_x, params.h_z).unwrap()),
            (step, dense::floquet_matrix(l, &params).unwrap()),
            (pert, dense::perturbed_floquet_matrix(l, &params, delta).unwrap()),
        ];
        for (i, (got, m)) in checks.iter().enumerate() {
            let err = got.max_abs_diff(&dense_apply(m, &psi)).unwrap();
            assert!(err <= 1e-10, "draw {draw}, op {i}, L={l}, {params:?}: {err:e}");
        }
    }
}

#[test]
fn site_order_of_kick_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gate = kick_gate(1.4, 0.4);
    let psi = random_state(9, RngSeed(6)).unwrap();
    let mut reference = psi.clone();
    apply_kick_layer(&mut reference, 1.4, 0.4);
    for _ in 0..5 {
        let mut order: Vec<usize> = (0..9).collect();
        order.shuffle(&mut rng);
        let mut s = psi.clone();
        for &site in &order {
            apply_site_gate(&mut s, site, &gate).unwrap();
        }
        assert!(s.max_abs_diff(&reference).unwrap() <= 1e-12, "{order:?}");
    }
}

#[test]
fn floquet_map_commutes_with_translation() {
    let params = KickedIsingParams::new(1.0, 1.4, 0.4).unwrap();
    for seed in 0..4 {
        let psi = random_state(10, RngSeed(seed)).unwrap();
        let mut ut = psi.translated();
        floquet_step(&mut ut, &params);
        let mut u = psi.clone();
        floquet_step(&mut u, &params);
        assert!(ut.max_abs_diff(&u.translated()).unwrap() <= 1e-12);
    }
}

#[test]
fn z_x_matches_dense() {
    let obs = ObservableSpec::translation_invariant("x", 6).unwrap();
    let dense_z = dense::magnetization(6, Axis::X) * c(1.0 / 6f64.sqrt());
    let psi = random_state(6, RngSeed(8)).unwrap();
    let got = obs.apply(&psi).unwrap();
    assert!(got.max_abs_diff(&dense_apply(&dense_z, &psi)).unwrap() <= 1e-12);
}

#[test]
fn two_site_pattern_matches_dense() {
    // Z:z0x = L^{-1/2} Σ_j σ^z_j σ^x_{j+2}
    let l = 5;
    let obs = ObservableSpec::translation_invariant("z0x", l).unwrap();
    let mut m = DenseMatrix::zeros(1 << l, 1 << l);
    for j in 0..l {
        m += dense::site_operator(l, j, &dense::pauli(Axis::Z)) * dense::site_operator(l, (j + 2) % l, &dense::pauli(Axis::X));
    }
    let m = m * c(1.0 / (l as f64).sqrt());
    let psi = random_state(l, RngSeed(13)).unwrap();
    assert!(obs.apply(&psi).unwrap().max_abs_diff(&dense_apply(&m, &psi)).unwrap() <= 1e-12);
}

#[test]
fn expectations_match_dense_quadratic_form() {
    let psi = random_state(8, RngSeed(10)).unwrap();
    let col = dense::to_column(&psi);
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        let obs = ObservableSpec::magnetization(8, axis);
        let m = dense::magnetization(8, axis);
        let expected = (col.adjoint() * &m * &col)[(0, 0)];
        let got = obs.expectation(&psi).unwrap();
        assert!((got - expected).norm() <= 1e-12, "{axis:?}");
        assert!(got.im.abs() <= 1e-12);
    }
}

/// Generator vector `(h_x, h_y, h_z)` of a 2×2 unitary `cos θ − i sin θ (m·σ)`.
fn generator_of(w: &DenseMatrix) -> [f64; 3] {
    let cos = w[(0, 0)].re;
    let sx = -w[(0, 1)].im;
    let sy = -w[(0, 1)].re;
    let sz = -w[(0, 0)].im;
    let sin = (sx * sx + sy * sy + sz * sz).sqrt();
    let theta = sin.atan2(cos);
    [theta * sx / sin, theta * sy / sin, theta * sz / sin]
}

fn single_kick(h_x: f64, h_z: f64) -> DenseMatrix {
    let gen = dense::pauli(Axis::X) * c(h_x) + dense::pauli(Axis::Z) * c(h_z);
    dense::unitary_from_generator(&gen, 1.0)
}

/// Residual of the first-order field map, with and without the global
/// z-rotation that removes the induced σ^y field.
fn field_map_residuals(delta: f64) -> (f64, f64) {
    let (l, j, h_x, h_z) = (6, 1.0, 1.4, 0.4);
    let params = KickedIsingParams::new(j, h_x, h_z).unwrap();
    let u_delta = dense::perturbed_floquet_matrix(l, &params, delta).unwrap();
    let (hx2, hz2) = perturbed_field_map(h_x, h_z, delta).unwrap();
    let u_mapped = dense::floquet_matrix(l, &KickedIsingParams::new(j, hx2, hz2).unwrap()).unwrap();

    let combined = single_kick(h_x, h_z) * dense::unitary_from_generator(&dense::pauli(Axis::X), delta);
    let [gx, gy, _] = generator_of(&combined);
    let phi = -gy.atan2(gx);
    let r = dense::unitary_from_generator(&dense::magnetization(l, Axis::Z), phi / 2.0);
    let gauged = &r * &u_delta * r.adjoint();
    (dense::operator_norm(&(gauged - &u_mapped)), dense::operator_norm(&(u_delta - u_mapped)))
}

#[test]
fn field_map_is_first_order_up_to_a_z_rotation() {
    let (r1, raw1) = field_map_residuals(1e-3);
    let (r2, _) = field_map_residuals(2e-3);
    assert!(r1 < 1e-5, "gauged residual {r1:e}");
    let ratio = r2 / r1;
    assert!((3.5..4.5).contains(&ratio), "residual scaling {ratio}");
    // Without the rotation the σ^y field leaves an O(δ) difference.
    assert!(raw1 > 10.0 * r1, "{raw1:e} vs {r1:e}");
}

#[test]
fn field_map_transverse_limit_is_exact() {
    let l = 5;
    let params = KickedIsingParams::new(0.8, 1.1, 0.0).unwrap();
    let (hx2, hz2) = perturbed_field_map(1.1, 0.0, 0.05).unwrap();
    let mapped = dense::floquet_matrix(l, &KickedIsingParams::new(0.8, hx2, hz2).unwrap()).unwrap();
    let u_delta = dense::perturbed_floquet_matrix(l, &params, 0.05).unwrap();
    assert!(dense::max_abs(&(u_delta - mapped)) <= 1e-12);
}
