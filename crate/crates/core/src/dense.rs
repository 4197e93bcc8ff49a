//! Dense-matrix reference implementation for small chains.
//!
//! Everything here is built from explicit Kronecker products of 2×2 Pauli
//! matrices and a general matrix exponential, so it shares no code with the
//! bitwise kernels in [`crate::state`]. Intended for L ≤ 8.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::Axis;
use crate::state::{KickedIsingParams, StateVector};

pub type DenseMatrix = DMatrix<Complex64>;

/// Largest chain the dense oracle accepts (256×256 matrices).
pub const MAX_DENSE_SITES: usize = 8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> DenseMatrix {
    DenseMatrix::identity(2, 2)
}

/// Pauli matrix in the basis (|↑⟩, |↓⟩) = (bit 0, bit 1).
pub fn pauli(axis: Axis) -> DenseMatrix {
    match axis {
        Axis::X => DenseMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        Axis::Y => DenseMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        Axis::Z => DenseMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    }
}

pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DenseMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Embed single-site operators into the full space. `ops[j]` acts on site
/// `j`; site 0 is the least significant bit, so the product is
/// `ops[L-1] ⊗ … ⊗ ops[0]`.
pub fn kron_sites(ops: &[DenseMatrix]) -> DenseMatrix {
    let mut out = DenseMatrix::identity(1, 1);
    for op in ops {
        out = kron(op, &out);
    }
    out
}

pub fn site_operator(n_sites: usize, site: usize, op: &DenseMatrix) -> DenseMatrix {
    let ops: Vec<DenseMatrix> = (0..n_sites)
        .map(|j| if j == site { op.clone() } else { identity2() })
        .collect();
    kron_sites(&ops)
}

/// `Σ_j σ^z_j σ^z_{j+1}` on the periodic ring.
pub fn zz_bond_sum(n_sites: usize) -> DenseMatrix {
    let dim = 1 << n_sites;
    let mut out = DenseMatrix::zeros(dim, dim);
    let z = pauli(Axis::Z);
    for j in 0..n_sites {
        let ops: Vec<DenseMatrix> = (0..n_sites)
            .map(|k| if k == j || k == (j + 1) % n_sites { z.clone() } else { identity2() })
            .collect();
        out += kron_sites(&ops);
    }
    out
}

/// `Σ_j σ^axis_j`.
pub fn magnetization(n_sites: usize, axis: Axis) -> DenseMatrix {
    let dim = 1 << n_sites;
    let mut out = DenseMatrix::zeros(dim, dim);
    let p = pauli(axis);
    for j in 0..n_sites {
        out += site_operator(n_sites, j, &p);
    }
    out
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(m: &DenseMatrix) -> DenseMatrix {
    let n = m.nrows();
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * c(scale, 0.0);
    let mut term = DenseMatrix::identity(n, n);
    let mut sum = DenseMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &a * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i θ H)`.
pub fn unitary_from_generator(h: &DenseMatrix, theta: f64) -> DenseMatrix {
    expm(&(h * c(0.0, -theta)))
}

fn check_dense(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::ChainTooShort(n_sites));
    }
    if n_sites > MAX_DENSE_SITES {
        return Err(Error::InvalidArgument(format!(
            "dense oracle supports L <= {MAX_DENSE_SITES}, got {n_sites}"
        )));
    }
    Ok(())
}

/// Ising factor `exp(-i J Σ σ^zσ^z)`.
pub fn zz_layer_matrix(n_sites: usize, j_z: f64) -> Result<DenseMatrix> {
    check_dense(n_sites)?;
    let diag = zz_bond_sum(n_sites).diagonal().map(|d| (c(0.0, -j_z) * d).exp());
    Ok(DenseMatrix::from_diagonal(&diag))
}

/// Kick factor `exp(-i Σ (h_x σ^x + h_z σ^z))`.
pub fn kick_layer_matrix(n_sites: usize, h_x: f64, h_z: f64) -> Result<DenseMatrix> {
    check_dense(n_sites)?;
    let gen = pauli(Axis::X) * c(h_x, 0.0) + pauli(Axis::Z) * c(h_z, 0.0);
    let site = unitary_from_generator(&gen, 1.0);
    Ok(kron_sites(&vec![site; n_sites]))
}

/// `U = exp(-i J Σ σ^zσ^z) · exp(-i Σ (h_x σ^x + h_z σ^z))`.
pub fn floquet_matrix(n_sites: usize, params: &KickedIsingParams) -> Result<DenseMatrix> {
    Ok(zz_layer_matrix(n_sites, params.j_z)? * kick_layer_matrix(n_sites, params.h_x, params.h_z)?)
}

/// The same factors multiplied in the opposite order; used to show the
/// oracle comparison is sensitive to the convention.
pub fn floquet_matrix_swapped(n_sites: usize, params: &KickedIsingParams) -> Result<DenseMatrix> {
    Ok(kick_layer_matrix(n_sites, params.h_x, params.h_z)? * zz_layer_matrix(n_sites, params.j_z)?)
}

/// `U_δ = U · exp(-i δ M)`.
pub fn perturbed_floquet_matrix(
    n_sites: usize,
    params: &KickedIsingParams,
    delta: f64,
) -> Result<DenseMatrix> {
    let site = unitary_from_generator(&pauli(Axis::X), delta);
    Ok(floquet_matrix(n_sites, params)? * kron_sites(&vec![site; n_sites]))
}

pub fn to_column(state: &StateVector) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(state.dim(), 1, state.amplitudes())
}

pub fn apply(matrix: &DenseMatrix, state: &StateVector) -> Result<StateVector> {
    if matrix.ncols() != state.dim() {
        return Err(Error::InvalidArgument(format!(
            "matrix of size {} applied to state of dimension {}",
            matrix.ncols(),
            state.dim()
        )));
    }
    let out = matrix * to_column(state);
    StateVector::from_amplitudes(state.n_sites(), out.as_slice().to_vec())
}

/// `(1/N) tr(m)`.
pub fn normalized_trace(m: &DenseMatrix) -> Complex64 {
    m.trace() / c(m.nrows() as f64, 0.0)
}

pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm, via the largest singular value.
pub fn operator_norm(m: &DenseMatrix) -> f64 {
    m.clone().singular_values().max()
}

/// `C_A(t) = (1/N) tr(U^{-t} A U^t A)` for `t = 0..=t_max`.
pub fn correlation_series(
    u: &DenseMatrix,
    a: &DenseMatrix,
    t_max: usize,
) -> Vec<Complex64> {
    let u_dag = u.adjoint();
    let mut a_t = a.clone();
    let mut out = Vec::with_capacity(t_max + 1);
    for _ in 0..=t_max {
        out.push(normalized_trace(&(&a_t * a)));
        a_t = &u_dag * &a_t * u;
    }
    out
}

/// `F(t) = (1/N) tr(U_δ^{-t} U^t)` for `t = 0..=t_max`.
pub fn fidelity_series(u: &DenseMatrix, u_delta: &DenseMatrix, t_max: usize) -> Vec<Complex64> {
    let n = u.nrows();
    let ud_dag = u_delta.adjoint();
    let mut u_t = DenseMatrix::identity(n, n);
    let mut ud_inv_t = DenseMatrix::identity(n, n);
    let mut out = Vec::with_capacity(t_max + 1);
    for _ in 0..=t_max {
        out.push(normalized_trace(&(&ud_inv_t * &u_t)));
        u_t = u * u_t;
        ud_inv_t *= &ud_dag;
    }
    out
}

/// `⟨ψ|U_δ^{-t} U^t|ψ⟩` for `t = 0..=t_max`.
pub fn pure_state_fidelity(
    u: &DenseMatrix,
    u_delta: &DenseMatrix,
    psi: &StateVector,
    t_max: usize,
) -> Vec<Complex64> {
    let mut a = to_column(psi);
    let mut b = a.clone();
    let mut out = Vec::with_capacity(t_max + 1);
    for _ in 0..=t_max {
        out.push(b.dotc(&a));
        a = u * a;
        b = u_delta * b;
    }
    out
}
