//! State vectors over the σ^z basis of a periodic spin-1/2 chain and the
//! bitwise gate kernels that realize one period of the kicked Ising map.
//!
//! Basis index bit `j` holds the σ^z eigenvalue of site `j`: bit value 0 is
//! spin up (+1), bit value 1 is spin down (-1).
//!
//! One Floquet period is `U = exp(-i J Σ σ^z_j σ^z_{j+1}) · exp(-i Σ (h_x σ^x_j + h_z σ^z_j))`
//! with the rightmost factor acting first, so [`floquet_step`] applies the
//! kick layer and then the Ising layer.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain length a [`StateVector`] may hold (2^30 amplitudes, 16 GiB).
pub const MAX_SITES: usize = 30;

/// Arrays at least this long are processed by the rayon pool.
const PAR_THRESHOLD: usize = 1 << 14;

/// Fixed reduction chunk; makes `inner_product` independent of thread count.
const REDUCE_CHUNK: usize = 1 << 12;

/// Tag recorded in run manifests for the factor order used by [`floquet_step`].
pub const FACTOR_ORDER: &str = "kick-then-zz";

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        check_sites(n_sites)?;
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_sites, amplitudes })
    }

    /// All spins up, `|0…0⟩`.
    pub fn all_up(n_sites: usize) -> Result<Self> {
        Self::basis(n_sites, 0)
    }

    pub fn zeros(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(Self {
            n_sites,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1usize << n_sites],
        })
    }

    pub fn from_amplitudes(n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_sites(n_sites)?;
        let expected = 1usize << n_sites;
        if amplitudes.len() != expected {
            return Err(Error::AmplitudeLength {
                n_sites,
                expected,
                got: amplitudes.len(),
            });
        }
        Ok(Self { n_sites, amplitudes })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert space dimension `2^L`.
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        chunked_sum(&self.amplitudes, |chunk| {
            chunk.iter().map(|a| a.norm_sqr()).sum::<f64>()
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amplitudes {
                *a *= inv;
            }
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &StateVector) -> Result<()> {
        check_same(self, other)?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Cyclic lattice translation `j -> j+1`, as a permutation of basis
    /// indices (bit `j` of the source index moves to bit `j+1 mod L`).
    pub fn translated(&self) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            out[rotate_left(idx, 1, self.n_sites)] = *a;
        }
        StateVector {
            n_sites: self.n_sites,
            amplitudes: out,
        }
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        check_same(self, other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::ChainTooShort(n_sites));
    }
    if n_sites > MAX_SITES {
        return Err(Error::ChainTooLong(n_sites));
    }
    Ok(())
}

fn check_same(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.n_sites != b.n_sites {
        return Err(Error::DimensionMismatch {
            left: a.n_sites,
            right: b.n_sites,
        });
    }
    Ok(())
}

/// Rotate the low `n_bits` bits of `idx` left by `by`.
#[inline]
pub fn rotate_left(idx: usize, by: usize, n_bits: usize) -> usize {
    let mask = (1usize << n_bits) - 1;
    let by = by % n_bits;
    ((idx << by) | (idx >> (n_bits - by))) & mask
}

/// Kicked Ising parameters in units where the period and ħ are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedIsingParams {
    pub j_z: f64,
    pub h_x: f64,
    pub h_z: f64,
}

impl KickedIsingParams {
    pub fn new(j_z: f64, h_x: f64, h_z: f64) -> Result<Self> {
        let p = Self { j_z, h_x, h_z };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j_z.is_finite() && self.h_x.is_finite() && self.h_z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kicked Ising parameters must be finite, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Kick field magnitude `h = sqrt(h_x² + h_z²)`.
    pub fn field(&self) -> f64 {
        self.h_x.hypot(self.h_z)
    }
}

/// Seed for the random-state ensemble. Sample `i` draws from its own ChaCha
/// stream, so results do not depend on the order samples are evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

/// 2×2 unitary in the site basis, `[[⟨↑|G|↑⟩, ⟨↑|G|↓⟩], [⟨↓|G|↑⟩, ⟨↓|G|↓⟩]]`.
pub type SiteGate = [[Complex64; 2]; 2];

/// `exp(-i (h_x σ^x + h_z σ^z)) = cos h − i sin h (h_x σ^x + h_z σ^z)/h`.
pub fn kick_gate(h_x: f64, h_z: f64) -> SiteGate {
    let h = h_x.hypot(h_z);
    if h == 0.0 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        return [[one, zero], [zero, one]];
    }
    let (s, c) = h.sin_cos();
    let nx = h_x / h;
    let nz = h_z / h;
    [
        [Complex64::new(c, -s * nz), Complex64::new(0.0, -s * nx)],
        [Complex64::new(0.0, -s * nx), Complex64::new(c, s * nz)],
    ]
}

/// Apply a 2×2 gate to one site.
pub fn apply_site_gate(state: &mut StateVector, site: usize, gate: &SiteGate) -> Result<()> {
    if site >= state.n_sites {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: state.n_sites,
        });
    }
    let stride = 1usize << site;
    let block = stride << 1;
    let amps = &mut state.amplitudes;
    let kernel = |chunk: &mut [Complex64]| {
        for pair in chunk.chunks_exact_mut(block) {
            let (up, down) = pair.split_at_mut(stride);
            for (a, b) in up.iter_mut().zip(down.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = gate[0][0] * x + gate[0][1] * y;
                *b = gate[1][0] * x + gate[1][1] * y;
            }
        }
    };
    if amps.len() >= PAR_THRESHOLD {
        let chunk = block.max(REDUCE_CHUNK);
        amps.par_chunks_mut(chunk).for_each(kernel);
    } else {
        kernel(amps);
    }
    Ok(())
}

/// Ising layer `exp(-i j_z Σ_j s_j s_{j+1})` on the periodic ring.
///
/// For basis index `idx` the number of anti-aligned bonds is
/// `popcount(idx ^ rot(idx, 1))`, so `Σ s_j s_{j+1} = L − 2·popcount`.
pub fn apply_zz_layer(state: &mut StateVector, j_z: f64) {
    if j_z == 0.0 {
        return;
    }
    let l = state.n_sites;
    let phases: Vec<Complex64> = (0..=l)
        .map(|broken| {
            let bond_sum = l as f64 - 2.0 * broken as f64;
            Complex64::from_polar(1.0, -j_z * bond_sum)
        })
        .collect();
    let kernel = |offset: usize, chunk: &mut [Complex64]| {
        for (k, a) in chunk.iter_mut().enumerate() {
            let idx = offset + k;
            let broken = (idx ^ rotate_left(idx, 1, l)).count_ones() as usize;
            *a *= phases[broken];
        }
    };
    let amps = &mut state.amplitudes;
    if amps.len() >= PAR_THRESHOLD {
        amps.par_chunks_mut(REDUCE_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| kernel(c * REDUCE_CHUNK, chunk));
    } else {
        kernel(0, amps);
    }
}

/// Kick layer: the single-site gate [`kick_gate`] on every site.
pub fn apply_kick_layer(state: &mut StateVector, h_x: f64, h_z: f64) {
    if h_x == 0.0 && h_z == 0.0 {
        return;
    }
    let gate = kick_gate(h_x, h_z);
    for site in 0..state.n_sites {
        apply_site_gate(state, site, &gate).expect("site in range");
    }
}

/// One unperturbed period: kick layer, then Ising layer.
pub fn floquet_step(state: &mut StateVector, params: &KickedIsingParams) {
    apply_kick_layer(state, params.h_x, params.h_z);
    apply_zz_layer(state, params.j_z);
}

/// `exp(-i delta M)` with `M = Σ_j σ^x_j`.
pub fn apply_perturbation_kick(state: &mut StateVector, delta: f64) {
    apply_kick_layer(state, delta, 0.0);
}

/// One perturbed period `U_δ = U · exp(-i δ M)`.
///
/// The symmetrized fidelity pairs this step at `+δ/2` on one branch with
/// `-δ/2` on the other; see [`crate::dynamics::fidelity_series`].
pub fn perturbed_floquet_step(state: &mut StateVector, params: &KickedIsingParams, delta: f64) {
    apply_perturbation_kick(state, delta);
    floquet_step(state, params);
}

/// One inverse period `U^{-1}`: inverse Ising layer, then inverse kick.
pub fn inverse_floquet_step(state: &mut StateVector, params: &KickedIsingParams) {
    apply_zz_layer(state, -params.j_z);
    apply_kick_layer(state, -params.h_x, -params.h_z);
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    check_same(a, b)?;
    Ok(inner_product_slices(&a.amplitudes, &b.amplitudes))
}

/// Reduction over fixed-size chunks, summed in chunk order. The result is
/// identical for any worker count.
pub(crate) fn inner_product_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let dot = |(x, y): (&[Complex64], &[Complex64])| {
        x.iter()
            .zip(y)
            .fold(Complex64::new(0.0, 0.0), |acc, (p, q)| acc + p.conj() * q)
    };
    if a.len() >= PAR_THRESHOLD {
        let partials: Vec<Complex64> = a
            .par_chunks(REDUCE_CHUNK)
            .zip(b.par_chunks(REDUCE_CHUNK))
            .map(dot)
            .collect();
        partials.into_iter().sum()
    } else {
        a.chunks(REDUCE_CHUNK).zip(b.chunks(REDUCE_CHUNK)).map(dot).sum()
    }
}

fn chunked_sum(amps: &[Complex64], f: impl Fn(&[Complex64]) -> f64 + Sync) -> f64 {
    if amps.len() >= PAR_THRESHOLD {
        let partials: Vec<f64> = amps.par_chunks(REDUCE_CHUNK).map(&f).collect();
        partials.into_iter().sum()
    } else {
        amps.chunks(REDUCE_CHUNK).map(f).sum()
    }
}

/// Normalized state with i.i.d. complex gaussian amplitudes (a Haar-random
/// state), drawn from stream 0 of `seed`.
pub fn random_state(n_sites: usize, seed: RngSeed) -> Result<StateVector> {
    random_state_stream(n_sites, seed, 0)
}

/// As [`random_state`], drawing from stream `stream` of `seed`.
pub fn random_state_stream(n_sites: usize, seed: RngSeed, stream: u64) -> Result<StateVector> {
    check_sites(n_sites)?;
    let mut rng = seed.stream(stream);
    let amplitudes: Vec<Complex64> = (0..1usize << n_sites)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut state = StateVector { n_sites, amplitudes };
    state.normalize();
    Ok(state)
}

/// Environment variable holding the worker-thread count (0 or unset = auto).
pub const THREADS_ENV: &str = "KIFID_THREADS";

/// Configure the global rayon pool. `None` consults [`THREADS_ENV`]; 0 lets
/// rayon choose. Returns the effective thread count. Later calls after the
/// pool is built have no effect.
pub fn init_thread_pool(threads: Option<usize>) -> usize {
    let requested = threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = requested.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    let _ = builder.build_global();
    rayon::current_num_threads()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zz_layer_two_site_ring() {
        let mut s = StateVector::all_up(2).unwrap();
        apply_zz_layer(&mut s, FRAC_PI_4);
        let expected = Complex64::from_polar(1.0, -FRAC_PI_2);
        assert_abs_diff_eq!((s.amplitudes()[0] - expected).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(s.amplitudes()[1], c(0.0, 0.0));
    }

    #[test]
    fn zz_layer_zero_coupling_is_identity() {
        let s0 = random_state(5, RngSeed(3)).unwrap();
        let mut s = s0.clone();
        apply_zz_layer(&mut s, 0.0);
        assert_eq!(s, s0);
    }

    #[test]
    fn kick_layer_pi_over_two_flips_all() {
        for l in 2..7 {
            let mut s = StateVector::all_up(l).unwrap();
            apply_kick_layer(&mut s, FRAC_PI_2, 0.0);
            let expected = c(0.0, -1.0).powu(l as u32);
            let last = s.dim() - 1;
            assert_abs_diff_eq!((s.amplitudes()[last] - expected).norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn longitudinal_kick_is_diagonal() {
        let alpha = 0.37;
        let mut s = StateVector::basis(3, 0b010).unwrap();
        apply_kick_layer(&mut s, 0.0, alpha);
        // two sites up (phase e^{-iα}), one down (phase e^{+iα})
        let expected = Complex64::from_polar(1.0, -alpha);
        assert_abs_diff_eq!((s.amplitudes()[0b010] - expected).norm(), 0.0, epsilon = 1e-15);

        let mut up = StateVector::all_up(2).unwrap();
        apply_site_gate(&mut up, 0, &kick_gate(0.0, alpha)).unwrap();
        assert_abs_diff_eq!(
            (up.amplitudes()[0] - Complex64::from_polar(1.0, -alpha)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn perturbation_kick_pi_over_two() {
        let mut s = StateVector::all_up(4).unwrap();
        apply_perturbation_kick(&mut s, FRAC_PI_2);
        assert_abs_diff_eq!((s.amplitudes()[15] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_params_are_identity() {
        let s0 = random_state(6, RngSeed(11)).unwrap();
        let mut s = s0.clone();
        floquet_step(&mut s, &KickedIsingParams::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(s, s0);
        apply_perturbation_kick(&mut s, 0.0);
        assert_eq!(s, s0);
    }

    #[test]
    fn perturbed_step_is_composition() {
        let p = KickedIsingParams::new(1.0, 1.4, 0.4).unwrap();
        let s0 = random_state(7, RngSeed(5)).unwrap();
        let mut a = s0.clone();
        perturbed_floquet_step(&mut a, &p, 0.1);
        let mut b = s0.clone();
        apply_perturbation_kick(&mut b, 0.1);
        floquet_step(&mut b, &p);
        assert_eq!(a, b);

        let mut z = s0.clone();
        perturbed_floquet_step(&mut z, &p, 0.0);
        let mut f = s0;
        floquet_step(&mut f, &p);
        assert_eq!(z, f);
    }

    #[test]
    fn inverse_step_undoes_step() {
        let p = KickedIsingParams::new(1.0, 1.4, 1.4).unwrap();
        let s0 = random_state(8, RngSeed(9)).unwrap();
        let mut s = s0.clone();
        for _ in 0..10 {
            floquet_step(&mut s, &p);
        }
        for _ in 0..10 {
            inverse_floquet_step(&mut s, &p);
        }
        assert!(s.max_abs_diff(&s0).unwrap() < 1e-12);
    }

    #[test]
    fn norm_preserved_over_many_steps() {
        let p = KickedIsingParams::new(1.0, 1.4, 1.4).unwrap();
        let mut s = random_state(16, RngSeed(1)).unwrap();
        for _ in 0..1000 {
            floquet_step(&mut s, &p);
        }
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn inner_product_basics() {
        let a = StateVector::basis(2, 0b00).unwrap();
        let b = StateVector::basis(2, 0b11).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), c(0.0, 0.0));
        let r = random_state(10, RngSeed(2)).unwrap();
        assert_abs_diff_eq!(inner_product(&r, &r).unwrap().re, 1.0, epsilon = 1e-12);
        let short = StateVector::all_up(3).unwrap();
        assert!(matches!(
            inner_product(&r, &short),
            Err(Error::DimensionMismatch { left: 10, right: 3 })
        ));
    }

    #[test]
    fn inner_product_matches_direct_sum_and_cauchy_schwarz() {
        for seed in 0..20 {
            let a = random_state_stream(10, RngSeed(seed), 0).unwrap();
            let b = random_state_stream(10, RngSeed(seed), 1).unwrap();
            let got = inner_product(&a, &b).unwrap();
            let mut direct = c(0.0, 0.0);
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                direct += x.conj() * y;
            }
            assert!((got - direct).norm() < 1e-12);
            assert!(got.norm() <= a.norm() * b.norm() + 1e-12);
            // typical overlap of independent random states is ~ 2^{-L/2}
            assert!(got.norm() < 0.2);
        }
    }

    #[test]
    fn inner_product_large_matches_sequential_fold() {
        let a = random_state_stream(16, RngSeed(4), 0).unwrap();
        let b = random_state_stream(16, RngSeed(4), 1).unwrap();
        let got = inner_product(&a, &b).unwrap();
        let seq: Complex64 = a
            .amplitudes()
            .chunks(REDUCE_CHUNK)
            .zip(b.amplitudes().chunks(REDUCE_CHUNK))
            .map(|(x, y)| x.iter().zip(y).fold(c(0.0, 0.0), |acc, (p, q)| acc + p.conj() * q))
            .sum();
        assert_eq!(got, seq);
    }

    #[test]
    fn random_state_is_normalized_and_deterministic() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let a = random_state(12, RngSeed(seed)).unwrap();
            assert_abs_diff_eq!(a.norm(), 1.0, epsilon = 1e-12);
            assert_eq!(a, random_state(12, RngSeed(seed)).unwrap());
        }
        assert_ne!(
            random_state_stream(4, RngSeed(1), 0).unwrap(),
            random_state_stream(4, RngSeed(1), 1).unwrap()
        );
    }

    #[test]
    fn size_errors() {
        assert!(matches!(StateVector::all_up(1), Err(Error::ChainTooShort(1))));
        assert!(matches!(random_state(1, RngSeed(0)), Err(Error::ChainTooShort(1))));
        assert!(matches!(
            StateVector::from_amplitudes(3, vec![c(1.0, 0.0); 4]),
            Err(Error::AmplitudeLength { expected: 8, got: 4, .. })
        ));
        let mut s = StateVector::all_up(3).unwrap();
        assert!(matches!(
            apply_site_gate(&mut s, 3, &kick_gate(1.0, 0.0)),
            Err(Error::SiteOutOfRange { site: 3, n_sites: 3 })
        ));
        assert!(KickedIsingParams::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn rotate_left_wraps() {
        assert_eq!(rotate_left(0b100, 1, 3), 0b001);
        assert_eq!(rotate_left(0b011, 1, 3), 0b110);
        assert_eq!(rotate_left(0b1, 3, 3), 0b1);
    }
}
