//! Closed-form decay laws, time scales and fits.
//!
//! Mixing dynamics (finite integrated correlation `S_A`) gives
//! `|F| = exp(−t/τ_e)` with `τ_e = 1/(S_A δ²)`; a non-vanishing correlation
//! plateau `D_A` gives `|F| = exp(−(t/τ_ne)²/2)` with `τ_ne = 1/(√D_A δ)`.
//! For a finite Hilbert space of dimension `N = 2^L` the decay stops at the
//! fluctuation level `N^{-1/2}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

use serde::{Deserialize, Serialize};

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};

/// Reference chain length for the size-scaled perturbation `δ' = δ√(L/L₀)`.
pub const REFERENCE_SITES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayRegime {
    Ergodic,
    NonErgodic,
}

/// Plateau of the `σ^x` autocorrelation in the transverse kicked Ising
/// chain (`h_z = 0`). The magnetization plateau is `D_M = L · D_{σx}`.
pub fn d_sigma_x(j_z: f64, h_x: f64) -> Result<f64> {
    let s = (2.0 * h_x).sin();
    if s.abs() < 1e-12 {
        return Err(Error::SingularInput(format!("sin(2 h_x) vanishes at h_x = {h_x}")));
    }
    let cj = (2.0 * j_z).cos().abs();
    let ch = (2.0 * h_x).cos();
    Ok((cj.max(ch.abs()) - ch * ch) / (s * s))
}

/// `τ_e = 1/(S_A δ²)`.
pub fn tau_ergodic(s_a: f64, delta: f64) -> Result<f64> {
    if !(s_a > 0.0) {
        return Err(Error::InvalidArgument(format!("S_A must be positive, got {s_a}")));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be finite and nonzero, got {delta}")));
    }
    Ok(1.0 / (s_a * delta * delta))
}

/// `τ_ne = 1/(√D_A |δ|)`.
pub fn tau_nonergodic(d_a: f64, delta: f64) -> Result<f64> {
    if !(d_a > 0.0) {
        return Err(Error::InvalidArgument(format!("D_A must be positive, got {d_a}")));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be finite and nonzero, got {delta}")));
    }
    Ok(1.0 / (d_a.sqrt() * delta.abs()))
}

/// Unscaled perturbation `δ = δ' √(L₀/L)`.
pub fn unscaled_delta(delta_prime: f64, n_sites: usize) -> f64 {
    delta_prime * (REFERENCE_SITES as f64 / n_sites as f64).sqrt()
}

pub fn decay_curve(regime: DecayRegime, tau: f64, t: f64) -> f64 {
    match regime {
        DecayRegime::Ergodic => (-t / tau).exp(),
        DecayRegime::NonErgodic => (-(t * t) / (2.0 * tau * tau)).exp(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub t_star: f64,
    pub plateau: f64,
}

/// Time at which the decay law reaches the fluctuation level `2^{-L/2}`.
pub fn saturation(regime: DecayRegime, tau: f64, n_sites: usize) -> Saturation {
    let ln_n = n_sites as f64 * std::f64::consts::LN_2;
    let t_star = match regime {
        DecayRegime::NonErgodic => tau * ln_n.sqrt(),
        DecayRegime::Ergodic => 0.5 * tau * ln_n,
    };
    Saturation { t_star, plateau: plateau(n_sites) }
}

/// Fluctuation level `N^{-1/2} = 2^{-L/2}`.
pub fn plateau(n_sites: usize) -> f64 {
    (-(n_sites as f64) / 2.0).exp2()
}

/// `δ_p = √c_A / (S_A √N)`: below this strength the finite-size
/// correlation plateau dominates and decay is gaussian in any regime.
pub fn perturbative_threshold(s_a: f64, c_a: f64, n_sites: usize) -> Result<f64> {
    if !(s_a > 0.0 && c_a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "S_A and c_A must be positive, got S_A = {s_a}, c_A = {c_a}"
        )));
    }
    Ok(c_a.sqrt() / (s_a * plateau(n_sites).recip()))
}

/// Least-squares estimate of `c` in `D(L) = c / 2^L` from measured
/// `(L, D)` pairs.
pub fn fit_plateau_constant(points: &[(usize, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(l, v)| {
        let x = (-(l as f64)).exp2();
        (n + v * x, d + x * x)
    });
    Ok(num / den)
}

/// Second-order fidelity
/// `1 − (δ²/2) Σ_{t'=−t}^{t} (t − |t'|) C(t')` with `C(−t') = conj C(t')`.
pub fn fidelity_quadratic(corr: &TimeSeries, delta: f64, t: usize) -> Result<f64> {
    if t > corr.t_max() || t >= corr.len() {
        return Err(Error::TimeOutOfRange { t, t_max: corr.t_max() });
    }
    let tf = t as f64;
    let sum = tf * corr.raw(0).re
        + (1..=t).map(|s| 2.0 * (tf - s as f64) * corr.raw(s).re).sum::<f64>();
    Ok(1.0 - 0.5 * delta * delta * sum)
}

/// First-order fields of the kicked Ising map absorbing `exp(−iδM)`:
/// `h_x' = h_x + (h_x² + h_z² h cot h) δ/h²`,
/// `h_z' = h_z + h_x h_z (1 − h cot h) δ/h²`.
///
/// The exact first-order product also carries a `σ^y` field of order
/// `h_z δ`; it is removed by a global rotation about `z` (which commutes
/// with the Ising layer) at the cost of `O(δ²)` changes to the fields above.
pub fn perturbed_field_map(h_x: f64, h_z: f64, delta: f64) -> Result<(f64, f64)> {
    let h = h_x.hypot(h_z);
    if h == 0.0 {
        return Err(Error::SingularInput("field map needs h = sqrt(h_x² + h_z²) > 0".into()));
    }
    let h_cot = h / h.tan();
    let h2 = h * h;
    Ok((
        h_x + (h_x * h_x + h_z * h_z * h_cot) * delta / h2,
        h_z + h_x * h_z * (1.0 - h_cot) * delta / h2,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPrediction {
    pub regime: DecayRegime,
    pub tau: f64,
    pub t_star: f64,
    pub plateau: f64,
}

impl DecayPrediction {
    pub fn new(regime: DecayRegime, tau: f64, n_sites: usize) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        let sat = saturation(regime, tau, n_sites);
        Ok(Self { regime, tau, t_star: sat.t_star, plateau: sat.plateau })
    }

    /// Predicted `|F(t)|`.
    pub fn model(&self, t: f64) -> f64 {
        decay_curve(self.regime, self.tau, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub regime: DecayRegime,
    pub tau: f64,
    pub rmse: f64,
    pub tau_exponential: f64,
    pub rmse_exponential: f64,
    pub tau_gaussian: f64,
    pub rmse_gaussian: f64,
    /// First and last time included in the fit.
    pub window: (usize, usize),
    pub n_points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Fit `ln|F|` against `−t/τ` and `−t²/(2τ²)` over the contiguous window
/// where `3·2^{-L/2} < |F| < 0.95`; the model with the smaller RMSE (in
/// log space) wins.
pub fn fit_decay(series: &TimeSeries, n_sites: usize) -> Result<DecayFit> {
    let abs = series.abs();
    let lower = 3.0 * plateau(n_sites);
    let start = abs.iter().position(|&f| f < 0.95);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut window = (0, 0);
    if let Some(start) = start {
        window = (start, start);
        for (t, &f) in abs.iter().enumerate().skip(start) {
            if f <= lower || f >= 0.95 {
                break;
            }
            pts.push((series.times[t] as f64, -f.ln()));
            window.1 = t;
        }
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { needed: MIN_FIT_POINTS, got: pts.len() });
    }
    window = (series.times[window.0], series.times[window.1]);
    let n = pts.len() as f64;
    let rate_exp = pts.iter().map(|(t, y)| t * y).sum::<f64>() / pts.iter().map(|(t, _)| t * t).sum::<f64>();
    let rate_gauss = pts.iter().map(|(t, y)| t * t * y).sum::<f64>() / pts.iter().map(|(t, _)| t.powi(4)).sum::<f64>();
    let rmse = |f: &dyn Fn(f64) -> f64| (pts.iter().map(|&(t, y)| (y - f(t)).powi(2)).sum::<f64>() / n).sqrt();
    let rmse_exponential = rmse(&|t| rate_exp * t);
    let rmse_gaussian = rmse(&|t| rate_gauss * t * t);
    let tau_exponential = 1.0 / rate_exp;
    let tau_gaussian = 1.0 / (2.0 * rate_gauss).sqrt();
    let (regime, tau, best) = if rmse_gaussian < rmse_exponential {
        (DecayRegime::NonErgodic, tau_gaussian, rmse_gaussian)
    } else {
        (DecayRegime::Ergodic, tau_exponential, rmse_exponential)
    };
    Ok(DecayFit {
        regime,
        tau,
        rmse: best,
        tau_exponential,
        rmse_exponential,
        tau_gaussian,
        rmse_gaussian,
        window,
        n_points: pts.len(),
    })
}
