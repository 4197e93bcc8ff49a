//! Pauli-string observables and infinite-temperature averaging.
//!
//! The trace average `⟨X⟩ = tr(X)/N` is realized either exactly, as a sum
//! over all `N = 2^L` computational basis states, or stochastically, as a
//! mean over normalized complex-gaussian states with a sample standard
//! error.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{inner_product_slices, random_state_stream, RngSeed, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn from_char(c: char) -> Option<Axis> {
        match c {
            'x' | 'X' => Some(Axis::X),
            'y' | 'Y' => Some(Axis::Y),
            'z' | 'Z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// Product of Pauli operators on distinct sites times a coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    ops: Vec<(usize, Axis)>,
    coefficient: Complex64,
    flip_mask: usize,
    sign_mask: usize,
    n_y: u32,
}

impl PauliString {
    pub fn new(ops: Vec<(usize, Axis)>, coefficient: Complex64) -> Result<Self> {
        let mut flip_mask = 0usize;
        let mut sign_mask = 0usize;
        let mut n_y = 0;
        let mut seen = 0usize;
        for &(site, axis) in &ops {
            if site >= usize::BITS as usize {
                return Err(Error::SiteOutOfRange { site, n_sites: usize::BITS as usize });
            }
            let bit = 1usize << site;
            if seen & bit != 0 {
                return Err(Error::DuplicateSite(site));
            }
            seen |= bit;
            match axis {
                Axis::X => flip_mask |= bit,
                Axis::Z => sign_mask |= bit,
                Axis::Y => {
                    flip_mask |= bit;
                    sign_mask |= bit;
                    n_y += 1;
                }
            }
        }
        Ok(Self { ops, coefficient, flip_mask, sign_mask, n_y })
    }

    pub fn ops(&self) -> &[(usize, Axis)] {
        &self.ops
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn max_site(&self) -> Option<usize> {
        self.ops.iter().map(|&(s, _)| s).max()
    }

    /// `out += factor · P |in⟩`, with `σ^y = i σ^x σ^z`.
    fn accumulate(&self, factor: Complex64, input: &[Complex64], out: &mut [Complex64]) {
        let phase = Complex64::i().powu(self.n_y) * self.coefficient * factor;
        for (idx, amp) in input.iter().enumerate() {
            let sign = if (idx & self.sign_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            out[idx ^ self.flip_mask] += phase * sign * amp;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    PerSqrtL,
    PerL,
}

impl Normalization {
    pub fn factor(self, n_sites: usize) -> f64 {
        match self {
            Normalization::None => 1.0,
            Normalization::PerSqrtL => 1.0 / (n_sites as f64).sqrt(),
            Normalization::PerL => 1.0 / n_sites as f64,
        }
    }
}

/// Sum of Pauli strings bound to a chain of `n_sites` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    name: String,
    n_sites: usize,
    terms: Vec<PauliString>,
    normalization: Normalization,
}

impl ObservableSpec {
    pub fn new(
        name: impl Into<String>,
        n_sites: usize,
        terms: Vec<PauliString>,
        normalization: Normalization,
    ) -> Result<Self> {
        for t in &terms {
            if let Some(site) = t.max_site().filter(|&s| s >= n_sites) {
                return Err(Error::SiteOutOfRange { site, n_sites });
            }
        }
        Ok(Self { name: name.into(), n_sites, terms, normalization })
    }

    /// Total magnetization `Σ_j σ^axis_j`.
    pub fn magnetization(n_sites: usize, axis: Axis) -> Self {
        let terms = (0..n_sites)
            .map(|j| PauliString::new(vec![(j, axis)], Complex64::new(1.0, 0.0)).expect("single site"))
            .collect();
        Self {
            name: format!("M_{}", axis.as_char()),
            n_sites,
            terms,
            normalization: Normalization::None,
        }
    }

    /// Translation-invariant local observable
    /// `Z_s = L^{-1/2} Σ_j σ^{s_0}_j σ^{s_1}_{j+1} … σ^{s_n}_{j+n}`,
    /// with `pattern` the letters `s_0 … s_n` (`0` = identity on interior
    /// sites).
    pub fn translation_invariant(pattern: &str, n_sites: usize) -> Result<Self> {
        let letters: Vec<Option<Axis>> = pattern
            .chars()
            .map(|ch| match ch {
                '0' => Ok(None),
                _ => Axis::from_char(ch).map(Some).ok_or_else(|| Error::ObservableParse(format!("Z:{pattern}"))),
            })
            .collect::<Result<_>>()?;
        let (first, last) = match (letters.first(), letters.last()) {
            (Some(Some(_)), Some(Some(_))) => (0, letters.len() - 1),
            _ => return Err(Error::ObservableParse(format!("Z:{pattern}"))),
        };
        let order = last - first;
        if order >= n_sites {
            return Err(Error::InvalidArgument(format!(
                "observable Z:{pattern} of order {order} needs more than {n_sites} sites"
            )));
        }
        let terms = (0..n_sites)
            .map(|j| {
                let ops = letters
                    .iter()
                    .enumerate()
                    .filter_map(|(k, a)| a.map(|axis| ((j + k) % n_sites, axis)))
                    .collect();
                PauliString::new(ops, Complex64::new(1.0, 0.0))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            name: format!("Z:{pattern}"),
            n_sites,
            terms,
            normalization: Normalization::PerSqrtL,
        })
    }

    /// Build from a config token: `M_x`, `M_y`, `M_z` or `Z:<pattern>`.
    pub fn from_token(token: &str, n_sites: usize) -> Result<Self> {
        let kind: ObservableKind = token.parse()?;
        kind.bind(n_sites)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Closed under conjugation: coefficients summed per distinct Pauli
    /// product are real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let mut sums: BTreeMap<Vec<(usize, Axis)>, Complex64> = BTreeMap::new();
        for t in &self.terms {
            let mut key = t.ops.clone();
            key.sort();
            *sums.entry(key).or_default() += t.coefficient;
        }
        sums.values().all(|z| z.im.abs() <= tol)
    }

    /// `A|ψ⟩`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch { left: self.n_sites, right: state.n_sites() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        let factor = Complex64::new(self.normalization.factor(self.n_sites), 0.0);
        for t in &self.terms {
            t.accumulate(factor, state.amplitudes(), &mut out);
        }
        StateVector::from_amplitudes(self.n_sites, out)
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        let a_psi = self.apply(state)?;
        Ok(inner_product_slices(state.amplitudes(), a_psi.amplitudes()))
    }
}

/// Unbound observable name as written in configuration files.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    Magnetization(Axis),
    TranslationInvariant(String),
}

impl ObservableKind {
    pub fn bind(&self, n_sites: usize) -> Result<ObservableSpec> {
        match self {
            ObservableKind::Magnetization(axis) => Ok(ObservableSpec::magnetization(n_sites, *axis)),
            ObservableKind::TranslationInvariant(p) => ObservableSpec::translation_invariant(p, n_sites),
        }
    }

    pub fn is_magnetization(&self) -> bool {
        matches!(self, ObservableKind::Magnetization(_))
    }
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let token = token.trim();
        if let Some(axis) = token.strip_prefix("M_") {
            let mut chars = axis.chars();
            return match (chars.next().and_then(Axis::from_char), chars.next()) {
                (Some(a), None) => Ok(ObservableKind::Magnetization(a)),
                _ => Err(Error::ObservableParse(token.to_string())),
            };
        }
        if let Some(pattern) = token.strip_prefix("Z:") {
            // validate letters eagerly so config errors surface at parse time
            let ok = !pattern.is_empty()
                && pattern.chars().all(|c| c == '0' || Axis::from_char(c).is_some())
                && !pattern.starts_with('0')
                && !pattern.ends_with('0');
            if ok {
                return Ok(ObservableKind::TranslationInvariant(pattern.to_ascii_lowercase()));
            }
        }
        Err(Error::ObservableParse(token.to_string()))
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableKind::Magnetization(a) => write!(f, "M_{}", a.as_char()),
            ObservableKind::TranslationInvariant(p) => write!(f, "Z:{p}"),
        }
    }
}

impl Serialize for ObservableKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObservableKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    #[serde(alias = "exact")]
    ExactBasisSum,
    Stochastic,
}

pub const DEFAULT_EXACT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceAverageSpec {
    pub mode: TraceMode,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: RngSeed,
    #[serde(default = "default_cap")]
    pub exact_cap: usize,
}

fn default_samples() -> usize {
    16
}

fn default_cap() -> usize {
    DEFAULT_EXACT_CAP
}

impl TraceAverageSpec {
    pub fn exact() -> Self {
        Self { mode: TraceMode::ExactBasisSum, n_samples: 1, seed: RngSeed(0), exact_cap: DEFAULT_EXACT_CAP }
    }

    pub fn stochastic(n_samples: usize, seed: u64) -> Self {
        Self { mode: TraceMode::Stochastic, n_samples, seed: RngSeed(seed), exact_cap: DEFAULT_EXACT_CAP }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.exact_cap = cap;
        self
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        match self.mode {
            TraceMode::ExactBasisSum if n_sites > self.exact_cap => {
                Err(Error::ExactTraceCap { n_sites, cap: self.exact_cap })
            }
            TraceMode::Stochastic if self.n_samples == 0 => {
                Err(Error::InvalidArgument("stochastic trace needs at least one sample".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of states averaged over.
    pub fn sample_count(&self, n_sites: usize) -> usize {
        match self.mode {
            TraceMode::ExactBasisSum => 1 << n_sites,
            TraceMode::Stochastic => self.n_samples,
        }
    }

    /// The `index`-th averaging state.
    pub fn sample_state(&self, n_sites: usize, index: usize) -> Result<StateVector> {
        match self.mode {
            TraceMode::ExactBasisSum => StateVector::basis(n_sites, index),
            TraceMode::Stochastic => random_state_stream(n_sites, self.seed, index as u64),
        }
    }
}

/// Averaged vector-valued functional with per-component standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAverage {
    pub mean: Vec<Complex64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

const SAMPLE_BATCH: usize = 64;

/// Trace-average a functional that returns one value per time (or any
/// fixed-length vector). Samples run in parallel; results are folded in
/// sample-index order, so the output is independent of the worker count.
pub fn trace_average_series<F>(n_sites: usize, spec: &TraceAverageSpec, f: F) -> Result<SeriesAverage>
where
    F: Fn(StateVector) -> Result<Vec<Complex64>> + Sync,
{
    spec.validate(n_sites)?;
    let total = spec.sample_count(n_sites);
    let mut mean: Vec<Complex64> = Vec::new();
    let mut m2: Vec<f64> = Vec::new();
    let mut count = 0usize;
    let mut start = 0;
    while start < total {
        let end = (start + SAMPLE_BATCH).min(total);
        let batch: Vec<Vec<Complex64>> = (start..end)
            .into_par_iter()
            .map(|i| f(spec.sample_state(n_sites, i)?))
            .collect::<Result<_>>()?;
        for values in batch {
            if mean.is_empty() {
                mean = vec![Complex64::new(0.0, 0.0); values.len()];
                m2 = vec![0.0; values.len()];
            }
            if values.len() != mean.len() {
                return Err(Error::InvalidArgument("functional returned series of varying length".into()));
            }
            count += 1;
            let n = count as f64;
            for ((mu, s), x) in mean.iter_mut().zip(m2.iter_mut()).zip(&values) {
                let d = x - *mu;
                *mu += d / n;
                *s += d.norm_sqr() * (1.0 - 1.0 / n);
            }
        }
        start = end;
    }
    let stderr = match spec.mode {
        TraceMode::ExactBasisSum => vec![0.0; mean.len()],
        TraceMode::Stochastic if count > 1 => {
            m2.iter().map(|s| (s / (count - 1) as f64 / count as f64).sqrt()).collect()
        }
        TraceMode::Stochastic => vec![f64::NAN; mean.len()],
    };
    Ok(SeriesAverage { mean, stderr, samples: count })
}

/// `(1/N) tr(·)` of a scalar functional, with its standard error (0 in
/// exact mode).
pub fn trace_average<F>(n_sites: usize, spec: &TraceAverageSpec, f: F) -> Result<(Complex64, f64)>
where
    F: Fn(&StateVector) -> Result<Complex64> + Sync,
{
    let avg = trace_average_series(n_sites, spec, |psi| Ok(vec![f(&psi)?]))?;
    Ok((avg.mean[0], avg.stderr[0]))
}

/// `⟨A^order⟩` under the trace average, computed as `⟨A^a ψ|A^b ψ⟩` with
/// `a + b = order`.
pub fn observable_moment(obs: &ObservableSpec, order: usize, spec: &TraceAverageSpec) -> Result<(f64, f64)> {
    let left_pow = order / 2;
    let right_pow = order - left_pow;
    let (v, err) = trace_average(obs.n_sites(), spec, |psi| {
        let mut left = psi.clone();
        for _ in 0..left_pow {
            left = obs.apply(&left)?;
        }
        let mut right = left.clone();
        for _ in left_pow..right_pow {
            right = obs.apply(&right)?;
        }
        Ok(inner_product_slices(left.amplitudes(), right.amplitudes()))
    })?;
    Ok((v.re, err))
}

/// Moments of the local observable `Z:<pattern>`; `order` ≤ 6.
pub fn z_observable_moment(
    pattern: &str,
    n_sites: usize,
    order: usize,
    spec: &TraceAverageSpec,
) -> Result<(f64, f64)> {
    if order > 6 {
        return Err(Error::InvalidArgument(format!("moment order {order} above 6")));
    }
    let obs = ObservableSpec::translation_invariant(pattern, n_sites)?;
    observable_moment(&obs, order, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn magnetization_on_all_up() {
        let psi = StateVector::all_up(4).unwrap();
        let out = ObservableSpec::magnetization(4, Axis::X).apply(&psi).unwrap();
        for (idx, a) in out.amplitudes().iter().enumerate() {
            let expected = if idx.count_ones() == 1 { 1.0 } else { 0.0 };
            assert_eq!(*a, Complex64::new(expected, 0.0));
        }
    }

    #[test]
    fn sigma_z_sign_convention() {
        let psi = StateVector::all_up(3).unwrap();
        let z0 = ObservableSpec::new(
            "z0",
            3,
            vec![PauliString::new(vec![(0, Axis::Z)], Complex64::new(1.0, 0.0)).unwrap()],
            Normalization::None,
        )
        .unwrap();
        assert_eq!(z0.apply(&psi).unwrap(), psi);
        let down = StateVector::basis(3, 1).unwrap();
        assert_eq!(z0.apply(&down).unwrap().amplitudes()[1], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn sigma_y_matches_i_x_z() {
        let y = |idx| {
            let obs = ObservableSpec::new(
                "y",
                2,
                vec![PauliString::new(vec![(0, Axis::Y)], Complex64::new(1.0, 0.0)).unwrap()],
                Normalization::None,
            )
            .unwrap();
            obs.apply(&StateVector::basis(2, idx).unwrap()).unwrap()
        };
        // σ^y|↑⟩ = i|↓⟩, σ^y|↓⟩ = −i|↑⟩
        assert_eq!(y(0).amplitudes()[1], Complex64::new(0.0, 1.0));
        assert_eq!(y(1).amplitudes()[0], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn simple_expectations() {
        for l in 2..8 {
            let psi = StateVector::all_up(l).unwrap();
            let mx = ObservableSpec::magnetization(l, Axis::X).expectation(&psi).unwrap();
            assert_eq!(mx, Complex64::new(0.0, 0.0));
            let mz = ObservableSpec::magnetization(l, Axis::Z).expectation(&psi).unwrap();
            assert_eq!(mz, Complex64::new(l as f64, 0.0));
        }
    }

    #[test]
    fn shipped_observables_are_hermitian() {
        let l = 8;
        let psi = random_state(l, RngSeed(17)).unwrap();
        let mut shipped: Vec<ObservableSpec> =
            [Axis::X, Axis::Y, Axis::Z].iter().map(|&a| ObservableSpec::magnetization(l, a)).collect();
        for p in ["x", "y", "z", "xx", "xy", "zy", "x0z", "yzx", "y0y"] {
            shipped.push(ObservableSpec::translation_invariant(p, l).unwrap());
        }
        for obs in shipped {
            assert!(obs.is_hermitian(1e-15), "{}", obs.name());
            let e = obs.expectation(&psi).unwrap();
            assert!(e.im.abs() < 1e-12, "{}: {e}", obs.name());
        }
    }

    #[test]
    fn non_hermitian_detected() {
        let s = PauliString::new(vec![(0, Axis::X)], Complex64::new(0.0, 1.0)).unwrap();
        let obs = ObservableSpec::new("ix", 2, vec![s], Normalization::None).unwrap();
        assert!(!obs.is_hermitian(1e-12));
    }

    #[test]
    fn token_parsing() {
        assert_eq!("M_x".parse::<ObservableKind>().unwrap(), ObservableKind::Magnetization(Axis::X));
        assert_eq!(
            "Z:x0z".parse::<ObservableKind>().unwrap(),
            ObservableKind::TranslationInvariant("x0z".into())
        );
        for bad in ["M_q", "M_xx", "Z:", "Z:0x", "Z:x0", "Z:xw", "foo"] {
            assert!(bad.parse::<ObservableKind>().is_err(), "{bad}");
        }
        let obs = ObservableSpec::from_token("Z:x0z", 6).unwrap();
        assert_eq!(obs.terms().len(), 6);
        assert_eq!(obs.terms()[5].ops(), &[(5, Axis::X), (1, Axis::Z)]);
        assert!(ObservableSpec::from_token("Z:xxx", 2).is_err());
    }

    #[test]
    fn site_errors() {
        let s = PauliString::new(vec![(4, Axis::X)], Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            ObservableSpec::new("bad", 3, vec![s], Normalization::None),
            Err(Error::SiteOutOfRange { site: 4, n_sites: 3 })
        ));
        assert!(matches!(
            PauliString::new(vec![(1, Axis::X), (1, Axis::Z)], Complex64::new(1.0, 0.0)),
            Err(Error::DuplicateSite(1))
        ));
        let m = ObservableSpec::magnetization(4, Axis::X);
        assert!(m.apply(&StateVector::all_up(5).unwrap()).is_err());
    }

    #[test]
    fn trace_of_identity_and_traceless() {
        let (v, e) = trace_average(6, &TraceAverageSpec::exact(), |psi| {
            Ok(inner_product_slices(psi.amplitudes(), psi.amplitudes()))
        })
        .unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
        assert_eq!(e, 0.0);
        let (v, _) = trace_average(6, &TraceAverageSpec::stochastic(8, 3), |psi| {
            Ok(inner_product_slices(psi.amplitudes(), psi.amplitudes()))
        })
        .unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        for l in [3, 5, 8] {
            let m = ObservableSpec::magnetization(l, Axis::X);
            let (v, _) = trace_average(l, &TraceAverageSpec::exact(), |psi| m.expectation(psi)).unwrap();
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn m_squared_per_site_is_one() {
        let l = 8;
        let m = ObservableSpec::magnetization(l, Axis::X);
        let f = |psi: &StateVector| {
            let a = m.apply(psi)?;
            Ok(inner_product_slices(a.amplitudes(), a.amplitudes()) / l as f64)
        };
        let (v, _) = trace_average(l, &TraceAverageSpec::exact(), f).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        let (v, err) = trace_average(l, &TraceAverageSpec::stochastic(64, 7), f).unwrap();
        assert!((v.re - 1.0).abs() < 4.0 * err, "{v} ± {err}");
    }

    #[test]
    fn exact_cap_enforced() {
        let spec = TraceAverageSpec::exact();
        assert!(matches!(
            trace_average(13, &spec, |_| Ok(Complex64::new(0.0, 0.0))),
            Err(Error::ExactTraceCap { n_sites: 13, cap: 12 })
        ));
    }

    #[test]
    fn z_x_moments_exact() {
        let exact = TraceAverageSpec::exact();
        for l in [4, 6, 10] {
            let (m2, _) = z_observable_moment("x", l, 2, &exact).unwrap();
            assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-12);
            let (m3, _) = z_observable_moment("x", l, 3, &exact).unwrap();
            assert_abs_diff_eq!(m3, 0.0, epsilon = 1e-12);
        }
        let (m4, _) = z_observable_moment("x", 10, 4, &exact).unwrap();
        assert_abs_diff_eq!(m4, 2.8, epsilon = 1e-10);
    }

    #[test]
    fn stochastic_mean_of_m_is_consistent_with_zero() {
        let l = 10;
        let m = ObservableSpec::magnetization(l, Axis::X);
        let spec = TraceAverageSpec::stochastic(100, 2024);
        let (v, err) = trace_average(l, &spec, |psi| m.expectation(psi)).unwrap();
        assert!(v.re.abs() < 4.0 * err, "{v} ± {err}");
    }
}
