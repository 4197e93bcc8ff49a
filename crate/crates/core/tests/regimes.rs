//! Longer simulations of the three parameter points (L = 12 to 20).

use std::sync::OnceLock;

use kifid::dynamics::{
    correlation_series, estimate_statistics, fidelity_series, time_averaged_moments, CorrelationStatistics,
};
use kifid::harness::Preset;
use kifid::observables::{Axis, ObservableSpec, TraceAverageSpec};
use kifid::theory::{d_sigma_x, fit_decay, tau_ergodic, tau_nonergodic, unscaled_delta, DecayRegime};

fn avg() -> TraceAverageSpec {
    TraceAverageSpec::stochastic(16, 1)
}

fn stats(preset: Preset, l: usize) -> CorrelationStatistics {
    let series = correlation_series(&preset.params(), &ObservableSpec::magnetization(l, Axis::X), 300, &avg()).unwrap();
    estimate_statistics(&series).unwrap()
}

fn ergodic_l16() -> &'static CorrelationStatistics {
    static CELL: OnceLock<CorrelationStatistics> = OnceLock::new();
    CELL.get_or_init(|| stats(Preset::Ergodic, 16))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn intermediate_plateau_and_approach_time() {
    let s = stats(Preset::Intermediate, 14);
    assert_eq!(s.classification, kifid::dynamics::Classification::NonErgodic);
    assert!(rel(s.d_a, 0.293) <= 0.15, "D_M/L = {}", s.d_a);
    let t_ave = s.t_ave.expect("approach time");
    assert!(rel(t_ave, 7.2) <= 0.30, "t_ave = {t_ave}");
}

#[test]
fn ergodic_mixing_time() {
    let s = stats(Preset::Ergodic, 14);
    assert_eq!(s.classification, kifid::dynamics::Classification::Ergodic);
    let t_mix = s.t_mix.expect("mixing time");
    assert!(rel(t_mix, 6.0) <= 0.30, "t_mix = {t_mix}");
}

#[test]
fn ergodic_integrated_correlation_at_sixteen_sites() {
    let s = ergodic_l16();
    assert!(rel(s.s_a, 2.54) <= 0.15, "S_M/L = {}", s.s_a);
}

#[test]
fn ergodic_fidelity_follows_measured_integrated_correlation() {
    let l = 16;
    let s_m = ergodic_l16().s_a * l as f64;
    let delta = unscaled_delta(0.04, l);
    let series = fidelity_series(&Preset::Ergodic.params(), l, delta, 120, &TraceAverageSpec::stochastic(4, 2), false).unwrap();
    let fit = fit_decay(&series, l).unwrap();
    assert_eq!(fit.regime, DecayRegime::Ergodic, "{fit:?}");
    let theory = tau_ergodic(s_m, delta).unwrap();
    assert!(rel(fit.tau, theory) <= 0.15, "fit {} vs {theory}", fit.tau);
}

#[test]
fn integrable_time_average_moments() {
    let m = time_averaged_moments(&Preset::Integrable.params(), &ObservableSpec::magnetization(12, Axis::X), 200, 1, &avg())
        .unwrap();
    let per_site = m.moments[0] / 12.0;
    assert!(rel(per_site, d_sigma_x(1.0, 1.4).unwrap()) <= 0.05, "<A^2>/L = {per_site}");
}

#[test]
fn intermediate_time_average_is_gaussian() {
    let m = time_averaged_moments(&Preset::Intermediate.params(), &ObservableSpec::magnetization(12, Axis::X), 200, 2, &avg())
        .unwrap();
    let k = m.kurtosis.unwrap();
    assert!(rel(k, 3.0) <= 0.15, "<A^4>/<A^2>^2 = {k}");
}

#[test]
fn integrable_fidelity_is_gaussian_at_sixteen_sites() {
    let l = 16;
    let delta = unscaled_delta(0.02, l);
    let tau = tau_nonergodic(d_sigma_x(1.0, 1.4).unwrap() * l as f64, delta).unwrap();
    let series = fidelity_series(&Preset::Integrable.params(), l, delta, 40, &TraceAverageSpec::stochastic(4, 3), false).unwrap();
    // Local decay time t / sqrt(-2 ln|F|) against τ_ne, down to |F| = 0.1.
    let mut checked = 0;
    for t in 2..=40 {
        let f = series.values[t].norm();
        if f < 0.1 {
            break;
        }
        let local = t as f64 / (-2.0 * f.ln()).sqrt();
        assert!(rel(local, tau) <= 0.10, "t = {t}: |F| = {f}, local τ {local} vs {tau}");
        checked += 1;
    }
    assert!(checked >= 20, "{checked}");
}

#[test]
fn integrable_fidelity_fits_at_twenty_sites() {
    let l = 20;
    let params = Preset::Integrable.params();
    for (dp, t_max, samples) in [(0.04, 40, 4), (0.01, 110, 2)] {
        let delta = unscaled_delta(dp, l);
        let series = fidelity_series(&params, l, delta, t_max, &TraceAverageSpec::stochastic(samples, 5), false).unwrap();
        let fit = fit_decay(&series, l).unwrap();
        let theory = tau_nonergodic(d_sigma_x(1.0, 1.4).unwrap() * l as f64, delta).unwrap();
        assert_eq!(fit.regime, DecayRegime::NonErgodic, "δ' = {dp}: {fit:?}");
        assert!(rel(fit.tau, theory) <= 0.10, "δ' = {dp}: fit {} vs {theory}", fit.tau);
    }
}
