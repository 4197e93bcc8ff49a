//! Fidelity decay at the three parameter points: fitted time scale against
//! the gaussian (non-ergodic) and exponential (ergodic) laws.

use kifid::dynamics::{correlation_series, estimate_statistics, fidelity_series};
use kifid::harness::Preset;
use kifid::observables::{Axis, ObservableSpec, TraceAverageSpec};
use kifid::theory::{fit_decay, saturation, tau_ergodic, tau_nonergodic, unscaled_delta, DecayRegime};

fn main() -> kifid::Result<()> {
    let l = 12;
    let dp = 0.04;
    let delta = unscaled_delta(dp, l);
    let avg = TraceAverageSpec::stochastic(16, 1);
    println!("L = {l}, δ' = {dp}, δ = {delta:.4}");
    for preset in Preset::ALL {
        let params = preset.params();
        let corr = correlation_series(&params, &ObservableSpec::magnetization(l, Axis::X), 300, &avg)?;
        let stats = estimate_statistics(&corr)?;
        let fid = fidelity_series(&params, l, delta, 150, &avg, false)?;
        let fit = fit_decay(&fid, l)?;
        let tau_ne = tau_nonergodic(stats.d_a * l as f64, delta).ok();
        let tau_e = tau_ergodic(stats.s_a * l as f64, delta).ok();
        println!(
            "{:<12} fit {:?} τ = {:.2} (rmse exp {:.3}, gauss {:.3}); τ_ne = {:?}, τ_e = {:?}",
            preset.name(),
            fit.regime,
            fit.tau,
            fit.rmse_exponential,
            fit.rmse_gaussian,
            tau_ne.map(|t| (t * 100.0).round() / 100.0),
            tau_e.map(|t| (t * 100.0).round() / 100.0),
        );
        let sat = saturation(fit.regime, fit.tau, l);
        let late = fid.values[fid.len() - 1].norm();
        println!("{:<12} saturation t* = {:.1}, plateau {:.4}, |F(150)| = {late:.4}", "", sat.t_star, sat.plateau);
        if fit.regime == DecayRegime::Ergodic {
            println!("{:<12} exponential decay, rate set by the integrated correlation", "");
        }
    }
    Ok(())
}
