use serde::{Deserialize, Serialize};

use super::{monte_carlo_mean, simulate_channel_use, EstimateReport};
use crate::distributions::{EmissionSource, FirstPassageModel};
use crate::error::{ensure_positive, invalid, Result};

/// A signaling epoch: `M` quanta released over `τ(M) = M/ρ`, followed by a
/// guard interval `γ = ετ(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochConfig {
    pub quanta: usize,
    /// Mean emission rate in quanta per unit time.
    pub rho: f64,
    /// Guard interval as a fraction of `τ(M)`.
    pub epsilon: f64,
}

impl EpochConfig {
    pub fn new(quanta: usize, rho: f64, epsilon: f64) -> Result<Self> {
        if quanta == 0 {
            return Err(invalid("M", "need at least one quantum"));
        }
        ensure_positive("rho", rho)?;
        ensure_positive("epsilon", epsilon)?;
        Ok(EpochConfig {
            quanta,
            rho,
            epsilon,
        })
    }

    pub fn tau(&self) -> f64 {
        self.quanta as f64 / self.rho
    }

    pub fn guard(&self) -> f64 {
        self.epsilon * self.tau()
    }

    fn with_quanta(&self, quanta: usize) -> Self {
        EpochConfig { quanta, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochVerdict {
    /// `M·Ḡ(γ)` fell at every step of the doubling probe.
    FeasibleTrend,
    NotDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochDiagnostics {
    pub config: EpochConfig,
    pub tau: f64,
    pub guard: f64,
    /// `G^M(γ)`, a lower bound on `P(last arrival ≤ τ + γ)`.
    pub worst_case_cdf: f64,
    /// `M·Ḡ(γ)`, which must vanish for the guard to suffice as `M` grows.
    pub tail_mass: f64,
    /// `(M', M'·Ḡ(M'ε/ρ))` for `M' = M, 2M, 4M, 8M`.
    pub doubling_probe: Vec<(usize, f64)>,
    pub verdict: EpochVerdict,
    /// The verdict extrapolates from four points and proves nothing.
    pub verdict_is_heuristic: bool,
}

fn tail_mass(model: &FirstPassageModel, cfg: &EpochConfig) -> f64 {
    cfg.quanta as f64 * model.ccdf(cfg.guard())
}

pub fn epoch_feasibility(model: &FirstPassageModel, cfg: EpochConfig) -> EpochDiagnostics {
    let guard = cfg.guard();
    let g = model.cdf(guard);
    let doubling_probe: Vec<(usize, f64)> = (0..4)
        .map(|k| {
            let m = cfg.quanta << k;
            (m, tail_mass(model, &cfg.with_quanta(m)))
        })
        .collect();
    let falling = doubling_probe.windows(2).all(|w| w[1].1 < w[0].1);
    EpochDiagnostics {
        config: cfg,
        tau: cfg.tau(),
        guard,
        worst_case_cdf: (cfg.quanta as f64 * g.ln()).exp(),
        tail_mass: tail_mass(model, &cfg),
        doubling_probe,
        verdict: if falling {
            EpochVerdict::FeasibleTrend
        } else {
            EpochVerdict::NotDecreasing
        },
        verdict_is_heuristic: true,
    }
}

/// Empirical `P(max arrival ≤ τ(1+ε))` for emissions from `density`, which
/// must stay inside `[0, τ]`.
pub fn estimate_epoch_containment<E: EmissionSource + ?Sized>(
    density: &E,
    model: &FirstPassageModel,
    cfg: EpochConfig,
    n: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let horizon = cfg.tau() + cfg.guard();
    monte_carlo_mean(n, seed, |rng| {
        let u = simulate_channel_use(density, model, cfg.quanta, rng)?;
        if u.t.iter().any(|&t| t > cfg.tau()) {
            return Err(invalid("density", "emission past the epoch deadline"));
        }
        let last = u.s_sorted[cfg.quanta - 1];
        Ok(if last <= horizon { 1.0 } else { 0.0 })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DeadlineInputDensity;

    #[test]
    fn config_checks() {
        assert!(EpochConfig::new(0, 1.0, 0.1).is_err());
        assert!(EpochConfig::new(4, 0.0, 0.1).is_err());
        assert!(EpochConfig::new(4, 1.0, 0.0).is_err());
        let c = EpochConfig::new(8, 2.0, 0.25).unwrap();
        assert_eq!(c.tau(), 4.0);
        assert_eq!(c.guard(), 1.0);
    }

    #[test]
    fn exponential_values_at_m64() {
        let model = FirstPassageModel::exponential(1.0).unwrap();
        let d = epoch_feasibility(&model, EpochConfig::new(64, 1.0, 0.1).unwrap());
        let g = 1.0 - (-6.4f64).exp();
        let mut pow = 1.0;
        for _ in 0..64 {
            pow *= g;
        }
        assert!((d.worst_case_cdf - pow).abs() < 1e-12);
        assert!((d.tail_mass - 64.0 * (-6.4f64).exp()).abs() < 1e-12);
        assert_eq!(d.verdict, EpochVerdict::FeasibleTrend);
        assert!(d.verdict_is_heuristic);
        assert_eq!(
            d.doubling_probe.iter().map(|p| p.0).collect::<Vec<_>>(),
            [64, 128, 256, 512]
        );
    }

    #[test]
    fn short_guard_is_not_yet_falling() {
        // M·e^{-Mε} grows while Mε < 1.
        let model = FirstPassageModel::exponential(1.0).unwrap();
        let d = epoch_feasibility(&model, EpochConfig::new(1, 1.0, 0.01).unwrap());
        assert_eq!(d.verdict, EpochVerdict::NotDecreasing);
    }

    #[test]
    fn worst_case_cdf_holds_empirically() {
        let model = FirstPassageModel::exponential(1.0).unwrap();
        for &quanta in &[8usize, 64] {
            let cfg = EpochConfig::new(quanta, 1.0, 0.1).unwrap();
            let density = DeadlineInputDensity::new(1.0, cfg.tau()).unwrap();
            let bound = epoch_feasibility(&model, cfg).worst_case_cdf;
            let r = estimate_epoch_containment(&density, &model, cfg, 20_000, 3).unwrap();
            assert!(
                r.mean + 3.0 * r.stderr >= bound,
                "M={quanta}: {r:?} vs {bound}"
            );
        }
    }

    #[test]
    fn emissions_past_deadline_are_rejected() {
        let model = FirstPassageModel::exponential(1.0).unwrap();
        let cfg = EpochConfig::new(2, 1.0, 0.1).unwrap();
        let late = crate::distributions::EmissionMarginal::point(5.0).unwrap();
        assert!(estimate_epoch_containment(&late, &model, cfg, 100, 1).is_err());
    }
}
