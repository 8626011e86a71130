use serde::{Deserialize, Serialize};

use super::{monte_carlo, monte_carlo_mean, simulate_channel_use, EstimateReport};
use crate::distributions::{EmissionSource, FirstPassageModel};
use crate::error::{Error, Result};
use crate::permutation::{count_admissible, enumerate_admissible, perm_entropy, ENUMERATION_CAP};
use crate::special::log_sum_exp;

fn check_enumerable(model: &FirstPassageModel, quanta: usize) -> Result<()> {
    if !model.is_memoryless() && quanta > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            cap: ENUMERATION_CAP,
            got: quanta,
        });
    }
    Ok(())
}

/// Monte Carlo mean of `H(Ω | s⃗, t)` over simulated channel uses.
///
/// Non-memoryless laws need the exact per-sample pmf, so `M` is capped at
/// [`ENUMERATION_CAP`] for them.
pub fn estimate_h_omega<E: EmissionSource + ?Sized>(
    density: &E,
    model: &FirstPassageModel,
    quanta: usize,
    n: usize,
    seed: u64,
) -> Result<EstimateReport> {
    check_enumerable(model, quanta)?;
    monte_carlo_mean(n, seed, |rng| {
        let u = simulate_channel_use(density, model, quanta, rng)?;
        perm_entropy(model, &u.t, &u.s_sorted)
    })
}

/// Monte Carlo mean of `ln |Ω(s⃗, t)|`, the log admissible count.
pub fn estimate_log_count<E: EmissionSource + ?Sized>(
    density: &E,
    model: &FirstPassageModel,
    quanta: usize,
    n: usize,
    seed: u64,
) -> Result<EstimateReport> {
    monte_carlo_mean(n, seed, |rng| {
        let u = simulate_channel_use(density, model, quanta, rng)?;
        Ok(count_admissible(&u.t, &u.s_sorted)?.ln)
    })
}

/// Paired estimates of `H(Ω | s⃗, t)` and `ln |Ω|` on the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingEntropyComparison {
    pub h_omega: EstimateReport,
    pub log_count: EstimateReport,
    /// Per-sample `ln |Ω| - H`, never negative.
    pub difference: EstimateReport,
    /// Smallest per-sample difference seen.
    pub min_difference: f64,
}

pub fn compare_h_omega_to_log_count<E: EmissionSource + ?Sized>(
    density: &E,
    model: &FirstPassageModel,
    quanta: usize,
    n: usize,
    seed: u64,
) -> Result<OrderingEntropyComparison> {
    check_enumerable(model, quanta)?;
    let [h, c, diff] = monte_carlo(n, seed, |rng| {
        let u = simulate_channel_use(density, model, quanta, rng)?;
        let h = perm_entropy(model, &u.t, &u.s_sorted)?;
        let c = count_admissible(&u.t, &u.s_sorted)?.ln;
        Ok([h, c, c - h])
    })?;
    Ok(OrderingEntropyComparison {
        h_omega: h.report(seed),
        log_count: c.report(seed),
        difference: diff.report(seed),
        min_difference: diff.min(),
    })
}

/// `ln f_{S⃗|T}(s⃗ | t) = ln Σ_π Π_m g(s[π(m)] - t[m])`, summed over the
/// admissible matchings.
pub fn conditional_log_density(
    model: &FirstPassageModel,
    t: &[f64],
    s_sorted: &[f64],
) -> Result<f64> {
    let terms: Vec<f64> = enumerate_admissible(t, s_sorted)?
        .iter()
        .map(|perm| {
            perm.iter()
                .zip(t)
                .map(|(&j, &tm)| model.log_density(s_sorted[j] - tm))
                .sum()
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Per-sample `Σ s⃗ - Σ s`, the hyper-symmetric identity `E[Q(X⃗)] = E[Q(X)]`
/// for the component sum.
pub fn estimate_sorted_sum_gap<E: EmissionSource + ?Sized>(
    density: &E,
    model: &FirstPassageModel,
    quanta: usize,
    n: usize,
    seed: u64,
) -> Result<EstimateReport> {
    monte_carlo_mean(n, seed, |rng| {
        let u = simulate_channel_use(density, model, quanta, rng)?;
        Ok(u.s_sorted.iter().sum::<f64>() - u.s.iter().sum::<f64>())
    })
}
