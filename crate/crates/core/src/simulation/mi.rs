use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::estimators::conditional_log_density;
use super::{collect_samples, simulate_channel_use, EstimateReport, Welford};
use crate::bounds::deadline::{h_omega_exponential, unordered_mi};
use crate::distributions::{DeadlineInputDensity, FirstPassageModel};
use crate::error::{invalid, Error, Result};
use crate::permutation::perm_entropy;

/// Equal-mass bins per axis of the ordered-pair histogram.
pub const MI_BINS: usize = 64;
/// Agreement expected between the two sides at `n = 10⁶`.
pub const MI_TOLERANCE: f64 = 0.05;

/// Both sides of `I(S⃗;T) = I(S;T) - (ln M! - H(Ω|S⃗,T))` at `M = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiDecomposition {
    pub lambda_tau: f64,
    pub n: u64,
    pub seed: u64,
    /// Histogram estimate of `h(S⃗)`.
    pub h_ordered: f64,
    /// `2 h(S) - ln 2` with `h(S) = 1 + ln(1 + λτ/e) - ln λ`.
    pub h_ordered_closed_form: f64,
    /// Sample mean of `-ln f_{S⃗|T}(S⃗|T)`.
    pub h_conditional: EstimateReport,
    /// `h(S⃗) - h(S⃗|T)`
    pub lhs: f64,
    /// `I(S;T) = 2 ln(1 + λτ/e)`
    pub unordered_mi: f64,
    pub h_omega_closed_form: f64,
    pub h_omega_monte_carlo: EstimateReport,
    /// `I(S;T) - ln 2 + H_e`
    pub rhs_closed_form: f64,
    /// `I(S;T) - ln 2 +` Monte Carlo `H(Ω|S⃗,T)`
    pub rhs_monte_carlo: f64,
    /// `|lhs - rhs_closed_form|`
    pub gap: f64,
}

/// Estimate both sides of the decomposition from `n` channel uses.
///
/// The left side pairs a histogram estimate of `h(S⃗)` with the exact
/// conditional density `f_{S⃗|T}` evaluated on each draw, so only the joint
/// output entropy is binned. The right side needs `I(S;T)` in closed form,
/// which holds for exponential passage at the density's own rate.
pub fn estimate_mi_decomposition(
    density: &DeadlineInputDensity,
    model: &FirstPassageModel,
    quanta: usize,
    n: usize,
    seed: u64,
) -> Result<MiDecomposition> {
    if quanta != 2 {
        return Err(Error::UnsupportedQuanta {
            op: "estimate_mi_decomposition",
            required: 2,
            got: quanta,
        });
    }
    let rate = density.rate();
    let matches = matches!(model, FirstPassageModel::Exponential { rate: r }
        if (r - rate).abs() <= 1e-12 * rate);
    if !matches {
        return Err(invalid(
            "model",
            "the closed-form I(S;T) needs exponential passage at the density's rate",
        ));
    }
    if n < MI_BINS * MI_BINS {
        return Err(invalid(
            "n",
            format!("need at least {} samples", MI_BINS * MI_BINS),
        ));
    }

    let draws = collect_samples(n, seed, |rng| {
        let u = simulate_channel_use(density, model, quanta, rng)?;
        let log_f = conditional_log_density(model, &u.t, &u.s_sorted)?;
        let h = perm_entropy(model, &u.t, &u.s_sorted)?;
        Ok(([u.s_sorted[0], u.s_sorted[1]], -log_f, h))
    })?;
    let mut cond = Welford::default();
    let mut perm = Welford::default();
    for (_, neg_log_f, h) in &draws {
        cond.push(*neg_log_f);
        perm.push(*h);
    }
    let pairs: Vec<[f64; 2]> = draws.into_iter().map(|(p, _, _)| p).collect();
    let h_ordered = ordered_pair_entropy(&pairs, MI_BINS)?;

    let lt = density.lambda_tau();
    let h_single = 1.0 + (lt / std::f64::consts::E).ln_1p() - rate.ln();
    let h_conditional = cond.report(seed);
    let h_omega_monte_carlo = perm.report(seed);
    let he = h_omega_exponential(quanta, lt)?;
    let mi = unordered_mi(quanta, lt);
    let lhs = h_ordered - h_conditional.mean;
    let rhs_closed_form = mi - LN_2 + he;
    Ok(MiDecomposition {
        lambda_tau: lt,
        n: n as u64,
        seed,
        h_ordered,
        h_ordered_closed_form: 2.0 * h_single - LN_2,
        h_conditional,
        lhs,
        unordered_mi: mi,
        h_omega_closed_form: he,
        h_omega_monte_carlo,
        rhs_closed_form,
        rhs_monte_carlo: mi - LN_2 + h_omega_monte_carlo.mean,
        gap: (lhs - rhs_closed_form).abs(),
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn equal_mass_edges(sorted: &[f64], bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| quantile(sorted, i as f64 / bins as f64))
        .collect()
}

/// Bin index with half-open bins, the last one closed.
fn bin_of(edges: &[f64], x: f64) -> usize {
    let bins = edges.len() - 1;
    edges
        .partition_point(|&e| e <= x)
        .saturating_sub(1)
        .min(bins - 1)
}

/// Differential entropy of points on `{x < y}` from an adaptive histogram.
///
/// `bins` equal-mass slabs on `x`, each split into `bins` equal-mass cells on
/// `y`. The lowest `y` edge of a slab is its lower `x` edge, so every cell
/// volume is the exact area of its rectangle inside the half-plane. The
/// plug-in estimate carries the Miller–Madow correction `(K-1)/(2n)` over
/// the `K` occupied cells.
pub fn ordered_pair_entropy(points: &[[f64; 2]], bins: usize) -> Result<f64> {
    if bins == 0 || points.len() < bins {
        return Err(invalid("bins", "need at least one point per bin"));
    }
    let n = points.len() as f64;
    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    let x_edges = equal_mass_edges(&xs, bins);

    let mut slabs: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for p in points {
        slabs[bin_of(&x_edges, p[0])].push(p[1]);
    }

    let mut plug_in = 0.0;
    let mut occupied = 0usize;
    for (b, ys) in slabs.iter_mut().enumerate() {
        if ys.is_empty() {
            continue;
        }
        ys.sort_by(f64::total_cmp);
        let (a0, a1) = (x_edges[b], x_edges[b + 1]);
        let mut y_edges = equal_mass_edges(ys, bins);
        y_edges[0] = a0;
        let mut counts = vec![0usize; bins];
        for &y in ys.iter() {
            counts[bin_of(&y_edges, y)] += 1;
        }
        // Area of {a0 ≤ x ≤ a1, x < y' ≤ y}.
        let below = |y: f64| {
            if y <= a0 {
                0.0
            } else if y <= a1 {
                0.5 * (y - a0).powi(2)
            } else {
                0.5 * (a1 - a0).powi(2) + (y - a1) * (a1 - a0)
            }
        };
        for (j, &c) in counts.iter().enumerate() {
            let area = below(y_edges[j + 1]) - below(y_edges[j]);
            if c > 0 && area > 0.0 {
                let p = c as f64 / n;
                plug_in -= p * (p / area).ln();
                occupied += 1;
            }
        }
    }
    Ok(plug_in + (occupied.saturating_sub(1)) as f64 / (2.0 * n))
}
