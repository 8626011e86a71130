//! Capacity lower bounds per quantum and per unit time.
//!
//! All of them are functions of `χ = λ/ρ`, the ratio of the capture rate to
//! the mean emission rate; per-time values scale by `ρ = λ/χ`.

use serde::{Deserialize, Serialize};

use crate::bounds::deadline::mi_ordered_lower;
use crate::error::{ensure_positive, Result};
use crate::special::ln_factorial;

/// Relative truncation threshold for the Poisson-limit series.
pub const SERIES_TOL: f64 = 1e-12;
/// Hard cap on series terms.
pub const SERIES_MAX_TERMS: usize = 10_000;

/// `C_q(M) ≥ I(S⃗;T)/M` with `λτ = χM`.
pub fn cq_finite(quanta: usize, chi: f64) -> Result<f64> {
    ensure_positive("chi", chi)?;
    Ok(mi_ordered_lower(quanta, chi * quanta as f64)? / quanta as f64)
}

/// The `H`-free bound `ln(1 + χM/e) - ln(M!)/M`.
pub fn cq_finite_without_ordering_entropy(quanta: usize, chi: f64) -> Result<f64> {
    ensure_positive("chi", chi)?;
    let m = quanta as f64;
    Ok((chi * m / std::f64::consts::E).ln_1p() - ln_factorial(quanta as u64) / m)
}

/// `max{ln χ, 0}`, valid for any passage law with mean `1/λ`.
pub fn cq_simple(chi: f64) -> Result<f64> {
    ensure_positive("chi", chi)?;
    Ok(chi.ln().max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    pub raw: f64,
    pub clamped: f64,
    pub terms: usize,
}

/// Large-`M` limit for exponential passage:
/// `ln χ + e^{-1/χ} Σ_{k≥2} χ^{-k} (kχ - 1) ln k! / k!`.
///
/// Terms are built in log space. Truncation starts once `k` is past the
/// Poisson peak at `1/χ`, when a term drops below `tol` times the partial
/// sum.
pub fn cq_series(chi: f64, tol: f64) -> Result<SeriesBound> {
    ensure_positive("chi", chi)?;
    let ln_chi = chi.ln();
    let past_peak = 2.0 / chi + 2.0;
    let mut sum = 0.0;
    let mut terms = 0;
    for k in 2..=(SERIES_MAX_TERMS as u64 + 1) {
        terms += 1;
        let kf = k as f64;
        let lead = kf * chi - 1.0;
        if lead == 0.0 {
            continue;
        }
        let lf = ln_factorial(k);
        let ln_mag = -1.0 / chi - kf * ln_chi + lead.abs().ln() + lf.ln() - lf;
        let term = lead.signum() * ln_mag.exp();
        sum += term;
        if kf > past_peak && term.abs() <= tol * sum.abs() {
            break;
        }
    }
    let raw = ln_chi + sum;
    Ok(SeriesBound {
        raw,
        clamped: raw.max(0.0),
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Simple,
    Series,
}

/// `C_t ≥ ρ C_q` with `ρ = λ/χ`, using the clamped per-quantum bound.
pub fn ct_bound(rate: f64, chi: f64, variant: BoundVariant) -> Result<f64> {
    ensure_positive("lambda", rate)?;
    let cq = match variant {
        BoundVariant::Simple => cq_simple(chi)?,
        BoundVariant::Series => cq_series(chi, SERIES_TOL)?.clamped,
    };
    Ok(rate / chi * cq)
}

/// One evaluated point of a bound curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub chi: f64,
    /// Quanta per channel use; `None` for the `M → ∞` limit.
    pub quanta: Option<usize>,
    /// Clamped at zero.
    pub cq: f64,
    pub cq_raw: f64,
    pub ct: f64,
}

impl BoundPoint {
    pub fn finite(quanta: usize, chi: f64, rate: f64) -> Result<Self> {
        ensure_positive("lambda", rate)?;
        let raw = cq_finite(quanta, chi)?;
        Ok(Self::from_raw(chi, Some(quanta), raw, rate))
    }

    pub fn series(chi: f64, rate: f64) -> Result<Self> {
        ensure_positive("lambda", rate)?;
        let s = cq_series(chi, SERIES_TOL)?;
        Ok(Self::from_raw(chi, None, s.raw, rate))
    }

    fn from_raw(chi: f64, quanta: Option<usize>, raw: f64, rate: f64) -> Self {
        let cq = raw.max(0.0);
        BoundPoint {
            chi,
            quanta,
            cq,
            cq_raw: raw,
            ct: rate / chi * cq,
        }
    }
}
