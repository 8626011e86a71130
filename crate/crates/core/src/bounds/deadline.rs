//! Closed forms for the deadline emission density under exponential passage.
//!
//! Writing `p1 = e/(e+λτ)` and `p2 = 1/(e+λτ)`, the first difference of the
//! consolidated occupancy weights collapses to two binomial pmfs:
//!
//! ```text
//! ΔΓ̄_{M,k-1} = C(M,k) p1^k (1-p1)^{M-k}
//!            + λτ/(1-p2) · (k - M p2) · C(M,k) p2^k (1-p2)^{M-k}
//! ```
//!
//! and `H_e(Ω | S⃗, T) = Σ_{k=2}^{M} ΔΓ̄_{M,k-1} ln k!`.

use std::f64::consts::E;

use crate::error::{ensure_positive, invalid, Result};
use crate::special::{binomial_pmf, binomial_window, ln_factorial, pairwise_sum};

/// The pair of binomials behind `H_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialMixture {
    pub quanta: u64,
    pub lambda_tau: f64,
    /// `e/(e+λτ)`
    pub p1: f64,
    /// `1/(e+λτ)`
    pub p2: f64,
}

impl BinomialMixture {
    pub fn new(quanta: u64, lambda_tau: f64) -> Result<Self> {
        ensure_positive("lambda_tau", lambda_tau)?;
        let p2 = 1.0 / (E + lambda_tau);
        Ok(BinomialMixture {
            quanta,
            lambda_tau,
            p1: E * p2,
            p2,
        })
    }

    /// Weight `λτ/(1-p2) · (k - M p2)` on the second binomial.
    pub fn second_weight(&self, k: u64) -> f64 {
        self.lambda_tau / (1.0 - self.p2) * (k as f64 - self.quanta as f64 * self.p2)
    }

    /// `ΔΓ̄_{M,k-1}` for `k` in `0..=M`.
    pub fn delta_gamma(&self, k: u64) -> f64 {
        binomial_pmf(self.quanta, k, self.p1)
            + self.second_weight(k) * binomial_pmf(self.quanta, k, self.p2)
    }

    /// Indices `k ≥ 2` that can carry non-negligible weight.
    fn support(&self) -> impl Iterator<Item = u64> {
        let (a_lo, a_hi) = binomial_window(self.quanta, self.p1);
        let (b_lo, b_hi) = binomial_window(self.quanta, self.p2);
        let lo = a_lo.min(b_lo).max(2);
        let hi = a_hi.max(b_hi);
        let gap = (a_hi.min(b_hi), a_lo.max(b_lo));
        (lo..=hi).filter(move |&k| !(k > gap.0 && k < gap.1))
    }
}

/// `ΔΓ̄_{M,k-1}` for the deadline density, `1 ≤ k-1 ≤ M-1`.
pub fn delta_gamma_deadline(quanta: usize, lambda_tau: f64, k: usize) -> Result<f64> {
    if !(2..=quanta).contains(&k) {
        return Err(crate::error::Error::IndexOutOfRange(format!(
            "k = {k} outside 2..={quanta}"
        )));
    }
    Ok(BinomialMixture::new(quanta as u64, lambda_tau)?.delta_gamma(k as u64))
}

/// `H_e(Ω | S⃗, T) = Σ_{k=2}^{M} ΔΓ̄_{M,k-1} ln k!`, exact for exponential
/// passage with the deadline density.
pub fn h_omega_exponential(quanta: usize, lambda_tau: f64) -> Result<f64> {
    if quanta == 0 {
        return Err(invalid("M", "need at least one quantum"));
    }
    let mix = BinomialMixture::new(quanta as u64, lambda_tau)?;
    let terms: Vec<f64> = mix
        .support()
        .map(|k| mix.delta_gamma(k) * ln_factorial(k))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `E[g(K)]` for `K ~ Binomial(M, p)`, summed in log space over the
/// non-negligible window.
pub fn binom_expect<F: Fn(u64) -> f64>(quanta: u64, p: f64, f: F) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    let (lo, hi) = binomial_window(quanta, p);
    let terms: Vec<f64> = (lo..=hi)
        .map(|k| {
            let w = binomial_pmf(quanta, k, p);
            if w == 0.0 {
                0.0
            } else {
                w * f(k)
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `E[ln K!]` for `K ~ Binomial(M, p)`.
pub fn binom_expect_log_factorial(quanta: u64, p: f64) -> Result<f64> {
    binom_expect(quanta, p, ln_factorial)
}

/// `H_e` written as expectations over the two binomials:
/// `E[ln K1!] + E[(K2 λτ/(1-p2) - λτ M/((1-p2)(λτ+e))) ln K2!]`.
pub fn h_omega_binomial_form(quanta: usize, lambda_tau: f64) -> Result<f64> {
    let mix = BinomialMixture::new(quanta as u64, lambda_tau)?;
    let first = binom_expect_log_factorial(mix.quanta, mix.p1)?;
    let second = binom_expect(mix.quanta, mix.p2, |k| {
        mix.second_weight(k) * ln_factorial(k)
    })?;
    Ok(first + second)
}

/// `I(S⃗; T) = M ln(1 + λτ/e) - ln M! + H_e` for exponential passage and the
/// deadline density.
pub fn mi_ordered_lower(quanta: usize, lambda_tau: f64) -> Result<f64> {
    let he = h_omega_exponential(quanta, lambda_tau)?;
    Ok(unordered_mi(quanta, lambda_tau) - ln_factorial(quanta as u64) + he)
}

/// `I(S; T) = M ln(1 + λτ/e)`, the unordered channel under the same input.
pub fn unordered_mi(quanta: usize, lambda_tau: f64) -> f64 {
    quanta as f64 * (lambda_tau / E).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::iid::IidEmissionBounds;
    use crate::distributions::{DeadlineInputDensity, FirstPassageModel};

    #[test]
    fn mixture_probabilities() {
        for &lt in &[1e-3, 0.5, 1.0, E, 10.0, 1e3] {
            let m = BinomialMixture::new(10, lt).unwrap();
            assert!(0.0 < m.p2 && m.p2 < m.p1 && m.p1 < 1.0);
            assert!((m.p1 - E * m.p2).abs() < 1e-16);
        }
        assert!(BinomialMixture::new(3, 0.0).is_err());
    }

    #[test]
    fn log_factorial_expectation_edges() {
        assert_eq!(binom_expect_log_factorial(12, 0.0).unwrap(), 0.0);
        assert!((binom_expect_log_factorial(12, 1.0).unwrap() - ln_factorial(12)).abs() < 1e-12);
        assert!(binom_expect_log_factorial(12, 1.5).is_err());
    }

    #[test]
    fn log_factorial_expectation_matches_bernoulli_strings() {
        // Sum over all 2^10 strings of ten fair coin flips.
        let exhaustive: f64 = (0u32..1024)
            .map(|mask| ln_factorial(u64::from(mask.count_ones())) / 1024.0)
            .sum();
        let v = binom_expect_log_factorial(10, 0.5).unwrap();
        assert!((v - exhaustive).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature_route() {
        let model = FirstPassageModel::exponential(1.0).unwrap();
        for &lt in &[0.5, 1.0, E, 10.0] {
            let marg = DeadlineInputDensity::from_lambda_tau(lt)
                .unwrap()
                .marginal();
            let b = IidEmissionBounds::new(&marg, &model);
            for quanta in 2..=12usize {
                for k in 2..=quanta {
                    let closed = delta_gamma_deadline(quanta, lt, k).unwrap();
                    let generic = b.delta_gamma(quanta, k - 1).unwrap();
                    assert!(
                        (closed - generic).abs() < 1e-9,
                        "λτ={lt} M={quanta} k={k}: {closed} vs {generic}"
                    );
                }
            }
        }
    }

    #[test]
    fn telescoped_mass_matches_first_gamma() {
        for &lt in &[0.5, E, 10.0] {
            let d = DeadlineInputDensity::from_lambda_tau(lt).unwrap();
            for quanta in 2..=12usize {
                let sum: f64 = (2..=quanta)
                    .map(|k| delta_gamma_deadline(quanta, lt, k).unwrap())
                    .sum();
                // Γ̄_{M,1} = M (M-1) E[φ (1-φ)^{M-2}], expanded binomially.
                let n = quanta - 2;
                let gamma1: f64 = (0..=n)
                    .map(|r| {
                        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                        sign * crate::special::choose(n as u64, r as u64)
                            * d.expected_phi_pow(r as u32 + 1)
                    })
                    .sum::<f64>()
                    * (quanta * (quanta - 1)) as f64;
                assert!((sum - gamma1).abs() < 1e-9, "λτ={lt} M={quanta}");
                assert!(sum >= 0.0);
            }
        }
    }

    #[test]
    fn tiny_spread_collapses_to_log_factorial() {
        for quanta in 1..=10usize {
            let h = h_omega_exponential(quanta, 1e-6).unwrap();
            let cap = ln_factorial(quanta as u64);
            assert!(
                (h - cap).abs() < 1e-4 * cap.max(1.0),
                "M={quanta}: {h} vs {cap}"
            );
        }
    }

    #[test]
    fn binomial_form_agrees_term_by_term() {
        for &lt in &[0.5, 1.0, E, 10.0, 200.0] {
            for &quanta in &[1usize, 2, 3, 7, 12, 64, 1000] {
                let a = h_omega_exponential(quanta, lt).unwrap();
                let b = h_omega_binomial_form(quanta, lt).unwrap();
                assert!(
                    (a - b).abs() < 1e-9 * a.abs().max(1.0),
                    "λτ={lt} M={quanta}"
                );
            }
        }
    }

    #[test]
    fn entropy_caps() {
        for quanta in 1..=40usize {
            for &lt in &[1e-3, 0.1, 0.5, 1.0, E, 10.0, 100.0] {
                let h = h_omega_exponential(quanta, lt).unwrap();
                assert!(h >= -1e-12 && h <= ln_factorial(quanta as u64) + 1e-9);
            }
        }
        assert_eq!(h_omega_exponential(1, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn single_quantum_mi() {
        for &lt in &[0.1, 1.0, 5.0] {
            let v = mi_ordered_lower(1, lt).unwrap();
            assert!((v - (1.0 + lt / E).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn two_quanta_mi_at_lambda_tau_e() {
        let he = h_omega_exponential(2, E).unwrap();
        let v = mi_ordered_lower(2, E).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 2f64.ln() + he)).abs() < 1e-14);
    }

    #[test]
    fn mi_increases_with_lambda_tau_on_sweep() {
        for &quanta in &[1usize, 2, 5, 20, 100] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..60 {
                let lt = 10f64.powf(-2.0 + i as f64 * 0.08);
                let v = mi_ordered_lower(quanta, lt).unwrap();
                assert!(v >= prev - 1e-12, "M={quanta} λτ={lt}");
                prev = v;
            }
        }
    }
}
