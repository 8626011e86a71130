//! Quadrature route for i.i.d. emissions under an arbitrary passage law.
//!
//! With `φ(t) = ∫₀ᵗ f_T(x) Ḡ(t-x) dx`, the expected number of "still in
//! flight" emissions behind the `(m+1)`-st emission drives every quantity
//! here: `Θ̄_{m,ℓ}`, its consolidation `Γ̄_{M,ℓ} = Σ_m Θ̄_{m,ℓ}`, the first
//! difference `ΔΓ̄_{M,ℓ}`, and the upper bound
//! `H↑(T) = Σ_ℓ ΔΓ̄_{M,ℓ} ln (ℓ+1)!` on `H(Ω | S⃗, T)`.

use std::cell::RefCell;

use crate::distributions::{EmissionMarginal, FirstPassageModel};
use crate::error::{Error, Result};
use crate::quadrature::Tolerance;
use crate::special::{choose, ln_factorial};

/// A marginal/passage pair with cached moments `E[φᵏ(T)]`.
#[derive(Debug)]
pub struct IidEmissionBounds<'a> {
    marginal: &'a EmissionMarginal,
    model: &'a FirstPassageModel,
    tol: Tolerance,
    moments: RefCell<Vec<f64>>,
}

impl<'a> IidEmissionBounds<'a> {
    /// Uses [`Tolerance::TIGHT`]: the alternating sum in
    /// [`delta_gamma`](Self::delta_gamma) amplifies quadrature error by the
    /// size of its binomial weights.
    pub fn new(marginal: &'a EmissionMarginal, model: &'a FirstPassageModel) -> Self {
        Self::with_tolerance(marginal, model, Tolerance::TIGHT)
    }

    pub fn with_tolerance(
        marginal: &'a EmissionMarginal,
        model: &'a FirstPassageModel,
        tol: Tolerance,
    ) -> Self {
        IidEmissionBounds {
            marginal,
            model,
            tol,
            moments: RefCell::new(Vec::new()),
        }
    }

    /// `E[φᵏ(T)]`, memoized.
    pub fn phi_moment(&self, k: usize) -> f64 {
        let mut cache = self.moments.borrow_mut();
        while cache.len() <= k {
            let j = cache.len() as u32;
            let v = self.marginal.expected_phi_pow(self.model, j, self.tol);
            cache.push(v);
        }
        cache[k]
    }

    /// `Θ̄_{m,ℓ} = M C(M-1,ℓ) C(M-ℓ-1,m-ℓ) ∫ f_T (1-F_T)^{M-m-1} φ^ℓ (F_T-φ)^{m-ℓ} dt`
    pub fn theta_bar(&self, quanta: usize, m: usize, ell: usize) -> Result<f64> {
        if !(1 <= ell && ell <= m && m < quanta) {
            return Err(Error::IndexOutOfRange(format!(
                "Θ̄ needs 1 <= ℓ <= m <= M-1, got M={quanta} m={m} ℓ={ell}"
            )));
        }
        let (mm, m_u, l_u) = (quanta as u64, m as u64, ell as u64);
        let coeff = mm as f64 * choose(mm - 1, l_u) * choose(mm - l_u - 1, m_u - l_u);
        let above = (quanta - m - 1) as i32;
        let behind = (m - ell) as i32;
        let integral = self.marginal.expect(
            self.model,
            |f, phi| {
                let gap = (f - phi).max(0.0);
                (1.0 - f).max(0.0).powi(above) * phi.powi(ell as i32) * gap.powi(behind)
            },
            self.tol,
        );
        Ok(coeff * integral)
    }

    /// `Γ̄_{M,ℓ} = M C(M-1,ℓ) ∫ f_T φ^ℓ (1-φ)^{M-1-ℓ} dt`; zero at `ℓ = M`.
    pub fn gamma_bar(&self, quanta: usize, ell: usize) -> Result<f64> {
        check_ell(quanta, ell, true)?;
        if ell == quanta {
            return Ok(0.0);
        }
        let coeff = quanta as f64 * choose(quanta as u64 - 1, ell as u64);
        let rest = (quanta - 1 - ell) as i32;
        let integral = self.marginal.expect(
            self.model,
            |_, phi| phi.powi(ell as i32) * (1.0 - phi).powi(rest),
            self.tol,
        );
        Ok(coeff * integral)
    }

    /// `ΔΓ̄_{M,ℓ} = C(M,ℓ+1) Σ_r (-1)^r C(M-ℓ-1,r) (ℓ+r+1) E[φ^{r+ℓ}]`
    pub fn delta_gamma(&self, quanta: usize, ell: usize) -> Result<f64> {
        check_ell(quanta, ell, false)?;
        let n = (quanta - ell - 1) as u64;
        let terms: Vec<f64> = (0..=n)
            .map(|r| {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                sign * choose(n, r)
                    * (ell as u64 + r + 1) as f64
                    * self.phi_moment(ell + r as usize)
            })
            .collect();
        Ok(choose(quanta as u64, ell as u64 + 1) * terms.iter().sum::<f64>())
    }

    /// `H↑(T) = Σ_{ℓ=1}^{M-1} ΔΓ̄_{M,ℓ} ln (ℓ+1)!`
    pub fn h_up(&self, quanta: usize) -> Result<f64> {
        if quanta == 0 {
            return Err(crate::error::invalid("M", "need at least one quantum"));
        }
        (1..quanta).try_fold(0.0, |acc, ell| {
            Ok(acc + self.delta_gamma(quanta, ell)? * ln_factorial(ell as u64 + 1))
        })
    }
}

fn check_ell(quanta: usize, ell: usize, allow_top: bool) -> Result<()> {
    let top = if allow_top {
        quanta
    } else {
        quanta.saturating_sub(1)
    };
    if ell == 0 || ell > top {
        return Err(Error::IndexOutOfRange(format!(
            "ℓ = {ell} outside 1..={top} for M = {quanta}"
        )));
    }
    Ok(())
}

pub fn theta_bar_iid(
    marginal: &EmissionMarginal,
    model: &FirstPassageModel,
    quanta: usize,
    m: usize,
    ell: usize,
) -> Result<f64> {
    IidEmissionBounds::new(marginal, model).theta_bar(quanta, m, ell)
}

pub fn gamma_bar(
    marginal: &EmissionMarginal,
    model: &FirstPassageModel,
    quanta: usize,
    ell: usize,
) -> Result<f64> {
    IidEmissionBounds::new(marginal, model).gamma_bar(quanta, ell)
}

pub fn delta_gamma_general(
    marginal: &EmissionMarginal,
    model: &FirstPassageModel,
    quanta: usize,
    ell: usize,
) -> Result<f64> {
    IidEmissionBounds::new(marginal, model).delta_gamma(quanta, ell)
}

pub fn h_up(marginal: &EmissionMarginal, model: &FirstPassageModel, quanta: usize) -> Result<f64> {
    IidEmissionBounds::new(marginal, model).h_up(quanta)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;

    use super::*;
    use crate::distributions::DeadlineInputDensity;

    fn exp1() -> FirstPassageModel {
        FirstPassageModel::exponential(1.0).unwrap()
    }

    #[test]
    fn index_checks() {
        let marg = EmissionMarginal::uniform(0.0, 1.0).unwrap();
        let model = exp1();
        let b = IidEmissionBounds::new(&marg, &model);
        assert!(b.theta_bar(4, 2, 0).is_err());
        assert!(b.theta_bar(4, 4, 1).is_err());
        assert!(b.theta_bar(4, 1, 2).is_err());
        assert!(b.gamma_bar(4, 0).is_err());
        assert_eq!(b.gamma_bar(4, 4).unwrap(), 0.0);
        assert!(b.delta_gamma(4, 4).is_err());
        assert_eq!(b.h_up(1).unwrap(), 0.0);
    }

    #[test]
    fn two_quanta_reduce_to_first_moment() {
        let d = DeadlineInputDensity::from_lambda_tau(E).unwrap();
        let marg = d.marginal();
        let model = exp1();
        let b = IidEmissionBounds::new(&marg, &model);
        let theta = b.theta_bar(2, 1, 1).unwrap();
        assert!((theta - 2.0 * d.expected_phi_pow(1)).abs() < 1e-9);
        // M = 2: ΔΓ̄_{2,1} = Γ̄_{2,1} = 2 E[φ]
        let dg = b.delta_gamma(2, 1).unwrap();
        assert!((dg - theta).abs() < 1e-12);
    }

    #[test]
    fn consolidation_and_differences() {
        let model = FirstPassageModel::weibull(1.0, 2.0).unwrap();
        for marg in [
            DeadlineInputDensity::from_lambda_tau(1.0)
                .unwrap()
                .marginal(),
            EmissionMarginal::uniform(0.0, 2.0).unwrap(),
        ] {
            let b = IidEmissionBounds::new(&marg, &model);
            let quanta = 6;
            for ell in 1..quanta {
                let direct: f64 = (ell..quanta)
                    .map(|m| b.theta_bar(quanta, m, ell).unwrap())
                    .sum();
                let gamma = b.gamma_bar(quanta, ell).unwrap();
                assert!(
                    (direct - gamma).abs() < 1e-8,
                    "ℓ={ell}: {direct} vs {gamma}"
                );
            }
            for quanta in 2..=10 {
                let mut telescoped = 0.0;
                for ell in 1..quanta {
                    let diff =
                        b.gamma_bar(quanta, ell).unwrap() - b.gamma_bar(quanta, ell + 1).unwrap();
                    let dg = b.delta_gamma(quanta, ell).unwrap();
                    assert!(
                        (diff - dg).abs() < 1e-8,
                        "M={quanta} ℓ={ell}: {diff} vs {dg}"
                    );
                    telescoped += dg;
                }
                assert!((telescoped - b.gamma_bar(quanta, 1).unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn last_gamma_is_single_term() {
        let d = DeadlineInputDensity::from_lambda_tau(2.0).unwrap();
        let marg = d.marginal();
        let model = exp1();
        let b = IidEmissionBounds::new(&marg, &model);
        for quanta in 2..8usize {
            let g = b.gamma_bar(quanta, quanta - 1).unwrap();
            let expect = quanta as f64 * d.expected_phi_pow(quanta as u32 - 1);
            assert!((g - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_marginal_hits_log_factorial() {
        let marg = EmissionMarginal::point(0.0).unwrap();
        let model = FirstPassageModel::weibull(1.0, 2.0).unwrap();
        for quanta in 1..=8usize {
            let h = h_up(&marg, &model, quanta).unwrap();
            assert!(
                (h - ln_factorial(quanta as u64)).abs() < 1e-10,
                "M={quanta}: {h}"
            );
        }
    }
}
