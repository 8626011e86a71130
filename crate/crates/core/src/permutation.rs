//! Admissible matchings between emissions and ordered arrivals.
//!
//! A permutation `π` assigns arrival `s[π(m)]` to emission `t[m]`; it is
//! admissible when every assigned arrival is no earlier than its emission
//! (`s = t` counts as admissible). Permutations are listed and ranked in
//! lexicographic order of the sequence `π(0), π(1), …`.

use crate::distributions::FirstPassageModel;
use crate::error::{Error, Result};
use crate::special::{log_sum_exp, shannon_entropy};

/// Exhaustive enumeration is limited to `8! = 40320` permutations.
pub const ENUMERATION_CAP: usize = 8;

/// Largest `M` whose factorial fits the exact counter.
pub const EXACT_COUNT_CAP: usize = 20;

/// Number of admissible permutations, kept exactly while it fits and always
/// in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleCount {
    pub exact: Option<u128>,
    pub ln: f64,
}

impl AdmissibleCount {
    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }
}

/// Arrival counts per emission bin `[t_k, t_{k+1})`, with `t_{M+1} = ∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinOccupancy {
    /// Arrivals strictly before the first emission.
    early: usize,
    sigma: Vec<usize>,
    /// `eta[m]` = arrivals before `t_{m+1}`, for `m = 0..=M`.
    eta: Vec<usize>,
}

impl BinOccupancy {
    /// Both slices must be sorted ascending.
    pub fn from_sorted(t: &[f64], s: &[f64]) -> Result<Self> {
        check_lengths(t, s)?;
        let quanta = t.len();
        let mut sigma = vec![0usize; quanta];
        let mut early = 0;
        let mut bin = 0usize;
        for &x in s {
            if x < t[0] {
                early += 1;
                continue;
            }
            while bin + 1 < quanta && x >= t[bin + 1] {
                bin += 1;
            }
            sigma[bin] += 1;
        }
        let mut eta = Vec::with_capacity(quanta + 1);
        eta.push(early);
        let mut acc = early;
        for &c in &sigma {
            acc += c;
            eta.push(acc);
        }
        Ok(BinOccupancy { early, sigma, eta })
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn eta(&self) -> &[usize] {
        &self.eta
    }

    /// No arrival precedes every candidate emission: `η_m ≤ m` for all `m`.
    pub fn is_admissible(&self) -> bool {
        self.eta.iter().enumerate().all(|(m, &e)| e <= m)
    }

    /// `Π_{m=1}^{M-1} (m + 1 - η_m)`, zero when inadmissible.
    pub fn count(&self) -> AdmissibleCount {
        if !self.is_admissible() {
            return AdmissibleCount {
                exact: Some(0),
                ln: f64::NEG_INFINITY,
            };
        }
        let quanta = self.sigma.len();
        let mut exact: Option<u128> = Some(1);
        let mut ln = 0.0;
        for m in 1..quanta {
            let factor = (m + 1 - self.eta[m]) as u128;
            exact = exact.and_then(|e| e.checked_mul(factor));
            ln += (factor as f64).ln();
        }
        if quanta > EXACT_COUNT_CAP {
            exact = None;
        }
        AdmissibleCount { exact, ln }
    }
}

fn check_lengths(t: &[f64], s: &[f64]) -> Result<()> {
    if t.len() != s.len() {
        return Err(Error::LengthMismatch {
            emissions: t.len(),
            arrivals: s.len(),
        });
    }
    if t.is_empty() {
        return Err(crate::error::invalid("M", "need at least one quantum"));
    }
    Ok(())
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(f64::total_cmp);
    out
}

/// Count admissible permutations with the bin-occupancy product formula.
///
/// The count is invariant under reordering of either vector, so inputs are
/// sorted internally.
pub fn count_admissible(t: &[f64], s: &[f64]) -> Result<AdmissibleCount> {
    check_lengths(t, s)?;
    Ok(BinOccupancy::from_sorted(&sorted(t), &sorted(s))?.count())
}

/// Every admissible permutation, in lexicographic order.
pub fn enumerate_admissible(t: &[f64], s: &[f64]) -> Result<Vec<Vec<usize>>> {
    check_lengths(t, s)?;
    if t.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            cap: ENUMERATION_CAP,
            got: t.len(),
        });
    }
    let quanta = t.len();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(quanta);
    let mut used = vec![false; quanta];
    extend(t, s, &mut used, &mut current, &mut out);
    Ok(out)
}

fn extend(
    t: &[f64],
    s: &[f64],
    used: &mut [bool],
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let m = current.len();
    if m == t.len() {
        out.push(current.clone());
        return;
    }
    for j in 0..s.len() {
        if !used[j] && s[j] >= t[m] {
            used[j] = true;
            current.push(j);
            extend(t, s, used, current, out);
            current.pop();
            used[j] = false;
        }
    }
}

/// Lexicographic rank of a permutation of `0..n` (Lehmer code), `n ≤ 20`.
pub fn lex_rank(perm: &[usize]) -> u64 {
    let n = perm.len();
    let mut factorial = vec![1u64; n.max(1)];
    for i in 1..n {
        factorial[i] = factorial[i - 1] * i as u64;
    }
    let mut rank = 0u64;
    for (i, &p) in perm.iter().enumerate() {
        let smaller_later = perm[i + 1..].iter().filter(|&&q| q < p).count() as u64;
        rank += smaller_later * factorial[n - 1 - i];
    }
    rank
}

/// Conditional pmf of the sorting permutation given `(t, s⃗)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationPmf {
    /// Lexicographic ranks of the permutations with nonzero probability.
    pub support: Vec<u64>,
    pub permutations: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

impl PermutationPmf {
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }
}

/// `Prob(π | s⃗, t) ∝ Π_m g(s[π(m)] - t[m])` over admissible `π`.
pub fn perm_pmf(model: &FirstPassageModel, t: &[f64], s_sorted: &[f64]) -> Result<PermutationPmf> {
    let candidates = enumerate_admissible(t, s_sorted)?;
    let log_weights: Vec<f64> = candidates
        .iter()
        .map(|perm| {
            perm.iter()
                .zip(t)
                .map(|(&j, &tm)| model.log_density(s_sorted[j] - tm))
                .sum()
        })
        .collect();
    let norm = log_sum_exp(&log_weights);
    if !norm.is_finite() {
        return Err(Error::Inadmissible);
    }
    let mut support = Vec::new();
    let mut permutations = Vec::new();
    let mut probs = Vec::new();
    for (perm, lw) in candidates.into_iter().zip(log_weights) {
        let p = (lw - norm).exp();
        if p > 0.0 {
            support.push(lex_rank(&perm));
            permutations.push(perm);
            probs.push(p);
        }
    }
    Ok(PermutationPmf {
        support,
        permutations,
        probs,
    })
}

/// `H(Ω | s⃗, t)` by exhaustive enumeration of the pmf.
pub fn perm_entropy_enumerated(
    model: &FirstPassageModel,
    t: &[f64],
    s_sorted: &[f64],
) -> Result<f64> {
    Ok(perm_pmf(model, t, s_sorted)?.entropy())
}

/// `H(Ω | s⃗, t)` in nats.
///
/// Under memoryless passage the pmf is uniform on the admissible set, so the
/// entropy is `ln |Ω|` and no enumeration (or size cap) is needed.
pub fn perm_entropy(model: &FirstPassageModel, t: &[f64], s_sorted: &[f64]) -> Result<f64> {
    if model.is_memoryless() {
        let count = count_admissible(t, s_sorted)?;
        if count.is_zero() {
            return Err(Error::Inadmissible);
        }
        return Ok(count.ln);
    }
    perm_entropy_enumerated(model, t, s_sorted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp1() -> FirstPassageModel {
        FirstPassageModel::exponential(1.0).unwrap()
    }

    #[test]
    fn single_quantum() {
        let c = count_admissible(&[0.0], &[0.5]).unwrap();
        assert_eq!(c.exact, Some(1));
        let pmf = perm_pmf(&exp1(), &[0.0], &[0.5]).unwrap();
        assert_eq!(pmf.probs, vec![1.0]);
        assert_eq!(perm_entropy(&exp1(), &[0.0], &[0.5]).unwrap(), 0.0);
    }

    #[test]
    fn identical_emissions_admit_everything() {
        let t = [0.0; 3];
        let s = [0.2, 0.9, 1.4];
        assert_eq!(count_admissible(&t, &s).unwrap().exact, Some(6));
        assert_eq!(enumerate_admissible(&t, &s).unwrap().len(), 6);
        let h = perm_entropy_enumerated(&exp1(), &t, &s).unwrap();
        assert!((h - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn staggered_emissions_force_identity() {
        let t = [0.0, 1.0, 2.0];
        let s = [0.5, 1.5, 2.5];
        assert_eq!(count_admissible(&t, &s).unwrap().exact, Some(1));
        assert_eq!(enumerate_admissible(&t, &s).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn two_quanta_cases() {
        let both = enumerate_admissible(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_eq!(both, vec![vec![0, 1], vec![1, 0]]);
        // No arrival reaches the emission at 3.
        let none = enumerate_admissible(&[0.0, 3.0], &[1.0, 2.0]).unwrap();
        assert!(none.is_empty());
        assert!(count_admissible(&[0.0, 3.0], &[1.0, 2.0])
            .unwrap()
            .is_zero());
        assert!(matches!(
            perm_pmf(&exp1(), &[0.0, 3.0], &[1.0, 2.0]),
            Err(Error::Inadmissible)
        ));
    }

    #[test]
    fn arrival_equal_to_emission_is_admissible() {
        assert_eq!(count_admissible(&[1.0], &[1.0]).unwrap().exact, Some(1));
        assert_eq!(
            count_admissible(&[0.0, 1.0], &[1.0, 1.0]).unwrap().exact,
            Some(2)
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            count_admissible(&[0.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        let t = vec![0.0; 9];
        let s = vec![1.0; 9];
        assert!(matches!(
            enumerate_admissible(&t, &s),
            Err(Error::EnumerationCap { cap: 8, got: 9 })
        ));
        // The product formula has no cap.
        assert_eq!(count_admissible(&t, &s).unwrap().exact, Some(362_880));
    }

    #[test]
    fn large_counts_stay_in_log_space() {
        let t = vec![0.0; 40];
        let s: Vec<f64> = (1..=40).map(f64::from).collect();
        let c = count_admissible(&t, &s).unwrap();
        assert_eq!(c.exact, None);
        assert!((c.ln - crate::special::ln_factorial(40)).abs() < 1e-9);
    }

    #[test]
    fn lex_ranks() {
        assert_eq!(lex_rank(&[0, 1, 2]), 0);
        assert_eq!(lex_rank(&[0, 2, 1]), 1);
        assert_eq!(lex_rank(&[2, 1, 0]), 5);
        let all = enumerate_admissible(&[0.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let ranks: Vec<u64> = all.iter().map(|p| lex_rank(p)).collect();
        assert_eq!(ranks, (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn weibull_pmf_matches_hand_products() {
        let w = FirstPassageModel::weibull(1.0, 2.0).unwrap();
        let t = [0.0, 0.5];
        let s = [1.0, 2.0];
        let pmf = perm_pmf(&w, &t, &s).unwrap();
        let a = w.density(1.0) * w.density(1.5);
        let b = w.density(2.0) * w.density(0.5);
        assert_eq!(pmf.support, vec![0, 1]);
        assert!((pmf.probs[0] - a / (a + b)).abs() < 1e-12);
        assert!((pmf.probs[1] - b / (a + b)).abs() < 1e-12);
        let h = pmf.entropy();
        assert!(h < 2f64.ln());
    }

    fn random_instance(rng: &mut ChaCha8Rng, quanta: usize) -> (Vec<f64>, Vec<f64>) {
        let spread = rng.random_range(0.1..4.0);
        let mut t: Vec<f64> = (0..quanta).map(|_| rng.random::<f64>() * spread).collect();
        let mut s: Vec<f64> = if rng.random_bool(0.8) {
            t.iter().map(|&x| x - rng.random::<f64>().ln()).collect()
        } else {
            (0..quanta)
                .map(|_| rng.random::<f64>() * (spread + 1.0))
                .collect()
        };
        t.sort_by(f64::total_cmp);
        s.sort_by(f64::total_cmp);
        (t, s)
    }

    #[test]
    fn count_is_order_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let (t, s) = random_instance(&mut rng, 6);
            let base = count_admissible(&t, &s).unwrap();
            let mut ts = t.clone();
            let mut ss = s.clone();
            ts.shuffle(&mut rng);
            ss.shuffle(&mut rng);
            assert_eq!(count_admissible(&ts, &ss).unwrap(), base);
            assert_eq!(
                enumerate_admissible(&ts, &ss).unwrap().len() as u128,
                base.exact.unwrap()
            );
        }
    }

    proptest! {
        #[test]
        fn product_formula_matches_enumeration(seed in any::<u64>(), quanta in 2usize..=7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (t, s) = random_instance(&mut rng, quanta);
            let c = count_admissible(&t, &s).unwrap();
            let listed = enumerate_admissible(&t, &s).unwrap();
            prop_assert_eq!(c.exact.unwrap(), listed.len() as u128);
        }

        #[test]
        fn entropy_bounded_by_log_count(seed in any::<u64>(), quanta in 2usize..=6, shape in 0.6f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..quanta).map(|_| rng.random::<f64>()).collect();
            let w = FirstPassageModel::weibull(1.0, shape).unwrap();
            let mut s: Vec<f64> = t.iter().map(|&x| x + w.sample_passage(&mut rng)).collect();
            s.sort_by(f64::total_cmp);
            let count = count_admissible(&t, &s).unwrap();
            let h = perm_entropy(&w, &t, &s).unwrap();
            prop_assert!(h >= -1e-15);
            prop_assert!(h <= count.ln + 1e-12);
            prop_assert!(count.ln <= crate::special::ln_factorial(quanta as u64) + 1e-12);

            let pmf = perm_pmf(&exp1(), &t, &s).unwrap();
            let max = pmf.probs.iter().copied().fold(0.0, f64::max);
            let min = pmf.probs.iter().copied().fold(1.0, f64::min);
            prop_assert!(max - min < 1e-12);
            prop_assert!((pmf.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
