//! Reference computations written without the library's numerics.
#![allow(dead_code)]

use std::f64::consts::E;

/// `ln n!` as a plain sum of logs.
pub fn ln_fact(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn ln_binom(n: usize, k: usize) -> f64 {
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

pub fn binom_pmf(n: usize, k: usize, p: f64) -> f64 {
    (ln_binom(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// Count admissible matchings by walking all `M!` permutations (Heap's
/// algorithm), with no pruning.
pub fn brute_force_count(t: &[f64], s: &[f64]) -> u64 {
    let n = t.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let admissible = |p: &[usize]| p.iter().zip(t).all(|(&j, &tm)| s[j] >= tm);
    let mut count = u64::from(admissible(&perm));
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            count += u64::from(admissible(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    count
}

/// `H_e = Σ_{k=2}^{M} ΔΓ̄_{M,k-1} ln k!` straight from the two-binomial form,
/// summing every `k`.
pub fn h_e(quanta: usize, lambda_tau: f64) -> f64 {
    let p2 = 1.0 / (E + lambda_tau);
    let p1 = E * p2;
    (2..=quanta)
        .map(|k| {
            let w = lambda_tau / (1.0 - p2) * (k as f64 - quanta as f64 * p2);
            let dg = binom_pmf(quanta, k, p1) + w * binom_pmf(quanta, k, p2);
            dg * ln_fact(k)
        })
        .sum()
}

/// `ΔΓ̄_{M,k-1}` for the deadline density.
pub fn delta_gamma(quanta: usize, lambda_tau: f64, k: usize) -> f64 {
    let p2 = 1.0 / (E + lambda_tau);
    let p1 = E * p2;
    let w = lambda_tau / (1.0 - p2) * (k as f64 - quanta as f64 * p2);
    binom_pmf(quanta, k, p1) + w * binom_pmf(quanta, k, p2)
}

/// Series bound summed in plain floating point over 170 terms.
pub fn series(chi: f64) -> f64 {
    let mut fact = 1.0_f64;
    let mut sum = 0.0;
    for k in 2..171 {
        let kf = k as f64;
        fact *= kf;
        sum += chi.powf(-kf) * (kf * chi - 1.0) * fact.ln() / fact;
    }
    chi.ln() + (-1.0 / chi).exp() * sum
}
