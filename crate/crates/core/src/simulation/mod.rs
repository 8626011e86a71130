//! Monte Carlo channel realizations and the estimators that cross-check the
//! analytic module.
//!
//! Every estimator splits its `n` samples over [`CHUNKS`] fixed chunks. Chunk
//! `c` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, chunks run
//! under rayon, and the per-chunk Welford accumulators are merged pairwise in
//! chunk order. Reports are therefore bit-identical for a given seed no
//! matter how many worker threads exist.

mod epoch;
mod estimators;
mod mi;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{EmissionSource, FirstPassageModel};
use crate::error::{invalid, Result};
use crate::permutation::{lex_rank, EXACT_COUNT_CAP};

pub use epoch::{
    epoch_feasibility, estimate_epoch_containment, EpochConfig, EpochDiagnostics, EpochVerdict,
};
pub use estimators::{
    compare_h_omega_to_log_count, conditional_log_density, estimate_h_omega, estimate_log_count,
    estimate_sorted_sum_gap, OrderingEntropyComparison,
};
pub use mi::{
    estimate_mi_decomposition, ordered_pair_entropy, MiDecomposition, MI_BINS, MI_TOLERANCE,
};

/// Number of independent random streams per estimate.
pub const CHUNKS: usize = 64;

/// One realization of the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelUseSample {
    pub t: Vec<f64>,
    pub d: Vec<f64>,
    /// `s[m] = t[m] + d[m]`
    pub s: Vec<f64>,
    /// Strictly increasing.
    pub s_sorted: Vec<f64>,
    /// `s_sorted[i] = s[order[i]]`
    pub order: Vec<usize>,
    /// Lexicographic rank of `order`; `None` above [`EXACT_COUNT_CAP`] quanta.
    pub omega: Option<u64>,
}

/// Draw emissions, then passage times; passage times are redrawn on the
/// zero-probability event of two identical arrivals.
pub fn simulate_channel_use<E, R>(
    density: &E,
    model: &FirstPassageModel,
    quanta: usize,
    rng: &mut R,
) -> Result<ChannelUseSample>
where
    E: EmissionSource + ?Sized,
    R: Rng + ?Sized,
{
    if quanta == 0 {
        return Err(invalid("M", "need at least one quantum"));
    }
    let t: Vec<f64> = (0..quanta).map(|_| density.sample_time(rng)).collect();
    loop {
        let d: Vec<f64> = (0..quanta).map(|_| model.sample_passage(rng)).collect();
        let s: Vec<f64> = t.iter().zip(&d).map(|(a, b)| a + b).collect();
        let mut order: Vec<usize> = (0..quanta).collect();
        order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
        let s_sorted: Vec<f64> = order.iter().map(|&i| s[i]).collect();
        if s_sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let omega = (quanta <= EXACT_COUNT_CAP).then(|| lex_rank(&order));
        return Ok(ChannelUseSample {
            t,
            d,
            s,
            s_sorted,
            order,
            omega,
        });
    }
}

/// Mean of a scalar statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl EstimateReport {
    /// `|mean - target| / stderr`, infinite when the spread is zero but the
    /// mean is off.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }

    /// `|mean - target| ≤ k·stderr`, with a small absolute floor for
    /// statistics that are constant across samples.
    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + 1e-12 * target.abs().max(1.0)
    }
}

/// Streaming mean/variance (Welford) with extremes, mergeable with Chan's
/// update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for Welford {
    fn default() -> Self {
        Welford {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Welford) -> Welford {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Welford {
            n,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * w,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn report(&self, seed: u64) -> EstimateReport {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        EstimateReport {
            mean: self.mean,
            stderr: (var / self.n.max(1) as f64).sqrt(),
            n: self.n,
            seed,
        }
    }
}

/// Generator for chunk `chunk` of root `seed`.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Sample counts per chunk, larger chunks first.
fn chunk_sizes(n: usize) -> Vec<usize> {
    (0..CHUNKS)
        .map(|c| n / CHUNKS + usize::from(c < n % CHUNKS))
        .collect()
}

fn reduce_pairwise<T: Clone, F: Fn(&T, &T) -> T + Copy>(items: &[T], merge: F) -> T {
    match items.len() {
        1 => items[0].clone(),
        len => {
            let (a, b) = items.split_at(len / 2);
            merge(&reduce_pairwise(a, merge), &reduce_pairwise(b, merge))
        }
    }
}

/// Run `n` samples of a `K`-vector statistic and return one accumulator per
/// component.
pub fn monte_carlo<const K: usize, F>(n: usize, seed: u64, sample: F) -> Result<[Welford; K]>
where
    F: Fn(&mut ChaCha8Rng) -> Result<[f64; K]> + Sync,
{
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    let per_chunk: Vec<[Welford; K]> = chunk_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(c, size)| {
            let mut rng = chunk_rng(seed, c);
            let mut acc = [Welford::default(); K];
            for _ in 0..size {
                let xs = sample(&mut rng)?;
                for (a, x) in acc.iter_mut().zip(xs) {
                    a.push(x);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(reduce_pairwise(&per_chunk, |a, b| {
        std::array::from_fn(|k| a[k].merge(&b[k]))
    }))
}

/// Scalar form of [`monte_carlo`].
pub fn monte_carlo_mean<F>(n: usize, seed: u64, sample: F) -> Result<EstimateReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let [acc] = monte_carlo(n, seed, |rng| Ok([sample(rng)?]))?;
    Ok(acc.report(seed))
}

/// Collect `n` per-sample records, in chunk order, alongside the draws.
pub(crate) fn collect_samples<T, F>(n: usize, seed: u64, sample: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let chunks: Vec<Vec<T>> = chunk_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(c, size)| {
            let mut rng = chunk_rng(seed, c);
            (0..size).map(|_| sample(&mut rng)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
