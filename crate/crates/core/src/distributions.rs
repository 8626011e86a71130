//! Passage-time laws, the deadline-constrained emission density, and the
//! mixed-measure expectations built on them.
//!
//! Emission marginals may carry atoms. Any expectation of a function of
//! `(F_T, φ)` over an atom of mass `p` at `x` is taken in the narrow-uniform
//! limit: both `F_T` and `φ` rise linearly by `p` across the atom, so the atom
//! contributes `p ∫₀¹ h(F(x⁻) + p u, φ(x⁻) + p u) du`. For the deadline
//! density this reproduces `∫ δ(t) uᵏ(t) dt = 1/(k+1)`.

use std::f64::consts::E;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::special::choose;

/// A univariate law with a density and CDF.
pub trait UnivariateLaw {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
}

/// Anything that can produce i.i.d. emission times.
pub trait EmissionSource: Sync {
    fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

/// Draw `u ∈ (0, 1]`.
pub(crate) fn open_closed_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

// ---------------------------------------------------------------------------
// First passage
// ---------------------------------------------------------------------------

/// First-passage law `g` with mean `1/λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FirstPassageModel {
    Exponential {
        rate: f64,
    },
    /// `Ḡ(x) = exp(-(x/θ)^k)` with `θ = 1 / (λ Γ(1 + 1/k))`.
    Weibull {
        rate: f64,
        shape: f64,
    },
}

impl FirstPassageModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        ensure_positive("rate", rate)?;
        Ok(FirstPassageModel::Exponential { rate })
    }

    pub fn weibull(rate: f64, shape: f64) -> Result<Self> {
        ensure_positive("rate", rate)?;
        ensure_positive("shape", shape)?;
        Ok(FirstPassageModel::Weibull { rate, shape })
    }

    pub fn rate(&self) -> f64 {
        match *self {
            FirstPassageModel::Exponential { rate } | FirstPassageModel::Weibull { rate, .. } => {
                rate
            }
        }
    }

    /// Exponential passage is the only law whose conditional permutation pmf
    /// is uniform on the admissible set.
    pub fn is_memoryless(&self) -> bool {
        match *self {
            FirstPassageModel::Exponential { .. } => true,
            FirstPassageModel::Weibull { shape, .. } => shape == 1.0,
        }
    }

    fn weibull_scale(rate: f64, shape: f64) -> f64 {
        1.0 / (rate * libm::tgamma(1.0 + 1.0 / shape))
    }

    pub fn density(&self, d: f64) -> f64 {
        if d < 0.0 {
            return 0.0;
        }
        match *self {
            FirstPassageModel::Exponential { rate } => rate * (-rate * d).exp(),
            FirstPassageModel::Weibull { rate, shape } => {
                let scale = Self::weibull_scale(rate, shape);
                let z = d / scale;
                if z == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
        }
    }

    /// `ln g(d)`; `-inf` outside the support.
    pub fn log_density(&self, d: f64) -> f64 {
        if d < 0.0 {
            return f64::NEG_INFINITY;
        }
        match *self {
            FirstPassageModel::Exponential { rate } => rate.ln() - rate * d,
            FirstPassageModel::Weibull { .. } => self.density(d).ln(),
        }
    }

    pub fn cdf(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        match *self {
            FirstPassageModel::Exponential { rate } => -(-rate * d).exp_m1(),
            FirstPassageModel::Weibull { rate, shape } => {
                let z = d / Self::weibull_scale(rate, shape);
                -(-z.powf(shape)).exp_m1()
            }
        }
    }

    /// `Ḡ(d) = 1 - G(d)`
    pub fn ccdf(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 1.0;
        }
        match *self {
            FirstPassageModel::Exponential { rate } => (-rate * d).exp(),
            FirstPassageModel::Weibull { rate, shape } => {
                let z = d / Self::weibull_scale(rate, shape);
                (-z.powf(shape)).exp()
            }
        }
    }

    /// Inverse CDF for `q ∈ [0, 1)`.
    pub fn quantile(&self, q: f64) -> f64 {
        let tail = -(-q).ln_1p();
        self.duration_at_log_tail(tail)
    }

    /// Inverse CCDF for `u ∈ (0, 1]`; `u = 1` maps to zero.
    pub fn inverse_ccdf(&self, u: f64) -> f64 {
        self.duration_at_log_tail(-u.ln())
    }

    fn duration_at_log_tail(&self, tail: f64) -> f64 {
        if tail <= 0.0 {
            return 0.0;
        }
        match *self {
            FirstPassageModel::Exponential { rate } => tail / rate,
            FirstPassageModel::Weibull { rate, shape } => {
                Self::weibull_scale(rate, shape) * tail.powf(1.0 / shape)
            }
        }
    }

    /// Analytic mean, `1/λ` by construction.
    pub fn mean(&self) -> f64 {
        match *self {
            FirstPassageModel::Exponential { rate } => 1.0 / rate,
            FirstPassageModel::Weibull { rate, shape } => {
                Self::weibull_scale(rate, shape) * libm::tgamma(1.0 + 1.0 / shape)
            }
        }
    }

    /// `E[D] = ∫₀^∞ Ḡ(x) dx` by quadrature.
    pub fn mean_by_quadrature(&self) -> f64 {
        quadrature::integrate_to_infinity(|x| self.ccdf(x), 0.0, Tolerance::TIGHT).value
    }

    /// `∫_lo^hi Ḡ(v) dv` by quadrature.
    pub fn integrated_ccdf(&self, lo: f64, hi: f64, tol: Tolerance) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let lo = lo.max(0.0);
        let hi = hi.max(0.0);
        quadrature::integrate(|v| self.ccdf(v), lo, hi, tol).value
    }

    /// One passage duration drawn by inverse CCDF.
    pub fn sample_passage<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_ccdf(open_closed_unit(rng))
    }
}

impl UnivariateLaw for FirstPassageModel {
    fn pdf(&self, x: f64) -> f64 {
        self.density(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        FirstPassageModel::cdf(self, x)
    }
}

/// Uniform law on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformLaw {
    pub start: f64,
    pub end: f64,
}

impl UniformLaw {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(invalid(
                "end",
                format!("need start < end, got [{start}, {end}]"),
            ));
        }
        Ok(UniformLaw { start, end })
    }
}

impl UnivariateLaw for UniformLaw {
    fn pdf(&self, x: f64) -> f64 {
        if x < self.start || x > self.end {
            0.0
        } else {
            1.0 / (self.end - self.start)
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.start) / (self.end - self.start)).clamp(0.0, 1.0)
    }
}

/// Density of the `(m+1)`-st smallest of `M` i.i.d. draws from `law`.
pub fn order_stat_density_iid<L: UnivariateLaw + ?Sized>(
    law: &L,
    quanta: usize,
    m: usize,
    t: f64,
) -> Result<f64> {
    if quanta == 0 || m >= quanta {
        return Err(Error::IndexOutOfRange(format!(
            "order index m = {m} needs 0 <= m < M = {quanta}"
        )));
    }
    let f = law.pdf(t);
    if f == 0.0 {
        return Ok(0.0);
    }
    let cdf = law.cdf(t);
    let coeff = (m + 1) as f64 * choose(quanta as u64, (m + 1) as u64);
    Ok(coeff * f * cdf.powi(m as i32) * (1.0 - cdf).powi((quanta - m - 1) as i32))
}

// ---------------------------------------------------------------------------
// Emission side
// ---------------------------------------------------------------------------

/// Which branch of the deadline density produced an emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmissionComponent {
    AtStart,
    Uniform,
    AtDeadline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionDraw {
    pub time: f64,
    pub component: EmissionComponent,
}

/// The emission density maximizing `h(S)` under exponential passage and a
/// release deadline `τ`: an atom at 0, a uniform block on `(0, τ)` and an
/// atom at `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadlineInputDensity {
    rate: f64,
    deadline: f64,
}

impl DeadlineInputDensity {
    pub fn new(rate: f64, deadline: f64) -> Result<Self> {
        ensure_positive("rate", rate)?;
        ensure_positive("deadline", deadline)?;
        Ok(DeadlineInputDensity { rate, deadline })
    }

    /// Unit passage rate, deadline `λτ`.
    pub fn from_lambda_tau(lambda_tau: f64) -> Result<Self> {
        Self::new(1.0, lambda_tau)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn lambda_tau(&self) -> f64 {
        self.rate * self.deadline
    }

    fn norm(&self) -> f64 {
        E + self.lambda_tau()
    }

    /// Atom mass at 0, `1/(e+λτ)`.
    pub fn p_start(&self) -> f64 {
        1.0 / self.norm()
    }

    /// Uniform mass on `(0, τ)`, `λτ/(e+λτ)`.
    pub fn p_uniform(&self) -> f64 {
        self.lambda_tau() / self.norm()
    }

    /// Atom mass at `τ`, `(e-1)/(e+λτ)`.
    pub fn p_deadline(&self) -> f64 {
        (E - 1.0) / self.norm()
    }

    pub fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> EmissionDraw {
        let u = rng.random::<f64>();
        if u < self.p_start() {
            EmissionDraw {
                time: 0.0,
                component: EmissionComponent::AtStart,
            }
        } else if u < self.p_start() + self.p_uniform() {
            EmissionDraw {
                time: rng.random::<f64>() * self.deadline,
                component: EmissionComponent::Uniform,
            }
        } else {
            EmissionDraw {
                time: self.deadline,
                component: EmissionComponent::AtDeadline,
            }
        }
    }

    /// `M` i.i.d. emission times.
    pub fn sample_emissions<R: Rng + ?Sized>(
        &self,
        quanta: usize,
        rng: &mut R,
    ) -> Result<EmissionSchedule> {
        if quanta == 0 {
            return Err(invalid("M", "at least one quantum is required"));
        }
        let times = (0..quanta).map(|_| self.sample_labeled(rng).time).collect();
        EmissionSchedule::new(times, self.deadline)
    }

    /// `φ(t) = ∫₀ᵗ f_T(x) e^{-λ(t-x)} dx` in closed form; it jumps by the deadline atom mass at `τ`.
    pub fn phi(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else if t <= self.deadline {
            self.p_start()
        } else {
            E * self.p_start() * (-self.rate * (t - self.deadline)).exp()
        }
    }

    /// `φ` evaluated at an emission draw under the atom convention: across
    /// an atom `φ` rises linearly from its left to its right limit, so the
    /// draw lands at a uniformly chosen point `v` of that rise.
    pub fn phi_at_draw(&self, draw: EmissionDraw, v: f64) -> f64 {
        let p = self.p_start();
        match draw.component {
            EmissionComponent::AtStart => v * p,
            EmissionComponent::Uniform => p,
            EmissionComponent::AtDeadline => p + v * (E - 1.0) * p,
        }
    }

    /// `E[φᵏ(T)] = (1/(e+λτ))^{k+1} (λτ + e^{k+1}/(k+1))`.
    pub fn expected_phi_pow(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let kp1 = f64::from(k) + 1.0;
        let p2 = self.p_start();
        let p1 = E * p2;
        p2.powf(kp1) * self.lambda_tau() + p1.powf(kp1) / kp1
    }

    /// The same law as a general mixed marginal.
    pub fn marginal(&self) -> EmissionMarginal {
        EmissionMarginal {
            atoms: vec![
                Atom {
                    at: 0.0,
                    mass: self.p_start(),
                },
                Atom {
                    at: self.deadline,
                    mass: self.p_deadline(),
                },
            ],
            continuous: Some(UniformPiece {
                start: 0.0,
                end: self.deadline,
                mass: self.p_uniform(),
            }),
        }
    }
}

impl EmissionSource for DeadlineInputDensity {
    fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_labeled(rng).time
    }
}

/// A realized emission vector with its deadline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionSchedule {
    times: Vec<f64>,
    deadline: f64,
}

impl EmissionSchedule {
    pub fn new(times: Vec<f64>, deadline: f64) -> Result<Self> {
        if let Some(bad) = times.iter().find(|&&t| !(0.0..=deadline).contains(&t)) {
            return Err(invalid(
                "times",
                format!("emission {bad} outside [0, {deadline}]"),
            ));
        }
        Ok(EmissionSchedule { times, deadline })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPiece {
    pub start: f64,
    pub end: f64,
    pub mass: f64,
}

impl UniformPiece {
    fn density(&self) -> f64 {
        self.mass / (self.end - self.start)
    }
}

/// An emission marginal made of point masses plus at most one uniform block.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMarginal {
    atoms: Vec<Atom>,
    continuous: Option<UniformPiece>,
}

impl EmissionMarginal {
    pub fn new(mut atoms: Vec<Atom>, continuous: Option<UniformPiece>) -> Result<Self> {
        atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
        if atoms.iter().any(|a| a.at < 0.0 || a.mass <= 0.0) {
            return Err(invalid("atoms", "atoms need position >= 0 and mass > 0"));
        }
        if let Some(c) = continuous {
            if !(c.start >= 0.0 && c.end > c.start && c.mass > 0.0) {
                return Err(invalid("continuous", "need 0 <= start < end, mass > 0"));
            }
        }
        let total: f64 =
            atoms.iter().map(|a| a.mass).sum::<f64>() + continuous.map_or(0.0, |c| c.mass);
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("mass", format!("total mass {total} != 1")));
        }
        Ok(EmissionMarginal { atoms, continuous })
    }

    /// Uniform on `[start, end]` with no atoms.
    pub fn uniform(start: f64, end: f64) -> Result<Self> {
        Self::new(
            Vec::new(),
            Some(UniformPiece {
                start,
                end,
                mass: 1.0,
            }),
        )
    }

    /// All mass at a single instant.
    pub fn point(at: f64) -> Result<Self> {
        Self::new(vec![Atom { at, mass: 1.0 }], None)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous(&self) -> Option<UniformPiece> {
        self.continuous
    }

    /// `P(T < x)`
    pub fn cdf_left(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.at < x).map(|a| a.mass).sum();
        atoms + self.continuous_mass_below(x)
    }

    fn continuous_mass_below(&self, x: f64) -> f64 {
        self.continuous
            .map_or(0.0, |c| ((x.min(c.end) - c.start).max(0.0)) * c.density())
    }

    /// `φ(t⁻) = ∫_{[0,t)} f_T(x) Ḡ(t-x) dx` for a general passage model.
    pub fn phi_left(&self, model: &FirstPassageModel, t: f64, tol: Tolerance) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.at < t)
            .map(|a| a.mass * model.ccdf(t - a.at))
            .sum();
        let cont = self.continuous.map_or(0.0, |c| {
            let hi = t.min(c.end);
            if hi <= c.start {
                0.0
            } else {
                // ∫_{start}^{hi} Ḡ(t - y) dy = ∫_{t-hi}^{t-start} Ḡ(v) dv
                c.density() * model.integrated_ccdf(t - hi, t - c.start, tol)
            }
        });
        atoms + cont
    }

    /// `E[h(F_T(T), φ(T))]` with the atom convention from the module docs.
    pub fn expect<H: Fn(f64, f64) -> f64>(
        &self,
        model: &FirstPassageModel,
        h: H,
        tol: Tolerance,
    ) -> f64 {
        let mut total = 0.0;
        for atom in &self.atoms {
            let f0 = self.cdf_left(atom.at);
            let phi0 = self.phi_left(model, atom.at, tol);
            let p = atom.mass;
            let part = quadrature::integrate(|u| h(f0 + p * u, phi0 + p * u), 0.0, 1.0, tol).value;
            total += p * part;
        }
        if let Some(c) = self.continuous {
            let mut cuts = vec![c.start];
            cuts.extend(
                self.atoms
                    .iter()
                    .map(|a| a.at)
                    .filter(|&x| x > c.start && x < c.end),
            );
            cuts.push(c.end);
            let density = c.density();
            for w in cuts.windows(2) {
                let part = quadrature::integrate(
                    |t| h(self.cdf_left(t), self.phi_left(model, t, tol)),
                    w[0],
                    w[1],
                    tol,
                )
                .value;
                total += density * part;
            }
        }
        total
    }

    /// `E[φᵏ(T)]` by quadrature.
    pub fn expected_phi_pow(&self, model: &FirstPassageModel, k: u32, tol: Tolerance) -> f64 {
        self.expect(model, |_, phi| phi.powi(k as i32), tol)
    }
}

impl EmissionSource for EmissionMarginal {
    fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u = rng.random::<f64>();
        for a in &self.atoms {
            if u < a.mass {
                return a.at;
            }
            u -= a.mass;
        }
        match self.continuous {
            Some(c) => c.start + rng.random::<f64>() * (c.end - c.start),
            // Rounding left `u` past the last atom.
            None => self.atoms.last().map_or(0.0, |a| a.at),
        }
    }
}
