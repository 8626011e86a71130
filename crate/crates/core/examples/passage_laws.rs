// The deadline emission density and its in-flight probability `φ`, for
// exponential passage, checked against a quadrature of the general mixed
// marginal and against a Weibull law with the same mean.

use quanta_timing::quadrature::Tolerance;
use quanta_timing::{DeadlineInputDensity, FirstPassageModel};

pub fn run_example() -> quanta_timing::Result<()> {
    let density = DeadlineInputDensity::new(2.0, 1.5)?;
    println!(
        "λτ = {}: p(0) = {:.4}, p(uniform) = {:.4}, p(τ) = {:.4}",
        density.lambda_tau(),
        density.p_start(),
        density.p_uniform(),
        density.p_deadline()
    );

    let exp = FirstPassageModel::exponential(2.0)?;
    let marginal = density.marginal();
    println!("   t      φ closed     φ quadrature");
    for &t in &[0.25, 0.75, 1.4, 1.6, 2.5] {
        let quad = marginal.phi_left(&exp, t, Tolerance::TIGHT);
        println!("{t:5.2}  {:.10}  {quad:.10}", density.phi(t));
    }
    for k in 1..=3 {
        println!(
            "E[φ^{k}] = {:.10} (closed) {:.10} (quadrature)",
            density.expected_phi_pow(k),
            marginal.expected_phi_pow(&exp, k, Tolerance::TIGHT)
        );
    }

    let weibull = FirstPassageModel::weibull(2.0, 2.0)?;
    println!(
        "means: exponential {:.6}, weibull {:.6} (quadrature {:.6})",
        exp.mean(),
        weibull.mean(),
        weibull.mean_by_quadrature()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> quanta_timing::Result<()> {
    run_example()
}
