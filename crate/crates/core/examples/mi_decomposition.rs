// Both sides of the sorting-loss decomposition at two quanta.

use quanta_timing::simulation::estimate_mi_decomposition;
use quanta_timing::{DeadlineInputDensity, FirstPassageModel};

pub fn run_example() -> quanta_timing::Result<()> {
    let exp = FirstPassageModel::exponential(1.0)?;
    for &lambda_tau in &[0.5, std::f64::consts::E, 10.0] {
        let density = DeadlineInputDensity::from_lambda_tau(lambda_tau)?;
        let r = estimate_mi_decomposition(&density, &exp, 2, 200_000, 11)?;
        println!(
            "λτ = {lambda_tau:.3}: ĥ(S⃗) = {:.4} (exact {:.4}), I(S⃗;T) ≈ {:.4}, \
             I(S;T) - ln 2 + H_e = {:.4}, gap {:.4}",
            r.h_ordered, r.h_ordered_closed_form, r.lhs, r.rhs_closed_form, r.gap
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> quanta_timing::Result<()> {
    run_example()
}
