// `H(Ω | S⃗, T)` for the deadline density: closed form, the generic
// quadrature route, and Monte Carlo.

use quanta_timing::bounds::{h_omega_exponential, IidEmissionBounds};
use quanta_timing::simulation::{estimate_h_omega, estimate_log_count};
use quanta_timing::special::ln_factorial;
use quanta_timing::{DeadlineInputDensity, FirstPassageModel};

pub fn run_example() -> quanta_timing::Result<()> {
    let exp = FirstPassageModel::exponential(1.0)?;
    let weibull = FirstPassageModel::weibull(1.0, 2.0)?;
    let lambda_tau = std::f64::consts::E;
    let density = DeadlineInputDensity::from_lambda_tau(lambda_tau)?;
    let marginal = density.marginal();

    println!(" M   closed      quadrature  MC (±stderr)          ln M!");
    for quanta in [2usize, 4, 6, 8] {
        let closed = h_omega_exponential(quanta, lambda_tau)?;
        let generic = IidEmissionBounds::new(&marginal, &exp).h_up(quanta)?;
        let mc = estimate_h_omega(&density, &exp, quanta, 20_000, 7)?;
        println!(
            "{quanta:2}   {closed:.6}   {generic:.6}    {:.6} ± {:.6}   {:.4}",
            mc.mean,
            mc.stderr,
            ln_factorial(quanta as u64)
        );
    }

    println!("Weibull(k=2): upper bound vs mean log count vs entropy");
    for quanta in [2usize, 4, 6] {
        let up = IidEmissionBounds::new(&marginal, &weibull).h_up(quanta)?;
        let count = estimate_log_count(&marginal, &weibull, quanta, 20_000, 8)?;
        let h = estimate_h_omega(&marginal, &weibull, quanta, 20_000, 8)?;
        println!(
            "{quanta:2}   H↑ = {up:.6}   E ln|Ω| = {:.6}   H = {:.6}",
            count.mean, h.mean
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> quanta_timing::Result<()> {
    run_example()
}
