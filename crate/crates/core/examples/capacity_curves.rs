// Per-quantum and per-time capacity lower bounds over `χ = λ/ρ`, and the
// finite-`M` bound closing in on the series limit.

use quanta_timing::bounds::{cq_finite, cq_series, BoundPoint, SeriesBound};
use quanta_timing::cli::log_grid;

pub fn run_example() -> quanta_timing::Result<()> {
    let rate = 1.0;
    println!("   χ        cq_simple  cq_series  ct_simple  ct_series");
    for chi in log_grid(0.25, 32.0, 12)? {
        let simple = chi.ln().max(0.0);
        let series = BoundPoint::series(chi, rate)?;
        println!(
            "{chi:8.4}  {simple:9.5}  {:9.5}  {:9.5}  {:9.5}",
            series.cq,
            rate / chi * simple,
            series.ct
        );
    }

    let SeriesBound {
        raw: limit, terms, ..
    } = cq_series(2.0, 1e-12)?;
    println!("χ = 2 series limit {limit:.8} ({terms} terms)");
    for k in (0..=14).step_by(2) {
        let m = 1usize << k;
        let v = cq_finite(m, 2.0)?;
        println!("  M = {m:6}: cq_finite = {v:.8}, gap {:.2e}", limit - v);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> quanta_timing::Result<()> {
    run_example()
}
