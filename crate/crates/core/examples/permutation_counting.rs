// Count the matchings between emissions and ordered arrivals, list them,
// and compare the permutation entropy under memoryless and Weibull passage.

use quanta_timing::permutation::{count_admissible, enumerate_admissible, perm_pmf, BinOccupancy};
use quanta_timing::FirstPassageModel;

pub fn run_example() -> quanta_timing::Result<()> {
    let t = [0.0, 0.4, 0.5, 1.3];
    let s = [0.6, 0.9, 1.4, 2.2];

    let bins = BinOccupancy::from_sorted(&t, &s)?;
    let count = count_admissible(&t, &s)?;
    println!("emissions {t:?}");
    println!("arrivals  {s:?}");
    println!("eta = {:?}, |Ω| = {:?}", bins.eta(), count.exact);

    for perm in enumerate_admissible(&t, &s)? {
        println!("  {perm:?}");
    }

    for model in [
        FirstPassageModel::exponential(1.0)?,
        FirstPassageModel::weibull(1.0, 2.0)?,
    ] {
        let pmf = perm_pmf(&model, &t, &s)?;
        println!(
            "{model:?}: H(Ω|s,t) = {:.6} nats (ln |Ω| = {:.6})",
            pmf.entropy(),
            count.ln
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> quanta_timing::Result<()> {
    run_example()
}
