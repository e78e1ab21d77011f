//! Fixed-sample-size tests for the Gaussian mean and the one-sided
//! Bernoulli problem, with the sample-size bounds in terms of the
//! large-deviation exponents.
//!
//! ```bash
//! cargo run --example fsst_design
//! ```

use seqtest::{design_fsst, design_fsst_with, n_star_bounds, FsstOptions, HypothesisModel, Result};

pub fn run_example() -> Result<()> {
    let gauss = HypothesisModel::gaussian(0.5)?;
    for (alpha, beta) in [(1e-6, 1e-6), (1e-12, 1e-2)] {
        let d = design_fsst(&gauss, alpha, beta)?;
        let strict = design_fsst_with(&gauss, alpha, beta, FsstOptions { strict_cstar: true })?;
        let (by_beta, by_chernoff) = n_star_bounds(&gauss, alpha, beta)?;
        println!(
            "{gauss} alpha={alpha:e} beta={beta:e}: n*={} c*={:.4} (strict {:.4}); bounds {by_beta:.1}, {by_chernoff:.1}",
            d.n_star, d.c_star, strict.c_star
        );
        assert!(d.n_star as f64 <= by_beta.min(by_chernoff));
    }

    let bern = HypothesisModel::bernoulli(0.3, 0.7)?;
    let d = design_fsst(&bern, 1e-4, 1e-3)?;
    println!(
        "{bern} alpha=1e-4 beta=1e-3: n*={} c*={:.4}, exact errors {:.3e} / {:.3e}",
        d.n_star,
        d.c_star,
        bern.single_stage_errors(seqtest::Hypothesis::Null, d.n_star, d.c_star),
        bern.single_stage_errors(seqtest::Hypothesis::Alternative, d.n_star, d.c_star),
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
