//! The one-sided Bernoulli problem: every design works on the lattice of
//! success counts and the exact evaluation convolves binomial masses.
//!
//! ```bash
//! cargo run --example bernoulli_one_sided
//! ```

use seqtest::{
    design_fsst, design_gmt, design_mod_st, eval_exact, eval_mc, GammaRule, HypothesisModel, McConfig, Result,
    TruthParam,
};

pub fn run_example() -> Result<()> {
    let model = HypothesisModel::bernoulli(0.2, 0.5)?;
    let (alpha, beta) = (1e-5, 1e-3);
    let fsst = design_fsst(&model, alpha, beta)?;
    println!("{model}: FSST n*={} c*={:.4}", fsst.n_star, fsst.c_star);
    let mc = McConfig {
        reps: 10_000,
        seed: 3,
        antithetic: false,
    };
    let plans = [
        design_gmt(&model, alpha, beta, GammaRule::OptimizeEssBound)?,
        design_mod_st(&model, alpha, beta, 3)?,
    ];
    for plan in &plans {
        for p in [0.2, 0.35, 0.5] {
            let exact = eval_exact(plan, &model, TruthParam(p))?;
            let sim = eval_mc(plan, &model, TruthParam(p), &mc)?;
            println!(
                "{:>5} p={p}: ESS {:.3} (simulated {:.3} +- {:.3}), P(reject) {:.3e}",
                plan.meta.family.name(),
                exact.ess,
                sim.ess,
                sim.se_ess().unwrap_or(0.0),
                exact.type1
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
