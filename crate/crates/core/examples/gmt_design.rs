//! General multistage tests for a symmetric and an asymmetric pair of
//! error levels: the number of extra opportunities, the plan record and
//! the expected sample size under each hypothesis.
//!
//! ```bash
//! cargo run --example gmt_design
//! ```

use seqtest::{
    design_fsst, design_gmt, eval_exact_with, k_hat, ExactConfig, GammaRule, Hypothesis, HypothesisModel, Result,
};

pub fn run_example() -> Result<()> {
    let model = HypothesisModel::gaussian(0.5)?;
    let cfg = ExactConfig::default();
    for (alpha, beta) in [(1e-6, 1e-6), (1e-12, 1e-2)] {
        let (k0, k1) = k_hat(&model, alpha, beta)?;
        let plan = design_gmt(&model, alpha, beta, GammaRule::OptimizeEssBound)?;
        let n_star = design_fsst(&model, alpha, beta)?.n_star as f64;
        println!("alpha={alpha:e} beta={beta:e}: K0={k0} K1={k1}, {} opportunities", plan.opportunities());
        print!("{plan}");
        for h in [Hypothesis::Null, Hypothesis::Alternative] {
            let r = eval_exact_with(&plan, &model, model.truth_under(h), &cfg)?;
            println!(
                "  {h:?}: ESS {:.3} ({:.3} of n*), type-I {:.3e}, type-II {:.3e}",
                r.ess,
                r.ess / n_star,
                r.type1,
                r.type2
            );
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
