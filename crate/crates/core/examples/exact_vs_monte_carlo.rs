//! The exact recursion against seeded Monte Carlo for a GMT and an ST plan,
//! and the simulated SPRT.
//!
//! ```bash
//! cargo run --example exact_vs_monte_carlo
//! ```

use seqtest::{
    design_gmt, design_sprt, design_st, eval_exact, eval_mc, GammaRule, HypothesisModel, McConfig, Result, TruthParam,
};

pub fn run_example() -> Result<()> {
    let model = HypothesisModel::gaussian(0.5)?;
    let mc = McConfig {
        reps: 20_000,
        seed: 11,
        antithetic: false,
    };
    let plans = [
        design_gmt(&model, 1e-4, 1e-2, GammaRule::OptimizeEssBound)?,
        design_st(&model, 1e-4, 1e-2, 3)?,
    ];
    for plan in &plans {
        for mu in [-0.5, 0.0, 0.5] {
            let exact = eval_exact(plan, &model, TruthParam(mu))?;
            let sim = eval_mc(plan, &model, TruthParam(mu), &mc)?;
            let se = sim.se_ess().unwrap_or(0.0);
            let z = (sim.ess - exact.ess) / se;
            println!(
                "{:>5} mu={mu:+.1}: exact {:.4}, simulated {:.4} +- {:.4} (z = {z:+.2})",
                plan.meta.family.name(),
                exact.ess,
                sim.ess,
                se
            );
        }
    }
    let sprt = design_sprt(1e-4, 1e-2)?;
    for mu in [-0.5, 0.5] {
        let r = eval_mc(&sprt, &model, TruthParam(mu), &mc)?;
        println!(" sprt mu={mu:+.1}: ESS {:.3} +- {:.3}", r.ess, r.se_ess().unwrap_or(0.0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
