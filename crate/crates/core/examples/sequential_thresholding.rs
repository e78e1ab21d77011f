//! Sequential thresholding and its cumulative modification for several
//! stage counts, and the stage count that minimises a mixture ESS.
//!
//! ```bash
//! cargo run --example sequential_thresholding
//! ```

use seqtest::{
    choose_k_st_with, design_fsst, design_mod_st, design_st, eval_exact_with, ExactConfig, GridCheck, Hypothesis,
    HypothesisModel, Result, ThresholdingKind,
};

pub fn run_example() -> Result<()> {
    let model = HypothesisModel::gaussian(0.5)?;
    let (alpha, beta) = (1e-6, 1e-6);
    let cfg = ExactConfig {
        points: 1001,
        check: GridCheck::Half,
        ..ExactConfig::default()
    };
    let n_star = design_fsst(&model, alpha, beta)?.n_star as f64;
    let null = model.truth_under(Hypothesis::Null);
    let alt = model.truth_under(Hypothesis::Alternative);
    println!("{:>2} {:>16} {:>16}", "K", "ST ESS0/ESS1", "mod-ST ESS0/ESS1");
    for k in 1..=4 {
        let st = design_st(&model, alpha, beta, k)?;
        let md = design_mod_st(&model, alpha, beta, k)?;
        let ratio = |plan, t| eval_exact_with(plan, &model, t, &cfg).map(|r| r.ess / n_star);
        println!(
            "{k:>2} {:>7.3} {:>8.3} {:>7.3} {:>8.3}",
            ratio(&st, null)?,
            ratio(&st, alt)?,
            ratio(&md, null)?,
            ratio(&md, alt)?
        );
    }
    for pi in [0.01, 0.3, 0.6] {
        let st = choose_k_st_with(&model, alpha, beta, pi, 6, ThresholdingKind::St, &cfg)?;
        let md = choose_k_st_with(&model, alpha, beta, pi, 6, ThresholdingKind::ModSt, &cfg)?;
        println!("pi={pi}: ST picks K={} (ESS {:.2}), mod-ST picks K={} (ESS {:.2})", st.k, st.ess_mixture, md.k, md.ess_mixture);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
