//! Plan records: write a designed plan as text, read it back and check that
//! the evaluation is bit-for-bit the same.
//!
//! ```bash
//! cargo run --example plan_record
//! ```

use seqtest::{design_3st, eval_exact, HypothesisModel, Result, TestPlan, ThreeStageVariant, TruthParam};

pub fn run_example() -> Result<()> {
    let model = HypothesisModel::gaussian(0.5)?;
    let plan = design_3st(&model, 1e-6, 1e-6, ThreeStageVariant::LordenMarkov)?;
    let text = plan.to_string();
    print!("{text}");
    let back: TestPlan = text.parse()?;
    assert_eq!(back, plan);
    let a = eval_exact(&plan, &model, TruthParam(0.1))?;
    let b = eval_exact(&back, &model, TruthParam(0.1))?;
    assert_eq!(a.ess.to_bits(), b.ess.to_bits());
    println!("round trip ok, ESS at mu=0.1: {:.6}", a.ess);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
