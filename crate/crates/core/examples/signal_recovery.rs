//! Signal recovery across many streams: per-stream levels for classical and
//! generalized familywise control, a simulated check of the familywise
//! errors, and a small sweep over the number of signals.
//!
//! ```bash
//! cargo run --release --example signal_recovery
//! ```

use seqtest::{
    calibrate, design_gmt, highdim_sweep, simulate_familywise, GammaRule, HighDimConfig, HighDimFamily,
    HighDimOptions, HypothesisModel, Result, Scenario,
};

pub fn run_example() -> Result<()> {
    let model = HypothesisModel::gaussian(0.5)?;

    let fwe = HighDimConfig::fwe(100, 10, 10, 0.05, 0.05)?;
    let gfwe = HighDimConfig {
        kappa: 3,
        iota: 2,
        ..fwe
    };
    for cfg in [fwe, gfwe] {
        let levels = calibrate(&cfg)?;
        println!(
            "m={} u={} kappa={} iota={}: per-stream alpha {:.4e}, beta {:.4e}",
            cfg.m, cfg.u, cfg.kappa, cfg.iota, levels.alpha_stream, levels.beta_stream
        );
    }

    let levels = calibrate(&fwe)?;
    let plan = design_gmt(&model, levels.alpha_stream, levels.beta_stream, GammaRule::OptimizeEssBound)?;
    let report = simulate_familywise(&fwe, 10, &plan, &model, 2_000, 5)?;
    println!(
        "simulated familywise errors with the GMT: type-I {:.4} +- {:.4}, type-II {:.4} +- {:.4}",
        report.type1, report.se_type1, report.type2, report.se_type2
    );

    let base = HighDimConfig::fwe(10_000, 0, 1, 0.05, 0.05)?;
    let opts = HighDimOptions {
        k_max: 6,
        ..HighDimOptions::default()
    };
    let families = [HighDimFamily::Fsst, HighDimFamily::Gmt, HighDimFamily::St, HighDimFamily::ModSt];
    let sweep = highdim_sweep(&base, &model, &[10, 1_000, 5_000], Scenario::KnownCount, &families, &opts)?;
    for row in &sweep.rows {
        println!(
            "u/m={:<6} {:>5}: mixture ESS {:7.3}, stages {:?}",
            row.u_over_m,
            row.family.name(),
            row.ess_mixture,
            row.max_stages
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
