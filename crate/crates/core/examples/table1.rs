//! Expected sample size relative to the FSST for the GMT, ST, mod-ST and
//! SPRT in the symmetric and asymmetric setups.
//!
//! The default run uses a coarse parameter grid and few replicates. Pass
//! `--full` for the 100-point grid and 1e5 replicates (a few minutes).
//!
//! ```bash
//! cargo run --release --example table1 -- --full
//! ```

use seqtest::reproduce::{format_table1, table1, StudyOptions};
use seqtest::{linear_grid, ExactConfig, GridCheck, Result};

fn quick_options() -> StudyOptions {
    StudyOptions {
        reps: 5_000,
        grid: linear_grid(-0.6, 0.6, 7),
        exact: ExactConfig {
            points: 1001,
            check: GridCheck::Off,
            ..ExactConfig::default()
        },
        ..StudyOptions::default()
    }
}

pub fn run_with(opts: &StudyOptions) -> Result<()> {
    let rows = table1(opts)?;
    print!("{}", format_table1(&rows));
    Ok(())
}

pub fn run_example() -> Result<()> {
    run_with(&quick_options())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    if std::env::args().any(|a| a == "--full") {
        run_with(&StudyOptions::default())
    } else {
        run_example()
    }
}
