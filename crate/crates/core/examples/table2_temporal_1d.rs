//! 1D temporal convergence: N = 1e4 fixed, k = T/8 … T/32, T = 0.1.
//! Pass `bdf2` to start with one BDF2 step instead of exact level-2 data.
//!
//! ```text
//! cargo run --release --example table2_temporal_1d -- [exact|bdf2]
//! ```

use llg_bdf3::study::{run_study, table_csv, Mode, StudyFlags};

fn main() -> llg_bdf3::Result<()> {
    let startup = std::env::args().nth(1).map(|s| s.parse()).transpose()?;
    let cfg = StudyFlags {
        mode: Some(Mode::Temporal),
        dim: Some(1),
        alpha: Some(10.0),
        n: Some(10_000),
        steps: Some(vec![8, 12, 16, 24, 32]),
        startup,
        ..Default::default()
    }
    .into_config()?;
    let result = run_study(&cfg)?;
    print!("{}", table_csv(&result.rows));
    println!("{}", serde_json::to_string(&result.orders).unwrap());
    Ok(())
}
