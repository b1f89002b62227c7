//! 3D spatial convergence: h = 1/12 … 1/28, T = 1. The step count defaults
//! to 1e4; pass a smaller one (e.g. 2000) for a quicker run.
//!
//! ```text
//! cargo run --release --example table3_spatial_3d -- [N_t] [workers]
//! ```

use llg_bdf3::study::{run_study, table_csv, Mode, StudyFlags};

fn main() -> llg_bdf3::Result<()> {
    let mut args = std::env::args().skip(1);
    let nt = args.next().map_or(10_000, |s| s.parse().expect("N_t must be an integer"));
    let workers = args.next().map(|s| s.parse().expect("workers must be an integer"));
    let cfg = StudyFlags {
        mode: Some(Mode::Spatial),
        dim: Some(3),
        alpha: Some(10.0),
        nt: Some(nt),
        meshes: Some(vec![12, 16, 20, 24, 28]),
        workers,
        ..Default::default()
    }
    .into_config()?;
    let result = run_study(&cfg)?;
    print!("{}", table_csv(&result.rows));
    println!("{}", serde_json::to_string(&result.orders).unwrap());
    eprintln!("{:.1}s", result.wall_seconds);
    Ok(())
}
