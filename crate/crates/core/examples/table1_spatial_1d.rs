//! 1D spatial convergence: N_t = 1e5 fixed, h = 1/16 … 1/512, T = 0.1.
//!
//! ```text
//! cargo run --release --example table1_spatial_1d -- [out_dir]
//! ```

use llg_bdf3::study::{run_study, write_outputs, Mode, StudyFlags};

fn main() -> llg_bdf3::Result<()> {
    let cfg = StudyFlags {
        mode: Some(Mode::Spatial),
        dim: Some(1),
        alpha: Some(10.0),
        nt: Some(100_000),
        meshes: Some(vec![16, 32, 64, 128, 256, 512]),
        ..Default::default()
    }
    .into_config()?;
    let result = run_study(&cfg)?;
    print!("{}", llg_bdf3::study::table_csv(&result.rows));
    println!("{}", serde_json::to_string(&result.orders).unwrap());
    if let Some(dir) = std::env::args().nth(1) {
        write_outputs(&result, dir.as_ref())?;
    }
    Ok(())
}
