//! 3D coupled refinement with k³ ≈ h⁴: h = 1/16 … 1/32, T = 1, orders
//! fitted against k.

use llg_bdf3::study::{run_study, table_csv, Mode, StudyFlags};

fn main() -> llg_bdf3::Result<()> {
    let cfg = StudyFlags {
        mode: Some(Mode::Coupled),
        dim: Some(3),
        alpha: Some(10.0),
        meshes: Some(vec![16, 20, 24, 28, 32]),
        ..Default::default()
    }
    .into_config()?;
    for p in &cfg.points {
        println!("N = {:>2}  N_t = {}", p.n, p.nt);
    }
    let result = run_study(&cfg)?;
    print!("{}", table_csv(&result.rows));
    println!("{}", serde_json::to_string(&result.orders).unwrap());
    Ok(())
}
