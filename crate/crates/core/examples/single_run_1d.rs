//! One forced 1D run against the manufactured solution, printing the final
//! errors and step diagnostics.
//!
//! ```text
//! cargo run --release --example single_run_1d -- [N] [N_t] [T]
//! ```

use llg_bdf3::mms::{error_report, ManufacturedSolution};
use llg_bdf3::stepper::{run, SchemeParams, Startup};
use llg_bdf3::Grid;

fn main() -> llg_bdf3::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(16), |s| s.parse()).expect("N must be an integer");
    let nt: usize = args.get(1).map_or(Ok(1000), |s| s.parse()).expect("N_t must be an integer");
    let t_final: f64 = args.get(2).map_or(Ok(0.1), |s| s.parse()).expect("T must be a number");

    let grid = Grid::new(1, n)?;
    let sol = ManufacturedSolution::one_d();
    let forcing = sol.forcing(&grid, 10.0)?;
    let params = SchemeParams::new(10.0, t_final, nt, Startup::ExactData)?;
    let out = run(grid, &params, &sol, Some(&forcing))?;
    let e = error_report(&out.m, &sol, out.t)?;
    let d = &out.diagnostics;
    println!("N = {n}, N_t = {nt}, T = {t_final}");
    println!("linf {:.12e}  l2 {:.12e}  h1 {:.12e}", e.linf, e.l2, e.h1);
    println!(
        "min |m~| {:.6}  max backward error {:.2e}  max ||m|-1| {:.2e}  {:.2}s",
        d.min_mtilde_norm, d.max_solver_residual, d.max_unit_deviation, d.wall_seconds
    );
    Ok(())
}
