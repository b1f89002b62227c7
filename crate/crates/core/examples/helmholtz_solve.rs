//! Solves (a − αΔ_(4)) u = f on a 3D grid with the cosine-transform plan and
//! compares against the dense reference factorization.

use llg_bdf3::helmholtz::{solve_reference, SpectralPlan};
use llg_bdf3::{Grid, Vec3, VectorField};

fn main() -> llg_bdf3::Result<()> {
    let grid = Grid::new(3, 8)?;
    let (a, alpha) = (11.0 / 6.0 * 40.0, 10.0);
    let rhs = VectorField::from_fn(grid, |x| Vec3::new((3.0 * x[0]).sin(), x[1] * x[2], (x[0] - x[2]).exp())).with_ghosts();

    let plan = SpectralPlan::new(grid, a, alpha)?;
    let u = plan.solve(&rhs)?;
    let dense = solve_reference(grid, a, alpha, &rhs)?;
    let diff = VectorField::linear_combination(&[(1.0, &u), (-1.0, &dense)])?;

    println!("eigenvalues  {:?}", plan.eigenvalues());
    println!("relative residual  {:.3e}", plan.relative_residual(&u, &rhs)?);
    println!("backward error     {:.3e}", plan.backward_error(&u, &rhs)?);
    println!("max |spectral - dense| / max |u|  {:.3e}", diff.max_abs() / u.max_abs());
    Ok(())
}
