//! Manufactured exact solutions, their source terms, error norms and
//! observed convergence orders.
//!
//! Both families have the form `m_e = (cos g · sin t, sin g · sin t, cos t)`
//! with a time-independent phase `g(x)`, so `|m_e| = 1` identically and
//! every derivative reduces to `g`, `|∇g|²` and `Δg`:
//!
//! ```text
//! |∇m_e|² = sin²t |∇g|²
//! Δm_e    = sin t (−|∇g|² cos g − Δg sin g, −|∇g|² sin g + Δg cos g, 0)
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, Grid, VectorField, VectorFunction};
use crate::ops::{norms, Norms};
use crate::stepper::Forcing;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Phase {
    /// `g ≡ g₀`.
    Constant(f64),
    /// `g = Π_{axes} cos(π x_a)` over the active axes.
    CosineProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedSolution {
    dim: usize,
    phase: Phase,
}

#[derive(Clone, Copy, Debug)]
struct PhaseValues {
    g: f64,
    grad_sq: f64,
    lap: f64,
}

impl ManufacturedSolution {
    pub fn new(dim: usize, phase: Phase) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(ManufacturedSolution { dim, phase })
    }

    /// `g = cos(πx)`.
    pub fn one_d() -> Self {
        ManufacturedSolution { dim: 1, phase: Phase::CosineProduct }
    }

    /// `g = cos(πx) cos(πy) cos(πz)`.
    pub fn three_d() -> Self {
        ManufacturedSolution { dim: 3, phase: Phase::CosineProduct }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    fn phase_at(&self, x: [f64; 3]) -> PhaseValues {
        match self.phase {
            Phase::Constant(g) => PhaseValues { g, grad_sq: 0.0, lap: 0.0 },
            Phase::CosineProduct => {
                let c: Vec<f64> = (0..self.dim).map(|a| (PI * x[a]).cos()).collect();
                let s: Vec<f64> = (0..self.dim).map(|a| (PI * x[a]).sin()).collect();
                let g: f64 = c.iter().product();
                let mut grad_sq = 0.0;
                for a in 0..self.dim {
                    let others: f64 = (0..self.dim).filter(|&b| b != a).map(|b| c[b]).product();
                    let d = -PI * s[a] * others;
                    grad_sq += d * d;
                }
                PhaseValues { g, grad_sq, lap: -(self.dim as f64) * PI * PI * g }
            }
        }
    }

    pub fn value(&self, x: [f64; 3], t: f64) -> Vec3 {
        let g = self.phase_at(x).g;
        let s = t.sin();
        Vec3::new(g.cos() * s, g.sin() * s, t.cos())
    }

    pub fn time_derivative(&self, x: [f64; 3], t: f64) -> Vec3 {
        let g = self.phase_at(x).g;
        let c = t.cos();
        Vec3::new(g.cos() * c, g.sin() * c, -t.sin())
    }

    pub fn laplacian(&self, x: [f64; 3], t: f64) -> Vec3 {
        let p = self.phase_at(x);
        laplacian_from(p.g.cos(), p.g.sin(), p.grad_sq, p.lap, t.sin())
    }

    /// `|∇m_e|²`.
    pub fn gradient_square(&self, x: [f64; 3], t: f64) -> f64 {
        let s = t.sin();
        s * s * self.phase_at(x).grad_sq
    }

    /// Source making `m_e` solve `m_t = −m×Δm + αΔm + α|∇m|²m + f`.
    pub fn forcing_at(&self, x: [f64; 3], t: f64, alpha: f64) -> Vec3 {
        let p = self.phase_at(x);
        forcing_from(p.g.cos(), p.g.sin(), p.grad_sq, p.lap, t, alpha)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::param("grid", format!("solution is {}-dimensional, grid is {}-dimensional", self.dim, grid.dim())))
        }
    }

    /// Cell-centre samples of `m_e(·, t)`, halo filled.
    pub fn exact(&self, grid: &Grid, t: f64) -> Result<VectorField> {
        self.check_grid(grid)?;
        Ok(sample(grid, self, t)?.with_ghosts())
    }

    /// Source term on `grid`, with the time-independent phase data cached.
    pub fn forcing(&self, grid: &Grid, alpha: f64) -> Result<ForcingField> {
        self.check_grid(grid)?;
        let mut cells = Vec::with_capacity(grid.cells());
        for (cell, idx) in grid.interior() {
            let p = self.phase_at(grid.center([cell[0] as isize, cell[1] as isize, cell[2] as isize]));
            cells.push(CachedPhase { idx, cos_g: p.g.cos(), sin_g: p.g.sin(), grad_sq: p.grad_sq, lap: p.lap });
        }
        Ok(ForcingField { grid: *grid, alpha, cells })
    }
}

impl VectorFunction for ManufacturedSolution {
    fn eval(&self, x: [f64; 3], t: f64) -> Vec3 {
        self.value(x, t)
    }
}

fn laplacian_from(cos_g: f64, sin_g: f64, grad_sq: f64, lap: f64, s: f64) -> Vec3 {
    Vec3::new(s * (-grad_sq * cos_g - lap * sin_g), s * (-grad_sq * sin_g + lap * cos_g), 0.0)
}

fn forcing_from(cos_g: f64, sin_g: f64, grad_sq: f64, lap: f64, t: f64, alpha: f64) -> Vec3 {
    let (s, c) = t.sin_cos();
    let m = Vec3::new(cos_g * s, sin_g * s, c);
    let dt = Vec3::new(cos_g * c, sin_g * c, -s);
    let lap_m = laplacian_from(cos_g, sin_g, grad_sq, lap, s);
    dt + m.cross(lap_m) - lap_m * alpha - m * (alpha * s * s * grad_sq)
}

#[derive(Clone, Copy, Debug)]
struct CachedPhase {
    idx: usize,
    cos_g: f64,
    sin_g: f64,
    grad_sq: f64,
    lap: f64,
}

/// Manufactured source bound to one grid.
#[derive(Clone, Debug)]
pub struct ForcingField {
    grid: Grid,
    alpha: f64,
    cells: Vec<CachedPhase>,
}

impl ForcingField {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Forcing for ForcingField {
    fn sample(&self, t: f64) -> Result<VectorField> {
        let mut out = VectorField::zeros(self.grid);
        {
            let data = out.storage_mut();
            for p in &self.cells {
                data[p.idx] = forcing_from(p.cos_g, p.sin_g, p.grad_sq, p.lap, t, self.alpha);
            }
        }
        out.fill_ghosts();
        Ok(out)
    }
}

pub type ErrorReport = Norms;

/// Norms of `numeric − m_e(·, t)`, with the difference reflected into the halo.
pub fn error_report(numeric: &VectorField, sol: &ManufacturedSolution, t: f64) -> Result<ErrorReport> {
    let exact = sol.exact(numeric.grid(), t)?;
    let mut e = VectorField::linear_combination(&[(1.0, numeric), (-1.0, &exact)])?;
    e.fill_ghosts();
    norms(&e)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Least-squares slope of `log(error)` against `log(resolution)`.
    pub slope: f64,
    /// RMS deviation of the log errors from the fitted line.
    pub residual: f64,
    pub points: usize,
}

/// Fits `error ≈ C · resolution^p` over all pairs.
pub fn observed_order(pairs: &[(f64, f64)]) -> Result<OrderFit> {
    if pairs.len() < 2 || pairs.iter().any(|&(r, e)| !(r > 0.0 && e > 0.0 && r.is_finite() && e.is_finite())) {
        return Err(Error::DegenerateFit);
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let icpt = ym - slope * xm;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    Ok(OrderFit { slope, residual: (ss / n).sqrt(), points: pairs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_points_up() {
        for sol in [ManufacturedSolution::one_d(), ManufacturedSolution::three_d()] {
            let g = Grid::new(sol.dim(), 6).unwrap();
            let f = sol.exact(&g, 0.0).unwrap();
            assert!(g.interior().all(|(c, _)| f.get(c) == Vec3::E_Z));
        }
    }

    #[test]
    fn midpoint_value() {
        let t = 0.83;
        let v = ManufacturedSolution::one_d().value([0.5, 0.0, 0.0], t);
        assert!((v.0[0] - t.sin()).abs() < 1e-15);
        assert!(v.0[1].abs() < 1e-15);
        assert_eq!(v.0[2], t.cos());
    }

    #[test]
    fn constant_phase_forcing_is_time_derivative() {
        let sol = ManufacturedSolution::new(3, Phase::Constant(0.0)).unwrap();
        let x = [0.2, 0.7, 0.4];
        let f = sol.forcing_at(x, 0.6, 10.0);
        let d = sol.time_derivative(x, 0.6);
        assert!((f - d).max_abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let g = Grid::new(3, 6).unwrap();
        assert!(ManufacturedSolution::one_d().exact(&g, 0.0).is_err());
    }

    #[test]
    fn exact_power_law() {
        let pairs: Vec<(f64, f64)> = [16.0, 32.0, 64.0].iter().map(|n: &f64| (1.0 / n, 3.0 * n.powi(-4))).collect();
        let fit = observed_order(&pairs).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn rejects_degenerate_fits() {
        assert!(observed_order(&[(0.1, 1.0)]).is_err());
        assert!(observed_order(&[(0.1, 1.0), (0.05, 0.0)]).is_err());
        assert!(observed_order(&[(0.1, 1.0), (0.1, 0.5)]).is_err());
    }
}
