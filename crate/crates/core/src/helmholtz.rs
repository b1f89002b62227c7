//! Direct solver for `(a I − α Δ_(4)) u = f` with reflective boundaries.
//!
//! Under the reflective halo the long-stencil Laplacian is diagonal in the
//! tensor-product DCT-II basis, with per-axis eigenvalues
//! `λ_q = μ_q (1 − h² μ_q / 12)`, `μ_q = −(4/h²) sin²(πq/(2N))`.
//! A solve is a forward transform, a pointwise division and an inverse
//! transform, one component at a time.

use nalgebra::{DMatrix, DVector};

use crate::dct::{basis_cos, CosineTransform};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField};
use crate::ops::{l2_norm, laplacian4, mean};
use crate::vec3::FieldValue;

/// Largest grid accepted by [`solve_reference`].
pub const DENSE_CELL_CAP: usize = 4096;

const VALIDATION_TOL: f64 = 1e-12;

/// One-dimensional eigenvalue of `D²_(4)` for mode `q` on `n` cells of
/// the unit interval.
pub fn laplacian4_eigenvalue(n: usize, q: usize) -> f64 {
    if q == 0 {
        return 0.0;
    }
    let h = 1.0 / n as f64;
    let s = (std::f64::consts::PI * q as f64 / (2.0 * n as f64)).sin();
    let mu = -4.0 / (h * h) * s * s;
    mu * (1.0 - h * h / 12.0 * mu)
}

/// Upper bound on `|λ|` of `Δ_(4)` in `dim` dimensions: `16 dim / (3h²)`.
pub fn laplacian4_spectral_radius(grid: &Grid) -> f64 {
    16.0 * grid.dim() as f64 / (3.0 * grid.h() * grid.h())
}

#[derive(Debug)]
pub struct SpectralPlan {
    grid: Grid,
    a: f64,
    alpha: f64,
    eigenvalues: Vec<f64>,
    // 1 / (a − α Σ λ), interior order
    inv_symbol: Vec<f64>,
    // −1 / Σ λ with the constant mode zeroed
    inv_neg_lap: Vec<f64>,
    transform: CosineTransform,
}

impl SpectralPlan {
    /// Builds and validates a plan for `(a I − α Δ_(4))`.
    pub fn new(grid: Grid, a: f64, alpha: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", format!("shift must be positive, got {a}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("damping must be positive, got {alpha}")));
        }
        let n = grid.n();
        let eigenvalues: Vec<f64> = (0..n).map(|q| laplacian4_eigenvalue(n, q)).collect();
        validate_eigenvalues(n, &eigenvalues)?;

        let [nx, ny, nz] = grid.interior_shape();
        let mut inv_symbol = Vec::with_capacity(grid.cells());
        let mut inv_neg_lap = Vec::with_capacity(grid.cells());
        for qz in 0..nz {
            for qy in 0..ny {
                for qx in 0..nx {
                    let mut lam = eigenvalues[qx];
                    if grid.dim() > 1 {
                        lam += eigenvalues[qy];
                    }
                    if grid.dim() > 2 {
                        lam += eigenvalues[qz];
                    }
                    inv_symbol.push(1.0 / (a - alpha * lam));
                    inv_neg_lap.push(if qx + qy + qz == 0 { 0.0 } else { -1.0 / lam });
                }
            }
        }
        Ok(SpectralPlan { grid, a, alpha, eigenvalues, inv_symbol, inv_neg_lap, transform: CosineTransform::new(n) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shift(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Per-axis eigenvalues `λ_q`, `q = 0..N`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `‖a I − α Δ_(4)‖₂`.
    pub fn operator_norm(&self) -> f64 {
        self.a + self.alpha * laplacian4_spectral_radius(&self.grid)
    }

    fn transform_all(&self, buf: &mut [f64], forward: bool) {
        let n = self.grid.n();
        let mut scratch = self.transform.scratch();
        let mut line = vec![0.0; n];
        let total = buf.len();
        for axis in 0..self.grid.dim() {
            let stride = n.pow(axis as u32);
            // every line start: indices whose coordinate along `axis` is 0
            for start in 0..total {
                if !(start / stride).is_multiple_of(n) {
                    continue;
                }
                if stride == 1 {
                    let seg = &mut buf[start..start + n];
                    if forward {
                        self.transform.forward(seg, &mut scratch);
                    } else {
                        self.transform.inverse(seg, &mut scratch);
                    }
                } else {
                    for (m, v) in line.iter_mut().enumerate() {
                        *v = buf[start + m * stride];
                    }
                    if forward {
                        self.transform.forward(&mut line, &mut scratch);
                    } else {
                        self.transform.inverse(&mut line, &mut scratch);
                    }
                    for (m, v) in line.iter().enumerate() {
                        buf[start + m * stride] = *v;
                    }
                }
            }
        }
    }

    fn apply_symbol<T: FieldValue>(&self, rhs: &Field<T>, symbol: &[f64]) -> Result<Field<T>> {
        rhs.same_grid(&ScalarField::zeros(self.grid))?;
        let idx = self.grid.interior_indices();
        let src = rhs.storage();
        let mut out = Field::<T>::zeros(self.grid);
        let mut buf = vec![0.0; idx.len()];
        {
            let dst = out.storage_mut();
            for c in 0..T::COMPONENTS {
                for (b, &i) in buf.iter_mut().zip(&idx) {
                    *b = src[i].component(c);
                }
                self.transform_all(&mut buf, true);
                for (b, s) in buf.iter_mut().zip(symbol) {
                    *b *= s;
                }
                self.transform_all(&mut buf, false);
                for (b, &i) in buf.iter().zip(&idx) {
                    dst[i].set_component(c, *b);
                }
            }
        }
        out.fill_ghosts();
        Ok(out)
    }

    /// Solves `(a I − α Δ_(4)) u = rhs`; the result has its halo filled.
    pub fn solve<T: FieldValue>(&self, rhs: &Field<T>) -> Result<Field<T>> {
        self.apply_symbol(rhs, &self.inv_symbol)
    }

    /// `(a I − α Δ_(4)) u`.
    pub fn apply<T: FieldValue>(&self, u: &Field<T>) -> Result<Field<T>> {
        let lap = laplacian4(u)?;
        Field::linear_combination(&[(self.a, u), (-self.alpha, &lap)])
    }

    /// `‖A u − rhs‖₂ / ‖rhs‖₂` (absolute when `rhs = 0`).
    pub fn relative_residual<T: FieldValue>(&self, u: &Field<T>, rhs: &Field<T>) -> Result<f64> {
        let r = Field::linear_combination(&[(1.0, &self.apply(u)?), (-1.0, rhs)])?;
        let scale = l2_norm(rhs);
        let rn = l2_norm(&r);
        Ok(if scale > 0.0 { rn / scale } else { rn })
    }

    /// Normwise backward error `‖A u − rhs‖ / (‖A‖ ‖u‖ + ‖rhs‖)`.
    pub fn backward_error<T: FieldValue>(&self, u: &Field<T>, rhs: &Field<T>) -> Result<f64> {
        let r = Field::linear_combination(&[(1.0, &self.apply(u)?), (-1.0, rhs)])?;
        let denom = self.operator_norm() * l2_norm(u) + l2_norm(rhs);
        let rn = l2_norm(&r);
        Ok(if denom > 0.0 { rn / denom } else { rn })
    }

    /// Zero-mean `ψ` with `−Δ_(4) ψ = f`; `f` must have zero mean.
    pub fn inv_neg_laplacian<T: FieldValue>(&self, f: &Field<T>) -> Result<Field<T>> {
        let norm = l2_norm(f);
        let m = mean(f);
        for c in 0..T::COMPONENTS {
            let mc = m.component(c);
            if mc.abs() > 1e-12 * norm {
                return Err(Error::NonzeroMean { mean: mc, norm });
            }
        }
        self.apply_symbol(f, &self.inv_neg_lap)
    }

    /// `‖f‖₋₁ = ⟨(−Δ_(4))⁻¹ f, f⟩^½`.
    pub fn hminus1_norm<T: FieldValue>(&self, f: &Field<T>) -> Result<f64> {
        let psi = self.inv_neg_laplacian(f)?;
        Ok(crate::ops::inner_l2(&psi, f)?.max(0.0).sqrt())
    }
}

/// Applies `D²_(4)` with reflective ghosts to every cosine mode and checks
/// the eigen-relation against the closed form; also checks monotonicity.
fn validate_eigenvalues(n: usize, eigenvalues: &[f64]) -> Result<()> {
    let h = 1.0 / n as f64;
    let scale = 16.0 / (3.0 * h * h);
    let table: Vec<f64> = (0..4 * n).map(|m| basis_cos(m, 0, n)).collect();
    let mut v = vec![0.0; n + 4];
    let reflect = |p: isize| -> usize {
        let i = if p < 0 {
            -1 - p
        } else if p >= n as isize {
            2 * n as isize - 1 - p
        } else {
            p
        };
        i as usize
    };
    for (q, &lam) in eigenvalues.iter().enumerate() {
        for (p, slot) in v.iter_mut().enumerate() {
            let i = reflect(p as isize - 2);
            *slot = table[(q * (2 * i + 1)) % (4 * n)];
        }
        let mut dev = 0.0_f64;
        for i in 0..n {
            let p = i + 2;
            let lap = (-v[p - 2] + 16.0 * v[p - 1] - 30.0 * v[p] + 16.0 * v[p + 1] - v[p + 2]) / (12.0 * h * h);
            dev = dev.max((lap - lam * v[p]).abs());
        }
        let rel = dev / scale;
        if rel > VALIDATION_TOL {
            return Err(Error::PlanValidation { mode: q, deviation: rel });
        }
        if q == 0 && lam != 0.0 {
            return Err(Error::PlanValidation { mode: 0, deviation: lam.abs() });
        }
        if q > 0 && lam >= eigenvalues[q - 1] {
            return Err(Error::PlanValidation { mode: q, deviation: lam - eigenvalues[q - 1] });
        }
    }
    Ok(())
}

/// Plan construction as a free function.
pub fn build_plan(grid: Grid, a: f64, alpha: f64) -> Result<SpectralPlan> {
    SpectralPlan::new(grid, a, alpha)
}

/// Dense assembly of `(a I − α Δ_(4))` with the ghost references folded
/// back onto their mirror cells, solved by LU. Independent of the
/// transform path; meant for small grids.
pub fn solve_reference<T: FieldValue>(grid: Grid, a: f64, alpha: f64, rhs: &Field<T>) -> Result<Field<T>> {
    let cells = grid.cells();
    if cells > DENSE_CELL_CAP {
        return Err(Error::TooLargeForDense { cells, cap: DENSE_CELL_CAP });
    }
    rhs.same_grid(&ScalarField::zeros(grid))?;
    let n = grid.n() as isize;
    let shape = grid.interior_shape();
    let flat = |c: [usize; 3]| c[0] + shape[0] * (c[1] + shape[1] * c[2]);
    let reflect = |p: isize| -> usize {
        if p < 0 {
            (-1 - p) as usize
        } else if p >= n {
            (2 * n - 1 - p) as usize
        } else {
            p as usize
        }
    };
    let h = grid.h();
    let coef = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|c: f64| -alpha * c / (12.0 * h * h));
    let mut m = DMatrix::<f64>::zeros(cells, cells);
    for (cell, _) in grid.interior() {
        let row = flat(cell);
        m[(row, row)] += a;
        for axis in 0..grid.dim() {
            for (o, &c) in coef.iter().enumerate() {
                let mut nb = cell;
                nb[axis] = reflect(cell[axis] as isize + o as isize - 2);
                m[(row, flat(nb))] += c;
            }
        }
    }
    let lu = m.lu();
    let values = rhs.interior_values();
    let mut out = vec![T::zero(); cells];
    for c in 0..T::COMPONENTS {
        let b = DVector::from_iterator(cells, values.iter().map(|v| v.component(c)));
        let x = lu.solve(&b).ok_or(Error::Singular)?;
        for (o, xv) in out.iter_mut().zip(x.iter()) {
            o.set_component(c, *xv);
        }
    }
    Ok(Field::from_interior(grid, &out)?.with_ghosts())
}
