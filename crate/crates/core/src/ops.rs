//! Difference operators and discrete norms on cell-centered grid functions.
//!
//! Two gradient families live here. The face gradient [`grad_h`] pairs with
//! the three-point Laplacian; it is the one used for the `H¹` norm and the
//! summation-by-parts identities. The five-point long-stencil first
//! derivative [`d1_long`] is cell-centered and only feeds the nonlinear
//! gradient-square term [`grad_sq_tilde4`].
//!
//! All operators need a filled halo and return fields whose halo is stale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField, VectorField};
use crate::vec3::FieldValue;

// c·f₀ + n·(f₊₁ ± f₋₁) + r·(f₊₂ ± f₋₂); pairing the symmetric taps
// first makes constants cancel exactly
struct Stencil {
    center: f64,
    near: f64,
    far: f64,
    odd: bool,
}

const D1_LONG: Stencil = Stencil { center: 0.0, near: 8.0, far: -1.0, odd: true };
const D2_LONG: Stencil = Stencil { center: -30.0, near: 16.0, far: -1.0, odd: false };
const D2_SHORT: Stencil = Stencil { center: -2.0, near: 1.0, far: 0.0, odd: false };
const D4_SHORT: Stencil = Stencil { center: 6.0, near: -4.0, far: 1.0, odd: false };

/// Pairwise summation; fixed order for a given length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis < grid.dim() {
        Ok(())
    } else {
        Err(Error::InvalidAxis { axis, dim: grid.dim() })
    }
}

fn apply_stencil<T: FieldValue>(f: &Field<T>, axis: usize, st: &Stencil, scale: f64, out: &mut [T]) {
    let g = f.grid();
    let s = g.strides()[axis];
    let data = f.storage();
    for (_, idx) in g.interior() {
        let (m2, m1, p1, p2) = (data[idx - 2 * s], data[idx - s], data[idx + s], data[idx + 2 * s]);
        let (near, far) = if st.odd { (p1 - m1, p2 - m2) } else { (p1 + m1, p2 + m2) };
        let mut acc = near * st.near;
        if st.far != 0.0 {
            acc += far * st.far;
        }
        if st.center != 0.0 {
            acc += data[idx] * st.center;
        }
        out[idx] += acc * scale;
    }
}

fn axis_op<T: FieldValue>(
    f: &Field<T>,
    axis: usize,
    st: &Stencil,
    scale: f64,
    name: &'static str,
) -> Result<Field<T>> {
    f.require_ghosts(name)?;
    check_axis(f.grid(), axis)?;
    let mut out = vec![T::zero(); f.storage().len()];
    apply_stencil(f, axis, st, scale, &mut out);
    Ok(Field::from_storage(*f.grid(), out, false))
}

fn all_axes_op<T: FieldValue>(f: &Field<T>, st: &Stencil, scale: f64, name: &'static str) -> Result<Field<T>> {
    f.require_ghosts(name)?;
    let mut out = vec![T::zero(); f.storage().len()];
    for axis in 0..f.grid().dim() {
        apply_stencil(f, axis, st, scale, &mut out);
    }
    Ok(Field::from_storage(*f.grid(), out, false))
}

/// Fourth-order first derivative `(f₋₂ − 8f₋₁ + 8f₊₁ − f₊₂)/(12h)` along `axis`.
pub fn d1_long<T: FieldValue>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    let h = f.grid().h();
    axis_op(f, axis, &D1_LONG, 1.0 / (12.0 * h), "d1_long")
}

/// Fourth-order second derivative `(−f₋₂ + 16f₋₁ − 30f + 16f₊₁ − f₊₂)/(12h²)`.
pub fn d2_long<T: FieldValue>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    let h = f.grid().h();
    axis_op(f, axis, &D2_LONG, 1.0 / (12.0 * h * h), "d2_long")
}

/// Three-point second difference along `axis`.
pub fn d2_short<T: FieldValue>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    let h = f.grid().h();
    axis_op(f, axis, &D2_SHORT, 1.0 / (h * h), "d2_short")
}

/// Five-point fourth difference along `axis`, the square of [`d2_short`]
/// under reflective ghosts.
pub fn d4_short<T: FieldValue>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    let h = f.grid().h();
    axis_op(f, axis, &D4_SHORT, 1.0 / (h * h * h * h), "d4_short")
}

/// Long-stencil Laplacian, the sum of [`d2_long`] over active axes.
pub fn laplacian4<T: FieldValue>(f: &Field<T>) -> Result<Field<T>> {
    let h = f.grid().h();
    all_axes_op(f, &D2_LONG, 1.0 / (12.0 * h * h), "laplacian4")
}

/// Standard three-point-per-axis Laplacian.
pub fn laplacian_h<T: FieldValue>(f: &Field<T>) -> Result<Field<T>> {
    let h = f.grid().h();
    all_axes_op(f, &D2_SHORT, 1.0 / (h * h), "laplacian_h")
}

/// Pointwise `Σ_axes |D¹_(4) f|²`; for vector fields this sums over components.
pub fn grad_sq_tilde4<T: FieldValue>(f: &Field<T>) -> Result<ScalarField> {
    f.require_ghosts("grad_sq_tilde4")?;
    let g = *f.grid();
    let s = g.strides();
    let scale = 1.0 / (12.0 * g.h());
    let data = f.storage();
    let mut out = vec![0.0; data.len()];
    for (_, idx) in g.interior() {
        let mut acc = 0.0;
        for &st in s.iter().take(g.dim()) {
            let d = ((data[idx + st] - data[idx - st]) * 8.0 - (data[idx + 2 * st] - data[idx - 2 * st])) * scale;
            acc += d.dot(d);
        }
        out[idx] = acc;
    }
    Ok(Field::from_storage(g, out, false))
}

/// Face-centered differences `(f_{i+1} − f_i)/h`, faces `0..=n` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceGradient<T> {
    grid: Grid,
    faces: Vec<Vec<T>>,
}

impl<T: FieldValue> FaceGradient<T> {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Face values along `axis`, x fastest, `n + 1` entries along `axis`.
    pub fn axis(&self, axis: usize) -> &[T] {
        &self.faces[axis]
    }

    /// `h^d Σ_axes Σ_faces a·b`.
    pub fn inner(&self, other: &FaceGradient<T>) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let terms: Vec<f64> = self
            .faces
            .iter()
            .zip(&other.faces)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.dot(*y)))
            .collect();
        Ok(self.grid.cell_volume() * pairwise_sum(&terms))
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same grid").sqrt()
    }

    /// Largest component magnitude over all faces.
    pub fn max_abs(&self) -> f64 {
        self.faces.iter().flatten().fold(0.0_f64, |m, v| m.max(v.max_abs()))
    }
}

pub fn grad_h<T: FieldValue>(f: &Field<T>) -> Result<FaceGradient<T>> {
    f.require_ghosts("grad_h")?;
    let g = *f.grid();
    let n = g.n();
    let inv_h = 1.0 / g.h();
    let strides = g.strides();
    let data = f.storage();
    let mut faces = Vec::with_capacity(g.dim());
    for (axis, &s) in strides.iter().enumerate().take(g.dim()) {
        let mut shape = g.interior_shape();
        shape[axis] = n + 1;
        let mut vals = Vec::with_capacity(shape.iter().product());
        for k in 0..shape[2] {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    let mut cell = [i as isize, j as isize, k as isize];
                    // face p sits between cells p-1 and p
                    cell[axis] -= 1;
                    let left = g.index(cell);
                    vals.push((data[left + s] - data[left]) * inv_h);
                }
            }
        }
        faces.push(vals);
    }
    Ok(FaceGradient { grid: g, faces })
}

/// Discrete inner product `h^d Σ f·g` over interior cells.
pub fn inner_l2<T: FieldValue>(f: &Field<T>, g: &Field<T>) -> Result<f64> {
    f.same_grid(g)?;
    let grid = f.grid();
    let (a, b) = (f.storage(), g.storage());
    let terms: Vec<f64> = grid.interior().map(|(_, idx)| a[idx].dot(b[idx])).collect();
    Ok(grid.cell_volume() * pairwise_sum(&terms))
}

pub fn l2_norm<T: FieldValue>(f: &Field<T>) -> f64 {
    inner_l2(f, f).expect("same grid").sqrt()
}

/// Discrete average `h^d Σ f`, per component.
pub fn mean<T: FieldValue>(f: &Field<T>) -> T {
    let grid = f.grid();
    let data = f.storage();
    let mut out = T::zero();
    let mut buf = Vec::with_capacity(grid.cells());
    for c in 0..T::COMPONENTS {
        buf.clear();
        buf.extend(grid.interior().map(|(_, idx)| data[idx].component(c)));
        out.set_component(c, grid.cell_volume() * pairwise_sum(&buf));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub linf: f64,
    pub l2: f64,
    pub h1: f64,
}

/// `ℓ∞`, `ℓ²` and `H¹_h` norms; the last uses the face gradient.
pub fn norms<T: FieldValue>(f: &Field<T>) -> Result<Norms> {
    let l2sq = inner_l2(f, f)?;
    let grad = grad_h(f)?;
    let gsq = grad.inner(&grad)?;
    Ok(Norms { linf: f.max_abs(), l2: l2sq.sqrt(), h1: (l2sq + gsq).sqrt() })
}

/// `⟨∇_h f, ∇_h g⟩ + (h²/12) Σ_axes ⟨D²_axis f, D²_axis g⟩`, the bilinear form
/// of `−Δ_(4)` under reflective ghosts.
pub fn inner_nabla4<T: FieldValue>(f: &Field<T>, g: &Field<T>) -> Result<f64> {
    f.same_grid(g)?;
    let grid = *f.grid();
    let mut acc = grad_h(f)?.inner(&grad_h(g)?)?;
    let h = grid.h();
    for axis in 0..grid.dim() {
        acc += h * h / 12.0 * inner_l2(&d2_short(f, axis)?, &d2_short(g, axis)?)?;
    }
    Ok(acc)
}

pub fn grad_h_norm<T: FieldValue>(f: &Field<T>) -> Result<f64> {
    Ok(grad_h(f)?.norm())
}

pub fn nabla4_norm<T: FieldValue>(f: &Field<T>) -> Result<f64> {
    Ok(inner_nabla4(f, f)?.max(0.0).sqrt())
}

/// `(⟨|∇̃_(4) f|², 1⟩)^½`.
pub fn tilde4_norm<T: FieldValue>(f: &Field<T>) -> Result<f64> {
    let sq = grad_sq_tilde4(f)?;
    let grid = sq.grid();
    let vals: Vec<f64> = grid.interior().map(|(_, idx)| sq.storage()[idx]).collect();
    Ok((grid.cell_volume() * pairwise_sum(&vals)).sqrt())
}

/// Pointwise cross product `f × g` over all storage.
pub fn cross(f: &VectorField, g: &VectorField) -> Result<VectorField> {
    f.zip_map(g, |a, b| a.cross(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;
    use std::f64::consts::PI;

    fn poly_field(n: usize, p: impl Fn(f64) -> f64) -> ScalarField {
        // exact polynomial values in the halo, no reflection
        let g = Grid::new(1, n).unwrap();
        let mut f = ScalarField::zeros(g);
        for i in -2..(n as isize + 2) {
            f.set_raw([i, 0, 0], p(g.center([i, 0, 0])[0]));
        }
        f.assume_ghosts_filled();
        f
    }

    #[test]
    fn unfilled_halo_is_rejected() {
        let g = Grid::new(1, 8).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0]);
        assert!(matches!(d1_long(&f, 0), Err(Error::GhostsNotFilled(_))));
        assert!(matches!(grad_h(&f), Err(Error::GhostsNotFilled(_))));
        assert!(matches!(laplacian4(&f), Err(Error::GhostsNotFilled(_))));
    }

    #[test]
    fn axis_out_of_range() {
        let g = Grid::new(1, 8).unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert!(matches!(d2_long(&f, 1), Err(Error::InvalidAxis { axis: 1, dim: 1 })));
    }

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::new(3, 6).unwrap();
        let f = VectorField::constant(g, Vec3::new(0.2, -0.4, 0.9));
        assert_eq!(laplacian4(&f).unwrap().max_abs(), 0.0);
        assert_eq!(d1_long(&f, 2).unwrap().max_abs(), 0.0);
        assert_eq!(grad_sq_tilde4(&f).unwrap().max_abs(), 0.0);
        assert_eq!(grad_h(&f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn long_stencils_exact_on_low_polynomials() {
        for deg in 0..=4 {
            let f = poly_field(10, |x| x.powi(deg));
            let d = d1_long(&f, 0).unwrap();
            for (cell, _) in f.grid().interior() {
                let x = f.grid().center([cell[0] as isize, 0, 0])[0];
                let want = if deg == 0 { 0.0 } else { deg as f64 * x.powi(deg - 1) };
                assert!((d.get(cell) - want).abs() < 1e-11, "deg {deg}");
            }
        }
        for deg in 0..=5 {
            let f = poly_field(10, |x| x.powi(deg));
            let d = d2_long(&f, 0).unwrap();
            for (cell, _) in f.grid().interior() {
                let x = f.grid().center([cell[0] as isize, 0, 0])[0];
                let want = if deg < 2 { 0.0 } else { (deg * (deg - 1)) as f64 * x.powi(deg - 2) };
                assert!((d.get(cell) - want).abs() < 1e-9, "deg {deg}");
            }
        }
    }

    #[test]
    fn linear_and_quadratic_examples() {
        let f = poly_field(16, |x| x);
        let d = d1_long(&f, 0).unwrap();
        assert!(f.grid().interior().all(|(c, _)| (d.get(c) - 1.0).abs() < 1e-13));
        let q = poly_field(16, |x| x * x);
        let d2 = d2_long(&q, 0).unwrap();
        assert!(q.grid().interior().all(|(c, _)| (d2.get(c) - 2.0).abs() < 1e-10));
    }

    #[test]
    fn face_gradient_example() {
        let g = Grid::new(1, 5).unwrap();
        let f = ScalarField::from_interior(g, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap().with_ghosts();
        let grad = grad_h(&f).unwrap();
        assert_eq!(grad.axis(0), &[0.0, 5.0, 5.0, 5.0, 5.0, 0.0]);
    }

    #[test]
    fn grad_sq_tilde_of_linear_component() {
        let g = Grid::new(1, 12).unwrap();
        let mut f = VectorField::zeros(g);
        for i in -2..14 {
            f.set_raw([i, 0, 0], Vec3::new(g.center([i, 0, 0])[0], 0.0, 0.0));
        }
        f.assume_ghosts_filled();
        let sq = grad_sq_tilde4(&f).unwrap();
        assert!(g.interior().all(|(c, _)| (sq.get(c) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unit_inner_product_on_unit_domain() {
        let g = Grid::new(1, 20).unwrap();
        let v = Vec3::new(1.0, 1.0, 1.0) * (1.0 / 3f64.sqrt());
        let f = VectorField::constant(g, v);
        assert!((inner_l2(&f, &f).unwrap() - 1.0).abs() < 1e-14);
        let a = VectorField::constant(g, Vec3::new(1.0, 0.0, 0.0));
        let b = VectorField::constant(g, Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(inner_l2(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn unit_z_norms() {
        let g = Grid::new(3, 6).unwrap();
        let f = VectorField::constant(g, Vec3::E_Z);
        let n = norms(&f).unwrap();
        assert!((n.l2 - 1.0).abs() < 1e-14);
        assert_eq!(n.linf, 1.0);
        assert!((n.h1 - 1.0).abs() < 1e-14);
        let z = norms(&VectorField::zeros(g)).unwrap();
        assert_eq!((z.l2, z.linf, z.h1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn inner_product_converges_at_second_order() {
        // ∫₀¹ cos²(πx) dx = 1/2; midpoint rule error is O(h²)
        let errs: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let g = Grid::new(1, n).unwrap();
                let f = ScalarField::from_fn(g, |x| (PI * x[0]).cos() + x[0]);
                // ∫ (cos πx + x)² = 1/2 + 1/3 − 4/π²
                (inner_l2(&f, &f).unwrap() - (0.5 + 1.0 / 3.0 - 4.0 / (PI * PI))).abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }

    #[test]
    fn pairwise_matches_naive_sum() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
    }
}
