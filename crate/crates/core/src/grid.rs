//! Cell-centered grids on the unit cube with a two-deep ghost halo.
//!
//! Cells are indexed from zero along every active axis; the centre of cell
//! `i` sits at `(i + 1/2) h`. Storage covers interior and halo, row-major with
//! x fastest. Axes beyond `dim` have extent one and no halo.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{FieldValue, Vec3};

/// Halo depth on every face.
pub const GHOST: usize = 2;

const MIN_CELLS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if n < MIN_CELLS {
            return Err(Error::TooFewCells(n));
        }
        Ok(Grid { dim, n, h: 1.0 / n as f64 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior cells, `n^dim`.
    pub fn cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// `h^dim`, the weight of one cell in discrete inner products.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Stored extent along `axis`, halo included.
    pub fn extent(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.n + 2 * GHOST
        } else {
            1
        }
    }

    pub fn strides(&self) -> [usize; 3] {
        let e0 = self.extent(0);
        let e1 = self.extent(1);
        [1, e0, e0 * e1]
    }

    pub fn storage_len(&self) -> usize {
        self.extent(0) * self.extent(1) * self.extent(2)
    }

    fn pad(&self, axis: usize) -> isize {
        if axis < self.dim {
            GHOST as isize
        } else {
            0
        }
    }

    /// Storage index of a (possibly ghost) cell. Inactive axes must be 0.
    pub fn index(&self, cell: [isize; 3]) -> usize {
        let s = self.strides();
        (0..3)
            .map(|a| {
                let p = cell[a] + self.pad(a);
                debug_assert!(p >= 0 && (p as usize) < self.extent(a), "cell {cell:?} outside storage");
                p as usize * s[a]
            })
            .sum()
    }

    pub fn interior_index(&self, cell: [usize; 3]) -> usize {
        self.index([cell[0] as isize, cell[1] as isize, cell[2] as isize])
    }

    /// Centre of a (possibly ghost) cell.
    pub fn center(&self, cell: [isize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (cell[a] as f64 + 0.5) * self.h;
        }
        x
    }

    /// Extent of the interior per axis (`n` on active axes, 1 otherwise).
    pub fn interior_shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for item in s.iter_mut().take(self.dim) {
            *item = self.n;
        }
        s
    }

    /// Interior cells in storage order (x fastest).
    pub fn interior(&self) -> impl Iterator<Item = ([usize; 3], usize)> + '_ {
        let [nx, ny, nz] = self.interior_shape();
        (0..nz).flat_map(move |k| {
            (0..ny).flat_map(move |j| (0..nx).map(move |i| ([i, j, k], self.interior_index([i, j, k]))))
        })
    }

    /// Storage indices of the interior cells, x fastest.
    pub fn interior_indices(&self) -> Vec<usize> {
        self.interior().map(|(_, idx)| idx).collect()
    }
}

/// Storage position that the reflective condition copies into position `p`
/// along one axis with `n` interior cells. Identity for interior positions.
fn mirror(p: usize, n: usize) -> usize {
    // storage p = interior i + GHOST
    match p {
        0 => GHOST + 1,
        1 => GHOST,
        _ if p == n + GHOST => n + GHOST - 1,
        _ if p == n + GHOST + 1 => n + GHOST - 2,
        _ => p,
    }
}

/// A grid function: one value per cell, interior plus halo.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    data: Vec<T>,
    ghosts_filled: bool,
}

pub type VectorField = Field<Vec3>;
pub type ScalarField = Field<f64>;

impl<T: FieldValue> Field<T> {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, data: vec![T::zero(); grid.storage_len()], ghosts_filled: true }
    }

    /// A field equal to `value` everywhere, halo included.
    pub fn constant(grid: Grid, value: T) -> Self {
        Field { grid, data: vec![value; grid.storage_len()], ghosts_filled: true }
    }

    /// Interior from a function of the cell centre; halo left unfilled.
    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 3]) -> T) -> Self {
        let mut out = Field { grid, data: vec![T::zero(); grid.storage_len()], ghosts_filled: false };
        for (cell, idx) in grid.interior() {
            out.data[idx] = f(grid.center([cell[0] as isize, cell[1] as isize, cell[2] as isize]));
        }
        out
    }

    /// Interior from values listed in storage order (x fastest).
    pub fn from_interior(grid: Grid, values: &[T]) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::GridMismatch);
        }
        let mut out = Field { grid, data: vec![T::zero(); grid.storage_len()], ghosts_filled: false };
        for ((_, idx), v) in grid.interior().zip(values) {
            out.data[idx] = *v;
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ghosts_filled(&self) -> bool {
        self.ghosts_filled
    }

    pub(crate) fn from_storage(grid: Grid, data: Vec<T>, ghosts_filled: bool) -> Self {
        debug_assert_eq!(data.len(), grid.storage_len());
        Field { grid, data, ghosts_filled }
    }

    pub(crate) fn require_ghosts(&self, op: &'static str) -> Result<()> {
        if self.ghosts_filled {
            Ok(())
        } else {
            Err(Error::GhostsNotFilled(op))
        }
    }

    pub(crate) fn same_grid(&self, other: &Field<impl FieldValue>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn get(&self, cell: [usize; 3]) -> T {
        self.data[self.grid.interior_index(cell)]
    }

    /// Value at any stored cell, halo included.
    pub fn get_raw(&self, cell: [isize; 3]) -> T {
        self.data[self.grid.index(cell)]
    }

    /// Writes an interior value; the halo becomes stale.
    pub fn set(&mut self, cell: [usize; 3], v: T) {
        let idx = self.grid.interior_index(cell);
        self.data[idx] = v;
        self.ghosts_filled = false;
    }

    /// Writes any stored value without touching the fill flag. Used to
    /// supply non-reflective halo data, followed by [`Self::assume_ghosts_filled`].
    pub fn set_raw(&mut self, cell: [isize; 3], v: T) {
        let idx = self.grid.index(cell);
        self.data[idx] = v;
    }

    /// Declares the current halo valid.
    pub fn assume_ghosts_filled(&mut self) {
        self.ghosts_filled = true;
    }

    pub fn storage(&self) -> &[T] {
        &self.data
    }

    /// Mutable storage access; marks the halo stale.
    pub fn storage_mut(&mut self) -> &mut [T] {
        self.ghosts_filled = false;
        &mut self.data
    }

    /// Interior values in storage order.
    pub fn interior_values(&self) -> Vec<T> {
        self.grid.interior().map(|(_, idx)| self.data[idx]).collect()
    }

    /// Fills the halo by even reflection about each face, axis by axis.
    pub fn fill_ghosts(&mut self) {
        for axis in 0..self.grid.dim {
            self.fill_axis(axis);
        }
        self.ghosts_filled = true;
    }

    pub fn with_ghosts(mut self) -> Self {
        self.fill_ghosts();
        self
    }

    #[cfg(test)]
    pub(crate) fn fill_ghosts_in_order(&mut self, order: &[usize]) {
        for &axis in order {
            self.fill_axis(axis);
        }
        self.ghosts_filled = true;
    }

    // Every line along `axis`, across the full stored range of the other
    // axes, so corner and edge ghosts compose the per-axis reflections.
    fn fill_axis(&mut self, axis: usize) {
        let g = self.grid;
        let n = g.n;
        let s = g.strides();
        let ext = [g.extent(0), g.extent(1), g.extent(2)];
        let (o1, o2) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let ghost_pos = [0, 1, n + GHOST, n + GHOST + 1];
        for q in 0..ext[o2] {
            for p in 0..ext[o1] {
                let base = p * s[o1] + q * s[o2];
                for &gp in &ghost_pos {
                    self.data[base + gp * s[axis]] = self.data[base + mirror(gp, n) * s[axis]];
                }
            }
        }
    }

    /// Applies `f` cell-wise over all storage; the halo stays valid if it was.
    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect(), ghosts_filled: self.ghosts_filled }
    }

    /// Cell-wise combination of two fields over all storage.
    pub fn zip_map<U: FieldValue, V: FieldValue>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Result<Field<V>> {
        self.same_grid(other)?;
        Ok(Field {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            ghosts_filled: self.ghosts_filled && other.ghosts_filled,
        })
    }

    /// `Σ cᵢ fᵢ` over all storage. Reflection commutes with linear
    /// combinations, so the halo is valid when every input halo is.
    pub fn linear_combination(terms: &[(f64, &Field<T>)]) -> Result<Field<T>> {
        let (_, first) = terms.first().ok_or_else(|| Error::param("terms", "empty linear combination"))?;
        for (_, f) in terms {
            first.same_grid(f)?;
        }
        let mut data = vec![T::zero(); first.data.len()];
        for (c, f) in terms {
            for (d, v) in data.iter_mut().zip(&f.data) {
                *d += *v * *c;
            }
        }
        Ok(Field { grid: first.grid, data, ghosts_filled: terms.iter().all(|(_, f)| f.ghosts_filled) })
    }

    /// Largest `max_abs` over interior cells.
    pub fn max_abs(&self) -> f64 {
        self.grid.interior().fold(0.0_f64, |m, (_, idx)| m.max(self.data[idx].max_abs()))
    }
}

impl VectorField {
    /// One Cartesian component as a scalar field (halo copied).
    pub fn component(&self, c: usize) -> ScalarField {
        self.map(|v| v.0[c])
    }
}

/// Analytic vector-valued function of position and time.
pub trait VectorFunction: Sync {
    fn eval(&self, x: [f64; 3], t: f64) -> Vec3;
}

impl<F> VectorFunction for F
where
    F: Fn([f64; 3], f64) -> Vec3 + Sync,
{
    fn eval(&self, x: [f64; 3], t: f64) -> Vec3 {
        self(x, t)
    }
}

/// Point-wise interpolation of `func` at cell centres; halo unfilled.
pub fn sample(grid: &Grid, func: &(impl VectorFunction + ?Sized), t: f64) -> Result<VectorField> {
    let mut out = VectorField::zeros(*grid);
    for (cell, idx) in grid.interior() {
        let v = func.eval(grid.center([cell[0] as isize, cell[1] as isize, cell[2] as isize]), t);
        if !v.is_finite() {
            let bad = v.0.into_iter().find(|x| !x.is_finite()).unwrap_or(f64::NAN);
            return Err(Error::NonFinite { cell, value: bad });
        }
        out.data[idx] = v;
    }
    out.ghosts_filled = false;
    Ok(out)
}

/// JSON sidecar describing a binary field snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub dim: usize,
    pub n: usize,
    pub h: f64,
    pub t: f64,
    pub components: usize,
    pub layout: String,
    pub endianness: String,
}

const LAYOUT: &str = "row-major-x-fastest";

/// Writes `<stem>.json` and `<stem>.bin` into `dir`: interior cells only,
/// component-interleaved little-endian f64.
pub fn write_snapshot(field: &VectorField, t: f64, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let g = field.grid();
    let header = SnapshotHeader {
        dim: g.dim(),
        n: g.n(),
        h: g.h(),
        t,
        components: 3,
        layout: LAYOUT.to_string(),
        endianness: "little".to_string(),
    };
    let json_path = dir.join(format!("{stem}.json"));
    let bin_path = dir.join(format!("{stem}.bin"));
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Json { path: json_path.clone(), source: e })?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;

    let file = fs::File::create(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    let mut w = BufWriter::new(file);
    for v in field.interior_values() {
        for c in v.0 {
            w.write_all(&c.to_le_bytes()).map_err(|e| Error::io(&bin_path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&bin_path, e))?;
    Ok((json_path, bin_path))
}

/// Reads a snapshot written by [`write_snapshot`], given its JSON header path.
/// The returned field has its halo filled.
pub fn read_snapshot(json_path: &Path) -> Result<(VectorField, SnapshotHeader)> {
    let text = fs::read_to_string(json_path).map_err(|e| Error::io(json_path, e))?;
    let header: SnapshotHeader =
        serde_json::from_str(&text).map_err(|e| Error::Json { path: json_path.to_path_buf(), source: e })?;
    if header.components != 3 || header.layout != LAYOUT || header.endianness != "little" {
        return Err(Error::Config(format!("unsupported snapshot header in {}", json_path.display())));
    }
    let grid = Grid::new(header.dim, header.n)?;
    let bin_path = json_path.with_extension("bin");
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    if bytes.len() != grid.cells() * 3 * 8 {
        return Err(Error::Config(format!("{} holds {} bytes, expected {}", bin_path.display(), bytes.len(), grid.cells() * 24)));
    }
    let values: Vec<Vec3> = bytes
        .chunks_exact(24)
        .map(|c| {
            let f = |o: usize| f64::from_le_bytes(c[o..o + 8].try_into().expect("8-byte chunk"));
            Vec3([f(0), f(8), f(16)])
        })
        .collect();
    let field = VectorField::from_interior(grid, &values)?.with_ghosts();
    Ok((field, header))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_reciprocal_of_cells() {
        let g = Grid::new(1, 16).unwrap();
        assert_eq!(g.h(), 0.0625);
        assert_eq!(g.cells(), 16);
        let g3 = Grid::new(3, 12).unwrap();
        assert_eq!(g3.cells(), 12 * 12 * 12);
        assert!((g3.h() * 12.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(Grid::new(1, 4), Err(Error::TooFewCells(4))));
        assert!(matches!(Grid::new(0, 16), Err(Error::InvalidDimension(0))));
        assert!(matches!(Grid::new(4, 16), Err(Error::InvalidDimension(4))));
    }

    #[test]
    fn centers_are_half_offset() {
        let g = Grid::new(3, 8).unwrap();
        assert_eq!(g.center([0, 3, 7]), [0.0625, 0.4375, 0.9375]);
        assert_eq!(g.center([-1, 0, 0])[0], -0.0625);
    }

    #[test]
    fn one_dimensional_reflection() {
        let g = Grid::new(1, 5).unwrap();
        let vals: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let f = ScalarField::from_interior(g, &vals).unwrap().with_ghosts();
        // [b,a | a..e | e,d]
        assert_eq!(f.storage(), &[2.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 5.0, 4.0]);
    }

    #[test]
    fn axis_order_does_not_matter() {
        let g = Grid::new(3, 6).unwrap();
        let mut a = ScalarField::from_fn(g, |x| (x[0] * 7.1).sin() + x[1] * x[2] * 3.3 + x[2]);
        let mut b = a.clone();
        a.fill_ghosts_in_order(&[0, 1, 2]);
        b.fill_ghosts_in_order(&[2, 1, 0]);
        assert_eq!(a.storage(), b.storage());
        let mut c = a.clone();
        c.fill_ghosts_in_order(&[1, 0, 2]);
        assert_eq!(a.storage(), c.storage());
    }

    #[test]
    fn corner_ghost_is_double_reflection() {
        let g = Grid::new(2, 5).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] * 10.0 + x[1] * 100.0).with_ghosts();
        assert_eq!(f.get_raw([-1, -2, 0]), f.get([0, 1, 0]));
        assert_eq!(f.get_raw([6, -1, 0]), f.get([3, 0, 0]));
    }
}
