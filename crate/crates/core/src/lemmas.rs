//! Executable checks of the discrete identities and inequalities behind the
//! scheme's stability argument.
//!
//! Equalities are exact algebraic identities of the discrete operators and
//! are checked to a relative roundoff tolerance. Inequalities are checked
//! with zero tolerance.

use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, VectorField};
use crate::helmholtz::SpectralPlan;
use crate::mms::observed_order;
use crate::ops::{
    cross, d2_short, d4_short, grad_h, grad_h_norm, inner_l2, inner_nabla4, l2_norm, laplacian4, laplacian_h,
    nabla4_norm, tilde4_norm,
};
use crate::vec3::Vec3;

pub const IDENTITY_TOL: f64 = 1e-12;
pub const TELESCOPE_TOL: f64 = 1e-10;
pub const TELESCOPE_SUM_TOL: f64 = 1e-9;
pub const ORDER_TOL: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub id: String,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl LemmaReport {
    fn new(id: impl Into<String>, trials: usize, max_violation: f64, tolerance: f64) -> Self {
        LemmaReport { id: id.into(), trials, max_violation, tolerance, pass: max_violation <= tolerance, detail: None }
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

// ---------------------------------------------------------------------------
// telescope formula

const BDF3: [f64; 4] = [11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0];
const TEST: [f64; 4] = [2.0, -1.0, 0.0, 0.0];

// (sign, [(slot in (a,b,c,d), coefficient index)])
type Term = (f64, &'static [(usize, usize)]);

const TERMS: [Term; 7] = [
    (1.0, &[(0, 0)]),
    (-1.0, &[(1, 0)]),
    (1.0, &[(0, 1), (1, 2)]),
    (-1.0, &[(1, 1), (2, 2)]),
    (1.0, &[(0, 3), (1, 4), (2, 5)]),
    (-1.0, &[(1, 3), (2, 4), (3, 5)]),
    (1.0, &[(0, 6), (1, 7), (2, 8), (3, 9)]),
];

const GROUPS: [std::ops::Range<usize>; 4] = [0..1, 1..3, 3..6, 6..10];

/// Coefficients `α₁…α₁₀` of the BDF3 telescope identity
///
/// ```text
/// ⟨11/6 a − 3b + 3/2 c − 1/3 d, 2a − b⟩
///   = |α₁a|² − |α₁b|² + |α₂a + α₃b|² − |α₂b + α₃c|²
///   + |α₄a + α₅b + α₆c|² − |α₄b + α₅c + α₆d|² + |α₇a + α₈b + α₉c + α₁₀d|²
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopeCoefficients {
    pub alpha: [f64; 10],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Fixture {
    alpha: [f64; 10],
    #[allow(dead_code)]
    residual: f64,
}

const FIXTURE: &str = include_str!("../fixtures/telescope_coefficients.json");

fn upper(i: usize) -> (usize, usize) {
    const PAIRS: [(usize, usize); 10] = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];
    PAIRS[i]
}

fn lhs_matrix() -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = 0.5 * (BDF3[i] * TEST[j] + BDF3[j] * TEST[i]);
        }
    }
    m
}

fn residual_and_jacobian(x: &[f64; 10]) -> (SVector<f64, 10>, SMatrix<f64, 10, 10>) {
    let mut rhs = [[0.0; 4]; 4];
    let mut drhs = [[[0.0; 10]; 4]; 4];
    for (sign, slots) in TERMS {
        let mut v = [0.0; 4];
        for &(s, c) in slots {
            v[s] = x[c];
        }
        for i in 0..4 {
            for j in 0..4 {
                rhs[i][j] += sign * v[i] * v[j];
            }
        }
        for &(s, c) in slots {
            for j in 0..4 {
                drhs[s][j][c] += sign * v[j];
                drhs[j][s][c] += sign * v[j];
            }
        }
    }
    let lhs = lhs_matrix();
    let mut r = SVector::<f64, 10>::zeros();
    let mut jac = SMatrix::<f64, 10, 10>::zeros();
    for e in 0..10 {
        let (i, j) = upper(e);
        r[e] = rhs[i][j] - lhs[i][j];
        for c in 0..10 {
            jac[(e, c)] = drhs[i][j][c];
        }
    }
    (r, jac)
}

fn levenberg_marquardt(mut x: [f64; 10]) -> ([f64; 10], f64) {
    let mut lambda = 1e-3;
    let (mut r, mut jac) = residual_and_jacobian(&x);
    let mut cost = r.norm_squared();
    for _ in 0..500 {
        if cost.sqrt() < 1e-15 {
            break;
        }
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * r;
        let mut a = jtj;
        for i in 0..10 {
            a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
        }
        let Some(step) = a.lu().solve(&(-g)) else {
            lambda *= 10.0;
            continue;
        };
        let mut trial = x;
        for i in 0..10 {
            trial[i] += step[i];
        }
        let (tr, tj) = residual_and_jacobian(&trial);
        let tc = tr.norm_squared();
        if tc < cost {
            x = trial;
            r = tr;
            jac = tj;
            cost = tc;
            lambda = (lambda * 0.3).max(1e-15);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (x, cost.sqrt())
}

impl TelescopeCoefficients {
    /// Solves the ten coefficient-matching equations by Levenberg-Marquardt
    /// from a fixed sequence of seeded starts, then fixes the sign of each
    /// squared group so its leading coefficient is positive.
    pub fn derive() -> Result<Self> {
        let mut best = f64::INFINITY;
        for seed in 0..64u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start: [f64; 10] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let (x, res) = levenberg_marquardt(start);
            best = best.min(res);
            if res <= TELESCOPE_TOL && x[0].abs() > 1e-3 {
                return Ok(TelescopeCoefficients { alpha: normalize(x) });
            }
        }
        Err(Error::TelescopeFit(best))
    }

    /// The committed fixture, re-verified against the matching equations.
    pub fn pinned() -> Result<Self> {
        let f: Fixture = serde_json::from_str(FIXTURE).map_err(|e| Error::Config(format!("telescope fixture: {e}")))?;
        let c = TelescopeCoefficients { alpha: f.alpha };
        let r = c.residual();
        if r > TELESCOPE_TOL {
            return Err(Error::TelescopeFit(r));
        }
        Ok(c)
    }

    /// Euclidean norm of the coefficient-matching residual.
    pub fn residual(&self) -> f64 {
        residual_and_jacobian(&self.alpha).0.norm()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({ "alpha": self.alpha, "residual": self.residual() }))
            .expect("plain floats serialize")
    }

    /// Right side for scalar arguments `(a, b, c, d) = (eⁿ⁺¹, eⁿ, eⁿ⁻¹, eⁿ⁻²)`.
    pub fn rhs_scalar(&self, e: [f64; 4]) -> f64 {
        let mut sum = 0.0;
        for (sign, slots) in TERMS {
            let v: f64 = slots.iter().map(|&(s, c)| self.alpha[c] * e[s]).sum();
            sum += sign * v * v;
        }
        sum
    }

    fn rhs_fields(&self, e: [&VectorField; 4]) -> Result<f64> {
        let mut sum = 0.0;
        for (sign, slots) in TERMS {
            let parts: Vec<(f64, &VectorField)> = slots.iter().map(|&(s, c)| (self.alpha[c], e[s])).collect();
            let v = VectorField::linear_combination(&parts)?;
            sum += sign * l2_norm(&v).powi(2);
        }
        Ok(sum)
    }

    // squared norm of one of the combined groups at a given shift position
    fn group_sq(&self, group: usize, e: &[&VectorField]) -> Result<f64> {
        let range = GROUPS[group].clone();
        let parts: Vec<(f64, &VectorField)> = range.clone().zip(e).map(|(c, f)| (self.alpha[c], *f)).collect();
        Ok(l2_norm(&VectorField::linear_combination(&parts)?).powi(2))
    }
}

fn normalize(mut x: [f64; 10]) -> [f64; 10] {
    for g in GROUPS {
        if x[g.start] < 0.0 {
            for v in &mut x[g] {
                *v = -*v;
            }
        }
    }
    x
}

pub fn lhs_scalar(e: [f64; 4]) -> f64 {
    let a: f64 = BDF3.iter().zip(e).map(|(c, v)| c * v).sum();
    let b: f64 = TEST.iter().zip(e).map(|(c, v)| c * v).sum();
    a * b
}

fn lhs_fields(e: [&VectorField; 4]) -> Result<f64> {
    let a = VectorField::linear_combination(&[(BDF3[0], e[0]), (BDF3[1], e[1]), (BDF3[2], e[2]), (BDF3[3], e[3])])?;
    let b = VectorField::linear_combination(&[(TEST[0], e[0]), (TEST[1], e[1])])?;
    inner_l2(&a, &b)
}

/// Random field with components uniform in `[−1, 1]`, halo filled.
pub fn random_field(grid: Grid, rng: &mut impl Rng) -> VectorField {
    VectorField::from_fn(grid, |_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .with_ghosts()
}

/// Random field, smoothed by one application of `(I − Δ_(4))⁻¹` when `smooth`.
pub fn random_field_smoothed(grid: Grid, rng: &mut impl Rng, smooth: bool) -> Result<VectorField> {
    let f = random_field(grid, rng);
    if smooth {
        SpectralPlan::new(grid, 1.0, 1.0)?.solve(&f)
    } else {
        Ok(f)
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff.abs() / scale
    } else {
        diff.abs()
    }
}

// amount by which `lhs ≤ bound` is broken, relative to the bound
fn excess(lhs: f64, bound: f64) -> f64 {
    if lhs <= bound {
        0.0
    } else if bound > 0.0 {
        (lhs - bound) / bound
    } else {
        lhs - bound
    }
}

fn max_over(trials: usize, f: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<f64> {
    let v: Vec<f64> = (0..trials).into_par_iter().map(f).collect::<Result<_>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// The identity on random vector-field quadruples, 1D `N = 16` and 3D `N = 8`.
pub fn check_telescope(coeffs: &TelescopeCoefficients, trials: usize, seed: u64) -> Result<Vec<LemmaReport>> {
    let mut out = Vec::new();
    for (dim, n) in [(1, 16), (3, 8)] {
        let grid = Grid::new(dim, n)?;
        let worst = max_over(trials, |t| {
            let mut rng = trial_rng(seed ^ 0x7e1e, t);
            let e: Vec<VectorField> = (0..4).map(|_| random_field(grid, &mut rng)).collect();
            let refs = [&e[0], &e[1], &e[2], &e[3]];
            let scale: f64 = e.iter().map(|f| l2_norm(f).powi(2)).sum();
            Ok(rel(lhs_fields(refs)? - coeffs.rhs_fields(refs)?, scale))
        })?;
        out.push(LemmaReport::new(format!("telescope/{dim}d"), trials, worst, TELESCOPE_TOL));
    }
    Ok(out)
}

/// Sums the identity over a sequence of `len` random fields and compares
/// against the collapsed right side.
pub fn check_telescope_sum(coeffs: &TelescopeCoefficients, len: usize, seed: u64) -> Result<LemmaReport> {
    if len < 4 {
        return Err(Error::param("len", "need at least four levels"));
    }
    let grid = Grid::new(1, 16)?;
    let mut rng = trial_rng(seed ^ 0x5e0, 0);
    let e: Vec<VectorField> = (0..len).map(|_| random_field(grid, &mut rng)).collect();
    let last = len - 1;
    let mut lhs = 0.0;
    let mut remainder = 0.0;
    for n in 2..last {
        let quad = [&e[n + 1], &e[n], &e[n - 1], &e[n - 2]];
        lhs += lhs_fields(quad)?;
        remainder += coeffs.group_sq(3, &quad)?;
    }
    let top = [&e[last], &e[last - 1], &e[last - 2]];
    let bottom = [&e[2], &e[1], &e[0]];
    let mut rhs = remainder;
    for g in 0..3 {
        rhs += coeffs.group_sq(g, &top)? - coeffs.group_sq(g, &bottom)?;
    }
    let scale: f64 = e.iter().map(|f| l2_norm(f).powi(2)).sum();
    Ok(LemmaReport::new("telescope_sum", 1, rel(lhs - rhs, scale), TELESCOPE_SUM_TOL)
        .with_detail(format!("{len} levels")))
}

// ---------------------------------------------------------------------------
// operator lemmas

#[derive(Default)]
struct OperatorTrial {
    sum1: f64,
    sum2: f64,
    sum3: f64,
    self_adjoint: f64,
    cross_identity: f64,
    lower: f64,
    upper: f64,
    tilde: f64,
    cross_gradient: f64,
}

fn operator_trial(grid: Grid, rng: &mut ChaCha8Rng, smooth: bool) -> Result<OperatorTrial> {
    let f = random_field_smoothed(grid, rng, smooth)?;
    let g = random_field_smoothed(grid, rng, smooth)?;
    let gh = random_field(grid, rng);
    let mut t = OperatorTrial::default();

    // identities are normalized by ‖A‖ ‖f‖ ‖g‖ with ‖A‖ the spectral radius
    // of the operator involved, the size of the roundoff they can carry
    let h = grid.h();
    let d = grid.dim() as f64;
    let fg_norm = l2_norm(&f) * l2_norm(&g);

    let gf = grad_h(&f)?;
    let gg = grad_h(&g)?;
    let lap_h = laplacian_h(&f)?;
    t.sum1 = rel(-inner_l2(&lap_h, &g)? - gf.inner(&gg)?, 4.0 * d / (h * h) * fg_norm);

    for axis in 0..grid.dim() {
        let lhs = inner_l2(&d4_short(&f, axis)?, &g)?;
        let rhs = inner_l2(&d2_short(&f, axis)?, &d2_short(&g, axis)?)?;
        t.sum2 = t.sum2.max(rel(lhs - rhs, 16.0 / h.powi(4) * fg_norm));
    }

    let lap4_f = laplacian4(&f)?;
    let lap4_g = laplacian4(&g)?;
    let scale4 = 16.0 * d / (3.0 * h * h) * fg_norm;
    let a = -inner_l2(&lap4_f, &g)?;
    t.sum3 = rel(a - inner_nabla4(&f, &g)?, scale4);
    t.self_adjoint = rel(a + inner_l2(&f, &lap4_g)?, scale4);

    let lhs = inner_l2(&cross(&f, &lap4_g)?, &gh)?;
    let rhs = inner_l2(&cross(&gh, &f)?, &lap4_g)?;
    t.cross_identity = rel(lhs - rhs, f.max_abs() * l2_norm(&lap4_g) * l2_norm(&gh));

    let nh = grad_h_norm(&f)?;
    let n4 = nabla4_norm(&f)?;
    t.lower = excess(nh, n4);
    t.upper = excess(n4, 2.0 / 3f64.sqrt() * nh);
    t.tilde = excess(tilde4_norm(&f)?, 5.0 / 3.0 * nh);

    let fg = cross(&f, &g)?;
    t.cross_gradient = excess(nabla4_norm(&fg)?.powi(2), 4.0 / 3.0 * grad_h_norm(&fg)?.powi(2));
    Ok(t)
}

/// Summation by parts, gradient-norm bounds and the cross-product identity
/// on random reflective-ghost fields, 1D `N = 16` and 3D `N = 8`. Odd
/// trials use smoothed fields.
pub fn check_operator_lemmas(trials: usize, seed: u64) -> Result<Vec<LemmaReport>> {
    let mut out = Vec::new();
    for (dim, n) in [(1, 16), (3, 8)] {
        let grid = Grid::new(dim, n)?;
        let results: Vec<OperatorTrial> = (0..trials)
            .into_par_iter()
            .map(|t| operator_trial(grid, &mut trial_rng(seed ^ 0x0b5, t + dim * trials), t % 2 == 1))
            .collect::<Result<_>>()?;
        let worst = |sel: fn(&OperatorTrial) -> f64| results.iter().map(sel).fold(0.0, f64::max);
        let rows: [(&str, f64, f64); 9] = [
            ("sum1", worst(|t| t.sum1), IDENTITY_TOL),
            ("sum2", worst(|t| t.sum2), IDENTITY_TOL),
            ("sum3", worst(|t| t.sum3), IDENTITY_TOL),
            ("self_adjoint", worst(|t| t.self_adjoint), IDENTITY_TOL),
            ("cross_identity", worst(|t| t.cross_identity), IDENTITY_TOL),
            ("gradient_lower", worst(|t| t.lower), 0.0),
            ("gradient_upper", worst(|t| t.upper), 0.0),
            ("tilde_bound", worst(|t| t.tilde), 0.0),
            ("cross_gradient", worst(|t| t.cross_gradient), 0.0),
        ];
        for (id, v, tol) in rows {
            out.push(LemmaReport::new(format!("{id}/{dim}d"), trials, v, tol));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// projection

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = v.norm();
        if r > 0.1 && r <= 1.0 {
            return v * (1.0 / r);
        }
    }
}

/// `‖m̃/|m̃| − m‖₂ ≤ 2‖m̃ − m‖₂` for unit `m` and `|m̃| ≥ ½`, 3D `N = 8`.
/// Every fourth trial is a pure rescaling of `m`. The detail string
/// carries the largest observed `‖∇_h e‖ / (‖∇_h ẽ‖ + ‖ẽ‖)`.
pub fn check_projection_stability(trials: usize, seed: u64) -> Result<LemmaReport> {
    let grid = Grid::new(3, 8)?;
    let results: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let mut rng = trial_rng(seed ^ 0x9e0, t);
            let radius = rng.gen_range(0.0..1.5);
            let scaling = t % 4 == 3;
            let mut unit = Vec::with_capacity(grid.cells());
            let mut pert = Vec::with_capacity(grid.cells());
            for _ in 0..grid.cells() {
                let u = random_unit(&mut rng);
                let v = if scaling {
                    u * rng.gen_range(0.5..2.0)
                } else {
                    loop {
                        let d = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        let v = u + d * radius;
                        if v.norm() >= 0.5 {
                            break v;
                        }
                    }
                };
                unit.push(u);
                pert.push(v);
            }
            let u = Field::from_interior(grid, &unit)?.with_ghosts();
            let mt = Field::from_interior(grid, &pert)?.with_ghosts();
            let m = mt.map(|v| v * (1.0 / v.norm()));
            let e = VectorField::linear_combination(&[(1.0, &m), (-1.0, &u)])?;
            let et = VectorField::linear_combination(&[(1.0, &mt), (-1.0, &u)])?;
            let viol = excess(l2_norm(&e), 2.0 * l2_norm(&et));
            let gden = grad_h_norm(&et)? + l2_norm(&et);
            let ratio = if gden > 0.0 { grad_h_norm(&e)? / gden } else { 0.0 };
            Ok((viol, ratio))
        })
        .collect::<Result<_>>()?;
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let ratio = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(LemmaReport::new("projection_stability", trials, worst, 0.0)
        .with_detail(format!("max gradient ratio {ratio:.4}")))
}

// ---------------------------------------------------------------------------
// boundary extrapolation

/// Largest mismatch between the reflected halo at `x = 0` and the function
/// evaluated at the ghost centres, 1D grid with `n` cells.
pub fn mirror_error(f: impl Fn(f64) -> f64, n: usize) -> Result<f64> {
    let grid = Grid::new(1, n)?;
    let field = Field::<f64>::from_fn(grid, |x| f(x[0])).with_ghosts();
    let mut err = 0.0_f64;
    for i in [-1isize, -2] {
        let x = grid.center([i, 0, 0])[0];
        err = err.max((field.get_raw([i, 0, 0]) - f(x)).abs());
    }
    Ok(err)
}

pub const BOUNDARY_MESHES: [usize; 5] = [16, 32, 64, 128, 256];

/// Probe (a) has vanishing first and third normal derivatives at `x = 0`
/// and should show order 5; probe (b) only a vanishing first derivative
/// and should show order 3. A constant is reproduced exactly.
pub fn check_boundary_extrapolation() -> Result<Vec<LemmaReport>> {
    let probes: [(&str, fn(f64) -> f64, f64); 2] = [
        ("boundary_order5", |x| (PI * x).cos() + (PI * x).sin().powi(5), 5.0),
        ("boundary_order3", |x| (PI * x).cos() + (PI * x).sin().powi(3), 3.0),
    ];
    let mut out = Vec::new();
    for (id, f, want) in probes {
        let pairs: Vec<(f64, f64)> =
            BOUNDARY_MESHES.iter().map(|&n| Ok((1.0 / n as f64, mirror_error(f, n)?))).collect::<Result<_>>()?;
        let fit = observed_order(&pairs)?;
        out.push(
            LemmaReport::new(id, pairs.len(), (fit.slope - want).abs(), ORDER_TOL)
                .with_detail(format!("order {:.4}, expected {want}", fit.slope)),
        );
    }
    let c = BOUNDARY_MESHES.iter().map(|&n| mirror_error(|_| 0.7, n)).collect::<Result<Vec<_>>>()?;
    out.push(LemmaReport::new("boundary_constant", c.len(), c.into_iter().fold(0.0, f64::max), 0.0));
    Ok(out)
}

/// Every check, as run by `verify`.
pub fn check_all(trials: usize, seed: u64) -> Result<Vec<LemmaReport>> {
    let coeffs = TelescopeCoefficients::pinned()?;
    let mut out = vec![LemmaReport::new("telescope_coefficients", 1, coeffs.residual(), TELESCOPE_TOL)];
    out.extend(check_telescope(&coeffs, trials, seed)?);
    out.push(check_telescope_sum(&coeffs, 20, seed)?);
    out.extend(check_operator_lemmas(trials, seed)?);
    out.push(check_projection_stability(trials, seed)?);
    out.extend(check_boundary_extrapolation()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_matches_fixture() {
        let d = TelescopeCoefficients::derive().unwrap();
        let p = TelescopeCoefficients::pinned().unwrap();
        assert!(d.residual() <= TELESCOPE_TOL);
        for (a, b) in d.alpha.iter().zip(&p.alpha) {
            assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", d.alpha, p.alpha);
        }
        assert!(p.alpha[0] != 0.0);
    }

    #[test]
    fn scalar_identity() {
        let c = TelescopeCoefficients::pinned().unwrap();
        assert_eq!(c.rhs_scalar([0.0; 4]), 0.0);
        assert!(c.rhs_scalar([1.3; 4]).abs() < 1e-12);
        assert!(lhs_scalar([1.3; 4]).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let e: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let scale: f64 = e.iter().map(|v| v * v).sum();
            assert!((lhs_scalar(e) - c.rhs_scalar(e)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn mirror_is_exact_for_even_functions() {
        assert_eq!(mirror_error(|x| (PI * x).cos(), 16).unwrap(), 0.0);
    }

    #[test]
    fn report_pass_flag() {
        assert!(LemmaReport::new("x", 1, 0.0, 0.0).pass);
        assert!(!LemmaReport::new("x", 1, 1e-9, 1e-10).pass);
    }
}
