//! Semi-implicit BDF3 projection scheme.
//!
//! Each step solves one constant-coefficient system per component,
//!
//! ```text
//! (11/(6k) − αΔ_(4)) m̃ⁿ⁺³ = (3m̃ⁿ⁺² − 3/2 m̃ⁿ⁺¹ + 1/3 m̃ⁿ)/k
//!                          − m̂ × Δ_(4) m̃̂ + α |∇̃_(4) m̂|² m̂ + f(tⁿ⁺³)
//! mⁿ⁺³ = m̃ⁿ⁺³ / |m̃ⁿ⁺³|
//! ```
//!
//! with `m̂ = 3mⁿ⁺² − 3mⁿ⁺¹ + mⁿ` and `m̃̂` the same combination of the
//! unprojected levels. The optional BDF2 start uses `(3/(2k) − αΔ_(4))` and
//! the two-level extrapolants `2mⁿ⁺¹ − mⁿ`.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, Grid, VectorField, VectorFunction};
use crate::helmholtz::SpectralPlan;
use crate::ops::{grad_h, grad_sq_tilde4, laplacian4};

/// Default lower bound on `|m̃|` before projection.
pub const PROJECTION_FLOOR: f64 = 0.25;

/// Largest accepted normwise backward error of an implicit solve.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

/// Source term added at the implicit time level.
pub trait Forcing: Sync {
    fn sample(&self, t: f64) -> Result<VectorField>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Startup {
    /// Levels 0, 1, 2 taken from the initial source.
    #[default]
    #[serde(rename = "exact")]
    ExactData,
    /// Levels 0, 1 from the source, level 2 by one BDF2 step.
    Bdf2,
}

impl FromStr for Startup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_data" => Ok(Startup::ExactData),
            "bdf2" => Ok(Startup::Bdf2),
            other => Err(Error::Config(format!("unknown startup `{other}` (expected exact or bdf2)"))),
        }
    }
}

impl fmt::Display for Startup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Startup::ExactData => "exact",
            Startup::Bdf2 => "bdf2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub alpha: f64,
    pub k: f64,
    pub t_final: f64,
    pub n_steps: usize,
    pub startup: Startup,
    pub projection_floor: f64,
}

impl SchemeParams {
    /// `n_steps` uniform steps over `[0, t_final]`.
    pub fn new(alpha: f64, t_final: f64, n_steps: usize, startup: Startup) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive (got {alpha})")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::param("t_final", format!("must be positive (got {t_final})")));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        Ok(SchemeParams {
            alpha,
            k: t_final / n_steps as f64,
            t_final,
            n_steps,
            startup,
            projection_floor: PROJECTION_FLOOR,
        })
    }

    /// From a step size; `t_final / k` must be an integer to roundoff.
    pub fn from_step(alpha: f64, k: f64, t_final: f64, startup: Startup) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::param("k", format!("must be positive (got {k})")));
        }
        let n = (t_final / k).round();
        if n < 1.0 || (n * k - t_final).abs() > 1e-12 * t_final {
            return Err(Error::param("k", format!("t_final = {t_final} is not a whole number of steps of {k}")));
        }
        let mut p = Self::new(alpha, t_final, n as usize, startup)?;
        p.k = k;
        Ok(p)
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.projection_floor = floor;
        self
    }

    /// `tⁿ = n k`.
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.k
    }

    /// Whether the damping exceeds the threshold assumed by the convergence theory.
    pub fn alpha_above_7(&self) -> bool {
        self.alpha > 7.0
    }
}

/// The most recent (at most three) levels of `m` and `m̃`, oldest first.
#[derive(Clone, Debug, Default)]
pub struct TimeHistory {
    m: Vec<VectorField>,
    m_tilde: Vec<VectorField>,
    newest: usize,
}

impl TimeHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends level `index`, dropping the oldest once three are held.
    pub fn push(&mut self, index: usize, m_tilde: VectorField, m: VectorField) {
        if self.m.len() == 3 {
            self.m.remove(0);
            self.m_tilde.remove(0);
        }
        self.m.push(m.with_ghosts_if_stale());
        self.m_tilde.push(m_tilde.with_ghosts_if_stale());
        self.newest = index;
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Time index of the newest level.
    pub fn newest_index(&self) -> usize {
        self.newest
    }

    /// Post-projection level `i`, counted from the oldest held.
    pub fn m(&self, i: usize) -> &VectorField {
        &self.m[i]
    }

    pub fn m_tilde(&self, i: usize) -> &VectorField {
        &self.m_tilde[i]
    }

    pub fn latest(&self) -> Option<(&VectorField, &VectorField)> {
        Some((self.m_tilde.last()?, self.m.last()?))
    }

    fn require(&self, need: usize) -> Result<usize> {
        if self.len() < need {
            Err(Error::ShortHistory { have: self.len(), need })
        } else {
            Ok(self.len() - need)
        }
    }
}

trait Refill {
    fn with_ghosts_if_stale(self) -> Self;
}

impl Refill for VectorField {
    fn with_ghosts_if_stale(self) -> Self {
        if self.ghosts_filled() {
            self
        } else {
            self.with_ghosts()
        }
    }
}

/// `(m̂, m̃̂)` from the three newest levels.
pub fn extrapolate(history: &TimeHistory) -> Result<(VectorField, VectorField)> {
    let o = history.require(3)?;
    let comb = |v: &[VectorField]| -> Result<VectorField> {
        Ok(VectorField::linear_combination(&[(3.0, &v[o + 2]), (-3.0, &v[o + 1]), (1.0, &v[o])])?.with_ghosts())
    };
    Ok((comb(&history.m)?, comb(&history.m_tilde)?))
}

/// `(2mⁿ⁺¹ − mⁿ, 2m̃ⁿ⁺¹ − m̃ⁿ)` from the two newest levels.
pub fn extrapolate2(history: &TimeHistory) -> Result<(VectorField, VectorField)> {
    let o = history.require(2)?;
    let comb = |v: &[VectorField]| -> Result<VectorField> {
        Ok(VectorField::linear_combination(&[(2.0, &v[o + 1]), (-1.0, &v[o])])?.with_ghosts())
    };
    Ok((comb(&history.m)?, comb(&history.m_tilde)?))
}

/// Pointwise normalization. Returns the unit field and `min |m̃|`.
pub fn project(m_tilde: &VectorField, floor: f64) -> Result<(VectorField, f64)> {
    let grid = *m_tilde.grid();
    let mut min_norm = f64::INFINITY;
    for (cell, idx) in grid.interior() {
        let r = m_tilde.storage()[idx].norm();
        if !r.is_finite() {
            return Err(Error::NonFinite { cell, value: r });
        }
        if r < floor {
            return Err(Error::Projection { cell, magnitude: r, floor });
        }
        min_norm = min_norm.min(r);
    }
    let mut out = m_tilde.map(|v| v * (1.0 / v.norm()));
    // ghost cells are copies, so projecting them matches projecting then refilling
    if !m_tilde.ghosts_filled() {
        out.fill_ghosts();
    }
    Ok((out, min_norm))
}

/// `−m̂ × Δ_(4) m̃̂ + α |∇̃_(4) m̂|² m̂`.
pub fn explicit_terms(m_hat: &VectorField, m_tilde_hat: &VectorField, alpha: f64) -> Result<VectorField> {
    let lap = laplacian4(m_tilde_hat)?;
    let gsq = grad_sq_tilde4(m_hat)?;
    let grid = *m_hat.grid();
    let mut out = VectorField::zeros(grid);
    {
        let (mh, l, g) = (m_hat.storage(), lap.storage(), gsq.storage());
        let dst = out.storage_mut();
        for (_, idx) in grid.interior() {
            let m = mh[idx];
            dst[idx] = -(m.cross(l[idx])) + m * (alpha * g[idx]);
        }
    }
    Ok(out.with_ghosts())
}

fn add_forcing(rhs: &mut VectorField, forcing: Option<&dyn Forcing>, t: f64) -> Result<()> {
    if let Some(f) = forcing {
        let src = f.sample(t)?;
        *rhs = VectorField::linear_combination(&[(1.0, rhs), (1.0, &src)])?;
    }
    Ok(())
}

/// Right-hand side of the BDF3 system for level `t_next`.
pub fn bdf3_rhs(history: &TimeHistory, params: &SchemeParams, forcing: Option<&dyn Forcing>, t_next: f64) -> Result<VectorField> {
    let o = history.require(3)?;
    let (m_hat, mt_hat) = extrapolate(history)?;
    let k = params.k;
    let mt = &history.m_tilde;
    let mut rhs = VectorField::linear_combination(&[
        (3.0 / k, &mt[o + 2]),
        (-1.5 / k, &mt[o + 1]),
        (1.0 / (3.0 * k), &mt[o]),
        (1.0, &explicit_terms(&m_hat, &mt_hat, params.alpha)?),
    ])?;
    add_forcing(&mut rhs, forcing, t_next)?;
    Ok(rhs)
}

/// Right-hand side of the BDF2 system for level `t_next`.
pub fn bdf2_rhs(history: &TimeHistory, params: &SchemeParams, forcing: Option<&dyn Forcing>, t_next: f64) -> Result<VectorField> {
    let o = history.require(2)?;
    let (m_hat, mt_hat) = extrapolate2(history)?;
    let k = params.k;
    let mt = &history.m_tilde;
    let mut rhs = VectorField::linear_combination(&[
        (2.0 / k, &mt[o + 1]),
        (-0.5 / k, &mt[o]),
        (1.0, &explicit_terms(&m_hat, &mt_hat, params.alpha)?),
    ])?;
    add_forcing(&mut rhs, forcing, t_next)?;
    Ok(rhs)
}

/// Plan for the BDF3 system, shift `11/(6k)`.
pub fn bdf3_plan(grid: Grid, params: &SchemeParams) -> Result<SpectralPlan> {
    SpectralPlan::new(grid, 11.0 / (6.0 * params.k), params.alpha)
}

/// Plan for the BDF2 system, shift `3/(2k)`.
pub fn bdf2_plan(grid: Grid, params: &SchemeParams) -> Result<SpectralPlan> {
    SpectralPlan::new(grid, 1.5 / params.k, params.alpha)
}

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub m_tilde: VectorField,
    pub m: VectorField,
    pub min_mtilde_norm: f64,
    pub solver_residual: f64,
}

fn implicit_stage(plan: &SpectralPlan, rhs: &VectorField, floor: f64) -> Result<StepOutput> {
    let m_tilde = plan.solve(rhs)?;
    let residual = plan.backward_error(&m_tilde, rhs)?;
    if residual.is_nan() || residual > SOLVER_TOLERANCE {
        return Err(Error::SolverResidual { residual, tolerance: SOLVER_TOLERANCE });
    }
    let (m, min_mtilde_norm) = project(&m_tilde, floor)?;
    Ok(StepOutput { m_tilde, m, min_mtilde_norm, solver_residual: residual })
}

fn check_shift(plan: &SpectralPlan, want: f64) -> Result<()> {
    if (plan.shift() - want).abs() > 1e-12 * want {
        return Err(Error::param("plan", format!("shift {} does not match {}", plan.shift(), want)));
    }
    Ok(())
}

/// One BDF3 step from the three newest levels; `plan` must have shift `11/(6k)`.
pub fn bdf3_step(
    history: &TimeHistory,
    params: &SchemeParams,
    plan: &SpectralPlan,
    forcing: Option<&dyn Forcing>,
    t_next: f64,
) -> Result<StepOutput> {
    check_shift(plan, 11.0 / (6.0 * params.k))?;
    let rhs = bdf3_rhs(history, params, forcing, t_next)?;
    implicit_stage(plan, &rhs, params.projection_floor)
}

/// One BDF2 step from the two newest levels; `plan` must have shift `3/(2k)`.
pub fn bdf2_step(
    history: &TimeHistory,
    params: &SchemeParams,
    plan: &SpectralPlan,
    forcing: Option<&dyn Forcing>,
    t_next: f64,
) -> Result<StepOutput> {
    check_shift(plan, 1.5 / params.k)?;
    let rhs = bdf2_rhs(history, params, forcing, t_next)?;
    implicit_stage(plan, &rhs, params.projection_floor)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub min_mtilde_norm: f64,
    pub solver_residual: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: Vec<StepRecord>,
    pub min_mtilde_norm: f64,
    pub max_solver_residual: f64,
    /// Largest face-gradient magnitude of `m` seen after any step.
    pub max_grad_h: f64,
    /// Largest `||m| − 1|` over all cells and computed steps.
    pub max_unit_deviation: f64,
    pub alpha_above_7: bool,
    pub wall_seconds: f64,
}

impl Diagnostics {
    fn observe(&mut self, step: usize, t: f64, out: &StepOutput) -> Result<()> {
        self.steps.push(StepRecord { step, t, min_mtilde_norm: out.min_mtilde_norm, solver_residual: out.solver_residual });
        self.min_mtilde_norm = self.min_mtilde_norm.min(out.min_mtilde_norm);
        self.max_solver_residual = self.max_solver_residual.max(out.solver_residual);
        self.max_grad_h = self.max_grad_h.max(grad_h(&out.m)?.max_abs());
        let dev = out.m.grid().interior().fold(0.0_f64, |d, (_, idx)| d.max((out.m.storage()[idx].norm() - 1.0).abs()));
        self.max_unit_deviation = self.max_unit_deviation.max(dev);
        Ok(())
    }

    /// Writes one JSON object per computed step.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for r in &self.steps {
            serde_json::to_writer(&mut w, r).map_err(|e| Error::Json { path: path.into(), source: e })?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub m: VectorField,
    pub m_tilde: VectorField,
    pub t: f64,
    pub diagnostics: Diagnostics,
}

/// Integrates from `t = 0` to `params.t_final`.
///
/// Runs with fewer than three steps return the sampled source at the final
/// level, since the startup levels are given data.
pub fn run(
    grid: Grid,
    params: &SchemeParams,
    initial: &dyn VectorFunction,
    forcing: Option<&dyn Forcing>,
) -> Result<RunOutput> {
    let start = Instant::now();
    let mut diag = Diagnostics { min_mtilde_norm: f64::INFINITY, alpha_above_7: params.alpha_above_7(), ..Default::default() };
    let exact = |n: usize| -> Result<VectorField> { Ok(sample(&grid, initial, params.time(n))?.with_ghosts()) };
    let wrap = |step: usize, e: Error| Error::Step { step, t: params.time(step), source: Box::new(e) };

    if params.n_steps <= 2 {
        let m = exact(params.n_steps)?;
        diag.wall_seconds = start.elapsed().as_secs_f64();
        return Ok(RunOutput { m_tilde: m.clone(), m, t: params.time(params.n_steps), diagnostics: diag });
    }

    let mut history = TimeHistory::new();
    for n in 0..2 {
        let m = exact(n)?;
        history.push(n, m.clone(), m);
    }
    match params.startup {
        Startup::ExactData => {
            let m = exact(2)?;
            history.push(2, m.clone(), m);
        }
        Startup::Bdf2 => {
            let plan2 = bdf2_plan(grid, params)?;
            let out = bdf2_step(&history, params, &plan2, forcing, params.time(2)).map_err(|e| wrap(2, e))?;
            diag.observe(2, params.time(2), &out).map_err(|e| wrap(2, e))?;
            history.push(2, out.m_tilde, out.m);
        }
    }

    let plan = bdf3_plan(grid, params)?;
    for n in 3..=params.n_steps {
        let t = params.time(n);
        let out = bdf3_step(&history, params, &plan, forcing, t).map_err(|e| wrap(n, e))?;
        diag.observe(n, t, &out).map_err(|e| wrap(n, e))?;
        history.push(n, out.m_tilde, out.m);
    }
    let (mt, m) = history.latest().expect("history is non-empty");
    diag.wall_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput { m: m.clone(), m_tilde: mt.clone(), t: params.time(params.n_steps), diagnostics: diag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;

    fn grid() -> Grid {
        Grid::new(1, 8).unwrap()
    }

    #[test]
    fn step_rounding() {
        assert_eq!(SchemeParams::from_step(10.0, 0.125, 1.0, Startup::ExactData).unwrap().n_steps, 8);
        assert!(SchemeParams::from_step(10.0, 0.3, 1.0, Startup::ExactData).is_err());
        assert!(SchemeParams::new(0.0, 1.0, 10, Startup::ExactData).is_err());
        assert!(!SchemeParams::new(1.0, 1.0, 10, Startup::ExactData).unwrap().alpha_above_7());
    }

    #[test]
    fn startup_parsing() {
        assert_eq!("exact".parse::<Startup>().unwrap(), Startup::ExactData);
        assert_eq!("bdf2".parse::<Startup>().unwrap(), Startup::Bdf2);
        assert!("euler".parse::<Startup>().is_err());
        assert_eq!(serde_json::to_string(&Startup::ExactData).unwrap(), "\"exact\"");
    }

    #[test]
    fn extrapolation_is_exact_on_quadratics() {
        let g = grid();
        let mut h = TimeHistory::new();
        for t in 0..3 {
            let v = VectorField::constant(g, Vec3::new((t * t) as f64, t as f64, 1.0));
            h.push(t, v.clone(), v);
        }
        let (m_hat, _) = extrapolate(&h).unwrap();
        assert_eq!(m_hat.get([3, 0, 0]), Vec3::new(9.0, 3.0, 1.0));
    }

    #[test]
    fn short_history_rejected() {
        let mut h = TimeHistory::new();
        let v = VectorField::constant(grid(), Vec3::E_Z);
        h.push(0, v.clone(), v);
        assert!(matches!(extrapolate(&h), Err(Error::ShortHistory { have: 1, need: 3 })));
    }

    #[test]
    fn projection() {
        let g = grid();
        let (m, r) = project(&VectorField::constant(g, Vec3::new(0.0, 0.0, 2.0)), 0.25).unwrap();
        assert_eq!(m.get([0, 0, 0]), Vec3::E_Z);
        assert_eq!(r, 2.0);
        let (m, _) = project(&VectorField::constant(g, Vec3::new(1.0, 1.0, 1.0)), 0.25).unwrap();
        assert!((m.get([2, 0, 0]) - Vec3::new(1.0, 1.0, 1.0) * (1.0 / 3f64.sqrt())).max_abs() < 1e-16);
        let err = project(&VectorField::constant(g, Vec3::new(0.0, 0.1, 0.0)), 0.25).unwrap_err();
        assert!(matches!(err, Error::Projection { .. }));
    }

    #[test]
    fn equilibrium_is_fixed() {
        let g = grid();
        let p = SchemeParams::new(10.0, 0.1, 10, Startup::ExactData).unwrap();
        let plan = bdf3_plan(g, &p).unwrap();
        let mut h = TimeHistory::new();
        for n in 0..3 {
            let v = VectorField::constant(g, Vec3::E_Z);
            h.push(n, v.clone(), v);
        }
        let out = bdf3_step(&h, &p, &plan, None, p.time(3)).unwrap();
        assert!((out.m_tilde.get([4, 0, 0]) - Vec3::E_Z).max_abs() < 1e-14);
    }

    #[test]
    fn wrong_plan_rejected() {
        let g = grid();
        let p = SchemeParams::new(10.0, 0.1, 10, Startup::ExactData).unwrap();
        let plan = bdf2_plan(g, &p).unwrap();
        let mut h = TimeHistory::new();
        for n in 0..3 {
            let v = VectorField::constant(g, Vec3::E_Z);
            h.push(n, v.clone(), v);
        }
        assert!(bdf3_step(&h, &p, &plan, None, p.time(3)).is_err());
    }

    #[test]
    fn short_runs_return_samples() {
        let g = grid();
        let src = |x: [f64; 3], t: f64| Vec3::new((x[0] + t).sin(), 0.0, (x[0] + t).cos());
        let p = SchemeParams::new(10.0, 0.2, 2, Startup::ExactData).unwrap();
        let out = run(g, &p, &src, None).unwrap();
        assert_eq!(out.m, sample(&g, &src, 0.2).unwrap().with_ghosts());
        assert!(out.diagnostics.steps.is_empty());
    }
}
