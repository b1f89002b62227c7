//! Convergence studies against the manufactured solutions, with CSV/JSON
//! output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{write_snapshot, Grid, VectorField};
use crate::mms::{error_report, observed_order, ErrorReport, ManufacturedSolution, OrderFit, Phase};
use crate::stepper::{run, SchemeParams, Startup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fixed step count, varying mesh; orders against `h`.
    Spatial,
    /// Fixed mesh, varying step count; orders against `k`.
    Temporal,
    /// Meshes paired with `k³ ≈ h⁴`; orders against `k`.
    Coupled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(Mode::Spatial),
            "temporal" => Ok(Mode::Temporal),
            "coupled" => Ok(Mode::Coupled),
            other => Err(Error::Config(format!("unknown mode `{other}` (expected spatial, temporal or coupled)"))),
        }
    }
}

/// Raw study settings, from flags or a JSON document with the same keys.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFlags {
    pub mode: Option<Mode>,
    pub dim: Option<usize>,
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub nt: Option<usize>,
    pub meshes: Option<Vec<usize>>,
    pub steps: Option<Vec<usize>>,
    pub pairs: Option<Vec<(usize, usize)>>,
    pub tfinal: Option<f64>,
    pub startup: Option<Startup>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub snapshot: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl StudyFlags {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: StudyFlags) -> Self {
        overlay!(self, top; mode, dim, alpha, n, nt, meshes, steps, pairs, tfinal, startup, out, workers, seed, snapshot);
        self
    }

    pub fn into_config(self) -> Result<StudyConfig> {
        let mut missing = Vec::new();
        if self.mode.is_none() {
            missing.push("mode");
        }
        if self.dim.is_none() {
            missing.push("dim");
        }
        if self.alpha.is_none() {
            missing.push("alpha");
        }
        match self.mode {
            Some(Mode::Spatial) => {
                if self.meshes.is_none() {
                    missing.push("meshes");
                }
                if self.nt.is_none() {
                    missing.push("nt");
                }
            }
            Some(Mode::Temporal) => {
                if self.n.is_none() {
                    missing.push("n");
                }
                if self.steps.is_none() {
                    missing.push("steps");
                }
            }
            Some(Mode::Coupled) if self.meshes.is_none() && self.pairs.is_none() => missing.push("meshes or pairs"),
            _ => {}
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing required key(s): {}", missing.join(", "))));
        }
        let (mode, dim, alpha) = (self.mode.unwrap(), self.dim.unwrap(), self.alpha.unwrap());
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive (got {alpha})")));
        }
        let t_final = self.tfinal.unwrap_or_else(|| default_t_final(dim));
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("tfinal must be positive (got {t_final})")));
        }
        let points: Vec<StudyPoint> = match mode {
            Mode::Spatial => {
                let nt = self.nt.unwrap();
                self.meshes.unwrap().into_iter().map(|n| StudyPoint { n, nt }).collect()
            }
            Mode::Temporal => {
                let n = self.n.unwrap();
                self.steps.unwrap().into_iter().map(|nt| StudyPoint { n, nt }).collect()
            }
            Mode::Coupled => match self.pairs {
                Some(p) => p.into_iter().map(|(n, nt)| StudyPoint { n, nt }).collect(),
                None => self.meshes.unwrap().into_iter().map(|n| StudyPoint { n, nt: coupled_steps(n, t_final) }).collect(),
            },
        };
        for p in &points {
            if p.n < 5 {
                return Err(Error::Config(format!("mesh {} has fewer than 5 cells", p.n)));
            }
            if p.nt == 0 {
                return Err(Error::Config("step counts must be positive".into()));
            }
        }
        let workers = self.workers.unwrap_or(1);
        if workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(StudyConfig {
            mode,
            dim,
            alpha,
            t_final,
            points,
            startup: self.startup.unwrap_or_default(),
            out: self.out,
            workers,
            seed: self.seed.unwrap_or(0),
            snapshot: self.snapshot.unwrap_or(false),
        })
    }
}

/// Default final time: 0.1 in 1D, 1 otherwise.
pub fn default_t_final(dim: usize) -> f64 {
    if dim == 1 {
        0.1
    } else {
        1.0
    }
}

/// Step counts tabulated for the coupled 3D study at `T = 1`.
pub const COUPLED_TABLE: [(usize, usize); 5] = [(16, 40), (20, 54), (24, 69), (28, 85), (32, 101)];

/// `round(T / h^{4/3})`, snapped to [`COUPLED_TABLE`] when within one step.
pub fn coupled_steps(n: usize, t_final: f64) -> usize {
    let raw = (t_final * (n as f64).powf(4.0 / 3.0)).round().max(1.0) as usize;
    if t_final == 1.0 {
        if let Some(&(_, listed)) = COUPLED_TABLE.iter().find(|&&(m, _)| m == n) {
            if raw.abs_diff(listed) <= 1 {
                return listed;
            }
        }
    }
    raw
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub n: usize,
    pub nt: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub mode: Mode,
    pub dim: usize,
    pub alpha: f64,
    pub t_final: f64,
    pub points: Vec<StudyPoint>,
    pub startup: Startup,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub seed: u64,
    pub snapshot: bool,
}

impl StudyConfig {
    pub fn solution(&self) -> Result<ManufacturedSolution> {
        match self.dim {
            1 => Ok(ManufacturedSolution::one_d()),
            3 => Ok(ManufacturedSolution::three_d()),
            d => ManufacturedSolution::new(d, Phase::CosineProduct),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub nt: usize,
    pub h: f64,
    pub k: f64,
    pub errors: Option<ErrorReport>,
    pub failure: Option<String>,
    pub wall_seconds: f64,
    pub max_unit_deviation: f64,
    pub min_mtilde_norm: f64,
    pub max_solver_residual: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub linf: Option<OrderFit>,
    pub l2: Option<OrderFit>,
    pub h1: Option<OrderFit>,
}

#[derive(Clone, Debug)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub orders: Orders,
    pub wall_seconds: f64,
    /// Final field of the last point, kept when a snapshot is requested.
    pub final_field: Option<(VectorField, f64)>,
}

impl StudyResult {
    pub fn failures(&self) -> Vec<&StudyRow> {
        self.rows.iter().filter(|r| r.failure.is_some()).collect()
    }

    pub fn max_unit_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.max_unit_deviation).fold(0.0, f64::max)
    }
}

fn run_point(cfg: &StudyConfig, p: StudyPoint, keep: bool) -> (StudyRow, Option<(VectorField, f64)>) {
    let start = Instant::now();
    let h = 1.0 / p.n as f64;
    let k = cfg.t_final / p.nt as f64;
    let mut row = StudyRow {
        n: p.n,
        nt: p.nt,
        h,
        k,
        errors: None,
        failure: None,
        wall_seconds: 0.0,
        max_unit_deviation: 0.0,
        min_mtilde_norm: f64::NAN,
        max_solver_residual: 0.0,
    };
    let outcome = (|| -> Result<_> {
        let grid = Grid::new(cfg.dim, p.n)?;
        let sol = cfg.solution()?;
        let forcing = sol.forcing(&grid, cfg.alpha)?;
        let params = SchemeParams::new(cfg.alpha, cfg.t_final, p.nt, cfg.startup)?;
        let out = run(grid, &params, &sol, Some(&forcing))?;
        let errors = error_report(&out.m, &sol, out.t)?;
        Ok((out, errors))
    })();
    let mut kept = None;
    match outcome {
        Ok((out, errors)) => {
            row.errors = Some(errors);
            row.max_unit_deviation = out.diagnostics.max_unit_deviation;
            row.min_mtilde_norm = out.diagnostics.min_mtilde_norm;
            row.max_solver_residual = out.diagnostics.max_solver_residual;
            if keep {
                kept = Some((out.m, out.t));
            }
        }
        Err(e) => row.failure = Some(e.to_string()),
    }
    row.wall_seconds = start.elapsed().as_secs_f64();
    (row, kept)
}

/// Fits one order per norm over the successful rows.
pub fn fit_orders(mode: Mode, rows: &[StudyRow]) -> Orders {
    let pick = |sel: fn(&ErrorReport) -> f64| -> Option<OrderFit> {
        let pairs: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.errors.as_ref().map(|e| (if mode == Mode::Spatial { r.h } else { r.k }, sel(e))))
            .collect();
        observed_order(&pairs).ok()
    };
    Orders { linf: pick(|e| e.linf), l2: pick(|e| e.l2), h1: pick(|e| e.h1) }
}

/// Runs every point, up to `config.workers` at a time. Point failures are
/// recorded in their rows and do not stop the study.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let last = config.points.len().saturating_sub(1);
    let results: Vec<(StudyRow, Option<(VectorField, f64)>)> = pool.install(|| {
        config.points.par_iter().enumerate().map(|(i, &p)| run_point(config, p, config.snapshot && i == last)).collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut final_field = None;
    for (row, f) in results {
        rows.push(row);
        if f.is_some() {
            final_field = f;
        }
    }
    let orders = fit_orders(config.mode, &rows);
    Ok(StudyResult { config: config.clone(), rows, orders, wall_seconds: start.elapsed().as_secs_f64(), final_field })
}

/// `h,k,err_linf,err_l2,err_h1` with 15 significant digits.
pub fn table_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from("h,k,err_linf,err_l2,err_h1\n");
    for r in rows {
        if let Some(e) = &r.errors {
            s.push_str(&format!("{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}\n", r.h, r.k, e.linf, e.l2, e.h1));
        }
    }
    s
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a StudyConfig,
    version: &'static str,
    t_final: f64,
    alpha_above_7: bool,
    wall_seconds: f64,
    points: Vec<BTreeMap<&'static str, serde_json::Value>>,
    max_unit_deviation: f64,
    failures: Vec<BTreeMap<&'static str, serde_json::Value>>,
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Json { path: path.into(), source: e })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Writes `table.csv`, `orders.json`, `meta.json` and, if one was kept, a
/// `final` snapshot. Returns the written paths.
pub fn write_outputs(result: &StudyResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let csv = dir.join("table.csv");
    fs::write(&csv, table_csv(&result.rows)).map_err(|e| Error::io(&csv, e))?;
    written.push(csv);

    let orders = dir.join("orders.json");
    write_json(&orders, &result.orders)?;
    written.push(orders);

    let point_entry = |r: &StudyRow| {
        BTreeMap::from([
            ("n", serde_json::json!(r.n)),
            ("nt", serde_json::json!(r.nt)),
            ("wall_seconds", serde_json::json!(r.wall_seconds)),
            ("max_unit_deviation", serde_json::json!(r.max_unit_deviation)),
            ("min_mtilde_norm", serde_json::json!(r.min_mtilde_norm)),
            ("max_solver_residual", serde_json::json!(r.max_solver_residual)),
        ])
    };
    let meta = Meta {
        config: &result.config,
        version: env!("CARGO_PKG_VERSION"),
        t_final: result.config.t_final,
        alpha_above_7: result.config.alpha > 7.0,
        wall_seconds: result.wall_seconds,
        points: result.rows.iter().map(point_entry).collect(),
        max_unit_deviation: result.max_unit_deviation(),
        failures: result
            .failures()
            .into_iter()
            .map(|r| {
                BTreeMap::from([
                    ("n", serde_json::json!(r.n)),
                    ("nt", serde_json::json!(r.nt)),
                    ("error", serde_json::json!(r.failure)),
                ])
            })
            .collect(),
    };
    let meta_path = dir.join("meta.json");
    write_json(&meta_path, &meta)?;
    written.push(meta_path);

    if let Some((field, t)) = &result.final_field {
        let (json, bin) = write_snapshot(field, *t, dir, "final")?;
        written.push(json);
        written.push(bin);
    }
    Ok(written)
}
