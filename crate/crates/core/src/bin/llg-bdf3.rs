use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use llg_bdf3::grid::write_snapshot;
use llg_bdf3::lemmas::check_all;
use llg_bdf3::mms::error_report;
use llg_bdf3::stepper::{run, SchemeParams, Startup};
use llg_bdf3::study::{default_t_final, run_study, write_outputs, Mode, StudyConfig, StudyFlags};
use llg_bdf3::Grid;

#[derive(Parser)]
#[command(version, about = "BDF3 projection scheme for the Landau-Lifshitz-Gilbert equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single forced simulation against the manufactured solution.
    Run(RunArgs),
    /// Convergence study; writes table.csv, orders.json and meta.json.
    Study(StudyArgs),
    /// Lemma suite; exits nonzero if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 10.0)]
    alpha: f64,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    nt: usize,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long, default_value = "exact")]
    startup: Startup,
    /// Directory for the final snapshot and per-step diagnostics.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// JSON document with the same keys as the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    /// Explicit `N:N_t` pairs for coupled mode, e.g. 16:40,20:54.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pairs: Option<Vec<(usize, usize)>>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    startup: Option<Startup>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the final field of the last point.
    #[arg(long)]
    snapshot: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report array here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected N:N_t, got `{s}`"))?;
    Ok((a.trim().parse().map_err(|e| format!("{a}: {e}"))?, b.trim().parse().map_err(|e| format!("{b}: {e}"))?))
}

impl StudyArgs {
    fn into_config(self) -> llg_bdf3::Result<StudyConfig> {
        let base = match &self.config {
            Some(p) => StudyFlags::from_json_file(p)?,
            None => StudyFlags::default(),
        };
        let flags = StudyFlags {
            mode: self.mode,
            dim: self.dim,
            alpha: self.alpha,
            n: self.n,
            nt: self.nt,
            meshes: self.meshes,
            steps: self.steps,
            pairs: self.pairs,
            tfinal: self.tfinal,
            startup: self.startup,
            out: self.out,
            workers: self.workers,
            seed: self.seed,
            snapshot: self.snapshot.then_some(true),
        };
        base.overlay(flags).into_config()
    }
}

fn cmd_run(a: RunArgs) -> llg_bdf3::Result<bool> {
    let t_final = a.tfinal.unwrap_or_else(|| default_t_final(a.dim));
    let grid = Grid::new(a.dim, a.n)?;
    let cfg = StudyConfig {
        mode: Mode::Spatial,
        dim: a.dim,
        alpha: a.alpha,
        t_final,
        points: vec![],
        startup: a.startup,
        out: None,
        workers: 1,
        seed: 0,
        snapshot: false,
    };
    let sol = cfg.solution()?;
    let forcing = sol.forcing(&grid, a.alpha)?;
    let params = SchemeParams::new(a.alpha, t_final, a.nt, a.startup)?;
    let out = run(grid, &params, &sol, Some(&forcing))?;
    let e = error_report(&out.m, &sol, out.t)?;
    let d = &out.diagnostics;
    println!("t = {}  linf = {:.14e}  l2 = {:.14e}  h1 = {:.14e}", out.t, e.linf, e.l2, e.h1);
    println!(
        "min |m~| = {:.6}  max backward error = {:.2e}  max ||m|-1| = {:.2e}  alpha > 7: {}  wall = {:.2}s",
        d.min_mtilde_norm, d.max_solver_residual, d.max_unit_deviation, d.alpha_above_7, d.wall_seconds
    );
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir).map_err(|e| llg_bdf3::Error::Io { path: dir.clone(), source: e })?;
        write_snapshot(&out.m, out.t, &dir, "final")?;
        d.write_jsonl(&dir.join("steps.jsonl"))?;
        println!("wrote {}", dir.display());
    }
    Ok(true)
}

fn show(fit: Option<llg_bdf3::mms::OrderFit>) -> String {
    fit.map_or_else(|| "-".into(), |f| format!("{:.2}", f.slope))
}

fn cmd_study(a: StudyArgs) -> llg_bdf3::Result<bool> {
    let cfg = a.into_config()?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("study-out"));
    let result = run_study(&cfg)?;
    println!("{:>6} {:>8} {:>22} {:>22} {:>22}", "N", "N_t", "linf", "l2", "h1");
    for r in &result.rows {
        match (&r.errors, &r.failure) {
            (Some(e), _) => println!("{:>6} {:>8} {:>22.14e} {:>22.14e} {:>22.14e}", r.n, r.nt, e.linf, e.l2, e.h1),
            (None, Some(f)) => println!("{:>6} {:>8} failed: {f}", r.n, r.nt),
            _ => {}
        }
    }
    let o = &result.orders;
    println!("order  linf {}  l2 {}  h1 {}", show(o.linf), show(o.l2), show(o.h1));
    for p in write_outputs(&result, &dir)? {
        println!("wrote {}", p.display());
    }
    Ok(result.failures().is_empty())
}

fn cmd_verify(a: VerifyArgs) -> llg_bdf3::Result<bool> {
    let reports = check_all(a.trials, a.seed)?;
    for r in &reports {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let detail = r.detail.as_deref().map(|d| format!("  ({d})")).unwrap_or_default();
        println!("{tag} {:<28} trials {:>5}  max violation {:.3e} (tol {:.0e}){detail}", r.id, r.trials, r.max_violation, r.tolerance);
    }
    if let Some(p) = a.out {
        let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
        std::fs::write(&p, text).map_err(|e| llg_bdf3::Error::Io { path: p.clone(), source: e })?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Study(a) => cmd_study(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
