//! Command-line front end: `eval`, `solve`, `barrier`, `regularity`, `bench`.
//!
//! Exit status 0 on success, 2 for invalid configuration (field-level error
//! JSON on stderr), 3 for numerical failures (with the solve report when
//! there is one), 1 for I/O errors.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::barrier::{decompose, find_c, Barrier, BarrierResult, Decomposition};
use crate::error::{Error, Result};
use crate::fracsublap::FracSubLaplacian;
use crate::functions;
use crate::grid::{FieldWithExterior, Grid};
use crate::hgroup::{GaugeBall, GroupPoint};
use crate::mixedop::{residual_field, MixedOperator};
use crate::regularity::{dyadic_profile_at, fit_holder, HolderFit};
use crate::solver::{solve_dirichlet_with, solver_quadrature, DirichletProblem, GridOperator, SolveReport, SolverOptions};

pub use config::{RunConfig, DEFAULT_CONFIG};
use output::{coordinate_header, write_csv, write_json};

#[derive(Parser, Debug)]
#[command(name = "hmix", version, about = "Mixed Pucci / fractional sub-Laplacian operators on the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; the shipped default when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (affects speed only).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomised probes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Evaluate L u at configured points.
    Eval,
    /// Solve the Dirichlet problem.
    Solve,
    /// Search for the barrier constant C.
    Barrier,
    /// Dyadic oscillation profile and Hölder fit.
    Regularity,
    /// Time the main kernels.
    Bench,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Domain(_) => 2,
        Error::Numerical { .. } | Error::SearchExhausted(_) => 3,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

pub fn error_json(e: &Error) -> serde_json::Value {
    match e {
        Error::Config { field, message } => json!({"error": "config", "field": field, "message": message}),
        Error::Domain(m) => json!({"error": "domain", "message": m}),
        Error::Numerical { message, report } => json!({"error": "numerical", "message": message, "report": report}),
        Error::SearchExhausted(m) => json!({"error": "search_exhausted", "message": m}),
        Error::Io(err) => json!({"error": "io", "message": err.to_string()}),
        Error::Json(err) => json!({"error": "json", "message": err.to_string()}),
    }
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::config("config", format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)
        }
        None => RunConfig::from_json(DEFAULT_CONFIG),
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

/// Loads the configuration and runs the command on a pool of `--threads` workers.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = load_config(cli.config.as_deref())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| execute(cli.command, &cfg, &cli.out, cli.seed))
}

fn need<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::config(name, "section required by this command is missing"))
}

/// Runs one command with an already resolved configuration.
pub fn execute(command: Command, cfg: &RunConfig, out: &Path, seed: u64) -> Result<String> {
    fs::create_dir_all(out)?;
    match command {
        Command::Eval => eval(cfg, out, seed),
        Command::Solve => solve(cfg, out).map(|(_, s)| s),
        Command::Barrier => barrier(cfg, out),
        Command::Regularity => regularity(cfg, out),
        Command::Bench => bench(cfg, out),
    }
}

fn eval(cfg: &RunConfig, out: &Path, seed: u64) -> Result<String> {
    let sec = need(&cfg.eval, "eval")?;
    let n = cfg.params.n();
    let u = functions::parse(&sec.field, n)?;
    let op = MixedOperator::for_field(cfg.params, &cfg.quadrature, &u)?;
    let mut points = Vec::new();
    for (i, p) in sec.points.iter().enumerate() {
        let gp = GroupPoint::from_coords(n, p).map_err(|e| Error::config(format!("eval.points[{i}]"), e.to_string()))?;
        points.push(gp);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sec.random_points {
        let c: Vec<f64> = (0..2 * n + 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        points.push(GroupPoint::from_coords(n, &c)?);
    }
    let mut rows = Vec::new();
    for p in &points {
        let e = op.evaluate(&u, p)?;
        let mut row = p.coords().to_vec();
        row.extend([e.value, e.local, e.nonlocal.value, e.nonlocal.tail_bound]);
        rows.push(row);
    }
    let mut header = coordinate_header(n);
    header.extend(["L".into(), "local".into(), "frac".into(), "tail_bound".into()]);
    let prov = cfg.provenance();
    write_csv(&out.join("eval.csv"), &prov, &header, &rows)?;
    Ok(format!("evaluated L at {} point(s) -> {}", rows.len(), out.join("eval.csv").display()))
}

fn solve_problem(cfg: &RunConfig) -> Result<(DirichletProblem, Grid, SolverOptions)> {
    let sec = need(&cfg.solve, "solve")?;
    let n = cfg.params.n();
    let omega = sec.omega.to_ball("solve.omega")?;
    let f = functions::parse(&sec.f, n).map_err(|e| rename(e, "solve.f"))?;
    let g = functions::parse(&sec.g, n).map_err(|e| rename(e, "solve.g"))?;
    let prob = DirichletProblem::new(omega.clone(), f, g, cfg.params)?;
    let grid = Grid::for_ball(&omega, sec.grid.n_xy, sec.grid.n_t).map_err(|e| rename(e, "solve.grid"))?;
    let opts = SolverOptions { scheme: sec.scheme, quadrature: sec.quadrature.clone(), ..SolverOptions::default() };
    Ok((prob, grid, opts))
}

fn rename(e: Error, field: &str) -> Error {
    match e {
        Error::Config { message, .. } => Error::config(field, message),
        other => other,
    }
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<(FieldWithExterior, String)> {
    let sec = need(&cfg.solve, "solve")?;
    let (prob, grid, opts) = solve_problem(cfg)?;
    fs::create_dir_all(out)?;
    let (u, report) = solve_dirichlet_with(&prob, grid, sec.tol, sec.max_iter, &opts)?;
    let prov = cfg.provenance();
    let grid = u.grid().clone();
    let n = grid.n();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            let mut r = grid.point(i).coords().to_vec();
            r.push(u.values()[i]);
            r
        })
        .collect();
    let mut header = coordinate_header(n);
    header.push("u".into());
    write_csv(&out.join("solution.csv"), &prov, &header, &rows)?;
    if sec.write_residual {
        let q = opts.quadrature.clone().unwrap_or_else(|| solver_quadrature(&grid));
        let res = residual_field(&u, &prob.f, &prob.params, &q)?;
        let rows: Vec<Vec<f64>> = grid
            .interior_indices()
            .iter()
            .zip(&res)
            .map(|(&i, r)| {
                let mut row = grid.point(i).coords().to_vec();
                row.push(*r);
                row
            })
            .collect();
        let mut header = coordinate_header(n);
        header.push("residual".into());
        write_csv(&out.join("residual.csv"), &prov, &header, &rows)?;
    }
    #[derive(Serialize)]
    struct Body<'a> {
        report: &'a SolveReport,
    }
    write_json(&out.join("report.json"), &prov, &Body { report: &report })?;
    if !report.converged {
        return Err(Error::Numerical {
            message: format!("no convergence: residual {:e} > tol {:e}", report.residual_sup, report.tolerance),
            report: Some(Box::new(report)),
        });
    }
    let summary = format!(
        "solved in {} iteration(s), residual {:.3e} -> {}",
        report.iterations,
        report.residual_sup,
        out.join("solution.csv").display()
    );
    Ok((u, summary))
}

fn barrier(cfg: &RunConfig, out: &Path) -> Result<String> {
    let sec = need(&cfg.barrier, "barrier")?;
    let omega = sec.omega.to_ball("barrier.omega")?;
    let result = find_c(&cfg.params, &omega, &sec.search(&cfg.quadrature))?;
    let point = match &sec.point {
        Some(p) => GroupPoint::from_coords(cfg.params.n(), p).map_err(|e| Error::config("barrier.point", e.to_string()))?,
        None => omega.center().clone(),
    };
    let dec = decompose(&cfg.params, &cfg.quadrature, &Barrier::new(result.c)?, &omega, &point)?;
    #[derive(Serialize)]
    struct Body<'a> {
        result: &'a BarrierResult,
        decomposition: &'a Decomposition,
    }
    write_json(&out.join("barrier.json"), &cfg.provenance(), &Body { result: &result, decomposition: &dec })?;
    let t = dec.terms;
    Ok(format!(
        "C = {}\ncertified max L φ_h = {:.6e}\ndecomposition at {}: local {:.6e}, I1 {:.6e}, I2 {:.6e}, I3 {:.6e}, I4 {:.6e}, I5 {:.6e}\nsum {:.6e}, direct {:.6e}",
        result.c, result.certificate.certified_max, point, t[0], t[1], t[2], t[3], t[4], t[5], dec.sum, dec.direct
    ))
}

fn regularity(cfg: &RunConfig, out: &Path) -> Result<String> {
    let sec = need(&cfg.regularity, "regularity")?;
    let n = cfg.params.n();
    let (u, center) = if sec.field == "solve" {
        let scratch = out.join("regularity_solve");
        let (u, _) = solve(cfg, &scratch)?;
        let c = need(&cfg.solve, "solve")?.omega.to_ball("solve.omega")?.center().clone();
        (u, c)
    } else {
        let omega = match &sec.omega {
            Some(b) => b.to_ball("regularity.omega")?,
            None => GaugeBall::centered(n, 1.0)?,
        };
        let grid = Arc::new(Grid::for_ball(&omega, sec.grid.n_xy, sec.grid.n_t)?);
        let f = functions::parse(&sec.field, n).map_err(|e| rename(e, "regularity.field"))?;
        (FieldWithExterior::sample(grid, Arc::new(f))?, omega.center().clone())
    };
    let profile = dyadic_profile_at(&u, &center, sec.k_max)?;
    let fit = fit_holder(&profile)?;
    let prov = cfg.provenance();
    let rows: Vec<Vec<f64>> = profile
        .entries
        .iter()
        .map(|e| vec![e.k as f64, e.radius, e.osc, e.nodes as f64])
        .collect();
    let header: Vec<String> = ["k", "radius", "osc", "nodes"].iter().map(|s| s.to_string()).collect();
    write_csv(&out.join("profile.csv"), &prov, &header, &rows)?;
    #[derive(Serialize)]
    struct Body<'a> {
        fit: &'a HolderFit,
        warning: &'a Option<String>,
        non_increasing: bool,
    }
    write_json(
        &out.join("fit.json"),
        &prov,
        &Body { fit: &fit, warning: &profile.warning, non_increasing: profile.is_non_increasing() },
    )?;
    Ok(format!("gamma_fit = {:.4}, delta_fit = {:.4} over k = {:?}", fit.gamma_fit, fit.delta_fit, fit.used))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn bench(cfg: &RunConfig, out: &Path) -> Result<String> {
    let default = config::BenchSection::default();
    let sec = cfg.bench.as_ref().unwrap_or(&default);
    let repeats = sec.repeats.max(1);
    let n = cfg.params.n();
    let u = functions::gaussian_gauge(n, 1.0, 1.0);
    let frac = FracSubLaplacian::for_field(cfg.params, &cfg.quadrature, &u)?;
    let pts: Vec<GroupPoint> = (0..16)
        .map(|k| {
            let a = k as f64 / 16.0;
            let mut c = vec![0.0; 2 * n + 1];
            c[0] = a - 0.5;
            c[2 * n] = 0.25 - a * 0.5;
            GroupPoint::from_coords(n, &c)
        })
        .collect::<Result<_>>()?;
    let omega = GaugeBall::centered(n, 1.0)?;
    let g = functions::parse("tanh_x:1", n)?;
    let mut t_eval = Vec::new();
    let mut t_build = Vec::new();
    let mut t_solve = Vec::new();
    for _ in 0..repeats {
        let s = Instant::now();
        for p in &pts {
            frac.eval(&u, p)?;
        }
        t_eval.push(s.elapsed().as_secs_f64() / pts.len() as f64);
        let grid = Grid::for_ball(&omega, sec.grid.n_xy, sec.grid.n_t)?;
        let s = Instant::now();
        let op = GridOperator::new(Arc::new(grid.clone()), cfg.params, &solver_quadrature(&grid), &g)?;
        t_build.push(s.elapsed().as_secs_f64());
        let _ = op.stencil_entries();
        let prob = DirichletProblem::new(omega.clone(), crate::hcalculus::SmoothFn::constant(n, 0.0), g.clone(), cfg.params)?;
        let s = Instant::now();
        solve_dirichlet_with(&prob, grid, 1e-3, 50, &SolverOptions::default())?;
        t_solve.push(s.elapsed().as_secs_f64());
    }
    let body = json!({
        "threads": rayon::current_num_threads(),
        "repeats": repeats,
        "frac_eval_seconds_per_point": median(t_eval.clone()),
        "frac_nodes": frac.quadrature().len(),
        "operator_build_seconds": median(t_build.clone()),
        "solve_seconds": median(t_solve.clone()),
    });
    write_json(&out.join("bench.json"), &cfg.provenance(), &body)?;
    Ok(serde_json::to_string_pretty(&body)?)
}
