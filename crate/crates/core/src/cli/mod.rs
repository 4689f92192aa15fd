//! Command-line drivers: argument parsing, run directories, manifests,
//! and the per-subcommand entry points used by the `burgers-vortex`
//! binary. All floating output is printed with 17 significant digits so
//! reruns can be compared byte for byte.

mod stability;

pub use stability::{cmd_stability, StabilityConfig};

use crate::axial::{fd_stable_dt, phi_evolve_exact, phi_evolve_fd, shift_delta_rho, AxialProfile};
use crate::biot_savart::{axisymmetric_speed, biot_savart_2d};
use crate::error::{Error, Result};
use crate::grid::{Axis1D, Grid2D, Grid3D};
use crate::semigroup::{spectrum_check, Alpha1D};
use crate::snapshot;
use crate::verify;
use crate::vortex::{VortexParams, VortexSolver};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "BURGERS_VORTEX_OUT";

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Resolution tiers fixing `(n_perp, n_3, dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tier {
    /// 64 x 64 x 32, dt = 0.02: smoke tests.
    Coarse,
    /// 128 x 128 x 64, dt = 0.01: acceptance measurements.
    Standard,
    /// 256 x 256 x 128, dt = 0.005: convergence studies.
    Fine,
}

impl Tier {
    pub fn n_perp(self) -> usize {
        match self {
            Tier::Coarse => 64,
            Tier::Standard => 128,
            Tier::Fine => 256,
        }
    }

    pub fn n_3(self) -> usize {
        match self {
            Tier::Coarse => 32,
            Tier::Standard => 64,
            Tier::Fine => 128,
        }
    }

    pub fn dt(self) -> f64 {
        match self {
            Tier::Coarse => 0.02,
            Tier::Standard => 0.01,
            Tier::Fine => 0.005,
        }
    }

    pub fn grid2(self) -> Grid2D {
        Grid2D::new(12.0, self.n_perp()).expect("tier grids are valid")
    }

    pub fn grid3(self) -> Grid3D {
        Grid3D::new(self.grid2(), 8.0, self.n_3()).expect("tier grids are valid")
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "burgers-vortex",
    about = "Burgers vortices: construction, semigroup and velocity checks, and 3D stability experiments",
    version
)]
pub struct Cli {
    /// Output directory (default: $BURGERS_VORTEX_OUT or ./runs/<cmd>-<stamp>)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Machine-readable JSON instead of human tables where applicable
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct stationary vortices
    Vortex {
        #[command(subcommand)]
        action: VortexAction,
    },
    /// Evolve 3D perturbations and measure convergence
    Stability {
        #[command(subcommand)]
        action: StabilityAction,
    },
    /// The scalar axial mode
    Phi {
        #[command(subcommand)]
        action: PhiAction,
    },
    /// Fokker-Planck propagator spectrum check
    Semigroup {
        #[command(subcommand)]
        action: SemigroupAction,
    },
    /// Velocity-law checks
    BiotSavart {
        #[command(subcommand)]
        action: BiotSavartAction,
    },
    /// Run the invariant battery
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum VortexAction {
    /// Solve one vortex and write a snapshot directory
    Solve(VortexSolveArgs),
    /// Sweep a (lambda, rho) grid into a CSV
    Sweep(VortexSweepArgs),
}

#[derive(Debug, Args)]
pub struct VortexSolveArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 64)]
    pub max_iter: usize,
    /// Grid as N:L (points per axis : half-width); overrides --tier
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Tier::Standard)]
    pub tier: Tier,
}

#[derive(Debug, Args)]
pub struct VortexSweepArgs {
    /// Comma-separated asymmetry values
    #[arg(long, default_value = "0.0,0.25,0.5,0.75")]
    pub lambdas: String,
    /// Comma-separated circulation values
    #[arg(long, default_value = "0.05,0.1,0.2,0.4", allow_hyphen_values = true)]
    pub rhos: String,
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Tier::Standard)]
    pub tier: Tier,
}

#[derive(Debug, Subcommand)]
pub enum StabilityAction {
    /// Run a perturbation-evolution experiment from a config file
    Run(StabilityRunArgs),
}

#[derive(Debug, Args)]
pub struct StabilityRunArgs {
    /// TOML config (see docs for the schema)
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum PhiAction {
    /// Evolve a profile by the closed form and the FD oracle
    Evolve(PhiEvolveArgs),
    /// Print the limiting circulation shift of a profile
    Shift(PhiShiftArgs),
}

#[derive(Debug, Args)]
pub struct PhiEvolveArgs {
    /// `builtin:<gaussian|sine|step>` or a CSV file of `x3,value` rows
    #[arg(long, default_value = "builtin:gaussian")]
    pub profile: String,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 8.0)]
    pub l3: f64,
}

#[derive(Debug, Args)]
pub struct PhiShiftArgs {
    #[arg(long, default_value = "builtin:gaussian")]
    pub profile: String,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 8.0)]
    pub l3: f64,
}

#[derive(Debug, Subcommand)]
pub enum SemigroupAction {
    /// Fitted vs expected decay rates of the Hermite eigenmodes
    Check(SemigroupCheckArgs),
}

#[derive(Debug, Args)]
pub struct SemigroupCheckArgs {
    /// Comma-separated decay-rate values
    #[arg(long, default_value = "0.5,1.0,1.5")]
    pub alphas: String,
}

#[derive(Debug, Subcommand)]
pub enum BiotSavartAction {
    /// Azimuthal profile of the Gaussian vortex vs the closed form
    Check(BiotSavartCheckArgs),
}

#[derive(Debug, Args)]
pub struct BiotSavartCheckArgs {
    #[arg(long, value_enum, default_value_t = Tier::Standard)]
    pub tier: Tier,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Restrict to one topic: spectrum|semigroup|biot-savart|resolvent|phi
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long, value_enum, default_value_t = Tier::Standard)]
    pub tier: Tier,
}

/// Run manifest written once per run directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub file_hashes: std::collections::BTreeMap<String, String>,
    pub wall_clock_s: f64,
    pub pass_flags: std::collections::BTreeMap<String, bool>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            outputs: Vec::new(),
            file_hashes: Default::default(),
            wall_clock_s: 0.0,
            pass_flags: Default::default(),
        }
    }

    pub fn record_output(&mut self, dir: &Path, path: &Path) -> Result<()> {
        let rel = path
            .strip_prefix(dir)
            .unwrap_or(path)
            .to_string_lossy()
            .to_string();
        self.file_hashes
            .insert(rel.clone(), snapshot::file_sha256(path)?);
        self.outputs.push(rel);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest encoding failed: {e}")))?;
        fs::write(path, body)?;
        Ok(())
    }
}

/// Resolve the run directory: explicit `--out`, else env, else ./runs.
pub fn run_dir(out: &Option<PathBuf>, command: &str) -> Result<PathBuf> {
    let dir = match out {
        Some(d) => d.clone(),
        None => {
            let root = std::env::var(OUT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|_| PathBuf::from("runs"));
            let stamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            root.join(format!("{command}-{stamp}"))
        }
    };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn parse_f64_list(s: &str, name: &'static str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(name, format!("bad number `{tok}`: {e}")))
        })
        .collect()
}

fn parse_grid_spec(spec: &str) -> Result<Grid2D> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::invalid("grid", "expected N:L, e.g. 128:12"));
    }
    let n: usize = parts[0]
        .parse()
        .map_err(|e| Error::invalid("grid", format!("bad point count: {e}")))?;
    let l: f64 = parts[1]
        .parse()
        .map_err(|e| Error::invalid("grid", format!("bad half-width: {e}")))?;
    Grid2D::new(l, n)
}

fn load_axial_profile(spec: &str, axis: Axis1D) -> Result<AxialProfile> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let f: Box<dyn Fn(f64) -> f64> = match name {
            "gaussian" => Box::new(|x: f64| (-x * x).exp()),
            "sine" => Box::new(|x: f64| x.sin()),
            "step" => Box::new(|x: f64| (5.0 * x).tanh()),
            other => {
                return Err(Error::invalid(
                    "profile",
                    format!("unknown builtin `{other}` (gaussian|sine|step)"),
                ))
            }
        };
        return Ok(AxialProfile::from_fn(axis, f));
    }
    // CSV of x3,value rows sampled exactly on the axis
    let body = fs::read_to_string(spec)?;
    let mut values = vec![f64::NAN; axis.len()];
    for (ln, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("x3") {
            continue;
        }
        let mut cols = line.split(',');
        let (x, v) = match (cols.next(), cols.next()) {
            (Some(x), Some(v)) => (x.trim(), v.trim()),
            _ => return Err(Error::Config(format!("line {}: expected x3,value", ln + 1))),
        };
        let x: f64 = x
            .parse()
            .map_err(|e| Error::Config(format!("line {}: {e}", ln + 1)))?;
        let v: f64 = v
            .parse()
            .map_err(|e| Error::Config(format!("line {}: {e}", ln + 1)))?;
        let idx = axis.frac_index(x).round();
        if idx < 0.0 || idx >= axis.len() as f64 || (axis.frac_index(x) - idx).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "line {}: x3 = {x} is not a node of the {}-point axis",
                ln + 1,
                axis.len()
            )));
        }
        values[idx as usize] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Config("profile file does not cover the axis".into()));
    }
    AxialProfile::new(axis, values)
}

pub fn cmd_vortex_solve(args: &VortexSolveArgs, out: &Option<PathBuf>) -> Result<i32> {
    let start = std::time::Instant::now();
    let grid = match &args.grid {
        Some(spec) => parse_grid_spec(spec)?,
        None => args.tier.grid2(),
    };
    let params = VortexParams::new(args.lambda, args.rho, args.m)?;
    let dir = run_dir(out, "vortex-solve")?;
    let mut solver = VortexSolver::new(grid, params.lambda, params.m)?;
    solver.tol = args.tol;
    solver.max_iter = args.max_iter;
    let solved = solver.solve(params.rho);
    let sol = match solved {
        Ok(sol) => sol,
        Err(e) => {
            eprintln!("vortex solve failed: {e}");
            return Ok(2);
        }
    };

    let mut manifest = RunManifest::new(
        "vortex solve",
        serde_json::json!({
            "lambda": args.lambda, "rho": args.rho, "m": args.m,
            "tol": args.tol, "max_iter": args.max_iter,
            "n_perp": grid.n(), "l_perp": grid.half_width(),
        }),
    );
    for (name, field) in [
        ("omega_total.f64", &sol.omega_total),
        ("omega_core.f64", &sol.omega_core),
    ] {
        let path = dir.join(name);
        snapshot::write_field2d(&path, field)?;
        manifest.record_output(&dir, &path)?;
    }
    let meta = serde_json::json!({
        "lambda": sol.params.lambda,
        "rho": sol.params.rho,
        "m": sol.params.m,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "contraction_estimate": sol.contraction_estimate,
        "correction_norm": sol.correction_norm(),
        "correction_norm_over_rho2": sol.correction_norm() / (sol.params.rho * sol.params.rho).max(f64::MIN_POSITIVE),
        "circulation": sol.circulation(),
        "update_trace": sol.update_trace,
    });
    let meta_path = dir.join("solution.json");
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("json encodes"),
    )?;
    manifest.record_output(&dir, &meta_path)?;
    manifest
        .pass_flags
        .insert("converged".into(), true);
    manifest.pass_flags.insert(
        "contraction_below_one".into(),
        sol.contraction_estimate < 1.0,
    );
    manifest.wall_clock_s = start.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    if sol.contraction_estimate >= 1.0 {
        eprintln!(
            "warning: contraction estimate {:.3} >= 1 (outside certified regime)",
            sol.contraction_estimate
        );
    }
    println!(
        "converged in {} iterations; correction norm {}; residual {}; snapshot in {}",
        sol.iterations,
        fmt_f64(sol.correction_norm()),
        fmt_f64(sol.residual),
        dir.display()
    );
    Ok(0)
}

pub fn cmd_vortex_sweep(args: &VortexSweepArgs, out: &Option<PathBuf>) -> Result<i32> {
    let start = std::time::Instant::now();
    let lambdas = parse_f64_list(&args.lambdas, "lambdas")?;
    let rhos = parse_f64_list(&args.rhos, "rhos")?;
    let grid = args.tier.grid2();
    let dir = run_dir(out, "vortex-sweep")?;
    let csv_path = dir.join("sweep.csv");
    let mut csv = fs::File::create(&csv_path)?;
    writeln!(
        csv,
        "lambda,rho,correction_norm,correction_norm_over_rho2,residual,iterations,converged"
    )?;
    let mut failures = 0usize;
    for &lambda in &lambdas {
        let mut solver = VortexSolver::new(grid, lambda, args.m)?;
        solver.tol = args.tol;
        for &rho in &rhos {
            match solver.solve(rho) {
                Ok(sol) => {
                    writeln!(
                        csv,
                        "{},{},{},{},{},{},1",
                        fmt_f64(lambda),
                        fmt_f64(rho),
                        fmt_f64(sol.correction_norm()),
                        fmt_f64(sol.correction_norm() / (rho * rho).max(f64::MIN_POSITIVE)),
                        fmt_f64(sol.residual),
                        sol.iterations
                    )?;
                }
                Err(e) => {
                    failures += 1;
                    eprintln!("lambda {lambda} rho {rho}: {e}");
                    writeln!(
                        csv,
                        "{},{},nan,nan,nan,0,0",
                        fmt_f64(lambda),
                        fmt_f64(rho)
                    )?;
                }
            }
        }
    }
    drop(csv);
    let mut manifest = RunManifest::new(
        "vortex sweep",
        serde_json::json!({
            "lambdas": lambdas, "rhos": rhos, "m": args.m, "tol": args.tol,
            "n_perp": grid.n(),
        }),
    );
    manifest.record_output(&dir, &csv_path)?;
    manifest
        .pass_flags
        .insert("all_converged".into(), failures == 0);
    manifest.wall_clock_s = start.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    println!("sweep written to {}", csv_path.display());
    Ok(if failures == 0 { 0 } else { 2 })
}

pub fn cmd_phi_evolve(args: &PhiEvolveArgs, out: &Option<PathBuf>) -> Result<i32> {
    let axis = Axis1D::new(args.l3, args.n)?;
    let phi0 = load_axial_profile(&args.profile, axis)?;
    let exact = phi_evolve_exact(&phi0, args.t);
    let fd = phi_evolve_fd(&phi0, args.t, fd_stable_dt(&axis))?;
    let dir = run_dir(out, "phi-evolve")?;
    let csv_path = dir.join("phi.csv");
    let mut csv = fs::File::create(&csv_path)?;
    writeln!(csv, "x3,phi_exact,phi_fd,abs_diff")?;
    let mut sup = 0.0f64;
    for ((x, e), f) in axis.nodes().zip(exact.values()).zip(fd.values()) {
        let d = (e - f).abs();
        sup = sup.max(d);
        writeln!(csv, "{},{},{},{}", fmt_f64(x), fmt_f64(*e), fmt_f64(*f), fmt_f64(d))?;
    }
    drop(csv);
    let mut manifest = RunManifest::new(
        "phi evolve",
        serde_json::json!({"profile": args.profile, "t": args.t, "n": args.n, "l3": args.l3}),
    );
    manifest.record_output(&dir, &csv_path)?;
    manifest.pass_flags.insert("oracle_agrees".into(), sup < 1e-4);
    manifest.write(&dir)?;
    println!(
        "sup |exact - fd| = {} at t = {}; CSV in {}",
        fmt_f64(sup),
        args.t,
        csv_path.display()
    );
    Ok(0)
}

pub fn cmd_phi_shift(args: &PhiShiftArgs) -> Result<i32> {
    let axis = Axis1D::new(args.l3, args.n)?;
    let phi0 = load_axial_profile(&args.profile, axis)?;
    let est = shift_delta_rho(&phi0);
    if !est.certified {
        eprintln!("warning: axial half-width {} < 8, shift not certified", args.l3);
    }
    println!("{}", fmt_f64(est.delta_rho));
    Ok(0)
}

pub fn cmd_semigroup_check(args: &SemigroupCheckArgs, out: &Option<PathBuf>) -> Result<i32> {
    let alphas = parse_f64_list(&args.alphas, "alphas")?;
    let axis = Axis1D::new(12.0, 256)?;
    let dir = run_dir(out, "semigroup-check")?;
    let csv_path = dir.join("spectrum.csv");
    let mut csv = fs::File::create(&csv_path)?;
    writeln!(csv, "n,alpha,fitted_rate,expected_rate,rel_error")?;
    let mut ok = true;
    for &alpha in &alphas {
        let a = Alpha1D::new(alpha)?;
        for n in 0..=3 {
            let chk = spectrum_check(a, n, &axis)?;
            let rel = chk.rel_error();
            if n == 0 {
                ok &= chk.fitted_rate.abs() < 1e-3;
            } else {
                ok &= rel < 0.02;
            }
            writeln!(
                csv,
                "{},{},{},{},{}",
                n,
                fmt_f64(alpha),
                fmt_f64(chk.fitted_rate),
                fmt_f64(chk.expected_rate),
                fmt_f64(rel)
            )?;
        }
    }
    drop(csv);
    let mut manifest = RunManifest::new(
        "semigroup check",
        serde_json::json!({"alphas": alphas}),
    );
    manifest.record_output(&dir, &csv_path)?;
    manifest.pass_flags.insert("rates_match".into(), ok);
    manifest.write(&dir)?;
    println!("spectrum CSV in {}", csv_path.display());
    Ok(if ok { 0 } else { 1 })
}

pub fn cmd_biot_savart_check(args: &BiotSavartCheckArgs, out: &Option<PathBuf>) -> Result<i32> {
    let grid = args.tier.grid2();
    let g0 = crate::vortex::GaussianProfile::new(0.0)?.field(grid);
    let v = biot_savart_2d(&g0)?;
    let dir = run_dir(out, "biot-savart-check")?;
    let csv_path = dir.join("profile.csv");
    let mut csv = fs::File::create(&csv_path)?;
    writeln!(csv, "r,numeric,analytic,rel_error")?;
    let ax = *grid.axis();
    // walk outward along the first row of nodes above the x1 axis
    let j = grid.n() / 2; // x2 = +h/2
    let mut worst = 0.0f64;
    for i in grid.n() / 2..grid.n() {
        let (x1, x2) = (ax.node(i), ax.node(j));
        let r = (x1 * x1 + x2 * x2).sqrt();
        if r > 8.0 {
            break;
        }
        let num = (v.u1[[i, j]].powi(2) + v.u2[[i, j]].powi(2)).sqrt();
        let exact = axisymmetric_speed(r);
        let rel = ((num - exact) / exact).abs();
        if (0.25..=6.0).contains(&r) {
            worst = worst.max(rel);
        }
        writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(r),
            fmt_f64(num),
            fmt_f64(exact),
            fmt_f64(rel)
        )?;
    }
    drop(csv);
    let mut manifest = RunManifest::new(
        "biot-savart check",
        serde_json::json!({"n_perp": grid.n()}),
    );
    manifest.record_output(&dir, &csv_path)?;
    manifest
        .pass_flags
        .insert("profile_within_1e-3".into(), worst < 1e-3);
    manifest.write(&dir)?;
    println!(
        "max relative error {} on r in [0.25, 6]; CSV in {}",
        fmt_f64(worst),
        csv_path.display()
    );
    Ok(if worst < 1e-3 { 0 } else { 1 })
}

pub fn cmd_verify(args: &VerifyArgs, json: bool) -> Result<i32> {
    let grid = args.tier.grid2();
    let grid3 = args.tier.grid3();
    let results = verify::run_battery(grid, grid3, args.only.as_deref());
    if results.is_empty() {
        eprintln!("no checks match --only {:?}", args.only);
        return Ok(2);
    }
    if json {
        let rows: Vec<serde_json::Value> = results
            .iter()
            .map(|r| {
                serde_json::json!({
                    "topic": r.topic, "name": r.name, "pass": r.pass, "detail": r.detail,
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("json encodes")
        );
    } else {
        for r in &results {
            println!(
                "[{}] {:28} {:40} {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.topic,
                r.name,
                r.detail
            );
        }
    }
    let failed: Vec<&verify::CheckResult> = results.iter().filter(|r| !r.pass).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} check(s) failed:", failed.len());
        for r in failed {
            eprintln!("  {}/{}: {}", r.topic, r.name, r.detail);
        }
        Ok(1)
    }
}

/// Top-level dispatch used by the binary.
pub fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Vortex { action } => match action {
            VortexAction::Solve(args) => cmd_vortex_solve(args, &cli.out),
            VortexAction::Sweep(args) => cmd_vortex_sweep(args, &cli.out),
        },
        Command::Stability { action } => match action {
            StabilityAction::Run(args) => cmd_stability(args, &cli.out),
        },
        Command::Phi { action } => match action {
            PhiAction::Evolve(args) => cmd_phi_evolve(args, &cli.out),
            PhiAction::Shift(args) => cmd_phi_shift(args),
        },
        Command::Semigroup { action } => match action {
            SemigroupAction::Check(args) => cmd_semigroup_check(args, &cli.out),
        },
        Command::BiotSavart { action } => match action {
            BiotSavartAction::Check(args) => cmd_biot_savart_check(args, &cli.out),
        },
        Command::Verify(args) => cmd_verify(args, cli.json),
    }
}
