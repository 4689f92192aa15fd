//! `stability run`: config schema, builtin scenarios, CSV/JSON outputs.

use super::{fmt_f64, run_dir, RunManifest};
use crate::axial::AxialProfile;
use crate::error::{Error, Result};
use crate::evolution::{decompose_initial, Evolution, EvolutionConfig};
use crate::field::{Field2D, SlicedField3D};
use crate::grid::{Grid2D, Grid3D};
use crate::snapshot;
use crate::vortex::{VortexFamily, VortexSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub lambda: f64,
    pub rho: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default)]
    pub tier: Option<String>,
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_final: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    pub initial: InitialConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
}

fn default_m() -> f64 {
    2.0
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub l_perp: f64,
    pub n_perp: usize,
    pub l_3: f64,
    pub n_3: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// `builtin` or `file`
    pub kind: String,
    /// builtin: `equilibrium`, `sym-shift`, `random`
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub omega_amplitude: Option<f64>,
    #[serde(default)]
    pub phi_amplitude: Option<f64>,
    /// file inputs: full vorticity triple snapshots
    #[serde(default)]
    pub omega1: Option<PathBuf>,
    #[serde(default)]
    pub omega2: Option<PathBuf>,
    #[serde(default)]
    pub omega3: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureConfig {
    /// Half-width of the central axial measurement interval.
    pub interval: f64,
    /// Sampling cadence in steps.
    pub sample_every: usize,
    /// Checkpoint cadence in samples (0 = off).
    pub checkpoint_every: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            interval: 4.0,
            sample_every: 10,
            checkpoint_every: 0,
        }
    }
}

impl StabilityConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path)?;
        let cfg: StabilityConfig =
            toml::from_str(&body).map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::Config("lambda must lie in [0, 1)".into()));
        }
        if !(self.m > 1.5) {
            return Err(Error::Config("m must exceed 3/2".into()));
        }
        if self.t_final < 0.0 {
            return Err(Error::Config("t_final must be >= 0".into()));
        }
        match self.initial.kind.as_str() {
            "builtin" => {
                if self.initial.name.is_none() {
                    return Err(Error::Config("builtin initial needs a name".into()));
                }
            }
            "file" => {
                if self.initial.omega3.is_none() {
                    return Err(Error::Config("file initial needs at least omega3".into()));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "initial.kind must be builtin or file, got `{other}`"
                )))
            }
        }
        Ok(())
    }

    fn tier(&self) -> Result<super::Tier> {
        match self.tier.as_deref() {
            None | Some("standard") => Ok(super::Tier::Standard),
            Some("coarse") => Ok(super::Tier::Coarse),
            Some("fine") => Ok(super::Tier::Fine),
            Some(other) => Err(Error::Config(format!("unknown tier `{other}`"))),
        }
    }

    pub fn grids(&self) -> Result<(Grid2D, Grid3D)> {
        if let Some(g) = &self.grid {
            let g2 = Grid2D::new(g.l_perp, g.n_perp)?;
            Ok((g2, Grid3D::new(g2, g.l_3, g.n_3)?))
        } else {
            let tier = self.tier()?;
            Ok((tier.grid2(), tier.grid3()))
        }
    }

    pub fn time_step(&self) -> Result<f64> {
        match self.dt {
            Some(dt) if dt > 0.0 => Ok(dt),
            Some(_) => Err(Error::Config("dt must be positive".into())),
            None => Ok(self.tier()?.dt()),
        }
    }
}

/// Mean-free transverse bump with unit `X²(m)` norm, modulated axially.
fn unit_bump(grid: Grid3D, m: f64, reference: &Field2D) -> SlicedField3D {
    let raw = SlicedField3D::from_fn(grid, |x1, x2, x3| {
        x1 * (-(x1 * x1 + x2 * x2) / 2.0).exp() * (-x3 * x3).exp()
    });
    let projected = raw
        .project_slices_zero_mean(reference)
        .expect("reference has unit mass");
    let norm = projected.norm_x2m(m);
    projected.scaled(1.0 / norm)
}

fn random_mean_free_stack(
    grid: Grid3D,
    m: f64,
    reference: &Field2D,
    rng: &mut impl Rng,
) -> SlicedField3D {
    let centers: Vec<(f64, f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.8..2.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let raw = SlicedField3D::from_fn(grid, move |x1, x2, x3| {
        centers
            .iter()
            .map(|(c1, c2, c3, w, a)| {
                a * (-((x1 - c1).powi(2) + (x2 - c2).powi(2) + (x3 - c3).powi(2)) / w).exp()
            })
            .sum()
    });
    let projected = raw
        .project_slices_zero_mean(reference)
        .expect("reference has unit mass");
    let norm = projected.norm_x2m(m);
    projected.scaled(1.0 / norm)
}

/// Build the initial `(φ⁰, ω)` pair for a builtin scenario.
fn builtin_initial(
    cfg: &StabilityConfig,
    grid: Grid3D,
    family: &VortexFamily,
) -> Result<(AxialProfile, [SlicedField3D; 3])> {
    let name = cfg.initial.name.as_deref().unwrap_or("equilibrium");
    let reference = crate::vortex::GaussianProfile::new(cfg.lambda)?.field(*grid.transverse());
    let zero = SlicedField3D::zeros(grid);
    let axial = *grid.axial();
    match name {
        "equilibrium" => Ok((
            AxialProfile::from_fn(axial, |_| 0.0),
            [zero.clone(), zero.clone(), zero],
        )),
        "sym-shift" => {
            let phi_amp = cfg.initial.phi_amplitude.unwrap_or(0.02);
            let omega_amp = cfg.initial.omega_amplitude.unwrap_or(0.01);
            let phi0 = AxialProfile::from_fn(axial, move |x| phi_amp * (-x * x).exp());
            let w3 = unit_bump(grid, cfg.m, &reference).scaled(omega_amp);
            Ok((phi0, [zero.clone(), zero, w3]))
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let phi_amp = cfg.initial.phi_amplitude.unwrap_or(0.01);
            let omega_amp = cfg.initial.omega_amplitude.unwrap_or(0.01);
            let phi0 = AxialProfile::from_fn(axial, move |x| phi_amp * (-x * x / 2.0).exp());
            let w3 = random_mean_free_stack(grid, cfg.m, &reference, &mut rng).scaled(omega_amp);
            let _ = family;
            Ok((phi0, [zero.clone(), zero, w3]))
        }
        other => Err(Error::Config(format!("unknown builtin scenario `{other}`"))),
    }
}

fn file_initial(
    cfg: &StabilityConfig,
    grid: Grid3D,
    family: &VortexFamily,
) -> Result<(AxialProfile, [SlicedField3D; 3])> {
    let load = |p: &Option<PathBuf>| -> Result<SlicedField3D> {
        match p {
            Some(path) => {
                let w = snapshot::read_sliced3d(path)?;
                if w.grid() != &grid {
                    return Err(Error::GridMismatch(format!(
                        "snapshot {} does not match the configured grid",
                        path.display()
                    )));
                }
                Ok(w)
            }
            None => Ok(SlicedField3D::zeros(grid)),
        }
    };
    let full = [
        load(&cfg.initial.omega1)?,
        load(&cfg.initial.omega2)?,
        load(&cfg.initial.omega3)?,
    ];
    decompose_initial(family, &full)
}

/// Summary written at the end of a run.
#[derive(Debug, Serialize)]
pub struct StabilitySummary {
    pub delta_rho_formula: f64,
    pub delta_rho_measured: f64,
    pub fitted_decay_exponent: f64,
    pub final_omega_norm: f64,
    pub pass_flags: std::collections::BTreeMap<String, bool>,
}

pub fn cmd_stability(args: &super::StabilityRunArgs, out: &Option<PathBuf>) -> Result<i32> {
    let start = std::time::Instant::now();
    let cfg = StabilityConfig::from_path(&args.config)?;
    let (grid2, grid3) = cfg.grids()?;
    let dt = cfg.time_step()?;
    let dir = run_dir(out, "stability-run")?;

    let mut solver = VortexSolver::new(grid2, cfg.lambda, cfg.m)?;
    let family = solver.solve_family(cfg.rho, None)?;
    let base_residual = family.base.residual;

    let evo_config = EvolutionConfig {
        dt,
        t_final: cfg.t_final,
        sample_every: cfg.measure.sample_every,
        measure_half_width: cfg.measure.interval,
        reuse_velocities: true,
    };
    let mut evolution = Evolution::new(grid3, family, cfg.m, evo_config)?;

    let (phi0, omega) = match cfg.initial.kind.as_str() {
        "builtin" => builtin_initial(&cfg, grid3, evolution.family())?,
        _ => file_initial(&cfg, grid3, evolution.family())?,
    };
    let state = evolution.initial_state(phi0, omega)?;

    let csv_path = dir.join("diagnostics.csv");
    let mut csv = fs::File::create(&csv_path)?;
    writeln!(
        csv,
        "t,omega_norm,phi_sup_dev,circ_slice_q1,circ_slice_mid,circ_slice_q3,deviation,fitted_rate_running"
    )?;
    let checkpoint_every = cfg.measure.checkpoint_every;
    let fit_start = cfg.t_final / 2.0;
    let mut running: Vec<(f64, f64)> = Vec::new();
    let mut sample_count = 0usize;
    let mut checkpoints: Vec<PathBuf> = Vec::new();
    let result = {
        let dir = dir.clone();
        evolution.run(state, |st, s| {
            if s.deviation > 0.0 && s.t >= fit_start {
                running.push((s.t, s.deviation.ln()));
            }
            let rate = if running.len() >= 2 {
                let n = running.len() as f64;
                let sx: f64 = running.iter().map(|p| p.0).sum();
                let sy: f64 = running.iter().map(|p| p.1).sum();
                let sxx: f64 = running.iter().map(|p| p.0 * p.0).sum();
                let sxy: f64 = running.iter().map(|p| p.0 * p.1).sum();
                -(n * sxy - sx * sy) / (n * sxx - sx * sx)
            } else {
                f64::NAN
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(s.t),
                fmt_f64(s.omega_norm),
                fmt_f64(s.phi_sup_dev),
                fmt_f64(s.circulations[0]),
                fmt_f64(s.circulations[1]),
                fmt_f64(s.circulations[2]),
                fmt_f64(s.deviation),
                fmt_f64(rate)
            );
            sample_count += 1;
            if checkpoint_every > 0 && sample_count % checkpoint_every == 0 {
                let tag = format!("checkpoint-{:05}", sample_count);
                let path = dir.join(format!("{tag}-omega3.f64"));
                if snapshot::write_sliced3d(&path, &st.omega[2]).is_ok() {
                    checkpoints.push(path);
                }
            }
        })?
    };
    drop(csv);

    let final_omega_norm = result
        .samples
        .last()
        .map(|s| s.omega_norm)
        .unwrap_or(f64::NAN);
    let mut pass_flags = std::collections::BTreeMap::new();
    let scenario = cfg.initial.name.as_deref().unwrap_or("file");
    match scenario {
        "sym-shift" => {
            let err = (result.delta_rho_measured - result.delta_rho_formula).abs();
            pass_flags.insert(
                "shift_within_1pct".into(),
                err <= 0.01 * result.delta_rho_formula.abs(),
            );
            pass_flags.insert(
                "decay_exponent_ge_0.3".into(),
                result.fitted_decay_exponent >= 0.3,
            );
        }
        "equilibrium" => {
            pass_flags.insert(
                "drift_below_threshold".into(),
                final_omega_norm
                    <= 10.0 * base_residual.max(1e-10) * cfg.t_final.max(1.0),
            );
        }
        _ => {}
    }

    let summary = StabilitySummary {
        delta_rho_formula: result.delta_rho_formula,
        delta_rho_measured: result.delta_rho_measured,
        fitted_decay_exponent: result.fitted_decay_exponent,
        final_omega_norm,
        pass_flags: pass_flags.clone(),
    };
    let summary_path = dir.join("summary.json");
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("json encodes"),
    )?;

    let mut manifest = RunManifest::new(
        "stability run",
        serde_json::to_value(&cfg).expect("config encodes"),
    );
    manifest.record_output(&dir, &csv_path)?;
    manifest.record_output(&dir, &summary_path)?;
    for p in &checkpoints {
        manifest.record_output(&dir, p)?;
    }
    manifest.pass_flags = pass_flags.clone();
    manifest.wall_clock_s = start.elapsed().as_secs_f64();
    manifest.write(&dir)?;

    println!(
        "delta_rho formula {} measured {} fitted exponent {}; outputs in {}",
        fmt_f64(summary.delta_rho_formula),
        fmt_f64(summary.delta_rho_measured),
        fmt_f64(summary.fitted_decay_exponent),
        dir.display()
    );
    Ok(if pass_flags.values().all(|&v| v) { 0 } else { 1 })
}
