//! JSON experiment configuration: one file per run, strict about unknown
//! keys, validated before anything executes.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

fn default_horizon() -> f64 {
    1.0
}

fn default_k() -> f64 {
    2.0
}

fn default_n_zone() -> u32 {
    2
}

fn default_c_omega() -> f64 {
    1.0
}

fn default_kappa1() -> f64 {
    0.5
}

fn default_kappa2() -> f64 {
    0.75
}

fn default_tol() -> f64 {
    1e-10
}

fn default_steps_per_period() -> f64 {
    20.0
}

fn default_rhos() -> Vec<f64> {
    vec![1e3, 3.162e3, 1e4, 3.162e4, 1e5, 3.162e5, 1e6]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    /// 0 = automatic
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    ProfileClassify(ProfileClassifyParams),
    ZoneMap(ZoneMapParams),
    BoundCheck(BoundCheckParams),
    ActivatorSweep(ActivatorSweepParams),
    ModeSweep(ModeSweepParams),
    LossFit(LossFitParams),
    Psi3Check(Psi3CheckParams),
    ConeTest(ConeTestParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::ProfileClassify(_) => "profile-classify",
            Experiment::ZoneMap(_) => "zone-map",
            Experiment::BoundCheck(_) => "bound-check",
            Experiment::ActivatorSweep(_) => "activator-sweep",
            Experiment::ModeSweep(_) => "mode-sweep",
            Experiment::LossFit(_) => "loss-fit",
            Experiment::Psi3Check(_) => "psi3-check",
            Experiment::ConeTest(_) => "cone-test",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileClassifyParams {
    /// built-in profile tag (see `catalog`)
    pub profile: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneMapParams {
    pub profile: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_c_omega")]
    pub c_omega: f64,
    #[serde(default = "default_kappa1")]
    pub kappa1: f64,
    #[serde(default = "default_kappa2")]
    pub kappa2: f64,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_n_zone")]
    pub n_zone: u32,
    #[serde(default = "default_zone_samples")]
    pub n_samples: usize,
}

fn default_zone_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundCheckParams {
    /// built-in coefficient tag (see `catalog`)
    pub model: String,
    #[serde(default = "default_bound_nt")]
    pub nt: usize,
    #[serde(default = "default_bound_nx")]
    pub nx: usize,
    #[serde(default = "default_bound_xmax")]
    pub x_max: f64,
}

fn default_bound_nt() -> usize {
    24
}

fn default_bound_nx() -> usize {
    24
}

fn default_bound_xmax() -> f64 {
    30.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivatorSweepParams {
    #[serde(default = "default_gamma_t")]
    pub gamma_t: f64,
    #[serde(default = "default_mu1")]
    pub mu1: f64,
    #[serde(default = "default_mu2")]
    pub mu2: f64,
    #[serde(default = "default_mu3")]
    pub mu3: f64,
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// theta(t) = (ln(1 + 1/t))^theta_pow
    #[serde(default = "default_theta_pow")]
    pub theta_pow: f64,
    /// psi(t) = (ln(1 + 1/t))^psi_pow
    #[serde(default = "default_psi_pow")]
    pub psi_pow: f64,
    #[serde(default = "default_rhos")]
    pub rhos: Vec<f64>,
    /// points per oscillation period on the report grid
    #[serde(default = "default_grid_per_period")]
    pub grid_per_period: usize,
}

fn default_gamma_t() -> f64 {
    1.0
}

fn default_mu1() -> f64 {
    0.5
}

fn default_mu2() -> f64 {
    9.0
}

fn default_mu3() -> f64 {
    4.0
}

fn default_theta_pow() -> f64 {
    2.0
}

fn default_psi_pow() -> f64 {
    1.0
}

fn default_grid_per_period() -> usize {
    16
}

/// Coefficient c(t) for single-mode runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeCoefficient {
    /// c identically equal to `value`
    Constant { value: f64 },
    /// c(t) = 2 + sin(ln(1/t)): very slow oscillation
    SlowOscillation,
    /// time factor of a built-in coefficient model
    ModelTime { tag: String },
    /// per-frequency activator family (window depends on rho)
    Activator(ActivatorSweepParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSweepParams {
    pub coefficient: ModeCoefficient,
    #[serde(default = "default_rhos")]
    pub rhos: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_steps_per_period")]
    pub steps_per_period: f64,
    /// number of intermediate energy report times
    #[serde(default = "default_reports")]
    pub n_reports: usize,
}

fn default_reports() -> usize {
    16
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitAxis {
    /// ln E against ln rho
    LnRho,
    /// ln E against the activator growth rate phi(rho)
    Phi,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossFitParams {
    pub sweep: ModeSweepParams,
    pub axis: FitAxis,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Psi3CheckParams {
    pub profile: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_c_omega")]
    pub c_omega: f64,
    #[serde(default = "default_kappa1")]
    pub kappa1: f64,
    #[serde(default = "default_kappa2")]
    pub kappa2: f64,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_n_zone")]
    pub n_zone: u32,
    #[serde(default = "default_c_omega")]
    pub kappa: f64,
    #[serde(default = "default_psi3_grid")]
    pub grid: usize,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
}

fn default_psi3_grid() -> usize {
    32
}

fn default_quad_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeTestParams {
    pub model: String,
    #[serde(default = "default_l_domain")]
    pub l_domain: f64,
    #[serde(default = "default_dx")]
    pub dx: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_r_support")]
    pub r_support: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_t_fd_start")]
    pub t_start: f64,
    #[serde(default = "default_snapshots")]
    pub n_snapshots: usize,
}

fn default_l_domain() -> f64 {
    3.0
}

fn default_dx() -> f64 {
    2e-3
}

fn default_cfl() -> f64 {
    0.8
}

fn default_r_support() -> f64 {
    0.25
}

fn default_eta() -> f64 {
    1e-6
}

fn default_t_end() -> f64 {
    0.1
}

fn default_t_fd_start() -> f64 {
    1e-9
}

fn default_snapshots() -> usize {
    16
}

fn pos(value: f64, path: &str, errs: &mut Vec<String>) {
    if !(value > 0.0 && value.is_finite()) {
        errs.push(format!("{path}: must be a positive finite number, got {value}"));
    }
}

impl RunConfig {
    /// Structural validation beyond what serde enforces; error strings carry
    /// the offending field path.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        match &self.experiment {
            Experiment::ProfileClassify(p) => {
                if let Some(h) = p.horizon {
                    pos(h, "params.horizon", &mut errs);
                }
            }
            Experiment::ZoneMap(p) => {
                pos(p.c_omega, "params.c_omega", &mut errs);
                pos(p.k, "params.k", &mut errs);
                if p.n_zone == 0 {
                    errs.push("params.n_zone: must be >= 1".into());
                }
                if !(0.0..=1.0).contains(&p.kappa1) || !(0.0..=1.0).contains(&p.kappa2) {
                    errs.push("params.kappa1/kappa2: must lie in [0, 1]".into());
                }
                if p.kappa1 > p.kappa2 {
                    errs.push("params.kappa1: must not exceed kappa2".into());
                }
                if p.n_samples == 0 {
                    errs.push("params.n_samples: must be >= 1".into());
                }
            }
            Experiment::BoundCheck(p) => {
                if p.nt == 0 || p.nx == 0 {
                    errs.push("params.nt/nx: must be >= 1".into());
                }
                pos(p.x_max, "params.x_max", &mut errs);
            }
            Experiment::ActivatorSweep(p) => validate_activator(p, "params", &mut errs),
            Experiment::ModeSweep(p) => validate_sweep(p, "params", &mut errs),
            Experiment::LossFit(p) => {
                validate_sweep(&p.sweep, "params", &mut errs);
                if matches!(p.axis, FitAxis::Phi)
                    && !matches!(p.sweep.coefficient, ModeCoefficient::Activator(_))
                {
                    errs.push("params.axis: phi axis requires an activator coefficient".into());
                }
            }
            Experiment::Psi3Check(p) => {
                pos(p.c_omega, "params.c_omega", &mut errs);
                pos(p.k, "params.k", &mut errs);
                pos(p.kappa, "params.kappa", &mut errs);
                pos(p.quad_tol, "params.quad_tol", &mut errs);
                if p.grid < 2 {
                    errs.push("params.grid: must be >= 2".into());
                }
                if p.n_zone == 0 {
                    errs.push("params.n_zone: must be >= 1".into());
                }
            }
            Experiment::ConeTest(p) => {
                pos(p.l_domain, "params.l_domain", &mut errs);
                pos(p.dx, "params.dx", &mut errs);
                pos(p.t_end, "params.t_end", &mut errs);
                pos(p.eta, "params.eta", &mut errs);
                pos(p.r_support, "params.r_support", &mut errs);
                if !(p.cfl > 0.0 && p.cfl <= 0.9) {
                    errs.push(format!("params.cfl: must lie in (0, 0.9], got {}", p.cfl));
                }
                if p.r_support >= p.l_domain / 2.0 {
                    errs.push("params.r_support: must be < l_domain / 2".into());
                }
                if p.n_snapshots == 0 {
                    errs.push("params.n_snapshots: must be >= 1".into());
                }
            }
        }
        if errs.is_empty() { Ok(()) } else { Err(errs) }
    }
}

fn validate_activator(p: &ActivatorSweepParams, path: &str, errs: &mut Vec<String>) {
    pos(p.gamma_t, &format!("{path}.gamma_t"), errs);
    pos(p.mu1, &format!("{path}.mu1"), errs);
    pos(p.mu2, &format!("{path}.mu2"), errs);
    pos(p.mu3, &format!("{path}.mu3"), errs);
    pos(p.horizon, &format!("{path}.horizon"), errs);
    pos(p.theta_pow, &format!("{path}.theta_pow"), errs);
    if p.psi_pow < 0.0 {
        errs.push(format!("{path}.psi_pow: must be >= 0"));
    }
    if p.rhos.is_empty() {
        errs.push(format!("{path}.rhos: must not be empty"));
    }
    for (i, &r) in p.rhos.iter().enumerate() {
        if !(r > 1.0 && r.is_finite()) {
            errs.push(format!("{path}.rhos[{i}]: must be > 1, got {r}"));
        }
    }
    if let Some(t1) = p.t1 {
        if !(t1 > 0.0 && t1 < p.horizon) {
            errs.push(format!("{path}.t1: must lie in (0, horizon)"));
        }
    }
    if p.grid_per_period == 0 {
        errs.push(format!("{path}.grid_per_period: must be >= 1"));
    }
}

fn validate_sweep(p: &ModeSweepParams, path: &str, errs: &mut Vec<String>) {
    pos(p.horizon, &format!("{path}.horizon"), errs);
    pos(p.tol, &format!("{path}.tol"), errs);
    if p.steps_per_period < 1.0 {
        errs.push(format!("{path}.steps_per_period: must be >= 1"));
    }
    if p.rhos.is_empty() {
        errs.push(format!("{path}.rhos: must not be empty"));
    }
    for (i, &r) in p.rhos.iter().enumerate() {
        if !(r > 0.0 && r.is_finite()) {
            errs.push(format!("{path}.rhos[{i}]: must be positive, got {r}"));
        }
    }
    if p.n_reports == 0 {
        errs.push(format!("{path}.n_reports: must be >= 1"));
    }
    match &p.coefficient {
        ModeCoefficient::Constant { value } => {
            pos(*value, &format!("{path}.coefficient.value"), errs)
        }
        ModeCoefficient::Activator(a) => validate_activator(a, &format!("{path}.coefficient"), errs),
        ModeCoefficient::SlowOscillation | ModeCoefficient::ModelTime { .. } => {}
    }
}
