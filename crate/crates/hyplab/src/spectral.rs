//! Mode-by-mode integration of u'' + c(t) rho^2 u = 0, the weighted
//! spectral Sobolev norms, and the loss-exponent fits over frequency sweeps.
//!
//! The integrator works on the scaled state (p, q) = (rho u, u'): both
//! components are O(1) for unit-velocity data, so the relative error control
//! protects the energy E = q^2 + p^2 = |u'|^2 + rho^2 |u|^2 directly.

use crate::ode::{integrate, OdeError, OdeOpts, OdeStats};
use crate::profiles::fit_line;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("loss fit needs >= {need} frequencies spanning >= {decades} decades")]
    FitUnderdetermined { need: usize, decades: f64 },
    #[error("rate axis length {rates} does not match number of traces {traces}")]
    RateMismatch { rates: usize, traces: usize },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModeSetup {
    pub rho: f64,
    pub horizon: f64,
    /// relative tolerance (error per unit step) of the embedded pair
    pub tol: f64,
    /// c is exactly constant on [0, plateau_end]: the closed form seeds the
    /// integration there instead of stepping through the trivial region
    pub plateau_end: Option<f64>,
    /// c is exactly constant on [tail_start, horizon]: rotate analytically
    pub tail_start: Option<f64>,
    /// supremum of c, used for the steps-per-period cap
    pub c_sup: f64,
    /// minimum of 20 steps per oscillation period
    pub steps_per_period: f64,
    /// start time for coefficients singular at t = 0 with no plateau;
    /// the frozen-coefficient closed form covers [0, start]
    pub singular_start: f64,
}

impl ModeSetup {
    pub fn new(rho: f64, horizon: f64, tol: f64) -> Self {
        ModeSetup {
            rho,
            horizon,
            tol,
            plateau_end: None,
            tail_start: None,
            c_sup: 1.0,
            steps_per_period: 20.0,
            singular_start: 0.0,
        }
    }

    pub fn with_plateau(mut self, t: f64) -> Self {
        self.plateau_end = Some(t);
        self
    }

    pub fn with_tail(mut self, t: f64) -> Self {
        self.tail_start = Some(t);
        self
    }

    pub fn with_c_sup(mut self, c: f64) -> Self {
        self.c_sup = c;
        self
    }

    pub fn with_singular_start(mut self, t: f64) -> Self {
        self.singular_start = t;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyTrace {
    pub rho: f64,
    pub times: Vec<f64>,
    /// scaled displacement p = rho u
    pub p: Vec<f64>,
    /// velocity q = u'
    pub q: Vec<f64>,
    pub energy: Vec<f64>,
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
    /// where the numerical integration actually started/ended
    pub t_num_start: f64,
    pub t_num_end: f64,
}

impl EnergyTrace {
    pub fn final_energy(&self) -> f64 {
        *self.energy.last().unwrap_or(&f64::NAN)
    }
}

/// Rotate the constant-coefficient state (p, q) at time t0 to time t1 for
/// c = c0: u'' + c0 rho^2 u = 0 in scaled variables.
fn rotate_const(p: f64, q: f64, rho: f64, c0: f64, dt: f64) -> (f64, f64) {
    let g = c0.sqrt();
    let (s, co) = (g * rho * dt).sin_cos();
    (p * co + q / g * s, q * co - g * p * s)
}

/// Integrate a single mode of frequency rho with coefficient c(t); energies
/// are reported at `report_times` (sorted ascending, within [0, horizon]).
pub fn integrate_mode<F>(
    c: F,
    setup: &ModeSetup,
    report_times: &[f64],
) -> Result<EnergyTrace, SpectralError>
where
    F: Fn(f64) -> f64,
{
    let rho = setup.rho;
    let rhs = |t: f64, y: &[f64; 2]| [rho * y[1], -c(t) * rho * y[0]];
    let period = 2.0 * std::f64::consts::PI / (rho * setup.c_sup.sqrt());
    let opts = OdeOpts {
        tol: setup.tol,
        h_max: period / setup.steps_per_period,
        fixed_step: None,
    };

    let mut times = Vec::new();
    let mut ps = Vec::new();
    let mut qs = Vec::new();

    // Closed-form segment [0, t_start]: either the declared constant plateau
    // or a frozen coefficient near a t = 0 singularity.
    let t_start = setup.plateau_end.unwrap_or(setup.singular_start);
    let c0 = if setup.plateau_end.is_some() { c(0.5 * t_start) } else { c(t_start.max(1e-300)) };
    let (mut p, mut q) = (0.0, 1.0);
    let emit = |t: f64, p: f64, q: f64, times: &mut Vec<f64>, ps: &mut Vec<f64>, qs: &mut Vec<f64>| {
        times.push(t);
        ps.push(p);
        qs.push(q);
    };
    let mut idx = 0usize;
    while idx < report_times.len() && report_times[idx] <= t_start {
        let (pp, qq) = rotate_const(p, q, rho, c0, report_times[idx]);
        emit(report_times[idx], pp, qq, &mut times, &mut ps, &mut qs);
        idx += 1;
    }
    if t_start > 0.0 {
        let (pp, qq) = rotate_const(p, q, rho, c0, t_start);
        p = pp;
        q = qq;
    }

    // Numerical segment [t_start, tail_start or horizon].
    let t_end = setup.tail_start.unwrap_or(setup.horizon).min(setup.horizon);
    let mid_reports: Vec<f64> = report_times[idx..]
        .iter()
        .cloned()
        .take_while(|&t| t <= t_end)
        .collect();
    let mut stats = OdeStats::default();
    if t_end > t_start {
        let (y, st) = integrate(rhs, t_start, [p, q], t_end, &mid_reports, &opts, |t, y| {
            emit(t, y[0], y[1], &mut times, &mut ps, &mut qs);
        })?;
        p = y[0];
        q = y[1];
        stats = st;
        idx += mid_reports.len();
    }

    // Constant tail [t_end, horizon].
    if t_end < setup.horizon {
        let ct = c(0.5 * (t_end + setup.horizon));
        while idx < report_times.len() {
            let (pp, qq) = rotate_const(p, q, rho, ct, report_times[idx] - t_end);
            emit(report_times[idx], pp, qq, &mut times, &mut ps, &mut qs);
            idx += 1;
        }
    } else {
        while idx < report_times.len() {
            // report times past the numerical end coincide with the horizon
            emit(report_times[idx], p, q, &mut times, &mut ps, &mut qs);
            idx += 1;
        }
    }

    let energy = ps.iter().zip(&qs).map(|(a, b)| a * a + b * b).collect();
    Ok(EnergyTrace {
        rho,
        times,
        p: ps,
        q: qs,
        energy,
        accepted: stats.accepted,
        rejected: stats.rejected,
        rhs_evals: stats.rhs_evals,
        t_num_start: t_start,
        t_num_end: t_end,
    })
}

/// Weighted spectral norm (sum_i rho_i^(2m) e^(2 delta vartheta(rho_i))
/// v_i^2)^(1/2), computed in log-space so large weights cannot overflow.
/// Returns (norm, finite); an overflowing norm is reported as
/// (f64::INFINITY, false) rather than an error.
pub fn sobolev_norm<V>(modes: &[(f64, f64)], m: f64, delta: f64, vartheta: V) -> (f64, bool)
where
    V: Fn(f64) -> f64,
{
    // log-terms: 2m ln rho + 2 delta vartheta(rho) + 2 ln |v|
    let mut logs = Vec::with_capacity(modes.len());
    for &(rho, v) in modes {
        if v == 0.0 {
            continue;
        }
        logs.push(2.0 * m * rho.ln() + 2.0 * delta * vartheta(rho) + 2.0 * v.abs().ln());
    }
    if logs.is_empty() {
        return (0.0, true);
    }
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return (f64::INFINITY, false);
    }
    let sum: f64 = logs.iter().map(|l| (l - peak).exp()).sum();
    let log_norm = 0.5 * (peak + sum.ln());
    if log_norm > 700.0 {
        (f64::INFINITY, false)
    } else {
        (log_norm.exp(), true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LossVerdict {
    Zero,
    Finite,
    Infinite,
}

#[derive(Clone, Debug, Serialize)]
pub struct LossFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub verdict: LossVerdict,
    /// ln E / ln rho per frequency, the quantity that diverges for
    /// infinite loss
    pub log_ratio: Vec<f64>,
}

/// Fit ln E(t_eval) against a rate axis (ln rho, or a caller-supplied rate
/// like phi(rho)) and classify the growth.
pub fn loss_fit(
    rhos: &[f64],
    energies: &[f64],
    rates: Option<&[f64]>,
) -> Result<LossFit, SpectralError> {
    if let Some(r) = rates {
        if r.len() != rhos.len() {
            return Err(SpectralError::RateMismatch { rates: r.len(), traces: rhos.len() });
        }
    } else {
        let decades = (rhos[rhos.len() - 1] / rhos[0]).log10();
        if rhos.len() < 8 || decades < 3.0 {
            return Err(SpectralError::FitUnderdetermined { need: 8, decades: 3.0 });
        }
    }
    let xs: Vec<f64> = match rates {
        Some(r) => r.to_vec(),
        None => rhos.iter().map(|r| r.ln()).collect(),
    };
    let ys: Vec<f64> = energies.iter().map(|e| e.max(1e-300).ln()).collect();
    let (slope, intercept, r2) = fit_line(&xs, &ys);
    let log_ratio: Vec<f64> = rhos
        .iter()
        .zip(&ys)
        .map(|(r, y)| y / r.ln())
        .collect();
    let emax = energies.iter().cloned().fold(f64::MIN, f64::max);
    let emin = energies.iter().cloned().fold(f64::MAX, f64::min);
    let verdict = if rates.is_none() {
        let first = log_ratio[0];
        let last = log_ratio[log_ratio.len() - 1];
        if slope.abs() <= 0.05 && emax / emin.max(1e-300) < 10.0 {
            LossVerdict::Zero
        } else if last > 2.0 * first.max(1e-3) && last > 0.1 {
            LossVerdict::Infinite
        } else {
            LossVerdict::Finite
        }
    } else if slope.abs() <= 0.05 && emax / emin.max(1e-300) < 10.0 {
        LossVerdict::Zero
    } else {
        LossVerdict::Finite
    };
    Ok(LossFit { slope, intercept, r2, verdict, log_ratio })
}
