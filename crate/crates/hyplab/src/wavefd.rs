//! 1D leapfrog solver for u_tt = a(t, x) u_xx used to measure the
//! anisotropic cone of dependence: compactly supported data of radius R must
//! stay inside |x| <= R + gamma0 omega(x) theta~(t) t.

use crate::coefficients::CoefficientModel;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("CFL factor {cfl} out of (0, 0.9]")]
    BadCfl { cfl: f64 },
    #[error("initial support radius {r} must fit in (-L/2, L/2) with L/2 = {half}")]
    SupportTooWide { r: f64, half: f64 },
    #[error("predicted cone radius {r} reaches the sponge region starting at {sponge}")]
    DomainTooSmall { r: f64, sponge: f64 },
    #[error("field everywhere below threshold at t = {t}")]
    BelowThreshold { t: f64 },
    #[error("coefficient not positive at t={t}, x={x}: a={a}")]
    Ellipticity { t: f64, x: f64, a: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct WaveConfig {
    pub model: CoefficientModel,
    /// spatial domain [-L, L]
    pub l_domain: f64,
    pub dx: f64,
    /// Courant factor, <= 0.9; dt = cfl dx / sqrt(sup a)
    pub cfl: f64,
    /// support radius of the initial bump
    pub r_support: f64,
    /// relative support-detection threshold
    pub eta: f64,
    pub t_end: f64,
    /// start shift when the coefficient is singular at t = 0
    pub t_start: f64,
    pub n_snapshots: usize,
    /// width of the absorbing sponge at each end, as a fraction of L
    pub sponge_frac: f64,
    /// optional constant first-order term b u_x (principal speed unchanged)
    pub lower_order: Option<f64>,
}

impl WaveConfig {
    pub fn new(model: CoefficientModel, l_domain: f64, dx: f64, t_end: f64) -> Self {
        WaveConfig {
            model,
            l_domain,
            dx,
            cfl: 0.8,
            r_support: l_domain / 8.0,
            eta: 1e-6,
            t_end,
            t_start: 1e-9,
            n_snapshots: 16,
            sponge_frac: 0.1,
            lower_order: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WaveRun {
    pub xs: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub dx: f64,
    pub sup_a: f64,
    pub steps: usize,
    /// discrete leapfrog energy at each snapshot (exact invariant only for
    /// constant coefficients without sponge)
    pub energies: Vec<f64>,
}

/// C^infinity bump supported on |x| < r, normalized to 1 at the origin.
pub fn support_bump(x: f64, r: f64) -> f64 {
    let s = (x / r).abs();
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn discrete_energy(prev: &[f64], cur: &[f64], a_row: &[f64], dt: f64, dx: f64) -> f64 {
    let n = cur.len();
    let mut e = 0.0;
    for i in 0..n {
        let v = (cur[i] - prev[i]) / dt;
        e += v * v;
    }
    for i in 0..n - 1 {
        let gp = (cur[i + 1] - cur[i]) / dx;
        let gq = (prev[i + 1] - prev[i]) / dx;
        e += a_row[i] * gp * gq;
    }
    e * dx
}

/// Leapfrog integration of u_tt = a(t, x) u_xx (+ optional b u_x) with
/// Dirichlet ends shielded by a cosine-ramp sponge.
pub fn solve_wave(cfg: &WaveConfig) -> Result<WaveRun, WaveError> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 0.9) {
        return Err(WaveError::BadCfl { cfl: cfg.cfl });
    }
    if cfg.r_support >= cfg.l_domain / 2.0 {
        return Err(WaveError::SupportTooWide { r: cfg.r_support, half: cfg.l_domain / 2.0 });
    }
    let n = (2.0 * cfg.l_domain / cfg.dx).round() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| -cfg.l_domain + i as f64 * cfg.dx).collect();

    // CFL with a evaluated at its supremum over the run window
    let mut sup_a = 0.0f64;
    for j in 0..=64 {
        let t = cfg.t_start + (cfg.t_end - cfg.t_start) * j as f64 / 64.0;
        for i in (0..n).step_by((n / 128).max(1)) {
            let a = cfg.model.a(t.max(cfg.t_start), xs[i]);
            if !(a > 0.0) {
                return Err(WaveError::Ellipticity { t, x: xs[i], a });
            }
            sup_a = sup_a.max(a);
        }
    }
    let dt = cfg.cfl * cfg.dx / sup_a.sqrt();
    let steps = ((cfg.t_end - cfg.t_start) / dt).ceil() as usize;
    let dt = (cfg.t_end - cfg.t_start) / steps as f64;

    // sponge mask: 1 in the interior, cosine ramp to strong damping outside
    let sponge_start = cfg.l_domain * (1.0 - cfg.sponge_frac);
    let mask: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let d = (x.abs() - sponge_start) / (cfg.l_domain - sponge_start);
            if d <= 0.0 {
                1.0
            } else {
                let ramp = 0.5 * (1.0 + (std::f64::consts::PI * d.min(1.0)).cos());
                1.0 - 0.02 * (1.0 - ramp)
            }
        })
        .collect();

    let mut prev: Vec<f64> = xs.iter().map(|&x| support_bump(x, cfg.r_support)).collect();
    let r2 = dt * dt / (cfg.dx * cfg.dx);
    let b_half = cfg.lower_order.unwrap_or(0.0) * dt * dt / (2.0 * cfg.dx);

    // first step: Taylor with u_t(0) = 0
    let mut cur = prev.clone();
    {
        let t0 = cfg.t_start;
        for i in 1..n - 1 {
            let lap = prev[i + 1] - 2.0 * prev[i] + prev[i - 1];
            let grad = prev[i + 1] - prev[i - 1];
            cur[i] = prev[i]
                + 0.5 * r2 * cfg.model.a(t0, xs[i]) * lap
                + 0.5 * b_half * grad;
        }
    }

    let snap_every = (steps / cfg.n_snapshots.max(1)).max(1);
    let mut snapshots = Vec::new();
    let mut energies = Vec::new();
    let mut a_row = vec![0.0; n];

    let record = |k: usize,
                      prev: &[f64],
                      cur: &[f64],
                      a_row: &mut Vec<f64>,
                      snapshots: &mut Vec<Snapshot>,
                      energies: &mut Vec<f64>| {
        let t = cfg.t_start + k as f64 * dt;
        for i in 0..n {
            a_row[i] = cfg.model.a(t, xs[i]);
        }
        energies.push(discrete_energy(prev, cur, a_row, dt, cfg.dx));
        snapshots.push(Snapshot { t, u: cur.to_vec() });
    };
    record(1, &prev, &cur, &mut a_row, &mut snapshots, &mut energies);

    let mut next = vec![0.0; n];
    for k in 1..steps {
        let t = cfg.t_start + k as f64 * dt;
        for i in 1..n - 1 {
            let lap = cur[i + 1] - 2.0 * cur[i] + cur[i - 1];
            let grad = cur[i + 1] - cur[i - 1];
            next[i] = 2.0 * cur[i] - prev[i]
                + r2 * cfg.model.a(t, xs[i]) * lap
                + b_half * grad;
        }
        next[0] = 0.0;
        next[n - 1] = 0.0;
        for i in 0..n {
            next[i] *= mask[i];
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if (k + 1) % snap_every == 0 || k + 1 == steps {
            record(k + 1, &prev, &cur, &mut a_row, &mut snapshots, &mut energies);
        }
    }

    Ok(WaveRun { xs, snapshots, dt, dx: cfg.dx, sup_a, steps, energies })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub gamma0: f64,
    pub times: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub eta: f64,
}

/// Dominating speed gamma0 = sup sqrt(a(t, x)) / (omega(x) theta~(t)) over a
/// sample grid with |xi| = 1.
pub fn fit_gamma0(model: &CoefficientModel, t_lo: f64, t_hi: f64, x_max: f64) -> f64 {
    let mut g = 0.0f64;
    for j in 0..=64 {
        let t = t_lo * (t_hi / t_lo).powf(j as f64 / 64.0);
        let tt = model.profile.theta_tilde.eval(t);
        for i in 0..=64 {
            let x = -x_max + 2.0 * x_max * i as f64 / 64.0;
            let a = model.a(t, x);
            if a > 0.0 {
                g = g.max(a.sqrt() / (model.weights.omega(&[x]) * tt));
            }
        }
    }
    g
}

/// Self-consistent predicted radius r = R + gamma0 omega(r) theta~(t) t
/// (omega is evaluated at the moving boundary, matching the anisotropic
/// cone slope).
pub fn predicted_radius(
    model: &CoefficientModel,
    gamma0: f64,
    r_support: f64,
    t: f64,
) -> f64 {
    let tt = model.profile.theta_tilde.eval(t.max(1e-300));
    let mut r = r_support;
    for _ in 0..64 {
        let next = r_support + gamma0 * model.weights.omega(&[r]) * tt * t;
        if (next - r).abs() < 1e-12 * (1.0 + r) {
            return next;
        }
        r = next;
    }
    r
}

/// Measure the support radius of each snapshot against the predicted cone.
pub fn measure_speed(
    run: &WaveRun,
    model: &CoefficientModel,
    r_support: f64,
    eta: f64,
) -> Result<ConeReport, WaveError> {
    let t_lo = run.snapshots.first().map(|s| s.t).unwrap_or(1e-9).max(1e-9);
    let t_hi = run.snapshots.last().map(|s| s.t).unwrap_or(1.0);
    let x_max = run.xs.last().cloned().unwrap_or(1.0);
    let gamma0 = fit_gamma0(model, t_lo, t_hi, x_max);
    let mut times = Vec::new();
    let mut measured = Vec::new();
    let mut predicted = Vec::new();
    let mut ratios = Vec::new();
    let mut max_ratio = 0.0f64;
    for snap in &run.snapshots {
        let amp = snap.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if amp == 0.0 {
            return Err(WaveError::BelowThreshold { t: snap.t });
        }
        let cut = eta * amp;
        let mut radius = 0.0f64;
        for (i, &x) in run.xs.iter().enumerate() {
            if snap.u[i].abs() > cut {
                radius = radius.max(x.abs());
            }
        }
        let pred = predicted_radius(model, gamma0, r_support, snap.t);
        let ratio = radius / pred;
        times.push(snap.t);
        measured.push(radius);
        predicted.push(pred);
        ratios.push(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    Ok(ConeReport { gamma0, times, measured, predicted, ratios, max_ratio, eta })
}
