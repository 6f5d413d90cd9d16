//! Resonant coefficient families c_rho(t): perturbations of an initially
//! constant speed whose oscillation window [a_rho, b_rho] pumps energy into
//! the mode of frequency rho at rate phi(rho). Also the metric d_C on the
//! coefficient class and the membership (growth-estimate) checks.

use crate::jet::Jet2;
use crate::profiles::ProfileFn;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ActivatorError {
    #[error("need 0 < mu1 <= gamma_t^2 <= mu2 and mu1 < mu3 < mu2, got mu=({mu1}, {mu3}, {mu2}), gamma_t={gamma_t}")]
    BadEllipticity { mu1: f64, mu2: f64, mu3: f64, gamma_t: f64 },
    #[error("need 0 < T1 < T, got T1={t1}, T={horizon}")]
    BadWindow { t1: f64, horizon: f64 },
    #[error("growth condition fails: theta(t) psi(t) / |ln t| does not diverge (value {value:.3e} at t={t:.3e})")]
    GrowthCondition { t: f64, value: f64 },
    #[error("rho = {rho:.3e} below admissibility threshold: window endpoint b = {b_rho:.3e} must stay below T1 = {t1}")]
    RhoTooSmall { rho: f64, b_rho: f64, t1: f64 },
    #[error("window floor collapsed to zero at rho = {0:.3e}; increase rho")]
    EmptyWindow(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct ActivatorParams {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub gamma_t: f64,
    pub t1: f64,
    pub horizon: f64,
    pub theta: ProfileFn,
    pub psi: ProfileFn,
    /// false when mu1 = gamma_t^2 or gamma_t^2 = mu2 (boundary case accepted
    /// with a flag rather than rejected).
    pub strict_ellipticity: bool,
}

impl ActivatorParams {
    pub fn new(
        mu1: f64,
        mu2: f64,
        mu3: f64,
        gamma_t: f64,
        t1: f64,
        horizon: f64,
        theta: ProfileFn,
        psi: ProfileFn,
    ) -> Result<Self, ActivatorError> {
        let g2 = gamma_t * gamma_t;
        if !(0.0 < mu1 && mu1 <= g2 && g2 <= mu2 && mu1 < mu3 && mu3 < mu2) {
            return Err(ActivatorError::BadEllipticity { mu1, mu2, mu3, gamma_t });
        }
        if !(0.0 < t1 && t1 < horizon) {
            return Err(ActivatorError::BadWindow { t1, horizon });
        }
        // theta(t) psi(t) / |ln t| must diverge as t -> 0 (checked on a
        // decade grid: increasing tail, large terminal value).
        let val = |t: f64| theta.eval(t) * psi.eval(t) / t.ln().abs();
        let mut prev = val(1e-3);
        for e in 4..40 {
            let t = 10f64.powi(-e);
            let v = val(t);
            if v < prev {
                return Err(ActivatorError::GrowthCondition { t, value: v });
            }
            prev = v;
        }
        if prev < 10.0 {
            return Err(ActivatorError::GrowthCondition { t: 1e-39, value: prev });
        }
        let strict = mu1 < g2 && g2 < mu2;
        Ok(ActivatorParams {
            mu1,
            mu2,
            mu3,
            gamma_t,
            t1,
            horizon,
            theta,
            psi,
            strict_ellipticity: strict,
        })
    }

    /// Default family: theta = ln(1+1/t)^2, psi = ln(1+1/t); gamma_t = 1 so
    /// the unperturbed speed is exactly 1. The lower ellipticity bound sits
    /// strictly below gamma_t^2 so the perturbation dips stay inside.
    pub fn default_family(horizon: f64) -> Self {
        Self::new(
            0.5,
            9.0,
            4.0,
            1.0,
            0.9 * horizon,
            horizon,
            ProfileFn::LnOnePlusInv { pow: 2.0 },
            ProfileFn::LnOnePlusInv { pow: 1.0 },
        )
        .expect("default family parameters are admissible")
    }

    pub fn c_star(&self) -> f64 {
        self.gamma_t * self.gamma_t
    }
}

/// Quintic smoothstep and its first three derivatives; constant outside
/// (0, 1), twice continuously differentiable at the junctions (the third
/// derivative jumps there, which only the reporting layer sees).
pub fn smoothstep3(r: f64) -> [f64; 4] {
    if r <= 0.0 {
        [0.0, 0.0, 0.0, 0.0]
    } else if r >= 1.0 {
        [1.0, 0.0, 0.0, 0.0]
    } else {
        let r2 = r * r;
        let r3 = r2 * r;
        [
            ((6.0 * r - 15.0) * r + 10.0) * r3,
            ((30.0 * r - 60.0) * r + 30.0) * r2,
            ((120.0 * r - 180.0) * r + 60.0) * r,
            (360.0 * r - 360.0) * r + 60.0,
        ]
    }
}

fn mul3(f: &[f64; 4], g: &[f64; 4]) -> [f64; 4] {
    [
        f[0] * g[0],
        f[1] * g[0] + f[0] * g[1],
        f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
        f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct ActivatorInstance {
    pub params: ActivatorParams,
    pub rho: f64,
    pub theta_rho: f64,
    /// theta(sqrt(rho)) psi(sqrt(rho)) / ln(rho), as displayed
    pub gamma_rho_large_arg: f64,
    /// theta(1/sqrt(rho)) psi(1/sqrt(rho)) / ln(rho), the variant actually
    /// used inside psi_rho (the large-argument form collapses the window)
    pub gamma_rho_small_arg: f64,
    pub psi_rho: f64,
    pub a_rho: f64,
    pub b_rho: f64,
    pub floor_a: u64,
    pub floor_b: u64,
    /// the chain 0 < a < 2a < b/2 < b: fails for moderate rho, flagged
    pub chain_ok: bool,
    /// rate phi(rho); the log-ratio is taken in absolute value so the rate
    /// is positive, and this flag records that choice
    pub phi_rho: f64,
    pub phi_abs_log_ratio: bool,
}

impl ActivatorInstance {
    pub fn build(params: &ActivatorParams, rho: f64) -> Result<Self, ActivatorError> {
        let lr = rho.ln();
        let sq = rho.sqrt();
        let gamma_large = params.theta.eval(sq) * params.psi.eval(sq) / lr;
        let gamma_small = params.theta.eval(1.0 / sq) * params.psi.eval(1.0 / sq) / lr;
        let psi_rho = (lr / 8.0).min(0.25 * params.psi.eval(1.0 / sq) + 0.25 * gamma_small.ln());
        let base = 2.0 * std::f64::consts::PI / (params.gamma_t * rho);
        let floor_a = (lr * psi_rho.exp()).floor();
        let floor_b = (lr * (2.0 * psi_rho).exp()).floor();
        if floor_a < 1.0 || floor_b <= floor_a {
            return Err(ActivatorError::EmptyWindow(rho));
        }
        let a_rho = base * floor_a;
        let b_rho = base * floor_b;
        if b_rho >= params.t1 {
            return Err(ActivatorError::RhoTooSmall { rho, b_rho, t1: params.t1 });
        }
        let theta_rho = params.theta.eval(b_rho).min(lr);
        let chain_ok = 2.0 * a_rho < 0.5 * b_rho;
        let phi_rho = theta_rho / (32.0 * params.gamma_t * params.gamma_t) * (b_rho / a_rho).ln().abs();
        Ok(ActivatorInstance {
            params: params.clone(),
            rho,
            theta_rho,
            gamma_rho_large_arg: gamma_large,
            gamma_rho_small_arg: gamma_small,
            psi_rho,
            a_rho,
            b_rho,
            floor_a: floor_a as u64,
            floor_b: floor_b as u64,
            chain_ok,
            phi_rho,
            phi_abs_log_ratio: true,
        })
    }

    /// Smallest admissible rho (b_rho < T1) found by doubling then bisection.
    pub fn min_admissible_rho(params: &ActivatorParams) -> f64 {
        let mut lo = 2.0;
        let mut hi = 2.0;
        while Self::build(params, hi).is_err() {
            hi *= 2.0;
            if hi > 1e12 {
                return hi;
            }
        }
        while Self::build(params, lo).is_ok() && lo > 1.0 {
            lo *= 0.5;
        }
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            if Self::build(params, mid).is_ok() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Oscillation period 2 pi / (gamma_t rho) of the perturbation.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.params.gamma_t * self.rho)
    }

    /// Envelope eps_rho and its first three derivatives. The product form
    /// (theta_rho / t) step((t-a)/a) step(2(b-t)/b) reproduces the four-piece
    /// definition whenever the window chain holds (each factor is 1 on the
    /// other's ramp) and degrades continuously when it does not.
    pub fn eps_jet3(&self, t: f64) -> [f64; 4] {
        let (a, b) = (self.a_rho, self.b_rho);
        if t <= a || t >= b {
            return [0.0, 0.0, 0.0, 0.0];
        }
        let th = self.theta_rho;
        let inv = [th / t, -th / (t * t), 2.0 * th / (t * t * t), -6.0 * th / (t * t * t * t)];
        let sa = smoothstep3((t - a) / a);
        let ka = 1.0 / a;
        let up = [sa[0], sa[1] * ka, sa[2] * ka * ka, sa[3] * ka * ka * ka];
        let sb = smoothstep3(2.0 * (b - t) / b);
        let kb = -2.0 / b;
        let down = [sb[0], sb[1] * kb, sb[2] * kb * kb, sb[3] * kb * kb * kb];
        mul3(&mul3(&inv, &up), &down)
    }

    /// c_rho(t) with first and second derivatives.
    pub fn c_jet(&self, t: f64) -> Jet2 {
        let e = self.eps_jet3(t);
        if e == [0.0; 4] {
            return Jet2::con(self.params.c_star());
        }
        let w = self.params.gamma_t * self.rho;
        let g2 = self.params.gamma_t * self.params.gamma_t;
        let eps = Jet2 { v: e[0], d1: e[1], d2: e[2] };
        let epsp = Jet2 { v: e[1], d1: e[2], d2: e[3] };
        let s2 = (Jet2::var(t) * (2.0 * w)).sin();
        let s = (Jet2::var(t) * w).sin();
        let s_sq = s * s;
        let s_4 = s_sq * s_sq;
        Jet2::con(self.params.c_star())
            - eps * s2 * (1.0 / (4.0 * w))
            - epsp * s_sq * (1.0 / (8.0 * w * w))
            - eps * eps * s_4 * (1.0 / (64.0 * g2 * g2 * self.rho * self.rho))
    }

    pub fn c(&self, t: f64) -> f64 {
        self.c_jet(t).v
    }

    /// Grid for metric/membership sweeps: log-spaced backbone over (0, T]
    /// plus a uniform refinement of the oscillation window at
    /// `per_period` samples per period.
    pub fn sample_grid(&self, backbone: usize, per_period: usize) -> Vec<f64> {
        let mut g = log_grid(1e-9 * self.params.horizon, self.params.horizon, backbone);
        let n = ((self.b_rho - self.a_rho) / self.period() * per_period as f64).ceil() as usize;
        let n = n.clamp(64, 4_000_000);
        for i in 0..=n {
            g.push(self.a_rho + (self.b_rho - self.a_rho) * i as f64 / n as f64);
        }
        g.sort_by(|x, y| x.partial_cmp(y).unwrap());
        g
    }
}

pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (t_min.ln(), t_max.ln());
    (0..=n).map(|i| (la + (lb - la) * i as f64 / n as f64).exp()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DcReport {
    pub value: f64,
    pub sup_diff: f64,
    pub sup_first: f64,
    pub sup_second: f64,
    /// true when a supremum lands on the first/last grid point, suggesting
    /// the grid does not bracket the extremum
    pub boundary_attained: bool,
}

/// Metric on the coefficient class: sup |c1 - c2| plus the two weighted
/// derivative suprema with weights t^2/theta and t^3 e^(-psi)/theta^2.
pub fn metric_dc<F, G>(c1: F, c2: G, params: &ActivatorParams, grid: &[f64]) -> DcReport
where
    F: Fn(f64) -> Jet2,
    G: Fn(f64) -> Jet2,
{
    let mut s0: f64 = 0.0;
    let mut s1: f64 = 0.0;
    let mut s2: f64 = 0.0;
    let mut arg = (0usize, 0usize, 0usize);
    for (i, &t) in grid.iter().enumerate() {
        if t <= 0.0 || t >= params.horizon {
            continue;
        }
        let a = c1(t);
        let b = c2(t);
        let th = params.theta.eval(t);
        let ps = params.psi.eval(t);
        let d0 = (a.v - b.v).abs();
        let d1 = t * t / th * (a.d1 - b.d1).abs();
        let d2 = t * t * t * (-ps).exp() / (th * th) * (a.d2 - b.d2).abs();
        if d0 > s0 {
            s0 = d0;
            arg.0 = i;
        }
        if d1 > s1 {
            s1 = d1;
            arg.1 = i;
        }
        if d2 > s2 {
            s2 = d2;
            arg.2 = i;
        }
    }
    let last = grid.len().saturating_sub(1);
    let edge = |i: usize| i == 0 || i == last;
    DcReport {
        value: s0 + s1 + s2,
        sup_diff: s0,
        sup_first: s1,
        sup_second: s2,
        boundary_attained: (s0 > 0.0 && edge(arg.0))
            || (s1 > 0.0 && edge(arg.1))
            || (s2 > 0.0 && edge(arg.2)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    /// fitted C in |c'| <= C theta/t
    pub c_first: f64,
    /// fitted C in |c''| <= C (theta/t)^2 psi
    pub c_second: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub in_bounds: bool,
    /// sample times where c leaves [mu1, mu2]
    pub violations: Vec<f64>,
}

/// Fit the growth-estimate constants of the coefficient class over a grid.
pub fn membership_check<F>(c: F, params: &ActivatorParams, grid: &[f64]) -> MembershipReport
where
    F: Fn(f64) -> Jet2,
{
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    let mut min_c = f64::INFINITY;
    let mut max_c = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for &t in grid {
        if t <= 0.0 || t > params.horizon {
            continue;
        }
        let j = c(t);
        let th = params.theta.eval(t);
        let ps = params.psi.eval(t);
        c1 = c1.max(j.d1.abs() * t / th);
        c2 = c2.max(j.d2.abs() * t * t / (th * th * ps));
        min_c = min_c.min(j.v);
        max_c = max_c.max(j.v);
        if j.v < params.mu1 - 1e-12 || j.v > params.mu2 + 1e-12 {
            violations.push(t);
        }
    }
    MembershipReport { c_first: c1, c_second: c2, min_c, max_c, in_bounds: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{fd4_first, fd4_second};

    fn default_params() -> ActivatorParams {
        ActivatorParams::default_family(1.0)
    }

    #[test]
    fn params_validation() {
        assert!(ActivatorParams::new(
            2.0, 9.0, 4.0, 1.0, 0.9, 1.0,
            ProfileFn::LnOnePlusInv { pow: 2.0 },
            ProfileFn::LnOnePlusInv { pow: 1.0 },
        )
        .is_err()); // mu1 > gamma_t^2
        assert!(ActivatorParams::new(
            1.0, 9.0, 4.0, 2.0, 1.1, 1.0,
            ProfileFn::LnOnePlusInv { pow: 2.0 },
            ProfileFn::LnOnePlusInv { pow: 1.0 },
        )
        .is_err()); // T1 > T
        // theta = psi = 1 fails the divergence requirement.
        assert!(matches!(
            ActivatorParams::new(1.0, 9.0, 4.0, 2.0, 0.9, 1.0, ProfileFn::ONE, ProfileFn::ONE),
            Err(ActivatorError::GrowthCondition { .. })
        ));
        // boundary gamma_t^2 = mu1 accepted but flagged
        let boundary = ActivatorParams::new(
            1.0, 9.0, 4.0, 1.0, 0.5, 1.0,
            ProfileFn::LnOnePlusInv { pow: 2.0 },
            ProfileFn::LnOnePlusInv { pow: 1.0 },
        )
        .unwrap();
        assert!(!boundary.strict_ellipticity);
        assert!(default_params().strict_ellipticity);
    }

    #[test]
    fn window_hand_values() {
        // gamma_t = 1, rho = 1e6, default profile: the ln(rho)/8 branch of
        // psi_rho is active.
        let p = default_params();
        let inst = ActivatorInstance::build(&p, 1e6).unwrap();
        assert!((inst.psi_rho - 1e6f64.ln() / 8.0).abs() < 1e-12);
        assert!((inst.psi_rho - 1.72694).abs() < 1e-5);
        assert_eq!(inst.floor_a, 77);
        assert!((inst.a_rho - 4.8381e-4).abs() < 1e-7, "a_rho {}", inst.a_rho);
        assert_eq!(inst.floor_b, 436);
        assert!(inst.chain_ok);
        // theta(b_rho) > ln rho here, so theta_rho = ln rho.
        assert!((inst.theta_rho - 1e6f64.ln()).abs() < 1e-12);
        // rate: (ln 1e6 / 32) ln(436/77)
        let expect = 1e6f64.ln() / 32.0 * (436.0f64 / 77.0).ln();
        assert!((inst.phi_rho - expect).abs() < 1e-12);
        assert!((inst.phi_rho - 0.7486).abs() < 5e-4);
    }

    #[test]
    fn window_integers_and_chain() {
        let p = default_params();
        for rho in [1e3, 1e4, 1e5, 1e6, 1e7] {
            let inst = ActivatorInstance::build(&p, rho).unwrap();
            // integer conditions hold exactly before scaling
            let qa = p.gamma_t * rho * inst.a_rho / (2.0 * std::f64::consts::PI);
            let qb = p.gamma_t * rho * inst.b_rho / (2.0 * std::f64::consts::PI);
            assert!((qa - qa.round()).abs() < 1e-9);
            assert!((qb - qb.round()).abs() < 1e-9);
            assert!(inst.a_rho > 0.0 && inst.a_rho < inst.b_rho && inst.b_rho < p.t1);
        }
        // the full chain needs e^(psi_rho) >= 4, which the default profile
        // reaches only around rho ~ 1e5
        assert!(!ActivatorInstance::build(&p, 1e3).unwrap().chain_ok);
        assert!(ActivatorInstance::build(&p, 1e6).unwrap().chain_ok);
    }

    #[test]
    fn rho_admissibility() {
        let p = default_params();
        let rho_min = ActivatorInstance::min_admissible_rho(&p);
        assert!(ActivatorInstance::build(&p, rho_min * 1.01).is_ok());
        assert!(ActivatorInstance::build(&p, rho_min * 0.5).is_err());
    }

    #[test]
    fn envelope_piecewise_values() {
        let p = default_params();
        let inst = ActivatorInstance::build(&p, 1e6).unwrap();
        let (a, b) = (inst.a_rho, inst.b_rho);
        // zero outside the window
        assert_eq!(inst.eps_jet3(0.5 * a)[0], 0.0);
        assert_eq!(inst.eps_jet3(a)[0], 0.0);
        assert_eq!(inst.eps_jet3(b)[0], 0.0);
        assert_eq!(inst.eps_jet3(0.5), [0.0; 4]);
        // plateau value theta_rho / t on [2a, b/2]
        for t in [2.0 * a, 0.5 * (2.0 * a + 0.5 * b), 0.5 * b] {
            let e = inst.eps_jet3(t);
            assert!((e[0] - inst.theta_rho / t).abs() < 1e-9 * e[0].abs(), "t {t}");
        }
        // continuity across junctions
        for t0 in [a, 2.0 * a, 0.5 * b, b] {
            let lo = inst.eps_jet3(t0 * (1.0 - 1e-10))[0];
            let hi = inst.eps_jet3(t0 * (1.0 + 1e-10))[0];
            assert!((lo - hi).abs() < 1e-6 * (1.0 + lo.abs()), "jump at {t0}");
        }
    }

    #[test]
    fn envelope_derivatives_match_fd() {
        let p = default_params();
        let inst = ActivatorInstance::build(&p, 1e5).unwrap();
        let (a, b) = (inst.a_rho, inst.b_rho);
        // probe inside ramps and plateau, away from the C^2 junctions
        for frac in [0.3, 0.5, 0.7] {
            for t in [a * (1.0 + frac), 0.5 * (2.0 * a + 0.5 * b), b * (0.5 + 0.45 * frac)] {
                let e = inst.eps_jet3(t);
                let h = 1e-6 * t;
                let f = |s: f64| inst.eps_jet3(s)[0];
                assert!((e[1] - fd4_first(f, t, h)).abs() < 1e-4 * (1.0 + e[1].abs()));
                assert!((e[2] - fd4_second(f, t, h)).abs() < 2e-2 * (1.0 + e[2].abs()));
            }
        }
    }

    #[test]
    fn coefficient_plateau_and_tail() {
        let p = default_params();
        let inst = ActivatorInstance::build(&p, 1e5).unwrap();
        for t in [0.0, 0.5 * inst.a_rho, inst.a_rho] {
            assert_eq!(inst.c(t), p.c_star());
        }
        for t in [inst.b_rho, 0.5, 1.0] {
            assert_eq!(inst.c(t), p.c_star());
        }
    }

    #[test]
    fn coefficient_derivatives_match_fd() {
        let p = default_params();
        let inst = ActivatorInstance::build(&p, 1e4).unwrap();
        let mid = 0.5 * (2.0 * inst.a_rho + 0.5 * inst.b_rho);
        for t in [1.3 * inst.a_rho, mid, 0.8 * inst.b_rho] {
            let j = inst.c_jet(t);
            let h = inst.period() / 400.0;
            let f = |s: f64| inst.c_jet(s).v;
            let d1 = fd4_first(f, t, h);
            let d2 = fd4_second(f, t, h);
            assert!((j.d1 - d1).abs() < 1e-5 * (1.0 + d1.abs()), "{} vs {}", j.d1, d1);
            assert!((j.d2 - d2).abs() < 1e-3 * (1.0 + d2.abs()), "{} vs {}", j.d2, d2);
        }
    }

    #[test]
    fn membership_catalog() {
        let p = default_params();
        // constant speed: zero derivative constants, bounds pass
        let grid = log_grid(1e-9, 1.0, 2000);
        let rep = membership_check(|_| Jet2::con(p.mu3), &p, &grid);
        assert_eq!(rep.c_first, 0.0);
        assert_eq!(rep.c_second, 0.0);
        assert!(rep.in_bounds);

        // c(t) = 1/t escapes [mu1, mu2]
        let rep = membership_check(|t| Jet2::var(t).recip(), &p, &grid);
        assert!(!rep.in_bounds);

        // activator instances: constants bounded along the sweep, membership
        // bounds hold for large rho
        let mut firsts = Vec::new();
        for rho in [1e4, 1e5, 1e6] {
            let inst = ActivatorInstance::build(&p, rho).unwrap();
            let rep = membership_check(|t| inst.c_jet(t), &p, &inst.sample_grid(500, 32));
            assert!(rep.in_bounds, "rho {rho}: range [{}, {}]", rep.min_c, rep.max_c);
            assert!(rep.c_first.is_finite() && rep.c_second.is_finite());
            firsts.push(rep.c_first);
        }
        let sup = firsts.iter().cloned().fold(0.0, f64::max);
        assert!(sup < 10.0, "sweep sup {sup}");
    }

    #[test]
    fn metric_properties() {
        let p = default_params();
        let grid = log_grid(1e-9, 1.0, 2000);
        let c_star = |_t: f64| Jet2::con(p.c_star());
        // identity
        let rep = metric_dc(&c_star, &c_star, &p, &grid);
        assert_eq!(rep.value, 0.0);
        // symmetry on a random-ish pair
        let c1 = |t: f64| Jet2::var(t).sin() + 2.0;
        let c2 = |t: f64| (Jet2::var(t) * 2.0).cos() * 0.5 + 2.0;
        let ab = metric_dc(&c1, &c2, &p, &grid);
        let ba = metric_dc(&c2, &c1, &p, &grid);
        assert_eq!(ab.value, ba.value);
        // d_C(c_rho, c_star) decreases along the rho sweep
        let mut prev = f64::INFINITY;
        for rho in [1e3, 1e4, 1e5, 1e6] {
            let inst = ActivatorInstance::build(&p, rho).unwrap();
            let g = inst.sample_grid(500, 32);
            let d = metric_dc(|t| inst.c_jet(t), &c_star, &p, &g);
            assert!(d.value < prev, "rho {rho}: {} !< {prev}", d.value);
            prev = d.value;
        }
    }

    #[test]
    fn pointwise_convergence_to_c_star() {
        let p = default_params();
        // For fixed t > 0 the support [a_rho, b_rho] slides below t.
        let t = 0.01;
        let mut seen_nontrivial = false;
        for rho in [1e3, 1e4, 1e5, 1e6, 1e7] {
            let inst = ActivatorInstance::build(&p, rho).unwrap();
            if inst.b_rho > t {
                seen_nontrivial = true;
            } else {
                assert_eq!(inst.c(t), p.c_star());
            }
        }
        assert!(seen_nontrivial);
    }

    #[test]
    fn rate_grows_super_logarithmically() {
        let p = default_params();
        let mut prev_ratio = 0.0;
        for rho in [1e3, 1e4, 1e5, 1e6] {
            let inst = ActivatorInstance::build(&p, rho).unwrap();
            let ratio = inst.phi_rho / rho.ln();
            assert!(ratio > prev_ratio, "phi/ln rho not increasing at {rho}");
            prev_ratio = ratio;
        }
    }
}
