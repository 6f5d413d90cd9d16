//! Concrete coefficient models a(t,x) = omega(x)^2 m(x) c(t) with exact
//! derivative oracles, verification of the ellipticity/singularity bound
//! system, reconstruction of theta_tilde from theta, and the shift modulus
//! used by the continuity-in-parameters estimate.

use crate::jet::{fd4_first, fd4_second, Jet2};
use crate::phase::WeightPair;
use crate::profiles::{ProfileFn, SingularityProfile};
use crate::quad::{integrate_log_sub, QuadError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoefficientError {
    #[error("empty sample grid")]
    EmptyGrid,
    #[error("derivative oracle returned non-finite value at (t, x) = ({t:.3e}, {x:.3e})")]
    OracleFailure { t: f64, x: f64 },
    #[error("shift modulus preconditions need 0 <= eps2 <= eps1, tau + eps2 > 0, rho2 >= 1")]
    ShiftPrecondition,
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Time factor c(t); all catalog members are evaluated through second-order
/// jets so c, c', c'' come out exact to roundoff.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TimePart {
    Constant(f64),
    /// 2 + e^(-L^(1-alpha)) sin(L^(2 alpha) e^(L^(1-alpha))), L = ln(1/t)
    OscillatingDecay { alpha: f64 },
    /// ln(1 + 1/t)^4
    LogPowFour,
    /// 2 + t sin(1/t)
    MildOscillation,
    /// sin(1/t): crosses zero, deliberately breaks the ellipticity floor
    BrokenSign,
}

impl TimePart {
    /// Step for time difference quotients: a small fraction of the local
    /// oscillation scale (1/t^2 phase rate for the sin(1/t) members, ~1/t
    /// for the logarithmic ones).
    pub fn fd_step(&self, t: f64) -> f64 {
        match self {
            TimePart::MildOscillation | TimePart::BrokenSign => (2e-4 * t).min(0.01 * t * t),
            _ => 2e-4 * t,
        }
    }

    pub fn jet(&self, t: f64) -> Jet2 {
        let tv = Jet2::var(t);
        match *self {
            TimePart::Constant(v) => Jet2::con(v),
            TimePart::OscillatingDecay { alpha } => {
                let l = tv.recip().ln();
                let decay = (-l.powf(1.0 - alpha)).exp();
                decay * (l.powf(2.0 * alpha) * l.powf(1.0 - alpha).exp()).sin() + 2.0
            }
            TimePart::LogPowFour => (tv.recip() + 1.0).ln().powf(4.0),
            TimePart::MildOscillation => tv * tv.recip().sin() + 2.0,
            TimePart::BrokenSign => tv.recip().sin(),
        }
    }
}

/// Spatial factor m(x) >= 1 on top of omega^2; 1D catalog.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SpacePart {
    One,
    /// 2 + sin(<x>^(1 - kappa2))
    OscSin { kappa2: f64 },
}

impl SpacePart {
    pub fn jet(&self, x: f64) -> Jet2 {
        let xv = Jet2::var(x);
        let jb = (xv * xv + 1.0).sqrt();
        match *self {
            SpacePart::One => Jet2::con(1.0),
            SpacePart::OscSin { kappa2 } => jb.powf(1.0 - kappa2).sin() + 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientModel {
    pub tag: String,
    pub time_part: TimePart,
    pub space_part: SpacePart,
    pub weights: WeightPair,
    pub profile: SingularityProfile,
    pub horizon: f64,
}

impl CoefficientModel {
    /// a = 4 <x>^(2 kappa1) (2 + sin(<x>^(1 - kappa2))) c(t) with the
    /// oscillating-decay time factor.
    pub fn example_1_1(alpha: f64, kappa1: f64, kappa2: f64, horizon: f64) -> Self {
        CoefficientModel {
            tag: "example-1.1".into(),
            time_part: TimePart::OscillatingDecay { alpha },
            space_part: SpacePart::OscSin { kappa2 },
            weights: WeightPair::new(2.0, kappa1, kappa2).unwrap(),
            profile: SingularityProfile::example_1_1(alpha, horizon),
            horizon,
        }
    }

    /// a = ln(1 + 1/t)^4, flat weights.
    pub fn example_1_2(horizon: f64) -> Self {
        CoefficientModel {
            tag: "example-1.2".into(),
            time_part: TimePart::LogPowFour,
            space_part: SpacePart::One,
            weights: WeightPair::flat(),
            profile: SingularityProfile::example_1_2(horizon),
            horizon,
        }
    }

    /// a = 9 <x>^2 (2 + t sin(1/t)).
    pub fn example_1_3(horizon: f64) -> Self {
        CoefficientModel {
            tag: "example-1.3".into(),
            time_part: TimePart::MildOscillation,
            space_part: SpacePart::One,
            weights: WeightPair::new(3.0, 1.0, 1.0).unwrap(),
            profile: SingularityProfile::example_1_3(horizon),
            horizon,
        }
    }

    pub fn constant(horizon: f64) -> Self {
        CoefficientModel {
            tag: "constant".into(),
            time_part: TimePart::Constant(1.0),
            space_part: SpacePart::One,
            weights: WeightPair::flat(),
            profile: SingularityProfile::constant(horizon),
            horizon,
        }
    }

    /// Same spatial structure as the mild-oscillation model but with a time
    /// factor that changes sign: the ellipticity check must flag it.
    pub fn broken(horizon: f64) -> Self {
        CoefficientModel {
            tag: "broken-sign".into(),
            time_part: TimePart::BrokenSign,
            space_part: SpacePart::One,
            weights: WeightPair::new(1.0, 1.0, 1.0).unwrap(),
            profile: SingularityProfile::example_1_3(horizon),
            horizon,
        }
    }

    pub fn catalog(horizon_small: f64) -> Vec<CoefficientModel> {
        vec![
            Self::constant(1.0),
            Self::example_1_1(0.5, 0.5, 1.0, horizon_small),
            Self::example_1_2(horizon_small),
            Self::example_1_3(horizon_small),
        ]
    }

    pub fn by_tag(tag: &str) -> Option<CoefficientModel> {
        Some(match tag {
            "constant" => Self::constant(1.0),
            "example-1.1" => Self::example_1_1(0.5, 0.5, 1.0, 0.1),
            "example-1.2" => Self::example_1_2(0.1),
            "example-1.3" => Self::example_1_3(0.1),
            "broken-sign" => Self::broken(0.1),
            _ => return None,
        })
    }

    /// Spatial profile g(x) = omega(x)^2 m(x) as a jet in x.
    fn space_jet(&self, x: f64) -> Jet2 {
        let xv = Jet2::var(x);
        let jb = (xv * xv + 1.0).sqrt();
        let om2 = jb.powf(2.0 * self.weights.kappa1) * (self.weights.c_omega * self.weights.c_omega);
        om2 * self.space_part.jet(x)
    }

    pub fn a(&self, t: f64, x: f64) -> f64 {
        self.space_jet(x).v * self.time_part.jet(t).v
    }

    /// d^beta/dx^beta d^j/dt^j a(t, x), beta <= 2, j <= 2.
    pub fn deriv(&self, t: f64, x: f64, beta: usize, j: usize) -> f64 {
        let g = self.space_jet(x);
        let c = self.time_part.jet(t);
        let gv = [g.v, g.d1, g.d2][beta];
        let cv = [c.v, c.d1, c.d2][j];
        gv * cv
    }
}

/// Finite-difference fallback for a generic callable a(t, x); relative time
/// steps respect the singularity at t = 0.
pub struct FdCoefficient<F: Fn(f64, f64) -> f64> {
    pub f: F,
}

impl<F: Fn(f64, f64) -> f64> FdCoefficient<F> {
    pub fn deriv(&self, t: f64, x: f64, beta: usize, j: usize) -> f64 {
        // Mixed derivatives nest two difference quotients, so their steps are
        // widened: the inner quotient's roundoff would otherwise be amplified
        // by 1/h^2 of the outer one.
        let (ht, hx) = if beta > 0 && j > 0 {
            ((1e-2 * t).max(1e-8), 3e-2 * (1.0 + x.abs()))
        } else {
            ((1e-3 * t).max(1e-8), 1e-4 * (1.0 + x.abs()))
        };
        let at_x = |beta: usize, t: f64| match beta {
            0 => (self.f)(t, x),
            1 => fd4_first(|u| (self.f)(t, u), x, hx),
            _ => fd4_second(|u| (self.f)(t, u), x, hx),
        };
        match j {
            0 => at_x(beta, t),
            1 => fd4_first(|s| at_x(beta, s), t, ht),
            _ => fd4_second(|s| at_x(beta, s), t, ht),
        }
    }
}

/// Compare an analytic derivative of the model with its FD4 difference
/// quotient. Agreement is measured against the stencil supremum of the
/// analytic derivative: at interior zeros of an oscillating derivative no
/// double-precision difference quotient can certify digits relative to the
/// vanishing value itself. Returns (within_tol, analytic, finite_difference).
pub fn fd_oracle_check(
    m: &CoefficientModel,
    t: f64,
    x: f64,
    beta: usize,
    j: usize,
    tol: f64,
) -> (bool, f64, f64) {
    let hx = 1e-5 * (1.0 + x.abs());
    let ht = m.time_part.fd_step(t);
    let an = m.deriv(t, x, beta, j);
    // h^order of the quotient actually applied, for its roundoff floor
    let (fd, h_pow) = match j {
        0 => match beta {
            0 => (m.a(t, x), 1.0),
            1 => (fd4_first(|u| m.a(t, u), x, hx), hx),
            _ => {
                let h = 10.0 * hx;
                (fd4_second(|u| m.a(t, u), x, h), h * h)
            }
        },
        1 => (fd4_first(|s| m.deriv(s, x, beta, 0), t, ht), ht),
        _ => (fd4_second(|s| m.deriv(s, x, beta, 0), t, ht), ht * ht),
    };
    let mut scale = 1.0 + an.abs().max(fd.abs());
    for k in [-2.0f64, -1.0, 1.0, 2.0] {
        let p = if j == 0 { m.deriv(t, x + k * hx, beta, j) } else { m.deriv(t + k * ht, x, beta, j) };
        scale = scale.max(p.abs());
    }
    // the quotient cannot resolve below the roundoff of its own numerator
    let floor = 40.0 * f64::EPSILON * m.a(t, x).abs() / h_pow;
    ((an - fd).abs() <= tol * scale + floor, an, fd)
}

#[derive(Clone, Debug, Serialize)]
pub struct FittedBound {
    /// 0 = size bound, 1 = first time derivative, 2 = second time derivative
    pub time_order: usize,
    pub beta: usize,
    /// grid supremum of |derivative| / right-hand side
    pub constant: f64,
    pub argmax: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub model: String,
    /// grid infimum of a / omega^2
    pub c0: f64,
    pub c0_argmin: (f64, f64),
    pub bounds: Vec<FittedBound>,
    /// samples where a(t, x) <= 0
    pub violations: Vec<(f64, f64)>,
}

impl BoundReport {
    pub fn elliptic(&self) -> bool {
        self.c0 > 0.0 && self.violations.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.c0.is_finite() && self.bounds.iter().all(|b| b.constant.is_finite())
    }
}

/// Fit the constants of the bound system over a sample grid. The right-hand
/// sides use the model's own profile and weights; constants are reported,
/// never asserted against any reference value.
pub fn verify_bounds(
    model: &CoefficientModel,
    grid: &[(f64, f64)],
    max_beta: usize,
) -> Result<BoundReport, CoefficientError> {
    if grid.is_empty() {
        return Err(CoefficientError::EmptyGrid);
    }
    let mut c0 = f64::INFINITY;
    let mut c0_argmin = grid[0];
    let mut violations = Vec::new();
    let mut fitted: Vec<FittedBound> = Vec::new();
    for j in 0..=2usize {
        for beta in 0..=max_beta {
            fitted.push(FittedBound { time_order: j, beta, constant: 0.0, argmax: grid[0] });
        }
    }
    for &(t, x) in grid {
        let om2 = model.weights.omega(&[x]).powi(2);
        let phi = model.weights.phi(&[x]);
        let th = model.profile.theta.eval(t);
        let tt = model.profile.theta_tilde.eval(t);
        let ps = model.profile.psi.eval(t);
        let av = model.a(t, x);
        if !av.is_finite() {
            return Err(CoefficientError::OracleFailure { t, x });
        }
        if av <= 0.0 {
            violations.push((t, x));
        }
        if av / om2 < c0 {
            c0 = av / om2;
            c0_argmin = (t, x);
        }
        let mut idx = 0usize;
        for j in 0..=2usize {
            let tfac = match j {
                0 => tt,
                1 => th / t,
                _ => (th / t).powi(2) * ps.exp(),
            };
            for beta in 0..=max_beta {
                let d = model.deriv(t, x, beta, j);
                if !d.is_finite() {
                    return Err(CoefficientError::OracleFailure { t, x });
                }
                let rhs = tfac * om2 * phi.powi(-(beta as i32));
                let ratio = d.abs() / rhs;
                if ratio > fitted[idx].constant {
                    fitted[idx].constant = ratio;
                    fitted[idx].argmax = (t, x);
                }
                idx += 1;
            }
        }
    }
    Ok(BoundReport { model: model.tag.clone(), c0, c0_argmin, bounds: fitted, violations })
}

/// Reconstruct theta_tilde(t) = int_t^T theta(s)/s ds on a grid, together
/// with the smallest t the quadrature handled.
pub fn theta_tilde_reconstruct(
    theta: &ProfileFn,
    horizon: f64,
    t_grid: &[f64],
) -> Result<Vec<f64>, CoefficientError> {
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t >= horizon {
            out.push(0.0);
            continue;
        }
        let v = integrate_log_sub(|s| theta.eval(s) / s, t, horizon, 1e-11)?;
        out.push(v);
    }
    Ok(out)
}

/// Modulus of continuity in the regularizing parameter:
/// E(tau, eps1, eps2) = 1/2 (ln(1 + (eps1 - eps2)/(tau + eps2)))^(rho2 + 1).
pub fn shift_modulus(tau: f64, eps1: f64, eps2: f64, rho2: f64) -> Result<f64, CoefficientError> {
    if !(0.0 <= eps2 && eps2 <= eps1 && tau + eps2 > 0.0 && rho2 >= 1.0) {
        return Err(CoefficientError::ShiftPrecondition);
    }
    Ok(0.5 * ((eps1 - eps2) / (tau + eps2)).ln_1p().powf(rho2 + 1.0))
}
