//! Adaptive quadrature used for the loss-scale reconstruction and the
//! majorant time integrals. Endpoint singularities of logarithmic type are
//! handled by a log substitution, which turns them into slowly varying
//! integrands.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge on [{a}, {b}] (best error {err:.3e})")]
    NoConvergence { a: f64, b: f64, err: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole) / 15.0;
    if err.abs() <= tol || depth == 0 {
        if depth == 0 {
            *worst = worst.max(err.abs());
        }
        return left + right + err;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}

/// Adaptive Simpson rule with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    if !a.is_finite() || !b.is_finite() || a == b {
        return Err(QuadError::BadInterval { a, b });
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(QuadError::NoConvergence { a, b, err: f64::INFINITY });
    }
    let whole = simpson(a, b, fa, fm, fb);
    let mut worst = 0.0;
    let v = adapt(&f, a, b, fa, fm, fb, whole, tol, 48, &mut worst);
    if worst > tol.max(1e-14) * 1e3 {
        return Err(QuadError::NoConvergence { a, b, err: worst });
    }
    Ok(v)
}

/// Integrate f over [a, b] with 0 < a < b where f may blow up like a power of
/// |ln t| at 0. Substitutes t = e^u so the grid is logarithmic in t.
pub fn integrate_log_sub<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    if !(a > 0.0 && b > a) {
        return Err(QuadError::BadInterval { a, b });
    }
    adaptive_simpson(|u| { let t = u.exp(); f(t) * t }, a.ln(), b.ln(), tol)
}
