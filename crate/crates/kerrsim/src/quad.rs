//! Adaptive Simpson quadrature for real- and complex-valued integrands.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

const MAX_DEPTH: u32 = 60;

fn simpson<T>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adapt<T, F>(
    f: &F,
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
    norm: fn(T) -> f64,
) -> Result<T>
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = norm(left + right - whole);
    // A minimum depth guards against spuriously accepting a coarse estimate
    // when the integrand is localized well inside the panel.
    if depth >= 3 && err <= 15.0 * tol {
        // Richardson correction for the composite estimate.
        return Ok(left + right + (left + right - whole) * (1.0 / 15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!(
            "max refinement depth reached on [{a}, {b}] (residual {err:.3e})"
        )));
    }
    let l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, norm)?;
    let r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, norm)?;
    Ok(l + r)
}

fn run<T, F>(f: F, a: f64, b: f64, tol: f64, zero: T, norm: fn(T) -> f64) -> Result<T>
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    if a == b {
        return Ok(zero);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature("non-finite integration bounds".into()));
    }
    // Split into a few panels up front so narrow features are not missed by
    // the first Simpson estimate.
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = zero;
    for k in 0..panels {
        let x0 = a + h * k as f64;
        let x1 = a + h * (k + 1) as f64;
        let xm = 0.5 * (x0 + x1);
        let f0 = f(x0);
        let fm = f(xm);
        let f1 = f(x1);
        if !norm(f0).is_finite() || !norm(fm).is_finite() || !norm(f1).is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{x0}, {x1}]"
            )));
        }
        let whole = simpson(x0, x1, f0, fm, f1);
        total = total
            + adapt(
                &f,
                x0,
                x1,
                f0,
                fm,
                f1,
                whole,
                tol / panels as f64,
                0,
                norm,
            )?;
    }
    Ok(total)
}

/// Adaptive Simpson integral of a real function over [a, b] to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    run(f, a, b, tol, 0.0, f64::abs)
}

/// Adaptive Simpson integral of a complex function over [a, b].
pub fn integrate_complex<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> Result<C64> {
    run(f, a, b, tol, C64::new(0.0, 0.0), |z: C64| z.norm())
}
