//! Special functions for regression diagnostics: log-gamma, the regularized
//! incomplete beta function, and the F-distribution tail probability.
//!
//! Hand-rolled so the p-value path stays dependency-free and bit-stable
//! across platforms. The continued fraction targets relative error below
//! 1e-10 over the parameter ranges regression diagnostics produce.

use crate::error::{Error, Result};

/// ln Γ(z) for z > 0, Lanczos approximation (Numerical Recipes coefficients).
pub fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, c) in COEF.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

/// Regularized incomplete beta function I_x(a, b), evaluated via the
/// Lentz continued fraction with the symmetry flip for fast convergence.
pub fn inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Numerical(format!("inc_beta: x={x} outside [0,1]")));
    }
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Numerical(format!(
            "inc_beta: shape parameters must be positive (a={a}, b={b})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    // Converges fastest for x < (a+1)/(a+b+2); flip otherwise.
    if x > (a + 1.0) / (a + b + 2.0) {
        return Ok(1.0 - inc_beta(1.0 - x, b, a)?);
    }

    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();

    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-30;

    let mut f = 1.0;
    let mut c = 1.0;
    let mut d = 0.0;
    for m in 0..MAX_ITER {
        let mf = m as f64;
        let odd = -(a + mf) * (a + b + mf) * x / ((a + 2.0 * mf) * (a + 2.0 * mf + 1.0));
        let mut delta = lentz_step(odd, &mut c, &mut d, TINY);
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(front * f / a);
        }
        let even = (mf + 1.0) * (b - mf - 1.0) * x / ((a + 2.0 * mf + 1.0) * (a + 2.0 * mf + 2.0));
        delta = lentz_step(even, &mut c, &mut d, TINY);
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(front * f / a);
        }
    }
    Err(Error::Numerical(format!(
        "inc_beta: continued fraction did not converge (x={x}, a={a}, b={b})"
    )))
}

fn lentz_step(coef: f64, c: &mut f64, d: &mut f64, tiny: f64) -> f64 {
    *d = 1.0 + coef * *d;
    if d.abs() < tiny {
        *d = tiny;
    }
    *d = 1.0 / *d;
    *c = 1.0 + coef / *c;
    if c.abs() < tiny {
        *c = tiny;
    }
    *c * *d
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Upper tail P(F > f) for an F distribution with (d1, d2) degrees of freedom.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> Result<f64> {
    if d1 <= 0.0 || d2 <= 0.0 {
        return Err(Error::Numerical(format!(
            "f_survival: degrees of freedom must be positive (d1={d1}, d2={d2})"
        )));
    }
    if f <= 0.0 {
        return Ok(1.0);
    }
    if !f.is_finite() {
        return Ok(0.0);
    }
    // P(F > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2)
    let x = d2 / (d2 + d1 * f);
    inc_beta(x, d2 / 2.0, d1 / 2.0)
}
