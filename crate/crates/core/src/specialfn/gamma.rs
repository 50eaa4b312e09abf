use std::f64::consts::PI;

use super::ComplexVal;
use crate::error::{Error, Result};

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_741_780_329_736_406;
const LN_PI: f64 = 1.144_729_885_849_400_174_143_427_351_353;

// B_{2m} / (2m (2m-1)), m = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const SHIFT_TO: f64 = 12.0;

/// `sin(πx)` with exact argument reduction.
pub fn sinpi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `cos(πx)` with exact argument reduction.
pub fn cospi(x: f64) -> f64 {
    sinpi(x + 0.5)
}

fn stirling(z: ComplexVal) -> ComplexVal {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = ComplexVal::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_2PI_HALF + series
}

fn csinpi(z: ComplexVal) -> ComplexVal {
    let (x, y) = (z.re, z.im);
    ComplexVal::new(sinpi(x) * (PI * y).cosh(), cospi(x) * (PI * y).sinh())
}

fn is_pole(z: ComplexVal) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor()
}

/// Principal branch of `log Γ(z)`.
pub fn log_gamma(z: ComplexVal) -> Result<ComplexVal> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("log_gamma: non-finite argument"));
    }
    if is_pole(z) {
        return Err(Error::domain(format!("log_gamma: pole at {}", z.re)));
    }
    Ok(log_gamma_unchecked(z))
}

pub(crate) fn log_gamma_unchecked(z: ComplexVal) -> ComplexVal {
    if z.im == 0.0 && z.re > 0.0 {
        return ComplexVal::new(statrs::function::gamma::ln_gamma(z.re), 0.0);
    }
    if z.im == 0.0 && z.re < 0.5 {
        // real reflection, imaginary part fixed by the principal branch
        let tmp = 2.0 * PI * (0.5 * z.re + 0.25).floor();
        let s = csinpi(z);
        return ComplexVal::new(LN_PI, tmp) - s.ln() - log_gamma_unchecked(1.0 - z);
    }
    if z.norm() >= SHIFT_TO && z.re > 0.0 {
        return stirling(z);
    }
    // upward recurrence; Im(z+j) is constant so each principal log is
    // analytic along the shift and the sum is the principal continuation
    let n = (SHIFT_TO - z.re).ceil().max(0.0) as usize;
    let mut acc = ComplexVal::new(0.0, 0.0);
    let mut w = z;
    let mut prod = ComplexVal::new(1.0, 0.0);
    let mut k = 0;
    for _ in 0..n {
        prod *= w;
        k += 1;
        if k == 8 || prod.norm() > 1e250 || prod.norm() < 1e-250 {
            acc += prod.ln();
            prod = ComplexVal::new(1.0, 0.0);
            k = 0;
        }
        w += 1.0;
    }
    acc += prod.ln();
    // products of up to eight factors can wrap the imaginary part; recover
    // the continuous branch from the per-factor arguments
    let mut arg_sum = 0.0;
    let mut v = z;
    for _ in 0..n {
        arg_sum += v.im.atan2(v.re);
        v += 1.0;
    }
    let wraps = ((arg_sum - acc.im) / (2.0 * PI)).round();
    acc.im += 2.0 * PI * wraps;
    stirling(w) - acc
}

/// `log|Γ(z)|` for complex `z`.
pub fn ln_abs_gamma(z: ComplexVal) -> f64 {
    log_gamma_unchecked(z).re
}

/// Real `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    log_gamma_unchecked(ComplexVal::new(x, 0.0)).re
}

/// Real `Γ(x)`, including negative non-integer arguments.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma(x).exp()
    } else {
        let r = rgamma(x);
        if r == 0.0 {
            f64::INFINITY
        } else {
            1.0 / r
        }
    }
}

/// Reciprocal gamma `1/Γ(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x > 0.0 {
        return (-ln_gamma(x)).exp();
    }
    if x == x.floor() {
        return 0.0;
    }
    // 1/Γ(x) = Γ(1-x) sin(πx) / π
    (ln_gamma(1.0 - x)).exp() * sinpi(x) / PI
}

/// `ln B(a, b)` for positive arguments.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}
