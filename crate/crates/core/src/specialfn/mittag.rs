use std::f64::consts::PI;

use super::gamma::{ln_gamma, rgamma, sinpi};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, AdaptiveOpts};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!(
            "mittag_leffler: alpha={alpha} outside (0,1]"
        )));
    }
    Ok(())
}

/// `E_α(-x)` for `0 < α ≤ 1`, `x ≥ 0`.
pub fn mittag_leffler(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x >= 0.0) || !x.is_finite() {
        if x == f64::INFINITY {
            return Ok(0.0);
        }
        return Err(Error::domain(format!(
            "mittag_leffler: x={x} must be finite and >= 0"
        )));
    }
    if alpha == 1.0 {
        return Ok((-x).exp());
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x <= 1.0 {
        return Ok(series(alpha, x));
    }
    if let Some(terms) = asymptotic(alpha, x) {
        return Ok(compensated(terms));
    }
    integral(alpha, x)
}

/// `E_α(-x) - 1/(Γ(1-α) x)`, accurate where the difference is small.
pub fn mittag_leffler_remainder(alpha: f64, x: f64) -> Result<f64> {
    mittag_leffler_subtracted(alpha, x, 1)
}

/// `E_α(-x)` minus the first `order` terms of its large-`x` expansion
/// `Σ_{j≥1} (-1)^{j+1} x^{-j}/Γ(1-αj)`; equals `e^{-x}` when `α = 1`.
pub(crate) fn mittag_leffler_subtracted(alpha: f64, x: f64, order: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0) {
        return Err(Error::domain("mittag_leffler_remainder: x must be > 0"));
    }
    if alpha == 1.0 {
        return Ok((-x).exp());
    }
    if x > 1.0 {
        if let Some(terms) = asymptotic(alpha, x) {
            return Ok(compensated(terms.iter().skip(order).copied()));
        }
    }
    let e = mittag_leffler(alpha, x)?;
    Ok(e - compensated((1..=order).map(|j| expansion_term(alpha, x, j))))
}

fn expansion_term(alpha: f64, x: f64, j: usize) -> f64 {
    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
    sign * rgamma(1.0 - alpha * j as f64) * x.powi(-(j as i32))
}

fn compensated<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    crate::quad::compensated_sum(it)
}

fn series(alpha: f64, x: f64) -> f64 {
    let mut sum = 1.0;
    let mut comp = 0.0;
    let lx = x.ln();
    for j in 1..2000 {
        let jf = j as f64;
        let mag = (jf * lx - ln_gamma(1.0 + alpha * jf)).exp();
        let term = if j % 2 == 1 { -mag } else { mag };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if mag < 1e-18 * sum.abs() && jf * alpha > 2.0 {
            break;
        }
    }
    sum + comp
}

// Terms j = 1, 2, ... of the divergent expansion Σ (-1)^{j+1} x^{-j}/Γ(1-αj),
// returned only when the smallest term is negligible.
fn asymptotic(alpha: f64, x: f64) -> Option<Vec<f64>> {
    let lead = expansion_term(alpha, x, 1);
    let mut terms = vec![lead];
    let mut prev = lead.abs();
    let mut growing = 0;
    let lx = x.ln();
    for j in 2..400 {
        let jf = j as f64;
        let r = rgamma(1.0 - alpha * jf);
        if r == 0.0 {
            terms.push(0.0);
            continue;
        }
        let mag = r.abs() * (-jf * lx).exp();
        if !mag.is_finite() {
            return None;
        }
        if mag < 1e-17 * lead.abs() {
            return Some(terms);
        }
        if mag > prev {
            growing += 1;
            if growing >= 2 {
                return None;
            }
        } else {
            growing = 0;
        }
        prev = mag;
        terms.push(expansion_term(alpha, x, j));
    }
    None
}

// E_α(-x) = sin(απ)/(απ) ∫₀^∞ e^{-v^{1/α}} x / (v² + 2 v x cos(απ) + x²) dv
fn integral(alpha: f64, x: f64) -> Result<f64> {
    let c = (alpha * PI).cos();
    let s = sinpi(alpha);
    let inv_a = 1.0 / alpha;
    let vmax = 42f64.powf(alpha);
    let mut breaks = vec![];
    if c < 0.0 {
        let peak = -c * x;
        let width = s * x;
        for p in [peak - width, peak, peak + width] {
            if p > 0.0 && p < vmax {
                breaks.push(p);
            }
        }
    }
    let f = |v: f64| {
        let e = (-v.powf(inv_a)).exp();
        e * x / (v * v + 2.0 * v * x * c + x * x)
    };
    let r = integrate_with_breaks(
        f,
        0.0,
        vmax,
        &breaks,
        AdaptiveOpts {
            abs_tol: 1e-17,
            rel_tol: 1e-14,
            max_intervals: 4000,
        },
    );
    let val = s / (alpha * PI) * r.value;
    if !r.converged && r.abs_err > 1e-12 * r.value.abs() {
        return Err(Error::numeric(
            "mittag_leffler: integral did not converge",
            Some(val),
        ));
    }
    Ok(val)
}
