use super::gamma::log_gamma_unchecked;
use super::{ComplexVal, SeriesConfig};
use crate::error::{Error, Result};

fn is_nonpositive_int(b: ComplexVal) -> bool {
    b.im == 0.0 && b.re <= 0.0 && b.re == b.re.floor()
}

#[derive(Default)]
struct CSum {
    s: ComplexVal,
    c: ComplexVal,
}

impl CSum {
    fn add(&mut self, x: ComplexVal) {
        let comp = |s: f64, x: f64, c: &mut f64| {
            let t = s + x;
            if s.abs() >= x.abs() {
                *c += (s - t) + x;
            } else {
                *c += (x - t) + s;
            }
            t
        };
        self.s.re = comp(self.s.re, x.re, &mut self.c.re);
        self.s.im = comp(self.s.im, x.im, &mut self.c.im);
    }

    fn value(&self) -> ComplexVal {
        self.s + self.c
    }
}

/// Generic Gauss/Kummer-type series Σ Π(aᵢ)ₙ / Π(bⱼ)ₙ zⁿ/n!.
fn pfq_series(
    a: &[ComplexVal],
    b: &[ComplexVal],
    z: f64,
    cfg: &SeriesConfig,
    name: &str,
) -> Result<ComplexVal> {
    let mut term = ComplexVal::new(1.0, 0.0);
    let mut sum = CSum::default();
    sum.add(term);
    let stop = cfg.rel_tol * 1e-5;
    let mut small = 0;
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        let mut num = ComplexVal::new(z / (nf + 1.0), 0.0);
        for ai in a {
            num *= ai + nf;
        }
        let mut den = ComplexVal::new(1.0, 0.0);
        for bj in b {
            den *= bj + nf;
        }
        let ratio = num / den;
        term *= ratio;
        sum.add(term);
        if term.norm() == 0.0 {
            return Ok(sum.value());
        }
        if ratio.norm() < 1.0 && term.norm() <= stop * sum.value().norm() {
            small += 1;
            if small >= 2 {
                return Ok(sum.value());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::numeric(
        format!(
            "{name}: series did not converge in {} terms (partial sum {})",
            cfg.max_terms,
            sum.value()
        ),
        Some(sum.value().re),
    ))
}

/// Kummer `₁F₁(a; b; z)` for real `|z| ≤ 100`.
pub fn hyp1f1(a: ComplexVal, b: ComplexVal, z: f64, cfg: &SeriesConfig) -> Result<ComplexVal> {
    if is_nonpositive_int(b) {
        return Err(Error::domain("hyp1f1: b is a non-positive integer"));
    }
    if !(z.abs() <= 100.0) {
        return Err(Error::domain(format!(
            "hyp1f1: |z|={} exceeds 100",
            z.abs()
        )));
    }
    if z == 0.0 {
        return Ok(ComplexVal::new(1.0, 0.0));
    }
    if z < 0.0 {
        // Kummer transformation avoids alternating cancellation
        let v = pfq_series(&[b - a], &[b], -z, cfg, "hyp1f1")?;
        return Ok(v * z.exp());
    }
    pfq_series(&[a], &[b], z, cfg, "hyp1f1")
}

/// Gauss `₂F₁(a, b; c; z)` for real `c > 0` and `z ≤ 0`.
pub fn hyp2f1(
    a: ComplexVal,
    b: ComplexVal,
    c: f64,
    z: f64,
    cfg: &SeriesConfig,
) -> Result<ComplexVal> {
    if !(c > 0.0) {
        return Err(Error::domain("hyp2f1: c must be > 0"));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::domain("hyp2f1: z must be finite and <= 0"));
    }
    if z == 0.0 {
        return Ok(ComplexVal::new(1.0, 0.0));
    }
    let conj = (a - b.conj()).norm() <= 1e-14 * (1.0 + a.norm());
    if conj && a.im != 0.0 {
        let v = ConjHyp2f1::new(a.re, a.im.abs(), c).eval(&[z], cfg)?;
        return Ok(ComplexVal::new(v[0], 0.0));
    }
    let cc = ComplexVal::new(c, 0.0);
    if z >= -0.5 {
        return pfq_series(&[a, b], &[cc], z, cfg, "hyp2f1");
    }
    let d = a - b;
    let near_int = (d.re - d.re.round()).abs() < 1e-8 && d.im.abs() < 1e-8;
    if z < -1.0 && !near_int {
        return inverse_transform(a, b, c, z, cfg);
    }
    // Pfaff: (1-z)^{-a} ₂F₁(a, c-b; c; z/(z-1))
    let w = z / (z - 1.0);
    let f = pfq_series(&[a, cc - b], &[cc], w, cfg, "hyp2f1")?;
    Ok(f * (-a * (1.0 - z).ln()).exp())
}

// z → 1/(1-z) connection formula, valid for a - b not an integer
fn inverse_transform(
    a: ComplexVal,
    b: ComplexVal,
    c: f64,
    z: f64,
    cfg: &SeriesConfig,
) -> Result<ComplexVal> {
    let v = 1.0 / (1.0 - z);
    let lz = (1.0 - z).ln();
    let cc = ComplexVal::new(c, 0.0);
    let lgc = log_gamma_unchecked(cc);
    let term = |p: ComplexVal, q: ComplexVal| -> Result<ComplexVal> {
        // Γ(c)Γ(q-p)/(Γ(q)Γ(c-p)) (1-z)^{-p} F(p, c-q; p-q+1; v)
        let lg =
            lgc + log_gamma_unchecked(q - p) - log_gamma_unchecked(q) - log_gamma_unchecked(cc - p);
        let f = pfq_series(&[p, cc - q], &[p - q + 1.0], v, cfg, "hyp2f1")?;
        Ok((lg - p * lz).exp() * f)
    };
    Ok(term(a, b)? + term(b, a)?)
}

/// `₂F₁(a, ā; c; z)` on the negative real axis, with `a = p + iq`.
///
/// The function is real there and satisfies a real ODE, so when the power
/// series would cancel catastrophically (large `q`), the value is carried
/// from a small `|z|` by Taylor steps of that ODE.
#[derive(Debug, Clone, Copy)]
pub struct ConjHyp2f1 {
    p: f64,
    q: f64,
    c: f64,
}

#[derive(Debug, Clone, Copy)]
struct OdeState {
    z: f64,
    f: f64,
    df: f64,
}

impl ConjHyp2f1 {
    pub fn new(p: f64, q: f64, c: f64) -> Self {
        Self { p, q: q.abs(), c }
    }

    fn ab(&self) -> f64 {
        self.p * self.p + self.q * self.q
    }

    fn a(&self) -> ComplexVal {
        ComplexVal::new(self.p, self.q)
    }

    fn real_series(&self, p: f64, c: f64, z: f64, cfg: &SeriesConfig) -> Result<f64> {
        let mut term = 1.0;
        let mut sum = crate::quad::Compensated::new();
        sum.add(1.0);
        let stop = cfg.rel_tol * 1e-5;
        for n in 0..cfg.max_terms {
            let nf = n as f64;
            let pn = p + nf;
            term *= (pn * pn + self.q * self.q) / ((c + nf) * (nf + 1.0)) * z;
            sum.add(term);
            if term.abs() <= stop * sum.value().abs() && nf > 2.0 * z.abs() * (self.q + p.abs()) {
                return Ok(sum.value());
            }
        }
        Err(Error::numeric(
            "hyp2f1: conjugate series did not converge",
            Some(sum.value()),
        ))
    }

    fn direct_ok(&self, z: f64) -> bool {
        z.abs() <= 0.5 && self.a().norm() * z.abs().sqrt() <= 3.0
    }

    fn transform_ok(&self, z: f64) -> bool {
        let v = 1.0 / (1.0 - z);
        v <= 0.5 && self.q >= 0.05 && self.q * v <= 6.0
    }

    fn transform(&self, z: f64, cfg: &SeriesConfig) -> Result<f64> {
        let a = self.a();
        let v = inverse_transform(a, a.conj(), self.c, z, cfg)?;
        Ok(v.re)
    }

    fn start(&self, target: f64, cfg: &SeriesConfig) -> Result<OdeState> {
        let a2 = self.a().norm_sqr().max(1.0);
        let z = -(4.0 / a2).min(0.25).min(target.abs());
        let f = self.real_series(self.p, self.c, z, cfg)?;
        let g = self.real_series(self.p + 1.0, self.c + 1.0, z, cfg)?;
        Ok(OdeState {
            z,
            f,
            df: self.ab() / self.c * g,
        })
    }

    fn step_to(&self, s: &mut OdeState, target: f64) -> Result<()> {
        let ab = self.ab();
        let apb1 = 2.0 * self.p + 1.0;
        while s.z > target {
            let z0 = s.z;
            let p0 = z0 * (1.0 - z0);
            let omega = (ab / (-p0)).sqrt();
            let hmax = (0.35 * z0.abs()).min(2.0 / omega.max(1e-300));
            let h = -(hmax.min(z0 - target));
            let p1 = 1.0 - 2.0 * z0;
            let q0 = self.c - apb1 * z0;
            let q1 = -apb1;
            let mut d0 = s.f;
            let mut d1 = s.df * h;
            let mut f = d0 + d1;
            let mut df = d1;
            let mut peak = d0.abs().max(d1.abs());
            let mut quiet = 0;
            let mut n = 0usize;
            loop {
                let nf = n as f64;
                let d2 = -((p1 * nf + q0) * (nf + 1.0) * d1 * h
                    + (-nf * (nf - 1.0) + q1 * nf - ab) * d0 * h * h)
                    / (p0 * (nf + 2.0) * (nf + 1.0));
                f += d2;
                df += (nf + 2.0) * d2;
                peak = peak.max(d2.abs());
                if d2.abs() <= 1e-18 * peak {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
                d0 = d1;
                d1 = d2;
                n += 1;
                if n > 400 {
                    return Err(Error::numeric(
                        "hyp2f1: Taylor continuation failed",
                        Some(f),
                    ));
                }
            }
            s.z = z0 + h;
            s.f = f;
            s.df = df / h;
            if !s.f.is_finite() {
                return Err(Error::numeric("hyp2f1: continuation overflow", None));
            }
        }
        Ok(())
    }

    /// Values at every `z` in `zs` (each `z ≤ 0`), sharing one continuation sweep.
    pub fn eval(&self, zs: &[f64], cfg: &SeriesConfig) -> Result<Vec<f64>> {
        let mut order: Vec<usize> = (0..zs.len()).collect();
        order.sort_by(|&i, &j| zs[j].total_cmp(&zs[i]));
        let mut out = vec![0.0; zs.len()];
        let mut state: Option<OdeState> = None;
        for i in order {
            let z = zs[i];
            if !(z <= 0.0) {
                return Err(Error::domain("hyp2f1: z must be <= 0"));
            }
            out[i] = if z == 0.0 {
                1.0
            } else if self.direct_ok(z) {
                self.real_series(self.p, self.c, z, cfg)?
            } else if self.transform_ok(z) {
                self.transform(z, cfg)?
            } else {
                let mut s = match state {
                    Some(s) => s,
                    None => self.start(z, cfg)?,
                };
                self.step_to(&mut s, z)?;
                state = Some(s);
                s.f
            };
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexVal {
        ComplexVal::new(re, im)
    }

    #[test]
    fn kummer_closed_forms() {
        let cfg = SeriesConfig::default();
        let v = hyp1f1(c(1.0, 0.0), c(2.0, 0.0), 1.0, &cfg).unwrap();
        assert!((v.re - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let a = c(0.3, -2.0);
        for z in [-7.0, 0.5, 40.0] {
            let v = hyp1f1(a, a, z, &cfg).unwrap();
            assert!((v - c(z.exp(), 0.0)).norm() < 1e-13 * z.exp());
        }
    }

    #[test]
    fn gauss_log_case() {
        let cfg = SeriesConfig::default();
        for z in [-0.3, -1.0, -4.0] {
            let v = hyp2f1(c(1.0, 0.0), c(1.0, 0.0), 2.0, z, &cfg).unwrap();
            let exact = -(1.0 - z).ln() / z;
            assert!((v.re - exact).abs() < 1e-13, "z={z}");
        }
    }

    #[test]
    fn generic_transform_matches_pfaff() {
        let cfg = SeriesConfig::default();
        let (a, b) = (c(0.4, 0.3), c(-0.7, 0.2));
        let t = inverse_transform(a, b, 1.3, -2.5, &cfg).unwrap();
        let w = -2.5 / -3.5;
        let f = pfq_series(&[a, c(1.3, 0.0) - b], &[c(1.3, 0.0)], w, &cfg, "t").unwrap();
        let p = f * (-a * 3.5f64.ln()).exp();
        assert!((t - p).norm() < 1e-11 * p.norm());
    }

    #[test]
    fn conjugate_methods_agree() {
        let cfg = SeriesConfig::default();
        for &q in &[2.0, 8.0, 25.0] {
            let h = ConjHyp2f1::new(-2.5, q, 3.0);
            let z = -30.0 * q;
            let s = h.start(-1e9, &cfg).unwrap();
            let mut st = s;
            h.step_to(&mut st, z).unwrap();
            let t = h.transform(z, &cfg).unwrap();
            assert!(
                (st.f - t).abs() < 1e-9 * t.abs().max(1e-3 * (z.abs()).powf(1.25)),
                "q={q} {} {}",
                st.f,
                t
            );
        }
    }
}
