//! Quadrature and summation helpers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut c = Compensated::new();
    for x in it {
        c.add(x);
    }
    c.value()
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_093_246,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Nodes and weights of the 21-point Kronrod rule on `[a, b]`, with the
/// embedded 10-point Gauss weights (zero on Kronrod-only nodes).
pub fn gk21_rule(a: f64, b: f64) -> [(f64, f64, f64); 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 21];
    out[0] = (c, WGK[10] * h, 0.0);
    for j in 0..10 {
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[1 + 2 * j] = (c - h * XGK[j], WGK[j] * h, wg);
        out[2 + 2 * j] = (c + h * XGK[j], WGK[j] * h, wg);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub n_eval: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOpts {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[10] * fc;
    let mut rg = 0.0;
    let mut fv = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = (f1, f2);
        rk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let asc = asc * h.abs();
    let value = rk * h;
    let mut err = ((rk - rg) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    (value, err)
}

struct Seg {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Seg {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Seg {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive Gauss-Kronrod integration over `[a, b]` split at `breaks`.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: AdaptiveOpts,
) -> QuadResult {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a.min(b) && x < a.max(b))
        .collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    if b < a {
        inner.reverse();
    }
    pts.extend(inner);
    pts.push(b);

    let mut heap = BinaryHeap::new();
    let mut n_eval = 0;
    for w in pts.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = gk21(&mut f, w[0], w[1]);
        n_eval += 21;
        heap.push(Seg {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    loop {
        let total = compensated_sum(heap.iter().map(|s| s.value));
        let err: f64 = heap.iter().map(|s| s.err).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol || heap.is_empty() {
            return QuadResult {
                value: total,
                abs_err: err,
                n_eval,
                converged: true,
            };
        }
        if heap.len() >= opts.max_intervals {
            return QuadResult {
                value: total,
                abs_err: err,
                n_eval,
                converged: false,
            };
        }
        let s = heap.pop().expect("nonempty");
        let m = 0.5 * (s.a + s.b);
        if m == s.a || m == s.b {
            heap.push(s);
            let total = compensated_sum(heap.iter().map(|s| s.value));
            return QuadResult {
                value: total,
                abs_err: err,
                n_eval,
                converged: false,
            };
        }
        let (v1, e1) = gk21(&mut f, s.a, m);
        let (v2, e2) = gk21(&mut f, m, s.b);
        n_eval += 42;
        heap.push(Seg {
            a: s.a,
            b: m,
            value: v1,
            err: e1,
        });
        heap.push(Seg {
            a: m,
            b: s.b,
            value: v2,
            err: e2,
        });
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOpts) -> QuadResult {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Integral over `[a, ∞)` through the map `x = a + s/(1 - s)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    breaks: &[f64],
    opts: AdaptiveOpts,
) -> QuadResult {
    let sb: Vec<f64> = breaks
        .iter()
        .filter(|&&x| x > a)
        .map(|&x| (x - a) / (1.0 + x - a))
        .collect();
    integrate_with_breaks(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - s;
            let x = a + s / d;
            let v = f(x) / (d * d);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        &sb,
        opts,
    )
}

/// Integral over `[lo, hi] ⊂ (0, ∞)` in the variable `u = ln x`, suited to power-law tails.
pub fn integrate_log<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: AdaptiveOpts,
) -> QuadResult {
    let ub: Vec<f64> = breaks
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x.ln())
        .collect();
    integrate_with_breaks(
        |u| {
            let x = u.exp();
            x * f(x)
        },
        lo.ln(),
        hi.ln(),
        &ub,
        opts,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_polynomials() {
        for deg in 0..=31 {
            let r: f64 = gk21_rule(0.0, 1.0)
                .iter()
                .map(|&(x, w, _)| w * x.powi(deg))
                .sum();
            assert!((r - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}");
        }
        for deg in 0..=19 {
            let r: f64 = gk21_rule(0.0, 1.0)
                .iter()
                .map(|&(x, _, w)| w * x.powi(deg))
                .sum();
            assert!(
                (r - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14,
                "gauss deg {deg}"
            );
        }
    }

    #[test]
    fn legendre_matches_polynomials() {
        let (x, w) = gauss_legendre(64);
        for deg in [0, 10, 127] {
            let r: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((r - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, AdaptiveOpts::default());
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
        let r = integrate_to_inf(|x| 1.0 / (1.0 + x * x), 0.0, &[], AdaptiveOpts::default());
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn compensated_recovers_small_terms() {
        let v = compensated_sum([1e16, 1.0, -1e16, 1.0]);
        assert_eq!(v, 2.0);
    }
}
