use serde::{Deserialize, Serialize};

use super::Path;
use crate::error::{Error, Result};

/// Fewest paths accepted by the empirical estimators.
pub const MIN_PATHS: usize = 100;

const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Count per bin divided by total paths and bin width.
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Fraction of paths outside `[edges[0], edges[last])`.
    pub outside: f64,
    pub n: usize,
}

impl Histogram {
    pub fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum::<f64>()
            + self.outside
    }

    /// `Σ |density_i − f̄_i| width_i`, with `f̄_i` the mean of `f` over bin `i`
    /// supplied by the caller.
    pub fn l1_distance(&self, bin_means: &[f64]) -> Result<f64> {
        if bin_means.len() != self.density.len() {
            return Err(Error::domain("bin_means length differs from the bin count"));
        }
        Ok(self
            .density
            .iter()
            .zip(bin_means)
            .zip(self.edges.windows(2))
            .map(|((d, f), e)| (d - f).abs() * (e[1] - e[0]))
            .sum())
    }
}

fn check_paths(paths: &[Path]) -> Result<()> {
    if paths.len() < MIN_PATHS {
        return Err(Error::domain(format!(
            "{} paths given, at least {MIN_PATHS} needed",
            paths.len()
        )));
    }
    Ok(())
}

fn column(paths: &[Path], t: f64) -> Result<Vec<f64>> {
    paths.iter().map(|p| p.at(t)).collect()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

/// Sample correlation `Corr(X_s, X_t)` across paths for each `t` in `ts`.
/// The standard error comes from batch means over 20 equal groups of paths.
pub fn empirical_acf(paths: &[Path], s: f64, ts: &[f64]) -> Result<Vec<Estimate>> {
    check_paths(paths)?;
    let xs = column(paths, s)?;
    let per = paths.len() / BATCHES;
    ts.iter()
        .map(|&t| {
            let xt = column(paths, t)?;
            let value = correlation(&xs, &xt);
            let batch: Vec<f64> = (0..BATCHES)
                .map(|b| correlation(&xs[b * per..(b + 1) * per], &xt[b * per..(b + 1) * per]))
                .collect();
            let mean = batch.iter().sum::<f64>() / BATCHES as f64;
            let var = batch.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
            if !value.is_finite() {
                return Err(Error::numeric(format!("degenerate sample at t={t}"), None));
            }
            Ok(Estimate {
                value,
                stderr: (var / BATCHES as f64).sqrt(),
            })
        })
        .collect()
}

/// Histogram of the path values at time `t`, normalized by the total number of paths.
pub fn empirical_density(paths: &[Path], t: f64, edges: &[f64]) -> Result<Histogram> {
    check_paths(paths)?;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "bin edges must be strictly increasing with at least two entries",
        ));
    }
    let nb = edges.len() - 1;
    let mut counts = vec![0usize; nb];
    let mut outside = 0usize;
    for v in column(paths, t)? {
        if v < edges[0] || v >= edges[nb] {
            outside += 1;
            continue;
        }
        let i = edges.partition_point(|&e| e <= v) - 1;
        counts[i] += 1;
    }
    let n = paths.len() as f64;
    let (density, stderr) = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| {
            let p = c as f64 / n;
            let w = e[1] - e[0];
            (p / w, (p * (1.0 - p) / n).sqrt() / w)
        })
        .unzip();
    Ok(Histogram {
        edges: edges.to_vec(),
        density,
        stderr,
        outside: outside as f64 / n,
        n: paths.len(),
    })
}
