use fracpearson::analysis::{acf_asymptote, acf_fractional, fit_slope, stationary_gaps, AcfQuery};
use fracpearson::simulate::{empirical_acf, fractional_paths, SimConfig, Start};
use fracpearson::spectral::QuadConfig;
use fracpearson::DiffusionParams;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn acf(theta: f64, alpha: f64, s: f64, t: f64) -> f64 {
    acf_fractional(&AcfQuery::new(theta, alpha, s, t).unwrap()).unwrap()
}

#[test]
fn zero_lag_is_one() {
    for alpha in [0.3, 0.6, 0.9, 1.0] {
        for (theta, s) in [(1.0, 1.0), (0.5, 3.0), (2.0, 0.2)] {
            let v = acf(theta, alpha, s, s);
            assert!(
                (v - 1.0).abs() < 1e-8,
                "alpha={alpha} theta={theta} s={s} acf={v}"
            );
        }
    }
}

#[test]
fn markov_case_is_exponential() {
    for theta in [0.3, 1.0, 2.5] {
        for (s, t) in [(1.0, 3.0), (0.5, 0.7), (2.0, 10.0)] {
            let v = acf(theta, 1.0, s, t);
            let e = (-theta * (t - s)).exp();
            assert!((v - e).abs() < 1e-8, "theta={theta} s={s} t={t} {v} {e}");
        }
    }
}

#[test]
fn power_law_asymptote() {
    let (theta, alpha, s) = (1.0, 0.6, 1.0);
    let lead = |t: f64| acf(theta, alpha, s, t) * t.powf(alpha) * gamma(1.0 - alpha);
    let target = 1.0 / theta + s.powf(alpha) / gamma(1.0 + alpha);
    let rel = (lead(1e3) / target - 1.0).abs();
    assert!(rel < 5e-2, "rel={rel}");
    let ratios: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t| {
            (acf(theta, alpha, s, t) / acf_asymptote(theta, alpha, s, t).unwrap() - 1.0).abs()
        })
        .collect();
    assert!(ratios[1] < ratios[0] && ratios[2] < ratios[1], "{ratios:?}");
}

#[test]
fn asymptote_limits() {
    assert_eq!(acf_asymptote(1.0, 1.0, 1.0, 5.0).unwrap(), 0.0);
    let a = acf_asymptote(1.0, 0.7, 1.0, 50.0).unwrap();
    let b = acf_asymptote(1.0, 0.7, 2.0, 50.0).unwrap();
    assert!(b > a);
    assert!(acf_asymptote(1.0, 0.7, 2.0, 2.0).is_err());
}

#[test]
fn invalid_queries_are_rejected() {
    assert!(AcfQuery::new(1.0, 0.7, 2.0, 1.0).is_err());
    assert!(AcfQuery::new(0.0, 0.7, 1.0, 2.0).is_err());
    assert!(AcfQuery::new(1.0, 1.2, 1.0, 2.0).is_err());
    // RG needs beta > 2 and FS beta > 4 for a finite variance
    let heavy = DiffusionParams::rg(1.0, 1.8, 1.0).unwrap();
    assert!(AcfQuery::for_diffusion(&heavy, 0.7, 1.0, 2.0).is_err());
    let heavy = DiffusionParams::fs(1.0, 3.5, 5.0).unwrap();
    assert!(AcfQuery::for_diffusion(&heavy, 0.7, 1.0, 2.0).is_err());
    let ok = DiffusionParams::fs(2.0, 10.0, 5.0).unwrap();
    assert_eq!(
        AcfQuery::for_diffusion(&ok, 0.7, 1.0, 2.0).unwrap().theta,
        2.0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]
    #[test]
    fn acf_is_a_correlation(theta in 0.1f64..5.0, alpha in 0.05f64..1.0, s in 0.01f64..10.0, ratio in 1.0f64..100.0) {
        let v = acf(theta, alpha, s, s * ratio);
        prop_assert!(v > 0.0 && v <= 1.0, "{}", v);
    }

    #[test]
    fn acf_decreases_in_t(theta in 0.1f64..5.0, alpha in 0.1f64..1.0, s in 0.1f64..5.0) {
        let vals: Vec<f64> = (0..8).map(|k| acf(theta, alpha, s, s * 1.8f64.powi(k))).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", vals);
        }
    }
}

#[test]
fn monte_carlo_acf_matches_formula() {
    let p = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let (alpha, s) = (0.7, 1.0);
    let ts = [2.0, 4.0, 8.0];
    let cfg = SimConfig {
        dt: 1e-2,
        n_paths: 100_000,
        ..SimConfig::default()
    };
    let grid = [0.0, s, 2.0, 4.0, 8.0];
    let paths = fractional_paths(&p, alpha, &grid, Start::Stationary, &cfg, 21).unwrap();
    let mc = empirical_acf(&paths, s, &ts).unwrap();
    for (t, e) in ts.iter().zip(&mc) {
        let exact = acf_fractional(&AcfQuery::for_diffusion(&p, alpha, s, *t).unwrap()).unwrap();
        assert!(
            (e.value - exact).abs() < 3.0 * e.stderr,
            "t={t} mc={e:?} formula={exact}"
        );
    }
}

#[test]
fn stationary_gap_shrinks() {
    let p = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let g = stationary_gaps(&p, 0.7, 1.0, 2.0, &[5.0, 40.0], &QuadConfig::default()).unwrap();
    assert!(g[1] < g[0], "{g:?}");
}

#[test]
fn markov_gap_decays_with_the_spectral_gap() {
    let p = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let lam1 = p.spectrum().eigenvalues[1];
    let ts: Vec<f64> = (0..7).map(|i| 6.0 + i as f64).collect();
    let g = stationary_gaps(&p, 1.0, 1.0, 2.0, &ts, &QuadConfig::default()).unwrap();
    let slope = fit_slope(&ts, &g.iter().map(|v| v.ln()).collect::<Vec<_>>()).unwrap();
    assert!(
        (slope + lam1).abs() < 0.1 * lam1,
        "slope={slope} lambda1={lam1}"
    );
}

#[test]
fn fractional_gap_decays_like_a_power() {
    let p = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let alpha = 0.7;
    let ts: Vec<f64> = (0..=8).map(|i| 10f64.powf(1.0 + i as f64 / 8.0)).collect();
    let g = stationary_gaps(&p, alpha, 1.0, 2.0, &ts, &QuadConfig::default()).unwrap();
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = g.iter().map(|v| v.ln()).collect();
    let slope = fit_slope(&lx, &ly).unwrap();
    assert!((slope + alpha).abs() < 0.15, "slope={slope}");
}
