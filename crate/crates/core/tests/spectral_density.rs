use fracpearson::spectral::{
    continuous_integrand, transition_density, InnerProductGrid, QuadConfig, SpectralTable, Support,
};
use fracpearson::DiffusionParams;

fn rg() -> DiffusionParams {
    DiffusionParams::rg(1.0, 5.0, 2.0).unwrap()
}

fn fs() -> DiffusionParams {
    DiffusionParams::fs(1.0, 10.0, 5.0).unwrap()
}

// outer x-quadrature over the bulk of the invariant law, split at the given points
fn x_grid(p: &DiffusionParams, breaks: &[f64]) -> InnerProductGrid {
    let s = Support::invariant(p).with_breaks(breaks);
    InnerProductGrid::log_panels(&s, 0.5, 16).unwrap()
}

#[test]
fn normalization_and_zero_mean_continuous_part() {
    let x0 = 1.0;
    for (name, p) in [("rg", rg()), ("fs", fs())] {
        let g = x_grid(&p, &[x0]);
        for alpha in [1.0, 0.7, 0.5] {
            let table =
                SpectralTable::build(&p, alpha, &g.nodes, &[x0], 0.5, &QuadConfig::default())
                    .unwrap();
            for t in [0.5, 1.0, 5.0] {
                let s = table.slice(t).unwrap();
                let (mut mass, mut cont) = (0.0, 0.0);
                for (i, w) in g.weights.iter().enumerate() {
                    let d = table.eval(i, 0, &s).unwrap();
                    assert!(d.quad_error >= 0.0);
                    assert!(d.value >= 0.0);
                    mass += w * d.value;
                    cont += w * d.continuous_part;
                }
                assert!(
                    (mass - 1.0).abs() < 1e-4,
                    "{name} alpha={alpha} t={t} mass={mass}"
                );
                assert!(cont.abs() < 1e-3, "{name} alpha={alpha} t={t} cont={cont}");
            }
        }
    }
}

#[test]
fn value_splits_into_parts() {
    let d = transition_density(&rg(), 0.7, 1.4, 1.0, 1.0, &QuadConfig::default()).unwrap();
    assert!((d.value - (d.discrete_part + d.continuous_part)).abs() < 1e-15);
    assert!(d.n_quad_nodes > 0);
}

#[test]
fn long_time_limit_is_invariant_density() {
    for (name, p) in [("rg", rg()), ("fs", fs())] {
        for x in [0.5, 1.0, 2.0] {
            let d = transition_density(&p, 1.0, x, 50.0, 1.0, &QuadConfig::default()).unwrap();
            let m = p.invariant_density(x).unwrap();
            assert!(
                (d.value - m).abs() < 1e-2 * m,
                "{name} x={x} p={} m={m}",
                d.value
            );
        }
    }
}

#[test]
fn fractional_long_time_gap_is_algebraic() {
    // with a time change the approach is only like t^{-α}: the relative gap
    // at t=50 is still several percent but shrinks by 2^{-α} per doubling
    let p = rg();
    let alpha = 0.7;
    let table =
        SpectralTable::build(&p, alpha, &[1.0], &[1.0], 50.0, &QuadConfig::default()).unwrap();
    let m = p.invariant_density(1.0).unwrap();
    let gap = |t: f64| (table.eval(0, 0, &table.slice(t).unwrap()).unwrap().value - m) / m;
    let (g50, g100, g1e4) = (gap(50.0), gap(100.0), gap(1e4));
    assert!(g50 > 1e-2, "{g50}");
    let ratio = g100 / g50;
    assert!((ratio - 0.5f64.powf(alpha)).abs() < 0.05, "{ratio}");
    assert!(g1e4.abs() < 1e-2, "{g1e4}");
}

#[test]
fn stationary_approach_rate() {
    let p = rg();
    let alpha = 0.7;
    let (x, x0) = (0.8, 1.5);
    let ts = [5.0, 10.0, 20.0, 40.0];
    let table =
        SpectralTable::build(&p, alpha, &[x], &[x0], ts[0], &QuadConfig::default()).unwrap();
    let m = p.invariant_density(x).unwrap();
    let gaps: Vec<f64> = ts
        .iter()
        .map(|&t| (table.eval(0, 0, &table.slice(t).unwrap()).unwrap().value - m).abs())
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
    let scaled: Vec<f64> = gaps
        .iter()
        .zip(ts)
        .map(|(g, t)| g * t.powf(alpha))
        .collect();
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 3.0, "{scaled:?}");
}

#[test]
fn chapman_kolmogorov_holds_only_without_time_change() {
    let (x, y, t, s) = (0.6, 0.5, 0.3, 0.3);
    let cfg = QuadConfig::default();
    let residual = |p: &DiffusionParams, alpha: f64| {
        let s_z = Support::new(p.quantile(1e-9), p.quantile_upper(1e-9))
            .unwrap()
            .with_breaks(&[x, y]);
        let g = InnerProductGrid::log_panels(&s_z, 0.5, 16).unwrap();
        let a = SpectralTable::build(p, alpha, &[x], &g.nodes, t, &cfg).unwrap();
        let b = SpectralTable::build(p, alpha, &g.nodes, &[y], s, &cfg).unwrap();
        let (sa, sb) = (a.slice(t).unwrap(), b.slice(s).unwrap());
        let mut lhs = 0.0;
        for (j, w) in g.weights.iter().enumerate() {
            lhs += w * a.eval(0, j, &sa).unwrap().value * b.eval(j, 0, &sb).unwrap().value;
        }
        let rhs = transition_density(p, alpha, x, t + s, y, &cfg)
            .unwrap()
            .value;
        (lhs - rhs).abs()
    };
    for p in [rg(), fs()] {
        let r1 = residual(&p, 1.0);
        assert!(r1 < 1e-3, "alpha=1 residual {r1}");
        let r06 = residual(&p, 0.6);
        assert!(
            r06 > 1e-2,
            "alpha=0.6 residual {r06} should exceed 10x the Markov tolerance"
        );
    }
}

#[test]
fn band_integrand_decay_and_symmetry() {
    for p in [rg(), fs()] {
        let lam0 = p.cutoff();
        for alpha in [1.0, 0.7] {
            // log-log slope of the envelope over [10Λ, 10³Λ], on the diagonal
            // at a point where the modes oscillate several times per window
            let t = 1.0;
            let xd = if p.kind == fracpearson::Kind::Rg {
                0.25
            } else {
                20.0
            };
            let env = |lo: f64, hi: f64| {
                (0..400)
                    .map(|i| lo * (hi / lo).powf(i as f64 / 399.0))
                    .map(|l| continuous_integrand(&p, alpha, xd, xd, t, l).unwrap().abs())
                    .fold(0.0, f64::max)
            };
            let e1 = env(10.0 * lam0, 30.0 * lam0);
            let e2 = env(300.0 * lam0, 1000.0 * lam0);
            let slope = (e2 / e1).ln() / (1000.0f64 / 30.0).ln();
            assert!(slope <= -1.4, "alpha={alpha} slope={slope}");
            for l in [1.5 * lam0, 7.0 * lam0, 40.0 * lam0] {
                let h1 = continuous_integrand(&p, alpha, 1.3, 0.9, t, l).unwrap();
                let h2 = continuous_integrand(&p, alpha, 0.9, 1.3, t, l).unwrap();
                assert!((h1 - h2).abs() <= 1e-12 * h1.abs().max(1e-300), "{h1} {h2}");
            }
        }
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let cfg = QuadConfig::default();
    assert!(transition_density(&rg(), 0.7, 1.0, 0.0, 1.0, &cfg).is_err());
    assert!(transition_density(&rg(), 0.7, -1.0, 1.0, 1.0, &cfg).is_err());
    assert!(transition_density(&rg(), 1.3, 1.0, 1.0, 1.0, &cfg).is_err());
    // below the evaluated range of the RG modes
    assert!(transition_density(&rg(), 1.0, 1.0, 1.0, 1e-3, &cfg).is_err());
    let bad = QuadConfig {
        abs_tol: 0.0,
        ..cfg
    };
    assert!(transition_density(&rg(), 1.0, 1.0, 1.0, 1.0, &bad).is_err());
}
