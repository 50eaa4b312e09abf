use fracpearson::quad::{integrate_log, AdaptiveOpts};
use fracpearson::{DiffusionParams, Kind};
use proptest::prelude::*;

fn opts() -> AdaptiveOpts {
    AdaptiveOpts {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

fn integral<F: Fn(f64) -> f64>(f: F, p: &DiffusionParams) -> f64 {
    let m = p.mean();
    let r = integrate_log(
        f,
        1e-6 * m,
        1e24 * m,
        &[0.1 * m, m, 10.0 * m, 1e3 * m],
        opts(),
    );
    assert!(r.converged, "quadrature did not converge: {r:?}");
    r.value
}

#[test]
fn invariant_densities_normalized_with_known_means() {
    let rg = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let n = integral(|x| rg.invariant_density(x).unwrap_or(0.0), &rg);
    assert!((n - 1.0).abs() < 1e-8);
    let rg = DiffusionParams::rg(1.0, 3.0, 2.0).unwrap();
    let m = integral(|x| x * rg.invariant_density(x).unwrap_or(0.0), &rg);
    assert!((m - 1.0).abs() < 1e-8);
    let fs = DiffusionParams::fs(1.0, 6.0, 3.0).unwrap();
    let n = integral(|x| fs.invariant_density(x).unwrap_or(0.0), &fs);
    let m = integral(|x| x * fs.invariant_density(x).unwrap_or(0.0), &fs);
    assert!((n - 1.0).abs() < 1e-8 && (m - 1.5).abs() < 1e-8, "{n} {m}");
}

#[test]
fn coefficient_examples() {
    let rg = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    assert!((rg.diffusion_sq(1.0).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(rg.drift(rg.mean()).unwrap(), 0.0);
    let fs = DiffusionParams::fs(1.0, 6.0, 3.0).unwrap();
    assert!((fs.diffusion_sq(1.0).unwrap() - 3.0).abs() < 1e-15);
    assert!(
        rg.drift(0.0).is_err()
            && rg.diffusion_sq(-1.0).is_err()
            && rg.invariant_density(0.0).is_err()
    );
}

#[test]
fn generator_examples() {
    let rg = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    assert_eq!(rg.generator_apply_fd(|_| 3.0, 1.2, 1e-3).unwrap(), 0.0);
    let g = rg.generator_apply_fd(|x| x, 1.2, 1e-3).unwrap();
    assert!((g - rg.drift(1.2).unwrap()).abs() < 1e-10);
    assert!(rg.generator_apply_fd(|x| x, 0.1, 0.06).is_err());
}

#[test]
fn spectrum_examples() {
    let s = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap().spectrum();
    assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.5]);
    assert!((s.cutoff - 1.5625).abs() < 1e-15);
    let s = DiffusionParams::fs(1.0, 6.0, 3.0).unwrap().spectrum();
    assert_eq!(s.eigenvalues, vec![0.0, 1.0]);
    assert!((s.cutoff - 1.125).abs() < 1e-15);
}

fn check_eigensystem(p: &DiffusionParams) {
    let sp = p.spectrum();
    let basis: Vec<_> = (0..=sp.n_max).map(|n| p.poly_basis(n).unwrap()).collect();
    assert_eq!(basis[0].coeffs.len(), 1);
    assert!((basis[0].coeffs[0] - 1.0).abs() < 1e-14);
    for (n, pn) in basis.iter().enumerate() {
        assert!(pn.coeffs.last().unwrap().abs() > 0.0 && pn.degree == n);
        for (m, pm) in basis.iter().enumerate() {
            let v = integral(
                |x| pn.eval(x) * pm.eval(x) * p.invariant_density(x).unwrap_or(0.0),
                p,
            );
            let want = if n == m { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-8, "{:?} n={n} m={m} {v}", p.kind);
        }
        let lam = sp.eigenvalues[n];
        for i in 1..40 {
            let y = 0.1 * i as f64;
            let g = p.generator_apply_fd(|x| pn.eval(x), y, 1e-4 * y).unwrap();
            let r = (g + lam * pn.eval(y)).abs();
            assert!(
                r < 1e-6 * (1.0 + (lam * pn.eval(y)).abs()),
                "{:?} n={n} y={y} residual {r}",
                p.kind
            );
        }
    }
    assert!(p.poly_basis(sp.n_max + 1).is_err());
}

#[test]
fn orthonormal_eigenpolynomials() {
    check_eigensystem(&DiffusionParams::rg(1.0, 9.0, 3.0).unwrap());
    check_eigensystem(&DiffusionParams::fs(1.0, 10.0, 6.0).unwrap());
    check_eigensystem(&DiffusionParams::rg(0.7, 6.0, 1.0).unwrap());
    check_eigensystem(&DiffusionParams::fs(2.0, 17.0, 5.0).unwrap());
}

#[test]
fn fs_spectral_exclusion() {
    assert!(DiffusionParams::fs(1.0, 10.0, 6.0)
        .unwrap()
        .validate_spectral()
        .is_err());
    assert!(DiffusionParams::fs(1.0, 10.0, 2.0)
        .unwrap()
        .validate_spectral()
        .is_err());
    assert!(DiffusionParams::fs(1.0, 10.0, 5.0)
        .unwrap()
        .validate_spectral()
        .is_ok());
    assert!(DiffusionParams::fs(1.0, 2.0, 5.0).is_err());
    assert!(DiffusionParams::rg(1.0, 1.0, 5.0).is_err());
}

proptest! {
    #[test]
    fn pearson_equation(kind in prop::bool::ANY, beta in 4.5f64..20.0, gamma in 2.2f64..9.0, x in 0.05f64..20.0) {
        let p = DiffusionParams::new(if kind { Kind::Rg } else { Kind::Fs }, 1.3, beta, gamma).unwrap();
        let h = 1e-5 * x;
        let dlog = (p.ln_invariant_density(x + h).unwrap() - p.ln_invariant_density(x - h).unwrap()) / (2.0 * h);
        let s2 = |y: f64| p.diffusion_sq(y).unwrap();
        let ds2 = (s2(x + h) - s2(x - h)) / (2.0 * h);
        let want = (2.0 * p.drift(x).unwrap() - ds2) / s2(x);
        prop_assert!((dlog - want).abs() < 1e-6 * (1.0 + want.abs()));
    }

    #[test]
    fn retained_eigenvalues_below_cutoff(kind in prop::bool::ANY, beta in 2.5f64..40.0, theta in 0.1f64..5.0) {
        let p = DiffusionParams::new(if kind { Kind::Rg } else { Kind::Fs }, theta, beta, 3.0).unwrap();
        let s = p.spectrum();
        prop_assert_eq!(s.eigenvalues[0], 0.0);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.eigenvalues.iter().all(|&l| l < s.cutoff));
    }
}
