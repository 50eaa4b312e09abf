use fracpearson::spectral::{
    backward_solution, backward_solution_on, backward_solutions, caputo_residual,
    fokker_planck_solution, InnerProductGrid, QuadConfig, SpectralTable, Support, TimeWeight,
};
use fracpearson::DiffusionParams;

fn rg() -> DiffusionParams {
    DiffusionParams::rg(1.0, 5.0, 2.0).unwrap()
}

fn fs() -> DiffusionParams {
    DiffusionParams::fs(1.0, 10.0, 5.0).unwrap()
}

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

// C^∞ bump on [c - r, c + r]
fn bump(c: f64, r: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let u = (x - c) / r;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    }
}

// bump on [1, 3] normalized to a probability density
fn bump_density() -> (impl Fn(f64) -> f64, Support) {
    let b = bump(2.0, 1.0);
    let s = Support::new(1.0, 3.0).unwrap();
    let g = InnerProductGrid::log_panels(&s, 0.05, 16).unwrap();
    let z: f64 = g.nodes.iter().zip(&g.weights).map(|(&x, w)| w * b(x)).sum();
    (move |x: f64| b(x) / z, s)
}

#[test]
fn constant_function_is_preserved() {
    let one = |_: f64| 1.0;
    for p in [rg(), fs()] {
        for alpha in [1.0, 0.7] {
            let q = backward_solutions(
                &p,
                alpha,
                &one,
                &Support::invariant(&p),
                &[0.5, 1.0],
                &[0.7, 1.6],
                &cfg(),
            )
            .unwrap();
            for v in q.iter().flatten() {
                assert!((v - 1.0).abs() < 1e-4, "alpha={alpha} q={q:?}");
            }
        }
    }
    let q = backward_solution(&rg(), 0.7, &one, 1.0, 1.2, &cfg()).unwrap();
    assert!((q - 1.0).abs() < 1e-4, "{q}");
}

#[test]
fn first_eigenpolynomial_is_a_single_mode() {
    let (ts, ys) = ([0.5, 2.0], [0.6, 1.4]);
    for p in [rg(), fs()] {
        let p1 = p.poly_basis(1).unwrap();
        let lam1 = p.spectrum().eigenvalues[1];
        let g = move |x: f64| p1.eval(x);
        for alpha in [1.0, 0.7] {
            let q = backward_solutions(&p, alpha, &g, &Support::invariant(&p), &ts, &ys, &cfg())
                .unwrap();
            for (row, t) in q.iter().zip(ts) {
                for (v, y) in row.iter().zip(ys) {
                    let exact = TimeWeight::new(alpha).unwrap().eval(lam1, t).unwrap() * g(y);
                    assert!(
                        (v - exact).abs() < 1e-5,
                        "alpha={alpha} t={t} y={y} q={v} exact={exact}"
                    );
                }
            }
        }
    }
}

#[test]
fn backward_solution_starts_from_the_data() {
    let b = bump(2.0, 1.0);
    let s = Support::new(1.0, 3.0).unwrap();
    let cfg = QuadConfig {
        abs_tol: 1e-6,
        max_refinements: 12,
        ..QuadConfig::default()
    };
    for y in [1.8, 2.0, 2.3] {
        let q = backward_solution_on(&rg(), 1.0, &b, &s, 1e-3, y, &cfg).unwrap();
        assert!((q - b(y)).abs() < 1e-2 * b(y), "y={y} q={q} g={}", b(y));
    }
}

#[test]
fn invariant_initial_density_is_stationary() {
    for p in [rg(), fs()] {
        let m = |x: f64| p.invariant_density(x).unwrap();
        for (alpha, x) in [(1.0, 0.9), (0.7, 1.7)] {
            let q = fokker_planck_solution(
                &p,
                alpha,
                &m,
                &Support::invariant(&p),
                x,
                1.0,
                &QuadConfig::default(),
            )
            .unwrap();
            assert!(
                (q - m(x)).abs() < 1e-4,
                "alpha={alpha} x={x} q={q} m={}",
                m(x)
            );
        }
    }
}

#[test]
fn fokker_planck_mass_is_conserved() {
    let p = rg();
    let (f, sf) = bump_density();
    let yg = InnerProductGrid::log_panels(&sf, 0.1, 16).unwrap();
    let xg =
        InnerProductGrid::log_panels(&Support::invariant(&p).with_breaks(&[1.0, 3.0]), 0.25, 16)
            .unwrap();
    let wy: Vec<f64> = yg
        .nodes
        .iter()
        .zip(&yg.weights)
        .map(|(&y, w)| w * f(y))
        .collect();
    for alpha in [1.0, 0.7] {
        let table = SpectralTable::build_weighted(
            &p,
            alpha,
            &xg.nodes,
            &yg.nodes,
            &xg.weights,
            &wy,
            1.0,
            &QuadConfig::default(),
        )
        .unwrap();
        let mass = table
            .contract(&xg.weights, &wy, &table.slice(1.0).unwrap())
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-3, "alpha={alpha} mass={mass}");
    }
}

#[test]
fn fokker_planck_starts_from_the_data() {
    let p = rg();
    let t = 1e-3;
    let (f, sf) = bump_density();
    let yg = InnerProductGrid::log_panels(&sf.clone().with_breaks(&[2.0]), 0.04, 16).unwrap();
    let xg = InnerProductGrid::log_panels(
        &Support::new(0.8, 3.6).unwrap().with_breaks(&[1.0, 3.0]),
        0.04,
        16,
    )
    .unwrap();
    let wy: Vec<f64> = yg
        .nodes
        .iter()
        .zip(&yg.weights)
        .map(|(&y, w)| w * f(y))
        .collect();
    let cfg = QuadConfig {
        abs_tol: 1e-6,
        max_refinements: 12,
        ..QuadConfig::default()
    };
    let table = SpectralTable::build(&p, 1.0, &xg.nodes, &yg.nodes, t, &cfg).unwrap();
    let s = table.slice(t).unwrap();
    let mut l1 = 0.0;
    let mut onehot = vec![0.0; xg.nodes.len()];
    for i in 0..xg.nodes.len() {
        onehot[i] = 1.0;
        let q = table.contract(&onehot, &wy, &s).unwrap().value;
        onehot[i] = 0.0;
        l1 += xg.weights[i] * (q - f(xg.nodes[i])).abs();
    }
    assert!(l1 < 0.05, "L1 = {l1}");
}

fn caputo_grids(n: usize) -> (Vec<f64>, Vec<f64>) {
    let dt = 1.0 / n as f64;
    let ts = (0..n).map(|i| (n + i) as f64 * dt).collect();
    let ys = (0..n).map(|i| 1.5 + i as f64 / (n - 1) as f64).collect();
    (ts, ys)
}

#[test]
fn backward_equation_residual() {
    let cfg = QuadConfig {
        max_refinements: 12,
        ..QuadConfig::default()
    };
    let (ts, ys) = caputo_grids(100);
    let r1 = caputo_residual(&rg(), 1.0, 1.0, &ts, &ys, &cfg).unwrap();
    assert!(r1.residual < 5e-3 && !r1.inconclusive, "{r1:?}");
    let r07 = caputo_residual(&rg(), 0.7, 1.0, &ts, &ys, &cfg).unwrap();
    assert!(r07.residual < 2e-2 && !r07.inconclusive, "{r07:?}");
    let (ts2, ys2) = caputo_grids(200);
    let fine = caputo_residual(&rg(), 0.7, 1.0, &ts2, &ys2, &cfg).unwrap();
    assert!(
        r07.residual / fine.residual >= 2.0,
        "{} -> {}",
        r07.residual,
        fine.residual
    );
}

#[test]
fn caputo_grid_validation() {
    let cfg = QuadConfig::default();
    let (ts, ys) = caputo_grids(10);
    // x inside the y range
    assert!(caputo_residual(&rg(), 0.7, 2.0, &ts, &ys, &cfg).is_err());
    // t₀ not on the step lattice
    let shifted: Vec<f64> = ts.iter().map(|t| t + 0.03).collect();
    assert!(caputo_residual(&rg(), 0.7, 1.0, &shifted, &ys, &cfg).is_err());
    let mut uneven = ys.clone();
    uneven[3] += 1e-3;
    assert!(caputo_residual(&rg(), 0.7, 1.0, &ts, &uneven, &cfg).is_err());
}
