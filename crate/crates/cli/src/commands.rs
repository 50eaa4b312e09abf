use std::path::{Path, PathBuf};

use fracpearson::analysis::{acf_asymptote, acf_fractional, AcfQuery};
use fracpearson::simulate::{
    empirical_acf, fractional_paths, write_binary, write_csv, BinaryDump, PathKind, SimConfig,
    Start,
};
use fracpearson::specialfn::mittag_leffler;
use fracpearson::spectral::{backward_solutions, QuadConfig, SpectralTable, Support, RG_Z_MAX};
use fracpearson::validation::{self, Mode};
use fracpearson::{DiffusionParams, Kind};
use serde_json::{Map, Value};

use crate::config::{load_config, Resolver};
use crate::error::{CliError, ErrorKind, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION};
use crate::output::{emit, num, Cell, Table};
use crate::{Cli, Command, Model};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

struct Outcome {
    table: Table,
    extra: Map<String, Value>,
    seed: Option<u64>,
    code: i32,
    /// Reported on stderr after the table is written.
    warning: Option<CliError>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Self {
            table,
            extra: Map::new(),
            seed: None,
            code: EXIT_OK,
            warning: None,
        }
    }
}

pub fn run(cli: Cli) -> Result<i32, CliError> {
    let mut r = Resolver::new(load_config(cli.config.as_deref())?);
    let format = match r.get("format", cli.format, "csv".to_string())?.as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => {
            return Err(CliError::config(format!(
                "unknown format {other:?} (csv or json)"
            )))
        }
    };
    let output = r
        .opt::<String>("output", cli.output.map(|p| p.display().to_string()))?
        .map(PathBuf::from);
    let name = command_name(&cli.command);
    let out = match cli.command {
        Command::Density {
            model,
            t,
            x0,
            x_min,
            x_max,
            n_x,
            abs_tol,
        } => density(&mut r, model, t, x0, x_min, x_max, n_x, abs_tol)?,
        Command::Paths {
            model,
            seed,
            n_paths,
            dt,
            t_end,
            n_t,
            x0,
            csv_dir,
            binary,
        } => paths(
            &mut r, model, seed, n_paths, dt, t_end, n_t, x0, csv_dir, binary,
        )?,
        Command::Acf {
            model,
            s,
            t_list,
            t_max,
            n_t,
            mc_paths,
            dt,
            seed,
        } => acf(&mut r, model, s, t_list, t_max, n_t, mc_paths, dt, seed)?,
        Command::Cauchy {
            model,
            function,
            t,
            y_min,
            y_max,
            n_y,
            center,
            radius,
            degree,
            abs_tol,
        } => cauchy(
            &mut r, model, function, t, y_min, y_max, n_y, center, radius, degree, abs_tol,
        )?,
        Command::Ml {
            alpha,
            x_min,
            x_max,
            n_x,
        } => ml(&mut r, alpha, x_min, x_max, n_x)?,
        Command::Validate { quick, seed } => validate(&mut r, quick, seed)?,
    };
    let unused = r.unused();
    if !unused.is_empty() {
        return Err(CliError::config(format!(
            "config keys not used by `{name}`: {}",
            unused.join(", ")
        )));
    }
    let text = match format {
        Format::Csv => out.table.to_csv(),
        Format::Json => {
            let mut meta = Map::new();
            meta.insert("command".into(), Value::from(name));
            meta.insert("version".into(), Value::from(fracpearson::VERSION));
            meta.insert("cli_version".into(), Value::from(env!("CARGO_PKG_VERSION")));
            meta.insert(
                "seed".into(),
                out.seed.map(Value::from).unwrap_or(Value::Null),
            );
            meta.insert("config".into(), Value::Object(r.resolved.clone()));
            for (k, v) in &out.extra {
                meta.insert(k.clone(), v.clone());
            }
            out.table.to_json(&meta)
        }
    };
    emit(&text, output.as_deref())
        .map_err(|e| CliError::io(format!("cannot write output: {e}")))?;
    if let Some(w) = &out.warning {
        let mut s = String::new();
        crate::output::write_json(&w.to_json(), &mut s);
        eprintln!("{s}");
    }
    Ok(out.code)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Density { .. } => "density",
        Command::Paths { .. } => "paths",
        Command::Acf { .. } => "acf",
        Command::Cauchy { .. } => "cauchy",
        Command::Ml { .. } => "ml",
        Command::Validate { .. } => "validate",
    }
}

fn model(
    r: &mut Resolver,
    m: Model,
    alpha_default: f64,
) -> Result<(DiffusionParams, f64), CliError> {
    let kind: Kind = r
        .get("kind", m.kind, "rg".to_string())?
        .parse()
        .map_err(|e: fracpearson::Error| CliError::config(e.to_string()))?;
    let (b, g) = match kind {
        Kind::Rg => (5.0, 2.0),
        Kind::Fs => (10.0, 5.0),
    };
    let theta = r.get("theta", m.theta, 1.0)?;
    let beta = r.get("beta", m.beta, b)?;
    let gamma = r.get("gamma", m.gamma, g)?;
    let alpha = r.get("alpha", m.alpha, alpha_default)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CliError::config(format!("alpha={alpha} must lie in (0,1]")));
    }
    Ok((DiffusionParams::new(kind, theta, beta, gamma)?, alpha))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn check_range(what: &str, lo: f64, hi: f64, n: usize) -> Result<(), CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(CliError::config(format!(
            "{what} grid needs min < max and at least 2 points"
        )));
    }
    Ok(())
}

fn lower_limit(p: &DiffusionParams) -> f64 {
    match p.kind {
        Kind::Rg => p.gamma / RG_Z_MAX,
        Kind::Fs => 0.0,
    }
}

fn quad_config(r: &mut Resolver, abs_tol: Option<f64>) -> Result<QuadConfig, CliError> {
    let cfg = QuadConfig {
        abs_tol: r.get("abs-tol", abs_tol, QuadConfig::default().abs_tol)?,
        ..QuadConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn density(
    r: &mut Resolver,
    m: Model,
    t: Option<f64>,
    x0: Option<f64>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    n_x: Option<usize>,
    abs_tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let (p, alpha) = model(r, m, 1.0)?;
    let t = r.get("t", t, 1.0)?;
    let x0 = r.get("x0", x0, 1.0)?;
    let lo = r.get("x-min", x_min, p.quantile(1e-6).max(lower_limit(&p)))?;
    let hi = r.get("x-max", x_max, p.quantile_upper(1e-5))?;
    let n = r.get("n-x", n_x, 200)?;
    let cfg = quad_config(r, abs_tol)?;
    check_range("x", lo, hi, n)?;
    if lo <= 0.0 {
        return Err(CliError::config("x-min must be > 0"));
    }
    let xs = linspace(lo, hi, n);
    let table = SpectralTable::build(&p, alpha, &xs, &[x0], t, &cfg)?;
    let slice = table.slice(t)?;
    let mut out = Table::new(&[
        "x",
        "density",
        "discrete",
        "continuous",
        "quad_error",
        "flag",
    ]);
    let mut flagged = 0usize;
    let mut first_err = None;
    let mut vals = Vec::with_capacity(n);
    for (i, &x) in xs.iter().enumerate() {
        match table.eval(i, 0, &slice) {
            Ok(d) => {
                vals.push(d.value);
                out.push(vec![
                    x.into(),
                    d.value.into(),
                    d.discrete_part.into(),
                    d.continuous_part.into(),
                    d.quad_error.into(),
                    0i64.into(),
                ]);
            }
            Err(e) => {
                flagged += 1;
                let best = e.best_estimate().unwrap_or(f64::NAN);
                first_err.get_or_insert(e);
                vals.push(best);
                out.push(vec![
                    x.into(),
                    best.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    1i64.into(),
                ]);
            }
        }
    }
    let mass: f64 = xs
        .windows(2)
        .zip(vals.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum();
    let mut o = Outcome::ok(out);
    o.extra.insert("mass_trapezoid".into(), num(mass));
    o.extra
        .insert("flagged_rows".into(), Value::from(flagged as u64));
    o.extra.insert("partial".into(), Value::from(flagged > 0));
    if let Some(e) = first_err {
        o.code = EXIT_NUMERIC;
        let mut w = CliError::from(e);
        w.kind = ErrorKind::Numeric;
        w.message = format!("{flagged} rows flagged: {}", w.message);
        o.warning = Some(w);
    }
    Ok(o)
}

fn require_seed(r: &mut Resolver, seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    r.opt("seed", seed)?.ok_or_else(|| {
        CliError::config(format!("{what} needs --seed (or seed in the config file)"))
    })
}

#[allow(clippy::too_many_arguments)]
fn paths(
    r: &mut Resolver,
    m: Model,
    seed: Option<u64>,
    n_paths: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
    n_t: Option<usize>,
    x0: Option<String>,
    csv_dir: Option<PathBuf>,
    binary: Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let (p, alpha) = model(r, m, 1.0)?;
    let seed = require_seed(r, seed, "paths")?;
    let n_paths = r.get("n-paths", n_paths, 1000)?;
    let dt = r.get("dt", dt, 1e-3)?;
    let t_end = r.get("t-end", t_end, 1.0)?;
    let n_t = r.get("n-t", n_t, 100)?;
    let start = match r.get("x0", x0, "stationary".to_string())?.as_str() {
        "stationary" => Start::Stationary,
        s => Start::Fixed(
            s.parse::<f64>()
                .map_err(|e| CliError::config(format!("x0 {s:?}: {e}")))?,
        ),
    };
    let csv_dir = r.opt::<String>("csv-dir", csv_dir.map(|p| p.display().to_string()))?;
    let binary = r.opt::<String>("binary", binary.map(|p| p.display().to_string()))?;
    if !(t_end > 0.0) || n_t == 0 {
        return Err(CliError::config("paths needs t-end > 0 and n-t >= 1"));
    }
    let grid: Vec<f64> = (0..=n_t).map(|i| t_end * i as f64 / n_t as f64).collect();
    let cfg = SimConfig {
        dt,
        n_paths,
        ..SimConfig::default()
    };
    let paths = fractional_paths(&p, alpha, &grid, start, &cfg, seed)?;
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(&dir)?;
        for (i, path) in paths.iter().enumerate() {
            let f = std::fs::File::create(Path::new(&dir).join(format!("path_{i:06}.csv")))?;
            write_csv(path, std::io::BufWriter::new(f))?;
        }
    }
    if let Some(file) = binary {
        let dump = BinaryDump {
            seed,
            kind: if alpha == 1.0 {
                PathKind::Diffusion
            } else {
                PathKind::Fractional
            },
            dt,
            alpha,
            params: [p.theta, p.beta, p.gamma],
            times: grid.clone(),
            values: paths.iter().map(|q| q.values.clone()).collect(),
        };
        write_binary(&dump, std::io::BufWriter::new(std::fs::File::create(file)?))?;
    }
    let mut out = Table::new(&["t", "mean", "stderr", "min", "max"]);
    for (k, &t) in grid.iter().enumerate() {
        let v: Vec<f64> = paths.iter().map(|q| q.values[k]).collect();
        let nf = v.len() as f64;
        let mean = v.iter().sum::<f64>() / nf;
        let se = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt()
        } else {
            f64::NAN
        };
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(vec![t.into(), mean.into(), se.into(), lo.into(), hi.into()]);
    }
    let steps: u64 = paths.iter().map(|q| q.steps).sum();
    let trunc: u64 = paths.iter().map(|q| q.truncated_steps).sum();
    let mut o = Outcome::ok(out);
    o.seed = Some(seed);
    o.extra.insert("euler_steps".into(), Value::from(steps));
    o.extra.insert("truncated_steps".into(), Value::from(trunc));
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn acf(
    r: &mut Resolver,
    m: Model,
    s: Option<f64>,
    t_list: Option<String>,
    t_max: Option<f64>,
    n_t: Option<usize>,
    mc_paths: Option<usize>,
    dt: Option<f64>,
    seed: Option<u64>,
) -> Result<Outcome, CliError> {
    let (p, alpha) = model(r, m, 0.7)?;
    let s = r.get("s", s, 1.0)?;
    let ts = if t_list.is_some() || r_has(r, "t-list") {
        r.list("t-list", t_list, &[])?
    } else {
        let t_max = r.get("t-max", t_max, 100.0)?;
        let n = r.get("n-t", n_t, 20)?;
        check_range("t", s, t_max, n)?;
        (0..n)
            .map(|i| s * (t_max / s).powf(i as f64 / (n - 1) as f64))
            .collect()
    };
    let mc = r.get("mc-paths", mc_paths, 0usize)?;
    let dt = r.get("dt", dt, 1e-2)?;
    let mut est = vec![None; ts.len()];
    let mut used_seed = None;
    if mc > 0 {
        let seed = require_seed(r, seed, "acf with mc-paths")?;
        used_seed = Some(seed);
        let mut grid: Vec<f64> = ts.iter().copied().chain([0.0, s]).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let cfg = SimConfig {
            dt,
            n_paths: mc,
            ..SimConfig::default()
        };
        let paths = fractional_paths(&p, alpha, &grid, Start::Stationary, &cfg, seed)?;
        for (e, v) in est.iter_mut().zip(empirical_acf(&paths, s, &ts)?) {
            *e = Some(v);
        }
    } else {
        r.opt("seed", seed)?;
    }
    let mut out = Table::new(&["t", "acf", "asymptote", "mc", "mc_stderr"]);
    for (&t, e) in ts.iter().zip(&est) {
        let q = AcfQuery::for_diffusion(&p, alpha, s, t)?;
        let v = acf_fractional(&q)?;
        let a = if t > s {
            acf_asymptote(p.theta, alpha, s, t)?
        } else {
            f64::NAN
        };
        let (mv, me) = e
            .map(|e| (e.value, e.stderr))
            .unwrap_or((f64::NAN, f64::NAN));
        out.push(vec![t.into(), v.into(), a.into(), mv.into(), me.into()]);
    }
    let mut o = Outcome::ok(out);
    o.seed = used_seed;
    Ok(o)
}

fn r_has(r: &mut Resolver, key: &str) -> bool {
    matches!(r.opt::<String>(key, None), Ok(Some(_)))
}

#[allow(clippy::too_many_arguments)]
fn cauchy(
    r: &mut Resolver,
    m: Model,
    function: Option<String>,
    t: Option<String>,
    y_min: Option<f64>,
    y_max: Option<f64>,
    n_y: Option<usize>,
    center: Option<f64>,
    radius: Option<f64>,
    degree: Option<usize>,
    abs_tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let (p, alpha) = model(r, m, 0.7)?;
    let function = r.get("function", function, "bump".to_string())?;
    let ts = r.list("t", t, &[0.5, 1.0, 2.0])?;
    let lo = r.get("y-min", y_min, 0.5)?;
    let hi = r.get("y-max", y_max, 3.0)?;
    let n = r.get("n-y", n_y, 11)?;
    let cfg = quad_config(r, abs_tol)?;
    check_range("y", lo, hi, n)?;
    let ys = linspace(lo, hi, n);
    let q = match function.as_str() {
        "bump" => {
            let c = r.get("center", center, 2.0)?;
            let rad = r.get("radius", radius, 1.0)?;
            let support = Support::new(c - rad, c + rad)?;
            let g = move |x: f64| {
                let u = (x - c) / rad;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - u * u)).exp()
                }
            };
            backward_solutions(&p, alpha, &g, &support, &ts, &ys, &cfg)?
        }
        "polynomial" => {
            let basis = p.poly_basis(r.get("degree", degree, 1)?)?;
            backward_solutions(
                &p,
                alpha,
                &|x| basis.eval(x),
                &Support::invariant(&p),
                &ts,
                &ys,
                &cfg,
            )?
        }
        "invariant" => {
            let g = |x: f64| p.invariant_density(x).unwrap_or(0.0);
            backward_solutions(&p, alpha, &g, &Support::invariant(&p), &ts, &ys, &cfg)?
        }
        other => {
            return Err(CliError::config(format!(
                "unknown function {other:?} (bump, polynomial or invariant)"
            )))
        }
    };
    let mut out = Table::new(&["t", "y", "q"]);
    for (row, &t) in q.iter().zip(&ts) {
        for (v, &y) in row.iter().zip(&ys) {
            out.push(vec![t.into(), y.into(), (*v).into()]);
        }
    }
    Ok(Outcome::ok(out))
}

fn ml(
    r: &mut Resolver,
    alpha: Option<f64>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    n_x: Option<usize>,
) -> Result<Outcome, CliError> {
    let alpha = r.get("alpha", alpha, 0.5)?;
    let lo = r.get("x-min", x_min, 0.0)?;
    let hi = r.get("x-max", x_max, 10.0)?;
    let n = r.get("n-x", n_x, 101)?;
    check_range("x", lo, hi, n)?;
    let mut out = Table::new(&["x", "ml"]);
    for x in linspace(lo, hi, n) {
        out.push(vec![x.into(), mittag_leffler(alpha, x)?.into()]);
    }
    Ok(Outcome::ok(out))
}

fn validate(r: &mut Resolver, quick: bool, seed: Option<u64>) -> Result<Outcome, CliError> {
    let quick = r.get("quick", quick.then_some(true), false)?;
    let seed = r.get("seed", seed, 1u64)?;
    let rep = validation::run(if quick { Mode::Quick } else { Mode::Full }, seed);
    let mut out = Table::new(&[
        "id",
        "criterion",
        "check",
        "measured",
        "relation",
        "threshold",
        "pass",
    ]);
    for c in &rep.criteria {
        for k in &c.checks {
            out.push(vec![
                Cell::Int(c.id as i64),
                c.name.as_str().into(),
                k.name.as_str().into(),
                k.measured.into(),
                k.relation.symbol().into(),
                k.threshold.into(),
                (if k.pass { "pass" } else { "FAIL" }).into(),
            ]);
        }
    }
    let mut o = Outcome::ok(out);
    o.seed = Some(seed);
    o.extra.insert(
        "mode".into(),
        Value::from(if quick { "quick" } else { "full" }),
    );
    o.extra.insert("pass".into(), Value::from(rep.pass()));
    let failed: Vec<Value> = rep
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| Value::from(c.id))
        .collect();
    o.extra
        .insert("failed_criteria".into(), Value::Array(failed));
    if !rep.pass() {
        o.code = EXIT_VALIDATION;
    }
    Ok(o)
}
