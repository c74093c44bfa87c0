use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use mvmatern::bounds::{example_curve, rho_max, Curve, EquicorrStructure};
use mvmatern::geostat::{
    dic, empirical_variogram, simulate_field, wls_fit_exponential, AlphaMode, FitModel, LikelihoodContext, McmcChain,
    McmcConfig, ParamRecord, SpatialDataset,
};
use mvmatern::validity::{check, log_grid, CheckOptions, ConditionSet};
use mvmatern::{Error, MaternSpec, SiteSet, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::*;

/// Outcome of a successful run.
pub struct Output {
    pub text: String,
    /// `false` only for `check` with an unsatisfied set.
    pub satisfied: bool,
}

pub type Fallible<T> = Result<T, String>;

fn lib(context: &str) -> impl Fn(Error) -> String + '_ {
    move |e| match e {
        Error::Parse { line, msg } => format!("{context}:{line}: {msg}"),
        other => format!("{context}: {other}"),
    }
}

/// `# key = value` lines naming the command and every resolved option.
pub fn header(name: &str, threads: usize, args: &impl Serialize) -> String {
    let mut out = format!("# mvmatern {name} {}\n# threads = {threads}\n", env!("CARGO_PKG_VERSION"));
    let body = toml::to_string(args).expect("argument structs serialize");
    for line in body.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn read_input(path: &Path) -> Fallible<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("standard input: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn is_inline(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || ".eE+-,; \t".contains(c))
}

fn matrix(flag: &str, value: &str) -> Fallible<SymMatrix> {
    if is_inline(value) {
        SymMatrix::from_csv_str(&value.replace(';', "\n")).map_err(|e| match e {
            Error::Parse { line, msg } => format!("--{flag}: inline row {line}: {msg}"),
            other => format!("--{flag}: {other}"),
        })
    } else {
        let text = read_input(Path::new(value))?;
        SymMatrix::from_csv_str(&text).map_err(lib(value))
    }
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Fallible<&'a T> {
    value.as_ref().ok_or_else(|| format!("--{flag} is required"))
}

/// A 1×1 `m` becomes the constant matrix of order `p`.
fn fill(m: SymMatrix, p: usize) -> SymMatrix {
    if m.order() == 1 && p > 1 {
        SymMatrix::constant(p, m.get(0, 0))
    } else {
        m
    }
}

fn spec_from(d: usize, alpha: &Option<String>, nu: &str, sigma: &Option<String>) -> Fallible<MaternSpec> {
    let alpha = matrix("alpha", required(alpha, "alpha")?)?;
    let sigma = matrix("sigma", required(sigma, "sigma")?)?;
    let nu = fill(matrix("nu", nu)?, alpha.order());
    MaternSpec::new(d, alpha, nu, sigma).map_err(|e| e.to_string())
}

fn parse_sets(list: &str) -> Fallible<Vec<ConditionSet>> {
    if list.trim() == "all" {
        return Ok(ConditionSet::ALL.to_vec());
    }
    list.split(',').map(|s| s.trim().parse::<ConditionSet>().map_err(|e| e.to_string())).collect()
}

fn parse_set(id: &str) -> Fallible<ConditionSet> {
    id.trim().parse().map_err(|e: Error| e.to_string())
}

/// `lo:hi:n` on a linear or logarithmic scale.
fn parse_grid(grid: &str, log: bool) -> Fallible<Vec<f64>> {
    let bad = || format!("--grid must look like lo:hi:n, got {grid:?}");
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(bad());
    }
    if log {
        if !(lo > 0.0) {
            return Err("a log grid needs lo > 0".into());
        }
        return Ok(log_grid(lo, hi, n));
    }
    Ok((0..n).map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect())
}

fn dataset(path: &Path, normal_scores: bool) -> Fallible<SpatialDataset> {
    let ds = SpatialDataset::from_csv_str(&read_input(path)?).map_err(lib(&path.display().to_string()))?;
    if normal_scores {
        ds.normal_scores().map_err(|e| e.to_string())
    } else {
        Ok(ds)
    }
}

fn read_record(path: &Path) -> Fallible<ParamRecord> {
    ParamRecord::from_csv_str(&read_input(path)?).map_err(lib(&path.display().to_string()))
}

fn alpha_mode(mode: &str, set: ConditionSet, init: Option<&ParamRecord>) -> Fallible<AlphaMode> {
    Ok(match mode {
        "auto" => FitModel::random_alpha_mode(set),
        "free" => AlphaMode::Free,
        "constant" => AlphaMode::Constant,
        "fixed" => AlphaMode::Fixed(init.ok_or("--alpha-mode fixed needs --init")?.alpha.clone()),
        other => return Err(format!("unknown alpha mode {other:?} (auto, free, constant, fixed)")),
    })
}

pub fn run_check(a: &CheckArgs, head: String) -> Fallible<Output> {
    let spec = spec_from(a.d, &a.alpha, &a.nu, &a.sigma)?;
    let p = spec.p();
    let opts = CheckOptions {
        tol: a.tol,
        beta: a.beta,
        psi: a.psi.as_deref().map(|s| matrix("psi", s)).transpose()?,
        delta: a.delta,
        a: a.apan_a.as_deref().map(|s| matrix("apan-a", s).map(|m| fill(m, p))).transpose()?,
        omega_grid: log_grid(a.omega_min, a.omega_max, a.omega_points.max(1)),
    };
    let mut text = head;
    let mut all = true;
    for set in parse_sets(&a.set)? {
        let report = check(set, &spec, &opts).map_err(|e| format!("{set}: {e}"))?;
        all &= report.satisfied;
        let _ = writeln!(text, "\n# ---\n{}", report.to_text());
    }
    Ok(Output { text, satisfied: all })
}

pub fn run_bound(a: &BoundArgs, head: String) -> Fallible<Output> {
    let mut text = head;
    if let Some(example) = &a.example {
        let (curve, grid, log) = match example.as_str() {
            "fig1" => (Curve::Fig1 { a: a.a }, "0.1:10:50", false),
            "fig2" => (Curve::Fig2, "0.01:10:30", true),
            other => return Err(format!("unknown example {other:?} (fig1, fig2)")),
        };
        let log = match a.spacing.as_deref() {
            None => log,
            Some("lin") => false,
            Some("log") => true,
            Some(other) => return Err(format!("unknown spacing {other:?} (lin, log)")),
        };
        let grid = parse_grid(a.grid.as_deref().unwrap_or(grid), log)?;
        let table = example_curve(curve, &grid, a.p, a.d, a.rho_tol).map_err(|e| e.to_string())?;
        text.push_str(&table.to_csv());
    } else {
        let alpha = matrix("alpha", required(&a.alpha, "alpha")?)?;
        let nu = fill(matrix("nu", &a.nu)?, alpha.order());
        let s = EquicorrStructure::new(a.d, alpha, nu, CheckOptions::default()).map_err(|e| e.to_string())?;
        text.push_str("set,rho_max,infeasible_at_zero\n");
        for set in parse_sets(&a.set)? {
            let b = rho_max(&s, set, a.rho_tol).map_err(|e| format!("{set}: {e}"))?;
            let _ = writeln!(text, "{set},{:.8e},{}", b.rho_max, b.infeasible_at_zero);
        }
    }
    Ok(Output { text, satisfied: true })
}

pub fn run_curves(a: &CurvesArgs, head: String) -> Fallible<Output> {
    let spec = spec_from(a.d, &a.alpha, &a.nu, &a.sigma)?;
    if a.points < 2 || !(a.max > 0.0) {
        return Err("need --points >= 2 and --max > 0".into());
    }
    let mut text = head;
    let p = spec.p();
    let (x, prefix) = if a.spectral { ("omega", "f") } else { ("h", "c") };
    let mut cols = vec![x.to_string()];
    for i in 0..p {
        for j in i..p {
            cols.push(format!("{prefix}_{}_{}", i + 1, j + 1));
        }
    }
    let _ = writeln!(text, "{}", cols.join(","));
    for k in 0..a.points {
        let t = a.max * k as f64 / (a.points - 1) as f64;
        let m = if a.spectral { spec.spectral_at(t) } else { spec.cov_at(t) };
        let mut row = vec![format!("{t:.8e}")];
        row.extend(m.upper().map(|(_, _, v)| format!("{v:.8e}")));
        let _ = writeln!(text, "{}", row.join(","));
    }
    Ok(Output { text, satisfied: true })
}

pub fn run_vario(a: &VarioArgs, head: String) -> Fallible<Output> {
    let ds = dataset(&a.data, a.normal_scores)?;
    let ev = empirical_variogram(&ds, a.bins, a.max_lag).map_err(|e| e.to_string())?;
    Ok(Output { text: head + &ev.to_csv_string(), satisfied: true })
}

pub fn run_fit(a: &FitArgs, head: String) -> Fallible<Output> {
    let ds = dataset(&a.data, a.normal_scores)?;
    let ev = empirical_variogram(&ds, a.bins, a.max_lag).map_err(|e| e.to_string())?;
    let fit = wls_fit_exponential(&ev).map_err(|e| e.to_string())?;
    let mut text = head;
    let flagged: Vec<String> = fit.flagged.iter().map(|(i, j)| format!("\"{}_{}\"", i + 1, j + 1)).collect();
    let _ = writeln!(text, "# flagged = [{}]", flagged.join(", "));
    text.push_str(&fit.record().to_csv_string());
    Ok(Output { text, satisfied: true })
}

fn fit_model(ds: &SpatialDataset, set: &str, mode: &str, init: Option<&ParamRecord>) -> Fallible<FitModel> {
    let set = parse_set(set)?;
    let mode = alpha_mode(mode, set, init)?;
    FitModel::new(ds.p(), ds.sites.dim(), set, mode).map_err(|e| e.to_string())
}

pub fn run_mcmc(a: &McmcArgs, head: String) -> Fallible<Output> {
    let ds = dataset(&a.data, a.normal_scores)?;
    let init = read_record(required(&a.init, "init")?)?;
    let model = fit_model(&ds, &a.set, &a.alpha_mode, Some(&init))?;
    let start = model.nearest_valid(&init, a.seed).map_err(|e| format!("projecting --init: {e}"))?;
    let ctx = LikelihoodContext::new(&ds);
    let cfg = McmcConfig { iters: a.iters, burn_in: a.burn, seed: a.seed, ..Default::default() };
    let chain = model.fit_mcmc(&ctx, &start, &cfg).map_err(|e| e.to_string())?;
    let mut text = head;
    let _ = writeln!(text, "# init = \"{}\"", if start == init { "given" } else { "projected" });
    let _ = writeln!(text, "# accepted = {}", chain.accepted);
    let _ = writeln!(text, "# acceptance_rate = {:.8e}", chain.acceptance_rate());
    let _ = writeln!(text, "# constraint_rejections = {}", chain.constraint_rejections);
    let _ = writeln!(text, "# final_scale = {:.8e}", chain.scale);
    text.push_str(&chain.to_csv_string());
    Ok(Output { text, satisfied: true })
}

pub fn run_dic(a: &DicArgs, head: String) -> Fallible<Output> {
    let ds = dataset(&a.data, a.normal_scores)?;
    let path = required(&a.chain, "chain")?;
    let chain = McmcChain::from_csv_str(&read_input(path)?).map_err(lib(&path.display().to_string()))?;
    let init = a.init.as_deref().map(read_record).transpose()?;
    let model = fit_model(&ds, &a.set, &a.alpha_mode, init.as_ref())?;
    if chain.names != model.names() {
        return Err(format!(
            "chain columns [{}] do not match the model [{}]; check --set and --alpha-mode",
            chain.names.join(", "),
            model.names().join(", ")
        ));
    }
    let ctx = LikelihoodContext::new(&ds);
    let r = dic(&chain, |t| model.loglik_at(&ctx, t)).map_err(|e| e.to_string())?;
    let text = format!("{head}mean_deviance,p_d,dic\n{:.8e},{:.8e},{:.8e}\n", r.mean_deviance, r.p_d, r.dic);
    Ok(Output { text, satisfied: true })
}

pub fn run_simulate(a: &SimulateArgs, head: String) -> Fallible<Output> {
    let spec = spec_from(a.d, &a.alpha, &a.nu, &a.sigma)?;
    let p = spec.p();
    let nugget = matrix("nugget", &a.nugget)?;
    let nugget = if nugget.order() == 1 && p > 1 { SymMatrix::identity(p).scale(nugget.get(0, 0)) } else { nugget };
    if a.sites == 0 || !(a.domain > 0.0) {
        return Err("need --sites >= 1 and --domain > 0".into());
    }
    let sites = SiteSet::random_uniform(a.sites, a.d, 0.0, a.domain, &mut ChaCha8Rng::seed_from_u64(a.seed));
    let ds = simulate_field(&sites, &spec, &nugget, a.seed.wrapping_add(1)).map_err(|e| e.to_string())?;
    Ok(Output { text: head + &ds.to_csv_string(), satisfied: true })
}
