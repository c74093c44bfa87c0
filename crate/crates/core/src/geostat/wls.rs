use super::{EmpiricalVariogram, ParamRecord};
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::validity::log_grid;

/// Per-pair weighted least-squares fit of `γ(h) = V + σ (1 - e^{-α h})`.
#[derive(Debug, Clone, PartialEq)]
pub struct WlsFit {
    pub alpha: SymMatrix,
    pub sigma: SymMatrix,
    pub nugget: SymMatrix,
    /// Weighted residual sum of squares at the optimum.
    pub objective: SymMatrix,
    /// Pairs whose fit is degenerate (flat variogram) or whose `α` sits on
    /// the search boundary.
    pub flagged: Vec<(usize, usize)>,
}

impl WlsFit {
    /// `(α, σ, V)` as a parameter record.
    pub fn record(&self) -> ParamRecord {
        ParamRecord { alpha: self.alpha.clone(), sigma: self.sigma.clone(), nugget: self.nugget.clone() }
    }
}

const GRID_POINTS: usize = 80;

struct Series {
    h: Vec<f64>,
    g: Vec<f64>,
    w: Vec<f64>,
}

/// `(V, σ, objective)` for fixed `α`; `V` is kept nonnegative when `direct`.
fn solve_linear(s: &Series, alpha: f64, direct: bool) -> (f64, f64, f64) {
    let f: Vec<f64> = s.h.iter().map(|h| -(-alpha * h).exp_m1()).collect();
    let (mut sw, mut swf, mut swff, mut swg, mut swfg) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..f.len() {
        let w = s.w[k];
        sw += w;
        swf += w * f[k];
        swff += w * f[k] * f[k];
        swg += w * s.g[k];
        swfg += w * f[k] * s.g[k];
    }
    let det = sw * swff - swf * swf;
    let (mut v, mut sigma) = if det > 1e-14 * sw * swff {
        ((swg * swff - swf * swfg) / det, (sw * swfg - swf * swg) / det)
    } else {
        (0.0, swfg / swff)
    };
    if direct && v < 0.0 {
        v = 0.0;
        sigma = swfg / swff;
    }
    let obj = (0..f.len()).map(|k| s.w[k] * (s.g[k] - v - sigma * f[k]).powi(2)).sum();
    (v, sigma, obj)
}

/// Golden-section minimization of `f` over `[a, b]`.
fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fits every direct and cross variogram independently with weights
/// `N_b / h_b²`: `(V, σ)` in closed form for each `α`, `α` by a log grid
/// on `[1/h_max, 10/h_min]` refined with golden-section search.
pub fn wls_fit_exponential(ev: &EmpiricalVariogram) -> Result<WlsFit> {
    let nonempty = ev.counts.iter().filter(|&&c| c > 0).count();
    if nonempty < 3 {
        return Err(Error::Precondition(format!("need at least 3 nonempty bins, found {nonempty}")));
    }
    let p = ev.p();
    let (mut alpha, mut sigma, mut nugget, mut objective) = (
        SymMatrix::constant(p, 0.0),
        SymMatrix::constant(p, 0.0),
        SymMatrix::constant(p, 0.0),
        SymMatrix::constant(p, 0.0),
    );
    let mut flagged = Vec::new();
    for i in 0..p {
        for j in i..p {
            let series = ev.series(i, j);
            let s = Series {
                h: series.iter().map(|x| x.0).collect(),
                g: series.iter().map(|x| x.1).collect(),
                w: series.iter().map(|x| x.2 as f64 / (x.0 * x.0)).collect(),
            };
            let (hmin, hmax) = (s.h[0], s.h[s.h.len() - 1]);
            let grid = log_grid(1.0 / hmax, 10.0 / hmin, GRID_POINTS);
            let scale = s.g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let spread =
                s.g.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - s.g.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            let direct = i == j;
            let (a, v, sg, obj, flag) = if spread <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                let a = grid[GRID_POINTS - 1];
                let (v, sg, obj) = solve_linear(&s, a, direct);
                (a, v, sg, obj, true)
            } else {
                let objs: Vec<f64> = grid.iter().map(|&a| solve_linear(&s, a, direct).2).collect();
                let k = (0..GRID_POINTS).min_by(|&x, &y| objs[x].total_cmp(&objs[y])).expect("nonempty grid");
                let lo = grid[k.saturating_sub(1)].ln();
                let hi = grid[(k + 1).min(GRID_POINTS - 1)].ln();
                let la = golden_min(|la| solve_linear(&s, la.exp(), direct).2, lo, hi, 1e-10);
                let a = la.exp();
                let (v, sg, obj) = solve_linear(&s, a, direct);
                (a, v, sg, obj, k == 0 || k == GRID_POINTS - 1)
            };
            if flag {
                flagged.push((i, j));
            }
            alpha.set(i, j, a);
            sigma.set(i, j, sg);
            nugget.set(i, j, v);
            objective.set(i, j, obj);
        }
    }
    Ok(WlsFit { alpha, sigma, nugget, objective, flagged })
}
