use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::likelihood::{cholesky, LikelihoodContext};
use super::mcmc::{adaptive_metropolis, Evaluation, McmcChain, McmcConfig};
use crate::error::{Error, Result};
use crate::kernels::MaternSpec;
use crate::matrix::{clip_eigenvalues, SymMatrix};
use crate::validity::{check, CheckOptions, ConditionSet};

/// How the scale matrix `α` enters the parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaMode {
    /// Held at the given matrix.
    Fixed(SymMatrix),
    /// Every `α_ij`, `i <= j`, on the log scale.
    Free,
    /// A single `α` shared by all entries, on the log scale.
    Constant,
}

/// `α`, `σ` and nugget `V` of the exponential-type model.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRecord {
    pub alpha: SymMatrix,
    pub sigma: SymMatrix,
    pub nugget: SymMatrix,
}

impl ParamRecord {
    /// Long-format CSV `matrix,i,j,value` over `i <= j` (1-based indices).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("matrix,i,j,value\n");
        for (name, m) in [("alpha", &self.alpha), ("sigma", &self.sigma), ("nugget", &self.nugget)] {
            for (i, j, v) in m.upper() {
                out.push_str(&format!("{name},{},{},{v:.8e}\n", i + 1, j + 1));
            }
        }
        out
    }

    /// Inverse of [`ParamRecord::to_csv_string`]; `#` lines are comments and
    /// every upper-triangle entry of all three matrices must appear once.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, usize, usize, f64, usize)> = Vec::new();
        let mut header_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if !header_seen {
                if f != ["matrix", "i", "j", "value"] {
                    return Err(Error::Parse { line: line_no, msg: "expected header matrix,i,j,value".into() });
                }
                header_seen = true;
                continue;
            }
            let bad = |msg: String| Error::Parse { line: line_no, msg };
            if f.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", f.len())));
            }
            let which = match f[0] {
                "alpha" => 0,
                "sigma" => 1,
                "nugget" => 2,
                other => return Err(bad(format!("unknown matrix {other:?}"))),
            };
            let index =
                |s: &str| s.parse::<usize>().ok().filter(|&k| k >= 1).ok_or_else(|| bad(format!("bad index {s:?}")));
            let (i, j) = (index(f[1])?, index(f[2])?);
            let v: f64 = f[3].parse().map_err(|e| bad(format!("bad number {:?}: {e}", f[3])))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite value {:?}", f[3])));
            }
            entries.push((which, i.min(j) - 1, i.max(j) - 1, v, line_no));
        }
        let p = entries.iter().map(|e| e.2 + 1).max().ok_or(Error::Parse { line: 1, msg: "no entries".into() })?;
        let mut mats =
            [SymMatrix::constant(p, f64::NAN), SymMatrix::constant(p, f64::NAN), SymMatrix::constant(p, f64::NAN)];
        for &(w, i, j, v, line) in &entries {
            if !mats[w].get(i, j).is_nan() {
                return Err(Error::Parse { line, msg: format!("duplicate entry ({}, {})", i + 1, j + 1) });
            }
            mats[w].set(i, j, v);
        }
        for (name, m) in ["alpha", "sigma", "nugget"].iter().zip(&mats) {
            if let Some((i, j, _)) = m.upper().find(|e| e.2.is_nan()) {
                return Err(Error::Domain(format!("{name} entry ({}, {}) is missing", i + 1, j + 1)));
            }
        }
        let [alpha, sigma, nugget] = mats;
        Ok(Self { alpha, sigma, nugget })
    }
}

/// Constrained Gaussian model with constant smoothness. Parameter vector:
/// `α` part (per [`AlphaMode`]), then `ln σ_ii` and raw `σ_ij` (`i < j`),
/// then the nugget's Cholesky factor as `ln L_ii` and raw `L_ij` (`i > j`).
/// The prior is flat on `(α, σ, V)` restricted to the constraint set and to
/// `alpha_bounds`.
#[derive(Debug, Clone)]
pub struct FitModel {
    pub p: usize,
    pub d: usize,
    pub set: ConditionSet,
    pub alpha_mode: AlphaMode,
    pub nu: f64,
    pub alpha_bounds: (f64, f64),
    pub options: CheckOptions,
}

impl FitModel {
    /// Model with `ν = 1/2` and `α` bounds `[1e-3, 1e3]`.
    pub fn new(p: usize, d: usize, set: ConditionSet, alpha_mode: AlphaMode) -> Result<Self> {
        if p == 0 || d == 0 {
            return Err(Error::Domain("p and d must be positive".into()));
        }
        if let AlphaMode::Fixed(a) = &alpha_mode {
            if a.order() != p {
                return Err(Error::Dimension("fixed alpha has the wrong order".into()));
            }
            a.require_positive("alpha")?;
        }
        Ok(Self { p, d, set, alpha_mode, nu: 0.5, alpha_bounds: (1e-3, 1e3), options: CheckOptions::default() })
    }

    /// `Constant` for sets that force a constant `α`, `Free` otherwise.
    pub fn random_alpha_mode(set: ConditionSet) -> AlphaMode {
        match set {
            ConditionSet::Gneiting | ConditionSet::Ex2 | ConditionSet::Du => AlphaMode::Constant,
            _ => AlphaMode::Free,
        }
    }

    fn n_alpha(&self) -> usize {
        match self.alpha_mode {
            AlphaMode::Fixed(_) => 0,
            AlphaMode::Free => self.p * (self.p + 1) / 2,
            AlphaMode::Constant => 1,
        }
    }

    fn n_sigma(&self) -> usize {
        self.p * (self.p + 1) / 2
    }

    pub fn dim(&self) -> usize {
        self.n_alpha() + 2 * self.n_sigma()
    }

    pub fn names(&self) -> Vec<String> {
        let p = self.p;
        let mut out = Vec::with_capacity(self.dim());
        match self.alpha_mode {
            AlphaMode::Fixed(_) => {}
            AlphaMode::Free => {
                for i in 0..p {
                    for j in i..p {
                        out.push(format!("log_alpha_{}_{}", i + 1, j + 1));
                    }
                }
            }
            AlphaMode::Constant => out.push("log_alpha".into()),
        }
        for i in 0..p {
            out.push(format!("log_sigma_{0}_{0}", i + 1));
        }
        for i in 0..p {
            for j in (i + 1)..p {
                out.push(format!("sigma_{}_{}", i + 1, j + 1));
            }
        }
        for i in 0..p {
            out.push(format!("log_vchol_{0}_{0}", i + 1));
        }
        for i in 0..p {
            for j in 0..i {
                out.push(format!("vchol_{}_{}", i + 1, j + 1));
            }
        }
        out
    }

    /// Transformed coordinates of a record. `Constant` mode takes the mean of
    /// `ln α_ij` over `i <= j`; the nugget must be positive definite.
    pub fn encode(&self, r: &ParamRecord) -> Result<Vec<f64>> {
        let p = self.p;
        if r.alpha.order() != p || r.sigma.order() != p || r.nugget.order() != p {
            return Err(Error::Dimension(format!("record does not have order {p}")));
        }
        let mut out = Vec::with_capacity(self.dim());
        match self.alpha_mode {
            AlphaMode::Fixed(_) => {}
            AlphaMode::Free => {
                r.alpha.require_positive("alpha")?;
                out.extend(r.alpha.upper().map(|(_, _, a)| a.ln()));
            }
            AlphaMode::Constant => {
                r.alpha.require_positive("alpha")?;
                let logs: Vec<f64> = r.alpha.upper().map(|(_, _, a)| a.ln()).collect();
                out.push(logs.iter().sum::<f64>() / logs.len() as f64);
            }
        }
        for i in 0..p {
            let s = r.sigma.get(i, i);
            if !(s > 0.0) {
                return Err(Error::Domain(format!("sigma[{i},{i}] = {s} must be positive")));
            }
            out.push(s.ln());
        }
        for i in 0..p {
            for j in (i + 1)..p {
                out.push(r.sigma.get(i, j));
            }
        }
        let l = cholesky(r.nugget.as_faer())?;
        for i in 0..p {
            out.push(l[(i, i)].ln());
        }
        for i in 0..p {
            for j in 0..i {
                out.push(l[(i, j)]);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, theta: &[f64]) -> ParamRecord {
        let p = self.p;
        let mut k = 0;
        let alpha = match &self.alpha_mode {
            AlphaMode::Fixed(a) => a.clone(),
            AlphaMode::Free => {
                let mut a = SymMatrix::constant(p, 0.0);
                for i in 0..p {
                    for j in i..p {
                        a.set(i, j, theta[k].exp());
                        k += 1;
                    }
                }
                a
            }
            AlphaMode::Constant => {
                k = 1;
                SymMatrix::constant(p, theta[0].exp())
            }
        };
        let mut sigma = SymMatrix::constant(p, 0.0);
        for i in 0..p {
            sigma.set(i, i, theta[k].exp());
            k += 1;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                sigma.set(i, j, theta[k]);
                k += 1;
            }
        }
        let mut l = vec![0.0; p * p];
        for i in 0..p {
            l[i * p + i] = theta[k].exp();
            k += 1;
        }
        for i in 0..p {
            for j in 0..i {
                l[i * p + j] = theta[k];
                k += 1;
            }
        }
        let nugget = SymMatrix::from_fn(p, |i, j| (0..p).map(|m| l[i * p + m] * l[j * p + m]).sum());
        ParamRecord { alpha, sigma, nugget }
    }

    /// Log-Jacobian of the map from transformed coordinates to `(α, σ, V)`.
    /// For `V = L Lᵀ` with `L_ii = e^{t_i}` it is `Σ_i (p - i + 2) t_i` (1-based) up to a constant.
    pub fn log_jacobian(&self, theta: &[f64]) -> f64 {
        let p = self.p;
        let na = self.n_alpha();
        let mut total: f64 = theta[..na].iter().sum();
        total += theta[na..na + p].iter().sum::<f64>();
        let vstart = na + self.n_sigma();
        for i in 0..p {
            total += (p - i + 1) as f64 * theta[vstart + i];
        }
        total
    }

    pub fn spec(&self, r: &ParamRecord) -> Result<MaternSpec> {
        MaternSpec::new(self.d, r.alpha.clone(), SymMatrix::constant(self.p, self.nu), r.sigma.clone())
    }

    /// Constraint-set verdict plus the `α` bounds for sampled `α`.
    pub fn satisfies(&self, r: &ParamRecord) -> Result<bool> {
        if !matches!(self.alpha_mode, AlphaMode::Fixed(_)) {
            let (lo, hi) = self.alpha_bounds;
            if r.alpha.upper().any(|(_, _, a)| !(a >= lo && a <= hi)) {
                return Ok(false);
            }
        }
        if r.sigma.upper().any(|(_, _, s)| !s.is_finite()) {
            return Ok(false);
        }
        let spec = match self.spec(r) {
            Ok(s) => s,
            Err(Error::Domain(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(check(self.set, &spec, &self.options)?.satisfied)
    }

    /// Log-likelihood at transformed coordinates, ignoring the constraint.
    pub fn loglik_at(&self, ctx: &LikelihoodContext, theta: &[f64]) -> Result<f64> {
        let r = self.decode(theta);
        ctx.loglik(&self.spec(&r)?, &r.nugget)
    }

    /// Constrained posterior on transformed coordinates.
    pub fn evaluate(&self, ctx: &LikelihoodContext, theta: &[f64]) -> Result<Option<Evaluation>> {
        let r = self.decode(theta);
        if !self.satisfies(&r)? {
            return Ok(None);
        }
        let loglik = ctx.loglik(&self.spec(&r)?, &r.nugget)?;
        Ok(Some(Evaluation { loglik, log_prior: self.log_jacobian(theta) }))
    }

    /// Adaptive Metropolis from `init`, which must satisfy the constraint set.
    pub fn fit_mcmc(&self, ctx: &LikelihoodContext, init: &ParamRecord, cfg: &McmcConfig) -> Result<McmcChain> {
        if ctx.p() != self.p || ctx.d() != self.d {
            return Err(Error::Dimension("data and model disagree on p or d".into()));
        }
        let theta0 = self.encode(init)?;
        if !self.satisfies(&self.decode(&theta0))? {
            return Err(Error::Precondition(format!("initial parameters violate {}", self.set)));
        }
        adaptive_metropolis(|t| self.evaluate(ctx, t), &theta0, self.names(), cfg)
    }

    /// Closest record satisfying the constraint set, measuring squared
    /// distance in transformed coordinates over `α` and `σ`. A non-PD nugget
    /// is first clipped to eigenvalues `>= 1e-6 max(1, λ_max)`.
    pub fn nearest_valid(&self, r: &ParamRecord, seed: u64) -> Result<ParamRecord> {
        if self.satisfies(r)? && cholesky(r.nugget.as_faer()).is_ok() {
            if let AlphaMode::Fixed(a) = &self.alpha_mode {
                if *a == r.alpha {
                    return Ok(r.clone());
                }
            } else if !matches!(self.alpha_mode, AlphaMode::Constant) || r.alpha.is_constant(0.0) {
                return Ok(r.clone());
            }
        }
        let mut rec = r.clone();
        if cholesky(rec.nugget.as_faer()).is_err() {
            let lmax = crate::matrix::is_psd(&rec.nugget, 0.0)?.max_eigenvalue;
            rec.nugget = clip_eigenvalues(&rec.nugget, 1e-6 * lmax.max(1.0))?;
        }
        for i in 0..self.p {
            if !(rec.sigma.get(i, i) > 0.0) {
                rec.sigma.set(i, i, 1e-6);
            }
        }
        if !matches!(self.alpha_mode, AlphaMode::Fixed(_)) {
            let (lo, hi) = self.alpha_bounds;
            rec.alpha = rec.alpha.map(|a| a.clamp(lo, hi));
        }
        let x0 = self.encode(&rec)?;
        let feasible = |x: &[f64]| self.satisfies(&self.decode(x));
        if feasible(&x0)? {
            return Ok(self.decode(&x0));
        }
        let movable = self.n_alpha() + self.n_sigma();
        let na = self.n_alpha();
        let mut anchor = x0.clone();
        if matches!(self.alpha_mode, AlphaMode::Free) {
            let mean = x0[..na].iter().sum::<f64>() / na as f64;
            anchor[..na].iter_mut().for_each(|v| *v = mean);
        }
        anchor[na + self.p..movable].iter_mut().for_each(|v| *v = 0.0);
        if !feasible(&anchor)? {
            return Err(Error::Infeasible(format!("constant-alpha, diagonal-sigma anchor violates {}", self.set)));
        }
        let dist = |x: &[f64]| x[..movable].iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = self.segment_search(&anchor, &x0, &feasible)?;
        best = self.pattern_search(best, &x0, movable, &feasible)?;
        for _ in 0..4 {
            let mut start = anchor.clone();
            for v in start[..movable].iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += 0.2 * z;
            }
            if !feasible(&start)? {
                continue;
            }
            let cand = self.segment_search(&start, &x0, &feasible)?;
            let cand = self.pattern_search(cand, &x0, movable, &feasible)?;
            if dist(&cand) < dist(&best) {
                best = cand;
            }
        }
        Ok(self.decode(&best))
    }

    /// Furthest feasible point on the segment from `from` toward `to`.
    fn segment_search(&self, from: &[f64], to: &[f64], feasible: &impl Fn(&[f64]) -> Result<bool>) -> Result<Vec<f64>> {
        let at = |t: f64| from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect::<Vec<_>>();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if feasible(&at(mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(at(lo))
    }

    /// Compass search on the first `movable` coordinates minimizing the
    /// squared distance to `target` over feasible points.
    fn pattern_search(
        &self,
        mut x: Vec<f64>,
        target: &[f64],
        movable: usize,
        feasible: &impl Fn(&[f64]) -> Result<bool>,
    ) -> Result<Vec<f64>> {
        let dist = |x: &[f64]| x[..movable].iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut fx = dist(&x);
        let mut step = 0.1;
        let mut evals = 0usize;
        while step > 1e-8 && evals < 50_000 {
            let mut improved = false;
            for k in 0..movable {
                for dir in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[k] += dir * step;
                    let fy = dist(&y);
                    if fy >= fx {
                        continue;
                    }
                    evals += 1;
                    if feasible(&y)? {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            // a step straight toward the target
            if fx > 0.0 {
                let norm = fx.sqrt();
                let t = (step / norm).min(1.0);
                let y: Vec<f64> =
                    x.iter().enumerate().map(|(k, v)| if k < movable { v + t * (target[k] - v) } else { *v }).collect();
                evals += 1;
                if feasible(&y)? {
                    fx = dist(&y);
                    x = y;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{rho_max, EquicorrStructure};

    fn record(alpha: SymMatrix, rho: f64) -> ParamRecord {
        let p = alpha.order();
        ParamRecord { alpha, sigma: SymMatrix::equicorrelation(p, 1.0, rho), nugget: SymMatrix::identity(p).scale(0.2) }
    }

    #[test]
    fn csv_round_trip_and_diagnostics() {
        let r = record(SymMatrix::new(&[vec![1.0, 0.7], vec![0.7, 0.5]]).unwrap(), 0.3);
        let back = ParamRecord::from_csv_str(&format!("# comment\n{}", r.to_csv_string())).unwrap();
        for (a, b) in [(&r.alpha, &back.alpha), (&r.sigma, &back.sigma), (&r.nugget, &back.nugget)] {
            for (i, j, v) in a.upper() {
                assert!((b.get(i, j) - v).abs() <= 1e-8 * v.abs());
            }
        }
        let text = r.to_csv_string().replace("sigma,1,2", "sigma,1,x");
        assert!(matches!(ParamRecord::from_csv_str(&text), Err(Error::Parse { line: 6, .. })));
        let missing: String =
            r.to_csv_string().lines().filter(|l| !l.starts_with("nugget,2")).map(|l| format!("{l}\n")).collect();
        assert!(ParamRecord::from_csv_str(&missing).is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        let alpha = SymMatrix::new(&[vec![0.5, 0.7, 1.2], vec![0.7, 1.0, 1.1], vec![1.2, 1.1, 2.0]]).unwrap();
        let nugget = SymMatrix::new(&[vec![0.3, 0.1, 0.0], vec![0.1, 0.2, 0.05], vec![0.0, 0.05, 0.25]]).unwrap();
        let r = ParamRecord { alpha: alpha.clone(), sigma: SymMatrix::equicorrelation(3, 1.3, -0.2), nugget };
        let m = FitModel::new(3, 2, ConditionSet::Ex1, AlphaMode::Free).unwrap();
        let theta = m.encode(&r).unwrap();
        assert_eq!(theta.len(), m.dim());
        assert_eq!(m.names().len(), m.dim());
        let back = m.decode(&theta);
        for (i, j, v) in r.nugget.upper() {
            assert!((back.nugget.get(i, j) - v).abs() < 1e-14);
            assert!((back.alpha.get(i, j) - r.alpha.get(i, j)).abs() < 1e-14);
            assert!((back.sigma.get(i, j) - r.sigma.get(i, j)).abs() < 1e-14);
        }
        let fixed = FitModel::new(3, 2, ConditionSet::Ex1, AlphaMode::Fixed(alpha)).unwrap();
        assert_eq!(fixed.dim(), 12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        // log |det d(vech V)/d(theta_V)| for p = 2 against a numerical Jacobian
        let m = FitModel::new(2, 2, ConditionSet::Ex1, AlphaMode::Fixed(SymMatrix::constant(2, 1.0))).unwrap();
        let theta = vec![0.1, -0.3, 0.4, 0.2, -0.5, 0.7];
        let vech = |t: &[f64]| {
            let r = m.decode(t);
            vec![r.nugget.get(0, 0), r.nugget.get(1, 0), r.nugget.get(1, 1)]
        };
        let h = 1e-6;
        let mut jac = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[3 + c] += h;
            dn[3 + c] -= h;
            let (a, b) = (vech(&up), vech(&dn));
            for r in 0..3 {
                jac[r][c] = (a[r] - b[r]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
            - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
            + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
        let sigma_part = theta[0] + theta[1];
        let expected = m.log_jacobian(&theta) - sigma_part + 4f64.ln();
        assert!((det.abs().ln() - expected).abs() < 1e-6, "{} vs {expected}", det.abs().ln());
    }

    #[test]
    fn valid_record_is_unchanged() {
        let m = FitModel::new(2, 2, ConditionSet::Ex1, AlphaMode::Free).unwrap();
        let r = record(SymMatrix::constant(2, 1.0), 0.3);
        assert_eq!(m.nearest_valid(&r, 1).unwrap(), r);
    }

    #[test]
    fn rho_is_clipped_to_bound() {
        let alpha = SymMatrix::equicorrelation(2, 1.5f64.sqrt(), 0.5f64.sqrt());
        let nu = SymMatrix::constant(2, 0.5);
        let m = FitModel::new(2, 2, ConditionSet::Ex1, AlphaMode::Fixed(alpha.clone())).unwrap();
        let structure = EquicorrStructure::new(2, alpha.clone(), nu, CheckOptions::default()).unwrap();
        let bound = rho_max(&structure, ConditionSet::Ex1, 1e-6).unwrap().rho_max;
        assert!(bound < 0.9);
        let out = m.nearest_valid(&record(alpha, 0.9), 3).unwrap();
        assert!(m.satisfies(&out).unwrap());
        let corr = out.sigma.get(0, 1) / (out.sigma.get(0, 0) * out.sigma.get(1, 1)).sqrt();
        assert!(corr <= bound + 1e-6 && corr >= bound - 0.02, "corr {corr}, bound {bound}");
    }

    #[test]
    fn constant_alpha_projection() {
        let alpha = SymMatrix::new(&[vec![0.5, 1.0], vec![1.0, 2.0]]).unwrap();
        let m = FitModel::new(2, 2, ConditionSet::Gneiting, AlphaMode::Constant).unwrap();
        let out = m.nearest_valid(&record(alpha, 0.2), 1).unwrap();
        assert!(out.alpha.is_constant(0.0));
        assert!((out.alpha.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((out.sigma.get(0, 1) - 0.2).abs() < 1e-12);
        // a non-PD nugget is repaired
        let mut bad = record(SymMatrix::constant(2, 1.0), 0.2);
        bad.nugget = SymMatrix::new(&[vec![0.1, 0.3], vec![0.3, 0.1]]).unwrap();
        let out = m.nearest_valid(&bad, 1).unwrap();
        assert!(cholesky(out.nugget.as_faer()).is_ok());
    }
}
