use std::fmt::Write;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Target density at a point: log-likelihood and log-prior (including any
/// change-of-variables term) kept apart so the chain can report the former.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loglik: f64,
    pub log_prior: f64,
}

impl Evaluation {
    pub fn log_target(&self) -> f64 {
        self.loglik + self.log_prior
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub iters: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Proposal covariance refreshed from the sample covariance this often.
    pub adapt_every: usize,
    /// Proposal scale retuned this often during burn-in.
    pub retune_every: usize,
    /// Added to the diagonal of the sample covariance.
    pub jitter: f64,
    /// Standard deviation of the initial isotropic proposal.
    pub initial_step: f64,
    /// Acceptance band targeted by the scale retuning.
    pub target_band: (f64, f64),
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iters: 60_000,
            burn_in: 30_000,
            seed: 0,
            adapt_every: 100,
            retune_every: 500,
            jitter: 1e-6,
            initial_step: 0.1,
            target_band: (0.15, 0.5),
        }
    }
}

/// Post-burn-in samples of an adaptive Metropolis run.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcChain {
    pub names: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    pub loglik: Vec<f64>,
    /// Accepted proposals over all iterations.
    pub accepted: usize,
    /// Proposals rejected by the constraint (target returned `None`).
    pub constraint_rejections: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Final multiplier of the adapted covariance.
    pub scale: f64,
    /// `(iteration, window acceptance rate, new scale)` at each retune.
    pub retunes: Vec<(usize, f64, f64)>,
}

impl McmcChain {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.iterations as f64
    }

    pub fn posterior_mean(&self) -> Vec<f64> {
        let n = self.samples.len() as f64;
        (0..self.dim()).map(|k| self.samples.iter().map(|s| s[k]).sum::<f64>() / n).collect()
    }

    pub fn posterior_sd(&self) -> Vec<f64> {
        let mean = self.posterior_mean();
        let n = self.samples.len() as f64;
        (0..self.dim())
            .map(|k| (self.samples.iter().map(|s| (s[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
            .collect()
    }

    /// One row per stored sample: `loglik` followed by the parameters.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("loglik");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (ll, s) in self.loglik.iter().zip(&self.samples) {
            let _ = write!(out, "{ll:.8e}");
            for v in s {
                let _ = write!(out, ",{v:.8e}");
            }
            out.push('\n');
        }
        out
    }
}

impl McmcChain {
    /// Reads the output of [`McmcChain::to_csv_string`]; `#` lines are
    /// comments. Counters and adaptation history are not part of the file
    /// and come back as zero / empty, with `iterations` set to the row count.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut names: Option<Vec<String>> = None;
        let (mut samples, mut loglik) = (Vec::new(), Vec::new());
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
            let Some(names) = &names else {
                if fields.first() != Some(&"loglik") || fields.len() < 2 {
                    return Err(Error::Parse { line, msg: "expected header loglik,<parameters…>".into() });
                }
                names = Some(fields[1..].iter().map(|s| s.to_string()).collect());
                continue;
            };
            if fields.len() != names.len() + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", names.len() + 1, fields.len()),
                });
            }
            let row = fields
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("bad number {f:?}: {e}") }))
                .collect::<Result<Vec<_>>>()?;
            loglik.push(row[0]);
            samples.push(row[1..].to_vec());
        }
        let names = names.ok_or(Error::Parse { line: 1, msg: "empty chain file".into() })?;
        Ok(Self {
            names,
            iterations: samples.len(),
            samples,
            loglik,
            accepted: 0,
            constraint_rejections: 0,
            burn_in: 0,
            seed: 0,
            scale: 0.0,
            retunes: Vec::new(),
        })
    }
}

/// Running mean and scatter matrix.
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Self { n: 0, mean: vec![0.0; dim], m2: vec![0.0; dim * dim] }
    }

    fn push(&mut self, x: &[f64]) {
        let dim = x.len();
        self.n += 1;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / self.n as f64;
        }
        for i in 0..dim {
            let after = x[i] - self.mean[i];
            for j in 0..dim {
                self.m2[i * dim + j] += after * delta[j];
            }
        }
    }

    fn covariance(&self, i: usize, j: usize) -> f64 {
        let dim = self.mean.len();
        0.5 * (self.m2[i * dim + j] + self.m2[j * dim + i]) / (self.n - 1) as f64
    }
}

/// Lower Cholesky factor of `scale * (base + jitter I)`, doubling the jitter
/// until the factorization succeeds.
fn proposal_factor(base: &Mat<f64>, scale: f64, jitter: f64) -> Mat<f64> {
    let dim = base.nrows();
    let mut j = jitter;
    loop {
        let m = Mat::from_fn(dim, dim, |r, c| scale * (base[(r, c)] + if r == c { j } else { 0.0 }));
        if let Ok(llt) = m.llt(Side::Lower) {
            return llt.L().to_owned();
        }
        j = (j * 10.0).max(1e-12);
    }
}

/// Adaptive random-walk Metropolis. `target` returns `Ok(None)` for points
/// outside the support (constraint violations), which are rejected; a
/// [`Error::NotPositiveDefinite`] from `target` is treated the same way.
/// Samples after `burn_in` are stored.
pub fn adaptive_metropolis<F>(mut target: F, init: &[f64], names: Vec<String>, cfg: &McmcConfig) -> Result<McmcChain>
where
    F: FnMut(&[f64]) -> Result<Option<Evaluation>>,
{
    let dim = init.len();
    if dim == 0 || names.len() != dim {
        return Err(Error::Dimension(format!("{dim} parameters but {} names", names.len())));
    }
    if cfg.iters <= cfg.burn_in {
        return Err(Error::Domain(format!("iters ({}) must exceed burn_in ({})", cfg.iters, cfg.burn_in)));
    }
    if cfg.adapt_every == 0 || cfg.retune_every == 0 {
        return Err(Error::Domain("adaptation intervals must be positive".into()));
    }
    let mut current = init.to_vec();
    let mut cur_eval =
        target(&current)?.ok_or_else(|| Error::Precondition("initial parameters violate the constraint set".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut scale = 2.38f64.powi(2) / dim as f64;
    let mut base = Mat::from_fn(dim, dim, |r, c| if r == c { cfg.initial_step.powi(2) / scale } else { 0.0 });
    let mut factor = proposal_factor(&base, scale, cfg.jitter);
    let mut stats = Welford::new(dim);
    let mut chain = McmcChain {
        names,
        samples: Vec::with_capacity(cfg.iters - cfg.burn_in),
        loglik: Vec::with_capacity(cfg.iters - cfg.burn_in),
        accepted: 0,
        constraint_rejections: 0,
        iterations: cfg.iters,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
        scale,
        retunes: Vec::new(),
    };
    let mut window_accepted = 0usize;
    let mut proposal = vec![0.0; dim];
    let mut eps = vec![0.0; dim];
    for it in 1..=cfg.iters {
        for e in eps.iter_mut() {
            *e = StandardNormal.sample(&mut rng);
        }
        for r in 0..dim {
            proposal[r] = current[r] + (0..=r).map(|c| factor[(r, c)] * eps[c]).sum::<f64>();
        }
        let log_u: f64 = rng.random::<f64>().ln();
        let eval = match target(&proposal) {
            Ok(v) => v,
            Err(Error::NotPositiveDefinite(_)) => None,
            Err(e) => return Err(e),
        };
        match eval {
            Some(ev) if log_u < ev.log_target() - cur_eval.log_target() => {
                current.copy_from_slice(&proposal);
                cur_eval = ev;
                chain.accepted += 1;
                window_accepted += 1;
            }
            Some(_) => {}
            None => chain.constraint_rejections += 1,
        }
        stats.push(&current);
        let mut refresh = false;
        if it % cfg.adapt_every == 0 && stats.n > 2 * dim {
            base = Mat::from_fn(dim, dim, |r, c| stats.covariance(r, c));
            refresh = true;
        }
        if it <= cfg.burn_in && it % cfg.retune_every == 0 {
            let rate = window_accepted as f64 / cfg.retune_every as f64;
            let (lo, hi) = cfg.target_band;
            if rate < lo || rate > hi {
                let mid = 0.5 * (lo + hi);
                scale *= (rate / mid).clamp(0.2, 5.0);
                refresh = true;
            }
            chain.retunes.push((it, rate, scale));
            window_accepted = 0;
        }
        if refresh {
            factor = proposal_factor(&base, scale, cfg.jitter);
        }
        if it > cfg.burn_in {
            chain.samples.push(current.clone());
            chain.loglik.push(cur_eval.loglik);
        }
    }
    chain.scale = scale;
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_target() {
        let cfg = McmcConfig { iters: 60_000, burn_in: 10_000, seed: 1, ..Default::default() };
        let chain = adaptive_metropolis(
            |x| Ok(Some(Evaluation { loglik: -0.5 * x[0] * x[0], log_prior: 0.0 })),
            &[3.0],
            vec!["x".into()],
            &cfg,
        )
        .unwrap();
        let mean = chain.posterior_mean()[0];
        let sd = chain.posterior_sd()[0];
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((sd * sd - 1.0).abs() < 0.1, "var {}", sd * sd);
        assert_eq!(chain.samples.len(), 50_000);
        let rate = chain.acceptance_rate();
        assert!(rate > 0.15 && rate < 0.6, "rate {rate}");
    }

    #[test]
    fn box_constraint_respected_and_reproducible() {
        let target = |x: &[f64]| {
            Ok(if x.iter().all(|v| (0.0..=1.0).contains(v)) {
                Some(Evaluation { loglik: 0.0, log_prior: 0.0 })
            } else {
                None
            })
        };
        let cfg = McmcConfig { iters: 5000, burn_in: 1000, seed: 9, ..Default::default() };
        let names = vec!["a".to_string(), "b".to_string()];
        let chain = adaptive_metropolis(target, &[0.5, 0.5], names.clone(), &cfg).unwrap();
        assert!(chain.samples.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        assert!(chain.constraint_rejections > 0);
        let again = adaptive_metropolis(target, &[0.5, 0.5], names.clone(), &cfg).unwrap();
        assert_eq!(chain, again);
        let read = McmcChain::from_csv_str(&format!("# header\n{}", chain.to_csv_string())).unwrap();
        assert_eq!(read.names, chain.names);
        assert_eq!(read.samples.len(), chain.samples.len());
        assert_eq!(read.to_csv_string(), chain.to_csv_string());
        let broken = chain.to_csv_string().replacen('\n', "\n1.0\n", 1);
        assert!(matches!(McmcChain::from_csv_str(&broken), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(adaptive_metropolis(target, &[2.0, 0.5], names.clone(), &cfg), Err(Error::Precondition(_))));
        let bad = McmcConfig { iters: 10, burn_in: 10, ..cfg };
        assert!(adaptive_metropolis(target, &[0.5, 0.5], names, &bad).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = McmcConfig { iters: 3, burn_in: 1, ..Default::default() };
        let chain = adaptive_metropolis(
            |_| Ok(Some(Evaluation { loglik: -1.0, log_prior: 0.0 })),
            &[0.0],
            vec!["t".into()],
            &cfg,
        )
        .unwrap();
        let csv = chain.to_csv_string();
        assert!(csv.starts_with("loglik,t\n-1.00000000e0,"));
        assert_eq!(csv.lines().count(), 3);
    }
}
