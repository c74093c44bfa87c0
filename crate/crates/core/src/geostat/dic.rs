use super::mcmc::McmcChain;
use crate::error::{Error, Result};

/// Deviance information criterion of a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DicResult {
    /// Posterior mean of `-2 ln L`.
    pub mean_deviance: f64,
    /// Effective number of parameters, mean deviance minus deviance at the mean.
    pub p_d: f64,
    pub dic: f64,
}

/// DIC from the stored log-likelihoods, with the plug-in deviance taken at
/// the posterior mean of the sampled coordinates.
pub fn dic(chain: &McmcChain, mut loglik_at: impl FnMut(&[f64]) -> Result<f64>) -> Result<DicResult> {
    if chain.samples.len() < 100 {
        return Err(Error::Precondition(format!("DIC needs at least 100 samples, chain has {}", chain.samples.len())));
    }
    let mean_deviance = -2.0 * chain.loglik.iter().sum::<f64>() / chain.loglik.len() as f64;
    let at_mean = -2.0 * loglik_at(&chain.posterior_mean())?;
    let p_d = mean_deviance - at_mean;
    Ok(DicResult { mean_deviance, p_d, dic: mean_deviance + p_d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geostat::mcmc::{adaptive_metropolis, Evaluation, McmcConfig};

    #[test]
    fn gaussian_mean_model_has_one_effective_parameter() {
        // y_k ~ N(μ, 1), flat prior: p_D = 1
        let y = [0.3, -0.2, 1.1, 0.4, 0.0, 0.7, -0.5, 0.9];
        let ll = |m: &[f64]| -> f64 {
            y.iter().map(|v| -0.5 * (v - m[0]).powi(2) - 0.5 * (2.0 * std::f64::consts::PI).ln()).sum()
        };
        let cfg = McmcConfig { iters: 60_000, burn_in: 10_000, seed: 4, ..Default::default() };
        let chain = adaptive_metropolis(
            |m| Ok(Some(Evaluation { loglik: ll(m), log_prior: 0.0 })),
            &[0.0],
            vec!["mu".into()],
            &cfg,
        )
        .unwrap();
        let r = dic(&chain, |m| Ok(ll(m))).unwrap();
        assert!((r.p_d - 1.0).abs() < 0.1, "p_D {}", r.p_d);
        assert!((r.dic - r.mean_deviance - r.p_d).abs() < 1e-12);
    }

    #[test]
    fn short_chain_rejected() {
        let cfg = McmcConfig { iters: 50, burn_in: 10, ..Default::default() };
        let chain = adaptive_metropolis(
            |_| Ok(Some(Evaluation { loglik: 0.0, log_prior: 0.0 })),
            &[0.0],
            vec!["x".into()],
            &cfg,
        )
        .unwrap();
        assert!(matches!(dic(&chain, |_| Ok(0.0)), Err(Error::Precondition(_))));
    }
}
