//! Independent numerical routes to quantities computed elsewhere in closed
//! form or through matrix transforms: integral representations of the Matérn
//! correlation and direct tests of conditional negative definiteness.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::{
    gaussian_corr, inv_gamma_mixture_density, joint_covariance, matern_corr, matern_spectral_density, MaternSpec,
    SiteSet,
};
use crate::matrix::{hadamard, is_psd, psd_of, HadamardOp, SymMatrix, DEFAULT_TOL};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::specfun::log_gamma;
use crate::validity::{spectral_oracle, SpectralVerdict};

const REL_TOL: f64 = 1e-10;

/// `∫₀^∞ exp(-u h²) g(u; α, ν) du` with `g` the inverse-gamma mixing density.
/// Requires `h > 0`.
pub fn gaussian_mixture_corr(h: f64, alpha: f64, nu: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {h}")));
    }
    inv_gamma_mixture_density(1.0, alpha, nu)?;
    let f = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            gaussian_corr(h, u).unwrap_or(0.0) * inv_gamma_mixture_density(u, alpha, nu).unwrap_or(0.0)
        }
    };
    // the density peaks near α²/(4(ν+1))
    let mode = alpha * alpha / (4.0 * (nu + 1.0));
    Ok(integrate(f, 0.0, mode, REL_TOL, 0.0)? + integrate_to_infinity(f, mode, REL_TOL)?)
}

/// `Γ(ν+μ) / (Γ(ν) Γ(μ)) ∫₁^∞ t^{-ν-μ} (t-1)^{μ-1} k(h√t; α, ν+μ) dt`,
/// evaluated with `t = 1 + s²`.
pub fn smoothness_mixture_corr(h: f64, alpha: f64, nu: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    matern_corr(h, alpha, nu + mu)?;
    let ln_c = log_gamma(nu + mu)? - log_gamma(nu)? - log_gamma(mu)?;
    let f = |s: f64| {
        let t = 1.0 + s * s;
        let k = matern_corr(h * t.sqrt(), alpha, nu + mu).unwrap_or(0.0);
        if k == 0.0 {
            return 0.0;
        }
        2.0 * (ln_c - (nu + mu) * t.ln() + (2.0 * mu - 1.0) * s.ln()).exp() * k
    };
    integrate_to_infinity(f, 0.0, REL_TOL)
}

/// `∫_ℝ cos(hω) f(ω) dω` for the `d = 1` spectral density `f`: partial sums
/// over half-periods of `cos(hω)`, accelerated by repeated averaging.
pub fn fourier_corr_1d(h: f64, alpha: f64, nu: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {h}")));
    }
    matern_spectral_density(0.0, alpha, nu, 1)?;
    let period = std::f64::consts::PI / h;
    let f = |w: f64| (h * w).cos() * matern_spectral_density(w, alpha, nu, 1).unwrap_or(0.0);
    let mut partial = Vec::with_capacity(60);
    let mut sum = 0.0;
    for k in 0..60 {
        sum += 2.0 * integrate(f, k as f64 * period, (k + 1) as f64 * period, 1e-12, 1e-15)?;
        partial.push(sum);
    }
    while partial.len() > 1 {
        partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    Ok(partial[0])
}

/// `max |k(h; 2√(βν), ν) - exp(-βh²)|` over `n` equispaced `h` in `[0, h_max]`.
pub fn gaussian_limit_gap(beta: f64, nu: f64, h_max: f64, n: usize) -> Result<f64> {
    let alpha = 2.0 * (beta * nu).sqrt();
    let mut worst = 0.0f64;
    for k in 0..n {
        let h = h_max * k as f64 / (n - 1).max(1) as f64;
        worst = worst.max((matern_corr(h, alpha, nu)? - (-beta * h * h).exp()).abs());
    }
    Ok(worst)
}

/// Largest `λᵀAλ / ‖λ‖²` over `samples` random zero-sum directions.
pub fn max_zero_sum_form<R: Rng + ?Sized>(a: &SymMatrix, samples: usize, rng: &mut R) -> f64 {
    let p = a.order();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut l: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
        let mean = l.iter().sum::<f64>() / p as f64;
        l.iter_mut().for_each(|v| *v -= mean);
        let norm2: f64 = l.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            continue;
        }
        let q: f64 = a.upper().map(|(i, j, v)| if i == j { v * l[i] * l[i] } else { 2.0 * v * l[i] * l[j] }).sum();
        worst = worst.max(q / norm2);
    }
    worst
}

/// Direct-definition verdict: no sampled zero-sum direction makes the form
/// exceed `tol * max(1, max |a_ij|)`.
pub fn cnd_by_sampling<R: Rng + ?Sized>(a: &SymMatrix, samples: usize, tol: f64, rng: &mut R) -> bool {
    let scale = a.upper().fold(1.0f64, |m, (_, _, v)| m.max(v.abs()));
    max_zero_sum_form(a, samples, rng) <= tol * scale
}

/// Exponential verdict: `exp(-tA)` PSD for every `t` in `ts`.
pub fn cnd_by_exponential(a: &SymMatrix, ts: &[f64], tol: f64) -> Result<bool> {
    for &t in ts {
        if !is_psd(&hadamard(a, HadamardOp::ExpScale(-t))?, tol)?.is_psd {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Space- and frequency-domain evidence that a model is valid.
#[derive(Debug, Clone)]
pub struct Soundness {
    /// Smallest eigenvalue of the joint covariance at the random sites.
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub spectral: SpectralVerdict,
}

impl Soundness {
    /// `λ_min >= -1e-8 trace` and the spectral grid passes.
    pub fn passed(&self) -> bool {
        self.min_eigenvalue >= -1e-8 * self.trace && self.spectral.passed
    }
}

/// Joint covariance (no nugget) at `n_sites` uniform sites in `[0, 10]^d`
/// plus the spectral oracle on `omega_grid`.
pub fn soundness<R: Rng + ?Sized>(
    spec: &MaternSpec,
    n_sites: usize,
    omega_grid: &[f64],
    rng: &mut R,
) -> Result<Soundness> {
    let sites = SiteSet::random_uniform(n_sites, spec.d, 0.0, 10.0, rng);
    let cov = joint_covariance(&sites, spec, &SymMatrix::constant(spec.p(), 0.0))?;
    let trace = (0..cov.nrows()).map(|i| cov[(i, i)]).sum();
    let v = psd_of(cov.as_ref(), DEFAULT_TOL)?;
    Ok(Soundness { min_eigenvalue: v.min_eigenvalue, trace, spectral: spectral_oracle(spec, omega_grid, DEFAULT_TOL)? })
}
