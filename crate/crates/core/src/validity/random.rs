//! Random parameter matrices, including models built to satisfy a chosen
//! condition set. Used by tests, benchmarks and the acceptance suite.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{theorem1_exponent, CheckOptions, ConditionSet};
use crate::error::{Error, Result};
use crate::kernels::{MaternSpec, SiteSet};
use crate::matrix::{bernstein_matrix, BernsteinFn, SymMatrix};
use crate::specfun::ln_gamma_unchecked;

/// Random positive definite matrix with variances in `[0.5, 2]` and
/// correlations drawn from a Wishart-like product.
pub fn random_psd<R: Rng + ?Sized>(p: usize, rng: &mut R) -> SymMatrix {
    let k = p + 1;
    let g: Vec<f64> = (0..p * k).map(|_| StandardNormal.sample(rng)).collect();
    let raw = SymMatrix::from_fn(p, |i, j| {
        let dot: f64 = (0..k).map(|m| g[i * k + m] * g[j * k + m]).sum();
        dot / k as f64 + if i == j { 0.05 } else { 0.0 }
    });
    let sd: Vec<f64> = (0..p).map(|i| rng.random_range(0.5f64..2.0).sqrt() / raw.get(i, i).sqrt()).collect();
    SymMatrix::from_fn(p, |i, j| raw.get(i, j) * sd[i] * sd[j])
}

/// A random Bernstein function from the closed families, shifted to be
/// strictly positive.
pub fn random_bernstein<R: Rng + ?Sized>(rng: &mut R) -> BernsteinFn {
    let base = match rng.random_range(0..5) {
        0 => BernsteinFn::Power(rng.random_range(0.2..1.0)),
        1 => BernsteinFn::Log1p,
        2 => BernsteinFn::Ratio,
        3 => BernsteinFn::ExpSaturate(rng.random_range(0.2..3.0)),
        _ => BernsteinFn::Identity,
    };
    base.shifted(rng.random_range(0.2..1.5), rng.random_range(0.1..1.0))
}

/// Strictly positive CND matrix `[(η_i + η_j)/2 + B(‖s_i - s_j‖)]`.
pub fn random_cnd_positive<R: Rng + ?Sized>(p: usize, rng: &mut R) -> SymMatrix {
    let pts = SiteSet::random_uniform(p, 2, 0.0, 2.0, rng);
    let eta: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..0.5)).collect();
    let b = bernstein_matrix(&random_bernstein(rng), &pts).expect("valid Bernstein function");
    SymMatrix::from_fn(p, |i, j| 0.5 * (eta[i] + eta[j]) + b.get(i, j))
}

/// Symmetric matrix with entries uniform on `[lo, hi)`.
pub fn random_symmetric<R: Rng + ?Sized>(p: usize, lo: f64, hi: f64, rng: &mut R) -> SymMatrix {
    fill_symmetric(SymMatrix::constant(p, 0.0), |_, _| rng.random_range(lo..hi))
}

/// CND matrix with entries in `[-2, 2]`: a scaled [`random_cnd_positive`]
/// minus a constant.
pub fn random_cnd_bounded<R: Rng + ?Sized>(p: usize, rng: &mut R) -> SymMatrix {
    let g = random_cnd_positive(p, rng);
    let c = rng.random_range(0.0..2.0);
    g.map(|v| 2.0 * v / g.max_entry() - c)
}

/// Unconstrained random model: each of `α`, `ν` positive, `σ` PD.
pub fn random_spec<R: Rng + ?Sized>(p: usize, d: usize, rng: &mut R) -> MaternSpec {
    let alpha = fill_symmetric(SymMatrix::constant(p, 0.0), |_, _| rng.random_range(0.3..3.0));
    let nu = fill_symmetric(SymMatrix::constant(p, 0.0), |_, _| rng.random_range(0.2..3.0));
    let sigma = random_psd(p, rng);
    MaternSpec::new(d, alpha, nu, sigma).expect("positive entries")
}

fn fill_symmetric(mut m: SymMatrix, mut f: impl FnMut(usize, usize) -> f64) -> SymMatrix {
    let p = m.order();
    for i in 0..p {
        for j in i..p {
            let v = f(i, j);
            m.set(i, j, v);
        }
    }
    m
}

/// `σ = M / W` with `M` random PD: the weighted clause `σ ∘ W` then holds
/// with margin.
fn sigma_for<R: Rng + ?Sized>(weight: &SymMatrix, rng: &mut R) -> SymMatrix {
    random_psd(weight.order(), rng).div(weight).expect("same order")
}

/// Random model satisfying `set`, together with the hyperparameters under
/// which it does. `spectral_oracle` samples come from the `ex1` family.
pub fn random_satisfying<R: Rng + ?Sized>(
    set: ConditionSet,
    p: usize,
    d: usize,
    rng: &mut R,
) -> Result<(MaternSpec, CheckOptions)> {
    if p == 0 || d == 0 {
        return Err(Error::Domain("p and d must be positive".into()));
    }
    let mut opts = CheckOptions::default();
    let half_d = d as f64 / 2.0;
    let lg = ln_gamma_unchecked;
    let spec = match set {
        ConditionSet::Thm1 => {
            let nu1 = rng.random_range(0.2..2.5);
            let alpha = random_cnd_positive(p, rng);
            let e = theorem1_exponent(d, nu1) as f64;
            let sigma = sigma_for(&alpha.map(|a| a.powf(e)), rng);
            MaternSpec::new(d, alpha, SymMatrix::constant(p, nu1), sigma)?
        }
        ConditionSet::Thm2A => {
            let pts = SiteSet::random_uniform(p, 2, 0.0, 2.0, rng);
            let nu = bernstein_matrix(&random_bernstein(rng), &pts)?;
            let alpha = bernstein_matrix(&random_bernstein(rng), &pts)?.powf(-0.5)?;
            let w = SymMatrix::from_fn(p, |i, j| {
                let v = nu.get(i, j);
                (lg(v + half_d) - lg(v) - d as f64 * alpha.get(i, j).ln()).exp()
            });
            MaternSpec::new(d, alpha, nu, sigma_for(&w, rng))?
        }
        ConditionSet::Thm2B | ConditionSet::Thm3A => {
            let nu = random_cnd_positive(p, rng);
            let ratio = random_cnd_positive(p, rng);
            let alpha = nu.div(&ratio)?.powf(0.5)?;
            let w = SymMatrix::from_fn(p, |i, j| {
                let v = nu.get(i, j);
                (-lg(v) - d as f64 * alpha.get(i, j).ln() + (v + half_d) * v.ln() - v).exp()
            });
            if set == ConditionSet::Thm2B {
                opts.psi = Some(ratio);
            }
            MaternSpec::new(d, alpha, nu, sigma_for(&w, rng))?
        }
        ConditionSet::Thm3B => {
            let beta = rng.random_range(0.2..3.0);
            let nu = random_cnd_positive(p, rng);
            let alpha = nu.scale(beta).add(&random_cnd_positive(p, rng))?.powf(0.5)?;
            let w = SymMatrix::from_fn(p, |i, j| {
                let v = nu.get(i, j);
                let a = alpha.get(i, j);
                (-lg(v) + v * (a * a / beta).ln() - v).exp()
            });
            opts.beta = Some(beta);
            MaternSpec::new(d, alpha, nu, sigma_for(&w, rng))?
        }
        ConditionSet::Ex1 | ConditionSet::SpectralOracle => {
            let alpha = random_cnd_positive(p, rng).powf(-0.5)?;
            let sigma = sigma_for(&alpha.map(|a| a.powf(-(d as f64))), rng);
            MaternSpec::new(d, alpha, SymMatrix::constant(p, rng.random_range(0.2..2.5)), sigma)?
        }
        ConditionSet::Ex2 => {
            let nu = random_cnd_positive(p, rng);
            let w = nu.map(|v| (-lg(v) + (v + half_d) * v.ln() - v).exp());
            MaternSpec::new(d, SymMatrix::constant(p, rng.random_range(0.3..3.0)), nu, sigma_for(&w, rng))?
        }
        ConditionSet::Ex3 => {
            let nu1 = rng.random_range(0.2..2.5);
            let alpha = random_cnd_positive(p, rng).powf(0.5)?;
            let sigma = sigma_for(&alpha.map(|a| a.powf(2.0 * nu1)), rng);
            MaternSpec::new(d, alpha, SymMatrix::constant(p, nu1), sigma)?
        }
        ConditionSet::Apanasovich => {
            let diag: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..2.5)).collect();
            let delta = rng.random_range(0.0..2.0);
            let pts = SiteSet::random_uniform(p, 2, 0.0, 2.0, rng);
            let range = rng.random_range(0.3..3.0);
            let a = SymMatrix::from_fn(p, |i, j| (-pts.distance(i, j) / range).exp());
            let nu = SymMatrix::from_fn(p, |i, j| 0.5 * (diag[i] + diag[j]) + delta * (1.0 - a.get(i, j)));
            let alpha = random_cnd_positive(p, rng).powf(0.5)?;
            let w = SymMatrix::from_fn(p, |i, j| {
                let (nii, njj, nij) = (nu.get(i, i), nu.get(j, j), nu.get(i, j));
                (lg(nij + half_d) - lg(nij) - lg(0.5 * (nii + njj) + half_d)
                    + (2.0 * delta + nii + njj) * alpha.get(i, j).ln())
                .exp()
            });
            opts.delta = Some(delta);
            opts.a = Some(a);
            MaternSpec::new(d, alpha, nu, sigma_for(&w, rng))?
        }
        ConditionSet::Gneiting => {
            let diag: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..2.5)).collect();
            let nu = SymMatrix::from_fn(p, |i, j| 0.5 * (diag[i] + diag[j]));
            let w = SymMatrix::from_fn(p, |i, j| {
                let (nii, njj) = (diag[i], diag[j]);
                (0.5 * (lg(nii) + lg(njj)) + lg(0.5 * (nii + njj) + half_d)
                    - 0.5 * (lg(nii + half_d) + lg(njj + half_d))
                    - lg(0.5 * (nii + njj)))
                .exp()
            });
            MaternSpec::new(d, SymMatrix::constant(p, rng.random_range(0.3..3.0)), nu, sigma_for(&w, rng))?
        }
        ConditionSet::Du => {
            let nu = random_cnd_positive(p, rng);
            let w = nu.map(|v| (lg(v + half_d) - lg(v)).exp());
            MaternSpec::new(d, SymMatrix::constant(p, rng.random_range(0.3..3.0)), nu, sigma_for(&w, rng))?
        }
    };
    Ok((spec, opts))
}

/// [`random_satisfying`] without the hyperparameters.
pub fn random_satisfying_spec<R: Rng + ?Sized>(
    set: ConditionSet,
    p: usize,
    d: usize,
    rng: &mut R,
) -> Result<MaternSpec> {
    random_satisfying(set, p, d, rng).map(|(s, _)| s)
}
