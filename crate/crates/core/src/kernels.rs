//! Matérn and Gaussian covariance kernels, univariate and multivariate.

use std::f64::consts::PI;

use faer::Mat;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{is_psd, SymMatrix, DEFAULT_TOL};
use crate::specfun::{ln_bessel_k_unchecked, ln_gamma_unchecked};

/// Beyond this value of `alpha * h` the Matérn correlation is returned as 0.
pub const MATERN_CUTOFF: f64 = 600.0;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Matérn correlation `2^{1-ν}/Γ(ν) (αh)^ν K_ν(αh)`.
pub fn matern_corr(h_norm: f64, alpha: f64, nu: f64) -> Result<f64> {
    if !(h_norm >= 0.0) {
        return Err(Error::Domain(format!("lag norm must be nonnegative, got {h_norm}")));
    }
    positive("alpha", alpha)?;
    positive("nu", nu)?;
    Ok(matern_corr_unchecked(h_norm, alpha, nu))
}

#[inline]
pub(crate) fn matern_corr_unchecked(h_norm: f64, alpha: f64, nu: f64) -> f64 {
    let x = alpha * h_norm;
    if x == 0.0 {
        return 1.0;
    }
    if x > MATERN_CUTOFF {
        return 0.0;
    }
    // exact half-integer forms
    if nu == 0.5 {
        return (-x).exp();
    }
    if nu == 1.5 {
        return (-x).exp() * (1.0 + x);
    }
    if nu == 2.5 {
        return (-x).exp() * (1.0 + x + x * x / 3.0);
    }
    let ln = (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma_unchecked(nu) + nu * x.ln() + ln_bessel_k_unchecked(nu, x);
    ln.exp().min(1.0)
}

/// Isotropic Matérn spectral density in `R^d`:
/// `Γ(ν+d/2) / (Γ(ν) α^d π^{d/2}) (1 + ω²/α²)^{-ν-d/2}`.
pub fn matern_spectral_density(omega_norm: f64, alpha: f64, nu: f64, d: usize) -> Result<f64> {
    if !(omega_norm >= 0.0) {
        return Err(Error::Domain(format!("frequency must be nonnegative, got {omega_norm}")));
    }
    positive("alpha", alpha)?;
    positive("nu", nu)?;
    if d == 0 {
        return Err(Error::Domain("spatial dimension must be at least 1".into()));
    }
    Ok(ln_matern_spectral_density(omega_norm, alpha, nu, d).exp())
}

pub(crate) fn ln_matern_spectral_density(omega: f64, alpha: f64, nu: f64, d: usize) -> f64 {
    let half_d = d as f64 / 2.0;
    ln_gamma_unchecked(nu + half_d)
        - ln_gamma_unchecked(nu)
        - d as f64 * alpha.ln()
        - half_d * PI.ln()
        - (nu + half_d) * (omega * omega / (alpha * alpha)).ln_1p()
}

/// `exp(-u h²)`
pub fn gaussian_corr(h_norm: f64, u: f64) -> Result<f64> {
    positive("u", u)?;
    if !(h_norm >= 0.0) {
        return Err(Error::Domain(format!("lag norm must be nonnegative, got {h_norm}")));
    }
    Ok((-u * h_norm * h_norm).exp())
}

/// Inverse-gamma mixing density of the Gaussian scale-mixture form of the
/// Matérn correlation: `(α/2)^{2ν} u^{-ν-1} exp(-α²/(4u)) / Γ(ν)`.
pub fn inv_gamma_mixture_density(u: f64, alpha: f64, nu: f64) -> Result<f64> {
    positive("u", u)?;
    positive("alpha", alpha)?;
    positive("nu", nu)?;
    let ln = 2.0 * nu * (alpha / 2.0).ln() - (nu + 1.0) * u.ln() - alpha * alpha / (4.0 * u) - ln_gamma_unchecked(nu);
    Ok(ln.exp())
}

/// Parameters of the `p`-variate Matérn model `K_ij(h) = σ_ij k(h; α_ij, ν_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaternSpec {
    pub d: usize,
    pub alpha: SymMatrix,
    pub nu: SymMatrix,
    pub sigma: SymMatrix,
}

impl MaternSpec {
    pub fn new(d: usize, alpha: SymMatrix, nu: SymMatrix, sigma: SymMatrix) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("spatial dimension must be at least 1".into()));
        }
        let p = alpha.order();
        if nu.order() != p || sigma.order() != p {
            return Err(Error::Dimension(format!(
                "alpha is {p}x{p} but nu is {0}x{0} and sigma is {1}x{1}",
                nu.order(),
                sigma.order()
            )));
        }
        alpha.require_positive("alpha")?;
        nu.require_positive("nu")?;
        if sigma.has_nan() {
            return Err(Error::Domain("sigma contains NaN".into()));
        }
        Ok(Self { d, alpha, nu, sigma })
    }

    pub fn p(&self) -> usize {
        self.alpha.order()
    }

    pub fn with_sigma(&self, sigma: SymMatrix) -> Self {
        Self { sigma, ..self.clone() }
    }

    /// `[σ_ij k(r; α_ij, ν_ij)]` at lag norm `r`.
    pub fn cov_at(&self, r: f64) -> SymMatrix {
        SymMatrix::from_fn(self.p(), |i, j| {
            self.sigma.get(i, j) * matern_corr_unchecked(r, self.alpha.get(i, j), self.nu.get(i, j))
        })
    }

    /// Spectral density matrix `[σ_ij k̃(ω; α_ij, ν_ij)]`.
    pub fn spectral_at(&self, omega: f64) -> SymMatrix {
        SymMatrix::from_fn(self.p(), |i, j| {
            self.sigma.get(i, j)
                * ln_matern_spectral_density(omega, self.alpha.get(i, j), self.nu.get(i, j), self.d).exp()
        })
    }
}

/// `p`-variate Gaussian model `G_ij(h) = σ_ij exp(-β_ij ‖h‖²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub d: usize,
    pub beta: SymMatrix,
    pub sigma: SymMatrix,
}

impl GaussianSpec {
    pub fn new(d: usize, beta: SymMatrix, sigma: SymMatrix) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("spatial dimension must be at least 1".into()));
        }
        if beta.order() != sigma.order() {
            return Err(Error::Dimension("beta and sigma orders differ".into()));
        }
        beta.require_positive("beta")?;
        Ok(Self { d, beta, sigma })
    }
}

fn lag_norm(h: &[f64], d: usize) -> Result<f64> {
    if h.len() != d {
        return Err(Error::Dimension(format!("lag has {} components, model dimension is {d}", h.len())));
    }
    Ok(h.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Matrix-valued Matérn covariance at lag vector `h`.
pub fn multivariate_matern(h: &[f64], spec: &MaternSpec) -> Result<SymMatrix> {
    Ok(spec.cov_at(lag_norm(h, spec.d)?))
}

/// Matrix-valued Gaussian covariance at lag vector `h`.
pub fn multivariate_gaussian(h: &[f64], spec: &GaussianSpec) -> Result<SymMatrix> {
    let r = lag_norm(h, spec.d)?;
    Ok(SymMatrix::from_fn(spec.beta.order(), |i, j| spec.sigma.get(i, j) * (-spec.beta.get(i, j) * r * r).exp()))
}

/// Points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    d: usize,
    coords: Vec<f64>,
}

impl SiteSet {
    /// `coords` holds `n * d` values, one site after the other.
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("site dimension must be at least 1".into()));
        }
        if coords.is_empty() || coords.len() % d != 0 {
            return Err(Error::Dimension(format!(
                "{} coordinates do not form a nonempty set of {d}-dimensional sites",
                coords.len()
            )));
        }
        if coords.iter().any(|c| c.is_nan()) {
            return Err(Error::Domain("site coordinates contain NaN".into()));
        }
        Ok(Self { d, coords })
    }

    /// Uniform random sites in the cube `[lo, hi]^d`.
    pub fn random_uniform<R: Rng + ?Sized>(n: usize, d: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let coords = (0..n * d).map(|_| rng.random_range(lo..hi)).collect();
        Self { d, coords }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn site(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.site(i).iter().zip(self.site(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Sites reordered by `perm` (new site `k` is old site `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let coords = perm.iter().flat_map(|&k| self.site(k).iter().copied()).collect();
        Self { d: self.d, coords }
    }

    /// Dense `n x n` distance matrix.
    pub fn distance_matrix(&self) -> Mat<f64> {
        let n = self.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let r = self.distance(i, j);
                m[(i, j)] = r;
                m[(j, i)] = r;
            }
        }
        m
    }

    pub fn max_distance(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }
}

/// Joint covariance of all variables at all sites, site-major: row
/// `s * p + i` is variable `i` at site `s`. The nugget `V` is added on
/// every same-site block and must be positive semidefinite.
pub fn joint_covariance(sites: &SiteSet, spec: &MaternSpec, nugget: &SymMatrix) -> Result<Mat<f64>> {
    let p = spec.p();
    if nugget.order() != p {
        return Err(Error::Dimension(format!("nugget is {0}x{0}, model has p = {p}", nugget.order())));
    }
    if sites.dim() != spec.d {
        return Err(Error::Dimension(format!(
            "sites live in R^{} but the model is defined in R^{}",
            sites.dim(),
            spec.d
        )));
    }
    let verdict = is_psd(nugget, DEFAULT_TOL)?;
    if !verdict.is_psd {
        return Err(Error::Precondition(format!(
            "nugget is not positive semidefinite (min eigenvalue {:e})",
            verdict.min_eigenvalue
        )));
    }
    Ok(joint_covariance_unchecked(sites, spec, nugget))
}

pub(crate) fn joint_covariance_unchecked(sites: &SiteSet, spec: &MaternSpec, nugget: &SymMatrix) -> Mat<f64> {
    let p = spec.p();
    let n = sites.len();
    let mut out = Mat::zeros(n * p, n * p);
    for s in 0..n {
        for t in s..n {
            let block = if s == t {
                spec.sigma.add(nugget).expect("orders checked")
            } else {
                spec.cov_at(sites.distance(s, t))
            };
            for i in 0..p {
                for j in 0..p {
                    let v = block.get(i, j);
                    out[(s * p + i, t * p + j)] = v;
                    out[(t * p + j, s * p + i)] = v;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{is_cnd, psd_of, BernsteinFn};
    use crate::quadrature::{integrate, integrate_to_infinity};
    use crate::specfun::gamma_unchecked;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_integer_closed_forms_against_general_path() {
        for &h in &[0.01, 0.3, 1.0, 2.5, 7.0] {
            for &alpha in &[0.4, 1.3] {
                let x = alpha * h;
                // nudge off the fast path to exercise the Bessel route
                let general = matern_corr(h, alpha, 0.5 + 1e-13).unwrap();
                assert_relative_eq!(general, (-x).exp(), max_relative = 1e-9);
                let general = matern_corr(h, alpha, 1.5 + 1e-13).unwrap();
                assert_relative_eq!(general, (-x).exp() * (1.0 + x), max_relative = 1e-9);
                assert_relative_eq!(matern_corr(h, alpha, 0.5).unwrap(), (-x).exp(), max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn correlation_is_one_at_zero_lag() {
        for &nu in &[0.1, 0.5, 3.7, 40.0] {
            assert_eq!(matern_corr(0.0, 2.0, nu).unwrap(), 1.0);
        }
        assert!(matern_corr(1.0, 0.0, 1.0).is_err());
        assert!(matern_corr(1.0, 1.0, -1.0).is_err());
        assert!(matern_corr(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn correlation_monotone_in_lag_and_smoothness() {
        for &nu in &[0.3, 0.5, 1.1, 2.5, 6.0] {
            let mut prev = 1.0;
            for i in 1..200 {
                let v = matern_corr(0.05 * i as f64, 1.0, nu).unwrap();
                assert!(v < prev, "nu={nu} i={i}");
                prev = v;
            }
        }
        for &h in &[0.2, 1.0, 3.0] {
            let mut prev = 0.0;
            for i in 1..40 {
                let v = matern_corr(h, 1.0, 0.25 * i as f64).unwrap();
                assert!(v > prev, "h={h} i={i}");
                prev = v;
            }
        }
    }

    #[test]
    fn spectral_density_closed_forms() {
        for &(w, a) in &[(0.0, 1.0), (0.7, 2.0), (3.0, 0.5)] {
            let v = matern_spectral_density(w, a, 0.5, 1).unwrap();
            assert_relative_eq!(v, a / (PI * (a * a + w * w)), max_relative = 1e-13);
        }
        let v = matern_spectral_density(0.0, 1.7, 2.2, 3).unwrap();
        let expected = gamma_unchecked(2.2 + 1.5) / (gamma_unchecked(2.2) * 1.7f64.powi(3) * PI.powf(1.5));
        assert_relative_eq!(v, expected, max_relative = 1e-12);
    }

    #[test]
    fn spectral_density_matches_hankel_transform_in_2d() {
        // In R^2, S(ω) = (1/2π) ∫_0^∞ k(r) J_0(ωr) r dr; J_0 from its integral form.
        let (omega, alpha, nu) = (1.0, 2.0, 1.5);
        let j0 = |z: f64| integrate(|t: f64| (z * t.sin()).cos(), 0.0, PI, 1e-13, 1e-15).unwrap() / PI;
        let integrand = |r: f64| matern_corr_unchecked(r, alpha, nu) * j0(omega * r) * r;
        let mut total = 0.0;
        let mut lo = 0.0;
        while lo < 30.0 {
            total += integrate(integrand, lo, lo + 1.0, 1e-11, 1e-14).unwrap();
            lo += 1.0;
        }
        let hankel = total / (2.0 * PI);
        let direct = matern_spectral_density(omega, alpha, nu, 2).unwrap();
        assert_relative_eq!(hankel, direct, max_relative = 1e-7);
    }

    #[test]
    fn gaussian_corr_examples() {
        assert_eq!(gaussian_corr(0.0, 3.0).unwrap(), 1.0);
        assert_relative_eq!(gaussian_corr(1.0, 2f64.ln()).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(gaussian_corr(2.0, 0.25).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert!(gaussian_corr(1.0, 0.0).is_err());
    }

    #[test]
    fn mixture_density_normalized_with_expected_mode() {
        let (alpha, nu) = (1.3, 0.7);
        // u = 1/t turns the algebraic tail into an exponential one
        let g = |t: f64| {
            let t = t.max(1e-300);
            inv_gamma_mixture_density(1.0 / t, alpha, nu).unwrap() / (t * t)
        };
        let total = integrate_to_infinity(g, 0.0, 1e-11).unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
        let mode = alpha * alpha / (4.0 * (nu + 1.0));
        let f = |u: f64| inv_gamma_mixture_density(u, alpha, nu).unwrap();
        assert!(f(mode) > f(mode * 1.001) && f(mode) > f(mode * 0.999));
        assert!(f(1e-4) < 1e-100);
    }

    #[test]
    fn multivariate_examples() {
        let beta: f64 = 1.0;
        let (a, rho) = (0.0, 0.3);
        let spec = MaternSpec::new(
            2,
            SymMatrix::new(&[
                vec![(0.5 * beta).sqrt(), (1.5 * beta + a).sqrt()],
                vec![(1.5 * beta + a).sqrt(), (0.5 * beta).sqrt()],
            ])
            .unwrap(),
            SymMatrix::equicorrelation(2, 0.5, 1.5),
            SymMatrix::equicorrelation(2, 1.0, rho),
        )
        .unwrap();
        let k = multivariate_matern(&[0.6, 0.8], &spec).unwrap();
        let x11 = 0.5f64.sqrt();
        let x12 = 1.5f64.sqrt();
        assert_relative_eq!(k.get(0, 0), (-x11).exp(), max_relative = 1e-14);
        assert_relative_eq!(k.get(0, 1), rho * (-x12).exp() * (1.0 + x12), max_relative = 1e-14);
        assert_eq!(multivariate_matern(&[0.0, 0.0], &spec).unwrap(), spec.sigma);
        assert!(multivariate_matern(&[1.0], &spec).is_err());

        let g = GaussianSpec::new(3, SymMatrix::constant(1, 1.0), SymMatrix::constant(1, 2.0)).unwrap();
        assert_relative_eq!(multivariate_gaussian(&[1.0, 0.0, 0.0], &g).unwrap().get(0, 0), 2.0 / 1f64.exp());
        assert_eq!(multivariate_gaussian(&[0.0; 3], &g).unwrap(), g.sigma);
    }

    #[test]
    fn rescaled_matern_approaches_gaussian() {
        let beta = 0.8;
        let nu = 500.0;
        let alpha = 2.0 * (beta * nu as f64).sqrt();
        let m = MaternSpec::new(1, SymMatrix::constant(2, alpha), SymMatrix::constant(2, nu), SymMatrix::identity(2))
            .unwrap();
        let g = GaussianSpec::new(1, SymMatrix::constant(2, beta), SymMatrix::identity(2)).unwrap();
        for i in 0..=30 {
            let h = [0.1 * i as f64];
            let a = multivariate_matern(&h, &m).unwrap();
            let b = multivariate_gaussian(&h, &g).unwrap();
            assert!((a.get(0, 0) - b.get(0, 0)).abs() <= 1e-2);
        }
    }

    #[test]
    fn joint_covariance_small_cases() {
        let spec =
            MaternSpec::new(1, SymMatrix::constant(1, 0.7), SymMatrix::constant(1, 0.5), SymMatrix::constant(1, 2.0))
                .unwrap();
        let v = SymMatrix::constant(1, 0.3);
        let sites = SiteSet::new(1, vec![0.0, 1.5]).unwrap();
        let c = joint_covariance(&sites, &spec, &v).unwrap();
        let off = 2.0 * (-0.7f64 * 1.5).exp();
        assert_relative_eq!(c[(0, 0)], 2.3);
        assert_relative_eq!(c[(1, 1)], 2.3);
        assert_relative_eq!(c[(0, 1)], off);
        assert_relative_eq!(c[(1, 0)], off);
        let one = SiteSet::new(1, vec![4.0]).unwrap();
        assert_relative_eq!(joint_covariance(&one, &spec, &v).unwrap()[(0, 0)], 2.3);
        let bad = SymMatrix::constant(1, -0.1);
        assert!(matches!(joint_covariance(&sites, &spec, &bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn joint_covariance_psd_for_example_one_parameters() {
        // α^{-2} CND by construction, σ = M ∘ α^{d} with M PSD so that σ α^{-d} = M.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = 3;
        let d = 2;
        let pts = SiteSet::random_uniform(p, 2, 0.0, 2.0, &mut rng);
        let inv_alpha_sq = crate::matrix::bernstein_matrix(&BernsteinFn::Power(0.5).shifted(0.5, 1.0), &pts).unwrap();
        assert!(is_cnd(&inv_alpha_sq, DEFAULT_TOL).unwrap().is_psd);
        let alpha = inv_alpha_sq.map(|v| v.powf(-0.5));
        let m = SymMatrix::new(&[vec![1.0, 0.6, 0.3], vec![0.6, 1.0, 0.5], vec![0.3, 0.5, 1.0]]).unwrap();
        let sigma = m.mul(&alpha.map(|a| a.powi(d as i32))).unwrap();
        let spec = MaternSpec::new(d, alpha, SymMatrix::constant(p, 0.8), sigma).unwrap();
        let sites = SiteSet::random_uniform(40, d, 0.0, 10.0, &mut rng);
        let cov = joint_covariance(&sites, &spec, &SymMatrix::constant(p, 0.0)).unwrap();
        let trace: f64 = (0..cov.nrows()).map(|i| cov[(i, i)]).sum();
        let v = psd_of(cov.as_ref(), 0.0).unwrap();
        assert!(v.min_eigenvalue >= -1e-8 * trace, "min eig {}", v.min_eigenvalue);
    }
}
