use std::sync::Mutex;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::{cholesky_in_place, cholesky_in_place_scratch};
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, MatMut, MatRef, Par, Spec};

use super::SpatialDataset;
use crate::error::{Error, Result};
use crate::kernels::{matern_corr_unchecked, MaternSpec};
use crate::matrix::{is_psd, SymMatrix, DEFAULT_TOL};

/// Lower Cholesky factor; failure means the matrix is not positive definite.
pub fn cholesky(m: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let mut l = factor_in_place(m.to_owned())?;
    for j in 1..l.ncols() {
        for i in 0..j {
            l[(i, j)] = 0.0;
        }
    }
    Ok(l)
}

/// Overwrites the lower triangle with the Cholesky factor; the strict upper
/// triangle is left as is.
fn factor_in_place(mut m: Mat<f64>) -> Result<Mat<f64>> {
    factor_lower(m.as_mut())?;
    Ok(m)
}

fn factor_lower(m: MatMut<'_, f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let mut buf = MemBuffer::new(cholesky_in_place_scratch::<f64>(m.nrows(), Par::Seq, Spec::default()));
    cholesky_in_place(m, Default::default(), Par::Seq, MemStack::new(&mut buf), Spec::default())
        .map_err(|e| Error::NotPositiveDefinite(format!("Cholesky factorization failed: {e:?}")))?;
    Ok(())
}

/// Correlations of every site pair for one `(α, ν)`, pair-major.
#[derive(Debug, Clone)]
struct CorrCache {
    alpha: SymMatrix,
    nu: SymMatrix,
    values: Vec<f64>,
}

/// Data and pairwise distances cached for repeated likelihood evaluation.
/// The correlations of the most recent `(α, ν)` are kept as well, so chains
/// with fixed ranges only rebuild the scaling.
#[derive(Debug)]
pub struct LikelihoodContext {
    n: usize,
    p: usize,
    d: usize,
    /// Upper-triangle distances, row-major over `s < t`.
    dist: Vec<f64>,
    /// Site-major stacked observations.
    z: Vec<f64>,
    cache: Mutex<Option<CorrCache>>,
    /// Reused covariance / factor storage for [`LikelihoodContext::loglik`].
    work: Mutex<Mat<f64>>,
}

impl Clone for LikelihoodContext {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            p: self.p,
            d: self.d,
            dist: self.dist.clone(),
            z: self.z.clone(),
            cache: Mutex::new(self.cache.lock().map(|c| c.clone()).unwrap_or(None)),
            work: Mutex::new(Mat::new()),
        }
    }
}

impl LikelihoodContext {
    pub fn new(data: &SpatialDataset) -> Self {
        let n = data.n();
        let mut dist = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for s in 0..n {
            for t in (s + 1)..n {
                dist.push(data.sites.distance(s, t));
            }
        }
        Self {
            n,
            p: data.p(),
            d: data.sites.dim(),
            dist,
            z: data.values.clone(),
            cache: Mutex::new(None),
            work: Mutex::new(Mat::new()),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, spec: &MaternSpec, nugget: &SymMatrix) -> Result<()> {
        if spec.p() != self.p || nugget.order() != self.p {
            return Err(Error::Dimension(format!("data have p = {}, model p = {}", self.p, spec.p())));
        }
        if spec.d != self.d {
            return Err(Error::Dimension(format!("sites live in R^{}, model in R^{}", self.d, spec.d)));
        }
        Ok(())
    }

    /// Joint covariance in the site-major ordering of the data.
    pub fn covariance(&self, spec: &MaternSpec, nugget: &SymMatrix) -> Result<Mat<f64>> {
        let mut out = Mat::zeros(self.n * self.p, self.n * self.p);
        self.fill_covariance(spec, nugget, out.as_mut(), true)?;
        Ok(out)
    }

    /// Writes the lower triangle of the covariance, and the upper one too when
    /// `full`.
    fn fill_covariance(
        &self,
        spec: &MaternSpec,
        nugget: &SymMatrix,
        mut out: MatMut<'_, f64>,
        full: bool,
    ) -> Result<()> {
        self.check(spec, nugget)?;
        let (n, p) = (self.n, self.p);
        let same = spec.sigma.add(nugget)?;
        let pairs: Vec<(usize, usize)> = spec.alpha.upper().map(|(i, j, _)| (i, j)).collect();
        let sig: Vec<f64> = pairs.iter().map(|&(i, j)| spec.sigma.get(i, j)).collect();
        for s in 0..n {
            for i in 0..p {
                for j in 0..p {
                    out[(s * p + i, s * p + j)] = same.get(i, j);
                }
            }
        }
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        let fresh = !matches!(&*guard, Some(c) if c.alpha == spec.alpha && c.nu == spec.nu);
        if fresh {
            let pars: Vec<(f64, f64)> = pairs.iter().map(|&(i, j)| (spec.alpha.get(i, j), spec.nu.get(i, j))).collect();
            let mut values = Vec::with_capacity(self.dist.len() * pars.len());
            for &h in &self.dist {
                values.extend(pars.iter().map(|&(a, nu)| matern_corr_unchecked(h, a, nu)));
            }
            *guard = Some(CorrCache { alpha: spec.alpha.clone(), nu: spec.nu.clone(), values });
        }
        let corr = &guard.as_ref().expect("cache filled above").values;
        let m = pairs.len();
        let mut k = 0;
        for s in 0..n {
            for t in (s + 1)..n {
                let row = &corr[k * m..(k + 1) * m];
                k += 1;
                for (q, &(i, j)) in pairs.iter().enumerate() {
                    let v = sig[q] * row[q];
                    out[(t * p + j, s * p + i)] = v;
                    if i != j {
                        out[(t * p + i, s * p + j)] = v;
                    }
                    if full {
                        out[(s * p + i, t * p + j)] = v;
                        if i != j {
                            out[(s * p + j, t * p + i)] = v;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Gaussian log-likelihood of the stacked observations.
    pub fn loglik(&self, spec: &MaternSpec, nugget: &SymMatrix) -> Result<f64> {
        let m = self.n * self.p;
        let mut fresh;
        let mut guard = self.work.try_lock().ok();
        let work = match guard.as_deref_mut() {
            Some(w) => w,
            None => {
                fresh = Mat::new();
                &mut fresh
            }
        };
        if work.nrows() != m {
            *work = Mat::zeros(m, m);
        }
        self.fill_covariance(spec, nugget, work.as_mut(), false)?;
        factor_lower(work.as_mut())?;
        Ok(loglik_from_factor(work.as_ref(), &self.z))
    }
}

/// `-(m/2) ln 2π - (1/2) ln det Σ - (1/2) zᵀ Σ⁻¹ z` via Cholesky.
pub fn loglik_from_covariance(cov: MatRef<'_, f64>, z: &[f64]) -> Result<f64> {
    let m = z.len();
    if cov.nrows() != m || cov.ncols() != m {
        return Err(Error::Dimension(format!("covariance is {}x{}, data have {m} entries", cov.nrows(), cov.ncols())));
    }
    Ok(loglik_from_factor(factor_in_place(cov.to_owned())?.as_ref(), z))
}

/// Only the lower triangle of `l` is read.
fn loglik_from_factor(l: MatRef<'_, f64>, z: &[f64]) -> f64 {
    let m = z.len();
    let mut y = Mat::from_fn(m, 1, |i, _| z[i]);
    solve_lower_triangular_in_place(l, y.as_mut(), Par::Seq);
    let log_det: f64 = (0..m).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    let quad: f64 = (0..m).map(|i| y[(i, 0)] * y[(i, 0)]).sum();
    -0.5 * (m as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

/// Gaussian log-likelihood of `data` under the Matérn model plus nugget.
/// Errors with [`Error::NotPositiveDefinite`] when Cholesky fails.
pub fn gaussian_loglik(data: &SpatialDataset, spec: &MaternSpec, nugget: &SymMatrix) -> Result<f64> {
    let v = is_psd(nugget, DEFAULT_TOL)?;
    if !v.is_psd {
        return Err(Error::Precondition(format!("nugget is not PSD (min eigenvalue {:e})", v.min_eigenvalue)));
    }
    LikelihoodContext::new(data).loglik(spec, nugget)
}
