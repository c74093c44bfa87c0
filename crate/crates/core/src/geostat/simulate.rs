use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::likelihood::cholesky;
use super::SpatialDataset;
use crate::error::Result;
use crate::kernels::{joint_covariance, MaternSpec, SiteSet};
use crate::matrix::SymMatrix;

/// One zero-mean Gaussian draw `z = L ε` at `sites`, deterministic in `seed`.
pub fn simulate_field(sites: &SiteSet, spec: &MaternSpec, nugget: &SymMatrix, seed: u64) -> Result<SpatialDataset> {
    Ok(simulate_replicates(sites, spec, nugget, 1, seed)?.remove(0))
}

/// `count` independent draws sharing one Cholesky factorization. Draw `k`
/// uses the `k`-th block of the seeded normal stream.
pub fn simulate_replicates(
    sites: &SiteSet,
    spec: &MaternSpec,
    nugget: &SymMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<SpatialDataset>> {
    let cov = joint_covariance(sites, spec, nugget)?;
    let l = cholesky(cov.as_ref())?;
    let m = cov.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = Mat::from_fn(m, count, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
    let mut z = Mat::zeros(m, count);
    matmul(z.as_mut(), Accum::Replace, l.as_ref(), eps.as_ref(), 1.0, Par::Seq);
    let names: Vec<String> = (1..=spec.p()).map(|k| format!("Z{k}")).collect();
    (0..count).map(|c| SpatialDataset::new(sites.clone(), (0..m).map(|i| z[(i, c)]).collect(), names.clone())).collect()
}
