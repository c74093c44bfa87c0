//! Estimation pipeline: data, empirical variograms, weighted least squares,
//! Gaussian likelihood, simulation and constrained Bayesian fitting.

mod dataset;
mod dic;
mod likelihood;
mod mcmc;
mod model;
mod simulate;
mod variogram;
mod wls;

pub use dataset::{normal_quantile, normal_scores, SpatialDataset};
pub use dic::{dic, DicResult};
pub use likelihood::{cholesky, gaussian_loglik, loglik_from_covariance, LikelihoodContext};
pub use mcmc::{adaptive_metropolis, Evaluation, McmcChain, McmcConfig};
pub use model::{AlphaMode, FitModel, ParamRecord};
pub use simulate::{simulate_field, simulate_replicates};
pub use variogram::{empirical_variogram, empirical_variogram_pooled, EmpiricalVariogram};
pub use wls::{wls_fit_exponential, WlsFit};
