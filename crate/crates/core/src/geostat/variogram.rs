use super::SpatialDataset;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Binned direct and cross semivariograms.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalVariogram {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Mean pair distance of each bin; the bin midpoint when the bin is empty.
    pub centers: Vec<f64>,
    pub counts: Vec<usize>,
    /// `γ̂_ij` per bin; all-NaN for empty bins.
    pub gamma: Vec<SymMatrix>,
}

impl EmpiricalVariogram {
    pub fn nbins(&self) -> usize {
        self.counts.len()
    }

    pub fn p(&self) -> usize {
        self.gamma.first().map_or(0, SymMatrix::order)
    }

    /// `(lag, γ̂_ij, count)` for the nonempty bins.
    pub fn series(&self, i: usize, j: usize) -> Vec<(f64, f64, usize)> {
        (0..self.nbins())
            .filter(|&b| self.counts[b] > 0)
            .map(|b| (self.centers[b], self.gamma[b].get(i, j), self.counts[b]))
            .collect()
    }

    /// Multiplies every semivariance by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { gamma: self.gamma.iter().map(|g| g.scale(c)).collect(), ..self.clone() }
    }

    /// CSV rows `lag,lower,upper,count,g_i_j…` over `i <= j`.
    pub fn to_csv_string(&self) -> String {
        let p = self.p();
        let mut header = vec!["lag".to_string(), "lower".into(), "upper".into(), "count".into()];
        for i in 0..p {
            for j in i..p {
                header.push(format!("gamma_{}_{}", i + 1, j + 1));
            }
        }
        let mut out = header.join(",");
        out.push('\n');
        for b in 0..self.nbins() {
            let mut cells = vec![
                format!("{:.8e}", self.centers[b]),
                format!("{:.8e}", self.lower[b]),
                format!("{:.8e}", self.upper[b]),
                self.counts[b].to_string(),
            ];
            cells.extend(self.gamma[b].upper().map(|(_, _, v)| format!("{v:.8e}")));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Classical (method-of-moments) estimator on `nbins` equal-width bins over
/// `(0, max_lag]`. `max_lag` defaults to half the largest pairwise distance.
/// Coincident sites are skipped.
pub fn empirical_variogram(data: &SpatialDataset, nbins: usize, max_lag: Option<f64>) -> Result<EmpiricalVariogram> {
    empirical_variogram_pooled(std::slice::from_ref(data), nbins, max_lag)
}

/// Pools pairs from independent replicates observed on the same sites.
pub fn empirical_variogram_pooled(
    replicates: &[SpatialDataset],
    nbins: usize,
    max_lag: Option<f64>,
) -> Result<EmpiricalVariogram> {
    let first = replicates.first().ok_or_else(|| Error::Domain("no datasets given".into()))?;
    if replicates.iter().any(|r| r.sites != first.sites || r.p() != first.p()) {
        return Err(Error::Dimension("replicates must share sites and variables".into()));
    }
    let (n, p) = (first.n(), first.p());
    if n < 2 {
        return Err(Error::Precondition("a variogram needs at least two sites".into()));
    }
    if nbins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    let max_lag = max_lag.unwrap_or_else(|| 0.5 * first.sites.max_distance());
    if !(max_lag > 0.0 && max_lag.is_finite()) {
        return Err(Error::Domain(format!("max_lag must be positive, got {max_lag}")));
    }
    let width = max_lag / nbins as f64;
    let mut counts = vec![0usize; nbins];
    let mut lag_sum = vec![0.0; nbins];
    let mut sums = vec![vec![0.0; p * p]; nbins];
    let mut diff = vec![0.0; p];
    for s in 0..n {
        for t in (s + 1)..n {
            let h = first.sites.distance(s, t);
            if h == 0.0 || h > max_lag {
                continue;
            }
            let b = ((h / width) as usize).min(nbins - 1);
            for rep in replicates {
                for (k, dk) in diff.iter_mut().enumerate() {
                    *dk = rep.value(s, k) - rep.value(t, k);
                }
                for i in 0..p {
                    for j in i..p {
                        sums[b][i * p + j] += diff[i] * diff[j];
                    }
                }
                counts[b] += 1;
                lag_sum[b] += h;
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Domain(format!("no site pairs within max_lag = {max_lag}")));
    }
    let lower: Vec<f64> = (0..nbins).map(|b| b as f64 * width).collect();
    let upper: Vec<f64> = (0..nbins).map(|b| (b + 1) as f64 * width).collect();
    let centers = (0..nbins)
        .map(|b| if counts[b] > 0 { lag_sum[b] / counts[b] as f64 } else { 0.5 * (lower[b] + upper[b]) })
        .collect();
    let gamma = (0..nbins)
        .map(|b| {
            if counts[b] == 0 {
                return SymMatrix::constant(p, f64::NAN);
            }
            let c = 2.0 * counts[b] as f64;
            SymMatrix::from_fn(p, |i, j| {
                let (i, j) = (i.min(j), i.max(j));
                sums[b][i * p + j] / c
            })
        })
        .collect();
    Ok(EmpiricalVariogram { lower, upper, centers, counts, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SiteSet;

    fn dataset(coords: Vec<f64>, values: Vec<f64>, p: usize) -> SpatialDataset {
        let names = (0..p).map(|k| format!("v{k}")).collect();
        SpatialDataset::new(SiteSet::new(2, coords).unwrap(), values, names).unwrap()
    }

    #[test]
    fn single_pair() {
        let ds = dataset(vec![0.0, 0.0, 3.0, 4.0], vec![1.0, 4.0], 1);
        let ev = empirical_variogram(&ds, 1, Some(5.0)).unwrap();
        assert_eq!(ev.counts, [1]);
        assert_eq!(ev.gamma[0].get(0, 0), 4.5);
        assert_eq!(ev.centers[0], 5.0);
    }

    #[test]
    fn cross_entries_and_empty_bins() {
        let ds = dataset(vec![0.0, 0.0, 1.0, 0.0, 0.0, 4.0], vec![1.0, 2.0, 3.0, -1.0, 0.0, 0.5], 2);
        let ev = empirical_variogram(&ds, 4, Some(4.2)).unwrap();
        assert_eq!(ev.counts, [1, 0, 0, 2]);
        assert!(ev.gamma[1].get(0, 1).is_nan());
        // bin 0 holds sites 0-1: diffs (-2, 3)
        assert_eq!(ev.gamma[0].get(0, 1), -3.0);
        assert_eq!(ev.gamma[0].get(1, 0), -3.0);
        assert_eq!(ev.gamma[0].get(1, 1), 4.5);
        assert_eq!(ev.series(0, 0).len(), 2);
        assert!(empirical_variogram(&ds, 3, Some(0.5)).is_err());
        assert!(empirical_variogram(&ds, 0, None).is_err());
    }

    #[test]
    fn pooled_doubles_counts() {
        let a = dataset(vec![0.0, 0.0, 1.0, 0.0], vec![1.0, 2.0], 1);
        let b = dataset(vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 4.0], 1);
        let ev = empirical_variogram_pooled(&[a, b], 1, Some(2.0)).unwrap();
        assert_eq!(ev.counts, [2]);
        assert_eq!(ev.gamma[0].get(0, 0), (1.0 + 16.0) / 4.0);
    }
}
