use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::SiteSet;

/// Multivariate observations at a set of sites. `values` is row-major `n×p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDataset {
    pub sites: SiteSet,
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

const COORD_NAMES: [&str; 3] = ["x", "y", "z"];

impl SpatialDataset {
    pub fn new(sites: SiteSet, values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let (n, p) = (sites.len(), names.len());
        if p == 0 {
            return Err(Error::Dimension("dataset needs at least one variable".into()));
        }
        if values.len() != n * p {
            return Err(Error::Dimension(format!("expected {n}x{p} values, got {}", values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at site {}, variable {}", k / p, k % p)));
        }
        Ok(Self { sites, values, names })
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn value(&self, site: usize, var: usize) -> f64 {
        self.values[site * self.p() + var]
    }

    pub fn column(&self, var: usize) -> Vec<f64> {
        (0..self.n()).map(|s| self.value(s, var)).collect()
    }

    /// Same values with every column replaced by its normal scores.
    pub fn normal_scores(&self) -> Result<Self> {
        let values = normal_scores(&self.values, self.n(), self.p())?;
        Ok(Self { values, ..self.clone() })
    }

    /// Reads `x,y[,z],<names…>` with a header row; `#` lines are comments.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader =
            csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers().map_err(|e| csv_error(&e))?.iter().map(str::to_string).collect();
        let d = header.iter().zip(COORD_NAMES).take_while(|(h, c)| h.eq_ignore_ascii_case(c)).count();
        if d == 0 {
            return Err(Error::Parse { line: 1, msg: "header must start with coordinate columns x[,y[,z]]".into() });
        }
        let names = header[d..].to_vec();
        if names.is_empty() {
            return Err(Error::Parse { line: 1, msg: "no variable columns after the coordinates".into() });
        }
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            for (k, field) in record.iter().enumerate() {
                let v: f64 =
                    field.parse().map_err(|e| Error::Parse { line, msg: format!("bad number {field:?}: {e}") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, msg: format!("non-finite value {field:?}") });
                }
                if k < d {
                    coords.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        if coords.is_empty() {
            return Err(Error::Parse { line: 1, msg: "no data rows".into() });
        }
        Self::new(SiteSet::new(d, coords)?, values, names)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// CSV with a header row; every number printed as `{:.8e}`.
    pub fn to_csv_string(&self) -> String {
        let d = self.sites.dim();
        let mut out = COORD_NAMES[..d.min(3)].join(",");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for s in 0..self.n() {
            let coords = self.sites.site(s).iter();
            let vals = self.values[s * self.p()..(s + 1) * self.p()].iter();
            let cells: Vec<String> = coords.chain(vals).map(|v| format!("{v:.8e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_error(e: &csv::Error) -> Error {
    Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() }
}

/// Standard normal quantile: Acklam's rational approximation followed by
/// one Halley step on `erfc`.
pub fn normal_quantile(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {prob}")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] =
        [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let low = 0.02425;
    let x = if prob < low {
        tail((-2.0 * prob.ln()).sqrt())
    } else if prob > 1.0 - low {
        -tail((-2.0 * (1.0 - prob).ln()).sqrt())
    } else {
        let q = prob - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - prob;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Column-wise normal-scores transform of a row-major `n×p` array: average
/// ranks mapped through `Φ⁻¹((rank - 0.5)/n)`, then standardized to sample
/// mean 0 and variance 1 (divisor `n - 1`).
pub fn normal_scores(values: &[f64], n: usize, p: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Precondition("normal scores need at least two sites".into()));
    }
    if values.len() != n * p {
        return Err(Error::Dimension(format!("expected {} values, got {}", n * p, values.len())));
    }
    let mut out = vec![0.0; n * p];
    for var in 0..p {
        let col: Vec<f64> = (0..n).map(|s| values[s * p + var]).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        if col[order[0]] == col[order[n - 1]] {
            return Err(Error::Domain(format!("column {var} is constant")));
        }
        let mut ranks = vec![0.0; n];
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && col[order[end]] == col[order[start]] {
                end += 1;
            }
            // 1-based average rank of the tie group
            let avg = 0.5 * ((start + 1) + end) as f64;
            for &k in &order[start..end] {
                ranks[k] = avg;
            }
            start = end;
        }
        let scores = ranks.iter().map(|r| normal_quantile((r - 0.5) / n as f64)).collect::<Result<Vec<_>>>()?;
        let mean = scores.iter().sum::<f64>() / n as f64;
        let var_s = scores.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var_s.sqrt();
        for (s, v) in scores.iter().enumerate() {
            out[s * p + var] = (v - mean) / sd;
        }
    }
    Ok(out)
}
