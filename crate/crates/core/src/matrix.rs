//! Symmetric matrices, positive / conditionally negative semidefiniteness
//! and Bernstein matrices.
//!
//! All matrix algebra used by the validity conditions is element-wise
//! (Hadamard): products, quotients, powers, inverses and exponentials act
//! entry by entry.

use std::fmt;
use std::path::Path;

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::kernels::SiteSet;

/// Default tolerance of the semidefiniteness tests.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Dense symmetric real matrix. Only symmetric content is ever stored: the
/// constructors symmetrize their input as `(A + Aᵀ) / 2`.
#[derive(Clone)]
pub struct SymMatrix {
    data: Mat<f64>,
    asymmetry: f64,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix").field("rows", &self.to_rows()).field("asymmetry", &self.asymmetry).finish()
    }
}

impl PartialEq for SymMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order()
            && (0..self.order()).all(|i| (0..self.order()).all(|j| self.get(i, j) == other.get(i, j)))
    }
}

impl SymMatrix {
    /// Builds a matrix from rows, symmetrizing and recording the relative
    /// asymmetry `max|a_ij - a_ji| / max|a_ij|` of the input.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::Dimension("matrix must have at least one row".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Dimension(format!("row {bad} has {} entries, expected {p}", rows[bad].len())));
        }
        let mut max_abs = 0.0f64;
        let mut max_gap = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                max_abs = max_abs.max(rows[i][j].abs());
                max_gap = max_gap.max((rows[i][j] - rows[j][i]).abs());
            }
        }
        let data = Mat::from_fn(p, p, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
        let asymmetry = if max_abs > 0.0 { max_gap / max_abs } else { 0.0 };
        Ok(Self { data, asymmetry })
    }

    /// Builds a matrix from a function of `(i, j)`; `f` is evaluated on the
    /// upper triangle and mirrored.
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Mat::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        Self { data, asymmetry: 0.0 }
    }

    pub fn constant(p: usize, c: f64) -> Self {
        Self::from_fn(p, |_, _| c)
    }

    pub fn identity(p: usize) -> Self {
        Self::from_fn(p, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// `diag` on the diagonal and `off` elsewhere.
    pub fn equicorrelation(p: usize, diag: f64, off: f64) -> Self {
        Self::from_fn(p, |i, j| if i == j { diag } else { off })
    }

    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[(i, j)] = v;
        self.data[(j, i)] = v;
    }

    /// Relative asymmetry removed by the constructor.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.order()).map(|i| self.get(i, i)).collect()
    }

    pub fn as_faer(&self) -> MatRef<'_, f64> {
        self.data.as_ref()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order()).map(|i| (0..self.order()).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Upper-triangular entries `(i, j, value)` with `i <= j`, row by row.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let p = self.order();
        (0..p).flat_map(move |i| (i..p).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self.get(i, i)).sum()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(self.order(), |i, j| f(self.get(i, j)))
    }

    /// Entry-wise combination of two matrices of equal order.
    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if self.order() != other.order() {
            return Err(Error::Dimension(format!("orders differ: {} vs {}", self.order(), other.order())));
        }
        Ok(Self::from_fn(self.order(), |i, j| f(self.get(i, j), other.get(i, j))))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Element-wise (Schur) product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Element-wise quotient.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a / b)
    }

    /// Element-wise power with a scalar exponent; entries must be positive.
    pub fn powf(&self, r: f64) -> Result<Self> {
        hadamard(self, HadamardOp::Power(r))
    }

    /// Element-wise power `a_ij ^ e_ij`; entries of `self` must be positive.
    pub fn pow_matrix(&self, exponent: &Self) -> Result<Self> {
        self.require_positive("element-wise power")?;
        self.zip_map(exponent, f64::powf)
    }

    pub fn recip(&self) -> Result<Self> {
        hadamard(self, HadamardOp::Inverse)
    }

    pub fn min_entry(&self) -> f64 {
        self.upper().map(|(_, _, v)| v).fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.upper().map(|(_, _, v)| v).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_positive(&self) -> bool {
        self.upper().all(|(_, _, v)| v > 0.0)
    }

    pub fn has_nan(&self) -> bool {
        self.upper().any(|(_, _, v)| v.is_nan())
    }

    /// True when every entry lies within `rel_tol` of the first one.
    pub fn is_constant(&self, rel_tol: f64) -> bool {
        let c = self.get(0, 0);
        self.upper().all(|(_, _, v)| (v - c).abs() <= rel_tol * c.abs().max(1e-300))
    }

    pub(crate) fn require_positive(&self, what: &str) -> Result<()> {
        if let Some((i, j, v)) = self.upper().find(|&(_, _, v)| !(v > 0.0)) {
            return Err(Error::Domain(format!("{what} requires positive entries, entry ({i},{j}) = {v}")));
        }
        Ok(())
    }

    /// Parses `p` lines of `p` comma-separated values (no header). Blank
    /// lines and lines starting with `#` are skipped.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut first_line = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse { line: idx + 1, msg: format!("bad number {:?}: {e}", s.trim()) })
                })
                .collect::<Result<Vec<_>>>()?;
            first_line.push(idx + 1);
            rows.push(row);
        }
        let p = rows.len();
        if p == 0 {
            return Err(Error::Parse { line: 1, msg: "empty matrix".into() });
        }
        for (row, &line) in rows.iter().zip(&first_line) {
            if row.len() != p {
                return Err(Error::Parse { line, msg: format!("expected {p} values, found {}", row.len()) });
            }
        }
        Self::new(&rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// CSV with 9 significant digits per entry.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Element-wise operation applied by [`hadamard`].
#[derive(Debug, Clone)]
pub enum HadamardOp<'a> {
    /// `a_ij ^ r`
    Power(f64),
    /// `exp(t a_ij)`
    ExpScale(f64),
    /// `1 / a_ij`
    Inverse,
    /// `a_ij b_ij`
    Product(&'a SymMatrix),
}

pub fn hadamard(a: &SymMatrix, op: HadamardOp<'_>) -> Result<SymMatrix> {
    match op {
        HadamardOp::Power(r) => {
            a.require_positive("element-wise power")?;
            Ok(a.map(|v| v.powf(r)))
        }
        HadamardOp::ExpScale(t) => Ok(a.map(|v| (t * v).exp())),
        HadamardOp::Inverse => {
            a.require_positive("element-wise inverse")?;
            Ok(a.map(f64::recip))
        }
        HadamardOp::Product(b) => a.mul(b),
    }
}

/// Outcome of a semidefiniteness test, with the extreme eigenpairs as
/// numerical witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Unit eigenvector of the smallest eigenvalue.
    pub witness: Vec<f64>,
}

/// Symmetric eigen-decomposition; eigenvalues ascending.
pub(crate) fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd =
        a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Domain(format!("eigen-decomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Positive semidefiniteness: `λ_min >= -tol * max(1, |λ_max|)`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> Result<PsdVerdict> {
    psd_of(a.as_faer(), tol)
}

/// As [`is_psd`] for a dense matrix view.
pub fn psd_of(a: MatRef<'_, f64>, tol: f64) -> Result<PsdVerdict> {
    let p = a.nrows();
    for i in 0..p {
        for j in 0..p {
            if a[(i, j)].is_nan() {
                return Err(Error::Domain(format!("NaN entry at ({i},{j})")));
            }
        }
    }
    let (vals, vecs) = sym_eigen(a)?;
    let min = vals[0];
    let max = vals[p - 1];
    let mut witness: Vec<f64> = (0..p).map(|k| vecs[(k, 0)]).collect();
    let norm = witness.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        witness.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(PsdVerdict { is_psd: min >= -tol * max.abs().max(1.0), min_eigenvalue: min, max_eigenvalue: max, witness })
}

/// Eigenvalue clipping: the symmetric matrix with the same eigenvectors and
/// eigenvalues raised to at least `floor`.
pub fn clip_eigenvalues(a: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    let (vals, vecs) = sym_eigen(a.as_faer())?;
    let p = a.order();
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(floor)).collect();
    Ok(SymMatrix::from_fn(p, |i, j| (0..p).map(|k| vecs[(i, k)] * clipped[k] * vecs[(j, k)]).sum()))
}

/// Conditional negative semidefiniteness via the bordered transform
/// `[a_ip + a_pj - a_ij - a_pp]`, anchored at the last index.
pub fn is_cnd(a: &SymMatrix, tol: f64) -> Result<PsdVerdict> {
    is_cnd_anchored(a, a.order() - 1, tol)
}

/// As [`is_cnd`] with an arbitrary anchor index.
pub fn is_cnd_anchored(a: &SymMatrix, anchor: usize, tol: f64) -> Result<PsdVerdict> {
    if anchor >= a.order() {
        return Err(Error::Dimension(format!("anchor {anchor} out of range")));
    }
    is_psd(&cnd_transform(a, anchor), tol)
}

pub(crate) fn cnd_transform(a: &SymMatrix, k: usize) -> SymMatrix {
    SymMatrix::from_fn(a.order(), |i, j| a.get(i, k) + a.get(k, j) - a.get(i, j) - a.get(k, k))
}

/// A Bernstein function: nonnegative on `[0, ∞)` with completely monotone
/// derivative. Built from a handful of closed families plus nonnegative
/// combinations and composition.
#[derive(Debug, Clone, PartialEq)]
pub enum BernsteinFn {
    /// `t`
    Identity,
    /// `t^θ`, `θ ∈ (0, 1]`
    Power(f64),
    /// `ln(1 + t)`
    Log1p,
    /// `t / (1 + t)`
    Ratio,
    /// `1 - exp(-c t)`, `c > 0`
    ExpSaturate(f64),
    /// `c >= 0`
    Constant(f64),
    /// `Σ w_k B_k(t)` with `w_k >= 0`
    Sum(Vec<(f64, BernsteinFn)>),
    /// `outer(inner(t))`
    Compose(Box<BernsteinFn>, Box<BernsteinFn>),
}

impl BernsteinFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Identity | Self::Log1p | Self::Ratio => Ok(()),
            Self::Power(theta) if *theta > 0.0 && *theta <= 1.0 => Ok(()),
            Self::Power(theta) => Err(Error::Domain(format!("power exponent {theta} not in (0, 1]"))),
            Self::ExpSaturate(c) if *c > 0.0 => Ok(()),
            Self::ExpSaturate(c) => Err(Error::Domain(format!("saturation rate {c} must be positive"))),
            Self::Constant(c) if *c >= 0.0 => Ok(()),
            Self::Constant(c) => Err(Error::Domain(format!("constant {c} must be nonnegative"))),
            Self::Sum(terms) => terms.iter().try_for_each(|(w, b)| {
                if !(*w >= 0.0) {
                    return Err(Error::Domain(format!("combination weight {w} must be nonnegative")));
                }
                b.validate()
            }),
            Self::Compose(outer, inner) => {
                outer.validate()?;
                inner.validate()
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Identity => t,
            Self::Power(theta) => t.powf(*theta),
            Self::Log1p => t.ln_1p(),
            Self::Ratio => t / (1.0 + t),
            Self::ExpSaturate(c) => -(-c * t).exp_m1(),
            Self::Constant(c) => *c,
            Self::Sum(terms) => terms.iter().map(|(w, b)| w * b.eval(t)).sum(),
            Self::Compose(outer, inner) => outer.eval(inner.eval(t)),
        }
    }

    /// `c + w B(t)`, a common way to obtain strictly positive matrices.
    pub fn shifted(self, c: f64, w: f64) -> Self {
        Self::Sum(vec![(1.0, Self::Constant(c)), (w, self)])
    }
}

/// `[B(‖s_i - s_j‖)]`, which is conditionally negative semidefinite.
pub fn bernstein_matrix(b: &BernsteinFn, points: &SiteSet) -> Result<SymMatrix> {
    b.validate()?;
    Ok(SymMatrix::from_fn(points.len(), |i, j| b.eval(points.distance(i, j))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rows(m: &[&[f64]]) -> SymMatrix {
        SymMatrix::new(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_is_psd() {
        let v = is_psd(&SymMatrix::identity(3), 0.0).unwrap();
        assert!(v.is_psd);
        assert_relative_eq!(v.min_eigenvalue, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn indefinite_two_by_two_witness() {
        let v = is_psd(&rows(&[&[1.0, 2.0], &[2.0, 1.0]]), DEFAULT_TOL).unwrap();
        assert!(!v.is_psd);
        assert_relative_eq!(v.min_eigenvalue, -1.0, epsilon = 1e-13);
        let norm = (v.witness[0].powi(2) + v.witness[1].powi(2)).sqrt();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-14);
        assert_relative_eq!(v.witness[0], -v.witness[1], epsilon = 1e-13);
    }

    #[test]
    fn equicorrelation_boundary() {
        for k in -10..=10 {
            let rho = k as f64 * 0.1;
            let m = SymMatrix::equicorrelation(3, 1.0, rho);
            let expected = (-0.5..=1.0).contains(&rho) || (rho + 0.5).abs() < 1e-12;
            assert_eq!(is_psd(&m, DEFAULT_TOL).unwrap().is_psd, expected, "rho = {rho}");
        }
        assert!(!is_psd(&SymMatrix::equicorrelation(3, 1.0, -0.51), DEFAULT_TOL).unwrap().is_psd);
    }

    #[test]
    fn nan_is_a_domain_error() {
        let m = rows(&[&[1.0, f64::NAN], &[f64::NAN, 1.0]]);
        assert!(matches!(is_psd(&m, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cnd_reference_cases() {
        assert!(is_cnd(&SymMatrix::constant(4, 1.0), DEFAULT_TOL).unwrap().is_psd);
        assert!(is_cnd(&SymMatrix::constant(3, 0.0), DEFAULT_TOL).unwrap().is_psd);
        assert!(!is_cnd(&SymMatrix::identity(3), DEFAULT_TOL).unwrap().is_psd);
        let nu = SymMatrix::from_fn(4, |i, j| 1.0 + (i as f64 - j as f64).powi(2));
        assert!(is_cnd(&nu, DEFAULT_TOL).unwrap().is_psd);
    }

    #[test]
    fn cnd_is_anchor_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = rng.random_range(2..6);
            let a = SymMatrix::from_fn(p, |_, _| rng.random_range(-2.0..2.0));
            let base = is_cnd(&a, DEFAULT_TOL).unwrap().is_psd;
            for k in 0..p {
                assert_eq!(is_cnd_anchored(&a, k, DEFAULT_TOL).unwrap().is_psd, base);
            }
        }
    }

    #[test]
    fn hadamard_examples() {
        let inv = hadamard(&SymMatrix::constant(3, 2.0), HadamardOp::Inverse).unwrap();
        assert_eq!(inv, SymMatrix::constant(3, 0.5));
        let sq = hadamard(&rows(&[&[1.0, 3.0], &[3.0, 2.0]]), HadamardOp::Power(2.0)).unwrap();
        assert_eq!(sq, rows(&[&[1.0, 9.0], &[9.0, 4.0]]));
        for &t in &[0.0, 0.5, 3.0] {
            let e = hadamard(&SymMatrix::constant(3, 1.0), HadamardOp::ExpScale(-t)).unwrap();
            assert_relative_eq!(e.get(0, 2), (-t).exp(), epsilon = 1e-15);
            assert!(is_psd(&e, DEFAULT_TOL).unwrap().is_psd);
        }
        assert!(hadamard(&rows(&[&[1.0, 0.0], &[0.0, 1.0]]), HadamardOp::Inverse).is_err());
        assert!(hadamard(&rows(&[&[1.0, -1.0], &[-1.0, 1.0]]), HadamardOp::Power(0.5)).is_err());
    }

    #[test]
    fn constructor_symmetrizes() {
        let m = SymMatrix::new(&[vec![1.0, 2.0], vec![4.0, 1.0]]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert_relative_eq!(m.asymmetry(), 0.5);
    }

    #[test]
    fn bernstein_examples() {
        let pts = SiteSet::new(1, vec![0.0, 1.0, 3.0]).unwrap();
        let c = bernstein_matrix(&BernsteinFn::Constant(2.5), &pts).unwrap();
        assert_eq!(c, SymMatrix::constant(3, 2.5));
        assert!(is_cnd(&c, DEFAULT_TOL).unwrap().is_psd);
        let d = bernstein_matrix(&BernsteinFn::Identity, &pts).unwrap();
        assert_eq!(d, rows(&[&[0.0, 1.0, 3.0], &[1.0, 0.0, 2.0], &[3.0, 2.0, 0.0]]));
        assert!(is_cnd(&d, DEFAULT_TOL).unwrap().is_psd);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let planar = SiteSet::new(2, (0..10).map(|_| rng.random_range(0.0..4.0)).collect()).unwrap();
        let l = bernstein_matrix(&BernsteinFn::Log1p, &planar).unwrap();
        assert!(is_cnd(&l, DEFAULT_TOL).unwrap().is_psd);
        assert!(bernstein_matrix(&BernsteinFn::Power(1.5), &pts).is_err());
        assert!(bernstein_matrix(&BernsteinFn::Constant(-1.0), &pts).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let m = rows(&[&[1.0, 0.25], &[0.25, 2.0]]);
        let back = SymMatrix::from_csv_str(&m.to_csv_string()).unwrap();
        assert_eq!(back, m);
        match SymMatrix::from_csv_str("1,2\n2,x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match SymMatrix::from_csv_str("1,2\n2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
