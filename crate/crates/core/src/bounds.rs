//! Largest admissible collocated correlation `ρ` under a condition set, for
//! models with `σ_ii = 1`, `σ_ij = ρ`.

use std::fmt::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::MaternSpec;
use crate::matrix::SymMatrix;
use crate::validity::{check, log_grid, CheckOptions, ConditionSet};

/// Default absolute tolerance of [`rho_max`].
pub const DEFAULT_RHO_TOL: f64 = 1e-4;
const MAX_BISECTIONS: usize = 60;

/// Fixed `α`, `ν` and check options; `σ` is equicorrelated with free `ρ`.
#[derive(Debug, Clone)]
pub struct EquicorrStructure {
    pub p: usize,
    pub d: usize,
    pub alpha: SymMatrix,
    pub nu: SymMatrix,
    pub options: CheckOptions,
}

impl EquicorrStructure {
    pub fn new(d: usize, alpha: SymMatrix, nu: SymMatrix, options: CheckOptions) -> Result<Self> {
        let p = alpha.order();
        MaternSpec::new(d, alpha.clone(), nu.clone(), SymMatrix::identity(p))?;
        Ok(Self { p, d, alpha, nu, options })
    }

    /// `ν_ii = 0.5`, `ν_ij = 1.5`, `α²_ii = 0.5β`, `α²_ij = 1.5β + a`. The
    /// `thm3B` hyperparameter is set to the same `β`.
    pub fn scaled_family(p: usize, d: usize, beta: f64, a: f64) -> Result<Self> {
        if !(beta > 0.0) || !(a >= 0.0) {
            return Err(Error::Domain(format!("need beta > 0 and a >= 0, got beta = {beta}, a = {a}")));
        }
        let alpha = SymMatrix::equicorrelation(p, (0.5 * beta).sqrt(), (1.5 * beta + a).sqrt());
        let options = CheckOptions { beta: Some(beta), ..Default::default() };
        Self::new(d, alpha, SymMatrix::equicorrelation(p, 0.5, 1.5), options)
    }

    /// `ν_ii = 0.5`, `ν_ij = 1.5`, `α²_ii = a`, `α²_ij = ln(1 + a)`. The
    /// spectral oracle runs on `ω = 0` plus a 2000-point log grid over
    /// `[1e-4, 1e4]`.
    pub fn log_family(p: usize, d: usize, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("need a > 0, got {a}")));
        }
        let alpha = SymMatrix::equicorrelation(p, a.sqrt(), a.ln_1p().sqrt());
        let mut omega_grid = vec![0.0];
        omega_grid.extend(log_grid(1e-4, 1e4, 2000));
        let options = CheckOptions { omega_grid, ..Default::default() };
        Self::new(d, alpha, SymMatrix::equicorrelation(p, 0.5, 1.5), options)
    }

    pub fn spec(&self, rho: f64) -> MaternSpec {
        MaternSpec {
            d: self.d,
            alpha: self.alpha.clone(),
            nu: self.nu.clone(),
            sigma: SymMatrix::equicorrelation(self.p, 1.0, rho),
        }
    }

    pub fn feasible(&self, set: ConditionSet, rho: f64) -> Result<bool> {
        Ok(check(set, &self.spec(rho), &self.options)?.satisfied)
    }
}

/// Result of [`rho_max`]. `infeasible_at_zero` flags structures whose
/// non-`ρ` clauses already fail; the bound is then 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoBound {
    pub rho_max: f64,
    pub infeasible_at_zero: bool,
}

/// Largest `ρ ∈ [0, 1]` satisfying `set`, by bisection to absolute `tol`.
/// Feasibility is spot-checked for monotonicity at 5 interior points.
pub fn rho_max(structure: &EquicorrStructure, set: ConditionSet, tol: f64) -> Result<RhoBound> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !structure.feasible(set, 0.0)? {
        return Ok(RhoBound { rho_max: 0.0, infeasible_at_zero: true });
    }
    let bound = if structure.feasible(set, 1.0)? {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if structure.feasible(set, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    for k in 1..=5 {
        let rho = k as f64 / 6.0;
        if (rho - bound).abs() <= tol {
            continue;
        }
        if structure.feasible(set, rho)? != (rho < bound) {
            return Err(Error::NonMonotone { rho });
        }
    }
    Ok(RhoBound { rho_max: bound, infeasible_at_zero: false })
}

/// The two comparison curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    /// Bounds versus `β` in the scaled family at fixed `a`: `thm3B`, `apanasovich`.
    Fig1 { a: f64 },
    /// Bounds versus `a` in the log family: `thm2A`, `thm3A`, `spectral_oracle`.
    Fig2,
}

impl Curve {
    pub fn sets(self) -> &'static [ConditionSet] {
        match self {
            Curve::Fig1 { .. } => &[ConditionSet::Thm3B, ConditionSet::Apanasovich],
            Curve::Fig2 => &[ConditionSet::Thm2A, ConditionSet::Thm3A, ConditionSet::SpectralOracle],
        }
    }

    fn abscissa(self) -> &'static str {
        match self {
            Curve::Fig1 { .. } => "beta",
            Curve::Fig2 => "a",
        }
    }

    fn structure(self, x: f64, p: usize, d: usize) -> Result<EquicorrStructure> {
        match self {
            Curve::Fig1 { a } => EquicorrStructure::scaled_family(p, d, x, a),
            Curve::Fig2 => EquicorrStructure::log_family(p, d, x),
        }
    }
}

/// Numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// `ρ_max` of every set of `curve` along `grid`; grid points run in parallel
/// and keep their order.
pub fn example_curve(curve: Curve, grid: &[f64], p: usize, d: usize, tol: f64) -> Result<CurveTable> {
    let sets = curve.sets();
    let rows = grid
        .par_iter()
        .map(|&x| {
            let structure = curve.structure(x, p, d)?;
            let mut row = vec![x];
            for &set in sets {
                row.push(rho_max(&structure, set, tol)?.rho_max);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec![curve.abscissa().to_string()];
    header.extend(sets.iter().map(|s| s.id().to_string()));
    Ok(CurveTable { header, rows })
}
