//! Adaptive Gauss–Kronrod (7/15 point) quadrature.
//!
//! Used as an independent numerical oracle for integral identities of the
//! Matérn family (spectral pair, Gaussian and Matérn scale mixtures, the
//! Bessel integral representation).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7/K15 panel: returns (Kronrod estimate, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * half, ((resk - resg) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate falls below
/// `max(abs_tol, rel_tol * |I|)`, bisecting the worst panel each step.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let max_panels = 20_000;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_panels {
            return Err(Error::Domain(format!("quadrature did not converge: estimate {total:e}, error {total_err:e}")));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed the drift of the running total
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integrates a decaying integrand over `[a, ∞)`. The tail is truncated at
/// the first point (on a doubling ladder) beyond which `|f|` stays below
/// `1e-16` times the largest value seen.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> Result<f64> {
    let mut step = 1.0f64.max(a.abs() * 0.1);
    let mut peak = f(a).abs();
    let mut x = a;
    let mut quiet = 0;
    let mut upper = None;
    for _ in 0..2000 {
        x += step;
        let v = f(x).abs();
        peak = peak.max(v);
        if v <= 1e-16 * peak {
            quiet += 1;
            if quiet >= 3 {
                upper = Some(x);
                break;
            }
        } else {
            quiet = 0;
        }
        step *= 1.5;
    }
    let upper = upper.ok_or_else(|| Error::Domain("integrand does not decay".into()))?;
    // split at a geometric ladder so that every panel starts well resolved
    let mut total = 0.0;
    let mut lo = a;
    let mut width = 0.5f64.max((upper - a) * 1e-4);
    while lo < upper {
        let hi = (lo + width).min(upper);
        total += integrate(&f, lo, hi, rel_tol, 1e-300)?;
        lo = hi;
        width *= 2.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_low_degree_polynomials() {
        let v = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
    }

    #[test]
    fn handles_endpoint_singularity() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let v = integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
