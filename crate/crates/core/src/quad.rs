//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
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

/// Maximum number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// 15-point Kronrod estimate with the embedded 7-point Gauss rule as the
/// error reference.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: libm::fabs((kronrod - gauss) * half),
    }
}

/// Integrate `f` over `[a, b]` until the summed error estimate falls below
/// `max(abs_tol, rel_tol·|I|)`. Returns `(integral, error estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod15(&f, a, b);
    let (mut total, mut error) = (first.value, first.error);
    heap.push(first);
    while error > abs_tol.max(rel_tol * libm::fabs(total)) {
        if heap.len() >= MAX_INTERVALS || !total.is_finite() {
            return Err(Error::Quadrature { a, b });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the incremental updates
    let total: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if !(total.is_finite() && error.is_finite()) {
        return Err(Error::Quadrature { a, b });
    }
    Ok((total, error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let (v, _) = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(v, 3.75 - 3.0 + 3.0, max_relative = 1e-14);
    }

    #[test]
    fn smooth_functions() {
        let (v, _) = integrate(libm::exp, 0.0, 1.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(v, core::f64::consts::E - 1.0, max_relative = 1e-14);
        // logistic antiderivative is softplus
        let (v, _) = integrate(|t| 1.0 / (1.0 + libm::exp(-t)), -5.0, 5.0, 1e-14, 1e-13).unwrap();
        assert_relative_eq!(v, 5.0, max_relative = 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let (v, _) = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12).unwrap();
        let exact = 2.0 * libm::atan(1.0 / 1e-2) / 1e-2;
        assert_relative_eq!(v, exact, max_relative = 1e-11);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(libm::exp, 1.0, 1.0, 1e-12, 1e-12).unwrap().0, 0.0);
    }

    #[test]
    fn non_finite_integrand_fails() {
        assert!(integrate(
            |x| if x < 0.3 { f64::NAN } else { 1.0 },
            0.0,
            1.0,
            1e-12,
            1e-12
        )
        .is_err());
        assert!(integrate(
            |x| 1.0 / (x - 0.5).abs().sqrt().powi(3),
            0.0,
            1.0,
            1e-12,
            1e-12
        )
        .is_err());
    }
}
