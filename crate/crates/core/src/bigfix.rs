//! Binary fixed-point arithmetic on big integers: a value `v` stands for
//! `v / 2^p`. Only what the alternating-sum marginals need.

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Precision(pub u32);

impl Precision {
    pub fn one(self) -> BigInt {
        BigInt::one() << self.0
    }

    #[cfg(test)]
    pub fn from_int(self, k: i64) -> BigInt {
        BigInt::from(k) << self.0
    }

    pub fn mul(self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.0
    }

    pub fn div(self, a: &BigInt, b: &BigInt) -> BigInt {
        (a << self.0) / b
    }

    /// `e^x` for integer `x`.
    pub fn exp_int(self, x: i64) -> BigInt {
        let guard = Precision(self.0 + 64);
        // e = Σ 1/k!, terms until they vanish at the working precision
        let mut e = BigInt::zero();
        let mut term = guard.one();
        let mut k = 1u64;
        while !term.is_zero() {
            e += &term;
            term /= k;
            k += 1;
        }
        let mut pow = guard.one();
        for _ in 0..x.unsigned_abs() {
            pow = guard.mul(&pow, &e);
        }
        if x < 0 {
            pow = guard.div(&guard.one(), &pow);
        }
        pow >> 64
    }

    #[cfg(test)]
    pub fn to_f64(self, v: &BigInt) -> f64 {
        let bits = v.bits();
        let sign = if v.sign() == Sign::Minus { -1.0 } else { 1.0 };
        let mag = v.magnitude();
        if bits <= 64 {
            return sign * libm::scalbn(mag.to_u64().unwrap_or(0) as f64, -(self.0 as i32));
        }
        let shift = bits - 64;
        let top = (mag >> shift).to_u64().expect("top 64 bits fit");
        sign * libm::scalbn(top as f64, shift as i32 - self.0 as i32)
    }

    /// Natural log of a positive value; `None` otherwise.
    pub fn ln(self, v: &BigInt) -> Option<f64> {
        if v.sign() != Sign::Plus {
            return None;
        }
        let shift = v.bits().saturating_sub(64);
        let top = (v.magnitude() >> shift).to_u64()? as f64;
        Some(libm::log(top) + (shift as f64 - self.0 as f64) * core::f64::consts::LN_2)
    }
}
