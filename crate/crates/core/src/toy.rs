//! Exact evidence for the Bernoulli-versus-Markov toy comparison.
//!
//! Both models have likelihoods of the form `c·e^{θs}/(1+e^θ)^N`, so the
//! marginal likelihood of a sequence reduces to the one-dimensional
//! integral `I(s, N; a, b) = ∫_a^b e^{θs}/(1+e^θ)^N dθ`:
//!
//! * model 0 (iid Bernoulli, θ₀ ~ U(−5, 5)): `m₀(x) = I(S₀(x), n; −5, 5) / 10`
//! * model 1 (Markov chain, θ₁ ~ U(0, 6)):  `m₁(x) = I(S₁(x), n−1; 0, 6) / 12`
//!
//! With `u = 1 + e^θ` the integrand becomes `(u−1)^{s−1} u^{−N}`, and a
//! binomial expansion gives, for `1 ≤ s ≤ N−1`,
//!
//! ```text
//! I = Σ_{k=0}^{s−1} C(s−1, k) (−1)^{s−1−k} [u_a^{−j} − u_b^{−j}] / j,   j = N−1−k
//! ```
//!
//! The alternating sum cancels catastrophically in double precision, so it
//! is evaluated in big fixed-point arithmetic. Adaptive quadrature of the
//! rescaled integrand is the independent second route and covers the end
//! points `s = 0` and `s = N` where the expansion has a pole.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bigfix::Precision;
use crate::error::{Error, Result};
use crate::grf::{softplus, suff_stat_bernoulli, suff_stat_markov, Configuration};
use crate::quad;
use crate::sampler::ModelPrior;

/// Integer prior bounds of θ₀.
pub const M0_PRIOR: (i64, i64) = (-5, 5);
/// Integer prior bounds of θ₁.
pub const M1_PRIOR: (i64, i64) = (0, 6);

/// Quadrature tolerances on the integrand rescaled to a unit peak.
pub const QUAD_ABS_TOL: f64 = 1e-12;
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Relative disagreement above which the quadrature value replaces the
/// alternating sum.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// `ln I(s, N; a, b)` by adaptive quadrature.
pub fn ln_integral_quadrature(s: u64, big_n: u64, a: f64, b: f64) -> Result<f64> {
    let (s, nn) = (s as f64, big_n as f64);
    let log_f = |t: f64| s * t - nn * softplus(t);
    // log_f is concave; its maximiser is logit(s/N)
    let mode = if s <= 0.0 {
        a
    } else if s >= nn {
        b
    } else {
        libm::log(s / (nn - s))
    }
    .clamp(a, b);
    let peak = log_f(mode);
    let g = |t: f64| libm::exp(log_f(t) - peak);
    let mut total = 0.0;
    for (lo, hi) in [(a, mode), (mode, b)] {
        if hi > lo {
            total += quad::integrate(g, lo, hi, QUAD_ABS_TOL, QUAD_REL_TOL)?.0;
        }
    }
    Ok(peak + libm::log(total))
}

/// `ln I(s, N; a, b)` by the alternating binomial sum, for `1 ≤ s ≤ N−1`.
pub fn ln_integral_alternating(s: u64, big_n: u64, a: i64, b: i64) -> Result<f64> {
    if s == 0 || s >= big_n {
        return Err(Error::StatisticRange {
            value: s as usize,
            max: big_n.saturating_sub(1) as usize,
        });
    }
    // the largest binomial has ~N bits, (1 + e^6)^{-N} needs ~9N more
    let prec = Precision(256 + 12 * big_n as u32);
    let one = prec.one();
    let inv_ua = prec.div(&one, &(prec.exp_int(a) + &one));
    let inv_ub = prec.div(&one, &(prec.exp_int(b) + &one));

    // powers u^{−j} for j = 1..=N−1
    let max_j = (big_n - 1) as usize;
    let mut pow_a: Vec<BigInt> = Vec::with_capacity(max_j + 1);
    let mut pow_b: Vec<BigInt> = Vec::with_capacity(max_j + 1);
    pow_a.push(one.clone());
    pow_b.push(one.clone());
    for j in 1..=max_j {
        pow_a.push(prec.mul(&pow_a[j - 1], &inv_ua));
        pow_b.push(prec.mul(&pow_b[j - 1], &inv_ub));
    }

    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    for k in 0..s {
        if k > 0 {
            binom = binom * (s - k) / k;
        }
        let j = (big_n - 1 - k) as usize;
        let term = &binom * (&pow_a[j] - &pow_b[j]) / BigInt::from(j);
        if (s - 1 - k).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    prec.ln(&sum).ok_or(Error::Quadrature {
        a: a as f64,
        b: b as f64,
    })
}

/// Which route produced a marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalSource {
    Alternating,
    Quadrature,
}

/// A marginal likelihood with both routes retained for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    pub ln_value: f64,
    pub ln_quadrature: f64,
    pub ln_alternating: Option<f64>,
    pub source: MarginalSource,
}

impl Marginal {
    pub fn value(&self) -> f64 {
        libm::exp(self.ln_value)
    }
}

fn combine(
    ln_scale: f64,
    quadrature: f64,
    alternating: Option<f64>,
    prefer_alternating: bool,
) -> Marginal {
    let ln_quadrature = quadrature + ln_scale;
    let ln_alternating = alternating.map(|v| v + ln_scale);
    let agree = ln_alternating
        .map(|alt| libm::fabs(libm::expm1(alt - ln_quadrature)) <= CROSS_CHECK_TOL)
        .unwrap_or(false);
    match ln_alternating {
        Some(alt) if agree && prefer_alternating => Marginal {
            ln_value: alt,
            ln_quadrature,
            ln_alternating,
            source: MarginalSource::Alternating,
        },
        _ => Marginal {
            ln_value: ln_quadrature,
            ln_quadrature,
            ln_alternating,
            source: MarginalSource::Quadrature,
        },
    }
}

/// Marginal likelihood under model 0 of any sequence with `S₀ = s0` on
/// `n` sites. The alternating sum is primary for interior `s0`.
pub fn marginal_m0(s0: u64, n: u64) -> Result<Marginal> {
    if n == 0 || s0 > n {
        return Err(Error::StatisticRange {
            value: s0 as usize,
            max: n as usize,
        });
    }
    let (a, b) = M0_PRIOR;
    let ln_scale = -libm::log((b - a) as f64);
    let quadrature = ln_integral_quadrature(s0, n, a as f64, b as f64)?;
    let alternating = if s0 >= 1 && s0 < n {
        Some(ln_integral_alternating(s0, n, a, b)?)
    } else {
        None
    };
    Ok(combine(ln_scale, quadrature, alternating, true))
}

/// Marginal likelihood under model 1 of any sequence with `S₁ = s1` on
/// `n` sites. Quadrature is primary; the alternating sum is a cross-check.
pub fn marginal_m1(s1: u64, n: u64) -> Result<Marginal> {
    if n == 0 || s1 + 1 > n {
        return Err(Error::StatisticRange {
            value: s1 as usize,
            max: n.saturating_sub(1) as usize,
        });
    }
    let (a, b) = M1_PRIOR;
    // uniform prior density 1/6 and the 1/2 for the first site
    let ln_scale = -libm::log(2.0 * (b - a) as f64);
    let big_n = n - 1;
    let quadrature = ln_integral_quadrature(s1, big_n, a as f64, b as f64)?;
    let alternating = if s1 >= 1 && s1 < big_n {
        Some(ln_integral_alternating(s1, big_n, a, b)?)
    } else {
        None
    };
    Ok(combine(ln_scale, quadrature, alternating, false))
}

pub fn exact_marginal_m0(s0: u64, n: u64) -> Result<f64> {
    marginal_m0(s0, n).map(|m| m.value())
}

pub fn exact_marginal_m1(s1: u64, n: u64) -> Result<f64> {
    marginal_m1(s1, n).map(|m| m.value())
}

/// Exact model posterior and Bayes factor `BF_{0/1}` for one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyPosterior {
    pub p0: f64,
    pub p1: f64,
    pub ln_bf: f64,
    /// The data were a constant sequence, which the two models cannot
    /// tell apart well; the numbers are still exact.
    pub constant_data: bool,
}

impl ToyPosterior {
    pub fn bf(&self) -> f64 {
        libm::exp(self.ln_bf)
    }
}

/// Posterior from log evidences `ln e_0`, `ln e_1` and a two-model prior.
pub fn posterior_from_evidence(ln_e0: f64, ln_e1: f64, prior: &ModelPrior) -> Result<ToyPosterior> {
    if prior.len() != 2 {
        return Err(Error::NotTwoModels(prior.len()));
    }
    let w0 = ln_e0 + libm::log(prior.weight(0));
    let w1 = ln_e1 + libm::log(prior.weight(1));
    // p0 = 1 / (1 + exp(w1 − w0)), computed on the stable side
    let p0 = if w0 >= w1 {
        1.0 / (1.0 + libm::exp(w1 - w0))
    } else {
        let r = libm::exp(w0 - w1);
        r / (1.0 + r)
    };
    Ok(ToyPosterior {
        p0,
        p1: 1.0 - p0,
        ln_bf: ln_e0 - ln_e1,
        constant_data: false,
    })
}

pub fn exact_posterior_and_bf(x0: &Configuration, prior: &ModelPrior) -> Result<ToyPosterior> {
    if x0.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let n = x0.len() as u64;
    let e0 = marginal_m0(suff_stat_bernoulli(x0) as u64, n)?;
    let e1 = marginal_m1(suff_stat_markov(x0) as u64, n)?;
    let mut post = posterior_from_evidence(e0.ln_value, e1.ln_value, prior)?;
    post.constant_data = x0.is_constant();
    Ok(post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    /// Composite Simpson rule on a fine uniform grid; independent of the
    /// adaptive scheme under test.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn raw_integrand(s: u64, big_n: u64) -> impl Fn(f64) -> f64 {
        move |t| libm::exp(s as f64 * t - big_n as f64 * softplus(t))
    }

    #[test]
    fn m0_symmetric_in_s0() {
        for n in [3u64, 7, 20] {
            for s in 0..=n {
                let a = exact_marginal_m0(s, n).unwrap();
                let b = exact_marginal_m0(n - s, n).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn m0_matches_simpson() {
        let v = exact_marginal_m0(3, 5).unwrap();
        let oracle = simpson(raw_integrand(3, 5), -5.0, 5.0, 200_000) / 10.0;
        assert_relative_eq!(v, oracle, max_relative = 1e-9);
    }

    #[test]
    fn m0_matches_sequence_enumeration() {
        // every sequence with S0 = 1 on 3 sites has the same marginal
        let n = 3;
        let oracle = simpson(raw_integrand(1, n), -5.0, 5.0, 200_000) / 10.0;
        let mut class_total = 0.0;
        let mut members = 0;
        for code in 0..8u64 {
            let x = Configuration::from_index(code, n as usize);
            if suff_stat_bernoulli(&x) == 1 {
                class_total += oracle;
                members += 1;
            }
        }
        assert_eq!(members, 3);
        assert_relative_eq!(
            exact_marginal_m0(1, n).unwrap(),
            class_total / 3.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn m1_small_cases() {
        // n = 2, s1 = 0: (1/12)∫_0^6 1/(1+e^θ) dθ = (1/12)[ln 2 − softplus(6) + 6]
        let exact = (core::f64::consts::LN_2 - softplus(6.0) + 6.0) / 12.0;
        assert_relative_eq!(
            exact_marginal_m1(0, 2).unwrap(),
            exact,
            max_relative = 1e-12
        );
        let oracle = simpson(raw_integrand(0, 1), 0.0, 6.0, 200_000) / 12.0;
        assert_relative_eq!(
            exact_marginal_m1(0, 2).unwrap(),
            oracle,
            max_relative = 1e-9
        );
        assert_relative_eq!(exact_marginal_m1(0, 1).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(exact_marginal_m0(1, 1).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn m1_increases_with_persistence() {
        let n = 20;
        let values: Vec<f64> = (0..n).map(|s| exact_marginal_m1(s, n).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn alternating_and_quadrature_agree() {
        for n in [5u64, 20, 100] {
            for s in 1..n {
                let m = marginal_m0(s, n).unwrap();
                let alt = m.ln_alternating.unwrap();
                let rel = libm::fabs(libm::expm1(alt - m.ln_quadrature));
                assert!(rel < 1e-6, "n={n} s={s}: {rel}");
                assert_eq!(m.source, MarginalSource::Alternating);
            }
        }
        for n in [5u64, 20, 60] {
            for s in 1..n - 1 {
                let m = marginal_m1(s, n).unwrap();
                let rel = libm::fabs(libm::expm1(m.ln_alternating.unwrap() - m.ln_quadrature));
                assert!(rel < 1e-6, "m1 n={n} s={s}: {rel}");
            }
        }
    }

    #[test]
    fn double_precision_sum_would_fail() {
        // the same alternating sum in f64 is useless for n = 100
        let (n, s) = (100u64, 50u64);
        let ua: f64 = 1.0 + libm::exp(-5.0);
        let ub: f64 = 1.0 + libm::exp(5.0);
        let mut binom = 1.0f64;
        let mut naive = 0.0f64;
        for k in 0..s {
            if k > 0 {
                binom = binom * (s - k) as f64 / k as f64;
            }
            let j = (n - 1 - k) as i32;
            let sign = if (s - 1 - k) % 2 == 0 { 1.0 } else { -1.0 };
            naive += sign * binom * (ua.powi(-j) - ub.powi(-j)) / j as f64;
        }
        let exact = libm::exp(ln_integral_alternating(s, n, -5, 5).unwrap());
        assert!(libm::fabs(naive / exact - 1.0) > 1.0);
    }

    #[test]
    fn marginals_are_probability_mass_functions() {
        for n in 1..=12usize {
            let mut total0 = 0.0;
            let mut total1 = 0.0;
            let m0: Vec<f64> = (0..=n as u64)
                .map(|s| exact_marginal_m0(s, n as u64).unwrap())
                .collect();
            let m1: Vec<f64> = (0..n as u64)
                .map(|s| exact_marginal_m1(s, n as u64).unwrap())
                .collect();
            for code in 0..1u64 << n {
                let x = Configuration::from_index(code, n);
                total0 += m0[suff_stat_bernoulli(&x) as usize];
                total1 += m1[suff_stat_markov(&x) as usize];
            }
            assert!((total0 - 1.0).abs() < 1e-8, "n={n}: {total0}");
            assert!((total1 - 1.0).abs() < 1e-8, "n={n}: {total1}");
        }
    }

    #[test]
    fn range_errors() {
        assert!(exact_marginal_m0(6, 5).is_err());
        assert!(exact_marginal_m1(5, 5).is_err());
        assert!(exact_marginal_m0(0, 0).is_err());
        assert!(ln_integral_alternating(0, 5, -5, 5).is_err());
        assert!(ln_integral_alternating(5, 5, -5, 5).is_err());
    }

    #[test]
    fn alternating_data_favour_bernoulli() {
        let x0 = Configuration::new((0..20).map(|i| (i % 2) as u8).collect()).unwrap();
        let post = exact_posterior_and_bf(&x0, &ModelPrior::uniform(2)).unwrap();
        assert!(post.bf() > 1.0, "{}", post.bf());
        assert!(!post.constant_data);
        assert_relative_eq!(post.p0 + post.p1, 1.0);
    }

    #[test]
    fn posterior_from_injected_evidence() {
        let equal = posterior_from_evidence(-3.0, -3.0, &ModelPrior::uniform(2)).unwrap();
        assert_relative_eq!(equal.p0, 0.5);
        assert_eq!(equal.bf(), 1.0);
        let odds = ModelPrior::new(vec![0.75, 0.25]).unwrap();
        let skewed = posterior_from_evidence(-3.0, -3.0, &odds).unwrap();
        assert_relative_eq!(skewed.p0, 0.75, max_relative = 1e-15);
        assert_relative_eq!(skewed.p1, 0.25, max_relative = 1e-14);
        assert_eq!(skewed.bf(), 1.0);
        // extreme evidence stays finite
        let far = posterior_from_evidence(-1000.0, 0.0, &ModelPrior::uniform(2)).unwrap();
        assert!(far.p0 < 1e-300 && far.p1 == 1.0);
    }

    #[test]
    fn bf_does_not_depend_on_model_prior() {
        let x0 = Configuration::new(vec![1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1]).unwrap();
        let a = exact_posterior_and_bf(&x0, &ModelPrior::uniform(2)).unwrap();
        let b = exact_posterior_and_bf(&x0, &ModelPrior::new(vec![0.1, 0.9]).unwrap()).unwrap();
        assert_eq!(a.ln_bf, b.ln_bf);
        assert!(a.p0 != b.p0);
    }

    #[test]
    fn constant_sequences_flagged() {
        let x0 = Configuration::new(vec![1; 10]).unwrap();
        let post = exact_posterior_and_bf(&x0, &ModelPrior::uniform(2)).unwrap();
        assert!(post.constant_data);
        assert!(post.p0.is_finite());
    }
}
