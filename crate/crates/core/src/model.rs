//! Exact halting model for random generation.
//!
//! Under the independence approximation, a site whose dragnet has `c` members
//! is fully blocked with probability `Surj(c, d) / d^c`, where `Surj(c, d)`
//! counts the onto maps from `c` sites to `d` symbols. The halting site is
//! then a compound geometric variable: within each interval the hazard is
//! constant, and it steps up whenever the dragnet grows.
//!
//! Full-block probabilities are exact rationals. Only the running survival
//! product and the moments are floating point.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genrand::check_alphabet;
use crate::jumps::JumpRule;

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_SITES: usize = 10_000_000;

/// Exact probability `numerator / denominator`, not necessarily reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProb {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactProb {
    pub fn new(numerator: BigUint, denominator: BigUint) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        debug_assert!(numerator <= denominator, "probability above one");
        ExactProb {
            numerator,
            denominator,
        }
    }

    pub fn zero() -> Self {
        ExactProb::new(BigUint::zero(), BigUint::one())
    }

    /// `1 - self`, exact.
    pub fn complement(&self) -> ExactProb {
        ExactProb::new(&self.denominator - &self.numerator, self.denominator.clone())
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.numerator, &self.denominator)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

/// Correctly scaled `num / den` for arbitrarily large operands.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // scale so the integer quotient carries about 64 significant bits
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let quotient = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let q = quotient.to_f64().expect("quotient fits in f64");
    let mut exp = -shift;
    let mut value = q;
    // apply 2^exp in steps that stay inside the f64 exponent range
    while exp < -1000 {
        value *= 2f64.powi(-1000);
        exp += 1000;
    }
    while exp > 1000 {
        value *= 2f64.powi(1000);
        exp -= 1000;
    }
    value * 2f64.powi(exp as i32)
}

/// `(k_1 + ... + k_d)! / (k_1! ... k_d!)`, exact.
pub fn multinomial(parts: &[u64]) -> BigUint {
    let mut total = 0u64;
    let mut acc = BigUint::one();
    for &k in parts {
        // multiply by binomial(total + k, k)
        for m in 1..=k {
            acc *= total + m;
            acc /= m;
        }
        total += k;
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    multinomial(&[k, n - k])
}

/// Number of onto maps from `c` sites to `d` symbols, by inclusion-exclusion
/// over the missing symbols.
pub fn surjections(c: u64, d: u64) -> BigUint {
    let mut sum = BigInt::zero();
    for m in 0..=d {
        let term = BigInt::from(binomial(d, m)) * BigInt::from(BigUint::from(d - m).pow(c as u32));
        if m % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    match sum.into_parts() {
        (Sign::Minus, _) => unreachable!("surjection count is non-negative"),
        (_, magnitude) => magnitude,
    }
}

/// Probability that `c` independent uniform symbols cover all `d` symbols.
pub fn full_block_prob(d: usize, c: usize) -> ExactProb {
    let denominator = BigUint::from(d as u64).pow(c as u32);
    if c < d {
        return ExactProb::new(BigUint::zero(), denominator);
    }
    ExactProb::new(surjections(c as u64, d as u64), denominator)
}

/// `p_i`: full-block probability on interval `i`, dragnet size `d + i - 1`.
pub fn interval_prob(d: usize, i: usize) -> ExactProb {
    assert!(i >= 1, "interval index is 1-based");
    full_block_prob(d, d + i - 1)
}

/// `d (1 - 1/d)^(d-1) (1 - 1/d)^i`, an upper bound on `1 - p_i`.
///
/// Strict for `d >= 3`. For `d = 2` the two boundary faces do not overlap and
/// the bound is attained: `1 - p_i = 2^-i` exactly.
pub fn tail_bound(d: usize, i: usize) -> f64 {
    let r = 1.0 - 1.0 / d as f64;
    d as f64 * r.powi(d as i32 - 1) * r.powi(i as i32)
}

/// Probability jump across the end of interval `i`: `(1 - p_i) p_{i+1} / p_i`.
pub fn interval_ratio(d: usize, i: usize) -> f64 {
    let p = interval_prob(d, i);
    let next = interval_prob(d, i + 1);
    // ratio of exact rationals, converted once
    let num = &p.complement().numerator * &next.numerator * &p.denominator;
    let den = &p.denominator * &next.denominator * &p.numerator;
    ratio_to_f64(&num, &den)
}

/// One row of the `p` table.
#[derive(Debug, Clone)]
pub struct BlockProb {
    /// Interval index `i >= 1`.
    pub interval: usize,
    /// Dragnet cardinality `d + i - 1`.
    pub cardinality: usize,
    pub exact: ExactProb,
    pub p: f64,
    /// `1 - p`, converted from the exact complement.
    pub q: f64,
}

impl BlockProb {
    fn new(d: usize, cardinality: usize) -> Self {
        let exact = full_block_prob(d, cardinality);
        BlockProb {
            interval: cardinality + 1 - d,
            cardinality,
            p: exact.to_f64(),
            q: exact.complement().to_f64(),
            exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    /// Stop once the survival probability drops below this.
    pub tail_tolerance: f64,
    pub max_sites: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub argmax: usize,
    pub peak: f64,
}

/// Truncated halting-site distribution for one `(d, rule)`.
#[derive(Debug, Clone)]
pub struct HaltingModel {
    pub d: usize,
    pub rule: JumpRule,
    /// `p` values for intervals `1..=I*`.
    pub p_table: Vec<BlockProb>,
    /// `pmf[j]` for `j = 0..=J*`; `pmf[0] = 0`.
    pmf: Vec<f64>,
    /// `survival[j] = P(T > j)`.
    survival: Vec<f64>,
    /// `P(T > J*)`.
    pub tail_mass: f64,
    pub mean: f64,
    pub std: f64,
    /// Upper bound on `E[T; T > J*]`, the mass the truncated mean omits.
    pub mean_tail_bound: f64,
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl HaltingModel {
    pub fn build(d: usize, rule: &JumpRule) -> Result<Self> {
        Self::build_with(d, rule, ModelOptions::default())
    }

    /// `pmf(j) = prod_{j' < j} (1 - p(c(j'))) * p(c(j))`, driven by the
    /// increments of the dragnet cardinality `c(j)`.
    pub fn build_with(d: usize, rule: &JumpRule, opts: ModelOptions) -> Result<Self> {
        check_alphabet(d)?;
        rule.check()?;
        let mut pmf = vec![0.0];
        let mut survival = vec![1.0];
        let mut p_table: Vec<BlockProb> = Vec::new();
        let mut surv = 1.0f64;

        // c(j) = c for f(c) < j <= f(c+1)
        let mut jumps = rule.values().map(|(_, f)| f as usize);
        let mut c = 0usize;
        let mut next_jump = jumps.next();
        let mut j = 0usize;
        let mut p_now = 0.0;
        let mut q_now = 1.0;
        while surv >= opts.tail_tolerance {
            j += 1;
            if j > opts.max_sites {
                return Err(Error::TailUnreachable {
                    tolerance: opts.tail_tolerance,
                    max_sites: opts.max_sites,
                    survival: surv,
                });
            }
            while next_jump.is_some_and(|f| f < j) {
                c += 1;
                next_jump = jumps.next();
                if c >= d {
                    let row = BlockProb::new(d, c);
                    p_now = row.p;
                    q_now = row.q;
                    p_table.push(row);
                }
            }
            pmf.push(surv * p_now);
            surv *= q_now;
            survival.push(surv);
            if c < d && next_jump.is_none() {
                // the dragnet never reaches d members
                return Err(Error::TailUnreachable {
                    tolerance: opts.tail_tolerance,
                    max_sites: j,
                    survival: surv,
                });
            }
        }

        let mut model = HaltingModel {
            d,
            rule: rule.clone(),
            p_table,
            pmf,
            survival,
            tail_mass: surv,
            mean: 0.0,
            std: 0.0,
            mean_tail_bound: 0.0,
        };
        model.fill_moments(p_now);
        Ok(model)
    }

    fn fill_moments(&mut self, last_p: f64) {
        let mut mean = NeumaierSum::default();
        for (j, &w) in self.pmf.iter().enumerate() {
            mean.add(j as f64 * w);
        }
        let mean = mean.value();
        let mut var = NeumaierSum::default();
        for (j, &w) in self.pmf.iter().enumerate() {
            let dev = j as f64 - mean;
            var.add(dev * dev * w);
        }
        self.mean = mean;
        self.std = var.value().max(0.0).sqrt();
        let cutoff = self.last_site() as f64;
        // beyond J* the hazard never drops below the last p
        self.mean_tail_bound = if last_p > 0.0 {
            self.tail_mass * (cutoff + 1.0 / last_p)
        } else {
            f64::INFINITY
        };
    }

    /// Truncation site `J*`.
    pub fn last_site(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `P(T = j)`; zero beyond the truncation.
    pub fn pmf(&self, j: usize) -> f64 {
        self.pmf.get(j).copied().unwrap_or(0.0)
    }

    /// `P(T > j)` for `j <= J*`.
    pub fn survival(&self, j: usize) -> f64 {
        self.survival
            .get(j)
            .copied()
            .unwrap_or(self.tail_mass)
    }

    pub fn pmf_values(&self) -> &[f64] {
        &self.pmf
    }

    pub fn survival_values(&self) -> &[f64] {
        &self.survival
    }

    /// Compensated total of the truncated pmf.
    pub fn total_mass(&self) -> f64 {
        let mut s = NeumaierSum::default();
        for &w in &self.pmf {
            s.add(w);
        }
        s.value()
    }

    /// `p_i` as a float, if tabulated.
    pub fn p(&self, i: usize) -> Option<f64> {
        self.p_table.get(i.checked_sub(1)?).map(|r| r.p)
    }

    pub fn moments(&self) -> Moments {
        model_moments(self)
    }
}

/// Mean, standard deviation, mode and peak height of the truncated pmf.
pub fn model_moments(model: &HaltingModel) -> Moments {
    let (argmax, peak) = model
        .pmf
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (j, &w)| if w > best.1 { (j, w) } else { best });
    Moments {
        mean: model.mean,
        std: model.std,
        argmax,
        peak,
    }
}

/// The square-rule pmf in closed three-branch form, given `p[i-1] = p_i`.
///
/// Zero up to `d^2`; geometric with parameter `p_1` on the first interval;
/// on interval `i` the product of `(1 - p_k)^{l_k}` over earlier intervals
/// times the geometric term of interval `i`.
pub fn square_closed_form_pmf(d: usize, j: usize, p: &[f64]) -> f64 {
    let base = d * d;
    if j <= base {
        return 0.0;
    }
    let i = (1..).find(|&i| j <= (d + i) * (d + i)).expect("interval index");
    let len = |k: usize| 2 * (d + k) - 1;
    let before: usize = (1..i).map(len).sum();
    let mut prob: f64 = (1..i).map(|k| (1.0 - p[k - 1]).powi(len(k) as i32)).product();
    prob *= (1.0 - p[i - 1]).powi((j - base - 1 - before) as i32);
    prob * p[i - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&[1, 1, 1]), BigUint::from(6u32));
        assert_eq!(multinomial(&[2, 0]), BigUint::from(1u32));
        assert_eq!(multinomial(&[]), BigUint::from(1u32));
        let sum: BigUint = (0..=3u64).map(|k| multinomial(&[k, 3 - k])).sum();
        assert_eq!(sum, BigUint::from(8u32));
        assert_eq!(binomial(5, 7), BigUint::zero());
    }

    #[test]
    fn full_block_examples() {
        let half = full_block_prob(2, 2);
        assert_eq!(
            (half.numerator.clone(), half.denominator.clone()),
            (BigUint::from(2u32), BigUint::from(4u32))
        );
        let p33 = full_block_prob(3, 3);
        assert_eq!(p33.numerator, BigUint::from(6u32));
        assert_eq!(p33.denominator, BigUint::from(27u32));
        for d in 2..10 {
            assert!(full_block_prob(d, d - 1).is_zero());
        }
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(tail_bound(2, 1), 0.5);
        assert_eq!(full_block_prob(2, 2).complement().to_f64(), 0.5);
        // 1 - 6/27 = 21/27 < 24/27
        let gap = tail_bound(3, 1) - full_block_prob(3, 3).complement().to_f64();
        assert!((gap - 3.0 / 27.0).abs() < 1e-15);
        assert!((tail_bound(5, 11) / tail_bound(5, 10) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn ratio_to_f64_handles_huge_operands() {
        let num = BigUint::from(3u32) * BigUint::from(10u32).pow(400);
        let den = BigUint::from(7u32) * BigUint::from(10u32).pow(400);
        assert!((ratio_to_f64(&num, &den) - 3.0 / 7.0).abs() < 1e-16);
        let tiny = ratio_to_f64(&BigUint::one(), &BigUint::from(2u32).pow(1060));
        assert_eq!(tiny, 2f64.powi(-1060));
        assert_eq!(ratio_to_f64(&BigUint::zero(), &BigUint::one()), 0.0);
    }

    #[test]
    fn table_moments_small_alphabets() {
        for (d, mean, std) in [(4, 23.992, 5.23924), (5, 39.2172, 8.22516), (6, 59.3666, 11.9713)] {
            let m = HaltingModel::build(d, &JumpRule::square()).unwrap();
            assert!((m.mean - mean).abs() / mean < 5e-6, "{d} {}", m.mean);
            assert!((m.std - std).abs() / std < 5e-6, "{d} {}", m.std);
        }
    }

    #[test]
    fn ten_symbol_peak() {
        let m = HaltingModel::build(10, &JumpRule::square()).unwrap().moments();
        assert_eq!(m.argmax, 197);
        assert!((m.peak - 0.0150393).abs() < 1e-7);
    }

    #[test]
    fn pmf_vanishes_before_first_full_dragnet() {
        for d in 2..=8 {
            let m = HaltingModel::build(d, &JumpRule::square()).unwrap();
            assert!((1..=d * d).all(|j| m.pmf(j) == 0.0));
            assert!(m.pmf(d * d + 1) > 0.0);
        }
    }

    #[test]
    fn normalization() {
        for d in [2usize, 3, 5, 9, 14] {
            let m = HaltingModel::build(d, &JumpRule::square()).unwrap();
            assert!(m.tail_mass < DEFAULT_TAIL_TOLERANCE);
            assert!((m.total_mass() + m.tail_mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_product() {
        for d in 4..=15 {
            let m = HaltingModel::build(d, &JumpRule::square()).unwrap();
            let p: Vec<f64> = m.p_table.iter().map(|r| r.p).collect();
            for j in 1..=m.last_site() {
                let closed = square_closed_form_pmf(d, j, &p);
                let generic = m.pmf(j);
                if generic == 0.0 {
                    assert_eq!(closed, 0.0);
                } else {
                    assert!((closed - generic).abs() / generic < 1e-10, "d={d} j={j}");
                }
            }
        }
    }

    #[test]
    fn interval_ratio_matches_pmf_jumps() {
        let d = 10;
        let m = HaltingModel::build(d, &JumpRule::square()).unwrap();
        for i in 1..10 {
            let edge = (d + i) * (d + i);
            let r = m.pmf(edge + 1) / m.pmf(edge);
            assert!((interval_ratio(d, i) - r).abs() / r < 1e-10);
        }
        assert!((1..6).any(|i| interval_ratio(d, i) > 1.0));
        assert!((40..60).all(|i| interval_ratio(d, i) < 1.0));
    }

    #[test]
    fn other_rules_build() {
        let fac = HaltingModel::build(4, &JumpRule::Factorial).unwrap();
        // dragnet reaches 4 members once 24 < j
        assert_eq!(fac.pmf(24), 0.0);
        assert!(fac.pmf(25) > 0.0);
        assert!(HaltingModel::build(3, &JumpRule::Linear(2)).is_ok());
    }

    #[test]
    fn short_explicit_list_never_halts() {
        let rule = JumpRule::Explicit(vec![1, 4]);
        assert!(matches!(
            HaltingModel::build(3, &rule),
            Err(Error::TailUnreachable { .. })
        ));
    }

    #[test]
    fn tolerance_beyond_max_sites_errors() {
        let opts = ModelOptions {
            tail_tolerance: 1e-12,
            max_sites: 50,
        };
        assert!(matches!(
            HaltingModel::build_with(10, &JumpRule::square(), opts),
            Err(Error::TailUnreachable { .. })
        ));
    }
}
