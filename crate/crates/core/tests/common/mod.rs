//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use longrange::model::multinomial;

pub fn is_square(n: usize) -> bool {
    let r = (n as f64).sqrt() as usize;
    (r.saturating_sub(1)..=r + 1).any(|k| k > 0 && k * k == n)
}

/// Exact halting-site distribution of the uniform generator under the
/// square rule: the whole generation tree walked with rational weights,
/// legality checked pair by pair.
pub fn tree_pmf(d: u8) -> BTreeMap<usize, BigRational> {
    fn walk(d: u8, seq: &mut Vec<u8>, w: BigRational, out: &mut BTreeMap<usize, BigRational>) {
        let site = seq.len() + 1;
        let legal: Vec<u8> = (1..=d)
            .filter(|&x| (1..site).all(|i| !is_square(site - i) || seq[i - 1] != x))
            .collect();
        if legal.is_empty() {
            *out.entry(site).or_insert_with(BigRational::zero) += w;
            return;
        }
        let share = w / BigRational::from_integer(BigInt::from(legal.len()));
        for x in legal {
            seq.push(x);
            walk(d, seq, share.clone(), out);
            seq.pop();
        }
    }
    let mut out = BTreeMap::new();
    walk(d, &mut Vec::new(), BigRational::one(), &mut out);
    out
}

/// Sum of multinomial coefficients over all `(k_1, ..., k_d)` with
/// `k_i >= min` and total `n`.
pub fn composition_sum(n: u64, d: usize, min: u64) -> BigUint {
    fn rec(left: u64, d: usize, min: u64, acc: &mut Vec<u64>, sum: &mut BigUint) {
        if acc.len() + 1 == d {
            if left >= min {
                acc.push(left);
                *sum += multinomial(acc);
                acc.pop();
            }
            return;
        }
        let mut k = min;
        while k <= left {
            acc.push(k);
            rec(left - k, d, min, acc, sum);
            acc.pop();
            k += 1;
        }
    }
    let mut sum = BigUint::zero();
    rec(n, d, min, &mut Vec::new(), &mut sum);
    sum
}
