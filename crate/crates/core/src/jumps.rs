//! Jump sequences and the dragnet geometry they induce.
//!
//! A [`JumpRule`] names a strictly increasing sequence `f(1) < f(2) < ...` of
//! forbidden distances. A [`JumpTable`] is the enumeration of that sequence up
//! to a fixed horizon; every query beyond the horizon is an error rather than
//! a silently truncated answer.
//!
//! The dragnet of a site `j` is the set of earlier sites `j - f(n) >= 1`. Its
//! cardinality `c(j)` is the number of jumps `<= j - 1`. Intervals are the
//! maximal runs of sites with constant `c(j) >= d`; interval `i` holds the
//! sites whose dragnet has `d + i - 1` members. For `f(n) = n^2` this gives
//! the closed form `{(d+i-1)^2 + 1, ..., (d+i)^2}`. For other rules the spans
//! are read off the increments of `c(j)`, which is an extrapolation of the
//! square-rule picture rather than an established result.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing sequence of positive jump distances.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpRule {
    /// `f(n) = n^k`, `k >= 1`.
    Monomial(u32),
    /// `f(n) = k n`, `k >= 1`.
    Linear(u64),
    /// `f(n) = 2n - 1`.
    AffineOdd,
    /// `f(n) = n!`.
    Factorial,
    /// `f(n) = p^n`, `p >= 2`.
    Geometric(u64),
    /// A finite, strictly increasing list of positive distances.
    Explicit(Vec<u64>),
}

impl JumpRule {
    pub fn square() -> Self {
        JumpRule::Monomial(2)
    }

    /// Checks the family parameters.
    pub fn check(&self) -> Result<()> {
        match self {
            JumpRule::Monomial(0) => Err(Error::InvalidRuleParameter(
                "monomial exponent must be >= 1".into(),
            )),
            JumpRule::Linear(0) => Err(Error::InvalidRuleParameter(
                "linear factor must be >= 1".into(),
            )),
            JumpRule::Geometric(p) if *p < 2 => Err(Error::InvalidRuleParameter(
                "geometric base must be >= 2".into(),
            )),
            JumpRule::Explicit(list) => {
                let increasing = list.windows(2).all(|w| w[0] < w[1]);
                if list.is_empty() || list[0] == 0 || !increasing {
                    Err(Error::InvalidExplicitJumps(list.clone()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `f(n)` for `n >= 1`, or `None` on `u64` overflow or past the end of an
    /// explicit list.
    pub fn value(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return None;
        }
        match self {
            JumpRule::Monomial(k) => n.checked_pow(*k),
            JumpRule::Linear(k) => n.checked_mul(*k),
            JumpRule::AffineOdd => n.checked_mul(2).map(|v| v - 1),
            JumpRule::Factorial => (1..=n).try_fold(1u64, |acc, m| acc.checked_mul(m)),
            JumpRule::Geometric(p) => u32::try_from(n).ok().and_then(|e| p.checked_pow(e)),
            JumpRule::Explicit(list) => list.get(usize::try_from(n - 1).ok()?).copied(),
        }
    }

    /// Lazily enumerates `(n, f(n))` for `n = 1, 2, ...` until overflow.
    pub fn values(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (1u64..).map_while(move |n| self.value(n).map(|v| (n, v)))
    }

    /// All `f(n) <= horizon` in increasing order.
    pub fn enumerate(&self, horizon: u64) -> Result<Vec<u64>> {
        self.check()?;
        Ok(self
            .values()
            .map(|(_, v)| v)
            .take_while(|&v| v <= horizon)
            .collect())
    }
}

impl fmt::Display for JumpRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpRule::Monomial(2) => write!(f, "square"),
            JumpRule::Monomial(3) => write!(f, "cube"),
            JumpRule::Monomial(k) => write!(f, "pow:{k}"),
            JumpRule::Linear(k) => write!(f, "linear:{k}"),
            JumpRule::AffineOdd => write!(f, "odd"),
            JumpRule::Factorial => write!(f, "factorial"),
            JumpRule::Geometric(p) => write!(f, "geom:{p}"),
            JumpRule::Explicit(list) => {
                let items: Vec<String> = list.iter().map(u64::to_string).collect();
                write!(f, "explicit:[{}]", items.join(","))
            }
        }
    }
}

impl FromStr for JumpRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let param = |body: &str| -> Result<u64> {
            body.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidRuleParameter(format!("`{body}` in `{s}`")))
        };
        let rule = match s {
            "square" => JumpRule::Monomial(2),
            "cube" => JumpRule::Monomial(3),
            "odd" => JumpRule::AffineOdd,
            "factorial" => JumpRule::Factorial,
            _ => match s.split_once(':') {
                Some(("pow", k)) => JumpRule::Monomial(
                    u32::try_from(param(k)?)
                        .map_err(|_| Error::InvalidRuleParameter(format!("exponent in `{s}`")))?,
                ),
                Some(("linear", k)) => JumpRule::Linear(param(k)?),
                Some(("geom", p)) => JumpRule::Geometric(param(p)?),
                Some(("explicit", body)) => {
                    let inner = body
                        .trim()
                        .strip_prefix('[')
                        .and_then(|b| b.strip_suffix(']'))
                        .ok_or_else(|| Error::UnknownRule(s.to_string()))?;
                    let list = inner
                        .split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(param)
                        .collect::<Result<Vec<_>>>()?;
                    JumpRule::Explicit(list)
                }
                _ => return Err(Error::UnknownRule(s.to_string())),
            },
        };
        rule.check()?;
        Ok(rule)
    }
}

/// The jumps of a rule enumerated up to a hard horizon.
///
/// Immutable after construction; shared by reference across samplers.
#[derive(Debug, Clone)]
pub struct JumpTable {
    rule: JumpRule,
    horizon: usize,
    jumps: Vec<usize>,
}

impl JumpTable {
    pub fn new(rule: JumpRule, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::ZeroLength);
        }
        let jumps = rule
            .enumerate(horizon as u64)?
            .into_iter()
            .map(|v| v as usize)
            .collect();
        Ok(JumpTable {
            rule,
            horizon,
            jumps,
        })
    }

    pub fn rule(&self) -> &JumpRule {
        &self.rule
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Jump distances `<= horizon`, increasing.
    pub fn jumps(&self) -> &[usize] {
        &self.jumps
    }

    fn check_query(&self, m: usize) -> Result<()> {
        if m > self.horizon {
            Err(Error::BeyondHorizon {
                query: m as u64,
                horizon: self.horizon as u64,
            })
        } else {
            Ok(())
        }
    }

    pub fn contains(&self, m: usize) -> Result<bool> {
        self.check_query(m)?;
        Ok(self.jumps.binary_search(&m).is_ok())
    }

    /// 1-based index `n` with `f(n) = m`, if `m` is a jump.
    pub fn index_of(&self, m: usize) -> Result<Option<usize>> {
        self.check_query(m)?;
        Ok(self.jumps.binary_search(&m).ok().map(|k| k + 1))
    }

    /// Number of jumps `<= x`.
    pub fn count_le(&self, x: usize) -> Result<usize> {
        self.check_query(x)?;
        Ok(self.jumps.partition_point(|&f| f <= x))
    }

    /// Dragnet cardinality `c(j) = |{n : f(n) <= j - 1}|`, with `c(1) = 0`.
    pub fn dragnet_size(&self, j: usize) -> Result<usize> {
        if j <= 1 {
            return Ok(0);
        }
        self.count_le(j - 1)
    }

    /// The dragnet `D_j = {j - f(n) >= 1}`, in increasing order.
    pub fn dragnet(&self, j: usize) -> Result<Vec<usize>> {
        let c = self.dragnet_size(j)?;
        Ok(self.jumps[..c].iter().rev().map(|&f| j - f).collect())
    }

    /// Dragnet profile for alphabet size `d`.
    pub fn profile(&self, d: usize) -> DragnetProfile {
        DragnetProfile::new(self, d)
    }
}

/// One interval of constant dragnet cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    /// 1-based interval index `i`.
    pub index: usize,
    /// Dragnet cardinality on the interval, `d + i - 1`.
    pub cardinality: usize,
    /// First site; this is where the cardinality jumps to `d + i - 1`.
    pub start: usize,
    /// Last site, inclusive.
    pub end: usize,
}

impl Interval {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.start..=self.end).contains(&j)
    }

    /// Jump site of this interval (its first site).
    pub fn jump_site(&self) -> usize {
        self.start
    }
}

/// Closed-form interval `i` of the square rule: `{(d+i-1)^2+1, ..., (d+i)^2}`.
pub fn square_interval(d: usize, i: usize) -> Interval {
    assert!(i >= 1, "interval index is 1-based");
    let lo = d + i - 1;
    let hi = d + i;
    Interval {
        index: i,
        cardinality: lo,
        start: lo * lo + 1,
        end: hi * hi,
    }
}

/// Intervals of a rule for alphabet size `d`, as far as the table horizon
/// determines them completely.
///
/// Interval `i` spans `f(d+i-1) + 1 ..= f(d+i)`.
pub fn interval_geometry(table: &JumpTable, d: usize) -> Vec<Interval> {
    let jumps = table.jumps();
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    let mut i = 1;
    // interval i needs f(d+i-1) and f(d+i), i.e. jumps[d+i-2] and jumps[d+i-1]
    while d + i - 1 < jumps.len() {
        let start = jumps[d + i - 2] + 1;
        let end = jumps[d + i - 1];
        out.push(Interval {
            index: i,
            cardinality: d + i - 1,
            start,
            end,
        });
        i += 1;
    }
    out
}

/// Dragnet cardinality function and interval structure for one `(rule, d)`.
#[derive(Debug, Clone)]
pub struct DragnetProfile {
    d: usize,
    horizon: usize,
    jumps: Vec<usize>,
    intervals: Vec<Interval>,
}

impl DragnetProfile {
    pub fn new(table: &JumpTable, d: usize) -> Self {
        DragnetProfile {
            d,
            horizon: table.horizon(),
            jumps: table.jumps().to_vec(),
            intervals: interval_geometry(table, d),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `c(j)`.
    pub fn cardinality(&self, j: usize) -> Result<usize> {
        if j <= 1 {
            return Ok(0);
        }
        if j - 1 > self.horizon {
            return Err(Error::BeyondHorizon {
                query: (j - 1) as u64,
                horizon: self.horizon as u64,
            });
        }
        Ok(self.jumps.partition_point(|&f| f < j))
    }

    /// Index of the interval holding `j`, or `None` before the first jump.
    pub fn interval_index(&self, j: usize) -> Result<Option<usize>> {
        let c = self.cardinality(j)?;
        Ok((c >= self.d).then(|| c + 1 - self.d))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Sites where the cardinality reaches `d, d + 1, ...`.
    pub fn jump_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().map(Interval::jump_site)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumerate_examples() {
        assert_eq!(JumpRule::square().enumerate(20).unwrap(), vec![1, 4, 9, 16]);
        assert_eq!(JumpRule::Factorial.enumerate(30).unwrap(), vec![1, 2, 6, 24]);
        assert_eq!(JumpRule::Linear(2).enumerate(7).unwrap(), vec![2, 4, 6]);
        assert_eq!(JumpRule::AffineOdd.enumerate(8).unwrap(), vec![1, 3, 5, 7]);
        assert_eq!(JumpRule::Geometric(3).enumerate(100).unwrap(), vec![3, 9, 27, 81]);
    }

    #[test]
    fn explicit_lists_are_checked() {
        assert!(JumpRule::Explicit(vec![1, 3, 3]).enumerate(10).is_err());
        assert!(JumpRule::Explicit(vec![0, 3]).enumerate(10).is_err());
        assert!(JumpRule::Explicit(vec![5, 2]).enumerate(10).is_err());
        assert!(JumpRule::Explicit(vec![]).enumerate(10).is_err());
        assert_eq!(
            JumpRule::Explicit(vec![2, 5, 11]).enumerate(10).unwrap(),
            vec![2, 5]
        );
    }

    #[test]
    fn huge_factorials_stop_at_overflow() {
        let all: Vec<u64> = JumpRule::Factorial.values().map(|(_, v)| v).collect();
        assert_eq!(all.len(), 20);
        assert_eq!(JumpRule::Geometric(2).values().count(), 63);
    }

    #[test]
    fn rule_names_parse() {
        for (name, rule) in [
            ("square", JumpRule::Monomial(2)),
            ("cube", JumpRule::Monomial(3)),
            ("pow:4", JumpRule::Monomial(4)),
            ("linear:3", JumpRule::Linear(3)),
            ("odd", JumpRule::AffineOdd),
            ("factorial", JumpRule::Factorial),
            ("geom:2", JumpRule::Geometric(2)),
            ("explicit:[1,4,9]", JumpRule::Explicit(vec![1, 4, 9])),
        ] {
            assert_eq!(name.parse::<JumpRule>().unwrap(), rule);
            assert_eq!(rule.to_string(), name);
        }
        assert_eq!("pow:2".parse::<JumpRule>().unwrap(), JumpRule::square());
        for bad in ["squares", "pow:0", "linear:0", "geom:1", "explicit:[3,1]", "explicit:1,2", "pow:x"] {
            assert!(bad.parse::<JumpRule>().is_err(), "{bad}");
        }
    }

    #[test]
    fn dragnet_examples() {
        let t = JumpTable::new(JumpRule::square(), 100).unwrap();
        assert!(t.dragnet(1).unwrap().is_empty());
        assert_eq!(t.dragnet(17).unwrap(), vec![1, 8, 13, 16]);
        assert_eq!(t.dragnet(5).unwrap(), vec![1, 4]);
        assert!(t.dragnet(200).is_err());
    }

    #[test]
    fn horizon_is_enforced() {
        let t = JumpTable::new(JumpRule::square(), 50).unwrap();
        assert!(t.contains(49).unwrap());
        assert!(!t.contains(50).unwrap());
        assert!(matches!(t.contains(51), Err(Error::BeyondHorizon { .. })));
        assert_eq!(t.index_of(36).unwrap(), Some(6));
    }

    #[test]
    fn square_interval_examples() {
        assert_eq!(square_interval(10, 5).start, 197);
        let iv = square_interval(4, 1);
        assert_eq!((iv.start, iv.end, iv.len()), (17, 25, 9));
        assert_eq!(square_interval(5, 2).len(), 13);
    }

    #[test]
    fn square_geometry_matches_closed_form_and_scan() {
        for d in 2..=25 {
            let horizon = (d + 51) * (d + 51);
            let t = JumpTable::new(JumpRule::square(), horizon).unwrap();
            let geo = interval_geometry(&t, d);
            assert!(geo.len() >= 50);
            // brute-force scan of c(j) increments
            let mut scanned = Vec::new();
            let mut prev = 0;
            for j in 1..=horizon {
                let c = (1..).take_while(|n| n * n < j).count();
                assert_eq!(c, t.dragnet_size(j).unwrap());
                if c != prev && c >= d {
                    scanned.push(j);
                }
                prev = c;
            }
            for i in 1..=50 {
                let iv = geo[i - 1];
                assert_eq!(iv, square_interval(d, i));
                assert_eq!(iv.start, scanned[i - 1]);
                assert_eq!(iv.len(), 2 * (d + i) - 1);
                assert_eq!(geo[i].len(), iv.len() + 2);
            }
        }
    }

    #[test]
    fn profile_interval_index() {
        let t = JumpTable::new(JumpRule::square(), 400).unwrap();
        let p = t.profile(4);
        assert_eq!(p.interval_index(16).unwrap(), None);
        assert_eq!(p.interval_index(17).unwrap(), Some(1));
        assert_eq!(p.interval_index(25).unwrap(), Some(1));
        assert_eq!(p.interval_index(26).unwrap(), Some(2));
        assert_eq!(p.jump_sites().take(3).collect::<Vec<_>>(), vec![17, 26, 37]);
    }

    fn any_rule() -> impl Strategy<Value = JumpRule> {
        prop_oneof![
            (1u32..5).prop_map(JumpRule::Monomial),
            (1u64..6).prop_map(JumpRule::Linear),
            Just(JumpRule::AffineOdd),
            Just(JumpRule::Factorial),
            (2u64..6).prop_map(JumpRule::Geometric),
            proptest::collection::btree_set(1u64..300, 1..20)
                .prop_map(|s| JumpRule::Explicit(s.into_iter().collect())),
        ]
    }

    proptest! {
        #[test]
        fn dragnet_size_matches_enumeration(rule in any_rule(), j in 1usize..300) {
            let t = JumpTable::new(rule.clone(), 300).unwrap();
            let dragnet = t.dragnet(j).unwrap();
            let below = rule.enumerate(300).unwrap().into_iter().filter(|&f| (f as usize) < j).count();
            prop_assert_eq!(dragnet.len(), below);
            prop_assert!(dragnet.iter().all(|&k| k >= 1 && k < j));
            prop_assert!(dragnet.iter().all(|&k| t.contains(j - k).unwrap()));
        }

        #[test]
        fn enumeration_is_strictly_increasing(rule in any_rule(), m in 1u64..100_000) {
            let v = rule.enumerate(m).unwrap();
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(v.iter().all(|&f| f >= 1 && f <= m));
            for x in 1..=m.min(2000) {
                prop_assert_eq!(v.contains(&x), rule.values().map(|(_, f)| f).take_while(|&f| f <= x).any(|f| f == x));
            }
        }

        #[test]
        fn display_round_trips(rule in any_rule()) {
            prop_assert_eq!(rule.to_string().parse::<JumpRule>().unwrap(), rule);
        }
    }
}
