use super::{SearchMode, SearchReport, Verdict};
use crate::error::{Error, Result};
use crate::jumps::JumpRule;

/// Looks for the least `n` with `m | f(n)` among `f(n) <= horizon`.
///
/// A hit rules out periodic sequences of period `m`: the first symbol of one
/// block would meet its own copy `f(n) / m` blocks later.
pub fn divisibility_check(rule: &JumpRule, m: u64, horizon: u64) -> Result<SearchReport> {
    if m == 0 {
        return Err(Error::Config("candidate period must be >= 1".into()));
    }
    rule.check()?;
    let mut nodes = 0;
    let mut verdict = Verdict::PeriodicityPossible { bound: horizon };
    for (n, value) in rule.values() {
        if value > horizon {
            break;
        }
        nodes += 1;
        if value % m == 0 {
            verdict = Verdict::PeriodicityExcluded { n, value };
            break;
        }
    }
    Ok(SearchReport {
        mode: SearchMode::DivisibilityCheck,
        verdict,
        nodes_explored: nodes,
        witness: None,
    })
}

/// Smallest eventual period of `sequence`.
///
/// The last half of the string must repeat with period `p` at least twice;
/// the periodic tail is then extended leftwards as far as it holds, and the
/// reported period string starts where the tail starts.
pub fn period_detect(sequence: &[u8], max_period: usize) -> Result<SearchReport> {
    if max_period == 0 || sequence.len() < 2 * max_period {
        return Err(Error::InvalidSequence(format!(
            "period detection up to {max_period} needs at least {} symbols, got {}",
            2 * max_period,
            sequence.len()
        )));
    }
    let len = sequence.len();
    let half = len / 2;
    let tail_len = len - half;
    let mut nodes = 0u64;
    for p in 1..=max_period.min(tail_len / 2) {
        nodes += 1;
        if (half..len - p).all(|k| sequence[k] == sequence[k + p]) {
            let mut start = half;
            while start > 0 && sequence[start - 1] == sequence[start - 1 + p] {
                start -= 1;
            }
            return Ok(SearchReport {
                mode: SearchMode::PeriodDetect,
                verdict: Verdict::PeriodFound {
                    period: sequence[start..start + p].to_vec(),
                    start: start + 1,
                },
                nodes_explored: nodes,
                witness: None,
            });
        }
    }
    Ok(SearchReport {
        mode: SearchMode::PeriodDetect,
        verdict: Verdict::NoPeriod { max_period },
        nodes_explored: nodes,
        witness: None,
    })
}

/// Whether `a` and `b` are rotations of each other.
pub fn same_cycle(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..a.len()).any(|r| a[r..].iter().chain(&a[..r]).eq(b)))
}
