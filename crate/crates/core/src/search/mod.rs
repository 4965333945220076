//! Exhaustive and structural searches: maximal one-sided length, two-sided
//! window satisfiability, periodicity exclusion by divisibility, and eventual
//! period detection.
//!
//! Budgets are verdicts, not errors: running out of nodes or depth yields
//! [`Verdict::ReachedBudget`] and never an `AllFinite` claim.

mod one_sided;
mod period;
mod window;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use one_sided::{exhaustive_one_sided, exhaustive_one_sided_with, OneSidedOptions};
pub use period::{divisibility_check, period_detect, same_cycle};
pub use window::{two_sided_window, two_sided_window_with};

pub const DEFAULT_MAX_NODES: u64 = 1_000_000_000;
pub const DEFAULT_MAX_DEPTH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: DEFAULT_MAX_NODES,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl Budget {
    pub fn nodes(max_nodes: u64) -> Self {
        Budget {
            max_nodes,
            ..Budget::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    OneSidedExhaustive,
    TwoSidedWindow,
    PeriodDetect,
    DivisibilityCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The tree was exhausted; no legal string is longer than `max_length`.
    /// For window searches `max_length = 0` means the window is unsatisfiable.
    AllFinite { max_length: usize },
    /// The node or depth budget ran out; `depth` is the longest string seen.
    ReachedBudget { depth: usize },
    /// The window admits a legal assignment (the witness).
    WindowSatisfiable { radius: usize },
    /// Eventual period, starting at 1-based site `start`.
    PeriodFound { period: Vec<u8>, start: usize },
    /// No eventual period up to `max_period`.
    NoPeriod { max_period: usize },
    /// `m | f(n)`: periodic sequences of period `m` are impossible.
    PeriodicityExcluded { n: u64, value: u64 },
    /// No `f(n) <= bound` is divisible by `m`.
    PeriodicityPossible { bound: u64 },
}

impl Verdict {
    /// Whether the verdict stopped on a budget rather than a conclusion.
    pub fn is_budget(&self) -> bool {
        matches!(self, Verdict::ReachedBudget { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::AllFinite { max_length } => write!(f, "AllFinite max_length={max_length}"),
            Verdict::ReachedBudget { depth } => write!(f, "ReachedBudget depth={depth}"),
            Verdict::WindowSatisfiable { radius } => write!(f, "WindowSatisfiable radius={radius}"),
            Verdict::PeriodFound { period, start } => {
                let text: String = if period.iter().all(|&s| s <= 9) {
                    period.iter().map(|s| char::from(b'0' + s)).collect()
                } else {
                    period.iter().map(u8::to_string).collect::<Vec<_>>().join(",")
                };
                write!(f, "PeriodFound period={text} length={} start={start}", period.len())
            }
            Verdict::NoPeriod { max_period } => write!(f, "NoPeriod max_period={max_period}"),
            Verdict::PeriodicityExcluded { n, value } => {
                write!(f, "PeriodicityExcluded n={n} f(n)={value}")
            }
            Verdict::PeriodicityPossible { bound } => write!(f, "PeriodicityPossible bound={bound}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub mode: SearchMode,
    pub verdict: Verdict,
    pub nodes_explored: u64,
    /// Longest string found (one-sided), the window assignment from `-R` to
    /// `R` (two-sided), or `None`.
    pub witness: Option<Vec<u8>>,
}
