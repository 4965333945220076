use super::{Budget, SearchMode, SearchReport, Verdict};
use crate::error::{Error, Result};
use crate::genrand::check_alphabet;
use crate::jumps::{JumpRule, JumpTable};

/// Exhausts the assignments of the window `{-R, ..., R}` with `x_0 = 1`.
pub fn two_sided_window(d: usize, rule: &JumpRule, radius: usize, budget: Budget) -> Result<SearchReport> {
    let table = JumpTable::new(rule.clone(), (2 * radius).max(1))?;
    two_sided_window_with(&table, d, radius, budget)
}

/// Window search over a prebuilt table; the table must cover distance `2R`.
pub fn two_sided_window_with(
    table: &JumpTable,
    d: usize,
    radius: usize,
    budget: Budget,
) -> Result<SearchReport> {
    check_alphabet(d)?;
    if 2 * radius > table.horizon() {
        return Err(Error::BeyondHorizon {
            query: 2 * radius as u64,
            horizon: table.horizon() as u64,
        });
    }
    let width = 2 * radius + 1;
    let full = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    let mut w = Window {
        jumps: table.jumps(),
        width,
        masks: vec![full; width],
        value: vec![None; width],
        undo: Vec::new(),
        distinct: 0,
        d,
        nodes: 0,
        max_nodes: budget.max_nodes,
        exhausted_budget: false,
    };
    let found = w.assign_and_search(radius, 0);
    let verdict = if found {
        Verdict::WindowSatisfiable { radius }
    } else if w.exhausted_budget {
        Verdict::ReachedBudget { depth: 0 }
    } else {
        Verdict::AllFinite { max_length: 0 }
    };
    let witness = found.then(|| w.value.iter().map(|v| v.expect("assigned") + 1).collect());
    Ok(SearchReport {
        mode: SearchMode::TwoSidedWindow,
        verdict,
        nodes_explored: w.nodes,
        witness,
    })
}

/// Constraint search with most-constrained-site ordering. Symbols not yet
/// used anywhere are interchangeable, so only the smallest unused one is
/// tried at each choice.
struct Window<'a> {
    jumps: &'a [usize],
    width: usize,
    masks: Vec<u64>,
    value: Vec<Option<u8>>,
    undo: Vec<(usize, u64)>,
    distinct: u32,
    d: usize,
    nodes: u64,
    max_nodes: u64,
    exhausted_budget: bool,
}

impl Window<'_> {
    /// Assigns `s` at `pos`, propagates, and returns false on a wipe-out.
    fn assign(&mut self, pos: usize, s: u8) -> bool {
        self.value[pos] = Some(s);
        let bit = 1u64 << s;
        let mut ok = true;
        for &f in self.jumps {
            if f >= self.width {
                break;
            }
            for j in [pos.checked_sub(f), Some(pos + f).filter(|&j| j < self.width)]
                .into_iter()
                .flatten()
            {
                let m = self.masks[j];
                if m & bit != 0 {
                    self.undo.push((j, m));
                    self.masks[j] = m & !bit;
                    if m & !bit == 0 && self.value[j].is_none() {
                        ok = false;
                    }
                }
            }
        }
        ok
    }

    fn assign_and_search(&mut self, pos: usize, s: u8) -> bool {
        self.nodes += 1;
        let mark = self.undo.len();
        let distinct = self.distinct;
        self.distinct = self.distinct.max(s as u32 + 1);
        if self.assign(pos, s) && self.search() {
            return true;
        }
        while self.undo.len() > mark {
            let (j, m) = self.undo.pop().expect("undo entry");
            self.masks[j] = m;
        }
        self.value[pos] = None;
        self.distinct = distinct;
        false
    }

    fn search(&mut self) -> bool {
        let centre = self.width / 2;
        let next = (0..self.width)
            .filter(|&p| self.value[p].is_none())
            .min_by_key(|&p| (self.masks[p].count_ones(), p.abs_diff(centre), p));
        let Some(pos) = next else {
            return true;
        };
        let mut choices = self.masks[pos];
        if (self.distinct as usize) < self.d {
            choices &= (1u64 << (self.distinct + 1)) - 1;
        }
        while choices != 0 {
            if self.nodes >= self.max_nodes {
                self.exhausted_budget = true;
                return false;
            }
            let s = choices.trailing_zeros() as u8;
            choices &= choices - 1;
            if self.assign_and_search(pos, s) {
                return true;
            }
            if self.exhausted_budget {
                return false;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genrand::validate;

    #[test]
    fn ternary_square_window_is_unsatisfiable() {
        let r = two_sided_window(3, &JumpRule::square(), 25, Budget::default()).unwrap();
        assert_eq!(r.verdict, Verdict::AllFinite { max_length: 0 });
    }

    #[test]
    fn binary_even_window_is_unsatisfiable() {
        let r = two_sided_window(2, &JumpRule::Linear(2), 8, Budget::default()).unwrap();
        assert_eq!(r.verdict, Verdict::AllFinite { max_length: 0 });
    }

    #[test]
    fn binary_odd_window_is_alternating() {
        let r = two_sided_window(2, &JumpRule::AffineOdd, 10, Budget::default()).unwrap();
        assert_eq!(r.verdict, Verdict::WindowSatisfiable { radius: 10 });
        let w = r.witness.unwrap();
        assert_eq!(w.len(), 21);
        assert!(validate(&w, &JumpRule::AffineOdd));
        // x_0 = 1 sits at offset R = 10, so even offsets carry 1
        let expected: Vec<u8> = (0..21).map(|k| if k % 2 == 0 { 1 } else { 2 }).collect();
        assert_eq!(w, expected);
    }

    #[test]
    fn small_window_of_satisfiable_case() {
        let r = two_sided_window(4, &JumpRule::square(), 10, Budget::default()).unwrap();
        assert!(matches!(r.verdict, Verdict::WindowSatisfiable { .. }));
        assert!(validate(&r.witness.unwrap(), &JumpRule::square()));
    }

    #[test]
    fn radius_beyond_table_is_rejected() {
        let table = JumpTable::new(JumpRule::square(), 30).unwrap();
        assert!(two_sided_window_with(&table, 3, 16, Budget::default()).is_err());
    }
}
