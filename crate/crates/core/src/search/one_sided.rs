use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Budget, SearchMode, SearchReport, Verdict};
use crate::error::{Error, Result};
use crate::genrand::check_alphabet;
use crate::jumps::{JumpRule, JumpTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneSidedOptions {
    pub budget: Budget,
    /// Explore only strings whose symbols first appear in increasing order.
    pub canonical: bool,
    /// Worker threads. Never changes the result unless the node budget runs
    /// out, in which case the longest string seen may differ.
    pub workers: usize,
    /// Interleave randomized restarts with the exhaustive sweep. They find
    /// long strings early, which tightens the bound; the sweep stays
    /// exhaustive either way.
    pub probes: bool,
}

impl Default for OneSidedOptions {
    fn default() -> Self {
        OneSidedOptions {
            budget: Budget::default(),
            canonical: true,
            workers: 1,
            probes: true,
        }
    }
}

/// Depth-first search over all legal one-sided strings, canonical colorings
/// only.
pub fn exhaustive_one_sided(d: usize, rule: &JumpRule, budget: Budget) -> Result<SearchReport> {
    exhaustive_one_sided_with(
        d,
        rule,
        OneSidedOptions {
            budget,
            ..OneSidedOptions::default()
        },
    )
}

/// Depth at which the tree is cut into independent subtrees.
const SPLIT_DEPTH: usize = 12;
/// Restart lengths are this unit times the Luby sequence.
const PROBE_UNIT: u64 = 1024;
/// Spread of the random perturbation of the log-cost in restarts.
const PROBE_NOISE: f64 = 6.0;
const PROBE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn exhaustive_one_sided_with(
    d: usize,
    rule: &JumpRule,
    opts: OneSidedOptions,
) -> Result<SearchReport> {
    check_alphabet(d)?;
    let limit = opts.budget.max_depth.max(1);
    let table = JumpTable::new(rule.clone(), limit)?;
    let shared = Shared {
        nodes: AtomicU64::new(0),
        max_nodes: opts.budget.max_nodes,
        best_len: AtomicUsize::new(0),
        witness: Mutex::new(Vec::new()),
        hit_depth: AtomicBool::new(false),
    };

    let pristine = Dfs::new(d, table.jumps(), limit, opts.canonical);
    let mut root = pristine.clone();
    let mut frontier = Vec::new();
    let mut sweep = Sweep::new(&root);
    let mut complete = sweep.step(&mut root, &shared, u64::MAX, true, Some((SPLIT_DEPTH, &mut frontier)));

    if !frontier.is_empty() && complete {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        complete = pool.install(|| {
            frontier
                .par_iter()
                .enumerate()
                .map(|(k, prefix)| {
                    let mut dfs = pristine.clone();
                    dfs.replay(prefix);
                    let seed = opts.probes.then_some(PROBE_SEED ^ k as u64);
                    dfs.exhaust(&pristine, &shared, seed)
                })
                .collect::<Vec<bool>>()
                .into_iter()
                .all(|c| c)
        });
    }

    let best_len = shared.best_len.load(Ordering::Relaxed);
    let verdict = if complete && !shared.hit_depth.load(Ordering::Relaxed) {
        Verdict::AllFinite {
            max_length: best_len,
        }
    } else {
        Verdict::ReachedBudget { depth: best_len }
    };
    let witness = shared.witness.into_inner().expect("witness lock");
    Ok(SearchReport {
        mode: SearchMode::OneSidedExhaustive,
        verdict,
        nodes_explored: shared.nodes.load(Ordering::Relaxed).min(opts.budget.max_nodes),
        witness: Some(witness.iter().map(|s| s + 1).collect()),
    })
}

/// `luby(k)` for `k >= 1`: 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut k: u64) -> u64 {
    loop {
        let bits = 64 - k.leading_zeros();
        if k == (1 << bits) - 1 {
            return 1 << (bits - 1);
        }
        k -= (1 << (bits - 1)) - 1;
    }
}

/// Cost of removing one candidate from a site with `k` left.
const WEIGHT: [u64; 65] = {
    let mut w = [0u64; 65];
    let mut k = 1;
    while k < 65 {
        w[k] = if k < 17 { 1 << (2 * (17 - k)) } else { 1 };
        k += 1;
    }
    w
};

/// State common to all subtrees: the node budget and the incumbent.
struct Shared {
    nodes: AtomicU64,
    max_nodes: u64,
    best_len: AtomicUsize,
    /// Lexicographically smallest string of length `best_len` seen.
    witness: Mutex<Vec<u8>>,
    hit_depth: AtomicBool,
}

impl Shared {
    fn take_node(&self) -> bool {
        !self.hit_depth.load(Ordering::Relaxed)
            && self.nodes.fetch_add(1, Ordering::Relaxed) < self.max_nodes
    }

    fn exhausted(&self) -> bool {
        self.hit_depth.load(Ordering::Relaxed)
            || self.nodes.load(Ordering::Relaxed) >= self.max_nodes
    }

    fn bound(&self) -> usize {
        self.best_len.load(Ordering::Relaxed)
    }

    /// Keeps the longest string, the smallest one among equals. Every
    /// maximal string is offered before an exhausted search ends, so the
    /// final witness does not depend on visiting order.
    fn offer(&self, seq: &[u8]) {
        if seq.len() < self.bound() {
            return;
        }
        let mut w = self.witness.lock().expect("witness lock");
        let cur = self.best_len.load(Ordering::Relaxed);
        if seq.len() > cur || seq < &w[..] {
            w.clear();
            w.extend_from_slice(seq);
            self.best_len.store(seq.len(), Ordering::Relaxed);
        }
    }
}

struct Frame {
    remaining: u64,
    undo_mark: usize,
    distinct_before: u32,
    assigned: bool,
    /// Earliest emptied future site on entry to this frame.
    wipe_before: usize,
}

/// Candidate-set propagation over sites `1..=limit`.
#[derive(Clone)]
struct Dfs<'a> {
    d: usize,
    jumps: &'a [usize],
    limit: usize,
    canonical: bool,
    masks: Vec<u64>,
    seq: Vec<u8>,
    distinct: u32,
    undo: Vec<(usize, u64)>,
    /// Earliest future site with no candidates left; no extension of the
    /// current prefix can reach it. `usize::MAX` when there is none.
    wipe: usize,
    /// Perturbs the symbol order; set only on restart copies.
    noise: Option<ChaCha8Rng>,
}

impl<'a> Dfs<'a> {
    fn new(d: usize, jumps: &'a [usize], limit: usize, canonical: bool) -> Self {
        let full = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        Dfs {
            d,
            jumps,
            limit,
            canonical,
            masks: vec![full; limit + 1],
            seq: Vec::with_capacity(limit),
            distinct: 0,
            undo: Vec::new(),
            wipe: usize::MAX,
            noise: None,
        }
    }

    /// Least-constraining symbol: smallest weighted loss of candidates at
    /// the sites it would block, tight sites weighing most. Ties go to the
    /// smaller symbol.
    fn pick(&mut self, site: usize, remaining: u64) -> u32 {
        if remaining & (remaining - 1) == 0 {
            return remaining.trailing_zeros();
        }
        let room = self.limit - site;
        let mut best = (f64::INFINITY, 0);
        let mut rest = remaining;
        while rest != 0 {
            let s = rest.trailing_zeros();
            rest &= rest - 1;
            let bit = 1u64 << s;
            let mut cost = 0u64;
            for &f in self.jumps {
                if f > room {
                    break;
                }
                let m = self.masks[site + f];
                if m & bit != 0 {
                    cost += WEIGHT[m.count_ones() as usize];
                }
            }
            let score = match self.noise.as_mut() {
                Some(rng) => (1.0 + cost as f64).ln() + PROBE_NOISE * rng.random::<f64>(),
                None => cost as f64,
            };
            if score < best.0 {
                best = (score, s);
            }
        }
        best.1
    }

    fn allowed(&self, site: usize) -> u64 {
        let mask = self.masks[site];
        if self.canonical && (self.distinct as usize) < self.d {
            mask & ((1u64 << (self.distinct + 1)) - 1)
        } else {
            mask
        }
    }

    fn assign(&mut self, s: u8) {
        let site = self.seq.len() + 1;
        let bit = 1u64 << s;
        let room = self.limit - site;
        for &f in self.jumps {
            if f > room {
                break;
            }
            let j = site + f;
            let m = self.masks[j];
            if m & bit != 0 {
                self.undo.push((j, m));
                self.masks[j] = m & !bit;
                if m == bit {
                    self.wipe = self.wipe.min(j);
                }
            }
        }
        self.seq.push(s);
        self.distinct = self.distinct.max(s as u32 + 1);
    }

    fn undo_to(&mut self, mark: usize, distinct_before: u32, wipe_before: usize) {
        while self.undo.len() > mark {
            let (j, m) = self.undo.pop().expect("undo entry");
            self.masks[j] = m;
        }
        self.seq.pop();
        self.distinct = distinct_before;
        self.wipe = wipe_before;
    }

    /// Assigns a fixed prefix (0-based symbols) without counting nodes.
    fn replay(&mut self, prefix: &[u8]) {
        for &s in prefix {
            self.assign(s);
        }
    }

    /// Sweeps the subtree below the current prefix; with a seed, slices of
    /// the sweep alternate with equally long randomized restarts from the
    /// empty string (`root`), restart `k` running `PROBE_UNIT * luby(k)`
    /// nodes. Returns whether the subtree was exhausted.
    fn exhaust(&mut self, root: &Dfs<'a>, shared: &Shared, seed: Option<u64>) -> bool {
        let mut sweep = Sweep::new(self);
        shared.offer(&self.seq);
        let Some(seed) = seed else {
            return sweep.step(self, shared, u64::MAX, true, None);
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for round in 1.. {
            if shared.exhausted() {
                return false;
            }
            let quota = PROBE_UNIT * luby(round);
            let mut probe = root.clone();
            probe.noise = Some(ChaCha8Rng::seed_from_u64(rng.random()));
            Sweep::new(&probe).step(&mut probe, shared, quota, false, None);
            if sweep.step(self, shared, quota, true, None) {
                return true;
            }
        }
        unreachable!()
    }
}

/// A resumable depth-first sweep below the prefix present at creation.
struct Sweep {
    base: usize,
    frames: Vec<Frame>,
}

impl Sweep {
    fn new(dfs: &Dfs) -> Self {
        let base = dfs.seq.len();
        let frames = if base < dfs.limit {
            vec![Frame {
                remaining: dfs.allowed(base + 1),
                undo_mark: dfs.undo.len(),
                distinct_before: dfs.distinct,
                assigned: false,
                wipe_before: dfs.wipe,
            }]
        } else {
            Vec::new()
        };
        Sweep { base, frames }
    }

    /// Explores up to `quota` more nodes and reports whether the sweep is
    /// finished. Branches that cannot reach the incumbent length are cut;
    /// with `keep_ties` branches that can only equal it survive too.
    fn step(
        &mut self,
        dfs: &mut Dfs,
        shared: &Shared,
        quota: u64,
        keep_ties: bool,
        mut frontier: Option<(usize, &mut Vec<Vec<u8>>)>,
    ) -> bool {
        let mut taken = 0u64;
        let frames = &mut self.frames;
        while let Some(top) = frames.len().checked_sub(1) {
            let site = self.base + frames.len();
            if frames[top].assigned {
                let f = &frames[top];
                let (mark, before, wipe) = (f.undo_mark, f.distinct_before, f.wipe_before);
                dfs.undo_to(mark, before, wipe);
                frames[top].assigned = false;
            }
            if frames[top].remaining == 0 {
                frames.pop();
                continue;
            }
            if taken >= quota || !shared.take_node() {
                return false;
            }
            taken += 1;
            let s = dfs.pick(site, frames[top].remaining);
            frames[top].remaining &= !(1u64 << s);
            frames[top].undo_mark = dfs.undo.len();
            frames[top].distinct_before = dfs.distinct;
            frames[top].wipe_before = dfs.wipe;
            frames[top].assigned = true;
            dfs.assign(s as u8);

            shared.offer(&dfs.seq);
            if site == dfs.limit {
                shared.hit_depth.store(true, Ordering::Relaxed);
                return false;
            }
            // bound: every extension stops before the emptied site
            if dfs.wipe != usize::MAX {
                let reach = dfs.wipe - 1;
                let bound = shared.bound();
                if reach < bound || (!keep_ties && reach == bound) {
                    continue;
                }
            }
            if let Some((stop, ref mut out)) = frontier {
                if site == stop {
                    out.push(dfs.seq.clone());
                    continue;
                }
            }
            frames.push(Frame {
                remaining: dfs.allowed(site + 1),
                undo_mark: dfs.undo.len(),
                distinct_before: dfs.distinct,
                assigned: false,
                wipe_before: dfs.wipe,
            });
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genrand::validate;

    fn max_len(report: &SearchReport) -> usize {
        match report.verdict {
            Verdict::AllFinite { max_length } => max_length,
            ref v => panic!("not exhausted: {v}"),
        }
    }

    fn opts(canonical: bool, workers: usize, probes: bool) -> OneSidedOptions {
        OneSidedOptions {
            budget: Budget::default(),
            canonical,
            workers,
            probes,
        }
    }

    #[test]
    fn luby_sequence() {
        let v: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(v, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn binary_square_longest_is_four() {
        let r = exhaustive_one_sided(2, &JumpRule::square(), Budget::default()).unwrap();
        assert_eq!(max_len(&r), 4);
        assert_eq!(r.witness.as_deref(), Some(&[1u8, 2, 1, 2][..]));
    }

    #[test]
    fn canonical_reduction_keeps_the_maximum() {
        for d in 2..=3 {
            let sq = JumpRule::square();
            let canon = exhaustive_one_sided_with(d, &sq, opts(true, 1, false)).unwrap();
            let full = exhaustive_one_sided_with(d, &sq, opts(false, 1, false)).unwrap();
            assert_eq!(max_len(&canon), max_len(&full));
            assert!(full.nodes_explored > canon.nodes_explored);
        }
    }

    #[test]
    fn restarts_do_not_change_the_maximum() {
        for d in 2..=4 {
            let sq = JumpRule::square();
            let plain = exhaustive_one_sided_with(d, &sq, opts(true, 1, false)).unwrap();
            let probed = exhaustive_one_sided_with(d, &sq, opts(true, 1, true)).unwrap();
            assert_eq!(max_len(&plain), max_len(&probed));
        }
    }

    #[test]
    fn witness_is_legal() {
        let r = exhaustive_one_sided(3, &JumpRule::square(), Budget::default()).unwrap();
        let w = r.witness.clone().unwrap();
        assert_eq!(w.len(), max_len(&r));
        assert!(validate(&w, &JumpRule::square()));
    }

    #[test]
    fn depth_limit_is_a_budget_verdict() {
        let r = exhaustive_one_sided(
            3,
            &JumpRule::AffineOdd,
            Budget {
                max_nodes: 1_000_000,
                max_depth: 50,
            },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::ReachedBudget { depth: 50 });
        assert!(validate(&r.witness.unwrap(), &JumpRule::AffineOdd));
    }

    #[test]
    fn node_limit_is_a_budget_verdict() {
        let r = exhaustive_one_sided(4, &JumpRule::square(), Budget::nodes(100)).unwrap();
        assert!(r.verdict.is_budget());
        assert_eq!(r.nodes_explored, 100);
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        for d in 2..=4 {
            let sq = JumpRule::square();
            let one = exhaustive_one_sided_with(d, &sq, opts(true, 1, true)).unwrap();
            let three = exhaustive_one_sided_with(d, &sq, opts(true, 3, true)).unwrap();
            assert_eq!(one.verdict, three.verdict);
            assert_eq!(one.witness, three.witness);
            let plain = exhaustive_one_sided_with(d, &sq, opts(true, 1, false)).unwrap();
            assert_eq!(one.witness, plain.witness);
        }
    }
}
