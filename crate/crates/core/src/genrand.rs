//! One-sided sequence generation: the uniform random generator, its variant
//! that records the terminal `(i, n)` pair, and the greedy lexicographic
//! generator.
//!
//! Candidate sets are `u64` bit masks, so the alphabet is limited to 64
//! symbols. Symbols are reported as `1..=d`.
//!
//! Random draws use ChaCha8 seeded through `SeedableRng::seed_from_u64`. A
//! uniform draw from a mask with `k` set bits takes `r = random_range(0..k)`
//! and returns the `r`-th set bit counting from the least significant end.
//! This mapping is part of the reproducibility contract.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::{JumpRule, JumpTable};

pub const MAX_ALPHABET: usize = 64;

/// Which generator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Uniform random choice; halts at the first site with no candidates.
    V20,
    /// Uniform random choice; halts at the first update that empties a site.
    V21,
    /// Smallest allowed symbol at every site.
    Lexicographic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub d: usize,
    pub rule: JumpRule,
    pub max_len: usize,
    pub seed: u64,
    pub variant: Variant,
}

impl GenConfig {
    pub fn new(d: usize, rule: JumpRule, max_len: usize, seed: u64, variant: Variant) -> Self {
        GenConfig {
            d,
            rule,
            max_len,
            seed,
            variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alphabet(self.d)?;
        if self.max_len == 0 {
            return Err(Error::ZeroLength);
        }
        self.rule.check()
    }

    pub fn table(&self) -> Result<JumpTable> {
        self.validate()?;
        JumpTable::new(self.rule.clone(), self.max_len)
    }
}

/// Default maximum length: `max(2000, 4 * round(d^(5/2)))`.
pub fn default_max_len(d: usize) -> usize {
    let scale = (d as f64).powf(2.5).round() as usize;
    2000.max(4 * scale)
}

pub(crate) fn check_alphabet(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::AlphabetTooSmall(d))
    } else if d > MAX_ALPHABET {
        Err(Error::AlphabetTooLarge(d))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Halted,
    FullLength,
}

/// The assignment that emptied a future site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Terminal {
    /// Site whose assignment caused the emptying.
    pub site: usize,
    /// 1-based jump index `n`; the emptied site is `site + f(n)`.
    pub jump_index: usize,
    pub emptied: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenOutcome {
    pub status: Status,
    /// Site with an empty candidate set (V20 and lexicographic runs).
    pub halt_site: Option<usize>,
    /// Terminal record (V21 runs that halted).
    pub terminal: Option<Terminal>,
    /// Number of symbols assigned.
    pub length: usize,
    pub sequence: Option<Vec<u8>>,
}

/// Reusable generation state for one `(table, d, M)`.
///
/// Each run is single threaded; clone or build one generator per worker.
#[derive(Debug, Clone)]
pub struct Generator<'a> {
    jumps: &'a [usize],
    d: usize,
    max_len: usize,
    full: u64,
    masks: Vec<u64>,
    symbols: Vec<u8>,
}

impl<'a> Generator<'a> {
    pub fn new(table: &'a JumpTable, d: usize, max_len: usize) -> Result<Self> {
        check_alphabet(d)?;
        if max_len == 0 {
            return Err(Error::ZeroLength);
        }
        if table.horizon() < max_len {
            return Err(Error::BeyondHorizon {
                query: max_len as u64,
                horizon: table.horizon() as u64,
            });
        }
        let full = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        Ok(Generator {
            jumps: table.jumps(),
            d,
            max_len,
            full,
            masks: vec![full; max_len + 1],
            symbols: Vec::with_capacity(max_len),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    fn reset(&mut self) {
        self.masks.fill(self.full);
        self.symbols.clear();
    }

    /// Removes `bit` from every future site reachable from `i`.
    #[inline]
    fn update(&mut self, i: usize, bit: u64) {
        let limit = self.max_len - i;
        for &f in self.jumps {
            if f > limit {
                break;
            }
            self.masks[i + f] &= !bit;
        }
    }

    pub fn run(&mut self, variant: Variant, seed: u64, retain: bool) -> GenOutcome {
        match variant {
            Variant::V20 => self.run_v20(seed, retain),
            Variant::V21 => self.run_v21(seed, retain),
            Variant::Lexicographic => self.run_lex(),
        }
    }

    pub fn run_v20(&mut self, seed: u64, retain: bool) -> GenOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.reset();
        for i in 1..=self.max_len {
            let mask = self.masks[i];
            if mask == 0 {
                return self.outcome(Status::Halted, Some(i), None, retain);
            }
            let s = pick_uniform(mask, &mut rng);
            self.symbols.push(s as u8 + 1);
            self.update(i, 1 << s);
        }
        self.outcome(Status::FullLength, None, None, retain)
    }

    pub fn run_v21(&mut self, seed: u64, retain: bool) -> GenOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.reset();
        for i in 1..=self.max_len {
            let mask = self.masks[i];
            debug_assert_ne!(mask, 0, "an emptied site halts the run earlier");
            let s = pick_uniform(mask, &mut rng);
            self.symbols.push(s as u8 + 1);
            let bit = 1u64 << s;
            let limit = self.max_len - i;
            // jumps ascend, so the first emptied site has the smallest n
            for (k, &f) in self.jumps.iter().enumerate() {
                if f > limit {
                    break;
                }
                let j = i + f;
                let before = self.masks[j];
                let after = before & !bit;
                self.masks[j] = after;
                if after == 0 {
                    let terminal = Terminal {
                        site: i,
                        jump_index: k + 1,
                        emptied: j,
                    };
                    return self.outcome(Status::Halted, None, Some(terminal), retain);
                }
            }
        }
        self.outcome(Status::FullLength, None, None, retain)
    }

    pub fn run_lex(&mut self) -> GenOutcome {
        self.reset();
        for i in 1..=self.max_len {
            let mask = self.masks[i];
            if mask == 0 {
                return self.outcome(Status::Halted, Some(i), None, true);
            }
            let s = mask.trailing_zeros();
            self.symbols.push(s as u8 + 1);
            self.update(i, 1 << s);
        }
        self.outcome(Status::FullLength, None, None, true)
    }

    fn outcome(
        &self,
        status: Status,
        halt_site: Option<usize>,
        terminal: Option<Terminal>,
        retain: bool,
    ) -> GenOutcome {
        GenOutcome {
            status,
            halt_site,
            terminal,
            length: self.symbols.len(),
            sequence: retain.then(|| self.symbols.clone()),
        }
    }
}

/// Index of the `r`-th set bit of `mask`, `r` uniform over the set bits.
#[inline]
pub fn pick_uniform<R: Rng>(mask: u64, rng: &mut R) -> u32 {
    let k = mask.count_ones();
    let r = rng.random_range(0..k);
    nth_set_bit(mask, r)
}

#[inline]
pub fn nth_set_bit(mut mask: u64, r: u32) -> u32 {
    for _ in 0..r {
        mask &= mask - 1;
    }
    mask.trailing_zeros()
}

fn generate_variant(cfg: &GenConfig, variant: Variant) -> Result<GenOutcome> {
    let table = cfg.table()?;
    let mut gen = Generator::new(&table, cfg.d, cfg.max_len)?;
    Ok(gen.run(variant, cfg.seed, true))
}

/// Runs the uniform random generator and retains the sequence.
pub fn generate_v20(cfg: &GenConfig) -> Result<GenOutcome> {
    generate_variant(cfg, Variant::V20)
}

/// Runs the terminal-recording random generator and retains the sequence.
pub fn generate_v21(cfg: &GenConfig) -> Result<GenOutcome> {
    generate_variant(cfg, Variant::V21)
}

/// Greedy lexicographic generation. The seed is ignored.
pub fn generate_lex(cfg: &GenConfig) -> Result<GenOutcome> {
    generate_variant(cfg, Variant::Lexicographic)
}

pub fn generate(cfg: &GenConfig) -> Result<GenOutcome> {
    generate_variant(cfg, cfg.variant)
}

/// Checks `x_i != x_j` for every pair whose distance is a jump of `rule`.
///
/// Independent of the generators: it enumerates the jumps afresh and scans
/// all pairs.
pub fn validate(sequence: &[u8], rule: &JumpRule) -> bool {
    let len = sequence.len();
    if len < 2 {
        return true;
    }
    let Ok(jumps) = rule.enumerate(len as u64 - 1) else {
        return false;
    };
    for &f in &jumps {
        let f = f as usize;
        if sequence.iter().zip(&sequence[f..]).any(|(a, b)| a == b) {
            return false;
        }
    }
    true
}

/// Symbols as digits for `d <= 9`, comma separated otherwise.
pub fn format_sequence(sequence: &[u8], d: usize) -> String {
    if d <= 9 {
        sequence.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        let items: Vec<String> = sequence.iter().map(u8::to_string).collect();
        items.join(",")
    }
}

/// Parses a digit string (`121212`) or a comma-separated list (`1,10,2`).
pub fn parse_sequence(text: &str) -> Result<Vec<u8>> {
    let text = text.trim();
    let bad = || Error::InvalidSequence(text.to_string());
    if text.contains(',') {
        text.split(',')
            .map(|t| t.trim().parse::<u8>().ok().filter(|&s| s >= 1).ok_or_else(bad))
            .collect()
    } else {
        text.chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&v| v >= 1)
                    .map(|v| v as u8)
                    .ok_or_else(bad)
            })
            .collect()
    }
}
