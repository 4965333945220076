//! Monte Carlo harness and analysis.
//!
//! Sample `k` of a run with base seed `s` uses seed `s ^ k`, so every sample
//! is fixed by its index alone. Workers own disjoint index chunks and merge
//! plain count tables, which makes every result independent of the worker
//! count and of scheduling order.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genrand::{GenConfig, Generator, Status, Variant};
use crate::jumps::{interval_geometry, JumpTable};
use crate::model::{HaltingModel, Moments};

/// Samples per work unit.
const CHUNK: u64 = 4096;

/// Censoring fraction above which results are flagged.
pub const CENSOR_WARN_FRACTION: f64 = 1e-6;

/// Halting-site counts of the uniform random generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts[j]` halts at site `j`; index 0 unused.
    pub counts: Vec<u64>,
    pub samples: u64,
    /// Runs that reached full length `M`.
    pub censored: u64,
}

impl Histogram {
    fn empty(max_len: usize) -> Self {
        Histogram {
            counts: vec![0; max_len + 2],
            samples: 0,
            censored: 0,
        }
    }

    fn merge(mut self, other: Histogram) -> Histogram {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        self.censored += other.censored;
        self
    }

    pub fn halted(&self) -> u64 {
        self.samples - self.censored
    }

    pub fn count(&self, j: usize) -> u64 {
        self.counts.get(j).copied().unwrap_or(0)
    }

    /// `count(j) / samples`.
    pub fn freq(&self, j: usize) -> f64 {
        self.count(j) as f64 / self.samples as f64
    }

    /// `ln(count(j) + 1)`.
    pub fn log_count(&self, j: usize) -> f64 {
        (self.count(j) as f64 + 1.0).ln()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.samples as f64
    }

    /// Largest site with a nonzero count.
    pub fn last_site(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        let n = self.halted() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &c)| j as f64 * c as f64)
            .sum::<f64>()
            / n
    }

    /// Population standard deviation over halted runs.
    pub fn std(&self) -> f64 {
        let n = self.halted() as f64;
        let mean = self.mean();
        let var = self
            .counts
            .iter()
            .enumerate()
            .map(|(j, &c)| (j as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / n;
        var.sqrt()
    }

    /// Mode; the smallest site on ties.
    pub fn argmax(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (j, &c)| if c > best.1 { (j, c) } else { best })
            .0
    }

    pub fn moments(&self) -> Moments {
        let argmax = self.argmax();
        Moments {
            mean: self.mean(),
            std: self.std(),
            argmax,
            peak: self.freq(argmax),
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

fn chunks(samples: u64) -> Vec<(u64, u64)> {
    (0..samples.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(samples)))
        .collect()
}

/// Runs the uniform random generator on `samples` seeds.
pub fn run_sampling(cfg: &GenConfig, samples: u64, workers: usize) -> Result<Histogram> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let table = cfg.table()?;
    let pool = pool(workers)?;
    let hist = pool.install(|| {
        chunks(samples)
            .into_par_iter()
            .map(|(lo, hi)| -> Result<Histogram> {
                let mut gen = Generator::new(&table, cfg.d, cfg.max_len)?;
                let mut h = Histogram::empty(cfg.max_len);
                for k in lo..hi {
                    let out = gen.run_v20(cfg.seed ^ k, false);
                    match out.status {
                        Status::Halted => h.counts[out.halt_site.expect("halt site")] += 1,
                        Status::FullLength => h.censored += 1,
                    }
                }
                h.samples = hi - lo;
                Ok(h)
            })
            .try_reduce(|| Histogram::empty(cfg.max_len), |a, b| Ok(a.merge(b)))
    })?;
    if hist.censored_fraction() > CENSOR_WARN_FRACTION {
        warn!(
            "event=censored censored={} samples={} M={} hint=increase-max-len",
            hist.censored, hist.samples, cfg.max_len
        );
    }
    Ok(hist)
}

/// Lower edge of the terminal map at level `n`: `d^2 + 2(n-1)(d-1)`.
pub fn staircase_bound(d: usize, n: usize) -> usize {
    d * d + 2 * (n - 1) * (d - 1)
}

/// Sparse counts of terminal records `(i, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalMap {
    pub d: usize,
    /// Keyed by `(i, n)`.
    pub counts: BTreeMap<(usize, usize), u64>,
    pub samples: u64,
    pub censored: u64,
}

/// Geometric-decay diagnostic for one level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelDecay {
    pub n: usize,
    pub total: u64,
    pub i_min: usize,
    pub i_max: usize,
    /// Site with the largest count on this level.
    pub mode: usize,
    /// OLS slope of `ln(count)` against `i` over populated sites right of
    /// the mode; `None` with fewer than two such sites.
    pub slope: Option<f64>,
}

impl TerminalMap {
    fn empty(d: usize) -> Self {
        TerminalMap {
            d,
            counts: BTreeMap::new(),
            samples: 0,
            censored: 0,
        }
    }

    fn merge(mut self, other: TerminalMap) -> TerminalMap {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.samples += other.samples;
        self.censored += other.censored;
        self
    }

    pub fn levels(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for (&(_, n), &c) in &self.counts {
            *out.entry(n).or_insert(0) += c;
        }
        out
    }

    /// `i_min(n)` for every populated level.
    pub fn staircase(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &(i, n) in self.counts.keys() {
            out.entry(n).and_modify(|m: &mut usize| *m = (*m).min(i)).or_insert(i);
        }
        out
    }

    /// Number of records strictly left of the staircase.
    pub fn staircase_violations(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(&(i, n), _)| i < staircase_bound(self.d, n))
            .map(|(_, &c)| c)
            .sum()
    }

    /// Largest recorded `i` over all levels.
    pub fn max_site(&self) -> usize {
        self.counts.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn level_decay(&self) -> Vec<LevelDecay> {
        let mut by_level: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
        for (&(i, n), &c) in &self.counts {
            by_level.entry(n).or_default().push((i, c));
        }
        by_level
            .into_iter()
            .map(|(n, row)| {
                let (mode, _) = row
                    .iter()
                    .copied()
                    .fold((0, 0), |b, (i, c)| if c > b.1 { (i, c) } else { b });
                let right: Vec<(f64, f64)> = row
                    .iter()
                    .filter(|&&(i, _)| i >= mode)
                    .map(|&(i, c)| (i as f64, (c as f64).ln()))
                    .collect();
                LevelDecay {
                    n,
                    total: row.iter().map(|&(_, c)| c).sum(),
                    i_min: row.first().map_or(0, |r| r.0),
                    i_max: row.last().map_or(0, |r| r.0),
                    mode,
                    slope: ols(&right).map(|fit| fit.slope),
                }
            })
            .collect()
    }
}

/// Runs the terminal-recording generator on `samples` seeds.
pub fn run_terminal_map(cfg: &GenConfig, samples: u64, workers: usize) -> Result<TerminalMap> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let table = cfg.table()?;
    let pool = pool(workers)?;
    let map = pool.install(|| {
        chunks(samples)
            .into_par_iter()
            .map(|(lo, hi)| -> Result<TerminalMap> {
                let mut gen = Generator::new(&table, cfg.d, cfg.max_len)?;
                let mut m = TerminalMap::empty(cfg.d);
                for k in lo..hi {
                    let out = gen.run_v21(cfg.seed ^ k, false);
                    match out.terminal {
                        Some(t) => *m.counts.entry((t.site, t.jump_index)).or_insert(0) += 1,
                        None => m.censored += 1,
                    }
                }
                m.samples = hi - lo;
                Ok(m)
            })
            .try_reduce(|| TerminalMap::empty(cfg.d), |a, b| Ok(a.merge(b)))
    })?;
    if map.censored as f64 / map.samples as f64 > CENSOR_WARN_FRACTION {
        warn!(
            "event=censored censored={} samples={} M={} hint=increase-max-len",
            map.censored, map.samples, cfg.max_len
        );
    }
    Ok(map)
}

/// Ordinary least squares line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

pub fn ols(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points
        .iter()
        .map(|p| p.1 - (intercept + slope * p.0))
        .collect();
    Some(LineFit {
        slope,
        intercept,
        residuals,
    })
}

/// One `(j, empirical, model)` row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub j: usize,
    pub empirical: f64,
    pub model: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSlope {
    pub interval: usize,
    pub start: usize,
    pub end: usize,
    /// `ln(1 - p_i)`.
    pub model: f64,
    /// OLS slope of `ln(count)` over populated sites of the interval.
    pub empirical: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub empirical: Moments,
    pub model: Moments,
    pub mean_delta: f64,
    pub std_delta: f64,
    pub argmax_match: bool,
    pub slopes: Vec<IntervalSlope>,
    /// Model CDF is at least the empirical CDF at every site up to the
    /// common argmax (or the smaller of the two modes).
    pub model_cdf_leads: bool,
}

/// Pairs a model with an empirical histogram of the same `(d, rule)`.
pub fn compare(model: &HaltingModel, hist: &Histogram) -> Result<Comparison> {
    if hist.samples == 0 {
        return Err(Error::NoSamples);
    }
    let last = model.last_site().max(hist.last_site());
    let rows: Vec<CompareRow> = (1..=last)
        .map(|j| CompareRow {
            j,
            empirical: hist.freq(j),
            model: model.pmf(j),
        })
        .collect();
    let em = hist.moments();
    let mm = model.moments();

    let mut model_cdf = 0.0;
    let mut emp_cdf = 0.0;
    let mut leads = true;
    for row in rows.iter().take(em.argmax.min(mm.argmax)) {
        model_cdf += row.model;
        emp_cdf += row.empirical;
        // a few ulps of slack for the running sums
        if model_cdf + 1e-12 < emp_cdf {
            leads = false;
        }
    }

    let table = JumpTable::new(model.rule.clone(), last.max(1))?;
    let slopes = interval_geometry(&table, model.d)
        .into_iter()
        .zip(&model.p_table)
        .filter(|(iv, _)| iv.end <= last)
        .map(|(iv, row)| {
            let pts: Vec<(f64, f64)> = (iv.start..=iv.end)
                .filter(|&j| hist.count(j) > 0)
                .map(|j| (j as f64, (hist.count(j) as f64).ln()))
                .collect();
            IntervalSlope {
                interval: iv.index,
                start: iv.start,
                end: iv.end,
                model: row.q.ln(),
                empirical: ols(&pts).map(|f| f.slope),
            }
        })
        .collect();

    Ok(Comparison {
        rows,
        mean_delta: em.mean - mm.mean,
        std_delta: em.std - mm.std,
        argmax_match: em.argmax == mm.argmax,
        empirical: em,
        model: mm,
        slopes,
        model_cdf_leads: leads,
    })
}

/// Published halting-time statistics for the square rule: alphabet size,
/// empirical mean and standard deviation, model mean and standard deviation
/// (absent for `d = 20`), and the number of sampled sequences.
pub const REFERENCE_TABLE: [(usize, f64, f64, Option<(f64, f64)>, u64); 7] = [
    (4, 27.2542, 5.13374, Some((23.992, 5.23924)), 50_000_000),
    (5, 39.5672, 8.28983, Some((39.2172, 8.22516)), 80_000_000),
    (6, 60.8247, 13.5813, Some((59.3666, 11.9713)), 80_000_000),
    (7, 89.4687, 18.5912, Some((84.982, 16.5113)), 30_000_000),
    (10, 209.315, 38.2887, Some((199.562, 35.1369)), 20_000_000),
    (15, 566.87, 92.2796, Some((543.291, 84.4349)), 10_000_000),
    (20, 1156.57, 170.829, None, 5_000_000),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub d: usize,
    pub mean: f64,
    pub std: f64,
}

/// Where scaling points come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingSource {
    /// Exact model moments, square rule.
    ModelMoments,
    /// Fresh Monte Carlo sampling, square rule.
    Empirical { samples: u64, seed: u64, workers: usize },
    /// The empirical columns of [`REFERENCE_TABLE`].
    Reference,
}

/// Log-log fits `mean ~ d^alpha`, `std ~ d^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub mean_exponent: f64,
    pub mean_intercept: f64,
    pub std_exponent: f64,
    pub std_intercept: f64,
    pub mean_residuals: Vec<f64>,
    pub std_residuals: Vec<f64>,
}

pub fn reference_points() -> Vec<ScalingPoint> {
    REFERENCE_TABLE
        .iter()
        .map(|&(d, mean, std, _, _)| ScalingPoint { d, mean, std })
        .collect()
}

/// Collects `(d, mean, std)` for the requested alphabet sizes.
pub fn scaling_points(ds: &[usize], source: ScalingSource) -> Result<Vec<ScalingPoint>> {
    let rule = crate::jumps::JumpRule::square();
    ds.iter()
        .map(|&d| match source {
            ScalingSource::ModelMoments => {
                let m = HaltingModel::build(d, &rule)?;
                Ok(ScalingPoint {
                    d,
                    mean: m.mean,
                    std: m.std,
                })
            }
            ScalingSource::Empirical {
                samples,
                seed,
                workers,
            } => {
                let cfg = GenConfig::new(
                    d,
                    rule.clone(),
                    crate::genrand::default_max_len(d),
                    seed,
                    Variant::V20,
                );
                let h = run_sampling(&cfg, samples, workers)?;
                Ok(ScalingPoint {
                    d,
                    mean: h.mean(),
                    std: h.std(),
                })
            }
            ScalingSource::Reference => reference_points()
                .into_iter()
                .find(|p| p.d == d)
                .ok_or_else(|| Error::Config(format!("no reference row for d={d}"))),
        })
        .collect()
}

/// OLS of `ln mean` and `ln std` against `ln d`; needs four distinct `d`.
pub fn scaling_fit(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let mut ds: Vec<usize> = points.iter().map(|p| p.d).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 4 {
        return Err(Error::Config(format!(
            "scaling fit needs at least 4 distinct alphabet sizes, got {}",
            ds.len()
        )));
    }
    let log = |f: fn(&ScalingPoint) -> f64| -> Vec<(f64, f64)> {
        points
            .iter()
            .map(|p| ((p.d as f64).ln(), f(p).ln()))
            .collect()
    };
    let mean_fit = ols(&log(|p| p.mean)).expect("distinct abscissae");
    let std_fit = ols(&log(|p| p.std)).expect("distinct abscissae");
    Ok(ScalingFit {
        points: points.to_vec(),
        mean_exponent: mean_fit.slope,
        mean_intercept: mean_fit.intercept,
        std_exponent: std_fit.slope,
        std_intercept: std_fit.intercept,
        mean_residuals: mean_fit.residuals,
        std_residuals: std_fit.residuals,
    })
}
