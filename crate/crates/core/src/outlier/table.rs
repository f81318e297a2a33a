//! Monte Carlo critical values.
//!
//! Each entry is the empirical α-quantile of a block statistic over
//! all-honest samples of i.i.d. standard normals, which is the right null
//! for every statistic here because all of them are location and scale
//! invariant. Entries are keyed by `(kind, n, t, α)` and cached in a small
//! versioned text file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::screen::quantile;
use super::{
    sorted_copy, sw_coefficients, sw_statistic, tm_lower_statistic, tm_residuals, tm_upper_statistic, BlockTest,
};
use crate::error::{Error, Result};
use crate::estimators::{half_block_statistic, largest_gap_count, upper_half};
use crate::rng::{stream, Domain};

pub const CACHE_HEADER: &str = "# ssdf-critical-values v1";

/// Cells of a gap-selected null with fewer draws than this stay empty.
pub const MIN_CONDITIONAL_SAMPLES: usize = 100;

const BATCH: u64 = 10_000;

/// Null distribution a table entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TestKind {
    /// TM statistic for the `t` largest values, `t` fixed in advance.
    TmUpper,
    /// TM statistic for the `t` smallest values, `t` fixed in advance.
    TmLower,
    /// TM statistic on sorted absolute residuals.
    TmResidual,
    /// Shapiro-Wilk `W` of the full sample (independent of `t`).
    Sw,
    /// TM statistic on the upper half of an `n`-sample, where `t` is chosen
    /// by the largest gap inside that half. Values are conditional on the
    /// selected `t`. The lower half uses the same entries by reflection.
    TmHalfGap,
    /// As `TmHalfGap` with `W` of the half.
    SwHalfGap,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::TmUpper,
        TestKind::TmLower,
        TestKind::TmResidual,
        TestKind::Sw,
        TestKind::TmHalfGap,
        TestKind::SwHalfGap,
    ];
    pub const FIXED: [TestKind; 4] = [TestKind::TmUpper, TestKind::TmLower, TestKind::TmResidual, TestKind::Sw];
    pub const HALF_GAP: [TestKind; 2] = [TestKind::TmHalfGap, TestKind::SwHalfGap];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::TmUpper => "tm_upper",
            TestKind::TmLower => "tm_lower",
            TestKind::TmResidual => "tm_residual",
            TestKind::Sw => "sw",
            TestKind::TmHalfGap => "tm_half_gap",
            TestKind::SwHalfGap => "sw_half_gap",
        }
    }

    /// Smallest sample size this kind is tabulated for.
    pub fn min_n(self) -> usize {
        match self {
            TestKind::TmHalfGap => 6,
            TestKind::SwHalfGap => 6,
            _ => 3,
        }
    }

    pub fn is_gap_selected(self) -> bool {
        matches!(self, TestKind::TmHalfGap | TestKind::SwHalfGap)
    }

    pub fn half_gap(test: BlockTest) -> Self {
        match test {
            BlockTest::Tm => TestKind::TmHalfGap,
            BlockTest::Sw => TestKind::SwHalfGap,
        }
    }

    fn id(self) -> u64 {
        self as u64
    }

    /// Statistic(s) of one null sample, as `(t, value)` pairs.
    fn null_draws(self, z: &mut [f64], out: &mut Vec<(usize, f64)>) -> Result<()> {
        let n = z.len();
        z.sort_by(f64::total_cmp);
        match self {
            TestKind::TmUpper => {
                for t in 1..=n / 2 {
                    out.push((t, tm_upper_statistic(z, t)?));
                }
            }
            TestKind::TmLower => {
                for t in 1..=n / 2 {
                    out.push((t, tm_lower_statistic(z, t)?));
                }
            }
            TestKind::TmResidual => {
                let (_, r) = tm_residuals(z);
                for t in 1..=n / 2 {
                    out.push((t, tm_upper_statistic(&r, t)?));
                }
            }
            TestKind::Sw => {
                let w = sw_statistic(z, sw_coefficients(n)?)?;
                out.extend((1..=n / 2).map(|t| (t, w)));
            }
            TestKind::TmHalfGap | TestKind::SwHalfGap => {
                let test = if self == TestKind::TmHalfGap {
                    BlockTest::Tm
                } else {
                    BlockTest::Sw
                };
                let half = upper_half(z);
                if let Some(t) = largest_gap_count(half) {
                    out.push((t, half_block_statistic(test, half, t)?));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown test kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    kind: TestKind,
    n: usize,
    t: usize,
    alpha_bits: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticalValueTable {
    entries: BTreeMap<Key, (f64, Provenance)>,
}

/// What to tabulate.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub kinds: Vec<TestKind>,
    pub n_min: usize,
    pub n_max: usize,
    pub alpha: f64,
    pub replications: u64,
    pub seed: u64,
}

impl TableSpec {
    fn cells(&self) -> impl Iterator<Item = (TestKind, usize)> + '_ {
        self.kinds
            .iter()
            .flat_map(move |&k| (self.n_min.max(k.min_n())..=self.n_max).map(move |n| (k, n)))
    }
}

/// Table entries at one significance level.
#[derive(Debug, Clone, Copy)]
pub struct Critical<'a> {
    table: &'a CriticalValueTable,
    alpha: f64,
}

impl Critical<'_> {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self, kind: TestKind, n: usize, t: usize) -> Result<f64> {
        self.table
            .get(kind, n, t, self.alpha)
            .ok_or(Error::MissingCriticalValue {
                kind: kind.name(),
                n,
                t,
                alpha: self.alpha,
            })
    }
}

impl CriticalValueTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn at(&self, alpha: f64) -> Critical<'_> {
        Critical { table: self, alpha }
    }

    pub fn get(&self, kind: TestKind, n: usize, t: usize, alpha: f64) -> Option<f64> {
        self.entries
            .get(&Key {
                kind,
                n,
                t,
                alpha_bits: alpha.to_bits(),
            })
            .map(|e| e.0)
    }

    pub fn provenance(&self, kind: TestKind, n: usize, t: usize, alpha: f64) -> Option<Provenance> {
        self.entries
            .get(&Key {
                kind,
                n,
                t,
                alpha_bits: alpha.to_bits(),
            })
            .map(|e| e.1)
    }

    pub fn insert(&mut self, kind: TestKind, n: usize, t: usize, alpha: f64, value: f64, provenance: Provenance) {
        self.entries.insert(
            Key {
                kind,
                n,
                t,
                alpha_bits: alpha.to_bits(),
            },
            (value, provenance),
        );
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(kind, n, t, alpha, value)` in key order.
    pub fn iter(&self) -> impl Iterator<Item = (TestKind, usize, usize, f64, f64)> + '_ {
        self.entries
            .iter()
            .map(|(k, v)| (k.kind, k.n, k.t, f64::from_bits(k.alpha_bits), v.0))
    }

    /// Entries of `other` override ours.
    pub fn merge(&mut self, other: CriticalValueTable) {
        self.entries.extend(other.entries);
    }

    /// True if every `(kind, n)` cell of `spec` has at least its `t = 1` entry.
    pub fn covers(&self, spec: &TableSpec) -> bool {
        spec.cells().all(|(k, n)| self.get(k, n, 1, spec.alpha).is_some())
    }

    /// Builds whatever part of `spec` is missing and merges it in.
    pub fn ensure(&mut self, spec: &TableSpec) -> Result<bool> {
        if self.covers(spec) {
            return Ok(false);
        }
        self.merge(build_critical_table(spec)?);
        Ok(true)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(CACHE_HEADER);
        out.push('\n');
        out.push_str("# kind n t alpha value replications seed\n");
        for (k, (value, prov)) in &self.entries {
            out.push_str(&format!(
                "{} {} {} {} {} {} {}\n",
                k.kind,
                k.n,
                k.t,
                f64::from_bits(k.alpha_bits),
                value,
                prov.replications,
                prov.seed
            ));
        }
        out
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim() == CACHE_HEADER => {}
            _ => return Err(format!("missing header line {CACHE_HEADER:?}")),
        }
        let mut table = Self::new();
        for (no, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 7 {
                return Err(format!("line {}: expected 7 fields, got {}", no + 1, fields.len()));
            }
            let bad = |what: &str| format!("line {}: bad {what}", no + 1);
            let kind: TestKind = fields[0].parse().map_err(|_| bad("kind"))?;
            let n: usize = fields[1].parse().map_err(|_| bad("n"))?;
            let t: usize = fields[2].parse().map_err(|_| bad("t"))?;
            let alpha: f64 = fields[3].parse().map_err(|_| bad("alpha"))?;
            let value: f64 = fields[4].parse().map_err(|_| bad("value"))?;
            let replications: u64 = fields[5].parse().map_err(|_| bad("replications"))?;
            let seed: u64 = fields[6].parse().map_err(|_| bad("seed"))?;
            table.insert(kind, n, t, alpha, value, Provenance { replications, seed });
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|message| Error::Cache {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

struct Task {
    kind: TestKind,
    n: usize,
    batch: u64,
    size: u64,
}

fn run_task(task: &Task, seed: u64) -> Result<Vec<(usize, f64)>> {
    let index = (task.kind.id() << 56) | ((task.n as u64) << 40) | task.batch;
    let mut rng = stream(seed, Domain::CriticalTable, index);
    let mut out = Vec::with_capacity(task.size as usize * task.n.div_ceil(2));
    let mut z = vec![0.0; task.n];
    for _ in 0..task.size {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        task.kind.null_draws(&mut z, &mut out)?;
    }
    Ok(out)
}

/// Regenerates critical values by simulation. Deterministic in `spec.seed`
/// regardless of thread count.
pub fn build_critical_table(spec: &TableSpec) -> Result<CriticalValueTable> {
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {}",
            spec.alpha
        )));
    }
    if spec.replications == 0 {
        return Err(Error::InvalidParameter("replications must be positive".into()));
    }
    if spec.n_max > super::SW_MAX_N
        && spec
            .kinds
            .iter()
            .any(|k| matches!(k, TestKind::Sw | TestKind::SwHalfGap))
    {
        return Err(Error::InvalidParameter(format!(
            "Shapiro-Wilk tables stop at n = {}",
            super::SW_MAX_N
        )));
    }

    let cells: Vec<(TestKind, usize)> = spec.cells().collect();
    let tasks: Vec<Task> = cells
        .iter()
        .flat_map(|&(kind, n)| {
            let batches = spec.replications.div_ceil(BATCH);
            (0..batches).map(move |b| Task {
                kind,
                n,
                batch: b,
                size: BATCH.min(spec.replications - b * BATCH),
            })
        })
        .collect();

    #[cfg(feature = "parallel")]
    let results: Vec<Result<Vec<(usize, f64)>>> = tasks.par_iter().map(|t| run_task(t, spec.seed)).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Vec<(usize, f64)>>> = tasks.iter().map(|t| run_task(t, spec.seed)).collect();

    let mut grouped: BTreeMap<(TestKind, usize, usize), Vec<f64>> = BTreeMap::new();
    for (task, draws) in tasks.iter().zip(results) {
        for (t, v) in draws? {
            grouped.entry((task.kind, task.n, t)).or_default().push(v);
        }
    }

    let provenance = Provenance {
        replications: spec.replications,
        seed: spec.seed,
    };
    let mut table = CriticalValueTable::new();
    for ((kind, n, t), values) in grouped {
        if kind.is_gap_selected() && values.len() < MIN_CONDITIONAL_SAMPLES {
            continue;
        }
        let value = quantile(&sorted_copy(&values), spec.alpha);
        // a block leaving one point in the half has a statistic of exactly 0
        if kind.is_gap_selected() && value <= 0.0 {
            continue;
        }
        table.insert(kind, n, t, spec.alpha, value, provenance);
    }
    verify(&table, &cells, spec.alpha)?;
    Ok(table)
}

fn verify(table: &CriticalValueTable, cells: &[(TestKind, usize)], alpha: f64) -> Result<()> {
    for &(kind, n) in cells {
        let mut previous = f64::INFINITY;
        let t_max = if kind.is_gap_selected() { n } else { n / 2 };
        for t in 1..=t_max {
            let Some(v) = table.get(kind, n, t, alpha) else {
                continue;
            };
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::TableInvariant(format!(
                    "{kind} n={n} t={t}: value {v} outside (0, 1)"
                )));
            }
            if !kind.is_gap_selected() {
                if v > previous {
                    return Err(Error::TableInvariant(format!(
                        "{kind} n={n}: critical value increases at t={t}"
                    )));
                }
                previous = v;
            }
        }
    }
    Ok(())
}
