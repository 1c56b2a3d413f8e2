//! Exhaustive search for circulant Hadamard first rows.
//!
//! The space of length-`L` sequences with `h[0] = +1` is split into shards
//! by the signs at positions `1..=p`; each shard is a depth-first search
//! over the remaining positions. Negations are restored when the report is
//! assembled, so the solution set is that of the full `2^L` space.
//!
//! Two prunes are available, both sound:
//!
//! * **row-sum**: summing the autocorrelation identity gives
//!   `(sum h)^2 = L` for any solution, so a non-square `L` has no solutions
//!   and a square `L = s^2` forces exactly `(L - s)/2` or `(L + s)/2` minus
//!   entries.
//! * **prefix-PAF**: once positions `0..=m` are fixed, each lag's partial
//!   autocorrelation can still move by at most the number of unknown terms;
//!   a branch is cut as soon as some partial sum cannot return to zero.
//!
//! Shard boundaries depend only on `L`, and shard results are merged in
//! shard order, so reports do not depend on the worker count.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::BlockSequence;
use crate::error::{Error, Result};
use crate::seq::{Sign, SignSequence};

/// Positions after the fixed leading `+` that select a shard.
const MAX_SHARD_BITS: usize = 10;
/// Nodes visited between deadline checks.
const DEADLINE_STRIDE: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prunes {
    pub row_sum: bool,
    pub prefix_paf: bool,
}

impl Prunes {
    pub const ALL: Prunes = Prunes {
        row_sum: true,
        prefix_paf: true,
    };
    pub const NONE: Prunes = Prunes {
        row_sum: false,
        prefix_paf: false,
    };

    fn label(&self) -> String {
        match (self.row_sum, self.prefix_paf) {
            (true, true) => "row-sum,prefix-paf".into(),
            (true, false) => "row-sum".into(),
            (false, true) => "prefix-paf".into(),
            (false, false) => "none".into(),
        }
    }
}

impl Default for Prunes {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub order: usize,
    pub prunes: Prunes,
    pub workers: usize,
    /// Also list one representative per rotation/negation class.
    pub canonicalize: bool,
    /// Wall-clock budget; shards still running when it expires are
    /// abandoned and the report is flagged incomplete.
    pub budget: Option<Duration>,
}

impl SearchConfig {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            prunes: Prunes::ALL,
            workers: 1,
            canonicalize: false,
            budget: None,
        }
    }

    pub fn prunes(mut self, prunes: Prunes) -> Self {
        self.prunes = prunes;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn canonicalize(mut self, on: bool) -> Self {
        self.canonicalize = on;
        self
    }

    pub fn budget(mut self, budget: Option<Duration>) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        // Sequences are packed into u64 masks for the ledger and shards.
        if self.order < 4 || !self.order.is_multiple_of(4) || self.order > 64 {
            return Err(Error::BadOrder { order: self.order });
        }
        if self.workers == 0 {
            return Err(Error::NoWorkers);
        }
        Ok(())
    }

    fn shard_bits(&self) -> usize {
        (self.order - 1).min(MAX_SHARD_BITS)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneStatistics {
    /// True when the row-sum prune rejected the order without enumeration.
    pub order_rejected: bool,
    /// Branches cut by the minus-count constraint.
    pub row_sum: u64,
    /// Branches cut by the partial-autocorrelation bound.
    pub prefix_paf: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub order: usize,
    pub prunes: Prunes,
    /// Complete sequences (with `h[0] = +1`) that reached the final check.
    pub sequences_examined: u64,
    /// All solutions, sorted with `+ < -`.
    pub solutions: Vec<SignSequence>,
    /// Smallest member of each rotation/negation class, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<Vec<SignSequence>>,
    pub prune_statistics: PruneStatistics,
    pub shards: usize,
    pub shards_completed: usize,
    pub incomplete: bool,
    pub elapsed_ms: u64,
}

impl SearchReport {
    /// The report with timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> SearchReport {
        SearchReport {
            elapsed_ms: 0,
            ..self.clone()
        }
    }
}

/// Whether the row-sum prune rejects order `L` outright (`L` not a square).
pub fn rowsum_prune_applicable(order: usize) -> bool {
    exact_sqrt(order).is_none()
}

/// The admissible numbers of minus entries for a solution of order `L`.
pub fn minus_counts(order: usize) -> Option<(usize, usize)> {
    let s = exact_sqrt(order)?;
    Some(((order - s) / 2, (order + s) / 2))
}

fn exact_sqrt(x: usize) -> Option<usize> {
    let r = (x as f64).sqrt().round() as usize;
    (r.saturating_sub(1)..=r + 1).find(|&c| c * c == x)
}

/// Per-shard outcome; merging is a commutative sum plus a sorted union.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ShardResult {
    examined: u64,
    row_sum_cuts: u64,
    paf_cuts: u64,
    masks: Vec<u64>,
    complete: bool,
}

struct ShardSearch<'a> {
    order: usize,
    prunes: Prunes,
    minus_bounds: Option<(usize, usize)>,
    deadline: Option<Instant>,
    prefix: &'a [Sign],
    signs: Vec<i32>,
    partial: Vec<i32>,
    minus: usize,
    nodes: u64,
    timed_out: bool,
    out: ShardResult,
}

impl<'a> ShardSearch<'a> {
    fn new(cfg: &SearchConfig, prefix: &'a [Sign], deadline: Option<Instant>) -> Self {
        let order = cfg.order;
        Self {
            order,
            prunes: cfg.prunes,
            minus_bounds: if cfg.prunes.row_sum { minus_counts(order) } else { None },
            deadline,
            prefix,
            signs: vec![0; order],
            partial: vec![0; order],
            minus: 0,
            nodes: 0,
            timed_out: false,
            out: ShardResult::default(),
        }
    }

    fn run(mut self) -> ShardResult {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return self.out;
        }
        self.descend(0);
        self.out.complete = !self.timed_out;
        self.out
    }

    /// Number of terms of lag `u` known once positions `0..=m` are fixed.
    fn known_terms(&self, m: usize, u: usize) -> usize {
        let direct = (m + 1).saturating_sub(u);
        let wrapped = (m + 1).saturating_sub(self.order - u);
        direct + wrapped
    }

    fn update_partial(&mut self, m: usize, sign: i32) {
        let order = self.order;
        for u in 1..order {
            if m >= u {
                self.partial[u] += sign * self.signs[m - u];
            }
            if m + u >= order {
                self.partial[u] += sign * self.signs[m + u - order];
            }
        }
    }

    fn row_sum_ok(&self, m: usize) -> bool {
        let Some((lo, hi)) = self.minus_bounds else {
            return true;
        };
        let reachable = self.minus + (self.order - 1 - m);
        (self.minus <= lo && lo <= reachable) || (self.minus <= hi && hi <= reachable)
    }

    fn paf_ok(&self, m: usize) -> bool {
        (1..self.order).all(|u| {
            let remaining = (self.order - self.known_terms(m, u)) as i32;
            self.partial[u].abs() <= remaining
        })
    }

    fn is_solution(&self) -> bool {
        let n = self.order;
        (1..n).all(|u| (0..n).map(|k| self.signs[k] * self.signs[(k + u) % n]).sum::<i32>() == 0)
    }

    fn descend(&mut self, m: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(DEADLINE_STRIDE) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        let choices: &[Sign] = if m == 0 {
            &[Sign::Plus]
        } else if m <= self.prefix.len() {
            std::slice::from_ref(&self.prefix[m - 1])
        } else {
            &[Sign::Plus, Sign::Minus]
        };
        for &choice in choices {
            let sign = choice.value() as i32;
            self.signs[m] = sign;
            if choice == Sign::Minus {
                self.minus += 1;
            }
            if self.prunes.prefix_paf {
                self.update_partial(m, sign);
            }

            if !self.row_sum_ok(m) {
                self.out.row_sum_cuts += 1;
            } else if self.prunes.prefix_paf && !self.paf_ok(m) {
                self.out.paf_cuts += 1;
            } else if m + 1 == self.order {
                self.out.examined += 1;
                if self.is_solution() {
                    let mask = (0..self.order)
                        .filter(|&k| self.signs[k] < 0)
                        .fold(0u64, |acc, k| acc | 1 << k);
                    self.out.masks.push(mask);
                }
            } else {
                self.descend(m + 1);
            }

            if self.prunes.prefix_paf {
                self.update_partial(m, -sign);
            }
            if choice == Sign::Minus {
                self.minus -= 1;
            }
            self.signs[m] = 0;
            if self.timed_out {
                return;
            }
        }
    }
}

fn shard_prefix(index: usize, bits: usize) -> Vec<Sign> {
    // Most significant bit first so shard order is lexicographic.
    (0..bits)
        .map(|k| {
            if index >> (bits - 1 - k) & 1 == 1 {
                Sign::Minus
            } else {
                Sign::Plus
            }
        })
        .collect()
}

fn prefix_text(prefix: &[Sign]) -> String {
    std::iter::once('+')
        .chain(prefix.iter().map(|s| s.as_char()))
        .collect()
}

/// Smallest sequence among all rotations of `h` and of `-h`.
pub fn canonical_form(h: &SignSequence) -> SignSequence {
    let neg = h.negate();
    (0..h.len())
        .flat_map(|s| [h.rotate(s), neg.rotate(s)])
        .min()
        .expect("non-empty sequence")
}

/// Runs the search with no ledger.
pub fn search(cfg: &SearchConfig) -> Result<SearchReport> {
    run_search(cfg, None)
}

/// Runs the search, skipping shards already recorded as done in the ledger
/// at `path` and appending a line for each shard this run finishes.
pub fn search_with_ledger(cfg: &SearchConfig, path: &Path) -> Result<SearchReport> {
    let ledger = ShardLedger::open(path, cfg)?;
    run_search(cfg, Some(&ledger))
}

fn run_search(cfg: &SearchConfig, ledger: Option<&ShardLedger>) -> Result<SearchReport> {
    cfg.validate()?;
    let started = Instant::now();
    let deadline = cfg.budget.map(|b| started + b);
    let bits = cfg.shard_bits();
    let shard_count = 1usize << bits;

    let mut stats = PruneStatistics::default();
    let results: Vec<ShardResult> = if cfg.prunes.row_sum && rowsum_prune_applicable(cfg.order) {
        stats.order_rejected = true;
        vec![
            ShardResult {
                complete: true,
                ..Default::default()
            };
            shard_count
        ]
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Ledger(format!("thread pool: {e}")))?;
        let run_one = |index: usize| -> Result<ShardResult> {
            let prefix = shard_prefix(index, bits);
            let key = prefix_text(&prefix);
            if let Some(done) = ledger.and_then(|l| l.done.get(&key)) {
                return Ok(done.clone());
            }
            let result = ShardSearch::new(cfg, &prefix, deadline).run();
            if let Some(l) = ledger {
                l.append(&key, &result, cfg.order)?;
            }
            Ok(result)
        };
        pool.install(|| {
            (0..shard_count)
                .into_par_iter()
                .map(run_one)
                .collect::<Result<Vec<_>>>()
        })?
    };

    let mut examined = 0;
    let mut masks = Vec::new();
    let mut completed = 0;
    for r in &results {
        examined += r.examined;
        stats.row_sum += r.row_sum_cuts;
        stats.prefix_paf += r.paf_cuts;
        masks.extend_from_slice(&r.masks);
        completed += usize::from(r.complete);
    }

    let mut solutions: Vec<SignSequence> = masks
        .iter()
        .map(|&m| SignSequence::from_mask(m, cfg.order))
        .flat_map(|h| {
            let neg = h.negate();
            [h, neg]
        })
        .collect();
    solutions.sort();
    solutions.dedup();

    let canonical = cfg.canonicalize.then(|| {
        let mut reps: Vec<SignSequence> = solutions.iter().map(canonical_form).collect();
        reps.sort();
        reps.dedup();
        reps
    });

    Ok(SearchReport {
        order: cfg.order,
        prunes: cfg.prunes,
        sequences_examined: examined,
        solutions,
        canonical,
        prune_statistics: stats,
        shards: shard_count,
        shards_completed: completed,
        incomplete: completed < shard_count,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// Append-only record of finished shards.
///
/// ```text
/// # circhad-ledger order=16 shard-bits=10 prunes=row-sum,prefix-paf
/// +++-+-+--++ done examined=3 row-sum=17 prefix-paf=40 solutions=
/// ```
///
/// Only `done` lines are reused on resume; anything else is re-run.
struct ShardLedger {
    file: Mutex<File>,
    done: BTreeMap<String, ShardResult>,
}

impl ShardLedger {
    fn header(cfg: &SearchConfig) -> String {
        format!(
            "# circhad-ledger order={} shard-bits={} prunes={}",
            cfg.order,
            cfg.shard_bits(),
            cfg.prunes.label()
        )
    }

    fn open(path: &Path, cfg: &SearchConfig) -> Result<Self> {
        cfg.validate()?;
        let io = |e: std::io::Error| Error::Ledger(format!("{}: {e}", path.display()));
        let header = Self::header(cfg);
        let mut done = BTreeMap::new();
        let fresh = !path.exists() || std::fs::metadata(path).map_err(io)?.len() == 0;
        if !fresh {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (k, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if k == 0 {
                    if line.trim() != header {
                        return Err(Error::Ledger(format!(
                            "{} was written for a different search ({})",
                            path.display(),
                            line.trim()
                        )));
                    }
                    continue;
                }
                if let Some((key, result)) = parse_ledger_line(&line, cfg.order) {
                    done.insert(key, result);
                }
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        if fresh {
            writeln!(file, "{header}").map_err(io)?;
        }
        Ok(Self {
            file: Mutex::new(file),
            done,
        })
    }

    fn append(&self, key: &str, r: &ShardResult, order: usize) -> Result<()> {
        let status = if r.complete { "done" } else { "incomplete" };
        let sols: Vec<String> = r
            .masks
            .iter()
            .map(|&m| SignSequence::from_mask(m, order).to_string())
            .collect();
        let line = format!(
            "{key} {status} examined={} row-sum={} prefix-paf={} solutions={}\n",
            r.examined,
            r.row_sum_cuts,
            r.paf_cuts,
            sols.join(",")
        );
        let mut f = self.file.lock().expect("ledger lock poisoned");
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| Error::Ledger(e.to_string()))
    }
}

fn parse_ledger_line(line: &str, order: usize) -> Option<(String, ShardResult)> {
    let mut fields = line.split_whitespace();
    let key = fields.next()?.to_string();
    if fields.next()? != "done" {
        return None;
    }
    let mut r = ShardResult {
        complete: true,
        ..Default::default()
    };
    for field in fields {
        let (name, value) = field.split_once('=')?;
        match name {
            "examined" => r.examined = value.parse().ok()?,
            "row-sum" => r.row_sum_cuts = value.parse().ok()?,
            "prefix-paf" => r.paf_cuts = value.parse().ok()?,
            "solutions" => {
                for s in value.split(',').filter(|s| !s.is_empty()) {
                    let h: SignSequence = s.parse().ok()?;
                    if h.len() != order {
                        return None;
                    }
                    r.masks.push(h.to_mask()?);
                }
            }
            _ => return None,
        }
    }
    Some((key, r))
}

/// Every block sequence of length `2n` with exactly `n` even blocks that
/// satisfies `predicate`, in lexicographic order (`+ < -`, diag first).
pub fn enumerate_block_sequences<F>(
    n: usize,
    predicate: F,
) -> Result<impl Iterator<Item = BlockSequence>>
where
    F: Fn(&BlockSequence) -> bool,
{
    if !(1..=6).contains(&n) {
        return Err(Error::HalfLengthOutOfRange { n });
    }
    let len = 2 * n;
    Ok((0..1u64 << (2 * len))
        .map(move |k| BlockSequence::from_index(len, k).expect("even length"))
        .filter(move |bs| bs.even_count() == n && predicate(bs)))
}
