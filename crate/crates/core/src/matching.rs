//! Matching pairs at a fixed lag and the chase over a fixed matching book.
//!
//! For a lag `u`, every index `i` with `M_i` and `M_{i+u}` both even
//! contributes `M_i M_{i+u} = ±2J` to the cancellation sum. A matching pairs
//! up such index pairs whose products are negatives of each other; the
//! relation is symmetric, so each matched 2-set is stored once.
//!
//! The chase starts from an obligation `(a, b)` and repeatedly replaces it by
//! `(a, m)` where `(l, m)` is the pair matched to the current obligation at
//! its lag. Only this single step rule is modelled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block::{BlockSequence, SymBlockMatrix, TwoBlock};
use crate::error::{Error, Result};
use crate::seq::Sign;

/// An ordered index pair `(first, second)`, read as `(i, i + u)` with
/// `u = second - first mod 2n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    pub first: usize,
    pub second: usize,
}

impl IndexPair {
    pub const fn new(first: usize, second: usize) -> Self {
        Self { first, second }
    }

    /// `(second - first) mod len`.
    pub fn lag(&self, len: usize) -> usize {
        (self.second % len + len - self.first % len) % len
    }

    fn in_range(&self, len: usize) -> bool {
        self.first < len && self.second < len
    }

    fn is_even_pair(&self, bs: &BlockSequence) -> bool {
        self.in_range(bs.len())
            && self.first != self.second
            && bs.block(self.first).is_even()
            && bs.block(self.second).is_even()
    }

    fn product(&self, bs: &BlockSequence) -> SymBlockMatrix {
        bs.block(self.first).product(bs.block(self.second))
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

impl FromStr for IndexPair {
    type Err = String;

    /// Accepts `i,j` or `(i,j)`, whitespace-insensitive.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(&compact);
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| format!("expected an index pair like (i,j), got {s:?}"))?;
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| format!("invalid index {t:?} in {s:?}"))
        };
        Ok(IndexPair::new(parse(a)?, parse(b)?))
    }
}

/// One matched 2-set `{p, q}`, stored with `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchedPair {
    pub left: IndexPair,
    pub right: IndexPair,
}

impl MatchedPair {
    pub fn new(a: IndexPair, b: IndexPair) -> Self {
        if a <= b {
            Self { left: a, right: b }
        } else {
            Self { left: b, right: a }
        }
    }

    pub fn partner_of(&self, p: IndexPair) -> Option<IndexPair> {
        if self.left == p {
            Some(self.right)
        } else if self.right == p {
            Some(self.left)
        } else {
            None
        }
    }
}

impl fmt::Display for MatchedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{}", self.left, self.right)
    }
}

/// A reason a matching does not hold against a block sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    BadLag { lag: usize, len: usize },
    IndexOutOfRange { pair: IndexPair },
    LagMismatch { pair: IndexPair, lag: usize },
    NotEvenPair { pair: IndexPair },
    SelfMatched { pair: IndexPair },
    ProductsDoNotNegate { left: IndexPair, right: IndexPair },
    Reused { pair: IndexPair },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadLag { lag, len } => write!(f, "lag {lag} not in 1..{len}"),
            Violation::IndexOutOfRange { pair } => write!(f, "{pair} has an index out of range"),
            Violation::LagMismatch { pair, lag } => write!(f, "{pair} is not at lag {lag}"),
            Violation::NotEvenPair { pair } => write!(f, "{pair} does not join two even blocks"),
            Violation::SelfMatched { pair } => write!(f, "{pair} is matched with itself"),
            Violation::ProductsDoNotNegate { left, right } => {
                write!(f, "products at {left} and {right} do not negate")
            }
            Violation::Reused { pair } => write!(f, "{pair} is matched more than once"),
        }
    }
}

/// Matched 2-sets at a single lag. May be partial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagMatching {
    pub lag: usize,
    pub pairs: Vec<MatchedPair>,
}

impl LagMatching {
    pub fn new(lag: usize, pairs: impl IntoIterator<Item = (IndexPair, IndexPair)>) -> Self {
        Self {
            lag,
            pairs: pairs.into_iter().map(|(a, b)| MatchedPair::new(a, b)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn partner_of(&self, p: IndexPair) -> Option<IndexPair> {
        self.pairs.iter().find_map(|m| m.partner_of(p))
    }

    /// Every violated invariant, in pair order. Empty means valid.
    pub fn violations(&self, bs: &BlockSequence) -> Vec<Violation> {
        let len = bs.len();
        let mut out = Vec::new();
        if self.lag == 0 || self.lag >= len {
            out.push(Violation::BadLag { lag: self.lag, len });
        }
        let mut used: Vec<IndexPair> = Vec::new();
        for m in &self.pairs {
            for p in [m.left, m.right] {
                out.extend(pair_violations(bs, p, self.lag));
                if used.contains(&p) {
                    out.push(Violation::Reused { pair: p });
                } else {
                    used.push(p);
                }
            }
            if m.left == m.right {
                out.push(Violation::SelfMatched { pair: m.left });
            } else if m.left.is_even_pair(bs)
                && m.right.is_even_pair(bs)
                && m.left.product(bs) != -m.right.product(bs)
            {
                out.push(Violation::ProductsDoNotNegate {
                    left: m.left,
                    right: m.right,
                });
            }
        }
        out
    }

    pub fn is_valid(&self, bs: &BlockSequence) -> bool {
        self.violations(bs).is_empty()
    }

    /// True when every even-even pair at this lag is matched.
    pub fn is_perfect(&self, bs: &BlockSequence) -> bool {
        let lag = self.lag;
        bs.even_pairs_at(lag)
            .into_iter()
            .all(|i| self.partner_of(IndexPair::new(i, (i + lag) % bs.len())).is_some())
    }
}

fn pair_violations(bs: &BlockSequence, p: IndexPair, lag: usize) -> Vec<Violation> {
    let len = bs.len();
    if !p.in_range(len) {
        return vec![Violation::IndexOutOfRange { pair: p }];
    }
    let mut out = Vec::new();
    if p.lag(len) != lag % len {
        out.push(Violation::LagMismatch { pair: p, lag });
    }
    if !p.is_even_pair(bs) {
        out.push(Violation::NotEvenPair { pair: p });
    }
    out
}

/// `true` iff `m` satisfies every matching invariant against `bs`.
pub fn validate_matching(bs: &BlockSequence, m: &LagMatching) -> bool {
    m.is_valid(bs)
}

/// Maximal matching at lag `u`: pairs with product `+2J` and `-2J` are each
/// sorted by first index and zipped, which is the same as repeatedly taking
/// the smallest unmatched pair and matching it with the smallest unmatched
/// pair of opposite sign. Perfect exactly when the two counts agree.
pub fn find_matching(bs: &BlockSequence, u: usize) -> Result<LagMatching> {
    let len = bs.len();
    if u == 0 || u >= len {
        return Err(Error::LagOutOfRange { lag: u, len });
    }
    let (plus, minus): (Vec<IndexPair>, Vec<IndexPair>) = bs
        .even_pairs_at(u)
        .into_iter()
        .map(|i| IndexPair::new(i, (i + u) % len))
        .partition(|p| bs.block(p.first).diag * bs.block(p.second).diag == Sign::Plus);
    Ok(LagMatching::new(u, plus.into_iter().zip(minus)))
}

/// At most one [`LagMatching`] per lag over a shared block sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingBook {
    matchings: BTreeMap<usize, LagMatching>,
}

impl MatchingBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a matching; an existing one at the same lag is extended.
    pub fn insert(&mut self, m: LagMatching) {
        self.matchings
            .entry(m.lag)
            .or_insert_with(|| LagMatching::new(m.lag, []))
            .pairs
            .extend(m.pairs);
    }

    pub fn with(mut self, m: LagMatching) -> Self {
        self.insert(m);
        self
    }

    /// [`find_matching`] at every nonzero lag, keeping the non-empty ones.
    pub fn greedy(bs: &BlockSequence) -> Self {
        let mut book = Self::new();
        for u in 1..bs.len() {
            let m = find_matching(bs, u).expect("lag in range");
            if !m.is_empty() {
                book.insert(m);
            }
        }
        book
    }

    pub fn get(&self, lag: usize) -> Option<&LagMatching> {
        self.matchings.get(&lag)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LagMatching> {
        self.matchings.values()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.values().all(|m| m.is_empty())
    }

    pub fn partner_of(&self, p: IndexPair, len: usize) -> Option<IndexPair> {
        self.matchings.get(&p.lag(len))?.partner_of(p)
    }

    pub fn violations(&self, bs: &BlockSequence) -> Vec<(usize, Violation)> {
        self.matchings
            .values()
            .flat_map(|m| m.violations(bs).into_iter().map(move |v| (m.lag, v)))
            .collect()
    }

    pub fn is_valid(&self, bs: &BlockSequence) -> bool {
        self.violations(bs).is_empty()
    }

    /// Parses the matching file format and validates every line against
    /// `bs`. All diagnostics are returned, each tagged with its 1-based line.
    pub fn parse_for(text: &str, bs: &BlockSequence) -> std::result::Result<Self, Vec<Error>> {
        let mut errors = Vec::new();
        let mut book = Self::new();
        let mut seen: Vec<(IndexPair, usize)> = Vec::new();
        for (lineno, line) in numbered_lines(text) {
            let (lag, pair) = match parse_line(line) {
                Ok(v) => v,
                Err(message) => {
                    errors.push(Error::MatchingSyntax { line: lineno, message });
                    continue;
                }
            };
            let single = LagMatching::new(lag, [(pair.left, pair.right)]);
            for v in single.violations(bs) {
                errors.push(Error::MatchingSyntax {
                    line: lineno,
                    message: v.to_string(),
                });
            }
            for p in [pair.left, pair.right] {
                if let Some(&(_, first_line)) = seen.iter().find(|(q, _)| *q == p) {
                    errors.push(Error::MatchingSyntax {
                        line: lineno,
                        message: format!("{p} already matched on line {first_line}"),
                    });
                } else {
                    seen.push((p, lineno));
                }
            }
            book.insert(single);
        }
        if errors.is_empty() {
            Ok(book)
        } else {
            Err(errors)
        }
    }
}

impl FromStr for MatchingBook {
    type Err = Error;

    /// Syntax only; see [`MatchingBook::parse_for`] for validation.
    fn from_str(text: &str) -> Result<Self> {
        let mut book = Self::new();
        for (lineno, line) in numbered_lines(text) {
            let (lag, pair) =
                parse_line(line).map_err(|message| Error::MatchingSyntax { line: lineno, message })?;
            book.insert(LagMatching {
                lag,
                pairs: vec![pair],
            });
        }
        Ok(book)
    }
}

/// Non-blank lines, 1-based; `#` starts a comment.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((k + 1, line))
    })
}

/// `u=<lag>: (i,j)~(l,m)`
fn parse_line(line: &str) -> std::result::Result<(usize, MatchedPair), String> {
    let compact: String = line.chars().filter(|c| !c.is_whitespace()).collect();
    let rest = compact
        .strip_prefix("u=")
        .ok_or_else(|| format!("expected `u=<lag>: (i,j)~(l,m)`, got {line:?}"))?;
    let (lag, pairs) = rest
        .split_once(':')
        .ok_or_else(|| format!("missing ':' after lag in {line:?}"))?;
    let lag = lag
        .parse::<usize>()
        .map_err(|_| format!("invalid lag {lag:?}"))?;
    let (a, b) = pairs
        .split_once('~')
        .ok_or_else(|| format!("missing '~' in {line:?}"))?;
    Ok((lag, MatchedPair::new(a.parse()?, b.parse()?)))
}

impl fmt::Display for MatchingBook {
    /// One line per matched 2-set in the matching file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in self.matchings.values() {
            for p in &m.pairs {
                writeln!(f, "u={}: {}", m.lag, p)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChaseOutcome {
    /// The next obligation was already visited.
    Cycle,
    /// The current obligation has no matched pair in the book.
    MatchingUnavailable,
    /// The next obligation would be `(a, a)`.
    Degenerate,
}

impl fmt::Display for ChaseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChaseOutcome::Cycle => "Cycle",
            ChaseOutcome::MatchingUnavailable => "MatchingUnavailable",
            ChaseOutcome::Degenerate => "Degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaseStep {
    pub obligation: IndexPair,
    pub matched: Option<IndexPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaseTrace {
    pub steps: Vec<ChaseStep>,
    pub outcome: ChaseOutcome,
    /// The obligation that ended the chase: the repeated one for `Cycle`,
    /// the unmatched one for `MatchingUnavailable`, `(a, a)` for `Degenerate`.
    pub terminal: IndexPair,
}

impl ChaseTrace {
    /// Steps that found a matched pair.
    pub fn matched_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.matched.is_some()).count()
    }
}

impl fmt::Display for ChaseTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            match s.matched {
                Some(m) => writeln!(f, "{} ~ {}", s.obligation, m)?,
                None => writeln!(f, "{} ~ (none)", s.obligation)?,
            }
        }
        match self.outcome {
            ChaseOutcome::Cycle => write!(f, "{} already visited: {}", self.terminal, self.outcome),
            ChaseOutcome::MatchingUnavailable => {
                write!(f, "{} has no matching pair: {}", self.terminal, self.outcome)
            }
            ChaseOutcome::Degenerate => write!(f, "next obligation {}: {}", self.terminal, self.outcome),
        }
    }
}

/// Runs the chase from `start` over a fixed, valid `book`.
///
/// `start` must join two even blocks and `M_{start.first}` must not be
/// symmetric. The first coordinate never changes, so the chase visits at
/// most one obligation per even block and always terminates.
pub fn chase(bs: &BlockSequence, book: &MatchingBook, start: IndexPair) -> Result<ChaseTrace> {
    if !start.is_even_pair(bs) {
        return Err(Error::NotEvenPair {
            first: start.first,
            second: start.second,
        });
    }
    if bs.is_symmetric_even(start.first)? {
        return Err(Error::SymmetricStart { index: start.first });
    }
    let violations = book.violations(bs);
    if let Some((lag, v)) = violations.first() {
        return Err(Error::InvalidBook(format!("lag {lag}: {v}")));
    }

    let len = bs.len();
    let anchor = start.first;
    let mut steps: Vec<ChaseStep> = Vec::new();
    let mut current = start;
    loop {
        let Some(partner) = book.partner_of(current, len) else {
            steps.push(ChaseStep {
                obligation: current,
                matched: None,
            });
            return Ok(ChaseTrace {
                steps,
                outcome: ChaseOutcome::MatchingUnavailable,
                terminal: current,
            });
        };
        steps.push(ChaseStep {
            obligation: current,
            matched: Some(partner),
        });
        let next = IndexPair::new(anchor, partner.second);
        let outcome = if next.second == anchor {
            Some(ChaseOutcome::Degenerate)
        } else if steps.iter().any(|s| s.obligation == next) {
            Some(ChaseOutcome::Cycle)
        } else {
            None
        };
        if let Some(outcome) = outcome {
            return Ok(ChaseTrace {
                steps,
                outcome,
                terminal: next,
            });
        }
        current = next;
    }
}

/// Upper bound on chase length for a sequence with `even` even blocks.
pub fn chase_step_bound(even: usize) -> usize {
    even * even + 1
}

/// The published `n = 3` counterexample to the chase argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub blocks: BlockSequence,
    pub book: MatchingBook,
    pub start: IndexPair,
}

pub fn paper_counterexample() -> Counterexample {
    use Sign::{Minus as M, Plus as P};
    let even_plus = TwoBlock::new(P, P);
    let even_minus = TwoBlock::new(M, M);
    let odd = TwoBlock::new(P, M);
    let blocks =
        BlockSequence::new(vec![even_plus, odd, even_minus, odd, even_minus, odd]).expect("six blocks");
    let book = MatchingBook::new()
        .with(LagMatching::new(2, [(IndexPair::new(0, 2), IndexPair::new(2, 4))]))
        .with(LagMatching::new(4, [(IndexPair::new(0, 4), IndexPair::new(4, 2))]));
    Counterexample {
        blocks,
        book,
        start: IndexPair::new(0, 2),
    }
}
