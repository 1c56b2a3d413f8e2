//! Command-line frontend.
//!
//! Every invocation produces one [`Report`], rendered as text or as a single
//! JSON document. Exit codes: 0 when the checked property holds (or the
//! command is informational), 1 when it fails or a search was truncated,
//! 2 for usage and parse errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::block::{block_decompose, BlockSequence, Parity};
use crate::error::Error;
use crate::matching::{
    chase, find_matching, paper_counterexample, ChaseOutcome, ChaseStep, IndexPair, MatchingBook,
};
use crate::search::{search, search_with_ledger, Prunes, SearchConfig, SearchReport};
use crate::seq::{normalize_lag, SignSequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "circhad",
    version,
    about = "Circulant Hadamard matrices: 2-block checks, matching chases and exhaustive search"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether a sequence is the first row of a circulant Hadamard matrix.
    Verify(SeqInput),
    /// Periodic autocorrelation spectrum, or a single lag with --lag.
    Paf {
        #[command(flatten)]
        input: SeqInput,
        #[arg(long, allow_hyphen_values = true)]
        lag: Option<i64>,
    },
    /// Split a sequence of length 4n into its 2n 2-blocks.
    Decompose(SeqInput),
    /// Evaluate the even-even cancellation sum at one lag or all lags.
    Eqn1 {
        #[command(flatten)]
        input: BlockInput,
        #[arg(long, allow_hyphen_values = true)]
        lag: Option<i64>,
    },
    /// Greedy maximal matchings, printed in the matching file format.
    Match {
        #[command(flatten)]
        input: BlockInput,
        #[arg(long, allow_hyphen_values = true)]
        lag: Option<i64>,
    },
    /// Run the chase from a start pair over a matching file.
    Chase {
        #[command(flatten)]
        input: BlockInput,
        /// Matching file: one `u=<lag>: (i,j)~(l,m)` per line.
        #[arg(long)]
        matchings: PathBuf,
        /// Start obligation as `i,j`.
        #[arg(long)]
        start: String,
    },
    /// Re-verify the built-in n = 3 counterexample to the chase argument.
    Counterexample,
    /// Exhaustive search for circulant Hadamard matrices of a given order.
    Search(SearchArgs),
}

#[derive(Debug, clap::Args)]
pub struct SeqInput {
    /// Sequence over '+' and '-'.
    #[arg(allow_hyphen_values = true)]
    pub sequence: Option<String>,
    /// Read one sequence per line instead.
    #[arg(long, conflicts_with = "sequence")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct BlockInput {
    /// Blocks such as `++,+-,--,+-,--,+-`.
    #[arg(allow_hyphen_values = true)]
    pub blocks: Option<String>,
    /// Read one block sequence per line instead.
    #[arg(long, conflicts_with = "blocks")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PruneArg {
    RowSum,
    PrefixPaf,
    All,
    None,
}

#[derive(Debug, clap::Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub order: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Prunes to enable; repeatable. Defaults to all.
    #[arg(long, value_enum)]
    pub prune: Vec<PruneArg>,
    /// Also report one representative per rotation/negation class.
    #[arg(long)]
    pub canonical: bool,
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    /// Append-only shard ledger; finished shards are skipped on rerun.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
}

/// The machine-readable document emitted by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub ok: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What a finished invocation prints and returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Rendered {
    report: Report,
    text: String,
    code: i32,
}

#[derive(Debug)]
struct UsageError(String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<Rendered, UsageError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: rendered }
            } else {
                Outcome { code, stdout: rendered, stderr: String::new() }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Verify(input) => cmd_verify(input),
        Command::Paf { input, lag } => cmd_paf(input, *lag),
        Command::Decompose(input) => cmd_decompose(input),
        Command::Eqn1 { input, lag } => cmd_eqn1(input, *lag),
        Command::Match { input, lag } => cmd_match(input, *lag),
        Command::Chase { input, matchings, start } => cmd_chase(input, matchings, start),
        Command::Counterexample => Ok(cmd_counterexample()),
        Command::Search(args) => cmd_search(args),
    };
    match result {
        Ok(r) => {
            let stdout = match cli.format {
                Format::Json => r.report.to_json() + "\n",
                Format::Text => r.text,
            };
            Outcome { code: r.code, stdout, stderr: String::new() }
        }
        Err(UsageError(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn verdict_code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let lines: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    if lines.is_empty() {
        return Err(UsageError(format!("{}: no instances", path.display())));
    }
    Ok(lines)
}

fn instances(positional: &Option<String>, file: &Option<PathBuf>, what: &str) -> Result<Vec<String>, UsageError> {
    match (positional, file) {
        (Some(s), _) => Ok(vec![s.clone()]),
        (None, Some(path)) => read_lines(path),
        (None, None) => Err(UsageError(format!("no {what} given (positional or --file)"))),
    }
}

fn parse_sequences(input: &SeqInput) -> Result<Vec<SignSequence>, UsageError> {
    instances(&input.sequence, &input.file, "sequence")?
        .iter()
        .map(|s| s.parse::<SignSequence>().map_err(|e| UsageError(format!("{s:?}: {e}"))))
        .collect()
}

fn parse_blocks(input: &BlockInput) -> Result<Vec<BlockSequence>, UsageError> {
    instances(&input.blocks, &input.file, "block sequence")?
        .iter()
        .map(|s| s.parse::<BlockSequence>().map_err(|e| UsageError(format!("{s:?}: {e}"))))
        .collect()
}

/// Folds per-instance payloads into one report; a single instance is not
/// wrapped in an array.
fn collect(command: &str, items: Vec<(String, Value, bool, String)>) -> Rendered {
    let ok = items.iter().all(|(_, _, ok, _)| *ok);
    let text = items.iter().map(|(_, _, _, t)| t.as_str()).collect::<Vec<_>>().join("\n");
    let (inputs, result) = if items.len() == 1 {
        let (i, r, _, _) = items.into_iter().next().unwrap();
        (Value::String(i), r)
    } else {
        let (inputs, results): (Vec<Value>, Vec<Value>) =
            items.into_iter().map(|(i, r, _, _)| (Value::String(i), r)).unzip();
        (Value::Array(inputs), Value::Array(results))
    };
    Rendered {
        report: Report { command: command.into(), inputs, result, ok },
        text,
        code: verdict_code(ok),
    }
}

fn cmd_verify(input: &SeqInput) -> CmdResult {
    let items = parse_sequences(input)?
        .into_iter()
        .map(|h| {
            let ok = h.is_circulant_hadamard();
            let spectrum = h.paf_spectrum();
            let result = json!({
                "sequence": h,
                "length": h.len(),
                "circulant_hadamard": ok,
                "row_sum": h.row_sum(),
                "paf": spectrum.values,
            });
            let text = format!(
                "sequence            {h}\nlength              {}\nrow sum             {}\npaf                 {:?}\ncirculant Hadamard  {}\n",
                h.len(),
                h.row_sum(),
                spectrum.values,
                if ok { "yes" } else { "no" }
            );
            (h.to_string(), result, ok, text)
        })
        .collect();
    Ok(collect("verify", items))
}

fn cmd_paf(input: &SeqInput, lag: Option<i64>) -> CmdResult {
    let mut items = Vec::new();
    for h in parse_sequences(input)? {
        let (result, text) = match lag {
            Some(l) => {
                let u = normalize_lag(l, h.len())?;
                let v = h.paf(u)?;
                (json!({ "sequence": h, "lag": u, "paf": v }), format!("paf({h}, {u}) = {v}\n"))
            }
            None => {
                let s = h.paf_spectrum();
                (json!({ "sequence": h, "paf": s.values }), format!("{h}  {:?}\n", s.values))
            }
        };
        items.push((h.to_string(), result, true, text));
    }
    Ok(collect("paf", items))
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "Even",
        Parity::Odd => "Odd",
    }
}

fn cmd_decompose(input: &SeqInput) -> CmdResult {
    let mut items = Vec::new();
    for h in parse_sequences(input)? {
        let bs = block_decompose(&h)?;
        let parities: Vec<&str> = bs.parities().into_iter().map(parity_name).collect();
        let symmetric: Vec<Value> = bs
            .even_indices()
            .into_iter()
            .map(|i| json!({ "index": i, "symmetric": bs.is_symmetric_even(i).expect("even index") }))
            .collect();
        let mut text = format!("blocks      {bs}\nn           {}\n", bs.half());
        for (i, (b, p)) in bs.blocks().iter().zip(&parities).enumerate() {
            let sym = match bs.is_symmetric_even(i) {
                Ok(true) => "  symmetric",
                Ok(false) => "  not symmetric",
                Err(_) => "",
            };
            let _ = writeln!(text, "  M{i:<4} {b}  {p}{sym}");
        }
        let _ = writeln!(text, "even count  {}", bs.even_count());
        let result = json!({
            "sequence": h,
            "blocks": bs,
            "n": bs.half(),
            "parities": parities,
            "even_count": bs.even_count(),
            "even_blocks": symmetric,
        });
        items.push((h.to_string(), result, true, text));
    }
    Ok(collect("decompose", items))
}

fn block_lag(bs: &BlockSequence, lag: i64) -> Result<usize, UsageError> {
    let u = normalize_lag(lag, bs.len())?;
    if u == 0 {
        return Err(Error::LagOutOfRange { lag: 0, len: bs.len() }.into());
    }
    Ok(u)
}

fn grid(m: &crate::block::SymBlockMatrix, indent: &str) -> String {
    m.to_string().lines().map(|l| format!("{indent}{l}\n")).collect()
}

fn cmd_eqn1(input: &BlockInput, lag: Option<i64>) -> CmdResult {
    let mut items = Vec::new();
    for bs in parse_blocks(input)? {
        let (result, ok, text) = match lag {
            Some(l) => {
                let u = block_lag(&bs, l)?;
                let r = bs.eqn1_residual(u)?;
                let text = format!("lag {u} residual\n{}", grid(&r, "  "));
                (json!({ "blocks": bs, "lag": u, "residual": r, "zero": r.is_zero() }), r.is_zero(), text)
            }
            None => {
                let mut text = String::new();
                let mut per_lag = Vec::new();
                for u in 1..bs.len() {
                    let r = bs.eqn1_residual(u)?;
                    let _ = write!(text, "lag {u}\n{}", grid(&r, "  "));
                    per_lag.push(json!({ "lag": u, "residual": r, "zero": r.is_zero() }));
                }
                let holds = bs.eqn1_holds();
                let _ = writeln!(text, "holds at every nonzero lag: {}", if holds { "yes" } else { "no" });
                (json!({ "blocks": bs, "lags": per_lag, "holds": holds }), holds, text)
            }
        };
        items.push((bs.to_string(), result, ok, text));
    }
    Ok(collect("eqn1", items))
}

fn cmd_match(input: &BlockInput, lag: Option<i64>) -> CmdResult {
    let mut items = Vec::new();
    for bs in parse_blocks(input)? {
        let lags: Vec<usize> = match lag {
            Some(l) => vec![block_lag(&bs, l)?],
            None => (1..bs.len()).collect(),
        };
        let mut book = MatchingBook::new();
        let mut per_lag = Vec::new();
        let mut perfect_everywhere = true;
        for u in lags {
            let m = find_matching(&bs, u)?;
            let perfect = m.is_perfect(&bs);
            perfect_everywhere &= perfect;
            per_lag.push(json!({ "lag": u, "matching": m, "perfect": perfect }));
            if !m.is_empty() {
                book.insert(m);
            }
        }
        let result = json!({
            "blocks": bs,
            "lags": per_lag,
            "perfect": perfect_everywhere,
            "matching_file": book.to_string(),
        });
        let text = format!("# blocks {bs}\n{book}");
        items.push((bs.to_string(), result, true, text));
    }
    Ok(collect("match", items))
}

fn trace_json(steps: &[ChaseStep]) -> Value {
    serde_json::to_value(steps).expect("steps serialize")
}

fn cmd_chase(input: &BlockInput, matchings: &Path, start: &str) -> CmdResult {
    let mut all = parse_blocks(input)?;
    if all.len() != 1 {
        return Err(UsageError(format!("chase takes one block sequence, got {}", all.len())));
    }
    let bs = all.remove(0);
    let start: IndexPair = start.parse().map_err(UsageError)?;
    let text = std::fs::read_to_string(matchings)
        .map_err(|e| UsageError(format!("{}: {e}", matchings.display())))?;
    let book = MatchingBook::parse_for(&text, &bs).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", matchings.display())).collect();
        UsageError(lines.join("\n"))
    })?;
    let trace = chase(&bs, &book, start)?;
    let ok = trace.outcome != ChaseOutcome::MatchingUnavailable;
    let report = Report {
        command: "chase".into(),
        inputs: json!({
            "blocks": bs,
            "matchings": book.to_string(),
            "start": start,
        }),
        result: json!({
            "steps": trace_json(&trace.steps),
            "outcome": trace.outcome,
            "terminal": trace.terminal,
        }),
        ok,
    };
    Ok(Rendered { report, text: format!("{trace}\n"), code: verdict_code(ok) })
}

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// The four checks of the built-in counterexample, in order.
pub fn counterexample_checks() -> (Vec<Check>, Option<crate::matching::ChaseTrace>) {
    let cx = paper_counterexample();
    let bs = &cx.blocks;
    let even = bs.even_indices();
    let symmetric: Vec<usize> = even
        .iter()
        .copied()
        .filter(|&i| bs.is_symmetric_even(i).unwrap_or(true))
        .collect();
    let violations = cx.book.violations(bs);
    let trace = chase(bs, &cx.book, cx.start).ok();
    let expected_steps = [
        ChaseStep { obligation: IndexPair::new(0, 2), matched: Some(IndexPair::new(2, 4)) },
        ChaseStep { obligation: IndexPair::new(0, 4), matched: Some(IndexPair::new(4, 2)) },
    ];
    let chase_pass = trace.as_ref().is_some_and(|t| {
        t.outcome == ChaseOutcome::Cycle && t.steps == expected_steps && t.terminal == cx.start
    });
    let checks = vec![
        Check {
            name: "even blocks are M0, M2, M4".into(),
            pass: even == [0, 2, 4],
            detail: format!("even blocks {even:?}"),
        },
        Check {
            name: "no even block is symmetric".into(),
            pass: even.len() == 3 && symmetric.is_empty(),
            detail: format!("symmetric even blocks {symmetric:?}"),
        },
        Check {
            name: "matchings (0,2)~(2,4) and (0,4)~(4,2) are valid".into(),
            pass: violations.is_empty() && cx.book.iter().map(|m| m.pairs.len()).sum::<usize>() == 2,
            detail: if violations.is_empty() {
                cx.book
                    .iter()
                    .flat_map(|m| m.pairs.iter().map(move |p| (m.lag, p)))
                    .map(|(u, p)| {
                        format!(
                            "u={u}: {} -> {:?}, {} -> {:?}",
                            p.left,
                            bs.block(p.left.first).product(bs.block(p.left.second)).rows(),
                            p.right,
                            bs.block(p.right.first).product(bs.block(p.right.second)).rows()
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("; ")
            } else {
                violations.iter().map(|(u, v)| format!("u={u}: {v}")).collect::<Vec<_>>().join("; ")
            },
        },
        Check {
            name: "chase from (0,2) cycles back to (0,2)".into(),
            pass: chase_pass,
            detail: trace
                .as_ref()
                .map(|t| format!("{} after {} steps, terminal {}", t.outcome, t.steps.len(), t.terminal))
                .unwrap_or_else(|| "chase rejected its input".into()),
        },
    ];
    (checks, trace)
}

fn cmd_counterexample() -> Rendered {
    let cx = paper_counterexample();
    let (checks, trace) = counterexample_checks();
    let ok = checks.iter().all(|c| c.pass);
    let mut text = format!("blocks  {}\n", cx.blocks);
    for c in &checks {
        let _ = writeln!(text, "[{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(t) = &trace {
        let _ = writeln!(text, "{t}");
    }
    let report = Report {
        command: "counterexample".into(),
        inputs: json!({
            "blocks": cx.blocks,
            "matchings": cx.book.to_string(),
            "start": cx.start,
        }),
        result: json!({
            "even_blocks": cx.blocks.even_indices(),
            "checks": checks,
            "trace": trace.map(|t| json!({
                "steps": trace_json(&t.steps),
                "outcome": t.outcome,
                "terminal": t.terminal,
            })),
        }),
        ok,
    };
    Rendered { report, text, code: verdict_code(ok) }
}

fn prunes_from(args: &[PruneArg]) -> Prunes {
    if args.is_empty() {
        return Prunes::ALL;
    }
    let mut p = Prunes::NONE;
    for a in args {
        match a {
            PruneArg::RowSum => p.row_sum = true,
            PruneArg::PrefixPaf => p.prefix_paf = true,
            PruneArg::All => p = Prunes::ALL,
            PruneArg::None => {}
        }
    }
    p
}

fn search_text(r: &SearchReport) -> String {
    let mut t = format!(
        "order               {}\nprunes              row-sum={} prefix-paf={}\nsequences examined  {}\n",
        r.order, r.prunes.row_sum, r.prunes.prefix_paf, r.sequences_examined
    );
    let s = &r.prune_statistics;
    if s.order_rejected {
        let _ = writeln!(t, "row-sum prune       order rejected ({} is not a perfect square)", r.order);
    } else {
        let _ = writeln!(t, "cuts                row-sum={} prefix-paf={}", s.row_sum, s.prefix_paf);
    }
    let _ = writeln!(t, "shards              {}/{}", r.shards_completed, r.shards);
    let _ = writeln!(t, "solutions           {}", r.solutions.len());
    for h in &r.solutions {
        let _ = writeln!(t, "  {h}");
    }
    if let Some(reps) = &r.canonical {
        let _ = writeln!(t, "classes             {}", reps.len());
        for h in reps {
            let _ = writeln!(t, "  {h}");
        }
    }
    if r.incomplete {
        let _ = writeln!(t, "INCOMPLETE: budget exhausted before every shard finished");
    }
    let _ = writeln!(t, "elapsed             {} ms", r.elapsed_ms);
    t
}

fn cmd_search(args: &SearchArgs) -> CmdResult {
    let budget = match args.budget_seconds {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            return Err(UsageError(format!("invalid budget {s}")));
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let cfg = SearchConfig::new(args.order)
        .prunes(prunes_from(&args.prune))
        .workers(args.workers)
        .canonicalize(args.canonical)
        .budget(budget);
    let report = match &args.ledger {
        Some(path) => search_with_ledger(&cfg, path)?,
        None => search(&cfg)?,
    };
    let ok = !report.incomplete;
    let text = search_text(&report);
    Ok(Rendered {
        report: Report {
            command: "search".into(),
            inputs: json!({
                "order": args.order,
                "workers": args.workers,
                "prunes": cfg.prunes,
                "canonical": args.canonical,
                "budget_seconds": args.budget_seconds,
                "ledger": args.ledger,
            }),
            result: serde_json::to_value(&report).expect("report serializes"),
            ok,
        },
        text,
        code: verdict_code(ok),
    })
}
