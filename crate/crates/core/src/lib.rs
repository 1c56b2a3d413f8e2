//! Tools for the circulant Hadamard matrix conjecture.
//!
//! * [`seq`]: ±1 sequences, periodic autocorrelation and the circulant
//!   Hadamard predicate.
//! * [`block`]: the 2-block view of a circulant of order `4n` and the
//!   even-even cancellation sum at each lag.
//! * [`matching`]: matchings of even-even index pairs, the chase over a
//!   fixed matching book, and the `n = 3` counterexample on which the chase
//!   cycles.
//! * [`search`]: sharded exhaustive search with row-sum and prefix-PAF
//!   prunes, plus enumeration of block sequences.
//! * [`cli`]: the `circhad` command-line frontend.
//!
//! ```
//! use circhad::{block_decompose, SignSequence};
//!
//! let h: SignSequence = "-+++".parse().unwrap();
//! assert!(h.is_circulant_hadamard());
//! let blocks = block_decompose(&h).unwrap();
//! assert_eq!(blocks.to_string(), "-+,++");
//! assert_eq!(blocks.even_count(), 1);
//! ```

pub mod block;
pub mod cli;
pub mod error;
pub mod matching;
pub mod search;
pub mod seq;

pub use block::{block_decompose, block_product, BlockSequence, Parity, SymBlockMatrix, TwoBlock};
pub use error::{Error, Result};
pub use matching::{
    chase, chase_step_bound, find_matching, paper_counterexample, validate_matching, ChaseOutcome,
    ChaseStep, ChaseTrace, Counterexample, IndexPair, LagMatching, MatchedPair, MatchingBook,
    Violation,
};
pub use search::{
    canonical_form, enumerate_block_sequences, minus_counts, rowsum_prune_applicable, search,
    search_with_ledger, PruneStatistics, Prunes, SearchConfig, SearchReport,
};
pub use seq::{normalize_lag, PafSpectrum, Sign, SignSequence};

// Runs the guide's and README's code blocks as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/two-blocks.md")]
    mod two_blocks {}
    #[doc = include_str!("../../../book/src/matchings.md")]
    mod matchings {}
    #[doc = include_str!("../../../book/src/chase.md")]
    mod chase {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
