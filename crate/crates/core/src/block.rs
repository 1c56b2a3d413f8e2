//! 2-blocks and the block-circulant view of a circulant of order `4n`.
//!
//! Pairing row `r` with row `r + 2n` and column `c` with column `c + 2n`
//! turns the circulant with first row `h` into a `2n x 2n` matrix of 2-blocks
//! whose first block-row is `M_0 .. M_{2n-1}` with
//!
//! ```text
//! M_d = [ h[d]      h[d+2n] ]
//!       [ h[d+2n]   h[d]    ]
//! ```
//!
//! Block `(r, c)` is `M_{c-r}` for `c >= r`. Wrapped blocks (`c < r`) are
//! `M_{c-r mod 2n}` with diagonal and off-diagonal swapped, so even blocks
//! are exactly block-circulant and odd ones change sign on wrapping.
//!
//! This half-shift pairing is an assumption: any other reordering that
//! yields 2-blocks differs from it by a relabelling of block indices, and
//! nothing downstream depends on the labels.
//!
//! Every 2-block is `x I + y X` with `X` the swap matrix, so 2-blocks commute
//! and sums of their products stay of the form `[[a, b], [b, a]]`
//! ([`SymBlockMatrix`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seq::{Sign, SignSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// `[[diag, offdiag], [offdiag, diag]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoBlock {
    pub diag: Sign,
    pub offdiag: Sign,
}

impl TwoBlock {
    pub const fn new(diag: Sign, offdiag: Sign) -> Self {
        Self { diag, offdiag }
    }

    pub fn parity(self) -> Parity {
        if self.diag == self.offdiag {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    #[inline]
    pub fn is_even(self) -> bool {
        self.parity() == Parity::Even
    }

    /// Exact 2x2 product.
    pub fn product(self, other: TwoBlock) -> SymBlockMatrix {
        let (a, b) = (self.diag.value(), self.offdiag.value());
        let (c, d) = (other.diag.value(), other.offdiag.value());
        SymBlockMatrix {
            diag: a * c + b * d,
            offdiag: a * d + b * c,
        }
    }

    /// Blocks are enumerated in base 4 with digit `2*[diag = -] + [offdiag = -]`,
    /// which matches the `Plus < Minus` lexicographic order.
    pub(crate) fn from_digit(d: u64) -> Self {
        let sign = |bit: u64| if bit == 1 { Sign::Minus } else { Sign::Plus };
        Self::new(sign(d >> 1 & 1), sign(d & 1))
    }

    fn text(self) -> [char; 2] {
        [self.diag.as_char(), self.offdiag.as_char()]
    }
}

impl fmt::Display for TwoBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.text();
        write!(f, "{a}{b}")
    }
}

/// Free function form of [`TwoBlock::product`].
pub fn block_product(a: TwoBlock, b: TwoBlock) -> SymBlockMatrix {
    a.product(b)
}

/// An integer matrix `[[diag, offdiag], [offdiag, diag]]`.
///
/// Serialized row-major as a nested array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SymBlockMatrix {
    pub diag: i64,
    pub offdiag: i64,
}

impl SymBlockMatrix {
    pub const ZERO: SymBlockMatrix = SymBlockMatrix { diag: 0, offdiag: 0 };

    /// `s * J` where `J` is the all-ones 2x2 matrix.
    pub const fn ones(s: i64) -> Self {
        Self { diag: s, offdiag: s }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        [[self.diag, self.offdiag], [self.offdiag, self.diag]]
    }
}

impl std::ops::Add for SymBlockMatrix {
    type Output = SymBlockMatrix;

    fn add(self, rhs: Self) -> Self {
        Self {
            diag: self.diag + rhs.diag,
            offdiag: self.offdiag + rhs.offdiag,
        }
    }
}

impl std::ops::Neg for SymBlockMatrix {
    type Output = SymBlockMatrix;

    fn neg(self) -> Self {
        Self {
            diag: -self.diag,
            offdiag: -self.offdiag,
        }
    }
}

impl std::iter::Sum for SymBlockMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for SymBlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .diag
            .to_string()
            .len()
            .max(self.offdiag.to_string().len());
        writeln!(f, "[ {:>w$} {:>w$} ]", self.diag, self.offdiag)?;
        write!(f, "[ {:>w$} {:>w$} ]", self.offdiag, self.diag)
    }
}

impl Serialize for SymBlockMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymBlockMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [[a, b], [c, d]] = <[[i64; 2]; 2]>::deserialize(deserializer)?;
        if a != d || b != c {
            return Err(serde::de::Error::custom(
                "matrix is not of the form [[a, b], [b, a]]",
            ));
        }
        Ok(Self { diag: a, offdiag: b })
    }
}

/// The first block-row `M_0 .. M_{2n-1}`; indices are taken mod `2n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockSequence {
    blocks: Vec<TwoBlock>,
}

impl BlockSequence {
    pub fn new(blocks: Vec<TwoBlock>) -> Result<Self> {
        if blocks.len() < 2 || !blocks.len().is_multiple_of(2) {
            return Err(Error::BadBlockCount { len: blocks.len() });
        }
        Ok(Self { blocks })
    }

    /// The `index`-th sequence of `len` blocks in lexicographic order,
    /// `0 <= index < 4^len`.
    pub fn from_index(len: usize, index: u64) -> Result<Self> {
        let blocks = (0..len)
            .map(|k| TwoBlock::from_digit(index >> (2 * (len - 1 - k)) & 3))
            .collect();
        Self::new(blocks)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// `n`, half the number of blocks.
    pub fn half(&self) -> usize {
        self.blocks.len() / 2
    }

    pub fn blocks(&self) -> &[TwoBlock] {
        &self.blocks
    }

    /// `M_{index mod 2n}`.
    #[inline]
    pub fn block(&self, index: usize) -> TwoBlock {
        self.blocks[index % self.blocks.len()]
    }

    pub fn parities(&self) -> Vec<Parity> {
        self.blocks.iter().map(|b| b.parity()).collect()
    }

    pub fn even_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.blocks[i].is_even()).collect()
    }

    pub fn even_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_even()).count()
    }

    fn check_lag(&self, u: usize) -> Result<()> {
        if u == 0 || u >= self.len() {
            return Err(Error::LagOutOfRange {
                lag: u,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Indices `i` with both `M_i` and `M_{i+u}` even, ascending.
    pub fn even_pairs_at(&self, u: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.blocks[i].is_even() && self.block(i + u).is_even())
            .collect()
    }

    /// `sum M_i M_{i+u}` over the `i` with `M_i` and `M_{i+u}` both even.
    /// An empty sum is the zero matrix.
    pub fn eqn1_residual(&self, u: usize) -> Result<SymBlockMatrix> {
        self.check_lag(u)?;
        Ok(self
            .even_pairs_at(u)
            .into_iter()
            .map(|i| self.blocks[i].product(self.block(i + u)))
            .sum())
    }

    /// The cancellation condition at every nonzero lag.
    pub fn eqn1_holds(&self) -> bool {
        (1..self.len()).all(|u| self.eqn1_residual(u).is_ok_and(|r| r.is_zero()))
    }

    /// Whether the even block `M_i` has an even antipode `M_{i+n}`.
    pub fn is_symmetric_even(&self, i: usize) -> Result<bool> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        if !self.blocks[i].is_even() {
            return Err(Error::OddBlock { index: i });
        }
        Ok(self.block(i + self.half()).is_even())
    }

    /// Inverse of [`block_decompose`]: `h[d] = M_d.diag`, `h[d+2n] = M_d.offdiag`.
    pub fn to_sign_sequence(&self) -> SignSequence {
        let entries = self
            .blocks
            .iter()
            .map(|b| b.diag)
            .chain(self.blocks.iter().map(|b| b.offdiag))
            .collect();
        SignSequence::new(entries).expect("block sequences are non-empty")
    }
}

/// Splits a sequence of length `4n` into the 2-blocks `M_d = (h[d], h[d+2n])`.
pub fn block_decompose(h: &SignSequence) -> Result<BlockSequence> {
    let len = h.len();
    if !len.is_multiple_of(4) {
        return Err(Error::NotMultipleOfFour { len });
    }
    let half = len / 2;
    let blocks = (0..half).map(|d| TwoBlock::new(h.at(d), h.at(d + half))).collect();
    BlockSequence::new(blocks)
}

impl FromStr for BlockSequence {
    type Err = Error;

    /// Comma-separated blocks, each rendered diag then offdiag: `"++,+-,--"`.
    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split(',')
            .enumerate()
            .map(|(pos, part)| {
                let part = part.trim();
                let mut chars = part.chars().map(Sign::from_char);
                match (chars.next(), chars.next(), chars.next()) {
                    (Some(Some(d)), Some(Some(o)), None) => Ok(TwoBlock::new(d, o)),
                    _ => Err(Error::InvalidBlock {
                        text: part.to_string(),
                        pos,
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }
}

impl fmt::Display for BlockSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for BlockSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BlockSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
