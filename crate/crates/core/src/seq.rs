//! Sign sequences and the periodic autocorrelation of their circulants.
//!
//! A [`SignSequence`] `h` of length `L` is the first row of the circulant
//! matrix `H` with `H[r][c] = h[(c - r) mod L]`. Rows of `H` are pairwise
//! orthogonal exactly when every off-peak periodic autocorrelation value
//! `paf(h, u)`, `u != 0`, vanishes.
//!
//! Text form is a string over `+` and `-`, index 0 leftmost. The packed form
//! ([`SignSequence::to_mask`]) sets bit `k` when `h[k] = -1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A single entry of a ±1 sequence. Ordered with `Plus < Minus`, which gives
/// the lexicographic order used for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    #[inline]
    pub fn from_char(ch: char) -> Option<Sign> {
        match ch {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            _ => None,
        }
    }

    #[inline]
    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    #[inline]
    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A non-empty sequence over {+1, -1}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignSequence {
    entries: Vec<Sign>,
}

impl SignSequence {
    pub fn new(entries: Vec<Sign>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { entries })
    }

    /// Builds a sequence from ±1 integers. Anything else is rejected.
    pub fn from_values(values: &[i64]) -> Result<Self> {
        let entries = values
            .iter()
            .enumerate()
            .map(|(pos, &v)| match v {
                1 => Ok(Sign::Plus),
                -1 => Ok(Sign::Minus),
                _ => Err(Error::InvalidSign { ch: '?', pos }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Unpacks `len` entries from `mask`; bit `k` set means `h[k] = -1`.
    ///
    /// Panics if `len` is 0 or exceeds 64.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!((1..=64).contains(&len), "mask length must be in 1..=64");
        let entries = (0..len)
            .map(|k| if mask >> k & 1 == 1 { Sign::Minus } else { Sign::Plus })
            .collect();
        Self { entries }
    }

    /// Packed form, `None` when longer than 64.
    pub fn to_mask(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(
            self.entries
                .iter()
                .enumerate()
                .filter(|(_, s)| s.is_minus())
                .fold(0u64, |m, (k, _)| m | 1 << k),
        )
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Sign] {
        &self.entries
    }

    /// Entry at `index mod L`.
    #[inline]
    pub fn at(&self, index: usize) -> Sign {
        self.entries[index % self.entries.len()]
    }

    pub fn values(&self) -> Vec<i64> {
        self.entries.iter().map(|s| s.value()).collect()
    }

    pub fn row_sum(&self) -> i64 {
        self.entries.iter().map(|s| s.value()).sum()
    }

    pub fn negate(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&s| -s).collect(),
        }
    }

    /// Cyclic left rotation: the result starts at `h[shift mod L]`.
    pub fn rotate(&self, shift: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.rotate_left(shift % self.len());
        Self { entries }
    }

    /// Periodic autocorrelation at lag `u`, `0 <= u < L`.
    pub fn paf(&self, u: usize) -> Result<i64> {
        let len = self.len();
        if u >= len {
            return Err(Error::LagOutOfRange { lag: u, len });
        }
        Ok(self.paf_unchecked(u))
    }

    fn paf_unchecked(&self, u: usize) -> i64 {
        let len = self.len();
        (0..len)
            .map(|k| (self.entries[k] * self.entries[(k + u) % len]).value())
            .sum()
    }

    pub fn paf_spectrum(&self) -> PafSpectrum {
        PafSpectrum {
            values: (0..self.len()).map(|u| self.paf_unchecked(u)).collect(),
        }
    }

    /// Whether the circulant with this first row is a Hadamard matrix.
    ///
    /// Only orders `4n` are accepted; lengths 1 and 2 are rejected even
    /// though `[1]` is trivially Hadamard.
    pub fn is_circulant_hadamard(&self) -> bool {
        let len = self.len();
        len.is_multiple_of(4) && (1..len).all(|u| self.paf_unchecked(u) == 0)
    }

    /// Row `r` of the circulant: entry `c` is `h[(c - r) mod L]`.
    pub fn circulant_row(&self, r: usize) -> Result<SignSequence> {
        let len = self.len();
        if r >= len {
            return Err(Error::IndexOutOfRange { index: r, len });
        }
        Ok(self.rotate(len - r))
    }
}

/// Reduces a possibly negative lag into `[0, len)`. Lags at or beyond `len`
/// are rejected rather than wrapped.
pub fn normalize_lag(lag: i64, len: usize) -> Result<usize> {
    let l = len as i64;
    let out = if lag < 0 { lag + l } else { lag };
    if out < 0 || out >= l {
        return Err(Error::LagOutOfRange {
            lag: lag.unsigned_abs() as usize,
            len,
        });
    }
    Ok(out as usize)
}

impl FromStr for SignSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .enumerate()
            .map(|(pos, ch)| Sign::from_char(ch).ok_or(Error::InvalidSign { ch, pos }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.entries {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl Serialize for SignSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `values[u] = paf(h, u)` for every lag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PafSpectrum {
    pub values: Vec<i64>,
}

impl PafSpectrum {
    /// True when every off-peak value is zero.
    pub fn is_flat(&self) -> bool {
        self.values.iter().skip(1).all(|&v| v == 0)
    }

    pub fn total(&self) -> i64 {
        self.values.iter().sum()
    }
}
