//! Integer partitions, Young diagram statistics, and the partition-level
//! predicates used by the positivity rules (`Pos(e)`, the `S⁺` shift and
//! the conversion between partitions and flag-variety twists).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonincreasing, eventually-zero sequence of natural numbers.
///
/// Trailing zeros are stripped on construction, so `(2,1,0)` and `(2,1)`
/// are the same value. The empty sequence is the zero partition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

/// A box of a Young diagram, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl Partition {
    /// Builds a partition, rejecting sequences that increase anywhere.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::NotAPartition(parts));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts })
    }

    pub fn zero() -> Self {
        Partition { parts: Vec::new() }
    }

    /// The one-row partition `(n)`.
    pub fn row(n: usize) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Partition { parts: vec![n] }
        }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `λ_i` with 1-based indexing; zero past the end.
    pub fn part(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Largest `n` with `λ_n ≠ 0`.
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    /// `|λ|`.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.part(1);
        let parts = (1..=width)
            .map(|c| self.parts.iter().take_while(|&&p| p >= c).count())
            .collect();
        Partition { parts }
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        c.row >= 1 && c.col >= 1 && c.col <= self.part(c.row)
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (1..=p).map(move |j| Cell::new(i + 1, j)))
    }

    /// Whether the diagram of `other` fits inside the diagram of `self`.
    pub fn contains(&self, other: &Partition) -> bool {
        other.length() <= self.length() && other.parts.iter().zip(&self.parts).all(|(a, b)| a <= b)
    }

    pub fn hook_length(&self, c: Cell) -> Result<usize> {
        if !self.contains_cell(c) {
            return Err(Error::CellOutside {
                row: c.row,
                col: c.col,
                shape: self.clone(),
            });
        }
        let arm = self.part(c.row) - c.col;
        let leg = self.conjugate().part(c.col) - c.row;
        Ok(arm + leg + 1)
    }

    /// All hook lengths, row-major.
    pub fn hook_lengths(&self) -> Vec<usize> {
        let conj = self.conjugate();
        self.cells()
            .map(|c| (self.part(c.row) - c.col) + (conj.part(c.col) - c.row) + 1)
            .collect()
    }

    /// `f^λ = |λ|! / ∏ hooks`, the number of standard Young tableaux.
    pub fn num_standard_tableaux(&self) -> u128 {
        let n = self.weight();
        let num: BigUint = (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k));
        let den: BigUint = self
            .hook_lengths()
            .into_iter()
            .fold(BigUint::one(), |acc, h| acc * BigUint::from(h));
        (num / den).to_u128().expect("f^λ overflows u128")
    }

    /// `(λ_1−λ_e, …, λ_{e−1}−λ_e, 0, …)`.
    pub fn reduced(&self, e: usize) -> Result<Partition> {
        if self.length() > e {
            return Err(Error::LengthExceeds {
                shape: self.clone(),
                bound: e,
            });
        }
        let last = self.part(e);
        Partition::new((1..e).map(|i| self.part(i) - last).collect())
    }

    /// Membership in `Pos(e)`: `length(λ) ≤ e` and `λ_e ≥ length(reduced(λ, e))`.
    pub fn in_pos(&self, e: usize) -> bool {
        match self.reduced(e) {
            Ok(r) => self.part(e) >= r.length(),
            Err(_) => false,
        }
    }

    /// `λ_e − length(reduced(λ, e))`, the exponent of `det` left over after
    /// writing `S^λ = S^{λ'}_+ ⊗ det^n`. `None` when `λ ∉ Pos(e)`.
    pub fn pos_excess(&self, e: usize) -> Option<usize> {
        let r = self.reduced(e).ok()?;
        self.part(e).checked_sub(r.length())
    }

    /// The index partition of `S⁺`: the first `e` parts each raised by `length(λ)`.
    pub fn plus_shift(&self, e: usize) -> Result<Partition> {
        if self.is_zero() {
            return Err(Error::ZeroPartition("plus_shift"));
        }
        let len = self.length();
        if len > e {
            return Err(Error::LengthExceeds {
                shape: self.clone(),
                bound: e,
            });
        }
        Partition::new((1..=e).map(|i| self.part(i) + len).collect())
    }

    /// Jump indices `k` (with `1 ≤ k ≤ e`) where `λ_k − λ_{k+1} ≠ 0`, paired
    /// with the jump. `λ_{e+1}` is treated as zero.
    pub fn to_twists(&self, e: usize) -> Result<Vec<(usize, usize)>> {
        if self.length() > e {
            return Err(Error::LengthExceeds {
                shape: self.clone(),
                bound: e,
            });
        }
        Ok((1..=e)
            .filter_map(|k| {
                let next = if k == e { 0 } else { self.part(k + 1) };
                let a = self.part(k) - next;
                (a != 0).then_some((k, a))
            })
            .collect())
    }

    /// Cumulative sums of the twists at indices below `e`. A twist at `k = e`
    /// is a power of the determinant, which is trivial on the flag variety, so
    /// it is dropped: the result is `λ − λ_e·(1^e)`.
    pub fn from_twists(twists: &[(usize, usize)], e: usize) -> Result<Partition> {
        if let Some(&(k, _)) = twists.iter().find(|(k, _)| *k == 0 || *k > e) {
            return Err(Error::TwistIndex { index: k, rank: e });
        }
        let parts = (1..=e)
            .map(|j| {
                twists
                    .iter()
                    .filter(|(k, _)| *k >= j && *k < e)
                    .map(|(_, a)| a)
                    .sum()
            })
            .collect();
        Partition::new(parts)
    }

    /// `λ_d ≥ length(reduced(λ, d)) + slack`.
    pub fn qlambda_condition(&self, d: usize, slack: usize) -> bool {
        match self.reduced(d) {
            Ok(r) => self.part(d) >= r.length() + slack,
            Err(_) => false,
        }
    }

    /// Adds `k` to each of the first `e` parts.
    pub fn add_columns(&self, k: usize, e: usize) -> Partition {
        let parts = (1..=e.max(self.length()))
            .map(|i| self.part(i) + if i <= e { k } else { 0 })
            .collect();
        Partition::new(parts).expect("adding full columns keeps the sequence nonincreasing")
    }

    /// All partitions of `n`, in reverse lexicographic order (`(n)` first).
    pub fn all_of(n: usize) -> Vec<Partition> {
        fn go(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition {
                    parts: prefix.clone(),
                });
                return;
            }
            for p in (1..=rest.min(max)).rev() {
                prefix.push(p);
                go(rest - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        go(n, n, &mut Vec::new(), &mut out);
        out
    }

    /// All partitions of `n` with at most `len` parts.
    pub fn all_of_length_at_most(n: usize, len: usize) -> Vec<Partition> {
        Self::all_of(n)
            .into_iter()
            .filter(|p| p.length() <= len)
            .collect()
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

/// Comma-separated parts, e.g. `2,1`; the empty string is the zero partition.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Partition::zero());
        }
        let parts = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                if t.is_empty() || (t.len() > 1 && t.starts_with('0')) {
                    return Err(Error::Parse(format!("bad partition part {t:?}")));
                }
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad partition part {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}
