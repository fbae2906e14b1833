//! Binomial coefficients and lexicographic enumeration, ranking and
//! unranking of d-subsets of `[n] = {1, ..., n}`.
//!
//! All file indices and ranks are 1-based.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact non-negative count of unbounded magnitude.
pub type BigCount = BigUint;

/// A strictly increasing sequence of `d` distinct file indices in `[1, n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DTuple(Vec<u32>);

impl DTuple {
    /// Validates that `elements` is strictly increasing and lies in `[1, n]`.
    pub fn new(elements: Vec<u32>, n: u32) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidDimensions { n: n as u64, d: 0 });
        }
        let ascending = elements.windows(2).all(|w| w[0] < w[1]);
        let in_range = elements[0] >= 1 && *elements.last().unwrap() <= n;
        if !ascending || !in_range {
            return Err(Error::Schema(format!(
                "{elements:?} is not a strictly increasing subset of [1, {n}]"
            )));
        }
        Ok(DTuple(elements))
    }

    pub fn elements(&self) -> &[u32] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Display for DTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl AsRef<[u32]> for DTuple {
    fn as_ref(&self) -> &[u32] {
        &self.0
    }
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) is divisible by (i + 1); fall back to big integers
        // only when the product itself overflows.
        match acc.checked_mul(n as u128 - i) {
            Some(p) => acc = p / (i + 1),
            None => return binomial(n, k).to_u128(),
        }
    }
    Some(acc)
}

/// Pascal table of `C(a, j)` for `a <= max_n`, `j <= max_k`, in checked
/// 128-bit arithmetic. Entries that overflow are stored as `None`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    max_n: usize,
    max_k: usize,
    rows: Vec<Option<u128>>,
}

impl BinomialTable {
    pub fn new(max_n: usize, max_k: usize) -> Self {
        let width = max_k + 1;
        let mut rows = vec![Some(0u128); (max_n + 1) * width];
        for a in 0..=max_n {
            rows[a * width] = Some(1);
            for j in 1..=max_k.min(a) {
                let up = rows[(a - 1) * width + j];
                let diag = rows[(a - 1) * width + j - 1];
                rows[a * width + j] = match (up, diag) {
                    (Some(x), Some(y)) => x.checked_add(y),
                    _ => None,
                };
            }
        }
        BinomialTable { max_n, max_k, rows }
    }

    /// `C(a, j)`; values of `a` beyond the table fall back to direct
    /// evaluation.
    pub fn get(&self, a: u64, j: u64) -> Result<u128> {
        if j > a {
            return Ok(0);
        }
        if (a as usize) <= self.max_n && (j as usize) <= self.max_k {
            self.rows[a as usize * (self.max_k + 1) + j as usize].ok_or(Error::CountOverflow)
        } else {
            binomial_u128(a, j).ok_or(Error::CountOverflow)
        }
    }
}

fn check_dims(n: u32, d: u32) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::InvalidDimensions {
            n: n as u64,
            d: d as u64,
        });
    }
    Ok(())
}

/// Streaming iterator over all d-subsets of `[n]` in lexicographic order.
#[derive(Debug, Clone)]
pub struct LexSubsets {
    n: u32,
    current: Option<Vec<u32>>,
}

impl Iterator for LexSubsets {
    type Item = DTuple;

    fn next(&mut self) -> Option<DTuple> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let d = cur.len();
        // rightmost position that can still be incremented
        let pos = (0..d).rev().find(|&i| cur[i] < self.n - (d - 1 - i) as u32);
        match pos {
            Some(i) => {
                cur[i] += 1;
                for j in i + 1..d {
                    cur[j] = cur[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(DTuple(out))
    }
}

/// All `C(n, d)` d-subsets of `[n]` in strict lexicographic order.
pub fn enumerate_lex(n: u32, d: u32) -> Result<LexSubsets> {
    check_dims(n, d)?;
    Ok(LexSubsets {
        n,
        current: Some((1..=d).collect()),
    })
}

/// 1-based lexicographic rank of `t` among the d-subsets of `[n]`.
pub fn lex_rank(t: &DTuple, n: u32) -> Result<BigCount> {
    let d = t.d() as u64;
    if t.elements().last().map_or(true, |&x| x > n) {
        return Err(Error::InvalidDimensions {
            n: n as u64,
            d,
        });
    }
    let mut rank = BigUint::one();
    let mut prev = 0u64;
    for (i, &x) in t.elements().iter().enumerate() {
        let x = x as u64;
        let rest = d - i as u64 - 1;
        // tuples whose i-th element is v in (prev, x): C(n - v, rest) each
        rank += binomial(n as u64 - prev, rest + 1) - binomial(n as u64 - x + 1, rest + 1);
        prev = x;
    }
    Ok(rank)
}

/// Inverse of [`lex_rank`].
pub fn lex_unrank(rank: &BigCount, n: u32, d: u32) -> Result<DTuple> {
    check_dims(n, d)?;
    let total = binomial(n as u64, d as u64);
    if rank.is_zero() || *rank > total {
        return Err(Error::RankOutOfRange {
            rank: rank.to_string(),
            max: total.to_string(),
        });
    }
    let mut remaining = rank.clone();
    let mut out = Vec::with_capacity(d as usize);
    let mut v = 1u32;
    for i in 0..d {
        let rest = (d - i - 1) as u64;
        loop {
            let block = binomial((n - v) as u64, rest);
            if remaining <= block {
                break;
            }
            remaining -= block;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    Ok(DTuple(out))
}

/// Fixed-width ranking for hot paths; ranks must fit in 128 bits.
#[derive(Debug, Clone)]
pub struct LexIndexer {
    n: u32,
    d: u32,
    table: BinomialTable,
}

impl LexIndexer {
    pub fn new(n: u32, d: u32) -> Result<Self> {
        check_dims(n, d)?;
        let table = BinomialTable::new(n as usize, d as usize);
        table.get(n as u64, d as u64)?;
        Ok(LexIndexer { n, d, table })
    }

    pub fn total(&self) -> u128 {
        self.table.get(self.n as u64, self.d as u64).unwrap()
    }

    pub fn rank(&self, t: &[u32]) -> u128 {
        debug_assert_eq!(t.len(), self.d as usize);
        rank_with(&self.table, self.n, t)
    }

    pub fn unrank(&self, rank: u128) -> Result<DTuple> {
        let total = self.total();
        if rank == 0 || rank > total {
            return Err(Error::RankOutOfRange {
                rank: rank.to_string(),
                max: total.to_string(),
            });
        }
        Ok(DTuple(unrank_with(&self.table, self.n, self.d, rank)))
    }
}

/// Lexicographic rank of `t` among the `t.len()`-subsets of `[n]`, using a
/// table that covers `C(n, t.len())`.
pub(crate) fn rank_with(table: &BinomialTable, n: u32, t: &[u32]) -> u128 {
    let n = n as u64;
    let d = t.len() as u64;
    let mut rank = 1u128;
    let mut prev = 0u64;
    for (i, &x) in t.iter().enumerate() {
        let x = x as u64;
        let k = d - i as u64;
        rank += table.get(n - prev, k).unwrap() - table.get(n - x + 1, k).unwrap();
        prev = x;
    }
    rank
}

/// Inverse of [`rank_with`]; `rank` must lie in `1..=C(n, d)`.
pub(crate) fn unrank_with(table: &BinomialTable, n: u32, d: u32, rank: u128) -> Vec<u32> {
    let mut remaining = rank;
    let mut out = Vec::with_capacity(d as usize);
    let mut v = 1u32;
    for i in 0..d {
        let rest = (d - i - 1) as u64;
        loop {
            let block = table.get((n - v) as u64, rest).unwrap();
            if remaining <= block {
                break;
            }
            remaining -= block;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    out
}
