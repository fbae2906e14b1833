//! Closed-form cardinalities used by the construction: per-support-size
//! tuple counts, eligible-group counts, block boundaries, the sampling
//! threshold `phi_min` and the converse lower bound on the communication
//! cost.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, BigCount};
use crate::error::{Error, Result};

/// Tolerance for real-valued bound comparisons.
pub const REAL_TOLERANCE: f64 = 1e-9;

fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

fn signed_binomial(n: u64, k: u64) -> BigInt {
    BigInt::from(binomial(n, k))
}

fn to_count(v: BigInt) -> BigCount {
    debug_assert!(!v.is_negative(), "inclusion-exclusion produced {v}");
    v.to_biguint().unwrap_or_default()
}

/// Number of d-subsets of `beta` disjoint families of size `s` that meet
/// every one of the families: `sum_i (-1)^(beta-i) C(beta,i) C(s*i, d)`.
fn covering_count(s: u32, beta: u32, d: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for i in 0..=beta {
        let term = signed_binomial(beta as u64, i as u64) * signed_binomial((s * i) as u64, d as u64);
        if (beta - i) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `t_beta`: d-tuples whose support family is one fixed set of `beta`
/// families of size `s`.
pub fn t_beta(s: u32, f: u32, d: u32, beta: u32) -> Result<BigCount> {
    let min = ceil_div(d, s.max(1));
    if s == 0 || beta < min || beta > d || beta > f {
        return Err(Error::BetaOutOfRange {
            beta,
            min,
            max: d.min(f),
        });
    }
    Ok(to_count(covering_count(s, beta, d)))
}

/// `|C_beta| = C(f, beta) * t_beta`.
pub fn card_c_beta(s: u32, f: u32, d: u32, beta: u32) -> Result<BigCount> {
    Ok(binomial(f as u64, beta as u64) * t_beta(s, f, d, beta)?)
}

/// `m_beta = C(f - beta, d - beta)`: groups containing a fixed
/// `beta`-subset of families.
pub fn m_beta(f: u32, d: u32, beta: u32) -> Result<BigCount> {
    if beta > d || d > f {
        return Err(Error::BetaOutOfRange {
            beta,
            min: 0,
            max: d.min(f),
        });
    }
    Ok(binomial((f - beta) as u64, (d - beta) as u64))
}

/// Smallest support size of an excluded tuple.
pub fn beta_min(s0: u32, d: u32, g: u32) -> u32 {
    ceil_div(d.saturating_sub(g), s0.max(1))
}

/// `|R_{beta,I}|`: d-tuples with at least one of the `g` excluded elements
/// whose remaining elements meet exactly one fixed set of `beta` families
/// of size `s0`.
///
/// Uses the alternating sign `(-1)^(beta-i)`, matching `t_beta`; the
/// enumeration oracle in `oracle` confirms this convention.
pub fn card_r_beta_i(s0: u32, f: u32, g: u32, d: u32, beta: u32) -> Result<BigCount> {
    if g == 0 {
        return Ok(BigUint::zero());
    }
    let min = beta_min(s0, d, g);
    let max = d - 1;
    if beta < min || beta > max || beta > f {
        return Err(Error::BetaOutOfRange { beta, min, max });
    }
    let mut acc = BigInt::zero();
    for m in 1..=(d - beta).min(g) {
        acc += signed_binomial(g as u64, m as u64) * covering_count(s0, beta, d - m);
    }
    Ok(to_count(acc))
}

/// 1-based inclusive bounds of the `j`-th of `m` near-equal consecutive
/// blocks tiling `[1, t]`. The first `t mod m` blocks hold one extra item.
pub fn block_bounds<T>(t: &T, m: &T, j: &T) -> Result<(T, T)>
where
    T: Integer + Clone + From<u32> + ToString,
{
    let one = T::one();
    if j < &one || j > m {
        return Err(Error::IndexOutOfRange {
            index: j.to_string().parse().unwrap_or(u64::MAX),
            max: m.to_string().parse().unwrap_or(u64::MAX),
        });
    }
    let (q, r) = t.div_rem(m);
    let jm1 = j.clone() - one.clone();
    let start = jm1.clone() * q.clone() + jm1.min(r.clone()) + one;
    let end = j.clone() * q + j.clone().min(r);
    Ok((start, end))
}

/// Inverse of [`block_bounds`]: which block holds position `pos`.
pub fn block_of(t: u128, m: u128, pos: u128) -> u128 {
    debug_assert!(pos >= 1 && pos <= t && m >= 1);
    let (q, r) = (t / m, t % m);
    let wide = r * (q + 1);
    if pos <= wide {
        (pos - 1) / (q + 1) + 1
    } else {
        r + (pos - wide - 1) / q + 1
    }
}

/// Result of [`phi_min`]: the sampling threshold and whether it exceeds 1,
/// in which case the high-probability balance guarantee says nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiMin {
    pub value: f64,
    pub vacuous: bool,
}

/// `96 N ln(2 N n) / (C(n,d) - 2^(d+2) N)`.
pub fn phi_min(n: u32, d: u32, workers: u64) -> Result<PhiMin> {
    let total = BigInt::from(binomial(n as u64, d as u64));
    let threshold = (BigInt::one() << (d + 2)) * BigInt::from(workers);
    if total <= threshold {
        return Err(Error::DegenerateDenominator {
            total: total.to_string(),
            threshold: threshold.to_string(),
        });
    }
    let denom = (total - threshold).to_f64().unwrap_or(f64::INFINITY);
    let numer = 96.0 * workers as f64 * (2.0 * workers as f64 * n as f64).ln();
    let value = numer / denom;
    Ok(PhiMin {
        value,
        vacuous: value > 1.0,
    })
}

/// Converse bound `phi^(1/d) n / N^(1/d)` and its integer counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiLowerBound {
    pub value: f64,
    /// `max(ceil(value), d)` with the ceiling taken at [`REAL_TOLERANCE`].
    pub integer: u64,
}

pub fn pi_lower_bound(n: u32, d: u32, workers: u64, phi: f64) -> Result<PiLowerBound> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidPhi(phi));
    }
    if workers == 0 || d == 0 {
        return Err(Error::InvalidDimensions {
            n: n as u64,
            d: d as u64,
        });
    }
    let value = phi.powf(1.0 / d as f64) * n as f64 / (workers as f64).powf(1.0 / d as f64);
    let integer = ((value - REAL_TOLERANCE).ceil().max(0.0) as u64).max(d as u64);
    Ok(PiLowerBound { value, integer })
}

/// Exact integer form of the converse for a concrete task count:
/// the least `pi` with `pi^d * N * C(n,d) >= |X| * n^d`.
pub fn pi_lower_bound_exact(n: u32, d: u32, workers: u64, tasks: u64) -> u64 {
    if tasks == 0 {
        return 0;
    }
    let total = binomial(n as u64, d as u64);
    let rhs = BigUint::from(tasks) * BigUint::from(n).pow(d);
    let feasible = |pi: u64| BigUint::from(pi).pow(d) * workers * &total >= rhs;
    let mut pi = 0u64;
    while !feasible(pi) {
        pi += 1;
    }
    pi.max(d as u64)
}

/// Per-`beta` counts of the construction, for one support size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingRow {
    pub beta: u32,
    pub t_beta: BigCount,
    pub card_c_beta: BigCount,
    pub m_beta: BigCount,
    pub q_beta: BigCount,
    pub r_beta: BigCount,
    /// Present for the non-divisible case only.
    pub card_r_beta: Option<BigCount>,
    pub card_r_beta_i: Option<BigCount>,
}

/// Counting tables for family size `s` (or `s0`), `f` families and `g`
/// excluded elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingTables {
    pub s: u32,
    pub f: u32,
    pub d: u32,
    pub g: u32,
    pub rows: Vec<CountingRow>,
}

impl CountingTables {
    pub fn new(s: u32, f: u32, d: u32, g: u32) -> Result<Self> {
        let lo = if g > 0 { beta_min(s, d, g) } else { ceil_div(d, s) };
        let mut rows = Vec::new();
        for beta in lo..=d.min(f) {
            let in_c_range = beta >= ceil_div(d, s);
            let t = if in_c_range {
                t_beta(s, f, d, beta)?
            } else {
                BigUint::zero()
            };
            let m = m_beta(f, d, beta)?;
            let (q, r) = t.div_rem(&m);
            let r_i = if g > 0 && beta < d {
                Some(card_r_beta_i(s, f, g, d, beta)?)
            } else {
                None
            };
            rows.push(CountingRow {
                beta,
                card_c_beta: binomial(f as u64, beta as u64) * &t,
                t_beta: t,
                m_beta: m,
                q_beta: q,
                r_beta: r,
                card_r_beta: r_i.as_ref().map(|x| binomial(f as u64, beta as u64) * x),
                card_r_beta_i: r_i,
            });
        }
        Ok(CountingTables { s, f, d, g, rows })
    }

    /// `sum_beta |C_beta|`, which equals `C(s*f, d)`.
    pub fn total_c(&self) -> BigCount {
        self.rows.iter().map(|r| &r.card_c_beta).sum()
    }

    /// `sum_beta |R_beta|`, which equals `C(n,d) - C(n',d)`.
    pub fn total_r(&self) -> BigCount {
        self.rows.iter().filter_map(|r| r.card_r_beta.as_ref()).sum()
    }
}
