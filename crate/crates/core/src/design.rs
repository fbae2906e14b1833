//! The interweaved-clique construction.
//!
//! Files `[n']` are cut into `f = k` contiguous families. A tuple that
//! meets `d` distinct families goes to the group labelled by exactly those
//! families. Every other tuple is bucketed by its support (the families it
//! meets, plus whether it holds an excluded element) and each bucket is
//! dealt out in near-equal lexicographic blocks to the groups whose label
//! contains the support. The resulting `N' = C(k, d)` groups are then cut
//! into lexicographic slices to reach `N` groups.
//!
//! Two independent routes produce the same partition:
//! [`build_base_partition`] walks all of `A_{n,d}` and materializes every
//! group, while [`IcDesign::assign`] locates a single tuple's group with
//! block arithmetic and inclusion-exclusion counting only.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    binomial_u128, enumerate_lex, rank_with, unrank_with, BinomialTable, DTuple, LexIndexer,
};
use crate::counting::{block_bounds, block_of};
use crate::error::{Error, Result};
use crate::task_set::{footprint, TaskMeta, TaskSet};

/// Default bound on `C(n, d)` for materialized partitions.
pub const DEFAULT_MATERIALIZATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `k` divides `n`.
    Divisible,
    /// `k` does not divide `n`; `g` files are set aside before forming
    /// families.
    NonDivisible,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::Divisible => "divisible",
            Case::NonDivisible => "non_divisible",
        }
    }
}

/// Constants of the construction for one `(n, d, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IcParameters {
    pub n: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub workers: u64,
    /// Largest `k <= n` with `C(k, d) <= N`.
    pub k: u32,
    /// Number of families; always equal to `k`.
    pub f: u32,
    pub case: Case,
    /// Family size: `s = n / k` when divisible, `s0 = floor(n/(k+d)) + 1`
    /// otherwise.
    pub s: u32,
    /// Excluded files `n - k * s0`; zero when divisible.
    pub g: u32,
    pub n_prime: u32,
    /// `N' = C(k, d)` groups before extension.
    #[serde(rename = "N_prime")]
    pub base_groups: u64,
    pub q: u64,
    pub p: u64,
    pub r: u64,
}

impl IcParameters {
    /// `s` in the divisible case.
    pub fn divisible_s(&self) -> Option<u32> {
        (self.case == Case::Divisible).then_some(self.s)
    }

    /// `s0` in the non-divisible case.
    pub fn s0(&self) -> Option<u32> {
        (self.case == Case::NonDivisible).then_some(self.s)
    }

    /// Guaranteed communication cost: `s*d`, or `s0*d + g`.
    pub fn pi_bound(&self) -> u64 {
        self.s as u64 * self.d as u64 + self.g as u64
    }

    /// `2 <= d <= n/32`.
    pub fn in_recommended_regime(&self) -> bool {
        self.d >= 2 && 32 * self.d <= self.n
    }

    /// `d <= n/32` and `N <= (0.9 sqrt(n/d))^d`, where the balance and
    /// `4e n / N^(1/d)` guarantees apply.
    pub fn in_balanced_regime(&self) -> bool {
        let cap = (0.9 * (self.n as f64 / self.d as f64).sqrt()).powi(self.d as i32);
        32 * self.d <= self.n && (self.workers as f64) <= cap
    }

    /// Number of `[N']` groups a group is cut into when extending to `N`.
    pub fn slices_of(&self, base_group: u64) -> u64 {
        if base_group <= self.r {
            self.p
        } else {
            self.q
        }
    }
}

/// Computes the construction constants for `n` files, degree `d` and `N`
/// workers.
pub fn derive_parameters(n: u32, d: u32, workers: u64) -> Result<IcParameters> {
    if d == 0 || d > n {
        return Err(Error::InvalidDimensions {
            n: n as u64,
            d: d as u64,
        });
    }
    if workers == 0 {
        return Err(Error::UnsupportedParameters {
            n,
            d,
            workers,
            reason: "at least one worker is required".into(),
        });
    }
    let mut k = d;
    while k < n && binomial_u128((k + 1) as u64, d as u64).is_some_and(|c| c <= workers as u128) {
        k += 1;
    }
    let base_groups = binomial_u128(k as u64, d as u64).ok_or(Error::CountOverflow)? as u64;
    let (case, s, g) = if n % k == 0 {
        (Case::Divisible, n / k, 0)
    } else {
        let s0 = n / (k + d) + 1;
        if s0 > n / k {
            return Err(Error::UnsupportedParameters {
                n,
                d,
                workers,
                reason: format!(
                    "k = {k} does not divide n and floor(n/(k+d)) + 1 = {s0} exceeds floor(n/k) = {}",
                    n / k
                ),
            });
        }
        (Case::NonDivisible, s0, n - k * s0)
    };
    let q = workers / base_groups;
    let r = workers % base_groups;
    let params = IcParameters {
        n,
        d,
        workers,
        k,
        f: k,
        case,
        s,
        g,
        n_prime: n - g,
        base_groups,
        q,
        p: if r > 0 { q + 1 } else { q },
        r,
    };
    if !params.in_recommended_regime() {
        log::warn!("(n = {n}, d = {d}) is outside the recommended regime 2 <= d <= n/32");
    }
    Ok(params)
}

/// The family blocks over `[n']` and the excluded files `{n'+1, ..., n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyLayout {
    pub families: Vec<RangeInclusive<u32>>,
    pub excluded: RangeInclusive<u32>,
}

impl FamilyLayout {
    pub fn excluded_count(&self) -> u32 {
        self.excluded.clone().count() as u32
    }
}

pub fn build_families(params: &IcParameters) -> FamilyLayout {
    let s = params.s;
    FamilyLayout {
        families: (1..=params.f).map(|i| (i - 1) * s + 1..=i * s).collect(),
        excluded: params.n_prime + 1..=params.n,
    }
}

/// Support of a tuple: which families it meets and how many excluded
/// files it holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportInfo {
    pub families: Vec<u32>,
    pub beta: u32,
    pub excluded_count: u32,
}

impl SupportInfo {
    pub fn stratum(&self, d: u32) -> Stratum {
        if self.excluded_count > 0 {
            Stratum::Excluded
        } else if self.beta == d {
            Stratum::Full
        } else {
            Stratum::Common
        }
    }
}

/// Which part of `A_{n,d}` a tuple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stratum {
    /// Meets `d` distinct families.
    Full,
    /// Lies in `[n']` but meets fewer than `d` families.
    Common,
    /// Holds at least one excluded file.
    Excluded,
}

pub fn support_of(t: &DTuple, params: &IcParameters) -> SupportInfo {
    let mut families = Vec::with_capacity(t.d());
    let mut excluded_count = 0;
    for &x in t.elements() {
        if x > params.n_prime {
            excluded_count += 1;
        } else {
            let fam = (x - 1) / params.s + 1;
            if families.last() != Some(&fam) {
                families.push(fam);
            }
        }
    }
    SupportInfo {
        beta: families.len() as u32,
        families,
        excluded_count,
    }
}

/// Sorted disjoint inclusive intervals.
#[derive(Debug, Clone, Default)]
struct IntervalSet(Vec<(u32, u32)>);

impl IntervalSet {
    fn len(&self) -> u64 {
        self.0.iter().map(|&(lo, hi)| (hi - lo + 1) as u64).sum()
    }

    /// `|W ∩ (v, ∞)|`.
    fn count_above(&self, v: u32) -> u64 {
        self.0
            .iter()
            .map(|&(lo, hi)| {
                let from = lo.max(v + 1);
                if from > hi {
                    0
                } else {
                    (hi - from + 1) as u64
                }
            })
            .sum()
    }

    fn contains(&self, x: u32) -> bool {
        self.0.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }
}

/// Closed-form group assignment without materializing `A_{n,d}`.
#[derive(Debug, Clone)]
pub struct IcDesign {
    params: IcParameters,
    table: BinomialTable,
}

impl IcDesign {
    pub fn new(params: IcParameters) -> Result<Self> {
        let table = BinomialTable::new(params.n as usize, params.d as usize + 1);
        table.get(params.n as u64, params.d as u64 + 1)?;
        Ok(IcDesign { params, table })
    }

    pub fn params(&self) -> &IcParameters {
        &self.params
    }

    fn binom(&self, a: u64, j: u64) -> Result<u128> {
        self.table.get(a, j)
    }

    fn family_interval(&self, i: u32) -> (u32, u32) {
        let s = self.params.s;
        ((i - 1) * s + 1, i * s)
    }

    fn pool(&self, families: impl Iterator<Item = u32>, with_excluded: bool) -> IntervalSet {
        let mut w: Vec<(u32, u32)> = families.map(|i| self.family_interval(i)).collect();
        if with_excluded && self.params.g > 0 {
            w.push((self.params.n_prime + 1, self.params.n));
        }
        IntervalSet(w)
    }

    /// d-subsets of `w` strictly before `x` in lexicographic order, or all
    /// of them when `x` is `None`.
    fn subsets_before(&self, w: &IntervalSet, x: Option<&[u32]>) -> Result<u128> {
        let d = self.params.d as u64;
        let Some(x) = x else {
            return self.binom(w.len(), d);
        };
        let mut acc = 0u128;
        let mut lo = 0u32;
        for (i, &xi) in x.iter().enumerate() {
            let k = d - i as u64;
            let above_lo = w.count_above(lo);
            let from_xi = w.count_above(xi - 1);
            acc += self.binom(above_lo, k)? - self.binom(from_xi, k)?;
            if !w.contains(xi) {
                break;
            }
            lo = xi;
        }
        Ok(acc)
    }

    /// Members of a support bucket before `x` (all members for `None`).
    /// The bucket holds the d-tuples meeting exactly the families in
    /// `support`, with at least one excluded file when `excluded` is set
    /// and none otherwise.
    fn bucket_before(&self, support: &[u32], excluded: bool, x: Option<&[u32]>) -> Result<u128> {
        let covering = |with_excluded: bool| -> Result<u128> {
            let (mut plus, mut minus) = (0u128, 0u128);
            for mask in 0u32..(1 << support.len()) {
                let kept = support
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) == 0)
                    .map(|(_, &fam)| fam);
                let c = self.subsets_before(&self.pool(kept, with_excluded), x)?;
                if mask.count_ones() % 2 == 0 {
                    plus = plus.checked_add(c).ok_or(Error::CountOverflow)?;
                } else {
                    minus = minus.checked_add(c).ok_or(Error::CountOverflow)?;
                }
            }
            Ok(plus - minus)
        };
        if excluded {
            Ok(covering(true)? - covering(false)?)
        } else {
            covering(false)
        }
    }

    /// Number of groups whose label contains `support`.
    fn eligible_count(&self, support: &[u32]) -> Result<u128> {
        let beta = support.len() as u64;
        self.binom(self.params.f as u64 - beta, self.params.d as u64 - beta)
    }

    /// The `j`-th (1-based, lexicographic) label containing `support`.
    fn eligible_label(&self, support: &[u32], j: u128) -> Vec<u32> {
        let f = self.params.f;
        let beta = support.len() as u32;
        let complement: Vec<u32> = (1..=f).filter(|i| !support.contains(i)).collect();
        let picks = unrank_with(&self.table, f - beta, self.params.d - beta, j);
        let mut label: Vec<u32> = support.to_vec();
        label.extend(picks.iter().map(|&p| complement[p as usize - 1]));
        label.sort_unstable();
        label
    }

    /// Position of `label` among the labels containing `support`.
    fn eligible_position(&self, support: &[u32], label: &[u32]) -> u128 {
        let f = self.params.f;
        let positions: Vec<u32> = label
            .iter()
            .filter(|x| !support.contains(x))
            .map(|&x| x - support.iter().filter(|&&i| i < x).count() as u32)
            .collect();
        rank_with(&self.table, f - support.len() as u32, &positions)
    }

    /// 1-based lexicographic index of a label in `C([f], d)`.
    pub fn label_index(&self, label: &[u32]) -> u64 {
        rank_with(&self.table, self.params.f, label) as u64
    }

    pub fn label_of(&self, base_group: u64) -> Vec<u32> {
        unrank_with(&self.table, self.params.f, self.params.d, base_group as u128)
    }

    /// Label of the pre-extension group holding `t`.
    pub fn base_label(&self, t: &DTuple) -> Result<Vec<u32>> {
        let sup = support_of(t, &self.params);
        if sup.stratum(self.params.d) == Stratum::Full {
            return Ok(sup.families);
        }
        let excluded = sup.excluded_count > 0;
        let pos = self.bucket_before(&sup.families, excluded, Some(t.elements()))? + 1;
        let size = self.bucket_before(&sup.families, excluded, None)?;
        let j = block_of(size, self.eligible_count(&sup.families)?, pos);
        Ok(self.eligible_label(&sup.families, j))
    }

    /// Buckets contributing to the group labelled `label`, as
    /// `(support, excluded)` pairs; the full-support bucket comes first.
    fn contributing_buckets(&self, label: &[u32]) -> Vec<(Vec<u32>, bool)> {
        let d = self.params.d;
        let mut out = vec![(label.to_vec(), false)];
        let mut push_subsets = |beta: u32, excluded: bool| {
            if beta == 0 {
                out.push((Vec::new(), excluded));
                return;
            }
            for pos in enumerate_lex(d, beta).expect("beta <= d") {
                let support = pos.elements().iter().map(|&p| label[p as usize - 1]).collect();
                out.push((support, excluded));
            }
        };
        for beta in 1..d {
            push_subsets(beta, false);
        }
        if self.params.g > 0 {
            for beta in 0..d {
                push_subsets(beta, true);
            }
        }
        out
    }

    /// Tuples of the pre-extension group `label` strictly before `x`, and
    /// the group's size.
    fn count_in_base_group(&self, label: &[u32], x: Option<&[u32]>) -> Result<(u128, u128)> {
        let mut before = 0u128;
        let mut size = 0u128;
        for (i, (support, excluded)) in self.contributing_buckets(label).into_iter().enumerate() {
            let total = self.bucket_before(&support, excluded, None)?;
            if total == 0 {
                continue;
            }
            let (start, end) = if i == 0 {
                (1, total)
            } else {
                let m = self.eligible_count(&support)?;
                let j = self.eligible_position(&support, label);
                block_bounds(&total, &m, &j)?
            };
            if end < start {
                continue;
            }
            size += end - start + 1;
            let c = match x {
                Some(_) => self.bucket_before(&support, excluded, x)?,
                None => total,
            };
            before += c.clamp(start - 1, end) - (start - 1);
        }
        Ok((before, size))
    }

    /// `|Φ̃_σ|` for the pre-extension group with 1-based index `base_group`.
    pub fn base_group_size(&self, base_group: u64) -> Result<u128> {
        Ok(self.count_in_base_group(&self.label_of(base_group), None)?.1)
    }

    /// 1-based group in `[N]` holding `t`.
    pub fn assign(&self, t: &DTuple) -> Result<u64> {
        let params = &self.params;
        if t.d() != params.d as usize || t.elements().last().is_some_and(|&x| x > params.n) {
            return Err(Error::DimensionMismatch {
                expected_n: params.n,
                expected_d: params.d,
                n: *t.elements().last().unwrap_or(&0),
                d: t.d() as u32,
            });
        }
        let label = self.base_label(t)?;
        let b = self.label_index(&label);
        let slices = params.slices_of(b);
        if slices <= 1 {
            return Ok(b);
        }
        let (before, size) = self.count_in_base_group(&label, Some(t.elements()))?;
        let part = block_of(size, slices as u128, before + 1) as u64 - 1;
        Ok(b + part * params.base_groups)
    }

    /// Placement that covers every tuple group `b` can ever receive: the
    /// files of its label's families, plus the excluded files.
    pub fn nominal_placement(&self, group: u64) -> Vec<u32> {
        let base = (group - 1) % self.params.base_groups + 1;
        let mut files: Vec<u32> = self
            .label_of(base)
            .into_iter()
            .flat_map(|i| {
                let (lo, hi) = self.family_interval(i);
                lo..=hi
            })
            .collect();
        files.extend(self.params.n_prime + 1..=self.params.n);
        files
    }
}

/// Convenience wrapper around [`IcDesign::assign`].
pub fn assign_base_group(t: &DTuple, params: &IcParameters) -> Result<u64> {
    IcDesign::new(*params)?.assign(t)
}

/// The `N` groups of the construction over all of `A_{n,d}`, with tuples
/// held as lexicographic ranks.
#[derive(Debug, Clone)]
pub struct BasePartition {
    params: IcParameters,
    groups: Vec<Vec<u64>>,
    group_of: Vec<u32>,
    footprints: Vec<Vec<u32>>,
    base_sizes: Vec<u64>,
    indexer: LexIndexer,
}

impl BasePartition {
    pub fn params(&self) -> &IcParameters {
        &self.params
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Lexicographic ranks of group `b` (1-based), ascending.
    pub fn group_ranks(&self, b: usize) -> &[u64] {
        &self.groups[b - 1]
    }

    pub fn group_tuples(&self, b: usize) -> Vec<DTuple> {
        self.groups[b - 1]
            .iter()
            .map(|&r| self.indexer.unrank(r as u128).expect("rank in range"))
            .collect()
    }

    pub fn group_sizes(&self) -> Vec<u64> {
        self.groups.iter().map(|g| g.len() as u64).collect()
    }

    /// `α(Φ̃_b)` for every group.
    pub fn footprints(&self) -> &[Vec<u32>] {
        &self.footprints
    }

    /// Sizes of the `N'` groups before extension to `N`.
    pub fn base_group_sizes(&self) -> &[u64] {
        &self.base_sizes
    }

    pub fn total(&self) -> u64 {
        self.group_of.len() as u64
    }

    /// 1-based group of `t`.
    pub fn group_of(&self, t: &DTuple) -> u64 {
        let rank = self.indexer.rank(t.elements());
        self.group_of[rank as usize - 1] as u64
    }

    /// `max_b |α(Φ̃_b)|`.
    pub fn pi(&self) -> u64 {
        self.footprints.iter().map(|f| f.len() as u64).max().unwrap_or(0)
    }

    /// This partition viewed as the refinement by `X = A_{n,d}`.
    pub fn to_final(&self) -> FinalPartition {
        FinalPartition {
            n: self.params.n,
            d: self.params.d,
            params: Some(self.params),
            groups: (1..=self.num_groups()).map(|b| self.group_tuples(b)).collect(),
            placement: self.footprints.clone(),
            meta: TaskMeta {
                phi: Some(1.0),
                ..TaskMeta::default()
            },
        }
    }
}

pub fn build_base_partition(params: &IcParameters) -> Result<BasePartition> {
    build_base_partition_capped(params, DEFAULT_MATERIALIZATION_CAP)
}

/// Materializes every group by walking `A_{n,d}` once; fails when
/// `C(n,d)` exceeds `cap`.
pub fn build_base_partition_capped(params: &IcParameters, cap: u64) -> Result<BasePartition> {
    let (n, d) = (params.n, params.d);
    let indexer = LexIndexer::new(n, d)?;
    let total = indexer.total();
    if total > cap as u128 {
        return Err(Error::MaterializationCap {
            total: total.to_string(),
            cap,
        });
    }
    let labels: Vec<Vec<u32>> = enumerate_lex(params.f, d)?.map(DTuple::into_vec).collect();
    let label_pos: HashMap<&[u32], usize> =
        labels.iter().enumerate().map(|(i, l)| (l.as_slice(), i)).collect();

    let mut base: Vec<Vec<u64>> = vec![Vec::new(); labels.len()];
    let mut buckets: HashMap<(Vec<u32>, bool), Vec<u64>> = HashMap::new();
    for (i, t) in enumerate_lex(n, d)?.enumerate() {
        let rank = i as u64 + 1;
        let sup = support_of(&t, params);
        match sup.stratum(d) {
            Stratum::Full => base[label_pos[sup.families.as_slice()]].push(rank),
            s => buckets
                .entry((sup.families, s == Stratum::Excluded))
                .or_default()
                .push(rank),
        }
    }
    for ((support, _), members) in &buckets {
        let eligible: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| support.iter().all(|x| l.contains(x)))
            .map(|(i, _)| i)
            .collect();
        let (t, m) = (members.len() as u64, eligible.len() as u64);
        for (j, &group) in eligible.iter().enumerate() {
            let (start, end) = block_bounds(&t, &m, &(j as u64 + 1))?;
            base[group].extend_from_slice(&members[start as usize - 1..end as usize]);
        }
    }

    let base_groups = labels.len();
    let base_sizes: Vec<u64> = base.iter().map(|g| g.len() as u64).collect();
    let mut groups: Vec<Vec<u64>> = vec![Vec::new(); params.workers as usize];
    for (i, mut members) in base.into_iter().enumerate() {
        members.sort_unstable();
        let slices = params.slices_of(i as u64 + 1);
        let len = members.len() as u64;
        for part in 0..slices {
            let (start, end) = block_bounds(&len, &slices, &(part + 1))?;
            groups[i + part as usize * base_groups] =
                members[start as usize - 1..end as usize].to_vec();
        }
    }

    let mut group_of = vec![0u32; total as usize];
    for (b, g) in groups.iter().enumerate() {
        for &rank in g {
            group_of[rank as usize - 1] = b as u32 + 1;
        }
    }
    let words = (n as usize + 1).div_ceil(64);
    let mut bits = vec![0u64; groups.len() * words];
    for (i, t) in enumerate_lex(n, d)?.enumerate() {
        let row = (group_of[i] as usize - 1) * words;
        for &x in t.elements() {
            bits[row + x as usize / 64] |= 1 << (x % 64);
        }
    }
    let footprints = (0..groups.len())
        .map(|b| {
            (1..=n)
                .filter(|&x| bits[b * words + x as usize / 64] >> (x % 64) & 1 == 1)
                .collect()
        })
        .collect();

    Ok(BasePartition {
        params: *params,
        groups,
        group_of,
        footprints,
        base_sizes,
        indexer,
    })
}

/// A partition of a task set `X` into `N` groups together with the file
/// placement each worker holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalPartition {
    pub n: u32,
    pub d: u32,
    /// Present when the partition comes from the construction.
    pub params: Option<IcParameters>,
    pub groups: Vec<Vec<DTuple>>,
    pub placement: Vec<Vec<u32>>,
    pub meta: TaskMeta,
}

impl FinalPartition {
    /// A partition whose placement is each group's own footprint.
    pub fn from_groups(n: u32, d: u32, groups: Vec<Vec<DTuple>>, meta: TaskMeta) -> Self {
        let placement = groups.iter().map(|g| footprint(n, g.iter())).collect();
        FinalPartition {
            n,
            d,
            params: None,
            groups,
            placement,
            meta,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn task_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// `α(Φ_b)` for 1-based `b`.
    pub fn group_footprint(&self, b: usize) -> Vec<u32> {
        footprint(self.n, self.groups[b - 1].iter())
    }

    /// Every worker holds all inputs of its tasks.
    pub fn is_feasible(&self) -> bool {
        self.groups.len() == self.placement.len()
            && (1..=self.groups.len()).all(|b| {
                let held = &self.placement[b - 1];
                self.group_footprint(b)
                    .iter()
                    .all(|x| held.binary_search(x).is_ok())
            })
    }

    /// The groups, merged, as a task set; fails if any tuple appears twice.
    pub fn task_set(&self) -> Result<TaskSet> {
        let edges = self.groups.iter().flatten().cloned().collect();
        Ok(TaskSet::new(self.n, self.d, edges)?.with_meta(self.meta.clone()))
    }
}

/// `Φ_b = Φ̃_b ∩ X` with the placement of `base` unchanged.
pub fn refine(base: &BasePartition, tasks: &TaskSet) -> Result<FinalPartition> {
    let params = base.params();
    check_dims(params, tasks)?;
    let mut groups = vec![Vec::new(); base.num_groups()];
    for t in tasks.edges() {
        groups[base.group_of(t) as usize - 1].push(t.clone());
    }
    Ok(FinalPartition {
        n: params.n,
        d: params.d,
        params: Some(*params),
        groups,
        placement: base.footprints().to_vec(),
        meta: tasks.meta().clone(),
    })
}

/// Refinement through closed-form assignment, for instances too large to
/// materialize. The placement is [`IcDesign::nominal_placement`].
pub fn refine_streaming(design: &IcDesign, tasks: &TaskSet) -> Result<FinalPartition> {
    let params = design.params();
    check_dims(params, tasks)?;
    let mut groups = vec![Vec::new(); params.workers as usize];
    for t in tasks.edges() {
        groups[design.assign(t)? as usize - 1].push(t.clone());
    }
    Ok(FinalPartition {
        n: params.n,
        d: params.d,
        params: Some(*params),
        groups,
        placement: (1..=params.workers).map(|b| design.nominal_placement(b)).collect(),
        meta: tasks.meta().clone(),
    })
}

fn check_dims(params: &IcParameters, tasks: &TaskSet) -> Result<()> {
    if tasks.n() != params.n || tasks.d() != params.d {
        return Err(Error::DimensionMismatch {
            expected_n: params.n,
            expected_d: params.d,
            n: tasks.n(),
            d: tasks.d(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(xs: &[u32]) -> DTuple {
        DTuple::new(xs.to_vec(), 100).unwrap()
    }

    fn pairs(xs: &[[u32; 2]]) -> Vec<DTuple> {
        xs.iter().map(|p| t(p)).collect()
    }

    #[test]
    fn parameters_examples() {
        let a = derive_parameters(6, 2, 3).unwrap();
        assert_eq!((a.k, a.f, a.s, a.base_groups), (3, 3, 2, 3));
        assert_eq!(a.case, Case::Divisible);
        assert_eq!((a.q, a.p, a.r), (1, 1, 0));

        let b = derive_parameters(7, 2, 3).unwrap();
        assert_eq!((b.k, b.s, b.g, b.n_prime), (3, 2, 1, 6));
        assert_eq!(b.case, Case::NonDivisible);

        let c = derive_parameters(6, 2, 4).unwrap();
        assert_eq!((c.k, c.base_groups, c.q, c.p, c.r), (3, 3, 1, 2, 1));
    }

    #[test]
    fn parameters_errors() {
        assert!(matches!(derive_parameters(3, 4, 2), Err(Error::InvalidDimensions { .. })));
        // n = 11, d = 2, N = 21: k = 7, s0 = 2 > floor(11/7) = 1
        assert!(matches!(
            derive_parameters(11, 2, 21),
            Err(Error::UnsupportedParameters { .. })
        ));
    }

    #[test]
    fn k_is_capped_at_n() {
        let p = derive_parameters(5, 2, 100).unwrap();
        assert_eq!((p.k, p.s, p.base_groups), (5, 1, 10));
        assert_eq!((p.q, p.r), (10, 0));
    }

    #[test]
    fn families_examples() {
        let a = build_families(&derive_parameters(6, 2, 3).unwrap());
        assert_eq!(a.families, vec![1..=2, 3..=4, 5..=6]);
        assert_eq!(a.excluded_count(), 0);
        let b = build_families(&derive_parameters(7, 2, 3).unwrap());
        assert_eq!(b.families, vec![1..=2, 3..=4, 5..=6]);
        assert_eq!(b.excluded, 7..=7);
        // n = 12, N = 3 gives k = 3, s = 4
        let c = build_families(&derive_parameters(12, 2, 3).unwrap());
        assert_eq!(c.families, vec![1..=4, 5..=8, 9..=12]);
    }

    #[test]
    fn support_examples() {
        let p6 = derive_parameters(6, 2, 3).unwrap();
        let a = support_of(&t(&[3, 4]), &p6);
        assert_eq!((a.families.clone(), a.beta, a.excluded_count), (vec![2], 1, 0));
        let b = support_of(&t(&[1, 6]), &p6);
        assert_eq!((b.families.clone(), b.beta), (vec![1, 3], 2));
        let p7 = derive_parameters(7, 2, 3).unwrap();
        let c = support_of(&t(&[1, 7]), &p7);
        assert_eq!((c.families.clone(), c.beta, c.excluded_count), (vec![1], 1, 1));
        assert_eq!(c.stratum(2), Stratum::Excluded);
    }

    #[test]
    fn divisible_worked_example() {
        let params = derive_parameters(6, 2, 3).unwrap();
        let base = build_base_partition(&params).unwrap();
        let expect = [
            pairs(&[[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]),
            pairs(&[[1, 5], [1, 6], [2, 5], [2, 6], [5, 6]]),
            pairs(&[[3, 5], [3, 6], [4, 5], [4, 6]]),
        ];
        for (b, e) in expect.iter().enumerate() {
            assert_eq!(&base.group_tuples(b + 1), e);
        }
        assert_eq!(base.footprints(), &[vec![1, 2, 3, 4], vec![1, 2, 5, 6], vec![3, 4, 5, 6]]);
        assert_eq!(base.pi(), 4);
    }

    #[test]
    fn non_divisible_worked_example() {
        let params = derive_parameters(7, 2, 3).unwrap();
        let base = build_base_partition(&params).unwrap();
        assert_eq!(base.group_of(&t(&[1, 7])), 1);
        assert!(base.pi() <= 5);
        assert_eq!(base.total(), 21);
    }

    #[test]
    fn extension_worked_example() {
        let params = derive_parameters(6, 2, 4).unwrap();
        let base = build_base_partition(&params).unwrap();
        assert_eq!(base.group_tuples(1), pairs(&[[1, 2], [1, 3], [1, 4]]));
        assert_eq!(base.group_tuples(4), pairs(&[[2, 3], [2, 4], [3, 4]]));
        assert_eq!(base.base_group_sizes(), &[6, 5, 4]);
    }

    #[test]
    fn assign_examples() {
        let params = derive_parameters(6, 2, 3).unwrap();
        let design = IcDesign::new(params).unwrap();
        assert_eq!(design.assign(&t(&[3, 4])).unwrap(), 1);
        assert_eq!(design.assign(&t(&[1, 3])).unwrap(), 1);
        assert_eq!(design.assign(&t(&[5, 6])).unwrap(), 2);
        assert_eq!(assign_base_group(&t(&[3, 5]), &params).unwrap(), 3);
        assert!(design.assign(&t(&[1, 2, 3])).is_err());
    }

    #[test]
    fn bucket_sizes_match_counting() {
        use crate::counting::{card_r_beta_i, t_beta};
        use num_traits::ToPrimitive;
        for (n, d, workers) in [(12, 2, 6), (12, 3, 4), (20, 3, 10), (23, 3, 10), (30, 2, 20)] {
            let params = derive_parameters(n, d, workers).unwrap();
            let design = IcDesign::new(params).unwrap();
            let (s, f, g) = (params.s, params.f, params.g);
            for beta in 1..d {
                let support: Vec<u32> = (1..=beta).collect();
                let closed = t_beta(s, f, d, beta).map(|x| x.to_u128().unwrap()).unwrap_or(0);
                assert_eq!(design.bucket_before(&support, false, None).unwrap(), closed);
            }
            if g > 0 {
                for beta in crate::counting::beta_min(s, d, g)..d {
                    let support: Vec<u32> = (1..=beta).collect();
                    let closed = card_r_beta_i(s, f, g, d, beta).unwrap().to_u128().unwrap();
                    assert_eq!(design.bucket_before(&support, true, None).unwrap(), closed);
                }
            }
        }
    }

    #[test]
    fn refine_examples() {
        let params = derive_parameters(6, 2, 3).unwrap();
        let base = build_base_partition(&params).unwrap();
        let x = TaskSet::new(6, 2, pairs(&[[1, 2], [3, 5], [1, 6]])).unwrap();
        let fin = refine(&base, &x).unwrap();
        assert_eq!(fin.groups, vec![pairs(&[[1, 2]]), pairs(&[[1, 6]]), pairs(&[[3, 5]])]);
        assert_eq!(fin.placement, base.footprints());
        assert!(fin.is_feasible());

        let empty = refine(&base, &TaskSet::empty(6, 2).unwrap()).unwrap();
        assert!(empty.groups.iter().all(Vec::is_empty));

        let full = refine(&base, &TaskSet::full(6, 2).unwrap()).unwrap();
        assert_eq!(full.groups, base.to_final().groups);

        assert!(matches!(
            refine(&base, &TaskSet::full(7, 2).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn streaming_refine_matches_materialized() {
        let params = derive_parameters(20, 3, 7).unwrap();
        let base = build_base_partition(&params).unwrap();
        let design = IcDesign::new(params).unwrap();
        let x = TaskSet::full(20, 3).unwrap();
        let a = refine(&base, &x).unwrap();
        let b = refine_streaming(&design, &x).unwrap();
        assert_eq!(a.groups, b.groups);
        assert!(b.is_feasible());
        for (actual, nominal) in a.placement.iter().zip(&b.placement) {
            assert!(actual.iter().all(|x| nominal.contains(x)));
        }
    }

    #[test]
    fn materialization_cap_is_enforced() {
        let params = derive_parameters(30, 3, 4).unwrap();
        assert!(matches!(
            build_base_partition_capped(&params, 100),
            Err(Error::MaterializationCap { .. })
        ));
    }
}
