//! Exhaustive ground truth for tiny instances: the optimal communication
//! cost by branch-and-bound, and support-size censuses by enumeration.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, enumerate_lex, DTuple};
use crate::counting::pi_lower_bound_exact;
use crate::error::{Error, Result};
use crate::task_set::TaskSet;

pub const DEFAULT_EDGE_CAP: usize = 16;
pub const MAX_BRUTE_FORCE_WORKERS: u64 = 4;
const CENSUS_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub pi_star: u64,
    /// Integer converse bound used as the search floor.
    pub lower_bound: u64,
    pub witness: Vec<Vec<DTuple>>,
}

struct Search<'a> {
    edges: &'a [u128],
    workers: usize,
    floor: u32,
    best: u32,
    best_assign: Vec<usize>,
    assign: Vec<usize>,
    masks: Vec<u128>,
}

impl Search<'_> {
    fn run(&mut self, i: usize, opened: usize, current_max: u32) {
        if self.best <= self.floor {
            return;
        }
        if i == self.edges.len() {
            self.best = current_max;
            self.best_assign.clone_from(&self.assign);
            return;
        }
        // a fresh group is only ever the lowest unused index
        let limit = (opened + 1).min(self.workers);
        for g in 0..limit {
            let before = self.masks[g];
            let after = before | self.edges[i];
            let size = after.count_ones();
            if size.max(current_max) >= self.best {
                continue;
            }
            self.masks[g] = after;
            self.assign[i] = g;
            self.run(i + 1, opened.max(g + 1), size.max(current_max));
            self.masks[g] = before;
        }
    }
}

/// Minimum over all partitions of `X` into `N` groups of the largest group
/// footprint.
pub fn brute_force_pi_star(tasks: &TaskSet, workers: u64, edge_cap: usize) -> Result<BruteForceResult> {
    if tasks.len() > edge_cap {
        return Err(Error::InstanceTooLarge(format!(
            "{} tasks exceed the edge cap of {edge_cap}",
            tasks.len()
        )));
    }
    if workers == 0 || workers > MAX_BRUTE_FORCE_WORKERS {
        return Err(Error::InstanceTooLarge(format!(
            "N = {workers} outside 1..={MAX_BRUTE_FORCE_WORKERS}"
        )));
    }
    if tasks.n() > 128 {
        return Err(Error::InstanceTooLarge(format!("n = {} exceeds 128", tasks.n())));
    }
    let edges: Vec<u128> = tasks
        .edges()
        .iter()
        .map(|e| e.elements().iter().fold(0u128, |m, &x| m | 1 << (x - 1)))
        .collect();
    let lower_bound = pi_lower_bound_exact(tasks.n(), tasks.d(), workers, tasks.len() as u64);
    let everything = edges.iter().fold(0u128, |m, e| m | e);
    let mut search = Search {
        edges: &edges,
        workers: workers as usize,
        floor: lower_bound as u32,
        // all tasks on one worker
        best: everything.count_ones(),
        best_assign: vec![0; edges.len()],
        assign: vec![0; edges.len()],
        masks: vec![0; workers as usize],
    };
    search.run(0, 0, 0);
    let mut witness = vec![Vec::new(); workers as usize];
    for (e, &g) in tasks.edges().iter().zip(&search.best_assign) {
        witness[g].push(e.clone());
    }
    Ok(BruteForceResult {
        pi_star: search.best as u64,
        lower_bound,
        witness,
    })
}

fn census_guard(n: u32, d: u32) -> Result<()> {
    let total = binomial(n as u64, d as u64);
    if total.to_u64().is_none_or(|t| t > CENSUS_CAP) {
        return Err(Error::InstanceTooLarge(format!("C({n},{d}) = {total} exceeds {CENSUS_CAP}")));
    }
    Ok(())
}

/// Number of tuples of `A_{n,d}` meeting exactly `beta` of the families
/// `{1..s}, {s+1..2s}, ...`, by enumeration.
pub fn classify_by_support(n: u32, d: u32, s: u32) -> Result<BTreeMap<u32, u64>> {
    if s == 0 || n % s != 0 {
        return Err(Error::InvalidDimensions {
            n: n as u64,
            d: d as u64,
        });
    }
    census_guard(n, d)?;
    let mut table = BTreeMap::new();
    for t in enumerate_lex(n, d)? {
        let mut fams: Vec<u32> = t.elements().iter().map(|&x| (x - 1) / s).collect();
        fams.dedup();
        *table.entry(fams.len() as u32).or_insert(0) += 1;
    }
    Ok(table)
}

/// For `n = f*s0 + g`: excluded tuples (those holding one of the last `g`
/// files) grouped by the exact set of families they meet. Returns, per
/// `beta`, the counts for every `beta`-subset of `[f]` in lexicographic
/// order.
pub fn classify_excluded(n: u32, d: u32, s0: u32, f: u32) -> Result<BTreeMap<u32, Vec<u64>>> {
    let n_prime = s0 * f;
    if s0 == 0 || n_prime > n || d > n {
        return Err(Error::InvalidDimensions {
            n: n as u64,
            d: d as u64,
        });
    }
    census_guard(n, d)?;
    let mut by_support: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for t in enumerate_lex(n, d)? {
        if t.elements().iter().all(|&x| x <= n_prime) {
            continue;
        }
        let mut fams: Vec<u32> = t
            .elements()
            .iter()
            .filter(|&&x| x <= n_prime)
            .map(|&x| (x - 1) / s0 + 1)
            .collect();
        fams.dedup();
        *by_support.entry(fams).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for beta in 0..d.min(f + 1) {
        let supports: Vec<Vec<u32>> = if beta == 0 {
            vec![Vec::new()]
        } else {
            enumerate_lex(f, beta)?.map(DTuple::into_vec).collect()
        };
        let counts = supports
            .iter()
            .map(|s| by_support.get(s).copied().unwrap_or(0))
            .collect();
        out.insert(beta, counts);
    }
    Ok(out)
}
