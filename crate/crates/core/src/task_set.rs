use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, enumerate_lex, DTuple};
use crate::error::{Error, Result};

/// Provenance of a task set produced by random thinning.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskMeta {
    pub phi: Option<f64>,
    pub seed: Option<u64>,
    pub generator_id: Option<String>,
}

impl TaskMeta {
    pub fn is_empty(&self) -> bool {
        self.phi.is_none() && self.seed.is_none() && self.generator_id.is_none()
    }
}

/// A set `X` of d-subsets of `[n]`, kept in lexicographic order without
/// duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    n: u32,
    d: u32,
    edges: Vec<DTuple>,
    #[serde(default)]
    meta: TaskMeta,
}

impl TaskSet {
    /// Validates every edge against `(n, d)`, sorts and rejects duplicates.
    pub fn new(n: u32, d: u32, mut edges: Vec<DTuple>) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::InvalidDimensions {
                n: n as u64,
                d: d as u64,
            });
        }
        for e in &edges {
            if e.d() != d as usize || e.elements().last().is_some_and(|&x| x > n) {
                return Err(Error::Schema(format!("edge {e} is not a {d}-subset of [1, {n}]")));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge {
                line: 0,
                edge: w[0].to_string(),
            });
        }
        Ok(TaskSet {
            n,
            d,
            edges,
            meta: TaskMeta::default(),
        })
    }

    /// Builds from edges already sorted, distinct and valid.
    pub(crate) fn from_sorted(n: u32, d: u32, edges: Vec<DTuple>, meta: TaskMeta) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        TaskSet { n, d, edges, meta }
    }

    /// All of `A_{n,d}`.
    pub fn full(n: u32, d: u32) -> Result<Self> {
        let edges = enumerate_lex(n, d)?.collect();
        Ok(TaskSet::from_sorted(n, d, edges, TaskMeta::default()))
    }

    pub fn empty(n: u32, d: u32) -> Result<Self> {
        TaskSet::new(n, d, Vec::new())
    }

    pub fn with_meta(mut self, meta: TaskMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn edges(&self) -> &[DTuple] {
        &self.edges
    }

    pub fn meta(&self) -> &TaskMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, t: &DTuple) -> bool {
        self.edges.binary_search(t).is_ok()
    }

    /// `|X| / C(n, d)`.
    pub fn density(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.len() as f64 / binomial(self.n as u64, self.d as u64).to_f64().unwrap_or(f64::INFINITY)
    }

    /// Distinct files touched by any edge, ascending.
    pub fn footprint(&self) -> Vec<u32> {
        footprint(self.n, self.edges.iter())
    }
}

/// Sorted union of the elements of `edges`, all of which lie in `[1, n]`.
pub fn footprint<'a>(n: u32, edges: impl IntoIterator<Item = &'a DTuple>) -> Vec<u32> {
    let mut seen = vec![false; n as usize + 1];
    for e in edges {
        for &x in e.elements() {
            seen[x as usize] = true;
        }
    }
    (1..=n).filter(|&x| seen[x as usize]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(xs: &[u32]) -> DTuple {
        DTuple::new(xs.to_vec(), 10).unwrap()
    }

    #[test]
    fn new_sorts_and_rejects_duplicates() {
        let x = TaskSet::new(7, 2, vec![t(&[2, 7]), t(&[1, 2])]).unwrap();
        assert_eq!(x.edges(), &[t(&[1, 2]), t(&[2, 7])]);
        assert!(matches!(
            TaskSet::new(7, 2, vec![t(&[1, 2]), t(&[1, 2])]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(TaskSet::new(7, 3, vec![t(&[1, 2])]).is_err());
        assert!(TaskSet::new(5, 2, vec![t(&[1, 9])]).is_err());
    }

    #[test]
    fn footprint_and_density() {
        let x = TaskSet::new(7, 2, vec![t(&[1, 2]), t(&[2, 7])]).unwrap();
        assert_eq!(x.footprint(), vec![1, 2, 7]);
        assert!((x.density() - 2.0 / 21.0).abs() < 1e-15);
        assert_eq!(TaskSet::full(6, 2).unwrap().len(), 15);
        assert!(TaskSet::empty(6, 2).unwrap().footprint().is_empty());
    }
}
