//! Reference partitions to compare the construction against, and the
//! seeded random thinning that produces task sets.
//!
//! Randomness is counter based: the draw for the tuple of lexicographic
//! rank `r` is word `r` of a ChaCha8 keystream fixed by `(seed, stream)`.
//! A tuple's fate therefore depends only on the seed and its rank, never on
//! iteration order or thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_lex, LexIndexer};
use crate::counting::block_bounds;
use crate::design::FinalPartition;
use crate::error::{Error, Result};
use crate::task_set::{TaskMeta, TaskSet};

pub const GENERATOR_ID: &str = "chacha8-rank-v1";

pub(crate) const THINNING_STREAM: u64 = 0;
pub(crate) const PARTITION_STREAM: u64 = 1;
pub(crate) const SEED_STREAM: u64 = 2;

fn keystream(seed: u64, stream: u64, index: u128) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // one u64 is two 32-bit words
    rng.set_word_pos(2 * index);
    rng
}

/// The 64-bit draw at position `index` of stream `stream` under `seed`.
pub fn draw(seed: u64, stream: u64, index: u128) -> u64 {
    keystream(seed, stream, index).next_u64()
}

fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `1..=m`.
fn pick(x: u64, m: u64) -> u64 {
    ((x as u128 * m as u128) >> 64) as u64 + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinningSpec {
    pub phi: f64,
    pub seed: u64,
    #[serde(default = "default_generator")]
    pub generator_id: String,
}

fn default_generator() -> String {
    GENERATOR_ID.to_string()
}

impl ThinningSpec {
    pub fn new(phi: f64, seed: u64) -> Self {
        ThinningSpec {
            phi,
            seed,
            generator_id: default_generator(),
        }
    }
}

/// Keeps each tuple of `A_{n,d}` independently with probability `phi`.
pub fn thin(n: u32, d: u32, spec: &ThinningSpec) -> Result<TaskSet> {
    if !(0.0..=1.0).contains(&spec.phi) {
        return Err(Error::InvalidPhi(spec.phi));
    }
    if spec.generator_id != GENERATOR_ID {
        return Err(Error::Schema(format!("unknown generator_id {:?}", spec.generator_id)));
    }
    // ranks are consecutive, so reading the keystream in order visits the
    // same words `draw` would seek to
    let mut rng = keystream(spec.seed, THINNING_STREAM, 1);
    let edges = enumerate_lex(n, d)?
        .filter(|_| unit(rng.next_u64()) < spec.phi)
        .collect();
    let meta = TaskMeta {
        phi: Some(spec.phi),
        seed: Some(spec.seed),
        generator_id: Some(spec.generator_id.clone()),
    };
    Ok(TaskSet::from_sorted(n, d, edges, meta))
}

/// `X` in lexicographic order cut into `N` contiguous blocks, the larger
/// blocks first.
pub fn lex_partition(tasks: &TaskSet, workers: u64) -> Result<FinalPartition> {
    if workers == 0 {
        return Err(Error::InvalidDimensions {
            n: tasks.n() as u64,
            d: tasks.d() as u64,
        });
    }
    let len = tasks.len() as u64;
    let mut groups = Vec::with_capacity(workers as usize);
    for j in 1..=workers {
        let (start, end) = block_bounds(&len, &workers, &j)?;
        groups.push(tasks.edges()[start as usize - 1..end as usize].to_vec());
    }
    Ok(FinalPartition::from_groups(tasks.n(), tasks.d(), groups, tasks.meta().clone()))
}

/// Each task goes to a uniformly random group, keyed on its rank in
/// `A_{n,d}`.
pub fn random_partition(tasks: &TaskSet, workers: u64, seed: u64) -> Result<FinalPartition> {
    if workers == 0 {
        return Err(Error::InvalidDimensions {
            n: tasks.n() as u64,
            d: tasks.d() as u64,
        });
    }
    let indexer = LexIndexer::new(tasks.n(), tasks.d())?;
    let mut groups = vec![Vec::new(); workers as usize];
    for t in tasks.edges() {
        let rank = indexer.rank(t.elements());
        let b = pick(draw(seed, PARTITION_STREAM, rank), workers);
        groups[b as usize - 1].push(t.clone());
    }
    Ok(FinalPartition::from_groups(tasks.n(), tasks.d(), groups, tasks.meta().clone()))
}
