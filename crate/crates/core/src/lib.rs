//! Interweaved-clique (IC) data and task allocation.
//!
//! Given `n` input files, a degree `d` and `N` workers, the construction
//! partitions every d-subset of the files into `N` groups so that no worker
//! needs more than roughly `n / N^(1/d)` files, while keeping groups
//! balanced. The file placement depends only on `(n, d, N)`; any task set
//! `X` is served by intersecting it with the fixed groups.

pub mod baselines;
pub mod combinatorics;
pub mod counting;
pub mod design;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod task_set;
pub mod verify;

pub use combinatorics::{binomial, enumerate_lex, lex_rank, lex_unrank, BigCount, DTuple};
pub use design::{
    assign_base_group, build_base_partition, build_families, derive_parameters, refine,
    support_of, BasePartition, Case, FinalPartition, IcDesign, IcParameters, SupportInfo,
};
pub use error::{Error, Result};
pub use metrics::{arf_of, delta_of, full_report, pi_of, CostReport};
pub use task_set::{TaskMeta, TaskSet};
