//! Text formats: task-set files, partition JSON documents.
//!
//! A task file is a header line `n d m` followed by `m` lines of `d`
//! strictly increasing 1-based file indices. `#` starts a comment; comment
//! lines of the form `# key: value` carry `format_version`, `phi`, `seed`
//! and `generator_id`.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::combinatorics::DTuple;
use crate::design::{derive_parameters, Case, FinalPartition, IcParameters};
use crate::error::{Error, Result};
use crate::task_set::{footprint, TaskMeta, TaskSet};

pub const FORMAT_VERSION: u32 = 1;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read_meta(line: usize, comment: &str, meta: &mut TaskMeta) -> Result<()> {
    let Some((key, value)) = comment.split_once(':') else {
        return Ok(());
    };
    let value = value.trim();
    match key.trim() {
        "format_version" => {
            let v: u32 = value
                .parse()
                .map_err(|_| parse_err(line, format!("bad format_version {value:?}")))?;
            if v != FORMAT_VERSION {
                return Err(Error::Schema(format!("unsupported format_version {v}")));
            }
        }
        "phi" => meta.phi = Some(value.parse().map_err(|_| parse_err(line, format!("bad phi {value:?}")))?),
        "seed" => meta.seed = Some(value.parse().map_err(|_| parse_err(line, format!("bad seed {value:?}")))?),
        "generator_id" => meta.generator_id = Some(value.to_string()),
        _ => {}
    }
    Ok(())
}

fn numbers(line: usize, text: &str) -> Result<Vec<u64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| parse_err(line, format!("expected a non-negative integer, found {tok:?}")))
        })
        .collect()
}

/// Reads a task file. Line numbers in errors are 1-based.
pub fn parse_tasks(text: &str) -> Result<TaskSet> {
    let mut meta = TaskMeta::default();
    let mut header: Option<(u32, u32, u64)> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if body.trim().is_empty() {
                read_meta(line, c, &mut meta)?;
            }
        }
        if body.trim().is_empty() {
            continue;
        }
        let nums = numbers(line, body)?;
        let Some((n, d, _)) = header else {
            let [n, d, m] = nums[..] else {
                return Err(parse_err(line, "header must be `n d m`"));
            };
            if d == 0 || d > n || n > u32::MAX as u64 {
                return Err(parse_err(line, format!("invalid dimensions n = {n}, d = {d}")));
            }
            header = Some((n as u32, d as u32, m));
            continue;
        };
        if nums.len() != d as usize {
            return Err(parse_err(line, format!("expected {d} indices, found {}", nums.len())));
        }
        if let Some(&bad) = nums.iter().find(|&&x| x == 0 || x > n as u64) {
            return Err(Error::IndexOutOfBounds { line, value: bad, n });
        }
        if nums.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(line, "indices must be strictly increasing"));
        }
        let t = DTuple::new(nums.iter().map(|&x| x as u32).collect(), n)?;
        if !seen.insert(t.clone()) {
            return Err(Error::DuplicateEdge {
                line,
                edge: t.to_string(),
            });
        }
        edges.push(t);
    }
    let Some((n, d, m)) = header else {
        return Err(parse_err(last_line.max(1), "missing header `n d m`"));
    };
    if edges.len() as u64 != m {
        return Err(parse_err(
            last_line,
            format!("header announces {m} tasks, found {}", edges.len()),
        ));
    }
    Ok(TaskSet::new(n, d, edges)?.with_meta(meta))
}

/// Writes a task file that [`parse_tasks`] reads back to the same set.
pub fn emit_tasks(tasks: &TaskSet) -> String {
    let mut out = format!("# format_version: {FORMAT_VERSION}\n");
    let meta = tasks.meta();
    if let Some(phi) = meta.phi {
        writeln!(out, "# phi: {phi}").unwrap();
    }
    if let Some(seed) = meta.seed {
        writeln!(out, "# seed: {seed}").unwrap();
    }
    if let Some(id) = &meta.generator_id {
        writeln!(out, "# generator_id: {id}").unwrap();
    }
    writeln!(out, "{} {} {}", tasks.n(), tasks.d(), tasks.len()).unwrap();
    for e in tasks.edges() {
        let line: Vec<String> = e.elements().iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PartitionDoc {
    format_version: u32,
    n: u32,
    d: u32,
    #[serde(rename = "N")]
    workers: u64,
    case: Option<Case>,
    params: Option<IcParameters>,
    groups: Vec<Vec<Vec<u32>>>,
    /// Files placed on each worker.
    footprints: Vec<Vec<u32>>,
    metadata: TaskMeta,
}

const PARTITION_KEYS: [&str; 9] = [
    "format_version",
    "n",
    "d",
    "N",
    "case",
    "params",
    "groups",
    "footprints",
    "metadata",
];

/// Pretty-printed JSON document for `p`.
pub fn emit_partition(p: &FinalPartition) -> String {
    let doc = PartitionDoc {
        format_version: FORMAT_VERSION,
        n: p.n,
        d: p.d,
        workers: p.num_groups() as u64,
        case: p.params.map(|q| q.case),
        params: p.params,
        groups: p
            .groups
            .iter()
            .map(|g| g.iter().map(|t| t.elements().to_vec()).collect())
            .collect(),
        footprints: p.placement.clone(),
        metadata: p.meta.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("partition serializes")
}

/// Reads and validates a partition document: shape, disjoint groups,
/// sorted in-range footprints, and parameters that match `(n, d, N)`.
pub fn parse_partition(text: &str) -> Result<FinalPartition> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Schema("partition document must be an object".into()))?;
    if let Some(missing) = PARTITION_KEYS.iter().find(|k| !obj.contains_key(**k)) {
        return Err(Error::Schema(format!("missing key {missing:?}")));
    }
    let doc: PartitionDoc = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Schema(format!("unsupported format_version {}", doc.format_version)));
    }
    if doc.d == 0 || doc.d > doc.n {
        return Err(Error::InvalidDimensions {
            n: doc.n as u64,
            d: doc.d as u64,
        });
    }
    if doc.groups.len() as u64 != doc.workers || doc.footprints.len() as u64 != doc.workers {
        return Err(Error::Schema(format!(
            "expected {} groups and footprints, found {} and {}",
            doc.workers,
            doc.groups.len(),
            doc.footprints.len()
        )));
    }
    if let Some(params) = doc.params {
        let expected = derive_parameters(doc.n, doc.d, doc.workers)?;
        if params != expected {
            return Err(Error::Schema("params do not match (n, d, N)".into()));
        }
        if doc.case != Some(params.case) {
            return Err(Error::Schema("case does not match params".into()));
        }
    }
    for f in &doc.footprints {
        if f.windows(2).any(|w| w[0] >= w[1]) || f.iter().any(|&x| x == 0 || x > doc.n) {
            return Err(Error::Schema("footprints must be increasing indices in [1, n]".into()));
        }
    }
    let groups = doc
        .groups
        .into_iter()
        .map(|g| {
            g.into_iter()
                .map(|e| {
                    if e.len() != doc.d as usize {
                        return Err(Error::Schema(format!("task {e:?} does not have {} elements", doc.d)));
                    }
                    DTuple::new(e, doc.n).map_err(|err| Error::Schema(err.to_string()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let p = FinalPartition {
        n: doc.n,
        d: doc.d,
        params: doc.params,
        groups,
        placement: doc.footprints,
        meta: doc.metadata,
    };
    // rejects a task listed twice
    p.task_set()?;
    Ok(p)
}

/// The footprints `α(Φ_b)` recomputed from the groups.
pub fn recomputed_footprints(p: &FinalPartition) -> Vec<Vec<u32>> {
    p.groups.iter().map(|g| footprint(p.n, g.iter())).collect()
}
