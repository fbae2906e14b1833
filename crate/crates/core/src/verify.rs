//! Invariant checks on a partition loaded from disk.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::design::{
    build_base_partition, derive_parameters, FinalPartition, IcDesign, DEFAULT_MATERIALIZATION_CAP,
};
use crate::metrics::full_report;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, ok: bool, detail: Option<String>) -> Check {
    Check {
        name: name.into(),
        ok,
        detail: if ok { None } else { detail },
    }
}

/// Runs every structural invariant and, for partitions produced by the
/// construction, membership and the promised bounds.
pub fn verify_partition(p: &FinalPartition) -> VerifyReport {
    let mut checks = Vec::new();
    let tasks = p.task_set();
    checks.push(check(
        "disjoint",
        tasks.is_ok(),
        tasks.as_ref().err().map(ToString::to_string),
    ));
    checks.push(check(
        "placement_count",
        p.placement.len() == p.groups.len(),
        Some(format!("{} placements for {} groups", p.placement.len(), p.groups.len())),
    ));
    checks.push(check("feasible", p.is_feasible(), Some("a task needs a file its worker lacks".into())));

    let total = binomial(p.n as u64, p.d as u64).to_u64();
    let complete = total == Some(p.task_count() as u64);
    let mut base = None;

    if let Some(params) = p.params {
        let derived = derive_parameters(p.n, p.d, p.num_groups() as u64);
        let consistent = derived.as_ref().is_ok_and(|d| *d == params);
        checks.push(check(
            "params_consistent",
            consistent,
            Some("params differ from those derived from (n, d, N)".into()),
        ));
        if consistent {
            match IcDesign::new(params) {
                Ok(design) => {
                    let misplaced = p.groups.iter().enumerate().find_map(|(b, g)| {
                        g.iter()
                            .find(|t| design.assign(t).ok() != Some(b as u64 + 1))
                            .map(|t| format!("{t} listed in group {}", b + 1))
                    });
                    checks.push(check("membership", misplaced.is_none(), misplaced));
                    let outside = (1..=p.num_groups()).find(|&b| {
                        let nominal = design.nominal_placement(b as u64);
                        p.placement[b - 1].iter().any(|x| nominal.binary_search(x).is_err())
                    });
                    checks.push(check(
                        "placement_within_families",
                        outside.is_none(),
                        outside.map(|b| format!("group {b} holds files outside its families")),
                    ));
                }
                Err(e) => checks.push(check("membership", false, Some(e.to_string()))),
            }
            if complete && total.is_some_and(|t| t <= DEFAULT_MATERIALIZATION_CAP) {
                base = build_base_partition(&params).ok();
            }
        }
    }
    if let Some(base) = &base {
        let same = (1..=base.num_groups()).all(|b| base.group_tuples(b) == p.groups[b - 1]);
        checks.push(check("matches_construction", same, Some("groups differ from a fresh build".into())));
    }

    let phi = match total {
        Some(t) if t > 0 => p.task_count() as f64 / t as f64,
        _ => p.meta.phi.unwrap_or(1.0),
    };
    let report = full_report(p, base.as_ref(), phi);
    for b in report.bounds.iter().filter(|b| !b.probabilistic && b.name != "feasible") {
        checks.push(check(
            &b.name,
            b.satisfied,
            Some(format!("achieved {} against bound {}", b.achieved, b.bound)),
        ));
    }
    VerifyReport {
        ok: checks.iter().all(|c| c.ok),
        checks,
    }
}
