//! Cost evaluation of partitions: communication cost `pi`, computation cost
//! `delta`, average replication factor, the converse gap, and the bounds
//! the construction promises.

use std::f64::consts::E;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::counting::{phi_min, pi_lower_bound, pi_lower_bound_exact, PhiMin, REAL_TOLERANCE};
use crate::design::{BasePartition, Case, FinalPartition};

/// Anything made of `N` groups of tuples over `[n]`.
pub trait Grouping {
    fn files(&self) -> u32;
    fn group_sizes(&self) -> Vec<u64>;
    /// `|α(Φ_b)|` for every group.
    fn footprint_sizes(&self) -> Vec<u64>;
}

impl Grouping for FinalPartition {
    fn files(&self) -> u32 {
        self.n
    }

    fn group_sizes(&self) -> Vec<u64> {
        self.groups.iter().map(|g| g.len() as u64).collect()
    }

    fn footprint_sizes(&self) -> Vec<u64> {
        (1..=self.num_groups())
            .map(|b| self.group_footprint(b).len() as u64)
            .collect()
    }
}

impl Grouping for BasePartition {
    fn files(&self) -> u32 {
        self.params().n
    }

    fn group_sizes(&self) -> Vec<u64> {
        BasePartition::group_sizes(self)
    }

    fn footprint_sizes(&self) -> Vec<u64> {
        self.footprints().iter().map(|f| f.len() as u64).collect()
    }
}

/// `max_b |α(Φ_b)|`, zero when every group is empty.
pub fn pi_of(p: &impl Grouping) -> u64 {
    p.footprint_sizes().into_iter().max().unwrap_or(0)
}

/// `max_b |Φ_b| / ceil(|X| / N)`, zero for an empty task set.
pub fn delta_of(p: &impl Grouping, workers: u64) -> f64 {
    let sizes = p.group_sizes();
    let total: u64 = sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let ideal = total.div_ceil(workers);
    *sizes.iter().max().unwrap() as f64 / ideal as f64
}

/// `(1/n) sum_b |α(Φ_b)|`.
pub fn arf_of(p: &impl Grouping, n: u32) -> f64 {
    p.footprint_sizes().iter().sum::<u64>() as f64 / n as f64
}

/// One promised inequality and whether the partition meets it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub achieved: f64,
    pub satisfied: bool,
    /// Holds only with high probability over random task sets.
    pub probabilistic: bool,
}

fn le(name: &str, achieved: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        bound,
        achieved,
        satisfied: achieved <= bound + REAL_TOLERANCE,
        probabilistic: false,
    }
}

fn lt(name: &str, achieved: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        satisfied: achieved < bound,
        ..le(name, achieved, bound)
    }
}

fn ge(name: &str, achieved: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        satisfied: achieved + REAL_TOLERANCE >= bound,
        ..le(name, achieved, bound)
    }
}

fn eq(name: &str, achieved: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        satisfied: (achieved - bound).abs() <= REAL_TOLERANCE,
        ..le(name, achieved, bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub n: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub workers: u64,
    pub tasks: u64,
    /// `max_b |α(Φ_b)|` over the task groups.
    pub pi: u64,
    /// Largest placement, i.e. files actually shipped to one worker.
    pub placement_pi: u64,
    pub delta: f64,
    pub arf: f64,
    pub phi: f64,
    /// `phi^(1/d) n / N^(1/d)`; zero when `phi` is zero.
    pub pi_lb: f64,
    pub pi_lb_ceil: u64,
    /// `pi / pi_lb`; zero when `pi_lb` is zero.
    pub gap: f64,
    pub phi_min: Option<PhiMin>,
    pub bounds: Vec<BoundCheck>,
}

impl CostReport {
    /// Every deterministic bound holds.
    pub fn bounds_ok(&self) -> bool {
        self.bounds.iter().filter(|b| !b.probabilistic).all(|b| b.satisfied)
    }

    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

/// All metrics of `p` plus every bound that applies to it. `phi` is the
/// sampling density the task set was drawn with (use `1.0` for `A_{n,d}`).
/// When `base` is given, bounds on the partition of the whole of
/// `A_{n,d}` are checked as well.
pub fn full_report(p: &FinalPartition, base: Option<&BasePartition>, phi: f64) -> CostReport {
    let (n, d) = (p.n, p.d);
    let workers = p.num_groups() as u64;
    let tasks = p.task_count() as u64;
    let pi = pi_of(p);
    let placement_pi = p.placement.iter().map(|f| f.len() as u64).max().unwrap_or(0);
    let delta = delta_of(p, workers);
    let arf = arf_of(p, n);
    let lb = pi_lower_bound(n, d, workers, phi).ok();
    let pi_lb = lb.map_or(0.0, |b| b.value);
    let gap = if pi_lb > 0.0 { pi as f64 / pi_lb } else { 0.0 };
    let threshold = phi_min(n, d, workers).ok();

    let mut bounds = vec![
        ge(
            "converse",
            pi as f64,
            pi_lower_bound_exact(n, d, workers, tasks) as f64,
        ),
        le("arf_le_n_pi_over_n", arf, workers as f64 * pi as f64 / n as f64),
    ];
    if p.is_feasible() {
        bounds.push(eq("feasible", 1.0, 1.0));
    } else {
        bounds.push(eq("feasible", 0.0, 1.0));
    }

    let params = p.params.or_else(|| base.map(|b| *b.params()));
    if let Some(params) = params {
        let family_bound = params.pi_bound() as f64;
        bounds.push(le("pi_family_bound", pi as f64, family_bound));
        bounds.push(le("placement_family_bound", placement_pi as f64, family_bound));
        let nf = n as f64;
        let wf = workers as f64;
        if params.in_balanced_regime() {
            let cap = 4.0 * E * nf / wf.powf(1.0 / d as f64);
            bounds.push(le("pi_4e", placement_pi as f64, cap));
            if let Some(t) = threshold {
                if !t.vacuous && phi >= t.value {
                    bounds.push(BoundCheck {
                        probabilistic: true,
                        ..le("delta_x_le_5", delta, 5.0)
                    });
                }
            }
        }
        if d == 2 {
            match params.case {
                Case::Divisible => bounds.push(lt("arf_lt_sqrt_2n", arf, (2.0 * wf).sqrt())),
                Case::NonDivisible if workers >= 3 => {
                    bounds.push(le("arf_le_2_sqrt_2n", arf, 2.0 * (2.0 * wf).sqrt()))
                }
                Case::NonDivisible => {}
            }
        }
        if let Some(base) = base {
            bounds.extend(base_bounds(base));
        }
    }

    CostReport {
        n,
        d,
        workers,
        tasks,
        pi,
        placement_pi,
        delta,
        arf,
        phi,
        pi_lb,
        pi_lb_ceil: lb.map_or(0, |b| b.integer),
        gap,
        phi_min: threshold,
        bounds,
    }
}

/// Guarantees on the partition of all of `A_{n,d}`.
pub fn base_bounds(base: &BasePartition) -> Vec<BoundCheck> {
    let params = base.params();
    let (n, d) = (params.n, params.d);
    let mut out = Vec::new();
    let pi = base.pi() as f64;
    match params.case {
        Case::Divisible => out.push(eq("base_pi_eq_s_d", pi, params.pi_bound() as f64)),
        Case::NonDivisible => out.push(le("base_pi_le_s0_d_plus_g", pi, params.pi_bound() as f64)),
    }

    let total = binomial(n as u64, d as u64).to_f64().unwrap_or(f64::INFINITY);
    let mean = total / params.base_groups as f64;
    let slack = match params.case {
        Case::Divisible => (1u64 << d) as f64 - d as f64,
        Case::NonDivisible => (1u64 << (d + 1)) as f64 - 2.0 * d as f64,
    };
    let sizes = base.base_group_sizes();
    let largest = sizes.iter().copied().max().unwrap_or(0) as f64;
    let smallest = sizes.iter().copied().min().unwrap_or(0) as f64;
    out.push(le("base_size_upper", largest, mean + slack));
    out.push(ge("base_size_lower", smallest, mean - slack));

    if params.k < n {
        out.push(lt(
            "ratio_guard",
            params.workers as f64 / params.base_groups as f64,
            d as f64 + 1.0,
        ));
    }
    if params.in_balanced_regime() {
        out.push(le("delta_le_4", delta_of(base, params.workers), 4.0));
    }
    out
}
