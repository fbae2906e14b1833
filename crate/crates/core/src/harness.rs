//! Experiment drivers: Monte-Carlo estimates of the load factor on random
//! task sets, parameter sweeps, and multi-round simulations with a fixed
//! placement.
//!
//! Trials run on the rayon pool. Set `IC_ALLOC_THREADS` to cap its size
//! (see [`init_thread_pool_from_env`]); results do not depend on it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{draw, thin, ThinningSpec, SEED_STREAM};
use crate::counting::phi_min;
use crate::design::{
    build_base_partition, derive_parameters, refine, BasePartition, Case, FinalPartition,
};
use crate::error::{Error, Result};
use crate::metrics::{delta_of, full_report, CostReport};

pub const THREADS_ENV: &str = "IC_ALLOC_THREADS";

/// Sizes the global rayon pool from `IC_ALLOC_THREADS` when set. Safe to
/// call more than once; only the first call has an effect.
pub fn init_thread_pool_from_env() {
    if let Some(threads) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
    {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            log::debug!("rayon pool already initialised");
        }
    }
}

/// Seed of trial `i` under `master`.
pub fn trial_seed(master: u64, i: u64) -> u64 {
    draw(master, SEED_STREAM, i as u128)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub workers: u64,
    pub phi: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub successes: u64,
    pub fraction_delta_le_5: f64,
    pub min_delta_x: f64,
    pub mean_delta_x: f64,
    pub max_delta_x: f64,
    /// `None` when the threshold's denominator is not positive.
    pub phi_min: Option<f64>,
    pub vacuous: bool,
    /// `phi >= phi_min`, the threshold is meaningful and the parameters lie
    /// in the balanced regime, so the high-probability bound is claimed.
    pub guarantee_applies: bool,
}

/// Draws `trials` random task sets at density `phi` and records the load
/// factor of the refined partition for each.
pub fn monte_carlo_delta(
    n: u32,
    d: u32,
    workers: u64,
    phi: f64,
    trials: u64,
    master_seed: u64,
) -> Result<MonteCarloSummary> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidPhi(phi));
    }
    let params = derive_parameters(n, d, workers)?;
    let base = build_base_partition(&params)?;
    let deltas = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x = thin(n, d, &ThinningSpec::new(phi, trial_seed(master_seed, i)))?;
            Ok(delta_of(&refine(&base, &x)?, workers))
        })
        .collect::<Result<Vec<f64>>>()?;

    let threshold = phi_min(n, d, workers).ok();
    let vacuous = threshold.is_none_or(|t| t.vacuous);
    let successes = deltas.iter().filter(|&&x| x <= 5.0).count() as u64;
    let denom = trials.max(1) as f64;
    Ok(MonteCarloSummary {
        n,
        d,
        workers,
        phi,
        trials,
        master_seed,
        successes,
        fraction_delta_le_5: successes as f64 / denom,
        min_delta_x: deltas.iter().copied().fold(f64::INFINITY, f64::min),
        mean_delta_x: deltas.iter().sum::<f64>() / denom,
        max_delta_x: deltas.iter().copied().fold(0.0, f64::max),
        phi_min: threshold.map(|t| t.value),
        vacuous,
        guarantee_applies: !vacuous
            && params.in_balanced_regime()
            && threshold.is_some_and(|t| phi >= t.value),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: Vec<u32>,
    pub d: Vec<u32>,
    #[serde(rename = "N")]
    pub workers: Vec<u64>,
    pub phi: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// One sweep row. Rows whose parameters the construction cannot serve
/// carry `skipped` and no metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub workers: u64,
    pub phi: f64,
    pub seed: u64,
    pub case: Option<Case>,
    pub k: Option<u32>,
    pub s: Option<u32>,
    pub g: Option<u32>,
    pub pi: Option<u64>,
    pub pi_lb: Option<f64>,
    pub gap: Option<f64>,
    /// Load factor of the partition of all of `A_{n,d}`.
    pub delta: Option<f64>,
    /// Load factor after refinement by the random task set.
    pub delta_x: Option<f64>,
    pub arf: Option<f64>,
    pub bounds_ok: Option<bool>,
    pub skipped: Option<String>,
}

impl SweepRecord {
    fn skipped(n: u32, d: u32, workers: u64, phi: f64, seed: u64, reason: String) -> Self {
        SweepRecord {
            n,
            d,
            workers,
            phi,
            seed,
            case: None,
            k: None,
            s: None,
            g: None,
            pi: None,
            pi_lb: None,
            gap: None,
            delta: None,
            delta_x: None,
            arf: None,
            bounds_ok: None,
            skipped: Some(reason),
        }
    }
}

fn sweep_point(base: &BasePartition, base_report: &CostReport, phi: f64, seed: u64) -> SweepRecord {
    let params = base.params();
    let (n, d, workers) = (params.n, params.d, params.workers);
    let refined = thin(n, d, &ThinningSpec::new(phi, seed)).and_then(|x| refine(base, &x));
    let fin = match refined {
        Ok(f) => f,
        Err(e) => return SweepRecord::skipped(n, d, workers, phi, seed, e.to_string()),
    };
    let report = full_report(&fin, Some(base), phi);
    SweepRecord {
        n,
        d,
        workers,
        phi,
        seed,
        case: Some(params.case),
        k: Some(params.k),
        s: Some(params.s),
        g: Some(params.g),
        pi: Some(report.pi),
        pi_lb: Some(report.pi_lb),
        gap: Some(report.gap),
        delta: Some(base_report.delta),
        delta_x: Some(report.delta),
        arf: Some(report.arf),
        bounds_ok: Some(report.bounds_ok() && base_report.bounds_ok()),
        skipped: None,
    }
}

/// Runs every grid point. Rows come out in grid order: `n`, then `d`, `N`,
/// `phi` and `seed`.
pub fn sweep(grid: &GridSpec) -> Vec<SweepRecord> {
    let mut designs = Vec::new();
    for &n in &grid.n {
        for &d in &grid.d {
            for &w in &grid.workers {
                designs.push((n, d, w));
            }
        }
    }
    designs
        .into_par_iter()
        .map(|(n, d, w)| {
            let points = || {
                grid.phi
                    .iter()
                    .flat_map(|&phi| grid.seeds.iter().map(move |&seed| (phi, seed)))
            };
            let base = derive_parameters(n, d, w).and_then(|p| build_base_partition(&p));
            match base {
                Err(e) => points()
                    .map(|(phi, seed)| SweepRecord::skipped(n, d, w, phi, seed, e.to_string()))
                    .collect::<Vec<_>>(),
                Ok(base) => {
                    let base_report = full_report(&base.to_final(), Some(&base), 1.0);
                    points()
                        .collect::<Vec<_>>()
                        .into_par_iter()
                        .map(|(phi, seed)| sweep_point(&base, &base_report, phi, seed))
                        .collect()
                }
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub const SWEEP_CSV_HEADER: [&str; 16] = [
    "n", "d", "N", "phi", "seed", "case", "k", "s", "g", "pi", "pi_lb", "gap", "delta", "delta_X",
    "arf", "bounds_ok",
];

/// Writes `records` as CSV with [`SWEEP_CSV_HEADER`]. Missing values are
/// empty cells.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    fn opt<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map(ToString::to_string).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(SWEEP_CSV_HEADER).map_err(to_err)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.d.to_string(),
            r.workers.to_string(),
            r.phi.to_string(),
            r.seed.to_string(),
            r.case.map(|c| c.as_str().to_string()).unwrap_or_default(),
            opt(&r.k),
            opt(&r.s),
            opt(&r.g),
            opt(&r.pi),
            opt(&r.pi_lb),
            opt(&r.gap),
            opt(&r.delta),
            opt(&r.delta_x),
            opt(&r.arf),
            opt(&r.bounds_ok),
        ])
        .map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub round: usize,
    pub spec: ThinningSpec,
    pub tasks: u64,
    pub feasible: bool,
    /// The placement equals the one of round 0.
    pub placement_unchanged: bool,
    pub report: CostReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub n: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub workers: u64,
    pub rounds: Vec<RoundOutcome>,
    /// Every round was served by the same placement, and feasibly.
    pub blind: bool,
}

/// Serves one task set per round with the placement computed once from
/// `(n, d, N)`.
pub fn simulate_rounds(n: u32, d: u32, workers: u64, rounds: &[ThinningSpec]) -> Result<Simulation> {
    let params = derive_parameters(n, d, workers)?;
    let base = build_base_partition(&params)?;
    let finals: Vec<FinalPartition> = rounds
        .par_iter()
        .map(|spec| refine(&base, &thin(n, d, spec)?))
        .collect::<Result<_>>()?;
    let first = serde_json::to_vec(&base.footprints()).map_err(|e| Error::Schema(e.to_string()))?;
    let mut outcomes = Vec::with_capacity(rounds.len());
    for (i, (spec, fin)) in rounds.iter().zip(finals).enumerate() {
        let bytes = serde_json::to_vec(&fin.placement).map_err(|e| Error::Schema(e.to_string()))?;
        outcomes.push(RoundOutcome {
            round: i,
            spec: spec.clone(),
            tasks: fin.task_count() as u64,
            feasible: fin.is_feasible(),
            placement_unchanged: bytes == first,
            report: full_report(&fin, None, spec.phi),
        });
    }
    let blind = outcomes.iter().all(|o| o.feasible && o.placement_unchanged);
    Ok(Simulation {
        n,
        d,
        workers,
        rounds: outcomes,
        blind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_delta(12, 2, 3, 0.5, 20, 7).unwrap();
        let b = monte_carlo_delta(12, 2, 3, 0.5, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.min_delta_x <= a.mean_delta_x && a.mean_delta_x <= a.max_delta_x);
        assert!(a.vacuous);
        assert!(!a.guarantee_applies);
    }

    #[test]
    fn monte_carlo_full_density_matches_base() {
        let s = monte_carlo_delta(6, 2, 3, 1.0, 4, 1).unwrap();
        assert!((s.min_delta_x - 1.2).abs() < 1e-15);
        assert!((s.max_delta_x - 1.2).abs() < 1e-15);
        assert_eq!(s.fraction_delta_le_5, 1.0);
    }

    #[test]
    fn sweep_rows_and_skips() {
        let grid = GridSpec {
            n: vec![6, 7],
            d: vec![2],
            workers: vec![3, 6],
            phi: vec![1.0, 0.5],
            seeds: vec![1],
        };
        let rows = sweep(&grid);
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].n, rows[0].workers, rows[0].phi), (6, 3, 1.0));
        assert_eq!(rows[0].pi, Some(4));
        assert_eq!(rows[0].bounds_ok, Some(true));
        // (6, 2, 6) has k = 4 and no valid family size
        assert!(rows[2].skipped.is_some());
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "n,d,N,phi,seed,case,k,s,g,pi,pi_lb,gap,delta,delta_X,arf,bounds_ok"
        );
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn rounds_share_one_placement() {
        let specs: Vec<_> = [0.2, 0.7, 1.0]
            .iter()
            .enumerate()
            .map(|(i, &phi)| ThinningSpec::new(phi, i as u64))
            .collect();
        let sim = simulate_rounds(12, 2, 5, &specs).unwrap();
        assert!(sim.blind);
        assert_eq!(sim.rounds.len(), 3);
        assert_eq!(sim.rounds[2].tasks, 66);
    }
}
