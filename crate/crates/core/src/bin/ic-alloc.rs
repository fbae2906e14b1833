use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use ic_alloc::baselines::{thin, ThinningSpec};
use ic_alloc::combinatorics::binomial_u128;
use ic_alloc::design::{
    build_base_partition, derive_parameters, refine, refine_streaming, FinalPartition, IcDesign,
    DEFAULT_MATERIALIZATION_CAP,
};
use ic_alloc::harness::{
    init_thread_pool_from_env, monte_carlo_delta, simulate_rounds, sweep, trial_seed,
    write_sweep_csv, GridSpec,
};
use ic_alloc::io::{emit_partition, emit_tasks, parse_partition, parse_tasks};
use ic_alloc::oracle::brute_force_pi_star;
use ic_alloc::verify::verify_partition;
use ic_alloc::{full_report, pi_of, Error, Result, TaskSet};

#[derive(Parser)]
#[command(name = "ic-alloc", version, about = "Interweaved-clique data and task allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the partition for (n, d, N), optionally refined by a task file.
    Partition {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        workers: u64,
        #[arg(long)]
        tasks: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a random task set keeping each d-subset with probability phi.
    Thin {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost report of a partition, optionally re-served on another task file.
    Eval {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Check every invariant of a partition file.
    Verify {
        #[arg(long)]
        partition: PathBuf,
    },
    /// Exact optimum of the communication cost for a tiny task set.
    Bruteforce {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        workers: u64,
        #[arg(long, default_value_t = ic_alloc::oracle::DEFAULT_EDGE_CAP)]
        edge_cap: usize,
    },
    /// Load factor over repeated random task sets.
    Montecarlo {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        workers: u64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Run a JSON grid {"n": [..], "d": [..], "N": [..], "phi": [..], "seeds": [..]}.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve several random task sets with one fixed placement.
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        workers: u64,
        #[arg(long)]
        rounds: usize,
        /// One density, or one per round.
        #[arg(long, value_delimiter = ',', required = true)]
        phi_list: Vec<f64>,
        #[arg(long)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(value: &impl Serialize) {
    emit(&(serde_json::to_string_pretty(value).expect("serializable") + "\n"));
}

/// Writes `text` to `out`, or to stdout when there is no file.
fn deliver(text: &str, out: Option<&Path>, summary: serde_json::Value) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            print_json(&summary);
        }
        None => emit(text),
    }
    Ok(())
}

fn fits(n: u32, d: u32) -> bool {
    binomial_u128(n as u64, d as u64).is_some_and(|t| t <= DEFAULT_MATERIALIZATION_CAP as u128)
}

/// Serves `tasks` with the groups and placement of `p`.
fn reassign(p: &FinalPartition, tasks: &TaskSet) -> Result<FinalPartition> {
    if tasks.n() != p.n || tasks.d() != p.d {
        return Err(Error::DimensionMismatch {
            expected_n: p.n,
            expected_d: p.d,
            n: tasks.n(),
            d: tasks.d(),
        });
    }
    let mut groups = vec![Vec::new(); p.num_groups()];
    if let Some(params) = p.params {
        let design = IcDesign::new(params)?;
        for t in tasks.edges() {
            groups[design.assign(t)? as usize - 1].push(t.clone());
        }
    } else {
        let home: HashMap<_, _> = p
            .groups
            .iter()
            .enumerate()
            .flat_map(|(b, g)| g.iter().map(move |t| (t, b)))
            .collect();
        for t in tasks.edges() {
            let b = home
                .get(t)
                .ok_or_else(|| Error::Schema(format!("task {t} is in no group of the partition")))?;
            groups[*b].push(t.clone());
        }
    }
    Ok(FinalPartition {
        groups,
        meta: tasks.meta().clone(),
        ..p.clone()
    })
}

/// Ok(false) means the command ran but found a violation.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Partition {
            n,
            d,
            workers,
            tasks,
            out,
        } => {
            let params = derive_parameters(n, d, workers)?;
            let p = match (&tasks, fits(n, d)) {
                (Some(path), true) => refine(&build_base_partition(&params)?, &parse_tasks(&read(path)?)?)?,
                (Some(path), false) => refine_streaming(&IcDesign::new(params)?, &parse_tasks(&read(path)?)?)?,
                (None, _) => build_base_partition(&params)?.to_final(),
            };
            let summary = json!({
                "out": out,
                "n": n,
                "d": d,
                "N": workers,
                "case": params.case,
                "tasks": p.task_count(),
                "pi": pi_of(&p),
            });
            deliver(&emit_partition(&p), out.as_deref(), summary)?;
            Ok(true)
        }
        Command::Thin { n, d, phi, seed, out } => {
            let x = thin(n, d, &ThinningSpec::new(phi, seed))?;
            let summary = json!({"out": out, "n": n, "d": d, "tasks": x.len(), "phi": phi, "seed": seed});
            deliver(&emit_tasks(&x), out.as_deref(), summary)?;
            Ok(true)
        }
        Command::Eval { partition, tasks } => {
            let mut p = parse_partition(&read(&partition)?)?;
            if let Some(path) = tasks {
                p = reassign(&p, &parse_tasks(&read(&path)?)?)?;
            }
            let phi = match binomial_u128(p.n as u64, p.d as u64) {
                Some(total) if total > 0 => p.task_count() as f64 / total as f64,
                _ => p.meta.phi.unwrap_or(1.0),
            };
            let report = full_report(&p, None, phi);
            print_json(&report);
            Ok(report.bounds_ok())
        }
        Command::Verify { partition } => {
            let report = verify_partition(&parse_partition(&read(&partition)?)?);
            print_json(&report);
            Ok(report.ok)
        }
        Command::Bruteforce {
            tasks,
            workers,
            edge_cap,
        } => {
            let x = parse_tasks(&read(&tasks)?)?;
            print_json(&brute_force_pi_star(&x, workers, edge_cap)?);
            Ok(true)
        }
        Command::Montecarlo {
            n,
            d,
            workers,
            phi,
            trials,
            seed,
        } => {
            if trials == 0 {
                return Err(Error::Schema("trials must be at least 1".into()));
            }
            print_json(&monte_carlo_delta(n, d, workers, phi, trials, seed)?);
            Ok(true)
        }
        Command::Sweep { grid, out } => {
            let spec: GridSpec =
                serde_json::from_str(&read(&grid)?).map_err(|e| Error::Schema(e.to_string()))?;
            let rows = sweep(&spec);
            write_sweep_csv(&rows, fs::File::create(&out)?)?;
            let skipped = rows.iter().filter(|r| r.skipped.is_some()).count();
            let violations = rows.iter().filter(|r| r.bounds_ok == Some(false)).count();
            print_json(&json!({
                "out": out,
                "rows": rows.len(),
                "skipped": skipped,
                "violations": violations,
            }));
            Ok(violations == 0)
        }
        Command::Simulate {
            n,
            d,
            workers,
            rounds,
            phi_list,
            seed,
        } => {
            if rounds == 0 {
                return Err(Error::Schema("at least one round is required".into()));
            }
            let phis = match phi_list.len() {
                1 => vec![phi_list[0]; rounds],
                len if len == rounds => phi_list,
                len => {
                    return Err(Error::Schema(format!("{len} densities given for {rounds} rounds")))
                }
            };
            let specs: Vec<ThinningSpec> = phis
                .iter()
                .enumerate()
                .map(|(i, &phi)| ThinningSpec::new(phi, trial_seed(seed, i as u64)))
                .collect();
            let sim = simulate_rounds(n, d, workers, &specs)?;
            print_json(&sim);
            Ok(sim.blind)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_thread_pool_from_env();
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("ic-alloc: checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("ic-alloc: {e}");
            ExitCode::FAILURE
        }
    }
}
