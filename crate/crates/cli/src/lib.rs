//! Benchmark harness behind the `teleroute` binary.
//!
//! Routes one circuit for a range of seeds, optionally verifies every trial,
//! and reports one CSV row per trial plus a row for the cheapest one.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use teleroute::arch::ArchError;
use teleroute::qasm::{self, ParseError};
use teleroute::router::{best_trial, route_trials, TrialResult};
use teleroute::verify::{check_coupling, check_program, EquivalenceConfig, SimError, Verdict};
use teleroute::{Circuit, CostModel, CouplingMap, RouteConfig, RouteError, Strategy};

pub const CSV_HEADER: [&str; 11] = [
    "name",
    "qubits",
    "gates",
    "strategy",
    "cost_model",
    "seed",
    "swaps",
    "teleports",
    "cost",
    "verified",
    "ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "teleroute",
    version,
    about = "Map OpenQASM circuits onto a coupling map"
)]
pub struct Args {
    /// OpenQASM 2.0 circuit to map.
    #[arg(long)]
    pub input: PathBuf,
    /// `tokyo` or a coupling-map JSON file.
    #[arg(long, default_value = "tokyo")]
    pub arch: String,
    /// swap | swap+teleport | bridge
    #[arg(long, default_value = "swap+teleport")]
    pub strategy: Strategy,
    /// equal | ibm
    #[arg(long, default_value = "ibm")]
    pub cost: CostModel,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// First trial seed; trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "on")]
    pub lookahead: Toggle,
    /// Where to write the cheapest mapped circuit.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV file to append trial rows to.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Check coupling, and equivalence when the simulator can hold it.
    #[arg(long)]
    pub verify: bool,
    /// Run both swap and swap+teleport and print the relative cost.
    #[arg(long)]
    pub compare: bool,
    /// Write 0 in the `ms` column so repeated runs give identical files.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}:{err}")]
    Parse { path: PathBuf, err: ParseError },
    #[error("architecture: {0}")]
    Arch(#[from] ArchError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("no trial of {0} succeeded")]
    NoTrial(Strategy),
}

/// Outcome of checking one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verified {
    Skipped,
    /// Coupling holds; the circuit is too large to simulate.
    Coupling,
    Pass,
    Fail,
    Timeout,
    Error,
}

impl Verified {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verified::Skipped => "skipped",
            Verified::Coupling => "coupling",
            Verified::Pass => "pass",
            Verified::Fail => "fail",
            Verified::Timeout => "timeout",
            Verified::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub name: String,
    pub qubits: usize,
    pub gates: usize,
    pub strategy: Strategy,
    pub cost_model: CostModel,
    /// A number, or `best:<seed>` on the summary row.
    pub seed: String,
    pub swaps: Option<usize>,
    pub teleports: Option<usize>,
    pub cost: Option<u64>,
    pub verified: Verified,
    pub ms: u128,
}

impl RunRecord {
    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.name.clone(),
            self.qubits.to_string(),
            self.gates.to_string(),
            self.strategy.to_string(),
            self.cost_model.to_string(),
            self.seed.clone(),
            opt(self.swaps.map(|v| v.to_string())),
            opt(self.teleports.map(|v| v.to_string())),
            opt(self.cost.map(|v| v.to_string())),
            self.verified.as_str().to_string(),
            self.ms.to_string(),
        ]
    }
}

/// All trials of one strategy.
#[derive(Debug)]
pub struct StrategyRun {
    pub strategy: Strategy,
    pub records: Vec<RunRecord>,
    pub best: Option<TrialResult>,
}

#[derive(Debug)]
pub struct Report {
    pub runs: Vec<StrategyRun>,
    /// `(cost_teleport - cost_swap) / cost_swap` for `--compare`.
    pub relative_cost: Option<f64>,
    /// A trial failed verification or routing.
    pub failed: bool,
}

pub fn load_arch(spec: &str) -> Result<CouplingMap, ArchError> {
    if spec == "tokyo" {
        Ok(CouplingMap::tokyo())
    } else {
        CouplingMap::load(spec)
    }
}

fn verify_trial(circuit: &Circuit, map: &CouplingMap, trial: &TrialResult) -> Verified {
    if !check_coupling(&trial.program.circuit, map).is_pass() {
        return Verified::Fail;
    }
    match check_program(circuit, &trial.program, &EquivalenceConfig::default()) {
        Ok(Verdict::Pass) => Verified::Pass,
        Ok(Verdict::Fail(_)) => Verified::Fail,
        Err(SimError::TooManyQubits { .. }) => Verified::Coupling,
        Err(_) => Verified::Fail,
    }
}

/// Routes, verifies and summarizes without touching the file system.
pub fn evaluate(args: &Args, name: &str, circuit: &Circuit, map: &CouplingMap) -> Report {
    let strategies = if args.compare {
        vec![Strategy::Swap, Strategy::SwapTeleport]
    } else {
        vec![args.strategy]
    };
    let mut failed = false;
    let mut runs = Vec::new();
    for strategy in strategies {
        let mut config = RouteConfig::new(strategy, args.cost);
        if args.lookahead == Toggle::Off {
            config.lookahead = None;
        }
        let trials = route_trials(circuit, map, &config, args.seed, args.trials);
        let record = |seed: String, result: Option<&TrialResult>, verified: Verified| RunRecord {
            name: name.to_string(),
            qubits: circuit.qubit_count,
            gates: circuit.gates.len(),
            strategy,
            cost_model: args.cost,
            seed,
            swaps: result.map(|t| t.swaps),
            teleports: result.map(|t| t.teleports),
            cost: result.map(|t| t.cost),
            verified,
            ms: if args.no_timing {
                0
            } else {
                result.map_or(0, |t| t.elapsed.as_millis())
            },
        };
        let mut records = Vec::with_capacity(trials.len() + 1);
        for (seed, result) in &trials {
            let rec = match result {
                Ok(t) => {
                    let v = if args.verify {
                        verify_trial(circuit, map, t)
                    } else {
                        Verified::Skipped
                    };
                    failed |= v == Verified::Fail;
                    record(seed.to_string(), Some(t), v)
                }
                Err(RouteError::Timeout) => record(seed.to_string(), None, Verified::Timeout),
                Err(_) => {
                    failed = true;
                    record(seed.to_string(), None, Verified::Error)
                }
            };
            records.push(rec);
        }
        let best = best_trial(&trials).map(|i| {
            let mut row = records[i].clone();
            row.seed = format!("best:{}", trials[i].0);
            records.push(row);
            trials[i].1.clone().expect("best trial succeeded")
        });
        failed |= best.is_none();
        runs.push(StrategyRun {
            strategy,
            records,
            best,
        });
    }
    let relative_cost = if args.compare {
        let cost = |s: Strategy| {
            runs.iter()
                .find(|r| r.strategy == s)
                .and_then(|r| r.best.as_ref())
                .map(|t| t.cost)
        };
        match (cost(Strategy::Swap), cost(Strategy::SwapTeleport)) {
            (Some(swap), Some(tel)) if swap > 0 => Some((tel as f64 - swap as f64) / swap as f64),
            (Some(0), Some(0)) => Some(0.0),
            _ => None,
        }
    } else {
        None
    };
    Report {
        runs,
        relative_cost,
        failed,
    }
}

/// Appends rows to `path`, writing the header first when the file is new
/// or empty.
pub fn append_csv(path: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Full command: returns whether every trial routed and verified.
pub fn run(args: &Args, out: &mut impl Write) -> Result<bool, CliError> {
    let text = fs::read_to_string(&args.input).map_err(|source| CliError::Read {
        path: args.input.clone(),
        source,
    })?;
    let circuit = qasm::parse(&text).map_err(|err| CliError::Parse {
        path: args.input.clone(),
        err,
    })?;
    let map = load_arch(&args.arch)?;
    let name = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();

    let report = evaluate(args, &name, &circuit, &map);
    let stdout_err = |source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    };
    for run in &report.runs {
        match &run.best {
            Some(t) => writeln!(
                out,
                "{name} {} ({}): best cost {} at seed {}, {} swaps, {} teleports",
                run.strategy, args.cost, t.cost, t.seed, t.swaps, t.teleports
            ),
            None => writeln!(out, "{name} {}: no successful trial", run.strategy),
        }
        .map_err(stdout_err)?;
    }
    if let Some(rel) = report.relative_cost {
        writeln!(
            out,
            "{name} relative cost swap+teleport vs swap: {:+.2}%",
            rel * 100.0
        )
        .map_err(stdout_err)?;
    }

    if let Some(path) = &args.csv {
        let rows: Vec<RunRecord> = report
            .runs
            .iter()
            .flat_map(|r| r.records.iter().cloned())
            .collect();
        append_csv(path, &rows)?;
    }
    if let Some(path) = &args.output {
        let Some(best) = report.runs.last().and_then(|r| r.best.as_ref()) else {
            return Err(CliError::NoTrial(
                report.runs.last().map_or(args.strategy, |r| r.strategy),
            ));
        };
        fs::write(path, qasm::emit(&best.program.circuit)).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
    }
    Ok(!report.failed)
}
