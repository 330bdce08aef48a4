use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use sdrl_core::action_lang::{parse_action_description, ActionDescription, SymbolicState};
use sdrl_core::config::{parse_seeds, RunConfig};
use sdrl_core::envs::taxi::{TaskSchedule, TaxiParams};
use sdrl_core::experiment::{run_experiment, taxi_initial};
use sdrl_core::oracle::{brute_force_optimal, count_plans, detect_positive_loop, enumerate_plans, format_optimum, table_lookup, taxi_reward_table};
use sdrl_core::planner::{find_plan, IntrinsicGoal, RhoTable};
use sdrl_core::report::{status_name, write_report};

#[derive(Parser)]
#[command(name = "sdrl", about = "Symbolic planning over learned options")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and write CSV reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the configured seeds, e.g. `1..3` or `4,7`.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Find a plan with every gain at its default.
    Plan {
        file: PathBuf,
        /// Start state as `f=v,...`; unlisted fluents are completed.
        #[arg(long)]
        from: String,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = 10.0)]
        inf: f64,
    },
    /// Print diagnostics for an action description.
    Validate { file: PathBuf },
    /// Enumerate plans and report the brute-force optimum.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, default_value_t = 10.0)]
        inf: f64,
        /// Score transitions with exact taxi rewards for this task number.
        #[arg(long)]
        taxi_task: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load_description(path: &Path) -> Result<ActionDescription, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_action_description(&text).map_err(|e| Failure::Runtime(anyhow!("{}: {e}", path.display())))
}

fn start_state(d: &ActionDescription, from: &str) -> Result<SymbolicState, Failure> {
    let mut atoms = Vec::new();
    for item in from.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (f, v) = item.split_once('=').ok_or_else(|| Failure::Usage(format!("`{item}` is not f=v")))?;
        let atom = d.atom(f.trim(), v.trim()).map_err(|e| Failure::Usage(format!("`{item}`: {e}")))?;
        atoms.push(atom);
    }
    d.complete_state(&atoms).map_err(|e| Failure::Usage(format!("--from: {e}")))
}

fn cmd_run(config: &Path, out: &Path, seeds: Option<&str>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    if let Some(s) = seeds {
        cfg.seeds = parse_seeds(s).map_err(Failure::Usage)?;
    }
    let exp = run_experiment(&cfg).context("run failed")?;
    let rep = write_report(out, &exp).with_context(|| format!("writing {}", out.display()))?;
    for (seed, status) in &rep.statuses {
        println!("seed {seed}: {}", status_name(*status));
    }
    println!("wrote {} curve files to {}", rep.curves.len(), out.display());
    Ok(())
}

fn cmd_plan(file: &Path, from: &str, max_len: usize, inf: f64) -> Result<(), Failure> {
    let d = load_description(file)?;
    let s = start_state(&d, from)?;
    let rho = RhoTable::new(inf);
    match find_plan(&s, &IntrinsicGoal::new(0.0), &d, &rho, max_len).context("planning failed")? {
        Some(p) => {
            print!("{}", p.serialize(&d, &rho));
            println!("# actions {}", p.action_names(&d).join(" "));
            Ok(())
        }
        None => Err(Failure::Runtime(anyhow!("no plan with positive quality"))),
    }
}

fn cmd_validate(file: &Path) -> Result<(), Failure> {
    let d = load_description(file)?;
    let diags = d.validate();
    for diag in &diags {
        match diag.law {
            Some(i) => println!("law {}: {}", i + 1, diag.message),
            None => println!("{}", diag.message),
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(anyhow!("{} diagnostic(s)", diags.len())))
    }
}

fn cmd_oracle(file: &Path, from: &str, max_len: usize, inf: f64, taxi_task: Option<usize>) -> Result<(), Failure> {
    let d = load_description(file)?;
    let table = match taxi_task {
        Some(0) => return Err(Failure::Usage("tasks are numbered from 1".into())),
        Some(k) => {
            let mut p = TaxiParams::default();
            p.dropoff_reward = TaskSchedule::default().dropoff_reward(k);
            let i = if from == "start" { taxi_initial(&d) } else { start_state(&d, from)? };
            Some((i.clone(), taxi_reward_table(&d, &p, &i, 40).context("reward table")?))
        }
        None => None,
    };
    let i = match &table {
        Some((i, _)) => i.clone(),
        None => start_state(&d, from)?,
    };
    let uniform = |_: &SymbolicState, _: usize| inf;
    let lookup = table.as_ref().map(|(_, t)| table_lookup(t, -inf));
    let r_e: &dyn Fn(&SymbolicState, usize) -> f64 = match &lookup {
        Some(f) => f,
        None => &uniform,
    };
    let plans = enumerate_plans(&i, &d, max_len).context("enumeration failed")?;
    println!("plans up to length {max_len}: {}", count_plans(&i, &d, max_len).context("counting failed")?);
    println!("enumerated: {}", plans.plans.len());
    println!("positive loop: {}", detect_positive_loop(&i, &d, r_e).context("loop check failed")?);
    match brute_force_optimal(&plans, &d, r_e) {
        Some((p, total)) => print!("{}", format_optimum(&d, &p, total)),
        None => println!("no plans"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.command {
        Command::Run { config, out, seeds } => cmd_run(config, out, seeds.as_deref()),
        Command::Plan { file, from, max_len, inf } => cmd_plan(file, from, *max_len, *inf),
        Command::Validate { file } => cmd_validate(file),
        Command::Oracle { file, from, max_len, inf, taxi_task } => cmd_oracle(file, from, *max_len, *inf, *taxi_task),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
