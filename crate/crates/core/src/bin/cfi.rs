use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use cfi_core::harness::{
    self, emit_report, generate_scenarios, profiles_from_tsv, run_suite, summary_text, write_run, GeneratorConfig,
    ResultsTable, ScenarioSet, SuiteConfig,
};
use cfi_core::model::{build_topology, default_params, plan_from_text, plan_to_text, DemandScenario};
use cfi_core::pipeline::{optimize, Model};
use cfi_core::sim::{run_simulation, SimMetrics};
use cfi_core::step2::Step2Options;

#[derive(Parser)]
#[command(name = "cfi", version, about = "Signal timing for continuous-flow intersections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Proposed,
    Benchmark,
}

#[derive(Subcommand)]
enum Command {
    /// Write the seeded scenario set.
    GenerateScenarios {
        #[arg(long, default_value_t = harness::CANONICAL_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a signal plan for one scenario.
    Optimize {
        /// Scenario file
        #[arg(long)]
        scenario: PathBuf,
        /// Scenario id inside the file (defaults to the first one)
        #[arg(long)]
        id: Option<u32>,
        #[arg(long, value_enum, default_value = "proposed")]
        model: ModelArg,
        /// Offset solver time limit, seconds
        #[arg(long, default_value_t = 20.0)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Simulate a plan on a scenario.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        id: Option<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3600.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Run both models over a scenario set.
    RunSuite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        journal: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Only the first N scenarios
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Summarize a results table.
    Report {
        #[arg(long)]
        results: PathBuf,
        /// Profile table written by run-suite (defaults to profiles.tsv next to the results)
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn load_scenario(path: &Path, id: Option<u32>) -> Result<DemandScenario, String> {
    let set = harness::read_scenarios(path)?;
    let rec = match id {
        Some(id) => set.get(id).ok_or_else(|| format!("scenario {id} not in {}", path.display()))?,
        None => set.records.first().ok_or_else(|| format!("{} has no scenarios", path.display()))?,
    };
    Ok(rec.scenario.clone())
}

fn metrics_text(m: &SimMetrics) -> String {
    let mut s = String::from("# cfi-metrics v1\n");
    let c = m.counters;
    let _ = writeln!(s, "delay\t{}", m.avg_delay);
    let _ = writeln!(s, "queue\t{}", m.avg_queue);
    let _ = writeln!(s, "generated\t{}", c.generated);
    let _ = writeln!(s, "discharged\t{}", c.discharged);
    let _ = writeln!(s, "in_network\t{}", c.in_network);
    let _ = writeln!(s, "denied\t{}", c.denied);
    for (mv, d) in &m.movement_delay {
        let _ = writeln!(s, "delay_{mv}\t{d}");
    }
    for (t, d) in &m.profile {
        let _ = writeln!(s, "profile_{t}\t{d}");
    }
    s
}

fn run(cli: Cli) -> Result<(), String> {
    let table = build_topology();
    let params = default_params();
    match cli.command {
        Command::GenerateScenarios { seed, out } => {
            let cfg = GeneratorConfig {
                seed,
                ..GeneratorConfig::default()
            };
            let set: ScenarioSet = generate_scenarios(&cfg, &table, &params).map_err(|e| e.to_string())?;
            write_out(out.as_deref(), &set.to_tsv())
        }
        Command::Optimize {
            scenario,
            id,
            model,
            time_limit,
            node_limit,
            plan_out,
        } => {
            let s = load_scenario(&scenario, id)?;
            let model = match model {
                ModelArg::Proposed => Model::Proposed,
                ModelArg::Benchmark => Model::Benchmark,
            };
            let opts = Step2Options {
                time_limit: Duration::from_secs_f64(time_limit),
                node_limit: node_limit.or(Step2Options::default().node_limit),
                ..Step2Options::default()
            };
            let out = optimize(model, &s, &table, &params, &opts);
            eprintln!(
                "scenario {} model {} status {} solve {:.2}s violations {}",
                s.id,
                model,
                out.status,
                out.solve_time.as_secs_f64(),
                out.violations.len()
            );
            for v in &out.violations {
                eprintln!("  {v:?}");
            }
            let plan = out
                .plan
                .ok_or_else(|| out.message.unwrap_or_else(|| format!("no plan ({})", out.status)))?;
            write_out(plan_out.as_deref(), &plan_to_text(&plan))
        }
        Command::Simulate {
            plan,
            scenario,
            id,
            seed,
            horizon,
            step,
            metrics_out,
        } => {
            let text = std::fs::read_to_string(&plan).map_err(|e| format!("{}: {e}", plan.display()))?;
            let plan = plan_from_text(&text).map_err(|e| e.to_string())?;
            let s = load_scenario(&scenario, id)?;
            let m = run_simulation(&plan, &s, &table, &params, seed, horizon, step).map_err(|e| e.to_string())?;
            write_out(metrics_out.as_deref(), &metrics_text(&m))
        }
        Command::RunSuite {
            config,
            jobs,
            journal,
            out_dir,
            limit,
        } => {
            let mut cfg = match &config {
                Some(p) => SuiteConfig::load(p).map_err(|e| e.to_string())?,
                None => SuiteConfig::default(),
            };
            cfg.jobs = jobs.or(cfg.jobs);
            cfg.limit = limit.or(cfg.limit);
            let set = harness::load_scenarios(&cfg)?;
            let run = run_suite(&cfg, &set, journal.as_deref()).map_err(|e| e.to_string())?;
            write_run(&run, &out_dir).map_err(|e| e.to_string())?;
            eprintln!(
                "{} rows ({} replayed) written to {}",
                run.table.rows.len(),
                run.replayed_rows,
                out_dir.display()
            );
            Ok(())
        }
        Command::Report {
            results,
            profiles,
            out_dir,
        } => {
            let text = std::fs::read_to_string(&results).map_err(|e| format!("{}: {e}", results.display()))?;
            let table = ResultsTable::from_tsv(&text).map_err(|e| e.to_string())?;
            let ppath = profiles.unwrap_or_else(|| results.with_file_name("profiles.tsv"));
            let prof = std::fs::read_to_string(&ppath).map(|t| profiles_from_tsv(&t)).unwrap_or_default();
            let report = emit_report(&table, &prof, &out_dir).map_err(|e| e.to_string())?;
            print!("{}", summary_text(&report));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
