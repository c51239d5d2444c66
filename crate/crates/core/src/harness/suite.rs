use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use thiserror::Error;

use super::config::SuiteConfig;
use super::results::{ResultRow, ResultsTable, RowMetrics, RESULTS_HEADER};
use super::scenarios::{ScenarioRecord, ScenarioSet};
use crate::model::{default_params, build_topology, ModelParams, MovementTable, ViolationClass};
use crate::pipeline::{optimize, Model, PlanOutcome};
use crate::sim::{run_simulation, SimMetrics};

pub const PROFILE_HEADER: &str = "# cfi-profiles v1";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("journal {path}: {source}")]
    Journal {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("journal {path} is corrupt at line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub scenario: u32,
    pub model: Model,
    pub replication: u32,
    pub bin_start: f64,
    pub delay: f64,
}

impl ProfileRow {
    fn to_line(&self) -> String {
        format!("{}\t{}\t{}\t{}\t{}", self.scenario, self.model, self.replication, self.bin_start, self.delay)
    }

    fn from_line(line: &str) -> Option<ProfileRow> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return None;
        }
        Some(ProfileRow {
            scenario: f[0].parse().ok()?,
            model: Model::parse(f[1])?,
            replication: f[2].parse().ok()?,
            bin_start: f[3].parse().ok()?,
            delay: f[4].parse().ok()?,
        })
    }
}

pub fn profiles_to_tsv(rows: &[ProfileRow]) -> String {
    let mut out = format!("{PROFILE_HEADER}\nscenario\tmodel\treplication\tbin_start\tmean_delay\n");
    for r in rows {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

pub fn profiles_from_tsv(text: &str) -> Vec<ProfileRow> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("scenario\t"))
        .filter_map(ProfileRow::from_line)
        .collect()
}

/// Output of one (scenario, model) work unit.
#[derive(Debug, Clone)]
pub struct UnitResult {
    pub record: ScenarioRecord,
    pub outcome: PlanOutcome,
    pub metrics: Vec<Option<SimMetrics>>,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteRun {
    pub table: ResultsTable,
    pub profiles: Vec<ProfileRow>,
    /// Units executed in this run (journal replays are not included).
    pub units: Vec<UnitResult>,
    pub replayed_rows: usize,
}

pub fn run_unit(
    record: &ScenarioRecord,
    model: Model,
    cfg: &SuiteConfig,
    table: &MovementTable,
    params: &ModelParams,
) -> UnitResult {
    let outcome = optimize(model, &record.scenario, table, params, &cfg.step2_options());
    let structural = outcome.violations.iter().any(|v| v.class == ViolationClass::Structural);
    let metrics = (0..cfg.replications)
        .map(|rep| {
            let plan = outcome.plan.as_ref().filter(|_| !structural)?;
            let seed = cfg.sim_seed(record.scenario.id, rep);
            run_simulation(plan, &record.scenario, table, params, seed, cfg.horizon, cfg.step).ok()
        })
        .collect();
    UnitResult {
        record: record.clone(),
        outcome,
        metrics,
    }
}

fn unit_rows(u: &UnitResult, cfg: &SuiteConfig) -> Vec<ResultRow> {
    let s = &u.record.scenario;
    u.metrics
        .iter()
        .enumerate()
        .map(|(rep, m)| {
            let rep = rep as u32;
            let mut status = u.outcome.status.clone();
            if u.outcome.plan.is_some() && m.is_none() {
                status = "sim-error".into();
            }
            ResultRow {
                scenario: s.id,
                model: u.outcome.model,
                replication: rep,
                seed: cfg.sim_seed(s.id, rep),
                status,
                solve_time: u.outcome.solve_time.as_secs_f64(),
                objective: u.outcome.objective,
                cycle: u.outcome.plan.as_ref().map(|p| p.cycle),
                violations: u.outcome.violations.len(),
                balance: s.labels.balance,
                turn: s.labels.turn,
                base: u.record.base,
                multiplier: u.record.multiplier,
                metrics: m.as_ref().map(|m| {
                    let mut movement = [0.0; 8];
                    for (k, d) in movement.iter_mut().enumerate() {
                        *d = m.delay_of(k + 1).unwrap_or(0.0);
                    }
                    RowMetrics {
                        delay: m.avg_delay,
                        queue: m.avg_queue,
                        movement,
                        counters: m.counters,
                    }
                }),
                message: u.outcome.message.clone().unwrap_or_default(),
            }
        })
        .collect()
}

fn unit_profiles(u: &UnitResult) -> Vec<ProfileRow> {
    u.metrics
        .iter()
        .enumerate()
        .filter_map(|(rep, m)| m.as_ref().map(|m| (rep, m)))
        .flat_map(|(rep, m)| {
            m.profile.iter().map(move |&(t, d)| ProfileRow {
                scenario: u.record.scenario.id,
                model: u.outcome.model,
                replication: rep as u32,
                bin_start: t,
                delay: d,
            })
        })
        .collect()
}

struct Journal {
    path: PathBuf,
    rows: BufWriter<File>,
    profiles: BufWriter<File>,
}

fn profile_journal(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".profiles");
    PathBuf::from(p)
}

fn read_journal(path: &Path) -> Result<(Vec<ResultRow>, Vec<ProfileRow>), SuiteError> {
    let io = |source| SuiteError::Journal {
        path: path.to_path_buf(),
        source,
    };
    if !path.exists() {
        return Ok((Vec::new(), Vec::new()));
    }
    let text = std::fs::read_to_string(path).map_err(io)?;
    // A torn final line from an interrupted append is dropped.
    let complete = &text[..text.rfind('\n').map_or(0, |k| k + 1)];
    let mut rows = Vec::new();
    for (n, line) in complete.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() || line.starts_with("scenario\t") {
            continue;
        }
        match ResultRow::from_line(line) {
            Ok(r) => rows.push(r),
            Err(reason) => {
                return Err(SuiteError::Corrupt {
                    path: path.to_path_buf(),
                    line: n + 1,
                    reason,
                })
            }
        }
    }
    let ppath = profile_journal(path);
    let profiles = match std::fs::read_to_string(&ppath) {
        Ok(t) => profiles_from_tsv(&t[..t.rfind('\n').map_or(0, |k| k + 1)]),
        Err(_) => Vec::new(),
    };
    Ok((rows, profiles))
}

/// Drops a partial last line so later appends start on a fresh line.
fn trim_torn_tail(path: &Path) -> std::io::Result<()> {
    let Ok(bytes) = std::fs::read(path) else {
        return Ok(());
    };
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |k| k + 1);
    OpenOptions::new().write(true).open(path)?.set_len(keep as u64)
}

impl Journal {
    fn open(path: &Path) -> Result<Journal, SuiteError> {
        let open = |p: &Path, header: &str| -> Result<BufWriter<File>, SuiteError> {
            trim_torn_tail(p).map_err(|source| SuiteError::Journal {
                path: p.to_path_buf(),
                source,
            })?;
            let fresh = !p.exists() || std::fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|source| SuiteError::Journal {
                    path: p.to_path_buf(),
                    source,
                })?;
            let mut w = BufWriter::new(f);
            if fresh {
                writeln!(w, "{header}").and_then(|_| w.flush()).map_err(|source| SuiteError::Journal {
                    path: p.to_path_buf(),
                    source,
                })?;
            }
            Ok(w)
        };
        Ok(Journal {
            path: path.to_path_buf(),
            rows: open(path, RESULTS_HEADER)?,
            profiles: open(&profile_journal(path), PROFILE_HEADER)?,
        })
    }

    fn append(&mut self, rows: &[ResultRow], profiles: &[ProfileRow]) -> Result<(), SuiteError> {
        let path = self.path.clone();
        let io = |source| SuiteError::Journal { path: path.clone(), source };
        // Profiles go first so a unit is only considered complete once both are on disk.
        for p in profiles {
            writeln!(self.profiles, "{}", p.to_line()).map_err(io)?;
        }
        self.profiles.flush().map_err(io)?;
        for r in rows {
            writeln!(self.rows, "{}", r.to_line()).map_err(io)?;
        }
        self.rows.flush().map_err(io)
    }
}

pub fn selected<'a>(cfg: &SuiteConfig, set: &'a ScenarioSet) -> &'a [ScenarioRecord] {
    let n = cfg.limit.unwrap_or(set.len()).min(set.len());
    &set.records[..n]
}

/// Runs every selected scenario under both models, resuming from `journal` when given.
pub fn run_suite(cfg: &SuiteConfig, set: &ScenarioSet, journal: Option<&Path>) -> Result<SuiteRun, SuiteError> {
    let table = build_topology();
    let params = default_params();
    let records = selected(cfg, set);
    let wanted: BTreeSet<u32> = records.iter().map(|r| r.scenario.id).collect();

    let (mut done_rows, mut done_profiles) = match journal {
        Some(p) => read_journal(p)?,
        None => (Vec::new(), Vec::new()),
    };
    done_rows.retain(|r| wanted.contains(&r.scenario) && r.replication < cfg.replications);
    let mut per_unit: BTreeMap<(u32, Model), BTreeSet<u32>> = BTreeMap::new();
    for r in &done_rows {
        per_unit.entry((r.scenario, r.model)).or_default().insert(r.replication);
    }
    let complete: BTreeSet<(u32, Model)> = per_unit
        .into_iter()
        .filter(|(_, reps)| reps.len() == cfg.replications as usize)
        .map(|(k, _)| k)
        .collect();
    // Keep only whole units and the first copy of each row.
    let mut seen = BTreeSet::new();
    done_rows.retain(|r| complete.contains(&(r.scenario, r.model)) && seen.insert(r.key()));
    let mut seen = BTreeSet::new();
    done_profiles.retain(|p| {
        complete.contains(&(p.scenario, p.model)) && seen.insert((p.scenario, p.model, p.replication, p.bin_start.to_bits()))
    });

    let work: Vec<(&ScenarioRecord, Model)> = records
        .iter()
        .flat_map(|r| Model::ALL.into_iter().map(move |m| (r, m)))
        .filter(|(r, m)| !complete.contains(&(r.scenario.id, *m)))
        .collect();

    let writer = match journal {
        Some(p) => Some(Mutex::new(Journal::open(p)?)),
        None => None,
    };
    let profile_ids: BTreeSet<u32> = cfg.profile_scenarios.iter().copied().collect();
    let run = || -> Result<Vec<(UnitResult, Vec<ResultRow>, Vec<ProfileRow>)>, SuiteError> {
        work.par_iter()
            .map(|&(record, model)| {
                let u = run_unit(record, model, cfg, &table, &params);
                let rows = unit_rows(&u, cfg);
                let profiles = if profile_ids.contains(&record.scenario.id) {
                    unit_profiles(&u)
                } else {
                    Vec::new()
                };
                if let Some(w) = &writer {
                    w.lock().expect("journal lock").append(&rows, &profiles)?;
                }
                Ok((u, rows, profiles))
            })
            .collect()
    };
    let results = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SuiteError::Pool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };

    let replayed_rows = done_rows.len();
    let mut out = SuiteRun {
        table: ResultsTable { rows: done_rows },
        profiles: done_profiles,
        units: Vec::new(),
        replayed_rows,
    };
    for (u, rows, profiles) in results {
        out.table.rows.extend(rows);
        out.profiles.extend(profiles);
        out.units.push(u);
    }
    out.table.sort();
    out.profiles.sort_by(|a, b| {
        (a.scenario, a.model, a.replication)
            .cmp(&(b.scenario, b.model, b.replication))
            .then(a.bin_start.total_cmp(&b.bin_start))
    });
    Ok(out)
}

pub fn write_run(run: &SuiteRun, out_dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("results.tsv"), run.table.to_tsv())?;
    std::fs::write(out_dir.join("profiles.tsv"), profiles_to_tsv(&run.profiles))
}
