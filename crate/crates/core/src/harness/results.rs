use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{BalanceClass, TurnClass};
use crate::pipeline::Model;
use crate::sim::Counters;

pub const RESULTS_HEADER: &str = "# cfi-results v1";

pub const COLUMNS: [&str; 28] = [
    "scenario", "model", "replication", "seed", "status", "solve_time", "objective", "cycle", "violations",
    "balance", "turn", "base", "multiplier", "delay", "queue", "generated", "discharged", "in_network", "denied",
    "d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "message",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RowMetrics {
    pub delay: f64,
    pub queue: f64,
    /// Mean delay per movement 1..=8.
    pub movement: [f64; 8],
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: u32,
    pub model: Model,
    pub replication: u32,
    pub seed: u64,
    pub status: String,
    pub solve_time: f64,
    pub objective: Option<f64>,
    pub cycle: Option<i64>,
    pub violations: usize,
    pub balance: BalanceClass,
    pub turn: TurnClass,
    pub base: Option<u32>,
    pub multiplier: f64,
    pub metrics: Option<RowMetrics>,
    pub message: String,
}

impl ResultRow {
    pub fn key(&self) -> (u32, Model, u32) {
        (self.scenario, self.model, self.replication)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResultsParseError {
    #[error("missing header `{RESULTS_HEADER}`")]
    Header,
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

fn column_line() -> String {
    COLUMNS.join("\t")
}

impl ResultRow {
    /// One tab-separated line without the trailing newline. Floats use round-trip formatting.
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.scenario,
            self.model,
            self.replication,
            self.seed,
            self.status,
            self.solve_time,
            opt(self.objective),
            opt(self.cycle),
            self.violations,
            self.balance,
            self.turn,
            opt(self.base),
            self.multiplier,
        );
        match &self.metrics {
            Some(m) => {
                let c = m.counters;
                let _ = write!(
                    s,
                    "\t{}\t{}\t{}\t{}\t{}\t{}",
                    m.delay, m.queue, c.generated, c.discharged, c.in_network, c.denied
                );
                for d in m.movement {
                    let _ = write!(s, "\t{d}");
                }
            }
            None => s.push_str(&"\tNA".repeat(14)),
        }
        let msg = self.message.replace(['\t', '\n'], " ");
        let _ = write!(s, "\t{}", if msg.is_empty() { "-" } else { &msg });
        s
    }

    pub fn from_line(line: &str) -> Result<ResultRow, String> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != COLUMNS.len() {
            return Err(format!("expected {} fields, found {}", COLUMNS.len(), f.len()));
        }
        fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {what} `{s}`"))
        }
        fn maybe<T: std::str::FromStr>(s: &str, what: &str) -> Result<Option<T>, String> {
            if s == "NA" { Ok(None) } else { num(s, what).map(Some) }
        }
        let metrics = if f[13] == "NA" {
            None
        } else {
            let mut movement = [0.0; 8];
            for (k, d) in movement.iter_mut().enumerate() {
                *d = num(f[19 + k], "movement delay")?;
            }
            Some(RowMetrics {
                delay: num(f[13], "delay")?,
                queue: num(f[14], "queue")?,
                movement,
                counters: Counters {
                    generated: num(f[15], "generated")?,
                    discharged: num(f[16], "discharged")?,
                    in_network: num(f[17], "in_network")?,
                    denied: num(f[18], "denied")?,
                },
            })
        };
        Ok(ResultRow {
            scenario: num(f[0], "scenario")?,
            model: Model::parse(f[1]).ok_or("bad model")?,
            replication: num(f[2], "replication")?,
            seed: num(f[3], "seed")?,
            status: f[4].to_string(),
            solve_time: num(f[5], "solve_time")?,
            objective: maybe(f[6], "objective")?,
            cycle: maybe(f[7], "cycle")?,
            violations: num(f[8], "violations")?,
            balance: BalanceClass::parse(f[9]).ok_or("bad balance")?,
            turn: TurnClass::parse(f[10]).ok_or("bad turn")?,
            base: maybe(f[11], "base")?,
            multiplier: num(f[12], "multiplier")?,
            metrics,
            message: if f[27] == "-" { String::new() } else { f[27].to_string() },
        })
    }
}

impl ResultsTable {
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| r.key());
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("{RESULTS_HEADER}\n{}\n", column_line());
        for r in &self.rows {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<ResultsTable, ResultsParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == RESULTS_HEADER => {}
            _ => return Err(ResultsParseError::Header),
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() || line.starts_with("scenario\t") {
                continue;
            }
            rows.push(ResultRow::from_line(line).map_err(|reason| ResultsParseError::Line { line: n + 1, reason })?);
        }
        Ok(ResultsTable { rows })
    }
}
