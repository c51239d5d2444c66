use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::model::{
    classify_shares, BalanceClass, DemandScenario, Labels, ModelParams, MovementTable, Thresholds, TurnClass,
};
use crate::step1::solve_step1;

pub const SCENARIO_HEADER: &str = "# cfi-scenarios v1";
pub const CANONICAL_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Base,
    Share,
    Scaled,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Base => "base",
            ScenarioKind::Share => "share",
            ScenarioKind::Scaled => "scaled",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "base" => Some(ScenarioKind::Base),
            "share" => Some(ScenarioKind::Share),
            "scaled" => Some(ScenarioKind::Scaled),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRecord {
    pub scenario: DemandScenario,
    pub kind: ScenarioKind,
    /// Base scenario id for base and scaled records.
    pub base: Option<u32>,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioSet {
    pub records: Vec<ScenarioRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub total_demand: f64,
    /// Share scenarios at the fixed total, base vectors included.
    pub share_count: usize,
    pub scaled_count: usize,
    pub min_share: f64,
    pub max_share: f64,
    pub thresholds: Thresholds,
    pub multipliers: Vec<f64>,
    pub max_draws: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: CANONICAL_SEED,
            total_demand: 4000.0,
            share_count: 281,
            scaled_count: 41,
            min_share: 0.03,
            max_share: 0.34,
            thresholds: Thresholds::default(),
            multipliers: vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.1, 1.2, 1.3],
            max_draws: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("could not fill cell {balance}/{turn}: {missing} scenarios short")]
    Quota {
        balance: BalanceClass,
        turn: TurnClass,
        missing: usize,
    },
    #[error("base scenario {base} has only {feasible} feasible multipliers, {needed} needed")]
    Multipliers { base: u32, feasible: usize, needed: usize },
    #[error("invalid base vector {0}")]
    Base(u32),
}

/// Hand-built base vectors: ids 1, 4, 7 equal; 2, 5, 8 through-heavy; 3, 6, 9, 10 right-heavy.
pub const BASE_SHARES: [[f64; 8]; 10] = [
    [0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125],
    [0.20, 0.05, 0.20, 0.05, 0.20, 0.05, 0.20, 0.05],
    [0.05, 0.20, 0.05, 0.20, 0.05, 0.20, 0.05, 0.20],
    [0.15, 0.15, 0.10, 0.10, 0.15, 0.15, 0.10, 0.10],
    [0.18, 0.08, 0.16, 0.08, 0.18, 0.08, 0.16, 0.08],
    [0.08, 0.17, 0.08, 0.17, 0.08, 0.17, 0.08, 0.17],
    [0.10, 0.15, 0.15, 0.10, 0.10, 0.15, 0.15, 0.10],
    [0.22, 0.06, 0.14, 0.06, 0.22, 0.06, 0.14, 0.10],
    [0.05, 0.25, 0.10, 0.10, 0.10, 0.10, 0.10, 0.20],
    [0.06, 0.24, 0.06, 0.14, 0.06, 0.24, 0.06, 0.14],
];

const CELLS: [(BalanceClass, TurnClass); 6] = [
    (BalanceClass::Balanced, TurnClass::Equal),
    (BalanceClass::Balanced, TurnClass::ThroughHeavy),
    (BalanceClass::Balanced, TurnClass::RightHeavy),
    (BalanceClass::Imbalanced, TurnClass::Equal),
    (BalanceClass::Imbalanced, TurnClass::ThroughHeavy),
    (BalanceClass::Imbalanced, TurnClass::RightHeavy),
];

fn cell_index(l: Labels) -> usize {
    CELLS
        .iter()
        .position(|&(b, t)| b == l.balance && t == l.turn)
        .expect("every label pair is a cell")
}

/// Rounds to 1e-4 and pushes the rounding residue onto the largest share.
fn tidy(mut shares: [f64; 8]) -> [f64; 8] {
    for s in shares.iter_mut() {
        *s = (*s * 1e4).round() / 1e4;
    }
    let sum: f64 = shares.iter().sum();
    let k = (0..8)
        .max_by(|&a, &b| shares[a].total_cmp(&shares[b]).then(b.cmp(&a)))
        .expect("eight shares");
    shares[k] = ((shares[k] + 1.0 - sum) * 1e6).round() / 1e6;
    shares
}

/// One rejection-sampler draw: exponential weights, clamp, renormalize, reject out of range.
fn draw(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Option<[f64; 8]> {
    let mut w = [0.0f64; 8];
    for x in w.iter_mut() {
        *x = Exp1.sample(rng);
    }
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x = (*x / total).clamp(cfg.min_share, cfg.max_share);
    }
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    let w = tidy(w);
    let ok = w.iter().all(|&x| x >= cfg.min_share - 1e-12 && x <= cfg.max_share + 1e-12);
    ok.then_some(w)
}

fn quotas(n: usize) -> [usize; 6] {
    let mut q = [n / 6; 6];
    for slot in q.iter_mut().take(n % 6) {
        *slot += 1;
    }
    q
}

pub fn generate_scenarios(
    cfg: &GeneratorConfig,
    table: &MovementTable,
    params: &ModelParams,
) -> Result<ScenarioSet, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    let mut remaining = quotas(cfg.share_count);

    for (k, shares) in BASE_SHARES.iter().enumerate() {
        let id = k as u32 + 1;
        let s = DemandScenario::new(id, cfg.total_demand, *shares)
            .map_err(|_| GenerateError::Base(id))?
            .with_thresholds(cfg.thresholds);
        let c = cell_index(s.labels);
        remaining[c] = remaining[c].saturating_sub(1);
        records.push(ScenarioRecord {
            scenario: s,
            kind: ScenarioKind::Base,
            base: Some(id),
            multiplier: 1.0,
        });
    }

    let mut draws = 0u64;
    while remaining.iter().any(|&r| r > 0) {
        if draws >= cfg.max_draws {
            let c = remaining.iter().position(|&r| r > 0).expect("some cell open");
            return Err(GenerateError::Quota {
                balance: CELLS[c].0,
                turn: CELLS[c].1,
                missing: remaining[c],
            });
        }
        draws += 1;
        let Some(shares) = draw(&mut rng, cfg) else { continue };
        let labels = classify_shares(&shares, cfg.thresholds);
        let c = cell_index(labels);
        if remaining[c] == 0 {
            continue;
        }
        remaining[c] -= 1;
        let id = records.len() as u32 + 1;
        let s = DemandScenario::new(id, cfg.total_demand, shares)
            .expect("tidy shares sum to one")
            .with_thresholds(cfg.thresholds);
        records.push(ScenarioRecord {
            scenario: s,
            kind: ScenarioKind::Share,
            base: None,
            multiplier: 1.0,
        });
    }

    let bases = BASE_SHARES.len();
    for b in 0..bases {
        let needed = cfg.scaled_count / bases + usize::from(b < cfg.scaled_count % bases);
        let base = records[b].scenario.clone();
        let mut feasible = Vec::new();
        let mut sorted = cfg.multipliers.clone();
        sorted.sort_by(f64::total_cmp);
        for &m in &sorted {
            if solve_step1(&base.scaled(0, m), table, params).is_err() {
                break;
            }
            feasible.push(m);
        }
        if feasible.len() < needed {
            return Err(GenerateError::Multipliers {
                base: base.id,
                feasible: feasible.len(),
                needed,
            });
        }
        feasible.shuffle(&mut rng);
        let mut chosen: Vec<f64> = feasible.into_iter().take(needed).collect();
        chosen.sort_by(f64::total_cmp);
        for m in chosen {
            let id = records.len() as u32 + 1;
            records.push(ScenarioRecord {
                scenario: base.scaled(id, m),
                kind: ScenarioKind::Scaled,
                base: Some(base.id),
                multiplier: m,
            });
        }
    }
    Ok(ScenarioSet { records })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioParseError {
    #[error("missing header `{SCENARIO_HEADER}`")]
    Header,
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&ScenarioRecord> {
        self.records.iter().find(|r| r.scenario.id == id)
    }

    pub fn scenarios(&self) -> impl Iterator<Item = &DemandScenario> {
        self.records.iter().map(|r| &r.scenario)
    }

    pub fn count_by_cell(&self) -> BTreeMap<(String, String), usize> {
        let mut m = BTreeMap::new();
        for r in &self.records {
            let l = r.scenario.labels;
            *m.entry((l.balance.to_string(), l.turn.to_string())).or_insert(0) += 1;
        }
        m
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(SCENARIO_HEADER);
        out.push('\n');
        out.push_str("id\tkind\tbase\tmultiplier\ttotal_demand");
        for i in 1..=8 {
            let _ = write!(out, "\ts{i}");
        }
        out.push_str("\tbalance\tturn\n");
        for r in &self.records {
            let s = &r.scenario;
            let base = r.base.map(|b| b.to_string()).unwrap_or_else(|| "-".into());
            let _ = write!(out, "{}\t{}\t{}\t{}\t{}", s.id, r.kind.as_str(), base, r.multiplier, s.total_demand);
            for x in s.shares {
                let _ = write!(out, "\t{x:.6}");
            }
            let _ = writeln!(out, "\t{}\t{}", s.labels.balance, s.labels.turn);
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<ScenarioSet, ScenarioParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == SCENARIO_HEADER => {}
            _ => return Err(ScenarioParseError::Header),
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            let line_no = n + 1;
            let err = |reason: &str| ScenarioParseError::Line {
                line: line_no,
                reason: reason.to_string(),
            };
            if line.trim().is_empty() || line.starts_with("id\t") || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 15 {
                return Err(err("expected 15 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            let id: u32 = f[0].parse().map_err(|_| err("bad id"))?;
            let kind = ScenarioKind::parse(f[1]).ok_or_else(|| err("bad kind"))?;
            let base = if f[2] == "-" {
                None
            } else {
                Some(f[2].parse().map_err(|_| err("bad base"))?)
            };
            let multiplier = num(f[3])?;
            let total = num(f[4])?;
            let mut shares = [0.0; 8];
            for k in 0..8 {
                shares[k] = num(f[5 + k])?;
            }
            let balance = BalanceClass::parse(f[13]).ok_or_else(|| err("bad balance label"))?;
            let turn = TurnClass::parse(f[14]).ok_or_else(|| err("bad turn label"))?;
            let mut scenario = DemandScenario::new(id, total, shares).map_err(|e| err(&e.to_string()))?;
            scenario.labels = Labels { balance, turn };
            records.push(ScenarioRecord {
                scenario,
                kind,
                base,
                multiplier,
            });
        }
        Ok(ScenarioSet { records })
    }
}
