use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::results::{ResultRow, ResultsTable};
use super::suite::ProfileRow;
use crate::model::{BalanceClass, TurnClass};
use crate::pipeline::Model;
use crate::sim::Stat;

/// Reference values (benchmark, proposed) printed next to measured results.
pub const REFERENCE_DELAY: (f64, f64) = (61.61, 51.26);
pub const REFERENCE_QUEUE: (f64, f64) = (173.09, 117.82);
pub const REFERENCE_BALANCED_DELAY: (f64, f64) = (58.27, 47.79);
pub const REFERENCE_IMBALANCED_DELAY: (f64, f64) = (65.87, 55.80);
pub const REFERENCE_MOVEMENT_6: (f64, f64) = (219.81, 155.10);

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: String,
    pub scenarios: usize,
    /// Indexed by [proposed, benchmark].
    pub rows: [usize; 2],
    pub delay: [Stat; 2],
    pub queue: [Stat; 2],
}

impl GroupSummary {
    /// (benchmark - proposed) / benchmark for mean delay.
    pub fn delay_reduction(&self) -> f64 {
        reduction(self.delay[1].mean, self.delay[0].mean)
    }

    pub fn queue_reduction(&self) -> f64 {
        reduction(self.queue[1].mean, self.queue[0].mean)
    }
}

fn reduction(bench: f64, prop: f64) -> f64 {
    if bench == 0.0 { 0.0 } else { (bench - prop) / bench }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub base: u32,
    pub scenario: u32,
    pub multiplier: f64,
    pub delay: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub total_rows: usize,
    /// Scenarios where both models produced metrics for every replication present.
    pub paired_scenarios: usize,
    pub overall: GroupSummary,
    pub groups: Vec<GroupSummary>,
    /// (movement, [proposed, benchmark]) mean delay over paired rows.
    pub movements: Vec<(usize, [Stat; 2])>,
    pub sweeps: Vec<SweepPoint>,
    pub statuses: BTreeMap<(Model, String), usize>,
}

fn idx(m: Model) -> usize {
    match m {
        Model::Proposed => 0,
        Model::Benchmark => 1,
    }
}

/// Scenario ids where each model has at least one row and every row of both models carries metrics.
pub fn paired_scenarios(table: &ResultsTable) -> Vec<u32> {
    let mut state: BTreeMap<u32, [Option<bool>; 2]> = BTreeMap::new();
    for r in &table.rows {
        let e = state.entry(r.scenario).or_default();
        let slot = &mut e[idx(r.model)];
        *slot = Some(slot.unwrap_or(true) && r.metrics.is_some());
    }
    state
        .into_iter()
        .filter(|(_, s)| s[0] == Some(true) && s[1] == Some(true))
        .map(|(id, _)| id)
        .collect()
}

fn summarize(label: &str, rows: &[&ResultRow]) -> GroupSummary {
    let mut delay = [Vec::new(), Vec::new()];
    let mut queue = [Vec::new(), Vec::new()];
    let mut ids = std::collections::BTreeSet::new();
    for r in rows {
        if let Some(m) = &r.metrics {
            delay[idx(r.model)].push(m.delay);
            queue[idx(r.model)].push(m.queue);
            ids.insert(r.scenario);
        }
    }
    GroupSummary {
        label: label.to_string(),
        scenarios: ids.len(),
        rows: [delay[0].len(), delay[1].len()],
        delay: [Stat::of(&delay[0]), Stat::of(&delay[1])],
        queue: [Stat::of(&queue[0]), Stat::of(&queue[1])],
    }
}

pub fn build_report(table: &ResultsTable) -> Report {
    let paired: std::collections::BTreeSet<u32> = paired_scenarios(table).into_iter().collect();
    let rows: Vec<&ResultRow> = table.rows.iter().filter(|r| paired.contains(&r.scenario)).collect();
    let pick = |f: &dyn Fn(&ResultRow) -> bool| rows.iter().copied().filter(|r| f(r)).collect::<Vec<_>>();

    let mut groups = Vec::new();
    for b in [BalanceClass::Balanced, BalanceClass::Imbalanced] {
        groups.push(summarize(b.as_str(), &pick(&|r| r.balance == b)));
    }
    for t in [TurnClass::Equal, TurnClass::ThroughHeavy, TurnClass::RightHeavy] {
        groups.push(summarize(t.as_str(), &pick(&|r| r.turn == t)));
    }

    let movements = (1..=8)
        .map(|i| {
            let mut v = [Vec::new(), Vec::new()];
            for r in &rows {
                if let Some(m) = &r.metrics {
                    v[idx(r.model)].push(m.movement[i - 1]);
                }
            }
            (i, [Stat::of(&v[0]), Stat::of(&v[1])])
        })
        .collect();

    let mut per_scenario: BTreeMap<u32, (u32, f64, [Vec<f64>; 2])> = BTreeMap::new();
    for r in &rows {
        if let (Some(base), Some(m)) = (r.base, &r.metrics) {
            let e = per_scenario
                .entry(r.scenario)
                .or_insert_with(|| (base, r.multiplier, [Vec::new(), Vec::new()]));
            e.2[idx(r.model)].push(m.delay);
        }
    }
    let mut sweeps: Vec<SweepPoint> = per_scenario
        .into_iter()
        .map(|(scenario, (base, multiplier, d))| SweepPoint {
            base,
            scenario,
            multiplier,
            delay: [Stat::of(&d[0]).mean, Stat::of(&d[1]).mean],
        })
        .collect();
    sweeps.sort_by(|a, b| a.base.cmp(&b.base).then(a.multiplier.total_cmp(&b.multiplier)));

    let mut statuses = BTreeMap::new();
    for r in &table.rows {
        *statuses.entry((r.model, r.status.clone())).or_insert(0) += 1;
    }

    Report {
        total_rows: table.rows.len(),
        paired_scenarios: paired.len(),
        overall: summarize("overall", &rows),
        groups,
        movements,
        sweeps,
        statuses,
    }
}

fn group_tsv(groups: &[&GroupSummary]) -> String {
    let mut s = String::from(
        "group\tscenarios\trows_proposed\trows_benchmark\tdelay_proposed\tdelay_proposed_sd\tdelay_benchmark\tdelay_benchmark_sd\tqueue_proposed\tqueue_proposed_sd\tqueue_benchmark\tqueue_benchmark_sd\tdelay_reduction\tqueue_reduction\n",
    );
    for g in groups {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            g.label,
            g.scenarios,
            g.rows[0],
            g.rows[1],
            g.delay[0].mean,
            g.delay[0].std,
            g.delay[1].mean,
            g.delay[1].std,
            g.queue[0].mean,
            g.queue[0].std,
            g.queue[1].mean,
            g.queue[1].std,
            g.delay_reduction(),
            g.queue_reduction(),
        );
    }
    s
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

pub fn summary_text(r: &Report) -> String {
    let mut s = String::new();
    if r.total_rows == 0 {
        s.push_str("No result rows; nothing to report.\n");
        return s;
    }
    let o = &r.overall;
    let _ = writeln!(s, "rows: {}  paired scenarios: {}", r.total_rows, r.paired_scenarios);
    let _ = writeln!(
        s,
        "delay s/veh: benchmark {:.2} -> proposed {:.2} ({} reduction); reference {:.2} -> {:.2} ({})",
        o.delay[1].mean,
        o.delay[0].mean,
        pct(o.delay_reduction()),
        REFERENCE_DELAY.0,
        REFERENCE_DELAY.1,
        pct(reduction(REFERENCE_DELAY.0, REFERENCE_DELAY.1)),
    );
    let _ = writeln!(
        s,
        "queue veh:   benchmark {:.2} -> proposed {:.2} ({} reduction); reference {:.2} -> {:.2} ({})",
        o.queue[1].mean,
        o.queue[0].mean,
        pct(o.queue_reduction()),
        REFERENCE_QUEUE.0,
        REFERENCE_QUEUE.1,
        pct(reduction(REFERENCE_QUEUE.0, REFERENCE_QUEUE.1)),
    );
    for g in &r.groups {
        let reference = match g.label.as_str() {
            "balanced" => Some(REFERENCE_BALANCED_DELAY),
            "imbalanced" => Some(REFERENCE_IMBALANCED_DELAY),
            _ => None,
        };
        let _ = write!(
            s,
            "{:<14} delay {:.2} -> {:.2} ({})",
            g.label,
            g.delay[1].mean,
            g.delay[0].mean,
            pct(g.delay_reduction())
        );
        if let Some((b, p)) = reference {
            let _ = write!(s, "; reference {b:.2} -> {p:.2}");
        }
        s.push('\n');
    }
    for (i, [p, b]) in &r.movements {
        if i % 2 == 0 {
            let _ = write!(s, "movement {i}: delay {:.2} -> {:.2}", b.mean, p.mean);
            if *i == 6 {
                let _ = write!(s, "; reference {:.2} -> {:.2}", REFERENCE_MOVEMENT_6.0, REFERENCE_MOVEMENT_6.1);
            }
            s.push('\n');
        }
    }
    s.push_str("statuses:\n");
    for ((m, st), n) in &r.statuses {
        let _ = writeln!(s, "  {m} {st}: {n}");
    }
    s
}

/// Mean profile per (scenario, model, bin) over replications.
pub fn mean_profiles(rows: &[ProfileRow]) -> Vec<(u32, Model, f64, f64)> {
    let mut acc: BTreeMap<(u32, Model, u64), (f64, Vec<f64>)> = BTreeMap::new();
    for p in rows {
        acc.entry((p.scenario, p.model, p.bin_start.to_bits()))
            .or_insert_with(|| (p.bin_start, Vec::new()))
            .1
            .push(p.delay);
    }
    let mut out: Vec<_> = acc
        .into_iter()
        .map(|((s, m, _), (t, v))| (s, m, t, Stat::of(&v).mean))
        .collect();
    out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    out
}

pub fn emit_report(table: &ResultsTable, profiles: &[ProfileRow], out_dir: &Path) -> std::io::Result<Report> {
    std::fs::create_dir_all(out_dir)?;
    let r = build_report(table);
    std::fs::write(out_dir.join("summary.txt"), summary_text(&r))?;
    if r.total_rows == 0 {
        return Ok(r);
    }
    std::fs::write(out_dir.join("overall.tsv"), group_tsv(&[&r.overall]))?;
    std::fs::write(out_dir.join("groups.tsv"), group_tsv(&r.groups.iter().collect::<Vec<_>>()))?;

    let mut mv = String::from("movement\tdelay_proposed\tdelay_proposed_sd\tdelay_benchmark\tdelay_benchmark_sd\n");
    for (i, [p, b]) in &r.movements {
        let _ = writeln!(mv, "{i}\t{:.4}\t{:.4}\t{:.4}\t{:.4}", p.mean, p.std, b.mean, b.std);
    }
    std::fs::write(out_dir.join("movements.tsv"), mv)?;

    let mut sw = String::from("base\tscenario\tmultiplier\tdelay_proposed\tdelay_benchmark\n");
    for p in &r.sweeps {
        let _ = writeln!(sw, "{}\t{}\t{}\t{:.4}\t{:.4}", p.base, p.scenario, p.multiplier, p.delay[0], p.delay[1]);
    }
    std::fs::write(out_dir.join("sweeps.tsv"), sw)?;

    let mut pr = String::from("scenario\tmodel\tbin_start\tmean_delay\n");
    for (s, m, t, d) in mean_profiles(profiles) {
        let _ = writeln!(pr, "{s}\t{m}\t{t}\t{d:.4}");
    }
    std::fs::write(out_dir.join("profiles.tsv"), pr)?;
    Ok(r)
}
