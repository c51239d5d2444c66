//! Line-based text format for signal plans. All values are integer seconds.
//!
//! ```text
//! cfi-plan v1
//! cycle 90
//! offset <l> <theta>
//! green <l> <i> <g>
//! start <l> <i> <r>
//! band <i> <width> <case>...
//! lag <l> <i> <w> <n>
//! end
//! ```

use std::fmt::Write;

use thiserror::Error;

use super::plan::{BandDiagnostics, MovementBand, SignalPlan};

pub const PLAN_HEADER: &str = "cfi-plan v1";

#[derive(Debug, Error, PartialEq)]
pub enum PlanParseError {
    #[error("missing or unsupported header (expected `{PLAN_HEADER}`)")]
    Header,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `end` line")]
    Truncated,
}

pub fn plan_to_text(plan: &SignalPlan) -> String {
    let mut out = String::new();
    out.push_str(PLAN_HEADER);
    out.push('\n');
    let _ = writeln!(out, "cycle {}", plan.cycle);
    for (l, th) in &plan.offsets {
        let _ = writeln!(out, "offset {l} {th}");
    }
    for ((l, i), g) in &plan.greens {
        let _ = writeln!(out, "green {l} {i} {g}");
    }
    for ((l, i), r) in &plan.starts {
        let _ = writeln!(out, "start {l} {i} {r}");
    }
    if let Some(b) = &plan.bands {
        for (i, rec) in &b.movements {
            let _ = write!(out, "band {i} {}", rec.width);
            for k in &rec.cases {
                let _ = write!(out, " {k}");
            }
            out.push('\n');
            for (l, w) in &rec.lags {
                let n = rec.cycles.get(l).copied().unwrap_or(0);
                let _ = writeln!(out, "lag {l} {i} {w} {n}");
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn plan_from_text(text: &str) -> Result<SignalPlan, PlanParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    match lines.next() {
        Some((_, h)) if h.trim() == PLAN_HEADER => {}
        _ => return Err(PlanParseError::Header),
    }
    let mut plan = SignalPlan::default();
    let mut bands = BandDiagnostics::default();
    let mut saw_band = false;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let err = |message: String| PlanParseError::Line { line: line_no, message };
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let nums: Vec<i64> = parts
            .map(|p| p.parse::<i64>().map_err(|_| err(format!("`{p}` is not an integer"))))
            .collect::<Result<_, _>>()?;
        let want = |n: usize| -> Result<(), PlanParseError> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(err(format!("`{key}` expects {n} values, got {}", nums.len())))
            }
        };
        let idx_of = |v: i64| -> Result<usize, PlanParseError> {
            usize::try_from(v).map_err(|_| err(format!("negative index {v}")))
        };
        match key {
            "cycle" => {
                want(1)?;
                plan.cycle = nums[0];
            }
            "offset" => {
                want(2)?;
                plan.offsets.insert(idx_of(nums[0])?, nums[1]);
            }
            "green" => {
                want(3)?;
                plan.greens.insert((idx_of(nums[0])?, idx_of(nums[1])?), nums[2]);
            }
            "start" => {
                want(3)?;
                plan.starts.insert((idx_of(nums[0])?, idx_of(nums[1])?), nums[2]);
            }
            "band" => {
                if nums.len() < 2 {
                    return Err(err("`band` expects a movement and a width".into()));
                }
                saw_band = true;
                let rec = bands.movements.entry(idx_of(nums[0])?).or_insert_with(MovementBand::default);
                rec.width = nums[1];
                rec.cases = nums[2..]
                    .iter()
                    .map(|&k| u8::try_from(k).map_err(|_| err(format!("bad case {k}"))))
                    .collect::<Result<_, _>>()?;
            }
            "lag" => {
                want(4)?;
                saw_band = true;
                let rec = bands.movements.entry(idx_of(nums[1])?).or_insert_with(MovementBand::default);
                let l = idx_of(nums[0])?;
                rec.lags.insert(l, nums[2]);
                rec.cycles.insert(l, nums[3]);
            }
            "end" => {
                if saw_band {
                    plan.bands = Some(bands);
                }
                return Ok(plan);
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    Err(PlanParseError::Truncated)
}
