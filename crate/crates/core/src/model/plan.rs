use std::collections::BTreeMap;

use super::topology::{MovementTable, Phase, INTERSECTIONS};

/// Band record of one movement. A movement either has a band on all of its pairs or none.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MovementBand {
    /// Bandwidth in seconds (0 when there is no band).
    pub width: i64,
    /// Lag between green start and band start, per intersection on the path.
    pub lags: BTreeMap<usize, i64>,
    /// Cycle index (0 or 1) per intersection on the path.
    pub cycles: BTreeMap<usize, i64>,
    /// Selected case (1..=6) per coordinated pair, in pair order.
    pub cases: Vec<u8>,
}

impl MovementBand {
    pub fn has_band(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|&k| k != 6)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandDiagnostics {
    pub movements: BTreeMap<usize, MovementBand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignalPlan {
    pub cycle: i64,
    /// Green seconds keyed by (intersection, movement).
    pub greens: BTreeMap<(usize, usize), i64>,
    /// Start of the movement's green phase within the local cycle, keyed by (intersection, movement).
    pub starts: BTreeMap<(usize, usize), i64>,
    pub offsets: BTreeMap<usize, i64>,
    pub bands: Option<BandDiagnostics>,
}

impl SignalPlan {
    /// Builds a plan from per-intersection phase greens `[A, B]` (indexed by intersection - 1).
    /// Phase A starts at 0 and phase B right after it.
    pub fn from_phases(table: &MovementTable, cycle: i64, phase_greens: &[[i64; 2]; 5], offsets: &[i64; 5]) -> Self {
        let mut plan = SignalPlan {
            cycle,
            ..SignalPlan::default()
        };
        for l in INTERSECTIONS {
            plan.offsets.insert(l, offsets[l - 1]);
            for phase in [Phase::A, Phase::B] {
                let g = phase_greens[l - 1][phase.index()];
                let r = match phase {
                    Phase::A => 0,
                    Phase::B => phase_greens[l - 1][0],
                };
                for &i in table.group(l, phase) {
                    plan.greens.insert((l, i), g);
                    plan.starts.insert((l, i), r);
                }
            }
        }
        plan
    }

    pub fn green(&self, l: usize, i: usize) -> Option<i64> {
        self.greens.get(&(l, i)).copied()
    }

    pub fn start(&self, l: usize, i: usize) -> Option<i64> {
        self.starts.get(&(l, i)).copied()
    }

    pub fn offset(&self, l: usize) -> Option<i64> {
        self.offsets.get(&l).copied()
    }

    /// Green of a phase, read from its first movement.
    pub fn phase_green(&self, table: &MovementTable, l: usize, phase: Phase) -> Option<i64> {
        table.group(l, phase).first().and_then(|&i| self.green(l, i))
    }

    pub fn phase_start(&self, table: &MovementTable, l: usize, phase: Phase) -> Option<i64> {
        table.group(l, phase).first().and_then(|&i| self.start(l, i))
    }

    /// Phase greens `[A, B]` per intersection, if the plan is complete.
    pub fn phase_greens(&self, table: &MovementTable) -> Option<[[i64; 2]; 5]> {
        let mut out = [[0; 2]; 5];
        for l in INTERSECTIONS {
            for phase in [Phase::A, Phase::B] {
                out[l - 1][phase.index()] = self.phase_green(table, l, phase)?;
            }
        }
        Some(out)
    }

    /// Whether movement `i`'s green at `l` is active at time `t` (seconds from the network clock origin).
    pub fn is_green(&self, l: usize, i: usize, t: i64) -> bool {
        let (Some(g), Some(r), Some(theta)) = (self.green(l, i), self.start(l, i), self.offset(l)) else {
            return false;
        };
        if self.cycle <= 0 {
            return false;
        }
        let local = (t - theta - r).rem_euclid(self.cycle);
        local < g
    }
}
