use std::fmt::Write;

use crate::model::{MovementTable, SignalPlan};

/// Time-space data: green and band windows per movement, intersection and cycle.
///
/// Columns: `movement,intersection,kind,cycle,start,end` with times in seconds on the network clock.
pub fn time_space_csv(plan: &SignalPlan, table: &MovementTable, cycles: i64) -> String {
    let mut out = String::from("movement,intersection,kind,cycle,start,end\n");
    let c = plan.cycle;
    for m in table.movements() {
        let band = plan.bands.as_ref().and_then(|b| b.movements.get(&m.id)).filter(|b| b.has_band());
        for &l in &m.path {
            let (Some(g), Some(r), Some(th)) = (plan.green(l, m.id), plan.start(l, m.id), plan.offset(l)) else {
                continue;
            };
            for k in 0..cycles {
                let s = th + r + k * c;
                let _ = writeln!(out, "{},{l},green,{k},{s},{}", m.id, s + g);
                if let Some(b) = band {
                    let n = b.cycles.get(&l).copied().unwrap_or(0);
                    let w = b.lags.get(&l).copied().unwrap_or(0);
                    let bs = th + r + (k + n) * c + w;
                    let _ = writeln!(out, "{},{l},band,{k},{bs},{}", m.id, bs + b.width);
                }
            }
        }
    }
    out
}
