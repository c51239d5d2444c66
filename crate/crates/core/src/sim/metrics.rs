use super::network::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub generated: u64,
    pub discharged: u64,
    pub in_network: u64,
    pub denied: u64,
}

impl Counters {
    pub fn conserved(&self) -> bool {
        self.generated == self.discharged + self.in_network + self.denied
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub scenario: Option<u32>,
    /// s/veh over all generated vehicles.
    pub avg_delay: f64,
    /// Time-average number of queued vehicles (entry links included).
    pub avg_queue: f64,
    /// (movement, mean delay) in route order.
    pub movement_delay: Vec<(usize, f64)>,
    /// (bin start, mean delay of vehicles arriving in the bin).
    pub profile: Vec<(f64, f64)>,
    pub counters: Counters,
}

fn mean(sum: f64, n: u64) -> f64 {
    if n == 0 { 0.0 } else { sum / n as f64 }
}

impl SimMetrics {
    pub(crate) fn collect(
        movements: Vec<usize>,
        vehicles: impl Iterator<Item = (usize, f64, f64)>,
        avg_queue: f64,
        bin: f64,
        horizon: f64,
        [generated, discharged, in_network, denied]: [u64; 4],
    ) -> Self {
        let bins = (horizon / bin).ceil().max(1.0) as usize;
        let mut per_route = vec![(0.0, 0u64); movements.len()];
        let mut per_bin = vec![(0.0, 0u64); bins];
        let mut total = 0.0;
        for (route, arrival, delay) in vehicles {
            total += delay;
            per_route[route].0 += delay;
            per_route[route].1 += 1;
            let b = ((arrival / bin) as usize).min(bins - 1);
            per_bin[b].0 += delay;
            per_bin[b].1 += 1;
        }
        SimMetrics {
            scenario: None,
            avg_delay: mean(total, generated),
            avg_queue,
            movement_delay: movements
                .into_iter()
                .zip(&per_route)
                .map(|(m, &(s, n))| (m, mean(s, n)))
                .collect(),
            profile: per_bin
                .iter()
                .enumerate()
                .map(|(k, &(s, n))| (k as f64 * bin, mean(s, n)))
                .collect(),
            counters: Counters {
                generated,
                discharged,
                in_network,
                denied,
            },
        }
    }

    pub fn delay_of(&self, movement: usize) -> Option<f64> {
        self.movement_delay.iter().find(|(m, _)| *m == movement).map(|&(_, d)| d)
    }

    /// Tab-separated `bin_start  mean_delay` lines.
    pub fn profile_text(&self) -> String {
        let mut out = String::from("bin_start\tmean_delay\n");
        for (t, d) in &self.profile {
            out.push_str(&format!("{t}\t{d:.4}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        if xs.is_empty() {
            return Stat::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, std }
    }

    pub fn cv(&self) -> f64 {
        if self.mean == 0.0 { 0.0 } else { self.std / self.mean }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub scenario: Option<u32>,
    pub replications: usize,
    pub delay: Stat,
    pub queue: Stat,
    pub movement_delay: Vec<(usize, Stat)>,
    pub denied: Stat,
}

pub fn aggregate(metrics: &[SimMetrics]) -> Result<SummaryStats, SimError> {
    let first = metrics
        .first()
        .ok_or_else(|| SimError::Aggregate("no replications".into()))?;
    if metrics.iter().any(|m| m.scenario != first.scenario) {
        return Err(SimError::Aggregate("replications come from different scenarios".into()));
    }
    let layout: Vec<usize> = first.movement_delay.iter().map(|&(m, _)| m).collect();
    if metrics
        .iter()
        .any(|m| m.movement_delay.iter().map(|&(k, _)| k).ne(layout.iter().copied()))
    {
        return Err(SimError::Aggregate("replications use different networks".into()));
    }
    let col = |f: &dyn Fn(&SimMetrics) -> f64| Stat::of(&metrics.iter().map(f).collect::<Vec<_>>());
    Ok(SummaryStats {
        scenario: first.scenario,
        replications: metrics.len(),
        delay: col(&|m| m.avg_delay),
        queue: col(&|m| m.avg_queue),
        movement_delay: layout
            .iter()
            .enumerate()
            .map(|(k, &mv)| (mv, col(&|m| m.movement_delay[k].1)))
            .collect(),
        denied: col(&|m| m.counters.denied as f64),
    })
}
