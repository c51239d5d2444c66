use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::metrics::SimMetrics;
use super::network::{Signal, SimError, SimNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrivalMode {
    #[default]
    Poisson,
    /// Evenly spaced arrivals at the demand rate, first one half a headway in.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub horizon: f64,
    pub step: f64,
    pub arrivals: ArrivalMode,
    pub profile_bin: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            horizon: 3600.0,
            step: 1.0,
            arrivals: ArrivalMode::Poisson,
            profile_bin: 300.0,
        }
    }
}

struct Vehicle {
    route: usize,
    arrival: f64,
    delay: f64,
}

struct StageState {
    queue: VecDeque<usize>,
    /// (tick at which the vehicle reaches the stop line, vehicle)
    transit: VecDeque<(u64, usize)>,
    credit: f64,
    travel_ticks: u64,
}

struct Arrivals {
    next: f64,
    index: u64,
    exp: Option<Exp<f64>>,
    rng: ChaCha8Rng,
}

impl Arrivals {
    fn new(rate: f64, mode: ArrivalMode, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut a = Arrivals {
            next: f64::INFINITY,
            index: 0,
            exp: None,
            rng,
        };
        if rate > 0.0 {
            match mode {
                ArrivalMode::Poisson => {
                    let exp = Exp::new(rate).expect("positive rate");
                    a.next = exp.sample(&mut a.rng);
                    a.exp = Some(exp);
                }
                ArrivalMode::Uniform => a.next = 0.5 / rate,
            }
        }
        a
    }

    fn advance(&mut self, rate: f64) {
        self.index += 1;
        self.next = match &self.exp {
            Some(exp) => self.next + exp.sample(&mut self.rng),
            None => (self.index as f64 + 0.5) / rate,
        };
    }
}

fn effective_green(signal: &Signal, time: f64, lost: f64) -> bool {
    match *signal {
        Signal::AlwaysGreen => true,
        Signal::Fixed { cycle, start, green } => {
            let local = (time - start).rem_euclid(cycle);
            local >= lost && local < green
        }
    }
}

/// Runs the point-queue model over `[0, horizon)` and returns its metrics.
pub fn simulate(net: &SimNetwork, seed: u64, opts: &SimOptions) -> Result<SimMetrics, SimError> {
    let per_sec = (1.0 / opts.step).round();
    if !(opts.step > 0.0) || per_sec < 1.0 || (per_sec * opts.step - 1.0).abs() > 1e-9 {
        return Err(SimError::Step(opts.step));
    }
    if !(opts.horizon > 0.0) {
        return Err(SimError::Horizon);
    }
    let dt = opts.step;
    let ticks = (opts.horizon / dt).round() as u64;
    let routes = &net.routes;

    let mut vehicles: Vec<Vehicle> = Vec::new();
    let mut entries: Vec<VecDeque<usize>> = vec![VecDeque::new(); net.entries];
    let mut stages: Vec<Vec<StageState>> = routes
        .iter()
        .map(|r| {
            r.stages
                .iter()
                .map(|s| StageState {
                    queue: VecDeque::new(),
                    transit: VecDeque::new(),
                    credit: 0.0,
                    travel_ticks: (s.travel_time * per_sec).round() as u64,
                })
                .collect()
        })
        .collect();
    let mut arrivals: Vec<Arrivals> = routes
        .iter()
        .enumerate()
        .map(|(k, r)| Arrivals::new(r.demand, opts.arrivals, seed, k as u64))
        .collect();
    let mut discharged = 0u64;
    let mut queued_time = 0.0;

    for tick in 1..=ticks {
        let now = tick as f64 * dt;
        // Arrivals in (now - dt, now] join their approach queue.
        for (k, a) in arrivals.iter_mut().enumerate() {
            while a.next <= now && a.next < opts.horizon {
                let id = vehicles.len();
                vehicles.push(Vehicle {
                    route: k,
                    arrival: a.next,
                    delay: now - a.next,
                });
                entries[routes[k].entry].push_back(id);
                a.advance(routes[k].demand);
            }
        }
        // Entry into the first storage, blocked at the head of the line.
        for q in entries.iter_mut() {
            while let Some(&v) = q.front() {
                let r = vehicles[v].route;
                let first = &mut stages[r][0];
                if (first.queue.len() as f64) < routes[r].stages[0].storage {
                    first.queue.push_back(v);
                    q.pop_front();
                } else {
                    break;
                }
            }
        }
        for st in stages.iter_mut().flatten() {
            while st.transit.front().is_some_and(|&(t, _)| t <= tick) {
                let (_, v) = st.transit.pop_front().expect("front checked");
                st.queue.push_back(v);
            }
        }
        // Downstream stages first so released space is visible upstream in the same step.
        for (r, route) in routes.iter().enumerate() {
            for k in (0..route.stages.len()).rev() {
                let spec = &route.stages[k];
                if !effective_green(&spec.signal, now - dt, net.lost_time) {
                    stages[r][k].credit = 0.0;
                    continue;
                }
                stages[r][k].credit += spec.rate * dt;
                loop {
                    if stages[r][k].credit < 1.0 - 1e-12 || stages[r][k].queue.is_empty() {
                        break;
                    }
                    if k + 1 < route.stages.len() && stages[r][k + 1].queue.len() as f64 >= route.stages[k + 1].storage {
                        break;
                    }
                    let v = stages[r][k].queue.pop_front().expect("non-empty");
                    stages[r][k].credit -= 1.0;
                    if k + 1 < route.stages.len() {
                        let travel = stages[r][k + 1].travel_ticks;
                        stages[r][k + 1].transit.push_back((tick + travel, v));
                    } else {
                        discharged += 1;
                    }
                }
                let st = &mut stages[r][k];
                st.credit = st.credit.min(1.0);
            }
        }
        // Everyone still queued waited this step.
        let mut waiting = 0usize;
        for q in &entries {
            for &v in q {
                vehicles[v].delay += dt;
            }
            waiting += q.len();
        }
        for st in stages.iter().flatten() {
            for &v in &st.queue {
                vehicles[v].delay += dt;
            }
            waiting += st.queue.len();
        }
        queued_time += waiting as f64 * dt;
    }

    let denied: u64 = entries.iter().map(|q| q.len() as u64).sum();
    let generated = vehicles.len() as u64;
    let in_network = generated - discharged - denied;
    Ok(SimMetrics::collect(
        routes.iter().map(|r| r.movement).collect(),
        vehicles.iter().map(|v| (v.route, v.arrival, v.delay)),
        queued_time / opts.horizon,
        opts.profile_bin,
        opts.horizon,
        [generated, discharged, in_network, denied],
    ))
}
