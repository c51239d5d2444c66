use thiserror::Error;

use super::topology::{MovementKind, MovementTable, MAIN};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Saturation flow per lane, veh/s.
    pub saturation: f64,
    /// Start-up lost time per phase, s.
    pub lost_time: f64,
    pub cycle_min: f64,
    pub cycle_max: f64,
    pub green_min: f64,
    pub green_max: f64,
    /// Minimum effective bandwidth, s.
    pub min_band: f64,
    pub big_m: f64,
    pub alpha_single_lane: f64,
    pub alpha_two_lane: f64,
    /// Treat the crossover-to-exit pair of right turns as a coordinated band pair.
    pub coordinate_sub_pair: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        default_params()
    }
}

pub fn default_params() -> ModelParams {
    ModelParams {
        saturation: 0.75,
        lost_time: 3.0,
        cycle_min: 40.0,
        cycle_max: 150.0,
        green_min: 10.0,
        green_max: 140.0,
        min_band: 5.0,
        big_m: 10_000.0,
        alpha_single_lane: 1.0,
        alpha_two_lane: 0.65,
        coordinate_sub_pair: true,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("parameter {0} out of range")]
    OutOfRange(&'static str),
}

impl ModelParams {
    /// Lane-use factor of movement `i` at intersection `l`.
    ///
    /// Through movements use two lanes at the main intersection; right turns stay in
    /// their single bay lane up to the main stop line; all exits are two-lane.
    pub fn alpha(&self, table: &MovementTable, l: usize, i: usize) -> f64 {
        let m = table.movement(i);
        if l == MAIN {
            match m.kind {
                MovementKind::Through => self.alpha_two_lane,
                MovementKind::Right => self.alpha_single_lane,
            }
        } else if l == m.first() {
            self.alpha_single_lane
        } else {
            self.alpha_two_lane
        }
    }

    pub fn s(&self, _l: usize, _i: usize) -> f64 {
        self.saturation
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let checks = [
            (self.saturation > 0.0, "saturation"),
            (self.lost_time >= 0.0, "lost_time"),
            (self.cycle_min > 0.0 && self.cycle_min < self.cycle_max, "cycle bounds"),
            (self.green_min < self.green_max && self.green_min > 0.0, "green bounds"),
            (self.min_band > 0.0, "min_band"),
            (
                self.alpha_single_lane > 0.0
                    && self.alpha_single_lane <= 1.0
                    && self.alpha_two_lane > 0.0
                    && self.alpha_two_lane <= 1.0,
                "alpha",
            ),
            (self.big_m >= 10.0 * self.cycle_max * 3.0, "big_m"),
        ];
        for (ok, name) in checks {
            if !ok {
                return Err(ParamsError::OutOfRange(name));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::topology::build_topology;

    #[test]
    fn table_values() {
        let t = build_topology();
        let p = default_params();
        assert_eq!(p.alpha(&t, 5, 1), 0.65);
        assert_eq!(p.alpha(&t, 5, 2), 1.0);
        assert_eq!(p.alpha(&t, 1, 2), 1.0);
        assert_eq!(p.alpha(&t, 2, 2), 0.65);
        assert_eq!(p.s(3, 4), 0.75);
        assert!(p.validate().is_ok());
    }
}
