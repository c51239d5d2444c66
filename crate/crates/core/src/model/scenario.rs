use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BalanceClass {
    Balanced,
    Imbalanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurnClass {
    Equal,
    ThroughHeavy,
    RightHeavy,
}

impl BalanceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BalanceClass::Balanced => "balanced",
            BalanceClass::Imbalanced => "imbalanced",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "balanced" => Some(BalanceClass::Balanced),
            "imbalanced" => Some(BalanceClass::Imbalanced),
            _ => None,
        }
    }
}

impl TurnClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TurnClass::Equal => "equal",
            TurnClass::ThroughHeavy => "through-heavy",
            TurnClass::RightHeavy => "right-heavy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "equal" => Some(TurnClass::Equal),
            "through-heavy" => Some(TurnClass::ThroughHeavy),
            "right-heavy" => Some(TurnClass::RightHeavy),
            _ => None,
        }
    }
}

impl fmt::Display for BalanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for TurnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Labels {
    pub balance: BalanceClass,
    pub turn: TurnClass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub balance: f64,
    pub turn: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { balance: 0.10, turn: 0.10 }
    }
}

const PHASE_A_MOVEMENTS: [usize; 4] = [1, 2, 5, 6];

pub fn classify_shares(shares: &[f64; 8], th: Thresholds) -> Labels {
    let a: f64 = PHASE_A_MOVEMENTS.iter().map(|&i| shares[i - 1]).sum();
    let b: f64 = shares.iter().sum::<f64>() - a;
    let through: f64 = [1, 3, 5, 7].iter().map(|&i| shares[i - 1]).sum();
    let right: f64 = [2, 4, 6, 8].iter().map(|&i| shares[i - 1]).sum();
    // Small epsilon so decimal inputs sitting exactly on the threshold classify as inside.
    let eps = 1e-12;
    let balance = if (a - b).abs() <= th.balance + eps {
        BalanceClass::Balanced
    } else {
        BalanceClass::Imbalanced
    };
    let turn = if (through - right).abs() <= th.turn + eps {
        TurnClass::Equal
    } else if through > right {
        TurnClass::ThroughHeavy
    } else {
        TurnClass::RightHeavy
    };
    Labels { balance, turn }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("shares sum to {0}, expected 1")]
    ShareSum(f64),
    #[error("share of movement {0} must be positive and finite")]
    BadShare(usize),
    #[error("total demand must be non-negative and finite")]
    BadTotal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandScenario {
    pub id: u32,
    /// veh/h over all movements.
    pub total_demand: f64,
    pub shares: [f64; 8],
    pub labels: Labels,
}

impl DemandScenario {
    pub fn new(id: u32, total_demand: f64, shares: [f64; 8]) -> Result<Self, ScenarioError> {
        if !(total_demand.is_finite() && total_demand >= 0.0) {
            return Err(ScenarioError::BadTotal);
        }
        for (k, &s) in shares.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(ScenarioError::BadShare(k + 1));
            }
        }
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ScenarioError::ShareSum(sum));
        }
        Ok(DemandScenario {
            id,
            total_demand,
            shares,
            labels: classify_shares(&shares, Thresholds::default()),
        })
    }

    pub fn uniform(id: u32, total_demand: f64) -> Self {
        Self::new(id, total_demand, [0.125; 8]).expect("uniform shares are valid")
    }

    /// Demand of movement `i` in veh/s.
    pub fn q(&self, i: usize) -> f64 {
        self.total_demand * self.shares[i - 1] / 3600.0
    }

    /// Objective weight of movement `i`: its share of total flow.
    pub fn eta(&self, i: usize) -> f64 {
        self.shares[i - 1]
    }

    pub fn scaled(&self, id: u32, factor: f64) -> Self {
        DemandScenario {
            id,
            total_demand: self.total_demand * factor,
            ..self.clone()
        }
    }

    /// Same total demand with shares permuted by the 90 degree rotation.
    pub fn rotated(&self) -> Self {
        let mut shares = [0.0; 8];
        for i in 1..=8 {
            shares[super::topology::rotate_movement(i) - 1] = self.shares[i - 1];
        }
        DemandScenario {
            shares,
            labels: classify_shares(&shares, Thresholds::default()),
            ..self.clone()
        }
    }

    pub fn with_thresholds(mut self, th: Thresholds) -> Self {
        self.labels = classify_shares(&self.shares, th);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let u = DemandScenario::uniform(1, 4000.0);
        assert_eq!(u.labels.balance, BalanceClass::Balanced);
        assert_eq!(u.labels.turn, TurnClass::Equal);

        let a = 0.34 / 4.0;
        let b = 0.66 / 4.0;
        let s = DemandScenario::new(2, 4000.0, [a, a, b, b, a, a, b, b]).unwrap();
        assert_eq!(s.labels.balance, BalanceClass::Imbalanced);

        let r = 0.70 / 4.0;
        let t = 0.30 / 4.0;
        let s = DemandScenario::new(3, 4000.0, [t, r, t, r, t, r, t, r]).unwrap();
        assert_eq!(s.labels.turn, TurnClass::RightHeavy);
    }

    #[test]
    fn flows_and_weights() {
        let u = DemandScenario::uniform(1, 3600.0);
        assert!((u.q(3) - 0.125).abs() < 1e-12);
        assert_eq!(u.eta(8), 0.125);
        assert!(DemandScenario::new(1, 1.0, [0.2; 8]).is_err());
    }
}
