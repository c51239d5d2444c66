//! Stop-line capacity rows shared by the split optimizer and the plan checker.
//!
//! Each row is linear in the green fraction `phi` and the reciprocal cycle `xi`:
//! `phi_coef * phi + xi_coef * xi <= rhs`.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopLineRow {
    pub phi: f64,
    pub xi: f64,
    pub rhs: f64,
}

impl StopLineRow {
    pub fn residual(&self, phi: f64, xi: f64) -> f64 {
        self.phi * phi + self.xi * xi - self.rhs
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("per-lane demand {alpha_q} veh/s is at or above saturation flow {s} veh/s")]
pub struct Oversaturated {
    pub alpha_q: f64,
    pub s: f64,
}

/// `mu * alpha_q <= s * (phi - delta * xi)` at a fixed multiplier.
pub fn capacity_row(mu_alpha_q: f64, s: f64, delta: f64) -> StopLineRow {
    StopLineRow {
        phi: -s,
        xi: s * delta,
        rhs: -mu_alpha_q,
    }
}

/// Maximum back of queue at the first stop line, in vehicles.
pub fn queue_extent(q: f64, s: f64, alpha: f64, phi: f64, delta: f64, xi: f64) -> Result<f64, Oversaturated> {
    let aq = alpha * q;
    if s <= aq {
        return Err(Oversaturated { alpha_q: aq, s });
    }
    Ok(s / (s - aq) * (1.0 - phi + delta * xi) * aq / xi)
}

/// Queue extent bounded by storage `z0`, multiplied through by `xi`.
pub fn queue_row(alpha_q: f64, s: f64, delta: f64, z0: f64) -> Result<StopLineRow, Oversaturated> {
    if s <= alpha_q {
        return Err(Oversaturated { alpha_q, s });
    }
    let k = s * alpha_q / (s - alpha_q);
    Ok(StopLineRow {
        phi: -k,
        xi: k * delta - z0,
        rhs: -k,
    })
}

/// Red-time accumulation must clear within the green: `(1 - phi + delta*xi) alpha_q <= (s - alpha_q) phi`.
pub fn clearance_row(alpha_q: f64, s: f64, delta: f64) -> StopLineRow {
    StopLineRow {
        phi: -s,
        xi: alpha_q * delta,
        rhs: -alpha_q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_extent_hand_value() {
        let tau = queue_extent(0.1, 0.75, 1.0, 0.45, 3.0, 0.01).unwrap();
        assert!((tau - 0.75 / 0.65 * 0.58 * 0.1 / 0.01).abs() < 1e-12);
        assert!((tau - 6.6923).abs() < 1e-4);
        assert!(queue_extent(1.0, 0.75, 1.0, 0.5, 3.0, 0.01).is_err());
    }

    #[test]
    fn clearance_threshold() {
        // alpha*Q = 0.1, s = 0.75, delta*xi = 0.03
        let row = clearance_row(0.1, 0.75, 3.0);
        let phi_min = 0.1 * 1.03 / 0.75;
        assert!(row.residual(phi_min, 0.01).abs() < 1e-12);
        assert!(row.residual(phi_min - 1e-4, 0.01) > 0.0);
        assert!((phi_min - 0.137_333).abs() < 1e-6);
    }

    #[test]
    fn queue_row_matches_extent() {
        let (q, s, delta, z0) = (0.12, 0.75, 3.0, 9.0);
        let row = queue_row(q, s, delta, z0).unwrap();
        for (phi, xi) in [(0.3, 0.01), (0.6, 0.02), (0.45, 1.0 / 70.0)] {
            let tau = queue_extent(q, s, 1.0, phi, delta, xi).unwrap();
            let lhs = row.residual(phi, xi);
            assert!(((tau - z0) * xi - lhs).abs() < 1e-12);
        }
    }
}
