//! Chebyshev-Gauss nodes for averaging over a user placed uniformly in a
//! disc with bounded path loss `1 + d^alpha`.

use std::f64::consts::PI;

use crate::error::NumericalError;

#[derive(Debug, Clone, PartialEq)]
pub struct PositionNodes {
    pub theta: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl PositionNodes {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.b.iter().sum()
    }

    /// `(b_u, c_u)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.b.iter().copied().zip(self.c.iter().copied())
    }

    /// `sum_u b_u g(c_u)`.
    pub fn average<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.iter().map(|(b, c)| b * g(c)).sum()
    }
}

/// Nodes `theta_u = cos((2u - 1) pi / 2U)` with weights
/// `b_u = (pi / 2U) sqrt(1 - theta_u^2)(theta_u + 1)` and path-loss factors
/// `c_u = 1 + (radius (theta_u + 1) / 2)^alpha`.
pub fn position_nodes(u: usize, radius: f64, alpha: f64) -> Result<PositionNodes, NumericalError> {
    if u == 0 {
        return Err(NumericalError::Domain { function: "position_nodes", detail: "U must be at least 1".into() });
    }
    if !(radius >= 0.0) {
        return Err(NumericalError::Domain {
            function: "position_nodes",
            detail: format!("radius must be nonnegative, got {radius}"),
        });
    }
    let n = u as f64;
    let mut theta = Vec::with_capacity(u);
    let mut b = Vec::with_capacity(u);
    let mut c = Vec::with_capacity(u);
    for i in 1..=u {
        let t = ((2 * i - 1) as f64 * PI / (2.0 * n)).cos();
        theta.push(t);
        b.push(PI / (2.0 * n) * (1.0 - t * t).max(0.0).sqrt() * (t + 1.0));
        c.push(1.0 + (radius * (t + 1.0) / 2.0).powf(alpha));
    }
    Ok(PositionNodes { theta, b, c })
}
