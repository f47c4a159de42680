//! Describing-function gains of the Hill repression under a biased sinusoid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hill, hill_slope};

/// Default number of Simpson intervals over one period.
pub const DEFAULT_NODES: usize = 2048;

/// Gains for the input `alpha + beta sin t`:
///
/// ```text
/// xi  = 1/(2 pi alpha) * int_{-pi}^{pi} f(alpha + beta sin t) dt
/// eta = 1/(2 pi alpha) * int_{-pi}^{pi} f(alpha + beta sin t) sin t dt
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescribingGains {
    pub xi: f64,
    pub eta: f64,
}

impl DescribingGains {
    /// Gain from the input's first harmonic to the output's first harmonic,
    /// `(1 / (pi beta)) int f sin = eta * 2 alpha / beta`.
    ///
    /// Tends to `f'(alpha)` as `beta -> 0`.
    pub fn first_harmonic_gain(&self, alpha: f64, beta: f64, p: f64) -> f64 {
        if beta == 0.0 {
            hill_slope(alpha, p)
        } else {
            self.eta * 2.0 * alpha / beta
        }
    }
}

pub fn describing_functions(alpha: f64, beta: f64, p: f64) -> Result<DescribingGains> {
    describing_functions_with_nodes(alpha, beta, p, DEFAULT_NODES)
}

/// Composite Simpson rule on `nodes` intervals (rounded up to even).
/// Negative arguments of the repression are clamped at zero.
pub fn describing_functions_with_nodes(
    alpha: f64,
    beta: f64,
    p: f64,
    nodes: usize,
) -> Result<DescribingGains> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("bias must be strictly positive, got {alpha}"),
        });
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("amplitude must be nonnegative, got {beta}"),
        });
    }
    if beta == 0.0 {
        return Ok(DescribingGains {
            xi: hill(alpha, p) / alpha,
            eta: 0.0,
        });
    }
    let n = (nodes.max(2) + 1) & !1;
    let h = 2.0 * PI / n as f64;
    let (mut mean, mut first) = (0.0, 0.0);
    for k in 0..=n {
        let t = -PI + k as f64 * h;
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let (s, _) = t.sin_cos();
        let y = hill(alpha + beta * s, p);
        mean += w * y;
        first += w * y * s;
    }
    let scale = h / 3.0 / (2.0 * PI * alpha);
    Ok(DescribingGains {
        xi: mean * scale,
        eta: first * scale,
    })
}
