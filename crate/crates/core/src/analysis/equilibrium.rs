//! Equilibrium, linearization and the oscillation/synchronization indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hill, hill_slope, GoodwinParams};

/// The unique positive equilibrium shared by every oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    /// Equilibrium value of `x3`.
    pub x0: f64,
    /// `b2 b3 x0`
    pub x1_star: f64,
    /// `b3 x0`
    pub x2_star: f64,
    /// `|f(x0) - b1 b2 b3 x0|`
    pub residual: f64,
}

impl EquilibriumPoint {
    /// Per-oscillator equilibrium triple `(x1*, x2*, x3*)`.
    pub fn triple(&self) -> [f64; 3] {
        [self.x1_star, self.x2_star, self.x0]
    }
}

/// Solves `f(x0) = b1 b2 b3 x0` by bisection on `(0, 1 / (b1 b2 b3)]`.
///
/// `h(x) = f(x) - b1 b2 b3 x` is strictly decreasing with `h(0) = 1` and
/// `h(1 / (b1 b2 b3)) <= 0`, so the bracket always holds exactly one root.
pub fn solve_equilibrium(g: &GoodwinParams) -> Result<EquilibriumPoint> {
    g.validate()?;
    let k = g.product();
    let h = |x: f64| hill(x, g.p) - k * x;

    let mut lo = 0.0_f64;
    let mut hi = 1.0 / k;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + lo) {
            break;
        }
    }
    // pick the bracket end with the smaller residual
    let x0 = if h(lo).abs() <= h(hi).abs() { lo } else { hi };
    Ok(EquilibriumPoint {
        x0,
        x1_star: g.b2 * g.b3 * x0,
        x2_star: g.b3 * x0,
        residual: h(x0).abs(),
    })
}

/// Slope of the repression at the equilibrium, written through the
/// equilibrium relation: `sigma = -p x0^(p-1) (b1 b2 b3 x0)^2`.
pub fn linearization_gain(g: &GoodwinParams, e: &EquilibriumPoint) -> f64 {
    let fx0 = g.product() * e.x0;
    -g.p * e.x0.powf(g.p - 1.0) * fx0 * fx0
}

/// Same slope evaluated directly as `f'(x0)`.
pub fn repression_slope_at(g: &GoodwinParams, e: &EquilibriumPoint) -> f64 {
    hill_slope(e.x0, g.p)
}

/// `(b1 + b2 + b3)(b1 b2 + b2 b3 + b1 b3) - b1 b2 b3`, positive for positive rates.
pub fn hurwitz_margin(g: &GoodwinParams) -> f64 {
    g.sum() * g.pair_sum() - g.product()
}

/// Oscillation index `R = p (b1 b2 b3)^2 x0^(p+1) / ((b1+b2+b3)(b1b2+b2b3+b1b3) - b1b2b3)`.
///
/// `R > 1` exactly when the in-phase (mode 1) linearization
/// `(s+b1)(s+b2)(s+b3) - sigma` has a root in the open right half-plane.
pub fn oscillation_index(g: &GoodwinParams, e: &EquilibriumPoint) -> f64 {
    let k = g.product();
    let r = g.p * k * k * e.x0.powf(g.p + 1.0) / hurwitz_margin(g);
    debug_assert!(
        (r - 1.0).abs() < 1e-9 || (r > 1.0) == instability_from_sigma(g, e),
        "R verdict disagrees with the sigma bound"
    );
    r
}

/// Instability of the in-phase mode stated on the slope:
/// `sigma < b1 b2 b3 - (b1 + b2 + b3)(b1 b2 + b1 b3 + b2 b3)`.
pub fn instability_from_sigma(g: &GoodwinParams, e: &EquilibriumPoint) -> bool {
    linearization_gain(g, e) < -hurwitz_margin(g)
}

/// Largest slope magnitude of the repression, `max_{x>=0} p x^(p-1) / (1 + x^p)^2`.
pub fn gamma_max_slope(p: f64) -> Result<f64> {
    Ok(gamma_with_maximizer(p)?.0)
}

/// `(gamma, x*)` where `x*` attains the maximal slope.
pub fn gamma_with_maximizer(p: f64) -> Result<(f64, f64)> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("maximal slope is unbounded for p < 1 (got {p})"),
        });
    }
    if p == 1.0 {
        return Ok((1.0, 0.0));
    }
    let ratio = (p - 1.0) / (p + 1.0);
    let x_star = ratio.powf(1.0 / p);
    let gamma = ratio.powf((p - 1.0) / p) * (p + 1.0) * (p + 1.0) / (4.0 * p);
    Ok((gamma, x_star))
}

/// Outcome of the sufficient synchronization test `rho > -b1 + gamma / (4 b2 b3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncCondition {
    pub rho: f64,
    pub gamma: f64,
    pub threshold: f64,
    pub satisfied: bool,
    /// Always true: failing the test does not imply desynchronization.
    pub sufficient_only: bool,
}

pub fn sync_threshold(g: &GoodwinParams, gamma: f64) -> f64 {
    -g.b1 + gamma / (4.0 * g.b2 * g.b3)
}

/// Evaluates the synchronization condition for algebraic connectivity `rho`.
/// `connected` must come from the topology the connectivity was computed for.
pub fn check_sync_condition(
    g: &GoodwinParams,
    gamma: f64,
    rho: f64,
    connected: bool,
) -> Result<SyncCondition> {
    if !connected {
        return Err(Error::Disconnected);
    }
    let threshold = sync_threshold(g, gamma);
    Ok(SyncCondition {
        rho,
        gamma,
        threshold,
        satisfied: rho > threshold,
        sufficient_only: true,
    })
}
