//! Closed-form and semi-analytical predictions for a coupled network.

pub mod describing;
pub mod equilibrium;
pub mod harmonic_balance;
pub mod poly;
pub mod spectral;

use serde::{Deserialize, Serialize};

pub use describing::{describing_functions, describing_functions_with_nodes, DescribingGains};
pub use equilibrium::{
    check_sync_condition, gamma_max_slope, linearization_gain, oscillation_index,
    solve_equilibrium, sync_threshold, EquilibriumPoint, SyncCondition,
};
pub use harmonic_balance::{
    closed_form_gains, predict_period, solve_hb_amplitudes, verify_marginal_stability,
    HarmonicBalanceSolution, MarginalStabilityReport, PeriodPrediction,
};
pub use poly::{mode_pole_polynomials, routh_hurwitz_cubic, Cubic, Stability};
pub use spectral::{spectral_decompose, symmetric_eigen, SpectralDecomposition};

use crate::error::Result;
use crate::model::{CouplingTopology, GoodwinParams};

/// Every prediction for one parameter set and topology.
///
/// Raw quantities are always reported alongside the verdicts; the
/// synchronization test is sufficient, not necessary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub params: GoodwinParams,
    pub n: usize,
    pub equilibrium: EquilibriumPoint,
    pub sigma: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub gamma: f64,
    /// Algebraic connectivity; `None` for a single oscillator.
    pub rho: Option<f64>,
    pub connected: bool,
    pub sync_threshold: f64,
    pub oscillation_predicted: bool,
    /// `None` when the topology is disconnected (condition not applicable).
    pub sync_condition_met: Option<bool>,
    pub w: f64,
    #[serde(rename = "T_collective")]
    pub t_collective: f64,
    #[serde(rename = "T_dimensional")]
    pub t_dimensional: Option<f64>,
    pub xi_star: f64,
    pub eta_star: f64,
}

pub fn analyze(g: &GoodwinParams, c: &CouplingTopology) -> Result<AnalysisReport> {
    g.validate()?;
    let equilibrium = solve_equilibrium(g)?;
    let sigma = linearization_gain(g, &equilibrium);
    let r = oscillation_index(g, &equilibrium);
    let gamma = gamma_max_slope(g.p)?;
    let spectrum = spectral_decompose(c)?;
    let rho = spectrum.algebraic_connectivity();
    let threshold = sync_threshold(g, gamma);
    let sync_condition_met = match (c.is_connected(), rho) {
        (true, Some(rho)) => Some(check_sync_condition(g, gamma, rho, true)?.satisfied),
        // a lone oscillator is trivially synchronized
        (true, None) => Some(true),
        (false, _) => None,
    };
    let period = predict_period(g);
    let (xi_star, eta_star) = closed_form_gains(g);
    Ok(AnalysisReport {
        params: *g,
        n: c.n(),
        equilibrium,
        sigma,
        r,
        gamma,
        rho,
        connected: c.is_connected(),
        sync_threshold: threshold,
        oscillation_predicted: r > 1.0,
        sync_condition_met,
        w: period.w,
        t_collective: period.t_collective,
        t_dimensional: period.t_dimensional,
        xi_star,
        eta_star,
    })
}
