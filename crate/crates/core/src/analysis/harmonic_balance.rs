//! Harmonic balance for synchronized oscillations: the collective frequency,
//! the matching describing-function gains and the marginal-stability check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::describing::{
    describing_functions, describing_functions_with_nodes, DEFAULT_NODES,
};
use crate::analysis::equilibrium::{oscillation_index, solve_equilibrium};
use crate::analysis::poly::{mode_pole_polynomials, Cubic, Stability};
use crate::analysis::spectral::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::model::GoodwinParams;

/// Predicted collective oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodPrediction {
    /// `sqrt(b1 b2 + b1 b3 + b2 b3)`
    pub w: f64,
    /// `2 pi / w` in dimensionless time.
    pub t_collective: f64,
    /// `sigma_time * t_collective`, when the time scale is known.
    pub t_dimensional: Option<f64>,
}

/// Collective frequency and period. Depends on the degradation rates only.
pub fn predict_period(g: &GoodwinParams) -> PeriodPrediction {
    let w = g.pair_sum().sqrt();
    let t_collective = 2.0 * PI / w;
    PeriodPrediction {
        w,
        t_collective,
        t_dimensional: g.sigma_time.map(|s| s * t_collective),
    }
}

/// Constant gains that balance the consensus mode:
/// `xi* = b1 b2 b3` (zero-order) and
/// `eta* = b1 b2 b3 - (b1 b2 + b1 b3 + b2 b3)(b1 + b2 + b3)` (first-order).
pub fn closed_form_gains(g: &GoodwinParams) -> (f64, f64) {
    let xi = g.product();
    (xi, xi - g.pair_sum() * g.sum())
}

/// Amplitudes `(alpha, beta)` of the synchronized waveform `x3 ~ alpha + beta sin(w t)`.
///
/// These are extrapolated from the first-harmonic approximation; only the
/// frequency carries the closed-form guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBalanceSolution {
    pub alpha: f64,
    pub beta: f64,
    pub w: f64,
    /// Describing-function gains at the solution.
    pub xi: f64,
    pub eta: f64,
    /// `eta * 2 alpha / beta`, the quantity matched against `eta*`.
    pub first_harmonic_gain: f64,
    /// `[xi - xi*, first_harmonic_gain - eta*]`
    pub residuals: [f64; 2],
    /// Change in `(xi, eta)` when the quadrature resolution is doubled.
    pub quadrature_delta: f64,
    pub iterations: usize,
}

impl HarmonicBalanceSolution {
    /// Predicted `x3(t)` on the synchronized orbit.
    pub fn waveform(&self, t: f64) -> f64 {
        self.alpha + self.beta * (self.w * t).sin()
    }
}

const HB_MAX_ITER: usize = 200;
const HB_TOL: f64 = 1e-8;

/// Solves `xi(alpha, beta) = xi*` and `N1(alpha, beta) = eta*` by damped
/// Newton iteration with a forward-difference Jacobian, starting from
/// `alpha = x0`, `beta = x0 / 2`.
pub fn solve_hb_amplitudes(g: &GoodwinParams) -> Result<HarmonicBalanceSolution> {
    let e = solve_equilibrium(g)?;
    let r = oscillation_index(g, &e);
    if r <= 1.0 {
        return Err(Error::Precondition(format!(
            "amplitude balance needs an oscillatory regime (R = {r:.6} <= 1)"
        )));
    }
    let (xi_star, eta_star) = closed_form_gains(g);
    let residual = |a: f64, b: f64| -> Result<[f64; 2]> {
        let d = describing_functions(a, b, g.p)?;
        Ok([d.xi - xi_star, d.first_harmonic_gain(a, b, g.p) - eta_star])
    };
    let norm = |r: &[f64; 2]| r[0].hypot(r[1]);

    let (mut a, mut b) = (e.x0, 0.5 * e.x0);
    let mut res = residual(a, b)?;
    let mut iterations = 0;
    while iterations < HB_MAX_ITER && (res[0].abs() >= HB_TOL || res[1].abs() >= HB_TOL) {
        iterations += 1;
        let ha = 1e-7 * a.max(1e-3);
        let hb = 1e-7 * b.max(1e-3);
        let ra = residual(a + ha, b)?;
        let rb = residual(a, b + hb)?;
        let j = [
            [(ra[0] - res[0]) / ha, (rb[0] - res[0]) / hb],
            [(ra[1] - res[1]) / ha, (rb[1] - res[1]) / hb],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = (j[1][1] * res[0] - j[0][1] * res[1]) / det;
        let db = (j[0][0] * res[1] - j[1][0] * res[0]) / det;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let na = a - step * da;
            // the balance is even in beta
            let nb = (b - step * db).abs();
            if na > 0.0 {
                let nr = residual(na, nb)?;
                if norm(&nr) < norm(&res) {
                    a = na;
                    b = nb;
                    res = nr;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res[0].abs() >= HB_TOL || res[1].abs() >= HB_TOL {
        return Err(Error::NoBalanceSolution {
            iterations,
            residuals: res,
        });
    }

    let d = describing_functions(a, b, g.p)?;
    let fine = describing_functions_with_nodes(a, b, g.p, 2 * DEFAULT_NODES)?;
    Ok(HarmonicBalanceSolution {
        alpha: a,
        beta: b,
        w: predict_period(g).w,
        xi: d.xi,
        eta: d.eta,
        first_harmonic_gain: d.first_harmonic_gain(a, b, g.p),
        residuals: res,
        quadrature_delta: (d.xi - fine.xi).abs().max((d.eta - fine.eta).abs()),
        iterations,
    })
}

/// Pole locations of the loops closed with the balancing gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalStabilityReport {
    pub w: f64,
    /// Roots of `(s+b1)(s+b2)(s+b3) - xi*`.
    pub g0_consensus_roots: [Complex64; 3],
    /// Roots of `(s+b1)(s+b2)(s+b3) - eta*`.
    pub g1_consensus_roots: [Complex64; 3],
    /// Distance of the smallest consensus root of the zero-order loop from 0.
    pub zero_root_error: f64,
    /// Distance of the imaginary pair of the first-order loop from `+-j w`.
    pub imaginary_pair_error: f64,
    pub g0_transverse_stable: bool,
    pub g1_transverse_stable: bool,
    /// Human-readable descriptions of every failed check.
    pub violations: Vec<String>,
}

impl MarginalStabilityReport {
    pub fn is_marginally_stable(&self) -> bool {
        self.violations.is_empty()
    }
}

const ROOT_TOL: f64 = 1e-7;
const LHP_MARGIN: f64 = 1e-9;

/// Checks that the zero-order loop has a single pole at 0 and the first-order
/// loop a pole pair at `+-j w`, with every other pole in the open left half-plane.
pub fn verify_marginal_stability(
    g: &GoodwinParams,
    spectrum: &SpectralDecomposition,
) -> Result<MarginalStabilityReport> {
    let e = solve_equilibrium(g)?;
    let r = oscillation_index(g, &e);
    if r <= 1.0 {
        return Err(Error::Precondition(format!(
            "marginal stability is only meaningful when R > 1 (R = {r:.6})"
        )));
    }
    if !spectrum.connected {
        return Err(Error::Disconnected);
    }
    let (xi_star, eta_star) = closed_form_gains(g);
    let w = predict_period(g).w;
    let g0 = mode_pole_polynomials(g, xi_star, spectrum);
    let g1 = mode_pole_polynomials(g, eta_star, spectrum);
    let mut violations = Vec::new();

    let g0_roots = g0[0].roots();
    let mut by_size = g0_roots;
    by_size.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    let zero_root_error = by_size[0].norm();
    if zero_root_error >= ROOT_TOL {
        violations.push(format!(
            "zero-order consensus loop has no root at 0 (nearest {:.3e})",
            zero_root_error
        ));
    }
    for z in &by_size[1..] {
        if z.re >= -LHP_MARGIN {
            violations.push(format!(
                "zero-order consensus loop root {z} not in open LHP"
            ));
        }
    }

    let g1_roots = g1[0].roots();
    let target = [Complex64::new(0.0, -w), Complex64::new(0.0, w)];
    let imaginary_pair_error = (g1_roots[1] - target[0])
        .norm()
        .max((g1_roots[2] - target[1]).norm());
    if imaginary_pair_error >= ROOT_TOL {
        violations.push(format!(
            "first-order consensus loop pair {}, {} is {:.3e} from +-j{w:.6}",
            g1_roots[1], g1_roots[2], imaginary_pair_error
        ));
    }
    if g1_roots[0].re >= -LHP_MARGIN {
        violations.push(format!(
            "first-order consensus loop root {} not in open LHP",
            g1_roots[0]
        ));
    }

    let transverse_ok = |cubics: &[Cubic], name: &str, violations: &mut Vec<String>| {
        let mut ok = true;
        for (j, c) in cubics.iter().enumerate().skip(1) {
            let roots_ok = c.roots().iter().all(|z| z.re < -LHP_MARGIN);
            if c.classify() != Stability::StrictlyStable || !roots_ok {
                ok = false;
                violations.push(format!("{name} mode {} is not strictly stable", j + 1));
            }
        }
        ok
    };
    let g0_transverse_stable = transverse_ok(&g0, "zero-order", &mut violations);
    let g1_transverse_stable = transverse_ok(&g1, "first-order", &mut violations);

    Ok(MarginalStabilityReport {
        w,
        g0_consensus_roots: g0_roots,
        g1_consensus_roots: g1_roots,
        zero_root_error,
        imaginary_pair_error,
        g0_transverse_stable,
        g1_transverse_stable,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::spectral::spectral_decompose;
    use crate::model::CouplingTopology;
    use approx::assert_abs_diff_eq;

    #[test]
    fn period_formula() {
        let t = |b: f64| predict_period(&GoodwinParams::uniform(b, 17.0).unwrap()).t_collective;
        assert_abs_diff_eq!(t(0.5), 2.0 * PI / 0.75f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(t(0.5), 7.2552, epsilon = 1e-4);
        assert_abs_diff_eq!(t(0.8), 4.5345, epsilon = 1e-4);
        assert_abs_diff_eq!(t(0.4), 9.0690, epsilon = 1e-4);
        let p = predict_period(&GoodwinParams::new(0.3, 0.6, 1.2, 3.0).unwrap());
        assert_abs_diff_eq!(
            p.w * p.w,
            0.3 * 0.6 + 0.3 * 1.2 + 0.6 * 1.2,
            epsilon = 1e-14
        );
        assert!(p.t_dimensional.is_none());
    }

    #[test]
    fn dimensional_period_uses_degradation_rates_only() {
        let d = crate::model::DimensionalParams {
            v0: 3.0,
            v1: 0.7,
            v2: 2.0,
            k1: 0.2,
            k2: 0.3,
            k3: 0.4,
            km: 1.5,
            p: 12.0,
        };
        let g = crate::model::nondimensionalize(&d).unwrap();
        let t = predict_period(&g).t_dimensional.unwrap();
        assert_abs_diff_eq!(
            t,
            2.0 * PI / (0.06f64 + 0.08 + 0.12).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn closed_form_gain_values() {
        let (xi, eta) = closed_form_gains(&GoodwinParams::uniform(0.5, 17.0).unwrap());
        assert_eq!(xi, 0.125);
        assert_abs_diff_eq!(eta, -1.0, epsilon = 1e-15);
        for b in [0.1, 0.77, 2.0] {
            let (xi, eta) = closed_form_gains(&GoodwinParams::uniform(b, 2.0).unwrap());
            assert_abs_diff_eq!(eta, -8.0 * b * b * b, epsilon = 1e-12);
            assert!(eta < 0.0 && 0.0 < xi);
        }
    }

    #[test]
    fn amplitude_solve_requires_oscillation() {
        let g = GoodwinParams::uniform(1.0, 17.0).unwrap();
        assert!(matches!(
            solve_hb_amplitudes(&g),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn amplitude_solve_is_self_consistent() {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let s = solve_hb_amplitudes(&g).unwrap();
        let (xi_star, eta_star) = closed_form_gains(&g);
        let d = describing_functions(s.alpha, s.beta, g.p).unwrap();
        assert!((d.xi - xi_star).abs() < 1e-8);
        assert!((d.first_harmonic_gain(s.alpha, s.beta, g.p) - eta_star).abs() < 1e-8);
        assert!(s.alpha > 0.0 && s.beta > 0.0);
        assert!(s.quadrature_delta < 1e-8);
        assert_abs_diff_eq!(s.waveform(0.0), s.alpha);
    }

    #[test]
    fn uniform_marginal_roots() {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let spectrum = spectral_decompose(&CouplingTopology::table1()).unwrap();
        let rep = verify_marginal_stability(&g, &spectrum).unwrap();
        assert!(rep.is_marginally_stable(), "{:?}", rep.violations);
        assert_abs_diff_eq!(rep.g1_consensus_roots[0].re, -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.g1_consensus_roots[2].im, 0.8660254, epsilon = 1e-7);
        assert!(rep.zero_root_error < 1e-12);
        let nonzero: Vec<_> = rep
            .g0_consensus_roots
            .iter()
            .filter(|z| z.norm() > 1e-9)
            .collect();
        assert_eq!(nonzero.len(), 2);
        for z in nonzero {
            assert_abs_diff_eq!(z.re, -0.75, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im.abs(), 0.1875f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn marginal_check_preconditions() {
        let spectrum = spectral_decompose(&CouplingTopology::table1()).unwrap();
        let quiet = GoodwinParams::uniform(1.0, 17.0).unwrap();
        assert!(verify_marginal_stability(&quiet, &spectrum).is_err());
        let split = spectral_decompose(&CouplingTopology::uncoupled(3).unwrap()).unwrap();
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        assert_eq!(
            verify_marginal_stability(&g, &split),
            Err(Error::Disconnected)
        );
    }
}
