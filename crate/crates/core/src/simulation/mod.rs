//! Fixed-step integration of the network and trajectory measurements.

mod metrics;
mod rk4;

pub use metrics::{
    classify_oscillation, estimate_period, first_harmonic, measure_sync, peak_to_peak,
    series_period, upward_crossings, OscillationClass, PeriodEstimate, SeriesPeriod, SyncMetric,
};
pub use rk4::Rk4;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analysis::solve_equilibrium;
use crate::error::{Error, Result};
use crate::model::{vector_field_flat, CouplingTopology, GoodwinParams, NetworkState};

/// Numerical settings for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Leading fraction of the horizon discarded before measuring.
    pub transient_fraction: f64,
    pub seed: u64,
    /// Relative half-width of the uniform offset applied to the equilibrium.
    pub perturbation: f64,
    /// Peak-to-peak threshold, relative to `max(1, x0)`, separating a limit
    /// cycle from a decaying transient.
    pub amplitude_threshold: f64,
    /// Synchronization tolerance relative to the oscillation amplitude.
    pub sync_tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 500.0,
            transient_fraction: 0.5,
            seed: 42,
            perturbation: 0.5,
            amplitude_threshold: 1e-3,
            sync_tolerance: 1e-3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 10.0 * self.dt) {
            return bad(format!(
                "t_end must exceed 10 dt = {}, got {}",
                10.0 * self.dt,
                self.t_end
            ));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return bad(format!(
                "transient_fraction must lie in [0, 1), got {}",
                self.transient_fraction
            ));
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return bad(format!(
                "perturbation must be nonnegative, got {}",
                self.perturbation
            ));
        }
        if !(self.amplitude_threshold >= 0.0 && self.sync_tolerance >= 0.0) {
            return bad("thresholds must be nonnegative".into());
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Uniformly sampled solution with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: GoodwinParams,
    pub topology: CouplingTopology,
    pub dt: f64,
    n: usize,
    /// Row-major samples in the stacked `[x1.., x2.., x3..]` layout.
    data: Vec<f64>,
    /// Smallest state entry seen before clamping.
    pub min_unclamped: f64,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / (3 * self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Sample `k` in the stacked layout.
    pub fn row(&self, k: usize) -> &[f64] {
        let w = 3 * self.n;
        &self.data[k * w..(k + 1) * w]
    }

    pub fn state(&self, k: usize) -> NetworkState {
        NetworkState::from_flat(self.row(k)).expect("row width is a multiple of 3")
    }

    pub fn last_state(&self) -> NetworkState {
        self.state(self.len() - 1)
    }

    pub fn x3(&self, k: usize, i: usize) -> f64 {
        self.data[k * 3 * self.n + 2 * self.n + i]
    }

    /// `x3` of oscillator `i` from sample `start` onwards.
    pub fn x3_series(&self, i: usize, start: usize) -> Vec<f64> {
        (start..self.len()).map(|k| self.x3(k, i)).collect()
    }

    /// First sample of the measurement window.
    pub fn window_start(&self, transient_fraction: f64) -> usize {
        ((self.len() - 1) as f64 * transient_fraction).ceil() as usize
    }
}

/// Outcome of [`integrate_partial`]: the trajectory up to the last finite
/// sample and the time of divergence, if any.
#[derive(Debug, Clone)]
pub struct Run {
    pub trajectory: Trajectory,
    pub diverged_at: Option<f64>,
}

/// Classical fourth-order Runge-Kutta with fixed step `cfg.dt` up to `cfg.t_end`.
pub fn integrate(
    g: &GoodwinParams,
    c: &CouplingTopology,
    init: &NetworkState,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let run = integrate_partial(g, c, init, cfg)?;
    match run.diverged_at {
        Some(time) => Err(Error::Diverged { time }),
        None => Ok(run.trajectory),
    }
}

/// Like [`integrate`], but stops at the first non-finite state and returns
/// what was computed so far.
pub fn integrate_partial(
    g: &GoodwinParams,
    c: &CouplingTopology,
    init: &NetworkState,
    cfg: &SimConfig,
) -> Result<Run> {
    g.validate()?;
    cfg.validate()?;
    let n = c.n();
    init.validate()?;
    if init.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: init.n(),
        });
    }

    let steps = cfg.steps();
    let width = 3 * n;
    let mut data = Vec::with_capacity((steps + 1) * width);
    let mut y = init.as_flat();
    let mut min_unclamped = y.iter().copied().fold(f64::INFINITY, f64::min);
    data.extend_from_slice(&y);

    let lap = c.laplacian();
    let mut stepper = Rk4::new(width);
    let mut diverged_at = None;
    for k in 1..=steps {
        stepper.step(&mut y, cfg.dt, |x, dx| vector_field_flat(x, dx, g, lap));
        if !y.iter().all(|v| v.is_finite()) {
            diverged_at = Some(k as f64 * cfg.dt);
            break;
        }
        for v in y.iter_mut() {
            if *v < min_unclamped {
                min_unclamped = *v;
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        data.extend_from_slice(&y);
    }

    Ok(Run {
        trajectory: Trajectory {
            params: *g,
            topology: c.clone(),
            dt: cfg.dt,
            n,
            data,
            min_unclamped,
        },
        diverged_at,
    })
}

/// Equilibrium of every oscillator scaled by `1 + u`, `u ~ U[-perturbation, perturbation]`,
/// drawn from a ChaCha8 stream seeded with `cfg.seed`.
///
/// Draw order is `x1` of every oscillator, then `x2`, then `x3`.
pub fn default_initial_state(
    g: &GoodwinParams,
    c: &CouplingTopology,
    cfg: &SimConfig,
) -> Result<NetworkState> {
    let e = solve_equilibrium(g)?;
    let n = c.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut flat = Vec::with_capacity(3 * n);
    for base in e.triple() {
        for _ in 0..n {
            // 53 random mantissa bits in [0, 1)
            let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let u = cfg.perturbation * (2.0 * unit - 1.0);
            flat.push(base * (1.0 + u));
        }
    }
    NetworkState::from_flat(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let base = SimConfig::default();
        assert!(SimConfig { dt: 0.0, ..base }.validate().is_err());
        assert!(SimConfig {
            t_end: 0.05,
            ..base
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            transient_fraction: 1.0,
            ..base
        }
        .validate()
        .is_err());
        assert_eq!(SimConfig::default().steps(), 50_000);
    }

    #[test]
    fn zero_perturbation_is_equilibrium() {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let c = CouplingTopology::table1();
        let cfg = SimConfig {
            perturbation: 0.0,
            ..SimConfig::default()
        };
        let s = default_initial_state(&g, &c, &cfg).unwrap();
        let e = solve_equilibrium(&g).unwrap();
        assert_eq!(s, NetworkState::consensus(9, e.triple()));
    }

    #[test]
    fn seeded_states_are_reproducible() {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let c = CouplingTopology::table1();
        let cfg = SimConfig::default();
        let a = default_initial_state(&g, &c, &cfg).unwrap();
        let b = default_initial_state(&g, &c, &cfg).unwrap();
        assert_eq!(a.as_flat(), b.as_flat());
        let other = default_initial_state(&g, &c, &SimConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a, other);
        let e = solve_equilibrium(&g).unwrap();
        for (v, base) in a.x3.iter().map(|v| (v, e.x0)) {
            assert!((v / base - 1.0).abs() <= 0.5);
        }
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let c = CouplingTopology::table1();
        let cfg = SimConfig {
            perturbation: 0.0,
            t_end: 100.0,
            ..SimConfig::default()
        };
        let init = default_initial_state(&g, &c, &cfg).unwrap();
        let traj = integrate(&g, &c, &init, &cfg).unwrap();
        assert_eq!(traj.len(), 10_001);
        let first = init.as_flat();
        let drift = (0..traj.len())
            .flat_map(|k| {
                traj.row(k)
                    .iter()
                    .zip(&first)
                    .map(|(a, b)| (a - b).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        assert!(drift < 1e-10, "{drift}");
    }

    #[test]
    fn rejects_mismatched_initial_state() {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let c = CouplingTopology::table1();
        let init = NetworkState::zeros(3);
        assert!(matches!(
            integrate(&g, &c, &init, &SimConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
