use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{SimConfig, Trajectory};
use crate::analysis::solve_equilibrium;
use crate::error::{Error, Result};

/// Minimum number of complete cycles for a period estimate.
const MIN_CYCLES: usize = 3;

/// Empirical period of the post-transient `x3` signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    /// Mean over oscillators of each oscillator's mean crossing gap.
    pub period_mean: f64,
    /// Standard deviation of all crossing gaps pooled over oscillators.
    pub period_std: f64,
    /// Fewest complete cycles observed on any oscillator.
    pub n_cycles: usize,
    pub per_oscillator: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncMetric {
    /// `max_t max_{i,j} |x3_i(t) - x3_j(t)|` over the measurement window.
    pub sync_error: f64,
    /// Largest peak-to-peak amplitude of any `x3_i` in the window.
    pub amplitude: f64,
    pub tolerance: f64,
    pub synchronized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillationClass {
    Oscillatory,
    Quiescent,
}

/// Period statistics of a single sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPeriod {
    pub mean: f64,
    pub gaps: Vec<f64>,
}

/// Times of upward zero crossings of `y - mean(y)`, linearly interpolated
/// between samples.
pub fn upward_crossings(t: &[f64], y: &[f64]) -> Vec<f64> {
    if y.len() < 2 {
        return Vec::new();
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut out = Vec::new();
    for k in 0..y.len() - 1 {
        let (a, b) = (y[k] - mean, y[k + 1] - mean);
        if a < 0.0 && b >= 0.0 {
            out.push(t[k] + (t[k + 1] - t[k]) * (-a) / (b - a));
        }
    }
    out
}

/// Mean gap between successive upward crossings.
pub fn series_period(t: &[f64], y: &[f64]) -> Result<SeriesPeriod> {
    let crossings = upward_crossings(t, y);
    if crossings.len() < MIN_CYCLES + 1 {
        return Err(Error::NotOscillatory(format!(
            "{} upward crossings, need at least {}",
            crossings.len(),
            MIN_CYCLES + 1
        )));
    }
    let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Ok(SeriesPeriod { mean, gaps })
}

fn window(traj: &Trajectory, cfg: &SimConfig) -> Result<(usize, Vec<f64>)> {
    let start = traj.window_start(cfg.transient_fraction);
    if traj.len() < start + 2 {
        return Err(Error::InvalidConfig(format!(
            "trajectory of {} samples leaves no measurement window after the transient",
            traj.len()
        )));
    }
    let t = (start..traj.len()).map(|k| traj.time(k)).collect();
    Ok((start, t))
}

pub fn estimate_period(traj: &Trajectory, cfg: &SimConfig) -> Result<PeriodEstimate> {
    let (start, t) = window(traj, cfg)?;
    let mut per_oscillator = Vec::with_capacity(traj.n());
    let mut all_gaps = Vec::new();
    let mut n_cycles = usize::MAX;
    for i in 0..traj.n() {
        let s = series_period(&t, &traj.x3_series(i, start))
            .map_err(|e| Error::NotOscillatory(format!("oscillator {}: {e}", i + 1)))?;
        n_cycles = n_cycles.min(s.gaps.len());
        per_oscillator.push(s.mean);
        all_gaps.extend(s.gaps);
    }
    let period_mean = per_oscillator.iter().sum::<f64>() / per_oscillator.len() as f64;
    let pooled = all_gaps.iter().sum::<f64>() / all_gaps.len() as f64;
    let var = all_gaps.iter().map(|g| (g - pooled).powi(2)).sum::<f64>() / all_gaps.len() as f64;
    Ok(PeriodEstimate {
        period_mean,
        period_std: var.sqrt(),
        n_cycles,
        per_oscillator,
    })
}

/// Peak-to-peak amplitude of every `x3_i` over the measurement window.
pub fn peak_to_peak(traj: &Trajectory, cfg: &SimConfig) -> Result<Vec<f64>> {
    let (start, _) = window(traj, cfg)?;
    Ok((0..traj.n())
        .map(|i| {
            let s = traj.x3_series(i, start);
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .collect())
}

/// Pairwise `x3` spread over the window, judged against
/// `cfg.sync_tolerance * amplitude`.
pub fn measure_sync(traj: &Trajectory, cfg: &SimConfig) -> Result<SyncMetric> {
    let (start, _) = window(traj, cfg)?;
    let mut sync_error = 0.0_f64;
    for k in start..traj.len() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..traj.n() {
            let v = traj.x3(k, i);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        sync_error = sync_error.max(hi - lo);
    }
    let amplitude = peak_to_peak(traj, cfg)?.into_iter().fold(0.0, f64::max);
    let tolerance = cfg.sync_tolerance * amplitude;
    Ok(SyncMetric {
        sync_error,
        amplitude,
        tolerance,
        // a network resting at consensus counts as synchronized
        synchronized: sync_error < tolerance || sync_error == 0.0,
    })
}

/// Oscillatory iff every `x3_i` swings by more than
/// `cfg.amplitude_threshold * max(1, x0)` and a period can be measured.
pub fn classify_oscillation(traj: &Trajectory, cfg: &SimConfig) -> Result<OscillationClass> {
    let x0 = solve_equilibrium(&traj.params)?.x0;
    let threshold = cfg.amplitude_threshold * x0.max(1.0);
    let swings = peak_to_peak(traj, cfg)?;
    if swings.iter().any(|&s| s.is_nan() || s <= threshold) {
        return Ok(OscillationClass::Quiescent);
    }
    Ok(match estimate_period(traj, cfg) {
        Ok(_) => OscillationClass::Oscillatory,
        Err(_) => OscillationClass::Quiescent,
    })
}

/// Mean and first-harmonic amplitude of `x3_i` at period `period`, taken
/// over the last `cycles` periods of the trajectory.
pub fn first_harmonic(
    traj: &Trajectory,
    oscillator: usize,
    period: f64,
    cycles: usize,
) -> Result<(f64, f64)> {
    let t_last = traj.time(traj.len() - 1);
    let span = period * cycles as f64;
    if period.is_nan() || period <= 0.0 || span > t_last {
        return Err(Error::InvalidConfig(format!(
            "cannot take {cycles} cycles of period {period} from a horizon of {t_last}"
        )));
    }
    let start = ((t_last - span) / traj.dt).ceil() as usize;
    let w = 2.0 * PI / period;
    let (mut m, mut c, mut s) = (0.0, 0.0, 0.0);
    for k in start..traj.len() - 1 {
        let (t0, t1) = (traj.time(k), traj.time(k + 1));
        let (y0, y1) = (traj.x3(k, oscillator), traj.x3(k + 1, oscillator));
        let h = 0.5 * (t1 - t0);
        m += h * (y0 + y1);
        c += h * (y0 * (w * t0).cos() + y1 * (w * t1).cos());
        s += h * (y0 * (w * t0).sin() + y1 * (w * t1).sin());
    }
    let len = traj.time(traj.len() - 1) - traj.time(start);
    Ok((m / len, 2.0 * c.hypot(s) / len))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, dt: f64, t_end: f64) -> (Vec<f64>, Vec<f64>) {
        let n = (t_end / dt).round() as usize;
        let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let y = t.iter().map(|&t| f(t)).collect();
        (t, y)
    }

    #[test]
    fn pure_sinusoid_period() {
        let period = 7.2552;
        let (t, y) = sample(|t| (2.0 * PI * t / period).sin(), 0.01, 200.0);
        let s = series_period(&t, &y).unwrap();
        assert!((s.mean - period).abs() < 1e-3, "{}", s.mean);
    }

    #[test]
    fn harmonics_do_not_break_fundamental() {
        let (t, y) = sample(
            |t| 3.0 + 0.5 * (2.0 * PI * t / 5.0).sin() + 0.05 * (4.0 * PI * t / 5.0).sin(),
            0.01,
            200.0,
        );
        let s = series_period(&t, &y).unwrap();
        assert!((s.mean - 5.0).abs() < 5e-3, "{}", s.mean);
    }

    #[test]
    fn constant_signal_has_no_period() {
        let (t, y) = sample(|_| 1.3, 0.01, 50.0);
        assert!(upward_crossings(&t, &y).is_empty());
        assert!(matches!(
            series_period(&t, &y),
            Err(Error::NotOscillatory(_))
        ));
    }

    #[test]
    fn two_cycles_are_not_enough() {
        let (t, y) = sample(|t| (2.0 * PI * t / 10.0 + 0.1).sin(), 0.01, 25.0);
        assert!(series_period(&t, &y).is_err());
    }
}
