//! The JSON result bundle written by `analyze` and `simulate`.

use goodwin_core::analysis::AnalysisReport;
use goodwin_core::simulation::{OscillationClass, PeriodEstimate, SyncMetric};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the configuration file bytes.
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportBundle {
    pub schema: u32,
    pub analysis: AnalysisReport,
    #[serde(default)]
    pub period: Option<PeriodEstimate>,
    #[serde(default)]
    pub sync: Option<SyncMetric>,
    #[serde(default)]
    pub oscillation: Option<OscillationClass>,
    /// Time of the first non-finite state, when the run diverged.
    #[serde(default)]
    pub diverged_at: Option<f64>,
    /// Why a measurement is missing, if one is.
    #[serde(default)]
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl ReportBundle {
    pub fn new(analysis: AnalysisReport, provenance: Provenance) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            analysis,
            period: None,
            sync: None,
            oscillation: None,
            diverged_at: None,
            notes: Vec::new(),
            provenance,
        }
    }

    /// Schema version, provenance and finiteness of every number.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema != SCHEMA_VERSION {
            return Err(format!("unsupported schema version {}", self.schema));
        }
        let prov = &self.provenance;
        if prov.config_hash.len() != 64 || !prov.config_hash.bytes().all(|b| b.is_ascii_hexdigit())
        {
            return Err(format!("malformed config hash `{}`", prov.config_hash));
        }
        if prov.tool_version.is_empty() {
            return Err("missing tool version".into());
        }
        match self.numbers().into_iter().find(|(_, v)| !v.is_finite()) {
            Some((name, v)) => Err(format!("field `{name}` is not finite ({v})")),
            None => Ok(()),
        }
    }

    fn numbers(&self) -> Vec<(&'static str, f64)> {
        let a = &self.analysis;
        let e = &a.equilibrium;
        let mut out = vec![
            ("analysis.params.b1", a.params.b1),
            ("analysis.params.b2", a.params.b2),
            ("analysis.params.b3", a.params.b3),
            ("analysis.params.p", a.params.p),
            ("analysis.equilibrium.x0", e.x0),
            ("analysis.equilibrium.x1_star", e.x1_star),
            ("analysis.equilibrium.x2_star", e.x2_star),
            ("analysis.equilibrium.residual", e.residual),
            ("analysis.sigma", a.sigma),
            ("analysis.R", a.r),
            ("analysis.gamma", a.gamma),
            ("analysis.sync_threshold", a.sync_threshold),
            ("analysis.w", a.w),
            ("analysis.T_collective", a.t_collective),
            ("analysis.xi_star", a.xi_star),
            ("analysis.eta_star", a.eta_star),
        ];
        let optional = [
            ("analysis.params.sigma_time", a.params.sigma_time),
            ("analysis.rho", a.rho),
            ("analysis.T_dimensional", a.t_dimensional),
            ("diverged_at", self.diverged_at),
        ];
        out.extend(optional.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))));
        if let Some(p) = &self.period {
            out.push(("period.period_mean", p.period_mean));
            out.push(("period.period_std", p.period_std));
            out.extend(
                p.per_oscillator
                    .iter()
                    .map(|&v| ("period.per_oscillator", v)),
            );
        }
        if let Some(s) = &self.sync {
            out.push(("sync.sync_error", s.sync_error));
            out.push(("sync.amplitude", s.amplitude));
            out.push(("sync.tolerance", s.tolerance));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let b: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        b.validate()?;
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use goodwin_core::analysis::analyze;
    use goodwin_core::{CouplingTopology, GoodwinParams};

    fn sample() -> ReportBundle {
        let g = GoodwinParams::uniform(0.5, 17.0).unwrap();
        let a = analyze(&g, &CouplingTopology::ring(4, 0.5).unwrap()).unwrap();
        ReportBundle::new(a, Provenance::new(crate::config::sha256_hex(b"{}"), 42))
    }

    #[test]
    fn json_round_trip() {
        let b = sample();
        b.validate().unwrap();
        let text = b.to_json();
        assert!(text.contains("\"schema\": 1"));
        assert_eq!(ReportBundle::from_json(&text).unwrap(), b);
    }

    #[test]
    fn infinite_optional_fields_are_caught() {
        let mut b = sample();
        b.diverged_at = Some(f64::INFINITY);
        assert!(b.validate().unwrap_err().contains("diverged_at"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = sample().to_json().replacen("{", "{\"bogus\": 1,", 1);
        assert!(ReportBundle::from_json(&text).is_err());
    }
}
