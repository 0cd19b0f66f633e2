//! Analysis configuration: JSON ingestion, defaults and validation.

use std::path::Path;

use radialscope_core::dynamics::{DagOptions, PotentialModel};
use radialscope_core::normalform::Perturbation;
use radialscope_core::symalg::TermData;
use radialscope_core::{Rational, Scalar};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

/// A number given as a JSON integer, float or `"p/q"` / decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    /// Exact value; floats are read through their shortest decimal form.
    pub fn to_rational(&self) -> Result<Rational, RunError> {
        let parsed = match self {
            Number::Int(i) => Some(Rational::from_integer((*i).into())),
            Number::Float(f) if f.is_finite() => Rational::parse_repr(&format!("{f:?}")),
            Number::Float(_) => None,
            Number::Text(s) => Rational::parse_repr(s),
        };
        parsed.ok_or_else(|| RunError::Config(format!("not a rational number: {self}")))
    }

    pub fn to_f64(&self) -> Result<f64, RunError> {
        Ok(self.to_rational()?.as_f64())
    }
}

impl std::fmt::Display for Number {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Float(x) => write!(f, "{x:?}"),
            Number::Text(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<i64> for Number {
    fn from(i: i64) -> Self {
        Number::Int(i)
    }
}

impl From<&str> for Number {
    fn from(s: &str) -> Self {
        Number::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Abstract,
    Explicit,
}

/// Oscillator override `(p, q, c)` for one `y'''` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CriticalPointConfig {
    pub label: String,
    pub value: Number,
    /// Hessian eigenvalues `2 a_j` of `V0` at the point.
    pub hessian: Vec<Number>,
    /// Terms added to the model quadratic before normal-form reduction, in
    /// the sorted `(nu, y, mu)` coordinates of the outgoing radial point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbation: Vec<TermData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oscillators: Vec<OscillatorConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum EnergyConfig {
    Single { sigma: Number },
    Interval { interval: [Number; 2] },
}

/// Tolerances, grid sizes and truncation orders; see the defaults table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Options {
    pub tol: f64,
    pub max_degree: u32,
    #[serde(rename = "K")]
    pub k: usize,
    pub max_beta_prime: u32,
    pub re_b: f64,
    pub scan_grid: usize,
    pub bisection_tol: f64,
    pub energy_samples: usize,
    pub forbid_effectively_resonant: bool,
    pub lyapunov_radius: f64,
    pub dag: DagOptions,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_degree: 6,
            k: 3,
            max_beta_prime: 2,
            re_b: 0.0,
            scan_grid: 10_000,
            bisection_tol: 1e-10,
            energy_samples: 3,
            forbid_effectively_resonant: false,
            lyapunov_radius: 1e-3,
            dag: DagOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StationaryPhaseConfig {
    #[serde(default)]
    pub v0z: f64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_x_list")]
    pub x_list: Vec<f64>,
}

fn default_taus() -> Vec<f64> {
    vec![0.5]
}

fn default_x_list() -> Vec<f64> {
    vec![1e-2, 5e-3, 2e-3, 1e-3]
}

impl Default for StationaryPhaseConfig {
    fn default() -> Self {
        Self { v0z: 0.0, taus: default_taus(), x_list: default_x_list() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NelsonConfig {
    pub perturbation: Perturbation,
    pub samples: Vec<f64>,
    #[serde(default = "default_nelson_t_max")]
    pub t_max: f64,
    #[serde(default = "default_nelson_dt")]
    pub dt: f64,
}

fn default_nelson_t_max() -> f64 {
    12.0
}

fn default_nelson_dt() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub critical_points: Vec<CriticalPointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialModel>,
    pub energy: EnergyConfig,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary_phase: Option<StationaryPhaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nelson: Option<NelsonConfig>,
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            RunError::Config(m) => RunError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        match self.mode {
            Mode::Abstract => {
                if self.critical_points.is_empty() {
                    return bad("abstract mode needs at least one entry in criticalPoints".into());
                }
                for cp in &self.critical_points {
                    if cp.hessian.is_empty() {
                        return bad(format!("critical point {:?} has no Hessian eigenvalues", cp.label));
                    }
                    cp.value.to_rational()?;
                    for h in &cp.hessian {
                        if h.to_rational()? == Rational::from_integer(0.into()) {
                            return bad(format!("critical point {:?} has a zero Hessian eigenvalue", cp.label));
                        }
                    }
                    for t in &cp.perturbation {
                        if t.alpha.len() != cp.hessian.len() || t.beta.len() != cp.hessian.len() {
                            return bad(format!("perturbation term of {:?} has the wrong exponent length", cp.label));
                        }
                    }
                }
                let mut labels: Vec<&str> = self.critical_points.iter().map(|c| c.label.as_str()).collect();
                labels.sort_unstable();
                if labels.windows(2).any(|w| w[0] == w[1]) {
                    return bad("critical point labels must be distinct".into());
                }
            }
            Mode::Explicit => {
                let Some(pm) = &self.potential else {
                    return bad("explicit mode needs a potential".into());
                };
                if pm.harmonics.is_empty() || pm.max_order() == 0 {
                    return bad("potential needs at least one harmonic of positive order".into());
                }
                if !self.critical_points.is_empty() {
                    return bad("explicit mode takes a potential, not criticalPoints".into());
                }
            }
        }
        if let EnergyConfig::Interval { interval } = &self.energy {
            if interval[0].to_rational()? >= interval[1].to_rational()? {
                return bad("energy interval bounds must be increasing".into());
            }
        } else if let EnergyConfig::Single { sigma } = &self.energy {
            sigma.to_rational()?;
        }
        let o = &self.options;
        let positive = [
            ("tol", o.tol),
            ("bisectionTol", o.bisection_tol),
            ("lyapunovRadius", o.lyapunov_radius),
            ("dag.seedOffset", o.dag.seed_offset),
            ("dag.ballRadius", o.dag.ball_radius),
            ("dag.wStop", o.dag.w_stop),
            ("dag.holdTime", o.dag.hold_time),
            ("dag.tMax", o.dag.t_max),
            ("dag.rtol", o.dag.rtol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("option {name} must be positive, got {v}"));
            }
        }
        if o.max_degree < 3 {
            return bad(format!("maxDegree must be at least 3, got {}", o.max_degree));
        }
        if o.scan_grid < 2 || o.energy_samples == 0 {
            return bad("scanGrid must be at least 2 and energySamples positive".into());
        }
        if let Some(sp) = &self.stationary_phase {
            if sp.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) || sp.x_list.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
                return bad("stationaryPhase needs positive taus and x in (0, 1)".into());
            }
        }
        if let Some(n) = &self.nelson {
            if n.samples.is_empty() || !(n.dt > 0.0 && n.t_max > n.dt) {
                return bad("nelson needs samples and 0 < dt < tMax".into());
            }
            if matches!(n.perturbation, Perturbation::Monomial { power, .. } if power < 2) {
                return bad("nelson monomial perturbation needs power >= 2".into());
            }
        }
        Ok(())
    }

    /// Exact energies to analyse: the single energy, or evenly spaced
    /// interior points of the interval.
    pub fn energies(&self) -> Result<Vec<Rational>, RunError> {
        match &self.energy {
            EnergyConfig::Single { sigma } => Ok(vec![sigma.to_rational()?]),
            EnergyConfig::Interval { interval } => {
                let lo = interval[0].to_rational()?;
                let hi = interval[1].to_rational()?;
                let n = self.options.energy_samples as i64;
                Ok((1..=n)
                    .map(|i| lo.clone() + (hi.clone() - lo.clone()) * Rational::new(i.into(), (n + 1).into()))
                    .collect())
            }
        }
    }

    pub fn interval(&self) -> Result<Option<(f64, f64)>, RunError> {
        match &self.energy {
            EnergyConfig::Single { .. } => Ok(None),
            EnergyConfig::Interval { interval } => Ok(Some((interval[0].to_f64()?, interval[1].to_f64()?))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> AnalysisConfig {
        AnalysisConfig::from_json(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": ["3/8"]}],
                "energy": {"sigma": 1}}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = minimal();
        assert_eq!(cfg.options, Options::default());
        assert_eq!(cfg.energies().unwrap(), vec![Rational::from_integer(1.into())]);
    }

    #[test]
    fn round_trip_is_stable() {
        let cfg = minimal();
        let again = AnalysisConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn numbers_parse_exactly() {
        assert_eq!(Number::Float(0.375).to_rational().unwrap(), Rational::new(3.into(), 8.into()));
        assert_eq!(Number::from("-12").to_rational().unwrap(), Rational::from_integer((-12).into()));
        assert!(Number::from("x").to_rational().is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            r#"{"mode": "abstract", "criticalPoints": [], "energy": {"sigma": 1}}"#,
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [0]}], "energy": {"sigma": 1}}"#,
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}], "energy": {"interval": [2, 1]}}"#,
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}], "energy": {"sigma": 1}, "options": {"tol": -1}}"#,
            r#"{"mode": "explicit", "energy": {"sigma": 2}}"#,
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}], "energy": {"sigma": 1}, "bogus": 1}"#,
        ];
        for c in cases {
            assert!(matches!(AnalysisConfig::from_json(c), Err(RunError::Config(_))), "{c}");
        }
    }

    #[test]
    fn interval_samples_are_interior() {
        let cfg = AnalysisConfig::from_json(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}],
                "energy": {"interval": ["1/2", 2]}, "options": {"energySamples": 2}}"#,
        )
        .unwrap();
        let e = cfg.energies().unwrap();
        assert_eq!(e, vec![Rational::new(1.into(), 1.into()), Rational::new(3.into(), 2.into())]);
    }
}
