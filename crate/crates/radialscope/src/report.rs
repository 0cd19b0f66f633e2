//! Report data model. Every numeric section records the tolerance it was computed under.

use radialscope_core::dynamics::{DagOptions, HeteroclinicDag, LyapunovGauge, MorseStep, RadialNode, SeedInfo};
use radialscope_core::expansion::{ExpansionTemplate, ExponentData, OscillatorSpec};
use radialscope_core::normalform::NelsonResult;
use radialscope_core::oscverify::SpResult;
use radialscope_core::radial::{RadialClass, Sign};
use radialscope_core::resonance::{EnergyScanResult, ResonanceClass};
use radialscope_core::symalg::{Exponents, PolynomialData};
use radialscope_core::expansion::LogCertificate;
use serde::Serialize;

use crate::config::{AnalysisConfig, Options};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub per_energy: Vec<EnergyReport>,
    pub global: GlobalReport,
    pub stages: Vec<StageStatus>,
    pub provenance: Provenance,
}

impl AnalysisReport {
    pub fn failures(&self) -> impl Iterator<Item = &StageStatus> {
        self.stages.iter().filter(|s| !s.ok)
    }

    /// `0` when every stage succeeded, `4` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures().next().is_some() {
            4
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageStatus {
    pub stage: String,
    pub scope: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl StageStatus {
    pub fn ok(stage: &str, scope: &str) -> Self {
        Self { stage: stage.into(), scope: scope.into(), ok: true, message: None }
    }

    pub fn note(stage: &str, scope: &str, message: impl Into<String>) -> Self {
        Self { stage: stage.into(), scope: scope.into(), ok: true, message: Some(message.into()) }
    }

    pub fn failed(stage: &str, scope: &str, message: impl Into<String>) -> Self {
        Self { stage: stage.into(), scope: scope.into(), ok: false, message: Some(message.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexRepr {
    pub re: String,
    pub im: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyReport {
    /// Exact energy as `"p/q"`.
    pub sigma: String,
    pub sigma_value: f64,
    pub points: Vec<PointReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointReport {
    pub label: String,
    pub sign: Sign,
    /// `"exact"` or `"floating"`.
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonances: Option<ResonanceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalFormSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RadialRecord {
    pub nu: String,
    pub lambda: String,
    /// `r_j` in sorted order.
    pub r: Vec<ComplexRepr>,
    /// Hessian index of each sorted coordinate.
    pub order: Vec<usize>,
    /// Layout bounds `[s, m]`.
    pub blocks: [usize; 2],
    pub class: RadialClass,
    pub outgoing: bool,
    pub hessian_threshold: bool,
    pub hessian_thresholds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResonanceRow {
    pub idx: Exponents,
    pub eigenvalue: ComplexRepr,
    pub class: ResonanceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResonanceSection {
    pub max_degree: u32,
    pub tol: f64,
    pub records: Vec<ResonanceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorRecord {
    pub grade: i64,
    pub generator: PolynomialData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormalFormSection {
    pub max_grade: i64,
    pub tol: f64,
    pub symbol: PolynomialData,
    pub p_norm: PolynomialData,
    pub generators: Vec<GeneratorRecord>,
    pub eff_r: PolynomialData,
    pub eff_nr: PolynomialData,
    /// Largest coefficient of `invert(pNorm) - p` up to `maxGrade`.
    pub round_trip_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_certificate: Option<LogCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionSection {
    pub tol: f64,
    pub re_b: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub max_beta_prime: u32,
    pub oscillators: Vec<OscillatorSpec>,
    pub exponents: ExponentData,
    pub template: ExpansionTemplate,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GlobalReport {
    pub scans: Vec<ScanSection>,
    pub morse: Vec<MorseSection>,
    pub stationary_phase: Vec<StationaryPhaseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nelson: Option<NelsonSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanSection {
    pub label: String,
    pub result: EnergyScanResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeSummary {
    pub from: usize,
    pub to: usize,
    pub seed: SeedInfo,
    pub arrival_time: f64,
    pub samples: usize,
    pub max_p_drift: f64,
    pub min_nu_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UndecidedSummary {
    pub from: usize,
    pub seed: SeedInfo,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MorseSection {
    pub sigma: f64,
    pub options: DagOptions,
    pub nodes: Vec<RadialNode>,
    pub lyapunov: Vec<LyapunovGauge>,
    pub edges: Vec<EdgeSummary>,
    pub undecided: Vec<UndecidedSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<MorseStep>>,
    pub max_p_drift: f64,
    pub max_nu_violation: f64,
    /// Full trajectories, emitted as plot data only.
    #[serde(skip)]
    pub dag: HeteroclinicDag,
}

impl MorseSection {
    pub fn from_dag(dag: HeteroclinicDag, lyapunov: Vec<LyapunovGauge>, sequence: Option<Vec<MorseStep>>) -> Self {
        let edges = dag
            .edges
            .iter()
            .map(|e| EdgeSummary {
                from: e.from,
                to: e.to,
                seed: e.seed,
                arrival_time: e.arrival_time,
                samples: e.trajectory.samples.len(),
                max_p_drift: e.trajectory.max_p_drift,
                min_nu_step: e.trajectory.min_nu_step,
            })
            .collect();
        let undecided =
            dag.undecided.iter().map(|u| UndecidedSummary { from: u.from, seed: u.seed, reason: u.reason.clone() }).collect();
        Self {
            sigma: dag.sigma,
            options: dag.options,
            nodes: dag.nodes.clone(),
            lyapunov,
            edges,
            undecided,
            sequence,
            max_p_drift: dag.max_p_drift(),
            max_nu_violation: dag.max_nu_violation(),
            dag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StationaryPhaseSection {
    pub v0z: f64,
    pub tau: f64,
    pub tol: f64,
    pub result: SpResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NelsonSection {
    pub rtol: f64,
    pub result: NelsonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: AnalysisConfig,
    pub effective_options: Options,
    /// Random seeds consumed by the run; every stage is deterministic, so this stays empty.
    pub seeds: Vec<u64>,
}
