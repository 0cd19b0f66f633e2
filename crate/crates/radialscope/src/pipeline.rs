//! Orchestration: locate, linearize, resonate, normal form, expand; flow and
//! Morse data in explicit mode; stationary-phase and conjugacy checks.

use num_complex::Complex;
use radialscope_core::dynamics::{
    critical_points, heteroclinic_dag, locate_radial_points, lyapunov_check, morse_sequence, PotentialModel,
};
use radialscope_core::expansion::{
    exponent_data, expansion_template, log_input_from_normal_form, log_variable_recursion, LogVariableSet, OscillatorSpec,
};
use radialscope_core::normalform::{nelson_limit, reduce_to_normal_form, NelsonCase};
use radialscope_core::oscverify::{stationary_phase_check, StationaryPhaseCase};
use radialscope_core::radial::{hessian_thresholds, linearization_spectrum, CriticalPointSpec, RadialPoint, Sign};
use radialscope_core::resonance::{
    enumerate_resonances, scan_effectively_resonant_energies, RootKind, ScanOptions, ScanRoot,
};
use radialscope_core::symalg::{Block, Exponents, TermData, WeightedPolynomial};
use radialscope_core::{Error, Rational, Scalar};
use rayon::prelude::*;

use crate::config::{AnalysisConfig, Mode, OscillatorConfig, Options, StationaryPhaseConfig};
use crate::error::RunError;
use crate::report::*;

/// Subcommand selecting which stages run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    ScanEnergies,
    NormalForm,
    Flow,
    Morse,
    Expansion,
    StationaryPhase,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::ScanEnergies => "scan-energies",
            Command::NormalForm => "normal-form",
            Command::Flow => "flow",
            Command::Morse => "morse",
            Command::Expansion => "expansion",
            Command::StationaryPhase => "stationary-phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Stages {
    scan: bool,
    points: bool,
    resonance: bool,
    normal_form: bool,
    expansion: bool,
    dag: bool,
    sequence: bool,
    stationary_phase: bool,
    nelson: bool,
}

impl Stages {
    fn for_command(cmd: Command, cfg: &AnalysisConfig) -> Self {
        let none = Stages {
            scan: false,
            points: false,
            resonance: false,
            normal_form: false,
            expansion: false,
            dag: false,
            sequence: false,
            stationary_phase: false,
            nelson: false,
        };
        let explicit = cfg.mode == Mode::Explicit;
        match cmd {
            Command::Analyze => Stages {
                scan: true,
                points: true,
                resonance: true,
                normal_form: true,
                expansion: true,
                dag: explicit,
                sequence: explicit,
                stationary_phase: cfg.stationary_phase.is_some(),
                nelson: cfg.nelson.is_some(),
            },
            Command::ScanEnergies => Stages { scan: true, ..none },
            Command::NormalForm => Stages { points: true, resonance: true, normal_form: true, ..none },
            Command::Expansion => Stages { points: true, resonance: true, normal_form: true, expansion: true, ..none },
            Command::Flow => Stages { dag: true, ..none },
            Command::Morse => Stages { dag: true, sequence: true, ..none },
            Command::StationaryPhase => Stages { stationary_phase: true, ..none },
        }
    }
}

pub fn run_analysis(config: &AnalysisConfig) -> Result<AnalysisReport, RunError> {
    run_command(config, Command::Analyze)
}

/// Runs the stages of `cmd`. Hard failures (config, forbidden energy) abort;
/// numerical stage failures are recorded in `stages` and leave other output intact.
pub fn run_command(config: &AnalysisConfig, cmd: Command) -> Result<AnalysisReport, RunError> {
    config.validate()?;
    let stages = Stages::for_command(cmd, config);
    if cmd == Command::ScanEnergies && config.interval()?.is_none() {
        return Err(RunError::Config("scan-energies needs an energy interval".into()));
    }
    if matches!(cmd, Command::Flow | Command::Morse) && config.mode != Mode::Explicit {
        return Err(RunError::Config(format!("{} needs an explicit potential", cmd.name())));
    }
    let opts = &config.options;
    let mut status = Vec::new();
    let mut global = GlobalReport::default();

    let exact_cps = abstract_points(config)?;
    let explicit_cps = match (&config.potential, config.mode) {
        (Some(pm), Mode::Explicit) => Some(explicit_points(pm)?),
        _ => None,
    };

    if stages.scan {
        if let Some(interval) = config.interval()? {
            let specs: Vec<CriticalPointSpec<f64>> = match &explicit_cps {
                Some(cps) => cps.clone(),
                None => exact_cps.iter().map(|(cp, _)| cp.to_f64()).collect(),
            };
            let scan_opts = ScanOptions { grid: opts.scan_grid, bisection_tol: opts.bisection_tol };
            for cp in &specs {
                if interval.0 <= cp.value {
                    status.push(StageStatus::note("scan", &cp.label, "interval reaches the critical value; skipped"));
                    continue;
                }
                match scan_effectively_resonant_energies(cp, interval, Sign::Plus, scan_opts) {
                    Ok(result) => {
                        if opts.forbid_effectively_resonant && !result.roots.is_empty() {
                            return Err(RunError::Forbidden {
                                message: format!("{} forbidden energies for {} in the interval", result.roots.len(), cp.label),
                                evidence: result.roots.clone(),
                            });
                        }
                        status.push(StageStatus::ok("scan", &cp.label));
                        global.scans.push(ScanSection { label: cp.label.clone(), result });
                    }
                    Err(e) => status.push(StageStatus::failed("scan", &cp.label, e.to_string())),
                }
            }
        }
    }

    let energies = config.energies()?;
    let mut per_energy = Vec::new();
    if stages.points {
        for sigma in &energies {
            let sigma_f = sigma.as_f64();
            let scope = sigma.to_repr();
            let results: Vec<Result<(PointReport, Vec<StageStatus>), RunError>> = match &explicit_cps {
                None => exact_cps
                    .par_iter()
                    .flat_map_iter(|(cp, extra)| [Sign::Plus, Sign::Minus].map(|s| (cp, extra, s)))
                    .map(|(cp, extra, sign)| analyze_exact_or_float(cp, extra, sigma, sign, opts, &stages))
                    .collect(),
                Some(cps) => {
                    if let Some(v) = cps.iter().map(|c| c.value).find(|v| (sigma_f - v).abs() <= opts.tol) {
                        return Err(RunError::Forbidden {
                            message: format!("energy {sigma_f} equals the critical value {v}"),
                            evidence: Vec::new(),
                        });
                    }
                    let none = PointExtras::default();
                    cps.par_iter()
                        .flat_map_iter(|cp| [Sign::Plus, Sign::Minus].map(|s| (cp, s)))
                        .map(|(cp, sign)| analyze_point(cp, &none, &sigma_f, sign, opts, &stages))
                        .collect()
                }
            };
            let mut points = Vec::new();
            for r in results {
                let (point, st) = r?;
                points.push(point);
                status.extend(st.into_iter().map(|mut s| {
                    s.scope = format!("sigma={scope} {}", s.scope);
                    s
                }));
            }
            per_energy.push(EnergyReport { sigma: scope, sigma_value: sigma_f, points });
        }
    }

    if stages.dag {
        let pm = config.potential.as_ref().expect("explicit mode has a potential");
        for sigma in &energies {
            let sigma_f = sigma.as_f64();
            let scope = format!("sigma={}", sigma.to_repr());
            let nodes = match locate_radial_points(pm, sigma_f, opts.tol) {
                Ok(n) => n,
                Err(Error::ThresholdEnergy { sigma }) => {
                    return Err(RunError::Forbidden {
                        message: format!("energy {sigma} is a critical value of the potential"),
                        evidence: Vec::new(),
                    })
                }
                Err(e) => {
                    status.push(StageStatus::failed("locate", &scope, e.to_string()));
                    continue;
                }
            };
            let mut gauges = Vec::new();
            for node in nodes.iter().filter(|n| n.outgoing()) {
                match lyapunov_check(pm, sigma_f, node, opts.lyapunov_radius) {
                    Ok(g) => gauges.push(g),
                    Err(e) => status.push(StageStatus::failed("lyapunov", &format!("{scope} node {}", node.id), e.to_string())),
                }
            }
            let dag = match heteroclinic_dag(pm, sigma_f, &opts.dag) {
                Ok(d) => d,
                Err(e) => {
                    status.push(StageStatus::failed("flowout", &scope, e.to_string()));
                    continue;
                }
            };
            status.push(StageStatus::ok("flowout", &scope));
            let sequence = if stages.sequence {
                match morse_sequence(&dag) {
                    Ok(s) => {
                        status.push(StageStatus::ok("morse", &scope));
                        Some(s)
                    }
                    Err(e) => {
                        status.push(StageStatus::failed("morse", &scope, e.to_string()));
                        None
                    }
                }
            } else {
                None
            };
            global.morse.push(MorseSection::from_dag(dag, gauges, sequence));
        }
    }

    if stages.stationary_phase {
        let sp = config.stationary_phase.clone().unwrap_or_default();
        global.stationary_phase = stationary_phase_sections(&sp, &mut status);
    }

    if stages.nelson {
        if let Some(n) = &config.nelson {
            let mut case = NelsonCase::one_dimensional(n.perturbation, &n.samples);
            case.t_max = n.t_max;
            case.dt = n.dt;
            match nelson_limit(&case) {
                Ok(result) => {
                    status.push(StageStatus::ok("nelson", "global"));
                    global.nelson = Some(NelsonSection { rtol: case.rtol, result });
                }
                Err(e) => status.push(StageStatus::failed("nelson", "global", e.to_string())),
            }
        }
    }

    Ok(AnalysisReport {
        per_energy,
        global,
        stages: status,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: cmd.name().into(),
            config: config.clone(),
            effective_options: opts.clone(),
            seeds: Vec::new(),
        },
    })
}

fn stationary_phase_sections(sp: &StationaryPhaseConfig, status: &mut Vec<StageStatus>) -> Vec<StationaryPhaseSection> {
    let results: Vec<_> = sp
        .taus
        .par_iter()
        .map(|&tau| {
            let case = StationaryPhaseCase::gaussian(sp.v0z, tau, sp.x_list.clone());
            (tau, case.tol, stationary_phase_check(&case))
        })
        .collect();
    let mut out = Vec::new();
    for (tau, tol, r) in results {
        let scope = format!("tau={tau:?}");
        match r {
            Ok(result) => {
                status.push(StageStatus::ok("stationary-phase", &scope));
                out.push(StationaryPhaseSection { v0z: sp.v0z, tau, tol, result });
            }
            Err(e) => status.push(StageStatus::failed("stationary-phase", &scope, e.to_string())),
        }
    }
    out
}

/// Per-point inputs beyond the critical point itself.
#[derive(Debug, Clone, Default)]
struct PointExtras {
    perturbation: Vec<TermData>,
    oscillators: Vec<OscillatorConfig>,
}

fn abstract_points(config: &AnalysisConfig) -> Result<Vec<(CriticalPointSpec<Rational>, PointExtras)>, RunError> {
    if config.mode != Mode::Abstract {
        return Ok(Vec::new());
    }
    config
        .critical_points
        .iter()
        .map(|c| {
            let hessian = c.hessian.iter().map(|h| h.to_rational()).collect::<Result<Vec<_>, _>>()?;
            let cp = CriticalPointSpec::new(c.label.clone(), c.value.to_rational()?, hessian)
                .map_err(|e| RunError::Config(e.to_string()))?;
            Ok((cp, PointExtras { perturbation: c.perturbation.clone(), oscillators: c.oscillators.clone() }))
        })
        .collect()
}

fn explicit_points(pm: &PotentialModel) -> Result<Vec<CriticalPointSpec<f64>>, RunError> {
    let thetas = critical_points(pm).map_err(|e| RunError::Stage { stage: "locate".into(), message: e.to_string() })?;
    thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            CriticalPointSpec::new(format!("theta{i}"), pm.value(t), vec![pm.derivative(t, 2)])
                .map_err(|e| RunError::Stage { stage: "locate".into(), message: e.to_string() })
        })
        .collect()
}

/// Exact analysis when the square roots are rational, floating otherwise.
fn analyze_exact_or_float(
    cp: &CriticalPointSpec<Rational>,
    extra: &PointExtras,
    sigma: &Rational,
    sign: Sign,
    opts: &Options,
    stages: &Stages,
) -> Result<(PointReport, Vec<StageStatus>), RunError> {
    match linearization_spectrum(cp, sigma, sign) {
        Err(Error::InexactRoot(_)) => analyze_point(&cp.to_f64(), extra, &sigma.as_f64(), sign, opts, stages),
        _ => analyze_point(cp, extra, sigma, sign, opts, stages),
    }
}

fn complex_repr<T: Scalar>(z: &Complex<T>) -> ComplexRepr {
    ComplexRepr { re: z.re.to_repr(), im: z.im.to_repr() }
}

fn threshold_evidence<T: Scalar>(rp: &RadialPoint<T>) -> RunError {
    let half = T::half();
    let idx = rp.r.iter().position(|z| (z.re.clone() - half.clone()).as_f64().abs() < 1e-9 && z.im.is_zero());
    let evidence = idx
        .map(|j| {
            vec![ScanRoot {
                sigma: rp.sigma.as_f64(),
                kind: RootKind::Threshold { hessian_index: rp.order[j] },
                residual: 0.0,
            }]
        })
        .unwrap_or_default();
    RunError::Forbidden {
        message: format!("energy {} is a Hessian threshold of {}", rp.sigma.to_repr(), rp.cp.label),
        evidence,
    }
}

fn max_abs_coeff<T: Scalar>(p: &WeightedPolynomial<T>) -> f64 {
    p.terms().map(|(_, c)| c.re.as_f64().abs().max(c.im.as_f64().abs())).fold(0.0, f64::max)
}

fn perturbation_poly<T: Scalar>(rp: &RadialPoint<T>, terms: &[TermData]) -> Result<WeightedPolynomial<T>, RunError> {
    let mut p = WeightedPolynomial::zero(rp.layout);
    for t in terms {
        let parse = |s: &str| {
            T::parse_repr(s)
                .or_else(|| Rational::parse_repr(s).map(|q| T::from_f64_approx(q.as_f64())))
                .ok_or_else(|| RunError::Config(format!("bad perturbation coefficient {s:?}")))
        };
        p.add_term(Exponents::new(t.a, t.alpha.clone(), t.beta.clone()), Complex::new(parse(&t.re)?, parse(&t.im)?));
    }
    Ok(p)
}

fn oscillators_for<T: Scalar>(rp: &RadialPoint<T>, overrides: &[OscillatorConfig]) -> Result<Vec<OscillatorSpec>, String> {
    let triple: Vec<Complex<f64>> = rp.r_in(Block::TriplePrime).iter().map(|z| Complex::new(z.re.as_f64(), z.im.as_f64())).collect();
    if !overrides.is_empty() {
        if overrides.len() != triple.len() {
            return Err(format!("expected {} oscillator overrides, got {}", triple.len(), overrides.len()));
        }
        return overrides.iter().map(|o| OscillatorSpec::new(o.p, o.q, o.c).map_err(|e| e.to_string())).collect();
    }
    triple
        .iter()
        .map(|r| {
            let d = r * (Complex::new(1.0, 0.0) - r);
            OscillatorSpec::new(1.0, 0.0, d.re / 4.0).map_err(|e| e.to_string())
        })
        .collect()
}

fn analyze_point<T: Scalar>(
    cp: &CriticalPointSpec<T>,
    extra: &PointExtras,
    sigma: &T,
    sign: Sign,
    opts: &Options,
    stages: &Stages,
) -> Result<(PointReport, Vec<StageStatus>), RunError> {
    let scope = format!("{} {}", cp.label, if sign == Sign::Plus { "+" } else { "-" });
    let mut status = Vec::new();
    let mut report = PointReport {
        label: cp.label.clone(),
        sign,
        mode: T::MODE.into(),
        skipped: None,
        radial: None,
        resonances: None,
        normal_form: None,
        expansion: None,
    };
    let rp = match linearization_spectrum(cp, sigma, sign) {
        Ok(rp) => rp,
        Err(Error::NoRealRadialPoint { .. }) => {
            report.skipped = Some("energy does not exceed the critical value".into());
            return Ok((report, status));
        }
        Err(e) => {
            status.push(StageStatus::failed("radial", &scope, e.to_string()));
            return Ok((report, status));
        }
    };
    if rp.hessian_threshold {
        return Err(threshold_evidence(&rp));
    }
    report.radial = Some(RadialRecord {
        nu: rp.nu.to_repr(),
        lambda: rp.lambda.to_repr(),
        r: rp.r.iter().map(complex_repr).collect(),
        order: rp.order.clone(),
        blocks: [rp.layout.s(), rp.layout.m()],
        class: rp.classify(),
        outgoing: rp.outgoing(),
        hessian_threshold: false,
        hessian_thresholds: hessian_thresholds(cp).iter().map(Scalar::to_repr).collect(),
    });
    status.push(StageStatus::ok("radial", &scope));

    if stages.resonance {
        match enumerate_resonances(&rp, opts.max_degree, opts.tol) {
            Ok(records) => {
                if opts.forbid_effectively_resonant {
                    if let Some(w) = records.iter().find(|r| r.class.is_effectively_resonant()) {
                        return Err(RunError::Forbidden {
                            message: format!("energy {} is effectively resonant for {}", rp.sigma.to_repr(), cp.label),
                            evidence: vec![ScanRoot {
                                sigma: rp.sigma.as_f64(),
                                kind: RootKind::EffRes { witness: w.idx.clone() },
                                residual: 0.0,
                            }],
                        });
                    }
                }
                report.resonances = Some(ResonanceSection {
                    max_degree: opts.max_degree,
                    tol: opts.tol,
                    records: records
                        .iter()
                        .map(|r| ResonanceRow { idx: r.idx.clone(), eigenvalue: complex_repr(&r.eigenvalue), class: r.class })
                        .collect(),
                });
                status.push(StageStatus::ok("resonance", &scope));
            }
            Err(e) => status.push(StageStatus::failed("resonance", &scope, e.to_string())),
        }
    }

    let mut log_set: Option<LogVariableSet<T>> = None;
    if stages.normal_form {
        let max_grade = opts.max_degree as i64 - 2;
        let built = rp.model().map_err(|e| e.to_string()).and_then(|model| {
            let pert = perturbation_poly(&rp, &extra.perturbation).map_err(|e| e.to_string())?;
            let p = &model.p0() + &pert;
            let nf = reduce_to_normal_form(&p, &model, max_grade, opts.tol).map_err(|e| e.to_string())?;
            let back = nf.invert().map_err(|e| e.to_string())?;
            Ok((p, nf, back))
        });
        match built {
            Ok((p, nf, back)) => {
                let residual = max_abs_coeff(&(&back - &p.truncate(max_grade)));
                let mut certificate = None;
                if !nf.r_eff_r.is_zero() {
                    let logs = log_input_from_normal_form(rp.layout, &rp.lambda, &rp.r, &nf.r_eff_r)
                        .and_then(|input| log_variable_recursion(&input, opts.tol));
                    match logs {
                        Ok(set) => {
                            certificate = Some(set.certificate.clone());
                            if !set.certificate.holds() {
                                status.push(StageStatus::failed("log-variables", &scope, "certificate does not hold"));
                            }
                            log_set = Some(set);
                        }
                        Err(e) => status.push(StageStatus::failed("log-variables", &scope, e.to_string())),
                    }
                }
                report.normal_form = Some(NormalFormSection {
                    max_grade,
                    tol: opts.tol,
                    symbol: p.to_data(),
                    p_norm: nf.p_norm.to_data(),
                    generators: nf.generators.iter().map(|(g, b)| GeneratorRecord { grade: *g, generator: b.to_data() }).collect(),
                    eff_r: nf.r_eff_r.to_data(),
                    eff_nr: nf.r_eff_nr.to_data(),
                    round_trip_residual: residual,
                    log_certificate: certificate,
                });
                let scale = 1.0 + max_abs_coeff(&p);
                if residual > opts.tol.max(1e-9) * scale {
                    status.push(StageStatus::failed("normal-form", &scope, format!("round trip residual {residual:e}")));
                } else {
                    status.push(StageStatus::ok("normal-form", &scope));
                }
            }
            Err(e) => status.push(StageStatus::failed("normal-form", &scope, e)),
        }
    }

    if stages.expansion && rp.outgoing() {
        let rp64 = rp.to_f64();
        let built = oscillators_for(&rp, &extra.oscillators).and_then(|osc| {
            let exps = exponent_data(&rp64, opts.re_b, &osc, opts.k, opts.max_beta_prime).map_err(|e| e.to_string())?;
            let template = expansion_template(&rp64, &exps, log_set.as_ref()).map_err(|e| e.to_string())?;
            Ok((osc, exps, template))
        });
        match built {
            Ok((oscillators, exponents, template)) => {
                report.expansion = Some(ExpansionSection {
                    tol: opts.tol,
                    re_b: opts.re_b,
                    k: opts.k,
                    max_beta_prime: opts.max_beta_prime,
                    oscillators,
                    exponents,
                    template,
                });
                status.push(StageStatus::ok("expansion", &scope));
            }
            Err(e) => status.push(StageStatus::failed("expansion", &scope, e)),
        }
    }
    Ok((report, status))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> AnalysisConfig {
        AnalysisConfig::from_json(text).unwrap()
    }

    #[test]
    fn single_minimum_gives_quarter_pair() {
        let cfg = config(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": ["3/8"]}],
                "energy": {"sigma": 1}}"#,
        );
        let report = run_analysis(&cfg).unwrap();
        assert_eq!(report.exit_code(), 0, "{:?}", report.stages);
        let pts = &report.per_energy[0].points;
        let plus = pts.iter().find(|p| p.sign == Sign::Plus).unwrap();
        let radial = plus.radial.as_ref().unwrap();
        assert_eq!(radial.r, vec![ComplexRepr { re: "1/4".into(), im: "0/1".into() }]);
        assert_eq!(plus.mode, "exact");
        let exps = &plus.expansion.as_ref().unwrap().exponents;
        assert!((exps.big_b - 0.375).abs() < 1e-15);
        assert!(pts.iter().find(|p| p.sign == Sign::Minus).unwrap().expansion.is_none());
    }

    #[test]
    fn irrational_roots_fall_back_to_floats() {
        let cfg = config(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}],
                "energy": {"sigma": 3}}"#,
        );
        let report = run_analysis(&cfg).unwrap();
        assert!(report.per_energy[0].points.iter().all(|p| p.mode == "floating"));
    }

    #[test]
    fn threshold_energy_is_forbidden() {
        let cfg = config(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": ["1/2"]}],
                "energy": {"sigma": 1}}"#,
        );
        let err = run_analysis(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        match err {
            RunError::Forbidden { evidence, .. } => assert_eq!(evidence.len(), 1),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn effectively_resonant_energy_can_be_forbidden() {
        let base = r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [-12, -4]}],
                "energy": {"sigma": 1}, "options": {"forbidEffectivelyResonant": FLAG}}"#;
        let err = run_analysis(&config(&base.replace("FLAG", "true"))).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let report = run_analysis(&config(&base.replace("FLAG", "false"))).unwrap();
        let plus = report.per_energy[0].points.iter().find(|p| p.sign == Sign::Plus).unwrap();
        let nf = plus.normal_form.as_ref().unwrap();
        assert_eq!(nf.round_trip_residual, 0.0);
    }

    #[test]
    fn perturbation_is_normalized_away() {
        let cfg = config(
            r#"{"mode": "abstract",
                "criticalPoints": [{"label": "z", "value": 0, "hessian": ["3/8"],
                    "perturbation": [{"a": 0, "alpha": [3], "beta": [0], "re": "1", "im": "0"}]}],
                "energy": {"sigma": 1}}"#,
        );
        let report = run_analysis(&cfg).unwrap();
        let plus = report.per_energy[0].points.iter().find(|p| p.sign == Sign::Plus).unwrap();
        let nf = plus.normal_form.as_ref().unwrap();
        assert!(!nf.generators.is_empty());
        assert_eq!(nf.round_trip_residual, 0.0);
        assert!(nf.eff_r.terms.is_empty());
    }

    #[test]
    fn flow_needs_explicit_mode() {
        let cfg = config(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}], "energy": {"sigma": 3}}"#,
        );
        assert_eq!(run_command(&cfg, Command::Flow).unwrap_err().exit_code(), 2);
        assert_eq!(run_command(&cfg, Command::ScanEnergies).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn scan_reports_effectively_resonant_energy() {
        let cfg = config(
            r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [-12, -4]}],
                "energy": {"interval": ["1/2", 2]}}"#,
        );
        let report = run_command(&cfg, Command::ScanEnergies).unwrap();
        let scan = &report.global.scans[0].result;
        let roots: Vec<f64> = scan.effectively_resonant().map(|(s, _)| *s).collect();
        assert!(roots.iter().any(|s| (s - 1.0).abs() < 1e-8), "{roots:?}");
    }
}
