//! Deterministic report emission: canonical JSON, CSV tables and plot data.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::RunError;
use crate::report::AnalysisReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plot,
}

/// Rebuilds every object with keys in sorted order.
fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonicalize(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> String {
    let v = canonicalize(serde_json::to_value(value).expect("report serializes"));
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// A named CSV table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Tabular views of the report; empty tables are dropped.
pub fn tables(report: &AnalysisReport) -> Vec<Table> {
    let mut radial = Table::new(
        "radial_points",
        vec!["sigma", "label", "sign", "mode", "nu", "lambda", "r", "s", "m", "class", "outgoing"],
    );
    let mut resonances = Table::new("resonances", vec!["sigma", "label", "sign", "a", "alpha", "beta", "reR", "imR", "class"]);
    let mut terms = Table::new(
        "expansion_terms",
        vec!["sigma", "label", "reExponent", "imExponent", "logPower", "betaPrime", "k", "profile"],
    );
    for e in &report.per_energy {
        for p in &e.points {
            let sign = serde_json::to_value(p.sign).unwrap().as_str().unwrap_or_default().to_string();
            if let Some(r) = &p.radial {
                let rs: Vec<String> = r.r.iter().map(|z| format!("{}+{}i", z.re, z.im)).collect();
                radial.rows.push(vec![
                    e.sigma.clone(),
                    p.label.clone(),
                    sign.clone(),
                    p.mode.clone(),
                    r.nu.clone(),
                    r.lambda.clone(),
                    rs.join(";"),
                    r.blocks[0].to_string(),
                    r.blocks[1].to_string(),
                    format!("{:?}", r.class),
                    r.outgoing.to_string(),
                ]);
            }
            if let Some(res) = &p.resonances {
                for row in &res.records {
                    resonances.rows.push(vec![
                        e.sigma.clone(),
                        p.label.clone(),
                        sign.clone(),
                        row.idx.a.to_string(),
                        join(&row.idx.alpha),
                        join(&row.idx.beta),
                        row.eigenvalue.re.clone(),
                        row.eigenvalue.im.clone(),
                        format!("{:?}", row.class),
                    ]);
                }
            }
            if let Some(x) = &p.expansion {
                for t in &x.template.terms {
                    terms.rows.push(vec![
                        e.sigma.clone(),
                        p.label.clone(),
                        num(t.exponent.re),
                        num(t.exponent.im),
                        t.log_power.to_string(),
                        join(&t.beta_prime),
                        join(&t.k),
                        t.profile.clone(),
                    ]);
                }
            }
        }
    }

    let mut scans = Table::new("scan_roots", vec!["label", "sigma", "kind", "witness", "residual"]);
    for s in &report.global.scans {
        for root in &s.result.roots {
            let (kind, witness) = match &root.kind {
                radialscope_core::resonance::RootKind::EffRes { witness } => ("effres", witness.to_string()),
                radialscope_core::resonance::RootKind::Threshold { hessian_index } => ("threshold", hessian_index.to_string()),
            };
            scans.rows.push(vec![s.label.clone(), num(root.sigma), kind.into(), witness, num(root.residual)]);
        }
    }

    let mut nodes = Table::new(
        "radial_nodes",
        vec!["sigma", "id", "theta", "nu", "sign", "criticalValue", "hessian", "morseIndex", "reR", "imR", "spectrumResidual"],
    );
    let mut edges = Table::new(
        "dag_edges",
        vec!["sigma", "from", "to", "direction", "orientation", "arrivalTime", "maxPDrift", "minNuStep"],
    );
    let mut sequence = Table::new("morse_sequence", vec!["sigma", "step", "added", "members"]);
    for m in &report.global.morse {
        for n in &m.nodes {
            nodes.rows.push(vec![
                num(m.sigma),
                n.id.to_string(),
                num(n.theta),
                num(n.nu),
                format!("{:?}", n.sign),
                num(n.critical_value),
                num(n.hessian),
                n.morse_index.to_string(),
                num(n.r.re),
                num(n.r.im),
                num(n.spectrum_residual),
            ]);
        }
        for e in &m.edges {
            edges.rows.push(vec![
                num(m.sigma),
                e.from.to_string(),
                e.to.to_string(),
                e.seed.direction.to_string(),
                e.seed.orientation.to_string(),
                num(e.arrival_time),
                num(e.max_p_drift),
                num(e.min_nu_step),
            ]);
        }
        for (i, s) in m.sequence.iter().flatten().enumerate() {
            sequence.rows.push(vec![num(m.sigma), i.to_string(), s.added.to_string(), join(&s.members)]);
        }
    }

    let mut sp = Table::new(
        "stationary_phase",
        vec!["tau", "x", "reIntegral", "imIntegral", "prefactorMod", "prefactorPhase", "peakSigma"],
    );
    for s in &report.global.stationary_phase {
        for x in &s.result.samples {
            sp.rows.push(vec![
                num(s.tau),
                num(x.x),
                num(x.integral.re),
                num(x.integral.im),
                num(x.prefactor_mod),
                num(x.prefactor_phase),
                num(s.result.peak_sigma),
            ]);
        }
    }

    let mut nelson = Table::new("nelson", vec!["x", "deviation", "cauchyRate", "converged"]);
    if let Some(n) = &report.global.nelson {
        for s in &n.result.samples {
            nelson.rows.push(vec![
                join(&s.x.iter().map(|v| num(*v)).collect::<Vec<_>>()),
                num(s.deviation),
                s.rate.map(num).unwrap_or_default(),
                s.converged.to_string(),
            ]);
        }
    }

    let mut stages = Table::new("stages", vec!["stage", "scope", "ok", "message"]);
    for s in &report.stages {
        stages.rows.push(vec![s.stage.clone(), s.scope.clone(), s.ok.to_string(), s.message.clone().unwrap_or_default()]);
    }

    [radial, resonances, terms, scans, nodes, edges, sequence, sp, nelson, stages]
        .into_iter()
        .filter(|t| !t.rows.is_empty())
        .collect()
}

/// x-y series: one file per witnessing trajectory and one prefactor curve per `tau`.
pub fn plot_series(report: &AnalysisReport) -> Vec<Table> {
    let mut out = Vec::new();
    for (mi, m) in report.global.morse.iter().enumerate() {
        for (k, e) in m.dag.edges.iter().enumerate() {
            let mut t = Table::new(format!("trajectory_{mi}_{}_{}_{k}", e.from, e.to), vec!["t", "theta", "nu", "mu", "p"]);
            for s in &e.trajectory.samples {
                t.rows.push(vec![num(s.t), num(s.theta), num(s.nu), num(s.mu), num(s.p)]);
            }
            out.push(t);
        }
    }
    for (i, s) in report.global.stationary_phase.iter().enumerate() {
        let mut t = Table::new(format!("prefactor_{i}"), vec!["x", "prefactorMod", "prefactorPhase", "deviation"]);
        for x in &s.result.samples {
            t.rows.push(vec![num(x.x), num(x.prefactor_mod), num(x.prefactor_phase), num(x.deviation)]);
        }
        out.push(t);
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, RunError> {
    fs::write(&path, contents).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Writes the requested formats under `dir`; returns the written paths in order.
pub fn emit(report: &AnalysisReport, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Json => written.push(write(dir.join("report.json"), &to_canonical_json(report))?),
            Format::Csv => {
                for t in tables(report) {
                    written.push(write(dir.join(format!("{}.csv", t.name)), &t.to_csv())?);
                }
            }
            Format::Plot => {
                let plots = dir.join("plots");
                fs::create_dir_all(&plots).map_err(|source| RunError::Io { path: plots.clone(), source })?;
                for t in plot_series(report) {
                    written.push(write(plots.join(format!("{}.csv", t.name)), &t.to_csv())?);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_recursively() {
        let v = json!({"b": 1, "a": {"d": [ {"z": 0, "y": 1} ], "c": 2}});
        let s = to_canonical_json(&v);
        let a = s.find("\"a\"").unwrap();
        let b = s.find("\"b\"").unwrap();
        let y = s.find("\"y\"").unwrap();
        let z = s.find("\"z\"").unwrap();
        assert!(a < b && y < z);
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new("t", vec!["a", "b"]);
        t.rows.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",1\n");
    }
}
