//! Experiment runner: generate an instance, run each scheduler on its own
//! copy of the graph, re-verify every schedule and tabulate the outcome.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use ttsched_core::baselines::Heuristic;
use ttsched_core::exact::{build_fcs_model, build_hfs_model, SolveStatus};
use ttsched_core::llf::{admit_with, FlowTrace};
use ttsched_core::verify::verify_schedule;
use ttsched_core::{FlowSpec, Mode, Schedule, Tecg};

use crate::gen::{gen_flows, gen_topology, FlowGen, TopologySpec};
use crate::timed::solve_with_limit;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    HfsExact,
    FcsExact,
    HfsLlf,
    BfsS,
    Iras,
    JrasTseg,
}

impl Scheme {
    pub const ALL: [Scheme; 6] =
        [Scheme::HfsExact, Scheme::FcsExact, Scheme::HfsLlf, Scheme::BfsS, Scheme::Iras, Scheme::JrasTseg];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::HfsExact => "hfs_exact",
            Scheme::FcsExact => "fcs_exact",
            Scheme::HfsLlf => "hfs_llf",
            Scheme::BfsS => "bfs_s",
            Scheme::Iras => "iras",
            Scheme::JrasTseg => "jras_tseg",
        }
    }

    /// Semantics the produced schedule is checked against.
    pub fn mode(self) -> Mode {
        match self {
            Scheme::HfsExact | Scheme::HfsLlf => Mode::Hfs,
            _ => Mode::Fcs,
        }
    }

    pub fn heuristic(self) -> Option<Heuristic> {
        match self {
            Scheme::HfsLlf => Some(Heuristic::HfsLlf),
            Scheme::BfsS => Some(Heuristic::BfsS),
            Scheme::Iras => Some(Heuristic::Iras),
            Scheme::JrasTseg => Some(Heuristic::JrasTseg),
            Scheme::HfsExact | Scheme::FcsExact => None,
        }
    }

    pub fn fidelity(self) -> &'static str {
        self.heuristic().map_or("faithful", Heuristic::fidelity)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ttsched_core::Error::UnknownName(s.into()).into())
    }
}

/// Result of running one scheduler on one instance.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub schedule: Schedule,
    pub traces: Option<Vec<FlowTrace>>,
    /// `proven_optimal`, `best_known` or `heuristic`.
    pub status: &'static str,
    pub wall_ms: f64,
}

pub fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::ProvenOptimal => "proven_optimal",
        SolveStatus::BestKnown => "best_known",
    }
}

/// Runs `scheme` on a copy of `base`.
pub fn run_scheme(scheme: Scheme, base: &Tecg, flows: &[FlowSpec], time_limit: f64) -> Result<Outcome, Error> {
    let start = Instant::now();
    let (schedule, traces, status) = match scheme.heuristic() {
        Some(h) => {
            let mut g = base.clone();
            let (s, t) = admit_with(&mut g, flows, |g, f| h.schedule_flow(g, f))?;
            (s, Some(t), "heuristic")
        }
        None => {
            let model = if scheme == Scheme::HfsExact { build_hfs_model(base, flows)? } else { build_fcs_model(base, flows)? };
            let r = solve_with_limit(&model, time_limit)?;
            (r.schedule, None, status_name(r.status))
        }
    };
    Ok(Outcome { schedule, traces, status, wall_ms: start.elapsed().as_secs_f64() * 1e3 })
}

fn default_name() -> String {
    "experiment".into()
}
fn default_time_limit() -> f64 {
    60.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub topology: TopologySpec,
    pub flow_gen: FlowGen,
    /// Flow counts to sweep; empty means just `flow_gen.count`.
    #[serde(default)]
    pub counts: Vec<usize>,
    pub schedulers: Vec<Scheme>,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Free text copied into the JSON report, e.g. desk-scale substitutions.
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub flows_given: usize,
    pub flows_admitted: usize,
    pub packets_admitted: usize,
    pub wall_ms: f64,
    pub verified: bool,
    pub status: String,
    pub fidelity: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub note: Option<String>,
    pub gamma: u32,
    pub rows: Vec<ResultRow>,
}

impl Report {
    pub fn row(&self, scheme: Scheme, flows_given: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.scheme == scheme.name() && r.flows_given == flows_given)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    /// `scheme,flows_given,metric,value` rows for plotting. Wall time is
    /// left out so the file is identical across runs.
    pub fn to_long_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scheme", "flows_given", "metric", "value"]).expect("writing to memory");
        for r in &self.rows {
            let given = r.flows_given.to_string();
            for (metric, value) in
                [("flows_admitted", r.flows_admitted.to_string()), ("packets_admitted", r.packets_admitted.to_string())]
            {
                w.write_record([r.scheme.as_str(), given.as_str(), metric, value.as_str()]).expect("writing to memory");
            }
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), Error> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: &str| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put("results.csv", &self.to_csv())?;
        put("results_long.csv", &self.to_long_csv())?;
        put("results.json", &serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Instance generated for one sweep point.
pub fn instance(config: &ExperimentConfig, count: usize) -> Result<(Tecg, Vec<FlowSpec>), Error> {
    let topo = Arc::new(gen_topology(&config.topology, config.flow_gen.seed)?);
    let gen = FlowGen { count, ..config.flow_gen.clone() };
    let flows = gen_flows(&gen, &topo)?;
    Ok((Tecg::new(topo, gen.hypercycle()?), flows))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, Error> {
    if !(config.time_limit > 0.0) {
        return Err(ttsched_core::Error::NonPositiveTimeLimit.into());
    }
    let counts = if config.counts.is_empty() { vec![config.flow_gen.count] } else { config.counts.clone() };
    let mut rows = Vec::new();
    for &count in &counts {
        let (base, flows) = instance(config, count)?;
        for &scheme in &config.schedulers {
            let row = match run_scheme(scheme, &base, &flows, config.time_limit) {
                Ok(out) => {
                    let report = verify_schedule(&base, &flows, &out.schedule, scheme.mode());
                    ResultRow {
                        scheme: scheme.name().into(),
                        flows_given: flows.len(),
                        flows_admitted: out.schedule.admitted_count(),
                        packets_admitted: out.schedule.packets_admitted(),
                        wall_ms: out.wall_ms,
                        verified: report.ok,
                        status: out.status.into(),
                        fidelity: scheme.fidelity().into(),
                    }
                }
                Err(e) => ResultRow {
                    scheme: scheme.name().into(),
                    flows_given: flows.len(),
                    flows_admitted: 0,
                    packets_admitted: 0,
                    wall_ms: 0.0,
                    verified: false,
                    status: format!("error: {e}"),
                    fidelity: scheme.fidelity().into(),
                },
            };
            rows.push(row);
        }
    }
    let report = Report { name: config.name.clone(), note: config.note.clone(), gamma: config.flow_gen.hypercycle()?.gamma, rows };
    if let Some(dir) = &config.output_dir {
        report.write_to(dir)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!(Scheme::Iras.fidelity(), "approximate");
        assert_eq!(Scheme::HfsExact.fidelity(), "faithful");
    }

    #[test]
    fn config_json_shape() {
        let text = r#"{
            "topology": {"erdos_renyi": {"n": 10, "p": 0.4}},
            "flow_gen": {"count": 6, "cycles": [3, 4], "arrival": {"range": [1, 12]}, "seed": 3},
            "schedulers": ["hfs_llf", "iras"]
        }"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.time_limit, 60.0);
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows.iter().all(|r| r.verified));
        assert_eq!(r.to_long_csv(), run_experiment(&c).unwrap().to_long_csv());
    }

    #[test]
    fn zero_time_limit_is_rejected() {
        let c = ExperimentConfig {
            name: "x".into(),
            topology: TopologySpec::Afdx,
            flow_gen: FlowGen::new(2, &[2], 1),
            counts: vec![],
            schedulers: vec![Scheme::HfsExact],
            time_limit: 0.0,
            output_dir: None,
            note: None,
        };
        assert!(run_experiment(&c).is_err());
    }
}
