//! Builtin topologies and seeded flow generation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use ttsched_core::{FlowSpec, Hypercycle, NodeId, Topology};

use crate::Error;

/// Named topology or a file to load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    Afdx,
    Ladder,
    ErdosRenyi { n: usize, p: f64 },
    File(std::path::PathBuf),
}

impl std::str::FromStr for TopologySpec {
    type Err = Error;

    /// `afdx`, `ladder`, `er:<n>:<p>` or a path to a topology JSON file.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "afdx" => Ok(TopologySpec::Afdx),
            "ladder" => Ok(TopologySpec::Ladder),
            _ => {
                if let Some(rest) = s.strip_prefix("er:") {
                    let (n, p) = rest.split_once(':').ok_or_else(|| Error::Config(format!("expected er:<n>:<p>, got {s:?}")))?;
                    let n = n.parse().map_err(|_| Error::Config(format!("bad node count in {s:?}")))?;
                    let p = p.parse().map_err(|_| Error::Config(format!("bad probability in {s:?}")))?;
                    return Ok(TopologySpec::ErdosRenyi { n, p });
                }
                if s.ends_with(".json") || std::path::Path::new(s).exists() {
                    return Ok(TopologySpec::File(s.into()));
                }
                Err(Error::Core(ttsched_core::Error::UnknownName(s.into())))
            }
        }
    }
}

/// Two switches joined by a trunk; five end systems attached to both and
/// one more on each switch. 9 nodes, 13 cables.
pub fn afdx() -> Topology {
    let mut nodes = vec!["sw1".to_string(), "sw2".to_string()];
    nodes.extend((1..=7).map(|i| format!("es{i}")));
    let mut cables = vec![("sw1".to_string(), "sw2".to_string())];
    for i in 1..=5 {
        cables.push((format!("es{i}"), "sw1".into()));
        cables.push((format!("es{i}"), "sw2".into()));
    }
    cables.push(("es6".into(), "sw1".into()));
    cables.push(("es7".into(), "sw2".into()));
    Topology::from_duplex(&nodes, &cables).expect("builtin topology is valid")
}

/// Two rails of four nodes with rungs at positions 1, 2 and 4.
/// 8 nodes, 9 cables.
pub fn ladder() -> Topology {
    let mut nodes = Vec::new();
    for rail in ["a", "b"] {
        nodes.extend((1..=4).map(|i| format!("{rail}{i}")));
    }
    let mut cables = Vec::new();
    for rail in ["a", "b"] {
        for i in 1..4 {
            cables.push((format!("{rail}{i}"), format!("{rail}{}", i + 1)));
        }
    }
    for i in [1, 2, 4] {
        cables.push((format!("a{i}"), format!("b{i}")));
    }
    Topology::from_duplex(&nodes, &cables).expect("builtin topology is valid")
}

/// G(n, p): every unordered pair is cabled with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Topology, Error> {
    if n < 2 {
        return Err(Error::Config(format!("random graph needs at least 2 nodes, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("link probability must be in (0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<String> = (1..=n).map(|i| format!("n{i}")).collect();
    let mut cables = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                cables.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    Ok(Topology::from_duplex(&nodes, &cables)?)
}

pub fn gen_topology(spec: &TopologySpec, seed: u64) -> Result<Topology, Error> {
    match spec {
        TopologySpec::Afdx => Ok(afdx()),
        TopologySpec::Ladder => Ok(ladder()),
        TopologySpec::ErdosRenyi { n, p } => erdos_renyi(*n, *p, seed),
        TopologySpec::File(path) => crate::io::read_topology(path),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayRule {
    /// `max_delay = cycle`.
    EqualCycle,
    Fixed(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalRule {
    /// Uniform over `[1, Γ]`.
    Uniform,
    Range(u32, u32),
    Fixed(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleShare {
    /// Cycles are dealt round-robin so every value gets an equal share.
    Equal,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowGen {
    pub count: usize,
    pub cycles: Vec<u32>,
    #[serde(default = "default_delay")]
    pub delay: DelayRule,
    #[serde(default = "default_arrival")]
    pub arrival: ArrivalRule,
    #[serde(default = "default_share")]
    pub share: CycleShare,
    #[serde(default)]
    pub seed: u64,
}

fn default_delay() -> DelayRule {
    DelayRule::EqualCycle
}
fn default_arrival() -> ArrivalRule {
    ArrivalRule::Uniform
}
fn default_share() -> CycleShare {
    CycleShare::Equal
}

impl FlowGen {
    pub fn new(count: usize, cycles: &[u32], seed: u64) -> Self {
        FlowGen {
            count,
            cycles: cycles.to_vec(),
            delay: DelayRule::EqualCycle,
            arrival: ArrivalRule::Uniform,
            share: CycleShare::Equal,
            seed,
        }
    }

    /// lcm of the configured cycle set.
    pub fn hypercycle(&self) -> Result<Hypercycle, Error> {
        let probes: Vec<FlowSpec> = self
            .cycles
            .iter()
            .map(|&c| FlowSpec { id: ttsched_core::FlowId(0), source: NodeId(0), destination: NodeId(1), arrival: 1, cycle: c, max_delay: 1 })
            .collect();
        Ok(ttsched_core::hypercycle_of(&probes)?)
    }
}

/// `count` flows between distinct (source, destination) pairs drawn from all
/// nodes of `topo`, fully determined by `cfg.seed`.
pub fn gen_flows(cfg: &FlowGen, topo: &Topology) -> Result<Vec<FlowSpec>, Error> {
    if cfg.count == 0 {
        return Ok(Vec::new());
    }
    if cfg.cycles.is_empty() || cfg.cycles.contains(&0) {
        return Err(Error::Config("cycle set must be non-empty and positive".into()));
    }
    let hc = cfg.hypercycle()?;
    let mut pairs: Vec<(NodeId, NodeId)> =
        topo.nodes().flat_map(|s| topo.nodes().filter(move |&d| d != s).map(move |d| (s, d))).collect();
    if pairs.len() < cfg.count {
        return Err(Error::Config(format!(
            "asked for {} flows but only {} distinct source/destination pairs exist ({} short)",
            cfg.count,
            pairs.len(),
            cfg.count - pairs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pairs.shuffle(&mut rng);
    let mut flows = Vec::with_capacity(cfg.count);
    let mut seen = BTreeSet::new();
    for (i, &(s, d)) in pairs.iter().take(cfg.count).enumerate() {
        debug_assert!(seen.insert((s, d)));
        let cycle = match cfg.share {
            CycleShare::Equal => cfg.cycles[i % cfg.cycles.len()],
            CycleShare::Uniform => cfg.cycles[rng.gen_range(0..cfg.cycles.len())],
        };
        let arrival = match cfg.arrival {
            ArrivalRule::Uniform => rng.gen_range(1..=hc.gamma),
            ArrivalRule::Range(lo, hi) => {
                if lo == 0 || lo > hi {
                    return Err(Error::Config(format!("bad arrival range [{lo}, {hi}]")));
                }
                rng.gen_range(lo..=hi)
            }
            ArrivalRule::Fixed(a) => a,
        };
        let max_delay = match cfg.delay {
            DelayRule::EqualCycle => cycle,
            DelayRule::Fixed(r) => r,
        };
        flows.push(FlowSpec::new(i as u32, s, d, arrival, cycle, max_delay)?);
    }
    Ok(flows)
}
