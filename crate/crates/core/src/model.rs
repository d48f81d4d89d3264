//! Domain types: topology, flows, hypercycle arithmetic and schedules.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Directed-link network of end systems and switches.
///
/// Node ids are dense and follow insertion order; link ids likewise. A
/// full-duplex cable is two directed links, see [`Topology::from_duplex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    names: Vec<String>,
    links: Vec<(NodeId, NodeId)>,
    out_links: Vec<Vec<LinkId>>,
    by_name: BTreeMap<String, NodeId>,
    by_pair: BTreeMap<(NodeId, NodeId), LinkId>,
}

impl Topology {
    /// Builds a topology from node names and directed links given by name.
    pub fn new<S: AsRef<str>>(nodes: &[S], links: &[(S, S)]) -> Result<Self, Error> {
        let mut by_name = BTreeMap::new();
        let mut names = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            let n = n.as_ref();
            if by_name.insert(n.to_string(), NodeId(i as u32)).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate node {n:?}")));
            }
            names.push(n.to_string());
        }
        let mut pairs = Vec::with_capacity(links.len());
        for (u, v) in links {
            let lookup = |s: &str| {
                by_name
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::UnknownNode(s.to_string()))
            };
            pairs.push((lookup(u.as_ref())?, lookup(v.as_ref())?));
        }
        Self::from_ids(names, pairs)
    }

    /// Builds a topology where every listed pair is one full-duplex cable.
    pub fn from_duplex<S: AsRef<str>>(nodes: &[S], cables: &[(S, S)]) -> Result<Self, Error> {
        let mut directed = Vec::with_capacity(cables.len() * 2);
        for (u, v) in cables {
            directed.push((u.as_ref(), v.as_ref()));
            directed.push((v.as_ref(), u.as_ref()));
        }
        let nodes: Vec<&str> = nodes.iter().map(|s| s.as_ref()).collect();
        Self::new(&nodes, &directed)
    }

    /// Builds a topology from already-indexed links.
    pub fn from_ids(names: Vec<String>, links: Vec<(NodeId, NodeId)>) -> Result<Self, Error> {
        let n = names.len();
        let mut by_name = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if by_name.insert(name.clone(), NodeId(i as u32)).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate node {name:?}")));
            }
        }
        let mut out_links = alloc::vec![Vec::new(); n];
        let mut by_pair = BTreeMap::new();
        for (i, &(u, v)) in links.iter().enumerate() {
            if u.index() >= n || v.index() >= n {
                return Err(Error::InvalidTopology(format!("link {i} references a missing node")));
            }
            if u == v {
                return Err(Error::InvalidTopology(format!("self-link at {:?}", names[u.index()])));
            }
            if by_pair.insert((u, v), LinkId(i as u32)).is_some() {
                return Err(Error::InvalidTopology(format!(
                    "duplicate link {:?} -> {:?}",
                    names[u.index()],
                    names[v.index()]
                )));
            }
            out_links[u.index()].push(LinkId(i as u32));
        }
        Ok(Topology { names, links, out_links, by_name, by_pair })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len() as u32).map(NodeId)
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.links.len() as u32).map(LinkId)
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.names[node.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn endpoints(&self, link: LinkId) -> (NodeId, NodeId) {
        self.links[link.index()]
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.by_pair.get(&(from, to)).copied()
    }

    /// Outgoing links of `node`, in link-id order.
    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node.index()]
    }

    pub fn contains_link(&self, link: LinkId) -> bool {
        link.index() < self.links.len()
    }
}

/// Flow tuple `(source, destination, arrival, cycle, max_delay)`; slots are
/// 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: FlowId,
    pub source: NodeId,
    pub destination: NodeId,
    pub arrival: u32,
    pub cycle: u32,
    pub max_delay: u32,
}

impl FlowSpec {
    pub fn new(
        id: u32,
        source: NodeId,
        destination: NodeId,
        arrival: u32,
        cycle: u32,
        max_delay: u32,
    ) -> Result<Self, Error> {
        let f = FlowSpec { id: FlowId(id), source, destination, arrival, cycle, max_delay };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |reason| Err(Error::InvalidFlow { flow: self.id.0, reason });
        if self.source == self.destination {
            return bad("source equals destination");
        }
        if self.cycle == 0 {
            return bad("cycle must be at least 1");
        }
        if self.max_delay == 0 {
            return bad("max_delay must be at least 1");
        }
        if self.arrival == 0 {
            return bad("arrival slots are 1-based");
        }
        Ok(())
    }

    /// Number of packets the flow emits per hypercycle.
    pub fn packets_per_hypercycle(&self, hc: &Hypercycle) -> u32 {
        hc.gamma / self.cycle
    }
}

/// One hypercycle of `gamma` slots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypercycle {
    pub gamma: u32,
    /// Physical slot length in microseconds; informational only.
    pub slot_duration_us: f64,
}

/// Default slot length: one maximum frame over a 1 Gbps link.
pub const DEFAULT_SLOT_US: f64 = 15.0;

impl Hypercycle {
    pub fn new(gamma: u32) -> Self {
        assert!(gamma >= 1, "hypercycle needs at least one slot");
        Hypercycle { gamma, slot_duration_us: DEFAULT_SLOT_US }
    }

    /// Maps any slot index onto `[1, Γ]` via `((i - 1) mod Γ) + 1`.
    #[inline]
    pub fn wrap(&self, i: i64) -> u32 {
        ((i - 1).rem_euclid(self.gamma as i64) + 1) as u32
    }

    /// Slot reached `offset` slots after `start`.
    #[inline]
    pub fn advance(&self, start: u32, offset: u32) -> u32 {
        self.wrap(start as i64 + offset as i64)
    }

    /// Number of lifespan slots actually usable by a packet: a lifespan longer
    /// than `Γ` would revisit slots, so it is capped at `Γ`.
    #[inline]
    pub fn span_len(&self, max_delay: u32) -> u32 {
        max_delay.min(self.gamma)
    }

    pub fn check_flow(&self, flow: &FlowSpec) -> Result<(), Error> {
        flow.validate()?;
        if !self.gamma.is_multiple_of(flow.cycle) {
            return Err(Error::CycleMismatch { flow: flow.id.0, cycle: flow.cycle, gamma: self.gamma });
        }
        Ok(())
    }

    pub fn check_flows(&self, flows: &[FlowSpec]) -> Result<(), Error> {
        flows.iter().try_for_each(|f| self.check_flow(f))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Hypercycle of a flow set: the lcm of all cycles.
pub fn hypercycle_of(flows: &[FlowSpec]) -> Result<Hypercycle, Error> {
    if flows.is_empty() {
        return Err(Error::NoFlows);
    }
    let mut g = 1u64;
    for f in flows {
        if f.cycle == 0 {
            return Err(Error::InvalidFlow { flow: f.id.0, reason: "cycle must be at least 1" });
        }
        g = lcm(g, f.cycle as u64);
        if g > u32::MAX as u64 {
            return Err(Error::InconsistentHypercycle { gamma: u32::MAX });
        }
    }
    Ok(Hypercycle::new(g as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PacketId {
    pub flow: FlowId,
    /// 1-based packet index within the hypercycle.
    pub seq: u32,
}

/// Lifespan of one packet. The deadline is kept unwrapped so windows that
/// cross the hypercycle boundary stay ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PacketWindow {
    pub seq: u32,
    pub arrival: u32,
    pub deadline: u64,
}

impl PacketWindow {
    pub fn as_pair(&self) -> (u32, u64) {
        (self.arrival, self.deadline)
    }
}

/// Arrival and deadline slot of every packet of `flow` within the hypercycle.
pub fn packet_windows(flow: &FlowSpec, hc: &Hypercycle) -> Result<Vec<PacketWindow>, Error> {
    hc.check_flow(flow)?;
    let n = hc.gamma / flow.cycle;
    Ok((1..=n)
        .map(|seq| {
            let arrival = hc.wrap(flow.arrival as i64 + (seq as i64 - 1) * flow.cycle as i64);
            PacketWindow { seq, arrival, deadline: arrival as u64 + flow.max_delay as u64 - 1 }
        })
        .collect())
}

/// A communication edge of the time-expanded graph: link `(u, v)` during
/// slot `slot`, i.e. the edge `u_slot -> v_(slot+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CommEdge {
    pub link: LinkId,
    pub slot: u32,
}

/// One timed edge of a schedule path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hop {
    Communication { link: LinkId, slot: u32 },
    Storage { node: NodeId, slot: u32 },
}

impl Hop {
    pub fn slot(&self) -> u32 {
        match *self {
            Hop::Communication { slot, .. } | Hop::Storage { slot, .. } => slot,
        }
    }

    pub fn comm_edge(&self) -> Option<CommEdge> {
        match *self {
            Hop::Communication { link, slot } => Some(CommEdge { link, slot }),
            Hop::Storage { .. } => None,
        }
    }

    /// Node the hop leaves from and node it ends at.
    pub fn ends(&self, topo: &Topology) -> (NodeId, NodeId) {
        match *self {
            Hop::Communication { link, .. } => topo.endpoints(link),
            Hop::Storage { node, .. } => (node, node),
        }
    }
}

/// Timed edge sequence carrying one packet from its source to its
/// destination.
///
/// Waiting at the source before the first hop and at the destination after
/// the last hop is implicit; storage hops only appear at intermediate nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchedulePath {
    pub packet: PacketId,
    pub hops: Vec<Hop>,
}

impl SchedulePath {
    pub fn comm_edges(&self) -> impl Iterator<Item = CommEdge> + '_ {
        self.hops.iter().filter_map(Hop::comm_edge)
    }

    pub fn comm_hop_count(&self) -> usize {
        self.comm_edges().count()
    }

    /// Slot during which the last hop is used, if any.
    pub fn last_slot(&self) -> Option<u32> {
        self.hops.last().map(Hop::slot)
    }

    pub fn first_slot(&self) -> Option<u32> {
        self.hops.first().map(Hop::slot)
    }
}

/// Admission flags plus one path per packet of every admitted flow.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub admitted: BTreeMap<FlowId, bool>,
    pub paths: BTreeMap<PacketId, SchedulePath>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_admitted(&self, flow: FlowId) -> bool {
        self.admitted.get(&flow).copied().unwrap_or(false)
    }

    pub fn admitted_count(&self) -> usize {
        self.admitted.values().filter(|&&a| a).count()
    }

    pub fn admitted_flows(&self) -> impl Iterator<Item = FlowId> + '_ {
        self.admitted.iter().filter(|(_, &a)| a).map(|(&f, _)| f)
    }

    pub fn packets_admitted(&self) -> usize {
        self.paths.len()
    }

    pub fn record(&mut self, flow: FlowId, paths: Option<Vec<SchedulePath>>) {
        match paths {
            Some(ps) => {
                self.admitted.insert(flow, true);
                for p in ps {
                    self.paths.insert(p.packet, p);
                }
            }
            None => {
                self.admitted.insert(flow, false);
            }
        }
    }

    pub fn paths_of(&self, flow: FlowId) -> impl Iterator<Item = &SchedulePath> + '_ {
        self.paths
            .range(PacketId { flow, seq: 0 }..=PacketId { flow, seq: u32::MAX })
            .map(|(_, p)| p)
    }

    /// Every comm edge used by any path, with repetitions.
    pub fn comm_edges(&self) -> impl Iterator<Item = CommEdge> + '_ {
        self.paths.values().flat_map(|p| p.comm_edges())
    }
}
