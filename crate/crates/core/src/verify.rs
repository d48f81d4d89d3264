//! Independent schedule checker and destination-side jitter masking.
//!
//! The checker does not reuse the schedulers' graph views: lifespans are
//! recomputed from the flow tuples and every hop is checked against the
//! topology and the background occupancy directly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{CommEdge, FlowId, FlowSpec, Hop, NodeId, PacketId, Schedule, SchedulePath, Topology};
use crate::tecg::Tecg;
use crate::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Capacity,
    Conservation,
    NoLoop,
    Deadline,
    Periodicity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub entity: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn count(&self, rule: Rule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

struct Checker<'a> {
    topo: &'a Topology,
    gamma: i64,
    violations: Vec<Violation>,
}

impl Checker<'_> {
    fn wrap(&self, i: i64) -> u32 {
        ((i - 1).rem_euclid(self.gamma) + 1) as u32
    }

    fn flag(&mut self, rule: Rule, entity: String, detail: String) {
        self.violations.push(Violation { rule, entity, detail });
    }

    fn packet_name(&self, p: PacketId) -> String {
        format!("flow {} packet {}", p.flow.0, p.seq)
    }

    fn edge_name(&self, e: CommEdge) -> String {
        if e.link.index() < self.topo.link_count() {
            let (u, v) = self.topo.endpoints(e.link);
            format!("({},{})@{}", self.topo.name(u), self.topo.name(v), e.slot)
        } else {
            format!("link#{}@{}", e.link.0, e.slot)
        }
    }

    /// Checks one path against its own lifespan. Returns false if the hops
    /// are malformed beyond further use.
    fn check_path(&mut self, flow: &FlowSpec, path: &SchedulePath) -> bool {
        let who = self.packet_name(path.packet);
        if path.hops.is_empty() {
            self.flag(Rule::Deadline, who, "empty path never reaches the destination".into());
            return false;
        }
        let links = self.topo.link_count();
        for h in &path.hops {
            let bad = match *h {
                Hop::Communication { link, slot } => link.index() >= links || slot == 0 || slot as i64 > self.gamma,
                Hop::Storage { node, slot } => {
                    node.index() >= self.topo.node_count() || slot == 0 || slot as i64 > self.gamma
                }
            };
            if bad {
                self.flag(Rule::Conservation, who, format!("hop {h:?} is not an edge of the graph"));
                return false;
            }
        }

        // conservation: hops chain head-to-tail in consecutive slots
        let (first_tail, _) = path.hops[0].ends(self.topo);
        if first_tail != flow.source {
            self.flag(Rule::Conservation, who.clone(), format!("starts at {} instead of the source", self.topo.name(first_tail)));
        }
        for pair in path.hops.windows(2) {
            let (_, head) = pair[0].ends(self.topo);
            let (tail, _) = pair[1].ends(self.topo);
            if head != tail || pair[1].slot() != self.wrap(pair[0].slot() as i64 + 1) {
                self.flag(
                    Rule::Conservation,
                    who.clone(),
                    format!("hop {:?} does not continue from {:?}", pair[1], pair[0]),
                );
            }
        }
        let (_, last_head) = path.hops[path.hops.len() - 1].ends(self.topo);
        if last_head != flow.destination {
            self.flag(Rule::Conservation, who.clone(), format!("ends at {} instead of the destination", self.topo.name(last_head)));
        }

        // no-loop: every node but the destination transmits at most once
        let mut senders: BTreeMap<NodeId, usize> = BTreeMap::new();
        for h in &path.hops {
            if let Hop::Communication { link, .. } = *h {
                *senders.entry(self.topo.endpoints(link).0).or_default() += 1;
            }
        }
        for (node, n) in senders {
            if n > 1 && node != flow.destination {
                self.flag(Rule::NoLoop, who.clone(), format!("{} transmits {n} times", self.topo.name(node)));
            }
        }

        // deadline: all hops inside [arrival, arrival + min(rho, gamma) - 1]
        let arrival = self.wrap(flow.arrival as i64 + (path.packet.seq as i64 - 1) * flow.cycle as i64);
        let span = (flow.max_delay as i64).min(self.gamma);
        let first_off = (path.hops[0].slot() as i64 - arrival as i64).rem_euclid(self.gamma);
        let last_off = first_off + path.hops.len() as i64 - 1;
        if last_off >= span {
            self.flag(
                Rule::Deadline,
                who,
                format!("reaches the destination {} slot(s) after arrival, allowed {span}", last_off + 1),
            );
        }
        true
    }
}

/// Checks `schedule` against the capacity, conservation, no-loop and deadline
/// rules, plus periodicity in [`Mode::Fcs`]. `base` holds the reservations
/// that existed before the schedule; its topology and hypercycle are used.
pub fn verify_schedule(base: &Tecg, flows: &[FlowSpec], schedule: &Schedule, mode: Mode) -> VerifyReport {
    let topo = base.topology();
    let mut c = Checker { topo, gamma: base.gamma() as i64, violations: Vec::new() };
    let by_id: BTreeMap<FlowId, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();

    // deadline adherence: admitted flows have a path for every packet
    for f in flows {
        if !schedule.is_admitted(f.id) {
            continue;
        }
        if c.gamma % f.cycle as i64 != 0 {
            c.flag(Rule::Deadline, format!("flow {}", f.id.0), "cycle does not divide the hypercycle".into());
            continue;
        }
        let n = c.gamma as u32 / f.cycle;
        for seq in 1..=n {
            if !schedule.paths.contains_key(&PacketId { flow: f.id, seq }) {
                c.flag(Rule::Deadline, c.packet_name(PacketId { flow: f.id, seq }), "admitted flow has no path".into());
            }
        }
    }

    let mut usage: BTreeMap<CommEdge, Vec<PacketId>> = BTreeMap::new();
    for (pid, path) in &schedule.paths {
        if path.packet != *pid {
            c.flag(Rule::Conservation, c.packet_name(*pid), "path is stored under another packet id".into());
        }
        let Some(flow) = by_id.get(&pid.flow) else {
            c.flag(Rule::Deadline, c.packet_name(*pid), "path for an unknown flow".into());
            continue;
        };
        if pid.seq == 0 || (c.gamma % flow.cycle as i64 == 0 && pid.seq as i64 > c.gamma / flow.cycle as i64) {
            c.flag(Rule::Deadline, c.packet_name(*pid), "packet index outside the hypercycle".into());
            continue;
        }
        if !c.check_path(flow, path) {
            continue;
        }
        for e in path.comm_edges() {
            usage.entry(e).or_default().push(*pid);
        }
    }

    // capacity: one packet per free link-slot
    for (e, users) in &usage {
        if base.is_occupied(*e) {
            c.flag(Rule::Capacity, c.edge_name(*e), "edge was already reserved".into());
        }
        if users.len() > 1 {
            let who: Vec<String> = users.iter().map(|p| c.packet_name(*p)).collect();
            c.flag(Rule::Capacity, c.edge_name(*e), format!("used by {}", who.join(", ")));
        }
    }

    if mode == Mode::Fcs {
        for f in flows.iter().filter(|f| schedule.is_admitted(f.id)) {
            let Some(first) = schedule.paths.get(&PacketId { flow: f.id, seq: 1 }) else { continue };
            for path in schedule.paths_of(f.id).skip(1) {
                let shift = (path.packet.seq as i64 - 1) * f.cycle as i64;
                let expected: Vec<Hop> = first
                    .hops
                    .iter()
                    .map(|h| match *h {
                        Hop::Communication { link, slot } => Hop::Communication { link, slot: c.wrap(slot as i64 + shift) },
                        Hop::Storage { node, slot } => Hop::Storage { node, slot: c.wrap(slot as i64 + shift) },
                    })
                    .collect();
                if expected != path.hops {
                    c.flag(
                        Rule::Periodicity,
                        c.packet_name(path.packet),
                        format!("path is not packet 1's path shifted by {shift} slots"),
                    );
                }
            }
        }
    }

    VerifyReport { ok: c.violations.is_empty(), violations: c.violations }
}

/// Destination buffering plan for one admitted flow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryPlan {
    pub flow: FlowId,
    /// Largest per-packet delay, in slots.
    pub d_max: u32,
    /// Per-packet time point (unwrapped) at which the packet is handed to the
    /// application; consecutive entries differ by exactly the cycle.
    pub deliveries: Vec<u64>,
    /// Per-packet network delay in slots.
    pub delays: Vec<u32>,
}

/// Buffers every packet of a flow up to the flow's largest experienced delay
/// so the application sees a strictly periodic stream.
///
/// A packet handed over in slot `t` whose last hop is used in slot `t'` has a
/// delay of `t' - t + 1` slots. Rejected flows are skipped.
pub fn jitter_mask(flows: &[FlowSpec], schedule: &Schedule, gamma: u32) -> Vec<DeliveryPlan> {
    let g = gamma as i64;
    let mut plans = Vec::new();
    for f in flows.iter().filter(|f| schedule.is_admitted(f.id)) {
        let mut delays = Vec::new();
        let mut arrivals = Vec::new();
        for path in schedule.paths_of(f.id) {
            let unwrapped = f.arrival as i64 + (path.packet.seq as i64 - 1) * f.cycle as i64;
            let arrival = (unwrapped - 1).rem_euclid(g) + 1;
            let last = path.last_slot().unwrap_or(arrival as u32) as i64;
            delays.push(((last - arrival).rem_euclid(g) + 1) as u32);
            arrivals.push(unwrapped as u64);
        }
        let d_max = delays.iter().copied().max().unwrap_or(0);
        let deliveries = arrivals.iter().map(|a| a + d_max as u64).collect();
        plans.push(DeliveryPlan { flow: f.id, d_max, deliveries, delays });
    }
    plans
}
