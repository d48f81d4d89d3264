//! Lightest-load-first flexible scheduling (HFS-LLF).
//!
//! Flows are admitted one at a time. For each packet of the flow, in order,
//! the lightest schedule path under `xi = alpha + beta` is searched inside
//! the packet's lifespan and its communication edges are reserved right away
//! so later packets see them. If any packet has no path, everything reserved
//! for the flow is released and the flow is rejected.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::load::{alpha_snapshot, LoadWeights};
use crate::model::{packet_windows, CommEdge, FlowId, FlowSpec, Schedule, SchedulePath};
use crate::paths::{shortest_path, Objective};
use crate::tecg::Tecg;
use crate::Error;

/// One packet's outcome in an admission trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketTrace {
    pub path: SchedulePath,
    /// Sum of `xi` over the path's communication edges when it was chosen.
    pub cost: f64,
}

/// Admission record for one flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub flow: FlowId,
    pub admitted: bool,
    pub packets: Vec<PacketTrace>,
}

impl FlowTrace {
    pub fn rejected(flow: FlowId) -> Self {
        FlowTrace { flow, admitted: false, packets: Vec::new() }
    }

    pub fn paths(&self) -> impl Iterator<Item = &SchedulePath> {
        self.packets.iter().map(|p| &p.path)
    }
}

/// Routes every packet of `flow` on `tecg`, committing the reservations on
/// success. On rejection the occupancy is left exactly as it was.
pub fn schedule_flow_llf(tecg: &mut Tecg, flow: &FlowSpec) -> Result<FlowTrace, Error> {
    let windows = packet_windows(flow, tecg.hypercycle())?;
    let alpha = alpha_snapshot(tecg);
    let mut committed: Vec<CommEdge> = Vec::new();
    let mut packets = Vec::with_capacity(windows.len());
    for w in windows {
        let found = {
            let pg = tecg.packet_graph(flow, w);
            let weights = LoadWeights::for_packet(&pg, flow.max_delay, &alpha);
            shortest_path(&pg, Objective::LightestLoad, |_, _| true, |l, _| weights.scaled[l.index()]).map(|p| {
                let edges: Vec<CommEdge> = p.comm_edges(&pg).collect();
                let cost = p.hops.iter().map(|&(l, _)| weights.xi[l.index()]).sum();
                (edges, PacketTrace { path: p.to_schedule_path(&pg), cost })
            })
        };
        match found {
            Some((edges, trace)) => {
                tecg.occupy(&edges).expect("search only returns free edges");
                committed.extend(edges);
                packets.push(trace);
            }
            None => {
                tecg.release(&committed).expect("edges reserved by this call");
                return Ok(FlowTrace::rejected(flow.id));
            }
        }
    }
    Ok(FlowTrace { flow: flow.id, admitted: true, packets })
}

/// Applies a per-flow scheduler to `flows` in list order and collects the
/// resulting schedule and traces.
pub fn admit_with(
    tecg: &mut Tecg,
    flows: &[FlowSpec],
    mut schedule_flow: impl FnMut(&mut Tecg, &FlowSpec) -> Result<FlowTrace, Error>,
) -> Result<(Schedule, Vec<FlowTrace>), Error> {
    tecg.hypercycle().check_flows(flows)?;
    let mut schedule = Schedule::new();
    let mut traces = Vec::with_capacity(flows.len());
    for f in flows {
        let trace = schedule_flow(tecg, f)?;
        schedule.record(f.id, trace.admitted.then(|| trace.paths().cloned().collect()));
        traces.push(trace);
    }
    Ok((schedule, traces))
}

/// Admits `flows` with HFS-LLF in the given order.
pub fn admit_sequence(tecg: &mut Tecg, flows: &[FlowSpec]) -> Result<Schedule, Error> {
    admit_with(tecg, flows, schedule_flow_llf).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Hypercycle, LinkId, NodeId, PacketId, Topology};
    use alloc::sync::Arc;
    use alloc::vec;

    fn line(names: &[&str]) -> Arc<Topology> {
        let cables: Vec<(&str, &str)> = names.windows(2).map(|w| (w[0], w[1])).collect();
        Arc::new(Topology::from_duplex(names, &cables).unwrap())
    }

    #[test]
    fn empty_list_leaves_graph_free() {
        let mut g = Tecg::new(line(&["s", "d"]), Hypercycle::new(4));
        let s = admit_sequence(&mut g, &[]).unwrap();
        assert_eq!(s.admitted_count(), 0);
        assert_eq!(g.occupied_count(), 0);
    }

    #[test]
    fn full_link_rejects_and_keeps_occupancy() {
        let topo = Arc::new(Topology::new(&["s", "d"], &[("s", "d")]).unwrap());
        let hc = Hypercycle::new(4);
        let all: Vec<_> = (1..=4).map(|slot| CommEdge { link: LinkId(0), slot }).collect();
        let mut g = Tecg::build(topo, hc, &all).unwrap();
        let before = g.clone();
        let f = FlowSpec::new(0, NodeId(0), NodeId(1), 1, 2, 2).unwrap();
        let t = schedule_flow_llf(&mut g, &f).unwrap();
        assert!(!t.admitted);
        assert!(g.same_occupancy(&before));
    }

    #[test]
    fn partial_success_is_rolled_back() {
        // second packet's window is blocked, first packet must be released
        let topo = Arc::new(Topology::new(&["s", "d"], &[("s", "d")]).unwrap());
        let hc = Hypercycle::new(4);
        let mut g = Tecg::build(topo, hc, &[CommEdge { link: LinkId(0), slot: 3 }, CommEdge { link: LinkId(0), slot: 4 }])
            .unwrap();
        let before = g.clone();
        let f = FlowSpec::new(0, NodeId(0), NodeId(1), 1, 2, 2).unwrap();
        assert!(!schedule_flow_llf(&mut g, &f).unwrap().admitted);
        assert!(g.same_occupancy(&before));
    }

    #[test]
    fn two_flow_micro_instance() {
        let topo = line(&["s", "a", "d"]);
        let (s, d) = (topo.node("s").unwrap(), topo.node("d").unwrap());
        let f1 = FlowSpec::new(0, s, d, 1, 2, 2).unwrap();
        let f2 = FlowSpec::new(1, s, d, 2, 3, 3).unwrap();
        let mut g = Tecg::new(topo, Hypercycle::new(6));
        let sched = admit_sequence(&mut g, &[f1, f2]).unwrap();
        assert_eq!(sched.admitted_count(), 2);
        // packets of f2 are delivered inside their windows (2,4) and (5,7)
        let p1 = &sched.paths[&PacketId { flow: f2.id, seq: 1 }];
        let p2 = &sched.paths[&PacketId { flow: f2.id, seq: 2 }];
        let hc = g.hypercycle();
        let ends = |p: &SchedulePath| hc.advance(p.last_slot().unwrap(), 1);
        assert!([3, 4, 5].contains(&ends(p1)), "{:?}", p1);
        assert!([6, 1, 2].contains(&ends(p2)), "{:?}", p2);
        assert_eq!(g.occupied_count(), 3 * 2 + 2 * 2);
    }

    #[test]
    fn coprime_cycles_share_one_link() {
        let topo = Arc::new(Topology::new(&["s", "d"], &[("s", "d")]).unwrap());
        let flows: Vec<_> =
            [3u32, 5, 7].iter().enumerate().map(|(i, &c)| FlowSpec::new(i as u32, NodeId(0), NodeId(1), 1, c, c).unwrap()).collect();
        let mut g = Tecg::new(topo, Hypercycle::new(105));
        let s = admit_sequence(&mut g, &flows).unwrap();
        assert_eq!(s.admitted.values().copied().collect::<Vec<_>>(), vec![true, true, true]);
        assert_eq!(g.occupied_count(), 35 + 21 + 15);
    }

    #[test]
    fn deterministic() {
        let topo = line(&["s", "a", "b", "d"]);
        let f = FlowSpec::new(0, NodeId(0), NodeId(3), 2, 4, 4).unwrap();
        let run = || {
            let mut g = Tecg::new(topo.clone(), Hypercycle::new(8));
            schedule_flow_llf(&mut g, &f).unwrap()
        };
        assert_eq!(run(), run());
    }
}
