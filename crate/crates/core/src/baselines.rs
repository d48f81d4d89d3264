//! Comparison schemes, reconstructed from short descriptions.
//!
//! All three keep one path per flow and repeat it every cycle (fixed cyclic
//! scheduling), which is what separates them from HFS-LLF:
//!
//! * BFS-S takes the fewest-hop path of packet 1 (storage allowed) without
//!   looking at later packets, and gives up if a shifted copy collides.
//! * IRAS allows no storage after the first hop. It lists the no-wait paths
//!   whose shifted copies are all free and picks the one with the fewest
//!   hops, then the least loaded links.
//! * JRAS-TSEG searches only edges whose shifted copies are all free, then
//!   takes the fewest hops.
//!
//! These are approximations of the cited algorithms, not reproductions.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::llf::{schedule_flow_llf, FlowTrace, PacketTrace};
use crate::model::{packet_windows, CommEdge, FlowSpec, LinkId};
use crate::paths::{enumerate_paths, shortest_path, Objective, TimedPath};
use crate::tecg::{PacketGraph, Tecg};
use crate::Error;

/// IRAS stops listing paths after this many and keeps them in found order.
pub const IRAS_PATH_GUARD: usize = 10_000;

/// Flow-by-flow schedulers that can be run on a shared [`Tecg`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    HfsLlf,
    BfsS,
    Iras,
    JrasTseg,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [Heuristic::HfsLlf, Heuristic::BfsS, Heuristic::Iras, Heuristic::JrasTseg];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::HfsLlf => "hfs_llf",
            Heuristic::BfsS => "bfs_s",
            Heuristic::Iras => "iras",
            Heuristic::JrasTseg => "jras_tseg",
        }
    }

    /// `"approximate"` for the reconstructed baselines.
    pub fn fidelity(self) -> &'static str {
        match self {
            Heuristic::HfsLlf => "faithful",
            _ => "approximate",
        }
    }

    pub fn schedule_flow(self, tecg: &mut Tecg, flow: &FlowSpec) -> Result<FlowTrace, Error> {
        match self {
            Heuristic::HfsLlf => schedule_flow_llf(tecg, flow),
            Heuristic::BfsS => schedule_flow_bfs_s(tecg, flow),
            Heuristic::Iras => schedule_flow_iras(tecg, flow),
            Heuristic::JrasTseg => schedule_flow_jras_tseg(tecg, flow),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Heuristic::ALL.into_iter().find(|h| h.name() == s).ok_or_else(|| Error::UnknownName(s.into()))
    }
}

fn graphs<'a>(tecg: &'a Tecg, flow: &FlowSpec) -> Result<Vec<PacketGraph<'a>>, Error> {
    Ok(packet_windows(flow, tecg.hypercycle())?.into_iter().map(|w| tecg.packet_graph(flow, w)).collect())
}

fn all_shifts_free(graphs: &[PacketGraph<'_>], link: LinkId, offset: u32) -> bool {
    graphs.iter().all(|g| g.is_free(link, offset))
}

/// Reserves `path` (laid out in packet 1's lifespan) for every packet of the
/// flow, or leaves `tecg` untouched and rejects if any copy collides.
fn commit_cyclic(tecg: &mut Tecg, flow: &FlowSpec, path: Option<TimedPath>) -> Result<FlowTrace, Error> {
    let Some(path) = path else { return Ok(FlowTrace::rejected(flow.id)) };
    let (edges, packets) = {
        let gs = graphs(tecg, flow)?;
        if !path.hops.iter().all(|&(l, t)| all_shifts_free(&gs, l, t)) {
            return Ok(FlowTrace::rejected(flow.id));
        }
        let edges: Vec<CommEdge> = gs.iter().flat_map(|g| path.comm_edges(g).collect::<Vec<_>>()).collect();
        let packets: Vec<PacketTrace> = gs
            .iter()
            .map(|g| PacketTrace { path: path.to_schedule_path(g), cost: path.hops.len() as f64 })
            .collect();
        (edges, packets)
    };
    tecg.occupy(&edges)?;
    Ok(FlowTrace { flow: flow.id, admitted: true, packets })
}

/// Fewest-hop, earliest-delivery path for packet 1; the same path shifted by
/// the cycle must be free for every other packet.
pub fn schedule_flow_bfs_s(tecg: &mut Tecg, flow: &FlowSpec) -> Result<FlowTrace, Error> {
    let path = {
        let gs = graphs(tecg, flow)?;
        shortest_path(&gs[0], Objective::FewestHops, |_, _| true, |_, _| 0)
    };
    commit_cyclic(tecg, flow, path)
}

/// No-wait paths whose every shifted copy is free, ordered by hop count and
/// then by the number of reserved slots on their links.
pub fn schedule_flow_iras(tecg: &mut Tecg, flow: &FlowSpec) -> Result<FlowTrace, Error> {
    let path = {
        let gs = graphs(tecg, flow)?;
        let mut found = enumerate_paths(&gs[0], false, IRAS_PATH_GUARD, &mut |l, t| all_shifts_free(&gs, l, t));
        if !found.truncated {
            let load = |p: &TimedPath| p.hops.iter().map(|&(l, _)| tecg.occupied_slots(l) as u64).sum::<u64>();
            // stable: enumeration order breaks remaining ties
            found.paths.sort_by_cached_key(|p| (p.hops.len(), load(p)));
        }
        found.paths.into_iter().next()
    };
    commit_cyclic(tecg, flow, path)
}

/// Fewest-hop path over the edges that are free for every packet of the flow.
pub fn schedule_flow_jras_tseg(tecg: &mut Tecg, flow: &FlowSpec) -> Result<FlowTrace, Error> {
    let path = {
        let gs = graphs(tecg, flow)?;
        shortest_path(&gs[0], Objective::FewestHops, |l, t| all_shifts_free(&gs, l, t), |_, _| 0)
    };
    commit_cyclic(tecg, flow, path)
}
