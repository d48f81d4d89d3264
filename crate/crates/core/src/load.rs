//! Link load metrics used by the lightest-load-first heuristic.
//!
//! * `alpha`: share of the hypercycle's slots in which a link is reserved.
//! * `beta`: share of a packet's lifespan in which the link is reserved
//!   (equal to `alpha` when the lifespan covers the whole hypercycle).
//! * `xi = alpha + beta` for communication edges, `0` for storage edges.
//!
//! The search itself runs on exact integer multiples of these values (see
//! [`LoadWeights::scaled`]) so ties are decided without rounding noise.

use alloc::vec::Vec;

use crate::model::{lcm, CommEdge, FlowSpec, LinkId, PacketId};
use crate::tecg::{PacketGraph, Tecg};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Communication,
    Storage,
}

pub fn alpha(tecg: &Tecg, link: LinkId) -> Result<f64, Error> {
    if !tecg.topology().contains_link(link) {
        return Err(Error::UnknownLink(link));
    }
    Ok(tecg.occupied_slots(link) as f64 / tecg.gamma() as f64)
}

/// Reserved slots of `link` within the lifespan of `pg`.
pub(crate) fn occupied_in_span(pg: &PacketGraph<'_>, link: LinkId) -> u32 {
    (0..pg.len)
        .filter(|&t| pg.tecg.is_occupied(CommEdge { link, slot: pg.slot_at(t) }))
        .count() as u32
}

/// Packet-level load of the link behind `edge`, seen by `packet` of `flow`.
pub fn beta(tecg: &Tecg, edge: CommEdge, packet: PacketId, flow: &FlowSpec) -> Result<f64, Error> {
    tecg.check_edge(edge)?;
    let pg = tecg.schedule_path_graph(packet, flow)?;
    if pg.offset_of(edge.slot).is_none() {
        return Err(Error::OutsideSpan(edge));
    }
    if flow.max_delay >= tecg.gamma() {
        return alpha(tecg, edge.link);
    }
    Ok(occupied_in_span(&pg, edge.link) as f64 / flow.max_delay as f64)
}

pub fn xi(alpha: f64, beta: f64, kind: EdgeKind) -> f64 {
    match kind {
        EdgeKind::Communication => alpha + beta,
        EdgeKind::Storage => 0.0,
    }
}

/// Per-link load values for one packet search.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadWeights {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub xi: Vec<f64>,
    /// `xi · scale` as exact integers.
    pub scaled: Vec<u64>,
    pub scale: u64,
}

impl LoadWeights {
    /// Weights for the packet behind `pg`. `alpha_slots[l]` is the number of
    /// reserved slots of link `l` used for the hypercycle-level term, which
    /// lets callers freeze it for the duration of one flow.
    pub fn for_packet(pg: &PacketGraph<'_>, max_delay: u32, alpha_slots: &[u32]) -> Self {
        let gamma = pg.tecg.gamma() as u64;
        let full = max_delay as u64 >= gamma;
        let rho = max_delay as u64;
        let scale = if full { gamma } else { lcm(gamma, rho) };
        let links = pg.tecg.topology().link_count();
        let mut w = LoadWeights {
            alpha: Vec::with_capacity(links),
            beta: Vec::with_capacity(links),
            xi: Vec::with_capacity(links),
            scaled: Vec::with_capacity(links),
            scale,
        };
        for l in pg.tecg.topology().links() {
            let occ_hc = alpha_slots[l.index()] as u64;
            let a = occ_hc as f64 / gamma as f64;
            let (b, scaled) = if full {
                (a, 2 * occ_hc)
            } else {
                let occ_span = occupied_in_span(pg, l) as u64;
                (occ_span as f64 / rho as f64, occ_hc * (scale / gamma) + occ_span * (scale / rho))
            };
            w.alpha.push(a);
            w.beta.push(b);
            w.xi.push(xi(a, b, EdgeKind::Communication));
            w.scaled.push(scaled);
        }
        w
    }
}

pub(crate) fn alpha_snapshot(tecg: &Tecg) -> Vec<u32> {
    tecg.topology().links().map(|l| tecg.occupied_slots(l)).collect()
}
