//! Time-expanded cyclic graph over one hypercycle.
//!
//! Vertices are `(node, slot)` pairs and are never materialized. A
//! communication edge `u_i -> v_(wrap(i+1))` exists for every directed link
//! and slot that is not occupied; storage edges `u_i -> u_(wrap(i+1))` always
//! exist and are not capacity-limited.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::model::{CommEdge, FlowSpec, Hypercycle, LinkId, NodeId, PacketId, PacketWindow, Topology};
use crate::Error;

/// Topology plus per-slot link occupancy. Single writer: one scheduling run
/// owns a `Tecg`; independent runs work on clones.
#[derive(Clone, Debug)]
pub struct Tecg {
    topo: Arc<Topology>,
    hc: Hypercycle,
    occupied: BitSet,
    link_load: Vec<u32>,
}

impl Tecg {
    /// Fully free graph.
    pub fn new(topo: Arc<Topology>, hc: Hypercycle) -> Self {
        let n = topo.link_count() * hc.gamma as usize;
        let link_load = alloc::vec![0; topo.link_count()];
        Tecg { topo, hc, occupied: BitSet::new(n), link_load }
    }

    /// Graph with the given link-slots already reserved.
    pub fn build(topo: Arc<Topology>, hc: Hypercycle, occupied: &[CommEdge]) -> Result<Self, Error> {
        let mut g = Tecg::new(topo, hc);
        for &e in occupied {
            g.check_edge(e)?;
            if !g.is_occupied(e) {
                g.mark(e, true);
            }
        }
        Ok(g)
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn topology_arc(&self) -> &Arc<Topology> {
        &self.topo
    }

    pub fn hypercycle(&self) -> &Hypercycle {
        &self.hc
    }

    pub fn gamma(&self) -> u32 {
        self.hc.gamma
    }

    #[inline]
    pub(crate) fn edge_index(&self, e: CommEdge) -> usize {
        e.link.index() * self.hc.gamma as usize + (e.slot as usize - 1)
    }

    pub(crate) fn edge_at(&self, index: usize) -> CommEdge {
        let g = self.hc.gamma as usize;
        CommEdge { link: LinkId((index / g) as u32), slot: (index % g) as u32 + 1 }
    }

    /// Total number of link-slots, free or not: `|E|·Γ`.
    pub fn comm_edge_capacity(&self) -> usize {
        self.topo.link_count() * self.hc.gamma as usize
    }

    pub fn check_edge(&self, e: CommEdge) -> Result<(), Error> {
        if !self.topo.contains_link(e.link) {
            return Err(Error::UnknownLink(e.link));
        }
        if e.slot == 0 || e.slot > self.hc.gamma {
            return Err(Error::SlotOutOfRange { slot: e.slot, gamma: self.hc.gamma });
        }
        Ok(())
    }

    #[inline]
    pub fn is_occupied(&self, e: CommEdge) -> bool {
        self.occupied.get(self.edge_index(e))
    }

    #[inline]
    pub fn is_free(&self, e: CommEdge) -> bool {
        !self.is_occupied(e)
    }

    fn mark(&mut self, e: CommEdge, v: bool) {
        let i = self.edge_index(e);
        self.occupied.set(i, v);
        if v {
            self.link_load[e.link.index()] += 1;
        } else {
            self.link_load[e.link.index()] -= 1;
        }
    }

    /// Reserves every edge in `edges`; fails without changing anything if one
    /// of them is unknown or already taken (including repeats in the list).
    pub fn occupy(&mut self, edges: &[CommEdge]) -> Result<(), Error> {
        for (i, &e) in edges.iter().enumerate() {
            self.check_edge(e)?;
            if self.is_occupied(e) || edges[..i].contains(&e) {
                return Err(Error::AlreadyOccupied(e));
            }
        }
        for &e in edges {
            self.mark(e, true);
        }
        Ok(())
    }

    /// Frees every edge in `edges`; all of them must currently be reserved.
    pub fn release(&mut self, edges: &[CommEdge]) -> Result<(), Error> {
        for (i, &e) in edges.iter().enumerate() {
            self.check_edge(e)?;
            if !self.is_occupied(e) || edges[..i].contains(&e) {
                return Err(Error::NotOccupied(e));
            }
        }
        for &e in edges {
            self.mark(e, false);
        }
        Ok(())
    }

    /// Reserved slots of `link` within the hypercycle.
    pub fn occupied_slots(&self, link: LinkId) -> u32 {
        self.link_load[link.index()]
    }

    pub fn occupied_edges(&self) -> Vec<CommEdge> {
        self.occupied.iter_ones().map(|i| self.edge_at(i)).collect()
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.count_ones()
    }

    pub fn vertex_count(&self) -> usize {
        self.topo.node_count() * self.hc.gamma as usize
    }

    /// Number of communication edges currently present (free link-slots).
    pub fn comm_edge_count(&self) -> usize {
        self.comm_edge_capacity() - self.occupied_count()
    }

    pub fn storage_edge_count(&self) -> usize {
        self.vertex_count()
    }

    /// Free communication edges leaving `node` during `slot`.
    pub fn free_out_edges(&self, node: NodeId, slot: u32) -> impl Iterator<Item = CommEdge> + '_ {
        self.topo
            .out_links(node)
            .iter()
            .map(move |&link| CommEdge { link, slot })
            .filter(|&e| self.is_free(e))
    }

    /// Same occupancy and topology, compared bit for bit.
    pub fn same_occupancy(&self, other: &Tecg) -> bool {
        self.occupied == other.occupied
    }

    /// Schedule-path graph of one packet: the view of this graph restricted to
    /// the packet's lifespan.
    pub fn packet_graph(&self, flow: &FlowSpec, window: PacketWindow) -> PacketGraph<'_> {
        PacketGraph {
            tecg: self,
            packet: PacketId { flow: flow.id, seq: window.seq },
            source: flow.source,
            destination: flow.destination,
            start_slot: window.arrival,
            len: self.hc.span_len(flow.max_delay),
        }
    }

    /// Schedule-path graph of packet `packet` of `flow`.
    pub fn schedule_path_graph(&self, packet: PacketId, flow: &FlowSpec) -> Result<PacketGraph<'_>, Error> {
        let windows = crate::model::packet_windows(flow, &self.hc)?;
        let w = windows
            .get((packet.seq as usize).wrapping_sub(1))
            .copied()
            .ok_or(Error::InvalidFlow { flow: flow.id.0, reason: "packet index out of range" })?;
        Ok(self.packet_graph(flow, w))
    }
}

/// Lifespan-restricted view of a [`Tecg`] for one packet.
///
/// Layers are addressed by offset `t` in `0..=len`; layer `t` corresponds to
/// slot `wrap(start_slot + t)`. Edges leave layer `t` during that slot. The
/// packet starts at `(source, 0)` and must be at `(destination, len)`.
#[derive(Clone, Copy, Debug)]
pub struct PacketGraph<'a> {
    pub tecg: &'a Tecg,
    pub packet: PacketId,
    pub source: NodeId,
    pub destination: NodeId,
    pub start_slot: u32,
    /// Number of usable slots: `min(ρ, Γ)`.
    pub len: u32,
}

impl<'a> PacketGraph<'a> {
    #[inline]
    pub fn slot_at(&self, offset: u32) -> u32 {
        self.tecg.hc.advance(self.start_slot, offset)
    }

    /// Offset of `slot` within the span, if the slot belongs to it.
    pub fn offset_of(&self, slot: u32) -> Option<u32> {
        let g = self.tecg.hc.gamma as i64;
        let off = (slot as i64 - self.start_slot as i64).rem_euclid(g) as u32;
        (off < self.len).then_some(off)
    }

    /// Slots of the lifespan, in order.
    pub fn span(&self) -> Vec<u32> {
        (0..self.len).map(|t| self.slot_at(t)).collect()
    }

    pub fn start_vertex(&self) -> (NodeId, u32) {
        (self.source, self.start_slot)
    }

    pub fn target_vertex(&self) -> (NodeId, u32) {
        (self.destination, self.slot_at(self.len))
    }

    #[inline]
    pub fn is_free(&self, link: LinkId, offset: u32) -> bool {
        offset < self.len && self.tecg.is_free(CommEdge { link, slot: self.slot_at(offset) })
    }

    /// Free communication edges inside the lifespan, ordered by offset then
    /// link id.
    pub fn comm_edges(&self) -> impl Iterator<Item = CommEdge> + 'a {
        let g = *self;
        (0..g.len).flat_map(move |t| {
            let slot = g.slot_at(t);
            g.tecg
                .topo
                .links()
                .map(move |link| CommEdge { link, slot })
                .filter(move |&e| g.tecg.is_free(e))
        })
    }

    /// Storage edges inside the lifespan as `(node, slot)`.
    pub fn storage_edges(&self) -> impl Iterator<Item = (NodeId, u32)> + 'a {
        let g = *self;
        (0..g.len).flat_map(move |t| g.tecg.topo.nodes().map(move |n| (n, g.slot_at(t))))
    }

    /// Slots that carry vertices of this view: the span plus the target slot.
    pub fn vertex_slots(&self) -> Vec<u32> {
        (0..=self.len).map(|t| self.slot_at(t)).collect()
    }
}
