//! Path search inside a packet's schedule-path graph.
//!
//! Paths are kept in a compact form, [`TimedPath`]: the communication hops
//! with their offsets inside the lifespan. Storage at intermediate nodes is
//! implied by gaps between offsets and is materialized only when converting
//! to a [`SchedulePath`].

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{CommEdge, Hop, LinkId, NodeId, SchedulePath};
use crate::tecg::PacketGraph;

/// Communication hops of one packet path as `(link, offset)`; offsets are
/// strictly increasing and the first hop leaves the source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimedPath {
    pub hops: Vec<(LinkId, u32)>,
}

impl TimedPath {
    pub fn comm_edges<'g>(&'g self, pg: &'g PacketGraph<'_>) -> impl Iterator<Item = CommEdge> + 'g {
        self.hops.iter().map(move |&(link, t)| CommEdge { link, slot: pg.slot_at(t) })
    }

    /// Offset at which the packet is at its destination.
    pub fn arrival_offset(&self) -> u32 {
        self.hops.last().map(|&(_, t)| t + 1).unwrap_or(0)
    }

    pub fn to_schedule_path(&self, pg: &PacketGraph<'_>) -> SchedulePath {
        let topo = pg.tecg.topology();
        let mut hops = Vec::new();
        let mut prev: Option<(NodeId, u32)> = None;
        for &(link, t) in &self.hops {
            if let Some((node, at)) = prev {
                for w in at..t {
                    hops.push(Hop::Storage { node, slot: pg.slot_at(w) });
                }
            }
            hops.push(Hop::Communication { link, slot: pg.slot_at(t) });
            prev = Some((topo.endpoints(link).1, t + 1));
        }
        SchedulePath { packet: pg.packet, hops }
    }

    /// Inverse of [`TimedPath::to_schedule_path`] for paths that lie in `pg`.
    pub fn from_schedule_path(path: &SchedulePath, pg: &PacketGraph<'_>) -> Option<Self> {
        let first = pg.offset_of(path.first_slot()?)?;
        let mut hops = Vec::new();
        for (i, h) in path.hops.iter().enumerate() {
            if let Some(e) = h.comm_edge() {
                hops.push((e.link, first + i as u32));
            }
        }
        Some(TimedPath { hops })
    }
}

/// Ordering of candidate paths in [`shortest_path`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Minimum total weight, then fewest comm hops, then earliest delivery.
    LightestLoad,
    /// Earliest delivery, then fewest comm hops.
    EarliestArrival,
    /// Fewest comm hops, then earliest delivery.
    FewestHops,
}

#[derive(Clone, Copy, Debug)]
struct Label {
    cost: u64,
    hops: u32,
    arrival: u32,
    pred: Pred,
}

#[derive(Clone, Copy, Debug)]
enum Pred {
    Start,
    Storage,
    Comm(LinkId, NodeId),
}

impl Label {
    fn key(&self, obj: Objective) -> (u64, u64, u64) {
        match obj {
            Objective::LightestLoad => (self.cost, self.hops as u64, self.arrival as u64),
            Objective::EarliestArrival => (self.arrival as u64, self.hops as u64, 0),
            Objective::FewestHops => (self.hops as u64, self.arrival as u64, 0),
        }
    }
}

/// Best path from `(source, 0)` to `(destination, len)` over the layered
/// view of `pg`.
///
/// `usable(link, offset)` filters communication edges on top of the free
/// check; `weight(link, offset)` is only consulted for
/// [`Objective::LightestLoad`]. Storage edges are free of charge and always
/// usable. The destination never forwards. Ties are broken by
/// lower node id, and storage before transmission.
pub fn shortest_path(
    pg: &PacketGraph<'_>,
    objective: Objective,
    mut usable: impl FnMut(LinkId, u32) -> bool,
    mut weight: impl FnMut(LinkId, u32) -> u64,
) -> Option<TimedPath> {
    let topo = pg.tecg.topology();
    let n = topo.node_count();
    let len = pg.len as usize;
    let mut labels: Vec<Option<Label>> = vec![None; n * (len + 1)];
    let at = |node: NodeId, t: usize| t * n + node.index();
    labels[at(pg.source, 0)] = Some(Label { cost: 0, hops: 0, arrival: u32::MAX, pred: Pred::Start });

    let relax = |labels: &mut Vec<Option<Label>>, idx: usize, cand: Label| match &labels[idx] {
        Some(cur) if cur.key(objective) <= cand.key(objective) => {}
        _ => labels[idx] = Some(cand),
    };

    for t in 0..len {
        for u in topo.nodes() {
            let Some(lab) = labels[at(u, t)] else { continue };
            relax(&mut labels, at(u, t + 1), Label { pred: Pred::Storage, ..lab });
            if u == pg.destination {
                continue;
            }
            for &link in topo.out_links(u) {
                if !pg.is_free(link, t as u32) || !usable(link, t as u32) {
                    continue;
                }
                let v = topo.endpoints(link).1;
                let w = if objective == Objective::LightestLoad { weight(link, t as u32) } else { 0 };
                let arrival = if v == pg.destination { lab.arrival.min(t as u32 + 1) } else { lab.arrival };
                relax(
                    &mut labels,
                    at(v, t + 1),
                    Label { cost: lab.cost + w, hops: lab.hops + 1, arrival, pred: Pred::Comm(link, u) },
                );
            }
        }
    }

    labels[at(pg.destination, len)]?;
    let mut hops = Vec::new();
    let (mut node, mut t) = (pg.destination, len);
    loop {
        let lab = labels[at(node, t)].expect("predecessor chain is complete");
        match lab.pred {
            Pred::Start => break,
            Pred::Storage => t -= 1,
            Pred::Comm(link, from) => {
                t -= 1;
                hops.push((link, t as u32));
                node = from;
            }
        }
    }
    hops.reverse();
    Some(TimedPath { hops })
}

/// Result of [`enumerate_paths`].
#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub paths: Vec<TimedPath>,
    /// Set when the limit stopped the enumeration early.
    pub truncated: bool,
}

/// All simple time-respecting paths of `pg` (no node transmits twice, the
/// path ends on first reaching the destination), in depth-first order:
/// departure offset first, then link id.
///
/// With `allow_storage` false the packet may still wait at its source but
/// must be forwarded in the slot right after it is received elsewhere.
/// `usable` filters edges on top of the free check.
pub fn enumerate_paths(
    pg: &PacketGraph<'_>,
    allow_storage: bool,
    limit: usize,
    usable: &mut dyn FnMut(LinkId, u32) -> bool,
) -> Enumeration {
    let mut out = Enumeration::default();
    let mut visited = vec![false; pg.tecg.topology().node_count()];
    let mut stack = Vec::new();
    visited[pg.source.index()] = true;
    let cap = limit.saturating_add(1);
    walk(pg, pg.source, 0, true, allow_storage, cap, usable, &mut visited, &mut stack, &mut |p| {
        out.paths.push(TimedPath { hops: p.to_vec() });
    });
    if out.paths.len() > limit {
        out.paths.truncate(limit);
        out.truncated = true;
    }
    out
}

/// Number of simple time-respecting paths, stopping once `guard` is passed.
/// Returns `None` when the count exceeds `guard`.
pub fn count_paths(pg: &PacketGraph<'_>, guard: u64) -> Option<u64> {
    let mut visited = vec![false; pg.tecg.topology().node_count()];
    visited[pg.source.index()] = true;
    let mut count = 0u64;
    let cap = usize::try_from(guard.saturating_add(1)).unwrap_or(usize::MAX);
    walk(pg, pg.source, 0, true, true, cap, &mut |_, _| true, &mut visited, &mut Vec::new(), &mut |_| {
        count += 1
    });
    (count <= guard).then_some(count)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    pg: &PacketGraph<'_>,
    node: NodeId,
    t: u32,
    at_source: bool,
    allow_storage: bool,
    limit: usize,
    usable: &mut dyn FnMut(LinkId, u32) -> bool,
    visited: &mut Vec<bool>,
    stack: &mut Vec<(LinkId, u32)>,
    emit: &mut dyn FnMut(&[(LinkId, u32)]),
) -> usize {
    let topo = pg.tecg.topology();
    let last = if allow_storage || at_source { pg.len } else { (t + 1).min(pg.len) };
    let mut found = 0usize;
    for dep in t..last {
        for &link in topo.out_links(node) {
            if found >= limit {
                return found;
            }
            let v = topo.endpoints(link).1;
            if visited[v.index()] || !pg.is_free(link, dep) || !usable(link, dep) {
                continue;
            }
            stack.push((link, dep));
            if v == pg.destination {
                emit(stack);
                found += 1;
            } else if dep + 1 < pg.len {
                visited[v.index()] = true;
                found += walk(pg, v, dep + 1, false, allow_storage, limit - found, usable, visited, stack, emit);
                visited[v.index()] = false;
            }
            stack.pop();
        }
    }
    found
}
