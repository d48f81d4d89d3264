//! Exhaustive reference solver for tiny instances.
//!
//! Shares nothing with the branch-and-bound beyond the graph itself: node
//! paths are listed first, then every increasing assignment of offsets to
//! their hops; flow subsets are tried from largest to smallest and packets
//! are placed in deadline order with plain backtracking.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{packet_windows, CommEdge, FlowSpec, LinkId, NodeId};
use crate::tecg::{PacketGraph, Tecg};
use crate::{Error, Mode};

pub const MAX_FLOWS: usize = 4;
pub const MAX_PATHS: usize = 10_000;

type Choice = Vec<CommEdge>;

fn node_paths(tecg: &Tecg, from: NodeId, to: NodeId, max_hops: u32) -> Vec<Vec<LinkId>> {
    fn go(
        tecg: &Tecg,
        at: NodeId,
        to: NodeId,
        left: u32,
        seen: &mut Vec<NodeId>,
        cur: &mut Vec<LinkId>,
        out: &mut Vec<Vec<LinkId>>,
    ) {
        if at == to {
            out.push(cur.clone());
            return;
        }
        if left == 0 {
            return;
        }
        let topo = tecg.topology();
        for &l in topo.out_links(at) {
            let v = topo.endpoints(l).1;
            if seen.contains(&v) {
                continue;
            }
            seen.push(v);
            cur.push(l);
            go(tecg, v, to, left - 1, seen, cur, out);
            cur.pop();
            seen.pop();
        }
    }
    let mut out = Vec::new();
    go(tecg, from, to, max_hops, &mut vec![from], &mut Vec::new(), &mut out);
    out
}

/// Every way to put the hops of `route` at strictly increasing free offsets.
fn timings(pg: &PacketGraph<'_>, route: &[LinkId], out: &mut Vec<Choice>) -> Result<(), Error> {
    fn go(pg: &PacketGraph<'_>, route: &[LinkId], from: u32, cur: &mut Choice, out: &mut Vec<Choice>) -> Result<(), Error> {
        let Some((&l, rest)) = route.split_first() else {
            if out.len() >= MAX_PATHS {
                return Err(Error::OracleScaleExceeded(format!("more than {MAX_PATHS} paths for one packet")));
            }
            out.push(cur.clone());
            return Ok(());
        };
        for t in from..pg.len {
            if pg.is_free(l, t) {
                cur.push(CommEdge { link: l, slot: pg.slot_at(t) });
                go(pg, rest, t + 1, cur, out)?;
                cur.pop();
            }
        }
        Ok(())
    }
    go(pg, route, 0, &mut Vec::new(), out)
}

fn packet_choices(tecg: &Tecg, pg: &PacketGraph<'_>) -> Result<Vec<Choice>, Error> {
    let mut out = Vec::new();
    if pg.source == pg.destination {
        return Ok(out);
    }
    for route in node_paths(tecg, pg.source, pg.destination, pg.len) {
        timings(pg, &route, &mut out)?;
    }
    Ok(out)
}

fn place(groups: &[&Vec<Choice>], used: &mut BTreeSet<CommEdge>) -> bool {
    let Some((first, rest)) = groups.split_first() else { return true };
    for c in first.iter() {
        if c.iter().any(|e| used.contains(e)) {
            continue;
        }
        used.extend(c.iter().copied());
        if place(rest, used) {
            return true;
        }
        for e in c {
            used.remove(e);
        }
    }
    false
}

/// Largest number of flows that can be admitted together, by exhaustive
/// search. Refuses instances with more than [`MAX_FLOWS`] flows or more than
/// [`MAX_PATHS`] paths for a packet.
pub fn brute_force_oracle(tecg: &Tecg, flows: &[FlowSpec], mode: Mode) -> Result<u32, Error> {
    if flows.len() > MAX_FLOWS {
        return Err(Error::OracleScaleExceeded(format!("{} flows, at most {MAX_FLOWS} supported", flows.len())));
    }
    let hc = tecg.hypercycle();
    hc.check_flows(flows)?;
    // per flow: list of (deadline, arrival, choices) units to place
    let mut units: Vec<Vec<(u64, u32, Vec<Choice>)>> = Vec::new();
    for f in flows {
        let windows = packet_windows(f, hc)?;
        let graphs: Vec<_> = windows.iter().map(|&w| tecg.packet_graph(f, w)).collect();
        let per_packet: Vec<Vec<Choice>> = graphs.iter().map(|pg| packet_choices(tecg, pg)).collect::<Result<_, _>>()?;
        let mut list = Vec::new();
        match mode {
            Mode::Hfs => {
                for (w, c) in windows.iter().zip(per_packet) {
                    list.push((w.deadline, w.arrival, c));
                }
            }
            Mode::Fcs => {
                let g0 = &graphs[0];
                let mut whole = Vec::new();
                'paths: for c in &per_packet[0] {
                    let mut all = Vec::new();
                    for g in &graphs {
                        for e in c {
                            let t = g0.offset_of(e.slot).expect("edge lies in packet 1's lifespan");
                            if !g.is_free(e.link, t) {
                                continue 'paths;
                            }
                            all.push(CommEdge { link: e.link, slot: g.slot_at(t) });
                        }
                    }
                    whole.push(all);
                }
                list.push((windows[0].deadline, windows[0].arrival, whole));
            }
        }
        units.push(list);
    }
    for size in (1..=flows.len()).rev() {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let mut chosen: Vec<&(u64, u32, Vec<Choice>)> = subset.iter().flat_map(|&f| units[f].iter()).collect();
            chosen.sort_by_key(|u| (u.0, u.1));
            let groups: Vec<&Vec<Choice>> = chosen.iter().map(|u| &u.2).collect();
            if place(&groups, &mut BTreeSet::new()) {
                return Ok(size as u32);
            }
            // next combination in lexicographic order
            let n = flows.len();
            let Some(i) = (0..size).rev().find(|&i| subset[i] < n - size + i) else { break };
            subset[i] += 1;
            for j in i + 1..size {
                subset[j] = subset[j - 1] + 1;
            }
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Hypercycle, Topology};
    use alloc::sync::Arc;

    #[test]
    fn micro_instance() {
        let t = Arc::new(Topology::from_duplex(&["s", "a", "d"], &[("s", "a"), ("a", "d")]).unwrap());
        let (s, d) = (t.node("s").unwrap(), t.node("d").unwrap());
        let flows = [FlowSpec::new(0, s, d, 1, 2, 2).unwrap(), FlowSpec::new(1, s, d, 2, 3, 3).unwrap()];
        let g = Tecg::new(t, Hypercycle::new(6));
        assert_eq!(brute_force_oracle(&g, &flows, Mode::Hfs).unwrap(), 2);
        assert_eq!(brute_force_oracle(&g, &flows, Mode::Fcs).unwrap(), 1);
    }

    #[test]
    fn coprime_single_link() {
        let t = Arc::new(Topology::new(&["s", "d"], &[("s", "d")]).unwrap());
        let g = Tecg::new(t, Hypercycle::new(105));
        let flows: Vec<_> =
            [3u32, 5, 7].iter().enumerate().map(|(i, &c)| FlowSpec::new(i as u32, NodeId(0), NodeId(1), 1, c, c).unwrap()).collect();
        assert_eq!(brute_force_oracle(&g, &flows, Mode::Hfs).unwrap(), 3);
        assert_eq!(brute_force_oracle(&g, &flows, Mode::Fcs).unwrap(), 1);
    }

    #[test]
    fn too_many_flows() {
        let t = Arc::new(Topology::new(&["s", "d"], &[("s", "d")]).unwrap());
        let g = Tecg::new(t, Hypercycle::new(2));
        let f = FlowSpec::new(0, NodeId(0), NodeId(1), 1, 2, 2).unwrap();
        let flows: Vec<_> = (0..5).map(|i| FlowSpec { id: crate::model::FlowId(i), ..f }).collect();
        assert!(matches!(brute_force_oracle(&g, &flows, Mode::Hfs), Err(Error::OracleScaleExceeded(_))));
    }
}
