//! Exact admission control.
//!
//! [`build_hfs_model`] and [`build_fcs_model`] lay out the integer program
//! over the schedule-path graphs of every packet: one binary per packet and
//! edge, one admission binary per flow, and capacity, conservation, no-loop,
//! indicator and (for FCS) periodicity rows. The model can be written out in
//! LP format ([`lp`]) for an external solver, or solved in-process by the
//! branch-and-bound search in [`solver`], which explores exactly the same
//! feasible set through per-packet path enumeration.
//!
//! [`oracle`] is a deliberately naive exhaustive search used to cross-check
//! the solver on small instances.

pub mod lp;
pub mod oracle;
pub mod solver;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{packet_windows, CommEdge, FlowId, FlowSpec, LinkId, NodeId, PacketId, Topology};
use crate::tecg::{PacketGraph, Tecg};
use crate::{Error, Mode};

pub use oracle::brute_force_oracle;
pub use solver::{solve, Budget, ExactResult, NodeLimit, SolveStatus, Unlimited};

/// Edge of a packet's schedule-path graph, addressed by its offset inside the
/// lifespan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketEdge {
    Comm { link: LinkId, offset: u32 },
    Storage { node: NodeId, offset: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// `x` for one edge of one packet's schedule-path graph.
    Edge { packet: PacketId, edge: PacketEdge },
    /// `chi`: the flow is admitted.
    Admit(FlowId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKind {
    Capacity,
    Conservation,
    NoLoop,
    Indicator,
    Periodicity,
}

impl RowKind {
    pub fn prefix(self) -> &'static str {
        match self {
            RowKind::Capacity => "cap",
            RowKind::Conservation => "cons",
            RowKind::NoLoop => "noloop",
            RowKind::Indicator => "ind",
            RowKind::Periodicity => "per",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// Integer program for one admission instance. `base` and `flows` are kept so
/// the model can be solved without rebuilding the graph.
#[derive(Clone, Debug)]
pub struct IlpModel {
    pub mode: Mode,
    pub base: Tecg,
    pub flows: Vec<FlowSpec>,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
}

impl IlpModel {
    pub fn row_count(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    pub fn admit_vars(&self) -> impl Iterator<Item = (usize, FlowId)> + '_ {
        self.variables.iter().enumerate().filter_map(|(i, v)| match v.kind {
            VarKind::Admit(f) => Some((i, f)),
            VarKind::Edge { .. } => None,
        })
    }

    pub fn edge_var_count(&self) -> usize {
        self.variables.iter().filter(|v| matches!(v.kind, VarKind::Edge { .. })).count()
    }
}

/// LP-safe token for a node: its name when alphanumeric, `n<index>` otherwise.
pub(crate) fn node_token(topo: &Topology, node: NodeId) -> String {
    let name = topo.name(node);
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric()) {
        name.into()
    } else {
        format!("n{}", node.0)
    }
}

struct Builder<'a> {
    tecg: &'a Tecg,
    variables: Vec<Variable>,
    rows: Vec<Row>,
    // (packet, edge) -> variable index
    index: BTreeMap<(PacketId, PacketEdge), usize>,
    // comm edge -> competing variables
    competing: BTreeMap<CommEdge, Vec<usize>>,
}

impl Builder<'_> {
    fn var_name(&self, pg: &PacketGraph<'_>, edge: PacketEdge) -> String {
        let topo = self.tecg.topology();
        let (u, v, t) = match edge {
            PacketEdge::Comm { link, offset } => {
                let (u, v) = topo.endpoints(link);
                (u, v, offset)
            }
            PacketEdge::Storage { node, offset } => (node, node, offset),
        };
        format!(
            "x_{}_{}_{}_{}_{}_{}",
            pg.packet.flow.0,
            pg.packet.seq,
            node_token(topo, u),
            pg.slot_at(t),
            node_token(topo, v),
            pg.slot_at(t + 1)
        )
    }

    fn add_packet(&mut self, pg: &PacketGraph<'_>, chi: usize) {
        let topo = self.tecg.topology();
        let n = topo.node_count();
        let len = pg.len;
        // incoming / outgoing variable lists per layered vertex
        let vid = |node: NodeId, t: u32| t as usize * n + node.index();
        let mut ins: Vec<Vec<usize>> = alloc::vec![Vec::new(); n * (len as usize + 1)];
        let mut outs: Vec<Vec<usize>> = alloc::vec![Vec::new(); n * (len as usize + 1)];
        let mut sends: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];

        for t in 0..len {
            for link in topo.links() {
                if !pg.is_free(link, t) {
                    continue;
                }
                let edge = PacketEdge::Comm { link, offset: t };
                let var = self.push_var(pg, edge);
                let (u, v) = topo.endpoints(link);
                outs[vid(u, t)].push(var);
                ins[vid(v, t + 1)].push(var);
                sends[u.index()].push(var);
                self.competing.entry(CommEdge { link, slot: pg.slot_at(t) }).or_default().push(var);
            }
            for node in topo.nodes() {
                let var = self.push_var(pg, PacketEdge::Storage { node, offset: t });
                outs[vid(node, t)].push(var);
                ins[vid(node, t + 1)].push(var);
            }
        }

        let (k, i) = (pg.packet.flow.0, pg.packet.seq);
        for t in 0..=len {
            for node in topo.nodes() {
                if (node == pg.source && t == 0) || (node == pg.destination && t == len) {
                    continue;
                }
                let v = vid(node, t);
                let mut terms: Vec<(usize, i64)> = ins[v].iter().map(|&x| (x, 1)).collect();
                terms.extend(outs[v].iter().map(|&x| (x, -1)));
                self.rows.push(Row {
                    name: format!("cons_{k}_{i}_{}_{t}", node_token(topo, node)),
                    kind: RowKind::Conservation,
                    terms,
                    sense: Sense::Eq,
                    rhs: 0,
                });
            }
        }
        for node in topo.nodes() {
            if node == pg.destination {
                continue;
            }
            let mut terms: Vec<(usize, i64)> = sends[node.index()].iter().map(|&x| (x, 1)).collect();
            if terms.is_empty() {
                // keep the row so counts stay closed-form; LP needs a term
                terms.push((chi, 0));
            }
            self.rows.push(Row {
                name: format!("noloop_{k}_{i}_{}", node_token(topo, node)),
                kind: RowKind::NoLoop,
                terms,
                sense: Sense::Le,
                rhs: 1,
            });
        }
        let mut terms = alloc::vec![(chi, 1)];
        terms.extend(outs[vid(pg.source, 0)].iter().map(|&x| (x, -1)));
        self.rows.push(Row { name: format!("ind_{k}_{i}"), kind: RowKind::Indicator, terms, sense: Sense::Le, rhs: 0 });
    }

    fn push_var(&mut self, pg: &PacketGraph<'_>, edge: PacketEdge) -> usize {
        let name = self.var_name(pg, edge);
        let idx = self.variables.len();
        self.variables.push(Variable { name, kind: VarKind::Edge { packet: pg.packet, edge } });
        self.index.insert((pg.packet, edge), idx);
        idx
    }
}

fn build(tecg: &Tecg, flows: &[FlowSpec], mode: Mode) -> Result<IlpModel, Error> {
    tecg.hypercycle().check_flows(flows)?;
    let mut b = Builder { tecg, variables: Vec::new(), rows: Vec::new(), index: BTreeMap::new(), competing: BTreeMap::new() };
    let mut per_flow_packets: Vec<(FlowSpec, Vec<PacketId>)> = Vec::new();
    for f in flows {
        let chi = b.variables.len();
        b.variables.push(Variable { name: format!("chi_{}", f.id.0), kind: VarKind::Admit(f.id) });
        let mut pids = Vec::new();
        for w in packet_windows(f, tecg.hypercycle())? {
            let pg = tecg.packet_graph(f, w);
            b.add_packet(&pg, chi);
            pids.push(pg.packet);
        }
        per_flow_packets.push((*f, pids));
    }
    let competing = core::mem::take(&mut b.competing);
    let topo = tecg.topology();
    for (e, vars) in competing {
        let (u, v) = topo.endpoints(e.link);
        b.rows.push(Row {
            name: format!("cap_{}_{}_{}", node_token(topo, u), node_token(topo, v), e.slot),
            kind: RowKind::Capacity,
            terms: vars.into_iter().map(|x| (x, 1)).collect(),
            sense: Sense::Le,
            rhs: 1,
        });
    }
    if mode == Mode::Fcs {
        for (f, pids) in &per_flow_packets {
            let Some((&first, rest)) = pids.split_first() else { continue };
            let len = tecg.hypercycle().span_len(f.max_delay);
            let mut edges: Vec<PacketEdge> = Vec::new();
            for t in 0..len {
                edges.extend(topo.links().map(|link| PacketEdge::Comm { link, offset: t }));
                edges.extend(topo.nodes().map(|node| PacketEdge::Storage { node, offset: t }));
            }
            for &other in rest {
                for &edge in &edges {
                    let a = b.index.get(&(first, edge)).copied();
                    let c = b.index.get(&(other, edge)).copied();
                    let terms: Vec<(usize, i64)> = match (a, c) {
                        (None, None) => continue,
                        (Some(a), Some(c)) => alloc::vec![(a, 1), (c, -1)],
                        (Some(a), None) => alloc::vec![(a, 1)],
                        (None, Some(c)) => alloc::vec![(c, 1)],
                    };
                    let tag = match edge {
                        PacketEdge::Comm { link, offset } => format!("c{}_{offset}", link.0),
                        PacketEdge::Storage { node, offset } => format!("s{}_{offset}", node.0),
                    };
                    b.rows.push(Row {
                        name: format!("per_{}_{}_{tag}", f.id.0, other.seq),
                        kind: RowKind::Periodicity,
                        terms,
                        sense: Sense::Eq,
                        rhs: 0,
                    });
                }
            }
        }
    }
    Ok(IlpModel { mode, base: tecg.clone(), flows: flows.to_vec(), variables: b.variables, rows: b.rows })
}

/// Flexible-scheduling model: maximize admitted flows subject to capacity,
/// conservation, no-loop and indicator rows.
pub fn build_hfs_model(tecg: &Tecg, flows: &[FlowSpec]) -> Result<IlpModel, Error> {
    build(tecg, flows, Mode::Hfs)
}

/// HFS model plus rows tying every edge variable of packet 1 to the same
/// edge, shifted by the cycle, in every later packet of the flow. An edge
/// whose shifted copy does not exist is forced to zero.
pub fn build_fcs_model(tecg: &Tecg, flows: &[FlowSpec]) -> Result<IlpModel, Error> {
    build(tecg, flows, Mode::Fcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Hypercycle;
    use alloc::sync::Arc;

    fn micro() -> (Tecg, Vec<FlowSpec>) {
        let t = Arc::new(Topology::from_duplex(&["s", "a", "d"], &[("s", "a"), ("a", "d")]).unwrap());
        let (s, d) = (t.node("s").unwrap(), t.node("d").unwrap());
        let flows = alloc::vec![FlowSpec::new(0, s, d, 1, 2, 2).unwrap(), FlowSpec::new(1, s, d, 2, 3, 3).unwrap()];
        (Tecg::new(t, Hypercycle::new(6)), flows)
    }

    #[test]
    fn micro_instance_row_counts() {
        let (g, flows) = micro();
        let m = build_hfs_model(&g, &flows).unwrap();
        assert_eq!(m.admit_vars().count(), 2);
        assert_eq!(m.row_count(RowKind::Indicator), 5);
        // |V|·(len+1) - 2 vertices per packet: 3 packets with len 2, 2 with len 3
        assert_eq!(m.row_count(RowKind::Conservation), 3 * (3 * 3 - 2) + 2 * (3 * 4 - 2));
        assert_eq!(m.row_count(RowKind::NoLoop), 5 * 2);
        // every one of the 4·6 link-slots lies in some lifespan
        assert_eq!(m.row_count(RowKind::Capacity), 24);
        assert_eq!(m.edge_var_count(), 3 * 2 * (4 + 3) + 2 * 3 * (4 + 3));
        assert_eq!(m.row_count(RowKind::Periodicity), 0);
    }

    #[test]
    fn empty_and_single_packet_models() {
        let (g, flows) = micro();
        let m = build_hfs_model(&g, &[]).unwrap();
        assert!(m.variables.is_empty() && m.rows.is_empty());
        let one = FlowSpec { cycle: 6, ..flows[0] };
        let h = build_hfs_model(&g, &[one]).unwrap();
        assert_eq!(h.row_count(RowKind::Indicator), 1);
        let f = build_fcs_model(&g, &[one]).unwrap();
        assert_eq!(f.rows, h.rows);
        assert_eq!(f.variables, h.variables);
    }

    #[test]
    fn fcs_adds_shift_rows_and_fixes_missing_partners() {
        let (mut g, flows) = micro();
        let sa = g.topology().link(NodeId(0), NodeId(1)).unwrap();
        g.occupy(&[CommEdge { link: sa, slot: 3 }]).unwrap();
        let f = flows[0];
        let h = build_hfs_model(&g, &[f]).unwrap();
        let m = build_fcs_model(&g, &[f]).unwrap();
        assert_eq!(m.rows.len() - h.rows.len(), m.row_count(RowKind::Periodicity));
        // 2 later packets × 2 offsets × (4 links + 3 nodes)
        assert_eq!(m.row_count(RowKind::Periodicity), 2 * 2 * 7);
        let single: Vec<_> = m.rows.iter().filter(|r| r.kind == RowKind::Periodicity && r.terms.len() == 1).collect();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn variable_names_follow_the_scheme() {
        let (g, flows) = micro();
        let m = build_hfs_model(&g, &flows[1..]).unwrap();
        assert!(m.variables.iter().any(|v| v.name == "chi_1"));
        assert!(m.variables.iter().any(|v| v.name == "x_1_2_s_5_a_6"));
        assert!(m.variables.iter().any(|v| v.name == "x_1_2_a_6_d_1"));
        assert!(m.variables.iter().any(|v| v.name == "x_1_2_s_1_s_2"));
    }
}
