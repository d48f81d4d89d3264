//! File formats.
//!
//! * topology: JSON `{"nodes": [..], "links": [[u, v], ..]}`, links directed
//! * flows: CSV `id,src,dst,arrival,cycle,max_delay` with node names
//! * occupancy: JSON `[{"link": [u, v], "slot": s}, ..]`
//! * schedule: JSON `{"objective", "status", "admitted", "paths"}`; a hop is
//!   `{"from", "to", "slot"}` and storage hops have `from == to`
//! * admission traces: one JSON object per line, tagged with the scheme

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use ttsched_core::llf::FlowTrace;
use ttsched_core::{CommEdge, FlowId, FlowSpec, Hop, PacketId, Schedule, SchedulePath, Topology};

use crate::Error;

#[derive(Serialize, Deserialize)]
struct TopologyJson {
    nodes: Vec<String>,
    links: Vec<(String, String)>,
}

pub fn topology_to_json(topo: &Topology) -> String {
    let links = topo
        .links()
        .map(|l| {
            let (u, v) = topo.endpoints(l);
            (topo.name(u).to_string(), topo.name(v).to_string())
        })
        .collect();
    serde_json::to_string_pretty(&TopologyJson { nodes: topo.names().to_vec(), links }).expect("plain data serializes")
}

pub fn topology_from_json(text: &str) -> Result<Topology, Error> {
    let t: TopologyJson = serde_json::from_str(text)?;
    Ok(Topology::new(&t.nodes, &t.links)?)
}

pub fn read_topology(path: &Path) -> Result<Topology, Error> {
    topology_from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[derive(Serialize, Deserialize)]
struct FlowRow {
    id: u32,
    src: String,
    dst: String,
    arrival: u32,
    cycle: u32,
    max_delay: u32,
}

pub fn write_flows<W: Write>(w: W, topo: &Topology, flows: &[FlowSpec]) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    for f in flows {
        out.serialize(FlowRow {
            id: f.id.0,
            src: topo.name(f.source).into(),
            dst: topo.name(f.destination).into(),
            arrival: f.arrival,
            cycle: f.cycle,
            max_delay: f.max_delay,
        })?;
    }
    if flows.is_empty() {
        out.write_record(["id", "src", "dst", "arrival", "cycle", "max_delay"])?;
    }
    out.flush().map_err(|e| Error::io(Path::new("<flows>"), e))?;
    Ok(())
}

pub fn flows_to_csv(topo: &Topology, flows: &[FlowSpec]) -> String {
    let mut buf = Vec::new();
    write_flows(&mut buf, topo, flows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_flows<R: Read>(r: R, topo: &Topology) -> Result<Vec<FlowSpec>, Error> {
    let mut rd = csv::Reader::from_reader(r);
    let mut flows = Vec::new();
    for row in rd.deserialize() {
        let row: FlowRow = row?;
        let node = |n: &str| topo.node(n).ok_or_else(|| ttsched_core::Error::UnknownNode(n.into()));
        flows.push(FlowSpec::new(row.id, node(&row.src)?, node(&row.dst)?, row.arrival, row.cycle, row.max_delay)?);
    }
    Ok(flows)
}

pub fn read_flows_file(path: &Path, topo: &Topology) -> Result<Vec<FlowSpec>, Error> {
    read_flows(fs::File::open(path).map_err(|e| Error::io(path, e))?, topo)
}

#[derive(Serialize, Deserialize)]
struct OccupiedJson {
    link: (String, String),
    slot: u32,
}

pub fn occupancy_to_json(topo: &Topology, edges: &[CommEdge]) -> String {
    let rows: Vec<OccupiedJson> = edges
        .iter()
        .map(|e| {
            let (u, v) = topo.endpoints(e.link);
            OccupiedJson { link: (topo.name(u).into(), topo.name(v).into()), slot: e.slot }
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("plain data serializes")
}

pub fn occupancy_from_json(text: &str, topo: &Topology) -> Result<Vec<CommEdge>, Error> {
    let rows: Vec<OccupiedJson> = serde_json::from_str(text)?;
    rows.into_iter().map(|r| Ok(CommEdge { link: link_by_names(topo, &r.link.0, &r.link.1)?, slot: r.slot })).collect()
}

fn link_by_names(topo: &Topology, u: &str, v: &str) -> Result<ttsched_core::LinkId, Error> {
    let node = |n: &str| topo.node(n).ok_or_else(|| ttsched_core::Error::UnknownNode(n.into()));
    let (a, b) = (node(u)?, node(v)?);
    Ok(topo.link(a, b).ok_or(ttsched_core::Error::NoSuchLink(a, b))?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopJson {
    pub from: String,
    pub to: String,
    pub slot: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub flow: u32,
    pub seq: u32,
    pub hops: Vec<HopJson>,
}

/// Schedule file. `status` is `proven_optimal`, `best_known` or `heuristic`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleJson {
    pub objective: u32,
    pub status: String,
    pub admitted: Vec<u32>,
    pub rejected: Vec<u32>,
    pub paths: Vec<PathJson>,
}

fn hops_to_json(topo: &Topology, path: &SchedulePath) -> Vec<HopJson> {
    path.hops
        .iter()
        .map(|h| match *h {
            Hop::Communication { link, slot } => {
                let (u, v) = topo.endpoints(link);
                HopJson { from: topo.name(u).into(), to: topo.name(v).into(), slot }
            }
            Hop::Storage { node, slot } => HopJson { from: topo.name(node).into(), to: topo.name(node).into(), slot },
        })
        .collect()
}

fn hops_from_json(topo: &Topology, hops: &[HopJson]) -> Result<Vec<Hop>, Error> {
    hops.iter()
        .map(|h| {
            if h.from == h.to {
                let node = topo.node(&h.from).ok_or_else(|| ttsched_core::Error::UnknownNode(h.from.clone()))?;
                Ok(Hop::Storage { node, slot: h.slot })
            } else {
                Ok(Hop::Communication { link: link_by_names(topo, &h.from, &h.to)?, slot: h.slot })
            }
        })
        .collect()
}

pub fn schedule_to_json(topo: &Topology, schedule: &Schedule, status: &str) -> ScheduleJson {
    let (admitted, rejected): (Vec<_>, Vec<_>) = schedule.admitted.iter().partition(|(_, &ok)| ok);
    ScheduleJson {
        objective: schedule.admitted_count() as u32,
        status: status.into(),
        admitted: admitted.into_iter().map(|(f, _)| f.0).collect(),
        rejected: rejected.into_iter().map(|(f, _)| f.0).collect(),
        paths: schedule
            .paths
            .iter()
            .map(|(p, path)| PathJson { flow: p.flow.0, seq: p.seq, hops: hops_to_json(topo, path) })
            .collect(),
    }
}

pub fn schedule_from_json(topo: &Topology, doc: &ScheduleJson) -> Result<Schedule, Error> {
    let mut s = Schedule::new();
    for &f in &doc.admitted {
        s.admitted.insert(FlowId(f), true);
    }
    for &f in &doc.rejected {
        s.admitted.insert(FlowId(f), false);
    }
    for p in &doc.paths {
        let packet = PacketId { flow: FlowId(p.flow), seq: p.seq };
        s.paths.insert(packet, SchedulePath { packet, hops: hops_from_json(topo, &p.hops)? });
    }
    Ok(s)
}

#[derive(Serialize)]
struct TracePacket {
    seq: u32,
    cost: f64,
    hops: Vec<HopJson>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    scheme: &'a str,
    flow: u32,
    admitted: bool,
    packets: Vec<TracePacket>,
}

pub fn write_traces<W: Write>(mut w: W, topo: &Topology, scheme: &str, traces: &[FlowTrace]) -> Result<(), Error> {
    for t in traces {
        let line = TraceLine {
            scheme,
            flow: t.flow.0,
            admitted: t.admitted,
            packets: t
                .packets
                .iter()
                .map(|p| TracePacket { seq: p.path.packet.seq, cost: p.cost, hops: hops_to_json(topo, &p.path) })
                .collect(),
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w).map_err(|e| Error::io(Path::new("<traces>"), e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{afdx, gen_flows, FlowGen};
    use ttsched_core::{llf::admit_sequence, Hypercycle, Tecg};

    #[test]
    fn topology_round_trip() {
        let t = afdx();
        let back = topology_from_json(&topology_to_json(&t)).unwrap();
        assert_eq!(back.names(), t.names());
        assert_eq!(back.link_count(), 26);
    }

    #[test]
    fn flows_round_trip() {
        let t = afdx();
        let f = gen_flows(&FlowGen::new(10, &[2, 3, 5], 1), &t).unwrap();
        let text = flows_to_csv(&t, &f);
        assert!(text.starts_with("id,src,dst,arrival,cycle,max_delay\n"));
        assert_eq!(read_flows(text.as_bytes(), &t).unwrap(), f);
        assert_eq!(flows_to_csv(&t, &[]), "id,src,dst,arrival,cycle,max_delay\n");
    }

    #[test]
    fn occupancy_round_trip() {
        let t = afdx();
        let e = vec![CommEdge { link: ttsched_core::LinkId(3), slot: 4 }];
        assert_eq!(occupancy_from_json(&occupancy_to_json(&t, &e), &t).unwrap(), e);
        assert!(occupancy_from_json(r#"[{"link":["es1","es2"],"slot":1}]"#, &t).is_err());
    }

    #[test]
    fn schedule_round_trip() {
        let t = std::sync::Arc::new(afdx());
        let f = gen_flows(&FlowGen::new(12, &[2, 3, 5], 4), &t).unwrap();
        let mut g = Tecg::new(t.clone(), Hypercycle::new(30));
        let s = admit_sequence(&mut g, &f).unwrap();
        let doc = schedule_to_json(&t, &s, "heuristic");
        let text = serde_json::to_string(&doc).unwrap();
        let back = schedule_from_json(&t, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
