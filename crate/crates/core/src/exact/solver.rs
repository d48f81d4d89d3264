//! Branch-and-bound over flow admissions.
//!
//! Every packet (HFS) or every flow (FCS, where one choice fixes all packets
//! of the flow) becomes a CSP variable whose domain is the list of its
//! conflict-free schedule paths in the base graph. The outer search decides
//! admit/reject per flow, admitting first; the inner search checks that the
//! admitted set still has a conflict-free assignment, first by routing only
//! the new flow around the current assignment and, when that fails, by
//! re-solving the whole admitted set. Conflicts are tracked with per-option
//! counters over an inverted edge index so forward checking is cheap.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::IlpModel;
use crate::model::{packet_windows, FlowSpec, Schedule};
use crate::paths::{enumerate_paths, TimedPath};
use crate::tecg::Tecg;
use crate::{Error, Mode};

/// Paths enumerated per packet before the domain is cut (the result is then
/// no longer proven optimal).
pub const OPTION_LIMIT: usize = 50_000;
/// Search nodes allowed for one re-solve of the admitted set.
pub const RESOLVE_LIMIT: u64 = 200_000;

/// Stop condition polled during the search.
pub trait Budget {
    fn exhausted(&mut self) -> bool;
}

pub struct Unlimited;

impl Budget for Unlimited {
    fn exhausted(&mut self) -> bool {
        false
    }
}

/// Allows a fixed number of polls.
pub struct NodeLimit(pub u64);

impl Budget for NodeLimit {
    fn exhausted(&mut self) -> bool {
        if self.0 == 0 {
            return true;
        }
        self.0 -= 1;
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    ProvenOptimal,
    /// Search stopped early; the schedule is the best one found.
    BestKnown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    pub schedule: Schedule,
    pub objective: u32,
    pub status: SolveStatus,
    /// Outer search nodes visited.
    pub nodes: u64,
}

struct Item {
    flow: usize,
    options: core::ops::Range<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Sat,
    Unsat,
    Aborted,
}

struct Csp {
    items: Vec<Item>,
    opt_item: Vec<u32>,
    opt_edges: Vec<Vec<u32>>,
    opt_path: Vec<TimedPath>,
    inv: Vec<Vec<u32>>,
    conflict: Vec<u32>,
    avail: Vec<u32>,
    assigned: Vec<Option<u32>>,
}

impl Csp {
    fn assign(&mut self, o: u32) {
        let item = self.opt_item[o as usize] as usize;
        self.assigned[item] = Some(o);
        for &e in &self.opt_edges[o as usize] {
            for &o2 in &self.inv[e as usize] {
                let c = &mut self.conflict[o2 as usize];
                if *c == 0 {
                    self.avail[self.opt_item[o2 as usize] as usize] -= 1;
                }
                *c += 1;
            }
        }
    }

    fn unassign(&mut self, item: usize) {
        let Some(o) = self.assigned[item].take() else { return };
        for &e in &self.opt_edges[o as usize] {
            for &o2 in &self.inv[e as usize] {
                let c = &mut self.conflict[o2 as usize];
                *c -= 1;
                if *c == 0 {
                    self.avail[self.opt_item[o2 as usize] as usize] += 1;
                }
            }
        }
    }

    /// Depth-first search with minimum-remaining-values ordering over the
    /// unassigned items in `active`. `hint` gives a preferred option per item.
    fn search(&mut self, active: &[usize], hint: &[Option<u32>], nodes: &mut u64) -> Outcome {
        let mut pick: Option<usize> = None;
        for &it in active {
            if self.assigned[it].is_some() {
                continue;
            }
            if pick.is_none_or(|p| self.avail[it] < self.avail[p]) {
                pick = Some(it);
                if self.avail[it] == 0 {
                    return Outcome::Unsat;
                }
            }
        }
        let Some(it) = pick else { return Outcome::Sat };
        if *nodes == 0 {
            return Outcome::Aborted;
        }
        *nodes -= 1;
        let range = self.items[it].options.clone();
        let preferred = hint.get(it).copied().flatten();
        let order = preferred.into_iter().chain(range.map(|o| o as u32).filter(|&o| Some(o) != preferred));
        for o in order {
            if self.conflict[o as usize] != 0 {
                continue;
            }
            self.assign(o);
            match self.search(active, hint, nodes) {
                Outcome::Unsat => self.unassign(it),
                other => return other,
            }
        }
        Outcome::Unsat
    }
}

struct Search<'a, B: Budget> {
    csp: Csp,
    budget: &'a mut B,
    flow_items: Vec<Vec<usize>>,
    order: Vec<usize>,
    packets: Vec<u32>,
    src: Vec<usize>,
    dst: Vec<usize>,
    out_cap: Vec<u64>,
    in_cap: Vec<u64>,
    admitted: Vec<usize>,
    best: Vec<usize>,
    best_assign: Vec<Option<u32>>,
    /// Per item and packet: edges the packet can leave its source on, and
    /// edges it can reach its destination on.
    first_edges: Vec<Vec<Vec<u32>>>,
    last_edges: Vec<Vec<Vec<u32>>>,
    matcher: Matcher,
    /// Budget ran out.
    stopped: bool,
    /// Largest objective a subtree skipped after an inconclusive
    /// feasibility check could have reached.
    unsure_bound: usize,
    nodes: u64,
}

/// Bipartite matching scratch space (augmenting paths), keyed by edge index.
struct Matcher {
    owner: Vec<u32>,
    seen: Vec<u32>,
    stamp: u32,
}

impl Matcher {
    fn new(edges: usize) -> Self {
        Matcher { owner: vec![u32::MAX; edges], seen: vec![0; edges], stamp: 0 }
    }

    /// Whether every unit can get a distinct edge from its candidate list.
    fn perfect(&mut self, units: &[&[u32]]) -> bool {
        let mut touched: Vec<u32> = Vec::new();
        let mut ok = true;
        for u in 0..units.len() {
            self.stamp = self.stamp.wrapping_add(1);
            if self.stamp == 0 {
                self.seen.iter_mut().for_each(|s| *s = 0);
                self.stamp = 1;
            }
            if !self.augment(units, u, &mut touched) {
                ok = false;
                break;
            }
        }
        for e in touched {
            self.owner[e as usize] = u32::MAX;
        }
        ok
    }

    fn augment(&mut self, units: &[&[u32]], u: usize, touched: &mut Vec<u32>) -> bool {
        for &e in units[u] {
            if self.seen[e as usize] == self.stamp {
                continue;
            }
            self.seen[e as usize] = self.stamp;
            let holder = self.owner[e as usize];
            if holder == u32::MAX || self.augment(units, holder as usize, touched) {
                if holder == u32::MAX {
                    touched.push(e);
                }
                self.owner[e as usize] = u as u32;
                return true;
            }
        }
        false
    }
}

impl<B: Budget> Search<'_, B> {
    fn admitted_items(&self) -> Vec<usize> {
        self.admitted.iter().flat_map(|&f| self.flow_items[f].iter().copied()).collect()
    }

    /// Tries to add flow `f` to the admitted set, keeping a valid assignment
    /// for the old set when it fails.
    /// Hall condition at the source and destination of `f`: every packet of
    /// the admitted flows there needs its own first (last) edge.
    fn endpoints_fit(&mut self, f: usize) -> bool {
        for (ends, table) in [(&self.src, &self.first_edges), (&self.dst, &self.last_edges)] {
            let node = ends[f];
            let units: Vec<&[u32]> = self
                .admitted
                .iter()
                .copied()
                .chain(core::iter::once(f))
                .filter(|&g| ends[g] == node)
                .flat_map(|g| self.flow_items[g].iter())
                .flat_map(|&it| table[it].iter().map(Vec::as_slice))
                .collect();
            if !self.matcher.perfect(&units) {
                return false;
            }
        }
        true
    }

    fn try_admit(&mut self, f: usize) -> Outcome {
        if !self.endpoints_fit(f) {
            return Outcome::Unsat;
        }
        let mut nodes = RESOLVE_LIMIT;
        let own = self.flow_items[f].clone();
        match self.csp.search(&own, &[], &mut nodes) {
            Outcome::Sat => return Outcome::Sat,
            Outcome::Aborted => {
                for &it in &own {
                    self.csp.unassign(it);
                }
            }
            Outcome::Unsat => {}
        }
        if self.admitted.is_empty() {
            return Outcome::Unsat;
        }
        let saved = self.csp.assigned.clone();
        let mut all = self.admitted_items();
        for &it in &all {
            self.csp.unassign(it);
        }
        all.extend_from_slice(&own);
        let mut nodes = RESOLVE_LIMIT;
        match self.csp.search(&all, &saved, &mut nodes) {
            Outcome::Sat => Outcome::Sat,
            outcome => {
                for &it in &all {
                    self.csp.unassign(it);
                }
                for &it in &all {
                    if let Some(o) = saved[it] {
                        self.csp.assign(o);
                    }
                }
                outcome
            }
        }
    }

    /// Admitted plus the largest number of remaining flows that fit the
    /// free send slots of their sources and receive slots of their
    /// destinations.
    fn upper_bound(&self, pos: usize) -> usize {
        let rest = &self.order[pos..];
        let side = |ends: &[usize], cap: &[u64]| -> usize {
            let mut left = cap.to_vec();
            for &f in &self.admitted {
                left[ends[f]] = left[ends[f]].saturating_sub(self.packets[f] as u64);
            }
            let mut need: Vec<(usize, u32)> = rest.iter().map(|&f| (ends[f], self.packets[f])).collect();
            need.sort_unstable_by_key(|&(n, p)| (n, p));
            need.into_iter()
                .filter(|&(n, p)| {
                    if left[n] >= p as u64 {
                        left[n] -= p as u64;
                        true
                    } else {
                        false
                    }
                })
                .count()
        };
        self.admitted.len() + side(&self.src, &self.out_cap).min(side(&self.dst, &self.in_cap))
    }

    fn dfs(&mut self, pos: usize) {
        if self.stopped {
            return;
        }
        self.nodes += 1;
        if self.budget.exhausted() {
            self.stopped = true;
            return;
        }
        if self.admitted.len() > self.best.len() {
            self.best = self.admitted.clone();
            self.best_assign = self.csp.assigned.clone();
        }
        if pos == self.order.len() || self.upper_bound(pos) <= self.best.len() {
            return;
        }
        let f = self.order[pos];
        match self.try_admit(f) {
            Outcome::Sat => {}
            Outcome::Unsat => return self.dfs(pos + 1),
            Outcome::Aborted => {
                let bound = self.upper_bound(pos + 1) + 1;
                self.unsure_bound = self.unsure_bound.max(bound);
                return self.dfs(pos + 1);
            }
        }
        self.admitted.push(f);
        self.dfs(pos + 1);
        self.admitted.pop();
        for it in self.flow_items[f].clone() {
            self.csp.unassign(it);
        }
        self.dfs(pos + 1);
    }
}

/// Solves `model` to optimality unless `budget` runs out first.
pub fn solve<B: Budget>(model: &IlpModel, budget: &mut B) -> Result<ExactResult, Error> {
    solve_instance(&model.base, &model.flows, model.mode, budget)
}

/// Same as [`solve`] without materializing the model.
pub fn solve_instance<B: Budget>(
    base: &Tecg,
    flows: &[FlowSpec],
    mode: Mode,
    budget: &mut B,
) -> Result<ExactResult, Error> {
    let hc = *base.hypercycle();
    hc.check_flows(flows)?;
    let mut truncated = false;
    let mut csp = Csp {
        items: Vec::new(),
        opt_item: Vec::new(),
        opt_edges: Vec::new(),
        opt_path: Vec::new(),
        inv: vec![Vec::new(); base.comm_edge_capacity()],
        conflict: Vec::new(),
        avail: Vec::new(),
        assigned: Vec::new(),
    };
    let mut flow_items: Vec<Vec<usize>> = Vec::with_capacity(flows.len());
    let mut packets = Vec::with_capacity(flows.len());
    let mut feasible = Vec::with_capacity(flows.len());
    for (fi, f) in flows.iter().enumerate() {
        let windows = packet_windows(f, &hc)?;
        packets.push(windows.len() as u32);
        let graphs: Vec<_> = windows.iter().map(|&w| base.packet_graph(f, w)).collect();
        let push_item = |csp: &mut Csp, paths: Vec<(TimedPath, Vec<u32>)>| {
            let item = csp.items.len();
            let start = csp.opt_edges.len();
            for (p, edges) in paths {
                let o = csp.opt_edges.len() as u32;
                for &e in &edges {
                    csp.inv[e as usize].push(o);
                }
                csp.opt_item.push(item as u32);
                csp.opt_edges.push(edges);
                csp.opt_path.push(p);
                csp.conflict.push(0);
            }
            let end = csp.opt_edges.len();
            csp.avail.push((end - start) as u32);
            csp.assigned.push(None);
            csp.items.push(Item { flow: fi, options: start..end });
            item
        };
        let mut items = Vec::new();
        match mode {
            Mode::Hfs => {
                for pg in &graphs {
                    let en = enumerate_paths(pg, true, OPTION_LIMIT, &mut |_, _| true);
                    truncated |= en.truncated;
                    let opts = en
                        .paths
                        .into_iter()
                        .map(|p| {
                            let e = p.comm_edges(pg).map(|e| base.edge_index(e) as u32).collect();
                            (p, e)
                        })
                        .collect();
                    items.push(push_item(&mut csp, opts));
                }
            }
            Mode::Fcs => {
                let first = &graphs[0];
                let en = enumerate_paths(first, true, OPTION_LIMIT, &mut |l, t| graphs.iter().all(|g| g.is_free(l, t)));
                truncated |= en.truncated;
                let opts = en
                    .paths
                    .into_iter()
                    .map(|p| {
                        let e = graphs.iter().flat_map(|g| p.comm_edges(g).map(|e| base.edge_index(e) as u32)).collect();
                        (p, e)
                    })
                    .collect();
                items.push(push_item(&mut csp, opts));
            }
        }
        feasible.push(items.iter().all(|&it| csp.avail[it] > 0));
        flow_items.push(items);
    }

    // send / receive capacity of every node in the base graph
    let topo = base.topology();
    let mut out_cap = vec![0u64; topo.node_count()];
    let mut in_cap = vec![0u64; topo.node_count()];
    for l in topo.links() {
        let free = (hc.gamma - base.occupied_slots(l)) as u64;
        let (u, v) = topo.endpoints(l);
        out_cap[u.index()] += free;
        in_cap[v.index()] += free;
    }

    let mut order: Vec<usize> = (0..flows.len()).filter(|&f| feasible[f]).collect();
    order.sort_by_key(|&f| {
        let sizes = flow_items[f].iter().map(|&it| csp.items[it].options.len());
        (sizes.clone().min().unwrap_or(0), sizes.sum::<usize>(), f)
    });

    let n_items = csp.items.len();
    let mut first_edges = Vec::with_capacity(n_items);
    let mut last_edges = Vec::with_capacity(n_items);
    for item in &csp.items {
        let mut firsts: Vec<Vec<u32>> = Vec::new();
        let mut lasts: Vec<Vec<u32>> = Vec::new();
        for o in item.options.clone() {
            let h = csp.opt_path[o].hops.len();
            let edges = &csp.opt_edges[o];
            let units = edges.len() / h;
            firsts.resize(units, Vec::new());
            lasts.resize(units, Vec::new());
            for u in 0..units {
                firsts[u].push(edges[u * h]);
                lasts[u].push(edges[u * h + h - 1]);
            }
        }
        for list in firsts.iter_mut().chain(lasts.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        first_edges.push(firsts);
        last_edges.push(lasts);
    }
    let mut s = Search {
        csp,
        budget,
        flow_items,
        order,
        packets,
        src: flows.iter().map(|f| f.source.index()).collect(),
        dst: flows.iter().map(|f| f.destination.index()).collect(),
        out_cap,
        in_cap,
        admitted: Vec::new(),
        best: Vec::new(),
        best_assign: vec![None; n_items],
        first_edges,
        last_edges,
        matcher: Matcher::new(base.comm_edge_capacity()),
        stopped: false,
        unsure_bound: 0,
        nodes: 0,
    };
    s.dfs(0);

    let mut schedule = Schedule::new();
    let mut admitted = vec![false; flows.len()];
    for &f in &s.best {
        admitted[f] = true;
    }
    for (fi, f) in flows.iter().enumerate() {
        if !admitted[fi] {
            schedule.record(f.id, None);
            continue;
        }
        let windows = packet_windows(f, &hc)?;
        let chosen: Vec<&TimedPath> = s.flow_items[fi]
            .iter()
            .map(|&it| &s.csp.opt_path[s.best_assign[it].expect("admitted items are assigned") as usize])
            .collect();
        let paths = windows
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let pg = base.packet_graph(f, w);
                let p = if chosen.len() == 1 { chosen[0] } else { chosen[i] };
                p.to_schedule_path(&pg)
            })
            .collect();
        schedule.record(f.id, Some(paths));
    }
    debug_assert!(s.csp.items.iter().all(|it| it.flow < flows.len()));
    let status = if !s.stopped && s.unsure_bound <= s.best.len() && !truncated { SolveStatus::ProvenOptimal } else { SolveStatus::BestKnown };
    Ok(ExactResult { schedule, objective: s.best.len() as u32, status, nodes: s.nodes })
}
