//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttsched::experiment::{run_scheme, Scheme};
use ttsched::gen::{afdx, erdos_renyi, gen_flows, ladder, ArrivalRule, FlowGen};
use ttsched::timed::solve_with_limit;
use ttsched_core::analysis::{blocked_slots, collides, count_solutions, IndexSet};
use ttsched_core::exact::{brute_force_oracle, build_fcs_model, build_hfs_model, solve, SolveStatus, Unlimited};
use ttsched_core::llf::admit_sequence;
use ttsched_core::verify::{jitter_mask, verify_schedule};
use ttsched_core::{FlowSpec, Hop, Hypercycle, Mode, NodeId, PacketId, Schedule, SchedulePath, Tecg, Topology};

const TABLE_SEED: u64 = 1;
const TABLE_COUNTS: [usize; 7] = [18, 24, 30, 36, 42, 48, 54];
const TABLE_RATIO: f64 = 0.85;
const EXACT_LIMIT_S: f64 = 60.0;
const RUNTIME_RATIO: f64 = 10.0;
const SWEEP_INSTANCES: u64 = 50;
const HFS_GOLDEN_COPRIME: u32 = 3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn line3() -> (Arc<Topology>, NodeId, NodeId) {
    let t = Arc::new(Topology::from_duplex(&["s", "a", "d"], &[("s", "a"), ("a", "d")]).unwrap());
    let (s, d) = (t.node("s").unwrap(), t.node("d").unwrap());
    (t, s, d)
}

fn micro_instance() -> Verdict {
    let start = Instant::now();
    let (t, s, d) = line3();
    let flows = [FlowSpec::new(0, s, d, 1, 2, 2).unwrap(), FlowSpec::new(1, s, d, 2, 3, 3).unwrap()];
    let g = Tecg::new(t, Hypercycle::new(6));
    let h = solve_with_limit(&build_hfs_model(&g, &flows).unwrap(), 1.0).unwrap();
    let f = solve_with_limit(&build_fcs_model(&g, &flows).unwrap(), 1.0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let clean = verify_schedule(&g, &flows, &h.schedule, Mode::Hfs).ok && verify_schedule(&g, &flows, &f.schedule, Mode::Fcs).ok;
    verdict(
        h.objective == 2 && f.objective == 1 && clean && secs < 1.0,
        format!("hfs_exact={} fcs_exact={} verified={clean} in {:.3}s", h.objective, f.objective, secs),
    )
}

fn coprime_gain() -> Verdict {
    let start = Instant::now();
    let t = Arc::new(Topology::new(&["s", "d"], &[("s", "d")]).unwrap());
    let flows: Vec<_> =
        [3u32, 5, 7].iter().enumerate().map(|(i, &c)| FlowSpec::new(i as u32, NodeId(0), NodeId(1), 1, c, c).unwrap()).collect();
    let g = Tecg::new(t, Hypercycle::new(105));
    let oracle = brute_force_oracle(&g, &flows, Mode::Hfs).unwrap();
    let h = solve(&build_hfs_model(&g, &flows).unwrap(), &mut Unlimited).unwrap();
    let f = solve(&build_fcs_model(&g, &flows).unwrap(), &mut Unlimited).unwrap();
    let mut work = g.clone();
    let llf = admit_sequence(&mut work, &flows).unwrap().admitted_count() as u32;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        oracle == HFS_GOLDEN_COPRIME && h.objective == HFS_GOLDEN_COPRIME && f.objective == 1 && llf == 3 && secs < 30.0,
        format!("oracle={oracle} hfs_exact={} fcs_exact={} hfs_llf={llf} in {:.2}s", h.objective, f.objective, secs),
    )
}

fn random_instance(seed: u64) -> (Tecg, Vec<FlowSpec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4usize);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut links = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(0.5) {
                links.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    if links.is_empty() {
        links.push((names[0].clone(), names[1].clone()));
    }
    let topo = Arc::new(Topology::new(&names, &links).unwrap());
    let gamma = [2u32, 3, 4, 6, 8, 12][rng.gen_range(0..6)];
    let divisors: Vec<u32> = (1..=gamma).filter(|c| gamma.is_multiple_of(*c)).collect();
    let mut g = Tecg::new(topo.clone(), Hypercycle::new(gamma));
    for l in topo.links() {
        for slot in 1..=gamma {
            if rng.gen_bool(0.15) {
                g.occupy(&[ttsched_core::CommEdge { link: l, slot }]).unwrap();
            }
        }
    }
    let k = rng.gen_range(1..=3u32);
    let flows = (0..k)
        .map(|id| {
            let s = rng.gen_range(0..n as u32);
            let d = (s + rng.gen_range(1..n as u32)) % n as u32;
            let cycle = divisors[rng.gen_range(0..divisors.len())];
            let arrival = rng.gen_range(1..=gamma);
            let max_delay = rng.gen_range(1..=cycle + 1);
            FlowSpec::new(id, NodeId(s), NodeId(d), arrival, cycle, max_delay).unwrap()
        })
        .collect();
    (g, flows)
}

fn oracle_sweep() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    for seed in 0..SWEEP_INSTANCES {
        let (g, flows) = random_instance(seed);
        let oracle = brute_force_oracle(&g, &flows, Mode::Hfs).unwrap();
        let h = solve(&build_hfs_model(&g, &flows).unwrap(), &mut Unlimited).unwrap();
        let f = solve(&build_fcs_model(&g, &flows).unwrap(), &mut Unlimited).unwrap();
        let mut work = g.clone();
        let llf = admit_sequence(&mut work, &flows).unwrap();
        let ok = h.objective == oracle
            && h.status == SolveStatus::ProvenOptimal
            && f.objective <= h.objective
            && llf.admitted_count() as u32 <= h.objective
            && verify_schedule(&g, &flows, &h.schedule, Mode::Hfs).ok
            && verify_schedule(&g, &flows, &f.schedule, Mode::Fcs).ok
            && verify_schedule(&g, &flows, &llf, Mode::Hfs).ok;
        if !ok {
            failures.push(seed);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures.is_empty() && secs < 60.0,
        format!("{}/{SWEEP_INSTANCES} instances agree (failing seeds {failures:?}) in {:.2}s", SWEEP_INSTANCES as usize - failures.len(), secs),
    )
}

fn solution_counts() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    let er = erdos_renyi(20, 0.2, 4).unwrap();
    let cases: [(&str, Topology, usize); 3] = [("afdx", afdx(), 7), ("ladder", ladder(), 7), ("er20", er, 6)];
    for (name, topo, count) in cases {
        let topo = Arc::new(topo);
        let gen = FlowGen::new(count, &[2, 3, 5], 17);
        let g = Tecg::new(topo.clone(), gen.hypercycle().unwrap());
        for f in gen_flows(&gen, &topo).unwrap() {
            let fcs = count_solutions(&g, &f, Mode::Fcs).unwrap();
            let hfs = count_solutions(&g, &f, Mode::Hfs).unwrap();
            if hfs != fcs.pow(g.gamma() / f.cycle) {
                bad.push(format!("{name}/{}", f.id.0));
            }
            checked += 1;
        }
    }
    let t = Arc::new(
        Topology::from_duplex(&["s", "a", "b", "d"], &[("s", "a"), ("s", "b"), ("a", "d"), ("b", "d")]).unwrap(),
    );
    let g = Tecg::new(t, Hypercycle::new(4));
    let f = FlowSpec::new(0, NodeId(0), NodeId(3), 1, 2, 2).unwrap();
    let (fcs, hfs) = (count_solutions(&g, &f, Mode::Fcs).unwrap(), count_solutions(&g, &f, Mode::Hfs).unwrap());
    verdict(
        bad.is_empty() && checked == 20 && fcs == BigUint::from(2u32) && hfs == BigUint::from(4u32),
        format!("power law holds on {}/{checked} flows; diamond fcs={fcs} hfs={hfs}", checked - bad.len()),
    )
}

struct TableRow {
    count: usize,
    llf: usize,
    exact: usize,
    proven: bool,
    llf_ms: f64,
    exact_ms: f64,
}

fn table_rows() -> Vec<TableRow> {
    let topo = Arc::new(afdx());
    let mut rows = Vec::new();
    for count in TABLE_COUNTS {
        let gen = FlowGen::new(count, &[2, 3, 5], TABLE_SEED);
        let flows = gen_flows(&gen, &topo).unwrap();
        let base = Tecg::new(topo.clone(), gen.hypercycle().unwrap());
        let llf = run_scheme(Scheme::HfsLlf, &base, &flows, EXACT_LIMIT_S).unwrap();
        let exact = run_scheme(Scheme::HfsExact, &base, &flows, EXACT_LIMIT_S).unwrap();
        assert!(verify_schedule(&base, &flows, &llf.schedule, Mode::Hfs).ok, "llf schedule for {count} flows");
        assert!(verify_schedule(&base, &flows, &exact.schedule, Mode::Hfs).ok, "exact schedule for {count} flows");
        rows.push(TableRow {
            count,
            llf: llf.schedule.admitted_count(),
            exact: exact.schedule.admitted_count(),
            proven: exact.status == "proven_optimal",
            llf_ms: llf.wall_ms,
            exact_ms: exact.wall_ms,
        });
    }
    rows
}

fn heuristic_quality(rows: &[TableRow], secs: f64) -> Verdict {
    let mut parts = Vec::new();
    let mut pass = secs < 600.0;
    let mut compared = 0;
    for r in rows {
        let ratio = r.llf as f64 / r.exact.max(1) as f64;
        if r.proven {
            compared += 1;
            pass &= ratio >= TABLE_RATIO;
            parts.push(format!("{}:{}/{}={ratio:.3}", r.count, r.llf, r.exact));
        } else {
            parts.push(format!("{}:{}/{}(time limit, excluded)", r.count, r.llf, r.exact));
        }
    }
    verdict(pass && compared > 0, format!("{} in {:.1}s", parts.join(" "), secs))
}

fn runtime_separation(rows: &[TableRow]) -> Verdict {
    let r = rows.iter().find(|r| r.count == 42).expect("42-flow row");
    let ratio = r.exact_ms / r.llf_ms.max(1e-6);
    verdict(ratio >= RUNTIME_RATIO, format!("hfs_exact {:.1} ms, hfs_llf {:.3} ms, ratio {ratio:.0}", r.exact_ms, r.llf_ms))
}

fn jitter_masking() -> Verdict {
    let t = Arc::new(
        Topology::from_duplex(&["s", "A", "B", "d"], &[("s", "A"), ("s", "B"), ("A", "d"), ("B", "d")]).unwrap(),
    );
    let n = |x: &str| t.node(x).unwrap();
    let comm = |u: &str, v: &str, slot| Hop::Communication { link: t.link(n(u), n(v)).unwrap(), slot };
    let f = FlowSpec::new(0, n("s"), n("d"), 1, 3, 3).unwrap();
    let path = |seq, hops| SchedulePath { packet: PacketId { flow: f.id, seq }, hops };
    let mut s = Schedule::new();
    s.record(
        f.id,
        Some(vec![
            path(1, vec![comm("s", "A", 1), comm("A", "d", 2)]),
            path(2, vec![comm("s", "B", 5), comm("B", "d", 6)]),
            path(3, vec![comm("s", "A", 7), Hop::Storage { node: n("A"), slot: 8 }, comm("A", "d", 9)]),
            path(4, vec![comm("s", "B", 10), comm("B", "d", 11)]),
        ]),
    );
    let g = Tecg::new(t.clone(), Hypercycle::new(12));
    let clean = verify_schedule(&g, &[f], &s, Mode::Hfs).ok;
    let plan = &jitter_mask(&[f], &s, 12)[0];
    verdict(
        clean && plan.d_max == 3 && plan.deliveries == [4, 7, 10, 13],
        format!("d_max={} deliveries={:?} verified={clean}", plan.d_max, plan.deliveries),
    )
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn members(a: IndexSet, until: u64) -> Vec<u64> {
    (0..).map(|c| a.origin + c * a.cycle).take_while(|&s| s <= until).collect()
}

fn predicates() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut disagree = 0;
    for _ in 0..200 {
        let a = IndexSet::new(rng.gen_range(1..=40), rng.gen_range(1..=24));
        let b = IndexSet::new(rng.gen_range(1..=40), rng.gen_range(1..=24));
        let lcm = a.cycle / gcd(a.cycle, b.cycle) * b.cycle;
        let horizon = 10 * lcm;
        let top = horizon + lcm + a.origin.max(b.origin);
        let ta = members(a, top);
        let direct = members(b, top).iter().any(|s| ta.binary_search(s).is_ok());
        if direct != collides(a, b) {
            disagree += 1;
            continue;
        }
        // an origin at or after a's own is blocked iff a flow of b's cycle
        // starting there would meet a
        let blocked = blocked_slots(a, b.cycle, horizon);
        let direct_blocked: Vec<u64> = (a.origin..=horizon)
            .filter(|&s| members(IndexSet::new(s, b.cycle), s + lcm).iter().any(|x| ta.binary_search(x).is_ok()))
            .collect();
        if blocked != direct_blocked {
            disagree += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(disagree == 0 && secs < 5.0, format!("{}/200 pairs agree in {:.2}s", 200 - disagree, secs))
}

fn load_scaling() -> Verdict {
    let topo = Arc::new(erdos_renyi(50, 0.2, 1).unwrap());
    let gen = FlowGen { arrival: ArrivalRule::Range(1, 60), ..FlowGen::new(480, &[3, 4, 5], 1) };
    let flows = gen_flows(&gen, &topo).unwrap();
    let base = Tecg::new(topo, gen.hypercycle().unwrap());
    let mut got = Vec::new();
    let mut clean = true;
    for s in [Scheme::HfsLlf, Scheme::Iras, Scheme::BfsS, Scheme::JrasTseg] {
        let out = run_scheme(s, &base, &flows, EXACT_LIMIT_S).unwrap();
        clean &= verify_schedule(&base, &flows, &out.schedule, s.mode()).ok;
        got.push((s, out.schedule.admitted_count(), out.wall_ms));
    }
    let llf = got[0].1;
    let pass = clean && got[0].2 < 60_000.0 && got[1..].iter().all(|&(_, n, _)| llf > n);
    let parts: Vec<String> = got.iter().map(|(s, n, _)| format!("{s}={n}")).collect();
    verdict(pass, format!("{} (hfs_llf {:.0} ms) verified={clean}", parts.join(" "), got[0].2))
}

fn main() {
    let mut all = true;
    let mut report = |n: u32, name: &str, v: Verdict| {
        all &= v.pass;
        println!("criterion {n} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    };
    report(1, "micro instance", micro_instance());
    report(2, "co-prime gain", coprime_gain());
    report(3, "oracle sweep", oracle_sweep());
    report(4, "solution counts", solution_counts());
    let start = Instant::now();
    let rows = table_rows();
    let secs = start.elapsed().as_secs_f64();
    report(5, "heuristic quality", heuristic_quality(&rows, secs));
    report(6, "runtime separation", runtime_separation(&rows));
    report(7, "jitter masking", jitter_masking());
    report(8, "collision predicates", predicates());
    report(9, "load scaling", load_scaling());
    if !all {
        std::process::exit(1);
    }
}
