use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ttsched::experiment::{run_experiment, run_scheme, ExperimentConfig, Scheme};
use ttsched::gen::{gen_flows, gen_topology, ArrivalRule, CycleShare, DelayRule, FlowGen, TopologySpec};
use ttsched::io;
use ttsched_core::analysis::{blocked_slots, collides, count_solutions, IndexSet};
use ttsched_core::exact::{build_fcs_model, build_hfs_model, lp};
use ttsched_core::verify::verify_schedule;
use ttsched_core::{hypercycle_of, FlowSpec, Hypercycle, Mode, Tecg, Topology};

#[derive(Parser)]
#[command(name = "ttsched", version, about = "Flow admission and scheduling for time-triggered Ethernet")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Instance {
    /// afdx, ladder, er:<n>:<p> or a topology JSON file
    #[arg(long)]
    topology: String,
    /// flow CSV
    #[arg(long)]
    flows: PathBuf,
    /// JSON list of already reserved link-slots
    #[arg(long)]
    occupancy: Option<PathBuf>,
    /// hypercycle length; defaults to the lcm of the flow cycles
    #[arg(long)]
    gamma: Option<u32>,
    /// seed for generated topologies
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a topology as JSON
    Topo {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a flow CSV
    Flows {
        #[arg(long)]
        topology: String,
        #[arg(long)]
        count: usize,
        /// comma separated cycle set
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        cycles: Vec<u32>,
        /// fixed max delay; defaults to the flow's cycle
        #[arg(long)]
        delay: Option<u32>,
        /// arrival range as lo:hi; defaults to [1, Γ]
        #[arg(long)]
        arrival: Option<String>,
        /// draw cycles uniformly instead of in equal shares
        #[arg(long)]
        uniform_cycles: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Admit flows with one scheme and print the schedule JSON
    Schedule {
        #[arg(long)]
        scheme: Scheme,
        #[command(flatten)]
        inst: Instance,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// write per-flow admission traces as JSON lines
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a schedule; exits with status 1 on any violation
    Verify {
        #[arg(long)]
        mode: Mode,
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Count single-flow solutions under FCS and HFS
    CountSolutions {
        #[command(flatten)]
        inst: Instance,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Slot collision predicates for index sets given as origin:cycle
    Analyze {
        #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "blocked")]
        collides: Option<Vec<String>>,
        #[arg(long, value_name = "A")]
        blocked: Option<String>,
        /// cycle of the flow being placed (with --blocked)
        #[arg(long)]
        other_cycle: Option<u64>,
        #[arg(long, default_value_t = 100)]
        horizon: u64,
    },
    /// Write the integer program in LP format
    ExportLp {
        #[arg(long)]
        mode: Mode,
        #[command(flatten)]
        inst: Instance,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment config and print the result CSV
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn topology(name: &str, seed: u64) -> Result<Topology> {
    let spec: TopologySpec = name.parse()?;
    Ok(gen_topology(&spec, seed)?)
}

fn load(inst: &Instance) -> Result<(Tecg, Vec<FlowSpec>)> {
    let topo = Arc::new(topology(&inst.topology, inst.seed)?);
    let flows = io::read_flows_file(&inst.flows, &topo)?;
    let hc = match inst.gamma {
        Some(g) => Hypercycle::new(g),
        None if flows.is_empty() => bail!("no flows in {} and no --gamma given", inst.flows.display()),
        None => hypercycle_of(&flows)?,
    };
    let occupied = match &inst.occupancy {
        Some(p) => io::occupancy_from_json(&read(p)?, &topo)?,
        None => Vec::new(),
    };
    Ok((Tecg::build(topo, hc, &occupied)?, flows))
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn index_set(s: &str) -> Result<IndexSet> {
    let (o, c) = s.split_once(':').with_context(|| format!("expected origin:cycle, got {s:?}"))?;
    let cycle: u64 = c.parse()?;
    if cycle == 0 {
        bail!("cycle must be positive in {s:?}");
    }
    Ok(IndexSet::new(o.parse()?, cycle))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Topo { name, seed, output } => {
            let t = topology(&name, seed)?;
            emit(&output, &(io::topology_to_json(&t) + "\n"))?;
        }
        Cmd::Flows { topology: name, count, cycles, delay, arrival, uniform_cycles, seed, output } => {
            let topo = topology(&name, seed)?;
            let arrival = match arrival {
                None => ArrivalRule::Uniform,
                Some(r) => {
                    let (lo, hi) = r.split_once(':').with_context(|| format!("expected lo:hi, got {r:?}"))?;
                    ArrivalRule::Range(lo.parse()?, hi.parse()?)
                }
            };
            let cfg = FlowGen {
                count,
                cycles,
                delay: delay.map_or(DelayRule::EqualCycle, DelayRule::Fixed),
                arrival,
                share: if uniform_cycles { CycleShare::Uniform } else { CycleShare::Equal },
                seed,
            };
            emit(&output, &io::flows_to_csv(&topo, &gen_flows(&cfg, &topo)?))?;
        }
        Cmd::Schedule { scheme, inst, time_limit, trace, output } => {
            let (base, flows) = load(&inst)?;
            let out = run_scheme(scheme, &base, &flows, time_limit)?;
            let topo = base.topology();
            if let (Some(path), Some(traces)) = (&trace, &out.traces) {
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                io::write_traces(std::io::BufWriter::new(file), topo, scheme.name(), traces)?;
            }
            let doc = io::schedule_to_json(topo, &out.schedule, out.status);
            emit(&output, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
            eprintln!("{scheme}: {}/{} flows in {:.1} ms ({})", doc.objective, flows.len(), out.wall_ms, out.status);
        }
        Cmd::Verify { mode, inst, schedule } => {
            let (base, flows) = load(&inst)?;
            let doc: io::ScheduleJson = serde_json::from_str(&read(&schedule)?)?;
            let s = io::schedule_from_json(base.topology(), &doc)?;
            let report = verify_schedule(&base, &flows, &s, mode);
            emit(&None, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            if !report.ok {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::CountSolutions { inst, output } => {
            let (base, flows) = load(&inst)?;
            let mut text = String::from("flow_id,fcs_count,hfs_count\n");
            for f in &flows {
                let fcs = count_solutions(&base, f, Mode::Fcs)?;
                let hfs = count_solutions(&base, f, Mode::Hfs)?;
                text += &format!("{},{fcs},{hfs}\n", f.id.0);
            }
            emit(&output, &text)?;
        }
        Cmd::Analyze { collides: pair, blocked, other_cycle, horizon } => match (pair, blocked) {
            (Some(p), None) => {
                let (a, b) = (index_set(&p[0])?, index_set(&p[1])?);
                emit(&None, &format!("{}\n", collides(a, b)))?;
            }
            (None, Some(a)) => {
                let other = other_cycle.context("--blocked needs --other-cycle")?;
                if other == 0 {
                    bail!("--other-cycle must be positive");
                }
                let slots = blocked_slots(index_set(&a)?, other, horizon);
                let list: Vec<String> = slots.iter().map(u64::to_string).collect();
                emit(&None, &(list.join(",") + "\n"))?;
            }
            _ => bail!("give exactly one of --collides or --blocked"),
        },
        Cmd::ExportLp { mode, inst, output } => {
            let (base, flows) = load(&inst)?;
            let model = match mode {
                Mode::Hfs => build_hfs_model(&base, &flows)?,
                Mode::Fcs => build_fcs_model(&base, &flows)?,
            };
            emit(&output, &lp::to_lp(&model))?;
        }
        Cmd::Experiment { config, output_dir } => {
            let mut cfg: ExperimentConfig = serde_json::from_str(&read(&config)?)?;
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            let report = run_experiment(&cfg)?;
            emit(&None, &report.to_csv())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
