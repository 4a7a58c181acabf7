//! Command-line driver: fact-verification suites, simulation runs,
//! enumeration and path extraction, machine queries, and trace re-checks.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use treeforce_core::bits::BinaryString;
use treeforce_core::enumeration::{
    extract_enum, iterate_reduce, EnumerationStages, StrongEnumeration,
};
use treeforce_core::machine::ToyPrefixMachine;
use treeforce_core::scenario::{QSpec, Scenario};
use treeforce_core::sim::Simulator;
use treeforce_core::trace::{parse_trace, render_trace, verify_trace};
use treeforce_core::verify::{all_suites, Bounds};

#[derive(Parser)]
#[command(name = "treeforce", about = "Finite-scale tree-forcing toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exhaustive fact-verification suites.
    VerifyFacts {
        /// Bounds preset: quick or default.
        #[arg(long, default_value = "default")]
        bounds: String,
        /// Override the cylinder-pool sequence length (cost-checked).
        #[arg(long)]
        max_n: Option<usize>,
        /// Override the cylinder generator length bound (cost-checked).
        #[arg(long)]
        max_height: Option<u32>,
    },
    /// Run a scenario and write its trace.
    Sim {
        #[arg(long)]
        config: PathBuf,
        /// Trace output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        steps: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget_ri: Option<u64>,
        #[arg(long)]
        height_bound: Option<u32>,
    },
    /// Run the stage-based enumeration extraction.
    ExtractEnum {
        /// TOML file with the enumeration stages.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        kprime: u32,
        /// Level to extract.
        #[arg(long)]
        n: u32,
        /// Stage budget.
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Iterate the homogeneous-tree reduction down to a path.
    ExtractPath {
        /// TOML file holding the tree (same shape as a scenario's [q]).
        #[arg(long)]
        tree: PathBuf,
        /// TOML file holding the enumeration.
        #[arg(long = "enum")]
        enumeration: PathBuf,
    },
    /// Toy prefix-free machine queries.
    Machine {
        /// TOML file with the machine's programs.
        #[arg(long)]
        machine: PathBuf,
        /// Incompressibility slack.
        #[arg(long, default_value_t = 0)]
        c: u32,
        /// Level to list; when omitted only the Kraft sum is printed.
        #[arg(long)]
        n: Option<u32>,
        /// Complexity query for a specific string.
        #[arg(long)]
        complexity: Option<String>,
    },
    /// Re-parse a trace file and re-check its derivable invariants.
    VerifyTrace {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::VerifyFacts { bounds, max_n, max_height } => {
            let mut b = Bounds::preset(&bounds)?;
            if let Some(n) = max_n {
                b.cylinder_n = n;
            }
            if let Some(h) = max_height {
                b.cylinder_height = h;
            }
            // Refusal with estimated cost happens inside all_suites.
            let reports = all_suites(&b)
                .with_context(|| format!("estimated ~{} sequences", b.estimated_sequences()))?;
            let mut ok = true;
            for r in &reports {
                println!("{}", r.line());
                for f in r.failures.iter().take(5) {
                    println!("  counterexample: {f}");
                }
                ok &= r.passed();
            }
            Ok(ok)
        }
        Command::Sim { config, out, depth, steps, seed, budget_ri, height_bound } => {
            let mut scenario = Scenario::load(&config)?;
            if let Some(d) = depth {
                scenario.depth = d;
            }
            if let Some(s) = steps {
                scenario.steps = s;
            }
            if let Some(s) = seed {
                scenario.seed = s;
            }
            if let Some(b) = budget_ri {
                scenario.budget_ri = b;
            }
            if let Some(h) = height_bound {
                scenario.height_bound = h;
            }
            scenario.validate()?;
            let sim = Simulator::new(scenario)?;
            let run = sim.run();
            let text = render_trace(&run.records);
            match &out {
                Some(path) => std::fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            eprintln!(
                "status: {}; steps: {}; invariants: {}; final parts: {}",
                run.status.label(),
                run.steps_completed,
                if run.invariants_pass { "pass" } else { "FAIL" },
                run.final_state.k()
            );
            if let Some(b) = &run.branch {
                eprintln!(
                    "deepest non-fading branch: side {}, length {}, G prefix {:?}",
                    b.side.label(),
                    b.parts.len(),
                    b.g_prefix.to_string()
                );
            }
            Ok(run.pass())
        }
        Command::ExtractEnum { config, kprime, n, budget } => {
            let stages = load_stages(&config)?;
            match extract_enum(&stages, kprime, n, budget) {
                Ok(d) => {
                    println!(
                        "extracted {} strings at level {n}: {}",
                        d.len(),
                        d.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
                    );
                    Ok(true)
                }
                Err(e) => {
                    println!("extraction failed: {e}");
                    Ok(false)
                }
            }
        }
        Command::ExtractPath { tree, enumeration } => {
            let t = load_tree(&tree)?;
            let h = load_enumeration(&enumeration)?;
            let (path, reductions) = iterate_reduce(&t, &h)?;
            let member = t.paths().contains(&path);
            println!(
                "path {} after {reductions} reductions; membership: {}",
                path,
                if member { "confirmed" } else { "FAILED" }
            );
            Ok(member)
        }
        Command::Machine { machine, c, n, complexity } => {
            let m = load_machine(&machine)?;
            let scaled = m.kraft_scaled();
            println!(
                "kraft sum: {scaled}/2^64 ({}) — {}",
                scaled as f64 / 2f64.powi(64),
                if m.kraft_ok() { "within 1" } else { "VIOLATED" }
            );
            if let Some(s) = complexity {
                let s: BinaryString = s.parse().map_err(anyhow::Error::from)?;
                match m.complexity(&s) {
                    Some(k) => println!("K({s}) = {k}"),
                    None => println!("K({s}) = infinity"),
                }
            }
            if let Some(n) = n {
                if n > 16 {
                    bail!("level {n} too deep to list");
                }
                let lvl = m.incompressible_level(c, n);
                println!(
                    "{}-incompressible level {n}: {} of {} strings (excluded {}, bound {})",
                    c,
                    lvl.len(),
                    1u64 << n,
                    m.compressible_count(c, n),
                    ToyPrefixMachine::counting_bound(c, n)
                );
                for s in lvl {
                    println!("  {s}");
                }
            }
            Ok(m.kraft_ok())
        }
        Command::VerifyTrace { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let records = parse_trace(&text)?;
            let problems = verify_trace(&records);
            if problems.is_empty() {
                println!("trace ok: {} records, verdicts consistent", records.len());
                Ok(true)
            } else {
                for p in &problems {
                    println!("trace problem: {p}");
                }
                Ok(false)
            }
        }
    }
}

#[derive(Deserialize)]
struct StagesFile {
    #[serde(default)]
    closed: bool,
    stages: Vec<Vec<Vec<BinaryString>>>,
}

fn load_stages(path: &PathBuf) -> Result<EnumerationStages> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let f: StagesFile = toml::from_str(&text)?;
    let stages: Vec<Vec<BTreeSet<BinaryString>>> = f
        .stages
        .into_iter()
        .map(|stage| stage.into_iter().map(|w| w.into_iter().collect()).collect())
        .collect();
    Ok(EnumerationStages::new(f.closed, stages)?)
}

#[derive(Deserialize)]
struct TreeFile {
    q: QSpec,
}

fn load_tree(path: &PathBuf) -> Result<treeforce_core::trees::FinTree> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let f: TreeFile = toml::from_str(&text)?;
    Ok(f.q.build()?)
}

#[derive(Deserialize)]
struct EnumFile {
    bound: u32,
    values: Vec<EnumRow>,
}

#[derive(Deserialize)]
struct EnumRow {
    n: u32,
    strings: Vec<BinaryString>,
}

fn load_enumeration(path: &PathBuf) -> Result<StrongEnumeration> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let f: EnumFile = toml::from_str(&text)?;
    let values: BTreeMap<u32, Vec<BinaryString>> =
        f.values.into_iter().map(|r| (r.n, r.strings)).collect();
    Ok(StrongEnumeration::new(f.bound, values)?)
}

#[derive(Deserialize)]
struct MachineFile {
    programs: Vec<ProgramRow>,
}

#[derive(Deserialize)]
struct ProgramRow {
    program: BinaryString,
    output: BinaryString,
}

fn load_machine(path: &PathBuf) -> Result<ToyPrefixMachine> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let f: MachineFile = toml::from_str(&text)?;
    Ok(ToyPrefixMachine::new(
        f.programs.into_iter().map(|p| (p.program, p.output)).collect(),
    )?)
}
