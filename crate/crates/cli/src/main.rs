//! `butterfly` — route permutations and compile circuits onto the cyclic
//! butterfly interaction graph, and verify the results.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use butterfly_core::compiler::{compile_circuit, verify_program, Circuit, CompiledProgram};
use butterfly_core::router::{depth_bound, route_with, RouteOptions, RoutingResult};
use butterfly_core::schedule::{
    permutation_from_json_str, verify_schedule, Failure, Layer, Permutation, Phase, Schedule,
};
use butterfly_core::topology::{
    build_butterfly, build_kary_butterfly, ring_expand, ButterflyGraph,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "butterfly", version, about = "Qubit routing and circuit compilation on the cyclic butterfly graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export the butterfly graph or one of its variants.
    Topology(TopologyArgs),
    /// Route a permutation into a schedule of local moves.
    Route(RouteArgs),
    /// Compile a circuit into routing and gate layers.
    Compile(CompileArgs),
    /// Check a schedule against a graph and target permutation.
    Verify(VerifyArgs),
    /// Check a compiled program against its circuit.
    VerifyProgram(VerifyProgramArgs),
    /// Route random permutations and print a depth/time table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct TopologyArgs {
    /// Butterfly dimension (at least 3).
    #[arg(long = "r")]
    r: usize,
    /// Build the k-ary variant instead of the binary butterfly.
    #[arg(long, conflicts_with = "ring_expand")]
    kary: Option<usize>,
    /// Replace every node by a ring of 4 degree-3 vertices.
    #[arg(long)]
    ring_expand: bool,
    #[arg(long, value_enum, default_value = "dot")]
    format: GraphFormat,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Args)]
struct RouteArgs {
    #[arg(long = "r")]
    r: usize,
    /// Permutation file: a JSON array `image` of length r * 2^r.
    #[arg(long)]
    perm: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Dump the routing graph, coloring, per-phase swaps and Benes plans as
    /// JSON on standard output instead of the text stats.
    #[arg(long)]
    explain: bool,
    /// Skip inter-phase validation and the final self-check.
    #[arg(long)]
    no_validate: bool,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long = "r")]
    r: usize,
    /// Circuit file: `{"qubits": q, "timesteps": [[{"gate": "CNOT", "q": [a, b]}, ...], ...]}`.
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Print per-timestep depth accounting.
    #[arg(long)]
    stats: bool,
    /// Skip the final self-check.
    #[arg(long)]
    no_validate: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Butterfly dimension of the host graph.
    #[arg(long)]
    graph: usize,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    perm: PathBuf,
}

#[derive(Args)]
struct VerifyProgramArgs {
    #[arg(long = "r")]
    r: usize,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    program: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Dimension or inclusive range, e.g. `4` or `3..8`.
    #[arg(long = "r")]
    r: String,
    /// Random permutations per dimension.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0xbf1)]
    seed: u64,
    /// Skip schedule verification (pure timing).
    #[arg(long)]
    no_validate: bool,
}

enum CliError {
    /// Malformed input or invariant violation: exit 2.
    Input(String),
    /// A produced or supplied artifact failed verification: exit 1.
    Verification(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Topology(args) => run_topology(args),
        Command::Route(args) => run_route(args),
        Command::Compile(args) => run_compile(args),
        Command::Verify(args) => run_verify(args),
        Command::VerifyProgram(args) => run_verify_program(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {}", msg);
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {}", path.display(), e)))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {}", path.display(), e)))
}

fn graph_for(r: usize) -> Result<ButterflyGraph, CliError> {
    build_butterfly(r).map_err(CliError::input)
}

fn load_permutation(path: &Path, n: usize) -> Result<Permutation, CliError> {
    let text = read_file(path)?;
    let pi = permutation_from_json_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {}", path.display(), e)))?;
    if pi.len() != n {
        return Err(CliError::Input(format!(
            "{}: permutation has length {}, graph has {} nodes",
            path.display(),
            pi.len(),
            n
        )));
    }
    Ok(pi)
}

fn run_topology(args: TopologyArgs) -> Result<(), CliError> {
    let output = if let Some(k) = args.kary {
        let v = build_kary_butterfly(args.r, k).map_err(CliError::input)?;
        match args.format {
            GraphFormat::Dot => v.to_dot(),
            GraphFormat::Json => format!("{:#}\n", v.to_json()),
        }
    } else if args.ring_expand {
        let v = ring_expand(&graph_for(args.r)?);
        match args.format {
            GraphFormat::Dot => v.to_dot(),
            GraphFormat::Json => format!("{:#}\n", v.to_json()),
        }
    } else {
        let g = graph_for(args.r)?;
        match args.format {
            GraphFormat::Dot => g.to_dot(),
            GraphFormat::Json => format!("{:#}\n", g.to_json()),
        }
    };
    match args.out {
        Some(path) => write_file(&path, &output),
        None => {
            print!("{}", output);
            Ok(())
        }
    }
}

fn run_route(args: RouteArgs) -> Result<(), CliError> {
    let g = graph_for(args.r)?;
    let pi = load_permutation(&args.perm, g.node_count())?;
    let opts = RouteOptions { validate: !args.no_validate, trace: args.explain };
    let start = Instant::now();
    let result = route_with(&g, &pi, opts).map_err(CliError::input)?;
    let elapsed = start.elapsed();
    if !args.no_validate {
        let report = verify_schedule(&g, &result.schedule, &pi);
        if !report.pass {
            return Err(CliError::Verification(describe_failures(&report.failures)));
        }
    }
    write_file(&args.out, &result.schedule.to_json_string())?;
    let (exact, bound) = depth_bound(args.r).map_err(CliError::input)?;
    if args.explain {
        println!("{:#}", explain_document(&g, &result, exact, bound, elapsed.as_secs_f64() * 1e3));
    } else {
        let (d1, d2, d3) = result.phase_depths;
        println!("n:                  {}", g.node_count());
        println!("phase depths:       {} + {} + {}", d1, d2, d3);
        println!("total depth:        {}", result.depth_post_elision);
        println!("structural depth:   {} (= 6r-6)", result.depth_pre_elision);
        println!("bound 6*log2(n):    {}", bound);
        println!("elapsed:            {:.3} ms", elapsed.as_secs_f64() * 1e3);
    }
    Ok(())
}

fn explain_document(
    g: &ButterflyGraph,
    result: &RoutingResult,
    exact: usize,
    bound: usize,
    elapsed_ms: f64,
) -> serde_json::Value {
    let trace = result.trace.as_ref().expect("explain mode keeps the trace");
    let edges: Vec<serde_json::Value> = trace
        .routing_graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            json!({
                "qubit": e.qubit,
                "source_row": e.source_row,
                "dest_row": e.dest_row,
                "color": result.coloring.color(i),
            })
        })
        .collect();
    let swaps_of = |phase: Phase| -> Vec<Vec<[usize; 2]>> {
        result
            .schedule
            .layers
            .iter()
            .filter(|sl| sl.phase == phase)
            .map(|sl| match &sl.layer {
                Layer::Swap { pairs } => pairs.iter().map(|&(a, b)| [a, b]).collect(),
                _ => Vec::new(),
            })
            .collect()
    };
    let plans: Vec<serde_json::Value> = trace
        .benes_plans
        .iter()
        .enumerate()
        .map(|(c, plan)| {
            let matrix: Vec<Vec<u8>> = (0..plan.depth())
                .map(|t| plan.flips(t).iter().map(|&f| f as u8).collect())
                .collect();
            json!({
                "column": c,
                "bit_order": plan.bit_order(),
                "levels": matrix,
            })
        })
        .collect();
    json!({
        "r": g.r(),
        "n": g.node_count(),
        "stats": {
            "phase_depths": [result.phase_depths.0, result.phase_depths.1, result.phase_depths.2],
            "phase_depths_pre_elision": [
                result.phase_depths_pre.0,
                result.phase_depths_pre.1,
                result.phase_depths_pre.2
            ],
            "depth": result.depth_post_elision,
            "structural_depth": exact,
            "bound": bound,
            "elapsed_ms": elapsed_ms,
        },
        "routing_graph": { "edges": edges },
        "phase1_swaps": swaps_of(Phase::RowSortFirst),
        "phase3_swaps": swaps_of(Phase::RowSortFinal),
        "benes_plans": plans,
    })
}

fn run_compile(args: CompileArgs) -> Result<(), CliError> {
    let g = graph_for(args.r)?;
    let text = read_file(&args.circuit)?;
    let circuit = Circuit::from_json_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {}", args.circuit.display(), e)))?;
    let start = Instant::now();
    let program = compile_circuit(&g, &circuit).map_err(CliError::input)?;
    let elapsed = start.elapsed();
    if !args.no_validate {
        let report = verify_program(&g, &circuit, &program);
        if !report.pass {
            return Err(CliError::Verification(describe_failures(&report.failures)));
        }
    }
    write_file(&args.out, &program.to_json_string())?;
    let total_routing = program.routing_depth();
    let (exact, bound) = depth_bound(args.r).map_err(CliError::input)?;
    println!("timesteps:            {}", circuit.timesteps.len());
    println!("gates:                {}", circuit.gate_count());
    println!("routing depth:        {}", total_routing);
    println!("per-timestep bound:   {} (= 6r-6), 6*log2(n) = {}", exact, bound);
    println!("elapsed:              {:.3} ms", elapsed.as_secs_f64() * 1e3);
    if args.stats {
        println!("timestep  rounds  routing-depth");
        for (t, s) in program.timestep_stats.iter().enumerate() {
            println!("{:>8}  {:>6}  {:>13}", t, s.rounds, s.routing_depth);
        }
    }
    Ok(())
}

fn describe_failures(failures: &[Failure]) -> String {
    let mut out = String::new();
    for f in failures.iter().take(10) {
        match f.layer {
            Some(idx) => {
                let _ = writeln!(out, "layer {}: {}", idx, f.message);
            }
            None => {
                let _ = writeln!(out, "{}", f.message);
            }
        }
    }
    if failures.len() > 10 {
        let _ = writeln!(out, "... and {} more", failures.len() - 10);
    }
    out.trim_end().to_string()
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let g = graph_for(args.graph)?;
    let pi = load_permutation(&args.perm, g.node_count())?;
    let text = read_file(&args.schedule)?;
    let schedule = Schedule::from_json_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {}", args.schedule.display(), e)))?;
    let report = verify_schedule(&g, &schedule, &pi);
    println!("depth:              {}", report.depth);
    println!("locality:           {}", if report.locality_ok { "ok" } else { "VIOLATED" });
    println!("occupancy:          {}", if report.occupancy_ok { "ok" } else { "VIOLATED" });
    println!("correctness:        {}", if report.correctness_ok { "ok" } else { "VIOLATED" });
    println!("max occupancy:      {} in-layer, {} at boundaries", report.max_layer_occupancy, report.max_boundary_occupancy);
    if report.pass {
        println!("schedule verified");
        Ok(())
    } else {
        Err(CliError::Verification(describe_failures(&report.failures)))
    }
}

fn run_verify_program(args: VerifyProgramArgs) -> Result<(), CliError> {
    let g = graph_for(args.r)?;
    let circuit_text = read_file(&args.circuit)?;
    let circuit = Circuit::from_json_str(&circuit_text)
        .map_err(|e| CliError::Input(format!("{}: {}", args.circuit.display(), e)))?;
    let program_text = read_file(&args.program)?;
    let program = CompiledProgram::from_json_str(&program_text)
        .map_err(|e| CliError::Input(format!("{}: {}", args.program.display(), e)))?;
    let report = verify_program(&g, &circuit, &program);
    println!("gates checked:      {}", report.gates_checked);
    println!("max occupancy:      {}", report.max_layer_occupancy);
    println!(
        "routing depth/ts:   {:?}",
        report.routing_depth_per_timestep
    );
    if report.pass {
        println!("program verified");
        Ok(())
    } else {
        Err(CliError::Verification(describe_failures(&report.failures)))
    }
}

fn parse_range(spec: &str) -> Result<(usize, usize), CliError> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(CliError::input)?;
        let hi: usize = hi.trim().parse().map_err(CliError::input)?;
        if lo > hi {
            return Err(CliError::Input(format!("empty range {}", spec)));
        }
        Ok((lo, hi))
    } else {
        let r: usize = spec.trim().parse().map_err(CliError::input)?;
        Ok((r, r))
    }
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    let (lo, hi) = parse_range(&args.r)?;
    println!("{:>3} {:>7} {:>11} {:>10} {:>6} {:>14} {:>10}", "r", "n", "mean depth", "max depth", "6r-6", "bound 6log2(n)", "time");
    for r in lo..=hi {
        let g = graph_for(r)?;
        let n = g.node_count();
        let (exact, bound) = depth_bound(r).map_err(CliError::input)?;
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add((r as u64) << 32));
        let opts = RouteOptions { validate: !args.no_validate, trace: false };
        let mut total = 0usize;
        let mut max = 0usize;
        let start = Instant::now();
        for i in 0..args.count {
            let mut image: Vec<usize> = (0..n).collect();
            image.shuffle(&mut rng);
            let pi = Permutation::new(image).map_err(CliError::input)?;
            let result = route_with(&g, &pi, opts).map_err(CliError::input)?;
            if result.depth_post_elision > exact {
                return Err(CliError::Verification(format!(
                    "r={} instance {}: depth {} exceeds 6r-6 = {}",
                    r, i, result.depth_post_elision, exact
                )));
            }
            if !args.no_validate {
                let report = verify_schedule(&g, &result.schedule, &pi);
                if !report.pass {
                    return Err(CliError::Verification(format!(
                        "r={} instance {}: {}",
                        r,
                        i,
                        describe_failures(&report.failures)
                    )));
                }
            }
            total += result.depth_post_elision;
            max = max.max(result.depth_post_elision);
        }
        let elapsed = start.elapsed();
        println!(
            "{:>3} {:>7} {:>11.2} {:>10} {:>6} {:>14} {:>9.1}ms",
            r,
            n,
            total as f64 / args.count.max(1) as f64,
            max,
            exact,
            bound,
            elapsed.as_secs_f64() * 1e3
        );
    }
    Ok(())
}
