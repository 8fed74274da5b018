//! `clmatch`: command-line front end for the catalytic matching library.
//!
//! Exit status: 0 on success, 1 for invalid input, 2 when a checked property
//! fails (tape not restored, promise or contract violation, internal error).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use clmatch_core::driver::TraceEvent;
use clmatch_core::generate::{generate, Family, GeneratorSpec, WeightMode};
use clmatch_core::graph::validate_matching;
use clmatch_core::hopcroft_karp::hopcroft_karp;
use clmatch_core::oracle::brute_force_matchings;
use clmatch_core::residual::{build_residual, is_maximum, min_cycle_weight, min_weight_path, Node};
use clmatch_core::tape::{bits_to_hex, hex_to_bits, init_tape, read_weights};
use clmatch_core::{
    check_k_plus_1, extract_isolated_size_k, lossy_solve, min_weight_max_matching, run_clp_match, Backend,
    BipartiteGraph, DriverConfig, Error, LossyInstance, Matching, SolveMode, TapeInit,
};

#[derive(Parser)]
#[command(name = "clmatch", version, about = "Maximum bipartite matching on a catalytic tape")]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    text: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the catalytic matching loop on a graph and tape.
    Solve(SolveArgs),
    /// Find a string that the lossy code fails to round-trip, and the matching it yields.
    Lossy(LossyArgs),
    /// Extract the isolated minimum-weight matching of size k.
    Extract(ExtractArgs),
    /// Inspect the residual graph of a matching.
    Residual(ResidualArgs),
    /// Enumerate matchings by brute force.
    Oracle(OracleArgs),
    /// Generate a graph, tape and configuration.
    Gen(GenArgs),
    /// Run a short end-to-end self check.
    Testsuite(TestsuiteArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum BackendArg {
    #[default]
    Det,
    Comb,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Det => Backend::Determinant,
            BackendArg::Comb => Backend::Combinatorial,
        }
    }
}

#[derive(Args)]
struct GraphArg {
    /// Graph file: a `n m` header followed by `m` lines `u v`.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Initial tape contents in hex; extra bits become scratch.
    #[arg(long, conflicts_with = "seed")]
    tape: Option<String>,
    /// Seed for a pseudorandom tape.
    #[arg(long)]
    seed: Option<u64>,
    /// Tape length in bits for a seeded tape (default: the layout size).
    #[arg(long, requires = "seed")]
    len: Option<usize>,
    #[arg(long)]
    weight_bits: Option<u32>,
    #[arg(long)]
    reserves: Option<usize>,
    #[arg(long)]
    fallback_threshold: Option<usize>,
    #[arg(long)]
    force_fallback: bool,
    /// Include the event trace in the report.
    #[arg(long)]
    trace: bool,
    /// Per-edge input weights in canonical edge order; switches to the
    /// minimum-weight variant.
    #[arg(long)]
    input_weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    backend: BackendArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Random,
}

#[derive(Args)]
struct LossyArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    backend: BackendArg,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    k: usize,
    /// Edge weights, comma or whitespace separated, or `@FILE`.
    #[arg(long)]
    weights: String,
    #[arg(long, value_enum, default_value_t)]
    backend: BackendArg,
}

#[derive(Args)]
struct ResidualArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Edge weights, comma or whitespace separated, or `@FILE`.
    #[arg(long)]
    weights: String,
    /// Matched edges as `u-v` pairs, comma separated.
    #[arg(long, default_value = "")]
    matching: String,
    /// Print every residual arc.
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Edge weights; every edge weighs zero when omitted.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// List every matching.
    #[arg(long)]
    all: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RandomGnp,
    Complete,
    Path,
    Star,
    CraftedNonisolating,
    ExhaustiveSmall,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::RandomGnp => Family::RandomGnp,
            FamilyArg::Complete => Family::Complete,
            FamilyArg::Path => Family::Path,
            FamilyArg::Star => Family::Star,
            FamilyArg::CraftedNonisolating => Family::CraftedNonisolating,
            FamilyArg::ExhaustiveSmall => Family::ExhaustiveSmall,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightModeArg {
    TapeRandom,
    AllEqual,
    DistinctPowers,
}

impl From<WeightModeArg> for WeightMode {
    fn from(w: WeightModeArg) -> Self {
        match w {
            WeightModeArg::TapeRandom => WeightMode::TapeRandom,
            WeightModeArg::AllEqual => WeightMode::AllEqual,
            WeightModeArg::DistinctPowers => WeightMode::DistinctPowers,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, value_enum, default_value = "tape-random")]
    weight_mode: WeightModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the graph here instead of embedding it in the output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestsuiteArgs {
    /// Largest `n` in the sweep.
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    /// Instances per size.
    #[arg(long, default_value_t = 20)]
    per_size: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A checked property failed; maps to exit status 2.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Violation>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Input(_) | Error::TooLarge(_)) | None => 1,
        Some(_) => 2,
    }
}

fn read_graph(path: &Path) -> anyhow::Result<BipartiteGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BipartiteGraph::parse(&text)?)
}

fn parse_numbers(spec: &str) -> anyhow::Result<Vec<u64>> {
    let text = match spec.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => spec.to_string(),
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|e| Error::Input(format!("bad weight {t:?}: {e}")).into()))
        .collect()
}

fn parse_pairs(spec: &str) -> anyhow::Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (u, v) = t.split_once('-').ok_or_else(|| Error::Input(format!("expected u-v, got {t:?}")))?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Input(format!("bad vertex {s:?}: {e}")));
            Ok((parse(u)?, parse(v)?))
        })
        .collect()
}

fn emit<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn fmt_pairs(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(u, v)| format!("{u}-{v}")).collect::<Vec<_>>().join(",")
}

fn solve(args: SolveArgs, text: bool) -> anyhow::Result<()> {
    let graph = read_graph(&args.graph.graph)?;
    let mut config = DriverConfig::for_graph(&graph).with_backend(args.backend.into());
    if let Some(b) = args.weight_bits {
        config.weight_bits = b;
    }
    if let Some(r) = args.reserves {
        config.num_reserves = r;
        config.fallback_threshold = config.fallback_threshold.min(r);
    }
    if let Some(t) = args.fallback_threshold {
        config.fallback_threshold = t;
    }
    config.force_fallback = args.force_fallback;
    config.record_trace = args.trace;

    let base = config.layout(&graph)?;
    let init = match (&args.tape, args.seed) {
        (Some(hex), _) => TapeInit::Bits(hex_to_bits(hex)?),
        (None, Some(seed)) => TapeInit::Seed(seed),
        (None, None) => bail!(Error::Input("one of --tape or --seed is required".into())),
    };
    let len = match &init {
        TapeInit::Bits(b) => b.len(),
        _ => args.len.unwrap_or(base.total_bits()),
    };
    let layout = config.layout_for_len(&graph, len)?;
    let mut tape = init_tape(&layout, &init)?;
    let initial = tape.bits().to_bitvec();

    let (run, extension) = match &args.input_weights {
        Some(path) => {
            let input = parse_numbers(&format!("@{}", path.display()))?;
            let report = min_weight_max_matching(&graph, &input, &mut tape, &config)?;
            let extra = (report.input_weight, report.scale);
            (report.run, Some(extra))
        }
        None => (run_clp_match(&graph, &mut tape, &config)?, None),
    };

    let valid = validate_matching(&graph, run.result.edges())?;
    let maximum = run.matching_size == hopcroft_karp(&graph).len();
    let restored = run.tape_restored && tape.bits() == initial.as_bitslice();

    if text {
        println!("matching: {}", fmt_pairs(&run.matching));
        println!("size: {}", run.matching_size);
        println!("compressions: {}", run.compressions);
        println!("fallback: {}", run.fallback_fired);
        println!("tape restored: {restored}");
        println!("freed bits peak: {}", run.freed_bits_peak);
        if let Some((w, s)) = extension {
            println!("input weight: {w} (scale {s})");
        }
        for event in run.trace.iter().flatten() {
            println!("  {}", describe(event));
        }
    } else {
        let mut value = serde_json::to_value(&run)?;
        if let Some((w, s)) = extension {
            value["input_weight"] = json!(w);
            value["scale"] = json!(s);
        }
        value["tape_bits"] = json!(layout.total_bits());
        emit(&value)?;
    }

    if !restored {
        bail!(Violation("tape not restored".into()));
    }
    if !valid || !maximum {
        bail!(Violation(format!("result is not a maximum matching (size {})", run.matching_size)));
    }
    Ok(())
}

fn describe(event: &TraceEvent) -> String {
    match event {
        TraceEvent::Check { c, k, outcome, .. } => format!("check c={c} k={k} -> {outcome:?}"),
        TraceEvent::Comp(r) => format!("comp c={} k={} edge={} slot={}", r.c, r.k, r.edge, r.slot),
        TraceEvent::Fallback { c } => format!("fallback c={c}"),
        TraceEvent::Decomp(r) => format!("decomp c={} k={} edge={} slot={}", r.c, r.k, r.edge, r.slot),
    }
}

fn lossy(args: LossyArgs, text: bool) -> anyhow::Result<()> {
    let graph = read_graph(&args.graph.graph)?;
    let inst = LossyInstance::new(graph)?.with_backend(args.backend.into());
    let mode = match args.mode {
        ModeArg::Exhaustive => SolveMode::Exhaustive,
        ModeArg::Random => SolveMode::Random,
    };
    let report = lossy_solve(&inst, mode, args.samples, args.seed)?;
    let matching = clmatch_core::a2_extract(&inst, &report.witness)?;
    let pairs = matching.pairs(inst.graph());
    if pairs.len() != hopcroft_karp(inst.graph()).len() {
        bail!(Violation(format!("extracted matching of size {} is not maximum", pairs.len())));
    }
    let witness_bits: String = report.witness.iter().map(|b| if *b { '1' } else { '0' }).collect();
    if text {
        println!("witness: {witness_bits}");
        println!("matching: {}", fmt_pairs(&pairs));
        println!("samples tried: {}", report.samples_tried);
        println!("round-trip failures: {}", report.roundtrip_failures_found);
    } else {
        emit(&json!({
            "witness_hex": bits_to_hex(&report.witness),
            "witness_bits": witness_bits,
            "matching": pairs,
            "samples_tried": report.samples_tried,
            "roundtrip_failures_found": report.roundtrip_failures_found,
        }))?;
    }
    Ok(())
}

fn extract(args: ExtractArgs, text: bool) -> anyhow::Result<()> {
    let graph = read_graph(&args.graph.graph)?;
    let weights = parse_numbers(&args.weights)?;
    let m = extract_isolated_size_k(&graph, args.k, &weights, args.backend.into())?;
    let pairs = m.pairs(&graph);
    if text {
        println!("matching: {}", fmt_pairs(&pairs));
        println!("weight: {}", m.weight(&weights));
    } else {
        emit(&json!({ "k": args.k, "matching": pairs, "weight": m.weight(&weights) }))?;
    }
    Ok(())
}

fn residual(args: ResidualArgs, text: bool) -> anyhow::Result<()> {
    let graph = read_graph(&args.graph.graph)?;
    let weights = parse_numbers(&args.weights)?;
    let matching = Matching::from_pairs(&graph, &parse_pairs(&args.matching)?)?;
    let r = build_residual(&graph, &matching, &weights)?;
    let min_cycle = min_cycle_weight(&r);
    // shortest paths are only defined without non-positive cycles
    let st_path = match min_cycle {
        Some(c) if c <= 0 => None,
        _ => min_weight_path(&r, Node::Source, Node::Sink),
    };
    let maximum = is_maximum(&graph, &matching, &weights)?;
    if text {
        println!("nodes: {}, arcs: {}", r.num_nodes(), r.arcs().len());
        println!("min cycle weight: {}", min_cycle.map_or("none".into(), |c| c.to_string()));
        println!("min s-t path: {}", st_path.map_or("none".into(), |c| c.to_string()));
        println!("maximum: {maximum}");
        if args.dump {
            print!("{}", r.dump());
        }
    } else {
        let mut value = json!({
            "nodes": r.num_nodes(),
            "arcs": r.arcs().len(),
            "min_cycle_weight": min_cycle,
            "min_st_path": st_path,
            "maximum": maximum,
        });
        if args.dump {
            value["residual"] = json!(r.arcs());
        }
        emit(&value)?;
    }
    Ok(())
}

fn oracle(args: OracleArgs, text: bool) -> anyhow::Result<()> {
    let graph = read_graph(&args.graph.graph)?;
    let weights = args.weights.as_deref().map(parse_numbers).transpose()?;
    if let Some(w) = &weights {
        if w.len() != graph.num_edges() {
            bail!(Error::Input(format!("{} weights for {} edges", w.len(), graph.num_edges())));
        }
    }
    let report = brute_force_matchings(&graph, weights.as_deref(), args.k, args.all)?;
    if text {
        println!("maximum matching size: {}", report.max_size);
        for s in report.by_size.iter().filter(|s| args.k.is_none_or(|k| k == s.k)) {
            let min = s.min_weight.map_or("-".into(), |w| w.to_string());
            println!("k={}: {} matchings, min weight {min}, isolated {}", s.k, s.count, s.isolated);
        }
        for m in report.matchings.iter().flatten() {
            let pairs: Vec<_> = m.iter().map(|&e| graph.edge(e)).collect();
            println!("  {}", fmt_pairs(&pairs));
        }
    } else {
        emit(&report)?;
    }
    Ok(())
}

fn gen(args: GenArgs, text: bool) -> anyhow::Result<()> {
    let mut spec = GeneratorSpec::new(args.family.into(), args.n, args.weight_mode.into(), args.seed);
    spec.edge_prob = args.p;
    let inst = generate(&spec)?;
    let layout = inst.layout();
    let graph_text = inst.graph.to_text();
    if let Some(path) = &args.out {
        fs::write(path, &graph_text).with_context(|| format!("writing {}", path.display()))?;
    }
    let tape_hex = inst.tape.to_hex();
    if text {
        if args.out.is_none() {
            print!("{graph_text}");
        }
        println!("tape: {tape_hex}");
        println!("tape bits: {}", layout.total_bits());
        println!("weight bits: {}", inst.config.weight_bits);
        println!("reserves: {}", inst.config.num_reserves);
        println!("fallback threshold: {}", inst.config.fallback_threshold);
    } else {
        emit(&json!({
            "graph": graph_text,
            "tape_hex": tape_hex,
            "tape_bits": layout.total_bits(),
            "weights": read_weights(&inst.tape, &layout).values(),
            "config": inst.config,
        }))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SuiteLine {
    check: &'static str,
    passed: u64,
    total: u64,
}

fn testsuite(args: TestsuiteArgs, text: bool) -> anyhow::Result<()> {
    let mut runs = SuiteLine { check: "driver restores tape and finds a maximum matching", passed: 0, total: 0 };
    let mut checks = SuiteLine { check: "backends agree on the isolation check", passed: 0, total: 0 };
    let families = [Family::RandomGnp, Family::Complete, Family::Path, Family::Star, Family::CraftedNonisolating];
    for n in 2..=args.max_n {
        for i in 0..args.per_size {
            let family = families[i as usize % families.len()];
            let spec = GeneratorSpec::new(family, n, WeightMode::TapeRandom, args.seed.wrapping_add(i * 1009 + n as u64));
            let inst = generate(&spec)?;
            let mut tape = inst.tape.clone();
            let run = run_clp_match(&inst.graph, &mut tape, &inst.config)?;
            runs.total += 1;
            if run.tape_restored
                && tape.bits() == inst.tape.bits()
                && run.matching_size == hopcroft_karp(&inst.graph).len()
                && validate_matching(&inst.graph, run.result.edges())?
            {
                runs.passed += 1;
            }

            let weights = read_weights(&inst.tape, &inst.layout()).values().to_vec();
            let outcome = |b| check_k_plus_1(&inst.graph, 0, &weights, b).map(|r| r.outcome);
            checks.total += 1;
            if outcome(Backend::Determinant) == outcome(Backend::Combinatorial) {
                checks.passed += 1;
            }
        }
    }
    let lines = [runs, checks];
    if text {
        for l in &lines {
            let verdict = if l.passed == l.total { "PASS" } else { "FAIL" };
            println!("{verdict} {} ({}/{})", l.check, l.passed, l.total);
        }
    } else {
        emit(&lines)?;
    }
    if lines.iter().any(|l| l.passed != l.total) {
        bail!(Violation("self check failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = cli.text;
    let result = match cli.command {
        Command::Solve(a) => solve(a, text),
        Command::Lossy(a) => lossy(a, text),
        Command::Extract(a) => extract(a, text),
        Command::Residual(a) => residual(a, text),
        Command::Oracle(a) => oracle(a, text),
        Command::Gen(a) => gen(a, text),
        Command::Testsuite(a) => testsuite(a, text),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
