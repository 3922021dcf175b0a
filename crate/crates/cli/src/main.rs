//! `drim`: assemble and run AAP programs over the simulated memory, invoke
//! bulk-bitwise kernels on vector files, run reliability sweeps, and emit
//! performance/energy/area reports.
//!
//! Exit codes: 0 success, 1 for configuration/parse/validation/usage
//! problems, 2 for runtime failures (aborted execution, failed
//! verification, output I/O).

mod config;
mod files;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use drim_core::analog::Mechanism;
use drim_core::bits::BitRow;
use drim_core::exec::{execute, ExecError, ExecutionStats, TraceSink};
use drim_core::geometry::{RowAddress, RowKind};
use drim_core::isa::{parse_row, validate, Program, RowName, RowSpec};
use drim_core::kernels::{
    lanes_to_planes, oracle_eval, planes_to_lanes, run_kernel_vectors, EmissionMode, KernelOp,
};
use drim_core::memory::MemoryState;
use drim_core::perf::{area_report, cost_of, energy_report, PerfOp, Platform};
use drim_core::reliability::{run_sweep, Distribution, VariationSpec, STANDARD_LEVELS};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "drim", version, about = "Processing-in-DRAM simulator and cost model")]
struct Cli {
    /// JSON run configuration (defaults are built in).
    #[arg(long, global = true, env = "DRIM_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads (0 = all available cores).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a program; print the canonical rendering.
    Assemble(AssembleArgs),
    /// Execute an assembled program with host row bindings.
    Run(RunArgs),
    /// Emit and run a named kernel over vector files.
    Kernel(KernelArgs),
    /// Monte-Carlo process-variation sweep (CSV).
    Sweep(SweepArgs),
    /// Latency/throughput/energy comparison across platforms.
    Perf(PerfArgs),
    /// Add-on transistor and row overhead report.
    Area(AreaArgs),
}

#[derive(Args)]
struct AssembleArgs {
    program: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    program: PathBuf,
    /// Bind an input file to a row, e.g. --in d0=a.bin (repeatable).
    #[arg(long = "in", value_name = "ROW=FILE")]
    inputs: Vec<String>,
    /// Write a row (or row block) to a file after execution (repeatable).
    #[arg(long = "out", value_name = "ROW=FILE")]
    outputs: Vec<String>,
    /// Emit one line per executed AAP to standard error.
    #[arg(long)]
    trace: bool,
    /// Dump the full memory image after execution.
    #[arg(long, value_name = "FILE")]
    dump_memory: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    /// copy|not|and2|or2|nand2|nor2|maj3|min3|xnor2|xor2|fulladd|fullsub|add|sub
    /// (omit when --job supplies the spec).
    op: Option<String>,
    /// Input vector files (.bin raw bits, .hex hex text).
    inputs: Vec<PathBuf>,
    /// JSON job spec with explicit operand/result row bindings.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Result file (sum for the arithmetic kernels).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Carry/borrow-chain output file for fulladd/fullsub/add/sub.
    #[arg(long)]
    cout: Option<PathBuf>,
    /// Lane width for add/sub.
    #[arg(long)]
    nbits: Option<usize>,
    /// Check the results against the host oracle; mismatch exits nonzero.
    #[arg(long)]
    verify: bool,
    /// Emit the verbatim function-table carry step instead of the
    /// corrected one (demonstrates the table's carry discrepancy).
    #[arg(long)]
    paper_literal: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Variation levels in percent.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.0, 5.0, 10.0, 15.0, 20.0, 30.0])]
    levels: Vec<f64>,
    /// dra, tra, or both.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["dra".to_string(), "tra".to_string()])]
    mechanisms: Vec<String>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// uniform or gaussian.
    #[arg(long)]
    dist: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PerfArgs {
    /// Operations: copy, not, xnor2, add (comma-separated).
    #[arg(value_delimiter = ',', num_args = 1..)]
    ops: Vec<String>,
    #[arg(long, alias = "platform", value_delimiter = ',', default_values_t = vec![
        "drim".to_string(), "ambit".to_string(), "drisa1t1c".to_string(), "drisa3t1c".to_string()
    ])]
    platforms: Vec<String>,
    /// Vector sizes in bits; accepts 2^N. Defaults to the three presets.
    #[arg(long, value_delimiter = ',', default_values_t = vec![
        "2^27".to_string(), "2^28".to_string(), "2^29".to_string()
    ])]
    sizes: Vec<String>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AreaArgs {
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Failure {
        Failure::Usage(msg.into())
    }
    fn runtime(msg: impl Into<String>) -> Failure {
        Failure::Runtime(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    let parallel = cfg.effective_parallelism(cli.parallel);
    match cli.cmd {
        Cmd::Assemble(args) => cmd_assemble(&args, &cfg),
        Cmd::Run(args) => cmd_run(&args, &cfg),
        Cmd::Kernel(args) => cmd_kernel(&args, &cfg, parallel),
        Cmd::Sweep(args) => cmd_sweep(&args, &cfg, parallel),
        Cmd::Perf(args) => cmd_perf(&args, &cfg),
        Cmd::Area(args) => cmd_area(&args, &cfg),
    }
}

fn load_program(path: &Path, cfg: &RunConfig) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let program = drim_core::isa::parse(&text)
        .map_err(|e| Failure::usage(format!("{}:{e}", path.display())))?;
    let diags = validate(&program, &cfg.geometry);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("{}: {d}", path.display());
        }
        return Err(Failure::usage(format!(
            "{} validation diagnostic(s)",
            diags.len()
        )));
    }
    Ok(program)
}

fn cmd_assemble(args: &AssembleArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let program = load_program(&args.program, cfg)?;
    print!("{}", program.render());
    Ok(())
}

/// `ROW=FILE` binding; data rows bind one stripe-sized block, compute rows
/// bind a single row.
struct Binding {
    row: RowSpec,
    file: PathBuf,
}

fn parse_binding(s: &str) -> Result<Binding, Failure> {
    let (row, file) = s
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("binding `{s}` is not ROW=FILE")))?;
    let row = parse_row(row).map_err(Failure::Usage)?;
    Ok(Binding {
        row,
        file: PathBuf::from(file),
    })
}

/// Rows a binding covers, given the program's stripe count.
fn binding_rows(b: &Binding, cfg: &RunConfig, stripes: usize) -> Result<Vec<RowAddress>, Failure> {
    let (bank, sub) = b.row.place.unwrap_or((0, 0));
    let count = match b.row.name {
        RowName::Row(RowKind::Data(_)) => stripes,
        _ => 1,
    };
    (0..count)
        .map(|s| {
            let kind = b.row.resolve(&cfg.geometry, s);
            let addr = RowAddress::new(bank, sub, kind);
            if addr.in_bounds(&cfg.geometry) {
                Ok(addr)
            } else {
                Err(Failure::usage(format!("binding row {addr} out of range")))
            }
        })
        .collect()
}

struct StderrTrace;

impl TraceSink for StderrTrace {
    fn record(&mut self, instr: usize, stripe: u64, sense_bl: &BitRow) {
        let mut hex = String::new();
        for b in sense_bl.to_bytes() {
            let _ = write!(hex, "{b:02x}");
        }
        eprintln!("aap instr={instr} stripe={stripe} bl={hex}");
    }
}

fn cmd_run(args: &RunArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let program = load_program(&args.program, cfg)?;
    let cols = cfg.geometry.cols_per_row;
    let stripes = program
        .instructions
        .first()
        .map_or(0, |i| i.size_bits as usize / cols);

    let mut memory =
        MemoryState::create(cfg.geometry.clone(), false).map_err(|e| Failure::usage(e.to_string()))?;
    for spec in &args.inputs {
        let b = parse_binding(spec)?;
        let rows = binding_rows(&b, cfg, stripes)?;
        let bits = files::read_bits(&b.file).map_err(Failure::Usage)?;
        let needed = rows.len() * cols;
        if bits.len() != needed.next_multiple_of(8) {
            return Err(Failure::usage(format!(
                "{} holds {} bits, binding needs {} ({} row(s) of {})",
                b.file.display(),
                bits.len(),
                needed,
                rows.len(),
                cols
            )));
        }
        for (s, addr) in rows.iter().enumerate() {
            let row = BitRow::from_fn(cols, |c| bits.get(s * cols + c));
            memory
                .write_row(*addr, &row)
                .map_err(|e| Failure::usage(e.to_string()))?;
        }
    }

    let engine = cfg.engine();
    let mut trace = StderrTrace;
    let sink: Option<&mut dyn TraceSink> = if args.trace { Some(&mut trace) } else { None };
    let stats = execute(&program, &mut memory, &engine, sink).map_err(|e| match e {
        ExecError::Invalid(_) => Failure::usage(e.to_string()),
        ExecError::Aborted { .. } => Failure::runtime(e.to_string()),
    })?;

    for spec in &args.outputs {
        let b = parse_binding(spec)?;
        let rows = binding_rows(&b, cfg, stripes)?;
        let parts: Vec<BitRow> = rows
            .iter()
            .map(|addr| memory.read_row(*addr))
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(e.to_string()))?;
        files::write_bits(&b.file, &BitRow::concat(&parts)).map_err(Failure::Runtime)?;
    }
    if let Some(path) = &args.dump_memory {
        let mut out = Vec::new();
        memory
            .write_image(&mut out)
            .map_err(|e| Failure::runtime(e.to_string()))?;
        std::fs::write(path, out).map_err(|e| Failure::runtime(e.to_string()))?;
    }
    println!("{}", stats.to_json());
    Ok(())
}

fn parse_kernel_op(name: &str, nbits: Option<usize>) -> Result<KernelOp, Failure> {
    let op = match name {
        "copy" => KernelOp::Copy,
        "not" => KernelOp::Not,
        "and2" => KernelOp::And2,
        "or2" => KernelOp::Or2,
        "nand2" => KernelOp::Nand2,
        "nor2" => KernelOp::Nor2,
        "maj3" => KernelOp::Maj3,
        "min3" => KernelOp::Min3,
        "xnor2" => KernelOp::Xnor2,
        "xor2" => KernelOp::Xor2,
        "fulladd" => KernelOp::FullAdd,
        "fullsub" => KernelOp::FullSub,
        "add" | "sub" => {
            let n = nbits.ok_or_else(|| Failure::usage("add/sub need --nbits"))?;
            if !(2..=63).contains(&n) {
                return Err(Failure::usage("--nbits must be in 2..=63"));
            }
            if name == "add" {
                KernelOp::RippleAdd(n)
            } else {
                KernelOp::RippleSub(n)
            }
        }
        other => return Err(Failure::usage(format!("unknown kernel op `{other}`"))),
    };
    if nbits.is_some() && !matches!(op, KernelOp::RippleAdd(_) | KernelOp::RippleSub(_)) {
        return Err(Failure::usage("--nbits only applies to add/sub"));
    }
    Ok(op)
}

#[derive(Serialize)]
struct KernelSummary<'a> {
    op: String,
    lanes: usize,
    chunks: usize,
    #[serde(flatten)]
    stats: &'a ExecutionStats,
}

fn cmd_kernel(args: &KernelArgs, cfg: &RunConfig, parallel: usize) -> Result<(), Failure> {
    let job: Option<drim_core::kernels::KernelSpec> = match &args.job {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| Failure::usage(format!("job spec {}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    // With --job the op comes from the spec; the op positional, if any, is
    // really the first input file.
    let mut input_files = args.inputs.clone();
    let op = match (&job, &args.op) {
        (Some(spec), name) => {
            if args.nbits.is_some() {
                return Err(Failure::usage("--nbits comes from the job spec"));
            }
            if let Some(first) = name {
                input_files.insert(0, PathBuf::from(first));
            }
            spec.op
        }
        (None, Some(name)) => parse_kernel_op(name, args.nbits)?,
        (None, None) => return Err(Failure::usage("missing kernel op (or --job spec)")),
    };
    let op_name = op.to_string();
    let arithmetic = matches!(op, KernelOp::RippleAdd(_) | KernelOp::RippleSub(_));
    let nbits = match op {
        KernelOp::RippleAdd(n) | KernelOp::RippleSub(n) => Some(n),
        _ => None,
    };
    let file_arity = if arithmetic { 2 } else { op.input_count() };
    if input_files.len() != file_arity {
        return Err(Failure::usage(format!(
            "{op_name} takes {file_arity} input file(s), got {}",
            input_files.len()
        )));
    }

    let raw: Vec<BitRow> = input_files
        .iter()
        .map(|p| files::read_bits(p))
        .collect::<Result<_, _>>()
        .map_err(Failure::Usage)?;

    let (inputs, lanes) = if arithmetic {
        let n = nbits.unwrap();
        let bits = raw[0].len();
        if !bits.is_multiple_of(n) || raw.iter().any(|r| r.len() != bits) {
            return Err(Failure::usage(format!(
                "arithmetic inputs must be equal-sized multiples of {n} bits"
            )));
        }
        let lanes = bits / n;
        let unpack = |r: &BitRow| -> Vec<u64> {
            (0..lanes)
                .map(|lane| (0..n).fold(0u64, |v, i| v | (r.get(lane * n + i) as u64) << i))
                .collect()
        };
        let mut planes = lanes_to_planes(&unpack(&raw[0]), n);
        planes.extend(lanes_to_planes(&unpack(&raw[1]), n));
        (planes, lanes)
    } else {
        let lanes = raw[0].len();
        if raw.iter().any(|r| r.len() != lanes) {
            return Err(Failure::usage("input files differ in size"));
        }
        (raw, lanes)
    };

    let mut memory =
        MemoryState::create(cfg.geometry.clone(), false).map_err(|e| Failure::usage(e.to_string()))?;
    let engine = cfg.engine();
    let mode = if args.paper_literal {
        EmissionMode::PaperLiteral
    } else {
        EmissionMode::Corrected
    };
    let run = match job {
        Some(mut spec) => {
            if spec.lanes != lanes {
                return Err(Failure::usage(format!(
                    "job spec binds {} lanes, inputs hold {lanes}",
                    spec.lanes
                )));
            }
            if args.paper_literal {
                spec.mode = EmissionMode::PaperLiteral;
            }
            drim_core::kernels::run_kernel_with_inputs(&spec, &inputs, &mut memory, &engine)
        }
        None => run_kernel_vectors(op, &inputs, &mut memory, &engine, mode, parallel),
    }
    .map_err(|e| Failure::runtime(e.to_string()))?;

    if args.verify {
        let want = oracle_eval(op, &inputs).map_err(|e| Failure::usage(e.to_string()))?;
        if run.outputs != want {
            return Err(Failure::runtime(format!(
                "verification failed: {op_name} disagrees with the host oracle"
            )));
        }
        eprintln!("verification: ok");
    }

    if let Some(path) = &args.output {
        let bits = if arithmetic {
            let n = nbits.unwrap();
            let sums = planes_to_lanes(&run.outputs[..n]);
            BitRow::from_fn(lanes * n, |i| sums[i / n] >> (i % n) & 1 == 1)
        } else {
            run.outputs[0].clone()
        };
        files::write_bits(path, &bits).map_err(Failure::Runtime)?;
    }
    if let Some(path) = &args.cout {
        let carry = run
            .outputs
            .last()
            .filter(|_| op.output_count() > 1)
            .ok_or_else(|| Failure::usage(format!("{op_name} has no carry output")))?;
        files::write_bits(path, carry).map_err(Failure::Runtime)?;
    }

    let summary = KernelSummary {
        op: op_name,
        lanes,
        chunks: run.chunks,
        stats: &run.stats,
    };
    println!("{}", serde_json::to_string(&summary).expect("serialize"));
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, cfg: &RunConfig, parallel: usize) -> Result<(), Failure> {
    let trials = args.trials.unwrap_or(cfg.variation.trials);
    if trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let mut levels = Vec::new();
    for &pct in &args.levels {
        if !(0.0..=30.0).contains(&pct) {
            return Err(Failure::usage(format!(
                "level {pct}% outside the supported 0..=30 range"
            )));
        }
        levels.push(pct / 100.0);
    }
    if levels.is_empty() {
        levels = STANDARD_LEVELS.to_vec();
    }
    let mechanisms: Vec<Mechanism> = args
        .mechanisms
        .iter()
        .map(|m| match m.as_str() {
            "dra" => Ok(Mechanism::Dra),
            "tra" => Ok(Mechanism::Tra),
            other => Err(Failure::usage(format!("unknown mechanism `{other}`"))),
        })
        .collect::<Result<_, _>>()?;
    let distribution = match args.dist.as_deref() {
        None => cfg.variation.distribution,
        Some("uniform") => Distribution::Uniform,
        Some("gaussian") => Distribution::Gaussian,
        Some(other) => {
            return Err(Failure::usage(format!("unknown distribution `{other}`")))
        }
    };
    let spec = VariationSpec {
        trials,
        seed: args.seed.unwrap_or(cfg.seed),
        distribution,
        ..cfg.variation.clone()
    };
    let result = run_sweep(&levels, &mechanisms, &spec, &cfg.analog, parallel);
    let csv = result.to_csv();
    match &args.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| Failure::runtime(e.to_string()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct PerfEntry {
    op: PerfOp,
    platform: Platform,
    vector_bits: u64,
    aap_count: u64,
    latency_ns: f64,
    throughput_ops_per_s: f64,
    energy_pj_per_kb: f64,
}

#[derive(Serialize)]
struct RatioEntry {
    op: PerfOp,
    baseline: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    throughput_ratio: Option<f64>,
    energy_ratio: f64,
}

#[derive(Serialize)]
struct PerfReport {
    entries: Vec<PerfEntry>,
    ratios: Vec<RatioEntry>,
}

fn parse_size(s: &str) -> Result<u64, Failure> {
    let parse_err = || Failure::usage(format!("malformed size `{s}`"));
    if let Some(exp) = s.strip_prefix("2^") {
        let e: u32 = exp.parse().map_err(|_| parse_err())?;
        if e >= 64 {
            return Err(parse_err());
        }
        Ok(1u64 << e)
    } else {
        s.parse().map_err(|_| parse_err())
    }
}

fn cmd_perf(args: &PerfArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let model = cfg.cost_model();
    let ops: Vec<PerfOp> = args
        .ops
        .iter()
        .map(|s| PerfOp::parse(s).ok_or_else(|| Failure::usage(format!("unknown op `{s}`"))))
        .collect::<Result<_, _>>()?;
    let platforms: Vec<Platform> = args
        .platforms
        .iter()
        .map(|s| {
            Platform::parse(s).ok_or_else(|| Failure::usage(format!("unknown platform `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    let sizes: Vec<u64> = args
        .sizes
        .iter()
        .map(|s| parse_size(s))
        .collect::<Result<_, _>>()?;
    for &size in &sizes {
        if size == 0 || size % cfg.geometry.cols_per_row as u64 != 0 {
            return Err(Failure::usage(format!(
                "vector size {size} is not a positive multiple of the row width"
            )));
        }
    }

    let mut entries = Vec::new();
    for &op in &ops {
        for &platform in &platforms {
            let cost = cost_of(op, platform, &model).map_err(|e| Failure::usage(e.to_string()))?;
            for &vector_bits in &sizes {
                entries.push(PerfEntry {
                    op,
                    platform,
                    vector_bits,
                    aap_count: cost.aap_count,
                    latency_ns: cost.latency_ns,
                    throughput_ops_per_s: cost.throughput_ops_per_s,
                    energy_pj_per_kb: cost.energy_pj_per_kb,
                });
            }
        }
    }
    let mut ratios = Vec::new();
    if platforms.contains(&Platform::Drim) {
        for &op in &ops {
            let drim = cost_of(op, Platform::Drim, &model).unwrap();
            for &p in platforms.iter().filter(|&&p| p != Platform::Drim) {
                let base = cost_of(op, p, &model).unwrap();
                ratios.push(RatioEntry {
                    op,
                    baseline: p.to_string(),
                    throughput_ratio: Some(
                        drim.throughput_ops_per_s / base.throughput_ops_per_s,
                    ),
                    energy_ratio: base.energy_pj_per_kb / drim.energy_pj_per_kb,
                });
            }
            if op == PerfOp::Copy {
                let report = energy_report(op, &model).unwrap();
                if let Some(r) = report.drim_vs_ddr4_copy {
                    ratios.push(RatioEntry {
                        op,
                        baseline: "ddr4".into(),
                        throughput_ratio: None,
                        energy_ratio: r,
                    });
                }
            }
        }
    }
    let report = PerfReport { entries, ratios };

    let text = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report).expect("serialize") + "\n",
        "csv" => {
            let mut out = String::from(
                "op,platform,vector_bits,aap_count,latency_ns,throughput_ops_per_s,energy_pj_per_kb\n",
            );
            for e in &report.entries {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    e.op, e.platform, e.vector_bits, e.aap_count, e.latency_ns,
                    e.throughput_ops_per_s, e.energy_pj_per_kb
                );
            }
            out
        }
        other => return Err(Failure::usage(format!("unknown format `{other}`"))),
    };
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::runtime(e.to_string()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_area(args: &AreaArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let report = area_report(&cfg.geometry);
    let text = serde_json::to_string_pretty(&report).expect("serialize") + "\n";
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::runtime(e.to_string()))?,
        None => print!("{text}"),
    }
    Ok(())
}
