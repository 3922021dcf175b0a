//! Microprogram library: generates AAP programs for the basic bulk-bitwise
//! functions (copy, NOT, AND/OR via TRA, MAJ/MIN, XNOR/XOR, 1-bit add/sub)
//! plus multi-bit ripple-carry add/sub, and carries an independent host-side
//! oracle for verification.
//!
//! Multi-bit arithmetic uses a bit-transposed layout: plane `r` holds bit
//! `r` of every lane. A vector of `lanes` bits occupies
//! `stripes = ceil(lanes / cols)` consecutive data rows per plane, and the
//! driver splits work across sub-arrays when one sub-array cannot hold all
//! planes (host-loaded chunks; the chunk count is reported).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::fmt;

use crate::analog::AnalogEngine;
use crate::bits::BitRow;
use crate::exec::{execute_in_subarray, ExecError, ExecutionStats};
use crate::geometry::Geometry;
use crate::isa::{AapInstruction, AapType, Program, RowName, RowSpec};
use crate::memory::{MemError, MemoryState, SubArrayState};

/// The basic functions the kernel library emits programs for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelOp {
    Copy,
    Not,
    And2,
    Or2,
    Nand2,
    Nor2,
    Maj3,
    Min3,
    Xnor2,
    Xor2,
    FullAdd,
    FullSub,
    /// n-bit ripple-carry addition over bit-transposed lanes.
    RippleAdd(usize),
    /// n-bit subtraction: the subtrahend is complemented through a DCC and
    /// the initial carry is the all-ones row (two's complement).
    RippleSub(usize),
}

impl KernelOp {
    /// Input rows (bit planes for the ripple ops).
    pub fn input_count(&self) -> usize {
        match self {
            KernelOp::Copy | KernelOp::Not => 1,
            KernelOp::And2 | KernelOp::Or2 | KernelOp::Nand2 | KernelOp::Nor2 => 2,
            KernelOp::Xnor2 | KernelOp::Xor2 => 2,
            KernelOp::Maj3 | KernelOp::Min3 | KernelOp::FullAdd | KernelOp::FullSub => 3,
            KernelOp::RippleAdd(n) | KernelOp::RippleSub(n) => 2 * n,
        }
    }

    /// Result rows (sum planes plus final carry for the ripple ops).
    pub fn output_count(&self) -> usize {
        match self {
            KernelOp::FullAdd | KernelOp::FullSub => 2,
            KernelOp::RippleAdd(n) | KernelOp::RippleSub(n) => n + 1,
            _ => 1,
        }
    }

    /// Scratch data-row blocks (alternating carry rows for the ripple ops).
    pub fn scratch_count(&self) -> usize {
        match self {
            KernelOp::RippleAdd(_) | KernelOp::RippleSub(_) => 2,
            _ => 0,
        }
    }

    fn needed_x_rows(&self) -> usize {
        match self {
            KernelOp::Copy | KernelOp::Not => 0,
            KernelOp::Xnor2 | KernelOp::Xor2 => 2,
            KernelOp::And2 | KernelOp::Or2 | KernelOp::Nand2 | KernelOp::Nor2 => 3,
            KernelOp::Maj3 | KernelOp::Min3 => 3,
            _ => 6,
        }
    }

    fn needed_dcc_cells(&self) -> usize {
        match self {
            KernelOp::Copy | KernelOp::And2 | KernelOp::Or2 | KernelOp::Maj3 => 0,
            KernelOp::Not | KernelOp::Nand2 | KernelOp::Nor2 | KernelOp::Min3 => 1,
            KernelOp::Xnor2 => 0,
            KernelOp::Xor2 => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for KernelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelOp::Copy => write!(f, "copy"),
            KernelOp::Not => write!(f, "not"),
            KernelOp::And2 => write!(f, "and2"),
            KernelOp::Or2 => write!(f, "or2"),
            KernelOp::Nand2 => write!(f, "nand2"),
            KernelOp::Nor2 => write!(f, "nor2"),
            KernelOp::Maj3 => write!(f, "maj3"),
            KernelOp::Min3 => write!(f, "min3"),
            KernelOp::Xnor2 => write!(f, "xnor2"),
            KernelOp::Xor2 => write!(f, "xor2"),
            KernelOp::FullAdd => write!(f, "fulladd"),
            KernelOp::FullSub => write!(f, "fullsub"),
            KernelOp::RippleAdd(n) => write!(f, "add{n}"),
            KernelOp::RippleSub(n) => write!(f, "sub{n}"),
        }
    }
}

/// How the add/sub carry step is emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionMode {
    /// Carry comes from the untouched operand copies (x1, x3, x5), which is
    /// the majority of the actual inputs.
    #[default]
    Corrected,
    /// Verbatim DRIM function-table carry sources (x1, x2, x3). After the
    /// preceding dual-row steps x2 no longer holds the second operand, so
    /// this computes a wrong carry for some inputs; kept for comparison.
    PaperLiteral,
}

/// A kernel bound to concrete rows of one sub-array. Every block occupies
/// `stripes = ceil(lanes / cols)` consecutive data rows. Serializable as
/// the JSON job-spec format the CLI accepts for explicit row bindings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub op: KernelOp,
    #[serde(default)]
    pub bank: usize,
    #[serde(default)]
    pub subarray: usize,
    /// Base data row of each input block.
    pub operands: Vec<usize>,
    /// Base data row of each result block.
    pub results: Vec<usize>,
    /// Base data row of each scratch block.
    #[serde(default)]
    pub scratch: Vec<usize>,
    /// Bit-columns processed per block.
    pub lanes: usize,
    #[serde(default)]
    pub mode: EmissionMode,
}

impl KernelSpec {
    /// Standard layout in one sub-array: inputs, results, then scratch
    /// packed from data row 0.
    pub fn plan(op: KernelOp, lanes: usize, g: &Geometry) -> Result<KernelSpec, KernelError> {
        let k = stripes_for(lanes, g);
        let blocks = op.input_count() + op.output_count() + op.scratch_count();
        if blocks * k > g.usable_data_rows() {
            return Err(KernelError::CapacityExceeded {
                needed_rows: blocks * k,
                available: g.usable_data_rows(),
            });
        }
        let base = |i: usize| i * k;
        let inputs = op.input_count();
        let outputs = op.output_count();
        Ok(KernelSpec {
            op,
            bank: 0,
            subarray: 0,
            operands: (0..inputs).map(base).collect(),
            results: (inputs..inputs + outputs).map(base).collect(),
            scratch: (inputs + outputs..blocks).map(base).collect(),
            lanes,
            mode: EmissionMode::Corrected,
        })
    }

    pub fn stripes(&self, g: &Geometry) -> usize {
        stripes_for(self.lanes, g)
    }
}

fn stripes_for(lanes: usize, g: &Geometry) -> usize {
    lanes.div_ceil(g.cols_per_row).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    Arity { op: String, expected: usize, got: usize },
    LaneMismatch,
    InsufficientComputeRows { op: String, x_rows: usize, dcc_cells: usize },
    CapacityExceeded { needed_rows: usize, available: usize },
    BlockOverlap(String),
    RowsOutOfRange(String),
    Exec(ExecError),
    Mem(MemError),
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::Arity { op, expected, got } => {
                write!(f, "{op} takes {expected} operand(s), got {got}")
            }
            KernelError::LaneMismatch => write!(f, "operand vectors differ in length"),
            KernelError::InsufficientComputeRows { op, x_rows, dcc_cells } => write!(
                f,
                "{op} needs {x_rows} x rows and {dcc_cells} dcc cells in the geometry"
            ),
            KernelError::CapacityExceeded { needed_rows, available } => write!(
                f,
                "layout needs {needed_rows} data rows, sub-array has {available}"
            ),
            KernelError::BlockOverlap(what) => write!(f, "row blocks overlap: {what}"),
            KernelError::RowsOutOfRange(what) => write!(f, "rows out of range: {what}"),
            KernelError::Exec(e) => write!(f, "{e}"),
            KernelError::Mem(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for KernelError {}

impl From<ExecError> for KernelError {
    fn from(e: ExecError) -> Self {
        KernelError::Exec(e)
    }
}

impl From<MemError> for KernelError {
    fn from(e: MemError) -> Self {
        KernelError::Mem(e)
    }
}

/// Emits the AAP program realizing `spec`. Operand copies keep the source
/// data rows pristine; dual- and triple-row activations only ever touch
/// compute rows.
pub fn emit(spec: &KernelSpec, g: &Geometry) -> Result<Program, KernelError> {
    check_spec(spec, g)?;
    let k = spec.stripes(g);
    let size = (k * g.cols_per_row) as u64;
    let d = |base: usize| RowSpec::data(base);
    let mut prog = Program::default();
    let mut push = |ty: AapType, rows: Vec<RowSpec>| {
        prog.instructions.push(AapInstruction::new(ty, rows, size));
    };

    use AapType::*;
    let ops = &spec.operands;
    let res = &spec.results;
    match spec.op {
        KernelOp::Copy => {
            push(Type1, vec![d(ops[0]), d(res[0])]);
        }
        KernelOp::Not => {
            push(Type1, vec![d(ops[0]), RowSpec::dcc(2)]);
            push(Type1, vec![RowSpec::dcc(1), d(res[0])]);
        }
        KernelOp::Xnor2 => {
            push(Type1, vec![d(ops[0]), RowSpec::x(1)]);
            push(Type1, vec![d(ops[1]), RowSpec::x(2)]);
            push(Type3, vec![RowSpec::x(1), RowSpec::x(2), d(res[0])]);
        }
        KernelOp::Xor2 => {
            // BL carries the XNOR, so XOR is routed through a DCC: the
            // complement wordline stores the complement line, the true
            // wordline reads it back out.
            push(Type1, vec![d(ops[0]), RowSpec::x(1)]);
            push(Type1, vec![d(ops[1]), RowSpec::x(2)]);
            push(Type3, vec![RowSpec::x(1), RowSpec::x(2), RowSpec::dcc(2)]);
            push(Type1, vec![RowSpec::dcc(1), d(res[0])]);
        }
        KernelOp::And2 | KernelOp::Or2 | KernelOp::Nand2 | KernelOp::Nor2 => {
            let ctrl = match spec.op {
                KernelOp::And2 | KernelOp::Nand2 => RowSpec::new(RowName::Ctrl0),
                _ => RowSpec::new(RowName::Ctrl1),
            };
            let invert = matches!(spec.op, KernelOp::Nand2 | KernelOp::Nor2);
            push(Type1, vec![d(ops[0]), RowSpec::x(1)]);
            push(Type1, vec![d(ops[1]), RowSpec::x(2)]);
            push(Type1, vec![ctrl, RowSpec::x(3)]);
            let dest = if invert { RowSpec::dcc(2) } else { d(res[0]) };
            push(Type4, vec![RowSpec::x(1), RowSpec::x(2), RowSpec::x(3), dest]);
            if invert {
                push(Type1, vec![RowSpec::dcc(1), d(res[0])]);
            }
        }
        KernelOp::Maj3 | KernelOp::Min3 => {
            let invert = spec.op == KernelOp::Min3;
            push(Type1, vec![d(ops[0]), RowSpec::x(1)]);
            push(Type1, vec![d(ops[1]), RowSpec::x(2)]);
            push(Type1, vec![d(ops[2]), RowSpec::x(3)]);
            let dest = if invert { RowSpec::dcc(2) } else { d(res[0]) };
            push(Type4, vec![RowSpec::x(1), RowSpec::x(2), RowSpec::x(3), dest]);
            if invert {
                push(Type1, vec![RowSpec::dcc(1), d(res[0])]);
            }
        }
        KernelOp::FullAdd => {
            push_full_add(
                &mut push,
                d(ops[0]),
                d(ops[1]),
                d(ops[2]),
                d(res[0]),
                d(res[1]),
                spec.mode,
            );
        }
        KernelOp::FullSub => {
            push_full_sub(
                &mut push,
                d(ops[0]),
                d(ops[1]),
                d(ops[2]),
                d(res[0]),
                d(res[1]),
                spec.mode,
            );
        }
        KernelOp::RippleAdd(n) | KernelOp::RippleSub(n) => {
            let sub = matches!(spec.op, KernelOp::RippleSub(_));
            let scratch = &spec.scratch;
            for r in 0..n {
                let carry_in = if r == 0 {
                    RowSpec::new(if sub { RowName::Ctrl1 } else { RowName::Ctrl0 })
                } else {
                    d(scratch[(r - 1) % 2])
                };
                let carry_out = if r == n - 1 {
                    d(res[n])
                } else {
                    d(scratch[r % 2])
                };
                let (a, b, sum) = (d(ops[r]), d(ops[n + r]), d(res[r]));
                if sub {
                    push_full_sub(&mut push, a, b, carry_in, sum, carry_out, spec.mode);
                } else {
                    push_full_add(&mut push, a, b, carry_in, sum, carry_out, spec.mode);
                }
            }
        }
    }

    if (spec.bank, spec.subarray) != (0, 0) {
        for instr in &mut prog.instructions {
            for row in &mut instr.rows {
                row.place = Some((spec.bank, spec.subarray));
            }
        }
    }
    Ok(prog)
}

/// The seven-command full-adder: double-copy the three operands, fold the
/// sum through two dual-row activations and the DCC pair, then majority the
/// pristine copies into the carry.
fn push_full_add(
    push: &mut impl FnMut(AapType, Vec<RowSpec>),
    a: RowSpec,
    b: RowSpec,
    carry_in: RowSpec,
    sum: RowSpec,
    carry_out: RowSpec,
    mode: EmissionMode,
) {
    use AapType::*;
    push(Type2, vec![a, RowSpec::x(1), RowSpec::x(2)]);
    push(Type2, vec![b, RowSpec::x(3), RowSpec::x(4)]);
    push(Type2, vec![carry_in, RowSpec::x(5), RowSpec::x(6)]);
    // dcc cell 1 := a xor b; x2/x4 now hold the xnor.
    push(Type3, vec![RowSpec::x(2), RowSpec::x(4), RowSpec::dcc(2)]);
    // dcc cell 2 := cin xor (a xor b), the sum.
    push(Type3, vec![RowSpec::x(6), RowSpec::dcc(1), RowSpec::dcc(4)]);
    push(Type1, vec![RowSpec::dcc(3), sum]);
    let carry_sources = match mode {
        EmissionMode::Corrected => [RowSpec::x(1), RowSpec::x(3), RowSpec::x(5)],
        EmissionMode::PaperLiteral => [RowSpec::x(1), RowSpec::x(2), RowSpec::x(3)],
    };
    push(
        Type4,
        vec![carry_sources[0], carry_sources[1], carry_sources[2], carry_out],
    );
}

/// Full-adder with the subtrahend complemented through dcc cell 1 on the
/// way in; chained LSB-first with an all-ones initial carry this is
/// two's-complement subtraction.
fn push_full_sub(
    push: &mut impl FnMut(AapType, Vec<RowSpec>),
    a: RowSpec,
    b: RowSpec,
    carry_in: RowSpec,
    diff: RowSpec,
    carry_out: RowSpec,
    mode: EmissionMode,
) {
    use AapType::*;
    push(Type2, vec![a, RowSpec::x(1), RowSpec::x(2)]);
    push(Type1, vec![b, RowSpec::dcc(2)]);
    push(Type2, vec![RowSpec::dcc(1), RowSpec::x(3), RowSpec::x(4)]);
    push(Type2, vec![carry_in, RowSpec::x(5), RowSpec::x(6)]);
    push(Type3, vec![RowSpec::x(2), RowSpec::x(4), RowSpec::dcc(2)]);
    push(Type3, vec![RowSpec::x(6), RowSpec::dcc(1), RowSpec::dcc(4)]);
    push(Type1, vec![RowSpec::dcc(3), diff]);
    let carry_sources = match mode {
        EmissionMode::Corrected => [RowSpec::x(1), RowSpec::x(3), RowSpec::x(5)],
        EmissionMode::PaperLiteral => [RowSpec::x(1), RowSpec::x(2), RowSpec::x(3)],
    };
    push(
        Type4,
        vec![carry_sources[0], carry_sources[1], carry_sources[2], carry_out],
    );
}

fn check_spec(spec: &KernelSpec, g: &Geometry) -> Result<(), KernelError> {
    let op = spec.op;
    if spec.operands.len() != op.input_count() {
        return Err(KernelError::Arity {
            op: op.to_string(),
            expected: op.input_count(),
            got: spec.operands.len(),
        });
    }
    if spec.results.len() != op.output_count() || spec.scratch.len() != op.scratch_count() {
        return Err(KernelError::Arity {
            op: op.to_string(),
            expected: op.output_count() + op.scratch_count(),
            got: spec.results.len() + spec.scratch.len(),
        });
    }
    if g.x_rows < op.needed_x_rows() || g.dcc_cells < op.needed_dcc_cells() {
        return Err(KernelError::InsufficientComputeRows {
            op: op.to_string(),
            x_rows: op.needed_x_rows(),
            dcc_cells: op.needed_dcc_cells(),
        });
    }
    if spec.bank >= g.banks || spec.subarray >= g.subarrays_per_bank {
        return Err(KernelError::RowsOutOfRange(format!(
            "b{}.s{}",
            spec.bank, spec.subarray
        )));
    }
    let k = spec.stripes(g);
    let in_range = |base: &usize| base + k <= g.usable_data_rows();
    if !spec
        .operands
        .iter()
        .chain(&spec.results)
        .chain(&spec.scratch)
        .all(in_range)
    {
        return Err(KernelError::CapacityExceeded {
            needed_rows: k,
            available: g.usable_data_rows(),
        });
    }
    // Results and scratch must not alias anything else; operands may alias
    // each other (reading the same rows twice is fine).
    let mut writable: Vec<(usize, &str)> = Vec::new();
    for &b in &spec.results {
        writable.push((b, "result"));
    }
    for &b in &spec.scratch {
        writable.push((b, "scratch"));
    }
    for (i, &(wb, kind)) in writable.iter().enumerate() {
        let overlaps = |other: usize| wb < other + k && other < wb + k;
        if spec.operands.iter().any(|&ob| overlaps(ob)) {
            return Err(KernelError::BlockOverlap(format!(
                "{kind} block at d{wb} overlaps an operand"
            )));
        }
        if writable[..i].iter().any(|&(ob, _)| overlaps(ob)) {
            return Err(KernelError::BlockOverlap(format!(
                "{kind} block at d{wb} overlaps another result/scratch block"
            )));
        }
    }
    Ok(())
}

/// Output of one kernel run.
#[derive(Clone, Debug)]
pub struct KernelRun {
    /// One vector per result (sum planes then carry for the ripple ops),
    /// each `lanes` bits wide.
    pub outputs: Vec<BitRow>,
    pub stats: ExecutionStats,
    /// Sub-arrays the work was split across.
    pub chunks: usize,
}

/// Runs a bound kernel. Operand rows must already hold the inputs; result
/// rows are returned and all other data rows are left bit-identical.
pub fn run_kernel(
    spec: &KernelSpec,
    memory: &mut MemoryState,
    engine: &AnalogEngine,
) -> Result<KernelRun, KernelError> {
    let g = memory.geometry().clone();
    let prog = emit(spec, &g)?;
    let k = spec.stripes(&g);
    let sub = memory.subarray_mut(spec.bank, spec.subarray)?;
    let stats = execute_in_subarray(&prog, sub, &g, engine, None)?;
    let outputs = spec
        .results
        .iter()
        .map(|&base| read_block(sub, base, k, spec.lanes))
        .collect::<Result<_, _>>()?;
    Ok(KernelRun {
        outputs,
        stats,
        chunks: 1,
    })
}

/// Loads the operand vectors into the spec's bound rows, then runs it.
/// This is the explicit-binding path behind the CLI's JSON job specs; no
/// layout planning or chunking happens.
pub fn run_kernel_with_inputs(
    spec: &KernelSpec,
    inputs: &[BitRow],
    memory: &mut MemoryState,
    engine: &AnalogEngine,
) -> Result<KernelRun, KernelError> {
    if inputs.len() != spec.op.input_count() {
        return Err(KernelError::Arity {
            op: spec.op.to_string(),
            expected: spec.op.input_count(),
            got: inputs.len(),
        });
    }
    if inputs.iter().any(|r| r.len() != spec.lanes) {
        return Err(KernelError::LaneMismatch);
    }
    let g = memory.geometry().clone();
    check_spec(spec, &g)?;
    let k = spec.stripes(&g);
    let sub = memory.subarray_mut(spec.bank, spec.subarray)?;
    for (v, &base) in inputs.iter().zip(&spec.operands) {
        write_block(sub, base, k, &g, v)?;
    }
    run_kernel(spec, memory, engine)
}

/// Runs a kernel over host vectors: plans the layout, loads operands,
/// executes (splitting across sub-arrays when one cannot hold the vector),
/// and reads the results back. `parallelism > 1` runs chunks on that many
/// threads; results are bit-identical regardless of degree.
pub fn run_kernel_vectors(
    op: KernelOp,
    inputs: &[BitRow],
    memory: &mut MemoryState,
    engine: &AnalogEngine,
    mode: EmissionMode,
    parallelism: usize,
) -> Result<KernelRun, KernelError> {
    if inputs.len() != op.input_count() {
        return Err(KernelError::Arity {
            op: op.to_string(),
            expected: op.input_count(),
            got: inputs.len(),
        });
    }
    let lanes = inputs.first().map_or(0, |r| r.len());
    if lanes == 0 || inputs.iter().any(|r| r.len() != lanes) {
        return Err(KernelError::LaneMismatch);
    }
    let g = memory.geometry().clone();
    let blocks = op.input_count() + op.output_count() + op.scratch_count();
    let k_max = g.usable_data_rows() / blocks;
    if k_max == 0 {
        return Err(KernelError::CapacityExceeded {
            needed_rows: blocks,
            available: g.usable_data_rows(),
        });
    }
    let lanes_per_chunk = k_max * g.cols_per_row;
    let chunks = lanes.div_ceil(lanes_per_chunk);
    if chunks > g.subarray_count() {
        return Err(KernelError::CapacityExceeded {
            needed_rows: chunks,
            available: g.subarray_count(),
        });
    }

    // Per-chunk input slices.
    let chunk_lanes: Vec<usize> = (0..chunks)
        .map(|c| (lanes - c * lanes_per_chunk).min(lanes_per_chunk))
        .collect();
    let chunk_inputs: Vec<Vec<BitRow>> = (0..chunks)
        .map(|c| {
            let start = c * lanes_per_chunk;
            inputs
                .iter()
                .map(|v| BitRow::from_fn(chunk_lanes[c], |i| v.get(start + i)))
                .collect()
        })
        .collect();

    let run_chunk = |sub: &mut SubArrayState,
                     chunk: &[BitRow]|
     -> Result<(Vec<BitRow>, ExecutionStats), KernelError> {
        let lanes = chunk[0].len();
        let mut spec = KernelSpec::plan(op, lanes, &g)?;
        spec.mode = mode;
        let k = spec.stripes(&g);
        for (v, &base) in chunk.iter().zip(&spec.operands) {
            write_block(sub, base, k, &g, v)?;
        }
        let prog = emit(&spec, &g)?;
        let stats = execute_in_subarray(&prog, sub, &g, engine, None)?;
        let outputs = spec
            .results
            .iter()
            .map(|&base| read_block(sub, base, k, lanes))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((outputs, stats))
    };

    let subs = &mut memory.subarrays_mut()[..chunks];
    let results: Vec<Result<(Vec<BitRow>, ExecutionStats), KernelError>> = if parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .expect("thread pool");
        pool.install(|| {
            subs.par_iter_mut()
                .zip(&chunk_inputs)
                .map(|(sub, chunk)| run_chunk(sub, chunk))
                .collect()
        })
    } else {
        subs.iter_mut()
            .zip(&chunk_inputs)
            .map(|(sub, chunk)| run_chunk(sub, chunk))
            .collect()
    };

    let mut stats = ExecutionStats::default();
    let mut per_result: Vec<Vec<BitRow>> = vec![Vec::new(); op.output_count()];
    for r in results {
        let (outputs, chunk_stats) = r?;
        stats.merge(&chunk_stats);
        for (slot, out) in per_result.iter_mut().zip(outputs) {
            slot.push(out);
        }
    }
    let outputs = per_result.into_iter().map(|parts| BitRow::concat(&parts)).collect();
    Ok(KernelRun {
        outputs,
        stats,
        chunks,
    })
}

fn write_block(
    sub: &mut SubArrayState,
    base: usize,
    k: usize,
    g: &Geometry,
    bits: &BitRow,
) -> Result<(), MemError> {
    let cols = g.cols_per_row;
    for s in 0..k {
        let row = BitRow::from_fn(cols, |c| {
            let i = s * cols + c;
            i < bits.len() && bits.get(i)
        });
        sub.host_write(crate::geometry::RowKind::Data(base + s), &row)?;
    }
    Ok(())
}

fn read_block(
    sub: &SubArrayState,
    base: usize,
    k: usize,
    lanes: usize,
) -> Result<BitRow, MemError> {
    let rows: Vec<BitRow> = (0..k)
        .map(|s| sub.host_read(crate::geometry::RowKind::Data(base + s)))
        .collect::<Result<_, _>>()?;
    let joined = BitRow::concat(&rows);
    Ok(BitRow::from_fn(lanes, |i| joined.get(i)))
}

/// Host-side reference results, computed directly on the bits without going
/// through the simulator. This is the verification oracle.
pub fn oracle_eval(op: KernelOp, inputs: &[BitRow]) -> Result<Vec<BitRow>, KernelError> {
    if inputs.len() != op.input_count() {
        return Err(KernelError::Arity {
            op: op.to_string(),
            expected: op.input_count(),
            got: inputs.len(),
        });
    }
    let lanes = inputs.first().map_or(0, |r| r.len());
    if inputs.iter().any(|r| r.len() != lanes) {
        return Err(KernelError::LaneMismatch);
    }
    let col = |j: usize, c: usize| inputs[j].get(c);
    let unary = |f: &dyn Fn(usize) -> bool| vec![BitRow::from_fn(lanes, f)];
    Ok(match op {
        KernelOp::Copy => unary(&|c| col(0, c)),
        KernelOp::Not => unary(&|c| !col(0, c)),
        KernelOp::And2 => unary(&|c| col(0, c) && col(1, c)),
        KernelOp::Or2 => unary(&|c| col(0, c) || col(1, c)),
        KernelOp::Nand2 => unary(&|c| !(col(0, c) && col(1, c))),
        KernelOp::Nor2 => unary(&|c| !(col(0, c) || col(1, c))),
        KernelOp::Xnor2 => unary(&|c| col(0, c) == col(1, c)),
        KernelOp::Xor2 => unary(&|c| col(0, c) != col(1, c)),
        KernelOp::Maj3 => unary(&|c| maj(col(0, c), col(1, c), col(2, c))),
        KernelOp::Min3 => unary(&|c| !maj(col(0, c), col(1, c), col(2, c))),
        KernelOp::FullAdd => vec![
            BitRow::from_fn(lanes, |c| col(0, c) ^ col(1, c) ^ col(2, c)),
            BitRow::from_fn(lanes, |c| maj(col(0, c), col(1, c), col(2, c))),
        ],
        KernelOp::FullSub => vec![
            BitRow::from_fn(lanes, |c| col(0, c) ^ !col(1, c) ^ col(2, c)),
            BitRow::from_fn(lanes, |c| maj(col(0, c), !col(1, c), col(2, c))),
        ],
        KernelOp::RippleAdd(n) | KernelOp::RippleSub(n) => {
            assert!(n <= 63, "oracle lane arithmetic is u64-based");
            let subtract = matches!(op, KernelOp::RippleSub(_));
            let mut planes = vec![BitRow::zeros(lanes); n + 1];
            for lane in 0..lanes {
                let mut a = 0u64;
                let mut b = 0u64;
                for r in 0..n {
                    a |= (col(r, lane) as u64) << r;
                    b |= (col(n + r, lane) as u64) << r;
                }
                let mask = (1u64 << n) - 1;
                // Independent integer route: two's complement arithmetic.
                let total = if subtract { a + (!b & mask) + 1 } else { a + b };
                for (r, plane) in planes.iter_mut().enumerate() {
                    plane.set(lane, total >> r & 1 == 1);
                }
            }
            planes
        }
    })
}

fn maj(a: bool, b: bool, c: bool) -> bool {
    (a as u8 + b as u8 + c as u8) >= 2
}

/// Transposes lane-major integers into bit planes (plane `r` = bit `r` of
/// every lane).
pub fn lanes_to_planes(values: &[u64], nbits: usize) -> Vec<BitRow> {
    (0..nbits)
        .map(|r| BitRow::from_fn(values.len(), |lane| values[lane] >> r & 1 == 1))
        .collect()
}

/// Inverse of [`lanes_to_planes`].
pub fn planes_to_lanes(planes: &[BitRow]) -> Vec<u64> {
    let lanes = planes.first().map_or(0, |p| p.len());
    (0..lanes)
        .map(|lane| {
            planes
                .iter()
                .enumerate()
                .fold(0u64, |acc, (r, p)| acc | (p.get(lane) as u64) << r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RowKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn g() -> Geometry {
        Geometry {
            banks: 2,
            subarrays_per_bank: 2,
            rows_per_subarray: 76,
            cols_per_row: 16,
            data_rows: 64,
            x_rows: 8,
            dcc_cells: 2,
        }
    }

    fn all_ops() -> Vec<KernelOp> {
        vec![
            KernelOp::Copy,
            KernelOp::Not,
            KernelOp::And2,
            KernelOp::Or2,
            KernelOp::Nand2,
            KernelOp::Nor2,
            KernelOp::Maj3,
            KernelOp::Min3,
            KernelOp::Xnor2,
            KernelOp::Xor2,
            KernelOp::FullAdd,
            KernelOp::FullSub,
        ]
    }

    fn run_op(op: KernelOp, inputs: &[BitRow]) -> KernelRun {
        let mut mem = MemoryState::create(g(), false).unwrap();
        let engine = AnalogEngine::default();
        run_kernel_vectors(op, inputs, &mut mem, &engine, EmissionMode::Corrected, 1).unwrap()
    }

    #[test]
    fn emitted_lengths_match_the_function_table() {
        let geom = g();
        let counts = [
            (KernelOp::Copy, 1),
            (KernelOp::Not, 2),
            (KernelOp::Xnor2, 3),
            (KernelOp::Xor2, 4),
            (KernelOp::And2, 4),
            (KernelOp::Or2, 4),
            (KernelOp::Nand2, 5),
            (KernelOp::Nor2, 5),
            (KernelOp::Maj3, 4),
            (KernelOp::Min3, 5),
            (KernelOp::FullAdd, 7),
            (KernelOp::FullSub, 8),
            (KernelOp::RippleAdd(4), 28),
            (KernelOp::RippleSub(4), 32),
        ];
        for (op, expected) in counts {
            let spec = KernelSpec::plan(op, geom.cols_per_row, &geom).unwrap();
            let prog = emit(&spec, &geom).unwrap();
            assert_eq!(prog.instructions.len(), expected, "{op}");
            // Every emitted program must be statically valid.
            assert!(crate::isa::validate(&prog, &geom).is_empty(), "{op}");
        }
    }

    #[test]
    fn full_add_type_sequence_matches_table() {
        let geom = g();
        let spec = KernelSpec::plan(KernelOp::FullAdd, 16, &geom).unwrap();
        let prog = emit(&spec, &geom).unwrap();
        let types: Vec<u8> = prog.instructions.iter().map(|i| i.ty.number()).collect();
        assert_eq!(types, vec![2, 2, 2, 3, 3, 1, 4]);
    }

    #[test]
    fn exhaustive_per_column_truth_tables() {
        // Column c of the inputs carries the bits of c, so 16 columns cover
        // every combination of up to 3 operands twice over.
        for op in all_ops() {
            let m = op.input_count();
            let inputs: Vec<BitRow> = (0..m)
                .map(|j| BitRow::from_fn(16, |c| c >> j & 1 == 1))
                .collect();
            let run = run_op(op, &inputs);
            let want = oracle_eval(op, &inputs).unwrap();
            assert_eq!(run.outputs, want, "{op}");
        }
    }

    #[test]
    fn random_vectors_match_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xD81);
        for op in all_ops() {
            for _ in 0..20 {
                let lanes = rng.gen_range(1..=64);
                let inputs: Vec<BitRow> = (0..op.input_count())
                    .map(|_| BitRow::random(lanes, &mut rng))
                    .collect();
                let run = run_op(op, &inputs);
                assert_eq!(run.outputs, oracle_eval(op, &inputs).unwrap(), "{op}");
            }
        }
    }

    #[test]
    fn full_add_truth_table_and_literal_mode_discrepancy() {
        // All 8 (a, b, cin) combinations in 8 columns.
        let inputs: Vec<BitRow> = (0..3)
            .map(|j| BitRow::from_fn(8, |c| c >> j & 1 == 1))
            .collect();
        let run = run_op(KernelOp::FullAdd, &inputs);
        for c in 0..8 {
            let (a, b, cin) = (c & 1 == 1, c & 2 == 2, c & 4 == 4);
            assert_eq!(run.outputs[0].get(c), a ^ b ^ cin, "sum {c}");
            assert_eq!(run.outputs[1].get(c), maj(a, b, cin), "carry {c}");
        }

        // The verbatim table sequence computes a wrong carry somewhere.
        let mut mem = MemoryState::create(g(), false).unwrap();
        let engine = AnalogEngine::default();
        let literal = run_kernel_vectors(
            KernelOp::FullAdd,
            &inputs,
            &mut mem,
            &engine,
            EmissionMode::PaperLiteral,
            1,
        )
        .unwrap();
        assert_eq!(literal.outputs[0], run.outputs[0], "sum path is unaffected");
        assert_ne!(literal.outputs[1], run.outputs[1], "carry must differ");
    }

    #[test]
    fn ripple_add_matches_integer_arithmetic() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for &n in &[4usize, 8] {
            let lanes = 50;
            let a: Vec<u64> = (0..lanes).map(|_| rng.gen_range(0..1 << n)).collect();
            let b: Vec<u64> = (0..lanes).map(|_| rng.gen_range(0..1 << n)).collect();
            let mut planes = lanes_to_planes(&a, n);
            planes.extend(lanes_to_planes(&b, n));
            let run = run_op(KernelOp::RippleAdd(n), &planes);
            let sums = planes_to_lanes(&run.outputs[..n]);
            for lane in 0..lanes {
                assert_eq!(sums[lane], (a[lane] + b[lane]) & ((1 << n) - 1));
                assert_eq!(
                    run.outputs[n].get(lane),
                    (a[lane] + b[lane]) >> n & 1 == 1,
                    "final carry"
                );
            }
        }
    }

    #[test]
    fn ripple_add_is_commutative() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 8;
        let lanes = 40;
        let a: Vec<u64> = (0..lanes).map(|_| rng.gen_range(0..256)).collect();
        let b: Vec<u64> = (0..lanes).map(|_| rng.gen_range(0..256)).collect();
        let mut ab = lanes_to_planes(&a, n);
        ab.extend(lanes_to_planes(&b, n));
        let mut ba = lanes_to_planes(&b, n);
        ba.extend(lanes_to_planes(&a, n));
        assert_eq!(
            run_op(KernelOp::RippleAdd(n), &ab).outputs,
            run_op(KernelOp::RippleAdd(n), &ba).outputs
        );
    }

    #[test]
    fn ripple_sub_is_twos_complement() {
        let mut rng = ChaCha12Rng::seed_from_u64(1234);
        let n = 8;
        let lanes = 64;
        let a: Vec<u64> = (0..lanes).map(|_| rng.gen_range(0..256)).collect();
        let b: Vec<u64> = (0..lanes).map(|_| rng.gen_range(0..256)).collect();
        let mut planes = lanes_to_planes(&a, n);
        planes.extend(lanes_to_planes(&b, n));
        let run = run_op(KernelOp::RippleSub(n), &planes);
        let diffs = planes_to_lanes(&run.outputs[..n]);
        for lane in 0..lanes {
            assert_eq!(diffs[lane], a[lane].wrapping_sub(b[lane]) & 255);
            // Final carry is the complement of the borrow.
            assert_eq!(run.outputs[n].get(lane), a[lane] >= b[lane]);
        }
    }

    #[test]
    fn de_morgan_closure() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let a = BitRow::random(48, &mut rng);
        let b = BitRow::random(48, &mut rng);
        let c = BitRow::random(48, &mut rng);

        let nand = run_op(KernelOp::Nand2, &[a.clone(), b.clone()]).outputs;
        let and = run_op(KernelOp::And2, &[a.clone(), b.clone()]).outputs;
        let not_and = run_op(KernelOp::Not, &[and[0].clone()]).outputs;
        assert_eq!(nand, not_and);

        let min = run_op(KernelOp::Min3, &[a.clone(), b.clone(), c.clone()]).outputs;
        let maj = run_op(KernelOp::Maj3, &[a, b, c]).outputs;
        let not_maj = run_op(KernelOp::Not, &[maj[0].clone()]).outputs;
        assert_eq!(min, not_maj);
    }

    #[test]
    fn data_rows_other_than_results_are_untouched() {
        let geom = g();
        let mut mem = MemoryState::create(geom.clone(), false).unwrap();
        let engine = AnalogEngine::default();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        // Fill the whole data space with noise first.
        for i in 0..geom.usable_data_rows() {
            let row = BitRow::random(geom.cols_per_row, &mut rng);
            mem.write_row(crate::geometry::RowAddress::new(0, 0, RowKind::Data(i)), &row)
                .unwrap();
        }
        let spec = KernelSpec::plan(KernelOp::FullAdd, geom.cols_per_row, &geom).unwrap();
        // Load operands over the noise.
        let inputs: Vec<BitRow> = (0..3)
            .map(|_| BitRow::random(geom.cols_per_row, &mut rng))
            .collect();
        let sub = mem.subarray_mut(0, 0).unwrap();
        for (v, &base) in inputs.iter().zip(&spec.operands) {
            write_block(sub, base, 1, &geom, v).unwrap();
        }
        let before: Vec<BitRow> = (0..geom.usable_data_rows())
            .map(|i| sub.host_read(RowKind::Data(i)).unwrap())
            .collect();

        run_kernel(&spec, &mut mem, &engine).unwrap();

        let sub = mem.subarray(0, 0).unwrap();
        for (i, prior) in before.iter().enumerate() {
            if spec.results.contains(&i) {
                continue;
            }
            let now = sub.host_read(RowKind::Data(i)).unwrap();
            assert_eq!(&now, prior, "row d{i} changed");
        }
    }

    #[test]
    fn wide_vectors_stripe_and_chunk_across_subarrays() {
        let geom = g();
        // Xnor2 needs 3 blocks; usable rows = 62 -> 20 stripes max per
        // sub-array = 320 lanes. 1000 lanes must span 4 sub-arrays.
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let a = BitRow::random(1000, &mut rng);
        let b = BitRow::random(1000, &mut rng);
        let mut mem = MemoryState::create(geom, false).unwrap();
        let engine = AnalogEngine::default();
        let run = run_kernel_vectors(
            KernelOp::Xnor2,
            &[a.clone(), b.clone()],
            &mut mem,
            &engine,
            EmissionMode::Corrected,
            1,
        )
        .unwrap();
        assert_eq!(run.chunks, 4);
        assert_eq!(run.outputs, oracle_eval(KernelOp::Xnor2, &[a, b]).unwrap());
        assert!(run.stats.total_aaps() > 3);
    }

    #[test]
    fn parallel_chunking_is_deterministic() {
        let geom = g();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let a = BitRow::random(1200, &mut rng);
        let b = BitRow::random(1200, &mut rng);
        let engine = AnalogEngine::default();
        let mut runs = Vec::new();
        for par in [1usize, 4] {
            let mut mem = MemoryState::create(geom.clone(), false).unwrap();
            let run = run_kernel_vectors(
                KernelOp::Xor2,
                &[a.clone(), b.clone()],
                &mut mem,
                &engine,
                EmissionMode::Corrected,
                par,
            )
            .unwrap();
            runs.push((run.outputs, run.stats));
        }
        assert_eq!(runs[0], runs[1]);
    }

    #[test]
    fn capacity_and_compute_row_errors() {
        let tiny = Geometry {
            banks: 1,
            subarrays_per_bank: 1,
            rows_per_subarray: 14,
            cols_per_row: 8,
            data_rows: 4,
            x_rows: 6,
            dcc_cells: 2,
        };
        // FullAdd needs 5 blocks, only 2 usable rows.
        assert!(matches!(
            KernelSpec::plan(KernelOp::FullAdd, 8, &tiny),
            Err(KernelError::CapacityExceeded { .. })
        ));

        let no_x = Geometry {
            banks: 1,
            subarrays_per_bank: 1,
            rows_per_subarray: 70,
            cols_per_row: 8,
            data_rows: 64,
            x_rows: 2,
            dcc_cells: 2,
        };
        let spec = KernelSpec::plan(KernelOp::FullAdd, 8, &no_x).unwrap();
        assert!(matches!(
            emit(&spec, &no_x),
            Err(KernelError::InsufficientComputeRows { .. })
        ));
    }

    #[test]
    fn oracle_arity_is_checked() {
        let a = BitRow::zeros(8);
        assert!(matches!(
            oracle_eval(KernelOp::Maj3, &[a.clone(), a.clone()]),
            Err(KernelError::Arity { .. })
        ));
    }

    #[test]
    fn lane_transpose_round_trip() {
        let values = vec![0u64, 1, 5, 255, 128, 77];
        let planes = lanes_to_planes(&values, 8);
        assert_eq!(planes.len(), 8);
        assert_eq!(planes_to_lanes(&planes), values);
    }
}
