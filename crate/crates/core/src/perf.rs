//! Analytical latency/throughput/energy/area model for DRIM and the
//! baseline in-DRAM platforms (Ambit-style TRA-only, DRISA-1T1C,
//! DRISA-3T1C) plus the DDR4 interface-copy energy baseline.
//!
//! All platforms are modeled at command granularity: a command is one
//! AAP-equivalent (activate, optional second activate, precharge) with a
//! fixed overhead plus a per-activated-row charge cost. DRIM sequences come
//! straight from the kernel library; baseline sequences are structural
//! models. Where a published figure cannot be derived from first
//! principles, the shipped calibration pins constants to reproduce the
//! published platform ratios and says so — see `calibration.json`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Geometry;
use crate::isa::AapType;
use crate::kernels::{self, EmissionMode, KernelOp, KernelSpec};

/// Operations the platform comparison covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerfOp {
    Copy,
    Not,
    Xnor2,
    /// One-bit full addition (sum and carry) per column.
    Add,
}

impl PerfOp {
    pub fn parse(s: &str) -> Option<PerfOp> {
        match s {
            "copy" => Some(PerfOp::Copy),
            "not" => Some(PerfOp::Not),
            "xnor2" => Some(PerfOp::Xnor2),
            "add" => Some(PerfOp::Add),
            _ => None,
        }
    }
}

impl fmt::Display for PerfOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerfOp::Copy => write!(f, "copy"),
            PerfOp::Not => write!(f, "not"),
            PerfOp::Xnor2 => write!(f, "xnor2"),
            PerfOp::Add => write!(f, "add"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Drim,
    Ambit,
    Drisa1t1c,
    Drisa3t1c,
}

impl Platform {
    pub const ALL: [Platform; 4] = [
        Platform::Drim,
        Platform::Ambit,
        Platform::Drisa1t1c,
        Platform::Drisa3t1c,
    ];

    pub fn parse(s: &str) -> Option<Platform> {
        match s {
            "drim" => Some(Platform::Drim),
            "ambit" => Some(Platform::Ambit),
            "drisa1t1c" => Some(Platform::Drisa1t1c),
            "drisa3t1c" => Some(Platform::Drisa3t1c),
            _ => None,
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Platform::Drim => write!(f, "drim"),
            Platform::Ambit => write!(f, "ambit"),
            Platform::Drisa1t1c => write!(f, "drisa1t1c"),
            Platform::Drisa3t1c => write!(f, "drisa3t1c"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PerfError {
    UnknownOp(String),
    UnknownPlatform(String),
    InvalidSize(u64),
    Kernel(String),
}

impl fmt::Display for PerfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerfError::UnknownOp(s) => write!(f, "unknown operation `{s}`"),
            PerfError::UnknownPlatform(s) => write!(f, "unknown platform `{s}`"),
            PerfError::InvalidSize(n) => {
                write!(f, "vector size {n} is not a positive multiple of the row width")
            }
            PerfError::Kernel(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for PerfError {}

/// Continuous calibration constants, shipped in `calibration.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    pub version: u32,
    /// One AAP-equivalent command, activate to precharge.
    pub t_aap_ns: f64,
    /// Charge cost per activated row-column pair.
    pub e_rowcol_pj: f64,
    /// Fixed per-command overhead (decode, precharge, sense enable).
    pub e_aap_fixed_pj: f64,
    /// Interface-copy energy baseline.
    pub e_ddr4_per_kb_pj: f64,
    pub notes: String,
}

pub const CALIBRATION_JSON: &str = include_str!("calibration.json");

impl Default for CostParams {
    fn default() -> Self {
        serde_json::from_str(CALIBRATION_JSON).expect("shipped calibration parses")
    }
}

/// Cost model: calibration constants plus the geometry and the number of
/// sub-arrays computing in parallel.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub params: CostParams,
    pub geometry: Geometry,
    pub parallel_subarrays: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        let geometry = Geometry::default();
        let parallel_subarrays = geometry.subarray_count();
        CostModel {
            params: CostParams::default(),
            geometry,
            parallel_subarrays,
        }
    }
}

impl CostModel {
    pub fn for_geometry(geometry: Geometry) -> Self {
        let parallel_subarrays = geometry.subarray_count();
        CostModel {
            params: CostParams::default(),
            geometry,
            parallel_subarrays,
        }
    }

    fn cmd_energy_pj(&self, rows_activated: u32) -> f64 {
        self.params.e_aap_fixed_pj
            + self.params.e_rowcol_pj * self.geometry.cols_per_row as f64 * rows_activated as f64
    }
}

/// One platform command and how many wordlines it raises in total (both
/// activates of an AAP; one for the single-row cycles of the DRISA models).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlatformCmd {
    pub rows_activated: u32,
}

/// The command sequence a platform spends on one row-wide batch of an op.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSequence {
    pub cmds: Vec<PlatformCmd>,
}

impl OpSequence {
    fn of(rows: &[u32]) -> Self {
        OpSequence {
            cmds: rows.iter().map(|&r| PlatformCmd { rows_activated: r }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cmds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cmds.is_empty()
    }
}

fn aap_rows(ty: AapType) -> u32 {
    match ty {
        AapType::Type1 => 2, // src + des
        AapType::Type2 => 3, // src + two des
        AapType::Type3 => 3, // two src + des
        AapType::Type4 => 4, // three src + des
    }
}

/// DRIM sequences come from the kernel emitter, so the performance model
/// can never drift from what the simulator executes.
fn drim_sequence(op: PerfOp, g: &Geometry) -> Result<OpSequence, PerfError> {
    let kernel = match op {
        PerfOp::Copy => KernelOp::Copy,
        PerfOp::Not => KernelOp::Not,
        PerfOp::Xnor2 => KernelOp::Xnor2,
        PerfOp::Add => KernelOp::FullAdd,
    };
    let spec = KernelSpec::plan(kernel, g.cols_per_row, g)
        .map_err(|e| PerfError::Kernel(e.to_string()))?;
    let prog = kernels::emit(&spec, g).map_err(|e| PerfError::Kernel(e.to_string()))?;
    Ok(OpSequence {
        cmds: prog
            .instructions
            .iter()
            .map(|i| PlatformCmd {
                rows_activated: aap_rows(i.ty),
            })
            .collect(),
    })
}

/// Baseline command structures.
///
/// Ambit: copy and NOT are the same RowClone/DCC sequences as DRIM. AND/OR
/// take the four-step recipe (two operand copies, one control-row copy,
/// one TRA), which the search oracle in the test suite confirms minimal.
/// For XNOR the same exhaustive search bottoms out at 9 commands under
/// faithful charge-sharing semantics, while the published cross-platform
/// throughput (2.3x) implies about 7; the shipped table pins the
/// published-ratio value (5 copies + 2 TRAs) and the discrepancy is
/// documented in the test. Add chains two X(N)OR folds and a majority with
/// shared operand staging.
///
/// DRISA-1T1C computes in a latch behind the amplifier, two cycles per
/// gate plus staging, one row per cycle. DRISA-3T1C cascades NOR2 cycles
/// (two rows per compute cycle). Their cycle counts are pinned to
/// reproduce the published throughput/energy ratios and are report-only.
fn baseline_sequence(op: PerfOp, platform: Platform) -> OpSequence {
    match (platform, op) {
        (Platform::Ambit, PerfOp::Copy) => OpSequence::of(&[2]),
        (Platform::Ambit, PerfOp::Not) => OpSequence::of(&[2, 2]),
        (Platform::Ambit, PerfOp::Xnor2) => OpSequence::of(&[2, 2, 2, 2, 2, 4, 4]),
        (Platform::Ambit, PerfOp::Add) => OpSequence::of(&[
            2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 4, 4, 4, 4,
        ]),
        (Platform::Drisa1t1c, PerfOp::Copy) => OpSequence::of(&[1, 1]),
        (Platform::Drisa1t1c, PerfOp::Not) => OpSequence::of(&[1, 1]),
        (Platform::Drisa1t1c, PerfOp::Xnor2) => OpSequence::of(&[1; 6]),
        (Platform::Drisa1t1c, PerfOp::Add) => OpSequence::of(&[1; 16]),
        (Platform::Drisa3t1c, PerfOp::Copy) => OpSequence::of(&[2]),
        (Platform::Drisa3t1c, PerfOp::Not) => OpSequence::of(&[2, 2]),
        (Platform::Drisa3t1c, PerfOp::Xnor2) => OpSequence::of(&[2; 11]),
        (Platform::Drisa3t1c, PerfOp::Add) => OpSequence::of(&[2; 22]),
        (Platform::Drim, _) => unreachable!("drim sequences come from the kernel library"),
    }
}

pub fn op_sequence(op: PerfOp, platform: Platform, g: &Geometry) -> Result<OpSequence, PerfError> {
    match platform {
        Platform::Drim => drim_sequence(op, g),
        other => Ok(baseline_sequence(op, other)),
    }
}

/// Cost of one op on one platform at steady state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpCost {
    pub op: PerfOp,
    pub platform: Platform,
    pub aap_count: u64,
    pub latency_ns: f64,
    pub energy_pj_per_kb: f64,
    /// Column results produced per second with every parallel sub-array
    /// active (latency-bound, bandwidth-unconstrained inside sub-arrays).
    pub throughput_ops_per_s: f64,
}

pub fn cost_of(op: PerfOp, platform: Platform, model: &CostModel) -> Result<OpCost, PerfError> {
    let seq = op_sequence(op, platform, &model.geometry)?;
    let count = seq.len() as u64;
    let latency_ns = count as f64 * model.params.t_aap_ns;
    let energy_per_batch_pj: f64 = seq
        .cmds
        .iter()
        .map(|c| model.cmd_energy_pj(c.rows_activated))
        .sum();
    let batches_per_kb = 8192.0 / model.geometry.cols_per_row as f64;
    let bits_per_batch = (model.geometry.cols_per_row * model.parallel_subarrays) as f64;
    Ok(OpCost {
        op,
        platform,
        aap_count: count,
        latency_ns,
        energy_pj_per_kb: energy_per_batch_pj * batches_per_kb,
        throughput_ops_per_s: bits_per_batch / (latency_ns * 1e-9),
    })
}

/// Throughput over a whole vector. The vector length cancels for
/// latency-bound execution; it is validated and reported for context.
pub fn throughput(
    op: PerfOp,
    platform: Platform,
    vector_bits: u64,
    model: &CostModel,
) -> Result<f64, PerfError> {
    if vector_bits == 0 || !vector_bits.is_multiple_of(model.geometry.cols_per_row as u64) {
        return Err(PerfError::InvalidSize(vector_bits));
    }
    Ok(cost_of(op, platform, model)?.throughput_ops_per_s)
}

/// Energy comparison for one op: pJ/KB per platform plus the ratios the
/// design is evaluated on (vs Ambit, vs DRISA-1T1C, and for copy vs moving
/// the data over the DDR4 interface).
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub op: PerfOp,
    pub per_platform_pj_per_kb: Vec<(Platform, f64)>,
    pub ddr4_copy_pj_per_kb: Option<f64>,
    pub drim_vs_ambit: f64,
    pub drim_vs_drisa1t1c: f64,
    pub drim_vs_ddr4_copy: Option<f64>,
}

pub fn energy_report(op: PerfOp, model: &CostModel) -> Result<EnergyReport, PerfError> {
    let per_platform: Vec<(Platform, f64)> = Platform::ALL
        .iter()
        .map(|&p| Ok((p, cost_of(op, p, model)?.energy_pj_per_kb)))
        .collect::<Result<_, PerfError>>()?;
    let get = |p: Platform| {
        per_platform
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, e)| *e)
            .expect("all platforms present")
    };
    let drim = get(Platform::Drim);
    let ddr4 = (op == PerfOp::Copy).then_some(model.params.e_ddr4_per_kb_pj);
    Ok(EnergyReport {
        op,
        per_platform_pj_per_kb: per_platform.clone(),
        ddr4_copy_pj_per_kb: ddr4,
        drim_vs_ambit: get(Platform::Ambit) / drim,
        drim_vs_drisa1t1c: get(Platform::Drisa1t1c) / drim,
        drim_vs_ddr4_copy: ddr4.map(|e| e / drim),
    })
}

/// Itemized add-on transistor counts and the row-equivalent overhead.
/// The headline chip-area percentage is echoed as reported, not derived:
/// 24 rows out of 512 is 4.7%, which does not reconcile with the published
/// 9.3% figure, so both are printed.
#[derive(Clone, Debug, Serialize)]
pub struct AreaReport {
    /// Add-on transistors per sense amplifier (one SA per bit-line).
    pub sa_addon_transistors_per_sa: u32,
    /// Extra transistor per bit-line for each physical DCC row.
    pub dcc_addon_transistors_per_bl_per_row: u32,
    /// Extra buffer-chain transistors per compute-wordline driver.
    pub mrd_addon_transistors_per_wl_driver: u32,
    /// Transistors per enable-signal MUX in the controller.
    pub ctrl_mux_transistors: u32,
    pub per_subarray: AreaPerSubarray,
    pub chip_total_addon_transistors: u64,
    /// Published row-equivalent overhead per sub-array, echoed.
    pub row_equivalent_overhead_rows: u32,
    /// Published headline chip-area overhead, echoed (percent).
    pub reported_chip_area_pct: f64,
    /// Row-equivalent fraction implied by the geometry (percent).
    pub naive_row_fraction_pct: f64,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AreaPerSubarray {
    pub sa_addon_transistors: u64,
    pub dcc_addon_transistors: u64,
    pub mrd_addon_transistors: u64,
    pub ctrl_mux_transistors: u64,
    pub total: u64,
}

pub fn area_report(g: &Geometry) -> AreaReport {
    let cols = g.cols_per_row as u64;
    let sa = 22 * cols;
    let dcc = g.dcc_cells as u64 * cols;
    let mrd = 2 * g.compute_wordlines() as u64;
    // One 6-transistor MUX per sense-amplifier enable signal (En_M, En_x,
    // En_C).
    let mux = 6 * 3;
    let per_subarray = AreaPerSubarray {
        sa_addon_transistors: sa,
        dcc_addon_transistors: dcc,
        mrd_addon_transistors: mrd,
        ctrl_mux_transistors: mux,
        total: sa + dcc + mrd + mux,
    };
    let chip_total = per_subarray.total * g.subarray_count() as u64;
    AreaReport {
        sa_addon_transistors_per_sa: 22,
        dcc_addon_transistors_per_bl_per_row: 1,
        mrd_addon_transistors_per_wl_driver: 2,
        ctrl_mux_transistors: 6,
        per_subarray,
        chip_total_addon_transistors: chip_total,
        row_equivalent_overhead_rows: 24,
        reported_chip_area_pct: 9.3,
        naive_row_fraction_pct: 24.0 / g.rows_per_subarray as f64 * 100.0,
        note: "the 9.3% headline figure is echoed as reported; the row-equivalent \
               overhead implies a smaller fraction and the two are not reconciled here"
            .into(),
    }
}

/// Emission-mode hook for the paper-literal comparison path; the cost
/// numbers are identical (same command counts), provided for completeness.
pub fn drim_sequence_with_mode(
    op: PerfOp,
    g: &Geometry,
    mode: EmissionMode,
) -> Result<OpSequence, PerfError> {
    let kernel = match op {
        PerfOp::Copy => KernelOp::Copy,
        PerfOp::Not => KernelOp::Not,
        PerfOp::Xnor2 => KernelOp::Xnor2,
        PerfOp::Add => KernelOp::FullAdd,
    };
    let mut spec = KernelSpec::plan(kernel, g.cols_per_row, g)
        .map_err(|e| PerfError::Kernel(e.to_string()))?;
    spec.mode = mode;
    let prog = kernels::emit(&spec, g).map_err(|e| PerfError::Kernel(e.to_string()))?;
    Ok(OpSequence {
        cmds: prog
            .instructions
            .iter()
            .map(|i| PlatformCmd {
                rows_activated: aap_rows(i.ty),
            })
            .collect(),
    })
}
