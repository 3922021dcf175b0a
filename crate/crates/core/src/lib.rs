//! Bit-accurate functional simulator and analytical performance/reliability
//! model of the DRIM processing-in-DRAM architecture.
//!
//! The simulator executes AAP-based programs over charge-sharing DRAM
//! sub-arrays (single, dual, and triple row activation through a
//! reconfigurable sense amplifier), a microprogram library generates the
//! bulk-bitwise kernels built from those primitives, and the analytical
//! side reports latency, throughput, energy, area, and Monte-Carlo failure
//! rates under process variation.

pub mod analog;
pub mod bits;
pub mod exec;
pub mod geometry;
pub mod isa;
pub mod kernels;
pub mod memory;
pub mod perf;
pub mod reliability;

pub use analog::{AnalogEngine, AnalogParams, Mechanism, VariationSample};
pub use bits::BitRow;
pub use exec::{execute, execute_in_subarray, ExecutionStats, TraceSink};
pub use geometry::{Geometry, RowAddress, RowKind};
pub use isa::{parse, validate, AapInstruction, AapType, Program, RowName, RowSpec};
pub use kernels::{
    emit, oracle_eval, run_kernel, run_kernel_vectors, EmissionMode, KernelOp, KernelSpec,
};
pub use memory::{MemoryState, SenseMode, SubArrayState};
pub use perf::{area_report, cost_of, energy_report, throughput, CostModel, PerfOp, Platform};
pub use reliability::{run_sweep, sample, Distribution, SweepResult, VariationSpec};
