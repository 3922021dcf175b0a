//! Executes validated AAP programs against the memory model and accounts
//! the cycles the performance model is driven by.
//!
//! Execution is stripe-major: stripe `s` of the whole program runs before
//! stripe `s+1`, so a wide vector behaves exactly like running each
//! row-sized slice of the program on its own. That matters because compute
//! rows are shared scratch reused by every stripe.

use std::fmt;

use serde::Serialize;

use crate::analog::AnalogEngine;
use crate::bits::BitRow;
use crate::isa::{validate, AapType, Diagnostic, Program};
use crate::memory::{MemError, MemoryState, SenseMode, SubArrayState};

/// AAPs executed per instruction type, serialized in the report format
/// `{"aaps": {"type1": n1, ...}, "stripes": s}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AapCounts {
    pub type1: u64,
    pub type2: u64,
    pub type3: u64,
    pub type4: u64,
}

impl AapCounts {
    pub fn add(&mut self, ty: AapType) {
        match ty {
            AapType::Type1 => self.type1 += 1,
            AapType::Type2 => self.type2 += 1,
            AapType::Type3 => self.type3 += 1,
            AapType::Type4 => self.type4 += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.type1 + self.type2 + self.type3 + self.type4
    }

    pub fn merge(&mut self, other: &AapCounts) {
        self.type1 += other.type1;
        self.type2 += other.type2;
        self.type3 += other.type3;
        self.type4 += other.type4;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExecutionStats {
    pub aaps: AapCounts,
    pub stripes: u64,
}

impl ExecutionStats {
    pub fn total_aaps(&self) -> u64 {
        self.aaps.total()
    }

    pub fn merge(&mut self, other: &ExecutionStats) {
        self.aaps.merge(&other.aaps);
        self.stripes += other.stripes;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }
}

/// Observability hook: one event per executed AAP, carrying the resolved
/// bit-line values. Off by default; recording clones the sense row.
pub trait TraceSink {
    fn record(&mut self, instr: usize, stripe: u64, sense_bl: &BitRow);
}

impl TraceSink for Vec<(usize, u64, BitRow)> {
    fn record(&mut self, instr: usize, stripe: u64, sense_bl: &BitRow) {
        self.push((instr, stripe, sense_bl.clone()));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecError {
    /// The program failed static validation; executing would be meaningless.
    Invalid(Vec<Diagnostic>),
    /// Runtime failure at an instruction (unreachable for validated input).
    Aborted { instr: usize, cause: MemError },
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecError::Invalid(diags) => {
                write!(f, "program failed validation ({} diagnostics)", diags.len())
            }
            ExecError::Aborted { instr, cause } => {
                write!(f, "aborted at instruction {instr}: {cause}")
            }
        }
    }
}

impl std::error::Error for ExecError {}

/// One full AAP: activate the sources, write every destination, precharge.
fn step(
    sub: &mut SubArrayState,
    instr: &crate::isa::AapInstruction,
    stripe: usize,
    geometry: &crate::geometry::Geometry,
    engine: &AnalogEngine,
    idx: usize,
    trace: &mut Option<&mut dyn TraceSink>,
) -> Result<(), MemError> {
    let mode = match instr.ty {
        AapType::Type3 => SenseMode::Dra,
        _ => SenseMode::Standard,
    };
    let sources: Vec<_> = instr
        .sources()
        .iter()
        .map(|r| r.resolve(geometry, stripe))
        .collect();
    sub.activate(&sources, mode, engine, None)?;
    for dest in instr.destinations() {
        sub.write_into_active(dest.resolve(geometry, stripe))?;
    }
    if let Some(sink) = trace.as_deref_mut() {
        let bl = sub.sense_bl().expect("sensed");
        sink.record(idx, stripe as u64, bl);
    }
    sub.precharge();
    Ok(())
}

/// Runs a program to completion. The program must validate cleanly against
/// the memory's geometry; `trace` receives one event per executed AAP.
pub fn execute(
    program: &Program,
    memory: &mut MemoryState,
    engine: &AnalogEngine,
    mut trace: Option<&mut dyn TraceSink>,
) -> Result<ExecutionStats, ExecError> {
    let geometry = memory.geometry().clone();
    let diags = validate(program, &geometry);
    if !diags.is_empty() {
        return Err(ExecError::Invalid(diags));
    }
    let mut stats = ExecutionStats::default();
    let Some(first) = program.instructions.first() else {
        return Ok(stats);
    };
    let stripes = (first.size_bits / geometry.cols_per_row as u64) as usize;
    stats.stripes = stripes as u64;

    for stripe in 0..stripes {
        for (idx, instr) in program.instructions.iter().enumerate() {
            let (bank, sub) = instr.place();
            memory
                .subarray_mut(bank, sub)
                .and_then(|sa| step(sa, instr, stripe, &geometry, engine, idx, &mut trace))
                .map_err(|cause| ExecError::Aborted { instr: idx, cause })?;
            stats.aaps.add(instr.ty);
        }
    }
    Ok(stats)
}

/// Like [`execute`], but pins the whole program to one already-borrowed
/// sub-array, ignoring placement prefixes. This is what lets the kernel
/// driver run disjoint chunks on worker threads.
pub fn execute_in_subarray(
    program: &Program,
    sub: &mut SubArrayState,
    geometry: &crate::geometry::Geometry,
    engine: &AnalogEngine,
    mut trace: Option<&mut dyn TraceSink>,
) -> Result<ExecutionStats, ExecError> {
    let diags = validate(program, geometry);
    if !diags.is_empty() {
        return Err(ExecError::Invalid(diags));
    }
    let mut stats = ExecutionStats::default();
    let Some(first) = program.instructions.first() else {
        return Ok(stats);
    };
    let stripes = (first.size_bits / geometry.cols_per_row as u64) as usize;
    stats.stripes = stripes as u64;

    for stripe in 0..stripes {
        for (idx, instr) in program.instructions.iter().enumerate() {
            step(sub, instr, stripe, geometry, engine, idx, &mut trace)
                .map_err(|cause| ExecError::Aborted { instr: idx, cause })?;
            stats.aaps.add(instr.ty);
        }
    }
    Ok(stats)
}
