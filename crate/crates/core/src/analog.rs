//! Charge-sharing and reconfigurable sense-amplifier model.
//!
//! Everything here is a pure function from participating cell states (plus
//! optional parasitics and per-trial variation) to resolved logic levels.
//! The two add-on inverters are modeled as ideal comparators at their
//! switching voltages: the low-Vs inverter detects deviation from Vdd/4 and
//! acts as a NOR, the high-Vs inverter detects deviation from 3Vdd/4 and
//! acts as a NAND. Gating them with the AND gate yields XOR on the
//! complement bit-line and XNOR on BL in a single sensing cycle.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Electrical parameters, normalized to vdd = 1.0 and cell_cap = 1.0.
///
/// `bl_cap = 0` is the ideal mode in which the shared voltage equals
/// `n*vdd/C` over the connected cell capacitors; setting it above zero
/// opts into the charge-conserving mode that includes the bit-line
/// precharge charge at vdd/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalogParams {
    pub vdd: f64,
    pub cell_cap: f64,
    pub bl_cap: f64,
    pub vs_low: f64,
    pub vs_high: f64,
    pub vs_mid: f64,
}

impl Default for AnalogParams {
    fn default() -> Self {
        AnalogParams {
            vdd: 1.0,
            cell_cap: 1.0,
            bl_cap: 0.0,
            vs_low: 0.25,
            vs_high: 0.75,
            vs_mid: 0.5,
        }
    }
}

impl AnalogParams {
    pub fn validate(&self) -> Result<(), AnalogError> {
        let ok = 0.0 < self.vs_low
            && self.vs_low < self.vs_mid
            && self.vs_mid < self.vs_high
            && self.vs_high < self.vdd
            && self.cell_cap > 0.0
            && self.bl_cap >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(AnalogError::BadParams)
        }
    }
}

/// Per-trial perturbations of the sensing path. Cell-indexed fields follow
/// the participant order handed to [`share_voltage`]. Capacitance and
/// stored-voltage deviations are relative; threshold shifts and the line
/// noise term are absolute volts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VariationSample {
    pub d_cell_cap: [f64; 3],
    pub d_cell_v: [f64; 3],
    pub d_bl_cap: f64,
    pub d_vs_low: f64,
    pub d_vs_high: f64,
    pub d_vs_mid: f64,
    /// Additive zero-mean noise on the shared voltage (stand-in for the
    /// wordline/bit-line coupling the cell figure names but never values).
    pub d_v_noise: f64,
}

impl VariationSample {
    pub fn is_zero(&self) -> bool {
        *self == VariationSample::default()
    }
}

/// Which multi-row sensing mechanism a trial exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Dra,
    Tra,
}

impl Mechanism {
    pub fn cell_count(&self) -> usize {
        match self {
            Mechanism::Dra => 2,
            Mechanism::Tra => 3,
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Dra => write!(f, "dra"),
            Mechanism::Tra => write!(f, "tra"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalogError {
    EmptyCells,
    TooManyCells(usize),
    BadParams,
}

impl fmt::Display for AnalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalogError::EmptyCells => write!(f, "charge sharing needs at least one cell"),
            AnalogError::TooManyCells(n) => {
                write!(f, "at most 3 cells can share a bit-line, got {n}")
            }
            AnalogError::BadParams => write!(f, "thresholds must satisfy 0 < low < mid < high < vdd"),
        }
    }
}

impl std::error::Error for AnalogError {}

/// Shared bit-line voltage after raising the wordlines of `cell_bits`.
///
/// Charge conservation over the connected capacitors:
/// `v = (sum(c_i * v_i) + bl_cap * vdd/2) / (sum(c_i) + bl_cap)`
/// with `v_i` either 0 or vdd(1 + dv_i). With `bl_cap = 0` this reduces to
/// `n*vdd/C`, the count of '1' cells over the connected capacitor count.
pub fn share_voltage(
    cell_bits: &[bool],
    params: &AnalogParams,
    var: Option<&VariationSample>,
) -> Result<f64, AnalogError> {
    if cell_bits.is_empty() {
        return Err(AnalogError::EmptyCells);
    }
    if cell_bits.len() > 3 {
        return Err(AnalogError::TooManyCells(cell_bits.len()));
    }
    let zero = VariationSample::default();
    let var = var.unwrap_or(&zero);

    let mut charge = 0.0;
    let mut cap = 0.0;
    for (i, &bit) in cell_bits.iter().enumerate() {
        let c = params.cell_cap * (1.0 + var.d_cell_cap[i]);
        let v = if bit {
            params.vdd * (1.0 + var.d_cell_v[i])
        } else {
            0.0
        };
        charge += c * v;
        cap += c;
    }
    let bl = params.bl_cap * (1.0 + var.d_bl_cap);
    charge += bl * params.vdd / 2.0;
    cap += bl;

    Ok(charge / cap + var.d_v_noise)
}

/// A perturbed switching voltage stays inside the rails: however the
/// transistors vary, an inverter powered from (0, vdd) cannot switch
/// outside that interval.
fn effective_threshold(base: f64, shift: f64, vdd: f64) -> f64 {
    (base + shift).clamp(f64::MIN_POSITIVE, vdd)
}

/// Standard sense amplification: resolves against the mid threshold.
/// Covers normal reads and the majority resolution of triple activation.
pub fn resolve_standard(v: f64, params: &AnalogParams, var: Option<&VariationSample>) -> bool {
    let shift = var.map_or(0.0, |s| s.d_vs_mid);
    v > effective_threshold(params.vs_mid, shift, params.vdd)
}

/// Dual-row sensing through the reconfigurable amplifier.
///
/// The low-Vs inverter output is `v < vs_low` (NOR over the shared cells),
/// the high-Vs inverter output is `v < vs_high` (NAND). The complement line
/// latches `nand AND NOT nor`, which is the XOR of the two cells; BL latches
/// its complement, the XNOR.
pub fn resolve_dra(
    v: f64,
    params: &AnalogParams,
    var: Option<&VariationSample>,
) -> (bool, bool) {
    let (dl, dh) = var.map_or((0.0, 0.0), |s| (s.d_vs_low, s.d_vs_high));
    let nor_out = v < effective_threshold(params.vs_low, dl, params.vdd);
    let nand_out = v < effective_threshold(params.vs_high, dh, params.vdd);
    let blbar = nand_out && !nor_out;
    (!blbar, blbar)
}

/// Runs one sensing trial under variation and flags whether the resolved
/// value differs from the zero-variation resolution of the same inputs.
pub fn resolve_with_variation(
    cell_bits: &[bool],
    mechanism: Mechanism,
    params: &AnalogParams,
    var: &VariationSample,
) -> Result<(bool, bool), AnalogError> {
    if cell_bits.len() != mechanism.cell_count() {
        return Err(AnalogError::TooManyCells(cell_bits.len()));
    }
    let ideal_v = share_voltage(cell_bits, params, None)?;
    let actual_v = share_voltage(cell_bits, params, Some(var))?;
    let (ideal, actual) = match mechanism {
        Mechanism::Dra => (
            resolve_dra(ideal_v, params, None).0,
            resolve_dra(actual_v, params, Some(var)).0,
        ),
        Mechanism::Tra => (
            resolve_standard(ideal_v, params, None),
            resolve_standard(actual_v, params, Some(var)),
        ),
    };
    Ok((actual, actual != ideal))
}

/// Parameter bundle the memory model threads through activations.
#[derive(Clone, Debug, Default)]
pub struct AnalogEngine {
    pub params: AnalogParams,
}

impl AnalogEngine {
    pub fn new(params: AnalogParams) -> Result<Self, AnalogError> {
        params.validate()?;
        Ok(AnalogEngine { params })
    }

    /// Resolves one sensing event: the BL value for standard sensing, or
    /// the (bl, blbar) pair for dual-row sensing.
    pub fn sense(
        &self,
        cell_bits: &[bool],
        dra: bool,
        var: Option<&VariationSample>,
    ) -> Result<(bool, bool), AnalogError> {
        let v = share_voltage(cell_bits, &self.params, var)?;
        if dra {
            Ok(resolve_dra(v, &self.params, var))
        } else {
            let bl = resolve_standard(v, &self.params, var);
            Ok((bl, !bl))
        }
    }
}
