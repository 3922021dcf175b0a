//! Sub-array state and the primitive transitions the executor composes into
//! AAP instructions: multi-row activate with a sensing mode, write-back into
//! the sensed value, and precharge.
//!
//! Sensing is destructive by design: after activation every participating
//! cell has been driven to the resolved rail, so dual-row activation leaves
//! XNOR in both source cells and triple activation leaves the majority in
//! all three. Kernels therefore always operate on copies.
//!
//! Coupling model: a cell raised through a DccComp wordline shares its
//! charge with the complement bit-line. Under differential sensing that is
//! equivalent to contributing the complemented bit on the BL side, and the
//! write-back drives such a cell from the complement line. This keeps a
//! bare activate of either DCC wordline restorative and makes reads through
//! the complement wordline return the inverted cell, which is the whole
//! point of the dual-contact cell.

use std::fmt;
use std::io::{self, Read, Write};

use crate::analog::{AnalogEngine, AnalogError, VariationSample};
use crate::bits::BitRow;
use crate::geometry::{Geometry, GeometryError, RowAddress, RowKind};

/// Sensing configuration of the reconfigurable amplifier, i.e. which enable
/// bits the controller raises during sense amplification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SenseMode {
    /// En_M=1, En_x=1, En_C=0: write/read, copy, NOT, and TRA majority.
    Standard,
    /// En_M=0, En_x=1, En_C=1: dual-row X(N)OR sensing.
    Dra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Precharged,
    SharedAndSensed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MemError {
    Geometry(GeometryError),
    OutOfRange(String),
    /// Multi-row activation of a wordline outside the modified row decoder.
    DecoderViolation(RowKind),
    /// Sensing-mode arity mismatch (DRA needs exactly 2 rows, standard 1 or 3).
    ModeViolation { rows: usize, mode: SenseMode },
    /// Both wordlines of one dual-contact cell raised together.
    DccConflict(usize),
    DuplicateRow(RowKind),
    /// Operation issued in the wrong phase of the activate/precharge cycle.
    Sequencing { needed: Phase, found: Phase },
    /// Host write to a reserved constant row.
    ConstantRow(RowKind),
    Analog(AnalogError),
}

impl fmt::Display for MemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemError::Geometry(e) => write!(f, "{e}"),
            MemError::OutOfRange(what) => write!(f, "address out of range: {what}"),
            MemError::DecoderViolation(row) => {
                write!(f, "multi-row activation of non-compute row {row}")
            }
            MemError::ModeViolation { rows, mode } => {
                write!(f, "{mode:?} sensing cannot activate {rows} row(s)")
            }
            MemError::DccConflict(cell) => {
                write!(f, "both wordlines of dcc cell {cell} raised together")
            }
            MemError::DuplicateRow(row) => write!(f, "row {row} activated twice"),
            MemError::Sequencing { needed, found } => {
                write!(f, "sequencing error: needed {needed:?}, sub-array is {found:?}")
            }
            MemError::ConstantRow(row) => write!(f, "write to constant row {row}"),
            MemError::Analog(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MemError {}

impl From<AnalogError> for MemError {
    fn from(e: AnalogError) -> Self {
        MemError::Analog(e)
    }
}

/// Mutable contents of one computational sub-array.
#[derive(Clone, Debug, PartialEq)]
pub struct SubArrayState {
    cols: usize,
    data: Vec<BitRow>,
    x: Vec<BitRow>,
    /// Physical dual-contact cells; each backs two wordlines.
    dcc: Vec<BitRow>,
    phase: Phase,
    sense_bl: Option<BitRow>,
}

impl SubArrayState {
    fn new(g: &Geometry, fill: bool) -> Self {
        SubArrayState {
            cols: g.cols_per_row,
            data: vec![BitRow::filled(g.cols_per_row, fill); g.data_rows],
            x: vec![BitRow::filled(g.cols_per_row, fill); g.x_rows],
            dcc: vec![BitRow::filled(g.cols_per_row, fill); g.dcc_cells],
            phase: Phase::Precharged,
            sense_bl: None,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Latched BL values of the last sense amplification, if any.
    pub fn sense_bl(&self) -> Option<&BitRow> {
        self.sense_bl.as_ref()
    }

    /// Complement bit-line; column-wise inverse of BL after any sense.
    pub fn sense_blbar(&self) -> Option<BitRow> {
        self.sense_bl.as_ref().map(BitRow::complement)
    }

    fn storage(&self, row: RowKind) -> &BitRow {
        match row {
            RowKind::Data(i) => &self.data[i],
            RowKind::X(n) => &self.x[n - 1],
            RowKind::DccTrue(k) | RowKind::DccComp(k) => &self.dcc[k - 1],
        }
    }

    fn storage_mut(&mut self, row: RowKind) -> &mut BitRow {
        match row {
            RowKind::Data(i) => &mut self.data[i],
            RowKind::X(n) => &mut self.x[n - 1],
            RowKind::DccTrue(k) | RowKind::DccComp(k) => &mut self.dcc[k - 1],
        }
    }

    fn check_bounds(&self, row: RowKind, g_rows: (usize, usize, usize)) -> Result<(), MemError> {
        let (data_rows, x_rows, dcc_cells) = g_rows;
        let ok = match row {
            RowKind::Data(i) => i < data_rows,
            RowKind::X(n) => n >= 1 && n <= x_rows,
            RowKind::DccTrue(k) | RowKind::DccComp(k) => k >= 1 && k <= dcc_cells,
        };
        if ok {
            Ok(())
        } else {
            Err(MemError::OutOfRange(row.to_string()))
        }
    }

    fn bounds_tuple(&self) -> (usize, usize, usize) {
        (self.data.len(), self.x.len(), self.dcc.len())
    }

    /// Returns both bit-lines to vdd/2. Idempotent; storage is untouched.
    pub fn precharge(&mut self) {
        self.phase = Phase::Precharged;
        self.sense_bl = None;
    }

    /// Simultaneously raises `rows` and runs sense amplification in `mode`.
    ///
    /// Per column the participating cells charge-share, the amplifier
    /// resolves BL (and its complement), and the full-rail write-back
    /// overwrites every participating cell: BL-coupled cells receive the BL
    /// value, complement-coupled cells the complement value. An optional
    /// uniform variation sample perturbs the sensing path of every column
    /// identically.
    pub fn activate(
        &mut self,
        rows: &[RowKind],
        mode: SenseMode,
        engine: &AnalogEngine,
        var: Option<&VariationSample>,
    ) -> Result<(), MemError> {
        if self.phase != Phase::Precharged {
            return Err(MemError::Sequencing {
                needed: Phase::Precharged,
                found: self.phase,
            });
        }
        if rows.is_empty() || rows.len() > 3 {
            return Err(MemError::ModeViolation {
                rows: rows.len(),
                mode,
            });
        }
        let bounds = self.bounds_tuple();
        for (i, &row) in rows.iter().enumerate() {
            self.check_bounds(row, bounds)?;
            if rows[..i].contains(&row) {
                return Err(MemError::DuplicateRow(row));
            }
            if let Some(cell) = row.dcc_cell() {
                let conflict = rows[..i]
                    .iter()
                    .any(|other| other.dcc_cell() == Some(cell));
                if conflict {
                    return Err(MemError::DccConflict(cell));
                }
            }
        }
        if rows.len() >= 2 {
            if let Some(&row) = rows.iter().find(|r| !r.is_compute()) {
                return Err(MemError::DecoderViolation(row));
            }
        }
        let dra = match (mode, rows.len()) {
            (SenseMode::Dra, 2) => true,
            (SenseMode::Standard, 1) | (SenseMode::Standard, 3) => false,
            _ => {
                return Err(MemError::ModeViolation {
                    rows: rows.len(),
                    mode,
                })
            }
        };

        // One variation sample applies to every column, so the resolution
        // only depends on the participating bit pattern: have the analog
        // engine resolve each of the 2^n patterns once, then look columns up.
        let n = rows.len();
        let mut table = [false; 8];
        let mut bits = [false; 3];
        for (pattern, slot) in table.iter_mut().enumerate().take(1 << n) {
            for (i, bit) in bits.iter_mut().enumerate().take(n) {
                *bit = pattern >> i & 1 == 1;
            }
            let (bl, _) = engine.sense(&bits[..n], dra, var)?;
            *slot = bl;
        }

        let mut sense = BitRow::zeros(self.cols);
        for col in 0..self.cols {
            let mut pattern = 0usize;
            for (i, &row) in rows.iter().enumerate() {
                let stored = self.storage(row).get(col);
                // Complement-coupled cells appear inverted on the BL side.
                let effective = stored ^ row.couples_to_blbar();
                pattern |= (effective as usize) << i;
            }
            sense.set(col, table[pattern]);
        }

        // Full-rail restore into every raised cell.
        let blbar = sense.complement();
        for &row in rows {
            let value = if row.couples_to_blbar() { &blbar } else { &sense };
            *self.storage_mut(row) = value.clone();
        }
        self.sense_bl = Some(sense);
        self.phase = Phase::SharedAndSensed;
        Ok(())
    }

    /// Second ACTIVATE of an AAP: copies the latched sense value into `dest`
    /// while the amplifiers still drive the bit-lines.
    pub fn write_into_active(&mut self, dest: RowKind) -> Result<(), MemError> {
        if self.phase != Phase::SharedAndSensed {
            return Err(MemError::Sequencing {
                needed: Phase::SharedAndSensed,
                found: self.phase,
            });
        }
        self.check_bounds(dest, self.bounds_tuple())?;
        let sense = self.sense_bl.as_ref().expect("sensed phase has a latched value");
        let value = if dest.couples_to_blbar() {
            sense.complement()
        } else {
            sense.clone()
        };
        *self.storage_mut(dest) = value;
        Ok(())
    }

    /// Host-side read; complement-wordline reads return the inverted cell.
    pub fn host_read(&self, row: RowKind) -> Result<BitRow, MemError> {
        self.check_bounds(row, self.bounds_tuple())?;
        let stored = self.storage(row);
        Ok(if row.couples_to_blbar() {
            stored.complement()
        } else {
            stored.clone()
        })
    }

    /// Host-side write; storing through the complement wordline inverts, so
    /// a read through the same wordline round-trips verbatim.
    pub fn host_write(&mut self, row: RowKind, bits: &BitRow) -> Result<(), MemError> {
        self.check_bounds(row, self.bounds_tuple())?;
        if bits.len() != self.cols {
            return Err(MemError::OutOfRange(format!(
                "row data is {} bits, row width is {}",
                bits.len(),
                self.cols
            )));
        }
        *self.storage_mut(row) = if row.couples_to_blbar() {
            bits.complement()
        } else {
            bits.clone()
        };
        Ok(())
    }
}

/// The whole simulated memory: `banks * subarrays_per_bank` independent
/// sub-arrays plus the geometry they share.
#[derive(Clone, Debug)]
pub struct MemoryState {
    geometry: Geometry,
    subarrays: Vec<SubArrayState>,
}

impl MemoryState {
    /// Builds a memory with every storage row holding `fill`, all sub-arrays
    /// precharged, and the two constant rows set to their values.
    pub fn create(geometry: Geometry, fill: bool) -> Result<Self, MemError> {
        geometry.validate().map_err(MemError::Geometry)?;
        let mut subarrays =
            vec![SubArrayState::new(&geometry, fill); geometry.subarray_count()];
        let zeros = BitRow::zeros(geometry.cols_per_row);
        let ones = BitRow::ones(geometry.cols_per_row);
        for sub in &mut subarrays {
            sub.data[geometry.ctrl0_index()] = zeros.clone();
            sub.data[geometry.ctrl1_index()] = ones.clone();
        }
        Ok(MemoryState {
            geometry,
            subarrays,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    fn index(&self, bank: usize, subarray: usize) -> Result<usize, MemError> {
        if bank >= self.geometry.banks || subarray >= self.geometry.subarrays_per_bank {
            return Err(MemError::OutOfRange(format!("b{bank}.s{subarray}")));
        }
        Ok(bank * self.geometry.subarrays_per_bank + subarray)
    }

    pub fn subarray(&self, bank: usize, subarray: usize) -> Result<&SubArrayState, MemError> {
        Ok(&self.subarrays[self.index(bank, subarray)?])
    }

    pub fn subarray_mut(
        &mut self,
        bank: usize,
        subarray: usize,
    ) -> Result<&mut SubArrayState, MemError> {
        let i = self.index(bank, subarray)?;
        Ok(&mut self.subarrays[i])
    }

    /// Slices out distinct sub-arrays for parallel operation. Panics if an
    /// index repeats; callers hand disjoint work to worker threads.
    pub fn subarrays_mut(&mut self) -> &mut [SubArrayState] {
        &mut self.subarrays
    }

    pub fn read_row(&self, addr: RowAddress) -> Result<BitRow, MemError> {
        if !addr.in_bounds(&self.geometry) {
            return Err(MemError::OutOfRange(addr.to_string()));
        }
        self.subarray(addr.bank, addr.subarray)?.host_read(addr.row)
    }

    /// Host store. Constant rows are read-only.
    pub fn write_row(&mut self, addr: RowAddress, bits: &BitRow) -> Result<(), MemError> {
        if !addr.in_bounds(&self.geometry) {
            return Err(MemError::OutOfRange(addr.to_string()));
        }
        if let RowKind::Data(i) = addr.row {
            if i == self.geometry.ctrl0_index() || i == self.geometry.ctrl1_index() {
                return Err(MemError::ConstantRow(addr.row));
            }
        }
        self.subarray_mut(addr.bank, addr.subarray)?
            .host_write(addr.row, bits)
    }

    /// Serializes every storage row, bank-major then sub-array, data rows
    /// first, then x rows, then the physical DCC cells; each row bit-packed
    /// LSB-first.
    pub fn write_image(&self, w: &mut impl Write) -> io::Result<()> {
        for sub in &self.subarrays {
            for row in sub.data.iter().chain(&sub.x).chain(&sub.dcc) {
                w.write_all(&row.to_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads an image produced by [`MemoryState::write_image`].
    pub fn read_image(geometry: Geometry, r: &mut impl Read) -> io::Result<Self> {
        let mut mem = MemoryState::create(geometry, false)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        let cols = mem.geometry.cols_per_row;
        let mut buf = vec![0u8; cols.div_ceil(8)];
        for sub in &mut mem.subarrays {
            for row in sub.data.iter_mut().chain(&mut sub.x).chain(&mut sub.dcc) {
                r.read_exact(&mut buf)?;
                *row = BitRow::from_bytes(cols, &buf);
            }
        }
        Ok(mem)
    }
}
