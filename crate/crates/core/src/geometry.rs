//! DRAM organizational hierarchy: banks, sub-arrays, and row naming.
//!
//! Each computational sub-array exposes `rows_per_subarray` wordline names:
//! the data rows sit behind the regular row decoder, while the compute
//! wordlines (`x1..xN` plus the dual-contact wordlines `dcc1..`) hang off the
//! modified row decoder that supports multi-row activation. A dual-contact
//! cell is one storage row with two wordlines: the "true" wordline couples
//! the capacitor to BL, the "comp" wordline couples it to the complement
//! bit-line.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Shape of the simulated memory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub banks: usize,
    pub subarrays_per_bank: usize,
    pub rows_per_subarray: usize,
    pub cols_per_row: usize,
    pub data_rows: usize,
    pub x_rows: usize,
    /// Number of physical dual-contact cells (each exposes two wordlines).
    pub dcc_cells: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            banks: 8,
            subarrays_per_bank: 64,
            rows_per_subarray: 512,
            cols_per_row: 256,
            data_rows: 500,
            x_rows: 8,
            dcc_cells: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryError(pub String);

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid geometry: {}", self.0)
    }
}

impl std::error::Error for GeometryError {}

impl Geometry {
    /// The 8-bank configuration used for the regular chip.
    pub fn drim_r() -> Self {
        Geometry::default()
    }

    /// The 3D-stacked preset: 256 banks, same sub-array shape.
    pub fn drim_s() -> Self {
        Geometry {
            banks: 256,
            ..Geometry::default()
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let fields = [
            ("banks", self.banks),
            ("subarrays_per_bank", self.subarrays_per_bank),
            ("rows_per_subarray", self.rows_per_subarray),
            ("cols_per_row", self.cols_per_row),
            ("data_rows", self.data_rows),
            ("x_rows", self.x_rows),
            ("dcc_cells", self.dcc_cells),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(GeometryError(format!("{name} must be >= 1")));
            }
        }
        let wordlines = self.data_rows + self.x_rows + 2 * self.dcc_cells;
        if wordlines != self.rows_per_subarray {
            return Err(GeometryError(format!(
                "wordline budget mismatch: data_rows + x_rows + 2*dcc_cells = {wordlines}, \
                 rows_per_subarray = {}",
                self.rows_per_subarray
            )));
        }
        if self.data_rows < 3 {
            return Err(GeometryError(
                "need at least 3 data rows (two are reserved as constants)".into(),
            ));
        }
        Ok(())
    }

    pub fn subarray_count(&self) -> usize {
        self.banks * self.subarrays_per_bank
    }

    /// Total compute wordlines behind the modified row decoder.
    pub fn compute_wordlines(&self) -> usize {
        self.x_rows + 2 * self.dcc_cells
    }

    /// Data row reserved as the all-zeros constant.
    pub fn ctrl0_index(&self) -> usize {
        self.data_rows - 2
    }

    /// Data row reserved as the all-ones constant.
    pub fn ctrl1_index(&self) -> usize {
        self.data_rows - 1
    }

    /// Data rows usable for operands/results (constants excluded).
    pub fn usable_data_rows(&self) -> usize {
        self.data_rows - 2
    }
}

/// Names one wordline inside a sub-array.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowKind {
    /// Data row `d<idx>`, `idx` in `0..data_rows`.
    Data(usize),
    /// Compute row `x<n>`, `n` in `1..=x_rows`.
    X(usize),
    /// True wordline of dual-contact cell `k` (couples the cell to BL).
    DccTrue(usize),
    /// Complement wordline of dual-contact cell `k` (couples it to BL-bar).
    DccComp(usize),
}

impl RowKind {
    /// Parses `dcc<n>` numbering: dcc1/dcc2 are the true/comp wordlines of
    /// cell 1, dcc3/dcc4 of cell 2, and so on.
    pub fn from_dcc_wordline(n: usize) -> Option<RowKind> {
        if n == 0 {
            return None;
        }
        let cell = n.div_ceil(2);
        if n % 2 == 1 {
            Some(RowKind::DccTrue(cell))
        } else {
            Some(RowKind::DccComp(cell))
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self, RowKind::Data(_))
    }

    /// True for the 12 wordlines behind the modified row decoder.
    pub fn is_compute(&self) -> bool {
        !self.is_data()
    }

    /// True when raising this wordline couples its cell to the complement
    /// bit-line instead of BL.
    pub fn couples_to_blbar(&self) -> bool {
        matches!(self, RowKind::DccComp(_))
    }

    /// Physical dual-contact cell index, if this is a DCC wordline.
    pub fn dcc_cell(&self) -> Option<usize> {
        match self {
            RowKind::DccTrue(k) | RowKind::DccComp(k) => Some(*k),
            _ => None,
        }
    }

    pub fn in_bounds(&self, g: &Geometry) -> bool {
        match *self {
            RowKind::Data(i) => i < g.data_rows,
            RowKind::X(n) => n >= 1 && n <= g.x_rows,
            RowKind::DccTrue(k) | RowKind::DccComp(k) => k >= 1 && k <= g.dcc_cells,
        }
    }
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RowKind::Data(i) => write!(f, "d{i}"),
            RowKind::X(n) => write!(f, "x{n}"),
            RowKind::DccTrue(k) => write!(f, "dcc{}", 2 * k - 1),
            RowKind::DccComp(k) => write!(f, "dcc{}", 2 * k),
        }
    }
}

impl fmt::Debug for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Fully qualified wordline name: bank, sub-array, row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowAddress {
    pub bank: usize,
    pub subarray: usize,
    pub row: RowKind,
}

impl RowAddress {
    pub fn new(bank: usize, subarray: usize, row: RowKind) -> Self {
        RowAddress { bank, subarray, row }
    }

    pub fn in_bounds(&self, g: &Geometry) -> bool {
        self.bank < g.banks && self.subarray < g.subarrays_per_bank && self.row.in_bounds(g)
    }
}

impl fmt::Display for RowAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}.s{}.{}", self.bank, self.subarray, self.row)
    }
}
