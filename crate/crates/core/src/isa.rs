//! The four AAP instruction shapes, their textual assembly format, and the
//! static validator that enforces decoder and geometry constraints.
//!
//! Grammar (one instruction per line, `#` starts a comment, a leading
//! `name:` label is allowed and non-semantic):
//!
//! ```text
//! instr   := ("AAP1" | "AAP2" | "AAP3" | "AAP4") row+ "size=" int
//! row     := ["b" int "." "s" int "."] rowname
//! rowname := "d" int | "x" int | "dcc" int | "ctrl0" | "ctrl1"
//! ```
//!
//! AAP1 takes `src des`, AAP2 `src des1 des2`, AAP3 `src1 src2 des`
//! (dual-row activation), AAP4 `src1 src2 src3 des` (triple-row
//! activation). `size` is the vector width in bits and must be a positive
//! multiple of the row width; wider vectors stripe across consecutive data
//! rows while compute rows are reused per stripe.

use std::fmt;

use crate::geometry::{Geometry, RowKind};

/// Row operand as written: a wordline name plus an optional explicit
/// bank/sub-array placement. The constant rows stay symbolic so they do not
/// stripe with the rest of a wide vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowSpec {
    pub place: Option<(usize, usize)>,
    pub name: RowName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowName {
    Row(RowKind),
    Ctrl0,
    Ctrl1,
}

impl RowSpec {
    pub fn new(name: RowName) -> Self {
        RowSpec { place: None, name }
    }

    pub fn data(idx: usize) -> Self {
        RowSpec::new(RowName::Row(RowKind::Data(idx)))
    }

    pub fn x(n: usize) -> Self {
        RowSpec::new(RowName::Row(RowKind::X(n)))
    }

    /// `dcc<n>` wordline numbering (dcc1 = true wordline of cell 1, ...).
    pub fn dcc(n: usize) -> Self {
        RowSpec::new(RowName::Row(
            RowKind::from_dcc_wordline(n).expect("dcc wordline >= 1"),
        ))
    }

    pub fn at(mut self, bank: usize, subarray: usize) -> Self {
        self.place = Some((bank, subarray));
        self
    }

    /// Concrete wordline for one stripe; data rows advance, everything else
    /// is a per-sub-array resource.
    pub fn resolve(&self, g: &Geometry, stripe: usize) -> RowKind {
        match self.name {
            RowName::Row(RowKind::Data(i)) => RowKind::Data(i + stripe),
            RowName::Row(other) => other,
            RowName::Ctrl0 => RowKind::Data(g.ctrl0_index()),
            RowName::Ctrl1 => RowKind::Data(g.ctrl1_index()),
        }
    }

    fn is_compute(&self) -> bool {
        matches!(self.name, RowName::Row(k) if k.is_compute())
    }

    fn dcc_cell(&self) -> Option<usize> {
        match self.name {
            RowName::Row(k) => k.dcc_cell(),
            _ => None,
        }
    }
}

impl fmt::Display for RowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((b, s)) = self.place {
            write!(f, "b{b}.s{s}.")?;
        }
        match self.name {
            RowName::Row(k) => write!(f, "{k}"),
            RowName::Ctrl0 => write!(f, "ctrl0"),
            RowName::Ctrl1 => write!(f, "ctrl1"),
        }
    }
}

/// Which of the four ACTIVATE-ACTIVATE-PRECHARGE shapes an instruction is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AapType {
    /// `AAP(src, des)`: copy / NOT plumbing.
    Type1,
    /// `AAP(src, des1, des2)`: one source copied to two destinations.
    Type2,
    /// `AAP(src1, src2, des)`: dual-row activation, X(N)OR sensing.
    Type3,
    /// `AAP(src1, src2, src3, des)`: triple-row activation, majority.
    Type4,
}

impl AapType {
    pub fn number(&self) -> u8 {
        match self {
            AapType::Type1 => 1,
            AapType::Type2 => 2,
            AapType::Type3 => 3,
            AapType::Type4 => 4,
        }
    }

    pub fn row_count(&self) -> usize {
        match self {
            AapType::Type1 => 2,
            AapType::Type2 | AapType::Type3 => 3,
            AapType::Type4 => 4,
        }
    }

    pub fn source_count(&self) -> usize {
        match self {
            AapType::Type1 | AapType::Type2 => 1,
            AapType::Type3 => 2,
            AapType::Type4 => 3,
        }
    }

    fn from_mnemonic(s: &str) -> Option<AapType> {
        match s {
            "AAP1" => Some(AapType::Type1),
            "AAP2" => Some(AapType::Type2),
            "AAP3" => Some(AapType::Type3),
            "AAP4" => Some(AapType::Type4),
            _ => None,
        }
    }
}

/// One AAP instruction: sources first, then destinations, in operand order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AapInstruction {
    pub ty: AapType,
    pub rows: Vec<RowSpec>,
    pub size_bits: u64,
}

impl AapInstruction {
    pub fn new(ty: AapType, rows: Vec<RowSpec>, size_bits: u64) -> Self {
        assert_eq!(rows.len(), ty.row_count(), "operand arity for {ty:?}");
        AapInstruction { ty, rows, size_bits }
    }

    pub fn sources(&self) -> &[RowSpec] {
        &self.rows[..self.ty.source_count()]
    }

    pub fn destinations(&self) -> &[RowSpec] {
        &self.rows[self.ty.source_count()..]
    }

    /// Sub-array this instruction operates in: the explicit placement of its
    /// operands, defaulting to bank 0 / sub-array 0.
    pub fn place(&self) -> (usize, usize) {
        self.rows
            .iter()
            .find_map(|r| r.place)
            .unwrap_or((0, 0))
    }
}

impl fmt::Display for AapInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AAP{}", self.ty.number())?;
        for row in &self.rows {
            write!(f, " {row}")?;
        }
        write!(f, " size={}", self.size_bits)
    }
}

/// A parsed sequence of AAP instructions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub instructions: Vec<AapInstruction>,
}

impl Program {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for instr in &self.instructions {
            out.push_str(&instr.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parse failure with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Static violation found by [`validate`], tagged with the instruction index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub instr: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instruction {}: {}", self.instr, self.message)
    }
}

/// Parses the textual assembly format. Fails fast on the first error.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let mut instructions = Vec::new();
    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let mut tokens = tokenize(line);
        let Some((mut col, mut tok)) = tokens.next() else {
            continue;
        };
        // Optional non-semantic label.
        if let Some(stripped) = tok.strip_suffix(':') {
            if stripped.is_empty() || AapType::from_mnemonic(stripped).is_some() {
                return Err(err(line_no, col, "malformed label"));
            }
            match tokens.next() {
                Some((c, t)) => {
                    col = c;
                    tok = t;
                }
                None => continue,
            }
        }
        let ty = AapType::from_mnemonic(tok)
            .ok_or_else(|| err(line_no, col, format!("unknown mnemonic `{tok}`")))?;

        let mut rows = Vec::new();
        let mut size_bits = None;
        for (col, tok) in tokens {
            if let Some(num) = tok.strip_prefix("size=") {
                if size_bits.is_some() {
                    return Err(err(line_no, col, "duplicate size operand"));
                }
                let n: u64 = num
                    .parse()
                    .map_err(|_| err(line_no, col, format!("malformed size `{tok}`")))?;
                if n == 0 {
                    return Err(err(line_no, col, "size must be positive"));
                }
                size_bits = Some(n);
            } else {
                if size_bits.is_some() {
                    return Err(err(line_no, col, "row operand after size"));
                }
                rows.push(parse_row(tok).map_err(|m| err(line_no, col, m))?);
            }
        }
        let size_bits =
            size_bits.ok_or_else(|| err(line_no, 1, "missing size operand"))?;
        if rows.len() != ty.row_count() {
            return Err(err(
                line_no,
                1,
                format!(
                    "AAP{} takes {} row operands, got {}",
                    ty.number(),
                    ty.row_count(),
                    rows.len()
                ),
            ));
        }
        instructions.push(AapInstruction { ty, rows, size_bits });
    }
    Ok(Program { instructions })
}

fn err(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        message: message.into(),
    }
}

fn tokenize(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        // Offset of this token within the line, 1-based.
        let col = tok.as_ptr() as usize - line.as_ptr() as usize + 1;
        (col, tok)
    })
}

/// Parses one row operand in the assembly syntax (`d7`, `x1`, `dcc2`,
/// `ctrl0`, optionally prefixed `b<bank>.s<sub>.`). Used by the assembler
/// and by host-side row bindings.
pub fn parse_row(tok: &str) -> Result<RowSpec, String> {
    let mut place = None;
    let mut rest = tok;
    if let Some(after_bank) = rest.strip_prefix('b') {
        if let Some(dot) = after_bank.find('.') {
            if after_bank[..dot].chars().all(|c| c.is_ascii_digit()) && dot > 0 {
                let bank: usize = after_bank[..dot].parse().map_err(|_| bad(tok))?;
                let after = &after_bank[dot + 1..];
                let sub_part = after.strip_prefix('s').ok_or_else(|| bad(tok))?;
                let dot2 = sub_part.find('.').ok_or_else(|| bad(tok))?;
                let sub: usize = sub_part[..dot2].parse().map_err(|_| bad(tok))?;
                place = Some((bank, sub));
                rest = &sub_part[dot2 + 1..];
            }
        }
    }
    let name = if rest == "ctrl0" {
        RowName::Ctrl0
    } else if rest == "ctrl1" {
        RowName::Ctrl1
    } else if let Some(n) = rest.strip_prefix("dcc") {
        let n: usize = n.parse().map_err(|_| bad(tok))?;
        RowName::Row(RowKind::from_dcc_wordline(n).ok_or_else(|| bad(tok))?)
    } else if let Some(n) = rest.strip_prefix('x') {
        let n: usize = n.parse().map_err(|_| bad(tok))?;
        if n == 0 {
            return Err(bad(tok));
        }
        RowName::Row(RowKind::X(n))
    } else if let Some(n) = rest.strip_prefix('d') {
        let n: usize = n.parse().map_err(|_| bad(tok))?;
        RowName::Row(RowKind::Data(n))
    } else {
        return Err(bad(tok));
    };
    Ok(RowSpec { place, name })
}

fn bad(tok: &str) -> String {
    format!("malformed row name `{tok}`")
}

/// Checks a program against a geometry. An empty result means executable.
pub fn validate(program: &Program, g: &Geometry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |instr: usize, message: String| out.push(Diagnostic { instr, message });

    let program_size = program.instructions.first().map(|i| i.size_bits);
    for (idx, instr) in program.instructions.iter().enumerate() {
        let cols = g.cols_per_row as u64;
        if instr.size_bits % cols != 0 {
            push(idx, format!(
                "size not multiple of row width ({} vs {cols})",
                instr.size_bits
            ));
            continue;
        }
        if Some(instr.size_bits) != program_size {
            push(idx, format!(
                "size disagreement: {} here, {} at instruction 0",
                instr.size_bits,
                program_size.unwrap()
            ));
        }
        let stripes = (instr.size_bits / cols) as usize;

        // Placement: explicit prefixes must agree; bounds-check them.
        let mut place = None;
        for row in &instr.rows {
            if let Some(p) = row.place {
                if p.0 >= g.banks || p.1 >= g.subarrays_per_bank {
                    push(idx, format!("placement b{}.s{} out of range", p.0, p.1));
                }
                match place {
                    None => place = Some(p),
                    Some(prev) if prev != p => {
                        push(idx, format!(
                            "rows span sub-arrays: b{}.s{} and b{}.s{}",
                            prev.0, prev.1, p.0, p.1
                        ));
                    }
                    _ => {}
                }
            }
        }

        // Row ranges, including the striped extent of data rows.
        for row in &instr.rows {
            match row.name {
                RowName::Row(RowKind::Data(i)) => {
                    let is_dest = !instr.sources().contains(row);
                    let limit = if is_dest {
                        g.usable_data_rows()
                    } else {
                        g.data_rows
                    };
                    if i + stripes > limit {
                        if is_dest
                            && i + stripes <= g.data_rows
                        {
                            push(idx, format!("constant row used as destination ({row})"));
                        } else {
                            push(idx, format!(
                                "data rows d{i}..d{} out of range (limit {limit})",
                                i + stripes - 1
                            ));
                        }
                    }
                }
                RowName::Row(k) if !k.in_bounds(g) => {
                    push(idx, format!("row {row} out of range"));
                }
                _ => {}
            }
        }
        if instr
            .destinations()
            .iter()
            .any(|r| matches!(r.name, RowName::Ctrl0 | RowName::Ctrl1))
        {
            push(idx, "constant row used as destination".into());
        }

        // Decoder constraints on multi-row activation.
        let sources = instr.sources();
        if sources.len() >= 2 {
            for row in sources {
                if !row.is_compute() {
                    push(idx, format!("multi-activation of data rows ({row})"));
                }
            }
            for (i, row) in sources.iter().enumerate() {
                if sources[..i].contains(row) {
                    push(idx, format!("duplicate source row {row}"));
                }
                if let Some(cell) = row.dcc_cell() {
                    if sources[..i].iter().any(|o| o.dcc_cell() == Some(cell)) {
                        push(idx, format!("DCC wordline conflict on cell {cell}"));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g() -> Geometry {
        Geometry::default()
    }

    #[test]
    fn parses_the_basic_shapes() {
        let p = parse("AAP3 x1 x2 d7 size=256").unwrap();
        assert_eq!(p.instructions.len(), 1);
        let i = &p.instructions[0];
        assert_eq!(i.ty, AapType::Type3);
        assert_eq!(i.rows, vec![RowSpec::x(1), RowSpec::x(2), RowSpec::data(7)]);
        assert_eq!(i.size_bits, 256);

        let p = parse("AAP4 x1 x2 x3 d9 size=256").unwrap();
        assert_eq!(p.instructions[0].ty, AapType::Type4);
        assert_eq!(p.instructions[0].sources().len(), 3);
    }

    #[test]
    fn parses_prefixes_labels_and_comments() {
        let text = "\
# whole-line comment
start: AAP1 b2.s3.d7 x1 size=512  # trailing comment

AAP1 ctrl0 d0 size=512
";
        let p = parse(text).unwrap();
        assert_eq!(p.instructions.len(), 2);
        assert_eq!(p.instructions[0].rows[0], RowSpec::data(7).at(2, 3));
        assert_eq!(p.instructions[1].rows[0].name, RowName::Ctrl0);
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse("AAP9 d0 x1 size=256").unwrap_err();
        assert!(e.message.contains("unknown mnemonic"));
        assert_eq!((e.line, e.col), (1, 1));

        let e = parse("AAP1 d0 size=256").unwrap_err();
        assert!(e.message.contains("takes 2 row operands"));

        let e = parse("AAP1 d0 q7 size=256").unwrap_err();
        assert!(e.message.contains("malformed row name"));
        assert_eq!(e.col, 9);

        let e = parse("AAP1 d0 x1 size=0").unwrap_err();
        assert!(e.message.contains("size must be positive"));

        let e = parse("AAP1 d0 x1").unwrap_err();
        assert!(e.message.contains("missing size"));

        let e = parse("AAP1 d0 dcc0 size=256").unwrap_err();
        assert!(e.message.contains("malformed row name"));
    }

    #[test]
    fn size_multiple_is_checked_against_geometry() {
        let p = parse("AAP1 d3 x1 size=100").unwrap();
        let diags = validate(&p, &g());
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("size not multiple of row width"));
    }

    #[test]
    fn decoder_rules() {
        let p = parse("AAP3 d1 d2 x1 size=256").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("multi-activation of data rows")));

        let p = parse("AAP3 dcc1 dcc2 d1 size=256").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("DCC wordline conflict")));

        let p = parse("AAP3 x1 x1 d1 size=256").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("duplicate source")));
    }

    #[test]
    fn table_isa_xnor_sequence_is_clean() {
        let text = "\
AAP1 d0 x1 size=256
AAP1 d1 x2 size=256
AAP3 x1 x2 d2 size=256
";
        let p = parse(text).unwrap();
        assert!(validate(&p, &g()).is_empty());
    }

    #[test]
    fn constant_rows_cannot_be_destinations() {
        let p = parse("AAP1 d0 ctrl1 size=256").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("constant row used as destination")));

        // Same protection for the raw index of a constant row.
        let p = parse("AAP1 d0 d499 size=256").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("constant row used as destination")));
    }

    #[test]
    fn striping_capacity_and_agreement() {
        // 4 stripes from d497 run past the usable data rows.
        let p = parse("AAP1 d497 x1 size=1024").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("out of range")));

        let p = parse("AAP1 d0 x1 size=256\nAAP1 d1 x2 size=512").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("size disagreement")));
    }

    #[test]
    fn placement_disagreement_is_flagged() {
        let p = parse("AAP3 b0.s1.x1 b0.s2.x2 d0 size=256").unwrap();
        let diags = validate(&p, &g());
        assert!(diags.iter().any(|d| d.message.contains("span sub-arrays")));
        assert!(validate(&parse("AAP3 b0.s1.x1 x2 b0.s1.d0 size=256").unwrap(), &g()).is_empty());
    }

    fn arb_rowspec() -> impl Strategy<Value = RowSpec> {
        let name = prop_oneof![
            (0usize..500).prop_map(|i| RowName::Row(RowKind::Data(i))),
            (1usize..=8).prop_map(|n| RowName::Row(RowKind::X(n))),
            (1usize..=4).prop_map(|n| RowName::Row(RowKind::from_dcc_wordline(n).unwrap())),
            Just(RowName::Ctrl0),
            Just(RowName::Ctrl1),
        ];
        let place = prop_oneof![
            Just(None),
            ((0usize..8), (0usize..64)).prop_map(Some),
        ];
        (place, name).prop_map(|(place, name)| RowSpec { place, name })
    }

    fn arb_instruction() -> impl Strategy<Value = AapInstruction> {
        let ty = prop_oneof![
            Just(AapType::Type1),
            Just(AapType::Type2),
            Just(AapType::Type3),
            Just(AapType::Type4),
        ];
        (ty, proptest::collection::vec(arb_rowspec(), 4), 1u64..50)
            .prop_map(|(ty, rows, k)| AapInstruction {
                ty,
                rows: rows[..ty.row_count()].to_vec(),
                size_bits: k * 256,
            })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(instrs in proptest::collection::vec(arb_instruction(), 0..20)) {
            let program = Program { instructions: instrs };
            let back = parse(&program.render()).unwrap();
            prop_assert_eq!(program, back);
        }
    }
}
