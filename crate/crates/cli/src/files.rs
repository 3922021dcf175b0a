//! Vector file I/O: raw bit-packed binary (row-major, LSB-first within
//! each byte), or hex text for hand-written fixtures when the path ends in
//! `.hex` (whitespace-insensitive hex byte pairs, same byte order).

use std::fs;
use std::path::Path;

use drim_core::bits::BitRow;

fn is_hex(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "hex")
}

pub fn read_bits(path: &Path) -> Result<BitRow, String> {
    let bytes = if is_hex(path) {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let digits: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if !digits.len().is_multiple_of(2) {
            return Err(format!("{}: odd number of hex digits", path.display()));
        }
        (0..digits.len() / 2)
            .map(|i| {
                u8::from_str_radix(&digits[2 * i..2 * i + 2], 16)
                    .map_err(|_| format!("{}: invalid hex at byte {i}", path.display()))
            })
            .collect::<Result<Vec<u8>, _>>()?
    } else {
        fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?
    };
    if bytes.is_empty() {
        return Err(format!("{}: empty input", path.display()));
    }
    Ok(BitRow::from_bytes(bytes.len() * 8, &bytes))
}

pub fn write_bits(path: &Path, bits: &BitRow) -> Result<(), String> {
    let bytes = bits.to_bytes();
    if is_hex(path) {
        let mut out = String::with_capacity(bytes.len() * 2 + bytes.len() / 32 + 1);
        for (i, b) in bytes.iter().enumerate() {
            out.push_str(&format!("{b:02x}"));
            if (i + 1) % 32 == 0 {
                out.push('\n');
            }
        }
        if !out.ends_with('\n') {
            out.push('\n');
        }
        fs::write(path, out)
    } else {
        fs::write(path, &bytes)
    }
    .map_err(|e| format!("cannot write {}: {e}", path.display()))
}
