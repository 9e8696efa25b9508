//! Sobol' generating matrices from an embedded direction-number table.
//!
//! Table format, one line per dimension `d >= 2`: `d a m_1 ... m_k`, where `k` is the degree
//! of the primitive polynomial, `a` encodes its inner coefficients and `m_i` are the odd
//! initial direction integers. Lines starting with `#` are comments. Dimension 1 is the
//! identity matrix and has no line.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf::{GfMatrix, PrimeBase};

const TABLE: &str = include_str!("../../data/sobol_dirnums_50.txt");

/// Number of dimensions available from the embedded table.
pub const SOBOL_MAX_DIM: usize = 50;

struct DirectionEntry {
    a: u64,
    initial: Vec<u64>,
}

fn parse_table(text: &str, wanted: usize) -> Result<Vec<DirectionEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if out.len() + 1 >= wanted {
            break;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|_| Error::MalformedTable(lineno + 1)))
            .collect::<Result<Vec<_>>>()?;
        if fields.len() < 3 || fields[0] as usize != out.len() + 2 {
            return Err(Error::MalformedTable(lineno + 1));
        }
        let initial = fields[2..].to_vec();
        for (i, &m) in initial.iter().enumerate() {
            if m % 2 == 0 || m >= 1 << (i + 1) {
                return Err(Error::MalformedTable(lineno + 1));
            }
        }
        out.push(DirectionEntry { a: fields[1], initial });
    }
    Ok(out)
}

fn direction_integers(entry: &DirectionEntry, count: usize) -> Vec<u64> {
    let deg = entry.initial.len();
    let mut mv: Vec<u64> = entry.initial.iter().copied().take(count).collect();
    for i in deg..count {
        let mut next = mv[i - deg] ^ (mv[i - deg] << deg);
        for k in 1..deg {
            if (entry.a >> (deg - 1 - k)) & 1 == 1 {
                next ^= mv[i - k] << k;
            }
        }
        mv.push(next);
    }
    mv
}

/// The first `s` Sobol' matrices in base 2, each `precision x m`.
///
/// Column `i` (1-based) holds the binary digits of `m_i / 2^i`, so it has at most `i` nonzero
/// rows and rows below `m` are zero.
pub fn sobol_matrices(m: usize, s: usize, precision: usize) -> Result<Vec<GfMatrix>> {
    if s > SOBOL_MAX_DIM {
        return Err(Error::SobolTableExceeded { requested: s, available: SOBOL_MAX_DIM });
    }
    if m == 0 || m > precision || m > 63 {
        return Err(Error::InvalidDesign("need 1 <= m <= min(E, 63)"));
    }
    let base = PrimeBase::new(2)?;
    let table = parse_table(TABLE, s)?;
    let mut out = Vec::with_capacity(s);
    for j in 0..s {
        let mv: Vec<u64> = if j == 0 { alloc::vec![1; m] } else { direction_integers(&table[j - 1], m) };
        let mut c = GfMatrix::zeros(base, precision, m);
        for (col, &mi) in mv.iter().enumerate() {
            let width = col + 1;
            for row in 0..width {
                c.set(row, col, ((mi >> (width - 1 - row)) & 1) as u8);
            }
        }
        out.push(c);
    }
    Ok(out)
}

/// SHA-256 of the embedded direction-number table, lowercase hex.
pub fn sobol_table_checksum() -> String {
    let digest = Sha256::digest(TABLE.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}
