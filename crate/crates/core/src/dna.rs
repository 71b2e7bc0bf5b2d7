//! Nucleotide helpers shared by the graph, k-mer and alignment code.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid base `{base}` at position {position}")]
pub struct DnaError {
    pub base: char,
    pub position: usize,
}

/// Watson-Crick complement; `N` maps to itself. `None` outside `ACGTN`.
#[inline]
pub fn complement(base: u8) -> Option<u8> {
    match base {
        b'A' => Some(b'T'),
        b'C' => Some(b'G'),
        b'G' => Some(b'C'),
        b'T' => Some(b'A'),
        b'N' => Some(b'N'),
        _ => None,
    }
}

/// Reverse complement of an upper-case `ACGTN` string.
pub fn reverse_complement(seq: &str) -> Result<String, DnaError> {
    let bytes = reverse_complement_bytes(seq.as_bytes())?;
    // Only ASCII bases are produced.
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn reverse_complement_bytes(seq: &[u8]) -> Result<Vec<u8>, DnaError> {
    let mut out = Vec::with_capacity(seq.len());
    for (i, &b) in seq.iter().enumerate().rev() {
        out.push(complement(b).ok_or(DnaError {
            base: b as char,
            position: i,
        })?);
    }
    Ok(out)
}

/// 2-bit code for `ACGT`, `None` for anything else.
#[inline]
pub fn base_code(base: u8) -> Option<u8> {
    match base {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

pub const BASES: [u8; 4] = *b"ACGT";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_complement_examples() {
        assert_eq!(reverse_complement("ACGT").unwrap(), "ACGT");
        assert_eq!(reverse_complement("AACG").unwrap(), "CGTT");
        assert_eq!(reverse_complement("N").unwrap(), "N");
        assert_eq!(reverse_complement("").unwrap(), "");
        let err = reverse_complement("ACXG").unwrap_err();
        assert_eq!(err, DnaError { base: 'X', position: 2 });
    }
}
