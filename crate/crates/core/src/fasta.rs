//! Minimal FASTA reading and writing.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub id: String,
    pub description: Option<String>,
    pub sequence: String,
}

impl FastaRecord {
    pub fn new(id: impl Into<String>, sequence: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            description: None,
            sequence: sequence.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FastaError {
    #[error("line {0}: sequence data before the first header")]
    NoHeader(usize),
    #[error("line {0}: empty record id")]
    EmptyId(usize),
}

/// Parses FASTA text. Sequences are upper-cased and whitespace inside
/// sequence lines is dropped.
pub fn parse_fasta(text: &str) -> Result<Vec<FastaRecord>, FastaError> {
    let mut out: Vec<FastaRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            let mut parts = header.splitn(2, char::is_whitespace);
            let id = parts.next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(FastaError::EmptyId(i + 1));
            }
            let description = parts.next().map(|d| d.trim().to_string()).filter(|d| !d.is_empty());
            out.push(FastaRecord {
                id,
                description,
                sequence: String::new(),
            });
        } else if !line.trim().is_empty() {
            let rec = out.last_mut().ok_or(FastaError::NoHeader(i + 1))?;
            rec.sequence.extend(
                line.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| c.to_ascii_uppercase()),
            );
        }
    }
    Ok(out)
}

/// Writes records with sequence lines wrapped at `width` (no wrapping when 0).
pub fn write_fasta(records: &[FastaRecord], width: usize) -> String {
    let mut s = String::new();
    for r in records {
        match &r.description {
            Some(d) => {
                let _ = writeln!(s, ">{} {}", r.id, d);
            }
            None => {
                let _ = writeln!(s, ">{}", r.id);
            }
        }
        if width == 0 {
            let _ = writeln!(s, "{}", r.sequence);
        } else {
            for chunk in r.sequence.as_bytes().chunks(width) {
                s.push_str(std::str::from_utf8(chunk).expect("ascii sequence"));
                s.push('\n');
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let recs = vec![
            FastaRecord::new("a", "ACGTACGTAC"),
            FastaRecord {
                id: "b".into(),
                description: Some("second one".into()),
                sequence: "GG".into(),
            },
            FastaRecord::new("empty", ""),
        ];
        let text = write_fasta(&recs, 4);
        assert!(text.starts_with(">a\nACGT\nACGT\nAC\n>b second one\nGG\n"));
        assert_eq!(parse_fasta(&text).unwrap(), recs);
    }

    #[test]
    fn errors_and_normalisation() {
        assert_eq!(parse_fasta("ACGT\n"), Err(FastaError::NoHeader(1)));
        assert_eq!(parse_fasta(">\nAC\n"), Err(FastaError::EmptyId(1)));
        let r = parse_fasta(">x\nac gt\n\nnn\n").unwrap();
        assert_eq!(r[0].sequence, "ACGTNN");
    }
}
