//! GFA v1 reading and writing.
//!
//! Only the record types needed for annotated pangenome graphs are
//! interpreted:
//!
//! - **H** header lines, kept verbatim
//! - **S** segments, with their optional tags (`KC:i`, `SC:i`, `dc:f`, ...)
//! - **L** links, with their optional tags (`EC:i`, ...)
//!
//! Any other record (comments, `P`, `W`, ...) is kept verbatim so that a
//! parse/write cycle does not lose information. Tags are stored in a sorted
//! map, so written documents always list tags alphabetically.
//!
//! GAF-style oriented path strings (`>s1<s2>s3`) are handled by
//! [`OrientedPath`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Header emitted for documents that carry no header line of their own.
pub const DEFAULT_HEADER: &str = "H\tVN:Z:1.0";

/// Strand of a node visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Forward,
    #[serde(rename = "-")]
    Reverse,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }

    /// `0` for forward, `1` for reverse.
    pub fn index(self) -> usize {
        match self {
            Orientation::Forward => 0,
            Orientation::Reverse => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Orientation::Forward
        } else {
            Orientation::Reverse
        }
    }

    /// The GFA link character (`+` / `-`).
    pub fn as_char(self) -> char {
        match self {
            Orientation::Forward => '+',
            Orientation::Reverse => '-',
        }
    }

    /// The GAF path character (`>` / `<`).
    pub fn as_path_char(self) -> char {
        match self {
            Orientation::Forward => '>',
            Orientation::Reverse => '<',
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Value of an optional `XX:t:value` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TagValue {
    Int(i64),
    Float(f64),
    /// `Z` strings.
    Str(String),
    /// Any other GFA type (`A`, `J`, `H`, `B`), kept as raw text.
    Other(char, String),
}

impl TagValue {
    pub fn type_char(&self) -> char {
        match self {
            TagValue::Int(_) => 'i',
            TagValue::Float(_) => 'f',
            TagValue::Str(_) => 'Z',
            TagValue::Other(c, _) => *c,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            TagValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            TagValue::Float(v) => Some(*v),
            TagValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl fmt::Display for TagValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagValue::Int(v) => write!(f, "i:{v}"),
            TagValue::Float(v) => write!(f, "f:{v}"),
            TagValue::Str(v) => write!(f, "Z:{v}"),
            TagValue::Other(c, v) => write!(f, "{c}:{v}"),
        }
    }
}

/// Optional fields keyed by their two-character name.
pub type Tags = BTreeMap<String, TagValue>;

/// An `S` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfaSegment {
    pub id: String,
    /// Upper-case DNA; `None` when the file wrote `*`.
    pub sequence: Option<String>,
    pub tags: Tags,
}

impl GfaSegment {
    pub fn new(id: impl Into<String>, sequence: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            sequence: Some(sequence.into()),
            tags: Tags::new(),
        }
    }

    pub fn kmer_count(&self) -> Option<i64> {
        self.tags.get("KC").and_then(TagValue::as_int)
    }

    pub fn sequence_count(&self) -> Option<i64> {
        self.tags.get("SC").and_then(TagValue::as_int)
    }

    /// Fraction of k-mers observed (`dc:f`).
    pub fn depth_fraction(&self) -> Option<f64> {
        self.tags.get("dc").and_then(TagValue::as_float)
    }
}

/// An `L` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfaLink {
    pub from_id: String,
    pub from_orient: Orientation,
    pub to_id: String,
    pub to_orient: Orientation,
    /// Overlap CIGAR, stored verbatim.
    pub overlap: String,
    pub tags: Tags,
}

impl GfaLink {
    pub fn edge_count(&self) -> Option<i64> {
        self.tags.get("EC").and_then(TagValue::as_int)
    }
}

/// A parsed GFA v1 document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfaDocument {
    /// Header lines, verbatim (including the leading `H\t`).
    pub headers: Vec<String>,
    pub segments: Vec<GfaSegment>,
    pub links: Vec<GfaLink>,
    /// Comments and uninterpreted records, verbatim.
    pub other: Vec<String>,
}

impl Default for GfaDocument {
    fn default() -> Self {
        Self {
            headers: vec![DEFAULT_HEADER.to_string()],
            segments: Vec::new(),
            links: Vec::new(),
            other: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GfaErrorKind {
    MissingField(&'static str),
    BadOrientation(String),
    MalformedTag(String),
    DuplicateSegment(String),
    DanglingLink(String),
    InvalidBase(char),
    EmptyId,
}

impl fmt::Display for GfaErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GfaErrorKind::MissingField(name) => write!(f, "missing field `{name}`"),
            GfaErrorKind::BadOrientation(s) => write!(f, "orientation must be + or -, got `{s}`"),
            GfaErrorKind::MalformedTag(s) => write!(f, "malformed tag `{s}`"),
            GfaErrorKind::DuplicateSegment(id) => write!(f, "duplicate segment id `{id}`"),
            GfaErrorKind::DanglingLink(id) => write!(f, "link endpoint `{id}` is not a segment"),
            GfaErrorKind::InvalidBase(c) => write!(f, "invalid base `{c}` in sequence"),
            GfaErrorKind::EmptyId => write!(f, "empty segment id"),
        }
    }
}

/// Parse failure with 1-based line and column of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("GFA line {line}, column {column}: {kind}")]
pub struct GfaError {
    pub line: usize,
    pub column: usize,
    pub kind: GfaErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathStringError {
    #[error("empty path string")]
    Empty,
    #[error("node id at offset {0} has no preceding orientation character")]
    MissingOrientation(usize),
    #[error("orientation character at offset {0} is not followed by a node id")]
    MissingId(usize),
}

/// Tab-split fields of one line, with their 1-based start columns.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut col = 1;
    for f in line.split('\t') {
        out.push((col, f));
        col += f.len() + 1;
    }
    out
}

fn parse_orientation(s: &str) -> Option<Orientation> {
    match s {
        "+" => Some(Orientation::Forward),
        "-" => Some(Orientation::Reverse),
        _ => None,
    }
}

fn parse_tag(raw: &str) -> Result<(String, TagValue), GfaErrorKind> {
    let bad = || GfaErrorKind::MalformedTag(raw.to_string());
    let mut parts = raw.splitn(3, ':');
    let name = parts.next().ok_or_else(bad)?;
    let ty = parts.next().ok_or_else(bad)?;
    let value = parts.next().ok_or_else(bad)?;
    let nb = name.as_bytes();
    if nb.len() != 2 || !nb[0].is_ascii_alphabetic() || !nb[1].is_ascii_alphanumeric() {
        return Err(bad());
    }
    let value = match ty {
        "i" => TagValue::Int(value.parse().map_err(|_| bad())?),
        "f" => {
            let v: f64 = value.parse().map_err(|_| bad())?;
            TagValue::Float(v)
        }
        "Z" => TagValue::Str(value.to_string()),
        "A" if value.chars().count() == 1 => TagValue::Other('A', value.to_string()),
        "J" | "H" | "B" => TagValue::Other(ty.chars().next().unwrap(), value.to_string()),
        _ => return Err(bad()),
    };
    Ok((name.to_string(), value))
}

fn parse_tags(fs: &[(usize, &str)], line: usize) -> Result<Tags, GfaError> {
    let mut tags = Tags::new();
    for &(column, raw) in fs {
        let (name, value) = parse_tag(raw).map_err(|kind| GfaError { line, column, kind })?;
        tags.insert(name, value);
    }
    Ok(tags)
}

/// Upper-cases and checks a sequence against the `ACGTN` alphabet.
fn normalise_sequence(raw: &str) -> Result<String, char> {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        let u = c.to_ascii_uppercase();
        match u {
            'A' | 'C' | 'G' | 'T' | 'N' => out.push(u),
            _ => return Err(c),
        }
    }
    Ok(out)
}

/// Parses GFA v1 text.
pub fn parse_gfa(text: &str) -> Result<GfaDocument, GfaError> {
    let mut doc = GfaDocument {
        headers: Vec::new(),
        segments: Vec::new(),
        links: Vec::new(),
        other: Vec::new(),
    };
    let mut seen: HashSet<String> = HashSet::new();
    // Links are resolved after all segments are known; S may follow L.
    let mut pending: Vec<(usize, usize, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.is_empty() {
            continue;
        }
        let fs = fields(line);
        let err = |column: usize, kind: GfaErrorKind| GfaError {
            line: line_no,
            column,
            kind,
        };
        match fs[0].1 {
            "H" => doc.headers.push(line.to_string()),
            "S" => {
                let &(id_col, id) = fs
                    .get(1)
                    .ok_or_else(|| err(line.len() + 1, GfaErrorKind::MissingField("id")))?;
                let &(seq_col, seq) = fs
                    .get(2)
                    .ok_or_else(|| err(line.len() + 1, GfaErrorKind::MissingField("sequence")))?;
                if id.is_empty() {
                    return Err(err(id_col, GfaErrorKind::EmptyId));
                }
                if !seen.insert(id.to_string()) {
                    return Err(err(id_col, GfaErrorKind::DuplicateSegment(id.to_string())));
                }
                let sequence = if seq == "*" {
                    None
                } else if seq.is_empty() {
                    return Err(err(seq_col, GfaErrorKind::MissingField("sequence")));
                } else {
                    Some(normalise_sequence(seq).map_err(|c| err(seq_col, GfaErrorKind::InvalidBase(c)))?)
                };
                let tags = parse_tags(&fs[3..], line_no)?;
                doc.segments.push(GfaSegment {
                    id: id.to_string(),
                    sequence,
                    tags,
                });
            }
            "L" => {
                if fs.len() < 6 {
                    let names = ["from", "from_orient", "to", "to_orient", "overlap"];
                    return Err(err(line.len() + 1, GfaErrorKind::MissingField(names[fs.len() - 1])));
                }
                let from_orient = parse_orientation(fs[2].1)
                    .ok_or_else(|| err(fs[2].0, GfaErrorKind::BadOrientation(fs[2].1.to_string())))?;
                let to_orient = parse_orientation(fs[4].1)
                    .ok_or_else(|| err(fs[4].0, GfaErrorKind::BadOrientation(fs[4].1.to_string())))?;
                let tags = parse_tags(&fs[6..], line_no)?;
                pending.push((doc.links.len(), line_no, fs[1].0));
                pending.push((doc.links.len(), line_no, fs[3].0));
                doc.links.push(GfaLink {
                    from_id: fs[1].1.to_string(),
                    from_orient,
                    to_id: fs[3].1.to_string(),
                    to_orient,
                    overlap: fs[5].1.to_string(),
                    tags,
                });
            }
            _ => doc.other.push(line.to_string()),
        }
    }

    for (link_idx, line, column) in pending {
        let link = &doc.links[link_idx];
        for id in [&link.from_id, &link.to_id] {
            if !seen.contains(id.as_str()) {
                return Err(GfaError {
                    line,
                    column,
                    kind: GfaErrorKind::DanglingLink(id.clone()),
                });
            }
        }
    }

    if doc.headers.is_empty() {
        doc.headers.push(DEFAULT_HEADER.to_string());
    }
    Ok(doc)
}

fn write_tags(out: &mut String, tags: &Tags) {
    for (name, value) in tags {
        out.push('\t');
        out.push_str(name);
        out.push(':');
        out.push_str(&value.to_string());
    }
}

/// Serialises a document. Headers come first, then segments, links, and any
/// uninterpreted lines, each group in its original order.
pub fn write_gfa(doc: &GfaDocument) -> String {
    let mut out = String::new();
    if doc.headers.is_empty() {
        out.push_str(DEFAULT_HEADER);
        out.push('\n');
    }
    for h in &doc.headers {
        out.push_str(h);
        out.push('\n');
    }
    for s in &doc.segments {
        out.push_str("S\t");
        out.push_str(&s.id);
        out.push('\t');
        out.push_str(s.sequence.as_deref().unwrap_or("*"));
        write_tags(&mut out, &s.tags);
        out.push('\n');
    }
    for l in &doc.links {
        out.push_str(&format!(
            "L\t{}\t{}\t{}\t{}\t{}",
            l.from_id, l.from_orient, l.to_id, l.to_orient, l.overlap
        ));
        write_tags(&mut out, &l.tags);
        out.push('\n');
    }
    for o in &doc.other {
        out.push_str(o);
        out.push('\n');
    }
    out
}

/// A GAF-style oriented path such as `>s1<s2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedPath {
    pub steps: Vec<(String, Orientation)>,
}

impl OrientedPath {
    pub fn new(steps: Vec<(String, Orientation)>) -> Self {
        Self { steps }
    }
}

impl fmt::Display for OrientedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, o) in &self.steps {
            write!(f, "{}{}", o.as_path_char(), id)?;
        }
        Ok(())
    }
}

impl FromStr for OrientedPath {
    type Err = PathStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_path_string(s)
    }
}

/// Parses `>a<b>c` into oriented steps.
pub fn parse_path_string(s: &str) -> Result<OrientedPath, PathStringError> {
    if s.is_empty() {
        return Err(PathStringError::Empty);
    }
    let mut steps = Vec::new();
    let mut current: Option<(usize, Orientation, String)> = None;
    for (offset, c) in s.char_indices() {
        let orient = match c {
            '>' => Some(Orientation::Forward),
            '<' => Some(Orientation::Reverse),
            _ => None,
        };
        match (orient, current.as_mut()) {
            (Some(o), _) => {
                if let Some((start, prev, id)) = current.take() {
                    if id.is_empty() {
                        return Err(PathStringError::MissingId(start));
                    }
                    steps.push((id, prev));
                }
                current = Some((offset, o, String::new()));
            }
            (None, Some((_, _, id))) => id.push(c),
            (None, None) => return Err(PathStringError::MissingOrientation(offset)),
        }
    }
    if let Some((start, o, id)) = current {
        if id.is_empty() {
            return Err(PathStringError::MissingId(start));
        }
        steps.push((id, o));
    }
    Ok(OrientedPath { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_with_kmer_count() {
        let doc = parse_gfa("S\ts1\tACGT\tKC:i:8").unwrap();
        assert_eq!(doc.segments.len(), 1);
        assert_eq!(doc.segments[0].kmer_count(), Some(8));
        assert_eq!(doc.segments[0].sequence.as_deref(), Some("ACGT"));
    }

    #[test]
    fn link_with_edge_count() {
        let doc = parse_gfa("S\ts1\tA\nS\ts2\tC\nL\ts1\t+\ts2\t-\t0M\tEC:i:3").unwrap();
        assert_eq!(doc.links.len(), 1);
        let l = &doc.links[0];
        assert_eq!(l.edge_count(), Some(3));
        assert_eq!(l.from_orient, Orientation::Forward);
        assert_eq!(l.to_orient, Orientation::Reverse);
    }

    #[test]
    fn dangling_link_names_missing_segment() {
        let err = parse_gfa("S\ts1\tA\nL\ts1\t+\tsX\t-\t0M").unwrap_err();
        assert_eq!(err.kind, GfaErrorKind::DanglingLink("sX".into()));
        assert_eq!(err.line, 2);
        assert!(err.to_string().contains("sX"));
    }

    #[test]
    fn link_may_precede_its_segments() {
        let doc = parse_gfa("L\ta\t+\tb\t+\t0M\nS\ta\tA\nS\tb\tC\n").unwrap();
        assert_eq!(doc.links.len(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let e = parse_gfa("S\ts1\tACGT\tKC:x:8").unwrap_err();
        assert!(matches!(e.kind, GfaErrorKind::MalformedTag(_)));
        assert_eq!(e.column, 11);
        let e = parse_gfa("S\ts1\tACGT\tKC:i:eight").unwrap_err();
        assert!(matches!(e.kind, GfaErrorKind::MalformedTag(_)));
        let e = parse_gfa("S\ts1\tACGT\t1C:i:8").unwrap_err();
        assert!(matches!(e.kind, GfaErrorKind::MalformedTag(_)));
        let e = parse_gfa("S\ts1\tA\nS\ts1\tC").unwrap_err();
        assert_eq!(e.kind, GfaErrorKind::DuplicateSegment("s1".into()));
        assert_eq!(e.line, 2);
        let e = parse_gfa("S\ts1\tACXT").unwrap_err();
        assert_eq!(e.kind, GfaErrorKind::InvalidBase('X'));
        assert_eq!(e.column, 6);
        let e = parse_gfa("S\ts1\tA\nL\ts1\t*\ts1\t+\t0M").unwrap_err();
        assert!(matches!(e.kind, GfaErrorKind::BadOrientation(_)));
    }

    #[test]
    fn lowercase_is_uppercased_and_star_kept() {
        let doc = parse_gfa("S\ts1\tacgn\nS\ts2\t*\tLN:i:5").unwrap();
        assert_eq!(doc.segments[0].sequence.as_deref(), Some("ACGN"));
        assert_eq!(doc.segments[1].sequence, None);
        assert!(write_gfa(&doc).contains("S\ts2\t*\tLN:i:5"));
    }

    #[test]
    fn empty_document_writes_header_only() {
        assert_eq!(write_gfa(&GfaDocument::default()), "H\tVN:Z:1.0\n");
        assert_eq!(parse_gfa("").unwrap(), GfaDocument::default());
    }

    #[test]
    fn tags_are_written_alphabetically() {
        let doc = parse_gfa("S\ts1\tACGT\tSC:i:5\tKC:i:2").unwrap();
        assert!(write_gfa(&doc).contains("S\ts1\tACGT\tKC:i:2\tSC:i:5\n"));
    }

    #[test]
    fn other_records_survive() {
        let text = "H\tVN:Z:1.0\n# comment\nS\ta\tA\tdc:f:0.5\nP\tp1\ta+\t*\n";
        let doc = parse_gfa(text).unwrap();
        assert_eq!(doc.other, vec!["# comment".to_string(), "P\tp1\ta+\t*".to_string()]);
        assert_eq!(doc.segments[0].depth_fraction(), Some(0.5));
        assert_eq!(parse_gfa(&write_gfa(&doc)).unwrap(), doc);
    }

    #[test]
    fn path_strings() {
        let p = parse_path_string(">s1<s2").unwrap();
        assert_eq!(
            p.steps,
            vec![
                ("s1".to_string(), Orientation::Forward),
                ("s2".to_string(), Orientation::Reverse)
            ]
        );
        assert_eq!(p.to_string(), ">s1<s2");
        assert_eq!(
            parse_path_string(">a").unwrap().steps,
            vec![("a".to_string(), Orientation::Forward)]
        );
        assert_eq!(parse_path_string("s1>s2"), Err(PathStringError::MissingOrientation(0)));
        assert_eq!(parse_path_string(""), Err(PathStringError::Empty));
        assert_eq!(parse_path_string(">a<"), Err(PathStringError::MissingId(2)));
    }
}
