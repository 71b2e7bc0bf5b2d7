//! Alignment of assembled contigs against a known genome, and the summary
//! metrics reported for an assembly.
//!
//! The aligner is a small seed-chain-extend design: k-mers that occur once in
//! the truth seed anchors, anchors are chained co-linearly per strand, chain
//! gaps and ends are filled with banded affine-gap alignment, and poorly
//! scoring stretches are cut out with an X-drop rule.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dna::{base_code, reverse_complement_bytes};
use crate::gfa::Orientation;

pub const DEFAULT_SEED_K: usize = 31;
pub const MATCH: i32 = 1;
pub const MISMATCH: i32 = -2;
pub const GAP_OPEN: i32 = -4;
pub const GAP_EXTEND: i32 = -1;
pub const BAND: usize = 64;
pub const MIN_SEGMENT_LEN: usize = 50;
pub const MIN_INDEL_LEN: usize = 10;
pub const DIFF_WINDOW: usize = 100;
pub const DIFF_MIN_COLUMNS: usize = 30;
const CHAIN_LOOKBACK: usize = 64;
const MAX_CHAIN_GAP: usize = 20_000;
const X_DROP: i32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlignOp {
    Match,
    Mismatch,
    /// A candidate base absent from the truth.
    Insertion,
    /// A truth base absent from the candidate.
    Deletion,
}

impl AlignOp {
    fn symbol(self) -> char {
        match self {
            AlignOp::Match => '=',
            AlignOp::Mismatch => 'X',
            AlignOp::Insertion => 'I',
            AlignOp::Deletion => 'D',
        }
    }

    fn consumes_truth(self) -> bool {
        self != AlignOp::Insertion
    }

    fn consumes_candidate(self) -> bool {
        self != AlignOp::Deletion
    }
}

/// One local alignment between a truth interval and a candidate interval.
///
/// Candidate coordinates refer to the candidate as given; on the reverse
/// strand the operations read the truth forwards against the reverse
/// complement of `candidate[cs..ce]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentSegment {
    pub ts: usize,
    pub te: usize,
    pub cs: usize,
    pub ce: usize,
    pub strand: Orientation,
    pub score: i64,
    pub matches: usize,
    pub mismatches: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub ops: Vec<AlignOp>,
}

impl AlignmentSegment {
    fn from_ops(ts: usize, cs: usize, ops: Vec<AlignOp>, strand: Orientation, cand_len: usize) -> Self {
        let count = |op| ops.iter().filter(|&&o| o == op).count();
        let (matches, mismatches, insertions, deletions) = (
            count(AlignOp::Match),
            count(AlignOp::Mismatch),
            count(AlignOp::Insertion),
            count(AlignOp::Deletion),
        );
        let te = ts + matches + mismatches + deletions;
        let ce = cs + matches + mismatches + insertions;
        let (cs, ce) = match strand {
            Orientation::Forward => (cs, ce),
            Orientation::Reverse => (cand_len - ce, cand_len - cs),
        };
        AlignmentSegment {
            ts,
            te,
            cs,
            ce,
            strand,
            score: ops_score(&ops),
            matches,
            mismatches,
            insertions,
            deletions,
            ops,
        }
    }

    pub fn columns(&self) -> usize {
        self.ops.len()
    }

    /// Run-length encoded operations using `=`, `X`, `I` and `D`.
    pub fn cigar(&self) -> String {
        let mut s = String::new();
        let mut i = 0;
        while i < self.ops.len() {
            let j = run_end(&self.ops, i);
            s.push_str(&format!("{}{}", j - i, self.ops[i].symbol()));
            i = j;
        }
        s
    }

    /// Lengths of insertion and deletion runs.
    pub fn gap_runs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.ops.len() {
            let j = run_end(&self.ops, i);
            if matches!(self.ops[i], AlignOp::Insertion | AlignOp::Deletion) {
                out.push(j - i);
            }
            i = j;
        }
        out
    }

    /// Maximal runs of overlapping 100-column windows holding at least 30
    /// non-matching columns.
    pub fn diff_regions(&self) -> usize {
        let n = self.ops.len();
        if n < DIFF_WINDOW {
            return 0;
        }
        let bad: Vec<usize> = self.ops.iter().map(|&o| usize::from(o != AlignOp::Match)).collect();
        let mut in_window: usize = bad[..DIFF_WINDOW].iter().sum();
        let mut regions = 0;
        let mut last_hit_end: Option<usize> = None;
        for start in 0..=n - DIFF_WINDOW {
            if start > 0 {
                in_window = in_window + bad[start + DIFF_WINDOW - 1] - bad[start - 1];
            }
            if in_window >= DIFF_MIN_COLUMNS {
                if last_hit_end.is_none_or(|end| start >= end) {
                    regions += 1;
                }
                last_hit_end = Some(start + DIFF_WINDOW);
            }
        }
        regions
    }
}

fn run_end(ops: &[AlignOp], i: usize) -> usize {
    let mut j = i;
    while j < ops.len() && ops[j] == ops[i] {
        j += 1;
    }
    j
}

fn op_scores(ops: &[AlignOp]) -> Vec<i32> {
    let mut out = Vec::with_capacity(ops.len());
    for (i, &op) in ops.iter().enumerate() {
        out.push(match op {
            AlignOp::Match => MATCH,
            AlignOp::Mismatch => MISMATCH,
            _ if i > 0 && ops[i - 1] == op => GAP_EXTEND,
            _ => GAP_OPEN + GAP_EXTEND,
        });
    }
    out
}

fn ops_score(ops: &[AlignOp]) -> i64 {
    op_scores(ops).iter().map(|&s| s as i64).sum()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Global,
    /// Anchored at the start, free to stop anywhere.
    Extend,
}

const NEG: i32 = i32::MIN / 4;

/// Banded Gotoh alignment of `t` against `c`. Returns the operations and
/// the number of truth and candidate bases they consume.
fn banded_align(t: &[u8], c: &[u8], band: usize, mode: Mode) -> (Vec<AlignOp>, usize, usize) {
    let (lt, lc) = (t.len() as isize, c.len() as isize);
    let band = band as isize;
    let (lo, hi) = match mode {
        Mode::Global => ((lc - lt).min(0) - band, (lc - lt).max(0) + band),
        Mode::Extend => (-band, band),
    };
    let w = (hi - lo + 1) as usize;
    let rows = (lt + 1) as usize;
    // Traceback bits: 0-1 H source (0 diag, 1 E, 2 F), 2 E extends, 3 F extends.
    let mut tb = vec![0u8; rows * w];
    let mut h_prev = vec![NEG; w];
    let mut f_prev = vec![NEG; w];
    let mut h_cur = vec![NEG; w];
    let mut e_cur = vec![NEG; w];
    let mut f_cur = vec![NEG; w];
    let open = GAP_OPEN + GAP_EXTEND;
    let mut best = (0i32, 0usize, 0usize);
    for i in 0..rows {
        h_cur.fill(NEG);
        e_cur.fill(NEG);
        f_cur.fill(NEG);
        let jmin = (i as isize + lo).max(0);
        let jmax = (i as isize + hi).min(lc);
        let mut j = jmin;
        while j <= jmax {
            let d = (j - i as isize - lo) as usize;
            let ju = j as usize;
            let mut bits = 0u8;
            let h;
            if i == 0 && ju == 0 {
                h = 0;
            } else {
                // E: gap consuming candidate, from (i, j-1), same row, d-1.
                let e = if ju > 0 && d > 0 {
                    let o = h_cur[d - 1].saturating_add(open);
                    let x = e_cur[d - 1].saturating_add(GAP_EXTEND);
                    if x > o {
                        bits |= 4;
                        x
                    } else {
                        o
                    }
                } else {
                    NEG
                };
                // F: gap consuming truth, from (i-1, j), previous row, d+1.
                let f = if i > 0 && d + 1 < w {
                    let o = h_prev[d + 1].saturating_add(open);
                    let x = f_prev[d + 1].saturating_add(GAP_EXTEND);
                    if x > o {
                        bits |= 8;
                        x
                    } else {
                        o
                    }
                } else {
                    NEG
                };
                let diag = if i > 0 && ju > 0 {
                    let s = if t[i - 1] == c[ju - 1] && t[i - 1] != b'N' {
                        MATCH
                    } else {
                        MISMATCH
                    };
                    h_prev[d].saturating_add(s)
                } else {
                    NEG
                };
                let mut best_h = diag;
                if e > best_h {
                    best_h = e;
                    bits = (bits & !3) | 1;
                }
                if f > best_h {
                    best_h = f;
                    bits = (bits & !3) | 2;
                }
                e_cur[d] = e;
                f_cur[d] = f;
                h = best_h;
            }
            h_cur[d] = h;
            tb[i * w + d] = bits;
            if mode == Mode::Extend && h > best.0 {
                best = (h, i, ju);
            }
            j += 1;
        }
        std::mem::swap(&mut h_prev, &mut h_cur);
        std::mem::swap(&mut f_prev, &mut f_cur);
    }
    let (mut i, mut j) = match mode {
        Mode::Global => (lt as usize, lc as usize),
        Mode::Extend => (best.1, best.2),
    };
    let end = (i, j);
    let mut ops = Vec::new();
    // 0 = in H, 1 = in E, 2 = in F.
    let mut state = 0u8;
    while i > 0 || j > 0 {
        let d = (j as isize - i as isize - lo) as usize;
        let bits = tb[i * w + d];
        match state {
            0 => match bits & 3 {
                0 => {
                    ops.push(if t[i - 1] == c[j - 1] && t[i - 1] != b'N' {
                        AlignOp::Match
                    } else {
                        AlignOp::Mismatch
                    });
                    i -= 1;
                    j -= 1;
                }
                1 => state = 1,
                _ => state = 2,
            },
            1 => {
                ops.push(AlignOp::Insertion);
                if bits & 4 == 0 {
                    state = 0;
                }
                j -= 1;
            }
            _ => {
                ops.push(AlignOp::Deletion);
                if bits & 8 == 0 {
                    state = 0;
                }
                i -= 1;
            }
        }
    }
    ops.reverse();
    (ops, end.0, end.1)
}

#[derive(Debug, Clone, Copy)]
struct Anchor {
    t: usize,
    c: usize,
}

/// Canonical k-mers occurring exactly once in `truth`, with their position
/// and whether the forward k-mer is the canonical one.
struct UniqueIndex {
    k: usize,
    map: HashMap<u64, (usize, bool)>,
}

fn kmer_walk(seq: &[u8], k: usize, mut f: impl FnMut(usize, u64, u64)) {
    let mask = if k == 32 { u64::MAX } else { (1u64 << (2 * k)) - 1 };
    let shift = 2 * (k - 1);
    let (mut fwd, mut rev, mut valid) = (0u64, 0u64, 0usize);
    for (i, &b) in seq.iter().enumerate() {
        match base_code(b) {
            Some(x) => {
                let x = x as u64;
                fwd = ((fwd << 2) | x) & mask;
                rev = (rev >> 2) | ((3 - x) << shift);
                valid += 1;
            }
            None => valid = 0,
        }
        if valid >= k {
            f(i + 1 - k, fwd, rev);
        }
    }
}

impl UniqueIndex {
    fn build(truth: &[u8], k: usize) -> Self {
        let mut map: HashMap<u64, (usize, bool)> = HashMap::new();
        let mut repeated = Vec::new();
        kmer_walk(truth, k, |pos, fwd, rev| {
            let canon = fwd.min(rev);
            if map.insert(canon, (pos, fwd <= rev)).is_some() {
                repeated.push(canon);
            }
        });
        for r in repeated {
            map.remove(&r);
        }
        Self { k, map }
    }

    fn anchors(&self, cand: &[u8]) -> Vec<Anchor> {
        let mut out = Vec::new();
        kmer_walk(cand, self.k, |c, fwd, rev| {
            if fwd == rev {
                return;
            }
            if let Some(&(t, truth_fwd)) = self.map.get(&fwd.min(rev)) {
                if truth_fwd == (fwd < rev) {
                    out.push(Anchor { t, c });
                }
            }
        });
        out
    }
}

fn gap_cost(dd: usize, k: usize) -> f64 {
    if dd == 0 {
        0.0
    } else {
        0.01 * k as f64 * dd as f64 + 0.5 * (dd as f64).log2()
    }
}

/// Co-linear chains of anchors (sorted by candidate position), best first.
fn chain_anchors(anchors: &[Anchor], k: usize) -> Vec<Vec<Anchor>> {
    let n = anchors.len();
    let mut score = vec![0f64; n];
    let mut parent = vec![usize::MAX; n];
    for j in 0..n {
        score[j] = k as f64;
        let a = anchors[j];
        for i in (j.saturating_sub(CHAIN_LOOKBACK)..j).rev() {
            let b = anchors[i];
            if b.t >= a.t || b.c >= a.c {
                continue;
            }
            let (dt, dc) = (a.t - b.t, a.c - b.c);
            let dd = dt.abs_diff(dc);
            if dd > BAND || dt.max(dc) > MAX_CHAIN_GAP {
                continue;
            }
            let s = score[i] + dt.min(dc).min(k) as f64 - gap_cost(dd, k);
            if s > score[j] {
                score[j] = s;
                parent[j] = i;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let mut used = vec![false; n];
    let mut chains = Vec::new();
    for end in order {
        if used[end] {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = end;
        loop {
            used[cur] = true;
            chain.push(anchors[cur]);
            let p = parent[cur];
            if p == usize::MAX || used[p] {
                break;
            }
            cur = p;
        }
        chain.reverse();
        chains.push(chain);
    }
    chains
}

/// Full alignment along a chain: left extension, exact blocks joined by
/// banded global gap alignments, right extension. Returns the start
/// coordinates and the operations.
fn align_chain(t: &[u8], c: &[u8], chain: &[Anchor], k: usize) -> (usize, usize, Vec<AlignOp>) {
    // Exact-match blocks [ts, te) x [cs, ce) on one diagonal.
    let mut blocks: Vec<(usize, usize, usize, usize)> = Vec::new();
    for a in chain {
        let (mut ts, mut cs) = (a.t, a.c);
        let (te, ce) = (a.t + k, a.c + k);
        if let Some(last) = blocks.last_mut() {
            if last.0 as isize - last.2 as isize == ts as isize - cs as isize && ts <= last.1 {
                last.1 = last.1.max(te);
                last.3 = last.3.max(ce);
                continue;
            }
            let skip = last.1.saturating_sub(ts).max(last.3.saturating_sub(cs));
            if skip >= k {
                continue;
            }
            ts += skip;
            cs += skip;
        }
        blocks.push((ts, te, cs, ce));
    }
    let first = blocks[0];
    let last = *blocks.last().expect("non-empty chain");

    // Left extension on reversed prefixes.
    let tl = first.0.min(first.2 + BAND);
    let cl = first.2.min(first.0 + BAND);
    let tr: Vec<u8> = t[first.0 - tl..first.0].iter().rev().copied().collect();
    let cr: Vec<u8> = c[first.2 - cl..first.2].iter().rev().copied().collect();
    let (mut left, lt_used, lc_used) = banded_align(&tr, &cr, BAND, Mode::Extend);
    left.reverse();
    let mut ops = left;
    for (bi, b) in blocks.iter().enumerate() {
        if bi > 0 {
            let p = blocks[bi - 1];
            let tg = &t[p.1..b.0];
            let cg = &c[p.3..b.2];
            let (g, _, _) = banded_align(tg, cg, BAND, Mode::Global);
            ops.extend(g);
        }
        for i in 0..b.1 - b.0 {
            ops.push(if t[b.0 + i] == c[b.2 + i] {
                AlignOp::Match
            } else {
                AlignOp::Mismatch
            });
        }
    }
    let tl2 = (t.len() - last.1).min(c.len() - last.3 + BAND);
    let cl2 = (c.len() - last.3).min(t.len() - last.1 + BAND);
    let (right, _, _) = banded_align(&t[last.1..last.1 + tl2], &c[last.3..last.3 + cl2], BAND, Mode::Extend);
    ops.extend(right);
    (first.0 - lt_used, first.2 - lc_used, ops)
}

/// Maximal-scoring pieces of an alignment, cut wherever the running score
/// falls more than the X-drop below its best.
fn split_by_xdrop(ops: &[AlignOp]) -> Vec<(usize, usize)> {
    let scores = op_scores(ops);
    let n = ops.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let (mut cur, mut best) = (0i32, 0i32);
        let (mut start, mut best_end) = (i, i);
        let mut j = i;
        while j < n {
            cur += scores[j];
            j += 1;
            if best == 0 && cur <= 0 {
                cur = 0;
                start = j;
                best_end = j;
                continue;
            }
            if cur > best {
                best = cur;
                best_end = j;
            }
            if best - cur > X_DROP {
                break;
            }
        }
        if best > 0 {
            out.push((start, best_end));
        }
        i = if best > 0 { best_end } else { j };
    }
    out
}

/// Aligns `candidate` to `truth`, returning non-overlapping segments (on the
/// candidate) in decreasing score order, each with at least 50 aligned
/// columns of match or mismatch.
pub fn align(truth: &str, candidate: &str, seed_k: usize) -> Vec<AlignmentSegment> {
    let t = truth.as_bytes();
    if t.is_empty() || candidate.is_empty() || seed_k == 0 || seed_k > 32 {
        return Vec::new();
    }
    let index = UniqueIndex::build(t, seed_k);
    align_with_index(&index, t, candidate.as_bytes())
}

fn align_with_index(index: &UniqueIndex, t: &[u8], cand: &[u8]) -> Vec<AlignmentSegment> {
    let k = index.k;
    let rc = reverse_complement_bytes(cand).unwrap_or_else(|_| {
        cand.iter()
            .rev()
            .map(|&b| crate::dna::complement(b).unwrap_or(b'N'))
            .collect()
    });
    let mut all = Vec::new();
    for (strand, seq) in [(Orientation::Forward, cand), (Orientation::Reverse, rc.as_slice())] {
        let anchors = index.anchors(seq);
        for chain in chain_anchors(&anchors, k) {
            let (ts0, cs0, ops) = align_chain(t, seq, &chain, k);
            for (a, b) in split_by_xdrop(&ops) {
                let (mut ts, mut cs) = (ts0, cs0);
                for &o in &ops[..a] {
                    ts += usize::from(o.consumes_truth());
                    cs += usize::from(o.consumes_candidate());
                }
                let seg = AlignmentSegment::from_ops(ts, cs, ops[a..b].to_vec(), strand, cand.len());
                if seg.matches + seg.mismatches >= MIN_SEGMENT_LEN {
                    all.push(seg);
                }
            }
        }
    }
    all.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(a.ts.cmp(&b.ts))
            .then(a.te.cmp(&b.te))
            .then(b.matches.cmp(&a.matches))
            .then(a.ops.cmp(&b.ops))
    });
    let mut kept: Vec<AlignmentSegment> = Vec::new();
    for s in all {
        let (mut lo, mut hi) = (s.cs, s.ce);
        let mut inside = false;
        for k in &kept {
            if k.ce <= lo || k.cs >= hi {
                continue;
            }
            if k.cs <= lo {
                lo = lo.max(k.ce);
            } else if k.ce >= hi {
                hi = hi.min(k.cs);
            } else {
                inside = true;
            }
        }
        if inside || lo >= hi {
            continue;
        }
        let s = if (lo, hi) == (s.cs, s.ce) {
            Some(s)
        } else {
            clip(&s, lo, hi, cand.len())
        };
        if let Some(s) = s.filter(|s| s.matches + s.mismatches >= MIN_SEGMENT_LEN) {
            kept.push(s);
        }
    }
    kept
}

/// The part of `s` aligned to candidate bases `[lo, hi)`, trimmed to start
/// and end on a match.
fn clip(s: &AlignmentSegment, lo: usize, hi: usize, cand_len: usize) -> Option<AlignmentSegment> {
    let (cs0, qlo, qhi) = match s.strand {
        Orientation::Forward => (s.cs, lo - s.cs, hi - s.cs),
        Orientation::Reverse => (cand_len - s.ce, s.ce - hi, s.ce - lo),
    };
    let (mut t, mut q) = (s.ts, 0usize);
    let mut keep: Option<(usize, usize, usize)> = None;
    let mut end = 0;
    for (i, &op) in s.ops.iter().enumerate() {
        if op == AlignOp::Match && q >= qlo && q < qhi {
            if keep.is_none() {
                keep = Some((i, t, q));
            }
            end = i + 1;
        }
        t += usize::from(op.consumes_truth());
        q += usize::from(op.consumes_candidate());
    }
    let (start, ts, qs) = keep?;
    Some(AlignmentSegment::from_ops(
        ts,
        cs0 + qs,
        s.ops[start..end].to_vec(),
        s.strand,
        cand_len,
    ))
}

/// The seven assembly metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pct_covered: f64,
    pub pct_used: f64,
    pub contigs: usize,
    pub breaks: usize,
    pub indels_ge10: usize,
    pub diff_regions: usize,
    pub pct_identity: f64,
}

impl EvalReport {
    pub const TSV_HEADER: &'static str = "Covered\tUsed\tContigs\tBreaks\tIndel\tDiff\tIdentity";

    pub fn perfect(contigs: usize) -> Self {
        EvalReport {
            pct_covered: 100.0,
            pct_used: 100.0,
            contigs,
            breaks: 0,
            indels_ge10: 0,
            diff_regions: 0,
            pct_identity: 100.0,
        }
    }

    pub fn to_tsv_row(&self) -> String {
        format!(
            "{:.2}\t{:.2}\t{}\t{}\t{}\t{}\t{:.2}",
            self.pct_covered,
            self.pct_used,
            self.contigs,
            self.breaks,
            self.indels_ge10,
            self.diff_regions,
            self.pct_identity
        )
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\n{}\n", Self::TSV_HEADER, self.to_tsv_row())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_tsv_row())
    }
}

fn union_length(mut intervals: Vec<(usize, usize)>) -> usize {
    intervals.sort_unstable();
    let mut total = 0;
    let mut cur: Option<(usize, usize)> = None;
    for (a, b) in intervals {
        match cur {
            Some((s, e)) if a <= e => cur = Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    total + cur.map_or(0, |(s, e)| e - s)
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Metrics from per-contig segments. `contig_lengths[i]` is the length of
/// the contig whose alignments are `segments[i]`.
pub fn evaluate_segments(truth_len: usize, contig_lengths: &[usize], segments: &[Vec<AlignmentSegment>]) -> EvalReport {
    let covered = union_length(segments.iter().flatten().map(|s| (s.ts, s.te)).collect());
    let used: usize = segments
        .iter()
        .map(|segs| union_length(segs.iter().map(|s| (s.cs, s.ce)).collect()))
        .sum();
    let total_cand: usize = contig_lengths.iter().sum();
    let breaks = segments.iter().map(|s| s.len().saturating_sub(1)).sum();
    let all = || segments.iter().flatten();
    let indels = all().flat_map(|s| s.gap_runs()).filter(|&r| r >= MIN_INDEL_LEN).count();
    let diffs = all().map(|s| s.diff_regions()).sum();
    let m: usize = all().map(|s| s.matches).sum();
    let cols: usize = all().map(|s| s.columns()).sum();
    EvalReport {
        pct_covered: percent(covered, truth_len),
        pct_used: percent(used, total_cand),
        contigs: contig_lengths.len(),
        breaks,
        indels_ge10: indels,
        diff_regions: diffs,
        pct_identity: percent(m, cols),
    }
}

/// Aligns each contig to `truth` and summarises.
pub fn evaluate(truth: &str, contigs: &[String], seed_k: usize) -> EvalReport {
    let t = truth.as_bytes();
    let segments: Vec<Vec<AlignmentSegment>> = if t.is_empty() || seed_k == 0 || seed_k > 32 {
        vec![Vec::new(); contigs.len()]
    } else {
        let index = UniqueIndex::build(t, seed_k);
        contigs
            .par_iter()
            .map(|c| {
                if c.is_empty() {
                    Vec::new()
                } else {
                    align_with_index(&index, t, c.as_bytes())
                }
            })
            .collect()
    };
    let lengths: Vec<usize> = contigs.iter().map(|c| c.len()).collect();
    evaluate_segments(t.len(), &lengths, &segments)
}
