//! Synthetic genome populations and short-read simulation.
//!
//! A founder genome is a uniform random base string decorated with short
//! tandem repeats, copy-number changes, repeat-element insertions,
//! translocations, inversions and point mutations. Every later member copies
//! one member of an earlier generation and applies the same event types at
//! lower rates. Each genome keeps the exact edit log that turns its parent
//! into it, so lineages can be replayed.
//!
//! All randomness comes from ChaCha streams keyed by `(seed, genome, event
//! type)`, so results do not depend on iteration order or platform.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dna::{complement, reverse_complement_bytes, BASES};
use crate::gfa::Orientation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("rate `{name}` = {value} is outside [0, 1]")]
    BadRate { name: &'static str, value: f64 },
    #[error("descendant rate `{0}` exceeds the founder rate")]
    DescendantRateTooHigh(&'static str),
    #[error("population_size must be at least 2 and generations at least 1")]
    BadShape,
    #[error("founder length {length} cannot host `{event}` events of up to {needed} bp")]
    FounderTooShort {
        length: usize,
        event: &'static str,
        needed: usize,
    },
    #[error("read length {read_length} exceeds genome length {genome_length}")]
    ReadTooLong { read_length: usize, genome_length: usize },
    #[error("coverage must be positive and error rate in [0, 1)")]
    BadReadParams,
    #[error("event {index} cannot be applied: {reason}")]
    Replay { index: usize, reason: String },
}

/// Per-base probabilities of each event type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationRates {
    pub point: f64,
    pub str_change: f64,
    pub cnv: f64,
    pub repeat_short: f64,
    pub repeat_long: f64,
    pub translocation: f64,
    pub inversion: f64,
}

impl MutationRates {
    pub const ZERO: MutationRates = MutationRates {
        point: 0.0,
        str_change: 0.0,
        cnv: 0.0,
        repeat_short: 0.0,
        repeat_long: 0.0,
        translocation: 0.0,
        inversion: 0.0,
    };

    fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("point", self.point),
            ("str_change", self.str_change),
            ("cnv", self.cnv),
            ("repeat_short", self.repeat_short),
            ("repeat_long", self.repeat_long),
            ("translocation", self.translocation),
            ("inversion", self.inversion),
        ]
    }
}

impl Default for MutationRates {
    fn default() -> Self {
        MutationRates {
            point: 1e-3,
            str_change: 2e-4,
            cnv: 1e-4,
            repeat_short: 2e-4,
            repeat_long: 2e-5,
            translocation: 5e-5,
            inversion: 5e-5,
        }
    }
}

/// Inclusive size ranges, in bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventSizes {
    pub str_unit: (usize, usize),
    pub repeat_short: (usize, usize),
    pub repeat_long: (usize, usize),
    /// Also used for translocated and inverted segments.
    pub cnv: (usize, usize),
}

impl Default for EventSizes {
    fn default() -> Self {
        EventSizes {
            str_unit: (2, 6),
            repeat_short: (50, 500),
            repeat_long: (2_000, 10_000),
            cnv: (100, 5_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationConfig {
    pub founder: MutationRates,
    pub descendant: MutationRates,
    pub sizes: EventSizes,
    pub generations: usize,
    pub population_size: usize,
}

impl Default for MutationConfig {
    fn default() -> Self {
        let founder = MutationRates::default();
        let scale = |r: f64| r / 10.0;
        MutationConfig {
            founder,
            descendant: MutationRates {
                point: founder.point / 2.0,
                str_change: scale(founder.str_change),
                cnv: scale(founder.cnv),
                repeat_short: scale(founder.repeat_short),
                repeat_long: scale(founder.repeat_long),
                translocation: scale(founder.translocation),
                inversion: scale(founder.inversion),
            },
            sizes: EventSizes::default(),
            generations: 10,
            population_size: 100,
        }
    }
}

impl MutationConfig {
    /// Every rate zero; a population of identical genomes.
    pub fn zero(population_size: usize, generations: usize) -> Self {
        MutationConfig {
            founder: MutationRates::ZERO,
            descendant: MutationRates::ZERO,
            sizes: EventSizes::default(),
            generations,
            population_size,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.population_size < 2 || self.generations < 1 {
            return Err(SynthError::BadShape);
        }
        for ((name, f), (_, d)) in self.founder.named().into_iter().zip(self.descendant.named()) {
            for value in [f, d] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(SynthError::BadRate { name, value });
                }
            }
            if d > f {
                return Err(SynthError::DescendantRateTooHigh(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Origin,
    StrExpansion,
    StrContraction,
    CnvDuplication,
    CnvDeletion,
    ShortRepeat,
    LongRepeat,
    Translocation,
    Inversion,
    Point,
}

/// A concrete edit with all coordinates resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Substitute {
        pos: usize,
        base: char,
    },
    Insert {
        pos: usize,
        seq: String,
    },
    Delete {
        pos: usize,
        len: usize,
    },
    /// Reverse-complements `[start, end)` in place.
    Invert {
        start: usize,
        end: usize,
    },
    /// Cuts `[start, end)` and re-inserts it at `dest` of the shortened sequence.
    Translocate {
        start: usize,
        end: usize,
        dest: usize,
    },
}

impl EditOp {
    pub fn apply(&self, seq: &mut Vec<u8>) -> Result<(), String> {
        let n = seq.len();
        match self {
            EditOp::Substitute { pos, base } => {
                let slot = seq
                    .get_mut(*pos)
                    .ok_or_else(|| format!("substitution at {pos} beyond {n}"))?;
                *slot = *base as u8;
            }
            EditOp::Insert { pos, seq: ins } => {
                if *pos > n {
                    return Err(format!("insertion at {pos} beyond {n}"));
                }
                seq.splice(*pos..*pos, ins.bytes());
            }
            EditOp::Delete { pos, len } => {
                if pos + len > n {
                    return Err(format!("deletion [{pos}, {}) beyond {n}", pos + len));
                }
                seq.drain(*pos..pos + len);
            }
            EditOp::Invert { start, end } => {
                if start > end || *end > n {
                    return Err(format!("inversion [{start}, {end}) beyond {n}"));
                }
                let rc = reverse_complement_bytes(&seq[*start..*end]).map_err(|e| e.to_string())?;
                seq[*start..*end].copy_from_slice(&rc);
            }
            EditOp::Translocate { start, end, dest } => {
                if start > end || *end > n || *dest > n - (end - start) {
                    return Err(format!("translocation [{start}, {end}) -> {dest} beyond {n}"));
                }
                let segment: Vec<u8> = seq.drain(*start..*end).collect();
                seq.splice(*dest..*dest, segment);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationEvent {
    pub kind: EventKind,
    #[serde(flatten)]
    pub op: EditOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genome {
    pub id: String,
    pub sequence: String,
    /// `None` for the founder, whose log starts from the empty sequence.
    pub parent: Option<String>,
    pub events: Vec<MutationEvent>,
}

/// Applies `events` in order to `parent`.
pub fn replay(parent: &str, events: &[MutationEvent]) -> Result<String, SynthError> {
    let mut seq = parent.as_bytes().to_vec();
    for (index, e) in events.iter().enumerate() {
        e.op.apply(&mut seq)
            .map_err(|reason| SynthError::Replay { index, reason })?;
    }
    Ok(String::from_utf8(seq).expect("ascii"))
}

/// Stream selectors mixed into the RNG key.
mod stream {
    pub const PARENT: u64 = 1;
    pub const LIBRARY: u64 = 2;
    pub const ORIGIN: u64 = 3;
    pub const READS: u64 = 4;
    pub const EVENTS: u64 = 16;
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic RNG for `(seed, keys...)`.
pub fn keyed_rng(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for k in keys {
        h = splitmix(h ^ splitmix(*k));
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn random_bases(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| BASES[rng.random_range(0..4)]).collect()
}

fn draw(rng: &mut impl Rng, range: (usize, usize)) -> usize {
    rng.random_range(range.0..=range.1.max(range.0))
}

struct RepeatLibrary {
    short: Vec<String>,
    long: Vec<String>,
}

impl RepeatLibrary {
    fn new(cfg: &MutationConfig, seed: u64) -> Self {
        let mut rng = keyed_rng(seed, &[u64::MAX, stream::LIBRARY]);
        let mut make = |n: usize, range: (usize, usize)| -> Vec<String> {
            (0..n)
                .map(|_| {
                    let len = draw(&mut rng, range);
                    String::from_utf8(random_bases(&mut rng, len)).unwrap()
                })
                .collect()
        };
        RepeatLibrary {
            short: make(3, cfg.sizes.repeat_short),
            long: make(1, cfg.sizes.repeat_long),
        }
    }
}

/// Number of copies of the `unit`-long word at `pos` repeated back to back.
fn tandem_copies(seq: &[u8], pos: usize, unit: usize) -> usize {
    let word = &seq[pos..pos + unit];
    let mut copies = 1;
    while pos + (copies + 1) * unit <= seq.len() && &seq[pos + copies * unit..pos + (copies + 1) * unit] == word {
        copies += 1;
    }
    copies
}

fn event_count(rng: &mut impl Rng, len: usize, rate: f64) -> u64 {
    if rate <= 0.0 || len == 0 {
        return 0;
    }
    Binomial::new(len as u64, rate).map(|b| b.sample(rng)).unwrap_or(0)
}

/// Draws the events for one genome, applying each as it is drawn.
fn mutate(
    seq: &mut Vec<u8>,
    rates: &MutationRates,
    sizes: &EventSizes,
    library: &RepeatLibrary,
    seed: u64,
    genome_index: u64,
) -> Vec<MutationEvent> {
    let mut events = Vec::new();
    let mut push = |seq: &mut Vec<u8>, kind: EventKind, op: EditOp| {
        op.apply(seq).expect("generated edits are in range");
        events.push(MutationEvent { kind, op });
    };
    let rng_for = |k: u64| keyed_rng(seed, &[genome_index, stream::EVENTS + k]);

    // Short tandem repeats.
    let mut rng = rng_for(0);
    for _ in 0..event_count(&mut rng, seq.len(), rates.str_change) {
        let unit = draw(&mut rng, sizes.str_unit);
        if seq.len() < 4 * unit {
            break;
        }
        let pos = rng.random_range(0..=seq.len() - unit);
        let contract = rng.random_bool(0.5);
        let mut done = false;
        if contract {
            let stop = (pos + 2_000).min(seq.len() - unit);
            if let Some((j, u, copies)) = (pos..=stop)
                .flat_map(|j| (sizes.str_unit.0..=sizes.str_unit.1).map(move |u| (j, u)))
                .filter(|&(j, u)| j + u <= seq.len())
                .map(|(j, u)| (j, u, tandem_copies(seq, j, u)))
                .find(|&(_, _, c)| c >= 3)
            {
                let remove = rng.random_range(1..copies);
                push(
                    seq,
                    EventKind::StrContraction,
                    EditOp::Delete {
                        pos: j,
                        len: u * remove,
                    },
                );
                done = true;
            }
        }
        if !done {
            let copies = rng.random_range(2..=8);
            let word = String::from_utf8(seq[pos..pos + unit].to_vec()).unwrap();
            push(
                seq,
                EventKind::StrExpansion,
                EditOp::Insert {
                    pos,
                    seq: word.repeat(copies),
                },
            );
        }
    }

    // Copy-number variation.
    let mut rng = rng_for(1);
    for _ in 0..event_count(&mut rng, seq.len(), rates.cnv) {
        let len = draw(&mut rng, sizes.cnv).min(seq.len() / 3);
        if len == 0 {
            break;
        }
        let start = rng.random_range(0..=seq.len() - len);
        if rng.random_bool(0.5) {
            let copy = String::from_utf8(seq[start..start + len].to_vec()).unwrap();
            push(
                seq,
                EventKind::CnvDuplication,
                EditOp::Insert {
                    pos: start + len,
                    seq: copy,
                },
            );
        } else {
            push(seq, EventKind::CnvDeletion, EditOp::Delete { pos: start, len });
        }
    }

    // Repeat elements.
    for (k, rate, pool, kind) in [
        (2, rates.repeat_short, &library.short, EventKind::ShortRepeat),
        (3, rates.repeat_long, &library.long, EventKind::LongRepeat),
    ] {
        let mut rng = rng_for(k);
        for _ in 0..event_count(&mut rng, seq.len(), rate) {
            let element = pool.choose(&mut rng).expect("library is non-empty").clone();
            let pos = rng.random_range(0..=seq.len());
            push(seq, kind, EditOp::Insert { pos, seq: element });
        }
    }

    // Translocations and inversions.
    let mut rng = rng_for(4);
    for _ in 0..event_count(&mut rng, seq.len(), rates.translocation) {
        let len = draw(&mut rng, sizes.cnv).min(seq.len() / 3);
        if len == 0 {
            break;
        }
        let start = rng.random_range(0..=seq.len() - len);
        let dest = rng.random_range(0..=seq.len() - len);
        push(
            seq,
            EventKind::Translocation,
            EditOp::Translocate {
                start,
                end: start + len,
                dest,
            },
        );
    }
    let mut rng = rng_for(5);
    for _ in 0..event_count(&mut rng, seq.len(), rates.inversion) {
        let len = draw(&mut rng, sizes.cnv).min(seq.len() / 3);
        if len == 0 {
            break;
        }
        let start = rng.random_range(0..=seq.len() - len);
        push(
            seq,
            EventKind::Inversion,
            EditOp::Invert {
                start,
                end: start + len,
            },
        );
    }

    // Point substitutions.
    let mut rng = rng_for(6);
    for _ in 0..event_count(&mut rng, seq.len(), rates.point) {
        let pos = rng.random_range(0..seq.len());
        let old = seq[pos];
        let choices: Vec<u8> = BASES.iter().copied().filter(|&b| b != old).collect();
        let base = *choices.choose(&mut rng).unwrap() as char;
        push(seq, EventKind::Point, EditOp::Substitute { pos, base });
    }

    events
}

fn check_founder_length(cfg: &MutationConfig, founder_length: usize) -> Result<(), SynthError> {
    let s = &cfg.sizes;
    let r = &cfg.founder;
    let needs = [
        ("str_change", r.str_change, 4 * s.str_unit.1),
        ("cnv", r.cnv, 3 * s.cnv.0),
        ("translocation", r.translocation, 3 * s.cnv.0),
        ("inversion", r.inversion, 3 * s.cnv.0),
        ("repeat_short", r.repeat_short, s.repeat_short.1),
        ("repeat_long", r.repeat_long, s.repeat_long.1),
        ("point", r.point, 1),
    ];
    if founder_length == 0 {
        return Err(SynthError::FounderTooShort {
            length: 0,
            event: "origin",
            needed: 1,
        });
    }
    for (event, rate, needed) in needs {
        if rate > 0.0 && founder_length < needed {
            return Err(SynthError::FounderTooShort {
                length: founder_length,
                event,
                needed,
            });
        }
    }
    Ok(())
}

/// Generation of each member; the founder is generation 0.
fn generation_of(i: usize, cfg: &MutationConfig) -> usize {
    if i == 0 {
        0
    } else {
        1 + (i - 1) * cfg.generations / (cfg.population_size - 1)
    }
}

/// Builds a population of `cfg.population_size` genomes, `g0` ... `gN`.
pub fn generate_population(cfg: &MutationConfig, founder_length: usize, seed: u64) -> Result<Vec<Genome>, SynthError> {
    cfg.validate()?;
    check_founder_length(cfg, founder_length)?;
    let library = RepeatLibrary::new(cfg, seed);

    let mut rng = keyed_rng(seed, &[0, stream::ORIGIN]);
    let origin = random_bases(&mut rng, founder_length);
    let mut seq = Vec::new();
    let origin_event = MutationEvent {
        kind: EventKind::Origin,
        op: EditOp::Insert {
            pos: 0,
            seq: String::from_utf8(origin).unwrap(),
        },
    };
    origin_event.op.apply(&mut seq).unwrap();
    let mut events = vec![origin_event];
    events.extend(mutate(&mut seq, &cfg.founder, &cfg.sizes, &library, seed, 0));
    let mut population = vec![Genome {
        id: "g0".into(),
        sequence: String::from_utf8(seq).unwrap(),
        parent: None,
        events,
    }];

    for i in 1..cfg.population_size {
        let generation = generation_of(i, cfg);
        let eligible = (0..i).take_while(|&j| generation_of(j, cfg) < generation).count();
        let mut rng = keyed_rng(seed, &[i as u64, stream::PARENT]);
        let parent = &population[rng.random_range(0..eligible)];
        let mut seq = parent.sequence.clone().into_bytes();
        let events = mutate(&mut seq, &cfg.descendant, &cfg.sizes, &library, seed, i as u64);
        population.push(Genome {
            id: format!("g{i}"),
            sequence: String::from_utf8(seq).unwrap(),
            parent: Some(parent.id.clone()),
            events,
        });
    }
    Ok(population)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Read {
    pub id: String,
    pub sequence: String,
}

/// Where a simulated read came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadOrigin {
    pub start: usize,
    pub strand: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadSet {
    pub source: String,
    pub coverage: f64,
    pub error_rate: f64,
    pub read_length: usize,
    pub reads: Vec<Read>,
    /// Per-read origin; empty for reads loaded from files.
    #[serde(default)]
    pub origins: Vec<ReadOrigin>,
}

impl ReadSet {
    /// Wraps externally supplied reads.
    pub fn from_reads(source: impl Into<String>, reads: Vec<Read>) -> Self {
        let read_length = reads.iter().map(|r| r.sequence.len()).max().unwrap_or(0);
        ReadSet {
            source: source.into(),
            coverage: 0.0,
            error_rate: 0.0,
            read_length,
            reads,
            origins: Vec::new(),
        }
    }
}

/// Single-end reads with uniform starts, uniform strand and independent
/// substitution errors. Produces `ceil(coverage * len / read_length)` reads.
pub fn simulate_reads(
    genome: &Genome,
    coverage: f64,
    read_length: usize,
    error_rate: f64,
    seed: u64,
) -> Result<ReadSet, SynthError> {
    let seq = genome.sequence.as_bytes();
    if read_length == 0 || read_length > seq.len() {
        return Err(SynthError::ReadTooLong {
            read_length,
            genome_length: seq.len(),
        });
    }
    if !(coverage > 0.0 && coverage.is_finite()) || !(0.0..1.0).contains(&error_rate) {
        return Err(SynthError::BadReadParams);
    }
    let count = (coverage * seq.len() as f64 / read_length as f64).ceil() as usize;
    let mut rng = keyed_rng(seed, &[stream::READS]);
    let mut reads = Vec::with_capacity(count);
    let mut origins = Vec::with_capacity(count);
    for j in 0..count {
        let start = rng.random_range(0..=seq.len() - read_length);
        let strand = if rng.random_bool(0.5) {
            Orientation::Forward
        } else {
            Orientation::Reverse
        };
        let window = &seq[start..start + read_length];
        let mut read: Vec<u8> = match strand {
            Orientation::Forward => window.to_vec(),
            Orientation::Reverse => window.iter().rev().map(|&b| complement(b).unwrap_or(b'N')).collect(),
        };
        if error_rate > 0.0 {
            for b in read.iter_mut() {
                if rng.random_bool(error_rate) {
                    let old = *b;
                    let choices: Vec<u8> = BASES.iter().copied().filter(|&x| x != old).collect();
                    *b = *choices.choose(&mut rng).unwrap();
                }
            }
        }
        reads.push(Read {
            id: format!("{}_r{j}", genome.id),
            sequence: String::from_utf8(read).unwrap(),
        });
        origins.push(ReadOrigin { start, strand });
    }
    Ok(ReadSet {
        source: genome.id.clone(),
        coverage,
        error_rate,
        read_length,
        reads,
        origins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dna::reverse_complement;

    fn small_config() -> MutationConfig {
        MutationConfig {
            founder: MutationRates {
                point: 1e-3,
                str_change: 5e-4,
                cnv: 3e-4,
                repeat_short: 3e-4,
                repeat_long: 0.0,
                translocation: 2e-4,
                inversion: 2e-4,
            },
            descendant: MutationRates {
                point: 5e-4,
                str_change: 2e-4,
                cnv: 1e-4,
                repeat_short: 1e-4,
                repeat_long: 0.0,
                translocation: 1e-4,
                inversion: 1e-4,
            },
            sizes: EventSizes {
                cnv: (100, 800),
                ..EventSizes::default()
            },
            generations: 3,
            population_size: 8,
        }
    }

    #[test]
    fn zero_rates_give_identical_genomes() {
        let pop = generate_population(&MutationConfig::zero(3, 1), 500, 7).unwrap();
        assert_eq!(pop.len(), 3);
        assert!(pop.iter().all(|g| g.sequence == pop[0].sequence));
        let ids: Vec<_> = pop.iter().map(|g| g.id.as_str()).collect();
        assert_eq!(ids, ["g0", "g1", "g2"]);
        assert!(pop[1].events.is_empty());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = small_config();
        let a = generate_population(&cfg, 6_000, 11).unwrap();
        let b = generate_population(&cfg, 6_000, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_population(&cfg, 6_000, 12).unwrap();
        assert_ne!(a[0].sequence, c[0].sequence);
    }

    #[test]
    fn every_member_replays_from_its_parent() {
        let cfg = small_config();
        let pop = generate_population(&cfg, 6_000, 3).unwrap();
        assert_eq!(replay("", &pop[0].events).unwrap(), pop[0].sequence);
        for g in &pop[1..] {
            let parent = pop.iter().find(|p| Some(&p.id) == g.parent.as_ref()).unwrap();
            assert_eq!(replay(&parent.sequence, &g.events).unwrap(), g.sequence, "{}", g.id);
        }
        let kinds: std::collections::HashSet<_> = pop[0].events.iter().map(|e| e.kind).collect();
        assert!(kinds.len() >= 4, "founder events {kinds:?}");
    }

    #[test]
    fn parents_come_from_earlier_generations() {
        let cfg = small_config();
        let pop = generate_population(&cfg, 6_000, 5).unwrap();
        for (i, g) in pop.iter().enumerate().skip(1) {
            let p: usize = g.parent.as_ref().unwrap()[1..].parse().unwrap();
            assert!(generation_of(p, &cfg) < generation_of(i, &cfg));
        }
    }

    #[test]
    fn inversion_replays_exactly() {
        let parent = "AACCGGTTAC";
        let events = vec![MutationEvent {
            kind: EventKind::Inversion,
            op: EditOp::Invert { start: 2, end: 6 },
        }];
        // [2,6) = "CCGG", its reverse complement is "CCGG".
        assert_eq!(replay(parent, &events).unwrap(), "AACCGGTTAC");
        let events = vec![MutationEvent {
            kind: EventKind::Inversion,
            op: EditOp::Invert { start: 0, end: 3 },
        }];
        assert_eq!(replay(parent, &events).unwrap(), "GTTCGGTTAC");
        let t = EditOp::Translocate {
            start: 0,
            end: 2,
            dest: 8,
        };
        let mut s = parent.as_bytes().to_vec();
        t.apply(&mut s).unwrap();
        assert_eq!(s, b"CCGGTTACAA");
    }

    #[test]
    fn config_errors() {
        let mut cfg = small_config();
        cfg.descendant.cnv = 1.0;
        assert_eq!(cfg.validate(), Err(SynthError::DescendantRateTooHigh("cnv")));
        cfg.founder.cnv = 1.5;
        assert!(matches!(cfg.validate(), Err(SynthError::BadRate { .. })));
        let cfg = small_config();
        assert!(matches!(
            generate_population(&cfg, 400, 1),
            Err(SynthError::FounderTooShort { .. })
        ));
        assert_eq!(
            generate_population(&MutationConfig::zero(1, 1), 100, 1),
            Err(SynthError::BadShape)
        );
    }

    fn genome(seq: &str) -> Genome {
        Genome {
            id: "t".into(),
            sequence: seq.into(),
            parent: None,
            events: vec![],
        }
    }

    #[test]
    fn read_count_formula() {
        let pop = generate_population(&MutationConfig::zero(2, 1), 1000, 1).unwrap();
        let rs = simulate_reads(&pop[0], 30.0, 100, 0.0, 9).unwrap();
        assert_eq!(rs.reads.len(), 300);
        let rs = simulate_reads(&pop[0], 2.5, 300, 0.0, 9).unwrap();
        assert_eq!(rs.reads.len(), 9);
    }

    #[test]
    fn error_free_reads_are_substrings() {
        let pop = generate_population(&MutationConfig::zero(2, 1), 2000, 1).unwrap();
        let g = &pop[0];
        let rc = reverse_complement(&g.sequence).unwrap();
        let rs = simulate_reads(g, 5.0, 100, 0.0, 4).unwrap();
        let mut strands = [0, 0];
        for (r, o) in rs.reads.iter().zip(&rs.origins) {
            assert!(g.sequence.contains(&r.sequence) || rc.contains(&r.sequence));
            strands[o.strand.index()] += 1;
        }
        assert!(strands[0] > 0 && strands[1] > 0);
    }

    #[test]
    fn substitution_rate_is_binomial() {
        let pop = generate_population(&MutationConfig::zero(2, 1), 20_000, 2).unwrap();
        let g = &pop[0];
        let p = 0.01;
        let rs = simulate_reads(g, 10.0, 100, p, 8).unwrap();
        let mut bases = 0usize;
        let mut mismatches = 0usize;
        for (r, o) in rs.reads.iter().zip(&rs.origins) {
            let window = &g.sequence[o.start..o.start + 100];
            let truth = match o.strand {
                Orientation::Forward => window.to_string(),
                Orientation::Reverse => reverse_complement(window).unwrap(),
            };
            bases += 100;
            mismatches += r.sequence.bytes().zip(truth.bytes()).filter(|(a, b)| a != b).count();
        }
        assert!(bases >= 100_000);
        let mean = bases as f64 * p;
        let sigma = (bases as f64 * p * (1.0 - p)).sqrt();
        assert!(
            ((mismatches as f64) - mean).abs() <= 3.0 * sigma,
            "{mismatches} vs {mean}"
        );
    }

    #[test]
    fn error_free_coverage_is_close_to_requested() {
        let pop = generate_population(&MutationConfig::zero(2, 1), 10_000, 3).unwrap();
        let g = &pop[0];
        let rs = simulate_reads(g, 30.0, 150, 0.0, 5).unwrap();
        let mut depth = vec![0u32; g.sequence.len()];
        for o in &rs.origins {
            for d in &mut depth[o.start..o.start + 150] {
                *d += 1;
            }
        }
        let mean = depth.iter().map(|&d| d as f64).sum::<f64>() / depth.len() as f64;
        assert!((mean - 30.0).abs() / 30.0 <= 0.1, "mean depth {mean}");
    }

    #[test]
    fn read_errors() {
        let g = genome("ACGTACGT");
        assert!(matches!(
            simulate_reads(&g, 1.0, 9, 0.0, 1),
            Err(SynthError::ReadTooLong { .. })
        ));
        assert_eq!(simulate_reads(&g, 1.0, 4, 1.0, 1), Err(SynthError::BadReadParams));
        assert_eq!(simulate_reads(&g, 0.0, 4, 0.0, 1), Err(SynthError::BadReadParams));
    }
}
