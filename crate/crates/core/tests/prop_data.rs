mod common;

use common::{random_dna, rng};
use proptest::prelude::*;
use qtangle::assembly::extract_sequence;
use qtangle::dna::reverse_complement;
use qtangle::evaluate::{evaluate, EvalReport};
use qtangle::gfa::Orientation;
use qtangle::graph::AnnotatedGraph;
use qtangle::kmer::{annotate_reads, KmerIndex};
use qtangle::pangraph::build_pangenome;
use qtangle::synth::{
    generate_population, replay, simulate_reads, EventSizes, Genome, MutationConfig, MutationRates, Read,
};
use rand::Rng;

fn small_config(r: &mut impl Rng) -> MutationConfig {
    let founder = MutationRates {
        point: r.random_range(0.0..2e-3),
        str_change: r.random_range(0.0..1e-3),
        cnv: r.random_range(0.0..5e-4),
        repeat_short: r.random_range(0.0..5e-4),
        repeat_long: 0.0,
        translocation: r.random_range(0.0..3e-4),
        inversion: r.random_range(0.0..3e-4),
    };
    let half = |x: f64| x / 2.0;
    MutationConfig {
        founder,
        descendant: MutationRates {
            point: half(founder.point),
            str_change: half(founder.str_change),
            cnv: half(founder.cnv),
            repeat_short: half(founder.repeat_short),
            repeat_long: 0.0,
            translocation: half(founder.translocation),
            inversion: half(founder.inversion),
        },
        sizes: EventSizes {
            str_unit: (2, 6),
            repeat_short: (20, 120),
            repeat_long: (200, 400),
            cnv: (30, 200),
        },
        generations: r.random_range(1..4),
        population_size: r.random_range(2..6),
    }
}

fn genome(id: &str, sequence: String) -> Genome {
    Genome {
        id: id.to_string(),
        sequence,
        parent: None,
        events: Vec::new(),
    }
}

fn reads_of(seqs: &[String]) -> Vec<Read> {
    seqs.iter()
        .enumerate()
        .map(|(i, s)| Read {
            id: format!("r{i}"),
            sequence: s.clone(),
        })
        .collect()
}

/// A genome with a repeated block and an inverted copy, and its pangenome.
fn repetitive_graph(r: &mut impl Rng, k: usize) -> (String, AnnotatedGraph) {
    let block_len = r.random_range(40..120);
    let block = random_dna(r, block_len);
    let mut seq = String::new();
    for _ in 0..3 {
        let len = r.random_range(60..200);
        seq.push_str(&random_dna(r, len));
        seq.push_str(&block);
    }
    seq.push_str(&reverse_complement(&block).unwrap());
    let len = r.random_range(60..200);
    seq.push_str(&random_dna(r, len));
    let pg = build_pangenome(&[("g", &seq)], k).unwrap();
    (seq, pg.graph)
}

proptest! {
    #![proptest_config(common::cases(1000))]

    #[test]
    fn populations_are_deterministic_and_replay_from_their_parents(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cfg = small_config(&mut r);
        let len = r.random_range(1_000..3_000);
        let pop = generate_population(&cfg, len, seed).unwrap();
        prop_assert_eq!(&generate_population(&cfg, len, seed).unwrap(), &pop);
        prop_assert_eq!(pop.len(), cfg.population_size);
        for g in &pop {
            let parent = match &g.parent {
                None => String::new(),
                Some(p) => pop.iter().find(|q| &q.id == p).expect("parent precedes child").sequence.clone(),
            };
            prop_assert_eq!(&replay(&parent, &g.events).unwrap(), &g.sequence);
        }
    }

    #[test]
    fn reads_are_substituted_substrings_of_their_source(
        seed in any::<u64>(),
        coverage in 0.5f64..12.0,
        read_length in 30usize..200,
        error_rate in prop_oneof![Just(0.0), 0.0f64..0.05],
    ) {
        let mut r = rng(seed);
        let len = r.random_range(10_000..12_000);
        let g = genome("src", random_dna(&mut r, len));
        let set = simulate_reads(&g, coverage, read_length, error_rate, seed).unwrap();
        prop_assert_eq!(&simulate_reads(&g, coverage, read_length, error_rate, seed).unwrap(), &set);
        prop_assert_eq!(set.origins.len(), set.reads.len());
        let mut bases = 0usize;
        for (read, origin) in set.reads.iter().zip(&set.origins) {
            let window = &g.sequence[origin.start..origin.start + read_length];
            let source = match origin.strand {
                Orientation::Forward => window.to_string(),
                Orientation::Reverse => reverse_complement(window).unwrap(),
            };
            prop_assert_eq!(read.sequence.len(), read_length);
            let diffs = read.sequence.bytes().zip(source.bytes()).filter(|(a, b)| a != b).count();
            if error_rate == 0.0 {
                prop_assert_eq!(diffs, 0);
            }
            bases += read_length;
        }
        let depth = bases as f64 / len as f64;
        prop_assert!((depth - coverage).abs() <= 0.1 * coverage, "{} vs {}", depth, coverage);
    }

    #[test]
    fn annotation_is_strand_invariant_and_conserves_kmers(seed in any::<u64>(), k in 9usize..=15) {
        let mut r = rng(seed);
        let (seq, g) = repetitive_graph(&mut r, 15);
        let idx = KmerIndex::build(&g, k, None).unwrap();
        let reads: Vec<String> = (0..60)
            .map(|_| {
                let len = r.random_range(k..=120.min(seq.len()));
                let start = r.random_range(0..=seq.len() - len);
                let mut s: Vec<u8> = seq.as_bytes()[start..start + len].to_vec();
                for b in s.iter_mut() {
                    if r.random_bool(0.01) {
                        *b = b"ACGT"[r.random_range(0..4)];
                    }
                }
                String::from_utf8(s).unwrap()
            })
            .collect();
        let rc: Vec<String> = reads.iter().map(|s| reverse_complement(s).unwrap()).collect();
        let fwd_hits = annotate_reads(&reads_of(&reads), &idx, &g);
        let rev_hits = annotate_reads(&reads_of(&rc), &idx, &g);
        prop_assert_eq!(&fwd_hits, &rev_hits);
        let total: u64 = reads.iter().map(|s| (s.len() + 1 - k) as u64).sum();
        prop_assert!(fwd_hits.credited() <= total);
    }

    #[test]
    fn pangenome_paths_spell_their_genomes(seed in any::<u64>(), k in prop::sample::select(vec![5usize, 7, 11, 15, 21, 31])) {
        let mut r = rng(seed);
        let shared: Vec<String> = (0..4).map(|_| { let l = r.random_range(20..80); random_dna(&mut r, l) }).collect();
        let genomes: Vec<(String, String)> = (0..r.random_range(1..4))
            .map(|i| {
                let mut s = String::new();
                for _ in 0..r.random_range(1..6) {
                    let part = &shared[r.random_range(0..shared.len())];
                    if r.random_bool(0.3) {
                        s.push_str(&reverse_complement(part).unwrap());
                    } else {
                        s.push_str(part);
                    }
                    if r.random_bool(0.5) {
                        let l = r.random_range(1..30);
                        s.push_str(&random_dna(&mut r, l));
                    }
                }
                (format!("g{i}"), s)
            })
            .collect();
        let input: Vec<(&str, &str)> = genomes.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let pg = build_pangenome(&input, k).unwrap();
        for (id, seq) in &genomes {
            let walk = pg.path(id).unwrap();
            prop_assert!(qtangle::tangle::is_valid_walk(&pg.graph, walk).unwrap());
            prop_assert_eq!(&extract_sequence(&pg.graph, walk).unwrap(), seq);
        }
    }

    #[test]
    fn self_evaluation_is_perfect(seed in any::<u64>()) {
        let mut r = rng(seed);
        let len = r.random_range(200..3_000);
        let s = random_dna(&mut r, len);
        prop_assert_eq!(evaluate(&s, std::slice::from_ref(&s), 31), EvalReport::perfect(1));
    }

    #[test]
    fn evaluation_ignores_contig_order_and_strand(seed in any::<u64>()) {
        let mut r = rng(seed);
        let len = r.random_range(600..3_000);
        let truth = random_dna(&mut r, len);
        let mut contigs = Vec::new();
        for _ in 0..r.random_range(1..4) {
            let a = r.random_range(0..len - 200);
            let b = r.random_range(a + 200..=len.min(a + 1500));
            let mut c: Vec<u8> = truth.as_bytes()[a..b].to_vec();
            for _ in 0..r.random_range(0..4) {
                let p = r.random_range(0..c.len());
                c[p] = b"ACGT"[r.random_range(0..4)];
            }
            if r.random_bool(0.3) {
                let p = r.random_range(50..c.len() - 40);
                let l = r.random_range(10..30);
                c.drain(p..(p + l).min(c.len()));
            }
            contigs.push(String::from_utf8(c).unwrap());
        }
        let base = evaluate(&truth, &contigs, 31);
        let mut reordered = contigs.clone();
        reordered.reverse();
        let other = evaluate(&truth, &reordered, 31);
        prop_assert_eq!(base.pct_covered, other.pct_covered);
        prop_assert_eq!(base.pct_used, other.pct_used);
        let i = r.random_range(0..contigs.len());
        let mut flipped = contigs.clone();
        flipped[i] = reverse_complement(&flipped[i]).unwrap();
        prop_assert_eq!(evaluate(&truth, &flipped, 31), base);
    }

    #[test]
    fn unique_node_counts_track_coverage_times_copy_number(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = 15;
        let read_length = 100;
        let coverage = 30.0;
        let nodes: Vec<String> = (0..2).map(|_| { let l = r.random_range(5_000..6_000); random_dna(&mut r, l) }).collect();
        let order: Vec<usize> = if r.random_bool(0.5) { vec![0, 1] } else { vec![0, 1, 0] };
        let seq: String = order.iter().map(|&i| nodes[i].as_str()).collect();
        let mut g = AnnotatedGraph::new(k);
        g.add_node("a", nodes[0].clone()).unwrap();
        g.add_node("b", nodes[1].clone()).unwrap();
        let set = simulate_reads(&genome("g", seq), coverage, read_length, 0.0, seed).unwrap();
        let idx = KmerIndex::build(&g, k, None).unwrap();
        let hits = annotate_reads(&set.reads, &idx, &g);
        let kmer_coverage = coverage * (read_length - k + 1) as f64 / read_length as f64;
        for v in 0..2 {
            let copies = order.iter().filter(|&&i| i == v).count() as f64;
            let per_kmer = hits.total(v) as f64 / (nodes[v].len() - k + 1) as f64;
            let expect = kmer_coverage * copies;
            prop_assert!((per_kmer - expect).abs() <= 0.15 * expect, "node {}: {} vs {}", v, per_kmer, expect);
        }
    }
}
