//! Reconstruct genome sequences as walks through copy-number annotated
//! pangenome graphs.

pub mod assembly;
pub mod dna;
pub mod evaluate;
pub mod fasta;
pub mod gfa;
pub mod graph;
pub mod kmer;
pub mod pangraph;
pub mod pipeline;
pub mod qaoa;
pub mod qubo;
pub mod solvers;
pub mod synth;
pub mod tangle;
