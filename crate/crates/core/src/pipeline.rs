//! End-to-end orchestration: synthesise a population, build the pangenome,
//! annotate, build and solve the QUBO, decode, extract and evaluate.
//!
//! Every stage reads and writes plain files so any step can be rerun from
//! the artifacts of the previous one. A [`RunManifest`] records the config,
//! the SHA-256 of every input and output, and per-stage wall times.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::assembly::{decode, extract_sequence, render_path_string, DecodeMode, DecodeReport};
use crate::evaluate::{evaluate, EvalReport, DEFAULT_SEED_K};
use crate::fasta::{parse_fasta, write_fasta, FastaRecord};
use crate::gfa::{parse_gfa, write_gfa};
use crate::graph::AnnotatedGraph;
use crate::kmer::annotate_graph_multi_k;
use crate::pangraph::{build_pangenome, oracle_weights, Pangenome};
use crate::qaoa::{optimize_qaoa, QaoaConfig};
use crate::qubo::{
    build_qubo, encode_walk, QuboModel, VariableLayout, DEFAULT_ALPHA, DEFAULT_LAMBDA1, DEFAULT_LAMBDA2,
};
use crate::solvers::{
    solve_anneal, solve_exhaustive_bits, solve_exhaustive_walks_limited, solve_tabu, SolveResult, SolverParams,
    DEFAULT_WALK_EXPANSIONS,
};
use crate::synth::{generate_population, keyed_rng, simulate_reads, Genome, MutationConfig, Read};
use crate::tangle::{cost, ProblemKind, Walk};

pub const TOOL_NAME: &str = "qtangle";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable naming the root that relative work directories
/// are resolved against.
pub const WORKDIR_ENV: &str = "QTANGLE_WORKDIR";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },
}

impl PipelineError {
    pub fn stage(stage: &str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage: stage.to_string(),
            message: e.to_string(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    OracleWalk,
    OracleBits,
    Tabu,
    Anneal,
    Qaoa,
}

impl SolverChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverChoice::OracleWalk => "oracle-walk",
            SolverChoice::OracleBits => "oracle-bits",
            SolverChoice::Tabu => "tabu",
            SolverChoice::Anneal => "anneal",
            SolverChoice::Qaoa => "qaoa",
        }
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "oracle-walk" => Ok(SolverChoice::OracleWalk),
            "oracle-bits" => Ok(SolverChoice::OracleBits),
            "tabu" => Ok(SolverChoice::Tabu),
            "anneal" => Ok(SolverChoice::Anneal),
            "qaoa" => Ok(SolverChoice::Qaoa),
            _ => Err(format!("unknown solver `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationMode {
    /// Simulated reads through the k-mer annotator.
    Reads,
    /// Integer copy numbers from the evaluation genome's own path.
    Oracle,
    /// Counts already present in a supplied GFA.
    Gfa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub founder_length: usize,
    /// The first `graph_genomes` members build the pangenome.
    pub graph_genomes: usize,
    /// Number of genomes evaluated.
    pub eval_genomes: usize,
    /// Evaluate graph members instead of the genomes that follow them.
    pub eval_from_graph: bool,
    pub mutation: MutationConfig,
}

impl Default for SynthSection {
    fn default() -> Self {
        let mutation = MutationConfig {
            population_size: 10,
            generations: 3,
            ..MutationConfig::default()
        };
        SynthSection {
            founder_length: 20_000,
            graph_genomes: 8,
            eval_genomes: 2,
            eval_from_graph: false,
            mutation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadsSection {
    pub coverage: f64,
    pub read_length: usize,
    pub error_rate: f64,
}

impl Default for ReadsSection {
    fn default() -> Self {
        ReadsSection {
            coverage: 30.0,
            read_length: 150,
            error_rate: 0.002,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    /// De Bruijn k for graph construction (odd).
    pub k: usize,
    /// Use this GFA instead of building one.
    pub gfa: Option<PathBuf>,
    /// Truth genomes (FASTA) for a supplied GFA.
    pub truth: Option<PathBuf>,
    /// Reads (FASTA) for a supplied GFA.
    pub reads: Option<PathBuf>,
}

impl Default for GraphSection {
    fn default() -> Self {
        GraphSection {
            k: 31,
            gfa: None,
            truth: None,
            reads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateSection {
    pub mode: AnnotationMode,
    pub ks: Vec<usize>,
    /// Sequencing depth; the median node depth when absent.
    pub depth: Option<f64>,
    pub trim: bool,
}

impl Default for AnnotateSection {
    fn default() -> Self {
        AnnotateSection {
            mode: AnnotationMode::Reads,
            ks: vec![15],
            depth: None,
            trim: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuboSection {
    pub kind: ProblemKind,
    pub alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for QuboSection {
    fn default() -> Self {
        QuboSection {
            kind: ProblemKind::Oriented,
            alpha: DEFAULT_ALPHA,
            lambda1: DEFAULT_LAMBDA1,
            lambda2: DEFAULT_LAMBDA2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub name: SolverChoice,
    pub params: SolverParams,
    pub qaoa: QaoaConfig,
    pub max_walk_expansions: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            name: SolverChoice::Tabu,
            params: SolverParams::default(),
            qaoa: QaoaConfig::default(),
            max_walk_expansions: DEFAULT_WALK_EXPANSIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub seed_k: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { seed_k: DEFAULT_SEED_K }
    }
}

/// The whole run configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Output directory, relative to `QTANGLE_WORKDIR` (or the current
    /// directory) unless absolute.
    pub workdir: PathBuf,
    pub synth: SynthSection,
    pub reads: ReadsSection,
    pub graph: GraphSection,
    pub annotate: AnnotateSection,
    pub qubo: QuboSection,
    pub solver: SolverSection,
    pub eval: EvalSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            workdir: PathBuf::from("qtangle-run"),
            synth: SynthSection::default(),
            reads: ReadsSection::default(),
            graph: GraphSection::default(),
            annotate: AnnotateSection::default(),
            qubo: QuboSection::default(),
            solver: SolverSection::default(),
            eval: EvalSection::default(),
        }
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl PipelineConfig {
    /// Parses TOML, applying `key.path=value` overrides before validation.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let cfg = Self::parse(text, overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| PipelineError::Config(format!("{e}")))?;
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("override `{o}` is not key=value")))?;
            let parts: Vec<&str> = key.trim().split('.').collect();
            let mut cur = &mut table;
            for p in &parts[..parts.len() - 1] {
                let entry = cur
                    .entry(p.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()));
                cur = entry
                    .as_table_mut()
                    .ok_or_else(|| PipelineError::Config(format!("override `{key}`: `{p}` is not a table")))?;
            }
            cur.insert(parts[parts.len() - 1].to_string(), parse_override_value(raw.trim()));
        }
        let cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| PipelineError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.graph.gfa, &mut cfg.graph.truth, &mut cfg.graph.reads]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if let Err(e) = self.solver.params.validate() {
            return bad(e.to_string());
        }
        if let Err(e) = self.solver.qaoa.validate() {
            return bad(e.to_string());
        }
        if self.annotate.mode == AnnotationMode::Reads && self.annotate.ks.is_empty() {
            return bad("annotate.ks must list at least one k".into());
        }
        if self.eval.seed_k == 0 || self.eval.seed_k > 32 {
            return bad(format!("eval.seed_k must lie in 1..=32, got {}", self.eval.seed_k));
        }
        if !(self.qubo.alpha >= 1.0 && self.qubo.alpha.is_finite()) {
            return bad(format!("qubo.alpha must be at least 1, got {}", self.qubo.alpha));
        }
        match &self.graph.gfa {
            Some(gfa) => {
                if !gfa.exists() {
                    return bad(format!("graph.gfa `{}` does not exist", gfa.display()));
                }
                match &self.graph.truth {
                    Some(t) if !t.exists() => return bad(format!("graph.truth `{}` does not exist", t.display())),
                    None => return bad("graph.truth is required with graph.gfa".into()),
                    _ => {}
                }
                if self.annotate.mode == AnnotationMode::Reads && self.graph.reads.as_ref().is_none_or(|r| !r.exists())
                {
                    return bad("annotate.mode = reads with graph.gfa needs an existing graph.reads".into());
                }
                if self.annotate.mode == AnnotationMode::Oracle {
                    return bad("annotate.mode = oracle needs a synthesised graph".into());
                }
            }
            None => {
                let s = &self.synth;
                if s.graph_genomes == 0 || s.eval_genomes == 0 {
                    return bad("synth.graph_genomes and synth.eval_genomes must be positive".into());
                }
                let needed = if s.eval_from_graph {
                    s.graph_genomes.max(s.eval_genomes)
                } else {
                    s.graph_genomes + s.eval_genomes
                };
                if needed > s.mutation.population_size {
                    return bad(format!(
                        "population_size {} is smaller than the {needed} genomes required",
                        s.mutation.population_size
                    ));
                }
                if self.annotate.mode == AnnotationMode::Oracle && !s.eval_from_graph {
                    return bad("annotate.mode = oracle needs synth.eval_from_graph = true".into());
                }
                if self.annotate.mode == AnnotationMode::Gfa {
                    return bad("annotate.mode = gfa needs graph.gfa".into());
                }
                if let Err(e) = s.mutation.validate() {
                    return bad(e.to_string());
                }
                if self.graph.k.is_multiple_of(2) || self.graph.k < 3 || self.graph.k > crate::pangraph::MAX_GRAPH_K {
                    return bad(format!("graph.k must be odd and within 3..=41, got {}", self.graph.k));
                }
            }
        }
        Ok(())
    }

    /// The run directory after resolving against the working-dir root.
    pub fn resolved_workdir(&self) -> PathBuf {
        if self.workdir.is_absolute() {
            return self.workdir.clone();
        }
        match std::env::var_os(WORKDIR_ENV) {
            Some(root) => PathBuf::from(root).join(&self.workdir),
            None => self.workdir.clone(),
        }
    }
}

/// Per-stage sub-seed drawn from the root seed.
pub fn stage_seed(root: u64, stage: u64, item: u64) -> u64 {
    keyed_rng(root, &[0x9e11_e5ee_d000 + stage, item]).next_u64()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub stages: Vec<StageTiming>,
    /// Outputs carrying wall-clock data, listed without digests.
    #[serde(default)]
    pub timed_outputs: Vec<String>,
}

impl RunManifest {
    fn new(config: &PipelineConfig) -> Self {
        RunManifest {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            stages: Vec::new(),
            timed_outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Copy with the wall times zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut m = self.clone();
        for s in &mut m.stages {
            s.seconds = 0.0;
        }
        m
    }

    /// Paths (relative to `root`) whose current digest differs from the
    /// recorded one, or which are missing.
    pub fn verify(&self, root: &Path) -> Vec<String> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .filter(|d| {
                let p = Path::new(&d.path);
                let p = if p.is_absolute() { p.to_path_buf() } else { root.join(p) };
                fs::read(p).map(|b| sha256_hex(&b) != d.sha256).unwrap_or(true)
            })
            .map(|d| d.path.clone())
            .collect()
    }
}

/// Files destined for one directory, written only once every stage that
/// produces them has succeeded.
#[derive(Debug, Default)]
struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
    timed: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    fn put(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    fn put_timed(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.timed.insert(name.into(), bytes.into());
    }

    fn digests(&self) -> Vec<FileDigest> {
        self.files
            .iter()
            .map(|(p, b)| FileDigest {
                path: p.clone(),
                sha256: sha256_hex(b),
            })
            .collect()
    }

    fn write(&self, dir: &Path) -> std::io::Result<()> {
        for (name, bytes) in self.files.iter().chain(&self.timed) {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let tmp = path.with_extension("partial");
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(())
    }
}

struct Timer {
    stages: Vec<StageTiming>,
}

impl Timer {
    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let out = f();
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Population FASTA and its description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthManifest {
    pub seed: u64,
    pub founder_length: usize,
    pub genomes: Vec<TruthGenome>,
    pub graph_genomes: Vec<String>,
    pub eval_genomes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthGenome {
    pub id: String,
    pub parent: Option<String>,
    pub length: usize,
    pub events: usize,
    pub sha256: String,
}

pub struct Population {
    pub genomes: Vec<Genome>,
    pub manifest: TruthManifest,
}

impl Population {
    pub fn graph_members(&self) -> Vec<&Genome> {
        self.pick(&self.manifest.graph_genomes)
    }

    pub fn eval_members(&self) -> Vec<&Genome> {
        self.pick(&self.manifest.eval_genomes)
    }

    fn pick(&self, ids: &[String]) -> Vec<&Genome> {
        ids.iter()
            .filter_map(|id| self.genomes.iter().find(|g| &g.id == id))
            .collect()
    }

    pub fn to_fasta(&self) -> String {
        let recs: Vec<FastaRecord> = self
            .genomes
            .iter()
            .map(|g| FastaRecord::new(g.id.clone(), g.sequence.clone()))
            .collect();
        write_fasta(&recs, 80)
    }
}

/// Generates the population described by `cfg.synth`.
pub fn synthesize(cfg: &PipelineConfig) -> Result<Population> {
    let s = &cfg.synth;
    let genomes = generate_population(&s.mutation, s.founder_length, stage_seed(cfg.seed, 1, 0))
        .map_err(|e| PipelineError::stage("synth", e))?;
    let graph_ids: Vec<String> = genomes.iter().take(s.graph_genomes).map(|g| g.id.clone()).collect();
    let eval_ids: Vec<String> = if s.eval_from_graph {
        graph_ids.iter().take(s.eval_genomes).cloned().collect()
    } else {
        genomes
            .iter()
            .skip(s.graph_genomes)
            .take(s.eval_genomes)
            .map(|g| g.id.clone())
            .collect()
    };
    let manifest = TruthManifest {
        seed: cfg.seed,
        founder_length: s.founder_length,
        genomes: genomes
            .iter()
            .map(|g| TruthGenome {
                id: g.id.clone(),
                parent: g.parent.clone(),
                length: g.sequence.len(),
                events: g.events.len(),
                sha256: sha256_hex(g.sequence.as_bytes()),
            })
            .collect(),
        graph_genomes: graph_ids,
        eval_genomes: eval_ids,
    };
    Ok(Population { genomes, manifest })
}

/// Writes `population.fasta` and `truth.json` into an existing directory.
pub fn cmd_synth(cfg: &PipelineConfig, out_dir: &Path) -> Result<Vec<FileDigest>> {
    if !out_dir.is_dir() {
        return Err(PipelineError::Config(format!(
            "output directory `{}` does not exist",
            out_dir.display()
        )));
    }
    let pop = synthesize(cfg)?;
    let mut out = Outputs::default();
    out.put("population.fasta", pop.to_fasta());
    out.put(
        "truth.json",
        serde_json::to_string_pretty(&pop.manifest).expect("manifest serialises"),
    );
    out.write(out_dir).map_err(|e| PipelineError::stage("synth", e))?;
    Ok(out.digests())
}

/// Builds the pangenome of the given genomes.
pub fn build_graph(genomes: &[&Genome], k: usize) -> Result<Pangenome> {
    let input: Vec<(&str, &str)> = genomes.iter().map(|g| (g.id.as_str(), g.sequence.as_str())).collect();
    build_pangenome(&input, k).map_err(|e| PipelineError::stage("graph", e))
}

/// Counts from reads, normalised to copy numbers, optionally trimmed.
pub fn annotate_from_reads(g: &AnnotatedGraph, reads: &[Read], annotate: &AnnotateSection) -> Result<AnnotatedGraph> {
    let counted =
        annotate_graph_multi_k(g, reads, &annotate.ks, None).map_err(|e| PipelineError::stage("annotate", e))?;
    normalise(&counted, annotate)
}

fn normalise(g: &AnnotatedGraph, annotate: &AnnotateSection) -> Result<AnnotatedGraph> {
    let weighted = g
        .normalize_copy_numbers(annotate.depth)
        .map_err(|e| PipelineError::stage("normalise", e))?;
    Ok(if annotate.trim {
        weighted.trim_zero_weight_edges()
    } else {
        weighted
    })
}

/// The graph with copy numbers equal to how often `walk` visits each node.
pub fn annotate_oracle(g: &AnnotatedGraph, walk: &Walk) -> AnnotatedGraph {
    let mut out = g.clone();
    out.set_weights(&oracle_weights(g, &[walk]));
    out
}

pub fn build_model(g: &AnnotatedGraph, q: &QuboSection) -> Result<QuboModel> {
    build_qubo(g, q.kind, q.alpha, q.lambda1, q.lambda2).map_err(|e| PipelineError::stage("qubo", e))
}

/// A solver run. `walk_cost` is set when the walks were searched directly,
/// against the integer-rounded weights the QUBO encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub result: SolveResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk_cost: Option<f64>,
}

pub fn solve(g: &AnnotatedGraph, m: &QuboModel, solver: &SolverSection, seed: u64) -> Result<Solution> {
    let stage = |e: &dyn std::fmt::Display| PipelineError::stage("solve", e);
    let layout = m
        .layout
        .as_ref()
        .ok_or_else(|| stage(&"model has no variable layout"))?;
    let mut params = solver.params.clone();
    params.seed = seed;
    match solver.name {
        SolverChoice::OracleWalk => {
            let t0 = Instant::now();
            let mut rounded = g.clone();
            let w: Vec<f64> = g.weights().iter().map(|w| w.round_ties_even()).collect();
            rounded.set_weights(&w);
            let sol = solve_exhaustive_walks_limited(&rounded, layout.kind, layout.horizon, solver.max_walk_expansions)
                .map_err(|e| stage(&e))?;
            let x = encode_walk(layout, &sol.walks).map_err(|e| stage(&e))?;
            let energy = m.energy(&x).map_err(|e| stage(&e))?;
            Ok(Solution {
                result: SolveResult {
                    solver: SolverChoice::OracleWalk.as_str().into(),
                    n: m.n,
                    best_x: x,
                    best_energy: energy,
                    trace: vec![crate::solvers::TracePoint {
                        elapsed: t0.elapsed().as_secs_f64(),
                        flips: sol.expansions,
                        energy,
                    }],
                    restarts_completed: 1,
                    flips: sol.expansions,
                    seed,
                },
                walk_cost: Some(sol.cost),
            })
        }
        SolverChoice::OracleBits => Ok(Solution {
            result: solve_exhaustive_bits(m).map_err(|e| stage(&e))?,
            walk_cost: None,
        }),
        SolverChoice::Tabu => Ok(Solution {
            result: solve_tabu(m, &params).map_err(|e| stage(&e))?,
            walk_cost: None,
        }),
        SolverChoice::Anneal => Ok(Solution {
            result: solve_anneal(m, &params).map_err(|e| stage(&e))?,
            walk_cost: None,
        }),
        SolverChoice::Qaoa => {
            let t0 = Instant::now();
            let mut cfg = solver.qaoa.clone();
            cfg.seed = seed;
            let out = optimize_qaoa(m, &cfg).map_err(|e| stage(&e))?;
            Ok(Solution {
                result: SolveResult {
                    solver: SolverChoice::Qaoa.as_str().into(),
                    n: m.n,
                    best_x: out.best_x,
                    best_energy: out.best_energy,
                    trace: vec![crate::solvers::TracePoint {
                        elapsed: t0.elapsed().as_secs_f64(),
                        flips: out.trace.len() as u64 * cfg.shots,
                        energy: out.best_energy,
                    }],
                    restarts_completed: 1,
                    flips: out.trace.len() as u64 * cfg.shots,
                    seed,
                },
                walk_cost: None,
            })
        }
    }
}

/// Decoded walks, their sequences and path strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    pub mode: DecodeMode,
    pub segments: usize,
    pub violations: usize,
    pub paths: Vec<String>,
    pub walk_cost: Option<f64>,
    #[serde(skip)]
    pub contigs: Vec<String>,
}

/// Decodes strictly for exact solvers and with repair otherwise, then
/// spells every segment out as a contig.
pub fn assemble(g: &AnnotatedGraph, layout: &VariableLayout, sol: &Solution, kind: ProblemKind) -> Result<Assembly> {
    let mode = match sol.result.solver.as_str() {
        "oracle-walk" | "oracle-bits" => DecodeMode::Strict,
        _ => DecodeMode::Repair,
    };
    let report: DecodeReport =
        decode(g, layout, &sol.result.best_x, mode).map_err(|e| PipelineError::stage("decode", e))?;
    let segments: Vec<&Walk> = report.segments().filter(|w| !w.is_empty()).collect();
    let contigs = segments
        .iter()
        .map(|w| extract_sequence(g, w))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::stage("extract", e))?;
    let walk_cost = if mode == DecodeMode::Strict {
        cost(g, kind, &report.walks()).ok()
    } else {
        None
    };
    Ok(Assembly {
        mode,
        segments: segments.len(),
        violations: report.violations.len(),
        paths: segments.iter().map(|w| render_path_string(g, w)).collect(),
        walk_cost,
        contigs,
    })
}

pub fn contigs_fasta(contigs: &[String]) -> String {
    let recs: Vec<FastaRecord> = contigs
        .iter()
        .enumerate()
        .map(|(i, c)| FastaRecord::new(format!("contig{}", i + 1), c.clone()))
        .collect();
    write_fasta(&recs, 80)
}

/// One evaluated genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeResult {
    pub genome: String,
    pub nodes: usize,
    pub variables: usize,
    pub best_energy: f64,
    pub assembly: Assembly,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub workdir: PathBuf,
    pub results: Vec<GenomeResult>,
    pub manifest: RunManifest,
}

pub fn summary_tsv(results: &[GenomeResult]) -> String {
    let mut s = format!("Genome\t{}\n", EvalReport::TSV_HEADER);
    for r in results {
        s.push_str(&format!("{}\t{}\n", r.genome, r.report.to_tsv_row()));
    }
    s
}

struct Target {
    id: String,
    truth: String,
    reads: Option<Vec<Read>>,
    oracle_walk: Option<Walk>,
}

fn run_target(
    cfg: &PipelineConfig,
    index: usize,
    base: &AnnotatedGraph,
    t: &Target,
    out: &mut Outputs,
    timer: &mut Timer,
) -> Result<GenomeResult> {
    let dir = format!("genomes/{}", t.id);
    let annotated = timer.run("annotate", || match cfg.annotate.mode {
        AnnotationMode::Oracle => Ok(annotate_oracle(base, t.oracle_walk.as_ref().expect("oracle walk"))),
        AnnotationMode::Gfa => normalise(base, &cfg.annotate),
        AnnotationMode::Reads => annotate_from_reads(base, t.reads.as_deref().unwrap_or_default(), &cfg.annotate),
    })?;
    out.put(format!("{dir}/annotated.gfa"), write_gfa(&annotated.to_gfa()));
    let model = timer.run("qubo", || build_model(&annotated, &cfg.qubo))?;
    let layout = model.layout.clone().expect("built from a graph");
    out.put(format!("{dir}/qubo.txt"), model.to_text());
    out.put(format!("{dir}/layout.json"), layout.to_json());
    let sol = timer.run("solve", || {
        solve(&annotated, &model, &cfg.solver, stage_seed(cfg.seed, 4, index as u64))
    })?;
    out.put_timed(
        format!("{dir}/solve_trace.json"),
        serde_json::to_string_pretty(&sol.result.trace).expect("trace serialises"),
    );
    let mut untimed = sol.clone();
    for p in &mut untimed.result.trace {
        p.elapsed = 0.0;
    }
    let sol_json = serde_json::to_string_pretty(&untimed).expect("solution serialises");
    let assembly = timer.run("decode", || assemble(&annotated, &layout, &sol, cfg.qubo.kind))?;
    let assembly = Assembly {
        walk_cost: sol.walk_cost.or(assembly.walk_cost),
        ..assembly
    };
    out.put(format!("{dir}/solution.json"), sol_json);
    out.put(format!("{dir}/contigs.fasta"), contigs_fasta(&assembly.contigs));
    out.put(
        format!("{dir}/assembly.json"),
        serde_json::to_string_pretty(&assembly).expect("assembly serialises"),
    );
    let report = timer.run("evaluate", || {
        Ok(evaluate(&t.truth, &assembly.contigs, cfg.eval.seed_k))
    })?;
    out.put(format!("{dir}/report.json"), report.to_json());
    out.put(format!("{dir}/report.tsv"), report.to_tsv());
    Ok(GenomeResult {
        genome: t.id.clone(),
        nodes: annotated.num_nodes(),
        variables: model.n,
        best_energy: sol.result.best_energy,
        assembly,
        report,
    })
}

fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    manifest.inputs.push(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    });
    String::from_utf8(bytes).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn fasta_reads(text: &str, path: &Path) -> Result<Vec<Read>> {
    Ok(parse_fasta(text)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        .into_iter()
        .map(|r| Read {
            id: r.id,
            sequence: r.sequence,
        })
        .collect())
}

/// Runs every stage and writes all artifacts, the summary and the manifest
/// into the resolved work directory.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let workdir = cfg.resolved_workdir();
    let mut manifest = RunManifest::new(cfg);
    let mut timer = Timer { stages: Vec::new() };
    let mut out = Outputs::default();

    let (base, targets) = match &cfg.graph.gfa {
        Some(gfa_path) => {
            let text = read_input(gfa_path, &mut manifest)?;
            let doc = parse_gfa(&text).map_err(|e| PipelineError::stage("graph", e))?;
            let k = cfg.annotate.ks.first().copied().unwrap_or(cfg.graph.k);
            let g = AnnotatedGraph::from_gfa(&doc, k).map_err(|e| PipelineError::stage("graph", e))?;
            let truth_path = cfg.graph.truth.as_ref().expect("validated");
            let truth_text = read_input(truth_path, &mut manifest)?;
            let truths = parse_fasta(&truth_text)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", truth_path.display())))?;
            let reads = match (&cfg.graph.reads, cfg.annotate.mode) {
                (Some(p), AnnotationMode::Reads) => Some(fasta_reads(&read_input(p, &mut manifest)?, p)?),
                _ => None,
            };
            let targets = truths
                .into_iter()
                .map(|r| Target {
                    id: r.id,
                    truth: r.sequence,
                    reads: reads.clone(),
                    oracle_walk: None,
                })
                .collect::<Vec<_>>();
            (g, targets)
        }
        None => {
            let pop = timer.run("synth", || synthesize(cfg))?;
            out.put("population.fasta", pop.to_fasta());
            out.put(
                "truth.json",
                serde_json::to_string_pretty(&pop.manifest).expect("manifest serialises"),
            );
            let pg = timer.run("graph", || build_graph(&pop.graph_members(), cfg.graph.k))?;
            out.put("graph.gfa", write_gfa(&pg.to_gfa()));
            let mut targets = Vec::new();
            for (i, g) in pop.eval_members().into_iter().enumerate() {
                let reads = if cfg.annotate.mode == AnnotationMode::Reads {
                    let rs = timer.run("reads", || {
                        simulate_reads(
                            g,
                            cfg.reads.coverage,
                            cfg.reads.read_length,
                            cfg.reads.error_rate,
                            stage_seed(cfg.seed, 2, i as u64),
                        )
                        .map_err(|e| PipelineError::stage("reads", e))
                    })?;
                    let recs: Vec<FastaRecord> = rs
                        .reads
                        .iter()
                        .map(|r| FastaRecord::new(r.id.clone(), r.sequence.clone()))
                        .collect();
                    out.put(format!("genomes/{}/reads.fasta", g.id), write_fasta(&recs, 0));
                    Some(rs.reads)
                } else {
                    None
                };
                targets.push(Target {
                    id: g.id.clone(),
                    truth: g.sequence.clone(),
                    reads,
                    oracle_walk: pg.path(&g.id).cloned(),
                });
            }
            (pg.graph, targets)
        }
    };

    let per: Vec<(Result<GenomeResult>, Outputs, Vec<StageTiming>)> = targets
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut o = Outputs::default();
            let mut tm = Timer { stages: Vec::new() };
            let r = run_target(cfg, i, &base, t, &mut o, &mut tm);
            (r, o, tm.stages)
        })
        .collect();
    let mut results = Vec::new();
    for (r, o, stages) in per {
        out.files.extend(o.files);
        out.timed.extend(o.timed);
        for s in stages {
            match timer.stages.iter_mut().find(|x| x.stage == s.stage) {
                Some(x) => x.seconds += s.seconds,
                None => timer.stages.push(s),
            }
        }
        match r {
            Ok(r) => results.push(r),
            Err(e) => {
                let _ = fs::create_dir_all(&workdir).and_then(|_| out.write(&workdir));
                return Err(e);
            }
        }
    }
    out.put("summary.tsv", summary_tsv(&results));
    out.put(
        "results.json",
        serde_json::to_string_pretty(&results).expect("results serialise"),
    );
    manifest.outputs = out.digests();
    manifest.stages = timer.stages;
    manifest.timed_outputs = out.timed.keys().cloned().collect();
    fs::create_dir_all(&workdir).map_err(|e| PipelineError::stage("write", format!("{}: {e}", workdir.display())))?;
    out.write(&workdir).map_err(|e| PipelineError::stage("write", e))?;
    fs::write(workdir.join("manifest.json"), manifest.to_json()).map_err(|e| PipelineError::stage("write", e))?;
    Ok(PipelineOutcome {
        workdir,
        results,
        manifest,
    })
}
