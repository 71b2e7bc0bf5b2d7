//! `qtangle`: synthesise, annotate, encode, solve, decode and evaluate.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 when a
//! stage fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtangle::assembly::DecodeMode;
use qtangle::evaluate::{evaluate, DEFAULT_SEED_K};
use qtangle::fasta::{parse_fasta, FastaRecord};
use qtangle::gfa::{parse_gfa, write_gfa};
use qtangle::graph::AnnotatedGraph;
use qtangle::pangraph::build_pangenome;
use qtangle::pipeline::{
    annotate_from_reads, assemble, build_model, cmd_pipeline, cmd_synth, contigs_fasta, solve, AnnotateSection,
    PipelineConfig, PipelineError, QuboSection, Solution, SolverChoice, SolverSection,
};
use qtangle::qubo::{QuboModel, VariableLayout, DEFAULT_ALPHA, DEFAULT_LAMBDA1, DEFAULT_LAMBDA2};
use qtangle::synth::Read;
use qtangle::tangle::ProblemKind;

type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Parser)]
#[command(
    name = "qtangle",
    version,
    about = "Copy-number guided walk reconstruction on pangenome graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a population and write `population.fasta` and `truth.json`.
    Synth {
        #[command(flatten)]
        config: ConfigArgs,
        /// Existing output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a pangenome GFA (with genome paths) from FASTA records.
    Graph {
        #[arg(long)]
        fasta: PathBuf,
        #[arg(long, default_value_t = 31)]
        k: usize,
        /// Comma-separated record ids to include; all records by default.
        #[arg(long, value_delimiter = ',')]
        genomes: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count read k-mers on the graph and convert them to copy numbers.
    Annotate {
        #[arg(long)]
        gfa: PathBuf,
        #[arg(long)]
        reads: PathBuf,
        /// Annotation k; repeat to keep the best depth over several k.
        #[arg(long = "k", default_values_t = [15])]
        ks: Vec<usize>,
        #[arg(long)]
        depth: Option<f64>,
        #[arg(long)]
        trim: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode an annotated graph as a QUBO.
    Qubo {
        #[arg(long)]
        gfa: PathBuf,
        #[arg(long, default_value = "oriented")]
        kind: ProblemKind,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_LAMBDA1)]
        lambda1: f64,
        #[arg(long, default_value_t = DEFAULT_LAMBDA2)]
        lambda2: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        layout: PathBuf,
    },
    /// Minimise a QUBO.
    Solve {
        #[arg(long)]
        qubo: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        /// Annotated graph; required by `oracle-walk`.
        #[arg(long)]
        gfa: Option<PathBuf>,
        #[arg(long, default_value = "tabu")]
        solver: SolverChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        max_flips: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a solution into walks and contig sequences.
    Decode {
        #[arg(long)]
        gfa: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value = "repair")]
        mode: DecodeMode,
        #[arg(long)]
        out: PathBuf,
        /// Also write the decoding summary (paths, segments) as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Align contigs to a truth genome and report the assembly metrics.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        /// Record to use from the truth FASTA; the first by default.
        #[arg(long)]
        truth_id: Option<String>,
        #[arg(long)]
        contigs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED_K)]
        seed_k: usize,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Run every stage from one config file.
    Pipeline {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        workdir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        solver: Option<SolverChoice>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set solver.params.time_limit=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        match &self.config {
            Some(p) => PipelineConfig::load(p, &self.overrides),
            None => PipelineConfig::from_toml("", &self.overrides),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| PipelineError::stage("write", format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, k: usize) -> Result<AnnotatedGraph> {
    let doc = parse_gfa(&read(path)?).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    AnnotatedGraph::from_gfa(&doc, k).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn load_fasta(path: &Path) -> Result<Vec<FastaRecord>> {
    parse_fasta(&read(path)?).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn load_model(qubo: &Path, layout: &Path) -> Result<QuboModel> {
    let layout = VariableLayout::from_json(&read(layout)?)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", layout.display())))?;
    QuboModel::from_text(&read(qubo)?, Some(layout))
        .map_err(|e| PipelineError::Config(format!("{}: {e}", qubo.display())))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { config, out } => {
            let cfg = config.load()?;
            for d in cmd_synth(&cfg, &out)? {
                println!("{}\t{}", d.sha256, out.join(&d.path).display());
            }
        }
        Command::Graph { fasta, k, genomes, out } => {
            let recs = load_fasta(&fasta)?;
            let chosen: Vec<(&str, &str)> = recs
                .iter()
                .filter(|r| genomes.is_empty() || genomes.contains(&r.id))
                .map(|r| (r.id.as_str(), r.sequence.as_str()))
                .collect();
            if chosen.is_empty() {
                return Err(PipelineError::Config("no genomes selected".into()));
            }
            let pg = build_pangenome(&chosen, k).map_err(|e| PipelineError::stage("graph", e))?;
            write(&out, &write_gfa(&pg.to_gfa()))?;
            eprintln!(
                "{} nodes, {} edges, {} paths",
                pg.graph.num_nodes(),
                pg.graph.num_edges(),
                pg.paths.len()
            );
        }
        Command::Annotate {
            gfa,
            reads,
            ks,
            depth,
            trim,
            out,
        } => {
            let g = load_graph(&gfa, ks[0])?;
            let reads: Vec<Read> = load_fasta(&reads)?
                .into_iter()
                .map(|r| Read {
                    id: r.id,
                    sequence: r.sequence,
                })
                .collect();
            let section = AnnotateSection {
                ks,
                depth,
                trim,
                ..AnnotateSection::default()
            };
            let annotated = annotate_from_reads(&g, &reads, &section)?;
            write(&out, &write_gfa(&annotated.to_gfa()))?;
        }
        Command::Qubo {
            gfa,
            kind,
            alpha,
            lambda1,
            lambda2,
            out,
            layout,
        } => {
            let g = load_graph(&gfa, DEFAULT_SEED_K)?;
            let m = build_model(
                &g,
                &QuboSection {
                    kind,
                    alpha,
                    lambda1,
                    lambda2,
                },
            )?;
            write(&out, &m.to_text())?;
            write(&layout, &m.layout.as_ref().expect("built from a graph").to_json())?;
            eprintln!("{} variables, {} couplings", m.n, m.quadratic.len());
        }
        Command::Solve {
            qubo,
            layout,
            gfa,
            solver,
            seed,
            time_limit,
            max_flips,
            restarts,
            out,
        } => {
            let m = load_model(&qubo, &layout)?;
            let g = match (&gfa, solver) {
                (Some(p), _) => load_graph(p, DEFAULT_SEED_K)?,
                (None, SolverChoice::OracleWalk) => {
                    return Err(PipelineError::Config("oracle-walk needs --gfa".into()));
                }
                (None, _) => AnnotatedGraph::new(DEFAULT_SEED_K),
            };
            let mut section = SolverSection {
                name: solver,
                ..SolverSection::default()
            };
            if let Some(t) = time_limit {
                section.params.time_limit = t;
            }
            section.params.max_flips = max_flips.or(section.params.max_flips);
            if let Some(r) = restarts {
                section.params.restarts = r;
            }
            section
                .params
                .validate()
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            let sol = solve(&g, &m, &section, seed)?;
            write(&out, &json(&sol))?;
            println!("{}", sol.result.best_energy);
        }
        Command::Decode {
            gfa,
            layout,
            solution,
            mode,
            out,
            report,
        } => {
            let g = load_graph(&gfa, DEFAULT_SEED_K)?;
            let layout =
                VariableLayout::from_json(&read(&layout)?).map_err(|e| PipelineError::Config(e.to_string()))?;
            let mut sol: Solution =
                serde_json::from_str(&read(&solution)?).map_err(|e| PipelineError::Config(e.to_string()))?;
            sol.result.best_x.truncate(sol.result.n);
            // The requested mode wins over the solver-derived default.
            sol.result.solver = match mode {
                DecodeMode::Strict => SolverChoice::OracleBits.as_str().into(),
                DecodeMode::Repair => SolverChoice::Tabu.as_str().into(),
            };
            let asm = assemble(&g, &layout, &sol, layout.kind)?;
            write(&out, &contigs_fasta(&asm.contigs))?;
            if let Some(r) = report {
                write(&r, &json(&asm))?;
            }
            for p in &asm.paths {
                println!("{p}");
            }
        }
        Command::Evaluate {
            truth,
            truth_id,
            contigs,
            seed_k,
            json: json_out,
            tsv,
        } => {
            let truths = load_fasta(&truth)?;
            let t = match &truth_id {
                Some(id) => truths.iter().find(|r| &r.id == id),
                None => truths.first(),
            }
            .ok_or_else(|| PipelineError::Config("truth record not found".into()))?;
            let contigs: Vec<String> = load_fasta(&contigs)?.into_iter().map(|r| r.sequence).collect();
            let report = evaluate(&t.sequence, &contigs, seed_k);
            if let Some(p) = json_out {
                write(&p, &report.to_json())?;
            }
            if let Some(p) = tsv {
                write(&p, &report.to_tsv())?;
            }
            print!("{}", report.to_tsv());
        }
        Command::Pipeline {
            config,
            workdir,
            seed,
            solver,
        } => {
            let mut cfg = config.load()?;
            if let Some(w) = workdir {
                cfg.workdir = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(s) = solver {
                cfg.solver.name = s;
            }
            let outcome = cmd_pipeline(&cfg)?;
            print!("{}", qtangle::pipeline::summary_tsv(&outcome.results));
            eprintln!("artifacts in {}", outcome.workdir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
