//! The `walkembed` command line.
//!
//! Every random choice derives from `--seed`: graph generation, walk roots
//! and steps (per pass and root), embedding initialization (per row) and
//! evaluation splits (per repetition) each use their own stream of it.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use walkembed_core::eval::{self, SplitConfig, SweepGrid};
use walkembed_core::walks::{self, FrequencyTable};
use walkembed_core::{generate, init_embeddings, math, CodeTree, IdMap, TrainConfig, TrainMode, Trainer};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::formats::{self, Dataset};
use crate::output::{open, write_atomic};
use crate::parallel::{self, WORKERS_ENV};
use crate::report;
use crate::streaming::{self, SnapshotPolicy};

#[derive(Debug, Parser)]
#[command(name = "walkembed", version, about = "Vertex embeddings from truncated random walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic or built-in graph (and its labels).
    Generate(GenerateArgs),
    /// Write a random-walk corpus for a graph.
    Walk(WalkArgs),
    /// Learn embeddings from a graph or a walk corpus.
    Train(TrainArgs),
    /// Score embeddings on multi-label classification.
    Eval(EvalArgs),
    /// Train and evaluate over a grid of dimensions and walk counts.
    Sweep(SweepArgs),
    /// Rank/frequency table and power-law slope of a walk corpus.
    Diagnose(DiagnoseArgs),
    /// Two-coordinate scatter data for plotting.
    PlotExport(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    /// Stochastic block model.
    Sbm,
    /// Preferential attachment.
    Ba,
    /// Zachary's karate club with its four modularity communities.
    Karate,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    /// Edge-list output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Label output path (sbm and karate).
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    /// Block sizes for sbm.
    #[arg(long, value_delimiter = ',', default_value = "100,100,100,100")]
    pub blocks: Vec<usize>,
    /// Within-block edge probability for sbm.
    #[arg(long, default_value_t = 0.1)]
    pub p_in: f64,
    /// Cross-block edge probability for sbm.
    #[arg(long, default_value_t = 0.005)]
    pub p_out: f64,
    /// Vertex count for ba.
    #[arg(short = 'n', long, default_value_t = 10_000)]
    pub n: usize,
    /// Edges per new vertex for ba.
    #[arg(short = 'm', long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Edge-list input.
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as directed.
    #[arg(long)]
    pub directed: bool,
    /// Walks started per vertex (reference setting: 80).
    #[arg(long, default_value_t = 80)]
    pub gamma: usize,
    /// Maximum walk length (reference setting: 40).
    #[arg(short = 't', long = "walk-length", default_value_t = 40)]
    pub t: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corpus output path.
    #[arg(long)]
    pub out: PathBuf,
}

/// Training hyperparameters.
#[derive(Debug, Clone, Args)]
pub struct TrainFlags {
    /// Embedding dimension (reference setting: 128).
    #[arg(short = 'd', long = "dim", default_value_t = 128)]
    pub d: usize,
    /// SkipGram window radius (reference setting: 10).
    #[arg(short = 'w', long = "window", default_value_t = 10)]
    pub w: usize,
    /// Walks started per vertex (reference setting: 80).
    #[arg(long, default_value_t = 80)]
    pub gamma: usize,
    /// Maximum walk length (reference setting: 40).
    #[arg(short = 't', long = "walk-length", default_value_t = 40)]
    pub t: usize,
    /// Initial learning rate (reference setting: 0.025).
    #[arg(long, default_value_t = 0.025)]
    pub alpha0: f64,
    /// Learning-rate floor of the linear decay.
    #[arg(long, default_value_t = 1e-4)]
    pub alpha_min: f64,
    /// Worker threads; defaults to $WALKEMBED_WORKERS, else 1.
    #[arg(long, env = WORKERS_ENV, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainFlags {
    pub fn config(&self, mode: TrainMode, stream_length: Option<u64>) -> TrainConfig {
        TrainConfig {
            d: self.d,
            w: self.w,
            gamma: self.gamma,
            t: self.t,
            alpha0: self.alpha0,
            alpha_min: self.alpha_min,
            workers: self.workers,
            seed: self.seed,
            mode,
            stream_length,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["graph", "corpus"])))]
pub struct TrainArgs {
    /// Edge-list input; walks are generated in-process.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Walk-corpus input; walks are used as given.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    /// Train online from the corpus with a bounded vocabulary.
    #[arg(long, requires = "corpus", requires = "n_max")]
    pub streaming: bool,
    /// Upper bound on distinct vertices in streaming mode.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Streaming: decay the rate over this many vertices instead of holding
    /// it constant.
    #[arg(long, requires = "streaming")]
    pub stream_length: Option<u64>,
    /// Streaming: flush embeddings to --snapshot-path after every N walks.
    #[arg(long, requires = "snapshot_path")]
    pub snapshot_every: Option<usize>,
    #[arg(long)]
    pub snapshot_path: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Embedding output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Training ratios.
    #[arg(long = "t-r", value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub t_r: Vec<f64>,
    /// Random splits per ratio (reference setting: 10).
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// L2 regularization strength of the logistic models.
    #[arg(long, default_value_t = eval::DEFAULT_REG)]
    pub reg: f64,
    /// Report path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub directed: bool,
    /// Embedding dimensions to try.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub dims: Vec<usize>,
    /// Walks-per-vertex values to try.
    #[arg(long, value_delimiter = ',', default_value = "1,3,10,30,50,90")]
    pub gammas: Vec<usize>,
    /// Training ratios.
    #[arg(long = "t-r", value_delimiter = ',', default_value = "0.1,0.5,0.9")]
    pub t_r: Vec<f64>,
    /// SkipGram window radius (reference setting: 10).
    #[arg(short = 'w', long = "window", default_value_t = 10)]
    pub w: usize,
    /// Maximum walk length (reference setting: 40).
    #[arg(short = 't', long = "walk-length", default_value_t = 40)]
    pub t: usize,
    #[arg(long, default_value_t = 0.025)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = eval::DEFAULT_REG)]
    pub reg: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Also report the rank correlation between visit count and degree.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Two coordinates to plot, e.g. 0,1; required unless d = 2.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Walk(a) => cmd_walk(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::PlotExport(a) => cmd_plot_export(&a),
    }
}

/// Writes to `path` atomically, or to stdout.
fn emit<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => write_atomic(p, |w| body(w)),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn load_graph(path: &Path, directed: bool) -> Result<(walkembed_core::Graph, IdMap)> {
    formats::load_edge_list(open(path)?, directed)
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let (graph, ids, labels) = match a.kind {
        GraphKind::Sbm => {
            let (g, l) = generate::sbm(&a.blocks, a.p_in, a.p_out, a.seed)?;
            let ids = IdMap::numeric(g.n_vertices());
            (g, ids, Some(l))
        }
        GraphKind::Ba => {
            let g = generate::preferential_attachment(a.n, a.m, a.seed)?;
            let ids = IdMap::numeric(g.n_vertices());
            (g, ids, None)
        }
        GraphKind::Karate => {
            let Dataset { graph, ids, labels, .. } = fixtures::karate();
            (graph, ids, Some(labels))
        }
    };
    if a.labels_out.is_some() && labels.is_none() {
        return Err(Error::Usage("this graph kind has no labels".into()));
    }
    write_atomic(&a.out, |w| formats::write_edge_list(w, &graph, &ids))?;
    if let (Some(path), Some(labels)) = (&a.labels_out, &labels) {
        if let Err(e) = write_atomic(path, |w| formats::write_labels(w, labels, &ids)) {
            let _ = std::fs::remove_file(&a.out);
            return Err(e);
        }
    }
    Ok(())
}

fn cmd_walk(a: &WalkArgs) -> Result<()> {
    let config = walks::WalkConfig {
        gamma: a.gamma,
        t: a.t,
        seed: a.seed,
    };
    config.validate()?;
    let (g, ids) = load_graph(&a.graph, a.directed)?;
    write_atomic(&a.out, |w| {
        for pass in 0..config.gamma {
            let mut failed = None;
            walks::generate_pass(&g, config.t, config.seed, pass, |walk| {
                if failed.is_none() {
                    failed = formats::write_walk(w, &walk, &ids).err();
                }
            })?;
            if let Some(e) = failed {
                return Err(e);
            }
        }
        Ok(())
    })
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mode = if a.streaming {
        TrainMode::Streaming
    } else {
        TrainMode::Batch
    };
    let config = a.train.config(mode, a.stream_length);
    config.validate()?;

    let (phi, names) = if a.streaming {
        let corpus = a.corpus.as_deref().expect("clap enforces --corpus");
        let n_max = a.n_max.expect("clap enforces --n-max");
        let policy = SnapshotPolicy {
            every: a.snapshot_every,
            path: a.snapshot_path.clone(),
        };
        let r = streaming::train_stream(open(corpus)?, &config, n_max, &policy)?;
        (r.embeddings, r.names)
    } else if let Some(graph) = &a.graph {
        let (g, ids) = load_graph(graph, a.directed)?;
        let phi = parallel::train_parallel(&g, &config)?;
        (phi, ids.names().to_vec())
    } else {
        let corpus = a.corpus.as_deref().expect("clap enforces an input");
        let (walks, ids) = formats::read_walks_interned(open(corpus)?)?;
        let mut freqs = FrequencyTable::with_vertices(ids.len());
        for w in &walks {
            freqs.add_walk(w);
        }
        let codes = CodeTree::huffman(&freqs)?;
        let init = init_embeddings(ids.len(), config.d, config.seed);
        let trainer = Trainer::new(&init, codes, &config, freqs.total())?;
        parallel::train_walks(&trainer, &walks, config.workers)?;
        (trainer.embeddings(), ids.names().to_vec())
    };
    if !phi.is_finite() {
        return Err(Error::Usage("training diverged to non-finite values".into()));
    }
    write_atomic(&a.out, |w| formats::save_embeddings(w, &phi, &names))
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    for &t_r in &a.t_r {
        SplitConfig {
            t_r,
            repetitions: a.reps,
            seed: a.seed,
        }
        .validate()?;
    }
    let (phi, names) = formats::load_embeddings(open(&a.embeddings)?)?;
    let mut ids = IdMap::new();
    for n in &names {
        ids.intern(n);
    }
    let file = formats::parse_labels(open(&a.labels)?)?;
    if let Some(missing) = file.vertices().find(|v| ids.get(v).is_none()) {
        return Err(Error::Usage(format!(
            "vertex {missing:?} has labels but no embedding"
        )));
    }
    let labels = file.resolve(&ids)?;
    let mut reports = Vec::with_capacity(a.t_r.len());
    for &t_r in &a.t_r {
        let split = SplitConfig {
            t_r,
            repetitions: a.reps,
            seed: a.seed,
        };
        reports.push(eval::evaluate(&phi, &labels, &split, a.reg)?);
    }
    emit(a.out.as_deref(), |w| {
        writeln!(w, "{}", report::EVAL_HEADER)?;
        for r in &reports {
            report::write_eval_rows(w, phi.dim(), None, r)?;
        }
        Ok(())
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let base = TrainConfig {
        w: a.w,
        t: a.t,
        alpha0: a.alpha0,
        alpha_min: a.alpha_min,
        seed: a.seed,
        ..TrainConfig::default()
    };
    base.validate()?;
    if let Some(&d) = a.dims.iter().find(|&&d| d == 0) {
        return Err(Error::Usage(format!("invalid dimension {d}")));
    }
    let grid = SweepGrid {
        dims: a.dims.clone(),
        gammas: a.gammas.clone(),
        t_rs: a.t_r.clone(),
    };
    let split = SplitConfig {
        t_r: a.t_r.first().copied().unwrap_or(0.5),
        repetitions: a.reps,
        seed: a.seed,
    };
    for &t_r in &a.t_r {
        SplitConfig { t_r, ..split }.validate()?;
    }
    let ds = formats::load_dataset(open(&a.graph)?, open(&a.labels)?, a.directed)?;
    let cells = eval::sweep(&ds.graph, &ds.labels, &grid, &base, &split, a.reg)?;
    emit(a.out.as_deref(), |w| report::write_sweep(w, &cells))
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let (freqs, ids, corr) = match &a.graph {
        Some(path) => {
            let (g, ids) = load_graph(path, a.directed)?;
            let walks = formats::read_walks_bound(open(&a.corpus)?, &ids)?;
            let mut freqs = FrequencyTable::with_vertices(g.n_vertices());
            for w in &walks {
                freqs.add_walk(w);
            }
            let visits: Vec<f64> = freqs.counts().iter().map(|&c| c as f64).collect();
            let degrees: Vec<f64> = (0..g.n_vertices() as u32).map(|v| g.degree(v) as f64).collect();
            let rho = math::spearman(&visits, &degrees);
            (freqs, ids, Some(rho))
        }
        None => {
            let (walks, ids) = formats::read_walks_interned(open(&a.corpus)?)?;
            let freqs = walks::count_frequencies(walks.iter().map(|w| &w[..]));
            (freqs, ids, None)
        }
    };
    let fit = walks::power_law_diagnostic(&freqs);
    emit(a.out.as_deref(), |w| report::write_rank_frequency(w, &fit, &ids, corr))
}

fn cmd_plot_export(a: &PlotArgs) -> Result<()> {
    let (phi, names) = formats::load_embeddings(open(&a.embeddings)?)?;
    let dims = match a.dims.as_deref() {
        None => None,
        Some(&[i, j]) => Some((i, j)),
        Some(_) => return Err(Error::Usage("--dims takes exactly two coordinates, e.g. 0,1".into())),
    };
    let labels = match &a.labels {
        Some(path) => {
            let (table, ids) = formats::load_labels(open(path)?)?;
            let names = formats::parse_labels(open(path)?)?.label_names();
            Some((table, ids, names))
        }
        None => None,
    };
    emit(a.out.as_deref(), |w| {
        report::write_plot(
            w,
            &phi,
            &names,
            dims,
            labels.as_ref().map(|(t, i, n)| (t, i, n.as_slice())),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_shows_reference_defaults() {
        let help = Cli::command()
            .find_subcommand_mut("train")
            .unwrap()
            .render_long_help()
            .to_string();
        for needle in ["[default: 128]", "[default: 10]", "[default: 80]", "[default: 40]", "[default: 0.025]"] {
            assert!(help.contains(needle), "missing {needle}");
        }
    }
}
