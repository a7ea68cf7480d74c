//! SkipGram training with hierarchical softmax.
//!
//! [`Trainer`] owns the shared parameters (vertex rows `phi`, tree node rows
//! `psi`) and a progress counter. All methods take `&self`, so the same
//! trainer can be driven by one thread (fully deterministic) or by several
//! threads at once without locks.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt::Display;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::hsoftmax::CodeTree;
use crate::matrix::{EmbeddingMatrix, SharedMatrix};
use crate::rng::{self, stream};
use crate::walks::{self, FrequencyTable};
use crate::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    /// Walks generated from a known graph, learning rate decays linearly.
    #[default]
    Batch,
    /// Walks arrive from outside, vocabulary bounded in advance.
    Streaming,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Embedding dimension.
    pub d: usize,
    /// SkipGram window radius.
    pub w: usize,
    /// Walks started per vertex.
    pub gamma: usize,
    /// Maximum walk length.
    pub t: usize,
    pub alpha0: f64,
    pub alpha_min: f64,
    pub workers: usize,
    pub seed: u64,
    pub mode: TrainMode,
    /// Streaming only: if set, decay the learning rate over this many
    /// vertices instead of holding it at `alpha0`.
    pub stream_length: Option<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            d: 128,
            w: 10,
            gamma: 80,
            t: 40,
            alpha0: 0.025,
            alpha_min: 1e-4,
            workers: 1,
            seed: 0,
            mode: TrainMode::Batch,
            stream_length: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("dimension d must be at least 1"));
        }
        if self.w == 0 {
            return Err(invalid("window w must be at least 1"));
        }
        if self.t == 0 {
            return Err(invalid("walk length t must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(invalid("alpha0 must be positive"));
        }
        if !(self.alpha_min >= 0.0 && self.alpha_min <= self.alpha0) {
            return Err(invalid("alpha_min must lie in [0, alpha0]"));
        }
        Ok(())
    }

    /// `gamma * n * t`, the nominal number of vertices a batch run visits.
    pub fn total_expected(&self, n: usize) -> u64 {
        (self.gamma as u64) * (n as u64) * (self.t as u64)
    }
}

/// Progress through a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainState {
    pub vertices_processed: u64,
    pub total_expected: u64,
}

/// `max(alpha_min, alpha0 * (1 - processed / total))`.
pub fn learning_rate(state: &TrainState, config: &TrainConfig) -> f64 {
    if state.total_expected == 0 {
        return config.alpha0;
    }
    let frac = state.vertices_processed as f64 / state.total_expected as f64;
    (config.alpha0 * (1.0 - frac)).max(config.alpha_min)
}

fn init_row(seed: u64, row: usize, out: &mut [f64]) {
    let mut rng = rng::derive(seed, &[stream::INIT, row as u64]);
    let scale = 1.0 / out.len() as f64;
    for x in out {
        // open interval: a draw of exactly 0 would land on the lower bound
        let u = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        *x = (u - 0.5) * scale;
    }
}

/// `n × d` matrix with entries uniform on `(-0.5/d, 0.5/d)`. Row `r` comes
/// from its own stream derived from `(seed, r)`.
pub fn init_embeddings(n: usize, d: usize, seed: u64) -> EmbeddingMatrix {
    let mut m = EmbeddingMatrix::zeros(n, d);
    if d > 0 {
        for r in 0..n {
            init_row(seed, r, m.row_mut(r));
        }
    }
    m
}

/// Per-worker buffers.
#[derive(Debug, Clone)]
pub struct Scratch {
    phi: Vec<f64>,
    delta: Vec<f64>,
    row: Vec<f64>,
}

/// Loss accumulated by an update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub loss: f64,
    pub pairs: u64,
}

impl UpdateStats {
    pub fn mean_loss(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.loss / self.pairs as f64
        }
    }
}

impl core::ops::AddAssign for UpdateStats {
    fn add_assign(&mut self, o: UpdateStats) {
        self.loss += o.loss;
        self.pairs += o.pairs;
    }
}

#[derive(Debug)]
pub struct Trainer {
    phi: SharedMatrix,
    psi: SharedMatrix,
    codes: CodeTree,
    window: usize,
    alpha0: f64,
    alpha_min: f64,
    decay: bool,
    processed: AtomicU64,
    total_expected: u64,
}

impl Trainer {
    /// A trainer over initial vertex rows `phi` and output tree `codes`;
    /// the learning rate decays over `total_expected` vertices.
    pub fn new(phi: &EmbeddingMatrix, codes: CodeTree, config: &TrainConfig, total_expected: u64) -> Result<Self> {
        config.validate()?;
        if phi.dim() != config.d {
            return Err(Error::DimensionMismatch {
                expected: config.d,
                actual: phi.dim(),
            });
        }
        Ok(Trainer {
            psi: SharedMatrix::zeros(codes.n_internal(), config.d),
            phi: SharedMatrix::from(phi),
            codes,
            window: config.w,
            alpha0: config.alpha0,
            alpha_min: config.alpha_min,
            decay: true,
            processed: AtomicU64::new(0),
            total_expected,
        })
    }

    /// The batch setup for `g`: uniform initial rows, a Huffman tree built
    /// from vertex degrees, and a horizon of `gamma * n * t` vertices.
    pub fn for_graph(g: &Graph, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let n = g.n_vertices();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let codes = CodeTree::huffman(&degree_frequencies(g))?;
        let phi = init_embeddings(n, config.d, config.seed);
        Trainer::new(&phi, codes, config, config.total_expected(n))
    }

    /// Holds the learning rate at `alpha0`.
    pub fn with_fixed_rate(mut self) -> Self {
        self.decay = false;
        self
    }

    pub fn codes(&self) -> &CodeTree {
        &self.codes
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn state(&self) -> TrainState {
        TrainState {
            vertices_processed: self.processed.load(Ordering::Relaxed),
            total_expected: self.total_expected,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        if !self.decay {
            return self.alpha0;
        }
        let config = TrainConfig {
            alpha0: self.alpha0,
            alpha_min: self.alpha_min,
            ..TrainConfig::default()
        };
        learning_rate(&self.state(), &config)
    }

    pub fn scratch(&self) -> Scratch {
        let d = self.dim();
        Scratch {
            phi: alloc::vec![0.0; d],
            delta: alloc::vec![0.0; d],
            row: alloc::vec![0.0; d],
        }
    }

    /// One SkipGram sweep over `walk` at a fixed rate.
    ///
    /// For every position `j` and every other position `k` within `w` of it,
    /// takes one SGD step on `-ln Pr(walk[k] | phi(walk[j]))`, updating the
    /// path rows and `phi(walk[j])` immediately.
    pub fn skipgram_update(&self, walk: &[VertexId], alpha: f64, scratch: &mut Scratch) -> Result<UpdateStats> {
        let limit = self.codes.n_leaves().min(self.phi.rows());
        if let Some(&v) = walk.iter().find(|&&v| v as usize >= limit) {
            return Err(Error::UnassignedLeaf(v));
        }
        let mut stats = UpdateStats::default();
        let Scratch { phi, delta, row } = scratch;
        for (j, &center) in walk.iter().enumerate() {
            let lo = j.saturating_sub(self.window);
            let hi = (j + self.window + 1).min(walk.len());
            if hi - lo < 2 {
                continue;
            }
            self.phi.load_row(center as usize, phi);
            for (k, &context) in walk[lo..hi].iter().enumerate() {
                if lo + k == j {
                    continue;
                }
                delta.iter_mut().for_each(|x| *x = 0.0);
                stats.loss += self.codes.descend(&self.psi, phi, context, alpha, delta, row);
                stats.pairs += 1;
                crate::math::axpy(1.0, delta, phi);
                self.phi.store_row(center as usize, phi);
            }
        }
        Ok(stats)
    }

    /// Updates on `walk` at the current rate, then advances the progress
    /// counter by its length.
    pub fn process_walk(&self, walk: &[VertexId], scratch: &mut Scratch) -> Result<UpdateStats> {
        let stats = self.skipgram_update(walk, self.learning_rate(), scratch)?;
        self.processed.fetch_add(walk.len() as u64, Ordering::Relaxed);
        Ok(stats)
    }

    /// One pass of walks over `g` in the shuffled order of pass `pass`.
    pub fn run_pass(&self, g: &Graph, config: &TrainConfig, pass: usize, scratch: &mut Scratch) -> Result<UpdateStats> {
        let mut stats = UpdateStats::default();
        for root in walks::pass_order(g.n_vertices(), config.seed, pass) {
            let walk = walks::rooted_walk(g, root, config.t, config.seed, pass)?;
            stats += self.process_walk(&walk, scratch)?;
        }
        Ok(stats)
    }

    pub fn embeddings(&self) -> EmbeddingMatrix {
        self.phi.snapshot()
    }

    pub fn node_vectors(&self) -> EmbeddingMatrix {
        self.psi.snapshot()
    }

    pub(crate) fn phi(&self) -> &SharedMatrix {
        &self.phi
    }
}

/// Vertex degrees as Huffman weights; random-walk visit rates are
/// proportional to degree on undirected graphs.
pub fn degree_frequencies(g: &Graph) -> FrequencyTable {
    FrequencyTable::from_counts((0..g.n_vertices() as VertexId).map(|v| g.degree(v) as u64).collect())
}

/// Serial batch training: `gamma` passes over `g`, one walk per vertex per
/// pass. Deterministic in `(g, config)`.
pub fn train(g: &Graph, config: &TrainConfig) -> Result<EmbeddingMatrix> {
    if config.mode != TrainMode::Batch {
        return Err(invalid("train requires batch mode"));
    }
    let trainer = Trainer::for_graph(g, config)?;
    let mut scratch = trainer.scratch();
    for pass in 0..config.gamma {
        trainer.run_pass(g, config, pass, &mut scratch)?;
    }
    Ok(trainer.embeddings())
}

/// Serial training on a fixed corpus, in order, with a decaying rate.
pub fn train_corpus<'a, I>(trainer: &Trainer, corpus: I) -> Result<UpdateStats>
where
    I: IntoIterator<Item = &'a [VertexId]>,
{
    let mut scratch = trainer.scratch();
    let mut stats = UpdateStats::default();
    for walk in corpus {
        stats += trainer.process_walk(walk, &mut scratch)?;
    }
    Ok(stats)
}

/// Online trainer over a bounded vocabulary of external keys.
///
/// The output tree is balanced over `n_max` leaves; a key claims the next free
/// leaf and a freshly initialized row the first time it appears. The rate is
/// held at `alpha0` unless `stream_length` is configured.
#[derive(Debug)]
pub struct StreamingTrainer<K> {
    trainer: Trainer,
    vocab: BTreeMap<K, VertexId>,
    keys: Vec<K>,
    seed: u64,
    n_max: usize,
    scratch: Scratch,
    ids: Vec<VertexId>,
}

impl<K: Ord + Clone + Display> StreamingTrainer<K> {
    pub fn new(config: &TrainConfig, n_max: usize) -> Result<Self> {
        if config.mode != TrainMode::Streaming {
            return Err(invalid("streaming trainer requires streaming mode"));
        }
        let codes = CodeTree::balanced(n_max)?;
        let phi = EmbeddingMatrix::zeros(n_max, config.d);
        let mut trainer = Trainer::new(&phi, codes, config, config.stream_length.unwrap_or(0))?;
        if config.stream_length.is_none() {
            trainer = trainer.with_fixed_rate();
        }
        let scratch = trainer.scratch();
        Ok(StreamingTrainer {
            trainer,
            vocab: BTreeMap::new(),
            keys: Vec::new(),
            seed: config.seed,
            n_max,
            scratch,
            ids: Vec::new(),
        })
    }

    /// Leaf of `key`, claiming a new one on first sight.
    pub fn assign(&mut self, key: &K) -> Result<VertexId> {
        if let Some(&id) = self.vocab.get(key) {
            return Ok(id);
        }
        if self.keys.len() == self.n_max {
            return Err(Error::VocabularyOverflow {
                n_max: self.n_max,
                vertex: key.to_string(),
            });
        }
        let id = self.keys.len() as VertexId;
        let mut row = alloc::vec![0.0; self.trainer.dim()];
        init_row(self.seed, id as usize, &mut row);
        self.trainer.phi().store_row(id as usize, &row);
        self.vocab.insert(key.clone(), id);
        self.keys.push(key.clone());
        Ok(id)
    }

    pub fn feed(&mut self, walk: &[K]) -> Result<UpdateStats> {
        let mut ids = core::mem::take(&mut self.ids);
        ids.clear();
        for key in walk {
            match self.assign(key) {
                Ok(id) => ids.push(id),
                Err(e) => {
                    self.ids = ids;
                    return Err(e);
                }
            }
        }
        let stats = self.trainer.process_walk(&ids, &mut self.scratch);
        self.ids = ids;
        stats
    }

    pub fn n_assigned(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn trainer(&self) -> &Trainer {
        &self.trainer
    }

    /// Copy of the rows assigned so far, in first-seen order.
    pub fn snapshot(&self) -> EmbeddingMatrix {
        let mut m = self.trainer.embeddings();
        m.truncate(self.keys.len());
        m
    }

    pub fn finish(self) -> (EmbeddingMatrix, Vec<K>) {
        let m = self.snapshot();
        (m, self.keys)
    }
}

/// Trains on walks in arrival order without a graph.
pub fn train_streaming<K, I, W>(walks: I, config: &TrainConfig, n_max: usize) -> Result<(EmbeddingMatrix, Vec<K>)>
where
    K: Ord + Clone + Display,
    I: IntoIterator<Item = W>,
    W: AsRef<[K]>,
{
    let mut st = StreamingTrainer::new(config, n_max)?;
    for walk in walks {
        st.feed(walk.as_ref())?;
    }
    Ok(st.finish())
}
