//! Truncated random walks and vertex-frequency accounting.

use alloc::vec::Vec;
use core::ops::Deref;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::math;
use crate::rng::{self, stream, Rng};
use crate::VertexId;

/// A sequence of vertices; generated walks follow graph arcs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Walk(pub Vec<VertexId>);

impl Deref for Walk {
    type Target = [VertexId];

    fn deref(&self) -> &[VertexId] {
        &self.0
    }
}

impl From<Vec<VertexId>> for Walk {
    fn from(v: Vec<VertexId>) -> Self {
        Walk(v)
    }
}

impl Walk {
    /// True if every consecutive pair is an arc of `g`.
    pub fn follows(&self, g: &Graph) -> bool {
        self.0.windows(2).all(|p| g.has_arc(p[0], p[1]))
    }
}

/// Corpus shape: `gamma` passes over the vertices, walks of at most `t`
/// vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub gamma: usize,
    pub t: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 {
            return Err(invalid("walks per vertex must be at least 1"));
        }
        if self.t == 0 {
            return Err(invalid("walk length must be at least 1"));
        }
        Ok(())
    }
}

/// A walk of at most `t` vertices rooted at `root`, each step uniform over
/// the neighbors of the current vertex. Stops early at a vertex without
/// out-arcs.
pub fn random_walk(g: &Graph, root: VertexId, t: usize, rng: &mut Rng) -> Result<Walk> {
    if !g.contains(root) {
        return Err(Error::UnknownVertex(root));
    }
    let mut walk = Vec::with_capacity(t);
    walk.push(root);
    let mut cur = root;
    while walk.len() < t {
        let next = g.neighbors(cur);
        if next.is_empty() {
            break;
        }
        cur = next[rng.random_range(0..next.len())];
        walk.push(cur);
    }
    Ok(Walk(walk))
}

/// The walk rooted at `root` during pass `pass`; its generator is derived
/// from `(seed, pass, root)` alone.
pub fn rooted_walk(g: &Graph, root: VertexId, t: usize, seed: u64, pass: usize) -> Result<Walk> {
    let mut rng = rng::derive(seed, &[stream::WALK, pass as u64, root as u64]);
    random_walk(g, root, t, &mut rng)
}

/// The shuffled root order of pass `pass`.
pub fn pass_order(n: usize, seed: u64, pass: usize) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    order.shuffle(&mut rng::derive(seed, &[stream::SHUFFLE, pass as u64]));
    order
}

/// Emits one walk per vertex, in the shuffled order of pass `pass`.
pub fn generate_pass<F>(g: &Graph, t: usize, seed: u64, pass: usize, mut sink: F) -> Result<()>
where
    F: FnMut(Walk),
{
    for root in pass_order(g.n_vertices(), seed, pass) {
        sink(rooted_walk(g, root, t, seed, pass)?);
    }
    Ok(())
}

/// The whole corpus, pass after pass.
pub fn generate_corpus(g: &Graph, config: &WalkConfig) -> Result<Vec<Walk>> {
    config.validate()?;
    let mut corpus = Vec::with_capacity(config.gamma * g.n_vertices());
    for pass in 0..config.gamma {
        generate_pass(g, config.t, config.seed, pass, |w| corpus.push(w))?;
    }
    Ok(corpus)
}

/// Occurrence counts per vertex id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// A table pre-sized for `n` vertices, all zero.
    pub fn with_vertices(n: usize) -> Self {
        FrequencyTable {
            counts: alloc::vec![0; n],
            total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        FrequencyTable { counts, total }
    }

    pub fn add(&mut self, v: VertexId, n: u64) {
        let v = v as usize;
        if v >= self.counts.len() {
            self.counts.resize(v + 1, 0);
        }
        self.counts[v] += n;
        self.total += n;
    }

    pub fn add_walk(&mut self, walk: &[VertexId]) {
        for &v in walk {
            self.add(v, 1);
        }
    }

    pub fn merge(&mut self, other: &FrequencyTable) {
        for (v, &c) in other.counts.iter().enumerate() {
            if c > 0 {
                self.add(v as VertexId, c);
            }
        }
    }

    pub fn count(&self, v: VertexId) -> u64 {
        self.counts.get(v as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of vertex slots, including zero-count ones.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Vertices with a nonzero count.
    pub fn support(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Counts vertex occurrences across a corpus.
pub fn count_frequencies<'a, I>(corpus: I) -> FrequencyTable
where
    I: IntoIterator<Item = &'a [VertexId]>,
{
    let mut table = FrequencyTable::new();
    for walk in corpus {
        table.add_walk(walk);
    }
    table
}

/// One row of the rank/frequency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankedVertex {
    pub rank: usize,
    pub vertex: VertexId,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    /// Vertices with nonzero count, most frequent first; ranks start at 1.
    pub ranked: Vec<RankedVertex>,
    /// Least-squares slope of log(count) against log(rank) inside the fit
    /// window.
    pub slope: f64,
    /// Half-open index range into `ranked` used for the fit.
    pub window: (usize, usize),
}

/// Rank/frequency table plus a log-log slope fitted between the 10% and 90%
/// rank quantiles. Falls back to every point when the window has fewer than
/// two; the slope is zero with fewer than two points overall.
pub fn power_law_diagnostic(freqs: &FrequencyTable) -> PowerLawFit {
    let mut ranked: Vec<(VertexId, u64)> = freqs
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(v, &c)| (v as VertexId, c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let ranked: Vec<RankedVertex> = ranked
        .into_iter()
        .enumerate()
        .map(|(i, (vertex, count))| RankedVertex {
            rank: i + 1,
            vertex,
            count,
        })
        .collect();

    let m = ranked.len();
    let mut window = (m / 10, (9 * m).div_ceil(10));
    if window.1 - window.0 < 2 {
        window = (0, m);
    }
    let slope = if window.1 - window.0 < 2 {
        0.0
    } else {
        let pts = &ranked[window.0..window.1];
        let xs: Vec<f64> = pts.iter().map(|r| libm::log(r.rank as f64)).collect();
        let ys: Vec<f64> = pts.iter().map(|r| libm::log(r.count as f64)).collect();
        math::least_squares_slope(&xs, &ys)
    };
    PowerLawFit {
        ranked,
        slope,
        window,
    }
}
