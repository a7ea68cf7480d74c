//! Multi-label node classification on learned embeddings.
//!
//! Labeled vertices are split at random into a training portion of size
//! `ceil(t_r * n_labeled)` and a test portion. Features are standardized with
//! training statistics, one L2-regularized logistic model is fitted per label,
//! and each test vertex is assigned its `k` most probable labels, `k` being
//! the number of labels it truly carries.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, LabelTable};
use crate::math::{self, log_sigmoid, sigmoid};
use crate::matrix::EmbeddingMatrix;
use crate::rng::{self, stream};
use crate::trainer::{self, TrainConfig, Trainer};
use crate::walks::{self, WalkConfig};
use crate::VertexId;

pub const DEFAULT_REG: f64 = 1.0;
const GRAD_TOL: f64 = 1e-5;
const MAX_ITER: usize = 500;

/// Result of fitting one binary logistic model.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// Feature weights followed by the bias.
    pub weights: Vec<f64>,
    /// Objective value at every iterate, starting from zero weights.
    pub losses: Vec<f64>,
    pub converged: bool,
}

fn objective(x: &EmbeddingMatrix, y: &[bool], w: &[f64], reg: f64) -> f64 {
    let d = x.dim();
    let mut f = 0.5 * reg * math::dot(&w[..d], &w[..d]);
    for (row, &yi) in x.iter_rows().zip(y) {
        let z = math::dot(&w[..d], row) + w[d];
        let s = if yi { 1.0 } else { -1.0 };
        f -= log_sigmoid(s * z);
    }
    f
}

/// In-place Cholesky solve of `a x = b` for symmetric positive definite `a`
/// (row-major, `n × n`). Returns false if `a` is not positive definite.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return false;
        }
        let diag = libm::sqrt(diag);
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / diag;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

/// Minimizes `reg/2 |w|^2 + sum_i ln(1 + exp(-s_i (w.x_i + b)))` (the bias
/// is not penalized) by Newton's method with Armijo backtracking.
/// Stops once the gradient norm drops below 1e-5 or after 500 iterations.
pub fn fit_logistic(x: &EmbeddingMatrix, y: &[bool], reg: f64) -> LogisticFit {
    let d = x.dim();
    let p = d + 1;
    let mut w = alloc::vec![0.0; p];
    let mut f = objective(x, y, &w, reg);
    let mut losses = alloc::vec![f];
    let mut grad = alloc::vec![0.0; p];
    let mut hess = alloc::vec![0.0; p * p];
    let mut xt = alloc::vec![0.0; p];
    let mut trial = alloc::vec![0.0; p];
    let mut converged = false;

    for _ in 0..MAX_ITER {
        grad.copy_from_slice(&w);
        grad.iter_mut().for_each(|g| *g *= reg);
        grad[d] = 0.0;
        hess.iter_mut().for_each(|h| *h = 0.0);
        for i in 0..d {
            hess[i * p + i] = reg;
        }
        for (row, &yi) in x.iter_rows().zip(y) {
            xt[..d].copy_from_slice(row);
            xt[d] = 1.0;
            let z = math::dot(&w, &xt);
            let s = if yi { 1.0 } else { -1.0 };
            math::axpy((sigmoid(s * z) - 1.0) * s, &xt, &mut grad);
            let sz = sigmoid(z);
            let curv = sz * (1.0 - sz);
            for i in 0..p {
                let ci = curv * xt[i];
                for j in 0..=i {
                    hess[i * p + j] += ci * xt[j];
                }
            }
        }
        if libm::sqrt(math::dot(&grad, &grad)) < GRAD_TOL {
            converged = true;
            break;
        }
        for i in 0..p {
            for j in 0..i {
                hess[j * p + i] = hess[i * p + j];
            }
        }
        let mut step: Vec<f64> = grad.iter().map(|g| -g).collect();
        if !cholesky_solve(&mut hess, &mut step, p) {
            step = grad.iter().map(|g| -g).collect();
        }
        let slope = math::dot(&grad, &step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..p {
                trial[i] = w[i] + t * step[i];
            }
            let ft = objective(x, y, &trial, reg);
            if ft <= f + 1e-4 * t * slope {
                w.copy_from_slice(&trial);
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no decrease representable in floating point; we are at the optimum
            converged = true;
            break;
        }
        losses.push(f);
    }
    LogisticFit {
        weights: w,
        losses,
        converged,
    }
}

/// One binary logistic model per label.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrModel {
    /// `weights[label]` holds `d` feature weights then the bias.
    pub weights: Vec<Vec<f64>>,
    pub reg: f64,
}

impl OvrModel {
    pub fn n_labels(&self) -> usize {
        self.weights.len()
    }

    /// Positive-class probability of every label for one instance.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        self.weights
            .iter()
            .map(|w| sigmoid(math::dot(&w[..d], x) + w[d]))
            .collect()
    }
}

/// Fits one model per label id in `0..n_labels`.
pub fn fit_ovr(x: &EmbeddingMatrix, y: &[Vec<u32>], n_labels: usize, reg: f64) -> Result<OvrModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let weights = (0..n_labels as u32)
        .map(|label| {
            let target: Vec<bool> = y.iter().map(|set| set.contains(&label)).collect();
            fit_logistic(x, &target, reg).weights
        })
        .collect();
    Ok(OvrModel { weights, reg })
}

/// Indices of the `k` largest scores, ties to the smaller index, returned in
/// ascending order.
fn top_k(scores: &[f64], k: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..scores.len() as u32).collect();
    idx.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// For instance `i`, the `k[i]` labels of highest predicted probability.
pub fn predict(model: &OvrModel, x: &EmbeddingMatrix, k: &[usize]) -> Vec<Vec<u32>> {
    x.iter_rows()
        .zip(k)
        .map(|(row, &ki)| top_k(&model.probabilities(row), ki))
        .collect()
}

#[derive(Debug, Default, Clone, Copy)]
struct Confusion {
    tp: u64,
    fp: u64,
    fn_: u64,
}

impl Confusion {
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

fn confusion(pred: &[Vec<u32>], truth: &[Vec<u32>], n_labels: usize) -> Vec<Confusion> {
    let n = pred
        .iter()
        .chain(truth)
        .flatten()
        .map(|&l| l as usize + 1)
        .max()
        .unwrap_or(0)
        .max(n_labels);
    let mut c = alloc::vec![Confusion::default(); n];
    for (p, t) in pred.iter().zip(truth) {
        for &l in p {
            if t.contains(&l) {
                c[l as usize].tp += 1;
            } else {
                c[l as usize].fp += 1;
            }
        }
        for &l in t {
            if !p.contains(&l) {
                c[l as usize].fn_ += 1;
            }
        }
    }
    c
}

/// F1 of the confusion counts pooled over all labels.
pub fn micro_f1(pred: &[Vec<u32>], truth: &[Vec<u32>]) -> f64 {
    let total = confusion(pred, truth, 0)
        .into_iter()
        .fold(Confusion::default(), |a, c| Confusion {
            tp: a.tp + c.tp,
            fp: a.fp + c.fp,
            fn_: a.fn_ + c.fn_,
        });
    total.f1()
}

/// Mean per-label F1 over the labels appearing in `pred` or `truth`.
pub fn macro_f1(pred: &[Vec<u32>], truth: &[Vec<u32>]) -> f64 {
    macro_f1_over(pred, truth, 0)
}

/// Mean per-label F1 over label ids `0..n_labels` (extended to cover any id
/// seen). Labels never true and never predicted score zero.
pub fn macro_f1_over(pred: &[Vec<u32>], truth: &[Vec<u32>], n_labels: usize) -> f64 {
    let c = confusion(pred, truth, n_labels);
    if c.is_empty() {
        return 0.0;
    }
    c.iter().map(Confusion::f1).sum::<f64>() / c.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    /// Fraction of labeled vertices used for training.
    pub t_r: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_r > 0.0 && self.t_r < 1.0) {
            return Err(invalid("training ratio must lie in (0, 1)"));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        Ok(())
    }

    /// `(train, test)` sizes for `n_labeled` vertices.
    pub fn sizes(&self, n_labeled: usize) -> Result<(usize, usize)> {
        // tolerate representation error such as 0.1 * 30 = 3.0000000000000004
        let train = libm::ceil(self.t_r * n_labeled as f64 - 1e-9).max(0.0) as usize;
        let train = train.min(n_labeled);
        let test = n_labeled - train;
        if train == 0 || test == 0 {
            return Err(Error::DegenerateSplit { train, test });
        }
        Ok((train, test))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        Summary {
            mean: math::mean(xs),
            std: math::std_dev(xs),
        }
    }
}

/// Scores of one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunScores {
    pub micro: f64,
    pub macro_: f64,
    pub majority_micro: f64,
    pub majority_macro: f64,
}

/// Scores at one training ratio, aggregated over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub t_r: f64,
    pub micro: Summary,
    pub macro_: Summary,
    pub majority_micro: Summary,
    pub majority_macro: Summary,
    pub runs: Vec<RunScores>,
}

impl EvalReport {
    /// `(metric name, summary)` pairs in a fixed order.
    pub fn metrics(&self) -> [(&'static str, Summary); 4] {
        [
            ("micro_f1", self.micro),
            ("macro_f1", self.macro_),
            ("majority_micro_f1", self.majority_micro),
            ("majority_macro_f1", self.majority_macro),
        ]
    }
}

/// Per-dimension mean and scale fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &EmbeddingMatrix) -> Self {
        let d = x.dim();
        let n = x.rows().max(1) as f64;
        let mut mean = alloc::vec![0.0; d];
        for row in x.iter_rows() {
            math::axpy(1.0 / n, row, &mut mean);
        }
        let mut var = alloc::vec![0.0; d];
        for row in x.iter_rows() {
            for c in 0..d {
                var[c] += (row[c] - mean[c]) * (row[c] - mean[c]) / n;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| if v > 0.0 { 1.0 / libm::sqrt(v) } else { 1.0 })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &EmbeddingMatrix) -> EmbeddingMatrix {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) * self.scale[c];
            }
        }
        out
    }
}

/// The training split's most frequent labels, most frequent first, ties to
/// the smaller id.
fn majority_order(train_sets: &[&[u32]], n_labels: usize) -> Vec<u32> {
    let mut counts = alloc::vec![0u64; n_labels];
    for set in train_sets {
        for &l in *set {
            counts[l as usize] += 1;
        }
    }
    let mut order: Vec<u32> = (0..n_labels as u32).collect();
    order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
    order
}

/// Repeated random-split evaluation of `phi` against `labels`, with the
/// majority baseline scored on the same splits.
pub fn evaluate(phi: &EmbeddingMatrix, labels: &LabelTable, split: &SplitConfig, reg: f64) -> Result<EvalReport> {
    split.validate()?;
    let labeled = labels.labeled();
    if let Some(&v) = labeled.iter().find(|&&v| v as usize >= phi.rows()) {
        return Err(Error::UnknownVertex(v));
    }
    let (n_train, _) = split.sizes(labeled.len())?;
    let n_labels = labels.n_labels();

    let mut runs = Vec::with_capacity(split.repetitions);
    for rep in 0..split.repetitions {
        let mut order: Vec<VertexId> = labeled.clone();
        order.shuffle(&mut rng::derive(split.seed, &[stream::SPLIT, rep as u64]));
        let (train, test) = order.split_at(n_train);
        let rows = |vs: &[VertexId]| phi.select_rows(&vs.iter().map(|&v| v as usize).collect::<Vec<_>>());
        let sets = |vs: &[VertexId]| vs.iter().map(|&v| labels.labels(v).to_vec()).collect::<Vec<_>>();

        let (x_train, x_test) = (rows(train), rows(test));
        let scaler = Standardizer::fit(&x_train);
        let (x_train, x_test) = (scaler.transform(&x_train), scaler.transform(&x_test));
        let (y_train, y_test) = (sets(train), sets(test));
        let k: Vec<usize> = y_test.iter().map(Vec::len).collect();

        let model = fit_ovr(&x_train, &y_train, n_labels, reg)?;
        let pred = predict(&model, &x_test, &k);

        let train_sets: Vec<&[u32]> = train.iter().map(|&v| labels.labels(v)).collect();
        let majority = majority_order(&train_sets, n_labels);
        let baseline: Vec<Vec<u32>> = k
            .iter()
            .map(|&ki| {
                let mut p = majority[..ki.min(n_labels)].to_vec();
                p.sort_unstable();
                p
            })
            .collect();

        runs.push(RunScores {
            micro: micro_f1(&pred, &y_test),
            macro_: macro_f1_over(&pred, &y_test, n_labels),
            majority_micro: micro_f1(&baseline, &y_test),
            majority_macro: macro_f1_over(&baseline, &y_test, n_labels),
        });
    }
    let col = |f: fn(&RunScores) -> f64| Summary::of(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(EvalReport {
        t_r: split.t_r,
        micro: col(|r| r.micro),
        macro_: col(|r| r.macro_),
        majority_micro: col(|r| r.majority_micro),
        majority_macro: col(|r| r.majority_macro),
        runs,
    })
}

/// Parameter grid; every axis must be nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub dims: Vec<usize>,
    pub gammas: Vec<usize>,
    pub t_rs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub d: usize,
    pub gamma: usize,
    pub report: EvalReport,
}

/// Trains one model per `(d, gamma)` and evaluates it at every `t_r`.
///
/// One walk corpus of `max(gamma)` passes is generated up front; the first
/// `gamma` passes of it are exactly the walks a `gamma`-pass run would draw,
/// so all cells share it. Other training fields come from `base`; the split
/// seed and repetitions from `split`.
pub fn sweep(
    g: &Graph,
    labels: &LabelTable,
    grid: &SweepGrid,
    base: &TrainConfig,
    split: &SplitConfig,
    reg: f64,
) -> Result<Vec<SweepCell>> {
    if grid.dims.is_empty() || grid.gammas.is_empty() || grid.t_rs.is_empty() {
        return Err(invalid("sweep grid has an empty axis"));
    }
    let max_gamma = *grid.gammas.iter().max().unwrap();
    let corpus = if max_gamma == 0 {
        Vec::new()
    } else {
        walks::generate_corpus(
            g,
            &WalkConfig {
                gamma: max_gamma,
                t: base.t,
                seed: base.seed,
            },
        )?
    };
    let n = g.n_vertices();
    let mut cells = Vec::new();
    for &gamma in &grid.gammas {
        for &d in &grid.dims {
            let config = TrainConfig { d, gamma, ..*base };
            let trainer = Trainer::for_graph(g, &config)?;
            trainer::train_corpus(&trainer, corpus[..gamma * n].iter().map(|w| &w[..]))?;
            let phi = trainer.embeddings();
            for &t_r in &grid.t_rs {
                let report = evaluate(&phi, labels, &SplitConfig { t_r, ..*split }, reg)?;
                cells.push(SweepCell { d, gamma, report });
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn matrix(rows: &[&[f64]]) -> EmbeddingMatrix {
        let d = rows[0].len();
        EmbeddingMatrix::from_vec(rows.len(), d, rows.iter().flat_map(|r| r.iter().copied()).collect()).unwrap()
    }

    #[test]
    fn separable_1d() {
        let x = matrix(&[&[-1.0], &[1.0]]);
        let fit = fit_logistic(&x, &[false, true], 1.0);
        let z = |v: f64| fit.weights[0] * v + fit.weights[1];
        assert!(z(-1.0) < 0.0 && z(1.0) > 0.0);
        assert!(fit.converged);
    }

    #[test]
    fn single_class() {
        let x = matrix(&[&[0.3], &[-2.0], &[1.0]]);
        let model = fit_ovr(&x, &[vec![0], vec![0], vec![0]], 1, 1.0).unwrap();
        for r in x.iter_rows() {
            assert!(model.probabilities(r)[0] > 0.5);
        }
    }

    #[test]
    fn losses_never_increase() {
        let x = matrix(&[&[0.1, 2.0], &[1.0, -1.0], &[-0.5, 0.3], &[2.0, 2.0], &[-1.0, -3.0]]);
        let fit = fit_logistic(&x, &[true, false, true, true, false], 0.1);
        assert!(fit.losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn top_k_rule() {
        let model = OvrModel {
            // zero features: probabilities set by the biases
            weights: vec![vec![0.0, 2.197], vec![0.0, 0.0], vec![0.0, -2.197]],
            reg: 1.0,
        };
        let x = matrix(&[&[1.0], &[1.0], &[1.0]]);
        let pred = predict(&model, &x, &[2, 0, 3]);
        assert_eq!(pred, [vec![0, 1], vec![], vec![0, 1, 2]]);
    }

    #[test]
    fn f1_identities() {
        let truth = vec![vec![0], vec![1, 2], vec![2]];
        assert_eq!(micro_f1(&truth, &truth), 1.0);
        assert_eq!(macro_f1(&truth, &truth), 1.0);
        let disjoint = vec![vec![1], vec![0], vec![0, 1]];
        assert_eq!(micro_f1(&disjoint, &truth), 0.0);
        assert_eq!(macro_f1(&disjoint, &truth), 0.0);
    }

    #[test]
    fn f1_hand_counted() {
        let truth = vec![vec![0], vec![1]];
        let pred = vec![vec![0], vec![0]];
        assert!((micro_f1(&pred, &truth) - 0.5).abs() < 1e-15);
        assert!((macro_f1(&pred, &truth) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unseen_labels_count_as_zero() {
        let truth = vec![vec![0]];
        assert_eq!(macro_f1_over(&truth, &truth, 2), 0.5);
    }

    #[test]
    fn split_sizes() {
        let s = SplitConfig { t_r: 0.5, repetitions: 1, seed: 0 };
        assert_eq!(s.sizes(34).unwrap(), (17, 17));
        let s = SplitConfig { t_r: 0.999, ..s };
        assert_eq!(s.sizes(34), Err(Error::DegenerateSplit { train: 34, test: 0 }));
        assert!(SplitConfig { t_r: 1.0, ..s }.validate().is_err());
        assert!(SplitConfig { repetitions: 0, t_r: 0.5, seed: 0 }.validate().is_err());
        assert_eq!(SplitConfig { t_r: 0.1, ..s }.sizes(30).unwrap(), (3, 27));
    }

    #[test]
    fn identical_labels_are_trivial() {
        let phi = crate::trainer::init_embeddings(20, 3, 1);
        let labels = LabelTable::from_sets(vec![vec![0]; 20]);
        let split = SplitConfig { t_r: 0.5, repetitions: 3, seed: 2 };
        let r = evaluate(&phi, &labels, &split, DEFAULT_REG).unwrap();
        assert_eq!(r.micro.mean, 1.0);
        assert_eq!(r.majority_micro.mean, 1.0);
    }

    #[test]
    fn unlabeled_vertices_excluded() {
        let phi = crate::trainer::init_embeddings(6, 2, 1);
        let labels = LabelTable::from_sets(vec![vec![0], vec![], vec![1], vec![], vec![0], vec![1]]);
        let split = SplitConfig { t_r: 0.5, repetitions: 2, seed: 2 };
        let r = evaluate(&phi, &labels, &split, DEFAULT_REG).unwrap();
        assert_eq!(r.runs.len(), 2);
        assert_eq!(r, evaluate(&phi, &labels, &split, DEFAULT_REG).unwrap());
    }

    #[test]
    fn labels_beyond_embedding() {
        let phi = crate::trainer::init_embeddings(2, 2, 1);
        let labels = LabelTable::from_sets(vec![vec![0], vec![1], vec![0]]);
        let split = SplitConfig { t_r: 0.5, repetitions: 1, seed: 2 };
        assert_eq!(evaluate(&phi, &labels, &split, 1.0), Err(Error::UnknownVertex(2)));
    }

    #[test]
    fn empty_grid_axis() {
        let (g, labels) = crate::generate::sbm(&[5, 5], 0.9, 0.1, 1).unwrap();
        let grid = SweepGrid { dims: vec![], gammas: vec![1], t_rs: vec![0.5] };
        let split = SplitConfig { t_r: 0.5, repetitions: 1, seed: 0 };
        assert!(sweep(&g, &labels, &grid, &TrainConfig::default(), &split, 1.0).is_err());
    }

    #[test]
    fn single_cell_sweep_matches_evaluate() {
        let (g, labels) = crate::generate::sbm(&[10, 10], 0.8, 0.05, 1).unwrap();
        let base = TrainConfig { d: 4, gamma: 2, t: 10, w: 3, seed: 4, ..TrainConfig::default() };
        let split = SplitConfig { t_r: 0.5, repetitions: 2, seed: 9 };
        let grid = SweepGrid { dims: vec![4], gammas: vec![2], t_rs: vec![0.5] };
        let cells = sweep(&g, &labels, &grid, &base, &split, 1.0).unwrap();
        assert_eq!(cells.len(), 1);
        let phi = crate::trainer::train(&g, &base).unwrap();
        assert_eq!(cells[0].report, evaluate(&phi, &labels, &split, 1.0).unwrap());
    }
}
